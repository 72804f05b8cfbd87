//! Gaussian entanglement of purification for two-region bosonic states.
//!
//! A purification of `σ_AB` (field covariance `D`, momentum covariance `J`) adds ancillas
//! `Ā B̄` coupled through `K`. The pure state has momentum covariance
//! `M = [[J, K], [Kᵀ, L]]` with `L = −Kᵀ D (I − J D)⁻¹ K` and field covariance `M⁻¹`;
//! `E_p` is the smallest entropy of `A Ā` over the family.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::boson::{boson_entropy, symplectic_eigenvalues, BosonCovariance};
use crate::error::{Error, Result};
use crate::linalg::select;
use crate::optim::{golden_section, halton, nelder_mead};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EoPResult {
    /// Bits.
    pub e_p: f64,
    pub minimizer: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

impl EoPResult {
    /// `I/2 ≤ E_p ≤ min(S_A, S_B) + 1e−6`.
    pub fn check_bounds(&self, mutual_info: f64, s_a: f64, s_b: f64) -> Result<()> {
        let hi = s_a.min(s_b) + 1e-6;
        let lo = mutual_info / 2.0 - 1e-6;
        if self.e_p < 0.0 || self.e_p < lo || self.e_p > hi {
            return Err(Error::InvalidState(format!("E_p = {} outside [{lo}, {hi}]", self.e_p)));
        }
        Ok(())
    }
}

fn validate(sigma: &BosonCovariance, modes: usize) -> Result<()> {
    let (phi, pi) = (&sigma.gamma_phi, &sigma.gamma_pi);
    if phi.shape() != (modes, modes) || pi.shape() != (modes, modes) {
        return Err(Error::Shape(format!("expected a {modes}-mode covariance, got {:?}", phi.shape())));
    }
    let spec = symplectic_eigenvalues(phi, pi)?;
    if let Some(l) = spec.lambdas.iter().find(|&&l| l < 0.5 - 1e-9) {
        return Err(Error::InvalidCovariance(format!("symplectic eigenvalue {l} < 1/2")));
    }
    Ok(())
}

/// Entropy (bits) of `A Ā` for the purification with coupling `k`. The first half of the
/// modes of `sigma` form `A`. Unphysical or singular points return `+∞`.
pub fn purification_entropy(sigma: &BosonCovariance, k: &DMatrix<f64>) -> f64 {
    let n = sigma.gamma_phi.nrows();
    let (d, j) = (&sigma.gamma_phi, &sigma.gamma_pi);
    let Some(inner) = (DMatrix::identity(n, n) - j * d).lu().solve(k) else {
        return f64::INFINITY;
    };
    let l = -(k.transpose() * d * inner);
    let mut m = DMatrix::zeros(2 * n, 2 * n);
    m.view_mut((0, 0), (n, n)).copy_from(j);
    m.view_mut((0, n), (n, n)).copy_from(k);
    m.view_mut((n, 0), (n, n)).copy_from(&k.transpose());
    m.view_mut((n, n), (n, n)).copy_from(&l);
    let m = (&m + m.transpose()) * 0.5;
    let Some(minv) = m.clone().cholesky().map(|c| c.inverse()) else {
        return f64::INFINITY;
    };
    let half = n / 2;
    let idx: Vec<usize> = (0..half).chain(n..n + half).collect();
    match symplectic_eigenvalues(&select(&minv, &idx), &select(&m, &idx)) {
        Ok(s) if s.lambdas.iter().all(|&l| l >= 0.5 - 1e-9) => boson_entropy(&s),
        _ => f64::INFINITY,
    }
}

fn two_mode_k(x: f64) -> DMatrix<f64> {
    DMatrix::from_row_slice(2, 2, &[1.0, x, x, 1.0])
}

/// `[[I, Q], [Q, I]]` with `Q` row-major from `q`.
fn four_mode_k(q: &[f64]) -> DMatrix<f64> {
    let mut k = DMatrix::identity(4, 4);
    for a in 0..2 {
        for b in 0..2 {
            k[(a, 2 + b)] = q[2 * a + b];
            k[(2 + a, b)] = q[2 * a + b];
        }
    }
    k
}

/// Modes ordered `[A, B]`; minimizes over `K = [[1, x], [x, 1]]`, `x ∈ (−1, 1)`.
pub fn eop_two_mode(sigma: &BosonCovariance) -> Result<EoPResult> {
    validate(sigma, 2)?;
    let m = golden_section(|x| purification_entropy(sigma, &two_mode_k(x)), -0.999, 0.999, 401, 1e-7);
    Ok(EoPResult { e_p: m.f.max(0.0), minimizer: m.x, iterations: m.iterations, converged: m.converged })
}

pub const FOUR_MODE_RESTARTS: usize = 8;

/// Modes ordered `[A_s, A_w, B_s, B_w]`; minimizes over the four entries of `Q`.
pub fn eop_four_mode(sigma: &BosonCovariance) -> Result<EoPResult> {
    validate(sigma, 4)?;
    let f = |q: &[f64]| purification_entropy(sigma, &four_mode_k(q));
    let mut best: Option<crate::optim::Minimum> = None;
    let mut iterations = 0;
    let mut any_converged = false;
    for start in halton(FOUR_MODE_RESTARTS, 4) {
        let x0: Vec<f64> = start.iter().map(|u| 1.8 * u - 0.9).collect();
        let m = nelder_mead(&f, &x0, 0.1, 1e-7, 4000);
        iterations += m.iterations;
        any_converged |= m.converged;
        if m.f.is_finite() && best.as_ref().is_none_or(|b| m.f < b.f) {
            best = Some(m);
        }
    }
    Ok(match best {
        Some(b) => EoPResult { e_p: b.f.max(0.0), minimizer: b.x, iterations, converged: any_converged && b.converged },
        None => EoPResult { e_p: f64::INFINITY, minimizer: vec![f64::NAN; 4], iterations, converged: false },
    })
}
