//! Same- and cross-scale wavelet correlators and their bulk approximations.
//!
//! A correlator here is the contraction `f_aᵀ G f_b` of a scale-n covariance block `G`
//! with wavelet overlaps `f`. For fermions `G = Γ⁰¹`. The bosonic approximations are
//! written for fields in scale-n lattice units, `G = 2ⁿ Γ_Φ / 2` for `⟨ΦΦ⟩` and
//! `G = 2⁻ⁿ Γ_Π / 2` for `⟨ΠΠ⟩`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fwt::{conjugate_covariance, ModeIndex, TransformPlan};
use crate::lattice::Boundary;
use crate::wavelet::{cross_scale_overlap, exponential_moments, wavelet_moments, FilterBank};

pub fn renormalized_mass(n: u32, r: u32, m0: f64) -> Result<f64> {
    if r > n {
        return Err(Error::InvalidScale { n, r });
    }
    Ok(m0 * (1u64 << (n - r)) as f64)
}

fn check_block(block: &DMatrix<f64>) -> Result<usize> {
    if block.nrows() != block.ncols() {
        return Err(Error::Shape(format!("covariance block is {}x{}", block.nrows(), block.ncols())));
    }
    Ok(block.nrows())
}

fn overlap_column(fb: &FilterBank, n: u32, r: u32, v: usize, l: usize) -> Result<DVector<f64>> {
    let f = cross_scale_overlap(fb, n, r, v)?;
    if l >= f.ncols() {
        return Err(Error::IndexOutOfRange { index: l, len: f.ncols() });
    }
    Ok(f.column(l).into_owned())
}

/// `Σ_{j,j'} G[j,j'] f_{j,ℓ}^{n,r} f_{j',ℓ'}^{n,r'}` for wavelet modes `(r, ℓ)` and `(r', ℓ')`.
pub fn wavelet_correlator(block: &DMatrix<f64>, fb: &FilterBank, n: u32, a: (u32, usize), b: (u32, usize)) -> Result<f64> {
    let v = check_block(block)?;
    let fa = overlap_column(fb, n, a.0, v, a.1)?;
    let fb_ = overlap_column(fb, n, b.0, v, b.1)?;
    Ok(fa.dot(&(block * fb_)))
}

/// The same correlator read off the wavelet-transformed covariance.
pub fn wavelet_correlator_transformed(
    block: &DMatrix<f64>,
    fb: &FilterBank,
    n: u32,
    a: (u32, usize),
    b: (u32, usize),
) -> Result<f64> {
    let v = check_block(block)?;
    for r in [a.0, b.0] {
        if r >= n {
            return Err(Error::InvalidScale { n, r });
        }
    }
    let levels = n - a.0.min(b.0);
    let plan = TransformPlan::new(v, levels, n, fb.clone(), Boundary::Periodic)?;
    let t = conjugate_covariance(block, &plan)?;
    let pos = |(r, l): (u32, usize)| {
        t.position(0, ModeIndex::wavelet(r as i64, l)).ok_or(Error::IndexOutOfRange { index: l, len: v >> (n - r) })
    };
    Ok(t.matrix[(pos(a)?, pos(b)?)])
}

/// `c[ℓ] = f_0ᵀ G f_ℓ` for all translates `ℓ` at scale `r`.
pub fn same_scale_row(block: &DMatrix<f64>, fb: &FilterBank, n: u32, r: u32) -> Result<Vec<f64>> {
    let v = check_block(block)?;
    let f = cross_scale_overlap(fb, n, r, v)?;
    let g0 = block.transpose() * f.column(0);
    Ok((f.transpose() * g0).iter().copied().collect())
}

fn binomial(n: u64, k: u64) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn lowest_moment_sq(fb: &FilterBank) -> f64 {
    let k = fb.k;
    let m = wavelet_moments(fb, k).expect("K within moment range").moments[k];
    binomial(2 * k as u64, k as u64) * m * m
}

/// Leading bulk term `(−1)^K C(2K,K) ⟨x^K⟩_w² / (π ℓ^{2K+1})` of the massless fermionic
/// same-scale correlator.
pub fn fermion_bulk_approx(fb: &FilterBank, l: f64) -> f64 {
    let k = fb.k as i32;
    let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
    sign * lowest_moment_sq(fb) / (std::f64::consts::PI * l.powi(2 * k + 1))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BosonObservable {
    /// `⟨Φ Φ⟩`
    Ff,
    /// `⟨Π Π⟩`
    Pp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Massless,
    Massive,
}

/// Bulk same-scale bosonic correlator at separation `ℓ` between scale-`r` wavelets.
/// `m0` is in units of the scale-n spacing, so `m̃ = 2^{n−r} m0`.
pub fn boson_bulk_approx(kind: BosonObservable, phase: Phase, fb: &FilterBank, n: u32, r: u32, l: f64, m0: f64) -> Result<f64> {
    if r > n {
        return Err(Error::InvalidScale { n, r });
    }
    let k = fb.k as i32;
    let up = (1u64 << (n - r)) as f64;
    let pi = std::f64::consts::PI;
    Ok(match phase {
        Phase::Massless => {
            let c = lowest_moment_sq(fb);
            match kind {
                BosonObservable::Ff => -up * c / (4.0 * pi * l.powi(2 * k) * k as f64),
                BosonObservable::Pp => (2 * k + 1) as f64 * c / (up * 2.0 * pi * l.powi(2 * k + 2)),
            }
        }
        Phase::Massive => {
            let mt = renormalized_mass(n, r, m0)?;
            let (_, minus) = exponential_moments(fb, -mt);
            let (_, plus) = exponential_moments(fb, mt);
            let decay = (-l * mt).exp() * minus * plus;
            match kind {
                BosonObservable::Ff => -up * decay / (8.0 * pi * l * mt).sqrt(),
                BosonObservable::Pp => decay * (mt / (8.0 * pi * l.powi(3))).sqrt() / up,
            }
        }
    })
}
