//! Wavelet-projected free scalar field in one and two dimensions.
//!
//! Covariances follow the anticommutator convention: for the ground state
//! `Γ_Π = √K`, `Γ_Φ = K^{-1/2}` and the symplectic eigenvalues of a pure state are 1/2.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::lattice::{Boundary, LatticeSpec, Spectrum};
use crate::stencil::DerivativeStencil;

/// Smallest eigenvalue of `K` accepted as positive definite.
pub const KAPPA_FLOOR: f64 = 1e-14;

/// Default cap on a single dense allocation, 8 GiB.
pub const DEFAULT_MEM_CAP: u64 = 8 << 30;

fn check(lat: &LatticeSpec, st: &DerivativeStencil) -> Result<()> {
    lat.validate()?;
    if st.alpha != 2 {
        return Err(Error::Mismatch(format!("boson coupling needs a second-derivative stencil, got alpha={}", st.alpha)));
    }
    if st.k != lat.k {
        return Err(Error::Mismatch(format!("stencil K={} but lattice K={}", st.k, lat.k)));
    }
    if lat.bc == Boundary::Antiperiodic {
        return Err(Error::Unsupported("bosons take periodic or open boundaries".into()));
    }
    if lat.dims == 2 && lat.bc != Boundary::Periodic {
        return Err(Error::Unsupported("two-dimensional lattices are periodic only".into()));
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct KMatrix {
    pub lattice: LatticeSpec,
    pub k_mat: DMatrix<f64>,
}

fn laplacian(lat: &LatticeSpec, st: &DerivativeStencil) -> DMatrix<f64> {
    st.matrix(lat.v(), lat.bc) * -((1u64 << (2 * lat.n)) as f64)
}

/// `K = m² I − 4ⁿ D²` on a ring (periodic) or chain (open).
pub fn build_k(lat: &LatticeSpec, st: &DerivativeStencil) -> Result<KMatrix> {
    check(lat, st)?;
    if lat.dims != 1 {
        return Err(Error::Mismatch("build_k is one-dimensional; use build_k_2d".into()));
    }
    let v = lat.v();
    let m = lat.mass();
    let k_mat = laplacian(lat, st) + DMatrix::identity(v, v) * (m * m);
    Ok(KMatrix { lattice: lat.clone(), k_mat })
}

/// Kronecker sum `m² I + L ⊕ L` on the `V×V` torus, index `i·V + j`.
pub fn build_k_2d(lat: &LatticeSpec, st: &DerivativeStencil, mem_cap: u64) -> Result<KMatrix> {
    check(lat, st)?;
    if lat.dims != 2 {
        return Err(Error::Mismatch("build_k_2d needs dims = 2".into()));
    }
    let v = lat.v();
    let needed = 8u64.saturating_mul((v as u64).pow(4));
    if needed > mem_cap {
        return Err(Error::MemoryCap { needed, cap: mem_cap });
    }
    let l1 = laplacian(lat, st);
    let m2 = lat.mass().powi(2);
    let k_mat = DMatrix::from_fn(v * v, v * v, |a, b| {
        let (i, j) = (a / v, a % v);
        let (ip, jp) = (b / v, b % v);
        let mut x = 0.0;
        if j == jp {
            x += l1[(i, ip)];
        }
        if i == ip {
            x += l1[(j, jp)];
        }
        if a == b {
            x += m2;
        }
        x
    });
    Ok(KMatrix { lattice: lat.clone(), k_mat })
}

/// Laplacian symbol `μ_k = −4ⁿ Σ_ℓ Δ_ℓ cos(2πkℓ/V)` for `k = 0..V`.
fn laplacian_symbol(lat: &LatticeSpec, st: &DerivativeStencil) -> Vec<f64> {
    let v = lat.v();
    let scale = (1u64 << (2 * lat.n)) as f64;
    let terms = st.to_f64();
    (0..v)
        .map(|k| {
            -scale
                * terms
                    .iter()
                    .map(|&(l, d)| d * (2.0 * std::f64::consts::PI * (k as f64) * l as f64 / v as f64).cos())
                    .sum::<f64>()
        })
        .collect()
}

fn radicand(kappa: f64, scale: f64) -> Result<f64> {
    if kappa < -1e-12 * scale.max(1.0) {
        return Err(Error::NegativeRadicand(kappa));
    }
    Ok(kappa.max(0.0))
}

/// `ω_k = √(m² + μ_k)`, `k = 1..=V` (`k = V` is the zero-momentum mode). Open chains use
/// the dense spectrum of `K` labelled by rank.
pub fn boson_spectrum(lat: &LatticeSpec, st: &DerivativeStencil) -> Result<Spectrum> {
    check(lat, st)?;
    if lat.dims != 1 {
        return Err(Error::Unsupported("spectrum is reported for one-dimensional lattices".into()));
    }
    if lat.bc == Boundary::Open {
        let km = build_k(lat, st)?;
        let mut omegas = Vec::new();
        for e in crate::linalg::sym_eigenvalues(&km.k_mat) {
            omegas.push(radicand(e, 4f64.powi(lat.n as i32))?.sqrt());
        }
        let momenta = (0..omegas.len()).map(|i| i as f64).collect();
        return Ok(Spectrum { momenta, omegas });
    }
    let v = lat.v();
    let mu = laplacian_symbol(lat, st);
    let m2 = lat.mass().powi(2);
    let scale = 4f64.powi(lat.n as i32);
    let mut momenta = Vec::with_capacity(v);
    let mut omegas = Vec::with_capacity(v);
    for k in 1..=v {
        momenta.push(k as f64);
        omegas.push(radicand(m2 + mu[k % v], scale)?.sqrt());
    }
    Ok(Spectrum { momenta, omegas })
}

#[derive(Debug, Clone)]
pub struct BosonCovariance {
    pub gamma_phi: DMatrix<f64>,
    pub gamma_pi: DMatrix<f64>,
}

impl BosonCovariance {
    pub fn select(&self, idx: &[usize]) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
        let n = self.gamma_phi.nrows();
        if let Some(&bad) = idx.iter().find(|&&i| i >= n) {
            return Err(Error::IndexOutOfRange { index: bad, len: n });
        }
        Ok((crate::linalg::select(&self.gamma_phi, idx), crate::linalg::select(&self.gamma_pi, idx)))
    }
}

/// `Γ_Π = √K`, `Γ_Φ = K^{-1/2}` from one symmetric eigendecomposition.
pub fn ground_covariance(km: &KMatrix) -> Result<BosonCovariance> {
    let eig = nalgebra::SymmetricEigen::new(km.k_mat.clone());
    let min_eig = eig.eigenvalues.min();
    if min_eig <= KAPPA_FLOOR {
        return Err(Error::Conditioning { min_eig });
    }
    let u = &eig.eigenvectors;
    let with = |f: &dyn Fn(f64) -> f64| {
        let mut s = u.clone();
        for (j, &l) in eig.eigenvalues.iter().enumerate() {
            s.column_mut(j).scale_mut(f(l));
        }
        s * u.transpose()
    };
    Ok(BosonCovariance { gamma_pi: with(&|l| l.sqrt()), gamma_phi: with(&|l| 1.0 / l.sqrt()) })
}

/// Translation-invariant ground state on a periodic ring or torus, stored as the
/// first row of each (block-)circulant covariance.
#[derive(Debug, Clone)]
pub struct PeriodicBosonState {
    pub v: usize,
    pub dims: u8,
    pub phi: Vec<f64>,
    pub pi: Vec<f64>,
}

fn inverse_fft_real(sym: &[f64], v: usize, dims: u8) -> Vec<f64> {
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_inverse(v);
    let mut buf: Vec<Complex64> = sym.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    if dims == 1 {
        fft.process(&mut buf);
    } else {
        for row in buf.chunks_mut(v) {
            fft.process(row);
        }
        let mut col = vec![Complex64::new(0.0, 0.0); v];
        for j in 0..v {
            for i in 0..v {
                col[i] = buf[i * v + j];
            }
            fft.process(&mut col);
            for i in 0..v {
                buf[i * v + j] = col[i];
            }
        }
    }
    let norm = (v as f64).powi(dims as i32);
    buf.iter().map(|z| z.re / norm).collect()
}

pub fn periodic_ground_state(lat: &LatticeSpec, st: &DerivativeStencil) -> Result<PeriodicBosonState> {
    check(lat, st)?;
    if lat.bc != Boundary::Periodic {
        return Err(Error::Unsupported("circulant ground state needs periodic boundaries".into()));
    }
    let v = lat.v();
    let mu = laplacian_symbol(lat, st);
    let m2 = lat.mass().powi(2);
    let scale = 4f64.powi(lat.n as i32);
    let kappa: Vec<f64> = if lat.dims == 1 {
        mu.iter().map(|&x| m2 + x).collect()
    } else {
        (0..v * v).map(|a| m2 + mu[a / v] + mu[a % v]).collect()
    };
    let mut sqrt_k = Vec::with_capacity(kappa.len());
    for &x in &kappa {
        sqrt_k.push(radicand(x, scale)?.sqrt());
    }
    let min_eig = kappa.iter().copied().fold(f64::INFINITY, f64::min);
    if min_eig <= KAPPA_FLOOR {
        return Err(Error::Conditioning { min_eig });
    }
    let inv: Vec<f64> = sqrt_k.iter().map(|s| 1.0 / s).collect();
    Ok(PeriodicBosonState { v, dims: lat.dims, phi: inverse_fft_real(&inv, v, lat.dims), pi: inverse_fft_real(&sqrt_k, v, lat.dims) })
}

impl PeriodicBosonState {
    pub fn modes(&self) -> usize {
        self.v.pow(self.dims as u32)
    }

    fn offset(&self, a: usize, b: usize) -> usize {
        let v = self.v;
        if self.dims == 1 {
            (a + v - b) % v
        } else {
            let di = (a / v + v - b / v) % v;
            let dj = (a % v + v - b % v) % v;
            di * v + dj
        }
    }

    /// `(Γ_Φ, Γ_Π)` restricted to `idx`.
    pub fn select(&self, idx: &[usize]) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
        let n = self.modes();
        if let Some(&bad) = idx.iter().find(|&&i| i >= n) {
            return Err(Error::IndexOutOfRange { index: bad, len: n });
        }
        let phi = DMatrix::from_fn(idx.len(), idx.len(), |i, j| self.phi[self.offset(idx[i], idx[j])]);
        let pi = DMatrix::from_fn(idx.len(), idx.len(), |i, j| self.pi[self.offset(idx[i], idx[j])]);
        Ok((phi, pi))
    }

    pub fn dense(&self) -> BosonCovariance {
        let all: Vec<usize> = (0..self.modes()).collect();
        let (gamma_phi, gamma_pi) = self.select(&all).expect("indices in range");
        BosonCovariance { gamma_phi, gamma_pi }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticSpectrum {
    pub lambdas: Vec<f64>,
}

fn finish_spectrum(mut lambdas: Vec<f64>) -> Result<SymplecticSpectrum> {
    for l in lambdas.iter_mut() {
        if *l < 0.5 - 1e-6 {
            return Err(Error::InvalidState(format!("symplectic eigenvalue {l} below 1/2")));
        }
        *l = l.max(0.5);
    }
    lambdas.sort_by(f64::total_cmp);
    Ok(SymplecticSpectrum { lambdas })
}

/// `½ √eig(Γ_Φ Γ_Π)`, evaluated as the symmetric product `Lᵀ Γ_Π L` with `Γ_Φ = L Lᵀ`.
pub fn symplectic_eigenvalues(phi_a: &DMatrix<f64>, pi_a: &DMatrix<f64>) -> Result<SymplecticSpectrum> {
    if phi_a.shape() != pi_a.shape() || phi_a.nrows() != phi_a.ncols() {
        return Err(Error::Shape(format!("covariance blocks {:?} and {:?}", phi_a.shape(), pi_a.shape())));
    }
    let l = phi_a
        .clone()
        .cholesky()
        .ok_or_else(|| Error::InvalidState("field covariance is not positive definite".into()))?
        .unpack();
    let c = l.transpose() * pi_a * &l;
    let c = (&c + c.transpose()) * 0.5;
    finish_spectrum(crate::linalg::sym_eigenvalues(&c).into_iter().map(|e| 0.5 * e.max(0.0).sqrt()).collect())
}

/// Positive eigenvalues of `iΩΓ/2` with `Γ = Γ_Φ ⊕ Γ_Π`, from a general eigensolve.
pub fn symplectic_eigenvalues_dense(phi_a: &DMatrix<f64>, pi_a: &DMatrix<f64>) -> Result<SymplecticSpectrum> {
    if phi_a.shape() != pi_a.shape() || phi_a.nrows() != phi_a.ncols() {
        return Err(Error::Shape(format!("covariance blocks {:?} and {:?}", phi_a.shape(), pi_a.shape())));
    }
    let n = phi_a.nrows();
    let mut og = DMatrix::zeros(2 * n, 2 * n);
    og.view_mut((0, n), (n, n)).copy_from(pi_a);
    og.view_mut((n, 0), (n, n)).copy_from(&(-phi_a));
    let mut im: Vec<f64> = og.complex_eigenvalues().iter().map(|z| z.im).filter(|&x| x > 0.0).collect();
    if im.len() != n {
        return Err(Error::InvalidState(format!("expected {n} positive frequencies, found {}", im.len())));
    }
    im.iter_mut().for_each(|x| *x *= 0.5);
    finish_spectrum(im)
}

/// `f(λ) = (λ+½)log₂(λ+½) − (λ−½)log₂(λ−½)`.
pub fn mode_entropy(lambda: f64) -> f64 {
    let a = lambda + 0.5;
    let b = lambda - 0.5;
    let tail = if b > 0.0 { b * b.log2() } else { 0.0 };
    a * a.log2() - tail
}

/// Entropy in bits.
pub fn boson_entropy(spec: &SymplecticSpectrum) -> f64 {
    spec.lambdas.iter().map(|&l| mode_entropy(l)).sum()
}
