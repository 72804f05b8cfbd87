//! Wavelet-projected Ising fermion: couplings, spectrum, ground-state covariance,
//! entropies and fidelities.
//!
//! Covariances are stored in the Majorana basis that makes the coupling off-diagonal,
//! `Q' = [[0, M], [-Mᵀ, 0]]` with `M = 2ⁿD − m`. The ground state is then
//! `Γ = [[0, Γ⁰¹], [−Γ⁰¹ᵀ, 0]]` and only `Γ⁰¹` is kept.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{Boundary, LatticeSpec, Spectrum};
use crate::linalg::binary_entropy;
use crate::stencil::DerivativeStencil;

/// Frequencies below this are treated as zero modes by the diagonalization route.
pub const OMEGA_FLOOR: f64 = 1e-12;

fn check(lat: &LatticeSpec, st: &DerivativeStencil) -> Result<()> {
    lat.validate()?;
    if lat.dims != 1 {
        return Err(Error::Unsupported("fermions are one-dimensional only".into()));
    }
    if st.alpha != 1 {
        return Err(Error::Mismatch(format!("fermion coupling needs a first-derivative stencil, got alpha={}", st.alpha)));
    }
    if st.k != lat.k {
        return Err(Error::Mismatch(format!("stencil K={} but lattice K={}", st.k, lat.k)));
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct CouplingMatrix {
    pub lattice: LatticeSpec,
    /// `2V×2V`, index `σV + ℓ`.
    pub q: DMatrix<f64>,
}

impl CouplingMatrix {
    /// Off-diagonal block `M` of the coupling in the rotated Majorana basis.
    pub fn rotated_block(&self) -> DMatrix<f64> {
        let v = self.lattice.v();
        let a = self.q.view((0, 0), (v, v));
        a - DMatrix::identity(v, v) * self.lattice.mass()
    }
}

/// `Q_{ℓσ;ℓ'σ'} = (-1)^σ 2ⁿ Δ_{ℓ'-ℓ} δ_{σσ'} + m δ_{ℓℓ'} (σ'-σ)`.
pub fn build_coupling(lat: &LatticeSpec, st: &DerivativeStencil) -> Result<CouplingMatrix> {
    check(lat, st)?;
    let v = lat.v();
    let a = st.matrix(v, lat.bc) * (1u64 << lat.n) as f64;
    let m = lat.mass();
    let mut q = DMatrix::zeros(2 * v, 2 * v);
    q.view_mut((0, 0), (v, v)).copy_from(&a);
    q.view_mut((v, v), (v, v)).copy_from(&(-&a));
    for l in 0..v {
        q[(l, v + l)] = m;
        q[(v + l, l)] = -m;
    }
    Ok(CouplingMatrix { lattice: lat.clone(), q })
}

fn rotated_block(lat: &LatticeSpec, st: &DerivativeStencil) -> DMatrix<f64> {
    let v = lat.v();
    st.matrix(v, lat.bc) * (1u64 << lat.n) as f64 - DMatrix::identity(v, v) * lat.mass()
}

fn ring_momenta(lat: &LatticeSpec) -> Result<Vec<f64>> {
    let shift = match lat.bc {
        Boundary::Antiperiodic => 0.5,
        Boundary::Periodic => 0.0,
        Boundary::Open => return Err(Error::Unsupported("momentum modes need a ring boundary".into())),
    };
    Ok((0..lat.v()).map(|p| p as f64 + shift).collect())
}

/// `q_k = 2^{n+1} Σ_{ℓ≥1} Δ_ℓ sin(2πkℓ/V)`.
fn q_of_k(lat: &LatticeSpec, st: &DerivativeStencil, k: f64) -> f64 {
    let v = lat.v() as f64;
    let scale = (1u64 << (lat.n + 1)) as f64;
    st.delta
        .iter()
        .filter(|(&l, _)| l > 0)
        .map(|(&l, d)| crate::stencil::to_f64(d) * (2.0 * std::f64::consts::PI * k * l as f64 / v).sin())
        .sum::<f64>()
        * scale
}

/// Mode frequencies. Ring boundaries use the closed form; open chains fall back to the
/// singular values of the coupling block, labelled by their rank.
pub fn spectrum(lat: &LatticeSpec, st: &DerivativeStencil) -> Result<Spectrum> {
    check(lat, st)?;
    if lat.bc == Boundary::Open {
        let mut omegas: Vec<f64> = rotated_block(lat, st).singular_values().iter().copied().collect();
        omegas.sort_by(f64::total_cmp);
        let momenta = (0..omegas.len()).map(|i| i as f64).collect();
        return Ok(Spectrum { momenta, omegas });
    }
    let m = lat.mass();
    let momenta = ring_momenta(lat)?;
    let omegas = momenta.iter().map(|&k| q_of_k(lat, st, k).hypot(m)).collect();
    Ok(Spectrum { momenta, omegas })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BogoliubovAngles {
    pub momenta: Vec<f64>,
    pub q: Vec<f64>,
    pub theta: Vec<f64>,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
}

/// `θ_k = atan2(-q_k, m + ω_k)`, continuous through `m = 0`.
pub fn bogoliubov_angles(lat: &LatticeSpec, st: &DerivativeStencil) -> Result<BogoliubovAngles> {
    check(lat, st)?;
    let m = lat.mass();
    let momenta = ring_momenta(lat)?;
    let q: Vec<f64> = momenta.iter().map(|&k| q_of_k(lat, st, k)).collect();
    let theta: Vec<f64> = q.iter().map(|&qk| (-qk).atan2(m + qk.hypot(m))).collect();
    let u = theta.iter().map(|t| t.cos()).collect();
    let v = theta.iter().map(|t| t.sin()).collect();
    Ok(BogoliubovAngles { momenta, q, theta, u, v })
}

#[derive(Debug, Clone)]
pub struct FermionCovariance {
    pub lattice: LatticeSpec,
    pub gamma01: DMatrix<f64>,
}

impl FermionCovariance {
    pub fn v(&self) -> usize {
        self.gamma01.nrows()
    }

    /// Full `2V×2V` covariance, index `σV + ℓ`.
    pub fn full(&self) -> DMatrix<f64> {
        block_form(&self.gamma01)
    }

    /// Covariance in the unrotated basis where the coupling is `Q`.
    pub fn coupling_basis(&self) -> DMatrix<f64> {
        let g = &self.gamma01;
        let gt = g.transpose();
        let v = self.v();
        let mut out = DMatrix::zeros(2 * v, 2 * v);
        out.view_mut((0, 0), (v, v)).copy_from(&((g - &gt) * 0.5));
        out.view_mut((v, v), (v, v)).copy_from(&((&gt - g) * 0.5));
        out.view_mut((0, v), (v, v)).copy_from(&((g + &gt) * -0.5));
        out.view_mut((v, 0), (v, v)).copy_from(&((g + &gt) * 0.5));
        out
    }

    /// Covariance of the single Majorana chain `b_{ℓσ}` of the coupling basis. The two
    /// chains decouple when `m = 0`.
    pub fn chain(&self, flavor: usize) -> DMatrix<f64> {
        let g = &self.gamma01;
        let a = (g - g.transpose()) * 0.5;
        if flavor == 0 {
            a
        } else {
            -a
        }
    }

    /// `Γ⁰¹` restricted to `sites` (both flavors kept).
    pub fn block(&self, sites: &[usize]) -> Result<DMatrix<f64>> {
        let v = self.v();
        if let Some(&bad) = sites.iter().find(|&&s| s >= v) {
            return Err(Error::IndexOutOfRange { index: bad, len: v });
        }
        Ok(crate::linalg::select_rect(&self.gamma01, sites, sites))
    }

    /// `max |Γ⁰¹ᵀ Γ⁰¹ − I|`; zero for a pure state.
    pub fn purity_residual(&self) -> f64 {
        let v = self.v();
        (self.gamma01.transpose() * &self.gamma01 - DMatrix::identity(v, v)).amax()
    }
}

pub fn block_form(g01: &DMatrix<f64>) -> DMatrix<f64> {
    let (r, c) = g01.shape();
    let mut out = DMatrix::zeros(r + c, r + c);
    out.view_mut((0, r), (r, c)).copy_from(g01);
    out.view_mut((r, 0), (c, r)).copy_from(&(-g01.transpose()));
    out
}

/// Covariance of the uncoupled reference state, `δ_{ℓℓ'}(σ − σ')`.
pub fn uncoupled_covariance(v: usize) -> DMatrix<f64> {
    let mut g = DMatrix::zeros(2 * v, 2 * v);
    for l in 0..v {
        g[(v + l, l)] = 1.0;
        g[(l, v + l)] = -1.0;
    }
    g
}

/// Toeplitz ground state from the momentum sum, evaluated with one FFT.
pub fn ground_covariance_analytic(lat: &LatticeSpec, st: &DerivativeStencil) -> Result<FermionCovariance> {
    let ang = bogoliubov_angles(lat, st)?;
    let v = lat.v();
    let shift = ang.momenta[0];
    let mut buf: Vec<Complex64> = ang.theta.iter().map(|&t| Complex64::from_polar(1.0, -2.0 * t)).collect();
    FftPlanner::new().plan_fft_forward(v).process(&mut buf);
    let sym: Vec<Complex64> = buf
        .iter()
        .enumerate()
        .map(|(j, z)| z * Complex64::from_polar(1.0 / v as f64, -2.0 * std::f64::consts::PI * j as f64 * shift / v as f64))
        .collect();
    let residue = sym.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    if residue > 1e-12 {
        return Err(Error::InvalidCovariance(format!("momentum sum has imaginary residue {residue:e}")));
    }
    let wrap = lat.bc.wrap_sign().unwrap_or(1.0);
    let g = DMatrix::from_fn(v, v, |l, lp| {
        if l >= lp {
            sym[l - lp].re
        } else {
            wrap * sym[v + l - lp].re
        }
    });
    Ok(FermionCovariance { lattice: lat.clone(), gamma01: g })
}

/// Ground state from the polar factor of the coupling block, `Γ⁰¹ = −M (MᵀM)^{-1/2}`.
/// Works for every boundary condition.
pub fn ground_covariance_diag(lat: &LatticeSpec, st: &DerivativeStencil) -> Result<FermionCovariance> {
    check(lat, st)?;
    let svd = rotated_block(lat, st).svd(true, true);
    let omega = svd.singular_values.min();
    if omega < OMEGA_FLOOR {
        return Err(Error::DegenerateGroundState { omega, floor: OMEGA_FLOOR });
    }
    let (u, vt) = (svd.u.unwrap(), svd.v_t.unwrap());
    Ok(FermionCovariance { lattice: lat.clone(), gamma01: -(u * vt) })
}

/// Entropy in bits of a real antisymmetric covariance. Each ±σ pair counts once.
pub fn fermion_entropy(gamma_a: &DMatrix<f64>) -> Result<f64> {
    if gamma_a.nrows() != gamma_a.ncols() {
        return Err(Error::Shape(format!("covariance is {}x{}", gamma_a.nrows(), gamma_a.ncols())));
    }
    let asym = crate::linalg::antisymmetry_residual(gamma_a);
    if asym > 1e-10 {
        return Err(Error::InvalidCovariance(format!("not antisymmetric (residual {asym:e})")));
    }
    Ok(0.5 * entropy_of_singular_values(gamma_a.singular_values().as_slice())?)
}

/// Entropy in bits of the state with off-diagonal block `g_a` (both flavors on the same sites).
pub fn block_entropy(g_a: &DMatrix<f64>) -> Result<f64> {
    entropy_of_singular_values(g_a.singular_values().as_slice())
}

fn entropy_of_singular_values(s: &[f64]) -> Result<f64> {
    let mut total = 0.0;
    for &x in s {
        if x > 1.0 + 1e-6 {
            return Err(Error::InvalidCovariance(format!("singular value {x} exceeds 1")));
        }
        total += binary_entropy((1.0 + x.clamp(0.0, 1.0)) / 2.0);
    }
    Ok(total)
}

/// `Π_{k < V/2} cos(θ_k(m₊) − θ_k(m₋))` for the pure ring ground states.
pub fn fidelity_global(lat: &LatticeSpec, st: &DerivativeStencil, m_minus: f64, m_plus: f64) -> Result<f64> {
    let a = bogoliubov_angles(&lat.with_mass(m_minus), st)?;
    let b = bogoliubov_angles(&lat.with_mass(m_plus), st)?;
    let half = lat.v() as f64 / 2.0;
    Ok(a.momenta
        .iter()
        .zip(a.theta.iter().zip(&b.theta))
        .filter(|(&k, _)| k < half)
        .map(|(_, (ta, tb))| (tb - ta).cos())
        .product())
}

fn check_pair(g1: &DMatrix<f64>, g2: &DMatrix<f64>) -> Result<usize> {
    if g1.shape() != g2.shape() || g1.nrows() != g1.ncols() {
        return Err(Error::Shape(format!("fidelity needs equal square matrices, got {:?} and {:?}", g1.shape(), g2.shape())));
    }
    if g1.nrows() % 2 != 0 {
        return Err(Error::Shape(format!("odd Majorana count {}", g1.nrows())));
    }
    for g in [g1, g2] {
        let asym = crate::linalg::antisymmetry_residual(g);
        if asym > 1e-10 {
            return Err(Error::InvalidCovariance(format!("not antisymmetric (residual {asym:e})")));
        }
    }
    Ok(g1.nrows())
}

fn hermitian(g: &DMatrix<f64>) -> DMatrix<Complex64> {
    g.map(|x| Complex64::new(0.0, x))
}

fn herm_fn<F: Fn(f64) -> f64>(p: &DMatrix<Complex64>, f: F) -> DMatrix<Complex64> {
    let eig = nalgebra::SymmetricEigen::new(p.clone());
    let u = &eig.eigenvectors;
    let mut scaled = u.clone();
    for (j, &l) in eig.eigenvalues.iter().enumerate() {
        scaled.column_mut(j).scale_mut(f(l));
    }
    scaled * u.adjoint()
}

/// Covariance of the normalized product of two Gaussian operators,
/// `A × B = 1 − (1 − B)(1 + AB)⁻¹(1 − A)`.
fn gaussian_product(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> Result<DMatrix<Complex64>> {
    let n = a.nrows();
    let id = DMatrix::<Complex64>::identity(n, n);
    let lhs = &id + a * b;
    let rhs = &id - a;
    let x = lhs
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::InvalidCovariance("singular Gaussian product".into()))?;
    Ok(&id - (&id - b) * x)
}

/// `log det(1 − Γ₁Γ₂)`; the determinant is a non-negative square of a Pfaffian.
fn log_det_overlap(g1: &DMatrix<f64>, g2: &DMatrix<f64>) -> f64 {
    let n = g1.nrows();
    let lu = (DMatrix::identity(n, n) - g1 * g2).lu();
    let u = lu.u();
    u.diagonal().iter().map(|d| d.abs().ln()).sum()
}

fn is_pure(g: &DMatrix<f64>) -> bool {
    let n = g.nrows();
    (g.transpose() * g - DMatrix::identity(n, n)).amax() < 1e-10
}

/// Uhlmann fidelity of two fermionic Gaussian states given by Majorana covariances.
///
/// The root `√ρ₁` is carried as a Gaussian operator with covariance `f(iΓ₁)`,
/// `f(p) = p / (1 + √(1 − p²))`, so nearly pure inputs stay finite.
pub fn fidelity_gaussian(g1: &DMatrix<f64>, g2: &DMatrix<f64>) -> Result<f64> {
    let dim = check_pair(g1, g2)?;
    let ld = log_det_overlap(g1, g2);
    if is_pure(g1) || is_pure(g2) {
        return Ok((0.25 * ld - 0.25 * dim as f64 * std::f64::consts::LN_2).exp().min(1.0));
    }
    let p1 = hermitian(g1);
    let p2 = hermitian(g2);
    let ps = herm_fn(&p1, |p| p / (1.0 + (1.0 - p * p).max(0.0).sqrt()));
    let pm = gaussian_product(&gaussian_product(&ps, &p2)?, &ps)?;
    let pm = (&pm + pm.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = nalgebra::SymmetricEigen::new(pm);
    let tail: f64 = eig
        .eigenvalues
        .iter()
        .map(|&g| {
            let g = g.clamp(-1.0, 1.0);
            ((1.0 + (1.0 - g * g).sqrt()) / 2.0).ln()
        })
        .sum();
    Ok((0.25 * ld + 0.25 * tail).exp().min(1.0))
}

/// Direct evaluation of
/// `det[1 + √(e^{A₁} e^{2A₂} e^{A₁})]^{1/2} / (det[1 + e^{2A₁}] det[1 + e^{2A₂}])^{1/4}`
/// with `A = artanh(iΓ)` and eigenvalues clipped to `±(1 − 1e−10)`. Loses accuracy for
/// nearly pure states; kept as a cross-check of [`fidelity_gaussian`].
pub fn fidelity_gaussian_literal(g1: &DMatrix<f64>, g2: &DMatrix<f64>) -> Result<f64> {
    check_pair(g1, g2)?;
    let clip = 1.0 - 1e-10;
    let e = |p: f64, s: f64| {
        let p = p.clamp(-clip, clip);
        ((1.0 + p) / (1.0 - p)).powf(s)
    };
    let p1 = hermitian(g1);
    let p2 = hermitian(g2);
    let e1 = herm_fn(&p1, |p| e(p, 0.5));
    let e2 = herm_fn(&p2, |p| e(p, 1.0));
    let x = &e1 * e2 * &e1;
    let x = (&x + x.adjoint()) * Complex64::new(0.5, 0.0);
    let num: f64 = x.symmetric_eigenvalues().iter().map(|&l| (1.0 + l.max(0.0).sqrt()).ln()).sum();
    let den = |p: &DMatrix<Complex64>| -> f64 {
        p.symmetric_eigenvalues().iter().map(|&l| (1.0 + e(l, 1.0)).ln()).sum()
    };
    Ok((0.5 * num - 0.25 * den(&p1) - 0.25 * den(&p2)).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stencil::solve_stencil;

    fn lat(x: usize, n: u32, k: usize, m0: f64) -> LatticeSpec {
        LatticeSpec::new(x, n, k, m0, Boundary::Antiperiodic)
    }

    #[test]
    fn coupling_is_antisymmetric() {
        let l = lat(8, 2, 3, 0.3);
        let q = build_coupling(&l, &solve_stencil(3, 1).unwrap()).unwrap().q;
        assert_eq!(q.transpose(), -q);
    }

    #[test]
    fn haar_coupling_by_hand() {
        let l = lat(4, 0, 1, 0.0);
        let q = build_coupling(&l, &solve_stencil(1, 1).unwrap()).unwrap().q;
        assert_eq!(q[(0, 1)], -0.5);
        assert_eq!(q[(1, 0)], 0.5);
        assert_eq!(q[(0, 3)], -0.5);
        assert_eq!(q[(3, 0)], 0.5);
        assert_eq!(q[(4, 5)], 0.5);
        // V = 2: both wrap images land on the same entry
        let l = lat(2, 0, 1, 0.0);
        let q = build_coupling(&l, &solve_stencil(1, 1).unwrap()).unwrap().q;
        assert_eq!(q[(0, 1)], -1.0);
    }

    #[test]
    fn coupling_spectrum_matches_formula() {
        for (k, m0) in [(2, 0.0), (3, 0.7)] {
            let l = lat(8, 1, k, m0);
            let st = solve_stencil(k, 1).unwrap();
            let q = build_coupling(&l, &st).unwrap().q;
            let mut sv: Vec<f64> = q.singular_values().iter().copied().collect();
            sv.sort_by(f64::total_cmp);
            let mut om = spectrum(&l, &st).unwrap().omegas;
            om.extend(om.clone());
            om.sort_by(f64::total_cmp);
            for (a, b) in sv.iter().zip(&om) {
                assert!((a - b).abs() < 1e-10, "{a} {b}");
            }
        }
    }

    #[test]
    fn haar_spectrum_is_sine() {
        let l = lat(4, 0, 1, 0.0);
        let s = spectrum(&l, &solve_stencil(1, 1).unwrap()).unwrap();
        for (k, w) in s.momenta.iter().zip(&s.omegas) {
            assert!((w - (std::f64::consts::PI * k / 2.0).sin().abs()).abs() < 1e-15);
        }
    }

    #[test]
    fn mass_gap() {
        for k in 1..=4 {
            let s = spectrum(&lat(4, 0, k, 10.0), &solve_stencil(k, 1).unwrap()).unwrap();
            assert!(s.min_omega() >= 10.0);
        }
    }

    #[test]
    fn angles_are_odd_and_normalized() {
        let l = lat(16, 1, 3, 0.4);
        let a = bogoliubov_angles(&l, &solve_stencil(3, 1).unwrap()).unwrap();
        let v = a.theta.len();
        for p in 0..v {
            assert!((a.u[p].powi(2) + a.v[p].powi(2) - 1.0).abs() < 1e-14);
            assert!((a.theta[p] + a.theta[v - 1 - p]).abs() < 1e-14);
        }
    }

    #[test]
    fn routes_agree() {
        for k in [1, 2, 3] {
            let st = solve_stencil(k, 1).unwrap();
            for m0 in [1e-8, 0.2, 1.0, -0.5] {
                let l = lat(16, 2, k, m0);
                let a = ground_covariance_analytic(&l, &st).unwrap();
                let d = ground_covariance_diag(&l, &st).unwrap();
                let err = (&a.gamma01 - &d.gamma01).amax();
                assert!(err < 1e-10, "K={k} m0={m0} err={err}");
            }
        }
    }

    #[test]
    fn massless_closed_form() {
        let l = lat(256, 0, 3, 0.0);
        let g = ground_covariance_analytic(&l, &solve_stencil(3, 1).unwrap()).unwrap().gamma01;
        let v = 256.0;
        for ell in 1..256 {
            let want = if ell % 2 == 1 { -2.0 / (v * (std::f64::consts::PI * ell as f64 / v).sin()) } else { 0.0 };
            // displacement symbol Γ⁰¹(ℓ) sits in column 0
            assert!((g[(ell, 0)] - want).abs() < 1e-10, "l={ell}");
        }
    }

    #[test]
    fn ground_state_is_pure_and_toeplitz() {
        let l = lat(16, 2, 3, 0.2);
        let c = ground_covariance_analytic(&l, &solve_stencil(3, 1).unwrap()).unwrap();
        assert!(c.purity_residual() < 1e-12);
        let g = &c.gamma01;
        for i in 1..g.nrows() {
            for j in 1..g.ncols() {
                assert!((g[(i, j)] - g[(i - 1, j - 1)]).abs() < 1e-12);
            }
        }
        assert!(fermion_entropy(&c.full()).unwrap().abs() < 1e-6);
    }

    #[test]
    fn zero_mode_is_rejected() {
        let l = LatticeSpec::new(8, 0, 2, 0.0, Boundary::Periodic);
        match ground_covariance_diag(&l, &solve_stencil(2, 1).unwrap()) {
            Err(Error::DegenerateGroundState { .. }) => {}
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn uncoupled_entries() {
        let g = uncoupled_covariance(3);
        assert_eq!(g[(3, 0)], 1.0);
        assert_eq!(g[(0, 3)], -1.0);
        assert_eq!(g[(0, 1)], 0.0);
    }

    #[test]
    fn maximally_mixed_mode_is_one_bit() {
        assert!((block_entropy(&DMatrix::zeros(1, 1)).unwrap() - 1.0).abs() < 1e-15);
        assert!((fermion_entropy(&DMatrix::zeros(2, 2)).unwrap() - 1.0).abs() < 1e-15);
        assert!(block_entropy(&DMatrix::from_element(1, 1, 1.1)).is_err());
    }

    #[test]
    fn complementary_entropies_agree() {
        let l = lat(32, 1, 3, 0.1);
        let c = ground_covariance_analytic(&l, &solve_stencil(3, 1).unwrap()).unwrap();
        let a: Vec<usize> = (0..20).collect();
        let b: Vec<usize> = (20..64).collect();
        let sa = block_entropy(&c.block(&a).unwrap()).unwrap();
        let sb = block_entropy(&c.block(&b).unwrap()).unwrap();
        assert!((sa - sb).abs() < 1e-6);
    }

    #[test]
    fn fidelity_identical_states() {
        let l = lat(16, 0, 3, 0.0);
        let st = solve_stencil(3, 1).unwrap();
        assert_eq!(fidelity_global(&l, &st, 0.3, 0.3).unwrap(), 1.0);
        let c = ground_covariance_analytic(&l.with_mass(0.2), &st).unwrap().full();
        let sites = [0usize, 1, 16, 17];
        let sub = crate::linalg::select(&c, &sites);
        assert!((fidelity_gaussian(&sub, &sub).unwrap() - 1.0).abs() < 1e-8);
        assert!((fidelity_gaussian(&c, &c).unwrap() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn gaussian_fidelity_matches_product_formula() {
        let st = solve_stencil(3, 1).unwrap();
        let l = lat(32, 0, 3, 0.0);
        let (a, b) = (0.05, 0.12);
        let ga = ground_covariance_analytic(&l.with_mass(a), &st).unwrap().full();
        let gb = ground_covariance_analytic(&l.with_mass(b), &st).unwrap().full();
        let f = fidelity_gaussian(&ga, &gb).unwrap();
        let want = fidelity_global(&l, &st, a, b).unwrap();
        assert!((f - want).abs() < 1e-6, "{f} {want}");
    }

    #[test]
    fn stable_and_literal_fidelity_agree_on_mixed_states() {
        let st = solve_stencil(3, 1).unwrap();
        let l = lat(32, 0, 3, 0.0);
        let sites: Vec<usize> = [0, 1, 2, 32, 33, 34].to_vec();
        let ga = crate::linalg::select(&ground_covariance_analytic(&l.with_mass(0.1), &st).unwrap().full(), &sites);
        let gb = crate::linalg::select(&ground_covariance_analytic(&l.with_mass(-0.1), &st).unwrap().full(), &sites);
        let f = fidelity_gaussian(&ga, &gb).unwrap();
        let g = fidelity_gaussian_literal(&ga, &gb).unwrap();
        assert!(f < 1.0 && (f - g).abs() < 1e-6, "{f} {g}");
    }
}
