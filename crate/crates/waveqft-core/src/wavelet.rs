//! Daubechies filter banks, cascade sampling, moments and cross-scale overlaps.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fwt;

pub const MAX_ORDER: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterBank {
    pub k: usize,
    pub h: Vec<f64>,
    pub g: Vec<f64>,
}

impl FilterBank {
    pub fn len(&self) -> usize {
        self.h.len()
    }

    pub fn is_empty(&self) -> bool {
        self.h.is_empty()
    }

    /// Support of the scale and wavelet functions, `[0, 2K-1]`.
    pub fn support(&self) -> f64 {
        (2 * self.k - 1) as f64
    }

    /// Largest `|Σ h_l h_{l+2m} - δ_{m0}|` over all shifts.
    pub fn orthonormality_residual(&self) -> f64 {
        let lam = self.h.len();
        (0..self.k)
            .map(|m| {
                let s: f64 = (0..lam.saturating_sub(2 * m)).map(|l| self.h[l] * self.h[l + 2 * m]).sum();
                (s - if m == 0 { 1.0 } else { 0.0 }).abs()
            })
            .fold(0.0, f64::max)
    }

    fn from_h(k: usize, h: Vec<f64>) -> Self {
        let lam = h.len();
        let g = (0..lam).map(|l| if l % 2 == 0 { h[lam - 1 - l] } else { -h[lam - 1 - l] }).collect();
        FilterBank { k, h, g }
    }
}

/// Extremal-phase Daubechies filter with `K` vanishing moments.
pub fn make_daubechies(k: usize) -> Result<FilterBank> {
    if !(1..=MAX_ORDER).contains(&k) {
        return Err(Error::UnsupportedOrder(k));
    }
    if k == 1 {
        let c = std::f64::consts::FRAC_1_SQRT_2;
        return Ok(FilterBank::from_h(1, vec![c, c]));
    }
    let h = spectral_factor(k);
    Ok(FilterBank::from_h(k, polish(k, h)))
}

fn binomial(n: u64, k: u64) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn spectral_factor(k: usize) -> Vec<f64> {
    // P(y) = Σ_{j<K} C(K-1+j, j) y^j, roots mapped through z² - (2-4y)z + 1 = 0
    let p: Vec<f64> = (0..k).map(|j| binomial((k - 1 + j) as u64, j as u64)).collect();
    let deg = k - 1;
    let lead = p[deg];
    let mut comp = DMatrix::<f64>::zeros(deg, deg);
    for i in 1..deg {
        comp[(i, i - 1)] = 1.0;
    }
    for i in 0..deg {
        comp[(i, deg - 1)] = -p[i] / lead;
    }
    let ys = comp.complex_eigenvalues();
    let peval = |y: Complex64| -> (Complex64, Complex64) {
        let mut v = Complex64::new(0.0, 0.0);
        let mut d = Complex64::new(0.0, 0.0);
        for &c in p.iter().rev() {
            d = d * y + v;
            v = v * y + c;
        }
        (v, d)
    };
    let mut poly = vec![Complex64::new(1.0, 0.0)];
    let mul = |poly: &[Complex64], root: Complex64| -> Vec<Complex64> {
        // (z - root) * poly, ascending powers
        let mut out = vec![Complex64::new(0.0, 0.0); poly.len() + 1];
        for (i, &c) in poly.iter().enumerate() {
            out[i + 1] += c;
            out[i] -= root * c;
        }
        out
    };
    for _ in 0..k {
        poly = mul(&poly, Complex64::new(-1.0, 0.0));
    }
    for &y0 in ys.iter() {
        let mut y = y0;
        for _ in 0..4 {
            let (v, d) = peval(y);
            if d.norm() == 0.0 {
                break;
            }
            y -= v / d;
        }
        let b = Complex64::new(2.0, 0.0) - 4.0 * y;
        let disc = (b * b / 4.0 - 1.0).sqrt();
        let z1 = b / 2.0 + disc;
        let z2 = b / 2.0 - disc;
        let z = if z1.norm() < z2.norm() { z1 } else { z2 };
        poly = mul(&poly, z);
    }
    let n = poly.len();
    let mut h: Vec<f64> = (0..n).map(|l| poly[n - 1 - l].re).collect();
    let s: f64 = h.iter().sum();
    let scale = std::f64::consts::SQRT_2 / s;
    h.iter_mut().for_each(|x| *x *= scale);
    h
}

/// Newton refinement on orthonormality plus vanishing moments.
fn polish(k: usize, mut h: Vec<f64>) -> Vec<f64> {
    let lam = 2 * k;
    let c = (lam - 1) as f64 / 2.0;
    let residual = |h: &[f64]| -> DVector<f64> {
        let mut f = DVector::zeros(lam);
        for m in 0..k {
            let s: f64 = (0..lam - 2 * m).map(|l| h[l] * h[l + 2 * m]).sum();
            f[m] = s - if m == 0 { 1.0 } else { 0.0 };
        }
        for p in 0..k {
            f[k + p] = (0..lam)
                .map(|l| {
                    let sign = if l % 2 == 0 { 1.0 } else { -1.0 };
                    sign * ((l as f64 - c) / c).powi(p as i32) * h[l]
                })
                .sum();
        }
        f
    };
    for _ in 0..8 {
        let f = residual(&h);
        if f.amax() < 1e-16 {
            break;
        }
        let mut jac = DMatrix::zeros(lam, lam);
        for m in 0..k {
            for j in 0..lam {
                let mut d = 0.0;
                if j + 2 * m < lam {
                    d += h[j + 2 * m];
                }
                if j >= 2 * m {
                    d += h[j - 2 * m];
                }
                jac[(m, j)] = d;
            }
        }
        for p in 0..k {
            for l in 0..lam {
                let sign = if l % 2 == 0 { 1.0 } else { -1.0 };
                jac[(k + p, l)] = sign * ((l as f64 - c) / c).powi(p as i32);
            }
        }
        match jac.lu().solve(&(-f)) {
            Some(step) => {
                for (x, d) in h.iter_mut().zip(step.iter()) {
                    *x += d;
                }
            }
            None => break,
        }
    }
    h
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FunctionKind {
    Scale,
    Wavelet,
}

impl std::str::FromStr for FunctionKind {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "scale" => Ok(FunctionKind::Scale),
            "wavelet" => Ok(FunctionKind::Wavelet),
            _ => Err(format!("unknown function kind '{s}' (scale|wavelet)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FunctionSamples {
    pub kind: FunctionKind,
    pub depth: u32,
    /// Expansion coefficients on the scale-`depth` basis; `values = 2^{depth/2} coeffs`.
    pub coeffs: Vec<f64>,
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
}

impl FunctionSamples {
    pub fn step(&self) -> f64 {
        (-(self.depth as f64)).exp2()
    }

    /// `Σ f(x_i) v_i dx` over the grid.
    pub fn riemann<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        let dx = self.step();
        self.grid.iter().zip(&self.values).map(|(&x, &v)| f(x) * v).sum::<f64>() * dx
    }
}

/// One application of the two-scale relation: coefficients at scale j to scale j+1.
pub fn refine_step(coeffs: &[f64], filter: &[f64]) -> Vec<f64> {
    if coeffs.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0.0; 2 * (coeffs.len() - 1) + filter.len()];
    for (i, &c) in coeffs.iter().enumerate() {
        for (l, &f) in filter.iter().enumerate() {
            out[2 * i + l] += f * c;
        }
    }
    out
}

pub fn cascade_evaluate(fb: &FilterBank, kind: FunctionKind, depth: u32) -> Result<FunctionSamples> {
    if !(1..=16).contains(&depth) {
        return Err(Error::InvalidDepth(depth));
    }
    let first = match kind {
        FunctionKind::Scale => &fb.h,
        FunctionKind::Wavelet => &fb.g,
    };
    let mut c = refine_step(&[1.0], first);
    for _ in 1..depth {
        c = refine_step(&c, &fb.h);
    }
    let npts = (2 * fb.k - 1) << depth;
    let norm = (depth as f64 / 2.0).exp2();
    let dx = (-(depth as f64)).exp2();
    let grid: Vec<f64> = (0..=npts).map(|i| i as f64 * dx).collect();
    let values: Vec<f64> = (0..=npts).map(|i| c.get(i).copied().unwrap_or(0.0) * norm).collect();
    Ok(FunctionSamples { kind, depth, coeffs: c, grid, values })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveletMoments {
    pub k: usize,
    /// `⟨x^a⟩_w`, a = 0..=a_max
    pub moments: Vec<f64>,
    /// `⟨x^a⟩_s`
    pub scale_moments: Vec<f64>,
}

pub fn wavelet_moments(fb: &FilterBank, a_max: usize) -> Result<WaveletMoments> {
    if a_max > 2 * fb.k + 4 {
        return Err(Error::Unsupported(format!("a_max={a_max} exceeds 2K+4={}", 2 * fb.k + 4)));
    }
    let binom = |n: usize, k: usize| binomial(n as u64, k as u64);
    let mut m = vec![1.0];
    for a in 1..=a_max {
        let mut s = 0.0;
        for (kk, &hk) in fb.h.iter().enumerate() {
            let mut inner = 0.0;
            for (b, &mb) in m.iter().enumerate() {
                inner += binom(a, b) * (kk as f64).powi((a - b) as i32) * mb;
            }
            s += hk * inner;
        }
        let pre = (-(a as f64) - 0.5).exp2();
        m.push(pre * s / (1.0 - (-(a as f64)).exp2()));
    }
    let w = (0..=a_max)
        .map(|a| {
            let s: f64 = fb
                .g
                .iter()
                .enumerate()
                .map(|(kk, &gk)| {
                    gk * (0..=a).map(|b| binom(a, b) * (kk as f64).powi((a - b) as i32) * m[b]).sum::<f64>()
                })
                .sum();
            (-(a as f64) - 0.5).exp2() * s
        })
        .collect();
    Ok(WaveletMoments { k: fb.k, moments: w, scale_moments: m })
}

/// `(⟨e^{tx}⟩_s, ⟨e^{tx}⟩_w)` from the infinite two-scale product.
pub fn exponential_moments(fb: &FilterBank, t: f64) -> (f64, f64) {
    let sym = |f: &[f64], u: f64| -> f64 {
        f.iter().enumerate().map(|(k, &c)| c * (u * k as f64).exp()).sum::<f64>() * std::f64::consts::FRAC_1_SQRT_2
    };
    let m = wavelet_moments(fb, 6).expect("a_max within range").scale_moments;
    let small = |u: f64| -> f64 {
        let mut term = 1.0;
        let mut acc = m[0];
        for (a, &ma) in m.iter().enumerate().skip(1) {
            term *= u / a as f64;
            acc += term * ma;
        }
        acc
    };
    let scale_at = |t: f64| -> f64 {
        let mut prod = 1.0;
        let mut u = t;
        while u.abs() > 1e-3 {
            u *= 0.5;
            prod *= sym(&fb.h, u);
        }
        prod * small(u)
    };
    let e_s = scale_at(t);
    let e_w = sym(&fb.g, t / 2.0) * scale_at(t / 2.0);
    (e_s, e_w)
}

/// `f[j, l] = ∫ s_j^(n) w_l^(r)` on a periodic lattice of `V` scale-n modes.
pub fn cross_scale_overlap(fb: &FilterBank, n: u32, r: u32, v: usize) -> Result<DMatrix<f64>> {
    if r >= n {
        return Err(Error::InvalidScale { n, r });
    }
    let steps = n - r;
    if v % (1usize << steps) != 0 {
        return Err(Error::Shape(format!("V={v} not divisible by 2^{steps}")));
    }
    let nr = v >> steps;
    let mut out = DMatrix::zeros(v, nr);
    for l in 0..nr {
        let mut e = vec![0.0; nr];
        e[l] = 1.0;
        let mut cur = fwt::synth_level_periodic(&vec![0.0; nr], &e, fb);
        for _ in 1..steps {
            let zeros = vec![0.0; cur.len()];
            cur = fwt::synth_level_periodic(&cur, &zeros, fb);
        }
        out.set_column(l, &DVector::from_vec(cur));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn haar_filter() {
        let fb = make_daubechies(1).unwrap();
        let c = std::f64::consts::FRAC_1_SQRT_2;
        assert_eq!(fb.h, vec![c, c]);
        assert_eq!(fb.g, vec![c, -c]);
    }

    #[test]
    fn db2_db3_match_published_tables() {
        let db2 = [0.48296291314453416, 0.8365163037378079, 0.2241438680420134, -0.12940952255126037];
        let fb = make_daubechies(2).unwrap();
        for (a, b) in fb.h.iter().zip(db2) {
            assert!((a - b).abs() < 1e-14, "{a} {b}");
        }
        let db3 = [
            0.3326705529500826,
            0.8068915093110925,
            0.4598775021184915,
            -0.13501102001025458,
            -0.08544127388202666,
            0.03522629188570953,
        ];
        let fb = make_daubechies(3).unwrap();
        for (a, b) in fb.h.iter().zip(db3) {
            assert!((a - b).abs() < 1e-14, "{a} {b}");
        }
    }

    #[test]
    fn all_orders_satisfy_invariants() {
        for k in 1..=MAX_ORDER {
            let fb = make_daubechies(k).unwrap();
            assert_eq!(fb.len(), 2 * k);
            assert!(fb.h.iter().all(|&x| x != 0.0));
            let s: f64 = fb.h.iter().sum();
            assert!((s - std::f64::consts::SQRT_2).abs() < 1e-12, "K={k} sum {s}");
            assert!(fb.orthonormality_residual() < 1e-12, "K={k}");
            let wm = wavelet_moments(&fb, k).unwrap();
            let c = (2 * k - 1) as f64 / 2.0;
            for a in 0..k {
                // the moment recursion carries terms of size (2K)^a
                let tol = 1e-14 * ((2 * k) as f64).powi(a as i32);
                assert!(wm.moments[a].abs() < tol, "K={k} a={a} {}", wm.moments[a]);
                let centered: f64 = fb.g.iter().enumerate().map(|(l, g)| ((l as f64 - c) / c.max(1.0)).powi(a as i32) * g).sum();
                assert!(centered.abs() < 1e-13, "K={k} a={a} centered {centered}");
            }
            assert!((wm.scale_moments[0] - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn order_out_of_range() {
        assert_eq!(make_daubechies(0), Err(Error::UnsupportedOrder(0)));
        assert_eq!(make_daubechies(11), Err(Error::UnsupportedOrder(11)));
    }

    #[test]
    fn haar_cascade_is_indicator() {
        let fb = make_daubechies(1).unwrap();
        for depth in [1, 4, 9] {
            let s = cascade_evaluate(&fb, FunctionKind::Scale, depth).unwrap();
            for (&x, &v) in s.grid.iter().zip(&s.values) {
                let want = if x < 1.0 { 1.0 } else { 0.0 };
                assert!((v - want).abs() < 1e-14, "x={x} v={v}");
            }
        }
    }

    #[test]
    fn cascade_normalization() {
        let fb = make_daubechies(3).unwrap();
        let s = cascade_evaluate(&fb, FunctionKind::Scale, 12).unwrap();
        assert!((s.riemann(|_| 1.0) - 1.0).abs() < 1e-6);
        let sq: f64 = s.values.iter().map(|v| v * v).sum::<f64>() * s.step();
        assert!((sq - 1.0).abs() < 1e-6);
        let fb2 = make_daubechies(2).unwrap();
        let w = cascade_evaluate(&fb2, FunctionKind::Wavelet, 12).unwrap();
        assert!(w.riemann(|_| 1.0).abs() < 1e-6);
        assert_eq!(*w.grid.last().unwrap(), 3.0);
    }

    #[test]
    fn cascade_two_scale_consistency() {
        let fb = make_daubechies(4).unwrap();
        let coarse = cascade_evaluate(&fb, FunctionKind::Scale, 7).unwrap();
        let fine = cascade_evaluate(&fb, FunctionKind::Scale, 8).unwrap();
        assert_eq!(refine_step(&coarse.coeffs, &fb.h), fine.coeffs);
    }

    #[test]
    fn cascade_depth_range() {
        let fb = make_daubechies(2).unwrap();
        assert!(cascade_evaluate(&fb, FunctionKind::Scale, 0).is_err());
        assert!(cascade_evaluate(&fb, FunctionKind::Scale, 17).is_err());
    }

    #[test]
    fn haar_moments() {
        let fb = make_daubechies(1).unwrap();
        let wm = wavelet_moments(&fb, 3).unwrap();
        assert!((wm.moments[1] + 0.25).abs() < 1e-15);
        assert!((wm.scale_moments[1] - 0.5).abs() < 1e-15);
        assert!((wm.scale_moments[2] - 1.0 / 3.0).abs() < 1e-15);
        // ∫ x² w = (1/3)(1/8) - (1/3)(1 - 1/8)
        assert!((wm.moments[2] + 0.25).abs() < 1e-15);
    }

    #[test]
    fn moments_agree_with_cascade() {
        for k in [2usize, 3, 4] {
            let fb = make_daubechies(k).unwrap();
            let wm = wavelet_moments(&fb, 2 * k + 4).unwrap();
            let depth = 14;
            let w = cascade_evaluate(&fb, FunctionKind::Wavelet, depth).unwrap();
            // node x_i = (i + ⟨x⟩_s) 2^{-J} is the centroid of the scale-J basis function
            let shift = wm.scale_moments[1] * w.step();
            for a in 0..=k + 1 {
                let q = w.riemann(|x| (x + shift).powi(a as i32));
                assert!((q - wm.moments[a]).abs() < 1e-8, "K={k} a={a} {q} {}", wm.moments[a]);
            }
        }
    }

    #[test]
    fn exponential_moments_match_quadrature() {
        for k in [1usize, 3] {
            let fb = make_daubechies(k).unwrap();
            let wm = wavelet_moments(&fb, 1).unwrap();
            let w = cascade_evaluate(&fb, FunctionKind::Wavelet, 14).unwrap();
            let s = cascade_evaluate(&fb, FunctionKind::Scale, 14).unwrap();
            let shift = wm.scale_moments[1] * w.step();
            for t in [-0.8, 0.3, 1.6] {
                let (es, ew) = exponential_moments(&fb, t);
                let qw = w.riemann(|x| (t * (x + shift)).exp());
                let qs = s.riemann(|x| (t * (x + shift)).exp());
                assert!((ew - qw).abs() < 1e-6, "K={k} t={t} {ew} {qw}");
                assert!((es - qs).abs() < 1e-6, "K={k} t={t} {es} {qs}");
            }
        }
    }

    #[test]
    fn haar_overlap_two_modes() {
        let fb = make_daubechies(1).unwrap();
        let f = cross_scale_overlap(&fb, 1, 0, 2).unwrap();
        let c = std::f64::consts::FRAC_1_SQRT_2;
        assert!((f[(0, 0)] - c).abs() < 1e-15);
        assert!((f[(1, 0)] + c).abs() < 1e-15);
    }

    #[test]
    fn overlap_columns_orthonormal() {
        let fb = make_daubechies(3).unwrap();
        let f = cross_scale_overlap(&fb, 5, 2, 64).unwrap();
        let gram = f.transpose() * &f;
        let err = (gram - DMatrix::<f64>::identity(8, 8)).amax();
        assert!(err < 1e-12, "{err}");
        assert!(cross_scale_overlap(&fb, 3, 3, 64).is_err());
    }
}
