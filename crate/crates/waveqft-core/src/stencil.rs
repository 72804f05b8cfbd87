//! Exact derivative overlap coefficients `Δ^(α)_ℓ = ∫ s(x-ℓ) d^α/dx^α s(x) dx`.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::lattice::Boundary;
use crate::wavelet::FilterBank;

#[derive(Debug, Clone, PartialEq)]
pub struct Autocorrelation {
    pub k: usize,
    /// `a[n-1] = a_{2n-1}`, n = 1..=K
    pub odd: Vec<BigRational>,
}

impl Autocorrelation {
    /// `a_ℓ` for any integer ℓ (a_0 = 1, even nonzero shifts vanish).
    pub fn get(&self, l: i64) -> BigRational {
        let m = l.unsigned_abs() as usize;
        if m == 0 {
            BigRational::one()
        } else if m % 2 == 0 || m > 2 * self.k - 1 {
            BigRational::zero()
        } else {
            self.odd[(m - 1) / 2].clone()
        }
    }
}

fn factorial(n: usize) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, i| acc * BigInt::from(i))
}

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// Closed-form autocorrelation of the Daubechies-K scale filter.
pub fn autocorrelation(k: usize) -> Result<Autocorrelation> {
    if !(1..=crate::wavelet::MAX_ORDER).contains(&k) {
        return Err(Error::UnsupportedOrder(k));
    }
    let c = BigRational::new(factorial(2 * k - 1), factorial(k - 1) * BigInt::from(4).pow((k - 1) as u32));
    let c2 = &c * &c;
    let odd = (1..=k)
        .map(|n| {
            let den = factorial(k - n) * factorial(k + n - 1) * BigInt::from(2 * n - 1);
            let sign = if n % 2 == 1 { BigInt::one() } else { -BigInt::one() };
            BigRational::new(sign, den) * &c2
        })
        .collect();
    Ok(Autocorrelation { k, odd })
}

/// Floating self-correlation `2 Σ_m h_m h_{m+ℓ}`.
pub fn filter_autocorrelation(fb: &FilterBank, l: i64) -> f64 {
    let m = l.unsigned_abs() as usize;
    let lam = fb.h.len();
    if m >= lam {
        return 0.0;
    }
    2.0 * (0..lam - m).map(|i| fb.h[i] * fb.h[i + m]).sum::<f64>()
}

#[derive(Debug, Clone, PartialEq)]
pub struct DerivativeStencil {
    pub k: usize,
    pub alpha: u32,
    pub delta: BTreeMap<i64, BigRational>,
}

impl DerivativeStencil {
    pub fn radius(&self) -> i64 {
        self.delta.keys().copied().max().unwrap_or(0)
    }

    pub fn get(&self, l: i64) -> BigRational {
        self.delta.get(&l).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn get_f64(&self, l: i64) -> f64 {
        self.delta.get(&l).map(to_f64).unwrap_or(0.0)
    }

    /// `(ℓ, Δ_ℓ)` for all stored offsets, as floats.
    pub fn to_f64(&self) -> Vec<(i64, f64)> {
        self.delta.iter().map(|(&l, v)| (l, to_f64(v))).collect()
    }

    /// Dense `V×V` operator `D[ℓ,ℓ'] = Δ_{ℓ'-ℓ}`, wrapped with `bc` (dropped for open chains).
    pub fn matrix(&self, v: usize, bc: Boundary) -> DMatrix<f64> {
        let vi = v as i64;
        let mut d = DMatrix::zeros(v, v);
        for (&j, c) in &self.delta {
            let c = to_f64(c);
            if c == 0.0 {
                continue;
            }
            for l in 0..vi {
                let t = l + j;
                let wraps = t.div_euclid(vi);
                let sign = match (wraps, bc.wrap_sign()) {
                    (0, _) => 1.0,
                    (_, None) => continue,
                    (w, Some(s)) => s.powi(w.unsigned_abs() as i32),
                };
                d[(l as usize, t.rem_euclid(vi) as usize)] += sign * c;
            }
        }
        d
    }

    /// `Σ_ℓ ℓ^p Δ_ℓ`, exact.
    pub fn moment(&self, p: u32) -> BigRational {
        self.delta.iter().fold(BigRational::zero(), |acc, (&l, v)| acc + rat(l).pow(p as i32) * v)
    }
}

pub fn to_f64(x: &BigRational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Solve the refinement system plus `Σ ℓ^α Δ_ℓ = (-1)^α α!` in exact arithmetic.
pub fn solve_stencil(k: usize, alpha: u32) -> Result<DerivativeStencil> {
    if !(1..=2).contains(&alpha) {
        return Err(Error::NoValidStencil { k, alpha, reason: "only alpha = 1, 2 are supported".into() });
    }
    let a = autocorrelation(k)?;
    let radius = (2 * k as i64 - 2).max(1);
    let odd = alpha % 2 == 1;
    // unknowns Δ_ℓ for ℓ ≥ 0 (ℓ ≥ 1 when odd); negative offsets follow from parity
    let first = if odd { 1 } else { 0 };
    let nunk = (radius - first + 1) as usize;
    let coef = |l: i64| -> Option<(usize, BigRational)> {
        let m = l.abs();
        if m > radius || (odd && m == 0) {
            return None;
        }
        let s = if odd && l < 0 { rat(-1) } else { rat(1) };
        Some(((m - first) as usize, s))
    };
    let two_alpha = rat(1 << alpha);
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    let mut rows: Vec<Vec<BigRational>> = Vec::new();
    let mut rhs: Vec<BigRational> = Vec::new();
    for l in 0..=radius {
        let mut row = vec![BigRational::zero(); nunk];
        if let Some((i, s)) = coef(l) {
            row[i] += s;
        }
        if let Some((i, s)) = coef(2 * l) {
            row[i] -= &two_alpha * s;
        }
        for n in 1..=k as i64 {
            let an = &two_alpha * &half * a.get(2 * n - 1);
            for ll in [2 * l - 2 * n + 1, 2 * l + 2 * n - 1] {
                if let Some((i, s)) = coef(ll) {
                    row[i] -= &an * s;
                }
            }
        }
        rows.push(row);
        rhs.push(BigRational::zero());
    }
    let mut norm = vec![BigRational::zero(); nunk];
    for l in -radius..=radius {
        if let Some((i, s)) = coef(l) {
            norm[i] += rat(l).pow(alpha as i32) * s;
        }
    }
    rows.push(norm);
    let fact = if alpha == 1 { rat(-1) } else { rat(2) };
    rhs.push(fact);

    let sol = exact_solve(rows, rhs).map_err(|reason| Error::NoValidStencil { k, alpha, reason })?;
    let mut delta = BTreeMap::new();
    for l in -radius..=radius {
        let v = match coef(l) {
            Some((i, s)) => &sol[i] * s,
            None => BigRational::zero(),
        };
        delta.insert(l, v);
    }
    Ok(DerivativeStencil { k, alpha, delta })
}

/// Gauss-Jordan elimination over the rationals for an overdetermined consistent system.
fn exact_solve(mut rows: Vec<Vec<BigRational>>, mut rhs: Vec<BigRational>) -> std::result::Result<Vec<BigRational>, String> {
    let nrow = rows.len();
    let ncol = rows[0].len();
    let mut pivot_row = 0;
    let mut pivots = Vec::new();
    for col in 0..ncol {
        let Some(p) = (pivot_row..nrow).find(|&r| !rows[r][col].is_zero()) else {
            continue;
        };
        rows.swap(pivot_row, p);
        rhs.swap(pivot_row, p);
        let inv = rows[pivot_row][col].recip();
        for c in col..ncol {
            let v = &rows[pivot_row][c] * &inv;
            rows[pivot_row][c] = v;
        }
        rhs[pivot_row] = &rhs[pivot_row] * &inv;
        for r in 0..nrow {
            if r == pivot_row || rows[r][col].is_zero() {
                continue;
            }
            let f = rows[r][col].clone();
            for c in col..ncol {
                let v = &rows[pivot_row][c] * &f;
                rows[r][c] -= v;
            }
            let v = &rhs[pivot_row] * &f;
            rhs[r] -= v;
        }
        pivots.push(col);
        pivot_row += 1;
        if pivot_row == nrow {
            break;
        }
    }
    if rhs[pivot_row..].iter().any(|x| !x.is_zero()) {
        return Err("refinement equations are inconsistent with the moment normalization".into());
    }
    if pivots.len() < ncol {
        return Err(format!("system is rank deficient ({} of {} unknowns determined)", pivots.len(), ncol));
    }
    Ok(rhs.into_iter().take(ncol).collect())
}

/// Exact `|x|` helper used by callers that want a float view of residues.
pub fn abs_f64(x: &BigRational) -> f64 {
    to_f64(&x.abs())
}
