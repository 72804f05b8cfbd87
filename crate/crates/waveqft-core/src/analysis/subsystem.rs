//! Subsystem selection, entropies, mutual information and wavelet compression.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::boson::{boson_entropy, symplectic_eigenvalues, BosonCovariance, PeriodicBosonState};
use crate::error::{Error, Result};
use crate::fermion::{block_entropy, fermion_entropy, FermionCovariance};
use crate::fwt::{transform_matrix, TransformPlan};
use crate::lattice::Boundary;
use crate::linalg::{linear_fit, select, LineFit};
use crate::wavelet::FilterBank;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SubsystemSpec {
    Modes(Vec<usize>),
    /// `[lo, hi)`
    Interval { lo: usize, hi: usize },
}

impl SubsystemSpec {
    pub fn interval(lo: usize, hi: usize) -> Self {
        SubsystemSpec::Interval { lo, hi }
    }

    /// Validated indices into a host with `len` modes.
    pub fn indices(&self, len: usize) -> Result<Vec<usize>> {
        let idx = match self {
            SubsystemSpec::Modes(m) => m.clone(),
            SubsystemSpec::Interval { lo, hi } => {
                if lo >= hi || *hi > len {
                    return Err(Error::Shape(format!("interval [{lo}, {hi}) invalid for {len} modes")));
                }
                (*lo..*hi).collect()
            }
        };
        let mut seen = vec![false; len];
        for &i in &idx {
            if i >= len {
                return Err(Error::IndexOutOfRange { index: i, len });
            }
            if seen[i] {
                return Err(Error::Overlap(i));
            }
            seen[i] = true;
        }
        Ok(idx)
    }
}

/// Anything that can report the entropy (bits) of a set of its modes.
pub trait GaussianState {
    fn modes(&self) -> usize;
    fn entropy_of(&self, idx: &[usize]) -> Result<f64>;
}

impl GaussianState for BosonCovariance {
    fn modes(&self) -> usize {
        self.gamma_phi.nrows()
    }

    fn entropy_of(&self, idx: &[usize]) -> Result<f64> {
        if idx.is_empty() {
            return Ok(0.0);
        }
        let (phi, pi) = self.select(idx)?;
        Ok(boson_entropy(&symplectic_eigenvalues(&phi, &pi)?))
    }
}

impl GaussianState for PeriodicBosonState {
    fn modes(&self) -> usize {
        PeriodicBosonState::modes(self)
    }

    fn entropy_of(&self, idx: &[usize]) -> Result<f64> {
        if idx.is_empty() {
            return Ok(0.0);
        }
        let (phi, pi) = self.select(idx)?;
        Ok(boson_entropy(&symplectic_eigenvalues(&phi, &pi)?))
    }
}

/// Sites carry both Majorana flavors.
impl GaussianState for FermionCovariance {
    fn modes(&self) -> usize {
        self.v()
    }

    fn entropy_of(&self, idx: &[usize]) -> Result<f64> {
        if idx.is_empty() {
            return Ok(0.0);
        }
        block_entropy(&self.block(idx)?)
    }
}

/// A real antisymmetric Majorana covariance; modes are single Majoranas.
#[derive(Debug, Clone)]
pub struct MajoranaCovariance(pub DMatrix<f64>);

impl GaussianState for MajoranaCovariance {
    fn modes(&self) -> usize {
        self.0.nrows()
    }

    fn entropy_of(&self, idx: &[usize]) -> Result<f64> {
        if idx.is_empty() {
            return Ok(0.0);
        }
        fermion_entropy(&select(&self.0, idx))
    }
}

pub fn subsystem_entropy<S: GaussianState>(state: &S, spec: &SubsystemSpec) -> Result<f64> {
    state.entropy_of(&spec.indices(state.modes())?)
}

/// Principal submatrix of a single covariance block.
pub fn subsystem_reduce(cov: &DMatrix<f64>, spec: &SubsystemSpec) -> Result<DMatrix<f64>> {
    Ok(select(cov, &spec.indices(cov.nrows())?))
}

/// `I(A:B) = S_A + S_B − S_AB` in bits, clipped at zero.
pub fn mutual_information<S: GaussianState>(state: &S, a: &SubsystemSpec, b: &SubsystemSpec) -> Result<f64> {
    let n = state.modes();
    let ia = a.indices(n)?;
    let ib = b.indices(n)?;
    if let Some(&x) = ia.iter().find(|i| ib.contains(i)) {
        return Err(Error::Overlap(x));
    }
    let ab: Vec<usize> = ia.iter().chain(&ib).copied().collect();
    let mi = state.entropy_of(&ia)? + state.entropy_of(&ib)? - state.entropy_of(&ab)?;
    if mi < -1e-6 {
        return Err(Error::InvalidState(format!("negative mutual information {mi:e}")));
    }
    Ok(mi.max(0.0))
}

/// Rows of the per-region transform kept after `levels` compressions: the coarsest scale
/// modes, plus the coarsest wavelet modes when `with_wavelets` is set.
pub fn compression_rows(fb: &FilterBank, len: usize, levels: u32, with_wavelets: bool) -> Result<DMatrix<f64>> {
    if levels == 0 {
        return Ok(DMatrix::identity(len, len));
    }
    let plan = TransformPlan::new(len, levels, levels, fb.clone(), Boundary::Periodic)?;
    let w = transform_matrix(&plan);
    let keep = (len >> levels) * if with_wavelets { 2 } else { 1 };
    Ok(w.rows(0, keep).into_owned())
}

/// Compressed covariance block `W G_R Wᵀ` where `G_R` is `g` restricted to the
/// concatenated regions and `W` is block diagonal with one compression per region.
/// Returns the block and the number of kept modes per region.
pub fn compress(
    g: &DMatrix<f64>,
    regions: &[Vec<usize>],
    levels: u32,
    fb: &FilterBank,
    with_wavelets: bool,
) -> Result<(DMatrix<f64>, Vec<usize>)> {
    let n = g.nrows();
    let mut all = Vec::new();
    let mut blocks = Vec::new();
    for r in regions {
        if r.len() % (1usize << levels) != 0 {
            return Err(Error::Shape(format!("region of {} modes not divisible by 2^{levels}", r.len())));
        }
        all.extend(SubsystemSpec::Modes(r.clone()).indices(n)?);
        blocks.push(compression_rows(fb, r.len(), levels, with_wavelets)?);
    }
    SubsystemSpec::Modes(all.clone()).indices(n)?;
    let rows: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut w = DMatrix::zeros(rows, all.len());
    let (mut r0, mut c0) = (0, 0);
    let mut sizes = Vec::new();
    for b in &blocks {
        w.view_mut((r0, c0), b.shape()).copy_from(b);
        r0 += b.nrows();
        c0 += b.ncols();
        sizes.push(b.nrows());
    }
    let sub = select(g, &all);
    Ok((&w * sub * w.transpose(), sizes))
}

/// Bosonic `compress` applied to both `Γ_Φ` and `Γ_Π`.
pub fn compress_boson(
    phi: &DMatrix<f64>,
    pi: &DMatrix<f64>,
    regions: &[Vec<usize>],
    levels: u32,
    fb: &FilterBank,
    with_wavelets: bool,
) -> Result<(BosonCovariance, Vec<usize>)> {
    let (gamma_phi, sizes) = compress(phi, regions, levels, fb, with_wavelets)?;
    let (gamma_pi, _) = compress(pi, regions, levels, fb, with_wavelets)?;
    Ok((BosonCovariance { gamma_phi, gamma_pi }, sizes))
}

/// `E_W = (c/6) ln(1 + 2ℓ/d)` in nats.
pub fn wedge_cross_section(d: f64, l: f64, c: f64) -> Result<f64> {
    if d <= 0.0 || l < 0.0 {
        return Err(Error::Shape(format!("wedge geometry needs d > 0, l ≥ 0 (got d={d}, l={l})")));
    }
    Ok(c / 6.0 * (1.0 + 2.0 * l / d).ln())
}

/// Fit `S ln 2 = slope · ln sin(πx) + const`; the slope is `c/3` (ring) or `c/6` (open chain).
pub fn calabrese_cardy_fit(fractions: &[f64], entropy_bits: &[f64]) -> LineFit {
    let x: Vec<f64> = fractions.iter().map(|f| (std::f64::consts::PI * f).sin().ln()).collect();
    let y: Vec<f64> = entropy_bits.iter().map(|s| s * std::f64::consts::LN_2).collect();
    linear_fit(&x, &y)
}

/// Slope of `ln|c|` against `ln ℓ`.
pub fn log_log_fit(l: &[f64], c: &[f64]) -> LineFit {
    let x: Vec<f64> = l.iter().map(|v| v.ln()).collect();
    let y: Vec<f64> = c.iter().map(|v| v.abs().ln()).collect();
    linear_fit(&x, &y)
}
