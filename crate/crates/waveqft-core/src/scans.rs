//! Parameter scans behind the command-line experiments. Every scan evaluates its points
//! in parallel and returns them in input order with the wall time spent on each.

use std::time::Instant;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{
    boson_bulk_approx, compress_boson, eop_four_mode, eop_two_mode, fermion_bulk_approx, mutual_information,
    renormalized_mass, same_scale_row, BosonObservable, EoPResult, GaussianState, MajoranaCovariance, Phase,
    SubsystemSpec,
};
use crate::boson::{build_k, build_k_2d, ground_covariance, periodic_ground_state, BosonCovariance, DEFAULT_MEM_CAP};
use crate::error::{Error, Result};
use crate::fermion::{block_form, fidelity_gaussian, fidelity_global, ground_covariance_analytic, ground_covariance_diag, FermionCovariance};
use crate::fwt::{transform_matrix, TransformPlan};
use crate::lattice::{Boundary, LatticeSpec, MassUnits};
use crate::linalg::{linear_fit, LineFit};
use crate::stencil::solve_stencil;
use crate::wavelet::make_daubechies;

#[derive(Debug, Clone, Serialize)]
pub struct Timed<T> {
    pub value: T,
    pub wall_s: f64,
}

fn par_points<I: Sync, T: Send>(inputs: &[I], f: impl Fn(&I) -> Result<T> + Sync) -> Result<Vec<Timed<T>>> {
    inputs
        .par_iter()
        .map(|i| {
            let t = Instant::now();
            let value = f(i)?;
            Ok(Timed { value, wall_s: t.elapsed().as_secs_f64() })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Theory {
    Fermion,
    Boson,
}

impl std::str::FromStr for Theory {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "fermion" => Ok(Theory::Fermion),
            "boson" => Ok(Theory::Boson),
            _ => Err(format!("unknown theory '{s}' (fermion|boson)")),
        }
    }
}

/// Ground state of the fermion ring (analytic) or open chain (polar route).
pub fn fermion_ground_state(lat: &LatticeSpec) -> Result<FermionCovariance> {
    let st = solve_stencil(lat.k, 1)?;
    match lat.bc {
        Boundary::Open => ground_covariance_diag(lat, &st),
        _ => ground_covariance_analytic(lat, &st),
    }
}

/// Dense bosonic ground state; periodic lattices go through the circulant symbol.
pub fn boson_ground_state(lat: &LatticeSpec, mem_cap: u64) -> Result<BosonCovariance> {
    let st = solve_stencil(lat.k, 2)?;
    let modes = (lat.v() as u64).pow(lat.dims as u32);
    let needed = 2 * modes * modes * 8;
    if needed > mem_cap {
        return Err(Error::MemoryCap { needed, cap: mem_cap });
    }
    match (lat.bc, lat.dims) {
        (Boundary::Periodic, _) => Ok(periodic_ground_state(lat, &st)?.dense()),
        (_, 1) => ground_covariance(&build_k(lat, &st)?),
        _ => ground_covariance(&build_k_2d(lat, &st, mem_cap)?),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EntropyPoint {
    pub size: usize,
    pub fraction: f64,
    pub entropy_bits: f64,
}

/// Entropy of the leading `size` sites for each entry of `sizes`. Fermion entropies are
/// those of the single Majorana chain.
pub fn entropy_scan(theory: Theory, lat: &LatticeSpec, sizes: &[usize], mem_cap: u64) -> Result<Vec<Timed<EntropyPoint>>> {
    let v = lat.v();
    if let Some(&bad) = sizes.iter().find(|&&s| s == 0 || s > v) {
        return Err(Error::Shape(format!("subsystem size {bad} outside 1..={v}")));
    }
    let point = |state: &dyn Fn(usize) -> Result<f64>, s: usize| -> Result<EntropyPoint> {
        Ok(EntropyPoint { size: s, fraction: s as f64 / v as f64, entropy_bits: state(s)? })
    };
    match theory {
        Theory::Fermion => {
            let chain = MajoranaCovariance(fermion_ground_state(lat)?.chain(0));
            par_points(sizes, |&s| point(&|s| chain.entropy_of(&(0..s).collect::<Vec<_>>()), s))
        }
        Theory::Boson if lat.bc == Boundary::Periodic => {
            let st = solve_stencil(lat.k, 2)?;
            let state = periodic_ground_state(lat, &st)?;
            par_points(sizes, |&s| point(&|s| state.entropy_of(&(0..s).collect::<Vec<_>>()), s))
        }
        Theory::Boson => {
            let state = boson_ground_state(lat, mem_cap)?;
            par_points(sizes, |&s| point(&|s| state.entropy_of(&(0..s).collect::<Vec<_>>()), s))
        }
    }
}

/// Half-chain entropy (bits) of the periodic boson for each cutoff depth.
pub fn cutoff_scan(base: &LatticeSpec, depths: &[u32]) -> Result<Vec<Timed<(u32, f64)>>> {
    par_points(depths, |&n| {
        let lat = LatticeSpec { n, ..base.clone() };
        let st = solve_stencil(lat.k, 2)?;
        let state = periodic_ground_state(&lat, &st)?;
        Ok((n, state.entropy_of(&(0..lat.v() / 2).collect::<Vec<_>>())?))
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct Entropy2dPoint {
    pub n: u32,
    pub m0: f64,
    pub v: usize,
    pub entropy_bits: f64,
}

/// Entropy of the half torus `j < V/2` of the periodic 2D boson.
pub fn entropy_2d(lat: &LatticeSpec, mem_cap: u64) -> Result<Entropy2dPoint> {
    let lat = LatticeSpec { dims: 2, ..lat.clone() };
    let v = lat.v();
    let idx: Vec<usize> = (0..v * v).filter(|a| a % v < v / 2).collect();
    let needed = 3 * (idx.len() as u64).pow(2) * 8;
    if needed > mem_cap {
        return Err(Error::MemoryCap { needed, cap: mem_cap });
    }
    let st = solve_stencil(lat.k, 2)?;
    let state = periodic_ground_state(&lat, &st)?;
    Ok(Entropy2dPoint { n: lat.n, m0: lat.m0, v, entropy_bits: state.entropy_of(&idx)? })
}

pub fn entropy_2d_scan(points: &[(u32, f64)], base: &LatticeSpec, mem_cap: u64) -> Result<Vec<Timed<Entropy2dPoint>>> {
    par_points(points, |&(n, m0)| entropy_2d(&LatticeSpec { n, m0, ..base.clone() }, mem_cap))
}

#[derive(Debug, Clone, Serialize)]
pub struct FidelityPoint {
    pub level: u32,
    pub m0: f64,
    pub fidelity: f64,
}

/// Full covariance of the modes kept by `w` in each flavor block, `[[0, W Γ⁰¹ Wᵀ], [·, 0]]`.
fn compressed_fermion(g: &FermionCovariance, w: &DMatrix<f64>) -> DMatrix<f64> {
    block_form(&(w * &g.gamma01 * w.transpose()))
}

/// Fidelity between ground states at `m0 ± δ/2`. Level 0 is the full pure-state product
/// formula; level `L ≥ 1` compares the two coarsest scale modes after `L` levels.
pub fn fidelity_scan(base: &LatticeSpec, masses: &[f64], delta: f64, levels: &[u32]) -> Result<Vec<Timed<FidelityPoint>>> {
    let v = base.v();
    let fb = make_daubechies(base.k)?;
    let st = solve_stencil(base.k, 1)?;
    for &level in levels {
        if level > 0 && (v >> level) < 2 {
            return Err(Error::InvalidDepth(level));
        }
    }
    let plans: Vec<Option<DMatrix<f64>>> = levels
        .iter()
        .map(|&l| {
            if l == 0 {
                return Ok(None);
            }
            let plan = TransformPlan::new(v, l, l, fb.clone(), Boundary::Periodic)?;
            Ok(Some(transform_matrix(&plan).rows(0, 2).into_owned()))
        })
        .collect::<Result<_>>()?;
    let compressed = levels.iter().any(|&l| l > 0);
    let states: Vec<(FermionCovariance, FermionCovariance)> = if compressed {
        masses
            .par_iter()
            .map(|&m| {
                Ok((
                    fermion_ground_state(&base.with_mass(m + delta / 2.0))?,
                    fermion_ground_state(&base.with_mass(m - delta / 2.0))?,
                ))
            })
            .collect::<Result<_>>()?
    } else {
        Vec::new()
    };
    let points: Vec<(usize, usize)> = (0..levels.len()).flat_map(|l| (0..masses.len()).map(move |m| (l, m))).collect();
    par_points(&points, |&(li, mi)| {
        let m0 = masses[mi];
        let fidelity = match &plans[li] {
            None => fidelity_global(base, &st, m0 - delta / 2.0, m0 + delta / 2.0)?,
            Some(w) => {
                let (hi, lo) = &states[mi];
                fidelity_gaussian(&compressed_fermion(hi, w), &compressed_fermion(lo, w))?
            }
        };
        Ok(FidelityPoint { level: levels[li], m0, fidelity })
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct CorrelatorPoint {
    pub r: u32,
    pub l: usize,
    pub numeric: f64,
    pub analytic: f64,
}

/// Same-scale wavelet correlators `⟨w_{r,0} w_{r,ℓ}⟩` for each `r`, with the bulk
/// approximation alongside. Fermions use `Γ⁰¹`. Boson fields are reported in scale-n
/// lattice units, `⟨ΦΦ⟩ = 2ⁿ Γ_Φ / 2` and `⟨ΠΠ⟩ = 2⁻ⁿ Γ_Π / 2`. Fermions have no massive
/// closed form, so `analytic` is NaN there.
pub fn correlator_scan(
    theory: Theory,
    observable: BosonObservable,
    phase: Phase,
    lat: &LatticeSpec,
    scales: &[u32],
) -> Result<Vec<Timed<Vec<CorrelatorPoint>>>> {
    let fb = make_daubechies(lat.k)?;
    let block = match theory {
        Theory::Fermion => fermion_ground_state(lat)?.gamma01,
        Theory::Boson => {
            let s = boson_ground_state(lat, DEFAULT_MEM_CAP)?;
            match observable {
                BosonObservable::Ff => s.gamma_phi * (0.5 * (1u64 << lat.n) as f64),
                BosonObservable::Pp => s.gamma_pi * (0.5 / (1u64 << lat.n) as f64),
            }
        }
    };
    let m_scale_n = scale_mass(lat, lat.n)?;
    par_points(scales, |&r| {
        let row = same_scale_row(&block, &fb, lat.n, r)?;
        row.iter()
            .enumerate()
            .map(|(l, &numeric)| {
                let analytic = if l == 0 {
                    f64::NAN
                } else {
                    match (theory, phase) {
                        (Theory::Fermion, Phase::Massless) => fermion_bulk_approx(&fb, l as f64),
                        (Theory::Fermion, Phase::Massive) => f64::NAN,
                        (Theory::Boson, _) => boson_bulk_approx(observable, phase, &fb, lat.n, r, l as f64, m_scale_n)?,
                    }
                };
                Ok(CorrelatorPoint { r, l, numeric, analytic })
            })
            .collect()
    })
}

/// Log-log slope of `|c_ℓ|` over `ℓ ∈ [2(2K−1), N/8]`.
pub fn power_law_slope(row: &[f64], k: usize) -> Result<LineFit> {
    let lo = 2 * (2 * k - 1);
    let hi = row.len() / 8;
    if hi < lo + 2 {
        return Err(Error::Shape(format!("fit window [{lo}, {hi}] too short for {} translates", row.len())));
    }
    let l: Vec<f64> = (lo..=hi).map(|l| l as f64).collect();
    let c: Vec<f64> = (lo..=hi).map(|l| row[l]).collect();
    Ok(crate::analysis::log_log_fit(&l, &c))
}

/// Decay constant `c` in `|c_ℓ| ∝ ℓ^{−p} e^{−c ℓ m̃}`, fitted over `ℓ ∈ [2K−1, 20/m̃]`
/// (capped at `N/2`), skipping values below `1e−13` of the row maximum.
pub fn exponential_rate(row: &[f64], k: usize, m_tilde: f64, power: f64) -> Result<LineFit> {
    let lo = 2 * k - 1;
    let hi = ((20.0 / m_tilde).floor() as usize).min(row.len() / 2);
    let floor = 1e-13 * row.iter().fold(0.0f64, |a, b| a.max(b.abs()));
    let pts: Vec<(f64, f64)> =
        (lo..=hi).filter(|&l| row[l].abs() > floor).map(|l| (l as f64 * m_tilde, row[l].abs().ln() + power * (l as f64).ln())).collect();
    if pts.len() < 2 {
        return Err(Error::Shape(format!("decay window [{lo}, {hi}] too short at m̃ = {m_tilde}")));
    }
    let (x, y): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
    let mut fit = linear_fit(&x, &y);
    fit.slope = -fit.slope;
    Ok(fit)
}

/// `m̃ = 2^{n−r} m0` with `m0` in scale-n units.
pub fn scale_mass(lat: &LatticeSpec, r: u32) -> Result<f64> {
    let m_scale_n = match lat.mass_units {
        MassUnits::ScaleN => lat.m0,
        MassUnits::Physical => lat.m0 / (1u64 << lat.n) as f64,
    };
    renormalized_mass(lat.n, r, m_scale_n)
}

/// Two regions `[0, ℓ)` and `[ℓ+d, 2ℓ+d)`.
pub fn two_regions(l: usize, d: usize, v: usize) -> Result<Vec<Vec<usize>>> {
    if 2 * l + d > v || l == 0 {
        return Err(Error::Shape(format!("regions of {l} with gap {d} do not fit in {v}")));
    }
    Ok(vec![(0..l).collect(), (l + d..2 * l + d).collect()])
}

#[derive(Debug, Clone, Serialize)]
pub struct MiPoint {
    pub level: u32,
    pub modes_per_region: usize,
    pub mi_bits: f64,
    pub rel_error: f64,
}

fn region_mi(s: &BosonCovariance, m: usize) -> Result<f64> {
    mutual_information(s, &SubsystemSpec::interval(0, m), &SubsystemSpec::interval(m, 2 * m))
}

/// Mutual information of two regions after each number of compression levels; level 0
/// is the uncompressed oracle.
pub fn mi_compress_scan(lat: &LatticeSpec, l: usize, d: usize, levels: &[u32]) -> Result<Vec<Timed<MiPoint>>> {
    let fb = make_daubechies(lat.k)?;
    let state = periodic_ground_state(lat, &solve_stencil(lat.k, 2)?)?;
    let regions = two_regions(l, d, lat.v())?;
    let all: Vec<usize> = regions.concat();
    let (phi, pi) = state.select(&all)?;
    let local: Vec<Vec<usize>> = vec![(0..l).collect(), (l..2 * l).collect()];
    let oracle = region_mi(&BosonCovariance { gamma_phi: phi.clone(), gamma_pi: pi.clone() }, l)?;
    par_points(levels, |&level| {
        let (c, sizes) = compress_boson(&phi, &pi, &local, level, &fb, false)?;
        let mi = region_mi(&c, sizes[0])?;
        Ok(MiPoint { level, modes_per_region: sizes[0], mi_bits: mi, rel_error: (mi - oracle).abs() / oracle })
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct EoPPoint {
    pub l: usize,
    pub d_over_l: f64,
    pub result: EoPResult,
    pub mutual_info: f64,
    pub s_a: f64,
    pub s_b: f64,
    pub bounds_ok: bool,
}

/// Entanglement of purification between `[0, ℓ)` and `[ℓ+d, 2ℓ+d)` compressed to their
/// coarsest scale mode (`modes = 2`) or coarsest scale and wavelet modes (`modes = 4`).
pub fn eop_scan(lat: &LatticeSpec, d: usize, ls: &[usize], modes: usize) -> Result<Vec<Timed<EoPPoint>>> {
    if modes != 2 && modes != 4 {
        return Err(Error::Unsupported(format!("EoP with {modes} modes (2|4)")));
    }
    let fb = make_daubechies(lat.k)?;
    let state = periodic_ground_state(lat, &solve_stencil(lat.k, 2)?)?;
    par_points(ls, |&l| {
        if !l.is_power_of_two() || l < 2 {
            return Err(Error::Shape(format!("region length {l} must be a power of two ≥ 2")));
        }
        let regions = two_regions(l, d, lat.v())?;
        let (phi, pi) = state.select(&regions.concat())?;
        let local: Vec<Vec<usize>> = vec![(0..l).collect(), (l..2 * l).collect()];
        let levels = l.trailing_zeros();
        let (c, _) = compress_boson(&phi, &pi, &local, levels, &fb, modes == 4)?;
        let half = modes / 2;
        let s_a = c.entropy_of(&(0..half).collect::<Vec<_>>())?;
        let s_b = c.entropy_of(&(half..modes).collect::<Vec<_>>())?;
        let mutual_info = mutual_information(&c, &SubsystemSpec::interval(0, half), &SubsystemSpec::interval(half, modes))?;
        let result = if modes == 2 { eop_two_mode(&c)? } else { eop_four_mode(&c)? };
        let bounds_ok = result.check_bounds(mutual_info, s_a, s_b).is_ok();
        Ok(EoPPoint { l, d_over_l: d as f64 / l as f64, result, mutual_info, s_a, s_b, bounds_ok })
    })
}
