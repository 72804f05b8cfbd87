use std::path::PathBuf;

use nalgebra::DMatrix;
use serde_json::{json, Value};
use waveqft_core::analysis::{BosonObservable, Phase};
use waveqft_core::fwt::{dwt, ModeKind};
use waveqft_core::scans::{
    boson_ground_state, correlator_scan, entropy_2d_scan, entropy_scan, eop_scan, fermion_ground_state, fidelity_scan,
    mi_compress_scan, Theory, Timed,
};
use waveqft_core::stencil::to_f64;
use waveqft_core::wavelet::cascade_evaluate;
use waveqft_core::{make_daubechies, solve_stencil, Boundary, FunctionKind, LatticeSpec, MassUnits, TransformPlan};

use crate::args::*;
use crate::config::{float_list, pow2_list, u32_list, uint_list, CliError, Resolver, Result};
use crate::output::{Cell, Table};

pub enum Artifact {
    Table(Table),
    Matrices { blocks: Vec<(&'static str, DMatrix<f64>)>, lattice: Value },
}

pub struct Outcome {
    pub artifact: Artifact,
    pub timings: Vec<f64>,
}

pub struct Ctx {
    pub r: Resolver,
    pub mem_cap: u64,
    pub dry_run: bool,
    /// Set by `filters --json`.
    pub force_json: bool,
}

type Run = Result<Option<Outcome>>;

fn timed<T>(f: impl FnOnce() -> Result<T>) -> Result<(T, f64)> {
    let t = std::time::Instant::now();
    let v = f()?;
    Ok((v, t.elapsed().as_secs_f64()))
}

fn table(t: Table, timings: Vec<f64>) -> Run {
    Ok(Some(Outcome { artifact: Artifact::Table(t), timings }))
}

fn walls<T>(pts: &[Timed<T>]) -> Vec<f64> {
    pts.iter().map(|p| p.wall_s).collect()
}

struct LatticeDefaults {
    x: usize,
    k: usize,
    m0: f64,
    bc: &'static str,
}

fn lattice(ctx: &mut Ctx, a: &LatticeArgs, n: u32, d: LatticeDefaults) -> Result<LatticeSpec> {
    let x = ctx.r.get("x", a.x, d.x)?;
    let k = ctx.r.get("k", a.k, d.k)?;
    let m0 = ctx.r.get("m0", a.m0, d.m0)?;
    let bc: Boundary = ctx.r.parse("bc", a.bc.clone(), d.bc)?;
    let units: MassUnits = ctx.r.parse("units", a.units.clone(), "physical")?;
    let lat = LatticeSpec::new(x, n, k, m0, bc).with_units(units);
    lat.validate()?;
    Ok(lat)
}

fn lattice_json(lat: &LatticeSpec) -> Value {
    let mut v = serde_json::to_value(lat).expect("lattice serializes");
    v["v"] = json!(lat.v());
    v
}

pub fn filters(ctx: &mut Ctx, a: &FiltersArgs) -> Run {
    let k = ctx.r.get("k", a.k, 3)?;
    ctx.force_json = ctx.r.flag("json", a.json)?;
    if ctx.dry_run {
        return Ok(None);
    }
    let (fb, wall) = timed(|| Ok(make_daubechies(k)?))?;
    let mut t = Table::new(&["i", "h", "g"]);
    for (i, (h, g)) in fb.h.iter().zip(&fb.g).enumerate() {
        t.push(vec![i.into(), (*h).into(), (*g).into()]);
    }
    table(t, vec![wall])
}

pub fn cascade(ctx: &mut Ctx, a: &CascadeArgs) -> Run {
    let k = ctx.r.get("k", a.k, 3)?;
    let kind: FunctionKind = ctx.r.parse("kind", a.kind.clone(), "scale")?;
    let depth = ctx.r.get("depth", a.depth, 12)?;
    if ctx.dry_run {
        return Ok(None);
    }
    let (s, wall) = timed(|| Ok(cascade_evaluate(&make_daubechies(k)?, kind, depth)?))?;
    let mut t = Table::new(&["grid", "value"]);
    for (x, y) in s.grid.iter().zip(&s.values) {
        t.push(vec![(*x).into(), (*y).into()]);
    }
    table(t, vec![wall])
}

pub fn stencil(ctx: &mut Ctx, a: &StencilArgs) -> Run {
    let k = ctx.r.get("k", a.k, 3)?;
    let alpha = ctx.r.get("alpha", a.alpha, 1)?;
    let float = ctx.r.flag("float", a.float)?;
    let rational = ctx.r.flag("rational", a.rational)?;
    if float && rational {
        return Err(CliError::config("float", "--float and --rational are exclusive"));
    }
    if ctx.dry_run {
        return Ok(None);
    }
    let (st, wall) = timed(|| Ok(solve_stencil(k, alpha)?))?;
    let mut t = Table::new(&["l", "delta"]);
    for (l, d) in &st.delta {
        let value = if float { Cell::Float(to_f64(d)) } else { Cell::Text(d.to_string()) };
        t.push(vec![(*l).into(), value]);
    }
    table(t, vec![wall])
}

fn read_signal(path: &PathBuf) -> Result<Vec<f64>> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let field = line.split(',').next().unwrap_or("").trim();
        if field.is_empty() {
            continue;
        }
        match field.parse::<f64>() {
            Ok(v) => out.push(v),
            Err(_) if i == 0 => {}
            Err(e) => return Err(CliError::config("in", format!("{}:{}: '{field}': {e}", path.display(), i + 1))),
        }
    }
    if out.is_empty() {
        return Err(CliError::config("in", format!("{} holds no values", path.display())));
    }
    Ok(out)
}

pub fn dwt_cmd(ctx: &mut Ctx, a: &DwtArgs) -> Run {
    let input: Option<PathBuf> = ctx.r.get_opt("in", a.input.as_ref().map(|p| p.display().to_string()))?.map(PathBuf::from);
    let k = ctx.r.get("k", a.k, 3)?;
    let levels = ctx.r.get("levels", a.levels, 1)?;
    let n = ctx.r.get("n", a.n, levels)?;
    let boundary: Boundary = ctx.r.parse("boundary", a.boundary.clone(), "periodic")?;
    let input = input.ok_or_else(|| CliError::config("in", "an input CSV is required"))?;
    if ctx.dry_run {
        return Ok(None);
    }
    let x = read_signal(&input)?;
    let (y, wall) = timed(|| {
        let plan = TransformPlan::new(x.len(), levels, n, make_daubechies(k)?, boundary)?;
        Ok(dwt(&x, &plan)?)
    })?;
    let mut t = Table::new(&["kind", "r", "l", "value"]);
    for (m, v) in y.labels.iter().zip(&y.values) {
        let kind = match m.kind {
            ModeKind::Scale => "scale",
            ModeKind::Wavelet => "wavelet",
        };
        t.push(vec![kind.into(), m.r.into(), m.l.into(), (*v).into()]);
    }
    table(t, vec![wall])
}

pub fn fermion_covariance(ctx: &mut Ctx, a: &CovarianceArgs) -> Run {
    let n = ctx.r.get("n", a.n, 6)?;
    let lat = lattice(ctx, &a.lattice, n, LatticeDefaults { x: 16, k: 3, m0: 0.2, bc: "antiperiodic" })?;
    if ctx.r.get_opt("dims", a.dims)?.is_some_and(|d| d != 1) {
        return Err(CliError::config("dims", "fermion lattices are one-dimensional"));
    }
    if ctx.dry_run {
        return Ok(None);
    }
    let (g, wall) = timed(|| Ok(fermion_ground_state(&lat)?))?;
    Ok(Some(Outcome {
        artifact: Artifact::Matrices { blocks: vec![("gamma01", g.gamma01)], lattice: lattice_json(&lat) },
        timings: vec![wall],
    }))
}

pub fn boson_covariance(ctx: &mut Ctx, a: &CovarianceArgs) -> Run {
    let n = ctx.r.get("n", a.n, 5)?;
    let dims = ctx.r.get("dims", a.dims, 1)?;
    let lat = lattice(ctx, &a.lattice, n, LatticeDefaults { x: 32, k: 3, m0: 1e-4, bc: "periodic" })?.with_dims(dims);
    lat.validate()?;
    if ctx.dry_run {
        return Ok(None);
    }
    let (s, wall) = timed(|| Ok(boson_ground_state(&lat, ctx.mem_cap)?))?;
    Ok(Some(Outcome {
        artifact: Artifact::Matrices {
            blocks: vec![("gamma_phi", s.gamma_phi), ("gamma_pi", s.gamma_pi)],
            lattice: lattice_json(&lat),
        },
        timings: vec![wall],
    }))
}

pub fn entropy(ctx: &mut Ctx, theory: Theory, a: &EntropyArgs) -> Run {
    let (n_default, defaults) = match theory {
        Theory::Fermion => ("6", LatticeDefaults { x: 16, k: 3, m0: 1e-8, bc: "antiperiodic" }),
        Theory::Boson => ("5", LatticeDefaults { x: 32, k: 3, m0: 1e-4, bc: "periodic" }),
    };
    let ns = u32_list("n", &ctx.r.get_str("n", a.n.clone(), n_default)?)?;
    let base = lattice(ctx, &a.lattice, ns[0], defaults)?;
    let sizes_spec = ctx.r.get_str("sizes", a.sizes.clone(), "all")?;
    let mut jobs = Vec::new();
    for &n in &ns {
        let lat = LatticeSpec { n, ..base.clone() };
        lat.validate()?;
        let v = lat.v();
        let sizes = match sizes_spec.as_str() {
            "all" => (1..v).collect(),
            "half" => vec![v / 2],
            list => uint_list("sizes", list)?,
        };
        if let Some(&s) = sizes.iter().find(|&&s| s == 0 || s > v) {
            return Err(CliError::config("sizes", format!("size {s} outside 1..={v} for n={n}")));
        }
        jobs.push((lat, sizes));
    }
    if ctx.dry_run {
        return Ok(None);
    }
    let mut t = Table::new(&["n", "v", "size", "fraction", "entropy_bits"]);
    let mut timings = Vec::new();
    for (lat, sizes) in &jobs {
        let pts = entropy_scan(theory, lat, sizes, ctx.mem_cap)?;
        timings.extend(walls(&pts));
        for p in pts {
            let p = p.value;
            t.push(vec![lat.n.into(), lat.v().into(), p.size.into(), p.fraction.into(), p.entropy_bits.into()]);
        }
    }
    table(t, timings)
}

pub fn fidelity(ctx: &mut Ctx, a: &FidelityArgs) -> Run {
    let v = ctx.r.get("v", a.v, 1024)?;
    let k = ctx.r.get("k", a.k, 3)?;
    let bc: Boundary = ctx.r.parse("bc", a.bc.clone(), "antiperiodic")?;
    let delta = match ctx.r.get_str("delta", a.delta.clone(), "auto")?.as_str() {
        "auto" => 1.0 / v as f64,
        s => s.parse::<f64>().map_err(|e| CliError::config("delta", format!("'{s}': {e}")))?,
    };
    let masses = float_list("masses", &ctx.r.get_str("masses", a.masses.clone(), "-0.02..0.02:0.001")?)?;
    let levels = u32_list("levels", &ctx.r.get_str("levels", a.levels.clone(), "0..9")?)?;
    let lat = LatticeSpec::new(v, 0, k, 0.0, bc);
    lat.validate()?;
    if ctx.dry_run {
        return Ok(None);
    }
    let pts = fidelity_scan(&lat, &masses, delta, &levels)?;
    let mut t = Table::new(&["level", "m0", "delta", "fidelity"]);
    for p in &pts {
        t.push(vec![p.value.level.into(), p.value.m0.into(), delta.into(), p.value.fidelity.into()]);
    }
    table(t, walls(&pts))
}

pub fn entropy_2d(ctx: &mut Ctx, a: &Entropy2dArgs) -> Run {
    let x = ctx.r.get("x", a.x, 8)?;
    let k = ctx.r.get("k", a.k, 3)?;
    let ns = u32_list("n", &ctx.r.get_str("n", a.n.clone(), "0..3")?)?;
    let masses = float_list("m0", &ctx.r.get_str("m0", a.m0.clone(), "1")?)?;
    let base = LatticeSpec::new(x, 0, k, 1.0, Boundary::Periodic).with_dims(2);
    base.validate()?;
    let points: Vec<(u32, f64)> = ns.iter().flat_map(|&n| masses.iter().map(move |&m| (n, m))).collect();
    if ctx.dry_run {
        return Ok(None);
    }
    let pts = entropy_2d_scan(&points, &base, ctx.mem_cap)?;
    let mut t = Table::new(&["n", "v", "m0", "entropy_bits"]);
    for p in &pts {
        let p = &p.value;
        t.push(vec![p.n.into(), p.v.into(), p.m0.into(), p.entropy_bits.into()]);
    }
    table(t, walls(&pts))
}

pub fn correlators(ctx: &mut Ctx, a: &CorrelatorArgs) -> Run {
    let theory: Theory = ctx.r.parse("theory", a.theory.clone(), "fermion")?;
    let n = ctx.r.get("n", a.n, 6)?;
    let bc = match theory {
        Theory::Fermion => "antiperiodic",
        Theory::Boson => "periodic",
    };
    let lat = lattice(ctx, &a.lattice, n, LatticeDefaults { x: 16, k: 3, m0: 0.2, bc })?;
    let observable = match ctx.r.get_str("observable", a.observable.clone(), "ff")?.as_str() {
        "ff" => BosonObservable::Ff,
        "pp" => BosonObservable::Pp,
        s => return Err(CliError::config("observable", format!("unknown observable '{s}' (ff|pp)"))),
    };
    let default_phase = if lat.m0 == 0.0 { "massless" } else { "massive" };
    let phase = match ctx.r.get_str("phase", a.phase.clone(), default_phase)?.as_str() {
        "massless" => Phase::Massless,
        "massive" => Phase::Massive,
        s => return Err(CliError::config("phase", format!("unknown phase '{s}' (massless|massive)"))),
    };
    let scales = u32_list("r", &ctx.r.get_str("r", a.r.clone(), "2..5")?)?;
    if let Some(&r) = scales.iter().find(|&&r| r >= n) {
        return Err(CliError::config("r", format!("scale r={r} must be below n={n}")));
    }
    if ctx.dry_run {
        return Ok(None);
    }
    let rows = correlator_scan(theory, observable, phase, &lat, &scales)?;
    let mut t = Table::new(&["r", "l", "numeric", "analytic"]);
    for row in &rows {
        for p in &row.value {
            t.push(vec![p.r.into(), p.l.into(), p.numeric.into(), p.analytic.into()]);
        }
    }
    table(t, walls(&rows))
}

fn region_lattice(ctx: &mut Ctx, a: &LatticeArgs, n: Option<u32>) -> Result<LatticeSpec> {
    let n = ctx.r.get("n", n, 0)?;
    lattice(ctx, a, n, LatticeDefaults { x: 4096, k: 3, m0: 1e-4, bc: "periodic" })
}

pub fn mi_compress(ctx: &mut Ctx, a: &MiArgs) -> Run {
    let lat = region_lattice(ctx, &a.lattice, a.n)?;
    let d = ctx.r.get("d", a.d, 512)?;
    let l = ctx.r.get("l", a.l, 256)?;
    let levels = u32_list("levels", &ctx.r.get_str("levels", a.levels.clone(), "0..6")?)?;
    if ctx.dry_run {
        return Ok(None);
    }
    let pts = mi_compress_scan(&lat, l, d, &levels)?;
    let mut t = Table::new(&["level", "modes_per_region", "mi_bits", "rel_error"]);
    for p in &pts {
        let p = &p.value;
        t.push(vec![p.level.into(), p.modes_per_region.into(), p.mi_bits.into(), p.rel_error.into()]);
    }
    table(t, walls(&pts))
}

pub fn eop(ctx: &mut Ctx, a: &EopArgs) -> Run {
    let lat = region_lattice(ctx, &a.lattice, a.n)?;
    let d = ctx.r.get("d", a.d, 512)?;
    let ls = pow2_list("l", &ctx.r.get_str("l", a.l.clone(), "2..512")?)?;
    let modes = ctx.r.get("modes", a.modes, 2)?;
    if modes != 2 && modes != 4 {
        return Err(CliError::config("modes", format!("{modes} (2|4)")));
    }
    if ctx.dry_run {
        return Ok(None);
    }
    let pts = eop_scan(&lat, d, &ls, modes)?;
    let mut t = Table::new(&[
        "l", "d_over_l", "e_p_bits", "x_star", "converged", "iterations", "minimizer", "mi_bits", "s_a_bits", "s_b_bits",
        "bounds_ok",
    ]);
    for p in &pts {
        let p = &p.value;
        let minimizer: Vec<String> = p.result.minimizer.iter().map(|&x| crate::output::fmt_float(x)).collect();
        t.push(vec![
            p.l.into(),
            p.d_over_l.into(),
            p.result.e_p.into(),
            p.result.minimizer.first().copied().unwrap_or(f64::NAN).into(),
            p.result.converged.into(),
            p.result.iterations.into(),
            minimizer.join(";").into(),
            p.mutual_info.into(),
            p.s_a.into(),
            p.s_b.into(),
            p.bounds_ok.into(),
        ]);
    }
    table(t, walls(&pts))
}
