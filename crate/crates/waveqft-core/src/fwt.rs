//! Multilevel discrete wavelet transforms on vectors and covariance matrices.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::Boundary;
use crate::wavelet::FilterBank;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeKind {
    Scale,
    Wavelet,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ModeIndex {
    pub kind: ModeKind,
    pub r: i64,
    pub l: usize,
}

impl ModeIndex {
    pub fn scale(r: i64, l: usize) -> Self {
        ModeIndex { kind: ModeKind::Scale, r, l }
    }
    pub fn wavelet(r: i64, l: usize) -> Self {
        ModeIndex { kind: ModeKind::Wavelet, r, l }
    }
}

#[derive(Debug, Clone)]
pub struct TransformPlan {
    pub v: usize,
    pub levels: u32,
    /// Scale label of the input coefficients.
    pub n: u32,
    pub fb: FilterBank,
    pub boundary: Boundary,
}

impl TransformPlan {
    pub fn new(v: usize, levels: u32, n: u32, fb: FilterBank, boundary: Boundary) -> Result<Self> {
        let plan = TransformPlan { v, levels, n, fb, boundary };
        plan.validate()?;
        Ok(plan)
    }

    fn validate(&self) -> Result<()> {
        if self.levels > self.n {
            return Err(Error::Shape(format!("levels={} exceeds scale n={}", self.levels, self.n)));
        }
        if self.v == 0 {
            return Err(Error::Shape("empty transform".into()));
        }
        if self.boundary != Boundary::Open && self.v % (1usize << self.levels) != 0 {
            return Err(Error::Shape(format!("V={} not divisible by 2^{}", self.v, self.levels)));
        }
        Ok(())
    }

    /// Length of the approximation sequence after each level (entry 0 is `V`).
    fn lengths(&self) -> Vec<usize> {
        let mut out = vec![self.v];
        let lam = self.fb.len();
        for _ in 0..self.levels {
            let n = *out.last().unwrap();
            out.push(match self.boundary {
                Boundary::Open => {
                    if n >= lam {
                        (n - lam) / 2 + 1
                    } else {
                        0
                    }
                }
                _ => n / 2,
            });
        }
        out
    }

    /// Output labels: coarsest scale block, then wavelets from coarse to fine.
    pub fn labels(&self) -> Vec<ModeIndex> {
        let lens = self.lengths();
        let d = self.levels as usize;
        let top = self.n as i64;
        let mut out = Vec::new();
        let coarse = top - d as i64;
        out.extend((0..lens[d]).map(|l| ModeIndex::scale(coarse, l)));
        for j in (1..=d).rev() {
            let r = top - j as i64;
            out.extend((0..lens[j]).map(|l| ModeIndex::wavelet(r, l)));
        }
        out
    }

    pub fn output_len(&self) -> usize {
        let lens = self.lengths();
        lens[self.levels as usize] + lens[1..].iter().sum::<usize>()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledVector {
    pub labels: Vec<ModeIndex>,
    pub values: Vec<f64>,
}

/// One periodic analysis level.
pub fn analyze_level_periodic(x: &[f64], fb: &FilterBank) -> (Vec<f64>, Vec<f64>) {
    let n = x.len();
    let half = n / 2;
    let mut a = vec![0.0; half];
    let mut d = vec![0.0; half];
    for i in 0..half {
        let (mut sa, mut sd) = (0.0, 0.0);
        for (l, (&h, &g)) in fb.h.iter().zip(&fb.g).enumerate() {
            let v = x[(2 * i + l) % n];
            sa += h * v;
            sd += g * v;
        }
        a[i] = sa;
        d[i] = sd;
    }
    (a, d)
}

/// Transpose of [`analyze_level_periodic`].
pub fn synth_level_periodic(a: &[f64], d: &[f64], fb: &FilterBank) -> Vec<f64> {
    let n = 2 * a.len();
    let mut x = vec![0.0; n];
    for i in 0..a.len() {
        for (l, (&h, &g)) in fb.h.iter().zip(&fb.g).enumerate() {
            x[(2 * i + l) % n] += h * a[i] + g * d[i];
        }
    }
    x
}

fn analyze_level_open(x: &[f64], fb: &FilterBank, m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut a = vec![0.0; m];
    let mut d = vec![0.0; m];
    for i in 0..m {
        for (l, (&h, &g)) in fb.h.iter().zip(&fb.g).enumerate() {
            a[i] += h * x[2 * i + l];
            d[i] += g * x[2 * i + l];
        }
    }
    (a, d)
}

fn synth_level_open(a: &[f64], d: &[f64], fb: &FilterBank, n: usize) -> Vec<f64> {
    let mut x = vec![0.0; n];
    for i in 0..a.len() {
        for (l, (&h, &g)) in fb.h.iter().zip(&fb.g).enumerate() {
            x[2 * i + l] += h * a[i] + g * d[i];
        }
    }
    x
}

fn forward(x: &[f64], plan: &TransformPlan) -> Vec<f64> {
    let lens = plan.lengths();
    let mut cur = x.to_vec();
    let mut details: Vec<Vec<f64>> = Vec::with_capacity(plan.levels as usize);
    for j in 1..=plan.levels as usize {
        let (a, d) = match plan.boundary {
            Boundary::Open => analyze_level_open(&cur, &plan.fb, lens[j]),
            _ => analyze_level_periodic(&cur, &plan.fb),
        };
        details.push(d);
        cur = a;
    }
    let mut out = cur;
    for d in details.into_iter().rev() {
        out.extend(d);
    }
    out
}

fn inverse(y: &[f64], plan: &TransformPlan) -> Vec<f64> {
    let lens = plan.lengths();
    let d = plan.levels as usize;
    let mut pos = lens[d];
    let mut cur = y[..pos].to_vec();
    for j in (1..=d).rev() {
        let det = &y[pos..pos + lens[j]];
        pos += lens[j];
        cur = match plan.boundary {
            Boundary::Open => synth_level_open(&cur, det, &plan.fb, lens[j - 1]),
            _ => synth_level_periodic(&cur, det, &plan.fb),
        };
    }
    cur
}

pub fn dwt(x: &[f64], plan: &TransformPlan) -> Result<LabeledVector> {
    if x.len() != plan.v {
        return Err(Error::Shape(format!("input length {} != V={}", x.len(), plan.v)));
    }
    Ok(LabeledVector { labels: plan.labels(), values: forward(x, plan) })
}

/// Inverse transform; for open boundaries this is the adjoint (projection onto the range).
pub fn idwt(y: &LabeledVector, plan: &TransformPlan) -> Result<Vec<f64>> {
    if y.labels != plan.labels() || y.values.len() != y.labels.len() {
        return Err(Error::Shape("labels do not match the transform plan".into()));
    }
    Ok(inverse(&y.values, plan))
}

/// Dense `W` with `dwt(x) = W x`. Intended for small test oracles.
pub fn transform_matrix(plan: &TransformPlan) -> DMatrix<f64> {
    let m = plan.output_len();
    let cols: Vec<Vec<f64>> = (0..plan.v)
        .into_par_iter()
        .map(|j| {
            let mut e = vec![0.0; plan.v];
            e[j] = 1.0;
            forward(&e, plan)
        })
        .collect();
    DMatrix::from_fn(m, plan.v, |i, j| cols[j][i])
}

#[derive(Debug, Clone)]
pub struct LabeledMatrix {
    pub labels: Vec<ModeIndex>,
    /// Number of Majorana flavors stacked along each axis (1 for bosonic blocks).
    pub flavors: usize,
    pub matrix: DMatrix<f64>,
}

impl LabeledMatrix {
    /// Row/column of `(flavor, mode)`.
    pub fn position(&self, flavor: usize, mode: ModeIndex) -> Option<usize> {
        if flavor >= self.flavors {
            return None;
        }
        self.labels.iter().position(|&m| m == mode).map(|i| flavor * self.labels.len() + i)
    }
}

/// `W' G W'ᵀ` with `W' = W` (V×V input) or `W ⊕ W` (2V×2V input, per Majorana flavor).
pub fn conjugate_covariance(g: &DMatrix<f64>, plan: &TransformPlan) -> Result<LabeledMatrix> {
    if g.nrows() != g.ncols() {
        return Err(Error::Shape(format!("covariance is {}x{}", g.nrows(), g.ncols())));
    }
    let flavors = if g.nrows() == plan.v {
        1
    } else if g.nrows() == 2 * plan.v {
        2
    } else {
        return Err(Error::Shape(format!("covariance size {} incompatible with V={}", g.nrows(), plan.v)));
    };
    let half = apply_left(g, plan, flavors);
    let full = apply_left(&half.transpose(), plan, flavors).transpose();
    Ok(LabeledMatrix { labels: plan.labels(), flavors, matrix: full })
}

fn apply_left(g: &DMatrix<f64>, plan: &TransformPlan, flavors: usize) -> DMatrix<f64> {
    let v = plan.v;
    let m = plan.output_len();
    let cols: Vec<Vec<f64>> = (0..g.ncols())
        .into_par_iter()
        .map(|j| {
            let col = g.column(j);
            let mut out = Vec::with_capacity(flavors * m);
            for f in 0..flavors {
                let seg: Vec<f64> = (0..v).map(|i| col[f * v + i]).collect();
                out.extend(forward(&seg, plan));
            }
            out
        })
        .collect();
    DMatrix::from_fn(flavors * m, g.ncols(), |i, j| cols[j][i])
}
