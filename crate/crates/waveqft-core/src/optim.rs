//! Derivative-free minimizers for the purification searches.

/// Outcome of a minimization.
#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub f: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Grid bracketing on `[lo, hi]` followed by golden-section refinement to `|Δx| < tol`.
/// Non-finite objective values count as `+∞`.
pub fn golden_section<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, grid: usize, tol: f64) -> Minimum {
    let eval = |x: f64| {
        let v = f(x);
        if v.is_finite() {
            v
        } else {
            f64::INFINITY
        }
    };
    let grid = grid.max(3);
    let xs: Vec<f64> = (0..grid).map(|i| lo + (hi - lo) * i as f64 / (grid - 1) as f64).collect();
    let vals: Vec<f64> = xs.iter().map(|&x| eval(x)).collect();
    let best = (0..grid).min_by(|&a, &b| vals[a].total_cmp(&vals[b])).unwrap();
    let mut a = xs[best.saturating_sub(1)];
    let mut b = xs[(best + 1).min(grid - 1)];
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let (mut fc, mut fd) = (eval(c), eval(d));
    let mut iterations = grid;
    while (b - a).abs() > tol && iterations < grid + 200 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = eval(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = eval(d);
        }
        iterations += 1;
    }
    let mut x = 0.5 * (a + b);
    let mut fx = eval(x);
    if vals[best] < fx {
        x = xs[best];
        fx = vals[best];
    }
    Minimum { x: vec![x], f: fx, iterations, converged: (b - a).abs() <= tol && fx.is_finite() }
}

/// Nelder–Mead simplex from `x0` with initial edge `step`, stopping when the spread of
/// simplex values drops below `ftol`.
pub fn nelder_mead<F: Fn(&[f64]) -> f64>(f: &F, x0: &[f64], step: f64, ftol: f64, max_iter: usize) -> Minimum {
    let n = x0.len();
    let eval = |x: &[f64]| {
        let v = f(x);
        if v.is_finite() {
            v
        } else {
            f64::INFINITY
        }
    };
    let mut simplex: Vec<Vec<f64>> = vec![x0.to_vec()];
    for i in 0..n {
        let mut p = x0.to_vec();
        p[i] += step;
        simplex.push(p);
    }
    let mut vals: Vec<f64> = simplex.iter().map(|p| eval(p)).collect();
    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iter {
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        vals = order.iter().map(|&i| vals[i]).collect();
        if vals[n].is_finite() && (vals[n] - vals[0]).abs() < ftol {
            converged = true;
            break;
        }
        iterations += 1;
        let centroid: Vec<f64> = (0..n).map(|j| simplex[..n].iter().map(|p| p[j]).sum::<f64>() / n as f64).collect();
        let along = |t: f64| -> Vec<f64> { (0..n).map(|j| centroid[j] + t * (simplex[n][j] - centroid[j])).collect() };
        let xr = along(-1.0);
        let fr = eval(&xr);
        if fr < vals[0] {
            let xe = along(-2.0);
            let fe = eval(&xe);
            if fe < fr {
                simplex[n] = xe;
                vals[n] = fe;
            } else {
                simplex[n] = xr;
                vals[n] = fr;
            }
        } else if fr < vals[n - 1] {
            simplex[n] = xr;
            vals[n] = fr;
        } else {
            let (xc, fc) = if fr < vals[n] {
                let xc = along(-0.5);
                let fc = eval(&xc);
                (xc, fc)
            } else {
                let xc = along(0.5);
                let fc = eval(&xc);
                (xc, fc)
            };
            if fc < vals[n].min(fr) {
                simplex[n] = xc;
                vals[n] = fc;
            } else {
                for i in 1..=n {
                    for j in 0..n {
                        simplex[i][j] = simplex[0][j] + 0.5 * (simplex[i][j] - simplex[0][j]);
                    }
                    vals[i] = eval(&simplex[i]);
                }
            }
        }
    }
    let best = (0..=n).min_by(|&a, &b| vals[a].total_cmp(&vals[b])).unwrap();
    Minimum { x: simplex[best].clone(), f: vals[best], iterations, converged: converged && vals[best].is_finite() }
}

/// First `count` points of the Halton sequence in `dim ≤ 8` dimensions, in `[0, 1)`.
pub fn halton(count: usize, dim: usize) -> Vec<Vec<f64>> {
    const PRIMES: [u64; 8] = [2, 3, 5, 7, 11, 13, 17, 19];
    assert!(dim <= PRIMES.len());
    (1..=count as u64)
        .map(|i| {
            PRIMES[..dim]
                .iter()
                .map(|&b| {
                    let (mut f, mut r, mut k) = (1.0, 0.0, i);
                    while k > 0 {
                        f /= b as f64;
                        r += f * (k % b) as f64;
                        k /= b;
                    }
                    r
                })
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_finds_parabola_vertex() {
        let m = golden_section(|x| (x - 0.3).powi(2) + 1.0, -1.0, 1.0, 21, 1e-9);
        assert!(m.converged);
        assert!((m.x[0] - 0.3).abs() < 1e-6);
    }

    #[test]
    fn golden_skips_infinite_points() {
        let m = golden_section(|x| if x < 0.0 { f64::NAN } else { (x - 0.5).abs() }, -1.0, 1.0, 41, 1e-9);
        assert!((m.x[0] - 0.5).abs() < 1e-6);
    }

    #[test]
    fn nelder_mead_rosenbrock() {
        let f = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let m = nelder_mead(&f, &[-1.2, 1.0], 0.5, 1e-14, 5000);
        assert!(m.converged);
        assert!((m.x[0] - 1.0).abs() < 1e-4 && (m.x[1] - 1.0).abs() < 1e-4);
    }

    #[test]
    fn halton_first_points() {
        let h = halton(3, 2);
        assert_eq!(h[0], vec![0.5, 1.0 / 3.0]);
        assert_eq!(h[1], vec![0.25, 2.0 / 3.0]);
        assert!((h[2][0] - 0.75).abs() < 1e-15 && (h[2][1] - 1.0 / 9.0).abs() < 1e-15);
    }
}
