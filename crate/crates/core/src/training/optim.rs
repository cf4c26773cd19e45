//! Derivative-free scalar and multivariate optimizers.

/// Golden-section search for the maximum of a unimodal `f` on `[lo, hi]`.
///
/// Returns `(x, f(x), evaluations)`; stops once the bracket is narrower than `tol`.
pub fn golden_section_max<F: FnMut(f64) -> f64>(
    mut f: F,
    mut lo: f64,
    mut hi: f64,
    tol: f64,
) -> (f64, f64, usize) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    let mut evals = 2;
    while hi - lo > tol {
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        }
        evals += 1;
    }
    if f1 >= f2 {
        (x1, f1, evals)
    } else {
        (x2, f2, evals)
    }
}

/// Bisection for a sign change of `f` on `[lo, hi]`; `f(lo)` and `f(hi)` must differ in sign.
pub fn bisect<F: FnMut(f64) -> f64>(mut f: F, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let lo_negative = f(lo) < 0.0;
    for _ in 0..200 {
        if (hi - lo).abs() <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if (f(mid) < 0.0) == lo_negative {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[derive(Debug, Clone)]
pub struct SimplexResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
    pub converged: bool,
}

/// Nelder–Mead minimization starting from an axis-aligned simplex around `x0`.
pub fn nelder_mead_min<F: FnMut(&[f64]) -> f64>(
    mut f: F,
    x0: &[f64],
    step: f64,
    max_iterations: usize,
    ftol: f64,
) -> SimplexResult {
    let dim = x0.len();
    let mut points: Vec<Vec<f64>> = Vec::with_capacity(dim + 1);
    points.push(x0.to_vec());
    for i in 0..dim {
        let mut p = x0.to_vec();
        p[i] += step;
        points.push(p);
    }
    let mut values: Vec<f64> = points.iter().map(|p| f(p)).collect();
    let mut evals = dim + 1;
    let mut converged = false;

    for _ in 0..max_iterations {
        let mut order: Vec<usize> = (0..=dim).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        points = order.iter().map(|&i| points[i].clone()).collect();
        values = order.iter().map(|&i| values[i]).collect();

        if (values[dim] - values[0]).abs() <= ftol * (1.0 + values[0].abs()) {
            converged = true;
            break;
        }

        let mut centroid = vec![0.0; dim];
        for p in &points[..dim] {
            for (c, x) in centroid.iter_mut().zip(p) {
                *c += x / dim as f64;
            }
        }
        let along = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&points[dim])
                .map(|(c, w)| c + t * (w - c))
                .collect()
        };

        let reflected = along(-1.0);
        let fr = f(&reflected);
        evals += 1;
        if fr < values[0] {
            let expanded = along(-2.0);
            let fe = f(&expanded);
            evals += 1;
            if fe < fr {
                points[dim] = expanded;
                values[dim] = fe;
            } else {
                points[dim] = reflected;
                values[dim] = fr;
            }
            continue;
        }
        if fr < values[dim - 1] {
            points[dim] = reflected;
            values[dim] = fr;
            continue;
        }
        let (contracted, fc) = if fr < values[dim] {
            let c = along(-0.5);
            let v = f(&c);
            (c, v)
        } else {
            let c = along(0.5);
            let v = f(&c);
            (c, v)
        };
        evals += 1;
        if fc < values[dim].min(fr) {
            points[dim] = contracted;
            values[dim] = fc;
            continue;
        }
        // Shrink toward the best vertex.
        let best = points[0].clone();
        for i in 1..=dim {
            for (x, b) in points[i].iter_mut().zip(&best) {
                *x = b + 0.5 * (*x - b);
            }
            values[i] = f(&points[i]);
            evals += 1;
        }
    }

    let best = (0..=dim)
        .min_by(|&a, &b| values[a].total_cmp(&values[b]))
        .unwrap_or(0);
    SimplexResult {
        x: points[best].clone(),
        value: values[best],
        evaluations: evals,
        converged,
    }
}

/// Compass (coordinate pattern) search maximizing `f`.
///
/// Polls `±step` along each axis, moves on strict improvement, halves the
/// step otherwise, and stops when the step falls below `min_step` or after
/// `max_evals` evaluations.
pub fn pattern_search_max<F: FnMut(&[f64]) -> f64>(
    mut f: F,
    x0: &[f64],
    initial_step: f64,
    min_step: f64,
    max_evals: usize,
) -> (Vec<f64>, f64, usize) {
    let mut x = x0.to_vec();
    let mut fx = f(&x);
    let mut evals = 1;
    let mut step = initial_step;
    let mut trial = x.clone();
    while step >= min_step && evals < max_evals {
        let mut improved = false;
        for i in 0..x.len() {
            for sign in [1.0, -1.0] {
                trial.copy_from_slice(&x);
                trial[i] += sign * step;
                let ft = f(&trial);
                evals += 1;
                if ft > fx {
                    x.copy_from_slice(&trial);
                    fx = ft;
                    improved = true;
                    break;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    (x, fx, evals)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_finds_parabola_peak() {
        let (x, fx, _) = golden_section_max(|x| -(x - 0.3).powi(2) + 2.0, -1.0, 1.0, 1e-12);
        assert!((x - 0.3).abs() < 1e-7);
        assert!((fx - 2.0).abs() < 1e-15);
    }

    #[test]
    fn bisect_finds_root() {
        let r = bisect(|x| x * x - 2.0, 0.0, 2.0, 1e-15);
        assert!((r - 2f64.sqrt()).abs() < 1e-14);
        let r = bisect(|x| 2.0 - x * x, 0.0, 2.0, 1e-15);
        assert!((r - 2f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn nelder_mead_rosenbrock() {
        let res = nelder_mead_min(
            |p| (1.0 - p[0]).powi(2) + 100.0 * (p[1] - p[0] * p[0]).powi(2),
            &[-1.2, 1.0],
            0.5,
            5000,
            1e-16,
        );
        assert!(res.converged);
        assert!((res.x[0] - 1.0).abs() < 1e-4 && (res.x[1] - 1.0).abs() < 1e-4);
    }

    #[test]
    fn pattern_search_quadratic() {
        let (x, fx, _) = pattern_search_max(
            |p| -(p[0] - 1.0).powi(2) - 2.0 * (p[1] + 0.5).powi(2),
            &[0.0, 0.0],
            0.25,
            1e-10,
            100_000,
        );
        assert!((x[0] - 1.0).abs() < 1e-8 && (x[1] + 0.5).abs() < 1e-8);
        assert!(fx.abs() < 1e-15);
    }
}
