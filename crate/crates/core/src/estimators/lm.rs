//! Box-constrained weighted Levenberg-Marquardt.

use nalgebra::{DMatrix, DVector};

/// A smooth model `f(x; p)` with an analytic Jacobian.
pub trait FitModel {
    fn param_names(&self) -> Vec<&'static str>;
    fn bounds(&self) -> Vec<(f64, f64)>;
    fn evaluate(&self, x: f64, p: &[f64]) -> f64;
    /// `∂f/∂p_j` written into `grad`.
    fn gradient(&self, x: f64, p: &[f64], grad: &mut [f64]);
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LmOptions {
    pub max_iterations: usize,
    /// converged once every step is below this fraction of the parameter
    pub step_tolerance: f64,
}

impl Default for LmOptions {
    fn default() -> Self {
        LmOptions { max_iterations: 200, step_tolerance: 1e-10 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LmOutcome {
    pub params: Vec<f64>,
    /// `sqrt(diag((JᵀJ)⁻¹))` on the weighted residuals; `INFINITY` along
    /// directions the data do not constrain
    pub stderrs: Vec<f64>,
    pub rss: f64,
    pub converged: bool,
    pub iterations: usize,
}

fn project(p: &mut [f64], bounds: &[(f64, f64)]) {
    for (v, &(lo, hi)) in p.iter_mut().zip(bounds) {
        *v = v.clamp(lo, hi);
    }
}

struct Problem<'a, M: FitModel + ?Sized> {
    model: &'a M,
    xs: &'a [f64],
    ys: &'a [f64],
    sigmas: &'a [f64],
}

impl<M: FitModel + ?Sized> Problem<'_, M> {
    fn rss(&self, p: &[f64]) -> f64 {
        self.xs
            .iter()
            .zip(self.ys)
            .zip(self.sigmas)
            .map(|((&x, &y), &s)| ((y - self.model.evaluate(x, p)) / s).powi(2))
            .sum()
    }

    /// Weighted Jacobian and residual vector.
    fn linearize(&self, p: &[f64]) -> (DMatrix<f64>, DVector<f64>) {
        let (m, n) = (self.xs.len(), p.len());
        let mut jac = DMatrix::zeros(m, n);
        let mut res = DVector::zeros(m);
        let mut g = vec![0.0; n];
        for i in 0..m {
            let (x, s) = (self.xs[i], self.sigmas[i]);
            self.model.gradient(x, p, &mut g);
            for j in 0..n {
                jac[(i, j)] = g[j] / s;
            }
            res[i] = (self.ys[i] - self.model.evaluate(x, p)) / s;
        }
        (jac, res)
    }
}

/// Standard errors from the inverse normal matrix; parameters whose
/// Jacobian column vanishes are reported as unconstrained.
fn standard_errors(jtj: &DMatrix<f64>) -> Vec<f64> {
    let n = jtj.nrows();
    let scale = (0..n).map(|j| jtj[(j, j)]).fold(0.0f64, f64::max);
    let active: Vec<usize> = (0..n).filter(|&j| jtj[(j, j)] > 1e-24 * scale && jtj[(j, j)] > 0.0).collect();
    let mut out = vec![f64::INFINITY; n];
    if active.is_empty() {
        return out;
    }
    let k = active.len();
    // unit-diagonal scaling keeps the inversion well conditioned
    let d: Vec<f64> = active.iter().map(|&j| jtj[(j, j)].sqrt()).collect();
    let reduced = DMatrix::from_fn(k, k, |a, b| jtj[(active[a], active[b])] / (d[a] * d[b]));
    if let Some(inv) = reduced.clone().try_inverse() {
        for (a, &j) in active.iter().enumerate() {
            let v = inv[(a, a)] / (d[a] * d[a]);
            if v.is_finite() && v >= 0.0 {
                out[j] = v.sqrt();
            }
        }
    }
    out
}

pub fn levenberg_marquardt<M: FitModel + ?Sized>(
    model: &M,
    xs: &[f64],
    ys: &[f64],
    sigmas: &[f64],
    initial: &[f64],
    options: LmOptions,
) -> LmOutcome {
    let prob = Problem { model, xs, ys, sigmas };
    let bounds = model.bounds();
    let n = initial.len();
    let mut p = initial.to_vec();
    project(&mut p, &bounds);
    let mut cost = prob.rss(&p);
    let mut lambda = 1e-3;
    let mut converged = false;
    let mut iterations = 0;
    let (mut jac, mut res) = prob.linearize(&p);
    while iterations < options.max_iterations {
        iterations += 1;
        if cost == 0.0 {
            converged = true;
            break;
        }
        let jtj = jac.transpose() * &jac;
        let jtr = jac.transpose() * &res;
        let diag_max = (0..n).map(|j| jtj[(j, j)]).fold(0.0f64, f64::max);
        let mut accepted = false;
        while lambda <= 1e16 {
            let mut a = jtj.clone();
            for j in 0..n {
                a[(j, j)] += lambda * jtj[(j, j)].max(1e-15 * diag_max).max(f64::MIN_POSITIVE);
            }
            let step = match a.cholesky() {
                Some(ch) => ch.solve(&jtr),
                None => {
                    lambda *= 10.0;
                    continue;
                }
            };
            let mut trial: Vec<f64> = p.iter().zip(step.iter()).map(|(a, b)| a + b).collect();
            project(&mut trial, &bounds);
            let trial_cost = prob.rss(&trial);
            if trial_cost.is_finite() && trial_cost < cost {
                let small = p.iter().zip(&trial).all(|(old, new)| {
                    (new - old).abs() <= options.step_tolerance * (old.abs() + options.step_tolerance)
                });
                // relative changes below 1e-12 are rounding noise in a sum of squares
                let stalled = cost - trial_cost <= 1e-12 * cost;
                // a heavily damped step is short without being near a minimum,
                // while a stalled cost only needs the damping to be moderate
                let trusted = lambda <= 1.0;
                let stalled = stalled && lambda <= 1e4;
                p = trial;
                cost = trial_cost;
                lambda = (lambda / 10.0).max(1e-12);
                accepted = true;
                if (trusted && small) || stalled {
                    converged = true;
                }
                break;
            }
            lambda *= 10.0;
        }
        if !accepted {
            // no descent direction left at any damping: a (possibly
            // constrained) minimum
            converged = true;
        }
        (jac, res) = prob.linearize(&p);
        if converged {
            break;
        }
    }
    let jtj = jac.transpose() * &jac;
    LmOutcome { stderrs: standard_errors(&jtj), params: p, rss: cost, converged, iterations }
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Line;

    impl FitModel for Line {
        fn param_names(&self) -> Vec<&'static str> {
            vec!["a", "b"]
        }
        fn bounds(&self) -> Vec<(f64, f64)> {
            vec![(f64::NEG_INFINITY, f64::INFINITY); 2]
        }
        fn evaluate(&self, x: f64, p: &[f64]) -> f64 {
            p[0] + p[1] * x
        }
        fn gradient(&self, x: f64, _p: &[f64], g: &mut [f64]) {
            g[0] = 1.0;
            g[1] = x;
        }
    }

    #[test]
    fn weighted_line_matches_closed_form() {
        let xs = [0.0, 1.0, 2.0, 3.0, 4.0];
        let ys = [1.1, 2.9, 5.2, 6.8, 9.1];
        let sig = [0.1, 0.2, 0.1, 0.3, 0.2];
        let out = levenberg_marquardt(&Line, &xs, &ys, &sig, &[0.0, 0.0], LmOptions::default());
        assert!(out.converged);
        let w: Vec<f64> = sig.iter().map(|s| 1.0 / (s * s)).collect();
        let sw: f64 = w.iter().sum();
        let sx: f64 = w.iter().zip(&xs).map(|(w, x)| w * x).sum();
        let sy: f64 = w.iter().zip(&ys).map(|(w, y)| w * y).sum();
        let sxx: f64 = w.iter().zip(&xs).map(|(w, x)| w * x * x).sum();
        let sxy: f64 = w.iter().zip(&xs).zip(&ys).map(|((w, x), y)| w * x * y).sum();
        let det = sw * sxx - sx * sx;
        let b = (sw * sxy - sx * sy) / det;
        let a = (sy - b * sx) / sw;
        assert!((out.params[0] - a).abs() < 1e-9 && (out.params[1] - b).abs() < 1e-9);
        assert!((out.stderrs[1] - (sw / det).sqrt()).abs() < 1e-9);
        assert!((out.stderrs[0] - (sxx / det).sqrt()).abs() < 1e-9);
    }

    #[test]
    fn bounds_are_respected() {
        struct Bounded;
        impl FitModel for Bounded {
            fn param_names(&self) -> Vec<&'static str> {
                vec!["a"]
            }
            fn bounds(&self) -> Vec<(f64, f64)> {
                vec![(0.0, 1.0)]
            }
            fn evaluate(&self, _x: f64, p: &[f64]) -> f64 {
                p[0]
            }
            fn gradient(&self, _x: f64, _p: &[f64], g: &mut [f64]) {
                g[0] = 1.0;
            }
        }
        let out = levenberg_marquardt(&Bounded, &[0.0, 1.0], &[2.0, 2.2], &[0.1, 0.1], &[0.5], LmOptions::default());
        assert_eq!(out.params[0], 1.0);
        assert!(out.converged);
    }

    #[test]
    fn unconstrained_direction_is_infinite() {
        struct Flat;
        impl FitModel for Flat {
            fn param_names(&self) -> Vec<&'static str> {
                vec!["a", "ghost"]
            }
            fn bounds(&self) -> Vec<(f64, f64)> {
                vec![(f64::NEG_INFINITY, f64::INFINITY); 2]
            }
            fn evaluate(&self, _x: f64, p: &[f64]) -> f64 {
                p[0]
            }
            fn gradient(&self, _x: f64, _p: &[f64], g: &mut [f64]) {
                g[0] = 1.0;
                g[1] = 0.0;
            }
        }
        let out = levenberg_marquardt(
            &Flat,
            &[0.0, 1.0, 2.0],
            &[1.0, 1.2, 0.8],
            &[0.1; 3],
            &[0.0, 3.0],
            LmOptions::default(),
        );
        assert!((out.params[0] - 1.0).abs() < 1e-9);
        assert_eq!(out.params[1], 3.0);
        assert!(out.stderrs[0].is_finite() && out.stderrs[1].is_infinite());
    }
}
