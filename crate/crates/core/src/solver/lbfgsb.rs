//! Limited-memory BFGS restricted to the unit box `[0, 1]^d`.
//!
//! Each iteration fixes the variables sitting on a bound whose gradient
//! pushes outward, builds a quasi-Newton direction on the remaining free
//! variables with the two-loop recursion, and runs a projected
//! backtracking (Armijo) line search. Iterates never leave the box.

use std::collections::VecDeque;

#[derive(Clone, Debug)]
pub struct BoxLbfgs {
    pub memory: usize,
    pub max_iterations: usize,
    /// Stop when the projected gradient's infinity norm falls below this.
    pub gradient_tolerance: f64,
    /// Stop when `(f_prev - f) / max(|f_prev|, |f|, 1)` falls below this.
    pub relative_decrease: f64,
}

impl Default for BoxLbfgs {
    fn default() -> Self {
        Self {
            memory: 10,
            max_iterations: 500,
            gradient_tolerance: 1e-5,
            relative_decrease: 1e-8,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StopReason {
    GradientTolerance,
    RelativeDecrease,
    MaxIterations,
    LineSearchFailed,
    Interrupted,
    NonFinite,
}

#[derive(Clone, Debug)]
pub struct Minimum {
    pub value: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub reason: StopReason,
}

const ARMIJO: f64 = 1e-4;
const MAX_BACKTRACKS: usize = 40;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Infinity norm of `P(x - g) - x`.
fn projected_gradient_norm(x: &[f64], g: &[f64]) -> f64 {
    x.iter()
        .zip(g)
        .map(|(&xi, &gi)| ((xi - gi).clamp(0.0, 1.0) - xi).abs())
        .fold(0.0, f64::max)
}

impl BoxLbfgs {
    /// Minimizes `f` over the unit box starting from `x` (projected first).
    ///
    /// `f` writes the gradient into its second argument and returns the
    /// value. `on_iteration(iteration, value)` is called after each
    /// accepted step; returning `false` stops the run.
    pub fn minimize(
        &self,
        x: &mut [f64],
        mut f: impl FnMut(&[f64], &mut [f64]) -> f64,
        mut on_iteration: impl FnMut(usize, f64) -> bool,
    ) -> Minimum {
        let d = x.len();
        x.iter_mut().for_each(|v| *v = v.clamp(0.0, 1.0));
        let mut g = vec![0.0; d];
        let mut fx = f(x, &mut g);
        let mut evaluations = 1;
        let finish = |value, iterations, evaluations, reason| Minimum {
            value,
            iterations,
            evaluations,
            reason,
        };
        if !fx.is_finite() {
            return finish(fx, 0, evaluations, StopReason::NonFinite);
        }

        let mut history: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::new();
        let mut dir = vec![0.0; d];
        let mut free = vec![true; d];
        let mut x_new = vec![0.0; d];
        let mut g_new = vec![0.0; d];
        let mut alpha_buf = vec![0.0; self.memory];

        for iter in 0..self.max_iterations {
            if projected_gradient_norm(x, &g) <= self.gradient_tolerance {
                return finish(fx, iter, evaluations, StopReason::GradientTolerance);
            }
            for i in 0..d {
                free[i] = !((x[i] <= 0.0 && g[i] > 0.0) || (x[i] >= 1.0 && g[i] < 0.0));
            }

            let mut attempt_steepest = history.is_empty();
            let accepted = loop {
                // two-loop recursion on the free components
                for i in 0..d {
                    dir[i] = if free[i] { g[i] } else { 0.0 };
                }
                if !attempt_steepest {
                    for (j, (s, y, rho)) in history.iter().enumerate().rev() {
                        let a = rho * dot(s, &dir);
                        alpha_buf[j] = a;
                        dir.iter_mut().zip(y).for_each(|(q, yi)| *q -= a * yi);
                    }
                    let (s, y, _) = history.back().unwrap();
                    let gamma = dot(s, y) / dot(y, y);
                    dir.iter_mut().for_each(|q| *q *= gamma);
                    for (j, (s, y, rho)) in history.iter().enumerate() {
                        let b = rho * dot(y, &dir);
                        let a = alpha_buf[j];
                        dir.iter_mut().zip(s).for_each(|(r, si)| *r += (a - b) * si);
                    }
                    for i in 0..d {
                        if !free[i] {
                            dir[i] = 0.0;
                        }
                    }
                }
                dir.iter_mut().for_each(|v| *v = -*v);
                if !attempt_steepest && dot(&dir, &g) >= 0.0 {
                    history.clear();
                    attempt_steepest = true;
                    continue;
                }

                let mut step = if attempt_steepest {
                    let scale = dir.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                    if scale > 0.0 { 1.0 / scale } else { 1.0 }
                } else {
                    1.0
                };
                let mut found = None;
                for _ in 0..MAX_BACKTRACKS {
                    for i in 0..d {
                        x_new[i] = (x[i] + step * dir[i]).clamp(0.0, 1.0);
                    }
                    let decrease: f64 = (0..d).map(|i| g[i] * (x_new[i] - x[i])).sum();
                    let f_new = f(&x_new, &mut g_new);
                    evaluations += 1;
                    if f_new.is_finite() && f_new <= fx + ARMIJO * decrease && decrease < 0.0 {
                        found = Some(f_new);
                        break;
                    }
                    if decrease >= 0.0 && f_new.is_finite() && f_new < fx {
                        found = Some(f_new);
                        break;
                    }
                    step *= 0.5;
                }
                match found {
                    Some(v) => break Some(v),
                    None if !attempt_steepest => {
                        history.clear();
                        attempt_steepest = true;
                    }
                    None => break None,
                }
            };

            let Some(f_new) = accepted else {
                return finish(fx, iter, evaluations, StopReason::LineSearchFailed);
            };

            let s: Vec<f64> = x_new.iter().zip(x.iter()).map(|(a, b)| a - b).collect();
            let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
            let sy = dot(&s, &y);
            if sy > 1e-10 * dot(&y, &y).max(f64::MIN_POSITIVE) {
                if history.len() == self.memory {
                    history.pop_front();
                }
                history.push_back((s, y, 1.0 / sy));
            }

            let f_prev = fx;
            x.copy_from_slice(&x_new);
            std::mem::swap(&mut g, &mut g_new);
            fx = f_new;

            if !on_iteration(iter + 1, fx) {
                return finish(fx, iter + 1, evaluations, StopReason::Interrupted);
            }
            if (f_prev - fx) <= self.relative_decrease * f_prev.abs().max(fx.abs()).max(1.0) {
                return finish(fx, iter + 1, evaluations, StopReason::RelativeDecrease);
            }
        }
        finish(fx, self.max_iterations, evaluations, StopReason::MaxIterations)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn separable_quadratic_with_active_bounds() {
        // minimum of Σ (x_i - t_i)² over the box is clamp(t)
        let target = [0.3, -2.0, 1.7, 0.9, 0.5];
        let mut x = vec![0.5; 5];
        let opt = BoxLbfgs::default();
        let out = opt.minimize(
            &mut x,
            |x, g| {
                let mut f = 0.0;
                for i in 0..x.len() {
                    f += (x[i] - target[i]).powi(2);
                    g[i] = 2.0 * (x[i] - target[i]);
                }
                f
            },
            |_, _| true,
        );
        for (xi, t) in x.iter().zip(target) {
            assert!((xi - t.clamp(0.0, 1.0)).abs() < 1e-6, "{x:?}");
        }
        assert!(out.value >= 0.0);
    }

    #[test]
    fn rosenbrock_in_box_is_monotone() {
        let mut x = vec![0.1, 0.9];
        let mut values = vec![];
        let opt = BoxLbfgs {
            max_iterations: 2000,
            gradient_tolerance: 1e-9,
            relative_decrease: 0.0,
            ..Default::default()
        };
        opt.minimize(
            &mut x,
            |x, g| {
                let (a, b) = (x[0], x[1]);
                g[0] = -2.0 * (1.0 - a) - 400.0 * a * (b - a * a);
                g[1] = 200.0 * (b - a * a);
                (1.0 - a).powi(2) + 100.0 * (b - a * a).powi(2)
            },
            |_, v| {
                values.push(v);
                true
            },
        );
        assert!((x[0] - 1.0).abs() < 1e-4 && (x[1] - 1.0).abs() < 1e-4, "{x:?}");
        assert!(values.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn interruption() {
        let mut x = vec![0.0; 3];
        let out = BoxLbfgs::default().minimize(
            &mut x,
            |x, g| {
                g.iter_mut().zip(x).for_each(|(gi, xi)| *gi = 2.0 * (xi - 0.7));
                x.iter().map(|xi| (xi - 0.7).powi(2)).sum::<f64>()
            },
            |_, _| false,
        );
        assert_eq!(out.reason, StopReason::Interrupted);
        assert_eq!(out.iterations, 1);
    }
}
