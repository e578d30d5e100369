//! Small dense minimizers: BFGS with an optional analytic starting inverse
//! Hessian, and Nelder–Mead as a derivative-free fallback.

use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone, Copy)]
pub struct OptimOptions {
    pub max_iter: usize,
    /// Convergence when the gradient ∞-norm drops below this.
    pub grad_tol: f64,
    /// Cap on the ∞-norm of a single step.
    pub max_step: f64,
}

impl Default for OptimOptions {
    fn default() -> Self {
        OptimOptions { max_iter: 500, grad_tol: 1e-8, max_step: 4.0 }
    }
}

#[derive(Debug, Clone)]
pub struct OptimOutcome {
    pub x: DVector<f64>,
    pub f: f64,
    pub grad: DVector<f64>,
    pub iterations: usize,
    pub converged: bool,
}

impl OptimOutcome {
    pub fn grad_norm(&self) -> f64 {
        self.grad.amax()
    }
}

/// Minimizes `f`, which returns `None` outside its domain.
pub fn bfgs<F>(mut f: F, x0: DVector<f64>, inv_hessian: Option<DMatrix<f64>>, opts: OptimOptions) -> Option<OptimOutcome>
where
    F: FnMut(&DVector<f64>) -> Option<(f64, DVector<f64>)>,
{
    let dim = x0.len();
    let (mut fx, mut gx) = f(&x0).filter(|(v, g)| v.is_finite() && g.iter().all(|c| c.is_finite()))?;
    let mut x = x0;
    let seeded = inv_hessian.is_some();
    let mut h = inv_hessian.unwrap_or_else(|| DMatrix::identity(dim, dim));
    let mut iterations = 0;

    while iterations < opts.max_iter {
        if gx.amax() < opts.grad_tol {
            return Some(OptimOutcome { x, f: fx, grad: gx, iterations, converged: true });
        }
        iterations += 1;
        let mut p = -(&h * &gx);
        let mut slope = gx.dot(&p);
        if !(slope < 0.0) {
            h = DMatrix::identity(dim, dim);
            p = -gx.clone();
            slope = gx.dot(&p);
        }
        let pmax = p.amax();
        let mut t = if pmax > opts.max_step { opts.max_step / pmax } else { 1.0 };

        let mut accepted = None;
        while t > 1e-16 {
            let trial = &x + &p * t;
            if let Some((ft, gt)) = f(&trial) {
                if ft.is_finite() && gt.iter().all(|c| c.is_finite()) {
                    let armijo = ft <= fx + 1e-4 * t * slope;
                    // In the round-off regime the objective cannot resolve the
                    // decrease; accept if the gradient still shrinks.
                    let flat = (ft - fx).abs() <= 1e-13 * fx.abs().max(1.0) && gt.amax() < gx.amax();
                    if armijo || flat {
                        accepted = Some((trial, ft, gt));
                        break;
                    }
                }
            }
            t *= 0.5;
        }
        let Some((x_new, f_new, g_new)) = accepted else {
            break;
        };

        let s = &x_new - &x;
        let y = &g_new - &gx;
        let sy = s.dot(&y);
        if sy > 1e-14 * s.norm() * y.norm() && sy > 0.0 {
            if iterations == 1 && !seeded {
                h *= sy / y.dot(&y);
            }
            let rho = 1.0 / sy;
            let hy = &h * &y;
            let yhy = y.dot(&hy);
            // H ← H − ρ(s·(Hy)ᵀ + (Hy)·sᵀ) + (ρ²·yᵀHy + ρ)·s·sᵀ
            h -= (&s * hy.transpose() + &hy * s.transpose()) * rho;
            h += &s * s.transpose() * (rho * rho * yhy + rho);
        }
        x = x_new;
        fx = f_new;
        gx = g_new;
    }
    let converged = gx.amax() < opts.grad_tol;
    Some(OptimOutcome { x, f: fx, grad: gx, iterations, converged })
}

/// Nelder–Mead simplex search. Returns the best vertex and its value.
pub fn nelder_mead<F>(mut f: F, x0: &DVector<f64>, step: f64, max_iter: usize, f_tol: f64) -> (DVector<f64>, f64)
where
    F: FnMut(&DVector<f64>) -> f64,
{
    let dim = x0.len();
    let mut eval = |x: &DVector<f64>| {
        let v = f(x);
        if v.is_finite() {
            v
        } else {
            f64::INFINITY
        }
    };
    let mut simplex: Vec<(DVector<f64>, f64)> = Vec::with_capacity(dim + 1);
    simplex.push((x0.clone(), eval(x0)));
    for i in 0..dim {
        let mut v = x0.clone();
        v[i] += step;
        let fv = eval(&v);
        simplex.push((v, fv));
    }

    for _ in 0..max_iter {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let best = simplex[0].1;
        let worst = simplex[dim].1;
        if (worst - best).abs() <= f_tol * best.abs().max(1.0) {
            break;
        }
        let centroid = simplex[..dim].iter().fold(DVector::zeros(dim), |acc, (v, _)| acc + v) / dim as f64;
        let xw = simplex[dim].0.clone();
        let xr = &centroid + (&centroid - &xw);
        let fr = eval(&xr);
        if fr < simplex[0].1 {
            let xe = &centroid + (&xr - &centroid) * 2.0;
            let fe = eval(&xe);
            simplex[dim] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[dim - 1].1 {
            simplex[dim] = (xr, fr);
        } else {
            let (xc, fc) = if fr < worst {
                let xc = &centroid + (&xr - &centroid) * 0.5;
                let fc = eval(&xc);
                (xc, fc)
            } else {
                let xc = &centroid + (&xw - &centroid) * 0.5;
                let fc = eval(&xc);
                (xc, fc)
            };
            if fc < worst.min(fr) {
                simplex[dim] = (xc, fc);
            } else {
                let x_best = simplex[0].0.clone();
                for vertex in simplex.iter_mut().skip(1) {
                    let shrunk = &x_best + (&vertex.0 - &x_best) * 0.5;
                    let fs = eval(&shrunk);
                    *vertex = (shrunk, fs);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    simplex.swap_remove(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rosenbrock(x: &DVector<f64>) -> (f64, DVector<f64>) {
        let (a, b) = (x[0], x[1]);
        let f = (1.0 - a).powi(2) + 100.0 * (b - a * a).powi(2);
        let g = DVector::from_vec(vec![-2.0 * (1.0 - a) - 400.0 * a * (b - a * a), 200.0 * (b - a * a)]);
        (f, g)
    }

    #[test]
    fn bfgs_solves_rosenbrock() {
        let out = bfgs(|x| Some(rosenbrock(x)), DVector::from_vec(vec![-1.2, 1.0]), None, OptimOptions::default()).unwrap();
        assert!(out.converged, "{out:?}");
        assert!((out.x[0] - 1.0).abs() < 1e-6 && (out.x[1] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn bfgs_respects_domain() {
        // minimum of x − ln x at 1, undefined for x <= 0
        let f = |x: &DVector<f64>| {
            (x[0] > 0.0).then(|| (x[0] - x[0].ln(), DVector::from_vec(vec![1.0 - 1.0 / x[0]])))
        };
        let out = bfgs(f, DVector::from_vec(vec![5.0]), None, OptimOptions::default()).unwrap();
        assert!(out.converged);
        assert!((out.x[0] - 1.0).abs() < 1e-7);
    }

    #[test]
    fn nelder_mead_finds_quadratic_minimum() {
        let (x, fx) = nelder_mead(
            |x| (x[0] - 3.0).powi(2) + 2.0 * (x[1] + 1.0).powi(2),
            &DVector::from_vec(vec![0.0, 0.0]),
            0.5,
            2000,
            1e-14,
        );
        assert!(fx < 1e-10);
        assert!((x[0] - 3.0).abs() < 1e-4 && (x[1] + 1.0).abs() < 1e-4);
    }
}
