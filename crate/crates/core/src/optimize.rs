//! Local minimizers behind a common contract.
//!
//! [`Bfgs`] uses central finite-difference gradients and is the default for
//! the variational loop; [`NelderMead`] is derivative-free and is used where
//! an independent search is wanted.

use crate::{Error, Result};

#[derive(Debug, Clone)]
pub struct MinimizeOptions {
    pub max_iterations: usize,
    /// Stop when an accepted step changes the cost by less than this.
    pub f_tolerance: f64,
}

impl Default for MinimizeOptions {
    fn default() -> Self {
        MinimizeOptions {
            max_iterations: 400,
            f_tolerance: 1e-4,
        }
    }
}

#[derive(Debug, Clone)]
pub struct MinimizeResult {
    pub x: Vec<f64>,
    pub f: f64,
    pub n_evaluations: usize,
    pub n_iterations: usize,
    pub converged: bool,
}

/// Called after every accepted iterate with `(iteration, x, f)`.
pub type Observer<'a> = dyn FnMut(usize, &[f64], f64) + 'a;

pub trait Minimizer {
    fn minimize(
        &self,
        cost: &mut dyn FnMut(&[f64]) -> f64,
        x0: &[f64],
        options: &MinimizeOptions,
        observer: &mut Observer<'_>,
    ) -> Result<MinimizeResult>;
}

struct Counted<'a> {
    f: &'a mut dyn FnMut(&[f64]) -> f64,
    n: usize,
}

impl Counted<'_> {
    fn eval(&mut self, x: &[f64]) -> Result<f64> {
        self.n += 1;
        let v = (self.f)(x);
        if !v.is_finite() {
            return Err(Error::Numerical(format!(
                "cost is not finite ({v}) at evaluation {}",
                self.n
            )));
        }
        Ok(v)
    }
}

/// Quasi-Newton BFGS with central-difference gradients and Armijo
/// backtracking.
#[derive(Debug, Clone)]
pub struct Bfgs {
    pub fd_step: f64,
    /// Largest allowed step norm along a search direction.
    pub max_step: f64,
}

impl Default for Bfgs {
    fn default() -> Self {
        Bfgs {
            fd_step: 1e-5,
            max_step: 1.0,
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl Bfgs {
    fn gradient(&self, c: &mut Counted<'_>, x: &[f64]) -> Result<Vec<f64>> {
        let mut g = vec![0.0; x.len()];
        let mut xp = x.to_vec();
        for i in 0..x.len() {
            let h = self.fd_step;
            xp[i] = x[i] + h;
            let fp = c.eval(&xp)?;
            xp[i] = x[i] - h;
            let fm = c.eval(&xp)?;
            xp[i] = x[i];
            g[i] = (fp - fm) / (2.0 * h);
        }
        Ok(g)
    }
}

impl Minimizer for Bfgs {
    fn minimize(
        &self,
        cost: &mut dyn FnMut(&[f64]) -> f64,
        x0: &[f64],
        options: &MinimizeOptions,
        observer: &mut Observer<'_>,
    ) -> Result<MinimizeResult> {
        let n = x0.len();
        let mut c = Counted { f: cost, n: 0 };
        let mut x = x0.to_vec();
        let mut f = c.eval(&x)?;
        if n == 0 {
            return Ok(MinimizeResult {
                x,
                f,
                n_evaluations: c.n,
                n_iterations: 0,
                converged: true,
            });
        }
        let mut g = self.gradient(&mut c, &x)?;
        // Inverse Hessian approximation, row-major.
        let mut hinv = identity(n);
        let mut first = true;
        let mut converged = false;
        let mut it = 0;

        while it < options.max_iterations {
            it += 1;
            if g.iter().all(|v| v.abs() < 1e-10) {
                converged = true;
                break;
            }
            let mut d = matvec(&hinv, &g);
            d.iter_mut().for_each(|v| *v = -*v);
            if dot(&d, &g) >= 0.0 {
                hinv = identity(n);
                d = g.iter().map(|v| -v).collect();
            }
            let dn = dot(&d, &d).sqrt();
            if dn > self.max_step {
                d.iter_mut().for_each(|v| *v *= self.max_step / dn);
            }
            let slope = dot(&d, &g);

            let mut step = 1.0;
            let mut accepted = None;
            for _ in 0..40 {
                let xn: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a + step * b).collect();
                let fnew = c.eval(&xn)?;
                if fnew <= f + 1e-4 * step * slope {
                    accepted = Some((xn, fnew));
                    break;
                }
                step *= 0.5;
            }
            let Some((xn, fnew)) = accepted else {
                // No descent along the quasi-Newton direction: at the
                // resolution of the finite-difference gradient.
                converged = true;
                break;
            };
            let gn = self.gradient(&mut c, &xn)?;
            let s: Vec<f64> = xn.iter().zip(&x).map(|(a, b)| a - b).collect();
            let y: Vec<f64> = gn.iter().zip(&g).map(|(a, b)| a - b).collect();
            let sy = dot(&s, &y);
            if sy > 1e-14 {
                if first {
                    let scale = sy / dot(&y, &y);
                    hinv = identity(n);
                    hinv.iter_mut().for_each(|v| *v *= scale);
                    first = false;
                }
                bfgs_update(&mut hinv, &s, &y, sy);
            }
            let df = f - fnew;
            x = xn;
            f = fnew;
            g = gn;
            observer(it, &x, f);
            if df.abs() < options.f_tolerance {
                converged = true;
                break;
            }
        }
        Ok(MinimizeResult {
            x,
            f,
            n_evaluations: c.n,
            n_iterations: it,
            converged,
        })
    }
}

fn identity(n: usize) -> Vec<f64> {
    let mut m = vec![0.0; n * n];
    for i in 0..n {
        m[i * n + i] = 1.0;
    }
    m
}

fn matvec(m: &[f64], v: &[f64]) -> Vec<f64> {
    let n = v.len();
    (0..n).map(|i| dot(&m[i * n..(i + 1) * n], v)).collect()
}

fn bfgs_update(h: &mut [f64], s: &[f64], y: &[f64], sy: f64) {
    let n = s.len();
    let hy = matvec(h, y);
    let yhy = dot(y, &hy);
    let rho = 1.0 / sy;
    for i in 0..n {
        for j in 0..n {
            h[i * n + j] += (1.0 + rho * yhy) * rho * s[i] * s[j]
                - rho * (hy[i] * s[j] + s[i] * hy[j]);
        }
    }
}

/// Nelder-Mead simplex search.
#[derive(Debug, Clone)]
pub struct NelderMead {
    pub initial_step: f64,
}

impl Default for NelderMead {
    fn default() -> Self {
        NelderMead { initial_step: 0.1 }
    }
}

impl Minimizer for NelderMead {
    fn minimize(
        &self,
        cost: &mut dyn FnMut(&[f64]) -> f64,
        x0: &[f64],
        options: &MinimizeOptions,
        observer: &mut Observer<'_>,
    ) -> Result<MinimizeResult> {
        let n = x0.len();
        let mut c = Counted { f: cost, n: 0 };
        let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
        let f0 = c.eval(x0)?;
        simplex.push((x0.to_vec(), f0));
        for i in 0..n {
            let mut x = x0.to_vec();
            x[i] += self.initial_step;
            let f = c.eval(&x)?;
            simplex.push((x, f));
        }
        let mut converged = n == 0;
        let mut it = 0;
        while !converged && it < options.max_iterations {
            it += 1;
            simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
            let (best, worst) = (simplex[0].1, simplex[n].1);
            if (worst - best).abs() < options.f_tolerance {
                converged = true;
                break;
            }
            let mut centroid = vec![0.0; n];
            for (x, _) in &simplex[..n] {
                for (cv, xv) in centroid.iter_mut().zip(x) {
                    *cv += xv / n as f64;
                }
            }
            let along = |t: f64| -> Vec<f64> {
                centroid
                    .iter()
                    .zip(&simplex[n].0)
                    .map(|(cv, wv)| cv + t * (wv - cv))
                    .collect()
            };
            let xr = along(-1.0);
            let fr = c.eval(&xr)?;
            if fr < simplex[0].1 {
                let xe = along(-2.0);
                let fe = c.eval(&xe)?;
                simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
            } else if fr < simplex[n - 1].1 {
                simplex[n] = (xr, fr);
            } else {
                let xc = if fr < simplex[n].1 { along(-0.5) } else { along(0.5) };
                let fc = c.eval(&xc)?;
                if fc < simplex[n].1.min(fr) {
                    simplex[n] = (xc, fc);
                } else {
                    let x_best = simplex[0].0.clone();
                    for vertex in simplex.iter_mut().skip(1) {
                        let xs: Vec<f64> = x_best
                            .iter()
                            .zip(&vertex.0)
                            .map(|(b, v)| b + 0.5 * (v - b))
                            .collect();
                        let fs = c.eval(&xs)?;
                        *vertex = (xs, fs);
                    }
                }
            }
            simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
            observer(it, &simplex[0].0, simplex[0].1);
        }
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let (x, f) = simplex.swap_remove(0);
        Ok(MinimizeResult {
            x,
            f,
            n_evaluations: c.n,
            n_iterations: it,
            converged,
        })
    }
}
