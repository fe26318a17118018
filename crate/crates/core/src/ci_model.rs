//! Two-level cone models, perturbation-shifted degeneracies and gap opening
//! by projection onto a mixed state.

use nalgebra::{Matrix2, SymmetricEigen};

use crate::{Error, Result};

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// Diagonal background `h0(R)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Background {
    Constant(f64),
    /// `c + k |R - R0|^2`.
    Quadratic { c: f64, k: f64 },
}

impl Default for Background {
    fn default() -> Self {
        Background::Constant(0.0)
    }
}

/// `H(R) = h0(R) I + hx (R-R0).Rx X + hz (R-R0).Rz Z`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConeModel {
    pub r0: Vec<f64>,
    pub rx: Vec<f64>,
    pub rz: Vec<f64>,
    pub hx: f64,
    pub hz: f64,
    pub h0: Background,
}

fn gram_det(a: &[f64], b: &[f64]) -> (f64, f64) {
    let (aa, bb, ab) = (dot(a, a), dot(b, b), dot(a, b));
    (aa * bb - ab * ab, aa * bb)
}

impl ConeModel {
    pub fn new(r0: Vec<f64>, rx: Vec<f64>, rz: Vec<f64>, hx: f64, hz: f64) -> Result<Self> {
        let m = ConeModel {
            r0,
            rx,
            rz,
            hx,
            hz,
            h0: Background::default(),
        };
        m.validate()?;
        Ok(m)
    }

    pub fn with_background(mut self, h0: Background) -> Self {
        self.h0 = h0;
        self
    }

    pub fn dim(&self) -> usize {
        self.r0.len()
    }

    fn validate(&self) -> Result<()> {
        let n = self.r0.len();
        if self.rx.len() != n || self.rz.len() != n {
            return Err(Error::Dimension("cone vectors differ in dimension".into()));
        }
        let (det, scale) = gram_det(&self.rx, &self.rz);
        if !(det > 1e-12 * scale) {
            return Err(Error::Invalid("R_X and R_Z are not linearly independent".into()));
        }
        Ok(())
    }

    fn check(&self, r: &[f64]) -> Result<()> {
        if r.len() != self.dim() {
            return Err(Error::Dimension(format!(
                "point of dimension {} for a {}-dimensional model",
                r.len(),
                self.dim()
            )));
        }
        Ok(())
    }

    pub fn background(&self, r: &[f64]) -> f64 {
        match self.h0 {
            Background::Constant(c) => c,
            Background::Quadratic { c, k } => {
                let d = sub(r, &self.r0);
                c + k * dot(&d, &d)
            }
        }
    }

    /// `(h0, x, z)` coefficients of `I`, `X`, `Z` at `r`.
    fn components(&self, r: &[f64]) -> (f64, f64, f64) {
        let d = sub(r, &self.r0);
        (self.background(r), self.hx * dot(&d, &self.rx), self.hz * dot(&d, &self.rz))
    }

    pub fn matrix(&self, r: &[f64]) -> Result<Matrix2<f64>> {
        self.check(r)?;
        let (h0, x, z) = self.components(r);
        Ok(Matrix2::new(h0 + z, x, x, h0 - z))
    }
}

/// `(E_-, E_+)` in closed form.
pub fn cone_energies(model: &ConeModel, r: &[f64]) -> Result<(f64, f64)> {
    model.check(r)?;
    let (h0, x, z) = model.components(r);
    let s = x.hypot(z);
    Ok((h0 - s, h0 + s))
}

/// Eigenvalues of the explicit 2x2 matrix, ascending.
pub fn cone_energies_dense(model: &ConeModel, r: &[f64]) -> Result<(f64, f64)> {
    let e = SymmetricEigen::new(model.matrix(r)?).eigenvalues;
    Ok((e.min(), e.max()))
}

/// `V(R) = V0 I + VX X + VZ Z`, linearized at `origin`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearPerturbation {
    pub origin: Vec<f64>,
    pub v0: f64,
    pub vx: f64,
    pub vz: f64,
    pub grad_v0: Vec<f64>,
    pub grad_vx: Vec<f64>,
    pub grad_vz: Vec<f64>,
}

impl LinearPerturbation {
    pub fn zero(origin: Vec<f64>) -> Self {
        let n = origin.len();
        LinearPerturbation {
            origin,
            v0: 0.0,
            vx: 0.0,
            vz: 0.0,
            grad_v0: vec![0.0; n],
            grad_vx: vec![0.0; n],
            grad_vz: vec![0.0; n],
        }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.origin.len();
        if [&self.grad_v0, &self.grad_vx, &self.grad_vz].iter().any(|g| g.len() != n) {
            return Err(Error::Dimension("perturbation gradients differ in dimension".into()));
        }
        let finite = [self.v0, self.vx, self.vz]
            .iter()
            .chain(&self.grad_v0)
            .chain(&self.grad_vx)
            .chain(&self.grad_vz)
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::Invalid("perturbation has non-finite entries".into()));
        }
        Ok(())
    }

    /// `(V0, VX, VZ)` at `r`.
    pub fn values(&self, r: &[f64]) -> (f64, f64, f64) {
        let d = sub(r, &self.origin);
        (
            self.v0 + dot(&self.grad_v0, &d),
            self.vx + dot(&self.grad_vx, &d),
            self.vz + dot(&self.grad_vz, &d),
        )
    }

    /// Same perturbation linearized at a different point.
    pub fn rebased(&self, origin: &[f64]) -> Self {
        let (v0, vx, vz) = self.values(origin);
        LinearPerturbation {
            origin: origin.to_vec(),
            v0,
            vx,
            vz,
            ..self.clone()
        }
    }

    pub fn sum(&self, other: &LinearPerturbation) -> Self {
        let o = other.rebased(&self.origin);
        let add = |a: &[f64], b: &[f64]| -> Vec<f64> { a.iter().zip(b).map(|(x, y)| x + y).collect() };
        LinearPerturbation {
            origin: self.origin.clone(),
            v0: self.v0 + o.v0,
            vx: self.vx + o.vx,
            vz: self.vz + o.vz,
            grad_v0: add(&self.grad_v0, &o.grad_v0),
            grad_vx: add(&self.grad_vx, &o.grad_vx),
            grad_vz: add(&self.grad_vz, &o.grad_vz),
        }
    }
}

/// Eigenvalues of `H(R) + V(R)`, ascending.
pub fn perturbed_energies(model: &ConeModel, pert: &LinearPerturbation, r: &[f64]) -> Result<(f64, f64)> {
    model.check(r)?;
    let (h0, x, z) = model.components(r);
    let (v0, vx, vz) = pert.values(r);
    let s = (x + vx).hypot(z + vz);
    Ok((h0 + v0 - s, h0 + v0 + s))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShiftedApex {
    /// Minimum-norm solution of the two linear conditions.
    pub r0: Vec<f64>,
    /// Same point from the projection formula.
    pub r0_closed_form: Vec<f64>,
    /// Off-diagonal part of the perturbed model as a cone around the new
    /// apex; the background is carried over unchanged.
    pub model: ConeModel,
}

/// New degeneracy point of `model + pert`.
pub fn shifted_degeneracy(model: &ConeModel, pert: &LinearPerturbation) -> Result<ShiftedApex> {
    model.validate()?;
    pert.validate()?;
    if pert.origin.len() != model.dim() {
        return Err(Error::Dimension("perturbation and model differ in dimension".into()));
    }
    let p = pert.rebased(&model.r0);
    // a = hx' Rx', b = hz' Rz'.
    let a: Vec<f64> = model.rx.iter().zip(&p.grad_vx).map(|(r, g)| model.hx * r + g).collect();
    let b: Vec<f64> = model.rz.iter().zip(&p.grad_vz).map(|(r, g)| model.hz * r + g).collect();
    let (aa, bb, ab) = (dot(&a, &a), dot(&b, &b), dot(&a, &b));
    let det = aa * bb - ab * ab;
    if !(det > 1e-12 * aa * bb) || aa == 0.0 || bb == 0.0 {
        return Err(Error::Numerical(
            "perturbed coupling vectors are linearly dependent; no conical structure".into(),
        ));
    }

    // Solve the 2x2 Gram system for d = alpha a + beta b.
    let alpha = (-p.vx * bb + p.vz * ab) / det;
    let beta = (-p.vz * aa + p.vx * ab) / det;
    let r0: Vec<f64> = (0..model.dim())
        .map(|i| model.r0[i] + alpha * a[i] + beta * b[i])
        .collect();

    // Projection form: d = -(VX/|a|^2) a + gamma b_perp.
    let gamma = (p.vx * ab - p.vz * aa) / det;
    let r0_closed_form: Vec<f64> = (0..model.dim())
        .map(|i| {
            let b_perp = b[i] - ab / aa * a[i];
            model.r0[i] - p.vx / aa * a[i] + gamma * b_perp
        })
        .collect();

    let (na, nb) = (aa.sqrt(), bb.sqrt());
    let shifted = ConeModel {
        r0: r0.clone(),
        rx: a.iter().map(|v| v / na).collect(),
        rz: b.iter().map(|v| v / nb).collect(),
        hx: na,
        hz: nb,
        h0: model.h0,
    };
    Ok(ShiftedApex {
        r0,
        r0_closed_form,
        model: shifted,
    })
}

/// Three levels: the cone pair `E0 <= E1` and `E2 = E1 + delta + k |R-R0|^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct ThreeLevelSpec {
    pub cone: ConeModel,
    pub delta: f64,
    pub curvature: f64,
}

#[derive(Debug, Clone)]
pub struct ProjectionDemo {
    spec: ThreeLevelSpec,
}

impl ProjectionDemo {
    pub fn levels(&self, r: &[f64]) -> Result<(f64, f64, f64)> {
        let (e0, e1) = cone_energies(&self.spec.cone, r)?;
        let d = sub(r, &self.spec.cone.r0);
        Ok((e0, e1, e1 + self.spec.delta + self.spec.curvature * dot(&d, &d)))
    }

    /// `E_Phi - E0` for `|Phi> = a1 |Psi1> + a2 |Psi2>`, `|a1|^2 = 1 - |a2|^2`.
    pub fn gap(&self, r: &[f64], a2: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&(a2 * a2)) {
            return Err(Error::Invalid(format!("mixing amplitude {a2} exceeds 1")));
        }
        let (e0, e1, e2) = self.levels(r)?;
        let w2 = a2 * a2;
        Ok((1.0 - w2) * e1 + w2 * e2 - e0)
    }
}

pub fn projection_gap_demo(spec: ThreeLevelSpec) -> Result<ProjectionDemo> {
    spec.cone.validate()?;
    if !(spec.delta > 0.0) || spec.curvature < 0.0 {
        return Err(Error::Invalid(
            "third level must lie strictly above the cone everywhere (delta > 0, curvature >= 0)".into(),
        ));
    }
    Ok(ProjectionDemo { spec })
}

/// CSV rows `x,y,e_minus,e_plus` over a square grid of a 2-D model.
pub fn cone_grid_csv(model: &ConeModel, half_width: f64, steps: usize) -> Result<String> {
    if model.dim() != 2 {
        return Err(Error::Dimension("grid output needs a 2-dimensional model".into()));
    }
    let steps = steps.max(2);
    let mut s = String::from("x,y,e_minus,e_plus\n");
    for i in 0..steps {
        for j in 0..steps {
            let f = |k: usize| -half_width + 2.0 * half_width * k as f64 / (steps - 1) as f64;
            let r = [model.r0[0] + f(i), model.r0[1] + f(j)];
            let (em, ep) = cone_energies(model, &r)?;
            s.push_str(&format!("{:.10},{:.10},{:.12},{:.12}\n", r[0], r[1], em, ep));
        }
    }
    Ok(s)
}
