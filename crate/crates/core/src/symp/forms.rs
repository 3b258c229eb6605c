//! Pointwise 2-forms on R⁴ = C² with coordinates (x1, y1, x2, y2), and the
//! radial forms of the local model near a fixed surface.

use nalgebra::Matrix4;
use serde::{Deserialize, Serialize};

use super::profiles::{f_root, RadialProfile};
use crate::error::{Error, Result};
use crate::unitary::standard_j;

pub type Point = [f64; 4];

const PAIRS: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

/// A 2-form at a point, stored as its upper triangle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Form2At {
    pub point: Point,
    upper: [f64; 6],
}

impl Form2At {
    pub fn zero(point: Point) -> Self {
        Form2At { point, upper: [0.0; 6] }
    }

    /// Reads only the strict upper triangle of `m`.
    pub fn from_matrix(point: Point, m: &Matrix4<f64>) -> Self {
        let mut upper = [0.0; 6];
        for (k, &(i, j)) in PAIRS.iter().enumerate() {
            upper[k] = m[(i, j)];
        }
        Form2At { point, upper }
    }

    pub fn component(&self, i: usize, j: usize) -> f64 {
        if i == j {
            return 0.0;
        }
        let (a, b, s) = if i < j { (i, j, 1.0) } else { (j, i, -1.0) };
        let k = PAIRS.iter().position(|&p| p == (a, b)).unwrap();
        s * self.upper[k]
    }

    /// Adds c·(dx_i ∧ dx_j).
    pub fn add_pair(&mut self, i: usize, j: usize, c: f64) {
        if i == j {
            return;
        }
        let (a, b, s) = if i < j { (i, j, 1.0) } else { (j, i, -1.0) };
        let k = PAIRS.iter().position(|&p| p == (a, b)).unwrap();
        self.upper[k] += s * c;
    }

    pub fn matrix(&self) -> Matrix4<f64> {
        let mut m = Matrix4::zeros();
        for (k, &(i, j)) in PAIRS.iter().enumerate() {
            m[(i, j)] = self.upper[k];
            m[(j, i)] = -self.upper[k];
        }
        m
    }

    pub fn add(&self, other: &Form2At) -> Form2At {
        let mut upper = self.upper;
        for (u, o) in upper.iter_mut().zip(other.upper.iter()) {
            *u += o;
        }
        Form2At { point: self.point, upper }
    }

    pub fn scale(&self, c: f64) -> Form2At {
        Form2At { point: self.point, upper: self.upper.map(|u| u * c) }
    }

    pub fn max_abs(&self) -> f64 {
        self.upper.iter().fold(0.0, |m, u| m.max(u.abs()))
    }

    pub fn max_abs_diff(&self, other: &Form2At) -> f64 {
        self.upper.iter().zip(other.upper.iter()).fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    /// Largest singular value of the antisymmetric matrix.
    pub fn operator_norm(&self) -> f64 {
        let m = self.matrix();
        (m.transpose() * m).symmetric_eigenvalues().max().max(0.0).sqrt()
    }
}

impl Serialize for Form2At {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let m = self.matrix();
        let rows: Vec<[f64; 4]> = (0..4).map(|i| [m[(i, 0)], m[(i, 1)], m[(i, 2)], m[(i, 3)]]).collect();
        let mut st = s.serialize_struct("Form2At", 2)?;
        st.serialize_field("point", &self.point)?;
        st.serialize_field("matrix", &rows)?;
        st.end()
    }
}

/// α ∧ β for 1-forms given by coefficient vectors.
pub fn wedge(point: Point, alpha: &[f64; 4], beta: &[f64; 4]) -> Form2At {
    let mut f = Form2At::zero(point);
    for (k, &(i, j)) in PAIRS.iter().enumerate() {
        f.upper[k] = alpha[i] * beta[j] - alpha[j] * beta[i];
    }
    f
}

/// Largest component of dω, using sixth-order central differences with
/// step h for the partial derivatives.
pub fn exterior_derivative_fd<F>(omega: &F, p: &Point, h: f64) -> Result<f64>
where
    F: Fn(&Point) -> Result<Form2At> + ?Sized,
{
    let mut partial = Vec::with_capacity(4);
    for k in 0..4 {
        let at = |d: f64| -> Result<Matrix4<f64>> {
            let mut q = *p;
            q[k] += d;
            Ok(omega(&q)?.matrix())
        };
        let d1 = at(h)? - at(-h)?;
        let d2 = at(2.0 * h)? - at(-2.0 * h)?;
        let d3 = at(3.0 * h)? - at(-3.0 * h)?;
        partial.push((d1 * 45.0 - d2 * 9.0 + d3) / (60.0 * h));
    }
    let mut worst: f64 = 0.0;
    for i in 0..4 {
        for j in (i + 1)..4 {
            for k in (j + 1)..4 {
                let v = partial[i][(j, k)] - partial[j][(i, k)] + partial[k][(i, j)];
                worst = worst.max(v.abs());
            }
        }
    }
    Ok(worst)
}

/// d of a 1-form field by central differences.
pub fn d_one_form_fd<F>(beta: &F, p: &Point, h: f64) -> Form2At
where
    F: Fn(&Point) -> [f64; 4] + ?Sized,
{
    let mut grads = [[0.0; 4]; 4];
    for k in 0..4 {
        let mut plus = *p;
        let mut minus = *p;
        plus[k] += h;
        minus[k] -= h;
        let (a, b) = (beta(&plus), beta(&minus));
        for j in 0..4 {
            grads[k][j] = (a[j] - b[j]) / (2.0 * h);
        }
    }
    let mut f = Form2At::zero(*p);
    for (n, &(i, j)) in PAIRS.iter().enumerate() {
        f.upper[n] = grads[i][j] - grads[j][i];
    }
    f
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Radii {
    pub delta0: f64,
    pub delta2: f64,
    pub eps_p: f64,
    pub eps0: f64,
}

impl Default for Radii {
    fn default() -> Self {
        Radii { delta0: 1.0, delta2: 0.3, eps_p: 0.5, eps0: 1.0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Base {
    FlatDisc { radius: f64 },
    FlatTorus { period: f64 },
}

/// ν = (c1 + l11 x + l12 y) dx + (c2 + l21 x + l22 y) dy on the base.
/// The curvature of η = dθ + ν is then κ = l21 − l12.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize, Default)]
pub struct Connection {
    #[serde(default)]
    pub constant: [f64; 2],
    #[serde(default)]
    pub linear: [[f64; 2]; 2],
    pub kappa: f64,
}

impl Connection {
    /// Symmetric gauge with curvature κ.
    pub fn symmetric(kappa: f64) -> Self {
        Connection { constant: [0.0; 2], linear: [[0.0, -0.5 * kappa], [0.5 * kappa, 0.0]], kappa }
    }

    pub fn nu(&self, x: f64, y: f64) -> [f64; 2] {
        let l = &self.linear;
        [self.constant[0] + l[0][0] * x + l[0][1] * y, self.constant[1] + l[1][0] * x + l[1][1] * y]
    }

    pub fn scaled(&self, c: f64) -> Self {
        Connection {
            constant: self.constant.map(|v| c * v),
            linear: self.linear.map(|r| r.map(|v| c * v)),
            kappa: c * self.kappa,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalModel {
    pub m: u32,
    pub a: f64,
    #[serde(default)]
    pub radii: Radii,
    pub base: Base,
    #[serde(default)]
    pub connection: Connection,
}

impl LocalModel {
    pub fn new(m: u32, a: f64, radii: Radii, base: Base, connection: Connection) -> Result<Self> {
        let model = LocalModel { m, a, radii, base, connection };
        model.validate()?;
        Ok(model)
    }

    pub fn flat(m: u32, a: f64) -> Self {
        LocalModel {
            m,
            a,
            radii: Radii::default(),
            base: Base::FlatDisc { radius: 1.0 },
            connection: Connection::default(),
        }
    }

    pub fn curved(m: u32, a: f64, kappa: f64) -> Self {
        LocalModel { connection: Connection::symmetric(kappa), ..Self::flat(m, a) }
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 {
            return Err(Error::InvalidSpec("isotropy order must be positive".into()));
        }
        if !(self.a >= 0.0) || !self.a.is_finite() {
            return Err(Error::InvalidSpec("smoothing parameter must be finite and ≥ 0".into()));
        }
        let r = &self.radii;
        if !(r.delta2 > 0.0 && r.delta0 > 3.0 * r.delta2) {
            return Err(Error::InvalidSpec("radii must satisfy δ₀ > 3δ₂ > 0".into()));
        }
        match self.base {
            Base::FlatDisc { radius } if !(radius > 0.0) => {
                return Err(Error::InvalidSpec("base radius must be positive".into()))
            }
            Base::FlatTorus { period } if !(period > 0.0) => {
                return Err(Error::InvalidSpec("torus period must be positive".into()))
            }
            _ => {}
        }
        let c = &self.connection;
        if (c.linear[1][0] - c.linear[0][1] - c.kappa).abs() > 1e-12 * (1.0 + c.kappa.abs()) {
            return Err(Error::InvalidSpec("κ does not match dν".into()));
        }
        Ok(())
    }

    pub fn contains(&self, p: &Point) -> bool {
        let base_ok = match self.base {
            Base::FlatDisc { radius } => p[0].hypot(p[1]) <= radius,
            Base::FlatTorus { .. } => true,
        };
        base_ok && p[2].hypot(p[3]) <= self.radii.delta0 && p.iter().all(|v| v.is_finite())
    }

    fn check(&self, p: &Point) -> Result<()> {
        if !self.contains(p) {
            return Err(Error::OutOfDomain(format!("{p:?} lies outside the model neighbourhood")));
        }
        Ok(())
    }

    pub fn base_radius(&self) -> f64 {
        match self.base {
            Base::FlatDisc { radius } => radius,
            Base::FlatTorus { period } => 0.5 * period,
        }
    }
}

/// ω_S + ½ψ(x)κ dA + ψ′(x)(dx2∧dy2 + (x2dx2 + y2dy2)∧ν) with x = |w|²,
/// the general rotation-invariant closed form built from ψ = xφ′(x).
pub fn radial_form(model: &LocalModel, p: &Point, psi: f64, dpsi: f64) -> Form2At {
    let c = &model.connection;
    let nu = c.nu(p[0], p[1]);
    let mut f = Form2At::zero(*p);
    f.add_pair(0, 1, 1.0 + 0.5 * psi * c.kappa);
    f.add_pair(2, 3, dpsi);
    let rdr = [0.0, 0.0, p[2], p[3]];
    let nu_form = [nu[0], nu[1], 0.0, 0.0];
    f.add(&wedge(*p, &rdr, &nu_form).scale(dpsi))
}

pub fn eval_omega0(model: &LocalModel, p: &Point) -> Result<Form2At> {
    model.check(p)?;
    let x = p[2] * p[2] + p[3] * p[3];
    Ok(radial_form(model, p, x, 1.0))
}

fn profile_form(model: &LocalModel, p: &Point, phi: (f64, f64, f64)) -> Form2At {
    let x = p[2] * p[2] + p[3] * p[3];
    let (_, d1, d2) = phi;
    radial_form(model, p, x * d1, d1 + x * d2)
}

pub fn eval_omega_a(model: &LocalModel, p: &Point) -> Result<Form2At> {
    model.check(p)?;
    let x = p[2] * p[2] + p[3] * p[3];
    if x == 0.0 && model.a == 0.0 && model.m > 1 {
        return Err(Error::OutOfDomain("ω_a is singular on the surface when a = 0 and m > 1".into()));
    }
    Ok(profile_form(model, p, f_root(model.m, model.a, x)))
}

/// ω_a near the surface, ω⁰ beyond 2δ₂, interpolated by the bump on |w|.
pub fn eval_omega_a_glued(model: &LocalModel, p: &Point) -> Result<Form2At> {
    model.check(p)?;
    let x = p[2] * p[2] + p[3] * p[3];
    if x == 0.0 && model.a == 0.0 && model.m > 1 {
        return Err(Error::OutOfDomain("ω_a is singular on the surface when a = 0 and m > 1".into()));
    }
    let prof = RadialProfile::Glued { m: model.m, a: model.a, delta2: model.radii.delta2 };
    Ok(profile_form(model, p, prof.eval(x)))
}

/// Almost complex structure sending the horizontal lifts ∂x1 − ν₁∂θ to
/// ∂y1 − ν₂∂θ and ∂x2 to ∂y2, where ∂θ = −y2∂x2 + x2∂y2.
pub fn model_acs(model: &LocalModel, p: &Point) -> Matrix4<f64> {
    let nu = model.connection.nu(p[0], p[1]);
    if nu == [0.0, 0.0] {
        return standard_j();
    }
    let theta = [0.0, 0.0, -p[3], p[2]];
    let mut frame = Matrix4::<f64>::identity();
    for r in 0..4 {
        frame[(r, 0)] -= nu[0] * theta[r];
        frame[(r, 1)] -= nu[1] * theta[r];
    }
    let inv = frame.try_inverse().expect("horizontal frame is unipotent");
    frame * standard_j() * inv
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn storage_is_antisymmetric() {
        let mut f = Form2At::zero([0.0; 4]);
        f.add_pair(3, 1, 2.0);
        assert_eq!(f.component(1, 3), -2.0);
        let m = f.matrix();
        assert_eq!(m, -m.transpose());
        assert_eq!(Form2At::from_matrix(f.point, &m), f);
    }

    #[test]
    fn flat_omega0_is_standard() {
        let model = LocalModel::flat(2, 0.0);
        let p = [0.3, -0.2, 0.1, 0.25];
        let f = eval_omega0(&model, &p).unwrap();
        let mut std = Form2At::zero(p);
        std.add_pair(0, 1, 1.0);
        std.add_pair(2, 3, 1.0);
        assert_eq!(f, std);
    }

    #[test]
    fn curved_base_term() {
        let model = LocalModel::curved(2, 0.0, 1.0);
        let f = eval_omega0(&model, &[0.0, 0.0, 0.3, 0.0]).unwrap();
        assert!(close(f.component(0, 1), 1.0 + 0.5 * 0.09, 1e-15));
        let g = eval_omega0(&model, &[0.2, 0.1, 0.0, 0.0]).unwrap();
        assert_eq!(g.component(0, 1), 1.0);
        assert_eq!(g.component(2, 3), 1.0);
    }

    #[test]
    fn omega_a_reduces_to_omega0() {
        let model = LocalModel::curved(1, 0.0, 0.7);
        for k in 0..20 {
            let t = k as f64 * 0.37;
            let p = [0.5 * t.sin(), 0.4 * t.cos(), 0.3 * (2.0 * t).sin(), 0.2 * (3.0 * t).cos()];
            let a = eval_omega_a(&model, &p).unwrap();
            let b = eval_omega0(&model, &p).unwrap();
            assert!(a.max_abs_diff(&b) <= 1e-12);
        }
    }

    #[test]
    fn singular_surface_rejected() {
        let model = LocalModel::flat(2, 0.0);
        assert!(matches!(eval_omega_a(&model, &[0.0; 4]), Err(Error::OutOfDomain(_))));
        assert!(eval_omega_a(&LocalModel::flat(2, 0.1), &[0.0; 4]).is_ok());
        assert!(eval_omega0(&model, &[2.0, 0.0, 0.0, 0.0]).is_err());
    }

    #[test]
    fn forms_are_closed() {
        let model = LocalModel::curved(3, 0.1, 0.8);
        let p = [0.1, -0.2, 0.07, 0.05];
        let ev0 = |q: &Point| eval_omega0(&model, q);
        let eva = |q: &Point| eval_omega_a(&model, q);
        let evg = |q: &Point| eval_omega_a_glued(&model, q);
        assert!(exterior_derivative_fd(&ev0, &p, 1e-3).unwrap() < 1e-6);
        assert!(exterior_derivative_fd(&eva, &p, 1e-3).unwrap() < 1e-5);
        for h in [1e-3, 5e-4] {
            assert!(exterior_derivative_fd(&evg, &[0.1, 0.0, 0.35, 0.2], h).unwrap() < 1e-5);
        }
    }

    #[test]
    fn acs_squares_to_minus_identity() {
        let model = LocalModel::curved(2, 0.1, 1.3);
        let j = model_acs(&model, &[0.3, 0.2, 0.1, -0.05]);
        assert!((j * j + Matrix4::identity()).abs().max() < 1e-12);
    }

    #[test]
    fn wedge_of_coordinates() {
        let f = wedge([0.0; 4], &[1.0, 0.0, 0.0, 0.0], &[0.0, 1.0, 0.0, 0.0]);
        assert_eq!(f.component(0, 1), 1.0);
        assert!(close(f.operator_norm(), 1.0, 1e-12));
    }
}
