//! Exact 2×2 matrices over cyclotomic fields, their realification to R⁴, and
//! the linear algebra around compatible almost complex structures.
//!
//! Real coordinates are ordered (x1, y1, x2, y2) with z = x1 + i y1 and
//! w = x2 + i y2.

use nalgebra::{Matrix2, Matrix4, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cyclotomic::{lcm, CyclotomicScalar, ScalarKey};
use crate::error::{Error, Result};

/// Tolerance for floating point structural checks (symplectic, symmetric).
pub const STRUCT_TOL: f64 = 1e-10;
/// Eigenvalues below this are treated as singular.
pub const SINGULAR_TOL: f64 = 1e-12;

/// A 2×2 matrix over Q(ζ_N), stored row-major.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mat2 {
    pub e: [[CyclotomicScalar; 2]; 2],
}

impl Mat2 {
    pub fn new(a: CyclotomicScalar, b: CyclotomicScalar, c: CyclotomicScalar, d: CyclotomicScalar) -> Self {
        Mat2 { e: [[a, b], [c, d]] }
    }

    pub fn identity(n: u32) -> Self {
        Self::diag(CyclotomicScalar::one(n), CyclotomicScalar::one(n))
    }

    pub fn diag(a: CyclotomicScalar, d: CyclotomicScalar) -> Self {
        let n = lcm(a.conductor(), d.conductor());
        Self::new(a, CyclotomicScalar::zero(n), CyclotomicScalar::zero(n), d)
    }

    /// diag(ζ_N^j, ζ_N^k).
    pub fn diag_roots(n: u32, j: i64, k: i64) -> Self {
        Self::diag(
            CyclotomicScalar::root_of_unity(n, j),
            CyclotomicScalar::root_of_unity(n, k),
        )
    }

    pub fn conductor(&self) -> u32 {
        self.e
            .iter()
            .flatten()
            .fold(1, |acc, s| lcm(acc, s.conductor()))
    }

    /// All entries re-expressed over Q(ζ_L).
    pub fn lift(&self, target: u32) -> Result<Self> {
        let [[a, b], [c, d]] = &self.e;
        Ok(Self::new(a.lift(target)?, b.lift(target)?, c.lift(target)?, d.lift(target)?))
    }

    pub fn mul(&self, o: &Mat2) -> Mat2 {
        let a = &self.e;
        let b = &o.e;
        let entry = |i: usize, j: usize| &(&a[i][0] * &b[0][j]) + &(&a[i][1] * &b[1][j]);
        Mat2::new(entry(0, 0), entry(0, 1), entry(1, 0), entry(1, 1))
    }

    pub fn sub(&self, o: &Mat2) -> Mat2 {
        let f = |i: usize, j: usize| &self.e[i][j] - &o.e[i][j];
        Mat2::new(f(0, 0), f(0, 1), f(1, 0), f(1, 1))
    }

    pub fn scale(&self, s: &CyclotomicScalar) -> Mat2 {
        let f = |i: usize, j: usize| &self.e[i][j] * s;
        Mat2::new(f(0, 0), f(0, 1), f(1, 0), f(1, 1))
    }

    pub fn det(&self) -> CyclotomicScalar {
        &(&self.e[0][0] * &self.e[1][1]) - &(&self.e[0][1] * &self.e[1][0])
    }

    pub fn trace(&self) -> CyclotomicScalar {
        &self.e[0][0] + &self.e[1][1]
    }

    pub fn conj_transpose(&self) -> Mat2 {
        let [[a, b], [c, d]] = &self.e;
        Mat2::new(a.conj(), c.conj(), b.conj(), d.conj())
    }

    pub fn inverse(&self) -> Option<Mat2> {
        let di = self.det().inverse()?;
        let [[a, b], [c, d]] = &self.e;
        Some(Mat2::new(&d.clone() * &di, &(-b) * &di, &(-c) * &di, a * &di))
    }

    pub fn is_identity(&self) -> bool {
        self.e[0][0].is_one() && self.e[1][1].is_one() && self.e[0][1].is_zero() && self.e[1][0].is_zero()
    }

    pub fn is_diagonal(&self) -> bool {
        self.e[0][1].is_zero() && self.e[1][0].is_zero()
    }

    pub fn is_scalar(&self) -> bool {
        self.is_diagonal() && self.e[0][0] == self.e[1][1]
    }

    pub fn is_unitary(&self) -> bool {
        self.mul(&self.conj_transpose()).is_identity()
    }

    pub fn key(&self) -> Vec<ScalarKey> {
        self.e.iter().flatten().map(|s| s.key()).collect()
    }

    /// Image of the column vector (x, y).
    pub fn apply(&self, v: &[CyclotomicScalar; 2]) -> [CyclotomicScalar; 2] {
        [
            &(&self.e[0][0] * &v[0]) + &(&self.e[0][1] * &v[1]),
            &(&self.e[1][0] * &v[0]) + &(&self.e[1][1] * &v[1]),
        ]
    }

    pub fn to_complex(&self) -> Matrix2<Complex64> {
        Matrix2::from_fn(|i, j| self.e[i][j].to_complex())
    }
}

/// A unitary 2×2 matrix with exact entries.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct UMat2(Mat2);

impl UMat2 {
    pub fn new(m: Mat2) -> Result<Self> {
        if m.is_unitary() {
            Ok(UMat2(m))
        } else {
            Err(Error::NotUnitary)
        }
    }

    pub fn identity(n: u32) -> Self {
        UMat2(Mat2::identity(n))
    }

    pub fn mat(&self) -> &Mat2 {
        &self.0
    }

    pub fn mul(&self, o: &UMat2) -> UMat2 {
        UMat2(self.0.mul(&o.0))
    }

    pub fn inverse(&self) -> UMat2 {
        UMat2(self.0.conj_transpose())
    }

    pub fn lift(&self, n: u32) -> Result<UMat2> {
        Ok(UMat2(self.0.lift(n)?))
    }
}

impl<'de> Deserialize<'de> for UMat2 {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let m = Mat2::deserialize(d)?;
        UMat2::new(m).map_err(serde::de::Error::custom)
    }
}

/// Realification of a complex matrix: a + ib becomes [[a, -b], [b, a]].
pub fn realify_complex(m: &Matrix2<Complex64>) -> Matrix4<f64> {
    let mut out = Matrix4::zeros();
    for i in 0..2 {
        for j in 0..2 {
            let c = m[(i, j)];
            out[(2 * i, 2 * j)] = c.re;
            out[(2 * i, 2 * j + 1)] = -c.im;
            out[(2 * i + 1, 2 * j)] = c.im;
            out[(2 * i + 1, 2 * j + 1)] = c.re;
        }
    }
    out
}

pub fn realify(u: &UMat2) -> Matrix4<f64> {
    realify_complex(&u.0.to_complex())
}

/// The standard symplectic form dx1∧dy1 + dx2∧dy2 as a matrix.
pub fn standard_omega() -> Matrix4<f64> {
    let mut m = Matrix4::zeros();
    m[(0, 1)] = 1.0;
    m[(1, 0)] = -1.0;
    m[(2, 3)] = 1.0;
    m[(3, 2)] = -1.0;
    m
}

/// Multiplication by i in real coordinates.
pub fn standard_j() -> Matrix4<f64> {
    realify_complex(&Matrix2::from_diagonal_element(Complex64::new(0.0, 1.0)))
}

fn max_abs(m: &Matrix4<f64>) -> f64 {
    m.iter().fold(0.0f64, |a, x| a.max(x.abs()))
}

/// A real 4×4 matrix preserving the standard symplectic form.
#[derive(Clone, Debug, PartialEq)]
pub struct SympMat4(Matrix4<f64>);

impl SympMat4 {
    pub fn new(m: Matrix4<f64>) -> Result<Self> {
        let w = standard_omega();
        let residual = max_abs(&(m.transpose() * w * m - w));
        if residual <= STRUCT_TOL * (1.0 + max_abs(&m).powi(2)) {
            Ok(SympMat4(m))
        } else {
            Err(Error::NotSymplectic { residual })
        }
    }

    pub fn matrix(&self) -> &Matrix4<f64> {
        &self.0
    }
}

fn check_symmetric(s: &Matrix4<f64>) -> Result<()> {
    let asymmetry = max_abs(&(s - s.transpose()));
    if asymmetry > STRUCT_TOL * (1.0 + max_abs(s)) {
        return Err(Error::NotSymmetric { asymmetry });
    }
    Ok(())
}

fn spectral_power(s: &Matrix4<f64>, p: f64) -> Result<Matrix4<f64>> {
    check_symmetric(s)?;
    let sym = (s + s.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let min = eig.eigenvalues.min();
    if min <= SINGULAR_TOL {
        return Err(Error::NearSingular { min_eigenvalue: min });
    }
    let d = Matrix4::from_diagonal(&eig.eigenvalues.map(|l| l.powf(p)));
    Ok(eig.eigenvectors * d * eig.eigenvectors.transpose())
}

/// S^{-1/2} for a symmetric positive definite S.
pub fn matrix_inv_sqrt(s: &Matrix4<f64>) -> Result<Matrix4<f64>> {
    spectral_power(s, -0.5)
}

pub fn matrix_sqrt(s: &Matrix4<f64>) -> Result<Matrix4<f64>> {
    spectral_power(s, 0.5)
}

/// Orthogonal part of the polar decomposition, A (AᵀA)^{-1/2}.
pub fn unitary_retract(a: &SympMat4) -> Result<Matrix4<f64>> {
    let m = a.matrix();
    Ok(m * matrix_inv_sqrt(&(m.transpose() * m))?)
}

/// The almost complex structure determined by a metric G and a symplectic
/// form Ω, through the polar decomposition of G^{-1/2} Ω G^{-1/2}.
pub fn compatible_acs(g: &Matrix4<f64>, omega: &Matrix4<f64>) -> Result<Matrix4<f64>> {
    check_symmetric(g)?;
    let asym = max_abs(&(omega + omega.transpose()));
    if asym > STRUCT_TOL * (1.0 + max_abs(omega)) {
        return Err(Error::Precondition("Ω is not antisymmetric".into()));
    }
    let det = omega.determinant();
    if det.abs() <= SINGULAR_TOL {
        return Err(Error::DegenerateForm { det });
    }
    let is = matrix_inv_sqrt(g)?;
    let s = matrix_sqrt(g)?;
    let b = -(is * omega * is);
    let pol = b * matrix_inv_sqrt(&(b.transpose() * b))?;
    Ok(is * pol * s)
}

/// Checks that the retraction intertwines the unitary pair (a, c) whenever
/// a·B = B·c holds. Returns the residual of r(B)·c = a·r(B).
pub fn retract_equivariance_check(a: &UMat2, c: &UMat2, b: &SympMat4) -> Result<f64> {
    let ra = realify(a);
    let rc = realify(c);
    let bm = b.matrix();
    let pre = max_abs(&(ra * bm - bm * rc));
    let scale = 1.0 + max_abs(bm);
    if pre > STRUCT_TOL * scale {
        return Err(Error::Precondition(format!(
            "a·B ≠ B·c (residual {pre:.3e})"
        )));
    }
    let r = unitary_retract(b)?;
    Ok(max_abs(&(r * rc - ra * r)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &Matrix4<f64>, b: &Matrix4<f64>, tol: f64) -> bool {
        (a - b).iter().all(|x| x.abs() <= tol)
    }

    fn s(n: u32, k: i64) -> CyclotomicScalar {
        CyclotomicScalar::root_of_unity(n, k)
    }

    #[test]
    fn omega_j_identity() {
        let w = standard_omega();
        let j = standard_j();
        assert!(close(&(w * j), &Matrix4::identity(), 0.0));
        assert!(close(&(j * j), &(-Matrix4::identity()), 0.0));
    }

    #[test]
    fn rotation_matrix_realifies_to_orthogonal() {
        let h = CyclotomicScalar::sqrt2().inverse().unwrap();
        let m = Mat2::new(h.clone(), h.clone(), -&h, h);
        let u = UMat2::new(m).unwrap();
        let r = realify(&u);
        assert!(close(&(r.transpose() * r), &Matrix4::identity(), 1e-14));
        assert!(SympMat4::new(r).is_ok());
    }

    #[test]
    fn realify_is_multiplicative() {
        let a = UMat2::new(Mat2::diag_roots(8, 1, 3)).unwrap();
        let h = CyclotomicScalar::sqrt2().inverse().unwrap();
        let b = UMat2::new(Mat2::new(h.clone(), &h * &s(8, 2), &h * &s(8, 2), h)).unwrap();
        let lhs = realify(&a.mul(&b));
        let rhs = realify(&a) * realify(&b);
        assert!(close(&lhs, &rhs, 1e-14));
    }

    #[test]
    fn non_unitary_rejected() {
        let m = Mat2::diag(CyclotomicScalar::from_integer(1, 2), CyclotomicScalar::one(1));
        assert_eq!(UMat2::new(m), Err(Error::NotUnitary));
    }

    #[test]
    fn inverse_sqrt_of_diagonal() {
        let d = Matrix4::from_diagonal(&nalgebra::Vector4::new(4.0, 1.0, 9.0, 16.0));
        let is = matrix_inv_sqrt(&d).unwrap();
        let expect = Matrix4::from_diagonal(&nalgebra::Vector4::new(0.5, 1.0, 1.0 / 3.0, 0.25));
        assert!(close(&is, &expect, 1e-14));
        let sing = Matrix4::from_diagonal(&nalgebra::Vector4::new(1.0, 1.0, 0.0, 1.0));
        assert!(matches!(matrix_inv_sqrt(&sing), Err(Error::NearSingular { .. })));
    }

    #[test]
    fn standard_pair_gives_standard_j() {
        let j = compatible_acs(&Matrix4::identity(), &standard_omega()).unwrap();
        assert!(close(&j, &standard_j(), 1e-14));
    }

    #[test]
    fn degenerate_omega_rejected() {
        let mut w = Matrix4::zeros();
        w[(0, 1)] = 1.0;
        w[(1, 0)] = -1.0;
        assert!(matches!(
            compatible_acs(&Matrix4::identity(), &w),
            Err(Error::DegenerateForm { .. })
        ));
    }

    #[test]
    fn shear_retracts_to_orthogonal_symplectic() {
        let mut m = Matrix4::identity();
        m[(0, 1)] = 0.7;
        let a = SympMat4::new(m).unwrap();
        let r = unitary_retract(&a).unwrap();
        assert!(close(&(r.transpose() * r), &Matrix4::identity(), 1e-12));
        assert!(SympMat4::new(r).is_ok());
    }
}
