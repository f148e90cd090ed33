//! Small dense helpers shared by the physics modules.

use nalgebra::{Complex, Matrix2, Matrix4, SymmetricEigen};

pub type C64 = Complex<f64>;
pub type CMat2 = Matrix2<C64>;
pub type CMat4 = Matrix4<C64>;
pub type RMat4 = Matrix4<f64>;

pub const I: C64 = C64::new(0.0, 1.0);

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[inline]
pub fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

pub fn frobenius(m: &CMat4) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Largest |Θ − Θ†| entry.
pub fn hermiticity_defect(m: &CMat4) -> f64 {
    let diff = m - m.adjoint();
    diff.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn hermitize(m: &CMat4) -> CMat4 {
    (m + m.adjoint()) * re(0.5)
}

/// Eigenvalues of a Hermitian 4×4 matrix in ascending order.
pub fn hermitian_eigenvalues(m: &CMat4) -> [f64; 4] {
    let eig = SymmetricEigen::new(hermitize(m));
    let mut out = [0.0; 4];
    for (o, v) in out.iter_mut().zip(eig.eigenvalues.iter()) {
        *o = *v;
    }
    out.sort_by(f64::total_cmp);
    out
}

pub fn max_abs_diff(a: &CMat4, b: &CMat4) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn to_complex(m: &RMat4) -> CMat4 {
    m.map(re)
}
