//! Small fixed-size helpers for the two-dimensional phase space `(x, p)`.

use nalgebra::{Matrix2, Vector2};

use crate::error::{Error, Result};

pub type Mat2 = Matrix2<f64>;
pub type Vec2 = Vector2<f64>;

/// Levi-Civita symbol with `eps[x][p] = +1`.
pub const LEVI_CIVITA: Mat2 = Matrix2::new(0.0, 1.0, -1.0, 0.0);

const SYMMETRY_TOLERANCE: f64 = 1e-12;

/// Returns `(a + aᵀ)/2` if the asymmetry is below `1e-12` relative to the
/// largest entry, otherwise rejects the matrix.
pub fn symmetrize(a: &Mat2) -> Result<Mat2> {
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter { name: "matrix", reason: "non-finite entry".into() });
    }
    let scale = a.amax().max(f64::MIN_POSITIVE);
    let asymmetry = (a[(0, 1)] - a[(1, 0)]).abs() / scale;
    if asymmetry >= SYMMETRY_TOLERANCE {
        return Err(Error::NotSymmetric { asymmetry });
    }
    Ok((a + a.transpose()) * 0.5)
}

/// Forward free-flight shear `(x, p) -> (x + p t/m, p)`.
pub fn shear(t: f64, m: f64) -> Mat2 {
    Matrix2::new(1.0, t / m, 0.0, 1.0)
}

/// Rotation whose first row is the unit vector at angle `theta`.
pub fn rotation(theta: f64) -> Mat2 {
    let (s, c) = theta.sin_cos();
    Matrix2::new(c, s, -s, c)
}

/// Symmetric 2x2 eigen-decomposition in closed form.
///
/// Returns `(theta, d1, d2)` with `d1 >= d2` and
/// `rotation(theta) * a * rotation(theta)ᵀ = diag(d1, d2)`, where
/// `theta ∈ (-π/2, π/2]`. Degenerate input gives `theta = 0`.
pub fn sym_eigen(a: &Mat2) -> (f64, f64, f64) {
    let (xx, xp, pp) = (a[(0, 0)], 0.5 * (a[(0, 1)] + a[(1, 0)]), a[(1, 1)]);
    let mean = 0.5 * (xx + pp);
    let half_diff = 0.5 * (xx - pp);
    let radius = half_diff.hypot(xp);
    let theta = if radius == 0.0 { 0.0 } else { 0.5 * (2.0 * xp).atan2(xx - pp) };
    (theta, mean + radius, mean - radius)
}
