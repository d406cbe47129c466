//! Small vector helpers shared by every module.

use nalgebra::{Matrix3, Vector3};

pub type Vec3 = Vector3<f64>;

/// Tolerance for unit-length and orthogonality checks.
pub const UNIT_TOL: f64 = 1e-9;

pub fn is_unit(v: &Vec3) -> bool {
    v.iter().all(|c| c.is_finite()) && (v.norm() - 1.0).abs() <= UNIT_TOL
}

pub fn is_finite(v: &Vec3) -> bool {
    v.iter().all(|c| c.is_finite())
}

pub fn vec3(a: [f64; 3]) -> Vec3 {
    Vec3::new(a[0], a[1], a[2])
}

pub fn arr3(v: &Vec3) -> [f64; 3] {
    [v.x, v.y, v.z]
}

/// Unit vector orthogonal to `n`, obtained by projecting the world axis least
/// aligned with `n`. Deterministic for a given `n`.
pub fn any_tangent(n: &Vec3) -> Vec3 {
    let axis = if n.x.abs() <= 0.9 { Vec3::x() } else { Vec3::y() };
    (axis - n * n.dot(&axis)).normalize()
}

/// Orthonormal frame `(u, v, n)` with `n` as the third axis.
pub fn frame_around(n: &Vec3) -> (Vec3, Vec3) {
    let u = any_tangent(n);
    let v = n.cross(&u);
    (u, v)
}

/// Checks that `m` is a proper rotation (orthonormal columns, det +1).
pub fn is_rotation(m: &Matrix3<f64>) -> bool {
    if m.iter().any(|c| !c.is_finite()) {
        return false;
    }
    let should_be_identity = m.transpose() * m;
    (should_be_identity - Matrix3::identity()).amax() <= 1e-9 && (m.determinant() - 1.0).abs() <= 1e-9
}

pub fn mat3(rows: [[f64; 3]; 3]) -> Matrix3<f64> {
    Matrix3::new(
        rows[0][0], rows[0][1], rows[0][2], rows[1][0], rows[1][1], rows[1][2], rows[2][0], rows[2][1], rows[2][2],
    )
}

pub fn rows3(m: &Matrix3<f64>) -> [[f64; 3]; 3] {
    [
        [m[(0, 0)], m[(0, 1)], m[(0, 2)]],
        [m[(1, 0)], m[(1, 1)], m[(1, 2)]],
        [m[(2, 0)], m[(2, 1)], m[(2, 2)]],
    ]
}

/// Angle between two unit vectors, in degrees.
pub fn angle_deg(a: &Vec3, b: &Vec3) -> f64 {
    a.dot(b).clamp(-1.0, 1.0).acos().to_degrees()
}

/// Median of a non-empty slice (mean of the two middle values for even
/// lengths). Returns `None` for an empty slice.
pub fn median(values: &mut [f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(f64::total_cmp);
    let n = values.len();
    Some(if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tangent_is_orthonormal() {
        for n in [Vec3::x(), Vec3::y(), -Vec3::z(), Vec3::new(1.0, 2.0, -3.0).normalize()] {
            let (u, v) = frame_around(&n);
            assert!(is_unit(&u) && is_unit(&v));
            assert!(u.dot(&n).abs() < 1e-12 && v.dot(&n).abs() < 1e-12 && u.dot(&v).abs() < 1e-12);
        }
    }

    #[test]
    fn median_odd_even() {
        assert_eq!(median(&mut [0.9, 0.4, 0.5]), Some(0.5));
        assert_eq!(median(&mut [1.0, 3.0, 2.0, 4.0]), Some(2.5));
        assert_eq!(median(&mut []), None);
    }

    #[test]
    fn rotation_check() {
        assert!(is_rotation(&Matrix3::identity()));
        assert!(is_rotation(&mat3([[1.0, 0.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, -1.0]])));
        // reflection
        assert!(!is_rotation(&mat3([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, -1.0]])));
    }
}
