//! Deterministic low-discrepancy direction sets (Fibonacci spirals).

use std::f64::consts::PI;

use crate::geom::Vec3;

/// Golden angle in radians, `π (3 − √5)`.
const GOLDEN_ANGLE: f64 = 2.399_963_229_728_653;

/// Azimuthal offset (radians) selected by a sequence id; id 0 is unrotated.
fn sequence_offset(sequence_id: u32) -> f64 {
    // inverse plastic number: a Kronecker step uncorrelated with the golden angle
    2.0 * PI * (sequence_id as f64 * 0.754_877_666_246_692_7).fract()
}

/// `n` directions spread uniformly over the upper hemisphere (`z > 0`).
/// Heights are stratified uniformly in `z`, which is area-uniform on the
/// hemisphere.
pub fn fibonacci_hemisphere(n: usize, sequence_id: u32) -> Vec<Vec3> {
    let offset = sequence_offset(sequence_id);
    (0..n)
        .map(|k| {
            let z = 1.0 - (k as f64 + 0.5) / n as f64;
            let r = (1.0 - z * z).max(0.0).sqrt();
            let phi = k as f64 * GOLDEN_ANGLE + offset;
            Vec3::new(r * phi.cos(), r * phi.sin(), z)
        })
        .collect()
}

/// `n` directions spread uniformly over the whole sphere.
pub fn fibonacci_sphere(n: usize, sequence_id: u32) -> Vec<Vec3> {
    let offset = sequence_offset(sequence_id);
    (0..n)
        .map(|k| {
            let z = 1.0 - 2.0 * (k as f64 + 0.5) / n as f64;
            let r = (1.0 - z * z).max(0.0).sqrt();
            let phi = k as f64 * GOLDEN_ANGLE + offset;
            Vec3::new(r * phi.cos(), r * phi.sin(), z)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hemisphere_is_unit_and_upper() {
        let dirs = fibonacci_hemisphere(1000, 0);
        assert!(dirs.iter().all(|d| (d.norm() - 1.0).abs() < 1e-12 && d.z > 0.0));
        // mean cosine over a uniform hemisphere is 1/2
        let mean_cos: f64 = dirs.iter().map(|d| d.z).sum::<f64>() / 1000.0;
        assert!((mean_cos - 0.5).abs() < 1e-12);
    }

    #[test]
    fn sphere_is_balanced() {
        let dirs = fibonacci_sphere(4096, 3);
        let mean = dirs.iter().fold(Vec3::zeros(), |a, d| a + d) / 4096.0;
        assert!(mean.norm() < 1e-3);
    }

    #[test]
    fn sequence_id_rotates() {
        assert_ne!(fibonacci_hemisphere(10, 0), fibonacci_hemisphere(10, 1));
        assert_eq!(fibonacci_hemisphere(10, 1), fibonacci_hemisphere(10, 1));
    }
}
