use std::f64::consts::PI;

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::accel::AccelIndex;
use crate::error::{Error, Result};
use crate::geom::Vec3;
use crate::scene::Patch;

/// Default sample points per patch (a 4×4 stratified grid).
pub const DEFAULT_FF_SAMPLES: usize = 16;

/// Largest admissible row sum after symmetrization.
pub const ROW_SUM_LIMIT: f64 = 1.0 + 1e-3;

/// Dense form-factor matrix, row-major: `get(i, j)` is the fraction of
/// diffuse flux leaving `i` that arrives at `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct FormFactorMatrix {
    n: usize,
    values: Vec<f64>,
    areas: Vec<f64>,
}

impl FormFactorMatrix {
    pub fn from_parts(values: Vec<f64>, areas: Vec<f64>) -> Result<Self> {
        let n = areas.len();
        if values.len() != n * n {
            return Err(Error::Dimension {
                what: "form-factor entries",
                expected: n * n,
                got: values.len(),
            });
        }
        if areas.iter().any(|a| !(a.is_finite() && *a > 0.0)) {
            return Err(Error::InvalidArgument("patch areas must be positive".into()));
        }
        if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::InvalidArgument("form factors must be finite and >= 0".into()));
        }
        Ok(FormFactorMatrix { n, values, areas })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n..(i + 1) * self.n]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn areas(&self) -> &[f64] {
        &self.areas
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.row(i).iter().sum()).collect()
    }

    pub fn to_dmatrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.n, self.n, &self.values)
    }

    /// `F · x`
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n).map(|i| self.row(i).iter().zip(x).map(|(f, v)| f * v).sum()).collect()
    }

    fn check_rows(&self) -> Result<()> {
        for (row, sum) in self.row_sums().into_iter().enumerate() {
            if sum > ROW_SUM_LIMIT {
                return Err(Error::RowSum { row, sum });
            }
        }
        Ok(())
    }
}

/// Enforces reciprocity: `F_ij ← (A_i F_ij + A_j F_ji) / (2 A_i)`.
pub fn symmetrize(ff: &mut FormFactorMatrix) {
    let n = ff.n;
    for i in 0..n {
        for j in i + 1..n {
            let (ai, aj) = (ff.areas[i], ff.areas[j]);
            let g = 0.5 * (ai * ff.values[i * n + j] + aj * ff.values[j * n + i]);
            ff.values[i * n + j] = g / ai;
            ff.values[j * n + i] = g / aj;
        }
    }
}

/// Deterministic stratified sample points on a patch. Perfect squares use a
/// midpoint grid; other counts use a shifted Hammersley set.
pub fn sample_points(patch: &Patch, n: usize) -> Vec<Vec3> {
    let side = (n as f64).sqrt().round() as usize;
    let unit: Vec<(f64, f64)> = if side * side == n {
        (0..n)
            .map(|k| ((k % side) as f64 + 0.5, (k / side) as f64 + 0.5))
            .map(|(a, b)| (a / side as f64, b / side as f64))
            .collect()
    } else {
        (0..n)
            .map(|k| ((k as f64 + 0.5) / n as f64, (radical_inverse2(k as u32) + 0.5 / n as f64).fract()))
            .collect()
    };
    unit.into_iter().map(|(s, t)| patch.point_at(2.0 * s - 1.0, 2.0 * t - 1.0)).collect()
}

fn radical_inverse2(k: u32) -> f64 {
    k.reverse_bits() as f64 / 4_294_967_296.0
}

/// True when every corner of `other` lies on or behind the plane of `p`.
fn entirely_behind(p: &Patch, other: &Patch) -> bool {
    other.corners().iter().all(|c| p.normal.dot(&(c - p.center)) <= 1e-12)
}

/// Part of a convex polygon on the front side of the plane `(origin, normal)`.
fn clip_front(poly: &[Vec3], origin: &Vec3, normal: &Vec3) -> Vec<Vec3> {
    let side = |p: &Vec3| normal.dot(&(p - origin));
    let mut out = Vec::with_capacity(poly.len() + 1);
    for k in 0..poly.len() {
        let (a, b) = (poly[k], poly[(k + 1) % poly.len()]);
        let (sa, sb) = (side(&a), side(&b));
        if sa >= 0.0 {
            out.push(a);
        }
        if (sa >= 0.0) != (sb >= 0.0) {
            out.push(a + (b - a) * (sa / (sa - sb)));
        }
    }
    out
}

/// Exact unoccluded form factor from a differential area at `x` with
/// normal `n` to a convex polygon lying in front of it (contour integral).
fn point_to_polygon(x: &Vec3, n: &Vec3, poly: &[Vec3]) -> f64 {
    let mut acc = 0.0;
    for k in 0..poly.len() {
        let (r0, r1) = (poly[k] - x, poly[(k + 1) % poly.len()] - x);
        let c = r0.cross(&r1);
        let len = c.norm();
        if len <= 1e-15 * r0.norm() * r1.norm() {
            continue;
        }
        acc += len.atan2(r0.dot(&r1)) * n.dot(&c) / len;
    }
    acc.abs() / (2.0 * PI)
}

/// Points per patch for the unoccluded part of the estimate. The contour
/// integral is cheap next to a visibility query, so it gets a finer grid.
pub const QUADRATURE_POINTS: usize = 256;

/// Floor on quadrature points for distant pairs.
const MIN_QUADRATURE_POINTS: usize = 16;

/// Pairs closer than this many combined patch radii use the fine grid.
const NEAR_FACTOR: f64 = 2.0;

/// Emitter-side data reused by every pair.
pub(crate) struct PatchSamples {
    /// Coarse points where visibility is tested.
    points: Vec<Vec3>,
    /// Points for the unoccluded factor of distant pairs.
    coarse: Vec<Vec3>,
    /// Fine points for the unoccluded factor of nearby pairs.
    quadrature: Vec<Vec3>,
}

impl PatchSamples {
    pub(crate) fn new(patch: &Patch, n_samples: usize) -> Self {
        PatchSamples {
            points: sample_points(patch, n_samples),
            coarse: sample_points(patch, MIN_QUADRATURE_POINTS.max(n_samples)),
            quadrature: sample_points(patch, QUADRATURE_POINTS.max(n_samples)),
        }
    }
}

/// Unoccluded `F` from `from` to the polygon `to_poly`, averaged over `pts`.
fn unoccluded(from: &Patch, pts: &[Vec3], to: &Patch, to_poly: &[Vec3]) -> f64 {
    if to_poly.len() < 3 {
        return 0.0;
    }
    let sum: f64 = pts
        .iter()
        .filter(|x| to.normal.dot(&(*x - to.center)) > 0.0)
        .map(|x| point_to_polygon(x, &from.normal, to_poly))
        .sum();
    sum / pts.len() as f64
}

/// Stride of the sample pairing `a → (a · stride) mod n`: the coprime
/// closest to `n / φ`, so paired segments spread over many directions.
fn pairing_stride(n: usize) -> usize {
    fn gcd(a: usize, b: usize) -> usize {
        if b == 0 {
            a
        } else {
            gcd(b, a % b)
        }
    }
    let target = n as f64 / 1.618_033_988_749_895;
    (1..n.max(2))
        .filter(|k| gcd(*k, n) == 1)
        .min_by(|a, b| (*a as f64 - target).abs().total_cmp(&(*b as f64 - target).abs()))
        .unwrap_or(1)
}

/// `(F_ij, F_ji)` for one pair: the unoccluded factor on the fine grid,
/// scaled by the visible fraction of `n` paired sample segments. Each
/// segment is weighted by its emitter point's point-to-polygon factor.
fn pair_factors(pi: &Patch, si: &PatchSamples, pj: &Patch, sj: &PatchSamples, accel: &AccelIndex) -> (f64, f64) {
    if entirely_behind(pi, pj) || entirely_behind(pj, pi) {
        return (0.0, 0.0);
    }
    let (xs, ys) = (&si.points, &sj.points);
    let n = xs.len().min(ys.len());
    let stride = pairing_stride(n);
    let ignore = [pi.id, pj.id];
    let poly_i = clip_front(&pi.corners(), &pj.center, &pj.normal);
    let poly_j = clip_front(&pj.corners(), &pi.center, &pi.normal);

    let (mut num_ij, mut den_ij, mut num_ji, mut den_ji) = (0.0, 0.0, 0.0, 0.0);
    for a in 0..n {
        let (x, y) = (&xs[a], &ys[(a * stride) % n]);
        if !(pi.normal.dot(&(y - x)) > 0.0 && pj.normal.dot(&(x - y)) > 0.0) {
            continue;
        }
        let wij = point_to_polygon(x, &pi.normal, &poly_j);
        let wji = point_to_polygon(y, &pj.normal, &poly_i);
        if wij == 0.0 && wji == 0.0 {
            continue;
        }
        let v = accel.visible(x, y, &ignore) as u8 as f64;
        num_ij += wij * v;
        den_ij += wij;
        num_ji += wji * v;
        den_ji += wji;
    }
    // the integrand is smooth for distant pairs; the fine grid only pays
    // off near shared edges
    let reach = pi.half_extents[0].hypot(pi.half_extents[1]) + pj.half_extents[0].hypot(pj.half_extents[1]);
    let near = (pi.center - pj.center).norm() < NEAR_FACTOR * reach;
    let scaled = |num: f64, den: f64, from: &Patch, s: &PatchSamples, to: &Patch, poly: &[Vec3]| {
        if num > 0.0 {
            let pts = if near { &s.quadrature } else { &s.coarse };
            num / den * unoccluded(from, pts, to, poly)
        } else {
            0.0
        }
    };
    (scaled(num_ij, den_ij, pi, si, pj, &poly_j), scaled(num_ji, den_ji, pj, sj, pi, &poly_i))
}

/// Estimate of `F_ij` from `n_samples` stratified points on each patch.
pub fn form_factor(i: &Patch, j: &Patch, accel: &AccelIndex, n_samples: usize) -> f64 {
    let n = n_samples.max(1);
    pair_factors(i, &PatchSamples::new(i, n), j, &PatchSamples::new(j, n), accel).0
}

/// All pairwise form factors, reciprocity-symmetrized, with the row-sum
/// bound checked. Each unordered pair is visited once.
pub fn form_factor_matrix(patches: &[Patch], accel: &AccelIndex, n_samples: usize) -> Result<FormFactorMatrix> {
    if patches.len() < 2 {
        return Err(Error::Empty("form-factor matrix needs at least two patches"));
    }
    if n_samples == 0 {
        return Err(Error::InvalidArgument("form-factor sample count must be >= 1".into()));
    }
    let n = patches.len();
    let samples: Vec<PatchSamples> = patches.par_iter().map(|p| PatchSamples::new(p, n_samples)).collect();
    let areas: Vec<f64> = patches.iter().map(Patch::area).collect();

    let upper: Vec<Vec<(f64, f64)>> = (0..n)
        .into_par_iter()
        .map(|i| {
            (i + 1..n)
                .map(|j| pair_factors(&patches[i], &samples[i], &patches[j], &samples[j], accel))
                .collect()
        })
        .collect();

    let mut values = vec![0.0; n * n];
    for (i, row) in upper.iter().enumerate() {
        for (k, (fij, fji)) in row.iter().enumerate() {
            let j = i + 1 + k;
            values[i * n + j] = *fij;
            values[j * n + i] = *fji;
        }
    }
    let mut ff = FormFactorMatrix { n, values, areas };
    symmetrize(&mut ff);
    ff.check_rows()?;
    Ok(ff)
}
