use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use minilp::{ComparisonOp, OptimizationDirection, Problem};
use serde::Serialize;

use super::contribution::{apply, ContributionMatrix};
use crate::accel::AccelIndex;
use crate::error::{Error, Result};
use crate::perception::vfoa_visible_luminaires;
use crate::scene::Scene;

pub const DEFAULT_DELTA_MAX_LUX: f64 = 200.0;
/// Largest luminaire count searched by plain enumeration in binary mode.
pub const EXHAUSTIVE_LIMIT: usize = 16;
/// Slack on every lux constraint, absorbing summation-order rounding.
pub const FEASIBILITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Each luminaire fully on or off.
    Binary,
    /// Any dim level in `[0, 1]`.
    Continuous,
    /// On exactly when inside some occupant's field of attention.
    VfoaGated,
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "binary" => Ok(Mode::Binary),
            "continuous" => Ok(Mode::Continuous),
            "vfoa" | "vfoa_gated" | "vfoa-gated" => Ok(Mode::VfoaGated),
            _ => Err(Error::InvalidArgument(format!("unknown mode `{s}` (binary, continuous, vfoa)"))),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Binary => "binary",
            Mode::Continuous => "continuous",
            Mode::VfoaGated => "vfoa",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ILSConfig {
    /// Largest tolerated drop of any occupant's perceived lux below full-lit.
    pub delta_max_lux: f64,
    pub mode: Mode,
    /// Constant draw of the sensing and control system.
    pub overhead_watts: f64,
    /// Minimum lux kept at every spatial sensor, capped at its full-lit
    /// reading. Needs floor rows in the contribution matrix.
    pub spatial_floor_lux: Option<f64>,
}

impl Default for ILSConfig {
    fn default() -> Self {
        ILSConfig {
            delta_max_lux: DEFAULT_DELTA_MAX_LUX,
            mode: Mode::Binary,
            overhead_watts: super::DEFAULT_OVERHEAD_WATTS,
            spatial_floor_lux: None,
        }
    }
}

impl ILSConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.delta_max_lux >= 0.0 && self.delta_max_lux.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "delta_max must be non-negative, got {}",
                self.delta_max_lux
            )));
        }
        if !(self.overhead_watts >= 0.0 && self.overhead_watts.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "overhead must be non-negative, got {}",
                self.overhead_watts
            )));
        }
        if let Some(f) = self.spatial_floor_lux {
            if !(f >= 0.0 && f.is_finite()) {
                return Err(Error::InvalidArgument(format!("spatial floor must be non-negative, got {f}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Selection {
    pub dims: Vec<f64>,
    /// `Σ P_l d_l`
    pub power: f64,
    /// Per-occupant drop below the full-lit reading.
    pub drops: Vec<f64>,
}

/// `full_lit[k] − (A·d)[k]`
pub fn drops(a: &ContributionMatrix, dims: &[f64]) -> Vec<f64> {
    a.full_lit.iter().zip(a.readings(dims)).map(|(f, r)| f - r).collect()
}

/// Luminaire ids inside each occupant's field of attention, scene order.
pub fn vfoa_sets(scene: &Scene, accel: &AccelIndex) -> Result<Vec<BTreeSet<u32>>> {
    scene.occupants.iter().map(|o| vfoa_visible_luminaires(o, scene, accel)).collect()
}

/// Linear lower bounds `rows · d ≥ rhs` shared by every mode.
struct Constraints {
    rows: Vec<Vec<f64>>,
    rhs: Vec<f64>,
}

impl Constraints {
    fn new(a: &ContributionMatrix, cfg: &ILSConfig) -> Result<Self> {
        let mut rows = a.a.clone();
        let mut rhs: Vec<f64> = a.full_lit.iter().map(|f| f - cfg.delta_max_lux).collect();
        if let Some(floor) = cfg.spatial_floor_lux {
            let f = a
                .floor
                .as_ref()
                .ok_or_else(|| Error::InvalidArgument("spatial floor requested without spatial sensor rows".into()))?;
            for (row, full) in f.a.iter().zip(&f.full_lit) {
                if row.len() != a.n_luminaires() {
                    return Err(Error::Dimension {
                        what: "floor row",
                        expected: a.n_luminaires(),
                        got: row.len(),
                    });
                }
                rows.push(row.clone());
                rhs.push(floor.min(*full));
            }
        }
        Ok(Constraints { rows, rhs })
    }

    fn satisfied(&self, dims: &[f64]) -> bool {
        apply(&self.rows, dims)
            .iter()
            .zip(&self.rhs)
            .all(|(v, r)| *v >= r - FEASIBILITY_TOL * (1.0 + r.abs()))
    }
}

/// Chooses the dim vector of least power keeping every occupant's drop
/// within budget. Among equal-power binary optima, the one switching off
/// lower-id luminaires wins. `vfoa` is required in gated mode.
pub fn optimize(a: &ContributionMatrix, powers: &[f64], cfg: &ILSConfig, vfoa: Option<&[BTreeSet<u32>]>) -> Result<Selection> {
    cfg.validate()?;
    let n = a.n_luminaires();
    if powers.len() != n {
        return Err(Error::Dimension {
            what: "power vector",
            expected: n,
            got: powers.len(),
        });
    }
    if powers.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
        return Err(Error::InvalidArgument("luminaire powers must be finite and non-negative".into()));
    }
    let cons = Constraints::new(a, cfg)?;
    let dims = match cfg.mode {
        Mode::Binary => binary(&cons, powers, &id_order(&a.luminaire_ids)),
        Mode::Continuous => continuous(&cons, powers)?,
        Mode::VfoaGated => gated(
            a,
            cfg,
            vfoa.ok_or_else(|| Error::InvalidArgument("gated mode needs occupant attention sets".into()))?,
        )?,
    };
    let power = powers.iter().zip(&dims).map(|(p, d)| p * d).sum();
    Ok(Selection {
        drops: drops(a, &dims),
        power,
        dims,
    })
}

/// Scene indices sorted by luminaire id.
fn id_order(ids: &[u32]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..ids.len()).collect();
    order.sort_by_key(|&i| ids[i]);
    order
}

fn power_tol(powers: &[f64]) -> f64 {
    1e-9 * (1.0 + powers.iter().sum::<f64>())
}

fn binary(cons: &Constraints, powers: &[f64], order: &[usize]) -> Vec<f64> {
    let n = order.len();
    if n <= EXHAUSTIVE_LIMIT {
        binary_exhaustive(cons, powers, order)
    } else {
        binary_branch(cons, powers, order)
    }
}

/// Walks every on/off pattern in lexicographic order of dims listed by
/// luminaire id, keeping the first one of least power.
fn binary_exhaustive(cons: &Constraints, powers: &[f64], order: &[usize]) -> Vec<f64> {
    let n = order.len();
    let tol = power_tol(powers);
    let mut best = vec![1.0; n];
    let mut best_power: f64 = powers.iter().sum();
    let mut dims = vec![0.0; n];
    for mask in 0u64..(1u64 << n) {
        // bit n−1−r of the mask drives the r-th lowest id
        for (r, &i) in order.iter().enumerate() {
            dims[i] = ((mask >> (n - 1 - r)) & 1) as f64;
        }
        let power: f64 = powers.iter().zip(&dims).map(|(p, d)| p * d).sum();
        if power < best_power - tol && cons.satisfied(&dims) {
            best_power = power;
            best.copy_from_slice(&dims);
        }
    }
    best
}

/// Depth-first search in the same lexicographic order, pruned by power and
/// by feasibility with every undecided luminaire on.
fn binary_branch(cons: &Constraints, powers: &[f64], order: &[usize]) -> Vec<f64> {
    struct Search<'a> {
        cons: &'a Constraints,
        powers: &'a [f64],
        order: &'a [usize],
        tol: f64,
        dims: Vec<f64>,
        best: Vec<f64>,
        best_power: f64,
    }

    impl Search<'_> {
        fn visit(&mut self, depth: usize, power: f64) {
            if power >= self.best_power - self.tol {
                return;
            }
            if depth == self.order.len() {
                self.best_power = power;
                self.best.copy_from_slice(&self.dims);
                return;
            }
            let i = self.order[depth];
            // undecided luminaires are still 1, so this is the best reachable
            self.dims[i] = 0.0;
            if self.cons.satisfied(&self.dims) {
                self.visit(depth + 1, power);
            }
            self.dims[i] = 1.0;
            self.visit(depth + 1, power + self.powers[i]);
        }
    }

    let n = order.len();
    let mut s = Search {
        cons,
        powers,
        order,
        tol: power_tol(powers),
        dims: vec![1.0; n],
        best: vec![1.0; n],
        best_power: f64::INFINITY,
    };
    s.visit(0, 0.0);
    s.best
}

fn continuous(cons: &Constraints, powers: &[f64]) -> Result<Vec<f64>> {
    let mut lp = Problem::new(OptimizationDirection::Minimize);
    let vars: Vec<_> = powers.iter().map(|p| lp.add_var(*p, (0.0, 1.0))).collect();
    for (row, rhs) in cons.rows.iter().zip(&cons.rhs) {
        if *rhs <= 0.0 {
            continue;
        }
        let expr: Vec<_> = vars.iter().zip(row).filter(|(_, c)| **c != 0.0).map(|(v, c)| (*v, *c)).collect();
        lp.add_constraint(expr, ComparisonOp::Ge, *rhs);
    }
    // all-ones is always feasible, so a failure here is numerical
    let solution = lp.solve().map_err(|_| Error::NonConvergence {
        residual: f64::NAN,
        luminaire: None,
    })?;
    let mut dims: Vec<f64> = vars.iter().map(|v| solution[*v].clamp(0.0, 1.0)).collect();
    repair(cons, &mut dims);
    Ok(dims)
}

/// Moves `dims` toward all-ones just far enough to undo solver round-off.
fn repair(cons: &Constraints, dims: &mut [f64]) {
    let values = apply(&cons.rows, dims);
    let mut t: f64 = 0.0;
    for ((row, v), rhs) in cons.rows.iter().zip(&values).zip(&cons.rhs) {
        if v < rhs {
            let headroom: f64 = row.iter().zip(dims.iter()).map(|(a, d)| a * (1.0 - d)).sum();
            t = t.max(if headroom > 0.0 { (rhs - v) / headroom } else { 1.0 });
        }
    }
    if t > 0.0 {
        let t = t.min(1.0);
        for d in dims.iter_mut() {
            *d = (*d + t * (1.0 - *d)).min(1.0);
        }
    }
}

fn gated(a: &ContributionMatrix, cfg: &ILSConfig, vfoa: &[BTreeSet<u32>]) -> Result<Vec<f64>> {
    if vfoa.len() != a.n_occupants() {
        return Err(Error::Dimension {
            what: "attention sets",
            expected: a.n_occupants(),
            got: vfoa.len(),
        });
    }
    let seen: BTreeSet<u32> = vfoa.iter().flatten().copied().collect();
    let dims: Vec<f64> = a.luminaire_ids.iter().map(|id| if seen.contains(id) { 1.0 } else { 0.0 }).collect();
    let mut order: Vec<usize> = (0..a.n_occupants()).collect();
    order.sort_by_key(|&k| a.occupant_ids[k]);
    let d = drops(a, &dims);
    for k in order {
        if d[k] > cfg.delta_max_lux + FEASIBILITY_TOL * (1.0 + a.full_lit[k].abs()) {
            return Err(Error::Infeasible {
                occupant: a.occupant_ids[k],
                drop: d[k],
                budget: cfg.delta_max_lux,
            });
        }
    }
    Ok(dims)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn matrix(rows: Vec<Vec<f64>>) -> ContributionMatrix {
        let l = rows[0].len() as u32;
        let k = rows.len() as u32;
        ContributionMatrix::from_rows(rows, (0..k).collect(), (0..l).collect()).unwrap()
    }

    fn run(a: &ContributionMatrix, powers: &[f64], delta: f64, mode: Mode) -> Selection {
        let cfg = ILSConfig {
            delta_max_lux: delta,
            mode,
            ..ILSConfig::default()
        };
        optimize(a, powers, &cfg, None).unwrap()
    }

    #[test]
    fn single_occupant_two_lamps() {
        let a = matrix(vec![vec![300.0, 50.0]]);
        let s = run(&a, &[10.0, 10.0], 200.0, Mode::Binary);
        assert_eq!(s.dims, vec![1.0, 0.0]);
        assert_eq!(s.drops, vec![50.0]);
    }

    #[test]
    fn zero_budget_keeps_everything_on() {
        let a = matrix(vec![vec![3.0, 5.0, 1.0], vec![2.0, 0.5, 7.0]]);
        assert_eq!(run(&a, &[1.0, 2.0, 3.0], 0.0, Mode::Binary).dims, vec![1.0; 3]);
        let c = run(&a, &[1.0, 2.0, 3.0], 0.0, Mode::Continuous);
        for d in c.dims {
            assert!((d - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn ties_switch_off_lower_ids() {
        let a = ContributionMatrix::from_rows(vec![vec![10.0, 10.0, 10.0]], vec![7], vec![5, 2, 9]).unwrap();
        let s = run(&a, &[1.0, 1.0, 1.0], 10.0, Mode::Binary);
        // id 2 sits at index 1
        assert_eq!(s.dims, vec![1.0, 0.0, 1.0]);
    }

    #[test]
    fn branch_and_bound_matches_enumeration() {
        let rows = vec![
            (0..12).map(|l| ((l * 37 + 11) % 23) as f64 * 4.0).collect::<Vec<_>>(),
            (0..12).map(|l| ((l * 19 + 5) % 17) as f64 * 6.0).collect::<Vec<_>>(),
        ];
        let a = matrix(rows);
        let powers: Vec<f64> = (0..12).map(|l| 10.0 + (l % 3) as f64 * 5.0).collect();
        let order = id_order(&a.luminaire_ids);
        for delta in [0.0, 50.0, 120.0, 300.0, 1e4] {
            let cfg = ILSConfig {
                delta_max_lux: delta,
                ..ILSConfig::default()
            };
            let cons = Constraints::new(&a, &cfg).unwrap();
            assert_eq!(
                binary_exhaustive(&cons, &powers, &order),
                binary_branch(&cons, &powers, &order),
                "{delta}"
            );
        }
    }

    #[test]
    fn continuous_beats_binary() {
        let a = matrix(vec![vec![300.0, 50.0], vec![120.0, 260.0]]);
        let powers = [96.8, 96.8];
        let b = run(&a, &powers, 200.0, Mode::Binary);
        let c = run(&a, &powers, 200.0, Mode::Continuous);
        assert!(c.power <= b.power + 1e-9);
        for d in c.drops {
            assert!(d <= 200.0 + 1e-6);
        }
    }

    #[test]
    fn gated_reports_violation() {
        let a = ContributionMatrix::from_rows(vec![vec![300.0, 50.0]], vec![4], vec![1, 2]).unwrap();
        let sets = vec![BTreeSet::from([2u32])];
        let cfg = ILSConfig {
            mode: Mode::VfoaGated,
            ..ILSConfig::default()
        };
        match optimize(&a, &[1.0, 1.0], &cfg, Some(&sets)) {
            Err(Error::Infeasible { occupant, drop, .. }) => {
                assert_eq!(occupant, 4);
                assert_eq!(drop, 300.0);
            }
            other => panic!("{other:?}"),
        }
        let sets = vec![BTreeSet::from([1u32])];
        assert_eq!(optimize(&a, &[1.0, 1.0], &cfg, Some(&sets)).unwrap().dims, vec![1.0, 0.0]);
        assert!(optimize(&a, &[1.0, 1.0], &cfg, None).is_err());
    }

    #[test]
    fn floor_caps_at_full_lit() {
        let mut a = matrix(vec![vec![10.0, 10.0]]);
        a.floor = Some(super::super::FloorRows {
            a: vec![vec![100.0, 0.0], vec![0.0, 30.0]],
            full_lit: vec![100.0, 30.0],
            sensor_ids: vec![0, 1],
        });
        let cfg = ILSConfig {
            delta_max_lux: 1000.0,
            spatial_floor_lux: Some(50.0),
            ..ILSConfig::default()
        };
        let s = optimize(&a, &[1.0, 1.0], &cfg, None).unwrap();
        assert_eq!(s.dims, vec![1.0, 1.0]);
        let cfg = ILSConfig {
            spatial_floor_lux: None,
            ..cfg
        };
        assert_eq!(optimize(&a, &[1.0, 1.0], &cfg, None).unwrap().dims, vec![0.0, 0.0]);
    }

    #[test]
    fn mode_names() {
        for m in [Mode::Binary, Mode::Continuous, Mode::VfoaGated] {
            assert_eq!(m.to_string().parse::<Mode>().unwrap(), m);
        }
        assert!("fuzzy".parse::<Mode>().is_err());
    }
}
