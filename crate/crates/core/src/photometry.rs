//! Tabulated photometric curves: luminaire light distribution curves (candela
//! over C-planes and polar angles) and luxmeter sensitivity curves (weight over
//! incidence angle), with their CSV encodings.
//!
//! Luminaire frame convention: the polar angle γ is measured from the local
//! +Z axis (the emission axis), the azimuth plane C from local +X towards
//! local +Y.

use std::f64::consts::PI;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::geom::Vec3;

/// Light distribution curve: candela indexed by `(azimuth plane, polar angle)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Ldc {
    polar_deg: Vec<f64>,
    azimuth_deg: Vec<f64>,
    /// `candela[plane][polar]`
    candela: Vec<Vec<f64>>,
}

impl Ldc {
    pub fn new(polar_deg: Vec<f64>, azimuth_deg: Vec<f64>, candela: Vec<Vec<f64>>) -> Result<Self> {
        let bad = |m: String| Error::InvalidArgument(format!("light distribution curve: {m}"));
        if polar_deg.is_empty() || azimuth_deg.is_empty() {
            return Err(bad("empty angle list".into()));
        }
        if polar_deg[0] != 0.0 {
            return Err(bad("polar angles must start at 0".into()));
        }
        check_ascending(&polar_deg, 0.0, 180.0, true).map_err(|m| bad(format!("polar angles {m}")))?;
        check_ascending(&azimuth_deg, 0.0, 360.0, false).map_err(|m| bad(format!("azimuth planes {m}")))?;
        if candela.len() != azimuth_deg.len() {
            return Err(bad(format!("{} intensity rows for {} azimuth planes", candela.len(), azimuth_deg.len())));
        }
        for (row, plane) in candela.iter().zip(&azimuth_deg) {
            if row.len() != polar_deg.len() {
                return Err(bad(format!("plane C={plane}: {} values for {} polar angles", row.len(), polar_deg.len())));
            }
            if let Some(v) = row.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
                return Err(bad(format!("plane C={plane}: intensity {v} is not a finite non-negative value")));
            }
        }
        Ok(Ldc {
            polar_deg,
            azimuth_deg,
            candela,
        })
    }

    /// Uniform emitter of `flux_lm` lumens over the full sphere.
    pub fn isotropic(flux_lm: f64) -> Result<Self> {
        if !(flux_lm.is_finite() && flux_lm >= 0.0) {
            return Err(Error::InvalidArgument(format!("isotropic flux {flux_lm} must be >= 0")));
        }
        Self::constant(flux_lm / (4.0 * PI))
    }

    /// Uniform emitter of `cd` candela in every direction.
    pub fn constant(cd: f64) -> Result<Self> {
        Self::new(vec![0.0, 180.0], vec![0.0], vec![vec![cd, cd]])
    }

    pub fn polar_deg(&self) -> &[f64] {
        &self.polar_deg
    }

    pub fn azimuth_deg(&self) -> &[f64] {
        &self.azimuth_deg
    }

    pub fn candela(&self) -> &[Vec<f64>] {
        &self.candela
    }

    /// Intensity towards `direction` (unit vector in the luminaire frame).
    pub fn eval(&self, direction: &Vec3) -> f64 {
        let gamma = direction.z.clamp(-1.0, 1.0).acos().to_degrees();
        let c = if direction.x == 0.0 && direction.y == 0.0 {
            0.0
        } else {
            direction.y.atan2(direction.x).to_degrees()
        };
        self.eval_angles(c, gamma)
    }

    /// Intensity at azimuth plane `c_deg` (any real value, wrapped to
    /// `[0, 360)`) and polar angle `gamma_deg`.
    pub fn eval_angles(&self, c_deg: f64, gamma_deg: f64) -> f64 {
        let last_polar = *self.polar_deg.last().expect("non-empty");
        if gamma_deg > last_polar {
            return 0.0;
        }
        let (p0, p1, tp) = bracket(&self.polar_deg, gamma_deg.max(0.0));
        let along = |row: &[f64]| lerp(row[p0], row[p1], tp);

        let n = self.azimuth_deg.len();
        if n == 1 {
            return along(&self.candela[0]);
        }
        let c = c_deg.rem_euclid(360.0);
        let first = self.azimuth_deg[0];
        let last = self.azimuth_deg[n - 1];
        if c >= first && c <= last {
            let (a0, a1, ta) = bracket(&self.azimuth_deg, c);
            if ta == 0.0 {
                return along(&self.candela[a0]);
            }
            return lerp(along(&self.candela[a0]), along(&self.candela[a1]), ta);
        }
        // wrap-around segment between the last plane and the first plane + 360
        let span = first + 360.0 - last;
        let offset = if c > last { c - last } else { c + 360.0 - last };
        lerp(along(&self.candela[n - 1]), along(&self.candela[0]), offset / span)
    }

    /// Total luminous flux (lm), integrated numerically over the sphere.
    pub fn flux(&self) -> f64 {
        let (nc, ng) = (144usize, 360usize);
        let dg = PI / ng as f64;
        let dc = 360.0 / nc as f64;
        let mut total = 0.0;
        for i in 0..ng {
            let g = (i as f64 + 0.5) * dg;
            let ring: f64 = (0..nc).map(|k| self.eval_angles((k as f64 + 0.5) * dc, g.to_degrees())).sum::<f64>() / nc as f64;
            total += ring * 2.0 * PI * g.sin() * dg;
        }
        total
    }

    /// Parses the CSV encoding: header row of polar angles (first cell is a
    /// free-form label), then one row per azimuth plane whose first cell is
    /// the plane angle.
    pub fn from_csv(text: &str) -> Result<Self> {
        let what = "light distribution curve";
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .flexible(true)
            .from_reader(text.as_bytes());
        let mut polar = None;
        let mut planes = Vec::new();
        let mut rows = Vec::new();
        for record in reader.records() {
            let record = record.map_err(|e| csv_error(what, e))?;
            let line = record.position().map(|p| p.line() as usize);
            if record.iter().all(str::is_empty) {
                continue;
            }
            let mut fields = record.iter();
            let first = fields.next().unwrap_or("");
            let numbers = fields.map(|f| parse_number(what, line, f)).collect::<Result<Vec<f64>>>()?;
            match polar {
                None => polar = Some(numbers),
                Some(_) => {
                    planes.push(parse_number(what, line, first)?);
                    rows.push(numbers);
                }
            }
        }
        let polar = polar.ok_or_else(|| Error::parse(what, None, "missing header row"))?;
        Ldc::new(polar, planes, rows).map_err(|e| Error::parse(what, None, e.to_string()))
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("C\\gamma");
        for g in &self.polar_deg {
            write!(out, ",{g:?}").unwrap();
        }
        out.push('\n');
        for (c, row) in self.azimuth_deg.iter().zip(&self.candela) {
            write!(out, "{c:?}").unwrap();
            for v in row {
                write!(out, ",{v:?}").unwrap();
            }
            out.push('\n');
        }
        out
    }
}

/// Luxmeter sensitivity curve: relative weight over incidence angle.
#[derive(Debug, Clone, PartialEq)]
pub struct Lsc {
    angles_deg: Vec<f64>,
    weights: Vec<f64>,
}

impl Lsc {
    pub fn new(angles_deg: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        let bad = |m: String| Error::InvalidArgument(format!("sensitivity curve: {m}"));
        if angles_deg.is_empty() || angles_deg.len() != weights.len() {
            return Err(bad(format!("{} angles but {} weights", angles_deg.len(), weights.len())));
        }
        if angles_deg[0] != 0.0 || weights[0] != 1.0 {
            return Err(bad("curve must start at (0°, 1.0)".into()));
        }
        check_ascending(&angles_deg, 0.0, 90.0, true).map_err(|m| bad(format!("angles {m}")))?;
        if let Some(w) = weights.iter().find(|w| !(**w >= 0.0 && **w <= 1.0)) {
            return Err(bad(format!("weight {w} outside [0, 1]")));
        }
        Ok(Lsc { angles_deg, weights })
    }

    /// Ideal cosine response sampled every 5°.
    pub fn cosine() -> Self {
        let angles: Vec<f64> = (0..=18).map(|k| 5.0 * k as f64).collect();
        let weights = angles
            .iter()
            .map(|a| if *a == 90.0 { 0.0 } else { a.to_radians().cos().min(1.0) })
            .collect();
        Lsc::new(angles, weights).expect("cosine table is valid")
    }

    pub fn angles_deg(&self) -> &[f64] {
        &self.angles_deg
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Weight at `incidence_deg`; zero at or beyond 90° and past the last node.
    pub fn eval(&self, incidence_deg: f64) -> f64 {
        let incidence = incidence_deg.max(0.0);
        if incidence >= 90.0 || incidence > *self.angles_deg.last().expect("non-empty") {
            return 0.0;
        }
        let (i0, i1, t) = bracket(&self.angles_deg, incidence);
        lerp(self.weights[i0], self.weights[i1], t)
    }

    /// Two-column CSV `angle_deg,weight`; a non-numeric first row is treated
    /// as a header.
    pub fn from_csv(text: &str) -> Result<Self> {
        let what = "sensitivity curve";
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_reader(text.as_bytes());
        let (mut angles, mut weights) = (Vec::new(), Vec::new());
        for (k, record) in reader.records().enumerate() {
            let record = record.map_err(|e| csv_error(what, e))?;
            let line = record.position().map(|p| p.line() as usize);
            if record.len() != 2 {
                return Err(Error::parse(what, line, format!("expected 2 columns, found {}", record.len())));
            }
            if k == 0 && record[0].parse::<f64>().is_err() {
                continue;
            }
            angles.push(parse_number(what, line, &record[0])?);
            weights.push(parse_number(what, line, &record[1])?);
        }
        Lsc::new(angles, weights).map_err(|e| Error::parse(what, None, e.to_string()))
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("angle_deg,weight\n");
        for (a, w) in self.angles_deg.iter().zip(&self.weights) {
            writeln!(out, "{a:?},{w:?}").unwrap();
        }
        out
    }
}

impl Default for Lsc {
    fn default() -> Self {
        Lsc::cosine()
    }
}

fn check_ascending(values: &[f64], lo: f64, hi: f64, hi_inclusive: bool) -> Result<(), String> {
    for v in values {
        let in_range = *v >= lo && if hi_inclusive { *v <= hi } else { *v < hi };
        if !(v.is_finite() && in_range) {
            return Err(format!("value {v} outside [{lo}, {hi}{}", if hi_inclusive { "]" } else { ")" }));
        }
    }
    if values.windows(2).any(|w| w[1] <= w[0]) {
        return Err("must be strictly ascending".into());
    }
    Ok(())
}

/// Bracketing node indices and interpolation fraction for `x` within the
/// ascending `nodes`. Exact node hits return `t == 0`.
fn bracket(nodes: &[f64], x: f64) -> (usize, usize, f64) {
    match nodes.binary_search_by(|n| n.total_cmp(&x)) {
        Ok(i) => (i, i, 0.0),
        Err(0) => (0, 0, 0.0),
        Err(i) if i >= nodes.len() => (nodes.len() - 1, nodes.len() - 1, 0.0),
        Err(i) => {
            let (a, b) = (nodes[i - 1], nodes[i]);
            (i - 1, i, (x - a) / (b - a))
        }
    }
}

fn lerp(a: f64, b: f64, t: f64) -> f64 {
    if t == 0.0 {
        a
    } else {
        a + (b - a) * t
    }
}

fn parse_number(what: &'static str, line: Option<usize>, field: &str) -> Result<f64> {
    field
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| Error::parse(what, line, format!("`{field}` is not a finite number")))
}

pub(crate) fn csv_error(what: &'static str, e: csv::Error) -> Error {
    let line = e.position().map(|p| p.line() as usize);
    Error::parse(what, line, e.to_string())
}
