//! Tabular reports: per-sensor estimation error and per-scenario drop,
//! error and power saving, as CSV or aligned text.

use std::fmt::Write;

use super::ScenarioResult;

/// A labelled scenario, e.g. `"3|4"` for the luminaires left on.
pub struct Scenario<'a> {
    pub label: String,
    pub result: &'a ScenarioResult,
}

/// Label listing the ids of luminaires that are on (dim > 0).
pub fn active_label(result: &ScenarioResult) -> String {
    let on: Vec<String> = result
        .luminaire_ids
        .iter()
        .zip(&result.dims)
        .filter(|(_, d)| **d > 0.0)
        .map(|(id, _)| id.to_string())
        .collect();
    if on.is_empty() {
        "none".into()
    } else {
        on.join("|")
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.3}")).unwrap_or_else(|| "-".into())
}

fn sensor_rows(result: &ScenarioResult) -> (Vec<&'static str>, Vec<Vec<String>>) {
    let header = vec!["sensor_id", "estimate_lux", "ground_truth_lux", "epsilon_lux"];
    let rows = result
        .sensors
        .iter()
        .map(|s| vec![s.sensor_id.to_string(), format!("{:.3}", s.estimate), opt(s.ground_truth), opt(s.epsilon)])
        .collect();
    (header, rows)
}

fn scenario_rows(scenarios: &[Scenario<'_>]) -> (Vec<String>, Vec<Vec<String>>) {
    let occupants = scenarios.first().map(|s| s.result.occupant_ids.clone()).unwrap_or_default();
    let mut header = vec!["scenario".to_string()];
    header.extend(occupants.iter().map(|id| format!("delta_lux_{id}")));
    header.extend(["epsilon_est".to_string(), "delta_watt".to_string()]);
    let rows = scenarios
        .iter()
        .map(|s| {
            let mut row = vec![s.label.clone()];
            row.extend(s.result.delta_lux.iter().map(|d| format!("{d:.3}")));
            row.push(opt(s.result.mean_epsilon()));
            row.push(format!("{:.1}", s.result.delta_watt));
            row
        })
        .collect();
    (header, rows)
}

fn csv<S: AsRef<str>>(header: &[S], rows: &[Vec<String>]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    // writing into a Vec cannot fail
    w.write_record(header.iter().map(AsRef::as_ref)).expect("in-memory csv");
    for r in rows {
        w.write_record(r).expect("in-memory csv");
    }
    String::from_utf8(w.into_inner().expect("in-memory csv")).expect("csv output is utf-8")
}

/// Left-aligned first column, right-aligned numbers.
fn text<S: AsRef<str>>(header: &[S], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.as_ref().len()).collect();
    for r in rows {
        for (w, c) in widths.iter_mut().zip(r) {
            *w = (*w).max(c.len());
        }
    }
    let mut out = String::new();
    let line = |out: &mut String, cells: &mut dyn Iterator<Item = &str>| {
        let cells: Vec<String> = cells
            .zip(&widths)
            .enumerate()
            .map(|(i, (c, w))| if i == 0 { format!("{c:<w$}") } else { format!("{c:>w$}") })
            .collect();
        let _ = writeln!(out, "{}", cells.join("  ").trim_end());
    };
    line(&mut out, &mut header.iter().map(AsRef::as_ref));
    let rule: Vec<String> = widths.iter().map(|w| "-".repeat(*w)).collect();
    let _ = writeln!(out, "{}", rule.join("  "));
    for r in rows {
        line(&mut out, &mut r.iter().map(String::as_str));
    }
    out
}

pub fn sensor_table_csv(result: &ScenarioResult) -> String {
    let (h, r) = sensor_rows(result);
    csv(&h, &r)
}

pub fn sensor_table_text(result: &ScenarioResult) -> String {
    let (h, r) = sensor_rows(result);
    text(&h, &r)
}

pub fn scenario_table_csv(scenarios: &[Scenario<'_>]) -> String {
    let (h, r) = scenario_rows(scenarios);
    csv(&h, &r)
}

pub fn scenario_table_text(scenarios: &[Scenario<'_>]) -> String {
    let (h, r) = scenario_rows(scenarios);
    text(&h, &r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ils::{energy_report, SensorReading};

    fn result() -> ScenarioResult {
        ScenarioResult {
            dims: vec![0.0, 1.0, 1.0],
            luminaire_ids: vec![1, 3, 4],
            sensors: vec![
                SensorReading {
                    sensor_id: 1,
                    estimate: 400.0,
                    ground_truth: Some(410.0),
                    epsilon: Some(10.0),
                },
                SensorReading {
                    sensor_id: 2,
                    estimate: 12.5,
                    ground_truth: None,
                    epsilon: None,
                },
            ],
            occupant_ids: vec![7],
            delta_lux: vec![55.25],
            delta_watt: 96.8,
            energy: energy_report(&[0.0, 1.0, 1.0], &[96.8; 3], 24.0, 65.0).unwrap(),
        }
    }

    #[test]
    fn labels_and_tables() {
        let r = result();
        assert_eq!(active_label(&r), "3|4");
        let csv = scenario_table_csv(&[Scenario {
            label: active_label(&r),
            result: &r,
        }]);
        assert_eq!(csv, "scenario,delta_lux_7,epsilon_est,delta_watt\n3|4,55.250,10.000,96.8\n");
        let text = sensor_table_text(&r);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 4);
        assert!(lines[3].starts_with("2 "));
        assert!(lines[3].ends_with('-'));
        assert_eq!(sensor_table_csv(&r).lines().count(), 3);
    }
}
