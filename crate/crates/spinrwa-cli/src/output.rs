//! Deterministic CSV assembly and the JSON run manifest.

use serde::{Deserialize, Serialize};

use spinrwa::fidelity::{Metric, MethodTrace};
use spinrwa::sweep::SweepRow;

/// Fixed-layout decimal with 12 significant digits: positional notation over
/// a comfortable magnitude range, scientific outside it, `nan` for NaN.
/// Identical inputs yield identical bytes on any platform with IEEE doubles.
pub fn format_sig(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x == 0.0 {
        return "0".into();
    }
    // The shortest-round-trip exponent is exact, unlike log10 near powers
    // of ten.
    let sci = format!("{x:e}");
    let exp: i32 = sci[sci.find('e').unwrap() + 1..].parse().unwrap();
    if (-4..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        format!("{x:.decimals$}")
    } else {
        format!("{x:.11e}")
    }
}

/// Time-trace CSV: one row per (method, sample), methods in request order.
/// A failed method keeps its rows with `nan` metrics so the file shape is
/// independent of which methods succeeded.
pub fn timeseries_csv(traces: &[MethodTrace], times: &[f64], times_pi: &[f64]) -> String {
    let mut out = String::from("t_over_Tpi,t_absolute,method,f_state,F_op\n");
    for mt in traces {
        for k in 0..times.len() {
            let (fs, fo) = match &mt.result {
                Ok(tr) => (tr.f_state[k], tr.f_op[k]),
                Err(_) => (f64::NAN, f64::NAN),
            };
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                format_sig(times_pi[k]),
                format_sig(times[k]),
                mt.method,
                format_sig(fs),
                format_sig(fo)
            ));
        }
    }
    out
}

/// Sweep CSV: grid-major rows, methods in request order within each grid
/// value; the metric column is named for what was averaged.
pub fn sweep_csv(rows: &[SweepRow], metric: Metric) -> String {
    let mut out = format!("sweep_value,method,{}\n", metric.column_name());
    for row in rows {
        out.push_str(&format!(
            "{},{},{}\n",
            format_sig(row.sweep_value),
            row.method,
            format_sig(row.mean)
        ));
    }
    out
}

/// Everything needed to reproduce or audit a run, written next to the CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub params: ParamEcho,
    pub grid: GridEcho,
    pub methods: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub metric: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub m_target: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub initial: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub threads: Option<usize>,
    pub solver: SolverEcho,
    pub wall_clock_seconds: f64,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamEcho {
    pub spin: f64,
    #[serde(rename = "Q")]
    pub q: f64,
    #[serde(rename = "B0")]
    pub b0: f64,
    #[serde(rename = "B1")]
    pub b1: f64,
    pub omega: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridEcho {
    /// "time" for traces, otherwise the swept axis name.
    pub axis: String,
    pub start: f64,
    pub stop: f64,
    pub points: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub window_pi: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub samples_per_point: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverEcho {
    /// Integrator step, absolute units (trace runs; sweeps re-derive it per
    /// grid point from the same steps-per-cycle rule).
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub rk4_dt: Option<f64>,
    pub rk4_steps_per_cycle: f64,
    pub rk4_renorm_interval: usize,
    /// Jacobi eigensolver off-diagonal threshold, relative to ‖A‖_F.
    pub eig_offdiag_rel: f64,
    /// Drive-renormalization root residual bound, relative to max(κ, B̃).
    pub xi_residual_rel: f64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use spinrwa::fidelity::FidelityTrace;
    use spinrwa::methods::Method;

    #[test]
    fn significant_digit_formatting() {
        assert_eq!(format_sig(0.0), "0");
        assert_eq!(format_sig(f64::NAN), "nan");
        assert_eq!(format_sig(1.05), "1.05000000000");
        assert_eq!(format_sig(-1.05), "-1.05000000000");
        assert_eq!(format_sig(0.05), "0.0500000000000");
        assert_eq!(format_sig(2.565099660323728), "2.56509966032");
        assert_eq!(format_sig(1000.0), "1000.00000000");
        assert_eq!(format_sig(0.999999999999), "0.999999999999");
        assert_eq!(format_sig(1e-7), "1.00000000000e-7");
        assert_eq!(format_sig(3.5e13), "3.50000000000e13");
    }

    #[test]
    fn timeseries_rows_cover_failed_methods() {
        let times = vec![0.5, 1.0];
        let times_pi = vec![0.25, 0.5];
        let traces = vec![
            MethodTrace {
                method: Method::RwaFull,
                result: Ok(FidelityTrace {
                    method: Method::RwaFull,
                    times: times.clone(),
                    times_pi: times_pi.clone(),
                    f_state: vec![1.0, 0.5],
                    f_op: vec![1.0, 0.25],
                    initial_state: vec![],
                }),
            },
            MethodTrace {
                method: Method::Chrw,
                result: Err(spinrwa::Error::UndefinedTimescale),
            },
        ];
        let csv = timeseries_csv(&traces, &times, &times_pi);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 5);
        assert_eq!(lines[0], "t_over_Tpi,t_absolute,method,f_state,F_op");
        assert!(lines[1].starts_with("0.250000000000,0.500000000000,rwa-full,"));
        assert!(lines[3].ends_with("chrw,nan,nan"));
        assert!(lines[4].ends_with("chrw,nan,nan"));
    }

    #[test]
    fn sweep_csv_labels_the_metric() {
        let rows = vec![
            SweepRow { sweep_value: 0.5, method: Method::RwaFull, mean: 0.75, error: None },
            SweepRow {
                sweep_value: 1.0,
                method: Method::RwaFull,
                mean: f64::NAN,
                error: Some("x".into()),
            },
        ];
        let csv = sweep_csv(&rows, Metric::State);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "sweep_value,method,mean_f_state");
        assert_eq!(lines[1], "0.500000000000,rwa-full,0.750000000000");
        assert_eq!(lines[2], "1.00000000000,rwa-full,nan");
    }

    #[test]
    fn manifest_round_trips_through_json() {
        let manifest = RunManifest {
            tool: "spinrwa".into(),
            version: "0.1.0".into(),
            command: "sweep".into(),
            params: ParamEcho { spin: 3.0, q: 1.0, b0: 0.05, b1: 0.5, omega: 1.0 },
            grid: GridEcho {
                axis: "omega".into(),
                start: 0.5,
                stop: 1.2,
                points: 71,
                window_pi: Some(20.0),
                samples_per_point: Some(1000),
            },
            methods: vec!["rwa-full".into(), "chrw".into()],
            metric: Some("operator".into()),
            m_target: None,
            initial: None,
            threads: Some(4),
            solver: SolverEcho {
                rk4_dt: None,
                rk4_steps_per_cycle: 200.0,
                rk4_renorm_interval: 1000,
                eig_offdiag_rel: 1e-13,
                xi_residual_rel: 1e-12,
            },
            wall_clock_seconds: 1.25,
            warnings: vec!["omega = 0.5: chrw failed: no root".into()],
        };
        let json = serde_json::to_string_pretty(&manifest).unwrap();
        let back: RunManifest = serde_json::from_str(&json).unwrap();
        assert_eq!(back, manifest);
        let json2 = serde_json::to_string_pretty(&back).unwrap();
        assert_eq!(json, json2);
    }
}
