//! Parameter sweeps: average a fidelity metric over a fixed window while one
//! drive parameter walks a linear grid. The work is data-parallel across grid
//! points when the `parallel` feature is on, and the row order is identical
//! either way.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::exact::basis_state;
use crate::fidelity::{trace_methods, window_average, Metric};
use crate::methods::Method;
use crate::spin::SpinParams;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Which drive parameter the sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    Omega,
    B1,
}

impl SweepAxis {
    pub fn name(&self) -> &'static str {
        match self {
            SweepAxis::Omega => "omega",
            SweepAxis::B1 => "b1",
        }
    }
}

impl std::str::FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "omega" => Ok(SweepAxis::Omega),
            "b1" => Ok(SweepAxis::B1),
            other => Err(Error::InvalidParameter(format!(
                "unknown sweep axis '{other}' (expected omega or b1)"
            ))),
        }
    }
}

/// A fully specified sweep: the grid, the base parameters, and what to
/// measure.
#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub vary: SweepAxis,
    pub start: f64,
    pub stop: f64,
    pub points: usize,
    /// Parameters held fixed; the varied field is overridden per grid point.
    pub fixed: SpinParams,
    pub methods: Vec<Method>,
    /// Averaging window in units of T_π.
    pub average_window: f64,
    pub metric: Metric,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        self.fixed.validate()?;
        if !(self.start.is_finite() && self.stop.is_finite()) {
            return Err(Error::InvalidParameter(
                "sweep endpoints must be finite".into(),
            ));
        }
        if self.start < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "sweep start {} must be non-negative for axis {}",
                self.start,
                self.vary.name()
            )));
        }
        if self.start >= self.stop {
            return Err(Error::InvalidParameter(format!(
                "sweep start {} must be below stop {}",
                self.start, self.stop
            )));
        }
        if self.points < 2 {
            return Err(Error::InvalidParameter(format!(
                "sweep needs at least 2 points, got {}",
                self.points
            )));
        }
        if self.methods.is_empty() {
            return Err(Error::InvalidParameter(
                "sweep needs at least one method".into(),
            ));
        }
        if !(self.average_window.is_finite() && self.average_window > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "averaging window {} (in units of T_pi) must be positive",
                self.average_window
            )));
        }
        Ok(())
    }

    /// Inclusive linear grid from start to stop; the final point lands on
    /// `stop` exactly.
    pub fn grid(&self) -> Vec<f64> {
        let step = (self.stop - self.start) / (self.points - 1) as f64;
        (0..self.points)
            .map(|i| {
                if i + 1 == self.points {
                    self.stop
                } else {
                    self.start + i as f64 * step
                }
            })
            .collect()
    }

    /// The fixed parameters with the varied axis set to `value`.
    pub fn params_at(&self, value: f64) -> SpinParams {
        let mut p = self.fixed;
        match self.vary {
            SweepAxis::Omega => p.omega = value,
            SweepAxis::B1 => p.b1 = value,
        }
        p
    }
}

/// Sample count for a window of `w` T_π: 50 samples per period, floor of 2.
pub fn samples_for_window(w: f64) -> usize {
    ((50.0 * w).round() as usize).max(2)
}

/// Default probe state: the M = 0 level for integer spin, M = 1/2 for
/// half-integer.
pub fn default_initial_state(spin: f64) -> Result<Vec<Complex64>> {
    let m = if (2.0 * spin) as i64 % 2 == 0 { 0.0 } else { 0.5 };
    basis_state(spin, m)
}

/// One output row: the grid value, the method, and the windowed mean of the
/// metric (NaN when that method failed at that point, with the reason kept).
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub sweep_value: f64,
    pub method: Method,
    pub mean: f64,
    pub error: Option<String>,
}

/// Evaluate every requested method at one grid value. A failure that
/// precedes the per-method stage (bad parameters, reference integration,
/// undefined T_π) yields a NaN row per method rather than an error, so a
/// sweep can cross hostile regions of parameter space and keep going.
pub fn sweep_point(spec: &SweepSpec, value: f64) -> Vec<SweepRow> {
    let params = spec.params_at(value);
    let n = samples_for_window(spec.average_window);
    let traced = default_initial_state(params.spin).and_then(|initial| {
        trace_methods(&params, &spec.methods, spec.average_window, n, &initial)
    });
    match traced {
        Ok(traces) => traces
            .into_iter()
            .map(|mt| match mt.result.and_then(|tr| window_average(&tr, spec.metric)) {
                Ok(mean) => SweepRow {
                    sweep_value: value,
                    method: mt.method,
                    mean,
                    error: None,
                },
                Err(e) => SweepRow {
                    sweep_value: value,
                    method: mt.method,
                    mean: f64::NAN,
                    error: Some(e.to_string()),
                },
            })
            .collect(),
        Err(e) => spec
            .methods
            .iter()
            .map(|&method| SweepRow {
                sweep_value: value,
                method,
                mean: f64::NAN,
                error: Some(e.to_string()),
            })
            .collect(),
    }
}

/// Run the sweep across grid points in parallel (with the `parallel`
/// feature; otherwise sequentially). Rows come back grid-major, methods in
/// spec order within each grid value — the same order as the serial path.
#[cfg(feature = "parallel")]
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    let grid = spec.grid();
    Ok(grid
        .par_iter()
        .map(|&v| sweep_point(spec, v))
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect())
}

#[cfg(not(feature = "parallel"))]
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    run_sweep_serial(spec)
}

/// Sequential reference implementation; always available, used to check that
/// parallel execution changes nothing but wall-clock time.
pub fn run_sweep_serial(spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    let mut rows = Vec::with_capacity(spec.points * spec.methods.len());
    for v in spec.grid() {
        rows.extend(sweep_point(spec, v));
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_spec() -> SweepSpec {
        SweepSpec {
            vary: SweepAxis::Omega,
            start: 0.9,
            stop: 1.1,
            points: 4,
            fixed: SpinParams::new(1.0, 1.0, 0.05, 0.3, 1.0),
            methods: vec![Method::RwaReduced, Method::RwaFull],
            average_window: 0.5,
            metric: Metric::Operator,
        }
    }

    #[test]
    fn grid_is_inclusive_and_even() {
        let spec = SweepSpec {
            start: 0.5,
            stop: 1.2,
            points: 71,
            ..small_spec()
        };
        let grid = spec.grid();
        assert_eq!(grid.len(), 71);
        assert_eq!(grid[0], 0.5);
        assert_eq!(grid[70], 1.2);
        assert!((grid[50] - 1.0).abs() <= 1e-12);
        for w in grid.windows(2) {
            assert!((w[1] - w[0] - 0.01).abs() <= 1e-12);
        }
    }

    #[test]
    fn validation_rejects_bad_specs() {
        let mut spec = small_spec();
        spec.points = 1;
        assert!(spec.validate().is_err());
        let mut spec = small_spec();
        spec.stop = spec.start;
        assert!(spec.validate().is_err());
        let mut spec = small_spec();
        spec.methods.clear();
        assert!(spec.validate().is_err());
        let mut spec = small_spec();
        spec.average_window = 0.0;
        assert!(spec.validate().is_err());
        let mut spec = small_spec();
        spec.start = -0.1;
        assert!(spec.validate().is_err());
    }

    #[test]
    fn sample_counts_scale_with_window() {
        assert_eq!(samples_for_window(20.0), 1000);
        assert_eq!(samples_for_window(0.5), 25);
        assert_eq!(samples_for_window(0.001), 2);
    }

    #[test]
    fn failed_points_become_nan_rows() {
        // At ω = Q/2 with this drive strength the hybridized method has no
        // self-consistent renormalization, so that grid point must come back
        // NaN while the resonant endpoint stays finite.
        let spec = SweepSpec {
            vary: SweepAxis::Omega,
            start: 0.5,
            stop: 1.0,
            points: 2,
            fixed: SpinParams::new(3.0, 1.0, 0.05, 0.5, 1.0),
            methods: vec![Method::Chrw],
            average_window: 0.5,
            metric: Metric::State,
        };
        let rows = run_sweep_serial(&spec).unwrap();
        assert_eq!(rows.len(), 2);
        assert!(rows[0].mean.is_nan());
        assert!(rows[0].error.as_deref().unwrap().contains("root"));
        assert!(rows[1].mean.is_finite());
        assert!(rows[1].error.is_none());
    }

    #[test]
    fn parallel_matches_serial_bit_for_bit() {
        let spec = small_spec();
        let par = run_sweep(&spec).unwrap();
        let ser = run_sweep_serial(&spec).unwrap();
        assert_eq!(par.len(), ser.len());
        for (a, b) in par.iter().zip(&ser) {
            assert_eq!(a.sweep_value.to_bits(), b.sweep_value.to_bits());
            assert_eq!(a.method, b.method);
            assert_eq!(a.mean.to_bits(), b.mean.to_bits());
            assert_eq!(a.error, b.error);
        }
    }

    #[test]
    fn repeated_runs_are_deterministic() {
        let spec = small_spec();
        let first = run_sweep(&spec).unwrap();
        let second = run_sweep(&spec).unwrap();
        for (a, b) in first.iter().zip(&second) {
            assert_eq!(a.mean.to_bits(), b.mean.to_bits());
        }
    }
}
