//! Fidelity metrics against the integrated reference, and the tracing driver
//! that evaluates every requested method on one shared time grid.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::exact::{rk4_checkpoints, ExactSolverConfig};
use crate::linalg::ComplexMatrix;
use crate::methods::Method;
use crate::spin::SpinParams;

/// Normalized overlap-squared of two unitaries: |Tr[a†·b]/N|².
pub fn operator_fidelity(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            a: a.dim(),
            b: b.dim(),
        });
    }
    let n = a.dim() as f64;
    let f = (a.adjoint().mul(b).trace() / n).norm_sqr();
    if f > 1.0 + 1e-9 {
        return Err(Error::Numerical(format!(
            "operator fidelity {f} exceeds 1 beyond roundoff; inputs are not unitary"
        )));
    }
    Ok(f.clamp(0.0, 1.0))
}

/// Overlap magnitude |⟨a|b⟩| of two normalized states.
pub fn state_fidelity(a: &[Complex64], b: &[Complex64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            a: a.len(),
            b: b.len(),
        });
    }
    for (name, v) in [("first", a), ("second", b)] {
        let norm = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-8 {
            return Err(Error::InvalidParameter(format!(
                "{name} state has norm {norm}, expected 1 within 1e-8"
            )));
        }
    }
    let overlap = a
        .iter()
        .zip(b)
        .map(|(x, y)| x.conj() * y)
        .sum::<Complex64>()
        .norm();
    Ok(overlap.min(1.0))
}

/// Inversion timescale of the resonantly driven system:
/// T_π = π / √(I(I+1)B1²/2 + (Q−ω)²).
///
/// With no drive exactly on the quadrupole resonance there is no inversion
/// and no timescale to normalize by.
pub fn t_pi(params: &SpinParams) -> Result<f64> {
    params.validate()?;
    let spin = params.spin;
    let rate_sq = 0.5 * spin * (spin + 1.0) * params.b1 * params.b1
        + (params.q - params.omega) * (params.q - params.omega);
    if rate_sq <= 1e-300 {
        return Err(Error::UndefinedTimescale);
    }
    Ok(std::f64::consts::PI / rate_sq.sqrt())
}

/// Which fidelity a consumer wants averaged or tabulated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Operator,
    State,
}

impl Metric {
    /// Column label used in sweep output.
    pub fn column_name(&self) -> &'static str {
        match self {
            Metric::Operator => "mean_F_op",
            Metric::State => "mean_f_state",
        }
    }
}

impl std::str::FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "operator" | "f_op" | "op" => Ok(Metric::Operator),
            "state" | "f_state" => Ok(Metric::State),
            other => Err(Error::InvalidParameter(format!(
                "unknown metric '{other}' (expected operator or state)"
            ))),
        }
    }
}

/// Fidelities of one method over a shared time grid.
#[derive(Debug, Clone)]
pub struct FidelityTrace {
    pub method: Method,
    /// Sample times t_k = k·t_max/n for k = 1..n.
    pub times: Vec<f64>,
    /// The same times in units of T_π.
    pub times_pi: Vec<f64>,
    /// |⟨ψ_exact(t)|ψ_method(t)⟩| per sample.
    pub f_state: Vec<f64>,
    /// |Tr[U_exact†·U_method]/N|² per sample.
    pub f_op: Vec<f64>,
    pub initial_state: Vec<Complex64>,
}

/// Per-method outcome of a tracing run; a failing method does not abort the
/// others.
#[derive(Debug, Clone)]
pub struct MethodTrace {
    pub method: Method,
    pub result: Result<FidelityTrace>,
}

/// The sample grid `trace_methods` evaluates on: t_k = k·(t_max_pi·T_π)/n
/// for k = 1..=n, returned as (absolute times, times in units of T_π).
pub fn trace_grid(
    params: &SpinParams,
    t_max_pi: f64,
    n_samples: usize,
) -> Result<(Vec<f64>, Vec<f64>)> {
    if !(t_max_pi.is_finite() && t_max_pi > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "trace window {t_max_pi} (in units of T_pi) must be positive"
        )));
    }
    if n_samples == 0 {
        return Err(Error::InvalidParameter("need at least one sample".into()));
    }
    let period = t_pi(params)?;
    let t_max = t_max_pi * period;
    let times: Vec<f64> = (1..=n_samples)
        .map(|k| k as f64 * t_max / n_samples as f64)
        .collect();
    let times_pi: Vec<f64> = times.iter().map(|t| t / period).collect();
    Ok((times, times_pi))
}

fn normalized(v: &[Complex64]) -> Vec<Complex64> {
    let norm = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    if norm > 0.0 {
        v.iter().map(|x| x / norm).collect()
    } else {
        v.to_vec()
    }
}

/// Trace every requested method against one shared integration of the exact
/// propagator, on the grid t_k = k·(t_max_pi·T_π)/n_samples, k = 1..n.
///
/// Evolved states are renormalized before the overlap so the comparison
/// measures direction, not the integrator's ~1e-7 norm drift. Requesting
/// `Method::Exact` yields its honest self-trace (identically 1 up to
/// roundoff), useful as a pipeline check.
pub fn trace_methods(
    params: &SpinParams,
    methods: &[Method],
    t_max_pi: f64,
    n_samples: usize,
    initial: &[Complex64],
) -> Result<Vec<MethodTrace>> {
    trace_methods_with(params, methods, t_max_pi, n_samples, initial, &|m, p, t| {
        crate::methods::propagator(m, p, t)
    })
}

/// `trace_methods` with the per-method propagator injected, for callers that
/// override the default construction (e.g. pinning the reduced-block target
/// level instead of auto-selecting it). `Method::Exact` always refers to the
/// shared reference integration.
pub fn trace_methods_with(
    params: &SpinParams,
    methods: &[Method],
    t_max_pi: f64,
    n_samples: usize,
    initial: &[Complex64],
    prop: &dyn Fn(Method, &SpinParams, f64) -> Result<ComplexMatrix>,
) -> Result<Vec<MethodTrace>> {
    params.validate()?;
    if initial.len() != params.dim() {
        return Err(Error::DimensionMismatch {
            a: initial.len(),
            b: params.dim(),
        });
    }
    let norm = initial.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > 1e-8 {
        return Err(Error::InvalidParameter(format!(
            "initial state has norm {norm}, expected 1 within 1e-8"
        )));
    }

    let (times, times_pi) = trace_grid(params, t_max_pi, n_samples)?;

    let cfg = ExactSolverConfig::for_params(params);
    let refs = rk4_checkpoints(params, &times, &cfg)?;
    let ref_states: Vec<Vec<Complex64>> = refs
        .iter()
        .map(|u| normalized(&u.apply(initial)))
        .collect();

    let mut out = Vec::with_capacity(methods.len());
    for &method in methods {
        let result = (|| -> Result<FidelityTrace> {
            let mut f_state = Vec::with_capacity(n_samples);
            let mut f_op = Vec::with_capacity(n_samples);
            for (k, &t) in times.iter().enumerate() {
                let u = match method {
                    Method::Exact => refs[k].clone(),
                    _ => prop(method, params, t)?,
                };
                let psi = normalized(&u.apply(initial));
                f_state.push(state_fidelity(&ref_states[k], &psi)?);
                f_op.push(operator_fidelity(&refs[k], &u)?);
            }
            Ok(FidelityTrace {
                method,
                times: times.clone(),
                times_pi: times_pi.clone(),
                f_state,
                f_op,
                initial_state: initial.to_vec(),
            })
        })();
        out.push(MethodTrace { method, result });
    }
    Ok(out)
}

/// Mean of the chosen metric over every sample of the trace; the trace's own
/// grid defines the averaging window.
pub fn window_average(trace: &FidelityTrace, metric: Metric) -> Result<f64> {
    let values = match metric {
        Metric::Operator => &trace.f_op,
        Metric::State => &trace.f_state,
    };
    if values.is_empty() {
        return Err(Error::InvalidParameter(
            "cannot average an empty trace".into(),
        ));
    }
    Ok(values.iter().sum::<f64>() / values.len() as f64)
}
