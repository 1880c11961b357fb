//! Method labels, the tagged propagator type, and a uniform dispatch entry
//! point used by the fidelity tracer, the sweep driver, and the CLI.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;
use crate::spin::SpinParams;

/// The one basis convention used crate-wide.
pub const BASIS_DESCENDING_M: &str = "|I,M> with M descending from +I to -I";

/// Evolution methods selectable by name (CLI spelling in parentheses).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    /// Numerical integration of the time-dependent Schrödinger equation (`exact`).
    Exact,
    /// Rotating-frame approximation suited to a dominant static field (`rwa-zeeman`).
    RwaZeeman,
    /// Resonant-subspace closed forms with static phases elsewhere (`rwa-reduced`).
    RwaReduced,
    /// Full-Hilbert-space rotating-wave method via the sign-of-M frame (`rwa-full`).
    RwaFull,
    /// Counterrotating-hybridized variant on the reduced subspaces (`chrw`).
    Chrw,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::Exact,
        Method::RwaZeeman,
        Method::RwaReduced,
        Method::RwaFull,
        Method::Chrw,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Method::Exact => "exact",
            Method::RwaZeeman => "rwa-zeeman",
            Method::RwaReduced => "rwa-reduced",
            Method::RwaFull => "rwa-full",
            Method::Chrw => "chrw",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "exact" => Ok(Method::Exact),
            "rwa-zeeman" => Ok(Method::RwaZeeman),
            "rwa-reduced" => Ok(Method::RwaReduced),
            "rwa-full" => Ok(Method::RwaFull),
            "chrw" => Ok(Method::Chrw),
            other => Err(Error::InvalidParameter(format!(
                "unknown method '{other}' (expected exact, rwa-zeeman, rwa-reduced, rwa-full, or chrw)"
            ))),
        }
    }
}

/// A unitary evolution operator tagged with its time, producing method, and
/// basis convention.
#[derive(Debug, Clone)]
pub struct Propagator {
    pub matrix: ComplexMatrix,
    pub t: f64,
    pub method: Method,
    pub basis: &'static str,
}

impl Propagator {
    pub fn new(matrix: ComplexMatrix, t: f64, method: Method) -> Self {
        Self {
            matrix,
            t,
            method,
            basis: BASIS_DESCENDING_M,
        }
    }
}

/// Evaluate one method's propagator at time t. The exact method integrates
/// from scratch at default solver settings; closed-form methods evaluate
/// directly. Prefer the batch entry points (`fidelity::trace_methods`,
/// `exact::rk4_checkpoints`) when many times are needed.
pub fn propagator(method: Method, params: &SpinParams, t: f64) -> Result<ComplexMatrix> {
    params.validate()?;
    match method {
        Method::Exact => {
            let cfg = crate::exact::ExactSolverConfig::for_params(params);
            Ok(crate::exact::rk4_propagator(params, t, &cfg)?.matrix)
        }
        Method::RwaZeeman => Ok(crate::rwa_reduced::zeeman_rwa_propagator(params, t)?.matrix),
        Method::RwaReduced => {
            let spec = crate::rwa_reduced::select_block(params)?;
            Ok(crate::rwa_reduced::assemble_reduced(params, &spec, t)?.matrix)
        }
        Method::RwaFull => {
            if params.is_integer_spin() {
                Ok(crate::rwa_full::full_rwa_integer(params, t)?.matrix)
            } else {
                Ok(crate::rwa_full::full_rwa_half_integer(params, t)?
                    .propagator
                    .matrix)
            }
        }
        Method::Chrw => {
            let spec = crate::rwa_reduced::select_block(params)?;
            Ok(crate::chrw::assemble_chrw(params, &spec, t)?.matrix)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.name().parse::<Method>().unwrap(), m);
            assert_eq!(format!("{m}"), m.name());
        }
        assert!("rwa_full".parse::<Method>().is_err());
        assert!("".parse::<Method>().is_err());
        assert_eq!(" chrw ".parse::<Method>().unwrap(), Method::Chrw);
    }
}
