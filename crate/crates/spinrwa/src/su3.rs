//! Closed-form evolution for an arbitrary 3×3 Hermitian generator, written as
//! an explicit three-term spectral sum instead of a numeric diagonalization.
//!
//! For a traceless Hermitian H₀ normalized to 𝓗 = √(2/u)·H₀ with
//! u = tr(H₀²), the three eigenvalues of 𝓗 are (2/√3)·sin(α + 2πk/3) with
//! α fixed by det 𝓗, and the spectral projectors are quadratic polynomials
//! in 𝓗. That turns exp(−iH₀t) into a finite formula; the dropped trace and
//! the diagonal frame factor are restored as scalar/diagonal phases.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{expm_unitary, ComplexMatrix};

/// Minimum |1 − 2cos(2α+4πk/3)| for the explicit projector formula to be
/// numerically trustworthy; below this the spectrum is (near-)degenerate and
/// callers should use the eigendecomposition route instead.
const CONDITION_FLOOR: f64 = 1e-6;

/// Precomputed pieces of the explicit 3×3 propagator
/// U(t) = 𝓡(t) · Σ_k P_k e^{−i√(2u/3)·sin(α+2πk/3)·t} · e^{−i(tr/3)t},
/// with 𝓡(t) = (e^{−iωt}−1)·diag(1,0,1) + 1 the rotating-frame factor.
#[derive(Debug, Clone)]
pub struct Su3ClosedForm {
    /// Normalization u = tr(H₀²) of the traceless part.
    pub u: f64,
    /// Spectral angle α.
    pub alpha: f64,
    /// Normalized traceless generator 𝓗 (tr 𝓗 = 0, tr 𝓗² = 2).
    pub hcal: ComplexMatrix,
    omega: f64,
    trace_third: f64,
    projectors: [ComplexMatrix; 3],
    min_denominator: f64,
}

impl Su3ClosedForm {
    /// Build the closed form for U(t) = e^{−iω·diag(1,0,1)·t}·exp(−i·heff·t).
    pub fn new(heff: &ComplexMatrix, omega: f64) -> Result<Self> {
        if heff.dim() != 3 {
            return Err(Error::DimensionMismatch {
                a: heff.dim(),
                b: 3,
            });
        }
        let scale = heff.max_abs().max(1.0);
        let herm = heff.hermiticity_residual();
        if herm > 1e-10 * scale {
            return Err(Error::NotHermitian {
                residual: herm,
                tol: 1e-10 * scale,
            });
        }

        let trace_third = heff.trace().re / 3.0;
        let h0 = heff.sub(&ComplexMatrix::identity(3).scale_re(trace_third));
        let u = h0.mul(&h0).trace().re;
        if u <= 1e-28 {
            return Err(Error::Numerical(
                "traceless generator part vanishes; use the trivial phase route".into(),
            ));
        }
        let hcal = h0.scale_re((2.0 / u).sqrt());

        // α from the determinant of the normalized generator.
        let det = det3(&hcal);
        let arg = 1.5 * 3.0_f64.sqrt() * det;
        if arg.abs() > 1.0 + 1e-10 {
            return Err(Error::ArccosDomain { value: arg });
        }
        let alpha = (arg.clamp(-1.0, 1.0).acos() - std::f64::consts::FRAC_PI_2) / 3.0;

        // Spectral projectors of 𝓗 as quadratic polynomials.
        let hcal2 = hcal.mul(&hcal);
        let identity = ComplexMatrix::identity(3);
        let mut projectors = Vec::with_capacity(3);
        let mut min_denominator = f64::INFINITY;
        for k in 0..3 {
            let theta = alpha + 2.0 * std::f64::consts::PI * k as f64 / 3.0;
            let denom = 1.0 - 2.0 * (2.0 * theta).cos();
            min_denominator = min_denominator.min(denom.abs());
            let numer = hcal2
                .add(&hcal.scale_re(2.0 * theta.sin() / 3.0_f64.sqrt()))
                .sub(&identity.scale_re((1.0 + 2.0 * (2.0 * theta).cos()) / 3.0));
            projectors.push(numer.scale_re(1.0 / denom));
        }
        let projectors: [ComplexMatrix; 3] = projectors.try_into().expect("three projectors");

        Ok(Self {
            u,
            alpha,
            hcal,
            omega,
            trace_third,
            projectors,
            min_denominator,
        })
    }

    /// Smallest projector denominator |1 − 2cos(2α+4πk/3)| encountered.
    pub fn min_denominator(&self) -> f64 {
        self.min_denominator
    }

    /// Whether the explicit sum is safe to evaluate (non-degenerate spectrum).
    pub fn well_conditioned(&self) -> bool {
        self.min_denominator > CONDITION_FLOOR
    }

    /// Rotating-frame prefactor 𝓡(t) = (e^{−iωt}−1)·Sz² + 1, which equals the
    /// diagonal e^{−iω·Sz²·t} for spin-1 (Sz² = diag(1,0,1)).
    pub fn rcal(&self, t: f64) -> ComplexMatrix {
        let phase = Complex64::from_polar(1.0, -self.omega * t);
        ComplexMatrix::diagonal(&[phase, Complex64::new(1.0, 0.0), phase])
    }

    /// Evaluate the explicit propagator at time t.
    pub fn propagator(&self, t: f64) -> ComplexMatrix {
        let freq = (2.0 * self.u / 3.0).sqrt();
        let mut sum = ComplexMatrix::zeros(3);
        for k in 0..3 {
            let theta = self.alpha + 2.0 * std::f64::consts::PI * k as f64 / 3.0;
            let phase = Complex64::from_polar(1.0, -freq * theta.sin() * t);
            sum = sum.add(&self.projectors[k].scale(phase));
        }
        let trace_phase = Complex64::from_polar(1.0, -self.trace_third * t);
        self.rcal(t).mul(&sum.scale(trace_phase))
    }
}

fn det3(m: &ComplexMatrix) -> f64 {
    let a = m.at(0, 0);
    let b = m.at(0, 1);
    let c = m.at(0, 2);
    let d = m.at(1, 0);
    let e = m.at(1, 1);
    let f = m.at(1, 2);
    let g = m.at(2, 0);
    let h = m.at(2, 1);
    let i = m.at(2, 2);
    let det = a * (e * i - f * h) - b * (d * i - f * g) + c * (d * h - e * g);
    det.re
}

/// Authoritative route for the same operator: diagonal frame times the
/// eigendecomposition exponential.
pub fn su3_spectral(heff: &ComplexMatrix, omega: f64, t: f64) -> Result<ComplexMatrix> {
    if heff.dim() != 3 {
        return Err(Error::DimensionMismatch {
            a: heff.dim(),
            b: 3,
        });
    }
    let phase = Complex64::from_polar(1.0, -omega * t);
    let frame = ComplexMatrix::diagonal(&[phase, Complex64::new(1.0, 0.0), phase]);
    Ok(frame.mul(&expm_unitary(heff, t)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::unitarity_residual;
    use crate::spin::spin_matrices;

    fn central_heff(q: f64, b0: f64, b1_eff: f64, omega: f64) -> ComplexMatrix {
        let ops = spin_matrices(1.0).unwrap();
        let szz = ops.iz.mul(&ops.iz);
        szz.scale_re(q - omega)
            .add(&ops.iz.scale_re(b0))
            .add(&ops.ix.scale_re(b1_eff / 2.0))
    }

    #[test]
    fn normalization_invariants() {
        let heff = central_heff(1.0, 0.05, 0.5 * 6.0_f64.sqrt(), 1.0);
        let cf = Su3ClosedForm::new(&heff, 1.0).unwrap();
        assert!(cf.u > 0.0);
        assert!(cf.hcal.trace().norm() <= 1e-12);
        assert!((cf.hcal.mul(&cf.hcal).trace().re - 2.0).abs() <= 1e-10);
    }

    #[test]
    fn identity_at_time_zero() {
        let heff = central_heff(1.0, 0.05, 0.5, 1.0);
        let cf = Su3ClosedForm::new(&heff, 1.0).unwrap();
        let u = cf.propagator(0.0);
        assert!(u.sub(&ComplexMatrix::identity(3)).max_abs() <= 1e-12);
    }

    #[test]
    fn explicit_sum_matches_eigendecomposition() {
        let mut worst: f64 = 0.0;
        for (bi, b0) in [0.02, 0.05, 0.1].iter().enumerate() {
            for (bj, b1) in [0.2, 0.5, 0.9].iter().enumerate() {
                for (bk, omega) in [0.8, 1.0, 1.3].iter().enumerate() {
                    let heff = central_heff(1.0, *b0, *b1, *omega);
                    let cf = Su3ClosedForm::new(&heff, *omega).unwrap();
                    assert!(cf.well_conditioned(), "grid point ({bi},{bj},{bk})");
                    for step in 1..6 {
                        let t = 0.47 * step as f64;
                        let explicit = cf.propagator(t);
                        let spectral = su3_spectral(&heff, *omega, t).unwrap();
                        worst = worst.max(explicit.sub(&spectral).max_abs());
                        assert!(unitarity_residual(&explicit) <= 1e-9);
                    }
                }
            }
        }
        assert!(worst <= 1e-8, "explicit vs spectral disagree: {worst:.2e}");
    }

    #[test]
    fn degenerate_spectrum_flagged() {
        // With no drive and no static field the generator is diagonal with a
        // repeated eigenvalue; the projector denominators collapse.
        let heff = central_heff(1.0, 0.0, 0.0, 0.7);
        let cf = Su3ClosedForm::new(&heff, 0.7).unwrap();
        assert!(!cf.well_conditioned());
    }

    #[test]
    fn vanishing_traceless_part_rejected() {
        // ω = Q, B0 = B1 = 0 leaves only a multiple of the identity... here
        // exactly zero, so the normalized generator is undefined.
        let heff = ComplexMatrix::zeros(3);
        assert!(Su3ClosedForm::new(&heff, 1.0).is_err());
    }

    #[test]
    fn frame_factor_is_sz_squared_phase() {
        let heff = central_heff(1.0, 0.05, 0.5, 1.2);
        let cf = Su3ClosedForm::new(&heff, 1.2).unwrap();
        let r = cf.rcal(0.9);
        let expect = Complex64::from_polar(1.0, -1.2 * 0.9);
        assert!((r.at(0, 0) - expect).norm() <= 1e-15);
        assert_eq!(r.at(1, 1), Complex64::new(1.0, 0.0));
        assert!((r.at(2, 2) - expect).norm() <= 1e-15);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(Su3ClosedForm::new(&ComplexMatrix::identity(4), 1.0).is_err());
        let mut skew = ComplexMatrix::zeros(3);
        skew.set(0, 1, Complex64::new(1.0, 0.0));
        assert!(matches!(
            Su3ClosedForm::new(&skew, 1.0),
            Err(Error::NotHermitian { .. })
        ));
    }
}
