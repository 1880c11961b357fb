//! Whole-space rotating-wave method built on the sign-of-M frame.
//!
//! For integer spin the diagonal operator |Iz| = Iz·Ia (Ia = sign of M) makes
//! every ladder transition rotate at the same frequency, so one rotating
//! frame serves all of them at once. Dropping the counter-rotating parts
//! leaves a time-independent generator and the product form
//!
//! ```text
//! U(t) = e^{−iω|Iz|t} · exp(−i[Q·Iz² − ω·|Iz| + B0·Iz + (B1/2)·Ix]t).
//! ```
//!
//! A half-integer spin J has no M = 0 level to anchor the sign frame.  It is
//! instead composed as spin-1/2 ⊗ spin-(J−1/2); the same construction on the
//! product space is compressed back onto the stretched-J multiplet with the
//! angular-momentum-composition isometry. The compression is not exactly
//! unitary — the defect is reported as `leakage` — so the compressed matrix
//! is polar-projected back to the unitary group, and the constant Q/4 energy
//! offset of the half-integer ladder is restored as a global phase.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{expm_unitary, polar_unitary, ComplexMatrix};
use crate::methods::{Method, Propagator};
use crate::spin::{clebsch_embed, ia_operator, spin_matrices, SpinParams};

/// e^{−i·D·t} for a diagonal real operator D, evaluated entrywise.
fn diagonal_phase(diag_op: &ComplexMatrix, t: f64) -> ComplexMatrix {
    let n = diag_op.dim();
    let entries: Vec<Complex64> = (0..n)
        .map(|k| Complex64::from_polar(1.0, -diag_op.at(k, k).re * t))
        .collect();
    ComplexMatrix::diagonal(&entries)
}

/// Frame operator and effective generator of the integer-spin construction.
#[derive(Debug, Clone)]
pub struct FullRwaGenerator {
    /// |Iz| = Iz·Ia, the diagonal frame operator (units of the drive
    /// frequency).
    pub frame: ComplexMatrix,
    /// Q·Iz² − ω·|Iz| + B0·Iz + (B1/2)·Ix.
    pub heff: ComplexMatrix,
}

impl FullRwaGenerator {
    pub fn new(params: &SpinParams) -> Result<Self> {
        params.validate()?;
        if !params.is_integer_spin() {
            return Err(Error::InvalidParameter(
                "sign-of-M frame needs an M = 0 level; use the half-integer construction".into(),
            ));
        }
        let ops = spin_matrices(params.spin)?;
        let frame = ops.iz.mul(&ia_operator(params.spin)?);
        let heff = ops
            .iz
            .mul(&ops.iz)
            .scale_re(params.q)
            .sub(&frame.scale_re(params.omega))
            .add(&ops.iz.scale_re(params.b0))
            .add(&ops.ix.scale_re(params.b1 / 2.0));
        Ok(Self { frame, heff })
    }
}

/// Integer-spin whole-space rotating-wave propagator.
pub fn full_rwa_integer(params: &SpinParams, t: f64) -> Result<Propagator> {
    let gen = FullRwaGenerator::new(params)?;
    let u = diagonal_phase(&gen.frame, params.omega * t).mul(&expm_unitary(&gen.heff, t)?);
    Ok(Propagator::new(u, t, Method::RwaFull))
}

/// Result of the half-integer construction: the compressed propagator plus
/// the size of the compression defect.
#[derive(Debug, Clone)]
pub struct HalfIntegerOutcome {
    pub propagator: Propagator,
    /// max |U_prod·E − E·U_J| over entries, measured before the polar
    /// projection.
    pub leakage: f64,
    /// Set when the leakage exceeds 1e-6 and the polar projection is doing
    /// real work rather than absorbing roundoff.
    pub leakage_warning: bool,
}

/// Half-integer-spin propagator via the spin-1/2 ⊗ spin-(J−1/2) product
/// space.
pub fn full_rwa_half_integer(params: &SpinParams, t: f64) -> Result<HalfIntegerOutcome> {
    params.validate()?;
    if params.is_integer_spin() {
        return Err(Error::InvalidParameter(
            "integer spin has an M = 0 level; use the direct sign-of-M construction".into(),
        ));
    }
    let i_int = params.spin - 0.5;
    let dim_i = (2.0 * i_int + 1.0).round() as usize;

    // Operators on the integer factor. J = 1/2 composes with a spin-0 factor
    // whose operators all vanish.
    let (iz_i, ix_i, abs_iz_i) = if dim_i == 1 {
        (
            ComplexMatrix::zeros(1),
            ComplexMatrix::zeros(1),
            ComplexMatrix::zeros(1),
        )
    } else {
        let ops = spin_matrices(i_int)?;
        let abs_iz = ops.iz.mul(&ia_operator(i_int)?);
        (ops.iz.clone(), ops.ix.clone(), abs_iz)
    };
    let s_ops = spin_matrices(0.5)?;
    let one_s = ComplexMatrix::identity(2);
    let one_i = ComplexMatrix::identity(dim_i);

    let h_int = iz_i
        .mul(&iz_i)
        .scale_re(params.q)
        .sub(&abs_iz_i.scale_re(params.omega))
        .add(&iz_i.scale_re(params.b0))
        .add(&ix_i.scale_re(params.b1 / 2.0));
    let h_s = s_ops
        .iz
        .scale_re(params.b0 - params.omega)
        .add(&s_ops.ix.scale_re(params.b1 / 2.0));
    let h_prod = one_s
        .kron(&h_int)
        .add(&h_s.kron(&one_i))
        .add(&s_ops.iz.kron(&iz_i).scale_re(2.0 * params.q));

    // Both frame factors are diagonal, so they combine into one phase
    // diagonal over |m_i| + m_s.
    let frame_prod = one_s.kron(&abs_iz_i).add(&s_ops.iz.kron(&one_i));
    let u_prod = diagonal_phase(&frame_prod, params.omega * t).mul(&expm_unitary(&h_prod, t)?);

    // Compress onto the stretched-J multiplet and measure the defect.
    let map = clebsch_embed(i_int)?;
    let embed = &map.embedding;
    let u_prod_e = u_prod.mul_rect(embed);
    let u_j_rect = embed.adjoint().mul(&u_prod_e);
    let leakage = u_prod_e.sub(&embed.mul(&u_j_rect)).max_abs();

    let unitary = polar_unitary(&u_j_rect.into_square())?;
    let phased = unitary.scale(Complex64::from_polar(1.0, -params.q / 4.0 * t));

    Ok(HalfIntegerOutcome {
        propagator: Propagator::new(phased, t, Method::RwaFull),
        leakage,
        leakage_warning: leakage > 1e-6,
    })
}
