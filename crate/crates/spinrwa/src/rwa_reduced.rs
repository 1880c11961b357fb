//! Rotating-wave evolution restricted to the near-resonant subspace.
//!
//! A drive at frequency ω picks out, at most, one pair of transitions of the
//! quadrupole ladder: the symmetric pair M ↔ M−1 and −M+1 ↔ −M, or — when the
//! smallest-|M| transition wins — a central block (three levels {+1, 0, −1}
//! for integer spin, the {+1/2, −1/2} pair for half-integer spin). Everything
//! outside the selected block just accumulates its static phase e^{−iE(m)t}
//! with E(m) = Q·m² + B0·m.
//!
//! Two-level blocks use the product form
//!   U(t) = diag(e^{∓iωt/2}, e^{±iωt/2}) · exp(−i H₂ t),
//! with H₂ = (±Δ/2)σz + (B1_eff/2)σx, multiplied by the pair's mean-energy
//! phase when it is re-embedded. The central three-level block uses the
//! explicit SU(3) closed form from [`crate::su3`] (with an eigendecomposition
//! fallback near spectral degeneracies).
//!
//! [`zeeman_rwa_propagator`] is the contrasting whole-space variant that
//! rotates about Iz at the drive frequency and keeps the quadrupole term in
//! the effective generator; it suits a dominant linear (not quadrupole) term.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::exact::static_phase_diagonal;
use crate::linalg::{expm_unitary, ComplexMatrix};
use crate::methods::{Method, Propagator};
use crate::spin::{m_values, spin_matrices, SpinParams};
use crate::su3::{su3_spectral, Su3ClosedForm};

/// Which resonant subspace a drive frequency selects.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockKind {
    /// Symmetric transition pair M ↔ M−1 and −M+1 ↔ −M with M ≥ 3/2.
    TwoLevelPair,
    /// The {+1, 0, −1} block of an integer spin.
    CentralThreeLevel,
    /// The {+1/2, −1/2} pair of a half-integer spin.
    CentralTwoLevelHalf,
}

impl BlockKind {
    pub fn name(&self) -> &'static str {
        match self {
            BlockKind::TwoLevelPair => "two-level-pair",
            BlockKind::CentralThreeLevel => "central-three-level",
            BlockKind::CentralTwoLevelHalf => "central-two-level-half",
        }
    }
}

/// Which member of a symmetric transition pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// M ↔ M−1 (positive-M side), resonance at (2M−1)Q + B0.
    Plus,
    /// −M+1 ↔ −M (negative-M side), resonance at (2M−1)Q − B0.
    Minus,
}

/// Resolved description of the block a drive frequency addresses.
#[derive(Debug, Clone, Copy)]
pub struct ReducedBlockSpec {
    /// Upper level M of the selected transition (1 for the central integer
    /// block, 1/2 for the central half-integer pair).
    pub m_target: f64,
    pub kind: BlockKind,
    /// Transition frequency (2M−1)Q + B0 of the positive-M side.
    pub omega0_plus: f64,
    /// Transition frequency (2M−1)Q − B0 of the negative-M side.
    pub omega0_minus: f64,
    /// Drive amplitude seen by the block: B1 times the relevant Ix matrix
    /// element (in the spin-1 model normalization for the three-level block).
    pub b1_eff: f64,
    /// Set when the drive is detuned from the nearest resonance by more than
    /// the neighbor-resonance spacing scale Q; the reduced description is
    /// then dubious.
    pub far_detuned: bool,
}

/// Pick the transition whose resonance (2M−1)Q + B0 lies closest to the drive
/// frequency; ties go to the smaller M.
pub fn select_block(params: &SpinParams) -> Result<ReducedBlockSpec> {
    params.validate()?;
    let spin = params.spin;
    let m_min = if params.is_integer_spin() { 1.0 } else { 0.5 };
    let steps = (spin - m_min).round() as usize;
    let mut best_d = f64::INFINITY;
    let mut best_m = m_min;
    for k in 0..=steps {
        let m = m_min + k as f64;
        let d = (params.omega - ((2.0 * m - 1.0) * params.q + params.b0)).abs();
        if d + 1e-12 < best_d {
            best_d = d;
            best_m = m;
        }
    }

    pinned_block(params, best_m)
}

/// Build the block description for an explicitly chosen upper level M,
/// bypassing the automatic resonance search. M must share the spin's parity
/// and satisfy m_min ≤ M ≤ I.
pub fn pinned_block(params: &SpinParams, m_target: f64) -> Result<ReducedBlockSpec> {
    params.validate()?;
    let spin = params.spin;
    let m_min = if params.is_integer_spin() { 1.0 } else { 0.5 };
    let offset = m_target - m_min;
    if (offset - offset.round()).abs() > 1e-9 || m_target < m_min - 1e-9 || m_target > spin + 1e-9
    {
        return Err(Error::InvalidParameter(format!(
            "target level {m_target} is not one of {m_min}, {}, ..., {spin} for spin {spin}",
            m_min + 1.0
        )));
    }
    let m = m_min + offset.round();

    let kind = if (m - 1.0).abs() < 1e-9 && params.is_integer_spin() {
        BlockKind::CentralThreeLevel
    } else if (m - 0.5).abs() < 1e-9 {
        BlockKind::CentralTwoLevelHalf
    } else {
        BlockKind::TwoLevelPair
    };
    let b1_eff = match kind {
        BlockKind::CentralThreeLevel => (spin * (spin + 1.0) / 2.0).sqrt() * params.b1,
        BlockKind::CentralTwoLevelHalf => params.b1 / 2.0 * (spin + 0.5),
        BlockKind::TwoLevelPair => {
            params.b1 / 2.0 * ((spin + m) * (spin - m + 1.0)).sqrt()
        }
    };
    let omega0_plus = (2.0 * m - 1.0) * params.q + params.b0;

    Ok(ReducedBlockSpec {
        m_target: m,
        kind,
        omega0_plus,
        omega0_minus: (2.0 * m - 1.0) * params.q - params.b0,
        b1_eff,
        far_detuned: (params.omega - omega0_plus).abs() > params.q,
    })
}

fn level_energy(params: &SpinParams, m: f64) -> f64 {
    params.q * m * m + params.b0 * m
}

fn two_level_generator(delta: f64, b1_eff: f64) -> ComplexMatrix {
    ComplexMatrix::from_fn(2, |r, c| {
        Complex64::new(
            match (r, c) {
                (0, 0) => delta / 2.0,
                (1, 1) => -delta / 2.0,
                _ => b1_eff / 2.0,
            },
            0.0,
        )
    })
}

/// Product-form propagator of one two-level block, in the frame where the
/// pair's mean energy has been removed (the assembler restores that phase).
///
/// Plus side: diag(e^{−iωt/2}, e^{+iωt/2})·exp(−iH₂t), H₂ with +Δ/2 on the
/// upper level, Δ = ω0₊ − ω. Minus side: the frame signs and the detuning
/// sign both flip, because the lower-M state of that pair is the higher-energy
/// one.
pub fn two_level_block_propagator(
    params: &SpinParams,
    spec: &ReducedBlockSpec,
    side: Side,
    t: f64,
) -> Result<ComplexMatrix> {
    match spec.kind {
        BlockKind::CentralThreeLevel => {
            return Err(Error::WrongBlockKind {
                expected: "two-level",
                got: spec.kind.name(),
            });
        }
        BlockKind::CentralTwoLevelHalf if side == Side::Minus => {
            return Err(Error::InvalidParameter(
                "the central half-integer block has a single transition; request Side::Plus"
                    .into(),
            ));
        }
        _ => {}
    }
    let omega = params.omega;
    let (delta, upper_sign) = match side {
        Side::Plus => (spec.omega0_plus - omega, -1.0),
        Side::Minus => (omega - spec.omega0_minus, 1.0),
    };
    let rotated = expm_unitary(&two_level_generator(delta, spec.b1_eff), t)?;
    let frame = ComplexMatrix::diagonal(&[
        Complex64::from_polar(1.0, upper_sign * omega * t / 2.0),
        Complex64::from_polar(1.0, -upper_sign * omega * t / 2.0),
    ]);
    Ok(frame.mul(&rotated))
}

/// Effective generator of the central three-level block in its rotating
/// frame, written on the spin-1 model operators:
/// (Q−ω)Sz² + B0·Sz + (B1_eff/2)·Sx.
pub fn central_heff(params: &SpinParams, spec: &ReducedBlockSpec) -> Result<ComplexMatrix> {
    if spec.kind != BlockKind::CentralThreeLevel {
        return Err(Error::WrongBlockKind {
            expected: "central-three-level",
            got: spec.kind.name(),
        });
    }
    let ops = spin_matrices(1.0)?;
    let szz = ops.iz.mul(&ops.iz);
    Ok(szz
        .scale_re(params.q - params.omega)
        .add(&ops.iz.scale_re(params.b0))
        .add(&ops.ix.scale_re(spec.b1_eff / 2.0)))
}

/// Central three-level propagator: the explicit SU(3) closed form when its
/// projector denominators are well conditioned, otherwise the
/// eigendecomposition route for the same operator.
pub fn three_level_su3_propagator(
    params: &SpinParams,
    spec: &ReducedBlockSpec,
    t: f64,
) -> Result<ComplexMatrix> {
    let heff = central_heff(params, spec)?;
    match Su3ClosedForm::new(&heff, params.omega) {
        Ok(cf) if cf.well_conditioned() => Ok(cf.propagator(t)),
        _ => su3_spectral(&heff, params.omega, t),
    }
}

/// Embed block propagators into the full space on top of the static phase
/// diagonal. The closures supply the block evolution (two-level blocks in
/// their mean-energy frame, the three-level block already including its Sz²
/// frame factor); this function fixes offsets and mean-energy phases, which
/// is shared by every reduced-subspace method.
pub fn assemble_with(
    params: &SpinParams,
    spec: &ReducedBlockSpec,
    t: f64,
    two_level: &dyn Fn(Side, f64) -> Result<ComplexMatrix>,
    three_level: &dyn Fn(f64) -> Result<ComplexMatrix>,
) -> Result<ComplexMatrix> {
    params.validate()?;
    let spin = params.spin;
    if spec.m_target > spin + 1e-9 {
        return Err(Error::InvalidParameter(format!(
            "block target M={} exceeds spin {}",
            spec.m_target, spin
        )));
    }
    let mut full = static_phase_diagonal(params, t);
    match spec.kind {
        BlockKind::CentralThreeLevel => {
            if !params.is_integer_spin() {
                return Err(Error::InvalidParameter(
                    "central three-level block requires integer spin".into(),
                ));
            }
            let block = three_level(t)?;
            if block.dim() != 3 {
                return Err(Error::DimensionMismatch {
                    a: block.dim(),
                    b: 3,
                });
            }
            // Levels {+1, 0, −1} sit at rows I−1..I+1; E(0) = 0 already sets
            // the block's phase reference, so no extra factor.
            full.set_block((spin - 1.0).round() as usize, &block);
        }
        BlockKind::CentralTwoLevelHalf => {
            if params.is_integer_spin() {
                return Err(Error::InvalidParameter(
                    "central two-level block requires half-integer spin".into(),
                ));
            }
            let block = two_level(Side::Plus, t)?;
            if block.dim() != 2 {
                return Err(Error::DimensionMismatch {
                    a: block.dim(),
                    b: 2,
                });
            }
            // Mean energy of the ±1/2 pair is Q/4.
            let phase = Complex64::from_polar(1.0, -params.q / 4.0 * t);
            full.set_block((spin - 0.5).round() as usize, &block.scale(phase));
        }
        BlockKind::TwoLevelPair => {
            let m = spec.m_target;
            let pair_min = if params.is_integer_spin() { 2.0 } else { 1.5 };
            if m < pair_min - 1e-9 {
                return Err(Error::InvalidParameter(format!(
                    "two-level pair blocks need M ≥ {pair_min}; M={m} belongs to a central block"
                )));
            }
            let plus = two_level(Side::Plus, t)?;
            let minus = two_level(Side::Minus, t)?;
            if plus.dim() != 2 || minus.dim() != 2 {
                return Err(Error::DimensionMismatch {
                    a: plus.dim().max(minus.dim()),
                    b: 2,
                });
            }
            let c_plus = 0.5 * (level_energy(params, m) + level_energy(params, m - 1.0));
            let c_minus = 0.5 * (level_energy(params, -m + 1.0) + level_energy(params, -m));
            full.set_block(
                (spin - m).round() as usize,
                &plus.scale(Complex64::from_polar(1.0, -c_plus * t)),
            );
            full.set_block(
                (spin + m - 1.0).round() as usize,
                &minus.scale(Complex64::from_polar(1.0, -c_minus * t)),
            );
        }
    }
    Ok(full)
}

/// Reduced rotating-wave propagator on the full space.
pub fn assemble_reduced(
    params: &SpinParams,
    spec: &ReducedBlockSpec,
    t: f64,
) -> Result<Propagator> {
    let matrix = assemble_with(
        params,
        spec,
        t,
        &|side, tt| two_level_block_propagator(params, spec, side, tt),
        &|tt| three_level_su3_propagator(params, spec, tt),
    )?;
    Ok(Propagator::new(matrix, t, Method::RwaReduced))
}

/// Whole-space rotating-wave propagator in the frame rotating about Iz:
/// U(t) = e^{−iωIz t} · exp(−i[(B0−ω)Iz + QIz² + (B1/2)Ix]t). Appropriate
/// when the linear term dominates; with a dominant quadrupole term the
/// rotating frame fails to make the drive slow and the approximation degrades.
pub fn zeeman_rwa_propagator(params: &SpinParams, t: f64) -> Result<Propagator> {
    params.validate()?;
    let ops = spin_matrices(params.spin)?;
    let heff = ops
        .iz
        .scale_re(params.b0 - params.omega)
        .add(&ops.iz.mul(&ops.iz).scale_re(params.q))
        .add(&ops.ix.scale_re(params.b1 / 2.0));
    let rotated = expm_unitary(&heff, t)?;
    let frame_entries: Vec<Complex64> = m_values(params.spin)
        .iter()
        .map(|m| Complex64::from_polar(1.0, -params.omega * m * t))
        .collect();
    let frame = ComplexMatrix::diagonal(&frame_entries);
    Ok(Propagator::new(
        frame.mul(&rotated),
        t,
        Method::RwaZeeman,
    ))
}

/// Closed form of the plus-side two-level product, expanded over
/// {1, σx, σy, σz} — a cross-check on [`two_level_block_propagator`].
#[derive(Debug, Clone, Copy)]
pub struct TwoLevelClosedForm {
    /// Detuning Δ = ω0 − ω.
    pub delta: f64,
    /// Generalized half-Rabi frequency Ω = √(Δ² + B1_eff²)/2.
    pub rabi: f64,
    pub b1_eff: f64,
    pub omega: f64,
}

impl TwoLevelClosedForm {
    pub fn new(omega0: f64, b1_eff: f64, omega: f64) -> Self {
        let delta = omega0 - omega;
        Self {
            delta,
            rabi: (delta * delta + b1_eff * b1_eff).sqrt() / 2.0,
            b1_eff,
            omega,
        }
    }

    /// Expansion coefficients [τ0, τx, τy, τz] at time t; they satisfy
    /// τ0² + (τx² + τy² + τz²)/4 = 1.
    pub fn tau(&self, t: f64) -> [f64; 4] {
        let half = self.omega * t / 2.0;
        let (sin_h, cos_h) = half.sin_cos();
        let (sin_r, cos_r) = (self.rabi * t).sin_cos();
        // sin(Ωt)/Ω, continued through Ω = 0.
        let s = if self.rabi.abs() > 1e-300 {
            sin_r / self.rabi
        } else {
            t
        };
        [
            cos_h * cos_r - 0.5 * self.delta * s * sin_h,
            self.b1_eff * s * cos_h,
            self.b1_eff * s * sin_h,
            self.delta * s * cos_h + 2.0 * cos_r * sin_h,
        ]
    }

    /// U(t) = τ0·1 − (i/2)(τx σx + τy σy + τz σz).
    pub fn matrix(&self, t: f64) -> ComplexMatrix {
        let [t0, tx, ty, tz] = self.tau(t);
        let mut u = ComplexMatrix::zeros(2);
        u.set(0, 0, Complex64::new(t0, -tz / 2.0));
        u.set(0, 1, Complex64::new(-ty / 2.0, -tx / 2.0));
        u.set(1, 0, Complex64::new(ty / 2.0, -tx / 2.0));
        u.set(1, 1, Complex64::new(t0, tz / 2.0));
        u
    }
}
