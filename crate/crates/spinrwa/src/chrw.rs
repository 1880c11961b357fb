//! Counterrotating-hybridized rotating-wave evolution on the reduced blocks.
//!
//! Instead of dropping the counter-rotating half of the drive outright, a
//! time-periodic frame kick e^{−iφ(t)·X} with φ(t) = (B̃ξ/ω)·sin(ωt) absorbs
//! an adjustable share ξ of it. Averaging the still-oscillating remainder
//! turns the fast phases into Bessel-function renormalizations, and ξ is
//! fixed self-consistently as a root of
//!
//! ```text
//! κ·J₁(2·B̃·ξ/ω) = B̃·(1−ξ),
//! ```
//!
//! with κ the addressed transition frequency (Q for the central three-level
//! block, the per-side transition frequency for two-level blocks) and B̃ the
//! block drive amplitude. ξ → 0 recovers the plain rotating-wave forms; the
//! solved ξ balances the kicked and averaged parts of the drive.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{expm_unitary, ComplexMatrix};
use crate::methods::{Method, Propagator};
use crate::rwa_reduced::{assemble_with, BlockKind, ReducedBlockSpec, Side};
use crate::spin::{spin_matrices, SpinParams};
use crate::su3::{su3_spectral, Su3ClosedForm};

/// Largest |x| the power series evaluates; beyond this the alternating sum
/// cancels too heavily for full precision.
pub const BESSEL_MAX_ARG: f64 = 30.0;

/// Bessel function of the first kind, orders −1, 0, 1, by power series.
pub fn bessel_j(order: i32, x: f64) -> Result<f64> {
    if !(-1..=1).contains(&order) {
        return Err(Error::InvalidParameter(format!(
            "Bessel order {order} unsupported here (only -1, 0, 1)"
        )));
    }
    if !x.is_finite() || x.abs() > BESSEL_MAX_ARG {
        return Err(Error::BesselDomain {
            x,
            max: BESSEL_MAX_ARG,
        });
    }
    if order == -1 {
        return Ok(-bessel_j(1, x)?);
    }
    let half = x / 2.0;
    let h2 = half * half;
    let mut term = if order == 0 { 1.0 } else { half };
    let mut sum = term;
    for k in 1..200 {
        let kf = k as f64;
        term *= -h2 / (kf * (kf + order as f64));
        sum += term;
        if term.abs() < 1e-15 * sum.abs().max(1e-300) {
            break;
        }
    }
    Ok(sum)
}

/// Solved frame-sharing parameter ξ together with the Bessel factors the
/// effective generators need. z₁ = B̃ξ/ω, z₂ = 2B̃ξ/ω.
#[derive(Debug, Clone, Copy)]
pub struct ChrwParams {
    pub xi: f64,
    /// Block drive amplitude B̃ entering the self-consistency equation.
    pub b1_eff: f64,
    /// J₀(z₂).
    pub j0_2: f64,
    /// J₁(z₂).
    pub j1_2: f64,
    /// J₀(z₁).
    pub j0_1: f64,
    /// J₁(z₁).
    pub j1_1: f64,
    /// Renormalized drive amplitude B̃(1−ξ).
    pub b_renorm: f64,
    /// Set when the self-consistency equation had several roots in [0, 1]
    /// and the one nearest ω/(κ+ω) was picked.
    pub root_ambiguous: bool,
}

impl ChrwParams {
    /// Evaluate the Bessel factors for a prescribed ξ without solving the
    /// self-consistency equation — a diagnostic; ξ = 0 reproduces the plain
    /// rotating-wave generators.
    pub fn with_xi(xi: f64, b1_eff: f64, omega: f64) -> Result<Self> {
        if !xi.is_finite() || !(0.0..=1.0).contains(&xi) {
            return Err(Error::InvalidParameter(format!(
                "xi = {xi} outside [0, 1]"
            )));
        }
        if !(omega.is_finite() && omega > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "drive frequency omega = {omega} must be positive"
            )));
        }
        if !(b1_eff.is_finite() && b1_eff >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "block drive amplitude b1_eff = {b1_eff} must be non-negative"
            )));
        }
        let z1 = b1_eff * xi / omega;
        let z2 = 2.0 * z1;
        Ok(Self {
            xi,
            b1_eff,
            j0_2: bessel_j(0, z2)?,
            j1_2: bessel_j(1, z2)?,
            j0_1: bessel_j(0, z1)?,
            j1_1: bessel_j(1, z1)?,
            b_renorm: b1_eff * (1.0 - xi),
            root_ambiguous: false,
        })
    }
}

/// Solve κ·J₁(2B̃ξ/ω) = B̃(1−ξ) for ξ ∈ [0, 1].
///
/// The undriven limit B̃ = 0 makes the equation degenerate and returns ξ = 1
/// by convention (every factor it feeds then drops out). When the scan finds
/// no sign change the root genuinely does not exist for these parameters and
/// the solver reports that rather than extrapolating.
pub fn solve_xi(kappa: f64, b1_eff: f64, omega: f64) -> Result<ChrwParams> {
    for (name, v) in [("kappa", kappa), ("b1_eff", b1_eff), ("omega", omega)] {
        if !v.is_finite() {
            return Err(Error::InvalidParameter(format!("{name} = {v} is not finite")));
        }
    }
    if b1_eff < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "block drive amplitude b1_eff = {b1_eff} must be non-negative"
        )));
    }
    if omega <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "drive frequency omega = {omega} must be positive"
        )));
    }
    if kappa <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "transition frequency kappa = {kappa} must be positive"
        )));
    }
    if b1_eff == 0.0 {
        return ChrwParams::with_xi(1.0, 0.0, omega);
    }

    let g = |xi: f64| -> Result<f64> {
        Ok(kappa * bessel_j(1, 2.0 * b1_eff * xi / omega)? - b1_eff * (1.0 - xi))
    };

    const SCAN: usize = 64;
    let mut grid = Vec::with_capacity(SCAN + 1);
    for i in 0..=SCAN {
        let xi = i as f64 / SCAN as f64;
        grid.push((xi, g(xi)?));
    }

    let tol = 1e-12 * kappa.max(b1_eff);
    let mut roots: Vec<f64> = Vec::new();
    let push_root = |r: f64, roots: &mut Vec<f64>| {
        if !roots.iter().any(|&x| (x - r).abs() < 1e-9) {
            roots.push(r);
        }
    };
    for w in grid.windows(2) {
        let (a, fa) = w[0];
        let (b, fb) = w[1];
        if fa.abs() <= tol {
            push_root(a, &mut roots);
            continue;
        }
        if fa * fb < 0.0 {
            let (mut lo, mut hi, mut flo) = (a, b, fa);
            for _ in 0..200 {
                if hi - lo < 1e-15 {
                    break;
                }
                let mid = 0.5 * (lo + hi);
                let fm = g(mid)?;
                if fm == 0.0 {
                    lo = mid;
                    hi = mid;
                    break;
                }
                if flo * fm < 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                    flo = fm;
                }
            }
            let root = 0.5 * (lo + hi);
            if g(root)?.abs() <= tol {
                push_root(root, &mut roots);
            }
        }
    }
    if let Some(&(last_xi, last_g)) = grid.last() {
        if last_g.abs() <= tol {
            push_root(last_xi, &mut roots);
        }
    }

    if roots.is_empty() {
        return Err(Error::XiRootNotFound(format!(
            "no root of kappa*J1(2*b1_eff*xi/omega) = b1_eff*(1-xi) in [0, 1] \
             for kappa = {kappa}, b1_eff = {b1_eff}, omega = {omega} \
             ({} scan points)",
            SCAN + 1
        )));
    }
    let anchor = omega / (kappa + omega);
    let ambiguous = roots.len() > 1;
    let xi = roots
        .iter()
        .copied()
        .min_by(|a, b| {
            (a - anchor)
                .abs()
                .partial_cmp(&(b - anchor).abs())
                .expect("finite root distances")
        })
        .expect("non-empty root list");
    let mut cp = ChrwParams::with_xi(xi, b1_eff, omega)?;
    cp.root_ambiguous = ambiguous;
    Ok(cp)
}

/// Effective generator of the central three-level block after the kicked
/// frame and harmonic averaging:
/// [(1+J₀(z₂))Q/2 − ω]Sz² + (1−J₀(z₂))Q/2·Sy² + drive·Sx
/// + B0·J₀(z₁)·Sz + B0·J₁(z₁)·(SxSz + SzSx),
/// with drive = [B̃(1−ξ) + Q·J₁(z₂)]/2.
fn chrw_central_heff(params: &SpinParams, cp: &ChrwParams) -> Result<ComplexMatrix> {
    let ops = spin_matrices(1.0)?;
    let szz = ops.iz.mul(&ops.iz);
    let syy = ops.iy.mul(&ops.iy);
    let anti = ops.ix.mul(&ops.iz).add(&ops.iz.mul(&ops.ix));
    let drive = 0.5 * (cp.b_renorm + params.q * cp.j1_2);
    Ok(szz
        .scale_re(0.5 * (1.0 + cp.j0_2) * params.q - params.omega)
        .add(&syy.scale_re(0.5 * (1.0 - cp.j0_2) * params.q))
        .add(&ops.ix.scale_re(drive))
        .add(&ops.iz.scale_re(params.b0 * cp.j0_1))
        .add(&anti.scale_re(params.b0 * cp.j1_1)))
}

fn chrw_three_level_with(
    params: &SpinParams,
    cp: &ChrwParams,
    t: f64,
) -> Result<ComplexMatrix> {
    let heff = chrw_central_heff(params, cp)?;
    let inner = match Su3ClosedForm::new(&heff, params.omega) {
        Ok(cf) if cf.well_conditioned() => cf.propagator(t),
        _ => su3_spectral(&heff, params.omega, t)?,
    };
    let phi = cp.b1_eff * cp.xi / params.omega * (params.omega * t).sin();
    let kick = expm_unitary(&spin_matrices(1.0)?.ix, phi)?;
    Ok(kick.mul(&inner))
}

/// Central three-level propagator with the counterrotating-hybridized
/// generator: e^{−iφ(t)Sx} · e^{−iωSz²t} · exp(−iH′t).
pub fn chrw_three_level_propagator(
    params: &SpinParams,
    spec: &ReducedBlockSpec,
    t: f64,
) -> Result<ComplexMatrix> {
    if spec.kind != BlockKind::CentralThreeLevel {
        return Err(Error::WrongBlockKind {
            expected: "central-three-level",
            got: spec.kind.name(),
        });
    }
    let cp = solve_xi(params.q, spec.b1_eff, params.omega)?;
    chrw_three_level_with(params, &cp, t)
}

fn chrw_two_level_with(
    cp: &ChrwParams,
    omega0: f64,
    side: Side,
    omega: f64,
    t: f64,
) -> Result<ComplexMatrix> {
    let drive = 0.5 * (cp.b_renorm + omega0 * cp.j1_2);
    let z_coeff = 0.5 * omega0 * cp.j0_2 - 0.5 * omega;
    // The minus side is the plus form conjugated by the level swap: the kick
    // is invariant, the frame sign flips, and the σz coefficient negates.
    let (z_signed, upper_sign) = match side {
        Side::Plus => (z_coeff, -1.0),
        Side::Minus => (-z_coeff, 1.0),
    };
    let h = ComplexMatrix::from_fn(2, |r, c| {
        Complex64::new(
            match (r, c) {
                (0, 0) => z_signed,
                (1, 1) => -z_signed,
                _ => drive,
            },
            0.0,
        )
    });
    let frame = ComplexMatrix::diagonal(&[
        Complex64::from_polar(1.0, upper_sign * omega * t / 2.0),
        Complex64::from_polar(1.0, -upper_sign * omega * t / 2.0),
    ]);
    let phi = cp.b1_eff * cp.xi / omega * (omega * t).sin();
    let (sin_p, cos_p) = phi.sin_cos();
    let kick = ComplexMatrix::from_fn(2, |r, c| {
        if r == c {
            Complex64::new(cos_p, 0.0)
        } else {
            Complex64::new(0.0, -sin_p)
        }
    });
    Ok(kick.mul(&frame).mul(&expm_unitary(&h, t)?))
}

/// Two-level block propagator with the counterrotating-hybridized generator,
/// in the pair's mean-energy frame. Each side solves its own ξ with κ set to
/// that side's transition frequency.
pub fn chrw_two_level_propagator(
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
    let omega0 = match side {
        Side::Plus => spec.omega0_plus,
        Side::Minus => spec.omega0_minus,
    };
    let cp = solve_xi(omega0, spec.b1_eff, params.omega)?;
    chrw_two_level_with(&cp, omega0, side, params.omega, t)
}

/// Counterrotating-hybridized propagator on the full space.
pub fn assemble_chrw(
    params: &SpinParams,
    spec: &ReducedBlockSpec,
    t: f64,
) -> Result<Propagator> {
    let matrix = assemble_with(
        params,
        spec,
        t,
        &|side, tt| chrw_two_level_propagator(params, spec, side, tt),
        &|tt| chrw_three_level_propagator(params, spec, tt),
    )?;
    Ok(Propagator::new(matrix, t, Method::Chrw))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::static_phase_diagonal;
    use crate::linalg::unitarity_residual;
    use crate::rwa_reduced::{assemble_reduced, select_block, two_level_block_propagator};

    #[test]
    fn bessel_small_argument_and_zeros() {
        assert_eq!(bessel_j(0, 0.0).unwrap(), 1.0);
        assert_eq!(bessel_j(1, 0.0).unwrap(), 0.0);
        let x = 1e-4;
        let series = x / 2.0 * (1.0 - x * x / 8.0);
        assert!((bessel_j(1, x).unwrap() - series).abs() <= 1e-12 * x);
        // First zero of J₀.
        assert!(bessel_j(0, 2.404825557695773).unwrap().abs() <= 1e-10);
        for x in [0.3, 1.7, 4.2] {
            assert_eq!(
                bessel_j(-1, x).unwrap(),
                -bessel_j(1, x).unwrap(),
                "J₋₁ = −J₁"
            );
        }
        assert!(matches!(
            bessel_j(0, 31.0),
            Err(Error::BesselDomain { .. })
        ));
        assert!(bessel_j(2, 1.0).is_err());
    }

    #[test]
    fn xi_weak_drive_limit() {
        // For B̃ → 0 the equation linearizes to ξ = ω/(κ+ω).
        let cp = solve_xi(1.0, 1e-6, 1.0).unwrap();
        assert!((cp.xi - 0.5).abs() <= 1e-5);
        assert!((cp.xi - 0.5000000000000311).abs() <= 1e-12);
        assert!(!cp.root_ambiguous);
    }

    #[test]
    fn xi_strong_drive_pinned_value() {
        let b = 6.0_f64.sqrt() * 0.5;
        let cp = solve_xi(1.0, b, 1.0).unwrap();
        assert!((cp.xi - 0.5612902960676995).abs() <= 1e-12);
        let residual = 1.0 * bessel_j(1, 2.0 * b * cp.xi).unwrap() - b * (1.0 - cp.xi);
        assert!(residual.abs() <= 1e-12 * b.max(1.0));
        // At the solved ξ the averaged and kicked drive shares coincide.
        assert!((1.0 * cp.j1_2 - cp.b_renorm).abs() <= 1e-12 * b.max(1.0));
    }

    #[test]
    fn xi_depends_continuously_on_drive() {
        // Stay below the drive strength where J₁'s bounded peak can no
        // longer balance the detuning term and the root disappears.
        let mut last = None;
        for i in 0..50 {
            let b = 1e-6 + 1.2 * i as f64 / 49.0;
            let cp = solve_xi(1.0, b, 1.0).unwrap();
            if let Some(prev) = last {
                assert!(
                    (cp.xi - prev as f64).abs() < 0.1,
                    "jump at b1_eff = {b}: {prev} -> {}",
                    cp.xi
                );
            }
            last = Some(cp.xi);
        }
    }

    #[test]
    fn xi_no_root_is_reported() {
        // A strongly driven three-level block at half the quadrupole
        // frequency has no self-consistent ξ in [0, 1].
        let b = 6.0_f64.sqrt() * 0.5;
        assert!(matches!(
            solve_xi(1.0, b, 0.5),
            Err(Error::XiRootNotFound(_))
        ));
    }

    #[test]
    fn xi_multiple_roots_pick_nearest_anchor() {
        // κ ≫ ω pushes several oscillations of J₁ into [0, 1].
        let cp = solve_xi(50.0, 1.0, 0.2).unwrap();
        assert!(cp.root_ambiguous);
        let anchor = 0.2 / 50.2;
        assert!((cp.xi - anchor).abs() < 0.05, "xi = {}", cp.xi);
    }

    #[test]
    fn solver_rejects_bad_parameters() {
        assert!(solve_xi(0.0, 1.0, 1.0).is_err());
        assert!(solve_xi(-1.0, 1.0, 1.0).is_err());
        assert!(solve_xi(1.0, -0.1, 1.0).is_err());
        assert!(solve_xi(1.0, 1.0, 0.0).is_err());
        let cp = solve_xi(1.0, 0.0, 1.0).unwrap();
        assert_eq!(cp.xi, 1.0);
        assert_eq!(cp.b_renorm, 0.0);
    }

    #[test]
    fn spin_one_frame_identities() {
        let ops = spin_matrices(1.0).unwrap();
        let szz = ops.iz.mul(&ops.iz);
        let syy = ops.iy.mul(&ops.iy);
        let zy = ops.iz.mul(&ops.iy).add(&ops.iy.mul(&ops.iz));
        for phi in [0.3, 1.1, 2.7] {
            let r = expm_unitary(&ops.ix, -phi).unwrap(); // e^{+iφSx}
            let rd = r.adjoint();
            let (s, c) = phi.sin_cos();

            let rot_z = r.mul(&ops.iz).mul(&rd);
            let expect_z = ops.iz.scale_re(c).add(&ops.iy.scale_re(s));
            assert!(rot_z.sub(&expect_z).max_abs() <= 1e-12);

            let rot_zz = r.mul(&szz).mul(&rd);
            let expect_zz = szz
                .scale_re(c * c)
                .add(&syy.scale_re(s * s))
                .add(&zy.scale_re(s * c));
            assert!(rot_zz.sub(&expect_zz).max_abs() <= 1e-12);

            let rot_x = r.mul(&ops.ix).mul(&rd);
            assert!(rot_x.sub(&ops.ix).max_abs() <= 1e-12, "drive is invariant");
        }
    }

    #[test]
    fn harmonic_averages_match_bessel_factors() {
        // Time average of cos(z·sin(ωt)) over one period is J₀(z); the sine
        // average vanishes. Trapezoid sums converge spectrally here.
        let b = 6.0_f64.sqrt() * 0.5;
        let cp = solve_xi(1.0, b, 1.0).unwrap();
        let omega = 1.0;
        for (z, j0) in [
            (2.0 * cp.b1_eff * cp.xi / omega, cp.j0_2),
            (cp.b1_eff * cp.xi / omega, cp.j0_1),
        ] {
            let n = 2048;
            let mut avg_cos = 0.0;
            let mut avg_sin = 0.0;
            for k in 0..n {
                let t = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
                avg_cos += (z * t.sin()).cos();
                avg_sin += (z * t.sin()).sin();
            }
            avg_cos /= n as f64;
            avg_sin /= n as f64;
            assert!((avg_cos - j0).abs() <= 1e-10);
            assert!(avg_sin.abs() <= 1e-10);
        }
    }

    #[test]
    fn undriven_limit_is_the_static_diagonal() {
        for p in [
            SpinParams::new(3.0, 1.0, 0.05, 0.0, 1.0),
            SpinParams::new(3.0, 1.0, 0.05, 0.0, 3.05),
            SpinParams::new(2.5, 1.0, 0.05, 0.0, 0.05),
        ] {
            let spec = select_block(&p).unwrap();
            let u = assemble_chrw(&p, &spec, 2.1).unwrap();
            assert!(
                u.matrix.sub(&static_phase_diagonal(&p, 2.1)).max_abs() <= 1e-9,
                "kind {:?}",
                spec.kind
            );
        }
    }

    #[test]
    fn forced_zero_xi_reproduces_plain_rwa_blocks() {
        let p = SpinParams::new(3.0, 1.0, 0.05, 0.3, 5.0);
        let spec = select_block(&p).unwrap();
        let cp = ChrwParams::with_xi(0.0, spec.b1_eff, p.omega).unwrap();
        for side in [Side::Plus, Side::Minus] {
            let omega0 = match side {
                Side::Plus => spec.omega0_plus,
                Side::Minus => spec.omega0_minus,
            };
            for step in 0..10 {
                let t = 0.61 * step as f64;
                let hybrid = chrw_two_level_with(&cp, omega0, side, p.omega, t).unwrap();
                let plain = two_level_block_propagator(&p, &spec, side, t).unwrap();
                assert!(hybrid.sub(&plain).max_abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn weak_drive_converges_to_plain_rwa() {
        // The kicked frame vanishes with the drive, so the hybridized and
        // plain propagators approach each other linearly in B1.
        let mut gaps = Vec::new();
        for b1 in [1e-2, 1e-3, 1e-4] {
            let p = SpinParams::new(1.0, 1.0, 0.05, b1, 1.0);
            let spec = select_block(&p).unwrap();
            let mut worst: f64 = 0.0;
            for step in 1..9 {
                let t = 0.9 * step as f64;
                let hybrid = assemble_chrw(&p, &spec, t).unwrap();
                let plain = assemble_reduced(&p, &spec, t).unwrap();
                worst = worst.max(hybrid.matrix.sub(&plain.matrix).max_abs());
            }
            gaps.push(worst);
        }
        assert!(gaps[1] <= 0.3 * gaps[0], "gaps {gaps:?}");
        assert!(gaps[2] <= 0.3 * gaps[1], "gaps {gaps:?}");
        assert!(gaps[2] <= 1e-2);
    }

    #[test]
    fn explicit_three_level_matches_eigendecomposition_route() {
        let p = SpinParams::new(3.0, 1.0, 0.05, 0.5, 1.0);
        let spec = select_block(&p).unwrap();
        let cp = solve_xi(p.q, spec.b1_eff, p.omega).unwrap();
        let heff = chrw_central_heff(&p, &cp).unwrap();

        let cf = Su3ClosedForm::new(&heff, p.omega).unwrap();
        assert!(cf.well_conditioned());
        assert!(
            (cf.u - 0.6698679295965938).abs() <= 1e-9,
            "normalization u = {} drifted from its pinned value",
            cf.u
        );
        let phi = |t: f64| cp.b1_eff * cp.xi / p.omega * (p.omega * t).sin();
        for step in 1..8 {
            let t = 0.73 * step as f64;
            let explicit = chrw_three_level_with(&p, &cp, t).unwrap();
            let kick = expm_unitary(&spin_matrices(1.0).unwrap().ix, phi(t)).unwrap();
            let spectral = kick.mul(&su3_spectral(&heff, p.omega, t).unwrap());
            assert!(explicit.sub(&spectral).max_abs() <= 1e-8);
            assert!(unitarity_residual(&explicit) <= 1e-9);
        }
    }

    #[test]
    fn assembled_propagators_are_unitary_and_start_at_identity() {
        for p in [
            SpinParams::new(3.0, 1.0, 0.05, 0.5, 1.0),
            SpinParams::new(3.0, 1.0, 0.05, 0.2, 5.05),
            SpinParams::new(2.5, 1.0, 0.05, 0.02, 0.05),
        ] {
            let spec = select_block(&p).unwrap();
            let dim = p.dim();
            let at_zero = assemble_chrw(&p, &spec, 0.0).unwrap();
            assert!(
                at_zero
                    .matrix
                    .sub(&ComplexMatrix::identity(dim))
                    .max_abs()
                    <= 1e-12
            );
            let u = assemble_chrw(&p, &spec, 2.4).unwrap();
            assert!(unitarity_residual(&u.matrix) <= 1e-9, "kind {:?}", spec.kind);
        }
    }
}
