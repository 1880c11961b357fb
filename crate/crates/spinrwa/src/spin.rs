//! Spin operators, parameter bundle, rotations, and the spin-1/2 composition
//! embedding used by the half-integer full-space method.
//!
//! Basis convention (global to the crate): |I, M⟩ with M descending from +I to
//! −I, so the row/column index of M is `I − M`. Product spaces order the
//! M_S = +1/2 block first, M_I descending inside each block.

use num_complex::Complex64;
use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};
use crate::linalg::{expm_unitary, ComplexMatrix, ComplexRect};

/// Physical parameters in natural units (Q is the customary unit, ħ = 1).
///
/// The Hamiltonian driven by a linearly polarized ac field is
///
/// ```text
/// H(t) = Q·Iz² + B0·Iz + B1·cos(ωt)·Ix
/// ```
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinParams {
    /// Spin quantum number I; 2I must be a positive integer.
    pub spin: f64,
    /// Quadrupole coupling.
    pub q: f64,
    /// Static longitudinal field.
    pub b0: f64,
    /// Drive amplitude.
    pub b1: f64,
    /// Drive angular frequency.
    pub omega: f64,
}

impl SpinParams {
    pub fn new(spin: f64, q: f64, b0: f64, b1: f64, omega: f64) -> Self {
        Self {
            spin,
            q,
            b0,
            b1,
            omega,
        }
    }

    /// 2I as an integer.
    pub fn two_i(&self) -> usize {
        (2.0 * self.spin).round() as usize
    }

    /// Hilbert-space dimension 2I+1.
    pub fn dim(&self) -> usize {
        self.two_i() + 1
    }

    pub fn is_integer_spin(&self) -> bool {
        self.two_i() % 2 == 0
    }

    /// Whether the quadrupole term dominates the static splitting (B0 < Q);
    /// callers warn, rather than reject, outside this regime.
    pub fn quadrupole_dominant(&self) -> bool {
        self.b0 < self.q
    }

    /// Reject parameter sets no method can interpret: non-finite values,
    /// invalid spin, negative drive amplitude, negative drive frequency.
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("spin", self.spin),
            ("Q", self.q),
            ("B0", self.b0),
            ("B1", self.b1),
            ("omega", self.omega),
        ] {
            if !v.is_finite() {
                return Err(Error::InvalidParameter(format!("{name} must be finite")));
            }
        }
        validate_spin(self.spin)?;
        if self.b1 < 0.0 {
            return Err(Error::InvalidParameter("B1 must be non-negative".into()));
        }
        if self.omega < 0.0 {
            return Err(Error::InvalidParameter(
                "omega must be non-negative".into(),
            ));
        }
        Ok(())
    }
}

/// Check that 2·spin is a positive integer (within float tolerance).
pub fn validate_spin(spin: f64) -> Result<()> {
    let two_i = 2.0 * spin;
    if !(two_i.is_finite() && two_i >= 1.0 - 1e-9 && (two_i - two_i.round()).abs() < 1e-9) {
        return Err(Error::InvalidParameter(format!(
            "spin must be a positive half-integer, got {spin}"
        )));
    }
    Ok(())
}

/// The M eigenvalues in descending order, M = I, I−1, …, −I.
pub fn m_values(spin: f64) -> Vec<f64> {
    let dim = (2.0 * spin).round() as usize + 1;
    (0..dim).map(|i| spin - i as f64).collect()
}

/// Angular-momentum matrices for one spin, in the descending-M basis.
#[derive(Debug, Clone)]
pub struct SpinOperators {
    pub spin: f64,
    pub dim: usize,
    pub ix: ComplexMatrix,
    pub iy: ComplexMatrix,
    pub iz: ComplexMatrix,
}

/// Standard ladder construction: ⟨I,M±1|I±|I,M⟩ = √(I(I+1) − M(M±1)),
/// Ix = (I₊+I₋)/2, Iy = (I₊−I₋)/(2i).
pub fn spin_matrices(spin: f64) -> Result<SpinOperators> {
    validate_spin(spin)?;
    let dim = (2.0 * spin).round() as usize + 1;
    let ms = m_values(spin);

    let mut ix = ComplexMatrix::zeros(dim);
    let mut iy = ComplexMatrix::zeros(dim);
    let mut iz = ComplexMatrix::zeros(dim);
    for (idx, &m) in ms.iter().enumerate() {
        iz.set(idx, idx, Complex64::new(m, 0.0));
        if idx > 0 {
            // I₊ raises |M⟩ to |M+1⟩, which sits one row up.
            let a = (spin * (spin + 1.0) - m * (m + 1.0)).sqrt();
            ix.set(idx - 1, idx, Complex64::new(a / 2.0, 0.0));
            ix.set(idx, idx - 1, Complex64::new(a / 2.0, 0.0));
            // Purely imaginary entries keep e^{-iθ·Iy} real.
            iy.set(idx - 1, idx, Complex64::new(0.0, -a / 2.0));
            iy.set(idx, idx - 1, Complex64::new(0.0, a / 2.0));
        }
    }

    Ok(SpinOperators {
        spin,
        dim,
        ix,
        iy,
        iz,
    })
}

/// Diagonal sign-of-M operator: +1 on M ≥ 1, 0 on M = 0, −1 on M ≤ −1.
/// Defined for integer spin I ≥ 1, where it generates the single rotating
/// frame e^{-iωt·Iz·Ia} of the full-space method.
pub fn ia_operator(spin: f64) -> Result<ComplexMatrix> {
    validate_spin(spin)?;
    let two_i = (2.0 * spin).round() as usize;
    if two_i % 2 != 0 {
        return Err(Error::InvalidParameter(format!(
            "sign-of-M operator needs integer spin, got {spin}"
        )));
    }
    let entries: Vec<f64> = m_values(spin)
        .iter()
        .map(|&m| {
            if m > 0.5 {
                1.0
            } else if m < -0.5 {
                -1.0
            } else {
                0.0
            }
        })
        .collect();
    Ok(ComplexMatrix::diagonal_real(&entries))
}

/// Rotation about y: expm(-i·angle·Iy). Real-valued in this representation.
pub fn rotation_y(spin: f64, angle: f64) -> Result<ComplexMatrix> {
    let ops = spin_matrices(spin)?;
    expm_unitary(&ops.iy, angle)
}

/// Coefficients of the π/2-rotated stretched state e^{-i(π/2)Iy}|I,I⟩ in the
/// |I,M⟩ basis — equivalently, the top Ix eigenstate. Real, normalized, and
/// (in this representation) all positive.
pub fn rotated_coeffs(spin: f64) -> Result<Vec<f64>> {
    let r = rotation_y(spin, FRAC_PI_2)?;
    let dim = r.dim();
    let mut coeffs = Vec::with_capacity(dim);
    for i in 0..dim {
        let z = r.at(i, 0);
        if z.im.abs() > 1e-12 {
            return Err(Error::Numerical(format!(
                "rotated coefficients should be real, found imaginary part {:.3e}",
                z.im
            )));
        }
        coeffs.push(z.re);
    }
    if coeffs[0] < 0.0 {
        for c in coeffs.iter_mut() {
            *c = -*c;
        }
    }
    Ok(coeffs)
}

/// Embedding of the J = I_int + 1/2 multiplet into the product space
/// (spin-1/2) ⊗ (spin I_int).
///
/// Rows follow the product ordering (M_S = +1/2 block first, M_I descending
/// inside); columns follow M_J descending. Column M_J carries
/// √((J+M_J)/2J) on |↑⟩⊗|M_J−1/2⟩ and √((J−M_J)/2J) on |↓⟩⊗|M_J+1/2⟩.
#[derive(Debug, Clone)]
pub struct CompositionMap {
    /// Integer spin of the auxiliary system.
    pub i_int: f64,
    /// Total spin J = I_int + 1/2.
    pub j: f64,
    /// Rectangular isometry of shape 2(2·I_int+1) × (2J+1).
    pub embedding: ComplexRect,
}

pub fn clebsch_embed(i_int: f64) -> Result<CompositionMap> {
    if !(i_int.is_finite() && i_int >= -1e-9 && (i_int - i_int.round()).abs() < 1e-9) {
        return Err(Error::InvalidParameter(format!(
            "auxiliary spin must be a non-negative integer, got {i_int}"
        )));
    }
    let i_int = i_int.round().max(0.0);
    let j = i_int + 0.5;
    let dim_i = (2.0 * i_int).round() as usize + 1;
    let rows = 2 * dim_i;
    let cols = (2.0 * j).round() as usize + 1;

    let mut e = ComplexRect::zeros(rows, cols);
    for col in 0..cols {
        let mj = j - col as f64;
        // |↑⟩ ⊗ |M_I = M_J − 1/2⟩ with weight √((J+M_J)/2J).
        let up = (j + mj) / (2.0 * j);
        if up > 1e-15 {
            let row = (i_int - (mj - 0.5)).round() as usize;
            e.set(row, col, Complex64::new(up.sqrt(), 0.0));
        }
        // |↓⟩ ⊗ |M_I = M_J + 1/2⟩ with weight √((J−M_J)/2J).
        let down = (j - mj) / (2.0 * j);
        if down > 1e-15 {
            let row = dim_i + (i_int - (mj + 0.5)).round() as usize;
            e.set(row, col, Complex64::new(down.sqrt(), 0.0));
        }
    }

    Ok(CompositionMap {
        i_int,
        j,
        embedding: e,
    })
}
