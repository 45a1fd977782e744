use num_complex::Complex64;

use crate::error::{Error, Result};

use super::matrix::{ComplexMatrix, C_ONE, C_ZERO};
use super::{HERMITIAN_TOL, MAX_DIM, PSD_TOL, TRACE_TOL};

/// A density operator ρ: Hermitian, unit trace, positive semidefinite.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    /// Validates every invariant, including the eigenvalue check.
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        let rho = Self::from_cp_output(matrix)?;
        let min = rho.min_eigenvalue();
        if min < -PSD_TOL {
            return Err(Error::NotPositive(min));
        }
        Ok(rho)
    }

    /// Checks shape, finiteness, Hermiticity and trace, then symmetrizes.
    ///
    /// Positivity is not re-checked: callers must only pass the output of a
    /// completely positive map applied to a valid state.
    pub(crate) fn from_cp_output(matrix: ComplexMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "density matrix must be square, got {}x{}",
                matrix.rows(),
                matrix.cols()
            )));
        }
        if matrix.rows() > MAX_DIM {
            return Err(Error::TooLarge(matrix.rows()));
        }
        let scale = matrix.max_abs().max(1.0);
        let defect = matrix.hermiticity_defect();
        if defect > HERMITIAN_TOL * scale {
            return Err(Error::NotHermitian(defect));
        }
        let tr = matrix.trace();
        if (tr - C_ONE).norm() > TRACE_TOL {
            return Err(Error::TraceNotUnit(tr.re));
        }
        Ok(Self {
            matrix: matrix.hermitian_part(),
        })
    }

    /// Renormalizes a positive (unnormalized) operator to unit trace.
    pub(crate) fn normalized(matrix: ComplexMatrix) -> Result<Self> {
        let tr = matrix.trace().re;
        if !(tr > 0.0) {
            return Err(Error::ZeroProbability);
        }
        Self::from_cp_output(matrix.hermitian_part().scale_real(1.0 / tr))
    }

    /// `|ψ⟩⟨ψ|` after normalizing ψ.
    pub fn pure(amplitudes: &[Complex64]) -> Result<Self> {
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::ZeroProbability);
        }
        let psi: Vec<Complex64> = amplitudes.iter().map(|a| a / norm).collect();
        Self::from_cp_output(ComplexMatrix::outer(&psi, &psi))
    }

    /// Computational basis state `|index⟩⟨index|`.
    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return Err(Error::InvalidSubsystems(format!(
                "basis index {index} out of range for dimension {dim}"
            )));
        }
        let mut amps = vec![C_ZERO; dim];
        amps[index] = C_ONE;
        Self::pure(&amps)
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            matrix: ComplexMatrix::identity(dim).scale_real(1.0 / dim as f64),
        }
    }

    /// `|Φ⁺⟩ = (|00⟩ + |11⟩)/√2`.
    pub fn phi_plus() -> Self {
        Self::pure(&bell_vector(BellState::PhiPlus)).unwrap()
    }

    pub fn bell(state: BellState) -> Self {
        Self::pure(&bell_vector(state)).unwrap()
    }

    /// Werner state with fidelity `f` to Φ⁺: `w·Φ⁺ + (1−w)·I/4`, `w = (4f−1)/3`.
    pub fn werner(fidelity: f64) -> Result<Self> {
        crate::error::check_range("werner fidelity", fidelity, 0.0, 1.0)?;
        let w = (4.0 * fidelity - 1.0) / 3.0;
        let m = &Self::phi_plus().matrix.scale_real(w)
            + &ComplexMatrix::identity(4).scale_real((1.0 - w) / 4.0);
        // w < 0 is still positive down to f = 0 (Φ⁺ weight f, others (1−f)/3).
        Self::from_cp_output(m)
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        self.matrix
            .hermitian_eigenvalues()
            .expect("density matrices are square")
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    /// Re-checks all invariants at the stated tolerances.
    pub fn validate(&self) -> Result<()> {
        Self::new(self.matrix.clone()).map(|_| ())
    }

    /// `⟨ψ|ρ|ψ⟩` for a normalized pure state ψ.
    pub fn expectation_pure(&self, psi: &[Complex64]) -> f64 {
        let n = self.dim();
        assert_eq!(psi.len(), n);
        let mut acc = C_ZERO;
        for i in 0..n {
            if psi[i] == C_ZERO {
                continue;
            }
            for j in 0..n {
                acc += psi[i].conj() * self.matrix[(i, j)] * psi[j];
            }
        }
        acc.re
    }

    /// Fidelity to Φ⁺ for a two-qubit state.
    pub fn phi_plus_fidelity(&self) -> f64 {
        self.expectation_pure(&bell_vector(BellState::PhiPlus))
    }

    /// Convex mixture `(1−weight)·self + weight·other`.
    pub fn mix(&self, other: &Self, weight: f64) -> Result<Self> {
        crate::error::check_range("mixing weight", weight, 0.0, 1.0)?;
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch(format!(
                "cannot mix dimension {} with {}",
                self.dim(),
                other.dim()
            )));
        }
        Self::from_cp_output(
            &self.matrix.scale_real(1.0 - weight) + &other.matrix.scale_real(weight),
        )
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.matrix.max_abs_diff(&other.matrix)
    }
}

/// The four Bell states, indexed by the Pauli `σ` in `(I ⊗ σ)|Φ⁺⟩`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BellState {
    /// `(I⊗I)Φ⁺`
    PhiPlus,
    /// `(I⊗X)Φ⁺`
    PsiPlus,
    /// `(I⊗Y)Φ⁺ ∝ Ψ⁻`
    PsiMinus,
    /// `(I⊗Z)Φ⁺`
    PhiMinus,
}

impl BellState {
    pub const ALL: [BellState; 4] = [
        BellState::PhiPlus,
        BellState::PsiPlus,
        BellState::PsiMinus,
        BellState::PhiMinus,
    ];

    /// The Pauli correction that maps this state back onto Φ⁺.
    pub fn pauli(self) -> ComplexMatrix {
        match self {
            BellState::PhiPlus => ComplexMatrix::identity(2),
            BellState::PsiPlus => ComplexMatrix::pauli_x(),
            BellState::PsiMinus => ComplexMatrix::pauli_y(),
            BellState::PhiMinus => ComplexMatrix::pauli_z(),
        }
    }
}

/// Normalized amplitude vector of a Bell state over `|00⟩,|01⟩,|10⟩,|11⟩`.
pub fn bell_vector(state: BellState) -> Vec<Complex64> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let r = |x: f64| Complex64::new(x * h, 0.0);
    match state {
        BellState::PhiPlus => vec![r(1.0), r(0.0), r(0.0), r(1.0)],
        BellState::PhiMinus => vec![r(1.0), r(0.0), r(0.0), r(-1.0)],
        BellState::PsiPlus => vec![r(0.0), r(1.0), r(1.0), r(0.0)],
        BellState::PsiMinus => vec![r(0.0), r(1.0), r(-1.0), r(0.0)],
    }
}
