use serde::Serialize;

use crate::linalg::{BellState, ComplexMatrix, DensityMatrix};

/// Weights of a Bell-diagonal two-qubit state on `(I⊗σ)Φ⁺` for
/// `σ = I, X, Y, Z` (the order of [`BellState::ALL`]).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BellDiagonal(pub [f64; 4]);

/// `(x, z)` bits of each Pauli in `I, X, Y, Z` order.
const PAULI_BITS: [(u8, u8); 4] = [(0, 0), (1, 0), (1, 1), (0, 1)];

fn pauli_index(x: u8, z: u8) -> usize {
    PAULI_BITS
        .iter()
        .position(|&b| b == (x, z))
        .expect("all bit pairs are listed")
}

impl BellDiagonal {
    pub fn phi_plus() -> Self {
        Self([1.0, 0.0, 0.0, 0.0])
    }

    pub fn werner(fidelity: f64) -> Self {
        let off = (1.0 - fidelity) / 3.0;
        Self([fidelity, off, off, off])
    }

    /// Bell-basis populations of `rho`; exact when `rho` is Bell-diagonal.
    pub fn from_state(rho: &DensityMatrix) -> Self {
        let mut w = [0.0; 4];
        for (slot, state) in w.iter_mut().zip(BellState::ALL) {
            *slot = rho.expectation_pure(&crate::linalg::bell_vector(state));
        }
        Self(w)
    }

    pub fn fidelity(&self) -> f64 {
        self.0[0]
    }

    /// Pauli-group convolution: the state after swapping pairs with these
    /// error distributions.
    pub fn convolve(&self, other: &Self) -> Self {
        let mut out = [0.0; 4];
        for (i, &a) in self.0.iter().enumerate() {
            for (j, &b) in other.0.iter().enumerate() {
                let (xi, zi) = PAULI_BITS[i];
                let (xj, zj) = PAULI_BITS[j];
                out[pauli_index(xi ^ xj, zi ^ zj)] += a * b;
            }
        }
        Self(out)
    }

    /// Dephasing with probability `p` on either qubit.
    pub fn dephased(&self, p: f64) -> Self {
        self.convolve(&Self([1.0 - p, 0.0, 0.0, p]))
    }

    /// Shrinks toward `I/4`, keeping a fraction `retained` of the deviation.
    pub fn depolarized(&self, retained: f64) -> Self {
        Self(self.0.map(|w| retained * w + (1.0 - retained) / 4.0))
    }

    /// Outcome of a swap whose node dephases each measured qubit with probability `penalty`.
    pub fn swap(&self, right: &Self, penalty: f64) -> Self {
        self.dephased(penalty).dephased(penalty).convolve(right)
    }

    pub fn to_state(&self) -> DensityMatrix {
        let mut m = ComplexMatrix::zeros(4, 4);
        for (w, state) in self.0.iter().zip(BellState::ALL) {
            let v = crate::linalg::bell_vector(state);
            m = &m + &ComplexMatrix::outer(&v, &v).scale_real(*w);
        }
        DensityMatrix::normalized(m).expect("weights sum to one")
    }
}
