use crate::error::{Error, Result};

use super::density::DensityMatrix;
use super::matrix::{ComplexMatrix, C_ZERO};
use super::UNITARY_TOL;

/// Kronecker product, defined for both raw matrices and density matrices.
pub trait Tensor: Sized {
    fn tensor(&self, rhs: &Self) -> Result<Self>;
}

impl Tensor for ComplexMatrix {
    fn tensor(&self, rhs: &Self) -> Result<Self> {
        Ok(self.kron(rhs))
    }
}

impl Tensor for DensityMatrix {
    fn tensor(&self, rhs: &Self) -> Result<Self> {
        DensityMatrix::from_cp_output(self.matrix().kron(rhs.matrix()))
    }
}

pub fn tensor<T: Tensor>(a: &T, b: &T) -> Result<T> {
    a.tensor(b)
}

/// Reduced state on the `keep` subsystems (returned in ascending index order).
pub fn partial_trace(rho: &DensityMatrix, dims: &[usize], keep: &[usize]) -> Result<DensityMatrix> {
    let reduced = partial_trace_matrix(rho.matrix(), dims, keep)?;
    DensityMatrix::from_cp_output(reduced)
}

/// Partial trace of an arbitrary square operator.
pub fn partial_trace_matrix(m: &ComplexMatrix, dims: &[usize], keep: &[usize]) -> Result<ComplexMatrix> {
    let total: usize = dims.iter().product();
    if dims.is_empty() || dims.contains(&0) || total != m.rows() || !m.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "subsystem dimensions {dims:?} do not factor a {}x{} operator",
            m.rows(),
            m.cols()
        )));
    }
    if keep.is_empty() {
        return Err(Error::InvalidSubsystems("keep must be nonempty".into()));
    }
    let mut kept: Vec<usize> = keep.to_vec();
    kept.sort_unstable();
    kept.dedup();
    if kept.len() != keep.len() {
        return Err(Error::InvalidSubsystems(format!("duplicate index in {keep:?}")));
    }
    if let Some(&bad) = kept.iter().find(|&&k| k >= dims.len()) {
        return Err(Error::InvalidSubsystems(format!(
            "subsystem {bad} does not exist among {} subsystems",
            dims.len()
        )));
    }
    let traced: Vec<usize> = (0..dims.len()).filter(|i| !kept.contains(i)).collect();

    // Row-major strides of the full index.
    let mut strides = vec![1usize; dims.len()];
    for i in (0..dims.len().saturating_sub(1)).rev() {
        strides[i] = strides[i + 1] * dims[i + 1];
    }
    let kept_dims: Vec<usize> = kept.iter().map(|&k| dims[k]).collect();
    let traced_dims: Vec<usize> = traced.iter().map(|&k| dims[k]).collect();
    let out_dim: usize = kept_dims.iter().product();
    let env_dim: usize = traced_dims.iter().product();

    // Full-space offsets for every kept-index and traced-index tuple.
    let offsets = |subs: &[usize], sub_dims: &[usize], count: usize| -> Vec<usize> {
        (0..count)
            .map(|mut flat| {
                let mut off = 0;
                for (pos, &sys) in subs.iter().enumerate().rev() {
                    let d = sub_dims[pos];
                    off += (flat % d) * strides[sys];
                    flat /= d;
                }
                off
            })
            .collect()
    };
    let kept_off = offsets(&kept, &kept_dims, out_dim);
    let env_off = offsets(&traced, &traced_dims, env_dim);

    let mut out = ComplexMatrix::zeros(out_dim, out_dim);
    for (i, &ri) in kept_off.iter().enumerate() {
        for (j, &cj) in kept_off.iter().enumerate() {
            let mut acc = C_ZERO;
            for &e in &env_off {
                acc += m[(ri + e, cj + e)];
            }
            out[(i, j)] = acc;
        }
    }
    Ok(out)
}

const ROUNDOFF_EIGENVALUE: f64 = 1e-15;

/// Uhlmann fidelity `(tr √(√ρ σ √ρ))²`, clamped to `[0, 1]`.
pub fn fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch(format!(
            "fidelity between dimension {} and {}",
            rho.dim(),
            sigma.dim()
        )));
    }
    // Singular values of √ρ√σ are the square roots of the spectrum of
    // √ρ σ √ρ. Eigenvalues at round-off level are dropped first: sqrt turns
    // 1e-17 into 3e-9, which would bias pure-state fidelities by ~1e-8.
    let sqrt_rho = psd_sqrt(rho.matrix())?;
    let sqrt_sigma = psd_sqrt(sigma.matrix())?;
    let root_sum: f64 = sqrt_rho
        .matmul(&sqrt_sigma)
        .to_nalgebra()
        .singular_values()
        .iter()
        .sum();
    Ok((root_sum * root_sum).clamp(0.0, 1.0))
}

fn psd_sqrt(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    let floor = ROUNDOFF_EIGENVALUE * m.rows() as f64;
    m.hermitian_function(|x| if x > floor { x.sqrt() } else { 0.0 })
}

/// `U ρ U†`; rejects `U` that is not unitary within tolerance.
pub fn apply_unitary(rho: &DensityMatrix, u: &ComplexMatrix) -> Result<DensityMatrix> {
    if !u.is_square() || u.rows() != rho.dim() {
        return Err(Error::DimensionMismatch(format!(
            "unitary is {}x{}, state has dimension {}",
            u.rows(),
            u.cols(),
            rho.dim()
        )));
    }
    let defect = u.unitarity_defect();
    if defect > UNITARY_TOL {
        return Err(Error::NotUnitary(defect));
    }
    DensityMatrix::from_cp_output(rho.matrix().conjugate_by(u))
}

/// Lifts a single-subsystem operator to the full space: `I ⊗ … ⊗ op ⊗ … ⊗ I`.
pub fn embed_operator(op: &ComplexMatrix, dims: &[usize], target: usize) -> Result<ComplexMatrix> {
    if target >= dims.len() || op.rows() != dims[target] || !op.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "operator {}x{} cannot act on subsystem {target} of {dims:?}",
            op.rows(),
            op.cols()
        )));
    }
    let left: usize = dims[..target].iter().product();
    let right: usize = dims[target + 1..].iter().product();
    Ok(ComplexMatrix::identity(left)
        .kron(op)
        .kron(&ComplexMatrix::identity(right)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::BellState;

    #[test]
    fn tensor_of_mixed_qubits_is_mixed() {
        let m = DensityMatrix::maximally_mixed(2);
        let t = tensor(&m, &m).unwrap();
        assert!(t.max_abs_diff(&DensityMatrix::maximally_mixed(4)) < 1e-15);
    }

    #[test]
    fn tensor_of_basis_states() {
        let zero = DensityMatrix::basis(2, 0).unwrap();
        let one = DensityMatrix::basis(2, 1).unwrap();
        let t = tensor(&zero, &one).unwrap();
        assert_eq!(t.matrix()[(1, 1)].re, 1.0);
        assert_eq!(t.matrix().entries().iter().filter(|z| z.norm() > 0.0).count(), 1);
    }

    #[test]
    fn partial_trace_examples() {
        let bell = DensityMatrix::phi_plus();
        let half = DensityMatrix::maximally_mixed(2);
        assert!(partial_trace(&bell, &[2, 2], &[0]).unwrap().max_abs_diff(&half) < 1e-15);

        let ket01 = DensityMatrix::basis(4, 1).unwrap();
        let one = DensityMatrix::basis(2, 1).unwrap();
        assert!(partial_trace(&ket01, &[2, 2], &[1]).unwrap().max_abs_diff(&one) < 1e-15);

        let werner = DensityMatrix::werner(0.95).unwrap();
        assert!(partial_trace(&werner, &[2, 2], &[0]).unwrap().max_abs_diff(&half) < 1e-15);
    }

    #[test]
    fn partial_trace_of_two_bell_pairs() {
        let bell = DensityMatrix::phi_plus();
        let both = tensor(&bell, &bell).unwrap();
        assert_eq!(both.dim(), 16);
        for keep in [[0, 1], [2, 3]] {
            let r = partial_trace(&both, &[2, 2, 2, 2], &keep).unwrap();
            assert!(r.max_abs_diff(&bell) < 1e-15);
        }
    }

    #[test]
    fn partial_trace_errors() {
        let bell = DensityMatrix::phi_plus();
        assert!(matches!(
            partial_trace(&bell, &[2, 3], &[0]),
            Err(Error::DimensionMismatch(_))
        ));
        assert!(partial_trace(&bell, &[2, 2], &[]).is_err());
        assert!(partial_trace(&bell, &[2, 2], &[2]).is_err());
        assert!(partial_trace(&bell, &[2, 2], &[0, 0]).is_err());
    }

    #[test]
    fn fidelity_examples() {
        let zero = DensityMatrix::basis(2, 0).unwrap();
        let one = DensityMatrix::basis(2, 1).unwrap();
        assert!((fidelity(&zero, &zero).unwrap() - 1.0).abs() < 1e-12);
        assert!(fidelity(&zero, &one).unwrap() < 1e-12);
        let bell = DensityMatrix::phi_plus();
        for f in [0.25, 0.5, 0.95] {
            let w = DensityMatrix::werner(f).unwrap();
            assert!((fidelity(&w, &bell).unwrap() - f).abs() < 1e-10);
            assert!((w.phi_plus_fidelity() - f).abs() < 1e-12);
        }
        assert!(fidelity(&zero, &bell).is_err());
    }

    #[test]
    fn unitary_examples() {
        let zero = DensityMatrix::basis(2, 0).unwrap();
        let one = DensityMatrix::basis(2, 1).unwrap();
        assert_eq!(apply_unitary(&zero, &ComplexMatrix::identity(2)).unwrap(), zero);
        assert!(apply_unitary(&zero, &ComplexMatrix::pauli_x()).unwrap().max_abs_diff(&one) < 1e-15);

        let z_on_first = ComplexMatrix::pauli_z().kron(&ComplexMatrix::identity(2));
        let out = apply_unitary(&DensityMatrix::phi_plus(), &z_on_first).unwrap();
        assert!(out.max_abs_diff(&DensityMatrix::bell(BellState::PhiMinus)) < 1e-15);
        assert!(fidelity(&out, &DensityMatrix::phi_plus()).unwrap() < 1e-10);

        let not_unitary = ComplexMatrix::identity(2).scale_real(0.5);
        assert!(matches!(apply_unitary(&zero, &not_unitary), Err(Error::NotUnitary(_))));
    }
}
