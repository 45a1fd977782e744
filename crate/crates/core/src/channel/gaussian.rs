//! Phase-space evolution under quadratic bosonic Hamiltonians, and the
//! beam-splitter dilation that links it to the operator-sum loss model.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{check_range, Error, Result};
use crate::linalg::{partial_trace, ComplexMatrix, DensityMatrix, C_ONE, C_ZERO};

use super::catalog::RAIL_DIM;
use super::kraus::KrausChannel;

const GAUSSIAN_TOL: f64 = 1e-12;

/// `H = Σ K_ij a_i† a_j + ½ Σ (Δ_ij a_i† a_j† + Δ_ij* a_i a_j)`.
///
/// `K` must be Hermitian and `Δ` symmetric; both are in rad/s, `t` in s.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussianHamiltonian {
    pub coupling: ComplexMatrix,
    pub squeezing: ComplexMatrix,
    pub time: f64,
}

/// Real `2N×2N` matrix acting on quadratures ordered `(x_1..x_N, p_1..p_N)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SymplecticTransform {
    modes: usize,
    matrix: DMatrix<f64>,
}

impl GaussianHamiltonian {
    pub fn new(coupling: ComplexMatrix, squeezing: ComplexMatrix, time: f64) -> Result<Self> {
        let h = Self {
            coupling,
            squeezing,
            time,
        };
        h.validate()?;
        Ok(h)
    }

    /// Passive two-mode coupling `κ(a_1†a_2 + a_2†a_1)`.
    pub fn beam_splitter(kappa: f64, time: f64) -> Result<Self> {
        let k = ComplexMatrix::from_real(2, 2, &[0.0, kappa, kappa, 0.0])?;
        Self::new(k, ComplexMatrix::zeros(2, 2), time)
    }

    pub fn modes(&self) -> usize {
        self.coupling.rows()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.coupling.rows();
        if !self.coupling.is_square() || self.squeezing.rows() != n || self.squeezing.cols() != n {
            return Err(Error::DimensionMismatch(format!(
                "K is {}x{}, Delta is {}x{}",
                self.coupling.rows(),
                self.coupling.cols(),
                self.squeezing.rows(),
                self.squeezing.cols()
            )));
        }
        let herm = self.coupling.hermiticity_defect();
        if herm > GAUSSIAN_TOL {
            return Err(Error::NotHermitian(herm));
        }
        let sym = self.squeezing.max_abs_diff(&self.squeezing.transpose());
        if sym > GAUSSIAN_TOL {
            return Err(Error::InvalidChannel(format!(
                "squeezing matrix is not symmetric (deviation {sym:.3e})"
            )));
        }
        if !self.time.is_finite() {
            return Err(Error::NonFinite);
        }
        Ok(())
    }

    /// Real symmetric `M` with `H = ½ rᵀ M r` up to a constant.
    fn quadrature_form(&self) -> DMatrix<f64> {
        let n = self.modes();
        let mut m = DMatrix::zeros(2 * n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                let (kr, ki) = (self.coupling[(i, j)].re, self.coupling[(i, j)].im);
                let (dr, di) = (self.squeezing[(i, j)].re, self.squeezing[(i, j)].im);
                m[(i, j)] = kr + dr;
                m[(n + i, n + j)] = kr - dr;
                m[(i, n + j)] = di - ki;
                m[(n + i, j)] = di + ki;
            }
        }
        m
    }
}

/// Standard symplectic form `[[0, I], [−I, 0]]`.
pub fn symplectic_form(modes: usize) -> DMatrix<f64> {
    let mut omega = DMatrix::zeros(2 * modes, 2 * modes);
    for i in 0..modes {
        omega[(i, modes + i)] = 1.0;
        omega[(modes + i, i)] = -1.0;
    }
    omega
}

impl SymplecticTransform {
    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// `‖SᵀΩS − Ω‖_max`.
    pub fn symplectic_residual(&self) -> f64 {
        let omega = symplectic_form(self.modes);
        (self.matrix.transpose() * &omega * &self.matrix - omega).amax()
    }

    /// Amplitude `a_to ← a_from` of the annihilation-operator map
    /// `U = ½(A + D) + i/2 (C − B)` for `S = [[A, B], [C, D]]`.
    pub fn mode_amplitude(&self, to: usize, from: usize) -> Complex64 {
        let n = self.modes;
        let s = &self.matrix;
        let re = 0.5 * (s[(to, from)] + s[(n + to, n + from)]);
        let im = 0.5 * (s[(n + to, from)] - s[(to, n + from)]);
        Complex64::new(re, im)
    }

    /// Power transfer `|U_{to,from}|²` between modes (exact for passive transforms).
    pub fn transmittance(&self, to: usize, from: usize) -> f64 {
        self.mode_amplitude(to, from).norm_sqr()
    }
}

/// Heisenberg evolution of the quadratures: `S = exp(Ω M t)`.
pub fn gaussian_evolve(h: &GaussianHamiltonian) -> Result<SymplecticTransform> {
    h.validate()?;
    let n = h.modes();
    let generator = symplectic_form(n) * h.quadrature_form() * h.time;
    Ok(SymplecticTransform {
        modes: n,
        matrix: generator.exp(),
    })
}

/// Loss channel obtained by dilating a beam splitter of transmittance `eta`
/// with a vacuum environment mode and tracing the environment out.
///
/// The beam splitter comes from [`gaussian_evolve`]; its single-photon
/// amplitudes define a unitary on `system ⊗ environment` (each a
/// `{vacuum, |0⟩, |1⟩}` rail), from which the Kraus operators
/// `K_e = ⟨e|_E U |vac⟩_E` are read off.
pub fn beamsplitter_to_kraus(eta: f64) -> Result<KrausChannel> {
    check_range("transmittance", eta, 0.0, 1.0)?;
    let u = beamsplitter_dilation(eta)?;
    let d = RAIL_DIM;
    let ops = (0..d)
        .map(|e| {
            let mut k = ComplexMatrix::zeros(d, d);
            for out_s in 0..d {
                for in_s in 0..d {
                    k[(out_s, in_s)] = u[(out_s * d + e, in_s * d)];
                }
            }
            k
        })
        .filter(|k| k.max_abs() > 0.0)
        .collect();
    KrausChannel::new(ops, format!("beamsplitter({eta})"))
}

/// Joint unitary on `system ⊗ environment` for a beam splitter of power
/// transmittance `eta`, restricted to at most one photon per polarization pair.
pub fn beamsplitter_dilation(eta: f64) -> Result<ComplexMatrix> {
    check_range("transmittance", eta, 0.0, 1.0)?;
    let angle = eta.sqrt().clamp(0.0, 1.0).acos();
    let bs = gaussian_evolve(&GaussianHamiltonian::beam_splitter(1.0, angle)?)?;
    // One-photon amplitudes: column = input mode (0 system, 1 environment).
    let amp = |to: usize, from: usize| bs.mode_amplitude(to, from);

    let d = RAIL_DIM;
    let idx = |s: usize, e: usize| s * d + e;
    let mut u = ComplexMatrix::identity(d * d);
    for pol in 1..d {
        let sys = idx(pol, 0);
        let env = idx(0, pol);
        for (col, from) in [(sys, 0usize), (env, 1usize)] {
            u[(sys, col)] = amp(0, from);
            u[(env, col)] = amp(1, from);
        }
    }
    let defect = u.unitarity_defect();
    if defect > crate::linalg::UNITARY_TOL {
        return Err(Error::NotUnitary(defect));
    }
    Ok(u)
}

/// `tr_E[U (ρ ⊗ |vac⟩⟨vac|) U†]` evaluated by explicit dilation.
pub fn dilate_and_trace(rho: &DensityMatrix, eta: f64) -> Result<DensityMatrix> {
    let u = beamsplitter_dilation(eta)?;
    let mut vac = vec![C_ZERO; RAIL_DIM];
    vac[0] = C_ONE;
    let env = DensityMatrix::pure(&vac)?;
    let joint = crate::linalg::tensor(rho, &env)?;
    let evolved = crate::linalg::apply_unitary(&joint, &u)?;
    partial_trace(&evolved, &[RAIL_DIM, RAIL_DIM], &[0])
}
