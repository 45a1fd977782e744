use crate::error::{Error, Result};
use crate::linalg::{embed_operator, ComplexMatrix, DensityMatrix, PSD_TOL};

/// Tolerance on `‖Σ K†K − I‖_max` for trace-preserving channels.
pub const COMPLETENESS_TOL: f64 = 1e-10;

/// A quantum channel in operator-sum form, `ρ ↦ Σ_i K_i ρ K_i†`.
///
/// Trace-preserving channels satisfy `Σ K_i†K_i = I`. Heralded channels are
/// post-selected on a detection event and only satisfy `Σ K_i†K_i ≤ I`;
/// applying one renormalizes the output.
#[derive(Clone, Debug, PartialEq)]
pub struct KrausChannel {
    in_dim: usize,
    out_dim: usize,
    operators: Vec<ComplexMatrix>,
    label: String,
    heralded: bool,
}

/// Result of [`verify_cptp`].
#[derive(Clone, Debug, PartialEq)]
pub struct CptpReport {
    /// `‖Σ K†K − I‖_max`.
    pub completeness_residual: f64,
    /// Smallest eigenvalue of `I − Σ K†K`; only meaningful for heralded channels.
    pub defect_min_eigenvalue: f64,
    pub choi_min_eigenvalue: f64,
    pub heralded: bool,
    pub valid: bool,
}

impl KrausChannel {
    /// Builds a trace-preserving channel, rejecting incomplete operator sets.
    pub fn new(operators: Vec<ComplexMatrix>, label: impl Into<String>) -> Result<Self> {
        let ch = Self::unverified(operators, label, false)?;
        let residual = ch.completeness_residual();
        if residual > COMPLETENESS_TOL {
            return Err(Error::InvalidChannel(format!(
                "{}: completeness residual {residual:.3e}",
                ch.label
            )));
        }
        Ok(ch)
    }

    /// Builds a trace-decreasing heralded channel, requiring `Σ K†K ≤ I`.
    pub fn new_heralded(operators: Vec<ComplexMatrix>, label: impl Into<String>) -> Result<Self> {
        let ch = Self::unverified(operators, label, true)?;
        let min = ch.defect_min_eigenvalue();
        if min < -PSD_TOL {
            return Err(Error::InvalidChannel(format!(
                "{}: Σ K†K exceeds identity (defect eigenvalue {min:.3e})",
                ch.label
            )));
        }
        Ok(ch)
    }

    /// Checks shapes only, so that broken operator sets can still be inspected
    /// with [`verify_cptp`].
    pub fn unverified(
        operators: Vec<ComplexMatrix>,
        label: impl Into<String>,
        heralded: bool,
    ) -> Result<Self> {
        let label = label.into();
        let first = operators
            .first()
            .ok_or_else(|| Error::InvalidChannel(format!("{label}: no Kraus operators")))?;
        let (out_dim, in_dim) = (first.rows(), first.cols());
        if let Some(bad) = operators
            .iter()
            .find(|k| k.rows() != out_dim || k.cols() != in_dim)
        {
            return Err(Error::DimensionMismatch(format!(
                "{label}: operator {}x{} differs from {out_dim}x{in_dim}",
                bad.rows(),
                bad.cols()
            )));
        }
        Ok(Self {
            in_dim,
            out_dim,
            operators,
            label,
            heralded,
        })
    }

    pub fn identity(dim: usize) -> Self {
        Self::new(vec![ComplexMatrix::identity(dim)], "identity").unwrap()
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn operators(&self) -> &[ComplexMatrix] {
        &self.operators
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn is_heralded(&self) -> bool {
        self.heralded
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// `Σ K_i† K_i`.
    pub fn gram(&self) -> ComplexMatrix {
        let mut acc = ComplexMatrix::zeros(self.in_dim, self.in_dim);
        for k in &self.operators {
            acc = &acc + &k.dagger().matmul(k);
        }
        acc
    }

    pub fn completeness_residual(&self) -> f64 {
        self.gram().max_abs_diff(&ComplexMatrix::identity(self.in_dim))
    }

    fn defect_min_eigenvalue(&self) -> f64 {
        let defect = &ComplexMatrix::identity(self.in_dim) - &self.gram();
        defect.hermitian_eigenvalues().map(|v| v[0]).unwrap_or(f64::NAN)
    }

    /// `Σ K_i M K_i†` on an arbitrary operator.
    pub fn apply_to_operator(&self, m: &ComplexMatrix) -> Result<ComplexMatrix> {
        if !m.is_square() || m.rows() != self.in_dim {
            return Err(Error::DimensionMismatch(format!(
                "{} expects dimension {}, got {}x{}",
                self.label,
                self.in_dim,
                m.rows(),
                m.cols()
            )));
        }
        let mut acc = ComplexMatrix::zeros(self.out_dim, self.out_dim);
        for k in &self.operators {
            acc = &acc + &m.conjugate_by(k);
        }
        Ok(acc)
    }

    /// Probability that a heralded channel fires on `rho` (1 for trace-preserving ones, up to round-off).
    pub fn success_probability(&self, rho: &DensityMatrix) -> Result<f64> {
        Ok(self.apply_to_operator(rho.matrix())?.trace().re)
    }

    /// Lifts a channel on one subsystem to `I ⊗ … ⊗ E ⊗ … ⊗ I`.
    pub fn on_subsystem(&self, dims: &[usize], target: usize) -> Result<Self> {
        if self.in_dim != self.out_dim {
            return Err(Error::DimensionMismatch(format!(
                "{} changes dimension and cannot be embedded",
                self.label
            )));
        }
        let operators = self
            .operators
            .iter()
            .map(|k| embed_operator(k, dims, target))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            in_dim: operators[0].cols(),
            out_dim: operators[0].rows(),
            operators,
            label: format!("{}@{target}", self.label),
            heralded: self.heralded,
        })
    }
}

/// `Σ K_i ρ K_i†`, renormalized when the channel is heralded.
pub fn apply_channel(ch: &KrausChannel, rho: &DensityMatrix) -> Result<DensityMatrix> {
    let out = ch.apply_to_operator(rho.matrix())?;
    if ch.heralded {
        DensityMatrix::normalized(out)
    } else {
        DensityMatrix::from_cp_output(out)
    }
}

/// Channel applying `a` first, then `b`: operators `{B_j A_i}`.
pub fn compose(a: &KrausChannel, b: &KrausChannel) -> Result<KrausChannel> {
    if a.out_dim != b.in_dim {
        return Err(Error::DimensionMismatch(format!(
            "cannot feed {} (out {}) into {} (in {})",
            a.label, a.out_dim, b.label, b.in_dim
        )));
    }
    let mut operators = Vec::with_capacity(a.operators.len() * b.operators.len());
    for bj in &b.operators {
        for ai in &a.operators {
            let prod = bj.matmul(ai);
            if prod.max_abs() > 0.0 {
                operators.push(prod);
            }
        }
    }
    if operators.is_empty() {
        operators.push(ComplexMatrix::zeros(b.out_dim, a.in_dim));
    }
    Ok(KrausChannel {
        in_dim: a.in_dim,
        out_dim: b.out_dim,
        operators,
        label: format!("{}>{}", a.label, b.label),
        heralded: a.heralded || b.heralded,
    })
}

/// Choi matrix `Σ_{ij} |i⟩⟨j| ⊗ E(|i⟩⟨j|)`.
pub fn choi_matrix(ch: &KrausChannel) -> ComplexMatrix {
    let (din, dout) = (ch.in_dim, ch.out_dim);
    let mut choi = ComplexMatrix::zeros(din * dout, din * dout);
    for i in 0..din {
        for j in 0..din {
            let mut unit = ComplexMatrix::zeros(din, din);
            unit[(i, j)] = crate::linalg::C_ONE;
            let image = ch.apply_to_operator(&unit).expect("shape checked");
            for r in 0..dout {
                for c in 0..dout {
                    choi[(i * dout + r, j * dout + c)] = image[(r, c)];
                }
            }
        }
    }
    choi
}

/// Completeness residual and Choi positivity. Never fails; invalid channels
/// are reported with `valid = false`.
pub fn verify_cptp(ch: &KrausChannel) -> CptpReport {
    let completeness_residual = ch.completeness_residual();
    let defect_min_eigenvalue = ch.defect_min_eigenvalue();
    let choi_min_eigenvalue = choi_matrix(ch)
        .hermitian_eigenvalues()
        .map(|v| v[0])
        .unwrap_or(f64::NAN);
    let normalization_ok = if ch.heralded {
        defect_min_eigenvalue >= -PSD_TOL
    } else {
        completeness_residual <= COMPLETENESS_TOL
    };
    CptpReport {
        completeness_residual,
        defect_min_eigenvalue,
        choi_min_eigenvalue,
        heralded: ch.heralded,
        valid: normalization_ok && choi_min_eigenvalue >= -PSD_TOL,
    }
}
