//! Two-mode (system ⊗ auxiliary) transfer channel.
//!
//! Basis index for system level `i` and auxiliary level `j` is `i·N + j`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::fock::{FockOperator, FockVector, OperatorKind, PositionEigenbasis};

/// Largest per-mode truncation accepted by the two-mode pipeline.
pub const MAX_MODE_DIM: usize = 32;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

fn check_dim(dim: usize) -> Result<()> {
    if dim > MAX_MODE_DIM {
        return Err(Error::DimensionOverflow { dim: dim * dim, max: MAX_MODE_DIM * MAX_MODE_DIM });
    }
    if dim < 2 {
        return Err(invalid("dim", format!("two-mode pipeline needs N >= 2, got {dim}")));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct TwoModeState {
    dim: usize,
    amplitudes: DVector<Complex64>,
}

impl TwoModeState {
    pub fn product(system: &FockVector, aux: &FockVector) -> Result<Self> {
        let dim = system.dim();
        if aux.dim() != dim {
            return Err(invalid("aux", "modes must share a truncation"));
        }
        check_dim(dim)?;
        let (s, a) = (system.amplitudes(), aux.amplitudes());
        let amplitudes = DVector::from_fn(dim * dim, |k, _| s[k / dim] * a[k % dim]);
        Ok(Self { dim, amplitudes })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn amplitudes(&self) -> &DVector<Complex64> {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.norm_squared()
    }

    /// Unnormalized system state conditioned on the auxiliary level.
    pub fn system_component(&self, aux_level: usize) -> FockVector {
        let n = self.dim;
        FockVector::from_dvector(DVector::from_fn(n, |i, _| self.amplitudes[i * n + aux_level]))
    }

    /// `⟨0|_aux Ψ⟩`, unnormalized.
    pub fn project_aux_vacuum(&self) -> FockVector {
        self.system_component(0)
    }

    /// Reduced system density matrix `Tr_aux |Ψ⟩⟨Ψ|`.
    pub fn reduced_system(&self) -> DMatrix<Complex64> {
        let n = self.dim;
        DMatrix::from_fn(n, n, |i, k| {
            let mut acc = ZERO;
            for j in 0..n {
                acc += self.amplitudes[i * n + j] * self.amplitudes[k * n + j].conj();
            }
            acc
        })
    }

    /// `⟨a⊗1⟩ / ⟨Ψ|Ψ⟩`.
    pub fn system_mean_annihilation(&self) -> Complex64 {
        let n = self.dim;
        let mut acc = ZERO;
        for i in 1..n {
            let s = (i as f64).sqrt();
            for j in 0..n {
                acc += self.amplitudes[(i - 1) * n + j].conj() * self.amplitudes[i * n + j] * s;
            }
        }
        acc / self.norm_sqr()
    }

    /// `(O ⊗ 1)|Ψ⟩`.
    pub fn apply_system(&self, op: &FockOperator) -> Self {
        let n = self.dim;
        let m = op.matrix();
        let mut out = DVector::from_element(n * n, ZERO);
        for i in 0..n {
            for k in 0..n {
                let c = m[(i, k)];
                if c == ZERO {
                    continue;
                }
                for j in 0..n {
                    out[i * n + j] += c * self.amplitudes[k * n + j];
                }
            }
        }
        Self { dim: n, amplitudes: out }
    }

    pub fn apply(&self, op: &TwoModeOperator) -> Self {
        Self { dim: self.dim, amplitudes: &op.matrix * &self.amplitudes }
    }

    pub(crate) fn apply_real(&self, op: &DMatrix<f64>) -> Self {
        let n2 = self.amplitudes.len();
        let out = DVector::from_fn(n2, |r, _| {
            let mut acc = ZERO;
            for c in 0..n2 {
                let w = op[(r, c)];
                if w != 0.0 {
                    acc += self.amplitudes[c] * w;
                }
            }
            acc
        });
        Self { dim: self.dim, amplitudes: out }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TwoModeOperator {
    dim: usize,
    matrix: DMatrix<Complex64>,
}

impl TwoModeOperator {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn unitarity_defect(&self) -> f64 {
        let n2 = self.matrix.nrows();
        let prod = self.matrix.adjoint() * &self.matrix - DMatrix::<Complex64>::identity(n2, n2);
        prod.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }
}

/// Real beam splitter `exp[θ(a†c − a c†)]` with `cos θ = ξ`, so that
/// `a → ξa + √(1−ξ²)c` in the Heisenberg picture.
pub fn beam_splitter(xi: f64, dim: usize) -> Result<DMatrix<f64>> {
    check_dim(dim)?;
    if !(xi > 0.0 && xi <= 1.0) {
        return Err(invalid("xi", format!("must lie in (0, 1], got {xi}")));
    }
    let theta = xi.acos();
    let n2 = dim * dim;
    if theta == 0.0 {
        return Ok(DMatrix::identity(n2, n2));
    }
    // (a†c) maps |i, j⟩ → √(i+1)√j |i+1, j−1⟩
    let mut gen = DMatrix::<f64>::zeros(n2, n2);
    for i in 0..dim - 1 {
        for j in 1..dim {
            let w = theta * ((i + 1) as f64).sqrt() * (j as f64).sqrt();
            let from = i * dim + j;
            let to = (i + 1) * dim + (j - 1);
            gen[(to, from)] += w;
            gen[(from, to)] -= w;
        }
    }
    Ok(gen.exp())
}

/// Transfer channel `L = exp(−iδ′x̃) · B(ξ)` acting on system ⊗ auxiliary;
/// the kick has the same orientation as the lossless `V(δ′)`.
pub fn loss_channel(xi: f64, delta_prime: f64, dim: usize) -> Result<TwoModeOperator> {
    let bs = beam_splitter(xi, dim)?;
    let kick = PositionEigenbasis::new(dim)?.kick_operator(delta_prime);
    debug_assert_eq!(kick.kind(), OperatorKind::Unitary);
    let shift = kick.matrix().kronecker(&DMatrix::<Complex64>::identity(dim, dim));
    let bs_c = bs.map(|w| Complex64::new(w, 0.0));
    Ok(TwoModeOperator { dim, matrix: shift * bs_c })
}
