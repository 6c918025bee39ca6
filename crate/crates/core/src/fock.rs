//! Dense linear algebra on a truncated oscillator Fock space.
//!
//! States are amplitude vectors over `|0⟩ … |N−1⟩`; operators are dense
//! `N × N` complex matrices tagged with the structural property they are
//! expected to satisfy.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::quadrature::simpson;

/// Tail tolerance applied to states produced by the standard pipeline.
pub const DEFAULT_TAIL_TOLERANCE: f64 = 1e-8;
/// Number of top Fock levels counted as the truncation tail.
pub const TAIL_LEVELS: usize = 5;
/// Default number of homodyne grid points.
pub const DEFAULT_GRID_SIZE: usize = 2001;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// `N = ceil(|α|² + 10|α| + 20)`.
pub fn standard_truncation(amplitude: f64) -> usize {
    let a = amplitude.abs();
    (a * a + 10.0 * a + 20.0).ceil() as usize
}

#[derive(Clone, Debug, PartialEq)]
pub struct FockVector {
    amplitudes: DVector<Complex64>,
}

impl FockVector {
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Self {
        Self { amplitudes: DVector::from_vec(amplitudes) }
    }

    pub fn from_dvector(amplitudes: DVector<Complex64>) -> Self {
        Self { amplitudes }
    }

    pub fn number_state(level: usize, dim: usize) -> Self {
        let mut amplitudes = DVector::from_element(dim, ZERO);
        amplitudes[level] = ONE;
        Self { amplitudes }
    }

    pub fn vacuum(dim: usize) -> Self {
        Self::number_state(0, dim)
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &DVector<Complex64> {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn normalized(&self) -> Result<Self> {
        let norm = self.norm_sqr().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::ZeroNorm);
        }
        Ok(Self { amplitudes: self.amplitudes.unscale(norm) })
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &FockVector) -> Complex64 {
        self.amplitudes.dotc(&other.amplitudes)
    }

    /// Global-phase-insensitive overlap `|⟨a|b⟩|² / (‖a‖²‖b‖²)`.
    pub fn fidelity(&self, other: &FockVector) -> f64 {
        self.inner(other).norm_sqr() / (self.norm_sqr() * other.norm_sqr())
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self { amplitudes: self.amplitudes.map(|c| c * factor) }
    }

    pub fn add(&self, other: &FockVector) -> Self {
        Self { amplitudes: &self.amplitudes + &other.amplitudes }
    }

    /// Probability mass in the top [`TAIL_LEVELS`] levels.
    pub fn tail_mass(&self) -> f64 {
        let start = self.dim().saturating_sub(TAIL_LEVELS);
        self.amplitudes.iter().skip(start).map(|c| c.norm_sqr()).sum()
    }

    pub fn check_tail(&self, tolerance: f64) -> Result<()> {
        let tail = self.tail_mass() / self.norm_sqr().max(f64::MIN_POSITIVE);
        if tail > tolerance {
            return Err(Error::TruncationTooSmall { dim: self.dim(), tail, tolerance });
        }
        Ok(())
    }

    /// `⟨ψ|O|ψ⟩` without normalization.
    pub fn expect(&self, op: &FockOperator) -> Complex64 {
        self.amplitudes.dotc(&(&op.matrix * &self.amplitudes))
    }

    pub fn mean_number(&self) -> f64 {
        self.amplitudes
            .iter()
            .enumerate()
            .map(|(n, c)| n as f64 * c.norm_sqr())
            .sum::<f64>()
            / self.norm_sqr()
    }

    /// `⟨a⟩` for the normalized state.
    pub fn mean_annihilation(&self) -> Complex64 {
        let mut acc = ZERO;
        for n in 1..self.dim() {
            acc += self.amplitudes[n - 1].conj() * self.amplitudes[n] * (n as f64).sqrt();
        }
        acc / self.norm_sqr()
    }

    /// `⟨X⟩ = Re⟨a⟩` with `X = (a + a†)/2`.
    pub fn mean_x(&self) -> f64 {
        self.mean_annihilation().re
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OperatorKind {
    Unitary,
    Contraction,
    Hermitian,
    General,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FockOperator {
    matrix: DMatrix<Complex64>,
    kind: OperatorKind,
}

impl FockOperator {
    pub fn new(matrix: DMatrix<Complex64>, kind: OperatorKind) -> Self {
        assert!(matrix.is_square(), "Fock operators are square");
        Self { matrix, kind }
    }

    pub fn identity(dim: usize) -> Self {
        Self::new(DMatrix::identity(dim, dim), OperatorKind::Unitary)
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn kind(&self) -> OperatorKind {
        self.kind
    }

    pub fn apply(&self, psi: &FockVector) -> FockVector {
        assert_eq!(self.dim(), psi.dim(), "dimension mismatch");
        FockVector::from_dvector(&self.matrix * &psi.amplitudes)
    }

    /// `self · other`.
    pub fn compose(&self, other: &FockOperator) -> FockOperator {
        use OperatorKind::*;
        let kind = match (self.kind, other.kind) {
            (Unitary, Unitary) => Unitary,
            (Unitary | Contraction, Unitary | Contraction) => Contraction,
            _ => General,
        };
        FockOperator::new(&self.matrix * &other.matrix, kind)
    }

    pub fn adjoint(&self) -> FockOperator {
        FockOperator::new(self.matrix.adjoint(), self.kind)
    }

    /// Max-entry norm of `O†O − I`.
    pub fn unitarity_defect(&self) -> f64 {
        let gram = self.matrix.adjoint() * &self.matrix;
        let n = self.dim();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let target = if i == j { ONE } else { ZERO };
                worst = worst.max((gram[(i, j)] - target).norm());
            }
        }
        worst
    }

    pub fn max_singular_value(&self) -> f64 {
        self.matrix
            .clone()
            .singular_values()
            .iter()
            .cloned()
            .fold(0.0, f64::max)
    }

    /// Max-entry distance to `other` after removing the best global phase.
    pub fn distance_up_to_phase(&self, other: &FockOperator) -> f64 {
        let overlap: Complex64 = self
            .matrix
            .iter()
            .zip(other.matrix.iter())
            .map(|(x, y)| x.conj() * y)
            .sum();
        let phase = if overlap.norm() > 0.0 { overlap / overlap.norm() } else { ONE };
        self.matrix
            .iter()
            .zip(other.matrix.iter())
            .map(|(x, y)| (x * phase - y).norm())
            .fold(0.0, f64::max)
    }
}

/// Annihilation, creation and number operators.
#[derive(Clone, Debug)]
pub struct LadderOps {
    pub a: FockOperator,
    pub a_dag: FockOperator,
    pub number: FockOperator,
}

pub fn ladder_ops(dim: usize) -> Result<LadderOps> {
    if dim < 2 {
        return Err(invalid("dim", format!("ladder operators need N >= 2, got {dim}")));
    }
    let a = DMatrix::from_fn(dim, dim, |i, j| {
        if j == i + 1 {
            Complex64::new((j as f64).sqrt(), 0.0)
        } else {
            ZERO
        }
    });
    let a_dag = a.adjoint();
    let number = &a_dag * &a;
    Ok(LadderOps {
        a: FockOperator::new(a, OperatorKind::General),
        a_dag: FockOperator::new(a_dag, OperatorKind::General),
        number: FockOperator::new(number, OperatorKind::Hermitian),
    })
}

/// `X = (a + a†)/2` as a Hermitian operator.
pub fn quadrature_operator(dim: usize) -> Result<FockOperator> {
    let ops = ladder_ops(dim)?;
    let x = (ops.a.matrix() + ops.a_dag.matrix()).scale(0.5);
    Ok(FockOperator::new(x, OperatorKind::Hermitian))
}

/// Coherent state with the default tail tolerance.
pub fn coherent_state(alpha: Complex64, dim: usize) -> Result<FockVector> {
    coherent_state_with_tolerance(alpha, dim, DEFAULT_TAIL_TOLERANCE)
}

pub fn coherent_state_with_tolerance(alpha: Complex64, dim: usize, tolerance: f64) -> Result<FockVector> {
    if dim == 0 {
        return Err(invalid("dim", "truncation must be positive"));
    }
    let mut amps = Vec::with_capacity(dim);
    let mut c = Complex64::new((-0.5 * alpha.norm_sqr()).exp(), 0.0);
    amps.push(c);
    for n in 1..dim {
        c = c * alpha / (n as f64).sqrt();
        amps.push(c);
    }
    let psi = FockVector::from_amplitudes(amps);
    let tail = psi.tail_mass();
    if tail > tolerance {
        return Err(Error::TruncationTooSmall { dim, tail, tolerance });
    }
    Ok(psi)
}

/// `U_θ = exp(−iθ(a†a)²)`, diagonal with entries `e^{−iθn²}`.
pub fn kerr_unitary(theta: f64, dim: usize) -> FockOperator {
    kerr_diagonal(theta, 0.0, dim)
}

/// `U_θ · exp(−d·a†a/2)`: Kerr phase with amplitude damping `d = κt`.
pub(crate) fn kerr_diagonal(theta: f64, damping: f64, dim: usize) -> FockOperator {
    let diag = DVector::from_fn(dim, |n, _| {
        let nf = n as f64;
        Complex64::from_polar((-0.5 * damping * nf).exp(), -theta * nf * nf)
    });
    let kind = if damping == 0.0 { OperatorKind::Unitary } else { OperatorKind::Contraction };
    FockOperator::new(DMatrix::from_diagonal(&diag), kind)
}

/// Eigenbasis of the truncated `x̃ = a + a†`, used to build exactly unitary
/// displacement kicks `exp(−iδx̃)`.
#[derive(Clone, Debug)]
pub struct PositionEigenbasis {
    vectors: DMatrix<f64>,
    values: DVector<f64>,
}

impl PositionEigenbasis {
    pub fn new(dim: usize) -> Result<Self> {
        if dim < 2 {
            return Err(invalid("dim", format!("position operator needs N >= 2, got {dim}")));
        }
        let xt = DMatrix::from_fn(dim, dim, |i, j| {
            if j == i + 1 {
                (j as f64).sqrt()
            } else if i == j + 1 {
                (i as f64).sqrt()
            } else {
                0.0
            }
        });
        let eig = SymmetricEigen::new(xt);
        Ok(Self { vectors: eig.eigenvectors, values: eig.eigenvalues })
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// Dense `exp(−iδx̃)`.
    pub fn kick_operator(&self, delta: f64) -> FockOperator {
        let n = self.dim();
        let phases: Vec<Complex64> = self.values.iter().map(|&l| Complex64::from_polar(1.0, -delta * l)).collect();
        let m = DMatrix::from_fn(n, n, |i, j| {
            let mut acc = ZERO;
            for k in 0..n {
                acc += phases[k] * (self.vectors[(i, k)] * self.vectors[(j, k)]);
            }
            acc
        });
        FockOperator::new(m, OperatorKind::Unitary)
    }

    /// `exp(−iδx̃)|ψ⟩` in `O(N²)` without forming the matrix.
    pub fn kick(&self, delta: f64, psi: &FockVector) -> FockVector {
        let n = self.dim();
        assert_eq!(n, psi.dim(), "dimension mismatch");
        let amps = psi.amplitudes();
        let mut projected = vec![ZERO; n];
        for (k, slot) in projected.iter_mut().enumerate() {
            let mut acc = ZERO;
            for i in 0..n {
                acc += amps[i] * self.vectors[(i, k)];
            }
            *slot = acc * Complex64::from_polar(1.0, -delta * self.values[k]);
        }
        let out = DVector::from_fn(n, |i, _| {
            let mut acc = ZERO;
            for (k, p) in projected.iter().enumerate() {
                acc += p * self.vectors[(i, k)];
            }
            acc
        });
        FockVector::from_dvector(out)
    }
}

/// `V(δ) = exp(−iδ(a + a†))`, i.e. `|α₀⟩ → e^{−iδα}|α₀ − iδ⟩`.
pub fn force_kick(delta: f64, dim: usize) -> Result<FockOperator> {
    Ok(PositionEigenbasis::new(dim)?.kick_operator(delta))
}

/// Parity `exp(iπ a†a)`, i.e. `a → −a`.
pub fn parity(dim: usize) -> FockOperator {
    let diag = DVector::from_fn(dim, |n, _| if n % 2 == 0 { ONE } else { -ONE });
    FockOperator::new(DMatrix::from_diagonal(&diag), OperatorKind::Unitary)
}

/// Homodyne statistics of `X = (a + a†)/2`.
#[derive(Clone, Debug)]
pub struct QuadratureResult {
    /// `⟨ψ|X|ψ⟩` from the Fock amplitudes.
    pub mean_x: f64,
    /// `∫_{x>0} p(x) dx`.
    pub prob_x_positive: f64,
    /// `(x, p(x))` on a symmetric uniform grid.
    pub density: Vec<(f64, f64)>,
}

impl QuadratureResult {
    pub fn step(&self) -> f64 {
        self.density[1].0 - self.density[0].0
    }

    pub fn total_probability(&self) -> f64 {
        let p: Vec<f64> = self.density.iter().map(|&(_, p)| p).collect();
        simpson(&p, self.step())
    }

    /// `∫ x p(x) dx`.
    pub fn density_mean(&self) -> f64 {
        let xp: Vec<f64> = self.density.iter().map(|&(x, p)| x * p).collect();
        simpson(&xp, self.step())
    }

    /// Locations of the density maxima on the negative and positive half-lines.
    pub fn peak_positions(&self) -> (f64, f64) {
        let argmax = |pred: fn(f64) -> bool| {
            self.density
                .iter()
                .filter(|(x, _)| pred(*x))
                .fold((0.0, f64::NEG_INFINITY), |best, &(x, p)| if p > best.1 { (x, p) } else { best })
                .0
        };
        (argmax(|x| x < 0.0), argmax(|x| x > 0.0))
    }
}

/// Hermite functions `ψ_n(q)`, `n < dim`, by the normalized three-term recurrence.
pub(crate) fn hermite_functions(q: f64, dim: usize, out: &mut [f64]) {
    out[0] = std::f64::consts::PI.powf(-0.25) * (-0.5 * q * q).exp();
    if dim > 1 {
        out[1] = std::f64::consts::SQRT_2 * q * out[0];
    }
    for k in 1..dim.saturating_sub(1) {
        let kf = k as f64;
        out[k + 1] = (2.0 / (kf + 1.0)).sqrt() * q * out[k] - (kf / (kf + 1.0)).sqrt() * out[k - 1];
    }
}

/// Homodyne density of `X` for a normalized state.
///
/// `grid_size` is rounded up to the next `4j + 1` so that `x = 0` is a grid
/// point and both half-lines carry an even number of Simpson intervals.
pub fn quadrature_distribution(psi: &FockVector, grid_size: usize) -> Result<QuadratureResult> {
    let norm = psi.norm_sqr();
    if (norm - 1.0).abs() > 1e-8 {
        return Err(invalid("psi", format!("state must be normalized, ‖ψ‖² = {norm}")));
    }
    let dim = psi.dim();
    let intervals = grid_size.max(41).saturating_sub(1).div_ceil(4) * 4;
    let points = intervals + 1;
    let half_width = psi.mean_number().sqrt() + 6.0;
    let step = 2.0 * half_width / intervals as f64;

    let amps = psi.amplitudes();
    let mut basis = vec![0.0; dim];
    let density: Vec<(f64, f64)> = (0..points)
        .map(|k| {
            let x = if k == intervals / 2 { 0.0 } else { -half_width + k as f64 * step };
            // X = q/√2, so p_X(x) = √2 |ψ(√2 x)|²
            hermite_functions(std::f64::consts::SQRT_2 * x, dim, &mut basis);
            let amp: Complex64 = amps.iter().zip(basis.iter()).map(|(c, h)| c * *h).sum();
            (x, std::f64::consts::SQRT_2 * amp.norm_sqr())
        })
        .collect();

    let positive: Vec<f64> = density[intervals / 2..].iter().map(|&(_, p)| p).collect();
    let result = QuadratureResult {
        mean_x: psi.mean_x(),
        prob_x_positive: simpson(&positive, step).clamp(0.0, 1.0),
        density,
    };

    let total = result.total_probability();
    if (total - 1.0).abs() > 1e-6 {
        return Err(Error::GridTooCoarse { reason: format!("density integrates to {total}") });
    }
    let mean_gap = (result.density_mean() - result.mean_x).abs();
    if mean_gap > 1e-6 {
        return Err(Error::GridTooCoarse { reason: format!("density mean off by {mean_gap:.3e}") });
    }
    Ok(result)
}
