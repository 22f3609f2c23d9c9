//! Pure and mixed states over the computational basis `{|0>, …, |d-1>}`,
//! the discrete quantum Fourier transform, Haar sampling, fidelity and purity.
//!
//! The Fourier convention is `F_{jk} = d^{-1/2} exp(+2πi jk/d)`. With this sign
//! the Fraunhofer field of a slit array sampled at the detector positions of
//! [`crate::optics`] equals the forward transform, so the same operator
//! describes both the optics and the measurement basis used by the PIE loop.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance used to decide whether a state has unit norm.
pub const NORM_TOLERANCE: f64 = 1e-12;

/// Complex amplitude vector `c_0 … c_{d-1}`.
///
/// States are stored as given: projector outputs and PIE intermediates are
/// unnormalized, and no global phase is imposed.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::InvalidDimension { dim: 0, reason: "a state needs at least one amplitude" });
        }
        Ok(Self { amplitudes })
    }

    /// Builds a state and rescales it to unit norm.
    pub fn normalized(amplitudes: Vec<Complex64>) -> Result<Self> {
        Self::new(amplitudes)?.normalize()
    }

    /// Computational basis state `|k>`.
    pub fn basis(dim: usize, k: usize) -> Result<Self> {
        if k >= dim {
            return Err(Error::InvalidDimension { dim, reason: "basis index out of range" });
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        amps[k] = Complex64::new(1.0, 0.0);
        Self::new(amps)
    }

    /// Equal-weight superposition `d^{-1/2} Σ_k |k>`.
    pub fn uniform(dim: usize) -> Result<Self> {
        let a = 1.0 / (dim as f64).sqrt();
        Self::new(vec![Complex64::new(a, 0.0); dim])
    }

    pub fn zeros(dim: usize) -> Result<Self> {
        Self::new(vec![Complex64::new(0.0, 0.0); dim])
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm_sqr() - 1.0).abs() <= NORM_TOLERANCE
    }

    pub fn normalize(self) -> Result<Self> {
        let n = self.norm();
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::DegenerateEstimate);
        }
        Ok(self.scale(Complex64::new(1.0 / n, 0.0)))
    }

    pub fn scale(mut self, factor: Complex64) -> Self {
        for c in &mut self.amplitudes {
            *c *= factor;
        }
        self
    }

    /// `<self|other>`, antilinear in `self`.
    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        check_dims(self.dim(), other.dim())?;
        Ok(self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| a.conj() * b).sum())
    }

    /// Euclidean distance `‖self - other‖`.
    pub fn distance(&self, other: &StateVector) -> Result<f64> {
        check_dims(self.dim(), other.dim())?;
        Ok(self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt())
    }
}

pub(crate) fn check_dims(expected: usize, actual: usize) -> Result<()> {
    if expected != actual {
        return Err(Error::DimensionMismatch { expected, actual });
    }
    Ok(())
}

/// Draws a Haar-random pure state: i.i.d. standard complex Gaussian entries,
/// then normalized.
pub fn haar_random_state<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<StateVector> {
    if dim == 0 {
        return Err(Error::InvalidDimension { dim, reason: "Haar sampling needs d >= 1" });
    }
    loop {
        let amps: Vec<Complex64> = (0..dim)
            .map(|_| {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                Complex64::new(re, im)
            })
            .collect();
        // a zero draw has probability zero but would not normalize
        if let Ok(state) = StateVector::normalized(amps) {
            return Ok(state);
        }
    }
}

/// Dense `d × d` Fourier matrix, `F_{jk} = d^{-1/2} exp(+2πi jk/d)`.
pub fn qft_matrix(dim: usize) -> Vec<Vec<Complex64>> {
    let scale = 1.0 / (dim as f64).sqrt();
    (0..dim)
        .map(|j| {
            (0..dim)
                .map(|k| {
                    let phase = 2.0 * PI * ((j * k) % dim) as f64 / dim as f64;
                    Complex64::from_polar(scale, phase)
                })
                .collect()
        })
        .collect()
}

/// `F|state>`.
pub fn qft(state: &StateVector) -> StateVector {
    let f = qft_matrix(state.dim());
    let amps = f.iter().map(|row| row.iter().zip(state.amplitudes()).map(|(m, c)| m * c).sum()).collect();
    StateVector { amplitudes: amps }
}

/// `F†|state>`, the exact adjoint of [`qft`].
pub fn qft_inverse(state: &StateVector) -> StateVector {
    let f = qft_matrix(state.dim());
    let d = state.dim();
    let amps = (0..d).map(|j| (0..d).map(|k| f[k][j].conj() * state.amplitudes()[k]).sum()).collect();
    StateVector { amplitudes: amps }
}

/// Precomputed Fourier operator for repeated application inside the PIE loop.
///
/// Only the `d` distinct roots of unity are stored; `F_{jk}` is looked up as
/// `roots[(j * k) mod d]`.
#[derive(Debug, Clone)]
pub(crate) struct Dft {
    dim: usize,
    roots: Vec<Complex64>,
}

impl Dft {
    pub(crate) fn new(dim: usize) -> Self {
        let scale = 1.0 / (dim as f64).sqrt();
        let roots = (0..dim).map(|m| Complex64::from_polar(scale, 2.0 * PI * m as f64 / dim as f64)).collect();
        Self { dim, roots }
    }

    /// `out = F x`, where `x` is nonzero only on `support`.
    pub(crate) fn forward_from_support(&self, x: &[Complex64], support: &[usize], out: &mut [Complex64]) {
        let d = self.dim;
        for (j, o) in out.iter_mut().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for &k in support {
                acc += self.roots[(j * k) % d] * x[k];
            }
            *o = acc;
        }
    }

    /// `out[k] = (F† y)_k` for `k` in `support` only.
    pub(crate) fn inverse_onto_support(&self, y: &[Complex64], support: &[usize], out: &mut [Complex64]) {
        let d = self.dim;
        for &k in support {
            let mut acc = Complex64::new(0.0, 0.0);
            for (j, v) in y.iter().enumerate() {
                acc += self.roots[(j * k) % d].conj() * v;
            }
            out[k] = acc;
        }
    }
}

/// `|<a|b>|²`. Invariant under the global phase of either argument.
pub fn fidelity(a: &StateVector, b: &StateVector) -> Result<f64> {
    Ok(a.inner(b)?.norm_sqr())
}

/// Density operator `ρ`, Hermitian with unit trace and nonnegative spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    entries: DMatrix<Complex64>,
}

impl DensityMatrix {
    const HERMITIAN_TOL: f64 = 1e-12;
    const TRACE_TOL: f64 = 1e-12;
    const EIGEN_TOL: f64 = 1e-10;

    /// Validates and wraps a `d × d` matrix.
    pub fn new(entries: DMatrix<Complex64>) -> Result<Self> {
        let (rows, cols) = entries.shape();
        if rows != cols || rows == 0 {
            return Err(Error::InvalidDensityMatrix(format!("expected a nonempty square matrix, got {rows}x{cols}")));
        }
        let herm_err = (&entries - entries.adjoint()).iter().map(|c| c.norm()).fold(0.0, f64::max);
        if herm_err > Self::HERMITIAN_TOL {
            return Err(Error::InvalidDensityMatrix(format!("not Hermitian (max deviation {herm_err:e})")));
        }
        let trace = entries.trace();
        if (trace.re - 1.0).abs() > Self::TRACE_TOL || trace.im.abs() > Self::TRACE_TOL {
            return Err(Error::InvalidDensityMatrix(format!("trace {trace} != 1")));
        }
        let min_eig = entries.clone().symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min);
        if min_eig < -Self::EIGEN_TOL {
            return Err(Error::InvalidDensityMatrix(format!("negative eigenvalue {min_eig:e}")));
        }
        Ok(Self { entries })
    }

    /// `|ψ><ψ|` for a normalized `ψ`.
    pub fn pure(psi: &StateVector) -> Result<Self> {
        if !psi.is_normalized() {
            return Err(Error::InvalidDensityMatrix("pure state is not normalized".into()));
        }
        Ok(Self { entries: outer(psi) })
    }

    /// `I/d`.
    pub fn maximally_mixed(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidDimension { dim, reason: "density matrix needs d >= 1" });
        }
        let w = Complex64::new(1.0 / dim as f64, 0.0);
        Ok(Self { entries: DMatrix::from_diagonal_element(dim, dim, w) })
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }
}

fn outer(psi: &StateVector) -> DMatrix<Complex64> {
    let d = psi.dim();
    let a = psi.amplitudes();
    DMatrix::from_fn(d, d, |i, j| a[i] * a[j].conj())
}

/// `Tr(ρ²)`.
pub fn purity(rho: &DensityMatrix) -> f64 {
    // ρ is Hermitian, so Tr(ρ²) = Σ_ij |ρ_ij|²
    rho.entries.iter().map(|c| c.norm_sqr()).sum()
}

/// `ρ = p|ψ><ψ| + (1-p) I/d`.
pub fn mix_with_white_noise(psi: &StateVector, p: f64) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidProbability(p));
    }
    let pure = DensityMatrix::pure(psi)?;
    let d = psi.dim();
    let noise = (1.0 - p) / d as f64;
    let entries = DMatrix::from_fn(d, d, |i, j| {
        let mut v = pure.entries[(i, j)] * p;
        if i == j {
            v += noise;
        }
        v
    });
    Ok(DensityMatrix { entries })
}

/// Closed-form purity of the white-noise mixture of a pure state.
pub fn white_noise_purity(p: f64, dim: usize) -> f64 {
    let d = dim as f64;
    p * p + 2.0 * p * (1.0 - p) / d + (1.0 - p) * (1.0 - p) / d
}

/// Inverse of [`white_noise_purity`] on `p ∈ [0, 1]`.
pub fn white_noise_weight_for_purity(target: f64, dim: usize) -> Result<f64> {
    let d = dim as f64;
    // purity = p²(1 - 1/d) + 1/d
    if dim < 2 || target < 1.0 / d || target > 1.0 {
        return Err(Error::InvalidProbability(target));
    }
    Ok(((target - 1.0 / d) / (1.0 - 1.0 / d)).sqrt())
}

/// Serialized form of a state file: `{dim, amplitudes: [[re, im], …]}`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct StateFile {
    pub dim: usize,
    pub amplitudes: Vec<[f64; 2]>,
}

impl From<&StateVector> for StateFile {
    fn from(s: &StateVector) -> Self {
        Self { dim: s.dim(), amplitudes: s.amplitudes().iter().map(|c| [c.re, c.im]).collect() }
    }
}

impl TryFrom<StateFile> for StateVector {
    type Error = Error;

    fn try_from(f: StateFile) -> Result<Self> {
        check_dims(f.dim, f.amplitudes.len())?;
        StateVector::new(f.amplitudes.into_iter().map(|[re, im]| Complex64::new(re, im)).collect())
    }
}
