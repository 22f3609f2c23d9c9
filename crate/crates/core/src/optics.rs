//! Slit-array optics: near-field (image plane) and Fraunhofer far-field
//! (lens focal plane) intensity profiles, and the detector positions at which
//! far-field pixels realize the Fourier-basis measurement.
//!
//! The path `k` is a top-hat slit of width `a` centred at `x = kδ`. In the
//! focal plane of a lens of focal length `f` the field is
//! `sinc(π a x/(λf)) Σ_k c_k exp(-2πi k δ x/(λf))`.
//! At `x_j = -λ f μ_j/(δ d)` the phase of path `k` is `exp(+2πi k j/d)`,
//! so the interference term is `d·|(F ψ)_j|²`.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::StateVector;

const SLM_PIXEL: f64 = 8e-6;

/// Lengths in metres.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OpticalGeometry {
    pub wavelength: f64,
    pub focal_length: f64,
    /// Centre-to-centre separation of adjacent paths.
    pub pitch: f64,
    pub slit_width: f64,
    pub dim: usize,
}

impl OpticalGeometry {
    pub fn new(wavelength: f64, focal_length: f64, pitch: f64, slit_width: f64, dim: usize) -> Result<Self> {
        let g = Self { wavelength, focal_length, pitch, slit_width, dim };
        g.validate()?;
        Ok(g)
    }

    /// Laboratory parameters: 687 nm light, 30 cm lens, and slits drawn on an
    /// 8 µm-pixel modulator, 11 px wide with an 11 px gap for `d < 20`, and
    /// 9 px wide with a 5 px gap for `d >= 20`.
    pub fn laboratory(dim: usize) -> Self {
        let (width_px, gap_px) = if dim < 20 { (11.0, 11.0) } else { (9.0, 5.0) };
        Self {
            wavelength: 687e-9,
            focal_length: 0.30,
            pitch: (width_px + gap_px) * SLM_PIXEL,
            slit_width: width_px * SLM_PIXEL,
            dim,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let lengths = [
            ("wavelength", self.wavelength),
            ("focal_length", self.focal_length),
            ("pitch", self.pitch),
            ("slit_width", self.slit_width),
        ];
        for (name, v) in lengths {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Geometry(format!("{name} must be positive, got {v}")));
            }
        }
        if self.slit_width >= self.pitch {
            return Err(Error::Geometry(format!(
                "slit width {} must be smaller than the pitch {}",
                self.slit_width, self.pitch
            )));
        }
        if self.dim == 0 {
            return Err(Error::Geometry("dimension must be positive".into()));
        }
        Ok(())
    }

    /// Spatial frequency scale `1/(λf)`.
    fn inv_lambda_f(&self) -> f64 {
        1.0 / (self.wavelength * self.focal_length)
    }

    /// Position of the first zero of the single-slit envelope, `λf/a`.
    pub fn first_envelope_zero(&self) -> f64 {
        self.wavelength * self.focal_length / self.slit_width
    }

    /// Single-slit envelope `sinc²(π a x/(λf))`.
    pub fn envelope(&self, x: f64) -> f64 {
        sinc(PI * self.slit_width * x * self.inv_lambda_f()).powi(2)
    }
}

/// `sin(u)/u` with `sinc(0) = 1`.
pub fn sinc(u: f64) -> f64 {
    if u.abs() < 1e-8 {
        1.0 - u * u / 6.0
    } else {
        u.sin() / u
    }
}

/// Far-field pixel positions and their signed index map.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DetectorLayout {
    pub positions: Vec<f64>,
    pub mu: Vec<i64>,
}

/// `μ_j = j` for `j <= d/2`, `μ_j = j - d` otherwise.
pub fn signed_index(j: usize, dim: usize) -> i64 {
    if 2 * j <= dim {
        j as i64
    } else {
        j as i64 - dim as i64
    }
}

/// `x_j = -λ f μ_j / (δ d)`.
pub fn detector_positions(geom: &OpticalGeometry) -> DetectorLayout {
    let d = geom.dim;
    let mu: Vec<i64> = (0..d).map(|j| signed_index(j, d)).collect();
    let positions =
        mu.iter().map(|&m| -geom.wavelength * geom.focal_length * m as f64 / (geom.pitch * d as f64)).collect();
    DetectorLayout { positions, mu }
}

fn interference(psi: &StateVector, geom: &OpticalGeometry, x: f64) -> Complex64 {
    let k0 = -2.0 * PI * geom.pitch * x * geom.inv_lambda_f();
    psi.amplitudes().iter().enumerate().map(|(k, c)| c * Complex64::from_polar(1.0, k0 * k as f64)).sum()
}

/// Fraunhofer intensity at transverse position `x` in the focal plane,
/// normalized so a single unit-amplitude slit gives 1 on axis.
pub fn far_field_intensity(psi: &StateVector, geom: &OpticalGeometry, x: f64) -> f64 {
    geom.envelope(x) * interference(psi, geom, x).norm_sqr()
}

/// Top-hat image of the slit array: `Σ_k |c_k|² rect((x - kδ)/a)`.
pub fn near_field_intensity(psi: &StateVector, geom: &OpticalGeometry, x: f64) -> f64 {
    let half = 0.5 * geom.slit_width;
    psi.amplitudes()
        .iter()
        .enumerate()
        .filter(|(k, _)| (x - *k as f64 * geom.pitch).abs() <= half)
        .map(|(_, c)| c.norm_sqr())
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Envelope {
    #[default]
    Off,
    On,
}

/// Far-field intensities read at the `d` detector pixels, divided by `d` so
/// that with the envelope off they are the Fourier-basis probabilities
/// `|(F ψ)_j|²`. With the envelope on each value also carries the
/// single-slit factor `sinc²(π a x_j/(λf))`.
pub fn sample_at_detectors(psi: &StateVector, geom: &OpticalGeometry, envelope: Envelope) -> Result<Vec<f64>> {
    if psi.dim() != geom.dim {
        return Err(Error::DimensionMismatch { expected: geom.dim, actual: psi.dim() });
    }
    let layout = detector_positions(geom);
    let d = geom.dim as f64;
    Ok(layout
        .positions
        .iter()
        .map(|&x| {
            let i = interference(psi, geom, x).norm_sqr() / d;
            match envelope {
                Envelope::Off => i,
                Envelope::On => i * geom.envelope(x),
            }
        })
        .collect())
}

/// Ratio `min_j env(x_j) / max_j env(x_j)` over the detector pixels.
pub fn envelope_contrast(geom: &OpticalGeometry) -> f64 {
    let env: Vec<f64> = detector_positions(geom).positions.iter().map(|&x| geom.envelope(x)).collect();
    let min = env.iter().copied().fold(f64::INFINITY, f64::min);
    let max = env.iter().copied().fold(0.0, f64::max);
    min / max
}

/// Sampled `(x, I)` curve.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Profile {
    pub x: Vec<f64>,
    pub intensity: Vec<f64>,
}

impl Profile {
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "x,intensity")?;
        for (x, i) in self.x.iter().zip(&self.intensity) {
            writeln!(out, "{x:e},{i:e}")?;
        }
        Ok(())
    }
}

fn linspace(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    if points < 2 {
        return vec![lo];
    }
    (0..points).map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64).collect()
}

/// Near-field profile across the whole array, padded by one pitch either side.
pub fn near_field_profile(psi: &StateVector, geom: &OpticalGeometry, points: usize) -> Profile {
    let lo = -geom.pitch;
    let hi = geom.pitch * geom.dim as f64;
    let x = linspace(lo, hi, points);
    let intensity = x.iter().map(|&x| near_field_intensity(psi, geom, x)).collect();
    Profile { x, intensity }
}

/// Far-field profile between the first single-slit zeros.
pub fn far_field_profile(psi: &StateVector, geom: &OpticalGeometry, points: usize) -> Profile {
    let edge = geom.first_envelope_zero();
    let x = linspace(-edge, edge, points);
    let intensity = x.iter().map(|&x| far_field_intensity(psi, geom, x)).collect();
    Profile { x, intensity }
}
