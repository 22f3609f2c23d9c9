//! Measurement simulation and the amplitude dataset consumed by the PIE engine.
//!
//! Row `ℓ` of every grid belongs to projector `P_ℓ`; column `k` is detector
//! `k`, which postselects the Fourier-basis state whose amplitude is
//! `(F ψ_ℓ)_k` (see [`crate::optics`] for the geometric realization).

use std::io::{BufRead, Write};

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{check_dims, qft, DensityMatrix, StateVector};
use crate::projectors::{FamilyFile, FamilyKind, ProjectorFamily};

/// Negative ingested intensities no larger in magnitude than this fraction of
/// the largest intensity in the file are clamped to zero; anything more
/// negative is rejected as malformed.
pub const NEGATIVE_CLAMP_FRACTION: f64 = 0.05;

/// `n × d` grid of detection probabilities `p_{ℓk}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityGrid {
    dim: usize,
    values: Vec<Vec<f64>>,
}

impl ProbabilityGrid {
    pub fn new(dim: usize, values: Vec<Vec<f64>>) -> Result<Self> {
        for (l, row) in values.iter().enumerate() {
            if row.len() != dim {
                return Err(Error::Shape(format!("row {l} has {} entries, expected {dim}", row.len())));
            }
            if row.iter().any(|v| !v.is_finite() || *v < 0.0) {
                return Err(Error::Shape(format!("row {l} has a negative or non-finite probability")));
            }
        }
        Ok(Self { dim, values })
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.values
    }

    pub fn row_sums(&self) -> Vec<f64> {
        self.values.iter().map(|r| r.iter().sum()).collect()
    }

    pub fn total(&self) -> f64 {
        self.row_sums().iter().sum()
    }

    /// Elementwise `a·self + b·other`.
    pub fn combine(&self, a: f64, other: &ProbabilityGrid, b: f64) -> Result<Self> {
        if self.dim != other.dim || self.n() != other.n() {
            return Err(Error::Shape("grids differ in shape".into()));
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(x, y)| x.iter().zip(y).map(|(u, v)| a * u + b * v).collect())
            .collect();
        Ok(Self { dim: self.dim, values })
    }
}

/// `p_{ℓk} = |(F P_ℓ ψ)_k|²`.
pub fn ideal_probabilities(psi: &StateVector, family: &ProjectorFamily) -> Result<ProbabilityGrid> {
    check_dims(family.dim(), psi.dim())?;
    let values = family
        .projectors()
        .iter()
        .map(|p| {
            let slice = p.apply(psi)?;
            Ok(qft(&slice).amplitudes().iter().map(|c| c.norm_sqr()).collect())
        })
        .collect::<Result<Vec<Vec<f64>>>>()?;
    ProbabilityGrid::new(family.dim(), values)
}

/// Born rule for a mixed input: `p_{ℓk} = <k| F P_ℓ ρ P_ℓ F† |k>`.
pub fn mixed_probabilities(rho: &DensityMatrix, family: &ProjectorFamily) -> Result<ProbabilityGrid> {
    check_dims(family.dim(), rho.dim())?;
    let d = family.dim();
    let f = crate::hilbert::qft_matrix(d);
    let m = rho.entries();
    let values = family
        .projectors()
        .iter()
        .map(|p| {
            let s = p.support();
            (0..d)
                .map(|k| {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for &a in s {
                        for &b in s {
                            acc += f[k][a] * m[(a, b)] * f[k][b].conj();
                        }
                    }
                    acc.re.max(0.0)
                })
                .collect()
        })
        .collect();
    ProbabilityGrid::new(d, values)
}

/// Grid of the white-noise mixture `p|ψ><ψ| + (1-p) I/d`, evaluated through
/// linearity: `p·ideal + (1-p)·r_ℓ/d²`. At `p = 1` this returns the pure grid
/// bit for bit.
pub fn white_noise_probabilities(psi: &StateVector, p: f64, family: &ProjectorFamily) -> Result<ProbabilityGrid> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidProbability(p));
    }
    let pure = ideal_probabilities(psi, family)?;
    if p == 1.0 {
        return Ok(pure);
    }
    let d = family.dim() as f64;
    let white = ProbabilityGrid::new(
        family.dim(),
        family.projectors().iter().map(|proj| vec![proj.rank() as f64 / (d * d); family.dim()]).collect(),
    )?;
    pure.combine(p, &white, 1.0 - p)
}

/// Independent Poisson counts with means `exposure · p_{ℓk}`.
pub fn sample_counts<R: Rng + ?Sized>(grid: &ProbabilityGrid, exposure: f64, rng: &mut R) -> Result<Vec<Vec<u64>>> {
    if !(exposure > 0.0) || !exposure.is_finite() {
        return Err(Error::Config(format!("exposure must be positive, got {exposure}")));
    }
    grid.rows()
        .iter()
        .map(|row| {
            row.iter()
                .map(|&p| {
                    let mean = exposure * p;
                    if mean <= 0.0 {
                        return Ok(0);
                    }
                    let dist = Poisson::new(mean).map_err(|e| Error::Config(format!("poisson mean {mean}: {e}")))?;
                    Ok(dist.sample(rng) as u64)
                })
                .collect()
        })
        .collect()
}

/// Where a dataset came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Provenance {
    Exact,
    Sampled { seed: u64, exposure: f64 },
    Ingested { source: String },
}

/// Measured amplitudes `a_{ℓj} = I_{ℓj}^{1/2}` on the probability scale.
#[derive(Debug, Clone, PartialEq)]
pub struct PtychographicDataset {
    dim: usize,
    family: FamilyFile,
    intensities: Vec<Vec<f64>>,
    amplitudes: Vec<Vec<f64>>,
    provenance: Provenance,
    clamped: usize,
}

impl PtychographicDataset {
    pub fn n(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn amplitudes(&self) -> &[Vec<f64>] {
        &self.amplitudes
    }

    /// Probability-scale intensities the amplitudes were derived from.
    pub fn intensities(&self) -> &[Vec<f64>] {
        &self.intensities
    }

    pub fn family(&self) -> &FamilyFile {
        &self.family
    }

    pub fn family_kind(&self) -> FamilyKind {
        self.family.kind
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    /// Number of negative inputs clamped to zero during assembly.
    pub fn clamped(&self) -> usize {
        self.clamped
    }

    pub fn is_all_zero(&self) -> bool {
        self.amplitudes.iter().flatten().all(|&a| a == 0.0)
    }

    /// Checks the dataset against the projector family it will be used with.
    pub fn check_family(&self, family: &ProjectorFamily) -> Result<()> {
        check_dims(family.dim(), self.dim)?;
        if family.len() != self.n() {
            return Err(Error::Shape(format!(
                "dataset has {} rows but the family has {} projectors",
                self.n(),
                family.len()
            )));
        }
        Ok(())
    }

    /// Copy with every intensity multiplied by `factor` (amplitudes by its root).
    pub fn rescaled(&self, factor: f64) -> Result<Self> {
        if !(factor > 0.0) || !factor.is_finite() {
            return Err(Error::Config(format!("scale factor must be positive, got {factor}")));
        }
        let intensities: Vec<Vec<f64>> =
            self.intensities.iter().map(|r| r.iter().map(|v| v * factor).collect()).collect();
        Ok(Self { amplitudes: sqrt_rows(&intensities), intensities, ..self.clone() })
    }

    /// Writes the dataset CSV: a `# ptycho-dataset v1` header and one row of
    /// intensities per projector. Values use the shortest round-trip decimal
    /// form, so ingesting the output reproduces the amplitudes bit for bit.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "# ptycho-dataset v1, d={}, n={}, family={}, scale=1", self.dim, self.n(), self.family.kind)?;
        for row in &self.intensities {
            let line: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
            writeln!(out, "{}", line.join(","))?;
        }
        Ok(())
    }
}

fn sqrt_rows(rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
    rows.iter().map(|r| r.iter().map(|v| v.sqrt()).collect()).collect()
}

/// Square-roots raw intensities (probabilities or photon counts) into the
/// amplitude dataset. Counts are divided by the exposure first so exact and
/// sampled datasets share the probability scale. Negative entries clamp to 0
/// and are counted.
pub fn assemble_dataset(
    raw: &[Vec<f64>],
    family: &ProjectorFamily,
    provenance: Provenance,
) -> Result<PtychographicDataset> {
    if raw.len() != family.len() {
        return Err(Error::Shape(format!("{} rows supplied for a family of {} projectors", raw.len(), family.len())));
    }
    let d = family.dim();
    let divisor = match provenance {
        Provenance::Sampled { exposure, .. } => {
            if !(exposure > 0.0) {
                return Err(Error::Config(format!("exposure must be positive, got {exposure}")));
            }
            exposure
        }
        _ => 1.0,
    };
    let mut clamped = 0;
    let mut intensities = Vec::with_capacity(raw.len());
    for (l, row) in raw.iter().enumerate() {
        if row.len() != d {
            return Err(Error::Shape(format!("row {l} has {} entries, expected {d}", row.len())));
        }
        let mut out = Vec::with_capacity(d);
        for &v in row {
            if !v.is_finite() {
                return Err(Error::Shape(format!("row {l} contains non-finite value {v}")));
            }
            if v < 0.0 {
                clamped += 1;
                out.push(0.0);
            } else {
                out.push(v / divisor);
            }
        }
        intensities.push(out);
    }
    Ok(PtychographicDataset {
        dim: d,
        family: FamilyFile::from(family),
        amplitudes: sqrt_rows(&intensities),
        intensities,
        provenance,
        clamped,
    })
}

/// Convenience: exact dataset of a pure state.
pub fn exact_dataset(psi: &StateVector, family: &ProjectorFamily) -> Result<PtychographicDataset> {
    let grid = ideal_probabilities(psi, family)?;
    assemble_dataset(grid.rows(), family, Provenance::Exact)
}

/// How the intensities in a CSV are brought to the probability scale.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Calibration {
    /// Use the `scale=` value from the header.
    #[default]
    Header,
    /// Multiply every intensity by this constant.
    Constant(f64),
    /// Divide by the largest row sum so that no row exceeds unit probability.
    MaxRowSum,
}

#[derive(Debug, Clone, Default)]
pub struct IngestOptions {
    /// Required for `family=custom`; otherwise it must agree with the header.
    pub family: Option<ProjectorFamily>,
    pub calibration: Calibration,
    pub source: String,
}

#[derive(Debug, Clone, PartialEq)]
struct CsvHeader {
    dim: usize,
    n: usize,
    family: FamilyKind,
    scale: Option<f64>,
}

fn parse_header(line: &str) -> Result<CsvHeader> {
    let err = |message: String| Error::Parse { line: 1, message };
    let body = line.trim().strip_prefix('#').ok_or_else(|| err("missing '# ptycho-dataset v1' header".into()))?;
    let mut parts = body.split(',').map(str::trim);
    if parts.next() != Some("ptycho-dataset v1") {
        return Err(err(format!("unrecognized header '{}'", line.trim())));
    }
    let (mut dim, mut n, mut family, mut scale) = (None, None, None, None);
    for field in parts {
        let (key, value) =
            field.split_once('=').ok_or_else(|| err(format!("header field '{field}' is not key=value")))?;
        let value = value.trim();
        match key.trim() {
            "d" => dim = Some(value.parse().map_err(|_| err(format!("bad d '{value}'")))?),
            "n" => n = Some(value.parse().map_err(|_| err(format!("bad n '{value}'")))?),
            "family" => family = Some(value.parse().map_err(|_| err(format!("bad family '{value}'")))?),
            "scale" => {
                scale = Some(if value == "auto" {
                    None
                } else {
                    let s: f64 = value.parse().map_err(|_| err(format!("bad scale '{value}'")))?;
                    if !(s > 0.0) || !s.is_finite() {
                        return Err(err(format!("scale must be positive, got {value}")));
                    }
                    Some(s)
                })
            }
            other => return Err(err(format!("unknown header field '{other}'"))),
        }
    }
    Ok(CsvHeader {
        dim: dim.ok_or_else(|| err("header lacks d".into()))?,
        n: n.ok_or_else(|| err("header lacks n".into()))?,
        family: family.ok_or_else(|| err("header lacks family".into()))?,
        scale: scale.ok_or_else(|| err("header lacks scale".into()))?,
    })
}

/// Reads a dataset CSV. Errors carry 1-based line numbers.
pub fn ingest_csv<R: BufRead>(source: R, options: &IngestOptions) -> Result<PtychographicDataset> {
    let mut lines = source.lines().enumerate();
    let header = loop {
        match lines.next() {
            Some((i, line)) => {
                let line = line?;
                if line.trim().is_empty() {
                    continue;
                }
                if i != 0 && !line.trim_start().starts_with('#') {
                    return Err(Error::Parse { line: i + 1, message: "data before header".into() });
                }
                break parse_header(&line).map_err(|e| match e {
                    Error::Parse { message, .. } => Error::Parse { line: i + 1, message },
                    other => other,
                })?;
            }
            None => return Err(Error::Parse { line: 1, message: "empty input".into() }),
        }
    };

    let family = match (&options.family, header.family) {
        (Some(f), kind) => {
            if kind != FamilyKind::Custom && f.kind() != kind {
                return Err(Error::Parse {
                    line: 1,
                    message: format!("header declares family {kind} but {} was supplied", f.kind()),
                });
            }
            f.clone()
        }
        (None, FamilyKind::Custom) => {
            return Err(Error::Parse { line: 1, message: "family=custom requires a projector-family sidecar".into() })
        }
        (None, kind) => crate::projectors::build_family(header.dim, kind)
            .map_err(|e| Error::Parse { line: 1, message: e.to_string() })?,
    };
    if family.dim() != header.dim || family.len() != header.n {
        return Err(Error::Parse {
            line: 1,
            message: format!(
                "header declares d={}, n={} but the family has d={}, n={}",
                header.dim,
                header.n,
                family.dim(),
                family.len()
            ),
        });
    }

    let mut rows: Vec<(usize, Vec<f64>)> = Vec::with_capacity(header.n);
    for (i, line) in lines {
        let lineno = i + 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let values = trimmed
            .split(',')
            .map(|t| {
                let t = t.trim();
                t.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| Error::Parse { line: lineno, message: format!("'{t}' is not a finite number") })
            })
            .collect::<Result<Vec<f64>>>()?;
        if values.len() != header.dim {
            return Err(Error::Parse {
                line: lineno,
                message: format!("row {} has {} columns, expected d={}", rows.len(), values.len(), header.dim),
            });
        }
        if rows.len() == header.n {
            return Err(Error::Parse { line: lineno, message: format!("more than n={} data rows", header.n) });
        }
        rows.push((lineno, values));
    }
    if rows.len() != header.n {
        return Err(Error::Parse {
            line: rows.last().map_or(1, |r| r.0),
            message: format!("expected n={} data rows, found {}", header.n, rows.len()),
        });
    }

    let max = rows.iter().flat_map(|(_, r)| r.iter()).fold(0.0f64, |m, v| m.max(v.abs()));
    for (lineno, row) in &rows {
        if let Some(v) = row.iter().find(|&&v| v < -NEGATIVE_CLAMP_FRACTION * max) {
            return Err(Error::Parse {
                line: *lineno,
                message: format!("negative intensity {v} beyond the clamping tolerance"),
            });
        }
    }

    let max_row_sum = rows.iter().map(|(_, r)| r.iter().map(|v| v.max(0.0)).sum::<f64>()).fold(0.0f64, f64::max);
    let auto = if max_row_sum > 0.0 { 1.0 / max_row_sum } else { 1.0 };
    let factor = match options.calibration {
        Calibration::Header => header.scale.unwrap_or(auto),
        Calibration::Constant(c) => {
            if !(c > 0.0) || !c.is_finite() {
                return Err(Error::Config(format!("calibration must be positive, got {c}")));
            }
            c
        }
        Calibration::MaxRowSum => auto,
    };
    let raw: Vec<Vec<f64>> = if factor == 1.0 {
        rows.into_iter().map(|(_, r)| r).collect()
    } else {
        rows.into_iter().map(|(_, r)| r.into_iter().map(|v| v * factor).collect()).collect()
    };
    assemble_dataset(&raw, &family, Provenance::Ingested { source: options.source.clone() })
}
