//! Rank-r diagonal projectors `P_ℓ = Σ_{j<r} |j ⊕ s_ℓ><j ⊕ s_ℓ|` and the two
//! standard families built from them.
//!
//! Projectors are binary and diagonal in the computational basis, so they are
//! stored as support sets and applied by masking.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{check_dims, StateVector};

/// A diagonal binary projector, identified by the basis levels it keeps.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankProjector {
    dim: usize,
    shift: usize,
    support: Vec<usize>,
}

impl RankProjector {
    /// Contiguous (wrap-around) window of `rank` levels starting at `shift`.
    pub fn window(dim: usize, rank: usize, shift: usize) -> Result<Self> {
        let support = (0..rank).map(|j| (j + shift) % dim).collect();
        Self::with_support(dim, shift % dim.max(1), support)
    }

    /// Arbitrary support set. `shift` is recorded as metadata only.
    pub fn with_support(dim: usize, shift: usize, support: Vec<usize>) -> Result<Self> {
        if let Some(&k) = support.iter().find(|&&k| k >= dim) {
            return Err(Error::InvalidProjector(format!("level {k} outside 0..{dim}")));
        }
        let distinct: BTreeSet<_> = support.iter().collect();
        if distinct.len() != support.len() {
            return Err(Error::InvalidProjector(format!("repeated level in support {support:?}")));
        }
        let rank = support.len();
        if rank <= 1 || rank >= dim {
            return Err(Error::InvalidProjector(format!("rank {rank} must satisfy 1 < r < d = {dim}")));
        }
        Ok(Self { dim, shift, support })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.support.len()
    }

    pub fn shift(&self) -> usize {
        self.shift
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn contains(&self, level: usize) -> bool {
        self.support.contains(&level)
    }

    /// `P|ψ>`: amplitudes outside the support are zeroed. Unnormalized.
    pub fn apply(&self, psi: &StateVector) -> Result<StateVector> {
        check_dims(self.dim, psi.dim())?;
        let mut out = vec![Complex64::new(0.0, 0.0); self.dim];
        for &k in &self.support {
            out[k] = psi.amplitudes()[k];
        }
        StateVector::new(out)
    }
}

/// Free-function form of [`RankProjector::apply`].
pub fn apply(p: &RankProjector, psi: &StateVector) -> Result<StateVector> {
    p.apply(psi)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FamilyKind {
    /// `n = 5`, `s_ℓ = ℓ ⌊d/5⌋`, `r = ⌈d/2⌉`.
    #[serde(rename = "i")]
    FamilyI,
    /// `n = d`, `s_ℓ = ℓ`, `r = ⌈d/2⌉`.
    #[serde(rename = "ii")]
    FamilyII,
    #[serde(rename = "custom")]
    Custom,
}

impl FamilyKind {
    pub fn as_str(self) -> &'static str {
        match self {
            FamilyKind::FamilyI => "i",
            FamilyKind::FamilyII => "ii",
            FamilyKind::Custom => "custom",
        }
    }
}

impl fmt::Display for FamilyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FamilyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "i" | "1" | "family-i" | "familyi" => Ok(FamilyKind::FamilyI),
            "ii" | "2" | "family-ii" | "familyii" => Ok(FamilyKind::FamilyII),
            "custom" => Ok(FamilyKind::Custom),
            other => Err(Error::Config(format!("unknown projector family '{other}'"))),
        }
    }
}

/// Ordered list of `n` projectors on a common space.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProjectorFamily {
    dim: usize,
    kind: FamilyKind,
    projectors: Vec<RankProjector>,
}

/// `⌈d/2⌉`, the rank used by both standard families.
pub fn half_rank(dim: usize) -> usize {
    dim.div_ceil(2)
}

/// Builds one of the standard families.
pub fn build_family(dim: usize, kind: FamilyKind) -> Result<ProjectorFamily> {
    if dim < 3 {
        return Err(Error::UnsupportedFamily {
            kind: kind.to_string(),
            dim,
            reason: "reconstruction families need d >= 3",
        });
    }
    let rank = half_rank(dim);
    let shifts: Vec<usize> = match kind {
        FamilyKind::FamilyI => {
            if dim < 5 {
                return Err(Error::UnsupportedFamily {
                    kind: kind.to_string(),
                    dim,
                    reason: "family i needs d >= 5 (otherwise all five shifts coincide)",
                });
            }
            (0..5).map(|l| l * (dim / 5)).collect()
        }
        FamilyKind::FamilyII => (0..dim).collect(),
        FamilyKind::Custom => {
            return Err(Error::UnsupportedFamily {
                kind: kind.to_string(),
                dim,
                reason: "custom families are built with ProjectorFamily::custom",
            })
        }
    };
    let projectors = shifts.into_iter().map(|s| RankProjector::window(dim, rank, s)).collect::<Result<Vec<_>>>()?;
    Ok(ProjectorFamily { dim, kind, projectors })
}

impl ProjectorFamily {
    /// A user-supplied family. It must pass [`validate_set`].
    pub fn custom(dim: usize, projectors: Vec<RankProjector>) -> Result<Self> {
        let family = Self { dim, kind: FamilyKind::Custom, projectors };
        if let Some(p) = family.projectors.iter().find(|p| p.dim != dim) {
            return Err(Error::DimensionMismatch { expected: dim, actual: p.dim });
        }
        let report = validate_set(&family);
        if !report.ok {
            return Err(Error::InvalidFamily(report.describe_failure()));
        }
        Ok(family)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> FamilyKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.projectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.projectors.is_empty()
    }

    pub fn projectors(&self) -> &[RankProjector] {
        &self.projectors
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&FamilyFile::from(self))?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: FamilyFile = serde_json::from_str(text)?;
        file.try_into()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub dim: usize,
    /// Number of projectors covering each level `j`.
    pub coverage: Vec<usize>,
    /// `overlaps[a]` lists the projectors sharing at least one level with `a`.
    pub overlaps: Vec<Vec<usize>>,
    pub ok: bool,
}

impl ValidationReport {
    pub fn uncovered_levels(&self) -> Vec<usize> {
        (0..self.dim).filter(|&j| self.coverage[j] == 0).collect()
    }

    pub fn isolated_projectors(&self) -> Vec<usize> {
        (0..self.overlaps.len()).filter(|&a| self.overlaps[a].is_empty()).collect()
    }

    fn describe_failure(&self) -> String {
        format!(
            "uncovered levels {:?}, projectors without overlap partner {:?}",
            self.uncovered_levels(),
            self.isolated_projectors()
        )
    }
}

/// Checks that every level is addressed and every projector partially overlaps
/// at least one other.
pub fn validate_set(family: &ProjectorFamily) -> ValidationReport {
    let d = family.dim;
    let n = family.projectors.len();
    let mut coverage = vec![0usize; d];
    for p in &family.projectors {
        for &k in p.support() {
            if k < d {
                coverage[k] += 1;
            }
        }
    }
    let overlaps: Vec<Vec<usize>> = (0..n)
        .map(|a| {
            (0..n)
                .filter(|&b| b != a && family.projectors[a].support().iter().any(|&k| family.projectors[b].contains(k)))
                .collect()
        })
        .collect();
    let ok = n >= 2 && coverage.iter().all(|&c| c >= 1) && overlaps.iter().all(|o| !o.is_empty());
    ValidationReport { dim: d, coverage, overlaps, ok }
}

/// JSON sidecar pinning the exact projector set of a dataset or campaign.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FamilyFile {
    pub dim: usize,
    pub kind: FamilyKind,
    pub supports: Vec<Vec<usize>>,
}

impl From<&ProjectorFamily> for FamilyFile {
    fn from(f: &ProjectorFamily) -> Self {
        Self { dim: f.dim, kind: f.kind, supports: f.projectors.iter().map(|p| p.support.clone()).collect() }
    }
}

impl TryFrom<FamilyFile> for ProjectorFamily {
    type Error = Error;

    fn try_from(file: FamilyFile) -> Result<Self> {
        match file.kind {
            FamilyKind::Custom => {
                let projectors = file
                    .supports
                    .into_iter()
                    .map(|s| {
                        let shift = s.first().copied().unwrap_or(0);
                        RankProjector::with_support(file.dim, shift, s)
                    })
                    .collect::<Result<Vec<_>>>()?;
                ProjectorFamily::custom(file.dim, projectors)
            }
            kind => {
                let family = build_family(file.dim, kind)?;
                let expected = FamilyFile::from(&family).supports;
                if file.supports != expected {
                    return Err(Error::InvalidFamily(format!(
                        "supports do not match the standard family {kind} at d={}",
                        file.dim
                    )));
                }
                Ok(family)
            }
        }
    }
}
