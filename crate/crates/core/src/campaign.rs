//! Fidelity campaigns over dimensions, projector families and noise models.
//!
//! Every trial is a pure function of its seed. Trial seeds come from the
//! master seed by [`crate::split_seed`] with task index `d·10⁶ + trial`, so
//! both families see the same source states at a given `(d, trial)` and
//! results do not depend on thread count or scheduling.

use std::fmt::Write as _;
use std::fs;
use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forward_model::{
    assemble_dataset, ideal_probabilities, sample_counts, white_noise_probabilities, Provenance,
};
use crate::hilbert::{fidelity, haar_random_state, white_noise_purity, StateVector};
use crate::optics::{sample_at_detectors, Envelope, OpticalGeometry};
use crate::pie::{reconstruct, PieConfig};
use crate::projectors::{build_family, FamilyKind, ProjectorFamily};
use crate::split_seed;

const SOURCE_STREAM: u64 = 1;
const NOISE_STREAM: u64 = 2;

/// Random source for one purpose within one trial. The PIE engine seeds its
/// own generator from the trial seed on stream 0.
pub fn trial_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Measurement imperfection applied when generating a trial's data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum NoiseSpec {
    /// Exact probabilities.
    #[default]
    None,
    /// Poisson counts with `exposure` mean photons per projector preparation.
    Shot { exposure: f64 },
    /// White-noise mixture `p|ψ><ψ| + (1-p) I/d`.
    Purity { p: f64 },
    /// Far-field pixels read with the single-slit envelope of the laboratory
    /// geometry.
    Envelope,
}

impl NoiseSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            NoiseSpec::Shot { exposure } if !(exposure > 0.0) || !exposure.is_finite() => {
                Err(Error::Config(format!("exposure must be positive, got {exposure}")))
            }
            NoiseSpec::Purity { p } if !(p > 0.0 && p <= 1.0) => {
                Err(Error::Config(format!("purity weight must lie in (0, 1], got {p}")))
            }
            _ => Ok(()),
        }
    }
}

/// Generates the amplitude dataset for `psi` under the given noise model.
pub fn simulate_dataset(
    psi: &StateVector,
    family: &ProjectorFamily,
    noise: NoiseSpec,
    seed: u64,
) -> Result<crate::forward_model::PtychographicDataset> {
    noise.validate()?;
    match noise {
        NoiseSpec::None => {
            let grid = ideal_probabilities(psi, family)?;
            assemble_dataset(grid.rows(), family, Provenance::Exact)
        }
        NoiseSpec::Shot { exposure } => {
            let grid = ideal_probabilities(psi, family)?;
            let mut rng = trial_rng(seed, NOISE_STREAM);
            let counts = sample_counts(&grid, exposure, &mut rng)?;
            let raw: Vec<Vec<f64>> = counts.iter().map(|r| r.iter().map(|&c| c as f64).collect()).collect();
            assemble_dataset(&raw, family, Provenance::Sampled { seed, exposure })
        }
        NoiseSpec::Purity { p } => {
            let grid = white_noise_probabilities(psi, p, family)?;
            assemble_dataset(grid.rows(), family, Provenance::Exact)
        }
        NoiseSpec::Envelope => {
            let geom = OpticalGeometry::laboratory(family.dim());
            let raw = family
                .projectors()
                .iter()
                .map(|p| sample_at_detectors(&p.apply(psi)?, &geom, Envelope::On))
                .collect::<Result<Vec<_>>>()?;
            assemble_dataset(&raw, family, Provenance::Exact)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub d: usize,
    pub family: FamilyKind,
    pub trial: usize,
    pub seed: u64,
    pub fidelity: f64,
    pub converged: bool,
    pub sweeps: usize,
    pub restarts: usize,
    pub t_pie_ms: f64,
}

/// Draws a Haar source, simulates its data and reconstructs it.
pub fn run_trial(
    d: usize,
    kind: FamilyKind,
    noise: NoiseSpec,
    seed: u64,
    trial: usize,
    pie: &PieConfig,
) -> Result<TrialRecord> {
    let family = build_family(d, kind)?;
    let source = haar_random_state(d, &mut trial_rng(seed, SOURCE_STREAM))?;
    let data = simulate_dataset(&source, &family, noise, seed)?;
    let result = reconstruct(&data, &family, &pie.with_seed(seed))?;
    Ok(TrialRecord {
        d,
        family: kind,
        trial,
        seed,
        fidelity: fidelity(&result.estimate, &source)?,
        converged: result.converged,
        sweeps: result.sweeps_used,
        restarts: result.restarts_used,
        t_pie_ms: result.wall_time.as_secs_f64() * 1e3,
    })
}

/// Trials per dimension: a fixed count, or the laboratory schedule of
/// 100 (d ≤ 10), 50 (11 ≤ d ≤ 17) and 13 (d > 17).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TrialCount {
    Fixed(usize),
    Preset(Preset),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    Paper,
}

impl TrialCount {
    pub fn for_dim(self, d: usize) -> usize {
        match self {
            TrialCount::Fixed(n) => n,
            TrialCount::Preset(Preset::Paper) => match d {
                0..=10 => 100,
                11..=17 => 50,
                _ => 13,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CampaignConfig {
    pub dims: Vec<usize>,
    pub families: Vec<FamilyKind>,
    pub trials_per_dim: TrialCount,
    #[serde(default)]
    pub noise: NoiseSpec,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default)]
    pub pie: PieConfig,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub threads: Option<usize>,
    /// Also write one SVG fidelity histogram per (d, family).
    #[serde(default)]
    pub svg: bool,
}

/// `(d, family, trial, seed)`.
type Task = (usize, FamilyKind, usize, u64);

impl CampaignConfig {
    pub fn validate(&self) -> Result<()> {
        if self.dims.is_empty() || self.families.is_empty() {
            return Err(Error::Config("dims and families must be nonempty".into()));
        }
        if let Some(&d) = self.dims.iter().find(|&&d| !(3..=64).contains(&d)) {
            return Err(Error::Config(format!("dimension {d} outside 3..=64")));
        }
        if self.families.contains(&FamilyKind::Custom) {
            return Err(Error::Config("campaigns run the standard families only".into()));
        }
        if self.dims.iter().any(|&d| self.trials_per_dim.for_dim(d) == 0) {
            return Err(Error::Config("trials per dimension must be at least 1".into()));
        }
        self.noise.validate()?;
        self.pie.validate()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Every runnable trial in output order, and the cells skipped because
    /// family i needs d >= 5.
    fn tasks(&self) -> (Vec<Task>, Vec<(usize, FamilyKind)>) {
        let mut tasks = Vec::new();
        let mut skipped = Vec::new();
        for &d in &self.dims {
            for &kind in &self.families {
                if kind == FamilyKind::FamilyI && d < 5 {
                    skipped.push((d, kind));
                    continue;
                }
                for trial in 0..self.trials_per_dim.for_dim(d) {
                    let seed = split_seed(self.master_seed, (d as u64) * 1_000_000 + trial as u64);
                    tasks.push((d, kind, trial, seed));
                }
            }
        }
        (tasks, skipped)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub d: usize,
    pub family: FamilyKind,
    pub trials: usize,
    pub mean: f64,
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
    pub min: f64,
    pub max: f64,
    pub convergence_rate: f64,
    pub mean_t_pie_ms: f64,
}

/// Least-squares line `ln t = intercept + exponent · ln d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingFit {
    pub exponent: f64,
    pub intercept: f64,
    pub dims: Vec<usize>,
    pub mean_t_pie_ms: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignResult {
    pub records: Vec<TrialRecord>,
    pub summary: Vec<CellSummary>,
    /// Fit over the n = d family, when it ran at two or more dimensions.
    pub timing_fit: Option<TimingFit>,
    pub skipped: Vec<(usize, FamilyKind)>,
}

/// Quantile with linear interpolation between order statistics.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Per-(d, family) statistics, in order of first appearance.
pub fn summarize(records: &[TrialRecord]) -> Vec<CellSummary> {
    let mut keys: Vec<(usize, FamilyKind)> = Vec::new();
    for r in records {
        if !keys.contains(&(r.d, r.family)) {
            keys.push((r.d, r.family));
        }
    }
    keys.into_iter()
        .map(|(d, family)| {
            let cell: Vec<&TrialRecord> = records.iter().filter(|r| r.d == d && r.family == family).collect();
            let mut f: Vec<f64> = cell.iter().map(|r| r.fidelity).collect();
            f.sort_by(f64::total_cmp);
            let times: Vec<f64> = cell.iter().map(|r| r.t_pie_ms).collect();
            CellSummary {
                d,
                family,
                trials: cell.len(),
                mean: mean(&f),
                median: quantile(&f, 0.5),
                q1: quantile(&f, 0.25),
                q3: quantile(&f, 0.75),
                min: f[0],
                max: f[f.len() - 1],
                convergence_rate: cell.iter().filter(|r| r.converged).count() as f64 / cell.len() as f64,
                mean_t_pie_ms: mean(&times),
            }
        })
        .collect()
}

/// Fits `ln t` against `ln d`. Needs two distinct dimensions with positive times.
pub fn fit_power_law(dims: &[usize], times: &[f64]) -> Option<TimingFit> {
    let pts: Vec<(f64, f64)> =
        dims.iter().zip(times).filter(|(_, &t)| t > 0.0).map(|(&d, &t)| ((d as f64).ln(), t.ln())).collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let exponent = sxy / sxx;
    Some(TimingFit { exponent, intercept: my - exponent * mx, dims: dims.to_vec(), mean_t_pie_ms: times.to_vec() })
}

fn timing_fit_for(summary: &[CellSummary]) -> Option<TimingFit> {
    let cells: Vec<&CellSummary> = summary.iter().filter(|c| c.family == FamilyKind::FamilyII).collect();
    let dims: Vec<usize> = cells.iter().map(|c| c.d).collect();
    let times: Vec<f64> = cells.iter().map(|c| c.mean_t_pie_ms).collect();
    fit_power_law(&dims, &times)
}

fn thread_pool(threads: Option<usize>) -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n);
    }
    builder.build().map_err(|e| Error::Config(format!("thread pool: {e}")))
}

/// Runs every cell of the campaign. When `config.output` is set, writes
/// `results.csv` and `summary.json` there; completed trials are written even
/// if a later trial fails.
pub fn run_campaign(config: &CampaignConfig) -> Result<CampaignResult> {
    config.validate()?;
    let (tasks, skipped) = config.tasks();
    let pool = thread_pool(config.threads)?;
    let outcomes: Vec<Result<TrialRecord>> = pool.install(|| {
        tasks
            .par_iter()
            .map(|&(d, kind, trial, seed)| run_trial(d, kind, config.noise, seed, trial, &config.pie))
            .collect()
    });
    let mut records = Vec::with_capacity(outcomes.len());
    let mut failure = None;
    for o in outcomes {
        match o {
            Ok(r) => records.push(r),
            Err(e) => {
                failure.get_or_insert(e);
            }
        }
    }
    let summary = summarize(&records);
    let result = CampaignResult { timing_fit: timing_fit_for(&summary), records, summary, skipped };
    if let Some(dir) = &config.output {
        result.write_outputs(dir, config.svg)?;
    }
    match failure {
        Some(e) => Err(e),
        None => Ok(result),
    }
}

pub const RESULTS_HEADER: &str = "d,family,trial,seed,fidelity,converged,sweeps,restarts,t_pie_ms";

impl CampaignResult {
    pub fn write_results_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "{RESULTS_HEADER}")?;
        for r in &self.records {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                r.d, r.family, r.trial, r.seed, r.fidelity, r.converged, r.sweeps, r.restarts, r.t_pie_ms
            )?;
        }
        Ok(())
    }

    pub fn summary_json(&self) -> Result<String> {
        #[derive(Serialize)]
        struct Summary<'a> {
            cells: &'a [CellSummary],
            timing_fit: &'a Option<TimingFit>,
            skipped: &'a [(usize, FamilyKind)],
        }
        Ok(serde_json::to_string_pretty(&Summary {
            cells: &self.summary,
            timing_fit: &self.timing_fit,
            skipped: &self.skipped,
        })?)
    }

    pub fn write_outputs(&self, dir: &Path, svg: bool) -> Result<()> {
        fs::create_dir_all(dir)?;
        let mut csv = Vec::new();
        self.write_results_csv(&mut csv)?;
        fs::write(dir.join("results.csv"), csv)?;
        fs::write(dir.join("summary.json"), self.summary_json()?)?;
        if svg {
            for cell in &self.summary {
                let f: Vec<f64> = self
                    .records
                    .iter()
                    .filter(|r| r.d == cell.d && r.family == cell.family)
                    .map(|r| r.fidelity)
                    .collect();
                let name = format!("hist_d{}_{}.svg", cell.d, cell.family);
                fs::write(
                    dir.join(name),
                    fidelity_histogram_svg(&f, &format!("d = {}, family {}", cell.d, cell.family)),
                )?;
            }
        }
        Ok(())
    }
}

/// Parses a `results.csv` back into records.
pub fn read_results_csv<R: BufRead>(input: R) -> Result<Vec<TrialRecord>> {
    let mut out = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        let lineno = i + 1;
        if i == 0 {
            if line.trim() != RESULTS_HEADER {
                return Err(Error::Parse { line: 1, message: "unexpected results header".into() });
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        let bad = |what: &str| Error::Parse { line: lineno, message: format!("bad {what}") };
        if f.len() != 9 {
            return Err(bad("column count"));
        }
        out.push(TrialRecord {
            d: f[0].parse().map_err(|_| bad("d"))?,
            family: f[1].parse().map_err(|_| bad("family"))?,
            trial: f[2].parse().map_err(|_| bad("trial"))?,
            seed: f[3].parse().map_err(|_| bad("seed"))?,
            fidelity: f[4].parse().map_err(|_| bad("fidelity"))?,
            converged: f[5].parse().map_err(|_| bad("converged"))?,
            sweeps: f[6].parse().map_err(|_| bad("sweeps"))?,
            restarts: f[7].parse().map_err(|_| bad("restarts"))?,
            t_pie_ms: f[8].parse().map_err(|_| bad("t_pie_ms"))?,
        });
    }
    Ok(out)
}

/// Simple bar chart of a fidelity sample.
pub fn fidelity_histogram_svg(fidelities: &[f64], title: &str) -> String {
    const BINS: usize = 20;
    const W: f64 = 400.0;
    const H: f64 = 240.0;
    const PAD: f64 = 30.0;
    let lo = fidelities.iter().copied().fold(1.0, f64::min).min(0.99);
    let span = (1.0 - lo).max(1e-12);
    let mut counts = [0usize; BINS];
    for &f in fidelities {
        let b = (((f - lo) / span) * BINS as f64).floor() as isize;
        counts[b.clamp(0, BINS as isize - 1) as usize] += 1;
    }
    let top = counts.iter().copied().max().unwrap_or(1).max(1) as f64;
    let bw = (W - 2.0 * PAD) / BINS as f64;
    let mut svg = String::new();
    let _ = writeln!(svg, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#);
    let _ = writeln!(svg, r#"<text x="{PAD}" y="18" font-size="12">{title}</text>"#);
    for (i, &c) in counts.iter().enumerate() {
        let h = (H - 2.0 * PAD) * c as f64 / top;
        let _ = writeln!(
            svg,
            r##"<rect x="{:.1}" y="{:.1}" width="{:.1}" height="{:.1}" fill="#b33"/>"##,
            PAD + i as f64 * bw,
            H - PAD - h,
            bw - 1.0,
            h
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{PAD}" y="{}" font-size="10">{lo:.4}</text><text x="{}" y="{}" font-size="10" text-anchor="end">1</text>"#,
        H - 10.0,
        W - PAD,
        H - 10.0
    );
    svg.push_str("</svg>\n");
    svg
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PurityPoint {
    pub p: f64,
    pub purity: f64,
    pub mean_fidelity: f64,
    pub convergence_rate: f64,
    pub trials: usize,
}

/// Reconstruction quality against the pure component as white noise is mixed
/// in. Trial `t` uses seed `split_seed(seed, t)` at every `p`, so each point
/// sees the same source states.
pub fn purity_sweep(
    d: usize,
    kind: FamilyKind,
    p_values: &[f64],
    trials: usize,
    seed: u64,
    pie: &PieConfig,
    threads: Option<usize>,
) -> Result<Vec<PurityPoint>> {
    if trials == 0 {
        return Err(Error::Config("purity sweep needs at least one trial".into()));
    }
    let pool = thread_pool(threads)?;
    p_values
        .iter()
        .map(|&p| {
            let noise = NoiseSpec::Purity { p };
            noise.validate()?;
            let records: Vec<TrialRecord> = pool.install(|| {
                (0..trials)
                    .into_par_iter()
                    .map(|t| run_trial(d, kind, noise, split_seed(seed, t as u64), t, pie))
                    .collect::<Result<Vec<_>>>()
            })?;
            let f: Vec<f64> = records.iter().map(|r| r.fidelity).collect();
            Ok(PurityPoint {
                p,
                purity: white_noise_purity(p, d),
                mean_fidelity: mean(&f),
                convergence_rate: records.iter().filter(|r| r.converged).count() as f64 / trials as f64,
                trials,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn paper_preset_counts() {
        let t = TrialCount::Preset(Preset::Paper);
        assert_eq!(t.for_dim(3), 100);
        assert_eq!(t.for_dim(10), 100);
        assert_eq!(t.for_dim(11), 50);
        assert_eq!(t.for_dim(17), 50);
        assert_eq!(t.for_dim(18), 13);
        assert_eq!(t.for_dim(32), 13);
        assert_eq!(TrialCount::Fixed(7).for_dim(30), 7);
    }

    #[test]
    fn config_json_forms() {
        let cfg = CampaignConfig::from_json(
            r#"{"dims":[3,4],"families":["ii"],"trials_per_dim":"paper",
                "noise":{"kind":"shot","exposure":1e5},"master_seed":9}"#,
        )
        .unwrap();
        assert_eq!(cfg.trials_per_dim, TrialCount::Preset(Preset::Paper));
        assert_eq!(cfg.noise, NoiseSpec::Shot { exposure: 1e5 });
        assert_eq!(cfg.pie, PieConfig::default());

        let cfg = CampaignConfig::from_json(r#"{"dims":[5],"families":["i","ii"],"trials_per_dim":3}"#).unwrap();
        assert_eq!(cfg.trials_per_dim, TrialCount::Fixed(3));
        assert!(CampaignConfig::from_json(r#"{"dims":[2],"families":["ii"],"trials_per_dim":3}"#).is_err());
        assert!(CampaignConfig::from_json(r#"{"dims":[5],"families":["ii"],"trials_per_dim":0}"#).is_err());
        assert!(CampaignConfig::from_json(
            r#"{"dims":[5],"families":["ii"],"trials_per_dim":1,"noise":{"kind":"purity","p":1.5}}"#
        )
        .is_err());
    }

    #[test]
    fn quantiles_interpolate() {
        let v = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile(&v, 0.5), 2.5);
        assert_eq!(quantile(&v, 0.0), 1.0);
        assert_eq!(quantile(&v, 1.0), 4.0);
        assert_eq!(quantile(&v, 0.25), 1.75);
    }

    #[test]
    fn power_law_fit_recovers_exponent() {
        let dims = [8, 16, 32];
        let times: Vec<f64> = dims.iter().map(|&d| 0.01 * (d as f64).powi(3)).collect();
        let fit = fit_power_law(&dims, &times).unwrap();
        assert!((fit.exponent - 3.0).abs() < 1e-12);
        assert!(fit_power_law(&[8], &[1.0]).is_none());
    }

    #[test]
    fn family_i_skipped_below_five() {
        let cfg = CampaignConfig {
            dims: vec![3, 5],
            families: vec![FamilyKind::FamilyI, FamilyKind::FamilyII],
            trials_per_dim: TrialCount::Fixed(2),
            noise: NoiseSpec::None,
            master_seed: 1,
            pie: PieConfig::default(),
            output: None,
            threads: Some(1),
            svg: false,
        };
        let (tasks, skipped) = cfg.tasks();
        assert_eq!(skipped, vec![(3, FamilyKind::FamilyI)]);
        assert_eq!(tasks.len(), 6);
        // same source seed for both families at a given (d, trial)
        let s: Vec<u64> = tasks.iter().filter(|t| t.0 == 5 && t.2 == 1).map(|t| t.3).collect();
        assert_eq!(s.len(), 2);
        assert_eq!(s[0], s[1]);
    }

    #[test]
    fn trial_streams_are_distinct() {
        let mut a = trial_rng(5, SOURCE_STREAM);
        let mut b = ChaCha8Rng::seed_from_u64(5);
        let x = haar_random_state(4, &mut a).unwrap();
        let y = haar_random_state(4, &mut b).unwrap();
        assert_ne!(x, y);
    }

    #[test]
    fn svg_is_well_formed_enough() {
        let svg = fidelity_histogram_svg(&[0.999, 0.998, 1.0, 0.95], "t");
        assert!(svg.starts_with("<svg"));
        assert_eq!(svg.matches("<rect").count(), 20);
        assert!(svg.trim_end().ends_with("</svg>"));
    }
}
