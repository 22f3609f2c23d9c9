//! `qptycho` command-line tool.

use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use qptycho::campaign::{purity_sweep, run_campaign, simulate_dataset, trial_rng, CampaignConfig, NoiseSpec};
use qptycho::optics::{far_field_profile, near_field_profile};
use qptycho::{
    build_family, fidelity, haar_random_state, ingest_csv, reconstruct, validate_set, Calibration, FamilyKind,
    IngestOptions, OpticalGeometry, PieConfig, ProjectorFamily, StateFile, StateVector,
};

#[derive(Parser)]
#[command(name = "qptycho", version, about = "Pure-state reconstruction by quantum ptychography")]
struct Cli {
    /// Random seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output file, or directory for `campaign`. Defaults to stdout.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    /// Worker threads for campaigns and sweeps.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// JSON configuration: a campaign config for `campaign`, PIE settings otherwise.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw a Haar-random state and write it as JSON.
    Generate {
        #[arg(long, short)]
        dim: usize,
    },
    /// Simulate the dataset CSV for a state.
    Simulate {
        /// State JSON file.
        #[arg(long)]
        state: PathBuf,
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(long, value_enum, default_value_t = Noise::None)]
        noise: Noise,
        /// Photons per projector for `--noise shot`.
        #[arg(long, default_value_t = 1e5)]
        exposure: f64,
        /// Weight of the pure component for `--noise purity`.
        #[arg(long)]
        p: Option<f64>,
    },
    /// Reconstruct a state from a dataset CSV.
    Reconstruct {
        /// Dataset CSV file.
        #[arg(long)]
        data: PathBuf,
        /// Projector-family JSON; required when the dataset declares `family=custom`.
        #[arg(long)]
        family_file: Option<PathBuf>,
        /// Reference state JSON; prints the fidelity of the estimate to it.
        #[arg(long)]
        source: Option<PathBuf>,
        /// Intensity calibration: `header`, `max-row-sum` or a constant factor.
        #[arg(long, default_value = "header")]
        calibration: String,
        #[command(flatten)]
        pie: PieArgs,
    },
    /// Run a fidelity campaign from `--config`.
    Campaign {
        /// Also write SVG fidelity histograms.
        #[arg(long)]
        svg: bool,
    },
    /// Mean fidelity and convergence rate as white noise is mixed in.
    PuritySweep {
        #[arg(long, short, default_value_t = 6)]
        dim: usize,
        #[arg(long, default_value = "ii")]
        family: FamilyKind,
        /// Weights of the pure component.
        #[arg(long, value_delimiter = ',', default_value = "1,0.975,0.95,0.9,0.8,0.7,0.5,0.3")]
        p: Vec<f64>,
        /// Target purities Tr ρ², converted to weights; overrides `--p`.
        #[arg(long, value_delimiter = ',')]
        purity: Option<Vec<f64>>,
        #[arg(long, default_value_t = 30)]
        trials: usize,
        #[command(flatten)]
        pie: PieArgs,
    },
    /// Write near- or far-field intensity profiles as `x,intensity` CSV.
    OpticsProfile {
        /// State JSON file.
        #[arg(long)]
        state: PathBuf,
        #[arg(long, value_enum, default_value_t = Plane::Far)]
        plane: Plane,
        #[arg(long, default_value_t = 2001)]
        points: usize,
        /// Wavelength in metres.
        #[arg(long)]
        wavelength: Option<f64>,
        /// Lens focal length in metres.
        #[arg(long)]
        focal_length: Option<f64>,
        /// Centre-to-centre slit separation in metres.
        #[arg(long)]
        pitch: Option<f64>,
        /// Slit width in metres.
        #[arg(long)]
        slit_width: Option<f64>,
    },
    /// Check coverage and overlap of a projector family.
    ValidateFamily {
        #[command(flatten)]
        family: FamilyArgs,
        /// Write the family as a JSON sidecar to `--output`.
        #[arg(long)]
        export: bool,
    },
}

#[derive(clap::Args)]
struct FamilyArgs {
    /// Dimension; taken from the state or family file when omitted.
    #[arg(long, short)]
    dim: Option<usize>,
    /// Standard family: `i` (five windows) or `ii` (d windows).
    #[arg(long, default_value = "ii")]
    family: FamilyKind,
    /// Projector-family JSON, overriding `--family`.
    #[arg(long)]
    family_file: Option<PathBuf>,
}

#[derive(clap::Args)]
struct PieArgs {
    #[arg(long)]
    beta: Option<f64>,
    /// Stop when the relative distance D falls below this.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_sweeps: Option<usize>,
    #[arg(long)]
    max_restarts: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Noise {
    None,
    Shot,
    Purity,
    Envelope,
}

#[derive(Clone, Copy, ValueEnum)]
enum Plane {
    Near,
    Far,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let seed = cli.seed.unwrap_or(0);
    match &cli.command {
        Command::Generate { dim } => {
            let psi = haar_random_state(*dim, &mut trial_rng(seed, 0))?;
            write_state(cli.output.as_deref(), &psi)
        }
        Command::Simulate { state, family, noise, exposure, p } => {
            let psi = read_state(state)?.normalize()?;
            let fam = family.resolve(Some(psi.dim()))?;
            let noise = match noise {
                Noise::None => NoiseSpec::None,
                Noise::Shot => NoiseSpec::Shot { exposure: *exposure },
                Noise::Purity => NoiseSpec::Purity { p: p.context("--noise purity needs --p")? },
                Noise::Envelope => NoiseSpec::Envelope,
            };
            let data = simulate_dataset(&psi, &fam, noise, seed)?;
            let mut out = sink(cli.output.as_deref())?;
            data.write_csv(&mut out)?;
            out.flush()?;
            if let Some(path) = &cli.output {
                let sidecar = path.with_extension("family.json");
                fs::write(&sidecar, fam.to_json()?).with_context(|| format!("writing {}", sidecar.display()))?;
            }
            Ok(())
        }
        Command::Reconstruct { data, family_file, source, calibration, pie } => {
            let family = family_file.as_deref().map(read_family).transpose()?;
            let options = IngestOptions {
                family,
                calibration: parse_calibration(calibration)?,
                source: data.display().to_string(),
            };
            let file = File::open(data).with_context(|| format!("opening {}", data.display()))?;
            let dataset = ingest_csv(BufReader::new(file), &options).with_context(|| data.display().to_string())?;
            let family = match options.family {
                Some(f) => f,
                None => build_family(dataset.dim(), dataset.family_kind())?,
            };
            let config = pie.apply(load_pie(cli.config.as_deref())?).with_seed(seed);
            let result = reconstruct(&dataset, &family, &config)?;
            println!(
                "d={} n={} converged={} sweeps={} restarts={} D={:.3e} residual={:.3e} t_pie_ms={:.3}",
                dataset.dim(),
                dataset.n(),
                result.converged,
                result.sweeps_used,
                result.restarts_used,
                result.final_distance,
                result.residual,
                result.wall_time.as_secs_f64() * 1e3
            );
            if dataset.clamped() > 0 {
                eprintln!("warning: {} negative intensities clamped to zero", dataset.clamped());
            }
            if let Some(src) = source {
                let reference = read_state(src)?.normalize()?;
                println!("fidelity={:.6}", fidelity(&result.estimate, &reference)?);
            }
            if let Some(path) = &cli.output {
                write_state(Some(path), &result.estimate)?;
            }
            Ok(())
        }
        Command::Campaign { svg } => {
            let path = cli.config.as_deref().context("campaign needs --config <file>")?;
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let mut config = CampaignConfig::from_json(&text).with_context(|| path.display().to_string())?;
            if let Some(s) = cli.seed {
                config.master_seed = s;
            }
            if cli.output.is_some() {
                config.output = cli.output.clone();
            }
            if cli.threads.is_some() {
                config.threads = cli.threads;
            }
            config.svg |= svg;
            let result = run_campaign(&config)?;
            println!("d,family,trials,median,q1,q3,min,convergence_rate,mean_t_pie_ms");
            for c in &result.summary {
                println!(
                    "{},{},{},{:.6},{:.6},{:.6},{:.6},{:.3},{:.4}",
                    c.d, c.family, c.trials, c.median, c.q1, c.q3, c.min, c.convergence_rate, c.mean_t_pie_ms
                );
            }
            for (d, kind) in &result.skipped {
                eprintln!("skipped d={d} family {kind}: needs d >= 5");
            }
            if let Some(fit) = &result.timing_fit {
                println!("# t_pie ~ d^{:.2}", fit.exponent);
            }
            if let Some(dir) = &config.output {
                eprintln!("wrote {}", dir.display());
            }
            Ok(())
        }
        Command::PuritySweep { dim, family, p, purity, trials, pie } => {
            let weights = match purity {
                Some(targets) => targets
                    .iter()
                    .map(|&t| qptycho::hilbert::white_noise_weight_for_purity(t, *dim))
                    .collect::<qptycho::Result<Vec<_>>>()?,
                None => p.clone(),
            };
            let config = pie.apply(load_pie(cli.config.as_deref())?);
            let points = purity_sweep(*dim, *family, &weights, *trials, seed, &config, cli.threads)?;
            let mut out = sink(cli.output.as_deref())?;
            writeln!(out, "p,purity,mean_fidelity,convergence_rate,trials")?;
            for pt in points {
                writeln!(
                    out,
                    "{},{:.6},{:.6},{:.4},{}",
                    pt.p, pt.purity, pt.mean_fidelity, pt.convergence_rate, pt.trials
                )?;
            }
            Ok(out.flush()?)
        }
        Command::OpticsProfile { state, plane, points, wavelength, focal_length, pitch, slit_width } => {
            let psi = read_state(state)?;
            let lab = OpticalGeometry::laboratory(psi.dim());
            let geom = OpticalGeometry::new(
                wavelength.unwrap_or(lab.wavelength),
                focal_length.unwrap_or(lab.focal_length),
                pitch.unwrap_or(lab.pitch),
                slit_width.unwrap_or(lab.slit_width),
                psi.dim(),
            )?;
            let profile = match plane {
                Plane::Near => near_field_profile(&psi, &geom, *points),
                Plane::Far => far_field_profile(&psi, &geom, *points),
            };
            let mut out = sink(cli.output.as_deref())?;
            profile.write_csv(&mut out)?;
            Ok(out.flush()?)
        }
        Command::ValidateFamily { family, export } => {
            let fam = family.resolve(None)?;
            let report = validate_set(&fam);
            println!("d={} family={} n={}", fam.dim(), fam.kind(), fam.len());
            let first = report.coverage[0];
            if report.coverage.iter().all(|&c| c == first) {
                println!("coverage={first} per level");
            } else {
                println!("coverage={:?}", report.coverage);
            }
            for (l, partners) in report.overlaps.iter().enumerate() {
                println!("projector {l} support={:?} overlaps={:?}", fam.projectors()[l].support(), partners);
            }
            if *export {
                let path = cli.output.as_deref().context("--export needs --output")?;
                fs::write(path, fam.to_json()?).with_context(|| format!("writing {}", path.display()))?;
            }
            if report.ok {
                println!("ok");
                Ok(())
            } else {
                bail!(
                    "invalid family: uncovered levels {:?}, projectors without overlap partner {:?}",
                    report.uncovered_levels(),
                    report.isolated_projectors()
                )
            }
        }
    }
}

impl FamilyArgs {
    fn resolve(&self, state_dim: Option<usize>) -> Result<ProjectorFamily> {
        if let Some(path) = &self.family_file {
            let fam = read_family(path)?;
            if let Some(d) = self.dim.or(state_dim).filter(|&d| d != fam.dim()) {
                bail!("family file has d={} but d={d} was requested", fam.dim());
            }
            return Ok(fam);
        }
        let d = match (self.dim, state_dim) {
            (Some(a), Some(b)) if a != b => bail!("--dim {a} does not match the state dimension {b}"),
            (Some(d), _) | (None, Some(d)) => d,
            (None, None) => bail!("--dim or --family-file is required"),
        };
        Ok(build_family(d, self.family)?)
    }
}

impl PieArgs {
    fn apply(&self, mut config: PieConfig) -> PieConfig {
        if let Some(b) = self.beta {
            config.beta = b;
        }
        if let Some(t) = self.tol {
            config.distance_tolerance = t;
        }
        if let Some(s) = self.max_sweeps {
            config.max_sweeps = s;
        }
        if let Some(r) = self.max_restarts {
            config.max_restarts = r;
        }
        config
    }
}

fn load_pie(path: Option<&Path>) -> Result<PieConfig> {
    match path {
        None => Ok(PieConfig::default()),
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            serde_json::from_str(&text).with_context(|| format!("parsing PIE settings in {}", p.display()))
        }
    }
}

fn parse_calibration(text: &str) -> Result<Calibration> {
    Ok(match text {
        "header" => Calibration::Header,
        "max-row-sum" | "auto" => Calibration::MaxRowSum,
        other => Calibration::Constant(
            other.parse().with_context(|| format!("calibration '{other}' is not header, max-row-sum or a number"))?,
        ),
    })
}

fn read_state(path: &Path) -> Result<StateVector> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let file: StateFile = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    StateVector::try_from(file).with_context(|| path.display().to_string())
}

fn read_family(path: &Path) -> Result<ProjectorFamily> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    ProjectorFamily::from_json(&text).with_context(|| path.display().to_string())
}

fn sink(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn write_state(path: Option<&Path>, psi: &StateVector) -> Result<()> {
    let mut out = sink(path)?;
    writeln!(out, "{}", serde_json::to_string_pretty(&StateFile::from(psi))?)?;
    Ok(out.flush()?)
}
