//! `roughlap` command line.
//!
//! Every subcommand either reads a JSON run config (`--config`) or builds one
//! from flags, runs it, and writes the outputs into `--out`. Exit codes:
//! 0 success, 2 usage or parse error, 3 violated mathematical precondition
//! or failed check, 4 solver non-convergence.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use roughlap_core::geometry::RectUnionPart;
use roughlap_core::runs::{
    BcKind, DomainSpec, GeometryRun, MeshRun, RobinSpec, RunConfig, SolveRun, SourceSpec, SpectrumRun, SpectrumTask,
};
use roughlap_core::Error;

#[derive(Parser, Debug)]
#[command(
    name = "roughlap",
    version,
    about = "Laplace problems on rough domains with P1 finite elements"
)]
#[command(after_help = "Environment:\n  ROUGHLAP_THREADS  cap on the number of worker threads")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Triangulate a domain; writes `<name>.mesh` and `<name>.quality.json`.
    Mesh(MeshCmd),
    /// Solve a boundary-value problem over a refinement ladder; writes `<name>.csv`.
    Solve(SolveCmd),
    /// Eigenvalue tables (Poincaré, Neumann, trace, Steklov, Robin); writes `<name>.csv`.
    Spectrum(SpectrumCmd),
    /// Limiting-absorption scenario outside an obstacle (config only).
    Exterior(ExteriorCmd),
    /// Quasiisometry, area-formula and interior-metric checks; writes `<name>.csv`.
    GeometryCheck(GeometryCmd),
}

#[derive(Args, Debug)]
struct Common {
    /// JSON run config; excludes the direct flags.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, value_name = "DIR", default_value = ".")]
    out: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum DomainKind {
    UnitSquare,
    LShape,
    Disk,
    HalfDisk,
    RectUnion,
    Spiral,
}

#[derive(Args, Debug)]
struct DomainArgs {
    #[arg(long, value_enum)]
    domain: Option<DomainKind>,
    /// Radius of `disk` and `half-disk`.
    #[arg(long)]
    radius: Option<f64>,
    /// Index of the last rectangle of `rect-union`.
    #[arg(long)]
    k_max: Option<u32>,
    /// Number of bands of `spiral`.
    #[arg(long)]
    n_max: Option<u32>,
}

impl DomainArgs {
    fn given(&self) -> bool {
        self.domain.is_some() || self.radius.is_some() || self.k_max.is_some() || self.n_max.is_some()
    }

    fn spec(&self) -> Result<DomainSpec, String> {
        let kind = self.domain.ok_or("--domain is required without --config")?;
        let round = matches!(kind, DomainKind::Disk | DomainKind::HalfDisk);
        if self.radius.is_some() && !round {
            return Err("--radius applies to disk and half-disk only".into());
        }
        if self.k_max.is_some() != (kind == DomainKind::RectUnion) {
            return Err("--k-max is required for rect-union and invalid otherwise".into());
        }
        if self.n_max.is_some() != (kind == DomainKind::Spiral) {
            return Err("--n-max is required for spiral and invalid otherwise".into());
        }
        let radius = self.radius.unwrap_or(1.0);
        Ok(match kind {
            DomainKind::UnitSquare => DomainSpec::UnitSquare,
            DomainKind::LShape => DomainSpec::LShape,
            DomainKind::Disk => DomainSpec::Disk { radius, segments: 192 },
            DomainKind::HalfDisk => DomainSpec::HalfDisk { radius, segments: 64 },
            DomainKind::RectUnion => DomainSpec::RectUnion {
                k_max: self.k_max.unwrap(),
                part: RectUnionPart::Whole,
            },
            DomainKind::Spiral => DomainSpec::Spiral {
                n_max: self.n_max.unwrap(),
            },
        })
    }

    fn label(&self) -> &'static str {
        match self.domain {
            Some(DomainKind::UnitSquare) => "unit_square",
            Some(DomainKind::LShape) => "l_shape",
            Some(DomainKind::Disk) => "disk",
            Some(DomainKind::HalfDisk) => "half_disk",
            Some(DomainKind::RectUnion) => "rect_union",
            Some(DomainKind::Spiral) => "spiral",
            None => "run",
        }
    }
}

#[derive(Args, Debug)]
struct MeshCmd {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    domain: DomainArgs,
    /// Target element size [default: 0.1].
    #[arg(long)]
    h: Option<f64>,
    /// Uniform refinements after triangulation.
    #[arg(long)]
    refine: Option<usize>,
    /// Output file stem.
    #[arg(long)]
    name: Option<String>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum BcArg {
    Dirichlet,
    Neumann,
    Robin,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum SourceArg {
    Constant,
    SineProduct,
    CosineX,
    RobinDiskRadial,
}

#[derive(Args, Debug)]
struct SolveCmd {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    domain: DomainArgs,
    #[arg(long, value_enum)]
    bc: Option<BcArg>,
    #[arg(long, value_enum)]
    source: Option<SourceArg>,
    /// Value of the `constant` source.
    #[arg(long)]
    value: Option<f64>,
    /// Uniform Robin coefficient.
    #[arg(long)]
    robin: Option<f64>,
    /// Element size before refinement [default: 0.5].
    #[arg(long)]
    h: Option<f64>,
    /// Comma-separated refinement levels [default: 2,3,4].
    #[arg(long, value_delimiter = ',')]
    levels: Option<Vec<usize>>,
    /// Relative residual tolerance of CG [default: 1e-10].
    #[arg(long)]
    tol: Option<f64>,
    /// Also write the finest solution as `<name>.field.csv`.
    #[arg(long)]
    write_field: bool,
    /// Output file stem.
    #[arg(long)]
    name: Option<String>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum TaskArg {
    Poincare,
    Neumann,
    Trace,
    Steklov,
    RobinFredholm,
}

#[derive(Args, Debug)]
struct SpectrumCmd {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    domain: DomainArgs,
    #[arg(long, value_enum)]
    task: Option<TaskArg>,
    /// Uniform Robin coefficient of `robin-fredholm`.
    #[arg(long)]
    robin: Option<f64>,
    /// Element size before refinement [default: 0.5].
    #[arg(long)]
    h: Option<f64>,
    /// Comma-separated refinement levels [default: 2,3,4].
    #[arg(long, value_delimiter = ',')]
    levels: Option<Vec<usize>>,
    /// Number of eigenvalues [default: 5].
    #[arg(long)]
    count: Option<usize>,
    /// Eigenpair residual tolerance [default: 1e-8].
    #[arg(long)]
    tol: Option<f64>,
    /// Output file stem.
    #[arg(long)]
    name: Option<String>,
}

#[derive(Args, Debug)]
struct ExteriorCmd {
    /// JSON run config.
    #[arg(long, value_name = "FILE", required = true)]
    config: PathBuf,
    #[arg(long, value_name = "DIR", default_value = ".")]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct GeometryCmd {
    #[command(flatten)]
    common: Common,
    /// Sampling seed [default: 5].
    #[arg(long)]
    seed: Option<u64>,
    /// Random samples per chart check [default: 10000].
    #[arg(long)]
    samples: Option<usize>,
    /// Comma-separated spiral bands [default: 1,3,5].
    #[arg(long, value_delimiter = ',')]
    bands: Option<Vec<u32>>,
    /// Comma-separated rect-union sizes [default: 2,4,8].
    #[arg(long, value_delimiter = ',')]
    rect_k: Option<Vec<u32>>,
    /// Refinement levels of the interior-metric check [default: 4].
    #[arg(long)]
    metric_levels: Option<usize>,
    /// Output file stem.
    #[arg(long)]
    name: Option<String>,
}

enum Failure {
    Usage(String),
    Core(Error),
    Check(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Parse { .. } | Error::Invalid(_) | Error::Io(_) => 2,
        Error::NoConvergence { .. } | Error::SpectrumNotConverged { .. } => 4,
        _ => 3,
    }
}

fn load(path: &Path, command: &str) -> Result<RunConfig, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    let cfg = RunConfig::from_json(&text).map_err(|e| match e {
        Error::Parse { line, msg } => Failure::Usage(format!("{}:{line}: {msg}", path.display())),
        e => Failure::Core(e),
    })?;
    let found = match &cfg {
        RunConfig::Mesh(_) => "mesh",
        RunConfig::Solve(_) => "solve",
        RunConfig::Spectrum(_) => "spectrum",
        RunConfig::Exterior(_) => "exterior",
        RunConfig::GeometryCheck(_) => "geometry-check",
    };
    if found != command {
        return Err(Failure::Usage(format!(
            "{}: config is for `{found}`, not `{command}`",
            path.display()
        )));
    }
    Ok(cfg)
}

fn no_flags(given: bool) -> Result<(), Failure> {
    if given {
        Err(Failure::Usage("--config cannot be combined with direct flags".into()))
    } else {
        Ok(())
    }
}

fn mesh_config(c: &MeshCmd) -> Result<RunConfig, Failure> {
    if let Some(path) = &c.common.config {
        no_flags(c.domain.given() || c.h.is_some() || c.refine.is_some() || c.name.is_some())?;
        return load(path, "mesh");
    }
    Ok(RunConfig::Mesh(MeshRun {
        name: c.name.clone().unwrap_or_else(|| c.domain.label().to_string()),
        domain: c.domain.spec().map_err(Failure::Usage)?,
        h: c.h.unwrap_or(0.1),
        refine: c.refine.unwrap_or(0),
    }))
}

fn solve_config(c: &SolveCmd) -> Result<RunConfig, Failure> {
    if let Some(path) = &c.common.config {
        let any = c.domain.given()
            || c.bc.is_some()
            || c.source.is_some()
            || c.value.is_some()
            || c.robin.is_some()
            || c.h.is_some()
            || c.levels.is_some()
            || c.tol.is_some()
            || c.write_field
            || c.name.is_some();
        no_flags(any)?;
        return load(path, "solve");
    }
    let bc = match c
        .bc
        .ok_or_else(|| Failure::Usage("--bc is required without --config".into()))?
    {
        BcArg::Dirichlet => BcKind::Dirichlet,
        BcArg::Neumann => BcKind::Neumann,
        BcArg::Robin => BcKind::Robin,
    };
    if c.robin.is_some() != (bc == BcKind::Robin) {
        return Err(Failure::Usage(
            "--robin is required for --bc robin and invalid otherwise".into(),
        ));
    }
    let kind = c
        .source
        .ok_or_else(|| Failure::Usage("--source is required without --config".into()))?;
    if c.value.is_some() != (kind == SourceArg::Constant) {
        return Err(Failure::Usage(
            "--value is required for --source constant and invalid otherwise".into(),
        ));
    }
    let source = match kind {
        SourceArg::Constant => SourceSpec::Constant {
            value: c.value.unwrap(),
        },
        SourceArg::SineProduct => SourceSpec::SineProduct,
        SourceArg::CosineX => SourceSpec::CosineX,
        SourceArg::RobinDiskRadial => SourceSpec::RobinDiskRadial {
            h: c.robin
                .ok_or_else(|| Failure::Usage("--source robin-disk-radial needs --bc robin".into()))?,
        },
    };
    Ok(RunConfig::Solve(SolveRun {
        name: c.name.clone().unwrap_or_else(|| format!("{}_solve", c.domain.label())),
        domain: c.domain.spec().map_err(Failure::Usage)?,
        h: c.h.unwrap_or(0.5),
        levels: c.levels.clone().unwrap_or_else(|| vec![2, 3, 4]),
        bc,
        robin: c.robin.map(RobinSpec::Uniform),
        source,
        tol: c.tol.unwrap_or(1e-10),
        write_field: c.write_field,
    }))
}

fn spectrum_config(c: &SpectrumCmd) -> Result<RunConfig, Failure> {
    if let Some(path) = &c.common.config {
        let any = c.domain.given()
            || c.task.is_some()
            || c.robin.is_some()
            || c.h.is_some()
            || c.levels.is_some()
            || c.count.is_some()
            || c.tol.is_some()
            || c.name.is_some();
        no_flags(any)?;
        return load(path, "spectrum");
    }
    let task = match c
        .task
        .ok_or_else(|| Failure::Usage("--task is required without --config".into()))?
    {
        TaskArg::Poincare => SpectrumTask::Poincare,
        TaskArg::Neumann => SpectrumTask::Neumann,
        TaskArg::Trace => SpectrumTask::Trace,
        TaskArg::Steklov => SpectrumTask::Steklov,
        TaskArg::RobinFredholm => SpectrumTask::RobinFredholm,
    };
    if c.robin.is_some() != (task == SpectrumTask::RobinFredholm) {
        return Err(Failure::Usage(
            "--robin is required for robin-fredholm and invalid otherwise".into(),
        ));
    }
    Ok(RunConfig::Spectrum(SpectrumRun {
        name: c
            .name
            .clone()
            .unwrap_or_else(|| format!("{}_spectrum", c.domain.label())),
        domains: vec![c.domain.spec().map_err(Failure::Usage)?],
        h: c.h.unwrap_or(0.5),
        levels: c.levels.clone().unwrap_or_else(|| vec![2, 3, 4]),
        task,
        count: c.count.unwrap_or(5),
        robin: c.robin.map(RobinSpec::Uniform),
        tol: c.tol.unwrap_or(1e-8),
    }))
}

fn geometry_config(c: &GeometryCmd) -> Result<RunConfig, Failure> {
    if let Some(path) = &c.common.config {
        let any = c.seed.is_some()
            || c.samples.is_some()
            || c.bands.is_some()
            || c.rect_k.is_some()
            || c.metric_levels.is_some()
            || c.name.is_some();
        no_flags(any)?;
        return load(path, "geometry-check");
    }
    Ok(RunConfig::GeometryCheck(GeometryRun {
        name: c.name.clone().unwrap_or_else(|| "geometry".into()),
        seed: c.seed.unwrap_or(5),
        samples: c.samples.unwrap_or(10_000),
        spiral_bands: c.bands.clone().unwrap_or_else(|| vec![1, 3, 5]),
        rect_union_k: c.rect_k.clone().unwrap_or_else(|| vec![2, 4, 8]),
        metric_levels: c.metric_levels.unwrap_or(4),
    }))
}

fn execute(command: &Command) -> Result<(), Failure> {
    let (cfg, out) = match command {
        Command::Mesh(c) => (mesh_config(c)?, &c.common.out),
        Command::Solve(c) => (solve_config(c)?, &c.common.out),
        Command::Spectrum(c) => (spectrum_config(c)?, &c.common.out),
        Command::Exterior(c) => (load(&c.config, "exterior")?, &c.out),
        Command::GeometryCheck(c) => (geometry_config(c)?, &c.common.out),
    };
    let report = cfg.run()?;
    fs::create_dir_all(out).map_err(|e| Failure::Usage(format!("{}: {e}", out.display())))?;
    for o in &report.outputs {
        let path = out.join(&o.name);
        fs::write(&path, &o.contents).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
        println!("wrote {}", path.display());
    }
    match report.failure {
        Some(f) => Err(Failure::Check(f)),
        None => Ok(()),
    }
}

fn configure_threads() -> Result<(), String> {
    let Ok(v) = std::env::var("ROUGHLAP_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .map_err(|_| format!("ROUGHLAP_THREADS must be a positive integer (got {v:?})"))?;
    if n == 0 {
        return Err("ROUGHLAP_THREADS must be a positive integer (got 0)".into());
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    match execute(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Check(msg)) => {
            eprintln!("check failed: {msg}");
            ExitCode::from(3)
        }
        Err(Failure::Core(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
