//! JSON-configured workflows shared by the command line and the bindings.
//!
//! A run is a pure function of its config: it returns named text outputs and
//! never touches the filesystem. Every output starts with comment lines that
//! echo the tool version and the effective config, with all defaults filled.

use std::f64::consts::PI;
use std::fmt::Write as _;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exterior::{
    build_exterior_mesh, build_exterior_mesh_capped, bump_kelvin_oracle, decay_fit, green_representation,
    max_abs_on_sphere, radiation_residual, solve_shifted, BumpSource, ContinuationSchedule, GreenKernel, ObstacleBc,
    Truncation, WeightedNormSpec,
};
use crate::fem::{assemble_load, error_norms, norms, Field, RobinCoefficient, System};
use crate::geometry::{
    area_formula_check, boundary_measure, build_rect_union, build_spiral, disk, dist, estimate_quasiisometry,
    half_disk, interior_metric, l_shape, rect_union_length_bound, rectangle, similarity_conjugate, spiral_band_region,
    unit_square, ChartMap, Domain, Point, RectUnionPart,
};
use crate::mesh::{io::write_mesh, refine_times, triangulate, Mesh};
use crate::solve::{
    classical_steklov_spectrum, neumann_spectrum, robin_fredholm_spectrum, solve_dirichlet, solve_neumann, solve_robin,
    steklov_spectrum, SpectrumReport,
};
use crate::sparse::dot;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DomainSpec {
    UnitSquare,
    Rectangle {
        min: Point,
        max: Point,
    },
    LShape,
    /// Polygonal disk sampled by `segments` boundary points.
    Disk {
        radius: f64,
        #[serde(default = "default_segments")]
        segments: usize,
    },
    HalfDisk {
        radius: f64,
        #[serde(default = "default_half_segments")]
        segments: usize,
    },
    RectUnion {
        k_max: u32,
        #[serde(default = "whole")]
        part: RectUnionPart,
    },
    Spiral {
        n_max: u32,
    },
    /// `(x1, x2) -> (x2 + r_offset, x1)`: a planar section placed in the
    /// meridian half-plane.
    Rotated {
        base: Box<DomainSpec>,
        r_offset: f64,
    },
}

fn default_segments() -> usize {
    192
}

fn default_half_segments() -> usize {
    64
}

fn whole() -> RectUnionPart {
    RectUnionPart::Whole
}

impl DomainSpec {
    pub fn build(&self) -> Result<Domain> {
        Ok(match self {
            DomainSpec::UnitSquare => unit_square(),
            DomainSpec::Rectangle { min, max } => rectangle(*min, *max),
            DomainSpec::LShape => l_shape(),
            DomainSpec::Disk { radius, segments } => disk([0.0, 0.0], *radius, *segments),
            DomainSpec::HalfDisk { radius, segments } => half_disk(*radius, *segments),
            DomainSpec::RectUnion { k_max, part } => match part {
                RectUnionPart::Whole => build_rect_union(*k_max)?,
                p => crate::geometry::build_rect_union_part(*k_max, *p)?,
            },
            DomainSpec::Spiral { n_max } => build_spiral(*n_max)?,
            DomainSpec::Rotated { base, r_offset } => base.build()?.rotated_meridian(*r_offset),
        })
    }

    fn is_meridian(&self) -> bool {
        matches!(self, DomainSpec::HalfDisk { .. } | DomainSpec::Rotated { .. })
    }

    /// Mesh at refinement `level`: `triangulate(h)` refined `level` times.
    /// Meridian sections get the axisymmetric weight.
    pub fn mesh(&self, h: f64, level: usize) -> Result<Mesh> {
        let mut m = refine_times(&triangulate(&self.build()?, h)?, level);
        m.axisymmetric = self.is_meridian();
        Ok(m)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RobinSpec {
    Uniform(f64),
    /// `[marker, h]` pairs; unlisted markers get 0.
    PerMarker(Vec<(u32, f64)>),
}

impl RobinSpec {
    fn coefficient(&self) -> RobinCoefficient {
        match self {
            RobinSpec::Uniform(h) => RobinCoefficient::Uniform(*h),
            RobinSpec::PerMarker(v) => RobinCoefficient::PerMarker(v.clone()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BcKind {
    Dirichlet,
    Neumann,
    Robin,
}

/// Right-hand sides. The manufactured ones carry their exact solution.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SourceSpec {
    Constant {
        value: f64,
    },
    /// `F = 2π² sin(πx) sin(πy)`, `u = sin(πx) sin(πy)` (Dirichlet, unit square).
    SineProduct,
    /// `F = π² cos(πx)`, `u = cos(πx)` (Neumann, unit square).
    CosineX,
    /// `F = 1` on the unit disk with uniform Robin `h`: `u = (1 − r²)/4 + 1/(2h)`.
    RobinDiskRadial {
        h: f64,
    },
}

type Exact = (Box<dyn Fn(Point) -> f64>, Box<dyn Fn(Point) -> [f64; 2]>);

impl SourceSpec {
    fn load(&self, p: Point) -> f64 {
        match self {
            SourceSpec::Constant { value } => *value,
            SourceSpec::SineProduct => 2.0 * PI * PI * (PI * p[0]).sin() * (PI * p[1]).sin(),
            SourceSpec::CosineX => PI * PI * (PI * p[0]).cos(),
            SourceSpec::RobinDiskRadial { .. } => 1.0,
        }
    }

    fn exact(&self) -> Option<Exact> {
        match *self {
            SourceSpec::Constant { .. } => None,
            SourceSpec::SineProduct => Some((
                Box::new(|p: Point| (PI * p[0]).sin() * (PI * p[1]).sin()),
                Box::new(|p: Point| {
                    [
                        PI * (PI * p[0]).cos() * (PI * p[1]).sin(),
                        PI * (PI * p[0]).sin() * (PI * p[1]).cos(),
                    ]
                }),
            )),
            SourceSpec::CosineX => Some((
                Box::new(|p: Point| (PI * p[0]).cos()),
                Box::new(|p: Point| [-PI * (PI * p[0]).sin(), 0.0]),
            )),
            SourceSpec::RobinDiskRadial { h } => Some((
                Box::new(move |p: Point| (1.0 - p[0] * p[0] - p[1] * p[1]) / 4.0 + 0.5 / h),
                Box::new(|p: Point| [-p[0] / 2.0, -p[1] / 2.0]),
            )),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshRun {
    pub name: String,
    pub domain: DomainSpec,
    pub h: f64,
    #[serde(default)]
    pub refine: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveRun {
    pub name: String,
    pub domain: DomainSpec,
    pub h: f64,
    pub levels: Vec<usize>,
    pub bc: BcKind,
    #[serde(default)]
    pub robin: Option<RobinSpec>,
    pub source: SourceSpec,
    pub tol: f64,
    /// Write the finest solution as `x,y,u` rows.
    #[serde(default)]
    pub write_field: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectrumTask {
    /// Smallest nonzero `K x = μ M x`; derived column `1/√μ`.
    Poincare,
    /// Nonzero Neumann eigenvalues.
    Neumann,
    /// Trace pencil `(K + M) x = μ B₁ x`; derived column `1/√μ`.
    Trace,
    /// Classical Steklov `K x = σ B₁ x`.
    Steklov,
    /// `(K + B) x = λ M x`.
    RobinFredholm,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumRun {
    pub name: String,
    pub domains: Vec<DomainSpec>,
    pub h: f64,
    pub levels: Vec<usize>,
    pub task: SpectrumTask,
    pub count: usize,
    #[serde(default)]
    pub robin: Option<RobinSpec>,
    pub tol: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RepresentationSpec {
    pub sphere_radius: f64,
    pub points: Vec<Point>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExteriorRun {
    pub name: String,
    pub obstacle: DomainSpec,
    pub bc: ObstacleBc,
    pub k: f64,
    pub epsilons: Vec<f64>,
    #[serde(default)]
    pub truncation: Truncation,
    pub a: f64,
    pub r_inf: f64,
    pub target_h: f64,
    /// Cap on the element size of the graded far field.
    #[serde(default)]
    pub max_h: Option<f64>,
    pub source: BumpSource,
    /// Meridian points `(r, z)` where the limit field is reported, and
    /// compared with the Kelvin oracle for the Dirichlet unit sphere at k = 0.
    #[serde(default)]
    pub probes: Vec<Point>,
    /// Radii of the `radius,max_abs_u,radiation_residual` table.
    pub radii: Vec<f64>,
    #[serde(default)]
    pub decay_radii: Vec<f64>,
    #[serde(default)]
    pub representation: Option<RepresentationSpec>,
    pub tol: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryRun {
    pub name: String,
    pub seed: u64,
    pub samples: usize,
    pub spiral_bands: Vec<u32>,
    pub rect_union_k: Vec<u32>,
    pub metric_levels: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum RunConfig {
    Mesh(MeshRun),
    Solve(SolveRun),
    Spectrum(SpectrumRun),
    Exterior(ExteriorRun),
    GeometryCheck(GeometryRun),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Output {
    pub name: String,
    pub contents: String,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunReport {
    pub outputs: Vec<Output>,
    /// Set when the run completed but a checked property failed.
    pub failure: Option<String>,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            msg: format!("column {}: {e}", e.column()),
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("configs serialize")
    }

    pub fn run(&self) -> Result<RunReport> {
        let header = format!("# roughlap {VERSION}\n# config {}\n", self.to_json());
        match self {
            RunConfig::Mesh(c) => run_mesh(c, &header),
            RunConfig::Solve(c) => run_solve(c, &header),
            RunConfig::Spectrum(c) => run_spectrum(c, &header),
            RunConfig::Exterior(c) => run_exterior(c, &header),
            RunConfig::GeometryCheck(c) => run_geometry(c, &header),
        }
    }
}

fn output(name: String, header: &str, body: String) -> Output {
    Output {
        name,
        contents: format!("{header}{body}"),
    }
}

/// Shortest round-trip float, empty for NaN.
fn num(x: f64) -> String {
    if x.is_nan() {
        String::new()
    } else {
        format!("{x:e}")
    }
}

fn positive(what: &str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::Invalid(format!("{what} must be positive (got {x})")))
    }
}

fn json<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("reports serialize") + "\n"
}

#[derive(Serialize)]
struct MeshQuality<'a> {
    version: &'a str,
    config: &'a MeshRun,
    domain_loops: usize,
    mesh_loops: usize,
    max_edge: f64,
    report: crate::mesh::ValidationReport,
}

fn run_mesh(c: &MeshRun, header: &str) -> Result<RunReport> {
    positive("h", c.h)?;
    let domain = c.domain.build()?;
    let mesh = c.domain.mesh(c.h, c.refine)?;
    let report = mesh.validate();
    let mut failure = (!report.is_valid()).then(|| format!("mesh validation failed: {:?}", report.violations));
    let mesh_loops = report.boundary_loops;
    if failure.is_none() && mesh_loops != domain.loop_count() && !c.domain.is_meridian() {
        failure = Some(format!(
            "mesh has {mesh_loops} boundary loops, domain {}",
            domain.loop_count()
        ));
    }
    let quality = MeshQuality {
        version: VERSION,
        config: c,
        domain_loops: domain.loop_count(),
        mesh_loops,
        max_edge: mesh.max_edge_length(),
        report,
    };
    Ok(RunReport {
        outputs: vec![
            output(format!("{}.mesh", c.name), header, write_mesh(&mesh)),
            Output {
                name: format!("{}.quality.json", c.name),
                contents: json(&quality),
            },
        ],
        failure,
    })
}

fn run_solve(c: &SolveRun, header: &str) -> Result<RunReport> {
    positive("h", c.h)?;
    positive("tol", c.tol)?;
    if c.levels.is_empty() {
        return Err(Error::Invalid("levels must not be empty".into()));
    }
    let robin = match (c.bc, &c.robin) {
        (BcKind::Robin, Some(r)) => Some(r.coefficient()),
        (BcKind::Robin, None) => return Err(Error::Invalid("robin solve needs a `robin` coefficient".into())),
        (_, Some(_)) => return Err(Error::Invalid("`robin` is only valid with bc = robin".into())),
        _ => None,
    };
    let exact = c.source.exact();
    let mut csv = String::from(
        "level,h,vertices,iterations,relative_residual,l2,h1,energy,trace_l2,robin_norm,energy_defect,mean,l2_error,h1_error,l2_ratio,h1_ratio\n",
    );
    let mut prev: Option<(f64, f64)> = None;
    let mut last: Option<(Mesh, Field)> = None;
    for &level in &c.levels {
        let mesh = c.domain.mesh(c.h, level)?;
        let sys = System::assemble(&mesh, robin.as_ref())?;
        let b = assemble_load(&mesh, |p| c.source.load(p))?;
        let res = match c.bc {
            BcKind::Dirichlet => solve_dirichlet(&sys.stiffness, &b, &mesh.boundary_vertices(), c.tol)?,
            BcKind::Neumann => solve_neumann(&sys.stiffness, &sys.mass, &b, c.tol)?,
            BcKind::Robin => solve_robin(&sys.stiffness, sys.robin.as_ref().expect("robin form"), &b, c.tol)?,
        };
        let u = &res.solution;
        let nm = norms(u, &sys)?;
        // [u,u] (+ <hu,u>) = (F,u), relative
        let lhs = nm.robin.unwrap_or(nm.energy).powi(2);
        let defect = (lhs - dot(&b, &u.values)).abs() / lhs.max(f64::MIN_POSITIVE);
        let mean = res.constraint.as_ref().map_or(f64::NAN, |r| r.mean);
        let (l2e, h1e) = match &exact {
            Some((f, g)) => error_norms(&mesh, u, f, g)?,
            None => (f64::NAN, f64::NAN),
        };
        let (r2, r1) = prev.map_or((f64::NAN, f64::NAN), |(a, b)| (a / l2e, b / h1e));
        prev = Some((l2e, h1e));
        let _ = writeln!(
            csv,
            "{level},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            num(mesh.max_edge_length()),
            mesh.n_vertices(),
            res.iterations,
            num(res.relative_residual),
            num(nm.l2),
            num(nm.h1),
            num(nm.energy),
            num(nm.trace_l2),
            num(nm.robin.unwrap_or(f64::NAN)),
            num(defect),
            num(mean),
            num(l2e),
            num(h1e),
            num(r2),
            num(r1),
        );
        last = Some((mesh, res.solution));
    }
    let mut outputs = vec![output(format!("{}.csv", c.name), header, csv)];
    if c.write_field {
        let (mesh, u) = last.expect("at least one level");
        let mut f = String::from("x,y,u\n");
        for (p, v) in mesh.vertices.iter().zip(&u.values) {
            let _ = writeln!(f, "{},{},{}", num(p[0]), num(p[1]), num(*v));
        }
        outputs.push(output(format!("{}.field.csv", c.name), header, f));
    }
    Ok(RunReport { outputs, failure: None })
}

fn spectrum_of(task: SpectrumTask, sys: &System, count: usize, tol: f64) -> Result<SpectrumReport> {
    match task {
        SpectrumTask::Poincare => neumann_spectrum(&sys.stiffness, &sys.mass, 1, tol),
        SpectrumTask::Neumann => neumann_spectrum(&sys.stiffness, &sys.mass, count, tol),
        SpectrumTask::Trace => steklov_spectrum(&sys.stiffness, &sys.mass, &sys.trace, count, tol),
        SpectrumTask::Steklov => classical_steklov_spectrum(&sys.stiffness, &sys.trace, count, tol),
        SpectrumTask::RobinFredholm => {
            let b = sys
                .robin
                .as_ref()
                .ok_or_else(|| Error::Invalid("robin_fredholm needs a `robin` coefficient".into()))?;
            robin_fredholm_spectrum(&sys.stiffness, b, &sys.mass, count, tol)
        }
    }
}

fn run_spectrum(c: &SpectrumRun, header: &str) -> Result<RunReport> {
    positive("h", c.h)?;
    positive("tol", c.tol)?;
    if c.domains.is_empty() || c.levels.is_empty() || c.count == 0 {
        return Err(Error::Invalid("domains, levels and count must be nonempty".into()));
    }
    let robin = c.robin.as_ref().map(RobinSpec::coefficient);
    let mut csv = String::from("domain,level,h,vertices,iterations,index,eigenvalue,residual,derived\n");
    for (d, spec) in c.domains.iter().enumerate() {
        for &level in &c.levels {
            let mesh = spec.mesh(c.h, level)?;
            let sys = System::assemble(&mesh, robin.as_ref())?;
            let h = mesh.max_edge_length();
            let rep = spectrum_of(c.task, &sys, c.count, c.tol)?.with_mesh_h(h);
            for (i, (ev, res)) in rep.eigenvalues.iter().zip(&rep.residuals).enumerate() {
                let derived = match c.task {
                    SpectrumTask::Poincare | SpectrumTask::Trace if *ev > 0.0 => 1.0 / ev.sqrt(),
                    _ => f64::NAN,
                };
                let _ = writeln!(
                    csv,
                    "{d},{level},{},{},{},{},{},{},{}",
                    num(h),
                    mesh.n_vertices(),
                    rep.iterations,
                    i + 1,
                    num(*ev),
                    num(*res),
                    num(derived)
                );
            }
        }
    }
    Ok(RunReport {
        outputs: vec![output(format!("{}.csv", c.name), header, csv)],
        failure: None,
    })
}

#[derive(Serialize)]
struct ProbeRow {
    point: Point,
    re: f64,
    im: f64,
    oracle: Option<f64>,
    relative_error: Option<f64>,
}

#[derive(Serialize)]
struct RepresentationRow {
    point: Point,
    direct: f64,
    represented_re: f64,
    represented_im: f64,
    relative_error: f64,
}

#[derive(Serialize)]
struct ExteriorSummary<'a> {
    version: &'a str,
    config: &'a ExteriorRun,
    vertices: usize,
    truncation_radius: f64,
    iterations: Vec<usize>,
    relative_residuals: Vec<f64>,
    decay_exponent: Option<f64>,
    decay_constant: Option<f64>,
    probes: Vec<ProbeRow>,
    representation: Vec<RepresentationRow>,
}

fn is_unit_sphere(obstacle: &DomainSpec) -> bool {
    matches!(obstacle, DomainSpec::HalfDisk { radius, .. } if *radius == 1.0)
}

fn run_exterior(c: &ExteriorRun, header: &str) -> Result<RunReport> {
    positive("tol", c.tol)?;
    let spec = WeightedNormSpec::new(c.a)?;
    let schedule = ContinuationSchedule::new(c.epsilons.clone(), c.k, c.bc)?.with_truncation(c.truncation);
    let obstacle = c.obstacle.build()?;
    let mesh = match c.max_h {
        Some(cap) => build_exterior_mesh_capped(&obstacle, c.r_inf, c.target_h, cap)?,
        None => build_exterior_mesh(&obstacle, c.r_inf, c.target_h)?,
    };
    let res = solve_shifted(&mesh, &schedule, Some(&c.source), spec, c.tol)?;

    let mut cont = String::from("epsilon,weighted_norm,pairwise_diff\n");
    for (j, (e, n)) in res.epsilons.iter().zip(&res.weighted_norms).enumerate() {
        let d = if j == 0 { f64::NAN } else { res.pairwise_diffs[j - 1] };
        let _ = writeln!(cont, "{},{},{}", num(*e), num(*n), num(d));
    }

    let u = &res.fields.last().expect("nonempty schedule").values;
    let residuals = if c.k > 0.0 {
        Some(radiation_residual(u, &mesh, c.k, &c.radii)?)
    } else {
        None
    };
    let mut radial = String::from("radius,max_abs_u,radiation_residual\n");
    for (i, &r) in c.radii.iter().enumerate() {
        let rr = residuals.as_ref().map_or(f64::NAN, |v| v[i]);
        let _ = writeln!(
            radial,
            "{},{},{}",
            num(r),
            num(max_abs_on_sphere(u, &mesh, r)?),
            num(rr)
        );
    }

    let (decay_exponent, decay_constant) = if c.decay_radii.is_empty() {
        (None, None)
    } else {
        let (s, i) = decay_fit(u, &mesh, &c.decay_radii)?;
        (Some(s), Some(i))
    };
    let loc = crate::mesh::Locator::new(&mesh);
    let kelvin = c.k == 0.0 && c.bc == ObstacleBc::Dirichlet && is_unit_sphere(&c.obstacle);
    let mut probes = Vec::new();
    for &p in &c.probes {
        let v = loc
            .interpolate(&mesh, u, p, 1e-9 * p[0].hypot(p[1]).max(1.0))
            .ok_or_else(|| Error::Invalid(format!("probe {p:?} is outside the mesh")))?;
        let oracle = if kelvin {
            Some(bump_kelvin_oracle([p[0], 0.0, p[1]], &c.source)?)
        } else {
            None
        };
        let relative_error = oracle.map(|o| (v - Complex64::new(o, 0.0)).norm() / o.abs());
        probes.push(ProbeRow {
            point: p,
            re: v.re,
            im: v.im,
            oracle,
            relative_error,
        });
    }
    let mut representation = Vec::new();
    if let Some(rs) = &c.representation {
        let kernel = GreenKernel {
            epsilon: *res.epsilons.last().expect("nonempty"),
        };
        for &p in &rs.points {
            let direct = loc
                .interpolate(&mesh, u, p, 1e-9 * p[0].hypot(p[1]).max(1.0))
                .ok_or_else(|| Error::Invalid(format!("point {p:?} is outside the mesh")))?;
            let rep = green_representation(u, &mesh, rs.sphere_radius, p, &kernel)?;
            representation.push(RepresentationRow {
                point: p,
                direct: direct.re,
                represented_re: rep.re,
                represented_im: rep.im,
                relative_error: (rep - direct).norm() / direct.norm(),
            });
        }
    }
    let summary = ExteriorSummary {
        version: VERSION,
        config: c,
        vertices: mesh.n_vertices(),
        truncation_radius: res.truncation_radius,
        iterations: res.iterations.clone(),
        relative_residuals: res.relative_residuals.clone(),
        decay_exponent,
        decay_constant,
        probes,
        representation,
    };
    Ok(RunReport {
        outputs: vec![
            output(format!("{}.continuation.csv", c.name), header, cont),
            output(format!("{}.radial.csv", c.name), header, radial),
            Output {
                name: format!("{}.summary.json", c.name),
                contents: json(&summary),
            },
        ],
        failure: None,
    })
}

struct Check {
    name: &'static str,
    param: String,
    value: f64,
    reference: f64,
    pass: bool,
}

fn nearest_vertex(mesh: &Mesh, p: Point) -> usize {
    (0..mesh.vertices.len())
        .min_by(|&i, &j| dist(mesh.vertices[i], p).total_cmp(&dist(mesh.vertices[j], p)))
        .expect("nonempty mesh")
}

fn run_geometry(c: &GeometryRun, header: &str) -> Result<RunReport> {
    if c.spiral_bands.is_empty() {
        return Err(Error::Invalid("spiral_bands must not be empty".into()));
    }
    let mut checks = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(c.seed);

    // chart roundtrip on random points of T
    let n_max = *c.spiral_bands.iter().max().expect("nonempty");
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let s = (-(n_max as f64 + 1.0) * rng.random::<f64>()).exp();
        let t = s * (1.0 + rng.random::<f64>());
        let back = ChartMap::Spiral.inverse(ChartMap::Spiral.forward([s, t])?)?;
        worst = worst.max(dist(back, [s, t]) / s.hypot(t));
    }
    checks.push(Check {
        name: "chart_roundtrip",
        param: "spiral".into(),
        value: worst,
        reference: 1e-12,
        pass: worst <= 1e-12,
    });

    // spiral constant per band
    let q: Vec<f64> = c
        .spiral_bands
        .iter()
        .map(|&n| Ok(estimate_quasiisometry(&ChartMap::Spiral, &spiral_band_region(n), c.samples, c.seed)?.constant()))
        .collect::<Result<_>>()?;
    for (&n, &qn) in c.spiral_bands.iter().zip(&q) {
        let rel = (qn - q[0]).abs() / q[0];
        checks.push(Check {
            name: "spiral_q",
            param: format!("n={n}"),
            value: qn,
            reference: q[0],
            pass: rel < 0.05,
        });
    }

    // conjugation bound
    let region = spiral_band_region(c.spiral_bands[0]);
    let base = estimate_quasiisometry(&ChartMap::Spiral, &region, c.samples, c.seed)?;
    for (k, k1) in [(0.5, 3.0), (2.0, 0.25)] {
        let inner: Vec<Point> = region.iter().map(|p| [p[0] / k1, p[1] / k1]).collect();
        let conj = estimate_quasiisometry(
            &similarity_conjugate(&ChartMap::Spiral, k, k1),
            &inner,
            c.samples,
            c.seed,
        )?;
        let bound = k * k1 * base.upper;
        checks.push(Check {
            name: "conjugation_bound",
            param: format!("k={k} k1={k1}"),
            value: conj.upper,
            reference: bound,
            pass: conj.upper <= 1.02 * bound,
        });
    }

    // area formula along the spiral ray t = s
    let exact = (1.0 + 4.0 * PI * PI).sqrt();
    let ray: Vec<Point> = (0..=64)
        .map(|i| {
            let s = (-6.0 * (1.0 - i as f64 / 64.0)).exp();
            [s, s]
        })
        .collect();
    let (lhs, rhs) = area_formula_check(&ChartMap::Spiral, &ray, 4)?;
    checks.push(Check {
        name: "area_formula",
        param: "lhs_vs_rhs".into(),
        value: lhs,
        reference: rhs,
        pass: (lhs - rhs).abs() / rhs <= 0.005,
    });
    checks.push(Check {
        name: "spiral_ray_length",
        param: "s>=e^-6".into(),
        value: rhs,
        reference: exact,
        pass: (rhs - exact).abs() / exact <= 0.005,
    });

    // boundary lengths against the series bound
    let bound = rect_union_length_bound();
    for &k in &c.rect_union_k {
        let len = boundary_measure(&build_rect_union(k)?)?;
        checks.push(Check {
            name: "rect_union_length",
            param: format!("k_max={k}"),
            value: len,
            reference: bound,
            pass: len < bound,
        });
    }
    for &n in &c.spiral_bands {
        let len = boundary_measure(&build_spiral(n)?)?;
        checks.push(Check {
            name: "spiral_length",
            param: format!("n_max={n}"),
            value: len,
            reference: f64::NAN,
            pass: len.is_finite(),
        });
    }

    // interior metric: square diagonal and the L-shape corner path
    let sq = refine_times(&triangulate(&unit_square(), 0.5)?, c.metric_levels);
    let d = interior_metric(&sq, nearest_vertex(&sq, [0.0, 0.0]), nearest_vertex(&sq, [1.0, 1.0]))?;
    let r2 = 2f64.sqrt();
    checks.push(Check {
        name: "interior_metric",
        param: format!("square level={}", c.metric_levels),
        value: d,
        reference: r2,
        pass: (d - r2).abs() / r2 < 0.05,
    });
    let l = refine_times(&triangulate(&l_shape(), 0.1)?, c.metric_levels.min(2));
    let (x, y) = (nearest_vertex(&l, [0.9, 0.1]), nearest_vertex(&l, [0.1, 0.9]));
    let geo = dist(l.vertices[x], [0.5, 0.5]) + dist([0.5, 0.5], l.vertices[y]);
    let d = interior_metric(&l, x, y)?;
    checks.push(Check {
        name: "interior_metric",
        param: "l_shape corner".into(),
        value: d,
        reference: geo,
        pass: d >= geo - 1e-12 && (d - geo) / geo < 0.02,
    });

    let mut csv = String::from("check,parameter,value,reference,pass\n");
    for ch in &checks {
        let _ = writeln!(
            csv,
            "{},{},{},{},{}",
            ch.name,
            ch.param,
            num(ch.value),
            num(ch.reference),
            ch.pass
        );
    }
    let failed: Vec<String> = checks
        .iter()
        .filter(|c| !c.pass)
        .map(|c| format!("{} ({})", c.name, c.param))
        .collect();
    Ok(RunReport {
        outputs: vec![output(format!("{}.csv", c.name), header, csv)],
        failure: (!failed.is_empty()).then(|| format!("failed checks: {}", failed.join(", "))),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_roundtrip_and_unknown_fields() {
        let text = r#"{"command":"mesh","name":"sq","domain":{"kind":"unit_square"},"h":0.5}"#;
        let cfg = RunConfig::from_json(text).unwrap();
        assert_eq!(cfg, RunConfig::from_json(&cfg.to_json()).unwrap());
        assert!(cfg.to_json().contains("\"refine\":0"));
        let bad = r#"{"command":"mesh","name":"sq","domain":{"kind":"unit_square"},"h":0.5,"hh":1}"#;
        assert!(matches!(RunConfig::from_json(bad), Err(Error::Parse { .. })));
        match RunConfig::from_json("{\n\"command\": \"mesh\",\n  oops") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn mesh_run_echoes_config() {
        let cfg = RunConfig::Mesh(MeshRun {
            name: "sq".into(),
            domain: DomainSpec::UnitSquare,
            h: 0.5,
            refine: 1,
        });
        let rep = cfg.run().unwrap();
        assert!(rep.failure.is_none());
        let mesh_text = &rep.outputs[0].contents;
        assert!(mesh_text.starts_with(&format!("# roughlap {VERSION}\n# config {{\"command\":\"mesh\"")));
        let m = crate::mesh::io::read_mesh(mesh_text).unwrap();
        assert_eq!(m.triangles.len(), 32);
        assert!(rep.outputs[1].contents.contains("\"mesh_loops\": 1"));
    }

    #[test]
    fn neumann_run_rejects_constant_load() {
        let cfg = RunConfig::Solve(SolveRun {
            name: "n".into(),
            domain: DomainSpec::UnitSquare,
            h: 0.25,
            levels: vec![0],
            bc: BcKind::Neumann,
            robin: None,
            source: SourceSpec::Constant { value: 1.0 },
            tol: 1e-10,
            write_field: false,
        });
        assert!(matches!(cfg.run(), Err(Error::Compatibility { .. })));
    }

    #[test]
    fn robin_disk_run_reports_errors() {
        let cfg = RunConfig::Solve(SolveRun {
            name: "r".into(),
            domain: DomainSpec::Disk {
                radius: 1.0,
                segments: 192,
            },
            h: 0.25,
            levels: vec![0, 1],
            bc: BcKind::Robin,
            robin: Some(RobinSpec::Uniform(1.0)),
            source: SourceSpec::RobinDiskRadial { h: 1.0 },
            tol: 1e-11,
            write_field: true,
        });
        let rep = cfg.run().unwrap();
        let csv = &rep.outputs[0].contents;
        let rows: Vec<&str> = csv.lines().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(rows.len(), 3);
        let l2: f64 = rows[2].split(',').nth(12).unwrap().parse().unwrap();
        assert!(l2 < 5e-3);
        assert!(rep.outputs[1].contents.contains("x,y,u\n"));
    }
}
