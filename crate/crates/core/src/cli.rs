//! Command-line front end: problem files in, versioned JSON and CSV out.

use std::f64::consts::TAU;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::ahlfors::{self, ArcDomain, CircleArcSet, RealCriticalPoint, RealSlitSet};
use crate::cmv::VerblunskySequence;
use crate::error::Error;
use crate::magic::{magic_check, MagicReport, MAGIC_TOL};
use crate::mcmv::PoleVector;
use crate::numerics::circle_grid;
use crate::oracle::{recover_coefficients, QuadratureMeasure};
use crate::random;
use crate::scalar::{DiskPoint, C64, I};
use crate::spectral::{
    bands_from_discriminant, divisor_extract, stripping_check, DivisorPoint, SpectralMeasure, EPSILON_THRESHOLD,
};
use crate::transfer::MonodromyEvaluator;

pub const SCHEMA: &str = "mcmv-kit/1";

#[derive(Debug, Parser)]
#[command(name = "mcmv", version, about = "Finite-gap CMV/MCMV spectral toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Bands, gap edges and critical points of the discriminant.
    Bands(CommonArgs),
    /// Check Delta(A) = S^{2n} + S^{-2n} on a window.
    Magic(MagicArgs),
    /// Divisor points (one per open gap).
    Divisor(CommonArgs),
    /// Density of the spectral measure on a grid (CSV) and point masses.
    Measure(MeasureArgs),
    /// Ahlfors functions and generalized discriminant of a gap or arc set.
    Ahlfors(AhlforsArgs),
    /// Coefficient stripping residuals.
    Stripping(StrippingArgs),
    /// Recover the coefficients from the spectral measure.
    Roundtrip(CommonArgs),
}

#[derive(Debug, Args, Clone)]
pub struct CommonArgs {
    /// Problem description (JSON).
    #[arg(long)]
    pub input: PathBuf,
    /// Sampling grid size.
    #[arg(long, default_value_t = 512)]
    pub grid: usize,
    /// Pass/fail tolerance; each command has its own default.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Output file for the JSON report (stdout when absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Clone)]
pub struct MagicArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Window of row indices as LO:HI (default 0:8n).
    #[arg(long)]
    pub range: Option<String>,
}

#[derive(Debug, Args, Clone)]
pub struct MeasureArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// CSV file for the sampled density.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args, Clone)]
pub struct AhlforsArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Base point as RE,IM (gap sets only; default 0,1).
    #[arg(long, allow_hyphen_values = true)]
    pub z0: Option<String>,
    /// CSV file for the sampled discriminant.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args, Clone)]
pub struct StrippingArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Number of periods to strip.
    #[arg(long, default_value_t = 2)]
    pub depth: usize,
}

/// Problem file. Operator data (verblunsky, phase, poles, or a random
/// request) and set data (gaps or arcs) are mutually exclusive.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    pub poles: Option<Vec<[f64; 2]>>,
    pub verblunsky: Option<Vec<[f64; 2]>>,
    pub phase: Option<f64>,
    pub random: Option<RandomSpec>,
    /// Single-entry overrides [k, re, im] that break periodicity (negative
    /// controls for the magic check).
    pub overrides: Option<Vec<[f64; 3]>>,
    pub gaps: Option<Vec<[f64; 2]>>,
    pub arcs: Option<Vec<[f64; 2]>>,
}

/// Random instance drawn with the seed from MCMV_SEED.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomSpec {
    pub n: usize,
    #[serde(default = "default_a_max")]
    pub a_max: f64,
}

fn default_a_max() -> f64 {
    0.8
}

pub enum Problem {
    Operator { seq: VerblunskySequence, z: PoleVector },
    Gaps(RealSlitSet),
    Arcs(CircleArcSet),
}

/// Outcome classes mapped to process exit codes.
#[derive(Debug)]
pub enum CliError {
    /// A check ran and failed (exit 1), or output could not be written.
    Failed(String),
    /// Bad input (exit 2).
    Validation(String),
    /// Numerical breakdown (exit 3).
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Failed(_) => 1,
            CliError::Validation(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Failed(m) => write!(f, "check failed: {m}"),
            CliError::Validation(m) => write!(f, "invalid input: {m}"),
            CliError::Numeric(m) => write!(f, "numerical failure: {m}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        if e.is_validation() {
            CliError::Validation(e.to_string())
        } else {
            CliError::Numeric(e.to_string())
        }
    }
}

fn c(p: [f64; 2]) -> C64 {
    C64::new(p[0], p[1])
}

impl ProblemSpec {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Validation(format!("malformed problem file: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Validation(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn resolve(&self) -> Result<Problem, CliError> {
        let op = self.verblunsky.is_some()
            || self.poles.is_some()
            || self.phase.is_some()
            || self.random.is_some()
            || self.overrides.is_some();
        let set = self.gaps.is_some() || self.arcs.is_some();
        if op == set {
            return Err(CliError::Validation("give exactly one of operator data or set data".into()));
        }
        if let Some(g) = &self.gaps {
            if self.arcs.is_some() {
                return Err(CliError::Validation("give either gaps or arcs, not both".into()));
            }
            return Ok(Problem::Gaps(RealSlitSet::new(g.iter().map(|p| (p[0], p[1])).collect())?));
        }
        if let Some(a) = &self.arcs {
            let pairs: Vec<(f64, f64)> = a.iter().map(|p| (p[0], p[1])).collect();
            // [0, 2pi] denotes the full circle
            if pairs.len() == 1 && (pairs[0].1 - pairs[0].0 - TAU).abs() < 1e-12 {
                return Ok(Problem::Arcs(CircleArcSet::new(vec![crate::numerics::Arc::full()])?));
            }
            return Ok(Problem::Arcs(CircleArcSet::from_endpoints(&pairs)?));
        }
        if let Some(r) = &self.random {
            if self.verblunsky.is_some() || self.poles.is_some() || self.overrides.is_some() {
                return Err(CliError::Validation("random cannot be combined with explicit data".into()));
            }
            if r.n == 0 || !(r.a_max > 0.0 && r.a_max < 1.0) {
                return Err(CliError::Validation("random needs n >= 1 and 0 < a_max < 1".into()));
            }
            let (seq, z) = random::instance(&mut random::rng(random::base_seed(0)), r.n, r.a_max);
            return Ok(Problem::Operator { seq, z });
        }
        let vals: Vec<C64> = self
            .verblunsky
            .as_ref()
            .ok_or_else(|| CliError::Validation("missing verblunsky".into()))?
            .iter()
            .map(|&p| c(p))
            .collect();
        if vals.is_empty() || !vals.len().is_multiple_of(2) {
            return Err(CliError::Validation(format!("verblunsky must hold 2n values, got {}", vals.len())));
        }
        let n = vals.len() / 2;
        let z = match &self.poles {
            Some(p) => PoleVector::from_values(&p.iter().map(|&q| c(q)).collect::<Vec<_>>())?,
            None => PoleVector::zeros(n),
        };
        if z.n() != n {
            return Err(CliError::Validation(format!("{} poles for a block of {} coefficients", z.n(), vals.len())));
        }
        let mut seq = VerblunskySequence::from_values(&vals, self.phase.unwrap_or(0.0))?;
        for o in self.overrides.iter().flatten() {
            if o[0].fract() != 0.0 {
                return Err(CliError::Validation(format!("override index {} is not an integer", o[0])));
            }
            seq = seq.with_override(o[0] as i64, DiskPoint::new(C64::new(o[1], o[2]))?);
        }
        Ok(Problem::Operator { seq, z })
    }
}

fn operator(p: Problem) -> Result<(VerblunskySequence, PoleVector), CliError> {
    match p {
        Problem::Operator { seq, z } => Ok((seq, z)),
        _ => Err(CliError::Validation("this command needs operator data".into())),
    }
}

/// serde_json formatter writing every float with 17 significant digits.
struct FixedFloat;

impl serde_json::ser::Formatter for FixedFloat {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, v: f64) -> std::io::Result<()> {
        if v.is_finite() {
            write!(w, "{v:.16e}")
        } else {
            w.write_all(b"null")
        }
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, v: f32) -> std::io::Result<()> {
        self.write_f64(w, v as f64)
    }
}

/// Canonical JSON text of a report.
pub fn to_json<T: Serialize>(v: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, FixedFloat);
    v.serialize(&mut ser).expect("serializable report");
    buf.push(b'\n');
    String::from_utf8(buf).expect("utf-8 JSON")
}

/// Every report starts with the schema tag and the command name.
#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    schema: &'static str,
    command: &'a str,
    #[serde(flatten)]
    body: T,
}

pub struct Output {
    pub json: String,
    pub csv: Option<String>,
    /// False when a check ran to completion and failed.
    pub pass: bool,
}

fn output<T: Serialize>(command: &str, body: T, pass: bool) -> Output {
    Output { json: to_json(&Envelope { schema: SCHEMA, command, body }), csv: None, pass }
}

pub fn csv_text(header: &[&str], rows: impl Iterator<Item = Vec<f64>>) -> String {
    let mut s = header.join(",");
    s.push('\n');
    for r in rows {
        let cells: Vec<String> = r.iter().map(|v| format!("{v:.16e}")).collect();
        s.push_str(&cells.join(","));
        s.push('\n');
    }
    s
}

#[derive(Serialize)]
struct BandsBody {
    tolerance: f64,
    grid: usize,
    bands: Vec<[f64; 2]>,
    gap_edges: Vec<[f64; 2]>,
    critical_points: Vec<[f64; 2]>,
    g: Option<usize>,
}

pub fn cmd_bands(p: Problem, a: &CommonArgs) -> Result<Output, CliError> {
    let (seq, z) = operator(p)?;
    let ev = MonodromyEvaluator::new(&seq, &z)?;
    let bd = bands_from_discriminant(&ev, a.grid)?;
    let body = BandsBody {
        tolerance: a.tol.unwrap_or(crate::spectral::CLOSED_GAP_TOL),
        grid: a.grid,
        bands: bd.bands.iter().map(|b| if b.is_full() { [0.0, TAU] } else { [b.start, b.end()] }).collect(),
        gap_edges: bd.open_gaps().map(|g| [g.lower, g.upper]).collect(),
        critical_points: bd.critical_points().iter().map(|c| [c.t, c.value]).collect(),
        g: bd.genus(),
    };
    Ok(output("bands", body, true))
}

fn parse_range(s: &str) -> Result<std::ops::Range<i64>, CliError> {
    let bad = || CliError::Validation(format!("range must be LO:HI, got {s:?}"));
    let (lo, hi) = s.split_once(':').ok_or_else(bad)?;
    let lo: i64 = lo.trim().parse().map_err(|_| bad())?;
    let hi: i64 = hi.trim().parse().map_err(|_| bad())?;
    if hi <= lo {
        return Err(bad());
    }
    Ok(lo..hi)
}

#[derive(Serialize)]
struct MagicBody {
    range: [i64; 2],
    #[serde(flatten)]
    report: MagicReport,
}

pub fn cmd_magic(p: Problem, a: &MagicArgs) -> Result<Output, CliError> {
    let (seq, z) = operator(p)?;
    let range = match &a.range {
        Some(r) => parse_range(r)?,
        None => 0..8 * z.n() as i64,
    };
    let report = magic_check(&seq, &z, range.clone(), a.common.tol.unwrap_or(MAGIC_TOL))?;
    let pass = report.pass;
    Ok(output("magic", MagicBody { range: [range.start, range.end], report }, pass))
}

#[derive(Serialize)]
struct DivisorEntry {
    gap: [f64; 2],
    x: f64,
    epsilon: i8,
    edge: Option<crate::spectral::GapEdge>,
}

#[derive(Serialize)]
struct DivisorBody {
    tolerance: f64,
    points: Vec<DivisorEntry>,
}

pub fn cmd_divisor(p: Problem, a: &CommonArgs) -> Result<Output, CliError> {
    let (seq, z) = operator(p)?;
    let ev = MonodromyEvaluator::new(&seq, &z)?;
    let bd = bands_from_discriminant(&ev, a.grid)?;
    let div = divisor_extract(&ev, &bd)?;
    let entry = |d: &DivisorPoint| DivisorEntry {
        gap: [bd.gaps[d.gap].lower, bd.gaps[d.gap].upper],
        x: d.x,
        epsilon: d.epsilon,
        edge: d.edge,
    };
    let body = DivisorBody { tolerance: EPSILON_THRESHOLD, points: div.points.iter().map(entry).collect() };
    Ok(output("divisor", body, true))
}

#[derive(Serialize)]
struct MeasureBody {
    tolerance: f64,
    grid: usize,
    ac_mass: f64,
    point_masses: Vec<[f64; 2]>,
    total_mass: f64,
    csv_columns: [&'static str; 2],
}

/// CSV columns: t (radians, offset grid 2pi (m + 1/2)/N) and nu_ac, the
/// density with respect to dt/(2pi), zero off the bands.
pub fn cmd_measure(p: Problem, a: &MeasureArgs) -> Result<Output, CliError> {
    let (seq, z) = operator(p)?;
    let ev = MonodromyEvaluator::new(&seq, &z)?;
    let sm = SpectralMeasure::from_evaluator(&ev, a.common.grid.max(2 * ev.period()))?;
    let total = sm.total_mass()?;
    let mut rows = Vec::with_capacity(a.common.grid);
    for t in circle_grid(a.common.grid) {
        let d = if sm.bands.iter().any(|b| b.contains(t)) { sm.density(t).unwrap_or(0.0) } else { 0.0 };
        rows.push(vec![t, d]);
    }
    let tol = a.common.tol.unwrap_or(1e-8);
    let body = MeasureBody {
        tolerance: tol,
        grid: a.common.grid,
        ac_mass: total - sm.point_mass_total(),
        point_masses: sm.masses.iter().map(|&(t, w)| [t, w]).collect(),
        total_mass: total,
        csv_columns: ["t", "nu_ac"],
    };
    let mut out = output("measure", body, (total - 1.0).abs() <= tol);
    out.csv = Some(csv_text(&["t", "nu_ac"], rows.into_iter()));
    Ok(out)
}

#[derive(Serialize)]
struct AhlforsRealBody {
    tolerance: f64,
    z0: C64,
    g: usize,
    zeros: Vec<C64>,
    critical_points: Vec<RealCriticalPoint>,
    max_boundary_defect: f64,
    csv_columns: [&'static str; 3],
}

#[derive(Serialize)]
struct AhlforsArcBody {
    tolerance: f64,
    g: Option<usize>,
    arcs: Vec<[f64; 2]>,
    real_gaps: Vec<(f64, f64)>,
    poles: Vec<C64>,
    csv_columns: [&'static str; 3],
}

fn parse_point(s: &str) -> Result<C64, CliError> {
    let bad = || CliError::Validation(format!("point must be RE,IM, got {s:?}"));
    let (re, im) = s.split_once(',').ok_or_else(bad)?;
    Ok(C64::new(re.trim().parse().map_err(|_| bad())?, im.trim().parse().map_err(|_| bad())?))
}

/// Gap sets: CSV of x, Re Delta, |w_{z0}| on a grid covering the gaps and
/// the negative axis. Arc sets: CSV of t, Re Delta_E, Im Delta_E on the
/// circle.
pub fn cmd_ahlfors(p: Problem, a: &AhlforsArgs) -> Result<Output, CliError> {
    let tol = a.common.tol.unwrap_or(1e-10);
    let n = a.common.grid.max(2);
    match p {
        Problem::Gaps(e) => {
            let z0 = a.z0.as_deref().map(parse_point).transpose()?.unwrap_or(I);
            let zeros = if z0.im > 0.0 { ahlfors::ahlfors_zeros(&e, z0)? } else { Vec::new() };
            let cps = ahlfors::critical_points(&e, z0)?;
            let right = e.gaps().last().map_or(4.0, |g| 2.0 * g.1);
            let mut rows = Vec::with_capacity(n);
            let mut defect: f64 = 0.0;
            for m in 0..n {
                let x = -right + 2.0 * right * (m as f64 + 0.5) / n as f64;
                let d = ahlfors::delta_real_eval(&e, z0, C64::from(x))?;
                let w = ahlfors::ahlfors_eval(&e, z0, C64::from(x))?.norm();
                if e.contains(x) {
                    defect = defect.max((w - 1.0).abs());
                }
                rows.push(vec![x, d.re, w]);
            }
            let body = AhlforsRealBody {
                tolerance: tol,
                z0,
                g: e.genus(),
                zeros,
                critical_points: cps,
                max_boundary_defect: defect,
                csv_columns: ["x", "delta", "abs_w"],
            };
            let mut out = output("ahlfors", body, defect <= tol);
            out.csv = Some(csv_text(&["x", "delta", "abs_w"], rows.into_iter()));
            Ok(out)
        }
        Problem::Arcs(set) => {
            let arcs: Vec<[f64; 2]> = set.arcs().iter().map(|r| [r.start, r.start + r.length]).collect();
            let (poles, real_gaps) = if set.is_full() {
                (vec![C64::from(0.0)], Vec::new())
            } else {
                let dom = ArcDomain::new(set.clone())?;
                (dom.poles()?, dom.real.gaps().to_vec())
            };
            let mut rows = Vec::with_capacity(n);
            for t in circle_grid(n) {
                let d = ahlfors::generalized_discriminant(&set, C64::from_polar(1.0, t))?;
                rows.push(vec![t, d.re, d.im]);
            }
            let body = AhlforsArcBody {
                tolerance: tol,
                g: set.genus(),
                arcs,
                real_gaps,
                poles,
                csv_columns: ["t", "re_delta", "im_delta"],
            };
            let mut out = output("ahlfors", body, true);
            out.csv = Some(csv_text(&["t", "re_delta", "im_delta"], rows.into_iter()));
            Ok(out)
        }
        Problem::Operator { .. } => Err(CliError::Validation("ahlfors needs gaps or arcs".into())),
    }
}

#[derive(Serialize)]
struct StrippingBody {
    tolerance: f64,
    depth: usize,
    points: usize,
    max_residual: Vec<f64>,
    f0: C64,
    min_re_f: f64,
    pass: bool,
}

pub fn cmd_stripping(p: Problem, a: &StrippingArgs) -> Result<Output, CliError> {
    let (seq, z) = operator(p)?;
    let ev = MonodromyEvaluator::new(&seq, &z)?;
    let rep = stripping_check(&ev, 10, a.depth.max(1))?;
    let tol = a.common.tol.unwrap_or(1e-10);
    let pass = rep.max_residual.iter().all(|r| *r <= tol) && rep.min_re_f > 0.0 && rep.f0 == C64::from(1.0);
    let body = StrippingBody {
        tolerance: tol,
        depth: a.depth.max(1),
        points: rep.points,
        max_residual: rep.max_residual,
        f0: rep.f0,
        min_re_f: rep.min_re_f,
        pass,
    };
    Ok(output("stripping", body, pass))
}

#[derive(Serialize)]
struct RoundtripBody {
    tolerance: f64,
    count: usize,
    expected: Vec<C64>,
    recovered: Vec<C64>,
    max_error: f64,
    pass: bool,
}

pub fn cmd_roundtrip(p: Problem, a: &CommonArgs) -> Result<Output, CliError> {
    let (seq, z) = operator(p)?;
    let ev = MonodromyEvaluator::new(&seq, &z)?;
    let sm = SpectralMeasure::from_evaluator(&ev, a.grid.max(2 * ev.period()))?;
    let qm = QuadratureMeasure::from_spectral(&sm)?;
    let count = 2 * ev.period();
    let recovered = recover_coefficients(&qm, &z.orf_poles(), count)?;
    let expected: Vec<C64> = (0..count as i64).map(|k| seq.a(k)).collect();
    let max_error = recovered.iter().zip(&expected).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
    let tol = a.tol.unwrap_or(1e-7);
    let pass = max_error <= tol;
    Ok(output("roundtrip", RoundtripBody { tolerance: tol, count, expected, recovered, max_error, pass }, pass))
}

/// Runs one command and returns its report.
pub fn execute(cmd: &Command) -> Result<Output, CliError> {
    let common = match cmd {
        Command::Bands(a) | Command::Divisor(a) | Command::Roundtrip(a) => a,
        Command::Magic(a) => &a.common,
        Command::Measure(a) => &a.common,
        Command::Ahlfors(a) => &a.common,
        Command::Stripping(a) => &a.common,
    };
    if common.grid == 0 {
        return Err(CliError::Validation("grid must be positive".into()));
    }
    if let Some(t) = common.tol {
        if !(t > 0.0 && t.is_finite()) {
            return Err(CliError::Validation("tol must be positive".into()));
        }
    }
    let problem = ProblemSpec::load(&common.input)?.resolve()?;
    match cmd {
        Command::Bands(a) => cmd_bands(problem, a),
        Command::Magic(a) => cmd_magic(problem, a),
        Command::Divisor(a) => cmd_divisor(problem, a),
        Command::Measure(a) => cmd_measure(problem, a),
        Command::Ahlfors(a) => cmd_ahlfors(problem, a),
        Command::Stripping(a) => cmd_stripping(problem, a),
        Command::Roundtrip(a) => cmd_roundtrip(problem, a),
    }
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::Failed(format!("cannot write {}: {e}", path.display())))
}

/// Full CLI behaviour; returns the process exit code.
pub fn run(cli: &Cli) -> i32 {
    let (out_path, csv_path) = match &cli.command {
        Command::Bands(a) | Command::Divisor(a) | Command::Roundtrip(a) => (a.out.clone(), None),
        Command::Magic(a) => (a.common.out.clone(), None),
        Command::Measure(a) => (a.common.out.clone(), a.csv.clone()),
        Command::Ahlfors(a) => (a.common.out.clone(), a.csv.clone()),
        Command::Stripping(a) => (a.common.out.clone(), None),
    };
    let result = execute(&cli.command).and_then(|o| {
        match &out_path {
            Some(p) => write_file(p, &o.json)?,
            None => print!("{}", o.json),
        }
        if let (Some(p), Some(csv)) = (&csv_path, &o.csv) {
            write_file(p, csv)?;
        }
        Ok(o.pass)
    });
    match result {
        Ok(true) => 0,
        Ok(false) => {
            eprintln!("mcmv: check failed (see report)");
            1
        }
        Err(e) => {
            eprintln!("mcmv: {e}");
            e.exit_code()
        }
    }
}
