//! Command-line experiment runner.
//!
//! Every subcommand takes its parameters from flags, optionally backed by a
//! TOML file (`--config`): top-level keys hold the common options and a table
//! named after the subcommand holds its parameters. Flags win over the file.
//!
//! CSV outputs start with `# projdio <version> <config>` where `<config>` is
//! the resolved configuration as JSON. The thread count and output path are
//! left out of it so that runs differing only in those produce identical
//! bytes.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::approx::{
    approx_constant_record, hurwitz_special_points, khintchine_survey, named_targets, ArithmeticFunction,
    HeightNorm,
};
use crate::badset::{
    build_construction, certify_leaves, cf_bad_crosscheck, default_root, default_theta, dimension_lower_stat,
    liouville_like, ConstructionTree, KtvParams,
};
use crate::approx::golden_alpha;
use crate::error::{Error, Result};
use crate::geometry::{normalize_point, slope_embed, ProjHyperplane, ProjPoint};
use crate::measure::{decay_ratio, fit_decay_exponent, verify_power_law, MeasureKind, MeasureModel};
use crate::ratpoints::enumerate_band;
use crate::sampling::task_rng;
use crate::simplex::verify_simplex_lemma_with;
use crate::tolerance;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Parser, Debug)]
#[command(name = "projdio", version, about = "Diophantine approximation experiments on real projective space")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Common {
    /// Master seed for every random stream.
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Worker threads (default: available parallelism).
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    /// Output file (default: stdout).
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    /// TOML file with default parameters.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

macro_rules! params {
    ($(#[$meta:meta])* $name:ident { $($(#[$fmeta:meta])* $field:ident : $ty:ty),* $(,)? }) => {
        $(#[$meta])*
        #[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
        #[serde(deny_unknown_fields)]
        pub struct $name {
            $(
                $(#[$fmeta])*
                #[arg(long)]
                #[serde(skip_serializing_if = "Option::is_none")]
                pub $field: Option<$ty>,
            )*
        }
    };
}

params!(EnumerateArgs {
    /// Projective dimension N.
    n: usize,
    /// Largest height.
    bound: u64,
    /// Smallest height.
    lo: u64,
});

params!(ApproxArgs {
    /// Target as comma-separated homogeneous coordinates.
    point: String,
    /// Target as the slope s of [1, s].
    slope: f64,
    /// Named target: golden, sqrt2_minus_1, e_minus_2, pi_minus_3.
    target: String,
    bound: u64,
});

params!(HurwitzArgs { bound: u64 });

params!(KhintchineArgs {
    /// canonical or cantor_slope.
    measure: String,
    n: usize,
    /// ψ(m) = c m^{-s} log(m+1)^{-p}.
    psi_c: f64,
    psi_s: f64,
    psi_p: f64,
    bound: u64,
    samples: usize,
    /// Heights above this count as tail solutions.
    tail: u64,
});

params!(PowerLawArgs {
    measure: String,
    n: usize,
    /// Comma-separated radii (default: 20 log-spaced values in [1e-3, sin 1]).
    radii: String,
    /// Number of random centers.
    centers: usize,
});

params!(DecayArgs {
    measure: String,
    n: usize,
    r: f64,
    /// Comma-separated neighborhood widths.
    eps: String,
    samples: u64,
});

params!(SimplexArgs {
    n: usize,
    hmax: u64,
    /// Write every non-coplanar tuple, not only violations.
    all_rows: bool,
});

params!(BuildArgs {
    measure: String,
    n: usize,
    t: f64,
    depth: u32,
    /// Defaults to c_N / (2 b_N t^{N+1}).
    theta: f64,
});

params!(VerifyArgs {
    /// Construction tree written by badset-build.
    tree: PathBuf,
});

params!(CfArgs {
    /// Slope in (0, 1); without it a fixed panel of slopes is checked.
    slope: f64,
    /// Number of partial quotients inspected.
    k: usize,
    bound: u64,
});

#[derive(Subcommand, Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Command {
    /// List rational points by height.
    Enumerate(EnumerateArgs),
    /// Best approximations and approximation constants of one point.
    Approx(ApproxArgs),
    /// Approximation constants of the four golden lines.
    Hurwitz(HurwitzArgs),
    /// Count solutions of δ(x, q) < ψ(H(q)) for random points.
    Khintchine(KhintchineArgs),
    /// Ball-measure ratios m(B(x, r)) / r^δ.
    #[command(name = "measure-powerlaw")]
    MeasurePowerlaw(PowerLawArgs),
    /// Hyperplane-neighborhood decay ratios.
    #[command(name = "measure-decay")]
    MeasureDecay(DecayArgs),
    /// Exhaustive check of the simplex volume bound.
    #[command(name = "simplex-verify")]
    SimplexVerify(SimplexArgs),
    /// Build a nested-ball construction and write it as JSON.
    #[command(name = "badset-build")]
    BadsetBuild(BuildArgs),
    /// Certify the leaves of a construction tree.
    #[command(name = "badset-verify")]
    BadsetVerify(VerifyArgs),
    /// Continued-fraction cross-check on slopes.
    #[command(name = "cf-crosscheck")]
    CfCrosscheck(CfArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Enumerate(_) => "enumerate",
            Command::Approx(_) => "approx",
            Command::Hurwitz(_) => "hurwitz",
            Command::Khintchine(_) => "khintchine",
            Command::MeasurePowerlaw(_) => "measure-powerlaw",
            Command::MeasureDecay(_) => "measure-decay",
            Command::SimplexVerify(_) => "simplex-verify",
            Command::BadsetBuild(_) => "badset-build",
            Command::BadsetVerify(_) => "badset-verify",
            Command::CfCrosscheck(_) => "cf-crosscheck",
        }
    }
}

/// A fully merged run description.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub out: Option<PathBuf>,
    pub command: Command,
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::ConfigInvalid(msg.into())
}

fn merge_into<T: Serialize + DeserializeOwned>(flags: &T, file: Option<&Value>) -> Result<T> {
    let mut merged = match file {
        Some(Value::Object(m)) => m.clone(),
        Some(_) => return Err(invalid("config section must be a table")),
        None => Map::new(),
    };
    if let Value::Object(f) = serde_json::to_value(flags)? {
        merged.extend(f);
    }
    serde_json::from_value(Value::Object(merged)).map_err(|e| invalid(e.to_string()))
}

impl ExperimentConfig {
    /// Merges the parsed flags over the optional config file.
    pub fn from_cli(cli: Cli) -> Result<Self> {
        let file: Option<Value> = match &cli.common.config {
            Some(path) => {
                let text = fs::read_to_string(path)?;
                let table: toml::Table = toml::from_str(&text).map_err(|e| invalid(e.to_string()))?;
                Some(serde_json::to_value(table)?)
            }
            None => None,
        };
        let mut common_file = file.clone().unwrap_or(Value::Object(Map::new()));
        let name = cli.command.name();
        let section = match &mut common_file {
            Value::Object(m) => m.remove(name),
            _ => None,
        };
        if let Value::Object(m) = &common_file {
            if let Some(k) = m.keys().find(|k| !matches!(k.as_str(), "seed" | "threads" | "out")) {
                return Err(invalid(format!("unknown config key `{k}`")));
            }
        }
        let common: Common = merge_into(&cli.common, Some(&common_file))?;
        let section = section.as_ref();
        let command = match &cli.command {
            Command::Enumerate(a) => Command::Enumerate(merge_into(a, section)?),
            Command::Approx(a) => Command::Approx(merge_into(a, section)?),
            Command::Hurwitz(a) => Command::Hurwitz(merge_into(a, section)?),
            Command::Khintchine(a) => Command::Khintchine(merge_into(a, section)?),
            Command::MeasurePowerlaw(a) => Command::MeasurePowerlaw(merge_into(a, section)?),
            Command::MeasureDecay(a) => Command::MeasureDecay(merge_into(a, section)?),
            Command::SimplexVerify(a) => Command::SimplexVerify(merge_into(a, section)?),
            Command::BadsetBuild(a) => Command::BadsetBuild(merge_into(a, section)?),
            Command::BadsetVerify(a) => Command::BadsetVerify(merge_into(a, section)?),
            Command::CfCrosscheck(a) => Command::CfCrosscheck(merge_into(a, section)?),
        };
        Ok(Self {
            seed: common.seed,
            threads: common.threads,
            out: common.out,
            command,
        })
    }

    fn require_seed(&self) -> Result<u64> {
        self.seed
            .ok_or_else(|| invalid(format!("`{}` is stochastic and needs --seed", self.command.name())))
    }
}

/// Writes header-prefixed CSV either to a file or to stdout.
struct CsvOut {
    writer: csv::Writer<Box<dyn Write>>,
}

impl CsvOut {
    fn open(out: Option<&Path>, header: &str, columns: &[String]) -> Result<Self> {
        let mut sink: Box<dyn Write> = match out {
            Some(p) => Box::new(io::BufWriter::new(fs::File::create(p)?)),
            None => Box::new(io::stdout()),
        };
        writeln!(sink, "# projdio {VERSION} {header}")?;
        let mut writer = csv::Writer::from_writer(sink);
        writer.write_record(columns)?;
        Ok(Self { writer })
    }

    fn row(&mut self, fields: Vec<String>) -> Result<()> {
        self.writer.write_record(&fields)?;
        Ok(())
    }

    fn finish(mut self) -> Result<()> {
        self.writer.flush()?;
        Ok(())
    }
}

fn cols(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

fn coords_string<T: ToString>(v: &[T]) -> String {
    v.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(" ")
}

fn parse_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|e| invalid(format!("bad number `{x}`: {e}"))))
        .collect()
}

fn measure_of(kind: &str, n: usize) -> Result<MeasureModel> {
    let kind: MeasureKind =
        serde_json::from_value(Value::String(kind.to_string())).map_err(|_| invalid(format!("unknown measure `{kind}`")))?;
    let m = MeasureModel::from_kind(kind, n)?;
    if m.dim != n {
        return Err(invalid(format!("the {kind:?} measure lives on P^{}", m.dim)));
    }
    Ok(m)
}

/// Heights 10, 100, ... below `bound`, then `bound` itself.
fn checkpoints(bound: u64) -> Vec<u64> {
    let mut v: Vec<u64> = std::iter::successors(Some(10u64), |&b| b.checked_mul(10))
        .take_while(|&b| b < bound)
        .collect();
    v.push(bound);
    v
}

/// Header JSON: the command with its resolved parameters plus the seed.
fn header<T: Serialize>(cfg: &ExperimentConfig, params: &T) -> Result<String> {
    let mut m = Map::new();
    m.insert("command".into(), Value::String(cfg.command.name().into()));
    if let Some(s) = cfg.seed {
        m.insert("seed".into(), Value::from(s));
    }
    if let Value::Object(p) = serde_json::to_value(params)? {
        m.extend(p);
    }
    Ok(serde_json::to_string(&Value::Object(m))?)
}

/// Runs one experiment on a dedicated thread pool.
pub fn run(cfg: &ExperimentConfig) -> Result<()> {
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(t) = cfg.threads {
        if t == 0 {
            return Err(invalid("--threads must be >= 1"));
        }
        pool = pool.num_threads(t);
    }
    let pool = pool.build().map_err(|e| invalid(e.to_string()))?;
    pool.install(|| dispatch(cfg))
}

fn dispatch(cfg: &ExperimentConfig) -> Result<()> {
    let out = cfg.out.as_deref();
    match &cfg.command {
        Command::Enumerate(a) => run_enumerate(cfg, a, out),
        Command::Approx(a) => run_approx(cfg, a, out),
        Command::Hurwitz(a) => run_hurwitz(cfg, a, out),
        Command::Khintchine(a) => run_khintchine(cfg, a, out),
        Command::MeasurePowerlaw(a) => run_powerlaw(cfg, a, out),
        Command::MeasureDecay(a) => run_decay(cfg, a, out),
        Command::SimplexVerify(a) => run_simplex(cfg, a, out),
        Command::BadsetBuild(a) => run_build(cfg, a, out),
        Command::BadsetVerify(a) => run_verify(cfg, a, out),
        Command::CfCrosscheck(a) => run_cf(cfg, a, out),
    }
}

fn run_enumerate(cfg: &ExperimentConfig, a: &EnumerateArgs, out: Option<&Path>) -> Result<()> {
    let mut a = a.clone();
    let n = *a.n.get_or_insert(1);
    let bound = *a.bound.get_or_insert(10);
    let lo = *a.lo.get_or_insert(1);
    let stream = enumerate_band(n, lo, bound.checked_add(1).ok_or(Error::Overflow("bound"))?)?;
    let mut w = CsvOut::open(out, &header(cfg, &a)?, &cols(&["height", "coords"]))?;
    let mut count = 0u64;
    for q in stream {
        w.row(vec![q.height().to_string(), coords_string(q.coords())])?;
        count += 1;
    }
    w.finish()?;
    eprintln!("{count} points");
    Ok(())
}

fn target_point(a: &ApproxArgs) -> Result<ProjPoint> {
    match (&a.point, a.slope, &a.target) {
        (Some(p), None, None) => normalize_point(&parse_list(p)?),
        (None, Some(s), None) => Ok(slope_embed(s)),
        (None, None, Some(t)) => named_targets()
            .into_iter()
            .find(|(name, _)| name == t)
            .map(|(_, x)| x)
            .ok_or_else(|| invalid(format!("unknown target `{t}`"))),
        (None, None, None) => Err(invalid("give one of --point, --slope, --target")),
        _ => Err(invalid("--point, --slope and --target are exclusive")),
    }
}

fn run_approx(cfg: &ExperimentConfig, a: &ApproxArgs, out: Option<&Path>) -> Result<()> {
    let mut a = a.clone();
    let x = target_point(&a)?;
    let bound = *a.bound.get_or_insert(1000);
    let mut w = CsvOut::open(
        out,
        &header(cfg, &a)?,
        &cols(&["bound", "best", "height", "dist", "normalized"]),
    )?;
    for b in checkpoints(bound) {
        let rec = approx_constant_record(&x, b, HeightNorm::Max)?;
        w.row(vec![
            b.to_string(),
            coords_string(rec.best.coords()),
            rec.height.to_string(),
            rec.dist.to_string(),
            rec.normalized.to_string(),
        ])?;
    }
    w.finish()
}

fn run_hurwitz(cfg: &ExperimentConfig, a: &HurwitzArgs, out: Option<&Path>) -> Result<()> {
    let mut a = a.clone();
    let bound = *a.bound.get_or_insert(10_000);
    let mut w = CsvOut::open(
        out,
        &header(cfg, &a)?,
        &cols(&["point", "bound", "best", "height", "dist", "normalized_euclidean", "normalized"]),
    )?;
    for (i, x) in hurwitz_special_points().iter().enumerate() {
        for b in checkpoints(bound) {
            let rec = approx_constant_record(x, b, HeightNorm::Max)?;
            let euc = approx_constant_record(x, b, HeightNorm::Euclidean)?;
            w.row(vec![
                i.to_string(),
                b.to_string(),
                coords_string(rec.best.coords()),
                rec.height.to_string(),
                rec.dist.to_string(),
                euc.normalized.to_string(),
                rec.normalized.to_string(),
            ])?;
        }
    }
    w.finish()
}

fn run_khintchine(cfg: &ExperimentConfig, a: &KhintchineArgs, out: Option<&Path>) -> Result<()> {
    let seed = cfg.require_seed()?;
    let mut a = a.clone();
    let kind = a.measure.get_or_insert_with(|| "canonical".into()).clone();
    let n = *a.n.get_or_insert(1);
    let psi = ArithmeticFunction::new(
        *a.psi_c.get_or_insert(1.0),
        *a.psi_s.get_or_insert(2.0),
        *a.psi_p.get_or_insert(0.0),
    )?;
    let bound = *a.bound.get_or_insert(10_000);
    let samples = *a.samples.get_or_insert(200);
    let tail = *a.tail.get_or_insert(100);
    let model = measure_of(&kind, n)?;
    let survey = khintchine_survey(&model, seed, &psi, bound, samples)?;
    let marks = checkpoints(bound);
    let mut names = cols(&["sample", "point"]);
    names.extend(marks.iter().map(|b| format!("count_le_{b}")));
    names.extend(cols(&["count_above_tail", "max_height"]));
    let mut w = CsvOut::open(out, &header(cfg, &a)?, &names)?;
    for o in &survey.outcomes {
        let mut row = vec![o.sample_id.to_string(), coords_string(o.point.rep())];
        row.extend(marks.iter().map(|&b| o.count_up_to(b).to_string()));
        row.push(o.count_above(tail).to_string());
        row.push(o.max_height().to_string());
        w.row(row)?;
    }
    w.finish()?;
    eprintln!(
        "mean {} median {} max {} tail-fraction(>{tail}) {}",
        survey.mean,
        survey.median,
        survey.max,
        survey.tail_fraction_above(tail)
    );
    Ok(())
}

fn default_radii() -> Vec<f64> {
    let (lo, hi) = (1e-3f64.ln(), tolerance::MAX_BALL_RADIUS.ln());
    (0..20).map(|i| (lo + (hi - lo) * i as f64 / 19.0).exp().min(tolerance::MAX_BALL_RADIUS)).collect()
}

fn run_powerlaw(cfg: &ExperimentConfig, a: &PowerLawArgs, out: Option<&Path>) -> Result<()> {
    let seed = cfg.require_seed()?;
    let mut a = a.clone();
    let kind = a.measure.get_or_insert_with(|| "canonical".into()).clone();
    let n = *a.n.get_or_insert(1);
    let radii = match &a.radii {
        Some(r) => parse_list(r)?,
        None => default_radii(),
    };
    let count = *a.centers.get_or_insert(5);
    let model = measure_of(&kind, n)?;
    let centers: Vec<ProjPoint> = (0..count)
        .map(|i| model.sample(&mut task_rng(seed, i as u64)))
        .collect();
    let report = verify_power_law(&model, &radii, &centers)?;
    let (pa, pb) = report.displayed_window.map_or((String::new(), String::new()), |(x, y)| (x.to_string(), y.to_string()));
    let mut w = CsvOut::open(
        out,
        &header(cfg, &a)?,
        &cols(&["r", "center", "ratio", "a", "b", "displayed_a", "displayed_b"]),
    )?;
    for r in &report.rows {
        w.row(vec![
            r.r.to_string(),
            r.center.to_string(),
            r.ratio.to_string(),
            report.reference_window.0.to_string(),
            report.reference_window.1.to_string(),
            pa.clone(),
            pb.clone(),
        ])?;
    }
    w.finish()?;
    eprintln!(
        "empirical window [{}, {}]; reference flagged: {}; displayed window flagged: {}",
        report.a_emp, report.b_emp, report.flagged, report.displayed_window_flagged
    );
    Ok(())
}

fn run_decay(cfg: &ExperimentConfig, a: &DecayArgs, out: Option<&Path>) -> Result<()> {
    let seed = cfg.require_seed()?;
    let mut a = a.clone();
    let kind = a.measure.get_or_insert_with(|| "canonical".into()).clone();
    let n = *a.n.get_or_insert(2);
    let r = *a.r.get_or_insert(0.5);
    let eps = parse_list(a.eps.get_or_insert_with(|| "0.4,0.2,0.1,0.05,0.025".into()))?;
    let samples = *a.samples.get_or_insert(200_000);
    let model = measure_of(&kind, n)?;
    let x = default_root(&model);
    // the hyperplane through x orthogonal to a fixed tangent direction
    let c = x.rep();
    let mut normal = vec![0.0; c.len()];
    normal[c.len() - 1] = 1.0;
    let d: f64 = normal.iter().zip(c).map(|(p, q)| p * q).sum();
    for (p, q) in normal.iter_mut().zip(c) {
        *p -= d * q;
    }
    let plane = ProjHyperplane::new(&normal)?;
    let mut w = CsvOut::open(out, &header(cfg, &a)?, &cols(&["r", "eps", "ratio", "bound"]))?;
    let mut fit = Vec::new();
    for (i, &e) in eps.iter().enumerate() {
        let ratio = decay_ratio(&model, &plane, &x, r, e, samples, seed.wrapping_add(i as u64))?;
        let bound = (e / r).powf(model.decay_exponent);
        fit.push((e / r, ratio));
        w.row(vec![r.to_string(), e.to_string(), ratio.to_string(), bound.to_string()])?;
    }
    w.finish()?;
    match fit_decay_exponent(&fit) {
        Some(eta) => eprintln!("fitted exponent {eta}"),
        None => eprintln!("exponent fit unavailable"),
    }
    Ok(())
}

fn run_simplex(cfg: &ExperimentConfig, a: &SimplexArgs, out: Option<&Path>) -> Result<()> {
    let mut a = a.clone();
    let n = *a.n.get_or_insert(1);
    let hmax = *a.hmax.get_or_insert(8);
    let all = *a.all_rows.get_or_insert(false);
    let report = verify_simplex_lemma_with(n, hmax, all)?;
    let mut w = CsvOut::open(
        out,
        &header(cfg, &a)?,
        &cols(&["points", "heights", "volume", "bound", "margin"]),
    )?;
    let rows = report.rows.as_ref().unwrap_or(&report.violations);
    for row in rows {
        let pts: Vec<String> = row.points.iter().map(|p| coords_string(p)).collect();
        w.row(vec![
            pts.join(" | "),
            coords_string(&row.heights),
            row.volume.to_string(),
            row.bound.to_string(),
            row.margin.to_string(),
        ])?;
    }
    w.finish()?;
    eprintln!(
        "{} tuples, {} non-coplanar, {} exact fallbacks, min margin {}, {} violations",
        report.tuples_examined,
        report.non_coplanar,
        report.fallback_count,
        report.min_margin,
        report.violations.len()
    );
    if !report.passed() {
        return Err(Error::InvariantViolation(format!(
            "{} violations, {} chain failures, {} coplanarity mismatches",
            report.violations.len(),
            report.chain_failures,
            report.coplanarity_mismatches
        )));
    }
    Ok(())
}

/// JSON file written by `badset-build`.
#[derive(Serialize, Deserialize)]
pub struct TreeFile {
    pub projdio: String,
    pub config: Value,
    pub tree: ConstructionTree,
}

fn run_build(cfg: &ExperimentConfig, a: &BuildArgs, out: Option<&Path>) -> Result<()> {
    let mut a = a.clone();
    let kind = a.measure.get_or_insert_with(|| "canonical".into()).clone();
    let n = *a.n.get_or_insert(1);
    let t = *a.t.get_or_insert(10.0);
    let depth = *a.depth.get_or_insert(3);
    let theta = *a.theta.get_or_insert(default_theta(n, t));
    let model = measure_of(&kind, n)?;
    let root = default_root(&model);
    let params = KtvParams::with(n, t, theta, depth, model, root)?;
    let tree = build_construction(&params)?;
    tree.check_invariants()?;
    let config: Value = serde_json::from_str(&header(cfg, &a)?)?;
    let file = TreeFile {
        projdio: VERSION.into(),
        config,
        tree,
    };
    let text = serde_json::to_string_pretty(&file)?;
    match out {
        Some(p) => fs::write(p, text + "\n")?,
        None => println!("{text}"),
    }
    let tree = &file.tree;
    for l in &tree.levels {
        eprintln!(
            "round {}: {} balls, pruned fraction {:.4}, achieved kappa {:.3}",
            l.round,
            l.balls.len(),
            l.pruned_fraction(),
            l.achieved_kappa()
        );
    }
    if let Ok(d) = dimension_lower_stat(tree) {
        eprintln!("dimension statistic {d}");
    }
    Ok(())
}

fn run_verify(cfg: &ExperimentConfig, a: &VerifyArgs, out: Option<&Path>) -> Result<()> {
    let path = a.tree.as_ref().ok_or_else(|| invalid("--tree is required"))?;
    let file: TreeFile = serde_json::from_str(&fs::read_to_string(path)?)?;
    let tree = file.tree;
    tree.check_invariants()?;
    let certs = certify_leaves(&tree)?;
    let mut w = CsvOut::open(
        out,
        &header(cfg, &serde_json::json!({ "tree": file.config }))?,
        &cols(&["leaf", "center", "c_emp", "h_verified", "witness", "certified"]),
    )?;
    for c in &certs {
        w.row(vec![
            c.index.to_string(),
            coords_string(c.center.rep()),
            c.c_emp.to_string(),
            c.h_verified.to_string(),
            coords_string(c.witness.coords()),
            c.certified.to_string(),
        ])?;
    }
    w.finish()?;
    let min = certs.iter().map(|c| c.c_emp).fold(f64::INFINITY, f64::min);
    eprintln!(
        "{} leaves certified up to height {}; min c_emp {min}, c_bad {}",
        certs.len(),
        tree.params.verified_height(),
        tree.params.c_bad
    );
    if let Some(c) = certs.iter().find(|c| !c.certified || !(c.c_emp > 0.0)) {
        return Err(Error::InvariantViolation(format!(
            "leaf {} has c_emp {} below c_bad {}",
            c.index, c.c_emp, tree.params.c_bad
        )));
    }
    Ok(())
}

fn run_cf(cfg: &ExperimentConfig, a: &CfArgs, out: Option<&Path>) -> Result<()> {
    let mut a = a.clone();
    let k = *a.k.get_or_insert(20);
    let bound = *a.bound.get_or_insert(10_000);
    let panel: Vec<(String, f64)> = match a.slope {
        Some(s) => vec![("slope".into(), s)],
        None => vec![
            ("golden".into(), golden_alpha()),
            ("sqrt2_minus_1".into(), 2f64.sqrt() - 1.0),
            ("liouville_base3".into(), liouville_like(3.0, 4)),
        ],
    };
    let mut w = CsvOut::open(
        out,
        &header(cfg, &a)?,
        &cols(&["name", "slope", "cf_bad", "max_quotient", "c_emp"]),
    )?;
    for (name, s) in panel {
        let c = cf_bad_crosscheck(s, k, bound)?;
        w.row(vec![
            name,
            s.to_string(),
            c.cf_bad.to_string(),
            c.max_quotient.to_string(),
            c.c_emp.to_string(),
        ])?;
    }
    w.finish()
}

/// Exit status for an outcome: 0 success, 2 for a violated invariant, 1 for
/// everything else (bad configuration or input).
pub fn exit_code(res: &Result<()>) -> i32 {
    match res {
        Ok(()) => 0,
        Err(Error::InvariantViolation(_)) => 2,
        Err(_) => 1,
    }
}

/// Parses `args`, runs, reports errors on stderr and returns the exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let res = ExperimentConfig::from_cli(cli).and_then(|cfg| run(&cfg));
    if let Err(e) = &res {
        eprintln!("error: {e}");
    }
    exit_code(&res)
}
