//! Batch front-end: parse a sequence spec, run one analysis pipeline, write a
//! schema-versioned JSON report plus trajectory CSVs.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use hemicirc::ergohollow::{
    ergodicity_report, hollow_certificates, hollow_trajectory, pair_norm_trajectory, CertVerdict, ErgodicVerdict,
    Sample, TrajectoryReport, Verdict,
};
use hemicirc::factorize::{
    at_reduce, mass_sweep, nonisomorphism_witness, tensor_collapse_iso_check, term_blocks, watc_factor,
    ConditionVerdict, MassSweep, WitnessConfig,
};
use hemicirc::powers::{
    blowup, circulant_of, circulant_sequence, delta_identity_holds, character_norm_check, polynomial_term, power_analysis,
    subring_bound_checks, DEFAULT_SEED,
};
use hemicirc::seqspec::{character_pairs, ExponentSchedule, SequenceSpec};
use hemicirc::{Error as CoreError, FiniteAbelianGroup, QPoly};

pub mod verify;

pub const SCHEMA_VERSION: &str = "hemicirc-report/1";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

pub const DEFAULT_HORIZON: usize = 12;
pub const DEFAULT_EPSILON: &str = "1/10";
pub const DEFAULT_BLOCKS: usize = 4;
pub const DEFAULT_BLOCK_CAP: usize = 64;
pub const DEFAULT_FAMILY_SIZE: usize = 4;
pub const DEFAULT_SAMPLES: usize = 200;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Pipeline {
    Ergodicity,
    Hollow,
    AtReduce,
    Watc,
    Invariant,
    Witness,
    Power,
    TensorCheck,
    Verify,
}

#[derive(Debug, Parser)]
#[command(name = "hemicirc", version, about = "Analysis pipelines for hemicirculant matrix sequences")]
pub struct Cli {
    pub pipeline: Pipeline,
    /// Sequence spec (JSON). Optional for verify only.
    #[arg(long)]
    pub spec: Option<PathBuf>,
    /// Largest d (terms 0..=horizon).
    #[arg(long, default_value_t = DEFAULT_HORIZON)]
    pub horizon: usize,
    /// Tolerance, as a decimal or a fraction a/b.
    #[arg(long, default_value = DEFAULT_EPSILON)]
    pub epsilon: String,
    /// Power n: blow-up for polynomial specs, M_j^n otherwise.
    #[arg(long)]
    pub power: Option<u64>,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Second spec for tensor-check (defaults to --spec).
    #[arg(long)]
    pub spec_n: Option<PathBuf>,
    /// Polynomial family (JSON list) for invariant and witness.
    #[arg(long)]
    pub family: Option<PathBuf>,
    /// Telescoping blocks for at-reduce.
    #[arg(long, default_value_t = DEFAULT_BLOCKS)]
    pub blocks: usize,
    /// Longest block before a telescoping search gives up.
    #[arg(long, default_value_t = DEFAULT_BLOCK_CAP)]
    pub block_cap: usize,
    /// Random samples for the subring audits in verify.
    #[arg(long, default_value_t = DEFAULT_SAMPLES)]
    pub samples: usize,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("guard abort: {0}")]
    Guard(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Core(CoreError),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Guard(_) => 3,
            CliError::Core(CoreError::NotErgodic(_)) => 1,
            _ => 2,
        }
    }
}

fn is_guard(e: &CoreError) -> bool {
    matches!(
        e,
        CoreError::SupportGuard { .. }
            | CoreError::ExponentGuard { .. }
            | CoreError::CapExceeded { .. }
            | CoreError::WindowCap(_)
            | CoreError::TelescopingStalled { .. }
    )
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        if is_guard(&e) {
            CliError::Guard(e.to_string())
        } else {
            match e {
                CoreError::Parse(m) => CliError::Input(m),
                e @ (CoreError::NegativeCoefficient | CoreError::NotStochastic { .. } | CoreError::ZeroPolynomial) => {
                    CliError::Input(e.to_string())
                }
                e => CliError::Core(e),
            }
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Echo of every knob, embedded in each report.
#[derive(Clone, Debug, Serialize)]
pub struct RunConfig {
    pub pipeline: Pipeline,
    pub spec_path: Option<String>,
    pub spec_n_path: Option<String>,
    pub family_path: Option<String>,
    pub horizon: usize,
    pub epsilon: String,
    pub epsilon_value: f64,
    pub power: Option<u64>,
    pub seed: u64,
    pub blocks: usize,
    pub block_cap: usize,
    pub samples: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Ok,
    CertifiedNegative,
    GuardAbort,
    Failed,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Ok => 0,
            Status::CertifiedNegative | Status::Failed => 1,
            Status::GuardAbort => 3,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub schema: &'static str,
    pub tool_version: &'static str,
    pub config: RunConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spec: Option<Value>,
    pub status: Status,
    /// Results cover a shorter horizon than requested (guard abort).
    pub partial: bool,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    pub csv: Vec<String>,
    pub payload: Value,
}

#[derive(Clone, Debug)]
pub struct Csv {
    pub name: String,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

#[derive(Clone, Debug)]
pub struct Outcome {
    pub report: Report,
    pub csvs: Vec<Csv>,
    pub wall_clock_ms: u128,
}

/// What a pipeline hands back before the report is assembled.
struct Produced {
    payload: Value,
    csvs: Vec<Csv>,
    notes: Vec<String>,
    negative: bool,
}

impl Produced {
    fn new(payload: Value) -> Self {
        Produced { payload, csvs: vec![], notes: vec![], negative: false }
    }
}

pub fn parse_epsilon(s: &str) -> CliResult<f64> {
    let bad = || CliError::Input(format!("epsilon: cannot parse {s:?}"));
    let v = match s.split_once('/') {
        Some((a, b)) => {
            let a: f64 = a.trim().parse().map_err(|_| bad())?;
            let b: f64 = b.trim().parse().map_err(|_| bad())?;
            a / b
        }
        None => s.trim().parse().map_err(|_| bad())?,
    };
    if !(v > 0.0 && v < 1.0) {
        return Err(CliError::Input(format!("epsilon: {s} is not in (0, 1)")));
    }
    Ok(v)
}

fn read(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

pub fn load_spec(path: &Path) -> CliResult<SequenceSpec> {
    SequenceSpec::from_json(&read(path)?).map_err(|e| match e {
        CoreError::Parse(m) => CliError::Input(format!("{}: {m}", path.display())),
        e => CliError::Input(format!("{}: {e}", path.display())),
    })
}

pub fn load_family(path: &Path) -> CliResult<Vec<QPoly>> {
    let fam: Vec<QPoly> = serde_json::from_str(&read(path)?)
        .map_err(|e| CliError::Input(format!("{}: family: {e}", path.display())))?;
    if fam.is_empty() || fam.iter().any(|p| p.is_zero()) {
        return Err(CliError::Input(format!("{}: family: empty list or zero polynomial", path.display())));
    }
    Ok(fam)
}

/// (1 − x^{2^{i}})/2 for i < size.
pub fn default_family(size: usize) -> Vec<QPoly> {
    (0..size)
        .map(|i| hemicirc::laurent::qpoly(&[(0, 1, 2), (1i64 << i, -1, 2)]))
        .collect()
}

fn fmt_f64(v: f64) -> String {
    let mut s = String::new();
    write!(s, "{v:?}").expect("write to string");
    s
}

fn sample_cell(s: &Sample) -> String {
    s.exact.as_ref().map_or_else(|| fmt_f64(s.upper()), |q| q.to_string())
}

pub fn trajectory_csv(name: String, t: &TrajectoryReport) -> Csv {
    Csv {
        name,
        header: vec!["d", "norm_bound", "analytic_bound"],
        rows: t
            .samples
            .iter()
            .map(|s| vec![s.d.to_string(), sample_cell(s), s.analytic.map(fmt_f64).unwrap_or_default()])
            .collect(),
    }
}

pub fn mass_csvs(sweep: &MassSweep) -> Vec<Csv> {
    sweep
        .estimates
        .iter()
        .map(|e| Csv {
            name: format!("invariant_l{}.csv", e.l),
            header: vec!["p_index", "d", "value"],
            rows: e
                .tables
                .iter()
                .flat_map(|t| t.values.iter().map(move |s| vec![t.p_index.to_string(), s.d.to_string(), sample_cell(s)]))
                .collect(),
        })
        .collect()
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report types serialize")
}

fn element_label(group: &FiniteAbelianGroup, idx: usize) -> String {
    let r = group.element(idx).residues;
    r.iter().map(u64::to_string).collect::<Vec<_>>().join("_")
}

/// Spec the pipeline runs on, after --power.
struct Prepared {
    spec: SequenceSpec,
    power_view: Option<Value>,
}

fn prepare(spec: SequenceSpec, power: Option<u64>, horizon: usize) -> CliResult<Prepared> {
    let Some(n) = power.filter(|&n| n > 1) else {
        return Ok(Prepared { spec, power_view: None });
    };
    if spec.group().order() == 1 {
        let p0 = polynomial_term(&spec, 0)?;
        let b = blowup(&p0, n)?;
        let view = json!({
            "power": n,
            "b_level_term0": to_value(&b.x_form),
            "a_level_term0": to_value(&circulant_of(&p0, n)),
            "note": "polynomial spec replaced by the circulant sequence p_j(xP) over Z_n",
        });
        Ok(Prepared { spec: circulant_sequence(&spec, n, horizon + 1)?, power_view: Some(view) })
    } else {
        let view = json!({ "power": n, "note": "terms replaced by M_j^n" });
        Ok(Prepared { spec: SequenceSpec::power_of(spec, ExponentSchedule::constant(n as i64)), power_view: Some(view) })
    }
}

/// Runs `f` at the requested horizon, halving on guard errors.
fn with_backoff<T>(horizon: usize, f: impl Fn(usize) -> hemicirc::Result<T>) -> CliResult<(T, usize, Option<String>)> {
    let mut h = horizon;
    let mut first_guard: Option<String> = None;
    loop {
        match f(h) {
            Ok(v) => return Ok((v, h, first_guard)),
            Err(e) if is_guard(&e) => {
                first_guard.get_or_insert_with(|| e.to_string());
                if h == 0 {
                    return Err(CliError::Guard(first_guard.expect("set above")));
                }
                h /= 2;
            }
            Err(e) => return Err(e.into()),
        }
    }
}

fn ergodicity(spec: &SequenceSpec, horizon: usize) -> CliResult<(Produced, Option<String>)> {
    let (r, _, guard) = with_backoff(horizon, |h| ergodicity_report(spec, h.max(1)))?;
    let mut p = Produced::new(to_value(&r));
    p.negative = r.verdict == ErgodicVerdict::NotErgodic;
    Ok((p, guard))
}

fn hollow(spec: &SequenceSpec, horizon: usize) -> CliResult<(Produced, Option<String>)> {
    let group = spec.group().clone();
    if group.n() == 1 {
        let mut p = Produced::new(json!({ "trajectories": [] }));
        p.notes.push("trivial group: no nontrivial characters, so no trajectories or CSVs".into());
        return Ok((p, None));
    }
    let ((trajs, certs), reached, guard) = with_backoff(horizon, |h| {
        let trajs = (1..group.n()).map(|a| hollow_trajectory(spec, a, 0, h)).collect::<hemicirc::Result<Vec<_>>>()?;
        Ok((trajs, hollow_certificates(spec, h)?))
    })?;
    let mut p = Produced::new(json!({
        "horizon": reached,
        "trajectories": to_value(&trajs),
        "certificates": to_value(&certs),
    }));
    p.csvs = trajs
        .iter()
        .enumerate()
        .map(|(i, t)| trajectory_csv(format!("hollow_alpha_{}.csv", element_label(&group, i + 1)), t))
        .collect();
    p.negative = trajs.iter().any(|t| t.verdict == Verdict::StuckAtOneCertified);
    if certs.verdict == CertVerdict::Hollow {
        p.notes.push("hollowness certified by a divergent criterion".into());
    }
    Ok((p, guard))
}

fn at_reduce_pipeline(spec: &SequenceSpec, cfg: &RunConfig) -> CliResult<Produced> {
    if spec.group().n() == 1 {
        let terms = (0..=cfg.horizon)
            .map(|j| Ok(spec.term(j)?.coeff(0).clone()))
            .collect::<hemicirc::Result<Vec<QPoly>>>()?;
        let mut p = Produced::new(json!({ "reduced": to_value(&terms) }));
        p.notes.push("trivial group: the sequence is already 1x1".into());
        return Ok(p);
    }
    let red = at_reduce(spec, cfg.blocks, cfg.epsilon_value, cfg.block_cap)?;
    let defects: Vec<String> =
        (0..red.len()).map(|i| red.hollow_defect(i).map(|q| q.to_string())).collect::<hemicirc::Result<_>>()?;
    let mut v = to_value(&red);
    v["hollow_defect"] = to_value(&defects);
    Ok(Produced::new(v))
}

fn watc_pipeline(spec: &SequenceSpec, cfg: &RunConfig) -> CliResult<Produced> {
    if spec.group().n() == 1 {
        let mut p = Produced::new(Value::Null);
        p.notes.push("trivial group: nothing to factor".into());
        return Ok(p);
    }
    let r = watc_factor(spec, 0, cfg.epsilon_value, cfg.block_cap)?;
    Ok(Produced::new(to_value(&r)))
}

fn invariant_pipeline(spec: &SequenceSpec, family: &[QPoly], horizon: usize) -> CliResult<(Produced, Option<String>)> {
    let ls: Vec<usize> = (0..=2).collect();
    let (sweep, reached, guard) = with_backoff(horizon, |h| {
        let blocks = term_blocks(spec, h + ls.len())?;
        mass_sweep(family, &blocks, &ls, h)
    })?;
    let rows: Vec<Value> = sweep
        .estimates
        .iter()
        .map(|e| json!({ "l": e.l, "s_l": e.s_l, "per_d": e.per_d, "non_increasing": e.non_increasing }))
        .collect();
    let mut p = Produced::new(json!({
        "horizon": reached,
        "family": to_value(&family),
        "estimates": rows,
        "record": sweep.record,
        "record_non_decreasing": sweep.record_non_decreasing(),
    }));
    p.csvs = mass_csvs(&sweep);
    Ok((p, guard))
}

fn witness_pipeline(spec: &SequenceSpec, cfg: &RunConfig, family: Option<Vec<QPoly>>) -> CliResult<Produced> {
    let wc = WitnessConfig {
        power: cfg.power.unwrap_or(1).max(1) as u32,
        epsilon: cfg.epsilon_value,
        horizon: cfg.horizon,
        family,
        ..WitnessConfig::default()
    };
    let r = nonisomorphism_witness(spec, &wc)?;
    Ok(Produced::new(to_value(&r)))
}

fn power_pipeline(spec: &SequenceSpec, cfg: &RunConfig) -> CliResult<Produced> {
    let n = cfg.power.ok_or_else(|| CliError::Input("power: --power is required for this pipeline".into()))?;
    if spec.group().order() != 1 {
        return Err(CliError::Input("spec: the power pipeline needs a polynomial spec over the trivial group".into()));
    }
    let r = power_analysis(spec, n, cfg.horizon)?;
    let views = (0..=cfg.horizon.min(3))
        .map(|j| {
            let p = polynomial_term(spec, j)?;
            let b = blowup(&p, n)?;
            Ok(json!({ "j": j, "b_level": to_value(&b.x_form), "a_level": to_value(&circulant_of(&p, n)) }))
        })
        .collect::<hemicirc::Result<Vec<Value>>>()?;
    let mut v = json!({ "analysis": to_value(&r), "views": views });
    let mut p = Produced::new(Value::Null);
    match r.verdict {
        ErgodicVerdict::Ergodic => {
            v["character_norms"] = to_value(&character_norm_check(spec, n, 1, cfg.horizon.min(6))?);
        }
        ErgodicVerdict::NotErgodic => p.negative = true,
        ErgodicVerdict::Inconclusive => p.notes.push("no residue-cycle certificate for this schedule".into()),
    }
    v["delta_identity"] = Value::Bool(delta_identity_holds(n)?);
    p.payload = v;
    Ok(p)
}

fn tensor_pipeline(m: &SequenceSpec, n: &SequenceSpec, horizon: usize) -> CliResult<(Produced, Option<String>)> {
    if m.group().n() == 1 {
        let mut p = Produced::new(Value::Null);
        p.notes.push("trivial group: the collapse condition is vacuous".into());
        return Ok((p, None));
    }
    let (r, _, guard) = with_backoff(horizon, |h| tensor_collapse_iso_check(m, n, h))?;
    let mut p = Produced::new(to_value(&r));
    p.negative = matches!(r.verdict, ConditionVerdict::NotErgodic | ConditionVerdict::FailedObserved);
    Ok((p, guard))
}

pub fn config_from(cli: &Cli) -> CliResult<RunConfig> {
    Ok(RunConfig {
        pipeline: cli.pipeline,
        spec_path: cli.spec.as_ref().map(|p| p.display().to_string()),
        spec_n_path: cli.spec_n.as_ref().map(|p| p.display().to_string()),
        family_path: cli.family.as_ref().map(|p| p.display().to_string()),
        horizon: cli.horizon,
        epsilon_value: parse_epsilon(&cli.epsilon)?,
        epsilon: cli.epsilon.clone(),
        power: cli.power,
        seed: cli.seed,
        blocks: cli.blocks,
        block_cap: cli.block_cap,
        samples: cli.samples,
    })
}

/// Runs the configured pipeline. Guard aborts still yield an outcome, flagged
/// partial; input errors do not.
pub fn run(cfg: RunConfig) -> CliResult<Outcome> {
    let start = std::time::Instant::now();
    if cfg.power == Some(0) {
        return Err(CliError::Input("power: must be at least 1".into()));
    }
    let spec = match &cfg.spec_path {
        Some(p) => Some(load_spec(Path::new(p))?),
        None if cfg.pipeline == Pipeline::Verify => None,
        None => return Err(CliError::Input("spec: --spec is required".into())),
    };
    let family = cfg.family_path.as_ref().map(|p| load_family(Path::new(p))).transpose()?;
    let spec_echo = spec.as_ref().map(|s| to_value(&s.to_file()));
    let prepared = match (&spec, cfg.pipeline) {
        (Some(s), p) if p != Pipeline::Power && p != Pipeline::Witness => {
            Some(prepare(s.clone(), cfg.power, cfg.horizon)?)
        }
        (Some(s), _) => Some(Prepared { spec: s.clone(), power_view: None }),
        (None, _) => None,
    };
    let h = cfg.horizon;
    let result: CliResult<(Produced, Option<String>)> = match (cfg.pipeline, &prepared) {
        (Pipeline::Verify, _) => {
            let v = verify::verify_suite(prepared.as_ref().map(|p| &p.spec), &cfg)?;
            let mut p = Produced::new(to_value(&v));
            p.negative = !v.all_pass;
            Ok((p, None))
        }
        (_, None) => unreachable!("spec required above"),
        (Pipeline::Ergodicity, Some(s)) => ergodicity(&s.spec, h),
        (Pipeline::Hollow, Some(s)) => hollow(&s.spec, h),
        (Pipeline::AtReduce, Some(s)) => at_reduce_pipeline(&s.spec, &cfg).map(|p| (p, None)),
        (Pipeline::Watc, Some(s)) => watc_pipeline(&s.spec, &cfg).map(|p| (p, None)),
        (Pipeline::Invariant, Some(s)) => {
            let fam = family.clone().unwrap_or_else(|| default_family(DEFAULT_FAMILY_SIZE));
            invariant_pipeline(&s.spec, &fam, h)
        }
        (Pipeline::Witness, Some(s)) => witness_pipeline(&s.spec, &cfg, family.clone()).map(|p| (p, None)),
        (Pipeline::Power, Some(s)) => power_pipeline(&s.spec, &cfg).map(|p| (p, None)),
        (Pipeline::TensorCheck, Some(s)) => {
            let other = match &cfg.spec_n_path {
                Some(p) => prepare(load_spec(Path::new(p))?, cfg.power, h)?.spec,
                None => s.spec.clone(),
            };
            tensor_pipeline(&s.spec, &other, h)
        }
    };
    let (produced, status, partial) = match result {
        Ok((p, guard)) => {
            let partial = guard.is_some();
            let status = if partial {
                Status::GuardAbort
            } else if p.negative {
                if cfg.pipeline == Pipeline::Verify {
                    Status::Failed
                } else {
                    Status::CertifiedNegative
                }
            } else {
                Status::Ok
            };
            let mut p = p;
            if let Some(g) = guard {
                p.notes.push(format!("{g}; results cover a shorter horizon"));
            }
            (p, status, partial)
        }
        Err(CliError::Guard(g)) => {
            let mut p = Produced::new(Value::Null);
            p.notes.push(g);
            (p, Status::GuardAbort, true)
        }
        Err(e) => return Err(e),
    };
    let mut payload = produced.payload;
    if let Some(view) = prepared.and_then(|p| p.power_view) {
        payload = json!({ "result": payload, "power_view": view });
    }
    let report = Report {
        schema: SCHEMA_VERSION,
        tool_version: TOOL_VERSION,
        config: cfg,
        spec: spec_echo,
        status,
        partial,
        notes: produced.notes,
        csv: produced.csvs.iter().map(|c| c.name.clone()).collect(),
        payload,
    };
    Ok(Outcome { report, csvs: produced.csvs, wall_clock_ms: start.elapsed().as_millis() })
}

fn write(path: PathBuf, bytes: &[u8]) -> CliResult<()> {
    std::fs::write(&path, bytes).map_err(|source| CliError::Io { path, source })
}

/// Writes report.json, meta.json (timestamps only) and the CSVs into `dir`.
pub fn emit(out: &Outcome, dir: &Path) -> CliResult<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|source| CliError::Io { path: dir.to_path_buf(), source })?;
    let mut written = Vec::new();
    let mut json = serde_json::to_string_pretty(&out.report).expect("report serializes");
    json.push('\n');
    let p = dir.join("report.json");
    write(p.clone(), json.as_bytes())?;
    written.push(p);
    for c in &out.csvs {
        let p = dir.join(&c.name);
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| CliError::Io { path: p.clone(), source: std::io::Error::other(e) };
        w.write_record(&c.header).map_err(io)?;
        for r in &c.rows {
            w.write_record(r).map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Io { path: p.clone(), source: e.into_error() })?;
        write(p.clone(), &bytes)?;
        written.push(p);
    }
    let now = std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let meta = json!({ "schema": SCHEMA_VERSION, "unix_time": now, "wall_clock_ms": out.wall_clock_ms as u64 });
    let p = dir.join("meta.json");
    write(p.clone(), format!("{}\n", serde_json::to_string_pretty(&meta).expect("meta serializes")).as_bytes())?;
    written.push(p);
    Ok(written)
}

/// Pair-norm trajectories over every unequal character pair.
pub fn pair_trajectories(spec: &SequenceSpec, horizon: usize) -> hemicirc::Result<Vec<TrajectoryReport>> {
    character_pairs(spec.group()).into_iter().map(|(a, b)| pair_norm_trajectory(spec, a, b, 0, horizon)).collect()
}

pub fn subring_stats(samples: usize, seed: u64) -> hemicirc::Result<hemicirc::powers::SubringStats> {
    subring_bound_checks(samples, 5, seed)
}
