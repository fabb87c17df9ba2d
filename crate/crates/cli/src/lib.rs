//! The `scx` command line. [`run`] parses arguments, executes one command
//! and returns the process exit code: 0 on success, 1 when the answer is a
//! valid "nothing found" (an infeasible LP, an empty selection), 2 on bad
//! input.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use scx_core::generators::{
    encode_hitting_set, gen_hitting_set, gen_lower_bound, gen_max_k_cover, gen_random_discrete,
    hitting_set_gaming_cost, CoverSpec, HitSpec,
};
use scx_core::io::{parse_instance, Instance};
use scx_core::linear::{CandidateKind, ThreeSets};
use scx_core::oracles::{FpBudget, Witness, DEFAULT_MAX_P};
use scx_core::{
    compile_linear_to_discrete, count_tp_fp, evaluate_criteria, find_linear_classifier,
    oracle_linear_grid, oracle_subsets, oracle_targets_2d, run_trials, sample_size_full,
    solve_2d_general, solve_2d_linear, solve_with_policy, AgentDistribution, CriteriaSet,
    DiscreteInstance, Error, EvalReport, Learner, LinearClassifier, LinearInstance, TiePolicy,
    TrialConfig,
};

#[derive(Parser)]
#[command(
    name = "scx",
    version,
    about = "Classification with agents who can game or improve"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate an instance family.
    #[command(subcommand)]
    Gen(GenCommand),
    /// Run a solver on an instance.
    #[command(subcommand)]
    Solve(SolveCommand),
    /// Run a learner over a distribution for a number of seeded trials.
    #[command(subcommand)]
    Learn(LearnCommand),
    /// Brute-force references for small instances.
    #[command(subcommand)]
    Oracle(OracleCommand),
    /// Evaluate a fixed criteria selection or classifier.
    Eval(EvalArgs),
}

#[derive(Subcommand)]
enum GenCommand {
    /// Random colored bipartite graph.
    Random(RandomArgs),
    /// The hard distribution for the learners.
    Lowerbound(LowerBoundArgs),
    /// Linear instance encoding a Max-k-Cover instance.
    Maxkcover(SpecArgs),
    /// Linear instance encoding a Hitting Set instance.
    Hittingset(HitArgs),
}

#[derive(Args)]
struct RandomArgs {
    /// Number of agents.
    #[arg(long)]
    n: usize,
    /// Number of criteria.
    #[arg(long)]
    m: usize,
    #[arg(long, default_value_t = 0.5)]
    edge_prob: f64,
    #[arg(long, default_value_t = 0.5)]
    blue_prob: f64,
    #[arg(long, default_value_t = 0.05)]
    cost_min: f64,
    #[arg(long, default_value_t = 1.0)]
    cost_max: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    tie: Option<TiePolicy>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct LowerBoundArgs {
    #[arg(long)]
    m: usize,
    #[arg(long)]
    eps: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Linear instance with the examples and target points.
    #[arg(long)]
    out: PathBuf,
    /// Distribution over the examples.
    #[arg(long)]
    dist_out: Option<PathBuf>,
}

#[derive(Args)]
struct SpecArgs {
    /// JSON file with `n`, `sets` and `k`.
    #[arg(long)]
    sets: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct HitArgs {
    #[arg(long)]
    sets: PathBuf,
    /// Hitting set (comma-separated element indices) to encode as targets.
    #[arg(long, value_delimiter = ',')]
    select: Option<Vec<usize>>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Subcommand)]
enum SolveCommand {
    /// Maximum true positives with no false positives over criteria.
    Discrete(SolveDiscreteArgs),
    /// Linear classifier meeting yes/no/improve requirements.
    LinearLp(SolveLpArgs),
    /// Best planar linear classifier by true minus false positives.
    #[command(name = "linear-2d")]
    Linear2d(InOut),
    /// Planar target points with no false positives.
    #[command(name = "general-2d")]
    General2d(InOut),
}

#[derive(Args)]
struct InOut {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SolveDiscreteArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Overrides the instance's tie policy.
    #[arg(long)]
    tie: Option<TiePolicy>,
}

#[derive(Args)]
struct SolveLpArgs {
    #[arg(long)]
    input: PathBuf,
    /// JSON file with agent ids under `s_yes`, `s_no` and `s_imp`.
    #[arg(long)]
    sets: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Subcommand)]
enum LearnCommand {
    /// Learner that sees every sampled agent's full neighborhood.
    Full(LearnArgs),
    /// Learner that only sees each sampled agent's response.
    Partial(LearnArgs),
}

#[derive(Args)]
struct LearnArgs {
    /// Distribution file.
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    eps: f64,
    #[arg(long)]
    delta: f64,
    #[arg(long, default_value_t = 1)]
    trials: usize,
    /// Seed of trial 0; trial t uses seed + t.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Fixed sample count for the full learner.
    #[arg(long)]
    samples: Option<usize>,
    /// Per-trial rows.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// JSON summary.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum OracleCommand {
    /// Every criteria subset.
    Subsets(OracleSubsetArgs),
    /// Grid of planar linear classifiers.
    Linear(OracleLinearArgs),
    /// Per-agent pushed target points in the plane.
    Targets(OracleTargetArgs),
}

#[derive(Args)]
struct OracleSubsetArgs {
    #[arg(long)]
    input: PathBuf,
    /// Allowed false-positive count.
    #[arg(long, conflicts_with = "mass")]
    k: Option<usize>,
    /// Allowed false-positive mass.
    #[arg(long)]
    mass: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_MAX_P)]
    max_p: usize,
    #[arg(long)]
    tie: Option<TiePolicy>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct OracleLinearArgs {
    #[arg(long)]
    input: PathBuf,
    /// Angle step in degrees.
    #[arg(long, default_value_t = 1.0)]
    angle_step: f64,
    /// Intercept step.
    #[arg(long, default_value_t = 0.05)]
    grid_step: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct OracleTargetArgs {
    #[arg(long)]
    input: PathBuf,
    /// Push increments are multiples of this step.
    #[arg(long, default_value_t = 0.05)]
    grid_step: f64,
    /// Number of push increments, starting at 0.
    #[arg(long, default_value_t = 8)]
    grid_size: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    input: PathBuf,
    /// Criteria ids to select (discrete, distribution, or linear with targets).
    #[arg(long, value_delimiter = ',', conflicts_with = "classifier")]
    select: Option<Vec<String>>,
    /// Linear classifier as `a0,a1,...:b`.
    #[arg(long)]
    classifier: Option<String>,
    #[arg(long)]
    tie: Option<TiePolicy>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug)]
enum Failure {
    /// Bad arguments or input; exit 2.
    Input(String),
    /// Valid input without an answer; exit 1.
    Empty,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Input(e.to_string())
    }
}

type Outcome = std::result::Result<u8, Failure>;

/// Runs one command. `argv[0]` is the program name.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code as i32,
        Err(Failure::Empty) => 1,
        Err(Failure::Input(msg)) => {
            eprintln!("scx: error: {msg}");
            2
        }
    }
}

fn dispatch(command: Command) -> Outcome {
    match command {
        Command::Gen(g) => gen(g),
        Command::Solve(s) => solve(s),
        Command::Learn(l) => learn(l),
        Command::Oracle(o) => oracle(o),
        Command::Eval(e) => eval(e),
    }
}

fn read(path: &Path) -> std::result::Result<String, Failure> {
    fs::read_to_string(path)
        .map_err(|e| Failure::Input(format!("cannot read {}: {e}", path.display())))
}

fn load(path: &Path) -> std::result::Result<Instance, Failure> {
    parse_instance(&read(path)?).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn load_json<T: serde::de::DeserializeOwned>(path: &Path) -> std::result::Result<T, Failure> {
    serde_json::from_str(&read(path)?)
        .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

/// Writes through a temporary file in the destination directory, then
/// renames it into place.
fn write_atomic(path: &Path, contents: &[u8]) -> std::result::Result<(), Failure> {
    let fail =
        |e: &dyn std::fmt::Display| Failure::Input(format!("cannot write {}: {e}", path.display()));
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| fail(&e))?;
    tmp.write_all(contents).map_err(|e| fail(&e))?;
    tmp.persist(path).map_err(|e| fail(&e.error))?;
    Ok(())
}

fn emit(out: Option<&Path>, value: &Value) -> std::result::Result<(), Failure> {
    let mut text = serde_json::to_string_pretty(value).expect("json values serialize");
    text.push('\n');
    match out {
        Some(path) => write_atomic(path, text.as_bytes()),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn report_json(r: &EvalReport) -> Value {
    json!({
        "tp": r.tp_count,
        "fp": r.fp_count,
        "tp_mass": r.tp_mass,
        "fp_mass": r.fp_mass,
    })
}

fn classifier_json(g: &LinearClassifier) -> Value {
    json!({ "a": g.a(), "b": g.b() })
}

/// Discrete view of any instance: linear instances are compiled through
/// their targets.
fn as_discrete(
    inst: Instance,
    tie: Option<TiePolicy>,
) -> std::result::Result<DiscreteInstance, Failure> {
    let d = match inst {
        Instance::Discrete(d) => d,
        Instance::Distribution(d) => d.instance().clone(),
        Instance::Linear(l) => compile_linear_to_discrete(&l, tie.unwrap_or_default())?,
    };
    Ok(match tie {
        Some(t) if t != d.tie_policy() => d.with_tie_policy(t),
        _ => d,
    })
}

fn as_linear(inst: Instance) -> std::result::Result<LinearInstance, Failure> {
    match inst {
        Instance::Linear(l) => Ok(l),
        other => Err(Failure::Input(format!(
            "expected a linear instance, got kind `{}`",
            other.kind()
        ))),
    }
}

fn gen(cmd: GenCommand) -> Outcome {
    match cmd {
        GenCommand::Random(a) => {
            let mut inst = gen_random_discrete(
                a.n,
                a.m,
                a.edge_prob,
                a.blue_prob,
                (a.cost_min, a.cost_max),
                a.seed,
            )?;
            if let Some(t) = a.tie {
                inst = inst.with_tie_policy(t);
            }
            write_atomic(&a.out, Instance::Discrete(inst).to_json().as_bytes())?;
        }
        GenCommand::Lowerbound(a) => {
            let fam = gen_lower_bound(a.m, a.eps, a.seed)?;
            write_atomic(&a.out, Instance::Linear(fam.instance).to_json().as_bytes())?;
            if let Some(p) = &a.dist_out {
                write_atomic(p, Instance::Distribution(fam.dist).to_json().as_bytes())?;
            }
            println!(
                "concept: {}",
                fam.concept
                    .iter()
                    .map(|k| format!("p{}", k + 1))
                    .collect::<Vec<_>>()
                    .join(",")
            );
        }
        GenCommand::Maxkcover(a) => {
            let spec: CoverSpec = load_json(&a.sets)?;
            let inst = gen_max_k_cover(&spec)?;
            write_atomic(&a.out, Instance::Linear(inst).to_json().as_bytes())?;
        }
        GenCommand::Hittingset(a) => {
            let spec: HitSpec = load_json(&a.sets)?;
            let mut inst = gen_hitting_set(&spec)?;
            if let Some(hit) = &a.select {
                inst = inst.with_targets(encode_hitting_set(&spec, hit)?)?;
            }
            write_atomic(&a.out, Instance::Linear(inst).to_json().as_bytes())?;
            println!("gaming cost: {}", hitting_set_gaming_cost(&spec)?);
        }
    }
    Ok(0)
}

fn solve(cmd: SolveCommand) -> Outcome {
    match cmd {
        SolveCommand::Discrete(a) => {
            let inst = as_discrete(load(&a.input)?, a.tie)?;
            let res = solve_with_policy(&inst, inst.tie_policy());
            let crit = inst.criteria();
            let deletions: Vec<Value> = res
                .deletions
                .iter()
                .map(|d| {
                    json!({
                        "round": d.round,
                        "agent": inst.agents()[d.agent].id,
                        "criterion": crit[d.criterion],
                    })
                })
                .collect();
            let mut out = report_json(&res.report);
            let obj = out.as_object_mut().expect("object");
            obj.insert("p_final".into(), json!(inst.ids_of(&res.p_final)));
            obj.insert("rounds".into(), json!(res.rounds));
            obj.insert("evaluations".into(), json!(res.evaluations));
            obj.insert("deletions".into(), Value::Array(deletions));
            emit(Some(&a.out), &out)?;
            println!("p_final: [{}]", inst.ids_of(&res.p_final).join(","));
            if res.p_final.is_empty() {
                return Err(Failure::Empty);
            }
        }
        SolveCommand::LinearLp(a) => {
            let inst = as_linear(load(&a.input)?)?;
            #[derive(serde::Deserialize)]
            #[serde(deny_unknown_fields)]
            struct SetsFile {
                #[serde(default)]
                s_yes: Vec<String>,
                #[serde(default)]
                s_no: Vec<String>,
                #[serde(default)]
                s_imp: Vec<String>,
            }
            let f: SetsFile = load_json(&a.sets)?;
            let index = |ids: &[String]| -> std::result::Result<Vec<usize>, Failure> {
                ids.iter()
                    .map(|id| {
                        inst.agents()
                            .iter()
                            .position(|ag| ag.id == *id)
                            .ok_or_else(|| {
                                Failure::Input(format!(
                                    "{}: unknown agent `{id}`",
                                    a.sets.display()
                                ))
                            })
                    })
                    .collect()
            };
            let three = ThreeSets::new(index(&f.s_yes)?, index(&f.s_no)?, index(&f.s_imp)?);
            match find_linear_classifier(&inst, &three) {
                Ok(g) => {
                    emit(
                        Some(&a.out),
                        &json!({
                            "status": "feasible",
                            "classifier": classifier_json(&g),
                            "movement_dim": inst.movement_dimension(&g),
                        }),
                    )?;
                }
                Err(e @ (Error::Infeasible | Error::VerificationFailed { .. })) => {
                    let status = if e == Error::Infeasible {
                        "infeasible"
                    } else {
                        "verification_failed"
                    };
                    emit(
                        Some(&a.out),
                        &json!({ "status": status, "reason": e.to_string() }),
                    )?;
                    println!("{e}");
                    return Err(Failure::Empty);
                }
                Err(e) => return Err(e.into()),
            }
        }
        SolveCommand::Linear2d(a) => {
            let inst = as_linear(load(&a.input)?)?;
            let res = solve_2d_linear(&inst)?;
            let kind = |k: CandidateKind| match k {
                CandidateKind::Fstar => json!("fstar"),
                CandidateKind::Gaming => json!("gaming"),
                CandidateKind::Agent(i) => json!({ "agent": inst.agents()[i].id }),
            };
            let mut out = report_json(&res.best.report);
            let obj = out.as_object_mut().expect("object");
            obj.insert("classifier".into(), classifier_json(res.classifier()));
            obj.insert("candidate".into(), kind(res.best.kind));
            obj.insert("objective".into(), json!(res.objective()));
            obj.insert(
                "candidates".into(),
                Value::Array(
                    res.candidates
                        .iter()
                        .map(|c| {
                            json!({
                                "candidate": kind(c.kind),
                                "classifier": classifier_json(&c.classifier),
                                "objective": c.report.objective(),
                            })
                        })
                        .collect(),
                ),
            );
            emit(Some(&a.out), &out)?;
        }
        SolveCommand::General2d(a) => {
            let inst = as_linear(load(&a.input)?)?;
            let res = solve_2d_general(&inst)?;
            let mut out = report_json(&res.report);
            let obj = out.as_object_mut().expect("object");
            obj.insert("targets".into(), json!(res.targets));
            obj.insert(
                "owners".into(),
                json!(res
                    .owners
                    .iter()
                    .map(|&i| &inst.agents()[i].id)
                    .collect::<Vec<_>>()),
            );
            emit(Some(&a.out), &out)?;
            if res.targets.is_empty() {
                return Err(Failure::Empty);
            }
        }
    }
    Ok(0)
}

fn thread_pool() -> std::result::Result<rayon::ThreadPool, Failure> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var("SCX_THREADS") {
        let n: usize = v.parse().ok().filter(|&n| n > 0).ok_or_else(|| {
            Failure::Input(format!("SCX_THREADS must be a positive integer, got `{v}`"))
        })?;
        builder = builder.num_threads(n);
    }
    builder.build().map_err(|e| Failure::Input(e.to_string()))
}

fn learn(cmd: LearnCommand) -> Outcome {
    let (learner, a) = match cmd {
        LearnCommand::Full(a) => (Learner::Full, a),
        LearnCommand::Partial(a) => (Learner::Partial, a),
    };
    let dist = match load(&a.input)? {
        Instance::Distribution(d) => d,
        Instance::Discrete(d) => AgentDistribution::from_instance(d)?,
        Instance::Linear(_) => {
            return Err(Failure::Input(format!(
                "{}: learners need a distribution or a discrete instance",
                a.input.display()
            )))
        }
    };
    if a.samples.is_some() && learner == Learner::Partial {
        return Err(Failure::Input(
            "--samples only applies to the full learner".into(),
        ));
    }
    let config = TrialConfig {
        learner,
        eps: a.eps,
        delta: a.delta,
        trials: a.trials,
        base_seed: a.seed,
        samples: a.samples,
    };
    let table = thread_pool()?.install(|| run_trials(&dist, &config))?;
    if let Some(path) = &a.csv {
        let mut w = csv::Writer::from_writer(Vec::new());
        for row in &table.rows {
            w.serialize(row)
                .map_err(|e| Failure::Input(e.to_string()))?;
        }
        let bytes = w.into_inner().map_err(|e| Failure::Input(e.to_string()))?;
        write_atomic(path, &bytes)?;
    }
    let p = dist.criteria_count();
    let summary = json!({
        "learner": learner,
        "eps": a.eps,
        "delta": a.delta,
        "trials": a.trials,
        "seed": a.seed,
        "criteria": p,
        "sample_size": match (learner, a.samples) {
            (Learner::Full, Some(n)) => json!(n),
            (Learner::Full, None) => json!(sample_size_full(a.eps, a.delta, p.max(1))?),
            (Learner::Partial, _) => Value::Null,
        },
        "batch_size": match learner {
            Learner::Partial => json!(scx_core::batch_size_partial(a.eps, a.delta, p as f64)?),
            Learner::Full => Value::Null,
        },
        "opt": table.opt,
        "failure_rate": table.failure_rate(),
        "mean_error": table.mean_error(),
        "mean_performance": table.rows.iter().map(|r| r.performance).sum::<f64>() / table.rows.len() as f64,
    });
    match &a.out {
        Some(path) => emit(Some(path), &summary)?,
        None => println!(
            "opt {:.6}  failure rate {:.4}  mean error {:.6}",
            table.opt,
            table.failure_rate(),
            table.mean_error()
        ),
    }
    Ok(0)
}

fn witness_json(w: &Witness, inst: Option<&DiscreteInstance>) -> Value {
    match (w, inst) {
        (Witness::Subset(s), Some(d)) => {
            json!(s.iter().map(|&k| &d.criteria()[k]).collect::<Vec<_>>())
        }
        (Witness::Subset(s), None) => json!(s),
        (Witness::Classifier(g), _) => classifier_json(g),
        (Witness::Targets(t), _) => json!(t),
    }
}

fn oracle(cmd: OracleCommand) -> Outcome {
    match cmd {
        OracleCommand::Subsets(a) => {
            let inst = as_discrete(load(&a.input)?, a.tie)?;
            let budget = match (a.k, a.mass) {
                (_, Some(m)) => FpBudget::Mass(m),
                (k, None) => FpBudget::Count(k.unwrap_or(0)),
            };
            let r = oracle_subsets(&inst, budget, a.max_p)?;
            emit(
                a.out.as_deref(),
                &json!({
                    "best_value": r.best_value,
                    "witness": witness_json(&r.witness, Some(&inst)),
                    "enumerated": r.enumerated,
                }),
            )?;
        }
        OracleCommand::Linear(a) => {
            let inst = as_linear(load(&a.input)?)?;
            let r = oracle_linear_grid(&inst, a.angle_step, a.grid_step)?;
            emit(
                a.out.as_deref(),
                &json!({
                    "best_value": r.best_value,
                    "witness": witness_json(&r.witness, None),
                    "enumerated": r.enumerated,
                }),
            )?;
        }
        OracleCommand::Targets(a) => {
            let inst = as_linear(load(&a.input)?)?;
            if !(a.grid_step > 0.0) {
                return Err(Failure::Input("--grid-step must be positive".into()));
            }
            let grid: Vec<f64> = (0..a.grid_size).map(|k| k as f64 * a.grid_step).collect();
            let r = oracle_targets_2d(&inst, &grid)?;
            emit(
                a.out.as_deref(),
                &json!({
                    "best_value": r.best_value,
                    "witness": witness_json(&r.witness, None),
                    "enumerated": r.enumerated,
                }),
            )?;
        }
    }
    Ok(0)
}

fn parse_classifier(s: &str) -> std::result::Result<LinearClassifier, Failure> {
    let bad = || Failure::Input(format!("--classifier: expected `a0,a1,...:b`, got `{s}`"));
    let (a, b) = s.split_once(':').ok_or_else(bad)?;
    let a = a
        .split(',')
        .map(|v| v.trim().parse::<f64>())
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|_| bad())?;
    let b = b.trim().parse::<f64>().map_err(|_| bad())?;
    Ok(LinearClassifier::new(a, b)?)
}

fn eval(a: EvalArgs) -> Outcome {
    let inst = load(&a.input)?;
    let report = match (&a.classifier, &a.select) {
        (Some(spec), _) => {
            let lin = as_linear(inst)?;
            count_tp_fp(&lin, &parse_classifier(spec)?)?
        }
        (None, Some(ids)) => {
            let d = as_discrete(inst, a.tie)?;
            let sel = d.select(ids)?;
            evaluate_criteria(&d, &sel)
        }
        (None, None) => {
            let d = as_discrete(inst, a.tie)?;
            evaluate_criteria(&d, &CriteriaSet::full(d.criteria().len()))
        }
    };
    emit(a.out.as_deref(), &report_json(&report))?;
    Ok(0)
}
