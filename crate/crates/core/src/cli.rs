//! `diffauc` command line: run, verify, experiment, gen.
//!
//! Machine output goes to stdout as JSON (CSV for `experiment` without
//! `--out`); the human summary of `verify` goes to stderr. Exit codes: 0 ok,
//! 1 verification failure, 2 malformed input.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use crate::bayes::{
    invert_virtual, iid_priors, paired_revenue, parse_distribution, trial_rng, Dist, MaxViVa, ReserveSecondPrice,
};
use crate::experiments::{parse_lambda_grid, sweep_lambda, write_sweep_csv, ExperimentConfig};
use crate::mechanisms::{
    ArgmaxPowered, ArgmaxRho, ExponentVector, Idm, Lblev, LevelRule, Mechanism, Rc3, ReferralAuction,
};
use crate::netcore::{DiffusionNetwork, Instance, InstanceFile, NodeId};
use crate::verify::{
    mutant, random_exponents, random_network_instance, random_sibling_exponents, random_tree_instance,
    random_valuations, verify_all,
    Condition, VerificationReport, VerifyOptions,
};

pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Parser)]
#[command(name = "diffauc", version, about = "Diffusion auctions on networks")]
struct Cli {
    /// Cap on worker threads.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a mechanism on an instance file.
    Run(RunArgs),
    /// Check incentive conditions on an instance or on random instances.
    Verify(VerifyArgs),
    /// Lambda sweep (LbLEV vs IDM), or a revenue comparison with --dist.
    Experiment(ExperimentArgs),
    /// Write a random instance file.
    Gen(GenArgs),
}

#[derive(Debug, Args)]
struct MechanismArgs {
    /// lblev, idm, ra, ra:<rule>, rc3, maxviva, second-price:<reserve>, mutant:<name>
    #[arg(long, default_value = "lblev")]
    mechanism: String,
    /// JSON object mapping agent id to exponent.
    #[arg(long)]
    exponents: Option<PathBuf>,
    /// Level rule for `ra`: argmax or argmax-exp.
    #[arg(long)]
    rule: Option<String>,
    /// Prior for maxviva, e.g. uniform:0:1, exp:1, tnorm:100:5.
    #[arg(long)]
    dist: Option<String>,
}

#[derive(Debug, Args)]
struct RunArgs {
    #[arg(long)]
    instance: PathBuf,
    #[command(flatten)]
    mech: MechanismArgs,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[arg(long)]
    instance: Option<PathBuf>,
    #[command(flatten)]
    mech: MechanismArgs,
    /// Random instances to check when no instance file is given.
    #[arg(long, default_value_t = 20)]
    trials: u64,
    #[arg(long, default_value_t = 64)]
    grid: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Largest random instance size.
    #[arg(long, default_value_t = 8)]
    n: usize,
    /// Random LbLEV exponents: `sibling` shares one exponent among the
    /// children of each agent, `free` draws one per agent, `unit` is IDM.
    #[arg(long, default_value = "sibling")]
    exponent_model: String,
}

#[derive(Debug, Args)]
struct ExperimentArgs {
    #[arg(long, default_value_t = 10)]
    n: usize,
    #[arg(long, default_value_t = 5.0)]
    sigma: f64,
    #[arg(long, default_value = "0:1:0.05")]
    lambdas: String,
    #[arg(long, default_value_t = 100)]
    trials_outer: usize,
    #[arg(long, default_value_t = 100)]
    trials_inner: usize,
    /// Switches to a depth-1 revenue comparison under this prior.
    #[arg(long)]
    dist: Option<String>,
    /// Trials for the revenue comparison.
    #[arg(long, default_value_t = 100_000)]
    trials: u64,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct GenArgs {
    #[arg(long, default_value_t = 10)]
    n: usize,
    /// Probability of each extra non-tree edge; 0 gives a tree.
    #[arg(long, default_value_t = 0.0)]
    extra: f64,
    /// Also write random exponents in [0.5, 3].
    #[arg(long)]
    with_exponents: bool,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CliOutput {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl CliOutput {
    fn ok(stdout: String) -> Self {
        Self { code: 0, stdout, stderr: String::new() }
    }

    fn malformed(msg: impl Into<String>) -> Self {
        Self { code: 2, stdout: String::new(), stderr: format!("error: {}", msg.into()) }
    }
}

/// `argv[0]` is the program name.
pub fn dispatch(argv: &[String]) -> CliOutput {
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            return if code == 0 {
                CliOutput::ok(text)
            } else {
                CliOutput { code, stdout: String::new(), stderr: text }
            };
        }
    };
    let body = || match cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Experiment(a) => cmd_experiment(a),
        Command::Gen(a) => cmd_gen(a),
    };
    let result = match cli.jobs {
        Some(j) => match rayon::ThreadPoolBuilder::new().num_threads(j.max(1)).build() {
            Ok(pool) => pool.install(body),
            Err(e) => return CliOutput::malformed(e.to_string()),
        },
        None => body(),
    };
    result.unwrap_or_else(CliOutput::malformed)
}

fn read_instance(path: &Path) -> Result<InstanceFile, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    InstanceFile::from_json(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn read_exponents(path: &Path) -> Result<BTreeMap<NodeId, f64>, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn to_json(v: &impl Serialize) -> String {
    serde_json::to_string_pretty(v).expect("outputs serialize")
}

fn write_out(path: &Path, text: &str) -> Result<(), String> {
    fs::write(path, text).map_err(|e| format!("{}: {e}", path.display()))
}

fn exponent_vector(map: BTreeMap<NodeId, f64>) -> Result<ExponentVector, String> {
    ExponentVector::new(map).map_err(|e| e.to_string())
}

fn parse_rule(name: &str, exponents: &ExponentVector) -> Result<Arc<dyn LevelRule>, String> {
    match name {
        "argmax" => Ok(Arc::new(ArgmaxRho)),
        "argmax-exp" => Ok(Arc::new(ArgmaxPowered { exponents: exponents.clone() })),
        _ => Err(format!("unknown rule {name:?}")),
    }
}

/// A parsed mechanism plus the level rule it is an RA for, if any.
struct Built {
    mech: Box<dyn Mechanism>,
    rule: Option<Arc<dyn LevelRule>>,
}

fn default_dist(name: &str) -> Result<Dist, String> {
    parse_distribution(name).map_err(|e| e.to_string())
}

fn build_mechanism(a: &MechanismArgs, exponents: ExponentVector) -> Result<Built, String> {
    let name = a.mechanism.as_str();
    let dist = || default_dist(a.dist.as_deref().unwrap_or("uniform:0:100"));
    Ok(match name {
        "lblev" => Built {
            rule: Some(Arc::new(ArgmaxPowered { exponents: exponents.clone() })),
            mech: Box::new(Lblev::new(exponents)),
        },
        "idm" => Built { mech: Box::new(Idm), rule: Some(Arc::new(ArgmaxRho)) },
        "rc3" => Built { mech: Box::new(Rc3), rule: None },
        "maxviva" => Built { mech: Box::new(MaxViVa::iid(dist()?)), rule: None },
        _ if name == "ra" || name.starts_with("ra:") => {
            let rule_name = name.strip_prefix("ra:").or(a.rule.as_deref()).unwrap_or("argmax");
            let rule = parse_rule(rule_name, &exponents)?;
            Built { mech: Box::new(ReferralAuction { rule: rule.clone() }), rule: Some(rule) }
        }
        _ if name.starts_with("second-price:") => {
            let r: f64 = name["second-price:".len()..].parse().map_err(|_| format!("bad reserve in {name:?}"))?;
            Built { mech: Box::new(ReserveSecondPrice { reserve: r }), rule: None }
        }
        _ if name.starts_with("mutant:") => {
            let m = mutant(&name["mutant:".len()..]).ok_or_else(|| format!("unknown mutant {name:?}"))?;
            Built { mech: m, rule: None }
        }
        _ => return Err(format!("unknown mechanism {name:?}")),
    })
}

fn labelled(id: NodeId, labels: &BTreeMap<NodeId, String>) -> Value {
    labels.get(&id).map_or(Value::Null, |l| Value::String(l.clone()))
}

fn cmd_run(a: RunArgs) -> Result<CliOutput, String> {
    let file = read_instance(&a.instance)?;
    let instance = file.instance().map_err(|e| e.to_string())?;
    let exps = match &a.mech.exponents {
        Some(p) => read_exponents(p)?,
        None => file.exponents(),
    };
    let built = build_mechanism(&a.mech, exponent_vector(exps)?)?;
    let (outcome, trace) =
        built.mech.run_traced(&instance.network, &instance.reports).map_err(|e| e.to_string())?;
    let labels = file.labels();
    let winner = outcome.winner();
    let out = json!({
        "seed": a.seed,
        "mechanism": built.mech.name(),
        "winner": winner,
        "winnerLabel": winner.map_or(Value::Null, |w| labelled(w, &labels)),
        "sold": outcome.is_sold(),
        "sellerRevenue": outcome.seller_revenue,
        "allocation": outcome.allocation,
        "payments": outcome.payments,
        "trace": trace,
    });
    Ok(CliOutput::ok(to_json(&out)))
}

#[derive(Debug, Serialize)]
#[serde(rename_all = "camelCase")]
struct ConditionSummary {
    condition: Condition,
    pass: bool,
    probabilistic: bool,
    comparisons: usize,
    failed_instances: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    first_failure: Option<Value>,
}

fn random_instance_for(name: &str, rng: &mut rand_chacha::ChaCha8Rng, n_max: usize) -> Instance {
    use rand::Rng;
    if name == "rc3" {
        let ids = [NodeId(1), NodeId(2), NodeId(3)];
        let net = DiffusionNetwork::new(ids, ids.map(|i| (NodeId::SELLER, i))).expect("star");
        let vals = random_valuations(rng, &net, 100.0);
        return Instance::truthful(net, &vals);
    }
    let n = rng.random_range(1..=n_max.max(1));
    if name.starts_with("ra") {
        random_network_instance(rng, n, 0.2)
    } else {
        random_tree_instance(rng, n)
    }
}

fn cmd_verify(a: VerifyArgs) -> Result<CliOutput, String> {
    let opts = VerifyOptions { grid_size: a.grid, seed: a.seed, ..VerifyOptions::default() };
    let fixed_exps = a.mech.exponents.as_deref().map(read_exponents).transpose()?;
    let mut cases: Vec<(Instance, ExponentVector, Option<InstanceFile>)> = Vec::new();
    match &a.instance {
        Some(p) => {
            let file = read_instance(p)?;
            let instance = file.instance().map_err(|e| e.to_string())?;
            let exps = exponent_vector(fixed_exps.clone().unwrap_or_else(|| file.exponents()))?;
            cases.push((instance, exps, Some(file)));
        }
        None => {
            for k in 0..a.trials {
                let mut rng = trial_rng(a.seed, k);
                let instance = random_instance_for(&a.mech.mechanism, &mut rng, a.n);
                let exps = match &fixed_exps {
                    Some(m) => exponent_vector(m.clone())?,
                    None if a.mech.mechanism == "lblev" => match a.exponent_model.as_str() {
                        "sibling" => random_sibling_exponents(&mut rng, &instance.network, 0.5, 3.0),
                        "free" => random_exponents(&mut rng, &instance.network, 0.5, 3.0),
                        "unit" => ExponentVector::unit(),
                        other => return Err(format!("unknown exponent model {other:?}")),
                    },
                    None => ExponentVector::unit(),
                };
                cases.push((instance, exps, None));
            }
        }
    }

    let mut summary: BTreeMap<Condition, ConditionSummary> = BTreeMap::new();
    let mut mech_name = a.mech.mechanism.clone();
    for (k, (instance, exps, file)) in cases.iter().enumerate() {
        let built = build_mechanism(&a.mech, exps.clone())?;
        mech_name = built.mech.name();
        let reports = verify_all(built.mech.as_ref(), instance, built.rule.as_deref(), &opts)
            .map_err(|e| format!("instance {k}: {e}"))?;
        for r in reports {
            merge(&mut summary, r, || {
                let f = file.clone().unwrap_or_else(|| InstanceFile::from_instance(instance, Some(exps.as_map())));
                json!({ "instanceIndex": k, "instance": f })
            });
        }
    }
    let pass = summary.values().all(|s| s.pass);
    let conditions: Vec<&ConditionSummary> = summary.values().collect();
    let stderr = conditions
        .iter()
        .map(|c| {
            let status = if c.pass { "pass" } else { "FAIL" };
            format!("{:<22} {status} ({} comparisons, {} failing instances)", c.condition.as_str(), c.comparisons, c.failed_instances)
        })
        .collect::<Vec<_>>()
        .join("\n");
    let out = json!({
        "seed": a.seed,
        "mechanism": mech_name,
        "instances": cases.len(),
        "grid": a.grid,
        "pass": pass,
        "conditions": conditions,
    });
    Ok(CliOutput { code: if pass { 0 } else { 1 }, stdout: to_json(&out), stderr })
}

fn merge(
    summary: &mut BTreeMap<Condition, ConditionSummary>,
    r: VerificationReport,
    context: impl FnOnce() -> Value,
) {
    let s = summary.entry(r.condition).or_insert(ConditionSummary {
        condition: r.condition,
        pass: true,
        probabilistic: false,
        comparisons: 0,
        failed_instances: 0,
        first_failure: None,
    });
    s.comparisons += r.comparisons;
    s.probabilistic |= r.probabilistic;
    if !r.pass {
        s.pass = false;
        s.failed_instances += 1;
        if s.first_failure.is_none() {
            let mut ctx = context();
            ctx["witness"] = serde_json::to_value(&r.witness).expect("witness serializes");
            s.first_failure = Some(ctx);
        }
    }
}

fn cmd_experiment(a: ExperimentArgs) -> Result<CliOutput, String> {
    if let Some(spec) = &a.dist {
        return revenue_experiment(&a, spec);
    }
    let lambdas = parse_lambda_grid(&a.lambdas)?;
    let config = ExperimentConfig::new(a.n, a.sigma, lambdas, a.trials_outer, a.trials_inner, a.seed);
    config.validate()?;
    let table = sweep_lambda(&config).map_err(|e| e.to_string())?;
    let mut csv = Vec::new();
    write_sweep_csv(&table, &mut csv).map_err(|e| e.to_string())?;
    let csv = String::from_utf8(csv).expect("csv is utf-8");
    match &a.out {
        Some(p) => {
            write_out(p, &csv)?;
            let out = json!({
                "seed": a.seed,
                "out": p,
                "lambdaStar": table.lambda_star,
                "draws": table.draws,
                "excluded": table.excluded,
            });
            Ok(CliOutput::ok(to_json(&out)))
        }
        None => Ok(CliOutput::ok(csv.trim_end().to_string())),
    }
}

pub const REVENUE_CSV_HEADER: &str = "mechanism,n,sigma,trials,mean,stderr,seed";

/// maxViVa against IDM and second price at the monopoly reserve, on a
/// depth-1 star of `n` i.i.d. bidders.
fn revenue_experiment(a: &ExperimentArgs, spec: &str) -> Result<CliOutput, String> {
    let dist = default_dist(spec)?;
    if a.n == 0 || a.trials == 0 {
        return Err("n and trials must be positive".into());
    }
    let ids: Vec<NodeId> = (1..=a.n as u32).map(NodeId).collect();
    let net = DiffusionNetwork::new(ids.clone(), ids.iter().map(|&i| (NodeId::SELLER, i))).map_err(|e| e.to_string())?;
    let reserve = invert_virtual(dist.as_ref(), 0.0).map_err(|e| e.to_string())?;
    let maxviva = MaxViVa::iid(dist.clone());
    let reserve_sp = ReserveSecondPrice { reserve };
    let mechs: [&dyn Mechanism; 3] = [&maxviva, &Idm, &reserve_sp];
    let res = paired_revenue(&mechs, &net, &iid_priors(&net, &dist), a.trials, a.seed).map_err(|e| e.to_string())?;
    let mut csv = String::from(REVENUE_CSV_HEADER);
    for e in &res.estimates {
        csv.push_str(&format!("\n{},{},{},{},{},{},{}", e.mechanism, a.n, spec, e.trials, e.mean, e.stderr, a.seed));
    }
    match &a.out {
        Some(p) => {
            write_out(p, &(csv + "\n"))?;
            Ok(CliOutput::ok(to_json(&json!({ "seed": a.seed, "out": p, "revenue": res }))))
        }
        None => Ok(CliOutput::ok(csv)),
    }
}

fn cmd_gen(a: GenArgs) -> Result<CliOutput, String> {
    if a.n == 0 {
        return Err("n must be positive".into());
    }
    if !(0.0..=1.0).contains(&a.extra) {
        return Err(format!("extra edge probability {} outside [0, 1]", a.extra));
    }
    let mut rng = trial_rng(a.seed, 0);
    let instance =
        if a.extra > 0.0 { random_network_instance(&mut rng, a.n, a.extra) } else { random_tree_instance(&mut rng, a.n) };
    let exps = a.with_exponents.then(|| random_exponents(&mut rng, &instance.network, 0.5, 3.0));
    let file = InstanceFile::from_instance(&instance, exps.as_ref().map(ExponentVector::as_map));
    let text = file.to_json();
    match &a.out {
        Some(p) => {
            write_out(p, &text)?;
            Ok(CliOutput::ok(to_json(&json!({ "seed": a.seed, "out": p, "agents": a.n }))))
        }
        None => Ok(CliOutput::ok(text)),
    }
}
