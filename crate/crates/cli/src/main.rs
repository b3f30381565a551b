//! `sktsp` command-line front end.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use sktsp::adaptive::{AdaptiveConfig, AdaptiveRunner};
use sktsp::evaluation::{
    check_alg_bound, check_capped_sum, check_lemma_main, monte_carlo, McReport, PolicyRef, Verdict,
};
use sktsp::exact_opt::{completion_profile, optimal_adaptive, optimal_nonadaptive, CompletionProfile, OptConfig};
use sktsp::gap::{
    example4_truncation_probability, gen_example1, gen_example2, gen_example3, gen_example4, gen_gap_instance,
    gen_random, solve_bidding_lp, verify_minimax, RandomGeometry,
};
use sktsp::model::{Instance, InstanceFile, TourMode};
use sktsp::nonadaptive::{build_nonadaptive, expected_length_exact, NonAdaptiveConfig};
use sktsp::orienteering::{Oracle, OracleKind, OrienteeringProblem};
use sktsp::scalar::{format_rational, parse_rational, rat, to_f64, Rational};

#[derive(Parser)]
#[command(name = "sktsp", version, about = "Stochastic k-TSP policies, exact optima and adaptivity-gap tools")]
struct Cli {
    /// Master seed for every randomized step.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Output file; standard output when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Report format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Overrides the instance's tour mode.
    #[arg(long, global = true, value_enum)]
    tour_mode: Option<ModeArg>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Open,
    Closed,
}

impl From<ModeArg> for TourMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Open => TourMode::Open,
            ModeArg::Closed => TourMode::Closed,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate an instance file.
    Gen {
        #[command(subcommand)]
        kind: GenKind,
    },
    /// Simulate a policy.
    Run(RunArgs),
    /// Exact optimal adaptive and non-adaptive costs of a small instance.
    Opt(InstanceArg),
    /// Solve one orienteering problem.
    Orienteer(OrienteerArgs),
    /// Online bidding LP values.
    Gaplp(GaplpArgs),
    /// Run invariant suites.
    Check(CheckArgs),
}

#[derive(Subcommand, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum GenKind {
    Example1 {
        #[arg(long)]
        l: u32,
    },
    Example2 {
        #[arg(long)]
        h: u32,
        #[arg(long)]
        t: u32,
    },
    Example3 {
        #[arg(long)]
        l: u32,
    },
    Example4 {
        #[arg(long)]
        l: u32,
        #[arg(long, default_value_t = 1)]
        h: u32,
        /// Size of the truncated cost-one family.
        #[arg(long)]
        m: Option<usize>,
    },
    Gap {
        #[arg(long)]
        n: usize,
        /// Threshold distribution as comma-separated rationals; LP-optimal when omitted.
        #[arg(long)]
        p: Option<String>,
    },
    Random {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: u64,
        #[arg(long, value_enum, default_value_t = GeometryArg::Points)]
        geometry: GeometryArg,
    },
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum GeometryArg {
    Star,
    Points,
}

#[derive(Args, Serialize)]
struct InstanceArg {
    /// Instance file.
    #[arg(long)]
    instance: PathBuf,
}

#[derive(Clone, Copy, ValueEnum, Serialize, PartialEq)]
#[serde(rename_all = "lowercase")]
enum PolicyArg {
    Adaptive,
    Nonadaptive,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum OracleArg {
    Exact,
    Knapsack,
    Heuristic,
    BruteForce,
}

impl OracleArg {
    fn kind(self) -> OracleKind {
        match self {
            OracleArg::Exact => OracleKind::exact(),
            OracleArg::Knapsack => OracleKind::Knapsack,
            OracleArg::Heuristic => OracleKind::Heuristic,
            OracleArg::BruteForce => OracleKind::BruteForce,
        }
    }
}

#[derive(Args, Serialize)]
struct RunArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long, value_enum, default_value_t = PolicyArg::Adaptive)]
    policy: PolicyArg,
    #[arg(long, default_value_t = 1000, value_parser = clap::value_parser!(u64).range(1..))]
    trials: u64,
    #[arg(long)]
    alpha_override: Option<u64>,
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    early_stop: bool,
    /// Orienteering oracle; the exact solver for the instance kind by default.
    #[arg(long, value_enum)]
    oracle: Option<OracleArg>,
    /// Attach exact optimum statistics and Lemma verdicts (small instances only).
    #[arg(long)]
    profile: bool,
    /// Also write the trace of trial 0 as JSON here.
    #[arg(long)]
    trace_out: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct OrienteerArgs {
    #[arg(long)]
    instance: PathBuf,
    /// Length budget (rational).
    #[arg(long)]
    budget: String,
    /// Comma-separated profits; expected rewards truncated at k when omitted.
    #[arg(long)]
    profits: Option<String>,
    #[arg(long, value_enum)]
    oracle: Option<OracleArg>,
}

#[derive(Args, Serialize)]
struct GaplpArgs {
    /// Single n.
    #[arg(long, conflicts_with = "max_n")]
    n: Option<usize>,
    /// Sweep n = 1..=max_n.
    #[arg(long)]
    max_n: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum, Serialize, PartialEq)]
#[serde(rename_all = "kebab-case")]
enum Suite {
    Harmonic,
    CappedSum,
    Minimax,
    Lemma,
    All,
}

#[derive(Args, Serialize)]
struct CheckArgs {
    #[arg(long, value_enum, default_value_t = Suite::All)]
    suite: Suite,
    /// Random cases per suite (instances for the Lemma suite).
    #[arg(long, default_value_t = 200, value_parser = clap::value_parser!(u64).range(1..))]
    cases: u64,
    /// Monte Carlo trials per instance for the Lemma suite.
    #[arg(long, default_value_t = 10_000, value_parser = clap::value_parser!(u64).range(1..))]
    trials: u64,
}

struct Ctx {
    seed: u64,
    out: Option<PathBuf>,
    format: Format,
    tour_mode: Option<TourMode>,
}

#[derive(Serialize)]
struct Manifest {
    tool: &'static str,
    version: &'static str,
    command: &'static str,
    config: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    instance: Option<InstanceRef>,
    seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    tour_mode: Option<&'static str>,
}

#[derive(Serialize)]
struct InstanceRef {
    path: String,
    sha256: String,
}

impl Ctx {
    fn manifest(&self, command: &'static str, config: impl Serialize, instance: Option<(&Path, &str)>) -> Manifest {
        Manifest {
            tool: "sktsp",
            version: env!("CARGO_PKG_VERSION"),
            command,
            config: serde_json::to_value(config).expect("config serializes"),
            instance: instance.map(|(p, text)| InstanceRef {
                path: p.display().to_string(),
                sha256: hex::encode(Sha256::digest(text.as_bytes())),
            }),
            seed: self.seed,
            tour_mode: self.tour_mode.map(TourMode::as_str),
        }
    }

    fn emit(&self, text: &str) -> Result<()> {
        match &self.out {
            Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
            None => {
                print!("{text}");
                Ok(())
            }
        }
    }

    /// Writes `{manifest, ...body}` as JSON, or the manifest and scalar fields
    /// as `#` lines followed by `table` as CSV.
    fn report(&self, manifest: &Manifest, body: Value, table: Option<(&[&str], Vec<Vec<String>>)>) -> Result<()> {
        let text = match self.format {
            Format::Json => {
                let mut obj = Map::new();
                obj.insert("manifest".into(), serde_json::to_value(manifest)?);
                if let Value::Object(m) = body {
                    obj.extend(m);
                }
                let mut s = serde_json::to_string_pretty(&Value::Object(obj))?;
                s.push('\n');
                s
            }
            Format::Csv => {
                let mut s = format!("# manifest {}\n", serde_json::to_string(manifest)?);
                if let Value::Object(m) = &body {
                    for (key, v) in m {
                        if key != "table" {
                            s.push_str(&format!("# {key} {}\n", serde_json::to_string(v)?));
                        }
                    }
                }
                if let Some((header, rows)) = table {
                    let mut w = csv::Writer::from_writer(Vec::new());
                    w.write_record(header)?;
                    for r in rows {
                        w.write_record(&r)?;
                    }
                    s.push_str(std::str::from_utf8(&w.into_inner()?)?);
                }
                s
            }
        };
        self.emit(&text)
    }

    fn load(&self, path: &Path) -> Result<(Instance, String)> {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let mut value: Value = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        if let Value::Object(m) = &mut value {
            m.remove("manifest");
        }
        let file: InstanceFile = serde_json::from_value(value).with_context(|| format!("schema of {}", path.display()))?;
        let mut inst = file.to_instance()?;
        if let Some(mode) = self.tour_mode {
            inst = inst.with_tour_mode(mode)?;
        }
        Ok((inst, text))
    }
}

fn rational_str(r: &Rational) -> String {
    format_rational(r)
}

fn parse_list(s: &str) -> Result<Vec<Rational>> {
    s.split(',')
        .map(|x| parse_rational(x.trim()).map_err(|e| anyhow!("{e}")))
        .collect()
}

fn cmd_gen(ctx: &Ctx, kind: &GenKind) -> Result<()> {
    let mut extra = Map::new();
    let inst = match kind {
        GenKind::Example1 { l } => gen_example1(*l)?,
        GenKind::Example2 { h, t } => gen_example2(*h, *t)?,
        GenKind::Example3 { l } => gen_example3(*l)?,
        GenKind::Example4 { l, h, m } => {
            let inst = gen_example4(*l, *h, *m)?;
            let m = m.unwrap_or_else(|| sktsp::gap::example4_default_m(*l));
            let fail = example4_truncation_probability(*l, m);
            extra.insert("truncation_failure_probability".into(), json!(to_f64(&fail)));
            inst
        }
        GenKind::Gap { n, p } => {
            let p = p.as_deref().map(parse_list).transpose()?;
            gen_gap_instance(*n, p.as_deref())?
        }
        GenKind::Random { n, k, geometry } => {
            let g = match geometry {
                GeometryArg::Star => RandomGeometry::Star,
                GeometryArg::Points => RandomGeometry::Points,
            };
            gen_random(*n, *k, ctx.seed, g)?
        }
    };
    let inst = match ctx.tour_mode {
        Some(m) => inst.with_tour_mode(m)?,
        None => inst,
    };
    let manifest = ctx.manifest("gen", kind, None);
    let mut value = serde_json::to_value(InstanceFile::from_instance(&inst))?;
    if let Value::Object(m) = &mut value {
        m.insert("manifest".into(), serde_json::to_value(&manifest)?);
        m.extend(extra.clone());
    }
    let mut text = serde_json::to_string_pretty(&value)?;
    text.push('\n');
    ctx.emit(&text)?;
    let summary = if inst.is_knapsack() {
        format!("kind=knapsack items={} k={}", inst.n() - 1, inst.k())
    } else {
        format!("kind=metric n={} k={} tour_mode={}", inst.n(), inst.k(), inst.tour_mode().as_str())
    };
    if ctx.out.is_some() {
        println!("{summary}");
    } else {
        eprintln!("{summary}");
    }
    Ok(())
}

fn exact_profile(inst: &Instance) -> Option<(Rational, CompletionProfile)> {
    let cfg = OptConfig::default();
    let policy = optimal_adaptive(inst, &cfg).ok()?;
    let profile = completion_profile(&policy, inst, None, &cfg).ok()?;
    Some((policy.value, profile))
}

fn phase_table(rep: &McReport, lemma: &[sktsp::evaluation::LemmaVerdict]) -> Vec<Vec<String>> {
    rep.phases
        .rows
        .iter()
        .map(|r| {
            let verdict = lemma
                .iter()
                .find(|v| v.phase == r.phase)
                .map_or("", |v| match v.verdict {
                    Verdict::Holds => "holds",
                    Verdict::Violated => "violated",
                    Verdict::Partial => "partial",
                });
            vec![
                r.phase.to_string(),
                r.u_hat.to_string(),
                r.u_se.to_string(),
                r.u_star.as_ref().map(rational_str).unwrap_or_default(),
                r.delta_hat.to_string(),
                r.realized_hat.to_string(),
                r.g_hat.len().to_string(),
                verdict.to_string(),
            ]
        })
        .collect()
}

fn cmd_run(ctx: &Ctx, args: &RunArgs) -> Result<bool> {
    let (inst, text) = ctx.load(&args.instance)?;
    let oracle = args.oracle.map_or_else(|| OracleKind::exact_for(&inst), OracleArg::kind);
    let manifest = ctx.manifest("run", args, Some((&args.instance, &text)));
    let mut body = Map::new();
    let rep = match args.policy {
        PolicyArg::Adaptive => {
            let cfg = AdaptiveConfig {
                rho: oracle.rho(),
                alpha_override: args.alpha_override,
                early_stop: args.early_stop,
                ..AdaptiveConfig::default()
            };
            let runner = AdaptiveRunner::new(&inst, &oracle, &cfg)?;
            let rep = monte_carlo(&inst, PolicyRef::Adaptive(&runner), args.trials, ctx.seed)?;
            if let Some(p) = &args.trace_out {
                let table = sktsp::sampler::SampleTable::new(&inst);
                let trace = runner.run(&mut sktsp::sampler::SeededSampler::new(&table, ctx.seed, 0))?;
                let records: Vec<Value> = trace
                    .records
                    .iter()
                    .map(|r| {
                        json!({
                            "phase": r.phase, "iteration": r.iteration, "walk": r.walk,
                            "observed": r.observed.iter().map(|(v, x)| json!([v, x.to_string()])).collect::<Vec<_>>(),
                            "residual_before": r.residual_before.to_string(),
                            "increment": r.increment.to_string(),
                            "length": rational_str(&r.length),
                            "expected_gain": rational_str(&r.expected_gain),
                            "idle_repeats": r.idle_repeats,
                        })
                    })
                    .collect();
                let doc = json!({
                    "manifest": manifest, "trial": 0, "records": records,
                    "total_length": rational_str(&trace.total_length),
                    "total_reward": trace.total_reward.to_string(),
                });
                fs::write(p, serde_json::to_string_pretty(&doc)? + "\n")?;
            }
            body.insert("alg_bound".into(), serde_json::to_value(check_alg_bound(&rep, &inst.cost_unit(), inst.tour_mode(), 4.0))?);
            rep
        }
        PolicyArg::Nonadaptive => {
            let cfg = NonAdaptiveConfig {
                rho: oracle.rho(),
                alpha_override: args.alpha_override,
                ..NonAdaptiveConfig::default()
            };
            let tour = build_nonadaptive(&inst, &oracle, &cfg)?;
            body.insert("tour".into(), json!(tour.walk));
            body.insert("expected_length_exact".into(), json!(rational_str(&expected_length_exact(&inst, &tour.walk))));
            monte_carlo(&inst, PolicyRef::NonAdaptive(&tour), args.trials, ctx.seed)?
        }
    };
    let mut rep = rep;
    let mut lemma = Vec::new();
    if args.profile {
        match exact_profile(&inst) {
            Some((opt, profile)) => {
                rep.phases.attach_profile(&profile);
                if args.policy == PolicyArg::Adaptive {
                    lemma = check_lemma_main(&rep.phases, Some(&profile), 3.0);
                }
                body.insert("opt_adaptive".into(), json!(rational_str(&opt)));
            }
            None => body.insert("opt_adaptive".into(), json!("unavailable: instance exceeds the exact-optimum size gate")).map_or((), |_| ()),
        }
    }
    body.insert("summary".into(), serde_json::to_value(&rep.summary)?);
    body.insert("alpha".into(), json!(rep.phases.alpha));
    body.insert("harmonic_violations".into(), json!(rep.harmonic_violations));
    let table = phase_table(&rep, &lemma);
    body.insert(
        "table".into(),
        json!(rep.phases.rows.iter().zip(&table).map(|(r, row)| json!({
            "phase": r.phase, "u_hat": r.u_hat, "u_se": r.u_se, "u_star": row[3],
            "delta_hat": r.delta_hat, "realized_hat": r.realized_hat, "g_hat": r.g_hat, "lemma": row[7],
        })).collect::<Vec<_>>()),
    );
    ctx.report(
        &manifest,
        Value::Object(body),
        Some((&["phase", "u_hat", "u_se", "u_star", "delta_hat", "realized_hat", "iterations", "lemma"], table)),
    )?;
    Ok(rep.harmonic_violations == 0)
}

fn cmd_opt(ctx: &Ctx, args: &InstanceArg) -> Result<()> {
    let (inst, text) = ctx.load(&args.instance)?;
    let cfg = OptConfig::default();
    let policy = optimal_adaptive(&inst, &cfg)?;
    let profile = completion_profile(&policy, &inst, None, &cfg)?;
    let (list, list_value) = optimal_nonadaptive(&inst, &cfg)?;
    let manifest = ctx.manifest("opt", args, Some((&args.instance, &text)));
    let rows: Vec<Vec<String>> = profile
        .beyond
        .iter()
        .enumerate()
        .map(|(i, u)| vec![i.to_string(), rational_str(u), rational_str(&profile.p_star(i))])
        .collect();
    let ratio = if policy.value.is_zero() { None } else { Some(&list_value / &policy.value) };
    let body = json!({
        "adaptive": rational_str(&policy.value),
        "adaptive_f64": to_f64(&policy.value),
        "nonadaptive": rational_str(&list_value),
        "nonadaptive_f64": to_f64(&list_value),
        "nonadaptive_list": list,
        "ratio": ratio.as_ref().map(rational_str),
        "states": policy.states(),
        "unit": rational_str(&profile.unit),
        "incomplete": rational_str(&profile.incomplete),
        "table": rows.iter().map(|r| json!({"phase": r[0], "u_star": r[1], "p_star": r[2]})).collect::<Vec<_>>(),
    });
    ctx.report(&manifest, body, Some((&["phase", "u_star", "p_star"], rows)))
}

fn cmd_orienteer(ctx: &Ctx, args: &OrienteerArgs) -> Result<()> {
    let (inst, text) = ctx.load(&args.instance)?;
    let oracle = args.oracle.map_or_else(|| OracleKind::exact_for(&inst), OracleArg::kind);
    oracle.check_instance(&inst)?;
    let budget = parse_rational(&args.budget).map_err(|e| anyhow!("{e}"))?;
    let profits = match &args.profits {
        Some(p) => parse_list(p)?,
        None => inst.rewards().iter().map(|d| d.truncated_expectation(inst.k())).collect(),
    };
    if profits.len() != inst.n() {
        bail!("expected {} profits, got {}", inst.n(), profits.len());
    }
    let problem = OrienteeringProblem::new(&inst, budget, profits)?;
    let res = oracle.solve(&problem)?;
    let manifest = ctx.manifest("orienteer", args, Some((&args.instance, &text)));
    let rho = match &res.rho {
        sktsp::orienteering::Rho::Exact => json!("exact"),
        sktsp::orienteering::Rho::Empirical { ratio_vs_exact } => json!({ "empirical_ratio_vs_exact": ratio_vs_exact }),
    };
    let body = json!({
        "oracle": oracle.name(),
        "walk": res.walk,
        "length": rational_str(&res.length),
        "profit": rational_str(&res.profit),
        "rho": rho,
    });
    let rows = res.walk.iter().enumerate().map(|(i, v)| vec![i.to_string(), v.to_string()]).collect();
    ctx.report(&manifest, body, Some((&["position", "vertex"], rows)))
}

fn cmd_gaplp(ctx: &Ctx, args: &GaplpArgs) -> Result<()> {
    let range: Vec<usize> = match (args.n, args.max_n) {
        (Some(n), _) => vec![n],
        (None, Some(m)) => (1..=m).collect(),
        (None, None) => bail!("give --n or --max-n"),
    };
    let mut rows = Vec::new();
    let mut results = Vec::new();
    for n in range {
        let r = solve_bidding_lp(n)?;
        let p: Vec<String> = r.p.iter().map(rational_str).collect();
        rows.push(vec![
            n.to_string(),
            format!("{:.12}", r.value),
            r.exact_value.as_ref().map(rational_str).unwrap_or_default(),
            format!("{:.12}", r.primal_value),
            format!("{:.12}", r.dual_value),
            format!("{:.3e}", r.gap),
            p.join(" "),
        ]);
        results.push(json!({
            "n": n, "value": r.value, "exact_value": r.exact_value.as_ref().map(rational_str),
            "primal": r.primal_value, "dual": r.dual_value, "gap": r.gap, "p": p,
            "pi": r.pi.iter().map(|(s, w)| json!({"bids": s.bids(), "weight": rational_str(w)})).collect::<Vec<_>>(),
        }));
    }
    let manifest = ctx.manifest("gaplp", args, None);
    ctx.report(
        &manifest,
        json!({ "table": results }),
        Some((&["n", "value", "exact_value", "primal", "dual", "gap", "p"], rows)),
    )
}

#[derive(Serialize)]
struct SuiteResult {
    suite: &'static str,
    cases: u64,
    failures: u64,
    passed: bool,
    note: String,
}

fn suite_capped_sum(rng: &mut ChaCha8Rng, cases: u64) -> Result<SuiteResult> {
    let mut failures = 0;
    for _ in 0..cases {
        let vars = rng.random_range(1..=6usize);
        let batch: Vec<Vec<(Rational, Rational)>> = (0..vars)
            .map(|_| {
                let den = rng.random_range(1..=12i64);
                let mut vals: Vec<i64> = (0..rng.random_range(1..=3usize)).map(|_| rng.random_range(0..=den)).collect();
                vals.sort_unstable();
                vals.dedup();
                let w: Vec<i64> = vals.iter().map(|_| rng.random_range(1..=9)).collect();
                let total: i64 = w.iter().sum();
                vals.into_iter().zip(w).map(|(v, w)| (rat(v, den), rat(w, total))).collect()
            })
            .collect();
        failures += u64::from(!check_capped_sum(&batch)?.holds);
    }
    Ok(SuiteResult { suite: "capped-sum", cases, failures, passed: failures == 0, note: String::new() })
}

fn suite_minimax(rng: &mut ChaCha8Rng, cases: u64) -> Result<SuiteResult> {
    let mut failures = 0;
    for _ in 0..cases {
        let c: Vec<Vec<Rational>> = (0..8)
            .map(|_| (0..4).map(|_| Rational::from_integer(rng.random_range(0..20i64).into())).collect())
            .collect();
        failures += u64::from(!verify_minimax(&c)?.holds);
    }
    Ok(SuiteResult { suite: "minimax", cases, failures, passed: failures == 0, note: "8x4 exact matrices".into() })
}

fn random_small(rng: &mut ChaCha8Rng, max_n: usize, max_k: u64) -> Result<Instance> {
    let g = if rng.random_bool(0.5) { RandomGeometry::Star } else { RandomGeometry::Points };
    let n = rng.random_range(3..=max_n);
    let k = rng.random_range(1..=max_k);
    Ok(gen_random(n, k, rng.random(), g)?)
}

fn suite_harmonic(rng: &mut ChaCha8Rng, cases: u64, seed: u64) -> Result<SuiteResult> {
    let instances = cases.div_ceil(500).max(1);
    let per = cases.div_ceil(instances);
    let (mut failures, mut phases) = (0, 0);
    for _ in 0..instances {
        let inst = random_small(rng, 7, 12)?;
        let oracle = OracleKind::exact();
        let runner = AdaptiveRunner::new(&inst, &oracle, &AdaptiveConfig::default())?;
        let rep = monte_carlo(&inst, PolicyRef::Adaptive(&runner), per, seed)?;
        failures += rep.harmonic_violations;
        phases += rep.harmonic_phases_checked;
    }
    Ok(SuiteResult {
        suite: "harmonic",
        cases: instances * per,
        failures,
        passed: failures == 0,
        note: format!("{instances} instances, {phases} phases"),
    })
}

fn suite_lemma(rng: &mut ChaCha8Rng, cases: u64, trials: u64, seed: u64) -> Result<SuiteResult> {
    let mut failures = 0;
    let mut phases = 0;
    for _ in 0..cases {
        let inst = random_small(rng, 8, 16)?;
        let (_, profile) = exact_profile(&inst).ok_or_else(|| anyhow!("exact optimum unavailable"))?;
        let oracle = OracleKind::exact();
        let runner = AdaptiveRunner::new(&inst, &oracle, &AdaptiveConfig::default())?;
        let rep = monte_carlo(&inst, PolicyRef::Adaptive(&runner), trials, seed)?;
        for v in check_lemma_main(&rep.phases, Some(&profile), 3.0) {
            phases += 1;
            failures += u64::from(v.verdict != Verdict::Holds);
        }
    }
    Ok(SuiteResult {
        suite: "lemma",
        cases,
        failures,
        passed: failures == 0,
        note: format!("{trials} trials per instance, {phases} phase verdicts, 3 SE slack"),
    })
}

fn cmd_check(ctx: &Ctx, args: &CheckArgs) -> Result<bool> {
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
    let want = |s: Suite| args.suite == Suite::All || args.suite == s;
    let mut results = Vec::new();
    if want(Suite::CappedSum) {
        results.push(suite_capped_sum(&mut rng, args.cases)?);
    }
    if want(Suite::Minimax) {
        results.push(suite_minimax(&mut rng, args.cases)?);
    }
    if want(Suite::Harmonic) {
        results.push(suite_harmonic(&mut rng, args.cases, ctx.seed)?);
    }
    if want(Suite::Lemma) {
        let instances = if args.suite == Suite::All { args.cases.min(3) } else { args.cases };
        results.push(suite_lemma(&mut rng, instances, args.trials, ctx.seed)?);
    }
    let ok = results.iter().all(|r| r.passed);
    let rows = results
        .iter()
        .map(|r| vec![r.suite.to_string(), r.cases.to_string(), r.failures.to_string(), r.passed.to_string(), r.note.clone()])
        .collect();
    let manifest = ctx.manifest("check", args, None);
    ctx.report(
        &manifest,
        json!({ "passed": ok, "table": results }),
        Some((&["suite", "cases", "failures", "passed", "note"], rows)),
    )?;
    Ok(ok)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let ctx = Ctx {
        seed: cli.seed,
        out: cli.out,
        format: cli.format,
        tour_mode: cli.tour_mode.map(Into::into),
    };
    let result = match &cli.command {
        Command::Gen { kind } => cmd_gen(&ctx, kind).map(|_| true),
        Command::Run(a) => cmd_run(&ctx, a),
        Command::Opt(a) => cmd_opt(&ctx, a).map(|_| true),
        Command::Orienteer(a) => cmd_orienteer(&ctx, a).map(|_| true),
        Command::Gaplp(a) => cmd_gaplp(&ctx, a).map(|_| true),
        Command::Check(a) => cmd_check(&ctx, a),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("error: one or more checks failed");
            ExitCode::FAILURE
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
