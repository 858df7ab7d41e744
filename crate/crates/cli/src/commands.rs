use std::path::PathBuf;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use cellforge_core::bilevel::{optimize_composition, EliminationTrace, ModuleLibrary, PlannerChoice};
use cellforge_core::metrics::{build_population, run_campaign_repeat, run_campaign_single, MetricsReport, VariantSpec};
use cellforge_core::planners::{plan as run_planner, PlanOutcome, PlannerKind};
use cellforge_core::traj::{Connector, ConnectorKind};
use cellforge_core::world::{generate_scenario, task_sequence, Complexity};
use cellforge_core::Trajectory;
use clap::{Args, ValueEnum};
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::config::{LibraryLimits, RunConfig};
use crate::inputs::{load_composition, load_library, load_population, load_scenario};
use crate::report::{csv_writer, document, num, write_file, write_json};
use crate::{Outcome, RunContext};

pub const PLAN_SCHEMA: &str = "cellforge-plan/1";
pub const METRICS_SCHEMA: &str = "cellforge-metrics/1";
pub const TRACE_SCHEMA: &str = "cellforge-trace/1";

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ComplexityArg {
    Simple,
    Complex,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum PlannerArg {
    #[value(alias = "near_optimal")]
    Dijkstra,
    Astar,
    Greedy,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum ConnectorArg {
    Deterministic,
    TwoStage,
    Sampling,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum ChoiceArg {
    NearOptimal,
    Astar,
    GreedySpline,
    GreedySampler,
}

#[derive(Debug, Args)]
pub struct GenScenarioArgs {
    /// Overrides the configured complexity class.
    #[arg(long, value_enum)]
    complexity: Option<ComplexityArg>,
    /// Scenario file; defaults to `<out>/scenario.json`.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PlanArgs {
    #[arg(long)]
    scenario: PathBuf,
    /// JSON list of module ids (needs --library) or of module specs.
    #[arg(long)]
    composition: PathBuf,
    #[arg(long)]
    library: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "dijkstra")]
    planner: PlannerArg,
    /// Defaults to deterministic for graph search and two_stage for greedy.
    #[arg(long, value_enum)]
    connector: Option<ConnectorArg>,
    /// Keep the timed trajectory of every segment in the report.
    #[arg(long)]
    embed_trajectory: bool,
    /// Write sampled (t, q, qd, qdd) rows of the whole plan.
    #[arg(long)]
    trajectory_csv: Option<PathBuf>,
    /// Report file; defaults to `<out>/plan.json`.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct MetricsArgs {
    /// Population recipe (schema cellforge-population/1).
    #[arg(long)]
    population: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "astar,spline,sampler")]
    variants: Vec<String>,
    /// Repeats per sample for the consistency protocol.
    #[arg(long)]
    repeats: Option<usize>,
    /// Skip the single-run protocol.
    #[arg(long, requires = "repeats")]
    repeats_only: bool,
}

#[derive(Debug, Args)]
pub struct OptimizeArgs {
    #[arg(long)]
    scenario: PathBuf,
    /// JSON list of module specs.
    #[arg(long)]
    library: PathBuf,
    #[arg(long, value_enum, default_value = "near_optimal")]
    planner: ChoiceArg,
    #[arg(long)]
    max_modules: Option<usize>,
    #[arg(long)]
    max_motors: Option<usize>,
    #[arg(long)]
    min_motors: Option<usize>,
}

fn secs(t: Instant) -> Value {
    json!(t.elapsed().as_secs_f64())
}

pub fn gen_scenario(ctx: &RunContext, a: GenScenarioArgs) -> Result<Outcome> {
    let mut params = ctx.config.generator.clone();
    if let Some(c) = a.complexity {
        params.complexity = match c {
            ComplexityArg::Simple => Complexity::Simple,
            ComplexityArg::Complex => Complexity::Complex,
        };
    }
    let s = generate_scenario(ctx.seed, &params)?;
    let path = a.output.unwrap_or_else(|| ctx.out.join("scenario.json"));
    let mut text = s.to_json();
    text.push('\n');
    write_file(&path, text.as_bytes())?;
    println!(
        "{}: boxes={} obstacles={} n_p={}",
        path.display(),
        s.boxes.len(),
        s.obstacles.len(),
        task_sequence(&s).len()
    );
    Ok(Outcome::Done)
}

#[derive(Serialize)]
struct PlanReport<'a> {
    schema: &'static str,
    seed: u64,
    config: RunConfig,
    planner: PlannerKind,
    connector: &'a Connector,
    composition: String,
    scenario_seed: u64,
    n_poses: usize,
    outcome: PlanOutcome,
}

pub fn plan(ctx: &RunContext, a: PlanArgs) -> Result<Outcome> {
    let s = load_scenario(&a.scenario)?;
    let library = a.library.as_deref().map(load_library).transpose()?;
    let comp = load_composition(&a.composition, library.as_deref())?;
    let kind = match a.planner {
        PlannerArg::Dijkstra => PlannerKind::Dijkstra,
        PlannerArg::Astar => PlannerKind::Astar,
        PlannerArg::Greedy => PlannerKind::Greedy,
    };
    let connector_kind = match (a.connector, kind) {
        (Some(ConnectorArg::Deterministic), _) => ConnectorKind::Deterministic,
        (Some(ConnectorArg::TwoStage), _) => ConnectorKind::TwoStage,
        (Some(ConnectorArg::Sampling), _) => ConnectorKind::Sampling,
        (None, PlannerKind::Greedy) => ConnectorKind::TwoStage,
        (None, _) => ConnectorKind::Deterministic,
    };
    let connector = ctx.config.connector(connector_kind);
    let tasks = task_sequence(&s);
    let mut outcome = run_planner(kind, &comp, &tasks, &s, &connector, &ctx.config.planner, ctx.seed);

    if let Some(path) = &a.trajectory_csv {
        write_trajectory_csv(path, &outcome, comp.n_q(), ctx.config.export_dt)?;
    }
    if !a.embed_trajectory {
        for seg in outcome.plan.iter_mut().flatten() {
            seg.edge.trajectory = None;
        }
    }
    let feasible = outcome.is_feasible();
    let cost = outcome.cost;
    let report = PlanReport {
        schema: PLAN_SCHEMA,
        seed: ctx.seed,
        config: ctx.config.reproducible(ctx.seed),
        planner: kind,
        connector: &connector,
        composition: comp.id(),
        scenario_seed: s.seed,
        n_poses: tasks.len(),
        outcome,
    };
    let path = a.output.unwrap_or_else(|| ctx.out.join("plan.json"));
    write_json(&path, &document(&report, Map::new())?)?;
    if feasible {
        println!("{}: g = {cost} s", path.display());
        Ok(Outcome::Done)
    } else {
        println!("{}: no feasible plan", path.display());
        Ok(Outcome::Infeasible)
    }
}

/// Samples every segment at `dt` and chains them on one time axis.
fn write_trajectory_csv(path: &std::path::Path, outcome: &PlanOutcome, n_q: usize, dt: f64) -> Result<()> {
    let mut w = csv_writer(path)?;
    let mut header = vec!["t".to_string()];
    for prefix in ["q", "qd", "qdd"] {
        header.extend((1..=n_q).map(|i| format!("{prefix}{i}")));
    }
    w.write_record(&header)?;
    let mut offset = 0.0;
    let trajectories: Vec<&Trajectory> = outcome
        .plan
        .iter()
        .flatten()
        .filter_map(|seg| seg.edge.trajectory.as_ref())
        .collect();
    for (k, traj) in trajectories.iter().enumerate() {
        for (i, st) in traj.samples(dt).into_iter().enumerate() {
            // Segments meet at rest; the shared instant is written once.
            if k > 0 && i == 0 {
                continue;
            }
            let mut row = vec![num(offset + st.t)];
            row.extend(st.q.iter().chain(&st.qd).chain(&st.qdd).map(|x| num(*x)));
            w.write_record(&row)?;
        }
        offset += traj.duration();
    }
    w.flush()?;
    Ok(())
}

fn variant(name: &str, cfg: &RunConfig) -> Result<VariantSpec> {
    let mut v = VariantSpec::by_name(name)
        .with_context(|| format!("unknown variant {name:?} (expected astar, spline or sampler)"))?;
    v.connector = cfg.connector(v.connector.kind());
    v.reference = cfg.connector(v.reference.kind());
    Ok(v)
}

#[derive(Serialize)]
struct VariantSummary<'a> {
    variant: &'a str,
    planner: PlannerKind,
    connector: &'a Connector,
    reference: &'a Connector,
    optimality: Option<f64>,
    robustness: Option<f64>,
    consistency: Option<f64>,
    n_samples: usize,
    n_conditioning: usize,
}

pub fn metrics(ctx: &RunContext, a: MetricsArgs) -> Result<Outcome> {
    let started = Instant::now();
    let spec = load_population(&a.population, &ctx.config.generator)?;
    let variants = a.variants.iter().map(|n| variant(n, &ctx.config)).collect::<Result<Vec<_>>>()?;
    if variants.is_empty() {
        bail!("no variants selected");
    }
    let pop = build_population(&spec, ctx.seed)?;

    let single_started = Instant::now();
    let single = if a.repeats_only {
        vec![Vec::new(); variants.len()]
    } else {
        run_campaign_single(&pop, &variants, &ctx.config.planner, ctx.seed)
    };
    let single_time = secs(single_started);
    let repeat_started = Instant::now();
    let repeats = match a.repeats {
        Some(k) => variants
            .iter()
            .map(|v| run_campaign_repeat(&pop, v, k, &ctx.config.planner, ctx.seed))
            .collect::<Result<Vec<_>, _>>()?,
        None => vec![Vec::new(); variants.len()],
    };
    let repeat_time = secs(repeat_started);
    let reports: Vec<MetricsReport> = variants
        .iter()
        .zip(single.into_iter().zip(repeats))
        .map(|(v, (rec, rep))| MetricsReport::new(&v.name, rec, rep))
        .collect();

    let out = &ctx.out;
    let mut records = csv_writer(&out.join("records.csv"))?;
    records.write_record(["variant", "sample_id", "x_ref", "theta_ref", "n_q", "complexity", "g_star", "g_hat"])?;
    let mut timing = csv_writer(&out.join("timing.csv"))?;
    timing.write_record(["variant", "sample_id", "t_star", "t_hat"])?;
    let mut reps = csv_writer(&out.join("repeats.csv"))?;
    reps.write_record(["variant", "sample_id", "repeat", "output"])?;
    for r in &reports {
        for rec in &r.records {
            let complexity = match rec.complexity {
                Complexity::Simple => "simple",
                Complexity::Complex => "complex",
            };
            records.write_record([
                r.variant.clone(),
                rec.sample_id.to_string(),
                rec.x_ref.clone(),
                rec.theta_ref.to_string(),
                rec.n_q.to_string(),
                complexity.to_string(),
                num(rec.g_star),
                num(rec.g_hat),
            ])?;
            timing.write_record([r.variant.clone(), rec.sample_id.to_string(), num(rec.t_star), num(rec.t_hat)])?;
        }
        for rep in &r.repeats {
            for (i, g) in rep.outputs.iter().enumerate() {
                reps.write_record([r.variant.clone(), rep.sample_id.to_string(), i.to_string(), num(*g)])?;
            }
        }
    }
    records.flush()?;
    timing.flush()?;
    reps.flush()?;

    let summaries: Vec<VariantSummary> = reports
        .iter()
        .zip(&variants)
        .map(|(r, v)| VariantSummary {
            variant: &r.variant,
            planner: v.planner,
            connector: &v.connector,
            reference: &v.reference,
            optimality: r.optimality,
            robustness: r.robustness,
            consistency: r.consistency,
            n_samples: r.n_samples,
            n_conditioning: r.n_conditioning,
        })
        .collect();
    let body = json!({
        "schema": METRICS_SCHEMA,
        "seed": ctx.seed,
        "config": ctx.config.reproducible(ctx.seed),
        "population": {
            "size": spec.size,
            "compositions": spec.compositions.iter().map(|c| c.id()).collect::<Vec<_>>(),
            "complexities": spec.complexities,
            "generator": spec.generator,
        },
        "single_run": !a.repeats_only,
        "repeats": a.repeats,
        "variants": summaries,
    });
    // Time gain is computed from wall-clock measurements and therefore
    // lives with the other timing values.
    let mut extra = Map::new();
    extra.insert(
        "time_gain".into(),
        Value::Object(reports.iter().map(|r| (r.variant.clone(), json!(r.time_gain))).collect()),
    );
    extra.insert("single_run_wall_time".into(), single_time);
    extra.insert("repeat_wall_time".into(), repeat_time);
    extra.insert("total_wall_time".into(), secs(started));
    write_json(&out.join("metrics.json"), &document(&body, extra)?)?;

    for r in &reports {
        let f = |x: Option<f64>| x.map_or("n/a".to_string(), |v| format!("{v:.4}"));
        println!(
            "{:<8} O={} T={} R={} C={} (samples {}, conditioning {})",
            r.variant,
            f(r.optimality),
            f(r.time_gain),
            f(r.robustness),
            f(r.consistency),
            r.n_samples,
            r.n_conditioning
        );
    }
    Ok(Outcome::Done)
}

#[derive(Serialize)]
struct TraceReport<'a> {
    schema: &'static str,
    seed: u64,
    config: RunConfig,
    planner: PlannerChoice,
    library: Vec<&'a str>,
    limits: LibraryLimits,
    trace: EliminationTrace,
}

pub fn optimize(ctx: &RunContext, a: OptimizeArgs) -> Result<Outcome> {
    let s = load_scenario(&a.scenario)?;
    let modules = load_library(&a.library)?;
    let mut limits = ctx.config.library;
    limits.max_modules = a.max_modules.unwrap_or(limits.max_modules);
    limits.max_motors = a.max_motors.unwrap_or(limits.max_motors);
    limits.min_motors = a.min_motors.unwrap_or(limits.min_motors);
    let (joint_specs, link_specs) = modules.iter().cloned().partition(|m| m.is_joint());
    let lib = ModuleLibrary {
        joint_specs,
        link_specs,
        max_modules: limits.max_modules,
        max_motors: limits.max_motors,
        min_motors: limits.min_motors,
    };
    let choice = match a.planner {
        ChoiceArg::NearOptimal => PlannerChoice::NearOptimal,
        ChoiceArg::Astar => PlannerChoice::Astar,
        ChoiceArg::GreedySpline => PlannerChoice::GreedySpline,
        ChoiceArg::GreedySampler => PlannerChoice::GreedySampler,
    };
    let started = Instant::now();
    let mut trace = optimize_composition(&s, &lib, choice, &ctx.config.bilevel(), ctx.seed)?;
    let elapsed = secs(started);
    if let Some(b) = &mut trace.best {
        for seg in b.outcome.plan.iter_mut().flatten() {
            seg.edge.trajectory = None;
        }
    }

    let out = &ctx.out;
    let mut rows = csv_writer(&out.join("compositions.csv"))?;
    rows.write_record(["index", "id", "fate", "g"])?;
    let mut times = csv_writer(&out.join("compositions_timing.csv"))?;
    times.write_record(["index", "id", "wall_time"])?;
    for f in &trace.fates {
        let fate = serde_json::to_value(f.fate)?;
        let fate = fate.as_str().unwrap_or_default().to_string();
        rows.write_record([f.index.to_string(), f.id.clone(), fate, num(f.cost)])?;
        times.write_record([f.index.to_string(), f.id.clone(), num(f.wall_time)])?;
    }
    rows.flush()?;
    times.flush()?;

    let best = trace.best.as_ref().map(|b| (b.composition.id(), b.cost));
    println!(
        "generated {} -> min motors {} -> reach {} -> payload {} -> feasible {}",
        trace.generated, trace.after_min_motors, trace.after_reach, trace.after_payload, trace.feasible
    );
    let report = TraceReport {
        schema: TRACE_SCHEMA,
        seed: ctx.seed,
        config: ctx.config.reproducible(ctx.seed),
        planner: choice,
        library: modules.iter().map(|m| m.id.as_str()).collect(),
        limits,
        trace,
    };
    let mut extra = Map::new();
    extra.insert("total_wall_time".into(), elapsed);
    write_json(&out.join("trace.json"), &document(&report, extra)?)?;
    match best {
        Some((id, g)) => {
            println!("best {id}: g = {g} s");
            Ok(Outcome::Done)
        }
        None => {
            println!("no feasible composition");
            Ok(Outcome::Infeasible)
        }
    }
}
