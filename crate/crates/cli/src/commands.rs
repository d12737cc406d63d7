//! The subcommands, as functions from inputs to output text.

use std::fs;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use egt_core::cost::fit_observed;
use egt_core::grouping::candidate_set;
use egt_core::predicates::{default_height, sample_field};
use egt_core::report::{narrate_plan, GeneratorKind, PlanReport};
use egt_core::scene::load_scene;
use egt_core::stats::{analyze, normalize_times, welch_t_test, LogEntry};
use egt_core::{CandidateSet, CoefficientTable, EgtConfig, EntityId, GroupId, Plan, PredicateKind, Scene};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum ReportFormat {
    Text,
    Json,
    Tsv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum FieldFormat {
    Text,
    Pgm,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

pub fn read_scene(path: &Path) -> Result<Scene> {
    load_scene(&read(path)?).with_context(|| format!("loading scene {}", path.display()))
}

pub fn read_plan(path: &Path) -> Result<Plan> {
    Plan::parse(&read(path)?).with_context(|| format!("loading plan {}", path.display()))
}

/// Default configuration, with the coefficient table from `coeffs` if given.
pub fn load_config(coeffs: Option<&Path>) -> Result<EgtConfig> {
    match coeffs {
        None => Ok(EgtConfig::default()),
        Some(p) => {
            let table = CoefficientTable::from_json(&read(p)?)
                .with_context(|| format!("loading coefficients {}", p.display()))?;
            Ok(EgtConfig::with_coefficients(table))
        }
    }
}

pub fn generate(scene: &Scene, plan: &Plan, cfg: &EgtConfig, generator: GeneratorKind, format: ReportFormat) -> (String, PlanReport) {
    let report = narrate_plan(scene, plan, cfg, generator);
    let out = match format {
        ReportFormat::Text => report.to_text(),
        ReportFormat::Json => report.to_json() + "\n",
        ReportFormat::Tsv => report.to_tsv(),
    };
    (out, report)
}

/// `table`, a group id such as `stack:a+b`, or a block id.
pub fn parse_entity(s: &str, cs: &CandidateSet) -> Result<EntityId> {
    if s == "table" {
        return Ok(EntityId::Table);
    }
    let group = EntityId::Group(GroupId(s.to_string()));
    if cs.contains(&group) {
        return Ok(group);
    }
    let block = EntityId::block(s);
    if cs.contains(&block) {
        return Ok(block);
    }
    let known: Vec<String> = cs.entities().iter().map(ToString::to_string).collect();
    bail!("no entity `{s}` in the scene (known: {})", known.join(", "))
}

/// One line per entity: id, kind, and members for groups.
pub fn list_entities(scene: &Scene) -> String {
    let cs = candidate_set(scene);
    let mut out = String::new();
    for e in cs.entities() {
        let kind = cs.ref_kind(&e).map_or("?", |k| k.noun());
        match &e {
            EntityId::Group(g) => {
                let group = cs.group(g).expect("listed");
                let members: Vec<&str> = group.members.iter().map(|m| m.as_str()).collect();
                out.push_str(&format!("{e}\t{kind}\t{}\n", members.join(" ")));
            }
            _ => out.push_str(&format!("{e}\t{kind}\n")),
        }
    }
    out
}

pub struct FieldRequest<'a> {
    pub relation: &'a str,
    pub ground: &'a str,
    pub resolution: usize,
    pub heights: Vec<f64>,
    pub format: FieldFormat,
}

pub fn field_viz(scene: &Scene, req: &FieldRequest<'_>, cfg: &EgtConfig) -> Result<Vec<u8>> {
    let kind = PredicateKind::parse(req.relation).ok_or_else(|| anyhow!("unknown relation `{}`", req.relation))?;
    let cs = candidate_set(scene);
    let ground = parse_entity(req.ground, &cs)?;
    if kind.is_table_only() != (ground == EntityId::Table) && kind != PredicateKind::Near && kind != PredicateKind::Far {
        bail!("`{}` does not take `{}` as its ground", kind.name(), req.ground);
    }
    let heights = if req.heights.is_empty() {
        vec![default_height(kind, &ground, &cs)]
    } else {
        req.heights.clone()
    };
    let res = req.resolution.max(2);
    let f = sample_field(kind, &ground, &cs, &cfg.field, (res, res), &heights);
    Ok(match req.format {
        FieldFormat::Text => f.to_text().into_bytes(),
        FieldFormat::Pgm => f.to_pgm(),
    })
}

/// Log entries from session files or plain entry-per-line files. Session
/// records other than actions are skipped.
pub fn read_log(path: &Path) -> Result<Vec<LogEntry>> {
    let text = read(path)?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let v: serde_json::Value =
            serde_json::from_str(line).with_context(|| format!("{}:{}", path.display(), i + 1))?;
        match v.get("event").and_then(|e| e.as_str()) {
            Some("action") | None => out.push(
                serde_json::from_value(v).with_context(|| format!("{}:{}: not a log entry", path.display(), i + 1))?,
            ),
            Some(_) => {}
        }
    }
    Ok(out)
}

pub fn read_logs(paths: &[impl AsRef<Path>]) -> Result<Vec<LogEntry>> {
    let mut all = Vec::new();
    for p in paths {
        all.extend(read_log(p.as_ref())?);
    }
    Ok(all)
}

/// Regresses normalized response time on the feature counts. Cells that
/// never occur in the log, or cannot be separated from the others, keep
/// weight 0.
pub fn fit_cost(log: &[LogEntry]) -> Result<(CoefficientTable, String)> {
    let samples = normalize_times(log)?;
    let fit = fit_observed(&samples)?;
    let names = |cells: &[(egt_core::FeatureCategory, usize)]| {
        cells.iter().map(|(c, d)| format!("{}@{d}", c.acronym())).collect::<Vec<_>>().join(" ")
    };
    let mut note = format!("fitted {} cells from {} entries: {}", fit.fitted.len(), samples.len(), names(&fit.fitted));
    if !fit.dependent.is_empty() {
        note.push_str(&format!("; left at 0 as linearly dependent: {}", names(&fit.dependent)));
    }
    Ok((fit.table, note))
}

pub fn analyze_log(log: &[LogEntry], json: bool) -> Result<String> {
    if log.is_empty() {
        bail!("the log has no entries");
    }
    let a = analyze(log);
    Ok(if json {
        serde_json::to_string_pretty(&a)? + "\n"
    } else {
        a.to_text()
    })
}

/// A comma-separated list of numbers, or a log file whose response times
/// are taken.
pub fn read_sample(arg: &str) -> Result<Vec<f64>> {
    let p = Path::new(arg);
    if p.is_file() {
        return Ok(read_log(p)?.iter().map(|e| e.response_time).collect());
    }
    arg.split(',')
        .map(|s| s.trim().parse::<f64>().with_context(|| format!("`{s}` is not a number")))
        .collect()
}

pub fn ttest(a: &[f64], b: &[f64]) -> Result<String> {
    let r = welch_t_test(a, b)?;
    Ok(format!("t = {:.4}\ndf = {:.4}\np = {:.6}\n", r.t, r.df, r.p))
}
