//! Narration of a whole plan, step by step, with context carried forward.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::context::InteractionContext;
use crate::eci::{DirectiveAlternative, Eci};
use crate::egt::{machine_instruction_to_eci, naive_generate, EgtConfig, EgtError};
use crate::grouping::EntityId;
use crate::predicates::PredicateKind;
use crate::scene::{MoveDirective, Plan, Scene};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GeneratorKind {
    #[default]
    Egt,
    Naive,
}

impl std::str::FromStr for GeneratorKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "egt" => Ok(GeneratorKind::Egt),
            "naive" => Ok(GeneratorKind::Naive),
            _ => Err(format!("unknown generator `{s}` (egt or naive)")),
        }
    }
}

/// Ranked alternatives for one step; `alternatives[0]` is the selected one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Narration {
    pub alternatives: Vec<DirectiveAlternative>,
}

impl Narration {
    pub fn best(&self) -> &DirectiveAlternative {
        &self.alternatives[0]
    }
}

pub fn narrate(
    generator: GeneratorKind,
    m: &MoveDirective,
    scene: &Scene,
    ctx: &InteractionContext,
    cfg: &EgtConfig,
) -> Result<Narration, EgtError> {
    let alternatives = match generator {
        GeneratorKind::Egt => machine_instruction_to_eci(m, scene, ctx, cfg)?.all,
        GeneratorKind::Naive => vec![naive_generate(m, scene, ctx, cfg)?],
    };
    Ok(Narration { alternatives })
}

/// The (relation, ground) a spoken directive names, for the dialog and
/// action context of the next step.
pub fn narrated_relation(eci: &Eci, ctx: &InteractionContext) -> Option<(PredicateKind, EntityId)> {
    match eci {
        Eci::Put { result, .. } => match result.as_ref() {
            Eci::Relation { kind, ground, .. } => Some((*kind, ground.head()?.referent.clone()?)),
            _ => None,
        },
        Eci::ActionContext { .. } => {
            let la = ctx.last_action.as_ref()?;
            Some((la.kind, EntityId::Block(ctx.last_acted.clone()?)))
        }
        _ => None,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepReport {
    pub step: usize,
    pub label: String,
    pub directive: MoveDirective,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub narration: Option<Narration>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanReport {
    pub generator: GeneratorKind,
    pub steps: Vec<StepReport>,
}

fn label(i: usize) -> String {
    if i < 26 {
        ((b'a' + i as u8) as char).to_string()
    } else {
        (i + 1).to_string()
    }
}

/// Narrates every step, assuming each directive is carried out exactly.
/// Stops at the first step that cannot be narrated.
pub fn narrate_plan(scene: &Scene, plan: &Plan, cfg: &EgtConfig, generator: GeneratorKind) -> PlanReport {
    let mut scene = scene.clone();
    let mut ctx = InteractionContext::new();
    let mut steps = Vec::new();
    for i in 0..plan.steps.len() {
        let directive = match plan.directive(i, &scene) {
            Ok(d) => d,
            Err(e) => {
                steps.push(StepReport {
                    step: i,
                    label: label(i),
                    directive: MoveDirective::new_block(plan.steps[i].to.unwrap_or_default()),
                    narration: None,
                    error: Some(e.to_string()),
                });
                break;
            }
        };
        let result = narrate(generator, &directive, &scene, &ctx, cfg).and_then(|n| {
            let (next, placed) = scene.apply_move(&directive)?;
            Ok((n, next, placed))
        });
        match result {
            Ok((n, next, placed)) => {
                let narrated = narrated_relation(&n.best().eci, &ctx);
                ctx.record_action(&placed, &next, narrated, true, &cfg.field);
                scene = next;
                steps.push(StepReport {
                    step: i,
                    label: label(i),
                    directive,
                    narration: Some(n),
                    error: None,
                });
            }
            Err(e) => {
                steps.push(StepReport {
                    step: i,
                    label: label(i),
                    directive,
                    narration: None,
                    error: Some(e.to_string()),
                });
                break;
            }
        }
    }
    PlanReport { generator, steps }
}

impl PlanReport {
    pub fn has_errors(&self) -> bool {
        self.steps.iter().any(|s| s.error.is_some())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// One row per alternative: step, best flag, directive, depth, #prop, cost.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("step\tbest\tdirective\tdepth\tprops\tcost\n");
        for s in &self.steps {
            match (&s.narration, &s.error) {
                (Some(n), _) => {
                    for (i, a) in n.alternatives.iter().enumerate() {
                        let _ = writeln!(
                            out,
                            "{}\t{}\t{}\t{}\t{}\t{:.4}",
                            s.label,
                            u8::from(i == 0),
                            a.surface,
                            a.depth,
                            a.props(),
                            a.cost
                        );
                    }
                }
                (None, Some(e)) => {
                    let _ = writeln!(out, "{}\terror\t{}\t\t\t", s.label, e);
                }
                (None, None) => {}
            }
        }
        out
    }

    pub fn to_text(&self) -> String {
        let width = self
            .steps
            .iter()
            .filter_map(|s| s.narration.as_ref())
            .flat_map(|n| n.alternatives.iter().map(|a| a.surface.len()))
            .max()
            .unwrap_or(9)
            .max(9);
        let mut out = format!("{:<4}  {:<width$}  {:>5}  {:>5}  {:>6}\n", "step", "directive", "depth", "#prop", "cost");
        for s in &self.steps {
            match (&s.narration, &s.error) {
                (Some(n), _) => {
                    for (i, a) in n.alternatives.iter().enumerate() {
                        let tag = if i == 0 { format!("{}*", s.label) } else { String::new() };
                        let _ = writeln!(
                            out,
                            "{:<4}  {:<width$}  {:>5}  {:>5}  {:>6.3}",
                            tag,
                            a.surface,
                            a.depth,
                            a.props(),
                            a.cost
                        );
                    }
                }
                (None, Some(e)) => {
                    let _ = writeln!(out, "{:<4}  error: {e}", s.label);
                }
                (None, None) => {}
            }
        }
        out
    }
}
