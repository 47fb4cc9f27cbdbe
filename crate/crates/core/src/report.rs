//! JSON (schema 1) and plain-text renderings of procedure results.
//!
//! Reports carry no timings or other run-dependent data, so identical
//! inputs give byte-identical output.

use std::fmt::Write as _;

use num_traits::Zero;
use serde_json::{json, Map, Value};

use crate::beliefs::coprofile_label;
use crate::best_reply::Optimality;
use crate::game_core::{ProductRestriction, StrategySpace};
use crate::layers::Obstruction;
use crate::procedures::{Analysis, Audit, Failure, ProcedureTrace, ReducedReport, Refutation, TheoremViolation, VerifyReport, ViolationKind, WitnessBelief};

pub const SCHEMA: u64 = 1;

fn space_name(space: StrategySpace) -> &'static str {
    match space {
        StrategySpace::Full => "full",
        StrategySpace::Reduced => "reduced",
    }
}

fn optimality_name(opt: Optimality) -> &'static str {
    match opt {
        Optimality::Sequential => "sequential",
        Optimality::WeakSequential => "weak-sequential",
    }
}

pub fn set_json(analysis: &Analysis<'_>, q: &ProductRestriction) -> Value {
    let form = &analysis.form;
    let mut map = Map::new();
    for (i, name) in form.game().players().iter().enumerate() {
        let names: Vec<Value> = q.sets[i].iter().map(|&s| Value::String(form.strategy_name(i, s))).collect();
        map.insert(name.clone(), Value::Array(names));
    }
    Value::Object(map)
}

pub fn game_json(analysis: &Analysis<'_>, source: &str) -> Value {
    json!({
        "source": source,
        "players": analysis.form.game().players(),
        "histories": analysis.form.game().histories().len(),
        "strategy_space": space_name(analysis.form.space()),
        "strategies": set_json(analysis, &analysis.form.full_restriction()),
    })
}

fn audit_json(a: &Audit) -> Value {
    json!({ "valid": a.valid, "restrictions": a.restrictions, "best_reply": a.best_reply })
}

fn refutation_json(analysis: &Analysis<'_>, player: usize, r: &Refutation) -> Value {
    let game = analysis.form.game();
    json!({
        "history": game.history_label(game.histories()[r.history]),
        "against_step": r.against_step,
        "replacement": analysis.form.strategy_name(player, r.replacement),
        "certificate": r.certificate.to_json(&analysis.form),
        "verified": analysis.verify_refutation(player, r),
    })
}

fn obstruction_json(analysis: &Analysis<'_>, f: &Failure, o: &Obstruction, optimality: Optimality) -> Value {
    let form = &analysis.form;
    let game = form.game();
    let layers: Vec<Value> = o
        .layers
        .iter()
        .map(|layer| {
            let measure: Vec<Value> = layer
                .measure
                .iter()
                .enumerate()
                .filter(|(_, w)| !w.is_zero())
                .map(|(x, w)| json!([coprofile_label(form, f.player, x), w.to_string()]))
                .collect();
            let dual: Vec<Value> = layer
                .dual
                .iter()
                .zip(&o.requirements)
                .filter(|(w, _)| !w.is_zero())
                .map(|(w, r)| {
                    json!({
                        "history": game.history_label(game.histories()[r.history]),
                        "target": form.strategy_name(f.player, r.target),
                        "alternative": form.strategy_name(f.player, r.alternative),
                        "weight": w.to_string(),
                    })
                })
                .collect();
            json!({ "measure": measure, "dual": dual })
        })
        .collect();
    json!({
        "kind": o.kind.name(),
        "layers": layers,
        "verified": analysis.verify_obstruction(f.step, f.player, f.strategy, optimality, o),
    })
}

fn failure_json(analysis: &Analysis<'_>, f: &Failure, optimality: Optimality) -> Value {
    json!({
        "procedure": f.procedure.name(),
        "step": f.step,
        "player": analysis.form.game().players()[f.player],
        "strategy": analysis.form.strategy_name(f.player, f.strategy),
        "audit": audit_json(&f.audit),
        "refutation": f.refutation.as_ref().map(|r| refutation_json(analysis, f.player, r)),
        "obstruction": f.obstruction.as_ref().map(|o| obstruction_json(analysis, f, o, optimality)),
    })
}

pub fn trace_json(analysis: &Analysis<'_>, trace: &ProcedureTrace) -> Value {
    let form = &analysis.form;
    let players = form.game().players();
    let steps: Vec<Value> = trace.steps.iter().enumerate().map(|(n, q)| json!({ "step": n, "sets": set_json(analysis, q) })).collect();
    let exclusions: Vec<Value> = trace
        .exclusions
        .iter()
        .map(|e| {
            json!({
                "step": e.step,
                "player": players[e.player],
                "strategy": form.strategy_name(e.player, e.strategy),
                "certificate": e.certificate.to_json(form),
                "verified": e.verified,
            })
        })
        .collect();
    let witnesses: Vec<Value> = trace
        .witnesses
        .iter()
        .map(|w| {
            let belief = match &w.belief {
                WitnessBelief::Cnps(b) => b.to_json(form),
                WitnessBelief::Cps(b) => b.to_json(form, &analysis.families[w.player]),
            };
            json!({
                "step": w.step,
                "player": players[w.player],
                "strategy": form.strategy_name(w.player, w.strategy),
                "belief": belief,
                "audit": audit_json(&w.audit),
            })
        })
        .collect();
    let failures: Vec<Value> = trace.failures.iter().map(|f| failure_json(analysis, f, trace.optimality)).collect();
    json!({
        "procedure": trace.procedure.name(),
        "strategy_space": space_name(trace.space),
        "optimality": optimality_name(trace.optimality),
        "fixpoint": trace.fixpoint,
        "degree_bound": trace.degree_bound,
        "steps": steps,
        "exclusions": exclusions,
        "witnesses": witnesses,
        "failures": failures,
        "verified": trace.is_verified(),
    })
}

pub fn procedure_report(analysis: &Analysis<'_>, source: &str, trace: &ProcedureTrace) -> Value {
    json!({
        "schema": SCHEMA,
        "command": trace.procedure.name(),
        "game": game_json(analysis, source),
        "trace": trace_json(analysis, trace),
    })
}

fn violation_json(analysis: &Analysis<'_>, v: &TheoremViolation, optimality: Optimality) -> Value {
    json!({
        "theorem": v.theorem,
        "step": v.step,
        "player": analysis.form.game().players()[v.player],
        "strategy": analysis.form.strategy_name(v.player, v.strategy),
        "kind": match v.kind { ViolationKind::Refuted => "refuted", ViolationKind::Unverified => "unverified" },
        "failure": failure_json(analysis, &v.failure, optimality),
    })
}

fn counts(trace: &ProcedureTrace) -> Value {
    json!({
        "witnesses": trace.witnesses.len(),
        "passed": trace.witnesses.iter().filter(|w| w.audit.passed()).count(),
    })
}

pub fn verify_json(analysis: &Analysis<'_>, report: &VerifyReport) -> Value {
    let sizes = |q: &ProductRestriction| Value::from(q.sizes());
    let steps: Vec<Value> = report
        .ia
        .steps
        .iter()
        .enumerate()
        .map(|(n, q)| {
            json!({
                "step": n,
                "ia": sizes(q),
                "pr_cnps": sizes(&report.cnps.steps[n]),
                "pr_cps": sizes(&report.cps.steps[n]),
                "audited": n < report.verified_steps,
            })
        })
        .collect();
    json!({
        "fixpoint": report.ia.fixpoint,
        "strategy_space": space_name(report.settings.space),
        "optimality": optimality_name(report.settings.optimality),
        "steps": steps,
        "exclusions": {
            "total": report.ia.exclusions.len(),
            "verified": report.ia.exclusions.iter().filter(|e| e.verified).count(),
        },
        "pr_cnps": counts(&report.cnps),
        "pr_cps": counts(&report.cps),
        "violations": report.violations.iter().map(|v| violation_json(analysis, v, report.settings.optimality)).collect::<Vec<_>>(),
        "status": if report.violations.is_empty() { "ok" } else { "violation" },
    })
}

pub fn verify_report(analysis: &Analysis<'_>, source: &str, report: &VerifyReport) -> Value {
    json!({
        "schema": SCHEMA,
        "command": "verify",
        "game": game_json(analysis, source),
        "result": verify_json(analysis, report),
    })
}

pub fn reduced_report(analysis: &Analysis<'_>, source: &str, report: &ReducedReport) -> Value {
    json!({
        "schema": SCHEMA,
        "command": "reduced",
        "game": game_json(analysis, source),
        "result": verify_json(analysis, &report.verify),
        "projection_matches": report.projection_matches,
    })
}

fn set_line(analysis: &Analysis<'_>, q: &ProductRestriction) -> String {
    let form = &analysis.form;
    form.game()
        .players()
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let names: Vec<String> = q.sets[i].iter().map(|&s| form.strategy_name(i, s)).collect();
            format!("{p}: {{{}}}", names.join(", "))
        })
        .collect::<Vec<_>>()
        .join("  ")
}

pub fn trace_table(analysis: &Analysis<'_>, source: &str, trace: &ProcedureTrace) -> String {
    let form = &analysis.form;
    let mut out = String::new();
    let _ = writeln!(out, "{source}: {} ({}, {})", trace.procedure.name(), space_name(trace.space), optimality_name(trace.optimality));
    for (n, q) in trace.steps.iter().enumerate() {
        let _ = writeln!(out, "  step {n:>2}  {}", set_line(analysis, q));
    }
    let _ = writeln!(out, "  fixpoint N = {}", trace.fixpoint);
    for e in &trace.exclusions {
        let cert: Vec<String> = e.certificate.weights.iter().map(|(s, w)| format!("{w}*{}", form.strategy_name(e.player, *s))).collect();
        let _ = writeln!(
            out,
            "  step {:>2}  removed {}:{} dominated by {}{}",
            e.step,
            form.game().players()[e.player],
            form.strategy_name(e.player, e.strategy),
            cert.join(" + "),
            if e.verified { "" } else { " [UNVERIFIED]" }
        );
    }
    if !trace.witnesses.is_empty() {
        let passed = trace.witnesses.iter().filter(|w| w.audit.passed()).count();
        let _ = writeln!(out, "  witnesses {passed}/{} verified", trace.witnesses.len());
    }
    for f in &trace.failures {
        let _ = writeln!(out, "  {}", failure_line(analysis, f));
    }
    out
}

fn failure_line(analysis: &Analysis<'_>, f: &Failure) -> String {
    let form = &analysis.form;
    let who = format!("{}:{}", form.game().players()[f.player], form.strategy_name(f.player, f.strategy));
    match &f.refutation {
        Some(r) => {
            let game = form.game();
            format!(
                "step {:>2}  {who} refuted: at {} its replacement {} is dominated against step-{} survivors",
                f.step,
                game.history_label(game.histories()[r.history]),
                form.strategy_name(f.player, r.replacement),
                r.against_step
            )
        }
        None => match &f.obstruction {
            Some(o) => format!("step {:>2}  {who} refuted: {} layers get stuck after {}", f.step, o.kind.name(), o.layers.len()),
            None => format!("step {:>2}  {who} witness failed ({:?}), no refutation found", f.step, f.audit),
        },
    }
}

pub fn verify_table(analysis: &Analysis<'_>, source: &str, report: &VerifyReport) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{source}: verify ({}, {})",
        space_name(report.settings.space),
        optimality_name(report.settings.optimality)
    );
    let _ = writeln!(out, "  {:>4}  {:<14} {}", "step", "sizes", "audited");
    for (n, q) in report.ia.steps.iter().enumerate() {
        let sizes: Vec<String> = q.sizes().iter().map(usize::to_string).collect();
        let _ = writeln!(out, "  {n:>4}  {:<14} {}", sizes.join("x"), if n < report.verified_steps { "yes" } else { "no" });
    }
    let _ = writeln!(out, "  fixpoint N = {}", report.ia.fixpoint);
    for v in &report.violations {
        let _ = writeln!(out, "  VIOLATION (equality {}): {}", v.theorem, failure_line(analysis, &v.failure));
    }
    if report.violations.is_empty() {
        let _ = writeln!(out, "  ok");
    }
    out
}
