use homoclinic::chart::{chart_transversality, torus_transversality, ChartTransition, TransversalityReport, Verdict};
use homoclinic::loop_profile::{loop_profile, LoopProfile};
use homoclinic::melnikov::{
    lambda_zero, perturbed_loop_verdict, special_loop_verdict, MelnikovOptions, MelnikovResult, MelnikovVerdict,
};
use homoclinic::model::{
    builtin_model, builtin_model_unchecked, pendula_weak_special_loop, validate_hypotheses, Builtin, BuiltinKind,
    ValidationReport,
};
use homoclinic::riccati::{solve_riccati, RiccatiInitial, RiccatiOptions, RiccatiSolution};
use homoclinic::Error;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::config::{Format, Grid, RunConfig};
use crate::table::{fmt_f64, Table};
use crate::CliError;

/// What a command produced: the document, the exit code, and notes for stderr.
#[derive(Debug)]
pub struct Outcome {
    pub body: String,
    pub code: i32,
    pub notes: Vec<String>,
}

impl Outcome {
    fn new(body: String) -> Self {
        Self { body, code: 0, notes: Vec::new() }
    }
}

fn to_json<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("plain data serializes") + "\n"
}

/// Builds the model. A construction error that comes from a violated
/// hypothesis is reported as such rather than as a usage error.
pub fn load_model(cfg: &RunConfig) -> Result<Builtin, CliError> {
    match builtin_model(&cfg.model, &cfg.params) {
        Ok(b) => Ok(b),
        Err(Error::Construction(msg)) => match builtin_model_unchecked(&cfg.model, &cfg.params) {
            Ok(b) => {
                let r = validate_hypotheses(&b.model);
                if r.passed() {
                    Err(CliError::Usage(msg))
                } else {
                    Err(CliError::Hypothesis(format!("{msg}; {} failed", r.failed().join(", "))))
                }
            }
            Err(_) => Err(CliError::Usage(msg)),
        },
        Err(e) => Err(e.into()),
    }
}

fn profile_of(b: &Builtin) -> Result<LoopProfile, CliError> {
    let r = validate_hypotheses(&b.model);
    if !r.passed() {
        return Err(CliError::Hypothesis(format!("{}: {} failed", b.model.name, r.failed().join(", "))));
    }
    Ok(loop_profile(&b.model)?)
}

pub fn validate(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let b = match builtin_model(&cfg.model, &cfg.params) {
        Ok(b) => b,
        Err(Error::Construction(msg)) => builtin_model_unchecked(&cfg.model, &cfg.params).map_err(|_| CliError::Usage(msg))?,
        Err(e) => return Err(e.into()),
    };
    let report = validate_hypotheses(&b.model);
    let mut out = Outcome::new(render_validation(&report, cfg.format.unwrap_or(Format::Json)));
    if !report.passed() {
        out.code = 1;
        out.notes = report.failed().iter().map(|n| format!("{n} failed")).collect();
    }
    Ok(out)
}

fn render_validation(r: &ValidationReport, format: Format) -> String {
    match format {
        Format::Json => to_json(&json!({ "model": r.model, "passed": r.passed(), "checks": r.checks })),
        Format::Csv => {
            let mut t = Table::new(&["check", "passed", "worst", "at", "detail"]);
            t.meta("model", &r.model).meta("passed", r.passed());
            for c in &r.checks {
                t.push(vec![
                    c.name.clone(),
                    c.passed.to_string(),
                    fmt_f64(c.worst),
                    c.at.map(fmt_f64).unwrap_or_default(),
                    c.detail.clone(),
                ]);
            }
            t.to_csv_string()
        }
    }
}

/// Solves up to `target`, backing off once from a blow-up so that the part
/// of the curve before the pole is still available.
fn solve_to(profile: &LoopProfile, target: f64, opts: &RiccatiOptions) -> Result<(RiccatiSolution, Option<f64>), CliError> {
    match solve_riccati(profile, target, opts) {
        Ok(s) => Ok((s, None)),
        Err(Error::BlowUp { q, .. }) => {
            let back = q - 1e-3 * q.abs().max(1e-3) * target.signum();
            if back * target <= 0.0 {
                return Err(CliError::Numerical(format!("blow-up right next to the start, at q1 = {q}")));
            }
            let s = solve_riccati(profile, back, opts)?;
            Ok((s, Some(q)))
        }
        Err(e) => Err(e.into()),
    }
}

#[derive(Debug, Serialize)]
struct RiccatiDoc<'a> {
    model: &'a str,
    initial: RiccatiInitial,
    diagnostics: Vec<homoclinic::riccati::RiccatiDiagnostics>,
    blow_up: bool,
    blow_up_q: Option<f64>,
    rows: Vec<[f64; 2]>,
}

pub fn riccati(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let b = load_model(cfg)?;
    let profile = profile_of(&b)?;
    let grid = cfg.q_grid.unwrap_or(Grid { start: 0.0, end: b.q1_star, n: 41 });
    let pts = grid.points();
    let mut rows: Vec<[f64; 2]> = Vec::new();
    let mut diagnostics = Vec::new();
    let mut pole = None;
    let mut initial = None;
    let hi = pts.iter().cloned().fold(0.0, f64::max);
    let lo = pts.iter().cloned().fold(0.0, f64::min);
    for target in [lo, hi] {
        if target == 0.0 {
            continue;
        }
        let (sol, blow) = solve_to(&profile, target, &cfg.solver)?;
        initial = Some(sol.initial);
        diagnostics.push(sol.diagnostics.clone());
        pole = pole.or(blow);
        for &q in pts.iter().filter(|&&q| q * target > 0.0) {
            if let Ok(t) = sol.eval(q) {
                rows.push([q, t]);
            }
        }
    }
    let initial = match initial {
        Some(i) => i,
        None => homoclinic::riccati::riccati_initial(&profile)?,
    };
    if pts.contains(&0.0) {
        rows.push([0.0, initial.t0]);
    }
    rows.sort_by(|a, b| a[0].total_cmp(&b[0]));

    let body = match cfg.format.unwrap_or(Format::Csv) {
        Format::Json => to_json(&RiccatiDoc {
            model: &b.model.name,
            initial,
            diagnostics: diagnostics.clone(),
            blow_up: pole.is_some(),
            blow_up_q: pole,
            rows: rows.clone(),
        }),
        Format::Csv => {
            let mut t = Table::new(&["q1", "tu"]);
            t.meta("model", &b.model.name)
                .meta("t0", fmt_f64(initial.t0))
                .meta("discriminant", fmt_f64(initial.discriminant))
                .meta("psi0", fmt_f64(initial.psi0))
                .meta("rtol", fmt_f64(cfg.solver.rtol))
                .meta("atol", fmt_f64(cfg.solver.atol))
                .meta("blow_up", pole.is_some());
            if let Some(q) = pole {
                t.meta("blow_up_q", fmt_f64(q));
            }
            for (k, d) in diagnostics.iter().enumerate() {
                t.meta(&format!("epsilon_{k}"), fmt_f64(d.epsilon))
                    .meta(&format!("steps_{k}"), d.steps)
                    .meta(&format!("start_correction_{k}"), fmt_f64(d.start_correction));
                if let Some(s) = d.startup_spread {
                    t.meta(&format!("startup_spread_{k}"), fmt_f64(s));
                }
            }
            for r in &rows {
                t.push_numbers(r);
            }
            t.to_csv_string()
        }
    };
    let mut out = Outcome::new(body);
    if let Some(q) = pole {
        out.code = 3;
        out.notes.push(format!("curvature blows up near q1 = {q}; rows stop before it"));
    }
    if diagnostics.iter().any(|d| d.startup_ok == Some(false)) {
        out.notes.push("start-up check: solutions from nearby starts disagree beyond rtol".into());
    }
    Ok(out)
}

fn transversality_report(b: &Builtin, cfg: &RunConfig) -> Result<TransversalityReport, CliError> {
    let profile = profile_of(b)?;
    let r = match (b.model.periodic, cfg.q1_star) {
        (true, None) => torus_transversality(&profile, &cfg.solver, &cfg.tolerances)?,
        (true, Some(q)) => chart_transversality(&profile, &ChartTransition::torus(), q, &cfg.solver, &cfg.tolerances)?,
        (false, q) => chart_transversality(&profile, &b.transition, q.unwrap_or(b.q1_star), &cfg.solver, &cfg.tolerances)?,
    };
    Ok(r)
}

pub fn transversality(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let b = load_model(cfg)?;
    let r = transversality_report(&b, cfg)?;
    let body = match cfg.format.unwrap_or(Format::Json) {
        Format::Json => to_json(&json!({ "model": b.model.name, "report": r })),
        Format::Csv => {
            let mut t = Table::new(&["verdict", "q1_star", "tu", "ts_hat", "gap", "tol", "tol_tangent"]);
            t.meta("model", &b.model.name)
                .meta("route", &r.route)
                .meta("rtol_used", fmt_f64(r.rtol_used))
                .meta("refinements", r.refinements)
                .meta("epsilon", fmt_f64(r.riccati.epsilon))
                .meta("steps", r.riccati.steps);
            let mut row = vec![verdict_name(r.verdict).to_string()];
            row.extend([r.q1_star, r.tu, r.ts_hat, r.gap, r.tol, r.tol_tangent].map(fmt_f64));
            t.push(row);
            t.to_csv_string()
        }
    };
    let mut out = Outcome::new(body);
    if r.verdict == Verdict::Inconclusive {
        out.notes.push(format!("gap {:e} lies between the tangent and transversal bands even at rtol {:e}", r.gap, r.rtol_used));
    }
    Ok(out)
}

fn verdict_name(v: Verdict) -> &'static str {
    match v {
        Verdict::Transversal => "transversal",
        Verdict::Tangent => "tangent",
        Verdict::Inconclusive => "inconclusive",
    }
}

fn melnikov_name(v: MelnikovVerdict) -> &'static str {
    match v {
        MelnikovVerdict::TransversalLoop => "transversal_loop",
        MelnikovVerdict::PerturbedLoopTransversal => "perturbed_loop_transversal",
        MelnikovVerdict::Degenerate => "degenerate",
        MelnikovVerdict::Inapplicable => "inapplicable",
    }
}

fn lambda_of(cfg: &RunConfig) -> f64 {
    cfg.params.get("lambda").and_then(|v| v.first().copied()).unwrap_or(1.0)
}

/// Within this distance of λ0 the sign argument for `L̃''(0)` is close to
/// failing, so the verdict rests on the computed value alone.
const THRESHOLD_BAND: f64 = 0.05;

fn threshold_note(lambda: f64, ddl0: f64) -> Option<String> {
    let l0 = lambda_zero();
    if (lambda - l0).abs() < THRESHOLD_BAND {
        Some(format!(
            "lambda = {lambda} is within {THRESHOLD_BAND} of lambda0 = {l0:.8}; L''(0) = {ddl0:.6e} is a computed value, not a sign guarantee"
        ))
    } else if lambda > l0 {
        Some(format!("lambda = {lambda} is above lambda0 = {l0:.8}; L''(0) = {ddl0:.6e} is a computed value, not a sign guarantee"))
    } else {
        None
    }
}

fn melnikov_run(b: &Builtin, cfg: &RunConfig, grid: &Grid) -> Result<MelnikovResult, CliError> {
    let pert = b
        .perturbation
        .as_ref()
        .ok_or_else(|| CliError::Usage(format!("model '{}' has no perturbation to integrate", cfg.model)))?;
    profile_of(b)?;
    Ok(perturbed_loop_verdict(pert, &grid.points(), &MelnikovOptions::default()))
}

pub fn melnikov(cfg: &RunConfig, special_loop: bool) -> Result<Outcome, CliError> {
    let b = load_model(cfg)?;
    if special_loop {
        return melnikov_special(&b, cfg);
    }
    let grid = cfg.s_grid.unwrap_or(Grid { start: -4.0, end: 4.0, n: 33 });
    let r = melnikov_run(&b, cfg, &grid)?;
    let note = (b.kind == BuiltinKind::PendulaWeak).then(|| threshold_note(lambda_of(cfg), r.ddl0)).flatten();
    let body = match cfg.format.unwrap_or(Format::Csv) {
        Format::Json => to_json(&json!({
            "model": b.model.name,
            "verdict": melnikov_name(r.verdict),
            "lambda0": lambda_zero(),
            "threshold_note": note,
            "result": r,
        })),
        Format::Csv => {
            let mut t = Table::new(&["s", "L"]);
            t.meta("model", &b.model.name)
                .meta("verdict", melnikov_name(r.verdict))
                .meta("dl0", fmt_f64(r.dl0))
                .meta("ddl0", fmt_f64(r.ddl0))
                .meta("lambda0", fmt_f64(lambda_zero()));
            if !r.critical_points.is_empty() {
                t.meta("critical_points", r.critical_points.iter().map(|c| fmt_f64(*c)).collect::<Vec<_>>().join(" "));
            }
            if let Some(n) = &note {
                t.meta("threshold_note", n);
            }
            for (s, l) in &r.samples {
                t.push_numbers(&[*s, *l]);
            }
            t.to_csv_string()
        }
    };
    let mut out = Outcome::new(body);
    out.notes.extend(note);
    out.notes.extend(r.warnings.iter().cloned());
    out.code = match r.verdict {
        MelnikovVerdict::PerturbedLoopTransversal | MelnikovVerdict::TransversalLoop => 0,
        MelnikovVerdict::Degenerate | MelnikovVerdict::Inapplicable => 1,
    };
    if !r.converged {
        out.code = 3;
    }
    if r.verdict == MelnikovVerdict::Inapplicable {
        out.notes.push(format!("s = 0 is not critical; candidates: {:?}", r.critical_points));
    }
    Ok(out)
}

fn melnikov_special(b: &Builtin, cfg: &RunConfig) -> Result<Outcome, CliError> {
    if b.kind != BuiltinKind::PendulaWeak {
        return Err(CliError::Usage("--special-loop applies to pendula_weak only".into()));
    }
    let m = pendula_weak_special_loop(lambda_of(cfg))?;
    let p = loop_profile(&m)?;
    let r = torus_transversality(&p, &cfg.solver, &cfg.tolerances)?;
    let verdict = special_loop_verdict(&r);
    let name = verdict.map(melnikov_name).unwrap_or("not_transversal");
    let body = match cfg.format.unwrap_or(Format::Json) {
        Format::Json => to_json(&json!({ "model": m.name, "verdict": name, "report": r })),
        Format::Csv => {
            let mut t = Table::new(&["verdict", "tu", "ts_hat", "gap"]);
            t.meta("model", &m.name);
            let mut row = vec![name.to_string()];
            row.extend([r.tu, r.ts_hat, r.gap].map(fmt_f64));
            t.push(row);
            t.to_csv_string()
        }
    };
    let mut out = Outcome::new(body);
    if verdict.is_none() {
        out.code = 1;
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum SweepTask {
    Transversality,
    Melnikov,
}

/// `key=a:b:n`.
pub fn parse_sweep(spec: &str) -> Result<(String, Grid), CliError> {
    let (k, g) = spec.split_once('=').ok_or_else(|| CliError::Usage(format!("sweep must look like key=a:b:n, got '{spec}'")))?;
    Ok((k.trim().to_string(), g.parse()?))
}

#[derive(Debug, Serialize)]
struct SweepRow {
    value: f64,
    verdict: String,
    a: f64,
    b: f64,
    c: f64,
    status: String,
    #[serde(skip)]
    code: i32,
}

fn sweep_one(cfg: &RunConfig, key: &str, value: f64, task: SweepTask) -> SweepRow {
    let mut c = cfg.clone();
    c.params.insert(key.to_string(), vec![value]);
    let res = load_model(&c).and_then(|b| match task {
        SweepTask::Transversality => {
            let r = transversality_report(&b, &c)?;
            Ok((verdict_name(r.verdict).to_string(), r.tu, r.ts_hat, r.gap))
        }
        SweepTask::Melnikov => {
            let grid = c.s_grid.unwrap_or(Grid { start: -3.0, end: 3.0, n: 13 });
            let r = melnikov_run(&b, &c, &grid)?;
            if !r.converged {
                return Err(CliError::Numerical("quadrature did not converge".into()));
            }
            let l0 = r.samples.iter().find(|s| s.0 == 0.0).map(|s| s.1).unwrap_or(f64::NAN);
            Ok((melnikov_name(r.verdict).to_string(), r.dl0, r.ddl0, l0))
        }
    });
    match res {
        Ok((verdict, a, b, cc)) => SweepRow { value, verdict, a, b, c: cc, status: "ok".into(), code: 0 },
        Err(e) => SweepRow {
            value,
            verdict: "error".into(),
            a: f64::NAN,
            b: f64::NAN,
            c: f64::NAN,
            status: e.to_string(),
            code: e.exit_code(),
        },
    }
}

pub fn sweep(cfg: &RunConfig, spec: &str, task: SweepTask) -> Result<Outcome, CliError> {
    let (key, grid) = parse_sweep(spec)?;
    let values = grid.points();
    // collect keeps input order, so the table is deterministic
    let rows: Vec<SweepRow> = values.par_iter().map(|&v| sweep_one(cfg, &key, v, task)).collect();
    let names = match task {
        SweepTask::Transversality => ["tu", "ts_hat", "gap"],
        SweepTask::Melnikov => ["dl0", "ddl0", "l_at_0"],
    };
    let body = match cfg.format.unwrap_or(Format::Csv) {
        Format::Json => {
            let objs: Vec<_> = rows
                .iter()
                .map(|r| {
                    json!({ key.as_str(): r.value, "verdict": r.verdict, names[0]: r.a, names[1]: r.b, names[2]: r.c, "status": r.status })
                })
                .collect();
            to_json(&json!({ "model": cfg.model, "sweep": key, "rows": objs }))
        }
        Format::Csv => {
            let mut t = Table::new(&[key.as_str(), "verdict", names[0], names[1], names[2], "status"]);
            t.meta("model", &cfg.model).meta("sweep", spec).meta("task", format!("{task:?}").to_lowercase());
            for r in &rows {
                let mut row = vec![fmt_f64(r.value), r.verdict.clone()];
                row.extend([r.a, r.b, r.c].map(fmt_f64));
                row.push(r.status.clone());
                t.push(row);
            }
            t.to_csv_string()
        }
    };
    let mut out = Outcome::new(body);
    out.code = if rows.iter().any(|r| r.code == 3) {
        3
    } else if rows.iter().any(|r| r.code == 1) {
        1
    } else if rows.iter().any(|r| r.code == 2) {
        2
    } else {
        0
    };
    out.notes.extend(rows.iter().filter(|r| r.code != 0).map(|r| format!("{key} = {}: {}", r.value, r.status)));
    Ok(out)
}
