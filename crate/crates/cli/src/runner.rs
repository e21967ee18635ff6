//! Executes scenario checks.

use std::path::PathBuf;
use std::time::Instant;

use coiso_core::numeric::{pushforward_vertical_block, SectionNumeric};
use coiso_core::symplectic_model::{invert_affine_pencil, pencil_residual_vanishes, AffinePencil, NumericSymplecticInverse};
use coiso_core::{
    coisotropy_check_numeric, obstructedness_certificate, sample_grid, vertical_blades, CoisoAlgebra,
    CompiledBivector, MultiVectorField, NumericBivector, VerticalSection, Verdict,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ast::{Check, Scenario, Statement};
use crate::error::{EvalError, EvalResult};
use crate::eval::{build_chart, Env};
use crate::report::{
    abbreviate, exit_code, BindingReport, CheckReport, Defect, NamedValue, RunReport, Settings, Status, Summary,
};

/// Grid points per axis for convergence tables (capped to keep CSVs small).
pub const TABLE_SAMPLES: usize = 6;
/// Random base points for the numeric cross-check of exact MC series.
pub const MC_SPOT_CHECKS: usize = 16;
/// Largest accepted partial-sum error at the requested order.
pub const CONVERGENCE_TOLERANCE: f64 = 1e-8;
/// Largest accepted gap between exact and numeric pushforward values.
pub const SPOT_TOLERANCE: f64 = 1e-8;

#[derive(Clone, Debug)]
pub struct RunOptions {
    pub truncation: u32,
    pub samples: usize,
    pub seed: u64,
    pub strict: bool,
    pub timing: bool,
    /// Directory that relative pencil paths are resolved against.
    pub base_dir: PathBuf,
    /// Name shown in reports.
    pub scenario_name: String,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            truncation: 6,
            samples: 32,
            seed: 0,
            strict: false,
            timing: false,
            base_dir: PathBuf::from("."),
            scenario_name: "<inline>".into(),
        }
    }
}

#[derive(Default)]
struct Outcome {
    status: Option<Status>,
    values: Vec<NamedValue>,
    defects: Vec<Defect>,
    message: Option<String>,
    table: Option<coiso_core::ConvergenceTable>,
}

impl Outcome {
    fn value(&mut self, name: &str, value: impl ToString) {
        self.values.push(NamedValue {
            name: name.to_string(),
            value: value.to_string(),
        });
    }

    fn defect(&mut self, name: &str, value: f64) {
        self.defects.push(Defect {
            name: name.to_string(),
            value,
        });
    }

    fn finish(mut self, status: Status) -> Self {
        self.status = Some(status);
        self
    }
}

fn pass_if(ok: bool) -> Status {
    if ok {
        Status::Pass
    } else {
        Status::Fail
    }
}

pub fn run(scenario: &Scenario, opts: &RunOptions) -> RunReport {
    let env = scenario.chart.as_ref().map(|decl| {
        build_chart(decl).map(|chart| Env::new(chart, opts.truncation))
    });
    let mut env = match env {
        Some(Ok(e)) => Ok(Some(e)),
        Some(Err(e)) => Err(e.to_string()),
        None => Ok(None),
    };
    let mut bindings = Vec::new();
    let mut checks = Vec::new();
    for stmt in &scenario.statements {
        match stmt {
            Statement::Binding { name, expr, .. } => {
                let report = match &mut env {
                    Ok(Some(env)) => match env.bind(name, expr) {
                        Ok(v) => BindingReport {
                            name: name.clone(),
                            kind: Some(v.kind()),
                            value: Some(abbreviate(v.to_string())),
                            error: None,
                        },
                        Err(e) => error_binding(name, e),
                    },
                    Ok(None) => error_binding(name, "no chart declared".into()),
                    Err(e) => error_binding(name, format!("invalid chart: {e}")),
                };
                bindings.push(report);
            }
            Statement::Check { check, .. } => {
                let index = checks.len() + 1;
                let start = Instant::now();
                let outcome = match &env {
                    Ok(env) => run_check(env.as_ref(), check, opts, index),
                    Err(e) => Err(EvalError::Invalid(format!("invalid chart: {e}"))),
                };
                let elapsed = start.elapsed().as_secs_f64() * 1e3;
                checks.push(into_report(index, check, outcome, opts.timing.then_some(elapsed)));
            }
        }
    }
    let binding_errors = bindings.iter().any(|b| b.error.is_some());
    let count = |s: Status| checks.iter().filter(|c| c.status == s).count();
    let summary = Summary {
        passed: count(Status::Pass),
        failed: count(Status::Fail),
        inconclusive: count(Status::Inconclusive),
        errors: count(Status::Error),
        exit_code: exit_code(&checks, binding_errors, opts.strict),
    };
    RunReport {
        scenario: opts.scenario_name.clone(),
        settings: Settings {
            truncation: opts.truncation,
            samples: opts.samples,
            seed: opts.seed,
            strict: opts.strict,
        },
        bindings,
        checks,
        summary,
    }
}

fn error_binding(name: &str, error: String) -> BindingReport {
    BindingReport {
        name: name.to_string(),
        kind: None,
        value: None,
        error: Some(error),
    }
}

fn into_report(index: usize, check: &Check, outcome: EvalResult<Outcome>, timing_ms: Option<f64>) -> CheckReport {
    let mut report = CheckReport {
        index,
        check: check.to_string(),
        status: Status::Error,
        values: Vec::new(),
        defects: Vec::new(),
        message: None,
        timing_ms,
        table: None,
    };
    match outcome {
        Ok(o) => {
            if let Some(d) = o.defects.iter().find(|d| !d.value.is_finite()) {
                report.message = Some(format!("numeric defect `{}` is not finite", d.name));
                report.values = o.values;
                return report;
            }
            report.status = o.status.unwrap_or(Status::Error);
            report.values = o.values;
            report.defects = o.defects;
            report.message = o.message;
            report.table = o.table;
        }
        Err(e) => report.message = Some(e.to_string()),
    }
    report
}

fn require_env(env: Option<&Env>) -> EvalResult<&Env> {
    env.ok_or_else(|| EvalError::Invalid("no chart declared".into()))
}

fn run_check(env: Option<&Env>, check: &Check, opts: &RunOptions, index: usize) -> EvalResult<Outcome> {
    match check {
        Check::Coisotropic { name } => coisotropic(require_env(env)?, name, opts),
        Check::Mc { name, order } => mc(require_env(env)?, name, *order, opts, index),
        Check::Kuranishi { name } => kuranishi(require_env(env)?, name),
        Check::Jacobi { name } => jacobi(require_env(env)?, name),
        Check::OmegaLe { name, k } => omega_le(require_env(env)?, name, *k),
        Check::Pencil { file, order } => pencil(file, order.unwrap_or(opts.truncation), opts),
    }
}

fn poisson(env: &Env) -> EvalResult<MultiVectorField> {
    let pi = env.get("pi")?.as_multivector()?;
    if pi.degree() != 2 {
        return Err(EvalError::Type(format!("`pi` must be a bivector, got degree {}", pi.degree())));
    }
    Ok(pi)
}

fn section(env: &Env, name: &str) -> EvalResult<VerticalSection> {
    let s = env.get(name)?.as_section()?;
    if s.degree() != 1 && !s.is_zero() {
        return Err(EvalError::Type(format!("`{name}` must be a section of E (degree 1)")));
    }
    if s.is_zero() {
        let chart = s.chart();
        let zeros = vec![coiso_core::RingElement::zero(chart); chart.fibre_dim()];
        return Ok(VerticalSection::from_components(chart, zeros)?);
    }
    Ok(s)
}

/// The bivector to compare against numerically: the pointwise inverse of
/// the source form when `pi` came from `inv_form`, otherwise `pi` itself.
fn numeric_oracle(env: &Env, pi: &MultiVectorField) -> EvalResult<(Box<dyn NumericBivector>, &'static str)> {
    Ok(match env.source_form("pi") {
        Some(omega) if pi.jet_order().is_some() => (
            Box::new(NumericSymplecticInverse::new(omega)?),
            "pointwise inverse of the source form",
        ),
        _ => (Box::new(CompiledBivector::new(pi)?), "pi"),
    })
}

fn coisotropic(env: &Env, name: &str, opts: &RunOptions) -> EvalResult<Outcome> {
    let pi = poisson(env)?;
    let alpha = section(env, name)?;
    let (oracle, oracle_name) = numeric_oracle(env, &pi)?;
    let points = sample_grid(&env.chart, opts.samples);
    let report = coisotropy_check_numeric(oracle.as_ref(), &alpha, &points)?;
    let mut out = Outcome::default();
    out.value("points", report.points);
    out.value("numeric_oracle", oracle_name);
    out.value("numeric_coisotropic", report.coisotropic);
    out.defect("max_conormal_defect", report.max_defect);
    if pi.jet_order().is_some() {
        out.message = Some("pi is a jet; the verdict is the numeric conormal test".into());
        return Ok(out.finish(pass_if(report.coisotropic)));
    }
    let alg = CoisoAlgebra::new(pi)?;
    let mc = alg.mc_series_exact_with_samples(&alpha, opts.samples)?;
    let exact = mc.is_zero();
    out.value("MC", &mc);
    out.value("exact_coisotropic", exact);
    if exact != report.coisotropic {
        out.message = Some("exact and numeric verdicts disagree".into());
        return Ok(out.finish(Status::Fail));
    }
    Ok(out.finish(pass_if(exact)))
}

fn mc(env: &Env, name: &str, order: Option<u32>, opts: &RunOptions, index: usize) -> EvalResult<Outcome> {
    let pi = poisson(env)?;
    let alpha = section(env, name)?;
    if order.is_some() || pi.jet_order().is_some() {
        return mc_table(env, pi, &alpha, order.unwrap_or(opts.truncation), opts);
    }
    let alg = CoisoAlgebra::new(pi.clone())?;
    let mc = alg.mc_series_exact_with_samples(&alpha, opts.samples)?;
    let oracle = pi.fibre_translate_pushforward(&alpha)?.projection_p();
    let matches = mc == oracle;
    let mut out = Outcome::default();
    out.value("MC", &mc);
    out.value("exact_oracle_match", matches);
    out.value("graph_coisotropic", mc.is_zero());

    let chart = &env.chart;
    let compiled = CompiledBivector::new(&pi)?;
    let sec = SectionNumeric::new(&alpha)?;
    let blades = vertical_blades(chart, 2);
    let fibre_pos = |g: usize| g - chart.base_dim();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed.wrapping_add(index as u64));
    let mut worst: f64 = 0.0;
    for _ in 0..MC_SPOT_CHECKS {
        let point: Vec<f64> = (0..chart.base_dim())
            .map(|i| if chart.is_periodic(i) { rng.gen_range(0.0..1.0) } else { rng.gen_range(-1.0..1.0) })
            .collect();
        let block = pushforward_vertical_block(&compiled, &sec, &point)?;
        let exact = mc.eval_at_base(&point)?;
        for b in &blades {
            let e = exact.iter().find(|(idx, _)| idx == b).map_or(0.0, |(_, v)| v.re);
            worst = worst.max((e - block[(fibre_pos(b[0]), fibre_pos(b[1]))]).abs());
        }
    }
    out.value("spot_points", MC_SPOT_CHECKS);
    out.defect("max_spot_difference", worst);
    let ok = matches && worst <= SPOT_TOLERANCE;
    if !matches {
        out.message = Some("MC series differs from P(pushforward)".into());
    }
    Ok(out.finish(pass_if(ok)))
}

fn mc_table(env: &Env, pi: MultiVectorField, alpha: &VerticalSection, n_max: u32, opts: &RunOptions) -> EvalResult<Outcome> {
    let (oracle, oracle_name) = numeric_oracle(env, &pi)?;
    let alg = CoisoAlgebra::new(pi)?;
    let k = opts.samples.min(TABLE_SAMPLES);
    let points = sample_grid(&env.chart, k);
    let table = alg.mc_partial_table(alpha, n_max, &points, oracle.as_ref())?;
    let mut out = Outcome::default();
    out.value("order", n_max);
    out.value("points", points.len());
    out.value("numeric_oracle", oracle_name);
    for n in 1..=n_max {
        out.defect(&format!("max_abs_error[{n}]"), table.max_error_at(n).unwrap_or(0.0));
    }
    let last = table.max_error_at(n_max).unwrap_or(0.0);
    let ok = last <= CONVERGENCE_TOLERANCE;
    if !ok {
        out.message = Some(format!(
            "partial sum at order {n_max} is off by {last:.3e} (tolerance {CONVERGENCE_TOLERANCE:e})"
        ));
    }
    out.table = Some(table);
    Ok(out.finish(pass_if(ok)))
}

fn kuranishi(env: &Env, name: &str) -> EvalResult<Outcome> {
    let alg = CoisoAlgebra::new(poisson(env)?)?;
    let a = section(env, name)?;
    let cert = obstructedness_certificate(&alg, &a)?;
    let mut out = Outcome::default();
    out.value("closed", cert.closed);
    if let Some(k) = &cert.kuranishi {
        out.value(&format!("lambda2({name},{name})"), k);
    }
    if let Some(b) = &cert.beta {
        out.value("beta", b);
    }
    if let Some(f) = &cert.integral {
        out.value("F", f);
    }
    out.value("verdict", cert.verdict);
    let status = match (cert.closed, cert.verdict) {
        (false, _) => {
            out.message = Some(format!("`{name}` is not lambda1-closed"));
            Status::Fail
        }
        (true, Verdict::Nonzero) => Status::Pass,
        (true, Verdict::Inconclusive) => {
            out.message = Some("F is constant; the certificate is inconclusive".into());
            Status::Inconclusive
        }
    };
    Ok(out.finish(status))
}

fn jacobi(env: &Env, name: &str) -> EvalResult<Outcome> {
    let x = env.get(name)?.as_multivector()?;
    let bracket = x.schouten(&x)?;
    let mut out = Outcome::default();
    out.value(&format!("[{name},{name}]"), &bracket);
    if let Some(n) = x.jet_order() {
        out.message = Some(format!(
            "`{name}` is a jet of order {n}; the identity is checked through fibre degree {}",
            n.saturating_sub(1)
        ));
    }
    Ok(out.finish(pass_if(bracket.is_zero())))
}

fn omega_le(env: &Env, name: &str, k: u32) -> EvalResult<Outcome> {
    let w = env.get(name)?.as_form()?;
    let degrees: Vec<String> = w.fibrewise_degrees().iter().map(u32::to_string).collect();
    let mut out = Outcome::default();
    out.value("fibrewise_degrees", format!("{{{}}}", degrees.join(", ")));
    Ok(out.finish(pass_if(w.is_in_omega_le(k))))
}

fn pencil(file: &str, order: u32, opts: &RunOptions) -> EvalResult<Outcome> {
    let path = opts.base_dir.join(file);
    let text = std::fs::read_to_string(&path).map_err(|e| EvalError::Io {
        path: file.to_string(),
        message: e.to_string(),
    })?;
    let p = AffinePencil::parse(&text)?;
    let inv = invert_affine_pencil(&p, order)?;
    let ok = pencil_residual_vanishes(&p, &inv)?;
    let mut out = Outcome::default();
    out.value("size", p.size());
    out.value("parameters", p.labels().join(", "));
    out.value("order", order);
    out.value("residual_vanishes_through_order", ok);
    for (i, row) in inv.matrix.iter().enumerate() {
        for (j, x) in row.iter().enumerate() {
            out.value(&format!("inverse[{}][{}]", i + 1, j + 1), x);
        }
    }
    Ok(out.finish(pass_if(ok)))
}
