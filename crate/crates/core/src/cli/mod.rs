//! The `oplab` commands. Each returns its output and exit code instead of
//! printing, so the binary stays a thin shell and tests can call them
//! directly.
//!
//! Exit codes: 0 success, 1 a verification check or fuzz comparison failed,
//! 2 a theorem cross-check was violated, 3 the input could not be read or
//! validated.

pub mod fuzz;
pub mod report;
pub mod scenario;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::analysis;
use crate::error::{Error, Result};
use crate::grid::{self, GridFunction};
use crate::orlicz::{self, OrliczFunction};

use self::fuzz::{FuzzConfig, TheoremProcedures};
use self::report::{sig12, to_json, AnalyzeJson, SCHEMA_VERSION};
use self::scenario::{GridModel, Model, Scenario};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_THEOREM_VIOLATION: i32 = 2;
pub const EXIT_INVALID_INPUT: i32 = 3;

/// Convergence order the chain-rule residual must reach under refinement.
pub const MIN_CHAIN_RULE_ORDER: f64 = 1.9;
/// Largest derivative magnitude accepted away from a kernel mask.
pub const VANISHING_TOL: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommandOutput {
    pub stdout: String,
    pub stderr: String,
    pub exit_code: i32,
}

impl CommandOutput {
    fn ok(stdout: String) -> Self {
        Self {
            stdout,
            stderr: String::new(),
            exit_code: EXIT_OK,
        }
    }

    fn from_error(e: Error) -> Self {
        let exit_code = match e {
            Error::TheoremViolation(_) => EXIT_THEOREM_VIOLATION,
            _ => EXIT_INVALID_INPUT,
        };
        Self {
            stdout: String::new(),
            stderr: format!("error: {e}\n"),
            exit_code,
        }
    }
}

fn run(f: impl FnOnce() -> Result<CommandOutput>) -> CommandOutput {
    f().unwrap_or_else(CommandOutput::from_error)
}

fn load(path: &Path) -> Result<(Scenario, Model)> {
    let scenario = Scenario::load(path)?;
    let model = scenario.build()?;
    Ok((scenario, model))
}

fn write_report(path: &Path, json: &str) -> Result<()> {
    std::fs::write(path, json).map_err(|e| Error::Scenario(format!("cannot write {}: {e}", path.display())))
}

#[derive(Debug, Clone, Default)]
pub struct AnalyzeOptions {
    /// Print JSON instead of text.
    pub json: bool,
    /// Also write the JSON report here.
    pub report: Option<PathBuf>,
}

pub fn cmd_analyze(path: &Path, options: &AnalyzeOptions) -> CommandOutput {
    run(|| {
        let (scenario, model) = load(path)?;
        let Model::Atomic(model) = model else {
            return Err(Error::Scenario("analyze needs an atomic carrier".into()));
        };
        let report = analysis::analyze(&model.map, &model.space)?;
        let view = AnalyzeJson::new(scenario.name.clone(), &model.space, &report);
        let json = to_json(&view);
        if let Some(out) = &options.report {
            write_report(out, &json)?;
        }
        Ok(CommandOutput::ok(if options.json { json } else { report::analyze_text(&view) }))
    })
}

#[derive(Debug, Serialize)]
struct NormJson {
    schema: u32,
    command: &'static str,
    scenario: Option<String>,
    phi: String,
    tol: f64,
    modular: Option<f64>,
    luxemburg_norm: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    sobolev_norm: Option<f64>,
}

fn require_phi(phi: &Option<OrliczFunction>) -> Result<&OrliczFunction> {
    phi.as_ref()
        .ok_or_else(|| Error::Scenario("orlicz: this command needs an Orlicz function".into()))
}

pub fn cmd_norm(path: &Path, tol: f64, json: bool) -> CommandOutput {
    run(|| {
        let (scenario, model) = load(path)?;
        let view = match &model {
            Model::Atomic(m) => {
                let phi = require_phi(&m.phi)?;
                let f = m
                    .function
                    .as_ref()
                    .ok_or_else(|| Error::Scenario("function: norm needs a function".into()))?;
                let modular = orlicz::modular(phi, f, &m.space)?;
                NormJson {
                    schema: SCHEMA_VERSION,
                    command: "norm",
                    scenario: scenario.name.clone(),
                    phi: phi.label().to_string(),
                    tol,
                    modular: modular.is_finite().then(|| modular.value()),
                    luxemburg_norm: orlicz::luxemburg_norm(phi, f, &m.space, tol)?,
                    sobolev_norm: None,
                }
            }
            Model::Grid(m) => {
                let phi = require_phi(&m.phi)?;
                let f = m
                    .sample(&m.domain)?
                    .ok_or_else(|| Error::Scenario("function: norm needs a function".into()))?;
                let modular = orlicz::modular(phi, f.samples(), &m.domain)?;
                NormJson {
                    schema: SCHEMA_VERSION,
                    command: "norm",
                    scenario: scenario.name.clone(),
                    phi: phi.label().to_string(),
                    tol,
                    modular: modular.is_finite().then(|| modular.value()),
                    luxemburg_norm: orlicz::luxemburg_norm(phi, f.samples(), &m.domain, tol)?,
                    sobolev_norm: Some(grid::sobolev_norm(phi, &f, &m.domain, tol)?),
                }
            }
        };
        if json {
            return Ok(CommandOutput::ok(to_json(&view)));
        }
        let mut out = String::new();
        if let Some(name) = &view.scenario {
            let _ = writeln!(out, "scenario: {name}");
        }
        let _ = writeln!(out, "phi: {}", view.phi);
        let _ = writeln!(out, "tol: {:e}", view.tol);
        let _ = writeln!(
            out,
            "modular: {}",
            view.modular.map_or_else(|| "+inf".to_string(), sig12)
        );
        let _ = writeln!(out, "luxemburg norm: {}", sig12(view.luxemburg_norm));
        if let Some(s) = view.sobolev_norm {
            let _ = writeln!(out, "sobolev norm: {}", sig12(s));
        }
        Ok(CommandOutput::ok(out))
    })
}

#[derive(Debug, Serialize)]
struct VerifyJson {
    schema: u32,
    command: &'static str,
    scenario: Option<String>,
    dimension: usize,
    chain_rule: ChainRuleJson,
    boundedness: Vec<BoundJson>,
    kernel_vanishing: VanishingJson,
    pass: bool,
}

#[derive(Debug, Serialize)]
struct ChainRuleJson {
    rows: Vec<ResidualRow>,
    order: Option<f64>,
    exact: bool,
    pass: bool,
}

#[derive(Debug, Serialize)]
struct ResidualRow {
    m: usize,
    h: f64,
    residual: f64,
}

#[derive(Debug, Serialize)]
struct BoundJson {
    m: usize,
    lhs: f64,
    rhs: f64,
    rn_sup: f64,
    entry_bound: f64,
    slack: f64,
    holds: bool,
}

#[derive(Debug, Serialize)]
struct VanishingJson {
    omega0_cells: usize,
    max_outside: f64,
    max_in_band: f64,
    band_width: usize,
    pass: bool,
}

fn verify_grid(scenario: &Scenario, model: &GridModel) -> Result<VerifyJson> {
    let phi = require_phi(&model.phi)?;
    if matches!(model.function, Some(scenario::FunctionSpec::CustomTable { .. })) {
        return Err(Error::Scenario(
            "function: verify refines the grid and needs a symbolic function, not a table".into(),
        ));
    }
    if model.function.is_none() {
        return Err(Error::Scenario("function: verify needs a function".into()));
    }
    let base = &model.domain;
    let m = base.resolution().iter().copied().max().unwrap_or(4);
    let resolutions = [m, 2 * m];
    let sampler = |d: &grid::GridDomain| -> Result<GridFunction> {
        model.sample(d)?.ok_or_else(|| Error::Scenario("function missing".into()))
    };

    let study = grid::chain_rule_convergence(sampler, &model.map, base, &resolutions)?;
    let exact = study.is_exact();
    let chain_rule = ChainRuleJson {
        rows: study
            .rows
            .iter()
            .map(|&(m, h, residual)| ResidualRow { m, h, residual })
            .collect(),
        order: (!exact).then(|| study.min_order()),
        exact,
        pass: study.passes(MIN_CHAIN_RULE_ORDER),
    };

    let mut boundedness = Vec::new();
    for &mm in &resolutions {
        let d = base.with_resolution(mm)?;
        let b = grid::verify_boundedness(phi, &sampler(&d)?, &model.map, &d)?;
        boundedness.push(BoundJson {
            m: mm,
            lhs: b.lhs,
            rhs: b.rhs,
            rn_sup: b.rn_sup,
            entry_bound: b.entry_bound,
            slack: b.slack,
            holds: b.holds,
        });
    }

    // Ω∘ on the grid is {f_T = 0}; restrict f to it to get a kernel element.
    let d = base.with_resolution(m)?;
    let f_t = grid::affine_rn_derivative(&model.map, &d)?;
    let mask: Vec<bool> = f_t.samples().iter().map(|&v| v == 0.0).collect();
    let f = sampler(&d)?;
    let restricted = GridFunction::new(
        f.samples()
            .iter()
            .zip(&mask)
            .map(|(&v, &inside)| if inside { v } else { 0.0 })
            .collect(),
    )?;
    let v = grid::verify_kernel_derivative_vanishing(&restricted, &mask, &d)?;
    let kernel_vanishing = VanishingJson {
        omega0_cells: mask.iter().filter(|&&b| b).count(),
        max_outside: v.max_outside,
        max_in_band: v.max_in_band,
        band_width: v.boundary_band_width,
        pass: v.max_outside <= VANISHING_TOL,
    };

    let pass = chain_rule.pass && boundedness.iter().all(|b| b.holds) && kernel_vanishing.pass;
    Ok(VerifyJson {
        schema: SCHEMA_VERSION,
        command: "verify",
        scenario: scenario.name.clone(),
        dimension: base.dim(),
        chain_rule,
        boundedness,
        kernel_vanishing,
        pass,
    })
}

fn verdict(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}

fn verify_text(v: &VerifyJson) -> String {
    let mut out = String::new();
    let w = &mut out;
    if let Some(name) = &v.scenario {
        let _ = writeln!(w, "scenario: {name}");
    }
    let _ = writeln!(w, "dimension: {}", v.dimension);
    let _ = writeln!(w, "chain rule residual");
    let _ = writeln!(w, "  {:>6}  {:>14}  {:>14}", "m", "h", "residual");
    for r in &v.chain_rule.rows {
        let _ = writeln!(w, "  {:>6}  {:>14.6e}  {:>14.6e}", r.m, r.h, r.residual);
    }
    let order = match v.chain_rule.order {
        Some(o) => format!("{o:.3}"),
        None => "exact (residual at rounding level)".to_string(),
    };
    let _ = writeln!(w, "  order: {order}  {}", verdict(v.chain_rule.pass));
    let _ = writeln!(w, "boundedness");
    for b in &v.boundedness {
        let _ = writeln!(
            w,
            "  m={:<5} lhs={:.6e} rhs={:.6e} slack={:.3e} ||f_T||_inf={:.6e} M={:.6e}  {}",
            b.m,
            b.lhs,
            b.rhs,
            b.slack,
            b.rn_sup,
            b.entry_bound,
            verdict(b.holds)
        );
    }
    let k = &v.kernel_vanishing;
    let _ = writeln!(
        w,
        "kernel vanishing: Omega_0 cells={} max_outside={:.3e} max_in_band={:.3e}  {}",
        k.omega0_cells,
        k.max_outside,
        k.max_in_band,
        verdict(k.pass)
    );
    let _ = writeln!(w, "result: {}", verdict(v.pass));
    out
}

pub fn cmd_verify(path: &Path, json: bool) -> CommandOutput {
    run(|| {
        let (scenario, model) = load(path)?;
        let Model::Grid(model) = model else {
            return Err(Error::Scenario("verify needs a grid carrier".into()));
        };
        let v = verify_grid(&scenario, &model)?;
        let stdout = if json { to_json(&v) } else { verify_text(&v) };
        Ok(CommandOutput {
            stdout,
            stderr: String::new(),
            exit_code: if v.pass { EXIT_OK } else { EXIT_CHECK_FAILED },
        })
    })
}

/// Runs the fuzzer; on the first disagreement the replayable scenario is
/// written to `counterexample_path` and echoed.
pub fn cmd_fuzz(config: &FuzzConfig, counterexample_path: &Path, procs: &dyn TheoremProcedures) -> CommandOutput {
    run(|| {
        if config.max_atoms == 0 || config.max_atoms > crate::oracle::MAX_ENUMERATION_ATOMS {
            return Err(Error::Scenario(format!(
                "--max-atoms must be in 1..={}",
                crate::oracle::MAX_ENUMERATION_ATOMS
            )));
        }
        let summary = fuzz::run(config, procs)?;
        let mut out = summary.render(config);
        let mut exit_code = EXIT_OK;
        if let Some(cx) = &summary.first_counterexample {
            exit_code = EXIT_CHECK_FAILED;
            let json = cx.scenario.to_json();
            write_report(counterexample_path, &json)?;
            let _ = writeln!(out, "first counterexample: instance {}: {}", cx.index, cx.reason);
            let _ = writeln!(out, "written to {}", counterexample_path.display());
            out.push_str(&json);
        }
        Ok(CommandOutput {
            stdout: out,
            stderr: String::new(),
            exit_code,
        })
    })
}
