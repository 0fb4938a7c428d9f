//! Command-line frontend. Every command reads a JSON document, writes one JSON
//! report and a one-line digest on stderr, and exits with 0 (verdict true),
//! 1 (verdict false) or 2 (input error).

use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::config::{
    from_json, ContinuumConfig, FuzzConfig, GroupConfig, InstanceConfig, Schema, ThetaConfig, ThetaSpec, SCHEMA,
};
use crate::continuum::{
    check_heyde_equation_grid, theta_convolve, theta_pd_probe, theta_validate, DEFAULT_PD_CUTOFF,
};
use crate::error::{Error, Result};
use crate::group::FiniteAbelianGroup;
use crate::heyde::{
    check_conditional_symmetry, check_independence, decompose, fuzz::fuzz_theorem_a, heyde_equation_residual,
    sd_equation_residual, DEFAULT_CF_TOL,
};
use crate::polyfd::replay_reduction;

pub const DEFAULT_GRID_TOL: f64 = 1e-9;

#[derive(Debug, Parser)]
#[command(name = "heyde", version, about = "Verifier for Heyde-type characterization theorems")]
pub struct Cli {
    #[command(flatten)]
    pub opts: Options,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Default, Args)]
pub struct Options {
    /// JSON config document.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, value_name = "U64")]
    pub seed: Option<u64>,
    #[arg(long, global = true, value_name = "N")]
    pub trials: Option<u64>,
    #[arg(long, global = true, value_name = "N")]
    pub max_order: Option<usize>,
    /// Tolerance for transform-side equations.
    #[arg(long, global = true, value_name = "FLOAT")]
    pub tol_cf: Option<f64>,
    /// Tolerance for continuum grid residuals.
    #[arg(long, global = true, value_name = "FLOAT")]
    pub tol_grid: Option<f64>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Order, factors and 2-torsion of a group.
    GroupInfo,
    /// Decide one predicate on an instance.
    Check { which: CheckKind },
    /// Extract omega, x1, x2 from a symmetric instance.
    Decompose,
    /// Seeded round-trip campaign.
    Fuzz,
    /// Class Theta on R x Z(2).
    Theta { which: ThetaKind },
    /// Heyde equation on R^n x G over a grid.
    ContinuumCheck,
    /// Finite-difference reduction residuals.
    Replay,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CheckKind {
    Symmetry,
    HeydeEq,
    SdEq,
    Independence,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ThetaKind {
    Validate,
    Convolve,
    Probe,
}

impl Command {
    pub fn name(&self) -> String {
        match self {
            Command::GroupInfo => "group-info".into(),
            Command::Check { which } => format!("check {}", value_name(*which)),
            Command::Decompose => "decompose".into(),
            Command::Fuzz => "fuzz".into(),
            Command::Theta { which } => format!("theta {}", value_name(*which)),
            Command::ContinuumCheck => "continuum-check".into(),
            Command::Replay => "replay".into(),
        }
    }
}

fn value_name<T: ValueEnum>(v: T) -> String {
    v.to_possible_value()
        .map(|p| p.get_name().to_string())
        .unwrap_or_default()
}

/// A finished command: the JSON report, the process exit code and a digest.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub report: Value,
    pub exit_code: u8,
    pub summary: String,
}

struct Body {
    verdict: bool,
    fields: Map<String, Value>,
    reproduction: Value,
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("report types serialize")
}

fn load<T: serde::de::DeserializeOwned + Schema>(opts: &Options) -> Result<T> {
    let path = opts
        .config
        .as_ref()
        .ok_or_else(|| Error::InvalidConfig("--config is required".into()))?;
    let text = std::fs::read_to_string(path).map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display())))?;
    from_json(&text)
}

fn error_value(e: &Error) -> Value {
    json!({"kind": e.kind(), "message": e.to_string()})
}

/// Errors that mean the theorem's hypotheses fail for a well-formed input.
fn is_hypothesis_failure(e: &Error) -> bool {
    matches!(
        e,
        Error::HypothesisNotSatisfied
            | Error::VanishingCF { .. }
            | Error::OrderTwoElementPresent
            | Error::DecompositionFailed(_)
    )
}

fn group_info(opts: &Options) -> Result<Body> {
    let cfg: GroupConfig = load(opts)?;
    let g = FiniteAbelianGroup::new(&cfg.factors)?;
    let mut f = Map::new();
    f.insert("factors".into(), to_value(&g.factors()));
    f.insert("order".into(), to_value(&g.order()));
    f.insert("exponent".into(), to_value(&g.exponent()));
    f.insert("order2_free".into(), to_value(&g.is_order2_free()));
    f.insert("two_torsion_count".into(), to_value(&g.two_torsion_count()));
    f.insert("doubling_surjective".into(), to_value(&g.doubling_is_surjective()));
    Ok(Body {
        verdict: g.is_order2_free(),
        fields: f,
        reproduction: to_value(&cfg),
    })
}

fn check(opts: &Options, which: CheckKind) -> Result<Body> {
    let cfg: InstanceConfig = load(opts)?;
    let tol = opts.tol_cf.unwrap_or(DEFAULT_CF_TOL);
    let mut f = Map::new();
    let verdict = match which {
        CheckKind::Symmetry | CheckKind::HeydeEq => {
            let inst = cfg.build()?;
            let r = heyde_equation_residual(&inst);
            let verdict = if which == CheckKind::Symmetry {
                check_conditional_symmetry(&inst)
            } else {
                f.insert("residual".into(), to_value(&r.max));
                f.insert("tolerance".into(), to_value(&tol));
                r.max <= tol
            };
            if !verdict {
                f.insert("witness".into(), to_value(&r)["witness"].clone());
            }
            verdict
        }
        CheckKind::SdEq | CheckKind::Independence => {
            let (mu1, mu2) = cfg.build_distributions()?;
            let forms = cfg.build_forms()?;
            let r = sd_equation_residual(&mu1, &mu2, &forms)?;
            let verdict = if which == CheckKind::Independence {
                check_independence(&mu1, &mu2, &forms)?
            } else {
                f.insert("residual".into(), to_value(&r.max));
                f.insert("tolerance".into(), to_value(&tol));
                r.max <= tol
            };
            if !verdict {
                f.insert("witness".into(), to_value(&r)["witness"].clone());
            }
            verdict
        }
    };
    Ok(Body {
        verdict,
        fields: f,
        reproduction: to_value(&cfg),
    })
}

fn decompose_cmd(opts: &Options) -> Result<Body> {
    let cfg: InstanceConfig = load(opts)?;
    let inst = cfg.build()?;
    let mut f = Map::new();
    let verdict = match decompose(&inst) {
        Ok(d) => {
            f.insert("decomposition".into(), to_value(&d));
            true
        }
        Err(e) if is_hypothesis_failure(&e) => {
            f.insert("reason".into(), error_value(&e));
            false
        }
        Err(e) => return Err(e),
    };
    Ok(Body {
        verdict,
        fields: f,
        reproduction: to_value(&cfg),
    })
}

fn fuzz_cmd(opts: &Options) -> Result<Body> {
    let cfg: FuzzConfig = match opts.config {
        Some(_) => load(opts)?,
        None => FuzzConfig {
            schema: SCHEMA.into(),
            seed: None,
            trials: None,
            max_order: None,
        },
    };
    let missing = |what: &str| Error::InvalidConfig(format!("{what} is required"));
    let seed = opts.seed.or(cfg.seed).ok_or_else(|| missing("seed"))?;
    let trials = opts.trials.or(cfg.trials.map(|t| t as u64)).ok_or_else(|| missing("trials"))?;
    let max_order = opts.max_order.or(cfg.max_order).ok_or_else(|| missing("max_order"))?;
    let report = fuzz_theorem_a(seed, trials, max_order)?;
    let mut f = Map::new();
    f.insert("failures".into(), to_value(&report.failures.len()));
    f.insert("campaign".into(), to_value(&report));
    Ok(Body {
        verdict: report.is_clean(),
        fields: f,
        reproduction: json!({"schema": SCHEMA, "seed": seed, "trials": trials, "max_order": max_order}),
    })
}

fn theta_cmd(opts: &Options, which: ThetaKind) -> Result<Body> {
    let cfg: ThetaConfig = load(opts)?;
    let p = cfg.params.build()?;
    let mut f = Map::new();
    f.insert("params".into(), to_value(&p));
    let verdict = match which {
        ThetaKind::Validate => {
            if 0.0 < p.sigma_p && p.sigma_p < p.sigma {
                f.insert("kappa_bound".into(), to_value(&p.kappa_bound()));
            }
            theta_validate(&p)
        }
        ThetaKind::Convolve => {
            let q = cfg
                .with
                .as_ref()
                .ok_or_else(|| Error::InvalidConfig("convolve needs a \"with\" operand".into()))?
                .build()?;
            let r = theta_convolve(&p, &q)?;
            f.insert("with".into(), to_value(&q));
            f.insert("result".into(), to_value(&ThetaSpec::from_params(&r)));
            theta_validate(&r)
        }
        ThetaKind::Probe => {
            let cutoff = cfg.cutoff.unwrap_or(DEFAULT_PD_CUTOFF);
            let probe = theta_pd_probe(&p, cutoff);
            f.insert("cutoff".into(), to_value(&cutoff));
            f.insert("probe".into(), to_value(&probe));
            probe.positive
        }
    };
    Ok(Body {
        verdict,
        fields: f,
        reproduction: to_value(&cfg),
    })
}

fn continuum_cmd(opts: &Options) -> Result<Body> {
    let cfg: ContinuumConfig = load(opts)?;
    let c = cfg.build()?;
    let tol = opts.tol_grid.unwrap_or(DEFAULT_GRID_TOL);
    let r = check_heyde_equation_grid(&c.sd1, &c.sd2, &c.alpha, &c.grid)?;
    let mut f = Map::new();
    f.insert("residual".into(), to_value(&r.max));
    f.insert("tolerance".into(), to_value(&tol));
    f.insert("argmax".into(), json!({"s1": r.s1, "s2": r.s2, "h1": r.h1, "h2": r.h2}));
    Ok(Body {
        verdict: r.max <= tol,
        fields: f,
        reproduction: to_value(&cfg),
    })
}

fn replay_cmd(opts: &Options) -> Result<Body> {
    let cfg: InstanceConfig = load(opts)?;
    let inst = cfg.build()?;
    let tol = opts.tol_cf.unwrap_or(DEFAULT_CF_TOL);
    let mut f = Map::new();
    let verdict = match replay_reduction(inst.mu1(), inst.mu2(), inst.alpha(), tol) {
        Ok(r) => {
            f.insert("reduction".into(), to_value(&r));
            r.all_hold()
        }
        Err(e) if is_hypothesis_failure(&e) => {
            f.insert("reason".into(), error_value(&e));
            false
        }
        Err(e) => return Err(e),
    };
    Ok(Body {
        verdict,
        fields: f,
        reproduction: to_value(&cfg),
    })
}

/// Runs one command. The report depends only on the arguments and the
/// config contents.
pub fn execute(cli: &Cli) -> Outcome {
    let start = Instant::now();
    let name = cli.command.name();
    let opts = &cli.opts;
    let result = match cli.command {
        Command::GroupInfo => group_info(opts),
        Command::Check { which } => check(opts, which),
        Command::Decompose => decompose_cmd(opts),
        Command::Fuzz => fuzz_cmd(opts),
        Command::Theta { which } => theta_cmd(opts, which),
        Command::ContinuumCheck => continuum_cmd(opts),
        Command::Replay => replay_cmd(opts),
    };
    let mut report = Map::new();
    report.insert("schema".into(), json!(SCHEMA));
    report.insert("command".into(), json!(name));
    report.insert("version".into(), json!(env!("CARGO_PKG_VERSION")));
    let elapsed = start.elapsed().as_secs_f64();
    let (exit_code, summary) = match result {
        Ok(body) => {
            report.insert("verdict".into(), json!(body.verdict));
            report.extend(body.fields);
            report.insert("reproduction".into(), body.reproduction);
            let code = if body.verdict { 0 } else { 1 };
            (code, format!("{name}: verdict {} in {elapsed:.3}s", body.verdict))
        }
        Err(e) => {
            report.insert("verdict".into(), Value::Null);
            report.insert("error".into(), error_value(&e));
            (2, format!("{name}: error {}: {e}", e.kind()))
        }
    };
    Outcome {
        report: Value::Object(report),
        exit_code,
        summary,
    }
}

/// Executes and writes the report to `--out` or stdout.
pub fn run(cli: &Cli) -> u8 {
    let outcome = execute(cli);
    let text = serde_json::to_string_pretty(&outcome.report).expect("reports serialize") + "\n";
    let written = match &cli.opts.out {
        Some(path) => std::fs::write(path, &text).map_err(|e| format!("{}: {e}", path.display())),
        None => {
            use std::io::Write;
            std::io::stdout().write_all(text.as_bytes()).map_err(|e| e.to_string())
        }
    };
    eprintln!("{}", outcome.summary);
    if let Err(e) = written {
        eprintln!("cannot write report: {e}");
        return 2;
    }
    outcome.exit_code
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn run_with(args: &[&str], config: &str) -> Outcome {
        let mut file = tempfile::NamedTempFile::new().unwrap();
        file.write_all(config.as_bytes()).unwrap();
        let path = file.path().to_str().unwrap().to_string();
        let mut argv = vec!["heyde"];
        argv.extend_from_slice(args);
        argv.extend_from_slice(&["--config", &path]);
        execute(&Cli::try_parse_from(argv).unwrap())
    }

    const Z5_MINUS_I: &str = r#"{"schema":"1","group":{"factors":[5]},"alpha":{"matrix":[[4]]},
        "mu1":{"weights":{"[0]":"1/2","[1]":"1/2"}},"mu2":{"weights":{"[0]":"1/2","[1]":"1/2"}}}"#;
    const Z3_E1_E0: &str = r#"{"schema":"1","group":{"factors":[3]},"alpha":{"matrix":[[1]]},
        "mu1":{"weights":{"[1]":"1"}},"mu2":{"weights":{"[0]":"1"}}}"#;

    #[test]
    fn group_info_examples() {
        let o = run_with(&["group-info"], r#"{"factors":[3,9]}"#);
        assert_eq!(o.exit_code, 0);
        assert_eq!(o.report["order"], 27);
        assert_eq!(o.report["order2_free"], true);
        let o = run_with(&["group-info"], r#"{"factors":[2,3]}"#);
        assert_eq!((o.exit_code, o.report["order"].as_u64()), (1, Some(6)));
        assert_eq!(o.report["two_torsion_count"], 2);
        let o = run_with(&["group-info"], r#"{"factors":[]}"#);
        assert_eq!(o.exit_code, 2);
        assert_eq!(o.report["error"]["kind"], "InvalidGroupSpec");
    }

    #[test]
    fn check_examples() {
        for which in ["symmetry", "heyde-eq"] {
            let o = run_with(&["check", which], Z5_MINUS_I);
            assert_eq!(o.exit_code, 0, "{which}");
            assert_eq!(o.report["verdict"], true);
            let o = run_with(&["check", which], Z3_E1_E0);
            assert_eq!(o.exit_code, 1, "{which}");
            assert!(o.report["witness"]["u"].is_string());
        }
        let malformed = Z5_MINUS_I.replacen("1/2", "one half", 1);
        let o = run_with(&["check", "symmetry"], &malformed);
        assert_eq!(o.exit_code, 2);
        assert_eq!(o.report["error"]["kind"], "NotAProbability");
    }

    #[test]
    fn decompose_report_shape() {
        let o = run_with(&["decompose"], Z5_MINUS_I);
        assert_eq!(o.exit_code, 0);
        let d = &o.report["decomposition"];
        assert_eq!(d["verdict"], "ok");
        assert_eq!(d["x1"], "[0]");
        assert_eq!(d["kernel"].as_array().unwrap().len(), 5);
        let o = run_with(&["decompose"], Z3_E1_E0);
        assert_eq!(o.exit_code, 1);
        assert_eq!(o.report["reason"]["kind"], "HypothesisNotSatisfied");
    }

    #[test]
    fn fuzz_from_flags() {
        let argv = ["heyde", "fuzz", "--seed", "1", "--trials", "0", "--max-order", "81"];
        let o = execute(&Cli::try_parse_from(argv).unwrap());
        assert_eq!(o.exit_code, 0);
        assert_eq!(o.report["failures"], 0);
        let o = execute(&Cli::try_parse_from(["heyde", "fuzz", "--seed", "1"]).unwrap());
        assert_eq!(o.exit_code, 2);
    }

    #[test]
    fn theta_examples() {
        let o = run_with(&["theta", "validate"], r#"{"sigma":"1","sigma_p":"1/2","beta":"0","beta_p":"0","kappa":"0.7"}"#);
        assert_eq!(o.exit_code, 0);
        let o = run_with(&["theta", "validate"], r#"{"sigma":"1","sigma_p":"2","beta":"0","beta_p":"0","kappa":"0.5"}"#);
        assert_eq!(o.exit_code, 1);
        let o = run_with(
            &["theta", "convolve"],
            r#"{"sigma":1,"sigma_p":0.5,"beta":0,"beta_p":0,"kappa":0.5,
                "with":{"sigma":1,"sigma_p":0.5,"beta":0,"beta_p":0,"kappa":0.5}}"#,
        );
        assert_eq!(o.exit_code, 0);
        assert_eq!(o.report["result"]["kappa"], 0.25);
        let o = run_with(&["theta", "probe"], r#"{"sigma":1,"sigma_p":0.5,"beta":0,"beta_p":0,"kappa":0.99}"#);
        assert_eq!(o.exit_code, 1);
    }
}
