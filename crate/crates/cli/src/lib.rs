//! Command-line front end: argument model, suite dispatch and report rendering.

use std::collections::BTreeMap;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gdcalc::adler::{
    extract_table, gradient_pullback_check, jacobi_check, multiplicativity_check, rmatrix_factor,
    skew_check, table_consistency,
};
use gdcalc::miura::{factor_verify, kw_verify};
use gdcalc::report::{CheckResult, Verification};
use gdcalc::susy::bracket::super_kw_verify_with;
use gdcalc::susy::{super_kw_verify, super_mult_check, RelativeSigns};
use gdcalc::{families, random, LaxOp, Settings, Sign};
use serde::Serialize;
use serde_json::Value;

pub const MAX_TABLE_N: usize = 4;
pub const MAX_KW_N: usize = 3;
pub const MAX_SUPER_N: usize = 2;
pub const MAX_FACTOR_ORDER: usize = 2;

#[derive(Parser, Debug)]
#[command(
    name = "gdcalc",
    version,
    about = "Exact Gel'fand-Dickey bracket calculator and identity checker"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Print the bracket table J_ij of the generic order-n Lax operator.
    GdTable(Common),
    /// Run a verification suite.
    Verify {
        #[arg(value_enum)]
        suite: Suite,
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        p: Option<usize>,
        #[arg(long)]
        q: Option<usize>,
        /// Functional family for jacobi and rmatrix: gd2, basic or small.
        #[arg(long)]
        family: Option<String>,
        /// Seed for the invariants suite.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Random cases per property in the invariants suite.
        #[arg(long, default_value_t = 16)]
        trials: usize,
    },
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    #[arg(long)]
    pub n: Option<usize>,
    /// Orientation of the Adler map, +1 or -1.
    #[arg(long, default_value = "-1", allow_hyphen_values = true)]
    pub sign: Sign,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Extra Volterra depth carried through every truncation.
    #[arg(long, default_value_t = 0)]
    pub depth_extra: u32,
    /// Lift the size caps (prints a warning).
    #[arg(long)]
    pub no_cap: bool,
    /// Include wall time in the report.
    #[arg(long)]
    pub timing: bool,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Text,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    Kw,
    Mult,
    Rmatrix,
    SuperKw,
    SuperMult,
    Jacobi,
    Invariants,
}

impl Suite {
    fn name(self) -> &'static str {
        match self {
            Suite::Kw => "kw",
            Suite::Mult => "mult",
            Suite::Rmatrix => "rmatrix",
            Suite::SuperKw => "super-kw",
            Suite::SuperMult => "super-mult",
            Suite::Jacobi => "jacobi",
            Suite::Invariants => "invariants",
        }
    }
}

#[derive(Serialize, Debug, Clone, PartialEq, Eq)]
pub struct CheckRecord {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Serialize, Debug, Clone, PartialEq)]
pub struct RunReport {
    pub command: String,
    pub parameters: BTreeMap<String, Value>,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_ms: Option<u64>,
    pub checks: Vec<CheckRecord>,
    pub artifacts: BTreeMap<String, Value>,
}

impl RunReport {
    fn new(command: String, parameters: BTreeMap<String, Value>, v: Verification) -> Self {
        RunReport {
            command,
            parameters,
            passed: v.passed(),
            wall_time_ms: None,
            checks: v
                .checks
                .into_iter()
                .map(|c| CheckRecord {
                    name: c.name,
                    passed: c.passed,
                    detail: c.detail,
                })
                .collect(),
            artifacts: v.artifacts,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("command: {}\n", self.command);
        for (k, v) in &self.parameters {
            out.push_str(&format!("param {k} = {}\n", plain(v)));
        }
        if let Some(ms) = self.wall_time_ms {
            out.push_str(&format!("wall_time_ms: {ms}\n"));
        }
        for c in &self.checks {
            let tag = if c.passed { "PASS" } else { "FAIL" };
            if c.detail.is_empty() {
                out.push_str(&format!("{tag} {}\n", c.name));
            } else {
                out.push_str(&format!(
                    "{tag} {}: {}\n",
                    c.name,
                    c.detail.replace('\n', "\n    ")
                ));
            }
        }
        if let Some(Value::String(table)) = self.artifacts.get("table_text") {
            out.push_str(table);
        }
        out.push_str(&format!(
            "result: {}\n",
            if self.passed { "pass" } else { "fail" }
        ));
        out
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => self.to_json() + "\n",
            Format::Text => self.to_text(),
        }
    }
}

fn plain(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// Invalid parameters; maps to exit code 2.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub struct Outcome {
    pub report: RunReport,
    pub warnings: Vec<String>,
}

fn settings(c: &Common) -> Settings {
    Settings {
        sign: c.sign,
        depth_extra: c.depth_extra,
    }
}

fn bounded(
    what: &str,
    value: usize,
    max: usize,
    c: &Common,
    warnings: &mut Vec<String>,
) -> Result<usize, UsageError> {
    if value == 0 {
        return Err(UsageError(format!("{what} must be at least 1")));
    }
    if value > max {
        if !c.no_cap {
            return Err(UsageError(format!(
                "{what} = {value} exceeds the default cap {max}; pass --no-cap to run anyway"
            )));
        }
        warnings.push(format!(
            "warning: {what} = {value} is above the cap {max}; this may take a long time"
        ));
    }
    Ok(value)
}

fn engine(e: gdcalc::Error) -> UsageError {
    UsageError(e.to_string())
}

fn base_params(c: &Common) -> BTreeMap<String, Value> {
    let mut m = BTreeMap::new();
    m.insert("sign".into(), Value::String(c.sign.to_string()));
    m.insert("depth_extra".into(), c.depth_extra.into());
    m
}

pub fn cmd_gd_table(c: &Common) -> Result<Outcome, UsageError> {
    let mut warnings = Vec::new();
    let n = bounded("n", c.n.unwrap_or(2), MAX_TABLE_N, c, &mut warnings)?;
    let table = extract_table(&LaxOp::generic(n), &settings(c)).map_err(engine)?;
    let mut v = Verification::new();
    v.push(match table.skew_defect() {
        None => CheckResult::pass("table is skew-adjoint"),
        Some((i, j, d)) => {
            CheckResult::new("table is skew-adjoint", false, format!("J[{i}][{j}]: {d}"))
        }
    });
    v.artifact("table", table.to_json());
    if c.format == Format::Text {
        v.artifact("table_text", Value::String(table.to_text()));
    }
    let mut params = base_params(c);
    params.insert("n".into(), n.into());
    Ok(Outcome {
        report: RunReport::new("gd-table".into(), params, v),
        warnings,
    })
}

pub struct VerifyArgs<'a> {
    pub suite: Suite,
    pub common: &'a Common,
    pub p: Option<usize>,
    pub q: Option<usize>,
    pub family: Option<&'a str>,
    pub seed: u64,
    pub trials: usize,
}

pub fn cmd_verify(a: &VerifyArgs) -> Result<Outcome, UsageError> {
    let c = a.common;
    let s = settings(c);
    let mut warnings = Vec::new();
    let mut params = base_params(c);
    let v = match a.suite {
        Suite::Kw => {
            let n = bounded("n", c.n.unwrap_or(3), MAX_KW_N, c, &mut warnings)?;
            params.insert("n".into(), n.into());
            kw_verify(n, &s).map_err(engine)?
        }
        Suite::Mult => {
            let (p, q) = factor_orders(a, c, &mut warnings, (1, 2))?;
            params.insert("p".into(), p.into());
            params.insert("q".into(), q.into());
            let mut v = multiplicativity_check(p, q, &s).map_err(engine)?;
            v.extend(factor_verify(p, q, &s).map_err(engine)?);
            v.extend(gradient_pullback_check(p, q, &families::small(p + q), &s).map_err(engine)?);
            v
        }
        Suite::Rmatrix | Suite::Jacobi => {
            let n = bounded("n", c.n.unwrap_or(2), MAX_KW_N, c, &mut warnings)?;
            let name = a.family.unwrap_or(if n == 2 { "gd2" } else { "basic" });
            let family = families::by_name(name, n).map_err(engine)?;
            params.insert("n".into(), n.into());
            params.insert("family".into(), Value::String(name.into()));
            let l = LaxOp::generic(n);
            if a.suite == Suite::Rmatrix {
                rmatrix_factor(&family, &l, &s).map_err(engine)?
            } else {
                let mut v = skew_check(&family, &l, &s).map_err(engine)?;
                v.extend(table_consistency(&family, &l, &s).map_err(engine)?);
                v.extend(jacobi_check(&family, &l, &s).map_err(engine)?);
                v
            }
        }
        Suite::SuperKw => {
            let n = bounded("n", c.n.unwrap_or(2), MAX_SUPER_N, c, &mut warnings)?;
            params.insert("n".into(), n.into());
            let mut v = super_kw_verify(n, &s).map_err(engine)?;
            if n >= 2 {
                let flipped =
                    super_kw_verify_with(n, &s, RelativeSigns::Flipped).map_err(engine)?;
                let detail = flipped
                    .first_failure()
                    .map(|f| format!("first mismatch: {}", f.name))
                    .unwrap_or_else(|| "flipped signs were accepted".into());
                v.push(CheckResult::new(
                    "flipped relative signs are rejected",
                    !flipped.passed(),
                    detail,
                ));
            }
            v
        }
        Suite::SuperMult => {
            let (p, q) = factor_orders(a, c, &mut warnings, (1, 1))?;
            params.insert("p".into(), p.into());
            params.insert("q".into(), q.into());
            super_mult_check(p, q, &s).map_err(engine)?
        }
        Suite::Invariants => {
            if a.trials == 0 {
                return Err(UsageError("trials must be at least 1".into()));
            }
            params.insert("seed".into(), a.seed.into());
            params.insert("trials".into(), a.trials.into());
            random::invariants(a.seed, a.trials, &s).map_err(engine)?
        }
    };
    Ok(Outcome {
        report: RunReport::new(format!("verify {}", a.suite.name()), params, v),
        warnings,
    })
}

fn factor_orders(
    a: &VerifyArgs,
    c: &Common,
    warnings: &mut Vec<String>,
    default: (usize, usize),
) -> Result<(usize, usize), UsageError> {
    let p = bounded("p", a.p.unwrap_or(default.0), MAX_FACTOR_ORDER, c, warnings)?;
    let q = bounded("q", a.q.unwrap_or(default.1), MAX_FACTOR_ORDER, c, warnings)?;
    Ok((p, q))
}

/// Parses `args`, runs the command and returns `(stdout, stderr, exit code)`.
pub fn run<I, T>(args: I) -> (String, String, i32)
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            return if code == 0 {
                (text, String::new(), 0)
            } else {
                (String::new(), text, 2)
            };
        }
    };
    let start = Instant::now();
    let (outcome, common) = match &cli.command {
        Command::GdTable(c) => (cmd_gd_table(c), c),
        Command::Verify {
            suite,
            common,
            p,
            q,
            family,
            seed,
            trials,
        } => (
            cmd_verify(&VerifyArgs {
                suite: *suite,
                common,
                p: *p,
                q: *q,
                family: family.as_deref(),
                seed: *seed,
                trials: *trials,
            }),
            common,
        ),
    };
    match outcome {
        Err(e) => (String::new(), format!("error: {e}\n"), 2),
        Ok(Outcome {
            mut report,
            warnings,
        }) => {
            if common.timing {
                report.wall_time_ms = Some(start.elapsed().as_millis() as u64);
            }
            let mut err = String::new();
            for w in warnings {
                err.push_str(&w);
                err.push('\n');
            }
            let code = if report.passed { 0 } else { 1 };
            (report.render(common.format), err, code)
        }
    }
}
