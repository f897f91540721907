use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;
use serde_json::json;

use mpl_bilinear::oracle::{gen_fun_report, li_truncated, TruncationSpec};
use mpl_bilinear::simulate::{sweep_theta, EvalResult, IntegratorConfig};
use mpl_bilinear::verify::{
    builtin_identity, curve_file_name, format_float, oracle_identity, residual_csv, run_identity_with,
    write_report, Builder, IdentitySpec, IdentityTerm, ResidualReport, RunOptions, Target,
};
use mpl_bilinear::{
    build_general, build_periodic, parse_composition, repr_equals_pattern, CompositionSpec,
    GeneralizedComposition, Realization,
};

#[derive(Parser)]
#[command(
    name = "mpl-bilinear",
    version,
    about = "Bilinear realizations of multiple polylogarithm generating functions"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Build the realization (N0, N1, z0, C) of a composition.
    Realize {
        /// Composition, e.g. `{2}`, `{3,1}`, `2,1,{2},3`.
        #[arg(long = "s")]
        s: String,
        /// Instantiate θ numerically instead of dumping θ-polynomials.
        #[arg(long)]
        theta: Option<f64>,
        /// Use the closed form for purely periodic compositions (a brace-less string is read as `{...}`).
        #[arg(long)]
        periodic: bool,
        #[arg(long, value_enum, default_value_t = RealizeFormat::Json)]
        format: RealizeFormat,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Integrate the realization on (0, 1) and write the trajectory y(t).
    Eval {
        #[arg(long = "s")]
        s: String,
        #[arg(long, conflicts_with = "thetas")]
        theta: Option<f64>,
        /// Several θ values; requires `--out <dir>`, one file per θ.
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        thetas: Option<Vec<f64>>,
        #[command(flatten)]
        integ: IntegratorArgs,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Check an identity over a θ grid; exits 1 when the residual exceeds `--tol`.
    Verify {
        /// `zeta2`, `zeta4-31`, `hoffman`, or a JSON identity file.
        name: String,
        #[arg(long, value_delimiter = ',', num_args = 1.., default_values_t = [0.25, 0.5, 0.75, 1.0])]
        thetas: Vec<f64>,
        #[arg(long, default_value_t = 1e-2)]
        tol: f64,
        /// Evaluate the terms with the nested-sum oracle at t = 1 instead of integrating.
        #[arg(long)]
        oracle: bool,
        /// Realize purely periodic terms with the general construction too.
        #[arg(long)]
        general: bool,
        #[command(flatten)]
        integ: IntegratorArgs,
        #[command(flatten)]
        trunc: TruncArgs,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        /// Directory for `residuals.csv` and the per-θ curve files.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Truncated nested-sum value of Li_s(t), or of L_s(t, θ) for a braced composition.
    Oracle {
        #[arg(long = "s")]
        s: String,
        #[arg(long, default_value_t = 1.0)]
        t: f64,
        #[arg(long, default_value_t = 1.0)]
        theta: f64,
        #[command(flatten)]
        trunc: TruncArgs,
    },
    /// Compare the realization with the series coefficients on every word up to a length.
    CoeffCheck {
        #[arg(long = "s")]
        s: String,
        #[arg(long, default_value_t = 12)]
        max_len: usize,
        #[arg(long)]
        periodic: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum RealizeFormat {
    Json,
    Text,
}

#[derive(Args)]
struct IntegratorArgs {
    /// Start from the ode45-like preset instead of the defaults; other flags override it.
    #[arg(long)]
    paper_like: bool,
    #[arg(long)]
    t_start_eps: Option<f64>,
    #[arg(long)]
    t_end_eps: Option<f64>,
    #[arg(long)]
    rtol: Option<f64>,
    #[arg(long)]
    atol: Option<f64>,
    #[arg(long)]
    min_step: Option<f64>,
    #[arg(long)]
    max_step: Option<f64>,
    #[arg(long)]
    halvings: Option<u32>,
    #[arg(long)]
    samples: Option<usize>,
}

impl IntegratorArgs {
    fn config(&self) -> Result<IntegratorConfig> {
        let mut c = if self.paper_like { IntegratorConfig::paper_like() } else { IntegratorConfig::default() };
        if let Some(v) = self.t_start_eps {
            c.eps_start = v;
        }
        if let Some(v) = self.t_end_eps {
            c.eps_end = v;
        }
        if let Some(v) = self.rtol {
            c.rtol = v;
        }
        if let Some(v) = self.atol {
            c.atol = v;
        }
        if let Some(v) = self.min_step {
            c.min_step = v;
        }
        if let Some(v) = self.max_step {
            c.max_step = v;
        }
        if let Some(v) = self.halvings {
            c.halvings = v;
        }
        if let Some(v) = self.samples {
            c.sample_count = v;
        }
        c.validate()?;
        Ok(c)
    }
}

#[derive(Args)]
struct TruncArgs {
    #[arg(long, default_value_t = 1_000_000)]
    k_max: u64,
    #[arg(long, default_value_t = 200)]
    n_max: usize,
}

impl TruncArgs {
    fn spec(&self) -> Result<TruncationSpec> {
        let s = TruncationSpec::new(self.k_max, self.n_max);
        s.validate()?;
        Ok(s)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.cmd {
        Cmd::Realize { s, theta, periodic, format, out } => {
            let r = realize(&s, periodic)?;
            let text = match (format, theta) {
                (RealizeFormat::Json, None) => serde_json::to_string_pretty(&r.to_json())? + "\n",
                (RealizeFormat::Json, Some(th)) => serde_json::to_string_pretty(&numeric_json(&r, th))? + "\n",
                (RealizeFormat::Text, None) => r.to_string(),
                (RealizeFormat::Text, Some(th)) => numeric_text(&r, th),
            };
            emit(out.as_deref(), &text)?;
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Eval { s, theta, thetas, integ, format, out, jobs } => {
            let cfg = integ.config()?;
            let thetas = thetas.unwrap_or_else(|| vec![theta.unwrap_or(1.0)]);
            if thetas.len() > 1 && out.is_none() {
                bail!("several θ values need --out <dir>");
            }
            let r = realize(&s, false)?;
            let results = sweep_theta(&r, &thetas, &cfg, jobs)?;
            for (th, res) in thetas.iter().zip(&results) {
                eprintln!(
                    "theta={} terminal_t={} terminal_y={} endpoint_gap={:.3e} steps={} rejected={}",
                    th,
                    format_float(res.terminal_t),
                    format_float(res.terminal_y),
                    res.endpoint_gap,
                    res.steps_accepted,
                    res.steps_rejected
                );
            }
            if let [res] = results.as_slice() {
                emit(out.as_deref(), &trajectory(res, thetas[0], format)?)?;
            } else {
                let dir = out.expect("checked above");
                fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
                let ext = match format {
                    Format::Csv => "csv",
                    Format::Json => "json",
                };
                for (th, res) in thetas.iter().zip(&results) {
                    let p = dir.join(format!("trajectory_theta_{th:.2}.{ext}"));
                    fs::write(&p, trajectory(res, *th, format)?).with_context(|| format!("writing {}", p.display()))?;
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Verify { name, thetas, tol, oracle, general, integ, trunc, format, out, jobs } => {
            let cfg = integ.config()?;
            let trunc = trunc.spec()?;
            if !(tol >= 0.0) {
                bail!("--tol must be nonnegative");
            }
            let spec = identity(&name)?;
            if oracle {
                return verify_oracle(&spec, &thetas, &trunc, tol, format);
            }
            let opts = RunOptions { jobs, builder: if general { Builder::General } else { Builder::Auto } };
            let report = run_identity_with(&spec, &thetas, &cfg, &opts)?;
            match (&out, format) {
                (Some(dir), Format::Csv) => {
                    let files = write_report(&report, dir).with_context(|| format!("writing into {}", dir.display()))?;
                    eprintln!("wrote {} files into {}", files.len(), dir.display());
                }
                (Some(dir), Format::Json) => {
                    fs::create_dir_all(dir)?;
                    fs::write(dir.join("report.json"), serde_json::to_string_pretty(&report_json(&report))?)?;
                }
                (None, Format::Csv) => print!("{}", residual_csv(&report)),
                (None, Format::Json) => println!("{}", serde_json::to_string_pretty(&report_json(&report))?),
            }
            summarize(&report.name, report.max_abs_residual, tol, Some(report.terminal_t));
            if report.floor_suspected {
                eprintln!("note: residual does not shrink with θ; compare with the endpoint_gap column");
            }
            Ok(verdict(report.max_abs_residual, tol))
        }
        Cmd::Oracle { s, t, theta, trunc } => {
            let trunc = trunc.spec()?;
            match parse_composition(&s)? {
                CompositionSpec::Plain(c) => {
                    let v = li_truncated(&c, t, &trunc)?;
                    println!("{}", format_float(v));
                    eprintln!("Li_({c})({t}) with k1 <= {}", trunc.k_max);
                }
                CompositionSpec::Generalized(g) => {
                    let v = gen_fun_report(&g, t, theta, &trunc)?;
                    println!("{}", format_float(v.value));
                    eprintln!(
                        "L_({g})({t}, {theta}) with k1 <= {}, n <= {} ({}), n_max = {}",
                        trunc.k_max,
                        v.n_used,
                        if v.converged { "converged" } else { "cap reached" },
                        trunc.n_max
                    );
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Cmd::CoeffCheck { s, max_len, periodic } => {
            if max_len > 24 {
                bail!("--max-len {max_len} would check more than 2^25 words");
            }
            let g = generalized(&s, periodic)?;
            let r = realize(&s, periodic)?;
            let report = repr_equals_pattern(&g, &r.representation(), max_len);
            println!("{report}");
            Ok(if report.is_ok() { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
    }
}

fn generalized(s: &str, periodic: bool) -> Result<GeneralizedComposition> {
    let spec = parse_composition(s)?;
    Ok(if periodic {
        GeneralizedComposition::periodic(spec.periodic()?)?
    } else {
        spec.generalized()?
    })
}

fn realize(s: &str, periodic: bool) -> Result<Realization> {
    if periodic {
        Ok(build_periodic(&parse_composition(s)?.periodic()?)?)
    } else {
        Ok(build_general(&generalized(s, false)?)?)
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn rows(v: &[f64], dim: usize) -> Vec<Vec<f64>> {
    v.chunks(dim).map(<[f64]>::to_vec).collect()
}

fn numeric_json(r: &Realization, theta: f64) -> serde_json::Value {
    let nr = r.instantiate(theta);
    json!({
        "dim": nr.dim,
        "theta": theta,
        "N0": rows(&nr.n0, nr.dim),
        "N1": rows(&nr.n1, nr.dim),
        "z0": nr.z0,
        "C": nr.c,
        "states": r.states(),
    })
}

fn numeric_text(r: &Realization, theta: f64) -> String {
    let nr = r.instantiate(theta);
    let mut out = format!("dim = {}, theta = {}\n", nr.dim, theta);
    for (label, m) in [("N0", &nr.n0), ("N1", &nr.n1)] {
        out.push_str(&format!("{label} =\n"));
        for row in rows(m, nr.dim) {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:>10.6}")).collect();
            out.push_str(&format!("[{}]\n", cells.join(" ")));
        }
    }
    out.push_str(&format!("z0 = {:?}\nC  = {:?}\n", nr.z0, nr.c));
    out
}

fn trajectory(res: &EvalResult, theta: f64, format: Format) -> Result<String> {
    Ok(match format {
        Format::Csv => {
            let mut s = String::from("t,y\n");
            for &(t, y) in &res.samples {
                s.push_str(&format!("{},{}\n", format_float(t), format_float(y)));
            }
            s
        }
        Format::Json => {
            let v = json!({
                "theta": theta,
                "terminal_t": res.terminal_t,
                "terminal_y": res.terminal_y,
                "endpoint_gap": res.endpoint_gap,
                "steps_accepted": res.steps_accepted,
                "steps_rejected": res.steps_rejected,
                "samples": res.samples.iter().map(|&(t, y)| [t, y]).collect::<Vec<_>>(),
            });
            serde_json::to_string_pretty(&v)? + "\n"
        }
    })
}

fn report_json(r: &ResidualReport) -> serde_json::Value {
    json!({
        "name": r.name,
        "terminal_t": r.terminal_t,
        "max_abs_residual": r.max_abs_residual,
        "floor_suspected": r.floor_suspected,
        "rows": r.rows.iter().map(|row| json!({
            "theta": row.theta,
            "terms": row.terms,
            "target": row.target,
            "residual": row.residual,
            "endpoint_gap": row.endpoint_gap,
        })).collect::<Vec<_>>(),
        "curves": r.curves.iter().map(|c| json!({
            "theta": c.theta,
            "file": curve_file_name(c.theta),
            "points": c.points.iter().map(|&(t, v)| [t, v]).collect::<Vec<_>>(),
        })).collect::<Vec<_>>(),
    })
}

fn verify_oracle(spec: &IdentitySpec, thetas: &[f64], trunc: &TruncationSpec, tol: f64, format: Format) -> Result<ExitCode> {
    let rows = oracle_identity(spec, thetas, trunc)?;
    match format {
        Format::Csv => {
            let k = spec.terms.len();
            let mut s = String::from("theta");
            for i in 1..=k {
                s.push_str(&format!(",term_{i}"));
            }
            s.push_str(",residual,n_used\n");
            for r in &rows {
                s.push_str(&format_float(r.theta));
                for v in &r.terms {
                    s.push_str(&format!(",{}", format_float(*v)));
                }
                s.push_str(&format!(",{},{}\n", format_float(r.residual), r.n_used));
            }
            print!("{s}");
        }
        Format::Json => {
            let v: Vec<_> = rows
                .iter()
                .map(|r| json!({"theta": r.theta, "terms": r.terms, "residual": r.residual, "n_used": r.n_used, "converged": r.converged}))
                .collect();
            println!("{}", serde_json::to_string_pretty(&v)?);
        }
    }
    if rows.iter().any(|r| !r.converged) {
        eprintln!("note: θ-series hit n_max = {} before converging", trunc.n_max);
    }
    let max = rows.iter().map(|r| r.residual.abs()).fold(0.0, f64::max);
    summarize(&spec.name, max, tol, None);
    eprintln!("oracle: k1 <= {}", trunc.k_max);
    Ok(verdict(max, tol))
}

fn summarize(name: &str, max: f64, tol: f64, terminal_t: Option<f64>) {
    let at = terminal_t.map(|t| format!(" at t = {}", format_float(t))).unwrap_or_default();
    let verdict = if max <= tol { "PASS" } else { "FAIL" };
    eprintln!("{verdict} {name}: max |residual| = {max:.3e}{at} (tol {tol:e})");
}

fn verdict(max: f64, tol: f64) -> ExitCode {
    if max <= tol {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct IdentityFile {
    name: String,
    #[serde(default)]
    target: TargetFile,
    terms: Vec<TermFile>,
}

#[derive(Deserialize, Default)]
#[serde(rename_all = "snake_case")]
enum TargetFile {
    #[default]
    Zero,
    SinhPi,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TermFile {
    coeff: f64,
    s: String,
    #[serde(default = "one")]
    theta_scale: f64,
}

fn one() -> f64 {
    1.0
}

/// A built-in name, or a JSON file describing the terms.
fn identity(name: &str) -> Result<IdentitySpec> {
    if let Ok(spec) = builtin_identity(name) {
        return Ok(spec);
    }
    let path = Path::new(name);
    if !path.is_file() {
        bail!("unknown identity `{name}` (built-ins: zeta2, zeta4-31, hoffman; or pass a JSON file)");
    }
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let file: IdentityFile = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    let terms = file
        .terms
        .iter()
        .enumerate()
        .map(|(i, t)| {
            let g = parse_composition(&t.s)
                .and_then(|c| c.generalized())
                .with_context(|| format!("term {} `{}`", i + 1, t.s))?;
            Ok(IdentityTerm { coeff: t.coeff, g, theta_scale: t.theta_scale })
        })
        .collect::<Result<Vec<_>>>()?;
    let target = match file.target {
        TargetFile::Zero => Target::Zero,
        TargetFile::SinhPi => Target::SinhPi,
    };
    Ok(IdentitySpec::new(file.name, terms, target)?)
}
