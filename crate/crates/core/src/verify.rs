//! Identity harness: linear combinations of generating functions near `t = 1`,
//! evaluated by simulation and by the nested-sum oracle.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::oracle::{li_family, theta_sum, TruncationSpec};
use crate::parse::parse_composition;
use crate::realize::{build_general, build_periodic, Realization};
use crate::simulate::{integrate_until, sweep_theta, EvalResult, IntegratorConfig};
use crate::words::GeneralizedComposition;

#[derive(Clone, Debug, PartialEq)]
pub struct IdentityTerm {
    pub coeff: f64,
    pub g: GeneralizedComposition,
    /// The term is evaluated at `theta_scale · θ`.
    pub theta_scale: f64,
}

/// What the combination of terms should equal.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Target {
    Zero,
    /// `sinh(πθ)/(πθ)`, the closed form of `L_(2)(1, θ)`.
    SinhPi,
}

impl Target {
    pub fn at(&self, theta: f64) -> f64 {
        match self {
            Target::Zero => 0.0,
            Target::SinhPi => sinh_pi_over_pi(theta),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Target::Zero => "0",
            Target::SinhPi => "sinh(pi theta)/(pi theta)",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct IdentitySpec {
    pub name: String,
    pub terms: Vec<IdentityTerm>,
    pub target: Target,
}

impl IdentitySpec {
    pub fn new(name: impl Into<String>, terms: Vec<IdentityTerm>, target: Target) -> Result<Self> {
        let name = name.into();
        let min_terms = if target == Target::Zero { 2 } else { 1 };
        if terms.len() < min_terms {
            return Err(Error::Domain(format!("identity `{name}` needs at least {min_terms} terms")));
        }
        for (i, t) in terms.iter().enumerate() {
            if t.coeff == 0.0 || !t.coeff.is_finite() || !t.theta_scale.is_finite() {
                return Err(Error::Domain(format!(
                    "identity `{name}` term {}: coefficient must be nonzero and finite, scale finite",
                    i + 1
                )));
            }
        }
        Ok(IdentitySpec { name, terms, target })
    }
}

/// `sinh(πθ)/(πθ)`, the value of `L_(2)(1, θ)`.
pub fn sinh_pi_over_pi(theta: f64) -> f64 {
    let x = std::f64::consts::PI * theta;
    if x == 0.0 {
        1.0
    } else {
        x.sinh() / x
    }
}

fn gen(s: &str) -> GeneralizedComposition {
    parse_composition(s)
        .and_then(|c| c.generalized())
        .expect("built-in compositions are valid")
}

fn term(coeff: f64, s: &str, theta_scale: f64) -> IdentityTerm {
    IdentityTerm { coeff, g: gen(s), theta_scale }
}

/// `zeta2`, `zeta4_31` (also `zeta4-31`), or `hoffman`.
pub fn builtin_identity(name: &str) -> Result<IdentitySpec> {
    match name {
        "zeta2" => IdentitySpec::new(
            "zeta2",
            vec![term(1.0, "{2}", 1.0)],
            Target::SinhPi,
        ),
        "zeta4_31" | "zeta4-31" => IdentitySpec::new(
            "zeta4_31",
            vec![term(1.0, "{4}", 1.0), term(-1.0, "{3,1}", std::f64::consts::SQRT_2)],
            Target::Zero,
        ),
        "hoffman" => IdentitySpec::new(
            "hoffman",
            vec![term(1.0, "{2},2,2,2", 1.0), term(2.0, "{2},3,3", 1.0), term(-1.0, "2,1,{2},3", 1.0)],
            Target::Zero,
        ),
        other => Err(Error::UnknownIdentity(other.to_string())),
    }
}

/// Which builder realizes purely periodic terms.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Builder {
    /// Closed form for purely periodic terms, state closure otherwise.
    #[default]
    Auto,
    /// State closure for every term.
    General,
}

pub fn realize_term(g: &GeneralizedComposition, builder: Builder) -> Result<Realization> {
    match builder {
        Builder::Auto if g.is_purely_periodic() => build_periodic(g.period()),
        _ => build_general(g),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ResidualRow {
    pub theta: f64,
    /// Terminal value of each term, before its coefficient.
    pub terms: Vec<f64>,
    pub target: f64,
    pub residual: f64,
    /// `Σ |coeff| · endpoint_gap` over the terms.
    pub endpoint_gap: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ResidualCurve {
    pub theta: f64,
    /// `(t, Σ coeff · y(t) - target)` on the shared sample grid.
    pub points: Vec<(f64, f64)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ResidualReport {
    pub name: String,
    pub terminal_t: f64,
    /// Sorted by θ.
    pub rows: Vec<ResidualRow>,
    pub curves: Vec<ResidualCurve>,
    pub max_abs_residual: f64,
    /// Set when the residual at the smallest θ is not clearly below the one at
    /// the largest θ; a θ-independent floor points at integrator bias.
    pub floor_suspected: bool,
}

#[derive(Clone, Debug)]
pub struct RunOptions {
    pub jobs: usize,
    pub builder: Builder,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions { jobs: 1, builder: Builder::Auto }
    }
}

fn sorted(thetas: &[f64]) -> Result<Vec<f64>> {
    if let Some(bad) = thetas.iter().find(|t| !t.is_finite()) {
        return Err(Error::Domain(format!("θ = {bad} is not finite")));
    }
    let mut v = thetas.to_vec();
    v.sort_by(f64::total_cmp);
    Ok(v)
}

fn at_term(spec: &IdentitySpec, i: usize, e: Error) -> Error {
    Error::AtTerm { term: i + 1, composition: spec.terms[i].g.to_string(), source: Box::new(e) }
}

pub fn run_identity(spec: &IdentitySpec, thetas: &[f64], cfg: &IntegratorConfig) -> Result<ResidualReport> {
    run_identity_with(spec, thetas, cfg, &RunOptions::default())
}

pub fn run_identity_with(
    spec: &IdentitySpec,
    thetas: &[f64],
    cfg: &IntegratorConfig,
    opts: &RunOptions,
) -> Result<ResidualReport> {
    cfg.validate()?;
    let thetas = sorted(thetas)?;
    // per_term[i][j]: term i at thetas[j]
    let mut per_term: Vec<Vec<EvalResult>> = Vec::with_capacity(spec.terms.len());
    for (i, t) in spec.terms.iter().enumerate() {
        let r = realize_term(&t.g, opts.builder).map_err(|e| at_term(spec, i, e))?;
        let scaled: Vec<f64> = thetas.iter().map(|th| t.theta_scale * th).collect();
        let res = sweep_theta(&r, &scaled, cfg, opts.jobs).map_err(|e| at_term(spec, i, e))?;
        per_term.push(res);
    }

    let mut rows = Vec::with_capacity(thetas.len());
    let mut curves = Vec::with_capacity(thetas.len());
    for (j, &theta) in thetas.iter().enumerate() {
        let target = spec.target.at(theta);
        let terms: Vec<f64> = per_term.iter().map(|r| r[j].terminal_y).collect();
        let residual = combine(spec, per_term.iter().map(|r| r[j].terminal_y)) - target;
        let endpoint_gap =
            spec.terms.iter().zip(&per_term).map(|(t, r)| t.coeff.abs() * r[j].endpoint_gap).sum();
        rows.push(ResidualRow { theta, terms, target, residual, endpoint_gap });

        // every term ran on the same config, hence on the same sample grid
        let grid = &per_term[0][j].samples;
        let points = grid
            .iter()
            .enumerate()
            .map(|(k, &(t, _))| {
                debug_assert!(per_term.iter().all(|r| r[j].samples[k].0 == t));
                (t, combine(spec, per_term.iter().map(|r| r[j].samples[k].1)) - target)
            })
            .collect();
        curves.push(ResidualCurve { theta, points });
    }

    let max_abs_residual = rows.iter().map(|r| r.residual.abs()).fold(0.0, f64::max);
    let floor_suspected = match (rows.first(), rows.last()) {
        (Some(lo), Some(hi)) if rows.len() >= 2 && lo.theta.abs() <= 0.5 * hi.theta.abs() => {
            hi.residual != 0.0 && lo.residual.abs() > 0.5 * hi.residual.abs()
        }
        _ => false,
    };
    Ok(ResidualReport {
        name: spec.name.clone(),
        terminal_t: cfg.terminal_t(),
        rows,
        curves,
        max_abs_residual,
        floor_suspected,
    })
}

fn combine(spec: &IdentitySpec, values: impl Iterator<Item = f64>) -> f64 {
    spec.terms.iter().zip(values).map(|(t, v)| t.coeff * v).sum()
}

#[derive(Clone, Debug, PartialEq)]
pub struct OracleRow {
    pub theta: f64,
    pub terms: Vec<f64>,
    pub target: f64,
    pub residual: f64,
    /// Largest θ-series cutoff used over the terms.
    pub n_used: usize,
    pub converged: bool,
}

/// The identity at `t = 1` from truncated nested sums. Each term's `Li` family
/// is computed once and reused across θ; the θ-series cutoff grows until every
/// θ has converged or `n_max` is reached.
pub fn oracle_identity(spec: &IdentitySpec, thetas: &[f64], trunc: &TruncationSpec) -> Result<Vec<OracleRow>> {
    trunc.validate()?;
    let thetas = sorted(thetas)?;
    let mut sums: Vec<Vec<(f64, usize, bool)>> = Vec::with_capacity(spec.terms.len());
    for (i, t) in spec.terms.iter().enumerate() {
        let w = t.g.period().weight();
        let mut n_pass = trunc.n_max.min(16);
        loop {
            let li = li_family(&t.g, 1.0, trunc.k_max, n_pass).map_err(|e| at_term(spec, i, e))?;
            let per: Vec<_> = thetas.iter().map(|th| theta_sum(&li, w, t.theta_scale * th, trunc.rtol)).collect();
            if per.iter().all(|p| p.2) || n_pass >= trunc.n_max {
                sums.push(per);
                break;
            }
            n_pass = (2 * n_pass).min(trunc.n_max);
        }
    }
    Ok(thetas
        .iter()
        .enumerate()
        .map(|(j, &theta)| {
            let terms: Vec<f64> = sums.iter().map(|s| s[j].0).collect();
            let target = spec.target.at(theta);
            OracleRow {
                theta,
                residual: combine(spec, terms.iter().copied()) - target,
                terms,
                target,
                n_used: sums.iter().map(|s| s[j].1).max().unwrap_or(0),
                converged: sums.iter().all(|s| s[j].2),
            }
        })
        .collect())
}

#[derive(Clone, Debug, PartialEq)]
pub struct CrossRow {
    pub theta: f64,
    pub simulated: f64,
    pub oracle: f64,
    pub diff: f64,
}

/// Simulation against the oracle at one `t`. For `t = 1` the simulated value is
/// the terminal value at `1 - eps_end / 2^halvings`.
pub fn cross_validate(
    g: &GeneralizedComposition,
    t: f64,
    thetas: &[f64],
    cfg: &IntegratorConfig,
    trunc: &TruncationSpec,
) -> Result<Vec<CrossRow>> {
    trunc.validate()?;
    let r = build_general(g)?;
    let w = g.period().weight();
    let mut n_pass = trunc.n_max.min(16);
    let oracle: Vec<f64> = loop {
        let li = li_family(g, t, trunc.k_max, n_pass)?;
        let per: Vec<_> = thetas.iter().map(|&th| theta_sum(&li, w, th, trunc.rtol)).collect();
        if per.iter().all(|p| p.2) || n_pass >= trunc.n_max {
            break per.into_iter().map(|p| p.0).collect();
        }
        n_pass = (2 * n_pass).min(trunc.n_max);
    };
    thetas
        .iter()
        .zip(oracle)
        .map(|(&theta, oracle)| {
            let nr = r.instantiate(theta);
            let simulated = if t < 1.0 {
                integrate_until(&nr, cfg, t).map(|(_, y)| y)
            } else {
                crate::simulate::integrate(&nr, cfg).map(|e| e.terminal_y)
            }
            .map_err(|e| Error::AtTheta { theta, source: Box::new(e) })?;
            Ok(CrossRow { theta, simulated, oracle, diff: simulated - oracle })
        })
        .collect()
}

/// 17 significant digits, enough to round-trip an `f64`.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// `theta,term_1,...,term_k,residual,endpoint_gap`.
pub fn residual_csv(report: &ResidualReport) -> String {
    let k = report.rows.first().map_or(0, |r| r.terms.len());
    let mut out = String::from("theta");
    for i in 1..=k {
        out.push_str(&format!(",term_{i}"));
    }
    out.push_str(",residual,endpoint_gap\n");
    for r in &report.rows {
        out.push_str(&format_float(r.theta));
        for v in &r.terms {
            out.push(',');
            out.push_str(&format_float(*v));
        }
        out.push_str(&format!(",{},{}\n", format_float(r.residual), format_float(r.endpoint_gap)));
    }
    out
}

pub fn curve_csv(curve: &ResidualCurve) -> String {
    let mut out = String::from("t,residual\n");
    for &(t, r) in &curve.points {
        out.push_str(&format!("{},{}\n", format_float(t), format_float(r)));
    }
    out
}

pub fn curve_file_name(theta: f64) -> String {
    format!("residual_theta_{theta:.2}.csv")
}

/// Writes `residuals.csv` and one `residual_theta_<θ>.csv` per curve into `dir`.
pub fn write_report(report: &ResidualReport, dir: &Path) -> std::io::Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let main = dir.join("residuals.csv");
    fs::File::create(&main)?.write_all(residual_csv(report).as_bytes())?;
    written.push(main);
    for c in &report.curves {
        let p = dir.join(curve_file_name(c.theta));
        fs::File::create(&p)?.write_all(curve_csv(c).as_bytes())?;
        written.push(p);
    }
    Ok(written)
}
