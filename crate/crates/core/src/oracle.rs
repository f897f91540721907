//! Nested-sum ground truth for `Li_s(t)` and the generating functions.
//!
//! `Li_s(t) = Σ_{k1 > ... > kl >= 1} t^{k1} / (k1^{s1} ... kl^{sl})` is summed
//! with the recurrence `g_l(k) = k^{-s_l}`, `g_j(k) = k^{-s_j} Σ_{m<k} g_{j+1}(m)`,
//! one pass over `k` with one running prefix sum per level. Nothing here
//! touches the realization code.

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::theta::{rat_int, Rational};
use crate::words::{Composition, GeneralizedComposition};

#[derive(Clone, Debug, PartialEq)]
pub struct TruncationSpec {
    /// Outer cutoff `K` on `k1`.
    pub k_max: u64,
    /// Hard cap `N` on the θ-series.
    pub n_max: usize,
    /// The θ-series stops once three consecutive terms fall below
    /// `rtol` times the partial sum.
    pub rtol: f64,
}

impl Default for TruncationSpec {
    fn default() -> Self {
        TruncationSpec { k_max: 1_000_000, n_max: 200, rtol: 1e-15 }
    }
}

impl TruncationSpec {
    pub fn new(k_max: u64, n_max: usize) -> Self {
        TruncationSpec { k_max, n_max, ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k_max == 0 {
            return Err(Error::Config("k_max must be at least 1".into()));
        }
        if !(self.rtol >= 0.0 && self.rtol.is_finite()) {
            return Err(Error::Config(format!("rtol={} must be finite and nonnegative", self.rtol)));
        }
        Ok(())
    }
}

/// Fast2Sum compensation. The correction is exact whenever the running total
/// dominates the new term, which holds for the nested sums after `k = 1`.
#[derive(Clone, Copy, Default)]
struct Acc {
    sum: f64,
    comp: f64,
}

impl Acc {
    #[inline]
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        self.comp += (self.sum - t) + x;
        self.sum = t;
    }

    #[inline]
    fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// A forest of summation levels. Node 0 is the empty tail, whose strict
/// prefix sum is 1 for every `k >= 1`.
struct Chain {
    exps: Vec<u32>,
    parent: Vec<usize>,
}

const ROOT: usize = 0;

impl Chain {
    fn new() -> Self {
        Chain { exps: vec![0], parent: vec![ROOT] }
    }

    /// Stacks `parts` (outermost first) on top of `base`; returns the new top.
    fn stack(&mut self, base: usize, parts: &[u32]) -> usize {
        let mut top = base;
        for &p in parts.iter().rev() {
            self.exps.push(p);
            self.parent.push(top);
            top = self.exps.len() - 1;
        }
        top
    }

    /// `Σ_{k=1..K} t^k g_top(k)` for each requested top node.
    fn run(&self, tops: &[usize], t: f64, k_max: u64) -> Vec<f64> {
        let n = self.exps.len();
        let max_exp = self.exps.iter().copied().max().unwrap_or(0) as usize;
        let mut prefix = vec![Acc::default(); n];
        // prefix[i].value(), with the root pinned at 1
        let mut below = vec![0.0; n];
        below[ROOT] = 1.0;
        let mut g = vec![0.0; n];
        let mut pw = vec![1.0; max_exp + 1];
        let mut out = vec![Acc::default(); tops.len()];
        let mut tk = 1.0;
        for k in 1..=k_max {
            tk *= t;
            if tk == 0.0 {
                break;
            }
            let inv = 1.0 / k as f64;
            for e in 1..=max_exp {
                pw[e] = pw[e - 1] * inv;
            }
            for i in 1..n {
                g[i] = pw[self.exps[i] as usize] * below[self.parent[i]];
            }
            for (o, &top) in out.iter_mut().zip(tops) {
                o.add(tk * g[top]);
            }
            for i in 1..n {
                prefix[i].add(g[i]);
                below[i] = prefix[i].value();
            }
        }
        out.iter().zip(tops).map(|(o, &top)| if top == ROOT { 1.0 } else { o.value() }).collect()
    }
}

fn check_t(t: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::Domain(format!("t = {t} is outside [0, 1]")));
    }
    Ok(())
}

/// Truncated `Li_s(t)` with `k1 <= k_max`.
pub fn li_truncated(s: &Composition, t: f64, spec: &TruncationSpec) -> Result<f64> {
    spec.validate()?;
    check_t(t)?;
    if t == 1.0 && !s.is_admissible() {
        return Err(Error::Domain(format!("Li_({s})(1) diverges: leading part is 1")));
    }
    let mut chain = Chain::new();
    let top = chain.stack(ROOT, s.parts());
    Ok(chain.run(&[top], t, spec.k_max)[0])
}

/// `Li_{s_n}(t)` for `n = 0..=n_max`, where `s_n = (s_a, {s_b}^n, s_c)`;
/// the empty composition contributes 1. One pass shares the `(s_b^n, s_c)` levels.
pub fn li_family(g: &GeneralizedComposition, t: f64, k_max: u64, n_max: usize) -> Result<Vec<f64>> {
    if k_max == 0 {
        return Err(Error::Config("k_max must be at least 1".into()));
    }
    check_t(t)?;
    // generalized compositions are validated to start with x0 for every n,
    // so t = 1 is always convergent here
    let empty: &[u32] = &[];
    let prefix = g.prefix().map_or(empty, Composition::parts);
    let suffix = g.suffix().map_or(empty, Composition::parts);
    let mut chain = Chain::new();
    let mut inner = chain.stack(ROOT, suffix);
    let mut tops = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        if n > 0 {
            inner = chain.stack(inner, g.period().parts());
        }
        tops.push(chain.stack(inner, prefix));
    }
    Ok(chain.run(&tops, t, k_max))
}

#[derive(Clone, Debug, PartialEq)]
pub struct GenFunValue {
    pub value: f64,
    /// Highest `n` included.
    pub n_used: usize,
    /// `false` when the hard cap was reached before the stopping rule fired.
    pub converged: bool,
    /// `Li_{s_n}(t)` for `n = 0..=n_used`.
    pub li: Vec<f64>,
}

/// `Σ_n li[n] θ^{w n}` with the three-small-terms stopping rule.
pub fn theta_sum(li: &[f64], period_weight: usize, theta: f64, rtol: f64) -> (f64, usize, bool) {
    let step = theta.powi(period_weight as i32);
    let mut acc = Acc::default();
    let mut power = 1.0;
    let mut small = 0;
    for (n, &l) in li.iter().enumerate() {
        let term = l * power;
        acc.add(term);
        if term.abs() <= rtol * acc.value().abs() {
            small += 1;
            if small == 3 {
                return (acc.value(), n, true);
            }
        } else {
            small = 0;
        }
        power *= step;
    }
    (acc.value(), li.len().saturating_sub(1), false)
}

/// `L_g(t, θ)` truncated at `k1 <= k_max`, with the θ-series cut adaptively.
pub fn gen_fun_report(g: &GeneralizedComposition, t: f64, theta: f64, spec: &TruncationSpec) -> Result<GenFunValue> {
    spec.validate()?;
    if !theta.is_finite() {
        return Err(Error::Domain(format!("θ = {theta} is not finite")));
    }
    let w = g.period().weight();
    let mut n_pass = spec.n_max.min(16);
    loop {
        let li = li_family(g, t, spec.k_max, n_pass)?;
        let (value, n_used, converged) = theta_sum(&li, w, theta, spec.rtol);
        if converged || n_pass >= spec.n_max {
            let li = li[..=n_used].to_vec();
            return Ok(GenFunValue { value, n_used, converged, li });
        }
        n_pass = (2 * n_pass).min(spec.n_max);
    }
}

pub fn gen_fun_truncated(g: &GeneralizedComposition, t: f64, theta: f64, spec: &TruncationSpec) -> Result<f64> {
    gen_fun_report(g, t, theta, spec).map(|v| v.value)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ZetaFamily {
    /// `ζ({2}^n) = π^{2n} / (2n+1)!`
    Zeta2n,
    /// `ζ({3,1}^n) = 2 π^{4n} / (4n+2)!`
    Zeta31n,
}

fn factorial(m: u32) -> f64 {
    (1..=m).map(f64::from).product()
}

pub fn zeta_closed_form(which: ZetaFamily, n: u32) -> Result<f64> {
    if n < 1 {
        return Err(Error::Domain("closed forms start at n = 1".into()));
    }
    let pi = std::f64::consts::PI;
    Ok(match which {
        ZetaFamily::Zeta2n => pi.powi(2 * n as i32) / factorial(2 * n + 1),
        ZetaFamily::Zeta31n => 2.0 * pi.powi(4 * n as i32) / factorial(4 * n + 2),
    })
}

/// Exact power series truncated after `t^K`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TSeries {
    pub coeffs: Vec<Rational>,
}

impl TSeries {
    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    fn constant_one(k: usize) -> Self {
        let mut coeffs = vec![Rational::zero(); k + 1];
        coeffs[0] = Rational::one();
        TSeries { coeffs }
    }

    /// `t d/dt`, exact on every kept coefficient.
    fn euler(&self) -> Self {
        TSeries { coeffs: self.coeffs.iter().enumerate().map(|(k, c)| c * rat_int(k as i64)).collect() }
    }

    /// `d/dt`; the top coefficient is lost.
    fn derivative(&self) -> Self {
        TSeries {
            coeffs: self.coeffs.iter().enumerate().skip(1).map(|(k, c)| c * rat_int(k as i64)).collect(),
        }
    }

    /// `(1 - t) f`, exact on every kept coefficient.
    fn one_minus_t(&self) -> Self {
        let mut coeffs = self.coeffs.clone();
        for k in (1..coeffs.len()).rev() {
            coeffs[k] = &coeffs[k] - &self.coeffs[k - 1];
        }
        TSeries { coeffs }
    }

    /// Product truncated to the shorter length.
    pub fn mul(&self, other: &TSeries) -> TSeries {
        let n = self.len().min(other.len());
        let mut coeffs = vec![Rational::zero(); n];
        for i in 0..n {
            if self.coeffs[i].is_zero() {
                continue;
            }
            for j in 0..n - i {
                coeffs[i + j] += &self.coeffs[i] * &other.coeffs[j];
            }
        }
        TSeries { coeffs }
    }
}

fn li_tseries_parts(parts: &[u32], k: usize) -> TSeries {
    if parts.is_empty() {
        return TSeries::constant_one(k);
    }
    // strict prefix sums of the level below; the empty tail gives 1
    let mut below: Vec<Rational> = (0..=k).map(|_| Rational::one()).collect();
    let mut level = vec![Rational::zero(); k + 1];
    for &s in parts.iter().rev() {
        let mut run = Rational::zero();
        for m in 0..=k {
            level[m] = if m == 0 {
                Rational::zero()
            } else {
                &below[m] / rat_int(m as i64).pow(s as i32)
            };
            below[m] = run.clone();
            run += &level[m];
        }
    }
    TSeries { coeffs: level }
}

/// Exact coefficients of `Li_s` through `t^K`.
pub fn li_tseries(s: &Composition, k: usize) -> TSeries {
    li_tseries_parts(s.parts(), k)
}

/// `P_s Li_{{s}^{n+1}} = Li_{{s}^n}` on `t^0 .. t^{K-|s|}`, where
/// `P_s = P_{s_l} ... P_{s_1}` and `P_σ = ((1-t) d/dt)(t d/dt)^{σ-1}`.
pub fn fuchs_check(s: &Composition, n: usize, k: usize) -> bool {
    if k <= s.weight() {
        return false;
    }
    let rep = |m: usize| -> Vec<u32> { s.parts().iter().copied().cycle().take(m * s.depth()).collect() };
    let mut f = li_tseries_parts(&rep(n + 1), k);
    for &sigma in s.parts() {
        for _ in 1..sigma {
            f = f.euler();
        }
        f = f.derivative().one_minus_t();
    }
    let target = li_tseries_parts(&rep(n), k);
    let upto = k - s.weight();
    f.coeffs[..=upto] == target.coeffs[..=upto]
}

/// `Li_2^2 = 4 Li_{3,1} + 2 Li_{2,2}` through `t^K`.
pub fn shuffle_check(k: usize) -> bool {
    let li = |p: &[u32]| li_tseries_parts(p, k);
    let lhs = li(&[2]).mul(&li(&[2]));
    let (a, b) = (li(&[3, 1]), li(&[2, 2]));
    let rhs: Vec<Rational> =
        a.coeffs.iter().zip(&b.coeffs).map(|(x, y)| x * rat_int(4) + y * rat_int(2)).collect();
    lhs.coeffs == rhs
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_composition;
    use crate::theta::rat;

    fn comp(p: &[u32]) -> Composition {
        Composition::new(p.to_vec()).unwrap()
    }

    #[test]
    fn small_values() {
        let spec = TruncationSpec::new(1000, 0);
        assert_eq!(li_truncated(&comp(&[2]), 0.0, &spec).unwrap(), 0.0);
        // Li_1(1/2) = ln 2
        let l1 = li_truncated(&comp(&[1]), 0.5, &spec).unwrap();
        assert!((l1 - 2f64.ln()).abs() < 1e-15);
        assert!(matches!(li_truncated(&comp(&[1, 2]), 1.0, &spec), Err(Error::Domain(_))));
        assert!(matches!(li_truncated(&comp(&[2]), 1.5, &spec), Err(Error::Domain(_))));
        assert!(li_truncated(&comp(&[2]), f64::NAN, &spec).is_err());
    }

    #[test]
    fn family_matches_single_terms() {
        let g = parse_composition("2,1,{2},3").unwrap().generalized().unwrap();
        let fam = li_family(&g, 0.7, 2000, 3).unwrap();
        let spec = TruncationSpec::new(2000, 0);
        for n in 0..=3 {
            let s = g.expanded(n).unwrap();
            let one = li_truncated(&s, 0.7, &spec).unwrap();
            assert!((fam[n] - one).abs() < 1e-15, "n={n}");
        }
        let p = parse_composition("{2}").unwrap().generalized().unwrap();
        assert_eq!(li_family(&p, 0.3, 100, 0).unwrap(), vec![1.0]);
    }

    #[test]
    fn theta_zero_keeps_first_term() {
        let g = parse_composition("{2},3,3").unwrap().generalized().unwrap();
        let spec = TruncationSpec::new(5000, 40);
        let v = gen_fun_report(&g, 0.5, 0.0, &spec).unwrap();
        let s0 = li_truncated(&comp(&[3, 3]), 0.5, &spec).unwrap();
        assert_eq!(v.value, s0);
        assert!(v.converged);
    }

    #[test]
    fn closed_forms() {
        let pi = std::f64::consts::PI;
        assert!((zeta_closed_form(ZetaFamily::Zeta2n, 1).unwrap() - pi * pi / 6.0).abs() < 1e-15);
        assert!((zeta_closed_form(ZetaFamily::Zeta31n, 1).unwrap() - pi.powi(4) / 360.0).abs() < 1e-15);
        assert!((zeta_closed_form(ZetaFamily::Zeta2n, 2).unwrap() - 0.8117424).abs() < 1e-7);
        assert!(zeta_closed_form(ZetaFamily::Zeta2n, 0).is_err());
    }

    #[test]
    fn exact_series() {
        assert_eq!(li_tseries(&comp(&[2]), 3).coeffs, vec![rat(0, 1), rat(1, 1), rat(1, 4), rat(1, 9)]);
        assert_eq!(li_tseries(&comp(&[2, 1]), 3).coeffs, vec![rat(0, 1), rat(0, 1), rat(1, 4), rat(1, 6)]);
    }

    #[test]
    fn fuchs_and_shuffle() {
        assert!(fuchs_check(&comp(&[2]), 0, 50));
        assert!(fuchs_check(&comp(&[3, 1]), 0, 50));
        assert!(fuchs_check(&comp(&[2]), 2, 80));
        assert!(shuffle_check(30));
        assert!(shuffle_check(2));
        assert!(shuffle_check(1));
    }

    #[test]
    fn fuchs_detects_wrong_operator_order() {
        // applying the factors for (1,3) to Li_{3,1} must not strip it
        let rep = li_tseries(&comp(&[3, 1]), 30);
        let mut f = rep.clone();
        for &sigma in &[1u32, 3] {
            for _ in 1..sigma {
                f = f.euler();
            }
            f = f.derivative().one_minus_t();
        }
        assert_ne!(f.coeffs[..=26], TSeries::constant_one(30).coeffs[..=26]);
    }
}
