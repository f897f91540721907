//! Bilinear realizations `(N0, N1, z0, C)` of the generating series `c_s`.
//!
//! The state equations are `dz/dt = N0 z u0 + N1 z u1`, `y = C z`, with
//! `u0 = 1/t` and `u1 = 1/(1 - t)`. Row `k` of `N_i` says how the left shift
//! of state `k` by the letter `x_i` decomposes into the other states.
//!
//! Purely periodic compositions have a closed form ([`build_periodic`]). The
//! general case ([`build_general`]) runs a state-closure loop over series
//! expressions of the form `Σ p_w w + Σ q_w w c̄`, where the tail series
//! `c̄ = eta(s_c) + θ^{|s_b|} eta(s_b) c̄` absorbs the periodic block. A
//! constant left over after shifting (the word `x1` shifted by `x1`) becomes an
//! affine drive, which is removed by appending one constant state.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::ratseries::LinearRepresentation;
use crate::theta::{ThetaMatrix, ThetaPoly};
use crate::words::{Composition, GeneralizedComposition, Letter, Word};

/// A finite series expression `Σ poly[w]·w + Σ tail[w]·w·c̄`.
///
/// Both maps hold no zero coefficients, so structural equality is series
/// equality for a fixed `c̄` written in unexpanded form.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SeriesExpr {
    poly: BTreeMap<Word, ThetaPoly>,
    tail: BTreeMap<Word, ThetaPoly>,
}

/// Data needed to unfold `c̄` once.
struct TailRecursion {
    suffix: Word,
    period: Word,
    period_power: ThetaPoly,
}

impl SeriesExpr {
    pub fn tail_term(w: Word, q: ThetaPoly) -> Self {
        let mut e = SeriesExpr::default();
        add_to(&mut e.tail, w, &q);
        e
    }

    pub fn poly_term(w: Word, q: ThetaPoly) -> Self {
        let mut e = SeriesExpr::default();
        add_to(&mut e.poly, w, &q);
        e
    }

    pub fn is_zero(&self) -> bool {
        self.poly.is_empty() && self.tail.is_empty()
    }

    pub fn poly(&self) -> &BTreeMap<Word, ThetaPoly> {
        &self.poly
    }

    pub fn tail(&self) -> &BTreeMap<Word, ThetaPoly> {
        &self.tail
    }

    /// Constant term of the series; `c̄` has constant term 1 only when `s_c` is empty.
    fn constant_term(&self, suffix_empty: bool) -> ThetaPoly {
        let mut c = self.poly.get(&Word::empty()).cloned().unwrap_or_default();
        if suffix_empty {
            if let Some(q) = self.tail.get(&Word::empty()) {
                c += q;
            }
        }
        c
    }

    /// `x_i^{-1}(self)` split into `(expression, constant)`. The constant is
    /// the coefficient of the single-letter polynomial word `x_i`.
    fn shift(&self, letter: Letter, rec: &TailRecursion) -> (SeriesExpr, ThetaPoly) {
        let x = Word::letter(letter);
        let mut poly = self.poly.clone();
        let mut tail = BTreeMap::new();
        for (w, q) in &self.tail {
            if w.is_empty() {
                // unfold c̄ once before shifting
                add_to(&mut poly, rec.suffix.clone(), q);
                add_to(&mut tail, rec.period.clone(), &(q * &rec.period_power));
            } else {
                add_to(&mut tail, w.clone(), q);
            }
        }

        let mut out = SeriesExpr::default();
        let mut kappa = ThetaPoly::zero();
        for (w, q) in &poly {
            match w.left_shift(&x) {
                Some(rest) if rest.is_empty() => kappa += q,
                Some(rest) => add_to(&mut out.poly, rest, q),
                None => {}
            }
        }
        for (w, q) in &tail {
            if let Some(rest) = w.left_shift(&x) {
                add_to(&mut out.tail, rest, q);
            }
        }
        (out, kappa)
    }

    /// The θ-monomial `β` such that every term of `β·self` occurs in `other`
    /// with exactly that coefficient.
    fn scale_within(&self, other: &SeriesExpr) -> Option<ThetaPoly> {
        let (key, coeff, in_tail) = match self.poly.iter().next() {
            Some((w, q)) => (w, q, false),
            None => {
                let (w, q) = self.tail.iter().next()?;
                (w, q, true)
            }
        };
        let target = if in_tail { other.tail.get(key)? } else { other.poly.get(key)? };
        let beta = coeff.monomial_quotient(target)?;
        let fits = |mine: &BTreeMap<Word, ThetaPoly>, theirs: &BTreeMap<Word, ThetaPoly>| {
            mine.iter().all(|(w, q)| theirs.get(w) == Some(&(&beta * q)))
        };
        (fits(&self.poly, &other.poly) && fits(&self.tail, &other.tail)).then_some(beta)
    }

    fn scaled(&self, beta: &ThetaPoly) -> SeriesExpr {
        let scale = |m: &BTreeMap<Word, ThetaPoly>| m.iter().map(|(w, q)| (w.clone(), beta * q)).collect();
        SeriesExpr { poly: scale(&self.poly), tail: scale(&self.tail) }
    }

    /// A multiple of `c̄` alone.
    fn is_tail_root(&self) -> bool {
        self.poly.is_empty() && self.tail.len() == 1 && self.tail.keys().all(Word::is_empty)
    }

    fn subtract_scaled(&mut self, e: &SeriesExpr, beta: &ThetaPoly) {
        for (w, q) in &e.poly {
            add_to(&mut self.poly, w.clone(), &-&(beta * q));
        }
        for (w, q) in &e.tail {
            add_to(&mut self.tail, w.clone(), &-&(beta * q));
        }
    }
}

fn add_to(map: &mut BTreeMap<Word, ThetaPoly>, w: Word, q: &ThetaPoly) {
    if q.is_zero() {
        return;
    }
    let vanished = {
        let entry = map.entry(w.clone()).or_default();
        *entry += q;
        entry.is_zero()
    };
    if vanished {
        map.remove(&w);
    }
}

fn fmt_term(f: &mut fmt::Formatter<'_>, q: &ThetaPoly, body: &str) -> fmt::Result {
    if q.is_one() {
        f.write_str(body)
    } else if q.as_monomial().is_some() {
        write!(f, "{q}·{body}")
    } else {
        write!(f, "({q})·{body}")
    }
}

impl fmt::Display for SeriesExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let mut first = true;
        for (w, q) in &self.poly {
            if !first {
                f.write_str(" + ")?;
            }
            first = false;
            fmt_term(f, q, &w.to_string())?;
        }
        for (w, q) in &self.tail {
            if !first {
                f.write_str(" + ")?;
            }
            first = false;
            let body = if w.is_empty() { "c̄".to_string() } else { format!("{w}·c̄") };
            fmt_term(f, q, &body)?;
        }
        Ok(())
    }
}

/// `(N0, N1, z0, C)` with symbolic θ, plus a description of each state.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Realization {
    dim: usize,
    n0: ThetaMatrix,
    n1: ThetaMatrix,
    z0: Vec<ThetaPoly>,
    c: Vec<ThetaPoly>,
    states: Vec<String>,
    drives: [Vec<ThetaPoly>; 2],
    embedded: bool,
}

impl Realization {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n(&self, l: Letter) -> &ThetaMatrix {
        match l {
            Letter::X0 => &self.n0,
            Letter::X1 => &self.n1,
        }
    }

    pub fn n0(&self) -> &ThetaMatrix {
        &self.n0
    }

    pub fn n1(&self) -> &ThetaMatrix {
        &self.n1
    }

    pub fn z0(&self) -> &[ThetaPoly] {
        &self.z0
    }

    pub fn c(&self) -> &[ThetaPoly] {
        &self.c
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    /// Affine drive columns `B0`, `B1` found before the constant-state embedding.
    pub fn drives(&self) -> &[Vec<ThetaPoly>; 2] {
        &self.drives
    }

    pub fn is_embedded(&self) -> bool {
        self.embedded
    }

    pub fn representation(&self) -> LinearRepresentation {
        LinearRepresentation::new(self.n0.clone(), self.n1.clone(), self.z0.clone(), self.c.clone())
            .expect("realization shapes are consistent by construction")
    }

    pub fn instantiate(&self, theta: f64) -> NumericRealization {
        NumericRealization {
            dim: self.dim,
            n0: self.n0.eval(theta),
            n1: self.n1.eval(theta),
            z0: self.z0.iter().map(|p| p.eval(theta)).collect(),
            c: self.c.iter().map(|p| p.eval(theta)).collect(),
        }
    }

    /// `N0 z0` as exact polynomials; zero for every constructed realization.
    pub fn startup_defect(&self) -> Vec<ThetaPoly> {
        self.n0.mul_vec(&self.z0)
    }

    /// JSON dump: `dim`, `N0`, `N1` (θ-polynomial objects), `z0`, `C` (0/1), `states`.
    pub fn to_json(&self) -> serde_json::Value {
        let vector = |v: &[ThetaPoly]| -> serde_json::Value {
            serde_json::Value::Array(
                v.iter()
                    .map(|p| match (p.is_zero(), p.is_one()) {
                        (true, _) => serde_json::Value::from(0),
                        (_, true) => serde_json::Value::from(1),
                        _ => p.to_json(),
                    })
                    .collect(),
            )
        };
        serde_json::json!({
            "dim": self.dim,
            "N0": self.n0.to_json(),
            "N1": self.n1.to_json(),
            "z0": vector(&self.z0),
            "C": vector(&self.c),
            "states": self.states,
        })
    }
}

impl fmt::Display for Realization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "dim = {}", self.dim)?;
        writeln!(f, "N0 =\n{}", self.n0)?;
        writeln!(f, "N1 =\n{}", self.n1)?;
        let list = |v: &[ThetaPoly]| v.iter().map(ToString::to_string).collect::<Vec<_>>().join(", ");
        writeln!(f, "z0 = ({})", list(&self.z0))?;
        writeln!(f, "C  = ({})", list(&self.c))?;
        writeln!(f, "states:")?;
        for (i, s) in self.states.iter().enumerate() {
            writeln!(f, "  z{} = F[{}]", i + 1, s)?;
        }
        Ok(())
    }
}

/// Closed-form realization of a purely periodic composition.
///
/// `N0 = diag(N0(s1), ..., N0(sl))` with superdiagonal blocks,
/// `N1 = I+ - N0 + θ^{|s|} e_{|s|} e_1^T`, `z0 = C^T = e1`.
pub fn build_periodic(s: &Composition) -> Result<Realization> {
    if !s.is_admissible() {
        return Err(Error::NotAdmissible(format!(
            "({s}) has leading part {} < 2; its word starts with x1",
            s.parts()[0]
        )));
    }
    let dim = s.weight();
    let power = ThetaPoly::theta_pow(dim as u32);
    let mut n0 = ThetaMatrix::zeros(dim, dim);
    let mut n1 = ThetaMatrix::zeros(dim, dim);
    let mut start = 0;
    for &p in s.parts() {
        let p = p as usize;
        for i in start..start + p - 1 {
            n0.set(i, i + 1, ThetaPoly::one());
        }
        let end = start + p - 1;
        if end + 1 < dim {
            n1.set(end, end + 1, ThetaPoly::one());
        }
        start += p;
    }
    n1.set(dim - 1, 0, power.clone());

    let eta = s.to_word();
    let mut states = vec![SeriesExpr::tail_term(Word::empty(), ThetaPoly::one()).to_string()];
    for j in 1..dim {
        let rest = Word::from_letters(eta.letters()[j..].to_vec());
        states.push(SeriesExpr::tail_term(rest, power.clone()).to_string());
    }
    let mut e1 = vec![ThetaPoly::zero(); dim];
    e1[0] = ThetaPoly::one();
    Ok(Realization {
        dim,
        n0,
        n1,
        z0: e1.clone(),
        c: e1,
        states,
        drives: [vec![ThetaPoly::zero(); dim], vec![ThetaPoly::zero(); dim]],
        embedded: false,
    })
}

pub fn default_state_cap(g: &GeneralizedComposition) -> usize {
    64 * (g.prefix_weight() + g.period().weight() + g.suffix_weight() + 1)
}

/// State-closure construction for `(s_a, {s_b}, s_c)`, with the default state cap.
pub fn build_general(g: &GeneralizedComposition) -> Result<Realization> {
    build_general_with_cap(g, default_state_cap(g))
}

pub fn build_general_with_cap(g: &GeneralizedComposition, cap: usize) -> Result<Realization> {
    let rec = TailRecursion {
        suffix: g.suffix_word(),
        period: g.period_word(),
        period_power: ThetaPoly::theta_pow(g.period().weight() as u32),
    };
    let suffix_empty = g.suffix().is_none();

    let mut states = vec![SeriesExpr::tail_term(g.prefix_word(), ThetaPoly::one())];
    // sparse rows of N0 / N1 and the drive constants, grown as states appear
    let mut rows: [Vec<Vec<(usize, ThetaPoly)>>; 2] = [Vec::new(), Vec::new()];
    let mut drives: [Vec<ThetaPoly>; 2] = [Vec::new(), Vec::new()];

    let mut k = 0;
    while k < states.len() {
        for letter in Letter::ALL {
            let (mut rest, kappa) = states[k].shift(letter, &rec);
            let li = letter.index();
            let mut row = Vec::new();
            // a whole-expression match against any state wins; otherwise only
            // multiples of c̄ are split off, the rest becomes one new state
            let whole = states
                .iter()
                .enumerate()
                .find_map(|(j, e)| e.scale_within(&rest).filter(|b| e.scaled(b) == rest).map(|b| (j, b)));
            if let Some((j, beta)) = whole {
                rest = SeriesExpr::default();
                row.push((j, beta));
            }
            for (j, e) in states.iter().enumerate() {
                if rest.is_zero() {
                    break;
                }
                if !e.is_tail_root() {
                    continue;
                }
                if let Some(beta) = e.scale_within(&rest) {
                    rest.subtract_scaled(e, &beta);
                    row.push((j, beta));
                }
            }
            if !rest.is_zero() {
                row.push((states.len(), ThetaPoly::one()));
                states.push(rest);
                if states.len() > cap {
                    return Err(Error::StateCap { cap });
                }
            }
            rows[li].push(row);
            drives[li].push(kappa);
        }
        k += 1;
    }

    let n = states.len();
    let embedded = drives.iter().any(|d| d.iter().any(|q| !q.is_zero()));
    let dim = if embedded { n + 1 } else { n };
    let mut mats = [ThetaMatrix::zeros(dim, dim), ThetaMatrix::zeros(dim, dim)];
    for li in 0..2 {
        for (r, row) in rows[li].iter().enumerate() {
            for (col, beta) in row {
                *mats[li].get_mut(r, *col) += beta;
            }
        }
        if embedded {
            for (r, q) in drives[li].iter().enumerate() {
                mats[li].set(r, n, q.clone());
            }
        }
    }
    let mut z0: Vec<ThetaPoly> = states.iter().map(|e| e.constant_term(suffix_empty)).collect();
    let mut c = vec![ThetaPoly::zero(); n];
    c[0] = ThetaPoly::one();
    let mut descr: Vec<String> = states.iter().map(ToString::to_string).collect();
    if embedded {
        z0.push(ThetaPoly::one());
        c.push(ThetaPoly::zero());
        descr.push("1".into());
    }
    let [n0, n1] = mats;
    Ok(Realization { dim, n0, n1, z0, c, states: descr, drives, embedded })
}

/// `(N0, N1, z0, C)` evaluated at a numeric θ; matrices row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct NumericRealization {
    pub dim: usize,
    pub n0: Vec<f64>,
    pub n1: Vec<f64>,
    pub z0: Vec<f64>,
    pub c: Vec<f64>,
}

impl NumericRealization {
    pub fn n0_entry(&self, r: usize, c: usize) -> f64 {
        self.n0[r * self.dim + c]
    }

    pub fn n1_entry(&self, r: usize, c: usize) -> f64 {
        self.n1[r * self.dim + c]
    }

    pub fn output(&self, z: &[f64]) -> f64 {
        self.c.iter().zip(z).map(|(a, b)| a * b).sum()
    }
}

pub fn instantiate(r: &Realization, theta: f64) -> NumericRealization {
    r.instantiate(theta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_composition;
    use crate::ratseries::repr_equals_pattern;

    fn comp(p: &[u32]) -> Composition {
        Composition::new(p.to_vec()).unwrap()
    }

    fn gen(s: &str) -> GeneralizedComposition {
        parse_composition(s).unwrap().generalized().unwrap()
    }

    #[test]
    fn periodic_two() {
        let r = build_periodic(&comp(&[2])).unwrap();
        assert_eq!(r.dim(), 2);
        assert!(r.n0().get(0, 1).is_one());
        assert_eq!(r.n1().get(1, 0), &ThetaPoly::theta_pow(2));
        assert_eq!(r.n0().nonzeros().count(), 1);
        assert_eq!(r.n1().nonzeros().count(), 1);
        assert_eq!(r.states(), &["c̄".to_string(), "θ^2·x1·c̄".to_string()]);
    }

    #[test]
    fn periodic_rejects_leading_one() {
        assert!(matches!(build_periodic(&comp(&[1, 2])), Err(Error::NotAdmissible(_))));
    }

    #[test]
    fn general_matches_periodic_for_small_weights() {
        for wt in 2..=6 {
            for s in Composition::admissible_of_weight(wt) {
                let a = build_periodic(&s).unwrap();
                let b = build_general(&GeneralizedComposition::periodic(s.clone()).unwrap()).unwrap();
                assert_eq!(a, b, "composition ({s})");
            }
        }
    }

    #[test]
    fn suffix_equal_to_period_still_realizes() {
        // eta(s_c) is a power of eta(s_b): the tail state can reappear
        for s in ["{2},2", "{2},2,2", "2,{2},2", "3,{3},3"] {
            let g = gen(s);
            let r = build_general(&g).unwrap();
            let rep = repr_equals_pattern(&g, &r.representation(), 12);
            assert!(rep.is_ok(), "{s}: {rep}");
        }
    }

    #[test]
    fn prefix_only_has_no_embedding() {
        let g = gen("3,{2}");
        let r = build_general(&g).unwrap();
        assert!(!r.is_embedded());
        // z0 sits on the c̄ state, not on state 1
        assert!(r.z0()[0].is_zero());
        assert_eq!(r.z0().iter().filter(|q| q.is_one()).count(), 1);
        assert!(repr_equals_pattern(&g, &r.representation(), 12).is_ok());
    }

    #[test]
    fn state_cap_is_loud() {
        let g = gen("2,1,{2},3");
        assert_eq!(build_general_with_cap(&g, 3), Err(Error::StateCap { cap: 3 }));
        assert!(build_general_with_cap(&g, 6).is_ok());
    }

    #[test]
    fn instantiate_entries() {
        let r2 = build_periodic(&comp(&[2])).unwrap();
        assert_eq!(r2.instantiate(1.0).n1_entry(1, 0), 1.0);
        let r4 = build_periodic(&comp(&[4])).unwrap();
        assert!(r4.instantiate(0.0).n1.iter().all(|&v| v == 0.0));
        let r31 = build_periodic(&comp(&[3, 1])).unwrap();
        assert!((r31.instantiate(2f64.sqrt()).n1_entry(3, 0) - 4.0).abs() < 1e-14);
    }

    #[test]
    fn json_dump_shape() {
        let r = build_general(&gen("2,1,{2},3")).unwrap();
        let j = r.to_json();
        assert_eq!(j["dim"], 7);
        assert_eq!(j["N1"][4][3], serde_json::json!({"2": "1/1"}));
        assert_eq!(j["N0"][0][0], serde_json::json!({}));
        assert_eq!(j["z0"], serde_json::json!([0, 0, 0, 0, 0, 0, 1]));
        assert_eq!(j["C"], serde_json::json!([1, 0, 0, 0, 0, 0, 0]));
        assert_eq!(j["states"][6], "1");
    }
}
