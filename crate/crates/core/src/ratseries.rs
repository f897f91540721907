//! Exact coefficients of the rational series `c_s` and of linear representations.
//!
//! For a generalized composition `(s_a, {s_b}, s_c)` the generating series is
//! `c_s = eta(s_a) (θ^{|s_b|} eta(s_b))^* eta(s_c)`: the word
//! `eta(s_a) eta(s_b)^n eta(s_c)` carries coefficient `θ^{n |s_b|}` and every
//! other word carries zero. A linear representation `(mu, gamma, lambda)`
//! recognizes a series through `(c, w) = lambda mu(w_1) ... mu(w_k) gamma`.
//! Comparing both on every short word is the ground truth for the realization
//! builders.

use std::fmt;

use crate::error::{Error, Result};
use crate::theta::{ThetaMatrix, ThetaPoly};
use crate::words::{GeneralizedComposition, Letter, Word};

/// `(mu(x0), mu(x1), gamma, lambda)` with θ-polynomial entries.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearRepresentation {
    dim: usize,
    mu: [ThetaMatrix; 2],
    gamma: Vec<ThetaPoly>,
    lambda: Vec<ThetaPoly>,
}

impl LinearRepresentation {
    pub fn new(
        mu0: ThetaMatrix,
        mu1: ThetaMatrix,
        gamma: Vec<ThetaPoly>,
        lambda: Vec<ThetaPoly>,
    ) -> Result<Self> {
        let dim = gamma.len();
        let square = |m: &ThetaMatrix| m.rows() == dim && m.cols() == dim;
        if dim == 0 || !square(&mu0) || !square(&mu1) || lambda.len() != dim {
            return Err(Error::Domain(format!(
                "inconsistent representation shapes: mu0 {}x{}, mu1 {}x{}, gamma {}, lambda {}",
                mu0.rows(),
                mu0.cols(),
                mu1.rows(),
                mu1.cols(),
                gamma.len(),
                lambda.len()
            )));
        }
        Ok(LinearRepresentation { dim, mu: [mu0, mu1], gamma, lambda })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn mu(&self, l: Letter) -> &ThetaMatrix {
        &self.mu[l.index()]
    }

    pub fn gamma(&self) -> &[ThetaPoly] {
        &self.gamma
    }

    pub fn lambda(&self) -> &[ThetaPoly] {
        &self.lambda
    }

    /// `lambda mu(w) gamma`.
    pub fn coeff(&self, w: &Word) -> ThetaPoly {
        let mut row = self.lambda.clone();
        for &l in w.letters() {
            row = self.mu(l).left_mul(&row);
        }
        dot(&row, &self.gamma)
    }
}

fn dot(a: &[ThetaPoly], b: &[ThetaPoly]) -> ThetaPoly {
    let mut out = ThetaPoly::zero();
    for (x, y) in a.iter().zip(b) {
        if !x.is_zero() && !y.is_zero() {
            out += &(x * y);
        }
    }
    out
}

/// Coefficient of `w` in `c_s`: `θ^{n |s_b|}` when `w = full_word(g, n)`, else zero.
pub fn coeff_pattern(g: &GeneralizedComposition, w: &Word) -> ThetaPoly {
    let fixed = g.prefix_weight() + g.suffix_weight();
    let period = g.period().weight();
    if w.len() < fixed || !(w.len() - fixed).is_multiple_of(period) {
        return ThetaPoly::zero();
    }
    // the length pins n down uniquely since |s_b| >= 1
    let n = (w.len() - fixed) / period;
    if g.full_word(n) == *w {
        ThetaPoly::theta_pow((n * period) as u32)
    } else {
        ThetaPoly::zero()
    }
}

pub fn coeff_repr(r: &LinearRepresentation, w: &Word) -> ThetaPoly {
    r.coeff(w)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mismatch {
    pub word: Word,
    pub expected: ThetaPoly,
    pub actual: ThetaPoly,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoefficientReport {
    pub max_len: usize,
    pub words_checked: usize,
    /// Graded order (length, then `x0 < x1`).
    pub mismatches: Vec<Mismatch>,
}

impl CoefficientReport {
    pub fn is_ok(&self) -> bool {
        self.mismatches.is_empty()
    }
}

impl fmt::Display for CoefficientReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.mismatches.first() {
            None => write!(f, "OK {} words checked", self.words_checked),
            Some(m) => write!(
                f,
                "MISMATCH at {}: series has {}, representation gives {} ({} mismatches in {} words)",
                m.word,
                m.expected,
                m.actual,
                self.mismatches.len(),
                self.words_checked
            ),
        }
    }
}

/// Compares `coeff_repr` with `coeff_pattern` on all `2^(max_len+1) - 1` words
/// of length at most `max_len`.
pub fn repr_equals_pattern(
    g: &GeneralizedComposition,
    r: &LinearRepresentation,
    max_len: usize,
) -> CoefficientReport {
    let mut mismatches = Vec::new();
    let mut words_checked = 0usize;
    // depth-first over prefixes, carrying lambda mu(prefix)
    let mut stack: Vec<(Word, Vec<ThetaPoly>)> = vec![(Word::empty(), r.lambda.clone())];
    while let Some((w, row)) = stack.pop() {
        let actual = dot(&row, &r.gamma);
        let expected = coeff_pattern(g, &w);
        words_checked += 1;
        if actual != expected {
            mismatches.push(Mismatch { word: w.clone(), expected, actual });
        }
        if w.len() < max_len {
            for l in Letter::ALL.into_iter().rev() {
                let mut next = w.clone();
                next.push(l);
                stack.push((next, r.mu(l).left_mul(&row)));
            }
        }
    }
    mismatches.sort_by(|a, b| a.word.graded_cmp(&b.word));
    CoefficientReport { max_len, words_checked, mismatches }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::words::Composition;
    use Letter::{X0, X1};

    fn comp(p: &[u32]) -> Composition {
        Composition::new(p.to_vec()).unwrap()
    }

    fn w(l: &[Letter]) -> Word {
        Word::from_letters(l.to_vec())
    }

    /// The Example-4.1 style realization of `{2}`, written out by hand.
    fn hand_rep_2() -> LinearRepresentation {
        let mut n0 = ThetaMatrix::zeros(2, 2);
        n0.set(0, 1, ThetaPoly::one());
        let mut n1 = ThetaMatrix::zeros(2, 2);
        n1.set(1, 0, ThetaPoly::theta_pow(2));
        let e1 = vec![ThetaPoly::one(), ThetaPoly::zero()];
        LinearRepresentation::new(n0, n1, e1.clone(), e1).unwrap()
    }

    #[test]
    fn pattern_coefficients() {
        let p2 = GeneralizedComposition::periodic(comp(&[2])).unwrap();
        assert_eq!(coeff_pattern(&p2, &w(&[X0, X1, X0, X1])), ThetaPoly::theta_pow(4));
        assert!(coeff_pattern(&p2, &w(&[X0, X0, X1])).is_zero());
        assert_eq!(coeff_pattern(&p2, &Word::empty()), ThetaPoly::one());
        let g = GeneralizedComposition::new(Some(comp(&[2, 1])), comp(&[2]), Some(comp(&[3])))
            .unwrap();
        assert_eq!(coeff_pattern(&g, &w(&[X0, X1, X1, X0, X0, X1])), ThetaPoly::one());
        assert!(coeff_pattern(&g, &Word::empty()).is_zero());
    }

    #[test]
    fn representation_coefficients() {
        let r = hand_rep_2();
        // e1' N0 N1 e1 = theta^2
        assert_eq!(coeff_repr(&r, &w(&[X0, X1])), ThetaPoly::theta_pow(2));
        assert_eq!(coeff_repr(&r, &Word::empty()), ThetaPoly::one());
        assert!(coeff_repr(&r, &w(&[X0, X0])).is_zero());
    }

    #[test]
    fn report_is_empty_for_matching_pair() {
        let p2 = GeneralizedComposition::periodic(comp(&[2])).unwrap();
        let rep = repr_equals_pattern(&p2, &hand_rep_2(), 10);
        assert!(rep.is_ok(), "{rep}");
        assert_eq!(rep.words_checked, (1 << 11) - 1);
    }

    #[test]
    fn report_lists_mismatches_in_graded_order() {
        let p3 = GeneralizedComposition::periodic(comp(&[3])).unwrap();
        let rep = repr_equals_pattern(&p3, &hand_rep_2(), 4);
        assert!(!rep.is_ok());
        assert_eq!(rep.mismatches[0].word, w(&[X0, X1]));
        assert!(rep.mismatches.windows(2).all(|p| p[0].word.graded_cmp(&p[1].word).is_lt()));
    }

    #[test]
    fn rejects_bad_shapes() {
        let e1 = vec![ThetaPoly::one(), ThetaPoly::zero()];
        assert!(LinearRepresentation::new(
            ThetaMatrix::zeros(2, 2),
            ThetaMatrix::zeros(3, 3),
            e1.clone(),
            e1
        )
        .is_err());
    }
}
