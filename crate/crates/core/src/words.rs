//! Two-letter alphabet, words, compositions and the left-shift operator.
//!
//! A composition `s = (s1, ..., sl)` is encoded as the word
//! `x0^(s1-1) x1 x0^(s2-1) x1 ... x0^(sl-1) x1`. Iterated integrals against
//! `dt/t` (letter `x0`) and `dt/(1-t)` (letter `x1`) indexed by this word give
//! the multiple polylogarithm `Li_s(t)`.

use std::fmt;

use crate::error::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Letter {
    X0,
    X1,
}

impl Letter {
    pub const ALL: [Letter; 2] = [Letter::X0, Letter::X1];

    pub fn index(self) -> usize {
        match self {
            Letter::X0 => 0,
            Letter::X1 => 1,
        }
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Letter::X0 => f.write_str("x0"),
            Letter::X1 => f.write_str("x1"),
        }
    }
}

/// A finite word over `{x0, x1}`. The empty word is a valid value.
///
/// The derived `Ord` is lexicographic with `x0 < x1`; use [`Word::graded_cmp`]
/// for the length-then-lexicographic order.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Word(Vec<Letter>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn from_letters(letters: Vec<Letter>) -> Self {
        Word(letters)
    }

    pub fn letter(l: Letter) -> Self {
        Word(vec![l])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn first(&self) -> Option<Letter> {
        self.0.first().copied()
    }

    pub fn last(&self) -> Option<Letter> {
        self.0.last().copied()
    }

    pub fn count(&self, l: Letter) -> usize {
        self.0.iter().filter(|&&x| x == l).count()
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = Vec::with_capacity(self.len() + other.len());
        v.extend_from_slice(&self.0);
        v.extend_from_slice(&other.0);
        Word(v)
    }

    pub fn push(&mut self, l: Letter) {
        self.0.push(l);
    }

    /// The left-shift `prefix^{-1}(self)`.
    ///
    /// Returns `None` (the zero series) when `self` does not start with
    /// `prefix`; `Some(Word::empty())` when they are equal.
    pub fn left_shift(&self, prefix: &Word) -> Option<Word> {
        self.0
            .strip_prefix(prefix.0.as_slice())
            .map(|rest| Word(rest.to_vec()))
    }

    /// Length first, then lexicographic with `x0 < x1`.
    pub fn graded_cmp(&self, other: &Word) -> std::cmp::Ordering {
        self.len().cmp(&other.len()).then_with(|| self.0.cmp(&other.0))
    }

    /// All words of length `len` in lexicographic order.
    pub fn all_of_length(len: usize) -> impl Iterator<Item = Word> {
        (0u64..(1u64 << len)).map(move |bits| {
            Word(
                (0..len)
                    .map(|i| {
                        if bits >> (len - 1 - i) & 1 == 1 {
                            Letter::X1
                        } else {
                            Letter::X0
                        }
                    })
                    .collect(),
            )
        })
    }

    /// All words of length `<= max_len`, graded order.
    pub fn all_up_to(max_len: usize) -> impl Iterator<Item = Word> {
        (0..=max_len).flat_map(Word::all_of_length)
    }
}

/// Free-function form of [`Word::left_shift`].
pub fn left_shift(prefix: &Word, w: &Word) -> Option<Word> {
    w.left_shift(prefix)
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("∅");
        }
        for l in &self.0 {
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

impl FromIterator<Letter> for Word {
    fn from_iter<I: IntoIterator<Item = Letter>>(iter: I) -> Self {
        Word(iter.into_iter().collect())
    }
}

/// A nonempty sequence of positive integers.
///
/// Compositions with `s1 = 1` can be constructed; [`Composition::is_admissible`]
/// tells them apart.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Composition {
    parts: Vec<u32>,
}

impl Composition {
    pub fn new(parts: Vec<u32>) -> Result<Self, Error> {
        if parts.is_empty() {
            return Err(Error::InvalidComposition("composition must be nonempty".into()));
        }
        if let Some(pos) = parts.iter().position(|&p| p == 0) {
            return Err(Error::InvalidComposition(format!(
                "part {} is zero; all parts must be positive",
                pos + 1
            )));
        }
        Ok(Composition { parts })
    }

    pub fn admissible(parts: Vec<u32>) -> Result<Self, Error> {
        let c = Composition::new(parts)?;
        if !c.is_admissible() {
            return Err(Error::NotAdmissible(format!(
                "({c}) has leading part {} < 2",
                c.parts[0]
            )));
        }
        Ok(c)
    }

    pub fn parts(&self) -> &[u32] {
        &self.parts
    }

    pub fn weight(&self) -> usize {
        self.parts.iter().map(|&p| p as usize).sum()
    }

    pub fn depth(&self) -> usize {
        self.parts.len()
    }

    pub fn is_admissible(&self) -> bool {
        self.parts[0] >= 2
    }

    pub fn to_word(&self) -> Word {
        composition_to_word(self)
    }

    /// The `n`-fold repetition `{s}^n`, or `None` for `n = 0`.
    pub fn repeat(&self, n: usize) -> Option<Composition> {
        (n > 0).then(|| Composition { parts: self.parts.repeat(n) })
    }

    /// All compositions of `weight` with leading part at least 2.
    pub fn admissible_of_weight(weight: usize) -> Vec<Composition> {
        fn rec(rest: usize, cur: &mut Vec<u32>, out: &mut Vec<Composition>) {
            if rest == 0 {
                out.push(Composition { parts: cur.clone() });
                return;
            }
            let lo = if cur.is_empty() { 2 } else { 1 };
            for p in lo..=rest {
                cur.push(p as u32);
                rec(rest - p, cur, out);
                cur.pop();
            }
        }
        let mut out = Vec::new();
        if weight >= 2 {
            rec(weight, &mut Vec::new(), &mut out);
        }
        out
    }
}

impl fmt::Display for Composition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_parts(f, &self.parts)
    }
}

fn write_parts(f: &mut fmt::Formatter<'_>, parts: &[u32]) -> fmt::Result {
    for (i, p) in parts.iter().enumerate() {
        if i > 0 {
            f.write_str(",")?;
        }
        write!(f, "{p}")?;
    }
    Ok(())
}

pub fn composition_to_word(s: &Composition) -> Word {
    let mut w = Word::empty();
    for &p in &s.parts {
        for _ in 1..p {
            w.push(Letter::X0);
        }
        w.push(Letter::X1);
    }
    w
}

/// Inverse of [`composition_to_word`]; `None` unless `w` is nonempty and ends in `x1`.
pub fn word_to_composition(w: &Word) -> Option<Composition> {
    if w.last() != Some(Letter::X1) {
        return None;
    }
    let mut parts = Vec::new();
    let mut run = 1u32;
    for &l in w.letters() {
        match l {
            Letter::X0 => run += 1,
            Letter::X1 => {
                parts.push(run);
                run = 1;
            }
        }
    }
    Some(Composition { parts })
}

/// `(s_a, {s_b}, s_c)`: optional prefix, periodic block, optional suffix.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GeneralizedComposition {
    prefix: Option<Composition>,
    period: Composition,
    suffix: Option<Composition>,
}

impl GeneralizedComposition {
    /// Validates the word shape for `n = 0` and `n = 1`; that fixes it for every `n`.
    pub fn new(
        prefix: Option<Composition>,
        period: Composition,
        suffix: Option<Composition>,
    ) -> Result<Self, Error> {
        let g = GeneralizedComposition { prefix, period, suffix };
        for n in 0..=1 {
            let w = g.full_word(n);
            if w.is_empty() {
                continue;
            }
            if w.first() != Some(Letter::X0) {
                return Err(Error::NotAdmissible(format!(
                    "{g}: the composition for n = {n} starts with a part equal to 1"
                )));
            }
        }
        Ok(g)
    }

    pub fn periodic(period: Composition) -> Result<Self, Error> {
        GeneralizedComposition::new(None, period, None)
    }

    pub fn prefix(&self) -> Option<&Composition> {
        self.prefix.as_ref()
    }

    pub fn period(&self) -> &Composition {
        &self.period
    }

    pub fn suffix(&self) -> Option<&Composition> {
        self.suffix.as_ref()
    }

    pub fn is_purely_periodic(&self) -> bool {
        self.prefix.is_none() && self.suffix.is_none()
    }

    pub fn prefix_word(&self) -> Word {
        self.prefix.as_ref().map(Composition::to_word).unwrap_or_default()
    }

    pub fn period_word(&self) -> Word {
        self.period.to_word()
    }

    pub fn suffix_word(&self) -> Word {
        self.suffix.as_ref().map(Composition::to_word).unwrap_or_default()
    }

    pub fn prefix_weight(&self) -> usize {
        self.prefix.as_ref().map_or(0, Composition::weight)
    }

    pub fn suffix_weight(&self) -> usize {
        self.suffix.as_ref().map_or(0, Composition::weight)
    }

    /// `eta(s_a) eta(s_b)^n eta(s_c)`.
    pub fn full_word(&self, n: usize) -> Word {
        let mut w = self.prefix_word();
        let b = self.period_word();
        for _ in 0..n {
            w = w.concat(&b);
        }
        w.concat(&self.suffix_word())
    }

    /// `s_n = (s_a, {s_b}^n, s_c)`; `None` when it is empty (`n = 0`, no prefix or suffix).
    pub fn expanded(&self, n: usize) -> Option<Composition> {
        let mut parts = Vec::new();
        if let Some(a) = &self.prefix {
            parts.extend_from_slice(a.parts());
        }
        for _ in 0..n {
            parts.extend_from_slice(self.period.parts());
        }
        if let Some(c) = &self.suffix {
            parts.extend_from_slice(c.parts());
        }
        (!parts.is_empty()).then_some(Composition { parts })
    }
}

impl fmt::Display for GeneralizedComposition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(a) = &self.prefix {
            write!(f, "{a},")?;
        }
        f.write_str("{")?;
        write_parts(f, self.period.parts())?;
        f.write_str("}")?;
        if let Some(c) = &self.suffix {
            write!(f, ",{c}")?;
        }
        Ok(())
    }
}
