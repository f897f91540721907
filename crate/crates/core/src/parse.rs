//! Text grammar for compositions: `2,1,{2},3`, `{3,1}`, `{2},3,3`, `4`.
//!
//! Comma-separated positive integers with at most one brace-delimited group
//! marking the periodic block. Whitespace around tokens is ignored.

use std::str::FromStr;

use crate::error::{Error, Result};
use crate::words::{Composition, GeneralizedComposition};

/// A parsed composition string, before deciding how it is used.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CompositionSpec {
    /// No braces: a plain composition `(s1, ..., sl)`.
    Plain(Composition),
    Generalized(GeneralizedComposition),
}

impl CompositionSpec {
    /// Requires a brace group.
    pub fn generalized(self) -> Result<GeneralizedComposition> {
        match self {
            CompositionSpec::Generalized(g) => Ok(g),
            CompositionSpec::Plain(c) => Err(Error::Parse {
                column: 1,
                message: format!(
                    "`{c}` has no periodic block; write `{{{c}}}` for a purely periodic composition"
                ),
            }),
        }
    }

    /// For periodic-only consumers: a brace-less string is read as `{...}`,
    /// and a brace group with anything around it is rejected.
    pub fn periodic(self) -> Result<Composition> {
        match self {
            CompositionSpec::Plain(c) => {
                GeneralizedComposition::periodic(c.clone())?;
                Ok(c)
            }
            CompositionSpec::Generalized(g) if g.is_purely_periodic() => Ok(g.period().clone()),
            CompositionSpec::Generalized(g) => Err(Error::Parse {
                column: 1,
                message: format!("`{g}` has non-periodic components"),
            }),
        }
    }
}

impl FromStr for CompositionSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_composition(s)
    }
}

struct Scanner {
    // (1-based column, char)
    chars: Vec<(usize, char)>,
    pos: usize,
}

impl Scanner {
    fn new(src: &str) -> Self {
        Scanner { chars: src.chars().enumerate().map(|(i, c)| (i + 1, c)).collect(), pos: 0 }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.chars.len() && self.chars[self.pos].1.is_whitespace() {
            self.pos += 1;
        }
    }

    fn column(&self) -> usize {
        self.chars.get(self.pos).map_or(self.chars.len() + 1, |c| c.0)
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).map(|c| c.1)
    }

    fn bump(&mut self) {
        self.pos += 1;
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T> {
        Err(Error::Parse { column: self.column(), message: message.into() })
    }

    fn integer(&mut self) -> Result<u32> {
        self.skip_ws();
        let start = self.pos;
        let col = self.column();
        while self.pos < self.chars.len() && self.chars[self.pos].1.is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return match self.chars.get(self.pos) {
                Some(&(_, c)) => self.err(format!("expected a positive integer, found `{c}`")),
                None => self.err("expected a positive integer, found end of input"),
            };
        }
        let digits: String = self.chars[start..self.pos].iter().map(|c| c.1).collect();
        match digits.parse::<u32>() {
            Ok(0) => Err(Error::Parse { column: col, message: "parts must be positive".into() }),
            Ok(v) => Ok(v),
            Err(_) => Err(Error::Parse { column: col, message: format!("`{digits}` is out of range") }),
        }
    }
}

pub fn parse_composition(src: &str) -> Result<CompositionSpec> {
    let mut sc = Scanner::new(src);
    let mut before = Vec::new();
    let mut period: Option<Vec<u32>> = None;
    let mut after = Vec::new();

    loop {
        match sc.peek() {
            Some('{') => {
                if period.is_some() {
                    return sc.err("only one periodic block `{...}` is allowed");
                }
                sc.bump();
                let mut block = vec![sc.integer()?];
                loop {
                    match sc.peek() {
                        Some(',') => {
                            sc.bump();
                            block.push(sc.integer()?);
                        }
                        Some('}') => {
                            sc.bump();
                            break;
                        }
                        Some(c) => return sc.err(format!("expected `,` or `}}`, found `{c}`")),
                        None => return sc.err("unterminated periodic block"),
                    }
                }
                period = Some(block);
            }
            Some(_) => {
                let v = sc.integer()?;
                if period.is_some() {
                    after.push(v);
                } else {
                    before.push(v);
                }
            }
            None => return sc.err("expected a composition"),
        }
        match sc.peek() {
            None => break,
            Some(',') => sc.bump(),
            Some(c) => return sc.err(format!("expected `,`, found `{c}`")),
        }
    }

    let opt = |v: Vec<u32>| -> Result<Option<Composition>> {
        if v.is_empty() {
            Ok(None)
        } else {
            Composition::new(v).map(Some)
        }
    };
    match period {
        None => Ok(CompositionSpec::Plain(Composition::new(before)?)),
        Some(p) => Ok(CompositionSpec::Generalized(GeneralizedComposition::new(
            opt(before)?,
            Composition::new(p)?,
            opt(after)?,
        )?)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gen(s: &str) -> GeneralizedComposition {
        parse_composition(s).unwrap().generalized().unwrap()
    }

    #[test]
    fn parses_bracketed_forms() {
        let g = gen("2,1,{2},3");
        assert_eq!(g.prefix().unwrap().parts(), &[2, 1]);
        assert_eq!(g.period().parts(), &[2]);
        assert_eq!(g.suffix().unwrap().parts(), &[3]);
        assert!(gen("{3,1}").is_purely_periodic());
        assert_eq!(gen("{2},3,3").suffix().unwrap().parts(), &[3, 3]);
        assert_eq!(gen(" { 4 } ").period().parts(), &[4]);
        assert_eq!(gen("2 , 1,{ 2 },3").to_string(), "2,1,{2},3");
    }

    #[test]
    fn plain_strings() {
        let p = parse_composition("3,1").unwrap();
        assert!(matches!(p, CompositionSpec::Plain(_)));
        assert!(p.clone().generalized().is_err());
        assert_eq!(p.periodic().unwrap().parts(), &[3, 1]);
        assert!(parse_composition("1,2").unwrap().periodic().is_err());
        assert!(parse_composition("2,{2}").unwrap().periodic().is_err());
    }

    #[test]
    fn error_columns() {
        let col = |s: &str| match parse_composition(s) {
            Err(Error::Parse { column, .. }) => column,
            other => panic!("expected parse error for {s:?}, got {other:?}"),
        };
        assert_eq!(col("2,,3"), 3);
        assert_eq!(col("2,x"), 3);
        assert_eq!(col("{2},{3}"), 5);
        assert_eq!(col("{2"), 3);
        assert_eq!(col("2,0"), 3);
        assert_eq!(col(""), 1);
        assert_eq!(col("2 3"), 3);
    }

    #[test]
    fn rejects_non_admissible() {
        assert!(matches!(parse_composition("{1,2}"), Err(Error::NotAdmissible(_))));
    }
}
