//! Line-oriented `.lang` and `.csp` formats.
//!
//! ```text
//! # 1-in-3 over {0,1}
//! domain 2
//! relation R13 arity 3
//! 0 0 1
//! 0 1 0
//! 1 0 0
//! end
//! ```
//!
//! ```text
//! vars 3
//! constraint R13 0 1 2
//! ```

use std::fmt::Write as _;

use thiserror::Error;

use super::{
    AffineRow, Constraint, DomainSpec, Instance, LangRelation, Language, ModelError, RTuple,
    Relation,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

impl ParseError {
    fn new(line: usize, message: impl Into<String>) -> Self {
        ParseError {
            line,
            message: message.into(),
        }
    }

    fn model(line: usize, err: ModelError) -> Self {
        ParseError::new(line, err.to_string())
    }
}

/// Non-empty lines with comments stripped, paired with 1-based line numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, line)| {
        let line = line.split('#').next().unwrap_or("");
        let words: Vec<&str> = line.split_whitespace().collect();
        (!words.is_empty()).then_some((i + 1, words))
    })
}

fn int<T: std::str::FromStr>(line: usize, word: &str) -> Result<T, ParseError> {
    word.parse().map_err(|_| {
        ParseError::new(
            line,
            format!("expected a non-negative integer, found `{word}`"),
        )
    })
}

fn keyword(line: usize, words: &[&str], at: usize, kw: &str) -> Result<(), ParseError> {
    match words.get(at) {
        Some(w) if *w == kw => Ok(()),
        Some(w) => Err(ParseError::new(
            line,
            format!("expected `{kw}`, found `{w}`"),
        )),
        None => Err(ParseError::new(line, format!("expected `{kw}`"))),
    }
}

enum Block {
    Explicit {
        name: String,
        arity: usize,
        tuples: Vec<RTuple>,
        start: usize,
    },
    Affine {
        name: String,
        arity: usize,
        modulus: u32,
        rows: Vec<AffineRow>,
        start: usize,
    },
}

pub fn parse_language(text: &str) -> Result<Language, ParseError> {
    let mut lang: Option<Language> = None;
    let mut block: Option<Block> = None;
    let mut last_line = 0;

    for (ln, words) in content_lines(text) {
        last_line = ln;
        if let Some(b) = block.as_mut() {
            if words == ["end"] {
                let done = block.take().unwrap();
                let lang = lang.as_mut().expect("blocks only open after `domain`");
                finish_block(lang, done)?;
                continue;
            }
            match b {
                Block::Explicit { arity, tuples, .. } => {
                    if words.len() != *arity {
                        return Err(ParseError::new(
                            ln,
                            format!(
                                "tuple has {} values, relation arity is {arity}",
                                words.len()
                            ),
                        ));
                    }
                    let domain = lang.as_ref().unwrap().domain();
                    let mut t = Vec::with_capacity(*arity);
                    for w in &words {
                        let v: u32 = int(ln, w)?;
                        if !domain.contains(v) {
                            return Err(ParseError::model(
                                ln,
                                ModelError::ValueOutOfRange {
                                    value: v,
                                    domain: domain.size(),
                                },
                            ));
                        }
                        t.push(v);
                    }
                    tuples.push(RTuple(t));
                }
                Block::Affine {
                    arity,
                    modulus,
                    rows,
                    ..
                } => {
                    let bar = words.iter().position(|w| *w == "|").ok_or_else(|| {
                        ParseError::new(ln, "affine row must have the form `c1 … cr | b`")
                    })?;
                    if bar != *arity || words.len() != bar + 2 {
                        return Err(ParseError::new(
                            ln,
                            format!(
                                "affine row must have {arity} coefficients, `|` and one constant"
                            ),
                        ));
                    }
                    let mut coeffs = Vec::with_capacity(*arity);
                    for w in &words[..bar] {
                        coeffs.push(int::<u32>(ln, w)? % *modulus);
                    }
                    let rhs = int::<u32>(ln, words[bar + 1])? % *modulus;
                    rows.push(AffineRow { coeffs, rhs });
                }
            }
            continue;
        }

        match words[0] {
            "domain" => {
                if lang.is_some() {
                    return Err(ParseError::new(ln, "`domain` given more than once"));
                }
                if words.len() != 2 {
                    return Err(ParseError::new(ln, "expected `domain <d>`"));
                }
                let d =
                    DomainSpec::new(int(ln, words[1])?).map_err(|e| ParseError::model(ln, e))?;
                lang = Some(Language::new(d));
            }
            "relation" => {
                if lang.is_none() {
                    return Err(ParseError::new(ln, "`domain` must precede relation blocks"));
                }
                if words.len() != 4 {
                    return Err(ParseError::new(ln, "expected `relation <name> arity <r>`"));
                }
                keyword(ln, &words, 2, "arity")?;
                let arity: usize = int(ln, words[3])?;
                if arity == 0 {
                    return Err(ParseError::model(ln, ModelError::ZeroArity));
                }
                block = Some(Block::Explicit {
                    name: words[1].to_string(),
                    arity,
                    tuples: Vec::new(),
                    start: ln,
                });
            }
            "affine" => {
                let Some(l) = lang.as_ref() else {
                    return Err(ParseError::new(ln, "`domain` must precede relation blocks"));
                };
                if words.len() != 6 {
                    return Err(ParseError::new(
                        ln,
                        "expected `affine <name> arity <r> mod <p>`",
                    ));
                }
                keyword(ln, &words, 2, "arity")?;
                keyword(ln, &words, 4, "mod")?;
                let arity: usize = int(ln, words[3])?;
                let modulus: u32 = int(ln, words[5])?;
                if arity == 0 {
                    return Err(ParseError::model(ln, ModelError::ZeroArity));
                }
                if !crate::modp::is_prime(modulus) {
                    return Err(ParseError::model(ln, ModelError::NotPrime(modulus)));
                }
                if modulus != l.domain().size() {
                    return Err(ParseError::model(
                        ln,
                        ModelError::DomainMismatch {
                            name: words[1].to_string(),
                            got: modulus,
                            expected: l.domain().size(),
                        },
                    ));
                }
                block = Some(Block::Affine {
                    name: words[1].to_string(),
                    arity,
                    modulus,
                    rows: Vec::new(),
                    start: ln,
                });
            }
            other => return Err(ParseError::new(ln, format!("unexpected `{other}`"))),
        }
    }

    if let Some(b) = block {
        let start = match b {
            Block::Explicit { start, .. } | Block::Affine { start, .. } => start,
        };
        return Err(ParseError::new(
            last_line.max(start),
            "block is missing `end`",
        ));
    }
    lang.ok_or_else(|| ParseError::new(last_line.max(1), "missing `domain` line"))
}

fn finish_block(lang: &mut Language, block: Block) -> Result<(), ParseError> {
    let (start, rel): (usize, LangRelation) = match block {
        Block::Explicit {
            name,
            arity,
            tuples,
            start,
        } => {
            let r = Relation::new(name, lang.domain(), arity, tuples)
                .map_err(|e| ParseError::model(start, e))?;
            (start, r.into())
        }
        Block::Affine {
            name,
            arity,
            modulus,
            rows,
            start,
        } => {
            let a = super::AffineRelation::new(name, arity, modulus, rows)
                .map_err(|e| ParseError::model(start, e))?;
            (start, a.into())
        }
    };
    lang.add(rel).map_err(|e| ParseError::model(start, e))
}

pub fn parse_instance(text: &str, language: &Language) -> Result<Instance, ParseError> {
    let mut n: Option<usize> = None;
    let mut constraints = Vec::new();
    let mut lines = Vec::new();
    for (ln, words) in content_lines(text) {
        match words[0] {
            "vars" => {
                if n.is_some() {
                    return Err(ParseError::new(ln, "`vars` given more than once"));
                }
                if words.len() != 2 {
                    return Err(ParseError::new(ln, "expected `vars <n>`"));
                }
                n = Some(int(ln, words[1])?);
            }
            "constraint" => {
                let Some(num_vars) = n else {
                    return Err(ParseError::new(ln, "`vars` must precede constraints"));
                };
                if words.len() < 2 {
                    return Err(ParseError::new(
                        ln,
                        "expected `constraint <name> <v1> … <vr>`",
                    ));
                }
                let name = words[1];
                let rel = language
                    .relation(name)
                    .map_err(|e| ParseError::model(ln, e))?;
                let scope = words[2..]
                    .iter()
                    .map(|w| int::<usize>(ln, w))
                    .collect::<Result<Vec<_>, _>>()?;
                let index = constraints.len();
                if scope.len() != rel.arity() {
                    return Err(ParseError::model(
                        ln,
                        ModelError::ScopeArity {
                            index,
                            relation: name.to_string(),
                            got: scope.len(),
                            expected: rel.arity(),
                        },
                    ));
                }
                if let Some(&var) = scope.iter().find(|&&v| v >= num_vars) {
                    return Err(ParseError::model(
                        ln,
                        ModelError::VariableOutOfRange {
                            index,
                            var,
                            n: num_vars,
                        },
                    ));
                }
                constraints.push(Constraint {
                    relation: name.to_string(),
                    scope,
                });
                lines.push(ln);
            }
            other => return Err(ParseError::new(ln, format!("unexpected `{other}`"))),
        }
    }
    let n = n.ok_or_else(|| ParseError::new(1, "missing `vars` line"))?;
    Ok(Instance::new_unchecked(n, constraints))
}

pub fn serialize_instance(instance: &Instance) -> String {
    let mut out = format!("vars {}\n", instance.num_vars());
    for c in instance.constraints() {
        out.push_str("constraint ");
        out.push_str(&c.relation);
        for v in &c.scope {
            let _ = write!(out, " {v}");
        }
        out.push('\n');
    }
    out
}

fn join(vals: &[u32]) -> String {
    vals.iter()
        .map(u32::to_string)
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn serialize_language(language: &Language) -> String {
    let mut out = format!("domain {}\n", language.domain().size());
    for rel in language.relations() {
        out.push('\n');
        match rel {
            LangRelation::Explicit(r) => {
                let _ = writeln!(out, "relation {} arity {}", r.name(), r.arity());
                for t in r.tuples() {
                    out.push_str(&join(t));
                    out.push('\n');
                }
            }
            LangRelation::Affine(a) => {
                let _ = writeln!(
                    out,
                    "affine {} arity {} mod {}",
                    a.name(),
                    a.arity(),
                    a.modulus()
                );
                for row in a.rows() {
                    let _ = writeln!(out, "{} | {}", join(&row.coeffs), row.rhs);
                }
            }
        }
        out.push_str("end\n");
    }
    out
}
