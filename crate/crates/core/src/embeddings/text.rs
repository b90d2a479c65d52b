//! The `.emb` format.
//!
//! ```text
//! embedding over 3
//! lang one_in_three_hat.lang
//! op affine mod 3
//! map R1in3 -> R1in3_hat
//! ```
//!
//! Operation blocks: `op affine mod <p>`, `op symbolic depth <d>`, and the
//! tabular forms `op table arity <a>`, `op edge k <k>`, `op coset order <n>`,
//! each followed by the table values in lexicographic argument order and
//! `end`. The `lang` line names the `.lang` file holding the embedded
//! relations, relative to the `.emb` file.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::group::Group;
use super::{Embedding, OpSpec};
use crate::algebra::TotalOperation;
use crate::model::{DomainSpec, Language, ParseError};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmbeddingFile {
    pub domain: u32,
    pub lang: Option<String>,
    pub op: OpSpec,
    pub map: BTreeMap<String, String>,
}

impl EmbeddingFile {
    pub fn into_embedding(self, base: Language, target: Language) -> Embedding {
        Embedding {
            base,
            target,
            map: self.map,
            op: self.op,
        }
    }

    pub fn from_embedding(emb: &Embedding, lang: Option<String>) -> Self {
        EmbeddingFile {
            domain: emb.target.domain().size(),
            lang,
            op: emb.op.clone(),
            map: emb.map.clone(),
        }
    }
}

fn err(line: usize, message: impl Into<String>) -> ParseError {
    ParseError {
        line,
        message: message.into(),
    }
}

fn int<T: std::str::FromStr>(line: usize, word: &str) -> Result<T, ParseError> {
    word.parse().map_err(|_| {
        err(
            line,
            format!("expected a non-negative integer, found `{word}`"),
        )
    })
}

enum Pending {
    Table { arity: usize },
    Edge { k: usize },
    Coset { order: u32 },
}

pub fn parse_embedding_file(text: &str) -> Result<EmbeddingFile, ParseError> {
    let mut domain = None;
    let mut lang = None;
    let mut op = None;
    let mut map = BTreeMap::new();
    let mut pending: Option<(Pending, usize, Vec<u32>)> = None;

    for (i, raw) in text.lines().enumerate() {
        let ln = i + 1;
        let words: Vec<&str> = raw
            .split('#')
            .next()
            .unwrap_or("")
            .split_whitespace()
            .collect();
        if words.is_empty() {
            continue;
        }
        if let Some((_, _, values)) = pending.as_mut() {
            if words != ["end"] {
                for w in &words {
                    values.push(int(ln, w)?);
                }
                continue;
            }
            let (kind, start, values) = pending.take().expect("checked");
            let d = domain.ok_or_else(|| err(start, "`embedding over <d>` must come first"))?;
            op = Some(finish_table(kind, d, values, start)?);
            continue;
        }
        match words.as_slice() {
            ["embedding", "over", d] => {
                if domain.is_some() {
                    return Err(err(ln, "`embedding over` given more than once"));
                }
                domain = Some(int::<u32>(ln, d)?);
            }
            ["lang", path] => lang = Some(path.to_string()),
            ["op", rest @ ..] => {
                if op.is_some() {
                    return Err(err(ln, "only one operation block is allowed"));
                }
                match rest {
                    ["affine", "mod", p] => {
                        op = Some(OpSpec::Affine {
                            modulus: int(ln, p)?,
                        })
                    }
                    ["symbolic", "depth", d] => op = Some(OpSpec::Symbolic { depth: int(ln, d)? }),
                    ["table", "arity", a] => {
                        pending = Some((Pending::Table { arity: int(ln, a)? }, ln, Vec::new()))
                    }
                    ["edge", "k", k] => {
                        pending = Some((Pending::Edge { k: int(ln, k)? }, ln, Vec::new()))
                    }
                    ["coset", "order", n] => {
                        pending = Some((Pending::Coset { order: int(ln, n)? }, ln, Vec::new()))
                    }
                    _ => return Err(err(ln, "unknown operation block")),
                }
            }
            ["map", from, "->", to] => {
                if map.insert(from.to_string(), to.to_string()).is_some() {
                    return Err(err(ln, format!("{from} is mapped twice")));
                }
            }
            _ => return Err(err(ln, format!("unexpected `{}`", words.join(" ")))),
        }
    }
    if let Some((_, start, _)) = pending {
        return Err(err(start, "operation table not closed by `end`"));
    }
    let domain = domain.ok_or_else(|| err(1, "missing `embedding over <d>`"))?;
    let op = op.ok_or_else(|| err(1, "missing operation block"))?;
    Ok(EmbeddingFile {
        domain,
        lang,
        op,
        map,
    })
}

fn finish_table(
    kind: Pending,
    d: u32,
    values: Vec<u32>,
    line: usize,
) -> Result<OpSpec, ParseError> {
    let dom = DomainSpec::new(d).map_err(|e| err(line, e.to_string()))?;
    match kind {
        Pending::Table { arity } => TotalOperation::new(arity, dom, values)
            .map(OpSpec::Table)
            .map_err(|e| err(line, e.to_string())),
        Pending::Edge { k } => TotalOperation::new(k + 1, dom, values)
            .map(|op| OpSpec::Edge { k, op })
            .map_err(|e| err(line, e.to_string())),
        Pending::Coset { order } => {
            if order != d {
                return Err(err(
                    line,
                    format!("group of order {order} over a domain of size {d}"),
                ));
            }
            Group::new(order, values)
                .map(OpSpec::Coset)
                .map_err(|e| err(line, e.to_string()))
        }
    }
}

fn write_table(out: &mut String, values: &[u32], width: usize) {
    for chunk in values.chunks(width.max(1)) {
        let row: Vec<String> = chunk.iter().map(u32::to_string).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out.push_str("end\n");
}

pub fn serialize_embedding_file(file: &EmbeddingFile) -> String {
    let mut out = format!("embedding over {}\n", file.domain);
    if let Some(lang) = &file.lang {
        let _ = writeln!(out, "lang {lang}");
    }
    let d = file.domain as usize;
    match &file.op {
        OpSpec::Affine { modulus } => {
            let _ = writeln!(out, "op affine mod {modulus}");
        }
        OpSpec::Symbolic { depth } => {
            let _ = writeln!(out, "op symbolic depth {depth}");
        }
        OpSpec::Table(op) => {
            let _ = writeln!(out, "op table arity {}", op.arity());
            write_table(&mut out, op.table(), d);
        }
        OpSpec::Edge { k, op } => {
            let _ = writeln!(out, "op edge k {k}");
            write_table(&mut out, op.table(), d);
        }
        OpSpec::Coset(g) => {
            let _ = writeln!(out, "op coset order {}", g.order());
            write_table(&mut out, g.table(), d);
        }
    }
    for (from, to) in &file.map {
        let _ = writeln!(out, "map {from} -> {to}");
    }
    out
}
