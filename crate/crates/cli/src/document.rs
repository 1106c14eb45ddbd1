//! The model file format: a sectioned, line-oriented text schema.
//!
//! See `docs/model-format.md` for the grammar. Parsing resolves every name
//! against the `[basis]` section, so section order is free.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};

use equivar_core::lie::LieError;
use equivar_core::ratlin::SparseVec;
use equivar_core::sdga::{koszul_sign, ModelBuilder, ModelError, ModelKind, UNIT_NAME};
use equivar_core::{LieAlgebraData, Rat};
use num::{One, Signed, Zero};
use thiserror::Error;

use crate::expr::{eval, parse_expr, Interp};

/// A linear combination of basis names in canonical order.
pub type Lincomb = Vec<(String, Rat)>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}, column {column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LieSection {
    pub dim: usize,
    /// `(i, j, k, c_ij^k)` with zero-based `i < j`.
    pub triples: Vec<(usize, usize, usize, Rat)>,
}

impl LieSection {
    pub fn from_lie(lie: &LieAlgebraData) -> Self {
        LieSection { dim: lie.dim(), triples: lie.upper_triples() }
    }

    pub fn to_lie(&self) -> Result<LieAlgebraData, LieError> {
        LieAlgebraData::from_upper_triples(self.dim, &self.triples)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ModelDocument {
    pub lie_s: Option<LieSection>,
    pub lie_g: Option<LieSection>,
    pub basis: Vec<(String, u32)>,
    pub mul: Vec<(String, String, Lincomb)>,
    pub d: Vec<(String, Lincomb)>,
    /// Keyed by zero-based generator index.
    pub iota_s: BTreeMap<usize, Vec<(String, Lincomb)>>,
    pub iota_g: BTreeMap<usize, Vec<(String, Lincomb)>>,
    /// Zero-based component index to its value.
    pub connection: BTreeMap<usize, Lincomb>,
    pub polynomial: Option<String>,
}

#[derive(Debug, Error)]
pub enum BuildError {
    /// Structural problems a validator reports (missing unit, empty basis).
    #[error(transparent)]
    Invalid(ModelError),
    /// Inputs that contradict each other or the chosen Lie algebra.
    #[error("{0}")]
    Usage(String),
}

fn is_ident(s: &str) -> bool {
    let mut cs = s.chars();
    matches!(cs.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && cs.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

fn valid_name(s: &str) -> bool {
    s == UNIT_NAME || is_ident(s)
}

struct Line<'a> {
    number: usize,
    /// Byte offset of `text` in the original line.
    indent: usize,
    text: &'a str,
}

impl Line<'_> {
    fn err(&self, at: usize, message: impl Into<String>) -> ParseError {
        ParseError { line: self.number, column: self.indent + at + 1, message: message.into() }
    }

    fn sub(&self, start: usize, end: usize) -> (usize, &str) {
        let raw = &self.text[start..end];
        let trimmed = raw.trim_start();
        (start + raw.len() - trimmed.len(), trimmed.trim_end())
    }
}

struct Section<'a> {
    header: Line<'a>,
    kind: SectionKind,
    lines: Vec<Line<'a>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum SectionKind {
    LieS,
    LieG,
    Basis,
    Mul,
    D,
    IotaS(usize),
    IotaG(usize),
    Connection,
    Polynomial,
}

fn split_lines(text: &str) -> Vec<Line<'_>> {
    text.lines()
        .enumerate()
        .filter_map(|(n, raw)| {
            let body = raw.split('#').next().unwrap_or("");
            let trimmed = body.trim_start();
            let indent = body.len() - trimmed.len();
            let t = trimmed.trim_end();
            (!t.is_empty()).then_some(Line { number: n + 1, indent, text: t })
        })
        .collect()
}

fn parse_header(line: &Line<'_>) -> Result<SectionKind, ParseError> {
    let inner = line
        .text
        .strip_prefix('[')
        .and_then(|s| s.strip_suffix(']'))
        .ok_or_else(|| line.err(0, "malformed section header"))?;
    let words: Vec<&str> = inner.split_whitespace().collect();
    let index = |w: Option<&&str>| -> Result<usize, ParseError> {
        let w = w.ok_or_else(|| line.err(0, "missing generator index in section header"))?;
        match w.parse::<usize>() {
            Ok(i) if i >= 1 => Ok(i - 1),
            _ => Err(line.err(0, format!("generator index must be a positive integer, found `{w}`"))),
        }
    };
    let kind = match words.first().copied() {
        Some("lie_s") => SectionKind::LieS,
        Some("lie_g") => SectionKind::LieG,
        Some("basis") => SectionKind::Basis,
        Some("mul") => SectionKind::Mul,
        Some("d") => SectionKind::D,
        Some("iota_s") => SectionKind::IotaS(index(words.get(1))?),
        Some("iota_g") => SectionKind::IotaG(index(words.get(1))?),
        Some("connection") => SectionKind::Connection,
        Some("polynomial") => SectionKind::Polynomial,
        _ => return Err(line.err(1, format!("unknown section `{inner}`"))),
    };
    let arity = if matches!(kind, SectionKind::IotaS(_) | SectionKind::IotaG(_)) { 2 } else { 1 };
    if words.len() != arity {
        return Err(line.err(0, "unexpected words in section header"));
    }
    Ok(kind)
}

fn sections(text: &str) -> Result<Vec<Section<'_>>, ParseError> {
    let mut out: Vec<Section<'_>> = Vec::new();
    for line in split_lines(text) {
        if line.text.starts_with('[') {
            let kind = parse_header(&line)?;
            if out.iter().any(|s| s.kind == kind) {
                return Err(line.err(0, "section appears twice"));
            }
            out.push(Section { header: line, kind, lines: Vec::new() });
        } else {
            match out.last_mut() {
                Some(s) => s.lines.push(line),
                None => return Err(line.err(0, "content before the first section header")),
            }
        }
    }
    Ok(out)
}

fn parse_rat_expr(line: &Line<'_>, start: usize, end: usize) -> Result<Rat, ParseError> {
    let (off, s) = line.sub(start, end);
    let e = parse_expr(s).map_err(|e| line.err(off + e.offset, e.message))?;
    eval(&e, &Scalar).map_err(|e| line.err(off + e.offset, e.message))
}

struct Scalar;

impl Interp for Scalar {
    type V = Rat;
    fn number(&self, c: &Rat) -> Result<Rat, String> {
        Ok(c.clone())
    }
    fn name(&self, name: &str) -> Result<Rat, String> {
        Err(format!("expected a rational number, found `{name}`"))
    }
    fn add(&self, a: &Rat, b: &Rat) -> Result<Rat, String> {
        Ok(a + b)
    }
    fn neg(&self, a: &Rat) -> Rat {
        -a
    }
    fn mul(&self, a: &Rat, b: &Rat) -> Result<Rat, String> {
        Ok(a * b)
    }
}

/// Value of a linear-combination subexpression: a constant plus a vector.
#[derive(Clone)]
struct LinValue {
    constant: Rat,
    vector: BTreeMap<usize, Rat>,
    pure: bool,
}

struct LinInterp<'a> {
    basis: &'a [(String, u32)],
}

impl Interp for LinInterp<'_> {
    type V = LinValue;
    fn number(&self, c: &Rat) -> Result<LinValue, String> {
        Ok(LinValue { constant: c.clone(), vector: BTreeMap::new(), pure: true })
    }
    fn name(&self, name: &str) -> Result<LinValue, String> {
        let i = self
            .basis
            .iter()
            .position(|(n, _)| n == name)
            .ok_or_else(|| format!("undeclared basis element `{name}`"))?;
        Ok(LinValue { constant: Rat::zero(), vector: BTreeMap::from([(i, Rat::one())]), pure: false })
    }
    fn add(&self, a: &LinValue, b: &LinValue) -> Result<LinValue, String> {
        let mut v = a.vector.clone();
        for (i, c) in &b.vector {
            *v.entry(*i).or_insert_with(Rat::zero) += c;
        }
        Ok(LinValue { constant: &a.constant + &b.constant, vector: v, pure: a.pure && b.pure })
    }
    fn neg(&self, a: &LinValue) -> LinValue {
        LinValue {
            constant: -&a.constant,
            vector: a.vector.iter().map(|(i, c)| (*i, -c)).collect(),
            pure: a.pure,
        }
    }
    fn mul(&self, a: &LinValue, b: &LinValue) -> Result<LinValue, String> {
        let (s, v) = match (a.pure, b.pure) {
            (true, _) => (&a.constant, b),
            (_, true) => (&b.constant, a),
            _ => return Err("products of basis elements are not allowed here; declare them in [mul]".into()),
        };
        Ok(LinValue {
            constant: s * &v.constant,
            vector: v.vector.iter().map(|(i, c)| (*i, s * c)).collect(),
            pure: v.pure,
        })
    }
}

/// Sorts terms by descending degree, then declaration order, dropping zeros.
fn canonical(basis: &[(String, u32)], v: &BTreeMap<usize, Rat>) -> Lincomb {
    let mut idx: Vec<usize> = v.iter().filter(|(_, c)| !c.is_zero()).map(|(i, _)| *i).collect();
    idx.sort_by(|a, b| basis[*b].1.cmp(&basis[*a].1).then(a.cmp(b)));
    idx.into_iter().map(|i| (basis[i].0.clone(), v[&i].clone())).collect()
}

fn parse_lincomb(line: &Line<'_>, start: usize, basis: &[(String, u32)]) -> Result<Lincomb, ParseError> {
    let (off, s) = line.sub(start, line.text.len());
    let e = parse_expr(s).map_err(|e| line.err(off + e.offset, e.message))?;
    let value = eval(&e, &LinInterp { basis }).map_err(|e| line.err(off + e.offset, e.message))?;
    let mut v = value.vector;
    if !value.constant.is_zero() {
        let unit = basis
            .iter()
            .position(|(n, _)| n == UNIT_NAME)
            .ok_or_else(|| line.err(off, format!("constant term needs the unit, but `{UNIT_NAME}` is not declared")))?;
        *v.entry(unit).or_insert_with(Rat::zero) += value.constant;
    }
    Ok(canonical(basis, &v))
}

fn lookup(line: &Line<'_>, at: usize, name: &str, basis: &[(String, u32)]) -> Result<String, ParseError> {
    if basis.iter().any(|(n, _)| n == name) {
        Ok(name.to_string())
    } else {
        Err(line.err(at, format!("undeclared basis element `{name}`")))
    }
}

fn parse_lie_section(sec: &Section<'_>) -> Result<LieSection, ParseError> {
    parse_lie_lines(&sec.lines, Some(&sec.header))
}

fn parse_lie_lines(lines: &[Line<'_>], header: Option<&Line<'_>>) -> Result<LieSection, ParseError> {
    let mut dim: Option<usize> = None;
    let mut triples: Vec<(usize, usize, usize, Rat)> = Vec::new();
    for line in lines {
        let mut words = line.text.split_whitespace();
        match words.next() {
            Some("dim") => {
                if dim.is_some() {
                    return Err(line.err(0, "dimension given twice"));
                }
                let w: Vec<&str> = words.collect();
                match w.as_slice() {
                    [n] => match n.parse::<usize>() {
                        Ok(n) => dim = Some(n),
                        Err(_) => return Err(line.err(4, format!("invalid dimension `{n}`"))),
                    },
                    _ => return Err(line.err(0, "expected `dim N`")),
                }
            }
            Some("c") => {
                let n = dim.ok_or_else(|| line.err(0, "`dim` must come before structure constants"))?;
                let eq = line.text.find('=').ok_or_else(|| line.err(0, "expected `c I J K = VALUE`"))?;
                let idx: Vec<&str> = line.text[1..eq].split_whitespace().collect();
                if idx.len() != 3 {
                    return Err(line.err(0, "expected three indices `c I J K = VALUE`"));
                }
                let mut ijk = [0usize; 3];
                for (slot, w) in ijk.iter_mut().zip(&idx) {
                    match w.parse::<usize>() {
                        Ok(v) if (1..=n).contains(&v) => *slot = v - 1,
                        _ => return Err(line.err(2, format!("index `{w}` must be between 1 and {n}"))),
                    }
                }
                let [i, j, k] = ijk;
                if i >= j {
                    return Err(line.err(2, "structure constants are given with I < J"));
                }
                if triples.iter().any(|t| (t.0, t.1, t.2) == (i, j, k)) {
                    return Err(line.err(0, format!("structure constant c {} {} {} given twice", i + 1, j + 1, k + 1)));
                }
                let v = parse_rat_expr(line, eq + 1, line.text.len())?;
                if !v.is_zero() {
                    triples.push((i, j, k, v));
                }
            }
            _ => return Err(line.err(0, "expected `dim N` or `c I J K = VALUE`")),
        }
    }
    let dim = match (dim, header) {
        (Some(d), _) => d,
        (None, Some(h)) => return Err(h.err(0, "Lie algebra section has no `dim` line")),
        (None, None) => return Err(ParseError { line: 1, column: 1, message: "Lie algebra file has no `dim` line".into() }),
    };
    triples.sort_by_key(|t| (t.0, t.1, t.2));
    Ok(LieSection { dim, triples })
}

/// Parses a standalone Lie algebra file (`dim` and `c` lines, optional header).
pub fn parse_lie_file(text: &str) -> Result<LieAlgebraData, ParseError> {
    let lines: Vec<Line<'_>> = split_lines(text)
        .into_iter()
        .filter(|l| !matches!(l.text, "[lie]" | "[lie_s]" | "[lie_g]"))
        .collect();
    let sec = parse_lie_lines(&lines, None)?;
    sec.to_lie().map_err(|e| ParseError { line: 1, column: 1, message: e.to_string() })
}

/// Splits `LHS = RHS` and returns the trimmed left side with its offset.
fn split_eq<'a>(line: &'a Line<'_>, shape: &str) -> Result<(usize, &'a str, usize), ParseError> {
    let eq = line.text.find('=').ok_or_else(|| line.err(0, format!("expected `{shape}`")))?;
    let (off, lhs) = line.sub(0, eq);
    Ok((off, lhs, eq + 1))
}

pub fn parse_model(text: &str) -> Result<ModelDocument, ParseError> {
    let secs = sections(text)?;
    let mut doc = ModelDocument::default();
    let find = |k: SectionKind| secs.iter().find(|s| s.kind == k);

    if let Some(sec) = find(SectionKind::LieS) {
        doc.lie_s = Some(parse_lie_section(sec)?);
    }
    if let Some(sec) = find(SectionKind::LieG) {
        doc.lie_g = Some(parse_lie_section(sec)?);
    }
    let basis_sec = find(SectionKind::Basis)
        .ok_or_else(|| ParseError { line: 1, column: 1, message: "missing [basis] section".into() })?;
    for line in &basis_sec.lines {
        let w: Vec<&str> = line.text.split_whitespace().collect();
        let [name, deg] = w.as_slice() else {
            return Err(line.err(0, "expected `NAME DEGREE`"));
        };
        if !valid_name(name) {
            return Err(line.err(0, format!("invalid basis name `{name}`")));
        }
        let deg: u32 = deg
            .parse()
            .map_err(|_| line.err(line.text.rfind(deg).unwrap_or(0), format!("invalid degree `{deg}`")))?;
        if doc.basis.iter().any(|(n, _)| n == name) {
            return Err(line.err(0, format!("basis element `{name}` declared twice")));
        }
        doc.basis.push((name.to_string(), deg));
    }
    let basis = doc.basis.clone();

    for sec in &secs {
        match sec.kind {
            SectionKind::Mul => {
                for line in &sec.lines {
                    let (off, lhs, rhs) = split_eq(line, "A * B = VALUE")?;
                    let Some(star) = lhs.find('*') else {
                        return Err(line.err(off, "expected `A * B` on the left"));
                    };
                    let (a, b) = (lhs[..star].trim_end(), lhs[star + 1..].trim_start());
                    let a = lookup(line, off, a, &basis)?;
                    let b = lookup(line, off + lhs.len() - b.len(), b, &basis)?;
                    if doc.mul.iter().any(|(x, y, _)| x == &a && y == &b) {
                        return Err(line.err(off, format!("product {a} * {b} given twice")));
                    }
                    let v = parse_lincomb(line, rhs, &basis)?;
                    doc.mul.push((a, b, v));
                }
            }
            SectionKind::D | SectionKind::IotaS(_) | SectionKind::IotaG(_) => {
                let mut entries: Vec<(String, Lincomb)> = Vec::new();
                for line in &sec.lines {
                    let (off, lhs, rhs) = split_eq(line, "A = VALUE")?;
                    let a = lookup(line, off, lhs, &basis)?;
                    if entries.iter().any(|(x, _)| x == &a) {
                        return Err(line.err(off, format!("entry for `{a}` given twice")));
                    }
                    entries.push((a, parse_lincomb(line, rhs, &basis)?));
                }
                match sec.kind {
                    SectionKind::D => doc.d = entries,
                    SectionKind::IotaS(i) => {
                        if let Some(l) = &doc.lie_s {
                            if i >= l.dim {
                                return Err(sec.header.err(0, format!("iota_s index {} exceeds dim {}", i + 1, l.dim)));
                            }
                        }
                        doc.iota_s.insert(i, entries);
                    }
                    SectionKind::IotaG(i) => {
                        let Some(l) = &doc.lie_g else {
                            return Err(sec.header.err(0, "[iota_g] requires a [lie_g] section"));
                        };
                        if i >= l.dim {
                            return Err(sec.header.err(0, format!("iota_g index {} exceeds dim {}", i + 1, l.dim)));
                        }
                        doc.iota_g.insert(i, entries);
                    }
                    _ => unreachable!(),
                }
            }
            SectionKind::Connection => {
                let Some(g) = &doc.lie_g else {
                    return Err(sec.header.err(0, "[connection] requires a [lie_g] section"));
                };
                for line in &sec.lines {
                    let (off, lhs, rhs) = split_eq(line, "I = VALUE")?;
                    let i = match lhs.parse::<usize>() {
                        Ok(i) if (1..=g.dim).contains(&i) => i - 1,
                        _ => return Err(line.err(off, format!("component index must be between 1 and {}", g.dim))),
                    };
                    if doc.connection.contains_key(&i) {
                        return Err(line.err(off, format!("component {} given twice", i + 1)));
                    }
                    doc.connection.insert(i, parse_lincomb(line, rhs, &basis)?);
                }
            }
            SectionKind::Polynomial => {
                let joined: Vec<&str> = sec.lines.iter().map(|l| l.text).collect();
                let text = joined.join(" ");
                if let Some(first) = sec.lines.first() {
                    parse_expr(&text).map_err(|e| first.err(e.offset.min(first.text.len()), e.message))?;
                    doc.polynomial = Some(text);
                }
            }
            _ => {}
        }
    }
    Ok(doc)
}

fn write_lincomb(out: &mut String, terms: &Lincomb) {
    if terms.is_empty() {
        out.push('0');
        return;
    }
    for (n, (name, c)) in terms.iter().enumerate() {
        let neg = c.is_negative();
        let a = c.abs();
        if n == 0 {
            if neg {
                out.push('-');
            }
        } else {
            out.push_str(if neg { " - " } else { " + " });
        }
        if name == UNIT_NAME {
            let _ = write!(out, "{a}");
        } else if a.is_one() {
            out.push_str(name);
        } else {
            let _ = write!(out, "{a}*{name}");
        }
    }
}

fn write_lie(out: &mut String, header: &str, l: &LieSection) {
    let _ = writeln!(out, "[{header}]\ndim {}", l.dim);
    for (i, j, k, v) in &l.triples {
        let _ = writeln!(out, "c {} {} {} = {v}", i + 1, j + 1, k + 1);
    }
    out.push('\n');
}

impl fmt::Display for ModelDocument {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut out = String::new();
        if let Some(l) = &self.lie_s {
            write_lie(&mut out, "lie_s", l);
        }
        if let Some(l) = &self.lie_g {
            write_lie(&mut out, "lie_g", l);
        }
        out.push_str("[basis]\n");
        for (n, d) in &self.basis {
            let _ = writeln!(out, "{n} {d}");
        }
        let entries = |out: &mut String, header: String, es: &[(String, Lincomb)]| {
            if es.is_empty() {
                return;
            }
            let _ = writeln!(out, "\n[{header}]");
            for (a, v) in es {
                let _ = write!(out, "{a} = ");
                write_lincomb(out, v);
                out.push('\n');
            }
        };
        if !self.mul.is_empty() {
            out.push_str("\n[mul]\n");
            for (a, b, v) in &self.mul {
                let _ = write!(out, "{a} * {b} = ");
                write_lincomb(&mut out, v);
                out.push('\n');
            }
        }
        entries(&mut out, "d".into(), &self.d);
        for (i, es) in &self.iota_s {
            entries(&mut out, format!("iota_s {}", i + 1), es);
        }
        for (i, es) in &self.iota_g {
            entries(&mut out, format!("iota_g {}", i + 1), es);
        }
        if !self.connection.is_empty() {
            out.push_str("\n[connection]\n");
            for (i, v) in &self.connection {
                let _ = write!(out, "{} = ", i + 1);
                write_lincomb(&mut out, v);
                out.push('\n');
            }
        }
        if let Some(p) = &self.polynomial {
            let _ = writeln!(out, "\n[polynomial]\n{p}");
        }
        f.write_str(&out)
    }
}

fn to_map(v: &SparseVec) -> BTreeMap<usize, Rat> {
    v.iter().map(|(i, c)| (i, c.clone())).collect()
}

impl ModelDocument {
    /// Serializes a model, listing only the table entries the builder would not
    /// fill in by itself.
    pub fn from_model(model: &ModelKind, connection: Option<&[SparseVec]>, polynomial: Option<&str>) -> Self {
        let m = model.sdga();
        let basis: Vec<(String, u32)> = m.names().iter().cloned().zip(m.degrees().iter().copied()).collect();
        let lc = |v: &SparseVec| canonical(&basis, &to_map(v));
        let unit = m.unit();
        let n = m.dim();
        let default = |a: usize, b: usize| {
            if a == unit {
                SparseVec::unit(b)
            } else if b == unit {
                SparseVec::unit(a)
            } else {
                SparseVec::new()
            }
        };
        let mut mul = Vec::new();
        for a in 0..n {
            for b in a..n {
                let (ab, ba) = (m.mul_basis(a, b), m.mul_basis(b, a));
                let mut emit_ab = *ab != default(a, b);
                let predicted = if emit_ab { ab.scaled(&koszul_sign(m.degree(a), m.degree(b))) } else { default(b, a) };
                let emit_ba = a != b && *ba != predicted;
                emit_ab |= emit_ba;
                if emit_ab {
                    mul.push((m.name(a).to_string(), m.name(b).to_string(), lc(ab)));
                }
                if emit_ba {
                    mul.push((m.name(b).to_string(), m.name(a).to_string(), lc(ba)));
                }
            }
        }
        let op_entries = |op: &[SparseVec]| -> Vec<(String, Lincomb)> {
            op.iter()
                .enumerate()
                .filter(|(_, v)| !v.is_zero())
                .map(|(a, v)| (m.name(a).to_string(), lc(v)))
                .collect()
        };
        let d = op_entries(m.d_table());
        let collect_iota = |dim: usize, op: &dyn Fn(usize) -> Vec<SparseVec>| {
            (0..dim)
                .map(|i| (i, op_entries(&op(i))))
                .filter(|(_, es)| !es.is_empty())
                .collect::<BTreeMap<_, _>>()
        };
        let s = m.action();
        let iota_s = collect_iota(s.dim(), &|i| s.iota(i).clone());
        let (lie_g, iota_g) = match model.bundle() {
            Some(b) => {
                let g = b.g_action();
                (Some(LieSection::from_lie(g.lie())), collect_iota(g.dim(), &|i| g.iota(i).clone()))
            }
            None => (None, BTreeMap::new()),
        };
        let connection = connection
            .map(|c| c.iter().enumerate().map(|(i, v)| (i, lc(v))).collect())
            .unwrap_or_default();
        ModelDocument {
            lie_s: Some(LieSection::from_lie(m.lie())),
            lie_g,
            basis,
            mul,
            d,
            iota_s,
            iota_g,
            connection,
            polynomial: polynomial.map(str::to_string),
        }
    }

    fn position(&self, name: &str) -> usize {
        self.basis.iter().position(|(n, _)| n == name).expect("names resolved at parse time")
    }

    fn vector(&self, terms: &Lincomb) -> SparseVec {
        let mut v = SparseVec::new();
        for (name, c) in terms {
            v.add_term(self.position(name), c);
        }
        v
    }

    /// Builds the model. `s_override` replaces the document's `s` (or supplies
    /// it when the document has none).
    pub fn to_model(&self, s_override: Option<&LieAlgebraData>) -> Result<ModelKind, BuildError> {
        let lie = |sec: &LieSection| sec.to_lie().map_err(|e| BuildError::Usage(e.to_string()));
        let own_s = self.lie_s.as_ref().map(lie).transpose()?;
        let s = match (&own_s, s_override) {
            (Some(l), _) => l.clone(),
            (None, Some(l)) => l.clone(),
            (None, None) => LieAlgebraData::u1(),
        };
        let mut b = ModelBuilder::new(s.clone());
        if let Some(g) = &self.lie_g {
            b.structure_algebra(lie(g)?);
        }
        for (name, deg) in &self.basis {
            b.basis(name, *deg).map_err(BuildError::Invalid)?;
        }
        let idx = |name: &str| self.position(name);
        for (a, c, v) in &self.mul {
            b.set_product(idx(a), idx(c), self.vector(v));
        }
        for (a, v) in &self.d {
            let a = idx(a);
            b.set_d(a, self.vector(v));
        }
        let usage = |e: ModelError| BuildError::Usage(e.to_string());
        for (i, es) in &self.iota_s {
            for (a, v) in es {
                let a = idx(a);
                b.set_iota_s(*i, a, self.vector(v)).map_err(usage)?;
            }
        }
        for (i, es) in &self.iota_g {
            for (a, v) in es {
                let a = idx(a);
                b.set_iota_g(*i, a, self.vector(v)).map_err(usage)?;
            }
        }
        let built = if self.lie_g.is_some() {
            b.build_bundle().map(ModelKind::Bundle)
        } else {
            b.build().map(ModelKind::Plain)
        };
        let model = built.map_err(|e| match e {
            ModelError::EmptyBasis | ModelError::MissingUnit => BuildError::Invalid(e),
            other => BuildError::Usage(other.to_string()),
        })?;
        match (own_s, s_override) {
            (Some(_), Some(l)) => model.with_lie(l.clone()).map_err(usage),
            _ => Ok(model),
        }
    }

    /// Connection components as vectors, when every component is present.
    pub fn connection_vectors(&self) -> Option<Result<Vec<SparseVec>, String>> {
        if self.connection.is_empty() {
            return None;
        }
        let dim = self.lie_g.as_ref().map_or(0, |g| g.dim);
        Some(
            (0..dim)
                .map(|i| {
                    self.connection
                        .get(&i)
                        .map(|v| self.vector(v))
                        .ok_or_else(|| format!("connection component {} is missing", i + 1))
                })
                .collect(),
        )
    }
}

/// Parses a linear combination of the given basis names (used for flags).
pub fn parse_lincomb_text(text: &str, basis: &[(String, u32)]) -> Result<Lincomb, ParseError> {
    let line = Line { number: 1, indent: 0, text };
    parse_lincomb(&line, 0, basis)
}

#[cfg(test)]
mod tests {
    use super::*;
    use equivar_core::sdga::{builtin, builtin_connection, BUILTIN_NAMES};

    #[test]
    fn builtins_round_trip() {
        for name in BUILTIN_NAMES {
            let model = builtin(name).unwrap();
            let conn = builtin_connection(name);
            let doc = ModelDocument::from_model(&model, conn.as_deref(), None);
            let text = doc.to_string();
            let back = parse_model(&text).unwrap();
            assert_eq!(back, doc, "{name}:\n{text}");
            assert_eq!(back.to_model(None).unwrap(), model, "{name}");
            assert_eq!(back.to_string(), text);
        }
    }

    #[test]
    fn flat_document_text() {
        let model = builtin("flat_circle_over_circle").unwrap();
        let conn = builtin_connection("flat_circle_over_circle");
        let text = ModelDocument::from_model(&model, conn.as_deref(), Some("x1")).to_string();
        assert!(text.contains("alpha * beta = alpha_beta\n"), "{text}");
        assert!(text.contains("[iota_g 1]\nbeta = 1\nalpha_beta = -alpha\n"), "{text}");
        assert!(text.contains("[connection]\n1 = 3/2*alpha + beta\n"), "{text}");
    }

    fn err(text: &str) -> ParseError {
        parse_model(text).unwrap_err()
    }

    #[test]
    fn positioned_errors() {
        let e = err("[basis]\n1 0\nx 1\n[d]\nx = 1/0\n");
        assert_eq!((e.line, e.column), (5, 5));
        assert!(e.message.contains("zero denominator"));

        let e = err("[basis]\n1 0\nx 1\nx 2\n");
        assert_eq!(e.line, 4);
        assert!(e.message.contains("declared twice"));

        let e = err("[basis]\n1 0\n[d]\n  y = 1\n");
        assert_eq!((e.line, e.column), (4, 3));
        assert!(e.message.contains("undeclared"));

        let e = err("[basis]\n1 0\nx 1\n[mul]\nx * x = 2*z\n");
        assert_eq!((e.line, e.column), (5, 11));

        let e = err("[lie_s]\ndim 2\nc 2 1 1 = 1\n[basis]\n1 0\n");
        assert!(e.message.contains("I < J"));

        assert!(err("[basis]\n1 0\n[basis]\n").message.contains("twice"));
        assert!(err("[basis]\n1 0\nx 1\n[mul]\nx * x = 1\nx * x = 0\n").message.contains("twice"));
        assert!(err("[basis]\n1 0\nx 1\n[d]\nx = x*x\n").message.contains("[mul]"));
        assert!(err("[basis]\n1 0\n[iota_g 1]\n").message.contains("lie_g"));
        assert!(err("x 1\n").message.contains("before"));
        assert!(err("[basis]\n1 0\n[frobnicate]\n").message.contains("unknown section"));
    }

    #[test]
    fn missing_unit_is_a_build_failure() {
        let doc = parse_model("[basis]\nx 1\n").unwrap();
        assert!(matches!(doc.to_model(None), Err(BuildError::Invalid(ModelError::MissingUnit))));
    }

    #[test]
    fn comments_and_constants() {
        let doc = parse_model("# a circle\n[basis]\n1 0   # unit\nalpha 1\n[iota_s 1]\nalpha = 2 - 1\n").unwrap();
        assert_eq!(doc.iota_s[&0], vec![("alpha".to_string(), vec![("1".to_string(), Rat::one())])]);
    }

    #[test]
    fn lie_file() {
        let su2 = parse_lie_file("dim 3\nc 1 2 3 = 1\nc 2 3 1 = 1\nc 1 3 2 = -1\n").unwrap();
        assert_eq!(su2, LieAlgebraData::su2());
        assert!(parse_lie_file("c 1 2 3 = 1\n").is_err());
    }
}
