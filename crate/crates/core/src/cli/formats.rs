//! Instance file formats.
//!
//! * `ising-json`: `{format_version, num_spins, couplings: [[i, j, J]], fields, offset}`
//! * `bilp-json`: `{format_version, num_vars, objective, constraints: [{coeffs: [[i, s]], sense, rhs}], bounds, kinds}`
//! * `lp-text`: a small LP-like language, one statement per `;`:
//!
//! ```text
//! # knapsack
//! max: 4 a + 3 b + 2 c;
//! cap: 2 a + 3 b + 1 c <= 4;
//! bin a, b, c;
//! int n in [0, 5];
//! ```
//!
//! Objectives start with `min:` or `max:`, constraints are `[label:] expr op
//! expr` with `op` one of `<=`, `>=`, `=`, and every variable must be
//! declared with `bin` or `int … in [lo, hi]`. Variables are numbered in order
//! of first appearance. `#` and `//` start comments.

use std::collections::HashMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ising::IsingModel;
use crate::reduction::{BilpInstance, Constraint, ReductionError, Sense, VarKind};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum InstanceFormat {
    BilpJson,
    IsingJson,
    LpText,
}

impl InstanceFormat {
    pub fn name(self) -> &'static str {
        match self {
            InstanceFormat::BilpJson => "bilp-json",
            InstanceFormat::IsingJson => "ising-json",
            InstanceFormat::LpText => "lp-text",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Instance {
    Bilp(BilpInstance),
    Ising(IsingModel),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{location}: {message}")]
    Invalid { location: String, message: String },
}

impl ParseError {
    fn at(line: usize, column: usize, message: impl Into<String>) -> Self {
        ParseError::Syntax {
            line,
            column,
            message: message.into(),
        }
    }

    fn invalid(location: impl Into<String>, message: impl ToString) -> Self {
        ParseError::Invalid {
            location: location.into(),
            message: message.to_string(),
        }
    }
}

impl From<serde_json::Error> for ParseError {
    fn from(e: serde_json::Error) -> Self {
        let msg = e.to_string();
        // serde_json appends " at line L column C"; keep only the message.
        let message = msg.split(" at line ").next().unwrap_or(&msg).to_string();
        ParseError::Syntax {
            line: e.line(),
            column: e.column(),
            message,
        }
    }
}

pub fn parse_instance(text: &str, format: InstanceFormat) -> Result<Instance, ParseError> {
    match format {
        InstanceFormat::IsingJson => parse_ising_json(text).map(Instance::Ising),
        InstanceFormat::BilpJson => parse_bilp_json(text).map(Instance::Bilp),
        InstanceFormat::LpText => parse_lp_text(text).map(Instance::Bilp),
    }
}

fn check_version(version: u32) -> Result<(), ParseError> {
    if version != FORMAT_VERSION {
        return Err(ParseError::invalid(
            "format_version",
            format!("unsupported version {version}, expected {FORMAT_VERSION}"),
        ));
    }
    Ok(())
}

#[derive(Serialize, Deserialize)]
struct IsingJson {
    format_version: u32,
    num_spins: usize,
    couplings: Vec<(usize, usize, f64)>,
    fields: Vec<f64>,
    #[serde(default)]
    offset: f64,
}

pub fn parse_ising_json(text: &str) -> Result<IsingModel, ParseError> {
    let raw: IsingJson = serde_json::from_str(text)?;
    check_version(raw.format_version)?;
    IsingModel::new(raw.num_spins, raw.couplings, raw.fields, raw.offset).map_err(|e| {
        let location = match e {
            crate::ising::IsingError::DuplicatePair(..)
            | crate::ising::IsingError::SelfCoupling(_) => "couplings",
            crate::ising::IsingError::DimensionMismatch { .. } => "fields",
            _ => "model",
        };
        ParseError::invalid(location, e)
    })
}

pub fn write_ising_json(model: &IsingModel) -> String {
    let raw = IsingJson {
        format_version: FORMAT_VERSION,
        num_spins: model.num_spins(),
        couplings: model.couplings().collect(),
        fields: model.fields().to_vec(),
        offset: model.offset(),
    };
    serde_json::to_string_pretty(&raw).expect("plain data serializes") + "\n"
}

#[derive(Serialize, Deserialize)]
struct ConstraintJson {
    coeffs: Vec<(usize, f64)>,
    sense: Sense,
    rhs: f64,
}

#[derive(Serialize, Deserialize, Clone, Copy, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
enum Direction {
    Minimize,
    Maximize,
}

#[derive(Serialize, Deserialize)]
struct BilpJson {
    format_version: u32,
    #[serde(default = "minimize")]
    direction: Direction,
    num_vars: usize,
    objective: Vec<f64>,
    #[serde(default)]
    objective_offset: f64,
    constraints: Vec<ConstraintJson>,
    /// Optional when every variable is binary.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    bounds: Option<Vec<(i64, i64)>>,
    kinds: Vec<String>,
}

fn minimize() -> Direction {
    Direction::Minimize
}

fn var_kind(name: &str, var: String, bounds: (i64, i64)) -> Result<VarKind, ParseError> {
    match name {
        "binary" | "bin" => {
            if bounds != (0, 1) {
                return Err(ParseError::invalid(
                    format!("bounds[{var}]"),
                    format!("binary variable has bounds [{}, {}]", bounds.0, bounds.1),
                ));
            }
            Ok(VarKind::Binary)
        }
        "integer" | "int" => Ok(VarKind::Integer {
            lo: bounds.0,
            hi: bounds.1,
        }),
        "continuous" | "real" | "cont" => Err(ParseError::invalid(
            format!("kinds[{var}]"),
            ReductionError::ContinuousVariable { var },
        )),
        other => Err(ParseError::invalid(
            format!("kinds[{var}]"),
            format!("unknown variable kind '{other}'"),
        )),
    }
}

pub fn parse_bilp_json(text: &str) -> Result<BilpInstance, ParseError> {
    let raw: BilpJson = serde_json::from_str(text)?;
    check_version(raw.format_version)?;
    let n = raw.num_vars;
    let bounds = match raw.bounds {
        Some(b) => b,
        None if raw.kinds.iter().all(|k| k == "binary" || k == "bin") => {
            vec![(0, 1); raw.kinds.len()]
        }
        None => {
            return Err(ParseError::invalid(
                "bounds",
                "required when any variable is not binary",
            ))
        }
    };
    for (name, len) in [
        ("objective", raw.objective.len()),
        ("bounds", bounds.len()),
        ("kinds", raw.kinds.len()),
    ] {
        if len != n {
            return Err(ParseError::invalid(
                name,
                format!("has {len} entries but num_vars is {n}"),
            ));
        }
    }
    let kinds = raw
        .kinds
        .iter()
        .zip(&bounds)
        .enumerate()
        .map(|(i, (k, &b))| var_kind(k, i.to_string(), b))
        .collect::<Result<Vec<_>, _>>()?;
    let constraints = raw
        .constraints
        .into_iter()
        .map(|c| Constraint::new(c.coeffs, c.sense, c.rhs))
        .collect();
    let sign = if raw.direction == Direction::Maximize {
        -1.0
    } else {
        1.0
    };
    let objective = raw.objective.iter().map(|c| sign * c).collect();
    BilpInstance::new(objective, constraints, kinds)
        .and_then(|inst| inst.with_objective_offset(sign * raw.objective_offset))
        .map_err(|e| ParseError::invalid("instance", e))
}

pub fn write_bilp_json(instance: &BilpInstance) -> String {
    let raw = BilpJson {
        format_version: FORMAT_VERSION,
        direction: Direction::Minimize,
        num_vars: instance.num_vars(),
        objective: instance.objective().to_vec(),
        objective_offset: instance.objective_offset(),
        constraints: instance
            .constraints()
            .iter()
            .map(|c| ConstraintJson {
                coeffs: c.coeffs.clone(),
                sense: c.sense,
                rhs: c.rhs,
            })
            .collect(),
        bounds: Some(
            (0..instance.num_vars())
                .map(|v| instance.bounds(v))
                .collect(),
        ),
        kinds: instance
            .kinds()
            .iter()
            .map(|k| match k {
                VarKind::Binary => "binary".to_string(),
                VarKind::Integer { .. } => "integer".to_string(),
            })
            .collect(),
    };
    serde_json::to_string_pretty(&raw).expect("plain data serializes") + "\n"
}

// ---------------------------------------------------------------- lp-text

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Number(f64),
    Colon,
    Semi,
    Comma,
    LBracket,
    RBracket,
    Plus,
    Minus,
    Star,
    Le,
    Ge,
    Eq,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("'{s}'"),
            Tok::Number(v) => format!("number {v}"),
            Tok::Colon => "':'".into(),
            Tok::Semi => "';'".into(),
            Tok::Comma => "','".into(),
            Tok::LBracket => "'['".into(),
            Tok::RBracket => "']'".into(),
            Tok::Plus => "'+'".into(),
            Tok::Minus => "'-'".into(),
            Tok::Star => "'*'".into(),
            Tok::Le => "'<='".into(),
            Tok::Ge => "'>='".into(),
            Tok::Eq => "'='".into(),
        }
    }
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    column: usize,
}

fn tokenize(text: &str) -> Result<Vec<Spanned>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let c = chars[i];
        let (start_line, start_col) = (line, col);
        let mut advance = |n: usize, i: &mut usize| {
            *i += n;
            col += n;
        };
        match c {
            '\n' => {
                i += 1;
                line += 1;
                col = 1;
                continue;
            }
            c if c.is_whitespace() => {
                advance(1, &mut i);
                continue;
            }
            '#' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
                continue;
            }
            '/' if chars.get(i + 1) == Some(&'/') => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
                continue;
            }
            _ => {}
        }
        let simple = match c {
            ':' => Some((Tok::Colon, 1)),
            ';' => Some((Tok::Semi, 1)),
            ',' => Some((Tok::Comma, 1)),
            '[' => Some((Tok::LBracket, 1)),
            ']' => Some((Tok::RBracket, 1)),
            '+' => Some((Tok::Plus, 1)),
            '-' => Some((Tok::Minus, 1)),
            '*' => Some((Tok::Star, 1)),
            '<' if chars.get(i + 1) == Some(&'=') => Some((Tok::Le, 2)),
            '>' if chars.get(i + 1) == Some(&'=') => Some((Tok::Ge, 2)),
            '=' if chars.get(i + 1) == Some(&'=') => Some((Tok::Eq, 2)),
            '=' => Some((Tok::Eq, 1)),
            _ => None,
        };
        if let Some((tok, len)) = simple {
            advance(len, &mut i);
            out.push(Spanned {
                tok,
                line: start_line,
                column: start_col,
            });
            continue;
        }
        if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit()))
        {
            let start = i;
            let mut j = i;
            while j < chars.len() && (chars[j].is_ascii_digit() || chars[j] == '.') {
                j += 1;
            }
            if j < chars.len() && (chars[j] == 'e' || chars[j] == 'E') {
                let mut k = j + 1;
                if k < chars.len() && (chars[k] == '+' || chars[k] == '-') {
                    k += 1;
                }
                if k < chars.len() && chars[k].is_ascii_digit() {
                    while k < chars.len() && chars[k].is_ascii_digit() {
                        k += 1;
                    }
                    j = k;
                }
            }
            let lexeme: String = chars[start..j].iter().collect();
            let value: f64 = lexeme.parse().map_err(|_| {
                ParseError::at(
                    start_line,
                    start_col,
                    format!("malformed number '{lexeme}'"),
                )
            })?;
            if !value.is_finite() {
                return Err(ParseError::at(
                    start_line,
                    start_col,
                    format!("non-finite number '{lexeme}'"),
                ));
            }
            advance(j - i, &mut i);
            out.push(Spanned {
                tok: Tok::Number(value),
                line: start_line,
                column: start_col,
            });
            continue;
        }
        if c.is_alphabetic() || c == '_' {
            let start = i;
            let mut j = i;
            while j < chars.len()
                && (chars[j].is_alphanumeric() || chars[j] == '_' || chars[j] == '.')
            {
                j += 1;
            }
            let name: String = chars[start..j].iter().collect();
            advance(j - i, &mut i);
            out.push(Spanned {
                tok: Tok::Ident(name),
                line: start_line,
                column: start_col,
            });
            continue;
        }
        return Err(ParseError::at(
            line,
            col,
            format!("unexpected character '{c}'"),
        ));
    }
    Ok(out)
}

const KEYWORDS: &[&str] = &[
    "min",
    "max",
    "minimize",
    "maximize",
    "int",
    "bin",
    "cont",
    "real",
    "continuous",
    "in",
];

struct Linear {
    terms: Vec<(String, f64, usize, usize)>,
    constant: f64,
}

struct LpParser {
    toks: Vec<Spanned>,
    pos: usize,
    end: (usize, usize),
}

impl LpParser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|s| &s.tok)
    }

    fn peek_at(&self, k: usize) -> Option<&Tok> {
        self.toks.get(self.pos + k).map(|s| &s.tok)
    }

    fn here(&self) -> (usize, usize) {
        self.toks
            .get(self.pos)
            .map(|s| (s.line, s.column))
            .unwrap_or(self.end)
    }

    fn error(&self, message: impl Into<String>) -> ParseError {
        let (line, column) = self.here();
        ParseError::at(line, column, message)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|s| s.tok.clone());
        self.pos += 1;
        t
    }

    fn expect(&mut self, want: Tok) -> Result<(), ParseError> {
        match self.peek() {
            Some(t) if *t == want => {
                self.pos += 1;
                Ok(())
            }
            Some(t) => Err(self.error(format!(
                "expected {}, found {}",
                want.describe(),
                t.describe()
            ))),
            None => Err(self.error(format!("expected {}, found end of input", want.describe()))),
        }
    }

    fn ident(&mut self) -> Result<(String, usize, usize), ParseError> {
        let (line, column) = self.here();
        match self.peek().cloned() {
            Some(Tok::Ident(name)) if !KEYWORDS.contains(&name.as_str()) => {
                self.pos += 1;
                Ok((name, line, column))
            }
            Some(t) => Err(self.error(format!("expected variable name, found {}", t.describe()))),
            None => Err(self.error("expected variable name, found end of input")),
        }
    }

    fn integer(&mut self) -> Result<i64, ParseError> {
        let negative = match self.peek() {
            Some(Tok::Minus) => {
                self.pos += 1;
                true
            }
            Some(Tok::Plus) => {
                self.pos += 1;
                false
            }
            _ => false,
        };
        match self.peek().cloned() {
            Some(Tok::Number(v)) if v.fract() == 0.0 && v.abs() < 9.0e15 => {
                self.pos += 1;
                Ok(if negative { -(v as i64) } else { v as i64 })
            }
            Some(t) => Err(self.error(format!("expected integer bound, found {}", t.describe()))),
            None => Err(self.error("expected integer bound, found end of input")),
        }
    }

    /// `[sign] term { (+|-) term }`; stops at a relation, `;` or end.
    fn linear(&mut self) -> Result<Linear, ParseError> {
        let mut lin = Linear {
            terms: Vec::new(),
            constant: 0.0,
        };
        let mut first = true;
        loop {
            let mut sign = 1.0;
            let mut saw_op = false;
            while let Some(t) = self.peek() {
                match t {
                    Tok::Plus => {}
                    Tok::Minus => sign = -sign,
                    _ => break,
                }
                saw_op = true;
                self.pos += 1;
            }
            if !first && !saw_op {
                break;
            }
            let (line, column) = self.here();
            match self.peek().cloned() {
                Some(Tok::Number(v)) => {
                    self.pos += 1;
                    if self.peek() == Some(&Tok::Star) {
                        self.pos += 1;
                    }
                    match self.peek() {
                        Some(Tok::Ident(name)) if !KEYWORDS.contains(&name.as_str()) => {
                            let (name, l, c) = self.ident()?;
                            lin.terms.push((name, sign * v, l, c));
                        }
                        _ => lin.constant += sign * v,
                    }
                }
                Some(Tok::Ident(name)) if !KEYWORDS.contains(&name.as_str()) => {
                    self.pos += 1;
                    lin.terms.push((name, sign, line, column));
                }
                Some(t) => return Err(self.error(format!("expected term, found {}", t.describe()))),
                None => return Err(self.error("expected term, found end of input")),
            }
            first = false;
        }
        Ok(lin)
    }
}

#[derive(Default)]
struct Vars {
    index: HashMap<String, usize>,
    names: Vec<String>,
    kinds: Vec<Option<VarKind>>,
    first_use: Vec<(usize, usize)>,
}

impl Vars {
    fn id(&mut self, name: &str, line: usize, column: usize) -> usize {
        if let Some(&i) = self.index.get(name) {
            return i;
        }
        let i = self.names.len();
        self.index.insert(name.to_string(), i);
        self.names.push(name.to_string());
        self.kinds.push(None);
        self.first_use.push((line, column));
        i
    }

    fn declare(
        &mut self,
        name: String,
        kind: VarKind,
        line: usize,
        column: usize,
    ) -> Result<(), ParseError> {
        let i = self.id(&name, line, column);
        if self.kinds[i].is_some() {
            return Err(ParseError::at(
                line,
                column,
                format!("variable '{name}' declared twice"),
            ));
        }
        self.kinds[i] = Some(kind);
        Ok(())
    }
}

pub fn parse_lp_text(text: &str) -> Result<BilpInstance, ParseError> {
    let toks = tokenize(text)?;
    let end = toks
        .last()
        .map(|s| (s.line, s.column + 1))
        .unwrap_or((1, 1));
    let mut p = LpParser { toks, pos: 0, end };
    let mut vars = Vars::default();
    let mut objective: Option<(f64, Linear)> = None;
    let mut constraints: Vec<Constraint> = Vec::new();

    while p.peek().is_some() {
        let (line, column) = p.here();
        let head = match p.peek() {
            Some(Tok::Ident(s)) => Some(s.clone()),
            _ => None,
        };
        match head.as_deref() {
            Some(kw @ ("min" | "max" | "minimize" | "maximize")) => {
                p.pos += 1;
                p.expect(Tok::Colon)?;
                if objective.is_some() {
                    return Err(ParseError::at(line, column, "more than one objective"));
                }
                let sign = if kw.starts_with("max") { -1.0 } else { 1.0 };
                let lin = p.linear()?;
                for (name, _, l, c) in &lin.terms {
                    vars.id(name, *l, *c);
                }
                objective = Some((sign, lin));
                p.expect(Tok::Semi)?;
            }
            Some("bin") => {
                p.pos += 1;
                loop {
                    let (name, l, c) = p.ident()?;
                    vars.declare(name, VarKind::Binary, l, c)?;
                    if p.peek() == Some(&Tok::Comma) {
                        p.pos += 1;
                    } else {
                        break;
                    }
                }
                p.expect(Tok::Semi)?;
            }
            Some("int") => {
                p.pos += 1;
                let mut names = vec![p.ident()?];
                while p.peek() == Some(&Tok::Comma) {
                    p.pos += 1;
                    names.push(p.ident()?);
                }
                match p.next() {
                    Some(Tok::Ident(s)) if s == "in" => {}
                    _ => {
                        p.pos -= 1;
                        return Err(p.error("integer variables need bounds: int x in [lo, hi]"));
                    }
                }
                p.expect(Tok::LBracket)?;
                let lo = p.integer()?;
                p.expect(Tok::Comma)?;
                let hi = p.integer()?;
                p.expect(Tok::RBracket)?;
                if lo > hi {
                    return Err(ParseError::at(
                        line,
                        column,
                        format!("empty bounds [{lo}, {hi}]"),
                    ));
                }
                for (name, l, c) in names {
                    vars.declare(name, VarKind::Integer { lo, hi }, l, c)?;
                }
                p.expect(Tok::Semi)?;
            }
            Some("cont" | "real" | "continuous") => {
                p.pos += 1;
                let (name, _, _) = p.ident()?;
                return Err(ParseError::at(
                    line,
                    column,
                    ReductionError::ContinuousVariable { var: name }.to_string(),
                ));
            }
            _ => {
                if matches!(p.peek(), Some(Tok::Ident(_))) && p.peek_at(1) == Some(&Tok::Colon) {
                    p.pos += 2;
                }
                let lhs = p.linear()?;
                let sense = match p.next() {
                    Some(Tok::Le) => Sense::Le,
                    Some(Tok::Ge) => Sense::Ge,
                    Some(Tok::Eq) => Sense::Eq,
                    other => {
                        p.pos -= 1;
                        let found = other
                            .map(|t| t.describe())
                            .unwrap_or_else(|| "end of input".into());
                        return Err(p.error(format!("expected '<=', '>=' or '=', found {found}")));
                    }
                };
                let rhs = p.linear()?;
                p.expect(Tok::Semi)?;
                let mut coeffs: Vec<(usize, f64)> = Vec::new();
                let sides = lhs
                    .terms
                    .into_iter()
                    .map(|t| (t, 1.0))
                    .chain(rhs.terms.into_iter().map(|t| (t, -1.0)));
                for ((name, v, l, c), side) in sides {
                    let id = vars.id(&name, l, c);
                    match coeffs.iter_mut().find(|(i, _)| *i == id) {
                        Some(entry) => entry.1 += side * v,
                        None => coeffs.push((id, side * v)),
                    }
                }
                constraints.push(Constraint::new(coeffs, sense, rhs.constant - lhs.constant));
            }
        }
    }

    let mut kinds = Vec::with_capacity(vars.names.len());
    for (i, kind) in vars.kinds.iter().enumerate() {
        match kind {
            Some(k) => kinds.push(*k),
            None => {
                let (line, column) = vars.first_use[i];
                return Err(ParseError::at(
                    line,
                    column,
                    format!(
                        "unknown variable '{}' (declare it with 'bin' or 'int … in [lo, hi]')",
                        vars.names[i]
                    ),
                ));
            }
        }
    }
    let mut c = vec![0.0; kinds.len()];
    let mut offset = 0.0;
    if let Some((sign, lin)) = objective {
        for (name, v, _, _) in lin.terms {
            c[vars.index[&name]] += sign * v;
        }
        offset = sign * lin.constant;
    }
    BilpInstance::new(c, constraints, kinds)
        .and_then(|i| i.with_objective_offset(offset))
        .map_err(|e| ParseError::invalid("instance", e))
}

fn push_number(out: &mut String, v: f64) {
    // Debug formatting is the shortest string that round-trips.
    let _ = write!(out, "{v:?}");
}

fn push_term(out: &mut String, coef: f64, name: &str, first: bool) {
    let negative = coef.is_sign_negative();
    match (first, negative) {
        (true, true) => out.push_str("- "),
        (true, false) => {}
        (false, true) => out.push_str(" - "),
        (false, false) => out.push_str(" + "),
    }
    push_number(out, coef.abs());
    out.push(' ');
    out.push_str(name);
}

/// Writes `instance` as lp-text with variables named `x0, x1, …`.
pub fn write_lp_text(instance: &BilpInstance) -> String {
    let name = |i: usize| format!("x{i}");
    let mut out = String::from("# isingopt lp-text\n");
    // Declarations first, in index order, so numbering survives a round trip.
    for (i, k) in instance.kinds().iter().enumerate() {
        match k {
            VarKind::Binary => {
                let _ = writeln!(out, "bin {};", name(i));
            }
            VarKind::Integer { lo, hi } => {
                let _ = writeln!(out, "int {} in [{lo}, {hi}];", name(i));
            }
        }
    }

    out.push_str("min: ");
    let mut first = true;
    for (i, &c) in instance.objective().iter().enumerate() {
        push_term(&mut out, c, &name(i), first);
        first = false;
    }
    let off = instance.objective_offset();
    if first {
        push_number(&mut out, off);
    } else if off != 0.0 || off.is_sign_negative() {
        out.push_str(if off.is_sign_negative() { " - " } else { " + " });
        push_number(&mut out, off.abs());
    }
    out.push_str(";\n");

    for (j, con) in instance.constraints().iter().enumerate() {
        let _ = write!(out, "c{j}: ");
        if con.coeffs.is_empty() {
            out.push('0');
        }
        for (k, &(i, s)) in con.coeffs.iter().enumerate() {
            push_term(&mut out, s, &name(i), k == 0);
        }
        let _ = write!(out, " {} ", con.sense.symbol());
        if con.rhs.is_sign_negative() {
            out.push_str("- ");
        }
        push_number(&mut out, con.rhs.abs());
        out.push_str(";\n");
    }
    out
}
