//! Text format for models, systems and candidate relations.
//!
//! ```text
//! ma M { state s init; state t; trans s -a-> { t: 1/2, s: 1/2 }; timed t -3/2-> s; }
//! tlts T { state p init; trans p -tau-> q; timed q -5-> p; }
//! system S = (M ||{a} M2) ||{} M3;
//! relation R = { ({s:1}, {S@(s,u,w):1}) };
//! ```
//!
//! `#` and `//` start comments that run to the end of the line.

use std::collections::BTreeSet;
use std::fmt::{self, Write as _};

use thiserror::Error;

use crate::bisim::CandidateRelation;
use crate::composition::ChiMa;
use crate::distributions::Subdistr;
use crate::model::{Action, ModelError, SequentialMa, System, Tlts, Violation};
use crate::rational::{fmt_rational, parse_rational, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{col}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SysAst {
    Name(String),
    Par(Box<SysAst>, Vec<String>, Box<SysAst>),
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct StateRef {
    pub unit: Option<String>,
    pub locals: Vec<String>,
}

impl fmt::Display for StateRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(u) = &self.unit {
            write!(f, "{u}@")?;
        }
        if self.locals.len() == 1 {
            write!(f, "{}", self.locals[0])
        } else {
            write!(f, "({})", self.locals.join(","))
        }
    }
}

pub type DistrLiteral = Vec<(StateRef, Rational)>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelationDef {
    pub name: String,
    pub pairs: Vec<(DistrLiteral, DistrLiteral)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SystemDef {
    pub name: String,
    pub expr: SysAst,
    pub system: System,
}

/// A parsed and validated model file.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ModelFile {
    pub mas: Vec<SequentialMa>,
    pub tltss: Vec<Tlts>,
    pub systems: Vec<SystemDef>,
    pub relations: Vec<RelationDef>,
}

impl ModelFile {
    pub fn ma(&self, name: &str) -> Option<&SequentialMa> {
        self.mas.iter().find(|m| m.name == name)
    }

    pub fn tlts(&self, name: &str) -> Option<&Tlts> {
        self.tltss.iter().find(|m| m.name == name)
    }

    pub fn system(&self, name: &str) -> Option<&System> {
        self.systems.iter().find(|s| s.name == name).map(|s| &s.system)
    }

    pub fn relation(&self, name: &str) -> Option<&RelationDef> {
        self.relations.iter().find(|r| r.name == name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Num(String),
    Sym(&'static str),
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) | Tok::Num(s) => write!(f, "`{s}`"),
            Tok::Sym(s) => write!(f, "`{s}`"),
        }
    }
}

const SYMBOLS: &[&str] = &["||", "->", "{", "}", "(", ")", ";", ":", ",", "=", "-", "@"];

fn lex(src: &str) -> Result<Vec<(Tok, usize, usize)>, ParseError> {
    let mut out = Vec::new();
    let chars: Vec<char> = src.chars().collect();
    let (mut i, mut line, mut col) = (0, 1, 1);
    while i < chars.len() {
        let c = chars[i];
        let start = (line, col);
        let advance = |n: usize, i: &mut usize, col: &mut usize| {
            *i += n;
            *col += n;
        };
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
        } else if c.is_whitespace() {
            advance(1, &mut i, &mut col);
        } else if c == '#' || (c == '/' && chars.get(i + 1) == Some(&'/')) {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
        } else if c.is_ascii_digit() {
            let mut j = i;
            while j < chars.len() && chars[j].is_ascii_digit() {
                j += 1;
            }
            if chars.get(j) == Some(&'/') && chars.get(j + 1).is_some_and(|d| d.is_ascii_digit()) {
                j += 1;
                while j < chars.len() && chars[j].is_ascii_digit() {
                    j += 1;
                }
            }
            out.push((Tok::Num(chars[i..j].iter().collect()), start.0, start.1));
            advance(j - i, &mut i, &mut col);
        } else if c.is_alphabetic() || c == '_' {
            let mut j = i;
            while j < chars.len() && (chars[j].is_alphanumeric() || chars[j] == '_' || chars[j] == '\'') {
                j += 1;
            }
            out.push((Tok::Ident(chars[i..j].iter().collect()), start.0, start.1));
            advance(j - i, &mut i, &mut col);
        } else {
            let rest: String = chars[i..(i + 2).min(chars.len())].iter().collect();
            let Some(sym) = SYMBOLS.iter().find(|s| rest.starts_with(**s)) else {
                return Err(ParseError {
                    line,
                    col,
                    message: format!("unexpected character `{c}`"),
                });
            };
            out.push((Tok::Sym(sym), start.0, start.1));
            advance(sym.len(), &mut i, &mut col);
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize, usize)>,
    pos: usize,
    end: (usize, usize),
}

impl Parser {
    fn here(&self) -> (usize, usize) {
        self.toks.get(self.pos).map(|t| (t.1, t.2)).unwrap_or(self.end)
    }

    fn err_at<T>(&self, at: (usize, usize), message: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError {
            line: at.0,
            col: at.1,
            message: message.into(),
        })
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T, ParseError> {
        self.err_at(self.here(), message)
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.0)
    }

    fn peek_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Some(Tok::Sym(x)) if *x == s)
    }

    fn describe(&self) -> String {
        match self.peek() {
            Some(t) => t.to_string(),
            None => "end of input".into(),
        }
    }

    fn expect(&mut self, s: &str) -> Result<(), ParseError> {
        if self.peek_sym(s) {
            self.pos += 1;
            Ok(())
        } else {
            self.err(format!("expected `{s}`, found {}", self.describe()))
        }
    }

    fn ident(&mut self) -> Result<String, ParseError> {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => self.err(format!("expected a name, found {}", self.describe())),
        }
    }

    fn rational(&mut self) -> Result<Rational, ParseError> {
        let at = self.here();
        match self.peek() {
            Some(Tok::Num(s)) => {
                let s = s.clone();
                self.pos += 1;
                parse_rational(&s).map_or_else(|| self.err_at(at, format!("invalid number `{s}`")), Ok)
            }
            _ => self.err(format!("expected a number, found {}", self.describe())),
        }
    }
}

/// Parses and validates a model file.
pub fn parse(src: &str) -> Result<ModelFile, ParseError> {
    let toks = lex(src)?;
    let lines = src.lines().count().max(1);
    let end = (lines, src.lines().last().map_or(1, |l| l.chars().count() + 1));
    let mut p = Parser { toks, pos: 0, end };
    let mut file = ModelFile::default();
    let mut names: BTreeSet<String> = BTreeSet::new();
    if p.peek().is_none() {
        return p.err("empty model file");
    }
    while p.peek().is_some() {
        let at = p.here();
        let kw = p.ident()?;
        let name_at = p.here();
        let name = p.ident()?;
        if !names.insert(name.clone()) {
            return p.err_at(name_at, format!("duplicate definition of `{name}`"));
        }
        match kw.as_str() {
            "ma" => {
                let m = parse_ma(&mut p, &name)?;
                let v = m.validate();
                if let Some(first) = v.first() {
                    return p.err_at(at, format!("invalid MA `{name}`: {}", describe_violation(first)));
                }
                file.mas.push(m);
            }
            "tlts" => {
                let t = parse_tlts(&mut p, &name)?;
                let v = t.validate();
                if let Some(first) = v.first() {
                    return p.err_at(at, format!("invalid TLTS `{name}`: {}", describe_violation(first)));
                }
                file.tltss.push(t);
            }
            "system" => {
                p.expect("=")?;
                let expr = parse_sys(&mut p)?;
                p.expect(";")?;
                let system = build_system(&file, &name, &expr).or_else(|m| p.err_at(at, m))?;
                file.systems.push(SystemDef { name, expr, system });
            }
            "relation" => {
                p.expect("=")?;
                p.expect("{")?;
                let mut pairs = Vec::new();
                while !p.peek_sym("}") {
                    p.expect("(")?;
                    let a = parse_distr(&mut p)?;
                    p.expect(",")?;
                    let b = parse_distr(&mut p)?;
                    p.expect(")")?;
                    pairs.push((a, b));
                    if !p.peek_sym("}") {
                        p.expect(",")?;
                    }
                }
                p.expect("}")?;
                p.expect(";")?;
                file.relations.push(RelationDef { name, pairs });
            }
            other => return p.err_at(at, format!("unknown block `{other}`")),
        }
    }
    Ok(file)
}

fn describe_violation(v: &Violation) -> String {
    v.to_string()
}

fn parse_label(p: &mut Parser) -> Result<Action, ParseError> {
    let l = p.ident()?;
    Ok(if l == "tau" { Action::Tau } else { Action::visible(&l) })
}

fn parse_ma(p: &mut Parser, name: &str) -> Result<SequentialMa, ParseError> {
    let mut m = SequentialMa::new(name);
    let mut init = None;
    p.expect("{")?;
    while !p.peek_sym("}") {
        let at = p.here();
        match p.ident()?.as_str() {
            "state" => {
                let s = m.state(&p.ident()?);
                if matches!(p.peek(), Some(Tok::Ident(x)) if x == "init") {
                    p.pos += 1;
                    if init.replace(s).is_some() {
                        return p.err_at(at, "several initial states");
                    }
                }
            }
            "trans" => {
                let s = m.state(&p.ident()?);
                p.expect("-")?;
                let a = parse_label(p)?;
                p.expect("->")?;
                let target = if p.peek_sym("{") {
                    p.pos += 1;
                    let mut pairs = Vec::new();
                    while !p.peek_sym("}") {
                        let t = m.state(&p.ident()?);
                        p.expect(":")?;
                        pairs.push((t, p.rational()?));
                        if !p.peek_sym("}") {
                            p.expect(",")?;
                        }
                    }
                    p.pos += 1;
                    Subdistr::from_pairs(pairs).or_else(|e| p.err_at(at, e.to_string()))?
                } else {
                    Subdistr::dirac(m.state(&p.ident()?))
                };
                m.add_action(s, a, target);
            }
            "timed" => {
                let s = m.state(&p.ident()?);
                p.expect("-")?;
                let rate = p.rational()?;
                p.expect("->")?;
                let t = m.state(&p.ident()?);
                m.add_timed(s, rate, t);
            }
            other => return p.err_at(at, format!("unknown statement `{other}`")),
        }
        p.expect(";")?;
    }
    p.expect("}")?;
    if m.num_states() == 0 {
        return p.err(format!("MA `{name}` has no states"));
    }
    m.initial = init.unwrap_or(0);
    Ok(m)
}

fn parse_tlts(p: &mut Parser, name: &str) -> Result<Tlts, ParseError> {
    let mut t = Tlts::new(name);
    let mut init = None;
    p.expect("{")?;
    while !p.peek_sym("}") {
        let at = p.here();
        match p.ident()?.as_str() {
            "state" => {
                let s = t.state(&p.ident()?);
                if matches!(p.peek(), Some(Tok::Ident(x)) if x == "init") {
                    p.pos += 1;
                    if init.replace(s).is_some() {
                        return p.err_at(at, "several initial states");
                    }
                }
            }
            "trans" => {
                let s = t.state(&p.ident()?);
                p.expect("-")?;
                let a = parse_label(p)?;
                p.expect("->")?;
                if p.peek_sym("{") {
                    return p.err("TLTS transitions lead to single states");
                }
                let x = t.state(&p.ident()?);
                t.add_action(s, a, x);
            }
            "timed" => {
                let s = t.state(&p.ident()?);
                p.expect("-")?;
                let d = p.rational()?;
                p.expect("->")?;
                let x = t.state(&p.ident()?);
                t.add_timed(s, d, x);
            }
            other => return p.err_at(at, format!("unknown statement `{other}`")),
        }
        p.expect(";")?;
    }
    p.expect("}")?;
    if t.num_states() == 0 {
        return p.err(format!("TLTS `{name}` has no states"));
    }
    t.initial = init.unwrap_or(0);
    Ok(t)
}

fn parse_sys(p: &mut Parser) -> Result<SysAst, ParseError> {
    let mut left = parse_sys_atom(p)?;
    while p.peek_sym("||") {
        p.pos += 1;
        p.expect("{")?;
        let mut sync = Vec::new();
        while !p.peek_sym("}") {
            sync.push(p.ident()?);
            if !p.peek_sym("}") {
                p.expect(",")?;
            }
        }
        p.pos += 1;
        let right = parse_sys_atom(p)?;
        left = SysAst::Par(Box::new(left), sync, Box::new(right));
    }
    Ok(left)
}

fn parse_sys_atom(p: &mut Parser) -> Result<SysAst, ParseError> {
    if p.peek_sym("(") {
        p.pos += 1;
        let e = parse_sys(p)?;
        p.expect(")")?;
        Ok(e)
    } else {
        Ok(SysAst::Name(p.ident()?))
    }
}

fn build_system(file: &ModelFile, name: &str, e: &SysAst) -> Result<System, String> {
    match e {
        SysAst::Name(n) => {
            if let Some(m) = file.ma(n) {
                Ok(System::sequential(m.clone()))
            } else if let Some(s) = file.system(n) {
                Ok(s.clone())
            } else {
                Err(format!("unresolved name `{n}`"))
            }
        }
        SysAst::Par(l, sync, r) => {
            let l = build_system(file, name, l)?;
            let r = build_system(file, name, r)?;
            let sync: BTreeSet<String> = sync.iter().cloned().collect();
            System::par(name, l, sync, r).map_err(|e| match e {
                ModelError::TauInSyncSet => "τ not permitted in synchronization set".to_string(),
            })
        }
    }
}

fn parse_state_ref(p: &mut Parser) -> Result<StateRef, ParseError> {
    let locals = |p: &mut Parser| -> Result<Vec<String>, ParseError> {
        if p.peek_sym("(") {
            p.pos += 1;
            let mut v = vec![p.ident()?];
            while p.peek_sym(",") {
                p.pos += 1;
                v.push(p.ident()?);
            }
            p.expect(")")?;
            Ok(v)
        } else {
            Ok(vec![p.ident()?])
        }
    };
    if p.peek_sym("(") {
        return Ok(StateRef {
            unit: None,
            locals: locals(p)?,
        });
    }
    let first = p.ident()?;
    if p.peek_sym("@") {
        p.pos += 1;
        Ok(StateRef {
            unit: Some(first),
            locals: locals(p)?,
        })
    } else {
        Ok(StateRef {
            unit: None,
            locals: vec![first],
        })
    }
}

fn parse_distr(p: &mut Parser) -> Result<DistrLiteral, ParseError> {
    p.expect("{")?;
    let mut out = Vec::new();
    while !p.peek_sym("}") {
        let s = parse_state_ref(p)?;
        p.expect(":")?;
        out.push((s, p.rational()?));
        if !p.peek_sym("}") {
            p.expect(",")?;
        }
    }
    p.expect("}")?;
    Ok(out)
}

/// Parses a standalone state reference such as `s0`, `S@(s,u)`.
pub fn parse_state_ref_str(src: &str) -> Result<StateRef, ParseError> {
    let toks = lex(src)?;
    let mut p = Parser { toks, pos: 0, end: (1, src.chars().count() + 1) };
    let r = parse_state_ref(&mut p)?;
    if p.peek().is_some() {
        return p.err(format!("unexpected {}", p.describe()));
    }
    Ok(r)
}

/// Relation file with one pair per line: `{s:1} {t:1/2, u:1/2}`, an
/// optional comma between the two sides.
pub fn parse_relation_lines(src: &str) -> Result<Vec<(DistrLiteral, DistrLiteral)>, ParseError> {
    let mut out = Vec::new();
    for (i, line) in src.lines().enumerate() {
        let toks: Vec<_> = lex(line)
            .map_err(|e| ParseError { line: i + 1, ..e })?
            .into_iter()
            .map(|(t, _, c)| (t, i + 1, c))
            .collect();
        if toks.is_empty() {
            continue;
        }
        let mut p = Parser { toks, pos: 0, end: (i + 1, line.chars().count() + 1) };
        let paren = p.peek_sym("(");
        if paren {
            p.pos += 1;
        }
        let a = parse_distr(&mut p)?;
        if p.peek_sym(",") {
            p.pos += 1;
        }
        let b = parse_distr(&mut p)?;
        if paren {
            p.expect(")")?;
        }
        if p.peek_sym(",") {
            p.pos += 1;
        }
        if p.peek().is_some() {
            return p.err(format!("unexpected {}", p.describe()));
        }
        out.push((a, b));
    }
    Ok(out)
}

/// Finds the global state a reference denotes. Unqualified names must be
/// unique across units.
pub fn resolve_state(model: &ChiMa, r: &StateRef) -> Result<usize, String> {
    let text = if r.locals.len() == 1 {
        r.locals[0].clone()
    } else {
        format!("({})", r.locals.join(","))
    };
    let hits: Vec<usize> = (0..model.num_states())
        .filter(|&s| {
            model.state_name(s) == text
                && r.unit.as_ref().is_none_or(|u| model.units[model.unit_of(s)].name == *u)
        })
        .collect();
    match hits.as_slice() {
        [s] => Ok(*s),
        [] => Err(format!("unresolved state `{r}`")),
        _ => Err(format!("ambiguous state `{r}`; qualify it as Unit@{text}")),
    }
}

pub fn resolve_distr(model: &ChiMa, d: &DistrLiteral) -> Result<Subdistr<usize>, String> {
    let mut pairs = Vec::new();
    for (r, p) in d {
        pairs.push((resolve_state(model, r)?, p.clone()));
    }
    Subdistr::from_pairs(pairs).map_err(|e| e.to_string())
}

pub fn resolve_relation(
    model: &ChiMa,
    pairs: &[(DistrLiteral, DistrLiteral)],
) -> Result<CandidateRelation, String> {
    let mut out = Vec::new();
    for (a, b) in pairs {
        out.push((resolve_distr(model, a)?, resolve_distr(model, b)?));
    }
    Ok(CandidateRelation::new(out))
}

fn print_label(a: &Action) -> String {
    a.to_string()
}

/// Prints a model file in the canonical layout accepted by [`parse`].
pub fn print(file: &ModelFile) -> String {
    let mut out = String::new();
    for m in &file.mas {
        let _ = writeln!(out, "ma {} {{", m.name);
        for (i, s) in m.states.iter().enumerate() {
            let init = if i == m.initial { " init" } else { "" };
            let _ = writeln!(out, "  state {s}{init};");
        }
        for t in &m.action_trans {
            let target = if t.target.len() == 1 && t.target.is_full() {
                m.states[*t.target.support().next().unwrap()].clone()
            } else {
                let parts: Vec<String> = t
                    .target
                    .iter()
                    .map(|(&x, p)| format!("{}: {}", m.states[x], fmt_rational(p)))
                    .collect();
                format!("{{ {} }}", parts.join(", "))
            };
            let _ = writeln!(out, "  trans {} -{}-> {};", m.states[t.source], print_label(&t.action), target);
        }
        for t in &m.timed_trans {
            let _ = writeln!(
                out,
                "  timed {} -{}-> {};",
                m.states[t.source],
                fmt_rational(&t.rate),
                m.states[t.target]
            );
        }
        out.push_str("}\n\n");
    }
    for t in &file.tltss {
        let _ = writeln!(out, "tlts {} {{", t.name);
        for (i, s) in t.states.iter().enumerate() {
            let init = if i == t.initial { " init" } else { "" };
            let _ = writeln!(out, "  state {s}{init};");
        }
        for (s, a, x) in &t.action_trans {
            let _ = writeln!(out, "  trans {} -{}-> {};", t.states[*s], print_label(a), t.states[*x]);
        }
        for (s, d, x) in &t.timed_trans {
            let _ = writeln!(out, "  timed {} -{}-> {};", t.states[*s], fmt_rational(d), t.states[*x]);
        }
        out.push_str("}\n\n");
    }
    for s in &file.systems {
        let _ = writeln!(out, "system {} = {};", s.name, print_sys(&s.expr, true));
    }
    if !file.systems.is_empty() {
        out.push('\n');
    }
    for r in &file.relations {
        let _ = writeln!(out, "relation {} = {{", r.name);
        for (i, (a, b)) in r.pairs.iter().enumerate() {
            let sep = if i + 1 < r.pairs.len() { "," } else { "" };
            let _ = writeln!(out, "  ({}, {}){sep}", print_distr(a), print_distr(b));
        }
        out.push_str("};\n\n");
    }
    out
}

fn print_sys(e: &SysAst, top: bool) -> String {
    match e {
        SysAst::Name(n) => n.clone(),
        SysAst::Par(l, sync, r) => {
            let inner = format!(
                "{} ||{{{}}} {}",
                print_sys(l, false),
                sync.join(","),
                print_sys(r, false)
            );
            if top {
                inner
            } else {
                format!("({inner})")
            }
        }
    }
}

pub fn print_distr(d: &DistrLiteral) -> String {
    let parts: Vec<String> = d.iter().map(|(s, p)| format!("{s}: {}", fmt_rational(p))).collect();
    format!("{{{}}}", parts.join(", "))
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "
        # two small machines
        ma A { state s init; state t; trans s -a-> { t: 1/2, s: 1/2 }; timed t -3/2-> s; }
        ma B { state u init; trans u -a-> u; }
        system S = A ||{a} B;
        relation R = { ({s:1}, {S@(s,u):1}), ({A@t: 1}, {S@(t,u): 1}) };
        tlts T { state p init; trans p -tau-> q; timed q -5-> p; }
    ";

    #[test]
    fn parses_all_blocks() {
        let f = parse(SAMPLE).unwrap();
        assert_eq!(f.mas.len(), 2);
        assert_eq!(f.tltss.len(), 1);
        assert_eq!(f.systems[0].system.num_components(), 2);
        assert_eq!(f.relations[0].pairs.len(), 2);
    }

    #[test]
    fn round_trip() {
        let f = parse(SAMPLE).unwrap();
        let printed = print(&f);
        assert_eq!(parse(&printed).unwrap(), f);
        assert_eq!(print(&parse(&printed).unwrap()), printed);
    }

    #[test]
    fn tau_in_sync_set_is_rejected() {
        let e = parse("ma A { state s; } ma B { state t; } system S = A ||{tau} B;").unwrap_err();
        assert!(e.message.contains("τ not permitted in synchronization set"), "{e}");
    }

    #[test]
    fn empty_file_is_rejected() {
        assert!(parse("").is_err());
        assert!(parse("  # nothing\n").is_err());
    }

    #[test]
    fn errors_carry_positions() {
        let e = parse("ma A {\n  state s;\n  trans s -a-> ;\n}").unwrap_err();
        assert_eq!((e.line, e.col), (3, 16));
        let e = parse("system S = X ||{} Y;").unwrap_err();
        assert!(e.message.contains("unresolved name `X`"));
    }

    #[test]
    fn validation_failure_names_the_condition() {
        let e = parse("ma A { state s; trans s -tau-> s; timed s -1-> s; }").unwrap_err();
        assert!(e.message.contains("maximal progress"), "{e}");
    }

    #[test]
    fn relation_lines() {
        let r = parse_relation_lines("{s:1} {t:1/2, u:1/2}\n\n{S@(a,b):1}, {v:1}\n").unwrap();
        assert_eq!(r.len(), 2);
        assert_eq!(r[1].0[0].0.unit.as_deref(), Some("S"));
        let q = parse_relation_lines("({s:1}, {t:1}),\n").unwrap();
        assert_eq!(q.len(), 1);
        assert!(parse_relation_lines("({s:1}, {t:1}\n").is_err());
    }
}
