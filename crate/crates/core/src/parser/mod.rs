//! Statechart DSL, guard expressions, DOT export and the suite JSON format.
//!
//! The DSL is line oriented; `#` starts a comment.
//!
//! ```text
//! statechart <Name>
//! events <e1> <e2> ...
//! vars <v1> <v2> ...
//! state <Id> [initial] [final] [in <ParentId>] [entry]
//! transition <Id>: <Src> -> <Dst> on <event> [ [<guard>] ] [ / <action> ]
//! ```

mod dot;
mod guard;
mod json;

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

pub use dot::export_dot;
pub use guard::parse_guard;
pub use json::{parse_suite, suite_to_json};

use crate::id::Id;
use crate::model::{ModelError, State, Statechart, Transition, Violation};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SourceSpan {
    pub line: usize,
    pub column: usize,
    pub length: usize,
}

impl SourceSpan {
    pub fn new(line: usize, column: usize, length: usize) -> Self {
        SourceSpan {
            line: line.max(1),
            column: column.max(1),
            length,
        }
    }
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SemanticError {
    #[error("unknown state `{0}`")]
    UnknownState(Id),
    #[error("undeclared event `{0}`")]
    UnknownEvent(Id),
    #[error("undeclared variable `{0}`")]
    UnknownVariable(Id),
    #[error("duplicate id `{0}`")]
    DuplicateId(Id),
    #[error("duplicate initial state `{0}`")]
    DuplicateInitial(Id),
    #[error("{0}")]
    Model(ModelError),
    #[error("model is not well-formed: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Violation>),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("{span}: syntax error: {message}")]
    Syntax { span: SourceSpan, message: String },
    #[error("{}semantic error: {error}", .span.map(|s| format!("{s}: ")).unwrap_or_default())]
    Semantic {
        span: Option<SourceSpan>,
        error: SemanticError,
    },
}

impl ParseError {
    fn syntax(line: usize, col: usize, len: usize, msg: impl Into<String>) -> Self {
        ParseError::Syntax {
            span: SourceSpan::new(line, col, len),
            message: msg.into(),
        }
    }

    fn semantic(span: SourceSpan, error: SemanticError) -> Self {
        ParseError::Semantic {
            span: Some(span),
            error,
        }
    }

    pub fn is_syntax(&self) -> bool {
        matches!(self, ParseError::Syntax { .. })
    }
}

/// Parses and validates a statechart. Any well-formedness violation is
/// returned as [`SemanticError::Invalid`].
pub fn parse_statechart(text: &str) -> Result<Statechart, ParseError> {
    let sc = parse_statechart_unchecked(text)?;
    let violations = sc.validate();
    if !violations.is_empty() {
        return Err(ParseError::Semantic {
            span: None,
            error: SemanticError::Invalid(violations),
        });
    }
    Ok(sc)
}

/// Byte-level entry point; invalid UTF-8 is a syntax error.
pub fn parse_statechart_bytes(bytes: &[u8]) -> Result<Statechart, ParseError> {
    match std::str::from_utf8(bytes) {
        Ok(text) => parse_statechart(text),
        Err(e) => {
            let prefix = &bytes[..e.valid_up_to()];
            let line = 1 + prefix.iter().filter(|&&b| b == b'\n').count();
            let col = 1 + prefix.iter().rev().take_while(|&&b| b != b'\n').count();
            Err(ParseError::syntax(line, col, 1, "invalid UTF-8"))
        }
    }
}

/// Parses and resolves references without running reachability checks.
pub fn parse_statechart_unchecked(text: &str) -> Result<Statechart, ParseError> {
    let mut decls = Decls::default();
    let mut header: Option<Id> = None;

    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let content = raw.split('#').next().unwrap_or("");
        let mut cur = Cursor::new(content, lineno);
        cur.skip_ws();
        if cur.at_end() {
            continue;
        }
        let (kw, kw_col) = cur.word("a directive")?;
        if header.is_none() && kw != "statechart" {
            return Err(ParseError::syntax(
                lineno,
                kw_col,
                kw.len(),
                "expected `statechart <Name>` header",
            ));
        }
        match kw.as_str() {
            "statechart" => {
                if header.is_some() {
                    return Err(ParseError::syntax(
                        lineno,
                        kw_col,
                        kw.len(),
                        "duplicate `statechart` header",
                    ));
                }
                let (name, _) = cur.ident("a statechart name")?;
                cur.finish()?;
                header = Some(name);
            }
            "events" | "vars" => {
                let target = if kw == "events" {
                    &mut decls.events
                } else {
                    &mut decls.vars
                };
                cur.skip_ws();
                if cur.at_end() {
                    return Err(cur.error_here(&format!("`{kw}` needs at least one name")));
                }
                while !cur.at_end() {
                    let (name, col) = cur.ident("a name")?;
                    let span = SourceSpan::new(lineno, col, name.as_str().len());
                    if target.iter().any(|(n, _)| *n == name) {
                        return Err(ParseError::semantic(span, SemanticError::DuplicateId(name)));
                    }
                    target.push((name, span));
                    cur.skip_ws();
                }
            }
            "state" => decls.state(&mut cur, lineno)?,
            "transition" => decls.transition(&mut cur, lineno)?,
            other => {
                return Err(ParseError::syntax(
                    lineno,
                    kw_col,
                    other.chars().count(),
                    format!("unknown directive `{other}`"),
                ))
            }
        }
    }

    // only blank and comment lines were seen
    let Some(name) = header else {
        return Err(ParseError::syntax(
            1,
            1,
            0,
            "expected `statechart <Name>` header",
        ));
    };
    decls.resolve(name)
}

#[derive(Default)]
struct Decls {
    events: Vec<(Id, SourceSpan)>,
    vars: Vec<(Id, SourceSpan)>,
    states: Vec<(State, SourceSpan, Option<SourceSpan>)>,
    transitions: Vec<TransitionDecl>,
}

struct TransitionDecl {
    t: Transition,
    id_span: SourceSpan,
    source_span: SourceSpan,
    target_span: SourceSpan,
    event_span: SourceSpan,
    guard_span: Option<SourceSpan>,
}

impl Decls {
    fn state(&mut self, cur: &mut Cursor, line: usize) -> Result<(), ParseError> {
        let (id, col) = cur.ident("a state id")?;
        let span = SourceSpan::new(line, col, id.as_str().len());
        let mut st = State::new(id);
        let mut parent_span = None;
        loop {
            cur.skip_ws();
            if cur.at_end() {
                break;
            }
            let (flag, fcol) = cur.word("a state flag")?;
            let dup =
                || ParseError::syntax(line, fcol, flag.len(), format!("repeated flag `{flag}`"));
            match flag.as_str() {
                "initial" if !st.initial => st.initial = true,
                "final" if !st.is_final => st.is_final = true,
                "entry" if !st.entry => st.entry = true,
                "in" if st.parent.is_none() => {
                    let (p, pcol) = cur.ident("a parent state id")?;
                    parent_span = Some(SourceSpan::new(line, pcol, p.as_str().len()));
                    st.parent = Some(p);
                }
                "initial" | "final" | "entry" | "in" => return Err(dup()),
                other => {
                    return Err(ParseError::syntax(
                        line,
                        fcol,
                        other.chars().count(),
                        format!("unknown state flag `{other}`"),
                    ))
                }
            }
        }
        self.states.push((st, span, parent_span));
        Ok(())
    }

    fn transition(&mut self, cur: &mut Cursor, line: usize) -> Result<(), ParseError> {
        let (id, col) = cur.ident("a transition id")?;
        let id_span = SourceSpan::new(line, col, id.as_str().len());
        cur.expect(":")?;
        let (source, scol) = cur.ident("a source state")?;
        cur.expect("->")?;
        let (target, tcol) = cur.ident("a target state")?;
        let (kw, kcol) = cur.word("`on`")?;
        if kw != "on" {
            return Err(ParseError::syntax(
                line,
                kcol,
                kw.chars().count(),
                "expected `on`",
            ));
        }
        let (event, ecol) = cur.ident("an event")?;
        let mut t = Transition::new(id, source.clone(), target.clone(), event.clone());
        let mut guard_span = None;

        cur.skip_ws();
        if cur.peek() == Some('[') {
            let open = cur.col();
            cur.bump();
            let body_col = cur.col();
            let body = cur.take_until(']');
            if cur.peek() != Some(']') {
                return Err(ParseError::syntax(line, open, 1, "unclosed `[` in guard"));
            }
            cur.bump();
            t.guard = Some(guard::parse_guard_at(&body, line, body_col)?);
            guard_span = Some(SourceSpan::new(line, body_col, body.chars().count()));
            cur.skip_ws();
        }
        if cur.peek() == Some('/') {
            cur.bump();
            cur.skip_ws();
            let acol = cur.col();
            let action = cur.take_while(is_label_char);
            if action.is_empty() {
                return Err(cur.error_here("expected an action label after `/`"));
            }
            if !is_label(&action) {
                return Err(ParseError::syntax(
                    line,
                    acol,
                    action.chars().count(),
                    "invalid action label",
                ));
            }
            t.action = Some(action);
        }
        cur.finish()?;
        self.transitions.push(TransitionDecl {
            t,
            id_span,
            source_span: SourceSpan::new(line, scol, source.as_str().len()),
            target_span: SourceSpan::new(line, tcol, target.as_str().len()),
            event_span: SourceSpan::new(line, ecol, event.as_str().len()),
            guard_span,
        });
        Ok(())
    }

    fn resolve(self, name: Id) -> Result<Statechart, ParseError> {
        let mut state_spans: BTreeMap<Id, SourceSpan> = BTreeMap::new();
        let mut initial: Option<Id> = None;
        for (s, span, _) in &self.states {
            if state_spans.insert(s.id.clone(), *span).is_some() {
                return Err(ParseError::semantic(
                    *span,
                    SemanticError::DuplicateId(s.id.clone()),
                ));
            }
            if s.initial {
                if initial.is_some() {
                    return Err(ParseError::semantic(
                        *span,
                        SemanticError::DuplicateInitial(s.id.clone()),
                    ));
                }
                initial = Some(s.id.clone());
            }
        }
        for (s, _, pspan) in &self.states {
            if let (Some(p), Some(pspan)) = (&s.parent, pspan) {
                if !state_spans.contains_key(p) {
                    return Err(ParseError::semantic(
                        *pspan,
                        SemanticError::UnknownState(p.clone()),
                    ));
                }
            }
        }
        let mut seen_tr: BTreeMap<&Id, ()> = BTreeMap::new();
        for d in &self.transitions {
            if seen_tr.insert(&d.t.id, ()).is_some() {
                return Err(ParseError::semantic(
                    d.id_span,
                    SemanticError::DuplicateId(d.t.id.clone()),
                ));
            }
            for (st, span) in [(&d.t.source, d.source_span), (&d.t.target, d.target_span)] {
                if !state_spans.contains_key(st) {
                    return Err(ParseError::semantic(
                        span,
                        SemanticError::UnknownState(st.clone()),
                    ));
                }
            }
            if !self.events.iter().any(|(e, _)| *e == d.t.event) {
                return Err(ParseError::semantic(
                    d.event_span,
                    SemanticError::UnknownEvent(d.t.event.clone()),
                ));
            }
            if let Some(g) = &d.t.guard {
                for v in g.variables() {
                    if !self.vars.iter().any(|(x, _)| *x == v) {
                        let span = d.guard_span.unwrap_or(d.id_span);
                        return Err(ParseError::semantic(
                            span,
                            SemanticError::UnknownVariable(v),
                        ));
                    }
                }
            }
        }

        let mut b = Statechart::builder(name).events(self.events.into_iter().map(|(e, _)| e));
        for (v, _) in self.vars {
            b = b.var(v);
        }
        for (s, _, _) in self.states {
            b = b.state(s);
        }
        for d in self.transitions {
            b = b.transition(d.t);
        }
        b.build().map_err(|e| ParseError::Semantic {
            span: None,
            error: SemanticError::Model(e),
        })
    }
}

/// Renders the canonical DSL text: declarations sorted by id, one space
/// between tokens, guards in canonical form.
pub fn serialize_statechart(sc: &Statechart) -> String {
    let mut out = format!("statechart {}\n", sc.name());
    if !sc.events().is_empty() {
        let names: Vec<&str> = sc.events().iter().map(Id::as_str).collect();
        out.push_str(&format!("events {}\n", names.join(" ")));
    }
    if !sc.vars().is_empty() {
        let names: Vec<&str> = sc.vars().iter().map(Id::as_str).collect();
        out.push_str(&format!("vars {}\n", names.join(" ")));
    }
    for s in sc.states() {
        out.push_str(&format!("state {}", s.id));
        if s.initial {
            out.push_str(" initial");
        }
        if s.is_final {
            out.push_str(" final");
        }
        if let Some(p) = &s.parent {
            out.push_str(&format!(" in {p}"));
        }
        if s.entry {
            out.push_str(" entry");
        }
        out.push('\n');
    }
    for t in sc.transitions() {
        out.push_str(&format!(
            "transition {}: {} -> {} on {}",
            t.id, t.source, t.target, t.event
        ));
        if let Some(g) = &t.guard {
            out.push_str(&format!(" [{g}]"));
        }
        if let Some(a) = &t.action {
            out.push_str(&format!(" / {a}"));
        }
        out.push('\n');
    }
    out
}

fn is_label_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || matches!(c, '_' | '.' | '-' | '(' | ')' | ',' | '=')
}

/// Action labels are a single run of `[A-Za-z0-9_.()=,-]`.
pub fn is_label(s: &str) -> bool {
    !s.is_empty() && s.chars().all(is_label_char)
}

/// Words that cannot be used as guard variable names.
pub(crate) const GUARD_KEYWORDS: [&str; 5] = ["and", "or", "not", "true", "false"];

/// Character cursor over one line; columns are 1-based character offsets.
struct Cursor {
    chars: Vec<char>,
    pos: usize,
    line: usize,
}

impl Cursor {
    fn new(s: &str, line: usize) -> Self {
        Cursor {
            chars: s.chars().collect(),
            pos: 0,
            line,
        }
    }

    fn col(&self) -> usize {
        self.pos + 1
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn bump(&mut self) {
        self.pos += 1;
    }

    fn at_end(&self) -> bool {
        self.pos >= self.chars.len()
    }

    fn skip_ws(&mut self) {
        while self.peek().is_some_and(char::is_whitespace) {
            self.pos += 1;
        }
    }

    fn error_here(&self, msg: &str) -> ParseError {
        ParseError::syntax(self.line, self.col(), usize::from(!self.at_end()), msg)
    }

    fn take_while(&mut self, f: impl Fn(char) -> bool) -> String {
        let start = self.pos;
        while self.peek().is_some_and(&f) {
            self.pos += 1;
        }
        self.chars[start..self.pos].iter().collect()
    }

    fn take_until(&mut self, stop: char) -> String {
        self.take_while(|c| c != stop)
    }

    /// Next whitespace-delimited run of identifier characters.
    fn word(&mut self, what: &str) -> Result<(String, usize), ParseError> {
        self.skip_ws();
        let col = self.col();
        let w = self.take_while(|c| c.is_ascii_alphanumeric() || c == '_');
        if w.is_empty() {
            return Err(self.error_here(&format!("expected {what}")));
        }
        Ok((w, col))
    }

    fn ident(&mut self, what: &str) -> Result<(Id, usize), ParseError> {
        let (w, col) = self.word(what)?;
        if !Id::is_valid(&w) {
            return Err(ParseError::syntax(
                self.line,
                col,
                w.len(),
                format!("expected {what}, found `{w}`"),
            ));
        }
        Ok((Id::from(w), col))
    }

    fn expect(&mut self, lit: &str) -> Result<(), ParseError> {
        self.skip_ws();
        let n = lit.chars().count();
        let here: String = self.chars.iter().skip(self.pos).take(n).collect();
        if here != lit {
            return Err(self.error_here(&format!("expected `{lit}`")));
        }
        self.pos += n;
        Ok(())
    }

    fn finish(&mut self) -> Result<(), ParseError> {
        self.skip_ws();
        if self.at_end() {
            Ok(())
        } else {
            Err(self.error_here("unexpected trailing input"))
        }
    }
}
