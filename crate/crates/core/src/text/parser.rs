use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::lexer::{lex, Tok, Token};
use super::{
    is_error, IncludeResolver, NoIncludes, ParseCode, ParseDiagnostic, SourceMap, SourceSpan,
};
use crate::compose::Configuration;
use crate::diag::Severity;
use crate::fragment::{
    Block, BlockRole, ChannelKind, Containment, ControlEdge, Direction, InteractionFragment,
    Lifeline, LifelineRole, MediumKind, Message, NodeKind, Port, ProcessFragment, ProcessNode,
    ProtocolKind, StructureFragment, ViewFragment, ViewKind,
};
use crate::ident::Ident;
use crate::ovm::{
    Cardinality, ConstraintDependency, ConstraintKind, OvmModel, Presence, Variant, VariationPoint,
};

const MODEL_ITEMS: &[&str] = &["vp", "constraint", "fragment", "include"];
const VP_ITEMS: &[&str] = &["variant"];
const PROCESS_ITEMS: &[&str] = &["lane", "initial", "final", "action", "decision", "edge"];
const INTERACTION_ITEMS: &[&str] = &["lifeline", "message"];
const STRUCTURE_ITEMS: &[&str] = &["block", "part", "port"];
const CONFIG_ITEMS: &[&str] = &["select"];

/// A successfully parsed model (no error diagnostics).
#[derive(Debug, Clone)]
pub struct ParsedModel {
    pub model: OvmModel,
    pub source_map: SourceMap,
    pub warnings: Vec<ParseDiagnostic>,
}

#[derive(Debug, Clone)]
pub struct ParsedConfiguration {
    pub name: String,
    pub config: Configuration,
    pub warnings: Vec<ParseDiagnostic>,
}

#[derive(Debug, Clone)]
enum Value {
    Word(String),
    Number(String),
    Str(String),
    Range(u32, u32),
    List(Vec<String>),
}

#[derive(Debug, Clone)]
struct Attr {
    key: String,
    value: Value,
    span: SourceSpan,
}

enum RefKind {
    Fragment,
    Vp,
    ConstraintFrom,
    ConstraintTo,
}

struct PendingRef {
    kind: RefKind,
    owner: Ident,
    target: Ident,
    span: SourceSpan,
}

struct Parser<'r> {
    file: String,
    toks: Vec<Token>,
    pos: usize,
    resolver: &'r dyn IncludeResolver,
    include_stack: Vec<String>,
    diags: Vec<ParseDiagnostic>,
    model: OvmModel,
    map: SourceMap,
    refs: Vec<PendingRef>,
}

impl<'r> Parser<'r> {
    fn new(file: &str, text: &str, resolver: &'r dyn IncludeResolver) -> Self {
        let (toks, diags) = lex(file, text);
        Parser {
            file: String::from(file),
            toks,
            pos: 0,
            resolver,
            include_stack: alloc::vec![String::from(file)],
            diags,
            model: OvmModel::default(),
            map: SourceMap::default(),
            refs: Vec::new(),
        }
    }

    // ---------------------------------------------------------- tokens

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        let i = (self.pos + k).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    fn span(&self) -> SourceSpan {
        self.toks[self.pos].span(&self.file)
    }

    fn prev_span(&self) -> SourceSpan {
        self.toks[self.pos.saturating_sub(1)].span(&self.file)
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn at_word(&self, w: &str) -> bool {
        matches!(self.peek(), Tok::Word(x) if x == w)
    }

    fn at_attr(&self) -> bool {
        matches!(self.peek(), Tok::Word(_)) && *self.peek_at(1) == Tok::Eq
    }

    fn error(&mut self, code: ParseCode, message: String, span: SourceSpan) {
        self.diags.push(ParseDiagnostic {
            severity: Severity::Error,
            code,
            message,
            span,
        });
    }

    fn warning(&mut self, code: ParseCode, message: String, span: SourceSpan) {
        self.diags.push(ParseDiagnostic {
            severity: Severity::Warning,
            code,
            message,
            span,
        });
    }

    fn unexpected(&mut self, expected: &str) {
        let found = self.peek().describe();
        let span = self.span();
        self.error(
            ParseCode::UnexpectedToken,
            format!("expected {expected}, found {found}"),
            span,
        );
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == tok {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: Tok) -> bool {
        if self.eat(&tok) {
            true
        } else {
            self.unexpected(&tok.describe());
            false
        }
    }

    fn expect_ident(&mut self, what: &str) -> Option<(Ident, SourceSpan)> {
        match self.peek().clone() {
            Tok::Word(w) | Tok::Number(w) if !w.contains('.') => {
                let span = self.span();
                self.bump();
                Some((Ident::new(w), span))
            }
            _ => {
                self.unexpected(what);
                None
            }
        }
    }

    fn expect_str(&mut self, what: &str) -> Option<String> {
        match self.peek().clone() {
            Tok::Str(s) => {
                self.bump();
                Some(s)
            }
            _ => {
                self.unexpected(what);
                None
            }
        }
    }

    fn opt_str(&mut self) -> Option<String> {
        match self.peek().clone() {
            Tok::Str(s) => {
                self.bump();
                Some(s)
            }
            _ => None,
        }
    }

    /// Skips to the next token in `sync` (or a closing brace / end of input)
    /// at the current nesting depth.
    fn skip_to(&mut self, sync: &[&str]) {
        let mut depth = 0usize;
        loop {
            match self.peek() {
                Tok::Eof => return,
                Tok::RBrace if depth == 0 => return,
                Tok::Word(w) if depth == 0 && sync.contains(&w.as_str()) => return,
                Tok::LBrace => depth += 1,
                Tok::RBrace => depth -= 1,
                _ => {}
            }
            self.bump();
        }
    }

    /// Parses `{ item* }`, recovering at the item keywords after errors.
    fn block_body(&mut self, items: &[&str], mut item: impl FnMut(&mut Self, &str) -> bool) {
        if !self.expect(Tok::LBrace) {
            self.skip_to(items);
            if !self.eat(&Tok::LBrace) {
                return;
            }
        }
        let open = self.prev_span();
        loop {
            match self.peek().clone() {
                Tok::RBrace => {
                    self.bump();
                    return;
                }
                Tok::Eof => {
                    self.error(
                        ParseCode::UnexpectedToken,
                        String::from("unclosed `{`"),
                        open,
                    );
                    return;
                }
                Tok::Semi => {
                    self.bump();
                }
                Tok::Word(w) if items.contains(&w.as_str()) => {
                    if !item(self, &w) {
                        self.skip_to(items);
                    }
                }
                _ => {
                    let expected = format!("one of {}", items.join(", "));
                    self.unexpected(&expected);
                    self.bump();
                    self.skip_to(items);
                }
            }
        }
    }

    // ----------------------------------------------------------- attrs

    fn attrs(&mut self) -> Option<Vec<Attr>> {
        let mut out: Vec<Attr> = Vec::new();
        while self.at_attr() {
            let start = self.span();
            let Tok::Word(key) = self.bump().tok else {
                unreachable!()
            };
            self.bump();
            let value = match self.peek().clone() {
                Tok::Word(w) => {
                    self.bump();
                    Value::Word(w)
                }
                Tok::Number(n) => {
                    self.bump();
                    Value::Number(n)
                }
                Tok::Str(s) => {
                    self.bump();
                    Value::Str(s)
                }
                Tok::LBracket => {
                    self.bump();
                    if let (Tok::Number(a), Tok::DotDot, Tok::Number(b), Tok::RBracket) = (
                        self.peek().clone(),
                        self.peek_at(1).clone(),
                        self.peek_at(2).clone(),
                        self.peek_at(3).clone(),
                    ) {
                        for _ in 0..4 {
                            self.bump();
                        }
                        match (a.parse::<u32>(), b.parse::<u32>()) {
                            (Ok(a), Ok(b)) => Value::Range(a, b),
                            _ => {
                                let span = self.prev_span();
                                self.error(
                                    ParseCode::InvalidAttribute,
                                    format!("`{key}` range bounds must be non-negative integers"),
                                    span,
                                );
                                return None;
                            }
                        }
                    } else {
                        let mut items = Vec::new();
                        loop {
                            match self.peek().clone() {
                                Tok::Word(w) | Tok::Number(w) => {
                                    self.bump();
                                    items.push(w);
                                }
                                Tok::RBracket => {
                                    self.bump();
                                    break;
                                }
                                _ => {
                                    self.unexpected("list item or `]`");
                                    return None;
                                }
                            }
                            if !self.eat(&Tok::Comma) {
                                if !self.expect(Tok::RBracket) {
                                    return None;
                                }
                                break;
                            }
                        }
                        Value::List(items)
                    }
                }
                _ => {
                    self.unexpected(&format!("value for `{key}`"));
                    return None;
                }
            };
            let end = self.prev_span();
            let span = SourceSpan {
                line_end: end.line_end,
                col_end: end.col_end,
                ..start
            };
            if out.iter().any(|a| a.key == key) {
                self.error(
                    ParseCode::InvalidAttribute,
                    format!("attribute `{key}` given more than once"),
                    span.clone(),
                );
            }
            out.push(Attr { key, value, span });
        }
        Some(out)
    }

    fn reject_unknown(&mut self, attrs: &[Attr], allowed: &[&str], context: &str) {
        for a in attrs {
            if !allowed.contains(&a.key.as_str()) {
                self.error(
                    ParseCode::InvalidAttribute,
                    format!("`{}` is not an attribute of {context}", a.key),
                    a.span.clone(),
                );
            }
        }
    }

    fn word_attr<T>(
        &mut self,
        attrs: &[Attr],
        key: &str,
        parse: impl Fn(&str) -> Option<T>,
        expected: &str,
    ) -> Option<T> {
        let a = attrs.iter().find(|a| a.key == key)?;
        let text = match &a.value {
            Value::Word(w) | Value::Number(w) => Some(w.as_str()),
            _ => None,
        };
        match text.and_then(&parse) {
            Some(v) => Some(v),
            None => {
                self.error(
                    ParseCode::InvalidAttribute,
                    format!("`{key}` must be {expected}"),
                    a.span.clone(),
                );
                None
            }
        }
    }

    fn ident_attr(&mut self, attrs: &[Attr], key: &str) -> Option<(Ident, SourceSpan)> {
        let span = attrs.iter().find(|a| a.key == key)?.span.clone();
        self.word_attr(attrs, key, Ident::parse, "an identifier")
            .map(|id| (id, span))
    }

    fn str_attr(&mut self, attrs: &[Attr], key: &str) -> Option<String> {
        let a = attrs.iter().find(|a| a.key == key)?;
        match &a.value {
            Value::Str(s) => Some(s.clone()),
            _ => {
                let span = a.span.clone();
                self.error(
                    ParseCode::InvalidAttribute,
                    format!("`{key}` must be a string literal"),
                    span,
                );
                None
            }
        }
    }

    fn missing(&mut self, key: &str, context: &str, span: SourceSpan) {
        self.error(
            ParseCode::InvalidAttribute,
            format!("{context} requires `{key}=`"),
            span,
        );
    }

    // ------------------------------------------------------- documents

    fn document(&mut self) {
        if *self.peek() == Tok::Eof {
            return;
        }
        if !self.at_word("model") {
            self.unexpected("`model`");
            return;
        }
        self.bump();
        if let Some((name, _)) = self.expect_ident("model name") {
            self.model.name = String::from(name.as_str());
        }
        self.block_body(MODEL_ITEMS, |p, kw| p.model_item(kw));
        if *self.peek() != Tok::Eof {
            self.unexpected("end of input");
        }
    }

    /// Body of an included file: model items without the `model` wrapper.
    fn included_document(&mut self) {
        loop {
            match self.peek().clone() {
                Tok::Eof => return,
                Tok::Semi => {
                    self.bump();
                }
                Tok::Word(w) if MODEL_ITEMS.contains(&w.as_str()) => {
                    if !self.model_item(&w) {
                        self.skip_to(MODEL_ITEMS);
                    }
                }
                _ => {
                    self.unexpected("one of vp, constraint, fragment, include");
                    self.bump();
                    self.skip_to(MODEL_ITEMS);
                    if *self.peek() == Tok::RBrace {
                        self.bump();
                    }
                }
            }
        }
    }

    fn model_item(&mut self, kw: &str) -> bool {
        match kw {
            "vp" => self.vp(),
            "constraint" => self.constraint(),
            "fragment" => self.fragment(),
            "include" => self.include(),
            _ => unreachable!(),
        }
    }

    fn define_element(&mut self, id: &Ident, span: &SourceSpan) -> bool {
        if let Some(first) = self.map.elements.get(id.as_str()) {
            let msg = format!("`{id}` is already defined at {first}");
            self.error(ParseCode::DuplicateDefinition, msg, span.clone());
            false
        } else {
            self.map
                .elements
                .insert(String::from(id.as_str()), span.clone());
            true
        }
    }

    fn vp(&mut self) -> bool {
        let kw = self.bump().span(&self.file);
        let Some((id, id_span)) = self.expect_ident("variation point id") else {
            return false;
        };
        let Some(label) = self.expect_str("variation point label") else {
            return false;
        };
        let Some(attrs) = self.attrs() else {
            return false;
        };
        self.reject_unknown(
            &attrs,
            &["kind", "cardinality", "presence"],
            "a variation point",
        );

        let view_kind = match self.word_attr(
            &attrs,
            "kind",
            ViewKind::from_keyword,
            "process, interaction or structure",
        ) {
            Some(k) => k,
            None => {
                if !attrs.iter().any(|a| a.key == "kind") {
                    self.missing("kind", "a variation point", kw.clone());
                }
                ViewKind::Structure
            }
        };
        let cardinality = match attrs.iter().find(|a| a.key == "cardinality") {
            Some(Attr {
                value: Value::Range(a, b),
                ..
            }) => Cardinality::new(*a, *b),
            Some(a) => {
                let span = a.span.clone();
                self.error(
                    ParseCode::InvalidAttribute,
                    String::from("`cardinality` must be a range like [1..2]"),
                    span,
                );
                Cardinality::new(1, 1)
            }
            None => {
                self.missing("cardinality", "a variation point", kw);
                Cardinality::new(1, 1)
            }
        };
        let presence = self
            .word_attr(
                &attrs,
                "presence",
                |s| match s {
                    "mandatory" => Some(Presence::Mandatory),
                    "optional" => Some(Presence::Optional),
                    _ => None,
                },
                "mandatory or optional",
            )
            .unwrap_or_default();

        let fresh = self.define_element(&id, &id_span);
        let mut variants = Vec::new();
        self.block_body(VP_ITEMS, |p, _| match p.variant() {
            Some(v) => {
                variants.push(v);
                true
            }
            None => false,
        });
        if fresh {
            self.model.variation_points.push(VariationPoint {
                id,
                label,
                presence,
                cardinality,
                view_kind,
                variants,
            });
        }
        true
    }

    fn variant(&mut self) -> Option<Variant> {
        let kw = self.bump().span(&self.file);
        let (id, id_span) = self.expect_ident("variant id")?;
        let label = self.expect_str("variant label")?;
        let attrs = self.attrs()?;
        self.reject_unknown(&attrs, &["fragment"], "a variant");
        let fragment = match self.ident_attr(&attrs, "fragment") {
            Some((f, span)) => {
                self.refs.push(PendingRef {
                    kind: RefKind::Fragment,
                    owner: id.clone(),
                    target: f.clone(),
                    span,
                });
                f
            }
            None => {
                if !attrs.iter().any(|a| a.key == "fragment") {
                    self.missing("fragment", "a variant", kw);
                }
                Ident::new("")
            }
        };
        let mut opens = Vec::new();
        if self.at_word("opens") {
            self.bump();
            loop {
                let (vp, span) = self.expect_ident("variation point id")?;
                self.refs.push(PendingRef {
                    kind: RefKind::Vp,
                    owner: id.clone(),
                    target: vp.clone(),
                    span,
                });
                opens.push(vp);
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
        }
        if self.define_element(&id, &id_span) {
            Some(Variant {
                id,
                label,
                fragment,
                opens,
            })
        } else {
            // Already reported; the item was fully consumed, so the resync
            // the caller does is a no-op.
            None
        }
    }

    fn constraint(&mut self) -> bool {
        self.bump();
        let kind = match self.peek() {
            Tok::Word(w) if w == "requires" => ConstraintKind::Requires,
            Tok::Word(w) if w == "excludes" => ConstraintKind::Excludes,
            _ => {
                self.unexpected("`requires` or `excludes`");
                return false;
            }
        };
        self.bump();
        let Some((from, from_span)) = self.expect_ident("variant id") else {
            return false;
        };
        if !self.expect(Tok::Arrow) {
            return false;
        }
        let Some((to, to_span)) = self.expect_ident("variant or variation point id") else {
            return false;
        };
        self.eat(&Tok::Semi);
        self.refs.push(PendingRef {
            kind: RefKind::ConstraintFrom,
            owner: from.clone(),
            target: from.clone(),
            span: from_span,
        });
        self.refs.push(PendingRef {
            kind: RefKind::ConstraintTo,
            owner: from.clone(),
            target: to.clone(),
            span: to_span,
        });
        self.model
            .constraints
            .push(ConstraintDependency { kind, from, to });
        true
    }

    fn include(&mut self) -> bool {
        let kw = self.bump().span(&self.file);
        let Some(path) = self.expect_str("include path") else {
            return false;
        };
        let span = SourceSpan {
            line_end: self.prev_span().line_end,
            col_end: self.prev_span().col_end,
            ..kw
        };
        let (name, text) = match self.resolver.resolve(&self.file, &path) {
            Ok(r) => r,
            Err(msg) => {
                self.error(ParseCode::IncludeFailed, msg, span);
                return true;
            }
        };
        if self.include_stack.contains(&name) {
            self.error(
                ParseCode::IncludeFailed,
                format!(
                    "`{name}` includes itself (via {})",
                    self.include_stack.join(" -> ")
                ),
                span,
            );
            return true;
        }
        let (toks, lex_diags) = lex(&name, &text);
        self.diags.extend(lex_diags);
        let saved_file = core::mem::replace(&mut self.file, name.clone());
        let saved_toks = core::mem::replace(&mut self.toks, toks);
        let saved_pos = core::mem::replace(&mut self.pos, 0);
        self.include_stack.push(name);
        self.included_document();
        self.include_stack.pop();
        self.file = saved_file;
        self.toks = saved_toks;
        self.pos = saved_pos;
        true
    }

    // ------------------------------------------------------- fragments

    fn fragment(&mut self) -> bool {
        self.bump();
        let kind = match self.peek().clone() {
            Tok::Word(w) => match ViewKind::from_keyword(&w) {
                Some(k) => k,
                None => {
                    self.unexpected("fragment kind (process, interaction or structure)");
                    return false;
                }
            },
            _ => {
                self.unexpected("fragment kind");
                return false;
            }
        };
        self.bump();
        let Some((id, id_span)) = self.expect_ident("fragment id") else {
            return false;
        };
        let Some(attrs) = self.attrs() else {
            return false;
        };
        let fragment = match kind {
            ViewKind::Process => self.process_fragment(id.clone(), &attrs),
            ViewKind::Interaction => self.interaction_fragment(id.clone(), &attrs),
            ViewKind::Structure => self.structure_fragment(id.clone(), &attrs),
        };
        if let Some(first) = self.map.fragments.get(id.as_str()) {
            let msg = format!("fragment `{id}` is already defined at {first}");
            self.error(ParseCode::DuplicateDefinition, msg, id_span);
        } else {
            self.map
                .fragments
                .insert(String::from(id.as_str()), id_span);
            self.model.fragments.push(fragment);
        }
        true
    }

    fn process_fragment(&mut self, id: Ident, attrs: &[Attr]) -> ViewFragment {
        self.reject_unknown(attrs, &["protocol"], "a process fragment");
        let protocol = self.word_attr(
            attrs,
            "protocol",
            ProtocolKind::from_keyword,
            "bb84, mdi or e91",
        );
        let mut f = ProcessFragment {
            id,
            protocol,
            lanes: Vec::new(),
            nodes: Vec::new(),
            edges: Vec::new(),
        };
        self.block_body(PROCESS_ITEMS, |p, kw| {
            let kw_span = p.bump().span(&p.file);
            match kw {
                "lane" => {
                    let Some((lane, _)) = p.expect_ident("lane name") else {
                        return false;
                    };
                    f.lanes.push(lane);
                }
                "edge" => {
                    let Some((from, _)) = p.expect_ident("node id") else {
                        return false;
                    };
                    if !p.expect(Tok::Arrow) {
                        return false;
                    }
                    let Some((to, _)) = p.expect_ident("node id") else {
                        return false;
                    };
                    let Some(attrs) = p.attrs() else { return false };
                    p.reject_unknown(&attrs, &["guard"], "an edge");
                    let guard = p.str_attr(&attrs, "guard");
                    f.edges.push(ControlEdge { from, to, guard });
                }
                _ => {
                    let kind = match kw {
                        "initial" => NodeKind::Initial,
                        "final" => NodeKind::Final,
                        "action" => NodeKind::Action,
                        _ => NodeKind::Decision,
                    };
                    let Some((nid, _)) = p.expect_ident("node id") else {
                        return false;
                    };
                    let label = if kind == NodeKind::Action {
                        match p.expect_str("action label") {
                            Some(l) => Some(l),
                            None => return false,
                        }
                    } else {
                        p.opt_str()
                    };
                    let Some(attrs) = p.attrs() else { return false };
                    p.reject_unknown(&attrs, &["lane"], "a process node");
                    let lane = p.ident_attr(&attrs, "lane").map(|(l, _)| l);
                    if kind == NodeKind::Action
                        && lane.is_none()
                        && !attrs.iter().any(|a| a.key == "lane")
                    {
                        p.missing("lane", "an action", kw_span);
                    }
                    f.nodes.push(ProcessNode {
                        id: nid,
                        kind,
                        label,
                        lane,
                    });
                }
            }
            true
        });
        ViewFragment::Process(f)
    }

    fn interaction_fragment(&mut self, id: Ident, attrs: &[Attr]) -> ViewFragment {
        self.reject_unknown(attrs, &["applies"], "an interaction fragment");
        let mut applies = Vec::new();
        if let Some(a) = attrs.iter().find(|a| a.key == "applies") {
            let words: Vec<String> = match &a.value {
                Value::Word(w) => alloc::vec![w.clone()],
                Value::List(ws) => ws.clone(),
                _ => Vec::new(),
            };
            let span = a.span.clone();
            if words.is_empty() {
                self.error(
                    ParseCode::InvalidAttribute,
                    String::from("`applies` must name one or more media"),
                    span.clone(),
                );
            }
            for w in words {
                match MediumKind::from_keyword(&w) {
                    Some(m) if !applies.contains(&m) => applies.push(m),
                    Some(_) => {}
                    None => self.error(
                        ParseCode::InvalidAttribute,
                        format!("unknown medium `{w}` (expected fiber or free-space)"),
                        span.clone(),
                    ),
                }
            }
        }
        let mut f = InteractionFragment {
            id,
            applies,
            lifelines: Vec::new(),
            messages: Vec::new(),
        };
        self.block_body(INTERACTION_ITEMS, |p, kw| {
            let kw_span = p.bump().span(&p.file);
            if kw == "lifeline" {
                let Some((lid, _)) = p.expect_ident("lifeline name") else {
                    return false;
                };
                let Some(attrs) = p.attrs() else { return false };
                p.reject_unknown(&attrs, &["role"], "a lifeline");
                let role = p.word_attr(
                    &attrs,
                    "role",
                    LifelineRole::from_keyword,
                    "sender, receiver, repeater or medium",
                );
                f.lifelines.push(Lifeline { id: lid, role });
            } else {
                let Some((from, _)) = p.expect_ident("lifeline name") else {
                    return false;
                };
                if !p.expect(Tok::Arrow) {
                    return false;
                }
                let Some((to, _)) = p.expect_ident("lifeline name") else {
                    return false;
                };
                let Some(label) = p.expect_str("message label") else {
                    return false;
                };
                let Some(attrs) = p.attrs() else { return false };
                p.reject_unknown(&attrs, &["channel"], "a message");
                let channel = match p.word_attr(
                    &attrs,
                    "channel",
                    ChannelKind::from_keyword,
                    "quantum or classical",
                ) {
                    Some(c) => c,
                    None => {
                        if !attrs.iter().any(|a| a.key == "channel") {
                            p.missing("channel", "a message", kw_span);
                        }
                        ChannelKind::Classical
                    }
                };
                f.messages.push(Message {
                    from,
                    to,
                    label,
                    channel,
                });
            }
            true
        });
        ViewFragment::Interaction(f)
    }

    fn structure_fragment(&mut self, id: Ident, attrs: &[Attr]) -> ViewFragment {
        self.reject_unknown(attrs, &[], "a structure fragment");
        let mut f = StructureFragment {
            id,
            ..Default::default()
        };
        self.block_body(STRUCTURE_ITEMS, |p, kw| {
            let kw_span = p.bump().span(&p.file);
            match kw {
                "block" => {
                    let Some((bid, _)) = p.expect_ident("block id") else {
                        return false;
                    };
                    let label = p.opt_str();
                    let Some(attrs) = p.attrs() else { return false };
                    p.reject_unknown(&attrs, &["role", "medium", "length"], "a block");
                    let role = p.block_role(&attrs, kw_span);
                    f.blocks.push(Block {
                        id: bid,
                        label,
                        role,
                    });
                }
                "part" => {
                    let Some((parent, _)) = p.expect_ident("block id") else {
                        return false;
                    };
                    if !p.expect(Tok::Arrow) {
                        return false;
                    }
                    let Some((child, _)) = p.expect_ident("block id") else {
                        return false;
                    };
                    f.containment.push(Containment { parent, child });
                }
                _ => {
                    let Some((block, _)) = p.expect_ident("block id") else {
                        return false;
                    };
                    let Some((pid, _)) = p.expect_ident("port id") else {
                        return false;
                    };
                    let Some(attrs) = p.attrs() else { return false };
                    p.reject_unknown(&attrs, &["channel", "direction"], "a port");
                    let channel = match p.word_attr(
                        &attrs,
                        "channel",
                        ChannelKind::from_keyword,
                        "quantum or classical",
                    ) {
                        Some(c) => c,
                        None => {
                            if !attrs.iter().any(|a| a.key == "channel") {
                                p.missing("channel", "a port", kw_span);
                            }
                            ChannelKind::Classical
                        }
                    };
                    let direction = p
                        .word_attr(
                            &attrs,
                            "direction",
                            Direction::from_keyword,
                            "in, out or inout",
                        )
                        .unwrap_or(Direction::Inout);
                    f.ports.push(Port {
                        block,
                        id: pid,
                        channel,
                        direction,
                    });
                }
            }
            true
        });
        ViewFragment::Structure(f)
    }

    fn block_role(&mut self, attrs: &[Attr], kw_span: SourceSpan) -> Option<BlockRole> {
        let role = self.word_attr(
            attrs,
            "role",
            |s| match s {
                "endpoint" | "path" | "link" | "repeater" => Some(String::from(s)),
                _ => None,
            },
            "endpoint, path, link or repeater",
        );
        let medium = self.word_attr(
            attrs,
            "medium",
            MediumKind::from_keyword,
            "fiber or free-space",
        );
        let length = self.word_attr(
            attrs,
            "length",
            |s| s.parse::<f64>().ok().filter(|v| v.is_finite() && *v >= 0.0),
            "a non-negative number of kilometres",
        );
        let has = |k: &str| attrs.iter().any(|a| a.key == k);
        match role.as_deref() {
            Some("link") => match medium {
                Some(medium) => Some(BlockRole::Link {
                    medium,
                    length_km: length,
                }),
                None => {
                    if !has("medium") {
                        self.missing("medium", "a link block", kw_span);
                    }
                    None
                }
            },
            other => {
                for k in ["medium", "length"] {
                    if let Some(a) = attrs.iter().find(|a| a.key == k) {
                        let span = a.span.clone();
                        self.error(
                            ParseCode::InvalidAttribute,
                            format!("`{k}` is only allowed on blocks with role=link"),
                            span,
                        );
                    }
                }
                match other {
                    Some("endpoint") => Some(BlockRole::Endpoint),
                    Some("path") => Some(BlockRole::Path),
                    Some("repeater") => Some(BlockRole::Repeater),
                    _ => None,
                }
            }
        }
    }

    // ------------------------------------------------------ references

    fn resolve_refs(&mut self) {
        let refs = core::mem::take(&mut self.refs);
        for r in refs {
            let ok = match r.kind {
                RefKind::Fragment => self.model.fragment(&r.target).is_some(),
                RefKind::Vp => self.model.vp(&r.target).is_some(),
                RefKind::ConstraintFrom => self.model.variant(&r.target).is_some(),
                RefKind::ConstraintTo => {
                    self.model.variant(&r.target).is_some() || self.model.vp(&r.target).is_some()
                }
            };
            if !ok {
                let what = match r.kind {
                    RefKind::Fragment => "fragment",
                    RefKind::Vp => "variation point",
                    RefKind::ConstraintFrom => "variant",
                    RefKind::ConstraintTo => "variant or variation point",
                };
                self.error(
                    ParseCode::UnknownReference,
                    format!("`{}` refers to unknown {what} `{}`", r.owner, r.target),
                    r.span,
                );
            }
        }
    }
}

/// Parses a model from in-memory text; `include` directives fail.
pub fn parse_model(text: &str) -> Result<OvmModel, Vec<ParseDiagnostic>> {
    parse_model_with("<input>", text, &NoIncludes).map(|p| p.model)
}

/// Parses a model, resolving `include "path"` through `resolver`. On
/// failure every diagnostic (errors and warnings) is returned.
pub fn parse_model_with(
    file: &str,
    text: &str,
    resolver: &dyn IncludeResolver,
) -> Result<ParsedModel, Vec<ParseDiagnostic>> {
    let mut p = Parser::new(file, text, resolver);
    p.document();
    p.resolve_refs();
    if p.diags.iter().any(is_error) {
        Err(p.diags)
    } else {
        Ok(ParsedModel {
            model: p.model,
            source_map: p.map,
            warnings: p.diags,
        })
    }
}

pub fn parse_configuration(
    text: &str,
    model: &OvmModel,
) -> Result<ParsedConfiguration, Vec<ParseDiagnostic>> {
    parse_configuration_named("<input>", text, model)
}

/// Parses `configuration <name> for <model> { select <variant>, ... }`.
pub fn parse_configuration_named(
    file: &str,
    text: &str,
    model: &OvmModel,
) -> Result<ParsedConfiguration, Vec<ParseDiagnostic>> {
    let mut p = Parser::new(file, text, &NoIncludes);
    let mut name = String::new();
    let mut selected: BTreeSet<Ident> = BTreeSet::new();
    let mut target = String::from(model.name.as_str());

    if !p.at_word("configuration") {
        p.unexpected("`configuration`");
    } else {
        p.bump();
        if let Some((n, _)) = p.expect_ident("configuration name") {
            name = String::from(n.as_str());
        }
        if p.at_word("for") {
            p.bump();
            if let Some((m, span)) = p.expect_ident("model name") {
                if m != model.name.as_str() {
                    p.error(
                        ParseCode::ModelMismatch,
                        format!(
                            "configuration is for model `{m}` but `{}` was loaded",
                            model.name
                        ),
                        span,
                    );
                }
                target = String::from(m.as_str());
            }
        } else {
            p.unexpected("`for`");
        }
        p.block_body(CONFIG_ITEMS, |p, _| {
            p.bump();
            loop {
                let Some((id, span)) = p.expect_ident("variant id") else {
                    return false;
                };
                if model.variant(&id).is_none() {
                    p.error(
                        ParseCode::UnknownVariant,
                        format!("`{id}` is not a variant of `{}`", model.name),
                        span,
                    );
                } else if !selected.insert(id.clone()) {
                    p.warning(
                        ParseCode::DuplicateSelection,
                        format!("`{id}` is selected more than once"),
                        span,
                    );
                }
                if !p.eat(&Tok::Comma) {
                    break;
                }
            }
            true
        });
        if *p.peek() != Tok::Eof {
            p.unexpected("end of input");
        }
    }

    if p.diags.iter().any(is_error) {
        Err(p.diags)
    } else {
        Ok(ParsedConfiguration {
            name,
            config: Configuration {
                model: target,
                selected,
            },
            warnings: p.diags,
        })
    }
}
