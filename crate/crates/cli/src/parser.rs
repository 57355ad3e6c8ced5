//! Parser and renderer for the model-description DSL.
//!
//! Two document kinds share one grammar core:
//!
//! ```text
//! doc    := "algebra" NAME "{" item* "}"
//!         | "fibration" NAME "{" "base" "{" item* "}"
//!                            "fibre" "{" item* "}"
//!                            "total" "{" ("d" NAME "=" poly)* "}" "}"
//! item   := "gen" NAME ":" INT | "d" NAME "=" poly
//! poly   := ["-"] term (("+" | "-") term)*
//! term   := [coef ("*")?] factor ("*" factor)* | coef
//! factor := NAME ("^" INT)?
//! coef   := INT ("/" INT)?
//! ```
//!
//! Identifiers are ASCII alphanumeric starting with a letter; whitespace is
//! insignificant. Omitted `d` lines mean a zero differential; the total block
//! may override fibre generators only. Validation runs after parsing, so a
//! successfully parsed document is a valid (not necessarily minimal) model.
//! Every diagnostic carries a line/column span and the violated rule.

use gottlieb_core::algebra::{DgAlgebra, DgaViolation, Element};
use gottlieb_core::fibration::{FibError, KsModel};
use gottlieb_core::rat;
use std::fmt;

const KEYWORDS: [&str; 7] = ["algebra", "fibration", "base", "fibre", "total", "gen", "d"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Span {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone)]
pub struct ParseError {
    pub span: Span,
    pub message: String,
    /// The violated invariant, e.g. "syntax", "UnknownGenerator",
    /// "DegreeMismatch", "OddExponent", "DSquareNotZero", "KsInvariant".
    pub invariant: &'static str,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "error at {}: {} [{}]",
            self.span, self.message, self.invariant
        )
    }
}

impl std::error::Error for ParseError {}

fn err(span: Span, invariant: &'static str, message: impl Into<String>) -> ParseError {
    ParseError {
        span,
        message: message.into(),
        invariant,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Int(String),
    LBrace,
    RBrace,
    Colon,
    Eq,
    Plus,
    Minus,
    Star,
    Caret,
    Slash,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier '{s}'"),
            Tok::Int(s) => format!("integer '{s}'"),
            Tok::LBrace => "'{'".into(),
            Tok::RBrace => "'}'".into(),
            Tok::Colon => "':'".into(),
            Tok::Eq => "'='".into(),
            Tok::Plus => "'+'".into(),
            Tok::Minus => "'-'".into(),
            Tok::Star => "'*'".into(),
            Tok::Caret => "'^'".into(),
            Tok::Slash => "'/'".into(),
        }
    }
}

fn lex(text: &str) -> Result<Vec<(Tok, Span)>, ParseError> {
    let mut out = Vec::new();
    let mut line = 1usize;
    let mut col = 1usize;
    let mut chars = text.chars().peekable();
    while let Some(&c) = chars.peek() {
        let span = Span { line, col };
        match c {
            '\n' => {
                chars.next();
                line += 1;
                col = 1;
            }
            c if c.is_whitespace() => {
                chars.next();
                col += 1;
            }
            c if c.is_ascii_alphabetic() => {
                let mut s = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_ascii_alphanumeric() {
                        s.push(c);
                        chars.next();
                        col += 1;
                    } else {
                        break;
                    }
                }
                out.push((Tok::Ident(s), span));
            }
            c if c.is_ascii_digit() => {
                let mut s = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_ascii_digit() {
                        s.push(c);
                        chars.next();
                        col += 1;
                    } else {
                        break;
                    }
                }
                out.push((Tok::Int(s), span));
            }
            _ => {
                let tok = match c {
                    '{' => Tok::LBrace,
                    '}' => Tok::RBrace,
                    ':' => Tok::Colon,
                    '=' => Tok::Eq,
                    '+' => Tok::Plus,
                    '-' => Tok::Minus,
                    '*' => Tok::Star,
                    '^' => Tok::Caret,
                    '/' => Tok::Slash,
                    other => {
                        return Err(err(
                            span,
                            "syntax",
                            format!("unexpected character '{other}'"),
                        ))
                    }
                };
                chars.next();
                col += 1;
                out.push((tok, span));
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone)]
struct FactorAst {
    name: String,
    exp: u32,
    span: Span,
}

#[derive(Debug, Clone)]
struct TermAst {
    negative: bool,
    coef: Option<(i64, i64)>,
    factors: Vec<FactorAst>,
    span: Span,
}

#[derive(Debug, Clone)]
struct PolyAst {
    terms: Vec<TermAst>,
}

#[derive(Debug, Clone)]
struct GenDecl {
    name: String,
    degree: usize,
    span: Span,
}

#[derive(Debug, Clone)]
struct DiffDecl {
    gen: String,
    poly: PolyAst,
    span: Span,
}

struct Parser {
    tokens: Vec<(Tok, Span)>,
    pos: usize,
    end: Span,
}

impl Parser {
    fn new(text: &str) -> Result<Self, ParseError> {
        let tokens = lex(text)?;
        let end = tokens
            .last()
            .map(|&(_, s)| s)
            .unwrap_or(Span { line: 1, col: 1 });
        Ok(Parser {
            tokens,
            pos: 0,
            end,
        })
    }

    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos).map(|(t, _)| t)
    }

    fn span(&self) -> Span {
        self.tokens
            .get(self.pos)
            .map(|&(_, s)| s)
            .unwrap_or(self.end)
    }

    fn next(&mut self) -> Option<(Tok, Span)> {
        let t = self.tokens.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn expect(&mut self, want: Tok) -> Result<Span, ParseError> {
        match self.next() {
            Some((t, s)) if t == want => Ok(s),
            Some((t, s)) => Err(err(
                s,
                "syntax",
                format!("expected {}, found {}", want.describe(), t.describe()),
            )),
            None => Err(err(
                self.end,
                "syntax",
                format!("expected {}, found end of input", want.describe()),
            )),
        }
    }

    fn expect_keyword(&mut self, kw: &str) -> Result<Span, ParseError> {
        match self.next() {
            Some((Tok::Ident(s), sp)) if s == kw => Ok(sp),
            Some((t, sp)) => Err(err(
                sp,
                "syntax",
                format!("expected '{kw}', found {}", t.describe()),
            )),
            None => Err(err(
                self.end,
                "syntax",
                format!("expected '{kw}', found end of input"),
            )),
        }
    }

    fn expect_name(&mut self) -> Result<(String, Span), ParseError> {
        match self.next() {
            Some((Tok::Ident(s), sp)) => Ok((s, sp)),
            Some((t, sp)) => Err(err(
                sp,
                "syntax",
                format!("expected a name, found {}", t.describe()),
            )),
            None => Err(err(
                self.end,
                "syntax",
                "expected a name, found end of input",
            )),
        }
    }

    fn expect_int(&mut self) -> Result<(i64, Span), ParseError> {
        match self.next() {
            Some((Tok::Int(s), sp)) => s
                .parse::<i64>()
                .map(|v| (v, sp))
                .map_err(|_| err(sp, "syntax", format!("integer '{s}' is out of range"))),
            Some((t, sp)) => Err(err(
                sp,
                "syntax",
                format!("expected an integer, found {}", t.describe()),
            )),
            None => Err(err(
                self.end,
                "syntax",
                "expected an integer, found end of input",
            )),
        }
    }

    /// Items of one algebra block, up to (and consuming) the closing brace.
    fn parse_items(&mut self) -> Result<(Vec<GenDecl>, Vec<DiffDecl>), ParseError> {
        let mut gens = Vec::new();
        let mut diffs: Vec<DiffDecl> = Vec::new();
        loop {
            match self.peek() {
                Some(Tok::RBrace) => {
                    self.next();
                    return Ok((gens, diffs));
                }
                Some(Tok::Ident(kw)) if kw == "gen" => {
                    let _ = self.next();
                    let (name, span) = self.expect_name()?;
                    if KEYWORDS.contains(&name.as_str()) {
                        return Err(err(
                            span,
                            "syntax",
                            format!("'{name}' is a keyword and cannot name a generator"),
                        ));
                    }
                    self.expect(Tok::Colon)?;
                    let (degree, dspan) = self.expect_int()?;
                    if degree < 1 {
                        return Err(err(
                            dspan,
                            "DegreeMismatch",
                            "generator degrees must be >= 1",
                        ));
                    }
                    gens.push(GenDecl {
                        name,
                        degree: degree as usize,
                        span,
                    });
                }
                Some(Tok::Ident(kw)) if kw == "d" => {
                    let _ = self.next();
                    let (gen, span) = self.expect_name()?;
                    self.expect(Tok::Eq)?;
                    let poly = self.parse_poly()?;
                    if diffs.iter().any(|d| d.gen == gen) {
                        return Err(err(
                            span,
                            "syntax",
                            format!("duplicate differential for '{gen}'"),
                        ));
                    }
                    diffs.push(DiffDecl { gen, poly, span });
                }
                Some(t) => {
                    let t = t.describe();
                    return Err(err(
                        self.span(),
                        "syntax",
                        format!("expected 'gen', 'd' or '}}', found {t}"),
                    ));
                }
                None => {
                    return Err(err(self.end, "syntax", "unclosed block: expected '}'"));
                }
            }
        }
    }

    fn parse_poly(&mut self) -> Result<PolyAst, ParseError> {
        let mut terms = Vec::new();
        let mut negative = matches!(self.peek(), Some(Tok::Minus));
        if negative {
            self.next();
        }
        loop {
            terms.push(self.parse_term(negative)?);
            match self.peek() {
                Some(Tok::Plus) => {
                    self.next();
                    negative = false;
                }
                Some(Tok::Minus) => {
                    self.next();
                    negative = true;
                }
                _ => return Ok(PolyAst { terms }),
            }
        }
    }

    fn parse_term(&mut self, negative: bool) -> Result<TermAst, ParseError> {
        let span = self.span();
        let mut coef = None;
        if matches!(self.peek(), Some(Tok::Int(_))) {
            let (num, _) = self.expect_int()?;
            let den = if matches!(self.peek(), Some(Tok::Slash)) {
                self.next();
                let (d, dspan) = self.expect_int()?;
                if d == 0 {
                    return Err(err(dspan, "syntax", "zero denominator"));
                }
                d
            } else {
                1
            };
            coef = Some((num, den));
            if matches!(self.peek(), Some(Tok::Star)) {
                self.next();
            }
        }
        let mut factors = Vec::new();
        loop {
            match self.peek() {
                Some(Tok::Ident(name)) if !KEYWORDS.contains(&name.as_str()) => {
                    let (name, fspan) = self.expect_name()?;
                    let exp = if matches!(self.peek(), Some(Tok::Caret)) {
                        self.next();
                        let (e, espan) = self.expect_int()?;
                        if e < 1 {
                            return Err(err(espan, "syntax", "exponents must be >= 1"));
                        }
                        u32::try_from(e).map_err(|_| {
                            err(espan, "syntax", format!("exponent {e} is out of range"))
                        })?
                    } else {
                        1
                    };
                    factors.push(FactorAst {
                        name,
                        exp,
                        span: fspan,
                    });
                    if matches!(self.peek(), Some(Tok::Star)) {
                        self.next();
                        continue;
                    }
                    // Juxtaposition without '*' is permitted by the grammar's
                    // optional star only right after the coefficient, but
                    // being whitespace-insensitive we accept it between
                    // factors too.
                    if matches!(self.peek(), Some(Tok::Ident(n)) if !KEYWORDS.contains(&n.as_str()))
                    {
                        continue;
                    }
                    break;
                }
                _ => break,
            }
        }
        if coef.is_none() && factors.is_empty() {
            return Err(err(
                span,
                "syntax",
                "expected a term (coefficient or generator)",
            ));
        }
        Ok(TermAst {
            negative,
            coef,
            factors,
            span,
        })
    }
}

fn eval_poly(alg: &DgAlgebra, poly: &PolyAst) -> Result<Element, ParseError> {
    let mut acc = Element::zero();
    for term in &poly.terms {
        let (num, den) = term.coef.unwrap_or((1, 1));
        let mut value = alg.scalar(rat(if term.negative { -num } else { num }, den));
        for factor in &term.factors {
            let idx = alg.gen_index(&factor.name).ok_or_else(|| {
                err(
                    factor.span,
                    "UnknownGenerator",
                    format!("unknown generator '{}'", factor.name),
                )
            })?;
            if alg.gen_degree(idx) % 2 == 1 && factor.exp >= 2 {
                return Err(err(
                    factor.span,
                    "OddExponent",
                    format!(
                        "generator '{}' has odd degree and cannot carry exponent {}",
                        factor.name, factor.exp
                    ),
                ));
            }
            value = alg.multiply(&value, &alg.power(&alg.gen_elem(idx), factor.exp));
        }
        if value.is_zero() {
            continue;
        }
        if !acc.is_zero() && acc.degree() != value.degree() {
            return Err(err(
                term.span,
                "DegreeMismatch",
                format!(
                    "polynomial mixes degrees {:?} and {:?}",
                    acc.degree(),
                    value.degree()
                ),
            ));
        }
        acc = acc.add(&value);
    }
    Ok(acc)
}

fn build_algebra(
    name: &str,
    gens: Vec<GenDecl>,
    diffs: Vec<DiffDecl>,
    block_span: Span,
) -> Result<DgAlgebra, ParseError> {
    let mut alg = DgAlgebra::free(
        name,
        gens.iter().map(|g| (g.name.clone(), g.degree)).collect(),
    )
    .map_err(|e| err(block_span, "syntax", e.to_string()))?;
    for d in &diffs {
        if alg.gen_index(&d.gen).is_none() {
            return Err(err(
                d.span,
                "UnknownGenerator",
                format!("unknown generator '{}'", d.gen),
            ));
        }
        let image = eval_poly(&alg, &d.poly)?;
        alg.set_differential(&d.gen, image)
            .map_err(|e| err(d.span, "DegreeMismatch", e.to_string()))?;
    }
    let report = alg.check();
    if let Some(v) = report.violations.first() {
        let (gen, msg, invariant) = match v {
            DgaViolation::DifferentialDegree { gen, expected, .. } => (
                gen.clone(),
                format!("d({gen}) must raise degree by exactly 1 (to degree {expected})"),
                "DegreeMismatch",
            ),
            DgaViolation::DSquareNotZero { gen, residual } => (
                gen.clone(),
                format!("d(d({gen})) = {} is nonzero", alg.format_element(residual)),
                "DSquareNotZero",
            ),
        };
        let span = diffs
            .iter()
            .find(|d| d.gen == gen)
            .map(|d| d.span)
            .unwrap_or(block_span);
        return Err(err(span, invariant, msg));
    }
    Ok(alg)
}

/// Parses an `algebra` document and validates it.
pub fn parse_dga(text: &str) -> Result<DgAlgebra, ParseError> {
    let mut p = Parser::new(text)?;
    p.expect_keyword("algebra")?;
    let (name, _) = p.expect_name()?;
    let open = p.expect(Tok::LBrace)?;
    let (gens, diffs) = p.parse_items()?;
    if let Some(t) = p.peek() {
        let t = t.describe();
        return Err(err(p.span(), "syntax", format!("trailing input: {t}")));
    }
    build_algebra(&name, gens, diffs, open)
}

/// Parses a `fibration` document, builds the KS model and validates it.
pub fn parse_ks(text: &str) -> Result<KsModel, ParseError> {
    let mut p = Parser::new(text)?;
    p.expect_keyword("fibration")?;
    let (name, _) = p.expect_name()?;
    p.expect(Tok::LBrace)?;

    p.expect_keyword("base")?;
    let base_open = p.expect(Tok::LBrace)?;
    let (base_gens, base_diffs) = p.parse_items()?;
    let base = build_algebra("base", base_gens, base_diffs, base_open)?;

    p.expect_keyword("fibre")?;
    let fibre_open = p.expect(Tok::LBrace)?;
    let (fibre_gens, fibre_diffs) = p.parse_items()?;
    let fibre = build_algebra("fibre", fibre_gens, fibre_diffs, fibre_open)?;

    p.expect_keyword("total")?;
    let total_open = p.expect(Tok::LBrace)?;
    let (stray_gens, total_diffs) = p.parse_items()?;
    if let Some(g) = stray_gens.first() {
        return Err(err(
            g.span,
            "syntax",
            "the total block may only override differentials",
        ));
    }
    p.expect(Tok::RBrace)?;
    if let Some(t) = p.peek() {
        let t = t.describe();
        return Err(err(p.span(), "syntax", format!("trailing input: {t}")));
    }

    let shell = KsModel::total_shell(&base, &fibre)
        .map_err(|e| err(total_open, "KsInvariant", e.to_string()))?;
    let mut overrides = Vec::new();
    let mut spans = Vec::new();
    for d in &total_diffs {
        if base.gen_index(&d.gen).is_some() {
            return Err(err(
                d.span,
                "KsInvariant",
                format!(
                    "cannot override d({}) in the total block: the base differential is fixed",
                    d.gen
                ),
            ));
        }
        if fibre.gen_index(&d.gen).is_none() {
            return Err(err(
                d.span,
                "UnknownGenerator",
                format!("unknown generator '{}'", d.gen),
            ));
        }
        let image = eval_poly(&shell, &d.poly)?;
        overrides.push((d.gen.clone(), image));
        spans.push((d.gen.clone(), d.span));
    }

    let model = KsModel::new(name, base, fibre, overrides).map_err(|e| match &e {
        FibError::Algebra(inner) => err(total_open, "DegreeMismatch", inner.to_string()),
        other => err(total_open, "KsInvariant", other.to_string()),
    })?;
    let report = model.validate();
    if let Some(v) = report.violations.first() {
        let gen_of = |v: &gottlieb_core::fibration::KsViolation| -> Option<String> {
            use gottlieb_core::fibration::KsViolation::*;
            match v {
                BaseDifferentialChanged { gen } | FibreProjection { gen, .. } => Some(gen.clone()),
                TotalAlgebra(DgaViolation::DSquareNotZero { gen, .. })
                | TotalAlgebra(DgaViolation::DifferentialDegree { gen, .. }) => Some(gen.clone()),
                _ => None,
            }
        };
        let span = gen_of(v)
            .and_then(|g| spans.iter().find(|(name, _)| *name == g).map(|&(_, s)| s))
            .unwrap_or(total_open);
        return Err(err(span, "KsInvariant", model.violation_message(v)));
    }
    Ok(model)
}

/// A parsed document of either kind.
#[derive(Debug)]
pub enum Payload {
    Algebra(DgAlgebra),
    Fibration(KsModel),
}

#[derive(Debug)]
pub struct ModelDocument {
    pub source: String,
    pub payload: Payload,
}

/// Parses either document kind, dispatching on the leading keyword.
pub fn parse_document(text: &str) -> Result<ModelDocument, ParseError> {
    let p = Parser::new(text)?;
    let payload = match p.peek() {
        Some(Tok::Ident(kw)) if kw == "algebra" => Payload::Algebra(parse_dga(text)?),
        Some(Tok::Ident(kw)) if kw == "fibration" => Payload::Fibration(parse_ks(text)?),
        Some(t) => {
            let t = t.describe();
            return Err(err(
                p.span(),
                "syntax",
                format!("expected 'algebra' or 'fibration', found {t}"),
            ));
        }
        None => return Err(err(Span { line: 1, col: 1 }, "syntax", "empty input")),
    };
    Ok(ModelDocument {
        source: text.to_string(),
        payload,
    })
}

fn render_items(alg: &DgAlgebra, indent: &str, out: &mut String) {
    for g in alg.gens() {
        out.push_str(&format!("{indent}gen {}:{}\n", g.name, g.degree));
    }
    for (i, g) in alg.gens().iter().enumerate() {
        let image = alg.d_image(i as u32);
        if !image.is_zero() {
            out.push_str(&format!(
                "{indent}d {} = {}\n",
                g.name,
                alg.format_element(image)
            ));
        }
    }
}

/// Canonical text form of an algebra document; `parse . render` is the
/// identity on parsed payloads.
pub fn render_dga(alg: &DgAlgebra) -> String {
    let mut out = format!("algebra {} {{\n", alg.name());
    render_items(alg, "  ", &mut out);
    out.push_str("}\n");
    out
}

/// Canonical text form of a fibration document.
pub fn render_ks(model: &KsModel) -> String {
    let mut out = format!("fibration {} {{\n", model.name());
    out.push_str("  base {\n");
    render_items(model.base(), "    ", &mut out);
    out.push_str("  }\n  fibre {\n");
    render_items(model.fibre(), "    ", &mut out);
    out.push_str("  }\n  total {\n");
    for (gen, image) in model.total_overrides() {
        out.push_str(&format!(
            "    d {} = {}\n",
            gen,
            model.total().format_element(&image)
        ));
    }
    out.push_str("  }\n}\n");
    out
}

pub fn render_document(doc: &ModelDocument) -> String {
    match &doc.payload {
        Payload::Algebra(a) => render_dga(a),
        Payload::Fibration(m) => render_ks(m),
    }
}
