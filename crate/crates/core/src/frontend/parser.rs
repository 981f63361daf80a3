//! Recursive-descent parser for `.aie` metamodels with panic-mode recovery
//! at `;` and `}`.

use std::sync::Arc;

use super::ast::*;
use super::diagnostics::{Diagnostic, DiagnosticKind, Diagnostics};
use super::lexer::{lex, Tok, Token};
use crate::kernel::{Decl, Expr, Formula, IntCmp, IntExpr, IntOp, Multiplicity, Relation, RelationKind};
use crate::span::SourceSpan;

/// Marker for an error that has already been recorded.
struct Bail;

type PResult<T> = Result<T, Bail>;

/// Words that cannot be used as names inside formulas.
const FORMULA_KEYWORDS: &[&str] = &[
    "all", "exists", "some", "one", "lone", "no", "univ", "int2expr", "sum", "project",
];

/// A formula-language node before its sort is known.
enum Node {
    F(Formula),
    E(Expr),
    I(IntExpr),
}

impl Node {
    fn span(&self) -> Option<SourceSpan> {
        match self {
            Node::F(f) => f.span.clone(),
            Node::E(e) => e.span.clone(),
            Node::I(i) => i.span.clone(),
        }
    }

    fn sort(&self) -> &'static str {
        match self {
            Node::F(_) => "a formula",
            Node::E(_) => "a relational expression",
            Node::I(_) => "an integer expression",
        }
    }
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    errors: Vec<Diagnostic>,
}

fn join_spans(a: &Option<SourceSpan>, b: &Option<SourceSpan>) -> Option<SourceSpan> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.to(y)),
        (Some(x), None) => Some(x.clone()),
        (None, y) => y.clone(),
    }
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        let i = (self.pos + k).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    fn span(&self) -> SourceSpan {
        self.toks[self.pos].span.clone()
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn at(&self, t: &Tok) -> bool {
        self.peek() == t
    }

    fn at_word(&self, w: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == w)
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.at(t) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn eat_word(&mut self, w: &str) -> Option<SourceSpan> {
        if self.at_word(w) {
            Some(self.bump().span)
        } else {
            None
        }
    }

    fn fail<T>(&mut self, expected: &[&str]) -> PResult<T> {
        let found = self.peek().to_string();
        let message = match expected {
            [] => format!("unexpected {found}"),
            [one] => format!("expected {one}, found {found}"),
            many => format!("expected one of {}, found {found}", many.join(", ")),
        };
        let mut d = Diagnostic::error(DiagnosticKind::SyntaxError, Some(self.span()), message);
        d.expected = expected.iter().map(|s| s.to_string()).collect();
        self.errors.push(d);
        Err(Bail)
    }

    fn expect(&mut self, t: Tok, what: &str) -> PResult<SourceSpan> {
        if self.at(&t) {
            Ok(self.bump().span)
        } else {
            self.fail(&[what])
        }
    }

    fn expect_word(&mut self, w: &str) -> PResult<SourceSpan> {
        match self.eat_word(w) {
            Some(s) => Ok(s),
            None => self.fail(&[&format!("`{w}`")]),
        }
    }

    fn ident(&mut self, what: &str) -> PResult<(String, SourceSpan)> {
        if let Tok::Ident(s) = self.peek().clone() {
            let span = self.bump().span;
            Ok((s, span))
        } else {
            self.fail(&[what])
        }
    }

    fn int(&mut self, what: &str) -> PResult<(u32, SourceSpan)> {
        if let Tok::Int(v) = *self.peek() {
            let span = self.bump().span;
            match u32::try_from(v) {
                Ok(v) => Ok((v, span)),
                Err(_) => {
                    self.errors.push(Diagnostic::error(
                        DiagnosticKind::SyntaxError,
                        Some(span),
                        format!("constant {v} is too large"),
                    ));
                    Err(Bail)
                }
            }
        } else {
            self.fail(&[what])
        }
    }

    /// Skips to just after the next `;`, or to the next unmatched `}`
    /// (which is left in place), balancing any braces opened on the way.
    fn recover(&mut self) {
        let mut depth = 0usize;
        loop {
            match self.peek() {
                Tok::Eof => return,
                Tok::Semi if depth == 0 => {
                    self.bump();
                    return;
                }
                Tok::LBrace => depth += 1,
                Tok::RBrace => {
                    if depth == 0 {
                        return;
                    }
                    depth -= 1;
                    if depth == 0 {
                        self.bump();
                        return;
                    }
                }
                _ => {}
            }
            self.bump();
        }
    }

    fn skip_past_rbrace(&mut self) {
        while !matches!(self.peek(), Tok::RBrace | Tok::Semi | Tok::Eof) {
            self.bump();
        }
        self.eat(&Tok::RBrace);
    }

    // ---- declarations ----

    fn file(&mut self, file: Arc<str>) -> MetamodelAst {
        let mut packages = Vec::new();
        while !self.at(&Tok::Eof) {
            if self.at_word("package") {
                if let Ok(p) = self.package() {
                    packages.push(p);
                }
            } else {
                let _ = self.fail::<()>(&["`package`"]);
                self.recover();
                if self.at(&Tok::RBrace) {
                    self.bump();
                }
            }
        }
        MetamodelAst { file, packages }
    }

    fn package(&mut self) -> PResult<Package> {
        self.expect_word("package")?;
        let (name, span) = match self.ident("package name") {
            Ok(x) => x,
            Err(b) => {
                self.recover();
                return Err(b);
            }
        };
        if self.expect(Tok::LBrace, "`{`").is_err() {
            self.recover();
            return Err(Bail);
        }
        let mut pkg = Package {
            name,
            span,
            packages: Vec::new(),
            classifiers: Vec::new(),
            invariants: Vec::new(),
        };
        loop {
            match self.peek().clone() {
                Tok::RBrace => {
                    self.bump();
                    break;
                }
                Tok::Eof => {
                    let _ = self.fail::<()>(&["`}`"]);
                    break;
                }
                Tok::Ident(w) => {
                    let r = match w.as_str() {
                        "package" => self.package().map(|p| pkg.packages.push(p)),
                        "abstract" | "class" | "one" | "lone" | "some" | "no" => {
                            self.class().map(|c| pkg.classifiers.push(Classifier::Class(c)))
                        }
                        "datatype" => self.datatype().map(|d| pkg.classifiers.push(Classifier::DataType(d))),
                        "enum" => self.enumeration().map(|e| pkg.classifiers.push(Classifier::Enum(e))),
                        "invariant" => self.invariant().map(|i| pkg.invariants.push(i)),
                        _ => self.fail(&["`package`", "`class`", "`datatype`", "`enum`", "`invariant`", "`}`"]),
                    };
                    if r.is_err() {
                        self.recover();
                    }
                }
                _ => {
                    let _ = self.fail::<()>(&["`package`", "`class`", "`datatype`", "`enum`", "`invariant`", "`}`"]);
                    self.recover();
                }
            }
        }
        Ok(pkg)
    }

    fn cardinality(&mut self) -> Option<(Multiplicity, SourceSpan)> {
        let m = match self.peek() {
            Tok::Ident(w) => match w.as_str() {
                "one" => Multiplicity::One,
                "lone" => Multiplicity::Lone,
                "some" => Multiplicity::Some,
                "no" => Multiplicity::No,
                _ => return None,
            },
            _ => return None,
        };
        Some((m, self.bump().span))
    }

    fn class(&mut self) -> PResult<ClassDecl> {
        let is_abstract = self.eat_word("abstract").is_some();
        let cardinality = self.cardinality();
        self.expect_word("class")?;
        let (name, span) = self.ident("class name")?;
        let mut params = Vec::new();
        if self.eat(&Tok::Lt) {
            loop {
                let (pname, pspan) = self.ident("type parameter name")?;
                let mut bounds = Vec::new();
                if self.eat_word("extends").is_some() {
                    bounds.push(self.type_ref()?);
                    while self.eat(&Tok::Amp) {
                        bounds.push(self.type_ref()?);
                    }
                }
                params.push(TypeParam {
                    name: pname,
                    bounds,
                    span: pspan,
                });
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
            self.expect(Tok::Gt, "`>`")?;
        }
        let mut extends = Vec::new();
        if self.eat_word("extends").is_some() {
            extends.push(self.type_ref()?);
            loop {
                let comma = self.eat(&Tok::Comma);
                if matches!(self.peek(), Tok::Ident(_)) {
                    extends.push(self.type_ref()?);
                } else if comma {
                    return self.fail(&["type identifier"]);
                } else {
                    break;
                }
            }
        }
        let mut bound = None;
        if self.at(&Tok::LBracket) {
            let start = self.bump().span;
            let (min, _) = self.int("lower bound")?;
            self.expect(Tok::Comma, "`,`")?;
            let (max, _) = self.int("upper bound")?;
            let end = self.expect(Tok::RBracket, "`]`")?;
            bound = Some(ClassBound {
                min,
                max,
                span: start.to(&end),
            });
        }
        self.expect(Tok::LBrace, "`{`")?;
        let mut class = ClassDecl {
            name,
            span,
            is_abstract,
            cardinality,
            params,
            extends,
            bound,
            features: Vec::new(),
            invariants: Vec::new(),
        };
        loop {
            match self.peek().clone() {
                Tok::RBrace => {
                    self.bump();
                    break;
                }
                Tok::Eof => return self.fail(&["`}`"]),
                Tok::Ident(w) if w == "invariant" => match self.invariant() {
                    Ok(i) => class.invariants.push(i),
                    Err(_) => self.recover(),
                },
                _ => match self.feature() {
                    Ok(f) => class.features.push(f),
                    Err(_) => self.recover(),
                },
            }
        }
        Ok(class)
    }

    fn type_ref(&mut self) -> PResult<TypeRef> {
        let (name, span) = self.ident("type identifier")?;
        let mut args = Vec::new();
        let mut end = span.clone();
        if self.eat(&Tok::Lt) {
            loop {
                args.push(self.type_arg()?);
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
            end = self.expect(Tok::Gt, "`>`")?;
        }
        Ok(TypeRef::Named {
            name,
            args,
            span: span.to(&end),
        })
    }

    fn type_arg(&mut self) -> PResult<TypeRef> {
        if !self.at(&Tok::Question) {
            return self.type_ref();
        }
        let span = self.bump().span;
        let kind = if self.eat_word("extends").is_some() {
            Some(WildcardKind::Extends)
        } else if self.eat_word("super").is_some() {
            Some(WildcardKind::Super)
        } else {
            None
        };
        let bound = match kind {
            Some(k) => Some((k, Box::new(self.type_ref()?))),
            None => None,
        };
        let span = match &bound {
            Some((_, t)) => span.to(t.span()),
            None => span,
        };
        Ok(TypeRef::Wildcard { bound, span })
    }

    fn feature(&mut self) -> PResult<Feature> {
        let mut qualifiers = Vec::new();
        loop {
            let q = match self.peek() {
                Tok::Ident(w) if w == "model" => Qualifier::Model,
                Tok::Ident(w) if w == "ghost" => Qualifier::Ghost,
                Tok::Ident(w) if w == "nullable" => Qualifier::Nullable,
                _ => break,
            };
            qualifiers.push((q, self.bump().span));
        }
        let kind = if self.eat_word("attribute").is_some() {
            FeatureKind::Attribute
        } else if self.eat_word("property").is_some() {
            FeatureKind::Property
        } else if qualifiers.is_empty() {
            return self.fail(&["`attribute`", "`property`", "`invariant`", "`}`"]);
        } else {
            return self.fail(&["`attribute`", "`property`"]);
        };
        let cardinality = self.cardinality();
        let (name, span) = self.ident("feature name")?;
        self.expect(Tok::Colon, "`:`")?;
        let ty = self.type_ref()?;
        let mult = self.mult()?;
        let mut flags = Vec::new();
        let mut props = Vec::new();
        if self.eat(&Tok::LBrace) {
            loop {
                if self.eat(&Tok::RBrace) {
                    break;
                }
                let (word, wspan) = match kind {
                    FeatureKind::Attribute => self.ident("`id`, `derived` or `}`")?,
                    FeatureKind::Property => self.ident("`derived`, `composes`, a relation property or `}`")?,
                };
                match (kind, word.as_str()) {
                    (FeatureKind::Attribute, "id") => flags.push((Flag::Id, wspan)),
                    (_, "derived") => flags.push((Flag::Derived, wspan)),
                    (FeatureKind::Property, "composes") => flags.push((Flag::Composes, wspan)),
                    (FeatureKind::Property, w) if Prop::from_keyword(w).is_some() => {
                        props.push((Prop::from_keyword(w).unwrap(), wspan))
                    }
                    _ => {
                        self.pos -= 1;
                        let _ = match kind {
                            FeatureKind::Attribute => self.fail::<()>(&["`id`", "`derived`", "`}`"]),
                            FeatureKind::Property => {
                                self.fail(&["`derived`", "`composes`", "a relation property", "`}`"])
                            }
                        };
                        self.skip_past_rbrace();
                        return Err(Bail);
                    }
                }
                self.eat(&Tok::Comma);
            }
        }
        self.eat(&Tok::Semi);
        Ok(Feature {
            kind,
            qualifiers,
            cardinality,
            name,
            span,
            ty,
            mult,
            flags,
            props,
        })
    }

    fn mult(&mut self) -> PResult<MultSpec> {
        let start = self.expect(Tok::LBracket, "multiplicity `[`")?;
        let (lower, upper) = match self.peek().clone() {
            Tok::Star => {
                self.bump();
                (0, None)
            }
            Tok::Plus => {
                self.bump();
                (1, None)
            }
            Tok::Question => {
                self.bump();
                (0, Some(1))
            }
            Tok::Int(_) => {
                let (m, _) = self.int("constant")?;
                if self.eat(&Tok::DotDot) {
                    if self.eat(&Tok::Star) {
                        (m, None)
                    } else {
                        let (n, nspan) = self.int("constant or `*`")?;
                        if n < m {
                            self.errors.push(Diagnostic::error(
                                DiagnosticKind::SyntaxError,
                                Some(nspan),
                                format!("upper bound {n} is below lower bound {m}"),
                            ));
                            return Err(Bail);
                        }
                        (m, Some(n))
                    }
                } else {
                    (m, Some(m))
                }
            }
            _ => return self.fail(&["constant", "`*`", "`+`", "`?`"]),
        };
        let end = self.expect(Tok::RBracket, "`]`")?;
        Ok(MultSpec {
            lower,
            upper,
            span: start.to(&end),
        })
    }

    fn datatype(&mut self) -> PResult<DataTypeDecl> {
        self.expect_word("datatype")?;
        let (name, span) = self.ident("datatype name")?;
        self.expect(Tok::Semi, "`;`")?;
        Ok(DataTypeDecl { name, span })
    }

    fn enumeration(&mut self) -> PResult<EnumDecl> {
        self.expect_word("enum")?;
        let (name, span) = self.ident("enum name")?;
        self.expect(Tok::LBrace, "`{`")?;
        let mut literals = Vec::new();
        if !self.at(&Tok::RBrace) {
            loop {
                literals.push(self.ident("enum literal")?);
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
        }
        self.expect(Tok::RBrace, "`}`")?;
        Ok(EnumDecl { name, span, literals })
    }

    fn invariant(&mut self) -> PResult<Invariant> {
        let mut span = self.expect_word("invariant")?;
        let mut name = None;
        if let Tok::Ident(_) = self.peek() {
            let (n, s) = self.ident("invariant name")?;
            span = span.to(&s);
            name = Some(n);
        }
        self.expect(Tok::Colon, "`:`")?;
        let formula = self.formula()?;
        self.expect(Tok::Semi, "`;`")?;
        Ok(Invariant { name, span, formula })
    }

    // ---- formulas ----

    fn formula(&mut self) -> PResult<Formula> {
        let n = self.implies()?;
        self.want_formula(n)
    }

    fn want_formula(&mut self, n: Node) -> PResult<Formula> {
        match n {
            Node::F(f) => Ok(f),
            other => self.sort_error(&other, "a formula"),
        }
    }

    fn want_expr(&mut self, n: Node) -> PResult<Expr> {
        match n {
            Node::E(e) => Ok(e),
            other => self.sort_error(&other, "a relational expression"),
        }
    }

    fn want_int(&mut self, n: Node) -> PResult<IntExpr> {
        match n {
            Node::I(i) => Ok(i),
            other => self.sort_error(&other, "an integer expression"),
        }
    }

    fn sort_error<T>(&mut self, n: &Node, wanted: &str) -> PResult<T> {
        self.errors.push(Diagnostic::error(
            DiagnosticKind::SyntaxError,
            n.span(),
            format!("expected {wanted}, found {}", n.sort()),
        ));
        Err(Bail)
    }

    fn implies(&mut self) -> PResult<Node> {
        let lhs = self.or()?;
        if !self.at(&Tok::FatArrow) {
            return Ok(lhs);
        }
        self.bump();
        let a = self.want_formula(lhs)?;
        let rhs = self.implies()?;
        let b = self.want_formula(rhs)?;
        let span = join_spans(&a.span, &b.span);
        Ok(Node::F(a.implies(b).with_span(span)))
    }

    fn or(&mut self) -> PResult<Node> {
        let mut lhs = self.and()?;
        while self.eat(&Tok::OrOr) {
            let a = self.want_formula(lhs)?;
            let rhs = self.and()?;
            let b = self.want_formula(rhs)?;
            let span = join_spans(&a.span, &b.span);
            lhs = Node::F(a.or(b).with_span(span));
        }
        Ok(lhs)
    }

    fn and(&mut self) -> PResult<Node> {
        let mut lhs = self.not()?;
        while self.eat(&Tok::AndAnd) {
            let a = self.want_formula(lhs)?;
            let rhs = self.not()?;
            let b = self.want_formula(rhs)?;
            let span = join_spans(&a.span, &b.span);
            lhs = Node::F(a.and(b).with_span(span));
        }
        Ok(lhs)
    }

    fn is_quantifier(&self) -> bool {
        match self.peek() {
            Tok::Forall | Tok::Exists => true,
            Tok::Ident(w) if w == "all" || w == "exists" => true,
            Tok::Ident(w) if w == "some" => {
                matches!(self.peek_at(1), Tok::Ident(_)) && matches!(self.peek_at(2), Tok::Colon | Tok::Comma)
            }
            _ => false,
        }
    }

    fn not(&mut self) -> PResult<Node> {
        if self.at(&Tok::Bang) {
            let start = self.bump().span;
            let inner = self.not()?;
            let f = self.want_formula(inner)?;
            let span = join_spans(&Some(start), &f.span);
            return Ok(Node::F(f.not().with_span(span)));
        }
        if self.is_quantifier() {
            return self.quantifier().map(Node::F);
        }
        self.comparison()
    }

    fn quantifier(&mut self) -> PResult<Formula> {
        let tok = self.bump();
        let universal = matches!(&tok.tok, Tok::Forall) || matches!(&tok.tok, Tok::Ident(w) if w == "all");
        let decls = self.decls()?;
        self.expect(Tok::Bar, "`|`")?;
        let body = self.formula()?;
        let span = join_spans(&Some(tok.span), &body.span);
        let f = if universal {
            Formula::forall(decls, body)
        } else {
            Formula::exists(decls, body)
        };
        Ok(f.with_span(span))
    }

    fn decls(&mut self) -> PResult<Vec<Decl>> {
        let mut decls = Vec::new();
        loop {
            let mut names = vec![self.ident("variable name")?];
            while self.eat(&Tok::Comma) {
                names.push(self.ident("variable name")?);
            }
            self.expect(Tok::Colon, "`:`")?;
            let n = self.add()?;
            let e = self.want_expr(n)?;
            for (name, span) in names {
                if FORMULA_KEYWORDS.contains(&name.as_str()) || name == "class" {
                    self.errors.push(Diagnostic::error(
                        DiagnosticKind::SyntaxError,
                        Some(span),
                        format!("`{name}` is a keyword and cannot name a variable"),
                    ));
                    return Err(Bail);
                }
                decls.push(Decl::new(name, e.clone()));
            }
            if !(self.at(&Tok::Comma) && matches!(self.peek_at(1), Tok::Ident(_))) {
                break;
            }
            self.bump();
        }
        Ok(decls)
    }

    fn comparison(&mut self) -> PResult<Node> {
        let mult = match self.peek() {
            Tok::Ident(w) => match w.as_str() {
                "some" => Some(Multiplicity::Some),
                "one" => Some(Multiplicity::One),
                "lone" => Some(Multiplicity::Lone),
                "no" => Some(Multiplicity::No),
                _ => None,
            },
            _ => None,
        };
        if let Some(m) = mult {
            let start = self.bump().span;
            let n = self.add()?;
            let e = self.want_expr(n)?;
            let span = join_spans(&Some(start), &e.span);
            return Ok(Node::F(Formula::mult(m, e).with_span(span)));
        }
        let lhs = self.add()?;
        let op = self.peek().clone();
        if !matches!(op, Tok::In | Tok::Eq | Tok::Lt | Tok::Gt) {
            return Ok(lhs);
        }
        self.bump();
        let rhs = self.add()?;
        let span = join_spans(&lhs.span(), &rhs.span());
        let f = match (op, lhs, rhs) {
            (Tok::In, l, r) => {
                let a = self.want_expr(l)?;
                let b = self.want_expr(r)?;
                a.in_(b)
            }
            (Tok::Eq, Node::I(a), r) => {
                let b = self.want_int(r)?;
                Formula::compare(IntCmp::Eq, a, b)
            }
            (Tok::Eq, l, r) => {
                let a = self.want_expr(l)?;
                let b = self.want_expr(r)?;
                a.eq(b)
            }
            (op, l, r) => {
                let a = self.want_int(l)?;
                let b = self.want_int(r)?;
                let cmp = if op == Tok::Lt { IntCmp::Lt } else { IntCmp::Gt };
                Formula::compare(cmp, a, b)
            }
        };
        Ok(Node::F(f.with_span(span)))
    }

    fn add(&mut self) -> PResult<Node> {
        let mut lhs = self.mul()?;
        loop {
            let plus = match self.peek() {
                Tok::Plus => true,
                Tok::Minus => false,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.mul()?;
            let span = join_spans(&lhs.span(), &rhs.span());
            lhs = match lhs {
                Node::I(a) => {
                    let b = self.want_int(rhs)?;
                    let op = if plus { IntOp::Add } else { IntOp::Sub };
                    Node::I(IntExpr::arith(op, a, b).with_span(span))
                }
                other => {
                    let a = self.want_expr(other)?;
                    let b = self.want_expr(rhs)?;
                    let e = if plus { a.union(b) } else { a.difference(b) };
                    Node::E(e.with_span(span))
                }
            };
        }
    }

    fn mul(&mut self) -> PResult<Node> {
        let mut lhs = self.card()?;
        loop {
            let op = match self.peek() {
                Tok::Star => IntOp::Mul,
                Tok::Slash => IntOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let a = self.want_int(lhs)?;
            let rhs = self.card()?;
            let b = self.want_int(rhs)?;
            let span = join_spans(&a.span, &b.span);
            lhs = Node::I(IntExpr::arith(op, a, b).with_span(span));
        }
    }

    fn card(&mut self) -> PResult<Node> {
        if !self.at(&Tok::Hash) {
            return self.intersection();
        }
        let start = self.bump().span;
        let n = self.intersection()?;
        let e = self.want_expr(n)?;
        let span = join_spans(&Some(start), &e.span);
        Ok(Node::I(e.count().with_span(span)))
    }

    fn expr_chain(
        &mut self,
        op: Tok,
        next: fn(&mut Parser) -> PResult<Node>,
        build: fn(Expr, Expr) -> Expr,
    ) -> PResult<Node> {
        let mut lhs = next(self)?;
        while self.eat(&op) {
            let a = self.want_expr(lhs)?;
            let rhs = next(self)?;
            let b = self.want_expr(rhs)?;
            let span = join_spans(&a.span, &b.span);
            lhs = Node::E(build(a, b).with_span(span));
        }
        Ok(lhs)
    }

    fn intersection(&mut self) -> PResult<Node> {
        self.expr_chain(Tok::Amp, Parser::product, Expr::intersection)
    }

    fn product(&mut self) -> PResult<Node> {
        self.expr_chain(Tok::Arrow, Parser::join, Expr::product)
    }

    fn join(&mut self) -> PResult<Node> {
        self.expr_chain(Tok::Dot, Parser::unary, Expr::join)
    }

    fn unary(&mut self) -> PResult<Node> {
        let closure = match self.peek() {
            Tok::Tilde => false,
            Tok::Caret => true,
            _ => return self.primary(),
        };
        let start = self.bump().span;
        let n = self.unary()?;
        let e = self.want_expr(n)?;
        let span = join_spans(&Some(start), &e.span);
        let out = if closure { e.closure() } else { e.transpose() };
        Ok(Node::E(out.with_span(span)))
    }

    fn primary(&mut self) -> PResult<Node> {
        let tok = self.peek().clone();
        let start = self.span();
        match tok {
            Tok::Int(v) => {
                self.bump();
                Ok(Node::I(IntExpr::literal(v).with_span(Some(start))))
            }
            Tok::Str(s) => {
                self.bump();
                let rel = Relation::new(format!("\"{s}\""), 1, RelationKind::Builtin);
                Ok(Node::E(Expr::rel(&rel).with_span(Some(start))))
            }
            Tok::LParen => {
                self.bump();
                let inner = self.implies()?;
                if self.eat(&Tok::Question) {
                    let cond = self.want_formula(inner)?;
                    let n = self.add()?;
                    let a = self.want_expr(n)?;
                    self.expect(Tok::Colon, "`:`")?;
                    let n = self.add()?;
                    let b = self.want_expr(n)?;
                    let end = self.expect(Tok::RParen, "`)`")?;
                    return Ok(Node::E(Expr::ite(cond, a, b).with_span(Some(start.to(&end)))));
                }
                self.expect(Tok::RParen, "`)`")?;
                Ok(inner)
            }
            Tok::LBrace => {
                self.bump();
                let decls = self.decls()?;
                self.expect(Tok::Bar, "`|`")?;
                let body = self.formula()?;
                let end = self.expect(Tok::RBrace, "`}`")?;
                Ok(Node::E(
                    Expr::comprehension(decls, body).with_span(Some(start.to(&end))),
                ))
            }
            Tok::Pi => {
                self.bump();
                self.projection(start)
            }
            Tok::Ident(w) => match w.as_str() {
                "univ" => {
                    self.bump();
                    Ok(Node::E(Expr::univ().with_span(Some(start))))
                }
                "project" => {
                    self.bump();
                    self.projection(start)
                }
                "int2expr" => {
                    self.bump();
                    self.expect(Tok::LParen, "`(`")?;
                    let n = self.add()?;
                    let i = self.want_int(n)?;
                    let end = self.expect(Tok::RParen, "`)`")?;
                    Ok(Node::E(Expr::int_cast(i).with_span(Some(start.to(&end)))))
                }
                "sum" => {
                    self.bump();
                    self.expect(Tok::LParen, "`(`")?;
                    let n = self.add()?;
                    let e = self.want_expr(n)?;
                    let end = self.expect(Tok::RParen, "`)`")?;
                    Ok(Node::I(e.sum().with_span(Some(start.to(&end)))))
                }
                w if FORMULA_KEYWORDS.contains(&w) => self.fail(&["expression"]),
                _ => {
                    self.bump();
                    let mut name = w;
                    let mut span = start;
                    if self.at(&Tok::ColonColon) {
                        self.bump();
                        let (lit, lspan) = self.ident("enum literal")?;
                        name = format!("{name}::{lit}");
                        span = span.to(&lspan);
                    }
                    Ok(Node::E(Expr::var(name).with_span(Some(span))))
                }
            },
            _ => self.fail(&["expression"]),
        }
    }

    fn projection(&mut self, start: SourceSpan) -> PResult<Node> {
        self.expect(Tok::LParen, "`(`")?;
        let n = self.add()?;
        let e = self.want_expr(n)?;
        let mut cols = Vec::new();
        while self.eat(&Tok::Comma) {
            let n = self.add()?;
            cols.push(self.want_int(n)?);
        }
        let end = self.expect(Tok::RParen, "`)`")?;
        Ok(Node::E(e.project(cols).with_span(Some(start.to(&end)))))
    }
}

fn new_parser(text: &str, file: &Arc<str>) -> Parser {
    let (toks, errors) = lex(text, file);
    Parser { toks, pos: 0, errors }
}

/// Parses a whole `.aie` file. Every syntax error found after recovery is
/// returned.
pub fn parse(text: &str, file: &str) -> Result<MetamodelAst, Diagnostics> {
    let file: Arc<str> = Arc::from(file);
    let mut p = new_parser(text, &file);
    let ast = p.file(file);
    if p.errors.is_empty() {
        Ok(ast)
    } else {
        Err(Diagnostics(p.errors))
    }
}

/// Parses a single formula, as written in an invariant body.
pub fn parse_formula(text: &str, file: &str) -> Result<Formula, Diagnostics> {
    let file: Arc<str> = Arc::from(file);
    let mut p = new_parser(text, &file);
    let f = p.formula();
    if let Ok(f) = f {
        if p.at(&Tok::Eof) && p.errors.is_empty() {
            return Ok(f);
        }
        if p.errors.is_empty() {
            let _ = p.fail::<()>(&["end of formula"]);
        }
    }
    Err(Diagnostics(p.errors))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::ExprKind;

    #[test]
    fn empty_package() {
        let ast = parse("package p { }", "t.aie").unwrap();
        assert_eq!(ast.packages.len(), 1);
        assert!(ast.packages[0].classifiers.is_empty());
    }

    #[test]
    fn extends_without_type() {
        let err = parse("package p { class C extends { } }", "t.aie").unwrap_err();
        assert_eq!(err.0.len(), 1);
        let d = &err.0[0];
        assert_eq!(d.kind, DiagnosticKind::SyntaxError);
        assert_eq!(d.span.as_ref().unwrap().column, 29);
        assert_eq!(d.expected, vec!["type identifier"]);
    }

    #[test]
    fn one_error_per_recovery_point() {
        let src = "package p {\n class A { property x : A [?] { bogus } ; property y : [*]; }\n class B { }\n}";
        let err = parse(src, "t.aie").unwrap_err();
        assert_eq!(err.0.len(), 2, "{err}");
    }

    #[test]
    fn precedence() {
        let f = parse_formula("all x: A - B | !x in x.^r && some x.~r", "t").unwrap();
        assert_eq!(f.to_string(), "all x: A - B | !(x in x.^r) && some x.~r");
        let g = parse_formula("some a => b in c => d = e", "t").unwrap();
        assert!(
            matches!(&g.kind, crate::kernel::FormulaKind::Implies(_, r) if matches!(r.kind, crate::kernel::FormulaKind::Implies(..)))
        );
        assert_eq!(g.to_string(), "some a => b in c => d = e");
    }

    #[test]
    fn sorts_are_inferred() {
        let f = parse_formula("#A + 1 < #(B & C) * 2", "t").unwrap();
        assert_eq!(f.to_string(), "#A + 1 < #(B & C) * 2");
        assert!(parse_formula("A + 1 = B", "t").is_err());
        assert!(parse_formula("A", "t").is_err());
    }

    #[test]
    fn conditional_comprehension_projection() {
        let f = parse_formula(
            "(some A ? B : C) = {x: A, y: B | x in y.r} + project(r, 1, 0).s + int2expr(sum(A))",
            "t",
        );
        let f = f.unwrap();
        let again = parse_formula(&f.to_string(), "t").unwrap();
        assert_eq!(f, again);
    }

    #[test]
    fn string_and_enum_literals() {
        let f = parse_formula("one name.\"Ford F-150 XLT\" && c = Color::Red", "t").unwrap();
        let s = f.to_string();
        assert!(s.contains("\"Ford F-150 XLT\""), "{s}");
        assert!(s.contains("Color::Red"), "{s}");
    }

    #[test]
    fn some_quantifier_lookahead() {
        let f = parse_formula("some x: A | some x.r", "t").unwrap();
        assert!(matches!(f.kind, crate::kernel::FormulaKind::Exists(..)));
        let spans = parse_formula("some A.r", "t").unwrap();
        if let crate::kernel::FormulaKind::Mult(_, e) = &spans.kind {
            assert!(matches!(e.kind, ExprKind::Join(..)));
            assert_eq!(e.span.as_ref().unwrap().length, 3);
        } else {
            panic!();
        }
    }
}
