use std::collections::HashSet;
use std::sync::Arc;

use super::{Link, LinkTarget, ObjectDecl, PartialInstance};
use crate::frontend::lexer::{lex, Tok, Token};
use crate::frontend::{Diagnostic, DiagnosticKind, Diagnostics, ResolvedMetamodel, Ty};
use crate::span::SourceSpan;

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

type PResult<T> = Result<T, Diagnostic>;

impl Parser {
    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.tokens[(self.pos + k).min(self.tokens.len() - 1)].tok
    }

    fn span(&self) -> SourceSpan {
        self.tokens[self.pos].span.clone()
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn fail<T>(&self, expected: &str) -> PResult<T> {
        let found = self.peek().to_string();
        let mut d = Diagnostic::error(
            DiagnosticKind::SyntaxError,
            Some(self.span()),
            format!("expected {expected}, found {found}"),
        );
        d.expected = vec![expected.to_string()];
        Err(d)
    }

    fn ident(&mut self, what: &str) -> PResult<(String, SourceSpan)> {
        match self.peek().clone() {
            Tok::Ident(s) => Ok((s, self.bump().span)),
            _ => self.fail(what),
        }
    }

    fn word(&mut self, w: &str) -> PResult<SourceSpan> {
        match self.peek() {
            Tok::Ident(s) if s == w => Ok(self.bump().span),
            _ => self.fail(&format!("`{w}`")),
        }
    }

    fn expect(&mut self, t: Tok, what: &str) -> PResult<SourceSpan> {
        if *self.peek() == t {
            Ok(self.bump().span)
        } else {
            self.fail(what)
        }
    }

    fn is_word(&self, w: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == w)
    }

    /// `Name` or `Name<Arg, ...>`, rendered in the resolver's display form.
    fn class_name(&mut self) -> PResult<(String, SourceSpan)> {
        let (mut name, span) = self.ident("class name")?;
        let mut end = span.clone();
        if *self.peek() == Tok::Lt {
            self.bump();
            let mut args = Vec::new();
            loop {
                let (a, s) = self.class_name()?;
                end = s;
                args.push(a);
                if *self.peek() == Tok::Comma {
                    self.bump();
                } else {
                    break;
                }
            }
            end = self.expect(Tok::Gt, "`>`")?.to(&end);
            name = format!("{name}<{}>", args.join(", "));
        }
        Ok((name, span.to(&end)))
    }
}

enum RawTarget {
    Ident(String),
    Enum(String, String),
    Str(String),
    Int(i64),
}

struct RawLink {
    source: (String, SourceSpan),
    feature: (String, SourceSpan),
    target: (RawTarget, SourceSpan),
    span: SourceSpan,
}

fn parse_link(p: &mut Parser) -> PResult<RawLink> {
    let source = p.ident("object name")?;
    p.expect(Tok::Dot, "`.`")?;
    let feature = p.ident("feature name")?;
    p.expect(Tok::Eq, "`=`")?;
    let start = p.span();
    let target = match p.peek().clone() {
        Tok::Str(s) => {
            p.bump();
            RawTarget::Str(s)
        }
        Tok::Int(v) => {
            p.bump();
            RawTarget::Int(v)
        }
        Tok::Minus => {
            p.bump();
            match p.peek().clone() {
                Tok::Int(v) => {
                    p.bump();
                    RawTarget::Int(-v)
                }
                _ => return p.fail("integer"),
            }
        }
        Tok::Ident(s) => {
            p.bump();
            if *p.peek() == Tok::ColonColon {
                p.bump();
                let (l, _) = p.ident("enum literal")?;
                RawTarget::Enum(s, l)
            } else {
                RawTarget::Ident(s)
            }
        }
        _ => return p.fail("object, string, integer or enum literal"),
    };
    let end = p.tokens[p.pos.saturating_sub(1)].span.clone();
    let tspan = start.to(&end);
    if *p.peek() == Tok::Semi {
        p.bump();
    }
    Ok(RawLink {
        span: source.1.to(&end),
        source,
        feature,
        target: (target, tspan),
    })
}

struct Raw {
    name: String,
    package: (String, SourceSpan),
    objects: Vec<(String, SourceSpan, String, SourceSpan)>,
    links: Vec<RawLink>,
}

fn parse_raw(p: &mut Parser) -> PResult<Raw> {
    p.word("instance")?;
    let (name, _) = p.ident("instance name")?;
    p.word("of")?;
    let package = p.ident("package name")?;
    p.expect(Tok::LBrace, "`{`")?;
    let mut raw = Raw {
        name,
        package,
        objects: Vec::new(),
        links: Vec::new(),
    };
    let mut in_model = false;
    loop {
        match p.peek() {
            Tok::RBrace if in_model => {
                p.bump();
                in_model = false;
                continue;
            }
            Tok::RBrace => {
                p.bump();
                break;
            }
            Tok::Eof => return p.fail("`}`"),
            _ => {}
        }
        if p.is_word("inferred") && matches!(p.peek_at(1), Tok::Ident(_)) {
            p.bump();
        }
        if !in_model && p.is_word("model") && *p.peek_at(1) == Tok::LBrace {
            p.bump();
            p.bump();
            in_model = true;
            continue;
        }
        if !in_model && p.is_word("object") && matches!(p.peek_at(1), Tok::Ident(_)) {
            p.bump();
            let (o, os) = p.ident("object name")?;
            p.expect(Tok::Colon, "`:`")?;
            let (c, cs) = p.class_name()?;
            if *p.peek() == Tok::Semi {
                p.bump();
            }
            raw.objects.push((o, os, c, cs));
            continue;
        }
        raw.links.push(parse_link(p)?);
    }
    if *p.peek() != Tok::Eof {
        return p.fail("end of input");
    }
    Ok(raw)
}

/// Parses a `.ais` instance and checks it against `mm`.
pub fn parse_instance(text: &str, file: &str, mm: &ResolvedMetamodel) -> Result<PartialInstance, Diagnostics> {
    let file: Arc<str> = Arc::from(file);
    let (tokens, lex_errors) = lex(text, &file);
    if !lex_errors.is_empty() {
        return Err(Diagnostics(lex_errors));
    }
    let mut p = Parser { tokens, pos: 0 };
    let raw = parse_raw(&mut p).map_err(|d| Diagnostics(vec![d]))?;
    let mut errors = Vec::new();
    let e = |kind, span: &SourceSpan, msg: String| Diagnostic::error(kind, Some(span.clone()), msg);
    if !mm.package.is_empty() && raw.package.0 != mm.package {
        errors.push(e(
            DiagnosticKind::UnknownName,
            &raw.package.1,
            format!(
                "instance is of package `{}` but the metamodel declares `{}`",
                raw.package.0, mm.package
            ),
        ));
    }
    let mut taken: HashSet<String> = HashSet::new();
    for c in mm.classes.keys() {
        taken.insert(c.clone());
    }
    for f in &mm.features {
        taken.insert(f.relation.name().to_string());
        taken.insert(f.name.clone());
    }
    for name in ["class", "univ", "String", "Int"] {
        taken.insert(name.to_string());
    }
    taken.extend(mm.enums.keys().cloned());
    taken.extend(mm.datatypes.iter().cloned());
    let mut objects: Vec<ObjectDecl> = Vec::new();
    for (o, os, c, cs) in raw.objects {
        let Some(info) = mm.class(&c) else {
            errors.push(e(DiagnosticKind::UnknownClass, &cs, format!("unknown class `{c}`")));
            continue;
        };
        if info.is_abstract {
            errors.push(e(
                DiagnosticKind::AbstractInstantiation,
                &cs,
                format!("cannot instantiate abstract class `{c}`"),
            ));
            continue;
        }
        if taken.contains(&o) || objects.iter().any(|x| x.name == o) {
            errors.push(e(
                DiagnosticKind::DuplicateName,
                &os,
                format!("`{o}` is already defined"),
            ));
            continue;
        }
        objects.push(ObjectDecl {
            name: o,
            class: c,
            span: os.to(&cs),
        });
    }
    let mut links: Vec<Link> = Vec::new();
    for l in raw.links {
        let Some(src) = objects.iter().find(|o| o.name == l.source.0) else {
            errors.push(e(
                DiagnosticKind::UnknownName,
                &l.source.1,
                format!("unknown object `{}`", l.source.0),
            ));
            continue;
        };
        let Some(f) = mm.feature_named(&src.class, &l.feature.0) else {
            errors.push(e(
                DiagnosticKind::UnknownFeature,
                &l.feature.1,
                format!("`{}` has no feature `{}`", src.class, l.feature.0),
            ));
            continue;
        };
        // Per-owner targets are narrower than the overall target for generic owners.
        let target_tys = f
            .owner_targets
            .iter()
            .find(|(o, _)| mm.is_subclass(&src.class, o))
            .map(|(_, t)| t.clone())
            .unwrap_or_else(|| f.target.clone());
        let (raw_t, tspan) = &l.target;
        let (target, ty) =
            match raw_t {
                RawTarget::Ident(name) => {
                    if let Some(obj) = objects.iter().find(|o| &o.name == name) {
                        (LinkTarget::Object(name.clone()), Ty::Class(obj.class.clone()))
                    } else if let Some((en, _)) = mm.enums.iter().find(|(en, lits)| {
                        target_tys.contains(&Ty::Enum((*en).clone())) && lits.iter().any(|x| x == name)
                    }) {
                        (LinkTarget::Enum(en.clone(), name.clone()), Ty::Enum(en.clone()))
                    } else {
                        errors.push(e(
                            DiagnosticKind::UnknownName,
                            tspan,
                            format!("unknown object `{name}`"),
                        ));
                        continue;
                    }
                }
                RawTarget::Enum(en, lit) => {
                    if !mm.enums.get(en).is_some_and(|ls| ls.contains(lit)) {
                        errors.push(e(
                            DiagnosticKind::UnknownName,
                            tspan,
                            format!("unknown enum literal `{en}::{lit}`"),
                        ));
                        continue;
                    }
                    (LinkTarget::Enum(en.clone(), lit.clone()), Ty::Enum(en.clone()))
                }
                RawTarget::Str(s) => (LinkTarget::Str(s.clone()), Ty::String),
                RawTarget::Int(v) => (LinkTarget::Int(*v), Ty::Int),
            };
        if !mm.ty_fits(&ty, &target_tys) {
            let expected: Vec<String> = target_tys.iter().map(Ty::to_string).collect();
            errors.push(e(
                DiagnosticKind::TypeMismatch,
                tspan,
                format!(
                    "`{}.{}` expects {}, found {ty}",
                    src.name,
                    f.name,
                    if expected.is_empty() {
                        "nothing".to_string()
                    } else {
                        expected.join(" or ")
                    }
                ),
            ));
            continue;
        }
        let link = Link {
            source: src.name.clone(),
            feature: f.name.clone(),
            relation: f.relation.clone(),
            target,
            span: l.span,
        };
        if !links
            .iter()
            .any(|x| x.source == link.source && x.relation == link.relation && x.target == link.target)
        {
            links.push(link);
        }
    }
    if !errors.is_empty() {
        return Err(Diagnostics(errors));
    }
    Ok(PartialInstance {
        name: raw.name,
        package: raw.package.0,
        file,
        objects,
        links,
    })
}
