use std::fmt::Write;

use super::ast::*;

/// Renders an AST back to `.aie` text that parses to the same tree.
pub fn print_metamodel(ast: &MetamodelAst) -> String {
    let mut out = String::new();
    for p in &ast.packages {
        package(&mut out, p, 0);
    }
    out
}

fn indent(out: &mut String, depth: usize) {
    for _ in 0..depth {
        out.push_str("    ");
    }
}

fn package(out: &mut String, p: &Package, depth: usize) {
    indent(out, depth);
    let _ = writeln!(out, "package {} {{", p.name);
    for q in &p.packages {
        package(out, q, depth + 1);
    }
    for c in &p.classifiers {
        classifier(out, c, depth + 1);
    }
    for i in &p.invariants {
        invariant(out, i, depth + 1);
    }
    indent(out, depth);
    out.push_str("}\n");
}

fn classifier(out: &mut String, c: &Classifier, depth: usize) {
    indent(out, depth);
    match c {
        Classifier::DataType(d) => {
            let _ = writeln!(out, "datatype {};", d.name);
        }
        Classifier::Enum(e) => {
            let lits: Vec<&str> = e.literals.iter().map(|(l, _)| l.as_str()).collect();
            let _ = writeln!(out, "enum {} {{ {} }}", e.name, lits.join(", "));
        }
        Classifier::Class(c) => class(out, c, depth),
    }
}

fn class(out: &mut String, c: &ClassDecl, depth: usize) {
    if c.is_abstract {
        out.push_str("abstract ");
    }
    if let Some((m, _)) = &c.cardinality {
        let _ = write!(out, "{} ", m.keyword());
    }
    let _ = write!(out, "class {}", c.name);
    if !c.params.is_empty() {
        out.push('<');
        for (i, p) in c.params.iter().enumerate() {
            if i > 0 {
                out.push_str(", ");
            }
            out.push_str(&p.name);
            for (k, b) in p.bounds.iter().enumerate() {
                out.push_str(if k == 0 { " extends " } else { " & " });
                let _ = write!(out, "{b}");
            }
        }
        out.push('>');
    }
    for (i, t) in c.extends.iter().enumerate() {
        out.push_str(if i == 0 { " extends " } else { ", " });
        let _ = write!(out, "{t}");
    }
    if let Some(b) = &c.bound {
        let _ = write!(out, " [{}, {}]", b.min, b.max);
    }
    out.push_str(" {\n");
    for f in &c.features {
        feature(out, f, depth + 1);
    }
    for i in &c.invariants {
        invariant(out, i, depth + 1);
    }
    indent(out, depth);
    out.push_str("}\n");
}

fn feature(out: &mut String, f: &Feature, depth: usize) {
    indent(out, depth);
    for (q, _) in &f.qualifiers {
        let _ = write!(out, "{} ", q.keyword());
    }
    out.push_str(match f.kind {
        FeatureKind::Attribute => "attribute ",
        FeatureKind::Property => "property ",
    });
    if let Some((m, _)) = &f.cardinality {
        let _ = write!(out, "{} ", m.keyword());
    }
    let _ = write!(out, "{} : {} {}", f.name, f.ty, f.mult);
    let words: Vec<&str> = f
        .flags
        .iter()
        .map(|(x, _)| x.keyword())
        .chain(f.props.iter().map(|(p, _)| p.keyword()))
        .collect();
    if !words.is_empty() {
        let _ = write!(out, " {{ {} }}", words.join(", "));
    }
    out.push_str(";\n");
}

fn invariant(out: &mut String, i: &Invariant, depth: usize) {
    indent(out, depth);
    out.push_str("invariant");
    if let Some(n) = &i.name {
        let _ = write!(out, " {n}");
    }
    let _ = writeln!(out, ": {};", i.formula);
}
