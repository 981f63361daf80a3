use std::fmt;

use crate::span::{excerpt, SourceSpan};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DiagnosticKind {
    SyntaxError,
    UnknownName,
    CyclicInheritance,
    ArityMismatch,
    TypeMismatch,
    UnsatisfiedParameterBound,
    DuplicateFeature,
    DuplicateName,
    GhostReference,
    NonBinaryQualifier,
    InstantiationLimit,
    UnknownClass,
    UnknownFeature,
    AbstractInstantiation,
    ScopeBelowAssertion,
    CardinalityScopeConflict,
    ExtraGrammatical,
}

impl DiagnosticKind {
    pub fn code(self) -> &'static str {
        match self {
            DiagnosticKind::SyntaxError => "SyntaxError",
            DiagnosticKind::UnknownName => "UnknownName",
            DiagnosticKind::CyclicInheritance => "CyclicInheritance",
            DiagnosticKind::ArityMismatch => "ArityMismatch",
            DiagnosticKind::TypeMismatch => "TypeMismatch",
            DiagnosticKind::UnsatisfiedParameterBound => "UnsatisfiedParameterBound",
            DiagnosticKind::DuplicateFeature => "DuplicateFeature",
            DiagnosticKind::DuplicateName => "DuplicateName",
            DiagnosticKind::GhostReference => "GhostReference",
            DiagnosticKind::NonBinaryQualifier => "NonBinaryQualifier",
            DiagnosticKind::InstantiationLimit => "InstantiationLimit",
            DiagnosticKind::UnknownClass => "UnknownClass",
            DiagnosticKind::UnknownFeature => "UnknownFeature",
            DiagnosticKind::AbstractInstantiation => "AbstractInstantiation",
            DiagnosticKind::ScopeBelowAssertion => "ScopeBelowAssertion",
            DiagnosticKind::CardinalityScopeConflict => "CardinalityScopeConflict",
            DiagnosticKind::ExtraGrammatical => "ExtraGrammatical",
        }
    }
}

impl fmt::Display for DiagnosticKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostic {
    pub severity: Severity,
    pub kind: DiagnosticKind,
    pub message: String,
    pub span: Option<SourceSpan>,
    /// Tokens that would have been accepted, for syntax errors.
    pub expected: Vec<String>,
}

impl Diagnostic {
    pub fn error(kind: DiagnosticKind, span: Option<SourceSpan>, message: impl Into<String>) -> Self {
        Diagnostic {
            severity: Severity::Error,
            kind,
            message: message.into(),
            span,
            expected: Vec::new(),
        }
    }

    pub fn warning(kind: DiagnosticKind, span: Option<SourceSpan>, message: impl Into<String>) -> Self {
        Diagnostic {
            severity: Severity::Warning,
            ..Diagnostic::error(kind, span, message)
        }
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }

    /// `error[Code]: message`, the location, and a caret excerpt when the
    /// source text is available.
    pub fn render(&self, source: Option<&str>) -> String {
        let level = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        let mut out = format!("{level}[{}]: {}\n", self.kind.code(), self.message);
        if let Some(span) = &self.span {
            out.push_str(&format!("  --> {span}\n"));
            if let Some(src) = source {
                out.push_str(&excerpt(src, span));
            }
        }
        out
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render(None))
    }
}

/// A batch of diagnostics that stopped a pipeline stage.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostics(pub Vec<Diagnostic>);

impl Diagnostics {
    pub fn render(&self, source: Option<&str>) -> String {
        self.0.iter().map(|d| d.render(source)).collect()
    }

    pub fn kinds(&self) -> Vec<DiagnosticKind> {
        self.0.iter().map(|d| d.kind).collect()
    }
}

impl fmt::Display for Diagnostics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render(None))
    }
}

impl std::error::Error for Diagnostics {}
