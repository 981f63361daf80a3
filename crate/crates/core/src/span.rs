use std::fmt;
use std::sync::Arc;

/// A region of a source file. Lines and columns are 1-based; `length` counts
/// characters on the starting line.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SourceSpan {
    pub file: Arc<str>,
    pub line: u32,
    pub column: u32,
    pub length: u32,
}

impl SourceSpan {
    pub fn new(file: impl Into<Arc<str>>, line: u32, column: u32, length: u32) -> Self {
        SourceSpan {
            file: file.into(),
            line,
            column,
            length,
        }
    }

    /// Smallest span covering `self` and `other` when both start on the same
    /// line; otherwise `self` extended to the end of its line is not knowable,
    /// so `self` is returned unchanged.
    pub fn to(&self, other: &SourceSpan) -> SourceSpan {
        if other.line == self.line && other.column + other.length >= self.column {
            let end = (other.column + other.length).max(self.column + self.length);
            SourceSpan {
                length: end - self.column,
                ..self.clone()
            }
        } else {
            self.clone()
        }
    }
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.file, self.line, self.column)
    }
}

/// Renders the source line under `span` followed by a caret underline.
pub fn excerpt(source: &str, span: &SourceSpan) -> String {
    let Some(text) = source.lines().nth(span.line.saturating_sub(1) as usize) else {
        return String::new();
    };
    let gutter = span.line.to_string();
    let pad = " ".repeat(gutter.len());
    let col = span.column.saturating_sub(1) as usize;
    let lead: String = text
        .chars()
        .take(col)
        .map(|c| if c == '\t' { '\t' } else { ' ' })
        .collect();
    let carets = "^".repeat(span.length.max(1) as usize);
    format!("{pad} |\n{gutter} | {text}\n{pad} | {lead}{carets}\n")
}
