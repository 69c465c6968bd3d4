use std::fmt;
use std::sync::Arc;

/// Name of a source file as given on the command line.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct FileName(Arc<str>);

impl FileName {
    pub fn new(name: impl AsRef<str>) -> Self {
        FileName(Arc::from(name.as_ref()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for FileName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// 1-based source position range. `end_column` is the column of the last
/// character covered, so a one-character token has `column == end_column`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct SourceSpan {
    pub file: FileName,
    pub line: u32,
    pub column: u32,
    pub end_line: u32,
    pub end_column: u32,
}

impl SourceSpan {
    pub fn new(file: FileName, line: u32, column: u32, end_line: u32, end_column: u32) -> Self {
        SourceSpan {
            file,
            line,
            column,
            end_line,
            end_column,
        }
    }

    /// Smallest span covering both `self` and `other`.
    pub fn to(&self, other: &SourceSpan) -> SourceSpan {
        let (line, column) = (self.line, self.column).min((other.line, other.column));
        let (end_line, end_column) = (self.end_line, self.end_column).max((other.end_line, other.end_column));
        SourceSpan {
            file: self.file.clone(),
            line,
            column,
            end_line,
            end_column,
        }
    }

    pub fn contains(&self, other: &SourceSpan) -> bool {
        (self.line, self.column) <= (other.line, other.column)
            && (other.end_line, other.end_column) <= (self.end_line, self.end_column)
    }

    pub fn start(&self) -> (u32, u32) {
        (self.line, self.column)
    }
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.file, self.line, self.column)
    }
}
