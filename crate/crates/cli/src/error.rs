use std::fmt;

/// Failure of a command, grouped into categories that map to exit codes.
#[derive(Debug)]
pub struct CliError {
    pub category: Category,
    pub message: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Category {
    Usage,
    Input,
    Domain,
    Numerical,
    Fit,
    Lookup,
    Io,
}

impl Category {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Usage => "usage",
            Self::Input => "input",
            Self::Domain => "domain",
            Self::Numerical => "numerical",
            Self::Fit => "fit",
            Self::Lookup => "lookup",
            Self::Io => "io",
        }
    }

    pub fn exit_code(self) -> u8 {
        match self {
            Self::Usage => 2,
            Self::Input => 3,
            Self::Domain => 4,
            Self::Numerical => 5,
            Self::Fit => 6,
            Self::Lookup => 7,
            Self::Io => 8,
        }
    }
}

impl CliError {
    pub fn new(category: Category, message: impl Into<String>) -> Self {
        Self { category, message: message.into() }
    }

    pub fn usage(message: impl Into<String>) -> Self {
        Self::new(Category::Usage, message)
    }

    pub fn input(message: impl Into<String>) -> Self {
        Self::new(Category::Input, message)
    }

    /// One-line JSON for stderr.
    pub fn to_json(&self) -> String {
        serde_json::json!({
            "schema_version": crate::SCHEMA_VERSION,
            "error": { "category": self.category.as_str(), "message": self.message },
        })
        .to_string()
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} error: {}", self.category.as_str(), self.message)
    }
}

impl std::error::Error for CliError {}

impl From<specdens::Error> for CliError {
    fn from(e: specdens::Error) -> Self {
        use specdens::Error as E;
        let category = match &e {
            E::Domain(_) | E::Precondition(_) => Category::Domain,
            E::Resolution(_) | E::Accuracy { .. } | E::TailNeeded { .. } | E::Truncation { .. } => Category::Numerical,
            E::RankDeficient(_) | E::NonConvergence { .. } | E::Fit(_) => Category::Fit,
            E::UnknownPreset { .. } => Category::Lookup,
            E::InvalidData(_) => Category::Input,
        };
        Self::new(category, e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::new(Category::Io, e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;
