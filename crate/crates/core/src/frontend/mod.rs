//! Structure files, the expression language, reports and the `ewcheck`
//! command line.

mod cli;
mod ewfile;
mod parser;
mod report;

use thiserror::Error;

use crate::catalog::CatalogError;
use crate::expr::ExprError;
use crate::numeric::NumericError;
use crate::tensor::TensorError;
use crate::weyl::WeylError;

pub use cli::{run_command, EXIT_CHECK_FAILED, EXIT_OK, EXIT_POLE, EXIT_USAGE};
pub use ewfile::{parse_structure, StructureFile};
pub use parser::{parse_expr, Scope};
pub use report::{render_text, CheckOutcome, ClassificationSection, Nullity, Report, Vanishing, Witness};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParseError {
    #[error("{line}:{col}: syntax error: {message}")]
    Syntax { line: usize, col: usize, message: String },
    #[error("{line}:{col}: unknown symbol `{name}`")]
    UnknownSymbol { line: usize, col: usize, name: String },
    #[error("{line}:{col}: duplicate assignment to {target}")]
    DuplicateAssignment { line: usize, col: usize, target: String },
    #[error("{line}:{col}: dimension error: {message}")]
    Dimension { line: usize, col: usize, message: String },
    #[error("{line}:{col}: metric is singular")]
    Singular { line: usize, col: usize },
    #[error("{line}:{col}: {source}")]
    Math { line: usize, col: usize, source: ExprError },
}

impl ParseError {
    pub(crate) fn syntax(line: usize, col: usize, message: impl Into<String>) -> ParseError {
        ParseError::Syntax {
            line,
            col,
            message: message.into(),
        }
    }

    pub(crate) fn math(line: usize, col: usize, source: ExprError) -> ParseError {
        ParseError::Math { line, col, source }
    }

    pub fn position(&self) -> (usize, usize) {
        match self {
            ParseError::Syntax { line, col, .. }
            | ParseError::UnknownSymbol { line, col, .. }
            | ParseError::DuplicateAssignment { line, col, .. }
            | ParseError::Dimension { line, col, .. }
            | ParseError::Singular { line, col }
            | ParseError::Math { line, col, .. } => (*line, *col),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FrontendError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Weyl(#[from] WeylError),
    #[error(transparent)]
    Catalog(#[from] CatalogError),
    #[error(transparent)]
    Numeric(#[from] NumericError),
    #[error("{0}")]
    Usage(String),
}

impl From<TensorError> for FrontendError {
    fn from(e: TensorError) -> Self {
        FrontendError::Weyl(e.into())
    }
}

impl From<ExprError> for FrontendError {
    fn from(e: ExprError) -> Self {
        FrontendError::Weyl(e.into())
    }
}
