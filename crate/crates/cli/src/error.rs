use thiserror::Error;

use tensornet::Error as CoreError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("config parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },

    #[error("invalid value for `{field}`: {message}")]
    Validation { field: String, message: String },

    #[error(transparent)]
    Core(#[from] CoreError),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    /// 1 usage, 2 validation, 3 numerical, 4 resource.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Parse { .. } | CliError::Validation { .. } => 2,
            CliError::Io { .. } => 4,
            CliError::Core(e) => match e {
                CoreError::TooLarge { .. } => 4,
                CoreError::TooFewSites { .. }
                | CoreError::BadXi(_)
                | CoreError::BadBeta(_)
                | CoreError::UnsupportedModel(_)
                | CoreError::InvalidArgument(_)
                | CoreError::BadOrder { .. }
                | CoreError::SiteOutOfRange { .. } => 2,
                _ => 3,
            },
        }
    }

    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::Usage("x".into()).exit_code(), 1);
        assert_eq!(
            CliError::Validation {
                field: "model.n".into(),
                message: String::new()
            }
            .exit_code(),
            2
        );
        assert_eq!(CliError::from(CoreError::UnsupportedModel("exp_decay")).exit_code(), 2);
        assert_eq!(CliError::from(CoreError::NumericalFailure("svd".into())).exit_code(), 3);
        assert_eq!(CliError::from(CoreError::NoConvergence { iters: 1, residual: 1.0 }).exit_code(), 3);
        assert_eq!(CliError::from(CoreError::TooLarge { dim: 9, limit: 1 }).exit_code(), 4);
        assert_eq!(CliError::io("out.json", std::io::Error::other("disk full")).exit_code(), 4);
    }
}
