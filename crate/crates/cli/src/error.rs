use std::path::Path;

use gsi_core::error::GsiError;
use serde_json::{json, Value};

/// Exit 1 for bad input, exit 2 for numerical failures.
#[derive(Debug)]
pub enum CliError {
    User(String),
    Numerical { kind: &'static str, message: String, detail: Value },
}

impl CliError {
    pub fn from_core(e: GsiError) -> Self {
        let message = e.to_string();
        match e {
            GsiError::Infeasible(residual) => CliError::Numerical {
                kind: "infeasible",
                message,
                detail: json!({ "phase_one_residual": residual }),
            },
            GsiError::SingularBlock { value } => CliError::Numerical {
                kind: "singular_block",
                message,
                detail: json!({ "eigenvalue": value }),
            },
            _ => CliError::User(message),
        }
    }

    pub fn context(self, path: &Path) -> Self {
        match self {
            CliError::User(m) => CliError::User(format!("{}: {m}", path.display())),
            other => other,
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::User(_) => 1,
            CliError::Numerical { .. } => 2,
        }
    }

    pub fn report(&self) {
        match self {
            CliError::User(m) => eprintln!("error: {m}"),
            CliError::Numerical { kind, message, detail } => {
                let diag = json!({ "error": kind, "message": message, "detail": detail });
                eprintln!("{diag}");
            }
        }
    }
}

impl From<GsiError> for CliError {
    fn from(e: GsiError) -> Self {
        CliError::from_core(e)
    }
}
