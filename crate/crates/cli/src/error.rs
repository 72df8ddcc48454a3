use ipd_core::zd::ZdError;
use serde_json::{json, Value};

pub const EXIT_INFEASIBLE: i32 = 2;
pub const EXIT_CONFIG: i32 = 3;
pub const EXIT_IO: i32 = 74;
pub const EXIT_USAGE: i32 = 64;

#[derive(Debug)]
pub enum CliError {
    /// Malformed flags or values.
    Usage(String),
    /// Well-formed input that does not describe a valid strategy.
    Infeasible { message: String, details: Value },
    /// Well-formed input that fails validation.
    Config(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Infeasible { .. } => EXIT_INFEASIBLE,
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Io(_) => EXIT_IO,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Infeasible { .. } => "infeasible",
            CliError::Config(_) => "invalid_config",
            CliError::Io(_) => "io",
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Config(m) | CliError::Io(m) => m,
            CliError::Infeasible { message, .. } => message,
        }
    }

    pub fn to_json(&self) -> Value {
        let mut body = json!({
            "kind": self.kind(),
            "message": self.message(),
            "exit_code": self.exit_code(),
        });
        if let CliError::Infeasible { details, .. } = self {
            body["details"] = details.clone();
        }
        json!({ "error": body })
    }
}

impl From<ZdError> for CliError {
    fn from(e: ZdError) -> Self {
        match &e {
            ZdError::Infeasible(f) => CliError::Infeasible {
                message: e.to_string(),
                details: json!({
                    "candidate": f.candidate,
                    "violations": f.violations.iter().map(|v| json!({
                        "component": format!("p{}", v.component + 1),
                        "value": v.value,
                        "bound": v.bound,
                    })).collect::<Vec<_>>(),
                }),
            },
            ZdError::InvalidScale { phi, upper } if phi > upper => CliError::Infeasible {
                message: e.to_string(),
                details: json!({ "phi": phi, "phi_upper_bound": upper }),
            },
            ZdError::DegenerateTarget => CliError::Infeasible { message: e.to_string(), details: Value::Null },
            _ => CliError::Config(e.to_string()),
        }
    }
}

macro_rules! config_errors {
    ($($t:ty),*) => {$(
        impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError::Config(e.to_string())
            }
        }
    )*};
}

config_errors!(
    ipd_core::GameError,
    ipd_core::MarkovError,
    ipd_core::replicator::ReplicatorError,
    ipd_core::tournament::TournamentError
);
