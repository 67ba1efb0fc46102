use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Config,
    Numerical,
}

/// Failure reported as `{stage, message, parameter}` on stderr.
#[derive(Debug, Clone, Serialize, thiserror::Error)]
#[error("{stage}: {message}")]
pub struct CliError {
    #[serde(skip)]
    pub kind: Kind,
    pub stage: String,
    pub message: String,
    pub parameter: Option<String>,
}

impl CliError {
    pub fn config(stage: &str, message: impl Into<String>) -> Self {
        Self {
            kind: Kind::Config,
            stage: stage.into(),
            message: message.into(),
            parameter: None,
        }
    }

    pub fn numerical(stage: &str, message: impl Into<String>) -> Self {
        Self {
            kind: Kind::Numerical,
            ..Self::config(stage, message)
        }
    }

    pub fn with_parameter(mut self, p: impl Into<String>) -> Self {
        self.parameter = Some(p.into());
        self
    }

    pub fn or_parameter(self, p: &str) -> Self {
        if self.parameter.is_some() {
            self
        } else {
            self.with_parameter(p)
        }
    }

    pub fn from_core(stage: &str, e: magscat::Error) -> Self {
        use magscat::Error as E;
        let numerical = matches!(
            e,
            E::NoConvergence { .. } | E::Source { .. } | E::SpectralTail { .. } | E::Quadrature { .. } | E::Transport { .. } | E::DegenerateFrame { .. }
        );
        let parameter = match &e {
            E::InvalidParameter { name, .. } => Some(name.to_string()),
            _ => None,
        };
        let mut out = if numerical { Self::numerical(stage, e.to_string()) } else { Self::config(stage, e.to_string()) };
        out.parameter = parameter;
        out
    }

    pub fn exit_code(&self) -> i32 {
        match self.kind {
            Kind::Config => 2,
            Kind::Numerical => 3,
        }
    }
}

pub trait Stage<T> {
    fn stage(self, stage: &str) -> Result<T, CliError>;
}

impl<T> Stage<T> for magscat::Result<T> {
    fn stage(self, stage: &str) -> Result<T, CliError> {
        self.map_err(|e| CliError::from_core(stage, e))
    }
}
