use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpectrumError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("gamma_tilde is required for perturbed-system computations")]
    MissingGammaTilde,
    #[error("gamma_tilde equals gamma: no perturbation")]
    NoPerturbation,
    #[error("no sign change on [{lo}, {hi}]")]
    NoBracket { lo: f64, hi: f64 },
    #[error("function evaluated to NaN at {at}")]
    SingularEvaluation { at: f64 },
    #[error("k = {k} lies in Xi_b (sin kb = 0)")]
    SingularAtXiB { k: f64 },
    #[error("k = {k} lies in Xi (sin ka = 0 or sin kb = 0)")]
    SingularOnXi { k: f64 },
    #[error("point lies inside a fiber band (|f| = {f_abs} <= 1)")]
    InsideFiberBand { f_abs: f64 },
    #[error("branch {branch} does not match the sign of f = {f}")]
    BranchMismatch { branch: &'static str, f: f64 },
    #[error("type-1 first situation at k = {k}: sin ka = 0, no finite edge constant")]
    Type1FirstSituation { k: f64 },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("gap edge at E = {energy} matches neither the Xi nor the band-edge condition")]
    UnclassifiedEdge { energy: f64 },
    #[error("{count} eigenvalue sign changes in one gap on [{lo}, {hi}]")]
    UniquenessViolation { count: usize, lo: f64, hi: f64 },
    #[error("new band inside gap ({lo}, {hi}) is disconnected")]
    ConnectivityViolation { lo: f64, hi: f64 },
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

impl SpectrumError {
    /// True for errors caused by caller input rather than by the numerics.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            SpectrumError::InvalidParameter(_)
                | SpectrumError::MissingGammaTilde
                | SpectrumError::NoPerturbation
                | SpectrumError::Precondition(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, SpectrumError>;
