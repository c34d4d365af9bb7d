use thiserror::Error;

/// Errors raised anywhere in the toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("incompatible variable lists: [{left}] vs [{right}]")]
    IncompatibleVars { left: String, right: String },

    #[error("series has zero constant term; not invertible")]
    NotInvertible,

    #[error("square root requires constant term 1, found {found}")]
    NotUnit { found: String },

    #[error("substitution for `{var}` has a nonzero constant term")]
    ConstantSubstitution { var: String },

    #[error("wrong number of substitutions: expected {expected}, got {got}")]
    SubstitutionArity { expected: usize, got: usize },

    #[error("implicit equation is degenerate: {0}")]
    DegenerateImplicit(String),

    #[error("implicit solve did not converge within {iterations} iterations")]
    NoConvergence { iterations: usize },

    #[error("series not divisible by {var}^{power}: offending monomial {monomial}")]
    NotDivisible {
        var: String,
        power: u32,
        monomial: String,
    },

    #[error("jet order {order} exceeds truncation order {trunc}")]
    JetOrder { order: u32, trunc: u32 },

    #[error("unknown variable `{0}`")]
    UnknownVariable(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("operation needs the floating backend: {0}")]
    NeedsFloatBackend(String),

    #[error("unresolvable degeneracy at truncation {trunc}: branches {block:?} never split")]
    UnresolvableDegeneracy { trunc: u32, block: Vec<usize> },

    #[error("Levi matrix branch {index} vanishes to truncation order {trunc}")]
    DegenerateLevi { index: usize, trunc: u32 },

    #[error("defining function is flat to truncation order {trunc}")]
    FlatToTruncation { trunc: u32 },

    #[error("hypersurface is not normal: {0}")]
    NotNormal(String),

    #[error("not a good nonminimal shape: {0}")]
    NotGoodShape(String),

    #[error("curve error: {0}")]
    Curve(String),

    #[error("truncation budget insufficient: requested order {requested}, achievable {achievable}")]
    TruncationBudget { requested: u32, achievable: u32 },

    #[error("jet hypothesis violated: {0}")]
    JetHypothesis(String),

    #[error("division defect: {0}")]
    DivisionDefect(String),

    #[error("map does not preserve the hypersurface: first defect at order {order}")]
    NotPreserving { order: u32 },

    #[error("cannot access `{path}`: {msg}")]
    Io { path: String, msg: String },

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn at(self, stage: &'static str) -> Error {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }

    /// Innermost error, skipping stage wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } => source.root(),
            e => e,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
