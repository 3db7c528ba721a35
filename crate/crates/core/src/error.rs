use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("pair ({0}, {1}) joins an image with itself")]
    SelfPair(String, String),

    #[error("duplicate pair ({0}, {1})")]
    DuplicatePair(String, String),

    #[error("duplicate id {0}")]
    DuplicateId(String),

    #[error("NND pair ({0}, {1}) used where only IND/NIND pairs are allowed")]
    NegativeInClusterInput(String, String),

    #[error("NND pair ({0}, {1}) connects two members of cluster {2}")]
    NegativeInsideCluster(String, String, u32),

    #[error("query image {0} is a member of an ND cluster")]
    QueryInCluster(String),

    #[error("no descriptor for image {0}")]
    MissingDescriptor(String),

    #[error("no {0} pairs to evaluate")]
    NoPairs(PairSide),

    #[error("image is {width}x{height} with {channels} channel(s); a square grayscale raster is required")]
    BadRaster { width: usize, height: usize, channels: usize },

    #[error("region grid degenerates at scale {scale}: region side {side} is smaller than one cell")]
    DegenerateRegion { scale: usize, side: usize },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("requested FP rate {rate} is below the measurable floor 1/{n_neg} = {floor}")]
    BelowSpecificityFloor { rate: f64, n_neg: usize, floor: f64 },

    #[error("eigendecomposition failed to converge")]
    Eigen,

    #[error("AUC bound violated: AUC over hard negatives {auc_hn} < AUC over all negatives {auc_full}")]
    BoundViolated { auc_full: f64, auc_hn: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairSide {
    Positive,
    Negative,
}

impl core::fmt::Display for PairSide {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            PairSide::Positive => f.write_str("positive (ND)"),
            PairSide::Negative => f.write_str("negative (NND)"),
        }
    }
}
