use thiserror::Error;

use crate::spaces::SpaceSpec;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("invalid exponent: {0}")]
    BadExponent(String),
    #[error("dimension must be at least 1")]
    ZeroDimension,
    #[error("{what} has length {got}, expected {expected}")]
    ShapeMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("points live in different spaces: {0} vs {1}")]
    MixedSpaces(SpaceSpec, SpaceSpec),
    #[error("operation undefined for the zero vector")]
    ZeroVector,
    #[error("operation undefined for the zero operator")]
    ZeroOperator,
    #[error("arc separation {eps} outside (0, {half_length})")]
    OutOfRange { eps: f64, half_length: f64 },
    #[error("subspace basis is rank deficient")]
    DegenerateBasis,
    #[error("wrong spaces: {0}")]
    WrongSpaces(String),
    #[error("operator norm is {0}, expected 1")]
    NormNotOne(f64),
    #[error("the isometry group of l2^n is infinite")]
    InfiniteGroup,
    #[error("operator does not have rank one")]
    NotRankOne,
    #[error("codomain is one-dimensional; no distinct unit vector near the image")]
    CodomainDimOne,
    #[error("T is not the midpoint of T1 and T2")]
    NotAMidpoint,
    #[error("witness T1 coincides with T")]
    DegenerateWitness,
    #[error("subspaces do not form a direct sum decomposition of the domain")]
    NotComplementary,
    #[error("X1 is not Birkhoff-James orthogonal to X2")]
    OrthogonalityFails,
    #[error("operator vanishes on X2; the shrink construction is trivial")]
    ZeroOnX2,
    #[error("span of the attainment set is not contained in X1")]
    AttainmentOutsideX1,
    #[error("operator is an isometry")]
    IsIsometry,
    #[error("extreme-contraction pattern condition fails")]
    ConditionFails,
    #[error("no zero row available")]
    NoZeroRow,
    #[error("operator is not one of the 90 extreme contractions of L(linf^3, l1^3)")]
    NotInEnumeration,
    #[error("restricted norm on the orthocomplement of H0 is {0}; norm preserving approximation is impossible")]
    ObstructionFullNormOnComplement(f64),
    #[error("declared subspace is not contained in the norm attainment set")]
    NotAttainmentSubspace,
    #[error("index n must exceed 1, got {0}")]
    BadIndex(u64),
    #[error("attainment set is not a finite point set")]
    NotDiscrete,
    #[error("unsupported space pair: {0}")]
    UnsupportedPair(String),
    #[error("eps must be positive, got {0}")]
    BadEpsilon(f64),
    #[error("constructed approximant violates its contract: {0}")]
    InvariantViolated(String),
}
