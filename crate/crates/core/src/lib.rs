//! Beta-wordlength patterns and minimum-contamination criteria for
//! multi-level screening designs, with numerical checks of the identities
//! that connect them on three-level designs.

pub mod basis;
pub mod builtin;
pub mod contamination;
pub mod contrast;
pub mod design;
pub mod error;
pub mod identities;
pub mod indicator;
pub mod io;
pub mod linalg;
pub mod ranking;

pub use basis::{DesignBases, OrthonormalBasis};
pub use contamination::{
    alias_matrix, contamination_pattern, gls_contamination, lambda_split, mean_contamination,
    AliasMatrix, ContaminationPattern, Covariance, LinearModel, Variant,
};
pub use contrast::{ContrastMatrix, Selection};
pub use design::{Design, ExponentTuple, LevelPermutation, TupleSpace};
pub use error::{Error, Result};
pub use identities::{verify_all, IdentityReport, ThreeLevelAnalysis, Verification};
pub use indicator::{
    beta_pattern, beta_split, xi_grid, BetaPattern, IndicatorCoefficients, SplitGrid,
};
pub use ranking::{
    derived_designs, Catalog, CatalogEntry, Criterion, DedupRule, DerivedDesign, PermutationSet,
};
