//! Numerical side of the noncausality statements for convolution
//! semigroups: the Gaussian kernel, exponential-type growth of transforms
//! along a complex coordinate line, growth probes for monomial symbols,
//! and the heat-equation limit of the causal model.

mod gaussian;
mod growth;
mod limit;
mod symbol;

pub use gaussian::{gaussian_green, gaussian_mass_outside};
pub use growth::{
    exp_type_estimate, monomial_growth_probe, Classification, GrowthReport, ProbeReport,
    DEFAULT_ANGLES, SLOPE_GROWTH_TOL,
};
pub use limit::{classical_limit_error, LimitPoint};
pub use symbol::{EntireFunction, SemigroupTransform, ShellTransform, SymbolSpec};
