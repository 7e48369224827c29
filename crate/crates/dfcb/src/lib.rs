//! Exact solutions of the (2+1)-dimensional damped-forced coupled Burgers
//! system built by N-fold Darboux transformation, verified by substituting
//! back into the PDE system and its Lax pair with jet (truncated Taylor)
//! arithmetic.

pub mod coeffs;
pub mod darboux;
pub mod error;
pub mod explicit;
pub mod grid;
pub mod jet;
pub mod seeds;
pub mod verify;

pub use coeffs::{Coefficients, TimeProfile, LAMBDA_MIN};
pub use darboux::{
    onefold_eigenfunction, onefold_potentials, wronskian, DarbouxStep, FieldSample, Mode,
    TransformedSolution, MAX_FOLD, U_SHAPE, V_SHAPE,
};
pub use error::{DfcbError, Result};
pub use explicit::{
    discrepancy_report, Classification, DiscrepancyReport, DiscrepancyRow, ExplicitOnefold,
    ExplicitTwofold, TwofoldSymbols,
};
pub use grid::GridSpec;
pub use jet::{jet_det, Jet, JetShape, Point, Var, EPS_SING};
pub use seeds::{
    apply_l, apply_m, lax_residual, LaxReport, Phase, PhaseSet, Potentials, SeedSpec,
    TrivialBackground,
};
pub use verify::{
    convergence_order, pde_residual_fd, pde_residual_jet, ConvergenceReport, JetField, PointField,
    ResidualReport, TERM_BLOWUP,
};
