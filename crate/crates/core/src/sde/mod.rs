//! `∘dX = σ(X)∘dμ + b(X, t)dt` via the Doss–Sussmann representation
//! `X_t = F(μ_t, Y_t)`, where `F` is the flow of `∂F/∂r = σ(F)` and `Y` solves
//! a pathwise ODE.

mod coeffs;
mod flow;
mod solve;

pub use coeffs::{drift_catalog, sigma_catalog, Drift, Sigma, DRIFT_NAMES, SIGMA_NAMES};
pub use flow::{build_flow, build_flow_with, check_inverse_pde, invert_flow, Axis, FlowTable};
pub use solve::{solve_sde, verify_solution_identity, SdeSolution, SolveDiagnostics, DEFAULT_H};
