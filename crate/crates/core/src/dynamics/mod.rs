//! Flow integration on chart models, the linearized flow on the normal
//! bundle `TM/⟨X⟩`, invariant-line estimation, growth rates and periodic
//! orbits.
//!
//! The transverse plane `η` representing `TM/⟨X⟩` is the chart-metric
//! orthogonal complement of `X`.

mod integrate;
mod orbits;
mod pullback;
mod splitting;

pub use integrate::{
    even_steps, flow_point, flow_point_lifted, integrate_flow, integrate_flow_even, linearize_flow,
    linearize_flow_lifted, FlowJacobian, Trajectory, DEFAULT_STEP,
};
pub use orbits::{close_orbit, orbit_integral, OrbitData, CLOSURE_TOL};
pub use pullback::{lie_derivative_by_pullback, pullback_coeffs};
pub use splitting::{
    domination_report, estimate_from_seed, estimate_line, estimate_line_report, growth_rate_bracket, growth_rate_fd,
    invariance_drift, line_angle, project_normal, rates_at, Direction, DominationReport, GrowthRates, LineEstimate,
    LineOptions, NormalLine, RateNorm, SplittingSource,
};
