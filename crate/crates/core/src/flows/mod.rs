//! Time evolution: heat flow of the time-dependent Witten Laplacian under a
//! metric schedule, the Lott coupled flow, and the conjugate heat equation
//! along it.

mod conjugate;
mod heat;
mod interp;
pub mod io;
mod lott;
mod schedule;


pub use conjugate::{conjugate_heat_solve, eta_from_phi, phi_from_eta, ConjugateState, ConjugateTrajectory};
pub use heat::{
    evolve_heat, heat_step, FlowState, FlowTrajectory, SolverStats, StepOptions, DEFAULT_SAFETY,
    NEGATIVITY_SLACK,
};
pub use lott::{evolve_lott, lott_flow_step, lott_rates, r_q, ricci_flow, LottState, LottTrajectory};
pub use schedule::{super_ricci_defect, GeometryPath, MetricSchedule, Scale, SUPER_FLOW_SLACK};
