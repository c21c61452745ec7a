//! Stark sweeps, fits, valley populations and the closed-form
//! valley-repopulation g-tensor model.

pub mod fit;
pub mod gtensor;
pub mod sweep;
pub mod valley;

pub use fit::{fit_stark, linear_fit, LinearFit, StarkFit, StarkModel};
pub use gtensor::{analytic_g_tensor, angular_g, effective_g, valley_tensor, AngularG, GTensor, SingleValleyG};
pub use sweep::{
    anisotropy_from_state, anisotropy_scan, fit_orientation, interface_sweep, stark_sweep, AnisotropyScan, DonorPipeline, GFactorPoint, InterfaceOptions,
    InterfaceRow, InterfaceSummary, PipelineOptions, PointState, TransitionKind,
};
pub use valley::{valley_populations, ValleyOptions, ValleyPopulations, ValleyProjector};
