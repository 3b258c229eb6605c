//! Numerical verification of symplectic forms on local models: pointwise
//! evaluation, sampled tameness certificates, finite-difference ∂∂̄,
//! gluing, the branched-cover pushforward and the blow-up model.

pub mod blowup;
pub mod ddbar;
pub mod forms;
pub mod gluing;
pub mod profiles;
pub mod pushforward;
pub mod tameness;

pub use forms::{eval_omega0, eval_omega_a, eval_omega_a_glued, model_acs, Form2At, LocalModel, Point};
pub use profiles::RadialProfile;
pub use tameness::{tameness_min, Region, TamenessCertificate};
