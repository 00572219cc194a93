//! Dynamic and parameter rays of the exponential family `z -> exp(z) + kappa`.
#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord)]
extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod address;
pub mod dynamics;
pub mod error;
pub mod growth;
pub mod param;
pub mod point;
pub mod rays;
pub mod render;

pub use address::{AddressForm, ExternalAddress, PotentialBound, Sign, SpeedClass, StripOffset};
pub use dynamics::{escape_orbit, eval_map, lambda_of_kappa, EscapeParams, OrbitRecord, Verdict};
pub use error::{Error, Result};
pub use growth::{growth_f, growth_f_inv, growth_f_inv_iter, growth_f_iter};
pub use param::{
    classify_parameter, land_endpoint, solve_parameter, trace_parameter_ray, ClassificationResult, Endpoint,
    ParamConfig, ParamRaySample, ParamRayTrace,
};
pub use point::ComplexPoint;
pub use rays::{pullback_point, ray_derivative_check, trace_ray, PullbackConfig, RaySample, RayTrace, Truncation};
pub use render::{render_dynamic_plane, render_parameter_plane, EscapeImage, GridSpec, Plane, Polyline, RgbImage};
