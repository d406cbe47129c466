//! Diffuse interreflection over patches lit by point luminaires with
//! tabulated distribution curves.
//!
//! Bookkeeping: `B` is exitance (lm/m²) leaving each patch; the direct
//! illuminance `E` is the source term. The system solved is
//! `(I − R·F)·B = R·E` with `R = diag(ρ)`, and the illuminance arriving at
//! patch `i` is `E[i] + (F·B)[i]`.

mod basis;
pub mod cache;
mod direct;
mod form_factor;
mod solve;

pub use basis::{build_basis, LuminaireBasis};
pub use direct::{direct_illuminance, emission_vector, luminaire_emission, EmissionVector};
pub use form_factor::{form_factor, form_factor_matrix, sample_points, symmetrize, FormFactorMatrix, DEFAULT_FF_SAMPLES, ROW_SUM_LIMIT};
pub use solve::{solve_radiosity, RadiositySolution, RadiositySystem, SolverOptions, RESIDUAL_LIMIT};
