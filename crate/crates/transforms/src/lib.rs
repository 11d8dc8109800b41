//! Structure-preserving game transformations.
//!
//! [`coalesce`] merges two consecutive information sets of one role, [`phi`] carries
//! behavior at the pair onto the merged set, [`TransformedPrior`] carries priors
//! (with the Jacobian correction), and [`auxiliary_game`] isolates one role's
//! learning problem.

mod auxiliary;
mod coalesce;
mod error;
mod phi;
mod prior;

pub use auxiliary::{auxiliary_game, Auxiliary, Pruning};
pub use coalesce::{coalesce, CoalescePlan, Coalesced, Identification};
pub use error::TransformError;
pub use phi::{phi, phi_inverse, phi_unchecked};
pub use prior::{
    box_measure_check, dirichlet_log_density, sample_dirichlet, transform_dirichlet, BoxCheck, ProductDirichlet,
    SimplexBox, SimplexDensity, TransformedPrior,
};
