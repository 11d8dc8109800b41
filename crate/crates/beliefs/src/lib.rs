//! Product-Dirichlet beliefs over opponents' behavior strategies.

mod concentration;
mod prior;
mod state;
mod supportive;

pub use concentration::{concentration_profile, ConcentrationPoint, ConcentrationRecord};
pub use prior::{DirichletPrior, PriorFile};
pub use state::{posterior_mean, update, CountState, DEFAULT_CAP};
pub use supportive::{
    check_supportive, make_supportive_priors, verify_equilibrium_form, EquilibriumForm, SupportivenessReport, Witness,
};

use sslab_game::GameError;

#[derive(Debug, thiserror::Error)]
pub enum BeliefError {
    #[error(transparent)]
    Game(#[from] GameError),
    #[error("prior file: {0}")]
    BadPrior(String),
    #[error("observation inconsistent with the game: {0}")]
    Inconsistent(String),
    #[error("game is outside the two-player one-move family: {0}")]
    OutsideFamily(String),
    #[error("profile does not have the required equilibrium form: {0}")]
    FormViolated(String),
    #[error("no supportive prior found within the search budget; violated: {0}")]
    NoSupportivePrior(String),
}
