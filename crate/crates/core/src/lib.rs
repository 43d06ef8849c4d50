//! Thermodynamic formalism for random subshifts of finite type.
//!
//! The crate covers presentations of SFTs ([`sft`]), pressure and Gibbs
//! measures of locally constant potentials ([`thermo`]), random forbidden
//! sets and holes ([`random_sft`]), repeat covers ([`repeats`]), the
//! pressure estimators and their exact moments ([`estimators`]), survival
//! probabilities and escape rates ([`open_systems`]), and seeded batch
//! experiments ([`experiments`]).

pub mod error;
pub mod estimators;
pub mod experiments;
pub mod linalg;
pub mod logvalue;
pub mod open_systems;
pub mod random_sft;
pub mod repeats;
pub mod sft;
pub mod thermo;

pub use error::{Error, SftError, ThermoError};
pub use logvalue::LogValue;
pub use sft::{Alphabet, BlockIndex, Sft, Symbol, Word};
