//! Model isotropic states, coherent states and their superpositions.

pub mod coherent;
pub mod family;
pub mod model;
pub mod phase;
pub mod submanifold;

pub use coherent::{CoherentState, Envelope};
pub use family::{
    decompose_model_state, decompose_model_state_with, superpose, CoherentFamily, DecomposeOptions,
    Superposition,
};
pub use model::{eval_model_state, sample_model_state, ModelIsotropicState, ProfileTerm};
pub use phase::StatePhase;
pub use submanifold::{bohr_sommerfeld_residue, reduce_mod_two_pi, IsotropicSubmanifoldModel};
