//! Concrete quantum game constructions: the penny-flip game, the two
//! standard quantization protocols (entangle/disentangle and
//! mixture-dressing), continuous-strategy duopolies, and the one-query
//! number-guessing game.

pub mod bv;
pub mod cournot;
pub mod ewl;
pub mod meyer;
pub mod mw;

pub use bv::{bv_guess, bv_oracle, walsh_hadamard, walsh_hadamard_n, BVInstance};
pub use cournot::{
    cournot_closed_form, follower_reaction, stackelberg_solve, CournotConfig, CournotSolution,
    StackelbergSolution,
};
pub use ewl::{
    entangler, ewl_amplitudes_n, ewl_spec, minority_payoff, pipeline_amplitudes,
    three_player_pd_payoffs, three_player_pd_tables, EWLConfig, FlipConvention,
};
pub use meyer::{meyer_midgame_value, meyer_play, meyer_unitary};
pub use mw::{
    mw_final_probabilities, mw_prestage, mw_transformed_tables, ultimatum_spec, MWConfig,
};
