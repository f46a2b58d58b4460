//! Codes composed across levels: stack descriptions, exact enumeration of
//! syndrome outcomes, and level-wise Monte Carlo sampling.

mod exact;
mod mc;
mod stack;

pub use exact::{
    exact_n1_in_n2_entropy, exact_stack_entropy, exact_stack_entropy_opts, exact_stack_outcomes, level_entropy, level_outcomes,
    merge_outcomes, mixture_block_cases, n1_in_n2_step_count, BlockCase, CompositionCase, WeightedChannel,
    DEFAULT_BUDGET,
};
pub use mc::{
    mc_stack_entropy, mc_stack_entropy_with, McConfig, McEstimate, RunningStats,
};
pub use stack::{combine_recovery, CodeStack, LevelSpec};
