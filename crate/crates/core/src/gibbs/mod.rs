//! Product spaces, joint distributions and every Gibbs-type kernel family.

pub mod approx;
pub mod da;
pub mod joint;
pub mod random;
pub mod scan;
pub mod slice;
pub mod space;

pub use approx::{make_approximator, rule_kernel, ApproxRule, ApproximatorSpec, IndependenceProposal};
pub use da::{augmentation_laws, da_approximator, da_exact, da_hybrid, da_hybrid_t};
pub use joint::{Fiber, JointDistribution};
pub use scan::{
    block_hybrid_scan, block_random_scan, exact_random_scan, hybrid_random_scan, inner_block_kernel, SelectionProbs,
};
pub use slice::{slice_exact, slice_hybrid, slice_hybrid_t, SliceModel};
pub use space::{state_cap, ProductSpace, DEFAULT_STATE_CAP, STATE_CAP_ENV};
