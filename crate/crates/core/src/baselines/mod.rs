//! Comparison solvers, policy enumeration and the best-response oracle.

pub mod bi;
pub mod br;
pub mod enumerate;
pub mod nf;

pub use bi::{backward_induction, BiMode, BiSolution};
pub use br::{best_response, best_response_capped, follower_best_response, measured_exploitability, BestResponse, BestResponseSet};
pub use enumerate::{
    check_capacity, enumerate_deterministic_policies, policy_count, PolicyCount, DEFAULT_CAP,
};
pub use nf::{nf_lp_sse, nf_milp_sse, NfSolution, NormalForm};
