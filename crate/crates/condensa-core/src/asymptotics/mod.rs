//! Closed-form predictions, classification, Gordan certificates and the
//! test function of the auxiliary reversed chain.

pub mod classify;
pub mod gordan;
pub mod predict;
pub mod probe;
pub mod testfn;

pub use classify::{classify, limit_chain, Classification, LimitChain, LimitMode, Scale};
pub use gordan::{gordan_certificate, probe_branches, BranchProbe, GordanBranch, GordanCertificate};
pub use predict::{
    is_attracting, is_semi_attracting, predicted_mean_rate, tube_hitting_prediction, ErrorFamily, ErrorScale,
    RatePrediction, TubeCase, TubePrediction,
};
pub use probe::{convergence_probe, ProbeReport};
pub use testfn::{test_function, TestFunction, TestFunctionReport};
