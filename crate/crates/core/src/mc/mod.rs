//! Monte-Carlo propagation of quadrature shifts through repeater chains.

pub mod chain;
pub mod decode;
pub mod estimate;
pub mod ops;
pub mod schedule;
pub mod single_link;

pub use chain::{run_chain, ChainConfig, ChainPlan, Scheme, TrialResult};
pub use decode::{decode_step1, decode_step2, QubitHistory, Reading, StabilizerRecord};
pub use estimate::{estimate, EstimateOptions, SimEstimate};
pub use ops::{gkp_correct, infer_stabilizer, measure_outer_stabilizer, ModeState, SyndromeRecord};
pub use schedule::{build_schedule, LinkSchedule, Op, Quad, StabKind, StationType};
pub use single_link::{single_link_experiment, SingleLinkScheme};
