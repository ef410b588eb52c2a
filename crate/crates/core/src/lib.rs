//! Synthesis of prefix-suffix motion plans for multi-robot teams under
//! global LTL tasks.
//!
//! The pipeline: an LTL formula is parsed ([`ltl`]) and translated to a
//! nondeterministic Büchi automaton ([`automaton`]); robot mobility is
//! loaded as weighted transition systems ([`model`]); their synchronous
//! product with the automaton is exposed implicitly ([`product`]); the
//! sampling-based tree planner ([`tree`], [`planner`]) grows trees that
//! approximate that product and extracts minimum-cost prefix-suffix
//! plans; the [`oracle`] module solves small instances exactly for
//! cross-validation.

pub mod automaton;
pub mod ltl;
pub mod model;
pub mod oracle;
pub mod planner;
pub mod product;
pub mod reference;
pub mod tree;
pub(crate) mod util;

pub use automaton::{Guard, Nba};
pub use ltl::{eval_lasso, ltl_to_nba, parse_ltl, LassoWord, Ltl};
pub use model::{MultiRobotModel, PtsState, Wts};
pub use planner::{synthesize, validate_plan, Plan, SynthesisReport};
pub use product::{ProductSpace, ProductState};
pub use tree::{construct_tree, GoalSpec, IterationStats, PlannerTree, SamplerConfig};
