//! State aggregation for discounted finite-state dynamic programming.
//!
//! The crate solves an original MDP and an aggregate problem built from
//! disaggregation probabilities `D` and aggregation probabilities `Phi`,
//! interpolates the aggregate solution back to the original states, and
//! audits the approximation error against the bound `eps / (1 - alpha)`.
//!
//! ```
//! use aggdp::{bound, generators};
//!
//! let (mdp, arch) = generators::counterexample(0.9, 0.5).unwrap();
//! let audit = bound::audit(&mdp, &arch, 1e-10).unwrap();
//! assert!(audit.condition_holds && audit.bound_satisfied);
//! assert!((audit.actual_error - 5.0).abs() < 1e-8);
//! ```

pub mod aggregate;
pub mod aggregation;
pub mod bound;
pub mod error;
pub mod generators;
pub mod io;
pub mod linalg;
pub mod mdp;
pub mod suite;

pub use aggregate::{AggregateSolution, TripleReport};
pub use aggregation::{AggregationArchitecture, ConditionCheck, Footprint, ValidationReport};
pub use bound::BoundAudit;
pub use error::{Error, Result};
pub use mdp::{Action, DiscountedMdp, Policy, SolveReport, Transition};
