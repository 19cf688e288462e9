//! Selecting which agents to improve in a network of cooperating
//! classifiers.
//!
//! Agents predict a binary label, then exchange opinions until their
//! expressed predictions settle at `z* = W̄ ŷ`. Correcting a set `S` of `k`
//! agents raises the network's correctness; the crate maximizes either the
//! total gain ([`aggregate`]) or the expected number of faulty agents that
//! improve ([`egal_exact`], [`approx_ind`], [`approx_group`]).
//!
//! ```
//! use coopnet::generators::{gen_instance, gen_wbar, GraphSpec, InstanceSpec};
//! use coopnet::egal_exact::greedy_egal_exact;
//!
//! let wbar = gen_wbar(&GraphSpec::pa(32, 1)).unwrap();
//! let inst = gen_instance(&wbar, &InstanceSpec::with_seed(1)).unwrap();
//! let (plan, trace) = greedy_egal_exact(&inst, 3, 1.0).unwrap();
//! assert_eq!(plan.s.len(), 3);
//! assert!(trace.total() <= inst.faulty_mass() + 1e-12);
//! ```

pub mod aggregate;
pub mod approx_group;
pub mod approx_ind;
pub mod cli;
pub mod dynamics;
pub mod egal_exact;
pub mod error;
pub mod generators;
pub mod greedy;
pub mod harness;
pub mod hoeffding;
pub mod instance;
pub mod matrix;

pub use error::{Error, Result};
pub use instance::{ErrorProfile, Instance, InterventionPlan, Outcome};
pub use matrix::InfluenceMatrix;
