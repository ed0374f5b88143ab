//! The fireball calculus (Open Call-by-Value) and three abstract machines
//! implementing its right-to-left strategy: the Easy GLAMOUr, the Fast
//! GLAMOUr, and a naive machine that also substitutes inert terms.
//!
//! ```
//! use fireball::machine::{run, MachineKind};
//! use fireball::terms::{alpha_eq, parse, Names};
//!
//! let mut names = Names::new();
//! let t = parse(&mut names, r"(\z.z (y z)) \x.x").unwrap();
//! let normal = parse(&mut names, r"y \x.x").unwrap();
//! let result = run(MachineKind::Easy, names, &t, 100, false);
//! assert_eq!(result.counters.beta, 2);
//! assert!(alpha_eq(&result.decode(1 << 20).unwrap(), &normal));
//! ```

pub mod calculus;
pub mod corpus;
pub mod easy;
pub mod fast;
pub mod machine;
pub mod naive;
pub mod terms;
pub mod verify;

/// Transitions a run may take before giving up.
pub const DEFAULT_FUEL: u64 = 1_000_000;

/// Nodes a decoded term may have before decoding gives up.
pub const DEFAULT_BUDGET: u64 = 1 << 22;
