//! Syndrome-averaged logical entropy of concatenated codes under Pauli noise.
//!
//! ```
//! use pauli_capacity::concat::{exact_stack_entropy, CodeStack, DEFAULT_BUDGET};
//! use pauli_capacity::threshold::{solve_threshold_exact, ExactEvaluator, SolveOptions};
//! use pauli_capacity::NoiseFamily;
//!
//! let stack: CodeStack = "5in16".parse()?;
//! let c = NoiseFamily::Depolarizing.at(0.0636)?;
//! let s = exact_stack_entropy(&stack, &c, DEFAULT_BUDGET)?;
//! assert!(s < 1.0);
//!
//! let eval = ExactEvaluator::new(Some(stack), NoiseFamily::Depolarizing);
//! let t = solve_threshold_exact(|p| eval.entropy(p), &NoiseFamily::Depolarizing, &SolveOptions::default())?;
//! assert!((t.p - 0.0636255660).abs() < 1e-9);
//! # Ok::<(), pauli_capacity::Error>(())
//! ```

pub mod channel;
pub mod compositions;
pub mod concat;
pub mod error;
pub mod numeric;
pub mod pauli;
pub mod repetition;
pub mod stabilizer;
pub mod threshold;

pub use channel::{NoiseFamily, PauliChannel};
pub use error::{Error, Result};
pub use pauli::{Pauli, PauliString};
