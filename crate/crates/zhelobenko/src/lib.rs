//! Exact-arithmetic symbolic engine for the triangular geometry of complex
//! semisimple Lie algebras: root systems and normal orderings, Chevalley
//! bases, the adjoint decomposition N × h′ → b′, classical projection
//! operators on C\[b\]′, the extremal projector on the universal Verma module,
//! and the classical and quantum Zhelobenko operators.
//!
//! Everything is computed over arbitrary-precision rationals; every operator
//! identity checked by the verification suites holds exactly, with zero
//! tolerance.

pub mod chevalley;
pub mod classical;
pub mod coeffs;
pub mod error;
pub mod expr;
pub mod quantum;
pub mod roots;
pub mod verify;

pub use chevalley::{Algebra, LieElement};
pub use coeffs::{CartanPoly, ClassicalLocRat, QuantumLocRat, Q};
pub use error::{EngineError, Result};
pub use roots::{NormalOrdering, Root, RootSystem, WeylElement};
