//! Surjectivity of Galois representations on products of abelian varieties:
//! symplectic similitude groups over prime fields, fiber products and their
//! subgroups, Frobenius traces of elliptic curves, a prime sieve for pairs of
//! curves, and explicit effective bounds.

pub mod arith;
pub mod bounds;
pub mod curves;
pub mod error;
pub mod field;
pub mod groups;
pub mod matgroup;
pub mod sieve;
pub mod verify;

pub use error::{Error, Result};
pub use bounds::{BSConstants, BoundReport, FieldInvariants, FormulaId};
pub use curves::{CurveModel, TorsionDims, TraceRecord, TraceStatus};
pub use field::PrimeModulus;
pub use groups::{FiniteGroupTable, SubgroupHandle};
pub use matgroup::{CharPoly, DimOneSignature, MatGSp, Matrix};
pub use sieve::{sieve_pair, sieve_product, SieveInput, SieveReport};
pub use verify::{SamplingMode, VerificationReport};
