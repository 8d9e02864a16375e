//! Class groups of imaginary quadratic fields and their anti-cyclotomic
//! Z_p-towers: form arithmetic, intersection depths, Cohen-Lenstra
//! predictions, Iwasawa-invariant rules and layer polynomials.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod arith;
pub mod bqf;
pub mod brink;
pub mod cohen_lenstra;
pub mod iwasawa;
pub mod quadfield;
pub mod schertz;
pub mod survey;

pub use bqf::{AbelianPGroup, FormClassGroup, FormDiscriminant, QuadForm, SmallForm};
pub use quadfield::{ImagQuadField, SplittingType};
