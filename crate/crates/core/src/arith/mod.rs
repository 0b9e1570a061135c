//! Ring and group normalization with traces, and literal arithmetic.

pub mod abel;
pub mod axioms;
pub mod horner;
pub mod norm_num;
pub mod ring;
