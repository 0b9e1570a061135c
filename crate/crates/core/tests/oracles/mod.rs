//! Reference implementations used to cross-check the library.

#![allow(dead_code)]

pub mod eval;
pub mod linear;
pub mod poly;
pub mod props;
