#![allow(non_camel_case_types)]

pub mod cascade;
pub mod cell;
pub mod corner;
pub mod error;
pub mod exact;
pub mod fem;
pub mod geometry;
pub mod harness;
pub mod nearfield;
pub mod numerics;
pub mod special;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
