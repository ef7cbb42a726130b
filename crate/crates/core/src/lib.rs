#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod access;
pub mod capacity;
pub mod error;
pub mod sets;
pub mod sim;
pub mod source;
