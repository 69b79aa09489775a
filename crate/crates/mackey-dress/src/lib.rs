//! Mackey and Green functors on finite groups, quotients of the Burnside
//! ring acting on them, and p-local induction from subgroup families.

#![allow(clippy::needless_range_loop)]

pub mod amitsur;
pub mod biset;
pub mod bqgr;
pub mod burnside;
pub mod cli;
pub mod config;
pub mod dress;
pub mod error;
pub mod group;
pub mod gset;
pub mod mackey;
pub mod zlocal;

pub use error::{Error, Result};
pub use group::{group_from_spec, Group};
pub use gset::{Family, GMap, GSet};
