#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod anfis;
pub mod harness;
pub mod kinematics;
pub mod netsim;
pub mod reckoning;
