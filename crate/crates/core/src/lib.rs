#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0.0)` also rejects NaN

pub mod calibration;
pub mod geometry;
pub mod numerics;
pub mod spectral;
