//! Core library for uplink coexistence studies of low-power IoT devices and
//! cellular UEs in shared LTE spectrum under multi-operator RAN sharing.
//!
//! The crate is `no_std` (with `alloc`) and holds the pure algorithmic parts:
//! planar topology generation and serving-cell association, the uplink link
//! budget (pathloss, interference aggregation, SINR, Shannon throughput),
//! operator spectrum plans for the three sharing modes, and the greedy
//! admission controller with its exhaustive small-instance oracle.
//!
//! IO, configuration, and the Monte Carlo experiment harness live in the
//! companion `coexsim` crate.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod admission;
pub mod geom;
pub mod radio;
pub mod seed;
pub mod spectrum;
pub mod topology;

pub use geom::{Position, Rect};
pub use topology::{BsId, DeviceId, OperatorId};
pub use radio::Channel;
pub use spectrum::SharingMode;
