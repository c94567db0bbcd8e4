//! Inclusion processes on finite site sets and discrete tori: kinetics,
//! exact stationary and trace-rate solves, asymptotic predictions,
//! Monte Carlo simulation and thermodynamic-limit statistics.
//!
//! The crate is `no_std` with `alloc`; file formats, the CLI and parallel
//! replica runners live in the companion `condensa` crate.

#![no_std]
extern crate alloc;

pub mod asymptotics;
pub mod error;
pub mod generator;
pub mod graph;
pub mod hitting;
pub mod linalg;
pub mod simulator;
pub mod recip;
pub mod regions;
pub mod states;
pub mod thermo;
pub mod stationary;
pub mod walk;

pub use error::{Error, Result};
pub use walk::{
    analyze_walk, apply_move, generator_apply, local_kinetics, Configuration, LocalKinetics, Move,
    ProcessParams, RateGraph, Schedule, SiteLabel, WalkAnalysis, WalkSpec,
};
