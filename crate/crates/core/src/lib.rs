//! Planner-to-actuator trajectory tracking core.
//!
//! This crate holds every piece of the tracking stack that does not touch the operating system:
//!
//! - [`messages`]: planner, localization, command and HMI message types plus data/time validation.
//! - [`wire`]: the fixed-layout binary frame codec (CRC-32 protected) and a latest-wins mailbox.
//! - [`reference`]: the trajectory store and reference point extraction by time interpolation or
//!   closest-point projection.
//! - [`control`]: Frenet-frame errors, the longitudinal/lateral control law and command limiting.
//! - [`supervisor`]: the finite state automaton that engages, parametrizes and stops the controller.
//! - [`vehicle_sim`]: actuator lags and a kinematic bicycle plant integrated with RK4.
//! - [`mocks`]: an analytic mock planner and a noisy mock localization source.
//!
//! All math goes through `libm`, so results are bit-identical on every target regardless of the
//! platform's libc.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod angle;
pub mod control;
pub mod messages;
pub mod mocks;
pub mod reference;
pub mod supervisor;
pub mod vehicle_sim;
pub mod wire;

pub use control::{ControlGains, ControlMode, FrenetError, VehicleParams};
pub use messages::{
    ControlCommand, ControllerStatus, Gear, HmiAction, HmiCommand, LocStatus, LocalizationMsg,
    ModeHint, Rejection, TrajectoryMsg, TrajectoryPoint, WatchdogConfig,
};
pub use reference::{ReferencePoint, TrajectoryStore};
pub use supervisor::{FsmState, Supervisor, SupervisorConfig};
pub use vehicle_sim::{ActuatorModel, Gateway, PlantState};
