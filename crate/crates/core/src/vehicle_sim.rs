//! Simulated vehicle gateway and plant.
//!
//! The gateway turns a [`ControlCommand`] into road-wheel angle and acceleration setpoints and
//! lags the actual actuator values toward them with first-order dynamics. The plant is a
//! kinematic bicycle model (rear-axle reference) integrated with RK4 at 1 ms substeps.

use crate::angle;
use crate::control::VehicleParams;
use crate::messages::{ControlCommand, Gear};

/// Integration substep of [`plant_step`] [s].
pub const PLANT_SUBSTEP: f64 = 0.001;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PlantState {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
    /// Signed speed, negative when reversing.
    pub v: f64,
    /// Actual road-wheel angle.
    pub delta_road: f64,
    /// Actual longitudinal acceleration.
    pub a_act: f64,
    pub gear: Gear,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActuatorModel {
    /// Steering time constant [s].
    pub tau_steer: f64,
    /// Acceleration time constant [s].
    pub tau_accel: f64,
    pub params: VehicleParams,
    /// Injected actuator failure.
    pub fault: bool,
    /// Deceleration the simulated safety driver applies when no command arrives [m/s^2].
    pub driver_decel: f64,
}

impl Default for ActuatorModel {
    fn default() -> Self {
        Self {
            tau_steer: 0.1,
            tau_accel: 0.2,
            params: VehicleParams::default(),
            fault: false,
            driver_decel: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Setpoints {
    pub road_wheel: f64,
    pub accel: f64,
}

/// What the gateway did this tick.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GatewayOutput {
    pub setpoints: Setpoints,
    pub actuator_fault: bool,
}

/// Setpoints implied by a command, inverting the controller's throttle/brake map when
/// direct actuation is active.
pub fn command_setpoints(cmd: &ControlCommand, params: &VehicleParams) -> Setpoints {
    let accel = if cmd.direct_actuation {
        cmd.gear_cmd.sign()
            * (cmd.throttle * params.throttle_full_accel - cmd.brake * params.brake_full_decel)
    } else {
        cmd.accel_cmd
    };
    Setpoints {
        road_wheel: (cmd.steer_wheel_cmd / params.steering_ratio)
            .clamp(-params.max_road_wheel, params.max_road_wheel),
        accel: accel.clamp(params.accel_min, params.accel_max),
    }
}

fn lag(actual: f64, setpoint: f64, tau: f64, dt: f64) -> f64 {
    actual + (setpoint - actual) * (1.0 - libm::exp(-dt / tau))
}

/// Applies one gateway tick to the actuator part of `state`.
///
/// Without a command the simulated safety driver holds the wheel and brakes gently.
/// A raised fault freezes both actuators.
pub fn gateway_apply(
    cmd: Option<&ControlCommand>,
    model: &ActuatorModel,
    state: &mut PlantState,
    dt: f64,
) -> GatewayOutput {
    let p = &model.params;
    let setpoints = match cmd {
        Some(c) => {
            state.gear = c.gear_cmd;
            command_setpoints(c, p)
        }
        None => Setpoints {
            road_wheel: state.delta_road,
            accel: -(2.0 * state.v).clamp(-model.driver_decel, model.driver_decel),
        },
    };
    if model.fault {
        return GatewayOutput {
            setpoints,
            actuator_fault: true,
        };
    }
    state.delta_road = lag(state.delta_road, setpoints.road_wheel, model.tau_steer, dt)
        .clamp(-p.max_road_wheel, p.max_road_wheel);
    state.a_act =
        lag(state.a_act, setpoints.accel, model.tau_accel, dt).clamp(p.accel_min, p.accel_max);
    GatewayOutput {
        setpoints,
        actuator_fault: false,
    }
}

fn derivative(s: [f64; 4], a: f64, tan_delta: f64, wheelbase: f64) -> [f64; 4] {
    let [_, _, theta, v] = s;
    let (sin_t, cos_t) = libm::sincos(theta);
    [v * cos_t, v * sin_t, v * tan_delta / wheelbase, a]
}

fn axpy(s: [f64; 4], k: [f64; 4], h: f64) -> [f64; 4] {
    [
        s[0] + h * k[0],
        s[1] + h * k[1],
        s[2] + h * k[2],
        s[3] + h * k[3],
    ]
}

/// Speed may not change sign against the selected gear.
fn clamp_through_zero(prev: f64, next: f64, gear: Gear) -> f64 {
    let crosses_down = prev >= 0.0 && next < 0.0;
    let crosses_up = prev <= 0.0 && next > 0.0;
    match gear {
        Gear::Forward if crosses_down => 0.0,
        Gear::Reverse if crosses_up => 0.0,
        Gear::Neutral if (crosses_down && prev > 0.0) || (crosses_up && prev < 0.0) => 0.0,
        Gear::Neutral if prev == 0.0 => 0.0,
        _ => next,
    }
}

/// Integrates the kinematic bicycle over `dt` with the actuators held constant.
pub fn plant_step(state: &PlantState, wheelbase: f64, dt: f64) -> PlantState {
    debug_assert!(dt > 0.0);
    let n = libm::ceil(dt / PLANT_SUBSTEP - 1e-9).max(1.0) as usize;
    let h = dt / n as f64;
    let tan_delta = libm::tan(state.delta_road);
    let a = state.a_act;
    let mut s = [state.x, state.y, state.theta, state.v];
    for _ in 0..n {
        let k1 = derivative(s, a, tan_delta, wheelbase);
        let k2 = derivative(axpy(s, k1, h / 2.0), a, tan_delta, wheelbase);
        let k3 = derivative(axpy(s, k2, h / 2.0), a, tan_delta, wheelbase);
        let k4 = derivative(axpy(s, k3, h), a, tan_delta, wheelbase);
        let prev_v = s[3];
        for i in 0..4 {
            s[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        s[3] = clamp_through_zero(prev_v, s[3], state.gear);
    }
    PlantState {
        x: s[0],
        y: s[1],
        theta: angle::wrap(s[2]),
        v: s[3],
        ..*state
    }
}

/// Gateway plus plant, stepped once per control cycle.
#[derive(Debug, Clone)]
pub struct Gateway {
    pub model: ActuatorModel,
    pub state: PlantState,
    last: Option<GatewayOutput>,
}

impl Gateway {
    pub fn new(model: ActuatorModel, initial: PlantState) -> Self {
        Self {
            model,
            state: initial,
            last: None,
        }
    }

    /// Ground truth.
    pub fn truth(&self) -> &PlantState {
        &self.state
    }

    pub fn set_fault(&mut self, fault: bool) {
        self.model.fault = fault;
    }

    pub fn actuator_fault(&self) -> bool {
        self.model.fault
    }

    pub fn last_output(&self) -> Option<&GatewayOutput> {
        self.last.as_ref()
    }

    pub fn step(&mut self, cmd: Option<&ControlCommand>, dt: f64) -> GatewayOutput {
        let out = gateway_apply(cmd, &self.model, &mut self.state, dt);
        self.state = plant_step(&self.state, self.model.params.wheelbase, dt);
        self.last = Some(out);
        out
    }
}
