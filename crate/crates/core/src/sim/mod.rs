//! Deterministic world simulation: drone kinematics, the synthetic camera,
//! scenario definitions and the closed-loop run.

mod kinematics;
mod render;
mod run;
mod scenario;

pub use kinematics::{drone_step, DroneState, Route};
pub use render::{project_ring, render_frame, Distractors, RenderConfig, RingProjection};
pub use run::{run_scenario, LinkStats, RunLogs, SimError, TelemetryRow, TrackerRow, TruthRow};
pub use scenario::{
    builtin, builtin_scenarios, close_flyby, flyaway_range, plume_scan, zigzag_range, CameraConfig, ControlConfig,
    DroneConfig, LinkConfig, ScenarioConfig, StationConfig, TimingConfig, PLUME_GROUND_LEVEL,
};
