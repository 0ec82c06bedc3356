use serde::{Deserialize, Serialize};

use crate::geo::Position3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Route {
    pub waypoints: Vec<Position3>,
    /// Ground speed along the route, m/s.
    #[serde(default = "default_cruise_speed")]
    pub cruise_speed: f64,
    /// A waypoint counts as reached within this distance, meters.
    #[serde(default = "default_arrival_tolerance")]
    pub arrival_tolerance: f64,
}

fn default_cruise_speed() -> f64 {
    1.0
}

fn default_arrival_tolerance() -> f64 {
    0.05
}

impl Route {
    pub fn new(waypoints: Vec<Position3>, cruise_speed: f64) -> Self {
        Self {
            waypoints,
            cruise_speed,
            arrival_tolerance: default_arrival_tolerance(),
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.waypoints.is_empty() {
            return Err("route needs at least one waypoint".into());
        }
        if self.waypoints.iter().any(|p| !p.is_finite()) {
            return Err("route waypoints must be finite".into());
        }
        if !(self.cruise_speed > 0.0 && self.cruise_speed.is_finite()) {
            return Err("cruise_speed must be > 0".into());
        }
        if !(self.arrival_tolerance >= 0.0) {
            return Err("arrival_tolerance must be >= 0".into());
        }
        Ok(())
    }

    /// Total polyline length from the first waypoint.
    pub fn length(&self) -> f64 {
        self.waypoints.windows(2).map(|w| (w[1] - w[0]).norm()).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DroneState {
    pub position: Position3,
    pub velocity: Position3,
    /// Index of the waypoint being flown to; equals the waypoint count once
    /// the route is finished.
    pub waypoint: usize,
    pub t: f64,
}

impl DroneState {
    /// At rest on the first waypoint, heading for the second.
    pub fn at_start(route: &Route) -> Self {
        Self {
            position: route.waypoints[0],
            velocity: Position3::ORIGIN,
            waypoint: 1.min(route.waypoints.len()),
            t: 0.0,
        }
    }

    pub fn finished(&self, route: &Route) -> bool {
        self.waypoint >= route.waypoints.len()
    }
}

/// Flies `speed · dt` of path. Waypoints are passed through without
/// stopping: leftover distance carries on toward the next one.
pub fn drone_step(d: &DroneState, r: &Route, dt: f64) -> DroneState {
    debug_assert!(dt > 0.0);
    let mut position = d.position;
    let mut waypoint = d.waypoint;
    let mut budget = r.cruise_speed * dt;
    while waypoint < r.waypoints.len() {
        let target = r.waypoints[waypoint];
        let to_go = (target - position).norm();
        if to_go <= r.arrival_tolerance.max(1e-12) {
            waypoint += 1;
            continue;
        }
        if budget <= 0.0 {
            break;
        }
        if to_go <= budget {
            position = target;
            budget -= to_go;
            waypoint += 1;
        } else {
            position = position + (target - position) * (budget / to_go);
            break;
        }
    }
    DroneState {
        position,
        velocity: (position - d.position) * (1.0 / dt),
        waypoint,
        t: d.t + dt,
    }
}
