//! Scenario domain model: lanelet network plus dynamic obstacles.

mod derive;
mod xml;

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::geometry::{wrap_angle, LocalFrame, Polygon, Polyline, Vec2};

pub use derive::derive_state_derivatives;
pub use xml::{parse_scenario, parse_scenario_bytes, write_scenario};

/// Lateral neighbor reference.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Adjacency {
    pub id: i64,
    pub same_direction: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Lanelet {
    pub id: i64,
    pub left: Polyline,
    pub right: Polyline,
    pub center: Polyline,
    pub predecessors: BTreeSet<i64>,
    pub successors: BTreeSet<i64>,
    pub adjacent_left: Option<Adjacency>,
    pub adjacent_right: Option<Adjacency>,
}

impl Lanelet {
    /// Builds a lanelet without topology. A missing centerline is derived as
    /// the pointwise midpoint of the bounds.
    pub fn new(id: i64, left: Polyline, right: Polyline, center: Option<Polyline>) -> Result<Self> {
        if left.len() != right.len() {
            return Err(Error::Geometry(format!(
                "lanelet {id}: left bound has {} vertices, right bound {}",
                left.len(),
                right.len()
            )));
        }
        let center = match center {
            Some(c) => c,
            None => Polyline::new(
                left.points()
                    .iter()
                    .zip(right.points())
                    .map(|(l, r)| l.midpoint(*r))
                    .collect(),
            )
            .map_err(|e| Error::Geometry(format!("lanelet {id}: derived centerline: {e}")))?,
        };
        if center.len() != left.len() {
            return Err(Error::Geometry(format!(
                "lanelet {id}: centerline has {} vertices, bounds {}",
                center.len(),
                left.len()
            )));
        }
        Ok(Self {
            id,
            left,
            right,
            center,
            predecessors: BTreeSet::new(),
            successors: BTreeSet::new(),
            adjacent_left: None,
            adjacent_right: None,
        })
    }

    /// Centerline arclength.
    pub fn length(&self) -> f64 {
        self.center.length()
    }

    /// Origin at the first centerline vertex, x-axis along the first
    /// centerline segment.
    pub fn frame(&self) -> LocalFrame {
        LocalFrame::new(self.center.first(), self.center.initial_orientation())
    }

    /// Left bound followed by the reversed right bound.
    pub fn polygon(&self) -> Result<Polygon> {
        Polygon::new(
            self.left
                .points()
                .iter()
                .copied()
                .chain(self.right.points().iter().rev().copied()),
        )
        .map_err(|e| Error::Geometry(format!("lanelet {}: {e}", self.id)))
    }

    fn references(&self) -> impl Iterator<Item = i64> + '_ {
        self.predecessors
            .iter()
            .chain(&self.successors)
            .copied()
            .chain(self.adjacent_left.map(|a| a.id))
            .chain(self.adjacent_right.map(|a| a.id))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VehicleState {
    pub timestep: i64,
    pub position: Vec2,
    /// Heading in (-π, π].
    pub orientation: f64,
    pub velocity: Vec2,
    pub acceleration: Option<Vec2>,
    pub yaw_rate: Option<f64>,
}

impl VehicleState {
    pub fn new(timestep: i64, position: Vec2, orientation: f64, velocity: Vec2) -> Self {
        Self {
            timestep,
            position,
            orientation: wrap_angle(orientation),
            velocity,
            acceleration: None,
            yaw_rate: None,
        }
    }

    pub fn acceleration_or_zero(&self) -> Vec2 {
        self.acceleration.unwrap_or(Vec2::ZERO)
    }

    pub fn yaw_rate_or_zero(&self) -> f64 {
        self.yaw_rate.unwrap_or(0.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DynamicObstacle {
    pub id: i64,
    pub length: f64,
    pub width: f64,
    /// Strictly increasing timesteps; gaps mean the vehicle is absent.
    pub trajectory: Vec<VehicleState>,
}

impl DynamicObstacle {
    pub fn state_at(&self, timestep: i64) -> Option<&VehicleState> {
        self.trajectory
            .binary_search_by_key(&timestep, |s| s.timestep)
            .ok()
            .map(|i| &self.trajectory[i])
    }

    fn validate(&self) -> Result<()> {
        if !(self.length > 0.0 && self.width > 0.0) {
            return Err(Error::Validation(format!(
                "obstacle {}: shape must be positive, got {} x {}",
                self.id, self.length, self.width
            )));
        }
        if self.trajectory.is_empty() {
            return Err(Error::Validation(format!("obstacle {}: empty trajectory", self.id)));
        }
        for w in self.trajectory.windows(2) {
            if w[1].timestep <= w[0].timestep {
                return Err(Error::Validation(format!(
                    "obstacle {}: timestep {} follows {}",
                    self.id, w[1].timestep, w[0].timestep
                )));
            }
        }
        Ok(())
    }
}

/// A vehicle as present at one timestep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VehicleSnapshot {
    pub id: i64,
    pub length: f64,
    pub width: f64,
    pub state: VehicleState,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub id: String,
    /// Seconds per timestep.
    pub dt: f64,
    pub lanelets: BTreeMap<i64, Lanelet>,
    pub obstacles: BTreeMap<i64, DynamicObstacle>,
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::Validation(format!("timestep size must be positive, got {}", self.dt)));
        }
        for (id, l) in &self.lanelets {
            if *id != l.id {
                return Err(Error::Validation(format!("lanelet keyed {id} has id {}", l.id)));
            }
            if let Some(missing) = l.references().find(|r| !self.lanelets.contains_key(r)) {
                return Err(Error::Validation(format!(
                    "lanelet {id} references unknown lanelet {missing}"
                )));
            }
            if l.center.len() != l.left.len() || l.right.len() != l.left.len() {
                return Err(Error::Validation(format!("lanelet {id}: bound vertex counts differ")));
            }
        }
        for (id, o) in &self.obstacles {
            if *id != o.id {
                return Err(Error::Validation(format!("obstacle keyed {id} has id {}", o.id)));
            }
            o.validate()?;
        }
        Ok(())
    }

    /// First and last timestep with any recorded state; `(0, 0)` without traffic.
    /// Vehicles present at `timestep`, ascending by id.
    pub fn vehicles_at(&self, timestep: i64) -> Vec<VehicleSnapshot> {
        self.obstacles
            .values()
            .filter_map(|o| {
                o.state_at(timestep)
                    .map(|&state| VehicleSnapshot { id: o.id, length: o.length, width: o.width, state })
            })
            .collect()
    }

    pub fn lifetime(&self) -> (i64, i64) {
        let mut first = i64::MAX;
        let mut last = i64::MIN;
        for o in self.obstacles.values() {
            if let (Some(a), Some(b)) = (o.trajectory.first(), o.trajectory.last()) {
                first = first.min(a.timestep);
                last = last.max(b.timestep);
            }
        }
        if first > last {
            (0, 0)
        } else {
            (first, last)
        }
    }

    /// Applies `x ↦ R(angle)·x + offset` to every position, heading and
    /// vector quantity.
    pub fn rigid_transform(&self, angle: f64, offset: Vec2) -> Result<Scenario> {
        let mv = |p: Vec2| p.rotate(angle) + offset;
        let mut out = self.clone();
        for l in out.lanelets.values_mut() {
            l.left = l.left.map_points(mv)?;
            l.right = l.right.map_points(mv)?;
            l.center = l.center.map_points(mv)?;
        }
        for o in out.obstacles.values_mut() {
            for s in &mut o.trajectory {
                s.position = mv(s.position);
                s.orientation = wrap_angle(s.orientation + angle);
                s.velocity = s.velocity.rotate(angle);
                s.acceleration = s.acceleration.map(|a| a.rotate(angle));
            }
        }
        Ok(out)
    }
}
