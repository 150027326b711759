use super::DynamicObstacle;
use crate::error::{Error, Result};
use crate::geometry::{wrap_angle, Vec2};

/// Fills missing acceleration and yaw rate by finite differences of velocity
/// and heading: central in the interior, one-sided at the ends. Timestep gaps
/// are honored through the actual elapsed time. Present values are kept.
pub fn derive_state_derivatives(obstacle: &DynamicObstacle, dt: f64) -> Result<DynamicObstacle> {
    if !(dt > 0.0) {
        return Err(Error::Argument(format!("dt must be positive, got {dt}")));
    }
    let mut out = obstacle.clone();
    let traj = &obstacle.trajectory;
    let n = traj.len();
    if n == 0 {
        return Err(Error::Argument(format!("obstacle {} has an empty trajectory", obstacle.id)));
    }
    for i in 0..n {
        let (lo, hi) = match (i, n) {
            (_, 1) => (0, 0),
            (0, _) => (0, 1),
            (i, n) if i == n - 1 => (n - 2, n - 1),
            (i, _) => (i - 1, i + 1),
        };
        let state = &mut out.trajectory[i];
        if lo == hi {
            state.acceleration.get_or_insert(Vec2::ZERO);
            state.yaw_rate.get_or_insert(0.0);
            continue;
        }
        let elapsed = (traj[hi].timestep - traj[lo].timestep) as f64 * dt;
        if state.acceleration.is_none() {
            state.acceleration = Some((traj[hi].velocity - traj[lo].velocity) * (1.0 / elapsed));
        }
        if state.yaw_rate.is_none() {
            state.yaw_rate = Some(wrap_angle(traj[hi].orientation - traj[lo].orientation) / elapsed);
        }
    }
    Ok(out)
}
