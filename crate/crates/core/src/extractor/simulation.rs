use crate::error::{Error, Result};
use crate::scenario::{derive_state_derivatives, Scenario, VehicleSnapshot, VehicleState};

/// Replay of the recorded trajectories. Missing derivatives are filled on
/// construction, so every state carries acceleration and yaw rate.
#[derive(Debug, Clone)]
pub struct Simulation {
    scenario: Scenario,
    lifetime: (i64, i64),
}

impl Simulation {
    pub fn new(scenario: Scenario) -> Result<Self> {
        scenario.validate()?;
        let mut scenario = scenario;
        for obstacle in scenario.obstacles.values_mut() {
            *obstacle = derive_state_derivatives(obstacle, scenario.dt)?;
        }
        let lifetime = scenario.lifetime();
        Ok(Self { scenario, lifetime })
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    /// First and last timestep with any vehicle; `(0, 0)` without traffic.
    pub fn lifetime(&self) -> (i64, i64) {
        self.lifetime
    }

    pub fn check_timestep(&self, timestep: i64) -> Result<()> {
        let (first, last) = self.lifetime;
        if timestep < first || timestep > last {
            return Err(Error::Range { timestep, first, last });
        }
        Ok(())
    }

    /// Vehicles present at `timestep`, ascending by id.
    pub fn vehicles_at(&self, timestep: i64) -> Result<Vec<VehicleSnapshot>> {
        self.check_timestep(timestep)?;
        Ok(self.scenario.vehicles_at(timestep))
    }

    pub fn state(&self, vehicle: i64, timestep: i64) -> Option<&VehicleState> {
        self.scenario.obstacles.get(&vehicle)?.state_at(timestep)
    }
}
