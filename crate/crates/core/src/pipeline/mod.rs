//! Scenario preprocessors and filters, their left-to-right composition, and
//! graph postprocessors.

mod post;
mod segment;

use std::fmt;
use std::ops::Shr;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::scenario::Scenario;

pub use post::{apply_postprocessors, Postprocessor, RemoveOffroadVehicles, TrafficJam, BUILTIN_POSTPROCESSORS};
pub use segment::{segment_lanelets, SegmentLanelets};

pub trait ScenarioPreprocessor: Send + Sync {
    fn name(&self) -> String;
    fn apply(&self, scenario: Scenario) -> Result<Scenario>;
}

/// Accept/reject verdict on a scenario. Must be pure.
pub trait ScenarioFilter: Send + Sync {
    fn name(&self) -> String;
    fn accept(&self, scenario: &Scenario) -> Result<bool>;
}

#[derive(Clone)]
pub enum ScenarioTransform {
    Preprocessor(Arc<dyn ScenarioPreprocessor>),
    Filter(Arc<dyn ScenarioFilter>),
}

impl ScenarioTransform {
    pub fn name(&self) -> String {
        match self {
            ScenarioTransform::Preprocessor(p) => p.name(),
            ScenarioTransform::Filter(f) => f.name(),
        }
    }
}

impl fmt::Debug for ScenarioTransform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScenarioTransform::Preprocessor(p) => write!(f, "Preprocessor({})", p.name()),
            ScenarioTransform::Filter(x) => write!(f, "Filter({})", x.name()),
        }
    }
}

/// Ordered transforms, applied left to right. Build with `>>`.
#[derive(Clone, Debug, Default)]
pub struct TransformChain {
    elements: Vec<ScenarioTransform>,
}

impl TransformChain {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, t: ScenarioTransform) {
        self.elements.push(t);
    }

    pub fn elements(&self) -> &[ScenarioTransform] {
        &self.elements
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Runs the chain. `None` means a filter rejected the scenario; later
    /// elements are not run.
    pub fn apply(&self, scenario: Scenario) -> Result<Option<Scenario>> {
        let mut current = scenario;
        for element in &self.elements {
            match element {
                ScenarioTransform::Preprocessor(p) => {
                    current = p.apply(current).map_err(|e| Error::component("preprocessor", p.name(), e))?;
                }
                ScenarioTransform::Filter(f) => {
                    if !f.accept(&current).map_err(|e| Error::component("filter", f.name(), e))? {
                        return Ok(None);
                    }
                }
            }
        }
        Ok(Some(current))
    }
}

impl From<ScenarioTransform> for TransformChain {
    fn from(t: ScenarioTransform) -> Self {
        Self { elements: vec![t] }
    }
}

impl<R: Into<TransformChain>> Shr<R> for TransformChain {
    type Output = TransformChain;

    fn shr(mut self, rhs: R) -> TransformChain {
        self.elements.extend(rhs.into().elements);
        self
    }
}

macro_rules! chainable {
    ($ty:ty, $variant:ident) => {
        impl From<$ty> for ScenarioTransform {
            fn from(t: $ty) -> Self {
                ScenarioTransform::$variant(Arc::new(t))
            }
        }

        impl From<$ty> for TransformChain {
            fn from(t: $ty) -> Self {
                ScenarioTransform::from(t).into()
            }
        }

        impl<R: Into<TransformChain>> Shr<R> for $ty {
            type Output = TransformChain;

            fn shr(self, rhs: R) -> TransformChain {
                TransformChain::from(self) >> rhs
            }
        }
    };
}

chainable!(TrafficFilter, Filter);
chainable!(SegmentLanelets, Preprocessor);

/// Accepts scenarios with at least `min` dynamic obstacles.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrafficFilter {
    pub min: usize,
}

impl TrafficFilter {
    pub fn new(min: usize) -> Self {
        Self { min }
    }
}

impl ScenarioFilter for TrafficFilter {
    fn name(&self) -> String {
        format!("TrafficFilter(min={})", self.min)
    }

    fn accept(&self, scenario: &Scenario) -> Result<bool> {
        Ok(scenario.obstacles.len() >= self.min)
    }
}
