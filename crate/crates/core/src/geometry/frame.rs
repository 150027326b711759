use super::Vec2;

/// A rigid 2-D coordinate frame: origin plus x-axis orientation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalFrame {
    pub origin: Vec2,
    pub orientation: f64,
}

impl LocalFrame {
    pub fn new(origin: Vec2, orientation: f64) -> Self {
        Self { origin, orientation }
    }

    /// Expresses a global point in this frame.
    pub fn to_local(&self, q: Vec2) -> Vec2 {
        (q - self.origin).rotate(-self.orientation)
    }

    pub fn from_local(&self, q: Vec2) -> Vec2 {
        q.rotate(self.orientation) + self.origin
    }

    /// Rotates a free vector (velocity, acceleration) into this frame.
    pub fn vector_to_local(&self, v: Vec2) -> Vec2 {
        v.rotate(-self.orientation)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn quarter_turn() {
        let f = LocalFrame::new(Vec2::ZERO, FRAC_PI_2);
        let l = f.to_local(Vec2::new(0.0, 5.0));
        assert!((l.x - 5.0).abs() < 1e-12 && l.y.abs() < 1e-12);
    }

    #[test]
    fn origin_maps_to_zero() {
        let f = LocalFrame::new(Vec2::new(3.0, -2.0), 1.1);
        assert_eq!(f.to_local(Vec2::new(3.0, -2.0)), Vec2::ZERO);
    }

    proptest! {
        #[test]
        fn roundtrip(ox in -1e3..1e3f64, oy in -1e3..1e3f64, th in -4.0..4.0f64, qx in -1e3..1e3f64, qy in -1e3..1e3f64) {
            let f = LocalFrame::new(Vec2::new(ox, oy), th);
            let q = Vec2::new(qx, qy);
            let back = f.from_local(f.to_local(q));
            prop_assert!(back.distance(q) < 1e-9);
        }
    }
}
