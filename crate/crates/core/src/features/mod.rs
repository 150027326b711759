//! Base feature rows for every store plus the protocol for user-defined
//! extractors.

mod custom;

use crate::builders::L2LEdgeRecord;
use crate::geometry::{wrap_angle, LocalFrame, Vec2};
use crate::graph::{Channel, ChannelSchema, GraphSchema};
use crate::scenario::{Lanelet, VehicleSnapshot, VehicleState};

pub use custom::{
    builtin_extractor, builtin_temporal_extractor, register_channels, FeatureExtractor, Speed, StepContext,
    TemporalFeatureExtractor, TimeSinceStart, BUILTIN_EXTRACTORS, BUILTIN_TEMPORAL_EXTRACTORS,
};

pub const DEFAULT_N_PAD: usize = 20;

/// Channel names and units used by the base extractors.
pub mod channel {
    pub const METERS: &str = "m";
    pub const RADIANS: &str = "rad";
    pub const SECONDS: &str = "s";

    pub const POSITION: &str = "position";
    pub const ORIENTATION: &str = "orientation";
    pub const YAW_RATE: &str = "yaw_rate";
    pub const VELOCITY: &str = "velocity";
    pub const ACCELERATION: &str = "acceleration";
    pub const WIDTH: &str = "width";
    pub const LENGTH: &str = "length";
    pub const LEFT_VERTICES: &str = "left_vertices";
    pub const RIGHT_VERTICES: &str = "right_vertices";

    pub const DISTANCE: &str = "distance";
    pub const REL_POSITION: &str = "rel_position";
    pub const REL_ORIENTATION: &str = "rel_orientation";
    pub const REL_VELOCITY: &str = "rel_velocity";
    pub const REL_ACCELERATION: &str = "rel_acceleration";
    pub const SOURCE_ARCLENGTH: &str = "source_arclength";
    pub const TARGET_ARCLENGTH: &str = "target_arclength";
    pub const ADJACENCY_TYPE: &str = "adjacency_type";
    pub const TIME_DELTA: &str = "time_delta";

    pub const LEFT_DISTANCE: &str = "left_distance";
    pub const RIGHT_DISTANCE: &str = "right_distance";
    pub const CENTER_OFFSET: &str = "center_offset";
    pub const HEADING_ERROR: &str = "heading_error";
    pub const ARCLENGTH: &str = "arclength";
    pub const ARCLENGTH_REL: &str = "arclength_rel";
}

use channel::*;

fn c(name: &str, width: usize, unit: &str) -> Channel {
    Channel::new(name, width, unit)
}

fn schema(channels: Vec<Channel>) -> ChannelSchema {
    ChannelSchema::new(channels).expect("base channel names are unique")
}

pub fn vehicle_schema() -> ChannelSchema {
    schema(vec![
        c(POSITION, 2, METERS),
        c(ORIENTATION, 1, RADIANS),
        c(YAW_RATE, 1, "rad/s"),
        c(VELOCITY, 2, "m/s"),
        c(ACCELERATION, 2, "m/s^2"),
        c(WIDTH, 1, METERS),
        c(LENGTH, 1, METERS),
    ])
}

pub fn lanelet_schema(n_pad: usize) -> ChannelSchema {
    schema(vec![
        c(POSITION, 2, METERS),
        c(LENGTH, 1, METERS),
        c(ORIENTATION, 1, RADIANS),
        c(LEFT_VERTICES, 2 * n_pad, METERS),
        c(RIGHT_VERTICES, 2 * n_pad, METERS),
    ])
}

pub fn l2l_schema() -> ChannelSchema {
    schema(vec![
        c(DISTANCE, 1, METERS),
        c(REL_POSITION, 2, METERS),
        c(REL_ORIENTATION, 1, RADIANS),
        c(SOURCE_ARCLENGTH, 1, METERS),
        c(TARGET_ARCLENGTH, 1, METERS),
        c(ADJACENCY_TYPE, 1, "code"),
    ])
}

fn v2v_channels() -> Vec<Channel> {
    vec![
        c(DISTANCE, 1, METERS),
        c(REL_POSITION, 2, METERS),
        c(REL_ORIENTATION, 1, RADIANS),
        c(REL_VELOCITY, 2, "m/s"),
        c(REL_ACCELERATION, 2, "m/s^2"),
    ]
}

pub fn v2v_schema() -> ChannelSchema {
    schema(v2v_channels())
}

pub fn vtv_schema() -> ChannelSchema {
    let mut channels = v2v_channels();
    channels.push(c(TIME_DELTA, 1, SECONDS));
    schema(channels)
}

pub fn v2l_schema() -> ChannelSchema {
    schema(vec![
        c(LEFT_DISTANCE, 1, METERS),
        c(RIGHT_DISTANCE, 1, METERS),
        c(CENTER_OFFSET, 1, METERS),
        c(HEADING_ERROR, 1, RADIANS),
        c(ARCLENGTH, 1, METERS),
        c(ARCLENGTH_REL, 1, ""),
    ])
}

/// Base channels of every store. L2V mirrors V2L.
pub fn default_schema(n_pad: usize) -> GraphSchema {
    GraphSchema {
        v: vehicle_schema(),
        l: lanelet_schema(n_pad),
        l2l: l2l_schema(),
        v2v: v2v_schema(),
        v2l: v2l_schema(),
        l2v: v2l_schema(),
        vtv: vtv_schema(),
    }
}

pub fn vehicle_row(v: &VehicleSnapshot) -> [f64; 10] {
    let s = &v.state;
    let a = s.acceleration_or_zero();
    [
        s.position.x,
        s.position.y,
        s.orientation,
        s.yaw_rate_or_zero(),
        s.velocity.x,
        s.velocity.y,
        a.x,
        a.y,
        v.width,
        v.length,
    ]
}

/// Lanelet row and its number of valid (non-padded) vertices per bound.
/// Bounds with more than `n_pad` vertices are resampled to `n_pad` points at
/// uniform arclength; shorter ones are padded with NaN.
pub fn lanelet_row(lanelet: &Lanelet, n_pad: usize) -> (Vec<f64>, usize) {
    let frame = lanelet.frame();
    let valid = lanelet.center.len().min(n_pad);
    let mut row = Vec::with_capacity(4 + 4 * n_pad);
    row.extend([frame.origin.x, frame.origin.y, lanelet.length(), frame.orientation]);
    for bound in [&lanelet.left, &lanelet.right] {
        let points = if bound.len() > n_pad { bound.resample(n_pad) } else { bound.points().to_vec() };
        for p in &points {
            let q = frame.to_local(*p);
            row.extend([q.x, q.y]);
        }
        row.resize(row.len() + 2 * (n_pad - points.len()), f64::NAN);
    }
    (row, valid)
}

pub fn l2l_row(edge: &L2LEdgeRecord, source: &Lanelet, target: &Lanelet) -> [f64; 7] {
    let fs = source.frame();
    let ft = target.frame();
    let rel = fs.to_local(ft.origin);
    [
        ft.origin.distance(fs.origin),
        rel.x,
        rel.y,
        wrap_angle(ft.orientation - fs.orientation),
        edge.s_source,
        edge.s_target,
        edge.adjacency.code() as f64,
    ]
}

/// Pose and motion of `target` seen from `source`'s body frame.
pub fn v2v_row(source: &VehicleState, target: &VehicleState) -> [f64; 8] {
    let frame = LocalFrame::new(source.position, source.orientation);
    let rel = frame.to_local(target.position);
    let dv = frame.vector_to_local(target.velocity - source.velocity);
    let da = frame.vector_to_local(target.acceleration_or_zero() - source.acceleration_or_zero());
    [
        target.position.distance(source.position),
        rel.x,
        rel.y,
        wrap_angle(target.orientation - source.orientation),
        dv.x,
        dv.y,
        da.x,
        da.y,
    ]
}

pub fn vtv_row(older: &VehicleState, newer: &VehicleState, time_delta: f64) -> [f64; 9] {
    let b = v2v_row(older, newer);
    [b[0], b[1], b[2], b[3], b[4], b[5], b[6], b[7], time_delta]
}

/// Boundary distances, signed centerline offset `(d_l - d_r) / 2`, heading
/// error against the centerline tangent at the projection, and centerline
/// arclength (absolute and normalized).
pub fn v2l_row(position: Vec2, orientation: f64, lanelet: &Lanelet) -> [f64; 6] {
    let d_l = lanelet.left.project(position).distance();
    let d_r = lanelet.right.project(position).distance();
    let proj = lanelet.center.project(position);
    let length = lanelet.length();
    [
        d_l,
        d_r,
        (d_l - d_r) / 2.0,
        wrap_angle(proj.tangent_orientation - orientation),
        proj.arclength,
        (proj.arclength / length).clamp(0.0, 1.0),
    ]
}

pub(crate) fn to_f32(row: &[f64]) -> Vec<f32> {
    row.iter().map(|&v| v as f32).collect()
}
