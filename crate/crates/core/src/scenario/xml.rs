//! Reader and writer for the supported subset of the CommonRoad 2020a XML
//! schema: lanelet bounds and topology, and dynamic obstacles with a
//! rectangular shape, an initial state and a state trajectory.
//!
//! Scalar speeds and accelerations are longitudinal; they are expanded to
//! planar vectors along the state heading. An optional `centerVertices`
//! element overrides the derived midpoint centerline.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use roxmltree::{Document, Node};

use super::{Adjacency, DynamicObstacle, Lanelet, Scenario, VehicleState};
use crate::error::{Error, Result};
use crate::geometry::{Polyline, Vec2};

pub fn parse_scenario_bytes(bytes: &[u8]) -> Result<Scenario> {
    let text = std::str::from_utf8(bytes).map_err(|e| {
        let line = bytes[..e.valid_up_to()].iter().filter(|&&b| b == b'\n').count() as u32 + 1;
        Error::Parse { line, message: format!("invalid UTF-8: {e}") }
    })?;
    parse_scenario(text)
}

pub fn parse_scenario(text: &str) -> Result<Scenario> {
    let doc = Document::parse(text).map_err(|e| Error::Parse {
        line: e.pos().row,
        message: e.to_string(),
    })?;
    let mut parser = Parser { doc: &doc, ignored: BTreeSet::new() };
    let scenario = parser.scenario(doc.root_element())?;
    if !parser.ignored.is_empty() {
        log::warn!(
            "scenario {}: ignored unsupported elements: {}",
            scenario.id,
            parser.ignored.iter().cloned().collect::<Vec<_>>().join(", ")
        );
    }
    scenario.validate()?;
    Ok(scenario)
}

struct Parser<'a, 'input> {
    doc: &'a Document<'input>,
    ignored: BTreeSet<String>,
}

fn elements<'a, 'input>(node: Node<'a, 'input>) -> impl Iterator<Item = Node<'a, 'input>> {
    node.children().filter(|n| n.is_element())
}

fn child<'a, 'input>(node: Node<'a, 'input>, name: &str) -> Option<Node<'a, 'input>> {
    elements(node).find(|n| n.has_tag_name(name))
}

impl<'a, 'input> Parser<'a, 'input> {
    fn err(&self, node: Node, message: impl Into<String>) -> Error {
        Error::Parse {
            line: self.doc.text_pos_at(node.range().start).row,
            message: message.into(),
        }
    }

    fn required(&self, node: Node<'a, 'input>, name: &str) -> Result<Node<'a, 'input>> {
        child(node, name).ok_or_else(|| {
            self.err(node, format!("<{}> is missing <{name}>", node.tag_name().name()))
        })
    }

    fn attr<T: std::str::FromStr>(&self, node: Node, name: &str) -> Result<T> {
        let raw = node.attribute(name).ok_or_else(|| {
            self.err(node, format!("<{}> is missing attribute `{name}`", node.tag_name().name()))
        })?;
        raw.trim()
            .parse()
            .map_err(|_| self.err(node, format!("attribute `{name}`: cannot parse `{raw}`")))
    }

    fn number<T: std::str::FromStr>(&self, node: Node) -> Result<T> {
        let raw = node.text().unwrap_or("").trim();
        raw.parse()
            .map_err(|_| self.err(node, format!("<{}>: cannot parse `{raw}`", node.tag_name().name())))
    }

    /// `<exact>` or the midpoint of `<intervalStart>`/`<intervalEnd>`.
    fn value(&self, node: Node) -> Result<f64> {
        if let Some(e) = child(node, "exact") {
            return self.number(e);
        }
        match (child(node, "intervalStart"), child(node, "intervalEnd")) {
            (Some(a), Some(b)) => Ok(0.5 * (self.number::<f64>(a)? + self.number::<f64>(b)?)),
            _ => Err(self.err(node, format!("<{}> has no exact or interval value", node.tag_name().name()))),
        }
    }

    fn point(&self, node: Node<'a, 'input>) -> Result<Vec2> {
        let x = self.number(self.required(node, "x")?)?;
        let y = self.number(self.required(node, "y")?)?;
        Ok(Vec2::new(x, y))
    }

    fn polyline(&self, node: Node<'a, 'input>, lanelet: i64) -> Result<Polyline> {
        let mut pts = Vec::new();
        for p in elements(node) {
            if p.has_tag_name("point") {
                pts.push(self.point(p)?);
            }
        }
        Polyline::new(pts).map_err(|e| {
            Error::Geometry(format!(
                "lanelet {lanelet} <{}> (line {}): {e}",
                node.tag_name().name(),
                self.doc.text_pos_at(node.range().start).row
            ))
        })
    }

    fn scenario(&mut self, root: Node<'a, 'input>) -> Result<Scenario> {
        if !root.has_tag_name("commonRoad") {
            return Err(self.err(root, format!("expected <commonRoad> root, found <{}>", root.tag_name().name())));
        }
        let dt: f64 = self.attr(root, "timeStepSize")?;
        let id = root.attribute("benchmarkID").unwrap_or("").to_string();
        let mut lanelets = BTreeMap::new();
        let mut obstacles = BTreeMap::new();
        for node in elements(root) {
            match node.tag_name().name() {
                "lanelet" => {
                    let l = self.lanelet(node)?;
                    if lanelets.insert(l.id, l).is_some() {
                        return Err(self.err(node, "duplicate lanelet id"));
                    }
                }
                "dynamicObstacle" => {
                    if let Some(o) = self.obstacle(node)? {
                        if obstacles.insert(o.id, o).is_some() {
                            return Err(self.err(node, "duplicate obstacle id"));
                        }
                    }
                }
                other => {
                    self.ignored.insert(other.to_string());
                }
            }
        }
        Ok(Scenario { id, dt, lanelets, obstacles })
    }

    fn adjacency(&self, node: Node) -> Result<Adjacency> {
        let id = self.attr(node, "ref")?;
        let same_direction = match node.attribute("drivingDir").unwrap_or("same") {
            "same" => true,
            "opposite" => false,
            other => return Err(self.err(node, format!("unknown drivingDir `{other}`"))),
        };
        Ok(Adjacency { id, same_direction })
    }

    fn lanelet(&mut self, node: Node<'a, 'input>) -> Result<Lanelet> {
        let id: i64 = self.attr(node, "id")?;
        let left = self.polyline(self.required(node, "leftBound")?, id)?;
        let right = self.polyline(self.required(node, "rightBound")?, id)?;
        let center = match child(node, "centerVertices") {
            Some(c) => Some(self.polyline(c, id)?),
            None => None,
        };
        let mut lanelet = Lanelet::new(id, left, right, center)?;
        for c in elements(node) {
            match c.tag_name().name() {
                "leftBound" | "rightBound" | "centerVertices" => {}
                "predecessor" => {
                    lanelet.predecessors.insert(self.attr(c, "ref")?);
                }
                "successor" => {
                    lanelet.successors.insert(self.attr(c, "ref")?);
                }
                "adjacentLeft" => lanelet.adjacent_left = Some(self.adjacency(c)?),
                "adjacentRight" => lanelet.adjacent_right = Some(self.adjacency(c)?),
                other => {
                    self.ignored.insert(format!("lanelet/{other}"));
                }
            }
        }
        Ok(lanelet)
    }

    fn obstacle(&mut self, node: Node<'a, 'input>) -> Result<Option<DynamicObstacle>> {
        let id: i64 = self.attr(node, "id")?;
        let shape = self.required(node, "shape")?;
        let Some(rect) = child(shape, "rectangle") else {
            log::warn!("dynamic obstacle {id}: only rectangle shapes are supported, skipping");
            return Ok(None);
        };
        let length: f64 = self.number(self.required(rect, "length")?)?;
        let width: f64 = self.number(self.required(rect, "width")?)?;
        let mut trajectory = vec![self.state(self.required(node, "initialState")?)?];
        if let Some(traj) = child(node, "trajectory") {
            for s in elements(traj).filter(|s| s.has_tag_name("state")) {
                trajectory.push(self.state(s)?);
            }
        }
        for c in elements(node) {
            if !matches!(c.tag_name().name(), "shape" | "initialState" | "trajectory" | "type") {
                self.ignored.insert(format!("dynamicObstacle/{}", c.tag_name().name()));
            }
        }
        Ok(Some(DynamicObstacle { id, length, width, trajectory }))
    }

    fn state(&self, node: Node<'a, 'input>) -> Result<VehicleState> {
        let position_node = self.required(node, "position")?;
        let position = self.point(child(position_node, "point").ok_or_else(|| {
            self.err(position_node, "only point positions are supported")
        })?)?;
        let orientation = self.value(self.required(node, "orientation")?)?;
        let time_node = self.required(node, "time")?;
        let timestep: i64 = self.number(
            child(time_node, "exact").ok_or_else(|| self.err(time_node, "time must be exact"))?,
        )?;
        let speed = self.value(self.required(node, "velocity")?)?;
        let heading = Vec2::from_angle(orientation);
        let mut state = VehicleState::new(timestep, position, orientation, heading * speed);
        if let Some(a) = child(node, "acceleration") {
            state.acceleration = Some(heading * self.value(a)?);
        }
        if let Some(w) = child(node, "yawRate") {
            state.yaw_rate = Some(self.value(w)?);
        }
        Ok(state)
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn write_points(out: &mut String, tag: &str, p: &Polyline) {
    let _ = writeln!(out, "    <{tag}>");
    for v in p.points() {
        let _ = writeln!(out, "      <point><x>{}</x><y>{}</y></point>", v.x, v.y);
    }
    let _ = writeln!(out, "    </{tag}>");
}

fn write_state(out: &mut String, tag: &str, s: &VehicleState) {
    let heading = Vec2::from_angle(s.orientation);
    let _ = writeln!(out, "    <{tag}>");
    let _ = writeln!(
        out,
        "      <position><point><x>{}</x><y>{}</y></point></position>",
        s.position.x, s.position.y
    );
    let _ = writeln!(out, "      <orientation><exact>{}</exact></orientation>", s.orientation);
    let _ = writeln!(out, "      <time><exact>{}</exact></time>", s.timestep);
    let _ = writeln!(out, "      <velocity><exact>{}</exact></velocity>", s.velocity.dot(heading));
    if let Some(a) = s.acceleration {
        let _ = writeln!(out, "      <acceleration><exact>{}</exact></acceleration>", a.dot(heading));
    }
    if let Some(w) = s.yaw_rate {
        let _ = writeln!(out, "      <yawRate><exact>{w}</exact></yawRate>");
    }
    let _ = writeln!(out, "    </{tag}>");
}

/// Serializes a scenario to the supported XML subset. Vector velocities and
/// accelerations are written as their component along the heading.
pub fn write_scenario(scenario: &Scenario) -> String {
    let mut out = String::new();
    let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        out,
        r#"<commonRoad commonRoadVersion="2020a" benchmarkID="{}" timeStepSize="{}">"#,
        escape(&scenario.id),
        scenario.dt
    );
    for l in scenario.lanelets.values() {
        let _ = writeln!(out, r#"  <lanelet id="{}">"#, l.id);
        write_points(&mut out, "leftBound", &l.left);
        write_points(&mut out, "rightBound", &l.right);
        write_points(&mut out, "centerVertices", &l.center);
        for p in &l.predecessors {
            let _ = writeln!(out, r#"    <predecessor ref="{p}"/>"#);
        }
        for s in &l.successors {
            let _ = writeln!(out, r#"    <successor ref="{s}"/>"#);
        }
        for (tag, adj) in [("adjacentLeft", l.adjacent_left), ("adjacentRight", l.adjacent_right)] {
            if let Some(a) = adj {
                let dir = if a.same_direction { "same" } else { "opposite" };
                let _ = writeln!(out, r#"    <{tag} ref="{}" drivingDir="{dir}"/>"#, a.id);
            }
        }
        let _ = writeln!(out, "  </lanelet>");
    }
    for o in scenario.obstacles.values() {
        let _ = writeln!(out, r#"  <dynamicObstacle id="{}">"#, o.id);
        let _ = writeln!(out, "    <type>car</type>");
        let _ = writeln!(
            out,
            "    <shape><rectangle><length>{}</length><width>{}</width></rectangle></shape>",
            o.length, o.width
        );
        if let Some((first, rest)) = o.trajectory.split_first() {
            write_state(&mut out, "initialState", first);
            if !rest.is_empty() {
                let _ = writeln!(out, "    <trajectory>");
                for s in rest {
                    write_state(&mut out, "state", s);
                }
                let _ = writeln!(out, "    </trajectory>");
            }
        }
        let _ = writeln!(out, "  </dynamicObstacle>");
    }
    let _ = writeln!(out, "</commonRoad>");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"<?xml version="1.0"?>
<commonRoad benchmarkID="TEST-1" timeStepSize="0.1">
  <lanelet id="1">
    <leftBound><point><x>0</x><y>2</y></point><point><x>10</x><y>2</y></point></leftBound>
    <rightBound><point><x>0</x><y>-2</y></point><point><x>10</x><y>-2</y></point></rightBound>
  </lanelet>
</commonRoad>"#;

    #[test]
    fn minimal_lanelet_gets_midpoint_centerline() {
        let s = parse_scenario(MINIMAL).unwrap();
        assert_eq!(s.id, "TEST-1");
        assert_eq!(s.dt, 0.1);
        assert_eq!(s.lanelets.len(), 1);
        assert!(s.obstacles.is_empty());
        let c = s.lanelets[&1].center.points();
        assert_eq!(c, &[Vec2::new(0.0, 0.0), Vec2::new(10.0, 0.0)]);
    }

    #[test]
    fn scalar_speed_becomes_vector() {
        let xml = r#"<commonRoad benchmarkID="v" timeStepSize="0.1">
  <dynamicObstacle id="7">
    <type>car</type>
    <shape><rectangle><length>4.5</length><width>1.8</width></rectangle></shape>
    <initialState>
      <position><point><x>1</x><y>2</y></point></position>
      <orientation><exact>0</exact></orientation>
      <time><exact>0</exact></time>
      <velocity><exact>5</exact></velocity>
    </initialState>
  </dynamicObstacle>
</commonRoad>"#;
        let s = parse_scenario(xml).unwrap();
        let st = &s.obstacles[&7].trajectory[0];
        assert_eq!(st.velocity, Vec2::new(5.0, 0.0));
        assert_eq!(st.acceleration, None);
    }

    #[test]
    fn mutual_references_resolve() {
        let xml = r#"<commonRoad benchmarkID="r" timeStepSize="0.1">
  <lanelet id="1">
    <leftBound><point><x>0</x><y>2</y></point><point><x>10</x><y>2</y></point></leftBound>
    <rightBound><point><x>0</x><y>-2</y></point><point><x>10</x><y>-2</y></point></rightBound>
    <successor ref="2"/>
  </lanelet>
  <lanelet id="2">
    <leftBound><point><x>10</x><y>2</y></point><point><x>20</x><y>2</y></point></leftBound>
    <rightBound><point><x>10</x><y>-2</y></point><point><x>20</x><y>-2</y></point></rightBound>
    <predecessor ref="1"/>
  </lanelet>
</commonRoad>"#;
        let s = parse_scenario(xml).unwrap();
        // reference closure over the parsed id set
        let ids: BTreeSet<i64> = s.lanelets.keys().copied().collect();
        for l in s.lanelets.values() {
            assert!(l.predecessors.is_subset(&ids) && l.successors.is_subset(&ids));
        }
        assert!(s.lanelets[&1].successors.contains(&2));
        assert!(s.lanelets[&2].predecessors.contains(&1));
    }

    #[test]
    fn malformed_document_reports_line() {
        let err = parse_scenario("<commonRoad timeStepSize=\"0.1\">\n<lanelet id=\"1\">\n</commonRoad>").unwrap_err();
        match err {
            Error::Parse { line, .. } => assert!(line >= 2),
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn dangling_reference_is_validation_error() {
        let xml = MINIMAL.replace("</rightBound>", "</rightBound><successor ref=\"99\"/>");
        match parse_scenario(&xml).unwrap_err() {
            Error::Validation(m) => assert!(m.contains("99")),
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn single_point_bound_is_geometry_error() {
        let xml = MINIMAL.replace("<point><x>10</x><y>2</y></point>", "");
        assert!(matches!(parse_scenario(&xml), Err(Error::Geometry(_))));
    }

    #[test]
    fn bad_number_names_line() {
        let xml = MINIMAL.replace("<x>10</x><y>2</y>", "<x>ten</x><y>2</y>");
        match parse_scenario(&xml).unwrap_err() {
            Error::Parse { line, message } => {
                assert_eq!(line, 4);
                assert!(message.contains("ten"));
            }
            other => panic!("unexpected {other}"),
        }
    }
}
