//! Pinhole-camera semantic rendering.
//!
//! Instead of RGB pixels an observation lists the entities the camera can
//! see: landmarks and building facades, each with its projected image box,
//! range and the fraction of its sample points hidden behind other buildings.
//! Image coordinates follow the usual convention (origin top-left, `u` to the
//! right, `v` downward).

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::fmt::Write as _;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

use crate::geom::{deg_to_rad, normalize_yaw, rad_to_deg, Aabb, Vec3};
use crate::world::{AgentPose, CityWorld};

/// Anchor range for rays that hit nothing.
pub const OPEN_SPACE_RANGE: f64 = 200.0;
pub const DEFAULT_OVERLAP_SAMPLES: usize = 256;
const NEAR_PLANE: f64 = 0.05;
const FRUSTUM_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct CameraIntrinsics {
    pub width: u32,
    pub height: u32,
    /// Horizontal field of view, degrees.
    pub horizontal_fov: f64,
}

impl Default for CameraIntrinsics {
    fn default() -> Self {
        Self {
            width: 560,
            height: 560,
            horizontal_fov: 90.0,
        }
    }
}

impl CameraIntrinsics {
    /// Focal length in pixels.
    pub fn focal(&self) -> f64 {
        (self.width as f64 / 2.0) / libm::tan(deg_to_rad(self.horizontal_fov / 2.0))
    }

    pub fn center(&self) -> (f64, f64) {
        (self.width as f64 / 2.0, self.height as f64 / 2.0)
    }

    fn half_extents(&self) -> (f64, f64) {
        let f = self.focal();
        (self.width as f64 / 2.0 / f, self.height as f64 / 2.0 / f)
    }
}

/// Position and orientation of a camera. Unlike [`AgentPose`] the pitch is
/// not limited to the gimbal range, so probe sweeps can look straight up.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct CameraPose {
    pub position: Vec3,
    pub yaw: f64,
    pub pitch: f64,
}

impl From<&AgentPose> for CameraPose {
    fn from(p: &AgentPose) -> Self {
        Self {
            position: p.position,
            yaw: p.yaw,
            pitch: p.gimbal,
        }
    }
}

impl From<AgentPose> for CameraPose {
    fn from(p: AgentPose) -> Self {
        (&p).into()
    }
}

/// Orthonormal camera basis.
#[derive(Debug, Clone, Copy)]
pub struct CameraFrame {
    pub origin: Vec3,
    pub forward: Vec3,
    pub right: Vec3,
    pub up: Vec3,
    intr: CameraIntrinsics,
}

impl CameraFrame {
    pub fn new(pose: &CameraPose, intr: &CameraIntrinsics) -> Self {
        let (y, p) = (deg_to_rad(pose.yaw), deg_to_rad(pose.pitch));
        let forward = Vec3::new(libm::cos(p) * libm::cos(y), libm::cos(p) * libm::sin(y), libm::sin(p));
        let right = Vec3::new(libm::sin(y), -libm::cos(y), 0.0);
        let up = right.cross(forward);
        Self {
            origin: pose.position,
            forward,
            right,
            up,
            intr: *intr,
        }
    }

    /// Camera-space coordinates `(right, up, forward)`.
    pub fn to_camera(&self, p: Vec3) -> Vec3 {
        let d = p - self.origin;
        Vec3::new(d.dot(self.right), d.dot(self.up), d.dot(self.forward))
    }

    pub fn in_frustum(&self, p: Vec3) -> bool {
        let c = self.to_camera(p);
        let (hx, hy) = self.intr.half_extents();
        c.z > NEAR_PLANE && libm::fabs(c.x) <= c.z * hx + FRUSTUM_EPS && libm::fabs(c.y) <= c.z * hy + FRUSTUM_EPS
    }

    /// Pixel coordinates of `p`, or `None` behind the near plane. The result
    /// may lie outside the image.
    pub fn project(&self, p: Vec3) -> Option<(f64, f64)> {
        let c = self.to_camera(p);
        (c.z > NEAR_PLANE).then(|| self.project_camera(c))
    }

    fn project_camera(&self, c: Vec3) -> (f64, f64) {
        let f = self.intr.focal();
        let (cx, cy) = self.intr.center();
        (cx + f * c.x / c.z, cy - f * c.y / c.z)
    }

    /// Unit ray through pixel `(u, v)`.
    pub fn ray(&self, u: f64, v: f64) -> Vec3 {
        let f = self.intr.focal();
        let (cx, cy) = self.intr.center();
        (self.forward + self.right * ((u - cx) / f) - self.up * ((v - cy) / f)).normalized()
    }

    /// Inverse of [`CameraFrame::project`] given the Euclidean range.
    pub fn unproject(&self, u: f64, v: f64, range: f64) -> Vec3 {
        self.origin + self.ray(u, v) * range
    }

    /// Image-space bounding box of the given edges, clipped at the near plane
    /// and to the image rectangle.
    fn edge_box(&self, edges: &[(Vec3, Vec3)]) -> Option<[f64; 4]> {
        let mut bb = [f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY];
        let mut any = false;
        let mut push = |c: Vec3| {
            let (u, v) = self.project_camera(c);
            bb[0] = bb[0].min(u);
            bb[1] = bb[1].min(v);
            bb[2] = bb[2].max(u);
            bb[3] = bb[3].max(v);
            any = true;
        };
        for &(a, b) in edges {
            let (ca, cb) = (self.to_camera(a), self.to_camera(b));
            match (ca.z > NEAR_PLANE, cb.z > NEAR_PLANE) {
                (true, true) => {
                    push(ca);
                    push(cb);
                }
                (true, false) | (false, true) => {
                    let (front, back) = if ca.z > NEAR_PLANE { (ca, cb) } else { (cb, ca) };
                    let t = (front.z - NEAR_PLANE) / (front.z - back.z);
                    push(front);
                    push(front.lerp(back, t));
                }
                (false, false) => {}
            }
        }
        any.then(|| {
            let (w, h) = (self.intr.width as f64, self.intr.height as f64);
            [bb[0].clamp(0.0, w), bb[1].clamp(0.0, h), bb[2].clamp(0.0, w), bb[3].clamp(0.0, h)]
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum EntityKind {
    Landmark,
    Facade,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct Entity {
    pub label: String,
    pub kind: EntityKind,
    /// `[u_min, v_min, u_max, v_max]` in pixels.
    pub image_box: [f64; 4],
    /// Projection of the entity center.
    pub center_px: [f64; 2],
    /// Euclidean range to the entity center, meters.
    pub depth: f64,
    pub occluded_fraction: f64,
    /// Horizontal angle from the camera heading, positive to the left.
    pub bearing: f64,
    /// Angle above the horizontal plane.
    pub elevation: f64,
    pub world_center: Vec3,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct SemanticObservation {
    pub camera_pose: CameraPose,
    pub entities: Vec<Entity>,
    pub step: u32,
}

impl SemanticObservation {
    pub fn entity(&self, label: &str) -> Option<&Entity> {
        self.entities.iter().find(|e| e.label == label)
    }

    pub fn contains(&self, label: &str) -> bool {
        self.entity(label).is_some()
    }

    /// One line per entity, nearest first.
    pub fn to_prompt_text(&self) -> String {
        if self.entities.is_empty() {
            return String::from("(nothing recognizable in view)");
        }
        let mut out = String::new();
        for e in &self.entities {
            let b = e.image_box;
            let _ = writeln!(
                out,
                "{} @ bearing {:.1}°, elevation {:.1}°, distance {:.1} m, box [{:.0},{:.0},{:.0},{:.0}]",
                e.label, e.bearing, e.elevation, e.depth, b[0], b[1], b[2], b[3]
            );
        }
        out.pop();
        out
    }
}

/// A candidate entity before visibility tests.
struct Candidate {
    label: String,
    kind: EntityKind,
    center: Vec3,
    samples: [Vec3; 9],
    edges: Vec<(Vec3, Vec3)>,
    /// Building whose surface carries the entity; excluded from occluders.
    own_building: Option<usize>,
    /// Outward normal for facades; back-facing facades are culled.
    normal: Option<Vec3>,
}

fn box_edges(b: &Aabb) -> Vec<(Vec3, Vec3)> {
    let c = |i: usize| {
        Vec3::new(
            if i & 1 == 0 { b.min.x } else { b.max.x },
            if i & 2 == 0 { b.min.y } else { b.max.y },
            if i & 4 == 0 { b.min.z } else { b.max.z },
        )
    };
    let mut out = Vec::with_capacity(12);
    for i in 0..8 {
        for bit in [1, 2, 4] {
            if i & bit == 0 {
                out.push((c(i), c(i | bit)));
            }
        }
    }
    out
}

fn landmark_candidates(world: &CityWorld, out: &mut Vec<Candidate>) {
    for lm in world.landmarks() {
        let bx = lm.aabb();
        let mut samples = [lm.position; 9];
        for (i, s) in samples.iter_mut().skip(1).enumerate() {
            *s = Vec3::new(
                if i & 1 == 0 { bx.min.x } else { bx.max.x },
                if i & 2 == 0 { bx.min.y } else { bx.max.y },
                if i & 4 == 0 { bx.min.z } else { bx.max.z },
            );
        }
        out.push(Candidate {
            label: lm.label.clone(),
            kind: EntityKind::Landmark,
            center: lm.position,
            samples,
            edges: box_edges(&bx),
            own_building: None,
            normal: None,
        });
    }
}

fn facade_candidates(world: &CityWorld, out: &mut Vec<Candidate>) {
    for (bi, b) in world.buildings().iter().enumerate() {
        let (lo, hi) = (b.min, b.max);
        // (name, normal, fixed point on the face, first span axis, second span axis)
        let faces: [(&str, Vec3, Vec3, Vec3, Vec3); 5] = [
            ("east facade", Vec3::new(1.0, 0.0, 0.0), Vec3::new(hi.x, lo.y, lo.z), Vec3::new(0.0, hi.y - lo.y, 0.0), Vec3::new(0.0, 0.0, hi.z - lo.z)),
            ("west facade", Vec3::new(-1.0, 0.0, 0.0), Vec3::new(lo.x, lo.y, lo.z), Vec3::new(0.0, hi.y - lo.y, 0.0), Vec3::new(0.0, 0.0, hi.z - lo.z)),
            ("north facade", Vec3::new(0.0, 1.0, 0.0), Vec3::new(lo.x, hi.y, lo.z), Vec3::new(hi.x - lo.x, 0.0, 0.0), Vec3::new(0.0, 0.0, hi.z - lo.z)),
            ("south facade", Vec3::new(0.0, -1.0, 0.0), Vec3::new(lo.x, lo.y, lo.z), Vec3::new(hi.x - lo.x, 0.0, 0.0), Vec3::new(0.0, 0.0, hi.z - lo.z)),
            ("roof", Vec3::new(0.0, 0.0, 1.0), Vec3::new(lo.x, lo.y, hi.z), Vec3::new(hi.x - lo.x, 0.0, 0.0), Vec3::new(0.0, hi.y - lo.y, 0.0)),
        ];
        for (name, normal, o, s, t) in faces {
            let mut samples = [Vec3::ZERO; 9];
            let fr = [0.1, 0.5, 0.9];
            for (k, sample) in samples.iter_mut().enumerate() {
                *sample = o + s * fr[k % 3] + t * fr[k / 3];
            }
            // center first
            samples.swap(0, 4);
            let corners = [o, o + s, o + s + t, o + t];
            let edges = (0..4).map(|i| (corners[i], corners[(i + 1) % 4])).collect();
            out.push(Candidate {
                label: format!("{} {}", b.label, name),
                kind: EntityKind::Facade,
                center: o + s * 0.5 + t * 0.5,
                samples,
                edges,
                own_building: Some(bi),
                normal: Some(normal),
            });
        }
    }
}

fn bearing_elevation(from: &CameraPose, p: Vec3) -> (f64, f64) {
    let d = p - from.position;
    let abs_bearing = rad_to_deg(libm::atan2(d.y, d.x));
    let mut bearing = normalize_yaw(abs_bearing - from.yaw);
    if bearing > 180.0 {
        bearing -= 360.0;
    }
    let elevation = rad_to_deg(libm::atan2(d.z, d.horizontal_norm()));
    (bearing, elevation)
}

/// Renders the semantic view from an arbitrary camera pose.
pub fn render_camera(world: &CityWorld, pose: &CameraPose, intr: &CameraIntrinsics, step: u32) -> SemanticObservation {
    let frame = CameraFrame::new(pose, intr);
    let mut candidates = Vec::new();
    landmark_candidates(world, &mut candidates);
    facade_candidates(world, &mut candidates);
    let mut entities = Vec::new();
    for c in candidates {
        if let Some(n) = c.normal {
            if (frame.origin - c.center).dot(n) <= 0.0 {
                continue;
            }
        }
        if !frame.in_frustum(c.center) {
            continue;
        }
        let hidden = c
            .samples
            .iter()
            .filter(|s| !world.line_of_sight_except(frame.origin, **s, c.own_building))
            .count();
        if hidden == c.samples.len() {
            continue;
        }
        let Some(image_box) = frame.edge_box(&c.edges) else {
            continue;
        };
        let Some((u, v)) = frame.project(c.center) else {
            continue;
        };
        let (bearing, elevation) = bearing_elevation(pose, c.center);
        entities.push(Entity {
            label: c.label,
            kind: c.kind,
            image_box,
            center_px: [u, v],
            depth: frame.origin.distance(c.center),
            occluded_fraction: hidden as f64 / c.samples.len() as f64,
            bearing,
            elevation,
            world_center: c.center,
        });
    }
    entities.sort_by(|a, b| a.depth.total_cmp(&b.depth).then_with(|| a.label.cmp(&b.label)));
    SemanticObservation {
        camera_pose: *pose,
        entities,
        step,
    }
}

/// The observation `o_t` at the agent's current pose and gimbal.
pub fn render(world: &CityWorld, pose: &AgentPose, intr: &CameraIntrinsics) -> SemanticObservation {
    render_camera(world, &pose.into(), intr, 0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum ViewTag {
    Front,
    Left,
    Back,
    Right,
    Up,
    Down,
    /// Panorama view at the given yaw offset in degrees.
    Panorama(u16),
}

impl fmt::Display for ViewTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ViewTag::Front => f.write_str("front"),
            ViewTag::Left => f.write_str("left"),
            ViewTag::Back => f.write_str("back"),
            ViewTag::Right => f.write_str("right"),
            ViewTag::Up => f.write_str("up"),
            ViewTag::Down => f.write_str("down"),
            ViewTag::Panorama(o) => write!(f, "yaw+{o}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct ViewSet {
    pub views: Vec<(ViewTag, SemanticObservation)>,
}

impl ViewSet {
    pub fn get(&self, tag: ViewTag) -> Option<&SemanticObservation> {
        self.views.iter().find(|(t, _)| *t == tag).map(|(_, o)| o)
    }

    /// Tags whose view contains `label`.
    pub fn tags_seeing(&self, label: &str) -> Vec<ViewTag> {
        self.views.iter().filter(|(_, o)| o.contains(label)).map(|(t, _)| *t).collect()
    }

    pub fn to_prompt_text(&self) -> String {
        let mut out = String::new();
        for (tag, obs) in &self.views {
            let _ = write!(out, "[view: {tag}]\n{}\n", obs.to_prompt_text());
        }
        out.pop();
        out
    }
}

/// Six transient probe renders: four horizontal directions plus straight up
/// and straight down. The agent's own pose is not touched.
pub fn probe_views(world: &CityWorld, pose: &AgentPose, intr: &CameraIntrinsics) -> ViewSet {
    let at = |yaw_offset: f64, pitch: f64| CameraPose {
        position: pose.position,
        yaw: normalize_yaw(pose.yaw + yaw_offset),
        pitch,
    };
    let specs = [
        (ViewTag::Front, at(0.0, 0.0)),
        (ViewTag::Left, at(90.0, 0.0)),
        (ViewTag::Back, at(180.0, 0.0)),
        (ViewTag::Right, at(270.0, 0.0)),
        (ViewTag::Up, at(0.0, 90.0)),
        (ViewTag::Down, at(0.0, -90.0)),
    ];
    ViewSet {
        views: specs
            .into_iter()
            .map(|(tag, cam)| (tag, render_camera(world, &cam, intr, 0)))
            .collect(),
    }
}

/// Six renders at 60° yaw spacing with the current gimbal pitch.
pub fn panorama(world: &CityWorld, pose: &AgentPose, intr: &CameraIntrinsics) -> ViewSet {
    ViewSet {
        views: (0..6u16)
            .map(|k| {
                let offset = k * 60;
                let cam = CameraPose {
                    position: pose.position,
                    yaw: normalize_yaw(pose.yaw + offset as f64),
                    pitch: pose.gimbal,
                };
                (ViewTag::Panorama(offset), render_camera(world, &cam, intr, 0))
            })
            .collect(),
    }
}

/// Fraction of what camera `a` sees that camera `b` also sees.
///
/// Rays are cast through a uniform pixel grid of `a`; each yields an anchor
/// at the first building hit or at [`OPEN_SPACE_RANGE`]. The result is the
/// share of anchors inside `b`'s frustum with a clear line of sight from `b`.
pub fn fov_overlap(world: &CityWorld, a: &AgentPose, b: &AgentPose, intr: &CameraIntrinsics, samples: usize) -> f64 {
    let samples = samples.max(1);
    let fa = CameraFrame::new(&a.into(), intr);
    let fb = CameraFrame::new(&b.into(), intr);
    let cols = libm::ceil(libm::sqrt(samples as f64)) as usize;
    let rows = samples.div_ceil(cols);
    let (w, h) = (intr.width as f64, intr.height as f64);
    let mut shared = 0usize;
    for k in 0..samples {
        let (r, c) = (k / cols, k % cols);
        let u = (c as f64 + 0.5) / cols as f64 * w;
        let v = (r as f64 + 0.5) / rows as f64 * h;
        let dir = fa.ray(u, v);
        let range = world.ray_hit(fa.origin, dir, OPEN_SPACE_RANGE).unwrap_or(OPEN_SPACE_RANGE);
        let anchor = fa.origin + dir * range;
        if fb.in_frustum(anchor) && world.line_of_sight(fb.origin, anchor) {
            shared += 1;
        }
    }
    shared as f64 / samples as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world::{Building, Landmark};
    use alloc::vec;

    fn bounds() -> Aabb {
        Aabb::new(Vec3::new(-300.0, -300.0, 0.0), Vec3::new(300.0, 300.0, 200.0))
    }

    fn world_with(landmarks: Vec<Landmark>, buildings: Vec<Building>) -> CityWorld {
        CityWorld::new(buildings, landmarks, bounds(), 2.0).unwrap()
    }

    #[test]
    fn focal_length_is_280() {
        assert!((CameraIntrinsics::default().focal() - 280.0).abs() < 1e-9);
    }

    #[test]
    fn optical_axis_maps_to_image_center() {
        let w = world_with(vec![Landmark::new("kiosk", Vec3::new(10.0, 0.0, 50.0))], vec![]);
        let obs = render(&w, &AgentPose::at(0.0, 0.0, 50.0), &CameraIntrinsics::default());
        let e = obs.entity("kiosk").unwrap();
        assert!((e.center_px[0] - 280.0).abs() < 1e-9 && (e.center_px[1] - 280.0).abs() < 1e-9);
        assert!((e.depth - 10.0).abs() < 1e-9);
        assert_eq!(e.occluded_fraction, 0.0);
    }

    #[test]
    fn half_fov_bearing_maps_to_edges() {
        let w = world_with(
            vec![
                Landmark::new("left", Vec3::new(10.0, 10.0, 50.0)),
                Landmark::new("right", Vec3::new(10.0, -10.0, 50.0)),
            ],
            vec![],
        );
        let obs = render(&w, &AgentPose::at(0.0, 0.0, 50.0), &CameraIntrinsics::default());
        assert!(obs.entity("left").unwrap().center_px[0].abs() < 1e-9);
        assert!((obs.entity("right").unwrap().center_px[0] - 560.0).abs() < 1e-9);
        assert!((obs.entity("left").unwrap().bearing - 45.0).abs() < 1e-9);
    }

    #[test]
    fn target_above_axis_has_smaller_v() {
        let w = world_with(vec![Landmark::new("high", Vec3::new(20.0, 0.0, 60.0))], vec![]);
        let obs = render(&w, &AgentPose::at(0.0, 0.0, 50.0), &CameraIntrinsics::default());
        assert!(obs.entity("high").unwrap().center_px[1] < 280.0);
    }

    #[test]
    fn fully_hidden_landmark_is_absent() {
        let w = world_with(
            vec![Landmark::new("statue", Vec3::new(60.0, 0.0, 50.0))],
            vec![Building::new("block", Vec3::new(20.0, -20.0, 0.0), Vec3::new(30.0, 20.0, 100.0))],
        );
        let obs = render(&w, &AgentPose::at(0.0, 0.0, 50.0), &CameraIntrinsics::default());
        assert!(!obs.contains("statue"));
        assert!(obs.contains("block west facade"));
        assert!(!obs.contains("block east facade"));
    }

    #[test]
    fn entities_sorted_by_depth_and_boxes_clipped() {
        let w = world_with(
            vec![
                Landmark::new("far", Vec3::new(80.0, 5.0, 50.0)),
                Landmark::new("near", Vec3::new(3.0, 0.0, 50.0)),
            ],
            vec![Building::new("huge", Vec3::new(40.0, -200.0, 0.0), Vec3::new(45.0, -5.0, 150.0))],
        );
        let obs = render(&w, &AgentPose::at(0.0, 0.0, 50.0), &CameraIntrinsics::default());
        assert!(obs.entities.windows(2).all(|p| p[0].depth <= p[1].depth));
        for e in &obs.entities {
            assert!(e.image_box.iter().all(|v| (0.0..=560.0).contains(v)));
            assert!(e.depth > 0.0);
        }
    }

    #[test]
    fn probe_views_partition_directions() {
        let w = world_with(
            vec![
                Landmark::new("behind", Vec3::new(-30.0, 0.0, 50.0)),
                Landmark::new("below", Vec3::new(0.0, 0.0, 10.0)),
                Landmark::new("above", Vec3::new(0.0, 0.0, 90.0)),
                Landmark::new("port", Vec3::new(0.0, 30.0, 50.0)),
            ],
            vec![],
        );
        let pose = AgentPose::at(0.0, 0.0, 50.0).with_gimbal(-45.0);
        let views = probe_views(&w, &pose, &CameraIntrinsics::default());
        assert_eq!(views.tags_seeing("behind"), vec![ViewTag::Back]);
        assert_eq!(views.tags_seeing("below"), vec![ViewTag::Down]);
        assert_eq!(views.tags_seeing("above"), vec![ViewTag::Up]);
        assert_eq!(views.tags_seeing("port"), vec![ViewTag::Left]);
        assert_eq!(pose.gimbal, -45.0);
    }

    #[test]
    fn probe_views_in_empty_world_are_empty() {
        let w = CityWorld::empty(bounds());
        let views = probe_views(&w, &AgentPose::at(0.0, 0.0, 50.0), &CameraIntrinsics::default());
        assert_eq!(views.views.len(), 6);
        assert!(views.views.iter().all(|(_, o)| o.entities.is_empty()));
    }

    #[test]
    fn panorama_overlap_at_thirty_degrees() {
        let w = world_with(
            vec![Landmark::new("lm", Vec3::new(50.0 * libm::cos(deg_to_rad(30.0)), 50.0 * libm::sin(deg_to_rad(30.0)), 50.0))],
            vec![],
        );
        let p = panorama(&w, &AgentPose::at(0.0, 0.0, 50.0), &CameraIntrinsics::default());
        assert_eq!(p.tags_seeing("lm"), vec![ViewTag::Panorama(0), ViewTag::Panorama(60)]);
        assert_eq!(p, panorama(&w, &AgentPose::at(0.0, 0.0, 50.0), &CameraIntrinsics::default()));
    }

    #[test]
    fn fov_overlap_identity_and_opposed() {
        let w = CityWorld::empty(bounds());
        let intr = CameraIntrinsics::default();
        let a = AgentPose::at(0.0, 0.0, 50.0);
        assert_eq!(fov_overlap(&w, &a, &a, &intr, 256), 1.0);
        assert_eq!(fov_overlap(&w, &a, &a.with_yaw(180.0), &intr, 256), 0.0);
        let o45 = fov_overlap(&w, &a, &a.with_yaw(45.0), &intr, 256);
        assert!(o45 > 0.4 && o45 < 0.6, "{o45}");
    }

    #[test]
    fn prompt_text_has_one_line_per_entity() {
        let w = world_with(
            vec![Landmark::new("a", Vec3::new(10.0, 0.0, 50.0)), Landmark::new("b", Vec3::new(20.0, 1.0, 50.0))],
            vec![],
        );
        let obs = render(&w, &AgentPose::at(0.0, 0.0, 50.0), &CameraIntrinsics::default());
        let text = obs.to_prompt_text();
        assert_eq!(text.lines().count(), 2);
        assert!(text.starts_with("a @ bearing 0.0°, elevation 0.0°, distance 10.0 m, box ["));
    }
}
