//! Slow, independent reference implementations used to cross-check the
//! production code. Shared with the acceptance suite via `#[path]`.
#![allow(dead_code)]

use std::collections::BTreeSet;

use aeronav_core::world::Building;
use aeronav_core::{Aabb, AgentPose, CityWorld, Vec3};

/// Camera-space coordinates (forward, left, up) built from two plain
/// rotations: undo yaw about z, then undo pitch about the new y axis.
pub fn camera_coords(pose: &AgentPose, p: Vec3) -> (f64, f64, f64) {
    let d = p - pose.position;
    let (sy, cy) = pose.yaw.to_radians().sin_cos();
    let x1 = cy * d.x + sy * d.y;
    let y1 = -sy * d.x + cy * d.y;
    let z1 = d.z;
    let (sp, cp) = pose.gimbal.to_radians().sin_cos();
    let fwd = cp * x1 + sp * z1;
    let up = -sp * x1 + cp * z1;
    (fwd, y1, up)
}

/// Square 90 degree frustum test with a 0.1 m near plane.
pub fn in_square_frustum(pose: &AgentPose, p: Vec3, half_fov_deg: f64) -> bool {
    let (f, l, u) = camera_coords(pose, p);
    let t = half_fov_deg.to_radians().tan();
    f > 0.1 && l.abs() <= f * t + 1e-9 && u.abs() <= f * t + 1e-9
}

fn strictly_inside(b: &Building, p: Vec3) -> bool {
    p.x > b.min.x && p.x < b.max.x && p.y > b.min.y && p.y < b.max.y && p.z > b.min.z && p.z < b.max.z
}

/// Marches along the open segment and reports whether any sample falls
/// strictly inside a building other than `skip`. A non-finite step disables
/// the occlusion test.
pub fn ray_march_blocked(world: &CityWorld, a: Vec3, b: Vec3, skip: Option<usize>, step: f64) -> bool {
    if !step.is_finite() {
        return false;
    }
    let len = a.distance(b);
    let n = (len / step).ceil().max(1.0) as usize;
    let lo = a.min(b);
    let hi = a.max(b);
    for (i, bld) in world.buildings().iter().enumerate() {
        if Some(i) == skip {
            continue;
        }
        let overlaps = bld.min.x <= hi.x
            && bld.max.x >= lo.x
            && bld.min.y <= hi.y
            && bld.max.y >= lo.y
            && bld.min.z <= hi.z
            && bld.max.z >= lo.z;
        if !overlaps {
            continue;
        }
        for k in 1..n {
            if strictly_inside(bld, a.lerp(b, k as f64 / n as f64)) {
                return true;
            }
        }
    }
    false
}

/// Labels of the entities a camera at `pose` should report.
pub fn visible_labels(world: &CityWorld, pose: &AgentPose, half_fov_deg: f64, step: f64) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    let eye = pose.position;
    for lm in world.landmarks() {
        let h = lm.size / 2.0;
        let mut samples = vec![lm.position];
        for sx in [-h, h] {
            for sy in [-h, h] {
                for sz in [-h, h] {
                    samples.push(lm.position + Vec3::new(sx, sy, sz));
                }
            }
        }
        if in_square_frustum(pose, lm.position, half_fov_deg)
            && samples.iter().any(|s| !ray_march_blocked(world, eye, *s, None, step))
        {
            out.insert(lm.label.clone());
        }
    }
    for (bi, b) in world.buildings().iter().enumerate() {
        let mid = |lo: f64, hi: f64, f: f64| lo + (hi - lo) * f;
        let fr = [0.1, 0.5, 0.9];
        type Face = (&'static str, bool, Box<dyn Fn(f64, f64) -> Vec3>);
        let (lo, hi) = (b.min, b.max);
        let faces: Vec<Face> = vec![
            ("east facade", eye.x > hi.x, Box::new(move |s, t| Vec3::new(hi.x, mid(lo.y, hi.y, s), mid(lo.z, hi.z, t)))),
            ("west facade", eye.x < lo.x, Box::new(move |s, t| Vec3::new(lo.x, mid(lo.y, hi.y, s), mid(lo.z, hi.z, t)))),
            ("north facade", eye.y > hi.y, Box::new(move |s, t| Vec3::new(mid(lo.x, hi.x, s), hi.y, mid(lo.z, hi.z, t)))),
            ("south facade", eye.y < lo.y, Box::new(move |s, t| Vec3::new(mid(lo.x, hi.x, s), lo.y, mid(lo.z, hi.z, t)))),
            ("roof", eye.z > hi.z, Box::new(move |s, t| Vec3::new(mid(lo.x, hi.x, s), mid(lo.y, hi.y, t), hi.z))),
        ];
        for (name, facing, at) in faces {
            if !facing || !in_square_frustum(pose, at(0.5, 0.5), half_fov_deg) {
                continue;
            }
            let seen = fr
                .iter()
                .flat_map(|s| fr.iter().map(move |t| (*s, *t)))
                .any(|(s, t)| !ray_march_blocked(world, eye, at(s, t), Some(bi), step));
            if seen {
                out.insert(format!("{} {}", b.label, name));
            }
        }
    }
    out
}

/// First index of a non-decreasing suffix (within `tol`) that ends strictly
/// higher than it starts, found by checking every start index.
pub fn cdb_bruteforce(d: &[f64], failed: bool, tol: f64) -> Option<usize> {
    if !failed {
        return None;
    }
    let last = d.len() - 1;
    (0..last).find(|&t| (t..last).all(|j| d[j + 1] >= d[j] - tol) && d[last] > d[t] + tol)
}

/// Share of a dense pixel grid of camera `a` whose far points (200 m out)
/// fall inside camera `b`, for two cameras at the same spot in open space.
pub fn dense_overlap(a: &AgentPose, b: &AgentPose, n: usize) -> f64 {
    let mut hit = 0usize;
    for r in 0..n {
        for c in 0..n {
            let x = ((c as f64 + 0.5) / n as f64) * 2.0 - 1.0;
            let y = ((r as f64 + 0.5) / n as f64) * 2.0 - 1.0;
            // camera-space direction: forward 1, left -x, up -y
            let (sy, cy) = a.yaw.to_radians().sin_cos();
            let (sp, cp) = a.gimbal.to_radians().sin_cos();
            let (f, l, u) = (1.0, -x, -y);
            let x1 = cp * f - sp * u;
            let z1 = sp * f + cp * u;
            let dir = Vec3::new(cy * x1 - sy * l, sy * x1 + cy * l, z1).normalized();
            if in_square_frustum(b, a.position + dir * 200.0, 45.0) {
                hit += 1;
            }
        }
    }
    hit as f64 / (n * n) as f64
}

/// Shortest horizontal route around an axis-aligned wall spanning the full
/// world height: the better of the two taut strings over its inflated corners.
pub fn taut_string_around(wall: &Aabb, r: f64, a: Vec3, b: Vec3) -> f64 {
    let w = wall.inflate(r);
    let via = |y: f64| {
        let c1 = Vec3::new(w.min.x, y, a.z);
        let c2 = Vec3::new(w.max.x, y, a.z);
        a.distance(c1) + c1.distance(c2) + c2.distance(b)
    };
    via(w.min.y).min(via(w.max.y))
}
