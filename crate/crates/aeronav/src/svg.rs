//! Vector schematic of a first-person observation for the teleoperation UI.

use std::fmt::Write;

use aeronav_core::camera::EntityKind;
use aeronav_core::{CameraIntrinsics, SemanticObservation};

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Sky and ground split at the horizon, one box per entity drawn far to
/// near, and a crosshair on the optical axis.
pub fn schematic_svg(obs: &SemanticObservation, intr: &CameraIntrinsics) -> String {
    let (w, h) = (intr.width as f64, intr.height as f64);
    let (cx, cy) = intr.center();
    let pitch = obs.camera_pose.pitch.clamp(-89.9, 89.9).to_radians();
    let horizon = (cy + intr.focal() * pitch.tan()).clamp(0.0, h);

    let mut s = String::new();
    let _ = write!(
        s,
        r##"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"##
    );
    let _ = write!(s, r##"<rect class="sky" x="0" y="0" width="{w}" height="{horizon:.1}" fill="#cfe3f3"/>"##);
    let _ = write!(
        s,
        r##"<rect class="ground" x="0" y="{horizon:.1}" width="{w}" height="{:.1}" fill="#d9d4c7"/>"##,
        h - horizon
    );
    let mut entities: Vec<_> = obs.entities.iter().collect();
    entities.sort_by(|a, b| b.depth.total_cmp(&a.depth));
    for e in entities {
        let [u0, v0, u1, v1] = e.image_box;
        let (fill, stroke) = match e.kind {
            EntityKind::Facade => ("#9aa4ad", "#4d565e"),
            EntityKind::Landmark => ("#f2a541", "#a35f00"),
        };
        let _ = write!(
            s,
            r##"<g class="entity {kind}" data-label="{label}"><rect x="{u0:.1}" y="{v0:.1}" width="{:.1}" height="{:.1}" fill="{fill}" fill-opacity="0.85" stroke="{stroke}"/><text x="{:.1}" y="{:.1}" font-size="11" text-anchor="middle" fill="#111">{label} ({depth:.0} m)</text></g>"##,
            (u1 - u0).max(0.0),
            (v1 - v0).max(0.0),
            e.center_px[0],
            e.center_px[1],
            kind = match e.kind {
                EntityKind::Facade => "facade",
                EntityKind::Landmark => "landmark",
            },
            label = escape(&e.label),
            depth = e.depth,
        );
    }
    let _ = write!(
        s,
        r##"<g class="crosshair" stroke="#c00" stroke-width="1"><line x1="{:.1}" y1="{cy:.1}" x2="{:.1}" y2="{cy:.1}"/><line x1="{cx:.1}" y1="{:.1}" x2="{cx:.1}" y2="{:.1}"/></g>"##,
        cx - 10.0,
        cx + 10.0,
        cy - 10.0,
        cy + 10.0
    );
    let _ = write!(
        s,
        r##"<text x="8" y="{:.1}" font-size="12" fill="#222">gimbal {:.1}°  step {}</text></svg>"##,
        h - 8.0,
        obs.camera_pose.pitch,
        obs.step
    );
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use aeronav_core::camera::render;
    use aeronav_core::world::Landmark;
    use aeronav_core::{Aabb, AgentPose, CityWorld, Vec3};

    #[test]
    fn draws_one_group_per_entity() {
        let world = CityWorld::new(
            vec![],
            vec![Landmark::new("red <kiosk>", Vec3::new(50.0, 0.0, 10.0))],
            Aabb::new(Vec3::new(-100.0, -100.0, 0.0), Vec3::new(100.0, 100.0, 100.0)),
            CityWorld::DEFAULT_Z_MIN,
        )
        .unwrap();
        let obs = render(&world, &AgentPose::at(0.0, 0.0, 10.0), &CameraIntrinsics::default());
        let svg = schematic_svg(&obs, &CameraIntrinsics::default());
        assert_eq!(svg.matches("class=\"entity").count(), 1);
        assert!(svg.contains("red &lt;kiosk&gt;"));
        assert!(svg.starts_with("<svg") && svg.ends_with("</svg>"));
    }
}
