//! Small fixed-size geometry used throughout the simulator.
//!
//! Everything here is `f64`, right-handed, with `x` east, `y` north and `z` up.

use core::ops::{Add, AddAssign, Div, Index, Mul, Neg, Sub};

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

/// Spacing of the lattice that agent positions are snapped to (2^-20 m).
///
/// Positions and displacements on this lattice add and subtract without
/// rounding for any coordinate below 2^32 m, which makes `move_forth` followed
/// by `move_back` an exact identity.
pub const POSITION_QUANTUM: f64 = 1.0 / 1_048_576.0;

#[inline]
pub fn snap(v: f64) -> f64 {
    libm::round(v / POSITION_QUANTUM) * POSITION_QUANTUM
}

#[inline]
pub fn deg_to_rad(deg: f64) -> f64 {
    deg * core::f64::consts::PI / 180.0
}

#[inline]
pub fn rad_to_deg(rad: f64) -> f64 {
    rad * 180.0 / core::f64::consts::PI
}

/// Wraps an angle in degrees into `[0, 360)`.
pub fn normalize_yaw(deg: f64) -> f64 {
    let y = deg % 360.0;
    let y = if y < 0.0 { y + 360.0 } else { y };
    if y >= 360.0 {
        0.0
    } else {
        y
    }
}

/// Signed smallest difference `to - from` in degrees, in `(-180, 180]`.
pub fn angle_diff(from: f64, to: f64) -> f64 {
    let d = normalize_yaw(to - from);
    if d > 180.0 {
        d - 360.0
    } else {
        d
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3::new(0.0, 0.0, 0.0);

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn dot(self, o: Vec3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn cross(self, o: Vec3) -> Vec3 {
        Vec3::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    pub fn norm(self) -> f64 {
        libm::sqrt(self.dot(self))
    }

    pub fn horizontal_norm(self) -> f64 {
        libm::hypot(self.x, self.y)
    }

    pub fn distance(self, o: Vec3) -> f64 {
        (self - o).norm()
    }

    pub fn normalized(self) -> Vec3 {
        let n = self.norm();
        if n > 0.0 {
            self / n
        } else {
            self
        }
    }

    pub fn snapped(self) -> Vec3 {
        Vec3::new(snap(self.x), snap(self.y), snap(self.z))
    }

    pub fn min(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x.min(o.x), self.y.min(o.y), self.z.min(o.z))
    }

    pub fn max(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x.max(o.x), self.y.max(o.y), self.z.max(o.z))
    }

    pub fn lerp(self, o: Vec3, t: f64) -> Vec3 {
        self + (o - self) * t
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }
}

impl From<[f64; 3]> for Vec3 {
    fn from(a: [f64; 3]) -> Self {
        Vec3::new(a[0], a[1], a[2])
    }
}

impl Index<usize> for Vec3 {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        match i {
            0 => &self.x,
            1 => &self.y,
            2 => &self.z,
            _ => panic!("Vec3 index {i} out of range"),
        }
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl AddAssign for Vec3 {
    fn add_assign(&mut self, o: Vec3) {
        *self = *self + o;
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Div<f64> for Vec3 {
    type Output = Vec3;
    fn div(self, s: f64) -> Vec3 {
        Vec3::new(self.x / s, self.y / s, self.z / s)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

/// Axis-aligned box.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct Aabb {
    pub min: Vec3,
    pub max: Vec3,
}

impl Aabb {
    pub fn new(a: Vec3, b: Vec3) -> Self {
        Self {
            min: a.min(b),
            max: a.max(b),
        }
    }

    pub fn center(&self) -> Vec3 {
        (self.min + self.max) * 0.5
    }

    pub fn size(&self) -> Vec3 {
        self.max - self.min
    }

    pub fn volume(&self) -> f64 {
        let s = self.size();
        s.x * s.y * s.z
    }

    pub fn inflate(&self, r: f64) -> Aabb {
        let d = Vec3::new(r, r, r);
        Aabb {
            min: self.min - d,
            max: self.max + d,
        }
    }

    /// Closed containment.
    pub fn contains(&self, p: Vec3) -> bool {
        p.x >= self.min.x
            && p.x <= self.max.x
            && p.y >= self.min.y
            && p.y <= self.max.y
            && p.z >= self.min.z
            && p.z <= self.max.z
    }

    /// Open containment: points on the surface are outside.
    pub fn contains_strict(&self, p: Vec3) -> bool {
        p.x > self.min.x
            && p.x < self.max.x
            && p.y > self.min.y
            && p.y < self.max.y
            && p.z > self.min.z
            && p.z < self.max.z
    }

    /// Parameter interval `[t_enter, t_exit]` where `a + t (b - a)` for
    /// `t` in `[0, 1]` lies in the closed box.
    pub fn clip_segment(&self, a: Vec3, b: Vec3) -> Option<(f64, f64)> {
        let d = b - a;
        let mut t0 = 0.0_f64;
        let mut t1 = 1.0_f64;
        for axis in 0..3 {
            let (o, dir, lo, hi) = (a[axis], d[axis], self.min[axis], self.max[axis]);
            if libm::fabs(dir) < 1e-15 {
                if o < lo || o > hi {
                    return None;
                }
            } else {
                let inv = 1.0 / dir;
                let (mut ta, mut tb) = ((lo - o) * inv, (hi - o) * inv);
                if ta > tb {
                    core::mem::swap(&mut ta, &mut tb);
                }
                t0 = t0.max(ta);
                t1 = t1.min(tb);
                if t0 > t1 {
                    return None;
                }
            }
        }
        Some((t0, t1))
    }

    /// True when the segment passes through the box interior over a chord of
    /// non-zero length. Grazing contacts with faces, edges or corners do not count.
    pub fn segment_crosses(&self, a: Vec3, b: Vec3) -> bool {
        let len = a.distance(b);
        if len == 0.0 {
            return self.contains_strict(a);
        }
        match self.clip_segment(a, b) {
            Some((t0, t1)) => {
                if (t1 - t0) * len <= 1e-9 {
                    return false;
                }
                // chord may run along a face
                self.contains_strict(a.lerp(b, 0.5 * (t0 + t1)))
            }
            None => false,
        }
    }

    /// Distance along the unit ray to the first entry into the box, if any.
    pub fn ray_entry(&self, origin: Vec3, dir: Vec3, max_range: f64) -> Option<f64> {
        let end = origin + dir * max_range;
        self.clip_segment(origin, end).map(|(t0, _)| t0 * max_range)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn yaw_normalization_wraps_into_range() {
        assert_eq!(normalize_yaw(360.0), 0.0);
        assert_eq!(normalize_yaw(-22.5), 337.5);
        assert_eq!(normalize_yaw(725.0), 5.0);
        assert!(normalize_yaw(-1e-18) < 360.0);
    }

    #[test]
    fn angle_diff_takes_short_way() {
        assert_eq!(angle_diff(350.0, 10.0), 20.0);
        assert_eq!(angle_diff(10.0, 350.0), -20.0);
        assert_eq!(angle_diff(0.0, 180.0), 180.0);
    }

    #[test]
    fn snapping_makes_addition_reversible() {
        let p = Vec3::new(0.1, 1234.56789, -7.25).snapped();
        let d = Vec3::new(libm::cos(0.3) * 10.0, libm::sin(0.3) * 10.0, 0.0).snapped();
        assert_eq!((p + d) - d, p);
    }

    #[test]
    fn segment_box_crossing() {
        let b = Aabb::new(Vec3::new(0.0, 0.0, 0.0), Vec3::new(1.0, 1.0, 1.0));
        assert!(b.segment_crosses(Vec3::new(-1.0, 0.5, 0.5), Vec3::new(2.0, 0.5, 0.5)));
        assert!(!b.segment_crosses(Vec3::new(-1.0, 2.0, 0.5), Vec3::new(2.0, 2.0, 0.5)));
        // grazing along a face
        assert!(!b.segment_crosses(Vec3::new(-1.0, 1.0, 0.5), Vec3::new(2.0, 1.0, 0.5)));
        // stops short
        assert!(!b.segment_crosses(Vec3::new(-1.0, 0.5, 0.5), Vec3::new(-0.1, 0.5, 0.5)));
    }

    #[test]
    fn ray_entry_distance() {
        let b = Aabb::new(Vec3::new(5.0, -1.0, -1.0), Vec3::new(6.0, 1.0, 1.0));
        let t = b.ray_entry(Vec3::ZERO, Vec3::new(1.0, 0.0, 0.0), 100.0).unwrap();
        assert!((t - 5.0).abs() < 1e-12);
        assert!(b.ray_entry(Vec3::ZERO, Vec3::new(-1.0, 0.0, 0.0), 100.0).is_none());
    }
}
