//! Planar vector/pose arithmetic and the float functions the crate uses.
//!
//! All transcendentals are routed through `libm` (the crate is `no_std`), so
//! every build produces bit-identical numerics.

use core::ops::{Add, AddAssign, Mul, Neg, Sub};

pub use libm::{asinh, atan2, cos, exp, fabs, floor, hypot, log, sin, sqrt, tanh};

pub const PI: f64 = core::f64::consts::PI;
pub const TAU: f64 = 2.0 * core::f64::consts::PI;

/// ln(1 + e^x), stable for large |x|.
pub fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + libm::log1p(exp(-x))
    } else {
        libm::log1p(exp(x))
    }
}

/// Logistic sigmoid.
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + exp(-x))
    } else {
        let e = exp(x);
        e / (1.0 + e)
    }
}

/// Wrap an angle to `(-pi, pi]`.
pub fn wrap_angle(a: f64) -> f64 {
    let mut r = a % TAU;
    if r <= -PI {
        r += TAU;
    } else if r > PI {
        r -= TAU;
    }
    r
}

/// Absolute angular separation after wrapping, in `[0, pi]`.
pub fn angle_dist(a: f64, b: f64) -> f64 {
    fabs(wrap_angle(a - b))
}

/// 2D vector / point in meters.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    pub fn dot(self, o: Vec2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    /// 2D cross product (z component of the 3D cross).
    pub fn cross(self, o: Vec2) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> f64 {
        sqrt(self.x * self.x + self.y * self.y)
    }

    pub fn dist(self, o: Vec2) -> f64 {
        (self - o).norm()
    }

    /// Rotate by `theta` about the origin.
    pub fn rotated(self, theta: f64) -> Vec2 {
        let (s, c) = (sin(theta), cos(theta));
        Vec2::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl AddAssign for Vec2 {
    fn add_assign(&mut self, o: Vec2) {
        self.x += o.x;
        self.y += o.y;
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, k: f64) -> Vec2 {
        Vec2::new(self.x * k, self.y * k)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

/// Planar rigid pose: translation plus heading angle.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Pose2 {
    pub pos: Vec2,
    pub theta: f64,
}

impl Pose2 {
    pub const IDENTITY: Pose2 = Pose2 {
        pos: Vec2::ZERO,
        theta: 0.0,
    };

    pub const fn new(x: f64, y: f64, theta: f64) -> Self {
        Pose2 {
            pos: Vec2::new(x, y),
            theta,
        }
    }

    /// Map a point from this frame to the world: `R(theta) p + pos`.
    pub fn apply(self, p: Vec2) -> Vec2 {
        p.rotated(self.theta) + self.pos
    }

    /// Map a world point into this frame.
    pub fn inverse_apply(self, w: Vec2) -> Vec2 {
        (w - self.pos).rotated(-self.theta)
    }

    /// Rotate a free vector (no translation) into this frame.
    pub fn inverse_rotate(self, v: Vec2) -> Vec2 {
        v.rotated(-self.theta)
    }

    /// `self` after `other` (i.e. `self . other` as a transform).
    pub fn compose(self, other: Pose2) -> Pose2 {
        Pose2 {
            pos: self.apply(other.pos),
            theta: self.theta + other.theta,
        }
    }

    pub fn is_finite(self) -> bool {
        self.pos.is_finite() && self.theta.is_finite()
    }
}

/// FNV-1a over a byte stream; used for layout hashes and checksums.
#[derive(Clone, Copy, Debug)]
pub struct Fnv1a(u64);

impl Fnv1a {
    const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const PRIME: u64 = 0x0000_0100_0000_01b3;

    pub fn new() -> Self {
        Fnv1a(Self::OFFSET)
    }

    pub fn update(&mut self, bytes: &[u8]) {
        for &b in bytes {
            self.0 ^= u64::from(b);
            self.0 = self.0.wrapping_mul(Self::PRIME);
        }
    }

    pub fn finish(self) -> u64 {
        self.0
    }
}

impl Default for Fnv1a {
    fn default() -> Self {
        Self::new()
    }
}

/// Hash a string in one call.
pub fn fnv1a_str(s: &str) -> u64 {
    let mut h = Fnv1a::new();
    h.update(s.as_bytes());
    h.finish()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wrap_angle_range_and_seam() {
        assert_eq!(wrap_angle(PI), PI);
        assert_eq!(wrap_angle(-PI), PI);
        assert!((wrap_angle(3.0 * PI) - PI).abs() < 1e-12);
        assert!((wrap_angle(-2.5 * PI) + 0.5 * PI).abs() < 1e-12);
        // seam crossing: 3.1 vs -3.1 are ~0.083 apart
        let d = angle_dist(3.1, -3.1);
        assert!((d - (TAU - 6.2)).abs() < 1e-12);
    }

    #[test]
    fn pose_round_trip() {
        let p = Pose2::new(0.3, -0.7, 1.2);
        let w = p.apply(Vec2::new(0.1, 0.2));
        let back = p.inverse_apply(w);
        assert!((back.x - 0.1).abs() < 1e-12);
        assert!((back.y - 0.2).abs() < 1e-12);
    }

    #[test]
    fn rotation_quarter_turn() {
        let r = Vec2::new(0.3, 0.0).rotated(PI / 2.0);
        assert!(r.x.abs() < 1e-12);
        assert!((r.y - 0.3).abs() < 1e-12);
    }

    #[test]
    fn fnv_distinguishes_strings() {
        assert_ne!(fnv1a_str("loco/v1"), fnv1a_str("manip/v1"));
        assert_eq!(fnv1a_str(""), 0xcbf2_9ce4_8422_2325);
    }
}
