use core::ops::{Add, AddAssign, Mul, Neg, Sub};

use libm::sqrt;

/// Control field vector in rad/ns.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FieldVector {
    pub bx: f64,
    pub by: f64,
    pub bz: f64,
}

impl FieldVector {
    pub const ZERO: Self = Self::new(0.0, 0.0, 0.0);

    pub const fn new(bx: f64, by: f64, bz: f64) -> Self {
        Self { bx, by, bz }
    }

    pub fn dot(&self, other: &Self) -> f64 {
        self.bx * other.bx + self.by * other.by + self.bz * other.bz
    }

    pub fn cross(&self, other: &Self) -> Self {
        Self::new(
            self.by * other.bz - self.bz * other.by,
            self.bz * other.bx - self.bx * other.bz,
            self.bx * other.by - self.by * other.bx,
        )
    }

    pub fn norm_squared(&self) -> f64 {
        self.dot(self)
    }

    pub fn norm(&self) -> f64 {
        sqrt(self.norm_squared())
    }

    /// Largest component magnitude.
    pub fn max_abs(&self) -> f64 {
        self.bx.abs().max(self.by.abs()).max(self.bz.abs())
    }

    pub fn is_finite(&self) -> bool {
        self.bx.is_finite() && self.by.is_finite() && self.bz.is_finite()
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.bx, self.by, self.bz]
    }
}

impl From<[f64; 3]> for FieldVector {
    fn from(v: [f64; 3]) -> Self {
        Self::new(v[0], v[1], v[2])
    }
}

impl Add for FieldVector {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self::new(self.bx + rhs.bx, self.by + rhs.by, self.bz + rhs.bz)
    }
}

impl AddAssign for FieldVector {
    fn add_assign(&mut self, rhs: Self) {
        *self = *self + rhs;
    }
}

impl Sub for FieldVector {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self::new(self.bx - rhs.bx, self.by - rhs.by, self.bz - rhs.bz)
    }
}

impl Neg for FieldVector {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.bx, -self.by, -self.bz)
    }
}

impl Mul<f64> for FieldVector {
    type Output = Self;
    fn mul(self, s: f64) -> Self {
        Self::new(self.bx * s, self.by * s, self.bz * s)
    }
}
