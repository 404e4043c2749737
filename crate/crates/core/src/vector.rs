//! Fixed-capacity real vectors over belief dimensions.
//!
//! Every position and orientation in the simulator is a [`BeliefVector`]. The
//! storage is inline (no heap) so agents stay `Copy` and the O(n²) neighbour
//! pass does not allocate.

use std::fmt;
use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub};

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Smallest supported number of belief dimensions.
pub const MIN_DIMENSIONS: usize = 2;
/// Largest supported number of belief dimensions.
pub const MAX_DIMENSIONS: usize = 10;

/// Magnitudes below this are treated as having no direction.
pub const DEGENERATE_EPSILON: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum VectorError {
    #[error("degenerate direction")]
    DegenerateDirection,
    #[error("vector length {0} outside supported range [1, {MAX_DIMENSIONS}]")]
    BadLength(usize),
    #[error("non-finite component at index {0}")]
    NonFinite(usize),
}

#[derive(Clone, Copy, PartialEq)]
pub struct BeliefVector {
    len: u8,
    data: [f64; MAX_DIMENSIONS],
}

impl BeliefVector {
    pub fn zeros(len: usize) -> Self {
        assert!(
            (1..=MAX_DIMENSIONS).contains(&len),
            "belief vector length {len} out of range"
        );
        Self {
            len: len as u8,
            data: [0.0; MAX_DIMENSIONS],
        }
    }

    /// Unit vector along `axis`.
    pub fn axis(len: usize, axis: usize) -> Self {
        let mut v = Self::zeros(len);
        v[axis] = 1.0;
        v
    }

    pub fn from_slice(components: &[f64]) -> Result<Self, VectorError> {
        if components.is_empty() || components.len() > MAX_DIMENSIONS {
            return Err(VectorError::BadLength(components.len()));
        }
        if let Some(i) = components.iter().position(|c| !c.is_finite()) {
            return Err(VectorError::NonFinite(i));
        }
        let mut v = Self::zeros(components.len());
        v.data[..components.len()].copy_from_slice(components);
        Ok(v)
    }

    pub fn from_fn(len: usize, mut f: impl FnMut(usize) -> f64) -> Self {
        let mut v = Self::zeros(len);
        for i in 0..len {
            v.data[i] = f(i);
        }
        v
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len as usize
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn as_slice(&self) -> &[f64] {
        &self.data[..self.len as usize]
    }

    #[inline]
    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data[..self.len as usize]
    }

    pub fn iter(&self) -> impl Iterator<Item = &f64> {
        self.as_slice().iter()
    }

    #[inline]
    pub fn dot(&self, other: &Self) -> f64 {
        debug_assert_eq!(self.len, other.len);
        self.as_slice()
            .iter()
            .zip(other.as_slice())
            .map(|(a, b)| a * b)
            .sum()
    }

    #[inline]
    pub fn norm_squared(&self) -> f64 {
        self.dot(self)
    }

    #[inline]
    pub fn norm(&self) -> f64 {
        self.norm_squared().sqrt()
    }

    #[inline]
    pub fn distance(&self, other: &Self) -> f64 {
        self.distance_squared(other).sqrt()
    }

    #[inline]
    pub fn distance_squared(&self, other: &Self) -> f64 {
        debug_assert_eq!(self.len, other.len);
        self.as_slice()
            .iter()
            .zip(other.as_slice())
            .map(|(a, b)| (a - b) * (a - b))
            .sum()
    }

    /// `self / |self|`, or [`VectorError::DegenerateDirection`] when the
    /// magnitude is below [`DEGENERATE_EPSILON`].
    pub fn normalize(&self) -> Result<Self, VectorError> {
        let n = self.norm();
        if !(n > DEGENERATE_EPSILON) {
            return Err(VectorError::DegenerateDirection);
        }
        Ok(*self * (1.0 / n))
    }

    pub fn is_finite(&self) -> bool {
        self.iter().all(|c| c.is_finite())
    }

    /// Angle in radians between two non-zero vectors.
    pub fn angle_to(&self, other: &Self) -> f64 {
        let denom = self.norm() * other.norm();
        if denom <= DEGENERATE_EPSILON {
            return 0.0;
        }
        (self.dot(other) / denom).clamp(-1.0, 1.0).acos()
    }

    /// `self + other * scale` without an intermediate temporary.
    #[inline]
    pub fn add_scaled(&mut self, other: &Self, scale: f64) {
        debug_assert_eq!(self.len, other.len);
        for (a, b) in self.as_mut_slice().iter_mut().zip(other.as_slice()) {
            *a += b * scale;
        }
    }
}

impl fmt::Debug for BeliefVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.as_slice()).finish()
    }
}

impl Index<usize> for BeliefVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.as_slice()[i]
    }
}

impl IndexMut<usize> for BeliefVector {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.as_mut_slice()[i]
    }
}

impl Add for BeliefVector {
    type Output = Self;
    fn add(mut self, rhs: Self) -> Self {
        self.add_scaled(&rhs, 1.0);
        self
    }
}

impl AddAssign for BeliefVector {
    fn add_assign(&mut self, rhs: Self) {
        self.add_scaled(&rhs, 1.0);
    }
}

impl Sub for BeliefVector {
    type Output = Self;
    fn sub(mut self, rhs: Self) -> Self {
        self.add_scaled(&rhs, -1.0);
        self
    }
}

impl Mul<f64> for BeliefVector {
    type Output = Self;
    fn mul(mut self, rhs: f64) -> Self {
        for c in self.as_mut_slice() {
            *c *= rhs;
        }
        self
    }
}

impl Neg for BeliefVector {
    type Output = Self;
    fn neg(self) -> Self {
        self * -1.0
    }
}

impl Serialize for BeliefVector {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.as_slice().serialize(s)
    }
}

impl<'de> Deserialize<'de> for BeliefVector {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = Vec::<f64>::deserialize(d)?;
        BeliefVector::from_slice(&v).map_err(serde::de::Error::custom)
    }
}

/// Free-function form of [`BeliefVector::normalize`].
pub fn normalize(v: &BeliefVector) -> Result<BeliefVector, VectorError> {
    v.normalize()
}
