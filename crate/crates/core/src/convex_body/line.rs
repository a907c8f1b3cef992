use crate::error::{Error, Result};
use crate::numeric::Vector;

/// Oriented line `point + t * direction` with a unit direction.
#[derive(Clone, Debug, PartialEq)]
pub struct OrientedLine {
    point: Vector,
    direction: Vector,
}

impl OrientedLine {
    /// Normalizes `direction`; fails on a zero vector or a length mismatch.
    pub fn new(point: Vector, direction: Vector) -> Result<Self> {
        if point.len() != direction.len() {
            return Err(Error::DimensionMismatch {
                expected: point.len(),
                got: direction.len(),
            });
        }
        let norm = direction.norm();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::Domain("line direction must be a nonzero vector".into()));
        }
        Ok(OrientedLine {
            point,
            direction: direction / norm,
        })
    }

    pub fn through(a: &Vector, b: &Vector) -> Result<Self> {
        OrientedLine::new(a.clone(), b - a)
    }

    pub fn point(&self) -> &Vector {
        &self.point
    }

    pub fn direction(&self) -> &Vector {
        &self.direction
    }

    pub fn dim(&self) -> usize {
        self.point.len()
    }

    pub fn at(&self, t: f64) -> Vector {
        &self.point + &self.direction * t
    }

    pub fn reversed(&self) -> Self {
        OrientedLine {
            point: self.point.clone(),
            direction: -&self.direction,
        }
    }

    /// Distance between the two lines as point sets with orientation:
    /// direction difference plus offset of `other`'s point from this line.
    pub fn distance(&self, other: &OrientedLine) -> f64 {
        let dir = (&self.direction - &other.direction).norm();
        let w = &other.point - &self.point;
        let off = (&w - &self.direction * w.dot(&self.direction)).norm();
        dir + off
    }
}
