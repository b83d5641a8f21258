//! Strictly increasing grids of finite reals used by sweeps.

use alloc::vec::Vec;

use crate::error::{domain, finite, Result};
#[allow(unused_imports)] // std, when linked, provides these inherently
use num_traits::Float;

#[derive(Debug, Clone, PartialEq)]
pub struct RealGrid {
    points: Vec<f64>,
}

impl RealGrid {
    pub fn new(points: Vec<f64>) -> Result<Self> {
        for &p in &points {
            finite("grid point", p)?;
        }
        if let Some(w) = points.windows(2).find(|w| w[0] >= w[1]) {
            return Err(domain("grid point", w[1], "a strictly increasing sequence"));
        }
        Ok(Self { points })
    }

    /// `count` evenly spaced points from `start` to `end` inclusive.
    pub fn linspace(start: f64, end: f64, count: usize) -> Result<Self> {
        finite("start", start)?;
        finite("end", end)?;
        if count < 2 {
            return Self::new(alloc::vec![start]);
        }
        let step = (end - start) / (count - 1) as f64;
        let points = (0..count)
            .map(|i| if i + 1 == count { end } else { start + step * i as f64 })
            .collect();
        Self::new(points)
    }

    /// Points `start, start + step, ...` not exceeding `end` (with a small
    /// allowance so that `end` itself is included when it lies on the grid).
    pub fn stepped(start: f64, end: f64, step: f64) -> Result<Self> {
        finite("step", step)?;
        if step <= 0.0 {
            return Err(domain("step", step, "(0, inf)"));
        }
        let count = ((end - start) / step + 1e-9).floor() as usize + 1;
        Self::new((0..count).map(|i| start + step * i as f64).collect())
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        self.points.iter().copied()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_unordered_and_non_finite() {
        assert!(RealGrid::new(vec![0.0, 1.0, 1.0]).is_err());
        assert!(RealGrid::new(vec![0.0, f64::NAN]).is_err());
        assert!(RealGrid::new(vec![2.0, 1.0]).is_err());
    }

    #[test]
    fn stepped_includes_end() {
        let g = RealGrid::stepped(1.0, 4.0, 0.5).unwrap();
        assert_eq!(g.len(), 7);
        assert_eq!(*g.points().last().unwrap(), 4.0);
        let l = RealGrid::linspace(0.0, 10.0, 2001).unwrap();
        assert_eq!(l.len(), 2001);
        assert_eq!(l.points()[2000], 10.0);
    }
}
