//! Uniform sample grids over (x, y, t).

use serde::{Deserialize, Serialize};

use crate::error::{DfcbError, Result};
use crate::jet::Point;

/// A uniform grid; a count of 1 fixes that coordinate at the lower bound.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub x0: f64,
    pub x1: f64,
    pub nx: usize,
    pub y0: f64,
    pub y1: f64,
    pub ny: usize,
    pub t0: f64,
    pub t1: f64,
    pub nt: usize,
}

fn coord(i: usize, n: usize, lo: f64, hi: f64) -> f64 {
    if n <= 1 {
        lo
    } else {
        lo + (hi - lo) * i as f64 / (n - 1) as f64
    }
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        for (name, lo, hi, n) in [
            ("x", self.x0, self.x1, self.nx),
            ("y", self.y0, self.y1, self.ny),
            ("t", self.t0, self.t1, self.nt),
        ] {
            if !(hi > lo) {
                return Err(DfcbError::InvalidConfig(format!(
                    "grid.{name}1 must exceed grid.{name}0 (got [{lo}, {hi}])"
                )));
            }
            if n < 1 {
                return Err(DfcbError::InvalidConfig(format!("grid.n{name} must be >= 1")));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny * self.nt
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn xs(&self) -> Vec<f64> {
        (0..self.nx).map(|i| coord(i, self.nx, self.x0, self.x1)).collect()
    }

    pub fn ys(&self) -> Vec<f64> {
        (0..self.ny).map(|j| coord(j, self.ny, self.y0, self.y1)).collect()
    }

    pub fn ts(&self) -> Vec<f64> {
        (0..self.nt).map(|k| coord(k, self.nt, self.t0, self.t1)).collect()
    }

    /// Nodes in x-fastest, then y, then t order.
    pub fn nodes(&self) -> impl Iterator<Item = Point> + '_ {
        let (xs, ys, ts) = (self.xs(), self.ys(), self.ts());
        ts.into_iter().flat_map(move |t| {
            let xs = xs.clone();
            ys.clone().into_iter().flat_map(move |y| {
                let t = t;
                xs.clone().into_iter().map(move |x| Point::new(x, y, t))
            })
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn demo() -> GridSpec {
        GridSpec { x0: -1.0, x1: 1.0, nx: 3, y0: 0.0, y1: 2.0, ny: 2, t0: 0.0, t1: 1.0, nt: 2 }
    }

    #[test]
    fn node_order_is_x_fastest() {
        let g = demo();
        let nodes: Vec<Point> = g.nodes().collect();
        assert_eq!(nodes.len(), g.len());
        assert_eq!(nodes[0], Point::new(-1.0, 0.0, 0.0));
        assert_eq!(nodes[1], Point::new(0.0, 0.0, 0.0));
        assert_eq!(nodes[3], Point::new(-1.0, 2.0, 0.0));
        assert_eq!(nodes[6], Point::new(-1.0, 0.0, 1.0));
    }

    #[test]
    fn count_one_pins_lower_bound() {
        let mut g = demo();
        g.ny = 1;
        assert!(g.nodes().all(|p| p.y == 0.0));
    }

    #[test]
    fn validation_rejects_bad_ranges() {
        let mut g = demo();
        g.x1 = -2.0;
        assert!(g.validate().is_err());
        let mut g = demo();
        g.nt = 0;
        assert!(g.validate().is_err());
        assert!(demo().validate().is_ok());
    }
}
