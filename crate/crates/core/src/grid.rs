use crate::error::Result;
use crate::Point;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Sample set over the unit box: a regular `n³` lattice at `i/n` plus
/// `random` uniform points drawn from a seeded generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleGrid {
    pub per_axis: usize,
    pub random: usize,
    pub seed: u64,
}

impl Default for SampleGrid {
    fn default() -> Self {
        Self {
            per_axis: 32,
            random: 1000,
            seed: 0,
        }
    }
}

impl SampleGrid {
    pub fn new(per_axis: usize, random: usize, seed: u64) -> Self {
        Self { per_axis, random, seed }
    }

    /// Lattice only, no random points.
    pub fn lattice(per_axis: usize) -> Self {
        Self::new(per_axis, 0, 0)
    }

    pub fn len(&self) -> usize {
        self.per_axis.pow(3) + self.random
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Lattice points in row-major order (`x` slowest, `z` fastest), then the
    /// random points.
    pub fn points(&self) -> Vec<Point> {
        let n = self.per_axis;
        let mut pts = Vec::with_capacity(self.len());
        let h = if n > 0 { 1.0 / n as f64 } else { 0.0 };
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    pts.push(Point::new(i as f64 * h, j as f64 * h, k as f64 * h));
                }
            }
        }
        pts.extend(random_points(self.random, self.seed));
        pts
    }
}

/// Uniform points in `[0,1)³` from a ChaCha8 stream.
pub fn random_points(count: usize, seed: u64) -> Vec<Point> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| Point::new(rng.random(), rng.random(), rng.random()))
        .collect()
}

/// Evaluates `f` at every point in parallel; results keep the input order,
/// and the first error in that order is returned.
pub fn par_map<T: Send>(points: &[Point], f: impl Fn(&Point) -> Result<T> + Sync + Send) -> Result<Vec<T>> {
    use rayon::prelude::*;
    points.par_iter().map(f).collect::<Vec<_>>().into_iter().collect()
}

/// Running extreme value with the point where it occurred.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct Extremum {
    pub value: f64,
    pub point: [f64; 3],
}

impl Extremum {
    pub fn max_start() -> Self {
        Self {
            value: f64::NEG_INFINITY,
            point: [0.0; 3],
        }
    }

    pub fn min_start() -> Self {
        Self {
            value: f64::INFINITY,
            point: [0.0; 3],
        }
    }

    /// Keeps the larger value; NaN always wins so it cannot hide.
    pub fn keep_max(&mut self, value: f64, p: &Point) {
        if value > self.value || value.is_nan() && !self.value.is_nan() {
            *self = Self {
                value,
                point: [p.x, p.y, p.z],
            };
        }
    }

    /// Keeps the smaller value; NaN always wins so it cannot hide.
    pub fn keep_min(&mut self, value: f64, p: &Point) {
        if value < self.value || value.is_nan() && !self.value.is_nan() {
            *self = Self {
                value,
                point: [p.x, p.y, p.z],
            };
        }
    }

    pub fn max_over(points: &[Point], values: &[f64]) -> Self {
        let mut e = Self::max_start();
        for (p, v) in points.iter().zip(values) {
            e.keep_max(*v, p);
        }
        e
    }

    pub fn min_over(points: &[Point], values: &[f64]) -> Self {
        let mut e = Self::min_start();
        for (p, v) in points.iter().zip(values) {
            e.keep_min(*v, p);
        }
        e
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lattice_is_row_major_and_seeded_points_repeat() {
        let g = SampleGrid::new(2, 3, 9);
        let p = g.points();
        assert_eq!(p.len(), 11);
        assert_eq!(p[1], Point::new(0.0, 0.0, 0.5));
        assert_eq!(p[4], Point::new(0.5, 0.0, 0.0));
        assert_eq!(p[8..], g.points()[8..]);
        assert!(p.iter().all(|q| q.iter().all(|c| (0.0..1.0).contains(c))));
    }

    #[test]
    fn extremum_tracks_worst_point_and_nan() {
        let pts = random_points(3, 1);
        let e = Extremum::max_over(&pts, &[1.0, 3.0, 2.0]);
        assert_eq!(e.value, 3.0);
        assert_eq!(e.point, [pts[1].x, pts[1].y, pts[1].z]);
        assert!(Extremum::min_over(&pts, &[1.0, f64::NAN, 0.0]).value.is_nan());
    }

    #[test]
    fn par_map_keeps_order() {
        let pts = random_points(100, 2);
        let xs = par_map(&pts, |p| Ok(p.x)).unwrap();
        assert_eq!(xs, pts.iter().map(|p| p.x).collect::<Vec<_>>());
    }
}
