//! Convex polygons with exact rational breakpoints.

use alloc::vec::Vec;

use num_traits::{One, Zero};

use crate::rational::Q;

/// A convex piecewise-linear function given by its breakpoints; slopes
/// strictly increase from one segment to the next.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Polygon {
    breakpoints: Vec<(Q, Q)>,
}

impl Polygon {
    /// Lower convex hull of a finite point set. The hull runs from the point
    /// with least `x` (lowest among ties) to the one with greatest `x`.
    pub fn lower_hull(points: &[(Q, Q)]) -> Polygon {
        let mut pts: Vec<(Q, Q)> = points.to_vec();
        pts.sort();
        pts.dedup_by(|b, a| a.0 == b.0);
        let mut hull: Vec<(Q, Q)> = Vec::new();
        for p in pts {
            while hull.len() >= 2 {
                let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
                // drop b unless it lies strictly below the chord a-p
                if cross(a, b, p) <= Q::zero() {
                    hull.pop();
                } else {
                    break;
                }
            }
            hull.push(p);
        }
        Polygon { breakpoints: hull }
    }

    /// Convex polygon from `(length, slope)` segments in any order.
    pub fn from_segments(segments: &[(Q, Q)]) -> Polygon {
        let mut segs: Vec<(Q, Q)> = segments.iter().copied().filter(|(l, _)| !l.is_zero()).collect();
        segs.sort_by_key(|a| a.1);
        let mut pts = Vec::with_capacity(segs.len() + 1);
        let (mut x, mut y) = (Q::zero(), Q::zero());
        pts.push((x, y));
        for (l, s) in segs {
            x += l;
            y += l * s;
            pts.push((x, y));
        }
        Polygon::lower_hull(&pts)
    }

    /// Partial-sum polygon of integer slopes, each of length one.
    pub fn from_unit_slopes(slopes: &[i64]) -> Polygon {
        let segs: Vec<(Q, Q)> = slopes.iter().map(|&s| (Q::one(), Q::from_integer(s))).collect();
        Polygon::from_segments(&segs)
    }

    pub fn breakpoints(&self) -> &[(Q, Q)] {
        &self.breakpoints
    }

    pub fn start(&self) -> (Q, Q) {
        self.breakpoints[0]
    }

    pub fn end(&self) -> (Q, Q) {
        *self.breakpoints.last().unwrap()
    }

    pub fn width(&self) -> Q {
        self.end().0 - self.start().0
    }

    /// `(length, slope)` of each segment, slopes increasing.
    pub fn segments(&self) -> Vec<(Q, Q)> {
        self.breakpoints
            .windows(2)
            .map(|w| {
                let dx = w[1].0 - w[0].0;
                (dx, (w[1].1 - w[0].1) / dx)
            })
            .collect()
    }

    pub fn slopes(&self) -> Vec<Q> {
        self.segments().into_iter().map(|(_, s)| s).collect()
    }

    /// Value at `x`, or `None` outside the domain.
    pub fn eval(&self, x: Q) -> Option<Q> {
        let (x0, y0) = self.start();
        if x < x0 || x > self.end().0 {
            return None;
        }
        if self.breakpoints.len() == 1 {
            return Some(y0);
        }
        let w = self.breakpoints.windows(2).find(|w| x <= w[1].0).unwrap();
        let (a, b) = (w[0], w[1]);
        Some(a.1 + (b.1 - a.1) * (x - a.0) / (b.0 - a.0))
    }

    /// Whether `pt` lies on or above the graph (and inside the domain).
    pub fn lies_below(&self, pt: (Q, Q)) -> bool {
        self.eval(pt.0).is_some_and(|y| y <= pt.1)
    }

    /// `self ≥ other` pointwise on a common domain with equal endpoints
    /// required only in `x`.
    pub fn lies_above(&self, other: &Polygon) -> bool {
        if self.start().0 != other.start().0 || self.end().0 != other.end().0 {
            return false;
        }
        let xs = self.breakpoints.iter().chain(&other.breakpoints).map(|p| p.0);
        xs.into_iter().all(|x| self.eval(x).unwrap() >= other.eval(x).unwrap())
    }

    pub fn is_single_segment(&self) -> bool {
        self.breakpoints.len() <= 2
    }

    /// Divides both coordinates.
    pub fn scale_down(&self, dx: Q, dy: Q) -> Polygon {
        Polygon { breakpoints: self.breakpoints.iter().map(|&(x, y)| (x / dx, y / dy)).collect() }
    }

    /// Integer abscissae in the domain where the two polygons meet.
    pub fn contact_set(&self, other: &Polygon) -> Vec<i64> {
        let lo = self.start().0.max(other.start().0).ceil().to_integer();
        let hi = self.end().0.min(other.end().0).floor().to_integer();
        (lo..=hi)
            .filter(|&x| {
                let x = Q::from_integer(x);
                self.eval(x) == other.eval(x)
            })
            .collect()
    }
}

/// `(b - a) × (c - a)`; positive when `a, b, c` turn counterclockwise.
fn cross(a: (Q, Q), b: (Q, Q), c: (Q, Q)) -> Q {
    (b.0 - a.0) * (c.1 - a.1) - (b.1 - a.1) * (c.0 - a.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64) -> Q {
        Q::from_integer(n)
    }

    #[test]
    fn hull_of_diagonal_cloud() {
        let cloud = [(q(0), q(0)), (q(1), q(0)), (q(1), q(1)), (q(2), q(1))];
        let p = Polygon::lower_hull(&cloud);
        assert_eq!(p.breakpoints(), &[(q(0), q(0)), (q(1), q(0)), (q(2), q(1))]);
        assert_eq!(p.slopes(), vec![q(0), q(1)]);
        assert!(cloud.iter().all(|&pt| p.lies_below(pt)));
    }

    #[test]
    fn collinear_points_are_merged() {
        let p = Polygon::lower_hull(&[(q(0), q(0)), (q(1), q(1)), (q(2), q(2)), (q(1), q(3))]);
        assert_eq!(p.breakpoints().len(), 2);
        assert!(p.is_single_segment());
        assert_eq!(p.eval(Q::new(1, 2)), Some(Q::new(1, 2)));
    }

    #[test]
    fn segments_and_contact() {
        let hodge = Polygon::from_unit_slopes(&[1, 0]);
        assert_eq!(hodge.breakpoints(), &[(q(0), q(0)), (q(1), q(0)), (q(2), q(1))]);
        let flat = Polygon::from_segments(&[(q(2), Q::new(1, 2))]);
        assert!(flat.lies_above(&hodge));
        assert!(!hodge.lies_above(&flat));
        assert_eq!(flat.contact_set(&hodge), vec![0, 2]);
    }
}
