//! Exact 2D primitives used by the collision checker.

pub(crate) type P2 = [f64; 2];

fn sub(a: P2, b: P2) -> P2 {
    [a[0] - b[0], a[1] - b[1]]
}

fn dot(a: P2, b: P2) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

fn norm(a: P2) -> f64 {
    a[0].hypot(a[1])
}

pub(crate) fn point_segment_distance(p: P2, a: P2, b: P2) -> f64 {
    let ab = sub(b, a);
    let len2 = dot(ab, ab);
    if len2 == 0.0 {
        return norm(sub(p, a));
    }
    let t = (dot(sub(p, a), ab) / len2).clamp(0.0, 1.0);
    norm(sub(p, [a[0] + t * ab[0], a[1] + t * ab[1]]))
}

pub(crate) fn point_rect_distance(p: P2, min: P2, max: P2) -> f64 {
    let dx = (min[0] - p[0]).max(0.0).max(p[0] - max[0]);
    let dy = (min[1] - p[1]).max(0.0).max(p[1] - max[1]);
    dx.hypot(dy)
}

/// Liang-Barsky: does the closed segment meet the closed rectangle?
pub(crate) fn segment_hits_rect(a: P2, b: P2, min: P2, max: P2) -> bool {
    let d = sub(b, a);
    let mut t0: f64 = 0.0;
    let mut t1: f64 = 1.0;
    for axis in 0..2 {
        for (p, q) in [(-d[axis], a[axis] - min[axis]), (d[axis], max[axis] - a[axis])] {
            if p == 0.0 {
                if q < 0.0 {
                    return false;
                }
            } else {
                let r = q / p;
                if p < 0.0 {
                    t0 = t0.max(r);
                } else {
                    t1 = t1.min(r);
                }
                if t0 > t1 {
                    return false;
                }
            }
        }
    }
    true
}

pub(crate) fn segment_rect_distance(a: P2, b: P2, min: P2, max: P2) -> f64 {
    if segment_hits_rect(a, b, min, max) {
        return 0.0;
    }
    let corners = [min, [max[0], min[1]], max, [min[0], max[1]]];
    let from_ends = point_rect_distance(a, min, max).min(point_rect_distance(b, min, max));
    corners
        .iter()
        .map(|&c| point_segment_distance(c, a, b))
        .fold(from_ends, f64::min)
}

/// Oriented rectangle given by its center, half extents and heading.
#[derive(Debug, Clone, Copy)]
pub(crate) struct OrientedRect {
    pub(crate) center: P2,
    pub(crate) half: P2,
    pub(crate) angle: f64,
}

impl OrientedRect {
    fn axes(&self) -> [P2; 2] {
        let (s, c) = self.angle.sin_cos();
        [[c, s], [-s, c]]
    }

    fn corners(&self) -> [P2; 4] {
        let [u, v] = self.axes();
        let h = self.half;
        let at = |su: f64, sv: f64| {
            [
                self.center[0] + su * h[0] * u[0] + sv * h[1] * v[0],
                self.center[1] + su * h[0] * u[1] + sv * h[1] * v[1],
            ]
        };
        [at(-1.0, -1.0), at(1.0, -1.0), at(1.0, 1.0), at(-1.0, 1.0)]
    }

    pub(crate) fn disc_distance(&self, c: P2, r: f64) -> f64 {
        let [u, v] = self.axes();
        let rel = sub(c, self.center);
        let lu = dot(rel, u);
        let lv = dot(rel, v);
        let dx = (lu.abs() - self.half[0]).max(0.0);
        let dy = (lv.abs() - self.half[1]).max(0.0);
        dx.hypot(dy) - r
    }

    /// Separating-axis test against an axis-aligned rectangle.
    pub(crate) fn intersects_aabb(&self, min: P2, max: P2) -> bool {
        let corners = self.corners();
        let aabb = [min, [max[0], min[1]], max, [min[0], max[1]]];
        let mut axes = vec![[1.0, 0.0], [0.0, 1.0]];
        axes.extend(self.axes());
        axes.iter().all(|&ax| {
            let proj = |pts: &[P2]| {
                pts.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
                    let d = dot(*p, ax);
                    (lo.min(d), hi.max(d))
                })
            };
            let (a0, a1) = proj(&corners);
            let (b0, b1) = proj(&aabb);
            a1 >= b0 && b1 >= a0
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn point_segment() {
        assert_eq!(point_segment_distance([0.0, 1.0], [-1.0, 0.0], [1.0, 0.0]), 1.0);
        assert_eq!(point_segment_distance([3.0, 0.0], [-1.0, 0.0], [1.0, 0.0]), 2.0);
        assert_eq!(point_segment_distance([3.0, 4.0], [0.0, 0.0], [0.0, 0.0]), 5.0);
    }

    #[test]
    fn segment_rect() {
        let (min, max) = ([0.0, 0.0], [1.0, 1.0]);
        assert!(segment_hits_rect([-1.0, 0.5], [2.0, 0.5], min, max));
        assert!(segment_hits_rect([0.5, 0.5], [0.6, 0.6], min, max));
        assert!(!segment_hits_rect([-1.0, 2.0], [2.0, 2.0], min, max));
        assert!(!segment_hits_rect([-1.0, 0.5], [-0.5, 0.5], min, max));
        assert_eq!(segment_rect_distance([-1.0, 2.0], [2.0, 2.0], min, max), 1.0);
        assert!((segment_rect_distance([-1.0, 0.0], [0.0, -1.0], min, max) - 0.5f64.sqrt()).abs() < 1e-12);
        assert_eq!(segment_rect_distance([2.0, 0.5], [3.0, 0.5], min, max), 1.0);
    }

    #[test]
    fn oriented_rect() {
        let r = OrientedRect {
            center: [0.0, 0.0],
            half: [1.0, 0.1],
            angle: std::f64::consts::FRAC_PI_2,
        };
        assert!((r.disc_distance([0.0, 2.0], 0.5) - 0.5).abs() < 1e-12);
        assert!(r.disc_distance([0.5, 0.0], 0.1) > 0.0);
        assert!(r.intersects_aabb([-0.05, 0.9], [0.05, 1.5]));
        assert!(!r.intersects_aabb([0.2, -1.0], [0.5, 1.0]));
        let tilted = OrientedRect {
            center: [0.0, 0.0],
            half: [1.0, 0.05],
            angle: std::f64::consts::FRAC_PI_4,
        };
        // The AABB sits in the corner region the rotated strip does not cover.
        assert!(!tilted.intersects_aabb([0.4, -0.6], [0.6, -0.4]));
        assert!(tilted.intersects_aabb([0.3, 0.3], [0.5, 0.5]));
    }
}
