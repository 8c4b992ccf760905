//! 2D geometry primitives shared by collision checks, sensors, and planners.
//!
//! Everything is in pixel units. Rectangles are axis-aligned and closed on
//! all edges; obstacles are solid, so touching an edge counts as contact.

/// A 2D point or direction in f64 pixel coordinates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y)
    }

    pub fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y)
    }

    pub fn scale(self, k: f64) -> Self {
        Self::new(self.x * k, self.y * k)
    }

    pub fn dot(self, o: Self) -> f64 {
        self.x * o.x + self.y * o.y
    }

    pub fn cross(self, o: Self) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn length(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn dist(self, o: Self) -> f64 {
        self.sub(o).length()
    }
}

/// Axis-aligned rectangle with inclusive edges.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rectf {
    pub min_x: f64,
    pub min_y: f64,
    pub max_x: f64,
    pub max_y: f64,
}

impl Rectf {
    pub fn from_xywh(x: f64, y: f64, w: f64, h: f64) -> Self {
        Self {
            min_x: x,
            min_y: y,
            max_x: x + w,
            max_y: y + h,
        }
    }

    /// Grow the rectangle outward by `r` on every side.
    pub fn inflate(self, r: f64) -> Self {
        Self {
            min_x: self.min_x - r,
            min_y: self.min_y - r,
            max_x: self.max_x + r,
            max_y: self.max_y + r,
        }
    }

    pub fn contains(self, p: Vec2) -> bool {
        p.x >= self.min_x && p.x <= self.max_x && p.y >= self.min_y && p.y <= self.max_y
    }

    /// Positive-area overlap; rectangles that merely touch do not overlap.
    pub fn overlaps(self, o: Rectf) -> bool {
        self.min_x < o.max_x && self.max_x > o.min_x && self.min_y < o.max_y && self.max_y > o.min_y
    }

    pub fn edges(self) -> [(Vec2, Vec2); 4] {
        let a = Vec2::new(self.min_x, self.min_y);
        let b = Vec2::new(self.max_x, self.min_y);
        let c = Vec2::new(self.max_x, self.max_y);
        let d = Vec2::new(self.min_x, self.max_y);
        [(a, b), (b, c), (c, d), (d, a)]
    }
}

/// Distance from a point to a rectangle; zero inside.
pub fn dist_point_rect(p: Vec2, r: Rectf) -> f64 {
    let dx = (r.min_x - p.x).max(0.0).max(p.x - r.max_x);
    let dy = (r.min_y - p.y).max(0.0).max(p.y - r.max_y);
    (dx * dx + dy * dy).sqrt()
}

/// Distance from a point to the segment `a..b`.
pub fn dist_seg_point(a: Vec2, b: Vec2, p: Vec2) -> f64 {
    let ab = b.sub(a);
    let len2 = ab.dot(ab);
    if len2 == 0.0 {
        return p.dist(a);
    }
    let t = (p.sub(a).dot(ab) / len2).clamp(0.0, 1.0);
    p.dist(a.add(ab.scale(t)))
}

fn on_segment(a: Vec2, b: Vec2, p: Vec2) -> bool {
    p.x >= a.x.min(b.x) && p.x <= a.x.max(b.x) && p.y >= a.y.min(b.y) && p.y <= a.y.max(b.y)
}

/// Whether segments `a..b` and `c..d` intersect (including touching).
pub fn segments_intersect(a: Vec2, b: Vec2, c: Vec2, d: Vec2) -> bool {
    let d1 = b.sub(a).cross(c.sub(a));
    let d2 = b.sub(a).cross(d.sub(a));
    let d3 = d.sub(c).cross(a.sub(c));
    let d4 = d.sub(c).cross(b.sub(c));
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    (d1 == 0.0 && on_segment(a, b, c))
        || (d2 == 0.0 && on_segment(a, b, d))
        || (d3 == 0.0 && on_segment(c, d, a))
        || (d4 == 0.0 && on_segment(c, d, b))
}

/// Distance between two segments; zero if they intersect.
pub fn dist_seg_seg(a: Vec2, b: Vec2, c: Vec2, d: Vec2) -> f64 {
    if segments_intersect(a, b, c, d) {
        return 0.0;
    }
    dist_seg_point(a, b, c)
        .min(dist_seg_point(a, b, d))
        .min(dist_seg_point(c, d, a))
        .min(dist_seg_point(c, d, b))
}

/// Distance from segment `a..b` to a rectangle; zero if they touch or cross.
pub fn dist_seg_rect(a: Vec2, b: Vec2, r: Rectf) -> f64 {
    if r.contains(a) || r.contains(b) {
        return 0.0;
    }
    r.edges()
        .iter()
        .map(|&(p, q)| dist_seg_seg(a, b, p, q))
        .fold(f64::INFINITY, f64::min)
}

/// Minimum distance a ray must travel inside a solid for the contact to
/// count as a hit. Knife-edge clips (exact tangents, corner grazes) are
/// below the resolving width of the depth sensor and are treated as
/// misses; every accepted hit traverses at least this far.
pub const RAY_MIN_TRAVERSAL: f64 = 0.25;

/// Smallest `t >= 0` at which `origin + t*dir` lies inside the rectangle,
/// or `None` if the ray misses it (or merely grazes a corner; see
/// [`RAY_MIN_TRAVERSAL`]).
pub fn ray_rect(origin: Vec2, dir: Vec2, r: Rectf) -> Option<f64> {
    let mut t_enter = f64::NEG_INFINITY;
    let mut t_exit = f64::INFINITY;
    for (o, d, mn, mx) in [
        (origin.x, dir.x, r.min_x, r.max_x),
        (origin.y, dir.y, r.min_y, r.max_y),
    ] {
        if d == 0.0 {
            if o < mn || o > mx {
                return None;
            }
        } else {
            let t1 = (mn - o) / d;
            let t2 = (mx - o) / d;
            let (lo, hi) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
            t_enter = t_enter.max(lo);
            t_exit = t_exit.min(hi);
        }
    }
    if t_enter > t_exit || t_exit < 0.0 {
        return None;
    }
    let entry = t_enter.max(0.0);
    if t_exit - entry <= RAY_MIN_TRAVERSAL {
        return None;
    }
    Some(entry)
}

/// Distance along the ray until it leaves the box `[0,w] x [0,h]`.
/// The origin is assumed to be inside the box.
pub fn ray_box_exit(origin: Vec2, dir: Vec2, w: f64, h: f64) -> f64 {
    let mut t = f64::INFINITY;
    if dir.x > 0.0 {
        t = t.min((w - origin.x) / dir.x);
    } else if dir.x < 0.0 {
        t = t.min((0.0 - origin.x) / dir.x);
    }
    if dir.y > 0.0 {
        t = t.min((h - origin.y) / dir.y);
    } else if dir.y < 0.0 {
        t = t.min((0.0 - origin.y) / dir.y);
    }
    t.max(0.0)
}

/// Smallest `t >= 0` at which the ray enters the circle, or `None`.
/// Exact tangency (zero-width chord) counts as a miss: integer scene
/// geometry makes knife-edge tangents common, and a contact with no
/// angular extent carries no depth information.
pub fn ray_circle(origin: Vec2, dir: Vec2, center: Vec2, radius: f64) -> Option<f64> {
    let oc = origin.sub(center);
    let a = dir.dot(dir);
    let b = 2.0 * oc.dot(dir);
    let c = oc.dot(oc) - radius * radius;
    let disc = b * b - 4.0 * a * c;
    if disc <= 1e-7 || a == 0.0 {
        return None;
    }
    let sq = disc.sqrt();
    let t1 = (-b - sq) / (2.0 * a);
    let t2 = (-b + sq) / (2.0 * a);
    if t1 >= 0.0 {
        Some(t1)
    } else if t2 >= 0.0 {
        // Origin inside the circle: already in contact.
        Some(0.0)
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn point_rect_distance_zero_inside() {
        let r = Rectf::from_xywh(10.0, 10.0, 20.0, 20.0);
        assert_eq!(dist_point_rect(Vec2::new(15.0, 15.0), r), 0.0);
        assert_eq!(dist_point_rect(Vec2::new(40.0, 20.0), r), 10.0);
        let d = dist_point_rect(Vec2::new(33.0, 34.0), r);
        assert!((d - 5.0).abs() < 1e-12, "corner distance 3-4-5, got {d}");
    }

    #[test]
    fn seg_rect_zero_when_crossing() {
        let r = Rectf::from_xywh(10.0, 10.0, 20.0, 20.0);
        // Passes straight through without either endpoint inside.
        let d = dist_seg_rect(Vec2::new(0.0, 20.0), Vec2::new(50.0, 20.0), r);
        assert_eq!(d, 0.0);
        // Parallel segment 5 px above the top edge.
        let d = dist_seg_rect(Vec2::new(0.0, 5.0), Vec2::new(50.0, 5.0), r);
        assert!((d - 5.0).abs() < 1e-12);
    }

    #[test]
    fn ray_rect_perpendicular_hit() {
        let r = Rectf::from_xywh(100.0, -10.0, 20.0, 20.0);
        let t = ray_rect(Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0), r).unwrap();
        assert_eq!(t, 100.0);
        assert!(ray_rect(Vec2::new(0.0, 0.0), Vec2::new(-1.0, 0.0), r).is_none());
    }

    #[test]
    fn ray_box_exit_from_center() {
        let t = ray_box_exit(Vec2::new(50.0, 25.0), Vec2::new(0.0, 1.0), 100.0, 50.0);
        assert_eq!(t, 25.0);
        let t = ray_box_exit(Vec2::new(50.0, 25.0), Vec2::new(-1.0, 0.0), 100.0, 50.0);
        assert_eq!(t, 50.0);
    }

    #[test]
    fn ray_circle_tangent_and_miss() {
        let hit = ray_circle(
            Vec2::new(0.0, 0.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(30.0, 0.0),
            5.0,
        )
        .unwrap();
        assert_eq!(hit, 25.0);
        assert!(ray_circle(
            Vec2::new(0.0, 0.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(30.0, 10.0),
            5.0
        )
        .is_none());
        // Exact tangency is a miss.
        assert!(ray_circle(
            Vec2::new(0.0, 0.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(30.0, 5.0),
            5.0
        )
        .is_none());
    }
}
