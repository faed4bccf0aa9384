//! 2D poses, convex polygons, and the collision queries used by every other
//! module: SAT overlap with minimum translation vector, workspace
//! containment, evenly spaced contour sampling, and separation distances.
//!
//! Shapes are unions of convex polygons; concave objects are pre-decomposed
//! at authoring time. All polygon vertices are counter-clockwise.

use crate::Real;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum GeometryError {
    #[error("polygon needs at least 3 distinct vertices, got {0}")]
    TooFewVertices(usize),
    #[error("polygon is not strictly convex and counter-clockwise")]
    NotConvexCcw,
    #[error("shape has no parts")]
    EmptyShape,
    #[error("shape has zero perimeter")]
    DegenerateContour,
}

/// 2D vector / point.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec2<S> {
    pub x: S,
    pub y: S,
}

impl<S: Real> Vec2<S> {
    pub fn new(x: S, y: S) -> Self {
        Self { x, y }
    }

    pub fn zero() -> Self {
        Self::new(S::zero(), S::zero())
    }

    pub fn dot(self, o: Self) -> S {
        self.x * o.x + self.y * o.y
    }

    /// z-component of the 3D cross product.
    pub fn cross(self, o: Self) -> S {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> S {
        self.dot(self).sqrt()
    }

    pub fn dist(self, o: Self) -> S {
        (self - o).norm()
    }

    /// Unit vector; `None` for (near-)zero input.
    pub fn normalized(self) -> Option<Self> {
        let n = self.norm();
        if n <= S::epsilon() {
            None
        } else {
            Some(self * (S::one() / n))
        }
    }

    pub fn perp(self) -> Self {
        Self::new(-self.y, self.x)
    }

    pub fn scale(self, k: S) -> Self {
        Self::new(self.x * k, self.y * k)
    }
}

impl<S: Real> std::ops::Add for Vec2<S> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y)
    }
}

impl<S: Real> std::ops::Sub for Vec2<S> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y)
    }
}

impl<S: Real> std::ops::Mul<S> for Vec2<S> {
    type Output = Self;
    fn mul(self, k: S) -> Self {
        self.scale(k)
    }
}

impl<S: Real> std::ops::Neg for Vec2<S> {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y)
    }
}

/// Normalize an angle into (−π, π].
pub fn normalize_angle<S: Real>(t: S) -> S {
    let two_pi = S::of(std::f64::consts::TAU);
    let pi = S::of(std::f64::consts::PI);
    let mut r = t % two_pi;
    if r <= -pi {
        r = r + two_pi;
    } else if r > pi {
        r = r - two_pi;
    }
    r
}

/// Shortest signed angular difference `a − b`, in (−π, π].
pub fn angle_diff<S: Real>(a: S, b: S) -> S {
    normalize_angle(a - b)
}

/// SE(2) pose: translation plus heading, `theta` kept in (−π, π].
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Pose2<S> {
    pub x: S,
    pub y: S,
    pub theta: S,
}

impl<S: Real> Pose2<S> {
    pub fn new(x: S, y: S, theta: S) -> Self {
        Self {
            x,
            y,
            theta: normalize_angle(theta),
        }
    }

    pub fn identity() -> Self {
        Self::new(S::zero(), S::zero(), S::zero())
    }

    pub fn translation(&self) -> Vec2<S> {
        Vec2::new(self.x, self.y)
    }

    pub fn apply(&self, p: Vec2<S>) -> Vec2<S> {
        let (s, c) = self.theta.sin_cos();
        Vec2::new(c * p.x - s * p.y + self.x, s * p.x + c * p.y + self.y)
    }

    /// Composition `self ∘ other`: apply `other` first, then `self`.
    pub fn compose(&self, other: &Self) -> Self {
        let t = self.apply(other.translation());
        Self::new(t.x, t.y, self.theta + other.theta)
    }
}

/// Convex polygon: ≥3 counter-clockwise vertices, strictly convex,
/// positive signed area.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvexPolygon<S> {
    vertices: Vec<Vec2<S>>,
}

impl<S: Real> ConvexPolygon<S> {
    /// Validating constructor. Deduplicates consecutive near-equal vertices
    /// (1e-12 of the bounding scale) before the convexity check.
    pub fn new(vertices: Vec<Vec2<S>>) -> Result<Self, GeometryError> {
        let mut vs: Vec<Vec2<S>> = Vec::with_capacity(vertices.len());
        let scale = vertices
            .iter()
            .map(|v| v.x.abs().max(v.y.abs()))
            .fold(S::one(), S::max);
        let tol = scale * S::of(1e-12);
        for v in vertices {
            if vs.last().map_or(true, |l| l.dist(v) > tol) {
                vs.push(v);
            }
        }
        if vs.len() >= 2 && vs[0].dist(vs[vs.len() - 1]) <= tol {
            vs.pop();
        }
        if vs.len() < 3 {
            return Err(GeometryError::TooFewVertices(vs.len()));
        }
        let n = vs.len();
        for i in 0..n {
            let a = vs[i];
            let b = vs[(i + 1) % n];
            let c = vs[(i + 2) % n];
            if (b - a).cross(c - b) <= S::zero() {
                return Err(GeometryError::NotConvexCcw);
            }
        }
        Ok(Self { vertices: vs })
    }

    /// Axis-aligned rectangle helper, centered at `center`.
    pub fn rectangle(center: Vec2<S>, width: S, height: S) -> Self {
        let hw = width * S::of(0.5);
        let hh = height * S::of(0.5);
        Self::new(vec![
            Vec2::new(center.x - hw, center.y - hh),
            Vec2::new(center.x + hw, center.y - hh),
            Vec2::new(center.x + hw, center.y + hh),
            Vec2::new(center.x - hw, center.y + hh),
        ])
        .expect("rectangle is convex")
    }

    pub fn vertices(&self) -> &[Vec2<S>] {
        &self.vertices
    }

    pub fn area(&self) -> S {
        let mut a = S::zero();
        let n = self.vertices.len();
        for i in 0..n {
            a = a + self.vertices[i].cross(self.vertices[(i + 1) % n]);
        }
        a * S::of(0.5)
    }

    pub fn centroid(&self) -> Vec2<S> {
        // Area-weighted centroid of the polygon interior.
        let n = self.vertices.len();
        let mut cx = S::zero();
        let mut cy = S::zero();
        let mut a = S::zero();
        for i in 0..n {
            let p = self.vertices[i];
            let q = self.vertices[(i + 1) % n];
            let w = p.cross(q);
            a = a + w;
            cx = cx + (p.x + q.x) * w;
            cy = cy + (p.y + q.y) * w;
        }
        let k = S::one() / (a * S::of(3.0));
        Vec2::new(cx * k, cy * k)
    }

    pub fn perimeter(&self) -> S {
        let n = self.vertices.len();
        (0..n)
            .map(|i| self.vertices[i].dist(self.vertices[(i + 1) % n]))
            .sum()
    }

    /// Rotate by `pose.theta`, then translate by `(pose.x, pose.y)`.
    /// Orientation (CCW) is preserved.
    pub fn transform(&self, pose: &Pose2<S>) -> Self {
        Self {
            vertices: self.vertices.iter().map(|v| pose.apply(*v)).collect(),
        }
    }

    pub fn contains_point(&self, p: Vec2<S>) -> bool {
        let n = self.vertices.len();
        for i in 0..n {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % n];
            if (b - a).cross(p - a) < S::zero() {
                return false;
            }
        }
        true
    }

    fn project(&self, axis: Vec2<S>) -> (S, S) {
        let mut lo = self.vertices[0].dot(axis);
        let mut hi = lo;
        for v in &self.vertices[1..] {
            let d = v.dot(axis);
            lo = lo.min(d);
            hi = hi.max(d);
        }
        (lo, hi)
    }

    fn edge_normals(&self) -> impl Iterator<Item = Vec2<S>> + '_ {
        let n = self.vertices.len();
        (0..n).filter_map(move |i| {
            let e = self.vertices[(i + 1) % n] - self.vertices[i];
            // Outward normal for CCW winding.
            Vec2::new(e.y, -e.x).normalized()
        })
    }
}

/// Result of a positive overlap query: moving `a` by `depth * direction`
/// separates the pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Penetration<S> {
    pub depth: S,
    pub direction: Vec2<S>,
}

/// Separating-axis test with minimum translation vector.
///
/// Returns `None` when disjoint (touching counts as disjoint), otherwise the
/// minimum translation applied to `a` that achieves separation.
/// `overlap(b, a)` yields the same depth with negated direction.
pub fn overlap<S: Real>(a: &ConvexPolygon<S>, b: &ConvexPolygon<S>) -> Option<Penetration<S>> {
    let mut best_depth = S::infinity();
    let mut best_dir = Vec2::zero();
    for axis in a.edge_normals().chain(b.edge_normals()) {
        let (a_lo, a_hi) = a.project(axis);
        let (b_lo, b_hi) = b.project(axis);
        let o = a_hi.min(b_hi) - a_lo.max(b_lo);
        if o <= S::zero() {
            return None;
        }
        if o < best_depth {
            best_depth = o;
            // Push `a` toward its own side of the axis.
            let a_mid = a_lo + a_hi;
            let b_mid = b_lo + b_hi;
            best_dir = if a_mid <= b_mid { -axis } else { axis };
        }
    }
    Some(Penetration {
        depth: best_depth,
        direction: best_dir,
    })
}

/// Penetration of a disc into a convex polygon, in the same convention as
/// [`overlap`]: the returned direction separates the *polygon* from the disc.
pub fn disc_overlap<S: Real>(
    poly: &ConvexPolygon<S>,
    center: Vec2<S>,
    radius: S,
) -> Option<Penetration<S>> {
    if poly.contains_point(center) {
        // Deep case: exit through the nearest edge.
        let n = poly.vertices().len();
        let mut best = S::infinity();
        let mut dir = Vec2::zero();
        for i in 0..n {
            let a = poly.vertices()[i];
            let b = poly.vertices()[(i + 1) % n];
            let normal = match (b - a).perp().normalized() {
                Some(v) => -v, // outward for CCW
                None => continue,
            };
            let d = (center - a).dot(normal).abs();
            if d < best {
                best = d;
                dir = -normal;
            }
        }
        return Some(Penetration {
            depth: best + radius,
            direction: dir,
        });
    }
    let q = closest_point_on_polygon(poly, center);
    let d = center.dist(q);
    if d >= radius {
        None
    } else {
        let dir = (q - center).normalized().unwrap_or(Vec2::new(S::one(), S::zero()));
        Some(Penetration {
            depth: radius - d,
            direction: dir,
        })
    }
}

pub fn closest_point_on_segment<S: Real>(a: Vec2<S>, b: Vec2<S>, p: Vec2<S>) -> Vec2<S> {
    let ab = b - a;
    let len2 = ab.dot(ab);
    if len2 <= S::epsilon() {
        return a;
    }
    let t = ((p - a).dot(ab) / len2).max(S::zero()).min(S::one());
    a + ab * t
}

pub fn closest_point_on_polygon<S: Real>(poly: &ConvexPolygon<S>, p: Vec2<S>) -> Vec2<S> {
    let n = poly.vertices().len();
    let mut best = poly.vertices()[0];
    let mut best_d = S::infinity();
    for i in 0..n {
        let q = closest_point_on_segment(poly.vertices()[i], poly.vertices()[(i + 1) % n], p);
        let d = p.dist(q);
        if d < best_d {
            best_d = d;
            best = q;
        }
    }
    best
}

/// Separation distance between two convex polygons; 0 when overlapping or
/// touching.
pub fn polygon_distance<S: Real>(a: &ConvexPolygon<S>, b: &ConvexPolygon<S>) -> S {
    if overlap(a, b).is_some() {
        return S::zero();
    }
    let mut best = S::infinity();
    for v in a.vertices() {
        let q = closest_point_on_polygon(b, *v);
        best = best.min(v.dist(q));
    }
    for v in b.vertices() {
        let q = closest_point_on_polygon(a, *v);
        best = best.min(v.dist(q));
    }
    best
}

/// Axis-aligned rectangle (used for the workspace). Closed boundaries:
/// touching counts as inside.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect<S> {
    pub min: Vec2<S>,
    pub max: Vec2<S>,
}

impl<S: Real> Rect<S> {
    pub fn new(min: Vec2<S>, max: Vec2<S>) -> Self {
        Self { min, max }
    }

    pub fn from_size(width: S, height: S) -> Self {
        Self::new(Vec2::zero(), Vec2::new(width, height))
    }

    pub fn width(&self) -> S {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> S {
        self.max.y - self.min.y
    }

    pub fn center(&self) -> Vec2<S> {
        (self.min + self.max) * S::of(0.5)
    }

    pub fn contains_point(&self, p: Vec2<S>) -> bool {
        p.x >= self.min.x && p.x <= self.max.x && p.y >= self.min.y && p.y <= self.max.y
    }

    /// Distance from an interior point to the nearest wall (negative if
    /// outside).
    pub fn wall_clearance(&self, p: Vec2<S>) -> S {
        (p.x - self.min.x)
            .min(self.max.x - p.x)
            .min(p.y - self.min.y)
            .min(self.max.y - p.y)
    }

    pub fn as_polygon(&self) -> ConvexPolygon<S> {
        ConvexPolygon::new(vec![
            self.min,
            Vec2::new(self.max.x, self.min.y),
            self.max,
            Vec2::new(self.min.x, self.max.y),
        ])
        .expect("rect is convex")
    }
}

/// Rigid shape in body frame: a union of convex parts plus the area-weighted
/// centroid of the union.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Shape<S> {
    parts: Vec<ConvexPolygon<S>>,
    centroid: Vec2<S>,
    area: S,
    /// Radius of the bounding circle around the centroid.
    radius: S,
}

impl<S: Real> Shape<S> {
    pub fn new(parts: Vec<ConvexPolygon<S>>) -> Result<Self, GeometryError> {
        if parts.is_empty() {
            return Err(GeometryError::EmptyShape);
        }
        let mut area = S::zero();
        let mut cx = S::zero();
        let mut cy = S::zero();
        for p in &parts {
            let a = p.area();
            let c = p.centroid();
            area = area + a;
            cx = cx + c.x * a;
            cy = cy + c.y * a;
        }
        let centroid = Vec2::new(cx / area, cy / area);
        let radius = parts
            .iter()
            .flat_map(|p| p.vertices())
            .map(|v| v.dist(centroid))
            .fold(S::zero(), S::max);
        Ok(Self {
            parts,
            centroid,
            area,
            radius,
        })
    }

    pub fn single(poly: ConvexPolygon<S>) -> Self {
        Self::new(vec![poly]).expect("non-empty")
    }

    pub fn parts(&self) -> &[ConvexPolygon<S>] {
        &self.parts
    }

    pub fn centroid(&self) -> Vec2<S> {
        self.centroid
    }

    pub fn area(&self) -> S {
        self.area
    }

    pub fn bounding_radius(&self) -> S {
        self.radius
    }

    pub fn transform(&self, pose: &Pose2<S>) -> Vec<ConvexPolygon<S>> {
        self.parts.iter().map(|p| p.transform(pose)).collect()
    }

    pub fn centroid_at(&self, pose: &Pose2<S>) -> Vec2<S> {
        pose.apply(self.centroid)
    }

    /// Principal feature axis of the shape (unit vector), from the
    /// area-weighted second moments of the parts. Falls back to +x when the
    /// moments are isotropic (e.g. squares, regular polygons).
    pub fn feature_axis(&self) -> Vec2<S> {
        // Second area moments about the centroid, accumulated per part via
        // the standard triangle decomposition.
        let mut ixx = S::zero();
        let mut iyy = S::zero();
        let mut ixy = S::zero();
        for part in &self.parts {
            let vs = part.vertices();
            let n = vs.len();
            for i in 0..n {
                let p = vs[i] - self.centroid;
                let q = vs[(i + 1) % n] - self.centroid;
                let w = p.cross(q);
                ixx = ixx + w * (p.y * p.y + p.y * q.y + q.y * q.y);
                iyy = iyy + w * (p.x * p.x + p.x * q.x + q.x * q.x);
                ixy = ixy + w * (p.x * q.y + S::of(2.0) * (p.x * p.y + q.x * q.y) + q.x * p.y);
            }
        }
        let twelve = S::of(12.0);
        let ixx = ixx / twelve;
        let iyy = iyy / twelve;
        let ixy = ixy / S::of(24.0);
        // Covariance matrix [[iyy, ixy], [ixy, ixx]] in (x, y); the major
        // axis is the eigenvector of the larger eigenvalue.
        let tr = iyy + ixx;
        let det = iyy * ixx - ixy * ixy;
        let disc = (tr * tr * S::of(0.25) - det).max(S::zero()).sqrt();
        let l1 = tr * S::of(0.5) + disc;
        let l2 = tr * S::of(0.5) - disc;
        if (l1 - l2).abs() <= S::of(1e-12) * l1.abs().max(S::one()) {
            return Vec2::new(S::one(), S::zero());
        }
        let v = Vec2::new(ixy, l1 - iyy);
        v.normalized().unwrap_or(Vec2::new(S::one(), S::zero()))
    }
}

/// True iff every vertex of every transformed part lies inside the rectangle
/// (closed boundaries).
pub fn contains<S: Real>(workspace: &Rect<S>, shape: &Shape<S>, pose: &Pose2<S>) -> bool {
    shape
        .parts()
        .iter()
        .all(|p| p.transform(pose).vertices().iter().all(|v| workspace.contains_point(*v)))
}

/// Outer boundary polyline of a shape at a pose.
///
/// Exact for single-part shapes; multi-part shapes use the convex hull of
/// all part vertices as the outer contour.
fn outer_boundary<S: Real>(shape: &Shape<S>, pose: &Pose2<S>) -> Vec<Vec2<S>> {
    let polys = shape.transform(pose);
    if polys.len() == 1 {
        return polys.into_iter().next().unwrap().vertices().to_vec();
    }
    let pts: Vec<Vec2<S>> = polys.iter().flat_map(|p| p.vertices().iter().copied()).collect();
    convex_hull(&pts)
}

/// Andrew's monotone chain; returns CCW hull without the closing vertex.
pub fn convex_hull<S: Real>(points: &[Vec2<S>]) -> Vec<Vec2<S>> {
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| {
        a.x.partial_cmp(&b.x)
            .unwrap()
            .then(a.y.partial_cmp(&b.y).unwrap())
    });
    pts.dedup_by(|a, b| a.x == b.x && a.y == b.y);
    if pts.len() < 3 {
        return pts;
    }
    let mut lower: Vec<Vec2<S>> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2
            && (lower[lower.len() - 1] - lower[lower.len() - 2]).cross(p - lower[lower.len() - 1])
                <= S::zero()
        {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<Vec2<S>> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2
            && (upper[upper.len() - 1] - upper[upper.len() - 2]).cross(p - upper[upper.len() - 1])
                <= S::zero()
        {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

/// `n` points evenly spaced by arc length along the outer boundary of the
/// shape at `pose`, each paired with the unit direction from the point
/// toward the shape centroid. The walk starts at the lowest-then-leftmost
/// boundary vertex.
pub fn contour_points<S: Real>(
    shape: &Shape<S>,
    pose: &Pose2<S>,
    n: usize,
) -> Result<Vec<(Vec2<S>, Vec2<S>)>, GeometryError> {
    assert!(n >= 1, "contour_points needs n >= 1");
    let boundary = outer_boundary(shape, pose);
    let m = boundary.len();
    let perimeter: S = (0..m).map(|i| boundary[i].dist(boundary[(i + 1) % m])).sum();
    if m < 2 || perimeter <= S::epsilon() {
        return Err(GeometryError::DegenerateContour);
    }
    // Rotate the walk start to the lowest-then-leftmost vertex.
    let start = (0..m)
        .min_by(|&i, &j| {
            let a = boundary[i];
            let b = boundary[j];
            a.y.partial_cmp(&b.y).unwrap().then(a.x.partial_cmp(&b.x).unwrap())
        })
        .unwrap();
    let centroid = shape.centroid_at(pose);
    let step = perimeter / S::from_usize(n).unwrap();
    let mut out = Vec::with_capacity(n);
    let mut target = S::zero();
    let mut walked = S::zero();
    let mut edge = 0usize;
    for _ in 0..n {
        // Advance along edges until the edge containing `target`.
        loop {
            let a = boundary[(start + edge) % m];
            let b = boundary[(start + edge + 1) % m];
            let len = a.dist(b);
            if walked + len >= target || edge + 1 >= m {
                let t = if len <= S::epsilon() {
                    S::zero()
                } else {
                    ((target - walked) / len).min(S::one())
                };
                let p = a + (b - a) * t;
                let inward = (centroid - p)
                    .normalized()
                    .unwrap_or(Vec2::new(S::one(), S::zero()));
                out.push((p, inward));
                break;
            }
            walked = walked + len;
            edge += 1;
        }
        target = target + step;
    }
    Ok(out)
}

/// Minimum-area oriented bounding box of a point set: `(angle, width,
/// height)` where rotating by `-angle` axis-aligns the box.
pub fn min_area_obb<S: Real>(points: &[Vec2<S>]) -> (S, S, S) {
    let hull = convex_hull(points);
    if hull.len() < 3 {
        return (S::zero(), S::zero(), S::zero());
    }
    let n = hull.len();
    let mut best = (S::zero(), S::infinity(), S::infinity());
    let mut best_area = S::infinity();
    for i in 0..n {
        let e = hull[(i + 1) % n] - hull[i];
        let u = match e.normalized() {
            Some(u) => u,
            None => continue,
        };
        let v = u.perp();
        let mut ulo = S::infinity();
        let mut uhi = S::neg_infinity();
        let mut vlo = S::infinity();
        let mut vhi = S::neg_infinity();
        for p in &hull {
            let du = p.dot(u);
            let dv = p.dot(v);
            ulo = ulo.min(du);
            uhi = uhi.max(du);
            vlo = vlo.min(dv);
            vhi = vhi.max(dv);
        }
        let area = (uhi - ulo) * (vhi - vlo);
        if area < best_area {
            best_area = area;
            best = (u.y.atan2(u.x), uhi - ulo, vhi - vlo);
        }
    }
    best
}
