//! Parametric solids, profiles and placements, plus the measurements the
//! query tools need. Pure functions live here; [`emit`] writes the IFC
//! representation entities and [`read`] recovers geometry from them.

pub mod emit;
pub mod read;
mod roof;

use std::collections::HashMap;

pub use roof::{
    hip_roof_solid, roof_solid, skeleton, RoofSolid, Skeleton, SkeletonArc, FALLBACK_THICKNESS,
};

/// Point-equality tolerance in metres.
pub const TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GeometryError {
    #[error("degenerate polygon: {0}")]
    DegeneratePolygon(String),
    #[error("extrusion depth must be positive, got {0}")]
    NonPositiveDepth(f64),
    #[error("mesh has no faces")]
    EmptyMesh,
    #[error("degenerate or invalid mesh face {0}")]
    DegenerateFace(usize),
    #[error("wall axis has zero length")]
    ZeroLengthAxis,
    #[error("slope must be within 5..=85 degrees, got {0}")]
    SlopeOutOfRange(f64),
    #[error("straight skeleton failed: {0}")]
    SkeletonFailure(String),
    #[error("non-finite coordinate")]
    NonFinite,
    #[error("invalid placement: {0}")]
    InvalidPlacement(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

#[allow(clippy::should_implement_trait)]
impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn sub(self, o: Point2) -> Point2 {
        Point2::new(self.x - o.x, self.y - o.y)
    }

    pub fn add(self, o: Point2) -> Point2 {
        Point2::new(self.x + o.x, self.y + o.y)
    }

    pub fn scale(self, s: f64) -> Point2 {
        Point2::new(self.x * s, self.y * s)
    }

    pub fn dot(self, o: Point2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    pub fn cross(self, o: Point2) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dist(self, o: Point2) -> f64 {
        self.sub(o).norm()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

#[allow(clippy::should_implement_trait)]
impl Point3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn sub(self, o: Point3) -> Point3 {
        Point3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }

    pub fn add(self, o: Point3) -> Point3 {
        Point3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }

    pub fn scale(self, s: f64) -> Point3 {
        Point3::new(self.x * s, self.y * s, self.z * s)
    }

    pub fn dot(self, o: Point3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn cross(self, o: Point3) -> Point3 {
        Point3::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn normalized(self) -> Option<Point3> {
        let n = self.norm();
        (n > 1e-12 && n.is_finite()).then(|| self.scale(1.0 / n))
    }

    pub fn xy(self) -> Point2 {
        Point2::new(self.x, self.y)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }
}

fn shoelace(pts: &[Point2]) -> f64 {
    let n = pts.len();
    (0..n)
        .map(|i| pts[i].cross(pts[(i + 1) % n]))
        .sum::<f64>()
        * 0.5
}

fn orient(a: Point2, b: Point2, c: Point2) -> f64 {
    b.sub(a).cross(c.sub(a))
}

fn on_segment(a: Point2, b: Point2, p: Point2, eps: f64) -> bool {
    p.x >= a.x.min(b.x) - eps
        && p.x <= a.x.max(b.x) + eps
        && p.y >= a.y.min(b.y) - eps
        && p.y <= a.y.max(b.y) + eps
}

fn segments_touch(a: Point2, b: Point2, c: Point2, d: Point2) -> bool {
    let eps = 1e-12;
    let d1 = orient(c, d, a);
    let d2 = orient(c, d, b);
    let d3 = orient(a, b, c);
    let d4 = orient(a, b, d);
    if ((d1 > eps && d2 < -eps) || (d1 < -eps && d2 > eps))
        && ((d3 > eps && d4 < -eps) || (d3 < -eps && d4 > eps))
    {
        return true;
    }
    (d1.abs() <= eps && on_segment(c, d, a, eps))
        || (d2.abs() <= eps && on_segment(c, d, b, eps))
        || (d3.abs() <= eps && on_segment(a, b, c, eps))
        || (d4.abs() <= eps && on_segment(a, b, d, eps))
}

/// A simple polygon, stored counter-clockwise.
#[derive(Debug, Clone, PartialEq)]
pub struct Polygon2 {
    vertices: Vec<Point2>,
}

impl Polygon2 {
    pub fn new(vertices: Vec<Point2>) -> Result<Self, GeometryError> {
        let mut vertices = vertices;
        // a closing duplicate of the first vertex is tolerated
        if vertices.len() > 3 && vertices[0].dist(*vertices.last().unwrap()) < TOLERANCE {
            vertices.pop();
        }
        if vertices.len() < 3 {
            return Err(GeometryError::DegeneratePolygon(format!(
                "need at least 3 vertices, got {}",
                vertices.len()
            )));
        }
        if vertices.iter().any(|p| !p.is_finite()) {
            return Err(GeometryError::NonFinite);
        }
        let n = vertices.len();
        for i in 0..n {
            if vertices[i].dist(vertices[(i + 1) % n]) < TOLERANCE {
                return Err(GeometryError::DegeneratePolygon(format!(
                    "vertices {i} and {} coincide",
                    (i + 1) % n
                )));
            }
        }
        for i in 0..n {
            for j in i + 1..n {
                if j == i + 1 || (i == 0 && j == n - 1) {
                    continue;
                }
                if segments_touch(
                    vertices[i],
                    vertices[(i + 1) % n],
                    vertices[j],
                    vertices[(j + 1) % n],
                ) {
                    return Err(GeometryError::DegeneratePolygon(format!(
                        "edges {i} and {j} intersect"
                    )));
                }
            }
        }
        let area = shoelace(&vertices);
        if area.abs() < 1e-12 {
            return Err(GeometryError::DegeneratePolygon("zero area".into()));
        }
        if area < 0.0 {
            vertices.reverse();
        }
        Ok(Self { vertices })
    }

    pub fn rectangle(min: Point2, max: Point2) -> Result<Self, GeometryError> {
        Self::new(vec![
            min,
            Point2::new(max.x, min.y),
            max,
            Point2::new(min.x, max.y),
        ])
    }

    pub fn vertices(&self) -> &[Point2] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn perimeter(&self) -> f64 {
        let n = self.vertices.len();
        (0..n)
            .map(|i| self.vertices[i].dist(self.vertices[(i + 1) % n]))
            .sum()
    }

    pub fn bounds(&self) -> (Point2, Point2) {
        bounds2(&self.vertices)
    }

    /// Returns `(min, max)` when the polygon is an axis-aligned rectangle.
    pub fn as_axis_rectangle(&self) -> Option<(Point2, Point2)> {
        if self.vertices.len() != 4 {
            return None;
        }
        let (min, max) = self.bounds();
        let on_corner = |p: &Point2| {
            ((p.x - min.x).abs() < TOLERANCE || (p.x - max.x).abs() < TOLERANCE)
                && ((p.y - min.y).abs() < TOLERANCE || (p.y - max.y).abs() < TOLERANCE)
        };
        let aligned = (0..4).all(|i| {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % 4];
            (a.x - b.x).abs() < TOLERANCE || (a.y - b.y).abs() < TOLERANCE
        });
        (aligned && self.vertices.iter().all(on_corner)).then_some((min, max))
    }

    /// True when both polygons list the same cycle of vertices, starting anywhere.
    pub fn same_outline(&self, other: &Polygon2) -> bool {
        let n = self.vertices.len();
        if n != other.vertices.len() {
            return false;
        }
        (0..n).any(|shift| {
            (0..n).all(|i| self.vertices[i].dist(other.vertices[(i + shift) % n]) < TOLERANCE)
        })
    }
}

pub fn bounds2(pts: &[Point2]) -> (Point2, Point2) {
    let mut min = Point2::new(f64::INFINITY, f64::INFINITY);
    let mut max = Point2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    for p in pts {
        min.x = min.x.min(p.x);
        min.y = min.y.min(p.y);
        max.x = max.x.max(p.x);
        max.y = max.y.max(p.y);
    }
    (min, max)
}

/// Shoelace area; positive because polygons are stored counter-clockwise.
pub fn polygon_area(poly: &Polygon2) -> f64 {
    shoelace(&poly.vertices)
}

/// Local coordinate system: origin plus orthonormal z and x axes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Placement {
    pub origin: Point3,
    pub z_axis: Point3,
    pub x_axis: Point3,
}

impl Placement {
    pub fn new(origin: Point3, z_axis: Point3, x_axis: Point3) -> Result<Self, GeometryError> {
        if !origin.is_finite() || !z_axis.is_finite() || !x_axis.is_finite() {
            return Err(GeometryError::NonFinite);
        }
        let unit = |v: Point3| (v.norm() - 1.0).abs() <= 1e-9;
        if !unit(z_axis) || !unit(x_axis) || z_axis.dot(x_axis).abs() > 1e-9 {
            return Err(GeometryError::InvalidPlacement(
                "axes must be orthonormal".into(),
            ));
        }
        Ok(Self {
            origin,
            z_axis,
            x_axis,
        })
    }

    pub fn identity() -> Self {
        Self::at(Point3::default())
    }

    pub fn at(origin: Point3) -> Self {
        Self {
            origin,
            z_axis: Point3::new(0.0, 0.0, 1.0),
            x_axis: Point3::new(1.0, 0.0, 0.0),
        }
    }

    /// Horizontal placement with the local x axis turned towards `dir`.
    pub fn horizontal(origin: Point3, dir: Point2) -> Result<Self, GeometryError> {
        let len = dir.norm();
        if len < TOLERANCE {
            return Err(GeometryError::ZeroLengthAxis);
        }
        Ok(Self {
            origin,
            z_axis: Point3::new(0.0, 0.0, 1.0),
            x_axis: Point3::new(dir.x / len, dir.y / len, 0.0),
        })
    }

    pub fn y_axis(&self) -> Point3 {
        self.z_axis.cross(self.x_axis)
    }

    pub fn to_world(&self, p: Point3) -> Point3 {
        self.origin
            .add(self.x_axis.scale(p.x))
            .add(self.y_axis().scale(p.y))
            .add(self.z_axis.scale(p.z))
    }

    pub fn dir_to_world(&self, d: Point3) -> Point3 {
        self.x_axis
            .scale(d.x)
            .add(self.y_axis().scale(d.y))
            .add(self.z_axis.scale(d.z))
    }

    /// `self` expressed in the frame of `parent`, returned in world terms.
    pub fn within(&self, parent: &Placement) -> Placement {
        Placement {
            origin: parent.to_world(self.origin),
            z_axis: parent.dir_to_world(self.z_axis),
            x_axis: parent.dir_to_world(self.x_axis),
        }
    }

    pub fn is_identity_rotation(&self) -> bool {
        (self.z_axis.z - 1.0).abs() < 1e-12 && (self.x_axis.x - 1.0).abs() < 1e-12
    }
}

/// Triangle mesh; faces are vertex-index triples.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TriMesh {
    pub vertices: Vec<Point3>,
    pub faces: Vec<[usize; 3]>,
}

pub fn triangle_area(a: Point3, b: Point3, c: Point3) -> f64 {
    b.sub(a).cross(c.sub(a)).norm() * 0.5
}

impl TriMesh {
    pub fn new(vertices: Vec<Point3>, faces: Vec<[usize; 3]>) -> Result<Self, GeometryError> {
        let m = Self { vertices, faces };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<(), GeometryError> {
        if self.faces.is_empty() {
            return Err(GeometryError::EmptyMesh);
        }
        if self.vertices.iter().any(|p| !p.is_finite()) {
            return Err(GeometryError::NonFinite);
        }
        for (i, f) in self.faces.iter().enumerate() {
            if f.iter().any(|&v| v >= self.vertices.len()) {
                return Err(GeometryError::DegenerateFace(i));
            }
            let [a, b, c] = f.map(|v| self.vertices[v]);
            if triangle_area(a, b, c) <= 1e-12 {
                return Err(GeometryError::DegenerateFace(i));
            }
        }
        Ok(())
    }

    pub fn bounds(&self) -> Option<(Point3, Point3)> {
        bounds3(&self.vertices)
    }

    /// Signed volume via the divergence theorem; positive for outward faces.
    pub fn signed_volume(&self) -> f64 {
        self.faces
            .iter()
            .map(|f| {
                let [a, b, c] = f.map(|v| self.vertices[v]);
                a.dot(b.cross(c)) / 6.0
            })
            .sum()
    }

    /// Every undirected edge is used by exactly two triangles.
    pub fn is_watertight(&self) -> bool {
        let mut counts: HashMap<(usize, usize), usize> = HashMap::new();
        for f in &self.faces {
            for k in 0..3 {
                let (a, b) = (f[k], f[(k + 1) % 3]);
                *counts.entry((a.min(b), a.max(b))).or_default() += 1;
            }
        }
        !counts.is_empty() && counts.values().all(|&c| c == 2)
    }

    /// Merges vertices closer than `tol` and drops unreferenced ones.
    pub fn welded(&self, tol: f64) -> TriMesh {
        let mut out: Vec<Point3> = Vec::new();
        let mut remap = Vec::with_capacity(self.vertices.len());
        let key = |p: Point3| {
            (
                (p.x / tol).round() as i64,
                (p.y / tol).round() as i64,
                (p.z / tol).round() as i64,
            )
        };
        let mut buckets: HashMap<(i64, i64, i64), Vec<usize>> = HashMap::new();
        for p in &self.vertices {
            let k = key(*p);
            let mut found = None;
            'search: for dx in -1..=1 {
                for dy in -1..=1 {
                    for dz in -1..=1 {
                        if let Some(list) = buckets.get(&(k.0 + dx, k.1 + dy, k.2 + dz)) {
                            for &idx in list {
                                if out[idx].sub(*p).norm() <= tol {
                                    found = Some(idx);
                                    break 'search;
                                }
                            }
                        }
                    }
                }
            }
            let idx = found.unwrap_or_else(|| {
                out.push(*p);
                buckets.entry(k).or_default().push(out.len() - 1);
                out.len() - 1
            });
            remap.push(idx);
        }
        TriMesh {
            vertices: out,
            faces: self.faces.iter().map(|f| f.map(|v| remap[v])).collect(),
        }
    }

    pub fn transformed(&self, placement: &Placement) -> TriMesh {
        TriMesh {
            vertices: self
                .vertices
                .iter()
                .map(|p| placement.to_world(*p))
                .collect(),
            faces: self.faces.clone(),
        }
    }

    pub fn append(&mut self, other: &TriMesh) {
        let base = self.vertices.len();
        self.vertices.extend_from_slice(&other.vertices);
        self.faces
            .extend(other.faces.iter().map(|f| f.map(|v| v + base)));
    }
}

pub fn bounds3(pts: &[Point3]) -> Option<(Point3, Point3)> {
    if pts.is_empty() {
        return None;
    }
    let mut min = Point3::new(f64::INFINITY, f64::INFINITY, f64::INFINITY);
    let mut max = Point3::new(f64::NEG_INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
    for p in pts {
        min.x = min.x.min(p.x);
        min.y = min.y.min(p.y);
        min.z = min.z.min(p.z);
        max.x = max.x.max(p.x);
        max.y = max.y.max(p.y);
        max.z = max.z.max(p.z);
    }
    Some((min, max))
}

fn point_in_triangle(p: Point2, a: Point2, b: Point2, c: Point2) -> bool {
    let eps = 1e-12;
    let d1 = orient(a, b, p);
    let d2 = orient(b, c, p);
    let d3 = orient(c, a, p);
    d1 >= -eps && d2 >= -eps && d3 >= -eps
}

/// Ear-clipping triangulation of a simple counter-clockwise polygon.
/// Returns index triples into `pts`, each counter-clockwise.
pub fn triangulate(pts: &[Point2]) -> Result<Vec<[usize; 3]>, GeometryError> {
    let n = pts.len();
    if n < 3 {
        return Err(GeometryError::DegeneratePolygon("fewer than 3 vertices".into()));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    let mut tris = Vec::with_capacity(n - 2);
    while idx.len() > 3 {
        let m = idx.len();
        let mut clipped = false;
        for i in 0..m {
            let (ia, ib, ic) = (idx[(i + m - 1) % m], idx[i], idx[(i + 1) % m]);
            let (a, b, c) = (pts[ia], pts[ib], pts[ic]);
            if orient(a, b, c) <= 1e-12 {
                continue;
            }
            let blocked = idx.iter().any(|&j| {
                j != ia
                    && j != ib
                    && j != ic
                    && pts[j].dist(a) > 1e-12
                    && pts[j].dist(b) > 1e-12
                    && pts[j].dist(c) > 1e-12
                    && point_in_triangle(pts[j], a, b, c)
            });
            if blocked {
                continue;
            }
            tris.push([ia, ib, ic]);
            idx.remove(i);
            clipped = true;
            break;
        }
        if !clipped {
            return Err(GeometryError::DegeneratePolygon("no valid ear found".into()));
        }
    }
    let (a, b, c) = (idx[0], idx[1], idx[2]);
    if orient(pts[a], pts[b], pts[c]) > 1e-12 {
        tris.push([a, b, c]);
    } else if orient(pts[a], pts[b], pts[c]).abs() > 1e-12 {
        return Err(GeometryError::DegeneratePolygon("inverted final triangle".into()));
    }
    Ok(tris)
}

/// Closed prism of `poly` between `z0` and `z0 + depth`, outward faces.
pub fn prism_mesh(poly: &Polygon2, z0: f64, depth: f64) -> Result<TriMesh, GeometryError> {
    if depth.is_nan() || depth <= 0.0 {
        return Err(GeometryError::NonPositiveDepth(depth));
    }
    let pts = poly.vertices();
    let n = pts.len();
    let tris = triangulate(pts)?;
    let mut vertices = Vec::with_capacity(2 * n);
    vertices.extend(pts.iter().map(|p| Point3::new(p.x, p.y, z0)));
    vertices.extend(pts.iter().map(|p| Point3::new(p.x, p.y, z0 + depth)));
    let mut faces = Vec::new();
    for t in &tris {
        faces.push([t[0], t[2], t[1]]);
        faces.push([t[0] + n, t[1] + n, t[2] + n]);
    }
    for i in 0..n {
        let j = (i + 1) % n;
        faces.push([i, j, j + n]);
        faces.push([i, j + n, i + n]);
    }
    Ok(TriMesh { vertices, faces })
}

/// Rectangle of the wall's footprint in the wall's local frame, and the
/// frame itself: origin at `start`, x axis towards `end`.
pub fn wall_axis_to_profile(
    start: Point2,
    end: Point2,
    thickness: f64,
) -> Result<(Polygon2, Placement), GeometryError> {
    if !start.is_finite() || !end.is_finite() || !thickness.is_finite() {
        return Err(GeometryError::NonFinite);
    }
    let length = end.dist(start);
    if length < TOLERANCE {
        return Err(GeometryError::ZeroLengthAxis);
    }
    if thickness <= 0.0 {
        return Err(GeometryError::InvalidParameter(format!(
            "thickness must be positive, got {thickness}"
        )));
    }
    let half = thickness / 2.0;
    let profile = Polygon2::rectangle(Point2::new(0.0, -half), Point2::new(length, half))?;
    let placement = Placement::horizontal(Point3::new(start.x, start.y, 0.0), end.sub(start))?;
    Ok((profile, placement))
}

/// Closed mesh of box treads: a stepped profile in the (run, rise) plane
/// swept across the stair width. Local frame: x along the run, y across.
pub fn stair_mesh(
    total_rise: f64,
    total_run: f64,
    step_count: usize,
    width: f64,
) -> Result<TriMesh, GeometryError> {
    if step_count < 2 {
        return Err(GeometryError::InvalidParameter("step_count must be at least 2".into()));
    }
    if !(total_rise > 0.0 && total_run > 0.0 && width > 0.0) {
        return Err(GeometryError::InvalidParameter(
            "rise, run and width must be positive".into(),
        ));
    }
    let riser = total_rise / step_count as f64;
    let tread = total_run / step_count as f64;
    // profile in (x = run, y = height), counter-clockwise
    let mut profile = vec![Point2::new(0.0, 0.0), Point2::new(total_run, 0.0)];
    for i in (0..step_count).rev() {
        let top = (i + 1) as f64 * riser;
        profile.push(Point2::new((i + 1) as f64 * tread, top));
        profile.push(Point2::new(i as f64 * tread, top));
    }
    // drop the duplicate corner at (total_run, total_rise) vs the first riser
    profile.dedup_by(|a, b| a.dist(*b) < TOLERANCE);
    let poly = Polygon2::new(profile)?;
    let prism = prism_mesh(&poly, 0.0, width)?;
    // prism is built along +z; rotate so the sweep runs along +y and height is +z
    let vertices = prism
        .vertices
        .iter()
        .map(|p| Point3::new(p.x, p.z, p.y))
        .collect();
    // the axis swap mirrors the solid, so flip winding to stay outward
    let faces = prism.faces.iter().map(|f| [f[0], f[2], f[1]]).collect();
    TriMesh::new(vertices, faces)
}
