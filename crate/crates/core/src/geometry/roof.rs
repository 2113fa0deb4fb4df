//! Straight-skeleton roofs.
//!
//! The skeleton is computed by simulating the inward-moving wavefront of a
//! simple polygon. Every outline edge moves along its inward normal at its
//! own speed (1 for sloped planes, 0 for vertical gable ends). Vertices of
//! the wavefront travel so that they stay on both adjacent edge lines.
//! Two event kinds change the wavefront topology:
//!
//! * edge events, when a wavefront edge shrinks to zero length;
//! * split events, when a reflex vertex runs into a non-adjacent edge.
//!
//! Each iteration finds the earliest event, advances every vertex to it and
//! then normalises the wavefront (merging coincident neighbours, removing
//! zero-width spikes and retiring collapsed loops). Roof height at a skeleton
//! node is `tan(slope) * time`.

use super::{prism_mesh, triangulate, GeometryError, Point2, Point3, Polygon2, TriMesh};

/// Skeleton arc between two nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SkeletonArc {
    pub from: usize,
    pub to: usize,
}

#[derive(Debug, Clone)]
pub struct Skeleton {
    /// Node positions; the first `n` are the outline vertices.
    pub nodes: Vec<Point2>,
    /// Wavefront time at which each node was reached (0 for outline vertices).
    pub times: Vec<f64>,
    /// Boundary cycle of the face swept by each outline edge, starting with
    /// the edge's own endpoints.
    pub faces: Vec<Vec<usize>>,
    /// Interior arcs (outline edges excluded), deduplicated.
    pub arcs: Vec<SkeletonArc>,
}

#[derive(Debug, Clone)]
pub struct RoofSolid {
    pub mesh: TriMesh,
    pub warnings: Vec<String>,
    /// True when the skeleton failed and a flat slab was produced instead.
    pub flat_fallback: bool,
}

/// Thickness of the flat slab used when the skeleton cannot be built.
pub const FALLBACK_THICKNESS: f64 = 0.2;

#[derive(Debug, Clone, Copy)]
struct Edge {
    dir: Point2,
    normal: Point2,
    offset: f64,
    speed: f64,
}

#[derive(Debug, Clone, Copy)]
struct Vertex {
    pos: Point2,
    node: usize,
    left: usize,
    right: usize,
    vel: Option<Point2>,
}

#[derive(Debug, Clone, Copy)]
enum Event {
    Edge,
    Split { lav: usize, vertex: usize, edge: usize },
}

struct Builder {
    edges: Vec<Edge>,
    nodes: Vec<Point2>,
    times: Vec<f64>,
    face_segments: Vec<Vec<(usize, usize)>>,
    time: f64,
    tol: f64,
}

fn velocity(a: &Edge, b: &Edge) -> Option<Point2> {
    let det = a.normal.cross(b.normal);
    if det.abs() < 1e-12 {
        if a.normal.dot(b.normal) > 0.0 && (a.speed - b.speed).abs() < 1e-12 {
            return Some(a.normal.scale(a.speed));
        }
        return None;
    }
    Some(Point2::new(
        (a.speed * b.normal.y - b.speed * a.normal.y) / det,
        (a.normal.x * b.speed - b.normal.x * a.speed) / det,
    ))
}

fn signed_area(pts: impl Iterator<Item = Point2> + Clone) -> f64 {
    let v: Vec<Point2> = pts.collect();
    let n = v.len();
    (0..n).map(|i| v[i].cross(v[(i + 1) % n])).sum::<f64>() * 0.5
}

impl Builder {
    fn node(&mut self, p: Point2) -> usize {
        let t = self.time;
        if let Some(i) = self
            .nodes
            .iter()
            .zip(&self.times)
            .position(|(q, tq)| q.dist(p) <= self.tol && (tq - t).abs() <= self.tol)
        {
            return i;
        }
        self.nodes.push(p);
        self.times.push(t);
        self.nodes.len() - 1
    }

    fn segment(&mut self, face: usize, a: usize, b: usize) {
        if a != b {
            self.face_segments[face].push((a, b));
        }
    }

    fn vertex(&self, pos: Point2, node: usize, left: usize, right: usize) -> Vertex {
        Vertex {
            pos,
            node,
            left,
            right,
            vel: velocity(&self.edges[left], &self.edges[right]),
        }
    }

    /// Ends a vertex's trajectory at its current position.
    fn retire(&mut self, v: &Vertex) -> usize {
        let end = self.node(v.pos);
        self.segment(v.left, v.node, end);
        self.segment(v.right, v.node, end);
        end
    }

    fn finish_loop(&mut self, lav: &[Vertex]) {
        let ends: Vec<usize> = lav.iter().map(|v| self.retire(v)).collect();
        let m = lav.len();
        if m < 2 {
            return;
        }
        for k in 0..m {
            let next = (k + 1) % m;
            if m == 2 && k == 1 && ends[0] == ends[1] {
                break;
            }
            self.segment(lav[k].right, ends[k], ends[next]);
        }
    }

    /// Normalises one loop. Returns `None` once the loop has been retired.
    fn clean(&mut self, mut lav: Vec<Vertex>) -> Result<Option<Vec<Vertex>>, GeometryError> {
        let mut guard = 0usize;
        loop {
            guard += 1;
            if guard > 10_000 {
                return Err(GeometryError::SkeletonFailure("cleanup did not converge".into()));
            }
            let m = lav.len();
            if m < 3 {
                self.finish_loop(&lav);
                return Ok(None);
            }
            // merge runs of coincident neighbours
            if let Some(k) = (0..m).find(|&k| lav[k].pos.dist(lav[(k + 1) % m].pos) <= self.tol) {
                let mut start = k;
                let mut len = 2;
                while len < m && lav[(start + m - 1) % m].pos.dist(lav[start].pos) <= self.tol {
                    start = (start + m - 1) % m;
                    len += 1;
                }
                while len < m
                    && lav[(start + len - 1) % m]
                        .pos
                        .dist(lav[(start + len) % m].pos)
                        <= self.tol
                {
                    len += 1;
                }
                let run: Vec<Vertex> = (0..len).map(|i| lav[(start + i) % m]).collect();
                let centre = run
                    .iter()
                    .fold(Point2::default(), |acc, v| acc.add(v.pos))
                    .scale(1.0 / len as f64);
                let mut retired = Vec::with_capacity(len);
                for v in &run {
                    let mut v = *v;
                    v.pos = centre;
                    retired.push(v);
                }
                if len == m {
                    self.finish_loop(&retired);
                    return Ok(None);
                }
                let node = self.node(centre);
                for v in &retired {
                    self.segment(v.left, v.node, node);
                    self.segment(v.right, v.node, node);
                }
                let merged = self.vertex(centre, node, run[0].left, run[len - 1].right);
                let mut next = Vec::with_capacity(m - len + 1);
                next.push(merged);
                for i in len..m {
                    next.push(lav[(start + i) % m]);
                }
                lav = next;
                continue;
            }
            // zero-width spikes: a vertex between two opposite, coincident edges
            if let Some(b) = (0..m).find(|&i| lav[i].vel.is_none()) {
                let ia = (b + m - 1) % m;
                let ic = (b + 1) % m;
                let (va, vb, vc) = (lav[ia], lav[b], lav[ic]);
                let la = va.pos.dist(vb.pos);
                let lc = vc.pos.dist(vb.pos);
                let tip = self.retire(&vb);
                if (la - lc).abs() <= self.tol {
                    let na = self.node(va.pos);
                    let nc = self.node(vc.pos);
                    self.segment(vb.left, na, tip);
                    self.segment(vb.right, tip, nc);
                    lav.remove(b);
                } else if la > lc {
                    // c sits on a-b: the stretch c..b is finished ridge
                    let nc = self.retire(&vc);
                    self.segment(vb.left, nc, tip);
                    self.segment(vb.right, tip, nc);
                    let replacement = self.vertex(vc.pos, nc, vb.left, vc.right);
                    lav[ic] = replacement;
                    lav.remove(b);
                } else {
                    let na = self.retire(&va);
                    self.segment(vb.left, na, tip);
                    self.segment(vb.right, tip, na);
                    let replacement = self.vertex(va.pos, na, va.left, vb.right);
                    lav[ia] = replacement;
                    lav.remove(b);
                }
                continue;
            }
            let area = signed_area(lav.iter().map(|v| v.pos));
            if area.abs() <= self.tol * self.tol.sqrt() {
                self.finish_loop(&lav);
                return Ok(None);
            }
            if area < 0.0 {
                return Err(GeometryError::SkeletonFailure("wavefront inverted".into()));
            }
            return Ok(Some(lav));
        }
    }

    fn next_event(&self, lavs: &[Vec<Vertex>]) -> Option<(f64, Event)> {
        let mut best: Option<(f64, Event)> = None;
        let consider = |dt: f64, ev: Event, best: &mut Option<(f64, Event)>| {
            let dt = dt.max(0.0);
            let better = match best {
                None => true,
                Some((b, Event::Edge)) => dt < *b - 1e-12,
                Some((b, Event::Split { .. })) => match ev {
                    Event::Edge => dt <= *b + 1e-12,
                    Event::Split { .. } => dt < *b - 1e-12,
                },
            };
            if better {
                *best = Some((dt, ev));
            }
        };
        for (li, lav) in lavs.iter().enumerate() {
            let m = lav.len();
            for k in 0..m {
                let a = &lav[k];
                let b = &lav[(k + 1) % m];
                let dir = self.edges[a.right].dir;
                let (va, vb) = (a.vel.unwrap(), b.vel.unwrap());
                let len = dir.dot(b.pos.sub(a.pos));
                let rate = dir.dot(vb.sub(va));
                if rate < -1e-12 {
                    consider(-len / rate, Event::Edge, &mut best);
                }
            }
            for (vi, v) in lav.iter().enumerate() {
                let (dl, dr) = (self.edges[v.left].dir, self.edges[v.right].dir);
                if dl.cross(dr) >= -1e-12 {
                    continue;
                }
                let vel = v.vel.unwrap();
                for k in 0..m {
                    let kn = (k + 1) % m;
                    if k == vi || kn == vi {
                        continue;
                    }
                    let e = &self.edges[lav[k].right];
                    let offset_now = e.offset + e.speed * self.time;
                    let dist = e.normal.dot(v.pos) - offset_now;
                    if dist < -self.tol {
                        continue;
                    }
                    let approach = e.speed - e.normal.dot(vel);
                    if approach <= 1e-12 {
                        continue;
                    }
                    let dt = (dist / approach).max(0.0);
                    let hit = v.pos.add(vel.scale(dt));
                    let a = lav[k].pos.add(lav[k].vel.unwrap().scale(dt));
                    let b = lav[kn].pos.add(lav[kn].vel.unwrap().scale(dt));
                    let u = e.dir.dot(hit.sub(a));
                    let span = e.dir.dot(b.sub(a));
                    if u >= -self.tol && u <= span + self.tol {
                        consider(
                            dt,
                            Event::Split {
                                lav: li,
                                vertex: vi,
                                edge: k,
                            },
                            &mut best,
                        );
                    }
                }
            }
        }
        best
    }

    fn split(&mut self, lav: &[Vertex], vi: usize, k: usize) -> (Vec<Vertex>, Vec<Vertex>) {
        let m = lav.len();
        let v = lav[vi];
        let hit = self.retire(&v);
        let target = lav[k].right;
        let va = self.vertex(v.pos, hit, v.left, target);
        let vb = self.vertex(v.pos, hit, target, v.right);
        let mut first = Vec::new();
        let mut i = (k + 1) % m;
        while i != vi {
            first.push(lav[i]);
            i = (i + 1) % m;
        }
        first.push(va);
        let mut second = Vec::new();
        let mut i = (vi + 1) % m;
        loop {
            second.push(lav[i]);
            if i == k {
                break;
            }
            i = (i + 1) % m;
        }
        second.push(vb);
        (first, second)
    }
}

/// Straight skeleton of `outline` with per-edge wavefront speeds.
pub fn skeleton(outline: &Polygon2, speeds: &[f64]) -> Result<Skeleton, GeometryError> {
    let pts = outline.vertices();
    let n = pts.len();
    if speeds.len() != n {
        return Err(GeometryError::InvalidParameter(
            "one speed per outline edge required".into(),
        ));
    }
    for i in 0..n {
        if speeds[i] == 0.0 && speeds[(i + 1) % n] == 0.0 {
            return Err(GeometryError::SkeletonFailure(
                "adjacent vertical edges are not supported".into(),
            ));
        }
    }
    let (min, max) = outline.bounds();
    let scale = (max.x - min.x).max(max.y - min.y).max(1.0);
    let edges: Vec<Edge> = (0..n)
        .map(|i| {
            let a = pts[i];
            let b = pts[(i + 1) % n];
            let d = b.sub(a).scale(1.0 / b.dist(a));
            let normal = Point2::new(-d.y, d.x);
            Edge {
                dir: d,
                normal,
                offset: normal.dot(a),
                speed: speeds[i],
            }
        })
        .collect();
    let mut b = Builder {
        edges,
        nodes: pts.to_vec(),
        times: vec![0.0; n],
        face_segments: vec![Vec::new(); n],
        time: 0.0,
        tol: 1e-9 * scale,
    };
    for i in 0..n {
        b.face_segments[i].push((i, (i + 1) % n));
    }
    let initial: Vec<Vertex> = (0..n)
        .map(|i| b.vertex(pts[i], i, (i + n - 1) % n, i))
        .collect();
    if initial.iter().any(|v| v.vel.is_none()) {
        return Err(GeometryError::SkeletonFailure(
            "collinear edges with different speeds".into(),
        ));
    }

    let mut lavs = vec![initial];
    let max_iter = 100 + 20 * n * n;
    for _ in 0..max_iter {
        let mut live = Vec::with_capacity(lavs.len());
        for lav in lavs.drain(..) {
            if let Some(l) = b.clean(lav)? {
                live.push(l);
            }
        }
        lavs = live;
        if lavs.is_empty() {
            return assemble(b, n);
        }
        let (dt, event) = b
            .next_event(&lavs)
            .ok_or_else(|| GeometryError::SkeletonFailure("wavefront stalled".into()))?;
        for lav in lavs.iter_mut() {
            for v in lav.iter_mut() {
                v.pos = v.pos.add(v.vel.unwrap().scale(dt));
            }
        }
        b.time += dt;
        if let Event::Split { lav, vertex, edge } = event {
            let target = lavs.remove(lav);
            let (x, y) = b.split(&target, vertex, edge);
            lavs.push(x);
            lavs.push(y);
        }
    }
    Err(GeometryError::SkeletonFailure("too many events".into()))
}

fn assemble(b: Builder, n: usize) -> Result<Skeleton, GeometryError> {
    let mut faces = Vec::with_capacity(n);
    let mut arcs: Vec<SkeletonArc> = Vec::new();
    for (e, segs) in b.face_segments.iter().enumerate() {
        let mut uniq: Vec<(usize, usize)> = Vec::new();
        for &(a, c) in segs {
            let key = (a.min(c), a.max(c));
            if a != c && !uniq.contains(&key) {
                uniq.push(key);
            }
        }
        let mut adj: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
        for &(a, c) in &uniq {
            adj.entry(a).or_default().push(c);
            adj.entry(c).or_default().push(a);
            let is_outline = a < n && c < n && (c == (a + 1) % n || a == (c + 1) % n);
            if !is_outline {
                let arc = SkeletonArc { from: a, to: c };
                if !arcs.contains(&arc) {
                    arcs.push(arc);
                }
            }
        }
        if adj.values().any(|v| v.len() != 2) {
            return Err(GeometryError::SkeletonFailure(format!(
                "face {e} boundary is not a simple cycle"
            )));
        }
        let start = e;
        let mut cycle = vec![start];
        let mut prev = start;
        let mut cur = (e + 1) % n;
        while cur != start {
            cycle.push(cur);
            let nb = &adj[&cur];
            let next = if nb[0] == prev { nb[1] } else { nb[0] };
            prev = cur;
            cur = next;
            if cycle.len() > uniq.len() {
                return Err(GeometryError::SkeletonFailure(format!(
                    "face {e} boundary does not close"
                )));
            }
        }
        if cycle.len() != uniq.len() {
            return Err(GeometryError::SkeletonFailure(format!(
                "face {e} boundary has stray segments"
            )));
        }
        faces.push(cycle);
    }
    Ok(Skeleton {
        nodes: b.nodes,
        times: b.times,
        faces,
        arcs,
    })
}

fn skeleton_mesh(
    outline: &Polygon2,
    sk: &Skeleton,
    speeds: &[f64],
    slope_deg: f64,
    base_z: f64,
) -> Result<TriMesh, GeometryError> {
    let tan = slope_deg.to_radians().tan();
    let vertices: Vec<Point3> = sk
        .nodes
        .iter()
        .zip(&sk.times)
        .map(|(p, t)| Point3::new(p.x, p.y, base_z + tan * t))
        .collect();
    let pts = outline.vertices();
    let n = pts.len();
    let mut faces = Vec::new();
    for (e, cycle) in sk.faces.iter().enumerate() {
        let a = pts[e];
        let b = pts[(e + 1) % n];
        let d = b.sub(a).scale(1.0 / b.dist(a));
        let normal = Point2::new(-d.y, d.x);
        let planar: Vec<Point2> = cycle
            .iter()
            .map(|&i| {
                let p = vertices[i];
                Point2::new(d.dot(p.xy()), normal.dot(p.xy()) + (p.z - base_z))
            })
            .collect();
        let tris = triangulate(&planar)?;
        let outward = Point3::new(-normal.x, -normal.y, if speeds[e] > 0.0 { 1.0 } else { 0.0 });
        for t in tris {
            let mut f = [cycle[t[0]], cycle[t[1]], cycle[t[2]]];
            let [p, q, r] = f.map(|i| vertices[i]);
            if q.sub(p).cross(r.sub(p)).dot(outward) < 0.0 {
                f.swap(1, 2);
            }
            faces.push(f);
        }
    }
    for t in triangulate(pts)? {
        faces.push([t[0], t[2], t[1]]);
    }
    TriMesh::new(vertices, faces)
}

/// Closed roof solid over `outline`; edges listed in `gable_edges` become
/// vertical gable ends.
///
/// When the skeleton cannot be built the result is a flat slab of
/// [`FALLBACK_THICKNESS`] at `base_z`, with a warning.
pub fn roof_solid(
    outline: &Polygon2,
    slope_deg: f64,
    base_z: f64,
    gable_edges: &[usize],
) -> Result<RoofSolid, GeometryError> {
    if !(5.0..=85.0).contains(&slope_deg) {
        return Err(GeometryError::SlopeOutOfRange(slope_deg));
    }
    if !base_z.is_finite() {
        return Err(GeometryError::NonFinite);
    }
    let n = outline.len();
    if let Some(bad) = gable_edges.iter().find(|&&e| e >= n) {
        return Err(GeometryError::InvalidParameter(format!("no outline edge {bad}")));
    }
    let speeds: Vec<f64> = (0..n)
        .map(|i| if gable_edges.contains(&i) { 0.0 } else { 1.0 })
        .collect();
    let attempt = skeleton(outline, &speeds)
        .and_then(|sk| skeleton_mesh(outline, &sk, &speeds, slope_deg, base_z))
        .and_then(|mesh| {
            if mesh.is_watertight() {
                Ok(mesh)
            } else {
                Err(GeometryError::SkeletonFailure("roof mesh is not closed".into()))
            }
        });
    match attempt {
        Ok(mesh) => Ok(RoofSolid {
            mesh,
            warnings: Vec::new(),
            flat_fallback: false,
        }),
        Err(GeometryError::SkeletonFailure(why)) | Err(GeometryError::DegeneratePolygon(why)) => {
            Ok(RoofSolid {
                mesh: prism_mesh(outline, base_z, FALLBACK_THICKNESS)?,
                warnings: vec![format!(
                    "straight skeleton failed ({why}); generated a flat slab at the eaves instead"
                )],
                flat_fallback: true,
            })
        }
        Err(e) => Err(e),
    }
}

/// Hip roof: every outline edge spawns a plane inclined at `slope_deg`.
pub fn hip_roof_solid(
    outline: &Polygon2,
    slope_deg: f64,
    base_z: f64,
) -> Result<RoofSolid, GeometryError> {
    roof_solid(outline, slope_deg, base_z, &[])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly(pts: &[(f64, f64)]) -> Polygon2 {
        Polygon2::new(pts.iter().map(|&(x, y)| Point2::new(x, y)).collect()).unwrap()
    }

    fn top(mesh: &TriMesh) -> Vec<Point3> {
        let zmax = mesh.vertices.iter().map(|p| p.z).fold(f64::MIN, f64::max);
        let mut out: Vec<Point3> = mesh
            .vertices
            .iter()
            .copied()
            .filter(|p| (p.z - zmax).abs() < 1e-9)
            .collect();
        out.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
        out
    }

    #[test]
    fn square_apex() {
        let sq = poly(&[(0., 0.), (10., 0.), (10., 10.), (0., 10.)]);
        for slope in [45.0f64, 30.0] {
            let r = hip_roof_solid(&sq, slope, 0.0).unwrap();
            assert!(!r.flat_fallback);
            assert!(r.mesh.is_watertight());
            let apex = top(&r.mesh);
            assert_eq!(apex.len(), 1);
            // inradius 5
            assert!((apex[0].z - 5.0 * slope.to_radians().tan()).abs() < 1e-9);
            assert!((apex[0].x - 5.0).abs() < 1e-9 && (apex[0].y - 5.0).abs() < 1e-9);
        }
    }

    #[test]
    fn rectangle_ridge() {
        let r = hip_roof_solid(&poly(&[(0., 0.), (10., 0.), (10., 4.), (0., 4.)]), 45.0, 0.0).unwrap();
        assert!(r.mesh.is_watertight());
        let ridge = top(&r.mesh);
        assert_eq!(ridge.len(), 2);
        assert!((ridge[0].z - 2.0).abs() < 1e-9);
        assert!((ridge[1].x - ridge[0].x - 6.0).abs() < 1e-9);
    }

    #[test]
    fn l_shape_is_closed() {
        let l = poly(&[(0., 0.), (10., 0.), (10., 5.), (5., 5.), (5., 10.), (0., 10.)]);
        let r = hip_roof_solid(&l, 30.0, 3.5).unwrap();
        assert!(!r.flat_fallback, "{:?}", r.warnings);
        assert!(r.mesh.is_watertight());
        let z = top(&r.mesh)[0].z;
        assert!((z - (3.5 + 2.5 * 30f64.to_radians().tan())).abs() < 1e-9);
        assert!(r.mesh.signed_volume() > 0.0);
    }

    #[test]
    fn uneven_l_and_t_shapes() {
        let shapes: Vec<Vec<(f64, f64)>> = vec![
            vec![(0., 0.), (12., 0.), (12., 4.), (6., 4.), (6., 10.), (0., 10.)],
            vec![(0., 0.), (9., 0.), (9., 3.), (6., 3.), (6., 8.), (3., 8.), (3., 3.), (0., 3.)],
            vec![(0., 0.), (10., 0.), (10., 10.), (6., 10.), (6., 4.), (4., 4.), (4., 10.), (0., 10.)],
            vec![(0., 0.), (8., 0.), (8., 2.), (2., 2.), (2., 6.), (8., 6.), (8., 8.), (0., 8.)],
        ];
        for s in shapes {
            let p = poly(&s);
            let r = hip_roof_solid(&p, 35.0, 0.0).unwrap();
            assert!(!r.flat_fallback, "{s:?}: {:?}", r.warnings);
            assert!(r.mesh.is_watertight(), "{s:?}");
            assert!(r.mesh.signed_volume() > 0.0);
        }
    }

    #[test]
    fn gable_rectangle() {
        let rect = poly(&[(0., 0.), (10., 0.), (10., 8.), (0., 8.)]);
        let r = roof_solid(&rect, 45.0, 0.0, &[1, 3]).unwrap();
        assert!(!r.flat_fallback, "{:?}", r.warnings);
        assert!(r.mesh.is_watertight());
        let ridge = top(&r.mesh);
        assert_eq!(ridge.len(), 2);
        assert!((ridge[0].z - 4.0).abs() < 1e-9);
        assert!((ridge[1].x - ridge[0].x - 10.0).abs() < 1e-9);
        // triangular prism: 0.5 * 8 * 4 * 10
        assert!((r.mesh.signed_volume() - 160.0).abs() < 1e-9);
    }

    #[test]
    fn slope_range() {
        let sq = poly(&[(0., 0.), (1., 0.), (1., 1.), (0., 1.)]);
        assert!(matches!(hip_roof_solid(&sq, 4.0, 0.0), Err(GeometryError::SlopeOutOfRange(_))));
        assert!(matches!(hip_roof_solid(&sq, 86.0, 0.0), Err(GeometryError::SlopeOutOfRange(_))));
    }
}
