//! Recovers solids and measurements from body representations.

use super::{bounds3, prism_mesh, Placement, Point2, Point3, Polygon2, TriMesh};
use crate::model::IfcModel;
use crate::step::StepValue;

#[derive(Debug, Clone)]
pub enum Body {
    /// Profile extruded from `position` along `direction` (in the
    /// position's frame) by `depth`.
    Extrusion {
        profile: Polygon2,
        position: Placement,
        direction: Point3,
        depth: f64,
    },
    Mesh(TriMesh),
}

fn coords(model: &IfcModel, id: u64) -> Option<Vec<f64>> {
    let e = model.get(id)?;
    Some(e.attr(0).as_list()?.iter().filter_map(StepValue::as_f64).collect())
}

fn point2(model: &IfcModel, id: u64) -> Option<Point2> {
    let c = coords(model, id)?;
    Some(Point2::new(*c.first()?, *c.get(1)?))
}

fn point3(model: &IfcModel, id: u64) -> Option<Point3> {
    let c = coords(model, id)?;
    Some(Point3::new(*c.first()?, *c.get(1)?, c.get(2).copied().unwrap_or(0.0)))
}

fn ref_list(v: &StepValue) -> Vec<u64> {
    v.as_list()
        .unwrap_or(&[])
        .iter()
        .filter_map(StepValue::as_ref_id)
        .collect()
}

fn read_profile(model: &IfcModel, id: u64) -> Option<Polygon2> {
    let e = model.get(id)?;
    match e.class_name.as_str() {
        "IFCRECTANGLEPROFILEDEF" => {
            let (x, y) = (e.attr(3).as_f64()?, e.attr(4).as_f64()?);
            let (centre, dir) = match e.attr(2).as_ref_id().and_then(|p| model.get(p)) {
                Some(pos) => (
                    pos.attr(0).as_ref_id().and_then(|p| point2(model, p)).unwrap_or_default(),
                    pos.attr(1)
                        .as_ref_id()
                        .and_then(|d| point2(model, d))
                        .filter(|d| d.norm() > 1e-12)
                        .map(|d| d.scale(1.0 / d.norm()))
                        .unwrap_or(Point2::new(1.0, 0.0)),
                ),
                None => (Point2::default(), Point2::new(1.0, 0.0)),
            };
            let perp = Point2::new(-dir.y, dir.x);
            let corner = |sx: f64, sy: f64| centre.add(dir.scale(sx * x / 2.0)).add(perp.scale(sy * y / 2.0));
            Polygon2::new(vec![corner(-1., -1.), corner(1., -1.), corner(1., 1.), corner(-1., 1.)]).ok()
        }
        "IFCARBITRARYCLOSEDPROFILEDEF" => {
            let curve = model.get(e.attr(2).as_ref_id()?)?;
            if curve.class_name != "IFCPOLYLINE" {
                return None;
            }
            let pts: Option<Vec<Point2>> = ref_list(curve.attr(0)).into_iter().map(|p| point2(model, p)).collect();
            Polygon2::new(pts?).ok()
        }
        _ => None,
    }
}

fn read_brep(model: &IfcModel, id: u64) -> Option<TriMesh> {
    let brep = model.get(id)?;
    let shell = model.get(brep.attr(0).as_ref_id()?)?;
    let mut mesh = TriMesh::default();
    for face in ref_list(shell.attr(0)) {
        let face = model.get(face)?;
        let Some(bound) = ref_list(face.attr(0)).first().and_then(|b| model.get(*b)) else {
            continue;
        };
        let forward = !matches!(bound.attr(1), StepValue::Bool(false));
        let Some(lp) = bound.attr(0).as_ref_id().and_then(|l| model.get(l)) else {
            continue;
        };
        let pts: Option<Vec<Point3>> = ref_list(lp.attr(0)).into_iter().map(|p| point3(model, p)).collect();
        let mut pts = pts?;
        if !forward {
            pts.reverse();
        }
        if pts.len() < 3 {
            continue;
        }
        let base = mesh.vertices.len();
        mesh.vertices.extend(pts.iter().copied());
        for k in 1..pts.len() - 1 {
            mesh.faces.push([base, base + k, base + k + 1]);
        }
    }
    (!mesh.faces.is_empty()).then_some(mesh)
}

/// Body items of a product definition shape.
pub fn body_of(model: &IfcModel, shape: u64) -> Vec<Body> {
    let mut out = Vec::new();
    let Some(pds) = model.get(shape) else { return out };
    for rep in ref_list(pds.attr(2)) {
        let Some(rep) = model.get(rep) else { continue };
        if rep.attr(1).as_str().is_some_and(|s| s != "Body") {
            continue;
        }
        for item in ref_list(rep.attr(3)) {
            let Some(e) = model.get(item) else { continue };
            match e.class_name.as_str() {
                "IFCEXTRUDEDAREASOLID" => {
                    let profile = e.attr(0).as_ref_id().and_then(|p| read_profile(model, p));
                    let depth = e.attr(3).as_f64();
                    let direction = e
                        .attr(2)
                        .as_ref_id()
                        .and_then(|d| point3(model, d))
                        .and_then(Point3::normalized)
                        .unwrap_or(Point3::new(0.0, 0.0, 1.0));
                    let position = e
                        .attr(1)
                        .as_ref_id()
                        .map(|p| model.read_axis_placement(p))
                        .unwrap_or_else(Placement::identity);
                    if let (Some(profile), Some(depth)) = (profile, depth) {
                        out.push(Body::Extrusion {
                            profile,
                            position,
                            direction,
                            depth,
                        });
                    }
                }
                "IFCFACETEDBREP" => {
                    if let Some(m) = read_brep(model, item) {
                        out.push(Body::Mesh(m));
                    }
                }
                _ => {}
            }
        }
    }
    out
}

pub fn product_bodies(model: &IfcModel, product: u64) -> Vec<Body> {
    model
        .get(product)
        .and_then(|e| e.attr(6).as_ref_id())
        .map(|s| body_of(model, s))
        .unwrap_or_default()
}

fn body_to_mesh(body: &Body) -> Option<TriMesh> {
    match body {
        Body::Extrusion {
            profile,
            position,
            direction,
            depth,
        } => {
            let unit = prism_mesh(profile, 0.0, 1.0).ok()?;
            let vertices = unit
                .vertices
                .iter()
                .map(|p| {
                    let local = Point3::new(p.x, p.y, 0.0).add(direction.scale(depth * p.z));
                    position.to_world(local)
                })
                .collect();
            Some(TriMesh {
                vertices,
                faces: unit.faces,
            })
        }
        Body::Mesh(m) => Some(m.clone()),
    }
}

/// Triangulated body in the product's object coordinates.
pub fn body_mesh(model: &IfcModel, shape: u64) -> Option<TriMesh> {
    let mut out = TriMesh::default();
    for b in body_of(model, shape) {
        out.append(&body_to_mesh(&b)?);
    }
    (!out.faces.is_empty()).then_some(out)
}

/// Triangulated body in world coordinates.
pub fn world_mesh(model: &IfcModel, product: u64) -> Option<TriMesh> {
    let shape = model.get(product)?.attr(6).as_ref_id()?;
    let mesh = body_mesh(model, shape)?;
    Some(mesh.transformed(&model.world_placement(product)))
}

pub fn world_bounds(model: &IfcModel, product: u64) -> Option<(Point3, Point3)> {
    bounds3(&world_mesh(model, product)?.vertices)
}

fn first_extrusion(model: &IfcModel, product: u64) -> Option<(Polygon2, f64)> {
    product_bodies(model, product).into_iter().find_map(|b| match b {
        Body::Extrusion { profile, depth, .. } => Some((profile, depth)),
        Body::Mesh(_) => None,
    })
}

/// Extrusion depth, or the vertical extent of a mesh body.
pub fn height(model: &IfcModel, product: u64) -> Option<f64> {
    if let Some((_, d)) = first_extrusion(model, product) {
        return Some(d);
    }
    let shape = model.get(product)?.attr(6).as_ref_id()?;
    let (min, max) = bounds3(&body_mesh(model, shape)?.vertices)?;
    Some(max.z - min.z)
}

/// Profile extent along the local x axis; the axis length for walls.
pub fn axis_length(model: &IfcModel, product: u64) -> Option<f64> {
    let (profile, _) = first_extrusion(model, product)?;
    let (min, max) = profile.bounds();
    Some(max.x - min.x)
}

/// Profile extent across the local x axis; the thickness for walls.
pub fn profile_width(model: &IfcModel, product: u64) -> Option<f64> {
    let (profile, _) = first_extrusion(model, product)?;
    let (min, max) = profile.bounds();
    Some(max.y - min.y)
}

pub fn profile_area(model: &IfcModel, product: u64) -> Option<f64> {
    first_extrusion(model, product).map(|(p, _)| super::polygon_area(&p))
}

/// World-space wall axis: start and end of the local x axis at the base.
pub fn wall_axis(model: &IfcModel, wall: u64) -> Option<(Point2, Point2)> {
    let (profile, _) = first_extrusion(model, wall)?;
    let (min, max) = profile.bounds();
    let pl = model.world_placement(wall);
    let mid_y = (min.y + max.y) / 2.0;
    let a = pl.to_world(Point3::new(min.x, mid_y, 0.0));
    let b = pl.to_world(Point3::new(max.x, mid_y, 0.0));
    Some((a.xy(), b.xy()))
}
