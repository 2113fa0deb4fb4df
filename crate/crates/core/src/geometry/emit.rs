//! Writes body representations into a model.

use super::{bounds3, GeometryError, Placement, Point2, Polygon2, TriMesh};
use crate::model::IfcModel;
use crate::step::StepValue;

/// Vertex merge distance for faceted breps.
pub const BREP_WELD: f64 = 1e-9;

fn point2(model: &mut IfcModel, p: Point2) -> u64 {
    model.add("IFCCARTESIANPOINT", vec![StepValue::reals(&[p.x, p.y])])
}

fn profile(model: &mut IfcModel, poly: &Polygon2) -> u64 {
    if let Some((min, max)) = poly.as_axis_rectangle() {
        let centre = point2(model, Point2::new((min.x + max.x) / 2.0, (min.y + max.y) / 2.0));
        let pos = model.add("IFCAXIS2PLACEMENT2D", vec![StepValue::Ref(centre), StepValue::Unset]);
        return model.add(
            "IFCRECTANGLEPROFILEDEF",
            vec![
                StepValue::enumeration("AREA"),
                StepValue::Unset,
                StepValue::Ref(pos),
                StepValue::Real(max.x - min.x),
                StepValue::Real(max.y - min.y),
            ],
        );
    }
    let mut pts: Vec<u64> = poly.vertices().iter().map(|p| point2(model, *p)).collect();
    pts.push(pts[0]);
    let line = model.add("IFCPOLYLINE", vec![StepValue::refs(pts)]);
    model.add(
        "IFCARBITRARYCLOSEDPROFILEDEF",
        vec![StepValue::enumeration("AREA"), StepValue::Unset, StepValue::Ref(line)],
    )
}

fn shape(model: &mut IfcModel, kind: &str, item: u64) -> u64 {
    let ctx = model.ensure_context();
    let rep = model.add(
        "IFCSHAPEREPRESENTATION",
        vec![
            StepValue::Ref(ctx),
            StepValue::str("Body"),
            StepValue::str(kind),
            StepValue::refs([item]),
        ],
    );
    model.add(
        "IFCPRODUCTDEFINITIONSHAPE",
        vec![StepValue::Unset, StepValue::Unset, StepValue::refs([rep])],
    )
}

/// Extruded area solid along local +Z of `position`. Axis-aligned
/// rectangles use IFCRECTANGLEPROFILEDEF. Returns the product shape id.
pub fn extrude_profile(
    model: &mut IfcModel,
    poly: &Polygon2,
    depth: f64,
    position: &Placement,
) -> Result<u64, GeometryError> {
    if depth.is_nan() || depth <= 0.0 {
        return Err(GeometryError::NonPositiveDepth(depth));
    }
    if !depth.is_finite() {
        return Err(GeometryError::NonFinite);
    }
    let prof = profile(model, poly);
    let pos = model.add_axis_placement(position);
    let dir = model.add("IFCDIRECTION", vec![StepValue::reals(&[0.0, 0.0, 1.0])]);
    let solid = model.add(
        "IFCEXTRUDEDAREASOLID",
        vec![
            StepValue::Ref(prof),
            StepValue::Ref(pos),
            StepValue::Ref(dir),
            StepValue::Real(depth),
        ],
    );
    Ok(shape(model, "SweptSolid", solid))
}

/// Faceted brep of triangular faces. Vertices closer than [`BREP_WELD`]
/// are shared. The model is untouched when validation fails.
pub fn mesh_to_brep(model: &mut IfcModel, mesh: &TriMesh) -> Result<u64, GeometryError> {
    mesh.validate()?;
    let welded = mesh.welded(BREP_WELD);
    welded.validate()?;
    if bounds3(&welded.vertices).is_none() {
        return Err(GeometryError::EmptyMesh);
    }
    let mut used = vec![false; welded.vertices.len()];
    for f in &welded.faces {
        for &v in f {
            used[v] = true;
        }
    }
    let mut ids = vec![0u64; welded.vertices.len()];
    for (i, p) in welded.vertices.iter().enumerate() {
        if used[i] {
            ids[i] = model.add_point3(*p);
        }
    }
    let mut faces = Vec::with_capacity(welded.faces.len());
    for f in &welded.faces {
        let lp = model.add("IFCPOLYLOOP", vec![StepValue::refs(f.map(|v| ids[v]))]);
        let bound = model.add("IFCFACEOUTERBOUND", vec![StepValue::Ref(lp), StepValue::Bool(true)]);
        faces.push(model.add("IFCFACE", vec![StepValue::refs([bound])]));
    }
    let shell = model.add("IFCCLOSEDSHELL", vec![StepValue::refs(faces)]);
    let brep = model.add("IFCFACETEDBREP", vec![StepValue::Ref(shell)]);
    Ok(shape(model, "Brep", brep))
}
