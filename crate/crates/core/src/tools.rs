//! Element creation, modification and deletion tools. Each takes validated
//! parameters, writes entities through [`IfcModel`] and returns GUIDs.

use serde::{Deserialize, Serialize};

use crate::geometry::emit::{extrude_profile, mesh_to_brep};
use crate::geometry::read::{axis_length, height, profile_width, wall_axis, world_bounds};
use crate::geometry::{
    roof_solid, stair_mesh, GeometryError, Placement, Point2, Point3, Polygon2, TriMesh,
    FALLBACK_THICKNESS, TOLERANCE,
};
use crate::model::{IfcModel, ModelError, ProductSpec, SessionFlags};
use crate::step::StepValue;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ToolError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("opening out of bounds: {0}")]
    OpeningOutOfBounds(String),
    #[error("walls do not form a closed circuit: {0}")]
    WallsNotClosed(String),
    #[error("class {0} is not allowed for mesh elements")]
    ClassNotAllowed(String),
    #[error("{0} is not a door")]
    NotADoor(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

impl ToolError {
    /// Stable machine-readable code for tool results.
    pub fn code(&self) -> &'static str {
        match self {
            ToolError::InvalidParams(_) => "InvalidParams",
            ToolError::OpeningOutOfBounds(_) => "OpeningOutOfBounds",
            ToolError::WallsNotClosed(_) => "WallsNotClosed",
            ToolError::ClassNotAllowed(_) => "ClassNotAllowed",
            ToolError::NotADoor(_) => "NotADoor",
            ToolError::Model(m) => match m {
                ModelError::UnknownGuid(_) => "UnknownGuid",
                ModelError::UnknownAttribute(_) => "UnknownAttribute",
                ModelError::EmptySpec(_) => "EmptySpec",
                ModelError::CannotDeleteSpatial(_) => "CannotDeleteSpatial",
                ModelError::NotAProduct(_) => "NotAProduct",
                ModelError::UnknownStorey(_) => "UnknownStorey",
                ModelError::NoStorey => "NoStorey",
                ModelError::Invalid(_) => "InvalidModel",
                ModelError::Step(_) => "StepError",
            },
            ToolError::Geometry(g) => match g {
                GeometryError::DegeneratePolygon(_) => "DegeneratePolygon",
                GeometryError::NonPositiveDepth(_) => "NonPositiveDepth",
                GeometryError::EmptyMesh => "EmptyMesh",
                GeometryError::DegenerateFace(_) => "DegenerateFace",
                GeometryError::ZeroLengthAxis => "ZeroLengthAxis",
                GeometryError::SlopeOutOfRange(_) => "SlopeOutOfRange",
                GeometryError::SkeletonFailure(_) => "SkeletonFailure",
                _ => "GeometryError",
            },
        }
    }
}

pub type ToolResult<T> = Result<T, ToolError>;

pub const DOOR_WIDTH: f64 = 0.9;
pub const DOOR_HEIGHT: f64 = 2.1;
pub const WINDOW_WIDTH: f64 = 1.2;
pub const WINDOW_HEIGHT: f64 = 1.4;
pub const WINDOW_SILL: f64 = 0.9;
pub const WALL_HEIGHT: f64 = 3.0;
pub const WALL_THICKNESS: f64 = 0.2;
pub const SLAB_THICKNESS: f64 = 0.2;

/// Classes accepted by [`create_mesh_element`].
pub const MESH_CLASSES: &[&str] = &[
    "IFCBUILDINGELEMENTPROXY",
    "IFCFURNISHINGELEMENT",
    "IFCROOF",
    "IFCSTAIR",
    "IFCWALL",
    "IFCSLAB",
    "IFCCOLUMN",
    "IFCBEAM",
    "IFCMEMBER",
];

fn default_wall_height() -> f64 {
    WALL_HEIGHT
}

fn default_wall_thickness() -> f64 {
    WALL_THICKNESS
}

fn default_slab_thickness() -> f64 {
    SLAB_THICKNESS
}

fn p2(a: [f64; 2]) -> Point2 {
    Point2::new(a[0], a[1])
}

fn positive(name: &str, v: f64) -> ToolResult<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(ToolError::InvalidParams(format!("{name} must be a positive number, got {v}")))
    }
}

fn finite(name: &str, v: f64) -> ToolResult<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(ToolError::InvalidParams(format!("{name} must be finite")))
    }
}

fn storey_frame(model: &IfcModel, storey: u64) -> (Option<u64>, f64) {
    (
        model.object_placement_id(storey),
        model.world_placement(storey).origin.z,
    )
}

fn guid(model: &IfcModel, id: u64) -> String {
    model.guid_of(id).expect("products are rooted")
}

#[derive(Debug, Clone, Deserialize)]
pub struct WallParams {
    pub start: [f64; 2],
    pub end: [f64; 2],
    #[serde(default = "default_wall_height")]
    pub height: f64,
    #[serde(default = "default_wall_thickness")]
    pub thickness: f64,
    #[serde(default)]
    pub storey: Option<String>,
    #[serde(default)]
    pub name: Option<String>,
}

fn check_wall(start: Point2, end: Point2, height: f64, thickness: f64) -> ToolResult<()> {
    positive("height", height)?;
    positive("thickness", thickness)?;
    if !start.is_finite() || !end.is_finite() {
        return Err(ToolError::InvalidParams("wall points must be finite".into()));
    }
    if start.dist(end) < TOLERANCE {
        return Err(ToolError::InvalidParams("wall start and end coincide".into()));
    }
    Ok(())
}

fn build_wall(
    model: &mut IfcModel,
    start: Point2,
    end: Point2,
    height: f64,
    thickness: f64,
    storey: u64,
    name: Option<String>,
) -> ToolResult<u64> {
    let (profile, axis) = crate::geometry::wall_axis_to_profile(start, end, thickness)?;
    let (parent, _) = storey_frame(model, storey);
    let body = extrude_profile(model, &profile, height, &Placement::identity())?;
    Ok(model.add_product(ProductSpec {
        class: "IFCWALL".into(),
        name,
        parent_placement: parent,
        placement: axis,
        representation: Some(body),
        extra: vec![StepValue::enumeration("NOTDEFINED")],
        storey: Some(storey),
    }))
}

pub fn create_wall(model: &mut IfcModel, p: &WallParams) -> ToolResult<String> {
    let (start, end) = (p2(p.start), p2(p.end));
    check_wall(start, end, p.height, p.thickness)?;
    let storey = model.resolve_storey(p.storey.as_deref())?;
    let id = build_wall(model, start, end, p.height, p.thickness, storey, p.name.clone())?;
    Ok(guid(model, id))
}

#[derive(Debug, Clone, Deserialize)]
pub struct WallChainParams {
    pub points: Vec<[f64; 2]>,
    #[serde(default = "default_wall_height")]
    pub height: f64,
    #[serde(default = "default_wall_thickness")]
    pub thickness: f64,
    #[serde(default)]
    pub close: bool,
    #[serde(default)]
    pub storey: Option<String>,
}

/// One wall per segment, plus the closing segment when `close` is set.
pub fn create_wall_chain(model: &mut IfcModel, p: &WallChainParams) -> ToolResult<Vec<String>> {
    if p.points.len() < 2 {
        return Err(ToolError::InvalidParams("a wall chain needs at least 2 points".into()));
    }
    let pts: Vec<Point2> = p.points.iter().map(|a| p2(*a)).collect();
    let mut segments: Vec<(Point2, Point2)> = pts.windows(2).map(|w| (w[0], w[1])).collect();
    if p.close {
        if pts.len() < 3 {
            return Err(ToolError::InvalidParams("a closed chain needs at least 3 points".into()));
        }
        if pts[0].dist(pts[pts.len() - 1]) >= TOLERANCE {
            segments.push((pts[pts.len() - 1], pts[0]));
        }
    }
    for (a, b) in &segments {
        check_wall(*a, *b, p.height, p.thickness)?;
    }
    let storey = model.resolve_storey(p.storey.as_deref())?;
    let mut out = Vec::with_capacity(segments.len());
    for (a, b) in segments {
        let id = build_wall(model, a, b, p.height, p.thickness, storey, None)?;
        out.push(guid(model, id));
    }
    Ok(out)
}

#[derive(Debug, Clone, Deserialize)]
pub struct SlabParams {
    pub outline: Vec<[f64; 2]>,
    #[serde(default = "default_slab_thickness")]
    pub thickness: f64,
    #[serde(default)]
    pub elevation: f64,
    #[serde(default)]
    pub name: Option<String>,
}

/// Slab whose top face sits at `elevation`.
pub fn create_slab(model: &mut IfcModel, p: &SlabParams) -> ToolResult<String> {
    let poly = Polygon2::new(p.outline.iter().map(|a| p2(*a)).collect())?;
    positive("thickness", p.thickness)?;
    finite("elevation", p.elevation)?;
    let storey = model.storey_at_or_below(p.elevation)?;
    let (parent, base) = storey_frame(model, storey);
    let body = extrude_profile(
        model,
        &poly,
        p.thickness,
        &Placement::at(Point3::new(0.0, 0.0, -p.thickness)),
    )?;
    let id = model.add_product(ProductSpec {
        class: "IFCSLAB".into(),
        name: p.name.clone(),
        parent_placement: parent,
        placement: Placement::at(Point3::new(0.0, 0.0, p.elevation - base)),
        representation: Some(body),
        extra: vec![StepValue::enumeration("FLOOR")],
        storey: Some(storey),
    });
    Ok(guid(model, id))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum RoofStyle {
    #[default]
    Hip,
    Gable,
    Flat,
}

#[derive(Debug, Clone, Deserialize)]
pub struct RoofParams {
    pub outline: Vec<[f64; 2]>,
    #[serde(default)]
    pub style: RoofStyle,
    #[serde(default = "default_slope")]
    pub slope_deg: f64,
    #[serde(default)]
    pub base_z: f64,
    #[serde(default)]
    pub name: Option<String>,
}

fn default_slope() -> f64 {
    30.0
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RoofResult {
    pub guid: String,
    pub warnings: Vec<String>,
    pub watertight: bool,
}

/// Gable ends for a gable roof: the shortest edge and the shortest edge
/// not adjacent to it.
pub fn gable_edges(outline: &Polygon2) -> Vec<usize> {
    let v = outline.vertices();
    let n = v.len();
    let len = |i: usize| v[i].dist(v[(i + 1) % n]);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|a, b| len(*a).total_cmp(&len(*b)).then(a.cmp(b)));
    let first = order[0];
    let second = order
        .iter()
        .copied()
        .find(|&j| j != first && j != (first + 1) % n && (j + 1) % n != first);
    std::iter::once(first).chain(second).collect()
}

fn build_roof(
    model: &mut IfcModel,
    poly: &Polygon2,
    style: RoofStyle,
    slope_deg: f64,
    base_z: f64,
    name: Option<String>,
) -> ToolResult<RoofResult> {
    finite("base_z", base_z)?;
    let storey = model.storey_at_or_below(base_z)?;
    let (parent, base) = storey_frame(model, storey);
    let (body, kind, warnings, watertight) = match style {
        RoofStyle::Flat => (
            extrude_profile(model, poly, FALLBACK_THICKNESS, &Placement::identity())?,
            "FLAT_ROOF",
            Vec::new(),
            true,
        ),
        RoofStyle::Hip | RoofStyle::Gable => {
            let gables = if style == RoofStyle::Gable { gable_edges(poly) } else { Vec::new() };
            let solid = roof_solid(poly, slope_deg, 0.0, &gables)?;
            let kind = match (solid.flat_fallback, style) {
                (true, _) => "FLAT_ROOF",
                (false, RoofStyle::Gable) => "GABLE_ROOF",
                _ => "HIP_ROOF",
            };
            let tight = solid.mesh.is_watertight();
            (mesh_to_brep(model, &solid.mesh)?, kind, solid.warnings, tight)
        }
    };
    let id = model.add_product(ProductSpec {
        class: "IFCROOF".into(),
        name,
        parent_placement: parent,
        placement: Placement::at(Point3::new(0.0, 0.0, base_z - base)),
        representation: Some(body),
        extra: vec![StepValue::enumeration(kind)],
        storey: Some(storey),
    });
    Ok(RoofResult {
        guid: guid(model, id),
        warnings,
        watertight,
    })
}

pub fn create_roof(model: &mut IfcModel, p: &RoofParams) -> ToolResult<RoofResult> {
    let poly = Polygon2::new(p.outline.iter().map(|a| p2(*a)).collect())?;
    if p.style != RoofStyle::Flat && !(5.0..=85.0).contains(&p.slope_deg) {
        return Err(GeometryError::SlopeOutOfRange(p.slope_deg).into());
    }
    build_roof(model, &poly, p.style, p.slope_deg, p.base_z, p.name.clone())
}

#[derive(Debug, Clone, Deserialize)]
pub struct RoofOverWallsParams {
    pub wall_guids: Vec<String>,
    #[serde(default)]
    pub style: RoofStyle,
    #[serde(default = "default_slope")]
    pub slope_deg: f64,
    #[serde(default)]
    pub name: Option<String>,
}

/// Chains wall axes end to end into a closed outline.
pub fn outline_from_walls(model: &IfcModel, guids: &[String]) -> ToolResult<(Polygon2, f64)> {
    if guids.len() < 3 {
        return Err(ToolError::WallsNotClosed("at least 3 walls are required".into()));
    }
    let mut axes = Vec::with_capacity(guids.len());
    let mut top = f64::NEG_INFINITY;
    for g in guids {
        let id = model.id_of(g)?;
        if !is_wall(model, id) {
            return Err(ToolError::InvalidParams(format!("{g} is not a wall")));
        }
        let axis = wall_axis(model, id)
            .ok_or_else(|| ToolError::InvalidParams(format!("wall {g} has no extruded body")))?;
        let (_, max) = world_bounds(model, id)
            .ok_or_else(|| ToolError::InvalidParams(format!("wall {g} has no body")))?;
        top = top.max(max.z);
        axes.push(axis);
    }
    let mut used = vec![false; axes.len()];
    used[0] = true;
    let start = axes[0].0;
    let mut outline = vec![axes[0].0];
    let mut cur = axes[0].1;
    for _ in 1..axes.len() {
        let next = (0..axes.len()).find_map(|i| {
            if used[i] {
                None
            } else if axes[i].0.dist(cur) < TOLERANCE {
                Some((i, axes[i].1))
            } else if axes[i].1.dist(cur) < TOLERANCE {
                Some((i, axes[i].0))
            } else {
                None
            }
        });
        let Some((i, far)) = next else {
            return Err(ToolError::WallsNotClosed(format!(
                "no wall continues from ({:.3}, {:.3})",
                cur.x, cur.y
            )));
        };
        used[i] = true;
        outline.push(cur);
        cur = far;
    }
    if cur.dist(start) >= TOLERANCE {
        return Err(ToolError::WallsNotClosed("the last wall does not return to the first".into()));
    }
    Ok((Polygon2::new(outline)?, top))
}

pub fn create_roof_over_walls(model: &mut IfcModel, p: &RoofOverWallsParams) -> ToolResult<RoofResult> {
    let (poly, top) = outline_from_walls(model, &p.wall_guids)?;
    if p.style != RoofStyle::Flat && !(5.0..=85.0).contains(&p.slope_deg) {
        return Err(GeometryError::SlopeOutOfRange(p.slope_deg).into());
    }
    build_roof(model, &poly, p.style, p.slope_deg, top, p.name.clone())
}

#[derive(Debug, Clone, Deserialize, Default)]
pub struct OpeningParams {
    #[serde(default)]
    pub wall_guid: Option<String>,
    /// Distance from the wall start to the opening centre.
    #[serde(default)]
    pub position_along_axis: Option<f64>,
    /// World point projected onto the nearest wall axis.
    #[serde(default)]
    pub position: Option<[f64; 3]>,
    #[serde(default)]
    pub sill_height: Option<f64>,
    #[serde(default)]
    pub width: Option<f64>,
    #[serde(default)]
    pub height: Option<f64>,
    #[serde(default)]
    pub name: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OpeningResult {
    pub guid: String,
    pub opening_guid: String,
    pub wall_guid: String,
    pub position_along_axis: f64,
}

pub fn is_wall(model: &IfcModel, id: u64) -> bool {
    matches!(model.class_of(id), Some("IFCWALL" | "IFCWALLSTANDARDCASE"))
}

fn project_on_axis(a: Point2, b: Point2, p: Point2) -> (f64, f64) {
    let d = b.sub(a);
    let len = d.norm();
    let t = (p.sub(a).dot(d) / (len * len)).clamp(0.0, 1.0);
    let foot = a.add(d.scale(t));
    (t * len, foot.dist(p))
}

fn resolve_host(model: &IfcModel, p: &OpeningParams) -> ToolResult<(u64, f64)> {
    let along_from = |wall: u64| -> ToolResult<f64> {
        match (p.position_along_axis, p.position) {
            (Some(s), _) => {
                finite("position_along_axis", s)?;
                Ok(s)
            }
            (None, Some(pos)) => {
                let (a, b) = wall_axis(model, wall)
                    .ok_or_else(|| ToolError::InvalidParams("host wall has no extruded body".into()))?;
                Ok(project_on_axis(a, b, Point2::new(pos[0], pos[1])).0)
            }
            (None, None) => Err(ToolError::InvalidParams(
                "either position_along_axis or position is required".into(),
            )),
        }
    };
    match &p.wall_guid {
        Some(g) => {
            let id = model.id_of(g)?;
            if !is_wall(model, id) {
                return Err(ToolError::InvalidParams(format!("host {g} is not a wall")));
            }
            Ok((id, along_from(id)?))
        }
        None => {
            let pos = p.position.ok_or_else(|| {
                ToolError::InvalidParams("wall_guid or position is required".into())
            })?;
            let target = Point2::new(pos[0], pos[1]);
            let mut best: Option<(f64, u64, f64)> = None;
            for id in model.products() {
                if !is_wall(model, id) {
                    continue;
                }
                let Some((a, b)) = wall_axis(model, id) else { continue };
                let (along, dist) = project_on_axis(a, b, target);
                if best.is_none_or(|(d, _, _)| dist < d - 1e-12) {
                    best = Some((dist, id, along));
                }
            }
            let (_, id, along) = best.ok_or_else(|| ToolError::InvalidParams("model has no walls".into()))?;
            Ok((id, along))
        }
    }
}

fn create_opening(model: &mut IfcModel, p: &OpeningParams, class: &str) -> ToolResult<OpeningResult> {
    let is_door = class == "IFCDOOR";
    let width = p.width.unwrap_or(if is_door { DOOR_WIDTH } else { WINDOW_WIDTH });
    let h = p.height.unwrap_or(if is_door { DOOR_HEIGHT } else { WINDOW_HEIGHT });
    let sill = if is_door { 0.0 } else { p.sill_height.unwrap_or(WINDOW_SILL) };
    positive("width", width)?;
    positive("height", h)?;
    finite("sill_height", sill)?;
    if sill < 0.0 {
        return Err(ToolError::InvalidParams("sill_height must not be negative".into()));
    }
    let (wall, centre) = resolve_host(model, p)?;
    let length = axis_length(model, wall)
        .ok_or_else(|| ToolError::InvalidParams("host wall has no extruded body".into()))?;
    let wall_height = height(model, wall).unwrap_or(0.0);
    let thickness = profile_width(model, wall).unwrap_or(0.0);
    let (lo, hi) = (centre - width / 2.0, centre + width / 2.0);
    if lo < -TOLERANCE || hi > length + TOLERANCE {
        return Err(ToolError::OpeningOutOfBounds(format!(
            "opening spans {lo:.3}..{hi:.3} m but the wall is {length:.3} m long"
        )));
    }
    if sill + h > wall_height + TOLERANCE {
        return Err(ToolError::OpeningOutOfBounds(format!(
            "opening top at {:.3} m exceeds wall height {wall_height:.3} m",
            sill + h
        )));
    }
    let wall_pl = model.object_placement_id(wall);
    let local = Placement::at(Point3::new(lo, 0.0, sill));
    let box_profile = Polygon2::rectangle(
        Point2::new(0.0, -thickness / 2.0),
        Point2::new(width, thickness / 2.0),
    )?;
    let opening_body = extrude_profile(model, &box_profile, h, &Placement::identity())?;
    let opening = model.add_product(ProductSpec {
        class: "IFCOPENINGELEMENT".into(),
        name: None,
        parent_placement: wall_pl,
        placement: local,
        representation: Some(opening_body),
        extra: vec![StepValue::enumeration("OPENING")],
        storey: None,
    });
    let g = model.fresh_guid();
    model.add(
        "IFCRELVOIDSELEMENT",
        vec![
            g,
            StepValue::Unset,
            StepValue::Unset,
            StepValue::Unset,
            StepValue::Ref(wall),
            StepValue::Ref(opening),
        ],
    );
    let filler_body = extrude_profile(model, &box_profile, h, &Placement::identity())?;
    let storey = model.containing_storey(wall);
    let extra = vec![
        StepValue::Real(h),
        StepValue::Real(width),
        StepValue::enumeration(if is_door { "DOOR" } else { "WINDOW" }),
        StepValue::Unset,
        StepValue::Unset,
    ];
    let filler = model.add_product(ProductSpec {
        class: class.into(),
        name: p.name.clone(),
        parent_placement: wall_pl,
        placement: local,
        representation: Some(filler_body),
        extra,
        storey,
    });
    let g = model.fresh_guid();
    model.add(
        "IFCRELFILLSELEMENT",
        vec![
            g,
            StepValue::Unset,
            StepValue::Unset,
            StepValue::Unset,
            StepValue::Ref(opening),
            StepValue::Ref(filler),
        ],
    );
    Ok(OpeningResult {
        guid: guid(model, filler),
        opening_guid: guid(model, opening),
        wall_guid: guid(model, wall),
        position_along_axis: centre,
    })
}

pub fn create_door(model: &mut IfcModel, p: &OpeningParams) -> ToolResult<OpeningResult> {
    create_opening(model, p, "IFCDOOR")
}

pub fn create_window(model: &mut IfcModel, p: &OpeningParams) -> ToolResult<OpeningResult> {
    create_opening(model, p, "IFCWINDOW")
}

#[derive(Debug, Clone, Deserialize)]
pub struct StairParams {
    #[serde(default)]
    pub origin: [f64; 3],
    #[serde(default)]
    pub direction_deg: f64,
    pub total_rise: f64,
    pub total_run: f64,
    pub step_count: usize,
    #[serde(default = "default_stair_width")]
    pub width: f64,
    #[serde(default)]
    pub name: Option<String>,
}

fn default_stair_width() -> f64 {
    1.0
}

pub fn create_stairs(model: &mut IfcModel, p: &StairParams) -> ToolResult<String> {
    for (n, v) in [("origin", p.origin[0]), ("origin", p.origin[1]), ("origin", p.origin[2]), ("direction_deg", p.direction_deg)] {
        finite(n, v)?;
    }
    let mesh = stair_mesh(p.total_rise, p.total_run, p.step_count, p.width)
        .map_err(|e| ToolError::InvalidParams(e.to_string()))?;
    let storey = model.storey_at_or_below(p.origin[2])?;
    let (parent, base) = storey_frame(model, storey);
    let a = p.direction_deg.to_radians();
    let placement = Placement::horizontal(
        Point3::new(p.origin[0], p.origin[1], p.origin[2] - base),
        Point2::new(a.cos(), a.sin()),
    )?;
    let body = mesh_to_brep(model, &mesh)?;
    let id = model.add_product(ProductSpec {
        class: "IFCSTAIR".into(),
        name: p.name.clone(),
        parent_placement: parent,
        placement,
        representation: Some(body),
        extra: vec![StepValue::enumeration("STRAIGHT_RUN_STAIR")],
        storey: Some(storey),
    });
    Ok(guid(model, id))
}

#[derive(Debug, Clone, Deserialize)]
pub struct MeshParams {
    pub ifc_class: String,
    pub vertices: Vec<[f64; 3]>,
    pub faces: Vec<[usize; 3]>,
    pub name: String,
    #[serde(default)]
    pub storey: Option<String>,
}

/// Product with a faceted-brep body. Vertices are world coordinates.
pub fn create_mesh_element(model: &mut IfcModel, p: &MeshParams) -> ToolResult<String> {
    let class = p.ifc_class.to_ascii_uppercase();
    if !MESH_CLASSES.contains(&class.as_str()) {
        return Err(ToolError::ClassNotAllowed(p.ifc_class.clone()));
    }
    let storey = model.resolve_storey(p.storey.as_deref())?;
    let (parent, base) = storey_frame(model, storey);
    let mesh = TriMesh::new(
        p.vertices.iter().map(|v| Point3::new(v[0], v[1], v[2] - base)).collect(),
        p.faces.clone(),
    )?;
    let body = mesh_to_brep(model, &mesh)?;
    let extra = if class == "IFCFURNISHINGELEMENT" {
        vec![]
    } else {
        vec![StepValue::enumeration("NOTDEFINED")]
    };
    let id = model.add_product(ProductSpec {
        class,
        name: Some(p.name.clone()),
        parent_placement: parent,
        placement: Placement::identity(),
        representation: Some(body),
        extra,
        storey: Some(storey),
    });
    Ok(guid(model, id))
}

/// Wall type object; hidden in the session like other type objects.
pub fn create_wall_type(model: &mut IfcModel, name: &str) -> ToolResult<String> {
    if name.trim().is_empty() {
        return Err(ToolError::InvalidParams("name must not be empty".into()));
    }
    let g = model.fresh_guid();
    let id = model.add(
        "IFCWALLTYPE",
        vec![
            g,
            StepValue::Unset,
            StepValue::str(name),
            StepValue::Unset,
            StepValue::Unset,
            StepValue::Unset,
            StepValue::Unset,
            StepValue::Unset,
            StepValue::Unset,
            StepValue::enumeration("STANDARD"),
        ],
    );
    model.set_flags(id, SessionFlags { visible: false, selected: false });
    Ok(guid(model, id))
}

pub fn create_storey(model: &mut IfcModel, name: &str, elevation: f64) -> ToolResult<String> {
    finite("elevation", elevation)?;
    if name.trim().is_empty() {
        return Err(ToolError::InvalidParams("name must not be empty".into()));
    }
    let id = model.add_storey(name, elevation)?;
    Ok(guid(model, id))
}

pub fn set_session_flags(
    model: &mut IfcModel,
    guid: &str,
    visible: Option<bool>,
    selected: Option<bool>,
) -> ToolResult<SessionFlags> {
    let id = model.id_of(guid)?;
    let mut f = model.flags(id);
    if let Some(v) = visible {
        f.visible = v;
    }
    if let Some(s) = selected {
        f.selected = s;
    }
    model.set_flags(id, f);
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::read::{profile_area, world_mesh};

    fn square_walls(m: &mut IfcModel) -> Vec<String> {
        create_wall_chain(
            m,
            &WallChainParams {
                points: vec![[0., 0.], [10., 0.], [10., 10.], [0., 10.]],
                height: 3.0,
                thickness: 0.25,
                close: true,
                storey: None,
            },
        )
        .unwrap()
    }

    fn l_outline() -> Vec<[f64; 2]> {
        vec![[0., 0.], [10., 0.], [10., 5.], [5., 5.], [5., 10.], [0., 10.]]
    }

    #[test]
    fn wall_location_and_bounds() {
        let mut m = IfcModel::new_seeded("P", 1);
        let g = create_wall(
            &mut m,
            &WallParams {
                start: [0., 0.],
                end: [10., 0.],
                height: 3.5,
                thickness: 0.25,
                storey: None,
                name: None,
            },
        )
        .unwrap();
        let id = m.id_of(&g).unwrap();
        assert_eq!(m.world_placement(id).origin, Point3::new(0., 0., 0.));
        let (min, max) = world_bounds(&m, id).unwrap();
        let ext = max.sub(min);
        assert!((ext.x - 10.0).abs() < 1e-12 && (ext.y - 0.25).abs() < 1e-12 && (ext.z - 3.5).abs() < 1e-12);
        let bad = WallParams { start: [0., 0.], end: [1., 0.], height: 0.0, thickness: 0.2, storey: None, name: None };
        assert!(matches!(create_wall(&mut m, &bad), Err(ToolError::InvalidParams(_))));
    }

    #[test]
    fn chain_lengths_match_perimeter() {
        let mut m = IfcModel::new_seeded("P", 1);
        let walls = square_walls(&mut m);
        assert_eq!(walls.len(), 4);
        let total: f64 = walls.iter().map(|g| axis_length(&m, m.id_of(g).unwrap()).unwrap()).sum();
        assert_eq!(total, 40.0);
        let origins: Vec<Point3> = walls.iter().map(|g| m.world_placement(m.id_of(g).unwrap()).origin).collect();
        assert_eq!(origins[1], Point3::new(10., 0., 0.));
        assert!((origins[2].x - 10.0).abs() < 1e-12 && (origins[2].y - 10.0).abs() < 1e-12);
        let two = WallChainParams { points: vec![[0., 0.], [3., 0.]], height: 3.0, thickness: 0.2, close: false, storey: None };
        assert_eq!(create_wall_chain(&mut m, &two).unwrap().len(), 1);
    }

    #[test]
    fn slabs_sit_below_elevation() {
        let mut m = IfcModel::new_seeded("P", 1);
        let g = create_slab(&mut m, &SlabParams { outline: l_outline(), thickness: 0.25, elevation: 3.5, name: None }).unwrap();
        let id = m.id_of(&g).unwrap();
        assert_eq!(profile_area(&m, id), Some(75.0));
        let (min, max) = world_bounds(&m, id).unwrap();
        assert!((max.z - 3.5).abs() < 1e-12 && (min.z - 3.25).abs() < 1e-12);
        let bad = SlabParams { outline: vec![[0., 0.], [1., 0.]], thickness: 0.2, elevation: 0.0, name: None };
        assert!(matches!(create_slab(&mut m, &bad), Err(ToolError::Geometry(GeometryError::DegeneratePolygon(_)))));
    }

    #[test]
    fn roofs() {
        let mut m = IfcModel::new_seeded("P", 1);
        let r = create_roof(
            &mut m,
            &RoofParams { outline: l_outline(), style: RoofStyle::Hip, slope_deg: 30.0, base_z: 7.0, name: None },
        )
        .unwrap();
        assert!(r.watertight && r.warnings.is_empty());
        let mesh = world_mesh(&m, m.id_of(&r.guid).unwrap()).unwrap();
        let (min, _) = crate::geometry::bounds3(&mesh.vertices).unwrap();
        assert!((min.z - 7.0).abs() < 1e-12);
        let rect = vec![[0., 0.], [10., 0.], [10., 8.], [0., 8.]];
        let g = create_roof(&mut m, &RoofParams { outline: rect.clone(), style: RoofStyle::Gable, slope_deg: 45.0, base_z: 0.0, name: None }).unwrap();
        assert!(g.watertight);
        let f = create_roof(&mut m, &RoofParams { outline: rect, style: RoofStyle::Flat, slope_deg: 0.0, base_z: 3.0, name: None }).unwrap();
        let mesh = world_mesh(&m, m.id_of(&f.guid).unwrap()).unwrap();
        // oracle: 10 x 8 x 0.2 prism
        assert!((mesh.signed_volume() - 16.0).abs() < 1e-9);
    }

    #[test]
    fn gable_edges_pick_short_sides() {
        let rect = Polygon2::rectangle(Point2::new(0., 0.), Point2::new(10., 8.)).unwrap();
        let mut e = gable_edges(&rect);
        e.sort();
        assert_eq!(e, vec![1, 3]);
    }

    #[test]
    fn roof_over_walls() {
        let mut m = IfcModel::new_seeded("P", 1);
        let walls = square_walls(&mut m);
        let (poly, top) = outline_from_walls(&m, &walls).unwrap();
        let square = Polygon2::rectangle(Point2::new(0., 0.), Point2::new(10., 10.)).unwrap();
        assert!(poly.same_outline(&square));
        assert_eq!(top, 3.0);
        let u = walls[..3].to_vec();
        assert!(matches!(outline_from_walls(&m, &u), Err(ToolError::WallsNotClosed(_))));
        let tall = create_wall(&mut m, &WallParams { start: [20., 0.], end: [30., 0.], height: 5.0, thickness: 0.2, storey: None, name: None }).unwrap();
        let b = create_wall(&mut m, &WallParams { start: [30., 0.], end: [30., 10.], height: 3.0, thickness: 0.2, storey: None, name: None }).unwrap();
        let c = create_wall(&mut m, &WallParams { start: [30., 10.], end: [20., 0.], height: 3.0, thickness: 0.2, storey: None, name: None }).unwrap();
        let (_, top) = outline_from_walls(&m, &[tall, b, c]).unwrap();
        assert_eq!(top, 5.0);
        let r = create_roof_over_walls(&mut m, &RoofOverWallsParams { wall_guids: walls, style: RoofStyle::Hip, slope_deg: 45.0, name: None }).unwrap();
        let mesh = world_mesh(&m, m.id_of(&r.guid).unwrap()).unwrap();
        let (_, max) = crate::geometry::bounds3(&mesh.vertices).unwrap();
        assert!((max.z - 8.0).abs() < 1e-9);
    }

    #[test]
    fn doors_and_windows() {
        let mut m = IfcModel::new_seeded("P", 1);
        let wall = create_wall(&mut m, &WallParams { start: [0., 0.], end: [10., 0.], height: 3.5, thickness: 0.25, storey: None, name: None }).unwrap();
        let d = create_door(&mut m, &OpeningParams { position: Some([2., 0., 0.]), ..Default::default() }).unwrap();
        assert_eq!(d.wall_guid, wall);
        assert_eq!(d.position_along_axis, 2.0);
        let wid = m.id_of(&wall).unwrap();
        assert_eq!(m.openings_of(wid).len(), 1);
        let out = OpeningParams { wall_guid: Some(wall.clone()), position_along_axis: Some(9.9), ..Default::default() };
        assert!(matches!(create_door(&mut m, &out), Err(ToolError::OpeningOutOfBounds(_))));
        let w = OpeningParams { wall_guid: Some(wall.clone()), position_along_axis: Some(6.0), ..Default::default() };
        create_window(&mut m, &w).unwrap();
        let tall = OpeningParams { wall_guid: Some(wall.clone()), position_along_axis: Some(8.0), sill_height: Some(2.5), ..Default::default() };
        assert!(matches!(create_window(&mut m, &tall), Err(ToolError::OpeningOutOfBounds(_))));
        // opening box inside the host wall's box
        let (wmin, wmax) = world_bounds(&m, wid).unwrap();
        let (omin, omax) = world_bounds(&m, m.id_of(&d.opening_guid).unwrap()).unwrap();
        for (lo, hi, a, b) in [(wmin.x, wmax.x, omin.x, omax.x), (wmin.y, wmax.y, omin.y, omax.y), (wmin.z, wmax.z, omin.z, omax.z)] {
            assert!(a >= lo - 1e-9 && b <= hi + 1e-9);
        }
        // deleting the door removes its opening
        m.delete_element(&d.guid).unwrap();
        assert!(m.id_of(&d.opening_guid).is_err());
        assert_eq!(m.openings_of(wid).len(), 1);
        m.delete_element(&wall).unwrap();
        assert!(m.products().is_empty());
        m.check_integrity().unwrap();
    }

    #[test]
    fn stairs_and_meshes() {
        let mut m = IfcModel::new_seeded("P", 1);
        let s = create_stairs(&mut m, &StairParams { origin: [0., 0., 0.], direction_deg: 90.0, total_rise: 3.0, total_run: 4.0, step_count: 15, width: 1.0, name: None }).unwrap();
        let mesh = world_mesh(&m, m.id_of(&s).unwrap()).unwrap();
        assert!(mesh.welded(1e-9).is_watertight());
        let (min, max) = crate::geometry::bounds3(&mesh.vertices).unwrap();
        assert!((max.y - min.y - 4.0).abs() < 1e-9 && (max.z - 3.0).abs() < 1e-9);
        let one = StairParams { origin: [0., 0., 0.], direction_deg: 0.0, total_rise: 3.0, total_run: 4.0, step_count: 1, width: 1.0, name: None };
        assert!(matches!(create_stairs(&mut m, &one), Err(ToolError::InvalidParams(_))));
        let tet = MeshParams {
            ifc_class: "IfcFurnishingElement".into(),
            vertices: vec![[0., 0., 0.], [1., 0., 0.], [0., 1., 0.], [0., 0., 1.]],
            faces: vec![[0, 2, 1], [0, 1, 3], [1, 2, 3], [0, 3, 2]],
            name: "Table".into(),
            storey: None,
        };
        create_mesh_element(&mut m, &tet).unwrap();
        let bad = MeshParams { ifc_class: "IFCPROJECT".into(), ..tet };
        assert!(matches!(create_mesh_element(&mut m, &bad), Err(ToolError::ClassNotAllowed(_))));
        m.check_integrity().unwrap();
    }
}
