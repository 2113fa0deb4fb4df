//! Orthographic SVG views: a horizontal plan section and four elevations.
//! 1 m maps to 50 px, y grows downwards, and the view box covers the drawn
//! content plus a 1 m margin.

use std::fmt::Write as _;

use crate::geometry::read::{product_bodies, world_bounds, world_mesh, Body};
use crate::geometry::{Point2, Point3};
use crate::model::{IfcModel, ModelError};

pub const PX_PER_M: f64 = 50.0;
pub const MARGIN_M: f64 = 1.0;
pub const DEFAULT_CUT_HEIGHT: f64 = 1.2;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SnapshotError {
    #[error("the model has no products to draw")]
    EmptyModel,
    #[error("unknown view {0}; expected north, south, east or west")]
    UnknownView(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum View {
    North,
    South,
    East,
    West,
}

impl std::str::FromStr for View {
    type Err = SnapshotError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "north" => Ok(View::North),
            "south" => Ok(View::South),
            "east" => Ok(View::East),
            "west" => Ok(View::West),
            _ => Err(SnapshotError::UnknownView(s.to_string())),
        }
    }
}

impl View {
    /// (horizontal screen coordinate, distance from the viewer) of a world point.
    fn project(self, p: Point3) -> (f64, f64) {
        match self {
            View::South => (p.x, p.y),
            View::North => (-p.x, -p.y),
            View::East => (p.y, -p.x),
            View::West => (-p.y, p.x),
        }
    }

    fn name(self) -> &'static str {
        match self {
            View::North => "north",
            View::South => "south",
            View::East => "east",
            View::West => "west",
        }
    }
}

/// Number with at most three decimals and no trailing zeros.
fn num(x: f64) -> String {
    let s = format!("{:.3}", x);
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.to_string()
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Maps metres to view-box pixels once the content extent is known.
struct Frame {
    min: Point2,
    max: Point2,
}

impl Frame {
    fn new(points: &[Point2]) -> Self {
        if points.is_empty() {
            return Frame {
                min: Point2::default(),
                max: Point2::default(),
            };
        }
        let mut min = points[0];
        let mut max = points[0];
        for p in points {
            min = Point2::new(min.x.min(p.x), min.y.min(p.y));
            max = Point2::new(max.x.max(p.x), max.y.max(p.y));
        }
        Frame { min, max }
    }

    fn px(&self, p: Point2) -> (f64, f64) {
        (
            (p.x - self.min.x + MARGIN_M) * PX_PER_M,
            (self.max.y + MARGIN_M - p.y) * PX_PER_M,
        )
    }

    fn size(&self) -> (f64, f64) {
        (
            (self.max.x - self.min.x + 2.0 * MARGIN_M) * PX_PER_M,
            (self.max.y - self.min.y + 2.0 * MARGIN_M) * PX_PER_M,
        )
    }

    fn path(&self, rings: &[Vec<Point2>]) -> String {
        let mut d = String::new();
        for ring in rings {
            for (i, p) in ring.iter().enumerate() {
                let (x, y) = self.px(*p);
                let _ = write!(d, "{}{} {} ", if i == 0 { "M" } else { "L" }, num(x), num(y));
            }
            d.push_str("Z ");
        }
        d.trim_end().to_string()
    }

    fn open(&self, title: &str) -> String {
        let (w, h) = self.size();
        format!(
            "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n<title>{}</title>\n",
            escape(title),
            w = num(w),
            h = num(h),
        )
    }
}

/// Andrew's monotone chain; counter-clockwise, without collinear points.
pub fn convex_hull(points: &[Point2]) -> Vec<Point2> {
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    pts.dedup_by(|a, b| a.dist(*b) < 1e-12);
    if pts.len() < 3 {
        return pts;
    }
    let turn = |o: Point2, a: Point2, b: Point2| a.sub(o).cross(b.sub(o));
    let mut hull: Vec<Point2> = Vec::with_capacity(pts.len() * 2);
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &Point2>> = if pass == 0 {
            Box::new(pts.iter())
        } else {
            Box::new(pts.iter().rev())
        };
        for &p in iter {
            while hull.len() >= start + 2 && turn(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 1e-12 {
                hull.pop();
            }
            hull.push(p);
        }
        hull.pop();
    }
    hull
}

/// Outline of the first extrusion's profile in world XY, if the product has one.
fn footprint(model: &IfcModel, id: u64) -> Option<Vec<Point2>> {
    let pl = model.world_placement(id);
    product_bodies(model, id).into_iter().find_map(|b| match b {
        Body::Extrusion { profile, position, .. } => Some(
            profile
                .vertices()
                .iter()
                .map(|v| pl.to_world(position.to_world(Point3::new(v.x, v.y, 0.0))).xy())
                .collect(),
        ),
        Body::Mesh(_) => None,
    })
}

fn axis_aligned(ring: &[Point2]) -> bool {
    ring.len() == 4
        && (0..4).all(|i| {
            let d = ring[(i + 1) % 4].sub(ring[i]);
            d.x.abs() < 1e-9 || d.y.abs() < 1e-9
        })
}

fn drawable(model: &IfcModel) -> Vec<u64> {
    model
        .products()
        .into_iter()
        .filter(|&id| world_bounds(model, id).is_some())
        .collect()
}

/// Products whose vertical extent contains `z`.
pub fn cut_products(model: &IfcModel, z: f64) -> Vec<u64> {
    drawable(model)
        .into_iter()
        .filter(|&id| {
            let (lo, hi) = world_bounds(model, id).expect("drawable products have bounds");
            lo.z <= z + 1e-9 && hi.z >= z - 1e-9
        })
        .collect()
}

enum PlanItem {
    Slab(u64, Vec<Point2>),
    Wall(u64, Vec<Point2>),
    Gap(u64, Vec<Point2>),
    Door(u64, [Point2; 3]),
    Window(u64, [Point2; 4]),
    Other(u64, Vec<Point2>),
}

/// Plan section of a storey at `elevation + cut_height`. Slabs whose top
/// lies between the storey elevation and the cut are drawn as outlines.
/// The frame fits wall axes, slab outlines and other footprints.
pub fn render_plan(model: &IfcModel, storey: Option<&str>, cut_height: f64) -> Result<String, SnapshotError> {
    if drawable(model).is_empty() {
        return Err(SnapshotError::EmptyModel);
    }
    let storey = model.resolve_storey(storey)?;
    let base = model.storey_elevation(storey);
    let cut = base + cut_height;
    let mut items = Vec::new();
    let mut extent: Vec<Point2> = Vec::new();
    let cut_ids = cut_products(model, cut);
    for id in drawable(model) {
        let class = model.class_of(id).unwrap_or("");
        let (_, hi) = world_bounds(model, id).expect("drawable products have bounds");
        let is_cut = cut_ids.contains(&id);
        let pl = model.world_placement(id);
        match class {
            "IFCSLAB" if !is_cut && hi.z >= base - 1e-9 && hi.z <= cut => {
                if let Some(ring) = footprint(model, id) {
                    extent.extend(&ring);
                    items.push(PlanItem::Slab(id, ring));
                }
            }
            _ if !is_cut => {}
            "IFCWALL" | "IFCWALLSTANDARDCASE" => {
                let Some(ring) = footprint(model, id) else { continue };
                if let Some((a, b)) = crate::geometry::read::wall_axis(model, id) {
                    extent.extend([a, b]);
                }
                items.push(PlanItem::Wall(id, ring));
            }
            "IFCOPENINGELEMENT" => {
                if let Some(ring) = footprint(model, id) {
                    items.push(PlanItem::Gap(id, ring));
                }
            }
            "IFCDOOR" | "IFCWINDOW" => {
                let Some(ring) = footprint(model, id) else { continue };
                let (min, max) = crate::geometry::bounds2(
                    &ring
                        .iter()
                        .map(|p| {
                            let l = p.sub(pl.origin.xy());
                            Point2::new(l.dot(pl.x_axis.xy()), l.dot(pl.y_axis().xy()))
                        })
                        .collect::<Vec<_>>(),
                );
                let w = |x: f64, y: f64| pl.to_world(Point3::new(x, y, 0.0)).xy();
                if class == "IFCDOOR" {
                    let width = max.x - min.x;
                    let hinge = w(min.x, max.y);
                    items.push(PlanItem::Door(id, [hinge, w(min.x, max.y + width), w(max.x, max.y)]));
                } else {
                    let mid = (min.y + max.y) / 2.0;
                    let q = (max.y - min.y) / 4.0;
                    items.push(PlanItem::Window(
                        id,
                        [w(min.x, mid - q), w(max.x, mid - q), w(min.x, mid + q), w(max.x, mid + q)],
                    ));
                }
            }
            _ => {
                let hull = match footprint(model, id) {
                    Some(r) => r,
                    None => {
                        let mesh = world_mesh(model, id).expect("drawable products have a mesh");
                        convex_hull(&mesh.vertices.iter().map(|p| p.xy()).collect::<Vec<_>>())
                    }
                };
                if hull.len() >= 3 {
                    extent.extend(&hull);
                    items.push(PlanItem::Other(id, hull));
                }
            }
        }
    }
    let frame = Frame::new(&extent);
    let title = format!(
        "Plan {} cut {} m",
        model.name_of(storey).unwrap_or_default(),
        num(cut_height)
    );
    let mut svg = frame.open(&title);
    let guid = |id: u64| escape(&model.guid_of(id).unwrap_or_default());
    // slabs, walls, gaps, then glyphs and other elements on top
    let rank = |i: &PlanItem| match i {
        PlanItem::Slab(..) => 0,
        PlanItem::Wall(..) => 1,
        PlanItem::Gap(..) => 2,
        _ => 3,
    };
    items.sort_by_key(rank);
    for item in &items {
        match item {
            PlanItem::Slab(id, ring) => {
                let _ = writeln!(
                    svg,
                    "<path id=\"{}\" class=\"slab\" d=\"{}\" fill=\"none\" stroke=\"#888888\" stroke-width=\"2\"/>",
                    guid(*id),
                    frame.path(std::slice::from_ref(ring))
                );
            }
            PlanItem::Wall(id, ring) if axis_aligned(ring) => {
                let (min, max) = crate::geometry::bounds2(ring);
                let (x0, y0) = frame.px(Point2::new(min.x, max.y));
                let (x1, y1) = frame.px(Point2::new(max.x, min.y));
                let _ = writeln!(
                    svg,
                    "<rect id=\"{}\" class=\"wall\" x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"#444444\"/>",
                    guid(*id),
                    num(x0),
                    num(y0),
                    num(x1 - x0),
                    num(y1 - y0)
                );
            }
            PlanItem::Wall(id, ring) => {
                // rotated rectangle: centre, edge lengths and angle in screen space
                let (a, b, d) = (ring[0], ring[1], ring[3]);
                let centre = ring.iter().fold(Point2::default(), |s, p| s.add(*p)).scale(0.25);
                let (cx, cy) = frame.px(centre);
                let (len, thick) = (b.dist(a) * PX_PER_M, d.dist(a) * PX_PER_M);
                let dir = b.sub(a);
                let angle = (-dir.y).atan2(dir.x).to_degrees();
                let _ = writeln!(
                    svg,
                    "<rect id=\"{}\" class=\"wall\" x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" transform=\"rotate({} {} {})\" fill=\"#444444\"/>",
                    guid(*id),
                    num(cx - len / 2.0),
                    num(cy - thick / 2.0),
                    num(len),
                    num(thick),
                    num(angle),
                    num(cx),
                    num(cy)
                );
            }
            PlanItem::Gap(id, ring) => {
                let _ = writeln!(
                    svg,
                    "<path id=\"{}\" class=\"opening\" d=\"{}\" fill=\"#ffffff\"/>",
                    guid(*id),
                    frame.path(std::slice::from_ref(ring))
                );
            }
            PlanItem::Door(id, [hinge, leaf, close]) => {
                let (hx, hy) = frame.px(*hinge);
                let (lx, ly) = frame.px(*leaf);
                let (cx, cy) = frame.px(*close);
                let r = num(hinge.dist(*leaf) * PX_PER_M);
                // y points down on screen, so a positive cross product turns clockwise
                let sweep = u8::from((lx - hx) * (cy - hy) - (ly - hy) * (cx - hx) > 0.0);
                let _ = writeln!(
                    svg,
                    "<g id=\"{}\" class=\"door\" fill=\"none\" stroke=\"#000000\"><line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\"/><path d=\"M{} {} A{r} {r} 0 0 {sweep} {} {}\"/></g>",
                    guid(*id),
                    num(hx),
                    num(hy),
                    num(lx),
                    num(ly),
                    num(lx),
                    num(ly),
                    num(cx),
                    num(cy)
                );
            }
            PlanItem::Window(id, [a, b, c, d]) => {
                let line = |p: &Point2, q: &Point2| {
                    let (x1, y1) = frame.px(*p);
                    let (x2, y2) = frame.px(*q);
                    format!(
                        "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\"/>",
                        num(x1),
                        num(y1),
                        num(x2),
                        num(y2)
                    )
                };
                let _ = writeln!(
                    svg,
                    "<g id=\"{}\" class=\"window\" stroke=\"#1f5fbf\">{}{}</g>",
                    guid(*id),
                    line(a, b),
                    line(c, d)
                );
            }
            PlanItem::Other(id, ring) => {
                let _ = writeln!(
                    svg,
                    "<path id=\"{}\" class=\"element\" d=\"{}\" fill=\"#bbbbbb\" stroke=\"#444444\"/>",
                    guid(*id),
                    frame.path(std::slice::from_ref(ring))
                );
            }
        }
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

fn vertical_extrusions_only(model: &IfcModel, id: u64) -> bool {
    let pl = model.world_placement(id);
    let bodies = product_bodies(model, id);
    !bodies.is_empty()
        && bodies.iter().all(|b| match b {
            Body::Extrusion { position, direction, .. } => {
                let d = pl.dir_to_world(position.dir_to_world(*direction));
                d.x.abs() < 1e-9 && d.y.abs() < 1e-9
            }
            Body::Mesh(_) => false,
        })
}

/// Elevation seen from the named side, drawn back to front.
pub fn render_elevation(model: &IfcModel, view: View) -> Result<String, SnapshotError> {
    let ids: Vec<u64> = drawable(model)
        .into_iter()
        .filter(|&id| model.class_of(id) != Some("IFCOPENINGELEMENT"))
        .collect();
    if ids.is_empty() {
        return Err(SnapshotError::EmptyModel);
    }
    struct Shape {
        id: u64,
        depth: f64,
        rect: Option<(Point2, Point2)>,
        tris: Vec<Vec<Point2>>,
    }
    let mut shapes = Vec::new();
    let mut extent = Vec::new();
    for id in ids {
        let mesh = world_mesh(model, id).expect("drawable products have a mesh");
        let projected: Vec<(Point2, f64)> = mesh
            .vertices
            .iter()
            .map(|p| {
                let (h, d) = view.project(*p);
                (Point2::new(h, p.z), d)
            })
            .collect();
        let depth = projected.iter().map(|(_, d)| d).sum::<f64>() / projected.len() as f64;
        let pts: Vec<Point2> = projected.iter().map(|(p, _)| *p).collect();
        extent.extend(&pts);
        let (rect, tris) = if vertical_extrusions_only(model, id) {
            (Some(crate::geometry::bounds2(&pts)), Vec::new())
        } else {
            let tris = mesh
                .faces
                .iter()
                .filter_map(|f| {
                    let t = [pts[f[0]], pts[f[1]], pts[f[2]]];
                    let area = t[1].sub(t[0]).cross(t[2].sub(t[0]));
                    if area.abs() < 1e-12 {
                        None
                    } else if area > 0.0 {
                        Some(t.to_vec())
                    } else {
                        Some(vec![t[0], t[2], t[1]])
                    }
                })
                .collect();
            (None, tris)
        };
        shapes.push(Shape { id, depth, rect, tris });
    }
    // farthest first so nearer products are painted over
    shapes.sort_by(|a, b| b.depth.total_cmp(&a.depth).then(a.id.cmp(&b.id)));
    let frame = Frame::new(&extent);
    let mut svg = frame.open(&format!("Elevation {}", view.name()));
    for s in &shapes {
        let guid = escape(&model.guid_of(s.id).unwrap_or_default());
        let class = escape(&crate::model::display_class(model.class_of(s.id).unwrap_or("")));
        match s.rect {
            Some((min, max)) => {
                let (x0, y0) = frame.px(Point2::new(min.x, max.y));
                let (x1, y1) = frame.px(Point2::new(max.x, min.y));
                let _ = writeln!(
                    svg,
                    "<rect id=\"{guid}\" class=\"{class}\" x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"#dddddd\" stroke=\"#333333\"/>",
                    num(x0),
                    num(y0),
                    num(x1 - x0),
                    num(y1 - y0)
                );
            }
            None => {
                let _ = writeln!(
                    svg,
                    "<path id=\"{guid}\" class=\"{class}\" d=\"{}\" fill=\"#b5651d\" stroke=\"none\"/>",
                    frame.path(&s.tris)
                );
            }
        }
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tools::{
        create_door, create_roof, create_wall, create_wall_chain, OpeningParams, RoofParams, RoofStyle, WallChainParams,
        WallParams,
    };

    fn four_walls() -> IfcModel {
        let mut m = IfcModel::new_seeded("P", 5);
        create_wall_chain(
            &mut m,
            &WallChainParams {
                points: vec![[0., 0.], [10., 0.], [10., 10.], [0., 10.]],
                height: 3.0,
                thickness: 0.2,
                close: true,
                storey: None,
            },
        )
        .unwrap();
        m
    }

    fn wall(m: &mut IfcModel, start: [f64; 2], end: [f64; 2]) -> String {
        create_wall(
            m,
            &WallParams {
                start,
                end,
                height: 3.5,
                thickness: 0.25,
                storey: None,
                name: None,
            },
        )
        .unwrap()
    }

    #[test]
    fn plan_of_four_walls() {
        let m = four_walls();
        let svg = render_plan(&m, None, DEFAULT_CUT_HEIGHT).unwrap();
        assert_eq!(svg.matches("<rect").count(), 4);
        // oracle: 10 m axis extent plus 1 m margin on each side at 50 px/m
        assert!(svg.contains("viewBox=\"0 0 600 600\""));
        for id in m.products() {
            assert_eq!(svg.matches(&format!("id=\"{}\"", m.guid_of(id).unwrap())).count(), 1);
        }
        assert_eq!(svg, render_plan(&m, None, DEFAULT_CUT_HEIGHT).unwrap());
    }

    #[test]
    fn plan_door_glyph() {
        let mut m = four_walls();
        let w = m.guid_of(m.products()[0]);
        let door = create_door(
            &mut m,
            &OpeningParams {
                wall_guid: w,
                position_along_axis: Some(3.0),
                ..Default::default()
            },
        )
        .unwrap();
        let svg = render_plan(&m, None, 1.2).unwrap();
        assert_eq!(svg.matches("class=\"door\"").count(), 1);
        assert_eq!(svg.matches("class=\"opening\"").count(), 1);
        assert!(svg.contains(&format!("id=\"{}\"", door.guid)));
        // hinge at 2.55 m on the south wall face, leaf swinging inwards
        assert!(svg.contains("<line x1=\"177.5\" y1=\"545\" x2=\"177.5\" y2=\"500\"/><path d=\"M177.5 500 A45 45 0 0 1 222.5 545\"/>"), "{svg}");
        // a cut above the door head misses door and opening
        let high = render_plan(&m, None, 2.5).unwrap();
        assert!(!high.contains(&door.guid));
    }

    #[test]
    fn rotated_wall_uses_transform() {
        let mut m = IfcModel::new_seeded("P", 5);
        wall(&mut m, [0., 0.], [3., 4.]);
        let svg = render_plan(&m, None, 1.0).unwrap();
        assert!(svg.contains("transform=\"rotate(-53.13"));
        assert!(svg.contains("width=\"250\""));
    }

    #[test]
    fn empty_model() {
        let m = IfcModel::new_seeded("P", 5);
        assert_eq!(render_plan(&m, None, 1.2), Err(SnapshotError::EmptyModel));
        assert_eq!(render_elevation(&m, View::South), Err(SnapshotError::EmptyModel));
    }

    #[test]
    fn single_wall_elevation() {
        let mut m = IfcModel::new_seeded("P", 5);
        wall(&mut m, [0., 0.], [10., 0.]);
        let svg = render_elevation(&m, View::South).unwrap();
        assert_eq!(svg.matches("<rect").count(), 1);
        // oracle: 10 m x 3.5 m at 50 px/m
        assert!(svg.contains("width=\"500\" height=\"175\""));
        let east = render_elevation(&m, View::East).unwrap();
        assert!(east.contains("width=\"12.5\" height=\"175\""));
    }

    #[test]
    fn painter_order() {
        let mut m = IfcModel::new_seeded("P", 5);
        let back = wall(&mut m, [0., 5.], [10., 5.]);
        let front = wall(&mut m, [0., 0.], [10., 0.]);
        let south = render_elevation(&m, View::South).unwrap();
        assert!(south.find(&back).unwrap() < south.find(&front).unwrap());
        let north = render_elevation(&m, View::North).unwrap();
        assert!(north.find(&front).unwrap() < north.find(&back).unwrap());
    }

    #[test]
    fn roof_silhouette() {
        let mut m = IfcModel::new_seeded("P", 5);
        create_roof(
            &mut m,
            &RoofParams {
                outline: vec![[0., 0.], [10., 0.], [10., 10.], [0., 10.]],
                style: RoofStyle::Hip,
                slope_deg: 45.0,
                base_z: 0.0,
                name: None,
            },
        )
        .unwrap();
        let svg = render_elevation(&m, View::South).unwrap();
        assert_eq!(svg.matches("<path").count(), 1);
        // oracle: apex 5 m above a 10 m base, so the view box is 12 x 7 m
        assert!(svg.contains("viewBox=\"0 0 600 350\""));
        let hull = convex_hull(&[
            Point2::new(0., 0.),
            Point2::new(1., 0.),
            Point2::new(0.5, 0.2),
            Point2::new(1., 1.),
            Point2::new(0., 1.),
        ]);
        assert_eq!(hull.len(), 4);
    }

    #[test]
    fn view_names() {
        assert_eq!("South".parse::<View>().unwrap(), View::South);
        assert!("up".parse::<View>().is_err());
    }
}
