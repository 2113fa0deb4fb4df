//! Read-only summaries of the model: the paginated object list, per-object
//! detail, the aggregate overview and door records.

use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::geometry::read::{axis_length, height, profile_area, world_bounds};
use crate::geometry::Point3;
use crate::json::clean;
use crate::model::{display_class, value_to_json, EntityKind, IfcModel};
use crate::tools::{ToolError, ToolResult};

pub const DEFAULT_LIMIT: usize = 200;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ObjectSummary {
    pub name: String,
    #[serde(rename = "type")]
    pub kind: &'static str,
    pub location: [f64; 3],
    pub visible: bool,
    pub selected: bool,
    pub guid: String,
    pub ifc_class: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SceneInfo {
    pub count: usize,
    pub total: usize,
    pub offset: usize,
    pub limit: usize,
    pub objects: Vec<ObjectSummary>,
}

fn point(p: Point3) -> [f64; 3] {
    [clean(p.x), clean(p.y), clean(p.z)]
}

/// Objects in listing order: spatial chain, products, then type objects.
pub fn listed_objects(model: &IfcModel) -> Vec<u64> {
    let mut ids = model.spatial_chain();
    ids.extend(model.products());
    ids.extend(model.ids_by_kind(EntityKind::Type));
    ids
}

fn summary(model: &IfcModel, id: u64) -> ObjectSummary {
    let e = model.get(id).expect("listed ids exist");
    let class = display_class(&e.class_name);
    let flags = model.flags(id);
    let has_body = matches!(model.kind_of(id), Some(EntityKind::Element | EntityKind::Spatial))
        && e.attr(6)
            .as_ref_id()
            .and_then(|r| model.class_of(r))
            .is_some_and(|c| c == "IFCPRODUCTDEFINITIONSHAPE");
    ObjectSummary {
        name: format!("{class}/{}", model.name_of(id).unwrap_or_default()),
        kind: if has_body { "MESH" } else { "EMPTY" },
        location: point(model.world_placement(id).origin),
        visible: flags.visible,
        selected: flags.selected,
        guid: model.guid_of(id).unwrap_or_default(),
        ifc_class: class,
    }
}

pub fn get_scene_info(model: &IfcModel, offset: usize, limit: usize) -> SceneInfo {
    let ids = listed_objects(model);
    let total = ids.len();
    let objects: Vec<ObjectSummary> = ids
        .iter()
        .skip(offset)
        .take(limit)
        .map(|&id| summary(model, id))
        .collect();
    SceneInfo {
        count: objects.len(),
        total,
        offset,
        limit,
        objects,
    }
}

fn bbox_json(b: Option<(Point3, Point3)>) -> Value {
    match b {
        Some((min, max)) => json!({
            "min": point(min),
            "max": point(max),
            "size": point(max.sub(min)),
        }),
        None => Value::Null,
    }
}

fn guid_list(model: &IfcModel, ids: &[u64]) -> Value {
    Value::Array(ids.iter().filter_map(|&i| model.guid_of(i)).map(Value::from).collect())
}

fn ref_json(model: &IfcModel, id: Option<u64>) -> Value {
    match id {
        Some(i) => json!({
            "guid": model.guid_of(i).unwrap_or_default(),
            "name": model.name_of(i).unwrap_or_default(),
        }),
        None => Value::Null,
    }
}

pub fn get_object_info(model: &IfcModel, guid: &str) -> ToolResult<Value> {
    let id = model.id_of(guid)?;
    let e = model.get(id).expect("indexed ids exist");
    let pl = model.world_placement(id);
    let mut psets = Map::new();
    for (pset, name) in model.psets_of(id) {
        let props: Map<String, Value> = model
            .pset_properties(pset)
            .into_iter()
            .map(|(_, n, v)| (n, value_to_json(&v)))
            .collect();
        psets.insert(name, Value::Object(props));
    }
    let classifications: Vec<Value> = model
        .classifications_of(id)
        .into_iter()
        .map(|(system, code)| json!({"system": system, "code": code}))
        .collect();
    let openings = model.openings_of(id);
    let fills: Vec<u64> = openings.iter().flat_map(|&o| model.fillings_of(o)).collect();
    let filled_opening = model.opening_filled_by(id);
    let host = filled_opening
        .and_then(|o| model.host_of_opening(o))
        .or_else(|| model.host_of_opening(id));
    let storey = model
        .containing_storey(id)
        .or_else(|| host.and_then(|h| model.containing_storey(h)));
    let kind = model.kind_of(id).expect("indexed ids exist");
    Ok(json!({
        "guid": guid,
        "ifc_class": display_class(&e.class_name),
        "name": e.attr(2).as_str(),
        "description": e.attr(3).as_str(),
        "object_type": e.attr(4).as_str(),
        "placement": {
            "location": point(pl.origin),
            "x_axis": point(pl.x_axis),
            "z_axis": point(pl.z_axis),
        },
        "bounding_box": bbox_json(if kind == EntityKind::Element { world_bounds(model, id) } else { None }),
        "property_sets": psets,
        "classifications": classifications,
        "relationships": {
            "host": ref_json(model, host),
            "opening": filled_opening.and_then(|o| model.guid_of(o)),
            "openings": guid_list(model, &openings),
            "fills": guid_list(model, &fills),
        },
        "storey": ref_json(model, storey),
        "owner_history": model.owner_history_of(id).map(|(user, ts)| json!({"user": user, "creation_date": ts})),
        "visible": model.flags(id).visible,
        "selected": model.flags(id).selected,
    }))
}

/// Classes always reported by the overview, even at zero.
const COUNTED: &[&str] = &[
    "IFCWALL",
    "IFCSLAB",
    "IFCROOF",
    "IFCDOOR",
    "IFCWINDOW",
    "IFCSTAIR",
    "IFCOPENINGELEMENT",
];

fn union(a: Option<(Point3, Point3)>, b: (Point3, Point3)) -> (Point3, Point3) {
    match a {
        None => b,
        Some((lo, hi)) => (
            Point3::new(lo.x.min(b.0.x), lo.y.min(b.0.y), lo.z.min(b.0.z)),
            Point3::new(hi.x.max(b.1.x), hi.y.max(b.1.y), hi.z.max(b.1.z)),
        ),
    }
}

/// Sum of slab profile areas.
pub fn floor_area(model: &IfcModel) -> f64 {
    model
        .ids_of_class("IFCSLAB")
        .into_iter()
        .filter_map(|s| profile_area(model, s))
        .sum()
}

pub fn get_ifc_scene_overview(model: &IfcModel) -> Value {
    let mut counts: BTreeMap<String, usize> = COUNTED.iter().map(|c| (display_class(c), 0)).collect();
    let mut bbox = None;
    for id in model.products() {
        let class = model.class_of(id).expect("products exist");
        *counts.entry(display_class(class)).or_default() += 1;
        if class != "IFCOPENINGELEMENT" {
            if let Some(b) = world_bounds(model, id) {
                bbox = Some(union(bbox, b));
            }
        }
    }
    for id in model.ids_by_kind(EntityKind::Type) {
        *counts.entry(display_class(model.class_of(id).unwrap())).or_default() += 1;
    }
    let storeys: Vec<Value> = model
        .storeys()
        .iter()
        .map(|&s| {
            json!({
                "guid": model.guid_of(s),
                "name": model.name_of(s),
                "elevation": clean(model.storey_elevation(s)),
            })
        })
        .collect();
    json!({
        "project": model.name_of(model.project()),
        "object_count": listed_objects(model).len(),
        "product_count": model.products().len(),
        "class_counts": counts,
        "storeys": storeys,
        "total_floor_area": clean(floor_area(model)),
        "bounding_box": bbox_json(bbox),
    })
}

pub fn get_door_properties(model: &IfcModel, guid: &str) -> ToolResult<Value> {
    let id = model.id_of(guid)?;
    if model.class_of(id) != Some("IFCDOOR") {
        return Err(ToolError::NotADoor(guid.to_string()));
    }
    let opening = model.opening_filled_by(id);
    let host = opening.and_then(|o| model.host_of_opening(o));
    let base = world_bounds(model, id).map(|b| b.0.z);
    let host_base = host.and_then(|h| world_bounds(model, h)).map(|b| b.0.z);
    let sill = match (base, host_base) {
        (Some(a), Some(b)) => a - b,
        _ => 0.0,
    };
    Ok(json!({
        "guid": guid,
        "name": model.name_of(id),
        "width": axis_length(model, id).map(clean),
        "height": height(model, id).map(clean),
        "sill_height": clean(sill),
        "host_wall": host.and_then(|h| model.guid_of(h)),
        "opening": opening.and_then(|o| model.guid_of(o)),
        "storey": model.containing_storey(id).and_then(|s| model.name_of(s)),
        "swing": "NOTDEFINED",
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tools::{create_door, create_wall_chain, create_wall_type, create_window, OpeningParams, WallChainParams};

    fn square_scene() -> (IfcModel, Vec<String>) {
        let mut m = IfcModel::new_seeded("My Project", 7);
        let walls = create_wall_chain(
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
        create_wall_type(&mut m, "wall").unwrap();
        (m, walls)
    }

    #[test]
    fn square_scene_shape() {
        let (m, _) = square_scene();
        let info = get_scene_info(&m, 0, DEFAULT_LIMIT);
        assert_eq!((info.count, info.total), (9, 9));
        let names: Vec<&str> = info.objects.iter().map(|o| o.name.as_str()).collect();
        assert_eq!(
            names,
            [
                "IfcProject/My Project",
                "IfcSite/My Site",
                "IfcBuilding/My Building",
                "IfcBuildingStorey/My Storey",
                "IfcWall/Wall_001",
                "IfcWall/Wall_002",
                "IfcWall/Wall_003",
                "IfcWall/Wall_004",
                "IfcWallType/wall",
            ]
        );
        let locs: Vec<[f64; 3]> = info.objects[4..8].iter().map(|o| o.location).collect();
        assert_eq!(locs, [[0., 0., 0.], [10., 0., 0.], [10., 10., 0.], [0., 10., 0.]]);
        assert!(info.objects[4..8].iter().all(|o| o.kind == "MESH" && o.visible));
        assert_eq!(info.objects[0].kind, "EMPTY");
        assert!(!info.objects[8].visible);
        let text = crate::json::pretty(&serde_json::to_value(&info).unwrap());
        assert!(text.contains("\"name\": \"IfcWall/Wall_001\",\n      \"type\": \"MESH\",\n      \"location\": [0.0,0.0,0.0],"));
    }

    #[test]
    fn pagination() {
        let (m, _) = square_scene();
        let page = get_scene_info(&m, 7, 5);
        assert_eq!((page.count, page.total, page.offset, page.limit), (2, 9, 7, 5));
        assert_eq!(get_scene_info(&m, 20, 5).count, 0);
        let fresh = IfcModel::new_seeded("P", 1);
        assert_eq!(get_scene_info(&fresh, 0, 200).total, 4);
    }

    #[test]
    fn object_info_and_door() {
        let (mut m, walls) = square_scene();
        let info = get_object_info(&m, &walls[0]).unwrap();
        // oracle: 10 m axis, 0.2 thickness, 3 m height
        assert_eq!(info["bounding_box"]["size"], json!([10.0, 0.2, 3.0]));
        assert_eq!(info["storey"]["name"], "My Storey");
        let door = create_door(
            &mut m,
            &OpeningParams {
                wall_guid: Some(walls[0].clone()),
                position_along_axis: Some(5.0),
                ..Default::default()
            },
        )
        .unwrap();
        let d = get_door_properties(&m, &door.guid).unwrap();
        assert_eq!((d["width"].as_f64(), d["height"].as_f64()), (Some(0.9), Some(2.1)));
        assert_eq!(d["host_wall"], walls[0].as_str());
        let win = create_window(
            &mut m,
            &OpeningParams {
                wall_guid: Some(walls[1].clone()),
                position_along_axis: Some(5.0),
                ..Default::default()
            },
        )
        .unwrap();
        assert!(matches!(get_door_properties(&m, &win.guid), Err(ToolError::NotADoor(_))));
        let wi = get_object_info(&m, &walls[0]).unwrap();
        assert_eq!(wi["relationships"]["fills"], json!([door.guid.clone()]));
        m.delete_element(&walls[0]).unwrap();
        assert!(matches!(
            get_door_properties(&m, &door.guid),
            Err(ToolError::Model(crate::model::ModelError::UnknownGuid(_)))
        ));
        assert!(get_object_info(&m, "0000000000000000000000").is_err());
    }

    #[test]
    fn overview_counts() {
        let (m, _) = square_scene();
        let o = get_ifc_scene_overview(&m);
        assert_eq!(o["class_counts"]["IfcWall"], 4);
        assert_eq!(o["class_counts"]["IfcDoor"], 0);
        assert_eq!(o["object_count"], 9);
        assert_eq!(o["storeys"][0]["elevation"], 0.0);
        let fresh = get_ifc_scene_overview(&IfcModel::new_seeded("P", 1));
        assert_eq!(fresh["product_count"], 0);
        assert!(fresh["class_counts"].as_object().unwrap().values().all(|v| v == 0));
    }

    #[test]
    fn reads_are_pure() {
        let (m, walls) = square_scene();
        let a = serde_json::to_string(&get_scene_info(&m, 0, 200)).unwrap();
        let b = serde_json::to_string(&get_scene_info(&m, 0, 200)).unwrap();
        assert_eq!(a, b);
        assert_eq!(get_object_info(&m, &walls[2]).unwrap(), get_object_info(&m, &walls[2]).unwrap());
    }
}
