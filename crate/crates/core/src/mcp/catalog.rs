//! Built-in tool descriptors and their handlers.

use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::{json, Value};

use super::registry::{Group, Tool, ToolDescriptor};
use super::session::Session;
use super::ToolFailure;
use crate::model::{typed_scalar, value_to_json, IfcModel, PropertySpec, PropertyValue};
use crate::query::{eval_query, mutate_query, parse_query, QueryError};
use crate::snapshot::{render_elevation, render_plan, View, DEFAULT_CUT_HEIGHT};
use crate::step::StepValue;
use crate::tools::{self, OpeningParams, RoofOverWallsParams, RoofParams, SlabParams, StairParams, WallChainParams, WallParams};
use crate::{knowledge, scene};

fn args<T: DeserializeOwned>(v: &Value) -> Result<T, ToolFailure> {
    serde_json::from_value(v.clone()).map_err(|e| ToolFailure::new("InvalidParams", e.to_string()))
}

fn guid_result(g: String) -> Value {
    json!({ "guid": g })
}

fn point2() -> Value {
    json!({"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2})
}

fn point3() -> Value {
    json!({"type": "array", "items": {"type": "number"}, "minItems": 3, "maxItems": 3})
}

fn positive() -> Value {
    json!({"type": "number", "exclusiveMinimum": 0})
}

fn outline() -> Value {
    json!({"type": "array", "items": point2(), "minItems": 3})
}

fn guid_schema() -> Value {
    json!({"type": "string", "minLength": 22})
}

fn object(properties: Value, required: &[&str]) -> Value {
    json!({"type": "object", "properties": properties, "required": required})
}

fn tool(
    name: &'static str,
    group: Group,
    description: &'static str,
    input_schema: Value,
    handler: super::registry::Handler,
) -> Tool {
    let read_only = matches!(group, Group::Query | Group::Knowledge | Group::Snapshot);
    Tool {
        descriptor: ToolDescriptor {
            name,
            group,
            description,
            input_schema,
            read_only,
            destructive: matches!(name, "delete_element" | "open_ifc"),
        },
        handler,
    }
}

pub fn tools() -> Vec<Tool> {
    use Group::*;
    let opening = |sill: bool| {
        let mut p = json!({
            "wall_guid": guid_schema(),
            "position_along_axis": {"type": "number", "minimum": 0},
            "position": point3(),
            "width": positive(),
            "height": positive(),
            "name": {"type": "string"},
        });
        if sill {
            p["sill_height"] = json!({"type": "number", "minimum": 0});
        }
        object(p, &[])
    };
    let roof_style = json!({"type": "string", "enum": ["hip", "gable", "flat"]});
    vec![
        // query
        tool(
            "get_scene_info",
            Query,
            "List objects in the model with name, type, location, visibility, selection, GUID and IFC class. Paged by offset and limit.",
            object(
                json!({"offset": {"type": "integer", "minimum": 0}, "limit": {"type": "integer", "minimum": 1}}),
                &[],
            ),
            |s, a| {
                let offset = a.get("offset").and_then(Value::as_u64).unwrap_or(0) as usize;
                let limit = a.get("limit").and_then(Value::as_u64).unwrap_or(scene::DEFAULT_LIMIT as u64) as usize;
                Ok(serde_json::to_value(scene::get_scene_info(&s.model, offset, limit)).expect("scene info serializes"))
            },
        ),
        tool(
            "get_object_info",
            Query,
            "Detailed record of one object: attributes, placement, bounding box, property sets, classifications and relationships.",
            object(json!({"guid": guid_schema()}), &["guid"]),
            |s, a| Ok(scene::get_object_info(&s.model, str_arg(a, "guid"))?),
        ),
        tool(
            "get_ifc_scene_overview",
            Query,
            "Aggregate summary: project, counts per IFC class, storeys, total floor area and model bounds.",
            object(json!({}), &[]),
            |s, _| Ok(scene::get_ifc_scene_overview(&s.model)),
        ),
        tool(
            "get_door_properties",
            Query,
            "Door width, height, sill, host wall, opening and storey.",
            object(json!({"guid": guid_schema()}), &["guid"]),
            |s, a| Ok(scene::get_door_properties(&s.model, str_arg(a, "guid"))?),
        ),
        tool(
            "execute_ifc_query",
            Query,
            "Run a pipeline query such as `walls | filter(height > 3) | count` or a bulk edit such as `walls | rename(\"Wall-{height}m\")`. Returns the result and an execution log.",
            object(json!({"query": {"type": "string"}}), &["query"]),
            execute_query,
        ),
        // create
        tool(
            "create_wall",
            Create,
            "Create a straight wall between two plan points. Returns its GUID.",
            object(
                json!({"start": point2(), "end": point2(), "height": positive(), "thickness": positive(), "storey": guid_schema(), "name": {"type": "string"}}),
                &["start", "end"],
            ),
            |s, a| Ok(guid_result(tools::create_wall(&mut s.model, &args::<WallParams>(a)?)?)),
        ),
        tool(
            "create_wall_chain",
            Create,
            "Create one wall per segment of a point list, optionally closing the loop. Returns the GUIDs in order.",
            object(
                json!({"points": {"type": "array", "items": point2(), "minItems": 2}, "height": positive(), "thickness": positive(), "close": {"type": "boolean"}, "storey": guid_schema()}),
                &["points"],
            ),
            |s, a| Ok(json!({"guids": tools::create_wall_chain(&mut s.model, &args::<WallChainParams>(a)?)?})),
        ),
        tool(
            "create_slab",
            Create,
            "Create a slab from a closed outline. The top face sits at the given elevation.",
            object(
                json!({"outline": outline(), "thickness": positive(), "elevation": {"type": "number"}, "name": {"type": "string"}}),
                &["outline"],
            ),
            |s, a| Ok(guid_result(tools::create_slab(&mut s.model, &args::<SlabParams>(a)?)?)),
        ),
        tool(
            "create_roof",
            Create,
            "Create a hip, gable or flat roof over a plan outline at base height base_z.",
            object(
                json!({"outline": outline(), "style": roof_style, "slope_deg": {"type": "number", "minimum": 5, "maximum": 85}, "base_z": {"type": "number"}, "name": {"type": "string"}}),
                &["outline"],
            ),
            |s, a| Ok(serde_json::to_value(tools::create_roof(&mut s.model, &args::<RoofParams>(a)?)?).expect("roof result serializes")),
        ),
        tool(
            "create_roof_over_walls",
            Create,
            "Create a roof over walls that form a closed loop. The base is the highest wall top.",
            object(
                json!({"wall_guids": {"type": "array", "items": guid_schema(), "minItems": 3}, "style": roof_style, "slope_deg": {"type": "number", "minimum": 5, "maximum": 85}, "name": {"type": "string"}}),
                &["wall_guids"],
            ),
            |s, a| {
                Ok(serde_json::to_value(tools::create_roof_over_walls(&mut s.model, &args::<RoofOverWallsParams>(a)?)?)
                    .expect("roof result serializes"))
            },
        ),
        tool(
            "create_door",
            Create,
            "Insert a door into a wall, by wall GUID and distance along the axis or by a world position near a wall. Defaults to 0.9 x 2.1 m.",
            opening(false),
            |s, a| Ok(serde_json::to_value(tools::create_door(&mut s.model, &args::<OpeningParams>(a)?)?).expect("opening result serializes")),
        ),
        tool(
            "create_window",
            Create,
            "Insert a window into a wall. Defaults to 1.2 x 1.4 m with a 0.9 m sill.",
            opening(true),
            |s, a| Ok(serde_json::to_value(tools::create_window(&mut s.model, &args::<OpeningParams>(a)?)?).expect("opening result serializes")),
        ),
        tool(
            "create_stairs",
            Create,
            "Create a straight flight of stairs from total rise, total run and step count.",
            object(
                json!({"origin": point3(), "direction_deg": {"type": "number"}, "total_rise": positive(), "total_run": positive(), "step_count": {"type": "integer", "minimum": 2}, "width": positive(), "name": {"type": "string"}}),
                &["total_rise", "total_run", "step_count"],
            ),
            |s, a| Ok(guid_result(tools::create_stairs(&mut s.model, &args::<StairParams>(a)?)?)),
        ),
        tool(
            "create_mesh_element",
            Create,
            "Create an element from a triangle mesh in world coordinates with an allowed IFC class.",
            object(
                json!({
                    "ifc_class": {"type": "string"},
                    "vertices": {"type": "array", "items": point3(), "minItems": 3},
                    "faces": {"type": "array", "items": {"type": "array", "items": {"type": "integer", "minimum": 0}, "minItems": 3, "maxItems": 3}, "minItems": 1},
                    "name": {"type": "string"},
                    "storey": guid_schema(),
                }),
                &["ifc_class", "vertices", "faces", "name"],
            ),
            |s, a| Ok(guid_result(tools::create_mesh_element(&mut s.model, &args(a)?)?)),
        ),
        tool(
            "create_wall_type",
            Create,
            "Create a wall type object.",
            object(json!({"name": {"type": "string", "minLength": 1}}), &["name"]),
            |s, a| Ok(guid_result(tools::create_wall_type(&mut s.model, str_arg(a, "name"))?)),
        ),
        tool(
            "create_storey",
            Create,
            "Add a building storey at an elevation.",
            object(json!({"name": {"type": "string", "minLength": 1}, "elevation": {"type": "number"}}), &["name", "elevation"]),
            |s, a| {
                let e = a["elevation"].as_f64().unwrap_or(0.0);
                Ok(guid_result(tools::create_storey(&mut s.model, str_arg(a, "name"), e)?))
            },
        ),
        // edit
        tool(
            "edit_attributes",
            Edit,
            "Set Name, Description, ObjectType, LongName or Tag on an object. Null clears the attribute.",
            object(
                json!({"guid": guid_schema(), "attributes": {"type": "object", "additionalProperties": {"type": ["string", "null"]}}}),
                &["guid", "attributes"],
            ),
            edit_attributes,
        ),
        tool(
            "add_property_set",
            Edit,
            "Attach a property set. Values may be numbers, strings or booleans. An existing set of the same name is merged.",
            object(
                json!({
                    "guid": guid_schema(),
                    "pset_name": {"type": "string", "minLength": 1},
                    "properties": {"type": "object", "additionalProperties": {"type": ["number", "string", "boolean"]}},
                    "units": {"type": "object", "additionalProperties": {"type": "string"}},
                }),
                &["guid", "pset_name", "properties"],
            ),
            add_property_set,
        ),
        tool(
            "add_classification",
            Edit,
            "Associate a classification reference, e.g. system \"Uniclass 2015\" with code \"Ss_25_10_20\".",
            object(
                json!({"guid": guid_schema(), "system": {"type": "string", "minLength": 1}, "code": {"type": "string", "minLength": 1}}),
                &["guid", "system", "code"],
            ),
            |s, a| {
                let g = s.model.add_classification(str_arg(a, "guid"), str_arg(a, "system"), str_arg(a, "code"))?;
                Ok(guid_result(g))
            },
        ),
        tool(
            "set_owner_history",
            Edit,
            "Attach one owner history with a user and a creation time (unix seconds) to every listed object.",
            object(
                json!({"guids": {"type": "array", "items": guid_schema()}, "user": {"type": "string", "minLength": 1}, "timestamp": {"type": "integer"}}),
                &["guids", "user", "timestamp"],
            ),
            |s, a| {
                #[derive(Deserialize)]
                struct P {
                    guids: Vec<String>,
                    user: String,
                    timestamp: i64,
                }
                let p: P = args(a)?;
                Ok(json!({"updated": s.model.set_owner_history(&p.guids, &p.user, p.timestamp)?}))
            },
        ),
        tool(
            "delete_element",
            Edit,
            "Delete a product together with its openings, fillings and owned geometry.",
            object(json!({"guid": guid_schema()}), &["guid"]),
            |s, a| Ok(json!({"removed": s.model.delete_element(str_arg(a, "guid"))?})),
        ),
        tool(
            "set_session_flags",
            Edit,
            "Set the visible and selected display flags of an object for this session.",
            object(
                json!({"guid": guid_schema(), "visible": {"type": "boolean"}, "selected": {"type": "boolean"}}),
                &["guid"],
            ),
            |s, a| {
                let f = tools::set_session_flags(
                    &mut s.model,
                    str_arg(a, "guid"),
                    a.get("visible").and_then(Value::as_bool),
                    a.get("selected").and_then(Value::as_bool),
                )?;
                Ok(json!({"guid": str_arg(a, "guid"), "visible": f.visible, "selected": f.selected}))
            },
        ),
        tool(
            "save_ifc",
            Edit,
            "Write the model to an IFC file.",
            object(json!({"path": {"type": "string", "minLength": 1}}), &["path"]),
            |s, a| {
                let path = str_arg(a, "path");
                let bytes = s.model.to_step()?;
                std::fs::write(path, &bytes).map_err(|e| ToolFailure::new("IoError", format!("{path}: {e}")))?;
                s.model.mark_clean();
                Ok(json!({"path": path, "bytes": bytes.len()}))
            },
        ),
        tool(
            "open_ifc",
            Edit,
            "Replace the session model with one read from an IFC file.",
            object(json!({"path": {"type": "string", "minLength": 1}}), &["path"]),
            |s, a| {
                let path = str_arg(a, "path");
                let bytes = std::fs::read(path).map_err(|e| ToolFailure::new("IoError", format!("{path}: {e}")))?;
                let generator = s.model.take_generator();
                match IfcModel::from_step(&bytes, Default::default()) {
                    Ok(mut m) => {
                        m.set_generator(generator);
                        s.model = m;
                    }
                    Err(e) => {
                        s.model.set_generator(generator);
                        return Err(e.into());
                    }
                }
                Ok(json!({"path": path, "objects": scene::listed_objects(&s.model).len()}))
            },
        ),
        // knowledge
        tool(
            "search_ifc_knowledge",
            Knowledge,
            "Search the local IFC documentation and example corpus. Returns the k best passages with their sources.",
            object(
                json!({"query": {"type": "string"}, "k": {"type": "integer", "minimum": 1, "maximum": 50}}),
                &["query"],
            ),
            |s, a| {
                let k = a.get("k").and_then(Value::as_u64).unwrap_or(5) as usize;
                let hits = s.knowledge()?.search(str_arg(a, "query"), k)?;
                let results: Vec<Value> = hits
                    .into_iter()
                    .map(|h| {
                        json!({
                            "doc_id": h.chunk.doc_id,
                            "chunk_index": h.chunk.chunk_index,
                            "source_path": h.chunk.source_path,
                            "tags": h.chunk.tags,
                            "score": h.score,
                            "text": h.chunk.text,
                        })
                    })
                    .collect();
                Ok(json!({ "results": results }))
            },
        ),
        // snapshot
        tool(
            "capture_plan_view",
            Snapshot,
            "Render a plan section of a storey as SVG. The cut is cut_height metres above the storey elevation.",
            object(json!({"storey": guid_schema(), "cut_height": positive()}), &[]),
            |s, a| {
                let cut = a.get("cut_height").and_then(Value::as_f64).unwrap_or(DEFAULT_CUT_HEIGHT);
                let storey = a.get("storey").and_then(Value::as_str);
                Ok(json!({"svg": render_plan(&s.model, storey, cut)?}))
            },
        ),
        tool(
            "capture_elevation_view",
            Snapshot,
            "Render an orthographic elevation from the north, south, east or west as SVG.",
            object(
                json!({"view": {"type": "string", "enum": ["north", "south", "east", "west"]}}),
                &["view"],
            ),
            |s, a| {
                let view: View = str_arg(a, "view").parse()?;
                Ok(json!({"svg": render_elevation(&s.model, view)?}))
            },
        ),
    ]
}

/// Required string argument; the schema has already checked it.
fn str_arg<'a>(a: &'a Value, key: &str) -> &'a str {
    a.get(key).and_then(Value::as_str).unwrap_or_default()
}

fn execute_query(s: &mut Session, a: &Value) -> Result<Value, ToolFailure> {
    let prog = parse_query(str_arg(a, "query"))?;
    let out = if prog.terminal.is_mutation() {
        if !s.groups().contains(&Group::Edit) {
            return Err(QueryError::ReadOnly.into());
        }
        mutate_query(&mut s.model, &prog)?
    } else {
        eval_query(&s.model, &prog)?
    };
    Ok(json!({"result": out.result, "log": out.log}))
}

fn edit_attributes(s: &mut Session, a: &Value) -> Result<Value, ToolFailure> {
    let updates: Vec<(String, StepValue)> = a["attributes"]
        .as_object()
        .map(|m| {
            m.iter()
                .map(|(k, v)| (k.clone(), v.as_str().map_or(StepValue::Unset, StepValue::str)))
                .collect()
        })
        .unwrap_or_default();
    let changes = s.model.edit_attributes(str_arg(a, "guid"), &updates)?;
    let changed: Vec<Value> = changes
        .iter()
        .map(|c| json!({"name": c.name, "old": value_to_json(&c.old), "new": value_to_json(&c.new)}))
        .collect();
    Ok(json!({"guid": str_arg(a, "guid"), "changed": changed}))
}

fn add_property_set(s: &mut Session, a: &Value) -> Result<Value, ToolFailure> {
    let units = a.get("units").and_then(Value::as_object);
    let properties = a["properties"]
        .as_object()
        .map(|m| {
            m.iter()
                .filter_map(|(k, v)| {
                    Some(PropertyValue {
                        name: k.clone(),
                        value: typed_scalar(v)?,
                        unit: units.and_then(|u| u.get(k)).and_then(Value::as_str).map(str::to_string),
                    })
                })
                .collect()
        })
        .unwrap_or_default();
    let spec = PropertySpec {
        pset_name: str_arg(a, "pset_name").to_string(),
        properties,
    };
    let g = s.model.add_property_set(str_arg(a, "guid"), &spec)?;
    Ok(json!({ "pset_guid": g }))
}

impl From<knowledge::KnowledgeError> for ToolFailure {
    fn from(e: knowledge::KnowledgeError) -> Self {
        let code = match e {
            knowledge::KnowledgeError::Io { .. } => "IoError",
            knowledge::KnowledgeError::EmptyIndex => "EmptyIndex",
            knowledge::KnowledgeError::BadIndex(_) => "BadIndex",
        };
        ToolFailure::new(code, e.to_string())
    }
}
