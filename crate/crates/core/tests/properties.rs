use proptest::prelude::*;
use serde_json::{json, Value};

use ifc_mcp::geometry::read::{axis_length, world_bounds};
use ifc_mcp::geometry::{hip_roof_solid, polygon_area, prism_mesh, wall_axis_to_profile, Point2, Polygon2};
use ifc_mcp::knowledge::{DocChunk, KnowledgeIndex};
use ifc_mcp::mcp::{handle_line, CallOutcome, Registry, Session};
use ifc_mcp::model::IfcModel;
use ifc_mcp::query::{eval_query, parse_query};
use ifc_mcp::scene::{get_ifc_scene_overview, get_object_info, get_scene_info};
use ifc_mcp::snapshot::{render_plan, DEFAULT_CUT_HEIGHT};
use ifc_mcp::step::{find_dangling, parse_step, GuidGenerator};

#[derive(Debug, Clone)]
enum Op {
    Wall { x: f64, y: f64, len: f64, angle: f64 },
    Chain { w: f64, h: f64 },
    Slab { x: f64, y: f64, w: f64, h: f64, z: f64 },
    Door { pick: usize },
    Window { pick: usize },
    Roof { w: f64, h: f64, slope: f64 },
    Pset { pick: usize, value: f64 },
    Classify { pick: usize },
    Delete { pick: usize },
}

fn op() -> impl Strategy<Value = Op> {
    prop_oneof![
        (-20.0..20.0, -20.0..20.0, 3.0..12.0, 0.0..std::f64::consts::TAU).prop_map(|(x, y, len, angle)| Op::Wall { x, y, len, angle }),
        (3.0..15.0, 3.0..15.0).prop_map(|(w, h)| Op::Chain { w, h }),
        (-20.0..20.0, -20.0..20.0, 1.0..10.0, 1.0..10.0, 0.0..6.0).prop_map(|(x, y, w, h, z)| Op::Slab { x, y, w, h, z }),
        any::<usize>().prop_map(|pick| Op::Door { pick }),
        any::<usize>().prop_map(|pick| Op::Window { pick }),
        (2.0..12.0, 2.0..12.0, 15.0..60.0).prop_map(|(w, h, slope)| Op::Roof { w, h, slope }),
        (any::<usize>(), 0.0..100.0).prop_map(|(pick, value)| Op::Pset { pick, value }),
        any::<usize>().prop_map(|pick| Op::Classify { pick }),
        any::<usize>().prop_map(|pick| Op::Delete { pick }),
    ]
}

fn rect(x: f64, y: f64, w: f64, h: f64) -> Value {
    json!([[x, y], [x + w, y], [x + w, y + h], [x, y + h]])
}

fn pick(m: &IfcModel, class: &str, n: usize) -> Option<String> {
    let ids = m.ids_of_class(class);
    (!ids.is_empty()).then(|| m.guid_of(ids[n % ids.len()]).unwrap())
}

/// Applies one op through the dispatcher; returns the GUIDs it reports.
fn apply(reg: &Registry, s: &mut Session, op: &Op) -> Vec<String> {
    let (name, args) = match *op {
        Op::Wall { x, y, len, angle } => (
            "create_wall",
            json!({"start": [x, y], "end": [x + len * angle.cos(), y + len * angle.sin()]}),
        ),
        Op::Chain { w, h } => (
            "create_wall_chain",
            json!({"points": rect(0.0, 0.0, w, h), "close": true}),
        ),
        Op::Slab { x, y, w, h, z } => ("create_slab", json!({"outline": rect(x, y, w, h), "elevation": z})),
        Op::Door { pick: n } | Op::Window { pick: n } => {
            let Some(wall) = pick(&s.model, "IFCWALL", n) else { return vec![] };
            let id = s.model.id_of(&wall).unwrap();
            let len = axis_length(&s.model, id).unwrap();
            let tool = if matches!(op, Op::Door { .. }) { "create_door" } else { "create_window" };
            (tool, json!({"wall_guid": wall, "position_along_axis": len / 2.0}))
        }
        Op::Roof { w, h, slope } => ("create_roof", json!({"outline": rect(0.0, 0.0, w, h), "slope_deg": slope, "base_z": 3.0})),
        Op::Pset { pick: n, value } => {
            let Some(g) = pick(&s.model, "IFCWALL", n) else { return vec![] };
            ("add_property_set", json!({"guid": g, "pset_name": "Pset_Test", "properties": {"Value": value}}))
        }
        Op::Classify { pick: n } => {
            let Some(g) = pick(&s.model, "IFCSLAB", n) else { return vec![] };
            ("add_classification", json!({"guid": g, "system": "Uniclass 2015", "code": "Ss_25_30"}))
        }
        Op::Delete { pick: n } => {
            let Some(g) = pick(&s.model, "IFCWALL", n) else { return vec![] };
            ("delete_element", json!({"guid": g}))
        }
    };
    match s.call_tool(reg, name, &args) {
        CallOutcome::Ok(v) => {
            let mut out = Vec::new();
            if let Some(g) = v.get("guid").and_then(Value::as_str) {
                out.push(g.to_string());
            }
            if let Some(gs) = v.get("guids").and_then(Value::as_array) {
                out.extend(gs.iter().filter_map(Value::as_str).map(String::from));
            }
            out
        }
        CallOutcome::Failed(_) => vec![],
        other => panic!("{name} {args}: {other:?}"),
    }
}

fn build(ops: &[Op], seed: u64) -> (Session, Vec<Vec<String>>) {
    let reg = Registry::standard();
    let mut s = Session::new(IfcModel::new_seeded("Prop", seed));
    let created = ops.iter().map(|o| apply(&reg, &mut s, o)).collect();
    (s, created)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn graph_stays_consistent(ops in prop::collection::vec(op(), 0..12), seed in any::<u64>()) {
        let (mut s, created) = build(&ops, seed);
        prop_assert_eq!(s.model.check_integrity(), Ok(()));
        for (op, guids) in ops.iter().zip(&created) {
            if matches!(op, Op::Delete { .. }) {
                continue;
            }
            for g in guids {
                if s.model.id_of(g).is_ok() {
                    prop_assert!(get_object_info(&s.model, g).is_ok());
                }
            }
        }
        let bytes = s.model.to_step().unwrap();
        let (_, ents) = parse_step(&bytes).unwrap();
        prop_assert_eq!(find_dangling(&ents), None);
        let reread = IfcModel::from_step(&bytes, GuidGenerator::seeded(0)).unwrap();
        prop_assert_eq!(get_ifc_scene_overview(&reread), get_ifc_scene_overview(&s.model));
    }

    #[test]
    fn writing_is_deterministic(ops in prop::collection::vec(op(), 0..8), seed in any::<u64>()) {
        let (mut a, _) = build(&ops, seed);
        let (mut b, _) = build(&ops, seed);
        prop_assert_eq!(a.model.to_step().unwrap(), b.model.to_step().unwrap());
    }

    #[test]
    fn reads_are_pure(ops in prop::collection::vec(op(), 0..8)) {
        let (mut s, _) = build(&ops, 1);
        let before = s.model.to_step().unwrap();
        let overview = get_ifc_scene_overview(&s.model);
        for q in ["walls | count", "slabs | sum(area)", "all | list(name)", "walls | filter(length > 4) | select(guid, length)"] {
            let prog = parse_query(q).unwrap();
            let a = eval_query(&s.model, &prog).unwrap();
            let b = eval_query(&s.model, &prog).unwrap();
            prop_assert_eq!(a.result, b.result);
        }
        prop_assert_eq!(get_ifc_scene_overview(&s.model), overview);
        prop_assert_eq!(s.model.to_step().unwrap(), before);
    }

    #[test]
    fn pages_concatenate(ops in prop::collection::vec(op(), 0..8), limit in 1usize..7) {
        let (s, _) = build(&ops, 2);
        let all = get_scene_info(&s.model, 0, usize::MAX);
        let mut joined = Vec::new();
        let mut offset = 0;
        while offset < all.total + 2 {
            let page = get_scene_info(&s.model, offset, limit);
            prop_assert_eq!(page.count, page.objects.len());
            prop_assert_eq!(page.count, limit.min(all.total.saturating_sub(offset)));
            joined.extend(page.objects);
            offset += limit;
        }
        prop_assert_eq!(joined, all.objects);
    }

    #[test]
    fn openings_sit_inside_hosts(ops in prop::collection::vec(op(), 1..10)) {
        let (s, _) = build(&ops, 3);
        let m = &s.model;
        for opening in m.ids_of_class("IFCOPENINGELEMENT") {
            let host = m.host_of_opening(opening).expect("opening has a host");
            let (olo, ohi) = world_bounds(m, opening).unwrap();
            let (hlo, hhi) = world_bounds(m, host).unwrap();
            let tol = 1e-6;
            prop_assert!(olo.z > hlo.z - tol && ohi.z < hhi.z + tol);
            prop_assert!(olo.x > hlo.x - 1.0 && ohi.x < hhi.x + 1.0);
        }
    }

    #[test]
    fn plan_ids_match_cut_products(ops in prop::collection::vec(op(), 0..10)) {
        let (s, _) = build(&ops, 4);
        let m = &s.model;
        prop_assume!(!m.products().is_empty());
        let svg = render_plan(m, None, DEFAULT_CUT_HEIGHT).unwrap();
        prop_assert_eq!(&svg, &render_plan(m, None, DEFAULT_CUT_HEIGHT).unwrap());
        for p in m.products() {
            let Some((lo, hi)) = world_bounds(m, p) else { continue };
            if lo.z < DEFAULT_CUT_HEIGHT - 1e-6 && hi.z > DEFAULT_CUT_HEIGHT + 1e-6 {
                let id = format!("id=\"{}\"", m.guid_of(p).unwrap());
                prop_assert_eq!(svg.matches(&id).count(), 1, "{}", m.class_of(p).unwrap());
            }
        }
    }

    #[test]
    fn wall_chain_length_is_perimeter(pts in prop::collection::vec((-30.0..30.0f64, -30.0..30.0f64), 3..8)) {
        let mut pts: Vec<(f64, f64)> = pts;
        let c = pts.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0, a.1 + p.1));
        let c = (c.0 / pts.len() as f64, c.1 / pts.len() as f64);
        pts.sort_by(|a, b| (a.1 - c.1).atan2(a.0 - c.0).total_cmp(&(b.1 - c.1).atan2(b.0 - c.0)));
        let Ok(poly) = Polygon2::new(pts.iter().map(|&(x, y)| Point2::new(x, y)).collect()) else {
            return Ok(());
        };
        let reg = Registry::standard();
        let mut s = Session::new(IfcModel::new_seeded("Chain", 5));
        let points: Vec<[f64; 2]> = poly.vertices().iter().map(|p| [p.x, p.y]).collect();
        let CallOutcome::Ok(v) = s.call_tool(&reg, "create_wall_chain", &json!({"points": points, "close": true})) else {
            return Ok(());
        };
        let total: f64 = v["guids"]
            .as_array()
            .unwrap()
            .iter()
            .map(|g| axis_length(&s.model, s.model.id_of(g.as_str().unwrap()).unwrap()).unwrap())
            .sum();
        prop_assert!((total - poly.perimeter()).abs() <= 1e-9, "{} vs {}", total, poly.perimeter());
    }

    #[test]
    fn wall_profile_and_prism_volume(x0 in -50.0..50.0f64, y0 in -50.0..50.0f64, dx in 0.1..20.0f64, dy in -20.0..20.0f64,
                                     t in 0.05..1.0f64, depth in 0.1..10.0f64) {
        let (start, end) = (Point2::new(x0, y0), Point2::new(x0 + dx, y0 + dy));
        let (profile, _) = wall_axis_to_profile(start, end, t).unwrap();
        let area = polygon_area(&profile);
        let want = start.dist(end) * t;
        prop_assert!((area - want).abs() <= 4.0 * f64::EPSILON * want);
        let mesh = prism_mesh(&profile, 0.0, depth).unwrap();
        let vol = mesh.signed_volume();
        prop_assert!((vol - area * depth).abs() <= 1e-9 * area * depth);
    }

    #[test]
    fn polygon_area_ignores_orientation(pts in prop::collection::vec((-30.0..30.0f64, -30.0..30.0f64), 3..9)) {
        let fwd: Vec<Point2> = pts.iter().map(|&(x, y)| Point2::new(x, y)).collect();
        let rev: Vec<Point2> = fwd.iter().rev().copied().collect();
        if let (Ok(a), Ok(b)) = (Polygon2::new(fwd), Polygon2::new(rev)) {
            prop_assert_eq!(polygon_area(&a), polygon_area(&b));
        }
    }

    #[test]
    fn hip_roofs_are_watertight(w in 1.0..30.0f64, h in 1.0..30.0f64, slope in 10.0..70.0f64) {
        let outline = Polygon2::new(vec![Point2::new(0., 0.), Point2::new(w, 0.), Point2::new(w, h), Point2::new(0., h)]).unwrap();
        let roof = hip_roof_solid(&outline, slope, 2.0).unwrap();
        prop_assert!(!roof.flat_fallback);
        prop_assert!(roof.mesh.is_watertight());
        let apex = roof.mesh.vertices.iter().map(|p| p.z).fold(f64::MIN, f64::max);
        prop_assert!((apex - 2.0 - w.min(h) / 2.0 * slope.to_radians().tan()).abs() < 1e-9);
    }

    #[test]
    fn unique_token_ranks_first(n in 2usize..30, target in any::<usize>(), noise in prop::collection::vec(0usize..6, 2..30)) {
        const WORDS: [&str; 6] = ["wall", "slab", "door", "roof", "storey", "window"];
        let target = target % n;
        let chunks: Vec<DocChunk> = (0..n)
            .map(|i| {
                let mut text: Vec<&str> = noise.iter().cycle().skip(i).take(noise.len()).map(|&k| WORDS[k]).collect();
                if i == target {
                    text.push("uniquetoken");
                }
                DocChunk { doc_id: format!("d{i}"), chunk_index: 0, text: text.join(" "), source_path: String::new(), tags: vec![] }
            })
            .collect();
        let index = KnowledgeIndex::build(chunks);
        let hits = index.search("uniquetoken", 3).unwrap();
        prop_assert_eq!(hits[0].chunk.doc_id.clone(), format!("d{target}"));
        let restored = KnowledgeIndex::from_bytes(&index.to_bytes()).unwrap();
        prop_assert_eq!(restored.search("wall door uniquetoken", 5).unwrap(), index.search("wall door uniquetoken", 5).unwrap());
    }

    #[test]
    fn every_line_gets_a_valid_frame(line in "\\PC{0,60}", id in any::<i32>(), method in "[a-z/]{0,12}") {
        let reg = Registry::standard();
        let mut s = Session::new(IfcModel::new_seeded("Rpc", 6));
        let requests = [
            line,
            json!({"jsonrpc": "2.0", "id": id, "method": method}).to_string(),
            json!({"jsonrpc": "2.0", "id": id, "method": "tools/call", "params": {"name": "create_wall", "arguments": {}}}).to_string(),
        ];
        for r in requests {
            let Some(out) = handle_line(&reg, &mut s, &r) else { continue };
            let v: Value = serde_json::from_str(&out).unwrap();
            prop_assert_eq!(&v["jsonrpc"], "2.0");
            prop_assert!(v.get("result").is_some() != v.get("error").is_some());
            if let Ok(req) = serde_json::from_str::<Value>(&r) {
                if let Some(rid) = req.get("id").filter(|i| i.is_number()) {
                    prop_assert_eq!(&v["id"], rid);
                }
            }
        }
    }

    #[test]
    fn required_arguments_are_enforced(drop in 0usize..8) {
        let reg = Registry::standard();
        let mut s = Session::new(IfcModel::new_seeded("Req", 7));
        for d in reg.descriptors(s.groups()) {
            let required: Vec<&str> = d.input_schema["required"].as_array().unwrap().iter().filter_map(Value::as_str).collect();
            if required.is_empty() {
                continue;
            }
            let missing = required[drop % required.len()];
            let args: serde_json::Map<String, Value> = required
                .iter()
                .filter(|&&r| r != missing)
                .map(|&r| (r.to_string(), Value::Null))
                .collect();
            let outcome = s.call_tool(&reg, d.name, &Value::Object(args));
            prop_assert!(matches!(outcome, CallOutcome::InvalidParams(_)), "{} without {}", d.name, missing);
        }
    }
}

#[test]
fn tools_list_is_byte_stable() {
    let reg = Registry::standard();
    let mut s = Session::new(IfcModel::new_seeded("List", 8));
    let req = r#"{"jsonrpc":"2.0","id":1,"method":"tools/list"}"#;
    let a = handle_line(&reg, &mut s, req).unwrap();
    handle_line(&reg, &mut s, r#"{"jsonrpc":"2.0","id":2,"method":"tools/call","params":{"name":"create_wall","arguments":{"start":[0,0],"end":[4,0]}}}"#);
    assert_eq!(a, handle_line(&reg, &mut s, req).unwrap());
    let v: Value = serde_json::from_str(&a).unwrap();
    for t in v["result"]["tools"].as_array().unwrap() {
        assert_eq!(t["inputSchema"]["type"], "object");
        assert!(t["inputSchema"]["required"].is_array(), "{}", t["name"]);
    }
}
