//! Typed layer over the STEP entity graph: spatial structure, relationships,
//! property sets, classifications, owner history and per-session flags.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::geometry::{Placement, Point3};
use crate::step::{
    find_dangling, guid_decode, parse_step, write_step, EntityInstance, Guid, GuidGenerator,
    StepError, StepHeader, StepValue,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ModelError {
    #[error("unknown GUID {0}")]
    UnknownGuid(String),
    #[error("unknown attribute {0}")]
    UnknownAttribute(String),
    #[error("empty property set specification: {0}")]
    EmptySpec(String),
    #[error("spatial structure element {0} cannot be deleted")]
    CannotDeleteSpatial(String),
    #[error("{0} is not a product")]
    NotAProduct(String),
    #[error("unknown storey {0}")]
    UnknownStorey(String),
    #[error("model has no building storey")]
    NoStorey,
    #[error("invalid model: {0}")]
    Invalid(String),
    #[error(transparent)]
    Step(#[from] StepError),
}

/// `visible`/`selected` display state; kept in memory only.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SessionFlags {
    pub visible: bool,
    pub selected: bool,
}

impl Default for SessionFlags {
    fn default() -> Self {
        Self {
            visible: true,
            selected: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropertySpec {
    pub pset_name: String,
    pub properties: Vec<PropertyValue>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropertyValue {
    pub name: String,
    /// Typed scalar, e.g. `IFCREAL(0.25)` or `IFCLABEL('Mineral Wool')`.
    pub value: StepValue,
    pub unit: Option<String>,
}

impl PropertySpec {
    pub fn validate(&self) -> Result<(), ModelError> {
        if self.pset_name.trim().is_empty() {
            return Err(ModelError::EmptySpec("property set name is empty".into()));
        }
        if self.properties.is_empty() {
            return Err(ModelError::EmptySpec(format!("{} has no properties", self.pset_name)));
        }
        let mut seen = BTreeSet::new();
        for p in &self.properties {
            if p.name.trim().is_empty() {
                return Err(ModelError::EmptySpec("property name is empty".into()));
            }
            if !seen.insert(p.name.as_str()) {
                return Err(ModelError::EmptySpec(format!("duplicate property {}", p.name)));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AttributeChange {
    pub name: String,
    pub old: StepValue,
    pub new: StepValue,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EntityKind {
    Project,
    Spatial,
    Element,
    Type,
    Relationship,
    PropertyDefinition,
    Resource,
}

const NON_ROOTED: &[&str] = &[
    "IFCCLASSIFICATION",
    "IFCCLASSIFICATIONREFERENCE",
    "IFCPROPERTYSINGLEVALUE",
    "IFCPERSON",
    "IFCORGANIZATION",
    "IFCAPPLICATION",
    "IFCPERSONANDORGANIZATION",
    "IFCOWNERHISTORY",
    "IFCCARTESIANPOINT",
    "IFCDIRECTION",
];

const SPATIAL: &[&str] = &["IFCSITE", "IFCBUILDING", "IFCBUILDINGSTOREY", "IFCSPACE"];

/// IFC class names as written in the schema.
const CLASS_NAMES: &[&str] = &[
    "IfcProject",
    "IfcSite",
    "IfcBuilding",
    "IfcBuildingStorey",
    "IfcSpace",
    "IfcWall",
    "IfcWallStandardCase",
    "IfcWallType",
    "IfcSlab",
    "IfcSlabType",
    "IfcRoof",
    "IfcStair",
    "IfcStairFlight",
    "IfcColumn",
    "IfcBeam",
    "IfcMember",
    "IfcPlate",
    "IfcRailing",
    "IfcCovering",
    "IfcFooting",
    "IfcDoor",
    "IfcDoorType",
    "IfcDoorStyle",
    "IfcWindow",
    "IfcWindowType",
    "IfcWindowStyle",
    "IfcOpeningElement",
    "IfcBuildingElementProxy",
    "IfcFurnishingElement",
    "IfcFurniture",
    "IfcFlowTerminal",
    "IfcSpaceHeater",
    "IfcPropertySet",
    "IfcRelAggregates",
    "IfcRelContainedInSpatialStructure",
    "IfcRelVoidsElement",
    "IfcRelFillsElement",
    "IfcRelDefinesByProperties",
    "IfcRelDefinesByType",
    "IfcRelAssociatesClassification",
];

/// `IFCBUILDINGSTOREY` -> `IfcBuildingStorey`.
pub fn display_class(upper: &str) -> String {
    if let Some(n) = CLASS_NAMES.iter().find(|n| n.eq_ignore_ascii_case(upper)) {
        return n.to_string();
    }
    match upper.strip_prefix("IFC") {
        Some(rest) if !rest.is_empty() => {
            let mut s = String::from("Ifc");
            let mut chars = rest.chars();
            if let Some(c) = chars.next() {
                s.push(c.to_ascii_uppercase());
            }
            s.extend(chars.map(|c| c.to_ascii_lowercase()));
            s
        }
        _ => upper.to_string(),
    }
}

/// Inverse of [`display_class`]; also accepts already upper-case names.
pub fn schema_class(name: &str) -> String {
    name.to_ascii_uppercase()
}

fn is_rooted(e: &EntityInstance) -> bool {
    !NON_ROOTED.contains(&e.class_name.as_str())
        && e.attr(0).as_str().is_some_and(|s| guid_decode(s).is_ok())
}

pub fn entity_kind(e: &EntityInstance) -> EntityKind {
    let c = e.class_name.as_str();
    if !is_rooted(e) {
        return EntityKind::Resource;
    }
    if c == "IFCPROJECT" {
        EntityKind::Project
    } else if SPATIAL.contains(&c) {
        EntityKind::Spatial
    } else if c.starts_with("IFCREL") {
        EntityKind::Relationship
    } else if c == "IFCPROPERTYSET" || c == "IFCELEMENTQUANTITY" {
        EntityKind::PropertyDefinition
    } else if c.ends_with("TYPE") || c.ends_with("STYLE") {
        EntityKind::Type
    } else if e.attributes.len() >= 7 {
        EntityKind::Element
    } else {
        EntityKind::Resource
    }
}

/// Index of an editable attribute for a class, if the class has it.
pub fn attribute_index(e: &EntityInstance, name: &str) -> Option<usize> {
    let kind = entity_kind(e);
    match name {
        "Name" => Some(2),
        "Description" => Some(3),
        "ObjectType" => matches!(kind, EntityKind::Project | EntityKind::Spatial | EntityKind::Element)
            .then_some(4),
        "LongName" => match kind {
            EntityKind::Project => Some(5),
            EntityKind::Spatial => Some(7),
            _ => None,
        },
        "Tag" => matches!(kind, EntityKind::Element | EntityKind::Type).then_some(7),
        _ => None,
    }
    .filter(|&i| i < e.attributes.len())
}

fn guid_text(e: &EntityInstance) -> Option<&str> {
    e.attr(0).as_str()
}

/// Time stamp written into the header of seeded (reproducible) models.
pub const SEEDED_TIME_STAMP: &str = "2000-01-01T00:00:00";

#[derive(Debug)]
pub struct IfcModel {
    entities: BTreeMap<u64, EntityInstance>,
    next_id: u64,
    by_class: HashMap<String, BTreeSet<u64>>,
    by_guid: BTreeMap<Guid, u64>,
    project: u64,
    site: Option<u64>,
    building: Option<u64>,
    storeys: Vec<u64>,
    context: Option<u64>,
    flags: BTreeMap<u64, SessionFlags>,
    dirty: bool,
    guids: GuidGenerator,
    header: StepHeader,
}

impl IfcModel {
    /// Fresh project with site, building, one storey, metre units and a
    /// 3D representation context.
    pub fn new(project_name: &str) -> Self {
        Self::with_generator(project_name, GuidGenerator::random())
    }

    pub fn new_seeded(project_name: &str, seed: u64) -> Self {
        Self::with_generator(project_name, GuidGenerator::seeded(seed))
    }

    pub fn with_generator(project_name: &str, guids: GuidGenerator) -> Self {
        let header = StepHeader::ifc4(format!("{project_name}.ifc"), "");
        let mut m = IfcModel {
            entities: BTreeMap::new(),
            next_id: 1,
            by_class: HashMap::new(),
            by_guid: BTreeMap::new(),
            project: 0,
            site: None,
            building: None,
            storeys: Vec::new(),
            context: None,
            flags: BTreeMap::new(),
            dirty: false,
            guids,
            header,
        };
        let origin = m.add("IFCCARTESIANPOINT", vec![StepValue::reals(&[0.0, 0.0, 0.0])]);
        let wcs = m.add("IFCAXIS2PLACEMENT3D", vec![StepValue::Ref(origin), StepValue::Unset, StepValue::Unset]);
        let ctx = m.add(
            "IFCGEOMETRICREPRESENTATIONCONTEXT",
            vec![
                StepValue::Unset,
                StepValue::str("Model"),
                StepValue::Integer(3),
                StepValue::Real(1e-5),
                StepValue::Ref(wcs),
                StepValue::Unset,
            ],
        );
        m.context = Some(ctx);
        let unit = |m: &mut IfcModel, kind: &str, prefix: Option<&str>, name: &str| {
            m.add(
                "IFCSIUNIT",
                vec![
                    StepValue::Derived,
                    StepValue::enumeration(kind),
                    prefix.map_or(StepValue::Unset, StepValue::enumeration),
                    StepValue::enumeration(name),
                ],
            )
        };
        let units = [
            unit(&mut m, "LENGTHUNIT", None, "METRE"),
            unit(&mut m, "AREAUNIT", None, "SQUARE_METRE"),
            unit(&mut m, "VOLUMEUNIT", None, "CUBIC_METRE"),
            unit(&mut m, "PLANEANGLEUNIT", None, "RADIAN"),
        ];
        let assignment = m.add("IFCUNITASSIGNMENT", vec![StepValue::refs(units)]);
        let g = m.fresh_guid();
        m.project = m.add(
            "IFCPROJECT",
            vec![
                g,
                StepValue::Unset,
                StepValue::str(project_name),
                StepValue::Unset,
                StepValue::Unset,
                StepValue::Unset,
                StepValue::Unset,
                StepValue::refs([ctx]),
                StepValue::Ref(assignment),
            ],
        );
        let site_pl = m.add_local_placement(None, &Placement::identity());
        let g = m.fresh_guid();
        let site = m.add(
            "IFCSITE",
            vec![
                g,
                StepValue::Unset,
                StepValue::str("My Site"),
                StepValue::Unset,
                StepValue::Unset,
                StepValue::Ref(site_pl),
                StepValue::Unset,
                StepValue::Unset,
                StepValue::enumeration("ELEMENT"),
                StepValue::Unset,
                StepValue::Unset,
                StepValue::Unset,
                StepValue::Unset,
                StepValue::Unset,
            ],
        );
        m.site = Some(site);
        let building_pl = m.add_local_placement(Some(site_pl), &Placement::identity());
        let g = m.fresh_guid();
        let building = m.add(
            "IFCBUILDING",
            vec![
                g,
                StepValue::Unset,
                StepValue::str("My Building"),
                StepValue::Unset,
                StepValue::Unset,
                StepValue::Ref(building_pl),
                StepValue::Unset,
                StepValue::Unset,
                StepValue::enumeration("ELEMENT"),
                StepValue::Unset,
                StepValue::Unset,
                StepValue::Unset,
            ],
        );
        m.building = Some(building);
        let project = m.project;
        m.aggregate(project, site);
        m.aggregate(site, building);
        m.add_storey("My Storey", 0.0)
            .expect("fresh model has a building");
        m.dirty = false;
        m
    }

    /// Loads a model from STEP bytes. The file must contain an IFCPROJECT.
    pub fn from_step(bytes: &[u8], guids: GuidGenerator) -> Result<Self, ModelError> {
        let (header, entities) = parse_step(bytes)?;
        let next_id = entities.keys().next_back().map_or(1, |k| k + 1);
        let mut m = IfcModel {
            entities,
            next_id,
            by_class: HashMap::new(),
            by_guid: BTreeMap::new(),
            project: 0,
            site: None,
            building: None,
            storeys: Vec::new(),
            context: None,
            flags: BTreeMap::new(),
            dirty: false,
            guids,
            header,
        };
        m.rebuild_indexes();
        let guids: Vec<Guid> = m.by_guid.keys().copied().collect();
        for g in guids {
            m.guids.reserve(g);
        }
        m.project = *m
            .ids_of_class("IFCPROJECT")
            .first()
            .ok_or_else(|| ModelError::Invalid("no IFCPROJECT".into()))?;
        m.context = m.ids_of_class("IFCGEOMETRICREPRESENTATIONCONTEXT").first().copied();
        m.site = m.aggregated(m.project).into_iter().find(|&id| m.class_of(id) == Some("IFCSITE"));
        let parent = m.site.unwrap_or(m.project);
        m.building = m.aggregated(parent).into_iter().find(|&id| m.class_of(id) == Some("IFCBUILDING"));
        if let Some(b) = m.building {
            let mut storeys: Vec<u64> = m
                .aggregated(b)
                .into_iter()
                .filter(|&id| m.class_of(id) == Some("IFCBUILDINGSTOREY"))
                .collect();
            storeys.sort_by(|a, b| {
                m.storey_elevation(*a)
                    .total_cmp(&m.storey_elevation(*b))
                    .then(a.cmp(b))
            });
            m.storeys = storeys;
        }
        for id in m.ids_by_kind(EntityKind::Type) {
            m.flags.insert(id, SessionFlags { visible: false, selected: false });
        }
        Ok(m)
    }

    pub fn to_step(&mut self) -> Result<Vec<u8>, ModelError> {
        self.header.time_stamp = if self.guids.is_seeded() {
            SEEDED_TIME_STAMP.to_string()
        } else {
            chrono::Utc::now().format("%Y-%m-%dT%H:%M:%S").to_string()
        };
        Ok(write_step(&self.header, &self.entities)?)
    }

    pub fn header(&self) -> &StepHeader {
        &self.header
    }

    /// Replaces the GUID source, e.g. to keep a seeded stream after reloading.
    pub fn set_generator(&mut self, mut guids: GuidGenerator) {
        for g in self.by_guid.keys() {
            guids.reserve(*g);
        }
        self.guids = guids;
    }

    pub fn take_generator(&mut self) -> GuidGenerator {
        std::mem::take(&mut self.guids)
    }

    pub fn is_seeded(&self) -> bool {
        self.guids.is_seeded()
    }

    // ---- raw graph access ----

    pub fn entities(&self) -> &BTreeMap<u64, EntityInstance> {
        &self.entities
    }

    pub fn get(&self, id: u64) -> Option<&EntityInstance> {
        self.entities.get(&id)
    }

    pub fn class_of(&self, id: u64) -> Option<&str> {
        self.entities.get(&id).map(|e| e.class_name.as_str())
    }

    pub fn len(&self) -> usize {
        self.entities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entities.is_empty()
    }

    pub fn is_dirty(&self) -> bool {
        self.dirty
    }

    pub fn mark_clean(&mut self) {
        self.dirty = false;
    }

    pub fn mark_dirty(&mut self) {
        self.dirty = true;
    }

    pub fn fresh_guid(&mut self) -> StepValue {
        StepValue::String(self.guids.fresh().to_string())
    }

    /// Appends an entity and returns its id.
    pub fn add(&mut self, class: &str, attributes: Vec<StepValue>) -> u64 {
        let id = self.next_id;
        self.next_id += 1;
        let e = EntityInstance::new(id, class, attributes);
        self.index(&e);
        self.entities.insert(id, e);
        self.dirty = true;
        id
    }

    /// Replaces one attribute in place.
    pub fn set_attr(&mut self, id: u64, index: usize, value: StepValue) {
        if let Some(e) = self.entities.get_mut(&id) {
            if e.attributes.len() <= index {
                e.attributes.resize(index + 1, StepValue::Unset);
            }
            e.attributes[index] = value;
            self.dirty = true;
        }
    }

    fn remove_raw(&mut self, id: u64) -> Option<EntityInstance> {
        let e = self.entities.remove(&id)?;
        if let Some(set) = self.by_class.get_mut(&e.class_name) {
            set.remove(&id);
            if set.is_empty() {
                self.by_class.remove(&e.class_name);
            }
        }
        if is_rooted(&e) {
            if let Some(g) = guid_text(&e).and_then(|s| s.parse::<Guid>().ok()) {
                if self.by_guid.get(&g) == Some(&id) {
                    self.by_guid.remove(&g);
                }
            }
        }
        self.flags.remove(&id);
        self.dirty = true;
        Some(e)
    }

    fn index(&mut self, e: &EntityInstance) {
        self.by_class.entry(e.class_name.clone()).or_default().insert(e.id);
        if is_rooted(e) {
            if let Some(g) = guid_text(e).and_then(|s| s.parse::<Guid>().ok()) {
                self.by_guid.insert(g, e.id);
            }
        }
    }

    fn rebuild_indexes(&mut self) {
        self.by_class.clear();
        self.by_guid.clear();
        let all: Vec<EntityInstance> = self.entities.values().cloned().collect();
        for e in &all {
            self.index(e);
        }
    }

    /// Compares the live indexes with a rebuild from the entity map and
    /// scans for dangling references.
    pub fn check_integrity(&self) -> Result<(), String> {
        if let Some(id) = find_dangling(&self.entities) {
            return Err(format!("dangling reference #{id}"));
        }
        let mut by_class: HashMap<String, BTreeSet<u64>> = HashMap::new();
        let mut by_guid = BTreeMap::new();
        for e in self.entities.values() {
            by_class.entry(e.class_name.clone()).or_default().insert(e.id);
            if is_rooted(e) {
                let g: Guid = guid_text(e).unwrap().parse().unwrap();
                if by_guid.insert(g, e.id).is_some() {
                    return Err(format!("duplicate GlobalId {g}"));
                }
            }
        }
        if by_class != self.by_class {
            return Err("class index out of date".into());
        }
        if by_guid != self.by_guid {
            return Err("GUID index out of date".into());
        }
        let mut contained = BTreeSet::new();
        for rel in self.ids_of_class("IFCRELCONTAINEDINSPATIALSTRUCTURE") {
            for r in self.entities[&rel].attr(4).as_list().unwrap_or(&[]) {
                if let Some(id) = r.as_ref_id() {
                    if !contained.insert(id) {
                        return Err(format!("#{id} is contained twice"));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn ids_of_class(&self, class: &str) -> Vec<u64> {
        self.by_class
            .get(class)
            .map(|s| s.iter().copied().collect())
            .unwrap_or_default()
    }

    pub fn ids_by_kind(&self, kind: EntityKind) -> Vec<u64> {
        self.by_guid
            .values()
            .copied()
            .filter(|id| entity_kind(&self.entities[id]) == kind)
            .collect::<BTreeSet<u64>>()
            .into_iter()
            .collect()
    }

    pub fn guid_count(&self) -> usize {
        self.by_guid.len()
    }

    pub fn id_of(&self, guid: &str) -> Result<u64, ModelError> {
        guid.parse::<Guid>()
            .ok()
            .and_then(|g| self.by_guid.get(&g).copied())
            .ok_or_else(|| ModelError::UnknownGuid(guid.to_string()))
    }

    pub fn guid_of(&self, id: u64) -> Option<String> {
        self.entities
            .get(&id)
            .filter(|e| is_rooted(e))
            .and_then(|e| guid_text(e).map(str::to_string))
    }

    pub fn name_of(&self, id: u64) -> Option<String> {
        self.entities.get(&id).and_then(|e| e.attr(2).as_str().map(str::to_string))
    }

    pub fn kind_of(&self, id: u64) -> Option<EntityKind> {
        self.entities.get(&id).map(entity_kind)
    }

    /// Ids of entities holding a reference to `id`.
    pub fn referrers(&self, id: u64) -> Vec<u64> {
        self.entities
            .values()
            .filter(|e| e.attributes.iter().any(|a| a.references(id)))
            .map(|e| e.id)
            .collect()
    }

    // ---- spatial structure ----

    pub fn project(&self) -> u64 {
        self.project
    }

    pub fn site(&self) -> Option<u64> {
        self.site
    }

    pub fn building(&self) -> Option<u64> {
        self.building
    }

    /// Storeys ordered by elevation.
    pub fn storeys(&self) -> &[u64] {
        &self.storeys
    }

    pub fn context(&self) -> Option<u64> {
        self.context
    }

    /// Body representation context, created on demand for loaded files
    /// that lack one.
    pub fn ensure_context(&mut self) -> u64 {
        if let Some(c) = self.context {
            return c;
        }
        let origin = self.add("IFCCARTESIANPOINT", vec![StepValue::reals(&[0.0, 0.0, 0.0])]);
        let wcs = self.add("IFCAXIS2PLACEMENT3D", vec![StepValue::Ref(origin), StepValue::Unset, StepValue::Unset]);
        let ctx = self.add(
            "IFCGEOMETRICREPRESENTATIONCONTEXT",
            vec![
                StepValue::Unset,
                StepValue::str("Model"),
                StepValue::Integer(3),
                StepValue::Real(1e-5),
                StepValue::Ref(wcs),
                StepValue::Unset,
            ],
        );
        self.context = Some(ctx);
        ctx
    }

    pub fn spatial_chain(&self) -> Vec<u64> {
        let mut out = vec![self.project];
        out.extend(self.site);
        out.extend(self.building);
        out.extend(self.storeys.iter().copied());
        out
    }

    fn aggregate(&mut self, parent: u64, child: u64) {
        let existing = self.ids_of_class("IFCRELAGGREGATES").into_iter().find(|r| {
            self.entities[r].attr(4).as_ref_id() == Some(parent)
        });
        match existing {
            Some(rel) => {
                let mut list = self.entities[&rel].attr(5).as_list().unwrap_or(&[]).to_vec();
                list.push(StepValue::Ref(child));
                self.set_attr(rel, 5, StepValue::List(list));
            }
            None => {
                let g = self.fresh_guid();
                self.add(
                    "IFCRELAGGREGATES",
                    vec![
                        g,
                        StepValue::Unset,
                        StepValue::Unset,
                        StepValue::Unset,
                        StepValue::Ref(parent),
                        StepValue::refs([child]),
                    ],
                );
            }
        }
    }

    fn aggregated(&self, parent: u64) -> Vec<u64> {
        let mut out = Vec::new();
        for rel in self.ids_of_class("IFCRELAGGREGATES") {
            let e = &self.entities[&rel];
            if e.attr(4).as_ref_id() == Some(parent) {
                if let Some(list) = e.attr(5).as_list() {
                    out.extend(list.iter().filter_map(StepValue::as_ref_id));
                }
            }
        }
        out
    }

    pub fn storey_elevation(&self, storey: u64) -> f64 {
        self.entities
            .get(&storey)
            .and_then(|e| e.attr(9).as_f64())
            .unwrap_or_else(|| self.world_placement(storey).origin.z)
    }

    /// Adds a storey to the building and returns its id.
    pub fn add_storey(&mut self, name: &str, elevation: f64) -> Result<u64, ModelError> {
        let building = self
            .building
            .ok_or_else(|| ModelError::Invalid("model has no building".into()))?;
        if !elevation.is_finite() {
            return Err(ModelError::Invalid("storey elevation must be finite".into()));
        }
        let parent_pl = self.entities[&building].attr(5).as_ref_id();
        let pl = self.add_local_placement(parent_pl, &Placement::at(Point3::new(0.0, 0.0, elevation)));
        let g = self.fresh_guid();
        let id = self.add(
            "IFCBUILDINGSTOREY",
            vec![
                g,
                StepValue::Unset,
                StepValue::str(name),
                StepValue::Unset,
                StepValue::Unset,
                StepValue::Ref(pl),
                StepValue::Unset,
                StepValue::Unset,
                StepValue::enumeration("ELEMENT"),
                StepValue::Real(elevation),
            ],
        );
        self.aggregate(building, id);
        self.storeys.push(id);
        let mut storeys = std::mem::take(&mut self.storeys);
        storeys.sort_by(|a, b| {
            self.storey_elevation(*a)
                .total_cmp(&self.storey_elevation(*b))
                .then(a.cmp(b))
        });
        self.storeys = storeys;
        Ok(id)
    }

    /// The lowest storey, used when a tool call names none.
    pub fn default_storey(&self) -> Result<u64, ModelError> {
        self.storeys.first().copied().ok_or(ModelError::NoStorey)
    }

    pub fn resolve_storey(&self, guid: Option<&str>) -> Result<u64, ModelError> {
        match guid {
            None => self.default_storey(),
            Some(g) => {
                let id = self.id_of(g).map_err(|_| ModelError::UnknownStorey(g.to_string()))?;
                if self.storeys.contains(&id) {
                    Ok(id)
                } else {
                    Err(ModelError::UnknownStorey(g.to_string()))
                }
            }
        }
    }

    /// Highest storey whose elevation is at or below `z` (lowest storey if none).
    pub fn storey_at_or_below(&self, z: f64) -> Result<u64, ModelError> {
        let first = self.default_storey()?;
        Ok(self
            .storeys
            .iter()
            .copied()
            .rfind(|&s| self.storey_elevation(s) <= z + crate::geometry::TOLERANCE)
            .unwrap_or(first))
    }

    /// Places `product` in `storey`, reusing the storey's containment relationship.
    pub fn contain(&mut self, product: u64, storey: u64) {
        let existing = self
            .ids_of_class("IFCRELCONTAINEDINSPATIALSTRUCTURE")
            .into_iter()
            .find(|r| self.entities[r].attr(5).as_ref_id() == Some(storey));
        match existing {
            Some(rel) => {
                let mut list = self.entities[&rel].attr(4).as_list().unwrap_or(&[]).to_vec();
                list.push(StepValue::Ref(product));
                self.set_attr(rel, 4, StepValue::List(list));
            }
            None => {
                let g = self.fresh_guid();
                self.add(
                    "IFCRELCONTAINEDINSPATIALSTRUCTURE",
                    vec![
                        g,
                        StepValue::Unset,
                        StepValue::Unset,
                        StepValue::Unset,
                        StepValue::refs([product]),
                        StepValue::Ref(storey),
                    ],
                );
            }
        }
    }

    pub fn containing_storey(&self, product: u64) -> Option<u64> {
        self.ids_of_class("IFCRELCONTAINEDINSPATIALSTRUCTURE")
            .into_iter()
            .find(|r| self.entities[r].attr(4).references(product))
            .and_then(|r| self.entities[&r].attr(5).as_ref_id())
    }

    // ---- placements ----

    pub fn add_point3(&mut self, p: Point3) -> u64 {
        self.add("IFCCARTESIANPOINT", vec![StepValue::reals(&p.to_array())])
    }

    pub fn add_direction3(&mut self, d: Point3) -> u64 {
        self.add("IFCDIRECTION", vec![StepValue::reals(&d.to_array())])
    }

    pub fn add_axis_placement(&mut self, p: &Placement) -> u64 {
        let loc = self.add_point3(p.origin);
        let (axis, refd) = if p.is_identity_rotation() {
            (StepValue::Unset, StepValue::Unset)
        } else {
            (
                StepValue::Ref(self.add_direction3(p.z_axis)),
                StepValue::Ref(self.add_direction3(p.x_axis)),
            )
        };
        self.add("IFCAXIS2PLACEMENT3D", vec![StepValue::Ref(loc), axis, refd])
    }

    pub fn add_local_placement(&mut self, relative_to: Option<u64>, p: &Placement) -> u64 {
        let axis = self.add_axis_placement(p);
        self.add(
            "IFCLOCALPLACEMENT",
            vec![relative_to.map_or(StepValue::Unset, StepValue::Ref), StepValue::Ref(axis)],
        )
    }

    fn read_point3(&self, id: Option<u64>, default: Point3) -> Point3 {
        let Some(e) = id.and_then(|i| self.entities.get(&i)) else {
            return default;
        };
        let c: Vec<f64> = e
            .attr(0)
            .as_list()
            .unwrap_or(&[])
            .iter()
            .filter_map(StepValue::as_f64)
            .collect();
        Point3::new(
            c.first().copied().unwrap_or(0.0),
            c.get(1).copied().unwrap_or(0.0),
            c.get(2).copied().unwrap_or(0.0),
        )
    }

    /// Reads an IFCAXIS2PLACEMENT3D, orthonormalising its axes.
    pub fn read_axis_placement(&self, id: u64) -> Placement {
        let Some(e) = self.entities.get(&id) else {
            return Placement::identity();
        };
        let origin = self.read_point3(e.attr(0).as_ref_id(), Point3::default());
        let z = self
            .read_point3(e.attr(1).as_ref_id(), Point3::new(0.0, 0.0, 1.0))
            .normalized()
            .unwrap_or(Point3::new(0.0, 0.0, 1.0));
        let xr = self.read_point3(e.attr(2).as_ref_id(), Point3::new(1.0, 0.0, 0.0));
        let x = xr
            .sub(z.scale(xr.dot(z)))
            .normalized()
            .or_else(|| {
                let alt = if z.x.abs() < 0.9 { Point3::new(1.0, 0.0, 0.0) } else { Point3::new(0.0, 1.0, 0.0) };
                alt.sub(z.scale(alt.dot(z))).normalized()
            })
            .unwrap_or(Point3::new(1.0, 0.0, 0.0));
        Placement {
            origin,
            z_axis: z,
            x_axis: x,
        }
    }

    /// World frame of an IFCLOCALPLACEMENT, following the relative chain.
    pub fn resolve_local_placement(&self, id: u64) -> Placement {
        let mut chain = Vec::new();
        let mut cur = Some(id);
        while let Some(c) = cur {
            let Some(e) = self.entities.get(&c) else { break };
            if e.class_name != "IFCLOCALPLACEMENT" || chain.len() > 64 {
                break;
            }
            chain.push(e.attr(1).as_ref_id().map(|a| self.read_axis_placement(a)).unwrap_or_else(Placement::identity));
            cur = e.attr(0).as_ref_id();
        }
        chain
            .into_iter()
            .rev()
            .fold(Placement::identity(), |parent, local| local.within(&parent))
    }

    /// World frame of a product or spatial element (identity if it has none).
    pub fn world_placement(&self, id: u64) -> Placement {
        match self.entities.get(&id) {
            Some(e) if matches!(entity_kind(e), EntityKind::Spatial | EntityKind::Element) => e
                .attr(5)
                .as_ref_id()
                .map(|p| self.resolve_local_placement(p))
                .unwrap_or_else(Placement::identity),
            _ => Placement::identity(),
        }
    }

    pub fn object_placement_id(&self, id: u64) -> Option<u64> {
        self.entities.get(&id).and_then(|e| e.attr(5).as_ref_id())
    }

    // ---- products ----

    /// Next free "{Prefix}_{NNN}" name for a class, e.g. `Wall_001`.
    pub fn auto_name(&self, class: &str) -> String {
        let prefix = display_class(class);
        let prefix = prefix.strip_prefix("Ifc").unwrap_or(&prefix).to_string();
        let max = self
            .ids_of_class(class)
            .iter()
            .filter_map(|id| self.name_of(*id))
            .filter_map(|n| {
                n.strip_prefix(&prefix)
                    .and_then(|r| r.strip_prefix('_'))
                    .and_then(|d| d.parse::<u64>().ok())
            })
            .max()
            .unwrap_or(0);
        format!("{prefix}_{:03}", max + 1)
    }

    /// Creates a product: GlobalId, placement relative to `parent_placement`,
    /// optional body, trailing class-specific attributes, and containment.
    pub fn add_product(&mut self, spec: ProductSpec) -> u64 {
        let pl = self.add_local_placement(spec.parent_placement, &spec.placement);
        let g = self.fresh_guid();
        let name = spec.name.unwrap_or_else(|| self.auto_name(&spec.class));
        let mut attrs = vec![
            g,
            StepValue::Unset,
            StepValue::str(name),
            StepValue::Unset,
            StepValue::Unset,
            StepValue::Ref(pl),
            spec.representation.map_or(StepValue::Unset, StepValue::Ref),
            StepValue::Unset,
        ];
        attrs.extend(spec.extra);
        let id = self.add(&spec.class, attrs);
        if let Some(s) = spec.storey {
            self.contain(id, s);
        }
        id
    }

    /// Products (elements, not spatial or types) in creation order.
    pub fn products(&self) -> Vec<u64> {
        self.ids_by_kind(EntityKind::Element)
    }

    pub fn flags(&self, id: u64) -> SessionFlags {
        self.flags.get(&id).copied().unwrap_or_default()
    }

    pub fn set_flags(&mut self, id: u64, flags: SessionFlags) {
        self.flags.insert(id, flags);
    }

    // ---- semantic edits ----

    pub fn edit_attributes(
        &mut self,
        guid: &str,
        updates: &[(String, StepValue)],
    ) -> Result<Vec<AttributeChange>, ModelError> {
        let id = self.id_of(guid)?;
        let e = &self.entities[&id];
        let mut plan = Vec::with_capacity(updates.len());
        for (name, value) in updates {
            let idx = attribute_index(e, name).ok_or_else(|| ModelError::UnknownAttribute(name.clone()))?;
            plan.push((name.clone(), idx, value.clone()));
        }
        let mut changes = Vec::with_capacity(plan.len());
        for (name, idx, value) in plan {
            let old = self.entities[&id].attr(idx).clone();
            self.set_attr(id, idx, value.clone());
            changes.push(AttributeChange { name, old, new: value });
        }
        self.dirty = true;
        Ok(changes)
    }

    fn require_rooted_object(&self, guid: &str) -> Result<u64, ModelError> {
        let id = self.id_of(guid)?;
        match entity_kind(&self.entities[&id]) {
            EntityKind::Element | EntityKind::Spatial | EntityKind::Project | EntityKind::Type => Ok(id),
            _ => Err(ModelError::NotAProduct(guid.to_string())),
        }
    }

    /// Property sets attached to an element: `(pset id, name)`.
    pub fn psets_of(&self, id: u64) -> Vec<(u64, String)> {
        let mut out = Vec::new();
        for rel in self.ids_of_class("IFCRELDEFINESBYPROPERTIES") {
            let r = &self.entities[&rel];
            if !r.attr(4).references(id) {
                continue;
            }
            if let Some(p) = r.attr(5).as_ref_id() {
                if let Some(ps) = self.entities.get(&p) {
                    if ps.class_name == "IFCPROPERTYSET" {
                        out.push((p, ps.attr(2).as_str().unwrap_or("").to_string()));
                    }
                }
            }
        }
        out
    }

    /// `(property id, name, nominal value)` entries of a property set.
    pub fn pset_properties(&self, pset: u64) -> Vec<(u64, String, StepValue)> {
        let Some(ps) = self.entities.get(&pset) else {
            return Vec::new();
        };
        ps.attr(4)
            .as_list()
            .unwrap_or(&[])
            .iter()
            .filter_map(StepValue::as_ref_id)
            .filter_map(|pid| {
                let p = self.entities.get(&pid)?;
                (p.class_name == "IFCPROPERTYSINGLEVALUE").then(|| {
                    (pid, p.attr(0).as_str().unwrap_or("").to_string(), p.attr(2).clone())
                })
            })
            .collect()
    }

    pub fn pset_value(&self, id: u64, pset: &str, prop: &str) -> Option<StepValue> {
        self.psets_of(id)
            .into_iter()
            .filter(|(_, n)| n == pset)
            .flat_map(|(p, _)| self.pset_properties(p))
            .find(|(_, n, _)| n == prop)
            .map(|(_, _, v)| v)
    }

    fn unit_ref(&mut self, unit: &Option<String>) -> StepValue {
        match unit {
            None => StepValue::Unset,
            Some(u) => {
                let existing = self.ids_of_class("IFCCONTEXTDEPENDENTUNIT").into_iter().find(|id| {
                    self.entities[id].attr(2).as_str() == Some(u.as_str())
                });
                let id = existing.unwrap_or_else(|| {
                    let dims = self.add(
                        "IFCDIMENSIONALEXPONENTS",
                        vec![StepValue::Integer(0); 7],
                    );
                    self.add(
                        "IFCCONTEXTDEPENDENTUNIT",
                        vec![StepValue::Ref(dims), StepValue::enumeration("USERDEFINED"), StepValue::str(u)],
                    )
                });
                StepValue::Ref(id)
            }
        }
    }

    /// Attaches a property set, merging into an existing one of the same name.
    /// Returns the property set's GUID.
    pub fn add_property_set(&mut self, guid: &str, spec: &PropertySpec) -> Result<String, ModelError> {
        spec.validate()?;
        let id = self.require_rooted_object(guid)?;
        let existing = self
            .psets_of(id)
            .into_iter()
            .find(|(_, n)| *n == spec.pset_name)
            .map(|(p, _)| p);
        let pset = match existing {
            Some(p) => p,
            None => {
                let g = self.fresh_guid();
                let p = self.add(
                    "IFCPROPERTYSET",
                    vec![g, StepValue::Unset, StepValue::str(&spec.pset_name), StepValue::Unset, StepValue::List(vec![])],
                );
                let g = self.fresh_guid();
                self.add(
                    "IFCRELDEFINESBYPROPERTIES",
                    vec![
                        g,
                        StepValue::Unset,
                        StepValue::Unset,
                        StepValue::Unset,
                        StepValue::refs([id]),
                        StepValue::Ref(p),
                    ],
                );
                p
            }
        };
        let current = self.pset_properties(pset);
        let mut list = self.entities[&pset].attr(4).as_list().unwrap_or(&[]).to_vec();
        for prop in &spec.properties {
            let unit = self.unit_ref(&prop.unit);
            match current.iter().find(|(_, n, _)| *n == prop.name) {
                Some((pid, _, _)) => {
                    self.set_attr(*pid, 2, prop.value.clone());
                    self.set_attr(*pid, 3, unit);
                }
                None => {
                    let pid = self.add(
                        "IFCPROPERTYSINGLEVALUE",
                        vec![StepValue::str(&prop.name), StepValue::Unset, prop.value.clone(), unit],
                    );
                    list.push(StepValue::Ref(pid));
                }
            }
        }
        self.set_attr(pset, 4, StepValue::List(list));
        Ok(self.guid_of(pset).unwrap())
    }

    /// `(system, code)` pairs associated with an element.
    pub fn classifications_of(&self, id: u64) -> Vec<(String, String)> {
        let mut out = Vec::new();
        for rel in self.ids_of_class("IFCRELASSOCIATESCLASSIFICATION") {
            let r = &self.entities[&rel];
            if !r.attr(4).references(id) {
                continue;
            }
            let Some(reference) = r.attr(5).as_ref_id().and_then(|x| self.entities.get(&x)) else {
                continue;
            };
            let code = reference.attr(1).as_str().unwrap_or("").to_string();
            let system = reference
                .attr(3)
                .as_ref_id()
                .and_then(|c| self.entities.get(&c))
                .and_then(|c| c.attr(3).as_str())
                .unwrap_or("")
                .to_string();
            out.push((system, code));
        }
        out
    }

    /// Associates a classification code. One IFCCLASSIFICATION per system and
    /// one reference + association per code are shared between elements.
    /// Returns the association's GUID.
    pub fn add_classification(&mut self, guid: &str, system: &str, code: &str) -> Result<String, ModelError> {
        let id = self.require_rooted_object(guid)?;
        if system.trim().is_empty() || code.trim().is_empty() {
            return Err(ModelError::Invalid("classification system and code must be non-empty".into()));
        }
        let classification = self
            .ids_of_class("IFCCLASSIFICATION")
            .into_iter()
            .find(|c| self.entities[c].attr(3).as_str() == Some(system))
            .unwrap_or_else(|| {
                self.add(
                    "IFCCLASSIFICATION",
                    vec![
                        StepValue::Unset,
                        StepValue::Unset,
                        StepValue::Unset,
                        StepValue::str(system),
                        StepValue::Unset,
                        StepValue::Unset,
                        StepValue::Unset,
                    ],
                )
            });
        let reference = self
            .ids_of_class("IFCCLASSIFICATIONREFERENCE")
            .into_iter()
            .find(|r| {
                let e = &self.entities[r];
                e.attr(1).as_str() == Some(code) && e.attr(3).as_ref_id() == Some(classification)
            })
            .unwrap_or_else(|| {
                self.add(
                    "IFCCLASSIFICATIONREFERENCE",
                    vec![
                        StepValue::Unset,
                        StepValue::str(code),
                        StepValue::Unset,
                        StepValue::Ref(classification),
                        StepValue::Unset,
                        StepValue::Unset,
                    ],
                )
            });
        let rel = self
            .ids_of_class("IFCRELASSOCIATESCLASSIFICATION")
            .into_iter()
            .find(|r| self.entities[r].attr(5).as_ref_id() == Some(reference));
        let rel = match rel {
            Some(r) => {
                if !self.entities[&r].attr(4).references(id) {
                    let mut list = self.entities[&r].attr(4).as_list().unwrap_or(&[]).to_vec();
                    list.push(StepValue::Ref(id));
                    self.set_attr(r, 4, StepValue::List(list));
                }
                r
            }
            None => {
                let g = self.fresh_guid();
                self.add(
                    "IFCRELASSOCIATESCLASSIFICATION",
                    vec![
                        g,
                        StepValue::Unset,
                        StepValue::str(format!("{system}: {code}")),
                        StepValue::Unset,
                        StepValue::refs([id]),
                        StepValue::Ref(reference),
                    ],
                )
            }
        };
        Ok(self.guid_of(rel).unwrap())
    }

    /// Attaches one shared IFCOWNERHISTORY to every listed element. Either
    /// all GUIDs resolve or nothing changes.
    pub fn set_owner_history(&mut self, guids: &[String], user: &str, timestamp: i64) -> Result<usize, ModelError> {
        let ids = guids
            .iter()
            .map(|g| self.id_of(g))
            .collect::<Result<Vec<u64>, _>>()?;
        if ids.is_empty() {
            return Ok(0);
        }
        let person = self.add(
            "IFCPERSON",
            vec![
                StepValue::str(user),
                StepValue::str(user),
                StepValue::Unset,
                StepValue::Unset,
                StepValue::Unset,
                StepValue::Unset,
                StepValue::Unset,
                StepValue::Unset,
            ],
        );
        let org = self.add(
            "IFCORGANIZATION",
            vec![StepValue::Unset, StepValue::str("ifc-mcp"), StepValue::Unset, StepValue::Unset, StepValue::Unset],
        );
        let po = self.add("IFCPERSONANDORGANIZATION", vec![StepValue::Ref(person), StepValue::Ref(org), StepValue::Unset]);
        let app = self.add(
            "IFCAPPLICATION",
            vec![
                StepValue::Ref(org),
                StepValue::str(env!("CARGO_PKG_VERSION")),
                StepValue::str("ifc-mcp"),
                StepValue::str("ifc-mcp"),
            ],
        );
        let history = self.add(
            "IFCOWNERHISTORY",
            vec![
                StepValue::Ref(po),
                StepValue::Ref(app),
                StepValue::Unset,
                StepValue::enumeration("MODIFIED"),
                StepValue::Integer(timestamp),
                StepValue::Ref(po),
                StepValue::Ref(app),
                StepValue::Integer(timestamp),
            ],
        );
        let mut replaced = Vec::new();
        for &id in &ids {
            if let Some(old) = self.entities[&id].attr(1).as_ref_id() {
                replaced.push(old);
            }
            self.set_attr(id, 1, StepValue::Ref(history));
        }
        self.collect_garbage(replaced);
        let unique: BTreeSet<u64> = ids.into_iter().collect();
        Ok(unique.len())
    }

    /// `(user, creation date)` of an element's owner history.
    pub fn owner_history_of(&self, id: u64) -> Option<(String, i64)> {
        let h = self.entities.get(&id)?.attr(1).as_ref_id()?;
        let h = self.entities.get(&h)?;
        let po = self.entities.get(&h.attr(0).as_ref_id()?)?;
        let person = self.entities.get(&po.attr(0).as_ref_id()?)?;
        let user = person
            .attr(1)
            .as_str()
            .or_else(|| person.attr(0).as_str())
            .unwrap_or("")
            .to_string();
        let date = h.attr(7).as_f64().unwrap_or(0.0) as i64;
        Some((user, date))
    }

    // ---- deletion ----

    fn rel_targets(&self, class: &str, from_attr: usize, id: u64, to_attr: usize) -> Vec<u64> {
        self.ids_of_class(class)
            .into_iter()
            .filter(|r| self.entities[r].attr(from_attr).references(id))
            .filter_map(|r| self.entities[&r].attr(to_attr).as_ref_id())
            .collect()
    }

    /// Openings voiding a host element.
    pub fn openings_of(&self, host: u64) -> Vec<u64> {
        self.rel_targets("IFCRELVOIDSELEMENT", 4, host, 5)
    }

    /// Elements filling an opening.
    pub fn fillings_of(&self, opening: u64) -> Vec<u64> {
        self.rel_targets("IFCRELFILLSELEMENT", 4, opening, 5)
    }

    pub fn opening_filled_by(&self, element: u64) -> Option<u64> {
        self.rel_targets("IFCRELFILLSELEMENT", 5, element, 4).into_iter().next()
    }

    pub fn host_of_opening(&self, opening: u64) -> Option<u64> {
        self.rel_targets("IFCRELVOIDSELEMENT", 5, opening, 4).into_iter().next()
    }

    /// Deletes a product with the openings it hosts, their fillings and its
    /// exclusively owned placement/representation subgraph. Relationships
    /// are pruned and removed once empty. Returns the number of removed
    /// entities.
    pub fn delete_element(&mut self, guid: &str) -> Result<usize, ModelError> {
        let id = self.id_of(guid)?;
        match entity_kind(&self.entities[&id]) {
            EntityKind::Project | EntityKind::Spatial => {
                return Err(ModelError::CannotDeleteSpatial(guid.to_string()))
            }
            EntityKind::Element | EntityKind::Type => {}
            _ => return Err(ModelError::NotAProduct(guid.to_string())),
        }
        let mut doomed = BTreeSet::from([id]);
        let mut frontier = vec![id];
        while let Some(cur) = frontier.pop() {
            let mut related = self.openings_of(cur);
            related.extend(self.fillings_of(cur));
            if self.class_of(cur) != Some("IFCOPENINGELEMENT") {
                related.extend(self.opening_filled_by(cur));
            }
            for r in related {
                if doomed.insert(r) {
                    frontier.push(r);
                }
            }
        }
        let before = self.entities.len();
        let mut released = Vec::new();
        for &d in &doomed {
            if let Some(e) = self.remove_raw(d) {
                released.extend(e.refs());
            }
        }
        // prune relationships
        let rels: Vec<u64> = self
            .entities
            .values()
            .filter(|e| entity_kind(e) == EntityKind::Relationship)
            .filter(|e| doomed.iter().any(|d| e.attributes.iter().any(|a| a.references(*d))))
            .map(|e| e.id)
            .collect();
        for rel in rels {
            let e = self.entities[&rel].clone();
            let mut remove = false;
            let mut attrs = e.attributes.clone();
            for a in attrs.iter_mut().skip(4) {
                match a {
                    StepValue::Ref(r) if doomed.contains(r) => remove = true,
                    StepValue::List(items) => {
                        items.retain(|v| !v.as_ref_id().is_some_and(|r| doomed.contains(&r)));
                        if items.is_empty() {
                            remove = true;
                        }
                    }
                    _ => {}
                }
            }
            if remove {
                self.remove_raw(rel);
                released.extend(attrs.iter().flat_map(|a| {
                    let mut v = Vec::new();
                    a.collect_refs(&mut v);
                    v
                }));
            } else {
                self.entities.get_mut(&rel).unwrap().attributes = attrs;
            }
        }
        self.collect_garbage(released);
        self.dirty = true;
        Ok(before - self.entities.len())
    }

    /// Removes entities that lost their last referrer, starting from
    /// `candidates`. Only resources and property sets are collected.
    fn collect_garbage(&mut self, candidates: Vec<u64>) {
        let mut counts: HashMap<u64, usize> = HashMap::new();
        for e in self.entities.values() {
            for r in e.refs() {
                *counts.entry(r).or_default() += 1;
            }
        }
        let mut stack = candidates;
        while let Some(c) = stack.pop() {
            let Some(e) = self.entities.get(&c) else { continue };
            let collectable = matches!(entity_kind(e), EntityKind::Resource | EntityKind::PropertyDefinition);
            if !collectable || counts.get(&c).copied().unwrap_or(0) > 0 {
                continue;
            }
            if Some(c) == self.context {
                continue;
            }
            let e = self.remove_raw(c).unwrap();
            for r in e.refs() {
                if let Some(n) = counts.get_mut(&r) {
                    *n = n.saturating_sub(1);
                }
                stack.push(r);
            }
        }
    }
}

/// Inputs for [`IfcModel::add_product`].
#[derive(Debug, Clone)]
pub struct ProductSpec {
    pub class: String,
    pub name: Option<String>,
    pub parent_placement: Option<u64>,
    pub placement: Placement,
    pub representation: Option<u64>,
    /// Attributes after Tag, e.g. PredefinedType.
    pub extra: Vec<StepValue>,
    pub storey: Option<u64>,
}

/// Typed scalar for a property value.
pub fn typed_scalar(value: &serde_json::Value) -> Option<StepValue> {
    use serde_json::Value;
    Some(match value {
        Value::Bool(b) => StepValue::typed("IFCBOOLEAN", StepValue::Bool(*b)),
        Value::Number(n) if n.is_i64() => StepValue::typed("IFCINTEGER", StepValue::Integer(n.as_i64()?)),
        Value::Number(n) => StepValue::typed("IFCREAL", StepValue::Real(n.as_f64()?)),
        Value::String(s) => StepValue::typed("IFCLABEL", StepValue::str(s)),
        _ => return None,
    })
}

/// JSON view of a scalar STEP value.
pub fn value_to_json(v: &StepValue) -> serde_json::Value {
    use serde_json::Value;
    match v {
        StepValue::Integer(i) => Value::from(*i),
        StepValue::Real(r) => serde_json::Number::from_f64(*r).map_or(Value::Null, Value::Number),
        StepValue::String(s) | StepValue::Enum(s) => Value::from(s.as_str()),
        StepValue::Bool(b) => Value::from(*b),
        StepValue::Typed(_, inner) => value_to_json(inner),
        StepValue::Ref(id) => Value::from(format!("#{id}")),
        StepValue::List(items) => Value::Array(items.iter().map(value_to_json).collect()),
        StepValue::Unset | StepValue::Derived => Value::Null,
    }
}
