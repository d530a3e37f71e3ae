//! Blocks, connections, dashboards and the paired graphs derived from them.
//!
//! Coordinates are integer pixels with the origin at the top-left corner of
//! the dashboard. Every value here is an immutable value object once built.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Declares a string-backed enumeration with a closed set of known names and
/// an `Other` fallback that carries any unrecognised name verbatim.
macro_rules! open_enum {
    ($(#[$meta:meta])* $name:ident { $($variant:ident => $text:literal),+ $(,)? }) => {
        $(#[$meta])*
        #[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(from = "String", into = "String")]
        pub enum $name {
            $($variant,)+
            Other(String),
        }

        impl $name {
            pub fn as_str(&self) -> &str {
                match self {
                    $($name::$variant => $text,)+
                    $name::Other(s) => s.as_str(),
                }
            }
        }

        impl From<&str> for $name {
            fn from(s: &str) -> Self {
                match s {
                    $($text => $name::$variant,)+
                    other => $name::Other(other.to_string()),
                }
            }
        }

        impl From<String> for $name {
            fn from(s: String) -> Self {
                $name::from(s.as_str())
            }
        }

        impl From<$name> for String {
            fn from(v: $name) -> String {
                v.as_str().to_string()
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }
    };
}

open_enum!(
    /// Visualization type of a chart block.
    ChartType {
        Bar => "bar",
        Line => "line",
        Map => "map",
        Table => "table",
        Pie => "pie",
        Scatter => "scatter",
        Area => "area",
    }
);

open_enum!(
    WidgetType {
        Dropdown => "dropdown",
        Slider => "slider",
        List => "list",
    }
);

open_enum!(
    MultimediaKind {
        Image => "image",
        Webpage => "webpage",
    }
);

open_enum!(
    /// Interaction type recorded on a dashboard action.
    InteractionType {
        Filter => "filter",
        Highlight => "highlight",
    }
);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BlockType {
    Chart,
    Text,
    Filter,
    Legend,
    Multimedia,
}

impl BlockType {
    pub const ALL: [BlockType; 5] = [
        BlockType::Chart,
        BlockType::Text,
        BlockType::Filter,
        BlockType::Legend,
        BlockType::Multimedia,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            BlockType::Chart => "chart",
            BlockType::Text => "text",
            BlockType::Filter => "filter",
            BlockType::Legend => "legend",
            BlockType::Multimedia => "multimedia",
        }
    }
}

impl fmt::Display for BlockType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BlockType {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        BlockType::ALL
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| format!("unknown block type: {s}"))
    }
}

/// Encoding shelf a field is placed on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Channel {
    Row,
    Column,
    Color,
    Size,
    Label,
    Detail,
    Geo,
}

impl FromStr for Channel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "row" => Channel::Row,
            "column" => Channel::Column,
            "color" => Channel::Color,
            "size" => Channel::Size,
            "label" => Channel::Label,
            "detail" => Channel::Detail,
            "geo" => Channel::Geo,
            _ => return Err(format!("unknown encoding channel: {s}")),
        })
    }
}

/// Measurement level of a data field, resolved from the data source.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FieldKind {
    Quantitative,
    Categorical,
}

impl FieldKind {
    /// Maps a data-source datatype name onto a measurement level.
    pub fn from_datatype(datatype: &str) -> Self {
        match datatype.to_ascii_lowercase().as_str() {
            "integer" | "int" | "real" | "float" | "double" | "number" | "numeric" | "quantitative" => {
                FieldKind::Quantitative
            }
            _ => FieldKind::Categorical,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Encoding {
    pub channel: Channel,
    pub field: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<FieldKind>,
}

impl Encoding {
    pub fn new(channel: Channel, field: impl Into<String>) -> Self {
        Encoding {
            channel,
            field: field.into(),
            kind: None,
        }
    }

    pub fn with_kind(mut self, kind: FieldKind) -> Self {
        self.kind = Some(kind);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DescriptiveProps {
    Chart {
        vis_type: ChartType,
        worksheet: Option<String>,
        marks: Vec<String>,
        encodings: Vec<Encoding>,
    },
    Text {
        content: String,
        formatting: BTreeMap<String, String>,
    },
    Filter {
        widget: WidgetType,
        field: String,
    },
    Legend {
        channel: String,
    },
    Multimedia {
        kind: MultimediaKind,
    },
}

impl DescriptiveProps {
    pub fn block_type(&self) -> BlockType {
        match self {
            DescriptiveProps::Chart { .. } => BlockType::Chart,
            DescriptiveProps::Text { .. } => BlockType::Text,
            DescriptiveProps::Filter { .. } => BlockType::Filter,
            DescriptiveProps::Legend { .. } => BlockType::Legend,
            DescriptiveProps::Multimedia { .. } => BlockType::Multimedia,
        }
    }

    pub fn chart_type(&self) -> Option<&ChartType> {
        match self {
            DescriptiveProps::Chart { vis_type, .. } => Some(vis_type),
            _ => None,
        }
    }
}

/// One visual element of a dashboard. The block type is carried by the
/// descriptive properties, so the two can never disagree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Block {
    pub id: String,
    pub x: i64,
    pub y: i64,
    pub w: i64,
    pub h: i64,
    pub props: DescriptiveProps,
    /// Additional type-specific parameters.
    pub params: BTreeMap<String, String>,
}

impl Block {
    pub fn new(id: impl Into<String>, rect: (i64, i64, i64, i64), props: DescriptiveProps) -> Self {
        let (x, y, w, h) = rect;
        Block {
            id: id.into(),
            x,
            y,
            w,
            h,
            props,
            params: BTreeMap::new(),
        }
    }

    pub fn block_type(&self) -> BlockType {
        self.props.block_type()
    }

    pub fn is(&self, ty: BlockType) -> bool {
        self.block_type() == ty
    }
}

/// Raw action record as declared in a dashboard document.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct DeclaredAction {
    pub source: String,
    pub target: String,
    #[serde(rename = "type")]
    pub itype: InteractionType,
}

impl DeclaredAction {
    pub fn new(source: impl Into<String>, target: impl Into<String>, itype: InteractionType) -> Self {
        DeclaredAction {
            source: source.into(),
            target: target.into(),
            itype,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dashboard {
    pub id: String,
    pub width: Option<i64>,
    pub height: Option<i64>,
    pub blocks: Vec<Block>,
    pub declared_interactions: Vec<DeclaredAction>,
}

impl Dashboard {
    pub fn new(id: impl Into<String>, blocks: Vec<Block>) -> Self {
        Dashboard {
            id: id.into(),
            width: None,
            height: None,
            blocks,
            declared_interactions: Vec::new(),
        }
    }

    pub fn count(&self, ty: BlockType) -> usize {
        self.blocks.iter().filter(|b| b.is(ty)).count()
    }

    pub fn block(&self, id: &str) -> Option<&Block> {
        self.blocks.iter().find(|b| b.id == id)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AdjacencyConfig {
    PartialOverlap,
    Containment,
    Adjoining,
}

impl AdjacencyConfig {
    pub fn as_str(self) -> &'static str {
        match self {
            AdjacencyConfig::PartialOverlap => "partial_overlap",
            AdjacencyConfig::Containment => "containment",
            AdjacencyConfig::Adjoining => "adjoining",
        }
    }
}

/// Interaction edge class, determined by the endpoint block types.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum EdgeClass {
    #[serde(rename = "filter->chart")]
    FilterToChart,
    #[serde(rename = "legend->chart")]
    LegendToChart,
    #[serde(rename = "chart->chart")]
    ChartToChart,
}

impl EdgeClass {
    pub const ALL: [EdgeClass; 3] = [
        EdgeClass::FilterToChart,
        EdgeClass::LegendToChart,
        EdgeClass::ChartToChart,
    ];

    /// Class for a source/target type pair, or `None` outside the three
    /// supported patterns.
    pub fn for_endpoints(source: BlockType, target: BlockType) -> Option<Self> {
        match (source, target) {
            (BlockType::Filter, BlockType::Chart) => Some(EdgeClass::FilterToChart),
            (BlockType::Legend, BlockType::Chart) => Some(EdgeClass::LegendToChart),
            (BlockType::Chart, BlockType::Chart) => Some(EdgeClass::ChartToChart),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            EdgeClass::FilterToChart => "filter->chart",
            EdgeClass::LegendToChart => "legend->chart",
            EdgeClass::ChartToChart => "chart->chart",
        }
    }
}

impl fmt::Display for EdgeClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Undirected spatial connection, stored with `source < target`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AdjacencyEdge {
    pub source: String,
    pub target: String,
    pub config: AdjacencyConfig,
}

impl AdjacencyEdge {
    /// Builds the canonical form regardless of argument order.
    pub fn canonical(a: &str, b: &str, config: AdjacencyConfig) -> Self {
        let (source, target) = if a <= b { (a, b) } else { (b, a) };
        AdjacencyEdge {
            source: source.to_string(),
            target: target.to_string(),
            config,
        }
    }
}

/// Directed behavioural connection: acting on `source` updates `target`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct InteractionEdge {
    pub source: String,
    pub target: String,
    pub itype: InteractionType,
    pub edge_class: EdgeClass,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Connection {
    Adjacency(AdjacencyEdge),
    Interaction(InteractionEdge),
}

impl Connection {
    pub fn source(&self) -> &str {
        match self {
            Connection::Adjacency(e) => &e.source,
            Connection::Interaction(e) => &e.source,
        }
    }

    pub fn target(&self) -> &str {
        match self {
            Connection::Adjacency(e) => &e.target,
            Connection::Interaction(e) => &e.target,
        }
    }
}

/// Bookkeeping about how declared actions turned into interaction edges.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionTally {
    pub declared: usize,
    /// Actions outside the filter→chart, legend→chart and chart→chart classes.
    pub unsupported: usize,
    pub self_loops: usize,
    pub duplicates: usize,
    /// Raw interaction-type counts over supported actions, before pruning.
    pub itype_counts: BTreeMap<String, usize>,
}

/// The undirected adjacency graph and directed interaction graph of one
/// dashboard. Both graphs share the same node list.
#[derive(Debug, Clone, PartialEq)]
pub struct DashboardGraphs {
    pub dashboard_id: String,
    pub nodes: Vec<Block>,
    pub adjacency_edges: Vec<AdjacencyEdge>,
    pub interaction_edges: Vec<InteractionEdge>,
    pub actions: ActionTally,
}

impl DashboardGraphs {
    pub fn node(&self, id: &str) -> Option<&Block> {
        self.nodes.iter().find(|b| b.id == id)
    }

    pub fn count(&self, ty: BlockType) -> usize {
        self.nodes.iter().filter(|b| b.is(ty)).count()
    }

    pub fn block_types(&self) -> BTreeMap<&str, BlockType> {
        self.nodes.iter().map(|b| (b.id.as_str(), b.block_type())).collect()
    }

    /// Violations of the graph-pair invariants; empty when well formed.
    pub fn check(&self) -> Vec<String> {
        let mut out = Vec::new();
        let ids: BTreeSet<&str> = self.nodes.iter().map(|b| b.id.as_str()).collect();
        let mut seen = BTreeSet::new();
        for e in &self.adjacency_edges {
            if e.source >= e.target {
                out.push(format!("non-canonical adjacency edge: {}-{}", e.source, e.target));
            }
            if !seen.insert((&e.source, &e.target)) {
                out.push(format!("duplicate adjacency edge: {}-{}", e.source, e.target));
            }
            for end in [&e.source, &e.target] {
                if !ids.contains(end.as_str()) {
                    out.push(format!("unknown adjacency endpoint: {end}"));
                }
            }
        }
        let mut seen = BTreeSet::new();
        for e in &self.interaction_edges {
            if e.source == e.target {
                out.push(format!("interaction self-loop: {}", e.source));
            }
            if !seen.insert((&e.source, &e.target, e.edge_class)) {
                out.push(format!("duplicate interaction edge: {}->{}", e.source, e.target));
            }
            let types = (self.node(&e.source), self.node(&e.target));
            match types {
                (Some(s), Some(t)) => {
                    if EdgeClass::for_endpoints(s.block_type(), t.block_type()) != Some(e.edge_class) {
                        out.push(format!(
                            "edge class {} inconsistent with endpoints: {}->{}",
                            e.edge_class, e.source, e.target
                        ));
                    }
                }
                _ => out.push(format!("unknown interaction endpoint: {}->{}", e.source, e.target)),
            }
        }
        out
    }
}

/// Reports every broken invariant of a dashboard; an empty list means valid.
pub fn validate(dashboard: &Dashboard) -> Vec<String> {
    let mut out = Vec::new();
    let mut ids = BTreeSet::new();
    for b in &dashboard.blocks {
        if !ids.insert(b.id.as_str()) {
            out.push(format!("duplicate block id: {}", b.id));
        }
        if b.w <= 0 || b.h <= 0 {
            out.push(format!("non-positive block size: {} ({}x{})", b.id, b.w, b.h));
        }
        if let DescriptiveProps::Chart {
            vis_type,
            marks,
            encodings,
            ..
        } = &b.props
        {
            if !marks.is_empty() || !encodings.is_empty() {
                let inferred = crate::ingest::infer_chart_type(marks, encodings);
                if &inferred != vis_type {
                    out.push(format!(
                        "chart type {vis_type} inconsistent with marks (inferred {inferred}): {}",
                        b.id
                    ));
                }
            }
        }
    }
    let mut reported = BTreeSet::new();
    for a in &dashboard.declared_interactions {
        for end in [&a.source, &a.target] {
            if !ids.contains(end.as_str()) && reported.insert(end.as_str()) {
                out.push(format!("unknown interaction endpoint: {end}"));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chart(id: &str, rect: (i64, i64, i64, i64)) -> Block {
        Block::new(
            id,
            rect,
            DescriptiveProps::Chart {
                vis_type: ChartType::Bar,
                worksheet: None,
                marks: vec![],
                encodings: vec![],
            },
        )
    }

    #[test]
    fn duplicate_ids_are_reported() {
        let d = Dashboard::new("d", vec![chart("b1", (0, 0, 10, 10)), chart("b1", (20, 0, 10, 10))]);
        assert_eq!(validate(&d), vec!["duplicate block id: b1".to_string()]);
    }

    #[test]
    fn dangling_action_is_reported() {
        let mut d = Dashboard::new("d", vec![chart("c1", (0, 0, 10, 10))]);
        d.declared_interactions
            .push(DeclaredAction::new("ghost", "c1", InteractionType::Filter));
        assert_eq!(validate(&d), vec!["unknown interaction endpoint: ghost".to_string()]);
    }

    #[test]
    fn zero_area_is_rejected() {
        let d = Dashboard::new("d", vec![chart("c1", (0, 0, 0, 10))]);
        assert_eq!(validate(&d).len(), 1);
    }

    #[test]
    fn inconsistent_chart_type_is_reported() {
        let mut b = chart("c1", (0, 0, 10, 10));
        b.props = DescriptiveProps::Chart {
            vis_type: ChartType::Line,
            worksheet: None,
            marks: vec!["bar".into()],
            encodings: vec![],
        };
        let d = Dashboard::new("d", vec![b]);
        assert_eq!(validate(&d).len(), 1);
    }

    #[test]
    fn open_enums_keep_unknown_names() {
        assert_eq!(ChartType::from("sankey"), ChartType::Other("sankey".into()));
        assert_eq!(ChartType::from("bar"), ChartType::Bar);
        assert_eq!(String::from(ChartType::Other("waterfall".into())), "waterfall");
    }

    #[test]
    fn adjacency_edges_are_canonical() {
        let a = AdjacencyEdge::canonical("b", "a", AdjacencyConfig::Adjoining);
        let b = AdjacencyEdge::canonical("a", "b", AdjacencyConfig::Adjoining);
        assert_eq!(a, b);
        assert_eq!(a.source, "a");
    }

    #[test]
    fn edge_classes_follow_endpoint_types() {
        use BlockType::*;
        assert_eq!(EdgeClass::for_endpoints(Filter, Chart), Some(EdgeClass::FilterToChart));
        assert_eq!(EdgeClass::for_endpoints(Text, Chart), None);
        assert_eq!(EdgeClass::for_endpoints(Chart, Legend), None);
    }
}
