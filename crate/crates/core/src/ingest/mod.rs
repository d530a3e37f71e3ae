//! Workbook and dashboard document ingest.
//!
//! Two input encodings are supported: a small XML workbook dialect (see
//! [`xml`]) and the canonical dashboard JSON (see [`json`]). Both produce the
//! same [`Workbook`] value.

pub mod json;
pub mod xml;

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use crate::error::{Error, Result};
use crate::model::{
    Block, BlockType, Channel, ChartType, Dashboard, DescriptiveProps, EdgeClass, Encoding, FieldKind, InteractionEdge,
    MultimediaKind, WidgetType,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DocumentFormat {
    Xml,
    Json,
}

impl DocumentFormat {
    /// Picks the format from a file extension.
    pub fn from_path(path: &Path) -> Option<Self> {
        match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
            "xml" | "twb" => Some(DocumentFormat::Xml),
            "json" => Some(DocumentFormat::Json),
            _ => None,
        }
    }
}

/// How unknown zone kinds are handled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ParseMode {
    #[default]
    Strict,
    /// Unknown zone kinds become multimedia blocks carrying the kind name.
    Lenient,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DataAttribute {
    pub name: String,
    pub datatype: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DataSource {
    pub name: String,
    pub attributes: Vec<DataAttribute>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Worksheet {
    pub name: String,
    pub marks: Vec<String>,
    pub encodings: Vec<Encoding>,
}

impl Worksheet {
    pub fn chart_type(&self) -> ChartType {
        infer_chart_type(&self.marks, &self.encodings)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Workbook {
    pub datasources: Vec<DataSource>,
    pub worksheets: Vec<Worksheet>,
    pub dashboards: Vec<Dashboard>,
}

impl Workbook {
    pub fn worksheet(&self, name: &str) -> Option<&Worksheet> {
        self.worksheets.iter().find(|w| w.name == name)
    }

    /// Measurement level of a field, looked up across all data sources.
    pub fn field_kind(&self, field: &str) -> Option<FieldKind> {
        self.datasources
            .iter()
            .flat_map(|d| d.attributes.iter())
            .find(|a| a.name == field)
            .map(|a| FieldKind::from_datatype(&a.datatype))
    }
}

/// Parses a document into a validated workbook.
pub fn parse_workbook(document: &[u8], format: DocumentFormat, mode: ParseMode) -> Result<Workbook> {
    let text = std::str::from_utf8(document).map_err(|e| {
        let prefix = &document[..e.valid_up_to()];
        let line = prefix.iter().filter(|&&b| b == b'\n').count() as u32 + 1;
        let column = (prefix.len() - prefix.iter().rposition(|&b| b == b'\n').map_or(0, |p| p + 1)) as u32 + 1;
        Error::MalformedDocument {
            line,
            column,
            message: "invalid UTF-8".into(),
        }
    })?;
    let workbook = match format {
        DocumentFormat::Xml => xml::parse(text, mode)?,
        DocumentFormat::Json => Workbook {
            dashboards: json::parse_dashboards(text)?,
            ..Workbook::default()
        },
    };
    check_workbook(&workbook)?;
    Ok(workbook)
}

fn check_workbook(workbook: &Workbook) -> Result<()> {
    let mut names = BTreeSet::new();
    for ws in &workbook.worksheets {
        if !names.insert(ws.name.as_str()) {
            return Err(Error::schema(
                format!("workbook/worksheets/worksheet[{}]", ws.name),
                "duplicate worksheet name",
            ));
        }
        if ws.marks.is_empty() && ws.encodings.is_empty() {
            return Err(Error::schema(
                format!("workbook/worksheets/worksheet[{}]", ws.name),
                "worksheet needs at least one mark or encoding",
            ));
        }
    }
    let mut ids = BTreeSet::new();
    for d in &workbook.dashboards {
        if !ids.insert(d.id.as_str()) {
            return Err(Error::schema(format!("dashboard[{}]", d.id), "duplicate dashboard id"));
        }
        let violations = crate::model::validate(d);
        if !violations.is_empty() {
            return Err(Error::schema(format!("dashboard[{}]", d.id), violations.join("; ")));
        }
    }
    Ok(())
}

/// A positioned zone as read from a workbook dashboard, before typing.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ZoneRecord {
    pub id: String,
    pub kind: String,
    pub x: i64,
    pub y: i64,
    pub w: i64,
    pub h: i64,
    pub worksheet: Option<String>,
    pub field: Option<String>,
    pub widget: Option<String>,
    pub channel: Option<String>,
    pub media_kind: Option<String>,
    pub content: Option<String>,
    pub formatting: BTreeMap<String, String>,
    pub params: BTreeMap<String, String>,
}

/// Maps zone records onto typed blocks.
///
/// Chart zones resolve their worksheet reference through `workbook`, which
/// also supplies field datatypes for chart-type inference.
pub fn extract_blocks(zones: &[ZoneRecord], workbook: &Workbook, mode: ParseMode) -> Result<Vec<Block>> {
    zones.iter().map(|z| zone_to_block(z, workbook, mode)).collect()
}

fn zone_to_block(zone: &ZoneRecord, workbook: &Workbook, mode: ParseMode) -> Result<Block> {
    let path = || format!("zone[{}]", zone.id);
    let props = match zone.kind.as_str() {
        "chart" | "worksheet" | "viz" => {
            let name = zone
                .worksheet
                .as_deref()
                .ok_or_else(|| Error::schema(path(), "chart zone without worksheet attribute"))?;
            let ws = workbook
                .worksheet(name)
                .ok_or_else(|| Error::schema(path(), format!("unresolved worksheet: {name}")))?;
            let encodings: Vec<Encoding> = ws
                .encodings
                .iter()
                .map(|e| Encoding {
                    kind: e.kind.or_else(|| workbook.field_kind(&e.field)),
                    ..e.clone()
                })
                .collect();
            DescriptiveProps::Chart {
                vis_type: infer_chart_type(&ws.marks, &encodings),
                worksheet: Some(name.to_string()),
                marks: ws.marks.clone(),
                encodings,
            }
        }
        "text" | "title" => DescriptiveProps::Text {
            content: zone.content.clone().unwrap_or_default(),
            formatting: zone.formatting.clone(),
        },
        "filter" => DescriptiveProps::Filter {
            widget: WidgetType::from(zone.widget.as_deref().unwrap_or("other")),
            field: zone
                .field
                .clone()
                .ok_or_else(|| Error::schema(path(), "filter zone without field attribute"))?,
        },
        "legend" => DescriptiveProps::Legend {
            channel: zone
                .channel
                .clone()
                .ok_or_else(|| Error::schema(path(), "legend zone without channel attribute"))?,
        },
        kind if kind.ends_with("-legend") => DescriptiveProps::Legend {
            channel: kind.trim_end_matches("-legend").to_string(),
        },
        "image" | "bitmap" => DescriptiveProps::Multimedia {
            kind: MultimediaKind::Image,
        },
        "webpage" | "web" => DescriptiveProps::Multimedia {
            kind: MultimediaKind::Webpage,
        },
        "multimedia" => DescriptiveProps::Multimedia {
            kind: MultimediaKind::from(zone.media_kind.as_deref().unwrap_or("image")),
        },
        other => match mode {
            ParseMode::Strict => {
                return Err(Error::schema(path(), format!("unknown zone kind: {other}")));
            }
            ParseMode::Lenient => DescriptiveProps::Multimedia {
                kind: MultimediaKind::Other(other.to_string()),
            },
        },
    };
    Ok(Block {
        id: zone.id.clone(),
        x: zone.x,
        y: zone.y,
        w: zone.w,
        h: zone.h,
        props,
        params: zone.params.clone(),
    })
}

/// Infers the visualization type from a worksheet's marks and encodings.
///
/// Rules are tried in order and the first match wins. Mark rules look at the
/// primary (first) mark. Fields without a known measurement level count as
/// categorical.
pub fn infer_chart_type(marks: &[String], encodings: &[Encoding]) -> ChartType {
    if encodings.iter().any(|e| e.channel == Channel::Geo) {
        return ChartType::Map;
    }
    let kind_of = |e: &Encoding| e.kind.unwrap_or(FieldKind::Categorical);
    let on = |ch: Channel| encodings.iter().filter(move |e| e.channel == ch);
    let primary = marks.first().map(String::as_str).unwrap_or("unknown");
    match primary {
        "bar" => ChartType::Bar,
        "line" => ChartType::Line,
        "text"
            if on(Channel::Row).next().is_some()
                && on(Channel::Column).next().is_some()
                && on(Channel::Row)
                    .chain(on(Channel::Column))
                    .all(|e| kind_of(e) == FieldKind::Categorical) =>
        {
            ChartType::Table
        }
        "pie" => ChartType::Pie,
        "circle"
            if on(Channel::Row).any(|e| kind_of(e) == FieldKind::Quantitative)
                && on(Channel::Column).any(|e| kind_of(e) == FieldKind::Quantitative) =>
        {
            ChartType::Scatter
        }
        "area" => ChartType::Area,
        other => ChartType::Other(other.to_string()),
    }
}

/// Interaction connections derived from a dashboard's declared actions.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ExtractedActions {
    pub edges: Vec<InteractionEdge>,
    /// Actions whose endpoint types fall outside the three supported classes.
    pub dropped: usize,
}

/// Turns declared actions into typed interaction connections.
///
/// Duplicates and self-loops are kept here and pruned at graph construction.
pub fn extract_actions(dashboard: &Dashboard) -> Result<ExtractedActions> {
    let types: BTreeMap<&str, BlockType> = dashboard
        .blocks
        .iter()
        .map(|b| (b.id.as_str(), b.block_type()))
        .collect();
    let mut out = ExtractedActions::default();
    for (i, action) in dashboard.declared_interactions.iter().enumerate() {
        let lookup = |id: &str| {
            types.get(id).copied().ok_or_else(|| {
                Error::schema(
                    format!("dashboard[{}]/action[{i}]", dashboard.id),
                    format!("unknown interaction endpoint: {id}"),
                )
            })
        };
        let (s, t) = (lookup(&action.source)?, lookup(&action.target)?);
        match EdgeClass::for_endpoints(s, t) {
            Some(edge_class) => out.edges.push(InteractionEdge {
                source: action.source.clone(),
                target: action.target.clone(),
                itype: action.itype.clone(),
                edge_class,
            }),
            None => out.dropped += 1,
        }
    }
    Ok(out)
}

/// Keeps dashboards with at least `min_charts` chart blocks, in input order.
pub fn filter_corpus(dashboards: impl IntoIterator<Item = Dashboard>, min_charts: usize) -> Vec<Dashboard> {
    dashboards
        .into_iter()
        .filter(|d| d.count(BlockType::Chart) >= min_charts)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{DeclaredAction, InteractionType};

    fn enc(ch: Channel, f: &str, k: Option<FieldKind>) -> Encoding {
        Encoding {
            channel: ch,
            field: f.into(),
            kind: k,
        }
    }

    fn marks(m: &[&str]) -> Vec<String> {
        m.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn chart_type_rules() {
        let bar = infer_chart_type(
            &marks(&["bar"]),
            &[enc(Channel::Column, "Sales", None), enc(Channel::Row, "Region", None)],
        );
        assert_eq!(bar, ChartType::Bar);
        let map = infer_chart_type(&marks(&["circle"]), &[enc(Channel::Geo, "State", None)]);
        assert_eq!(map, ChartType::Map);
        assert_eq!(
            infer_chart_type(&marks(&["polygon"]), &[]),
            ChartType::Other("polygon".into())
        );
        let q = Some(FieldKind::Quantitative);
        let scatter = infer_chart_type(
            &marks(&["circle"]),
            &[enc(Channel::Row, "Profit", q), enc(Channel::Column, "Sales", q)],
        );
        assert_eq!(scatter, ChartType::Scatter);
        let circle_cat = infer_chart_type(
            &marks(&["circle"]),
            &[enc(Channel::Row, "Region", None), enc(Channel::Column, "Sales", q)],
        );
        assert_eq!(circle_cat, ChartType::Other("circle".into()));
        let table = infer_chart_type(
            &marks(&["text"]),
            &[enc(Channel::Row, "Region", None), enc(Channel::Column, "Year", None)],
        );
        assert_eq!(table, ChartType::Table);
        assert_eq!(
            infer_chart_type(&marks(&["text"]), &[]),
            ChartType::Other("text".into())
        );
        assert_eq!(infer_chart_type(&marks(&["pie"]), &[]), ChartType::Pie);
        assert_eq!(infer_chart_type(&marks(&["area"]), &[]), ChartType::Area);
        assert_eq!(infer_chart_type(&marks(&["line", "bar"]), &[]), ChartType::Line);
    }

    fn zone(id: &str, kind: &str) -> ZoneRecord {
        ZoneRecord {
            id: id.into(),
            kind: kind.into(),
            w: 10,
            h: 10,
            ..ZoneRecord::default()
        }
    }

    #[test]
    fn filter_and_legend_zones() {
        let wb = Workbook::default();
        let mut f = zone("f1", "filter");
        f.widget = Some("dropdown".into());
        f.field = Some("Region".into());
        let blocks = extract_blocks(&[f, zone("l1", "color-legend")], &wb, ParseMode::Strict).unwrap();
        assert_eq!(
            blocks[0].props,
            DescriptiveProps::Filter {
                widget: WidgetType::Dropdown,
                field: "Region".into()
            }
        );
        assert_eq!(
            blocks[1].props,
            DescriptiveProps::Legend {
                channel: "color".into()
            }
        );
    }

    #[test]
    fn unknown_zone_kind_strict_and_lenient() {
        let wb = Workbook::default();
        let err = extract_blocks(&[zone("z", "blank")], &wb, ParseMode::Strict).unwrap_err();
        assert!(matches!(err, Error::SchemaViolation { .. }));
        let blocks = extract_blocks(&[zone("z", "blank")], &wb, ParseMode::Lenient).unwrap();
        assert_eq!(blocks[0].block_type(), BlockType::Multimedia);
    }

    fn block(id: &str, props: DescriptiveProps) -> Block {
        Block::new(id, (0, 0, 10, 10), props)
    }

    fn chart(id: &str) -> Block {
        block(
            id,
            DescriptiveProps::Chart {
                vis_type: ChartType::Bar,
                worksheet: None,
                marks: vec![],
                encodings: vec![],
            },
        )
    }

    #[test]
    fn actions_are_classified_and_unsupported_dropped() {
        let mut d = Dashboard::new(
            "d",
            vec![
                chart("C1"),
                block(
                    "L1",
                    DescriptiveProps::Legend {
                        channel: "color".into(),
                    },
                ),
                block(
                    "T1",
                    DescriptiveProps::Text {
                        content: String::new(),
                        formatting: BTreeMap::new(),
                    },
                ),
            ],
        );
        d.declared_interactions = vec![
            DeclaredAction::new("L1", "C1", InteractionType::Highlight),
            DeclaredAction::new("T1", "C1", InteractionType::Filter),
        ];
        let got = extract_actions(&d).unwrap();
        assert_eq!(got.dropped, 1);
        assert_eq!(
            got.edges,
            vec![InteractionEdge {
                source: "L1".into(),
                target: "C1".into(),
                itype: InteractionType::Highlight,
                edge_class: EdgeClass::LegendToChart,
            }]
        );
    }

    #[test]
    fn dangling_action_endpoint_is_an_error() {
        let mut d = Dashboard::new("d", vec![chart("C1")]);
        d.declared_interactions = vec![DeclaredAction::new("C1", "nope", InteractionType::Filter)];
        assert!(matches!(extract_actions(&d), Err(Error::SchemaViolation { .. })));
    }

    #[test]
    fn corpus_filter_keeps_order() {
        let one = Dashboard::new("one", vec![chart("a")]);
        let two = Dashboard::new("two", vec![chart("a"), chart("b")]);
        let kept = filter_corpus(vec![one.clone(), two.clone()], 2);
        assert_eq!(kept, vec![two.clone()]);
        assert_eq!(filter_corpus(vec![one.clone(), two.clone()], 0), vec![one, two]);
    }
}
