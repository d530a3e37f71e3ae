//! XML workbook dialect.
//!
//! ```xml
//! <workbook>
//!   <datasources>
//!     <datasource name="Orders">
//!       <column name="Sales" datatype="real"/>
//!     </datasource>
//!   </datasources>
//!   <worksheets>
//!     <worksheet name="Sales by Region">
//!       <mark type="bar"/>
//!       <encoding channel="column" field="Sales"/>
//!     </worksheet>
//!   </worksheets>
//!   <dashboards>
//!     <dashboard id="Overview" width="1200" height="800">
//!       <zone id="c1" type="chart" x="0" y="0" w="600" h="800" worksheet="Sales by Region"/>
//!       <zone id="f1" type="filter" x="600" y="0" w="200" h="60" widget="dropdown" field="Region"/>
//!       <zone id="t1" type="text" x="600" y="60" w="200" h="40">Notes</zone>
//!       <action source="f1" target="c1" type="filter"/>
//!     </dashboard>
//!   </dashboards>
//! </workbook>
//! ```
//!
//! Text zones take their content from a `content` attribute or their text
//! body, and formatting from `<format name=".." value=".."/>` children. Zone
//! attributes outside the known set are kept as block parameters.

use std::collections::BTreeMap;

use roxmltree::{Document, Node};

use super::{extract_blocks, DataAttribute, DataSource, ParseMode, Workbook, Worksheet, ZoneRecord};
use crate::error::{Error, Result};
use crate::model::{Channel, Dashboard, DeclaredAction, Encoding, InteractionType};

const ZONE_ATTRS: [&str; 12] = [
    "id",
    "type",
    "x",
    "y",
    "w",
    "h",
    "worksheet",
    "field",
    "widget",
    "channel",
    "kind",
    "content",
];

/// One-based line and column just past the last character.
fn end_position(text: &str) -> (u32, u32) {
    let line = text.matches('\n').count() as u32 + 1;
    let last = text.rsplit('\n').next().unwrap_or_default();
    (line, last.chars().count() as u32 + 1)
}

pub fn parse(text: &str, mode: ParseMode) -> Result<Workbook> {
    let doc = Document::parse(text).map_err(|e| {
        let (line, column) = match e {
            roxmltree::Error::UnexpectedEndOfStream | roxmltree::Error::UnclosedRootNode => end_position(text),
            _ => (e.pos().row, e.pos().col),
        };
        Error::MalformedDocument {
            line,
            column,
            message: e.to_string(),
        }
    })?;
    let root = doc.root_element();
    if root.tag_name().name() != "workbook" {
        return Err(Error::schema(root.tag_name().name(), "root element must be <workbook>"));
    }

    let mut workbook = Workbook::default();
    for section in elements(root) {
        match section.tag_name().name() {
            "datasources" => {
                for ds in elements(section).filter(|n| n.has_tag_name("datasource")) {
                    workbook.datasources.push(parse_datasource(ds)?);
                }
            }
            "worksheets" => {
                for ws in elements(section).filter(|n| n.has_tag_name("worksheet")) {
                    workbook.worksheets.push(parse_worksheet(ws)?);
                }
            }
            _ => {}
        }
    }
    // Dashboards resolve worksheets, so they are read last.
    for section in elements(root).filter(|n| n.has_tag_name("dashboards")) {
        for d in elements(section).filter(|n| n.has_tag_name("dashboard")) {
            let dashboard = parse_dashboard(d, &workbook, mode)?;
            workbook.dashboards.push(dashboard);
        }
    }
    Ok(workbook)
}

fn elements<'a, 'i>(node: Node<'a, 'i>) -> impl Iterator<Item = Node<'a, 'i>> {
    node.children().filter(|n| n.is_element())
}

fn required<'a>(node: Node<'a, '_>, attr: &str, path: &str) -> Result<&'a str> {
    node.attribute(attr)
        .ok_or_else(|| Error::schema(path, format!("missing required attribute `{attr}`")))
}

fn int_attr(node: Node<'_, '_>, attr: &str, path: &str) -> Result<i64> {
    let raw = required(node, attr, path)?;
    raw.trim()
        .parse()
        .map_err(|_| Error::schema(path, format!("attribute `{attr}` is not an integer: {raw}")))
}

fn opt_int_attr(node: Node<'_, '_>, attr: &str, path: &str) -> Result<Option<i64>> {
    match node.attribute(attr) {
        None => Ok(None),
        Some(_) => int_attr(node, attr, path).map(Some),
    }
}

fn parse_datasource(node: Node<'_, '_>) -> Result<DataSource> {
    let name = required(node, "name", "workbook/datasources/datasource")?;
    let path = format!("workbook/datasources/datasource[{name}]");
    let attributes = elements(node)
        .filter(|n| n.has_tag_name("column"))
        .map(|c| {
            Ok(DataAttribute {
                name: required(c, "name", &path)?.to_string(),
                datatype: c.attribute("datatype").unwrap_or("string").to_string(),
            })
        })
        .collect::<Result<_>>()?;
    Ok(DataSource {
        name: name.to_string(),
        attributes,
    })
}

fn parse_worksheet(node: Node<'_, '_>) -> Result<Worksheet> {
    let name = required(node, "name", "workbook/worksheets/worksheet")?;
    let path = format!("workbook/worksheets/worksheet[{name}]");
    let mut marks = Vec::new();
    let mut encodings = Vec::new();
    for child in elements(node) {
        match child.tag_name().name() {
            "mark" => marks.push(required(child, "type", &path)?.to_string()),
            "encoding" => {
                let channel: Channel = required(child, "channel", &path)?
                    .parse()
                    .map_err(|m: String| Error::schema(&path, m))?;
                encodings.push(Encoding::new(channel, required(child, "field", &path)?));
            }
            _ => {}
        }
    }
    Ok(Worksheet {
        name: name.to_string(),
        marks,
        encodings,
    })
}

fn parse_dashboard(node: Node<'_, '_>, workbook: &Workbook, mode: ParseMode) -> Result<Dashboard> {
    let id = node
        .attribute("id")
        .or_else(|| node.attribute("name"))
        .ok_or_else(|| Error::schema("workbook/dashboards/dashboard", "missing required attribute `id`"))?;
    let path = format!("workbook/dashboards/dashboard[{id}]");
    let mut zones = Vec::new();
    let mut actions = Vec::new();
    for child in elements(node) {
        match child.tag_name().name() {
            "zone" => zones.push(parse_zone(child, &path)?),
            "action" => {
                let apath = format!("{path}/action");
                actions.push(DeclaredAction {
                    source: required(child, "source", &apath)?.to_string(),
                    target: required(child, "target", &apath)?.to_string(),
                    itype: InteractionType::from(child.attribute("type").unwrap_or("filter")),
                });
            }
            _ => {}
        }
    }
    let blocks = extract_blocks(&zones, workbook, mode).map_err(|e| match e {
        Error::SchemaViolation { path: p, message } => Error::SchemaViolation {
            path: format!("{path}/{p}"),
            message,
        },
        other => other,
    })?;
    Ok(Dashboard {
        id: id.to_string(),
        width: opt_int_attr(node, "width", &path)?,
        height: opt_int_attr(node, "height", &path)?,
        blocks,
        declared_interactions: actions,
    })
}

fn parse_zone(node: Node<'_, '_>, dashboard_path: &str) -> Result<ZoneRecord> {
    let zpath = format!("{dashboard_path}/zone");
    let id = required(node, "id", &zpath)?;
    let path = format!("{dashboard_path}/zone[{id}]");
    let attr = |name: &str| node.attribute(name).map(str::to_string);

    let body: String = node
        .children()
        .filter(|n| n.is_text())
        .filter_map(|n| n.text())
        .collect::<String>()
        .trim()
        .to_string();
    let content = attr("content").or((!body.is_empty()).then_some(body));

    let formatting = elements(node)
        .filter(|n| n.has_tag_name("format"))
        .map(|f| {
            Ok((
                required(f, "name", &path)?.to_string(),
                f.attribute("value").unwrap_or_default().to_string(),
            ))
        })
        .collect::<Result<BTreeMap<_, _>>>()?;

    let params = node
        .attributes()
        .filter(|a| !ZONE_ATTRS.contains(&a.name()))
        .map(|a| (a.name().to_string(), a.value().to_string()))
        .collect();

    Ok(ZoneRecord {
        id: id.to_string(),
        kind: required(node, "type", &path)?.to_string(),
        x: int_attr(node, "x", &path)?,
        y: int_attr(node, "y", &path)?,
        w: int_attr(node, "w", &path)?,
        h: int_attr(node, "h", &path)?,
        worksheet: attr("worksheet"),
        field: attr("field"),
        widget: attr("widget"),
        channel: attr("channel"),
        media_kind: attr("kind"),
        content,
        formatting,
        params,
    })
}
