//! Canonical dashboard JSON.
//!
//! ```json
//! { "id": "d1", "width": 1200, "height": 800,
//!   "blocks": [{ "id": "c1", "type": "chart", "x": 0, "y": 0, "w": 600, "h": 800,
//!                "props": { "vis_type": "bar", "marks": ["bar"], "encodings": [] } }],
//!   "interactions": [{ "source": "c1", "target": "c2", "type": "filter" }] }
//! ```
//!
//! A document holds one dashboard object or an array of them. Newline
//! delimited streams hold one dashboard per line.

use std::collections::BTreeMap;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::model::{
    Block, BlockType, ChartType, Dashboard, DeclaredAction, DescriptiveProps, Encoding, MultimediaKind, WidgetType,
};

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DashboardDoc {
    id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    width: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    height: Option<i64>,
    blocks: Vec<Block>,
    #[serde(default)]
    interactions: Vec<DeclaredAction>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BlockDoc {
    id: String,
    #[serde(rename = "type")]
    block_type: BlockType,
    x: i64,
    y: i64,
    w: i64,
    h: i64,
    #[serde(default)]
    props: PropsDoc,
}

#[derive(Default, Serialize, Deserialize)]
struct PropsDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    vis_type: Option<ChartType>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    worksheet: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    marks: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    encodings: Option<Vec<Encoding>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    content: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    formatting: Option<BTreeMap<String, String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    widget: Option<WidgetType>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    field: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    channel: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    kind: Option<MultimediaKind>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    params: BTreeMap<String, String>,
}

impl From<&Block> for BlockDoc {
    fn from(b: &Block) -> Self {
        let mut props = PropsDoc {
            params: b.params.clone(),
            ..PropsDoc::default()
        };
        match &b.props {
            DescriptiveProps::Chart {
                vis_type,
                worksheet,
                marks,
                encodings,
            } => {
                props.vis_type = Some(vis_type.clone());
                props.worksheet = worksheet.clone();
                props.marks = Some(marks.clone());
                props.encodings = Some(encodings.clone());
            }
            DescriptiveProps::Text { content, formatting } => {
                props.content = Some(content.clone());
                props.formatting = (!formatting.is_empty()).then(|| formatting.clone());
            }
            DescriptiveProps::Filter { widget, field } => {
                props.widget = Some(widget.clone());
                props.field = Some(field.clone());
            }
            DescriptiveProps::Legend { channel } => props.channel = Some(channel.clone()),
            DescriptiveProps::Multimedia { kind } => props.kind = Some(kind.clone()),
        }
        BlockDoc {
            id: b.id.clone(),
            block_type: b.block_type(),
            x: b.x,
            y: b.y,
            w: b.w,
            h: b.h,
            props,
        }
    }
}

impl TryFrom<BlockDoc> for Block {
    type Error = String;

    fn try_from(doc: BlockDoc) -> Result<Self, String> {
        let p = doc.props;
        let missing = |key: &str| format!("block {}: props.{key} is required", doc.id);
        let props = match doc.block_type {
            BlockType::Chart => {
                let marks = p.marks.unwrap_or_default();
                let encodings = p.encodings.unwrap_or_default();
                let vis_type = p
                    .vis_type
                    .unwrap_or_else(|| super::infer_chart_type(&marks, &encodings));
                DescriptiveProps::Chart {
                    vis_type,
                    worksheet: p.worksheet,
                    marks,
                    encodings,
                }
            }
            BlockType::Text => DescriptiveProps::Text {
                content: p.content.unwrap_or_default(),
                formatting: p.formatting.unwrap_or_default(),
            },
            BlockType::Filter => DescriptiveProps::Filter {
                widget: p.widget.unwrap_or_else(|| WidgetType::from("other")),
                field: p.field.ok_or_else(|| missing("field"))?,
            },
            BlockType::Legend => DescriptiveProps::Legend {
                channel: p.channel.ok_or_else(|| missing("channel"))?,
            },
            BlockType::Multimedia => DescriptiveProps::Multimedia {
                kind: p.kind.unwrap_or(MultimediaKind::Image),
            },
        };
        Ok(Block {
            id: doc.id,
            x: doc.x,
            y: doc.y,
            w: doc.w,
            h: doc.h,
            props,
            params: p.params,
        })
    }
}

impl Serialize for Block {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        BlockDoc::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for Block {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let doc = BlockDoc::deserialize(d)?;
        Block::try_from(doc).map_err(serde::de::Error::custom)
    }
}

impl Serialize for Dashboard {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        DashboardDoc {
            id: self.id.clone(),
            width: self.width,
            height: self.height,
            blocks: self.blocks.clone(),
            interactions: self.declared_interactions.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Dashboard {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let doc = DashboardDoc::deserialize(d)?;
        Ok(Dashboard {
            id: doc.id,
            width: doc.width,
            height: doc.height,
            blocks: doc.blocks,
            declared_interactions: doc.interactions,
        })
    }
}

pub(crate) fn map_json_error(e: serde_json::Error, line_offset: usize) -> Error {
    use serde_json::error::Category;
    let line = (e.line() + line_offset) as u32;
    let column = e.column() as u32;
    match e.classify() {
        Category::Syntax | Category::Eof | Category::Io => Error::MalformedDocument {
            line,
            column,
            message: e.to_string(),
        },
        Category::Data => Error::SchemaViolation {
            path: format!("line {line}, column {column}"),
            message: e.to_string(),
        },
    }
}

/// Parses a canonical JSON document holding one dashboard or an array.
pub fn parse_dashboards(text: &str) -> Result<Vec<Dashboard>> {
    if text.trim_start().starts_with('[') {
        serde_json::from_str(text).map_err(|e| map_json_error(e, 0))
    } else {
        serde_json::from_str(text)
            .map(|d| vec![d])
            .map_err(|e| map_json_error(e, 0))
    }
}

/// Parses newline-delimited canonical JSON; blank lines are skipped.
pub fn parse_ndjson(text: &str) -> Result<Vec<Dashboard>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| serde_json::from_str(l).map_err(|e| map_json_error(e, i)))
        .collect()
}

pub fn to_json(dashboard: &Dashboard) -> String {
    serde_json::to_string(dashboard).expect("dashboard serialization is infallible")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_document() {
        let text = r#"{"id":"d","blocks":[
            {"id":"c1","type":"chart","x":0,"y":0,"w":10,"h":10,"props":{"marks":["bar"]}},
            {"id":"f1","type":"filter","x":10,"y":0,"w":10,"h":10,"props":{"widget":"slider","field":"Year"}}
        ],"interactions":[{"source":"f1","target":"c1","type":"filter"}]}"#;
        let ds = parse_dashboards(text).unwrap();
        assert_eq!(ds.len(), 1);
        assert_eq!(ds[0].blocks[0].props.chart_type(), Some(&ChartType::Bar));
        assert_eq!(ds[0].declared_interactions.len(), 1);
        let again = parse_dashboards(&to_json(&ds[0])).unwrap();
        assert_eq!(again, ds);
    }

    #[test]
    fn syntax_and_schema_errors_are_distinguished() {
        assert!(matches!(
            parse_dashboards(r#"{"id": "d", "blocks": ["#),
            Err(Error::MalformedDocument { .. })
        ));
        assert!(matches!(
            parse_dashboards(r#"{"id": "d", "blocks": [{"id":"l","type":"legend","x":0,"y":0,"w":1,"h":1}]}"#),
            Err(Error::SchemaViolation { .. })
        ));
        assert!(matches!(
            parse_dashboards(r#"{"id": "d"}"#),
            Err(Error::SchemaViolation { .. })
        ));
    }

    #[test]
    fn ndjson_reports_line_numbers() {
        let good = r#"{"id":"a","blocks":[]}"#;
        let text = format!("{good}\n\n{{\"id\": 3}}\n");
        match parse_ndjson(&text) {
            Err(Error::SchemaViolation { path, .. }) => assert!(path.starts_with("line 3"), "{path}"),
            other => panic!("{other:?}"),
        }
    }
}
