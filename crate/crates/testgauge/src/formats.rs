//! Item-format sidecar: a JSON object mapping item id to
//! `{"family": "single"|"multi"|"match"|"order", "m": int, "n": int}`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use testgauge_core::{FormatMap, ItemFormat};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
struct FormatEntry {
    family: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    m: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    n: Option<u32>,
}

fn entry_to_format(item: &str, entry: &FormatEntry) -> Result<ItemFormat> {
    let need = |v: Option<u32>, field: &str| {
        v.ok_or_else(|| Error::Format { item: item.to_owned(), reason: format!("missing `{field}`") })
    };
    let format = match entry.family.as_str() {
        "single" => ItemFormat::SingleChoice { m: need(entry.m, "m")? },
        "multi" => ItemFormat::MultiSelect { m: need(entry.m, "m")? },
        "match" => ItemFormat::Matching { n: need(entry.n, "n")?, m: need(entry.m, "m")? },
        "order" => ItemFormat::Ordering { n: need(entry.n, "n")? },
        other => {
            return Err(Error::Format { item: item.to_owned(), reason: format!("unknown family `{other}`") });
        }
    };
    format
        .validate()
        .map_err(|e| Error::Format { item: item.to_owned(), reason: e.to_string() })?;
    Ok(format)
}

pub fn parse_format_sidecar(text: &str) -> Result<FormatMap> {
    let raw: BTreeMap<String, FormatEntry> = serde_json::from_str(text)?;
    raw.iter().map(|(item, entry)| Ok((item.clone(), entry_to_format(item, entry)?))).collect()
}

pub fn write_format_sidecar(formats: &FormatMap) -> Result<String> {
    let raw: BTreeMap<&String, FormatEntry> = formats
        .iter()
        .map(|(id, f)| {
            let entry = match *f {
                ItemFormat::SingleChoice { m } => FormatEntry { family: "single".into(), m: Some(m), n: None },
                ItemFormat::MultiSelect { m } => FormatEntry { family: "multi".into(), m: Some(m), n: None },
                ItemFormat::Matching { n, m } => FormatEntry { family: "match".into(), m: Some(m), n: Some(n) },
                ItemFormat::Ordering { n } => FormatEntry { family: "order".into(), m: None, n: Some(n) },
            };
            (id, entry)
        })
        .collect();
    Ok(serde_json::to_string_pretty(&raw)?)
}
