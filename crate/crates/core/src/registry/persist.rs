//! On-disk form of the registry: a TOML plant definition (`schema.toml`)
//! and an append-only event log (`events.log`).
//!
//! Event log lines are `timestamp,item_id,attr_name,value`. Each snapshot
//! opens with a marker line whose attribute is `@origin`, followed by one
//! line per attribute whose value changed relative to the item's previous
//! snapshot. An empty value means the attribute is absent from the
//! snapshot. Numbers are written with Rust's shortest round-trip format, so
//! a reload reproduces every value bit for bit; text and media values are
//! JSON-encoded.

use std::collections::BTreeMap;
use std::fs;
use std::io::{self, BufRead, Write};
use std::path::Path;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{
    AttributeValue, CustomAttributeDef, ItemId, ItemRecord, MediaRef, NewItem, Origin, Registry,
    RegistryError, StateSnapshot, Timestamp,
};

pub const SCHEMA_FILE: &str = "schema.toml";
pub const EVENT_LOG_FILE: &str = "events.log";
const ORIGIN_KEY: &str = "@origin";

#[derive(Debug, Error)]
pub enum PersistError {
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("schema file: {0}")]
    Schema(String),
    #[error("event log line {line}: {message}")]
    EventLog { line: usize, message: String },
    #[error(transparent)]
    Registry(#[from] RegistryError),
}

/// One item as declared in a plant definition file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ItemDefinition {
    pub id: ItemId,
    pub name: String,
    #[serde(default)]
    pub description: String,
    #[serde(default)]
    pub category: String,
    #[serde(default)]
    pub created_at: Timestamp,
    #[serde(default, rename = "attr")]
    pub attributes: Vec<CustomAttributeDef>,
    #[serde(default)]
    pub media: Vec<MediaRef>,
}

impl ItemDefinition {
    pub fn from_record(rec: &ItemRecord) -> Self {
        ItemDefinition {
            id: rec.id.clone(),
            name: rec.name.clone(),
            description: rec.description.clone(),
            category: rec.category.clone(),
            created_at: rec.created_at,
            attributes: rec.custom_attrs.values().cloned().collect(),
            media: rec.media_refs.clone(),
        }
    }

    /// Registers the item, its attributes (with stream bindings) and media.
    pub fn install(&self, registry: &Registry) -> Result<ItemId, RegistryError> {
        let id = registry.create_item(NewItem {
            id: Some(self.id.clone()),
            name: self.name.clone(),
            description: self.description.clone(),
            category: self.category.clone(),
            created_at: self.created_at,
        })?;
        for def in &self.attributes {
            registry.define_custom_attribute(&id, def.clone())?;
        }
        for media in &self.media {
            registry.add_media(&id, media.clone())?;
        }
        Ok(id)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlantDefinition {
    #[serde(default, rename = "item")]
    pub items: Vec<ItemDefinition>,
}

impl PlantDefinition {
    pub fn from_registry(registry: &Registry) -> Self {
        let items = registry
            .item_ids()
            .iter()
            .filter_map(|id| registry.with_item(id, ItemDefinition::from_record).ok())
            .collect();
        PlantDefinition { items }
    }

    pub fn parse(text: &str) -> Result<Self, PersistError> {
        toml::from_str(text).map_err(|e| PersistError::Schema(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("plant definition is always serializable")
    }

    pub fn build(&self) -> Result<Registry, RegistryError> {
        let registry = Registry::new();
        for item in &self.items {
            item.install(&registry)?;
        }
        Ok(registry)
    }
}

/// A parsed event log line.
#[derive(Debug, Clone, PartialEq)]
pub struct EventLogRecord {
    pub timestamp: Timestamp,
    pub item: ItemId,
    pub attr: String,
    /// `None` when the attribute is absent from the snapshot.
    pub value: Option<AttributeValue>,
}

impl EventLogRecord {
    pub fn to_line(&self) -> String {
        format!(
            "{:?},{},{},{}",
            self.timestamp.minutes(),
            self.item,
            self.attr,
            match (&self.value, self.attr == ORIGIN_KEY) {
                (Some(AttributeValue::Text(origin)), true) => origin.clone(),
                (value, _) => value.as_ref().map(encode_value).unwrap_or_default(),
            }
        )
    }

    pub fn parse_line(line: &str) -> Result<Self, String> {
        let mut parts = line.splitn(4, ',');
        let (Some(t), Some(item), Some(attr), Some(value)) =
            (parts.next(), parts.next(), parts.next(), parts.next())
        else {
            return Err("expected `timestamp,item_id,attr_name,value`".into());
        };
        let t: f64 = t
            .parse()
            .map_err(|_| format!("invalid timestamp `{t}`"))?;
        if !t.is_finite() {
            return Err(format!("timestamp `{t}` is not finite"));
        }
        if item.is_empty() || attr.is_empty() {
            return Err("empty item id or attribute name".into());
        }
        let value = if attr == ORIGIN_KEY {
            Origin::parse(value).ok_or_else(|| format!("unknown origin `{value}`"))?;
            Some(AttributeValue::Text(value.to_string()))
        } else {
            decode_value(value)?
        };
        Ok(EventLogRecord {
            timestamp: Timestamp::new(t),
            item: ItemId::new(item),
            attr: attr.to_string(),
            value,
        })
    }
}

fn encode_value(value: &AttributeValue) -> String {
    match value {
        AttributeValue::Number(v) => format!("{v:?}"),
        AttributeValue::Text(s) => serde_json::to_string(s).expect("string serializes"),
        AttributeValue::Media(m) => serde_json::to_string(m).expect("media serializes"),
    }
}

fn decode_value(raw: &str) -> Result<Option<AttributeValue>, String> {
    if raw.is_empty() {
        return Ok(None);
    }
    let value = match raw.as_bytes()[0] {
        b'"' => AttributeValue::Text(
            serde_json::from_str(raw).map_err(|e| format!("invalid text value: {e}"))?,
        ),
        b'{' => AttributeValue::Media(
            serde_json::from_str(raw).map_err(|e| format!("invalid media value: {e}"))?,
        ),
        _ => AttributeValue::Number(
            raw.parse()
                .map_err(|_| format!("invalid numeric value `{raw}`"))?,
        ),
    };
    Ok(Some(value))
}

/// Lines describing `snap` given the item's previous value map.
fn snapshot_records(
    item: &ItemId,
    prev: &BTreeMap<String, AttributeValue>,
    snap: &StateSnapshot,
) -> Vec<EventLogRecord> {
    let mut out = vec![EventLogRecord {
        timestamp: snap.timestamp,
        item: item.clone(),
        attr: ORIGIN_KEY.to_string(),
        value: Some(AttributeValue::Text(snap.origin.as_str().to_string())),
    }];
    for (k, v) in &snap.values {
        if prev.get(k).is_none_or(|p| !same_value(p, v)) {
            out.push(EventLogRecord {
                timestamp: snap.timestamp,
                item: item.clone(),
                attr: k.clone(),
                value: Some(v.clone()),
            });
        }
    }
    for k in prev.keys() {
        if !snap.values.contains_key(k) {
            out.push(EventLogRecord {
                timestamp: snap.timestamp,
                item: item.clone(),
                attr: k.clone(),
                value: None,
            });
        }
    }
    out
}

/// Bitwise comparison so that e.g. `0.0` and `-0.0` are both logged.
fn same_value(a: &AttributeValue, b: &AttributeValue) -> bool {
    match (a, b) {
        (AttributeValue::Number(x), AttributeValue::Number(y)) => x.to_bits() == y.to_bits(),
        _ => a == b,
    }
}

/// Writes every snapshot of every item in global time order (ties by item id).
pub fn write_event_log(registry: &Registry, mut out: impl Write) -> io::Result<()> {
    let records: Vec<ItemRecord> = registry
        .item_ids()
        .iter()
        .filter_map(|id| registry.item(id).ok())
        .collect();
    let mut lines: Vec<(Timestamp, &ItemId, Vec<EventLogRecord>)> = Vec::new();
    for rec in &records {
        let mut prev = BTreeMap::new();
        for snap in &rec.state_history {
            lines.push((snap.timestamp, &rec.id, snapshot_records(&rec.id, &prev, snap)));
            prev = snap.values.clone();
        }
    }
    lines.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
    for (_, _, group) in lines {
        for r in group {
            writeln!(out, "{}", r.to_line())?;
        }
    }
    Ok(())
}

/// Replays an event log onto a registry built from the matching schema.
/// Snapshots are restored verbatim, including values of attributes that
/// have since been removed from the schema.
pub fn replay_event_log(registry: &Registry, input: impl BufRead) -> Result<usize, PersistError> {
    let mut maps: BTreeMap<ItemId, BTreeMap<String, AttributeValue>> = BTreeMap::new();
    let mut pending: Option<(usize, ItemId, StateSnapshot)> = None;
    let mut count = 0;

    let flush = |pending: &mut Option<(usize, ItemId, StateSnapshot)>,
                 maps: &mut BTreeMap<ItemId, BTreeMap<String, AttributeValue>>|
     -> Result<(), PersistError> {
        if let Some((line, id, snap)) = pending.take() {
            let cell = registry.cell(&id).map_err(|e| PersistError::EventLog {
                line,
                message: e.to_string(),
            })?;
            let mut rec = cell.write();
            if let Some(last) = rec.state_history.last() {
                if snap.timestamp <= last.timestamp {
                    return Err(PersistError::EventLog {
                        line,
                        message: format!("snapshot at {} is not after {}", snap.timestamp, last.timestamp),
                    });
                }
            }
            maps.insert(id, snap.values.clone());
            rec.last_update = snap.timestamp;
            rec.state_history.push(snap);
        }
        Ok(())
    };

    for (idx, line) in input.lines().enumerate() {
        let lineno = idx + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record = EventLogRecord::parse_line(&line).map_err(|message| PersistError::EventLog {
            line: lineno,
            message,
        })?;
        if record.attr == ORIGIN_KEY {
            flush(&mut pending, &mut maps)?;
            let origin = record
                .value
                .as_ref()
                .and_then(AttributeValue::as_text)
                .and_then(Origin::parse)
                .expect("validated while parsing");
            let values = maps.get(&record.item).cloned().unwrap_or_default();
            pending = Some((
                lineno,
                record.item,
                StateSnapshot {
                    timestamp: record.timestamp,
                    values,
                    origin,
                },
            ));
            count += 1;
            continue;
        }
        let Some((_, id, snap)) = pending.as_mut() else {
            return Err(PersistError::EventLog {
                line: lineno,
                message: "attribute line before any snapshot marker".into(),
            });
        };
        if *id != record.item || snap.timestamp.minutes().to_bits() != record.timestamp.minutes().to_bits() {
            return Err(PersistError::EventLog {
                line: lineno,
                message: "attribute line does not belong to the open snapshot".into(),
            });
        }
        match record.value {
            Some(v) => snap.values.insert(record.attr, v),
            None => snap.values.remove(&record.attr),
        };
    }
    flush(&mut pending, &mut maps)?;
    Ok(count)
}

/// Writes `schema.toml` and `events.log` into `dir`.
pub fn save(registry: &Registry, dir: &Path) -> Result<(), PersistError> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join(SCHEMA_FILE), PlantDefinition::from_registry(registry).to_toml())?;
    let mut log = io::BufWriter::new(fs::File::create(dir.join(EVENT_LOG_FILE))?);
    write_event_log(registry, &mut log)?;
    log.flush()?;
    Ok(())
}

/// Rebuilds a registry from a directory written by [`save`]. A missing
/// event log is treated as empty.
pub fn load(dir: &Path) -> Result<Registry, PersistError> {
    let schema = PlantDefinition::parse(&fs::read_to_string(dir.join(SCHEMA_FILE))?)?;
    let registry = schema.build()?;
    let log_path = dir.join(EVENT_LOG_FILE);
    if log_path.exists() {
        replay_event_log(&registry, io::BufReader::new(fs::File::open(log_path)?))?;
    }
    Ok(registry)
}

impl Registry {
    pub fn save(&self, dir: &Path) -> Result<(), PersistError> {
        save(self, dir)
    }

    pub fn load(dir: &Path) -> Result<Registry, PersistError> {
        load(dir)
    }

    /// Snapshot of every item record, for equality checks after a reload.
    pub fn records(&self) -> Vec<ItemRecord> {
        self.item_ids()
            .iter()
            .filter_map(|id| self.item(id).ok())
            .collect()
    }
}
