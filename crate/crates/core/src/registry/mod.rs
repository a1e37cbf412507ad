//! Ontology-based knowledge structure: one [`ItemRecord`] per manufacturing
//! resource with a flexible set of custom attributes.
//!
//! Numeric custom attributes can be bound 1:1 to plant data streams. Each
//! ingest event appends a [`StateSnapshot`] carrying the full value map, so
//! the history answers "what did the machine look like at time t" with a
//! single lookup. Rebinding a stream replaces the previous binding on both
//! sides (last binding wins).
//!
//! The registry is shareable across threads. Item records sit behind their
//! own locks, so ingest on distinct items proceeds in parallel while
//! readers of one item never observe a half-written snapshot.

mod persist;
mod qr;
mod types;

use std::collections::{BTreeMap, HashMap};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use parking_lot::RwLock;
use thiserror::Error;

pub use persist::{EventLogRecord, ItemDefinition, PersistError, PlantDefinition};
pub use qr::QrPayload;
pub use types::{
    is_valid_item_id, AttributeKind, AttributeValue, CustomAttributeDef, ItemId, ItemRecord,
    MediaKind, MediaRef, Origin, StateSnapshot, StreamId, Timestamp, STATIC_KEYS,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RegistryError {
    #[error("item `{0}` already exists")]
    DuplicateId(ItemId),
    #[error("invalid item id `{0}`")]
    InvalidId(String),
    #[error("unknown item `{0}`")]
    UnknownItem(ItemId),
    #[error("attribute `{attr}` already defined on item `{item}`")]
    DuplicateAttribute { item: ItemId, attr: String },
    #[error("unknown attribute `{attr}` on item `{item}`")]
    UnknownAttribute { item: ItemId, attr: String },
    #[error("invalid attribute name `{0}`")]
    InvalidAttributeName(String),
    #[error("attribute `{attr}` of kind {kind} cannot be bound to a stream")]
    InvalidBinding { attr: String, kind: &'static str },
    #[error("stream `{0}` is not bound to any attribute")]
    UnboundStream(StreamId),
    #[error("timestamp {got} is not after the latest snapshot {last} of item `{item}`")]
    NonMonotonicTimestamp {
        item: ItemId,
        last: Timestamp,
        got: Timestamp,
    },
    #[error("invalid value for `{attr}`: {reason}")]
    InvalidValue { attr: String, reason: String },
    #[error("media reference must have a non-empty uri")]
    InvalidMedia,
    #[error("malformed QR payload `{0}`")]
    MalformedPayload(String),
}

pub type Result<T, E = RegistryError> = std::result::Result<T, E>;

/// Static attributes for [`Registry::create_item`].
#[derive(Debug, Clone, Default)]
pub struct NewItem {
    pub id: Option<ItemId>,
    pub name: String,
    pub description: String,
    pub category: String,
    pub created_at: Timestamp,
}

impl NewItem {
    pub fn named(name: impl Into<String>) -> Self {
        NewItem {
            name: name.into(),
            ..NewItem::default()
        }
    }

    pub fn with_id(mut self, id: impl Into<ItemId>) -> Self {
        self.id = Some(id.into());
        self
    }

    pub fn with_category(mut self, category: impl Into<String>) -> Self {
        self.category = category.into();
        self
    }

    pub fn with_description(mut self, description: impl Into<String>) -> Self {
        self.description = description.into();
        self
    }

    pub fn created_at(mut self, t: impl Into<Timestamp>) -> Self {
        self.created_at = t.into();
        self
    }
}

/// Where a stream's samples land.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Binding {
    pub item: ItemId,
    pub attr: String,
}

/// Result of applying one sample (or one frame) to an item.
#[derive(Debug, Clone, PartialEq)]
pub struct IngestOutcome {
    pub item: ItemId,
    pub timestamp: Timestamp,
    /// `(attribute, value)` pairs written by this event.
    pub updates: Vec<(String, f64)>,
}

type ItemCell = Arc<RwLock<ItemRecord>>;

#[derive(Default)]
pub struct Registry {
    items: RwLock<BTreeMap<ItemId, ItemCell>>,
    streams: RwLock<HashMap<StreamId, Binding>>,
    auto_seq: AtomicU64,
}

impl std::fmt::Debug for Registry {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Registry")
            .field("items", &self.items.read().len())
            .field("streams", &self.streams.read().len())
            .finish()
    }
}

fn validate_attr_name(name: &str) -> Result<()> {
    let ok = !name.trim().is_empty()
        && !name.contains([',', '\n', '\r'])
        && !name.starts_with('@')
        && !STATIC_KEYS.contains(&name);
    if ok {
        Ok(())
    } else {
        Err(RegistryError::InvalidAttributeName(name.to_string()))
    }
}

impl Registry {
    pub fn new() -> Self {
        Registry::default()
    }

    fn cell(&self, id: &ItemId) -> Result<ItemCell> {
        self.items
            .read()
            .get(id)
            .cloned()
            .ok_or_else(|| RegistryError::UnknownItem(id.clone()))
    }

    pub fn create_item(&self, new: NewItem) -> Result<ItemId> {
        let mut items = self.items.write();
        let id = match new.id {
            Some(id) => {
                if !is_valid_item_id(id.as_str()) {
                    return Err(RegistryError::InvalidId(id.to_string()));
                }
                if items.contains_key(&id) {
                    return Err(RegistryError::DuplicateId(id));
                }
                id
            }
            None => loop {
                let n = self.auto_seq.fetch_add(1, Ordering::Relaxed) + 1;
                let candidate = ItemId::new(format!("item-{n:04}"));
                if !items.contains_key(&candidate) {
                    break candidate;
                }
            },
        };
        let record = ItemRecord::new(
            id.clone(),
            new.name,
            new.description,
            new.category,
            new.created_at,
        );
        items.insert(id.clone(), Arc::new(RwLock::new(record)));
        Ok(id)
    }

    pub fn contains(&self, id: &ItemId) -> bool {
        self.items.read().contains_key(id)
    }

    pub fn item_ids(&self) -> Vec<ItemId> {
        self.items.read().keys().cloned().collect()
    }

    /// Clone of the full record, history included.
    pub fn item(&self, id: &ItemId) -> Result<ItemRecord> {
        Ok(self.cell(id)?.read().clone())
    }

    /// Runs `f` against the record under a read lock, avoiding a clone of the
    /// history.
    pub fn with_item<R>(&self, id: &ItemId, f: impl FnOnce(&ItemRecord) -> R) -> Result<R> {
        Ok(f(&self.cell(id)?.read()))
    }

    pub fn update_static(
        &self,
        id: &ItemId,
        name: Option<String>,
        description: Option<String>,
        category: Option<String>,
    ) -> Result<()> {
        let cell = self.cell(id)?;
        let mut rec = cell.write();
        if let Some(name) = name {
            rec.name = name;
        }
        if let Some(description) = description {
            rec.description = description;
        }
        if let Some(category) = category {
            rec.category = category;
        }
        Ok(())
    }

    pub fn add_media(&self, id: &ItemId, media: MediaRef) -> Result<()> {
        if media.uri.trim().is_empty() {
            return Err(RegistryError::InvalidMedia);
        }
        self.cell(id)?.write().media_refs.push(media);
        Ok(())
    }

    pub fn define_custom_attribute(&self, id: &ItemId, def: CustomAttributeDef) -> Result<()> {
        validate_attr_name(&def.name)?;
        if def.stream_binding.is_some() && !def.kind.is_numeric() {
            return Err(RegistryError::InvalidBinding {
                attr: def.name,
                kind: def.kind.as_str(),
            });
        }
        let cell = self.cell(id)?;
        let mut streams = self.streams.write();
        let mut rec = cell.write();
        if rec.custom_attrs.contains_key(&def.name) {
            return Err(RegistryError::DuplicateAttribute {
                item: id.clone(),
                attr: def.name,
            });
        }
        let binding = def.stream_binding.clone();
        let attr = def.name.clone();
        rec.custom_attrs.insert(def.name.clone(), def);
        if let Some(stream) = binding {
            // The record lock is already held; release the attribute's
            // binding field only through `rebind_locked`.
            drop(rec);
            self.rebind_locked(&mut streams, id, &attr, stream)?;
        }
        Ok(())
    }

    /// Removes an attribute and its stream binding. Existing snapshots keep
    /// their historic values.
    pub fn remove_custom_attribute(&self, id: &ItemId, attr: &str) -> Result<CustomAttributeDef> {
        let cell = self.cell(id)?;
        let mut streams = self.streams.write();
        let mut rec = cell.write();
        let def = rec
            .custom_attrs
            .remove(attr)
            .ok_or_else(|| RegistryError::UnknownAttribute {
                item: id.clone(),
                attr: attr.to_string(),
            })?;
        if let Some(stream) = &def.stream_binding {
            streams.remove(stream);
        }
        Ok(def)
    }

    pub fn bind_stream(&self, id: &ItemId, attr: &str, stream: impl Into<StreamId>) -> Result<()> {
        let mut streams = self.streams.write();
        self.rebind_locked(&mut streams, id, attr, stream.into())
    }

    fn rebind_locked(
        &self,
        streams: &mut HashMap<StreamId, Binding>,
        id: &ItemId,
        attr: &str,
        stream: StreamId,
    ) -> Result<()> {
        let cell = self.cell(id)?;
        {
            let rec = cell.read();
            let def = rec
                .custom_attrs
                .get(attr)
                .ok_or_else(|| RegistryError::UnknownAttribute {
                    item: id.clone(),
                    attr: attr.to_string(),
                })?;
            if !def.kind.is_numeric() {
                return Err(RegistryError::InvalidBinding {
                    attr: attr.to_string(),
                    kind: def.kind.as_str(),
                });
            }
        }

        // Stream previously feeding some other attribute loses that binding.
        if let Some(prev) = streams.get(&stream).cloned() {
            if prev.item != *id || prev.attr != attr {
                let prev_cell = self.cell(&prev.item)?;
                let mut prev_rec = prev_cell.write();
                if let Some(def) = prev_rec.custom_attrs.get_mut(&prev.attr) {
                    def.stream_binding = None;
                }
            }
        }

        let mut rec = cell.write();
        let def = rec.custom_attrs.get_mut(attr).expect("checked above");
        if let Some(old) = def.stream_binding.replace(stream.clone()) {
            if old != stream {
                streams.remove(&old);
            }
        }
        streams.insert(
            stream,
            Binding {
                item: id.clone(),
                attr: attr.to_string(),
            },
        );
        Ok(())
    }

    pub fn binding(&self, stream: &StreamId) -> Option<Binding> {
        self.streams.read().get(stream).cloned()
    }

    pub fn ingest_sample(
        &self,
        stream: impl Into<StreamId>,
        t: impl Into<Timestamp>,
        value: f64,
    ) -> Result<IngestOutcome> {
        let stream = stream.into();
        let mut out = self.ingest_frame(t, &[(stream, value)])?;
        Ok(out.pop().expect("one sample yields one outcome"))
    }

    /// Applies samples that share one timestamp. Samples landing on the same
    /// item produce a single snapshot. The frame is validated as a whole
    /// before anything is written.
    pub fn ingest_frame(
        &self,
        t: impl Into<Timestamp>,
        samples: &[(StreamId, f64)],
    ) -> Result<Vec<IngestOutcome>> {
        let t = t.into();
        let streams = self.streams.read();

        let mut per_item: BTreeMap<ItemId, Vec<(String, f64)>> = BTreeMap::new();
        for (stream, value) in samples {
            let binding = streams
                .get(stream)
                .ok_or_else(|| RegistryError::UnboundStream(stream.clone()))?;
            if !value.is_finite() {
                return Err(RegistryError::InvalidValue {
                    attr: binding.attr.clone(),
                    reason: "sample is not finite".into(),
                });
            }
            per_item
                .entry(binding.item.clone())
                .or_default()
                .push((binding.attr.clone(), *value));
        }

        // Lock every touched item in id order so concurrent frames cannot
        // deadlock, validate, then write.
        let cells: Vec<(ItemId, ItemCell)> = per_item
            .keys()
            .map(|id| Ok((id.clone(), self.cell(id)?)))
            .collect::<Result<_>>()?;
        let mut guards: Vec<_> = cells.iter().map(|(id, c)| (id, c.write())).collect();

        for (id, rec) in guards.iter() {
            check_monotonic(rec, id, t)?;
            for (attr, value) in &per_item[*id] {
                let def = rec.custom_attrs.get(attr).expect("binding implies attribute");
                if !def.kind.accepts(&AttributeValue::Number(*value)) {
                    return Err(RegistryError::InvalidValue {
                        attr: attr.clone(),
                        reason: format!("{value} is not a valid {}", def.kind.as_str()),
                    });
                }
            }
        }

        let mut outcomes = Vec::with_capacity(guards.len());
        for (id, rec) in guards.iter_mut() {
            let updates = per_item.remove(*id).unwrap_or_default();
            let mut values = rec.latest().values;
            for (attr, value) in &updates {
                values.insert(attr.clone(), AttributeValue::Number(*value));
            }
            push_snapshot(
                rec,
                StateSnapshot {
                    timestamp: t,
                    values,
                    origin: Origin::SensorIngest,
                },
            );
            outcomes.push(IngestOutcome {
                item: (*id).clone(),
                timestamp: t,
                updates,
            });
        }
        Ok(outcomes)
    }

    /// Appends a snapshot made of the current values plus `updates`.
    pub fn record_snapshot(
        &self,
        id: &ItemId,
        t: impl Into<Timestamp>,
        origin: Origin,
        updates: BTreeMap<String, AttributeValue>,
    ) -> Result<StateSnapshot> {
        let t = t.into();
        let cell = self.cell(id)?;
        let mut rec = cell.write();
        check_monotonic(&rec, id, t)?;
        for (key, value) in &updates {
            if !rec.key_allowed(key) {
                return Err(RegistryError::UnknownAttribute {
                    item: id.clone(),
                    attr: key.clone(),
                });
            }
            if let Some(def) = rec.custom_attrs.get(key) {
                if !def.kind.accepts(value) {
                    return Err(RegistryError::InvalidValue {
                        attr: key.clone(),
                        reason: format!("value does not match kind {}", def.kind.as_str()),
                    });
                }
            }
        }
        let mut values = rec.latest().values;
        values.extend(updates);
        let snap = StateSnapshot {
            timestamp: t,
            values,
            origin,
        };
        push_snapshot(&mut rec, snap.clone());
        Ok(snap)
    }

    /// Earliest timestamp `>= not_before` that a new snapshot of `id` may use.
    pub fn next_free_timestamp(&self, id: &ItemId, not_before: Timestamp) -> Result<Timestamp> {
        let cell = self.cell(id)?;
        let rec = cell.read();
        let floor = match rec.state_history.last() {
            Some(last) => {
                let bumped = last.timestamp.minutes() + TIMESTAMP_STEP;
                Timestamp::new(bumped.max(next_up(last.timestamp.minutes())))
            }
            None => rec.created_at,
        };
        Ok(not_before.max(floor))
    }

    pub fn snapshot_at(&self, id: &ItemId, t: impl Into<Timestamp>) -> Result<StateSnapshot> {
        let t = t.into();
        self.with_item(id, |rec| rec.snapshot_at(t))
    }

    pub fn latest(&self, id: &ItemId) -> Result<StateSnapshot> {
        self.with_item(id, ItemRecord::latest)
    }

    pub fn history(
        &self,
        id: &ItemId,
        from: impl Into<Timestamp>,
        to: impl Into<Timestamp>,
    ) -> Result<Vec<StateSnapshot>> {
        let (from, to) = (from.into(), to.into());
        self.with_item(id, |rec| rec.history_between(from, to))
    }

    pub fn encode_qr(&self, id: &ItemId) -> Result<QrPayload> {
        if !self.contains(id) {
            return Err(RegistryError::UnknownItem(id.clone()));
        }
        Ok(QrPayload::for_item(id))
    }

    pub fn decode_qr(&self, payload: &str) -> Result<ItemId> {
        QrPayload::decode(payload)
    }

    /// Decodes the payload and checks that the item is registered.
    pub fn resolve_qr(&self, payload: &str) -> Result<ItemId> {
        let id = QrPayload::decode(payload)?;
        if self.contains(&id) {
            Ok(id)
        } else {
            Err(RegistryError::UnknownItem(id))
        }
    }
}

/// Spacing used when a non-sensor event must be squeezed in after the
/// latest snapshot.
pub const TIMESTAMP_STEP: f64 = 1e-6;

fn next_up(x: f64) -> f64 {
    if x.is_infinite() {
        return x;
    }
    let bits = x.to_bits();
    let next = if x >= 0.0 { bits + 1 } else { bits - 1 };
    f64::from_bits(if x == 0.0 { 1 } else { next })
}

fn check_monotonic(rec: &ItemRecord, id: &ItemId, t: Timestamp) -> Result<()> {
    if !t.minutes().is_finite() {
        return Err(RegistryError::InvalidValue {
            attr: "timestamp".into(),
            reason: "timestamp must be finite".into(),
        });
    }
    match rec.state_history.last() {
        Some(last) if t <= last.timestamp => Err(RegistryError::NonMonotonicTimestamp {
            item: id.clone(),
            last: last.timestamp,
            got: t,
        }),
        None if t < rec.created_at => Err(RegistryError::NonMonotonicTimestamp {
            item: id.clone(),
            last: rec.created_at,
            got: t,
        }),
        _ => Ok(()),
    }
}

fn push_snapshot(rec: &mut ItemRecord, snap: StateSnapshot) {
    rec.last_update = snap.timestamp;
    rec.state_history.push(snap);
}
