use std::borrow::Borrow;
use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

/// Logical time in minutes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(transparent)]
pub struct Timestamp(f64);

impl Timestamp {
    pub const ZERO: Timestamp = Timestamp(0.0);
    pub const MAX: Timestamp = Timestamp(f64::INFINITY);

    /// Panics on NaN; infinities are allowed so `MAX` can be used as an
    /// open upper bound in queries.
    pub fn new(minutes: f64) -> Self {
        assert!(!minutes.is_nan(), "timestamp must not be NaN");
        Timestamp(minutes)
    }

    pub fn minutes(self) -> f64 {
        self.0
    }
}

impl From<f64> for Timestamp {
    fn from(minutes: f64) -> Self {
        Timestamp::new(minutes)
    }
}

impl Eq for Timestamp {}

impl PartialOrd for Timestamp {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Timestamp {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

impl fmt::Display for Timestamp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

macro_rules! string_id {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(String);

        impl $name {
            pub fn new(id: impl Into<String>) -> Self {
                $name(id.into())
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl From<&str> for $name {
            fn from(s: &str) -> Self {
                $name(s.to_string())
            }
        }

        impl From<String> for $name {
            fn from(s: String) -> Self {
                $name(s)
            }
        }

        impl Borrow<str> for $name {
            fn borrow(&self) -> &str {
                &self.0
            }
        }
    };
}

string_id!(
    /// Identifier of a twin item, e.g. `000X`.
    ItemId
);
string_id!(
    /// Identifier of a sensor data stream coming from the plant.
    StreamId
);

/// True when `id` is usable as an item identifier: non-empty, ASCII
/// alphanumerics plus `-`, `_` and `.`. The restriction keeps ids safe in
/// URL path segments, QR payloads and the comma-separated event log.
pub fn is_valid_item_id(id: &str) -> bool {
    !id.is_empty()
        && id
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.'))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AttributeKind {
    Double,
    Integer,
    Long,
    Text,
    Media,
    Model3d,
}

impl AttributeKind {
    pub fn is_numeric(self) -> bool {
        matches!(
            self,
            AttributeKind::Double | AttributeKind::Integer | AttributeKind::Long
        )
    }

    pub fn as_str(self) -> &'static str {
        match self {
            AttributeKind::Double => "double",
            AttributeKind::Integer => "integer",
            AttributeKind::Long => "long",
            AttributeKind::Text => "text",
            AttributeKind::Media => "media",
            AttributeKind::Model3d => "model3d",
        }
    }

    pub(crate) fn accepts(self, value: &AttributeValue) -> bool {
        match (self, value) {
            (AttributeKind::Double, AttributeValue::Number(v)) => v.is_finite(),
            (AttributeKind::Integer | AttributeKind::Long, AttributeValue::Number(v)) => {
                v.is_finite() && v.fract() == 0.0
            }
            (AttributeKind::Text, AttributeValue::Text(_)) => true,
            (AttributeKind::Media | AttributeKind::Model3d, AttributeValue::Media(m)) => {
                !m.uri.is_empty()
            }
            _ => false,
        }
    }
}

/// Schema entry for a dynamic attribute of one item.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CustomAttributeDef {
    pub name: String,
    pub kind: AttributeKind,
    #[serde(default)]
    pub unit: String,
    #[serde(default, rename = "stream", skip_serializing_if = "Option::is_none")]
    pub stream_binding: Option<StreamId>,
}

impl CustomAttributeDef {
    pub fn new(name: impl Into<String>, kind: AttributeKind, unit: impl Into<String>) -> Self {
        CustomAttributeDef {
            name: name.into(),
            kind,
            unit: unit.into(),
            stream_binding: None,
        }
    }

    pub fn bound_to(mut self, stream: impl Into<StreamId>) -> Self {
        self.stream_binding = Some(stream.into());
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MediaKind {
    Photo,
    Video,
    Audio,
    Document,
    Model3d,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MediaRef {
    pub kind: MediaKind,
    pub uri: String,
    #[serde(default)]
    pub caption: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AttributeValue {
    Number(f64),
    Text(String),
    Media(MediaRef),
}

impl AttributeValue {
    pub fn as_number(&self) -> Option<f64> {
        match self {
            AttributeValue::Number(v) => Some(*v),
            _ => None,
        }
    }

    pub fn as_text(&self) -> Option<&str> {
        match self {
            AttributeValue::Text(s) => Some(s),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Origin {
    SensorIngest,
    AdministratorEdit,
    ScenarioExecution,
    ProcedureCompletion,
}

impl Origin {
    pub fn as_str(self) -> &'static str {
        match self {
            Origin::SensorIngest => "sensor-ingest",
            Origin::AdministratorEdit => "administrator-edit",
            Origin::ScenarioExecution => "scenario-execution",
            Origin::ProcedureCompletion => "procedure-completion",
        }
    }

    pub fn parse(s: &str) -> Option<Origin> {
        match s {
            "sensor-ingest" => Some(Origin::SensorIngest),
            "administrator-edit" => Some(Origin::AdministratorEdit),
            "scenario-execution" => Some(Origin::ScenarioExecution),
            "procedure-completion" => Some(Origin::ProcedureCompletion),
            _ => None,
        }
    }
}

/// Full attribute map of an item at one instant. Every snapshot carries the
/// complete current value map, not just the attributes that changed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateSnapshot {
    pub timestamp: Timestamp,
    pub values: BTreeMap<String, AttributeValue>,
    pub origin: Origin,
}

impl StateSnapshot {
    pub fn number(&self, attr: &str) -> Option<f64> {
        self.values.get(attr).and_then(AttributeValue::as_number)
    }
}

/// Keys that may appear in snapshots without a custom attribute definition.
pub const STATIC_KEYS: &[&str] = &[
    "name",
    "description",
    "category",
    "last_procedure",
    "last_scenario",
];

/// The digital twin of one manufacturing resource.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ItemRecord {
    pub id: ItemId,
    pub name: String,
    pub description: String,
    pub category: String,
    pub created_at: Timestamp,
    pub last_update: Timestamp,
    pub custom_attrs: BTreeMap<String, CustomAttributeDef>,
    pub media_refs: Vec<MediaRef>,
    pub state_history: Vec<StateSnapshot>,
}

impl ItemRecord {
    pub(crate) fn new(
        id: ItemId,
        name: String,
        description: String,
        category: String,
        created_at: Timestamp,
    ) -> Self {
        ItemRecord {
            id,
            name,
            description,
            category,
            created_at,
            last_update: created_at,
            custom_attrs: BTreeMap::new(),
            media_refs: Vec::new(),
            state_history: Vec::new(),
        }
    }

    /// The implicit state before any snapshot was recorded.
    pub fn creation_snapshot(&self) -> StateSnapshot {
        StateSnapshot {
            timestamp: self.created_at,
            values: BTreeMap::new(),
            origin: Origin::AdministratorEdit,
        }
    }

    pub fn latest(&self) -> StateSnapshot {
        self.state_history
            .last()
            .cloned()
            .unwrap_or_else(|| self.creation_snapshot())
    }

    /// Newest snapshot with `timestamp <= t`, or the creation state.
    pub fn snapshot_at(&self, t: Timestamp) -> StateSnapshot {
        let idx = self.state_history.partition_point(|s| s.timestamp <= t);
        if idx == 0 {
            self.creation_snapshot()
        } else {
            self.state_history[idx - 1].clone()
        }
    }

    pub fn history_between(&self, from: Timestamp, to: Timestamp) -> Vec<StateSnapshot> {
        let lo = self.state_history.partition_point(|s| s.timestamp < from);
        let hi = self.state_history.partition_point(|s| s.timestamp <= to);
        if lo >= hi {
            return Vec::new();
        }
        self.state_history[lo..hi].to_vec()
    }

    pub(crate) fn key_allowed(&self, key: &str) -> bool {
        self.custom_attrs.contains_key(key) || STATIC_KEYS.contains(&key)
    }
}
