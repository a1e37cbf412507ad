use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use uuid::Uuid;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Method {
    Get,
    Put,
    Post,
    Delete,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Get => "GET",
            Method::Put => "PUT",
            Method::Post => "POST",
            Method::Delete => "DELETE",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "GET" => Ok(Method::Get),
            "PUT" => Ok(Method::Put),
            "POST" => Ok(Method::Post),
            "DELETE" => Ok(Method::Delete),
            other => Err(format!("unsupported method `{other}`")),
        }
    }
}

/// Failure classes reported in error envelopes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorKind {
    NoRoute,
    MethodNotAllowed,
    BadRequest,
    UnknownResource,
    Conflict,
    ProducerFailure,
}

impl ErrorKind {
    pub fn code(self) -> u16 {
        match self {
            ErrorKind::NoRoute | ErrorKind::UnknownResource => 404,
            ErrorKind::MethodNotAllowed => 405,
            ErrorKind::BadRequest => 400,
            ErrorKind::Conflict => 409,
            ErrorKind::ProducerFailure => 500,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "state", rename_all = "snake_case")]
pub enum Status {
    Pending,
    Ok,
    Error {
        kind: ErrorKind,
        code: u16,
        message: String,
    },
}

impl Status {
    pub fn error(kind: ErrorKind, message: impl Into<String>) -> Self {
        Status::Error {
            kind,
            code: kind.code(),
            message: message.into(),
        }
    }

    pub fn is_ok(&self) -> bool {
        matches!(self, Status::Ok)
    }

    pub fn code(&self) -> u16 {
        match self {
            Status::Pending | Status::Ok => 200,
            Status::Error { code, .. } => *code,
        }
    }
}

/// A request travelling to a producer, or the response travelling back.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ServiceEnvelope {
    pub correlation_id: Uuid,
    pub method: Method,
    pub resource_path: String,
    #[serde(default)]
    pub query: BTreeMap<String, String>,
    #[serde(default)]
    pub body: Value,
    #[serde(default)]
    pub consumer_id: String,
    #[serde(default)]
    pub producer_id: Option<String>,
    pub status: Status,
}

impl ServiceEnvelope {
    /// New request with a fresh correlation id. A `?query` suffix on `path`
    /// is split off into [`ServiceEnvelope::query`].
    pub fn request(method: Method, path: &str) -> Self {
        let (path, query) = match path.split_once('?') {
            Some((p, q)) => (p, parse_query(q)),
            None => (path, BTreeMap::new()),
        };
        ServiceEnvelope {
            correlation_id: Uuid::new_v4(),
            method,
            resource_path: path.to_string(),
            query,
            body: Value::Null,
            consumer_id: String::new(),
            producer_id: None,
            status: Status::Pending,
        }
    }

    pub fn get(path: &str) -> Self {
        ServiceEnvelope::request(Method::Get, path)
    }

    pub fn post(path: &str, body: Value) -> Self {
        ServiceEnvelope::request(Method::Post, path).with_body(body)
    }

    pub fn with_body(mut self, body: Value) -> Self {
        self.body = body;
        self
    }

    pub fn from_consumer(mut self, consumer: impl Into<String>) -> Self {
        self.consumer_id = consumer.into();
        self
    }

    pub fn with_correlation(mut self, id: Uuid) -> Self {
        self.correlation_id = id;
        self
    }

    pub fn is_ok(&self) -> bool {
        self.status.is_ok()
    }
}

pub fn parse_query(q: &str) -> BTreeMap<String, String> {
    form_urlencoded::parse(q.as_bytes()).into_owned().collect()
}
