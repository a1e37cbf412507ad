//! Enterprise service bus: producers register under path patterns, requests
//! are routed to the single matching producer and answered with an envelope
//! carrying the request's correlation id.
//!
//! A producer that fails or panics yields an error envelope; the bus keeps
//! serving.

mod envelope;
mod pattern;

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;

use parking_lot::RwLock;
use serde_json::Value;
use thiserror::Error;

pub use envelope::{parse_query, ErrorKind, Method, ServiceEnvelope, Status};
pub use pattern::{PathPattern, PatternError};

/// Error returned by a producer; becomes the envelope status.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{kind:?}: {message}")]
pub struct ServiceError {
    pub kind: ErrorKind,
    pub message: String,
}

impl ServiceError {
    pub fn new(kind: ErrorKind, message: impl Into<String>) -> Self {
        ServiceError {
            kind,
            message: message.into(),
        }
    }

    pub fn bad_request(message: impl Into<String>) -> Self {
        ServiceError::new(ErrorKind::BadRequest, message)
    }

    pub fn unknown(message: impl Into<String>) -> Self {
        ServiceError::new(ErrorKind::UnknownResource, message)
    }

    pub fn conflict(message: impl Into<String>) -> Self {
        ServiceError::new(ErrorKind::Conflict, message)
    }

    pub fn failure(message: impl Into<String>) -> Self {
        ServiceError::new(ErrorKind::ProducerFailure, message)
    }
}

/// What a producer sees of a routed envelope.
#[derive(Debug)]
pub struct Request<'a> {
    pub method: Method,
    pub path: &'a str,
    pub params: BTreeMap<String, String>,
    pub query: &'a BTreeMap<String, String>,
    pub body: &'a Value,
    pub consumer_id: &'a str,
}

impl Request<'_> {
    pub fn param(&self, name: &str) -> Result<&str, ServiceError> {
        self.params
            .get(name)
            .map(String::as_str)
            .ok_or_else(|| ServiceError::bad_request(format!("missing path parameter `{name}`")))
    }

    /// Optional query parameter parsed as `T`.
    pub fn query_parsed<T: std::str::FromStr>(&self, name: &str) -> Result<Option<T>, ServiceError> {
        match self.query.get(name) {
            None => Ok(None),
            Some(v) if v.is_empty() => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| ServiceError::bad_request(format!("query parameter `{name}`: cannot parse `{v}`"))),
        }
    }

    pub fn body_as<T: serde::de::DeserializeOwned>(&self) -> Result<T, ServiceError> {
        serde_json::from_value(self.body.clone()).map_err(|e| ServiceError::bad_request(format!("request body: {e}")))
    }
}

pub trait Producer: Send + Sync {
    fn handle(&self, req: &Request<'_>) -> Result<Value, ServiceError>;
}

impl<F> Producer for F
where
    F: Fn(&Request<'_>) -> Result<Value, ServiceError> + Send + Sync,
{
    fn handle(&self, req: &Request<'_>) -> Result<Value, ServiceError> {
        self(req)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RegisterError {
    #[error("pattern `{new}` overlaps `{existing}` (producer `{producer}`)")]
    OverlappingPattern {
        new: String,
        existing: String,
        producer: String,
    },
    #[error(transparent)]
    Pattern(#[from] PatternError),
    #[error("a route needs at least one method")]
    NoMethods,
}

struct Route {
    pattern: PathPattern,
    methods: Vec<Method>,
    producer_id: String,
    producer: Arc<dyn Producer>,
}

/// Route table entry as reported by [`ServiceBus::routes`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RouteInfo {
    pub pattern: String,
    pub methods: Vec<Method>,
    pub producer_id: String,
}

#[derive(Default)]
pub struct ServiceBus {
    routes: RwLock<Vec<Route>>,
}

impl ServiceBus {
    pub fn new() -> Self {
        ServiceBus::default()
    }

    pub fn register_producer(
        &self,
        pattern: &str,
        methods: &[Method],
        producer_id: impl Into<String>,
        producer: impl Producer + 'static,
    ) -> Result<(), RegisterError> {
        if methods.is_empty() {
            return Err(RegisterError::NoMethods);
        }
        let pattern = PathPattern::parse(pattern)?;
        let mut routes = self.routes.write();
        if let Some(r) = routes.iter().find(|r| r.pattern.overlaps(&pattern)) {
            return Err(RegisterError::OverlappingPattern {
                new: pattern.to_string(),
                existing: r.pattern.to_string(),
                producer: r.producer_id.clone(),
            });
        }
        routes.push(Route {
            pattern,
            methods: methods.to_vec(),
            producer_id: producer_id.into(),
            producer: Arc::new(producer),
        });
        Ok(())
    }

    pub fn routes(&self) -> Vec<RouteInfo> {
        self.routes
            .read()
            .iter()
            .map(|r| RouteInfo {
                pattern: r.pattern.to_string(),
                methods: r.methods.clone(),
                producer_id: r.producer_id.clone(),
            })
            .collect()
    }

    /// Dispatches `env` and returns the response envelope. Never panics on
    /// producer failure.
    pub fn route(&self, env: ServiceEnvelope) -> ServiceEnvelope {
        let mut resp = env;
        let body = std::mem::take(&mut resp.body);
        let target = self.routes.read().iter().find_map(|r| {
            r.pattern
                .matches(&resp.resource_path)
                .map(|params| (r.producer.clone(), r.producer_id.clone(), r.methods.contains(&resp.method), params))
        });
        let Some((producer, producer_id, allowed, params)) = target else {
            resp.status = Status::error(ErrorKind::NoRoute, format!("no route for {}", resp.resource_path));
            return resp;
        };
        resp.producer_id = Some(producer_id);
        if !allowed {
            resp.status = Status::error(
                ErrorKind::MethodNotAllowed,
                format!("{} not allowed on {}", resp.method, resp.resource_path),
            );
            return resp;
        }
        let req = Request {
            method: resp.method,
            path: &resp.resource_path,
            params,
            query: &resp.query,
            body: &body,
            consumer_id: &resp.consumer_id,
        };
        let outcome = catch_unwind(AssertUnwindSafe(|| producer.handle(&req)));
        match outcome {
            Ok(Ok(value)) => {
                resp.body = value;
                resp.status = Status::Ok;
            }
            Ok(Err(e)) => resp.status = Status::error(e.kind, e.message),
            Err(panic) => {
                let msg = panic
                    .downcast_ref::<&str>()
                    .map(|s| s.to_string())
                    .or_else(|| panic.downcast_ref::<String>().cloned())
                    .unwrap_or_else(|| "producer panicked".to_string());
                resp.status = Status::error(ErrorKind::ProducerFailure, msg);
            }
        }
        resp
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn status_bus() -> ServiceBus {
        let bus = ServiceBus::new();
        bus.register_producer("/api/getMachine/{id}/getStatus", &[Method::Get], "status", |r: &Request<'_>| {
            let id = r.param("id")?;
            if id == "NOPE" {
                return Err(ServiceError::unknown(format!("unknown item `{id}`")));
            }
            Ok(json!({ "id": id }))
        })
        .unwrap();
        bus
    }

    #[test]
    fn dispatches_with_params() {
        let bus = status_bus();
        let req = ServiceEnvelope::get("/api/getMachine/000X/getStatus");
        let id = req.correlation_id;
        let resp = bus.route(req);
        assert!(resp.is_ok());
        assert_eq!(resp.correlation_id, id);
        assert_eq!(resp.body, json!({ "id": "000X" }));
        assert_eq!(resp.producer_id.as_deref(), Some("status"));
    }

    #[test]
    fn error_envelopes_keep_correlation() {
        let bus = status_bus();
        let req = ServiceEnvelope::get("/api/getMachine/NOPE/getStatus");
        let id = req.correlation_id;
        let resp = bus.route(req);
        assert_eq!(resp.correlation_id, id);
        assert_eq!(resp.status.code(), 404);

        let resp = bus.route(ServiceEnvelope::get("/api/unregistered"));
        assert!(matches!(resp.status, Status::Error { kind: ErrorKind::NoRoute, .. }));

        let resp = bus.route(ServiceEnvelope::post("/api/getMachine/000X/getStatus", json!({})));
        assert_eq!(resp.status.code(), 405);
    }

    #[test]
    fn overlapping_registration_refused() {
        let bus = status_bus();
        let noop = |_: &Request<'_>| Ok(Value::Null);
        assert!(matches!(
            bus.register_producer("/api/getMachine/{id}/getStatus", &[Method::Get], "dup", noop),
            Err(RegisterError::OverlappingPattern { .. })
        ));
        bus.register_producer("/api/x/{a}", &[Method::Get], "a", noop).unwrap();
        bus.register_producer("/api/x/{a}/{b}", &[Method::Get], "ab", noop).unwrap();
        assert_eq!(bus.routes().len(), 3);
    }

    #[test]
    fn panicking_producer_is_isolated() {
        let bus = status_bus();
        bus.register_producer("/api/boom", &[Method::Get], "boom", |_: &Request<'_>| -> Result<Value, ServiceError> {
            panic!("sensor driver crashed")
        })
        .unwrap();
        let prev = std::panic::take_hook();
        std::panic::set_hook(Box::new(|_| {}));
        let resp = bus.route(ServiceEnvelope::get("/api/boom"));
        std::panic::set_hook(prev);
        assert_eq!(resp.status.code(), 500);
        assert!(matches!(&resp.status, Status::Error { message, .. } if message.contains("crashed")));
        assert!(bus.route(ServiceEnvelope::get("/api/getMachine/000X/getStatus")).is_ok());
    }

    #[test]
    fn body_reaches_producer() {
        let bus = ServiceBus::new();
        bus.register_producer("/api/echo", &[Method::Post], "echo", |r: &Request<'_>| Ok(r.body.clone()))
            .unwrap();
        let resp = bus.route(ServiceEnvelope::post("/api/echo", json!([1, 2])));
        assert_eq!(resp.body, json!([1, 2]));
    }
}
