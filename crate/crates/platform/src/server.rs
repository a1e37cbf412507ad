//! HTTP front-end of the service bus.
//!
//! Every request becomes a [`ServiceEnvelope`] routed through the bus; the
//! response is the envelope itself, as JSON, with the HTTP status taken from
//! the envelope status. Bodies that are not JSON are passed on as a JSON
//! string, so `POST /api/ask` accepts plain question text.

use std::future::Future;
use std::net::SocketAddr;
use std::path::Path;
use std::sync::Arc;
use std::time::Duration;

use axum::body::Bytes;
use axum::extract::State;
use axum::http::{HeaderMap, HeaderValue, StatusCode, Uri};
use axum::response::{IntoResponse, Response};
use axum::Router;
use serde_json::{json, Value};
use thiserror::Error;
use tokio::net::TcpListener;
use twin_core::bus::{ErrorKind, Method, RegisterError, ServiceBus, ServiceEnvelope, Status};
use twin_core::config::{ConfigError, ScenarioConfig};
use twin_core::services::{api, Twin, TwinError};
use uuid::Uuid;

pub const CORRELATION_HEADER: &str = "x-correlation-id";
pub const CONSUMER_HEADER: &str = "x-consumer-id";

#[derive(Debug, Error)]
pub enum ServeError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Twin(#[from] TwinError),
    #[error(transparent)]
    Register(#[from] RegisterError),
    #[error("port {0} is already in use")]
    PortInUse(u16),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

/// A twin with its endpoints registered on a bus.
#[derive(Clone)]
pub struct Platform {
    pub twin: Arc<Twin>,
    pub bus: Arc<ServiceBus>,
}

impl Platform {
    pub fn from_config(cfg: &ScenarioConfig) -> Result<Platform, ServeError> {
        let twin = Arc::new(Twin::from_config(cfg)?);
        let bus = Arc::new(ServiceBus::new());
        api::register(&bus, Arc::clone(&twin))?;
        Ok(Platform { twin, bus })
    }

    pub fn load(path: &Path) -> Result<Platform, ServeError> {
        Platform::from_config(&ScenarioConfig::load(path)?)
    }

    /// Longest sampling period of any machine, in minutes.
    pub fn sample_period(&self) -> f64 {
        self.twin
            .machine_ids()
            .iter()
            .filter_map(|id| self.twin.machine_spec(id).ok())
            .map(|s| s.sample_period)
            .fold(0.0, f64::max)
    }

    /// Advances the simulated plant far enough for every machine to have
    /// reported a first sample.
    pub fn warm_up(&self) -> Result<(), TwinError> {
        self.twin.advance(self.sample_period())?;
        Ok(())
    }
}

/// How the simulated clock follows the wall clock while serving.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ticker {
    pub every: Duration,
    /// Simulated minutes per tick.
    pub minutes: f64,
}

pub fn router(bus: Arc<ServiceBus>) -> Router {
    Router::new().fallback(dispatch).with_state(bus)
}

/// Binds `addr`, reporting an occupied port as [`ServeError::PortInUse`].
pub async fn bind(addr: SocketAddr) -> Result<TcpListener, ServeError> {
    TcpListener::bind(addr).await.map_err(|e| match e.kind() {
        std::io::ErrorKind::AddrInUse => ServeError::PortInUse(addr.port()),
        _ => ServeError::Io(e),
    })
}

/// Serves `platform` on `listener` until `shutdown` resolves. With a
/// ticker the simulated plant advances in the background.
pub async fn serve(
    listener: TcpListener,
    platform: Platform,
    ticker: Option<Ticker>,
    shutdown: impl Future<Output = ()> + Send + 'static,
) -> Result<(), ServeError> {
    let tick_task = ticker.map(|t| {
        let twin = Arc::clone(&platform.twin);
        tokio::spawn(async move {
            let mut interval = tokio::time::interval(t.every);
            interval.tick().await;
            loop {
                interval.tick().await;
                let twin = Arc::clone(&twin);
                let res = tokio::task::spawn_blocking(move || twin.advance(t.minutes)).await;
                match res {
                    Ok(Ok(r)) if !r.notifications.is_empty() => {
                        tracing::info!(now = r.now, count = r.notifications.len(), "notifications raised")
                    }
                    Ok(Err(e)) => tracing::warn!("simulation tick failed: {e}"),
                    Err(e) => tracing::warn!("simulation tick aborted: {e}"),
                    _ => {}
                }
            }
        })
    });
    let app = router(Arc::clone(&platform.bus));
    let out = axum::serve(listener, app).with_graceful_shutdown(shutdown).await;
    if let Some(t) = tick_task {
        t.abort();
    }
    Ok(out?)
}

fn request_body(body: &Bytes) -> Result<Value, String> {
    if body.iter().all(u8::is_ascii_whitespace) {
        return Ok(Value::Null);
    }
    if let Ok(v) = serde_json::from_slice(body) {
        return Ok(v);
    }
    std::str::from_utf8(body)
        .map(|s| Value::String(s.trim().to_string()))
        .map_err(|_| "request body is neither JSON nor UTF-8 text".to_string())
}

fn error_response(code: u16, kind: ErrorKind, message: String) -> Response {
    let status = StatusCode::from_u16(code).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
    let body = json!({ "status": Status::error(kind, message) });
    (status, axum::Json(body)).into_response()
}

async fn dispatch(
    State(bus): State<Arc<ServiceBus>>,
    method: axum::http::Method,
    uri: Uri,
    headers: HeaderMap,
    body: Bytes,
) -> Response {
    let Ok(method) = method.as_str().parse::<Method>() else {
        return error_response(405, ErrorKind::MethodNotAllowed, format!("unsupported method {method}"));
    };
    let body = match request_body(&body) {
        Ok(b) => b,
        Err(msg) => return error_response(400, ErrorKind::BadRequest, msg),
    };
    let target = uri.path_and_query().map_or(uri.path(), |pq| pq.as_str());
    let mut env = ServiceEnvelope::request(method, target)
        .with_body(body)
        .from_consumer(header(&headers, CONSUMER_HEADER).unwrap_or("http"));
    if let Some(id) = header(&headers, CORRELATION_HEADER).and_then(|h| Uuid::parse_str(h).ok()) {
        env = env.with_correlation(id);
    }
    let resp = match tokio::task::spawn_blocking(move || bus.route(env)).await {
        Ok(r) => r,
        Err(e) => return error_response(500, ErrorKind::ProducerFailure, e.to_string()),
    };
    let status = StatusCode::from_u16(resp.status.code()).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
    let correlation = HeaderValue::from_str(&resp.correlation_id.to_string()).ok();
    let mut out = (status, axum::Json(resp)).into_response();
    if let Some(c) = correlation {
        out.headers_mut().insert(CORRELATION_HEADER, c);
    }
    out
}

fn header<'a>(headers: &'a HeaderMap, name: &str) -> Option<&'a str> {
    headers.get(name).and_then(|v| v.to_str().ok())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bodies() {
        assert_eq!(request_body(&Bytes::from_static(b"")), Ok(Value::Null));
        assert_eq!(request_body(&Bytes::from_static(b"{\"a\":1}")), Ok(json!({"a": 1})));
        assert_eq!(
            request_body(&Bytes::from_static(b"status of 000X?\n")),
            Ok(Value::String("status of 000X?".into()))
        );
        assert!(request_body(&Bytes::from_static(&[0xff, 0xfe])).is_err());
    }
}
