//! REST-style endpoints of the twin, registered as bus producers.
//!
//! | method | path |
//! |---|---|
//! | GET | `/api/items` |
//! | GET | `/api/lookup?qr=` |
//! | GET | `/api/getMachine/{id}/getStatus?depth=manager\|inline` |
//! | GET | `/api/getMachine/{id}/getHistory?from=&to=` |
//! | GET | `/api/getMachine/{id}/diagnose` |
//! | POST | `/api/getMachine/{id}/prognose` |
//! | POST | `/api/getMachine/{id}/alarm` |
//! | POST | `/api/getMachine/{id}/fault` |
//! | POST | `/api/mwp/generate` |
//! | GET | `/api/mwp/{id}/feasibility` |
//! | POST | `/api/mwp/{id}/approve` |
//! | POST | `/api/scenario/execute` |
//! | GET | `/api/notifications?since=` |
//! | POST | `/api/notifications/{id}/ack` |
//! | GET, POST | `/api/rules` |
//! | POST | `/api/ask` |
//! | GET | `/api/tutoring/{id}/{task}` |
//! | POST | `/api/tutoring/{id}/{task}/confirm` |
//! | POST | `/api/sim/advance` |

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::assistant::AskRequest;
use super::diagnose::Depth;
use super::prognose::PrognosisScenario;
use super::rules::RuleSpec;
use super::scenario::ScenarioRequest;
use super::{GenerateRequest, Twin, TwinError};
use crate::bus::{Method, RegisterError, Request, ServiceBus, ServiceError};
use crate::registry::{ItemId, StreamId};
use crate::{MaintenanceCategory, Mode};

pub const PRODUCER_ID: &str = "twin";

fn ok<T: Serialize>(v: T) -> Result<Value, ServiceError> {
    serde_json::to_value(v).map_err(|e| ServiceError::failure(e.to_string()))
}

fn item(req: &Request<'_>) -> Result<ItemId, ServiceError> {
    Ok(ItemId::new(req.param("id")?))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct AlarmBody {
    category: MaintenanceCategory,
    #[serde(default)]
    mode: Option<Mode>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FaultBody {
    stream: StreamId,
    /// Offset added to readings; omit to clear the fault.
    #[serde(default)]
    offset: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfirmBody {
    step: usize,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct AdvanceBody {
    minutes: f64,
}

/// Accepts either a JSON string or `{question, item}`.
fn ask_request(body: &Value) -> Result<AskRequest, ServiceError> {
    match body {
        Value::String(q) => Ok(AskRequest {
            question: q.clone(),
            item: None,
        }),
        other => serde_json::from_value(other.clone()).map_err(|e| ServiceError::bad_request(format!("request body: {e}"))),
    }
}

type Handler = fn(&Twin, &Request<'_>) -> Result<Value, ServiceError>;

fn routes() -> Vec<(&'static str, &'static [Method], Handler)> {
    use Method::{Get, Post};
    vec![
        ("/api/items", &[Get], |t, _| {
            let items: Vec<Value> = t
                .registry()
                .item_ids()
                .into_iter()
                .filter_map(|id| {
                    t.registry()
                        .with_item(&id, |r| json!({"id": r.id, "name": r.name, "category": r.category}))
                        .ok()
                })
                .collect();
            ok(items)
        }),
        ("/api/lookup", &[Get], |t, r| {
            let qr = r
                .query
                .get("qr")
                .ok_or_else(|| ServiceError::bad_request("missing query parameter `qr`"))?;
            let id = t.registry().resolve_qr(qr).map_err(TwinError::from)?;
            ok(json!({"item_id": id}))
        }),
        ("/api/getMachine/{id}/getStatus", &[Get], |t, r| {
            let depth: Depth = r.query_parsed("depth")?.unwrap_or_default();
            ok(t.get_status(&item(r)?, depth)?)
        }),
        ("/api/getMachine/{id}/getHistory", &[Get], |t, r| {
            let from = r.query_parsed("from")?.unwrap_or(f64::NEG_INFINITY);
            let to = r.query_parsed("to")?.unwrap_or(f64::INFINITY);
            ok(t.get_history(&item(r)?, from, to)?)
        }),
        ("/api/getMachine/{id}/diagnose", &[Get], |t, r| {
            let s = t.get_status(&item(r)?, Depth::Inline)?;
            ok(json!({
                "item_id": s.item_id,
                "health": s.health,
                "fault_hypotheses": s.fault_hypotheses,
                "most_worn": s.most_worn,
                "open_notifications": s.open_notifications,
            }))
        }),
        ("/api/getMachine/{id}/prognose", &[Post], |t, r| {
            ok(t.prognose_scenario(&item(r)?, &r.body_as::<PrognosisScenario>()?)?)
        }),
        ("/api/getMachine/{id}/alarm", &[Post], |t, r| {
            let b: AlarmBody = r.body_as()?;
            let (event, note) = t.inject_alarm(&item(r)?, b.category, b.mode)?;
            ok(json!({"alarm": event, "notification": note}))
        }),
        ("/api/getMachine/{id}/fault", &[Post], |t, r| {
            let b: FaultBody = r.body_as()?;
            t.with_machine(&item(r)?, |m| {
                match b.offset {
                    Some(o) => m.inject_fault(&b.stream, o)?,
                    None => m.clear_fault(&b.stream),
                }
                Ok(())
            })?;
            ok(json!({"stream": b.stream, "offset": b.offset}))
        }),
        ("/api/mwp/generate", &[Post], |t, r| ok(t.generate_plan(&r.body_as::<GenerateRequest>()?)?)),
        ("/api/mwp/{id}/feasibility", &[Get], |t, r| ok(t.feasibility(r.param("id")?)?)),
        ("/api/mwp/{id}/approve", &[Post], |t, r| ok(t.approve_plan(r.param("id")?)?)),
        ("/api/scenario/execute", &[Post], |t, r| {
            ok(t.execute_scenario(&r.body_as::<ScenarioRequest>()?)?)
        }),
        ("/api/notifications", &[Get], |t, r| {
            ok(t.notifications().since(r.query_parsed("since")?.unwrap_or(0)))
        }),
        ("/api/notifications/{id}/ack", &[Post], |t, r| {
            let id: u64 = r
                .param("id")?
                .parse()
                .map_err(|_| ServiceError::bad_request("notification id must be an integer"))?;
            ok(t.notifications().ack(id)?)
        }),
        ("/api/rules", &[Get, Post], |t, r| match r.method {
            Method::Post => {
                let id = t.notifications().register_rule(t.registry(), r.body_as::<RuleSpec>()?)?;
                ok(json!({"rule_id": id}))
            }
            _ => ok(t.notifications().rules()),
        }),
        ("/api/ask", &[Post], |t, r| ok(t.ask(&ask_request(r.body)?))),
        ("/api/tutoring/{id}/{task}", &[Get], |t, r| {
            ok(t.tutor().get_procedure(&item(r)?, r.param("task")?)?)
        }),
        ("/api/tutoring/{id}/{task}/confirm", &[Post], |t, r| {
            let b: ConfirmBody = r.body_as()?;
            ok(t.tutor()
                .advance_step(t.registry(), &item(r)?, r.param("task")?, b.step, t.now())?)
        }),
        ("/api/sim/advance", &[Post], |t, r| {
            let b: AdvanceBody = r.body_as()?;
            ok(t.advance(b.minutes)?)
        }),
    ]
}

/// Registers every twin endpoint on `bus`.
pub fn register(bus: &ServiceBus, twin: Arc<Twin>) -> Result<(), RegisterError> {
    for (pattern, methods, handler) in routes() {
        let t = Arc::clone(&twin);
        bus.register_producer(pattern, methods, PRODUCER_ID, move |r: &Request<'_>| handler(&t, r))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bus::{ErrorKind, ServiceEnvelope, Status};
    use crate::services::tests::twin;

    fn bus() -> ServiceBus {
        let bus = ServiceBus::new();
        register(&bus, Arc::new(twin())).unwrap();
        bus
    }

    fn call(bus: &ServiceBus, env: ServiceEnvelope) -> (Status, Value) {
        let out = bus.route(env);
        (out.status, out.body)
    }

    #[test]
    fn status_and_history() {
        let b = bus();
        call(&b, ServiceEnvelope::post("/api/sim/advance", json!({"minutes": 20})));
        let (s, body) = call(&b, ServiceEnvelope::get("/api/getMachine/000X/getStatus?depth=inline"));
        assert!(s.is_ok(), "{s:?}");
        assert_eq!(body["health"], "nominal");
        assert_eq!(body["depth"], "inline");
        let (_, body) = call(&b, ServiceEnvelope::get("/api/getMachine/000X/getHistory?from=5&to=10"));
        assert_eq!(body.as_array().unwrap().len(), 2);
        let (s, _) = call(&b, ServiceEnvelope::get("/api/getMachine/nope/getStatus"));
        assert_eq!(s.code(), 404);
        let (s, _) = call(&b, ServiceEnvelope::get("/api/getMachine/000X/getStatus?depth=deep"));
        assert_eq!(s.code(), 400);
    }

    #[test]
    fn plan_lifecycle() {
        let b = bus();
        let (s, body) = call(&b, ServiceEnvelope::post("/api/mwp/generate", json!({"machine": "000X"})));
        assert!(s.is_ok(), "{s:?}");
        let id = body["id"].as_str().unwrap().to_string();
        let (_, f) = call(&b, ServiceEnvelope::get(&format!("/api/mwp/{id}/feasibility")));
        assert_eq!(f["feasible"], true);
        let (s, _) = call(&b, ServiceEnvelope::post("/api/scenario/execute", json!({"kind": "mwp", "plan_id": id})));
        assert!(s.is_ok());
        let (s, _) = call(&b, ServiceEnvelope::post("/api/scenario/execute", json!({"kind": "mwp", "plan_id": id})));
        assert_eq!(s.code(), ErrorKind::Conflict.code());
        let (s, _) = call(&b, ServiceEnvelope::get("/api/mwp/none/feasibility"));
        assert_eq!(s.code(), 404);
    }

    #[test]
    fn notifications_and_ack() {
        let b = bus();
        let (s, _) = call(&b, ServiceEnvelope::post("/api/getMachine/000X/alarm", json!({"category": "mechanical"})));
        assert!(s.is_ok(), "{s:?}");
        let (_, list) = call(&b, ServiceEnvelope::get("/api/notifications?since=0"));
        assert_eq!(list.as_array().unwrap().len(), 1);
        let (_, n) = call(&b, ServiceEnvelope::post("/api/notifications/1/ack", Value::Null));
        assert_eq!(n["acknowledged"], true);
        let (s, _) = call(&b, ServiceEnvelope::post("/api/notifications/9/ack", Value::Null));
        assert_eq!(s.code(), 404);
        let (s, _) = call(&b, ServiceEnvelope::post("/api/getMachine/000X/alarm", json!({"category": "electrical"})));
        assert_eq!(s.code(), 404);
    }

    #[test]
    fn ask_and_tutoring() {
        let b = bus();
        let (_, a) = call(&b, ServiceEnvelope::post("/api/ask", json!("how do I set up the printing machine")));
        assert_eq!(a["key"], "procedure:S1");
        let (_, p) = call(&b, ServiceEnvelope::get("/api/tutoring/S1/setup"));
        assert_eq!(p["current_step"], 1);
        let (s, _) = call(&b, ServiceEnvelope::post("/api/tutoring/S1/setup/confirm", json!({"step": 2})));
        assert_eq!(s.code(), 409);
        call(&b, ServiceEnvelope::post("/api/tutoring/S1/setup/confirm", json!({"step": 1})));
        let (_, d) = call(&b, ServiceEnvelope::post("/api/tutoring/S1/setup/confirm", json!({"step": 2})));
        assert_eq!(d["state"], "done");
        let (s, _) = call(&b, ServiceEnvelope::get("/api/tutoring/S1/nope"));
        assert_eq!(s.code(), 404);
    }
}
