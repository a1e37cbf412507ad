mod common;

use std::time::Duration;

use reqwest::{Client, StatusCode};
use serde_json::{json, Value};
use twin_platform::server::{bind, serve, Platform, ServeError, Ticker, CONSUMER_HEADER, CORRELATION_HEADER};
use uuid::Uuid;

async fn get(c: &Client, url: String) -> (StatusCode, Value) {
    let r = c.get(url).send().await.unwrap();
    let s = r.status();
    (s, r.json().await.unwrap())
}

async fn post(c: &Client, url: String, body: Value) -> (StatusCode, Value) {
    let r = c.post(url).json(&body).send().await.unwrap();
    let s = r.status();
    (s, r.json().await.unwrap())
}

#[tokio::test(flavor = "multi_thread")]
async fn status_of_a_machine() {
    let srv = common::start_default().await;
    let c = Client::new();
    let id = Uuid::new_v4();
    let r = c
        .get(srv.url("/api/getMachine/000X/getStatus"))
        .header(CORRELATION_HEADER, id.to_string())
        .header(CONSUMER_HEADER, "console")
        .send()
        .await
        .unwrap();
    assert_eq!(r.status(), StatusCode::OK);
    assert_eq!(r.headers()[CORRELATION_HEADER], id.to_string().as_str());
    let env: Value = r.json().await.unwrap();
    assert_eq!(env["correlation_id"], id.to_string());
    assert_eq!(env["consumer_id"], "console");
    assert_eq!(env["status"]["state"], "ok");
    let s = &env["body"];
    assert_eq!(s["item_id"], "000X");
    assert_eq!(s["name"], "fin tube machine");
    assert!(s["now"].as_f64().unwrap() > 0.0);
    for field in ["current", "health", "fault_hypotheses", "most_worn", "scheduled_ops", "recent_history"] {
        assert!(!s[field].is_null(), "status lacks {field}: {s}");
    }

    let (code, inline) = get(&c, srv.url("/api/getMachine/000X/getStatus?depth=inline")).await;
    assert_eq!(code, StatusCode::OK);
    assert!(inline["body"]["raw_samples"].is_object());
    srv.stop().await;
}

#[tokio::test(flavor = "multi_thread")]
async fn ask_takes_plain_text_and_json() {
    let srv = common::start_default().await;
    let c = Client::new();
    let r = c
        .post(srv.url("/api/ask"))
        .body("What is the most worn component of 000Y?")
        .send()
        .await
        .unwrap();
    assert_eq!(r.status(), StatusCode::OK);
    let a: Value = r.json().await.unwrap();
    assert_eq!(a["body"]["key"], "worn:000Y");
    assert_eq!(a["body"]["value"], "milling tool");

    let (_, a) = post(
        &c,
        srv.url("/api/ask"),
        json!({"question": "what is the most worn part?", "item": "S1"}),
    )
    .await;
    assert_eq!(a["body"]["key"], "worn:S1");

    let (_, a) = post(&c, srv.url("/api/ask"), json!("which gloves are required near the machines")).await;
    assert_eq!(a["body"]["kind"], "document");
    srv.stop().await;
}

#[tokio::test(flavor = "multi_thread")]
async fn errors_map_to_http_status() {
    let srv = common::start_default().await;
    let c = Client::new();
    let (code, env) = get(&c, srv.url("/api/nowhere")).await;
    assert_eq!(code, StatusCode::NOT_FOUND);
    assert_eq!(env["status"]["state"], "error");
    let (code, _) = get(&c, srv.url("/api/getMachine/nope/getStatus")).await;
    assert_eq!(code, StatusCode::NOT_FOUND);
    let (code, _) = get(&c, srv.url("/api/getMachine/000X/getStatus?depth=deep")).await;
    assert_eq!(code, StatusCode::BAD_REQUEST);
    let r = c.delete(srv.url("/api/getMachine/000X/getStatus")).send().await.unwrap();
    assert_eq!(r.status(), StatusCode::METHOD_NOT_ALLOWED);
    let r = c.patch(srv.url("/api/getMachine/000X/getStatus")).send().await.unwrap();
    assert_eq!(r.status(), StatusCode::METHOD_NOT_ALLOWED);
    let r = c.post(srv.url("/api/ask")).body(vec![0xffu8, 0xfe]).send().await.unwrap();
    assert_eq!(r.status(), StatusCode::BAD_REQUEST);
    let (code, _) = post(&c, srv.url("/api/sim/advance"), json!({"minutes": "soon"})).await;
    assert_eq!(code, StatusCode::BAD_REQUEST);
    srv.stop().await;
}

#[tokio::test(flavor = "multi_thread")]
async fn alarm_notification_and_plan_workflow() {
    let srv = common::start_default().await;
    let c = Client::new();
    let (code, _) = post(&c, srv.url("/api/getMachine/000X/alarm"), json!({"category": "mechanical"})).await;
    assert_eq!(code, StatusCode::OK);
    let (_, list) = get(&c, srv.url("/api/notifications?since=0")).await;
    let alarm = list["body"]
        .as_array()
        .unwrap()
        .iter()
        .find(|n| n["rule"] == "alarm:mechanical")
        .cloned()
        .expect("alarm notification listed");
    let (_, acked) = post(&c, srv.url(&format!("/api/notifications/{}/ack", alarm["id"])), Value::Null).await;
    assert_eq!(acked["body"]["acknowledged"], true);

    let (code, plan) = post(&c, srv.url("/api/mwp/generate"), json!({"machine": "000X"})).await;
    assert_eq!(code, StatusCode::OK, "{plan}");
    let id = plan["body"]["id"].as_str().unwrap().to_string();
    let (_, f) = get(&c, srv.url(&format!("/api/mwp/{id}/feasibility"))).await;
    assert_eq!(f["body"]["feasible"], true);
    let (code, _) = post(&c, srv.url(&format!("/api/mwp/{id}/approve")), Value::Null).await;
    assert_eq!(code, StatusCode::OK);
    let (_, status) = get(&c, srv.url("/api/getMachine/000X/getStatus")).await;
    let ops = status["body"]["scheduled_ops"].as_array().unwrap();
    assert!(!ops.is_empty());
    assert!(ops.iter().all(|o| o["plan_id"] == id.as_str()));
    let run = json!({"kind": "mwp", "plan_id": id});
    let (code, _) = post(&c, srv.url("/api/scenario/execute"), run.clone()).await;
    assert_eq!(code, StatusCode::OK);
    let (code, _) = post(&c, srv.url("/api/scenario/execute"), run).await;
    assert_eq!(code, StatusCode::CONFLICT);

    let (_, p) = get(&c, srv.url("/api/tutoring/S1/setup")).await;
    assert_eq!(p["body"]["current_step"], 1);
    let (code, _) = post(&c, srv.url("/api/tutoring/S1/setup/confirm"), json!({"step": 3})).await;
    assert_eq!(code, StatusCode::CONFLICT);
    srv.stop().await;
}

#[tokio::test(flavor = "multi_thread")]
async fn second_bind_on_the_same_port_is_refused() {
    let srv = common::start_default().await;
    match bind(srv.addr).await {
        Err(ServeError::PortInUse(p)) => assert_eq!(p, srv.addr.port()),
        other => panic!("expected PortInUse, got {other:?}"),
    }
    srv.stop().await;
}

#[tokio::test(flavor = "multi_thread")]
async fn thousand_concurrent_requests_keep_their_correlation() {
    let srv = common::start_default().await;
    let c = Client::new();
    let machines = ["000X", "000Y", "S1"];
    let mut tasks = Vec::new();
    for i in 0..1000 {
        let c = c.clone();
        let machine = machines[i % machines.len()];
        let url = srv.url(&format!("/api/getMachine/{machine}/getStatus"));
        tasks.push(tokio::spawn(async move {
            let id = Uuid::new_v4();
            let r = c
                .get(url)
                .header(CORRELATION_HEADER, id.to_string())
                .send()
                .await
                .unwrap();
            assert_eq!(r.status(), StatusCode::OK);
            assert_eq!(r.headers()[CORRELATION_HEADER], id.to_string().as_str());
            let env: Value = r.json().await.unwrap();
            assert_eq!(env["correlation_id"], id.to_string());
            assert_eq!(env["body"]["item_id"], machine);
        }));
    }
    for t in tasks {
        t.await.unwrap();
    }
    srv.stop().await;
}

#[tokio::test(flavor = "multi_thread")]
async fn ticker_advances_the_simulated_clock() {
    let platform = Platform::load(&twin_platform::default_scenario()).unwrap();
    let listener = bind("127.0.0.1:0".parse().unwrap()).await.unwrap();
    let before = platform.twin.now();
    let ticker = Ticker {
        every: Duration::from_millis(10),
        minutes: 1.0,
    };
    let (tx, rx) = tokio::sync::oneshot::channel::<()>();
    let task = tokio::spawn(serve(listener, platform.clone(), Some(ticker), async {
        let _ = rx.await;
    }));
    tokio::time::sleep(Duration::from_millis(300)).await;
    let _ = tx.send(());
    task.await.unwrap().unwrap();
    assert!(platform.twin.now() >= before + 5.0, "clock at {}", platform.twin.now());
}
