#![allow(dead_code)]

use std::net::SocketAddr;

use tokio::sync::oneshot;
use tokio::task::JoinHandle;
use twin_platform::server::{bind, serve, Platform, ServeError};

pub struct Running {
    pub addr: SocketAddr,
    pub platform: Platform,
    stop: Option<oneshot::Sender<()>>,
    task: Option<JoinHandle<Result<(), ServeError>>>,
}

impl Running {
    pub fn url(&self, path: &str) -> String {
        format!("http://{}{path}", self.addr)
    }

    pub async fn stop(mut self) {
        if let Some(s) = self.stop.take() {
            let _ = s.send(());
        }
        if let Some(t) = self.task.take() {
            t.await.expect("server task").expect("server result");
        }
    }
}

/// Serves the default scenario on an ephemeral port, warmed up, with the
/// simulated clock frozen.
pub async fn start_default() -> Running {
    let platform = Platform::load(&twin_platform::default_scenario()).expect("default scenario loads");
    platform.warm_up().expect("warm-up");
    start(platform).await
}

pub async fn start(platform: Platform) -> Running {
    let listener = bind("127.0.0.1:0".parse().unwrap()).await.expect("bind");
    let addr = listener.local_addr().unwrap();
    let (tx, rx) = oneshot::channel::<()>();
    let task = tokio::spawn(serve(listener, platform.clone(), None, async {
        let _ = rx.await;
    }));
    Running {
        addr,
        platform,
        stop: Some(tx),
        task: Some(task),
    }
}
