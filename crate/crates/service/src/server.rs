use std::io;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::thread::JoinHandle;

use tokio::net::TcpListener;
use tokio::sync::oneshot;

use crate::http::{router, RouterOptions, DEFAULT_MAX_UPLOAD};
use crate::Service;

pub const DEFAULT_ADDR: &str = "127.0.0.1:8080";
pub const DEFAULT_STORE: &str = "./data";

#[derive(Debug, Clone)]
pub struct ServerConfig {
    pub addr: SocketAddr,
    pub store: PathBuf,
    pub options: RouterOptions,
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("{var}={value:?} is invalid: {reason}")]
    Invalid { var: &'static str, value: String, reason: String },
}

impl ServerConfig {
    /// Reads `ROUNDTRIP_ADDR`, `ROUNDTRIP_STORE`, `ROUNDTRIP_UI_DIR` and
    /// `ROUNDTRIP_MAX_UPLOAD` (bytes).
    pub fn from_env() -> Result<Self, ConfigError> {
        Self::from_lookup(|var| std::env::var(var).ok())
    }

    pub fn from_lookup(lookup: impl Fn(&str) -> Option<String>) -> Result<Self, ConfigError> {
        let addr_text = lookup("ROUNDTRIP_ADDR").unwrap_or_else(|| DEFAULT_ADDR.into());
        let addr = addr_text.parse().map_err(|e: std::net::AddrParseError| ConfigError::Invalid {
            var: "ROUNDTRIP_ADDR",
            value: addr_text.clone(),
            reason: e.to_string(),
        })?;
        let max_upload = match lookup("ROUNDTRIP_MAX_UPLOAD") {
            None => DEFAULT_MAX_UPLOAD,
            Some(v) => v.parse().map_err(|e: std::num::ParseIntError| ConfigError::Invalid {
                var: "ROUNDTRIP_MAX_UPLOAD",
                value: v.clone(),
                reason: e.to_string(),
            })?,
        };
        Ok(Self {
            addr,
            store: lookup("ROUNDTRIP_STORE").unwrap_or_else(|| DEFAULT_STORE.into()).into(),
            options: RouterOptions { max_upload, ui_dir: lookup("ROUNDTRIP_UI_DIR").map(PathBuf::from) },
        })
    }
}

/// Serves until `shutdown` resolves.
pub async fn serve(
    listener: TcpListener,
    service: Service,
    options: RouterOptions,
    shutdown: impl std::future::Future<Output = ()> + Send + 'static,
) -> io::Result<()> {
    axum::serve(listener, router(service, options)).with_graceful_shutdown(shutdown).await
}

/// Runs the server on the current thread until Ctrl-C. `on_ready` gets the
/// bound address.
pub fn run_blocking(
    addr: SocketAddr,
    service: Service,
    options: RouterOptions,
    on_ready: impl FnOnce(SocketAddr),
) -> io::Result<()> {
    let runtime = tokio::runtime::Builder::new_multi_thread().enable_all().build()?;
    runtime.block_on(async move {
        let listener = TcpListener::bind(addr).await?;
        on_ready(listener.local_addr()?);
        serve(listener, service, options, async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
    })
}

/// A server on its own thread, stopped when dropped.
pub struct BackgroundServer {
    addr: SocketAddr,
    shutdown: Option<oneshot::Sender<()>>,
    thread: Option<JoinHandle<io::Result<()>>>,
}

impl BackgroundServer {
    pub fn start(addr: SocketAddr, service: Service, options: RouterOptions) -> io::Result<Self> {
        let runtime = tokio::runtime::Builder::new_multi_thread().worker_threads(2).enable_all().build()?;
        let listener = runtime.block_on(TcpListener::bind(addr))?;
        let addr = listener.local_addr()?;
        let (tx, rx) = oneshot::channel::<()>();
        let thread = std::thread::spawn(move || {
            runtime.block_on(serve(listener, service, options, async {
                let _ = rx.await;
            }))
        });
        Ok(Self { addr, shutdown: Some(tx), thread: Some(thread) })
    }

    pub fn addr(&self) -> SocketAddr {
        self.addr
    }

    pub fn url(&self) -> String {
        format!("http://{}", self.addr)
    }
}

impl Drop for BackgroundServer {
    fn drop(&mut self) {
        if let Some(tx) = self.shutdown.take() {
            let _ = tx.send(());
        }
        if let Some(thread) = self.thread.take() {
            let _ = thread.join();
        }
    }
}
