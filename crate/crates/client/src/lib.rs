//! Blocking client for the laboratory service.

use std::time::Duration;

use reqwest::blocking::{Client as Http, Response};
use serde_json::Value;
use sslab_experiments::Op;

#[derive(Debug, thiserror::Error)]
pub enum ClientError {
    #[error("request failed: {0}")]
    Http(#[from] reqwest::Error),
    #[error("server answered {status}: {message}")]
    Server { status: u16, message: String },
}

#[derive(Clone, Debug)]
pub struct Client {
    base: String,
    http: Http,
}

impl Client {
    /// `base` is the server root, such as `http://127.0.0.1:8080`.
    pub fn new(base: &str) -> Result<Self, ClientError> {
        // Replications can run for minutes.
        let http = Http::builder().timeout(Duration::from_secs(3600)).build()?;
        Ok(Client { base: base.trim_end_matches('/').to_string(), http })
    }

    fn read(r: Response) -> Result<Value, ClientError> {
        let status = r.status();
        if status.is_success() {
            return Ok(r.json()?);
        }
        let text = r.text().unwrap_or_default();
        let message = serde_json::from_str::<Value>(&text)
            .ok()
            .and_then(|v| v.get("error").and_then(Value::as_str).map(str::to_string))
            .unwrap_or(text);
        Err(ClientError::Server { status: status.as_u16(), message })
    }

    pub fn health(&self) -> Result<Value, ClientError> {
        Self::read(self.http.get(format!("{}/v1/health", self.base)).send()?)
    }

    pub fn corpus(&self) -> Result<Value, ClientError> {
        Self::read(self.http.get(format!("{}/v1/corpus", self.base)).send()?)
    }

    pub fn execute(&self, op: &Op) -> Result<Value, ClientError> {
        Self::read(self.http.post(format!("{}/v1/ops", self.base)).json(op).send()?)
    }
}
