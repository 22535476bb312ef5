//! HTTP client for planners served elsewhere.

use std::time::Duration;

use super::wire::encode_request;
use super::{Planner, PlannerError, PlannerInput};
use crate::http::{post_json, HttpError};
use crate::scenegraph::SceneGraph;

#[derive(Debug, Clone, PartialEq)]
pub struct RemoteConfig {
    pub endpoint: String,
    pub timeout: Duration,
    /// Extra attempts after the first failure.
    pub retries: usize,
    /// Wait before the first retry; doubled after each further failure.
    pub backoff: Duration,
}

impl RemoteConfig {
    pub fn new(endpoint: impl Into<String>) -> Self {
        Self {
            endpoint: endpoint.into(),
            timeout: Duration::from_secs(60),
            retries: 2,
            backoff: Duration::from_millis(500),
        }
    }
}

fn to_planner_error(e: HttpError) -> PlannerError {
    match e {
        HttpError::Timeout => PlannerError::Timeout,
        other => PlannerError::TransportError(other.to_string()),
    }
}

/// POSTs the request document and returns the raw response body.
///
/// Timeouts, transport failures and 5xx answers are retried; 4xx answers are
/// not, since resending the same document cannot fix them.
pub fn remote_planner_call(cfg: &RemoteConfig, input: &PlannerInput) -> Result<String, PlannerError> {
    let body = encode_request(input);
    let mut wait = cfg.backoff;
    let mut attempts = 0;
    loop {
        attempts += 1;
        let err = match post_json(&cfg.endpoint, &body, cfg.timeout) {
            Ok(text) => return Ok(text),
            Err(HttpError::Status(code)) if (400..500).contains(&code) => {
                return Err(PlannerError::TransportError(HttpError::Status(code).to_string()))
            }
            Err(e) => e,
        };
        if attempts > cfg.retries {
            return Err(if cfg.retries == 0 {
                to_planner_error(err)
            } else {
                PlannerError::RetriesExhausted {
                    attempts,
                    last: err.to_string(),
                }
            });
        }
        std::thread::sleep(wait);
        wait = wait.saturating_mul(2);
    }
}

#[derive(Debug, Clone)]
pub struct RemotePlanner {
    pub config: RemoteConfig,
}

impl RemotePlanner {
    pub fn new(config: RemoteConfig) -> Self {
        Self { config }
    }
}

impl Planner for RemotePlanner {
    fn plan(&mut self, input: &PlannerInput, _sg: &SceneGraph) -> Result<String, PlannerError> {
        remote_planner_call(&self.config, input)
    }
}
