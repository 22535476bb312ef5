//! Minimal blocking JSON POST shared by the remote labeler and planner.

use std::time::Duration;

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum HttpError {
    #[error("request timed out")]
    Timeout,
    #[error("server answered HTTP {0}")]
    Status(u16),
    #[error("transport failure: {0}")]
    Transport(String),
}

pub(crate) fn post_json(url: &str, body: &str, timeout: Duration) -> Result<String, HttpError> {
    let agent: ureq::Agent = ureq::Agent::config_builder()
        .timeout_global(Some(timeout))
        .build()
        .into();
    let response = agent
        .post(url)
        .header("content-type", "application/json")
        .send(body);
    match response {
        Ok(mut resp) => resp
            .body_mut()
            .read_to_string()
            .map_err(classify),
        Err(e) => Err(classify(e)),
    }
}

fn classify(e: ureq::Error) -> HttpError {
    match e {
        ureq::Error::Timeout(_) => HttpError::Timeout,
        ureq::Error::StatusCode(code) => HttpError::Status(code),
        ureq::Error::Io(io) if io.kind() == std::io::ErrorKind::TimedOut || io.kind() == std::io::ErrorKind::WouldBlock => {
            HttpError::Timeout
        }
        other => HttpError::Transport(other.to_string()),
    }
}
