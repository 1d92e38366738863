//! Blocking JSON-over-HTTP with bounded retries, shared by chat and embedding clients.

use std::thread;
use std::time::Duration;

use serde::Serialize;
use serde_json::Value;

use super::LlmError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RetryPolicy {
    /// Retries after the first attempt.
    pub max_retries: u32,
    pub base_delay: Duration,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        Self {
            max_retries: 3,
            base_delay: Duration::from_millis(200),
        }
    }
}

impl RetryPolicy {
    fn delay(&self, attempt: u32) -> Duration {
        self.base_delay * 2u32.saturating_pow(attempt)
    }
}

#[derive(Debug)]
enum Attempt {
    Retryable(String),
    Fatal(LlmError),
}

pub(crate) struct JsonClient {
    agent: ureq::Agent,
    timeout: Duration,
    pub(crate) retry: RetryPolicy,
}

impl JsonClient {
    pub(crate) fn new(timeout: Duration) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(timeout))
            .http_status_as_error(false)
            .build()
            .into();
        Self {
            agent,
            timeout,
            retry: RetryPolicy::default(),
        }
    }

    fn attempt(&self, url: &str, bearer: Option<&str>, body: &impl Serialize) -> Result<Value, Attempt> {
        let mut req = self.agent.post(url);
        if let Some(key) = bearer {
            req = req.header("Authorization", &format!("Bearer {key}"));
        }
        match req.send_json(body) {
            Ok(mut resp) => {
                let status = resp.status().as_u16();
                if status == 429 || status >= 500 {
                    return Err(Attempt::Retryable(format!("HTTP {status}")));
                }
                if status >= 400 {
                    let text = resp.body_mut().read_to_string().unwrap_or_default();
                    return Err(Attempt::Fatal(LlmError::Http {
                        status,
                        body: text.chars().take(500).collect(),
                    }));
                }
                resp.body_mut()
                    .read_json::<Value>()
                    .map_err(|e| Attempt::Fatal(LlmError::BadResponse(e.to_string())))
            }
            Err(ureq::Error::Timeout(_)) => Err(Attempt::Fatal(LlmError::Timeout(self.timeout))),
            Err(e) => Err(Attempt::Retryable(e.to_string())),
        }
    }

    /// POSTs `body`, retrying transport failures with exponential backoff.
    pub(crate) fn post(&self, url: &str, bearer: Option<&str>, body: &impl Serialize) -> Result<Value, LlmError> {
        let mut last = String::new();
        for attempt in 0..=self.retry.max_retries {
            if attempt > 0 {
                thread::sleep(self.retry.delay(attempt - 1));
            }
            match self.attempt(url, bearer, body) {
                Ok(v) => return Ok(v),
                Err(Attempt::Fatal(e)) => return Err(e),
                Err(Attempt::Retryable(msg)) => {
                    log::debug!("request to {url} failed (attempt {}): {msg}", attempt + 1);
                    last = msg;
                }
            }
        }
        Err(LlmError::Network {
            attempts: self.retry.max_retries + 1,
            message: last,
        })
    }
}
