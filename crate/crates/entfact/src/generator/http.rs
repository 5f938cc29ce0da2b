//! HTTP client for a remote text-generation service.
//!
//! Wire contract: `POST {endpoint}` with JSON `{"prompt": str, "max_tokens": int}`,
//! expecting `200` with JSON `{"text": str}`. A bearer token is read from the
//! `ENTFACT_GENERATOR_TOKEN` environment variable when present.

use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::{GeneratorError, GeneratorPort};

pub const TOKEN_ENV_VAR: &str = "ENTFACT_GENERATOR_TOKEN";

#[derive(Debug, Clone)]
pub struct HttpGeneratorConfig {
    pub endpoint: String,
    /// Request timeout; defaults to 30 s.
    pub timeout: Duration,
    /// Transport retries before giving up; defaults to 3.
    pub retries: u32,
    /// Base delay for exponential backoff between retries.
    pub backoff_base: Duration,
}

impl HttpGeneratorConfig {
    pub fn new(endpoint: impl Into<String>) -> Self {
        HttpGeneratorConfig {
            endpoint: endpoint.into(),
            timeout: Duration::from_secs(30),
            retries: 3,
            backoff_base: Duration::from_millis(250),
        }
    }
}

pub struct HttpGenerator {
    config: HttpGeneratorConfig,
    token: Option<String>,
    agent: ureq::Agent,
}

#[derive(Serialize)]
struct GenerateRequest<'a> {
    prompt: &'a str,
    max_tokens: usize,
}

#[derive(Deserialize)]
struct GenerateResponse {
    text: String,
}

impl HttpGenerator {
    pub fn new(config: HttpGeneratorConfig) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(config.timeout))
            .build()
            .new_agent();
        let token = std::env::var(TOKEN_ENV_VAR).ok().filter(|t| !t.is_empty());
        HttpGenerator {
            config,
            token,
            agent,
        }
    }

    fn attempt(&self, prompt: &str, max_tokens: usize) -> Result<String, ureq::Error> {
        let mut req = self.agent.post(&self.config.endpoint);
        if let Some(token) = &self.token {
            req = req.header("Authorization", &format!("Bearer {token}"));
        }
        let mut resp = req.send_json(GenerateRequest { prompt, max_tokens })?;
        let body: GenerateResponse = resp.body_mut().read_json()?;
        Ok(body.text)
    }
}

impl GeneratorPort for HttpGenerator {
    fn generate(&mut self, prompt: &str, max_tokens: usize) -> Result<String, GeneratorError> {
        let mut last_err = String::new();
        for attempt in 0..=self.config.retries {
            match self.attempt(prompt, max_tokens) {
                Ok(text) => return Ok(text),
                Err(e) => {
                    last_err = e.to_string();
                    // 4xx responses will not improve on retry.
                    if let ureq::Error::StatusCode(code) = &e {
                        if (400..500).contains(code) {
                            break;
                        }
                    }
                    if attempt < self.config.retries {
                        std::thread::sleep(self.config.backoff_base * 2u32.pow(attempt));
                    }
                }
            }
        }
        Err(GeneratorError::Unavailable(last_err))
    }
}
