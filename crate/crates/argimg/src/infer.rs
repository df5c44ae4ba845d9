//! HTTP clients for a remote inference service: `POST /classify` (stance
//! scores) and `POST /generate` (reference images).

use std::time::Duration;

use argimg_core::imagegen::{ImageGenerator, Prompt};
use argimg_core::stance::StanceScorer;
use argimg_core::vision::GrayImage;
use base64::Engine;
use serde::{Deserialize, Serialize};

use crate::image_io::decode_png;

pub const ENV_URL: &str = "ARGIMG_INFER_URL";
pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(120);
const MAX_RESPONSE_BYTES: u64 = 64 << 20;

#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct ClassifyRequest {
    pub text: String,
    pub labels: [String; 3],
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct ClassifyResponse {
    pub scores: Vec<f64>,
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct GenerateRequest {
    pub prompt: String,
    pub width: usize,
    pub height: usize,
    pub seed: u64,
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct GenerateResponse {
    pub png_base64: String,
}

/// Blocking client; safe to share across threads.
#[derive(Debug, Clone)]
pub struct InferClient {
    base: String,
    agent: ureq::Agent,
}

impl InferClient {
    pub fn new(base_url: &str, timeout: Duration) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(timeout))
            .http_status_as_error(false)
            .build()
            .into();
        Self {
            base: base_url.trim_end_matches('/').to_string(),
            agent,
        }
    }

    /// Client for `$ARGIMG_INFER_URL`, if set and non-empty.
    pub fn from_env(timeout: Duration) -> Option<Self> {
        std::env::var(ENV_URL)
            .ok()
            .filter(|u| !u.trim().is_empty())
            .map(|u| Self::new(&u, timeout))
    }

    pub fn base_url(&self) -> &str {
        &self.base
    }

    fn post<Req: Serialize, Resp: for<'de> Deserialize<'de>>(&self, path: &str, body: &Req) -> Result<Resp, String> {
        let url = format!("{}{path}", self.base);
        let mut resp = self
            .agent
            .post(&url)
            .send_json(body)
            .map_err(|e| format!("POST {url}: {e}"))?;
        let status = resp.status();
        if !status.is_success() {
            let detail = resp.body_mut().read_to_string().unwrap_or_default();
            let detail: String = detail.chars().take(200).collect();
            return Err(format!("POST {url}: HTTP {status}: {detail}"));
        }
        resp.body_mut()
            .with_config()
            .limit(MAX_RESPONSE_BYTES)
            .read_json()
            .map_err(|e| format!("POST {url}: malformed response: {e}"))
    }

    pub fn classify_raw(&self, text: &str, labels: &[String; 3]) -> Result<[f64; 3], String> {
        let req = ClassifyRequest {
            text: text.to_string(),
            labels: labels.clone(),
        };
        let resp: ClassifyResponse = self.post("/classify", &req)?;
        <[f64; 3]>::try_from(resp.scores.as_slice())
            .map_err(|_| format!("expected 3 scores, got {}", resp.scores.len()))
    }

    pub fn generate_raw(&self, prompt: &Prompt) -> Result<GrayImage, String> {
        let req = GenerateRequest {
            prompt: prompt.text.clone(),
            width: prompt.width,
            height: prompt.height,
            seed: prompt.seed,
        };
        let resp: GenerateResponse = self.post("/generate", &req)?;
        let bytes = base64::engine::general_purpose::STANDARD
            .decode(resp.png_base64.trim())
            .map_err(|e| format!("png_base64: {e}"))?;
        decode_png(&bytes).map_err(|e| format!("png_base64: {e}"))
    }
}

impl StanceScorer for InferClient {
    fn classify(&self, text: &str, labels: &[String; 3]) -> argimg_core::Result<[f64; 3]> {
        self.classify_raw(text, labels).map_err(argimg_core::Error::Scorer)
    }
}

impl ImageGenerator for InferClient {
    fn generate(&self, prompt: &Prompt) -> argimg_core::Result<GrayImage> {
        self.generate_raw(prompt).map_err(argimg_core::Error::Generator)
    }
}
