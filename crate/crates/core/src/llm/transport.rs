use std::collections::{HashMap, VecDeque};
use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::conversation::{digest_messages, Message};
use super::LlmError;

/// Produces the assistant reply for an outbound message list.
pub trait Transport: Send + Sync {
    fn complete(&self, messages: &[Message]) -> Result<String, LlmError>;
}

/// Transport selection as written in project configuration.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum TransportMode {
    Live {
        endpoint: String,
        model: String,
        /// Name of the environment variable holding the API key.
        key_env: String,
    },
    Replay {
        cassette: PathBuf,
    },
    Scripted {
        responses: Vec<String>,
    },
}

impl TransportMode {
    pub fn is_live(&self) -> bool {
        matches!(self, TransportMode::Live { .. })
    }

    /// Builds the transport; relative cassette paths resolve against `base`.
    pub fn build(&self, base: &Path) -> Result<Box<dyn Transport>, LlmError> {
        Ok(match self {
            TransportMode::Live {
                endpoint,
                model,
                key_env,
            } => Box::new(LiveTransport::new(endpoint, model, key_env)),
            TransportMode::Replay { cassette } => Box::new(ReplayTransport::open(&base.join(cassette))?),
            TransportMode::Scripted { responses } => Box::new(ScriptedTransport::new(responses.clone())),
        })
    }
}

/// Pops pre-written replies in order.
#[derive(Debug, Default)]
pub struct ScriptedTransport {
    queue: Mutex<VecDeque<String>>,
}

impl ScriptedTransport {
    pub fn new<I, S>(responses: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self {
            queue: Mutex::new(responses.into_iter().map(Into::into).collect()),
        }
    }

    pub fn remaining(&self) -> usize {
        self.queue.lock().expect("script lock").len()
    }
}

impl Transport for ScriptedTransport {
    fn complete(&self, _messages: &[Message]) -> Result<String, LlmError> {
        self.queue
            .lock()
            .expect("script lock")
            .pop_front()
            .ok_or(LlmError::ScriptExhausted)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CassetteEntry {
    pub digest: String,
    pub response: String,
}

/// Answers from recorded exchanges keyed by the digest of the outbound
/// message list.
#[derive(Debug, Default)]
pub struct ReplayTransport {
    entries: HashMap<String, String>,
}

impl ReplayTransport {
    /// Loads a cassette file, or every `*.jsonl` file in a directory in
    /// name order. The first entry for a digest wins.
    pub fn open(path: &Path) -> Result<Self, LlmError> {
        let mut files = Vec::new();
        if path.is_dir() {
            for e in fs::read_dir(path)? {
                let p = e?.path();
                if p.extension().is_some_and(|x| x == "jsonl") {
                    files.push(p);
                }
            }
            files.sort();
        } else {
            files.push(path.to_path_buf());
        }
        let mut entries = HashMap::new();
        for f in files {
            let text = fs::read_to_string(&f)?;
            for (i, line) in text.lines().enumerate() {
                if line.trim().is_empty() {
                    continue;
                }
                let e: CassetteEntry = serde_json::from_str(line).map_err(|err| LlmError::BadCassette {
                    path: f.clone(),
                    line: i + 1,
                    message: err.to_string(),
                })?;
                entries.entry(e.digest).or_insert(e.response);
            }
        }
        Ok(Self { entries })
    }

    pub fn from_entries<I: IntoIterator<Item = CassetteEntry>>(entries: I) -> Self {
        let mut map = HashMap::new();
        for e in entries {
            map.entry(e.digest).or_insert(e.response);
        }
        Self { entries: map }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

impl Transport for ReplayTransport {
    fn complete(&self, messages: &[Message]) -> Result<String, LlmError> {
        let digest = digest_messages(messages);
        self.entries
            .get(&digest)
            .cloned()
            .ok_or(LlmError::CassetteMiss { digest })
    }
}

/// Wraps another transport and appends every exchange to a cassette file.
pub struct RecordingTransport<T: Transport> {
    inner: T,
    path: PathBuf,
    lock: Mutex<()>,
}

impl<T: Transport> RecordingTransport<T> {
    pub fn new(inner: T, path: impl Into<PathBuf>) -> Self {
        Self {
            inner,
            path: path.into(),
            lock: Mutex::new(()),
        }
    }
}

impl<T: Transport> Transport for RecordingTransport<T> {
    fn complete(&self, messages: &[Message]) -> Result<String, LlmError> {
        let response = self.inner.complete(messages)?;
        let entry = CassetteEntry {
            digest: digest_messages(messages),
            response: response.clone(),
        };
        let _guard = self.lock.lock().expect("recorder lock");
        if let Some(parent) = self.path.parent() {
            fs::create_dir_all(parent)?;
        }
        let mut f = OpenOptions::new().create(true).append(true).open(&self.path)?;
        writeln!(f, "{}", serde_json::to_string(&entry)?)?;
        Ok(response)
    }
}

impl<T: Transport + ?Sized> Transport for Box<T> {
    fn complete(&self, messages: &[Message]) -> Result<String, LlmError> {
        (**self).complete(messages)
    }
}

impl<T: Transport + ?Sized> Transport for std::sync::Arc<T> {
    fn complete(&self, messages: &[Message]) -> Result<String, LlmError> {
        (**self).complete(messages)
    }
}

/// OpenAI-style chat-completions client.
pub struct LiveTransport {
    endpoint: String,
    model: String,
    key_env: String,
    max_attempts: u32,
    // one request at a time per transport
    gate: Mutex<()>,
}

impl LiveTransport {
    pub fn new(endpoint: &str, model: &str, key_env: &str) -> Self {
        Self {
            endpoint: endpoint.trim_end_matches('/').to_string(),
            model: model.to_string(),
            key_env: key_env.to_string(),
            max_attempts: 4,
            gate: Mutex::new(()),
        }
    }
}

impl Transport for LiveTransport {
    fn complete(&self, messages: &[Message]) -> Result<String, LlmError> {
        let key = std::env::var(&self.key_env)
            .map_err(|_| LlmError::Transport(format!("environment variable {} is not set", self.key_env)))?;
        let body = serde_json::json!({
            "model": self.model,
            "temperature": 0,
            "messages": messages
                .iter()
                .map(|m| serde_json::json!({"role": m.role.as_str(), "content": m.content}))
                .collect::<Vec<_>>(),
        });
        let url = format!("{}/chat/completions", self.endpoint);
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(120)))
            .build()
            .into();
        let _guard = self.gate.lock().expect("live gate");
        let mut delay = Duration::from_millis(500);
        let mut last_err = String::new();
        for attempt in 1..=self.max_attempts {
            match agent
                .post(&url)
                .header("Authorization", &format!("Bearer {key}"))
                .send_json(&body)
            {
                Ok(mut resp) => {
                    let v: serde_json::Value = resp
                        .body_mut()
                        .read_json()
                        .map_err(|e| LlmError::Transport(e.to_string()))?;
                    return v["choices"][0]["message"]["content"]
                        .as_str()
                        .map(str::to_string)
                        .ok_or_else(|| LlmError::Transport(format!("unexpected response shape: {v}")));
                }
                Err(ureq::Error::StatusCode(code)) if code == 429 || code >= 500 => {
                    last_err = format!("http status {code}");
                }
                Err(ureq::Error::StatusCode(code)) => {
                    return Err(LlmError::Transport(format!("http status {code}")));
                }
                Err(e) => last_err = e.to_string(),
            }
            if attempt < self.max_attempts {
                log::warn!("completion attempt {attempt} failed: {last_err}; retrying");
                std::thread::sleep(delay);
                delay *= 2;
            }
        }
        Err(LlmError::Transport(last_err))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::llm::{Clock, Conversation, Role};

    fn conv(text: &str) -> Conversation {
        let mut c = Conversation::new("c");
        c.push(Role::User, text, Clock::Fixed(0));
        c
    }

    #[test]
    fn scripted_pops_in_order() {
        let t = ScriptedTransport::new(["a"]);
        assert_eq!(t.complete(&[]).unwrap(), "a");
        assert_eq!(t.remaining(), 0);
        assert!(matches!(t.complete(&[]), Err(LlmError::ScriptExhausted)));
    }

    #[test]
    fn record_then_replay() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.jsonl");
        let rec = RecordingTransport::new(ScriptedTransport::new(["r1"]), &path);
        assert_eq!(rec.complete(conv("hello").messages()).unwrap(), "r1");
        let replay = ReplayTransport::open(&path).unwrap();
        for _ in 0..2 {
            assert_eq!(replay.complete(conv("hello").messages()).unwrap(), "r1");
        }
        assert!(matches!(
            replay.complete(conv("hello!").messages()),
            Err(LlmError::CassetteMiss { .. })
        ));
    }

    #[test]
    fn mode_serializes_with_tag() {
        let m = TransportMode::Replay {
            cassette: "cassettes".into(),
        };
        let v = serde_json::to_value(&m).unwrap();
        assert_eq!(v["mode"], "replay");
    }
}
