use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::LlmError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    System,
    User,
    Assistant,
}

impl Role {
    pub fn as_str(self) -> &'static str {
        match self {
            Role::System => "system",
            Role::User => "user",
            Role::Assistant => "assistant",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Message {
    pub role: Role,
    pub content: String,
    /// Milliseconds since the Unix epoch.
    pub timestamp: u64,
}

/// Where message timestamps come from. Tests pin a fixed clock so logs are
/// byte-reproducible.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Clock {
    #[default]
    System,
    Fixed(u64),
}

impl Clock {
    pub fn now(self) -> u64 {
        match self {
            Clock::System => SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_millis() as u64)
                .unwrap_or(0),
            Clock::Fixed(t) => t,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
struct Header {
    id: String,
    tags: Vec<String>,
}

/// An append-only dialogue. Persisted as JSON lines: a header line with the
/// id and tags, then one line per message.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Conversation {
    pub id: String,
    pub tags: Vec<String>,
    messages: Vec<Message>,
    #[serde(skip)]
    persisted: Option<usize>,
}

impl Conversation {
    pub fn new(id: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            tags: Vec::new(),
            messages: Vec::new(),
            persisted: None,
        }
    }

    pub fn tagged<I, S>(mut self, tags: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.tags.extend(tags.into_iter().map(Into::into));
        self
    }

    pub fn messages(&self) -> &[Message] {
        &self.messages
    }

    pub fn len(&self) -> usize {
        self.messages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.messages.is_empty()
    }

    pub fn last(&self) -> Option<&Message> {
        self.messages.last()
    }

    /// Appends a message and returns its index.
    pub fn push(&mut self, role: Role, content: impl Into<String>, clock: Clock) -> usize {
        self.messages.push(Message {
            role,
            content: content.into(),
            timestamp: clock.now(),
        });
        self.messages.len() - 1
    }

    /// Index of the most recent assistant message.
    pub fn last_assistant(&self) -> Option<usize> {
        self.messages.iter().rposition(|m| m.role == Role::Assistant)
    }

    /// Content digest of the outbound message list; timestamps excluded.
    pub fn digest(&self) -> String {
        digest_messages(&self.messages)
    }

    pub fn path_in(dir: &Path, id: &str) -> PathBuf {
        dir.join(format!("{id}.jsonl"))
    }

    /// Appends unsaved messages to `dir/<id>.jsonl`, writing the header on
    /// first save. Earlier lines are never rewritten.
    pub fn persist(&mut self, dir: &Path) -> Result<(), LlmError> {
        fs::create_dir_all(dir)?;
        let path = Self::path_in(dir, &self.id);
        let mut buf = String::new();
        let from = match self.persisted {
            Some(n) => n,
            None => {
                if path.exists() {
                    let on_disk = Self::load(dir, &self.id)?;
                    let n = on_disk.messages.len();
                    if on_disk.messages[..] != self.messages[..n.min(self.messages.len())] || n > self.messages.len() {
                        return Err(LlmError::Diverged(self.id.clone()));
                    }
                    n
                } else {
                    let header = Header {
                        id: self.id.clone(),
                        tags: self.tags.clone(),
                    };
                    buf.push_str(&serde_json::to_string(&header)?);
                    buf.push('\n');
                    0
                }
            }
        };
        for m in &self.messages[from..] {
            buf.push_str(&serde_json::to_string(m)?);
            buf.push('\n');
        }
        if !buf.is_empty() {
            let mut f = OpenOptions::new().create(true).append(true).open(&path)?;
            f.write_all(buf.as_bytes())?;
        }
        self.persisted = Some(self.messages.len());
        Ok(())
    }

    pub fn load(dir: &Path, id: &str) -> Result<Self, LlmError> {
        let path = Self::path_in(dir, id);
        let text = fs::read_to_string(&path)?;
        let mut c = Self::parse_log(&text)?;
        c.persisted = Some(c.messages.len());
        Ok(c)
    }

    pub fn parse_log(text: &str) -> Result<Self, LlmError> {
        let mut lines = text.split_inclusive('\n').enumerate();
        let (_, first) = lines.next().ok_or(LlmError::CorruptLog { line: 1 })?;
        let header: Header = parse_line(first, 1)?;
        let mut messages = Vec::new();
        for (i, line) in lines {
            messages.push(parse_line(line, i + 1)?);
        }
        Ok(Self {
            id: header.id,
            tags: header.tags,
            messages,
            persisted: None,
        })
    }
}

fn parse_line<T: serde::de::DeserializeOwned>(line: &str, number: usize) -> Result<T, LlmError> {
    // a line without its newline was cut short by an interrupted write
    if !line.ends_with('\n') {
        return Err(LlmError::CorruptLog { line: number });
    }
    serde_json::from_str(line.trim_end()).map_err(|_| LlmError::CorruptLog { line: number })
}

pub fn digest_messages(messages: &[Message]) -> String {
    let mut h = Sha256::new();
    for m in messages {
        h.update(m.role.as_str().as_bytes());
        h.update([0u8]);
        h.update((m.content.len() as u64).to_le_bytes());
        h.update(m.content.as_bytes());
    }
    hex::encode(h.finalize())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let mut c = Conversation::new("e").tagged(["x"]);
        c.persist(dir.path()).unwrap();
        let back = Conversation::load(dir.path(), "e").unwrap();
        assert_eq!(back.id, "e");
        assert_eq!(back.tags, vec!["x"]);
        assert!(back.is_empty());
    }

    #[test]
    fn appends_never_rewrite() {
        let dir = tempfile::tempdir().unwrap();
        let mut c = Conversation::new("a");
        c.push(Role::User, "one", Clock::Fixed(1));
        c.persist(dir.path()).unwrap();
        let before = fs::read(Conversation::path_in(dir.path(), "a")).unwrap();
        c.push(Role::Assistant, "two\nlines", Clock::Fixed(2));
        c.persist(dir.path()).unwrap();
        let after = fs::read(Conversation::path_in(dir.path(), "a")).unwrap();
        assert!(after.starts_with(&before));
        assert_eq!(Conversation::load(dir.path(), "a").unwrap().messages(), c.messages());
    }

    #[test]
    fn truncated_last_line_is_corrupt() {
        let dir = tempfile::tempdir().unwrap();
        let mut c = Conversation::new("t");
        c.push(Role::User, "hi", Clock::Fixed(0));
        c.push(Role::Assistant, "yo", Clock::Fixed(0));
        c.persist(dir.path()).unwrap();
        let path = Conversation::path_in(dir.path(), "t");
        let text = fs::read_to_string(&path).unwrap();
        fs::write(&path, &text[..text.len() - 5]).unwrap();
        assert!(matches!(
            Conversation::load(dir.path(), "t"),
            Err(LlmError::CorruptLog { line: 3 })
        ));
    }

    #[test]
    fn digest_ignores_timestamps() {
        let mut a = Conversation::new("a");
        a.push(Role::User, "q", Clock::Fixed(1));
        let mut b = Conversation::new("b");
        b.push(Role::User, "q", Clock::Fixed(99));
        assert_eq!(a.digest(), b.digest());
        b.push(Role::User, "", Clock::Fixed(99));
        assert_ne!(a.digest(), b.digest());
    }
}
