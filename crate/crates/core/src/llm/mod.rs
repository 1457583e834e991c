//! Boundary to language models: prompt templates, persisted conversations
//! and interchangeable transports (live, replayed from cassettes, scripted).

mod conversation;
mod template;
mod transport;

use std::path::PathBuf;

pub use conversation::{digest_messages, Clock, Conversation, Message, Role};
pub use template::{bindings, PromptTemplate};
pub use transport::{
    CassetteEntry, LiveTransport, RecordingTransport, ReplayTransport, ScriptedTransport, Transport,
    TransportMode,
};

#[derive(Debug, thiserror::Error)]
pub enum LlmError {
    #[error("template '{template}' has no binding for slot '{slot}'")]
    UnboundSlot { template: String, slot: String },
    #[error("template '{template}' uses unknown slot '{slot}'")]
    UnknownSlot { template: String, slot: String },
    #[error("conversation log is corrupt at line {line}")]
    CorruptLog { line: usize },
    #[error("conversation '{0}' differs from its saved log")]
    Diverged(String),
    #[error("no cassette entry for request digest {digest}")]
    CassetteMiss { digest: String },
    #[error("cassette {path}:{line}: {message}")]
    BadCassette {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("scripted transport has no responses left")]
    ScriptExhausted,
    #[error("transport error: {0}")]
    Transport(String),
    #[error("the last message is already an assistant reply")]
    AwaitingUser,
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Sends the conversation and appends the reply. Returns the index of the
/// new assistant message.
pub fn complete(c: &mut Conversation, transport: &dyn Transport, clock: Clock) -> Result<usize, LlmError> {
    if c.last().is_some_and(|m| m.role == Role::Assistant) {
        return Err(LlmError::AwaitingUser);
    }
    let reply = transport.complete(c.messages())?;
    Ok(c.push(Role::Assistant, reply, clock))
}
