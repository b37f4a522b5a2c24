//! Conversational backend abstraction: a remote chat endpoint plus the
//! deterministic test doubles (scripted, replay, oracle) that stand in for
//! it in experiments and tests, and extraction of candidate ASP rules from
//! free-form responses.

use std::sync::Mutex;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::asp::{parse_program, Program, RuleKind};

#[derive(Debug, thiserror::Error)]
pub enum LlmError {
    #[error("transport error after {attempts} attempt(s): {detail}")]
    Transport { detail: String, attempts: u32 },
    #[error("scripted backend exhausted after {served} response(s)")]
    ScriptExhausted { served: usize },
    #[error("replay divergence at exchange {turn}: prompt differs from the recording")]
    ReplayDivergence { turn: usize },
    #[error("credential environment variable {env} is not set")]
    MissingCredential { env: String },
    #[error("endpoint returned an unusable response: {detail}")]
    BadResponse { detail: String },
    #[error("transcript error: {detail}")]
    Transcript { detail: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    System,
    User,
    Assistant,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatTurn {
    pub role: Role,
    pub content: String,
    /// Wall-clock milliseconds since the epoch.
    pub ts: u64,
}

fn now_ms() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_millis() as u64).unwrap_or(0)
}

/// Append-only conversation state. The first turn is the system preprompt;
/// user and assistant turns alternate after it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Transcript {
    turns: Vec<ChatTurn>,
    pub session_id: String,
}

impl Transcript {
    pub fn new(session_id: impl Into<String>, preprompt: impl Into<String>) -> Transcript {
        Transcript {
            turns: vec![ChatTurn { role: Role::System, content: preprompt.into(), ts: now_ms() }],
            session_id: session_id.into(),
        }
    }

    pub fn turns(&self) -> &[ChatTurn] {
        &self.turns
    }

    pub fn push_user(&mut self, content: impl Into<String>) {
        let content = content.into();
        assert!(!content.is_empty(), "user turns must be nonempty");
        assert!(
            matches!(self.turns.last().map(|t| t.role), Some(Role::System) | Some(Role::Assistant)),
            "user turn must follow system or assistant"
        );
        self.turns.push(ChatTurn { role: Role::User, content, ts: now_ms() });
    }

    pub fn push_assistant(&mut self, content: impl Into<String>) {
        let content = content.into();
        assert!(!content.is_empty(), "assistant turns must be nonempty");
        assert!(
            matches!(self.turns.last().map(|t| t.role), Some(Role::User)),
            "assistant turn must follow a user turn"
        );
        self.turns.push(ChatTurn { role: Role::Assistant, content, ts: now_ms() });
    }

    /// The (prompt, response) exchanges after the system turn.
    pub fn exchanges(&self) -> Vec<(String, String)> {
        let mut out = Vec::new();
        let mut pending: Option<&str> = None;
        for turn in &self.turns {
            match turn.role {
                Role::System => {}
                Role::User => pending = Some(&turn.content),
                Role::Assistant => {
                    if let Some(prompt) = pending.take() {
                        out.push((prompt.to_string(), turn.content.clone()));
                    }
                }
            }
        }
        out
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for turn in &self.turns {
            out.push_str(&serde_json::to_string(turn).expect("turn serializes"));
            out.push('\n');
        }
        out
    }

    pub fn from_jsonl(session_id: impl Into<String>, text: &str) -> Result<Transcript, LlmError> {
        let mut turns = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let turn: ChatTurn = serde_json::from_str(line)
                .map_err(|e| LlmError::Transcript { detail: format!("line {}: {e}", i + 1) })?;
            turns.push(turn);
        }
        if turns.first().map(|t| t.role) != Some(Role::System) {
            return Err(LlmError::Transcript { detail: "first turn must be the system preprompt".into() });
        }
        Ok(Transcript { turns, session_id: session_id.into() })
    }
}

/// Configuration for the remote chat-completion backend. The credential is
/// read from `credential_env` at call time and never stored or logged.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HttpConfig {
    pub endpoint: String,
    pub model: String,
    pub temperature: f64,
    pub credential_env: String,
    pub max_retries: u32,
    pub backoff_ms: u64,
}

impl Default for HttpConfig {
    fn default() -> Self {
        HttpConfig {
            endpoint: String::new(),
            model: String::new(),
            temperature: 0.0,
            credential_env: "LLM_API_KEY".to_string(),
            max_retries: 3,
            backoff_ms: 1000,
        }
    }
}

/// Deterministic fault injection for the oracle backend.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum OracleFault {
    None,
    /// First response carries a statement the solver rejects.
    SyntaxThenCorrect,
    /// First response derives a wrong answer; later responses are correct.
    WrongAnswerThenCorrect,
}

#[doc(hidden)]
pub struct OracleState {
    responses_served: usize,
}

/// One conversational backend. Doubles share the interface of the remote
/// endpoint so sessions cannot tell them apart.
pub enum Backend {
    RemoteHttp(HttpConfig),
    ScriptedMock { responses: Vec<String>, state: Mutex<usize> },
    Replay { exchanges: Vec<(String, String)>, state: Mutex<usize> },
    Oracle { hidden: Program, fault: OracleFault, state: Mutex<OracleState> },
}

impl std::fmt::Debug for Backend {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.kind_name())
    }
}

impl Backend {
    pub fn http(config: HttpConfig) -> Backend {
        Backend::RemoteHttp(config)
    }

    pub fn scripted(responses: Vec<String>) -> Backend {
        Backend::ScriptedMock { responses, state: Mutex::new(0) }
    }

    pub fn replay(exchanges: Vec<(String, String)>) -> Backend {
        Backend::Replay { exchanges, state: Mutex::new(0) }
    }

    pub fn replay_of(recorded: &Transcript) -> Backend {
        Backend::replay(recorded.exchanges())
    }

    /// A backend that "knows" `hidden` and answers every prompt with it.
    pub fn oracle(hidden: Program) -> Backend {
        Backend::oracle_with_fault(hidden, OracleFault::None)
    }

    pub fn oracle_with_fault(hidden: Program, fault: OracleFault) -> Backend {
        Backend::Oracle { hidden, fault, state: Mutex::new(OracleState { responses_served: 0 }) }
    }

    /// A backend that never contributes anything usable.
    pub fn null() -> Backend {
        Backend::oracle(Program::empty())
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Backend::RemoteHttp(_) => "http",
            Backend::ScriptedMock { .. } => "scripted",
            Backend::Replay { .. } => "replay",
            Backend::Oracle { .. } => "oracle",
        }
    }

    /// Append the user turn, obtain a response, append the assistant turn.
    pub fn respond(&self, transcript: &mut Transcript, prompt: &str) -> Result<String, LlmError> {
        let response = match self {
            Backend::ScriptedMock { responses, state } => {
                let mut cursor = state.lock().expect("scripted state");
                if *cursor >= responses.len() {
                    return Err(LlmError::ScriptExhausted { served: *cursor });
                }
                let response = responses[*cursor].clone();
                *cursor += 1;
                response
            }
            Backend::Replay { exchanges, state } => {
                let mut cursor = state.lock().expect("replay state");
                let idx = *cursor;
                match exchanges.get(idx) {
                    None => return Err(LlmError::ReplayDivergence { turn: idx }),
                    Some((recorded_prompt, recorded_response)) => {
                        if recorded_prompt != prompt {
                            return Err(LlmError::ReplayDivergence { turn: idx });
                        }
                        *cursor += 1;
                        recorded_response.clone()
                    }
                }
            }
            Backend::Oracle { hidden, fault, state } => {
                let mut st = state.lock().expect("oracle state");
                let first = st.responses_served == 0;
                st.responses_served += 1;
                oracle_response(hidden, *fault, first)
            }
            Backend::RemoteHttp(config) => http_respond(config, transcript, prompt)?,
        };
        transcript.push_user(prompt);
        transcript.push_assistant(&response);
        Ok(response)
    }
}

fn oracle_response(hidden: &Program, fault: OracleFault, first: bool) -> String {
    if hidden.is_empty() {
        return "% nothing to add.".to_string();
    }
    let correct = hidden.iter().map(|r| r.source_text().to_string()).collect::<Vec<_>>().join("\n");
    if !first {
        return correct;
    }
    match fault {
        OracleFault::None => correct,
        // `#fault ...` survives rule extraction as a passthrough statement but
        // no solver accepts it, forcing the syntax-mend path.
        OracleFault::SyntaxThenCorrect => format!("#fault {correct}"),
        OracleFault::WrongAnswerThenCorrect => "ans(faulty) :- end(T).".to_string(),
    }
}

fn http_respond(
    config: &HttpConfig,
    transcript: &Transcript,
    prompt: &str,
) -> Result<String, LlmError> {
    let key = std::env::var(&config.credential_env)
        .map_err(|_| LlmError::MissingCredential { env: config.credential_env.clone() })?;
    let mut messages: Vec<serde_json::Value> = transcript
        .turns()
        .iter()
        .map(|t| {
            serde_json::json!({
                "role": match t.role {
                    Role::System => "system",
                    Role::User => "user",
                    Role::Assistant => "assistant",
                },
                "content": t.content,
            })
        })
        .collect();
    messages.push(serde_json::json!({"role": "user", "content": prompt}));
    let body = serde_json::json!({
        "model": config.model,
        "messages": messages,
        "temperature": config.temperature,
    });

    let mut backoff = config.backoff_ms;
    let attempts = config.max_retries.max(1);
    let mut last_err = String::new();
    for attempt in 0..attempts {
        if attempt > 0 {
            std::thread::sleep(std::time::Duration::from_millis(backoff));
            backoff = backoff.saturating_mul(2);
        }
        match ureq::post(&config.endpoint)
            .set("Authorization", &format!("Bearer {key}"))
            .set("Content-Type", "application/json")
            .send_json(body.clone())
        {
            Ok(resp) => {
                let v: serde_json::Value = resp
                    .into_json()
                    .map_err(|e| LlmError::BadResponse { detail: e.to_string() })?;
                let content = v["choices"][0]["message"]["content"].as_str().ok_or_else(|| {
                    LlmError::BadResponse { detail: "missing choices[0].message.content".into() }
                })?;
                return Ok(content.to_string());
            }
            Err(ureq::Error::Status(status, resp)) => {
                let detail = resp.into_string().unwrap_or_default();
                // Retry rate limits and server-side failures only.
                if status == 429 || status >= 500 {
                    last_err = format!("HTTP {status}: {detail}");
                    continue;
                }
                return Err(LlmError::BadResponse { detail: format!("HTTP {status}: {detail}") });
            }
            Err(ureq::Error::Transport(t)) => {
                last_err = t.to_string();
            }
        }
    }
    Err(LlmError::Transport { detail: last_err, attempts })
}

/// Extract candidate ASP statements from a free-form response.
///
/// Code fences are stripped; each remaining line is salvaged statement-wise:
/// lines that do not tokenize as period-terminated statements are dropped.
/// With `no_facts_guard`, facts are dropped too. The surviving statements
/// are returned in order, in normalized text form.
pub fn extract_rules(response: &str, no_facts_guard: bool) -> Vec<String> {
    let mut out = Vec::new();
    for line in response.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with("```") {
            continue;
        }
        let Ok(program) = parse_program(line) else { continue };
        for rule in program.iter() {
            if no_facts_guard && rule.kind() == RuleKind::Fact {
                continue;
            }
            out.push(rule.source_text().to_string());
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scripted_backend_pops_in_order() {
        let backend = Backend::scripted(vec!["a :- b.".into(), "c :- d.".into()]);
        let mut t = Transcript::new("s", "pre");
        assert_eq!(backend.respond(&mut t, "one").unwrap(), "a :- b.");
        assert_eq!(backend.respond(&mut t, "two").unwrap(), "c :- d.");
        assert!(matches!(
            backend.respond(&mut t, "three"),
            Err(LlmError::ScriptExhausted { served: 2 })
        ));
        assert_eq!(t.turns().len(), 5, "failed call must not append turns");
    }

    #[test]
    fn transcript_roles_alternate() {
        let backend = Backend::scripted(vec!["x.".into()]);
        let mut t = Transcript::new("s", "pre");
        backend.respond(&mut t, "q").unwrap();
        let roles: Vec<Role> = t.turns().iter().map(|x| x.role).collect();
        assert_eq!(roles, vec![Role::System, Role::User, Role::Assistant]);
    }

    #[test]
    fn replay_reproduces_and_detects_divergence() {
        let recorded = Backend::scripted(vec!["r1.".into(), "r2.".into()]);
        let mut original = Transcript::new("s", "pre");
        recorded.respond(&mut original, "p1").unwrap();
        recorded.respond(&mut original, "p2").unwrap();

        let replay = Backend::replay_of(&original);
        let mut t = Transcript::new("s2", "pre");
        assert_eq!(replay.respond(&mut t, "p1").unwrap(), "r1.");
        assert_eq!(replay.respond(&mut t, "p2").unwrap(), "r2.");

        let replay = Backend::replay_of(&original);
        let mut t = Transcript::new("s3", "pre");
        replay.respond(&mut t, "p1").unwrap();
        assert!(matches!(
            replay.respond(&mut t, "different"),
            Err(LlmError::ReplayDivergence { turn: 1 })
        ));
    }

    #[test]
    fn oracle_returns_hidden_rules_verbatim() {
        let hidden = parse_program("val(T,yes) :- exist(T,I), holds(I,O).").unwrap();
        let backend = Backend::oracle(hidden.clone());
        let mut t = Transcript::new("s", "pre");
        let response = backend.respond(&mut t, "anything").unwrap();
        assert_eq!(extract_rules(&response, true), vec!["val(T,yes) :- exist(T,I), holds(I,O)."]);
    }

    #[test]
    fn faulty_oracle_corrupts_only_first_response() {
        let hidden = parse_program("a :- b.").unwrap();
        let backend = Backend::oracle_with_fault(hidden, OracleFault::SyntaxThenCorrect);
        let mut t = Transcript::new("s", "pre");
        let first = backend.respond(&mut t, "p").unwrap();
        assert!(first.starts_with("#fault"));
        // The corruption must survive extraction so a solver can reject it.
        assert_eq!(extract_rules(&first, true).len(), 1);
        let second = backend.respond(&mut t, "mend").unwrap();
        assert_eq!(second, "a :- b.");
    }

    #[test]
    fn null_backend_yields_no_rules() {
        let backend = Backend::null();
        let mut t = Transcript::new("s", "pre");
        let response = backend.respond(&mut t, "p").unwrap();
        assert!(extract_rules(&response, true).is_empty());
    }

    #[test]
    fn extract_strips_fences_and_prose() {
        let response = "Here are the rules:\n```prolog\nans(V) :- end(T), holds(T,V).\n```\nThat should work!";
        assert_eq!(extract_rules(response, true), vec!["ans(V) :- end(T), holds(T,V)."]);
    }

    #[test]
    fn extract_drops_facts_under_guard() {
        assert!(extract_rules("a(1).", true).is_empty());
        assert_eq!(extract_rules("a(1).", false), vec!["a(1)."]);
    }

    #[test]
    fn extract_is_idempotent() {
        let response = "noise\na :- b.\n```\nc :- d, not e.\n```\nq(1).";
        let once = extract_rules(response, true);
        let twice = extract_rules(&once.join("\n"), true);
        assert_eq!(once, twice);
    }

    #[test]
    fn extracted_statements_parse() {
        let response = "a :- b.\ngarbage here\n:- c, d.\n{ x } :- y.";
        for text in extract_rules(response, true) {
            assert!(parse_program(&text).is_ok(), "extracted statement must parse: {text}");
        }
    }

    #[test]
    fn transcript_jsonl_round_trip() {
        let backend = Backend::scripted(vec!["r.".into()]);
        let mut t = Transcript::new("sess", "preprompt text");
        backend.respond(&mut t, "prompt").unwrap();
        let back = Transcript::from_jsonl("sess", &t.to_jsonl()).unwrap();
        assert_eq!(back, t);
    }
}
