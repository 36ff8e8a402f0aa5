//! Turing machines over tape alphabet {0,1} with named states, a start
//! state, and distinguished halting states whose transitions self-loop.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Head movement directive.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Move {
    Left,
    Right,
    Stay,
}

impl Move {
    pub fn as_str(self) -> &'static str {
        match self {
            Move::Left => "L",
            Move::Right => "R",
            Move::Stay => "S",
        }
    }
}

#[derive(Debug, Error)]
pub enum TmError {
    #[error("transition for ({state}, {read}) is missing: δ must be total")]
    MissingTransition { state: String, read: u8 },
    #[error("duplicate transition for ({state}, {read})")]
    DuplicateTransition { state: String, read: u8 },
    #[error("state {0} referenced but not declared")]
    UnknownState(String),
    #[error("halting state {state} must self-loop with Stay (δ(q,b) = (q,b,S))")]
    HaltingStateEvolves { state: String },
    #[error("accept and reject states must differ")]
    AcceptEqualsReject,
    #[error("tape symbol {0} is not 0/1")]
    BadSymbol(String),
    #[error("move directive {0} is not L/R/S")]
    BadMove(String),
    #[error("malformed machine file: {0}")]
    Parse(#[from] serde_json::Error),
}

/// A deterministic Turing machine (Q, {0,1}, q0, accept, reject, δ).
#[derive(Clone, Debug)]
pub struct TuringMachine {
    pub states: Vec<String>,
    pub start: String,
    pub accept: String,
    pub reject: String,
    delta: HashMap<(String, u8), (String, u8, Move)>,
}

impl TuringMachine {
    /// Build and validate a machine. `delta` entries are
    /// `(state, read, state', write, move)`.
    pub fn new(
        states: Vec<String>,
        start: String,
        accept: String,
        reject: String,
        delta: Vec<(String, u8, String, u8, Move)>,
    ) -> Result<Self, TmError> {
        if accept == reject {
            return Err(TmError::AcceptEqualsReject);
        }
        for s in [&start, &accept, &reject] {
            if !states.contains(s) {
                return Err(TmError::UnknownState(s.clone()));
            }
        }
        let mut table = HashMap::new();
        for (q, b, q2, b2, m) in delta {
            if !states.contains(&q) {
                return Err(TmError::UnknownState(q));
            }
            if !states.contains(&q2) {
                return Err(TmError::UnknownState(q2));
            }
            if table.insert((q.clone(), b), (q2, b2, m)).is_some() {
                return Err(TmError::DuplicateTransition { state: q, read: b });
            }
        }
        // Halting self-loops may be declared or implied; fill them in, and
        // reject declarations that evolve.
        for q in [&accept, &reject] {
            for b in [0u8, 1] {
                match table.get(&(q.clone(), b)) {
                    None => {
                        table.insert((q.clone(), b), (q.clone(), b, Move::Stay));
                    }
                    Some((q2, b2, m)) => {
                        if q2 != q || *b2 != b || *m != Move::Stay {
                            return Err(TmError::HaltingStateEvolves { state: q.clone() });
                        }
                    }
                }
            }
        }
        for q in &states {
            for b in [0u8, 1] {
                if !table.contains_key(&(q.clone(), b)) {
                    return Err(TmError::MissingTransition { state: q.clone(), read: b });
                }
            }
        }
        Ok(TuringMachine { states, start, accept, reject, delta: table })
    }

    pub fn is_halting(&self, q: &str) -> bool {
        q == self.accept || q == self.reject
    }

    pub fn transition(&self, q: &str, b: u8) -> &(String, u8, Move) {
        self.delta
            .get(&(q.to_string(), b))
            .expect("δ is total by construction")
    }
}

/// One machine configuration: a finite tape window, head index, state.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TmConfiguration {
    pub tape: Vec<u8>,
    pub head: usize,
    pub state: String,
}

impl TmConfiguration {
    pub fn start(tm: &TuringMachine, input: &[u8]) -> Self {
        let tape = if input.is_empty() { vec![0] } else { input.to_vec() };
        TmConfiguration { tape, head: 0, state: tm.start.clone() }
    }

    pub fn is_halting(&self, tm: &TuringMachine) -> bool {
        tm.is_halting(&self.state)
    }
}

/// Apply one step of δ. Moving right past the tape end extends the tape
/// with 0 (the growing grid adds cells eastward); moving left at cell 0
/// keeps the head in place (the grid has no west extension).
pub fn tm_step(tm: &TuringMachine, c: &TmConfiguration) -> TmConfiguration {
    let read = c.tape[c.head];
    let (q2, write, mv) = tm.transition(&c.state, read).clone();
    let mut tape = c.tape.clone();
    tape[c.head] = write;
    let head = match mv {
        Move::Stay => c.head,
        Move::Left => c.head.saturating_sub(1),
        Move::Right => {
            if c.head + 1 == tape.len() {
                tape.push(0);
            }
            c.head + 1
        }
    };
    TmConfiguration { tape, head, state: q2 }
}

/// First `steps + 1` configurations starting from `input` (index i holds
/// the configuration after i steps; halting configurations repeat).
pub fn tm_trace(tm: &TuringMachine, input: &[u8], steps: usize) -> Vec<TmConfiguration> {
    let mut out = Vec::with_capacity(steps + 1);
    out.push(TmConfiguration::start(tm, input));
    for _ in 0..steps {
        let next = tm_step(tm, out.last().unwrap());
        out.push(next);
    }
    out
}

// ---------------------------------------------------------------------------
// Machine description file
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TmFile {
    states: Vec<String>,
    start: String,
    accept: String,
    reject: String,
    /// Entries `[state, read, state', write, move]` with read/write in
    /// {"0","1"} and move in {"L","R","S"}.
    delta: Vec<[String; 5]>,
}

fn parse_symbol(s: &str) -> Result<u8, TmError> {
    match s {
        "0" => Ok(0),
        "1" => Ok(1),
        other => Err(TmError::BadSymbol(other.to_string())),
    }
}

fn parse_move(s: &str) -> Result<Move, TmError> {
    match s {
        "L" => Ok(Move::Left),
        "R" => Ok(Move::Right),
        "S" => Ok(Move::Stay),
        other => Err(TmError::BadMove(other.to_string())),
    }
}

/// Parse a machine description document.
pub fn tm_from_json(text: &str) -> Result<TuringMachine, TmError> {
    let doc: TmFile = serde_json::from_str(text)?;
    let mut delta = Vec::with_capacity(doc.delta.len());
    for [q, read, q2, write, mv] in doc.delta {
        delta.push((q, parse_symbol(&read)?, q2, parse_symbol(&write)?, parse_move(&mv)?));
    }
    TuringMachine::new(doc.states, doc.start, doc.accept, doc.reject, delta)
}

/// Serialize a machine description (states in declaration order, delta
/// sorted by (state, read), halting self-loops included).
pub fn tm_to_json(tm: &TuringMachine) -> String {
    let mut delta: Vec<[String; 5]> = tm
        .delta
        .iter()
        .map(|((q, b), (q2, b2, m))| {
            [q.clone(), b.to_string(), q2.clone(), b2.to_string(), m.as_str().to_string()]
        })
        .collect();
    delta.sort();
    let doc = TmFile {
        states: tm.states.clone(),
        start: tm.start.clone(),
        accept: tm.accept.clone(),
        reject: tm.reject.clone(),
        delta,
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("serializable");
    s.push('\n');
    s
}
