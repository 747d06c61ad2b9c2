//! Account ingestion: file parsing, timeline fetching and training-set assembly.

mod fetch;
mod format;
mod record;

use std::fmt;
use std::sync::OnceLock;

use regex::Regex;
use thiserror::Error;

pub use fetch::{
    estimate_follower_calls, fetch_timeline, Clock, FetchConfig, FixtureTransport, ManualClock, Page, PageRequest,
    RateLimiter, RetryPolicy, SystemClock, TimelineTransport, TransportError,
};
pub use format::{parse_account_file, parse_accounts, write_account_file, write_accounts, ParseMode, ParseOutcome};
pub use record::{AccountRecord, Label, LabeledDataset, TweetRecord};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LineError {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for LineError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Read(#[from] std::io::Error),
    #[error("{0}")]
    Line(LineError),
    #[error("duplicate account id {id} at line {line}")]
    DuplicateAccount { id: u64, line: usize },
    #[error("{source_name}: account {id} is labeled {found}, expected only {expected}")]
    LabelPurity {
        source_name: String,
        id: u64,
        found: Label,
        expected: Label,
    },
    #[error("account {0} not found")]
    AccountNotFound(u64),
    #[error("authorization failed: {0}")]
    Unauthorized(String),
    #[error("retry budget exhausted after {attempts} attempts: {last}")]
    RetriesExhausted { attempts: u32, last: String },
    #[error("invalid request: {0}")]
    InvalidRequest(String),
}

fn anchor_pattern() -> &'static Regex {
    static PATTERN: OnceLock<Regex> = OnceLock::new();
    PATTERN.get_or_init(|| Regex::new(r"(?s)^\s*<a\b[^>]*>(.*?)</a>\s*$").unwrap())
}

/// Extracts the client display name from a tweet's `source` field.
///
/// `<a href="...">Twitter for iPhone</a>` yields `Twitter for iPhone`; anything
/// that is not a single anchor is returned trimmed.
pub fn parse_source_client(source_raw: &str) -> String {
    match anchor_pattern().captures(source_raw) {
        Some(caps) => caps[1].trim().to_string(),
        None => source_raw.trim().to_string(),
    }
}

/// Keeps accounts whose timeline holds at least `min_posts` tweets.
pub fn filter_min_posts(dataset: &LabeledDataset, min_posts: usize) -> LabeledDataset {
    let kept = dataset
        .accounts()
        .iter()
        .filter(|a| a.timeline.len() >= min_posts)
        .cloned()
        .collect();
    LabeledDataset::new(dataset.name.clone(), kept)
}

fn check_purity(source: &LabeledDataset, expected: Label) -> Result<(), IngestError> {
    match source.accounts().iter().find(|a| a.label != expected) {
        Some(bad) => Err(IngestError::LabelPurity {
            source_name: source.name.clone(),
            id: bad.id,
            found: bad.label,
            expected,
        }),
        None => Ok(()),
    }
}

/// Concatenates a bot source and a human source into one training set.
///
/// Bots come first, then humans, each in input order. Accounts with fewer
/// than `min_posts` tweets are dropped, and so are accounts without a CAP
/// score when `require_cap` is set.
pub fn assemble_training_set(
    name: &str,
    bot_source: &LabeledDataset,
    human_source: &LabeledDataset,
    require_cap: bool,
    min_posts: usize,
) -> Result<LabeledDataset, IngestError> {
    check_purity(bot_source, Label::Bot)?;
    check_purity(human_source, Label::Human)?;
    let accounts = bot_source
        .accounts()
        .iter()
        .chain(human_source.accounts())
        .filter(|a| a.timeline.len() >= min_posts)
        .filter(|a| !require_cap || a.botometer_cap_uni.is_some())
        .cloned()
        .collect();
    Ok(LabeledDataset::new(name, accounts))
}
