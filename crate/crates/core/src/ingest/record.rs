use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

/// Ground-truth class of an account. `Bot` is the positive class everywhere.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Bot,
    Human,
}

impl Label {
    pub fn is_bot(self) -> bool {
        matches!(self, Label::Bot)
    }

    pub fn from_bool(is_bot: bool) -> Self {
        if is_bot {
            Label::Bot
        } else {
            Label::Human
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Label::Bot => "bot",
            Label::Human => "human",
        })
    }
}

impl FromStr for Label {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "bot" => Ok(Label::Bot),
            "human" => Ok(Label::Human),
            other => Err(format!("unknown label `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TweetRecord {
    pub id: u64,
    pub created_at: DateTime<Utc>,
    pub hashtag_count: u32,
    pub url_count: u32,
    pub mention_count: u32,
    pub is_retweet: bool,
    pub source_raw: String,
    /// Display name of the posting client, extracted from `source_raw`.
    pub source_client: String,
}

impl TweetRecord {
    /// Builds a tweet, deriving `source_client` from the raw source field.
    pub fn new(
        id: u64,
        created_at: DateTime<Utc>,
        hashtag_count: u32,
        url_count: u32,
        mention_count: u32,
        is_retweet: bool,
        source_raw: impl Into<String>,
    ) -> Self {
        let source_raw = source_raw.into();
        let source_client = super::parse_source_client(&source_raw);
        TweetRecord {
            id,
            created_at,
            hashtag_count,
            url_count,
            mention_count,
            is_retweet,
            source_raw,
            source_client,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AccountRecord {
    pub id: u64,
    pub screen_name: String,
    pub created_at: DateTime<Utc>,
    pub friends_count: u64,
    pub followers_count: u64,
    pub statuses_count: u64,
    pub listed_count: u64,
    pub name: Option<String>,
    pub location: Option<String>,
    pub description: Option<String>,
    pub url: Option<String>,
    pub has_default_profile_image: bool,
    /// Most recent first.
    pub timeline: Vec<TweetRecord>,
    pub botometer_cap_uni: Option<f64>,
    pub label: Label,
}

impl AccountRecord {
    /// Restores the timeline ordering: newest first, equal timestamps by id descending.
    pub fn sort_timeline(&mut self) {
        sort_tweets(&mut self.timeline);
    }

    pub fn timeline_is_ordered(&self) -> bool {
        self.timeline
            .windows(2)
            .all(|w| (w[0].created_at, w[0].id) >= (w[1].created_at, w[1].id))
    }
}

pub(crate) fn sort_tweets(tweets: &mut [TweetRecord]) {
    tweets.sort_by_key(|t| std::cmp::Reverse((t.created_at, t.id)));
}

/// A named collection of labeled accounts. Counts are kept in sync with labels.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LabeledDataset {
    pub name: String,
    accounts: Vec<AccountRecord>,
    bot_count: usize,
    human_count: usize,
}

impl LabeledDataset {
    pub fn new(name: impl Into<String>, accounts: Vec<AccountRecord>) -> Self {
        let bot_count = accounts.iter().filter(|a| a.label.is_bot()).count();
        let human_count = accounts.len() - bot_count;
        LabeledDataset {
            name: name.into(),
            accounts,
            bot_count,
            human_count,
        }
    }

    pub fn accounts(&self) -> &[AccountRecord] {
        &self.accounts
    }

    pub fn into_accounts(self) -> Vec<AccountRecord> {
        self.accounts
    }

    pub fn bot_count(&self) -> usize {
        self.bot_count
    }

    pub fn human_count(&self) -> usize {
        self.human_count
    }

    pub fn len(&self) -> usize {
        self.accounts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.accounts.is_empty()
    }

    pub fn labels(&self) -> Vec<Label> {
        self.accounts.iter().map(|a| a.label).collect()
    }

    /// Fraction of bots, the domain prior used by the CAP correction.
    pub fn bot_prevalence(&self) -> Option<f64> {
        if self.is_empty() {
            None
        } else {
            Some(self.bot_count as f64 / self.len() as f64)
        }
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }
}
