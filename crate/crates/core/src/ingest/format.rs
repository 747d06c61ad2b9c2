//! Line-delimited JSON account format.
//!
//! One account per line. Required keys: `id`, `screen_name`, `created_at`
//! (RFC 3339), `friends_count`, `followers_count`, `statuses_count`,
//! `listed_count`, `default_profile_image`, `label` (`"bot"` or `"human"`),
//! `timeline`. Optional: `name`, `location`, `description`, `url`, `cap_uni`.
//! Tweets carry `id`, `created_at`, `hashtag_count`, `url_count`,
//! `mention_count`, `is_retweet`, `source`. Unknown keys are ignored.

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use chrono::{DateTime, SecondsFormat, Utc};
use serde::{Deserialize, Serialize};

use super::record::{AccountRecord, LabeledDataset, TweetRecord};
use super::{IngestError, LineError};

#[derive(Debug, Serialize, Deserialize)]
struct WireTweet {
    id: u64,
    created_at: String,
    hashtag_count: u32,
    url_count: u32,
    mention_count: u32,
    is_retweet: bool,
    source: String,
}

#[derive(Debug, Serialize, Deserialize)]
struct WireAccount {
    id: u64,
    screen_name: String,
    created_at: String,
    friends_count: u64,
    followers_count: u64,
    statuses_count: u64,
    listed_count: u64,
    default_profile_image: bool,
    label: String,
    timeline: Vec<WireTweet>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    location: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    description: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    url: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    cap_uni: Option<f64>,
}

/// Result of a lenient parse: the accounts that parsed plus per-line diagnostics.
#[derive(Debug, Clone, Default)]
pub struct ParseOutcome {
    pub dataset: LabeledDataset,
    pub errors: Vec<LineError>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ParseMode {
    /// Collect malformed lines and keep going.
    #[default]
    Lenient,
    /// Abort on the first malformed line.
    Strict,
}

fn parse_time(s: &str) -> Result<DateTime<Utc>, String> {
    DateTime::parse_from_rfc3339(s)
        .map(|t| t.with_timezone(&Utc))
        .map_err(|e| format!("invalid timestamp `{s}`: {e}"))
}

fn format_time(t: &DateTime<Utc>) -> String {
    t.to_rfc3339_opts(SecondsFormat::Secs, true)
}

fn decode(wire: WireAccount) -> Result<AccountRecord, String> {
    let label = wire.label.parse()?;
    if let Some(cap) = wire.cap_uni {
        if !(0.0..=1.0).contains(&cap) {
            return Err(format!("cap_uni {cap} outside [0,1]"));
        }
    }
    let timeline = wire
        .timeline
        .into_iter()
        .map(|t| {
            Ok(TweetRecord::new(
                t.id,
                parse_time(&t.created_at)?,
                t.hashtag_count,
                t.url_count,
                t.mention_count,
                t.is_retweet,
                t.source,
            ))
        })
        .collect::<Result<Vec<_>, String>>()?;
    let mut account = AccountRecord {
        id: wire.id,
        screen_name: wire.screen_name,
        created_at: parse_time(&wire.created_at)?,
        friends_count: wire.friends_count,
        followers_count: wire.followers_count,
        statuses_count: wire.statuses_count,
        listed_count: wire.listed_count,
        name: wire.name,
        location: wire.location,
        description: wire.description,
        url: wire.url,
        has_default_profile_image: wire.default_profile_image,
        timeline,
        botometer_cap_uni: wire.cap_uni,
        label,
    };
    account.sort_timeline();
    Ok(account)
}

fn encode(account: &AccountRecord) -> WireAccount {
    WireAccount {
        id: account.id,
        screen_name: account.screen_name.clone(),
        created_at: format_time(&account.created_at),
        friends_count: account.friends_count,
        followers_count: account.followers_count,
        statuses_count: account.statuses_count,
        listed_count: account.listed_count,
        default_profile_image: account.has_default_profile_image,
        label: account.label.to_string(),
        timeline: account
            .timeline
            .iter()
            .map(|t| WireTweet {
                id: t.id,
                created_at: format_time(&t.created_at),
                hashtag_count: t.hashtag_count,
                url_count: t.url_count,
                mention_count: t.mention_count,
                is_retweet: t.is_retweet,
                source: t.source_raw.clone(),
            })
            .collect(),
        name: account.name.clone(),
        location: account.location.clone(),
        description: account.description.clone(),
        url: account.url.clone(),
        cap_uni: account.botometer_cap_uni,
    }
}

/// Parses accounts from any line source. Line numbers in diagnostics are 1-based.
pub fn parse_accounts<R: BufRead>(name: &str, reader: R, mode: ParseMode) -> Result<ParseOutcome, IngestError> {
    let mut accounts = Vec::new();
    let mut errors = Vec::new();
    let mut seen = HashSet::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let parsed = serde_json::from_str::<WireAccount>(&line)
            .map_err(|e| e.to_string())
            .and_then(decode);
        match parsed {
            Ok(account) => {
                if !seen.insert(account.id) {
                    return Err(IngestError::DuplicateAccount {
                        id: account.id,
                        line: line_no,
                    });
                }
                accounts.push(account);
            }
            Err(message) => {
                let err = LineError { line: line_no, message };
                if mode == ParseMode::Strict {
                    return Err(IngestError::Line(err));
                }
                errors.push(err);
            }
        }
    }
    Ok(ParseOutcome {
        dataset: LabeledDataset::new(name, accounts),
        errors,
    })
}

/// Reads an account file. The dataset is named after the file stem.
pub fn parse_account_file(path: &Path, mode: ParseMode) -> Result<ParseOutcome, IngestError> {
    let file = File::open(path).map_err(|source| IngestError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    parse_accounts(&name, BufReader::new(file), mode)
}

pub fn write_accounts<W: Write>(dataset: &LabeledDataset, mut writer: W) -> std::io::Result<()> {
    for account in dataset.accounts() {
        serde_json::to_writer(&mut writer, &encode(account))?;
        writer.write_all(b"\n")?;
    }
    writer.flush()
}

pub fn write_account_file(dataset: &LabeledDataset, path: &Path) -> Result<(), IngestError> {
    let io_err = |source| IngestError::Io {
        path: path.display().to_string(),
        source,
    };
    let file = File::create(path).map_err(io_err)?;
    write_accounts(dataset, BufWriter::new(file)).map_err(io_err)
}

#[cfg(test)]
mod tests {
    use super::*;

    const BOT: &str = r#"{"id":1,"screen_name":"a","created_at":"2019-01-01T00:00:00Z","friends_count":10,"followers_count":2,"statuses_count":5,"listed_count":0,"default_profile_image":true,"label":"bot","timeline":[{"id":10,"created_at":"2020-01-01T00:00:00Z","hashtag_count":1,"url_count":0,"mention_count":0,"is_retweet":false,"source":"dlvr.it"},{"id":11,"created_at":"2020-01-02T00:00:00Z","hashtag_count":0,"url_count":0,"mention_count":0,"is_retweet":true,"source":"<a href=\"x\">Twitter Web App</a>"}],"cap_uni":0.4,"extra":"ignored"}"#;

    fn human(id: u64) -> String {
        format!(
            r#"{{"id":{id},"screen_name":"h","created_at":"2015-06-01T12:00:00+02:00","friends_count":1,"followers_count":1,"statuses_count":1,"listed_count":3,"default_profile_image":false,"label":"human","timeline":[]}}"#
        )
    }

    #[test]
    fn tallies_labels() {
        let text = format!("{BOT}\n{}\n{}\n", human(2), human(3));
        let out = parse_accounts("t", text.as_bytes(), ParseMode::Strict).unwrap();
        assert_eq!(out.dataset.bot_count(), 1);
        assert_eq!(out.dataset.human_count(), 2);
        assert!(out.errors.is_empty());
    }

    #[test]
    fn empty_input_is_empty_dataset() {
        let out = parse_accounts("t", "".as_bytes(), ParseMode::Strict).unwrap();
        assert!(out.dataset.is_empty());
    }

    #[test]
    fn timeline_is_resorted_and_sources_extracted() {
        let out = parse_accounts("t", BOT.as_bytes(), ParseMode::Strict).unwrap();
        let acct = &out.dataset.accounts()[0];
        assert_eq!(acct.timeline[0].id, 11);
        assert_eq!(acct.timeline[0].source_client, "Twitter Web App");
        assert_eq!(acct.timeline[1].source_client, "dlvr.it");
        assert_eq!(acct.botometer_cap_uni, Some(0.4));
    }

    #[test]
    fn missing_label_fails_strict_with_line_number() {
        let line = human(5).replace(r#""label":"human","#, "");
        let err = parse_accounts("t", line.as_bytes(), ParseMode::Strict).unwrap_err();
        match err {
            IngestError::Line(e) => {
                assert_eq!(e.line, 1);
                assert!(e.message.contains("label"), "{}", e.message);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn lenient_mode_collects_errors() {
        let text = format!("{}\nnot json\n{}\n", human(1), human(2));
        let out = parse_accounts("t", text.as_bytes(), ParseMode::Lenient).unwrap();
        assert_eq!(out.dataset.len(), 2);
        assert_eq!(out.errors.len(), 1);
        assert_eq!(out.errors[0].line, 2);
    }

    #[test]
    fn duplicate_ids_rejected() {
        let text = format!("{}\n{}\n", human(1), human(1));
        let err = parse_accounts("t", text.as_bytes(), ParseMode::Lenient).unwrap_err();
        assert!(matches!(err, IngestError::DuplicateAccount { id: 1, line: 2 }));
    }

    #[test]
    fn cap_out_of_range_is_a_line_error() {
        let line = BOT.replace("0.4", "1.5");
        let out = parse_accounts("t", line.as_bytes(), ParseMode::Lenient).unwrap();
        assert_eq!(out.errors.len(), 1);
    }

    #[test]
    fn write_then_parse_is_identity() {
        let text = format!("{BOT}\n{}\n", human(2));
        let first = parse_accounts("t", text.as_bytes(), ParseMode::Strict).unwrap();
        let mut buf = Vec::new();
        write_accounts(&first.dataset, &mut buf).unwrap();
        let second = parse_accounts("t", buf.as_slice(), ParseMode::Strict).unwrap();
        assert_eq!(first.dataset, second.dataset);
    }
}
