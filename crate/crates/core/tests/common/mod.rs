#![allow(dead_code)]

use std::path::{Path, PathBuf};

use botlens::ingest::write_account_file;
use botlens::{AccountRecord, Label, LabeledDataset, TweetRecord};
use chrono::{DateTime, TimeZone, Utc};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn t(secs: i64) -> DateTime<Utc> {
    Utc.timestamp_opt(1_600_000_000 + secs, 0).unwrap()
}

/// A bare account: no profile fields, no timeline, CAP 0.5.
pub fn blank(id: u64, label: Label) -> AccountRecord {
    AccountRecord {
        id,
        screen_name: format!("user{id}"),
        created_at: t(0),
        friends_count: 0,
        followers_count: 0,
        statuses_count: 0,
        listed_count: 0,
        name: None,
        location: None,
        description: None,
        url: None,
        has_default_profile_image: false,
        timeline: Vec::new(),
        botometer_cap_uni: Some(0.5),
        label,
    }
}

/// Knobs of the synthetic population.
#[derive(Debug, Clone)]
pub struct Population {
    pub bots: usize,
    pub humans: usize,
    pub min_len: usize,
    pub max_len: usize,
    /// Fraction of accounts whose behaviour is drawn from the other class.
    pub overlap: f64,
    pub seed: u64,
}

impl Default for Population {
    fn default() -> Self {
        Population {
            bots: 60,
            humans: 60,
            min_len: 20,
            max_len: 40,
            overlap: 0.1,
            seed: 7,
        }
    }
}

/// Tweet `j` of an account with per-decile levels: the behaviour repeats
/// every 10 tweets, so every rate is exact for windows that are multiples of 10.
fn timeline(id: u64, len: usize, levels: [u32; 5]) -> Vec<TweetRecord> {
    let [hashtag, url, mention, retweet, unofficial] = levels;
    (0..len)
        .map(|j| {
            let d = (j % 10) as u32;
            let source = if d < unofficial {
                "<a href=\"https://example.org\">autoposter</a>"
            } else {
                "<a href=\"https://mobile.twitter.com\">Twitter for Android</a>"
            };
            TweetRecord::new(
                id * 10_000 + j as u64,
                t(1_000_000 - 60 * j as i64),
                u32::from(d < hashtag),
                u32::from(d < url),
                u32::from(d < mention),
                d < retweet,
                source,
            )
        })
        .collect()
}

fn make_account(rng: &mut ChaCha8Rng, id: u64, label: Label, behaves_as_bot: bool, len: usize) -> AccountRecord {
    let lvl = |rng: &mut ChaCha8Rng, bot: bool| {
        if bot {
            rng.gen_range(5..=8)
        } else {
            rng.gen_range(1..=4)
        }
    };
    let levels = [
        lvl(rng, behaves_as_bot),
        lvl(rng, behaves_as_bot),
        lvl(rng, !behaves_as_bot),
        lvl(rng, behaves_as_bot),
        lvl(rng, behaves_as_bot),
    ];
    let cap = if behaves_as_bot {
        rng.gen_range(0.35..1.0)
    } else {
        rng.gen_range(0.0..0.45)
    };
    let followers: u64 = if behaves_as_bot {
        rng.gen_range(0..200)
    } else {
        rng.gen_range(50..5000)
    };
    let mut a = blank(id, label);
    a.created_at = t(-rng.gen_range(86_400..86_400 * 2000));
    a.friends_count = rng.gen_range(0..3000);
    a.followers_count = followers;
    a.statuses_count = len as u64 + rng.gen_range(0..10_000);
    a.listed_count = if behaves_as_bot { 0 } else { rng.gen_range(0..20) };
    a.name = Some(format!("Name {id}"));
    a.description = (!behaves_as_bot || rng.gen_bool(0.3)).then(|| "about me".to_string());
    a.location = rng.gen_bool(0.5).then(|| "somewhere".to_string());
    a.has_default_profile_image = behaves_as_bot && rng.gen_bool(0.5);
    a.timeline = timeline(id, len, levels);
    a.botometer_cap_uni = Some(cap);
    a
}

/// Bot and human sources with class-dependent, window-invariant behaviour.
pub fn population(p: &Population) -> (LabeledDataset, LabeledDataset) {
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let mut side = |label: Label, n: usize, first_id: u64| {
        let accounts = (0..n)
            .map(|i| {
                let len = rng.gen_range(p.min_len..=p.max_len);
                let flipped = rng.gen_bool(p.overlap);
                make_account(&mut rng, first_id + i as u64, label, label.is_bot() != flipped, len)
            })
            .collect();
        LabeledDataset::new(if label.is_bot() { "bots" } else { "humans" }, accounts)
    };
    let bots = side(Label::Bot, p.bots, 1);
    let humans = side(Label::Human, p.humans, 100_000);
    (bots, humans)
}

/// Writes both sources and a config naming them into `dir`; returns the config path.
pub fn write_experiment(
    dir: &Path,
    name: &str,
    bots: &LabeledDataset,
    humans: &LabeledDataset,
    extra: &str,
) -> PathBuf {
    write_account_file(bots, &dir.join("bots.jsonl")).unwrap();
    write_account_file(humans, &dir.join("humans.jsonl")).unwrap();
    let extra = if extra.is_empty() {
        String::new()
    } else {
        format!(", {extra}")
    };
    let config = format!(
        r#"{{"training_sets": [{{"name": "{name}", "bots": "bots.jsonl", "humans": "humans.jsonl"}}]{extra}}}"#
    );
    let path = dir.join("config.json");
    std::fs::write(&path, config).unwrap();
    path
}
