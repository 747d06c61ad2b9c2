use crate::ingest::{AccountRecord, TweetRecord};

use super::{ClientRegistry, FeatureError};

pub const CLASS_B_NAMES: [&str; 4] = ["hashtag_rate", "url_rate", "mention_rate", "retweet_rate"];

pub const CLIENT_NAME: &str = "unofficial_client_rate";

fn window(account: &AccountRecord, window: usize) -> Result<&[TweetRecord], FeatureError> {
    if account.timeline.is_empty() {
        return Err(FeatureError::EmptyTimeline(account.id));
    }
    if window == 0 {
        return Err(FeatureError::ZeroWindow);
    }
    let n = window.min(account.timeline.len());
    Ok(&account.timeline[..n])
}

fn rate(tweets: &[TweetRecord], pred: impl Fn(&TweetRecord) -> bool) -> f64 {
    tweets.iter().filter(|t| pred(t)).count() as f64 / tweets.len() as f64
}

/// Rates of tweets with a hashtag, a URL, a mention, and of retweets over the
/// `window` most recent tweets.
pub fn extract_class_b(account: &AccountRecord, window_len: usize) -> Result<Vec<f64>, FeatureError> {
    let tweets = window(account, window_len)?;
    Ok(vec![
        rate(tweets, |t| t.hashtag_count > 0),
        rate(tweets, |t| t.url_count > 0),
        rate(tweets, |t| t.mention_count > 0),
        rate(tweets, |t| t.is_retweet),
    ])
}

/// Fraction of the windowed tweets posted from a client outside `registry`.
/// Tweets without a source count as unofficial.
pub fn extract_client_proportion(
    account: &AccountRecord,
    registry: &ClientRegistry,
    window_len: usize,
) -> Result<f64, FeatureError> {
    let tweets = window(account, window_len)?;
    Ok(rate(tweets, |t| !registry.is_official(&t.source_client)))
}
