use chrono::{DateTime, Utc};

use crate::ingest::AccountRecord;

pub const CLASS_A_NAMES: [&str; 15] = [
    "friends_count",
    "followers_count",
    "tweets_count",
    "friends_per_followers_sq",
    "account_age_days",
    "following_rate",
    "has_name",
    "has_image",
    "has_address",
    "has_biography",
    "has_url",
    "belongs_to_list",
    "twice_followers_ge_friends",
    "friends_followers_ratio_near_100",
    "friends_followers_ratio_ge_50",
];

/// Indices of the 0/1 features in [`CLASS_A_NAMES`].
pub const CLASS_A_BOOLEAN: std::ops::RangeInclusive<usize> = 6..=14;

const SECONDS_PER_DAY: f64 = 86_400.0;

#[derive(Debug, Clone, PartialEq)]
pub struct ProfileParams {
    pub reference_time: DateTime<Utc>,
    /// Target of the "friends/followers is about N" flag.
    pub ratio_target: f64,
    /// Relative tolerance around `ratio_target`.
    pub ratio_tolerance: f64,
    pub ratio_floor: f64,
}

impl ProfileParams {
    pub fn at(reference_time: DateTime<Utc>) -> Self {
        ProfileParams {
            reference_time,
            ratio_target: 100.0,
            ratio_tolerance: 0.05,
            ratio_floor: 50.0,
        }
    }
}

fn present(field: &Option<String>) -> f64 {
    flag(field.as_deref().is_some_and(|s| !s.trim().is_empty()))
}

fn flag(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

/// Profile-only features, in [`CLASS_A_NAMES`] order.
///
/// A zero follower count is clamped to 1 in `friends/followers^2`; the ratio
/// flags are false when the ratio is undefined. Account age is at least one
/// second.
pub fn extract_class_a(account: &AccountRecord, params: &ProfileParams) -> Vec<f64> {
    let friends = account.friends_count as f64;
    let followers = account.followers_count as f64;
    let age_secs = (params.reference_time - account.created_at).num_seconds().max(1) as f64;
    let age_days = age_secs / SECONDS_PER_DAY;
    let ratio = (account.followers_count > 0).then(|| friends / followers);
    let lo = params.ratio_target * (1.0 - params.ratio_tolerance);
    let hi = params.ratio_target * (1.0 + params.ratio_tolerance);

    vec![
        friends,
        followers,
        account.statuses_count as f64,
        friends / followers.max(1.0).powi(2),
        age_days,
        friends / age_days,
        present(&account.name),
        flag(!account.has_default_profile_image),
        present(&account.location),
        present(&account.description),
        present(&account.url),
        flag(account.listed_count > 0),
        flag(2 * account.followers_count >= account.friends_count),
        flag(ratio.is_some_and(|r| (lo..=hi).contains(&r))),
        flag(ratio.is_some_and(|r| r >= params.ratio_floor)),
    ]
}
