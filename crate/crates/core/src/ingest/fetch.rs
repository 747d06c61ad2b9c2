use std::collections::HashMap;
use std::path::Path;
use std::sync::atomic::{AtomicU32, AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use super::format::{parse_account_file, ParseMode};
use super::record::{sort_tweets, TweetRecord};
use super::IngestError;

/// Time source used by the rate limiter and retry backoff.
pub trait Clock: Send + Sync {
    /// Time elapsed since the clock's origin.
    fn now(&self) -> Duration;
    fn sleep(&self, dur: Duration);
}

#[derive(Debug)]
pub struct SystemClock {
    origin: Instant,
}

impl SystemClock {
    pub fn new() -> Self {
        SystemClock { origin: Instant::now() }
    }
}

impl Default for SystemClock {
    fn default() -> Self {
        Self::new()
    }
}

impl Clock for SystemClock {
    fn now(&self) -> Duration {
        self.origin.elapsed()
    }

    fn sleep(&self, dur: Duration) {
        std::thread::sleep(dur);
    }
}

/// Virtual clock for tests: sleeping advances time instantly.
#[derive(Debug, Default)]
pub struct ManualClock {
    now: Mutex<Duration>,
    slept: Mutex<Duration>,
}

impl ManualClock {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn advance(&self, dur: Duration) {
        *self.now.lock().unwrap() += dur;
    }

    /// Total time spent in `sleep`.
    pub fn total_slept(&self) -> Duration {
        *self.slept.lock().unwrap()
    }
}

impl Clock for ManualClock {
    fn now(&self) -> Duration {
        *self.now.lock().unwrap()
    }

    fn sleep(&self, dur: Duration) {
        *self.now.lock().unwrap() += dur;
        *self.slept.lock().unwrap() += dur;
    }
}

#[derive(Debug)]
struct Bucket {
    window_start: Duration,
    tokens: u32,
}

/// Token bucket refilled to capacity at every window boundary, matching
/// the fixed-window quotas of the timeline API. Callers over quota are
/// delayed until the next window; no request is ever dropped.
pub struct RateLimiter {
    capacity: u32,
    window: Duration,
    clock: Arc<dyn Clock>,
    state: Mutex<Bucket>,
}

impl RateLimiter {
    pub fn new(capacity: u32, window: Duration, clock: Arc<dyn Clock>) -> Self {
        assert!(capacity > 0, "rate limit capacity must be positive");
        assert!(!window.is_zero(), "rate limit window must be non-zero");
        let window_start = clock.now();
        RateLimiter {
            capacity,
            window,
            clock,
            state: Mutex::new(Bucket {
                window_start,
                tokens: capacity,
            }),
        }
    }

    /// 1500 requests per 15-minute window.
    pub fn timeline_default(clock: Arc<dyn Clock>) -> Self {
        Self::new(1500, Duration::from_secs(15 * 60), clock)
    }

    pub fn clock(&self) -> &dyn Clock {
        self.clock.as_ref()
    }

    pub fn capacity(&self) -> u32 {
        self.capacity
    }

    pub fn window(&self) -> Duration {
        self.window
    }

    /// Blocks until a request slot is available, then consumes it.
    pub fn acquire(&self) {
        loop {
            let wait = {
                let mut bucket = self.state.lock().unwrap();
                let now = self.clock.now();
                if now >= bucket.window_start + self.window {
                    let elapsed = (now - bucket.window_start).as_nanos() / self.window.as_nanos();
                    bucket.window_start += self.window * elapsed as u32;
                    bucket.tokens = self.capacity;
                }
                if bucket.tokens > 0 {
                    bucket.tokens -= 1;
                    return;
                }
                bucket.window_start + self.window - now
            };
            self.clock.sleep(wait);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RetryPolicy {
    /// Total attempts per page, including the first.
    pub max_attempts: u32,
    pub base_delay: Duration,
    pub max_delay: Duration,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        RetryPolicy {
            max_attempts: 3,
            base_delay: Duration::from_secs(1),
            max_delay: Duration::from_secs(60),
        }
    }
}

impl RetryPolicy {
    fn delay(&self, failed_attempts: u32) -> Duration {
        let factor = 1u32.checked_shl(failed_attempts.saturating_sub(1)).unwrap_or(u32::MAX);
        self.base_delay.saturating_mul(factor).min(self.max_delay)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FetchConfig {
    /// 100 for v2-style endpoints, 200 for v1-style.
    pub page_size: usize,
    pub retry: RetryPolicy,
}

impl Default for FetchConfig {
    fn default() -> Self {
        FetchConfig {
            page_size: 100,
            retry: RetryPolicy::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PageRequest {
    pub account_id: u64,
    pub page_size: usize,
    pub token: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Page {
    pub tweets: Vec<TweetRecord>,
    /// Continuation token; `None` at the end of the timeline.
    pub next: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TransportError {
    NotFound,
    Unauthorized(String),
    Transient(String),
}

/// A paginated source of account timelines, newest tweets first.
pub trait TimelineTransport: Send + Sync {
    fn fetch_page(&self, request: &PageRequest) -> Result<Page, TransportError>;
}

/// Serves timelines from memory, paging with numeric offset tokens.
#[derive(Debug, Default)]
pub struct FixtureTransport {
    timelines: HashMap<u64, Vec<TweetRecord>>,
    requests: AtomicUsize,
    transient_failures: AtomicU32,
}

impl FixtureTransport {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_timeline(mut self, account_id: u64, mut tweets: Vec<TweetRecord>) -> Self {
        sort_tweets(&mut tweets);
        self.timelines.insert(account_id, tweets);
        self
    }

    /// Loads timelines from an account file in the ingest format.
    pub fn from_file(path: &Path) -> Result<Self, IngestError> {
        let outcome = parse_account_file(path, ParseMode::Strict)?;
        Ok(outcome
            .dataset
            .into_accounts()
            .into_iter()
            .fold(Self::new(), |t, a| t.with_timeline(a.id, a.timeline)))
    }

    /// Makes the next `n` requests fail with a transient error.
    pub fn fail_next(&self, n: u32) {
        self.transient_failures.store(n, Ordering::SeqCst);
    }

    pub fn request_count(&self) -> usize {
        self.requests.load(Ordering::SeqCst)
    }
}

impl TimelineTransport for FixtureTransport {
    fn fetch_page(&self, request: &PageRequest) -> Result<Page, TransportError> {
        self.requests.fetch_add(1, Ordering::SeqCst);
        let pending = self.transient_failures.load(Ordering::SeqCst);
        if pending > 0 {
            self.transient_failures.store(pending - 1, Ordering::SeqCst);
            return Err(TransportError::Transient("injected failure".into()));
        }
        let timeline = self
            .timelines
            .get(&request.account_id)
            .ok_or(TransportError::NotFound)?;
        let offset = match &request.token {
            Some(tok) => tok
                .parse::<usize>()
                .map_err(|_| TransportError::Transient(format!("bad token `{tok}`")))?,
            None => 0,
        };
        let end = (offset + request.page_size).min(timeline.len());
        let tweets = timeline.get(offset..end).unwrap_or_default().to_vec();
        let next = (end < timeline.len()).then(|| end.to_string());
        Ok(Page { tweets, next })
    }
}

fn fetch_page_with_retry(
    transport: &dyn TimelineTransport,
    limiter: &RateLimiter,
    request: &PageRequest,
    policy: &RetryPolicy,
) -> Result<Page, IngestError> {
    let mut attempt = 0;
    loop {
        limiter.acquire();
        attempt += 1;
        match transport.fetch_page(request) {
            Ok(page) => return Ok(page),
            Err(TransportError::NotFound) => return Err(IngestError::AccountNotFound(request.account_id)),
            Err(TransportError::Unauthorized(msg)) => return Err(IngestError::Unauthorized(msg)),
            Err(TransportError::Transient(msg)) => {
                if attempt >= policy.max_attempts {
                    return Err(IngestError::RetriesExhausted {
                        attempts: attempt,
                        last: msg,
                    });
                }
                limiter.clock().sleep(policy.delay(attempt));
            }
        }
    }
}

/// Fetches up to `want` of the account's most recent tweets.
///
/// Issues at most `ceil(want / page_size)` successful page requests, stopping
/// early when the timeline runs out.
pub fn fetch_timeline(
    account_id: u64,
    want: usize,
    transport: &dyn TimelineTransport,
    limiter: &RateLimiter,
    config: &FetchConfig,
) -> Result<Vec<TweetRecord>, IngestError> {
    if want == 0 {
        return Err(IngestError::InvalidRequest("want must be positive".into()));
    }
    if config.page_size == 0 {
        return Err(IngestError::InvalidRequest("page_size must be positive".into()));
    }
    let mut tweets: Vec<TweetRecord> = Vec::with_capacity(want);
    let mut token = None;
    while tweets.len() < want {
        let request = PageRequest {
            account_id,
            page_size: config.page_size,
            token: token.take(),
        };
        let page = fetch_page_with_retry(transport, limiter, &request, &config.retry)?;
        let take = (want - tweets.len()).min(page.tweets.len());
        tweets.extend(page.tweets.into_iter().take(take));
        match page.next {
            Some(next) if take > 0 => token = Some(next),
            _ => break,
        }
    }
    sort_tweets(&mut tweets);
    Ok(tweets)
}

/// Number of ID-list calls needed to page through `follower_count` ids.
pub fn estimate_follower_calls(follower_count: u64, ids_per_call: u64) -> u64 {
    assert!(ids_per_call > 0, "ids_per_call must be positive");
    follower_count.div_ceil(ids_per_call)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::testutil::t;

    fn tweets(n: usize) -> Vec<TweetRecord> {
        (0..n)
            .map(|i| TweetRecord::new(i as u64, t(i as i64), 0, 0, 0, false, "web"))
            .collect()
    }

    fn limiter(cap: u32) -> (Arc<ManualClock>, RateLimiter) {
        let clock = Arc::new(ManualClock::new());
        let lim = RateLimiter::new(cap, Duration::from_secs(900), clock.clone());
        (clock, lim)
    }

    #[test]
    fn four_pages_for_four_hundred() {
        let tr = FixtureTransport::new().with_timeline(7, tweets(1000));
        let (_, lim) = limiter(1500);
        let got = fetch_timeline(7, 400, &tr, &lim, &FetchConfig::default()).unwrap();
        assert_eq!(got.len(), 400);
        assert_eq!(tr.request_count(), 4);
        assert_eq!(got[0].id, 999);
        assert!(got.windows(2).all(|w| w[0].created_at >= w[1].created_at));
    }

    #[test]
    fn short_timeline_single_request() {
        let tr = FixtureTransport::new().with_timeline(7, tweets(37));
        let (_, lim) = limiter(1500);
        let got = fetch_timeline(7, 400, &tr, &lim, &FetchConfig::default()).unwrap();
        assert_eq!(got.len(), 37);
        assert_eq!(tr.request_count(), 1);
    }

    #[test]
    fn v1_page_size() {
        let tr = FixtureTransport::new().with_timeline(7, tweets(1000));
        let (_, lim) = limiter(1500);
        let cfg = FetchConfig {
            page_size: 200,
            ..FetchConfig::default()
        };
        fetch_timeline(7, 400, &tr, &lim, &cfg).unwrap();
        assert_eq!(tr.request_count(), 2);
    }

    #[test]
    fn retries_transient_then_succeeds() {
        let tr = FixtureTransport::new().with_timeline(7, tweets(50));
        tr.fail_next(2);
        let (clock, lim) = limiter(1500);
        let got = fetch_timeline(7, 400, &tr, &lim, &FetchConfig::default()).unwrap();
        assert_eq!(got.len(), 50);
        assert_eq!(tr.request_count(), 3);
        // 1s then 2s backoff
        assert_eq!(clock.total_slept(), Duration::from_secs(3));
    }

    #[test]
    fn retry_budget_exhausted() {
        let tr = FixtureTransport::new().with_timeline(7, tweets(50));
        tr.fail_next(3);
        let (_, lim) = limiter(1500);
        let err = fetch_timeline(7, 400, &tr, &lim, &FetchConfig::default()).unwrap_err();
        assert!(matches!(err, IngestError::RetriesExhausted { attempts: 3, .. }));
    }

    #[test]
    fn unknown_account() {
        let tr = FixtureTransport::new();
        let (_, lim) = limiter(10);
        let err = fetch_timeline(1, 10, &tr, &lim, &FetchConfig::default()).unwrap_err();
        assert!(matches!(err, IngestError::AccountNotFound(1)));
    }

    #[test]
    fn limiter_delays_to_next_window() {
        let (clock, lim) = limiter(2);
        lim.acquire();
        lim.acquire();
        assert_eq!(clock.now(), Duration::ZERO);
        lim.acquire();
        assert_eq!(clock.now(), Duration::from_secs(900));
    }

    #[test]
    fn follower_call_estimates() {
        assert_eq!(estimate_follower_calls(130_000_000, 1000), 130_000);
        assert_eq!(estimate_follower_calls(130_000_000, 5000), 26_000);
        assert_eq!(estimate_follower_calls(0, 5000), 0);
        assert_eq!(estimate_follower_calls(5001, 5000), 2);
    }
}
