use std::collections::BTreeSet;
use std::path::Path;

use super::FeatureError;

/// Display names of clients published by the platform itself. Stand-in list;
/// load a replacement with [`ClientRegistry::from_file`].
pub const DEFAULT_OFFICIAL_CLIENTS: &[&str] = &[
    "Twitter for iPhone",
    "Twitter for Android",
    "Twitter for iPad",
    "Twitter Web Client",
    "Twitter Web App",
    "TweetDeck",
    "Twitter for Mac",
    "Twitter Lite",
    "Mobile Web",
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClientRegistry {
    official: BTreeSet<String>,
}

impl Default for ClientRegistry {
    fn default() -> Self {
        ClientRegistry::new(DEFAULT_OFFICIAL_CLIENTS.iter().copied()).expect("non-empty default")
    }
}

impl ClientRegistry {
    pub fn new<I, S>(names: I) -> Result<Self, FeatureError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let official: BTreeSet<String> = names
            .into_iter()
            .map(|s| s.as_ref().trim().to_string())
            .filter(|s| !s.is_empty())
            .collect();
        if official.is_empty() {
            return Err(FeatureError::EmptyRegistry);
        }
        Ok(ClientRegistry { official })
    }

    /// One name per line; blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Result<Self, FeatureError> {
        Self::new(
            text.lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#')),
        )
    }

    pub fn from_file(path: &Path) -> Result<Self, FeatureError> {
        let text = std::fs::read_to_string(path).map_err(|source| FeatureError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn is_official(&self, client: &str) -> bool {
        self.official.contains(client.trim())
    }

    pub fn len(&self) -> usize {
        self.official.len()
    }

    pub fn is_empty(&self) -> bool {
        self.official.is_empty()
    }
}
