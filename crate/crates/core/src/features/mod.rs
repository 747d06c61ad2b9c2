//! Feature extraction: profile (Class A), timeline (Class B), unofficial-client
//! proportion and the prevalence-corrected CAP score.

mod cap;
mod client;
mod profile;
mod timeline;

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exec::Execution;
use crate::ingest::{Label, LabeledDataset};

pub use cap::{cap_star, CapAdjustment, DEFAULT_BASE_PRIOR};
pub use client::{ClientRegistry, DEFAULT_OFFICIAL_CLIENTS};
pub use profile::{extract_class_a, ProfileParams, CLASS_A_NAMES};
pub use timeline::{extract_class_b, extract_client_proportion, CLASS_B_NAMES, CLIENT_NAME};

pub const CAP_NAME: &str = "cap_uni_star";

/// Default number of most recent tweets the timeline features look at.
pub const DEFAULT_WINDOW: usize = 400;

#[derive(Debug, Error)]
pub enum FeatureError {
    #[error("account {0} has an empty timeline")]
    EmptyTimeline(u64),
    #[error("timeline window must be positive")]
    ZeroWindow,
    #[error("account {0} has no CAP score")]
    MissingCap(u64),
    #[error("CAP score {0} outside [0,1]")]
    InvalidCap(f64),
    #[error("prior {0} must lie in (0,1]")]
    InvalidPrior(f64),
    #[error("client registry is empty")]
    EmptyRegistry,
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureKind {
    Numeric,
    /// Stored as 0.0 / 1.0.
    Boolean,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureSchema {
    names: Vec<String>,
    kinds: Vec<FeatureKind>,
}

impl FeatureSchema {
    /// Panics on duplicate names or mismatched lengths.
    pub fn new(names: Vec<String>, kinds: Vec<FeatureKind>) -> Self {
        assert_eq!(names.len(), kinds.len(), "one kind per feature");
        let mut seen = std::collections::HashSet::new();
        for n in &names {
            assert!(seen.insert(n.as_str()), "duplicate feature name `{n}`");
        }
        FeatureSchema { names, kinds }
    }

    pub fn numeric<S: Into<String>>(names: impl IntoIterator<Item = S>) -> Self {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        let kinds = vec![FeatureKind::Numeric; names.len()];
        Self::new(names, kinds)
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn kinds(&self) -> &[FeatureKind] {
        &self.kinds
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    /// Concatenates schemas. Panics if a name repeats.
    pub fn concat(schemas: &[&FeatureSchema]) -> Self {
        let names = schemas.iter().flat_map(|s| s.names.iter().cloned()).collect();
        let kinds = schemas.iter().flat_map(|s| s.kinds.iter().copied()).collect();
        Self::new(names, kinds)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub schema: Arc<FeatureSchema>,
    pub values: Vec<f64>,
}

impl FeatureVector {
    pub fn new(schema: Arc<FeatureSchema>, values: Vec<f64>) -> Self {
        assert_eq!(schema.len(), values.len(), "vector length must match schema");
        FeatureVector { schema, values }
    }
}

/// Rows of feature values with their labels, aligned to one schema.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub schema: Arc<FeatureSchema>,
    pub rows: Vec<Vec<f64>>,
    pub labels: Vec<Label>,
}

impl FeatureMatrix {
    pub fn new(schema: FeatureSchema, rows: Vec<Vec<f64>>, labels: Vec<Label>) -> Self {
        assert_eq!(rows.len(), labels.len(), "one label per row");
        assert!(
            rows.iter().all(|r| r.len() == schema.len()),
            "row width must match schema"
        );
        FeatureMatrix {
            schema: Arc::new(schema),
            rows,
            labels,
        }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn row(&self, i: usize) -> FeatureVector {
        FeatureVector::new(self.schema.clone(), self.rows[i].clone())
    }

    /// Rows at `indices`, in that order.
    pub fn select(&self, indices: &[usize]) -> FeatureMatrix {
        FeatureMatrix {
            schema: self.schema.clone(),
            rows: indices.iter().map(|&i| self.rows[i].clone()).collect(),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
        }
    }

    /// One column's values.
    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r[j]).collect()
    }

    /// Side-by-side concatenation of matrices over the same instances.
    pub fn hstack(parts: &[FeatureMatrix]) -> FeatureMatrix {
        let first = parts.first().expect("at least one matrix");
        assert!(
            parts.iter().all(|p| p.labels == first.labels),
            "matrices must share labels"
        );
        let schemas: Vec<&FeatureSchema> = parts.iter().map(|p| p.schema.as_ref()).collect();
        let rows = (0..first.len())
            .map(|i| parts.iter().flat_map(|p| p.rows[i].iter().copied()).collect())
            .collect();
        FeatureMatrix::new(FeatureSchema::concat(&schemas), rows, first.labels.clone())
    }
}

/// The four feature sets fed to the learners.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureSet {
    CapUniStar,
    ClassA,
    ClassB,
    Client,
}

impl FeatureSet {
    pub const ALL: [FeatureSet; 4] = [
        FeatureSet::CapUniStar,
        FeatureSet::ClassA,
        FeatureSet::ClassB,
        FeatureSet::Client,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FeatureSet::CapUniStar => "cap_uni_star",
            FeatureSet::ClassA => "class_a",
            FeatureSet::ClassB => "class_b",
            FeatureSet::Client => "client",
        }
    }

    /// Human-readable label used in rendered tables.
    pub fn title(self) -> &'static str {
        match self {
            FeatureSet::CapUniStar => "CAP_UNI*",
            FeatureSet::ClassA => "Class A",
            FeatureSet::ClassB => "Class B",
            FeatureSet::Client => "Twitter client",
        }
    }

    pub fn schema(self) -> FeatureSchema {
        match self {
            FeatureSet::CapUniStar => FeatureSchema::numeric([CAP_NAME]),
            FeatureSet::Client => FeatureSchema::numeric([CLIENT_NAME]),
            FeatureSet::ClassB => FeatureSchema::numeric(CLASS_B_NAMES),
            FeatureSet::ClassA => FeatureSchema::new(
                CLASS_A_NAMES.iter().map(|s| s.to_string()).collect(),
                (0..CLASS_A_NAMES.len())
                    .map(|i| {
                        if profile::CLASS_A_BOOLEAN.contains(&i) {
                            FeatureKind::Boolean
                        } else {
                            FeatureKind::Numeric
                        }
                    })
                    .collect(),
            ),
        }
    }
}

impl fmt::Display for FeatureSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FeatureSet {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().replace(['-', ' '], "_").as_str() {
            "cap_uni_star" | "cap" | "cap_uni" => Ok(FeatureSet::CapUniStar),
            "class_a" | "a" => Ok(FeatureSet::ClassA),
            "class_b" | "b" => Ok(FeatureSet::ClassB),
            "client" | "twitter_client" => Ok(FeatureSet::Client),
            other => Err(format!("unknown feature set `{other}`")),
        }
    }
}

/// Knobs shared by all feature extractors.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureParams {
    pub window: usize,
    pub registry: ClientRegistry,
    pub base_prior: f64,
    /// Defaults to the dataset's bot prevalence.
    pub domain_prior: Option<f64>,
    /// Defaults to the latest timestamp found in the dataset.
    pub reference_time: Option<DateTime<Utc>>,
    pub ratio_target: f64,
    pub ratio_tolerance: f64,
    pub ratio_floor: f64,
}

impl Default for FeatureParams {
    fn default() -> Self {
        FeatureParams {
            window: DEFAULT_WINDOW,
            registry: ClientRegistry::default(),
            base_prior: DEFAULT_BASE_PRIOR,
            domain_prior: None,
            reference_time: None,
            ratio_target: 100.0,
            ratio_tolerance: 0.05,
            ratio_floor: 50.0,
        }
    }
}

/// Latest account-creation or tweet timestamp in the dataset.
pub fn latest_timestamp(dataset: &LabeledDataset) -> Option<DateTime<Utc>> {
    dataset
        .accounts()
        .iter()
        .flat_map(|a| std::iter::once(a.created_at).chain(a.timeline.first().map(|t| t.created_at)))
        .max()
}

pub fn build_feature_matrix(
    dataset: &LabeledDataset,
    feature_set: FeatureSet,
    params: &FeatureParams,
) -> Result<FeatureMatrix, FeatureError> {
    build_feature_matrix_with(dataset, feature_set, params, Execution::default())
}

pub fn build_feature_matrix_with(
    dataset: &LabeledDataset,
    feature_set: FeatureSet,
    params: &FeatureParams,
    exec: Execution,
) -> Result<FeatureMatrix, FeatureError> {
    if dataset.is_empty() {
        return Err(FeatureError::EmptyDataset);
    }
    let accounts = dataset.accounts();
    let rows: Vec<Result<Vec<f64>, FeatureError>> = match feature_set {
        FeatureSet::CapUniStar => {
            let domain = match params.domain_prior {
                Some(p) => p,
                None => dataset.bot_prevalence().ok_or(FeatureError::EmptyDataset)?,
            };
            let adj = CapAdjustment::new(params.base_prior, domain)?;
            exec.map_slice(accounts, |a| {
                let raw = a.botometer_cap_uni.ok_or(FeatureError::MissingCap(a.id))?;
                Ok(vec![cap_star(raw, &adj)?])
            })
        }
        FeatureSet::ClassA => {
            let reference = params
                .reference_time
                .or_else(|| latest_timestamp(dataset))
                .ok_or(FeatureError::EmptyDataset)?;
            let pp = ProfileParams {
                reference_time: reference,
                ratio_target: params.ratio_target,
                ratio_tolerance: params.ratio_tolerance,
                ratio_floor: params.ratio_floor,
            };
            exec.map_slice(accounts, |a| Ok(extract_class_a(a, &pp)))
        }
        FeatureSet::ClassB => exec.map_slice(accounts, |a| extract_class_b(a, params.window)),
        FeatureSet::Client => exec.map_slice(accounts, |a| {
            Ok(vec![extract_client_proportion(a, &params.registry, params.window)?])
        }),
    };
    let rows = rows.into_iter().collect::<Result<Vec<_>, _>>()?;
    Ok(FeatureMatrix::new(feature_set.schema(), rows, dataset.labels()))
}
