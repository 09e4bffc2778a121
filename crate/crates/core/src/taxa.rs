//! Taxon label sets.

use std::cmp::Ordering;
use std::fmt;

use serde::Serialize;

use crate::error::NetworkError;

/// Label reserved for the root vertex; no taxon may use it.
pub const ROOT_LABEL: &str = "rho";

/// An ordered set of distinct taxon names.
///
/// Names are kept in natural order (numeric names compare as numbers), so
/// two sets built from the same names in any order are equal and assign the
/// same index to every taxon.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(transparent)]
pub struct TaxaSet {
    labels: Vec<String>,
}

fn natural_cmp(a: &str, b: &str) -> Ordering {
    match (a.parse::<u64>(), b.parse::<u64>()) {
        (Ok(x), Ok(y)) => x.cmp(&y).then_with(|| a.cmp(b)),
        (Ok(_), Err(_)) => Ordering::Less,
        (Err(_), Ok(_)) => Ordering::Greater,
        (Err(_), Err(_)) => a.cmp(b),
    }
}

impl TaxaSet {
    pub fn new<I, S>(labels: I) -> Result<Self, NetworkError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.is_empty() {
            return Err(NetworkError::Taxa("taxa set is empty".into()));
        }
        labels.sort_by(|a, b| natural_cmp(a, b));
        for w in labels.windows(2) {
            if w[0] == w[1] {
                return Err(NetworkError::Taxa(format!("duplicate taxon '{}'", w[0])));
            }
        }
        if let Some(bad) = labels
            .iter()
            .find(|l| l.as_str() == ROOT_LABEL || l.is_empty())
        {
            return Err(NetworkError::Taxa(format!(
                "reserved or empty taxon label '{bad}'"
            )));
        }
        Ok(TaxaSet { labels })
    }

    /// The taxa `1..=n`.
    pub fn numbered(n: usize) -> Self {
        assert!(n > 0, "taxa set must be non-empty");
        TaxaSet {
            labels: (1..=n).map(|i| i.to_string()).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, taxon: u32) -> &str {
        &self.labels[taxon as usize]
    }

    pub fn index_of(&self, label: &str) -> Option<u32> {
        self.labels
            .binary_search_by(|l| natural_cmp(l, label))
            .ok()
            .map(|i| i as u32)
    }
}

impl fmt::Display for TaxaSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.labels.join(","))
    }
}
