//! Market and candidate documents: JSON with rationals as exact strings.
//!
//! Rationals serialize as lowest-terms strings ("3/4", whole numbers as
//! "7"); integers are accepted as input shorthand. Serialization is
//! canonical — keys sorted, two-space indent, trailing newline — so a
//! canonical document round-trips byte-identically through parse and
//! reserialize.

use crate::designer::{EquilibriumOutcome, SigmaStar};
use crate::market::{ConsumerType, Market, MarketError};
use crate::rational::{canonical, parse_rational, Rational};
use crate::verifier::{CandidateSegment, PublicEquilibriumCandidate, TiePolicy};
use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DocError {
    #[error("InvalidDocument: {0}")]
    Json(#[from] serde_json::Error),
    #[error("FirmCountMismatch: document declares {declared} firms but lists {got} costs")]
    FirmCountMismatch { declared: usize, got: usize },
    #[error(transparent)]
    Market(#[from] MarketError),
    #[error("BadTiePolicy: {0:?} (expected \"favor-owner\", \"lowest-index\", or \"never-favor:<firm>\")")]
    BadTiePolicy(String),
}

/// An exact rational that serializes as a canonical string and deserializes
/// from a string or an integer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalText(pub Rational);

impl Serialize for RationalText {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&canonical(&self.0))
    }
}

impl<'de> Deserialize<'de> for RationalText {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct RationalVisitor;
        impl Visitor<'_> for RationalVisitor {
            type Value = RationalText;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("an integer or a rational string like \"3/4\"")
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Self::Value, E> {
                Ok(RationalText(Rational::from_integer(v.into())))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Self::Value, E> {
                Ok(RationalText(Rational::from_integer(v.into())))
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<Self::Value, E> {
                parse_rational(v)
                    .map(RationalText)
                    .map_err(|e| E::custom(e.to_string()))
            }
        }
        deserializer.deserialize_any(RationalVisitor)
    }
}

/// One consumer type entry of a market document.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TypeEntry {
    pub mass: RationalText,
    pub values: Vec<RationalText>,
}

/// The on-disk market description. Field order is alphabetical so struct
/// serialization emits sorted keys.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarketDocument {
    pub costs: Vec<RationalText>,
    pub firms: usize,
    pub types: Vec<TypeEntry>,
    pub value_cap: RationalText,
}

impl MarketDocument {
    pub fn parse_str(text: &str) -> Result<Self, DocError> {
        Ok(serde_json::from_str(text)?)
    }

    /// Canonical serialization: sorted keys, two-space indent, one trailing
    /// newline.
    pub fn to_canonical_string(&self) -> String {
        let mut out = serde_json::to_string_pretty(self).expect("documents always serialize");
        out.push('\n');
        out
    }

    pub fn to_market(&self) -> Result<Market, DocError> {
        if self.firms != self.costs.len() {
            return Err(DocError::FirmCountMismatch {
                declared: self.firms,
                got: self.costs.len(),
            });
        }
        let costs = self.costs.iter().map(|r| r.0.clone()).collect();
        let types = self
            .types
            .iter()
            .map(|t| {
                ConsumerType::new(
                    t.values.iter().map(|r| r.0.clone()).collect(),
                    t.mass.0.clone(),
                )
            })
            .collect();
        Ok(Market::new(costs, types, self.value_cap.0.clone())?)
    }

    pub fn from_market(market: &Market) -> Self {
        MarketDocument {
            costs: market.costs().iter().cloned().map(RationalText).collect(),
            firms: market.firm_count(),
            types: market
                .types()
                .iter()
                .map(|t| TypeEntry {
                    mass: RationalText(t.mass.clone()),
                    values: t.values.iter().cloned().map(RationalText).collect(),
                })
                .collect(),
            value_cap: RationalText(market.value_cap().clone()),
        }
    }
}

/// One segment of a candidate document. Compositions align with the market
/// document's type order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SegmentEntry {
    pub composition: Vec<RationalText>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub owner: Option<usize>,
    pub prices: Vec<RationalText>,
    pub weight: RationalText,
}

/// A candidate equilibrium document: the designed output format and the
/// input format for verification.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CandidateDocument {
    pub segments: Vec<SegmentEntry>,
    pub tie_policy: String,
}

impl CandidateDocument {
    pub fn parse_str(text: &str) -> Result<Self, DocError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_canonical_string(&self) -> String {
        let mut out = serde_json::to_string_pretty(self).expect("documents always serialize");
        out.push('\n');
        out
    }

    pub fn to_candidate(&self) -> Result<PublicEquilibriumCandidate, DocError> {
        let tie_policy = parse_tie_policy(&self.tie_policy)?;
        let segments = self
            .segments
            .iter()
            .map(|s| CandidateSegment {
                weight: s.weight.0.clone(),
                composition: s.composition.iter().map(|r| r.0.clone()).collect(),
                owner: s.owner,
                prices: s.prices.iter().map(|r| r.0.clone()).collect(),
            })
            .collect();
        Ok(PublicEquilibriumCandidate {
            segments,
            tie_policy,
        })
    }

    pub fn from_design(sigma: &SigmaStar, outcome: &EquilibriumOutcome) -> Self {
        Self::from_candidate(&sigma.to_candidate(outcome))
    }

    pub fn from_candidate(candidate: &PublicEquilibriumCandidate) -> Self {
        CandidateDocument {
            segments: candidate
                .segments
                .iter()
                .map(|s| SegmentEntry {
                    composition: s.composition.iter().cloned().map(RationalText).collect(),
                    owner: s.owner,
                    prices: s.prices.iter().cloned().map(RationalText).collect(),
                    weight: RationalText(s.weight.clone()),
                })
                .collect(),
            tie_policy: candidate.tie_policy.label(),
        }
    }
}

fn parse_tie_policy(text: &str) -> Result<TiePolicy, DocError> {
    match text {
        "favor-owner" => Ok(TiePolicy::FavorOwner),
        "lowest-index" => Ok(TiePolicy::LowestIndex),
        other => match other.strip_prefix("never-favor:") {
            Some(index) => index
                .parse()
                .map(TiePolicy::NeverFavor)
                .map_err(|_| DocError::BadTiePolicy(text.to_string())),
            None => Err(DocError::BadTiePolicy(text.to_string())),
        },
    }
}
