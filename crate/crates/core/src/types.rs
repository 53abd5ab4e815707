use std::fmt;

use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};

use crate::counters::Counters;
use crate::engine::Char;
use crate::error::Result;

/// Which of the two maintained strings an update touches.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Target {
    Pattern,
    Text,
}

/// A substitution that has already been applied, with the character it replaced.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Update {
    pub target: Target,
    pub index: usize,
    pub old: Char,
    pub new: Char,
}

/// Result of a k-mismatch query: the exact distance when it is at most `k`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Answer {
    Distance(u32),
    Infinity,
}

impl Answer {
    pub fn capped(distance: usize, k: usize) -> Answer {
        if distance <= k {
            Answer::Distance(distance as u32)
        } else {
            Answer::Infinity
        }
    }

    pub fn distance(self) -> Option<u32> {
        match self {
            Answer::Distance(d) => Some(d),
            Answer::Infinity => None,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, Answer::Distance(_))
    }
}

impl fmt::Display for Answer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Answer::Distance(d) => write!(f, "{d}"),
            Answer::Infinity => f.write_str("inf"),
        }
    }
}

// Finite answers are plain integers on the wire, infinity is the string "inf".
impl Serialize for Answer {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Answer::Distance(d) => s.serialize_u32(*d),
            Answer::Infinity => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Answer {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct AnswerVisitor;
        impl Visitor<'_> for AnswerVisitor {
            type Value = Answer;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a non-negative distance or \"inf\"")
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Answer, E> {
                u32::try_from(v)
                    .map(Answer::Distance)
                    .map_err(|_| E::custom("distance too large"))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Answer, E> {
                u64::try_from(v)
                    .map_err(|_| E::custom("negative distance"))
                    .and_then(|v| self.visit_u64(v))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Answer, E> {
                if v == "inf" {
                    Ok(Answer::Infinity)
                } else {
                    Err(E::custom(format!("unexpected answer {v:?}")))
                }
            }
        }
        d.deserialize_any(AnswerVisitor)
    }
}

/// The common interface of every dynamic k-mismatch structure.
pub trait DynamicKMismatch {
    fn pattern_len(&self) -> usize;
    fn text_len(&self) -> usize;
    fn threshold(&self) -> usize;

    /// Sets `target[index] := c`.
    fn update(&mut self, target: Target, index: usize, c: Char) -> Result<()>;

    /// Distance between the pattern and `text[i..i+m)` if at most `k`, else infinity.
    fn query(&mut self, i: usize) -> Result<Answer>;

    /// Cumulative work counters since construction (construction excluded).
    fn counters(&self) -> Counters;
}

impl<S: DynamicKMismatch + ?Sized> DynamicKMismatch for Box<S> {
    fn pattern_len(&self) -> usize {
        (**self).pattern_len()
    }
    fn text_len(&self) -> usize {
        (**self).text_len()
    }
    fn threshold(&self) -> usize {
        (**self).threshold()
    }
    fn update(&mut self, target: Target, index: usize, c: Char) -> Result<()> {
        (**self).update(target, index, c)
    }
    fn query(&mut self, i: usize) -> Result<Answer> {
        (**self).query(i)
    }
    fn counters(&self) -> Counters {
        (**self).counters()
    }
}
