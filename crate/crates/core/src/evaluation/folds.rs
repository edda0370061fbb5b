use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::EvaluationError;
use crate::sensor::Platform;

/// Disjoint user folds for subject-partitioned cross-validation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldPartition {
    pub folds: Vec<Vec<String>>,
    /// Seed used to draw the partition; `None` when loaded from a file.
    pub seed: Option<u64>,
}

impl FoldPartition {
    /// Validates disjointness and non-emptiness.
    pub fn new(folds: Vec<Vec<String>>, seed: Option<u64>) -> Result<Self, EvaluationError> {
        if folds.is_empty() {
            return Err(EvaluationError::EmptyPartition);
        }
        let mut seen: BTreeMap<&str, usize> = BTreeMap::new();
        for (i, f) in folds.iter().enumerate() {
            for u in f {
                if let Some(prev) = seen.insert(u.as_str(), i) {
                    return Err(EvaluationError::UserInTwoFolds {
                        user: u.clone(),
                        first: prev,
                        second: i,
                    });
                }
            }
        }
        Ok(Self { folds, seed })
    }

    /// One fold per user.
    pub fn leave_one_out<S: AsRef<str>>(users: &[S]) -> Result<Self, EvaluationError> {
        Self::new(users.iter().map(|u| vec![u.as_ref().to_string()]).collect(), None)
    }

    pub fn k(&self) -> usize {
        self.folds.len()
    }

    pub fn fold_of(&self, user: &str) -> Option<usize> {
        self.folds.iter().position(|f| f.iter().any(|u| u == user))
    }

    pub fn users(&self) -> impl Iterator<Item = &str> {
        self.folds.iter().flatten().map(String::as_str)
    }

    /// Errors if some dataset user is in no fold.
    pub fn check_covers<'a>(&self, users: impl IntoIterator<Item = &'a str>) -> Result<(), EvaluationError> {
        for u in users {
            if self.fold_of(u).is_none() {
                return Err(EvaluationError::UserNotInPartition(u.to_string()));
            }
        }
        Ok(())
    }

    /// One line per fold with whitespace-separated user ids.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for f in &self.folds {
            s.push_str(&f.join(" "));
            s.push('\n');
        }
        s
    }

    /// Parses the text format: line `i` lists the users of fold `i`; blank
    /// lines and `#` comments are ignored.
    pub fn parse(text: &str) -> Result<Self, EvaluationError> {
        let folds: Vec<Vec<String>> = text
            .lines()
            .map(|l| l.split('#').next().unwrap_or("").trim())
            .filter(|l| !l.is_empty())
            .map(|l| l.split_whitespace().map(str::to_string).collect())
            .collect();
        Self::new(folds, None)
    }
}

/// Randomly partitions users into `k` folds, equalizing platform
/// proportions: each platform group is shuffled, the groups are concatenated
/// and users are dealt to folds in turn.
pub fn partition_folds(
    users: &[(String, Platform)],
    k: usize,
    seed: u64,
) -> Result<FoldPartition, EvaluationError> {
    if k == 0 || users.len() < k {
        return Err(EvaluationError::TooFewUsers {
            users: users.len(),
            folds: k,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ordered = Vec::with_capacity(users.len());
    for platform in [Platform::IPhone, Platform::Android, Platform::Unknown] {
        let mut group: Vec<&String> = users.iter().filter(|(_, p)| *p == platform).map(|(u, _)| u).collect();
        group.sort();
        group.shuffle(&mut rng);
        ordered.extend(group);
    }
    let mut folds = vec![Vec::new(); k];
    for (i, u) in ordered.into_iter().enumerate() {
        folds[i % k].push(u.clone());
    }
    FoldPartition::new(folds, Some(seed))
}
