//! Integer-partition enumeration and the profile-vector domain type.

use crate::error::{Error, Result};

/// Cache loads sorted non-increasing: an integer partition of the user count
/// into at most `len` parts, zero-padded to the cache count.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ProfileVector {
    loads: Vec<u32>,
}

impl ProfileVector {
    /// Validates the non-increasing invariant.
    pub fn new(loads: Vec<u32>) -> Result<Self> {
        if loads.is_empty() {
            return Err(Error::InvalidConfig("profile must not be empty".into()));
        }
        if loads.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::InvalidConfig(
                "profile loads must be non-increasing".into(),
            ));
        }
        Ok(ProfileVector { loads })
    }

    /// Sorts an arbitrary per-cache load vector into a profile.
    pub fn from_unsorted(mut loads: Vec<u32>) -> Result<Self> {
        loads.sort_unstable_by(|a, b| b.cmp(a));
        Self::new(loads)
    }

    pub(crate) fn from_sorted_unchecked(loads: Vec<u32>) -> Self {
        debug_assert!(loads.windows(2).all(|w| w[0] >= w[1]));
        ProfileVector { loads }
    }

    pub fn loads(&self) -> &[u32] {
        &self.loads
    }

    pub fn cache_count(&self) -> usize {
        self.loads.len()
    }

    /// Total number of users, i.e. the partitioned integer.
    pub fn user_count(&self) -> u64 {
        self.loads.iter().map(|&l| l as u64).sum()
    }

    /// Run lengths of equal-load groups (the run of zeros included).
    pub fn multiplicity_groups(&self) -> MultiplicityGroups {
        let mut counts = Vec::new();
        let mut run = 1u32;
        for w in self.loads.windows(2) {
            if w[0] == w[1] {
                run += 1;
            } else {
                counts.push(run);
                run = 1;
            }
        }
        counts.push(run);
        MultiplicityGroups { counts }
    }
}

/// Run-length encoding of the equal-load runs of a profile.
pub fn multiplicity_groups(profile: &ProfileVector) -> MultiplicityGroups {
    profile.multiplicity_groups()
}

/// Sizes of the maximal equal-load groups of a [`ProfileVector`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultiplicityGroups {
    counts: Vec<u32>,
}

impl MultiplicityGroups {
    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().map(|&c| c as u64).sum()
    }
}

/// In-place stepper over descending partitions of `total` into at most
/// `parts` parts with every part ≤ `cap`, in reverse-lexicographic order.
///
/// The buffer is fixed at `parts` entries and zero-padded; `advance` yields a
/// borrowed view so hot loops never allocate.
pub(crate) struct BoundedPartitions {
    buf: Vec<u32>,
    total: u64,
    cap: u32,
    state: StreamState,
}

enum StreamState {
    Fresh,
    Running,
    Done,
}

impl BoundedPartitions {
    pub(crate) fn new(total: u64, parts: usize, cap: u32) -> Self {
        let feasible = total == 0 || (parts > 0 && total <= cap as u64 * parts as u64);
        BoundedPartitions {
            buf: vec![0; parts],
            total,
            cap,
            state: if feasible {
                StreamState::Fresh
            } else {
                StreamState::Done
            },
        }
    }

    pub(crate) fn advance(&mut self) -> Option<&[u32]> {
        match self.state {
            StreamState::Done => None,
            StreamState::Fresh => {
                // first partition: greedy fill with the cap
                let mut rem = self.total;
                for slot in self.buf.iter_mut() {
                    let take = rem.min(self.cap as u64) as u32;
                    *slot = take;
                    rem -= take as u64;
                }
                debug_assert_eq!(rem, 0);
                self.state = StreamState::Running;
                Some(&self.buf)
            }
            StreamState::Running => {
                if self.step() {
                    Some(&self.buf)
                } else {
                    self.state = StreamState::Done;
                    None
                }
            }
        }
    }

    /// Replaces the buffer with its reverse-lexicographic successor.
    ///
    /// Scanning from the right, the first position holding at least 2 whose
    /// decremented value can absorb the suffix sum within the remaining slots
    /// is decremented, and the suffix refilled greedily with that value.
    fn step(&mut self) -> bool {
        let m = self.buf.len();
        let mut rem: u64 = 0;
        for i in (0..m).rev() {
            let v = self.buf[i];
            rem += v as u64;
            if v < 2 {
                continue;
            }
            let x = (v - 1) as u64;
            let q = rem / x;
            let r = rem % x;
            let needed = q + (r > 0) as u64;
            if needed <= (m - i) as u64 {
                let mut slot = i;
                for _ in 0..q {
                    self.buf[slot] = x as u32;
                    slot += 1;
                }
                if r > 0 {
                    self.buf[slot] = r as u32;
                    slot += 1;
                }
                for s in &mut self.buf[slot..] {
                    *s = 0;
                }
                return true;
            }
        }
        false
    }
}

/// Streaming iterator over every profile vector for `users` and `caches`:
/// all partitions of `users` into at most `caches` parts, zero-padded, in
/// reverse-lexicographic order.
pub struct Profiles {
    inner: BoundedPartitions,
}

impl Iterator for Profiles {
    type Item = ProfileVector;

    fn next(&mut self) -> Option<ProfileVector> {
        self.inner
            .advance()
            .map(|loads| ProfileVector::from_sorted_unchecked(loads.to_vec()))
    }
}

/// Enumerates profile vectors; see [`Profiles`].
pub fn enumerate_profiles(users: u32, caches: u32) -> Profiles {
    assert!(caches >= 1, "at least one cache required");
    Profiles {
        inner: BoundedPartitions::new(users as u64, caches as usize, users.max(1)),
    }
}

/// Number of partitions of `users` into at most `caches` parts, saturating
/// at `u128::MAX`.
pub fn partition_count(users: u32, caches: u32) -> u128 {
    let n = users as usize;
    // dp[i] = p(i, at most m parts), column by column over m
    let mut dp = vec![0u128; n + 1];
    dp[0] = 1;
    for m in 1..=(caches as usize).min(n.max(1)) {
        for i in m..=n {
            dp[i] = dp[i].saturating_add(dp[i - m]);
        }
    }
    dp[n]
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn hand_enumerable_case() {
        let got: Vec<Vec<u32>> = enumerate_profiles(3, 2)
            .map(|p| p.loads().to_vec())
            .collect();
        assert_eq!(got, vec![vec![3, 0], vec![2, 1]]);
    }

    #[test]
    fn counts_match_partition_table() {
        for (k, expected) in [(10u32, 42u128), (20, 530), (30, 3590)] {
            assert_eq!(partition_count(k, 10), expected);
            assert_eq!(enumerate_profiles(k, 10).count() as u128, expected);
        }
    }

    #[test]
    fn profiles_are_valid_and_distinct() {
        for (k, caches) in [(0u32, 3u32), (1, 1), (7, 3), (9, 4), (12, 5)] {
            let mut seen = HashSet::new();
            let mut count = 0u64;
            for p in enumerate_profiles(k, caches) {
                assert_eq!(p.cache_count(), caches as usize);
                assert_eq!(p.user_count(), k as u64);
                assert!(p.loads().windows(2).all(|w| w[0] >= w[1]));
                assert!(seen.insert(p.loads().to_vec()), "duplicate profile");
                count += 1;
            }
            assert_eq!(count as u128, partition_count(k, caches));
        }
    }

    #[test]
    fn reverse_lexicographic_order() {
        let all: Vec<Vec<u32>> = enumerate_profiles(6, 4)
            .map(|p| p.loads().to_vec())
            .collect();
        for w in all.windows(2) {
            assert!(w[0] > w[1], "{:?} !> {:?}", w[0], w[1]);
        }
    }

    #[test]
    fn multiplicity_groups_footnote_example() {
        let p = ProfileVector::new(vec![5, 5, 3, 3, 3, 2, 1, 0, 0]).unwrap();
        assert_eq!(p.multiplicity_groups().counts(), &[2, 3, 1, 1, 2]);
    }

    #[test]
    fn multiplicity_groups_trivial_cases() {
        let all_equal = ProfileVector::new(vec![1, 1, 1]).unwrap();
        assert_eq!(all_equal.multiplicity_groups().counts(), &[3]);
        let all_distinct = ProfileVector::new(vec![2, 1, 0]).unwrap();
        assert_eq!(all_distinct.multiplicity_groups().counts(), &[1, 1, 1]);
    }

    #[test]
    fn rejects_unsorted_profile() {
        assert!(ProfileVector::new(vec![1, 2]).is_err());
        assert!(ProfileVector::from_unsorted(vec![1, 2]).is_ok());
    }

    #[test]
    fn zero_users_single_profile() {
        let got: Vec<_> = enumerate_profiles(0, 3).collect();
        assert_eq!(got.len(), 1);
        assert_eq!(got[0].loads(), &[0, 0, 0]);
    }

    #[test]
    fn capped_substreams_cover_the_full_stream() {
        // splitting by leading part must reproduce the full enumeration
        let (k, caches) = (11u32, 4u32);
        let full: Vec<Vec<u32>> = enumerate_profiles(k, caches)
            .map(|p| p.loads().to_vec())
            .collect();
        let min_lead = k.div_ceil(caches);
        let mut stitched = Vec::new();
        for lead in (min_lead..=k).rev() {
            let mut sub = BoundedPartitions::new((k - lead) as u64, caches as usize - 1, lead);
            while let Some(rest) = sub.advance() {
                let mut v = vec![lead];
                v.extend_from_slice(rest);
                stitched.push(v);
            }
        }
        assert_eq!(full, stitched);
    }
}
