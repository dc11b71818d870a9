//! Sequential/parallel execution switch.
//!
//! Everything expensive in this crate runs through the three helpers below,
//! so a single [`ExecMode`] value decides whether work is spread over a rayon
//! pool or done on the calling thread. With the `parallel` cargo feature
//! disabled the enum keeps the same shape and `Parallel` silently degrades to
//! the sequential path, so downstream code never needs feature gates of its
//! own. Worker count comes from rayon's usual `RAYON_NUM_THREADS` variable.
//!
//! All helpers are deterministic: results come back in index order and
//! "first" always means lowest index, regardless of which thread got there
//! first.

use serde::{Deserialize, Serialize};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExecMode {
    Sequential,
    Parallel,
}

impl Default for ExecMode {
    fn default() -> Self {
        default_mode()
    }
}

/// `Parallel` when the crate was built with the `parallel` feature (the
/// default), `Sequential` otherwise.
pub fn default_mode() -> ExecMode {
    if cfg!(feature = "parallel") {
        ExecMode::Parallel
    } else {
        ExecMode::Sequential
    }
}

impl std::str::FromStr for ExecMode {
    type Err = String;

    fn from_str(s: &str) -> Result<ExecMode, String> {
        match s {
            "sequential" => Ok(ExecMode::Sequential),
            "parallel" => Ok(ExecMode::Parallel),
            other => Err(format!(
                "unknown execution mode `{other}` (expected `sequential` or `parallel`)"
            )),
        }
    }
}

impl std::fmt::Display for ExecMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ExecMode::Sequential => "sequential",
            ExecMode::Parallel => "parallel",
        })
    }
}

/// Evaluate `f(0..n)` and collect the results in index order.
pub fn run_indexed<T, F>(mode: ExecMode, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    match mode {
        ExecMode::Sequential => (0..n).map(f).collect(),
        ExecMode::Parallel => {
            #[cfg(feature = "parallel")]
            {
                (0..n).into_par_iter().map(f).collect()
            }
            #[cfg(not(feature = "parallel"))]
            {
                (0..n).map(f).collect()
            }
        }
    }
}

/// First `Some` produced by `f`, scanning indices upward; in parallel mode
/// this is rayon's `find_map_first`, which still reports the lowest-index
/// match.
pub fn find_first_indexed<T, F>(mode: ExecMode, n: usize, f: F) -> Option<(usize, T)>
where
    T: Send,
    F: Fn(usize) -> Option<T> + Sync + Send,
{
    let tagged = |i: usize| f(i).map(|t| (i, t));
    match mode {
        ExecMode::Sequential => (0..n).find_map(tagged),
        ExecMode::Parallel => {
            #[cfg(feature = "parallel")]
            {
                (0..n).into_par_iter().find_map_first(tagged)
            }
            #[cfg(not(feature = "parallel"))]
            {
                (0..n).find_map(tagged)
            }
        }
    }
}

/// Sum of `f(0..n)` as a count. Addition is associative, so the parallel
/// reduction gives the same total in any split.
pub fn sum_indexed<F>(mode: ExecMode, n: usize, f: F) -> u64
where
    F: Fn(usize) -> u64 + Sync + Send,
{
    match mode {
        ExecMode::Sequential => (0..n).map(f).sum(),
        ExecMode::Parallel => {
            #[cfg(feature = "parallel")]
            {
                (0..n).into_par_iter().map(f).sum()
            }
            #[cfg(not(feature = "parallel"))]
            {
                (0..n).map(f).sum()
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MODES: [ExecMode; 2] = [ExecMode::Sequential, ExecMode::Parallel];

    #[test]
    fn run_indexed_keeps_order() {
        for mode in MODES {
            let out = run_indexed(mode, 100, |i| i * i);
            assert_eq!(out.len(), 100);
            assert!(out.iter().enumerate().all(|(i, x)| *x == i * i), "{mode}");
        }
    }

    #[test]
    fn find_first_returns_lowest_index() {
        for mode in MODES {
            // matches at 13, 47, 90; the answer must always be 13
            let hit = find_first_indexed(mode, 1000, |i| {
                if i == 13 || i == 47 || i == 90 {
                    Some(i * 2)
                } else {
                    None
                }
            });
            assert_eq!(hit, Some((13, 26)), "{mode}");
            let miss = find_first_indexed(mode, 1000, |_| None::<u8>);
            assert_eq!(miss, None);
        }
    }

    #[test]
    fn sums_agree_across_modes() {
        let seq = sum_indexed(ExecMode::Sequential, 10_000, |i| (i % 7) as u64);
        let par = sum_indexed(ExecMode::Parallel, 10_000, |i| (i % 7) as u64);
        assert_eq!(seq, par);
    }

    #[test]
    fn mode_round_trips_through_strings() {
        for mode in MODES {
            let s = mode.to_string();
            assert_eq!(s.parse::<ExecMode>().unwrap(), mode);
        }
        assert!("threads".parse::<ExecMode>().is_err());
        assert_eq!(
            serde_json::to_string(&ExecMode::Sequential).unwrap(),
            "\"sequential\""
        );
    }

    #[test]
    fn default_mode_tracks_feature() {
        let want = if cfg!(feature = "parallel") {
            ExecMode::Parallel
        } else {
            ExecMode::Sequential
        };
        assert_eq!(default_mode(), want);
        assert_eq!(ExecMode::default(), want);
    }
}
