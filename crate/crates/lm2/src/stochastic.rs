//! Random complexes with a full 1-skeleton and the seeded Monte Carlo
//! experiments built on them: containment thresholds, Betti statistics with
//! tetrahedron pruning, and collapsibility fractions.
//!
//! Sampling enumerates vertex triples in colexicographic order with one
//! uniform draw each, so samples at different probabilities from the same
//! seed are coupled: raising p only adds faces. Every experiment derives
//! per-trial seeds from its master seed with a splittable scheme and
//! aggregates order-independently, so reports are byte-identical across
//! reruns and across sequential/parallel execution.

use std::collections::BTreeSet;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::complex::{Complex2, Edge, Face, Vertex};
use crate::error::{Error, Result};
use crate::exec::{self, ExecMode};
use crate::invariants::{betti_numbers, mu_tilde, rational_as_string, MuTildeMode, Rational};
use crate::patterns::{find_embedding_with_mode, find_tetrahedra, prune_tetrahedra, PruneRule};
use crate::rank::RankField;
use crate::surfaces::{collapse, CollapseOutcome};

/// Stream-split a master seed: index i gets an independent-looking seed, and
/// the mapping is stable, so growing a budget only appends new streams.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    // one splitmix64 step at offset (index+1) from the master
    let mut z = master.wrapping_add((index + 1).wrapping_mul(0x9e37_79b9_7f4a_7c15));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn choose2(n: u64) -> u64 {
    n * (n - 1) / 2
}

fn choose3(n: u64) -> u64 {
    n * (n - 1) * (n - 2) / 6
}

/// One uniform draw per vertex triple of {1, …, n}, in colexicographic order.
/// `complex_at(p)` keeps the triples whose draw is below p, so the face sets
/// are nested across p for a fixed draw set.
#[derive(Clone, Debug)]
pub struct LmDraws {
    n: u32,
    seed: u64,
    draws: Vec<f64>,
}

impl LmDraws {
    pub fn new(n: u32, seed: u64) -> Result<LmDraws> {
        if n < 3 {
            return Err(Error::ParameterOutOfRange(format!(
                "need at least 3 vertices for 2-dimensional faces, got {n}"
            )));
        }
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let count = choose3(n as u64) as usize;
        let mut draws = Vec::with_capacity(count);
        for _ in 0..count {
            draws.push(rng.gen::<f64>());
        }
        Ok(LmDraws { n, seed, draws })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// The complex at probability p: all vertices, all edges, and the faces
    /// whose draw is below p.
    pub fn complex_at(&self, p: f64) -> Result<Complex2> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidProbability(p));
        }
        let n = self.n;
        let vertices: BTreeSet<Vertex> = (1..=n).collect();
        let mut edges = BTreeSet::new();
        for b in 2..=n {
            for a in 1..b {
                edges.insert(Edge::new(a, b));
            }
        }
        let mut faces = BTreeSet::new();
        let mut index = 0;
        for c in 3..=n {
            for b in 2..c {
                for a in 1..b {
                    if self.draws[index] < p {
                        faces.insert(Face::new(a, b, c));
                    }
                    index += 1;
                }
            }
        }
        debug_assert_eq!(index, self.draws.len());
        Complex2::from_parts(vertices, edges, faces, true)
    }
}

/// A sampled random complex: full 1-skeleton on n vertices, each triple a
/// face independently with probability p.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LmSample {
    pub n: u32,
    pub p: f64,
    pub seed: u64,
    pub complex: Complex2,
    pub f2: u64,
}

pub fn sample_lm(n: u32, p: f64, seed: u64) -> Result<LmSample> {
    let draws = LmDraws::new(n, seed)?;
    let complex = draws.complex_at(p)?;
    let f2 = complex.f() as u64;
    Ok(LmSample {
        n,
        p,
        seed,
        complex,
        f2,
    })
}

/// Log of the sampling probability of this face count:
/// f2·ln p + (C(n,3) − f2)·ln(1 − p), with 0·ln 0 taken as 0, so the
/// extremes p ∈ {0, 1} are allowed exactly when the face count is forced.
pub fn log_probability(y: &LmSample) -> Result<f64> {
    let total = choose3(y.n as u64);
    if !(0.0..=1.0).contains(&y.p) {
        return Err(Error::InvalidProbability(y.p));
    }
    if y.p == 0.0 {
        return if y.f2 == 0 {
            Ok(0.0)
        } else {
            Err(Error::DegenerateLogProbability { p: y.p, f2: y.f2 })
        };
    }
    if y.p == 1.0 {
        return if y.f2 == total {
            Ok(0.0)
        } else {
            Err(Error::DegenerateLogProbability { p: y.p, f2: y.f2 })
        };
    }
    Ok(y.f2 as f64 * y.p.ln() + (total - y.f2) as f64 * (1.0 - y.p).ln())
}

const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdCell {
    pub n: u32,
    pub alpha: f64,
    /// c·n^(−α) clamped to [0, 1].
    pub p: f64,
    pub trials: u32,
    pub successes: u32,
    pub empirical_probability: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdReport {
    pub kind: String,
    pub tool_version: String,
    pub pattern_vertices: usize,
    pub pattern_faces: usize,
    /// Containment-threshold exponent of the pattern, for reference against
    /// the α grid.
    #[serde(with = "rational_as_string")]
    pub pattern_mu_tilde: Rational,
    pub c: f64,
    pub trials: u32,
    pub seed: u64,
    pub cells: Vec<ThresholdCell>,
    /// Measured, not part of the reproducible payload.
    #[serde(skip)]
    pub wall_time_seconds: f64,
}

pub fn threshold_experiment(
    pattern: &Complex2,
    n_grid: &[u32],
    alpha_grid: &[f64],
    c: f64,
    trials: u32,
    seed: u64,
) -> Result<ThresholdReport> {
    threshold_experiment_with_mode(pattern, n_grid, alpha_grid, c, trials, seed, exec::default_mode())
}

/// Empirical embedding probability of `pattern` on a (n, α) grid with
/// p = c·n^(−α). Trials for one n share their face draws across the whole α
/// row (coupling), so each row's success counts are nondecreasing as p
/// grows. Trials are independent across (n, trial) and parallelize; the
/// report is identical in both modes.
pub fn threshold_experiment_with_mode(
    pattern: &Complex2,
    n_grid: &[u32],
    alpha_grid: &[f64],
    c: f64,
    trials: u32,
    seed: u64,
    mode: ExecMode,
) -> Result<ThresholdReport> {
    let start = Instant::now();
    if trials == 0 {
        return Err(Error::ParameterOutOfRange("trials must be at least 1".into()));
    }
    if n_grid.is_empty() || alpha_grid.is_empty() {
        return Err(Error::ParameterOutOfRange(
            "n grid and alpha grid must be nonempty".into(),
        ));
    }
    if pattern.f() == 0 {
        return Err(Error::NoFaces);
    }
    if !pattern.is_pure() {
        return Err(Error::ImpurePattern);
    }
    let mt = mu_tilde(pattern, MuTildeMode::BranchAndBound)?;

    let p_for = |n: u32, alpha: f64| (c * (n as f64).powf(-alpha)).clamp(0.0, 1.0);

    let per_trial: Vec<Result<Vec<bool>>> =
        exec::run_indexed(mode, n_grid.len() * trials as usize, |i| {
            let n = n_grid[i / trials as usize];
            let draws = LmDraws::new(n, derive_seed(seed, i as u64))?;
            let mut hits = Vec::with_capacity(alpha_grid.len());
            for &alpha in alpha_grid {
                let host = draws.complex_at(p_for(n, alpha))?;
                // inner search stays sequential; parallelism is per trial
                hits.push(
                    find_embedding_with_mode(pattern, &host, ExecMode::Sequential)?.is_some(),
                );
            }
            Ok(hits)
        });
    let mut hit_rows = Vec::with_capacity(per_trial.len());
    for row in per_trial {
        hit_rows.push(row?);
    }

    let mut cells = Vec::with_capacity(n_grid.len() * alpha_grid.len());
    for (n_idx, &n) in n_grid.iter().enumerate() {
        for (a_idx, &alpha) in alpha_grid.iter().enumerate() {
            let successes = (0..trials as usize)
                .filter(|t| hit_rows[n_idx * trials as usize + t][a_idx])
                .count() as u32;
            cells.push(ThresholdCell {
                n,
                alpha,
                p: p_for(n, alpha),
                trials,
                successes,
                empirical_probability: successes as f64 / trials as f64,
            });
        }
    }
    Ok(ThresholdReport {
        kind: "threshold".to_string(),
        tool_version: TOOL_VERSION.to_string(),
        pattern_vertices: pattern.v(),
        pattern_faces: pattern.f(),
        pattern_mu_tilde: mt.value,
        c,
        trials,
        seed,
        cells,
        wall_time_seconds: start.elapsed().as_secs_f64(),
    })
}

/// Exact rank over the rationals is used up to this face count; beyond it,
/// GF(2) (where b2 can only be larger).
pub const EXACT_RANK_F2_LIMIT: u64 = 5000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BettiTrial {
    pub trial: u32,
    pub seed: u64,
    pub f2: u64,
    pub tetrahedra: u64,
    pub pairwise_face_disjoint: bool,
    pub b2_y: u64,
    /// Second Betti number of the pruned complex Z; absent when tetrahedra
    /// overlap and pruning is undefined.
    pub b2_z: Option<u64>,
    pub field: RankField,
    /// f2 − C(n−1,2) ≤ b2(Y) ≤ f2, checked exactly.
    pub ftwo_ok: bool,
    /// b2(Y) = b2(Z) + (tetrahedron count); only defined on disjoint trials.
    pub wedge_ok: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BettiReport {
    pub kind: String,
    pub tool_version: String,
    pub n: u32,
    pub c: f64,
    pub p: f64,
    pub epsilon: f64,
    pub trials: u32,
    pub seed: u64,
    pub cells: Vec<BettiTrial>,
    pub mean_f2: f64,
    pub mean_tetrahedra: f64,
    pub mean_b2_y: f64,
    /// Over disjoint trials only; absent when there are none.
    pub mean_b2_z_disjoint: Option<f64>,
    /// Fraction of all trials with b2(Z) > 0.
    pub fraction_b2_z_positive: f64,
    /// Empirical b2(Z)/n² over disjoint trials, to eyeball against the
    /// asymptotic reference without asserting it at finite n.
    pub mean_b2_z_over_n_squared: Option<f64>,
    /// (c − 3)/8 − ε, the asymptotic density the ratio above is compared to.
    pub reference_ratio: f64,
    pub all_ftwo_ok: bool,
    /// True when no disjoint trial violated the wedge identity (vacuously
    /// true without disjoint trials).
    pub all_wedge_ok: bool,
    #[serde(skip)]
    pub wall_time_seconds: f64,
}

pub fn betti_experiment(
    n: u32,
    c: f64,
    epsilon: f64,
    trials: u32,
    seed: u64,
) -> Result<BettiReport> {
    betti_experiment_with_mode(n, c, epsilon, trials, seed, exec::default_mode())
}

/// Per trial at p = c/n: sample Y, count tetrahedra, prune to Z when they
/// are pairwise face disjoint, and compute exact second Betti numbers of
/// both. The two bookkeeping identities (face-count bounds on b2, and the
/// wedge identity after pruning) are checked on every trial; the report
/// carries each trial and the summary statistics.
pub fn betti_experiment_with_mode(
    n: u32,
    c: f64,
    epsilon: f64,
    trials: u32,
    seed: u64,
    mode: ExecMode,
) -> Result<BettiReport> {
    let start = Instant::now();
    if n < 3 {
        return Err(Error::ParameterOutOfRange(format!(
            "need at least 3 vertices, got {n}"
        )));
    }
    if trials == 0 {
        return Err(Error::ParameterOutOfRange("trials must be at least 1".into()));
    }
    let p = c / n as f64;
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidProbability(p));
    }

    let lower_slack = choose2(n as u64 - 1) as i64;
    let per_trial: Vec<Result<BettiTrial>> = exec::run_indexed(mode, trials as usize, |i| {
        let trial_seed = derive_seed(seed, i as u64);
        let y = sample_lm(n, p, trial_seed)?;
        let ts = find_tetrahedra(&y.complex);
        let field = if y.f2 <= EXACT_RANK_F2_LIMIT {
            RankField::Rationals
        } else {
            RankField::Gf2
        };
        let b2_y = betti_numbers(&y.complex, field).b2;
        let (b2_z, wedge_ok) = if ts.pairwise_face_disjoint {
            let z = prune_tetrahedra(&y.complex, PruneRule::LexicographicFace)?;
            let b2_z = betti_numbers(&z, field).b2;
            let ok = b2_y == b2_z + ts.tetrahedra.len() as u64;
            (Some(b2_z), Some(ok))
        } else {
            (None, None)
        };
        let ftwo_ok = y.f2 as i64 - lower_slack <= b2_y as i64 && b2_y <= y.f2;
        Ok(BettiTrial {
            trial: i as u32,
            seed: trial_seed,
            f2: y.f2,
            tetrahedra: ts.tetrahedra.len() as u64,
            pairwise_face_disjoint: ts.pairwise_face_disjoint,
            b2_y,
            b2_z,
            field,
            ftwo_ok,
            wedge_ok,
        })
    });
    let mut cells = Vec::with_capacity(per_trial.len());
    for cell in per_trial {
        cells.push(cell?);
    }

    let tf = trials as f64;
    let mean_f2 = cells.iter().map(|t| t.f2 as f64).sum::<f64>() / tf;
    let mean_tetrahedra = cells.iter().map(|t| t.tetrahedra as f64).sum::<f64>() / tf;
    let mean_b2_y = cells.iter().map(|t| t.b2_y as f64).sum::<f64>() / tf;
    let disjoint: Vec<u64> = cells.iter().filter_map(|t| t.b2_z).collect();
    let mean_b2_z_disjoint = if disjoint.is_empty() {
        None
    } else {
        Some(disjoint.iter().map(|b| *b as f64).sum::<f64>() / disjoint.len() as f64)
    };
    let fraction_b2_z_positive =
        cells.iter().filter(|t| t.b2_z.is_some_and(|b| b > 0)).count() as f64 / tf;
    let n_sq = (n as f64) * (n as f64);
    Ok(BettiReport {
        kind: "betti".to_string(),
        tool_version: TOOL_VERSION.to_string(),
        n,
        c,
        p,
        epsilon,
        trials,
        seed,
        mean_f2,
        mean_tetrahedra,
        mean_b2_y,
        mean_b2_z_disjoint,
        fraction_b2_z_positive,
        mean_b2_z_over_n_squared: mean_b2_z_disjoint.map(|m| m / n_sq),
        reference_ratio: (c - 3.0) / 8.0 - epsilon,
        all_ftwo_ok: cells.iter().all(|t| t.ftwo_ok),
        all_wedge_ok: cells.iter().all(|t| t.wedge_ok != Some(false)),
        cells,
        wall_time_seconds: start.elapsed().as_secs_f64(),
    })
}

/// Probability rule p = c / n^(1+δ).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CollapsePRule {
    pub c: f64,
    pub delta: f64,
}

impl CollapsePRule {
    pub fn probability(&self, n: u32) -> f64 {
        self.c / (n as f64).powf(1.0 + self.delta)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CollapseTrial {
    pub trial: u32,
    pub seed: u64,
    pub f2: u64,
    pub outcome: CollapseOutcome,
    pub core_faces: u64,
    pub residual_edges: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CollapseCounts {
    pub graph: u32,
    pub closed_core: u32,
    pub mixed: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CollapseReport {
    pub kind: String,
    pub tool_version: String,
    pub n: u32,
    pub rule: CollapsePRule,
    pub p: f64,
    pub trials: u32,
    pub seed: u64,
    pub cells: Vec<CollapseTrial>,
    pub counts: CollapseCounts,
    pub fraction_graph: f64,
    pub mean_f2: f64,
    #[serde(skip)]
    pub wall_time_seconds: f64,
}

pub fn collapse_experiment(
    n: u32,
    rule: CollapsePRule,
    trials: u32,
    seed: u64,
) -> Result<CollapseReport> {
    collapse_experiment_with_mode(n, rule, trials, seed, exec::default_mode())
}

/// Fraction of samples at p = c/n^(1+δ) whose free-edge collapse eats every
/// face (outcome `graph`).
pub fn collapse_experiment_with_mode(
    n: u32,
    rule: CollapsePRule,
    trials: u32,
    seed: u64,
    mode: ExecMode,
) -> Result<CollapseReport> {
    let start = Instant::now();
    if n < 3 {
        return Err(Error::ParameterOutOfRange(format!(
            "need at least 3 vertices, got {n}"
        )));
    }
    if trials == 0 {
        return Err(Error::ParameterOutOfRange("trials must be at least 1".into()));
    }
    let p = rule.probability(n);
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidProbability(p));
    }

    let per_trial: Vec<Result<CollapseTrial>> = exec::run_indexed(mode, trials as usize, |i| {
        let trial_seed = derive_seed(seed, i as u64);
        let y = sample_lm(n, p, trial_seed)?;
        let r = collapse(&y.complex);
        Ok(CollapseTrial {
            trial: i as u32,
            seed: trial_seed,
            f2: y.f2,
            outcome: r.outcome,
            core_faces: r.core.f() as u64,
            residual_edges: r.residual_graph.edges.len() as u64,
        })
    });
    let mut cells = Vec::with_capacity(per_trial.len());
    for cell in per_trial {
        cells.push(cell?);
    }

    let mut counts = CollapseCounts {
        graph: 0,
        closed_core: 0,
        mixed: 0,
    };
    for t in &cells {
        match t.outcome {
            CollapseOutcome::Graph => counts.graph += 1,
            CollapseOutcome::ClosedCore => counts.closed_core += 1,
            CollapseOutcome::Mixed => counts.mixed += 1,
        }
    }
    let mean_f2 = cells.iter().map(|t| t.f2 as f64).sum::<f64>() / trials as f64;
    Ok(CollapseReport {
        kind: "collapse".to_string(),
        tool_version: TOOL_VERSION.to_string(),
        n,
        rule,
        p,
        trials,
        seed,
        fraction_graph: counts.graph as f64 / trials as f64,
        counts,
        cells,
        mean_f2,
        wall_time_seconds: start.elapsed().as_secs_f64(),
    })
}
