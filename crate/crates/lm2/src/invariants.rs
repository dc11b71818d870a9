//! Exact density invariants and Betti numbers.
//!
//! Everything here is exact: densities are rationals, ranks come from
//! fraction-free integer elimination, and the only division anywhere is
//! rational. `mu` is vertices over faces; `l_invariant` sums 2 minus the face
//! degree over every edge (bare edges contribute 2); `mu_tilde` minimizes
//! `mu` over all nonempty pure subcomplexes, either by exhaustive subset
//! enumeration or by branch and bound — the two must always agree.

use std::collections::BTreeMap;

use num::rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::complex::{Complex2, Face, Vertex};
use crate::error::{Error, Result};
use crate::rank::{boundary2_rank, RankField};

/// Exact rational. Serialized in reports as the string "p/q".
pub type Rational = Ratio<i64>;

pub fn rational_string(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// serde adapter: `#[serde(with = "crate::invariants::rational_as_string")]`
pub mod rational_as_string {
    use super::Rational;
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&super::rational_string(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Rational, D::Error> {
        let text = String::deserialize(d)?;
        let (p, q) = text
            .split_once('/')
            .ok_or_else(|| de::Error::custom("expected \"p/q\""))?;
        let p: i64 = p.parse().map_err(de::Error::custom)?;
        let q: i64 = q.parse().map_err(de::Error::custom)?;
        if q == 0 {
            return Err(de::Error::custom("zero denominator"));
        }
        Ok(Rational::new(p, q))
    }
}

/// Same adapter for `Option<Rational>`.
pub mod optional_rational_as_string {
    use super::Rational;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(
        r: &Option<Rational>,
        s: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        match r {
            Some(v) => s.serialize_some(&super::rational_string(v)),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> std::result::Result<Option<Rational>, D::Error> {
        let text: Option<String> = Option::deserialize(d)?;
        match text {
            None => Ok(None),
            Some(t) => {
                let (p, q) = t
                    .split_once('/')
                    .ok_or_else(|| serde::de::Error::custom("expected \"p/q\""))?;
                Ok(Some(Rational::new(
                    p.parse().map_err(serde::de::Error::custom)?,
                    q.parse().map_err(serde::de::Error::custom)?,
                )))
            }
        }
    }
}

/// Density: vertices over faces, in lowest terms. Counts every vertex of the
/// complex, including vertices in no face.
pub fn mu(c: &Complex2) -> Result<Rational> {
    if c.f() == 0 {
        return Err(Error::NoFaces);
    }
    Ok(Rational::new(c.v() as i64, c.f() as i64))
}

/// Sum over all edges of (2 - number of incident faces). Free edges add 1,
/// bare edges add 2, edges in two faces add 0, higher degrees subtract.
pub fn l_invariant(c: &Complex2) -> i64 {
    c.edge_degrees()
        .values()
        .map(|d| 2i64 - *d as i64)
        .sum()
}

/// Density of a triangulated disc with `v` vertices of which `v_internal`
/// are interior: v / (v + v_internal - 2).
pub fn disc_mu(v: u64, v_internal: u64) -> Result<Rational> {
    if v < 3 {
        return Err(Error::ParameterOutOfRange(format!(
            "disc needs at least 3 vertices, got {v}"
        )));
    }
    if v_internal + 3 > v {
        return Err(Error::ParameterOutOfRange(format!(
            "at most v-3 internal vertices possible, got {v_internal} of {v}"
        )));
    }
    Ok(Rational::new(v as i64, (v + v_internal - 2) as i64))
}

/// Everything `mu` and `l_invariant` say about one complex, plus the exact
/// identity mu = 1/2 + (2*chi + L) / (2*f) which ties them together through
/// the Euler characteristic. `identity_check` is recomputed on every call and
/// must always come out true; it is serialized so reports are self-auditing.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DensityReport {
    pub v: u64,
    pub e: u64,
    pub f: u64,
    pub chi: i64,
    pub l_invariant: i64,
    #[serde(with = "rational_as_string")]
    pub mu: Rational,
    pub identity_check: bool,
}

pub fn density_report(c: &Complex2) -> Result<DensityReport> {
    let mu = mu(c)?;
    let l = l_invariant(c);
    let chi = c.euler_characteristic();
    let f = c.f() as i64;
    let identity = Rational::new(1, 2) + Rational::new(2 * chi + l, 2 * f);
    Ok(DensityReport {
        v: c.v() as u64,
        e: c.e() as u64,
        f: c.f() as u64,
        chi,
        l_invariant: l,
        mu,
        identity_check: mu == identity,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MuTildeMode {
    Brute,
    BranchAndBound,
}

pub const DEFAULT_BRUTE_CAP: usize = 20;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MuTildeResult {
    #[serde(with = "rational_as_string")]
    pub value: Rational,
    /// Face subset realizing the minimum. Ties break toward the smallest
    /// subset, then lexicographically.
    pub witness: Vec<Face>,
    pub nodes_explored: u64,
    pub mode: MuTildeMode,
}

pub fn mu_tilde(c: &Complex2, mode: MuTildeMode) -> Result<MuTildeResult> {
    mu_tilde_with_cap(c, mode, DEFAULT_BRUTE_CAP)
}

/// Minimum of `mu` over all nonempty pure subcomplexes (equivalently, over
/// nonempty face subsets with their induced vertices). Brute mode enumerates
/// all subsets and requires f <= cap; branch and bound explores the same
/// space with an admissible lower bound and no cap.
pub fn mu_tilde_with_cap(c: &Complex2, mode: MuTildeMode, brute_cap: usize) -> Result<MuTildeResult> {
    if c.f() == 0 {
        return Err(Error::NoFaces);
    }
    let faces: Vec<Face> = c.faces().iter().copied().collect();
    let vertex_index: BTreeMap<Vertex, usize> = faces
        .iter()
        .flat_map(|f| f.vertices())
        .collect::<std::collections::BTreeSet<_>>()
        .into_iter()
        .enumerate()
        .map(|(i, v)| (v, i))
        .collect();
    let masks: Vec<VertMask> = faces
        .iter()
        .map(|f| {
            let mut m = VertMask::empty(vertex_index.len());
            for v in f.vertices() {
                m.set(vertex_index[&v]);
            }
            m
        })
        .collect();
    match mode {
        MuTildeMode::Brute => {
            if faces.len() > brute_cap {
                return Err(Error::CapExceeded {
                    what: "faces for exhaustive subset enumeration",
                    have: faces.len(),
                    cap: brute_cap,
                });
            }
            Ok(brute(&faces, &masks))
        }
        MuTildeMode::BranchAndBound => Ok(branch_and_bound(&faces, &masks)),
    }
}

/// Candidate ordering: value, then witness size, then lexicographic on the
/// sorted face-index list. Total, so the optimum is unique.
#[derive(Clone, Debug, PartialEq, Eq)]
struct Candidate {
    value: Rational,
    indices: Vec<usize>,
}

impl Candidate {
    fn better_than(&self, other: &Candidate) -> bool {
        (self.value, self.indices.len(), &self.indices)
            < (other.value, other.indices.len(), &other.indices)
    }
}

fn brute(faces: &[Face], masks: &[VertMask]) -> MuTildeResult {
    let m = faces.len();
    let mut best: Option<Candidate> = None;
    let mut nodes = 0u64;
    for subset in 1u64..(1 << m) {
        nodes += 1;
        let mut verts = VertMask::empty(masks[0].words.len() * 64);
        let mut indices = Vec::new();
        for (i, mask) in masks.iter().enumerate() {
            if subset >> i & 1 == 1 {
                verts.union_with(mask);
                indices.push(i);
            }
        }
        let value = Rational::new(verts.count() as i64, indices.len() as i64);
        let candidate = Candidate { value, indices };
        if best.as_ref().is_none_or(|b| candidate.better_than(b)) {
            best = Some(candidate);
        }
    }
    finish(best.expect("at least one nonempty subset"), faces, nodes, MuTildeMode::Brute)
}

fn branch_and_bound(faces: &[Face], masks: &[VertMask]) -> MuTildeResult {
    let m = faces.len();
    // visit faces in descending edge-sharing order so dense subcomplexes are
    // assembled (and the incumbent tightened) early
    let mut shared: Vec<(i64, usize)> = (0..m)
        .map(|i| {
            let s: i64 = (0..m)
                .filter(|&j| j != i)
                .map(|j| faces[i].shared_vertices(&faces[j]) as i64)
                .sum();
            (-s, i)
        })
        .collect();
    shared.sort();
    let order: Vec<usize> = shared.into_iter().map(|(_, i)| i).collect();

    struct State<'a> {
        masks: &'a [VertMask],
        order: &'a [usize],
        best: Option<Candidate>,
        nodes: u64,
    }

    fn dfs(s: &mut State, depth: usize, chosen: &mut Vec<usize>, verts: &VertMask) {
        s.nodes += 1;
        if depth == s.order.len() {
            return;
        }
        let remaining = s.order.len() - depth;
        // admissible bound: vertices never shrink, faces grow by at most the
        // remaining count; an empty selection still ends with >= 3 vertices
        let lb_vertices = if chosen.is_empty() { 3 } else { verts.count() as i64 };
        let lb = Rational::new(lb_vertices, (chosen.len() + remaining) as i64);
        if let Some(best) = &s.best {
            if lb > best.value {
                return;
            }
        }
        // include s.order[depth]
        let face_idx = s.order[depth];
        let mut with = verts.clone();
        with.union_with(&s.masks[face_idx]);
        chosen.push(face_idx);
        let mut indices = chosen.clone();
        indices.sort_unstable();
        let candidate = Candidate {
            value: Rational::new(with.count() as i64, chosen.len() as i64),
            indices,
        };
        if s.best.as_ref().is_none_or(|b| candidate.better_than(b)) {
            s.best = Some(candidate);
        }
        dfs(s, depth + 1, chosen, &with);
        chosen.pop();
        // exclude
        dfs(s, depth + 1, chosen, verts);
    }

    let mut state = State {
        masks,
        order: &order,
        best: None,
        nodes: 0,
    };
    let empty = VertMask::empty(masks[0].words.len() * 64);
    dfs(&mut state, 0, &mut Vec::new(), &empty);
    let nodes = state.nodes;
    let best = state.best.expect("nonempty complex yields a candidate");
    finish(best, faces, nodes, MuTildeMode::BranchAndBound)
}

fn finish(best: Candidate, faces: &[Face], nodes: u64, mode: MuTildeMode) -> MuTildeResult {
    MuTildeResult {
        value: best.value,
        witness: best.indices.into_iter().map(|i| faces[i]).collect(),
        nodes_explored: nodes,
        mode,
    }
}

#[derive(Clone, Debug)]
struct VertMask {
    words: Vec<u64>,
}

impl VertMask {
    fn empty(capacity_bits: usize) -> VertMask {
        VertMask {
            words: vec![0; capacity_bits.div_ceil(64).max(1)],
        }
    }

    fn set(&mut self, i: usize) {
        self.words[i / 64] |= 1 << (i % 64);
    }

    fn union_with(&mut self, other: &VertMask) {
        for (a, b) in self.words.iter_mut().zip(other.words.iter()) {
            *a |= b;
        }
    }

    fn count(&self) -> u32 {
        self.words.iter().map(|w| w.count_ones()).sum()
    }
}

/// Vertex degree statistics: histogram, cumulative counts l_k of vertices of
/// degree at most k, exact average degree, and — for closed surfaces — the
/// lower bounds ((k-5)v + 6*chi)/(k-2) that l_k is guaranteed to meet.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DegreeReport {
    pub histogram: BTreeMap<u32, u64>,
    pub l_table: BTreeMap<u32, u64>,
    #[serde(with = "rational_as_string")]
    pub average_degree: Rational,
    /// Present only when the complex is a closed surface.
    pub lemma_bounds: Option<BTreeMap<u32, String>>,
}

pub const DEGREE_TABLE_MIN_K: u32 = 3;
pub const DEGREE_TABLE_MAX_K: u32 = 20;

pub fn degree_report(c: &Complex2) -> DegreeReport {
    let degrees = c.vertex_degrees();
    let mut histogram: BTreeMap<u32, u64> = BTreeMap::new();
    for d in degrees.values() {
        *histogram.entry(*d).or_insert(0) += 1;
    }
    let max_deg = degrees.values().copied().max().unwrap_or(0);
    let mut l_table = BTreeMap::new();
    for k in DEGREE_TABLE_MIN_K..=DEGREE_TABLE_MAX_K.max(max_deg) {
        let l_k = degrees.values().filter(|d| **d <= k).count() as u64;
        l_table.insert(k, l_k);
    }
    let total: i64 = degrees.values().map(|d| *d as i64).sum();
    let average_degree = if degrees.is_empty() {
        Rational::new(0, 1)
    } else {
        Rational::new(total, degrees.len() as i64)
    };
    let info = c.classify_surface();
    let lemma_bounds = if info.is_closed_surface {
        let v = c.v() as i64;
        let chi = info.euler_characteristic;
        Some(
            (6..=DEGREE_TABLE_MAX_K)
                .map(|k| {
                    let bound = Rational::new((k as i64 - 5) * v + 6 * chi, k as i64 - 2);
                    (k, rational_string(&bound))
                })
                .collect(),
        )
    } else {
        None
    };
    DegreeReport {
        histogram,
        l_table,
        average_degree,
        lemma_bounds,
    }
}

/// The lower bound for l_k on a closed surface, exposed for tests and the CLI.
pub fn degree_lemma_bound(v: u64, chi: i64, k: u32) -> Rational {
    Rational::new((k as i64 - 5) * v as i64 + 6 * chi, k as i64 - 2)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BettiVector {
    pub b0: u64,
    pub b1: u64,
    pub b2: u64,
    pub field: RankField,
}

/// Betti numbers from component counting and the rank of the face boundary
/// map: b2 = f - rank, b1 = e - v + b0 - rank. The alternating sum always
/// equals the Euler characteristic.
pub fn betti_numbers(c: &Complex2, field: RankField) -> BettiVector {
    let b0 = c.connected_component_count() as u64;
    let rank = boundary2_rank(c, field) as u64;
    let b2 = c.f() as u64 - rank;
    let cycle_space = c.e() as u64 + b0 - c.v() as u64;
    debug_assert!(rank <= cycle_space, "boundary image lies in the cycle space");
    let b1 = cycle_space - rank;
    BettiVector { b0, b1, b2, field }
}
