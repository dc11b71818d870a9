//! Subcomplex search and everything built on it: injective pattern
//! embeddings, tetrahedron detection, low-degree configurations on closed
//! surfaces, the budgeted forbidden-sublist construction, member
//! verification, the asphericability certificate, and tetrahedron pruning.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::canonical::canonical_form;
use crate::complex::{Complex2, Edge, Face, LinkShape, Vertex};
use crate::error::{Error, Result};
use crate::exec::{self, ExecMode};
use crate::invariants::{
    l_invariant, mu, mu_tilde, optional_rational_as_string, rational_as_string, MuTildeMode,
    Rational,
};
use crate::stochastic::derive_seed;
use crate::surfaces::{
    catalog, collapse, enumerate_regular_quotients_with_cap, random_sphere_triangulation,
};

/// An injective simplicial map sending every pattern face to a host face.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Embedding {
    pub pattern: Complex2,
    pub host: Complex2,
    pub vertex_map: BTreeMap<Vertex, Vertex>,
}

impl Embedding {
    /// Re-check the defining properties; useful on deserialized data.
    pub fn verify(&self) -> bool {
        let images: BTreeSet<Vertex> = self.vertex_map.values().copied().collect();
        if images.len() != self.vertex_map.len() {
            return false;
        }
        if self
            .pattern
            .vertices()
            .iter()
            .any(|v| !self.vertex_map.contains_key(v))
        {
            return false;
        }
        self.pattern.faces().iter().all(|f| {
            let [a, b, c] = f.vertices();
            let img = Face::new(
                self.vertex_map[&a],
                self.vertex_map[&b],
                self.vertex_map[&c],
            );
            self.host.contains_face(&img)
        })
    }
}

/// Precomputed search state shared by all anchors of one (pattern, host)
/// pair. Anchoring: the pattern face with the fewest degree-compatible host
/// faces is matched first against every host face in every orientation; the
/// remaining vertices are assigned in an order that keeps each new vertex
/// attached to already-placed ones whenever the pattern allows it.
struct Matcher<'a> {
    host: &'a Complex2,
    /// Pattern vertices in assignment order; the first three are the anchor
    /// face.
    order: Vec<Vertex>,
    /// Initial images for the anchor triple `order[0..3]`.
    anchors: Vec<[Vertex; 3]>,
    steps: Vec<Step>,
    host_edge_third: HashMap<Edge, Vec<Vertex>>,
    host_adjacency: HashMap<Vertex, BTreeSet<Vertex>>,
    host_vertices: Vec<Vertex>,
    host_vfd: BTreeMap<Vertex, u32>,
    p_vfd: BTreeMap<Vertex, u32>,
}

/// Per-assignment-step bookkeeping for `order[k]`, k >= 3.
struct Step {
    /// Two earlier vertices forming a pattern face with this one, if any;
    /// candidate images are then third vertices of the mapped host edge.
    pair_source: Option<(Vertex, Vertex)>,
    /// Fallback: one earlier pattern neighbor.
    single_source: Option<Vertex>,
    /// Earlier pattern neighbors; each mapped edge must be a host face edge.
    due_edges: Vec<Vertex>,
    /// Pattern faces completed by this assignment.
    due_faces: Vec<Face>,
}

impl<'a> Matcher<'a> {
    fn new(pattern: &'a Complex2, host: &'a Complex2) -> Result<Matcher<'a>> {
        if pattern.f() == 0 {
            return Err(Error::NoFaces);
        }
        if !pattern.is_pure() {
            return Err(Error::ImpurePattern);
        }
        let p_vfd = pattern.vertex_face_degrees();
        let host_vfd = host.vertex_face_degrees();

        let mut host_edge_third: HashMap<Edge, Vec<Vertex>> = HashMap::new();
        let mut host_adjacency: HashMap<Vertex, BTreeSet<Vertex>> = HashMap::new();
        for f in host.faces() {
            let [a, b, c] = f.vertices();
            host_edge_third.entry(Edge::new(a, b)).or_default().push(c);
            host_edge_third.entry(Edge::new(a, c)).or_default().push(b);
            host_edge_third.entry(Edge::new(b, c)).or_default().push(a);
            for e in f.edges() {
                let (x, y) = e.endpoints();
                host_adjacency.entry(x).or_default().insert(y);
                host_adjacency.entry(y).or_default().insert(x);
            }
        }

        // sorted degree triple of a face
        let degree_triple = |f: &Face, deg: &BTreeMap<Vertex, u32>| -> [u32; 3] {
            let [a, b, c] = f.vertices();
            let mut t = [deg[&a], deg[&b], deg[&c]];
            t.sort_unstable();
            t
        };
        let host_triples: Vec<[u32; 3]> = host
            .faces()
            .iter()
            .map(|f| degree_triple(f, &host_vfd))
            .collect();
        // anchor pattern face: fewest degree-compatible host faces
        let anchor_face = *pattern
            .faces()
            .iter()
            .min_by_key(|f| {
                let p = degree_triple(f, &p_vfd);
                host_triples
                    .iter()
                    .filter(|h| p[0] <= h[0] && p[1] <= h[1] && p[2] <= h[2])
                    .count()
            })
            .expect("pattern has faces");
        let anchor_verts = anchor_face.vertices();

        let mut anchors = Vec::new();
        for h in host.faces() {
            let hv = h.vertices();
            for perm in [
                [0, 1, 2],
                [0, 2, 1],
                [1, 0, 2],
                [1, 2, 0],
                [2, 0, 1],
                [2, 1, 0],
            ] {
                let img = [hv[perm[0]], hv[perm[1]], hv[perm[2]]];
                if (0..3).all(|i| p_vfd[&anchor_verts[i]] <= host_vfd[&img[i]]) {
                    anchors.push(img);
                }
            }
        }

        // pattern adjacency from faces (the pattern is pure, so this covers
        // every pattern edge)
        let mut p_adj: HashMap<Vertex, BTreeSet<Vertex>> = HashMap::new();
        for f in pattern.faces() {
            for e in f.edges() {
                let (x, y) = e.endpoints();
                p_adj.entry(x).or_default().insert(y);
                p_adj.entry(y).or_default().insert(x);
            }
        }

        let mut order: Vec<Vertex> = anchor_verts.to_vec();
        let mut placed: BTreeSet<Vertex> = order.iter().copied().collect();
        while placed.len() < pattern.v() {
            // prefer a vertex closing a face with two placed vertices, then
            // any vertex adjacent to a placed one, then the smallest left
            let mut best: Option<(u32, Vertex)> = None;
            for &u in pattern.vertices() {
                if placed.contains(&u) {
                    continue;
                }
                let has_pair = pattern.faces().iter().any(|f| {
                    f.contains(u) && f.vertices().iter().filter(|v| placed.contains(v)).count() == 2
                });
                let attached = p_adj
                    .get(&u)
                    .map_or(0, |ns| ns.iter().filter(|n| placed.contains(n)).count());
                let score = if has_pair {
                    2
                } else if attached > 0 {
                    1
                } else {
                    0
                };
                if best.is_none_or(|(s, _)| score > s) {
                    best = Some((score, u));
                }
            }
            let (_, u) = best.expect("unplaced vertex exists");
            order.push(u);
            placed.insert(u);
        }

        let position: HashMap<Vertex, usize> =
            order.iter().enumerate().map(|(i, v)| (*v, i)).collect();
        let mut steps = Vec::with_capacity(order.len());
        for (k, &u) in order.iter().enumerate() {
            if k < 3 {
                steps.push(Step {
                    pair_source: None,
                    single_source: None,
                    due_edges: Vec::new(),
                    due_faces: Vec::new(),
                });
                continue;
            }
            let mut pair_source = None;
            for f in pattern.faces() {
                if !f.contains(u) {
                    continue;
                }
                let earlier: Vec<Vertex> = f
                    .vertices()
                    .into_iter()
                    .filter(|v| *v != u && position[v] < k)
                    .collect();
                if earlier.len() == 2 {
                    pair_source = Some((earlier[0], earlier[1]));
                    break;
                }
            }
            let due_edges: Vec<Vertex> = p_adj
                .get(&u)
                .map(|ns| ns.iter().copied().filter(|n| position[n] < k).collect())
                .unwrap_or_default();
            let single_source = due_edges.first().copied();
            let due_faces: Vec<Face> = pattern
                .faces()
                .iter()
                .filter(|f| {
                    f.contains(u) && f.vertices().iter().all(|v| position[v] <= k)
                })
                .copied()
                .collect();
            steps.push(Step {
                pair_source,
                single_source,
                due_edges,
                due_faces,
            });
        }

        Ok(Matcher {
            host,
            order,
            anchors,
            steps,
            host_edge_third,
            host_adjacency,
            host_vertices: host.vertices().iter().copied().collect(),
            host_vfd,
            p_vfd,
        })
    }

    /// Depth-first extension from `order[k]` onward. `emit` returns true to
    /// stop the whole search (first-match mode).
    fn dfs<F: FnMut(&BTreeMap<Vertex, Vertex>) -> bool>(
        &self,
        k: usize,
        assign: &mut BTreeMap<Vertex, Vertex>,
        used: &mut BTreeSet<Vertex>,
        emit: &mut F,
    ) -> bool {
        if k == self.order.len() {
            return emit(assign);
        }
        let u = self.order[k];
        let step = &self.steps[k];
        let candidates: Vec<Vertex> = match (step.pair_source, step.single_source) {
            (Some((a, b)), _) => {
                let e = Edge::new(assign[&a], assign[&b]);
                self.host_edge_third.get(&e).cloned().unwrap_or_default()
            }
            (None, Some(a)) => self
                .host_adjacency
                .get(&assign[&a])
                .map(|s| s.iter().copied().collect())
                .unwrap_or_default(),
            (None, None) => self.host_vertices.clone(),
        };
        let needed = self.p_vfd[&u];
        'cand: for img in candidates {
            if used.contains(&img) || self.host_vfd[&img] < needed {
                continue;
            }
            for n in &step.due_edges {
                let ok = self
                    .host_adjacency
                    .get(&assign[n])
                    .is_some_and(|s| s.contains(&img));
                if !ok {
                    continue 'cand;
                }
            }
            for f in &step.due_faces {
                let [a, b, c] = f.vertices();
                let look = |v: Vertex| if v == u { img } else { assign[&v] };
                if !self.host.contains_face(&Face::new(look(a), look(b), look(c))) {
                    continue 'cand;
                }
            }
            assign.insert(u, img);
            used.insert(img);
            let stop = self.dfs(k + 1, assign, used, emit);
            assign.remove(&u);
            used.remove(&img);
            if stop {
                return true;
            }
        }
        false
    }

    fn with_anchor<F: FnMut(&BTreeMap<Vertex, Vertex>) -> bool>(
        &self,
        anchor_index: usize,
        emit: &mut F,
    ) -> bool {
        let img = self.anchors[anchor_index];
        let mut assign = BTreeMap::new();
        let mut used = BTreeSet::new();
        for (&v, &h) in self.order[..3].iter().zip(img.iter()) {
            assign.insert(v, h);
            used.insert(h);
        }
        self.dfs(3, &mut assign, &mut used, emit)
    }

    fn count_from_anchor(&self, anchor_index: usize) -> u64 {
        let mut count = 0;
        self.with_anchor(anchor_index, &mut |_| {
            count += 1;
            false
        });
        count
    }

    fn first_from_anchor(&self, anchor_index: usize) -> Option<BTreeMap<Vertex, Vertex>> {
        let mut hit = None;
        self.with_anchor(anchor_index, &mut |assign| {
            hit = Some(assign.clone());
            true
        });
        hit
    }

    fn all_from_anchor(&self, anchor_index: usize) -> Vec<BTreeMap<Vertex, Vertex>> {
        let mut out = Vec::new();
        self.with_anchor(anchor_index, &mut |assign| {
            out.push(assign.clone());
            false
        });
        out
    }
}

pub fn find_embedding(pattern: &Complex2, host: &Complex2) -> Result<Option<Embedding>> {
    find_embedding_with_mode(pattern, host, exec::default_mode())
}

/// First embedding in deterministic search order (lowest anchor index, then
/// depth-first), or None. The same embedding comes back in both execution
/// modes.
pub fn find_embedding_with_mode(
    pattern: &Complex2,
    host: &Complex2,
    mode: ExecMode,
) -> Result<Option<Embedding>> {
    let m = Matcher::new(pattern, host)?;
    let hit = exec::find_first_indexed(mode, m.anchors.len(), |i| m.first_from_anchor(i));
    Ok(hit.map(|(_, vertex_map)| Embedding {
        pattern: pattern.clone(),
        host: host.clone(),
        vertex_map,
    }))
}

pub fn count_embeddings(pattern: &Complex2, host: &Complex2) -> Result<u64> {
    count_embeddings_with_mode(pattern, host, exec::default_mode())
}

/// Number of injective vertex maps sending every pattern face to a host face
/// (maps, not images: symmetric patterns count each labeling).
pub fn count_embeddings_with_mode(
    pattern: &Complex2,
    host: &Complex2,
    mode: ExecMode,
) -> Result<u64> {
    let m = Matcher::new(pattern, host)?;
    Ok(exec::sum_indexed(mode, m.anchors.len(), |i| {
        m.count_from_anchor(i)
    }))
}

pub fn all_embeddings(pattern: &Complex2, host: &Complex2) -> Result<Vec<Embedding>> {
    all_embeddings_with_mode(pattern, host, exec::default_mode())
}

pub fn all_embeddings_with_mode(
    pattern: &Complex2,
    host: &Complex2,
    mode: ExecMode,
) -> Result<Vec<Embedding>> {
    let m = Matcher::new(pattern, host)?;
    let per_anchor = exec::run_indexed(mode, m.anchors.len(), |i| m.all_from_anchor(i));
    Ok(per_anchor
        .into_iter()
        .flatten()
        .map(|vertex_map| Embedding {
            pattern: pattern.clone(),
            host: host.clone(),
            vertex_map,
        })
        .collect())
}

/// All tetrahedra of a complex: 4-vertex sets whose four triples are all
/// faces.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TetraSet {
    pub tetrahedra: Vec<[Vertex; 4]>,
    /// True iff no two tetrahedra share a face (equivalently, share three or
    /// more vertices).
    pub pairwise_face_disjoint: bool,
}

pub fn find_tetrahedra(host: &Complex2) -> TetraSet {
    let mut tetrahedra = Vec::new();
    for f in host.faces() {
        let [a, b, c] = f.vertices();
        for &d in host.vertices().range(c + 1..) {
            if host.contains_face(&Face::new(a, b, d))
                && host.contains_face(&Face::new(a, c, d))
                && host.contains_face(&Face::new(b, c, d))
            {
                tetrahedra.push([a, b, c, d]);
            }
        }
    }
    let pairwise_face_disjoint = overlapping_pair(&tetrahedra).is_none();
    TetraSet {
        tetrahedra,
        pairwise_face_disjoint,
    }
}

fn tetra_faces(t: &[Vertex; 4]) -> [Face; 4] {
    [
        Face::new(t[0], t[1], t[2]),
        Face::new(t[0], t[1], t[3]),
        Face::new(t[0], t[2], t[3]),
        Face::new(t[1], t[2], t[3]),
    ]
}

/// First pair of tetrahedra sharing a face, if any.
fn overlapping_pair(tetrahedra: &[[Vertex; 4]]) -> Option<([Vertex; 4], [Vertex; 4])> {
    let mut owner: BTreeMap<Face, usize> = BTreeMap::new();
    for (i, t) in tetrahedra.iter().enumerate() {
        for f in tetra_faces(t) {
            if let Some(&j) = owner.get(&f) {
                return Some((tetrahedra[j], *t));
            }
            owner.insert(f, i);
        }
    }
    None
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LowDegreeKind {
    /// A single face whose three vertices all have degree at most the bound.
    Face,
    /// Two faces {x,y,w} and {y,z,w} sharing the edge (y,w), with x, y, z of
    /// degree at most the bound (w unconstrained).
    FacePair,
}

/// A low-degree configuration on a closed surface.
///
/// For `FacePair`, `y` is the vertex the two faces share besides `w`. The
/// same pair also matches the variant convention that puts the shared vertex
/// first (faces {x,y,w}, {x,z,w}): swap the x and y labels. Both labelings
/// describe one configuration, so the shared vertex is reported explicitly
/// rather than guessed.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LowDegreeConfig {
    pub kind: LowDegreeKind,
    pub x: Vertex,
    pub y: Vertex,
    pub z: Vertex,
    pub w: Option<Vertex>,
    pub faces: Vec<Face>,
    pub degree_bound_used: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LowDegreeSearch {
    pub config: Option<LowDegreeConfig>,
    /// Smallest degree bound for which any configuration exists on this
    /// surface (diagnostic; independent of the bound searched).
    pub minimal_bound: u32,
}

/// Search a closed surface for a triple of low-degree vertices spanning a
/// face, or failing that, a pair of faces {x,y,w},{y,z,w} with x, y, z
/// low-degree. Degree means 1-skeleton degree, which on a closed surface
/// equals the number of faces at the vertex.
pub fn low_degree_configuration(m: &Complex2, d: u32) -> Result<LowDegreeSearch> {
    if !m.classify_surface().is_closed_surface {
        return Err(Error::NotClosedSurface);
    }
    let deg = m.vertex_degrees();
    let mut minimal_bound = u32::MAX;

    let mut face_hit: Option<LowDegreeConfig> = None;
    for f in m.faces() {
        let [a, b, c] = f.vertices();
        let need = deg[&a].max(deg[&b]).max(deg[&c]);
        minimal_bound = minimal_bound.min(need);
        if need <= d && face_hit.is_none() {
            face_hit = Some(LowDegreeConfig {
                kind: LowDegreeKind::Face,
                x: a,
                y: b,
                z: c,
                w: None,
                faces: vec![*f],
                degree_bound_used: d,
            });
        }
    }

    let mut pair_hit: Option<LowDegreeConfig> = None;
    let edge_faces = {
        let mut map: BTreeMap<Edge, Vec<Face>> = BTreeMap::new();
        for f in m.faces() {
            for e in f.edges() {
                map.entry(e).or_default().push(*f);
            }
        }
        map
    };
    for (e, fs) in &edge_faces {
        debug_assert_eq!(fs.len(), 2, "closed surface");
        let (u, v) = e.endpoints();
        let p = fs[0].opposite(e).expect("edge in face");
        let q = fs[1].opposite(e).expect("edge in face");
        let (x, z) = if p < q { (p, q) } else { (q, p) };
        let outer = deg[&x].max(deg[&z]);
        // two readings of the same pair: shared vertex v (w = u) or shared
        // vertex u (w = v)
        for (middle, w) in [(v, u), (u, v)] {
            let need = outer.max(deg[&middle]);
            minimal_bound = minimal_bound.min(need);
            if need <= d && pair_hit.is_none() {
                pair_hit = Some(LowDegreeConfig {
                    kind: LowDegreeKind::FacePair,
                    x,
                    y: middle,
                    z,
                    w: Some(w),
                    faces: vec![Face::new(x, middle, w), Face::new(middle, z, w)],
                    degree_bound_used: d,
                });
            }
        }
    }

    Ok(LowDegreeSearch {
        config: face_hit.or(pair_hit),
        minimal_bound,
    })
}

/// Sphere sampling budget for list construction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SphereBudget {
    pub count: u32,
    pub max_vertices: u32,
    pub seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ListParams {
    pub degree_bound: u32,
    pub face_cap: usize,
    pub sphere_budget: SphereBudget,
    /// Merge budget for the regular-quotient stage.
    pub max_merges: u32,
}

/// Where a list member came from.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MemberProvenance {
    pub sphere_index: u32,
    pub sphere_vertices: u32,
    pub sphere_seed: u64,
    pub triple: [Vertex; 3],
    pub config_kind: LowDegreeKind,
    /// For quotient-stage members: the vertex partition applied to the base
    /// star union (singleton classes mean the member is the base itself).
    pub quotient_partition: Option<Vec<Vec<Vertex>>>,
    /// Index of the base star union in `members_lprime`.
    pub base_member: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ListEntry {
    pub complex: Complex2,
    /// Hex encoding of the canonical form; equal labels mean isomorphic
    /// complexes.
    pub canonical_label: String,
    pub provenance: MemberProvenance,
}

/// The forbidden list at the given parameters: the fixed seed member (two
/// tetrahedra sharing a face), the star-union harvest from random spheres,
/// and its tetrahedron-free regular quotients.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ForbiddenList {
    pub params: ListParams,
    pub members_l1: Vec<Complex2>,
    pub members_lprime: Vec<ListEntry>,
    pub members_l2: Vec<ListEntry>,
    /// Always true: the construction is budget-limited, never exhaustive.
    pub incomplete: bool,
}

pub fn canonical_label(c: &Complex2) -> String {
    let bytes = canonical_form(c);
    let mut s = String::with_capacity(bytes.len() * 2);
    for b in bytes {
        write!(s, "{b:02x}").expect("writing to String cannot fail");
    }
    s
}

/// Harvest candidate members from one closed sphere triangulation: for every
/// low-degree triple (all faces with three low vertices; all face pairs
/// {x,y,w},{y,z,w} with x, y, z low), extract the union of stars
/// st(x) ∪ st(y) ∪ st(z) and keep it when it has at most `face_cap` faces
/// and x, y, z stay internal (cycle links) in the extraction. Triples are
/// deduplicated as vertex sets; extraction order is deterministic.
pub fn star_union_members(
    sphere: &Complex2,
    d: u32,
    face_cap: usize,
) -> Result<Vec<(Complex2, [Vertex; 3], LowDegreeKind)>> {
    if !sphere.classify_surface().is_closed_surface {
        return Err(Error::NotClosedSurface);
    }
    let deg = sphere.vertex_degrees();
    let mut triples: Vec<([Vertex; 3], LowDegreeKind)> = Vec::new();
    let mut seen_triples: BTreeSet<[Vertex; 3]> = BTreeSet::new();
    for f in sphere.faces() {
        let [a, b, c] = f.vertices();
        if deg[&a] <= d && deg[&b] <= d && deg[&c] <= d && seen_triples.insert([a, b, c]) {
            triples.push(([a, b, c], LowDegreeKind::Face));
        }
    }
    let mut edge_faces: BTreeMap<Edge, Vec<Face>> = BTreeMap::new();
    for f in sphere.faces() {
        for e in f.edges() {
            edge_faces.entry(e).or_default().push(*f);
        }
    }
    for (e, fs) in &edge_faces {
        let (u, v) = e.endpoints();
        let p = fs[0].opposite(e).expect("edge in face");
        let q = fs[1].opposite(e).expect("edge in face");
        let outer = deg[&p].max(deg[&q]);
        for middle in [v, u] {
            if outer.max(deg[&middle]) <= d {
                let mut t = [p, middle, q];
                t.sort_unstable();
                if seen_triples.insert(t) {
                    triples.push((t, LowDegreeKind::FacePair));
                }
            }
        }
    }

    let mut out = Vec::new();
    for (t, kind) in triples {
        let star_faces: BTreeSet<Face> = sphere
            .faces()
            .iter()
            .filter(|f| t.iter().any(|v| f.contains(*v)))
            .copied()
            .collect();
        if star_faces.len() > face_cap {
            continue;
        }
        let member = sphere.induced_subcomplex(&star_faces.iter().copied().collect::<Vec<_>>())?;
        let internal = t.iter().all(|v| {
            member
                .link(*v)
                .map(|(_, shape)| shape == LinkShape::Cycle)
                .unwrap_or(false)
        });
        if internal {
            out.push((member, t, kind));
        }
    }
    Ok(out)
}

pub fn build_forbidden_list(params: ListParams) -> Result<ForbiddenList> {
    build_forbidden_list_with_mode(params, exec::default_mode())
}

/// Build the list: sample spheres per budget (vertex counts cycle
/// deterministically through 4..=max_vertices, seeds derived per index, so a
/// larger budget only appends), harvest star unions, dedupe by canonical
/// form, enumerate regular quotients of each member, and keep the
/// tetrahedron-free ones. Sphere harvests run in parallel when asked; the
/// merge into the list is ordered, so output is identical in both modes.
pub fn build_forbidden_list_with_mode(params: ListParams, mode: ExecMode) -> Result<ForbiddenList> {
    if params.degree_bound < 3 {
        return Err(Error::ParameterOutOfRange(format!(
            "degree bound {} is below 3, the minimum surface vertex degree",
            params.degree_bound
        )));
    }
    if params.face_cap < 4 {
        return Err(Error::ParameterOutOfRange(format!(
            "face cap {} is below 4, the smallest closed surface",
            params.face_cap
        )));
    }
    let budget = params.sphere_budget;
    if budget.max_vertices < 4 {
        return Err(Error::ParameterOutOfRange(format!(
            "sphere budget max_vertices {} is below 4",
            budget.max_vertices
        )));
    }

    let span = (budget.max_vertices - 3) as u64;
    let sphere_size = |i: u64| 4 + (i % span) as u32;

    // Per-sphere harvest: (star union, its vertex triple, configuration kind).
    type Harvest = Vec<(Complex2, [Vertex; 3], LowDegreeKind)>;
    let harvests: Vec<Result<Harvest>> =
        exec::run_indexed(mode, budget.count as usize, |i| {
            let v = sphere_size(i as u64);
            let seed = derive_seed(budget.seed, i as u64);
            let sphere = random_sphere_triangulation(v, seed)?;
            star_union_members(&sphere, params.degree_bound, params.face_cap)
        });

    let mut members_lprime: Vec<ListEntry> = Vec::new();
    let mut seen_lprime: BTreeSet<Vec<u8>> = BTreeSet::new();
    for (i, harvest) in harvests.into_iter().enumerate() {
        let v = sphere_size(i as u64);
        let seed = derive_seed(budget.seed, i as u64);
        for (complex, triple, kind) in harvest? {
            let form = canonical_form(&complex);
            if seen_lprime.insert(form) {
                members_lprime.push(ListEntry {
                    canonical_label: canonical_label(&complex),
                    complex,
                    provenance: MemberProvenance {
                        sphere_index: i as u32,
                        sphere_vertices: v,
                        sphere_seed: seed,
                        triple,
                        config_kind: kind,
                        quotient_partition: None,
                        base_member: None,
                    },
                });
            }
        }
    }

    // Tetrahedron-free quotients of one member: (quotient, merge partition).
    type QuotientBatch = Vec<(Complex2, Vec<Vec<Vertex>>)>;
    let quotient_stage: Vec<Result<QuotientBatch>> =
        exec::run_indexed(mode, members_lprime.len(), |i| {
            let member = &members_lprime[i].complex;
            let quotients =
                enumerate_regular_quotients_with_cap(member, params.max_merges, params.face_cap)?;
            Ok(quotients
                .into_iter()
                .filter(|q| find_tetrahedra(&q.complex).tetrahedra.is_empty())
                .map(|q| (q.complex, q.partition))
                .collect())
        });

    let mut members_l2: Vec<ListEntry> = Vec::new();
    let mut seen_l2: BTreeSet<Vec<u8>> = BTreeSet::new();
    for (base_index, stage) in quotient_stage.into_iter().enumerate() {
        let base_provenance = members_lprime[base_index].provenance.clone();
        for (complex, partition) in stage? {
            let form = canonical_form(&complex);
            if seen_l2.insert(form) {
                members_l2.push(ListEntry {
                    canonical_label: canonical_label(&complex),
                    complex,
                    provenance: MemberProvenance {
                        quotient_partition: Some(partition),
                        base_member: Some(base_index),
                        ..base_provenance.clone()
                    },
                });
            }
        }
    }

    Ok(ForbiddenList {
        params,
        members_l1: vec![catalog("sigma3").expect("catalog name")],
        members_lprime,
        members_l2,
        incomplete: true,
    })
}

/// Per-check report for a candidate list member at face cap `F`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MemberReport {
    pub f: usize,
    /// Free (boundary) edge count.
    pub boundary_count: usize,
    pub l_value: i64,
    /// Faces none of whose edges are free.
    pub internal_faces: usize,
    #[serde(with = "rational_as_string")]
    pub mu_tilde: Rational,
    /// Density of the closed core left by collapsing, when one exists.
    #[serde(with = "optional_rational_as_string")]
    pub closed_sub_mu: Option<Rational>,
    pub l_le_boundary: bool,
    pub boundary_le_f_minus_3: bool,
    pub l_le_f_minus_3: bool,
    pub internal_faces_ge_3: bool,
    /// mu_tilde <= (F-1)/F.
    pub mu_tilde_le_bound: bool,
    /// Conjunction of the five checks above.
    pub inequality_holds: bool,
}

pub fn verify_list_member(s: &Complex2, face_cap: usize) -> Result<MemberReport> {
    if face_cap < 2 {
        return Err(Error::ParameterOutOfRange(format!(
            "face cap {face_cap} leaves no room for the density bound"
        )));
    }
    let f = s.f();
    let free = s.free_edges();
    let boundary_count = free.len();
    let l_value = l_invariant(s);
    let internal_faces = s
        .faces()
        .iter()
        .filter(|face| face.edges().iter().all(|e| !free.contains(e)))
        .count();
    let mt = mu_tilde(s, MuTildeMode::BranchAndBound)?;
    let bound = Rational::new(face_cap as i64 - 1, face_cap as i64);
    let core = collapse(s).core;
    let closed_sub_mu = if core.f() > 0 {
        Some(mu(&core)?)
    } else {
        None
    };
    let l_le_boundary = l_value <= boundary_count as i64;
    let boundary_le_f_minus_3 = (boundary_count as i64) <= f as i64 - 3;
    let l_le_f_minus_3 = l_value <= f as i64 - 3;
    let internal_faces_ge_3 = internal_faces >= 3;
    let mu_tilde_le_bound = mt.value <= bound;
    Ok(MemberReport {
        f,
        boundary_count,
        l_value,
        internal_faces,
        mu_tilde: mt.value,
        closed_sub_mu,
        l_le_boundary,
        boundary_le_f_minus_3,
        l_le_f_minus_3,
        internal_faces_ge_3,
        mu_tilde_le_bound,
        inequality_holds: l_le_boundary
            && boundary_le_f_minus_3
            && l_le_f_minus_3
            && internal_faces_ge_3
            && mu_tilde_le_bound,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CertificateWitness {
    /// A two-tetrahedra-sharing-a-face subcomplex was found.
    Sigma { embedding: Embedding },
    /// A quotient-stage list member embeds.
    ListMember {
        member_index: usize,
        embedding: Embedding,
    },
    /// Fallback when tetrahedra overlap but no pattern witness was produced.
    OverlappingTetrahedra {
        first: [Vertex; 4],
        second: [Vertex; 4],
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    CertifiedAsphericable,
    NotCertified { witness: CertificateWitness },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    pub tetrahedra: Vec<[Vertex; 4]>,
    pub pairwise_face_disjoint: bool,
    pub sigma_free: bool,
    pub l2_free: bool,
    pub verdict: Verdict,
}

pub fn certify_asphericable(y: &Complex2, list: &ForbiddenList) -> Result<Certificate> {
    certify_asphericable_with_mode(y, list, exec::default_mode())
}

/// The sufficient-condition check: tetrahedra pairwise face disjoint, no
/// shared-face tetrahedron pair pattern, and no quotient-stage list member
/// embedded. Certification is sound for any partial list; a witness defeats
/// the sufficient condition but does not prove the complex is not
/// asphericable.
pub fn certify_asphericable_with_mode(
    y: &Complex2,
    list: &ForbiddenList,
    mode: ExecMode,
) -> Result<Certificate> {
    let ts = find_tetrahedra(y);
    let mut sigma_witness = None;
    for m in &list.members_l1 {
        if let Some(embedding) = find_embedding_with_mode(m, y, mode)? {
            sigma_witness = Some(CertificateWitness::Sigma { embedding });
            break;
        }
    }
    let mut l2_witness = None;
    for (member_index, entry) in list.members_l2.iter().enumerate() {
        if let Some(embedding) = find_embedding_with_mode(&entry.complex, y, mode)? {
            if l2_witness.is_none() {
                l2_witness = Some(CertificateWitness::ListMember {
                    member_index,
                    embedding,
                });
            }
        }
    }
    let sigma_free = sigma_witness.is_none();
    let l2_free = l2_witness.is_none();
    let verdict = if sigma_free && l2_free && ts.pairwise_face_disjoint {
        Verdict::CertifiedAsphericable
    } else {
        let witness = sigma_witness
            .or(l2_witness)
            .or_else(|| {
                overlapping_pair(&ts.tetrahedra).map(|(first, second)| {
                    CertificateWitness::OverlappingTetrahedra { first, second }
                })
            })
            .expect("some check failed, so a witness exists");
        Verdict::NotCertified { witness }
    };
    Ok(Certificate {
        tetrahedra: ts.tetrahedra,
        pairwise_face_disjoint: ts.pairwise_face_disjoint,
        sigma_free,
        l2_free,
        verdict,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PruneRule {
    /// Remove the lexicographically smallest face of each tetrahedron.
    LexicographicFace,
}

/// Remove one face from each tetrahedron. Requires the tetrahedra to be
/// pairwise face disjoint so exactly one face disappears per tetrahedron.
pub fn prune_tetrahedra(y: &Complex2, rule: PruneRule) -> Result<Complex2> {
    let ts = find_tetrahedra(y);
    if !ts.pairwise_face_disjoint {
        return Err(Error::OverlappingTetrahedra);
    }
    let removed: BTreeSet<Face> = ts
        .tetrahedra
        .iter()
        .map(|t| match rule {
            PruneRule::LexicographicFace => Face::new(t[0], t[1], t[2]),
        })
        .collect();
    debug_assert_eq!(removed.len(), ts.tetrahedra.len());
    let faces: BTreeSet<Face> = y
        .faces()
        .iter()
        .filter(|f| !removed.contains(f))
        .copied()
        .collect();
    Complex2::from_parts(
        y.vertices().clone(),
        y.edges().clone(),
        faces,
        y.includes_full_1_skeleton(),
    )
}

#[derive(Serialize, Deserialize)]
struct ManifestMember {
    file: String,
    canonical_label: String,
    provenance: MemberProvenance,
}

#[derive(Serialize, Deserialize)]
struct Manifest {
    params: ListParams,
    incomplete: bool,
    members_l1: Vec<String>,
    members_lprime: Vec<ManifestMember>,
    members_l2: Vec<ManifestMember>,
}

/// Write a list as a directory: `manifest.json` plus one face-list file per
/// member.
pub fn save_list(list: &ForbiddenList, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io_at(dir, e))?;
    let mut manifest = Manifest {
        params: list.params,
        incomplete: list.incomplete,
        members_l1: Vec::new(),
        members_lprime: Vec::new(),
        members_l2: Vec::new(),
    };
    for (i, c) in list.members_l1.iter().enumerate() {
        let file = format!("l1_{i:03}.txt");
        crate::io::write_complex_file(c, &dir.join(&file))?;
        manifest.members_l1.push(file);
    }
    for (prefix, entries, slot) in [
        ("lprime", &list.members_lprime, &mut manifest.members_lprime),
        ("l2", &list.members_l2, &mut manifest.members_l2),
    ] {
        for (i, entry) in entries.iter().enumerate() {
            let file = format!("{prefix}_{i:03}.txt");
            crate::io::write_complex_file(&entry.complex, &dir.join(&file))?;
            slot.push(ManifestMember {
                file,
                canonical_label: entry.canonical_label.clone(),
                provenance: entry.provenance.clone(),
            });
        }
    }
    let json = serde_json::to_string_pretty(&manifest)?;
    let manifest_path = dir.join("manifest.json");
    fs::write(&manifest_path, json + "\n").map_err(|e| Error::io_at(&manifest_path, e))?;
    Ok(())
}

/// Load a list directory, re-deriving every canonical label and refusing
/// mismatches (a tampered or hand-edited member file).
pub fn load_list(dir: &Path) -> Result<ForbiddenList> {
    let manifest_path = dir.join("manifest.json");
    let text = fs::read_to_string(&manifest_path).map_err(|e| Error::io_at(&manifest_path, e))?;
    let manifest: Manifest = serde_json::from_str(&text)?;
    let mut members_l1 = Vec::new();
    for file in &manifest.members_l1 {
        members_l1.push(crate::io::parse_complex_file(&dir.join(file))?);
    }
    let read_entries = |members: &[ManifestMember]| -> Result<Vec<ListEntry>> {
        members
            .iter()
            .map(|m| {
                let complex = crate::io::parse_complex_file(&dir.join(&m.file))?;
                let label = canonical_label(&complex);
                if label != m.canonical_label {
                    return Err(Error::InvalidList(format!(
                        "{}: canonical label does not match the manifest",
                        m.file
                    )));
                }
                Ok(ListEntry {
                    complex,
                    canonical_label: label,
                    provenance: m.provenance.clone(),
                })
            })
            .collect()
    };
    Ok(ForbiddenList {
        params: manifest.params,
        members_l1,
        members_lprime: read_entries(&manifest.members_lprime)?,
        members_l2: read_entries(&manifest.members_l2)?,
        incomplete: manifest.incomplete,
    })
}
