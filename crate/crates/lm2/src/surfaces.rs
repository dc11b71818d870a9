//! Triangulated surfaces and complex surgery: a catalog of named complexes,
//! random sphere triangulations, grid tori, random edge-flip perturbation,
//! free-edge collapsing, and regular simplicial quotients by vertex
//! partitions.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::canonical::canonical_form;
use crate::complex::{Complex2, Edge, Face, Graph, SurfaceName, Vertex};
use crate::error::{Error, Result};

/// Named complexes used throughout tests and experiments.
///
/// * `tetrahedron` — boundary of the 3-simplex.
/// * `bipyramid5` — double cone over a triangle: 5 vertices, 6 faces.
/// * `octahedron`, `icosahedron` — the usual boundaries.
/// * `rp2_six` — 6-vertex projective plane (antipodal icosahedron quotient).
/// * `sigma1`, `sigma2`, `sigma3` — two tetrahedra glued along 1, 2, or 3
///   shared vertices (for `sigma3` the shared triple is a face of both).
pub const CATALOG_NAMES: [&str; 8] = [
    "tetrahedron",
    "bipyramid5",
    "octahedron",
    "icosahedron",
    "rp2_six",
    "sigma1",
    "sigma2",
    "sigma3",
];

pub fn catalog(name: &str) -> Result<Complex2> {
    let faces: Vec<(u32, u32, u32)> = match name {
        "tetrahedron" => vec![(1, 2, 3), (1, 2, 4), (1, 3, 4), (2, 3, 4)],
        "bipyramid5" => vec![
            (1, 2, 4),
            (1, 3, 4),
            (2, 3, 4),
            (1, 2, 5),
            (1, 3, 5),
            (2, 3, 5),
        ],
        "octahedron" => vec![
            // poles 1 and 6, equator 2 3 4 5
            (1, 2, 3),
            (1, 3, 4),
            (1, 4, 5),
            (1, 5, 2),
            (6, 2, 3),
            (6, 3, 4),
            (6, 4, 5),
            (6, 5, 2),
        ],
        "icosahedron" => {
            let mut f = Vec::with_capacity(20);
            // pole 1, upper ring 2..=6, lower ring 7..=11, pole 12
            for i in 0..5u32 {
                let u = 2 + i;
                let un = 2 + (i + 1) % 5;
                let l = 7 + i;
                let ln = 7 + (i + 1) % 5;
                f.push((1, u, un));
                f.push((u, l, un));
                f.push((un, l, ln));
                f.push((12, l, ln));
            }
            f
        }
        "rp2_six" => vec![
            (1, 2, 4),
            (1, 2, 5),
            (1, 3, 4),
            (1, 3, 6),
            (1, 5, 6),
            (2, 3, 5),
            (2, 3, 6),
            (2, 4, 6),
            (3, 4, 5),
            (4, 5, 6),
        ],
        "sigma1" => vec![
            (1, 2, 3),
            (1, 2, 4),
            (1, 3, 4),
            (2, 3, 4),
            (4, 5, 6),
            (4, 5, 7),
            (4, 6, 7),
            (5, 6, 7),
        ],
        "sigma2" => vec![
            (1, 2, 3),
            (1, 2, 4),
            (1, 3, 4),
            (2, 3, 4),
            (3, 4, 5),
            (3, 4, 6),
            (3, 5, 6),
            (4, 5, 6),
        ],
        "sigma3" => vec![
            (1, 2, 3),
            (1, 2, 4),
            (1, 3, 4),
            (2, 3, 4),
            (2, 3, 5),
            (2, 4, 5),
            (3, 4, 5),
        ],
        other => return Err(Error::UnknownCatalog(other.to_string())),
    };
    Complex2::from_faces(&faces)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SphereGenConfig {
    /// Random flip attempts interleaved after each subdivision step.
    pub flips_per_subdivision: u32,
    /// Final flip attempts as a multiple of the vertex count.
    pub final_flip_factor: u32,
}

impl Default for SphereGenConfig {
    fn default() -> Self {
        SphereGenConfig {
            flips_per_subdivision: 3,
            final_flip_factor: 3,
        }
    }
}

/// Random triangulated sphere on exactly `v >= 4` vertices: start from the
/// tetrahedron, repeatedly subdivide a random face (1 face -> 3 around a new
/// vertex), interleaving random edge flips; finish with `final_flip_factor*v`
/// flip attempts. A flip is attempted on a random edge and skipped unless
/// legal (the replacement edge must be absent, which also protects vertex
/// links). The result always satisfies f = 2v - 4, e = 3v - 6.
pub fn random_sphere_triangulation(v: u32, seed: u64) -> Result<Complex2> {
    random_sphere_with_config(v, seed, SphereGenConfig::default())
}

pub fn random_sphere_with_config(v: u32, seed: u64, cfg: SphereGenConfig) -> Result<Complex2> {
    if v < 4 {
        return Err(Error::ParameterOutOfRange(format!(
            "a triangulated sphere needs at least 4 vertices, got {v}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tri = MutableTriangulation::tetrahedron();
    while tri.vertex_count < v {
        tri.subdivide_random_face(&mut rng);
        for _ in 0..cfg.flips_per_subdivision {
            tri.attempt_random_flip(&mut rng);
        }
    }
    for _ in 0..cfg.final_flip_factor * v {
        tri.attempt_random_flip(&mut rng);
    }
    let out = tri.into_complex()?;
    debug_assert_eq!(out.classify_surface().surface_name, SurfaceName::Sphere);
    Ok(out)
}

/// Apply random legal edge flips to a closed triangulated surface. Flips
/// preserve the surface type, so this perturbs the triangulation without
/// changing what it triangulates.
pub fn flip_perturbation(c: &Complex2, attempts: u32, seed: u64) -> Result<Complex2> {
    if !c.classify_surface().is_closed_surface {
        return Err(Error::NotClosedSurface);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tri = MutableTriangulation::from_complex(c);
    for _ in 0..attempts {
        tri.attempt_random_flip(&mut rng);
    }
    tri.into_complex()
}

/// Incremental face/edge bookkeeping for subdivision and flips.
struct MutableTriangulation {
    faces: BTreeSet<Face>,
    face_list: Vec<Face>,
    face_pos: HashMap<Face, usize>,
    edge_list: Vec<Edge>,
    edge_pos: HashMap<Edge, usize>,
    edge_faces: HashMap<Edge, Vec<Face>>,
    vertex_count: u32,
    next_vertex: u32,
}

impl MutableTriangulation {
    fn tetrahedron() -> MutableTriangulation {
        let mut t = MutableTriangulation {
            faces: BTreeSet::new(),
            face_list: Vec::new(),
            face_pos: HashMap::new(),
            edge_list: Vec::new(),
            edge_pos: HashMap::new(),
            edge_faces: HashMap::new(),
            vertex_count: 4,
            next_vertex: 5,
        };
        for f in [
            Face::new(1, 2, 3),
            Face::new(1, 2, 4),
            Face::new(1, 3, 4),
            Face::new(2, 3, 4),
        ] {
            t.add_face(f);
        }
        t
    }

    fn from_complex(c: &Complex2) -> MutableTriangulation {
        let mut t = MutableTriangulation {
            faces: BTreeSet::new(),
            face_list: Vec::new(),
            face_pos: HashMap::new(),
            edge_list: Vec::new(),
            edge_pos: HashMap::new(),
            edge_faces: HashMap::new(),
            vertex_count: c.v() as u32,
            next_vertex: c.vertices().iter().max().copied().unwrap_or(0) + 1,
        };
        for f in c.faces() {
            t.add_face(*f);
        }
        t
    }

    fn add_face(&mut self, f: Face) {
        if !self.faces.insert(f) {
            panic!("face {f:?} added twice");
        }
        self.face_pos.insert(f, self.face_list.len());
        self.face_list.push(f);
        for e in f.edges() {
            let entry = self.edge_faces.entry(e).or_default();
            if entry.is_empty() {
                self.edge_pos.insert(e, self.edge_list.len());
                self.edge_list.push(e);
            }
            entry.push(f);
        }
    }

    fn remove_face(&mut self, f: Face) {
        assert!(self.faces.remove(&f));
        let pos = self.face_pos.remove(&f).expect("face indexed");
        let last = self.face_list.pop().expect("nonempty");
        if last != f {
            self.face_list[pos] = last;
            self.face_pos.insert(last, pos);
        }
        for e in f.edges() {
            let entry = self.edge_faces.get_mut(&e).expect("edge indexed");
            entry.retain(|g| *g != f);
            if entry.is_empty() {
                self.edge_faces.remove(&e);
                let pos = self.edge_pos.remove(&e).expect("edge indexed");
                let last = self.edge_list.pop().expect("nonempty");
                if last != e {
                    self.edge_list[pos] = last;
                    self.edge_pos.insert(last, pos);
                }
            }
        }
    }

    fn subdivide_random_face<R: Rng>(&mut self, rng: &mut R) {
        let f = *self.face_list.choose(rng).expect("faces exist");
        let w = self.next_vertex;
        self.next_vertex += 1;
        self.vertex_count += 1;
        let [a, b, c] = f.vertices();
        self.remove_face(f);
        self.add_face(Face::new(a, b, w));
        self.add_face(Face::new(a, c, w));
        self.add_face(Face::new(b, c, w));
    }

    fn attempt_random_flip<R: Rng>(&mut self, rng: &mut R) -> bool {
        let idx = rng.gen_range(0..self.edge_list.len());
        let e = self.edge_list[idx];
        let incident = self.edge_faces[&e].clone();
        if incident.len() != 2 {
            return false;
        }
        let c = incident[0].opposite(&e).expect("edge in face");
        let d = incident[1].opposite(&e).expect("edge in face");
        if c == d {
            return false;
        }
        let new_edge = Edge::new(c, d);
        if self.edge_faces.contains_key(&new_edge) {
            // replacement edge already present: flip would break simpliciality
            return false;
        }
        let (a, b) = e.endpoints();
        self.remove_face(incident[0]);
        self.remove_face(incident[1]);
        self.add_face(Face::new(a, c, d));
        self.add_face(Face::new(b, c, d));
        true
    }

    fn into_complex(self) -> Result<Complex2> {
        let faces: Vec<Face> = self.faces.iter().copied().collect();
        let mut edges = BTreeSet::new();
        let mut vertices = BTreeSet::new();
        for f in &faces {
            edges.extend(f.edges());
            vertices.extend(f.vertices());
        }
        Complex2::from_parts(vertices, edges, faces.into_iter().collect(), false)
    }
}

/// Triangulated torus on an m-by-k vertex grid with wraparound: vertex (i, j)
/// carries faces {(i,j),(i+1,j),(i+1,j+1)} and {(i,j),(i,j+1),(i+1,j+1)}
/// (indices mod m and k). Needs m, k >= 3 to stay simplicial; f = 2mk = 2v.
pub fn grid_torus_triangulation(m: u32, k: u32) -> Result<Complex2> {
    if m < 3 || k < 3 {
        return Err(Error::NonSimplicialTorus(m, k));
    }
    let id = |i: u32, j: u32| -> u32 { (i % m) * k + (j % k) + 1 };
    let mut faces = Vec::with_capacity((2 * m * k) as usize);
    for i in 0..m {
        for j in 0..k {
            faces.push((id(i, j), id(i + 1, j), id(i + 1, j + 1)));
            faces.push((id(i, j), id(i, j + 1), id(i + 1, j + 1)));
        }
    }
    let c = Complex2::from_faces(&faces).map_err(|_| Error::NonSimplicialTorus(m, k))?;
    if c.classify_surface().surface_name != SurfaceName::Torus {
        return Err(Error::NonSimplicialTorus(m, k));
    }
    Ok(c)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CollapseOutcome {
    /// No faces left.
    Graph,
    /// Faces left, every remaining edge is covered twice or more, and no
    /// residual edges outside the core.
    ClosedCore,
    /// Faces left alongside residual bare edges.
    Mixed,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CollapseResult {
    /// Pure subcomplex spanned by the surviving faces; has no free edges.
    pub core: Complex2,
    /// The (free edge, face) pairs in removal order.
    pub removed: Vec<(Edge, Face)>,
    pub outcome: CollapseOutcome,
    /// Surviving edges that lie in no surviving face.
    pub residual_graph: Graph,
    /// Everything that survives, including all original vertices.
    pub end_state: Complex2,
}

/// Repeatedly remove the lexicographically smallest free edge together with
/// its unique incident face, until no free edge remains. Bare edges are never
/// touched; vertices are never removed. Idempotent: collapsing the end state
/// changes nothing.
pub fn collapse(c: &Complex2) -> CollapseResult {
    collapse_with_order(c, CollapseOrder::Lexicographic)
}

#[derive(Clone, Copy, Debug)]
pub enum CollapseOrder {
    Lexicographic,
    /// Uniform random free edge each step; for robustness testing, since the
    /// final core never depends on the order.
    Seeded(u64),
}

pub fn collapse_with_order(c: &Complex2, order: CollapseOrder) -> CollapseResult {
    let mut faces: BTreeSet<Face> = c.faces().iter().copied().collect();
    let mut edge_faces: BTreeMap<Edge, Vec<Face>> = BTreeMap::new();
    for f in &faces {
        for e in f.edges() {
            edge_faces.entry(e).or_default().push(*f);
        }
    }
    for e in c.edges() {
        edge_faces.entry(*e).or_default();
    }
    let mut rng = match order {
        CollapseOrder::Seeded(seed) => Some(ChaCha8Rng::seed_from_u64(seed)),
        CollapseOrder::Lexicographic => None,
    };
    let mut removed = Vec::new();
    loop {
        let free: Vec<Edge> = edge_faces
            .iter()
            .filter(|(_, fs)| fs.len() == 1)
            .map(|(e, _)| *e)
            .collect();
        if free.is_empty() {
            break;
        }
        let e = match rng.as_mut() {
            None => free[0],
            Some(r) => free[r.gen_range(0..free.len())],
        };
        let f = edge_faces[&e][0];
        faces.remove(&f);
        for fe in f.edges() {
            let entry = edge_faces.get_mut(&fe).expect("edge present");
            entry.retain(|g| *g != f);
        }
        edge_faces.remove(&e);
        removed.push((e, f));
    }
    let core_faces: Vec<Face> = faces.iter().copied().collect();
    let core = if core_faces.is_empty() {
        Complex2::from_parts(BTreeSet::new(), BTreeSet::new(), BTreeSet::new(), false).unwrap()
    } else {
        // reuse the pure-subcomplex constructor of the original complex
        c.induced_subcomplex(&core_faces).expect("faces of c")
    };
    let residual_edges: BTreeSet<Edge> = edge_faces
        .iter()
        .filter(|(_, fs)| fs.is_empty())
        .map(|(e, _)| *e)
        .collect();
    let residual_graph = Graph::from_edges(residual_edges.clone());
    let outcome = if core.f() == 0 {
        CollapseOutcome::Graph
    } else if residual_edges.is_empty() {
        CollapseOutcome::ClosedCore
    } else {
        CollapseOutcome::Mixed
    };
    let mut end_edges: BTreeSet<Edge> = residual_edges;
    end_edges.extend(core.edges().iter().copied());
    let end_state = Complex2::from_parts(
        c.vertices().clone(),
        end_edges,
        faces,
        false,
    )
    .expect("collapse preserves containment invariants");
    CollapseResult {
        core,
        removed,
        outcome,
        residual_graph,
        end_state,
    }
}

/// A vertex-level simplicial map between two complexes.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimplicialMap {
    pub source: Complex2,
    pub target: Complex2,
    pub assignment: BTreeMap<Vertex, Vertex>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ImageSimplex {
    Vertex(Vertex),
    Edge(Edge),
    Face(Face),
}

impl SimplicialMap {
    pub fn image_of_face(&self, f: &Face) -> ImageSimplex {
        let [a, b, c] = f.vertices();
        let mut img = [self.assignment[&a], self.assignment[&b], self.assignment[&c]];
        img.sort_unstable();
        if img[0] == img[1] && img[1] == img[2] {
            ImageSimplex::Vertex(img[0])
        } else if img[0] == img[1] || img[1] == img[2] {
            let (x, y) = if img[0] == img[1] {
                (img[0], img[2])
            } else {
                (img[0], img[1])
            };
            ImageSimplex::Edge(Edge::new(x, y))
        } else {
            ImageSimplex::Face(Face::new(img[0], img[1], img[2]))
        }
    }

    pub fn image_of_edge(&self, e: &Edge) -> ImageSimplex {
        let (a, b) = e.endpoints();
        let (x, y) = (self.assignment[&a], self.assignment[&b]);
        if x == y {
            ImageSimplex::Vertex(x)
        } else {
            ImageSimplex::Edge(Edge::new(x, y))
        }
    }
}

/// Why a quotient or map fails to be regular.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegularityViolation {
    /// A source edge or face loses dimension under the map.
    DegenerateSimplex { simplex: ImageSimplex, source_face: Option<Face>, source_edge: Option<Edge> },
    /// Two distinct source faces with the same image share an edge.
    SharedEdgeImages {
        first: Face,
        second: Face,
        shared_edge: Edge,
    },
    /// Some target simplex is not an image (maps only; quotients are
    /// surjective by construction).
    NotSurjective { description: String },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuotientSpec {
    pub partition: Vec<Vec<Vertex>>,
    pub map: SimplicialMap,
    pub regular: bool,
    pub violation: Option<RegularityViolation>,
    /// Diagnostic: how many target edges are hit by more than one source edge.
    pub duplicate_edge_images: u64,
}

/// Quotient a complex by a vertex partition (classes map to their smallest
/// member). Builds the image complex — faces that stay faces, edges that stay
/// edges, plus edges arising from collapsed faces — and checks regularity:
/// (1) no edge or face loses dimension; (2) distinct faces with equal images
/// meet in at most a vertex.
pub fn quotient_by_partition(c: &Complex2, partition: &[Vec<Vertex>]) -> Result<QuotientSpec> {
    let mut assignment: BTreeMap<Vertex, Vertex> = BTreeMap::new();
    for class in partition {
        if class.is_empty() {
            return Err(Error::InvalidPartition("empty class".to_string()));
        }
        let rep = *class.iter().min().unwrap();
        for &v in class {
            if !c.contains_vertex(v) {
                return Err(Error::InvalidPartition(format!("vertex {v} not in complex")));
            }
            if assignment.insert(v, rep).is_some() {
                return Err(Error::InvalidPartition(format!("vertex {v} in two classes")));
            }
        }
    }
    for &v in c.vertices() {
        if !assignment.contains_key(&v) {
            return Err(Error::InvalidPartition(format!("vertex {v} not covered")));
        }
    }

    // build the image complex
    let target_vertices: BTreeSet<Vertex> = assignment.values().copied().collect();
    let mut target_edges: BTreeSet<Edge> = BTreeSet::new();
    let mut target_faces: BTreeSet<Face> = BTreeSet::new();
    let mut violation: Option<RegularityViolation> = None;
    for e in c.edges() {
        let (a, b) = e.endpoints();
        let (x, y) = (assignment[&a], assignment[&b]);
        if x == y {
            violation.get_or_insert(RegularityViolation::DegenerateSimplex {
                simplex: ImageSimplex::Vertex(x),
                source_face: None,
                source_edge: Some(*e),
            });
        } else {
            target_edges.insert(Edge::new(x, y));
        }
    }
    let mut image_groups: BTreeMap<Face, Vec<Face>> = BTreeMap::new();
    for f in c.faces() {
        let [a, b, v] = f.vertices();
        let mut img = [assignment[&a], assignment[&b], assignment[&v]];
        img.sort_unstable();
        if img[0] == img[1] || img[1] == img[2] {
            let degenerate = if img[0] == img[2] {
                ImageSimplex::Vertex(img[0])
            } else if img[0] == img[1] {
                ImageSimplex::Edge(Edge::new(img[0], img[2]))
            } else {
                ImageSimplex::Edge(Edge::new(img[0], img[1]))
            };
            if let ImageSimplex::Edge(e) = degenerate {
                target_edges.insert(e);
            }
            violation.get_or_insert(RegularityViolation::DegenerateSimplex {
                simplex: degenerate,
                source_face: Some(*f),
                source_edge: None,
            });
        } else {
            let img_face = Face::new(img[0], img[1], img[2]);
            target_faces.insert(img_face);
            for e in img_face.edges() {
                target_edges.insert(e);
            }
            image_groups.entry(img_face).or_default().push(*f);
        }
    }
    if violation.is_none() {
        'outer: for group in image_groups.values() {
            for i in 0..group.len() {
                for j in i + 1..group.len() {
                    if group[i].shared_vertices(&group[j]) >= 2 {
                        let shared: Vec<Vertex> = group[i]
                            .vertices()
                            .into_iter()
                            .filter(|v| group[j].contains(*v))
                            .collect();
                        violation = Some(RegularityViolation::SharedEdgeImages {
                            first: group[i],
                            second: group[j],
                            shared_edge: Edge::new(shared[0], shared[1]),
                        });
                        break 'outer;
                    }
                }
            }
        }
    }

    // count source edges per nondegenerate image edge (diagnostic)
    let mut edge_image_counts: BTreeMap<Edge, u64> = BTreeMap::new();
    for e in c.edges() {
        let (a, b) = e.endpoints();
        let (x, y) = (assignment[&a], assignment[&b]);
        if x != y {
            *edge_image_counts.entry(Edge::new(x, y)).or_insert(0) += 1;
        }
    }
    let duplicate_edge_images = edge_image_counts.values().filter(|n| **n > 1).count() as u64;

    let target = Complex2::from_parts(target_vertices, target_edges, target_faces, false)?;
    let regular = violation.is_none();
    Ok(QuotientSpec {
        partition: partition.to_vec(),
        map: SimplicialMap {
            source: c.clone(),
            target,
            assignment,
        },
        regular,
        violation,
        duplicate_edge_images,
    })
}

/// Check an arbitrary simplicial map for regularity: surjective, dimension
/// preserving on edges and faces, and no two distinct faces with equal images
/// sharing an edge. Errors if the map is not simplicial at all (some
/// nondegenerate image misses the target).
pub fn is_regular_quotient(map: &SimplicialMap) -> Result<(bool, Option<RegularityViolation>)> {
    for &v in map.source.vertices() {
        let img = *map
            .assignment
            .get(&v)
            .ok_or_else(|| Error::NonSimplicialMap(format!("vertex {v} unassigned")))?;
        if !map.target.contains_vertex(img) {
            return Err(Error::NonSimplicialMap(format!(
                "vertex {v} maps to {img}, which is not a target vertex"
            )));
        }
    }
    let mut violation: Option<RegularityViolation> = None;
    for e in map.source.edges() {
        match map.image_of_edge(e) {
            ImageSimplex::Edge(img) => {
                if !map.target.contains_edge(&img) {
                    let (a, b) = img.endpoints();
                    return Err(Error::NonSimplicialMap(format!(
                        "edge image ({a} {b}) is not a target edge"
                    )));
                }
            }
            degenerate => {
                violation.get_or_insert(RegularityViolation::DegenerateSimplex {
                    simplex: degenerate,
                    source_face: None,
                    source_edge: Some(*e),
                });
            }
        }
    }
    let mut image_groups: BTreeMap<Face, Vec<Face>> = BTreeMap::new();
    for f in map.source.faces() {
        match map.image_of_face(f) {
            ImageSimplex::Face(img) => {
                if !map.target.contains_face(&img) {
                    let [a, b, c] = img.vertices();
                    return Err(Error::NonSimplicialMap(format!(
                        "face image ({a} {b} {c}) is not a target face"
                    )));
                }
                image_groups.entry(img).or_default().push(*f);
            }
            degenerate => {
                violation.get_or_insert(RegularityViolation::DegenerateSimplex {
                    simplex: degenerate,
                    source_face: Some(*f),
                    source_edge: None,
                });
            }
        }
    }
    if violation.is_none() {
        'outer: for group in image_groups.values() {
            for i in 0..group.len() {
                for j in i + 1..group.len() {
                    if group[i].shared_vertices(&group[j]) >= 2 {
                        let shared: Vec<Vertex> = group[i]
                            .vertices()
                            .into_iter()
                            .filter(|v| group[j].contains(*v))
                            .collect();
                        violation = Some(RegularityViolation::SharedEdgeImages {
                            first: group[i],
                            second: group[j],
                            shared_edge: Edge::new(shared[0], shared[1]),
                        });
                        break 'outer;
                    }
                }
            }
        }
    }
    if violation.is_none() {
        // surjectivity onto vertices, edges, faces
        let image_vertices: BTreeSet<Vertex> = map.assignment.values().copied().collect();
        if let Some(missing) = map.target.vertices().iter().find(|v| !image_vertices.contains(v)) {
            violation = Some(RegularityViolation::NotSurjective {
                description: format!("target vertex {missing} is not an image"),
            });
        }
    }
    if violation.is_none() {
        let image_edges: BTreeSet<Edge> = map
            .source
            .edges()
            .iter()
            .filter_map(|e| match map.image_of_edge(e) {
                ImageSimplex::Edge(img) => Some(img),
                _ => None,
            })
            .collect();
        if let Some(missing) = map.target.edges().iter().find(|e| !image_edges.contains(e)) {
            let (a, b) = missing.endpoints();
            violation = Some(RegularityViolation::NotSurjective {
                description: format!("target edge ({a} {b}) is not an image"),
            });
        }
    }
    if violation.is_none() {
        let image_faces: BTreeSet<Face> = map
            .source
            .faces()
            .iter()
            .filter_map(|f| match map.image_of_face(f) {
                ImageSimplex::Face(img) => Some(img),
                _ => None,
            })
            .collect();
        if let Some(missing) = map.target.faces().iter().find(|f| !image_faces.contains(f)) {
            let [a, b, c] = missing.vertices();
            violation = Some(RegularityViolation::NotSurjective {
                description: format!("target face ({a} {b} {c}) is not an image"),
            });
        }
    }
    Ok((violation.is_none(), violation))
}

/// A regular quotient found by enumeration, with the partition that produced
/// it (first in enumeration order among isomorphic duplicates).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegularQuotient {
    pub complex: Complex2,
    pub partition: Vec<Vec<Vertex>>,
}

pub const DEFAULT_QUOTIENT_FACE_CAP: usize = 30;

pub fn enumerate_regular_quotients(c: &Complex2, max_merges: u32) -> Result<Vec<RegularQuotient>> {
    enumerate_regular_quotients_with_cap(c, max_merges, DEFAULT_QUOTIENT_FACE_CAP)
}

/// All regular quotient complexes reachable by merging at most `max_merges`
/// vertex pairs (a partition into n - j classes costs j merges), one per
/// isomorphism class, trivial quotient included. Classes must be independent
/// sets in the 1-skeleton — merging adjacent vertices always degenerates an
/// edge — which prunes the partition walk hard.
pub fn enumerate_regular_quotients_with_cap(
    c: &Complex2,
    max_merges: u32,
    face_cap: usize,
) -> Result<Vec<RegularQuotient>> {
    if c.f() > face_cap {
        return Err(Error::CapExceeded {
            what: "faces for quotient enumeration",
            have: c.f(),
            cap: face_cap,
        });
    }
    let verts: Vec<Vertex> = c.vertices().iter().copied().collect();
    let adjacent = |a: Vertex, b: Vertex| c.contains_edge(&Edge::new(a, b));
    let mut found: Vec<RegularQuotient> = Vec::new();
    let mut seen: BTreeSet<Vec<u8>> = BTreeSet::new();
    let mut classes: Vec<Vec<Vertex>> = Vec::new();

    fn walk(
        verts: &[Vertex],
        next: usize,
        classes: &mut Vec<Vec<Vertex>>,
        merges: u32,
        max_merges: u32,
        adjacent: &dyn Fn(Vertex, Vertex) -> bool,
        complete: &mut dyn FnMut(&[Vec<Vertex>]),
    ) {
        if next == verts.len() {
            complete(classes);
            return;
        }
        let v = verts[next];
        // join an existing class (costs one merge)
        if merges < max_merges {
            for i in 0..classes.len() {
                if classes[i].iter().any(|&u| adjacent(u, v)) {
                    continue;
                }
                classes[i].push(v);
                walk(verts, next + 1, classes, merges + 1, max_merges, adjacent, complete);
                classes[i].pop();
            }
        }
        // open a new class
        classes.push(vec![v]);
        walk(verts, next + 1, classes, merges, max_merges, adjacent, complete);
        classes.pop();
    }

    let mut complete = |classes: &[Vec<Vertex>]| {
        let spec = quotient_by_partition(c, classes).expect("partition is valid by construction");
        if spec.regular {
            let label = canonical_form(&spec.map.target);
            if seen.insert(label) {
                found.push(RegularQuotient {
                    complex: spec.map.target,
                    partition: classes.to_vec(),
                });
            }
        }
    };
    walk(&verts, 0, &mut classes, 0, max_merges, &adjacent, &mut complete);
    Ok(found)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::SurfaceName;
    use crate::invariants::{mu, Rational};

    #[test]
    fn catalog_shapes_check_out() {
        let expect: &[(&str, usize, usize, usize, i64)] = &[
            ("tetrahedron", 4, 6, 4, 2),
            ("bipyramid5", 5, 9, 6, 2),
            ("octahedron", 6, 12, 8, 2),
            ("icosahedron", 12, 30, 20, 2),
            ("rp2_six", 6, 15, 10, 1),
            ("sigma1", 7, 12, 8, 3),
            ("sigma2", 6, 11, 8, 3),
            ("sigma3", 5, 9, 7, 3),
        ];
        for &(name, v, e, f, chi) in expect {
            let c = catalog(name).unwrap();
            assert_eq!((c.v(), c.e(), c.f()), (v, e, f), "{name}");
            assert_eq!(c.euler_characteristic(), chi, "{name}");
        }
        assert!(matches!(catalog("cube"), Err(Error::UnknownCatalog(_))));
    }

    #[test]
    fn catalog_surfaces_classify_correctly() {
        for name in ["tetrahedron", "bipyramid5", "octahedron", "icosahedron"] {
            assert_eq!(
                catalog(name).unwrap().classify_surface().surface_name,
                SurfaceName::Sphere,
                "{name}"
            );
        }
        assert_eq!(
            catalog("rp2_six").unwrap().classify_surface().surface_name,
            SurfaceName::ProjectivePlane
        );
        let ico = catalog("icosahedron").unwrap();
        assert!(ico.vertex_degrees().values().all(|d| *d == 5));
    }

    #[test]
    fn catalog_densities() {
        let expect = [
            ("bipyramid5", Rational::new(5, 6)),
            ("rp2_six", Rational::new(3, 5)),
            ("sigma1", Rational::new(7, 8)),
            ("sigma2", Rational::new(3, 4)),
            ("sigma3", Rational::new(5, 7)),
        ];
        for (name, want) in expect {
            assert_eq!(mu(&catalog(name).unwrap()).unwrap(), want, "{name}");
        }
    }

    #[test]
    fn minimal_sphere_is_the_tetrahedron() {
        let s = random_sphere_triangulation(4, 99).unwrap();
        assert!(crate::canonical::are_isomorphic(&s, &catalog("tetrahedron").unwrap()));
    }

    #[test]
    fn sphere_generator_counts_and_classification() {
        for (v, seed) in [(5u32, 0u64), (9, 1), (20, 2), (30, 1), (57, 3)] {
            let s = random_sphere_triangulation(v, seed).unwrap();
            assert_eq!(s.v(), v as usize);
            assert_eq!(s.f(), 2 * v as usize - 4, "f = 2v - 4");
            assert_eq!(s.e(), 3 * v as usize - 6, "e = 3v - 6");
            assert_eq!(s.classify_surface().surface_name, SurfaceName::Sphere);
        }
    }

    #[test]
    fn sphere_generator_is_deterministic_per_seed() {
        let a = random_sphere_triangulation(25, 7).unwrap();
        let b = random_sphere_triangulation(25, 7).unwrap();
        assert_eq!(a, b);
        let c = random_sphere_triangulation(25, 8).unwrap();
        assert_ne!(a, c, "different seeds should give different spheres");
    }

    #[test]
    fn sphere_generator_rejects_tiny() {
        assert!(random_sphere_triangulation(3, 0).is_err());
    }

    #[test]
    fn grid_torus_shapes() {
        let t = grid_torus_triangulation(4, 4).unwrap();
        assert_eq!((t.v(), t.f()), (16, 32));
        assert_eq!(t.euler_characteristic(), 0);
        let info = t.classify_surface();
        assert!(info.is_closed_surface && info.orientable);
        assert_eq!(info.surface_name, SurfaceName::Torus);
        let t = grid_torus_triangulation(3, 5).unwrap();
        assert_eq!((t.v(), t.f()), (15, 30));
        assert_eq!(t.classify_surface().surface_name, SurfaceName::Torus);
        assert!(matches!(
            grid_torus_triangulation(2, 4),
            Err(Error::NonSimplicialTorus(2, 4))
        ));
    }

    #[test]
    fn flip_perturbation_preserves_surface() {
        let t = grid_torus_triangulation(4, 5).unwrap();
        let p = flip_perturbation(&t, 60, 5).unwrap();
        assert_eq!(p.classify_surface().surface_name, SurfaceName::Torus);
        assert_eq!(p.v(), t.v());
        assert_ne!(p, t, "60 attempts should land at least one flip");
        let s = random_sphere_triangulation(12, 0).unwrap();
        let ps = flip_perturbation(&s, 40, 9).unwrap();
        assert_eq!(ps.classify_surface().surface_name, SurfaceName::Sphere);
        assert!(flip_perturbation(&catalog("sigma3").unwrap(), 5, 0).is_err());
    }

    #[test]
    fn collapse_of_triangle_leaves_two_residual_edges() {
        let c = Complex2::from_faces(&[(1, 2, 3)]).unwrap();
        let r = collapse(&c);
        assert_eq!(r.outcome, CollapseOutcome::Graph);
        assert_eq!(r.removed, vec![(Edge::new(1, 2), Face::new(1, 2, 3))]);
        assert_eq!(r.residual_graph.edges.len(), 2);
        assert_eq!(r.core.f(), 0);
    }

    #[test]
    fn collapse_of_tetrahedron_is_identity() {
        let c = catalog("tetrahedron").unwrap();
        let r = collapse(&c);
        assert_eq!(r.outcome, CollapseOutcome::ClosedCore);
        assert!(r.removed.is_empty());
        assert_eq!(r.core, c);
    }

    #[test]
    fn collapse_of_disc_follows_lexicographic_order() {
        // cone with apex 1 over the 4-cycle 2-3-4-5
        let c = Complex2::from_faces(&[(1, 2, 3), (1, 3, 4), (1, 4, 5), (1, 2, 5)]).unwrap();
        let r = collapse(&c);
        assert_eq!(r.outcome, CollapseOutcome::Graph);
        assert_eq!(
            r.removed,
            vec![
                (Edge::new(2, 3), Face::new(1, 2, 3)),
                (Edge::new(1, 2), Face::new(1, 2, 5)),
                (Edge::new(1, 3), Face::new(1, 3, 4)),
                (Edge::new(1, 4), Face::new(1, 4, 5)),
            ]
        );
        let residual: Vec<Edge> = r.residual_graph.edges.iter().copied().collect();
        assert_eq!(
            residual,
            vec![Edge::new(1, 5), Edge::new(2, 5), Edge::new(3, 4), Edge::new(4, 5)]
        );
    }

    #[test]
    fn collapse_is_idempotent() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..40 {
            let c = crate::complex_test_support::random_small_complex(&mut rng, 8, 12);
            let once = collapse(&c);
            let twice = collapse(&once.end_state);
            assert_eq!(once.core, twice.core);
            assert!(twice.removed.is_empty());
        }
    }

    #[test]
    fn collapse_core_is_order_independent() {
        let mut rng = ChaCha8Rng::seed_from_u64(18);
        for trial in 0..30 {
            let c = crate::complex_test_support::random_small_complex(&mut rng, 8, 12);
            let lex = collapse(&c);
            let rnd = collapse_with_order(&c, CollapseOrder::Seeded(trial));
            assert_eq!(lex.core, rnd.core, "core must not depend on removal order");
        }
    }

    #[test]
    fn quotient_identity_is_regular() {
        let c = catalog("octahedron").unwrap();
        let partition: Vec<Vec<Vertex>> = c.vertices().iter().map(|v| vec![*v]).collect();
        let q = quotient_by_partition(&c, &partition).unwrap();
        assert!(q.regular);
        assert_eq!(q.map.target, c);
        assert_eq!(q.duplicate_edge_images, 0);
    }

    #[test]
    fn quotient_rejects_bad_partitions() {
        let c = catalog("tetrahedron").unwrap();
        assert!(quotient_by_partition(&c, &[vec![1, 2, 3, 4], vec![4]]).is_err());
        assert!(quotient_by_partition(&c, &[vec![1, 2, 3]]).is_err());
        assert!(quotient_by_partition(&c, &[vec![1, 2, 3, 4, 9]]).is_err());
    }

    #[test]
    fn merging_adjacent_vertices_degenerates() {
        let c = Complex2::from_faces(&[(1, 2, 3)]).unwrap();
        let q = quotient_by_partition(&c, &[vec![1, 2], vec![3]]).unwrap();
        assert!(!q.regular);
        assert!(matches!(
            q.violation,
            Some(RegularityViolation::DegenerateSimplex { .. })
        ));
    }

    #[test]
    fn merging_bipyramid_apexes_shares_edge_images() {
        let c = catalog("bipyramid5").unwrap();
        let q = quotient_by_partition(&c, &[vec![1], vec![2], vec![3], vec![4, 5]]).unwrap();
        assert!(!q.regular);
        match q.violation {
            Some(RegularityViolation::SharedEdgeImages { first, second, .. }) => {
                assert_eq!(first.shared_vertices(&second), 2);
            }
            other => panic!("expected shared edge images, got {other:?}"),
        }
    }

    #[test]
    fn octahedron_antipodal_quotient_is_rejected() {
        let c = catalog("octahedron").unwrap();
        // antipodal pairs (1,6), (2,4), (3,5)
        let q = quotient_by_partition(&c, &[vec![1, 6], vec![2, 4], vec![3, 5]]).unwrap();
        assert!(!q.regular, "adjacent faces share images and an edge");
        assert!(matches!(
            q.violation,
            Some(RegularityViolation::SharedEdgeImages { .. })
        ));
        // and enumeration therefore finds only the trivial quotient
        let all = enumerate_regular_quotients(&c, 3).unwrap();
        assert_eq!(all.len(), 1);
        assert_eq!(all[0].complex, c);
    }

    #[test]
    fn torus_admits_a_nontrivial_regular_quotient() {
        let t = grid_torus_triangulation(4, 4).unwrap();
        // vertices (0,0) -> 1 and (2,2) -> 11 are far apart: no common face,
        // not adjacent, so merging them is regular
        let mut partition: Vec<Vec<Vertex>> = t
            .vertices()
            .iter()
            .filter(|v| **v != 1 && **v != 11)
            .map(|v| vec![*v])
            .collect();
        partition.push(vec![1, 11]);
        let q = quotient_by_partition(&t, &partition).unwrap();
        assert!(q.regular, "{:?}", q.violation);
        assert_eq!(q.map.target.v(), 15);
        assert_eq!(q.map.target.f(), 32);
        // source edge degrees never exceed the degree of their image
        let src_deg = t.edge_degrees();
        let tgt_deg = q.map.target.edge_degrees();
        for e in t.edges() {
            if let ImageSimplex::Edge(img) = q.map.image_of_edge(e) {
                assert!(src_deg[e] <= tgt_deg[&img]);
            }
        }
    }

    #[test]
    fn is_regular_quotient_matches_quotient_flag() {
        let c = catalog("bipyramid5").unwrap();
        let good = quotient_by_partition(&c, &c.vertices().iter().map(|v| vec![*v]).collect::<Vec<_>>()).unwrap();
        let (ok, viol) = is_regular_quotient(&good.map).unwrap();
        assert!(ok && viol.is_none());
        let bad = quotient_by_partition(&c, &[vec![1], vec![2], vec![3], vec![4, 5]]).unwrap();
        let (ok, viol) = is_regular_quotient(&bad.map).unwrap();
        assert!(!ok && viol.is_some());
    }

    #[test]
    fn is_regular_quotient_detects_non_surjective_maps() {
        let tri = Complex2::from_faces(&[(1, 2, 3)]).unwrap();
        let two = Complex2::from_faces(&[(1, 2, 3), (4, 5, 6)]).unwrap();
        let map = SimplicialMap {
            source: tri.clone(),
            target: two,
            assignment: [(1, 1), (2, 2), (3, 3)].into_iter().collect(),
        };
        let (ok, viol) = is_regular_quotient(&map).unwrap();
        assert!(!ok);
        assert!(matches!(viol, Some(RegularityViolation::NotSurjective { .. })));
    }

    #[test]
    fn is_regular_quotient_errors_on_non_simplicial() {
        let tri = Complex2::from_faces(&[(1, 2, 3)]).unwrap();
        let path = Complex2::build(&[], &[(1, 2), (2, 3), (1, 3)]).unwrap();
        let map = SimplicialMap {
            source: tri,
            target: path,
            assignment: [(1, 1), (2, 2), (3, 3)].into_iter().collect(),
        };
        assert!(matches!(is_regular_quotient(&map), Err(Error::NonSimplicialMap(_))));
    }

    #[test]
    fn enumeration_respects_caps_and_includes_trivial() {
        let c = catalog("tetrahedron").unwrap();
        let all = enumerate_regular_quotients(&c, 2).unwrap();
        assert_eq!(all.len(), 1, "complete 1-skeleton admits no merges");
        assert!(matches!(
            enumerate_regular_quotients_with_cap(&c, 1, 2),
            Err(Error::CapExceeded { .. })
        ));
        let t = grid_torus_triangulation(4, 4).unwrap();
        let quotients = enumerate_regular_quotients_with_cap(&t, 1, 40).unwrap();
        assert!(quotients.len() > 1, "the distant-merge quotient shows up");
        assert!(quotients.iter().any(|q| q.complex.v() == 16));
        assert!(quotients.iter().any(|q| q.complex.v() == 15));
    }
}
