//! The core container: a finite 2-dimensional simplicial complex given by its
//! vertices, edges and triangle faces, plus the structural queries everything
//! else is built from (stars, links, Euler characteristic, free edges, surface
//! classification, induced subcomplexes).

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Vertex identifier. Ids are arbitrary positive integers and need not be
/// contiguous; all orderings below are by id.
pub type Vertex = u32;

/// Unordered pair of distinct vertices, stored with the smaller id first.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Edge(Vertex, Vertex);

impl Edge {
    /// Panics if `a == b`; callers validate untrusted input first.
    pub fn new(a: Vertex, b: Vertex) -> Edge {
        assert!(a != b, "edge endpoints must be distinct");
        if a < b {
            Edge(a, b)
        } else {
            Edge(b, a)
        }
    }

    pub fn try_new(a: Vertex, b: Vertex) -> Result<Edge> {
        if a == b {
            return Err(Error::DegenerateEdge(a));
        }
        Ok(Edge::new(a, b))
    }

    pub fn endpoints(&self) -> (Vertex, Vertex) {
        (self.0, self.1)
    }

    pub fn contains(&self, v: Vertex) -> bool {
        self.0 == v || self.1 == v
    }

    /// The endpoint that is not `v`, if `v` is an endpoint at all.
    pub fn other(&self, v: Vertex) -> Option<Vertex> {
        if self.0 == v {
            Some(self.1)
        } else if self.1 == v {
            Some(self.0)
        } else {
            None
        }
    }
}

/// Unordered triple of distinct vertices, stored sorted.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Face(Vertex, Vertex, Vertex);

impl Face {
    /// Panics on repeated vertices; callers validate untrusted input first.
    pub fn new(a: Vertex, b: Vertex, c: Vertex) -> Face {
        Face::try_new(a, b, c).expect("face vertices must be pairwise distinct")
    }

    pub fn try_new(a: Vertex, b: Vertex, c: Vertex) -> Result<Face> {
        if a == b || a == c || b == c {
            return Err(Error::DegenerateFace(a, b, c));
        }
        let mut v = [a, b, c];
        v.sort_unstable();
        Ok(Face(v[0], v[1], v[2]))
    }

    pub fn vertices(&self) -> [Vertex; 3] {
        [self.0, self.1, self.2]
    }

    pub fn edges(&self) -> [Edge; 3] {
        [
            Edge::new(self.0, self.1),
            Edge::new(self.0, self.2),
            Edge::new(self.1, self.2),
        ]
    }

    pub fn contains(&self, v: Vertex) -> bool {
        self.0 == v || self.1 == v || self.2 == v
    }

    pub fn contains_edge(&self, e: &Edge) -> bool {
        self.contains(e.0) && self.contains(e.1)
    }

    /// Number of shared vertices with another face (0..=3).
    pub fn shared_vertices(&self, other: &Face) -> usize {
        self.vertices()
            .iter()
            .filter(|v| other.contains(**v))
            .count()
    }

    /// The vertex opposite the given edge, if the edge lies in this face.
    pub fn opposite(&self, e: &Edge) -> Option<Vertex> {
        if !self.contains_edge(e) {
            return None;
        }
        self.vertices().into_iter().find(|v| !e.contains(*v))
    }
}

/// A finite 2-dimensional simplicial complex. Immutable once built; every
/// construction path validates that face edges are present, edge endpoints are
/// vertices, and all simplices are non-degenerate. Bare edges (edges in no
/// face) and isolated vertices are allowed.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Complex2 {
    vertices: BTreeSet<Vertex>,
    edges: BTreeSet<Edge>,
    faces: BTreeSet<Face>,
    /// Model metadata: true when the complex was built with every possible
    /// edge on its vertex set (as in the random-complex sampler).
    includes_full_1_skeleton: bool,
}

impl Complex2 {
    /// Build from a face list plus optional bare edges. Edges of faces are
    /// derived automatically; duplicate edges collapse silently, but a
    /// repeated face is an error (it almost always signals a typo in input).
    pub fn build(faces: &[(Vertex, Vertex, Vertex)], extra_edges: &[(Vertex, Vertex)]) -> Result<Complex2> {
        let mut face_set = BTreeSet::new();
        for &(a, b, c) in faces {
            let f = Face::try_new(a, b, c)?;
            if !face_set.insert(f) {
                return Err(Error::DuplicateFace(a, b, c));
            }
        }
        let mut edge_set = BTreeSet::new();
        for f in &face_set {
            edge_set.extend(f.edges());
        }
        for &(a, b) in extra_edges {
            edge_set.insert(Edge::try_new(a, b)?);
        }
        let mut vertex_set = BTreeSet::new();
        for e in &edge_set {
            vertex_set.insert(e.0);
            vertex_set.insert(e.1);
        }
        Ok(Complex2 {
            vertices: vertex_set,
            edges: edge_set,
            faces: face_set,
            includes_full_1_skeleton: false,
        })
    }

    pub fn from_faces(faces: &[(Vertex, Vertex, Vertex)]) -> Result<Complex2> {
        Complex2::build(faces, &[])
    }

    /// Assemble from explicit parts, validating the containment invariants.
    /// Allows isolated vertices, which the face-list builder cannot express.
    pub fn from_parts(
        vertices: BTreeSet<Vertex>,
        edges: BTreeSet<Edge>,
        faces: BTreeSet<Face>,
        includes_full_1_skeleton: bool,
    ) -> Result<Complex2> {
        for f in &faces {
            for e in f.edges() {
                if !edges.contains(&e) {
                    let (a, b) = e.endpoints();
                    return Err(Error::ParameterOutOfRange(format!(
                        "face edge ({a} {b}) missing from edge set"
                    )));
                }
            }
        }
        for e in &edges {
            if !vertices.contains(&e.0) || !vertices.contains(&e.1) {
                let (a, b) = e.endpoints();
                return Err(Error::ParameterOutOfRange(format!(
                    "edge endpoint of ({a} {b}) missing from vertex set"
                )));
            }
        }
        Ok(Complex2 {
            vertices,
            edges,
            faces,
            includes_full_1_skeleton,
        })
    }

    pub fn vertices(&self) -> &BTreeSet<Vertex> {
        &self.vertices
    }

    pub fn edges(&self) -> &BTreeSet<Edge> {
        &self.edges
    }

    pub fn faces(&self) -> &BTreeSet<Face> {
        &self.faces
    }

    pub fn v(&self) -> usize {
        self.vertices.len()
    }

    pub fn e(&self) -> usize {
        self.edges.len()
    }

    pub fn f(&self) -> usize {
        self.faces.len()
    }

    pub fn includes_full_1_skeleton(&self) -> bool {
        self.includes_full_1_skeleton
    }

    pub fn contains_vertex(&self, v: Vertex) -> bool {
        self.vertices.contains(&v)
    }

    pub fn contains_edge(&self, e: &Edge) -> bool {
        self.edges.contains(e)
    }

    pub fn contains_face(&self, f: &Face) -> bool {
        self.faces.contains(f)
    }

    /// Number of faces containing each edge. Edges in no face map to 0.
    pub fn edge_degrees(&self) -> BTreeMap<Edge, u32> {
        let mut deg: BTreeMap<Edge, u32> = self.edges.iter().map(|e| (*e, 0)).collect();
        for f in &self.faces {
            for e in f.edges() {
                *deg.get_mut(&e).expect("face edge present") += 1;
            }
        }
        deg
    }

    /// Number of edges at each vertex (degree in the 1-skeleton).
    pub fn vertex_degrees(&self) -> BTreeMap<Vertex, u32> {
        let mut deg: BTreeMap<Vertex, u32> = self.vertices.iter().map(|v| (*v, 0)).collect();
        for e in &self.edges {
            *deg.get_mut(&e.0).unwrap() += 1;
            *deg.get_mut(&e.1).unwrap() += 1;
        }
        deg
    }

    /// Number of faces at each vertex.
    pub fn vertex_face_degrees(&self) -> BTreeMap<Vertex, u32> {
        let mut deg: BTreeMap<Vertex, u32> = self.vertices.iter().map(|v| (*v, 0)).collect();
        for f in &self.faces {
            for v in f.vertices() {
                *deg.get_mut(&v).unwrap() += 1;
            }
        }
        deg
    }

    pub fn faces_at(&self, v: Vertex) -> Vec<Face> {
        self.faces.iter().filter(|f| f.contains(v)).copied().collect()
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.v() as i64 - self.e() as i64 + self.f() as i64
    }

    /// Edges contained in exactly one face. Bare edges (zero faces) are not
    /// free; they never take part in a collapse.
    pub fn free_edges(&self) -> BTreeSet<Edge> {
        self.edge_degrees()
            .into_iter()
            .filter(|(_, d)| *d == 1)
            .map(|(e, _)| e)
            .collect()
    }

    /// A complex is pure (of dimension 2) when it is a union of faces:
    /// every edge and every vertex lies in some face. The empty complex is
    /// pure; a nonempty complex with no faces is not.
    pub fn is_pure(&self) -> bool {
        if self.faces.is_empty() {
            return self.edges.is_empty() && self.vertices.is_empty();
        }
        let covered_edges: BTreeSet<Edge> = self.faces.iter().flat_map(|f| f.edges()).collect();
        if covered_edges.len() != self.edges.len() {
            return false;
        }
        let covered_vertices: BTreeSet<Vertex> =
            self.faces.iter().flat_map(|f| f.vertices()).collect();
        covered_vertices.len() == self.vertices.len()
    }

    pub fn is_closed(&self) -> bool {
        self.is_pure() && self.free_edges().is_empty()
    }

    /// Star of a vertex: the pure subcomplex spanned by the faces containing it.
    pub fn star(&self, x: Vertex) -> Result<Complex2> {
        if !self.contains_vertex(x) {
            return Err(Error::UnknownVertex(x));
        }
        let faces = self.faces_at(x);
        pure_from_faces(&faces)
    }

    /// Link of a vertex: the graph with an edge {a, b} for every face
    /// {x, a, b}, together with a coarse shape classification.
    pub fn link(&self, x: Vertex) -> Result<(Graph, LinkShape)> {
        if !self.contains_vertex(x) {
            return Err(Error::UnknownVertex(x));
        }
        let mut edges = BTreeSet::new();
        for f in self.faces.iter().filter(|f| f.contains(x)) {
            let rest: Vec<Vertex> = f.vertices().into_iter().filter(|v| *v != x).collect();
            edges.insert(Edge::new(rest[0], rest[1]));
        }
        let graph = Graph::from_edges(edges);
        let shape = graph.shape();
        Ok((graph, shape))
    }

    /// Pure subcomplex spanned by a nonempty subset of faces.
    pub fn induced_subcomplex(&self, faces: &[Face]) -> Result<Complex2> {
        if faces.is_empty() {
            return Err(Error::EmptyFaceSubset);
        }
        for f in faces {
            if !self.contains_face(f) {
                let [a, b, c] = f.vertices();
                return Err(Error::ForeignFace(a, b, c));
            }
        }
        pure_from_faces(faces)
    }

    /// Connected components of the whole complex (via the 1-skeleton;
    /// isolated vertices are their own components).
    pub fn connected_component_count(&self) -> usize {
        let idx: HashMap<Vertex, usize> =
            self.vertices.iter().enumerate().map(|(i, v)| (*v, i)).collect();
        let mut dsu = Dsu::new(self.vertices.len());
        for e in &self.edges {
            dsu.union(idx[&e.0], idx[&e.1]);
        }
        dsu.component_count()
    }

    pub fn is_connected(&self) -> bool {
        !self.vertices.is_empty() && self.connected_component_count() == 1
    }

    /// Decide whether the complex is a closed surface and, if so, which one.
    /// Closed surface means: nonempty, pure, connected, every edge in exactly
    /// two faces, and every vertex link a cycle. Orientability is decided by
    /// propagating face orientations across shared edges.
    pub fn classify_surface(&self) -> SurfaceInfo {
        let chi = self.euler_characteristic();
        let not_a_surface = SurfaceInfo {
            is_closed_surface: false,
            euler_characteristic: chi,
            orientable: false,
            surface_name: SurfaceName::NotASurface,
        };
        if self.faces.is_empty() || !self.is_pure() || !self.is_connected() {
            return not_a_surface;
        }
        if self.edge_degrees().values().any(|d| *d != 2) {
            return not_a_surface;
        }
        for &v in &self.vertices {
            let (_, shape) = self.link(v).expect("vertex is in the complex");
            if shape != LinkShape::Cycle {
                return not_a_surface;
            }
        }
        let orientable = self.is_orientable_closed();
        let surface_name = match (chi, orientable) {
            (2, true) => SurfaceName::Sphere,
            (0, true) => SurfaceName::Torus,
            (1, false) => SurfaceName::ProjectivePlane,
            (0, false) => SurfaceName::KleinBottle,
            _ => SurfaceName::Other { chi, orientable },
        };
        SurfaceInfo {
            is_closed_surface: true,
            euler_characteristic: chi,
            orientable,
            surface_name,
        }
    }

    /// Orientation propagation over a complex already known to be closed
    /// (every edge degree 2) and connected.
    fn is_orientable_closed(&self) -> bool {
        let faces: Vec<Face> = self.faces.iter().copied().collect();
        let index: HashMap<Face, usize> = faces.iter().enumerate().map(|(i, f)| (*f, i)).collect();
        let mut edge_faces: HashMap<Edge, Vec<usize>> = HashMap::new();
        for (i, f) in faces.iter().enumerate() {
            for e in f.edges() {
                edge_faces.entry(e).or_default().push(i);
            }
        }
        // sign +1: the sorted triple (a, b, c) read cyclically a->b->c->a;
        // sign -1: the reverse. Two faces agree across a shared edge when they
        // induce opposite directions on it.
        let mut sign: Vec<i8> = vec![0; faces.len()];
        let _ = index;
        let mut queue = VecDeque::new();
        sign[0] = 1;
        queue.push_back(0);
        while let Some(i) = queue.pop_front() {
            for e in faces[i].edges() {
                let pair = &edge_faces[&e];
                for &j in pair {
                    if j == i {
                        continue;
                    }
                    let want = if directed_same_way(&faces[i], &faces[j], &e) {
                        -sign[i]
                    } else {
                        sign[i]
                    };
                    if sign[j] == 0 {
                        sign[j] = want;
                        queue.push_back(j);
                    } else if sign[j] != want {
                        return false;
                    }
                }
            }
        }
        true
    }
}

/// True when face `f` and face `g`, both taken with their +1 (sorted cyclic)
/// orientation, induce the same direction on shared edge `e`.
fn directed_same_way(f: &Face, g: &Face, e: &Edge) -> bool {
    fn direction(face: &Face, e: &Edge) -> bool {
        // true when the +1 orientation traverses e from its smaller endpoint
        // to its larger one
        let [a, b, c] = face.vertices();
        let cyc = [(a, b), (b, c), (c, a)];
        for (x, y) in cyc {
            if Edge::new(x, y) == *e {
                return x < y;
            }
        }
        unreachable!("edge not in face")
    }
    direction(f, e) == direction(g, e)
}

fn pure_from_faces(faces: &[Face]) -> Result<Complex2> {
    let face_set: BTreeSet<Face> = faces.iter().copied().collect();
    let mut edges = BTreeSet::new();
    let mut vertices = BTreeSet::new();
    for f in &face_set {
        edges.extend(f.edges());
        vertices.extend(f.vertices());
    }
    Complex2::from_parts(vertices, edges, face_set, false)
}

/// Plain graph used for links and collapse residues.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Graph {
    pub vertices: BTreeSet<Vertex>,
    pub edges: BTreeSet<Edge>,
}

impl Graph {
    pub fn from_edges(edges: BTreeSet<Edge>) -> Graph {
        let mut vertices = BTreeSet::new();
        for e in &edges {
            vertices.insert(e.0);
            vertices.insert(e.1);
        }
        Graph { vertices, edges }
    }

    fn degrees(&self) -> BTreeMap<Vertex, u32> {
        let mut deg: BTreeMap<Vertex, u32> = self.vertices.iter().map(|v| (*v, 0)).collect();
        for e in &self.edges {
            *deg.get_mut(&e.0).unwrap() += 1;
            *deg.get_mut(&e.1).unwrap() += 1;
        }
        deg
    }

    fn is_connected(&self) -> bool {
        if self.vertices.is_empty() {
            return false;
        }
        let idx: HashMap<Vertex, usize> =
            self.vertices.iter().enumerate().map(|(i, v)| (*v, i)).collect();
        let mut dsu = Dsu::new(self.vertices.len());
        for e in &self.edges {
            dsu.union(idx[&e.0], idx[&e.1]);
        }
        dsu.component_count() == 1
    }

    /// Cycle: connected, every degree 2. Path: connected, two endpoints of
    /// degree 1, the rest degree 2 (a single edge counts). Anything else,
    /// including the empty graph, is Other.
    pub fn shape(&self) -> LinkShape {
        if self.edges.is_empty() || !self.is_connected() {
            return LinkShape::Other;
        }
        let degs: Vec<u32> = self.degrees().into_values().collect();
        if degs.iter().all(|d| *d == 2) {
            return LinkShape::Cycle;
        }
        let ones = degs.iter().filter(|d| **d == 1).count();
        if ones == 2 && degs.iter().all(|d| *d == 1 || *d == 2) {
            return LinkShape::Path;
        }
        LinkShape::Other
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LinkShape {
    Cycle,
    Path,
    Other,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurfaceInfo {
    pub is_closed_surface: bool,
    pub euler_characteristic: i64,
    /// Meaningful only when `is_closed_surface`; false otherwise.
    pub orientable: bool,
    pub surface_name: SurfaceName,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SurfaceName {
    Sphere,
    Torus,
    ProjectivePlane,
    KleinBottle,
    Other { chi: i64, orientable: bool },
    NotASurface,
}

/// Small union-find used for component counts.
struct Dsu {
    parent: Vec<usize>,
    components: usize,
}

impl Dsu {
    fn new(n: usize) -> Dsu {
        Dsu {
            parent: (0..n).collect(),
            components: n,
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra] = rb;
            self.components -= 1;
        }
    }

    fn component_count(&self) -> usize {
        self.components
    }
}
