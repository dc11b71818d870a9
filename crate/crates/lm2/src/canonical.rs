//! Canonical labeling of complexes, used to deduplicate up to isomorphism.
//!
//! The algorithm is the usual individualization–refinement scheme: vertices
//! are colored by invariants (edge degree, face degree), the coloring is
//! refined until equitable, and non-singleton color classes are split by
//! individualizing each candidate vertex in turn. Every discrete coloring
//! yields a relabeled byte encoding; the lexicographically smallest one is
//! the canonical form. Intended for the desk-scale complexes this crate works
//! with (a few dozen faces), not for large inputs.

use std::collections::BTreeMap;

use crate::complex::{Complex2, Vertex};

/// Canonical byte string: equal outputs exactly when the complexes are
/// isomorphic (vertex bijection carrying edges to edges and faces to faces).
pub fn canonical_form(c: &Complex2) -> Vec<u8> {
    let verts: Vec<Vertex> = c.vertices().iter().copied().collect();
    let n = verts.len();
    if n == 0 {
        return encode(0, &[], &[]);
    }
    let index: BTreeMap<Vertex, usize> = verts.iter().enumerate().map(|(i, v)| (*v, i)).collect();
    let edges: Vec<(usize, usize)> = c
        .edges()
        .iter()
        .map(|e| {
            let (a, b) = e.endpoints();
            (index[&a], index[&b])
        })
        .collect();
    let faces: Vec<[usize; 3]> = c
        .faces()
        .iter()
        .map(|f| {
            let [a, b, c_] = f.vertices();
            [index[&a], index[&b], index[&c_]]
        })
        .collect();

    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for &(a, b) in &edges {
        adj[a].push(b);
        adj[b].push(a);
    }
    let mut face_at: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (fi, f) in faces.iter().enumerate() {
        for &v in f {
            face_at[v].push(fi);
        }
    }

    let searcher = Searcher {
        n,
        edges,
        faces,
        adj,
        face_at,
    };
    let initial: Vec<u32> = (0..n)
        .map(|v| {
            // initial color: (edge degree, face degree), packed
            (searcher.adj[v].len() as u32) << 16 | searcher.face_at[v].len() as u32
        })
        .collect();
    let mut best: Option<Vec<u8>> = None;
    searcher.search(normalize(&initial), &mut best);
    best.expect("search visits at least one discrete coloring")
}

pub fn are_isomorphic(a: &Complex2, b: &Complex2) -> bool {
    if a.v() != b.v() || a.e() != b.e() || a.f() != b.f() {
        return false;
    }
    canonical_form(a) == canonical_form(b)
}

struct Searcher {
    n: usize,
    edges: Vec<(usize, usize)>,
    faces: Vec<[usize; 3]>,
    adj: Vec<Vec<usize>>,
    face_at: Vec<Vec<usize>>,
}

/// Refinement signature of one vertex: own color, sorted neighbor colors,
/// sorted color pairs of its face partners.
type Signature = (u32, Vec<u32>, Vec<(u32, u32)>);

impl Searcher {
    fn search(&self, colors: Vec<u32>, best: &mut Option<Vec<u8>>) {
        let colors = self.refine(colors);
        match first_non_singleton_class(&colors) {
            None => {
                let candidate = self.encode_discrete(&colors);
                if best.as_ref().is_none_or(|b| candidate < *b) {
                    *best = Some(candidate);
                }
            }
            Some(class_color) => {
                for v in 0..self.n {
                    if colors[v] == class_color {
                        let mut next = colors.clone();
                        // individualize v: give it a color just below its class
                        next[v] *= 2;
                        for (u, c) in next.iter_mut().enumerate() {
                            if u != v && colors[u] == class_color {
                                *c = colors[u] * 2 + 1;
                            } else if u != v {
                                *c *= 2;
                            }
                        }
                        self.search(normalize(&next), best);
                    }
                }
            }
        }
    }

    /// Refine to an equitable coloring: each vertex's signature is its color
    /// plus the multiset of neighbor colors along edges and the multiset of
    /// color pairs of its face partners. Label-independent by construction.
    fn refine(&self, mut colors: Vec<u32>) -> Vec<u32> {
        loop {
            let mut signatures: Vec<Signature> = Vec::with_capacity(self.n);
            for v in 0..self.n {
                let mut nb: Vec<u32> = self.adj[v].iter().map(|u| colors[*u]).collect();
                nb.sort_unstable();
                let mut fp: Vec<(u32, u32)> = self.face_at[v]
                    .iter()
                    .map(|fi| {
                        let others: Vec<u32> = self.faces[*fi]
                            .iter()
                            .filter(|u| **u != v)
                            .map(|u| colors[*u])
                            .collect();
                        let (x, y) = (others[0], others[1]);
                        if x <= y {
                            (x, y)
                        } else {
                            (y, x)
                        }
                    })
                    .collect();
                fp.sort_unstable();
                signatures.push((colors[v], nb, fp));
            }
            let mut sorted: Vec<&Signature> = signatures.iter().collect();
            sorted.sort();
            sorted.dedup();
            let rank: BTreeMap<&Signature, u32> = sorted
                .into_iter()
                .enumerate()
                .map(|(i, s)| (s, i as u32))
                .collect();
            let next: Vec<u32> = signatures.iter().map(|s| rank[s]).collect();
            let before = class_count(&colors);
            let after = class_count(&next);
            colors = next;
            if after == before {
                return colors;
            }
        }
    }

    fn encode_discrete(&self, colors: &[u32]) -> Vec<u8> {
        // discrete coloring: color is the new label
        let perm: Vec<u32> = colors.to_vec();
        let mut edges: Vec<(u32, u32)> = self
            .edges
            .iter()
            .map(|&(a, b)| {
                let (x, y) = (perm[a], perm[b]);
                if x < y {
                    (x, y)
                } else {
                    (y, x)
                }
            })
            .collect();
        edges.sort_unstable();
        let mut faces: Vec<[u32; 3]> = self
            .faces
            .iter()
            .map(|f| {
                let mut g = [perm[f[0]], perm[f[1]], perm[f[2]]];
                g.sort_unstable();
                g
            })
            .collect();
        faces.sort_unstable();
        encode(self.n, &edges, &faces)
    }
}

fn encode(n: usize, edges: &[(u32, u32)], faces: &[[u32; 3]]) -> Vec<u8> {
    let mut out = Vec::with_capacity(12 + edges.len() * 8 + faces.len() * 12);
    out.extend_from_slice(&(n as u32).to_le_bytes());
    out.extend_from_slice(&(edges.len() as u32).to_le_bytes());
    out.extend_from_slice(&(faces.len() as u32).to_le_bytes());
    for (a, b) in edges {
        out.extend_from_slice(&a.to_le_bytes());
        out.extend_from_slice(&b.to_le_bytes());
    }
    for f in faces {
        for x in f {
            out.extend_from_slice(&x.to_le_bytes());
        }
    }
    out
}

fn class_count(colors: &[u32]) -> usize {
    let mut seen: Vec<u32> = colors.to_vec();
    seen.sort_unstable();
    seen.dedup();
    seen.len()
}

/// Renumber colors to 0..k-1 preserving order.
fn normalize(colors: &[u32]) -> Vec<u32> {
    let mut seen: Vec<u32> = colors.to_vec();
    seen.sort_unstable();
    seen.dedup();
    let rank: BTreeMap<u32, u32> = seen.into_iter().enumerate().map(|(i, c)| (c, i as u32)).collect();
    colors.iter().map(|c| rank[c]).collect()
}

/// Smallest color whose class has more than one vertex.
fn first_non_singleton_class(colors: &[u32]) -> Option<u32> {
    let mut counts: BTreeMap<u32, usize> = BTreeMap::new();
    for &c in colors {
        *counts.entry(c).or_insert(0) += 1;
    }
    counts.into_iter().find(|(_, n)| *n > 1).map(|(c, _)| c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::Complex2;
    use rand::seq::SliceRandom;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::collections::BTreeMap;

    fn relabel(c: &Complex2, perm: &BTreeMap<u32, u32>) -> Complex2 {
        let faces: Vec<(u32, u32, u32)> = c
            .faces()
            .iter()
            .map(|f| {
                let [a, b, c_] = f.vertices();
                (perm[&a], perm[&b], perm[&c_])
            })
            .collect();
        let edges: Vec<(u32, u32)> = c
            .edges()
            .iter()
            .filter(|e| {
                let (a, b) = e.endpoints();
                !c.faces().iter().any(|f| f.contains(a) && f.contains(b))
            })
            .map(|e| {
                let (a, b) = e.endpoints();
                (perm[&a], perm[&b])
            })
            .collect();
        Complex2::build(&faces, &edges).unwrap()
    }

    fn random_permutation(c: &Complex2, seed: u64) -> BTreeMap<u32, u32> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let vs: Vec<u32> = c.vertices().iter().copied().collect();
        let mut images: Vec<u32> = (100..100 + vs.len() as u32).collect();
        images.shuffle(&mut rng);
        vs.into_iter().zip(images).collect()
    }

    /// Exhaustive isomorphism test by trying all vertex bijections; the
    /// independent check the canonical form is validated against.
    fn brute_force_isomorphic(a: &Complex2, b: &Complex2) -> bool {
        if a.v() != b.v() || a.e() != b.e() || a.f() != b.f() {
            return false;
        }
        let av: Vec<u32> = a.vertices().iter().copied().collect();
        let bv: Vec<u32> = b.vertices().iter().copied().collect();
        let mut perm: Vec<usize> = (0..bv.len()).collect();
        // Heap's algorithm over small vertex counts
        fn heaps(k: usize, perm: &mut Vec<usize>, check: &mut dyn FnMut(&[usize]) -> bool) -> bool {
            if k == 1 {
                return check(perm);
            }
            for i in 0..k {
                if heaps(k - 1, perm, check) {
                    return true;
                }
                if k.is_multiple_of(2) {
                    perm.swap(i, k - 1);
                } else {
                    perm.swap(0, k - 1);
                }
            }
            false
        }
        let n = perm.len();
        let mut check = |p: &[usize]| {
            let map: BTreeMap<u32, u32> = av.iter().zip(p.iter()).map(|(x, i)| (*x, bv[*i])).collect();
            let edges_ok = a.edges().iter().all(|e| {
                let (x, y) = e.endpoints();
                b.contains_edge(&crate::complex::Edge::new(map[&x], map[&y]))
            });
            if !edges_ok {
                return false;
            }
            a.faces().iter().all(|f| {
                let [x, y, z] = f.vertices();
                b.contains_face(&crate::complex::Face::new(map[&x], map[&y], map[&z]))
            })
        };
        n == 0 || heaps(n, &mut perm, &mut check)
    }

    fn octahedron() -> Complex2 {
        Complex2::from_faces(&[
            (1, 2, 3),
            (1, 3, 4),
            (1, 4, 5),
            (1, 5, 2),
            (6, 2, 3),
            (6, 3, 4),
            (6, 4, 5),
            (6, 5, 2),
        ])
        .unwrap()
    }

    #[test]
    fn octahedron_relabelings_agree() {
        let c = octahedron();
        for seed in 0..5 {
            let r = relabel(&c, &random_permutation(&c, seed));
            assert!(brute_force_isomorphic(&c, &r));
            assert_eq!(canonical_form(&c), canonical_form(&r));
        }
    }

    #[test]
    fn distinct_pairings_of_tetrahedra_differ() {
        // two tetrahedra sharing an edge vs sharing a face
        let share_edge = Complex2::from_faces(&[
            (1, 2, 3),
            (1, 2, 4),
            (1, 3, 4),
            (2, 3, 4),
            (3, 4, 5),
            (3, 4, 6),
            (3, 5, 6),
            (4, 5, 6),
        ])
        .unwrap();
        let share_face = Complex2::from_faces(&[
            (1, 2, 3),
            (1, 2, 4),
            (1, 3, 4),
            (2, 3, 4),
            (2, 3, 5),
            (2, 4, 5),
            (3, 4, 5),
        ])
        .unwrap();
        assert_ne!(canonical_form(&share_edge), canonical_form(&share_face));
        assert!(!are_isomorphic(&share_edge, &share_face));
    }

    #[test]
    fn matches_brute_force_on_random_small_complexes() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for trial in 0..60 {
            let c = crate::complex_test_support::random_small_complex(&mut rng, 6, 6);
            if c.f() == 0 {
                continue;
            }
            let r = relabel(&c, &random_permutation(&c, trial));
            assert!(brute_force_isomorphic(&c, &r), "relabeling is an isomorphism");
            assert_eq!(canonical_form(&c), canonical_form(&r));
            // and a usually-nonisomorphic second complex
            let d = crate::complex_test_support::random_small_complex(&mut rng, 6, 6);
            if d.f() == 0 {
                continue;
            }
            assert_eq!(
                brute_force_isomorphic(&c, &d),
                are_isomorphic(&c, &d),
                "canonical comparison must agree with brute force"
            );
        }
    }

    #[test]
    fn bare_edges_distinguish() {
        let plain = Complex2::from_faces(&[(1, 2, 3)]).unwrap();
        let with_edge = Complex2::build(&[(1, 2, 3)], &[(1, 4)]).unwrap();
        assert!(!are_isomorphic(&plain, &with_edge));
    }
}
