//! Library for experimenting with 2-dimensional simplicial complexes:
//! exact density invariants and Betti numbers, triangulated surface
//! generators, free-edge collapsing, regular quotients, subcomplex embedding
//! search, forbidden-list construction with an asphericability certifier, and
//! seeded Monte Carlo experiments on random complexes with a full 1-skeleton.
//!
//! All randomness is explicit (seeds in, deterministic out) and all invariant
//! arithmetic is exact rational — floats appear only in sampling and in
//! report statistics.

pub mod canonical;
pub mod complex;
pub mod error;
pub mod exec;
pub mod invariants;
pub mod io;
pub mod patterns;
pub mod rank;
pub mod stochastic;
pub mod surfaces;

pub use canonical::{are_isomorphic, canonical_form};
pub use complex::{Complex2, Edge, Face, Graph, LinkShape, SurfaceInfo, SurfaceName, Vertex};
pub use error::{Error, Result};

/// Shared generator for small random complexes used by unit tests in several
/// modules (not part of the public API).
#[cfg(test)]
pub(crate) mod complex_test_support {
    use crate::complex::Complex2;
    use rand::Rng;

    pub fn random_small_complex<R: Rng>(rng: &mut R, max_vertices: u32, max_faces: usize) -> Complex2 {
        let n = rng.gen_range(3..=max_vertices.max(3));
        let target = rng.gen_range(1..=max_faces.max(1));
        let mut faces: Vec<(u32, u32, u32)> = Vec::new();
        let mut seen = std::collections::BTreeSet::new();
        for _ in 0..target * 3 {
            if faces.len() >= target {
                break;
            }
            let mut pick = || rng.gen_range(1..=n);
            let (a, b, c) = (pick(), pick(), pick());
            if a == b || a == c || b == c {
                continue;
            }
            let mut key = [a, b, c];
            key.sort_unstable();
            if seen.insert(key) {
                faces.push((a, b, c));
            }
        }
        if faces.is_empty() {
            faces.push((1, 2, 3));
        }
        Complex2::from_faces(&faces).unwrap()
    }
}
