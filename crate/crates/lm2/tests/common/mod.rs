//! Helpers shared by the integration test targets.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use lm2::complex::Complex2;

/// Run one named check, print a single machine-readable pass/fail line, and
/// propagate any panic so the harness still records the failure.
pub fn criterion<F: FnOnce() + std::panic::UnwindSafe>(name: &str, check: F) {
    let started = std::time::Instant::now();
    match std::panic::catch_unwind(check) {
        Ok(()) => println!(
            "acceptance {name}: pass ({:.2}s)",
            started.elapsed().as_secs_f64()
        ),
        Err(cause) => {
            println!(
                "acceptance {name}: fail ({:.2}s)",
                started.elapsed().as_secs_f64()
            );
            std::panic::resume_unwind(cause);
        }
    }
}

/// Random nonempty pure complex: up to `max_faces` faces on up to
/// `max_vertices` vertices. Independent of the library's internal samplers so
/// oracle comparisons don't share a corpus with unit tests.
pub fn random_pure_complex(
    rng: &mut ChaCha8Rng,
    max_vertices: u32,
    max_faces: usize,
) -> Complex2 {
    let n = rng.gen_range(3..=max_vertices.max(3));
    let target = rng.gen_range(1..=max_faces.max(1));
    let mut faces: std::collections::BTreeSet<(u32, u32, u32)> = std::collections::BTreeSet::new();
    for _ in 0..(3 * target + 8) {
        if faces.len() >= target {
            break;
        }
        let picked = sample(rng, n as usize, 3);
        let mut t = [
            picked.index(0) as u32 + 1,
            picked.index(1) as u32 + 1,
            picked.index(2) as u32 + 1,
        ];
        t.sort_unstable();
        faces.insert((t[0], t[1], t[2]));
    }
    let list: Vec<(u32, u32, u32)> = faces.into_iter().collect();
    Complex2::from_faces(&list).expect("sampled faces are valid")
}

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// (vertex count, seed) parameters for the 1000-sphere corpus; sizes sweep
/// 4..=200 so every generator regime is hit, and the list is a pure function
/// of nothing so independent tests see the identical corpus.
pub fn sphere_corpus_params() -> Vec<(u32, u64)> {
    (0..1000u64)
        .map(|i| (4 + (i % 197) as u32, 0xC0FFEE ^ i))
        .collect()
}

/// (rows, cols) for the 100-torus corpus: the full 3..=12 × 3..=12 grid.
pub fn torus_corpus_params() -> Vec<(u32, u32)> {
    let mut out = Vec::with_capacity(100);
    for rows in 3..=12 {
        for cols in 3..=12 {
            out.push((rows, cols));
        }
    }
    out
}
