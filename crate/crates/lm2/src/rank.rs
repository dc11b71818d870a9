//! Exact rank of the face boundary matrix, over the rationals and over GF(2).
//!
//! The rational path runs fraction-free (Bareiss) elimination: every working
//! entry is an exact minor of the original integer matrix, so the rank is
//! exact with no rounding anywhere. Entries are machine i128 with a checked
//! fallback to arbitrary precision — boundary matrices eliminate with tiny
//! entries in practice, but nothing here depends on that staying true.

use std::collections::HashMap;

use num::bigint::BigInt;
use num::{One, Signed, Zero};

use crate::complex::Complex2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RankField {
    Rationals,
    Gf2,
}

/// Rank of the boundary map from faces to edges over the requested field.
pub fn boundary2_rank(c: &Complex2, field: RankField) -> usize {
    match field {
        RankField::Rationals => boundary2_rank_exact(c),
        RankField::Gf2 => boundary2_rank_gf2(c),
    }
}

/// Signed boundary matrix with one row per face, one column per edge.
/// For a sorted face (a < b < c): +1 on {b,c}, -1 on {a,c}, +1 on {a,b}.
fn signed_boundary_rows(c: &Complex2) -> (usize, Vec<Vec<(usize, i8)>>) {
    let edge_index: HashMap<_, _> = c.edges().iter().enumerate().map(|(i, e)| (*e, i)).collect();
    let rows = c
        .faces()
        .iter()
        .map(|f| {
            let [a, b, v] = f.vertices();
            vec![
                (edge_index[&crate::complex::Edge::new(b, v)], 1i8),
                (edge_index[&crate::complex::Edge::new(a, v)], -1i8),
                (edge_index[&crate::complex::Edge::new(a, b)], 1i8),
            ]
        })
        .collect();
    (c.e(), rows)
}

pub fn boundary2_rank_exact(c: &Complex2) -> usize {
    let (cols, sparse) = signed_boundary_rows(c);
    if sparse.is_empty() || cols == 0 {
        return 0;
    }
    let mut m: Vec<Vec<i128>> = sparse
        .iter()
        .map(|row| {
            let mut dense = vec![0i128; cols];
            for &(j, v) in row {
                dense[j] = v as i128;
            }
            dense
        })
        .collect();
    match bareiss_rank_i128(&mut m) {
        Some(rank) => rank,
        None => {
            // i128 overflowed mid-elimination; redo with arbitrary precision
            let big: Vec<Vec<BigInt>> = sparse
                .iter()
                .map(|row| {
                    let mut dense = vec![BigInt::zero(); cols];
                    for &(j, v) in row {
                        dense[j] = BigInt::from(v);
                    }
                    dense
                })
                .collect();
            bareiss_rank_big(big)
        }
    }
}

/// Fraction-free elimination over i128; returns None if any product would
/// overflow. Pivot selection takes the smallest nonzero magnitude in the
/// remaining submatrix, which keeps minor growth minimal.
fn bareiss_rank_i128(m: &mut [Vec<i128>]) -> Option<usize> {
    let rows = m.len();
    let cols = m[0].len();
    let mut prev: i128 = 1;
    let mut r = 0;
    while r < rows.min(cols) {
        let mut pivot: Option<(usize, usize)> = None;
        for i in r..rows {
            for j in r..cols {
                if m[i][j] != 0
                    && pivot.is_none_or(|(pi, pj)| m[i][j].abs() < m[pi][pj].abs())
                {
                    pivot = Some((i, j));
                }
            }
        }
        let (pi, pj) = match pivot {
            Some(p) => p,
            None => return Some(r),
        };
        m.swap(r, pi);
        for row in m.iter_mut() {
            row.swap(r, pj);
        }
        let pivot_val = m[r][r];
        for i in r + 1..rows {
            let head = m[i][r];
            if head == 0 && pivot_val == prev {
                // row unchanged except for the scale factor cancelling
                continue;
            }
            // Indexed on purpose: row r is read while row i is written.
            #[allow(clippy::needless_range_loop)]
            for j in r + 1..cols {
                let t1 = m[i][j].checked_mul(pivot_val)?;
                let t2 = head.checked_mul(m[r][j])?;
                let num = t1.checked_sub(t2)?;
                debug_assert_eq!(num % prev, 0, "fraction-free division must be exact");
                m[i][j] = num / prev;
            }
            m[i][r] = 0;
        }
        prev = pivot_val;
        r += 1;
    }
    Some(r)
}

fn bareiss_rank_big(mut m: Vec<Vec<BigInt>>) -> usize {
    let rows = m.len();
    let cols = m[0].len();
    let mut prev = BigInt::one();
    let mut r = 0;
    while r < rows.min(cols) {
        let mut pivot: Option<(usize, usize)> = None;
        for i in r..rows {
            for j in r..cols {
                if !m[i][j].is_zero() {
                    let better = match pivot {
                        None => true,
                        Some((pi, pj)) => m[i][j].abs() < m[pi][pj].abs(),
                    };
                    if better {
                        pivot = Some((i, j));
                    }
                }
            }
        }
        let (pi, pj) = match pivot {
            Some(p) => p,
            None => return r,
        };
        m.swap(r, pi);
        for row in m.iter_mut() {
            row.swap(r, pj);
        }
        let pivot_val = m[r][r].clone();
        for i in r + 1..rows {
            let head = m[i][r].clone();
            if head.is_zero() && pivot_val == prev {
                continue;
            }
            // Indexed on purpose: row r is read while row i is written.
            #[allow(clippy::needless_range_loop)]
            for j in r + 1..cols {
                let num = &m[i][j] * &pivot_val - &head * &m[r][j];
                m[i][j] = num / &prev;
            }
            m[i][r] = BigInt::zero();
        }
        prev = pivot_val;
        r += 1;
    }
    r
}

/// GF(2) rank by bitset elimination; rows are faces packed over edge columns.
pub fn boundary2_rank_gf2(c: &Complex2) -> usize {
    let (cols, sparse) = signed_boundary_rows(c);
    if sparse.is_empty() || cols == 0 {
        return 0;
    }
    let words = cols.div_ceil(64);
    // pivots[k] = (column, reduced row) in increasing column order
    let mut pivots: Vec<(usize, Vec<u64>)> = Vec::new();
    let mut rank = 0;
    for row in &sparse {
        let mut bits = vec![0u64; words];
        for &(j, _) in row {
            bits[j / 64] ^= 1 << (j % 64);
        }
        for (col, prow) in &pivots {
            if bits[col / 64] >> (col % 64) & 1 == 1 {
                for (b, p) in bits.iter_mut().zip(prow.iter()) {
                    *b ^= p;
                }
            }
        }
        if let Some(col) = first_set_bit(&bits) {
            pivots.push((col, bits));
            pivots.sort_by_key(|(c, _)| *c);
            rank += 1;
        }
    }
    rank
}

fn first_set_bit(bits: &[u64]) -> Option<usize> {
    for (w, word) in bits.iter().enumerate() {
        if *word != 0 {
            return Some(w * 64 + word.trailing_zeros() as usize);
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::Complex2;
    use num::rational::Ratio;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Independent oracle: plain Gaussian elimination over exact big
    /// rationals, no fraction-free tricks shared with the implementation.
    fn naive_rational_rank(c: &Complex2) -> usize {
        let (cols, sparse) = signed_boundary_rows(c);
        let mut m: Vec<Vec<Ratio<num::BigInt>>> = sparse
            .iter()
            .map(|row| {
                let mut dense = vec![Ratio::from_integer(num::BigInt::from(0)); cols];
                for &(j, v) in row {
                    dense[j] = Ratio::from_integer(num::BigInt::from(v));
                }
                dense
            })
            .collect();
        let zero = Ratio::from_integer(num::BigInt::from(0));
        let mut rank = 0;
        for col in 0..cols {
            let pivot = match (rank..m.len()).find(|&i| m[i][col] != zero) {
                Some(p) => p,
                None => continue,
            };
            m.swap(rank, pivot);
            let pv = m[rank][col].clone();
            for i in 0..m.len() {
                if i != rank && m[i][col] != zero {
                    let factor = m[i][col].clone() / pv.clone();
                    // Indexed on purpose: the pivot row is read while row i
                    // is written.
                    #[allow(clippy::needless_range_loop)]
                    for j in col..cols {
                        let sub = factor.clone() * m[rank][j].clone();
                        m[i][j] -= sub;
                    }
                }
            }
            rank += 1;
            if rank == m.len() {
                break;
            }
        }
        rank
    }

    fn rp2() -> Complex2 {
        Complex2::from_faces(&[
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
        ])
        .unwrap()
    }

    #[test]
    fn known_small_ranks() {
        let triangle = Complex2::from_faces(&[(1, 2, 3)]).unwrap();
        assert_eq!(boundary2_rank_exact(&triangle), 1);
        assert_eq!(boundary2_rank_gf2(&triangle), 1);

        let tetra = Complex2::from_faces(&[(1, 2, 3), (1, 2, 4), (1, 3, 4), (2, 3, 4)]).unwrap();
        // boundary sphere: one 2-cycle, so rank = 4 - 1
        assert_eq!(boundary2_rank_exact(&tetra), 3);
        assert_eq!(boundary2_rank_gf2(&tetra), 3);
    }

    #[test]
    fn projective_plane_ranks_differ_by_field() {
        // 2-torsion: full rank over the rationals, one short over GF(2)
        let c = rp2();
        assert_eq!(boundary2_rank_exact(&c), 10);
        assert_eq!(boundary2_rank_gf2(&c), 9);
    }

    #[test]
    fn exact_rank_matches_naive_rational_elimination() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..60 {
            let c = crate::complex_test_support::random_small_complex(&mut rng, 8, 14);
            assert_eq!(
                boundary2_rank_exact(&c),
                naive_rational_rank(&c),
                "bareiss vs naive on {c:?}"
            );
        }
    }

    #[test]
    fn gf2_rank_never_exceeds_rational_rank() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..40 {
            let c = crate::complex_test_support::random_small_complex(&mut rng, 9, 16);
            assert!(boundary2_rank_gf2(&c) <= boundary2_rank_exact(&c));
        }
    }

    #[test]
    fn big_fallback_agrees_with_i128_path() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..20 {
            let c = crate::complex_test_support::random_small_complex(&mut rng, 8, 12);
            let (cols, sparse) = signed_boundary_rows(&c);
            if cols == 0 {
                continue;
            }
            let big: Vec<Vec<num::BigInt>> = sparse
                .iter()
                .map(|row| {
                    let mut dense = vec![num::BigInt::from(0); cols];
                    for &(j, v) in row {
                        dense[j] = num::BigInt::from(v);
                    }
                    dense
                })
                .collect();
            assert_eq!(bareiss_rank_big(big), boundary2_rank_exact(&c));
        }
    }
}
