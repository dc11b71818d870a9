//! Acceptance suite: one test per shipping criterion, each printing a single
//! `acceptance cNN ...: pass|fail` line (run with `--nocapture` to see them).
//! Checks are exact wherever the quantity is exact; Monte Carlo checks pin
//! seeds and use margins far outside sampling noise.

mod common;

use std::collections::{HashMap, HashSet};
use std::time::Instant;

use common::{
    criterion, random_pure_complex, seeded_rng, sphere_corpus_params, torus_corpus_params,
};
use lm2::complex::{Complex2, Face, Vertex};
use lm2::invariants::{
    degree_lemma_bound, degree_report, l_invariant, mu, mu_tilde, mu_tilde_with_cap, MuTildeMode,
    Rational,
};
use lm2::patterns::{
    build_forbidden_list, canonical_label, certify_asphericable, count_embeddings,
    low_degree_configuration, verify_list_member, CertificateWitness, ListParams, SphereBudget,
    Verdict,
};
use lm2::stochastic::{
    betti_experiment, collapse_experiment, derive_seed, sample_lm, threshold_experiment,
    CollapsePRule,
};
use lm2::surfaces::{
    catalog, grid_torus_triangulation, random_sphere_triangulation, CATALOG_NAMES,
};

fn rational(p: i64, q: i64) -> Rational {
    Rational::new(p, q)
}

#[test]
fn c01_catalog_densities_are_exact() {
    criterion("c01 catalog densities are exact", || {
        let t0 = Instant::now();
        let expected = [
            ("sigma1", rational(7, 8)),
            ("sigma2", rational(3, 4)),
            ("sigma3", rational(5, 7)),
            ("bipyramid5", rational(5, 6)),
            ("rp2_six", rational(3, 5)),
        ];
        for (name, want) in expected {
            let c = catalog(name).unwrap();
            let got = mu(&c).unwrap();
            assert_eq!(got, want, "mu({name}) = {got}, expected {want}");
        }
        assert!(
            t0.elapsed().as_secs_f64() < 1.0,
            "exact densities took {:?}, budget is 1s",
            t0.elapsed()
        );
    });
}

/// Exact identity relating density, Euler characteristic and the edge-defect
/// sum: mu = 1/2 + (2*chi + L) / (2*f). Zero tolerance.
fn density_identity_holds(c: &Complex2) -> bool {
    let f = c.f() as i64;
    assert!(f > 0, "identity corpus must have faces");
    let chi = c.v() as i64 - c.e() as i64 + f;
    mu(c).unwrap() == rational(1, 2) + rational(2 * chi + l_invariant(c), 2 * f)
}

#[test]
fn c02_density_identity_on_mixed_corpus() {
    criterion("c02 density identity on 1000 mixed complexes", || {
        let t0 = Instant::now();
        let mut checked = 0u32;

        for name in CATALOG_NAMES {
            assert!(density_identity_holds(&catalog(name).unwrap()), "{name}");
            checked += 1;
        }

        // Random complexes with a full 1-skeleton; skip the (rare) empty draw
        // since the ratio needs at least one face.
        let mut i = 0u64;
        while checked < 8 + 500 {
            let n = 6 + (i % 7) as u32;
            let p = [0.25, 0.4, 0.55, 0.7, 0.85][(i % 5) as usize];
            let sample = sample_lm(n, p, derive_seed(0xC2, i)).unwrap();
            i += 1;
            if sample.f2 == 0 {
                continue;
            }
            assert!(
                density_identity_holds(&sample.complex),
                "random full-skeleton complex n={n} p={p}"
            );
            checked += 1;
        }

        for j in 0..492u64 {
            let v = 4 + (j % 97) as u32;
            let s = random_sphere_triangulation(v, derive_seed(0x5EED, j)).unwrap();
            assert!(density_identity_holds(&s), "sphere v={v}");
            checked += 1;
        }

        assert_eq!(checked, 1000);
        assert!(
            t0.elapsed().as_secs_f64() < 10.0,
            "identity corpus took {:?}, budget is 10s",
            t0.elapsed()
        );
    });
}

#[test]
fn c03_low_degree_counts_beat_lower_bounds_on_surfaces() {
    criterion(
        "c03 low-degree vertex counts beat lower bounds on 1000 spheres and 100 tori",
        || {
            let t0 = Instant::now();
            let check_bounds = |s: &Complex2, label: &str, sharpen_for_sphere: bool| {
                let v = s.v() as u64;
                let chi = s.v() as i64 - s.e() as i64 + s.f() as i64;
                let report = degree_report(s);
                for k in 6..=20u32 {
                    let l_k = report.l_table[&k];
                    let bound = degree_lemma_bound(v, chi, k);
                    assert!(
                        Rational::from_integer(l_k as i64) >= bound,
                        "{label}: l_{k} = {l_k} below bound {bound}"
                    );
                }
                if sharpen_for_sphere {
                    let l_8 = report.l_table[&8];
                    let l_17 = report.l_table[&17];
                    assert!(2 * l_8 >= v, "{label}: l_8 = {l_8} < v/2 (v = {v})");
                    assert!(5 * l_17 >= 4 * v, "{label}: l_17 = {l_17} < 4v/5 (v = {v})");
                }
            };

            let spheres = sphere_corpus_params();
            assert!(spheres.len() >= 1000);
            for (v, seed) in spheres {
                let s = random_sphere_triangulation(v, seed).unwrap();
                check_bounds(&s, &format!("sphere v={v} seed={seed}"), true);
            }
            let tori = torus_corpus_params();
            assert!(tori.len() >= 100);
            for (rows, cols) in tori {
                let t = grid_torus_triangulation(rows, cols).unwrap();
                check_bounds(&t, &format!("torus {rows}x{cols}"), false);
            }
            assert!(
                t0.elapsed().as_secs_f64() < 60.0,
                "surface corpus took {:?}, budget is 60s",
                t0.elapsed()
            );
        },
    );
}

#[test]
fn c04_low_degree_configuration_always_found_on_corpora() {
    criterion(
        "c04 low-degree configuration found on every sphere (d=17) and torus (d=18)",
        || {
            for (v, seed) in sphere_corpus_params() {
                let s = random_sphere_triangulation(v, seed).unwrap();
                let search = low_degree_configuration(&s, 17).unwrap();
                let config = search
                    .config
                    .unwrap_or_else(|| panic!("no configuration on sphere v={v} seed={seed}"));
                let degrees = s.vertex_degrees();
                for u in [config.x, config.y, config.z] {
                    assert!(
                        degrees[&u] <= 17,
                        "sphere v={v}: configuration vertex {u} has degree {}",
                        degrees[&u]
                    );
                }
            }
            for (rows, cols) in torus_corpus_params() {
                let t = grid_torus_triangulation(rows, cols).unwrap();
                let search = low_degree_configuration(&t, 18).unwrap();
                let config = search
                    .config
                    .unwrap_or_else(|| panic!("no configuration on torus {rows}x{cols}"));
                let degrees = t.vertex_degrees();
                for u in [config.x, config.y, config.z] {
                    assert!(degrees[&u] <= 18, "torus {rows}x{cols}: vertex {u}");
                }
            }
        },
    );
}

#[test]
fn c05_subcomplex_minimum_matches_brute_force() {
    criterion(
        "c05 branch-and-bound subcomplex density minimum equals brute force on 200 complexes",
        || {
            let mut rng = seeded_rng(0xC5);
            for i in 0..200 {
                let c = random_pure_complex(&mut rng, 8, 12);
                assert!(c.f() <= 12);
                let brute = mu_tilde_with_cap(&c, MuTildeMode::Brute, 20).unwrap();
                let bb = mu_tilde(&c, MuTildeMode::BranchAndBound).unwrap();
                assert_eq!(
                    brute.value, bb.value,
                    "complex #{i}: brute {} vs branch-and-bound {}",
                    brute.value, bb.value
                );
                // Each witness must realize the reported minimum.
                for result in [&brute, &bb] {
                    let faces: Vec<(Vertex, Vertex, Vertex)> = result
                        .witness
                        .iter()
                        .map(|f| {
                            let [a, b, c] = f.vertices();
                            (a, b, c)
                        })
                        .collect();
                    let sub = Complex2::from_faces(&faces).unwrap();
                    assert_eq!(mu(&sub).unwrap(), result.value, "complex #{i}: witness");
                }
            }
        },
    );
}

/// Oracle: count injective vertex maps sending every pattern face to a host
/// face, by trying all injections.
fn naive_embedding_count(pattern: &Complex2, host: &Complex2) -> u64 {
    let pv: Vec<Vertex> = pattern.vertices().iter().copied().collect();
    let hv: Vec<Vertex> = host.vertices().iter().copied().collect();
    if pv.len() > hv.len() {
        return 0;
    }
    fn extend(
        k: usize,
        pv: &[Vertex],
        hv: &[Vertex],
        pattern: &Complex2,
        host: &Complex2,
        assignment: &mut HashMap<Vertex, Vertex>,
        used: &mut HashSet<Vertex>,
    ) -> u64 {
        if k == pv.len() {
            let ok = pattern.faces().iter().all(|f| {
                let [a, b, c] = f.vertices();
                host.contains_face(&Face::new(assignment[&a], assignment[&b], assignment[&c]))
            });
            return u64::from(ok);
        }
        let mut total = 0;
        for &h in hv {
            if used.contains(&h) {
                continue;
            }
            assignment.insert(pv[k], h);
            used.insert(h);
            total += extend(k + 1, pv, hv, pattern, host, assignment, used);
            assignment.remove(&pv[k]);
            used.remove(&h);
        }
        total
    }
    extend(
        0,
        &pv,
        &hv,
        pattern,
        host,
        &mut HashMap::new(),
        &mut HashSet::new(),
    )
}

#[test]
fn c06_embedding_count_matches_all_injections_oracle() {
    criterion(
        "c06 backtracking embedding count equals all-injections count on 100 pairs",
        || {
            let mut rng = seeded_rng(0xC6);
            let mut total_found = 0u64;
            for i in 0..100 {
                let pattern = random_pure_complex(&mut rng, 6, 8);
                let host = random_pure_complex(&mut rng, 9, 24);
                let fast = count_embeddings(&pattern, &host).unwrap();
                let naive = naive_embedding_count(&pattern, &host);
                assert_eq!(fast, naive, "pair #{i}: fast {fast} vs naive {naive}");
                total_found += fast;
            }
            assert!(total_found > 0, "suite never found an embedding");
        },
    );
}

#[test]
fn c07_tetrahedron_containment_flips_across_its_threshold() {
    criterion(
        "c07 tetrahedron containment probability flips between the two exponent sides",
        || {
            let tetra = catalog("tetrahedron").unwrap();
            let report =
                threshold_experiment(&tetra, &[80], &[0.75, 1.25], 1.0, 200, 0xC7).unwrap();
            let cell = |alpha: f64| {
                report
                    .cells
                    .iter()
                    .find(|c| c.n == 80 && c.alpha == alpha)
                    .unwrap()
            };
            let sparse = cell(1.25);
            let dense = cell(0.75);
            assert!(
                sparse.empirical_probability < 0.1,
                "at p = 80^-1.25: {} of {} trials contained it",
                sparse.successes,
                sparse.trials
            );
            assert!(
                dense.empirical_probability > 0.9,
                "at p = 80^-0.75: {} of {} trials contained it",
                dense.successes,
                dense.trials
            );
        },
    );
}

#[test]
fn c08_betti_bounds_and_wedge_identity_hold_per_trial() {
    criterion(
        "c08 face-count Betti bounds and wedge identity hold on every trial",
        || {
            let report = betti_experiment(25, 5.0, 0.0, 100, 0xC8).unwrap();
            assert_eq!(report.cells.len(), 100);
            for trial in &report.cells {
                assert!(trial.ftwo_ok, "trial {}: bounds violated", trial.trial);
                if trial.pairwise_face_disjoint {
                    let b2_z = trial.b2_z.expect("disjoint trials prune");
                    assert_eq!(
                        trial.b2_y,
                        b2_z + trial.tetrahedra,
                        "trial {}: wedge identity",
                        trial.trial
                    );
                    assert_eq!(trial.wedge_ok, Some(true));
                }
            }
            assert!(report.all_ftwo_ok);
            assert!(report.all_wedge_ok);
        },
    );
}

#[test]
fn c09_sparse_regime_collapses_to_graphs() {
    criterion("c09 sparse samples collapse to graphs at least 90% of the time", || {
        let rule = CollapsePRule { c: 0.2, delta: 0.0 };
        let report = collapse_experiment(60, rule, 200, 0xC9).unwrap();
        assert_eq!(report.trials, 200);
        assert!(
            report.counts.graph >= 180,
            "only {} of 200 trials collapsed to a graph",
            report.counts.graph
        );
    });
}

fn acceptance_list_params() -> ListParams {
    ListParams {
        degree_bound: 5,
        face_cap: 12,
        sphere_budget: SphereBudget {
            count: 8,
            max_vertices: 8,
            seed: 42,
        },
        max_merges: 2,
    }
}

#[test]
fn c10_every_quotient_list_member_passes_verification() {
    criterion(
        "c10 every stored quotient-list member passes verification",
        || {
            let params = acceptance_list_params();
            let list = build_forbidden_list(params).unwrap();
            assert!(!list.members_l2.is_empty(), "quotient stage produced nothing");
            for (i, entry) in list.members_l2.iter().enumerate() {
                let report = verify_list_member(&entry.complex, params.face_cap).unwrap();
                assert!(report.internal_faces_ge_3, "member {i}: internal faces");
                assert!(report.boundary_le_f_minus_3, "member {i}: boundary vs f-3");
                assert!(report.l_le_f_minus_3, "member {i}: defect sum vs f-3");
                assert!(report.l_le_boundary, "member {i}: defect sum vs boundary");
                assert!(report.mu_tilde_le_bound, "member {i}: density bound");
                assert!(report.inequality_holds, "member {i}");
            }
            // The fixed first member: its density minimum is exactly 5/7,
            // comfortably under the 46/47 cap used at large face budgets.
            let sigma = &list.members_l1[0];
            let mt = mu_tilde(sigma, MuTildeMode::BranchAndBound).unwrap();
            assert_eq!(mt.value, rational(5, 7));
            assert!(mt.value <= rational(46, 47));
        },
    );
}

#[test]
fn c11_certifier_accepts_disjoint_tetrahedra_and_rejects_the_bipyramid() {
    criterion(
        "c11 certifier accepts two disjoint tetrahedra, rejects bipyramid5 with itself as witness",
        || {
            let list = build_forbidden_list(acceptance_list_params()).unwrap();

            let two_tetra = Complex2::from_faces(&[
                (1, 2, 3),
                (1, 2, 4),
                (1, 3, 4),
                (2, 3, 4),
                (5, 6, 7),
                (5, 6, 8),
                (5, 7, 8),
                (6, 7, 8),
            ])
            .unwrap();
            let cert = certify_asphericable(&two_tetra, &list).unwrap();
            assert_eq!(cert.tetrahedra.len(), 2);
            assert!(cert.pairwise_face_disjoint);
            assert!(cert.sigma_free);
            assert!(cert.l2_free);
            assert_eq!(cert.verdict, Verdict::CertifiedAsphericable);

            let bipyramid = catalog("bipyramid5").unwrap();
            let cert = certify_asphericable(&bipyramid, &list).unwrap();
            assert!(cert.tetrahedra.is_empty());
            assert!(cert.sigma_free);
            assert!(!cert.l2_free);
            match cert.verdict {
                Verdict::NotCertified {
                    witness: CertificateWitness::ListMember {
                        member_index,
                        embedding,
                    },
                } => {
                    // The witness member is the bipyramid itself (up to
                    // relabeling) and the embedding covers all of it.
                    assert_eq!(
                        list.members_l2[member_index].canonical_label,
                        canonical_label(&bipyramid)
                    );
                    assert!(embedding.verify());
                    assert_eq!(embedding.vertex_map.len(), bipyramid.v());
                }
                other => panic!("expected a list-member witness, got {other:?}"),
            }
        },
    );
}

#[test]
fn c12_experiment_reports_are_byte_identical_across_reruns() {
    criterion("c12 experiment reports are byte-identical across reruns", || {
        let tetra = catalog("tetrahedron").unwrap();
        let a = threshold_experiment(&tetra, &[10, 14], &[0.8, 1.2], 1.0, 25, 777).unwrap();
        let b = threshold_experiment(&tetra, &[10, 14], &[0.8, 1.2], 1.0, 25, 777).unwrap();
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap(),
            "threshold report differs between reruns"
        );

        let a = betti_experiment(12, 4.0, 0.0, 25, 778).unwrap();
        let b = betti_experiment(12, 4.0, 0.0, 25, 778).unwrap();
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap(),
            "betti report differs between reruns"
        );

        let rule = CollapsePRule { c: 0.3, delta: 0.1 };
        let a = collapse_experiment(30, rule, 40, 779).unwrap();
        let b = collapse_experiment(30, rule, 40, 779).unwrap();
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap(),
            "collapse report differs between reruns"
        );
    });
}
