//! Release gate for the toolchain. Each test checks one numbered criterion
//! end to end (worked examples through the binary, randomized invariant
//! suites, and theorem-level guarantees on the shipped fixtures) and prints
//! a single pass or fail line for it.

mod util;

use std::collections::{BTreeMap, BTreeSet};
use std::panic::{catch_unwind, resume_unwind, UnwindSafe};
use std::time::{Duration, Instant};

use asyntop::bisim::{certify, OpennessViolation, Span, SystemMorphism, Verdict};
use asyntop::formats::{NetDoc, SpanDoc, SystemDoc};
use asyntop::homology::{boundary_matrix, homology};
use asyntop::lts::{AsyncSystem, IndependenceRelation, LabelledAsyncSystem};
use asyntop::petri::{LabelledPetriNet, Limits, PetriNet};
use asyntop::scheme::{scheme_of_system, SimplicialScheme};
use asyntop::snf::{smith_normal_form, IntegerMatrix};
use asyntop::{EventId, Label, PlaceId, StateId};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};

use util::{asyntop, exit_code, parse_json, read_workspace_file, stdout};

/// Wraps a criterion body so every run emits exactly one verdict line.
fn criterion<F: FnOnce() + UnwindSafe>(number: usize, summary: &str, body: F) {
    match catch_unwind(body) {
        Ok(()) => println!("criterion {number}: pass ({summary})"),
        Err(payload) => {
            println!("criterion {number}: FAIL ({summary})");
            resume_unwind(payload);
        }
    }
}

/// Runs the binary and enforces a wall-clock budget on the invocation.
fn run_within(args: &[&str], budget: Duration) -> std::process::Output {
    let start = Instant::now();
    let output = asyntop(args);
    let elapsed = start.elapsed();
    assert!(
        elapsed < budget,
        "`asyntop {}` took {elapsed:?}, budget {budget:?}",
        args.join(" ")
    );
    output
}

fn s(id: &str) -> StateId {
    StateId::new(id)
}

fn e(id: &str) -> EventId {
    EventId::new(id)
}

fn system_fixture(path: &str) -> LabelledAsyncSystem {
    SystemDoc::parse(&read_workspace_file(path))
        .expect("fixture parses")
        .into_system()
        .expect("fixture builds")
}

#[test]
fn criterion_1_cube_homology_and_residuals() {
    criterion(1, "cube homology and residuals through the binary", || {
        let base = run_within(&["homology", "fixtures/cube.json"], Duration::from_secs(1));
        assert_eq!(exit_code(&base), 0);
        assert_eq!(stdout(&base), "H_0 = Z\nH_1 = Z\n");

        // Nothing hides beyond the printed groups: the signature stops at
        // degree one, so every higher group is zero.
        let cube = system_fixture("fixtures/cube.json");
        assert_eq!(homology(&scheme_of_system(&cube)).groups().len(), 2);

        let after_one = run_within(
            &["homology", "fixtures/cube.json", "--state", "001"],
            Duration::from_secs(1),
        );
        assert_eq!(exit_code(&after_one), 0);
        assert_eq!(stdout(&after_one), "H_0 = Z^2\n");

        let after_two = run_within(
            &["homology", "fixtures/cube.json", "--state", "011"],
            Duration::from_secs(1),
        );
        assert_eq!(exit_code(&after_two), 0);
        assert_eq!(stdout(&after_two), "trivial\n");
    });
}

#[test]
fn criterion_2_cube_boundary_matrix_dump() {
    criterion(2, "cube boundary matrix and diagonal form dump", || {
        let output = run_within(
            &["homology", "fixtures/cube.json", "--dump-matrices"],
            Duration::from_secs(1),
        );
        assert_eq!(exit_code(&output), 0);
        let text = stdout(&output);
        assert!(text.starts_with("H_0 = Z\nH_1 = Z\n"), "got:\n{text}");
        let block = "d1 3 3\n-1 -1 0\n1 0 -1\n0 1 1\nsnf d1: 1 1 0\n";
        assert!(text.contains(block), "got:\n{text}");
    });
}

#[test]
fn criterion_3_trees_refuted_in_one_step() {
    criterion(
        3,
        "branching trees refuted with a length-one witness",
        || {
            let output = run_within(
                &[
                    "bisim",
                    "fixtures/example2-left.json",
                    "fixtures/example2-right.json",
                    "--refute",
                ],
                Duration::from_secs(1),
            );
            assert_eq!(exit_code(&output), 2);
            assert_eq!(
                stdout(&output),
                "not bisimilar: homology signatures differ after 1 step(s), \
             witness `a1` on the left side\n"
            );
        },
    );
}

#[test]
fn criterion_4_draining_net_homology() {
    criterion(4, "four-place net homology with diagonal form", || {
        let output = run_within(
            &[
                "homology",
                "fixtures/petri-homology.json",
                "--dump-matrices",
            ],
            Duration::from_secs(5),
        );
        assert_eq!(exit_code(&output), 0);
        let text = stdout(&output);
        assert!(text.starts_with("H_0 = Z\nH_1 = Z\n"), "got:\n{text}");
        let block = "d1 4 4\n-1 -1 0 0\n0 0 -1 -1\n1 0 1 0\n0 1 0 1\nsnf d1: 1 1 1 0\n";
        assert!(text.contains(block), "got:\n{text}");
    });
}

#[test]
fn criterion_5_firing_rule_is_exact() {
    criterion(
        5,
        "token arithmetic of the producer net firing rule",
        || {
            let net = NetDoc::parse(&read_workspace_file("fixtures/petri-fig.json"))
                .expect("fixture parses")
                .into_net()
                .expect("fixture builds");
            let initial = net.net().initial_marking().clone();
            assert_eq!(initial.state_id(), StateId::new("2,1"));
            let fired = net.net().fire(&initial, &e("t2")).expect("t2 is enabled");
            assert_eq!(fired.get(&PlaceId::new("p1")), 1);
            assert_eq!(fired.get(&PlaceId::new("p2")), 0);
            assert_eq!(fired.state_id(), StateId::new("1,0"));
        },
    );
}

#[test]
fn criterion_6_realizations_verify() {
    criterion(6, "net realizations of the bundled shapes verify", || {
        for expr in ["sphere:1", "sphere:2", "rp2", "wedge(sphere:1,sphere:2)"] {
            let output = run_within(
                &["--json", "construct", expr, "--verify"],
                Duration::from_secs(60),
            );
            assert_eq!(exit_code(&output), 0, "construct {expr} failed");
            let report = parse_json(&output);
            let verification = &report["results"]["verification"];
            assert_eq!(
                verification["agrees"],
                serde_json::Value::Bool(true),
                "signatures disagree for {expr}: {verification}"
            );
            if expr == "rp2" {
                let net_signature = verification["net"]["rendered"].as_str().unwrap_or_default();
                assert!(
                    net_signature.contains("Z/2"),
                    "rp2 net lost its torsion: {net_signature}"
                );
            }
        }
    });
}

// The randomized suites below share small generators. Schemes come from
// facet bitmasks over at most eight named vertices; nets are kept
// token-non-increasing so their reachable marking sets stay small.

fn scheme_strategy(max_vertices: usize) -> impl Strategy<Value = SimplicialScheme> {
    (1usize..=max_vertices).prop_flat_map(|n| {
        proptest::collection::vec(1u32..(1 << n), 1..=6).prop_map(move |masks| {
            let vertices: Vec<Label> = (0..n).map(|i| Label::new(format!("v{i}"))).collect();
            let facets: Vec<BTreeSet<Label>> = masks
                .iter()
                .map(|mask| {
                    (0..n)
                        .filter(|i| mask & (1 << i) != 0)
                        .map(|i| vertices[i].clone())
                        .collect()
                })
                .collect();
            SimplicialScheme::from_facets(vertices, facets).expect("masks are nonempty and known")
        })
    })
}

fn net_strategy() -> impl Strategy<Value = LabelledPetriNet> {
    let places = 1usize..=3;
    let events = 1usize..=4;
    (places, events).prop_flat_map(|(np, ne)| {
        let vectors = proptest::collection::vec(
            (
                proptest::collection::vec(0u64..=2, np),
                proptest::collection::vec(0u64..=2, np),
            ),
            ne,
        );
        let initial = proptest::collection::vec(0u64..=1, np);
        (vectors, initial).prop_map(move |(vectors, initial)| {
            let place_ids: Vec<PlaceId> = (0..np).map(|i| PlaceId::new(format!("p{i}"))).collect();
            let event_ids: Vec<EventId> = (0..ne).map(|i| EventId::new(format!("t{i}"))).collect();
            let mut pre = BTreeMap::new();
            let mut post = BTreeMap::new();
            for (event, (pre_counts, mut post_counts)) in event_ids.iter().zip(vectors) {
                let budget: u64 = pre_counts.iter().sum();
                let mut spent: u64 = post_counts.iter().sum();
                // Shave the post vector until the event is token-non-increasing.
                for slot in post_counts.iter_mut() {
                    while spent > budget && *slot > 0 {
                        *slot -= 1;
                        spent -= 1;
                    }
                }
                let to_map = |counts: &[u64]| -> BTreeMap<PlaceId, u64> {
                    place_ids
                        .iter()
                        .zip(counts)
                        .filter(|(_, c)| **c > 0)
                        .map(|(p, c)| (p.clone(), *c))
                        .collect()
                };
                pre.insert(event.clone(), to_map(&pre_counts));
                post.insert(event.clone(), to_map(&post_counts));
            }
            let marking: BTreeMap<PlaceId, u64> = place_ids
                .iter()
                .zip(&initial)
                .map(|(p, c)| (p.clone(), *c))
                .collect();
            let net = PetriNet::new(place_ids, event_ids.clone(), pre, post, marking)
                .expect("generated vectors are over the declared places");
            let labels: BTreeMap<EventId, Label> = event_ids
                .iter()
                .map(|event| (event.clone(), Label::new(format!("l-{event}"))))
                .collect();
            LabelledPetriNet::new(net, labels, None).expect("labels are total")
        })
    })
}

fn expanded(net: &LabelledPetriNet) -> LabelledAsyncSystem {
    net.expand(&Limits {
        max_states: 4096,
        max_tokens: 32,
    })
    .expect("token-non-increasing nets stay within the limits")
    .system
}

/// Rank over the rationals by Gaussian elimination; an oracle that never
/// touches the Smith normal form code it is checking.
fn rational_rank(matrix: &IntegerMatrix) -> usize {
    let mut rows: Vec<Vec<BigRational>> = (0..matrix.rows())
        .map(|i| {
            (0..matrix.cols())
                .map(|j| BigRational::from(matrix.get(i, j).clone()))
                .collect()
        })
        .collect();
    let mut rank = 0;
    for col in 0..matrix.cols() {
        let Some(pivot) = (rank..matrix.rows()).find(|&r| !rows[r][col].is_zero()) else {
            continue;
        };
        rows.swap(rank, pivot);
        let pivot_row = rows[rank].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r != rank && !row[col].is_zero() {
                let factor = &row[col] / &pivot_row[col];
                for (entry, lead) in row.iter_mut().zip(&pivot_row).skip(col) {
                    *entry -= lead * &factor;
                }
            }
        }
        rank += 1;
        if rank == matrix.rows() {
            break;
        }
    }
    rank
}

fn euler_characteristic(scheme: &SimplicialScheme) -> i64 {
    let Some(dimension) = scheme.dimension() else {
        return 0;
    };
    (0..=dimension)
        .map(|n| {
            let count = scheme.simplices_with_len(n + 1).len() as i64;
            if n % 2 == 0 {
                count
            } else {
                -count
            }
        })
        .sum()
}

fn runner() -> TestRunner {
    TestRunner::new(Config {
        cases: 256,
        failure_persistence: None,
        ..Config::default()
    })
}

#[test]
fn criterion_7_randomized_invariants() {
    criterion(7, "six randomized suites, 256 instances each", || {
        // Consecutive boundary maps compose to zero.
        runner()
            .run(&scheme_strategy(8), |scheme| {
                let Some(dimension) = scheme.dimension() else {
                    return Ok(());
                };
                for n in 1..=dimension {
                    let lower = boundary_matrix(&scheme, n);
                    let upper = boundary_matrix(&scheme, n + 1);
                    prop_assert!(lower.mul(&upper).is_zero(), "d{n} . d{} != 0", n + 1);
                }
                Ok(())
            })
            .expect("boundary squares to zero");

        // The homology signature does not depend on how vertices are named
        // or ordered.
        let renamed = scheme_strategy(5).prop_flat_map(|scheme| {
            let count = scheme.vertices().len();
            let order = Just((0..count).collect::<Vec<usize>>()).prop_shuffle();
            (Just(scheme), order)
        });
        runner()
            .run(&renamed, |(scheme, order)| {
                let old: Vec<Label> = scheme.vertices().iter().cloned().collect();
                let rename: BTreeMap<Label, Label> = old
                    .iter()
                    .zip(&order)
                    .map(|(v, i)| (v.clone(), Label::new(format!("w{i}"))))
                    .collect();
                let facets: Vec<BTreeSet<Label>> = scheme
                    .facets()
                    .into_iter()
                    .map(|facet| facet.iter().map(|v| rename[v].clone()).collect())
                    .collect();
                let shuffled = SimplicialScheme::from_facets(rename.values().cloned(), facets)
                    .expect("renaming keeps facets well formed");
                prop_assert_eq!(homology(&scheme), homology(&shuffled));
                Ok(())
            })
            .expect("homology is invariant under vertex renaming");

        // The alternating simplex count equals the alternating Betti sum.
        runner()
            .run(&scheme_strategy(5), |scheme| {
                let signature = homology(&scheme);
                let betti_sum: i64 = signature
                    .groups()
                    .iter()
                    .enumerate()
                    .map(|(n, group)| {
                        let betti = group.betti as i64;
                        if n % 2 == 0 {
                            betti
                        } else {
                            -betti
                        }
                    })
                    .sum();
                prop_assert_eq!(euler_characteristic(&scheme), betti_sum);
                Ok(())
            })
            .expect("Euler characteristic identity");

        // Smith normal form agrees with rational elimination on rank and
        // keeps its diagonal nonnegative with a divisibility chain.
        let matrices = (1usize..=5, 1usize..=5).prop_flat_map(|(rows, cols)| {
            proptest::collection::vec(-6i64..=6, rows * cols).prop_map(move |entries| {
                let rows: Vec<Vec<BigInt>> = entries
                    .chunks(cols)
                    .map(|chunk| chunk.iter().map(|&x| BigInt::from(x)).collect())
                    .collect();
                IntegerMatrix::from_rows(rows)
            })
        });
        runner()
            .run(&matrices, |matrix| {
                let form = smith_normal_form(&matrix);
                prop_assert_eq!(form.rank(), rational_rank(&matrix));
                let diagonal = form.diagonal();
                let zero = BigInt::from(0);
                for d in diagonal {
                    prop_assert!(*d >= zero, "negative diagonal entry {d}");
                }
                for pair in diagonal.windows(2) {
                    if pair[0].is_zero() {
                        prop_assert!(pair[1].is_zero(), "nonzero after zero");
                    } else {
                        prop_assert!(
                            (&pair[1] % &pair[0]).is_zero(),
                            "{} does not divide {}",
                            pair[0],
                            pair[1]
                        );
                    }
                }
                Ok(())
            })
            .expect("Smith normal form rank and divisibility");

        // Swapping an independent pair anywhere in a word never changes the
        // trace action. Checking both orders at every state covers every
        // adjacent transposition by composition.
        runner()
            .run(&net_strategy(), |net| {
                let system = expanded(&net);
                let inner = system.system();
                for state in inner.states() {
                    for (a, b) in inner.independence().pairs() {
                        let forward = inner.act(state, &[a.clone(), b.clone()]).unwrap();
                        let backward = inner.act(state, &[b.clone(), a.clone()]).unwrap();
                        prop_assert_eq!(
                            &forward,
                            &backward,
                            "swap of ({}, {}) at {} changed the endpoint",
                            a,
                            b,
                            state
                        );
                    }
                }
                Ok(())
            })
            .expect("trace action is transposition invariant");

        // Every net expansion satisfies the system axioms as published.
        runner()
            .run(&net_strategy(), |net| {
                let report = expanded(&net).system().validate();
                prop_assert!(report.is_valid(), "violations: {:?}", report.violations());
                Ok(())
            })
            .expect("net expansions validate");
    });
}

fn identity_morphism(system: &LabelledAsyncSystem) -> SystemMorphism {
    let sigma: BTreeMap<StateId, StateId> = system
        .system()
        .states()
        .iter()
        .map(|state| (state.clone(), state.clone()))
        .collect();
    let eta: BTreeMap<EventId, EventId> = system
        .system()
        .events()
        .iter()
        .map(|event| (event.clone(), event.clone()))
        .collect();
    SystemMorphism::new(system.clone(), system.clone(), sigma, eta)
}

fn span_fixture(path: &str, left: &str, right: &str) -> Span {
    SpanDoc::parse(&read_workspace_file(path))
        .expect("span fixture parses")
        .into_span(system_fixture(left), system_fixture(right))
        .expect("span fixture builds")
}

/// The one-state counterexample: three looping events of which only one
/// pair is independent, mapped onto a two-event target that collapses the
/// other two. Step surjectivity holds in every degree, openness does not.
fn collapsing_morphism() -> SystemMorphism {
    let source_system = AsyncSystem::new(
        [s("s0")],
        s("s0"),
        ["a", "b", "c"].map(e),
        IndependenceRelation::from_pairs([(e("a"), e("b"))]).unwrap(),
        [
            (s("s0"), e("a"), s("s0")),
            (s("s0"), e("b"), s("s0")),
            (s("s0"), e("c"), s("s0")),
        ],
    )
    .unwrap();
    let source_labels: BTreeMap<EventId, Label> = [
        (e("a"), Label::new("x")),
        (e("b"), Label::new("y")),
        (e("c"), Label::new("x")),
    ]
    .into_iter()
    .collect();
    let source = LabelledAsyncSystem::new(source_system, source_labels, None).unwrap();

    let target_system = AsyncSystem::new(
        [s("t0")],
        s("t0"),
        ["p", "q"].map(e),
        IndependenceRelation::from_pairs([(e("p"), e("q"))]).unwrap(),
        [(s("t0"), e("p"), s("t0")), (s("t0"), e("q"), s("t0"))],
    )
    .unwrap();
    let target_labels: BTreeMap<EventId, Label> =
        [(e("p"), Label::new("x")), (e("q"), Label::new("y"))]
            .into_iter()
            .collect();
    let target = LabelledAsyncSystem::new(target_system, target_labels, None).unwrap();

    let sigma: BTreeMap<StateId, StateId> = [(s("s0"), s("t0"))].into_iter().collect();
    let eta: BTreeMap<EventId, EventId> = [(e("a"), e("p")), (e("b"), e("q")), (e("c"), e("p"))]
        .into_iter()
        .collect();
    SystemMorphism::new(source, target, sigma, eta)
}

#[test]
fn criterion_8_theorem_level_checks() {
    criterion(
        8,
        "certified spans, open maps, and the collapsing map",
        || {
            // A certified span forces equal homology signatures at both feet.
            let cube_span = span_fixture(
                "fixtures/cube-span.json",
                "fixtures/cube.json",
                "fixtures/cube-renamed.json",
            );
            assert_eq!(certify(&cube_span), Verdict::Certified);
            let left_signature = homology(&scheme_of_system(cube_span.left.target()));
            let right_signature = homology(&scheme_of_system(cube_span.right.target()));
            assert_eq!(left_signature, right_signature);

            // The unfolding span is sound but its right leg is not open, so the
            // certifier must refuse to certify it.
            let unfolding_span = span_fixture(
                "fixtures/unfolding-span.json",
                "fixtures/example2-left.json",
                "fixtures/example2-right.json",
            );
            assert!(matches!(
                certify(&unfolding_span),
                Verdict::Inconclusive { .. }
            ));

            // Every morphism accepted as open is surjective on independent step
            // tuples in every degree up to the target event count.
            let cube = system_fixture("fixtures/cube.json");
            let legs = [
                ("cube span left", cube_span.left.clone(), true),
                ("cube span right", cube_span.right.clone(), true),
                ("unfolding left", unfolding_span.left.clone(), true),
                ("unfolding right", unfolding_span.right.clone(), false),
                ("cube identity", identity_morphism(&cube), true),
            ];
            for (name, leg, expect_open) in &legs {
                assert!(leg.is_valid(), "{name} is not even a morphism");
                assert_eq!(leg.is_open(), *expect_open, "openness of {name}");
                if *expect_open {
                    for n in 0..=leg.target().system().events().len() {
                        assert!(
                            leg.surjective_on_steps(n).is_ok(),
                            "{name} misses a step tuple in degree {n}"
                        );
                    }
                }
            }

            // The collapsing morphism is step surjective in every degree yet is
            // rejected by the openness check, first on the pair (b, c).
            let collapsing = collapsing_morphism();
            assert!(collapsing.is_valid());
            for n in 0..=collapsing.source().system().events().len() {
                assert!(
                    collapsing.surjective_on_steps(n).is_ok(),
                    "collapsing map misses a step tuple in degree {n}"
                );
            }
            assert!(!collapsing.is_open());
            let violations = collapsing.openness_violations();
            assert_eq!(
                violations.first(),
                Some(&OpennessViolation::IndependenceNotReflected {
                    first: e("b"),
                    second: e("c"),
                    at_state: s("s0"),
                }),
                "unexpected first violation: {violations:?}"
            );
        },
    );
}
