//! Acceptance suite: one test per criterion, each printing a PASS/FAIL line
//! (visible with `cargo test --test acceptance -- --nocapture`). Bounds on
//! wall-clock time are asserted where the criterion states one. Everything
//! here is exact: no tolerances, integer dimension comparisons only.

use gottlieb_cli::parser::{parse_document, render_document, Payload};
use gottlieb_core::algebra::AlgebraMorphism;
use gottlieb_core::derivation::{d_matrix, der_slice, gottlieb_group, homology};
use gottlieb_core::fibration::KsModel;
use gottlieb_core::linalg::RatMatrix;
use gottlieb_core::{corpus, rat, rat_int, Rat};
use num::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::path::PathBuf;
use std::sync::Arc;
use std::time::{Duration, Instant};

const CORPUS_SEED: u64 = 1729;
const CORPUS_SIZE: usize = 100;

fn models_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../models")
}

fn load_ks(file: &str) -> KsModel {
    let text = std::fs::read_to_string(models_dir().join(file)).unwrap();
    match parse_document(&text).unwrap().payload {
        Payload::Fibration(m) => m,
        Payload::Algebra(_) => panic!("{file} should be a fibration"),
    }
}

fn report(index: u32, ok: bool, elapsed: Duration, detail: &str) {
    println!(
        "criterion {index} [{}] ({:.2?}): {detail}",
        if ok { "PASS" } else { "FAIL" },
        elapsed
    );
    assert!(ok, "criterion {index} failed: {detail}");
}

/// Criterion 1: the twisted bundle. The degree-4 twisting derivation is not
/// a boundary, the projection dual has image 0 inside the one-dimensional
/// Hom_4(W, Q), and the verdict is "not trivial, witness 4". Runtime < 1 s.
#[test]
fn criterion_1_twisted_bundle() {
    let start = Instant::now();
    let model = load_ks("twisted-cp2.ks");

    let classes = model.classify().unwrap();
    let w4 = classes.rows.iter().find(|r| r.base_gen == "w4").unwrap();
    let classify_ok = !w4.is_boundary
        && classes
            .per_degree
            .iter()
            .any(|&(d, trivial)| d == 4 && !trivial);

    let seq4 = model.gottlieb_sequence(4).unwrap();
    let sequence_ok = seq4.qp_matrix.rank() == 0 && seq4.hom_w_dim == 1 && !seq4.exact_right;

    let verdict = model.is_rationally_gottlieb_trivial(8).unwrap();
    let verdict_ok = !verdict.trivial && verdict.witness_degree == Some(4);

    let elapsed = start.elapsed();
    let ok = classify_ok && sequence_ok && verdict_ok && elapsed < Duration::from_secs(1);
    report(
        1,
        ok,
        elapsed,
        &format!(
            "twisted bundle: theta_w4 boundary={}, QP image dim {}/{}, witness {:?}",
            w4.is_boundary,
            seq4.qp_matrix.rank(),
            seq4.hom_w_dim,
            verdict.witness_degree
        ),
    );
}

/// Criterion 2: the untwisted bundle is rationally trivial: every twisting
/// class vanishes, and the sequence is exact with GH_n = 0 in all degrees
/// <= 8. Runtime < 1 s.
#[test]
fn criterion_2_untwisted_bundle() {
    let start = Instant::now();
    let model = load_ks("untwisted-cp2.ks");

    let classes = model.classify().unwrap();
    let mut ok = classes.all_trivial;
    let mut detail = String::from("untwisted bundle: classes trivial");
    for n in 2..=8 {
        let seq = model.gottlieb_sequence(n).unwrap();
        if !seq.exact() || seq.gottlieb_homology_dim != 0 {
            ok = false;
            detail = format!("untwisted bundle: degree {n} not exact or GH != 0");
            break;
        }
    }
    let verdict = model.is_rationally_gottlieb_trivial(8).unwrap();
    ok &= verdict.trivial;

    let elapsed = start.elapsed();
    ok &= elapsed < Duration::from_secs(1);
    report(2, ok, elapsed, &detail);
}

/// Criterion 3: the family with dim GH_k = n. For (k, n) in {(3,1), (3,3),
/// (3,5), (5,3)}: the Gottlieb homology at degree k equals n, and the fibre
/// Gottlieb groups vanish except in degree k(n+1)-1 where they have
/// dimension 1, over 2 <= j <= k(n+1)-1. Runtime < 30 s for the largest
/// case.
#[test]
fn criterion_3_gottlieb_homology_family() {
    let start = Instant::now();
    let cases: [(usize, usize, &str); 4] = [
        (3, 1, "ghn-k3n1.ks"),
        (3, 3, "ghn-k3n3.ks"),
        (3, 5, "ghn-k3n5.ks"),
        (5, 3, "ghn-k5n3.ks"),
    ];
    let mut ok = true;
    let mut details = Vec::new();
    for (k, n, file) in cases {
        let case_start = Instant::now();
        let model = load_ks(file);
        let gh = model.gottlieb_homology_dim(k).unwrap();
        let gh_ok = gh == n;

        let top = k * (n + 1) - 1;
        let mut gottlieb_ok = true;
        for j in 2..=top {
            let dim = gottlieb_group(model.fibre(), j).unwrap().dim();
            let expect = usize::from(j == top);
            if dim != expect {
                gottlieb_ok = false;
                details.push(format!(
                    "(k,n)=({k},{n}): G_{j}(fibre) = {dim}, expected {expect}"
                ));
            }
        }
        let case_elapsed = case_start.elapsed();
        let time_ok = case_elapsed < Duration::from_secs(30);
        if !gh_ok {
            details.push(format!(
                "(k,n)=({k},{n}): GH_{k} = {gh}, expected {n} ({case_elapsed:.2?})"
            ));
        }
        ok &= gh_ok && gottlieb_ok && time_ok;
    }
    let elapsed = start.elapsed();
    let detail = if details.is_empty() {
        "GH_k = n and fibre Gottlieb groups concentrated in degree k(n+1)-1 for all four cases"
            .to_string()
    } else {
        details.join("; ")
    };
    report(3, ok, elapsed, &detail);
}

/// Criterion 4: tri-equivalence oracle. On a seeded corpus of >= 100 random
/// valid KS models with minimal total algebra, the three triviality
/// predicates agree on every model; the CLI exits 2 on any disagreement.
/// Runtime < 5 min.
#[test]
fn criterion_4_tri_equivalence_oracle() {
    let start = Instant::now();
    let models = corpus::generate(CORPUS_SEED, CORPUS_SIZE).unwrap();
    assert!(models.len() >= 100);
    let mut agreements = 0usize;
    let mut failure = None;
    for (i, model) in models.iter().enumerate() {
        let cap = model.total().max_gen_degree();
        let tri = model.tri_equivalence_check(cap).unwrap();
        if tri.agree() {
            agreements += 1;
        } else if failure.is_none() {
            failure = Some(format!(
                "model {i}: classes={} exact={} surjective={}",
                tri.classes_trivial, tri.sequence_exact, tri.projection_surjective
            ));
        }
    }

    // The CLI path enforces exit code 2 on disagreement; on an agreeing
    // corpus it must exit 0.
    let out = std::process::Command::new(env!("CARGO_BIN_EXE_gottlieb"))
        .args([
            "fuzz",
            "--models",
            &CORPUS_SIZE.to_string(),
            "--seed",
            &CORPUS_SEED.to_string(),
        ])
        .output()
        .unwrap();
    let cli_ok = out.status.code() == Some(0);

    let elapsed = start.elapsed();
    let ok = agreements == models.len() && cli_ok && elapsed < Duration::from_secs(300);
    report(
        4,
        ok,
        elapsed,
        &failure.unwrap_or_else(|| {
            format!(
                "{agreements}/{} models agree (seed {CORPUS_SEED})",
                models.len()
            )
        }),
    );
}

fn random_coeff(rng: &mut ChaCha8Rng) -> Rat {
    let opts = [(1i64, 1i64), (-1, 1), (2, 1), (-3, 1), (1, 2), (-2, 3)];
    let (p, q) = opts[rng.gen_range(0..opts.len())];
    rat(p, q)
}

fn random_element(
    alg: &gottlieb_core::algebra::DgAlgebra,
    degree: usize,
    rng: &mut ChaCha8Rng,
) -> gottlieb_core::algebra::Element {
    let basis = alg.basis_of_degree(degree);
    let mut out = gottlieb_core::algebra::Element::zero();
    if basis.is_empty() {
        return out;
    }
    for _ in 0..rng.gen_range(1..=3usize) {
        let mono = basis[rng.gen_range(0..basis.len())].clone();
        out = out.add(&alg.monomial_elem(mono, random_coeff(rng)));
    }
    out
}

/// Criterion 5: the algebra property suite. 1000 randomized checks each of
/// graded commutativity, associativity, the Leibniz rule for the
/// differential and for derivation evaluation, and d^2 = 0; plus
/// D_phi . D_phi = 0 as a matrix identity on every populated slice of the
/// corpus models. Exact; runtime < 2 min.
#[test]
fn criterion_5_algebra_property_suite() {
    let start = Instant::now();
    let models = corpus::generate(CORPUS_SEED, CORPUS_SIZE).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut ok = true;
    let mut detail = String::from(
        "1000 checks each: commutativity, associativity, Leibniz (d and evaluate), d^2; \
         D^2 = 0 on all populated slices",
    );

    let algebras: Vec<Arc<gottlieb_core::algebra::DgAlgebra>> = models
        .iter()
        .flat_map(|m| [Arc::clone(m.fibre()), Arc::clone(m.total())])
        .collect();
    let pick_degree = |alg: &gottlieb_core::algebra::DgAlgebra, rng: &mut ChaCha8Rng| {
        rng.gen_range(1..=alg.max_gen_degree().max(1))
    };

    for check in 0..1000 {
        let alg = &algebras[rng.gen_range(0..algebras.len())];
        let p = pick_degree(alg, &mut rng);
        let q = pick_degree(alg, &mut rng);
        let a = random_element(alg, p, &mut rng);
        let b = random_element(alg, q, &mut rng);
        let c = random_element(alg, pick_degree(alg, &mut rng), &mut rng);

        // Graded commutativity.
        let sign = if (p * q) % 2 == 0 {
            rat_int(1)
        } else {
            rat_int(-1)
        };
        if alg.multiply(&a, &b) != alg.multiply(&b, &a).scale(&sign) {
            ok = false;
            detail = format!("graded commutativity failed at check {check}");
            break;
        }
        // Associativity.
        if alg.multiply(&alg.multiply(&a, &b), &c) != alg.multiply(&a, &alg.multiply(&b, &c)) {
            ok = false;
            detail = format!("associativity failed at check {check}");
            break;
        }
        // Leibniz for the differential.
        let dsign = if p % 2 == 0 { rat_int(1) } else { rat_int(-1) };
        let lhs = alg.apply_d(&alg.multiply(&a, &b));
        let rhs = alg
            .multiply(&alg.apply_d(&a), &b)
            .add(&alg.multiply(&a, &alg.apply_d(&b)).scale(&dsign));
        if lhs != rhs {
            ok = false;
            detail = format!("differential Leibniz failed at check {check}");
            break;
        }
        // d^2 = 0.
        if !alg.apply_d(&alg.apply_d(&a)).is_zero() {
            ok = false;
            detail = format!("d^2 failed at check {check}");
            break;
        }
        // Twisted Leibniz for derivation evaluation.
        let model = &models[rng.gen_range(0..models.len())];
        let phi = if rng.gen_bool(0.5) {
            Arc::clone(model.j())
        } else {
            Arc::new(AlgebraMorphism::identity(model.fibre()))
        };
        let n = rng.gen_range(1..=phi.source.max_gen_degree().max(1));
        let slice = der_slice(&phi, n);
        if slice.dim() > 0 {
            let coeffs: Vec<Rat> = (0..slice.dim()).map(|_| random_coeff(&mut rng)).collect();
            let theta = slice.derivation_from(&coeffs);
            let px = pick_degree(&phi.source, &mut rng);
            let x = random_element(&phi.source, px, &mut rng);
            let y = random_element(&phi.source, pick_degree(&phi.source, &mut rng), &mut rng);
            let esign = if (n * px) % 2 == 0 {
                rat_int(1)
            } else {
                rat_int(-1)
            };
            let lhs = theta.evaluate(&phi.source.multiply(&x, &y));
            let rhs = phi
                .target
                .multiply(&theta.evaluate(&x), &phi.apply(&y))
                .add(
                    &phi.target
                        .multiply(&phi.apply(&x), &theta.evaluate(&y))
                        .scale(&esign),
                );
            if lhs != rhs {
                ok = false;
                detail = format!("evaluation Leibniz failed at check {check}");
                break;
            }
        }
    }

    // D_phi^2 = 0 as matrix identities on every populated slice.
    if ok {
        'models: for model in &models {
            let id = Arc::new(AlgebraMorphism::identity(model.fibre()));
            for phi in [model.j(), &id] {
                let cap = phi.source.max_gen_degree();
                for n in 1..=cap {
                    let dn = d_matrix(phi, n).unwrap();
                    let dn1 = d_matrix(phi, n + 1).unwrap();
                    if !dn.mul(&dn1).unwrap().is_zero() {
                        ok = false;
                        detail = format!("D^2 != 0 on {} degree {n}", model.name());
                        break 'models;
                    }
                }
            }
        }
    }

    let elapsed = start.elapsed();
    let ok = ok && elapsed < Duration::from_secs(120);
    report(5, ok, elapsed, &detail);
}

/// Rank by plain forward elimination; deliberately independent of the
/// pivot-tracking rref used by the library.
fn naive_rank(m: &RatMatrix) -> usize {
    let rows = m.rows();
    let cols = m.cols();
    let mut a: Vec<Vec<Rat>> = (0..rows).map(|i| m.row(i)).collect();
    let mut rank = 0;
    for col in 0..cols {
        let Some(pivot) = (rank..rows).find(|&r| !a[r][col].is_zero()) else {
            continue;
        };
        a.swap(rank, pivot);
        for r in (rank + 1)..rows {
            if a[r][col].is_zero() {
                continue;
            }
            let factor = &a[r][col] / &a[rank][col];
            for c in col..cols {
                let x = &a[r][c] - &factor * &a[rank][c];
                a[r][c] = x;
            }
        }
        rank += 1;
        if rank == rows {
            break;
        }
    }
    rank
}

/// Criterion 6: homology dimensions computed through the pivoting path agree
/// with a naive dense rank computation, for every corpus model and every
/// degree <= 8. Exact.
#[test]
fn criterion_6_homology_oracle_equivalence() {
    let start = Instant::now();
    let models = corpus::generate(CORPUS_SEED, CORPUS_SIZE).unwrap();
    let mut ok = true;
    let mut detail = format!(
        "pivoting homology dims equal naive-rank dims on {} models, degrees 1..=8",
        models.len()
    );
    'outer: for model in &models {
        let id = Arc::new(AlgebraMorphism::identity(model.fibre()));
        for phi in [model.j(), &id] {
            for n in 1..=8usize {
                let pivoting = homology(phi, n).unwrap().dim;
                let dn = d_matrix(phi, n).unwrap();
                let dn1 = d_matrix(phi, n + 1).unwrap();
                let naive = (dn.cols() - naive_rank(&dn)) - naive_rank(&dn1);
                if pivoting != naive {
                    ok = false;
                    detail = format!(
                        "{} degree {n}: pivoting {pivoting} != naive {naive}",
                        model.name()
                    );
                    break 'outer;
                }
            }
        }
        // Fibre cohomology through the same two routes.
        for m in 0..=8usize {
            let alg = model.fibre();
            let d_m = alg.cochain_d_matrix(m);
            let kernel = d_m.cols() - naive_rank(&d_m);
            let image = if m == 0 {
                0
            } else {
                naive_rank(&alg.cochain_d_matrix(m - 1))
            };
            if alg.cohomology_dim(m) != kernel - image {
                ok = false;
                detail = format!("{} cohomology degree {m} mismatch", model.name());
                break 'outer;
            }
        }
    }
    let elapsed = start.elapsed();
    report(6, ok, elapsed, &detail);
}

/// Criterion 7: parser round-trip stability on every bundled model file, and
/// byte-identical JSON reports across two runs with the same seed and
/// version.
#[test]
fn criterion_7_parser_and_report_stability() {
    let start = Instant::now();
    let mut ok = true;
    let mut detail = String::from("round-trip stable; JSON byte-identical across runs");

    let mut bundled: Vec<PathBuf> = std::fs::read_dir(models_dir())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| {
            matches!(
                p.extension().and_then(|e| e.to_str()),
                Some("dga") | Some("ks")
            )
        })
        .collect();
    bundled.sort();
    assert!(bundled.len() >= 8, "bundled corpus present");
    for path in &bundled {
        let text = std::fs::read_to_string(path).unwrap();
        let doc = match parse_document(&text) {
            Ok(d) => d,
            Err(e) => {
                ok = false;
                detail = format!("{} fails to parse: {e}", path.display());
                break;
            }
        };
        let rendered = render_document(&doc);
        match parse_document(&rendered) {
            Ok(again) => {
                if render_document(&again) != rendered {
                    ok = false;
                    detail = format!("{} is not a render fixed point", path.display());
                    break;
                }
            }
            Err(e) => {
                ok = false;
                detail = format!("{} re-parse failed: {e}", path.display());
                break;
            }
        }
    }

    if ok {
        let run = |args: &[&str]| {
            std::process::Command::new(env!("CARGO_BIN_EXE_gottlieb"))
                .args(args)
                .output()
                .unwrap()
        };
        let seq_path = models_dir().join("twisted-cp2.ks");
        let seq_args = [
            "sequence",
            seq_path.to_str().unwrap(),
            "--max-degree",
            "8",
            "--json",
        ];
        let fuzz_args = ["fuzz", "--models", "20", "--seed", "7", "--json"];
        for args in [&seq_args[..], &fuzz_args[..]] {
            let first = run(args);
            let second = run(args);
            if !first.status.success() || first.stdout != second.stdout {
                ok = false;
                detail = format!("report for {args:?} not byte-identical");
                break;
            }
        }
    }

    let elapsed = start.elapsed();
    report(7, ok, elapsed, &detail);
}
