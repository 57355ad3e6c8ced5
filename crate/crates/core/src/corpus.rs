//! Seeded random generation of valid KS models with minimal total algebra.
//!
//! The generator draws small base and fibre algebras with decomposable
//! differentials, adds W-word-count-1 twisting terms, and keeps a candidate
//! only if d^2 = 0 survives everywhere (rejection sampling). Used by the
//! tri-equivalence cross-check and the property suites.

use crate::algebra::{DgAlgebra, Element, Monomial};
use crate::fibration::KsModel;
use crate::{rat, Rat};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("could not assemble {wanted} valid models after {attempts} attempts")]
    Exhausted { wanted: usize, attempts: usize },
}

const COEFF_POOL: [(i64, i64); 6] = [(1, 1), (-1, 1), (2, 1), (-2, 1), (1, 2), (-1, 2)];

fn pick_coeff(rng: &mut ChaCha8Rng) -> Rat {
    let (p, q) = COEFF_POOL[rng.gen_range(0..COEFF_POOL.len())];
    rat(p, q)
}

/// Monomials of the given degree and word length >= 2 (decomposables).
fn decomposables(alg: &DgAlgebra, degree: usize) -> Vec<Monomial> {
    alg.basis_of_degree(degree)
        .iter()
        .filter(|m| m.word_length() >= 2)
        .cloned()
        .collect()
}

/// A random differential on the free algebra: each generator gets zero or a
/// short combination of decomposable monomials of the right degree. The
/// result may fail d^2 = 0; the caller rejects such candidates.
fn randomize_differential(alg: &mut DgAlgebra, rng: &mut ChaCha8Rng, nonzero_prob: f64) {
    let names: Vec<(String, usize)> = alg
        .gens()
        .iter()
        .map(|g| (g.name.clone(), g.degree))
        .collect();
    for (name, degree) in names {
        if rng.gen_bool(1.0 - nonzero_prob) {
            continue;
        }
        let candidates = decomposables(alg, degree + 1);
        if candidates.is_empty() {
            continue;
        }
        let terms = rng.gen_range(1..=2usize.min(candidates.len()));
        let mut image = Element::zero();
        for _ in 0..terms {
            let mono = candidates[rng.gen_range(0..candidates.len())].clone();
            image = image.add(&alg.monomial_elem(mono, pick_coeff(rng)));
        }
        if image.is_zero() {
            continue;
        }
        alg.set_differential(&name, image)
            .expect("candidate degree matches by construction");
    }
}

/// One attempt at a random model; `None` when d^2 = 0 fails at any layer.
fn random_model(rng: &mut ChaCha8Rng, index: usize) -> Option<KsModel> {
    let base_count = rng.gen_range(1..=3usize);
    let base_gens: Vec<(String, usize)> = (0..base_count)
        .map(|i| (format!("w{}", i + 1), rng.gen_range(2..=8usize)))
        .collect();
    let mut base = DgAlgebra::free("base", base_gens).ok()?;
    randomize_differential(&mut base, rng, 0.4);
    if !base.check().ok() {
        return None;
    }

    let fibre_count = rng.gen_range(1..=4usize);
    let fibre_gens: Vec<(String, usize)> = (0..fibre_count)
        .map(|i| (format!("v{}", i + 1), rng.gen_range(2..=11usize)))
        .collect();
    let mut fibre = DgAlgebra::free("fibre", fibre_gens).ok()?;
    randomize_differential(&mut fibre, rng, 0.6);
    if !fibre.check().ok() {
        return None;
    }

    // Twisting: count-1 candidates w * mu with mu a nonunit fibre monomial,
    // so the total algebra stays minimal by construction.
    let shell = KsModel::total_shell(&base, &fibre).ok()?;
    let mut overrides = Vec::new();
    for g in fibre.gens() {
        if !rng.gen_bool(0.5) {
            continue;
        }
        let mut candidates = Vec::new();
        for w in base.gens() {
            if w.degree + 1 > g.degree + 1 {
                continue;
            }
            let mu_degree = g.degree + 1 - w.degree;
            let w_total = shell
                .gen_elem_by_name(&w.name)
                .expect("shell has base gens");
            for mu in fibre.basis_of_degree(mu_degree).iter() {
                if mu.is_unit() {
                    continue;
                }
                let mu_total = crate::fibration::transport(
                    &fibre.monomial_elem(mu.clone(), rat(1, 1)),
                    &shell,
                    &fibre,
                )
                .expect("fibre names exist in the shell");
                candidates.push(shell.multiply(&w_total, &mu_total));
            }
        }
        if candidates.is_empty() {
            continue;
        }
        let picks = rng.gen_range(1..=2usize.min(candidates.len()));
        let mut twist = Element::zero();
        for _ in 0..picks {
            let c = &candidates[rng.gen_range(0..candidates.len())];
            twist = twist.add(&c.scale(&pick_coeff(rng)));
        }
        if twist.is_zero() {
            continue;
        }
        let inherited = crate::fibration::transport(
            &fibre.d_image(fibre.gen_index(&g.name).unwrap()),
            &shell,
            &fibre,
        )
        .expect("fibre names exist in the shell");
        overrides.push((g.name.clone(), inherited.add(&twist)));
    }

    let model = KsModel::new(format!("corpus-{index}"), base, fibre, overrides).ok()?;
    let report = model.validate();
    if !report.ok() || !report.total_minimal {
        return None;
    }
    // Twisting derivations must extract cleanly (cycles); minimal bases make
    // this automatic, but the check is the contract.
    model.extract_theta().ok()?;
    Some(model)
}

/// Deterministically generates `count` valid KS models with minimal total
/// algebra from the given seed.
pub fn generate(seed: u64, count: usize) -> Result<Vec<KsModel>, CorpusError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut models = Vec::with_capacity(count);
    let max_attempts = 400 * count.max(1);
    let mut attempts = 0;
    while models.len() < count {
        if attempts >= max_attempts {
            return Err(CorpusError::Exhausted {
                wanted: count,
                attempts,
            });
        }
        attempts += 1;
        if let Some(model) = random_model(&mut rng, models.len()) {
            models.push(model);
        }
    }
    Ok(models)
}
