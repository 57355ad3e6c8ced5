//! Koszul-Sullivan fibration models and their Gottlieb-sequence analysis.
//!
//! A model is a triple of free DG algebras `Lambda W -> Lambda(W + V) ->
//! Lambda V` where the total differential restricts to the base differential
//! on W and projects to the fibre differential on V. From the total
//! differential we extract the twisting derivations `theta_j`: writing
//!
//! ```text
//! d_E(v) = d_X(v) + sum_j w_j theta_j(v) + B_E(v)
//! ```
//!
//! with `B_E(v)` of W-word-count >= 2, each `theta_j` is a degree
//! `|w_j| - 1` derivation cycle on the fibre. Whether the `theta_j` are
//! boundaries decides the rational triviality of the classifying map, and
//! the three-term sequence
//!
//! ```text
//! 0 -> G_n(Lambda V) -> G_n(Lambda(W+V), Lambda V; J) -> Hom_n(W, Q) -> 0
//! ```
//!
//! is computed degreewise with exactness diagnostics and Gottlieb homology.

use crate::algebra::{AlgebraError, AlgebraMorphism, DgAlgebra, DgaViolation, Element, Monomial};
use crate::derivation::{
    d_matrix, der_slice, evaluation_subgroup, gottlieb_group, homology, is_boundary, DerError,
    DerHomology, PhiDerivation,
};
use crate::linalg::{quotient_dim, quotient_representatives, LinalgError, RatMatrix, Subspace};
use crate::{rat_int, Rat};
use num::Zero;
use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, OnceLock};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FibError {
    #[error("generator '{name}' appears in both the base and the fibre")]
    NameClash { name: String },
    #[error("unknown generator '{name}'")]
    UnknownGenerator { name: String },
    #[error(
        "cannot override the differential of base generator '{name}'; the base differential is fixed"
    )]
    BaseDifferentialFixed { name: String },
    #[error("model is invalid: {summary}")]
    ModelInvalid { summary: String },
    #[error("total algebra is not minimal: d({gen}) contains the linear term {term}")]
    TotalNotMinimal { gen: String, term: String },
    #[error("degree {degree} is too small; sequence operations require degree >= 2")]
    DegreeTooSmall { degree: usize },
    #[error(
        "extracted twisting derivation for base generator '{base_gen}' is not a cycle; the model or a sign is faulty"
    )]
    ThetaNotCycle { base_gen: String },
    #[error("internal invariant violated: {0}")]
    Internal(String),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Der(#[from] DerError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Findings of [`KsModel::validate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum KsViolation {
    /// d_E does not agree with d_B on a base generator.
    BaseDifferentialChanged {
        gen: String,
    },
    /// The W-word-count-0 part of d_E(v) differs from d_X(v); carries the
    /// mismatch.
    FibreProjection {
        gen: String,
        residual: Element,
    },
    TotalAlgebra(DgaViolation),
    BaseAlgebra(DgaViolation),
    FibreAlgebra(DgaViolation),
}

/// Validation report for a KS model. `ok` covers the structural invariants;
/// minimality is reported separately because non-minimal total algebras are
/// legal inputs for classification but refused by the sequence operations.
#[derive(Debug, Clone)]
pub struct KsReport {
    pub violations: Vec<KsViolation>,
    pub total_minimal: bool,
    pub base_minimal: bool,
    pub fibre_minimal: bool,
    /// Witness for a non-minimal total algebra: (generator, linear monomial).
    pub linear_term: Option<(String, String)>,
}

impl KsReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn summary(&self) -> String {
        if self.ok() {
            return "valid".to_string();
        }
        self.violations
            .iter()
            .map(|v| match v {
                KsViolation::BaseDifferentialChanged { gen } => {
                    format!("d_E({gen}) differs from the base differential")
                }
                KsViolation::FibreProjection { gen, .. } => {
                    format!("the W-free part of d_E({gen}) differs from the fibre differential")
                }
                KsViolation::TotalAlgebra(v) => format!("total algebra: {}", dga_violation(v)),
                KsViolation::BaseAlgebra(v) => format!("base algebra: {}", dga_violation(v)),
                KsViolation::FibreAlgebra(v) => format!("fibre algebra: {}", dga_violation(v)),
            })
            .collect::<Vec<_>>()
            .join("; ")
    }
}

fn dga_violation(v: &DgaViolation) -> String {
    match v {
        DgaViolation::DifferentialDegree {
            gen,
            expected,
            found,
        } => format!("d({gen}) must have degree {expected}, found {found:?}"),
        DgaViolation::DSquareNotZero { gen, .. } => format!("d(d({gen})) is nonzero"),
    }
}

/// The extracted twisting family: one derivation per base generator, plus
/// the W-word-count >= 2 remainder of each fibre differential.
#[derive(Debug, Clone)]
pub struct ThetaFamily {
    /// Aligned with the base generator order; `thetas[j]` has degree
    /// `|w_j| - 1` and lives on (fibre, fibre, identity).
    pub thetas: Vec<PhiDerivation>,
    /// Aligned with the fibre generator order; elements of the total algebra
    /// whose monomials all have W-word-count >= 2.
    pub remainders: Vec<Element>,
}

/// Boundary status of one twisting derivation.
#[derive(Debug, Clone)]
pub struct ThetaClassRow {
    pub base_gen: String,
    /// |w_j|: the degree in which this class obstructs triviality. The
    /// derivation itself lives one degree lower.
    pub degree: usize,
    pub theta: PhiDerivation,
    pub is_boundary: bool,
    pub witness: Option<PhiDerivation>,
    /// Coordinates of the class in the representative basis of
    /// H_{|w_j|-1}(Der(fibre, fibre; 1)); empty when that homology vanishes.
    pub class_coordinates: Vec<Rat>,
    pub homology_dim: usize,
}

/// Per-generator and per-degree vanishing of the classifying-map invariant.
#[derive(Debug, Clone)]
pub struct ThetaClassReport {
    pub rows: Vec<ThetaClassRow>,
    /// For each base-generator degree n: true when every theta_j with
    /// |w_j| = n is a boundary.
    pub per_degree: Vec<(usize, bool)>,
    pub all_trivial: bool,
}

/// The three-term sequence in one degree, with exactness diagnostics.
#[derive(Debug, Clone)]
pub struct SequenceReport {
    pub degree: usize,
    /// Names of the degree-n total generators: ambient coordinates of
    /// `evaluation`.
    pub total_gens: Vec<String>,
    /// Names of the degree-n base generators: coordinates of Hom_n(W, Q).
    pub w_gens: Vec<String>,
    /// Names of the degree-n fibre generators.
    pub v_gens: Vec<String>,
    pub fibre_gottlieb: Subspace,
    pub evaluation: Subspace,
    pub hom_w_dim: usize,
    /// Extension-by-zero of the fibre Gottlieb basis into the total ambient.
    pub qj_matrix: RatMatrix,
    /// Restriction-to-W of the evaluation-subgroup basis.
    pub qp_matrix: RatMatrix,
    pub exact_left: bool,
    pub exact_middle: bool,
    pub exact_right: bool,
    pub gottlieb_homology_dim: usize,
}

impl SequenceReport {
    pub fn exact(&self) -> bool {
        self.exact_left && self.exact_middle && self.exact_right
    }
}

/// Verdict of the degree-capped triviality check.
#[derive(Debug, Clone)]
pub struct TrivialityVerdict {
    pub trivial: bool,
    pub witness_degree: Option<usize>,
    /// Base-generator degrees examined; surjectivity is vacuous everywhere
    /// else because Hom_n(W, Q) = 0 there.
    pub degrees_checked: Vec<usize>,
}

/// One degree of the tri-equivalence comparison.
#[derive(Debug, Clone)]
pub struct TriDegreeDetail {
    pub degree: usize,
    pub exact_left: bool,
    pub exact_middle: bool,
    pub exact_right: bool,
    pub gottlieb_homology_dim: usize,
}

/// Independent evaluations of the three equivalent triviality predicates:
/// (1) every twisting derivation is a boundary, (2) the sequence is exact in
/// every checked degree, (3) the restricted projection dual is surjective in
/// every checked degree. Disagreement indicates an implementation bug.
#[derive(Debug, Clone)]
pub struct TriEquivalence {
    pub classes_trivial: bool,
    pub sequence_exact: bool,
    pub projection_surjective: bool,
    pub degrees_checked: Vec<usize>,
    pub details: Vec<TriDegreeDetail>,
}

impl TriEquivalence {
    pub fn agree(&self) -> bool {
        self.classes_trivial == self.sequence_exact
            && self.sequence_exact == self.projection_surjective
    }
}

/// The induced map on fibre cohomology in one source degree.
#[derive(Debug, Clone)]
pub struct HolonomyDegree {
    pub source_degree: usize,
    pub target_degree: Option<usize>,
    pub source_dim: usize,
    pub target_dim: usize,
    /// target_dim x source_dim in the chosen cohomology bases.
    pub matrix: RatMatrix,
    /// Rendered cocycle representatives of the source basis.
    pub source_basis: Vec<String>,
}

/// The holonomy representation of one base generator: its twisting class
/// acting on H^*(fibre) by induced derivations.
#[derive(Debug, Clone)]
pub struct HolonomyReport {
    pub base_gen: String,
    /// Degree drop of the action: |w_j| - 1.
    pub shift: usize,
    pub degrees: Vec<HolonomyDegree>,
}

/// Maps an element into another algebra containing generators of the same
/// names. The canonical letter order compares (degree, name), which is
/// algebra-independent, so relative order is preserved and no sign arises.
pub fn transport(elem: &Element, to: &DgAlgebra, from: &DgAlgebra) -> Result<Element, FibError> {
    let mut out = to.zero();
    for (m, c) in elem.terms() {
        let mut word = Vec::new();
        for &(g, e) in m.word() {
            let name = &from.gen(g).name;
            let idx = to
                .gen_index(name)
                .ok_or_else(|| FibError::UnknownGenerator { name: name.clone() })?;
            for _ in 0..e {
                word.push(idx);
            }
        }
        let (sign, mono) = to
            .normalize_word(&word)
            .expect("transported word cannot repeat an odd letter");
        debug_assert_eq!(sign, 1, "relative letter order is preserved");
        out = out.add(&to.monomial_elem(mono, c.clone()));
    }
    Ok(out)
}

/// A Koszul-Sullivan model `Lambda W -> Lambda(W + V) -> Lambda V`.
///
/// Construction is structural; [`KsModel::validate`] checks the
/// compatibility invariants and caches the report. Operations whose
/// contract needs a valid model call `ensure_valid` first.
pub struct KsModel {
    name: String,
    base: Arc<DgAlgebra>,
    fibre: Arc<DgAlgebra>,
    total: Arc<DgAlgebra>,
    /// Total index of each base generator, aligned with the base order.
    base_in_total: Vec<u32>,
    /// Total index of each fibre generator, aligned with the fibre order.
    fibre_in_total: Vec<u32>,
    total_to_base: Vec<Option<u32>>,
    total_to_fibre: Vec<Option<u32>>,
    j: Arc<AlgebraMorphism>,
    p: Arc<AlgebraMorphism>,
    report: OnceLock<KsReport>,
}

impl fmt::Debug for KsModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("KsModel")
            .field("name", &self.name)
            .field("base", &self.base)
            .field("fibre", &self.fibre)
            .finish_non_exhaustive()
    }
}

impl PartialEq for KsModel {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
            && *self.base == *other.base
            && *self.fibre == *other.fibre
            && *self.total == *other.total
    }
}

impl Eq for KsModel {}

impl KsModel {
    /// The total algebra with both differentials inherited and no twisting.
    /// Override elements for [`KsModel::new`] are built against this.
    pub fn total_shell(base: &DgAlgebra, fibre: &DgAlgebra) -> Result<DgAlgebra, FibError> {
        for g in fibre.gens() {
            if base.gen_index(&g.name).is_some() {
                return Err(FibError::NameClash {
                    name: g.name.clone(),
                });
            }
        }
        let gens = base
            .gens()
            .iter()
            .chain(fibre.gens())
            .map(|g| (g.name.clone(), g.degree))
            .collect();
        let mut total = DgAlgebra::free("total", gens)?;
        for alg in [base, fibre] {
            for (i, g) in alg.gens().iter().enumerate() {
                let image = transport(alg.d_image(i as u32), &total, alg)?;
                total.set_differential(&g.name, image)?;
            }
        }
        Ok(total)
    }

    /// Builds a model from base and fibre algebras plus total-differential
    /// overrides on fibre generators. Unlisted fibre generators inherit the
    /// fibre differential; base differentials cannot be overridden.
    pub fn new(
        name: impl Into<String>,
        base: DgAlgebra,
        fibre: DgAlgebra,
        overrides: Vec<(String, Element)>,
    ) -> Result<Self, FibError> {
        let mut total = KsModel::total_shell(&base, &fibre)?;
        for (gen, image) in overrides {
            if base.gen_index(&gen).is_some() {
                return Err(FibError::BaseDifferentialFixed { name: gen });
            }
            if fibre.gen_index(&gen).is_none() {
                return Err(FibError::UnknownGenerator { name: gen });
            }
            total.set_differential(&gen, image)?;
        }
        let base = Arc::new(base);
        let fibre = Arc::new(fibre);
        let total = Arc::new(total);

        let base_in_total: Vec<u32> = base
            .gens()
            .iter()
            .map(|g| total.gen_index(&g.name).expect("union contains the base"))
            .collect();
        let fibre_in_total: Vec<u32> = fibre
            .gens()
            .iter()
            .map(|g| total.gen_index(&g.name).expect("union contains the fibre"))
            .collect();
        let mut total_to_base = vec![None; total.num_gens()];
        let mut total_to_fibre = vec![None; total.num_gens()];
        for (b, &t) in base_in_total.iter().enumerate() {
            total_to_base[t as usize] = Some(b as u32);
        }
        for (v, &t) in fibre_in_total.iter().enumerate() {
            total_to_fibre[t as usize] = Some(v as u32);
        }

        // J kills W and fixes V; P is the inclusion of the base.
        let j_images: Vec<Element> = total
            .gens()
            .iter()
            .map(|g| match fibre.gen_index(&g.name) {
                Some(idx) => fibre.gen_elem(idx),
                None => Element::zero(),
            })
            .collect();
        let j = Arc::new(AlgebraMorphism::new_unchecked(
            Arc::clone(&total),
            Arc::clone(&fibre),
            j_images,
        ));
        let p_images: Vec<Element> = base_in_total.iter().map(|&t| total.gen_elem(t)).collect();
        let p = Arc::new(AlgebraMorphism::new_unchecked(
            Arc::clone(&base),
            Arc::clone(&total),
            p_images,
        ));

        Ok(KsModel {
            name: name.into(),
            base,
            fibre,
            total,
            base_in_total,
            fibre_in_total,
            total_to_base,
            total_to_fibre,
            j,
            p,
            report: OnceLock::new(),
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn base(&self) -> &Arc<DgAlgebra> {
        &self.base
    }

    pub fn fibre(&self) -> &Arc<DgAlgebra> {
        &self.fibre
    }

    pub fn total(&self) -> &Arc<DgAlgebra> {
        &self.total
    }

    /// The projection J: total -> fibre (w -> 0, v -> v).
    pub fn j(&self) -> &Arc<AlgebraMorphism> {
        &self.j
    }

    /// The inclusion P: base -> total.
    pub fn p(&self) -> &Arc<AlgebraMorphism> {
        &self.p
    }

    fn w_count(&self, m: &Monomial) -> usize {
        m.word()
            .iter()
            .filter(|&&(g, _)| self.total_to_base[g as usize].is_some())
            .map(|&(_, e)| e as usize)
            .sum()
    }

    fn w_free_part(&self, elem: &Element) -> Element {
        let mut out = Element::zero();
        for (m, c) in elem.terms() {
            if self.w_count(m) == 0 {
                out = out.add(&self.total.monomial_elem(m.clone(), c.clone()));
            }
        }
        out
    }

    /// Checks every model invariant and reports minimality of all three
    /// algebras. Cached after the first call.
    pub fn validate(&self) -> &KsReport {
        self.report.get_or_init(|| {
            let mut violations = Vec::new();
            for v in self.base.check().violations {
                violations.push(KsViolation::BaseAlgebra(v));
            }
            for v in self.fibre.check().violations {
                violations.push(KsViolation::FibreAlgebra(v));
            }
            for v in self.total.check().violations {
                violations.push(KsViolation::TotalAlgebra(v));
            }
            for (b, &t) in self.base_in_total.iter().enumerate() {
                let expect = transport(self.base.d_image(b as u32), &self.total, &self.base)
                    .expect("base names exist in the total algebra");
                if *self.total.d_image(t) != expect {
                    violations.push(KsViolation::BaseDifferentialChanged {
                        gen: self.base.gen(b as u32).name.clone(),
                    });
                }
            }
            for (v, &t) in self.fibre_in_total.iter().enumerate() {
                let expect = transport(self.fibre.d_image(v as u32), &self.total, &self.fibre)
                    .expect("fibre names exist in the total algebra");
                let part0 = self.w_free_part(self.total.d_image(t));
                if part0 != expect {
                    violations.push(KsViolation::FibreProjection {
                        gen: self.fibre.gen(v as u32).name.clone(),
                        residual: part0.sub(&expect),
                    });
                }
            }
            let linear_term = self
                .total
                .first_linear_term()
                .map(|(g, m)| (g, self.total.format_monomial(&m)));
            KsReport {
                violations,
                total_minimal: linear_term.is_none(),
                base_minimal: self.base.is_minimal(),
                fibre_minimal: self.fibre.is_minimal(),
                linear_term,
            }
        })
    }

    pub fn is_valid(&self) -> bool {
        self.validate().ok()
    }

    /// One validation finding with the offending elements rendered.
    pub fn violation_message(&self, v: &KsViolation) -> String {
        match v {
            KsViolation::BaseDifferentialChanged { gen } => {
                format!("d_E({gen}) differs from the base differential")
            }
            KsViolation::FibreProjection { gen, residual } => format!(
                "the W-free part of d_E({gen}) differs from the fibre differential by {}",
                self.total.format_element(residual)
            ),
            KsViolation::TotalAlgebra(DgaViolation::DSquareNotZero { gen, residual }) => format!(
                "total algebra: d(d({gen})) = {}",
                self.total.format_element(residual)
            ),
            KsViolation::TotalAlgebra(v) => format!("total algebra: {}", dga_violation(v)),
            KsViolation::BaseAlgebra(v) => format!("base algebra: {}", dga_violation(v)),
            KsViolation::FibreAlgebra(v) => format!("fibre algebra: {}", dga_violation(v)),
        }
    }

    /// The fibre generators whose total differential differs from the
    /// inherited fibre differential, with their total-algebra images.
    pub fn total_overrides(&self) -> Vec<(String, Element)> {
        let mut out = Vec::new();
        for (vi, &t) in self.fibre_in_total.iter().enumerate() {
            let inherited = transport(self.fibre.d_image(vi as u32), &self.total, &self.fibre)
                .expect("fibre names exist in the total algebra");
            let actual = self.total.d_image(t);
            if *actual != inherited {
                out.push((self.fibre.gen(vi as u32).name.clone(), actual.clone()));
            }
        }
        out
    }

    pub fn ensure_valid(&self) -> Result<(), FibError> {
        let report = self.validate();
        if report.ok() {
            Ok(())
        } else {
            Err(FibError::ModelInvalid {
                summary: report.summary(),
            })
        }
    }

    fn ensure_total_minimal(&self) -> Result<(), FibError> {
        match &self.validate().linear_term {
            None => Ok(()),
            Some((gen, term)) => Err(FibError::TotalNotMinimal {
                gen: gen.clone(),
                term: term.clone(),
            }),
        }
    }

    /// Extracts the twisting derivations by partitioning each d_E(v) by
    /// W-word-count. A count-1 monomial is normalized to the form w_j * mu
    /// (base letter moved to the front, Koszul sign absorbed into the
    /// coefficient) and mu contributes to theta_j(v). Every theta_j must
    /// come out a cycle.
    pub fn extract_theta(&self) -> Result<ThetaFamily, FibError> {
        self.ensure_valid()?;
        let identity = Arc::new(AlgebraMorphism::identity(&self.fibre));
        let mut values: Vec<Vec<Element>> =
            vec![vec![Element::zero(); self.fibre.num_gens()]; self.base.num_gens()];
        let mut remainders = vec![Element::zero(); self.fibre.num_gens()];

        for (vi, &t) in self.fibre_in_total.iter().enumerate() {
            for (m, c) in self.total.d_image(t).terms() {
                match self.w_count(m) {
                    0 => {}
                    1 => {
                        let (j, mu, sign) = self.split_base_letter(m);
                        let term = self.fibre.monomial_elem(mu, c * rat_int(sign));
                        values[j as usize][vi] = values[j as usize][vi].add(&term);
                    }
                    _ => {
                        remainders[vi] =
                            remainders[vi].add(&self.total.monomial_elem(m.clone(), c.clone()));
                    }
                }
            }
        }

        let mut thetas = Vec::with_capacity(self.base.num_gens());
        for (j, vals) in values.into_iter().enumerate() {
            let degree = self.base.gen_degree(j as u32) - 1;
            let assignments = vals
                .into_iter()
                .enumerate()
                .map(|(v, e)| (v as u32, e))
                .collect();
            let theta = PhiDerivation::from_values(Arc::clone(&identity), degree, assignments)
                .map_err(|e| FibError::Internal(format!("theta extraction degrees: {e}")))?;
            if !theta.is_cycle() {
                return Err(FibError::ThetaNotCycle {
                    base_gen: self.base.gen(j as u32).name.clone(),
                });
            }
            thetas.push(theta);
        }

        let family = ThetaFamily { thetas, remainders };
        self.check_reconstruction(&family)?;
        Ok(family)
    }

    /// Splits a W-word-count-1 monomial into (base index, fibre-side
    /// remainder monomial, Koszul sign of moving the base letter to the
    /// front).
    fn split_base_letter(&self, m: &Monomial) -> (u32, Monomial, i64) {
        let mut sign = 1i64;
        let mut prefix_degree = 0usize;
        for &(g, e) in m.word() {
            if let Some(b) = self.total_to_base[g as usize] {
                debug_assert_eq!(e, 1, "W-word-count 1 forces exponent 1");
                if self.total.gen_degree(g) % 2 == 1 && prefix_degree % 2 == 1 {
                    sign = -sign;
                }
                let rest: Vec<(u32, u32)> = m
                    .word()
                    .iter()
                    .filter(|&&(h, _)| h != g)
                    .map(|&(h, e)| {
                        let v = self.total_to_fibre[h as usize]
                            .expect("count 1: every other letter is a fibre letter");
                        (v, e)
                    })
                    .collect();
                // Canonical order compares (degree, name) in both algebras,
                // so the renamed word stays sorted.
                return (b, Monomial::from_packed(rest), sign);
            }
            // Even-degree prefix letters never flip the sign; track parity.
            prefix_degree += self.total.gen_degree(g) * e as usize;
        }
        unreachable!("caller guarantees W-word-count 1")
    }

    /// Verifies d_E(v) = d_X(v) + sum_j w_j theta_j(v) + B_E(v) exactly.
    fn check_reconstruction(&self, family: &ThetaFamily) -> Result<(), FibError> {
        for (vi, &t) in self.fibre_in_total.iter().enumerate() {
            let mut sum = transport(self.fibre.d_image(vi as u32), &self.total, &self.fibre)?;
            for (j, theta) in family.thetas.iter().enumerate() {
                let val = theta.value(vi as u32);
                if val.is_zero() {
                    continue;
                }
                let w = self.total.gen_elem(self.base_in_total[j]);
                let lifted = transport(val, &self.total, &self.fibre)?;
                sum = sum.add(&self.total.multiply(&w, &lifted));
            }
            sum = sum.add(&family.remainders[vi]);
            if sum != *self.total.d_image(t) {
                return Err(FibError::Internal(format!(
                    "twisting reconstruction failed on fibre generator '{}'",
                    self.fibre.gen(vi as u32).name
                )));
            }
        }
        Ok(())
    }

    /// Boundary status of every twisting derivation. The classifying map is
    /// rationally trivial in degree n exactly when every theta_j with
    /// |w_j| = n is a boundary.
    pub fn classify(&self) -> Result<ThetaClassReport, FibError> {
        let family = self.extract_theta()?;
        let identity = Arc::new(AlgebraMorphism::identity(&self.fibre));
        let mut homology_cache: HashMap<usize, DerHomology> = HashMap::new();
        let mut rows = Vec::new();
        for (j, theta) in family.thetas.iter().enumerate() {
            let gen = self.base.gen(j as u32);
            let witness = is_boundary(&identity, theta)?;
            if let Some(w) = &witness {
                if w.d_phi() != *theta {
                    return Err(FibError::Internal(format!(
                        "boundary witness for theta of '{}' does not round-trip",
                        gen.name
                    )));
                }
            }
            let n = theta.degree();
            let (class_coordinates, homology_dim) = if n == 0 {
                (Vec::new(), 0)
            } else {
                if !homology_cache.contains_key(&n) {
                    homology_cache.insert(n, homology(&identity, n)?);
                }
                let h = &homology_cache[&n];
                let coords = if h.dim == 0 {
                    Vec::new()
                } else {
                    let vec = h.slice.vector_of(theta)?;
                    let mut columns: Vec<Vec<Rat>> =
                        h.classes.iter().map(|c| c.rep_vector.clone()).collect();
                    columns.extend(h.boundaries.basis().iter().cloned());
                    let coords = RatMatrix::from_columns(h.slice.dim(), &columns)?
                        .solve(&vec)?
                        .ok_or_else(|| {
                            FibError::Internal(
                                "cycle not expressible over representatives and boundaries".into(),
                            )
                        })?;
                    coords[..h.dim].to_vec()
                };
                (coords, h.dim)
            };
            rows.push(ThetaClassRow {
                base_gen: gen.name.clone(),
                degree: gen.degree,
                theta: theta.clone(),
                is_boundary: witness.is_some(),
                witness,
                class_coordinates,
                homology_dim,
            });
        }
        let mut degrees: Vec<usize> = rows.iter().map(|r| r.degree).collect();
        degrees.sort_unstable();
        degrees.dedup();
        let per_degree: Vec<(usize, bool)> = degrees
            .into_iter()
            .map(|d| {
                (
                    d,
                    rows.iter().filter(|r| r.degree == d).all(|r| r.is_boundary),
                )
            })
            .collect();
        let all_trivial = rows.iter().all(|r| r.is_boundary);
        Ok(ThetaClassReport {
            rows,
            per_degree,
            all_trivial,
        })
    }

    /// The rationalized Gottlieb sequence in degree n, with exactness flags
    /// and the Gottlieb homology dimension. Requires a valid model with
    /// minimal total algebra and n >= 2.
    pub fn gottlieb_sequence(&self, n: usize) -> Result<SequenceReport, FibError> {
        self.ensure_valid()?;
        self.ensure_total_minimal()?;
        if n < 2 {
            return Err(FibError::DegreeTooSmall { degree: n });
        }

        let fibre_gottlieb = gottlieb_group(&self.fibre, n)?;
        let evaluation = evaluation_subgroup(&self.j, n)?;
        self.check_obstruction_identity(n)?;

        let total_deg_n = self.total.gens_of_degree(n);
        let total_gens: Vec<String> = total_deg_n
            .iter()
            .map(|&g| self.total.gen(g).name.clone())
            .collect();
        let w_positions: Vec<usize> = total_deg_n
            .iter()
            .enumerate()
            .filter(|&(_, &g)| self.total_to_base[g as usize].is_some())
            .map(|(i, _)| i)
            .collect();
        let v_positions: Vec<usize> = total_deg_n
            .iter()
            .enumerate()
            .filter(|&(_, &g)| self.total_to_fibre[g as usize].is_some())
            .map(|(i, _)| i)
            .collect();
        let w_gens: Vec<String> = w_positions.iter().map(|&i| total_gens[i].clone()).collect();
        let v_gens: Vec<String> = v_positions.iter().map(|&i| total_gens[i].clone()).collect();
        let ambient = total_deg_n.len();
        let hom_w_dim = w_positions.len();

        // Q(J)^* restricted: extend each fibre functional by zero on W.
        let extended: Vec<Vec<Rat>> = fibre_gottlieb
            .basis()
            .iter()
            .map(|f| {
                let mut v = vec![Rat::zero(); ambient];
                for (k, &pos) in v_positions.iter().enumerate() {
                    v[pos] = f[k].clone();
                }
                v
            })
            .collect();
        let qj_matrix = RatMatrix::from_columns(ambient, &extended)?;
        for x in &extended {
            if !evaluation.contains(x) {
                return Err(FibError::Internal(
                    "a fibre Gottlieb class does not transport into the evaluation subgroup".into(),
                ));
            }
        }
        let image_j = Subspace::from_span(ambient, &extended)?;

        // Q(P)^* restricted: restrict each evaluation functional to W.
        let restricted: Vec<Vec<Rat>> = evaluation
            .basis()
            .iter()
            .map(|f| w_positions.iter().map(|&i| f[i].clone()).collect())
            .collect();
        let qp_matrix = RatMatrix::from_columns(hom_w_dim, &restricted)?;

        // ker(Q(P)^*|) inside the evaluation subgroup, back in ambient
        // coordinates.
        let kernel_vectors: Vec<Vec<Rat>> = qp_matrix
            .kernel_basis()
            .basis()
            .iter()
            .map(|c| {
                let mut v = vec![Rat::zero(); ambient];
                for (k, coeff) in c.iter().enumerate() {
                    if coeff.is_zero() {
                        continue;
                    }
                    for (i, x) in evaluation.basis()[k].iter().enumerate() {
                        v[i] += coeff * x;
                    }
                }
                v
            })
            .collect();
        let kernel_p = Subspace::from_span(ambient, &kernel_vectors)?;

        let gottlieb_homology_dim = quotient_dim(&kernel_p, &image_j).map_err(|e| {
            FibError::Internal(format!(
                "image of the fibre Gottlieb group escapes the kernel of the projection: {e}"
            ))
        })?;

        Ok(SequenceReport {
            degree: n,
            total_gens,
            w_gens,
            v_gens,
            exact_left: image_j.dim() == fibre_gottlieb.dim(),
            exact_middle: gottlieb_homology_dim == 0,
            exact_right: qp_matrix.rank() == hom_w_dim,
            fibre_gottlieb,
            evaluation,
            hom_w_dim,
            qj_matrix,
            qp_matrix,
            gottlieb_homology_dim,
        })
    }

    /// Cross-check kept on every J-derivation cycle psi of degree n: the
    /// restriction psi_X to the fibre satisfies
    /// `D(psi_X)(v) = (-1)^n sum_j psi(w_j) theta_j(v)` on every fibre
    /// generator.
    fn check_obstruction_identity(&self, n: usize) -> Result<(), FibError> {
        let family = self.extract_theta()?;
        let identity = Arc::new(AlgebraMorphism::identity(&self.fibre));
        let slice = der_slice(&self.j, n);
        let cycles = d_matrix(&self.j, n)?.kernel_basis();
        let sign = if n % 2 == 0 { rat_int(1) } else { rat_int(-1) };
        for cycle in cycles.basis() {
            let psi = slice.derivation_from(cycle);
            let psi_x = PhiDerivation::from_values(
                Arc::clone(&identity),
                n,
                self.fibre_in_total
                    .iter()
                    .enumerate()
                    .map(|(v, &t)| (v as u32, psi.value(t).clone()))
                    .collect(),
            )
            .map_err(|e| FibError::Internal(format!("psi restriction: {e}")))?;
            let d_psi_x = psi_x.d_phi();
            for v in 0..self.fibre.num_gens() as u32 {
                let mut rhs = Element::zero();
                for (j, theta) in family.thetas.iter().enumerate() {
                    let coeff = psi.value(self.base_in_total[j]);
                    if coeff.is_zero() {
                        continue;
                    }
                    rhs = rhs.add(&self.fibre.multiply(coeff, theta.value(v)));
                }
                if *d_psi_x.value(v) != rhs.scale(&sign) {
                    return Err(FibError::Internal(format!(
                        "obstruction identity fails in degree {n} on fibre generator '{}'",
                        self.fibre.gen(v).name
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn gottlieb_homology_dim(&self, n: usize) -> Result<usize, FibError> {
        Ok(self.gottlieb_sequence(n)?.gottlieb_homology_dim)
    }

    /// Degree-capped triviality: exactness at every base-generator degree n
    /// with 2 <= n <= max_degree. The witness is the least failing degree.
    pub fn is_rationally_gottlieb_trivial(
        &self,
        max_degree: usize,
    ) -> Result<TrivialityVerdict, FibError> {
        self.ensure_valid()?;
        self.ensure_total_minimal()?;
        let mut degrees: Vec<usize> = self
            .base
            .gens()
            .iter()
            .map(|g| g.degree)
            .filter(|&d| (2..=max_degree).contains(&d))
            .collect();
        degrees.sort_unstable();
        degrees.dedup();
        for &n in &degrees {
            if !self.gottlieb_sequence(n)?.exact() {
                return Ok(TrivialityVerdict {
                    trivial: false,
                    witness_degree: Some(n),
                    degrees_checked: degrees.clone(),
                });
            }
        }
        Ok(TrivialityVerdict {
            trivial: true,
            witness_degree: None,
            degrees_checked: degrees,
        })
    }

    /// Evaluates the three equivalent triviality predicates independently:
    /// boundary classes via solves in the fibre complex, exactness and
    /// surjectivity via the J-derivation complex.
    pub fn tri_equivalence_check(&self, max_degree: usize) -> Result<TriEquivalence, FibError> {
        self.ensure_valid()?;
        self.ensure_total_minimal()?;

        let classes = self.classify()?;
        let classes_trivial = classes
            .rows
            .iter()
            .filter(|r| (2..=max_degree).contains(&r.degree))
            .all(|r| r.is_boundary);

        let mut degrees: Vec<usize> = self
            .total
            .gens()
            .iter()
            .map(|g| g.degree)
            .filter(|&d| (2..=max_degree).contains(&d))
            .collect();
        degrees.sort_unstable();
        degrees.dedup();

        let mut details = Vec::new();
        let mut sequence_exact = true;
        let mut projection_surjective = true;
        for &n in &degrees {
            let report = self.gottlieb_sequence(n)?;
            sequence_exact &= report.exact();
            if !report.w_gens.is_empty() {
                projection_surjective &= report.exact_right;
            }
            details.push(TriDegreeDetail {
                degree: n,
                exact_left: report.exact_left,
                exact_middle: report.exact_middle,
                exact_right: report.exact_right,
                gottlieb_homology_dim: report.gottlieb_homology_dim,
            });
        }

        Ok(TriEquivalence {
            classes_trivial,
            sequence_exact,
            projection_surjective,
            degrees_checked: degrees,
            details,
        })
    }

    /// The holonomy representation of one base generator: the induced
    /// derivation of its twisting class on H^*(fibre),
    /// `<theta>(<z>) = <theta(z)>`, with well-definedness verified
    /// (boundaries map to boundaries, cocycles to cocycles).
    pub fn holonomy_representation(
        &self,
        base_gen: &str,
        max_degree: usize,
    ) -> Result<HolonomyReport, FibError> {
        self.ensure_valid()?;
        let j = self
            .base
            .gen_index(base_gen)
            .ok_or_else(|| FibError::UnknownGenerator {
                name: base_gen.to_string(),
            })?;
        let family = self.extract_theta()?;
        let theta = &family.thetas[j as usize];
        let shift = theta.degree();

        let cohomology = |m: usize| -> Result<(Vec<Vec<Rat>>, Subspace, Subspace), FibError> {
            let cocycles = self.fibre.cochain_d_matrix(m).kernel_basis();
            let boundaries = if m == 0 {
                Subspace::zero(self.fibre.basis_of_degree(0).len())
            } else {
                self.fibre.cochain_d_matrix(m - 1).image_basis()
            };
            let reps = quotient_representatives(&cocycles, &boundaries)?;
            Ok((reps, cocycles, boundaries))
        };
        let element_vector = |e: &Element, m: usize| -> Vec<Rat> {
            self.fibre
                .basis_of_degree(m)
                .iter()
                .map(|mono| e.coefficient(mono))
                .collect()
        };
        let vector_element = |v: &[Rat], m: usize| -> Element {
            let basis = self.fibre.basis_of_degree(m);
            let mut out = Element::zero();
            for (i, c) in v.iter().enumerate() {
                if !c.is_zero() {
                    out = out.add(&self.fibre.monomial_elem(basis[i].clone(), c.clone()));
                }
            }
            out
        };

        let mut degrees = Vec::new();
        for m in 0..=max_degree {
            let (reps, _, boundaries_m) = cohomology(m)?;
            let source_dim = reps.len();
            let target = m.checked_sub(shift);
            let mut source_basis: Vec<String> = Vec::new();
            let (target_dim, matrix) = if let Some(mt) = target {
                let (target_reps, target_cocycles, target_boundaries) = cohomology(mt)?;
                let target_dim = target_reps.len();
                let mut matrix = RatMatrix::zero(target_dim, source_dim);
                for b in boundaries_m.basis() {
                    let image = theta.evaluate(&vector_element(b, m));
                    if !image.is_zero() && !target_boundaries.contains(&element_vector(&image, mt))
                    {
                        return Err(FibError::Internal(format!(
                            "induced derivation of '{base_gen}' sends a degree-{m} boundary outside the boundaries"
                        )));
                    }
                }
                for (col, rep) in reps.iter().enumerate() {
                    let z = vector_element(rep, m);
                    source_basis.push(self.fibre.format_element(&z));
                    let image = theta.evaluate(&z);
                    if image.is_zero() {
                        continue;
                    }
                    let vec = element_vector(&image, mt);
                    if !target_cocycles.contains(&vec) {
                        return Err(FibError::Internal(format!(
                            "induced derivation of '{base_gen}' sends a degree-{m} cocycle to a non-cocycle"
                        )));
                    }
                    let mut columns: Vec<Vec<Rat>> = target_reps.clone();
                    columns.extend(target_boundaries.basis().iter().cloned());
                    let ambient = self.fibre.basis_of_degree(mt).len();
                    let coords = RatMatrix::from_columns(ambient, &columns)?
                        .solve(&vec)?
                        .ok_or_else(|| {
                            FibError::Internal(
                                "cocycle image not expressible in the cohomology basis".into(),
                            )
                        })?;
                    for row in 0..target_dim {
                        matrix.set(row, col, coords[row].clone());
                    }
                }
                (target_dim, matrix)
            } else {
                for rep in &reps {
                    source_basis.push(self.fibre.format_element(&vector_element(rep, m)));
                }
                (0, RatMatrix::zero(0, source_dim))
            };
            degrees.push(HolonomyDegree {
                source_degree: m,
                target_degree: target,
                source_dim,
                target_dim,
                matrix,
                source_basis,
            });
        }
        Ok(HolonomyReport {
            base_gen: base_gen.to_string(),
            shift,
            degrees,
        })
    }
}
