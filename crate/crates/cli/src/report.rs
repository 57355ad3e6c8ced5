//! Deterministic report emission: machine-readable JSON and human-readable
//! text.
//!
//! The JSON envelope is `{version, input_sha256, command, degrees_checked,
//! results[...]}`. Rationals are serialized as exact "p/q" strings, never
//! floats; every collection is emitted in a deterministic order, so the same
//! input and version produce byte-identical output.

use gottlieb_core::algebra::DgAlgebra;
use gottlieb_core::derivation::PhiDerivation;
use gottlieb_core::fibration::{
    HolonomyReport, KsModel, SequenceReport, ThetaClassReport, TriEquivalence, TrivialityVerdict,
};
use gottlieb_core::linalg::{RatMatrix, Subspace};
use gottlieb_core::{rat_string, Rat};
use serde::Serialize;
use sha2::{Digest, Sha256};

pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let digest = hasher.finalize();
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Serialize)]
pub struct Report {
    pub version: String,
    pub input_sha256: String,
    pub command: String,
    pub degrees_checked: Vec<usize>,
    pub results: Results,
}

impl Report {
    pub fn new(
        command: &str,
        input_sha256: String,
        degrees_checked: Vec<usize>,
        results: Results,
    ) -> Self {
        Report {
            version: env!("CARGO_PKG_VERSION").to_string(),
            input_sha256,
            command: command.to_string(),
            degrees_checked,
            results,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports always serialize");
        s.push('\n');
        s
    }
}

#[derive(Serialize)]
#[serde(untagged)]
pub enum Results {
    Check(Vec<CheckItem>),
    Gottlieb(Vec<GottliebItem>),
    DerHomology(Vec<DerHomologyItem>),
    Classify(Vec<ClassifyItem>),
    Sequence(Vec<SequenceItem>),
    Holonomy(Vec<HolonomyItem>),
    Fuzz(Vec<FuzzItem>),
}

#[derive(Serialize)]
pub struct CheckItem {
    pub kind: String,
    pub name: String,
    pub valid: bool,
    pub violations: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub minimal: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub total_minimal: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub base_minimal: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fibre_minimal: Option<bool>,
}

#[derive(Serialize)]
pub struct GottliebItem {
    pub degree: usize,
    pub dim: usize,
    /// Names of the degree-n generator duals spanning the ambient space.
    pub dual_generators: Vec<String>,
    /// Basis functionals as "p/q" coordinate rows over `dual_generators`.
    pub basis: Vec<Vec<String>>,
}

#[derive(Serialize)]
pub struct GenValue {
    pub gen: String,
    pub value: String,
}

#[derive(Serialize)]
pub struct DerHomologyItem {
    pub degree: usize,
    pub dim: usize,
    /// Chosen cycle representatives, one generator-value list per class.
    pub representatives: Vec<Vec<GenValue>>,
}

#[derive(Serialize)]
#[serde(untagged)]
pub enum ClassifyItem {
    Row {
        base_gen: String,
        degree: usize,
        theta: Vec<GenValue>,
        is_boundary: bool,
        #[serde(skip_serializing_if = "Option::is_none")]
        witness: Option<Vec<GenValue>>,
        class_coordinates: Vec<String>,
        homology_dim: usize,
    },
    Summary {
        per_degree: Vec<(usize, bool)>,
        all_trivial: bool,
    },
}

#[derive(Serialize)]
#[serde(untagged)]
pub enum SequenceItem {
    Degree {
        degree: usize,
        total_gens: Vec<String>,
        w_gens: Vec<String>,
        v_gens: Vec<String>,
        fibre_gottlieb_dim: usize,
        evaluation_dim: usize,
        hom_w_dim: usize,
        fibre_gottlieb_basis: Vec<Vec<String>>,
        evaluation_basis: Vec<Vec<String>>,
        qj_matrix: Vec<Vec<String>>,
        qp_matrix: Vec<Vec<String>>,
        exact_left: bool,
        exact_middle: bool,
        exact_right: bool,
        exact: bool,
        gottlieb_homology_dim: usize,
    },
    Verdict {
        rationally_gottlieb_trivial: bool,
        #[serde(skip_serializing_if = "Option::is_none")]
        witness_degree: Option<usize>,
        verdict_degrees: Vec<usize>,
    },
}

#[derive(Serialize)]
pub struct HolonomyItem {
    pub base_gen: String,
    pub shift: usize,
    pub degrees: Vec<HolonomyDegreeItem>,
}

#[derive(Serialize)]
pub struct HolonomyDegreeItem {
    pub source_degree: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target_degree: Option<usize>,
    pub source_dim: usize,
    pub target_dim: usize,
    pub matrix: Vec<Vec<String>>,
    pub source_basis: Vec<String>,
}

#[derive(Serialize)]
#[serde(untagged)]
pub enum FuzzItem {
    Model {
        index: usize,
        name: String,
        classes_trivial: bool,
        sequence_exact: bool,
        projection_surjective: bool,
        agree: bool,
    },
    Summary {
        models: usize,
        seed: u64,
        agreements: usize,
        all_agree: bool,
    },
}

pub fn matrix_rows(m: &RatMatrix) -> Vec<Vec<String>> {
    (0..m.rows())
        .map(|i| (0..m.cols()).map(|j| rat_string(m.get(i, j))).collect())
        .collect()
}

pub fn subspace_rows(s: &Subspace) -> Vec<Vec<String>> {
    s.basis()
        .iter()
        .map(|v| v.iter().map(rat_string).collect())
        .collect()
}

pub fn derivation_values(theta: &PhiDerivation) -> Vec<GenValue> {
    let source = &theta.phi().source;
    let target = &theta.phi().target;
    (0..source.num_gens() as u32)
        .filter(|&g| !theta.value(g).is_zero())
        .map(|g| GenValue {
            gen: source.gen(g).name.clone(),
            value: target.format_element(theta.value(g)),
        })
        .collect()
}

/// Renders a functional as a combination of generator duals, e.g.
/// "v1* - 2*w4*".
pub fn functional_string(names: &[String], coords: &[Rat]) -> String {
    use num::Signed;
    let mut out = String::new();
    for (name, c) in names.iter().zip(coords) {
        if num::Zero::is_zero(c) {
            continue;
        }
        let mag = c.abs();
        let neg = c < &num::Zero::zero();
        if out.is_empty() {
            if neg {
                out.push('-');
            }
        } else {
            out.push_str(if neg { " - " } else { " + " });
        }
        if num::One::is_one(&mag) {
            out.push_str(&format!("{name}*"));
        } else {
            out.push_str(&format!("{mag}*{name}*"));
        }
    }
    if out.is_empty() {
        "0".to_string()
    } else {
        out
    }
}

// Human-readable printers. These go to stdout; exit codes carry the verdict
// for scripts, the JSON form for machines.

pub fn print_check_dga(alg: &DgAlgebra) {
    println!("algebra {}: valid", alg.name());
    println!("  generators: {}", alg.num_gens());
    println!("  minimal: {}", yes_no(alg.is_minimal()));
}

pub fn print_check_ks(model: &KsModel) {
    let report = model.validate();
    println!(
        "fibration {}: {}",
        model.name(),
        if report.ok() { "valid" } else { "INVALID" }
    );
    for v in &report.violations {
        println!("  violation: {}", model.violation_message(v));
    }
    println!(
        "  total minimal: {} (base: {}, fibre: {})",
        yes_no(report.total_minimal),
        yes_no(report.base_minimal),
        yes_no(report.fibre_minimal)
    );
    if let Some((gen, term)) = &report.linear_term {
        println!("  linear term: d({gen}) contains {term}");
    }
}

pub fn print_gottlieb(alg: &DgAlgebra, items: &[(usize, Subspace)]) {
    println!("rationalized Gottlieb groups of {}:", alg.name());
    for (degree, space) in items {
        let names: Vec<String> = alg
            .gens_of_degree(*degree)
            .iter()
            .map(|&g| alg.gen(g).name.clone())
            .collect();
        let mut line = format!("  G_{degree} = {}", space.dim());
        if space.dim() > 0 {
            let basis: Vec<String> = space
                .basis()
                .iter()
                .map(|v| functional_string(&names, v))
                .collect();
            line.push_str(&format!("   basis: {}", basis.join(", ")));
        }
        println!("{line}");
    }
}

pub fn print_der_homology(alg: &DgAlgebra, degree: usize, dim: usize, reps: &[PhiDerivation]) {
    println!("H_{degree}(Der({0}, {0}; 1)): dim {dim}", alg.name());
    for (i, rep) in reps.iter().enumerate() {
        let values = derivation_values(rep);
        let rendered: Vec<String> = values
            .iter()
            .map(|gv| format!("{} -> {}", gv.gen, gv.value))
            .collect();
        println!(
            "  class {}: {}",
            i + 1,
            if rendered.is_empty() {
                "0".to_string()
            } else {
                rendered.join(", ")
            }
        );
    }
}

pub fn print_classify(model: &KsModel, report: &ThetaClassReport) {
    println!("classifying-map invariant of {}:", model.name());
    for row in &report.rows {
        let values = derivation_values(&row.theta);
        let theta_str = if values.is_empty() {
            "0".to_string()
        } else {
            values
                .iter()
                .map(|gv| format!("theta({}) = {}", gv.gen, gv.value))
                .collect::<Vec<_>>()
                .join(", ")
        };
        println!(
            "  {} (degree {}): {theta_str} ; boundary: {}",
            row.base_gen,
            row.degree,
            if row.is_boundary { "yes" } else { "NO" }
        );
    }
    for (degree, trivial) in &report.per_degree {
        println!(
            "  degree {degree}: {}",
            if *trivial { "trivial" } else { "NONTRIVIAL" }
        );
    }
    println!(
        "verdict: classifying map is rationally {}",
        if report.all_trivial {
            "trivial on homotopy groups"
        } else {
            "NONTRIVIAL on homotopy groups"
        }
    );
}

pub fn print_sequence_degree(report: &SequenceReport) {
    println!(
        "degree {n}: 0 -> G_{n}(fibre)[{a}] -> G_{n}(total,fibre;J)[{b}] -> Hom_{n}(W,Q)[{c}] -> 0 | left {l}, middle {m}, right {r} | GH_{n} = {gh}",
        n = report.degree,
        a = report.fibre_gottlieb.dim(),
        b = report.evaluation.dim(),
        c = report.hom_w_dim,
        l = exact_str(report.exact_left),
        m = exact_str(report.exact_middle),
        r = exact_str(report.exact_right),
        gh = report.gottlieb_homology_dim,
    );
}

pub fn print_verdict(verdict: &TrivialityVerdict) {
    match verdict.witness_degree {
        None => println!(
            "verdict: rationally Gottlieb trivial (checked base degrees {:?})",
            verdict.degrees_checked
        ),
        Some(n) => println!("verdict: NOT rationally Gottlieb trivial, witness degree {n}"),
    }
}

pub fn print_holonomy(report: &HolonomyReport) {
    println!(
        "holonomy representation of {} (degree shift {}):",
        report.base_gen, report.shift
    );
    let mut all_zero = true;
    for deg in &report.degrees {
        if deg.source_dim == 0 {
            continue;
        }
        match deg.target_degree {
            Some(t) if deg.target_dim > 0 => {
                let zero = deg.matrix.is_zero();
                all_zero &= zero;
                println!(
                    "  H^{} -> H^{t}: {}x{} {}",
                    deg.source_degree,
                    deg.target_dim,
                    deg.source_dim,
                    if zero { "zero map" } else { "matrix:" }
                );
                if !zero {
                    for i in 0..deg.matrix.rows() {
                        let row: Vec<String> = (0..deg.matrix.cols())
                            .map(|j| deg.matrix.get(i, j).to_string())
                            .collect();
                        println!("    [ {} ]", row.join("  "));
                    }
                }
            }
            _ => {
                println!(
                    "  H^{} -> 0 (target degree {})",
                    deg.source_degree,
                    deg.target_degree
                        .map(|t| t.to_string())
                        .unwrap_or_else(|| "negative".to_string())
                );
            }
        }
    }
    if all_zero {
        println!("  the representation is zero in every checked degree");
    }
}

pub fn print_tri(index: usize, name: &str, tri: &TriEquivalence) {
    println!(
        "model {index} ({name}): classes {}, exact {}, surjective {} -> {}",
        tri.classes_trivial,
        tri.sequence_exact,
        tri.projection_surjective,
        if tri.agree() { "agree" } else { "DISAGREE" }
    );
}

fn exact_str(b: bool) -> &'static str {
    if b {
        "EXACT"
    } else {
        "NOT-EXACT"
    }
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}
