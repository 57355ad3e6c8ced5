//! Command-line surface for the Gottlieb-sequence analyzer.
//!
//! Exit codes: 0 when a verdict was computed (including negative verdicts),
//! 1 when the input is invalid, 2 when an internal invariant is violated
//! (for example a tri-equivalence disagreement, which indicates a bug).

use clap::{Parser, Subcommand};
use gottlieb_cli::parser::{parse_document, ModelDocument, Payload};
use gottlieb_cli::report::{
    self, matrix_rows, sha256_hex, subspace_rows, ClassifyItem, DerHomologyItem, FuzzItem,
    GottliebItem, HolonomyDegreeItem, HolonomyItem, Report, Results, SequenceItem,
};
use gottlieb_core::algebra::{AlgebraMorphism, DgAlgebra};
use gottlieb_core::derivation::homology;
use gottlieb_core::fibration::{FibError, KsModel};
use gottlieb_core::{corpus, rat_string};
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

#[derive(Parser)]
#[command(
    name = "gottlieb",
    version,
    about = "Rationalized Gottlieb groups, evaluation subgroups and Gottlieb homology of Koszul-Sullivan fibration models"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Validate an algebra (.dga) or fibration (.ks) description.
    Check { file: PathBuf },
    /// Rationalized Gottlieb groups of a minimal algebra, degrees 2..=N.
    Gottlieb {
        file: PathBuf,
        #[arg(long)]
        max_degree: usize,
        #[arg(long)]
        json: bool,
    },
    /// Homology of the derivation complex Der(A, A; 1) in one degree.
    DerHomology {
        file: PathBuf,
        #[arg(long)]
        degree: usize,
        #[arg(long)]
        json: bool,
    },
    /// Boundary status of the twisting derivations of a fibration.
    Classify {
        file: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// The rationalized Gottlieb sequence per degree, with a triviality
    /// verdict.
    Sequence {
        file: PathBuf,
        #[arg(long)]
        max_degree: usize,
        #[arg(long)]
        json: bool,
    },
    /// Holonomy representation matrices for every base generator.
    Holonomy {
        file: PathBuf,
        #[arg(long)]
        max_degree: usize,
        #[arg(long)]
        json: bool,
    },
    /// Tri-equivalence cross-check over a seeded random model corpus.
    Fuzz {
        #[arg(long)]
        models: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        json: bool,
    },
}

enum Failure {
    /// Invalid input: exit code 1.
    Input(String),
    /// Violated internal invariant: exit code 2.
    Internal(String),
}

impl From<FibError> for Failure {
    fn from(e: FibError) -> Self {
        match &e {
            FibError::Internal(_) => Failure::Internal(e.to_string()),
            FibError::Der(gottlieb_core::derivation::DerError::Internal(_)) => {
                Failure::Internal(e.to_string())
            }
            _ => Failure::Input(e.to_string()),
        }
    }
}

impl From<gottlieb_core::derivation::DerError> for Failure {
    fn from(e: gottlieb_core::derivation::DerError) -> Self {
        match &e {
            gottlieb_core::derivation::DerError::Internal(_) => Failure::Internal(e.to_string()),
            _ => Failure::Input(e.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(msg)) => {
            eprintln!("{msg}");
            ExitCode::from(1)
        }
        Err(Failure::Internal(msg)) => {
            eprintln!("internal invariant violated: {msg}");
            ExitCode::from(2)
        }
    }
}

fn read_document(path: &PathBuf) -> Result<(ModelDocument, String), Failure> {
    let bytes = std::fs::read(path)
        .map_err(|e| Failure::Input(format!("cannot read {}: {e}", path.display())))?;
    let digest = sha256_hex(&bytes);
    let text = String::from_utf8(bytes)
        .map_err(|_| Failure::Input(format!("{} is not valid UTF-8", path.display())))?;
    let doc =
        parse_document(&text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    Ok((doc, digest))
}

fn require_dga(doc: ModelDocument, path: &PathBuf) -> Result<DgAlgebra, Failure> {
    match doc.payload {
        Payload::Algebra(a) => Ok(a),
        Payload::Fibration(_) => Err(Failure::Input(format!(
            "{}: expected an algebra document, found a fibration",
            path.display()
        ))),
    }
}

fn require_ks(doc: ModelDocument, path: &PathBuf) -> Result<KsModel, Failure> {
    match doc.payload {
        Payload::Fibration(m) => Ok(m),
        Payload::Algebra(_) => Err(Failure::Input(format!(
            "{}: expected a fibration document, found an algebra",
            path.display()
        ))),
    }
}

fn run(cmd: Cmd) -> Result<(), Failure> {
    match cmd {
        Cmd::Check { file } => {
            let (doc, _) = read_document(&file)?;
            match &doc.payload {
                Payload::Algebra(alg) => report::print_check_dga(alg),
                Payload::Fibration(model) => report::print_check_ks(model),
            }
            Ok(())
        }
        Cmd::Gottlieb {
            file,
            max_degree,
            json,
        } => {
            let (doc, digest) = read_document(&file)?;
            let alg = Arc::new(require_dga(doc, &file)?);
            let degrees: Vec<usize> = (2..=max_degree).collect();
            let mut items = Vec::new();
            for &n in &degrees {
                items.push((n, gottlieb_core::derivation::gottlieb_group(&alg, n)?));
            }
            if json {
                let results = Results::Gottlieb(
                    items
                        .iter()
                        .map(|(degree, space)| GottliebItem {
                            degree: *degree,
                            dim: space.dim(),
                            dual_generators: alg
                                .gens_of_degree(*degree)
                                .iter()
                                .map(|&g| alg.gen(g).name.clone())
                                .collect(),
                            basis: subspace_rows(space),
                        })
                        .collect(),
                );
                print!(
                    "{}",
                    Report::new("gottlieb", digest, degrees, results).to_json()
                );
            } else {
                report::print_gottlieb(&alg, &items);
            }
            Ok(())
        }
        Cmd::DerHomology { file, degree, json } => {
            let (doc, digest) = read_document(&file)?;
            let alg = Arc::new(require_dga(doc, &file)?);
            if degree < 1 {
                return Err(Failure::Input(
                    "derivation homology requires --degree >= 1".into(),
                ));
            }
            let id = Arc::new(AlgebraMorphism::identity(&alg));
            let h = homology(&id, degree)?;
            if json {
                let results = Results::DerHomology(vec![DerHomologyItem {
                    degree,
                    dim: h.dim,
                    representatives: h
                        .classes
                        .iter()
                        .map(|c| report::derivation_values(&c.representative))
                        .collect(),
                }]);
                print!(
                    "{}",
                    Report::new("der-homology", digest, vec![degree], results).to_json()
                );
            } else {
                let reps: Vec<_> = h.classes.iter().map(|c| c.representative.clone()).collect();
                report::print_der_homology(&alg, degree, h.dim, &reps);
            }
            Ok(())
        }
        Cmd::Classify { file, json } => {
            let (doc, digest) = read_document(&file)?;
            let model = require_ks(doc, &file)?;
            let classes = model.classify()?;
            let degrees: Vec<usize> = classes.per_degree.iter().map(|&(d, _)| d).collect();
            if json {
                let mut items: Vec<ClassifyItem> = classes
                    .rows
                    .iter()
                    .map(|r| ClassifyItem::Row {
                        base_gen: r.base_gen.clone(),
                        degree: r.degree,
                        theta: report::derivation_values(&r.theta),
                        is_boundary: r.is_boundary,
                        witness: r.witness.as_ref().map(report::derivation_values),
                        class_coordinates: r.class_coordinates.iter().map(rat_string).collect(),
                        homology_dim: r.homology_dim,
                    })
                    .collect();
                items.push(ClassifyItem::Summary {
                    per_degree: classes.per_degree.clone(),
                    all_trivial: classes.all_trivial,
                });
                print!(
                    "{}",
                    Report::new("classify", digest, degrees, Results::Classify(items)).to_json()
                );
            } else {
                report::print_classify(&model, &classes);
            }
            Ok(())
        }
        Cmd::Sequence {
            file,
            max_degree,
            json,
        } => {
            let (doc, digest) = read_document(&file)?;
            let model = require_ks(doc, &file)?;
            let degrees: Vec<usize> = (2..=max_degree).collect();
            let mut reports = Vec::new();
            for &n in &degrees {
                reports.push(model.gottlieb_sequence(n)?);
            }
            let verdict = model.is_rationally_gottlieb_trivial(max_degree)?;
            if json {
                let mut items: Vec<SequenceItem> = reports
                    .iter()
                    .map(|r| SequenceItem::Degree {
                        degree: r.degree,
                        total_gens: r.total_gens.clone(),
                        w_gens: r.w_gens.clone(),
                        v_gens: r.v_gens.clone(),
                        fibre_gottlieb_dim: r.fibre_gottlieb.dim(),
                        evaluation_dim: r.evaluation.dim(),
                        hom_w_dim: r.hom_w_dim,
                        fibre_gottlieb_basis: subspace_rows(&r.fibre_gottlieb),
                        evaluation_basis: subspace_rows(&r.evaluation),
                        qj_matrix: matrix_rows(&r.qj_matrix),
                        qp_matrix: matrix_rows(&r.qp_matrix),
                        exact_left: r.exact_left,
                        exact_middle: r.exact_middle,
                        exact_right: r.exact_right,
                        exact: r.exact(),
                        gottlieb_homology_dim: r.gottlieb_homology_dim,
                    })
                    .collect();
                items.push(SequenceItem::Verdict {
                    rationally_gottlieb_trivial: verdict.trivial,
                    witness_degree: verdict.witness_degree,
                    verdict_degrees: verdict.degrees_checked.clone(),
                });
                print!(
                    "{}",
                    Report::new("sequence", digest, degrees, Results::Sequence(items)).to_json()
                );
            } else {
                println!("rationalized Gottlieb sequence of {}:", model.name());
                for r in &reports {
                    report::print_sequence_degree(r);
                }
                report::print_verdict(&verdict);
            }
            Ok(())
        }
        Cmd::Holonomy {
            file,
            max_degree,
            json,
        } => {
            let (doc, digest) = read_document(&file)?;
            let model = require_ks(doc, &file)?;
            let degrees: Vec<usize> = (0..=max_degree).collect();
            let gens: Vec<String> = model.base().gens().iter().map(|g| g.name.clone()).collect();
            let mut reports = Vec::new();
            for name in &gens {
                reports.push(model.holonomy_representation(name, max_degree)?);
            }
            if json {
                let items: Vec<HolonomyItem> = reports
                    .iter()
                    .map(|r| HolonomyItem {
                        base_gen: r.base_gen.clone(),
                        shift: r.shift,
                        degrees: r
                            .degrees
                            .iter()
                            .map(|d| HolonomyDegreeItem {
                                source_degree: d.source_degree,
                                target_degree: d.target_degree,
                                source_dim: d.source_dim,
                                target_dim: d.target_dim,
                                matrix: matrix_rows(&d.matrix),
                                source_basis: d.source_basis.clone(),
                            })
                            .collect(),
                    })
                    .collect();
                print!(
                    "{}",
                    Report::new("holonomy", digest, degrees, Results::Holonomy(items)).to_json()
                );
            } else {
                for r in &reports {
                    report::print_holonomy(r);
                }
            }
            Ok(())
        }
        Cmd::Fuzz { models, seed, json } => {
            let corpus =
                corpus::generate(seed, models).map_err(|e| Failure::Input(e.to_string()))?;
            let mut items = Vec::new();
            let mut agreements = 0usize;
            let mut disagreement = None;
            for (index, model) in corpus.iter().enumerate() {
                let cap = model.total().max_gen_degree();
                let tri = model.tri_equivalence_check(cap)?;
                if tri.agree() {
                    agreements += 1;
                } else if disagreement.is_none() {
                    disagreement = Some(index);
                }
                if json {
                    items.push(FuzzItem::Model {
                        index,
                        name: model.name().to_string(),
                        classes_trivial: tri.classes_trivial,
                        sequence_exact: tri.sequence_exact,
                        projection_surjective: tri.projection_surjective,
                        agree: tri.agree(),
                    });
                } else {
                    report::print_tri(index, model.name(), &tri);
                }
            }
            let all_agree = agreements == corpus.len();
            if json {
                items.push(FuzzItem::Summary {
                    models,
                    seed,
                    agreements,
                    all_agree,
                });
                let digest = sha256_hex(format!("fuzz:models={models}:seed={seed}").as_bytes());
                print!(
                    "{}",
                    Report::new("fuzz", digest, Vec::new(), Results::Fuzz(items)).to_json()
                );
            } else {
                println!(
                    "tri-equivalence agreement: {agreements}/{} (seed {seed})",
                    corpus.len()
                );
            }
            if !all_agree {
                return Err(Failure::Internal(format!(
                    "tri-equivalence predicates disagree on corpus model {}",
                    disagreement.unwrap()
                )));
            }
            Ok(())
        }
    }
}
