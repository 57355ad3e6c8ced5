//! The chain complex `Der_*(A, B; phi)` of phi-derivations.
//!
//! A phi-derivation of degree n is a linear map lowering degree by n that
//! satisfies the twisted Leibniz rule
//!
//! ```text
//! theta(x y) = theta(x) phi(y) + (-1)^{n |x|} phi(x) theta(y)
//! ```
//!
//! and the differential is `D_phi(theta) = d_B . theta - (-1)^n theta . d_A`.
//! This sign is the only one compatible with graded commutativity: flipping
//! it makes the rule contradict itself on `x y = (-1)^{|x||y|} y x` whenever
//! both arguments are odd. The regression tests pin the convention through
//! worked twisting-derivation cycles.
//!
//! A derivation is determined by its values on generators, so each degree-n
//! slice has a finite coordinate basis of (generator, target monomial) pairs,
//! and homology, boundary tests and evaluation subgroups all reduce to exact
//! linear algebra.

use crate::algebra::{AlgebraMorphism, DgAlgebra, Element, Monomial};
use crate::linalg::{quotient_representatives, LinalgError, RatMatrix, Subspace};
use crate::{rat_int, Rat};
use num::Zero;
use std::collections::HashMap;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DerError {
    #[error("derivation is not a cycle: D(theta) is nonzero on generator '{gen}'")]
    NotACycle { gen: String },
    #[error("source algebra '{name}' is not minimal")]
    SourceNotMinimal { name: String },
    #[error("degree {degree} is too small; this operation requires degree >= 2")]
    DegreeTooSmall { degree: usize },
    #[error("value for generator '{gen}' must have degree {expected}, found {found:?}")]
    ValueDegree {
        gen: String,
        expected: isize,
        found: Option<usize>,
    },
    #[error("internal invariant violated: {0}")]
    Internal(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// A phi-derivation of degree n >= 0, stored by its generator values.
/// `values[g]` is an element of the target of degree |g| - n, and is zero
/// whenever that degree is negative.
#[derive(Debug, Clone)]
pub struct PhiDerivation {
    degree: usize,
    phi: Arc<AlgebraMorphism>,
    values: Vec<Element>,
}

impl PartialEq for PhiDerivation {
    fn eq(&self, other: &Self) -> bool {
        self.degree == other.degree && self.values == other.values
    }
}

impl Eq for PhiDerivation {}

impl PhiDerivation {
    pub fn zero(phi: Arc<AlgebraMorphism>, degree: usize) -> Self {
        let values = vec![Element::zero(); phi.source.num_gens()];
        PhiDerivation {
            degree,
            phi,
            values,
        }
    }

    /// Builds a derivation from (generator index, value) pairs, checking that
    /// each value has the degree the slice demands.
    pub fn from_values(
        phi: Arc<AlgebraMorphism>,
        degree: usize,
        assignments: Vec<(u32, Element)>,
    ) -> Result<Self, DerError> {
        let mut der = PhiDerivation::zero(phi, degree);
        for (g, value) in assignments {
            der.set_value(g, value)?;
        }
        Ok(der)
    }

    pub fn from_named_values(
        phi: Arc<AlgebraMorphism>,
        degree: usize,
        assignments: Vec<(&str, Element)>,
    ) -> Result<Self, DerError> {
        let mut resolved = Vec::with_capacity(assignments.len());
        for (name, value) in assignments {
            let idx = phi.source.gen_index(name).ok_or_else(|| {
                DerError::Internal(format!(
                    "unknown generator '{name}' in derivation assignment"
                ))
            })?;
            resolved.push((idx, value));
        }
        PhiDerivation::from_values(phi, degree, resolved)
    }

    fn set_value(&mut self, g: u32, value: Element) -> Result<(), DerError> {
        let gen = self.phi.source.gen(g);
        let expected = gen.degree as isize - self.degree as isize;
        match value.degree() {
            None => {}
            Some(d) if expected >= 0 && d == expected as usize => {}
            found => {
                return Err(DerError::ValueDegree {
                    gen: gen.name.clone(),
                    expected,
                    found,
                })
            }
        }
        self.values[g as usize] = value;
        Ok(())
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn phi(&self) -> &Arc<AlgebraMorphism> {
        &self.phi
    }

    pub fn value(&self, g: u32) -> &Element {
        &self.values[g as usize]
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(Element::is_zero)
    }

    pub fn add(&self, other: &PhiDerivation) -> PhiDerivation {
        assert_eq!(self.degree, other.degree);
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a.add(b))
            .collect();
        PhiDerivation {
            degree: self.degree,
            phi: Arc::clone(&self.phi),
            values,
        }
    }

    pub fn scale(&self, c: &Rat) -> PhiDerivation {
        PhiDerivation {
            degree: self.degree,
            phi: Arc::clone(&self.phi),
            values: self.values.iter().map(|v| v.scale(c)).collect(),
        }
    }

    pub fn sub(&self, other: &PhiDerivation) -> PhiDerivation {
        self.add(&other.scale(&-rat_int(1)))
    }

    /// Evaluates the derivation on an arbitrary element by the twisted
    /// Leibniz rule, recursing on the first letter of each monomial.
    pub fn evaluate(&self, x: &Element) -> Element {
        let mut memo: HashMap<Monomial, Element> = HashMap::new();
        let mut out = Element::zero();
        for (m, c) in x.terms() {
            let v = self.eval_monomial(m, &mut memo);
            if !v.is_zero() {
                out = out.add(&v.scale(c));
            }
        }
        out
    }

    fn eval_monomial(&self, m: &Monomial, memo: &mut HashMap<Monomial, Element>) -> Element {
        if m.is_unit() {
            return Element::zero();
        }
        if let Some(hit) = memo.get(m) {
            return hit.clone();
        }
        let (g, e) = m.word()[0];
        let result = if m.word_length() == 1 {
            self.values[g as usize].clone()
        } else {
            // m = g . rest
            let mut rest_word: Vec<(u32, u32)> = m.word().to_vec();
            if e > 1 {
                rest_word[0].1 -= 1;
            } else {
                rest_word.remove(0);
            }
            let rest = {
                let letters: Vec<u32> = rest_word
                    .iter()
                    .flat_map(|&(h, k)| std::iter::repeat(h).take(k as usize))
                    .collect();
                self.phi
                    .source
                    .normalize_word(&letters)
                    .expect("subword of a canonical word is canonical")
                    .1
            };
            let target = &self.phi.target;
            let g_elem = self.phi.source.gen_elem(g);
            let rest_elem = self.phi.source.monomial_elem(rest.clone(), num::One::one());
            // theta(g) phi(rest) + (-1)^{n |g|} phi(g) theta(rest)
            let first = target.multiply(&self.values[g as usize], &self.phi.apply(&rest_elem));
            let theta_rest = self.eval_monomial(&rest, memo);
            let sign = if (self.degree * self.phi.source.gen_degree(g)) % 2 == 0 {
                1
            } else {
                -1
            };
            let second = target
                .multiply(&self.phi.apply(&g_elem), &theta_rest)
                .scale(&rat_int(sign));
            first.add(&second)
        };
        memo.insert(m.clone(), result.clone());
        result
    }

    /// `D_phi(theta)`: on a generator g this is
    /// `d_B(theta(g)) - (-1)^n theta(d_A(g))`. Degree must be >= 1.
    pub fn d_phi(&self) -> PhiDerivation {
        assert!(
            self.degree >= 1,
            "D_phi lowers derivation degree; degree-0 derivations have no differential"
        );
        let n = self.degree;
        let sign = if n % 2 == 0 { 1 } else { -1 };
        let values = (0..self.phi.source.num_gens() as u32)
            .map(|g| {
                let first = self.phi.target.apply_d(&self.values[g as usize]);
                let second = self
                    .evaluate(self.phi.source.d_image(g))
                    .scale(&rat_int(-sign));
                first.add(&second)
            })
            .collect();
        PhiDerivation {
            degree: n - 1,
            phi: Arc::clone(&self.phi),
            values,
        }
    }

    /// Degree-0 derivations are cycles by convention (the complex stops
    /// there); otherwise a cycle is a derivation killed by `D_phi`.
    pub fn is_cycle(&self) -> bool {
        self.degree == 0 || self.d_phi().is_zero()
    }

    /// The functional `g -> scalar part of theta(g)` on the degree-n source
    /// generators, n the derivation degree. This is composition with the
    /// augmentation of the target.
    pub fn epsilon_pushforward(&self) -> Vec<Rat> {
        self.phi
            .source
            .gens_of_degree(self.degree)
            .iter()
            .map(|&g| self.values[g as usize].scalar_part())
            .collect()
    }
}

/// Coordinate basis of `Der_n(A, B; phi)`: one coordinate per (source
/// generator g, target monomial of degree |g| - n), in a deterministic order.
#[derive(Debug, Clone)]
pub struct DerSlice {
    pub degree: usize,
    phi: Arc<AlgebraMorphism>,
    coords: Vec<(u32, Monomial)>,
    index: HashMap<(u32, Monomial), usize>,
}

impl DerSlice {
    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[(u32, Monomial)] {
        &self.coords
    }

    /// Coordinates of a derivation in this basis.
    pub fn vector_of(&self, theta: &PhiDerivation) -> Result<Vec<Rat>, DerError> {
        assert_eq!(theta.degree, self.degree);
        let mut v = vec![Rat::zero(); self.coords.len()];
        for g in 0..self.phi.source.num_gens() as u32 {
            for (m, c) in theta.value(g).terms() {
                let key = (g, m.clone());
                let i = self.index.get(&key).ok_or_else(|| {
                    DerError::Internal(format!(
                        "derivation value on '{}' contains a monomial outside the slice basis",
                        self.phi.source.gen(g).name
                    ))
                })?;
                v[*i] = c.clone();
            }
        }
        Ok(v)
    }

    /// Derivation with the given coordinates.
    pub fn derivation_from(&self, coeffs: &[Rat]) -> PhiDerivation {
        assert_eq!(coeffs.len(), self.coords.len());
        let mut der = PhiDerivation::zero(Arc::clone(&self.phi), self.degree);
        for (i, (g, m)) in self.coords.iter().enumerate() {
            if coeffs[i].is_zero() {
                continue;
            }
            let term = self.phi.target.monomial_elem(m.clone(), coeffs[i].clone());
            der.values[*g as usize] = der.values[*g as usize].add(&term);
        }
        der
    }
}

/// The slice `Der_n(A, B; phi)`. Empty whenever n exceeds every source
/// generator degree.
pub fn der_slice(phi: &Arc<AlgebraMorphism>, n: usize) -> DerSlice {
    let mut coords = Vec::new();
    for g in 0..phi.source.num_gens() as u32 {
        let gd = phi.source.gen_degree(g);
        if gd < n {
            continue;
        }
        for m in phi.target.basis_of_degree(gd - n).iter() {
            coords.push((g, m.clone()));
        }
    }
    let index = coords
        .iter()
        .cloned()
        .enumerate()
        .map(|(i, c)| (c, i))
        .collect();
    DerSlice {
        degree: n,
        phi: Arc::clone(phi),
        coords,
        index,
    }
}

/// Matrix of `D_phi` from the degree-n slice to the degree-(n-1) slice in the
/// deterministic coordinate bases. Requires n >= 1.
pub fn d_matrix(phi: &Arc<AlgebraMorphism>, n: usize) -> Result<RatMatrix, DerError> {
    assert!(n >= 1);
    let src = der_slice(phi, n);
    let tgt = der_slice(phi, n - 1);
    let mut m = RatMatrix::zero(tgt.dim(), src.dim());
    for (j, (g, mono)) in src.coords().iter().enumerate() {
        let theta = src.derivation_from(
            &(0..src.dim())
                .map(|i| if i == j { num::One::one() } else { Rat::zero() })
                .collect::<Vec<_>>(),
        );
        let _ = (g, mono);
        let image = theta.d_phi();
        let col = tgt.vector_of(&image)?;
        for (i, c) in col.into_iter().enumerate() {
            if !c.is_zero() {
                m.set(i, j, c);
            }
        }
    }
    Ok(m)
}

/// One homology class of the derivation complex: a cycle representative and
/// the boundary subspace that decides class equality.
#[derive(Debug, Clone)]
pub struct DerHomologyClass {
    pub degree: usize,
    pub representative: PhiDerivation,
    pub rep_vector: Vec<Rat>,
    pub boundaries: Arc<Subspace>,
}

impl DerHomologyClass {
    /// Two cycles represent the same class when their difference is a
    /// boundary.
    pub fn same_class(&self, other_vector: &[Rat]) -> bool {
        let diff: Vec<Rat> = self
            .rep_vector
            .iter()
            .zip(other_vector)
            .map(|(a, b)| a - b)
            .collect();
        diff.iter().all(Zero::is_zero) || self.boundaries.contains(&diff)
    }
}

/// `H_n(Der(A, B; phi))` with chosen coset representatives.
#[derive(Debug, Clone)]
pub struct DerHomology {
    pub degree: usize,
    pub dim: usize,
    pub classes: Vec<DerHomologyClass>,
    pub cycles: Subspace,
    pub boundaries: Arc<Subspace>,
    pub slice: DerSlice,
}

/// Homology of the derivation complex in degree n >= 1: cycles of `D_phi`
/// modulo boundaries from degree n + 1, with representatives chosen by the
/// pivot rule so reports are deterministic.
pub fn homology(phi: &Arc<AlgebraMorphism>, n: usize) -> Result<DerHomology, DerError> {
    assert!(n >= 1);
    let slice = der_slice(phi, n);
    let cycles = d_matrix(phi, n)?.kernel_basis();
    let boundaries = Arc::new(d_matrix(phi, n + 1)?.image_basis());
    let reps = quotient_representatives(&cycles, &boundaries)?;
    let dim = cycles.dim() - boundaries.dim();
    debug_assert_eq!(reps.len(), dim);
    let classes = reps
        .into_iter()
        .map(|v| DerHomologyClass {
            degree: n,
            representative: slice.derivation_from(&v),
            rep_vector: v,
            boundaries: Arc::clone(&boundaries),
        })
        .collect();
    Ok(DerHomology {
        degree: n,
        dim,
        classes,
        cycles,
        boundaries,
        slice,
    })
}

/// Boundary test: some `psi` with `D_phi(psi) = theta`, or `None` when the
/// class of `theta` is nonzero. Errors when `theta` is not a cycle.
pub fn is_boundary(
    phi: &Arc<AlgebraMorphism>,
    theta: &PhiDerivation,
) -> Result<Option<PhiDerivation>, DerError> {
    if !theta.is_cycle() {
        let bad = theta.d_phi();
        let gen = (0..phi.source.num_gens() as u32)
            .find(|&g| !bad.value(g).is_zero())
            .map(|g| phi.source.gen(g).name.clone())
            .unwrap_or_default();
        return Err(DerError::NotACycle { gen });
    }
    let n = theta.degree();
    let slice = der_slice(phi, n);
    let target = slice.vector_of(theta)?;
    let matrix = d_matrix(phi, n + 1)?;
    let Some(x) = matrix.solve(&target)? else {
        return Ok(None);
    };
    let witness = der_slice(phi, n + 1).derivation_from(&x);
    Ok(Some(witness))
}

/// The n-th rationalized evaluation subgroup of `phi`: the span, inside the
/// dual of the degree-n source generators, of the augmentation pushforwards
/// of all degree-n derivation cycles. A functional belongs to it exactly when
/// it extends to a phi-derivation cycle. Requires a minimal source and
/// n >= 2.
pub fn evaluation_subgroup(phi: &Arc<AlgebraMorphism>, n: usize) -> Result<Subspace, DerError> {
    if !phi.source.is_minimal() {
        return Err(DerError::SourceNotMinimal {
            name: phi.source.name().to_string(),
        });
    }
    if n < 2 {
        return Err(DerError::DegreeTooSmall { degree: n });
    }
    let slice = der_slice(phi, n);
    let cycles = d_matrix(phi, n)?.kernel_basis();
    let ambient = phi.source.gens_of_degree(n).len();
    let vectors: Vec<Vec<Rat>> = cycles
        .basis()
        .iter()
        .map(|v| slice.derivation_from(v).epsilon_pushforward())
        .collect();
    Ok(Subspace::from_span(ambient, &vectors)?)
}

/// The n-th rationalized Gottlieb group of a minimal algebra:
/// the evaluation subgroup of the identity.
pub fn gottlieb_group(alg: &Arc<DgAlgebra>, n: usize) -> Result<Subspace, DerError> {
    let id = Arc::new(AlgebraMorphism::identity(alg));
    evaluation_subgroup(&id, n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::DgAlgebra;
    use crate::{rat, rat_int};

    fn cp2() -> Arc<DgAlgebra> {
        let mut alg =
            DgAlgebra::free("cp2", vec![("v2".to_string(), 2), ("v5".to_string(), 5)]).unwrap();
        let v2 = alg.gen_elem_by_name("v2").unwrap();
        let d = alg.power(&v2, 3);
        alg.set_differential("v5", d).unwrap();
        Arc::new(alg)
    }

    fn cp2_identity() -> Arc<AlgebraMorphism> {
        Arc::new(AlgebraMorphism::identity(&cp2()))
    }

    /// theta(v2) = 0, theta(v5) = v2: the degree-3 derivation from the
    /// twisted-fibration example.
    fn theta_v5_to_v2(phi: &Arc<AlgebraMorphism>) -> PhiDerivation {
        let v2 = phi.source.gen_elem_by_name("v2").unwrap();
        PhiDerivation::from_named_values(Arc::clone(phi), 3, vec![("v5", v2)]).unwrap()
    }

    #[test]
    fn evaluate_is_zero_on_closed_powers() {
        let phi = cp2_identity();
        let theta = theta_v5_to_v2(&phi);
        let v2 = phi.source.gen_elem_by_name("v2").unwrap();
        let cube = phi.source.power(&v2, 3);
        // Expanding the twisted Leibniz rule with n = 3 and |v2| = 2 kills
        // every slot, since theta(v2) = 0.
        assert!(theta.evaluate(&cube).is_zero());
    }

    #[test]
    fn evaluate_zero_derivation() {
        let phi = cp2_identity();
        let zero = PhiDerivation::zero(Arc::clone(&phi), 2);
        let v5 = phi.source.gen_elem_by_name("v5").unwrap();
        assert!(zero.evaluate(&v5).is_zero());
    }

    #[test]
    fn d_phi_of_twisting_derivation_is_zero() {
        let phi = cp2_identity();
        let theta = theta_v5_to_v2(&phi);
        let d = theta.d_phi();
        assert!(d.is_zero(), "theta(v5) = v2 is a cycle");
        assert_eq!(d.degree(), 2);

        let zero = PhiDerivation::zero(Arc::clone(&phi), 3);
        assert!(zero.d_phi().is_zero());
    }

    #[test]
    fn slices_of_cp2() {
        let phi = cp2_identity();
        // Degree 4: v2 would need degree -2, v5 degree 1: empty. This
        // emptiness is what forces H_3 to be nonzero.
        assert_eq!(der_slice(&phi, 4).dim(), 0);
        // Degree 5: the single coordinate v5 -> 1.
        let s5 = der_slice(&phi, 5);
        assert_eq!(s5.dim(), 1);
        assert_eq!(s5.coords()[0].0, phi.source.gen_index("v5").unwrap());
        assert!(s5.coords()[0].1.is_unit());
        // Degrees above every generator degree are empty.
        assert_eq!(der_slice(&phi, 6).dim(), 0);
        assert_eq!(der_slice(&phi, 17).dim(), 0);
    }

    #[test]
    fn d_matrix_shapes_and_chain_condition() {
        let phi = cp2_identity();
        for n in 1..=8 {
            let dn = d_matrix(&phi, n).unwrap();
            let dn1 = d_matrix(&phi, n + 1).unwrap();
            let prod = dn.mul(&dn1).unwrap();
            assert!(prod.is_zero(), "D^2 != 0 at degree {n}");
        }
        // Degree 3 slice is one-dimensional and maps to zero.
        let d3 = d_matrix(&phi, 3).unwrap();
        assert_eq!(d3.cols(), 1);
        assert!(d3.is_zero());
    }

    #[test]
    fn homology_of_cp2_identity() {
        let phi = cp2_identity();
        let h3 = homology(&phi, 3).unwrap();
        assert_eq!(h3.dim, 1);
        let rep = &h3.classes[0].representative;
        let v2 = phi.source.gen_elem_by_name("v2").unwrap();
        assert_eq!(rep.value(phi.source.gen_index("v5").unwrap()), &v2);
        assert!(rep.value(phi.source.gen_index("v2").unwrap()).is_zero());
    }

    #[test]
    fn homology_with_zero_differential() {
        let sphere = Arc::new(DgAlgebra::free("s3", vec![("v3".to_string(), 3)]).unwrap());
        let id = Arc::new(AlgebraMorphism::identity(&sphere));
        let h = homology(&id, 3).unwrap();
        assert_eq!(h.dim, 1);
        assert_eq!(
            h.classes[0].representative.value(0).scalar_part(),
            rat_int(1)
        );
    }

    #[test]
    fn augmentation_homology_counts_generators_for_minimal_source() {
        // Minimality makes every slice of Der(A, Q; eps) a space of cycles
        // with no boundaries, so H_n has one dimension per degree-n generator.
        let alg = cp2();
        let eps = Arc::new(AlgebraMorphism::augmentation(&alg));
        let dims: Vec<usize> = (1..=7).map(|n| homology(&eps, n).unwrap().dim).collect();
        assert_eq!(dims, vec![0, 1, 0, 0, 1, 0, 0]);
    }

    #[test]
    fn boundary_tests() {
        let phi = cp2_identity();
        let theta = theta_v5_to_v2(&phi);
        assert!(is_boundary(&phi, &theta).unwrap().is_none());

        let zero = PhiDerivation::zero(Arc::clone(&phi), 3);
        let witness = is_boundary(&phi, &zero).unwrap().unwrap();
        assert!(witness.is_zero());

        // Round-trip: any boundary solves back to a preimage exactly.
        let s5 = der_slice(&phi, 5);
        let psi = s5.derivation_from(&[rat(2, 3)]);
        let boundary = psi.d_phi();
        if !boundary.is_zero() {
            let pre = is_boundary(&phi, &boundary).unwrap().unwrap();
            assert_eq!(pre.d_phi(), boundary);
        }
    }

    #[test]
    fn not_a_cycle_is_rejected() {
        let phi = cp2_identity();
        // theta(v2) = 1 in degree 2 is not a cycle: D(theta)(v5) = -v2^2.
        let theta =
            PhiDerivation::from_named_values(Arc::clone(&phi), 2, vec![("v2", phi.source.unit())])
                .unwrap();
        assert!(!theta.is_cycle());
        assert!(matches!(
            is_boundary(&phi, &theta),
            Err(DerError::NotACycle { .. })
        ));
    }

    #[test]
    fn epsilon_pushforward_reads_scalar_parts() {
        let phi = cp2_identity();
        let theta5 =
            PhiDerivation::from_named_values(Arc::clone(&phi), 5, vec![("v5", phi.source.unit())])
                .unwrap();
        assert_eq!(theta5.epsilon_pushforward(), vec![rat_int(1)]);

        // No degree-3 generators: the functional lives in a zero-dimensional
        // space.
        let theta3 = theta_v5_to_v2(&phi);
        assert!(theta3.epsilon_pushforward().is_empty());
    }

    #[test]
    fn gottlieb_groups_of_cp2() {
        let alg = cp2();
        let dims: Vec<usize> = (2..=6)
            .map(|n| gottlieb_group(&alg, n).unwrap().dim())
            .collect();
        assert_eq!(dims, vec![0, 0, 0, 1, 0]);
    }

    #[test]
    fn gottlieb_group_of_product_of_spheres() {
        let alg = Arc::new(
            DgAlgebra::free("s3xs3", vec![("v3".to_string(), 3), ("u3".to_string(), 3)]).unwrap(),
        );
        let g3 = gottlieb_group(&alg, 3).unwrap();
        assert_eq!(g3.dim(), 2, "zero differential: every functional extends");

        let sphere = Arc::new(DgAlgebra::free("s3", vec![("v3".to_string(), 3)]).unwrap());
        assert_eq!(gottlieb_group(&sphere, 3).unwrap().dim(), 1);
    }

    #[test]
    fn class_equality_is_modulo_boundaries() {
        // Lambda(a2, b3, c3) with d(b3) = a2^2: in derivation degree 1 the
        // cycles are two-dimensional and D of (a2 -> 1) spans a boundary
        // line, so H_1 has dimension 1 with nontrivial coset structure.
        let mut alg = DgAlgebra::free(
            "m",
            vec![
                ("a2".to_string(), 2),
                ("b3".to_string(), 3),
                ("c3".to_string(), 3),
            ],
        )
        .unwrap();
        let a2 = alg.gen_elem_by_name("a2").unwrap();
        let sq = alg.power(&a2, 2);
        alg.set_differential("b3", sq).unwrap();
        let alg = Arc::new(alg);
        let id = Arc::new(AlgebraMorphism::identity(&alg));

        let h = homology(&id, 1).unwrap();
        assert_eq!(h.dim, 1);
        assert!(h.boundaries.dim() > 0);
        let class = &h.classes[0];
        let boundary = h.boundaries.basis()[0].clone();
        let shifted: Vec<Rat> = class
            .rep_vector
            .iter()
            .zip(&boundary)
            .map(|(a, b)| a + b)
            .collect();
        assert!(class.same_class(&shifted));
        // And a genuinely different class is not equal.
        let doubled: Vec<Rat> = class.rep_vector.iter().map(|a| a + a).collect();
        assert!(!class.same_class(&doubled));
    }

    #[test]
    fn evaluation_subgroup_requires_minimal_source() {
        let mut alg =
            DgAlgebra::free("nonmin", vec![("x2".to_string(), 2), ("y1".to_string(), 1)]).unwrap();
        let x2 = alg.gen_elem_by_name("x2").unwrap();
        alg.set_differential("y1", x2).unwrap();
        let alg = Arc::new(alg);
        assert!(matches!(
            gottlieb_group(&alg, 2),
            Err(DerError::SourceNotMinimal { .. })
        ));
    }

    #[test]
    fn evaluation_subgroup_rejects_small_degrees() {
        assert!(matches!(
            gottlieb_group(&cp2(), 1),
            Err(DerError::DegreeTooSmall { degree: 1 })
        ));
    }

    /// The worked family with k = n = 3: fibre Lambda(v1..v4, u) with
    /// d(u) = v1 v2 v3 v4, total twisted by w9 v4. Each dual v_i^* extends to
    /// a D_J-cycle psi_i with psi_i(v_i) = 1 and psi_i(w9) a signed product
    /// of the v_j, j <= 3, j != i; this pins the sign conventions.
    #[test]
    fn psi_cycles_pin_the_sign_conventions() {
        let mut fibre_raw = DgAlgebra::free(
            "fibre",
            vec![
                ("v1".to_string(), 3),
                ("v2".to_string(), 3),
                ("v3".to_string(), 3),
                ("v4".to_string(), 3),
                ("u".to_string(), 11),
            ],
        )
        .unwrap();
        let top = {
            let v1 = fibre_raw.gen_elem_by_name("v1").unwrap();
            let v2 = fibre_raw.gen_elem_by_name("v2").unwrap();
            let v3 = fibre_raw.gen_elem_by_name("v3").unwrap();
            let v4 = fibre_raw.gen_elem_by_name("v4").unwrap();
            fibre_raw.multiply(&fibre_raw.multiply(&v1, &v2), &fibre_raw.multiply(&v3, &v4))
        };
        fibre_raw.set_differential("u", top).unwrap();
        let fibre = Arc::new(fibre_raw);

        let mut total_raw = DgAlgebra::free(
            "total",
            vec![
                ("w9".to_string(), 9),
                ("v1".to_string(), 3),
                ("v2".to_string(), 3),
                ("v3".to_string(), 3),
                ("v4".to_string(), 3),
                ("u".to_string(), 11),
            ],
        )
        .unwrap();
        let d_u = {
            let w9 = total_raw.gen_elem_by_name("w9").unwrap();
            let v1 = total_raw.gen_elem_by_name("v1").unwrap();
            let v2 = total_raw.gen_elem_by_name("v2").unwrap();
            let v3 = total_raw.gen_elem_by_name("v3").unwrap();
            let v4 = total_raw.gen_elem_by_name("v4").unwrap();
            let top =
                total_raw.multiply(&total_raw.multiply(&v1, &v2), &total_raw.multiply(&v3, &v4));
            top.add(&total_raw.multiply(&w9, &v4))
        };
        total_raw.set_differential("u", d_u).unwrap();
        let total = Arc::new(total_raw);

        // J: total -> fibre kills w9 and fixes the fibre generators.
        let images: Vec<Element> = total
            .gens()
            .iter()
            .map(|g| {
                fibre
                    .gen_elem_by_name(&g.name)
                    .unwrap_or_else(|_| Element::zero())
            })
            .collect();
        let j =
            Arc::new(AlgebraMorphism::new(Arc::clone(&total), Arc::clone(&fibre), images).unwrap());

        let v = |name: &str| fibre.gen_elem_by_name(name).unwrap();
        for i in 1..=3u32 {
            let vi = format!("v{i}");
            let others: Vec<Element> = (1..=3)
                .filter(|&jj| jj != i)
                .map(|jj| v(&format!("v{jj}")))
                .collect();
            // Slot i of the expansion of psi_i over v1 v2 v3 v4 carries the
            // sign (-1)^{i-1}, so the cycle condition needs
            // psi_i(w9) = (-1)^i (hat product).
            let slot_sign = if i % 2 == 1 { rat_int(-1) } else { rat_int(1) };
            let hat = fibre.multiply(&others[0], &others[1]).scale(&slot_sign);
            let psi = PhiDerivation::from_named_values(
                Arc::clone(&j),
                3,
                vec![(vi.as_str(), fibre.unit()), ("w9", hat)],
            )
            .unwrap();

            // The two contributions to D_J(psi)(u) cancel exactly.
            let prod = {
                let x = total.gen_elem_by_name("v1").unwrap();
                let y = total.gen_elem_by_name("v2").unwrap();
                let z = total.gen_elem_by_name("v3").unwrap();
                let w = total.gen_elem_by_name("v4").unwrap();
                total.multiply(&total.multiply(&x, &y), &total.multiply(&z, &w))
            };
            let on_top = psi.evaluate(&prod);
            let hat_full: Element = {
                let factors: Vec<Element> = (1..=4)
                    .filter(|&jj| jj != i)
                    .map(|jj| v(&format!("v{jj}")))
                    .collect();
                let mut acc = fibre.unit();
                for f in &factors {
                    acc = fibre.multiply(&acc, f);
                }
                acc
            };
            let wv = {
                let w9 = total.gen_elem_by_name("w9").unwrap();
                let v4 = total.gen_elem_by_name("v4").unwrap();
                total.multiply(&w9, &v4)
            };
            if i % 2 == 1 {
                assert_eq!(on_top, hat_full);
                assert_eq!(psi.evaluate(&wv), hat_full.neg());
            } else {
                assert_eq!(on_top, hat_full.neg());
                assert_eq!(psi.evaluate(&wv), hat_full);
            }

            assert!(psi.d_phi().is_zero(), "psi_{i} must be a D_J-cycle");

            // And the pushforward is exactly v_i^*.
            let push = psi.epsilon_pushforward();
            let degree3 = j.source.gens_of_degree(3);
            let expect: Vec<Rat> = degree3
                .iter()
                .map(|&g| {
                    if j.source.gen(g).name == vi {
                        rat_int(1)
                    } else {
                        rat_int(0)
                    }
                })
                .collect();
            assert_eq!(push, expect);
        }
    }
}
