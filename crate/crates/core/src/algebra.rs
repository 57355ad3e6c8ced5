//! Free graded-commutative DG algebras over Q.
//!
//! An algebra is generated by finitely many named generators of positive
//! degree. Odd-degree generators are exterior (square zero), even-degree
//! generators are polynomial. Elements are exact-rational linear combinations
//! of canonical monomials; every element is homogeneous. The differential is
//! given on generators and extended by the Leibniz rule for a degree +1
//! derivation.

use crate::linalg::RatMatrix;
use crate::{rat_int, Rat};
use num::{One, Signed, Zero};
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::{Arc, Mutex};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AlgebraError {
    #[error("generator '{name}' has degree 0; generators must have degree >= 1")]
    DegreeZeroGenerator { name: String },
    #[error("duplicate generator name '{name}'")]
    DuplicateGenerator { name: String },
    #[error("generator names must be nonempty")]
    EmptyName,
    #[error("unknown generator '{name}'")]
    UnknownGenerator { name: String },
    #[error("differential of '{gen}' must have degree {expected}, found degree {found:?}")]
    DifferentialDegree {
        gen: String,
        expected: usize,
        found: Option<usize>,
    },
    #[error("cannot combine elements of degrees {0:?} and {1:?}")]
    InhomogeneousSum(Option<usize>, Option<usize>),
    #[error("morphism image of '{gen}' must have degree {expected}, found degree {found:?}")]
    MorphismDegree {
        gen: String,
        expected: usize,
        found: Option<usize>,
    },
    #[error("morphism is not a chain map on generator '{gen}'")]
    NotChainMap { gen: String },
}

/// A named generator of positive degree. Parity of the degree decides
/// exterior (odd) versus polynomial (even) behaviour.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Generator {
    pub name: String,
    pub degree: usize,
}

/// Canonical monomial: a sorted word of (generator index, exponent) pairs.
/// Odd generators carry exponent exactly 1; the empty word is the unit.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial {
    word: Vec<(u32, u32)>,
}

impl Monomial {
    pub fn unit() -> Self {
        Monomial { word: Vec::new() }
    }

    pub fn single(gen: u32, exp: u32) -> Self {
        assert!(exp > 0);
        Monomial {
            word: vec![(gen, exp)],
        }
    }

    pub fn is_unit(&self) -> bool {
        self.word.is_empty()
    }

    pub fn word(&self) -> &[(u32, u32)] {
        &self.word
    }

    /// Total number of letters, counting exponents.
    pub fn word_length(&self) -> usize {
        self.word.iter().map(|&(_, e)| e as usize).sum()
    }

    /// The letters in order, one entry per exponent unit.
    pub fn letters(&self) -> impl Iterator<Item = u32> + '_ {
        self.word
            .iter()
            .flat_map(|&(g, e)| std::iter::repeat(g).take(e as usize))
    }

    /// Internal constructor from an already-sorted packed word.
    pub(crate) fn from_packed(word: Vec<(u32, u32)>) -> Self {
        debug_assert!(word.windows(2).all(|w| w[0].0 < w[1].0));
        debug_assert!(word.iter().all(|&(_, e)| e > 0));
        Monomial { word }
    }
}

/// Homogeneous element: monomial -> nonzero rational. The zero element has an
/// empty term map and no degree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Element {
    degree: Option<usize>,
    terms: BTreeMap<Monomial, Rat>,
}

impl Element {
    pub fn zero() -> Self {
        Element {
            degree: None,
            terms: BTreeMap::new(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.degree
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rat)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coefficient(&self, m: &Monomial) -> Rat {
        self.terms.get(m).cloned().unwrap_or_else(Rat::zero)
    }

    /// Coefficient of the unit monomial.
    pub fn scalar_part(&self) -> Rat {
        self.coefficient(&Monomial::unit())
    }

    pub fn scale(&self, c: &Rat) -> Element {
        if c.is_zero() {
            return Element::zero();
        }
        Element {
            degree: self.degree,
            terms: self.terms.iter().map(|(m, a)| (m.clone(), a * c)).collect(),
        }
    }

    pub fn neg(&self) -> Element {
        self.scale(&-rat_int(1))
    }

    /// Sum of homogeneous elements of matching degree. Panics on a degree
    /// clash, which is an internal invariant violation: all construction of
    /// inhomogeneous data is rejected earlier.
    pub fn add(&self, other: &Element) -> Element {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        assert_eq!(
            self.degree, other.degree,
            "attempted to add elements of different degrees"
        );
        let mut terms = self.terms.clone();
        for (m, c) in &other.terms {
            let entry = terms.entry(m.clone()).or_insert_with(Rat::zero);
            *entry += c;
            if entry.is_zero() {
                terms.remove(m);
            }
        }
        if terms.is_empty() {
            Element::zero()
        } else {
            Element {
                degree: self.degree,
                terms,
            }
        }
    }

    pub fn sub(&self, other: &Element) -> Element {
        self.add(&other.neg())
    }

    fn from_map(degree: usize, terms: BTreeMap<Monomial, Rat>) -> Element {
        if terms.is_empty() {
            Element::zero()
        } else {
            Element {
                degree: Some(degree),
                terms,
            }
        }
    }
}

/// Per-generator findings of [`DgAlgebra::check`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DgaViolation {
    /// d does not raise the degree of this generator by exactly one.
    DifferentialDegree {
        gen: String,
        expected: usize,
        found: Option<usize>,
    },
    /// d(d(gen)) is nonzero; carries the residual element.
    DSquareNotZero { gen: String, residual: Element },
}

/// Validation report for a DG algebra. Checking d on generators is exact and
/// sufficient: d extends as a derivation, so d^2 = 0 on generators forces
/// d^2 = 0 everywhere.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DgaReport {
    pub violations: Vec<DgaViolation>,
}

impl DgaReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Finitely generated free graded-commutative algebra with differential.
///
/// Generators are kept in canonical order, ascending by (degree, name); a
/// generator's index in that order is its identity everywhere else in the
/// crate. Degreewise monomial bases and differentials of monomials are
/// memoized behind internal locks, so shared references can be used from
/// several threads.
pub struct DgAlgebra {
    name: String,
    gens: Vec<Generator>,
    d_images: Vec<Element>,
    basis_cache: Mutex<HashMap<usize, Arc<Vec<Monomial>>>>,
    d_cache: Mutex<HashMap<Monomial, Element>>,
}

impl fmt::Debug for DgAlgebra {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DgAlgebra")
            .field("name", &self.name)
            .field("gens", &self.gens)
            .finish_non_exhaustive()
    }
}

impl Clone for DgAlgebra {
    fn clone(&self) -> Self {
        DgAlgebra {
            name: self.name.clone(),
            gens: self.gens.clone(),
            d_images: self.d_images.clone(),
            basis_cache: Mutex::new(HashMap::new()),
            d_cache: Mutex::new(HashMap::new()),
        }
    }
}

impl PartialEq for DgAlgebra {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name && self.gens == other.gens && self.d_images == other.d_images
    }
}

impl Eq for DgAlgebra {}

impl DgAlgebra {
    /// Free algebra with zero differential on the given (name, degree) pairs.
    pub fn free<S: Into<String>>(
        name: S,
        generators: Vec<(String, usize)>,
    ) -> Result<Self, AlgebraError> {
        let mut gens: Vec<Generator> = Vec::with_capacity(generators.len());
        for (name, degree) in generators {
            if name.is_empty() {
                return Err(AlgebraError::EmptyName);
            }
            if degree == 0 {
                return Err(AlgebraError::DegreeZeroGenerator { name });
            }
            gens.push(Generator { name, degree });
        }
        gens.sort_by(|a, b| (a.degree, &a.name).cmp(&(b.degree, &b.name)));
        for pair in gens.windows(2) {
            if pair[0].name == pair[1].name {
                return Err(AlgebraError::DuplicateGenerator {
                    name: pair[0].name.clone(),
                });
            }
        }
        let mut names: Vec<&str> = gens.iter().map(|g| g.name.as_str()).collect();
        names.sort_unstable();
        for pair in names.windows(2) {
            if pair[0] == pair[1] {
                return Err(AlgebraError::DuplicateGenerator {
                    name: pair[0].to_string(),
                });
            }
        }
        let d_images = vec![Element::zero(); gens.len()];
        Ok(DgAlgebra {
            name: name.into(),
            gens,
            d_images,
            basis_cache: Mutex::new(HashMap::new()),
            d_cache: Mutex::new(HashMap::new()),
        })
    }

    /// The ground field Q viewed as the DG algebra with no generators.
    pub fn rationals() -> Self {
        DgAlgebra::free("Q", Vec::new()).expect("no generators, nothing to reject")
    }

    /// Sets d(gen) = image. The image must be homogeneous of degree |gen| + 1
    /// (or zero) and built over this algebra.
    pub fn set_differential(&mut self, gen: &str, image: Element) -> Result<(), AlgebraError> {
        let idx = self
            .gen_index(gen)
            .ok_or_else(|| AlgebraError::UnknownGenerator {
                name: gen.to_string(),
            })? as usize;
        let expected = self.gens[idx].degree + 1;
        if let Some(d) = image.degree() {
            if d != expected {
                return Err(AlgebraError::DifferentialDegree {
                    gen: gen.to_string(),
                    expected,
                    found: Some(d),
                });
            }
        }
        self.d_images[idx] = image;
        self.d_cache.lock().unwrap().clear();
        Ok(())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn num_gens(&self) -> usize {
        self.gens.len()
    }

    pub fn gens(&self) -> &[Generator] {
        &self.gens
    }

    pub fn gen(&self, idx: u32) -> &Generator {
        &self.gens[idx as usize]
    }

    pub fn gen_index(&self, name: &str) -> Option<u32> {
        self.gens
            .iter()
            .position(|g| g.name == name)
            .map(|i| i as u32)
    }

    pub fn gen_degree(&self, idx: u32) -> usize {
        self.gens[idx as usize].degree
    }

    pub fn max_gen_degree(&self) -> usize {
        self.gens.iter().map(|g| g.degree).max().unwrap_or(0)
    }

    /// Indices of generators of degree exactly `n`, in canonical order.
    pub fn gens_of_degree(&self, n: usize) -> Vec<u32> {
        (0..self.gens.len() as u32)
            .filter(|&i| self.gen_degree(i) == n)
            .collect()
    }

    pub fn d_image(&self, idx: u32) -> &Element {
        &self.d_images[idx as usize]
    }

    pub fn zero(&self) -> Element {
        Element::zero()
    }

    pub fn scalar(&self, c: Rat) -> Element {
        if c.is_zero() {
            return Element::zero();
        }
        let mut terms = BTreeMap::new();
        terms.insert(Monomial::unit(), c);
        Element::from_map(0, terms)
    }

    pub fn unit(&self) -> Element {
        self.scalar(Rat::one())
    }

    pub fn gen_elem(&self, idx: u32) -> Element {
        let mut terms = BTreeMap::new();
        terms.insert(Monomial::single(idx, 1), Rat::one());
        Element::from_map(self.gen_degree(idx), terms)
    }

    pub fn gen_elem_by_name(&self, name: &str) -> Result<Element, AlgebraError> {
        let idx = self
            .gen_index(name)
            .ok_or_else(|| AlgebraError::UnknownGenerator {
                name: name.to_string(),
            })?;
        Ok(self.gen_elem(idx))
    }

    pub fn monomial_degree(&self, m: &Monomial) -> usize {
        m.word
            .iter()
            .map(|&(g, e)| self.gen_degree(g) * e as usize)
            .sum()
    }

    /// Element with a single monomial term.
    pub fn monomial_elem(&self, m: Monomial, coeff: Rat) -> Element {
        if coeff.is_zero() {
            return Element::zero();
        }
        let degree = self.monomial_degree(&m);
        let mut terms = BTreeMap::new();
        terms.insert(m, coeff);
        Element::from_map(degree, terms)
    }

    /// Builds a homogeneous element from (monomial, coefficient) pairs,
    /// rejecting mixed degrees.
    pub fn element_from_terms(&self, terms: Vec<(Monomial, Rat)>) -> Result<Element, AlgebraError> {
        let mut out = Element::zero();
        for (m, c) in terms {
            let t = self.monomial_elem(m, c);
            if t.is_zero() {
                continue;
            }
            if !out.is_zero() && out.degree() != t.degree() {
                return Err(AlgebraError::InhomogeneousSum(out.degree(), t.degree()));
            }
            out = out.add(&t);
        }
        Ok(out)
    }

    /// Sorts a word of generator letters into canonical form.
    ///
    /// Returns the Koszul sign of the sorting permutation (a transposition of
    /// two odd letters flips the sign; all other transpositions do not) and
    /// the canonical monomial, or `None` when an odd letter repeats and the
    /// word is zero.
    pub fn normalize_word(&self, letters: &[u32]) -> Option<(i64, Monomial)> {
        let mut word: Vec<u32> = letters.to_vec();
        let mut sign = 1i64;
        // Insertion sort; count odd-odd transpositions.
        for i in 1..word.len() {
            let mut j = i;
            while j > 0 && word[j - 1] > word[j] {
                if self.gen_degree(word[j - 1]) % 2 == 1 && self.gen_degree(word[j]) % 2 == 1 {
                    sign = -sign;
                }
                word.swap(j - 1, j);
                j -= 1;
            }
        }
        let mut packed: Vec<(u32, u32)> = Vec::new();
        for g in word {
            match packed.last_mut() {
                Some((h, e)) if *h == g => {
                    if self.gen_degree(g) % 2 == 1 {
                        return None;
                    }
                    *e += 1;
                }
                _ => packed.push((g, 1)),
            }
        }
        Some((sign, Monomial { word: packed }))
    }

    /// Product of canonical monomials with the Koszul sign, or `None` when an
    /// odd generator would square.
    pub fn monomial_mul(&self, a: &Monomial, b: &Monomial) -> Option<(i64, Monomial)> {
        // Sign: each odd letter of `b` moves left past the odd letters of `a`
        // with strictly larger index.
        let mut sign = 1i64;
        for &(ga, _) in &a.word {
            if self.gen_degree(ga) % 2 == 0 {
                continue;
            }
            for &(gb, _) in &b.word {
                if gb < ga && self.gen_degree(gb) % 2 == 1 {
                    sign = -sign;
                }
            }
        }
        let mut word: Vec<(u32, u32)> = Vec::with_capacity(a.word.len() + b.word.len());
        let (mut i, mut j) = (0, 0);
        while i < a.word.len() || j < b.word.len() {
            let next = if j == b.word.len() || (i < a.word.len() && a.word[i].0 <= b.word[j].0) {
                let x = a.word[i];
                i += 1;
                x
            } else {
                let x = b.word[j];
                j += 1;
                x
            };
            match word.last_mut() {
                Some((g, e)) if *g == next.0 => {
                    if self.gen_degree(next.0) % 2 == 1 {
                        return None;
                    }
                    *e += next.1;
                }
                _ => word.push(next),
            }
        }
        Some((sign, Monomial { word }))
    }

    /// Bilinear product with Koszul signs; homogeneous of degree |a| + |b|.
    pub fn multiply(&self, a: &Element, b: &Element) -> Element {
        if a.is_zero() || b.is_zero() {
            return Element::zero();
        }
        let degree = a.degree().unwrap() + b.degree().unwrap();
        let mut terms: BTreeMap<Monomial, Rat> = BTreeMap::new();
        for (ma, ca) in &a.terms {
            for (mb, cb) in &b.terms {
                let Some((sign, m)) = self.monomial_mul(ma, mb) else {
                    continue;
                };
                let c = ca * cb * rat_int(sign);
                let entry = terms.entry(m.clone()).or_insert_with(Rat::zero);
                *entry += c;
                if entry.is_zero() {
                    terms.remove(&m);
                }
            }
        }
        Element::from_map(degree, terms)
    }

    pub fn power(&self, a: &Element, e: u32) -> Element {
        let mut out = self.unit();
        for _ in 0..e {
            out = self.multiply(&out, a);
        }
        out
    }

    /// The differential, extended by the Leibniz rule
    /// `d(xy) = d(x) y + (-1)^{|x|} x d(y)`.
    pub fn apply_d(&self, x: &Element) -> Element {
        let mut out = Element::zero();
        for (m, c) in &x.terms {
            let dm = self.d_monomial(m);
            if !dm.is_zero() {
                out = out.add(&dm.scale(c));
            }
        }
        out
    }

    fn d_monomial(&self, m: &Monomial) -> Element {
        if let Some(hit) = self.d_cache.lock().unwrap().get(m) {
            return hit.clone();
        }
        let letters: Vec<u32> = m.letters().collect();
        let mut out = Element::zero();
        let mut prefix_degree = 0usize;
        for (i, &g) in letters.iter().enumerate() {
            let dg = &self.d_images[g as usize];
            if !dg.is_zero() {
                let sign = if prefix_degree % 2 == 0 { 1 } else { -1 };
                let (ps, prefix) = self
                    .normalize_word(&letters[..i])
                    .expect("prefix of a canonical word is canonical");
                let (ss, suffix) = self
                    .normalize_word(&letters[i + 1..])
                    .expect("suffix of a canonical word is canonical");
                debug_assert_eq!((ps, ss), (1, 1));
                let term = self.multiply(
                    &self.monomial_elem(prefix, rat_int(sign)),
                    &self.multiply(dg, &self.monomial_elem(suffix, Rat::one())),
                );
                out = out.add(&term);
            }
            prefix_degree += self.gen_degree(g);
        }
        self.d_cache.lock().unwrap().insert(m.clone(), out.clone());
        out
    }

    /// All canonical monomials of total degree `m`, exactly once, in a
    /// deterministic order. Memoized.
    pub fn basis_of_degree(&self, m: usize) -> Arc<Vec<Monomial>> {
        if let Some(hit) = self.basis_cache.lock().unwrap().get(&m) {
            return Arc::clone(hit);
        }
        let mut out = Vec::new();
        let mut word = Vec::new();
        self.enumerate_basis(0, m, &mut word, &mut out);
        out.sort();
        let out = Arc::new(out);
        self.basis_cache.lock().unwrap().insert(m, Arc::clone(&out));
        out
    }

    fn enumerate_basis(
        &self,
        from: usize,
        remaining: usize,
        word: &mut Vec<(u32, u32)>,
        out: &mut Vec<Monomial>,
    ) {
        if remaining == 0 {
            out.push(Monomial { word: word.clone() });
            return;
        }
        for idx in from..self.gens.len() {
            let deg = self.gens[idx].degree;
            if deg > remaining {
                continue;
            }
            let max_exp = if deg % 2 == 1 {
                1
            } else {
                (remaining / deg) as u32
            };
            for e in 1..=max_exp {
                if deg * e as usize > remaining {
                    break;
                }
                word.push((idx as u32, e));
                self.enumerate_basis(idx + 1, remaining - deg * e as usize, word, out);
                word.pop();
            }
        }
    }

    /// Matrix of d from the degree-`m` monomial basis to the degree-`m+1`
    /// basis, in the deterministic basis orders.
    pub fn cochain_d_matrix(&self, m: usize) -> RatMatrix {
        let src = self.basis_of_degree(m);
        let tgt = self.basis_of_degree(m + 1);
        let index: HashMap<&Monomial, usize> =
            tgt.iter().enumerate().map(|(i, mono)| (mono, i)).collect();
        let mut out = RatMatrix::zero(tgt.len(), src.len());
        for (j, mono) in src.iter().enumerate() {
            let image = self.d_monomial(mono);
            for (t, c) in image.terms() {
                let i = *index
                    .get(t)
                    .expect("differential image stays inside the degree-(m+1) basis");
                out.set(i, j, c.clone());
            }
        }
        out
    }

    /// dim H^m = dim ker(d: m -> m+1) - dim im(d: m-1 -> m).
    pub fn cohomology_dim(&self, m: usize) -> usize {
        let d_m = self.cochain_d_matrix(m);
        let kernel = d_m.cols() - d_m.rank();
        let image = if m == 0 {
            0
        } else {
            self.cochain_d_matrix(m - 1).rank()
        };
        kernel - image
    }

    /// Minimality: no d(generator) contains a word-length-1 monomial.
    pub fn is_minimal(&self) -> bool {
        self.first_linear_term().is_none()
    }

    /// The first (generator, linear monomial) pair witnessing non-minimality.
    pub fn first_linear_term(&self) -> Option<(String, Monomial)> {
        for (idx, img) in self.d_images.iter().enumerate() {
            for (m, _) in img.terms() {
                if m.word_length() == 1 {
                    return Some((self.gens[idx].name.clone(), m.clone()));
                }
            }
        }
        None
    }

    /// Degree(+1) and d(d(g)) = 0 for every generator.
    pub fn check(&self) -> DgaReport {
        let mut violations = Vec::new();
        for (idx, g) in self.gens.iter().enumerate() {
            let img = &self.d_images[idx];
            if let Some(d) = img.degree() {
                if d != g.degree + 1 {
                    violations.push(DgaViolation::DifferentialDegree {
                        gen: g.name.clone(),
                        expected: g.degree + 1,
                        found: Some(d),
                    });
                    continue;
                }
            }
            let dd = self.apply_d(img);
            if !dd.is_zero() {
                violations.push(DgaViolation::DSquareNotZero {
                    gen: g.name.clone(),
                    residual: dd,
                });
            }
        }
        DgaReport { violations }
    }

    pub fn format_monomial(&self, m: &Monomial) -> String {
        if m.is_unit() {
            return "1".to_string();
        }
        m.word
            .iter()
            .map(|&(g, e)| {
                if e == 1 {
                    self.gen(g).name.clone()
                } else {
                    format!("{}^{}", self.gen(g).name, e)
                }
            })
            .collect::<Vec<_>>()
            .join("*")
    }

    /// Renders an element in the DSL polynomial syntax, deterministically.
    pub fn format_element(&self, x: &Element) -> String {
        if x.is_zero() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (i, (m, c)) in x.terms.iter().enumerate() {
            let mag = c.abs();
            let negative = c < &Rat::zero();
            if i == 0 {
                if negative {
                    out.push('-');
                }
            } else {
                out.push_str(if negative { " - " } else { " + " });
            }
            if m.is_unit() {
                out.push_str(&mag.to_string());
            } else if mag.is_one() {
                out.push_str(&self.format_monomial(m));
            } else {
                out.push_str(&format!("{}*{}", mag, self.format_monomial(m)));
            }
        }
        out
    }
}

/// A DG algebra map, determined by its images on generators and extended
/// multiplicatively.
#[derive(Debug, Clone)]
pub struct AlgebraMorphism {
    pub source: Arc<DgAlgebra>,
    pub target: Arc<DgAlgebra>,
    images: Vec<Element>,
}

impl AlgebraMorphism {
    /// Verified constructor: degree-preserving and a chain map on generators.
    pub fn new(
        source: Arc<DgAlgebra>,
        target: Arc<DgAlgebra>,
        images: Vec<Element>,
    ) -> Result<Self, AlgebraError> {
        assert_eq!(images.len(), source.num_gens());
        let phi = AlgebraMorphism {
            source,
            target,
            images,
        };
        for idx in 0..phi.source.num_gens() as u32 {
            let g = phi.source.gen(idx);
            if let Some(d) = phi.images[idx as usize].degree() {
                if d != g.degree {
                    return Err(AlgebraError::MorphismDegree {
                        gen: g.name.clone(),
                        expected: g.degree,
                        found: Some(d),
                    });
                }
            }
            let lhs = phi.apply(phi.source.d_image(idx));
            let rhs = phi.target.apply_d(&phi.images[idx as usize]);
            if lhs != rhs {
                return Err(AlgebraError::NotChainMap {
                    gen: g.name.clone(),
                });
            }
        }
        Ok(phi)
    }

    /// For internal plumbing where the chain condition is checked separately
    /// (e.g. while validating a not-yet-trusted KS model).
    pub(crate) fn new_unchecked(
        source: Arc<DgAlgebra>,
        target: Arc<DgAlgebra>,
        images: Vec<Element>,
    ) -> Self {
        assert_eq!(images.len(), source.num_gens());
        AlgebraMorphism {
            source,
            target,
            images,
        }
    }

    pub fn identity(alg: &Arc<DgAlgebra>) -> Self {
        let images = (0..alg.num_gens() as u32)
            .map(|i| alg.gen_elem(i))
            .collect();
        AlgebraMorphism {
            source: Arc::clone(alg),
            target: Arc::clone(alg),
            images,
        }
    }

    /// The augmentation: every generator goes to zero in Q.
    pub fn augmentation(source: &Arc<DgAlgebra>) -> Self {
        let target = Arc::new(DgAlgebra::rationals());
        let images = vec![Element::zero(); source.num_gens()];
        AlgebraMorphism {
            source: Arc::clone(source),
            target,
            images,
        }
    }

    pub fn image_of_gen(&self, idx: u32) -> &Element {
        &self.images[idx as usize]
    }

    /// Multiplicative, linear extension of the generator images.
    pub fn apply(&self, x: &Element) -> Element {
        let mut out = Element::zero();
        'terms: for (m, c) in x.terms() {
            let mut prod = self.target.scalar(c.clone());
            for &(g, e) in m.word() {
                let img = &self.images[g as usize];
                if img.is_zero() {
                    continue 'terms;
                }
                prod = self.target.multiply(&prod, &self.target.power(img, e));
                if prod.is_zero() {
                    continue 'terms;
                }
            }
            out = out.add(&prod);
        }
        out
    }

    /// True when the chain-map condition holds on every generator.
    pub fn is_chain_map(&self) -> bool {
        (0..self.source.num_gens() as u32).all(|idx| {
            self.apply(self.source.d_image(idx)) == self.target.apply_d(&self.images[idx as usize])
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat;

    /// Minimal model of CP^2: generators v2 (degree 2), v5 (degree 5),
    /// d(v5) = v2^3.
    pub(crate) fn cp2() -> Arc<DgAlgebra> {
        let mut alg =
            DgAlgebra::free("cp2", vec![("v2".to_string(), 2), ("v5".to_string(), 5)]).unwrap();
        let v2 = alg.gen_elem_by_name("v2").unwrap();
        let v2_cubed = alg.power(&v2, 3);
        alg.set_differential("v5", v2_cubed).unwrap();
        Arc::new(alg)
    }

    fn s4() -> Arc<DgAlgebra> {
        let mut alg =
            DgAlgebra::free("s4", vec![("w4".to_string(), 4), ("w7".to_string(), 7)]).unwrap();
        let w4 = alg.gen_elem_by_name("w4").unwrap();
        let w4sq = alg.power(&w4, 2);
        alg.set_differential("w7", w4sq).unwrap();
        Arc::new(alg)
    }

    #[test]
    fn normalize_word_signs() {
        // |v5| = 5 odd, |v2| = 2 even: odd past even commutes without sign.
        let alg = cp2();
        let v2 = alg.gen_index("v2").unwrap();
        let v5 = alg.gen_index("v5").unwrap();
        let (sign, m) = alg.normalize_word(&[v5, v2]).unwrap();
        assert_eq!(sign, 1);
        assert_eq!(m, alg.normalize_word(&[v2, v5]).unwrap().1);

        // Odd square vanishes.
        assert!(alg.normalize_word(&[v5, v5]).is_none());

        // Odd-odd transposition flips the sign.
        let two_odd =
            DgAlgebra::free("t", vec![("u3".to_string(), 3), ("w3".to_string(), 3)]).unwrap();
        let u3 = two_odd.gen_index("u3").unwrap();
        let w3 = two_odd.gen_index("w3").unwrap();
        assert!(u3 < w3, "canonical order is ascending (degree, name)");
        let (sign, _) = two_odd.normalize_word(&[w3, u3]).unwrap();
        assert_eq!(sign, -1);
    }

    #[test]
    fn multiply_basics() {
        let alg = cp2();
        let v2 = alg.gen_elem_by_name("v2").unwrap();
        let v5 = alg.gen_elem_by_name("v5").unwrap();
        assert_eq!(alg.multiply(&alg.unit(), &v5), v5);
        assert!(alg.multiply(&v5, &v5).is_zero());
        assert_eq!(alg.multiply(&v2, &alg.power(&v2, 2)), alg.power(&v2, 3));
        assert_eq!(alg.power(&v2, 3).degree(), Some(6));
    }

    #[test]
    fn apply_d_on_cp2() {
        let alg = cp2();
        let v2 = alg.gen_elem_by_name("v2").unwrap();
        let v5 = alg.gen_elem_by_name("v5").unwrap();
        assert_eq!(alg.apply_d(&v5), alg.power(&v2, 3));
        assert!(alg.apply_d(&alg.power(&v2, 3)).is_zero());
        // Leibniz: d(v2 v5) = d(v2) v5 + (-1)^2 v2 d(v5) = v2^4. Frozen from
        // the independent letterwise expansion in tests/oracle.rs.
        let prod = alg.multiply(&v2, &v5);
        assert_eq!(alg.apply_d(&prod), alg.power(&v2, 4));
    }

    #[test]
    fn check_dga_valid_and_invalid() {
        assert!(cp2().check().ok());
        assert!(s4().check().ok());

        // d(b3) = a2 forces a degree violation: |a2| = 2 != 4.
        let mut bad =
            DgAlgebra::free("bad", vec![("a2".to_string(), 2), ("b3".to_string(), 3)]).unwrap();
        let a2 = bad.gen_elem_by_name("a2").unwrap();
        assert!(matches!(
            bad.set_differential("b3", a2),
            Err(AlgebraError::DifferentialDegree { .. })
        ));

        // d^2 != 0: a4 -> b5? construct d(a4) = b5, d(b5) = c6... simplest:
        // d(x2) = y3, d(y3) = z4 with d(d(x2)) = z4 != 0.
        let mut bad2 = DgAlgebra::free(
            "bad2",
            vec![
                ("x2".to_string(), 2),
                ("y3".to_string(), 3),
                ("z4".to_string(), 4),
            ],
        )
        .unwrap();
        let y3 = bad2.gen_elem_by_name("y3").unwrap();
        let z4 = bad2.gen_elem_by_name("z4").unwrap();
        bad2.set_differential("x2", y3).unwrap();
        bad2.set_differential("y3", z4).unwrap();
        let report = bad2.check();
        assert!(!report.ok());
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(v, DgaViolation::DSquareNotZero { gen, .. } if gen == "x2")));
    }

    #[test]
    fn basis_of_degree_cp2() {
        let alg = cp2();
        let names = |m: usize| -> Vec<String> {
            alg.basis_of_degree(m)
                .iter()
                .map(|mono| alg.format_monomial(mono))
                .collect()
        };
        assert_eq!(names(0), vec!["1"]);
        assert_eq!(names(4), vec!["v2^2"]);
        assert_eq!(names(7), vec!["v2*v5"]);
        assert_eq!(names(1), Vec::<String>::new());
    }

    #[test]
    fn morphism_application() {
        let alg = cp2();
        let id = AlgebraMorphism::identity(&alg);
        let v5 = alg.gen_elem_by_name("v5").unwrap();
        assert_eq!(id.apply(&v5), v5);

        let eps = AlgebraMorphism::augmentation(&alg);
        assert!(eps.apply(&v5).is_zero());
        assert_eq!(eps.apply(&alg.scalar(rat(3, 2))).scalar_part(), rat(3, 2));
        assert!(eps.is_chain_map());
    }

    #[test]
    fn cohomology_of_cp2_model() {
        let alg = cp2();
        // H^*(CP^2; Q) = Q in degrees 0, 2, 4 and zero above.
        assert_eq!(alg.cohomology_dim(0), 1);
        assert_eq!(alg.cohomology_dim(2), 1);
        assert_eq!(alg.cohomology_dim(4), 1);
        assert_eq!(alg.cohomology_dim(6), 0);
        assert_eq!(alg.cohomology_dim(5), 0);
        assert_eq!(alg.cohomology_dim(7), 0);

        let sphere = Arc::new(DgAlgebra::free("s3", vec![("v3".to_string(), 3)]).unwrap());
        assert_eq!(sphere.cohomology_dim(3), 1);
    }

    #[test]
    fn minimality() {
        assert!(cp2().is_minimal());

        let mut free =
            DgAlgebra::free("m", vec![("x2".to_string(), 2), ("y3".to_string(), 3)]).unwrap();
        let x2 = free.gen_elem_by_name("x2").unwrap();
        let sq = free.power(&x2, 2);
        free.set_differential("y3", sq).unwrap();
        assert!(free.is_minimal());

        let mut contractible =
            DgAlgebra::free("c", vec![("x2".to_string(), 2), ("y1".to_string(), 1)]).unwrap();
        let x2 = contractible.gen_elem_by_name("x2").unwrap();
        contractible.set_differential("y1", x2).unwrap();
        assert!(!contractible.is_minimal());
        assert_eq!(contractible.first_linear_term().unwrap().0, "y1");
    }

    #[test]
    fn element_rendering() {
        let alg = cp2();
        let v2 = alg.gen_elem_by_name("v2").unwrap();
        let v5 = alg.gen_elem_by_name("v5").unwrap();
        assert_eq!(
            alg.format_element(&alg.power(&v2, 3).scale(&rat(2, 1))),
            "2*v2^3"
        );
        assert_eq!(
            alg.format_element(&alg.multiply(&v2, &v5).scale(&rat(-1, 2))),
            "-1/2*v2*v5"
        );
        assert_eq!(alg.format_element(&alg.zero()), "0");
        assert_eq!(alg.format_element(&alg.scalar(rat(3, 4))), "3/4");
    }
}
