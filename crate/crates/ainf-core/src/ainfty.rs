//! A∞-algebras, morphisms and homotopies: Stasheff defects, obstructions,
//! composition and strict units.
//!
//! Tables are indexed by arity starting at 1; `μ₁` is the differential. An
//! arity beyond the populated table is the zero map.

use std::sync::Arc;

use crate::chaincx::{ChainComplex, GradedMap, GradedModule};
use crate::exactlin::{Field, FieldElement, SparseMatrix};
use crate::signs::{block_apply, compositions, koszul_apply, parity, t1, t2, tabulate, tensor_power_complex, Block, MultiMap, Sink, TensorBasis};
use crate::{Error, Result};

/// `Σ_{u+v+w=k, v∈vs} (−1)^{u+vw} outer_{u+1+w}(id^{⊗u} ⊗ inner_v ⊗ id^{⊗w})(x)`.
pub(crate) fn insertion_terms(outer: &[MultiMap], inner: &[MultiMap], vs: (usize, usize), x: &[usize], degs: &[i32], coeff: &FieldElement, sink: &mut Sink) {
    let k = x.len();
    for v in vs.0.max(1)..=vs.1.min(k) {
        let (Some(iv), Some(o)) = (inner.get(v - 1), outer.get(k - v)) else { continue };
        for u in 0..=k - v {
            let w = k - v - u;
            let c = if parity((u + v * w) as i64) { -coeff } else { coeff.clone() };
            koszul_apply(iv, u, degs, x, |t, s| sink.add_column(o.eval(t), &(s * &c)));
        }
    }
}

/// `Σ_{p∈ps} Σ_{|α|=k} (−1)^{t₁(α)} outer_p g^{⊗α}(x)`.
pub(crate) fn block_terms(outer: &[MultiMap], gs: &[MultiMap], ps: (usize, usize), x: &[usize], degs: &[i32], coeff: &FieldElement, sink: &mut Sink) {
    let k = x.len();
    let field = coeff.field();
    for p in ps.0.max(1)..=ps.1.min(k) {
        let Some(o) = outer.get(p - 1) else { continue };
        for alpha in compositions(k, p) {
            if alpha.iter().any(|&a| a > gs.len()) {
                continue;
            }
            let c = if t1(&alpha) { -coeff } else { coeff.clone() };
            let blocks: Vec<Block> = alpha.iter().map(|&a| Block::Map(&gs[a - 1])).collect();
            block_apply(&blocks, degs, x, field, |t, s| sink.add_column(o.eval(t), &(s * &c)));
        }
    }
}

/// `Σ (−1)^{u+vq+t₂(α,β)} outer_{p+1+q}(f^{⊗α} ⊗ σ_v ⊗ g^{⊗β})(x)` over
/// `u+v+w = k`, `v ∈ vs`, `|α| = u`, `|β| = w` and `p+q < pq_limit`.
#[allow(clippy::too_many_arguments)]
pub(crate) fn htpy_terms(outer: &[MultiMap], fs: &[MultiMap], ss: &[MultiMap], gs: &[MultiMap], vs: (usize, usize), pq_limit: usize, x: &[usize], degs: &[i32], coeff: &FieldElement, sink: &mut Sink) {
    let k = x.len();
    let field = coeff.field();
    for v in vs.0.max(1)..=vs.1.min(k) {
        let Some(sv) = ss.get(v - 1) else { continue };
        for u in 0..=k - v {
            let w = k - v - u;
            for p in 0..=u {
                for alpha in compositions(u, p) {
                    if alpha.iter().any(|&a| a > fs.len()) {
                        continue;
                    }
                    for q in 0..=w {
                        if p + q >= pq_limit {
                            continue;
                        }
                        let Some(o) = outer.get(p + q) else { continue };
                        for beta in compositions(w, q) {
                            if beta.iter().any(|&b| b > gs.len()) {
                                continue;
                            }
                            let e = parity((u + v * q) as i64) ^ t2(&alpha, &beta, u, p, q);
                            let c = if e { -coeff } else { coeff.clone() };
                            let mut blocks: Vec<Block> = alpha.iter().map(|&a| Block::Map(&fs[a - 1])).collect();
                            blocks.push(Block::Map(sv));
                            blocks.extend(beta.iter().map(|&b| Block::Map(&gs[b - 1])));
                            block_apply(&blocks, degs, x, field, |t, s| sink.add_column(o.eval(t), &(s * &c)));
                        }
                    }
                }
            }
        }
    }
}

/// `outer ∘ (b₁ ⊗ ⋯ ⊗ b_p)(x)` accumulated into the sink.
pub(crate) fn precompose_terms(outer: &MultiMap, blocks: &[Block<'_>], x: &[usize], degs: &[i32], coeff: &FieldElement, sink: &mut Sink) {
    block_apply(blocks, degs, x, coeff.field(), |t, s| sink.add_column(outer.eval(t), &(s * coeff)));
}

/// `Σ_{u+w=k−1} outer(a^{⊗u} ⊗ s ⊗ b^{⊗w})(x)`.
pub(crate) fn interleave_terms(outer: &MultiMap, a: &MultiMap, s: &MultiMap, b: &MultiMap, x: &[usize], degs: &[i32], coeff: &FieldElement, sink: &mut Sink) {
    let k = x.len();
    for u in 0..k {
        let mut blocks = vec![Block::Map(a); u];
        blocks.push(Block::Map(s));
        blocks.extend(std::iter::repeat_n(Block::Map(b), k - 1 - u));
        precompose_terms(outer, &blocks, x, degs, coeff, sink);
    }
}

/// `∂(f)` for a multimap on a tensor product of complexes, in the Hom complex.
pub fn multi_hom_differential(f: &MultiMap, factors: &[&ChainComplex], target: &ChainComplex) -> Result<GradedMap> {
    let (full, t, delta) = (f.basis().module(), target.module(), f.degree());
    let (Some(lo), Some(hi)) = (t.bottom(), t.top()) else { return Ok(GradedMap::zero(full, t, delta - 1)) };
    let fcx = tensor_power_complex(f.basis(), factors, Some((lo - delta, hi - delta + 1)));
    let d = crate::chaincx::hom_differential(&f.map().restrict_source(fcx.module()), &fcx, target)?;
    Ok(d.with_modules(full, t))
}

pub(crate) fn check_zero(m: &MultiMap, what: impl FnOnce() -> String) -> Result<()> {
    match m.first_nonzero() {
        None => Ok(()),
        Some((d, i, j, v)) => Err(Error::Verification(format!("{} at source degree {d}, entry ({i}, {j}) = {v}", what()))),
    }
}

/// The split `A = Q·1 ⊕ Ā` of a strictly unital structure, with `Ā` indexed
/// by the basis of `A` minus the unit.
#[derive(Clone, Debug)]
pub struct UnitSplit {
    pub unit: usize,
    pub bar: ChainComplex,
}

impl UnitSplit {
    /// `Ā` as the quotient complex `A / Q·1`.
    pub fn new(a: &ChainComplex, unit_index: usize) -> Result<UnitSplit> {
        let m = a.module();
        if unit_index >= m.rank(0) {
            return Err(Error::Precondition(format!("unit index {unit_index} out of range in degree 0")));
        }
        let unit = m.offset(0) + unit_index;
        if !a.differential().column(0, unit_index).is_empty() {
            return Err(Error::Precondition("the unit is not a cycle".into()));
        }
        let bar_module = GradedModule::new(m.field(), m.degrees().map(|(d, r)| (d, if d == 0 { r - 1 } else { r })));
        let keep = |d: i32| -> Vec<usize> { (0..m.rank(d)).filter(|&i| d != 0 || i != unit_index).collect() };
        let mut blocks = std::collections::BTreeMap::new();
        for (d, b) in a.differential().blocks() {
            blocks.insert(*d, b.submatrix(&keep(d - 1), &keep(*d)));
        }
        let bar = ChainComplex::from_differential_unchecked(GradedMap::from_blocks_unchecked(&bar_module, &bar_module, -1, blocks));
        Ok(UnitSplit { unit, bar })
    }

    pub fn to_full(&self, g: usize) -> usize {
        if g < self.unit { g } else { g + 1 }
    }

    pub fn tuple_to_full(&self, x: &[usize]) -> Vec<usize> {
        x.iter().map(|&g| self.to_full(g)).collect()
    }

    /// Extends a map on `Ā^{⊗k}` by zero along tuples containing the unit.
    pub fn extend_by_zero(&self, f: &MultiMap, full: &Arc<TensorBasis>) -> MultiMap {
        self.extend_by_zero_prefix(f, full, full.arity())
    }

    /// As [`UnitSplit::extend_by_zero`] when only the first `prefix` factors
    /// are copies of `A`.
    pub fn extend_by_zero_prefix(&self, f: &MultiMap, full: &Arc<TensorBasis>, prefix: usize) -> MultiMap {
        let unit = self.unit;
        let one = f.field().one();
        tabulate(full, f.target(), f.degree(), None, |x, sink| {
            if x[..prefix].contains(&unit) {
                return;
            }
            let y: Vec<usize> = x.iter().enumerate().map(|(i, &g)| if i < prefix && g > unit { g - 1 } else { g }).collect();
            sink.add_column(f.eval(&y), &one);
        })
    }
}

/// An A∞-algebra (or A_K-structure) on a bounded complex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AInfAlgebra {
    complex: ChainComplex,
    mus: Vec<MultiMap>,
    unit: Option<usize>,
}

pub(crate) fn check_table_entry(m: &MultiMap, k: usize, factors: &[GradedModule], target: &GradedModule, degree: i32, name: &str) -> Result<()> {
    if m.arity() != k || m.basis().factors() != factors || m.target() != target || m.degree() != degree {
        return Err(Error::Mismatch(format!("{name}_{k} has the wrong arity, degree or modules")));
    }
    Ok(())
}

impl AInfAlgebra {
    /// `higher[j]` is `μ_{j+2}`. Only shapes are checked.
    pub fn new_unchecked(complex: ChainComplex, higher: Vec<MultiMap>, unit: Option<usize>) -> Result<AInfAlgebra> {
        let m = complex.module().clone();
        let mut mus = vec![MultiMap::unary(complex.differential())];
        for (j, mu) in higher.into_iter().enumerate() {
            let k = j + 2;
            check_table_entry(&mu, k, &vec![m.clone(); k], &m, k as i32 - 2, "mu")?;
            mus.push(mu);
        }
        if let Some(i) = unit {
            UnitSplit::new(&complex, i)?;
        }
        Ok(AInfAlgebra { complex, mus, unit })
    }

    /// Checks every Stasheff identity that can be nonzero for the given
    /// table (with `μ_k = 0` beyond it), and the unit equations when a unit
    /// is given.
    pub fn new(complex: ChainComplex, higher: Vec<MultiMap>, unit: Option<usize>) -> Result<AInfAlgebra> {
        let a = AInfAlgebra::new_unchecked(complex, higher, unit)?;
        a.verify(a.complete_bound())?;
        Ok(a)
    }

    /// The complex with zero higher operations beyond `μ₁`.
    pub fn trivial(complex: ChainComplex) -> AInfAlgebra {
        AInfAlgebra { mus: vec![MultiMap::unary(complex.differential())], complex, unit: None }
    }

    pub fn complex(&self) -> &ChainComplex {
        &self.complex
    }

    pub fn module(&self) -> &GradedModule {
        self.complex.module()
    }

    pub fn field(&self) -> Field {
        self.complex.field()
    }

    pub fn arity_bound(&self) -> usize {
        self.mus.len()
    }

    pub fn mus(&self) -> &[MultiMap] {
        &self.mus
    }

    pub fn mu(&self, k: usize) -> Option<&MultiMap> {
        self.mus.get(k - 1)
    }

    pub fn unit(&self) -> Option<usize> {
        self.unit
    }

    pub fn unit_split(&self) -> Option<UnitSplit> {
        self.unit.map(|i| UnitSplit::new(&self.complex, i).expect("unit validated at construction"))
    }

    pub fn with_unit(&self, unit: Option<usize>) -> Result<AInfAlgebra> {
        AInfAlgebra::new_unchecked(self.complex.clone(), self.mus[1..].to_vec(), unit)
    }

    /// Basis of `A^{⊗k}`, shared with `μ_k` when populated.
    pub fn basis(&self, k: usize) -> Arc<TensorBasis> {
        match self.mus.get(k - 1) {
            Some(m) => m.basis().clone(),
            None => Arc::new(TensorBasis::power(self.module(), k)),
        }
    }

    /// `μ₁ … μ_n` (the A_n-truncation).
    pub fn truncated(&self, n: usize) -> AInfAlgebra {
        AInfAlgebra { complex: self.complex.clone(), mus: self.mus[..n.min(self.mus.len())].to_vec(), unit: self.unit }
    }

    /// `top − bottom + 2`, the arity beyond which operations on a
    /// nonnegatively graded complex vanish for degree reasons.
    pub fn degree_bound(&self) -> usize {
        degree_bound(self.module())
    }

    /// Arity beyond which every Stasheff defect vanishes identically.
    pub fn complete_bound(&self) -> usize {
        (2 * self.mus.len() - 1).min(degree_cap(self.module(), self.module(), -3))
    }

    pub fn verify(&self, up_to: usize) -> Result<()> {
        for k in 1..=up_to {
            check_zero(&stasheff_defect(self, k), || format!("Stasheff identity k={k}"))?;
        }
        if self.unit.is_some() {
            for d in unit_defects(self, up_to)? {
                check_zero(&d.map, || format!("unit identity k={} u={}", d.k, d.u))?;
            }
        }
        Ok(())
    }

    /// Every `μ_k` scaled by `c(k)`.
    pub fn rescaled(&self, c: impl Fn(usize) -> FieldElement) -> AInfAlgebra {
        let mut mus = self.mus.clone();
        for (j, m) in mus.iter_mut().enumerate().skip(1) {
            *m = m.scale(&c(j + 1));
        }
        AInfAlgebra { complex: self.complex.clone(), mus, unit: self.unit }
    }
}

/// Largest arity `k` at which a defect of degree `k + c` between `source^{⊗k}`
/// and `target` can be nonzero, for a nonnegatively graded source.
pub(crate) fn degree_cap(source: &GradedModule, target: &GradedModule, c: i32) -> usize {
    match (source.bottom(), target.top()) {
        (None, _) | (_, None) => 0,
        (Some(b), Some(t)) if b >= 0 => ((t - c) / (b + 1)).max(0) as usize,
        _ => usize::MAX,
    }
}

pub fn degree_bound(m: &GradedModule) -> usize {
    match (m.bottom(), m.top()) {
        (Some(b), Some(t)) => (t - b + 2).max(2) as usize,
        _ => 2,
    }
}

/// Evaluates `f` on every basis tensor of `basis`, passing the tuple degrees.
pub(crate) fn build(basis: &Arc<TensorBasis>, target: &GradedModule, degree: i32, window: Option<(i32, i32)>, mut f: impl FnMut(&[usize], &[i32], &mut Sink)) -> MultiMap {
    tabulate(basis, target, degree, window, |x, sink| {
        let degs = basis.degrees(x);
        f(x, &degs, sink)
    })
}

pub fn stasheff_defect(a: &AInfAlgebra, k: usize) -> MultiMap {
    if k > a.complete_bound() {
        return MultiMap::zero(&a.basis(k), a.module(), k as i32 - 3);
    }
    let one = a.field().one();
    build(&a.basis(k), a.module(), k as i32 - 3, None, |x, degs, sink| insertion_terms(a.mus(), a.mus(), (1, k), x, degs, &one, sink))
}

fn require_level(ok: bool, what: &str, n: usize) -> Result<()> {
    if ok { Ok(()) } else { Err(Error::Precondition(format!("{what} is not populated to level {n}"))) }
}

/// `obs_n{A}`: the arity-`(n+1)` Stasheff sum with `2 ≤ v ≤ n`.
pub fn obstruction_algebra(a: &AInfAlgebra, n: usize) -> Result<MultiMap> {
    require_level(a.arity_bound() >= n, "algebra", n)?;
    a.truncated(n).verify(n)?;
    Ok(obs_algebra_raw(&a.mus[..n], &a.basis(n + 1), a.module(), None))
}

pub(crate) fn obs_algebra_raw(mus: &[MultiMap], basis: &Arc<TensorBasis>, target: &GradedModule, window: Option<(i32, i32)>) -> MultiMap {
    let n = basis.arity() - 1;
    let one = target.field().one();
    let mus = &mus[..n.min(mus.len())];
    build(basis, target, n as i32 - 2, window, |x, degs, sink| insertion_terms(mus, mus, (2, n), x, degs, &one, sink))
}

/// An A∞-morphism `φ: A → B`; `φ_k` has degree `k−1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AInfMorphism {
    source: Arc<AInfAlgebra>,
    target: Arc<AInfAlgebra>,
    phis: Vec<MultiMap>,
}

impl AInfMorphism {
    /// `phis[j]` is `φ_{j+1}`. Only shapes are checked.
    pub fn new_unchecked(source: &Arc<AInfAlgebra>, target: &Arc<AInfAlgebra>, phis: Vec<MultiMap>) -> Result<AInfMorphism> {
        if source.field() != target.field() {
            return Err(Error::Lin(crate::exactlin::LinError::FieldMismatch));
        }
        if phis.is_empty() {
            return Err(Error::Mismatch("a morphism needs its linear part".into()));
        }
        for (j, f) in phis.iter().enumerate() {
            let k = j + 1;
            check_table_entry(f, k, &vec![source.module().clone(); k], target.module(), k as i32 - 1, "phi")?;
        }
        Ok(AInfMorphism { source: source.clone(), target: target.clone(), phis })
    }

    pub fn new(source: &Arc<AInfAlgebra>, target: &Arc<AInfAlgebra>, phis: Vec<MultiMap>) -> Result<AInfMorphism> {
        let f = AInfMorphism::new_unchecked(source, target, phis)?;
        f.verify(f.complete_bound())?;
        Ok(f)
    }

    pub fn strict(source: &Arc<AInfAlgebra>, target: &Arc<AInfAlgebra>, phi1: &GradedMap) -> Result<AInfMorphism> {
        AInfMorphism::new_unchecked(source, target, vec![MultiMap::unary(phi1)])
    }

    pub fn identity(a: &Arc<AInfAlgebra>) -> AInfMorphism {
        AInfMorphism { source: a.clone(), target: a.clone(), phis: vec![MultiMap::unary(&GradedMap::identity(a.module()))] }
    }

    pub fn source(&self) -> &Arc<AInfAlgebra> {
        &self.source
    }

    pub fn target(&self) -> &Arc<AInfAlgebra> {
        &self.target
    }

    pub fn phis(&self) -> &[MultiMap] {
        &self.phis
    }

    pub fn phi(&self, k: usize) -> Option<&MultiMap> {
        self.phis.get(k - 1)
    }

    pub fn linear(&self) -> &GradedMap {
        self.phis[0].map()
    }

    pub fn arity_bound(&self) -> usize {
        self.phis.len()
    }

    pub fn is_strict(&self) -> bool {
        self.phis[1..].iter().all(|f| f.is_zero())
    }

    pub fn truncated(&self, n: usize) -> AInfMorphism {
        AInfMorphism { source: self.source.clone(), target: self.target.clone(), phis: self.phis[..n.min(self.phis.len())].to_vec() }
    }

    /// Padded with zero maps up to arity `k`.
    pub fn padded(&self, k: usize) -> AInfMorphism {
        let mut out = self.clone();
        while out.phis.len() < k {
            let j = out.phis.len() + 1;
            out.phis.push(MultiMap::zero(&self.source.basis(j), self.target.module(), j as i32 - 1));
        }
        out
    }

    /// Arity beyond which every morphism defect vanishes identically.
    pub fn complete_bound(&self) -> usize {
        let structural = (self.source.arity_bound() + self.phis.len() - 1).max(self.target.arity_bound() * self.phis.len());
        structural.min(degree_cap(self.source.module(), self.target.module(), -2))
    }

    pub fn verify(&self, up_to: usize) -> Result<()> {
        for k in 1..=up_to {
            check_zero(&morphism_defect(self, k), || format!("morphism identity k={k}"))?;
        }
        Ok(())
    }

    /// The unit equations for a morphism of strictly unital algebras.
    pub fn verify_unital(&self, up_to: usize) -> Result<()> {
        if self.source.unit.is_none() || self.target.unit.is_none() {
            return Err(Error::Precondition("morphism endpoints are not unital".into()));
        }
        for d in morphism_unit_defects(self, up_to) {
            check_zero(&d.map, || format!("morphism unit identity k={} u={}", d.k, d.u))?;
        }
        Ok(())
    }
}

pub fn morphism_defect(phi: &AInfMorphism, k: usize) -> MultiMap {
    let (a, b) = (&phi.source, &phi.target);
    if k > phi.complete_bound() {
        return MultiMap::zero(&a.basis(k), b.module(), k as i32 - 2);
    }
    let one = a.field().one();
    let minus = -&one;
    build(&a.basis(k), b.module(), k as i32 - 2, None, |x, degs, sink| {
        insertion_terms(&phi.phis, a.mus(), (1, k), x, degs, &one, sink);
        block_terms(b.mus(), &phi.phis, (1, k), x, degs, &minus, sink);
    })
}

/// `obs_n{φ}`.
pub fn obstruction_morphism(phi: &AInfMorphism, n: usize) -> Result<MultiMap> {
    require_level(phi.arity_bound() >= n, "morphism", n)?;
    phi.truncated(n).verify(n)?;
    Ok(obs_morphism_raw(phi, n, &phi.source.basis(n + 1), None))
}

pub(crate) fn obs_morphism_raw(phi: &AInfMorphism, n: usize, basis: &Arc<TensorBasis>, window: Option<(i32, i32)>) -> MultiMap {
    let (a, b) = (&phi.source, &phi.target);
    let one = a.field().one();
    let minus = -&one;
    let phis = &phi.phis[..n.min(phi.phis.len())];
    let mua = &a.mus()[..n.min(a.arity_bound())];
    build(basis, b.module(), n as i32 - 1, window, |x, degs, sink| obs_morphism_terms(phis, mua, b.mus(), n, x, degs, &one, &minus, sink))
}

#[allow(clippy::too_many_arguments)]
pub(crate) fn obs_morphism_terms(phis: &[MultiMap], mua: &[MultiMap], mub: &[MultiMap], n: usize, x: &[usize], degs: &[i32], one: &FieldElement, minus: &FieldElement, sink: &mut Sink) {
    insertion_terms(phis, mua, (2, n), x, degs, one, sink);
    block_terms(mub, phis, (2, n), x, degs, minus, sink);
}

/// Composite `ψ ∘ φ` up to the larger arity bound, with components beyond
/// either table taken as zero.
pub fn compose(psi: &AInfMorphism, phi: &AInfMorphism) -> Result<AInfMorphism> {
    if psi.source.module() != phi.target.module() {
        return Err(Error::Mismatch("composition of non-composable morphisms".into()));
    }
    let k_max = psi.arity_bound().max(phi.arity_bound());
    let one = phi.source.field().one();
    let phis = (1..=k_max)
        .map(|k| build(&phi.source.basis(k), psi.target.module(), k as i32 - 1, None, |x, degs, sink| block_terms(&psi.phis, &phi.phis, (1, k), x, degs, &one, sink)))
        .collect();
    Ok(AInfMorphism { source: phi.source.clone(), target: psi.target.clone(), phis })
}

/// An A∞-homotopy `σ` between `φ` and `ψ`; `σ_k` has degree `k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AInfHomotopy {
    phi: AInfMorphism,
    psi: AInfMorphism,
    sigmas: Vec<MultiMap>,
}

impl AInfHomotopy {
    pub fn new_unchecked(phi: &AInfMorphism, psi: &AInfMorphism, sigmas: Vec<MultiMap>) -> Result<AInfHomotopy> {
        if phi.source.module() != psi.source.module() || phi.target.module() != psi.target.module() {
            return Err(Error::Mismatch("homotopy between morphisms with different endpoints".into()));
        }
        for (j, s) in sigmas.iter().enumerate() {
            let k = j + 1;
            check_table_entry(s, k, &vec![phi.source.module().clone(); k], phi.target.module(), k as i32, "sigma")?;
        }
        Ok(AInfHomotopy { phi: phi.clone(), psi: psi.clone(), sigmas })
    }

    pub fn new(phi: &AInfMorphism, psi: &AInfMorphism, sigmas: Vec<MultiMap>) -> Result<AInfHomotopy> {
        let h = AInfHomotopy::new_unchecked(phi, psi, sigmas)?;
        h.verify(h.complete_bound())?;
        Ok(h)
    }

    pub fn zero(phi: &AInfMorphism, k: usize) -> AInfHomotopy {
        let sigmas = (1..=k).map(|j| MultiMap::zero(&phi.source.basis(j), phi.target.module(), j as i32)).collect();
        AInfHomotopy { phi: phi.clone(), psi: phi.clone(), sigmas }
    }

    pub fn phi(&self) -> &AInfMorphism {
        &self.phi
    }

    pub fn psi(&self) -> &AInfMorphism {
        &self.psi
    }

    pub fn sigmas(&self) -> &[MultiMap] {
        &self.sigmas
    }

    pub fn arity_bound(&self) -> usize {
        self.sigmas.len()
    }

    pub fn truncated(&self, n: usize) -> AInfHomotopy {
        AInfHomotopy { phi: self.phi.clone(), psi: self.psi.clone(), sigmas: self.sigmas[..n.min(self.sigmas.len())].to_vec() }
    }

    /// Arity beyond which every homotopy defect vanishes identically.
    pub fn complete_bound(&self) -> usize {
        let widest = self.phi.phis.len().max(self.psi.phis.len()).max(self.sigmas.len());
        let inner = self.sigmas.len() + self.phi.source.arity_bound() - 1;
        let structural = widest.max(inner).max(self.phi.target.arity_bound() * widest);
        structural.min(degree_cap(self.phi.source.module(), self.phi.target.module(), -1))
    }

    pub fn verify(&self, up_to: usize) -> Result<()> {
        for k in 1..=up_to {
            check_zero(&homotopy_defect(self, k), || format!("homotopy identity k={k}"))?;
        }
        Ok(())
    }

    pub fn verify_unital(&self, up_to: usize) -> Result<()> {
        if self.phi.source.unit.is_none() {
            return Err(Error::Precondition("homotopy source is not unital".into()));
        }
        for d in homotopy_unit_defects(self, up_to) {
            check_zero(&d.map, || format!("homotopy unit identity k={} u={}", d.k, d.u))?;
        }
        Ok(())
    }
}

/// `φ_k − ψ_k` minus both sums of the homotopy identity.
pub fn homotopy_defect(h: &AInfHomotopy, k: usize) -> MultiMap {
    let (a, b) = (&h.phi.source, &h.phi.target);
    if k > h.complete_bound() {
        return MultiMap::zero(&a.basis(k), b.module(), k as i32 - 1);
    }
    let one = a.field().one();
    let minus = -&one;
    build(&a.basis(k), b.module(), k as i32 - 1, None, |x, degs, sink| {
        if let Some(f) = h.phi.phi(k) {
            sink.add_column(f.eval(x), &one);
        }
        if let Some(g) = h.psi.phi(k) {
            sink.add_column(g.eval(x), &minus);
        }
        insertion_terms(&h.sigmas, a.mus(), (1, k), x, degs, &minus, sink);
        htpy_terms(b.mus(), &h.phi.phis, &h.sigmas, &h.psi.phis, (1, k), usize::MAX, x, degs, &minus, sink);
    })
}

/// `obs_n{σ}`.
pub fn obstruction_homotopy(h: &AInfHomotopy, n: usize) -> Result<MultiMap> {
    require_level(h.arity_bound() >= n, "homotopy", n)?;
    h.truncated(n).verify(n)?;
    Ok(obs_homotopy_raw(h, n, &h.phi.source.basis(n + 1), None))
}

pub(crate) fn obs_homotopy_raw(h: &AInfHomotopy, n: usize, basis: &Arc<TensorBasis>, window: Option<(i32, i32)>) -> MultiMap {
    let (a, b) = (&h.phi.source, &h.phi.target);
    let one = a.field().one();
    build(basis, b.module(), n as i32, window, |x, degs, sink| obs_homotopy_terms(h, a.mus(), b.mus(), n, x, degs, &one, sink))
}

#[allow(clippy::too_many_arguments)]
pub(crate) fn obs_homotopy_terms(h: &AInfHomotopy, mua: &[MultiMap], mub: &[MultiMap], n: usize, x: &[usize], degs: &[i32], one: &FieldElement, sink: &mut Sink) {
    let ss = &h.sigmas[..n.min(h.sigmas.len())];
    let fs = &h.phi.phis[..n.min(h.phi.phis.len())];
    let gs = &h.psi.phis[..n.min(h.psi.phis.len())];
    insertion_terms(ss, &mua[..n.min(mua.len())], (2, n), x, degs, one, sink);
    htpy_terms(mub, fs, ss, gs, (1, n), n, x, degs, one, sink);
}

/// One strict-unit equation, evaluated as a map.
#[derive(Clone, Debug)]
pub struct UnitDefect {
    pub k: usize,
    /// Position of the unit among the `k` inputs.
    pub u: usize,
    pub map: MultiMap,
}

fn unit_insertions(a: &AInfAlgebra, k: usize, mut value: impl FnMut(&[usize], usize, &mut Sink), target: &GradedModule, degree: i32) -> Vec<UnitDefect> {
    let split = a.unit_split().expect("unit descriptor present");
    let mut out = Vec::new();
    if k == 1 {
        let q = GradedModule::new(a.field(), [(0, 1)]);
        let basis = Arc::new(TensorBasis::new(vec![q]));
        let map = tabulate(&basis, target, degree, None, |_, sink| value(&[split.unit], 0, sink));
        out.push(UnitDefect { k, u: 0, map });
        return out;
    }
    let basis = a.basis(k - 1);
    for u in 0..k {
        let map = tabulate(&basis, target, degree, None, |y, sink| {
            let mut x = Vec::with_capacity(k);
            x.extend_from_slice(&y[..u]);
            x.push(split.unit);
            x.extend_from_slice(&y[u..]);
            value(&x, u, sink)
        });
        out.push(UnitDefect { k, u, map });
    }
    out
}

/// The strict-unit equations up to arity `up_to`: `μ₂(η⊗id) − id`,
/// `μ₂(id⊗η) − id` and `μ_k(id^{⊗u}⊗η⊗id^{⊗w})` for `k ≠ 2`.
pub fn unit_defects(a: &AInfAlgebra, up_to: usize) -> Result<Vec<UnitDefect>> {
    if a.unit.is_none() {
        return Err(Error::Precondition("no unit descriptor".into()));
    }
    let one = a.field().one();
    let minus = -&one;
    let mut out = Vec::new();
    for k in 1..=up_to {
        let Some(mu) = a.mu(k) else { break };
        out.extend(unit_insertions(
            a,
            k,
            |x, u, sink| {
                sink.add_column(mu.eval(x), &one);
                if k == 2 {
                    sink.add(x[1 - u], &minus);
                }
            },
            a.module(),
            k as i32 - 2,
        ));
    }
    Ok(out)
}

/// `φ₁η^A − η^B` and `φ_k(id^{⊗u}⊗η⊗id^{⊗w})` for `k ≥ 2`.
pub fn morphism_unit_defects(phi: &AInfMorphism, up_to: usize) -> Vec<UnitDefect> {
    let a = &phi.source;
    let b_unit = phi.target.unit_split().map(|s| s.unit);
    let one = a.field().one();
    let minus = -&one;
    let mut out = Vec::new();
    for k in 1..=up_to.min(phi.arity_bound()) {
        let f = &phi.phis[k - 1];
        out.extend(unit_insertions(
            a,
            k,
            |x, _, sink| {
                sink.add_column(f.eval(x), &one);
                if k == 1 {
                    if let Some(e) = b_unit {
                        sink.add(e, &minus);
                    }
                }
            },
            phi.target.module(),
            k as i32 - 1,
        ));
    }
    out
}

/// `σ_k(id^{⊗u}⊗η⊗id^{⊗w})` for all `k`.
pub fn homotopy_unit_defects(h: &AInfHomotopy, up_to: usize) -> Vec<UnitDefect> {
    let a = &h.phi.source;
    let one = a.field().one();
    let mut out = Vec::new();
    for k in 1..=up_to.min(h.arity_bound()) {
        let s = &h.sigmas[k - 1];
        out.extend(unit_insertions(a, k, |x, _, sink| sink.add_column(s.eval(x), &one), h.phi.target.module(), k as i32));
    }
    out
}

/// `f^{⊗k}` composed into `outer`: `outer ∘ f^{⊗k}` on `basis`.
pub fn precompose_power(outer: &MultiMap, f: &MultiMap, basis: &Arc<TensorBasis>) -> MultiMap {
    let one = outer.field().one();
    let k = basis.arity();
    build(basis, outer.target(), outer.degree() + f.degree() * k as i32, None, |x, degs, sink| {
        precompose_terms(outer, &vec![Block::Map(f); k], x, degs, &one, sink)
    })
}

/// `Σ_{u+w=k−1} outer(a^{⊗u} ⊗ s ⊗ b^{⊗w})` on `basis`.
pub fn interleave(outer: &MultiMap, a: &MultiMap, s: &MultiMap, b: &MultiMap, basis: &Arc<TensorBasis>) -> MultiMap {
    let one = outer.field().one();
    build(basis, outer.target(), outer.degree() + s.degree(), None, |x, degs, sink| interleave_terms(outer, a, s, b, x, degs, &one, sink))
}

/// The product table of a DGA given on basis pairs, as μ₂.
pub fn product_from_table(module: &GradedModule, entries: impl Fn(usize, usize) -> Vec<(usize, i64)>) -> MultiMap {
    let basis = Arc::new(TensorBasis::power(module, 2));
    let field = module.field();
    build(&basis, module, 0, None, |x, _, sink| {
        for (i, c) in entries(x[0], x[1]) {
            sink.add(i, &field.from_i64(c));
        }
    })
}

/// A linear map given by a dense column function on global indices.
pub fn linear_map(source: &GradedModule, target: &GradedModule, degree: i32, col: impl Fn(usize) -> Vec<(usize, FieldElement)>) -> GradedMap {
    let mut blocks = std::collections::BTreeMap::new();
    for (d, r) in source.degrees() {
        let t = d + degree;
        let off = target.offset(t);
        let cols: Vec<_> = (0..r)
            .map(|j| {
                let mut c: Vec<(usize, FieldElement)> = col(source.offset(d) + j).into_iter().filter(|(_, v)| !v.is_zero()).map(|(i, v)| (i - off, v)).collect();
                c.sort_by_key(|p| p.0);
                c
            })
            .collect();
        if target.rank(t) > 0 {
            blocks.insert(d, SparseMatrix::from_columns(source.field(), target.rank(t), cols));
        }
    }
    GradedMap::from_blocks_unchecked(source, target, degree, blocks)
}

/// Evaluates `terms` on every tensor produced by `blocks` from `x`, with the
/// tuple degrees read off `factor`.
fn through_blocks(blocks: &[Block<'_>], factor: &GradedModule, x: &[usize], degs: &[i32], coeff: &FieldElement, sink: &mut Sink, mut terms: impl FnMut(&[usize], &[i32], &FieldElement, &mut Sink)) {
    block_apply(blocks, degs, x, coeff.field(), |t, c| {
        let tdegs: Vec<i32> = t.iter().map(|&g| factor.degree_of(g)).collect();
        terms(t, &tdegs, &(c * coeff), sink)
    });
}

fn power_factors(a: &AInfAlgebra, k: usize) -> Vec<&ChainComplex> {
    vec![a.complex(); k]
}

/// `∂(obs_n{A})`; zero for every A_n-structure.
pub fn lemma_obs_alg_del(a: &AInfAlgebra, n: usize) -> Result<GradedMap> {
    let c = obs_algebra_raw(a.mus(), &a.basis(n + 1), a.module(), None);
    multi_hom_differential(&c, &power_factors(a, n + 1), a.complex())
}

/// `∂(obs_n{φ}) − φ₁ obs_n{A} + obs_n{B} φ₁^{⊗(n+1)}`; zero for every
/// morphism of A_n-algebras.
pub fn lemma_obs_mor_del(phi: &AInfMorphism, n: usize) -> Result<GradedMap> {
    let (a, b) = (&phi.source, &phi.target);
    let basis = a.basis(n + 1);
    let lhs = multi_hom_differential(&obs_morphism_raw(phi, n, &basis, None), &power_factors(a, n + 1), b.complex())?;
    let obs_a = obs_algebra_raw(a.mus(), &basis, a.module(), None).then(phi.linear());
    let one = a.field().one();
    let mub = &b.mus()[..n.min(b.arity_bound())];
    let blocks = vec![Block::Map(&phi.phis[0]); n + 1];
    let obs_b = build(&basis, b.module(), n as i32 - 2, None, |x, degs, sink| {
        through_blocks(&blocks, b.module(), x, degs, &one, sink, |t, tdegs, c, sink| insertion_terms(mub, mub, (2, n), t, tdegs, c, sink))
    });
    Ok(lhs.sub(obs_a.map()).add(obs_b.map()))
}

/// `obs_n{ψφ} − ψ₁ obs_n{φ} − obs_n{ψ} φ₁^{⊗(n+1)} − ∂(Σ_{p=2}^{n} Σ (−1)^{t₁(α)} ψ_p φ^{⊗α})`.
pub fn lemma_obs_comp(psi: &AInfMorphism, phi: &AInfMorphism, n: usize) -> Result<GradedMap> {
    let (a, b, c) = (&phi.source, &phi.target, &psi.target);
    let basis = a.basis(n + 1);
    let comp = compose(&psi.truncated(n), &phi.truncated(n))?;
    let one = a.field().one();
    let first = obs_morphism_raw(&comp, n, &basis, None);
    let second = obs_morphism_raw(phi, n, &basis, None).then(psi.linear());
    let (psis, mub, muc) = (&psi.phis[..n.min(psi.phis.len())], &b.mus()[..n.min(b.arity_bound())], c.mus());
    let blocks = vec![Block::Map(&phi.phis[0]); n + 1];
    let third = build(&basis, c.module(), n as i32 - 1, None, |x, degs, sink| {
        through_blocks(&blocks, b.module(), x, degs, &one, sink, |t, tdegs, co, sink| obs_morphism_terms(psis, mub, muc, n, t, tdegs, co, &-co, sink))
    });
    let phis = &phi.phis[..n.min(phi.phis.len())];
    let inner = build(&basis, c.module(), n as i32, None, |x, degs, sink| block_terms(psis, phis, (2, n), x, degs, &one, sink));
    let fourth = multi_hom_differential(&inner, &power_factors(a, n + 1), c.complex())?;
    Ok(first.map().sub(second.map()).sub(third.map()).sub(&fourth))
}

/// `obs_n{φ} − obs_n{ψ} − ∂(obs_n{σ}) − σ₁ obs_n{A} + (−1)^n obs_n{B} Σ_{u+w=n} φ₁^{⊗u} ⊗ σ₁ ⊗ ψ₁^{⊗w}`.
pub fn lemma_obs_htpy_del(h: &AInfHomotopy, n: usize) -> Result<GradedMap> {
    let (a, b) = (&h.phi.source, &h.phi.target);
    let basis = a.basis(n + 1);
    let d_phi = obs_morphism_raw(&h.phi, n, &basis, None);
    let d_psi = obs_morphism_raw(&h.psi, n, &basis, None);
    let d_sigma = multi_hom_differential(&obs_homotopy_raw(h, n, &basis, None), &power_factors(a, n + 1), b.complex())?;
    let s_obs = obs_algebra_raw(a.mus(), &basis, a.module(), None).then(h.sigmas[0].map());
    let mub = &b.mus()[..n.min(b.arity_bound())];
    let sign = a.field().sign(n as i64);
    let last = build(&basis, b.module(), n as i32 - 1, None, |x, degs, sink| {
        for u in 0..=n {
            let mut blocks = vec![Block::Map(&h.phi.phis[0]); u];
            blocks.push(Block::Map(&h.sigmas[0]));
            blocks.extend(std::iter::repeat_n(Block::Map(&h.psi.phis[0]), n - u));
            through_blocks(&blocks, b.module(), x, degs, &sign, sink, |t, tdegs, c, sink| insertion_terms(mub, mub, (2, n), t, tdegs, c, sink));
        }
    });
    Ok(d_phi.map().sub(d_psi.map()).sub(&d_sigma).sub(s_obs.map()).add(last.map()))
}
