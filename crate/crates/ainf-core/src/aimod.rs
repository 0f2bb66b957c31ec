//! A∞-modules over an A∞-algebra: module, morphism and homotopy defects,
//! composition, restriction along algebra morphisms, obstructions, module
//! transfer, lifting of module morphisms and the combined transfer.
//!
//! A module table entry of arity `k` lives on `A^{⊗(k−1)} ⊗ M`; the module
//! factor is always the last one.

use std::sync::Arc;

use crate::ainfty::{build, check_table_entry, check_zero, multi_hom_differential, precompose_terms, AInfAlgebra, AInfMorphism, UnitDefect, UnitSplit};
use crate::chaincx::{ChainComplex, GradedMap, GradedModule};
use crate::exactlin::{Field, FieldElement};
use crate::lifting::{lift_up_to_homotopy, split_window, LiftSquare};
use crate::signs::{block_apply, compositions, koszul_apply, parity, t1, tabulate, tensor_power_complex, Block, MultiMap, Sink, TensorBasis};
use crate::transfer::{
    after, certify_zero, check_bound, check_linear, degreewise_surjective, level_error, nonnegative, split_level, split_level_unital, transfer_with_bound, unit_tuples, TransferOptions, Transferred,
};
use crate::{Error, Result};

/// Basis of `A^{⊗(k−1)} ⊗ M`.
pub fn module_basis(a: &GradedModule, m: &GradedModule, k: usize) -> Arc<TensorBasis> {
    let mut f = vec![a.clone(); k - 1];
    f.push(m.clone());
    Arc::new(TensorBasis::new(f))
}

fn module_factors<'a>(a: &'a ChainComplex, m: &'a ChainComplex, k: usize) -> Vec<&'a ChainComplex> {
    let mut f = vec![a; k - 1];
    f.push(m);
    f
}

/// `Σ_{u+v+w=k, v∈vs} (−1)^{u+vw} outer_{u+1+w}(id^{⊗u} ⊗ inner_v ⊗ id^{⊗w})(x)`,
/// where `inner_v` is `ma[v−1]` when `w ≥ 1` and `mm[v−1]` when it ends on
/// the module factor.
#[allow(clippy::too_many_arguments)]
fn insertion_terms(outer: &[MultiMap], ma: &[MultiMap], mm: &[MultiMap], vs: (usize, usize), x: &[usize], degs: &[i32], coeff: &FieldElement, sink: &mut Sink) {
    let k = x.len();
    for v in vs.0.max(1)..=vs.1.min(k) {
        let Some(o) = outer.get(k - v) else { continue };
        for u in 0..=k - v {
            let w = k - v - u;
            let inner = if w == 0 { mm.get(v - 1) } else { ma.get(v - 1) };
            let Some(iv) = inner else { continue };
            let c = if parity((u + v * w) as i64) { -coeff } else { coeff.clone() };
            koszul_apply(iv, u, degs, x, |t, s| sink.add_column(o.eval(t), &(s * &c)));
        }
    }
}

/// `Σ_{u+v=k, v∈vs} outer_{u+1}(id^{⊗u} ⊗ inner_v)(x)`, with the extra sign
/// `(−1)^u` when `alternating`.
#[allow(clippy::too_many_arguments)]
fn action_terms(outer: &[MultiMap], inner: &[MultiMap], vs: (usize, usize), alternating: bool, x: &[usize], degs: &[i32], coeff: &FieldElement, sink: &mut Sink) {
    let k = x.len();
    for v in vs.0.max(1)..=vs.1.min(k) {
        let u = k - v;
        let (Some(iv), Some(o)) = (inner.get(v - 1), outer.get(u)) else { continue };
        let c = if alternating && parity(u as i64) { -coeff } else { coeff.clone() };
        koszul_apply(iv, u, degs, x, |t, s| sink.add_column(o.eval(t), &(s * &c)));
    }
}

/// `Σ_{p∈ps} Σ_{α∈ℕ^{p−1}, |α|=k−1} (−1)^{t₁(α,1)} outer_p(φ^{⊗α} ⊗ id)(x)`.
#[allow(clippy::too_many_arguments)]
fn restriction_terms(outer: &[MultiMap], phis: &[MultiMap], ps: (usize, usize), x: &[usize], degs: &[i32], coeff: &FieldElement, sink: &mut Sink) {
    let k = x.len();
    let field = coeff.field();
    for p in ps.0.max(1)..=ps.1.min(k) {
        let Some(o) = outer.get(p - 1) else { continue };
        for alpha in compositions(k - 1, p - 1) {
            if alpha.iter().any(|&a| a > phis.len()) {
                continue;
            }
            let mut full = alpha.clone();
            full.push(1);
            let c = if t1(&full) { -coeff } else { coeff.clone() };
            let mut blocks: Vec<Block> = alpha.iter().map(|&a| Block::Map(&phis[a - 1])).collect();
            blocks.push(Block::Id);
            block_apply(&blocks, degs, x, field, |t, s| sink.add_column(o.eval(t), &(s * &c)));
        }
    }
}

/// Runs `terms` on each tensor produced by `blocks` from `x`, reading degrees
/// from `tbasis`.
fn through(blocks: &[Block<'_>], tbasis: &TensorBasis, x: &[usize], degs: &[i32], coeff: &FieldElement, sink: &mut Sink, mut terms: impl FnMut(&[usize], &[i32], &FieldElement, &mut Sink)) {
    block_apply(blocks, degs, x, coeff.field(), |t, c| {
        let tdegs = tbasis.degrees(t);
        terms(t, &tdegs, &(c * coeff), sink)
    });
}

fn same_base(a: &Arc<AInfAlgebra>, b: &Arc<AInfAlgebra>) -> bool {
    Arc::ptr_eq(a, b) || a == b
}

/// Largest arity `k` at which a map `A^{⊗(k−1)} ⊗ S → T` of degree `k + c`
/// can be nonzero, for a nonnegatively graded `A`.
fn module_degree_cap(a: &GradedModule, s: &GradedModule, t: &GradedModule, c: i32) -> usize {
    match (a.bottom(), s.bottom(), t.top()) {
        (_, None, _) | (_, _, None) => 0,
        (None, Some(bs), Some(tt)) => usize::from(bs + 1 + c <= tt),
        (Some(ba), Some(bs), Some(tt)) if ba >= 0 => {
            let r = tt - bs - c - 1;
            if r < 0 { 0 } else { 1 + (r / (ba + 1)) as usize }
        }
        _ => usize::MAX,
    }
}

/// An A∞-module (or A_K-module) over `base`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AInfModule {
    base: Arc<AInfAlgebra>,
    complex: ChainComplex,
    mus: Vec<MultiMap>,
    unital: bool,
}

impl AInfModule {
    /// `higher[j]` is `μ^M_{j+2}`. Only shapes are checked.
    pub fn new_unchecked(base: &Arc<AInfAlgebra>, complex: ChainComplex, higher: Vec<MultiMap>, unital: bool) -> Result<AInfModule> {
        if base.field() != complex.field() {
            return Err(Error::Lin(crate::exactlin::LinError::FieldMismatch));
        }
        if unital && base.unit().is_none() {
            return Err(Error::Precondition("a strictly unital module needs a unital algebra".into()));
        }
        let (a, m) = (base.module().clone(), complex.module().clone());
        let mut mus = vec![MultiMap::unary(complex.differential())];
        for (j, mu) in higher.into_iter().enumerate() {
            let k = j + 2;
            check_table_entry(&mu, k, module_basis(&a, &m, k).factors(), &m, k as i32 - 2, "mu^M")?;
            mus.push(mu);
        }
        Ok(AInfModule { base: base.clone(), complex, mus, unital })
    }

    pub fn new(base: &Arc<AInfAlgebra>, complex: ChainComplex, higher: Vec<MultiMap>, unital: bool) -> Result<AInfModule> {
        let m = AInfModule::new_unchecked(base, complex, higher, unital)?;
        m.verify(m.complete_bound())?;
        Ok(m)
    }

    /// `A` as a module over itself, `μ^A_k` read as `A^{⊗(k−1)} ⊗ A → A`.
    pub fn free(a: &Arc<AInfAlgebra>) -> AInfModule {
        AInfModule { base: a.clone(), complex: a.complex().clone(), mus: a.mus().to_vec(), unital: a.unit().is_some() }
    }

    /// The complex with zero action beyond the differential.
    pub fn trivial(base: &Arc<AInfAlgebra>, complex: ChainComplex) -> AInfModule {
        AInfModule { base: base.clone(), mus: vec![MultiMap::unary(complex.differential())], complex, unital: false }
    }

    pub fn base(&self) -> &Arc<AInfAlgebra> {
        &self.base
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

    pub fn mus(&self) -> &[MultiMap] {
        &self.mus
    }

    pub fn mu(&self, k: usize) -> Option<&MultiMap> {
        self.mus.get(k - 1)
    }

    pub fn arity_bound(&self) -> usize {
        self.mus.len()
    }

    pub fn is_unital(&self) -> bool {
        self.unital
    }

    pub fn with_unital(&self, unital: bool) -> Result<AInfModule> {
        AInfModule::new_unchecked(&self.base, self.complex.clone(), self.mus[1..].to_vec(), unital)
    }

    /// Basis of `A^{⊗(k−1)} ⊗ M`, shared with `μ^M_k` when populated.
    pub fn basis(&self, k: usize) -> Arc<TensorBasis> {
        match self.mus.get(k - 1) {
            Some(m) => m.basis().clone(),
            None => module_basis(self.base.module(), self.module(), k),
        }
    }

    pub fn truncated(&self, n: usize) -> AInfModule {
        AInfModule { base: self.base.clone(), complex: self.complex.clone(), mus: self.mus[..n.min(self.mus.len())].to_vec(), unital: self.unital }
    }

    /// Arity beyond which every module defect vanishes identically.
    pub fn complete_bound(&self) -> usize {
        let structural = self.mus.len() + self.mus.len().max(self.base.arity_bound()) - 1;
        structural.min(module_degree_cap(self.base.module(), self.module(), self.module(), -3))
    }

    pub fn verify(&self, up_to: usize) -> Result<()> {
        for k in 1..=up_to {
            check_zero(&module_defect(self, k), || format!("module identity k={k}"))?;
        }
        if self.unital {
            for d in module_unit_defects(self, up_to) {
                check_zero(&d.map, || format!("module unit identity k={} u={}", d.k, d.u))?;
            }
        }
        Ok(())
    }
}

pub fn module_defect(m: &AInfModule, k: usize) -> MultiMap {
    let basis = m.basis(k);
    if k > m.complete_bound() {
        return MultiMap::zero(&basis, m.module(), k as i32 - 3);
    }
    let one = m.field().one();
    build(&basis, m.module(), k as i32 - 3, None, |x, degs, sink| insertion_terms(&m.mus, m.base.mus(), &m.mus, (1, k), x, degs, &one, sink))
}

/// `obs_n{M}`: the arity-`(n+1)` module identity with `2 ≤ v ≤ n`.
pub fn module_obstruction(m: &AInfModule, n: usize) -> Result<MultiMap> {
    require_level(m.arity_bound() >= n, "module", n)?;
    m.truncated(n).verify(n)?;
    Ok(obs_module_raw(m, n, &m.basis(n + 1), None))
}

fn require_level(ok: bool, what: &str, n: usize) -> Result<()> {
    if ok { Ok(()) } else { Err(Error::Precondition(format!("{what} is not populated to level {n}"))) }
}

fn obs_module_raw(m: &AInfModule, n: usize, basis: &Arc<TensorBasis>, window: Option<(i32, i32)>) -> MultiMap {
    let one = m.field().one();
    let mm = &m.mus[..n.min(m.mus.len())];
    build(basis, m.module(), n as i32 - 2, window, |x, degs, sink| insertion_terms(mm, m.base.mus(), mm, (2, n), x, degs, &one, sink))
}

/// An A∞-module morphism `ρ: M → N`; `ρ_k` has degree `k−1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AInfModuleMorphism {
    source: Arc<AInfModule>,
    target: Arc<AInfModule>,
    rhos: Vec<MultiMap>,
}

impl AInfModuleMorphism {
    /// `rhos[j]` is `ρ_{j+1}`. Only shapes are checked.
    pub fn new_unchecked(source: &Arc<AInfModule>, target: &Arc<AInfModule>, rhos: Vec<MultiMap>) -> Result<AInfModuleMorphism> {
        if !same_base(&source.base, &target.base) {
            return Err(Error::Mismatch("module morphism between modules over different algebras".into()));
        }
        if rhos.is_empty() {
            return Err(Error::Mismatch("a module morphism needs its linear part".into()));
        }
        for (j, r) in rhos.iter().enumerate() {
            let k = j + 1;
            check_table_entry(r, k, source.basis(k).factors(), target.module(), k as i32 - 1, "rho")?;
        }
        Ok(AInfModuleMorphism { source: source.clone(), target: target.clone(), rhos })
    }

    pub fn new(source: &Arc<AInfModule>, target: &Arc<AInfModule>, rhos: Vec<MultiMap>) -> Result<AInfModuleMorphism> {
        let r = AInfModuleMorphism::new_unchecked(source, target, rhos)?;
        r.verify(r.complete_bound())?;
        Ok(r)
    }

    pub fn strict(source: &Arc<AInfModule>, target: &Arc<AInfModule>, rho1: &GradedMap) -> Result<AInfModuleMorphism> {
        AInfModuleMorphism::new_unchecked(source, target, vec![MultiMap::unary(rho1)])
    }

    pub fn identity(m: &Arc<AInfModule>) -> AInfModuleMorphism {
        AInfModuleMorphism { source: m.clone(), target: m.clone(), rhos: vec![MultiMap::unary(&GradedMap::identity(m.module()))] }
    }

    pub fn source(&self) -> &Arc<AInfModule> {
        &self.source
    }

    pub fn target(&self) -> &Arc<AInfModule> {
        &self.target
    }

    pub fn rhos(&self) -> &[MultiMap] {
        &self.rhos
    }

    pub fn rho(&self, k: usize) -> Option<&MultiMap> {
        self.rhos.get(k - 1)
    }

    pub fn linear(&self) -> &GradedMap {
        self.rhos[0].map()
    }

    pub fn arity_bound(&self) -> usize {
        self.rhos.len()
    }

    pub fn is_strict(&self) -> bool {
        self.rhos[1..].iter().all(|f| f.is_zero())
    }

    pub fn truncated(&self, n: usize) -> AInfModuleMorphism {
        AInfModuleMorphism { source: self.source.clone(), target: self.target.clone(), rhos: self.rhos[..n.min(self.rhos.len())].to_vec() }
    }

    pub fn complete_bound(&self) -> usize {
        let widest = self.source.arity_bound().max(self.target.arity_bound()).max(self.source.base.arity_bound());
        (self.rhos.len() + widest - 1).min(module_degree_cap(self.source.base.module(), self.source.module(), self.target.module(), -2))
    }

    pub fn verify(&self, up_to: usize) -> Result<()> {
        for k in 1..=up_to {
            check_zero(&module_morphism_defect(self, k), || format!("module morphism identity k={k}"))?;
        }
        Ok(())
    }

    /// `ρ_k(id^{⊗u} ⊗ η ⊗ id^{⊗(w+1)}) = 0` for `k ≥ 2`.
    pub fn verify_unital(&self, up_to: usize) -> Result<()> {
        if self.source.base.unit().is_none() {
            return Err(Error::Precondition("the base algebra is not unital".into()));
        }
        for d in insertion_defects(&self.source, &self.rhos, up_to, |_| None) {
            check_zero(&d.map, || format!("module morphism unit identity k={} u={}", d.k, d.u))?;
        }
        Ok(())
    }
}

pub fn module_morphism_defect(rho: &AInfModuleMorphism, k: usize) -> MultiMap {
    let (m, n) = (&rho.source, &rho.target);
    let basis = m.basis(k);
    if k > rho.complete_bound() {
        return MultiMap::zero(&basis, n.module(), k as i32 - 2);
    }
    let one = m.field().one();
    let minus = -&one;
    build(&basis, n.module(), k as i32 - 2, None, |x, degs, sink| {
        insertion_terms(&rho.rhos, m.base.mus(), &m.mus, (1, k), x, degs, &one, sink);
        action_terms(&n.mus, &rho.rhos, (1, k), false, x, degs, &minus, sink);
    })
}

/// `obs_n{ρ}`.
pub fn module_morphism_obstruction(rho: &AInfModuleMorphism, n: usize) -> Result<MultiMap> {
    require_level(rho.arity_bound() >= n, "module morphism", n)?;
    rho.truncated(n).verify(n)?;
    Ok(obs_module_morphism_raw(rho, n, &rho.source.basis(n + 1), None))
}

fn obs_module_morphism_raw(rho: &AInfModuleMorphism, n: usize, basis: &Arc<TensorBasis>, window: Option<(i32, i32)>) -> MultiMap {
    let (m, t) = (&rho.source, &rho.target);
    let one = m.field().one();
    let minus = -&one;
    build(basis, t.module(), n as i32 - 1, window, |x, degs, sink| obs_module_morphism_terms(&rho.rhos, m, t, n, x, degs, &one, &minus, sink))
}

#[allow(clippy::too_many_arguments)]
fn obs_module_morphism_terms(rhos: &[MultiMap], m: &AInfModule, t: &AInfModule, n: usize, x: &[usize], degs: &[i32], one: &FieldElement, minus: &FieldElement, sink: &mut Sink) {
    let mm = &m.mus[..n.min(m.mus.len())];
    insertion_terms(rhos, m.base.mus(), mm, (2, n), x, degs, one, sink);
    action_terms(t.mus(), rhos, (2, n), false, x, degs, minus, sink);
}

/// `(ρ∘π)_k = Σ_{u+v=k} ρ_{u+1}(id^{⊗u} ⊗ π_v)`, up to the larger arity bound.
pub fn compose_module(rho: &AInfModuleMorphism, pi: &AInfModuleMorphism) -> Result<AInfModuleMorphism> {
    if rho.source.module() != pi.target.module() || !same_base(&rho.source.base, &pi.target.base) {
        return Err(Error::Mismatch("composition of non-composable module morphisms".into()));
    }
    let k_max = rho.arity_bound().max(pi.arity_bound());
    let one = pi.source.field().one();
    let rhos = (1..=k_max)
        .map(|k| build(&pi.source.basis(k), rho.target.module(), k as i32 - 1, None, |x, degs, sink| action_terms(&rho.rhos, &pi.rhos, (1, k), false, x, degs, &one, sink)))
        .collect();
    Ok(AInfModuleMorphism { source: pi.source.clone(), target: rho.target.clone(), rhos })
}

/// An A∞-homotopy `τ` between module morphisms `ρ` and `π`; `τ_k` has degree `k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AInfModuleHomotopy {
    rho: AInfModuleMorphism,
    pi: AInfModuleMorphism,
    taus: Vec<MultiMap>,
}

impl AInfModuleHomotopy {
    pub fn new_unchecked(rho: &AInfModuleMorphism, pi: &AInfModuleMorphism, taus: Vec<MultiMap>) -> Result<AInfModuleHomotopy> {
        if rho.source.module() != pi.source.module() || rho.target.module() != pi.target.module() {
            return Err(Error::Mismatch("homotopy between module morphisms with different endpoints".into()));
        }
        for (j, t) in taus.iter().enumerate() {
            let k = j + 1;
            check_table_entry(t, k, rho.source.basis(k).factors(), rho.target.module(), k as i32, "tau")?;
        }
        Ok(AInfModuleHomotopy { rho: rho.clone(), pi: pi.clone(), taus })
    }

    pub fn new(rho: &AInfModuleMorphism, pi: &AInfModuleMorphism, taus: Vec<MultiMap>) -> Result<AInfModuleHomotopy> {
        let h = AInfModuleHomotopy::new_unchecked(rho, pi, taus)?;
        h.verify(h.complete_bound())?;
        Ok(h)
    }

    pub fn zero(rho: &AInfModuleMorphism, k: usize) -> AInfModuleHomotopy {
        let taus = (1..=k).map(|j| MultiMap::zero(&rho.source.basis(j), rho.target.module(), j as i32)).collect();
        AInfModuleHomotopy { rho: rho.clone(), pi: rho.clone(), taus }
    }

    pub fn rho(&self) -> &AInfModuleMorphism {
        &self.rho
    }

    pub fn pi(&self) -> &AInfModuleMorphism {
        &self.pi
    }

    pub fn taus(&self) -> &[MultiMap] {
        &self.taus
    }

    pub fn arity_bound(&self) -> usize {
        self.taus.len()
    }

    pub fn truncated(&self, n: usize) -> AInfModuleHomotopy {
        AInfModuleHomotopy { rho: self.rho.clone(), pi: self.pi.clone(), taus: self.taus[..n.min(self.taus.len())].to_vec() }
    }

    pub fn complete_bound(&self) -> usize {
        let (m, t) = (&self.rho.source, &self.rho.target);
        let widest = m.arity_bound().max(t.arity_bound()).max(m.base.arity_bound());
        let structural = self.rho.arity_bound().max(self.pi.arity_bound()).max(self.taus.len() + widest - 1);
        structural.min(module_degree_cap(m.base.module(), m.module(), t.module(), -1))
    }

    pub fn verify(&self, up_to: usize) -> Result<()> {
        for k in 1..=up_to {
            check_zero(&module_homotopy_defect(self, k), || format!("module homotopy identity k={k}"))?;
        }
        Ok(())
    }

    /// `τ_k(id^{⊗u} ⊗ η ⊗ id^{⊗(w+1)}) = 0` for `k ≥ 2`.
    pub fn verify_unital(&self, up_to: usize) -> Result<()> {
        if self.rho.source.base.unit().is_none() {
            return Err(Error::Precondition("the base algebra is not unital".into()));
        }
        for d in insertion_defects(&self.rho.source, &self.taus, up_to, |_| None) {
            check_zero(&d.map, || format!("module homotopy unit identity k={} u={}", d.k, d.u))?;
        }
        Ok(())
    }
}

/// `ρ_k − π_k` minus both sums of the module homotopy identity.
pub fn module_homotopy_defect(h: &AInfModuleHomotopy, k: usize) -> MultiMap {
    let (m, t) = (&h.rho.source, &h.rho.target);
    let basis = m.basis(k);
    if k > h.complete_bound() {
        return MultiMap::zero(&basis, t.module(), k as i32 - 1);
    }
    let one = m.field().one();
    let minus = -&one;
    build(&basis, t.module(), k as i32 - 1, None, |x, degs, sink| {
        if let Some(f) = h.rho.rho(k) {
            sink.add_column(f.eval(x), &one);
        }
        if let Some(g) = h.pi.rho(k) {
            sink.add_column(g.eval(x), &minus);
        }
        insertion_terms(&h.taus, m.base.mus(), &m.mus, (1, k), x, degs, &minus, sink);
        action_terms(&t.mus, &h.taus, (1, k), true, x, degs, &minus, sink);
    })
}

/// `obs_n{τ}`.
pub fn module_homotopy_obstruction(h: &AInfModuleHomotopy, n: usize) -> Result<MultiMap> {
    require_level(h.arity_bound() >= n, "module homotopy", n)?;
    h.truncated(n).verify(n)?;
    Ok(obs_module_homotopy_raw(h, n, &h.rho.source.basis(n + 1), None))
}

fn obs_module_homotopy_raw(h: &AInfModuleHomotopy, n: usize, basis: &Arc<TensorBasis>, window: Option<(i32, i32)>) -> MultiMap {
    let (m, t) = (&h.rho.source, &h.rho.target);
    let one = m.field().one();
    let taus = &h.taus[..n.min(h.taus.len())];
    let mm = &m.mus[..n.min(m.mus.len())];
    build(basis, t.module(), n as i32, window, |x, degs, sink| {
        insertion_terms(taus, m.base.mus(), mm, (2, n), x, degs, &one, sink);
        action_terms(&t.mus, taus, (2, n), true, x, degs, &one, sink);
    })
}

/// Evaluations of `maps[k−1]` with the unit inserted at each algebra
/// position, for `2 ≤ k ≤ up_to`; `correction(k)` is subtracted as the map
/// `m ↦ m` on the remaining module factor when it returns `Some(k)`.
fn insertion_defects(m: &AInfModule, maps: &[MultiMap], up_to: usize, correction: impl Fn(usize) -> Option<()>) -> Vec<UnitDefect> {
    let a = m.base();
    let unit = a.unit_split().expect("unital base").unit;
    let one = m.field().one();
    let minus = -&one;
    let mut out = Vec::new();
    for k in 2..=up_to.min(maps.len()) {
        let f = &maps[k - 1];
        let basis = m.basis(k - 1);
        for u in 0..k - 1 {
            let map = tabulate(&basis, f.target(), f.degree(), None, |y, sink| {
                let mut x = Vec::with_capacity(k);
                x.extend_from_slice(&y[..u]);
                x.push(unit);
                x.extend_from_slice(&y[u..]);
                sink.add_column(f.eval(&x), &one);
                if correction(k).is_some() {
                    sink.add(y[0], &minus);
                }
            });
            out.push(UnitDefect { k, u, map });
        }
    }
    out
}

/// `μ^M₂(η ⊗ id) − id` and `μ^M_k(id^{⊗u} ⊗ η ⊗ id^{⊗(w+1)})` for `k ≥ 3`.
pub fn module_unit_defects(m: &AInfModule, up_to: usize) -> Vec<UnitDefect> {
    if m.base.unit().is_none() {
        return Vec::new();
    }
    insertion_defects(m, &m.mus, up_to, |k| (k == 2).then_some(()))
}

/// The restricted module `φ_*M` over `φ.source()`, populated to arity `k`.
/// The restriction lemma is asserted at every level below `k` and the
/// result is re-verified to `k`.
pub fn restrict_module(phi: &AInfMorphism, m: &AInfModule, k: usize) -> Result<AInfModule> {
    if phi.target().module() != m.base.module() {
        return Err(Error::Mismatch("the morphism does not land in the module's algebra".into()));
    }
    let a = phi.source();
    let one = m.field().one();
    let higher = (2..=k)
        .map(|j| build(&module_basis(a.module(), m.module(), j), m.module(), j as i32 - 2, None, |x, degs, sink| restriction_terms(&m.mus, phi.phis(), (2, j), x, degs, &one, sink)))
        .collect();
    let unital = m.unital && a.unit().is_some();
    let r = AInfModule::new_unchecked(a, m.complex.clone(), higher, unital)?;
    for n in 1..k {
        certify_zero(&lemma_obs_mod_rest(phi, m, &r, n)?, "the restriction obstruction lemma", n)?;
    }
    r.verify(k)?;
    Ok(r)
}

/// `∂(obs_n{M})`; zero for every A_n-module.
pub fn lemma_obs_mod_del(m: &AInfModule, n: usize) -> Result<GradedMap> {
    let c = obs_module_raw(m, n, &m.basis(n + 1), None);
    multi_hom_differential(&c, &module_factors(m.base.complex(), m.complex(), n + 1), m.complex())
}

/// `obs_n{N}` evaluated after `id^{⊗n} ⊗ f` on `basis`.
fn obs_after_linear(t: &AInfModule, f: &MultiMap, basis: &Arc<TensorBasis>, n: usize, coeff: &FieldElement) -> MultiMap {
    let tbasis = t.basis(n + 1);
    let mut blocks = vec![Block::Id; n];
    blocks.push(Block::Map(f));
    let mm = &t.mus[..n.min(t.mus.len())];
    build(basis, t.module(), n as i32 - 2 + f.degree(), None, |x, degs, sink| {
        through(&blocks, &tbasis, x, degs, coeff, sink, |y, ydegs, c, sink| insertion_terms(mm, t.base.mus(), mm, (2, n), y, ydegs, c, sink))
    })
}

/// `∂(obs_n{ρ}) − ρ₁ obs_n{M} + obs_n{N}(id^{⊗n} ⊗ ρ₁)`.
pub fn lemma_obs_mod_mor(rho: &AInfModuleMorphism, n: usize) -> Result<GradedMap> {
    let (m, t) = (&rho.source, &rho.target);
    let basis = m.basis(n + 1);
    let lhs = multi_hom_differential(&obs_module_morphism_raw(rho, n, &basis, None), &module_factors(m.base.complex(), m.complex(), n + 1), t.complex())?;
    let obs_m = obs_module_raw(m, n, &basis, None).then(rho.linear());
    let obs_n = obs_after_linear(t, &rho.rhos[0], &basis, n, &m.field().one());
    Ok(lhs.sub(obs_m.map()).add(obs_n.map()))
}

/// `obs_n{ρπ} − ρ₁ obs_n{π} − obs_n{ρ}(id^{⊗n} ⊗ π₁) − ∂(Σ_{u=1}^{n−1} ρ_{u+1}(id^{⊗u} ⊗ π_{n+1−u}))`.
pub fn lemma_obs_mod_comp(rho: &AInfModuleMorphism, pi: &AInfModuleMorphism, n: usize) -> Result<GradedMap> {
    let (l, mid, t) = (&pi.source, &pi.target, &rho.target);
    let basis = l.basis(n + 1);
    let comp = compose_module(&rho.truncated(n), &pi.truncated(n))?;
    let one = l.field().one();
    let first = obs_module_morphism_raw(&comp, n, &basis, None);
    let second = obs_module_morphism_raw(pi, n, &basis, None).then(rho.linear());
    let mbasis = mid.basis(n + 1);
    let mut blocks = vec![Block::Id; n];
    blocks.push(Block::Map(&pi.rhos[0]));
    let rhos = &rho.rhos[..n.min(rho.rhos.len())];
    let third = build(&basis, t.module(), n as i32 - 1, None, |x, degs, sink| {
        through(&blocks, &mbasis, x, degs, &one, sink, |y, ydegs, c, sink| obs_module_morphism_terms(rhos, mid, t, n, y, ydegs, c, &-c, sink))
    });
    let pis = &pi.rhos[..n.min(pi.rhos.len())];
    let inner = build(&basis, t.module(), n as i32, None, |x, degs, sink| action_terms(rhos, pis, (2, n), false, x, degs, &one, sink));
    let fourth = multi_hom_differential(&inner, &module_factors(l.base.complex(), l.complex(), n + 1), t.complex())?;
    Ok(first.map().sub(second.map()).sub(third.map()).sub(&fourth))
}

/// `obs_n{M}(φ₁^{⊗n} ⊗ id) − obs_n{φ_*M} − ∂(Σ_{p=2}^{n} Σ_{|α|=n} (−1)^{t₁(α,1)} μ^M_p(φ^{⊗α} ⊗ id))`.
pub fn lemma_obs_mod_rest(phi: &AInfMorphism, m: &AInfModule, restricted: &AInfModule, n: usize) -> Result<GradedMap> {
    let a = phi.source();
    let basis = restricted.basis(n + 1);
    let one = m.field().one();
    let mut blocks = vec![Block::Map(&phi.phis()[0]); n];
    blocks.push(Block::Id);
    let mbasis = m.basis(n + 1);
    let mm = &m.mus[..n.min(m.mus.len())];
    let first = build(&basis, m.module(), n as i32 - 2, None, |x, degs, sink| {
        through(&blocks, &mbasis, x, degs, &one, sink, |y, ydegs, c, sink| insertion_terms(mm, m.base.mus(), mm, (2, n), y, ydegs, c, sink))
    });
    let second = obs_module_raw(restricted, n, &basis, None);
    let inner = build(&basis, m.module(), n as i32 - 1, None, |x, degs, sink| restriction_terms(mm, phi.phis(), (2, n), x, degs, &one, sink));
    let third = multi_hom_differential(&inner, &module_factors(a.complex(), m.complex(), n + 1), m.complex())?;
    Ok(first.map().sub(second.map()).sub(&third))
}

/// `obs_n{ρ} − obs_n{π} − ∂(obs_n{τ}) − τ₁ obs_n{M} + (−1)^n obs_n{N}(id^{⊗n} ⊗ τ₁)`.
pub fn lemma_obs_mod_hpty(h: &AInfModuleHomotopy, n: usize) -> Result<GradedMap> {
    let (m, t) = (&h.rho.source, &h.rho.target);
    let basis = m.basis(n + 1);
    let d_rho = obs_module_morphism_raw(&h.rho, n, &basis, None);
    let d_pi = obs_module_morphism_raw(&h.pi, n, &basis, None);
    let d_tau = multi_hom_differential(&obs_module_homotopy_raw(h, n, &basis, None), &module_factors(m.base.complex(), m.complex(), n + 1), t.complex())?;
    let t_obs = obs_module_raw(m, n, &basis, None).then(h.taus[0].map());
    let last = obs_after_linear(t, &h.taus[0], &basis, n, &m.field().sign(n as i64));
    Ok(d_rho.map().sub(d_pi.map()).sub(&d_tau).sub(t_obs.map()).add(last.map()))
}

/// `outer ∘ (id^{⊗(k−1)} ⊗ f)` on `basis`, windowed.
fn after_linear(outer: Option<&MultiMap>, f: &MultiMap, basis: &Arc<TensorBasis>, target: &GradedModule, degree: i32, window: Option<(i32, i32)>) -> MultiMap {
    let k = basis.arity();
    let one = target.field().one();
    let mut blocks = vec![Block::Id; k - 1];
    blocks.push(Block::Map(f));
    build(basis, target, degree, window, |x, degs, sink| {
        if let Some(o) = outer {
            precompose_terms(o, &blocks, x, degs, &one, sink);
        }
    })
}

/// A transferred module structure and the quasi-isomorphism `ε: G → M`.
#[derive(Clone, Debug)]
pub struct ModuleTransferred {
    pub module: Arc<AInfModule>,
    pub morphism: AInfModuleMorphism,
}

/// A lift `ρ` with `ερ ≃ π`, witnessed by `tau` between `compose(ε, ρ)` and `π`.
#[derive(Clone, Debug)]
pub struct ModuleLifted {
    pub rho: AInfModuleMorphism,
    pub tau: AInfModuleHomotopy,
}

/// Default arity bound for module maps on `A^{⊗(k−1)} ⊗ G` into the given
/// targets with degrees `k + c`.
fn module_bound(opts: &TransferOptions, a: &GradedModule, g: &GradedModule, targets: &[(&GradedModule, i32)], floor: usize) -> Result<(usize, bool)> {
    match opts.max_arity {
        Some(k) if k < floor => Err(Error::Precondition(format!("arity bound {k} is below {floor}"))),
        Some(k) => Ok((k, false)),
        None if nonnegative(a) => Ok((targets.iter().map(|(t, c)| module_degree_cap(a, g, t, *c)).max().unwrap_or(0).max(floor), true)),
        None => Ok((crate::ainfty::degree_bound(g) + 1, false)),
    }
}

fn transfer_module_levels(m: &Arc<AInfModule>, g: &ChainComplex, mut mus: Vec<MultiMap>, mut eps: Vec<MultiMap>, start: usize, k: usize, split: Option<&UnitSplit>, opts: &TransferOptions) -> Result<(Vec<MultiMap>, Vec<MultiMap>)> {
    let a = m.base();
    for n in start..k {
        let gm = Arc::new(AInfModule::new_unchecked(a, g.clone(), mus[1..].to_vec(), false)?);
        let mor = AInfModuleMorphism::new_unchecked(&gm, m, eps.clone())?;
        if opts.certify {
            certify_zero(&lemma_obs_mod_del(&gm, n)?, "∂(obs{M}) = 0", n)?;
            certify_zero(&lemma_obs_mod_mor(&mor, n)?, "the module morphism obstruction lemma", n)?;
        }
        let basis = gm.basis(n + 1);
        let window = split_window(g.module(), m.module(), n as i32 - 2);
        let c = obs_module_raw(&gm, n, &basis, window);
        let d = obs_module_morphism_raw(&mor, n, &basis, window).sub(&after_linear(m.mu(n + 1), &eps[0], &basis, m.module(), n as i32 - 1, window));
        let (h, s2) = match split {
            None => split_level(mor.linear(), g, m.complex(), &basis, &module_factors(a.complex(), g, n + 1), &c, &d, opts, n)?,
            Some(sp) => split_level_unital(mor.linear(), g, m.complex(), sp, &basis, Some(g), &c, &d, opts, n)?,
        };
        mus.push(h.neg());
        eps.push(s2);
    }
    Ok((mus.split_off(1), eps))
}

fn finish_module(m: &Arc<AInfModule>, g: &ChainComplex, higher: Vec<MultiMap>, eps: Vec<MultiMap>, unital: bool, k: usize, forced: bool) -> Result<ModuleTransferred> {
    let gm = Arc::new(AInfModule::new_unchecked(m.base(), g.clone(), higher, unital)?);
    gm.verify(check_bound(forced, k, gm.complete_bound()))?;
    let morphism = AInfModuleMorphism::new_unchecked(&gm, m, eps)?;
    morphism.verify(check_bound(forced, k, morphism.complete_bound()))?;
    if unital {
        morphism.verify_unital(k)?;
    }
    Ok(ModuleTransferred { module: gm, morphism })
}

fn transfer_module_bound(m: &AInfModule, g: &ChainComplex, opts: &TransferOptions) -> Result<(usize, bool)> {
    module_bound(opts, m.base.module(), g.module(), &[(g.module(), -2), (m.module(), -1)], 1)
}

/// An A∞-module structure on `g` over `m.base()` and an A∞-quasi-isomorphism
/// `ε: G → M` with linear part `eps1`.
pub fn transfer_module(m: &Arc<AInfModule>, g: &ChainComplex, eps1: &GradedMap, opts: &TransferOptions) -> Result<ModuleTransferred> {
    let (k, forced) = transfer_module_bound(m, g, opts)?;
    transfer_module_with_bound(m, g, eps1, opts, k, forced)
}

fn transfer_module_with_bound(m: &Arc<AInfModule>, g: &ChainComplex, eps1: &GradedMap, opts: &TransferOptions, k: usize, forced: bool) -> Result<ModuleTransferred> {
    check_linear(eps1, g, m.complex())?;
    if opts.surjective_strict && !degreewise_surjective(eps1) {
        return Err(Error::Precondition("surjective-strict mode needs a degreewise surjective linear part".into()));
    }
    let mus = vec![MultiMap::unary(g.differential())];
    let (higher, eps) = transfer_module_levels(m, g, mus, vec![MultiMap::unary(eps1)], 1, k, None, opts)?;
    finish_module(m, g, higher, eps, false, k, forced)
}

/// [`transfer_module`] for a strictly unital `m` over a split unital
/// algebra; the result is strictly unital and `ε` is unital.
pub fn transfer_module_unital(m: &Arc<AInfModule>, g: &ChainComplex, eps1: &GradedMap, opts: &TransferOptions) -> Result<ModuleTransferred> {
    let (k, forced) = transfer_module_bound(m, g, opts)?;
    transfer_module_unital_with_bound(m, g, eps1, opts, k, forced)
}

fn transfer_module_unital_with_bound(m: &Arc<AInfModule>, g: &ChainComplex, eps1: &GradedMap, opts: &TransferOptions, k: usize, forced: bool) -> Result<ModuleTransferred> {
    check_linear(eps1, g, m.complex())?;
    let a = m.base();
    let Some(split) = a.unit_split() else { return Err(Error::Precondition("the base algebra is not unital".into())) };
    if !m.unital {
        return Err(Error::Precondition("the module is not strictly unital".into()));
    }
    if opts.surjective_strict {
        return Err(Error::Precondition("surjective-strict mode is not available for unital transfer".into()));
    }
    let e1 = MultiMap::unary(eps1);
    let mut mus = vec![MultiMap::unary(g.differential())];
    let mut eps = vec![e1.clone()];
    if k >= 2 {
        let basis2 = module_basis(a.module(), g.module(), 2);
        let v = tensor_power_complex(&basis2, &[a.complex(), g], None);
        let (u, inc, locals) = unit_tuples(&v, &basis2, split.unit, 1);
        let field = g.field();
        let f = crate::ainfty::linear_map(u.module(), g.module(), 0, |j| {
            let (d, i) = u.module().local(j);
            vec![(basis2.tuples(d)[locals[&d][i]][1], field.one())]
        });
        let f2 = after_linear(m.mu(2), &e1, &basis2, m.module(), 0, None);
        let sq = LiftSquare::new(u, v, g.clone(), m.complex().clone(), f, inc, f2.map().clone(), eps1.clone()).map_err(|e| level_error(e, 1))?;
        let (h, s) = lift_up_to_homotopy(&sq, opts.rule).map_err(|e| level_error(e, 1))?;
        mus.push(MultiMap::new(&basis2, h)?);
        eps.push(MultiMap::new(&basis2, s.neg())?);
    }
    let (higher, eps) = transfer_module_levels(m, g, mus, eps, 2, k, Some(&split), opts)?;
    finish_module(m, g, higher, eps, true, k, forced)
}

fn lift_module_impl(eps: &AInfModuleMorphism, pi: &AInfModuleMorphism, opts: &TransferOptions, unital: bool) -> Result<ModuleLifted> {
    let (m, t) = (&eps.source, &eps.target);
    let g = &pi.source;
    if pi.target.module() != t.module() || !same_base(&g.base, &m.base) {
        return Err(Error::Mismatch("π and ε have different targets or algebras".into()));
    }
    check_linear(eps.linear(), m.complex(), t.complex())?;
    if opts.surjective_strict && !degreewise_surjective(eps.linear()) {
        return Err(Error::Precondition("surjective-strict mode needs a degreewise surjective linear part".into()));
    }
    let a = g.base();
    let split = if unital {
        let Some(sp) = a.unit_split() else { return Err(Error::Precondition("unital lift needs a unital algebra".into())) };
        Some(sp)
    } else {
        None
    };
    let (k, forced) = module_bound(opts, a.module(), g.module(), &[(m.module(), -1), (t.module(), -1)], 1)?;
    let sq = LiftSquare::from_bottom(g.complex().clone(), m.complex().clone(), t.complex().clone(), pi.linear().clone(), eps.linear().clone()).map_err(|e| level_error(e, 1))?;
    let (h, s) = lift_up_to_homotopy(&sq, opts.rule).map_err(|e| level_error(e, 1))?;
    let mut rhos = vec![MultiMap::unary(&h)];
    let mut taus = vec![MultiMap::unary(&s.neg())];
    let field = g.field();
    let one = field.one();
    let minus = -&one;
    for n in 1..k {
        let rho = AInfModuleMorphism::new_unchecked(g, m, rhos.clone())?;
        let comp = compose_module(&eps.truncated(n), &rho)?;
        let tau = AInfModuleHomotopy::new_unchecked(&comp, pi, taus.clone())?;
        if opts.certify {
            certify_zero(&lemma_obs_mod_mor(&rho, n)?, "the module morphism obstruction lemma", n)?;
            certify_zero(&lemma_obs_mod_comp(eps, &rho, n)?, "the module composition obstruction lemma", n)?;
            certify_zero(&lemma_obs_mod_hpty(&tau, n)?, "the module homotopy obstruction lemma", n)?;
        }
        let basis = g.basis(n + 1);
        let window = split_window(m.module(), t.module(), n as i32 - 1);
        let mug = g.mu(n + 1);
        let cc = obs_module_morphism_raw(&rho, n, &basis, window)
            .add(&after(&rhos[0], mug, &basis, n as i32 - 1, window))
            .sub(&after_linear(m.mu(n + 1), &rhos[0], &basis, m.module(), n as i32 - 1, window));
        let sign = field.sign(n as i64);
        let mut ss = obs_module_homotopy_raw(&tau, n, &basis, window).add(&after(&taus[0], mug, &basis, n as i32, window));
        let extra = build(&basis, t.module(), n as i32, window, |x, degs, sink| {
            if let Some(p) = pi.rho(n + 1) {
                sink.add_column(p.eval(x), &one);
            }
            action_terms(eps.rhos(), &rhos, (1, n), false, x, degs, &minus, sink);
        });
        ss = ss.add(&extra).add(&after_linear(t.mu(n + 1), &taus[0], &basis, t.module(), n as i32, window).scale(&sign));
        let (hn, sn) = match &split {
            None => split_level(eps.linear(), m.complex(), t.complex(), &basis, &module_factors(a.complex(), g.complex(), n + 1), &cc, &ss, opts, n)?,
            Some(sp) => split_level_unital(eps.linear(), m.complex(), t.complex(), sp, &basis, Some(g.complex()), &cc, &ss, opts, n)?,
        };
        rhos.push(hn);
        taus.push(sn.neg());
    }
    let rho = AInfModuleMorphism::new_unchecked(g, m, rhos)?;
    rho.verify(check_bound(forced, k, rho.complete_bound()))?;
    let comp = compose_module(eps, &rho)?;
    let tau = AInfModuleHomotopy::new_unchecked(&comp, pi, taus)?;
    tau.verify(check_bound(forced, k, tau.complete_bound()))?;
    if unital {
        rho.verify_unital(k)?;
        tau.verify_unital(k)?;
    }
    Ok(ModuleLifted { rho, tau })
}

/// A module morphism `ρ: G → M` with `ερ ≃ π`, for `ε: M → N` with
/// quasi-isomorphic linear part and `π: G → N`.
pub fn lift_module_morphism(eps: &AInfModuleMorphism, pi: &AInfModuleMorphism, opts: &TransferOptions) -> Result<ModuleLifted> {
    lift_module_impl(eps, pi, opts, false)
}

/// [`lift_module_morphism`] over a split unital algebra; `ρ` and the
/// homotopy respect the unit.
pub fn lift_module_morphism_unital(eps: &AInfModuleMorphism, pi: &AInfModuleMorphism, opts: &TransferOptions) -> Result<ModuleLifted> {
    lift_module_impl(eps, pi, opts, true)
}

/// The combined transfer: an algebra on `a` with `φ: A → B`, the restricted
/// module `φ_*M`, and a module on `g` over `A` with `ε: G → φ_*M`.
#[derive(Clone, Debug)]
pub struct PairTransferred {
    pub algebra: Transferred,
    pub restricted: Arc<AInfModule>,
    pub module: ModuleTransferred,
}

/// Transfers `b` along `phi1: A → B`, restricts `m` along the result and
/// transfers the restriction along `eps1: G → M`. With `unit` set to the
/// index of `1_A` in degree 0, both structures are strictly unital.
pub fn transfer_pair(b: &Arc<AInfAlgebra>, m: &Arc<AInfModule>, a: &ChainComplex, phi1: &GradedMap, g: &ChainComplex, eps1: &GradedMap, unit: Option<usize>, opts: &TransferOptions) -> Result<PairTransferred> {
    if !same_base(m.base(), b) {
        return Err(Error::Mismatch("the module is not over the given algebra".into()));
    }
    let (ka, forced_a) = crate::transfer::transfer_bound(opts, a.module(), b.module())?;
    let probe = AInfModule::trivial(&Arc::new(AInfAlgebra::trivial(a.clone())), m.complex.clone());
    let (km, forced_m) = transfer_module_bound(&probe, g, opts)?;
    let k = ka.max(km);
    let forced = forced_a && forced_m;
    let algebra = transfer_with_bound(b, a, phi1, unit, opts, k, forced)?;
    let restricted = Arc::new(restrict_module(&algebra.morphism, m, k)?);
    let module = match unit {
        None => transfer_module_with_bound(&restricted, g, eps1, opts, k, forced)?,
        Some(_) => transfer_module_unital_with_bound(&restricted, g, eps1, opts, k, forced)?,
    };
    Ok(PairTransferred { algebra, restricted, module })
}
