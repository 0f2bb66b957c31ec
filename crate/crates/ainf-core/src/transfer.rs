//! Transfer of A∞-structures along quasi-isomorphisms, lifting of
//! A∞-morphisms, strictly unital variants and the uniqueness certificate.
//!
//! Every level `n → n+1` assembles an obstruction `c` and a null-homotopy
//! candidate `s` for `g∘c`, splits the pair against the quasi-isomorphism
//! `g`, and reads off the next components. Results are re-verified before
//! they are returned.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::ainfty::{
    block_terms, build, compose, degree_bound, degree_cap, interleave_terms, lemma_obs_alg_del, lemma_obs_comp, lemma_obs_htpy_del, lemma_obs_mor_del, obs_algebra_raw, obs_homotopy_raw, obs_morphism_raw,
    precompose_terms, AInfAlgebra, AInfHomotopy, AInfMorphism, UnitSplit,
};
use crate::chaincx::{is_chain_map, is_quasi_iso, ChainComplex, GradedMap, GradedModule};
use crate::exactlin::{kernel_basis, rref, Matrix, PivotRule, SparseMatrix};
use crate::lifting::{lift_up_to_homotopy, split_null_homotopy, split_null_homotopy_strict, split_window, LiftSquare};
use crate::signs::{tabulate, tensor_power_complex, Block, MultiMap, TensorBasis};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TransferOptions {
    pub rule: PivotRule,
    /// Arity bound `K`; defaults to the degree-forced bound.
    pub max_arity: Option<usize>,
    /// Route every split through the surjective lift, forcing `ε_k = 0` for `k ≥ 2`.
    pub surjective_strict: bool,
    /// Assert the obstruction lemmas at every level.
    pub certify: bool,
}

impl Default for TransferOptions {
    fn default() -> Self {
        TransferOptions { rule: PivotRule::First, max_arity: None, surjective_strict: false, certify: true }
    }
}

impl TransferOptions {
    pub fn with_rule(rule: PivotRule) -> TransferOptions {
        TransferOptions { rule, ..TransferOptions::default() }
    }
}

/// A transferred structure and the quasi-isomorphism `ε: A → B`.
#[derive(Clone, Debug)]
pub struct Transferred {
    pub algebra: Arc<AInfAlgebra>,
    pub morphism: AInfMorphism,
}

/// A lift `φ` with `εφ ≃ ψ`, witnessed by `sigma` between `compose(ε, φ)` and `ψ`.
#[derive(Clone, Debug)]
pub struct Lifted {
    pub phi: AInfMorphism,
    pub sigma: AInfHomotopy,
}

pub(crate) fn nonnegative(m: &GradedModule) -> bool {
    m.bottom().is_none_or(|b| b >= 0)
}

/// Arity up to which results are checked: the full relation range when `K`
/// is degree-forced, `K` otherwise.
pub(crate) fn check_bound(forced: bool, k: usize, complete: usize) -> usize {
    if forced { complete.max(k) } else { k }
}

pub(crate) fn level_error(e: Error, n: usize) -> Error {
    match e {
        Error::Precondition(m) => Error::Certificate(format!("level {n}: {m}")),
        Error::Verification(m) => Error::Certificate(format!("level {n}: {m}")),
        e => e,
    }
}

pub(crate) fn certify_zero(m: &GradedMap, what: &str, n: usize) -> Result<()> {
    match m.first_nonzero() {
        None => Ok(()),
        Some((d, i, j, v)) => Err(Error::Certificate(format!("level {n}: {what} fails at source degree {d}, entry ({i}, {j}) = {v}"))),
    }
}

pub(crate) fn check_linear(eps1: &GradedMap, a: &ChainComplex, b: &ChainComplex) -> Result<()> {
    if eps1.source() != a.module() || eps1.target() != b.module() || eps1.degree() != 0 {
        return Err(Error::Mismatch("the linear part does not fit the complexes".into()));
    }
    if !is_chain_map(eps1, a, b)? {
        return Err(Error::NotChainMap("linear part".into()));
    }
    if !is_quasi_iso(eps1, a, b)? {
        return Err(Error::NotQuasiIso("linear part".into()));
    }
    Ok(())
}

pub(crate) fn degreewise_surjective(g: &GradedMap) -> bool {
    g.target().degrees().all(|(d, r)| g.block(d).map_or(0, |b| b.to_dense().rank()) == r)
}

/// Splits `(c, s)` over the windowed tensor complex on `basis` and embeds the
/// results back into maps on the full tensor module.
#[allow(clippy::too_many_arguments)]
pub(crate) fn split_level(g: &GradedMap, x: &ChainComplex, y: &ChainComplex, basis: &Arc<TensorBasis>, factors: &[&ChainComplex], c: &MultiMap, s: &MultiMap, opts: &TransferOptions, n: usize) -> Result<(MultiMap, MultiMap)> {
    let r = c.degree();
    let Some(window) = split_window(x.module(), y.module(), r) else {
        return Ok((MultiMap::zero(basis, x.module(), r + 1), MultiMap::zero(basis, y.module(), r + 2)));
    };
    let fcx = tensor_power_complex(basis, factors, Some(window));
    let cf = c.map().restrict_source(fcx.module());
    let sf = s.map().restrict_source(fcx.module());
    let split = if opts.surjective_strict { split_null_homotopy_strict } else { split_null_homotopy };
    let (h, s2) = split(g, x, y, &fcx, &cf, &sf, opts.rule).map_err(|e| level_error(e, n))?;
    let h = MultiMap::new(basis, h.with_modules(basis.module(), x.module()))?;
    let s2 = MultiMap::new(basis, s2.with_modules(basis.module(), y.module()))?;
    Ok((h, s2))
}

/// Columns of `m` on `Ā^{⊗p} ⊗ (rest)` after checking that the unit columns
/// vanish; `prefix` is `p`, the number of leading algebra factors.
fn restrict_to_bar(m: &MultiMap, split: &UnitSplit, bar_basis: &Arc<TensorBasis>, prefix: usize, window: Option<(i32, i32)>, what: &str, n: usize) -> Result<MultiMap> {
    let full = m.basis();
    let degrees: Vec<i32> = full.module().degrees().map(|(d, _)| d).collect();
    for d in degrees {
        if window.is_some_and(|(lo, hi)| d < lo || d > hi) {
            continue;
        }
        for x in full.tuples(d) {
            if x[..prefix].contains(&split.unit) && !m.eval(&x).is_empty() {
                return Err(Error::Certificate(format!("level {n}: {what} does not vanish on the unit tuple {x:?}")));
            }
        }
    }
    let one = m.field().one();
    Ok(tabulate(bar_basis, m.target(), m.degree(), window, |y, sink| {
        let mut x = split.tuple_to_full(&y[..prefix]);
        x.extend_from_slice(&y[prefix..]);
        sink.add_column(m.eval(&x), &one)
    }))
}

/// The split of a level on `Ā^{⊗(n+1)}`, or on `Ā^{⊗n} ⊗ tail` when a
/// fixed last factor is given, extended by zero along the unit.
#[allow(clippy::too_many_arguments)]
pub(crate) fn split_level_unital(g: &GradedMap, x: &ChainComplex, y: &ChainComplex, split: &UnitSplit, basis: &Arc<TensorBasis>, tail: Option<&ChainComplex>, c: &MultiMap, s: &MultiMap, opts: &TransferOptions, n: usize) -> Result<(MultiMap, MultiMap)> {
    let k = basis.arity();
    let prefix = if tail.is_some() { k - 1 } else { k };
    let window = split_window(x.module(), y.module(), c.degree());
    let mut bar_factors = vec![split.bar.module().clone(); prefix];
    let mut factors = vec![&split.bar; prefix];
    if let Some(t) = tail {
        bar_factors.push(t.module().clone());
        factors.push(t);
    }
    let bar_basis = Arc::new(TensorBasis::new(bar_factors));
    let cb = restrict_to_bar(c, split, &bar_basis, prefix, window, "the obstruction", n)?;
    let sb = restrict_to_bar(s, split, &bar_basis, prefix, window, "the homotopy candidate", n)?;
    let (h, s2) = split_level(g, x, y, &bar_basis, &factors, &cb, &sb, opts, n)?;
    Ok((split.extend_by_zero_prefix(&h, basis, prefix), split.extend_by_zero_prefix(&s2, basis, prefix)))
}

/// `μ^B_{n+1} ∘ ε₁^{⊗(n+1)}` on `basis`, windowed.
pub(crate) fn top_composite(mu: Option<&MultiMap>, f: &MultiMap, basis: &Arc<TensorBasis>, target: &GradedModule, degree: i32, window: Option<(i32, i32)>) -> MultiMap {
    let k = basis.arity();
    let one = target.field().one();
    build(basis, target, degree, window, |x, degs, sink| {
        if let Some(mu) = mu {
            precompose_terms(mu, &vec![Block::Map(f); k], x, degs, &one, sink);
        }
    })
}

/// `f ∘ μ_{k}` on `basis`, windowed.
pub(crate) fn after(f: &MultiMap, mu: Option<&MultiMap>, basis: &Arc<TensorBasis>, degree: i32, window: Option<(i32, i32)>) -> MultiMap {
    build(basis, f.target(), degree, window, |x, _, sink| {
        if let Some(mu) = mu {
            for (i, v) in mu.eval(x).iter() {
                sink.add_column(f.eval(&[i]), v);
            }
        }
    })
}

struct Level {
    n: usize,
    basis: Arc<TensorBasis>,
    window: Option<(i32, i32)>,
}

/// Runs the transfer induction from `start` (with `mus`, `eps` populated to
/// `start`) up to `k`.
#[allow(clippy::too_many_arguments)]
fn transfer_levels(b: &Arc<AInfAlgebra>, a: &ChainComplex, mut mus: Vec<MultiMap>, mut eps: Vec<MultiMap>, start: usize, k: usize, split: Option<&UnitSplit>, opts: &TransferOptions) -> Result<(Vec<MultiMap>, Vec<MultiMap>)> {
    for n in start..k {
        let alg = Arc::new(AInfAlgebra::new_unchecked(a.clone(), mus[1..].to_vec(), None)?);
        let mor = AInfMorphism::new_unchecked(&alg, b, eps.clone())?;
        let lv = Level { n, basis: alg.basis(n + 1), window: split_window(a.module(), b.module(), n as i32 - 2) };
        if opts.certify {
            certify_zero(&lemma_obs_alg_del(&alg, n)?, "∂(obs{A}) = 0", n)?;
            certify_zero(&lemma_obs_mor_del(&mor, n)?, "the morphism obstruction lemma", n)?;
        }
        let c = obs_algebra_raw(alg.mus(), &lv.basis, a.module(), lv.window);
        let d = obs_morphism_raw(&mor, n, &lv.basis, lv.window).sub(&top_composite(b.mu(n + 1), &eps[0], &lv.basis, b.module(), n as i32 - 1, lv.window));
        let (h, s2) = match split {
            None => split_level(mor.linear(), a, b.complex(), &lv.basis, &vec![a; n + 1], &c, &d, opts, lv.n)?,
            Some(sp) => split_level_unital(mor.linear(), a, b.complex(), sp, &lv.basis, None, &c, &d, opts, lv.n)?,
        };
        mus.push(h.neg());
        eps.push(s2);
    }
    Ok((mus.split_off(1), eps))
}

pub(crate) fn transfer_bound(opts: &TransferOptions, a: &GradedModule, b: &GradedModule) -> Result<(usize, bool)> {
    match opts.max_arity {
        Some(k) if k < 2 => Err(Error::Precondition(format!("arity bound {k} is below 2"))),
        Some(k) => Ok((k, false)),
        None if nonnegative(a) => Ok((degree_bound(a).max(degree_cap(a, b, -1)), true)),
        None => Ok((degree_bound(a), false)),
    }
}

/// Checks every `μ_k` beyond the degree-forced bound vanishes.
fn check_degree_vanishing(alg: &AInfAlgebra) -> Result<()> {
    if !nonnegative(alg.module()) {
        return Ok(());
    }
    let bound = alg.degree_bound();
    for k in bound + 1..=alg.arity_bound() {
        if !alg.mu(k).is_some_and(|m| m.is_zero()) {
            return Err(Error::Certificate(format!("μ_{k} is nonzero beyond the degree bound {bound}")));
        }
    }
    Ok(())
}

fn finish(b: &Arc<AInfAlgebra>, a: &ChainComplex, higher: Vec<MultiMap>, eps: Vec<MultiMap>, unit: Option<usize>, k: usize, forced: bool) -> Result<Transferred> {
    let alg = Arc::new(AInfAlgebra::new_unchecked(a.clone(), higher, unit)?);
    alg.verify(check_bound(forced, k, alg.complete_bound()))?;
    check_degree_vanishing(&alg)?;
    let morphism = AInfMorphism::new_unchecked(&alg, b, eps)?;
    morphism.verify(check_bound(forced, k, morphism.complete_bound()))?;
    if unit.is_some() {
        morphism.verify_unital(k)?;
    }
    Ok(Transferred { algebra: alg, morphism })
}

/// An A∞-structure on `a` and an A∞-quasi-isomorphism `ε: A → B` with
/// linear part `eps1`, populated to the arity bound.
pub fn transfer(b: &Arc<AInfAlgebra>, a: &ChainComplex, eps1: &GradedMap, opts: &TransferOptions) -> Result<Transferred> {
    let (k, forced) = transfer_bound(opts, a.module(), b.module())?;
    transfer_with_bound(b, a, eps1, None, opts, k, forced)
}

/// [`transfer`] or [`transfer_unital`] to an explicit arity bound.
pub(crate) fn transfer_with_bound(b: &Arc<AInfAlgebra>, a: &ChainComplex, eps1: &GradedMap, unit: Option<usize>, opts: &TransferOptions, k: usize, forced: bool) -> Result<Transferred> {
    if let Some(unit) = unit {
        return transfer_unital_impl(b, a, unit, eps1, opts, k, forced);
    }
    check_linear(eps1, a, b.complex())?;
    if opts.surjective_strict && !degreewise_surjective(eps1) {
        return Err(Error::Precondition("surjective-strict mode needs a degreewise surjective linear part".into()));
    }
    let mus = vec![MultiMap::unary(a.differential())];
    let (higher, eps) = transfer_levels(b, a, mus, vec![MultiMap::unary(eps1)], 1, k, None, opts)?;
    finish(b, a, higher, eps, None, k, forced)
}

/// Bases of `U ⊂ V`: the tuples whose first `prefix` entries contain the
/// unit, as a coordinate subcomplex with its inclusion.
pub(crate) fn unit_tuples(v: &ChainComplex, basis: &TensorBasis, unit: usize, prefix: usize) -> (ChainComplex, GradedMap, BTreeMap<i32, Vec<usize>>) {
    let vm = v.module();
    let field = vm.field();
    let mut locals = BTreeMap::new();
    for (d, _) in vm.degrees() {
        let idx: Vec<usize> = basis.tuples(d).iter().enumerate().filter(|(_, x)| x[..prefix].contains(&unit)).map(|(i, _)| i).collect();
        if !idx.is_empty() {
            locals.insert(d, idx);
        }
    }
    let um = GradedModule::new(field, locals.iter().map(|(d, l)| (*d, l.len())));
    let mut inc = BTreeMap::new();
    let mut diff = BTreeMap::new();
    for (d, l) in &locals {
        let cols = l.iter().map(|&i| vec![(i, field.one())]).collect();
        inc.insert(*d, SparseMatrix::from_columns(field, vm.rank(*d), cols));
        if let Some(prev) = locals.get(&(d - 1)) {
            let all: Vec<usize> = (0..vm.rank(d - 1)).collect();
            let block = v.differential().block_or_zero(*d).submatrix(&all, l);
            let pos: BTreeMap<usize, usize> = prev.iter().enumerate().map(|(p, &i)| (i, p)).collect();
            let cols = (0..l.len()).map(|j| block.column(j).iter().map(|(i, x)| (pos[i], x.clone())).collect()).collect();
            diff.insert(*d, SparseMatrix::from_columns(field, prev.len(), cols));
        }
    }
    let u = ChainComplex::from_differential_unchecked(GradedMap::from_blocks_unchecked(&um, &um, -1, diff));
    (u, GradedMap::from_blocks_unchecked(&um, vm, 0, inc), locals)
}

pub(crate) fn check_unit_map(eps1: &GradedMap, a: &ChainComplex, unit: usize, b: &AInfAlgebra) -> Result<UnitSplit> {
    let Some(bu) = b.unit() else { return Err(Error::Precondition("the target algebra is not unital".into())) };
    let split = UnitSplit::new(a, unit)?;
    let col = eps1.column(0, unit);
    if col.len() != 1 || col[0].0 != bu || !col[0].1.is_one() {
        return Err(Error::Precondition("the linear part does not send the unit to the unit".into()));
    }
    Ok(split)
}

/// [`transfer`] for a strictly unital `b`, with `1_A` the basis element
/// `unit` of degree 0 in `a`. The result is split unital and `ε` is unital.
pub fn transfer_unital(b: &Arc<AInfAlgebra>, a: &ChainComplex, unit: usize, eps1: &GradedMap, opts: &TransferOptions) -> Result<Transferred> {
    let (k, forced) = transfer_bound(opts, a.module(), b.module())?;
    transfer_unital_impl(b, a, unit, eps1, opts, k, forced)
}

#[allow(clippy::too_many_arguments)]
fn transfer_unital_impl(b: &Arc<AInfAlgebra>, a: &ChainComplex, unit: usize, eps1: &GradedMap, opts: &TransferOptions, k: usize, forced: bool) -> Result<Transferred> {
    check_linear(eps1, a, b.complex())?;
    let split = check_unit_map(eps1, a, unit, b)?;
    if opts.surjective_strict {
        return Err(Error::Precondition("surjective-strict mode is not available for unital transfer".into()));
    }
    let e1 = MultiMap::unary(eps1);
    let mut mus = vec![MultiMap::unary(a.differential())];
    let mut eps = vec![e1.clone()];
    let basis2 = Arc::new(TensorBasis::power(a.module(), 2));
    let v = tensor_power_complex(&basis2, &[a, a], None);
    let (u, g, locals) = unit_tuples(&v, &basis2, split.unit, 2);
    let field = a.field();
    let f = crate::ainfty::linear_map(u.module(), a.module(), 0, |j| {
        let (d, i) = u.module().local(j);
        let x = &basis2.tuples(d)[locals[&d][i]];
        let other = if x[0] == split.unit { x[1] } else { x[0] };
        vec![(other, field.one())]
    });
    let f2 = top_composite(b.mu(2), &e1, &basis2, b.module(), 0, None);
    let sq = LiftSquare::new(u, v, a.clone(), b.complex().clone(), f, g, f2.map().clone(), eps1.clone()).map_err(|e| level_error(e, 1))?;
    let (h, s) = lift_up_to_homotopy(&sq, opts.rule).map_err(|e| level_error(e, 1))?;
    mus.push(MultiMap::new(&basis2, h)?);
    eps.push(MultiMap::new(&basis2, s.neg())?);
    let (higher, eps) = transfer_levels(b, a, mus, eps, 2, k, Some(&split), opts)?;
    finish(b, a, higher, eps, Some(unit), k, forced)
}

/// `H(B)` with zero differential and a cycle section `ε₁: H(B) → B`.
#[derive(Clone, Debug)]
pub struct HomologySection {
    pub complex: ChainComplex,
    pub section: GradedMap,
    /// Index in degree 0 of the class of the unit, when it survives.
    pub unit: Option<usize>,
}

/// Cycle representatives completing a basis of the boundaries in each
/// degree; the unit, when given and not a boundary, is the first class in
/// degree 0.
pub fn homology_section(b: &ChainComplex, unit: Option<usize>) -> HomologySection {
    let m = b.module();
    let field = m.field();
    let mut reps: BTreeMap<i32, Vec<Vec<crate::FieldElement>>> = BTreeMap::new();
    let mut unit_class = None;
    for (d, r) in m.degrees() {
        let dd = b.differential().block_or_zero(d).to_dense();
        let z = if m.rank(d - 1) == 0 { Matrix::identity(field, r) } else { kernel_basis(&dd) };
        let im = b.differential().block_or_zero(d + 1);
        let mut cols: Vec<Vec<crate::FieldElement>> = (0..im.cols()).map(|j| im.dense_column(j)).collect();
        let n_im = cols.len();
        let unit_here = if d == 0 { unit } else { None };
        if let Some(i) = unit_here {
            let mut e = vec![field.zero(); r];
            e[i] = field.one();
            cols.push(e);
        }
        cols.extend((0..z.cols()).map(|j| z.column(j)));
        let (_, pivots) = rref(&Matrix::from_columns(field, r, &cols), PivotRule::First);
        let chosen: Vec<Vec<crate::FieldElement>> = pivots.iter().filter(|&&p| p >= n_im).map(|&p| cols[p].clone()).collect();
        if unit_here.is_some() && pivots.contains(&n_im) {
            unit_class = Some(0);
        }
        if !chosen.is_empty() {
            reps.insert(d, chosen);
        }
    }
    let h = GradedModule::new(field, reps.iter().map(|(d, v)| (*d, v.len())));
    let blocks = reps.iter().map(|(d, v)| (*d, SparseMatrix::from_dense_columns(field, m.rank(*d), v))).collect();
    let section = GradedMap::from_blocks_unchecked(&h, m, 0, blocks);
    HomologySection { complex: ChainComplex::with_zero_differential(&h), section, unit: unit_class }
}

/// Default arity bound for lifts between the given algebras.
fn lift_bound(opts: &TransferOptions, ms: &[&GradedModule]) -> Result<(usize, bool)> {
    match opts.max_arity {
        Some(k) if k < 1 => Err(Error::Precondition("arity bound 0".into())),
        Some(k) => Ok((k, false)),
        None => Ok((ms.iter().map(|m| degree_bound(m)).max().unwrap_or(2), ms.iter().all(|m| nonnegative(m)))),
    }
}

fn lift_impl(eps: &AInfMorphism, psi: &AInfMorphism, opts: &TransferOptions, unital: bool) -> Result<Lifted> {
    let (b, c) = (eps.source(), eps.target());
    let a = psi.source();
    if psi.target().module() != c.module() {
        return Err(Error::Mismatch("ψ and ε have different targets".into()));
    }
    check_linear(eps.linear(), b.complex(), c.complex())?;
    if opts.surjective_strict && !degreewise_surjective(eps.linear()) {
        return Err(Error::Precondition("surjective-strict mode needs a degreewise surjective linear part".into()));
    }
    let (k, forced) = lift_bound(opts, &[a.module(), b.module(), c.module()])?;
    let split = if unital {
        let (Some(au), Some(bu)) = (a.unit(), b.unit()) else {
            return Err(Error::Precondition("unital lift needs unital algebras".into()));
        };
        if c.unit().is_none() {
            return Err(Error::Precondition("unital lift needs a unital target".into()));
        }
        Some((a.unit_split().unwrap(), au, bu))
    } else {
        None
    };
    let field = a.field();
    let sq = match &split {
        None => LiftSquare::from_bottom(a.complex().clone(), b.complex().clone(), c.complex().clone(), psi.linear().clone(), eps.linear().clone()),
        Some((_, au, bu)) => {
            let q = GradedModule::new(field, [(0, 1)]);
            let u = ChainComplex::with_zero_differential(&q);
            let g = crate::ainfty::linear_map(&q, a.module(), 0, |_| vec![(a.module().offset(0) + au, field.one())]);
            let f = crate::ainfty::linear_map(&q, b.module(), 0, |_| vec![(b.module().offset(0) + bu, field.one())]);
            LiftSquare::new(u, a.complex().clone(), b.complex().clone(), c.complex().clone(), f, g, psi.linear().clone(), eps.linear().clone())
        }
    }
    .map_err(|e| level_error(e, 1))?;
    let (h, s) = lift_up_to_homotopy(&sq, opts.rule).map_err(|e| level_error(e, 1))?;
    let mut phis = vec![MultiMap::unary(&h)];
    let mut sigmas = vec![MultiMap::unary(&s.neg())];
    let one = field.one();
    for n in 1..k {
        let phi = AInfMorphism::new_unchecked(a, b, phis.clone())?;
        let comp = compose(&eps.truncated(n), &phi)?;
        let sig = AInfHomotopy::new_unchecked(&comp, psi, sigmas.clone())?;
        if opts.certify {
            certify_zero(&lemma_obs_mor_del(&phi, n)?, "the morphism obstruction lemma", n)?;
            certify_zero(&lemma_obs_comp(eps, &phi, n)?, "the composition obstruction lemma", n)?;
            certify_zero(&lemma_obs_htpy_del(&sig, n)?, "the homotopy obstruction lemma", n)?;
        }
        let basis = a.basis(n + 1);
        let window = split_window(b.module(), c.module(), n as i32 - 1);
        let mua = a.mu(n + 1);
        let cc = obs_morphism_raw(&phi, n, &basis, window)
            .add(&after(&phis[0], mua, &basis, n as i32 - 1, window))
            .sub(&top_composite(b.mu(n + 1), &phis[0], &basis, b.module(), n as i32 - 1, window));
        let sign = field.sign(n as i64);
        let minus = -&one;
        let e1p1 = &comp.phis()[0];
        let mut ss = obs_homotopy_raw(&sig, n, &basis, window).add(&after(&sigmas[0], mua, &basis, n as i32, window));
        let extra = build(&basis, c.module(), n as i32, window, |x, degs, sink| {
            if let Some(p) = psi.phi(n + 1) {
                sink.add_column(p.eval(x), &one);
            }
            block_terms(eps.phis(), &phis, (2, n + 1), x, degs, &minus, sink);
            if let Some(m) = c.mu(n + 1) {
                interleave_terms(m, e1p1, &sigmas[0], &psi.phis()[0], x, degs, &sign, sink);
            }
        });
        ss = ss.add(&extra);
        let (hn, sn) = match &split {
            None => split_level(eps.linear(), b.complex(), c.complex(), &basis, &vec![a.complex(); n + 1], &cc, &ss, opts, n)?,
            Some((sp, ..)) => split_level_unital(eps.linear(), b.complex(), c.complex(), sp, &basis, None, &cc, &ss, opts, n)?,
        };
        phis.push(hn);
        sigmas.push(sn.neg());
    }
    let phi = AInfMorphism::new_unchecked(a, b, phis)?;
    phi.verify(check_bound(forced, k, phi.complete_bound()))?;
    let comp = compose(eps, &phi)?;
    let sigma = AInfHomotopy::new_unchecked(&comp, psi, sigmas)?;
    sigma.verify(check_bound(forced, k, sigma.complete_bound()))?;
    if unital {
        phi.verify_unital(k)?;
        sigma.verify_unital(k)?;
    }
    Ok(Lifted { phi, sigma })
}

/// A morphism `φ: A → B` with `εφ ≃ ψ`, for `ε: B → C` with quasi-isomorphic
/// linear part and `ψ: A → C`.
pub fn lift_morphism(eps: &AInfMorphism, psi: &AInfMorphism, opts: &TransferOptions) -> Result<Lifted> {
    lift_impl(eps, psi, opts, false)
}

/// [`lift_morphism`] between strictly unital algebras; `φ` and the homotopy
/// are unital.
pub fn lift_morphism_unital(eps: &AInfMorphism, psi: &AInfMorphism, opts: &TransferOptions) -> Result<Lifted> {
    lift_impl(eps, psi, opts, true)
}

/// Homotopy-equivalence certificate between two transfers `e1: A₁ → B` and
/// `e2: A₂ → B`: `phi` with `e2∘φ ≃ e1`, `psi` with `φψ ≃ id`, and `chi`
/// with `ψχ ≃ id`.
#[derive(Clone, Debug)]
pub struct UniquenessCertificate {
    pub phi: Lifted,
    pub psi: Lifted,
    pub chi: Lifted,
    pub arity: usize,
}

impl UniquenessCertificate {
    /// Replays every defect check up to the certificate's arity.
    pub fn verify(&self) -> Result<()> {
        for l in [&self.phi, &self.psi, &self.chi] {
            l.phi.verify(self.arity)?;
            l.sigma.verify(self.arity)?;
        }
        Ok(())
    }
}

pub fn certify_uniqueness(e1: &AInfMorphism, e2: &AInfMorphism, opts: &TransferOptions) -> Result<UniquenessCertificate> {
    if e1.target().module() != e2.target().module() {
        return Err(Error::Mismatch("the transfers have different targets".into()));
    }
    let unital = e1.source().unit().is_some() && e2.source().unit().is_some() && e1.target().unit().is_some();
    let lift = |eps: &AInfMorphism, psi: &AInfMorphism| if unital { lift_morphism_unital(eps, psi, opts) } else { lift_morphism(eps, psi, opts) };
    let phi = lift(e2, e1)?;
    let psi = lift(&phi.phi, &AInfMorphism::identity(e2.source()))?;
    let chi = lift(&psi.phi, &AInfMorphism::identity(e1.source()))?;
    let arity = phi.phi.arity_bound();
    Ok(UniquenessCertificate { phi, psi, chi, arity })
}
