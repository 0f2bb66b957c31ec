//! Tensor bases, multi-linear maps and all sign bookkeeping: Koszul
//! evaluation of interleaved tensor maps, the `t₁`/`t₂` parities, the bar
//! shift correspondence and the shifted-identity oracles.
//!
//! A basis tensor is a tuple of global basis indices, one per factor. Tuples
//! of a fixed total degree are ordered lexicographically in the global order
//! of each factor (degree ascending, then index ascending).

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::chaincx::{ChainComplex, GradedMap, GradedModule};
use crate::exactlin::{Accumulator, Field, FieldElement, SparseMatrix, SparseVec};
use crate::{Error, Result};

/// The ordered basis of `M₁ ⊗ ⋯ ⊗ M_k`.
#[derive(Debug, PartialEq, Eq)]
pub struct TensorBasis {
    factors: Vec<GradedModule>,
    module: GradedModule,
    /// `suffix[i][e]`: number of tuples over factors `i..` of total degree `e`.
    suffix: Vec<BTreeMap<i32, usize>>,
}

impl TensorBasis {
    pub fn new(factors: Vec<GradedModule>) -> TensorBasis {
        assert!(!factors.is_empty(), "a tensor basis needs at least one factor");
        let field = factors[0].field();
        let k = factors.len();
        let mut suffix = vec![BTreeMap::new(); k + 1];
        suffix[k].insert(0, 1);
        for i in (0..k).rev() {
            let mut m: BTreeMap<i32, usize> = BTreeMap::new();
            for (d, r) in factors[i].degrees() {
                for (e, c) in &suffix[i + 1] {
                    *m.entry(d + e).or_default() += r * c;
                }
            }
            suffix[i] = m;
        }
        let module = GradedModule::new(field, suffix[0].iter().map(|(d, r)| (*d, *r)));
        TensorBasis { factors, module, suffix }
    }

    pub fn power(m: &GradedModule, k: usize) -> TensorBasis {
        TensorBasis::new(vec![m.clone(); k])
    }

    pub fn arity(&self) -> usize {
        self.factors.len()
    }

    pub fn factors(&self) -> &[GradedModule] {
        &self.factors
    }

    pub fn factor(&self, i: usize) -> &GradedModule {
        &self.factors[i]
    }

    pub fn module(&self) -> &GradedModule {
        &self.module
    }

    pub fn field(&self) -> Field {
        self.module.field()
    }

    fn count(&self, i: usize, e: i32) -> usize {
        self.suffix[i].get(&e).copied().unwrap_or(0)
    }

    pub fn degrees(&self, x: &[usize]) -> Vec<i32> {
        x.iter().zip(&self.factors).map(|(g, m)| m.degree_of(*g)).collect()
    }

    /// `(total degree, local index)` of a basis tensor.
    pub fn index(&self, x: &[usize]) -> (i32, usize) {
        debug_assert_eq!(x.len(), self.arity());
        let locals: Vec<(i32, usize)> = x.iter().zip(&self.factors).map(|(g, m)| m.local(*g)).collect();
        let total: i32 = locals.iter().map(|l| l.0).sum();
        let mut pre = 0;
        let mut idx = 0;
        for (i, &(d, j)) in locals.iter().enumerate() {
            for (e, r) in self.factors[i].degrees() {
                if e >= d {
                    break;
                }
                idx += r * self.count(i + 1, total - pre - e);
            }
            idx += j * self.count(i + 1, total - pre - d);
            pre += d;
        }
        (total, idx)
    }

    pub fn global_index(&self, x: &[usize]) -> usize {
        let (d, i) = self.index(x);
        self.module.offset(d) + i
    }

    /// Calls `f(local index, tuple)` for every basis tensor of total degree `d`, in order.
    pub fn for_each(&self, d: i32, mut f: impl FnMut(usize, &[usize])) {
        let mut buf = Vec::with_capacity(self.arity());
        let mut n = 0;
        self.walk(0, d, &mut buf, &mut n, &mut f);
    }

    fn walk(&self, i: usize, rest: i32, buf: &mut Vec<usize>, n: &mut usize, f: &mut impl FnMut(usize, &[usize])) {
        if i == self.arity() {
            f(*n, buf);
            *n += 1;
            return;
        }
        let m = &self.factors[i];
        for (e, r) in m.degrees() {
            if self.count(i + 1, rest - e) == 0 {
                continue;
            }
            let off = m.offset(e);
            for j in 0..r {
                buf.push(off + j);
                self.walk(i + 1, rest - e, buf, n, f);
                buf.pop();
            }
        }
    }

    pub fn tuples(&self, d: i32) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        self.for_each(d, |_, x| out.push(x.to_vec()));
        out
    }

    /// The basis with the first `count` factors suspended once each.
    pub fn suspended(&self, count: usize) -> TensorBasis {
        let factors = self.factors.iter().enumerate().map(|(i, m)| if i < count { m.shift(1) } else { m.clone() }).collect();
        TensorBasis::new(factors)
    }
}

/// One column of a graded map, with its target offset for global indexing.
#[derive(Clone, Copy)]
pub struct Column<'a> {
    offset: usize,
    entries: &'a [(usize, FieldElement)],
}

impl<'a> Column<'a> {
    pub fn iter(&self) -> impl Iterator<Item = (usize, &'a FieldElement)> + 'a {
        let off = self.offset;
        self.entries.iter().map(move |(i, x)| (off + i, x))
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// A `k`-ary homogeneous map `M₁ ⊗ ⋯ ⊗ M_k → N`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultiMap {
    basis: Arc<TensorBasis>,
    map: GradedMap,
}

impl MultiMap {
    pub fn new(basis: &Arc<TensorBasis>, map: GradedMap) -> Result<MultiMap> {
        if map.source() != basis.module() {
            return Err(Error::Mismatch("multimap source is not the tensor module".into()));
        }
        Ok(MultiMap { basis: basis.clone(), map })
    }

    pub fn zero(basis: &Arc<TensorBasis>, target: &GradedModule, degree: i32) -> MultiMap {
        MultiMap { basis: basis.clone(), map: GradedMap::zero(basis.module(), target, degree) }
    }

    /// A linear map viewed as a unary multimap.
    pub fn unary(map: &GradedMap) -> MultiMap {
        let basis = Arc::new(TensorBasis::new(vec![map.source().clone()]));
        MultiMap { basis, map: map.clone() }
    }

    pub fn arity(&self) -> usize {
        self.basis.arity()
    }

    pub fn degree(&self) -> i32 {
        self.map.degree()
    }

    pub fn basis(&self) -> &Arc<TensorBasis> {
        &self.basis
    }

    pub fn map(&self) -> &GradedMap {
        &self.map
    }

    pub fn target(&self) -> &GradedModule {
        self.map.target()
    }

    pub fn field(&self) -> Field {
        self.map.field()
    }

    pub fn is_zero(&self) -> bool {
        self.map.is_zero()
    }

    /// Image of a basis tensor.
    pub fn eval(&self, x: &[usize]) -> Column<'_> {
        let (d, j) = self.basis.index(x);
        Column { offset: self.map.target().offset(d + self.map.degree()), entries: self.map.column(d, j) }
    }

    fn same_shape(&self, o: &MultiMap) {
        assert!(self.basis == o.basis, "multimaps on different tensor bases");
    }

    pub fn add(&self, o: &MultiMap) -> MultiMap {
        self.same_shape(o);
        MultiMap { basis: self.basis.clone(), map: self.map.add(&o.map) }
    }

    pub fn sub(&self, o: &MultiMap) -> MultiMap {
        self.same_shape(o);
        MultiMap { basis: self.basis.clone(), map: self.map.sub(&o.map) }
    }

    pub fn add_scaled(&self, o: &MultiMap, c: &FieldElement) -> MultiMap {
        self.same_shape(o);
        MultiMap { basis: self.basis.clone(), map: self.map.add_scaled(&o.map, c) }
    }

    pub fn scale(&self, c: &FieldElement) -> MultiMap {
        MultiMap { basis: self.basis.clone(), map: self.map.scale(c) }
    }

    pub fn neg(&self) -> MultiMap {
        MultiMap { basis: self.basis.clone(), map: self.map.neg() }
    }

    /// `g ∘ self` for a linear map `g`.
    pub fn then(&self, g: &GradedMap) -> MultiMap {
        MultiMap { basis: self.basis.clone(), map: g.compose(&self.map) }
    }

    pub fn with_map(&self, map: GradedMap) -> MultiMap {
        assert_eq!(map.source(), self.basis.module());
        MultiMap { basis: self.basis.clone(), map }
    }

    /// First nonzero entry as `(source degree, row, column, value)`.
    pub fn first_nonzero(&self) -> Option<(i32, usize, usize, FieldElement)> {
        self.map.first_nonzero()
    }
}

/// Dense accumulator over the global basis of a target module.
pub struct Sink {
    acc: Accumulator,
    one: FieldElement,
}

impl Sink {
    pub fn new(field: Field, n: usize) -> Sink {
        Sink { acc: Accumulator::new(field, n), one: field.one() }
    }

    pub fn add(&mut self, i: usize, c: &FieldElement) {
        self.acc.add_mul(i, c, &self.one);
    }

    pub fn add_column(&mut self, col: Column<'_>, c: &FieldElement) {
        for (i, x) in col.iter() {
            self.acc.add_mul(i, x, c);
        }
    }

    pub fn take(&mut self) -> SparseVec {
        self.acc.take()
    }
}

/// Builds the multimap `basis → target` of the given degree whose value on each
/// basis tensor is written into the sink by `f`, in global target indices.
/// Only source degrees inside the window, if any, and with a nonzero target
/// are evaluated.
pub fn tabulate(basis: &Arc<TensorBasis>, target: &GradedModule, degree: i32, window: Option<(i32, i32)>, mut f: impl FnMut(&[usize], &mut Sink)) -> MultiMap {
    let field = basis.field();
    let mut sink = Sink::new(field, target.total_rank());
    let mut blocks = BTreeMap::new();
    for (d, r) in basis.module().degrees() {
        if window.is_some_and(|(lo, hi)| d < lo || d > hi) {
            continue;
        }
        let t = d + degree;
        let (off, rows) = (target.offset(t), target.rank(t));
        if rows == 0 {
            continue;
        }
        let mut cols = Vec::with_capacity(r);
        basis.for_each(d, |_, x| {
            f(x, &mut sink);
            let v = sink.take();
            debug_assert!(v.iter().all(|(i, _)| *i >= off && *i < off + rows), "tabulated value has the wrong degree");
            cols.push(v.into_iter().map(|(i, x)| (i - off, x)).collect());
        });
        blocks.insert(d, SparseMatrix::from_columns(field, rows, cols));
    }
    MultiMap { basis: basis.clone(), map: GradedMap::from_blocks_unchecked(basis.module(), target, degree, blocks) }
}

/// A tensor factor in an interleaved evaluation.
#[derive(Clone, Copy)]
pub enum Block<'a> {
    Id,
    Map(&'a MultiMap),
}

impl Block<'_> {
    fn arity(&self) -> usize {
        match self {
            Block::Id => 1,
            Block::Map(f) => f.arity(),
        }
    }

    fn degree(&self) -> i32 {
        match self {
            Block::Id => 0,
            Block::Map(f) => f.degree(),
        }
    }
}

pub fn parity(e: i64) -> bool {
    e.rem_euclid(2) == 1
}

/// `(f₁ ⊗ ⋯ ⊗ f_p)(x)` with the Koszul sign: block `j` contributes
/// `(−1)^{|f_j|·(total degree of the inputs left of it)}`. `degs` are the
/// degrees of the entries of `x`. Calls `out(tuple, coeff)` per output tensor.
pub fn block_apply(blocks: &[Block<'_>], degs: &[i32], x: &[usize], field: Field, mut out: impl FnMut(&[usize], &FieldElement)) {
    debug_assert_eq!(blocks.iter().map(|b| b.arity()).sum::<usize>(), x.len());
    let mut sign = 0i64;
    let mut left = 0i64;
    let mut pos = 0;
    let mut cols: Vec<Vec<(usize, FieldElement)>> = Vec::with_capacity(blocks.len());
    for b in blocks {
        let a = b.arity();
        sign += b.degree() as i64 * left;
        match b {
            Block::Id => cols.push(vec![(x[pos], field.one())]),
            Block::Map(f) => {
                let c: Vec<_> = f.eval(&x[pos..pos + a]).iter().map(|(i, v)| (i, v.clone())).collect();
                if c.is_empty() {
                    return;
                }
                cols.push(c);
            }
        }
        left += degs[pos..pos + a].iter().map(|&d| d as i64).sum::<i64>();
        pos += a;
    }
    let s = field.sign(sign);
    let mut tuple = vec![0; blocks.len()];
    let mut choice = vec![0; blocks.len()];
    loop {
        let mut c = s.clone();
        for (j, col) in cols.iter().enumerate() {
            let (i, v) = &col[choice[j]];
            tuple[j] = *i;
            c = &c * v;
        }
        out(&tuple, &c);
        let mut j = blocks.len();
        loop {
            if j == 0 {
                return;
            }
            j -= 1;
            choice[j] += 1;
            if choice[j] < cols[j].len() {
                break;
            }
            choice[j] = 0;
        }
    }
}

/// `(id^{⊗u} ⊗ f ⊗ id^{⊗w})(x)` with sign `(−1)^{|f|·(|x₁|+⋯+|x_u|)}`.
pub fn koszul_apply(f: &MultiMap, u: usize, degs: &[i32], x: &[usize], mut out: impl FnMut(&[usize], &FieldElement)) {
    let a = f.arity();
    let col = f.eval(&x[u..u + a]);
    if col.is_empty() {
        return;
    }
    let left: i64 = degs[..u].iter().map(|&d| d as i64).sum();
    let s = f.field().sign(f.degree() as i64 * left);
    let mut tuple = Vec::with_capacity(x.len() + 1 - a);
    tuple.extend_from_slice(&x[..u]);
    tuple.push(0);
    tuple.extend_from_slice(&x[u + a..]);
    for (i, v) in col.iter() {
        tuple[u] = i;
        out(&tuple, &(&s * v));
    }
}

/// All compositions of `k` into `p` positive parts, lexicographically.
pub fn compositions(k: usize, p: usize) -> Vec<Vec<usize>> {
    fn go(k: usize, p: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if p == 0 {
            if k == 0 {
                out.push(cur.clone());
            }
            return;
        }
        for a in 1..=k.saturating_sub(p - 1) {
            cur.push(a);
            go(k - a, p - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(k, p, &mut Vec::new(), &mut out);
    out
}

/// `t₁(α) = Σ_ℓ (p−ℓ)(α_ℓ−1)`, as a parity.
pub fn t1(alpha: &[usize]) -> bool {
    let p = alpha.len();
    parity(alpha.iter().enumerate().map(|(l, &a)| ((p - l - 1) * (a - 1)) as i64).sum())
}

/// `t₂(α, β) = t₁(α) + t₁(β) + (u−p)(q+1)`, as a parity.
pub fn t2(alpha: &[usize], beta: &[usize], u: usize, p: usize, q: usize) -> bool {
    t1(alpha) ^ t1(beta) ^ parity((u as i64 - p as i64) * (q as i64 + 1))
}

/// The differential of a tensor product of complexes,
/// `Σ_j (−1)^{|x₁|+⋯+|x_{j−1}|} x₁ ⊗ ⋯ ⊗ ∂x_j ⊗ ⋯ ⊗ x_k`, optionally truncated
/// to the degrees in `window`.
pub fn tensor_power_complex(basis: &Arc<TensorBasis>, factors: &[&ChainComplex], window: Option<(i32, i32)>) -> ChainComplex {
    assert_eq!(basis.arity(), factors.len());
    let diffs: Vec<MultiMap> = factors.iter().map(|c| MultiMap::unary(c.differential())).collect();
    let module = match window {
        Some((lo, hi)) => basis.module().restrict(lo, hi),
        None => basis.module().clone(),
    };
    let w = window.map(|(lo, hi)| (lo + 1, hi));
    let field = basis.field();
    let m = tabulate(basis, basis.module(), -1, w, |x, sink| {
        let degs = basis.degrees(x);
        let mut t = x.to_vec();
        let mut left = 0i64;
        for (j, dj) in diffs.iter().enumerate() {
            let s = field.sign(left);
            let orig = x[j];
            for (i, v) in dj.eval(&x[j..j + 1]).iter() {
                t[j] = i;
                sink.add(basis.global_index(&t), &(&s * v));
            }
            t[j] = orig;
            left += degs[j] as i64;
        }
    });
    let map = m.map.restrict_source(&module).with_modules(&module, &module);
    ChainComplex::from_differential_unchecked(map)
}

/// Kinds of maps related to the bar construction by suspension.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ShiftKind {
    /// `m_k Σ^{⊗k} = −Σ μ_k`.
    Multiplication,
    /// `f_k Σ^{⊗k} = Σ φ_k`.
    Morphism,
    /// `s_k Σ^{⊗k} = −Σ σ_k`.
    Homotopy,
    /// `m^M_k (Σ^{⊗(k−1)} ⊗ id) = (−1)^{k−1} μ^M_k`; the last factor stays unshifted.
    Module,
}

impl ShiftKind {
    fn suspended_factors(self, k: usize) -> usize {
        if self == ShiftKind::Module { k - 1 } else { k }
    }

    fn target_shift(self) -> i32 {
        if self == ShiftKind::Module { 0 } else { 1 }
    }

    fn global_sign(self, k: usize) -> i64 {
        match self {
            ShiftKind::Multiplication | ShiftKind::Homotopy => 1,
            ShiftKind::Morphism => 0,
            ShiftKind::Module => k as i64 - 1,
        }
    }
}

/// Sign of `Σ^{⊗s}` on the unshifted tensor with degrees `degs`: the `j`-th
/// suspension is moved past each of the first `j−1` entries.
pub fn suspension_sign(degs: &[i32], s: usize) -> i64 {
    let mut e = 0i64;
    for j in 0..s {
        for d in &degs[..j] {
            e += *d as i64;
        }
    }
    e
}

fn reshift(f: &MultiMap, kind: ShiftKind, from: &Arc<TensorBasis>, to: Arc<TensorBasis>, target: GradedModule, ds: i32, dt: i32, unshifted_degs: impl Fn(&[usize]) -> Vec<i32>) -> MultiMap {
    let k = f.arity();
    let s = kind.suspended_factors(k);
    let field = f.field();
    let mut blocks = BTreeMap::new();
    for (d, b) in f.map.blocks() {
        let mut cols = Vec::with_capacity(b.cols());
        from.for_each(*d, |j, x| {
            let e = suspension_sign(&unshifted_degs(x), s) + kind.global_sign(k);
            cols.push(b.column(j).iter().map(|(i, v)| (*i, if parity(e) { -v } else { v.clone() })).collect());
        });
        blocks.insert(d + ds, SparseMatrix::from_columns(field, b.rows(), cols));
    }
    let map = GradedMap::from_blocks_unchecked(to.module(), &target, f.degree() + dt - ds, blocks);
    MultiMap { basis: to, map }
}

/// The shifted map on suspended factors corresponding to `f`.
pub fn shift_to_bar(f: &MultiMap, kind: ShiftKind) -> MultiMap {
    let k = f.arity();
    let s = kind.suspended_factors(k);
    let to = Arc::new(f.basis.suspended(s));
    let basis = f.basis.clone();
    let dt = kind.target_shift();
    reshift(f, kind, &basis, to, f.target().shift(dt), s as i32, dt, |x| basis.degrees(x))
}

/// Inverse of [`shift_to_bar`]; `f` lives on suspended factors.
pub fn unshift_from_bar(f: &MultiMap, kind: ShiftKind) -> MultiMap {
    let k = f.arity();
    let s = kind.suspended_factors(k);
    let factors: Vec<GradedModule> = f.basis.factors().iter().enumerate().map(|(i, m)| if i < s { m.shift(-1) } else { m.clone() }).collect();
    let to = Arc::new(TensorBasis::new(factors));
    let dt = kind.target_shift();
    let basis = f.basis.clone();
    let unshifted = |x: &[usize]| -> Vec<i32> { basis.degrees(x).iter().enumerate().map(|(i, d)| if i < s { d - 1 } else { *d }).collect() };
    reshift(f, kind, &f.basis.clone(), to, f.target().shift(-dt), -(s as i32), -dt, unshifted)
}

/// `Σ_{u+v+w=k} m_{u+1+w}(id^{⊗u} ⊗ m_v ⊗ id^{⊗w})`, the arity-`k` component
/// of `D²` for `D = cder(m₁, …)`. `ms[j]` is `m_{j+1}`; missing arities are zero.
pub fn cder_square_component(ms: &[MultiMap], k: usize) -> MultiMap {
    let base = ms[0].basis().factor(0).clone();
    let basis = Arc::new(TensorBasis::power(&base, k));
    cder_square_on(ms, &basis, None)
}

fn cder_square_on(ms: &[MultiMap], basis: &Arc<TensorBasis>, window: Option<(i32, i32)>) -> MultiMap {
    let k = basis.arity();
    let target = ms[0].target().clone();
    let get = |a: usize| ms.get(a - 1);
    tabulate(basis, &target, -2, window, |x, sink| {
        let degs = basis.degrees(x);
        for v in 1..=k {
            let Some(inner) = get(v) else { continue };
            for u in 0..=k - v {
                let Some(outer) = get(k - v + 1) else { continue };
                koszul_apply(inner, u, &degs, x, |t, c| sink.add_column(outer.eval(t), c));
            }
        }
    })
}

/// Arity-`k` component of `cmor(g) ∘ cmor(f)` composed to `ΣC`:
/// `Σ_p Σ_{|α|=k} g_p f^{⊗α}` (shifted maps, Koszul signs only).
pub fn cmor_composite_component(gs: &[MultiMap], fs: &[MultiMap], k: usize) -> MultiMap {
    let base = fs[0].basis().factor(0).clone();
    let basis = Arc::new(TensorBasis::power(&base, k));
    let target = gs[0].target().clone();
    let field = basis.field();
    tabulate(&basis, &target, 0, None, |x, sink| {
        let degs = basis.degrees(x);
        for p in 1..=k.min(gs.len()) {
            for alpha in compositions(k, p) {
                if alpha.iter().any(|&a| a > fs.len()) {
                    continue;
                }
                let blocks: Vec<Block> = alpha.iter().map(|&a| Block::Map(&fs[a - 1])).collect();
                block_apply(&blocks, &degs, x, field, |t, c| sink.add_column(gs[p - 1].eval(t), c));
            }
        }
    })
}

/// Shifted morphism identity defect at arity `k`:
/// `Σ f_{u+1+w}(id^{⊗u} ⊗ m^A_v ⊗ id^{⊗w}) − Σ_p Σ_α m^B_p f^{⊗α}`.
pub fn cmor_component(fs: &[MultiMap], ma: &[MultiMap], mb: &[MultiMap], k: usize) -> MultiMap {
    let base = fs[0].basis().factor(0).clone();
    let basis = Arc::new(TensorBasis::power(&base, k));
    let target = fs[0].target().clone();
    let field = basis.field();
    let minus = field.from_i64(-1);
    tabulate(&basis, &target, -1, None, |x, sink| {
        let degs = basis.degrees(x);
        for v in 1..=k.min(ma.len()) {
            let Some(outer) = fs.get(k - v) else { continue };
            for u in 0..=k - v {
                koszul_apply(&ma[v - 1], u, &degs, x, |t, c| sink.add_column(outer.eval(t), c));
            }
        }
        for p in 1..=k.min(mb.len()) {
            for alpha in compositions(k, p) {
                if alpha.iter().any(|&a| a > fs.len()) {
                    continue;
                }
                let blocks: Vec<Block> = alpha.iter().map(|&a| Block::Map(&fs[a - 1])).collect();
                block_apply(&blocks, &degs, x, field, |t, c| sink.add_column(mb[p - 1].eval(t), &(c * &minus)));
            }
        }
    })
}

/// Shifted homotopy identity defect at arity `k`:
/// `f_k − g_k − Σ s(…m^A…) − Σ m^B(f^{⊗α} ⊗ s_v ⊗ g^{⊗β})`.
pub fn cder_homotopy_component(fs: &[MultiMap], gs: &[MultiMap], ss: &[MultiMap], ma: &[MultiMap], mb: &[MultiMap], k: usize) -> MultiMap {
    let base = fs[0].basis().factor(0).clone();
    let basis = Arc::new(TensorBasis::power(&base, k));
    let target = fs[0].target().clone();
    let field = basis.field();
    let minus = field.from_i64(-1);
    tabulate(&basis, &target, 0, None, |x, sink| {
        let degs = basis.degrees(x);
        let one = field.one();
        if let (Some(f), Some(g)) = (fs.get(k - 1), gs.get(k - 1)) {
            sink.add_column(f.eval(x), &one);
            sink.add_column(g.eval(x), &minus);
        }
        for v in 1..=k.min(ma.len()) {
            let Some(outer) = ss.get(k - v) else { continue };
            for u in 0..=k - v {
                koszul_apply(&ma[v - 1], u, &degs, x, |t, c| sink.add_column(outer.eval(t), &(c * &minus)));
            }
        }
        for_each_htpy_term(fs, gs, ss, k, mb.len(), |u, alpha, v, beta| {
            let mut blocks: Vec<Block> = alpha.iter().map(|&a| Block::Map(&fs[a - 1])).collect();
            blocks.push(Block::Map(&ss[v - 1]));
            blocks.extend(beta.iter().map(|&b| Block::Map(&gs[b - 1])));
            let _ = u;
            let outer = &mb[alpha.len() + beta.len()];
            block_apply(&blocks, &degs, x, field, |t, c| sink.add_column(outer.eval(t), &(c * &minus)));
        });
    })
}

/// Enumerates `(u, α, v, β)` with `u+v+w = k`, `|α| = u`, `|β| = w`, all parts
/// available in the tables and `p+1+q ≤ outer_len`.
pub(crate) fn for_each_htpy_term(fs: &[MultiMap], gs: &[MultiMap], ss: &[MultiMap], k: usize, outer_len: usize, mut f: impl FnMut(usize, &[usize], usize, &[usize])) {
    for v in 1..=k.min(ss.len()) {
        for u in 0..=k - v {
            let w = k - v - u;
            for p in 0..=u {
                for alpha in compositions(u, p) {
                    if alpha.iter().any(|&a| a > fs.len()) {
                        continue;
                    }
                    for q in 0..=w {
                        if p + 1 + q > outer_len {
                            continue;
                        }
                        for beta in compositions(w, q) {
                            if beta.iter().any(|&b| b > gs.len()) {
                                continue;
                            }
                            f(u, &alpha, v, &beta);
                        }
                    }
                }
            }
        }
    }
}

/// Shifted module identity at arity `k`: `Σ m^M_{u+1+w}(id^{⊗u} ⊗ m_v ⊗ id^{⊗w})`
/// where the inner map is `m^A_v` when it avoids the module factor and
/// `m^M_v` when it ends on it. `mm[j]` is `m^M_{j+1}`, `ma[j]` is `m^A_{j+1}`.
pub fn module_square_component(ma: &[MultiMap], mm: &[MultiMap], k: usize) -> MultiMap {
    let basis = mm[k - 1].basis().clone();
    module_square_on(ma, mm, &basis)
}

pub(crate) fn module_square_on(ma: &[MultiMap], mm: &[MultiMap], basis: &Arc<TensorBasis>) -> MultiMap {
    let k = basis.arity();
    let target = mm[0].target().clone();
    tabulate(basis, &target, -2, None, |x, sink| {
        let degs = basis.degrees(x);
        for v in 1..=k {
            for u in 0..=k - v {
                let w = k - v - u;
                let Some(outer) = mm.get(u + w) else { continue };
                let inner = if w == 0 { mm.get(v - 1) } else { ma.get(v - 1) };
                let Some(inner) = inner else { continue };
                koszul_apply(inner, u, &degs, x, |t, c| sink.add_column(outer.eval(t), c));
            }
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactlin::Matrix;

    fn q() -> Field {
        Field::Rational
    }

    fn module(ranks: &[(i32, usize)]) -> GradedModule {
        GradedModule::new(q(), ranks.iter().copied())
    }

    /// A unary multimap of the given degree with every entry equal to 1.
    fn ones(m: &GradedModule, degree: i32) -> MultiMap {
        let basis = Arc::new(TensorBasis::new(vec![m.clone()]));
        tabulate(&basis, m, degree, None, |x, sink| {
            let d = m.degree_of(x[0]) + degree;
            for i in 0..m.rank(d) {
                sink.add(m.offset(d) + i, &q().one());
            }
        })
    }

    #[test]
    fn tensor_index_matches_enumeration() {
        let a = module(&[(-1, 2), (0, 1), (2, 3)]);
        let b = module(&[(0, 2), (1, 1)]);
        let basis = TensorBasis::new(vec![a.clone(), b.clone(), a.clone()]);
        assert_eq!(basis.module().total_rank(), 6 * 3 * 6);
        for (d, r) in basis.module().degrees() {
            let ts = basis.tuples(d);
            assert_eq!(ts.len(), r);
            for (j, t) in ts.iter().enumerate() {
                assert_eq!(basis.index(t), (d, j));
            }
            let mut sorted = ts.clone();
            sorted.sort();
            assert_eq!(sorted, ts);
        }
    }

    #[test]
    fn koszul_examples() {
        let a = module(&[(1, 1), (2, 1)]);
        let basis = TensorBasis::power(&a, 2);
        let x = [0, 1];
        let degs = basis.degrees(&x);
        assert_eq!(degs, vec![1, 2]);
        let f0 = ones(&a, 0);
        let mut got = Vec::new();
        koszul_apply(&f0, 1, &degs, &x, |t, c| got.push((t.to_vec(), c.clone())));
        assert_eq!(got, vec![(vec![0, 1], q().one())]);
        let f1 = ones(&a, 1);
        got.clear();
        koszul_apply(&f1, 1, &degs, &[0, 0], |t, c| got.push((t.to_vec(), c.clone())));
        assert_eq!(got, vec![(vec![0, 1], q().from_i64(-1))]);
        let b = module(&[(0, 1), (1, 1), (2, 1)]);
        let fm = ones(&b, -1);
        let basis3 = TensorBasis::power(&b, 3);
        let x = [1, 2, 1];
        got.clear();
        koszul_apply(&fm, 2, &basis3.degrees(&x), &x, |t, c| got.push((t.to_vec(), c.clone())));
        assert_eq!(got, vec![(vec![1, 2, 0], q().from_i64(-1))]);
    }

    #[test]
    fn block_apply_examples() {
        let a = module(&[(1, 1), (2, 1)]);
        let f = ones(&a, 1);
        let mut got = Vec::new();
        block_apply(&[Block::Map(&f), Block::Map(&f)], &[1, 1], &[0, 0], q(), |t, c| got.push((t.to_vec(), c.clone())));
        assert_eq!(got, vec![(vec![1, 1], q().from_i64(-1))]);
        got.clear();
        block_apply(&[Block::Map(&f)], &[1], &[0], q(), |t, c| got.push((t.to_vec(), c.clone())));
        assert_eq!(got, vec![(vec![1], q().one())]);
        let g = ones(&a, 0);
        got.clear();
        block_apply(&[Block::Map(&g), Block::Id], &[1, 1], &[0, 0], q(), |t, c| got.push((t.to_vec(), c.clone())));
        assert_eq!(got, vec![(vec![0, 0], q().one())]);
    }

    #[test]
    fn parity_examples() {
        assert!(!t1(&[1, 1, 1]));
        assert!(t1(&[2, 1]));
        assert!(!t1(&[4]));
        assert!(!t2(&[], &[], 0, 0, 0));
        assert!(!t2(&[1], &[1], 1, 1, 1));
        assert!(t2(&[2], &[], 2, 1, 0));
        assert_eq!(compositions(3, 2), vec![vec![1, 2], vec![2, 1]]);
        assert_eq!(compositions(0, 0), vec![Vec::<usize>::new()]);
        assert!(compositions(2, 3).is_empty());
    }

    #[test]
    fn shift_round_trip_and_differential_sign() {
        let a = module(&[(0, 2), (1, 1)]);
        let basis = Arc::new(TensorBasis::power(&a, 2));
        let mu = tabulate(&basis, &a, 0, None, |x, sink| {
            let d = basis.degrees(x).iter().sum::<i32>();
            for i in 0..a.rank(d) {
                sink.add(a.offset(d) + i, &q().from_i64((x[0] * 3 + x[1] + i) as i64 + 1));
            }
        });
        for kind in [ShiftKind::Multiplication, ShiftKind::Morphism, ShiftKind::Homotopy, ShiftKind::Module] {
            assert_eq!(unshift_from_bar(&shift_to_bar(&mu, kind), kind), mu);
        }
        let cx = ChainComplex::from_i64(q(), &[(0, 1), (1, 1)], &[(1, &[&[1]])]).unwrap();
        let m1 = shift_to_bar(&MultiMap::unary(cx.differential()), ShiftKind::Multiplication);
        assert_eq!(m1.map().block_or_zero(2).to_dense(), Matrix::from_i64(q(), &[&[-1]]));
        let f1 = shift_to_bar(&MultiMap::unary(cx.differential()), ShiftKind::Morphism);
        assert_eq!(f1.map().block_or_zero(2).to_dense(), Matrix::from_i64(q(), &[&[1]]));
    }

    #[test]
    fn tensor_power_differential_squares_to_zero() {
        let k = ChainComplex::from_i64(q(), &[(0, 1), (1, 2), (2, 1)], &[(1, &[&[1, 0]]), (2, &[&[0], &[1]])]).unwrap();
        let basis = Arc::new(TensorBasis::power(k.module(), 3));
        let t = tensor_power_complex(&basis, &[&k, &k, &k], None);
        assert!(ChainComplex::from_differential(t.differential().clone()).is_ok());
        let w = tensor_power_complex(&basis, &[&k, &k, &k], Some((2, 4)));
        assert_eq!(w.module().bottom(), Some(2));
        assert!(w.differential().block(2).is_none());
        assert_eq!(w.differential().block(3), t.differential().block(3));
    }
}
