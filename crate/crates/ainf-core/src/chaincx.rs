//! Graded modules, graded maps and bounded chain complexes (lower grading,
//! differential of degree −1), with Hom differentials, tensor products,
//! suspension, cones, cocylinders and homology.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::exactlin::{Field, FieldElement, Matrix, SparseMatrix};
use crate::signs::TensorBasis;
use crate::{Error, Result};

#[derive(Debug, PartialEq, Eq, Hash)]
struct ModuleInner {
    field: Field,
    /// `(degree, rank, offset)` for each degree of nonzero rank, ascending.
    pieces: Vec<(i32, usize, usize)>,
}

/// A graded free module of finite total rank with a fixed basis.
///
/// Basis elements are globally ordered by degree, then by index; the global
/// index of `(d, i)` is the total rank below `d` plus `i`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GradedModule(Arc<ModuleInner>);

impl GradedModule {
    pub fn new(field: Field, ranks: impl IntoIterator<Item = (i32, usize)>) -> GradedModule {
        let mut m: BTreeMap<i32, usize> = BTreeMap::new();
        for (d, r) in ranks {
            *m.entry(d).or_default() += r;
        }
        let mut pieces = Vec::new();
        let mut off = 0;
        for (d, r) in m {
            if r > 0 {
                pieces.push((d, r, off));
                off += r;
            }
        }
        GradedModule(Arc::new(ModuleInner { field, pieces }))
    }

    pub fn zero(field: Field) -> GradedModule {
        GradedModule::new(field, [])
    }

    pub fn field(&self) -> Field {
        self.0.field
    }

    pub fn rank(&self, d: i32) -> usize {
        match self.0.pieces.binary_search_by_key(&d, |p| p.0) {
            Ok(k) => self.0.pieces[k].1,
            Err(_) => 0,
        }
    }

    /// Degrees of nonzero rank with their ranks, ascending.
    pub fn degrees(&self) -> impl Iterator<Item = (i32, usize)> + '_ {
        self.0.pieces.iter().map(|p| (p.0, p.1))
    }

    pub fn total_rank(&self) -> usize {
        self.0.pieces.last().map_or(0, |p| p.2 + p.1)
    }

    pub fn is_zero(&self) -> bool {
        self.0.pieces.is_empty()
    }

    pub fn bottom(&self) -> Option<i32> {
        self.0.pieces.first().map(|p| p.0)
    }

    pub fn top(&self) -> Option<i32> {
        self.0.pieces.last().map(|p| p.0)
    }

    pub fn offset(&self, d: i32) -> usize {
        match self.0.pieces.binary_search_by_key(&d, |p| p.0) {
            Ok(k) => self.0.pieces[k].2,
            Err(k) => self.0.pieces.get(k).map_or(self.total_rank(), |p| p.2),
        }
    }

    pub fn global(&self, d: i32, i: usize) -> usize {
        debug_assert!(i < self.rank(d));
        self.offset(d) + i
    }

    /// `(degree, index)` of a global basis index.
    pub fn local(&self, g: usize) -> (i32, usize) {
        let k = self.0.pieces.partition_point(|p| p.2 <= g) - 1;
        let p = self.0.pieces[k];
        (p.0, g - p.2)
    }

    pub fn degree_of(&self, g: usize) -> i32 {
        self.local(g).0
    }

    /// The module with every degree raised by `r`.
    pub fn shift(&self, r: i32) -> GradedModule {
        GradedModule::new(self.field(), self.degrees().map(|(d, n)| (d + r, n)))
    }

    pub fn restrict(&self, lo: i32, hi: i32) -> GradedModule {
        GradedModule::new(self.field(), self.degrees().filter(|(d, _)| *d >= lo && *d <= hi))
    }

    pub fn direct_sum(parts: &[&GradedModule]) -> GradedModule {
        let field = parts[0].field();
        GradedModule::new(field, parts.iter().flat_map(|m| m.degrees().collect::<Vec<_>>()))
    }

    pub fn ranks(&self) -> BTreeMap<i32, usize> {
        self.degrees().collect()
    }
}

/// A homogeneous map between graded modules, stored as one sparse matrix per
/// source degree. Missing blocks are zero.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GradedMap {
    source: GradedModule,
    target: GradedModule,
    degree: i32,
    blocks: BTreeMap<i32, SparseMatrix>,
}

impl GradedMap {
    pub fn zero(source: &GradedModule, target: &GradedModule, degree: i32) -> GradedMap {
        GradedMap { source: source.clone(), target: target.clone(), degree, blocks: BTreeMap::new() }
    }

    pub fn identity(m: &GradedModule) -> GradedMap {
        let blocks = m.degrees().map(|(d, r)| (d, SparseMatrix::identity(m.field(), r))).collect();
        GradedMap { source: m.clone(), target: m.clone(), degree: 0, blocks }
    }

    /// Checks block shapes and drops zero blocks.
    pub fn from_blocks(source: &GradedModule, target: &GradedModule, degree: i32, blocks: BTreeMap<i32, SparseMatrix>) -> Result<GradedMap> {
        let mut kept = BTreeMap::new();
        for (d, b) in blocks {
            let (r, c) = (target.rank(d + degree), source.rank(d));
            if b.rows() != r || b.cols() != c {
                return Err(Error::Mismatch(format!(
                    "block at degree {d} has shape {}x{}, expected {r}x{c}",
                    b.rows(),
                    b.cols()
                )));
            }
            if b.field() != source.field() {
                return Err(Error::Lin(crate::exactlin::LinError::FieldMismatch));
            }
            if !b.is_zero() {
                kept.insert(d, b);
            }
        }
        Ok(GradedMap { source: source.clone(), target: target.clone(), degree, blocks: kept })
    }

    pub(crate) fn from_blocks_unchecked(source: &GradedModule, target: &GradedModule, degree: i32, blocks: BTreeMap<i32, SparseMatrix>) -> GradedMap {
        let blocks = blocks.into_iter().filter(|(_, b)| !b.is_zero()).collect();
        GradedMap { source: source.clone(), target: target.clone(), degree, blocks }
    }

    pub fn source(&self) -> &GradedModule {
        &self.source
    }

    pub fn target(&self) -> &GradedModule {
        &self.target
    }

    pub fn degree(&self) -> i32 {
        self.degree
    }

    pub fn field(&self) -> Field {
        self.source.field()
    }

    pub fn block(&self, d: i32) -> Option<&SparseMatrix> {
        self.blocks.get(&d)
    }

    pub fn blocks(&self) -> &BTreeMap<i32, SparseMatrix> {
        &self.blocks
    }

    /// The block at source degree `d`, materialised as zero if absent.
    pub fn block_or_zero(&self, d: i32) -> SparseMatrix {
        self.blocks.get(&d).cloned().unwrap_or_else(|| SparseMatrix::zeros(self.field(), self.target.rank(d + self.degree), self.source.rank(d)))
    }

    pub fn is_zero(&self) -> bool {
        self.blocks.values().all(|b| b.is_zero())
    }

    /// First nonzero entry as `(source degree, row, column, value)`.
    pub fn first_nonzero(&self) -> Option<(i32, usize, usize, FieldElement)> {
        self.blocks.iter().find_map(|(d, b)| b.first_nonzero().map(|(i, j, x)| (*d, i, j, x)))
    }

    /// Image of the basis element `j` of degree `d`, as local indices in degree `d + degree`.
    pub fn column(&self, d: i32, j: usize) -> &[(usize, FieldElement)] {
        self.blocks.get(&d).map_or(&[], |b| b.column(j))
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &GradedMap) -> GradedMap {
        assert_eq!(other.target, self.source, "composition of incompatible graded maps");
        let mut blocks = BTreeMap::new();
        for (d, b) in &other.blocks {
            if let Some(a) = self.blocks.get(&(d + other.degree)) {
                let p = a.mul(b);
                if !p.is_zero() {
                    blocks.insert(*d, p);
                }
            }
        }
        GradedMap { source: other.source.clone(), target: self.target.clone(), degree: self.degree + other.degree, blocks }
    }

    /// `self + c · other`.
    pub fn add_scaled(&self, other: &GradedMap, c: &FieldElement) -> GradedMap {
        assert!(self.source == other.source && self.target == other.target && self.degree == other.degree, "sum of incompatible graded maps");
        let mut blocks = self.blocks.clone();
        for (d, b) in &other.blocks {
            let s = match blocks.get(d) {
                Some(a) => a.add_scaled(b, c),
                None => b.scale(c),
            };
            if s.is_zero() {
                blocks.remove(d);
            } else {
                blocks.insert(*d, s);
            }
        }
        GradedMap { source: self.source.clone(), target: self.target.clone(), degree: self.degree, blocks }
    }

    pub fn add(&self, other: &GradedMap) -> GradedMap {
        self.add_scaled(other, &self.field().one())
    }

    pub fn sub(&self, other: &GradedMap) -> GradedMap {
        self.add_scaled(other, &self.field().from_i64(-1))
    }

    pub fn scale(&self, c: &FieldElement) -> GradedMap {
        let blocks = if c.is_zero() { BTreeMap::new() } else { self.blocks.iter().map(|(d, b)| (*d, b.scale(c))).collect() };
        GradedMap { source: self.source.clone(), target: self.target.clone(), degree: self.degree, blocks }
    }

    pub fn neg(&self) -> GradedMap {
        self.scale(&self.field().from_i64(-1))
    }

    /// Reinterprets the same matrices between re-graded modules: source
    /// degrees move by `ds`, target degrees by `dt`.
    pub fn regrade(&self, ds: i32, dt: i32) -> GradedMap {
        let blocks = self.blocks.iter().map(|(d, b)| (d + ds, b.clone())).collect();
        GradedMap { source: self.source.shift(ds), target: self.target.shift(dt), degree: self.degree + dt - ds, blocks }
    }

    /// Restriction to a source module that agrees with the current one in
    /// every degree it supports.
    pub fn restrict_source(&self, m: &GradedModule) -> GradedMap {
        let blocks = self.blocks.iter().filter(|(d, _)| m.rank(**d) > 0).map(|(d, b)| (*d, b.clone())).collect();
        GradedMap { source: m.clone(), target: self.target.clone(), degree: self.degree, blocks }
    }

    /// Same matrices, new (equal-ranked) endpoints.
    pub fn with_modules(&self, source: &GradedModule, target: &GradedModule) -> GradedMap {
        GradedMap { source: source.clone(), target: target.clone(), degree: self.degree, blocks: self.blocks.clone() }
    }
}

/// A bounded chain complex: a graded module with a differential of degree −1
/// squaring to zero.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChainComplex {
    differential: GradedMap,
}

impl ChainComplex {
    /// Validates `∂∘∂ = 0`; `blocks[i]` maps degree `i` to degree `i − 1`.
    pub fn new(module: &GradedModule, blocks: BTreeMap<i32, SparseMatrix>) -> Result<ChainComplex> {
        let differential = GradedMap::from_blocks(module, module, -1, blocks)?;
        ChainComplex::from_differential(differential)
    }

    pub fn from_differential(differential: GradedMap) -> Result<ChainComplex> {
        if differential.source != differential.target || differential.degree != -1 {
            return Err(Error::Mismatch("a differential is an endomorphism of degree -1".into()));
        }
        let sq = differential.compose(&differential);
        if let Some((d, ..)) = sq.first_nonzero() {
            return Err(Error::NotComplex(d));
        }
        Ok(ChainComplex { differential })
    }

    pub(crate) fn from_differential_unchecked(differential: GradedMap) -> ChainComplex {
        debug_assert!(differential.compose(&differential).is_zero());
        ChainComplex { differential }
    }

    pub fn with_zero_differential(module: &GradedModule) -> ChainComplex {
        ChainComplex { differential: GradedMap::zero(module, module, -1) }
    }

    pub fn from_i64(field: Field, ranks: &[(i32, usize)], diffs: &[(i32, &[&[i64]])]) -> Result<ChainComplex> {
        let module = GradedModule::new(field, ranks.iter().copied());
        let blocks = diffs.iter().map(|(d, m)| (*d, SparseMatrix::from_dense(&Matrix::from_i64(field, m)))).collect();
        ChainComplex::new(&module, blocks)
    }

    pub fn module(&self) -> &GradedModule {
        &self.differential.source
    }

    pub fn field(&self) -> Field {
        self.module().field()
    }

    pub fn differential(&self) -> &GradedMap {
        &self.differential
    }

    pub fn is_zero(&self) -> bool {
        self.module().is_zero()
    }

    /// `M[r]` with `M[r]_i = M_{i−r}` and differential `(−1)^r ∂`.
    pub fn shift(&self, r: i32) -> ChainComplex {
        let d = self.differential.regrade(r, r).scale(&self.field().sign(r as i64));
        ChainComplex { differential: d }
    }

    pub fn restrict(&self, lo: i32, hi: i32) -> ChainComplex {
        let m = self.module().restrict(lo, hi);
        let blocks = self.differential.blocks.iter().filter(|(d, _)| **d > lo && **d <= hi).map(|(d, b)| (*d, b.clone())).collect();
        ChainComplex { differential: GradedMap { source: m.clone(), target: m, degree: -1, blocks } }
    }
}

/// `∂^N f − (−1)^{|f|} f ∂^M`.
pub fn hom_differential(f: &GradedMap, m: &ChainComplex, n: &ChainComplex) -> Result<GradedMap> {
    if f.source() != m.module() || f.target() != n.module() {
        return Err(Error::Mismatch("graded map does not match the given complexes".into()));
    }
    let s = f.field().sign(f.degree() as i64 + 1);
    Ok(n.differential().compose(f).add_scaled(&f.compose(m.differential()), &s))
}

pub fn is_chain_map(f: &GradedMap, m: &ChainComplex, n: &ChainComplex) -> Result<bool> {
    Ok(f.degree() == 0 && hom_differential(f, m, n)?.is_zero())
}

/// `ΣM` with `(ΣM)_i = M_{i−1}` and `∂^{ΣM} = −∂^M`.
pub fn suspend(m: &ChainComplex) -> ChainComplex {
    m.shift(1)
}

/// `M ⊗ N` with the Koszul differential `∂ ⊗ id + id ⊗ ∂`, together with its
/// tensor basis.
pub fn tensor_complex(m: &ChainComplex, n: &ChainComplex) -> Result<(ChainComplex, Arc<TensorBasis>)> {
    if m.field() != n.field() {
        return Err(Error::Lin(crate::exactlin::LinError::FieldMismatch));
    }
    let basis = Arc::new(TensorBasis::new(vec![m.module().clone(), n.module().clone()]));
    let cx = crate::signs::tensor_power_complex(&basis, &[m, n], None);
    Ok((cx, basis))
}

/// Mapping cone of a chain map `f: X → Y`.
#[derive(Clone, Debug)]
pub struct ConeData {
    /// `cone(f)_n = X_{n−1} ⊕ Y_n` with `∂(x, y) = (−∂x, f(x) + ∂y)`.
    pub complex: ChainComplex,
    pub inclusion: GradedMap,
    pub projection: GradedMap,
}

fn check_chain_map(f: &GradedMap, x: &ChainComplex, y: &ChainComplex) -> Result<()> {
    if f.degree() != 0 {
        return Err(Error::Mismatch("expected a degree 0 map".into()));
    }
    let d = hom_differential(f, x, y)?;
    if let Some((deg, ..)) = d.first_nonzero() {
        return Err(Error::NotChainMap(format!("fails at source degree {deg}")));
    }
    Ok(())
}

fn block_ref(m: &GradedMap, d: i32) -> Option<&SparseMatrix> {
    m.block(d)
}

pub fn cone(f: &GradedMap, x: &ChainComplex, y: &ChainComplex) -> Result<ConeData> {
    check_chain_map(f, x, y)?;
    let field = f.field();
    let sx = x.module().shift(1);
    let module = GradedModule::direct_sum(&[&sx, y.module()]);
    let mut blocks = BTreeMap::new();
    let neg_dx = x.differential().neg();
    for (n, _) in module.degrees() {
        let rs = [x.module().rank(n - 2), y.module().rank(n - 1)];
        let cs = [x.module().rank(n - 1), y.module().rank(n)];
        let grid = vec![vec![block_ref(&neg_dx, n - 1), None], vec![block_ref(f, n - 1), block_ref(y.differential(), n)]];
        blocks.insert(n, SparseMatrix::blocks(field, &rs, &cs, &grid));
    }
    let complex = ChainComplex::from_differential(GradedMap::from_blocks_unchecked(&module, &module, -1, blocks))?;
    let mut inc = BTreeMap::new();
    let mut proj = BTreeMap::new();
    let id_y = GradedMap::identity(y.module());
    let id_x = GradedMap::identity(x.module());
    for (n, _) in module.degrees() {
        let (a, b) = (x.module().rank(n - 1), y.module().rank(n));
        inc.insert(n, SparseMatrix::blocks(field, &[a, b], &[b], &[vec![None], vec![block_ref(&id_y, n)]]));
        proj.insert(n, SparseMatrix::blocks(field, &[a], &[a, b], &[vec![block_ref(&id_x, n - 1), None]]));
    }
    let inclusion = GradedMap::from_blocks_unchecked(y.module(), &module, 0, inc.into_iter().filter(|(n, _)| y.module().rank(*n) > 0).collect());
    let projection = GradedMap::from_blocks_unchecked(&module, &sx, 0, proj);
    Ok(ConeData { complex, inclusion, projection })
}

/// Mapping cocylinder of a chain map `g: X → Y`, a factorisation of `g` as a
/// homotopy equivalence followed by a degreewise surjection.
#[derive(Clone, Debug)]
pub struct CocylinderData {
    /// `P_n = Y_{n+1} ⊕ X_n ⊕ Y_n` with `∂(a, x, y) = (−∂a + y − g(x), ∂x, ∂y)`.
    pub complex: ChainComplex,
    /// `x ↦ (0, x, g(x))`.
    pub inclusion: GradedMap,
    /// `(a, x, y) ↦ y`.
    pub projection: GradedMap,
    /// `(a, x, y) ↦ x`.
    pub middle: GradedMap,
    /// `(a, x, y) ↦ (0, 0, a)`, with `id − inclusion ∘ middle = ∂(homotopy)`.
    pub homotopy: GradedMap,
}

pub fn cocylinder(g: &GradedMap, x: &ChainComplex, y: &ChainComplex) -> Result<CocylinderData> {
    check_chain_map(g, x, y)?;
    let field = g.field();
    let (xm, ym) = (x.module(), y.module());
    let module = GradedModule::direct_sum(&[&ym.shift(-1), xm, ym]);
    let id_y = GradedMap::identity(ym);
    let id_x = GradedMap::identity(xm);
    let neg_dy = y.differential().neg();
    let neg_g = g.neg();
    let sizes = |n: i32| [ym.rank(n + 1), xm.rank(n), ym.rank(n)];
    let mut diff = BTreeMap::new();
    for (n, _) in module.degrees() {
        let grid = vec![
            vec![block_ref(&neg_dy, n + 1), block_ref(&neg_g, n), block_ref(&id_y, n)],
            vec![None, block_ref(x.differential(), n), None],
            vec![None, None, block_ref(y.differential(), n)],
        ];
        diff.insert(n, SparseMatrix::blocks(field, &sizes(n - 1), &sizes(n), &grid));
    }
    let complex = ChainComplex::from_differential(GradedMap::from_blocks_unchecked(&module, &module, -1, diff))?;
    let (mut inc, mut proj, mut mid, mut hom) = (BTreeMap::new(), BTreeMap::new(), BTreeMap::new(), BTreeMap::new());
    for (n, _) in module.degrees() {
        let s = sizes(n);
        if xm.rank(n) > 0 {
            inc.insert(n, SparseMatrix::blocks(field, &s, &[s[1]], &[vec![None], vec![block_ref(&id_x, n)], vec![block_ref(g, n)]]));
        }
        proj.insert(n, SparseMatrix::blocks(field, &[s[2]], &s, &[vec![None, None, block_ref(&id_y, n)]]));
        mid.insert(n, SparseMatrix::blocks(field, &[s[1]], &s, &[vec![None, block_ref(&id_x, n), None]]));
        let t = sizes(n + 1);
        hom.insert(n, SparseMatrix::blocks(field, &t, &s, &[vec![None, None, None], vec![None, None, None], vec![block_ref(&id_y, n + 1), None, None]]));
    }
    Ok(CocylinderData {
        inclusion: GradedMap::from_blocks_unchecked(xm, &module, 0, inc),
        projection: GradedMap::from_blocks_unchecked(&module, ym, 0, proj),
        middle: GradedMap::from_blocks_unchecked(&module, xm, 0, mid),
        homotopy: GradedMap::from_blocks_unchecked(&module, &module, 1, hom),
        complex,
    })
}

/// Rank of `ker ∂_i / im ∂_{i+1}` in each degree of nonzero rank.
pub fn homology_ranks(m: &ChainComplex) -> BTreeMap<i32, usize> {
    let d = m.differential();
    let rank = |i: i32| d.block(i).map_or(0, |b| b.to_dense().rank());
    m.module().degrees().map(|(i, r)| (i, r - rank(i) - rank(i + 1))).collect()
}

pub fn is_acyclic(m: &ChainComplex) -> bool {
    homology_ranks(m).values().all(|&r| r == 0)
}

/// A chain map is a quasi-isomorphism iff its cone is acyclic.
pub fn is_quasi_iso(f: &GradedMap, x: &ChainComplex, y: &ChainComplex) -> Result<bool> {
    Ok(is_acyclic(&cone(f, x, y)?.complex))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q() -> Field {
        Field::Rational
    }

    fn k() -> ChainComplex {
        ChainComplex::from_i64(q(), &[(0, 1), (1, 1)], &[(1, &[&[1]])]).unwrap()
    }

    fn dense(m: &GradedMap, d: i32) -> Matrix {
        m.block_or_zero(d).to_dense()
    }

    #[test]
    fn hom_differential_examples() {
        let m = k();
        let id = GradedMap::identity(m.module());
        assert!(hom_differential(&id, &m, &m).unwrap().is_zero());
        assert!(hom_differential(m.differential(), &m, &m).unwrap().is_zero());
        let mut blocks = BTreeMap::new();
        blocks.insert(0, SparseMatrix::identity(q(), 1));
        let f = GradedMap::from_blocks(m.module(), m.module(), 0, blocks).unwrap();
        let df = hom_differential(&f, &m, &m).unwrap();
        assert_eq!(dense(&df, 1), Matrix::from_i64(q(), &[&[-1]]));
        assert!(df.block(0).is_none());
    }

    #[test]
    fn rejects_non_complex() {
        let r = ChainComplex::from_i64(q(), &[(0, 1), (1, 1), (2, 1)], &[(1, &[&[1]]), (2, &[&[1]])]);
        assert_eq!(r.unwrap_err(), Error::NotComplex(2));
    }

    #[test]
    fn suspension_examples() {
        let s = suspend(&k());
        assert_eq!(s.module().ranks(), BTreeMap::from([(1, 1), (2, 1)]));
        assert_eq!(dense(s.differential(), 2), Matrix::from_i64(q(), &[&[-1]]));
        let s2 = suspend(&s);
        assert_eq!(dense(s2.differential(), 3), Matrix::from_i64(q(), &[&[1]]));
        assert!(suspend(&ChainComplex::with_zero_differential(&GradedModule::zero(q()))).is_zero());
    }

    #[test]
    fn tensor_examples() {
        let kk = k();
        let (t, _) = tensor_complex(&kk, &kk).unwrap();
        assert_eq!(t.module().ranks(), BTreeMap::from([(0, 1), (1, 2), (2, 1)]));
        assert_eq!(dense(t.differential(), 1), Matrix::from_i64(q(), &[&[1, 1]]));
        assert_eq!(dense(t.differential(), 2), Matrix::from_i64(q(), &[&[1], &[-1]]));
        let unit = ChainComplex::with_zero_differential(&GradedModule::new(q(), [(0, 1)]));
        let (t, _) = tensor_complex(&kk, &unit).unwrap();
        assert_eq!(t, kk);
    }

    #[test]
    fn cone_examples() {
        let one = ChainComplex::with_zero_differential(&GradedModule::new(q(), [(0, 1)]));
        let c = cone(&GradedMap::identity(one.module()), &one, &one).unwrap();
        assert_eq!(c.complex.module().ranks(), BTreeMap::from([(0, 1), (1, 1)]));
        assert_eq!(dense(c.complex.differential(), 1), Matrix::from_i64(q(), &[&[1]]));
        assert!(is_acyclic(&c.complex));
        let zero = ChainComplex::with_zero_differential(&GradedModule::zero(q()));
        let kk = k();
        let c = cone(&GradedMap::zero(zero.module(), kk.module(), 0), &zero, &kk).unwrap();
        assert_eq!(c.complex, kk);
    }

    #[test]
    fn cocylinder_invariants() {
        let kk = k();
        let id = GradedMap::identity(kk.module());
        let c = cocylinder(&id, &kk, &kk).unwrap();
        assert_eq!(c.projection.compose(&c.inclusion), id);
        let p = &c.complex;
        for m in [&c.inclusion, &c.projection, &c.middle] {
            let (s, t) = if m.source() == kk.module() { (&kk, p) } else { (p, &kk) };
            assert!(is_chain_map(m, s, t).unwrap());
        }
        let diff = GradedMap::identity(p.module()).sub(&c.inclusion.compose(&c.middle));
        assert_eq!(hom_differential(&c.homotopy, p, p).unwrap(), diff);
        for (d, r) in p.module().degrees() {
            assert_eq!(r, kk.module().rank(d + 1) + 2 * kk.module().rank(d));
        }
        let unit = ChainComplex::with_zero_differential(&GradedModule::new(q(), [(0, 1)]));
        let aug = GradedMap::zero(kk.module(), unit.module(), 0);
        let c = cocylinder(&aug, &kk, &unit).unwrap();
        assert!(!is_quasi_iso(&c.projection, &c.complex, &unit).unwrap());
    }

    #[test]
    fn homology_examples() {
        assert!(homology_ranks(&k()).values().all(|&r| r == 0));
        let c = ChainComplex::from_i64(q(), &[(0, 1), (1, 2), (2, 1)], &[(1, &[&[1, 0]]), (2, &[&[0], &[1]])]).unwrap();
        assert!(homology_ranks(&c).values().all(|&r| r == 0));
        let z = ChainComplex::with_zero_differential(&GradedModule::new(q(), [(0, 2), (3, 1)]));
        assert_eq!(homology_ranks(&z), BTreeMap::from([(0, 2), (3, 1)]));
    }

    #[test]
    fn quasi_iso_examples() {
        let kk = k();
        assert!(is_quasi_iso(&GradedMap::identity(kk.module()), &kk, &kk).unwrap());
        assert!(is_quasi_iso(&GradedMap::zero(kk.module(), kk.module(), 0), &kk, &kk).unwrap());
        let unit = ChainComplex::with_zero_differential(&GradedModule::new(q(), [(0, 1)]));
        assert!(!is_quasi_iso(&GradedMap::zero(kk.module(), unit.module(), 0), &kk, &unit).unwrap());
    }
}
