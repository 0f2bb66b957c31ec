//! Chain-level lifting: through degreewise surjective quasi-isomorphisms,
//! up to homotopy through arbitrary quasi-isomorphisms, and splitting of
//! null-homotopic maps against a quasi-isomorphism.

use std::collections::BTreeMap;

use crate::chaincx::{cocylinder, cone, hom_differential, ChainComplex, GradedMap, GradedModule};
use crate::exactlin::{kernel_basis_with, rref, FieldElement, Matrix, PivotRule, Solver, SparseMatrix};
use crate::{Error, Result};

/// A commutative square of chain maps
///
/// ```text
///   U --f--> X
///   |g       |g'
///   V --f'-> Y
/// ```
///
/// with `g` degreewise injective.
#[derive(Clone, Debug)]
pub struct LiftSquare {
    pub u: ChainComplex,
    pub v: ChainComplex,
    pub x: ChainComplex,
    pub y: ChainComplex,
    pub f: GradedMap,
    pub g: GradedMap,
    pub f2: GradedMap,
    pub g2: GradedMap,
}

fn require_chain_map(name: &str, m: &GradedMap, s: &ChainComplex, t: &ChainComplex) -> Result<()> {
    if m.source() != s.module() || m.target() != t.module() || m.degree() != 0 {
        return Err(Error::Mismatch(format!("{name} does not fit the square")));
    }
    if let Some((d, ..)) = hom_differential(m, s, t)?.first_nonzero() {
        return Err(Error::NotChainMap(format!("{name} fails at source degree {d}")));
    }
    Ok(())
}

impl LiftSquare {
    /// Checks the four chain maps, commutativity and injectivity of `g`.
    #[allow(clippy::too_many_arguments)]
    pub fn new(u: ChainComplex, v: ChainComplex, x: ChainComplex, y: ChainComplex, f: GradedMap, g: GradedMap, f2: GradedMap, g2: GradedMap) -> Result<LiftSquare> {
        require_chain_map("f", &f, &u, &x)?;
        require_chain_map("g", &g, &u, &v)?;
        require_chain_map("f'", &f2, &v, &y)?;
        require_chain_map("g'", &g2, &x, &y)?;
        if let Some((d, ..)) = f2.compose(&g).sub(&g2.compose(&f)).first_nonzero() {
            return Err(Error::Precondition(format!("square does not commute at degree {d}")));
        }
        for (d, r) in u.module().degrees() {
            if g.block(d).map_or(0, |b| b.to_dense().rank()) != r {
                return Err(Error::Precondition(format!("g is not injective in degree {d}")));
            }
        }
        Ok(LiftSquare { u, v, x, y, f, g, f2, g2 })
    }

    /// No checks; for squares assembled from already verified pieces.
    #[allow(clippy::too_many_arguments)]
    pub(crate) fn new_unchecked(u: ChainComplex, v: ChainComplex, x: ChainComplex, y: ChainComplex, f: GradedMap, g: GradedMap, f2: GradedMap, g2: GradedMap) -> LiftSquare {
        LiftSquare { u, v, x, y, f, g, f2, g2 }
    }

    /// The square with `U = 0`.
    pub fn from_bottom(v: ChainComplex, x: ChainComplex, y: ChainComplex, f2: GradedMap, g2: GradedMap) -> Result<LiftSquare> {
        let u = ChainComplex::with_zero_differential(&GradedModule::zero(v.field()));
        let f = GradedMap::zero(u.module(), x.module(), 0);
        let g = GradedMap::zero(u.module(), v.module(), 0);
        LiftSquare::new(u, v, x, y, f, g, f2, g2)
    }
}

fn apply(m: &GradedMap, d: i32, v: &[(usize, FieldElement)]) -> Vec<FieldElement> {
    let rows = m.target().rank(d + m.degree());
    let mut out = vec![m.field().zero(); rows];
    if let Some(b) = m.block(d) {
        b.accumulate(v, &m.field().one(), &mut out);
    }
    out
}

fn apply_dense(m: &GradedMap, d: i32, v: &[FieldElement]) -> Vec<FieldElement> {
    let sparse: Vec<(usize, FieldElement)> = v.iter().enumerate().filter(|(_, x)| !x.is_zero()).map(|(i, x)| (i, x.clone())).collect();
    apply(m, d, &sparse)
}

fn dense_block(m: &GradedMap, d: i32) -> Matrix {
    m.block_or_zero(d).to_dense()
}

/// `g` restricted to degree `d` sends each basis vector to a distinct basis
/// vector with coefficient one.
fn coordinate_rows(g: &GradedMap, d: i32, cols: usize) -> Option<Vec<usize>> {
    if cols == 0 {
        return Some(Vec::new());
    }
    let b = g.block(d)?;
    let mut rows = Vec::with_capacity(cols);
    let mut seen = vec![false; b.rows()];
    for j in 0..cols {
        match b.column(j) {
            [(i, v)] if v.is_one() && !seen[*i] => {
                seen[*i] = true;
                rows.push(*i);
            }
            _ => return None,
        }
    }
    Some(rows)
}

/// Expresses the standard basis of `V_d` in the basis `g(U_d) ∪ {e_c : c ∈ C}`.
enum Splitting {
    /// `g` is a coordinate inclusion: `rows[i] = g(e_i)`.
    Coordinates { rows: Vec<usize> },
    /// `coords[j]` lists `(position, coefficient)` of `e_j`, positions
    /// `< |U_d|` referring to `g(e_i)` and the rest to complement vectors.
    General { coords: Vec<Vec<(usize, FieldElement)>> },
}

fn split_degree(g: &GradedMap, d: i32, ud: usize, vd: usize, rule: PivotRule) -> Result<(Splitting, Vec<usize>)> {
    if let Some(rows) = coordinate_rows(g, d, ud) {
        let mut used = vec![false; vd];
        for &r in &rows {
            used[r] = true;
        }
        let complement = (0..vd).filter(|&j| !used[j]).collect();
        return Ok((Splitting::Coordinates { rows }, complement));
    }
    let field = g.field();
    let gd = dense_block(g, d);
    let mut aug = Matrix::zeros(field, vd, ud + vd);
    for i in 0..vd {
        for j in 0..ud {
            aug.set(i, j, gd.get(i, j).clone());
        }
        aug.set(i, ud + i, field.one());
    }
    let (_, pivots) = rref(&aug, PivotRule::First);
    if pivots.iter().take_while(|&&p| p < ud).count() != ud {
        return Err(Error::Precondition(format!("g is not injective in degree {d}")));
    }
    let complement: Vec<usize> = pivots.iter().filter(|&&p| p >= ud).map(|p| p - ud).collect();
    let mut basis = Matrix::zeros(field, vd, vd);
    for i in 0..vd {
        for j in 0..ud {
            basis.set(i, j, gd.get(i, j).clone());
        }
    }
    for (t, &c) in complement.iter().enumerate() {
        basis.set(c, ud + t, field.one());
    }
    let solver = Solver::new(&basis, rule);
    let coords = (0..vd)
        .map(|j| {
            let e: Vec<FieldElement> = (0..vd).map(|i| if i == j { field.one() } else { field.zero() }).collect();
            let z = solver.solve(&e).expect("an invertible change of basis");
            z.into_iter().enumerate().filter(|(_, x)| !x.is_zero()).collect()
        })
        .collect();
    Ok((Splitting::General { coords }, complement))
}

fn verify_zero(m: &GradedMap, what: &str) -> Result<()> {
    match m.first_nonzero() {
        None => Ok(()),
        Some((d, i, j, v)) => Err(Error::Certificate(format!("{what} fails at source degree {d}, entry ({i}, {j}) = {v}"))),
    }
}

/// A chain map `h: V → X` with `hg = f` and `g'h = f'`, for `g'` a
/// degreewise surjective quasi-isomorphism.
pub fn lift_through_surjection(sq: &LiftSquare, rule: PivotRule) -> Result<GradedMap> {
    let field = sq.v.field();
    for (d, r) in sq.y.module().degrees() {
        if sq.g2.block(d).map_or(0, |b| b.to_dense().rank()) != r {
            return Err(Error::Precondition(format!("g' is not surjective in degree {d}")));
        }
    }
    let (vm, xm) = (sq.v.module(), sq.x.module());
    let mut h_cols: BTreeMap<i32, Vec<Vec<FieldElement>>> = BTreeMap::new();
    for (d, vd) in vm.degrees() {
        let xd = xm.rank(d);
        let ud = sq.u.module().rank(d);
        if xd == 0 {
            h_cols.insert(d, vec![Vec::new(); vd]);
            continue;
        }
        let (splitting, complement) = split_degree(&sq.g, d, ud, vd, rule)?;
        let g2d = Solver::new(&dense_block(&sq.g2, d), rule);
        let ker = kernel_basis_with(&dense_block(&sq.g2, d), rule);
        let dx = dense_block(sq.x.differential(), d);
        let dker = if xm.rank(d - 1) > 0 { dx.mul(&ker)? } else { Matrix::zeros(field, 0, ker.cols()) };
        let ker_solver = Solver::new(&dker, rule);
        let prev = h_cols.get(&(d - 1));
        let h_prev = |v: &[FieldElement]| -> Vec<FieldElement> {
            let mut out = vec![field.zero(); xm.rank(d - 1)];
            if let Some(cols) = prev {
                for (j, c) in v.iter().enumerate() {
                    if c.is_zero() {
                        continue;
                    }
                    for (o, x) in out.iter_mut().zip(&cols[j]) {
                        o.add_mul(c, x);
                    }
                }
            }
            out
        };
        let lift_complement = |c: usize| -> Result<Vec<FieldElement>> {
            let ec = [(c, field.one())];
            let target = apply(&sq.f2, d, &ec);
            let h0 = g2d.solve(&target).ok_or_else(|| Error::Precondition(format!("g' is not surjective in degree {d}")))?;
            let dc = apply(sq.v.differential(), d, &ec);
            let mut e = apply_dense(sq.x.differential(), d, &h0);
            for (a, b) in e.iter_mut().zip(h_prev(&dc)) {
                *a -= &b;
            }
            if !apply_dense(&sq.g2, d - 1, &e).iter().all(|v| v.is_zero()) {
                return Err(Error::Certificate(format!("lifting defect is not in ker g' at degree {}", d - 1)));
            }
            if e.iter().all(|v| v.is_zero()) {
                return Ok(h0);
            }
            let z = ker_solver.solve(&e).ok_or_else(|| Error::NotQuasiIso(format!("ker g' is not acyclic at degree {d}")))?;
            let k = ker.apply(&z)?;
            Ok(h0.iter().zip(&k).map(|(a, b)| a - b).collect())
        };
        let cols = match splitting {
            Splitting::Coordinates { rows } => {
                let mut cols: Vec<Option<Vec<FieldElement>>> = vec![None; vd];
                for (i, &r) in rows.iter().enumerate() {
                    cols[r] = Some(apply(&sq.f, d, &[(i, field.one())]));
                }
                for &c in &complement {
                    cols[c] = Some(lift_complement(c)?);
                }
                cols.into_iter().map(|c| c.expect("every coordinate assigned")).collect()
            }
            Splitting::General { coords } => {
                let mut images: Vec<Vec<FieldElement>> = (0..ud).map(|i| apply(&sq.f, d, &[(i, field.one())])).collect();
                for &c in &complement {
                    images.push(lift_complement(c)?);
                }
                coords
                    .iter()
                    .map(|z| {
                        let mut out = vec![field.zero(); xd];
                        for (p, c) in z {
                            for (o, x) in out.iter_mut().zip(&images[*p]) {
                                o.add_mul(c, x);
                            }
                        }
                        out
                    })
                    .collect()
            }
        };
        h_cols.insert(d, cols);
    }
    let blocks = h_cols
        .into_iter()
        .filter(|(d, _)| xm.rank(*d) > 0)
        .map(|(d, cols)| (d, SparseMatrix::from_dense_columns(field, xm.rank(d), &cols)))
        .collect();
    let h = GradedMap::from_blocks(vm, xm, 0, blocks)?;
    verify_zero(&h.compose(&sq.g).sub(&sq.f), "hg = f")?;
    verify_zero(&sq.g2.compose(&h).sub(&sq.f2), "g'h = f'")?;
    verify_zero(&hom_differential(&h, &sq.v, &sq.x)?, "∂h = h∂")?;
    Ok(h)
}

fn row_range(m: &GradedMap, rows: impl Fn(i32) -> (usize, usize), target: &GradedModule, degree: i32) -> GradedMap {
    let mut blocks = BTreeMap::new();
    for (d, b) in m.blocks() {
        let (lo, len) = rows(*d);
        if len == 0 {
            continue;
        }
        let r: Vec<usize> = (lo..lo + len).collect();
        let c: Vec<usize> = (0..b.cols()).collect();
        blocks.insert(*d, b.submatrix(&r, &c));
    }
    GradedMap::from_blocks_unchecked(m.source(), target, degree, blocks)
}

/// A chain map `h: V → X` and a degree-1 map `s: V → Y` with `hg = f`,
/// `f' − g'h = ∂(s)` and `sg = 0`, for `g'` a quasi-isomorphism.
pub fn lift_up_to_homotopy(sq: &LiftSquare, rule: PivotRule) -> Result<(GradedMap, GradedMap)> {
    let (xm, ym) = (sq.x.module(), sq.y.module());
    let p = cocylinder(&sq.g2, &sq.x, &sq.y)?;
    let routed = LiftSquare::new_unchecked(sq.u.clone(), sq.v.clone(), p.complex.clone(), sq.y.clone(), p.inclusion.compose(&sq.f), sq.g.clone(), sq.f2.clone(), p.projection.clone());
    let big = lift_through_surjection(&routed, rule)?;
    let h = row_range(&big, |d| (ym.rank(d + 1), xm.rank(d)), xm, 0);
    let s = row_range(&big, |d| (0, ym.rank(d + 1)), ym, 1);
    verify_zero(&h.compose(&sq.g).sub(&sq.f), "hg = f")?;
    verify_zero(&hom_differential(&h, &sq.v, &sq.x)?, "∂h = h∂")?;
    let defect = sq.f2.sub(&sq.g2.compose(&h)).sub(&hom_differential(&s, &sq.v, &sq.y)?);
    verify_zero(&defect, "f' − g'h = ∂(s)")?;
    verify_zero(&s.compose(&sq.g), "sg = 0")?;
    Ok((h, s))
}

/// Degrees of `F` that matter when splitting a degree-`r` map `F → X`
/// against `g: X → Y`: `h: F → X` of degree `r+1` and `s': F → Y` of degree
/// `r+2` are supported inside, and every identity is checked inside.
pub fn split_window(x: &GradedModule, y: &GradedModule, r: i32) -> Option<(i32, i32)> {
    let mut lo = None::<i32>;
    let mut hi = None::<i32>;
    let mut widen = |a: i32, b: i32| {
        lo = Some(lo.map_or(a, |l| l.min(a)));
        hi = Some(hi.map_or(b, |h| h.max(b)));
    };
    if let (Some(b), Some(t)) = (x.bottom(), x.top()) {
        widen(b - r - 1, t - r);
    }
    if let (Some(b), Some(t)) = (y.bottom(), y.top()) {
        widen(b - r - 2, t - r - 1);
    }
    Some((lo?, hi?))
}

/// For a quasi-isomorphism `g: X → Y`, a map `f: F → X` of degree `r` and a
/// map `s: F → Y` of degree `r+1` with `∂(f) = 0` and `gf = ∂(s)`, returns
/// `h` of degree `r+1` with `f = ∂(h)` and `s'` of degree `r+2` with
/// `s − gh = ∂(s')`.
///
/// Only the degrees of `F` in [`split_window`] are used; `F` may already be
/// truncated to them. The results live on `F`'s module.
pub fn split_null_homotopy(g: &GradedMap, x: &ChainComplex, y: &ChainComplex, fcx: &ChainComplex, f: &GradedMap, s: &GradedMap, rule: PivotRule) -> Result<(GradedMap, GradedMap)> {
    split_impl(g, x, y, fcx, f, s, rule, false)
}

/// [`split_null_homotopy`] for a degreewise surjective `g`: the returned
/// `h` satisfies `gh = s` exactly, so `s'` is zero.
pub fn split_null_homotopy_strict(g: &GradedMap, x: &ChainComplex, y: &ChainComplex, fcx: &ChainComplex, f: &GradedMap, s: &GradedMap, rule: PivotRule) -> Result<(GradedMap, GradedMap)> {
    split_impl(g, x, y, fcx, f, s, rule, true)
}

#[allow(clippy::too_many_arguments)]
fn split_impl(g: &GradedMap, x: &ChainComplex, y: &ChainComplex, fcx: &ChainComplex, f: &GradedMap, s: &GradedMap, rule: PivotRule, strict: bool) -> Result<(GradedMap, GradedMap)> {
    let r = f.degree();
    if s.degree() != r + 1 || f.source() != fcx.module() || s.source() != fcx.module() {
        return Err(Error::Mismatch("split_null_homotopy: maps do not fit".into()));
    }
    let (xm, ym) = (x.module(), y.module());
    let zero_result = || (GradedMap::zero(fcx.module(), xm, r + 1), GradedMap::zero(fcx.module(), ym, r + 2));
    let Some((lo, hi)) = split_window(xm, ym, r) else { return Ok(zero_result()) };
    let fw = fcx.restrict(lo, hi);
    if fw.is_zero() {
        return Ok(zero_result());
    }
    let fm = fw.module();
    let f_w = f.restrict_source(fm);
    let s_w = s.restrict_source(fm);
    if let Some((d, ..)) = hom_differential(&f_w, &fw, x)?.first_nonzero() {
        return Err(Error::Precondition(format!("f is not a cycle at source degree {d}")));
    }
    if let Some((d, ..)) = g.compose(&f_w).sub(&hom_differential(&s_w, &fw, y)?).first_nonzero() {
        return Err(Error::Precondition(format!("gf ≠ ∂(s) at source degree {d}")));
    }
    // Regrade so that f has degree 0.
    let fp = fw.shift(r);
    let fpm = fp.module();
    let f0 = f_w.regrade(r, 0);
    let s0 = s_w.regrade(r, 0);
    let gf = g.compose(&f0);
    let id = GradedMap::identity(fpm);
    let c = cone(&id, &fp, &fp)?;
    let field = g.field();
    let mut bottom = BTreeMap::new();
    for (n, _) in c.complex.module().degrees() {
        let rows = ym.rank(n);
        if rows == 0 {
            continue;
        }
        let cs = [fpm.rank(n - 1), fpm.rank(n)];
        let grid = vec![vec![s0.block(n - 1), gf.block(n)]];
        bottom.insert(n, SparseMatrix::blocks(field, &[rows], &cs, &grid));
    }
    let f2 = GradedMap::from_blocks_unchecked(c.complex.module(), ym, 0, bottom);
    let sq = LiftSquare::new_unchecked(fp.clone(), c.complex.clone(), x.clone(), y.clone(), f0, c.inclusion.clone(), f2, g.clone());
    let (big_h, big_s) = if strict {
        let h = lift_through_surjection(&sq, rule)?;
        let z = GradedMap::zero(c.complex.module(), ym, 1);
        (h, z)
    } else {
        lift_up_to_homotopy(&sq, rule)?
    };
    let first_cols = |m: &GradedMap, target: &GradedModule, degree: i32| -> GradedMap {
        let mut blocks = BTreeMap::new();
        for (n, b) in m.blocks() {
            let len = fpm.rank(n - 1);
            if len == 0 {
                continue;
            }
            let rows: Vec<usize> = (0..b.rows()).collect();
            let cols: Vec<usize> = (0..len).collect();
            blocks.insert(n - 1, b.submatrix(&rows, &cols));
        }
        GradedMap::from_blocks_unchecked(fpm, target, degree, blocks)
    };
    let h = first_cols(&big_h, xm, 1).regrade(-r, 0).with_modules(fcx.module(), xm);
    let s2 = first_cols(&big_s, ym, 2).regrade(-r, 0).with_modules(fcx.module(), ym);
    let (hw, s2w) = (h.restrict_source(fm), s2.restrict_source(fm));
    verify_zero(&f_w.sub(&hom_differential(&hw, &fw, x)?), "f = ∂(h)")?;
    verify_zero(&s_w.sub(&g.compose(&hw)).sub(&hom_differential(&s2w, &fw, y)?), "s − gh = ∂(s')")?;
    Ok((h, s2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactlin::Field;
    use crate::fixtures::{random_map, random_square, rng};

    fn q() -> Field {
        Field::Rational
    }

    fn square(r: &crate::fixtures::RandomSquare) -> LiftSquare {
        LiftSquare::new(r.u.clone(), r.v.clone(), r.x.clone(), r.y.clone(), r.f.clone(), r.g.clone(), r.f2.clone(), r.g2.clone()).unwrap()
    }

    #[test]
    fn identity_target_returns_bottom_map() {
        let mut rg = rng(1);
        let r = random_square(&mut rg, q(), true);
        let id = GradedMap::identity(r.y.module());
        let sq = LiftSquare::new(r.u.clone(), r.v.clone(), r.y.clone(), r.y.clone(), r.g2.compose(&r.f), r.g.clone(), r.f2.clone(), id).unwrap();
        let h = lift_through_surjection(&sq, PivotRule::First).unwrap();
        assert_eq!(h, r.f2);
    }

    #[test]
    fn zero_source_lifts_bottom_map() {
        let mut rg = rng(2);
        let r = random_square(&mut rg, q(), true);
        let sq = LiftSquare::from_bottom(r.v.clone(), r.x.clone(), r.y.clone(), r.f2.clone(), r.g2.clone()).unwrap();
        let h = lift_through_surjection(&sq, PivotRule::Last).unwrap();
        assert_eq!(r.g2.compose(&h), r.f2);
    }

    #[test]
    fn acyclic_source_over_f5() {
        // V = X = (F₅ → F₅) in degrees 1, 0 with ∂ = 2; Y = 0.
        let f5 = Field::prime(5).unwrap();
        let v = ChainComplex::from_i64(f5, &[(0, 1), (1, 1)], &[(1, &[&[2]])]).unwrap();
        let x = ChainComplex::from_i64(f5, &[(0, 1), (1, 1)], &[(1, &[&[3]])]).unwrap();
        let y = ChainComplex::with_zero_differential(&GradedModule::zero(f5));
        let g2 = GradedMap::zero(x.module(), y.module(), 0);
        let f2 = GradedMap::zero(v.module(), y.module(), 0);
        let sq = LiftSquare::from_bottom(v.clone(), x.clone(), y, f2, g2).unwrap();
        let h = lift_through_surjection(&sq, PivotRule::First).unwrap();
        assert!(hom_differential(&h, &v, &x).unwrap().is_zero());
    }

    #[test]
    fn surjective_squares_lift_exactly() {
        for seed in 0..8 {
            for field in [q(), Field::prime(5).unwrap()] {
                let mut rg = rng(100 + seed);
                let r = random_square(&mut rg, field, true);
                let sq = square(&r);
                let h = lift_through_surjection(&sq, PivotRule::First).unwrap();
                assert_eq!(h.compose(&r.g), r.f);
                assert_eq!(r.g2.compose(&h), r.f2);
            }
        }
    }

    #[test]
    fn non_surjective_target_is_rejected() {
        let mut rg = rng(3);
        let r = random_square(&mut rg, q(), false);
        if r.y.module().total_rank() > r.x.module().total_rank() {
            let sq = square(&r);
            assert!(matches!(lift_through_surjection(&sq, PivotRule::First), Err(Error::Precondition(_))));
        }
    }

    #[test]
    fn injective_squares_lift_up_to_homotopy() {
        for seed in 0..8 {
            for field in [q(), Field::prime(5).unwrap()] {
                let mut rg = rng(200 + seed);
                let r = random_square(&mut rg, field, false);
                let sq = square(&r);
                let (h, s) = lift_up_to_homotopy(&sq, PivotRule::Last).unwrap();
                assert_eq!(h.compose(&r.g), r.f);
                assert!(s.compose(&r.g).is_zero());
                assert_eq!(r.f2.sub(&r.g2.compose(&h)), hom_differential(&s, &r.v, &r.y).unwrap());
            }
        }
    }

    #[test]
    fn identity_target_homotopy_lift() {
        let mut rg = rng(4);
        let r = random_square(&mut rg, q(), false);
        let id = GradedMap::identity(r.y.module());
        let sq = LiftSquare::new(r.u.clone(), r.v.clone(), r.y.clone(), r.y.clone(), r.g2.compose(&r.f), r.g.clone(), r.f2.clone(), id).unwrap();
        let (h, s) = lift_up_to_homotopy(&sq, PivotRule::First).unwrap();
        assert_eq!(h.compose(&r.g), r.g2.compose(&r.f));
        assert_eq!(r.f2.sub(&h), hom_differential(&s, &r.v, &r.y).unwrap());
    }

    #[test]
    fn non_quasi_iso_is_rejected() {
        // X = 0 → Y = Q[0] is not a quasi-isomorphism; lift the identity of Y.
        let y = ChainComplex::from_i64(q(), &[(0, 1)], &[]).unwrap();
        let x = ChainComplex::with_zero_differential(&GradedModule::zero(q()));
        let g2 = GradedMap::zero(x.module(), y.module(), 0);
        let sq = LiftSquare::from_bottom(y.clone(), x, y.clone(), GradedMap::identity(y.module()), g2).unwrap();
        assert!(matches!(lift_up_to_homotopy(&sq, PivotRule::First), Err(Error::NotQuasiIso(_))));
    }

    #[test]
    fn split_zero_maps() {
        let mut rg = rng(5);
        let r = random_square(&mut rg, q(), false);
        let f = GradedMap::zero(r.v.module(), r.x.module(), 0);
        let s = GradedMap::zero(r.v.module(), r.y.module(), 1);
        let (h, s2) = split_null_homotopy(&r.g2, &r.x, &r.y, &r.v, &f, &s, PivotRule::First).unwrap();
        assert!(hom_differential(&h, &r.v, &r.x).unwrap().is_zero());
        assert_eq!(r.g2.compose(&h).neg(), hom_differential(&s2, &r.v, &r.y).unwrap());
    }

    #[test]
    fn split_known_null_homotopy_in_every_degree() {
        for r_deg in -2..=2 {
            let mut rg = rng((300 + r_deg) as u64);
            let r = random_square(&mut rg, q(), false);
            let h0 = random_map(&mut rg, r.v.module(), r.x.module(), r_deg + 1);
            let f = hom_differential(&h0, &r.v, &r.x).unwrap();
            let s = r.g2.compose(&h0);
            let (h, s2) = split_null_homotopy(&r.g2, &r.x, &r.y, &r.v, &f, &s, PivotRule::Last).unwrap();
            assert_eq!(f, hom_differential(&h, &r.v, &r.x).unwrap());
            assert_eq!(s.sub(&r.g2.compose(&h)), hom_differential(&s2, &r.v, &r.y).unwrap());
        }
    }

    #[test]
    fn split_against_identity() {
        let mut rg = rng(6);
        let r = random_square(&mut rg, q(), true);
        let s = random_map(&mut rg, r.v.module(), r.y.module(), 1);
        let f = hom_differential(&s, &r.v, &r.y).unwrap();
        let id = GradedMap::identity(r.y.module());
        let (h, _) = split_null_homotopy(&id, &r.y, &r.y, &r.v, &f, &s, PivotRule::First).unwrap();
        assert_eq!(f, hom_differential(&h, &r.v, &r.y).unwrap());
    }

    #[test]
    fn strict_split_has_zero_second_component() {
        for seed in 0..4 {
            let mut rg = rng(400 + seed);
            let r = random_square(&mut rg, q(), true);
            let h0 = random_map(&mut rg, r.v.module(), r.x.module(), 1);
            let f = hom_differential(&h0, &r.v, &r.x).unwrap();
            let s = r.g2.compose(&h0);
            let (h, s2) = split_null_homotopy_strict(&r.g2, &r.x, &r.y, &r.v, &f, &s, PivotRule::First).unwrap();
            assert!(s2.is_zero());
            assert_eq!(f, hom_differential(&h, &r.v, &r.x).unwrap());
            assert_eq!(s, r.g2.compose(&h));
        }
    }

    #[test]
    fn split_rejects_bad_precondition() {
        let mut rg = rng(7);
        let r = random_square(&mut rg, q(), false);
        let f = GradedMap::zero(r.v.module(), r.x.module(), 0);
        let s = random_map(&mut rg, r.v.module(), r.y.module(), 1);
        if !hom_differential(&s, &r.v, &r.y).unwrap().is_zero() {
            assert!(matches!(split_null_homotopy(&r.g2, &r.x, &r.y, &r.v, &f, &s, PivotRule::First), Err(Error::Precondition(_))));
        }
    }
}
