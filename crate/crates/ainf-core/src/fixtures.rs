//! Named fixtures and seeded random generators: small unital DGAs, the
//! triple Massey product DGA, random square-zero DGAs, random complexes and
//! random lifting squares.

use std::collections::BTreeMap;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::ainfty::{linear_map, product_from_table, AInfAlgebra};
use crate::chaincx::{ChainComplex, GradedMap, GradedModule};
use crate::exactlin::{Field, FieldElement, Matrix, SparseMatrix};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// The ground field as a DGA concentrated in degree 0.
pub fn ground_field(field: Field) -> AInfAlgebra {
    let m = GradedModule::new(field, [(0, 1)]);
    let cx = ChainComplex::with_zero_differential(&m);
    let mu2 = product_from_table(&m, |_, _| vec![(0, 1)]);
    AInfAlgebra::new(cx, vec![mu2], Some(0)).expect("ground field is a DGA")
}

/// The exterior algebra on one generator `x` of degree 1: basis `{1, x}`.
pub fn exterior(field: Field) -> AInfAlgebra {
    let m = GradedModule::new(field, [(0, 1), (1, 1)]);
    let cx = ChainComplex::with_zero_differential(&m);
    let mu2 = product_from_table(&m, |i, j| match (i, j) {
        (0, 0) => vec![(0, 1)],
        (0, 1) | (1, 0) => vec![(1, 1)],
        _ => vec![],
    });
    AInfAlgebra::new(cx, vec![mu2], Some(0)).expect("exterior algebra is a DGA")
}

/// Global basis indices of the Massey fixture.
pub mod massey_basis {
    pub const ONE: usize = 0;
    pub const A: usize = 1;
    pub const B: usize = 2;
    pub const C: usize = 3;
    pub const X: usize = 4;
    pub const Y: usize = 5;
    pub const U: usize = 6;
    pub const V: usize = 7;
    pub const W: usize = 8;
    pub const P: usize = 9;
    pub const R: usize = 10;
    pub const Q: usize = 11;
}

/// A unital DGA with a nonvanishing triple Massey product `⟨a, b, c⟩`.
///
/// Degree 0: `1`. Degree 1: `a, b, c`. Degree 2: `X, Y`. Degree 3: `u, v, w`.
/// Degree 4: `P, R, Q`. Products: `ab = X`, `bc = Y`, `uc = P`, `av = R`,
/// `aw = Q`, with `1` a two-sided unit and every other product of non-units
/// zero. Differential: `∂u = X`, `∂v = Y`. Homology has basis
/// `1; a, b, c; w; P, R, Q` and `⟨a, b, c⟩ ∋ ±P ± R`, outside the
/// indeterminacy `a·H₃ + H₃·c = span{Q}`.
pub fn massey(field: Field) -> AInfAlgebra {
    use massey_basis::*;
    let m = GradedModule::new(field, [(0, 1), (1, 3), (2, 2), (3, 3), (4, 3)]);
    let mut d = BTreeMap::new();
    let mut blk = Matrix::zeros(field, 2, 3);
    blk.set(X - X, U - U, field.one());
    blk.set(Y - X, V - U, field.one());
    d.insert(3, SparseMatrix::from_dense(&blk));
    let cx = ChainComplex::new(&m, d).expect("Massey fixture differential squares to zero");
    let mu2 = product_from_table(&m, |i, j| match (i, j) {
        (ONE, k) | (k, ONE) => vec![(k, 1)],
        (A, B) => vec![(X, 1)],
        (B, C) => vec![(Y, 1)],
        (U, C) => vec![(P, 1)],
        (A, V) => vec![(R, 1)],
        (A, W) => vec![(Q, 1)],
        _ => vec![],
    });
    AInfAlgebra::new(cx, vec![mu2], Some(0)).expect("Massey fixture is a DGA")
}

/// Whether `μ₃(a⊗b⊗c)` lies outside `μ₂(a⊗H) + μ₂(H⊗c)` on a minimal
/// structure (zero differential), with the products taken over every basis
/// element of the matching degree.
pub fn triple_product_outside_indeterminacy(alg: &AInfAlgebra, a: usize, b: usize, c: usize) -> bool {
    let m = alg.module();
    let field = alg.field();
    let (da, db, dc) = (m.degree_of(a), m.degree_of(b), m.degree_of(c));
    let top = da + db + dc + 1;
    let (off, rows) = (m.offset(top), m.rank(top));
    let dense = |col: crate::signs::Column<'_>| {
        let mut v = vec![field.zero(); rows];
        for (i, x) in col.iter() {
            v[i - off] = x.clone();
        }
        v
    };
    let (Some(mu2), Some(mu3)) = (alg.mu(2), alg.mu(3)) else { return false };
    let mut span = Vec::new();
    let d_right = db + dc + 1;
    for j in 0..m.rank(d_right) {
        span.push(dense(mu2.eval(&[a, m.global(d_right, j)])));
    }
    let d_left = da + db + 1;
    for j in 0..m.rank(d_left) {
        span.push(dense(mu2.eval(&[m.global(d_left, j), c])));
    }
    let r0 = Matrix::from_columns(field, rows, &span).rank();
    span.push(dense(mu3.eval(&[a, b, c])));
    Matrix::from_columns(field, rows, &span).rank() > r0
}

/// Exhaustive associativity and Leibniz check of a DGA product table,
/// independent of the Stasheff machinery.
pub fn brute_force_dga_check(a: &AInfAlgebra) -> bool {
    let m = a.module();
    let n = m.total_rank();
    let field = a.field();
    let mu = a.mu(2).expect("a product");
    let d = a.complex().differential();
    let prod = |x: &[FieldElement], y: &[FieldElement]| -> Vec<FieldElement> {
        let mut out = vec![field.zero(); n];
        for (i, xi) in x.iter().enumerate() {
            if xi.is_zero() {
                continue;
            }
            for (j, yj) in y.iter().enumerate() {
                if yj.is_zero() {
                    continue;
                }
                let c = xi * yj;
                for (k, v) in mu.eval(&[i, j]).iter() {
                    out[k].add_mul(&c, v);
                }
            }
        }
        out
    };
    let diff = |x: &[FieldElement]| -> Vec<FieldElement> {
        let mut out = vec![field.zero(); n];
        for (i, xi) in x.iter().enumerate() {
            let (deg, j) = m.local(i);
            for (r, v) in d.column(deg, j) {
                out[m.offset(deg - 1) + r].add_mul(xi, v);
            }
        }
        out
    };
    let e = |i: usize| -> Vec<FieldElement> { (0..n).map(|k| if k == i { field.one() } else { field.zero() }).collect() };
    for i in 0..n {
        for j in 0..n {
            let (x, y) = (e(i), e(j));
            let lhs = diff(&prod(&x, &y));
            let mut rhs = prod(&diff(&x), &y);
            let sign = field.sign(m.degree_of(i) as i64);
            for (r, v) in rhs.iter_mut().zip(prod(&x, &diff(&y))) {
                r.add_mul(&sign, &v);
            }
            if lhs != rhs {
                return false;
            }
            for k in 0..n {
                let z = e(k);
                if prod(&prod(&x, &y), &z) != prod(&x, &prod(&y, &z)) {
                    return false;
                }
            }
        }
    }
    true
}

pub fn random_scalar(rng: &mut impl Rng, field: Field) -> FieldElement {
    match field {
        Field::Rational => field.from_i64(rng.gen_range(-3..=3)),
        Field::Prime(p) => field.from_i64(rng.gen_range(0..p as i64)),
    }
}

pub fn random_invertible(rng: &mut impl Rng, field: Field, n: usize) -> Matrix {
    loop {
        let mut m = Matrix::zeros(field, n, n);
        for i in 0..n {
            for j in 0..n {
                m.set(i, j, random_scalar(rng, field));
            }
        }
        if m.rank() == n {
            return m;
        }
    }
}

fn inverse(m: &Matrix) -> Matrix {
    let n = m.rows();
    let cols: Vec<Vec<FieldElement>> = (0..n)
        .map(|j| {
            let e: Vec<FieldElement> = (0..n).map(|i| if i == j { m.field().one() } else { m.field().zero() }).collect();
            crate::exactlin::solve(m, &e, crate::PivotRule::First).unwrap().unwrap()
        })
        .collect();
    Matrix::from_columns(m.field(), n, &cols)
}

/// A degreewise automorphism of a graded module.
pub fn random_automorphism(rng: &mut impl Rng, m: &GradedModule) -> (GradedMap, GradedMap) {
    let mut fwd = BTreeMap::new();
    let mut bwd = BTreeMap::new();
    for (d, r) in m.degrees() {
        let p = random_invertible(rng, m.field(), r);
        bwd.insert(d, SparseMatrix::from_dense(&inverse(&p)));
        fwd.insert(d, SparseMatrix::from_dense(&p));
    }
    (GradedMap::from_blocks(m, m, 0, fwd).unwrap(), GradedMap::from_blocks(m, m, 0, bwd).unwrap())
}

/// A complex with the given ranks whose differential pairs up `pairs[d]`
/// basis elements of degree `d` with elements of degree `d − 1`, before a
/// random change of basis in every degree. Unpaired elements carry homology.
pub fn complex_with_pairs(rng: &mut impl Rng, field: Field, ranks: &BTreeMap<i32, usize>, pairs: &BTreeMap<i32, usize>, conjugate: bool) -> ChainComplex {
    let m = GradedModule::new(field, ranks.iter().map(|(d, r)| (*d, *r)));
    let mut d = BTreeMap::new();
    for (&deg, &np) in pairs {
        let (rows, cols) = (m.rank(deg - 1), m.rank(deg));
        assert!(np <= rows && np <= cols, "not enough room for the requested pairs");
        if np == 0 {
            continue;
        }
        let mut blk = Matrix::zeros(field, rows, cols);
        for t in 0..np {
            blk.set(rows - 1 - t, t, field.one());
        }
        d.insert(deg, SparseMatrix::from_dense(&blk));
    }
    let cx = ChainComplex::new(&m, d).expect("paired differential squares to zero");
    if !conjugate {
        return cx;
    }
    let (p, pinv) = random_automorphism(rng, &m);
    ChainComplex::from_differential(p.compose(cx.differential()).compose(&pinv)).expect("conjugate of a complex")
}

/// Random ranks in `degrees`, with a random number of pairs between adjacent degrees.
pub fn random_complex(rng: &mut impl Rng, field: Field, degrees: (i32, i32), max_rank: usize, acyclic: bool) -> ChainComplex {
    let mut ranks = BTreeMap::new();
    let mut pairs = BTreeMap::new();
    let mut free: BTreeMap<i32, usize> = BTreeMap::new();
    for d in degrees.0..=degrees.1 {
        let r = if acyclic { 0 } else { rng.gen_range(0..=max_rank) };
        ranks.insert(d, r);
    }
    if acyclic {
        for d in degrees.0 + 1..=degrees.1 {
            let np = rng.gen_range(0..=max_rank.div_ceil(2));
            *ranks.entry(d).or_default() += np;
            *ranks.entry(d - 1).or_default() += np;
            pairs.insert(d, np);
        }
    } else {
        for (d, r) in &ranks {
            free.insert(*d, *r);
        }
        for d in degrees.0 + 1..=degrees.1 {
            let room = free[&d].min(free[&(d - 1)]);
            let np = rng.gen_range(0..=room);
            *free.get_mut(&d).unwrap() -= np;
            *free.get_mut(&(d - 1)).unwrap() -= np;
            pairs.insert(d, np);
        }
    }
    complex_with_pairs(rng, field, &ranks, &pairs, true)
}

/// A random square-zero unital DGA `Q·1 ⊕ M` with `M·M = 0`: `1` in degree 0
/// (global index 0 of degree 0), up to `max_extra` further basis elements in
/// degrees `0..=4`, and a random differential on `M`.
pub fn random_square_zero_dga(rng: &mut impl Rng, field: Field, max_extra: usize) -> AInfAlgebra {
    let n = rng.gen_range(0..=max_extra);
    let mut mranks: BTreeMap<i32, usize> = BTreeMap::new();
    for _ in 0..n {
        *mranks.entry(rng.gen_range(0..=4)).or_default() += 1;
    }
    let mut free = mranks.clone();
    let mut pairs = BTreeMap::new();
    for d in 1..=4 {
        let room = free.get(&d).copied().unwrap_or(0).min(free.get(&(d - 1)).copied().unwrap_or(0));
        let np = rng.gen_range(0..=room);
        if np > 0 {
            *free.get_mut(&d).unwrap() -= np;
            *free.get_mut(&(d - 1)).unwrap() -= np;
            pairs.insert(d, np);
        }
    }
    let mcx = complex_with_pairs(rng, field, &mranks, &pairs, true);
    let mut ranks = mranks.clone();
    *ranks.entry(0).or_default() += 1;
    let m = GradedModule::new(field, ranks.iter().map(|(d, r)| (*d, *r)));
    // Place M after the unit in degree 0.
    let embed = |g: usize| -> usize {
        let (d, i) = mcx.module().local(g);
        m.offset(d) + i + usize::from(d == 0)
    };
    let mm = mcx.module();
    let d = linear_map(&m, &m, -1, |g| {
        let (deg, i) = m.local(g);
        if deg == 0 && i == 0 {
            return vec![];
        }
        let j = if deg == 0 { i - 1 } else { i };
        mcx.differential().column(deg, j).iter().map(|(r, v)| (embed(mm.offset(deg - 1) + r), v.clone())).collect()
    });
    let cx = ChainComplex::from_differential(d).expect("square-zero DGA differential");
    let unit = m.offset(0);
    let mu2 = product_from_table(&m, |i, j| {
        if i == unit {
            vec![(j, 1)]
        } else if j == unit {
            vec![(i, 1)]
        } else {
            vec![]
        }
    });
    AInfAlgebra::new(cx, vec![mu2], Some(0)).expect("square-zero extension is a DGA")
}

/// A commutative square `f: U → X`, `g: U → V`, `f': V → Y`, `g': X → Y`.
#[derive(Clone, Debug)]
pub struct RandomSquare {
    pub u: ChainComplex,
    pub v: ChainComplex,
    pub x: ChainComplex,
    pub y: ChainComplex,
    pub f: GradedMap,
    pub g: GradedMap,
    pub f2: GradedMap,
    pub g2: GradedMap,
}

/// Direct sum of complexes with the coordinate inclusions and projections.
pub fn direct_sum(parts: &[&ChainComplex]) -> (ChainComplex, Vec<GradedMap>, Vec<GradedMap>) {
    let field = parts[0].field();
    let mods: Vec<&GradedModule> = parts.iter().map(|c| c.module()).collect();
    let m = GradedModule::direct_sum(&mods);
    let mut blocks = BTreeMap::new();
    for (d, _) in m.degrees() {
        let rs: Vec<usize> = mods.iter().map(|x| x.rank(d - 1)).collect();
        let cs: Vec<usize> = mods.iter().map(|x| x.rank(d)).collect();
        let grid: Vec<Vec<Option<&SparseMatrix>>> = (0..parts.len()).map(|i| (0..parts.len()).map(|j| if i == j { parts[i].differential().block(d) } else { None }).collect()).collect();
        blocks.insert(d, SparseMatrix::blocks(field, &rs, &cs, &grid));
    }
    let cx = ChainComplex::from_differential(GradedMap::from_blocks_unchecked(&m, &m, -1, blocks)).expect("direct sum of complexes");
    let mut incs = Vec::new();
    let mut projs = Vec::new();
    for (k, part) in mods.iter().enumerate() {
        let off = |d: i32| -> usize { mods[..k].iter().map(|x| x.rank(d)).sum() };
        incs.push(linear_map(part, &m, 0, |g| {
            let (d, i) = part.local(g);
            vec![(m.offset(d) + off(d) + i, field.one())]
        }));
        projs.push(linear_map(&m, part, 0, |g| {
            let (d, i) = m.local(g);
            let o = off(d);
            if i >= o && i < o + part.rank(d) { vec![(part.offset(d) + i - o, field.one())] } else { vec![] }
        }));
    }
    (cx, incs, projs)
}

/// A random degree-`deg` graded map.
pub fn random_map(rng: &mut impl Rng, s: &GradedModule, t: &GradedModule, deg: i32) -> GradedMap {
    let field = s.field();
    let mut blocks = BTreeMap::new();
    for (d, c) in s.degrees() {
        let r = t.rank(d + deg);
        if r == 0 {
            continue;
        }
        let mut m = Matrix::zeros(field, r, c);
        for i in 0..r {
            for j in 0..c {
                m.set(i, j, random_scalar(rng, field));
            }
        }
        blocks.insert(d, SparseMatrix::from_dense(&m));
    }
    GradedMap::from_blocks(s, t, deg, blocks).unwrap()
}

/// `∂k + k∂`, a null-homotopic chain map.
pub fn random_null_homotopic(rng: &mut impl Rng, s: &ChainComplex, t: &ChainComplex) -> GradedMap {
    let k = random_map(rng, s.module(), t.module(), 1);
    crate::chaincx::hom_differential(&k, s, t).unwrap()
}

/// A random lifting square. With `surjective`, `g'` is a degreewise
/// surjective quasi-isomorphism `X ≅ Y ⊕ C → Y`; otherwise `g'` is an
/// injective, non-surjective quasi-isomorphism `X → Y ≅ X ⊕ C`. `g` is an
/// injective chain map, and `f'` differs from `g'F` by a null-homotopic map
/// vanishing on the image of `g`, for a chain map `F: V → X` with `Fg = f`.
pub fn random_square(rng: &mut impl Rng, field: Field, surjective: bool) -> RandomSquare {
    let range = (0, 3);
    let core = random_complex(rng, field, range, 2, false);
    let cont = loop {
        let c = random_complex(rng, field, range, 2, true);
        if !c.is_zero() {
            break c;
        }
    };
    let (sum, incs, projs) = direct_sum(&[&core, &cont]);
    let (p, pinv) = random_automorphism(rng, sum.module());
    let big = ChainComplex::from_differential(p.compose(sum.differential()).compose(&pinv)).unwrap();
    let (x, y, g2, section) = if surjective {
        let g2 = projs[0].compose(&pinv);
        let section = p.compose(&incs[0]);
        (big, core.clone(), g2, Some(section))
    } else {
        let g2 = p.compose(&incs[0]);
        (core.clone(), big, g2, None)
    };
    let u = random_complex(rng, field, range, 2, false);
    let w = random_complex(rng, field, range, 2, false);
    let (vsum, vincs, vprojs) = if surjective { direct_sum(&[&u, &y, &w]) } else { direct_sum(&[&u, &x, &w]) };
    let (q, qinv) = random_automorphism(rng, vsum.module());
    let v = ChainComplex::from_differential(q.compose(vsum.differential()).compose(&qinv)).unwrap();
    let g = q.compose(&vincs[0]);
    // F₀ on U ⊕ (Y or X) ⊕ W: null-homotopic on U, a chain map on the middle summand.
    let fu = random_null_homotopic(rng, &u, &x);
    let mid = match &section {
        Some(s) => s.clone(),
        None => GradedMap::identity(x.module()),
    };
    let f0 = fu.compose(&vprojs[0]).add(&mid.compose(&vprojs[1]));
    let nh = random_null_homotopic(rng, &vsum, &x);
    let big_f = f0.add(&nh).compose(&qinv);
    let f = big_f.compose(&g);
    let mut f2 = g2.compose(&big_f);
    if !surjective {
        // Add ∂L + L∂ with L vanishing on g(U).
        let kill_u = vincs[1].compose(&vprojs[1]).add(&vincs[2].compose(&vprojs[2]));
        let l0 = random_map(rng, vsum.module(), y.module(), 1).compose(&kill_u);
        let l = l0.compose(&qinv);
        f2 = f2.add(&crate::chaincx::hom_differential(&l, &v, &y).unwrap());
    }
    RandomSquare { u, v, x, y, f, g, f2, g2 }
}
