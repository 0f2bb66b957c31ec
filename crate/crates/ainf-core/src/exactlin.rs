//! Exact scalars over the rationals and prime fields, dense and sparse
//! matrices, and deterministic row reduction.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LinError {
    #[error("{0} is not a prime below 2^32")]
    NotPrime(u64),
    #[error("cannot parse scalar {0:?}")]
    BadScalar(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("field mismatch")]
    FieldMismatch,
}

/// Coefficient field descriptor.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Field {
    Rational,
    Prime(u64),
}

fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

impl Field {
    /// The prime field with `p` elements; `p` must be a prime below 2^32.
    pub fn prime(p: u64) -> Result<Field, LinError> {
        if p > u32::MAX as u64 || !is_prime(p) {
            return Err(LinError::NotPrime(p));
        }
        Ok(Field::Prime(p))
    }

    pub fn zero(self) -> FieldElement {
        match self {
            Field::Rational => FieldElement::Rational(BigRational::zero()),
            Field::Prime(p) => FieldElement::Residue { value: 0, p },
        }
    }

    pub fn one(self) -> FieldElement {
        self.from_i64(1)
    }

    pub fn from_i64(self, v: i64) -> FieldElement {
        match self {
            Field::Rational => FieldElement::Rational(BigRational::from_integer(BigInt::from(v))),
            Field::Prime(p) => FieldElement::Residue { value: v.rem_euclid(p as i64) as u64, p },
        }
    }

    /// `(-1)^e` in this field.
    pub fn sign(self, e: i64) -> FieldElement {
        if e.rem_euclid(2) == 0 {
            self.one()
        } else {
            self.from_i64(-1)
        }
    }

    /// Parses `"n"` or `"n/d"` over ℚ and a decimal integer over 𝔽ₚ.
    pub fn parse(self, s: &str) -> Result<FieldElement, LinError> {
        let bad = || LinError::BadScalar(s.to_string());
        let t = s.trim();
        match self {
            Field::Rational => {
                let (n, d) = match t.split_once('/') {
                    Some((n, d)) => (n, d),
                    None => (t, "1"),
                };
                let n: BigInt = n.trim().parse().map_err(|_| bad())?;
                let d: BigInt = d.trim().parse().map_err(|_| bad())?;
                if d.is_zero() {
                    return Err(bad());
                }
                Ok(FieldElement::Rational(BigRational::new(n, d)))
            }
            Field::Prime(p) => {
                let n: BigInt = t.parse().map_err(|_| bad())?;
                let r = ((n % BigInt::from(p)) + BigInt::from(p)) % BigInt::from(p);
                let value: u64 = r.try_into().map_err(|_| bad())?;
                Ok(FieldElement::Residue { value, p })
            }
        }
    }

    pub fn name(self) -> String {
        match self {
            Field::Rational => "Q".to_string(),
            Field::Prime(p) => format!("Fp:{p}"),
        }
    }
}

/// An exact scalar: a reduced rational or a residue modulo a prime.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum FieldElement {
    Rational(BigRational),
    Residue { value: u64, p: u64 },
}

fn pow_mod(mut b: u64, mut e: u64, p: u64) -> u64 {
    let mut r = 1u64;
    b %= p;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % p;
        }
        b = b * b % p;
        e >>= 1;
    }
    r
}

impl FieldElement {
    pub fn field(&self) -> Field {
        match self {
            FieldElement::Rational(_) => Field::Rational,
            FieldElement::Residue { p, .. } => Field::Prime(*p),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            FieldElement::Rational(q) => q.is_zero(),
            FieldElement::Residue { value, .. } => *value == 0,
        }
    }

    pub fn is_one(&self) -> bool {
        match self {
            FieldElement::Rational(q) => q.is_one(),
            FieldElement::Residue { value, .. } => *value == 1,
        }
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn inv(&self) -> Option<FieldElement> {
        if self.is_zero() {
            return None;
        }
        Some(match self {
            FieldElement::Rational(q) => FieldElement::Rational(q.recip()),
            FieldElement::Residue { value, p } => FieldElement::Residue { value: pow_mod(*value, p - 2, *p), p: *p },
        })
    }

    /// `self += a * b`.
    pub fn add_mul(&mut self, a: &FieldElement, b: &FieldElement) {
        match (self, a, b) {
            (FieldElement::Residue { value, p }, FieldElement::Residue { value: x, .. }, FieldElement::Residue { value: y, .. }) => {
                *value = (*value + x * y % *p) % *p;
            }
            (FieldElement::Rational(s), FieldElement::Rational(x), FieldElement::Rational(y)) => {
                if !x.is_zero() && !y.is_zero() {
                    *s += x * y;
                }
            }
            _ => panic!("field mismatch"),
        }
    }

    /// Canonical string form: `"n"` or `"n/d"` over ℚ, `"v"` with `0 ≤ v < p` over 𝔽ₚ.
    pub fn to_canonical(&self) -> String {
        match self {
            FieldElement::Rational(q) => {
                if q.denom().is_one() {
                    q.numer().to_string()
                } else {
                    format!("{}/{}", q.numer(), q.denom())
                }
            }
            FieldElement::Residue { value, .. } => value.to_string(),
        }
    }

    pub fn is_negative_rational(&self) -> bool {
        matches!(self, FieldElement::Rational(q) if q.is_negative())
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_canonical())
    }
}

impl Add for &FieldElement {
    type Output = FieldElement;
    fn add(self, o: &FieldElement) -> FieldElement {
        match (self, o) {
            (FieldElement::Rational(a), FieldElement::Rational(b)) => FieldElement::Rational(a + b),
            (FieldElement::Residue { value: a, p }, FieldElement::Residue { value: b, .. }) => {
                FieldElement::Residue { value: (a + b) % p, p: *p }
            }
            _ => panic!("field mismatch"),
        }
    }
}

impl Sub for &FieldElement {
    type Output = FieldElement;
    fn sub(self, o: &FieldElement) -> FieldElement {
        match (self, o) {
            (FieldElement::Rational(a), FieldElement::Rational(b)) => FieldElement::Rational(a - b),
            (FieldElement::Residue { value: a, p }, FieldElement::Residue { value: b, .. }) => {
                FieldElement::Residue { value: (a + p - b) % p, p: *p }
            }
            _ => panic!("field mismatch"),
        }
    }
}

impl Mul for &FieldElement {
    type Output = FieldElement;
    fn mul(self, o: &FieldElement) -> FieldElement {
        match (self, o) {
            (FieldElement::Rational(a), FieldElement::Rational(b)) => FieldElement::Rational(a * b),
            (FieldElement::Residue { value: a, p }, FieldElement::Residue { value: b, .. }) => {
                FieldElement::Residue { value: a * b % p, p: *p }
            }
            _ => panic!("field mismatch"),
        }
    }
}

impl Neg for &FieldElement {
    type Output = FieldElement;
    fn neg(self) -> FieldElement {
        match self {
            FieldElement::Rational(a) => FieldElement::Rational(-a),
            FieldElement::Residue { value, p } => FieldElement::Residue { value: (p - value) % p, p: *p },
        }
    }
}

impl Neg for FieldElement {
    type Output = FieldElement;
    fn neg(self) -> FieldElement {
        -&self
    }
}

impl AddAssign<&FieldElement> for FieldElement {
    fn add_assign(&mut self, o: &FieldElement) {
        match (self, o) {
            (FieldElement::Rational(a), FieldElement::Rational(b)) => *a += b,
            (FieldElement::Residue { value, p }, FieldElement::Residue { value: b, .. }) => *value = (*value + b) % *p,
            _ => panic!("field mismatch"),
        }
    }
}

impl SubAssign<&FieldElement> for FieldElement {
    fn sub_assign(&mut self, o: &FieldElement) {
        match (self, o) {
            (FieldElement::Rational(a), FieldElement::Rational(b)) => *a -= b,
            (FieldElement::Residue { value, p }, FieldElement::Residue { value: b, .. }) => *value = (*value + *p - b) % *p,
            _ => panic!("field mismatch"),
        }
    }
}

/// Which nonzero entry of a row becomes its pivot.
///
/// `First` is ordinary reduced row echelon form. `Last` reduces with the
/// columns taken right to left, so each pivot is the last nonzero entry of its
/// row; back-substitution then sets the leftmost variables free.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum PivotRule {
    #[default]
    First,
    Last,
}

impl PivotRule {
    fn order(self, n: usize) -> Vec<usize> {
        match self {
            PivotRule::First => (0..n).collect(),
            PivotRule::Last => (0..n).rev().collect(),
        }
    }
}

/// Dense row-major matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    field: Field,
    data: Vec<FieldElement>,
}

impl Matrix {
    pub fn zeros(field: Field, rows: usize, cols: usize) -> Matrix {
        Matrix { rows, cols, field, data: vec![field.zero(); rows * cols] }
    }

    pub fn identity(field: Field, n: usize) -> Matrix {
        let mut m = Matrix::zeros(field, n, n);
        for i in 0..n {
            m.set(i, i, field.one());
        }
        m
    }

    pub fn from_rows(field: Field, cols: usize, rows: Vec<Vec<FieldElement>>) -> Result<Matrix, LinError> {
        let r = rows.len();
        let mut data = Vec::with_capacity(r * cols);
        for row in rows {
            if row.len() != cols {
                return Err(LinError::Dimension(format!("row of length {} in a matrix with {cols} columns", row.len())));
            }
            for x in row {
                if x.field() != field {
                    return Err(LinError::FieldMismatch);
                }
                data.push(x);
            }
        }
        Ok(Matrix { rows: r, cols, field, data })
    }

    /// Builds a matrix from small integers; convenient for fixtures.
    pub fn from_i64(field: Field, rows: &[&[i64]]) -> Matrix {
        let cols = rows.first().map_or(0, |r| r.len());
        let data = rows.iter().flat_map(|r| r.iter().map(|&v| field.from_i64(v))).collect();
        Matrix { rows: rows.len(), cols, field, data }
    }

    pub fn from_columns(field: Field, rows: usize, columns: &[Vec<FieldElement>]) -> Matrix {
        let mut m = Matrix::zeros(field, rows, columns.len());
        for (j, c) in columns.iter().enumerate() {
            for (i, x) in c.iter().enumerate() {
                m.set(i, j, x.clone());
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn get(&self, i: usize, j: usize) -> &FieldElement {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: FieldElement) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[FieldElement] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<FieldElement> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.field, self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j).clone());
            }
        }
        t
    }

    pub fn mul(&self, o: &Matrix) -> Result<Matrix, LinError> {
        if self.cols != o.rows {
            return Err(LinError::Dimension(format!("{}x{} times {}x{}", self.rows, self.cols, o.rows, o.cols)));
        }
        let mut m = Matrix::zeros(self.field, self.rows, o.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..o.cols {
                    let b = o.get(k, j);
                    if !b.is_zero() {
                        m.data[i * o.cols + j].add_mul(a, b);
                    }
                }
            }
        }
        Ok(m)
    }

    pub fn apply(&self, x: &[FieldElement]) -> Result<Vec<FieldElement>, LinError> {
        if x.len() != self.cols {
            return Err(LinError::Dimension(format!("vector of length {} for {} columns", x.len(), self.cols)));
        }
        let mut y = vec![self.field.zero(); self.rows];
        for (i, yi) in y.iter_mut().enumerate() {
            for (a, b) in self.row(i).iter().zip(x) {
                if !a.is_zero() && !b.is_zero() {
                    yi.add_mul(a, b);
                }
            }
        }
        Ok(y)
    }

    pub fn rank(&self) -> usize {
        rref(self, PivotRule::First).1.len()
    }
}

struct Reduction {
    rows: Vec<Vec<FieldElement>>,
    pivots: Vec<usize>,
    transform: Option<Vec<Vec<FieldElement>>>,
}

fn reduce(m: &Matrix, rule: PivotRule, track: bool) -> Reduction {
    let f = m.field;
    let mut rows: Vec<Vec<FieldElement>> = (0..m.rows).map(|i| m.row(i).to_vec()).collect();
    let mut t: Option<Vec<Vec<FieldElement>>> = if track {
        Some((0..m.rows).map(|i| (0..m.rows).map(|j| if i == j { f.one() } else { f.zero() }).collect()).collect())
    } else {
        None
    };
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in rule.order(m.cols) {
        if r == m.rows {
            break;
        }
        let Some(p) = (r..m.rows).find(|&i| !rows[i][c].is_zero()) else { continue };
        rows.swap(r, p);
        if let Some(t) = t.as_mut() {
            t.swap(r, p);
        }
        let inv = rows[r][c].inv().expect("nonzero pivot");
        for x in rows[r].iter_mut() {
            *x = &*x * &inv;
        }
        if let Some(t) = t.as_mut() {
            for x in t[r].iter_mut() {
                *x = &*x * &inv;
            }
        }
        for i in 0..m.rows {
            if i == r || rows[i][c].is_zero() {
                continue;
            }
            let factor = -&rows[i][c];
            let (pr, ir) = if i < r {
                let (a, b) = rows.split_at_mut(r);
                (&b[0], &mut a[i])
            } else {
                let (a, b) = rows.split_at_mut(i);
                (&a[r], &mut b[0])
            };
            for (x, y) in ir.iter_mut().zip(pr.iter()) {
                if !y.is_zero() {
                    x.add_mul(&factor, y);
                }
            }
            if let Some(t) = t.as_mut() {
                let (pr, ir) = if i < r {
                    let (a, b) = t.split_at_mut(r);
                    (&b[0], &mut a[i])
                } else {
                    let (a, b) = t.split_at_mut(i);
                    (&a[r], &mut b[0])
                };
                for (x, y) in ir.iter_mut().zip(pr.iter()) {
                    if !y.is_zero() {
                        x.add_mul(&factor, y);
                    }
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    Reduction { rows, pivots, transform: t }
}

/// Reduced row echelon form and the pivot column of each nonzero row.
pub fn rref(m: &Matrix, rule: PivotRule) -> (Matrix, Vec<usize>) {
    let red = reduce(m, rule, false);
    let data = red.rows.into_iter().flatten().collect();
    (Matrix { rows: m.rows, cols: m.cols, field: m.field, data }, red.pivots)
}

/// Some `x` with `a·x = b`, free variables set to zero; `None` if inconsistent.
pub fn solve(a: &Matrix, b: &[FieldElement], rule: PivotRule) -> Result<Option<Vec<FieldElement>>, LinError> {
    if b.len() != a.rows {
        return Err(LinError::Dimension(format!("right-hand side of length {} for {} rows", b.len(), a.rows)));
    }
    Ok(Solver::new(a, rule).solve(b))
}

/// Some `x` in the column span of `s` with `a·x = b`, computed as `s·y` where `(a·s)·y = b`.
pub fn solve_in_subspace(a: &Matrix, b: &[FieldElement], s: &Matrix, rule: PivotRule) -> Result<Option<Vec<FieldElement>>, LinError> {
    if s.rows != a.cols {
        return Err(LinError::Dimension(format!("subspace basis with {} rows for {} unknowns", s.rows, a.cols)));
    }
    let as_ = a.mul(s)?;
    match solve(&as_, b, rule)? {
        Some(y) => Ok(Some(s.apply(&y)?)),
        None => Ok(None),
    }
}

/// Standard free-variable basis of the null space, as columns.
pub fn kernel_basis(a: &Matrix) -> Matrix {
    kernel_basis_with(a, PivotRule::First)
}

pub fn kernel_basis_with(a: &Matrix, rule: PivotRule) -> Matrix {
    let (r, pivots) = rref(a, rule);
    let mut is_pivot = vec![false; a.cols];
    for &p in &pivots {
        is_pivot[p] = true;
    }
    let free: Vec<usize> = (0..a.cols).filter(|&j| !is_pivot[j]).collect();
    let mut k = Matrix::zeros(a.field, a.cols, free.len());
    for (col, &j) in free.iter().enumerate() {
        k.set(j, col, a.field.one());
        for (i, &p) in pivots.iter().enumerate() {
            k.set(p, col, -r.get(i, j));
        }
    }
    k
}

/// Precomputed reduction of a fixed matrix, for many right-hand sides.
#[derive(Clone, Debug)]
pub struct Solver {
    field: Field,
    rows: usize,
    cols: usize,
    transform: Vec<Vec<FieldElement>>,
    pivots: Vec<usize>,
}

impl Solver {
    pub fn new(a: &Matrix, rule: PivotRule) -> Solver {
        let red = reduce(a, rule, true);
        Solver { field: a.field, rows: a.rows, cols: a.cols, transform: red.transform.unwrap(), pivots: red.pivots }
    }

    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    pub fn solve(&self, b: &[FieldElement]) -> Option<Vec<FieldElement>> {
        debug_assert_eq!(b.len(), self.rows);
        let nz: Vec<usize> = (0..b.len()).filter(|&i| !b[i].is_zero()).collect();
        let mut x = vec![self.field.zero(); self.cols];
        if nz.is_empty() {
            return Some(x);
        }
        let row = |i: usize| {
            let mut s = self.field.zero();
            for &j in &nz {
                let t = &self.transform[i][j];
                if !t.is_zero() {
                    s.add_mul(t, &b[j]);
                }
            }
            s
        };
        for i in self.rank()..self.rows {
            if !row(i).is_zero() {
                return None;
            }
        }
        for (i, &p) in self.pivots.iter().enumerate() {
            x[p] = row(i);
        }
        Some(x)
    }
}

/// Column-compressed sparse matrix; the storage behind every graded map.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SparseMatrix {
    rows: usize,
    field: Field,
    columns: Vec<Vec<(usize, FieldElement)>>,
}

/// A sparse vector: sorted `(index, nonzero value)` pairs.
pub type SparseVec = Vec<(usize, FieldElement)>;

pub fn sparse_from_dense(v: &[FieldElement]) -> SparseVec {
    v.iter().enumerate().filter(|(_, x)| !x.is_zero()).map(|(i, x)| (i, x.clone())).collect()
}

impl SparseMatrix {
    pub fn zeros(field: Field, rows: usize, cols: usize) -> SparseMatrix {
        SparseMatrix { rows, field, columns: vec![Vec::new(); cols] }
    }

    pub fn identity(field: Field, n: usize) -> SparseMatrix {
        SparseMatrix { rows: n, field, columns: (0..n).map(|i| vec![(i, field.one())]).collect() }
    }

    /// Columns must be sorted by row and free of zeros.
    pub fn from_columns(field: Field, rows: usize, columns: Vec<SparseVec>) -> SparseMatrix {
        debug_assert!(columns.iter().all(|c| c.windows(2).all(|w| w[0].0 < w[1].0) && c.iter().all(|(i, x)| *i < rows && !x.is_zero())));
        SparseMatrix { rows, field, columns }
    }

    pub fn from_dense_columns(field: Field, rows: usize, columns: &[Vec<FieldElement>]) -> SparseMatrix {
        SparseMatrix { rows, field, columns: columns.iter().map(|c| sparse_from_dense(c)).collect() }
    }

    pub fn from_dense(m: &Matrix) -> SparseMatrix {
        let columns = (0..m.cols).map(|j| sparse_from_dense(&m.column(j))).collect();
        SparseMatrix { rows: m.rows, field: m.field, columns }
    }

    pub fn to_dense(&self) -> Matrix {
        let mut m = Matrix::zeros(self.field, self.rows, self.cols());
        for (j, c) in self.columns.iter().enumerate() {
            for (i, x) in c {
                m.set(*i, j, x.clone());
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.columns.len()
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn column(&self, j: usize) -> &[(usize, FieldElement)] {
        &self.columns[j]
    }

    pub fn dense_column(&self, j: usize) -> Vec<FieldElement> {
        let mut v = vec![self.field.zero(); self.rows];
        for (i, x) in &self.columns[j] {
            v[*i] = x.clone();
        }
        v
    }

    pub fn get(&self, i: usize, j: usize) -> FieldElement {
        self.columns[j].iter().find(|(r, _)| *r == i).map_or_else(|| self.field.zero(), |(_, x)| x.clone())
    }

    pub fn is_zero(&self) -> bool {
        self.columns.iter().all(|c| c.is_empty())
    }

    pub fn nnz(&self) -> usize {
        self.columns.iter().map(|c| c.len()).sum()
    }

    /// First nonzero entry in column-major order.
    pub fn first_nonzero(&self) -> Option<(usize, usize, FieldElement)> {
        self.columns.iter().enumerate().find_map(|(j, c)| c.first().map(|(i, x)| (*i, j, x.clone())))
    }

    /// `coeff · self · v`, accumulated into the dense vector `out`.
    pub fn accumulate(&self, v: &[(usize, FieldElement)], coeff: &FieldElement, out: &mut [FieldElement]) {
        for (j, x) in v {
            let c = x * coeff;
            for (i, y) in &self.columns[*j] {
                out[*i].add_mul(&c, y);
            }
        }
    }

    /// Product `self · v` for a sparse vector `v`.
    pub fn apply_sparse(&self, v: &[(usize, FieldElement)]) -> SparseVec {
        let mut acc = Accumulator::new(self.field, self.rows);
        for (j, x) in v {
            for (i, y) in &self.columns[*j] {
                acc.add_mul(*i, x, y);
            }
        }
        acc.take()
    }

    pub fn apply_dense(&self, v: &[FieldElement]) -> Vec<FieldElement> {
        let mut out = vec![self.field.zero(); self.rows];
        for (j, x) in v.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (i, y) in &self.columns[j] {
                out[*i].add_mul(x, y);
            }
        }
        out
    }

    /// Matrix product `self · o`.
    pub fn mul(&self, o: &SparseMatrix) -> SparseMatrix {
        assert_eq!(self.cols(), o.rows, "sparse product shape mismatch");
        let mut acc = Accumulator::new(self.field, self.rows);
        let columns = o
            .columns
            .iter()
            .map(|c| {
                for (k, x) in c {
                    for (i, y) in &self.columns[*k] {
                        acc.add_mul(*i, x, y);
                    }
                }
                acc.take()
            })
            .collect();
        SparseMatrix { rows: self.rows, field: self.field, columns }
    }

    pub fn scale(&self, c: &FieldElement) -> SparseMatrix {
        if c.is_zero() {
            return SparseMatrix::zeros(self.field, self.rows, self.cols());
        }
        let columns = self.columns.iter().map(|col| col.iter().map(|(i, x)| (*i, x * c)).collect()).collect();
        SparseMatrix { rows: self.rows, field: self.field, columns }
    }

    pub fn neg(&self) -> SparseMatrix {
        self.scale(&self.field.from_i64(-1))
    }

    /// `self + c · o`.
    pub fn add_scaled(&self, o: &SparseMatrix, c: &FieldElement) -> SparseMatrix {
        assert_eq!((self.rows, self.cols()), (o.rows, o.cols()), "sparse sum shape mismatch");
        let columns = self
            .columns
            .iter()
            .zip(&o.columns)
            .map(|(a, b)| {
                let mut out = Vec::with_capacity(a.len() + b.len());
                let (mut p, mut q) = (0, 0);
                while p < a.len() || q < b.len() {
                    if q == b.len() || (p < a.len() && a[p].0 < b[q].0) {
                        out.push(a[p].clone());
                        p += 1;
                    } else if p == a.len() || b[q].0 < a[p].0 {
                        let v = &b[q].1 * c;
                        if !v.is_zero() {
                            out.push((b[q].0, v));
                        }
                        q += 1;
                    } else {
                        let mut v = a[p].1.clone();
                        v.add_mul(&b[q].1, c);
                        if !v.is_zero() {
                            out.push((a[p].0, v));
                        }
                        p += 1;
                        q += 1;
                    }
                }
                out
            })
            .collect();
        SparseMatrix { rows: self.rows, field: self.field, columns }
    }

    pub fn add(&self, o: &SparseMatrix) -> SparseMatrix {
        self.add_scaled(o, &self.field.one())
    }

    pub fn sub(&self, o: &SparseMatrix) -> SparseMatrix {
        self.add_scaled(o, &self.field.from_i64(-1))
    }

    /// Keeps the rows in `rows` (in that order) and the columns in `cols`.
    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> SparseMatrix {
        let mut pos = vec![usize::MAX; self.rows];
        for (k, &r) in rows.iter().enumerate() {
            pos[r] = k;
        }
        let columns = cols
            .iter()
            .map(|&j| {
                let mut c: SparseVec = self.columns[j].iter().filter(|(i, _)| pos[*i] != usize::MAX).map(|(i, x)| (pos[*i], x.clone())).collect();
                c.sort_by_key(|(i, _)| *i);
                c
            })
            .collect();
        SparseMatrix { rows: rows.len(), field: self.field, columns }
    }

    /// Block matrix assembled from a grid; `None` entries are zero blocks.
    pub fn blocks(field: Field, row_sizes: &[usize], col_sizes: &[usize], grid: &[Vec<Option<&SparseMatrix>>]) -> SparseMatrix {
        let rows: usize = row_sizes.iter().sum();
        let mut columns = Vec::with_capacity(col_sizes.iter().sum());
        for (bj, &w) in col_sizes.iter().enumerate() {
            for j in 0..w {
                let mut col = Vec::new();
                let mut off = 0;
                for (bi, &h) in row_sizes.iter().enumerate() {
                    if let Some(m) = grid[bi][bj] {
                        assert_eq!((m.rows, m.cols()), (h, w), "block shape mismatch");
                        col.extend(m.columns[j].iter().map(|(i, x)| (i + off, x.clone())));
                    }
                    off += h;
                }
                columns.push(col);
            }
        }
        SparseMatrix { rows, field, columns }
    }
}

/// Dense scratch vector that remembers which entries were touched.
pub struct Accumulator {
    field: Field,
    values: Vec<FieldElement>,
    touched: Vec<usize>,
    flags: Vec<bool>,
}

impl Accumulator {
    pub fn new(field: Field, n: usize) -> Accumulator {
        Accumulator { field, values: vec![field.zero(); n], touched: Vec::new(), flags: vec![false; n] }
    }

    pub fn add_mul(&mut self, i: usize, a: &FieldElement, b: &FieldElement) {
        if !self.flags[i] {
            self.flags[i] = true;
            self.touched.push(i);
        }
        self.values[i].add_mul(a, b);
    }

    pub fn take(&mut self) -> SparseVec {
        self.touched.sort_unstable();
        let mut out = Vec::with_capacity(self.touched.len());
        for &i in &self.touched {
            self.flags[i] = false;
            let v = std::mem::replace(&mut self.values[i], self.field.zero());
            if !v.is_zero() {
                out.push((i, v));
            }
        }
        self.touched.clear();
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(v: i64) -> FieldElement {
        Field::Rational.from_i64(v)
    }

    #[test]
    fn rref_examples() {
        let f = Field::Rational;
        let id = Matrix::identity(f, 2);
        assert_eq!(rref(&id, PivotRule::First), (id.clone(), vec![0, 1]));
        let z = Matrix::zeros(f, 2, 2);
        assert_eq!(rref(&z, PivotRule::First), (z.clone(), vec![]));
        let m = Matrix::from_i64(f, &[&[2, 4], &[1, 2]]);
        assert_eq!(rref(&m, PivotRule::First), (Matrix::from_i64(f, &[&[1, 2], &[0, 0]]), vec![0]));
    }

    #[test]
    fn solve_examples() {
        let f = Field::Rational;
        let id = Matrix::identity(f, 2);
        assert_eq!(solve(&id, &[q(3), q(5)], PivotRule::First).unwrap(), Some(vec![q(3), q(5)]));
        let a = Matrix::from_i64(f, &[&[1, 1]]);
        assert_eq!(solve(&a, &[q(4)], PivotRule::First).unwrap(), Some(vec![q(4), q(0)]));
        assert_eq!(solve(&a, &[q(4)], PivotRule::Last).unwrap(), Some(vec![q(0), q(4)]));
        let z = Matrix::zeros(f, 1, 1);
        assert_eq!(solve(&z, &[q(1)], PivotRule::First).unwrap(), None);
        assert!(solve(&z, &[q(1), q(2)], PivotRule::First).is_err());
    }

    #[test]
    fn subspace_examples() {
        let f = Field::Rational;
        let id = Matrix::identity(f, 2);
        let s = Matrix::from_i64(f, &[&[1], &[0]]);
        assert_eq!(solve_in_subspace(&id, &[q(1), q(0)], &s, PivotRule::First).unwrap(), Some(vec![q(1), q(0)]));
        assert_eq!(solve_in_subspace(&id, &[q(0), q(1)], &s, PivotRule::First).unwrap(), None);
        let a = Matrix::from_i64(f, &[&[1, 1]]);
        assert_eq!(solve_in_subspace(&a, &[q(2)], &id, PivotRule::First).unwrap(), Some(vec![q(2), q(0)]));
    }

    #[test]
    fn kernel_examples() {
        let f = Field::Rational;
        assert_eq!(kernel_basis(&Matrix::identity(f, 2)).cols(), 0);
        assert_eq!(kernel_basis(&Matrix::zeros(f, 2, 2)), Matrix::identity(f, 2));
        assert_eq!(kernel_basis(&Matrix::from_i64(f, &[&[1, 2]])), Matrix::from_i64(f, &[&[-2], &[1]]));
    }

    #[test]
    fn prime_field_arithmetic() {
        let f = Field::prime(5).unwrap();
        assert!(Field::prime(6).is_err());
        let a = f.from_i64(3);
        assert_eq!((&a * &a.inv().unwrap()), f.one());
        assert_eq!(f.from_i64(-1).to_canonical(), "4");
        assert_eq!(f.parse("-7").unwrap(), f.from_i64(3));
    }

    #[test]
    fn rational_parsing_is_reduced() {
        let f = Field::Rational;
        assert_eq!(f.parse("4/6").unwrap().to_canonical(), "2/3");
        assert_eq!(f.parse("3/-1").unwrap().to_canonical(), "-3");
        assert!(f.parse("1/0").is_err());
    }

    #[test]
    fn sparse_products_match_dense() {
        let f = Field::Rational;
        let a = Matrix::from_i64(f, &[&[1, 0, 2], &[0, -1, 3]]);
        let b = Matrix::from_i64(f, &[&[1, 1], &[2, 0], &[0, 5]]);
        let p = SparseMatrix::from_dense(&a).mul(&SparseMatrix::from_dense(&b));
        assert_eq!(p.to_dense(), a.mul(&b).unwrap());
        let s = SparseMatrix::from_dense(&a).sub(&SparseMatrix::from_dense(&a));
        assert!(s.is_zero());
    }
}
