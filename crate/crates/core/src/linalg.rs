//! Exact integer linear algebra.
//!
//! Everything downstream (kernels of module maps, cohomology of Hom
//! complexes, coinvariants) reduces to Smith normal form over `i64`.
//! All arithmetic is overflow checked; an overflow aborts with a panic
//! rather than producing a wrong answer.

use std::fmt;
use std::ops::{Index, IndexMut};

use serde::{Deserialize, Serialize};

pub type Int = i64;

#[inline]
fn cadd(a: Int, b: Int) -> Int {
    a.checked_add(b).expect("integer overflow in addition")
}

#[inline]
fn csub(a: Int, b: Int) -> Int {
    a.checked_sub(b).expect("integer overflow in subtraction")
}

#[inline]
fn cmul(a: Int, b: Int) -> Int {
    a.checked_mul(b)
        .expect("integer overflow in multiplication")
}

/// Dense row-major integer matrix.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<Int>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<Int>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged matrix");
        Matrix {
            rows: r,
            cols: c,
            data: rows.iter().flatten().copied().collect(),
        }
    }

    /// Builds a matrix of the given shape from row-major data, checking the shape.
    pub fn from_data(rows: usize, cols: usize, data: Vec<Int>) -> Option<Self> {
        (data.len() == rows * cols).then_some(Matrix { rows, cols, data })
    }

    pub fn from_columns(rows: usize, columns: &[Vec<Int>]) -> Self {
        let mut m = Matrix::zeros(rows, columns.len());
        for (j, col) in columns.iter().enumerate() {
            assert_eq!(col.len(), rows, "column length mismatch");
            for (i, &v) in col.iter().enumerate() {
                m[(i, j)] = v;
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

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn row(&self, i: usize) -> &[Int] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<Int> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<Int>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    /// Square with every off-diagonal entry zero.
    pub fn is_diagonal(&self) -> bool {
        self.rows == self.cols
            && (0..self.rows).all(|i| (0..self.cols).all(|j| i == j || self[(i, j)] == 0))
    }

    pub fn max_abs(&self) -> Int {
        self.data.iter().map(|v| v.abs()).max().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&x| x == 0)
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn mul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "shape mismatch in product");
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0 {
                    continue;
                }
                let orow = other.row(k);
                let base = i * other.cols;
                for (j, &b) in orow.iter().enumerate() {
                    if b != 0 {
                        out.data[base + j] = cadd(out.data[base + j], cmul(a, b));
                    }
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[Int]) -> Vec<Int> {
        assert_eq!(
            self.cols,
            v.len(),
            "shape mismatch in matrix-vector product"
        );
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .fold(0, |acc, (&a, &b)| cadd(acc, cmul(a, b)))
            })
            .collect()
    }

    pub fn add(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.shape(), other.shape(), "shape mismatch in sum");
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| cadd(a, b))
                .collect(),
        }
    }

    pub fn sub(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.shape(), other.shape(), "shape mismatch in difference");
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| csub(a, b))
                .collect(),
        }
    }

    pub fn scale(&self, s: Int) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&a| cmul(a, s)).collect(),
        }
    }

    /// `self += s * other`
    pub fn add_scaled(&mut self, other: &Matrix, s: Int) {
        assert_eq!(self.shape(), other.shape(), "shape mismatch in sum");
        if s == 0 {
            return;
        }
        for (a, &b) in self.data.iter_mut().zip(&other.data) {
            *a = cadd(*a, cmul(b, s));
        }
    }

    /// Horizontal concatenation.
    pub fn hstack(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.rows, other.rows, "row mismatch in hstack");
        let mut m = Matrix::zeros(self.rows, self.cols + other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m[(i, j)] = self[(i, j)];
            }
            for j in 0..other.cols {
                m[(i, self.cols + j)] = other[(i, j)];
            }
        }
        m
    }

    /// Vertical concatenation.
    pub fn vstack(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.cols, "column mismatch in vstack");
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        Matrix {
            rows: self.rows + other.rows,
            cols: self.cols,
            data,
        }
    }

    /// Copies `block` into `self` with its top-left corner at `(r, c)`.
    pub fn set_block(&mut self, r: usize, c: usize, block: &Matrix) {
        for i in 0..block.rows {
            for j in 0..block.cols {
                self[(r + i, c + j)] = block[(i, j)];
            }
        }
    }

    /// Adds `block` into `self` with its top-left corner at `(r, c)`.
    pub fn add_block(&mut self, r: usize, c: usize, block: &Matrix, scale: Int) {
        for i in 0..block.rows {
            for j in 0..block.cols {
                let v = cmul(block[(i, j)], scale);
                self[(r + i, c + j)] = cadd(self[(r + i, c + j)], v);
            }
        }
    }

    pub fn select_rows(&self, idx: &[usize]) -> Matrix {
        let mut m = Matrix::zeros(idx.len(), self.cols);
        for (k, &i) in idx.iter().enumerate() {
            m.data[k * self.cols..(k + 1) * self.cols].copy_from_slice(self.row(i));
        }
        m
    }

    pub fn select_columns(&self, idx: &[usize]) -> Matrix {
        let mut m = Matrix::zeros(self.rows, idx.len());
        for i in 0..self.rows {
            for (k, &j) in idx.iter().enumerate() {
                m[(i, k)] = self[(i, j)];
            }
        }
        m
    }

    pub fn block_diagonal(blocks: &[Matrix]) -> Matrix {
        let r = blocks.iter().map(Matrix::rows).sum();
        let c = blocks.iter().map(Matrix::cols).sum();
        let mut m = Matrix::zeros(r, c);
        let (mut ro, mut co) = (0, 0);
        for b in blocks {
            m.set_block(ro, co, b);
            ro += b.rows;
            co += b.cols;
        }
        m
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for i in 0..self.rows {
            self.data.swap(i * self.cols + a, i * self.cols + b);
        }
    }

    /// row[dst] += q * row[src]
    fn row_axpy(&mut self, dst: usize, src: usize, q: Int) {
        if q == 0 {
            return;
        }
        for j in 0..self.cols {
            let v = self.data[src * self.cols + j];
            if v != 0 {
                let d = &mut self.data[dst * self.cols + j];
                *d = cadd(*d, cmul(q, v));
            }
        }
    }

    /// col[dst] += q * col[src]
    fn col_axpy(&mut self, dst: usize, src: usize, q: Int) {
        if q == 0 {
            return;
        }
        for i in 0..self.rows {
            let v = self.data[i * self.cols + src];
            if v != 0 {
                let d = &mut self.data[i * self.cols + dst];
                *d = cadd(*d, cmul(q, v));
            }
        }
    }

    fn negate_row(&mut self, i: usize) {
        for j in 0..self.cols {
            let d = &mut self.data[i * self.cols + j];
            *d = -*d;
        }
    }

    fn negate_col(&mut self, j: usize) {
        for i in 0..self.rows {
            let d = &mut self.data[i * self.cols + j];
            *d = -*d;
        }
    }

    /// Determinant by fraction-free (Bareiss) elimination.
    pub fn determinant(&self) -> Int {
        assert_eq!(self.rows, self.cols, "determinant of a non-square matrix");
        let n = self.rows;
        if n == 0 {
            return 1;
        }
        let mut a: Vec<Vec<i128>> = self
            .to_rows()
            .into_iter()
            .map(|r| r.into_iter().map(i128::from).collect())
            .collect();
        let mut sign = 1i128;
        let mut prev = 1i128;
        for k in 0..n - 1 {
            if a[k][k] == 0 {
                let Some(p) = (k + 1..n).find(|&i| a[i][k] != 0) else {
                    return 0;
                };
                a.swap(k, p);
                sign = -sign;
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = a[i][j]
                        .checked_mul(a[k][k])
                        .and_then(|x| x.checked_sub(a[i][k].checked_mul(a[k][j])?))
                        .expect("integer overflow in determinant");
                    a[i][j] = v / prev;
                }
            }
            prev = a[k][k];
        }
        Int::try_from(sign * a[n - 1][n - 1]).expect("determinant overflows i64")
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = Int;
    fn index(&self, (i, j): (usize, usize)) -> &Int {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Int {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Matrix {}x{} ", self.rows, self.cols)?;
        f.debug_list().entries(self.to_rows()).finish()
    }
}

/// Smith normal form `left * m * right = diag`, with `left_inv = left^{-1}`.
///
/// `diag` holds the nonzero invariant factors `d1 | d2 | ...` (all positive);
/// the rank is `diag.len()`.
#[derive(Clone, Debug)]
pub struct Snf {
    pub diag: Vec<Int>,
    pub left: Matrix,
    pub left_inv: Matrix,
    pub right: Matrix,
    pub rows: usize,
    pub cols: usize,
}

impl Snf {
    pub fn rank(&self) -> usize {
        self.diag.len()
    }

    /// The full diagonal matrix `left * m * right`.
    pub fn diagonal_matrix(&self) -> Matrix {
        let mut d = Matrix::zeros(self.rows, self.cols);
        for (i, &v) in self.diag.iter().enumerate() {
            d[(i, i)] = v;
        }
        d
    }
}

pub fn smith_normal_form(m: &Matrix) -> Snf {
    snf_impl(m, true)
}

/// Position of the smallest nonzero entry of the trailing block from `(t, t)`,
/// ties broken by the fewest nonzeros in its row and column.
fn choose_pivot(a: &Matrix, t: usize) -> Option<(usize, usize)> {
    let (rows, cols) = a.shape();
    let row_nz: Vec<usize> = (t..rows)
        .map(|i| (t..cols).filter(|&j| a[(i, j)] != 0).count())
        .collect();
    let col_nz: Vec<usize> = (t..cols)
        .map(|j| (t..rows).filter(|&i| a[(i, j)] != 0).count())
        .collect();
    let mut best: Option<(Int, usize, usize, usize)> = None;
    for i in t..rows {
        for j in t..cols {
            let v = a[(i, j)].abs();
            if v == 0 {
                continue;
            }
            let cost = (row_nz[i - t] - 1) * (col_nz[j - t] - 1);
            if best.is_none_or(|(bv, bc, _, _)| (v, cost) < (bv, bc)) {
                best = Some((v, cost, i, j));
            }
        }
    }
    best.map(|(_, _, i, j)| (i, j))
}

/// Nonzero invariant factors `d1 | d2 | ...` of `m`, without transforms.
pub fn elementary_divisors(m: &Matrix) -> Vec<Int> {
    let (rows, cols) = m.shape();
    let mut a = m.clone();
    let mut d = Vec::new();
    let mut t = 0;
    while t < rows.min(cols) {
        let Some((pi, pj)) = choose_pivot(&a, t) else {
            break;
        };
        a.swap_rows(t, pi);
        a.swap_cols(t, pj);
        loop {
            let p = a[(t, t)];
            let mut next: Option<(usize, usize)> = None;
            for i in t + 1..rows {
                let q = a[(i, t)] / p;
                if q != 0 {
                    a.row_axpy(i, t, -q);
                }
                if a[(i, t)] != 0 && next.is_none_or(|(r, c)| a[(i, t)].abs() < a[(r, c)].abs()) {
                    next = Some((i, t));
                }
            }
            for j in t + 1..cols {
                let q = a[(t, j)] / p;
                if q != 0 {
                    a.col_axpy(j, t, -q);
                }
                if a[(t, j)] != 0 && next.is_none_or(|(r, c)| a[(t, j)].abs() < a[(r, c)].abs()) {
                    next = Some((t, j));
                }
            }
            match next {
                Some((i, _)) if i != t => a.swap_rows(t, i),
                Some((_, j)) => a.swap_cols(t, j),
                None => break,
            }
        }
        d.push(a[(t, t)].abs());
        t += 1;
    }
    for i in 0..d.len() {
        for j in i + 1..d.len() {
            let g = gcd(d[i], d[j]);
            let l = cmul(d[i] / g, d[j]);
            d[i] = g;
            d[j] = l;
        }
    }
    d
}

fn gcd(a: Int, b: Int) -> Int {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn snf_impl(m: &Matrix, track_left: bool) -> Snf {
    let (rows, cols) = m.shape();
    let mut a = m.clone();
    let (mut left, mut left_inv) = if track_left {
        (Matrix::identity(rows), Matrix::identity(rows))
    } else {
        (Matrix::zeros(0, 0), Matrix::zeros(0, 0))
    };
    let mut right = Matrix::identity(cols);

    macro_rules! row_swap {
        ($i:expr, $j:expr) => {{
            a.swap_rows($i, $j);
            if track_left {
                left.swap_rows($i, $j);
                left_inv.swap_cols($i, $j);
            }
        }};
    }
    macro_rules! row_add {
        ($dst:expr, $src:expr, $q:expr) => {{
            let q: Int = $q;
            a.row_axpy($dst, $src, q);
            if track_left {
                left.row_axpy($dst, $src, q);
                left_inv.col_axpy($src, $dst, -q);
            }
        }};
    }
    macro_rules! col_swap {
        ($i:expr, $j:expr) => {{
            a.swap_cols($i, $j);
            right.swap_cols($i, $j);
        }};
    }
    macro_rules! col_add {
        ($dst:expr, $src:expr, $q:expr) => {{
            let q: Int = $q;
            a.col_axpy($dst, $src, q);
            right.col_axpy($dst, $src, q);
        }};
    }

    let mut diag = Vec::new();
    let mut t = 0;
    while t < rows.min(cols) {
        let Some((pi, pj)) = choose_pivot(&a, t) else {
            break;
        };
        row_swap!(t, pi);
        col_swap!(t, pj);

        loop {
            let mut dirty = false;
            for i in t + 1..rows {
                let v = a[(i, t)];
                if v != 0 {
                    let q = v.div_euclid(a[(t, t)]);
                    row_add!(i, t, -q);
                    if a[(i, t)] != 0 {
                        dirty = true;
                    }
                }
            }
            for j in t + 1..cols {
                let v = a[(t, j)];
                if v != 0 {
                    let q = v.div_euclid(a[(t, t)]);
                    col_add!(j, t, -q);
                    if a[(t, j)] != 0 {
                        dirty = true;
                    }
                }
            }
            if dirty {
                // move the smallest remainder in row/column t onto the pivot
                let mut best = (t, t, a[(t, t)].abs());
                for i in t + 1..rows {
                    let v = a[(i, t)].abs();
                    if v != 0 && v < best.2 {
                        best = (i, t, v);
                    }
                }
                for j in t + 1..cols {
                    let v = a[(t, j)].abs();
                    if v != 0 && v < best.2 {
                        best = (t, j, v);
                    }
                }
                if best.0 != t {
                    row_swap!(t, best.0);
                } else if best.1 != t {
                    col_swap!(t, best.1);
                }
                continue;
            }
            // divisibility of the trailing block by the pivot
            let p = a[(t, t)];
            let mut offender = None;
            'outer: for i in t + 1..rows {
                for j in t + 1..cols {
                    if a[(i, j)] % p != 0 {
                        offender = Some(i);
                        break 'outer;
                    }
                }
            }
            match offender {
                Some(i) => row_add!(t, i, 1),
                None => break,
            }
        }
        if a[(t, t)] < 0 {
            a.negate_row(t);
            if track_left {
                left.negate_row(t);
                left_inv.negate_col(t);
            }
        }
        diag.push(a[(t, t)]);
        t += 1;
    }

    Snf {
        diag,
        left,
        left_inv,
        right,
        rows,
        cols,
    }
}

/// Basis (as columns) of the integer kernel `{x : m x = 0}`.
pub fn kernel(m: &Matrix) -> Matrix {
    // one row at a time: column operations clear the row on the running basis,
    // which is re-reduced to Hermite form whenever its entries grow
    const REDUCE_ABOVE: Int = 1 << 20;
    let n = m.cols();
    let mut k = Matrix::identity(n);
    for i in 0..m.rows() {
        if k.cols() == 0 {
            break;
        }
        let row = m.row(i);
        let mut w: Vec<Int> = (0..k.cols())
            .map(|j| {
                (0..n).fold(0, |acc, t| {
                    if row[t] == 0 {
                        acc
                    } else {
                        cadd(acc, cmul(row[t], k[(t, j)]))
                    }
                })
            })
            .collect();
        let Some(mut pivot) = (0..w.len())
            .filter(|&j| w[j] != 0)
            .min_by_key(|&j| w[j].abs())
        else {
            continue;
        };
        loop {
            let p = w[pivot];
            let mut next = None;
            for j in 0..w.len() {
                if j == pivot || w[j] == 0 {
                    continue;
                }
                let q = w[j] / p;
                if q != 0 {
                    k.col_axpy(j, pivot, -q);
                    w[j] = csub(w[j], cmul(q, p));
                }
                if w[j] != 0 && next.is_none_or(|b: usize| w[j].abs() < w[b].abs()) {
                    next = Some(j);
                }
            }
            match next {
                Some(j) => pivot = j,
                None => break,
            }
        }
        let keep: Vec<usize> = (0..k.cols()).filter(|&j| j != pivot).collect();
        k = k.select_columns(&keep);
        if k.max_abs() > REDUCE_ABOVE {
            k = column_hnf(&k, false).basis();
        }
    }
    column_hnf(&k, false).basis()
}

/// Column Hermite form `hnf = m * transform`: the first `pivots.len()` columns
/// are in echelon form with positive pivots at rows `pivots`, entries left of a
/// pivot reduced into `[0, pivot)`, and the remaining columns zero.
#[derive(Clone, Debug)]
pub struct ColumnHnf {
    pub hnf: Matrix,
    pub transform: Matrix,
    pub pivots: Vec<usize>,
}

impl ColumnHnf {
    /// The nonzero columns.
    pub fn basis(&self) -> Matrix {
        self.hnf
            .select_columns(&(0..self.pivots.len()).collect::<Vec<_>>())
    }
}

pub fn column_hnf(m: &Matrix, track: bool) -> ColumnHnf {
    let (rows, cols) = m.shape();
    let mut a = m.clone();
    let mut u = if track {
        Matrix::identity(cols)
    } else {
        Matrix::zeros(0, 0)
    };
    let mut pivots = Vec::new();
    let mut c = 0;
    for i in 0..rows {
        if c == cols {
            break;
        }
        loop {
            let best = (c..cols)
                .filter(|&j| a[(i, j)] != 0)
                .min_by_key(|&j| a[(i, j)].abs());
            let Some(j) = best else { break };
            a.swap_cols(c, j);
            if track {
                u.swap_cols(c, j);
            }
            let p = a[(i, c)];
            let mut done = true;
            for j in c + 1..cols {
                let q = a[(i, j)] / p;
                if q != 0 {
                    a.col_axpy(j, c, -q);
                    if track {
                        u.col_axpy(j, c, -q);
                    }
                }
                done &= a[(i, j)] == 0;
            }
            if done {
                break;
            }
        }
        if a[(i, c)] == 0 {
            continue;
        }
        if a[(i, c)] < 0 {
            a.negate_col(c);
            if track {
                u.negate_col(c);
            }
        }
        let p = a[(i, c)];
        for j in 0..c {
            let q = a[(i, j)].div_euclid(p);
            if q != 0 {
                a.col_axpy(j, c, -q);
                if track {
                    u.col_axpy(j, c, -q);
                }
            }
        }
        pivots.push(i);
        c += 1;
    }
    ColumnHnf {
        hnf: a,
        transform: u,
        pivots,
    }
}

/// Any integer solution of `m x = b`.
pub fn solve(m: &Matrix, b: &[Int]) -> Option<Vec<Int>> {
    let snf = smith_normal_form(m);
    let lb = snf.left.mul_vec(b);
    let mut y = vec![0; m.cols()];
    for (i, &v) in lb.iter().enumerate() {
        if i < snf.rank() {
            if v % snf.diag[i] != 0 {
                return None;
            }
            y[i] = v / snf.diag[i];
        } else if v != 0 {
            return None;
        }
    }
    Some(snf.right.mul_vec(&y))
}

/// A basis (as columns) of the lattice spanned by the columns of `gens`, in column Hermite form.
pub fn lattice_basis(gens: &Matrix) -> Matrix {
    column_hnf(gens, false).basis()
}

/// A sublattice of `Z^n` given by a basis, with exact coordinate lookup.
#[derive(Clone, Debug)]
pub struct Lattice {
    basis: Matrix,
    /// `echelon = basis * transform`, in column Hermite form.
    echelon: ColumnHnf,
}

impl Lattice {
    /// Lattice spanned by the columns of `gens` (not necessarily independent).
    pub fn spanned_by(gens: &Matrix) -> Self {
        Self::from_basis(lattice_basis(gens))
    }

    /// `basis` must have linearly independent columns.
    pub fn from_basis(basis: Matrix) -> Self {
        let echelon = column_hnf(&basis, true);
        assert_eq!(
            echelon.pivots.len(),
            basis.cols(),
            "lattice basis is not independent"
        );
        Lattice { basis, echelon }
    }

    pub fn basis(&self) -> &Matrix {
        &self.basis
    }

    pub fn rank(&self) -> usize {
        self.basis.cols()
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.rows()
    }

    /// Coordinates of `v` in the lattice basis, or `None` if `v` is not in the lattice.
    pub fn coords(&self, v: &[Int]) -> Option<Vec<Int>> {
        let h = &self.echelon.hnf;
        let mut r = v.to_vec();
        let mut y = vec![0; self.rank()];
        let mut row = 0;
        for (k, &p) in self.echelon.pivots.iter().enumerate() {
            if r[row..p].iter().any(|&x| x != 0) {
                return None;
            }
            let d = h[(p, k)];
            if r[p] % d != 0 {
                return None;
            }
            let q = r[p] / d;
            if q != 0 {
                for (i, ri) in r.iter_mut().enumerate().skip(p) {
                    *ri = csub(*ri, cmul(q, h[(i, k)]));
                }
            }
            y[k] = q;
            row = p + 1;
        }
        if r[row..].iter().any(|&x| x != 0) {
            return None;
        }
        Some(self.echelon.transform.mul_vec(&y))
    }

    pub fn contains(&self, v: &[Int]) -> bool {
        self.coords(v).is_some()
    }

    /// Coordinates of every column of `m`; `None` if some column lies outside.
    pub fn coords_matrix(&self, m: &Matrix) -> Option<Matrix> {
        let cols = (0..m.cols())
            .map(|j| self.coords(&m.column(j)))
            .collect::<Option<Vec<_>>>()?;
        Some(Matrix::from_columns(self.rank(), &cols))
    }

    /// True iff this is all of `Z^n`.
    pub fn is_full(&self) -> bool {
        self.rank() == self.ambient_dim()
            && self
                .echelon
                .pivots
                .iter()
                .enumerate()
                .all(|(k, &p)| self.echelon.hnf[(p, k)] == 1)
    }
}

/// A finitely generated abelian group `Z^free_rank ⊕ Z/t1 ⊕ ... ⊕ Z/tk` with `t1 | t2 | ...`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
pub struct AbelianGroup {
    pub free_rank: usize,
    pub torsion: Vec<Int>,
}

impl AbelianGroup {
    pub fn zero() -> Self {
        AbelianGroup::default()
    }

    pub fn free(rank: usize) -> Self {
        AbelianGroup {
            free_rank: rank,
            torsion: Vec::new(),
        }
    }

    pub fn cyclic(n: Int) -> Self {
        match n {
            0 => AbelianGroup::free(1),
            1 | -1 => AbelianGroup::zero(),
            n => AbelianGroup {
                free_rank: 0,
                torsion: vec![n.abs()],
            },
        }
    }

    pub fn is_zero(&self) -> bool {
        self.free_rank == 0 && self.torsion.is_empty()
    }

    /// `Z^n` modulo the span of the columns of `rels` (an `n x m` matrix).
    pub fn cokernel(rels: &Matrix) -> Self {
        let d = elementary_divisors(rels);
        AbelianGroup {
            free_rank: rels.rows() - d.len(),
            torsion: d.into_iter().filter(|&d| d != 1).collect(),
        }
    }

    /// Direct sum, renormalised into invariant-factor form.
    pub fn direct_sum(&self, other: &AbelianGroup) -> AbelianGroup {
        let ts: Vec<Int> = self.torsion.iter().chain(&other.torsion).copied().collect();
        let diag = Matrix::from_columns(ts.len(), &{
            (0..ts.len())
                .map(|j| {
                    let mut c = vec![0; ts.len()];
                    c[j] = ts[j];
                    c
                })
                .collect::<Vec<_>>()
        });
        let t = AbelianGroup::cokernel(&diag);
        AbelianGroup {
            free_rank: self.free_rank + other.free_rank,
            torsion: t.torsion,
        }
    }
}

impl fmt::Display for AbelianGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut parts = Vec::new();
        match self.free_rank {
            0 => {}
            1 => parts.push("Z".to_string()),
            r => parts.push(format!("Z^{r}")),
        }
        parts.extend(self.torsion.iter().map(|t| format!("Z/{t}")));
        write!(f, "{}", parts.join(" + "))
    }
}

/// `Z / B` for lattices `B ⊆ Z ⊆ Z^n` given by generating columns.
///
/// Returns `None` if some generator of `b` is not in the span of `z`.
pub fn subquotient(z: &Matrix, b: &Matrix) -> Option<AbelianGroup> {
    let zl = Lattice::spanned_by(z);
    let coords = zl.coords_matrix(b)?;
    Some(AbelianGroup::cokernel(&coords))
}

/// Normalised presentation of `Z^n / rowspan(relations)`.
///
/// The quotient has `gens` generators with diagonal relations `d_i` (zero
/// meaning free). `projection` maps old coordinates to new ones; `section`
/// maps new generators back to representatives in `Z^n`.
#[derive(Clone, Debug)]
pub struct PresentationReduction {
    pub orders: Vec<Int>,
    pub projection: Matrix,
    pub section: Matrix,
}

pub fn reduce_presentation(n: usize, relations: &Matrix) -> PresentationReduction {
    assert_eq!(relations.cols(), n, "relation width mismatch");
    let snf = smith_normal_form(&relations.transpose());
    let mut keep = Vec::new();
    let mut orders = Vec::new();
    for i in 0..n {
        let d = snf.diag.get(i).copied().unwrap_or(0);
        if d != 1 {
            keep.push(i);
            orders.push(d);
        }
    }
    PresentationReduction {
        orders,
        projection: snf.left.select_rows(&keep),
        section: snf.left_inv.select_columns(&keep),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn check_snf(m: &Matrix) {
        let snf = smith_normal_form(m);
        let prod = snf.left.mul(m).mul(&snf.right);
        assert_eq!(prod, snf.diagonal_matrix());
        assert_eq!(snf.left.mul(&snf.left_inv), Matrix::identity(m.rows()));
        assert_eq!(snf.left.determinant().abs(), 1);
        assert_eq!(snf.right.determinant().abs(), 1);
        for w in snf.diag.windows(2) {
            assert_eq!(w[1] % w[0], 0, "divisibility chain broken: {:?}", snf.diag);
        }
        assert!(snf.diag.iter().all(|&d| d > 0));
    }

    #[test]
    fn snf_identity() {
        let snf = smith_normal_form(&Matrix::identity(3));
        assert_eq!(snf.diag, vec![1, 1, 1]);
    }

    #[test]
    fn snf_two_by_two() {
        let m = Matrix::from_rows(&[vec![2, 4], vec![6, 8]]);
        let snf = smith_normal_form(&m);
        assert_eq!(snf.diag, vec![2, 4]);
        check_snf(&m);
    }

    #[test]
    fn snf_zero() {
        let snf = smith_normal_form(&Matrix::zeros(2, 3));
        assert!(snf.diag.is_empty());
        assert_eq!(snf.diagonal_matrix(), Matrix::zeros(2, 3));
    }

    #[test]
    fn snf_needs_divisibility_fix() {
        let m = Matrix::from_rows(&[vec![2, 0], vec![0, 3]]);
        assert_eq!(smith_normal_form(&m).diag, vec![1, 6]);
        check_snf(&m);
    }

    #[test]
    fn kernel_and_solve() {
        let m = Matrix::from_rows(&[vec![1, 1, 0], vec![0, 2, 2]]);
        let k = kernel(&m);
        assert_eq!(k.cols(), 1);
        assert!(m.mul(&k).is_zero());
        assert_eq!(solve(&m, &[1, 2]).map(|x| m.mul_vec(&x)), Some(vec![1, 2]));
        assert_eq!(solve(&m, &[0, 1]), None);
    }

    #[test]
    fn lattice_coordinates() {
        let l = Lattice::spanned_by(&Matrix::from_rows(&[vec![2, 0, 2], vec![0, 3, 3]]));
        assert_eq!(l.rank(), 2);
        assert!(l.contains(&[2, 3]));
        assert!(!l.contains(&[1, 0]));
        let c = l.coords(&[4, -3]).unwrap();
        assert_eq!(l.basis().mul_vec(&c), vec![4, -3]);
    }

    #[test]
    fn subquotient_of_lattices() {
        // Z^2 / (2Z + 0)
        let z = Matrix::identity(2);
        let b = Matrix::from_rows(&[vec![2], vec![0]]);
        assert_eq!(
            subquotient(&z, &b),
            Some(AbelianGroup {
                free_rank: 1,
                torsion: vec![2]
            })
        );
    }

    #[test]
    fn presentation_reduction() {
        // Z^3 / <(1,1,0), (0,2,2)>  ~  Z + Z/2
        let rels = Matrix::from_rows(&[vec![1, 1, 0], vec![0, 2, 2]]);
        let red = reduce_presentation(3, &rels);
        let mut orders = red.orders.clone();
        orders.sort();
        assert_eq!(orders, vec![0, 2]);
        assert_eq!(red.projection.mul(&red.section), Matrix::identity(2));
        // relations project to multiples of the orders
        for r in rels.to_rows() {
            let p = red.projection.mul_vec(&r);
            for (x, &d) in p.iter().zip(&red.orders) {
                if d == 0 {
                    assert_eq!(*x, 0);
                } else {
                    assert_eq!(x % d, 0);
                }
            }
        }
    }

    #[test]
    fn direct_sum_normalises() {
        let a = AbelianGroup::cyclic(2);
        let b = AbelianGroup::cyclic(3);
        assert_eq!(a.direct_sum(&b), AbelianGroup::cyclic(6));
    }

    proptest! {
        #[test]
        fn snf_invariants(rows in 1usize..6, cols in 1usize..6, seed in proptest::collection::vec(-6i64..7, 36)) {
            let data: Vec<Int> = seed.into_iter().take(rows * cols).collect();
            let m = Matrix::from_data(rows, cols, data).unwrap();
            check_snf(&m);
            prop_assert_eq!(elementary_divisors(&m), smith_normal_form(&m).diag);
            let k = kernel(&m);
            prop_assert!(m.mul(&k).is_zero());
            prop_assert_eq!(k.cols() + smith_normal_form(&m).rank(), cols);
            // saturated: every elementary divisor of the kernel basis is 1
            prop_assert!(smith_normal_form(&k).diag.iter().all(|&d| d == 1));
        }

        #[test]
        fn hnf_invariants(rows in 1usize..6, cols in 1usize..6, seed in proptest::collection::vec(-9i64..10, 36)) {
            let data: Vec<Int> = seed.into_iter().take(rows * cols).collect();
            let m = Matrix::from_data(rows, cols, data).unwrap();
            let h = column_hnf(&m, true);
            prop_assert_eq!(&m.mul(&h.transform), &h.hnf);
            prop_assert_eq!(h.transform.determinant().abs(), 1);
            prop_assert_eq!(h.pivots.len(), smith_normal_form(&m).rank());
            for (k, &p) in h.pivots.iter().enumerate() {
                prop_assert!(k == 0 || p > h.pivots[k - 1]);
                prop_assert!(h.hnf[(p, k)] > 0);
                prop_assert!((0..p).all(|i| h.hnf[(i, k)] == 0));
                prop_assert!((0..k).all(|j| (0..h.hnf[(p, k)]).contains(&h.hnf[(p, j)])));
            }
            prop_assert!((h.pivots.len()..cols).all(|j| h.hnf.column(j).iter().all(|&v| v == 0)));
        }

        #[test]
        fn lattice_membership(rows in 1usize..5, cols in 1usize..5, seed in proptest::collection::vec(-5i64..6, 20), probe in proptest::collection::vec(-7i64..8, 5)) {
            let data: Vec<Int> = seed.into_iter().take(rows * cols).collect();
            let gens = Matrix::from_data(rows, cols, data).unwrap();
            let lat = Lattice::spanned_by(&gens);
            let v: Vec<Int> = probe.into_iter().take(rows).collect();
            prop_assert_eq!(lat.contains(&v), solve(&gens, &v).is_some());
            if let Some(c) = lat.coords(&v) {
                prop_assert_eq!(lat.basis().mul_vec(&c), v);
            }
            for j in 0..cols {
                prop_assert!(lat.contains(&gens.column(j)));
            }
        }
    }

    #[test]
    fn kernel_of_wide_redundant_matrix() {
        // sparse ±1 rows with many repeated columns, the shape of naturality constraints
        let (rows, cols) = (60, 90);
        let mut m = Matrix::zeros(rows, cols);
        let mut state: u64 = 0x9e37_79b9_7f4a_7c15;
        for i in 0..rows {
            for _ in 0..4 {
                state ^= state << 13;
                state ^= state >> 7;
                state ^= state << 17;
                let j = (state % cols as u64) as usize;
                m[(i, j)] += if state & 1 == 0 { 1 } else { -1 };
            }
        }
        let m = m.hstack(&m.select_columns(&(0..30).collect::<Vec<_>>()).scale(2));
        let k = kernel(&m);
        assert!(m.mul(&k).is_zero());
        assert_eq!(k.cols() + elementary_divisors(&m).len(), m.cols());
        assert!(elementary_divisors(&k).iter().all(|&d| d == 1));
    }
}
