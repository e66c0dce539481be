//! Sparse and diagonal matrices, a banded direct solver, and the
//! symmetric-part eigenvalue estimate used by the dissipativity check.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

/// Diagonal matrix stored by its entries.
#[derive(Clone, Debug, PartialEq)]
pub struct DiagonalMatrix(pub Vec<f64>);

impl DiagonalMatrix {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Checks every entry is strictly positive, reporting the first offender.
    pub fn check_positive(&self, t: f64) -> Result<()> {
        match self.0.iter().position(|&v| !(v > 0.0)) {
            Some(node) => Err(Error::DegenerateMesh {
                node,
                t,
                value: self.0[node],
            }),
            None => Ok(()),
        }
    }

    pub fn sqrt(&self) -> Self {
        Self(self.0.iter().map(|v| v.sqrt()).collect())
    }

    pub fn recip(&self) -> Self {
        Self(self.0.iter().map(|v| 1.0 / v).collect())
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        self.0.iter().zip(x).map(|(d, v)| d * v).collect()
    }
}

/// Square or rectangular sparse matrix in compressed-row form.
///
/// Duplicate triplets are summed on construction.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseMatrix {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrix {
    pub fn from_triplets(
        nrows: usize,
        ncols: usize,
        triplets: &[(usize, usize, f64)],
    ) -> Result<Self> {
        if let Some(&(i, j, _)) = triplets.iter().find(|&&(i, j, _)| i >= nrows || j >= ncols) {
            return Err(Error::OutOfRange(format!(
                "triplet ({i}, {j}) outside {nrows}x{ncols}"
            )));
        }
        let mut counts = vec![0usize; nrows + 1];
        for &(i, _, _) in triplets {
            counts[i + 1] += 1;
        }
        for i in 0..nrows {
            counts[i + 1] += counts[i];
        }
        let mut next = counts.clone();
        let mut cols = vec![0usize; triplets.len()];
        let mut vals = vec![0.0; triplets.len()];
        for &(i, j, v) in triplets {
            cols[next[i]] = j;
            vals[next[i]] = v;
            next[i] += 1;
        }

        let mut row_ptr = Vec::with_capacity(nrows + 1);
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut values = Vec::with_capacity(triplets.len());
        row_ptr.push(0);
        let mut scratch: Vec<(usize, f64)> = Vec::new();
        for i in 0..nrows {
            scratch.clear();
            scratch.extend((counts[i]..counts[i + 1]).map(|p| (cols[p], vals[p])));
            scratch.sort_by_key(|&(c, _)| c);
            for &(c, v) in &scratch {
                match col_idx.last() {
                    Some(&last) if last == c && col_idx.len() > row_ptr[i] => {
                        *values.last_mut().unwrap() += v;
                    }
                    _ => {
                        col_idx.push(c);
                        values.push(v);
                    }
                }
            }
            row_ptr.push(col_idx.len());
        }
        Ok(Self {
            nrows,
            ncols,
            row_ptr,
            col_idx,
            values,
        })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            nrows: n,
            ncols: n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self {
            nrows,
            ncols,
            row_ptr: vec![0; nrows + 1],
            col_idx: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn from_diagonal(d: &[f64]) -> Self {
        Self {
            nrows: d.len(),
            ncols: d.len(),
            row_ptr: (0..=d.len()).collect(),
            col_idx: (0..d.len()).collect(),
            values: d.to_vec(),
        }
    }

    pub fn from_dense(a: &DMatrix<f64>) -> Self {
        let mut t = Vec::new();
        for i in 0..a.nrows() {
            for j in 0..a.ncols() {
                if a[(i, j)] != 0.0 {
                    t.push((i, j, a[(i, j)]));
                }
            }
        }
        Self::from_triplets(a.nrows(), a.ncols(), &t).expect("indices in range")
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn is_square(&self) -> bool {
        self.nrows == self.ncols
    }

    /// Stored entries of row `i` as (column, value).
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[r.clone()]
            .iter()
            .copied()
            .zip(self.values[r].iter().copied())
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.nrows).flat_map(move |i| self.row(i).map(move |(j, v)| (i, j, v)))
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.row(i).find(|&(c, _)| c == j).map_or(0.0, |(_, v)| v)
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.ncols, "vector length");
        (0..self.nrows)
            .map(|i| self.row(i).map(|(j, v)| v * x[j]).sum())
            .collect()
    }

    pub fn transpose(&self) -> Self {
        let t: Vec<_> = self.triplets().map(|(i, j, v)| (j, i, v)).collect();
        Self::from_triplets(self.ncols, self.nrows, &t).expect("indices in range")
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut a = DMatrix::zeros(self.nrows, self.ncols);
        for (i, j, v) in self.triplets() {
            a[(i, j)] += v;
        }
        a
    }

    /// Largest absolute stored value.
    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Returns diag(left) * self * diag(right).
    pub fn scale(&self, left: &[f64], right: &[f64]) -> Self {
        let mut out = self.clone();
        for i in 0..self.nrows {
            for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                out.values[p] *= left[i] * right[self.col_idx[p]];
            }
        }
        out
    }

    /// Returns self + diag(d); the diagonal is inserted where not stored.
    pub fn add_diagonal(&self, d: &[f64]) -> Self {
        let mut t: Vec<_> = self.triplets().collect();
        t.extend(d.iter().enumerate().map(|(i, &v)| (i, i, v)));
        Self::from_triplets(self.nrows, self.ncols, &t).expect("indices in range")
    }

    /// Lower and upper bandwidth.
    pub fn bandwidth(&self) -> (usize, usize) {
        let mut kl = 0;
        let mut ku = 0;
        for (i, j, _) in self.triplets() {
            if i > j {
                kl = kl.max(i - j);
            } else {
                ku = ku.max(j - i);
            }
        }
        (kl, ku)
    }
}

/// Reverse Cuthill-McKee ordering of the symmetrized pattern of `a`.
///
/// Returns `perm` with `perm[new] = old`.
pub fn reverse_cuthill_mckee(a: &SparseMatrix) -> Vec<usize> {
    let n = a.nrows();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, j, _) in a.triplets() {
        if i != j {
            adj[i].push(j);
            adj[j].push(i);
        }
    }
    for nbrs in adj.iter_mut() {
        nbrs.sort_unstable();
        nbrs.dedup();
    }
    let degree: Vec<usize> = adj.iter().map(Vec::len).collect();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut by_degree: Vec<usize> = (0..n).collect();
    by_degree.sort_by_key(|&v| degree[v]);
    for &start in &by_degree {
        if visited[start] {
            continue;
        }
        visited[start] = true;
        let mut head = order.len();
        order.push(start);
        while head < order.len() {
            let v = order[head];
            head += 1;
            let mut next: Vec<usize> = adj[v].iter().copied().filter(|&w| !visited[w]).collect();
            next.sort_by_key(|&w| degree[w]);
            for w in next {
                visited[w] = true;
                order.push(w);
            }
        }
    }
    order.reverse();
    order
}

/// LU factorization with partial pivoting of a banded matrix.
///
/// Band storage follows the LAPACK `gbtrf` layout: column-major with
/// `2 kl + ku + 1` rows per column, leaving room for the fill produced by
/// row interchanges.
#[derive(Clone, Debug)]
pub struct BandedLu {
    n: usize,
    kl: usize,
    ku: usize,
    ab: Vec<f64>,
    pivots: Vec<usize>,
}

impl BandedLu {
    fn ldab(kl: usize, ku: usize) -> usize {
        2 * kl + ku + 1
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        j * Self::ldab(self.kl, self.ku) + self.kl + self.ku + i - j
    }

    /// Factors `a` (square) with the given row/column permutation
    /// (`perm[new] = old`), or the identity ordering when `None`.
    pub fn factor(a: &SparseMatrix, perm: Option<&[usize]>) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} matrix is not square",
                a.nrows(),
                a.ncols()
            )));
        }
        let n = a.nrows();
        let inv: Vec<usize> = match perm {
            Some(p) => {
                let mut inv = vec![0; n];
                for (new, &old) in p.iter().enumerate() {
                    inv[old] = new;
                }
                inv
            }
            None => (0..n).collect(),
        };
        let mut kl = 0;
        let mut ku = 0;
        for (i, j, _) in a.triplets() {
            let (pi, pj) = (inv[i], inv[j]);
            if pi > pj {
                kl = kl.max(pi - pj);
            } else {
                ku = ku.max(pj - pi);
            }
        }
        let ldab = Self::ldab(kl, ku);
        let mut lu = Self {
            n,
            kl,
            ku,
            ab: vec![0.0; ldab * n],
            pivots: vec![0; n],
        };
        for (i, j, v) in a.triplets() {
            let k = lu.idx(inv[i], inv[j]);
            lu.ab[k] += v;
        }
        lu.factor_in_place()?;
        Ok(lu)
    }

    fn factor_in_place(&mut self) -> Result<()> {
        let n = self.n;
        let kl = self.kl;
        let ldab = Self::ldab(self.kl, self.ku);
        let kv = self.kl + self.ku;
        let mut ju = 0usize;
        for k in 0..n {
            let km = kl.min(n - 1 - k);
            let col = k * ldab + kv;
            let mut p = 0;
            let mut best = self.ab[col].abs();
            for i in 1..=km {
                let v = self.ab[col + i].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            self.pivots[k] = k + p;
            if best == 0.0 || !best.is_finite() {
                return Err(Error::SingularSystem { pivot: k });
            }
            ju = ju.max((k + self.ku + p).min(n - 1));
            if p != 0 {
                for c in k..=ju {
                    let a = self.idx(k, c);
                    let b = self.idx(k + p, c);
                    self.ab.swap(a, b);
                }
            }
            let piv = self.ab[col];
            for i in 1..=km {
                self.ab[col + i] /= piv;
            }
            if km == 0 {
                continue;
            }
            for c in k + 1..=ju {
                let top = self.idx(k, c);
                let a = self.ab[top];
                if a == 0.0 {
                    continue;
                }
                for i in 1..=km {
                    let l = self.ab[col + i];
                    self.ab[top + i] -= l * a;
                }
            }
        }
        Ok(())
    }

    /// Solves in the permuted ordering.
    fn solve_permuted(&self, x: &mut [f64]) {
        let n = self.n;
        let ldab = Self::ldab(self.kl, self.ku);
        let kv = self.kl + self.ku;
        for k in 0..n {
            let p = self.pivots[k];
            if p != k {
                x.swap(k, p);
            }
            let km = self.kl.min(n - 1 - k);
            let xk = x[k];
            if xk != 0.0 {
                let col = k * ldab + kv;
                for i in 1..=km {
                    x[k + i] -= self.ab[col + i] * xk;
                }
            }
        }
        for k in (0..n).rev() {
            let col = k * ldab + kv;
            x[k] /= self.ab[col];
            let xk = x[k];
            if xk != 0.0 {
                let top = k.saturating_sub(kv);
                for i in top..k {
                    x[i] -= self.ab[col - (k - i)] * xk;
                }
            }
        }
    }
}

/// Direct solve of A x = b: reverse Cuthill-McKee reordering (when it
/// narrows the band) followed by banded LU with partial pivoting.
pub fn solve_sparse(a: &SparseMatrix, b: &[f64]) -> Result<Vec<f64>> {
    if !a.is_square() || b.len() != a.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "matrix {}x{}, rhs {}",
            a.nrows(),
            a.ncols(),
            b.len()
        )));
    }
    let n = a.nrows();
    let (kl, ku) = a.bandwidth();
    let rcm = reverse_cuthill_mckee(a);
    let mut inv = vec![0; n];
    for (new, &old) in rcm.iter().enumerate() {
        inv[old] = new;
    }
    let (mut rkl, mut rku) = (0, 0);
    for (i, j, _) in a.triplets() {
        let (pi, pj) = (inv[i], inv[j]);
        if pi > pj {
            rkl = rkl.max(pi - pj);
        } else {
            rku = rku.max(pj - pi);
        }
    }
    let use_rcm = (2 * rkl + rku) < (2 * kl + ku);
    let perm = use_rcm.then_some(rcm.as_slice());
    let lu = BandedLu::factor(a, perm)?;
    let mut x: Vec<f64> = match perm {
        Some(p) => p.iter().map(|&old| b[old]).collect(),
        None => b.to_vec(),
    };
    lu.solve_permuted(&mut x);
    Ok(match perm {
        Some(p) => {
            let mut out = vec![0.0; n];
            for (new, &old) in p.iter().enumerate() {
                out[old] = x[new];
            }
            out
        }
        None => x,
    })
}

/// Size up to which the symmetric part is diagonalized densely.
pub const DENSE_EIG_LIMIT: usize = 2000;

/// Largest eigenvalue of the symmetric part (C + C^T)/2.
pub fn max_symmetric_eig(c: &SparseMatrix) -> Result<f64> {
    if !c.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} matrix is not square",
            c.nrows(),
            c.ncols()
        )));
    }
    let n = c.nrows();
    if n == 0 {
        return Ok(0.0);
    }
    if n <= DENSE_EIG_LIMIT {
        let d = c.to_dense();
        let s = (&d + d.transpose()) * 0.5;
        let eig = SymmetricEigen::new(s);
        return Ok(eig
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max));
    }
    Ok(power_iteration_max(c, 200, 1e-9))
}

/// Shifted power iteration on the symmetric part.
///
/// The Gershgorin bound shifts the spectrum to be nonnegative so the
/// dominant eigenvalue of the shifted operator is the largest one.
fn power_iteration_max(c: &SparseMatrix, iterations: usize, tol: f64) -> f64 {
    let n = c.nrows();
    let ct = c.transpose();
    let apply = |x: &[f64]| -> Vec<f64> {
        let a = c.mul_vec(x);
        let b = ct.mul_vec(x);
        a.iter().zip(&b).map(|(u, v)| 0.5 * (u + v)).collect()
    };
    let mut radius = vec![0.0; n];
    for (i, j, v) in c.triplets() {
        radius[i] += 0.5 * v.abs();
        radius[j] += 0.5 * v.abs();
    }
    let shift = radius.iter().fold(0.0f64, |m, &r| m.max(r));
    // deterministic, non-degenerate starting vector
    let mut x: Vec<f64> = (0..n)
        .map(|i| 1.0 + 0.1 * ((i * 7919) % 101) as f64 / 101.0)
        .collect();
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    x.iter_mut().for_each(|v| *v /= norm);
    let mut lambda = f64::NEG_INFINITY;
    for _ in 0..iterations {
        let sx = apply(&x);
        let rq: f64 = x.iter().zip(&sx).map(|(a, b)| a * b).sum();
        let mut y: Vec<f64> = sx.iter().zip(&x).map(|(s, xi)| s + shift * xi).collect();
        let ny = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        if ny == 0.0 {
            return rq;
        }
        y.iter_mut().for_each(|v| *v /= ny);
        let converged = (rq - lambda).abs() <= tol * (1.0 + rq.abs());
        lambda = rq;
        x = y;
        if converged {
            break;
        }
    }
    lambda
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn tridiag(n: usize) -> SparseMatrix {
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0));
            if i > 0 {
                t.push((i, i - 1, -1.0));
            }
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
            }
        }
        SparseMatrix::from_triplets(n, n, &t).unwrap()
    }

    #[test]
    fn identity_solve() {
        let x = solve_sparse(&SparseMatrix::identity(3), &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(x, vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn tridiagonal_solve() {
        let x = solve_sparse(&tridiag(3), &[1.0, 0.0, 0.0]).unwrap();
        for (xi, e) in x.iter().zip([0.75, 0.5, 0.25]) {
            assert_abs_diff_eq!(*xi, e, epsilon = 1e-15);
        }
    }

    #[test]
    fn zero_pivot_is_singular() {
        let a = SparseMatrix::from_triplets(1, 1, &[(0, 0, 0.0)]).unwrap();
        assert_eq!(
            solve_sparse(&a, &[1.0]),
            Err(Error::SingularSystem { pivot: 0 })
        );
    }

    #[test]
    fn pivoting_needed() {
        // zero leading entry forces a row swap
        let a =
            SparseMatrix::from_triplets(2, 2, &[(0, 1, 1.0), (1, 0, 1.0), (1, 1, 1.0)]).unwrap();
        let x = solve_sparse(&a, &[2.0, 5.0]).unwrap();
        assert_abs_diff_eq!(x[0], 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(x[1], 2.0, epsilon = 1e-15);
    }

    #[test]
    fn duplicates_are_summed() {
        let a =
            SparseMatrix::from_triplets(2, 2, &[(0, 0, 1.0), (0, 0, 2.0), (1, 1, 1.0)]).unwrap();
        assert_eq!(a.get(0, 0), 3.0);
        assert_eq!(a.nnz(), 2);
        assert!(SparseMatrix::from_triplets(2, 2, &[(2, 0, 1.0)]).is_err());
    }

    #[test]
    fn eigen_examples() {
        let d = SparseMatrix::from_diagonal(&[-1.0, -2.0]);
        assert_abs_diff_eq!(max_symmetric_eig(&d).unwrap(), -1.0, epsilon = 1e-12);
        let skew = SparseMatrix::from_triplets(2, 2, &[(0, 1, 1.0), (1, 0, -1.0)]).unwrap();
        assert_abs_diff_eq!(max_symmetric_eig(&skew).unwrap(), 0.0, epsilon = 1e-12);
        let c =
            SparseMatrix::from_triplets(2, 2, &[(0, 0, -2.0), (0, 1, 3.0), (1, 1, -2.0)]).unwrap();
        assert_abs_diff_eq!(max_symmetric_eig(&c).unwrap(), -0.5, epsilon = 1e-12);
    }

    #[test]
    fn power_iteration_matches_dense_on_laplacian() {
        let n = 50;
        let a = tridiag(n);
        let dense = max_symmetric_eig(&a).unwrap();
        let exact = 2.0 - 2.0 * (std::f64::consts::PI * n as f64 / (n as f64 + 1.0)).cos();
        assert_abs_diff_eq!(dense, exact, epsilon = 1e-10);
        let p = power_iteration_max(&a, 20000, 1e-14);
        assert!((p - exact).abs() < 1e-6 * exact, "{p} vs {exact}");
    }

    #[test]
    fn rcm_is_a_permutation() {
        let a = tridiag(10);
        let mut p = reverse_cuthill_mckee(&a);
        p.sort_unstable();
        assert_eq!(p, (0..10).collect::<Vec<_>>());
    }
}
