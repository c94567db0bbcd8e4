//! Dense LU, compressed sparse rows, and a block-tridiagonal direct solver.
//!
//! Generators of the inclusion process only couple configurations whose
//! count at a fixed site differs by at most one. Grouping states by that
//! count gives a block-tridiagonal matrix, which is factored by block
//! elimination with dense partial-pivot LU of each Schur complement.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Row-major dense LU with partial pivoting.
#[derive(Clone, Debug)]
pub struct DenseLu {
    n: usize,
    lu: Vec<f64>,
    piv: Vec<usize>,
}

impl DenseLu {
    pub fn factor(mut a: Vec<f64>, n: usize) -> Result<Self> {
        if a.len() != n * n {
            return Err(Error::DimensionMismatch);
        }
        let scale = a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        // only exact or near-underflow pivots count as singular; tiny but
        // legitimate pivots appear when d_N is small
        let tiny = scale * 1e-280;
        let mut piv: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let mut p = k;
            let mut best = a[k * n + k].abs();
            for i in k + 1..n {
                let v = a[i * n + k].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if !(best > tiny) {
                return Err(Error::SolverFailure(format!("singular pivot at column {k}")));
            }
            if p != k {
                for j in 0..n {
                    a.swap(k * n + j, p * n + j);
                }
                piv.swap(k, p);
            }
            let pivot = a[k * n + k];
            let (head, tail) = a.split_at_mut((k + 1) * n);
            let row_k = &head[k * n..];
            for i in 0..n - k - 1 {
                let row = &mut tail[i * n..(i + 1) * n];
                let f = row[k] / pivot;
                row[k] = f;
                if f != 0.0 {
                    for j in k + 1..n {
                        row[j] -= f * row_k[j];
                    }
                }
            }
        }
        Ok(DenseLu { n, lu: a, piv })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Solves A x = b in place.
    pub fn solve(&self, b: &mut [f64]) {
        let n = self.n;
        let mut x: Vec<f64> = self.piv.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let row = &self.lu[i * n..i * n + i];
            let mut s = x[i];
            for (j, l) in row.iter().enumerate() {
                s -= l * x[j];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let row = &self.lu[i * n..(i + 1) * n];
            let mut s = x[i];
            for j in i + 1..n {
                s -= row[j] * x[j];
            }
            x[i] = s / row[i];
        }
        b.copy_from_slice(&x);
    }
}

/// Solves a small dense system, consuming the matrix.
pub fn dense_solve(a: Vec<f64>, n: usize, b: &mut [f64]) -> Result<()> {
    let lu = DenseLu::factor(a, n)?;
    lu.solve(b);
    Ok(())
}

/// Compressed sparse row matrix.
#[derive(Clone, Debug, Default)]
pub struct Csr {
    pub rows: usize,
    pub cols: usize,
    pub indptr: Vec<usize>,
    pub indices: Vec<usize>,
    pub values: Vec<f64>,
}

impl Csr {
    /// Builds from (row, col, value) triplets; duplicates are summed.
    pub fn from_triplets(rows: usize, cols: usize, mut t: Vec<(usize, usize, f64)>) -> Self {
        t.sort_by_key(|e| (e.0, e.1));
        let mut indptr = vec![0usize; rows + 1];
        let mut indices = Vec::with_capacity(t.len());
        let mut values: Vec<f64> = Vec::with_capacity(t.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in t {
            if last == Some((r, c)) {
                *values.last_mut().expect("nonempty") += v;
            } else {
                indices.push(c);
                values.push(v);
                indptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..rows {
            indptr[r + 1] += indptr[r];
        }
        Csr { rows, cols, indptr, indices, values }
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.indptr[r]..self.indptr[r + 1];
        self.indices[span.clone()].iter().copied().zip(self.values[span].iter().copied())
    }

    pub fn mul_vec(&self, x: &[f64], y: &mut [f64]) {
        for r in 0..self.rows {
            y[r] = self.row(r).map(|(c, v)| v * x[c]).sum();
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

type Coupling = Vec<(usize, usize, f64)>;

/// Largest total of squared block sizes the factorization will allocate
/// (doubles). About 400 MB.
pub const BLOCK_MEMORY_CAP: usize = 50_000_000;

/// Factorization of a block-tridiagonal matrix given in CSR form with a
/// contiguous block partition of the unknowns.
#[derive(Clone, Debug)]
pub struct BlockTridiagLu {
    starts: Vec<usize>,
    schur: Vec<DenseLu>,
    // entries of block (k, k-1), local indices, for k >= 1 (index k-1)
    lower: Vec<Coupling>,
    // entries of block (k, k+1), local indices
    upper: Vec<Coupling>,
}

impl BlockTridiagLu {
    pub fn factor(a: &Csr, starts: &[usize]) -> Result<Self> {
        let nb = starts.len() - 1;
        if a.rows != a.cols || starts[nb] != a.rows || starts[0] != 0 {
            return Err(Error::DimensionMismatch);
        }
        let mem: usize = (0..nb).map(|k| (starts[k + 1] - starts[k]).pow(2)).sum();
        if mem > BLOCK_MEMORY_CAP {
            return Err(Error::SolverFailure(format!(
                "block factorization needs {mem} entries, above the cap"
            )));
        }
        let mut block_of = vec![0usize; a.rows];
        for k in 0..nb {
            for i in starts[k]..starts[k + 1] {
                block_of[i] = k;
            }
        }
        let mut diag: Vec<Vec<f64>> =
            (0..nb).map(|k| vec![0.0; (starts[k + 1] - starts[k]).pow(2)]).collect();
        let mut lower: Vec<Coupling> = vec![Vec::new(); nb.saturating_sub(1)];
        let mut upper: Vec<Coupling> = vec![Vec::new(); nb.saturating_sub(1)];
        for r in 0..a.rows {
            let kr = block_of[r];
            let lr = r - starts[kr];
            for (c, v) in a.row(r) {
                let kc = block_of[c];
                let lc = c - starts[kc];
                if kc == kr {
                    let b = starts[kr + 1] - starts[kr];
                    diag[kr][lr * b + lc] += v;
                } else if kc + 1 == kr {
                    lower[kr - 1].push((lr, lc, v));
                } else if kc == kr + 1 {
                    upper[kr].push((lr, lc, v));
                } else {
                    return Err(Error::SolverFailure(format!(
                        "entry ({r},{c}) couples non-adjacent blocks"
                    )));
                }
            }
        }

        let mut schur: Vec<DenseLu> = Vec::with_capacity(nb);
        let mut diag_iter = diag.into_iter();
        for k in 0..nb {
            let mut s = diag_iter.next().expect("block count");
            let b = starts[k + 1] - starts[k];
            if k > 0 {
                let prev = &schur[k - 1];
                let bp = prev.dim();
                // X = S_{k-1}^{-1} U_{k-1}, gathered column by column
                let mut ucols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); b];
                for &(i, j, v) in &upper[k - 1] {
                    ucols[j].push((i, v));
                }
                let mut x = vec![0.0; bp * b]; // row-major bp x b
                let mut col = vec![0.0; bp];
                for (j, entries) in ucols.iter().enumerate() {
                    if entries.is_empty() {
                        continue;
                    }
                    col.iter_mut().for_each(|c| *c = 0.0);
                    for &(i, v) in entries {
                        col[i] += v;
                    }
                    prev.solve(&mut col);
                    for i in 0..bp {
                        x[i * b + j] = col[i];
                    }
                }
                for &(i, jp, v) in &lower[k - 1] {
                    let xrow = &x[jp * b..(jp + 1) * b];
                    let srow = &mut s[i * b..(i + 1) * b];
                    for (sv, xv) in srow.iter_mut().zip(xrow) {
                        *sv -= v * xv;
                    }
                }
            }
            schur.push(DenseLu::factor(s, b)?);
        }
        Ok(BlockTridiagLu { starts: starts.to_vec(), schur, lower, upper })
    }

    /// Solves A x = b in place.
    pub fn solve(&self, b: &mut [f64]) {
        let nb = self.schur.len();
        let st = &self.starts;
        // forward sweep: b_k <- b_k - L_k S_{k-1}^{-1} b_{k-1}, keeping z_k = S_k^{-1} b_k
        let mut z: Vec<Vec<f64>> = Vec::with_capacity(nb);
        for k in 0..nb {
            if k > 0 {
                let zp = &z[k - 1];
                for &(i, jp, v) in &self.lower[k - 1] {
                    b[st[k] + i] -= v * zp[jp];
                }
            }
            let mut zk = b[st[k]..st[k + 1]].to_vec();
            self.schur[k].solve(&mut zk);
            z.push(zk);
        }
        // backward sweep
        for k in (0..nb).rev() {
            if k + 1 < nb {
                let mut rhs = b[st[k]..st[k + 1]].to_vec();
                for &(i, j, v) in &self.upper[k] {
                    rhs[i] -= v * b[st[k + 1] + j];
                }
                self.schur[k].solve(&mut rhs);
                b[st[k]..st[k + 1]].copy_from_slice(&rhs);
            } else {
                b[st[k]..st[k + 1]].copy_from_slice(&z[k]);
            }
        }
    }
}

/// Direct solve with a few rounds of iterative refinement against `a`.
pub fn refined_solve(a: &Csr, lu: &BlockTridiagLu, rhs: &[f64]) -> Vec<f64> {
    let mut x = rhs.to_vec();
    lu.solve(&mut x);
    let mut r = vec![0.0; rhs.len()];
    let mut last = f64::INFINITY;
    for _ in 0..3 {
        a.mul_vec(&x, &mut r);
        let mut norm = 0.0f64;
        for (ri, bi) in r.iter_mut().zip(rhs) {
            *ri = bi - *ri;
            norm = norm.max(ri.abs());
        }
        if norm == 0.0 || norm >= last {
            break;
        }
        last = norm;
        lu.solve(&mut r);
        for (xi, di) in x.iter_mut().zip(&r) {
            *xi += di;
        }
    }
    x
}
