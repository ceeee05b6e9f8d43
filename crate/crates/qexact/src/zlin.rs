//! Exact integer linear algebra: echelon solving, Hermite and Smith normal
//! forms with unimodular transforms and their inverses.
//!
//! Everything here works over `BigInt` with elementary row/column operations
//! only, so results are exact and certifiable: a failed divisibility during
//! back-substitution is a proof that no integer solution exists, and the
//! accumulated transforms can always be multiplied back to the input as a
//! self-check (the unit tests do exactly that).

use num::bigint::BigInt;
use num::traits::{Euclid, One, Signed, Zero};

pub(crate) type Mat = Vec<Vec<BigInt>>;

pub(crate) fn identity(n: usize) -> Mat {
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { BigInt::one() } else { BigInt::zero() })
                .collect()
        })
        .collect()
}

pub(crate) fn mat_mul(a: &Mat, b: &Mat) -> Mat {
    let rows = a.len();
    let inner = b.len();
    let cols = if inner == 0 { 0 } else { b[0].len() };
    let mut out = vec![vec![BigInt::zero(); cols]; rows];
    for i in 0..rows {
        for (k, aik) in a[i].iter().enumerate() {
            if aik.is_zero() {
                continue;
            }
            for j in 0..cols {
                if !b[k][j].is_zero() {
                    out[i][j] += aik * &b[k][j];
                }
            }
        }
    }
    out
}

/// Determinant by fraction-free (Bareiss) elimination; exact over Z.
pub(crate) fn det(a: &Mat) -> BigInt {
    let n = a.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut m = a.clone();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if m[k][k].is_zero() {
            // Pivot search below row k.
            let swap = (k + 1..n).find(|&r| !m[r][k].is_zero());
            match swap {
                Some(r) => {
                    m.swap(k, r);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let num = &m[i][j] * &m[k][k] - &m[i][k] * &m[k][j];
                m[i][j] = num / &prev;
            }
            m[i][k] = BigInt::zero();
        }
        prev = m[k][k].clone();
    }
    sign * m[n - 1][n - 1].clone()
}

/// Solves `A·x = b` over the integers by column-echelon reduction.
///
/// Returns a particular solution (free coordinates pinned to zero in the
/// transformed basis, so the choice is deterministic), plus a flag telling
/// whether the solution is unique (trivial kernel on the active columns).
/// `None` certifies that no integer solution exists.
pub(crate) fn solve_integer(a: &Mat, b: &[BigInt]) -> Option<(Vec<BigInt>, bool)> {
    let rows = a.len();
    let cols = if rows == 0 { 0 } else { a[0].len() };
    // Work on columns: w = a·u throughout, with u unimodular.
    let mut w = a.clone();
    let mut u = identity(cols);
    let mut rank = 0usize;
    let mut pivots: Vec<(usize, usize)> = Vec::new(); // (row, col)
    for r in 0..rows {
        if rank == cols {
            break;
        }
        // Gcd-eliminate row r across active columns until one nonzero remains.
        loop {
            let mut min_col: Option<usize> = None;
            for c in rank..cols {
                if !w[r][c].is_zero()
                    && min_col.is_none_or(|mc| w[r][c].abs() < w[r][mc].abs())
                {
                    min_col = Some(c);
                }
            }
            let Some(mc) = min_col else {
                break;
            };
            let mut done = true;
            for c in rank..cols {
                if c == mc || w[r][c].is_zero() {
                    continue;
                }
                let q = &w[r][c] / &w[r][mc];
                if !q.is_zero() {
                    for i in 0..rows {
                        let sub = &q * &w[i][mc];
                        w[i][c] -= sub;
                    }
                    for i in 0..cols {
                        let sub = &q * &u[i][mc];
                        u[i][c] -= sub;
                    }
                }
                if !w[r][c].is_zero() {
                    done = false;
                }
            }
            if done {
                // Move the pivot column into position `rank`.
                for row in w.iter_mut() {
                    row.swap(rank, mc);
                }
                for row in u.iter_mut() {
                    row.swap(rank, mc);
                }
                pivots.push((r, rank));
                rank += 1;
                break;
            }
        }
    }
    // Forward substitution through the pivot rows.
    let mut residual: Vec<BigInt> = b.to_vec();
    let mut y = vec![BigInt::zero(); cols];
    for &(r, c) in &pivots {
        let p = &w[r][c];
        let (q, rem) = (&residual[r] / p, &residual[r] % p);
        if !rem.is_zero() {
            return None;
        }
        if !q.is_zero() {
            for i in 0..rows {
                let sub = &q * &w[i][c];
                residual[i] -= sub;
            }
        }
        y[c] = q;
    }
    if residual.iter().any(|v| !v.is_zero()) {
        return None;
    }
    // x = u·y.
    let mut x = vec![BigInt::zero(); cols];
    for (c, yc) in y.iter().enumerate() {
        if yc.is_zero() {
            continue;
        }
        for i in 0..cols {
            if !u[i][c].is_zero() {
                x[i] += yc * &u[i][c];
            }
        }
    }
    Some((x, rank == cols))
}

/// Column-style Hermite normal form for a nonsingular square matrix:
/// `H = A·U` with `U` unimodular, `H` upper triangular with positive diagonal
/// and off-diagonal entries reduced into `[0, diagonal)` within each row.
///
/// `H` is the canonical representative of the right coset `A·GL_n(Z)`; on
/// matrices of positive determinant this coincides with the `A·SL_n(Z)` coset
/// (the determinant pins the sign of the transform).
pub(crate) fn hermite_normal_form(a: &Mat) -> (Mat, Mat) {
    let n = a.len();
    let mut h = a.clone();
    let mut u = identity(n);
    // Zero out below the diagonal, working from the bottom row up: after
    // processing row r, only column r is nonzero in row r among columns ≤ r.
    for r in (0..n).rev() {
        loop {
            let mut min_col: Option<usize> = None;
            for c in 0..=r {
                if !h[r][c].is_zero()
                    && min_col.is_none_or(|mc| h[r][c].abs() < h[r][mc].abs())
                {
                    min_col = Some(c);
                }
            }
            let mc = min_col.expect("matrix must be nonsingular for HNF");
            let mut done = true;
            for c in 0..=r {
                if c == mc || h[r][c].is_zero() {
                    continue;
                }
                let q = &h[r][c] / &h[r][mc];
                if !q.is_zero() {
                    for i in 0..n {
                        let sub = &q * &h[i][mc];
                        h[i][c] -= sub;
                    }
                    for i in 0..n {
                        let sub = &q * &u[i][mc];
                        u[i][c] -= sub;
                    }
                }
                if !h[r][c].is_zero() {
                    done = false;
                }
            }
            if done {
                if mc != r {
                    for row in h.iter_mut() {
                        row.swap(r, mc);
                    }
                    for row in u.iter_mut() {
                        row.swap(r, mc);
                    }
                }
                break;
            }
        }
        if h[r][r].is_negative() {
            for i in 0..n {
                h[i][r] = -h[i][r].clone();
                u[i][r] = -u[i][r].clone();
            }
        }
    }
    // Reduce above-diagonal entries into [0, h[i][i]), descending i so that
    // later reductions cannot disturb earlier rows (column i has support in
    // rows ≤ i only).
    for i in (0..n).rev() {
        for j in i + 1..n {
            let q = h[i][j].div_euclid(&h[i][i]);
            if q.is_zero() {
                continue;
            }
            for k in 0..n {
                let sub = &q * &h[k][i];
                h[k][j] -= sub;
            }
            for k in 0..n {
                let sub = &q * &u[k][i];
                u[k][j] -= sub;
            }
        }
    }
    (h, u)
}

/// Smith normal form with both transforms and their exact inverses:
/// `p·A·q = d` (diagonal, positive, each entry dividing the next), with
/// `pinv·p = qinv·q = I`. Hence `A = pinv·d·qinv`.
pub(crate) struct Smith {
    pub d: Mat,
    pub p: Mat,
    pub pinv: Mat,
    pub q: Mat,
    pub qinv: Mat,
}

pub(crate) fn smith_normal_form(a: &Mat) -> Smith {
    let n = a.len();
    let mut d = a.clone();
    let mut p = identity(n);
    let mut pinv = identity(n);
    let mut q = identity(n);
    let mut qinv = identity(n);

    // Row op: row i += k·row j (on d and p); inverse op appended to pinv.
    macro_rules! row_add {
        ($i:expr, $j:expr, $k:expr) => {{
            let (i, j, k) = ($i, $j, $k);
            for c in 0..n {
                let t = &k * &d[j][c];
                d[i][c] += t;
                let t = &k * &p[j][c];
                p[i][c] += t;
            }
            // pinv ← pinv · (I − k·E_ij): column j of pinv -= k·column i.
            for r in 0..n {
                let t = &k * &pinv[r][i];
                pinv[r][j] -= t;
            }
        }};
    }
    macro_rules! col_add {
        ($i:expr, $j:expr, $k:expr) => {{
            // col i += k·col j (on d and q); qinv ← (I − k·E_ji)·qinv.
            let (i, j, k) = ($i, $j, $k);
            for r in 0..n {
                let t = &k * &d[r][j];
                d[r][i] += t;
            }
            for r in 0..n {
                let t = &k * &q[r][j];
                q[r][i] += t;
            }
            for c in 0..n {
                let t = &k * &qinv[i][c];
                qinv[j][c] -= t;
            }
        }};
    }
    macro_rules! row_swap {
        ($i:expr, $j:expr) => {{
            let (i, j) = ($i, $j);
            if i != j {
                d.swap(i, j);
                p.swap(i, j);
                for r in 0..n {
                    pinv[r].swap(i, j);
                }
            }
        }};
    }
    macro_rules! col_swap {
        ($i:expr, $j:expr) => {{
            let (i, j) = ($i, $j);
            if i != j {
                for r in 0..n {
                    d[r].swap(i, j);
                    q[r].swap(i, j);
                }
                qinv.swap(i, j);
            }
        }};
    }
    macro_rules! row_negate {
        ($i:expr) => {{
            let i = $i;
            for c in 0..n {
                d[i][c] = -d[i][c].clone();
                p[i][c] = -p[i][c].clone();
            }
            for r in 0..n {
                pinv[r][i] = -pinv[r][i].clone();
            }
        }};
    }

    'outer: loop {
        for t in 0..n {
            loop {
                // Find the smallest nonzero entry in the trailing block.
                let mut best: Option<(usize, usize)> = None;
                for i in t..n {
                    for j in t..n {
                        if !d[i][j].is_zero()
                            && best.is_none_or(|(bi, bj)| d[i][j].abs() < d[bi][bj].abs())
                        {
                            best = Some((i, j));
                        }
                    }
                }
                let Some((bi, bj)) = best else {
                    break; // trailing block is zero
                };
                row_swap!(t, bi);
                col_swap!(t, bj);
                let mut clean = true;
                for i in t + 1..n {
                    let qk = &d[i][t] / &d[t][t];
                    if !qk.is_zero() {
                        row_add!(i, t, -qk);
                    }
                    if !d[i][t].is_zero() {
                        clean = false;
                    }
                }
                for j in t + 1..n {
                    let qk = &d[t][j] / &d[t][t];
                    if !qk.is_zero() {
                        col_add!(j, t, -qk);
                    }
                    if !d[t][j].is_zero() {
                        clean = false;
                    }
                }
                if clean {
                    if d[t][t].is_negative() {
                        row_negate!(t);
                    }
                    break;
                }
            }
        }
        // Enforce the divisibility chain d_t | d_{t+1}; a violation folds the
        // next diagonal entry into column t and re-runs the elimination.
        for t in 0..n.saturating_sub(1) {
            if d[t][t].is_zero() || d[t + 1][t + 1].is_zero() {
                continue;
            }
            if (&d[t + 1][t + 1] % &d[t][t]).is_zero() {
                continue;
            }
            col_add!(t, t + 1, BigInt::one());
            continue 'outer;
        }
        break;
    }
    Smith { d, p, pinv, q, qinv }
}
