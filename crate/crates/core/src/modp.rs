//! Linear algebra over the prime field Z_p.
//!
//! Matrices are stored as `Vec<Vec<u32>>` with entries already reduced mod p.
//! Moduli are expected to be small (they are domain sizes), so all products
//! fit comfortably in `u64`.

pub fn is_prime(p: u32) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u32;
    while (d as u64) * (d as u64) <= p as u64 {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

#[inline]
pub fn add(a: u32, b: u32, p: u32) -> u32 {
    ((a as u64 + b as u64) % p as u64) as u32
}

#[inline]
pub fn sub(a: u32, b: u32, p: u32) -> u32 {
    ((a as u64 + p as u64 - b as u64) % p as u64) as u32
}

#[inline]
pub fn mul(a: u32, b: u32, p: u32) -> u32 {
    ((a as u64 * b as u64) % p as u64) as u32
}

pub fn reduce(x: i64, p: u32) -> u32 {
    x.rem_euclid(p as i64) as u32
}

/// Multiplicative inverse of a nonzero element (Fermat).
pub fn inv(a: u32, p: u32) -> u32 {
    debug_assert!(!a.is_multiple_of(p), "zero has no inverse");
    let mut base = a as u64 % p as u64;
    let mut exp = p as u64 - 2;
    let mut acc = 1u64;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * base % p as u64;
        }
        base = base * base % p as u64;
        exp >>= 1;
    }
    acc as u32
}

pub fn dot(a: &[u32], b: &[u32], p: u32) -> u32 {
    let mut acc = 0u64;
    for (x, y) in a.iter().zip(b) {
        acc = (acc + *x as u64 * *y as u64) % p as u64;
    }
    acc as u32
}

/// Brings `rows` into reduced row-echelon form, pivoting only in the first
/// `ncols` columns (any further columns, e.g. a right-hand side, are carried
/// along). Zero rows are removed and the remaining rows are sorted by pivot.
/// Returns the pivot column of each row.
pub fn rref(rows: &mut Vec<Vec<u32>>, ncols: usize, p: u32) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..ncols {
        let Some(sel) = (r..rows.len()).find(|&i| rows[i][col] != 0) else {
            continue;
        };
        rows.swap(r, sel);
        let scale = inv(rows[r][col], p);
        for v in rows[r].iter_mut() {
            *v = mul(*v, scale, p);
        }
        let pivot_row = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i == r || row[col] == 0 {
                continue;
            }
            let factor = row[col];
            for (v, pv) in row.iter_mut().zip(&pivot_row) {
                *v = sub(*v, mul(factor, *pv, p), p);
            }
        }
        pivots.push(col);
        r += 1;
        if r == rows.len() {
            break;
        }
    }
    // Rows below the last pivot have zero coefficients; keep only those with a
    // nonzero trailing part (inconsistencies), collapsed to one canonical row.
    let tail: Vec<Vec<u32>> = rows
        .drain(r..)
        .filter(|row| row.iter().any(|&v| v != 0))
        .collect();
    if let Some(first) = tail.into_iter().next() {
        rows.push(first);
    }
    pivots
}

/// Basis of `{x : A x = 0}` for a matrix already in RREF with the given
/// pivots. Basis vectors are returned in order of their free column.
pub fn nullspace_from_rref(
    rows: &[Vec<u32>],
    pivots: &[usize],
    ncols: usize,
    p: u32,
) -> Vec<Vec<u32>> {
    let mut is_pivot = vec![false; ncols];
    for &c in pivots {
        is_pivot[c] = true;
    }
    let mut basis = Vec::new();
    for free in (0..ncols).filter(|&c| !is_pivot[c]) {
        let mut v = vec![0u32; ncols];
        v[free] = 1;
        for (row, &pc) in rows.iter().zip(pivots) {
            v[pc] = sub(0, row[free], p);
        }
        basis.push(v);
    }
    basis
}

/// Solution set of the augmented system `[A | b]` with `ncols` unknowns:
/// `None` when inconsistent, otherwise a particular solution (zero in every
/// free coordinate) and a nullspace basis.
pub fn solve(mut aug: Vec<Vec<u32>>, ncols: usize, p: u32) -> Option<(Vec<u32>, Vec<Vec<u32>>)> {
    let pivots = rref(&mut aug, ncols, p);
    if aug.len() > pivots.len() {
        return None;
    }
    let mut particular = vec![0u32; ncols];
    for (row, &pc) in aug.iter().zip(&pivots) {
        particular[pc] = row[ncols];
    }
    let kernel = nullspace_from_rref(&aug, &pivots, ncols, p);
    Some((particular, kernel))
}

/// Reduces `v` against an RREF basis: the result is zero at every pivot and
/// differs from `v` by an element of the span.
pub fn reduce_by_basis(v: &mut [u32], basis: &[Vec<u32>], pivots: &[usize], p: u32) {
    for (b, &pc) in basis.iter().zip(pivots) {
        let f = v[pc];
        if f != 0 {
            for (x, y) in v.iter_mut().zip(b) {
                *x = sub(*x, mul(f, *y, p), p);
            }
        }
    }
}

pub fn pivot_columns(rows: &[Vec<u32>], ncols: usize) -> Vec<usize> {
    rows.iter()
        .map(|r| r[..ncols].iter().position(|&v| v != 0).unwrap_or(ncols))
        .collect()
}
