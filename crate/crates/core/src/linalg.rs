//! Small dense exact linear algebra: rational elimination, inertia of
//! symmetric forms, and integer lattice operations (echelon forms, kernels,
//! integral solutions).
//!
//! Matrices are row-major `Vec<Vec<_>>`. Sizes here are tiny (at most a
//! dozen rows), so clarity wins over clever storage.

use num_bigint::BigInt;
use num_integer::Integer as _;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub type QMat = Vec<Vec<BigRational>>;
pub type ZMat = Vec<Vec<BigInt>>;

pub fn rat(n: i64) -> BigRational {
    BigRational::from_integer(n.into())
}

pub fn to_rational(m: &[Vec<i64>]) -> QMat {
    m.iter().map(|r| r.iter().map(|&x| rat(x)).collect()).collect()
}

pub fn zeros(rows: usize, cols: usize) -> QMat {
    vec![vec![BigRational::zero(); cols]; rows]
}

pub fn identity(n: usize) -> QMat {
    let mut m = zeros(n, n);
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = BigRational::one();
    }
    m
}

pub fn transpose<T: Clone>(a: &[Vec<T>]) -> Vec<Vec<T>> {
    if a.is_empty() {
        return vec![];
    }
    (0..a[0].len())
        .map(|j| a.iter().map(|r| r[j].clone()).collect())
        .collect()
}

pub fn mat_mul(a: &[Vec<BigRational>], b: &[Vec<BigRational>]) -> QMat {
    let cols = b.first().map_or(0, |r| r.len());
    a.iter()
        .map(|row| {
            (0..cols)
                .map(|j| {
                    row.iter()
                        .zip(b)
                        .fold(BigRational::zero(), |acc, (x, br)| acc + x * &br[j])
                })
                .collect()
        })
        .collect()
}

/// `a * v` for a column vector `v`.
pub fn mat_vec(a: &[Vec<BigRational>], v: &[BigRational]) -> Vec<BigRational> {
    a.iter().map(|row| dot(row, v)).collect()
}

/// `v^T * a`.
pub fn vec_mat(v: &[BigRational], a: &[Vec<BigRational>]) -> Vec<BigRational> {
    let cols = a.first().map_or(0, |r| r.len());
    (0..cols)
        .map(|j| {
            v.iter()
                .zip(a)
                .fold(BigRational::zero(), |acc, (x, r)| acc + x * &r[j])
        })
        .collect()
}

pub fn dot(a: &[BigRational], b: &[BigRational]) -> BigRational {
    a.iter()
        .zip(b)
        .fold(BigRational::zero(), |acc, (x, y)| acc + x * y)
}

/// `u^T g v`.
pub fn bilinear(g: &[Vec<BigRational>], u: &[BigRational], v: &[BigRational]) -> BigRational {
    dot(u, &mat_vec(g, v))
}

pub fn det(a: &[Vec<BigRational>]) -> BigRational {
    let n = a.len();
    let mut m = a.to_vec();
    let mut d = BigRational::one();
    for k in 0..n {
        let Some(p) = (k..n).find(|&i| !m[i][k].is_zero()) else {
            return BigRational::zero();
        };
        if p != k {
            m.swap(p, k);
            d = -d;
        }
        let piv = m[k][k].clone();
        d *= &piv;
        for i in k + 1..n {
            if m[i][k].is_zero() {
                continue;
            }
            let f = &m[i][k] / &piv;
            for j in k..n {
                let t = &f * &m[k][j];
                m[i][j] -= t;
            }
        }
    }
    d
}

/// Inverse by Gauss-Jordan; `None` when singular.
pub fn inverse(a: &[Vec<BigRational>]) -> Option<QMat> {
    let n = a.len();
    let mut m = a.to_vec();
    let mut inv = identity(n);
    for k in 0..n {
        let p = (k..n).find(|&i| !m[i][k].is_zero())?;
        m.swap(p, k);
        inv.swap(p, k);
        let piv = m[k][k].clone();
        for j in 0..n {
            m[k][j] /= &piv;
            inv[k][j] /= &piv;
        }
        for i in 0..n {
            if i == k || m[i][k].is_zero() {
                continue;
            }
            let f = m[i][k].clone();
            for j in 0..n {
                let t = &f * &m[k][j];
                m[i][j] -= t;
                let t = &f * &inv[k][j];
                inv[i][j] -= t;
            }
        }
    }
    Some(inv)
}

/// Inertia `(positive, negative, zero)` of a symmetric matrix, by exact
/// congruence diagonalization.
pub fn inertia(sym: &[Vec<BigRational>]) -> (usize, usize, usize) {
    let n = sym.len();
    let mut a = sym.to_vec();
    let (mut pos, mut neg) = (0, 0);
    for k in 0..n {
        if a[k][k].is_zero() {
            if let Some(p) = (k + 1..n).find(|&i| !a[i][i].is_zero()) {
                swap_sym(&mut a, k, p);
            } else if let Some((i, j)) = (k..n)
                .flat_map(|i| (k..n).map(move |j| (i, j)))
                .find(|&(i, j)| i != j && !a[i][j].is_zero())
            {
                // all remaining diagonal entries vanish: add row/col j to i
                add_sym(&mut a, i, j);
                swap_sym(&mut a, k, i);
            } else {
                break;
            }
        }
        let piv = a[k][k].clone();
        if piv.is_positive() {
            pos += 1;
        } else {
            neg += 1;
        }
        for i in k + 1..n {
            if a[i][k].is_zero() {
                continue;
            }
            let f = &a[i][k] / &piv;
            for j in k..n {
                let t = &f * &a[k][j];
                a[i][j] -= t;
            }
            for j in k..n {
                let t = &f * &a[j][k];
                a[j][i] -= t;
            }
        }
    }
    (pos, neg, n - pos - neg)
}

fn swap_sym(a: &mut [Vec<BigRational>], i: usize, j: usize) {
    a.swap(i, j);
    for row in a.iter_mut() {
        row.swap(i, j);
    }
}

fn add_sym(a: &mut [Vec<BigRational>], i: usize, j: usize) {
    let n = a.len();
    for c in 0..n {
        let t = a[j][c].clone();
        a[i][c] += t;
    }
    for r in 0..n {
        let t = a[r][j].clone();
        a[r][i] += t;
    }
}

pub fn is_positive_definite(sym: &[Vec<BigRational>]) -> bool {
    inertia(sym) == (sym.len(), 0, 0)
}

pub fn is_negative_definite(sym: &[Vec<BigRational>]) -> bool {
    inertia(sym) == (0, sym.len(), 0)
}

/// `sym = L D L^T` with `L` unit lower triangular, for a positive definite
/// matrix. Returns `(L, diag(D))`.
pub fn ldl(sym: &[Vec<BigRational>]) -> (QMat, Vec<BigRational>) {
    let n = sym.len();
    let mut l = identity(n);
    let mut d = vec![BigRational::zero(); n];
    for j in 0..n {
        let mut s = sym[j][j].clone();
        for k in 0..j {
            s -= &l[j][k] * &l[j][k] * &d[k];
        }
        d[j] = s;
        for i in j + 1..n {
            let mut s = sym[i][j].clone();
            for k in 0..j {
                s -= &l[i][k] * &l[j][k] * &d[k];
            }
            l[i][j] = s / &d[j];
        }
    }
    (l, d)
}

pub fn lcm_of_denoms<'a, I: IntoIterator<Item = &'a BigRational>>(it: I) -> BigInt {
    it.into_iter()
        .fold(BigInt::one(), |acc, x| acc.lcm(x.denom()))
}

/// Column-style integer echelon form: returns `(e, u, pivots)` with
/// `m * u = e`, `u` unimodular, the first `pivots.len()` columns of `e` in
/// echelon form (column `c` has its first nonzero entry, positive, in row
/// `pivots[c]`, strictly increasing) and all other columns zero.
pub fn column_echelon(m: &[Vec<BigInt>], ncols: usize) -> (ZMat, ZMat, Vec<usize>) {
    let mut e: ZMat = m.to_vec();
    let mut u: ZMat = (0..ncols)
        .map(|i| {
            (0..ncols)
                .map(|j| if i == j { BigInt::one() } else { BigInt::zero() })
                .collect()
        })
        .collect();
    let rows = e.len();
    let mut pivots = Vec::new();
    let mut p = 0;
    for i in 0..rows {
        if p == ncols {
            break;
        }
        loop {
            // smallest nonzero |entry| in row i among columns p..
            let best = (p..ncols)
                .filter(|&j| !e[i][j].is_zero())
                .min_by(|&a, &b| e[i][a].abs().cmp(&e[i][b].abs()));
            let Some(best) = best else { break };
            swap_cols(&mut e, p, best);
            swap_cols(&mut u, p, best);
            let mut done = true;
            for j in p + 1..ncols {
                if e[i][j].is_zero() {
                    continue;
                }
                let f = e[i][j].div_floor(&e[i][p]);
                sub_col(&mut e, j, p, &f);
                sub_col(&mut u, j, p, &f);
                if !e[i][j].is_zero() {
                    done = false;
                }
            }
            if done {
                break;
            }
        }
        if p < ncols && !e[i][p].is_zero() {
            if e[i][p].is_negative() {
                neg_col(&mut e, p);
                neg_col(&mut u, p);
            }
            pivots.push(i);
            p += 1;
        }
    }
    (e, u, pivots)
}

fn swap_cols(m: &mut [Vec<BigInt>], a: usize, b: usize) {
    if a != b {
        for row in m.iter_mut() {
            row.swap(a, b);
        }
    }
}

fn sub_col(m: &mut [Vec<BigInt>], target: usize, src: usize, f: &BigInt) {
    for row in m.iter_mut() {
        let t = &row[src] * f;
        row[target] -= t;
    }
}

fn neg_col(m: &mut [Vec<BigInt>], c: usize) {
    for row in m.iter_mut() {
        row[c] = -row[c].clone();
    }
}

/// Scales each rational row to a primitive-denominator integer row.
pub fn clear_rows(rows: &[Vec<BigRational>]) -> ZMat {
    rows.iter()
        .map(|r| {
            let d = lcm_of_denoms(r);
            r.iter()
                .map(|x| (x * BigRational::from_integer(d.clone())).to_integer())
                .collect()
        })
        .collect()
}

/// A basis of `{v in Z^n : rows * v = 0}`, one vector per entry.
pub fn integer_kernel(rows: &[Vec<BigRational>], n: usize) -> ZMat {
    if rows.is_empty() {
        return (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| if i == j { BigInt::one() } else { BigInt::zero() })
                    .collect()
            })
            .collect();
    }
    let m = clear_rows(rows);
    let (_, u, pivots) = column_echelon(&m, n);
    (pivots.len()..n)
        .map(|c| u.iter().map(|row| row[c].clone()).collect())
        .collect()
}

/// Some `v in Z^n` with `rows * v = rhs`, or `None`.
pub fn solve_integer(rows: &[Vec<BigRational>], rhs: &[BigRational], n: usize) -> Option<Vec<BigInt>> {
    // scale each equation to integer coefficients; the right side must follow
    let mut m = Vec::with_capacity(rows.len());
    let mut b = Vec::with_capacity(rows.len());
    for (r, c) in rows.iter().zip(rhs) {
        let d = BigRational::from_integer(lcm_of_denoms(r.iter().chain(std::iter::once(c))));
        m.push(r.iter().map(|x| (x * &d).to_integer()).collect::<Vec<_>>());
        b.push((c * &d).to_integer());
    }
    let (e, u, pivots) = column_echelon(&m, n);
    let mut w = vec![BigInt::zero(); n];
    for (c, &pr) in pivots.iter().enumerate() {
        let mut acc = b[pr].clone();
        for (c2, wc) in w.iter().enumerate().take(c) {
            acc -= &e[pr][c2] * wc;
        }
        let (q, r) = acc.div_rem(&e[pr][c]);
        if !r.is_zero() {
            return None;
        }
        w[c] = q;
    }
    for (i, bi) in b.iter().enumerate() {
        let lhs = (0..n).fold(BigInt::zero(), |acc, c| acc + &e[i][c] * &w[c]);
        if &lhs != bi {
            return None;
        }
    }
    Some(
        u.iter()
            .map(|row| row.iter().zip(&w).fold(BigInt::zero(), |acc, (x, y)| acc + x * y))
            .collect(),
    )
}

/// Triangular basis of the lattice generated by `gens` (vectors in Z^n).
/// Vector `c` of the result has its first nonzero coordinate, positive, at
/// a strictly increasing position.
pub fn lattice_basis(gens: &[Vec<BigInt>], n: usize) -> ZMat {
    let cols = transpose(gens);
    let cols = if cols.is_empty() {
        vec![vec![]; n]
    } else {
        cols
    };
    let (e, _, pivots) = column_echelon(&cols, gens.len());
    (0..pivots.len())
        .map(|c| e.iter().map(|row| row[c].clone()).collect())
        .collect()
}

/// Basis of `{v in Z^n : sum_i weights_i v_i in modulus * Z^k}` where each
/// `v_i` is a block of `k` coordinates (`n = weights.len() * k`).
pub fn congruence_lattice(weights: &[i64], k: usize, modulus: i64) -> ZMat {
    let n = weights.len() * k;
    // kernel of [M | modulus * I_k] projected to the first n coordinates
    let rows: Vec<Vec<BigRational>> = (0..k)
        .map(|t| {
            let mut row = vec![BigRational::zero(); n + k];
            for (i, &w) in weights.iter().enumerate() {
                row[i * k + t] = rat(w);
            }
            row[n + t] = rat(modulus);
            row
        })
        .collect();
    let ker = integer_kernel(&rows, n + k);
    let gens: ZMat = ker.into_iter().map(|v| v[..n].to_vec()).collect();
    lattice_basis(&gens, n)
}

pub fn int_to_rat(v: &[BigInt]) -> Vec<BigRational> {
    v.iter().map(|x| BigRational::from_integer(x.clone())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn qm(m: &[&[i64]]) -> QMat {
        m.iter().map(|r| r.iter().map(|&x| rat(x)).collect()).collect()
    }

    #[test]
    fn inverse_and_det() {
        let a = qm(&[&[2, 1], &[1, 1]]);
        assert_eq!(det(&a), rat(1));
        let inv = inverse(&a).unwrap();
        assert_eq!(mat_mul(&a, &inv), identity(2));
        assert!(inverse(&qm(&[&[1, 2], &[2, 4]])).is_none());
    }

    #[test]
    fn inertia_examples() {
        assert_eq!(inertia(&qm(&[&[0, 1], &[1, 0]])), (1, 1, 0));
        assert_eq!(inertia(&qm(&[&[2, 1], &[1, 2]])), (2, 0, 0));
        assert_eq!(inertia(&qm(&[&[1, 0, 0], &[0, 0, 0], &[0, 0, -3]])), (1, 1, 1));
        assert_eq!(inertia(&qm(&[&[0, 0, 1], &[0, 0, 0], &[1, 0, 0]])), (1, 1, 1));
    }

    #[test]
    fn kernel_and_solve() {
        let rows = vec![vec![rat(2), rat(4), rat(6)]];
        let ker = integer_kernel(&rows, 3);
        assert_eq!(ker.len(), 2);
        for v in &ker {
            assert_eq!(dot(&rows[0], &int_to_rat(v)), rat(0));
        }
        // kernel is saturated: index of the span in {v : v1 + 2 v2 + 3 v3 = 0} is 1
        let g = qm(&[&[1, 2, 3]]);
        let k2 = integer_kernel(&g, 3);
        let minor = |a: usize, b: usize| &k2[0][a] * &k2[1][b] - &k2[0][b] * &k2[1][a];
        let g = minor(0, 1).gcd(&minor(0, 2)).gcd(&minor(1, 2));
        assert_eq!(g, BigInt::one());
        assert!(solve_integer(&rows, &[rat(3)], 3).is_none());
        let v = solve_integer(&rows, &[rat(8)], 3).unwrap();
        assert_eq!(dot(&rows[0], &int_to_rat(&v)), rat(8));
    }

    #[test]
    fn congruence_lattice_index() {
        // {(a, b) in Z^2 blocks of size 1 : a + b = 0 mod 2}
        let b = congruence_lattice(&[1, 1], 1, 2);
        let d = &b[0][0] * &b[1][1] - &b[0][1] * &b[1][0];
        assert_eq!(d.abs(), BigInt::from(2));
        // weights (2,1) mod 3 with k = 2: index 9
        let b = congruence_lattice(&[2, 1], 2, 3);
        assert_eq!(b.len(), 4);
        let m: QMat = b.iter().map(|r| int_to_rat(r)).collect();
        assert_eq!(det(&m).abs(), rat(9));
    }

    proptest! {
        #[test]
        fn ldl_reconstructs(a in prop::collection::vec(-3i64..4, 9)) {
            // a^T a + I is positive definite
            let m = qm(&[&a[0..3], &a[3..6], &a[6..9]]);
            let mut g = mat_mul(&transpose(&m), &m);
            for (i, row) in g.iter_mut().enumerate() { row[i] += rat(1); }
            prop_assert!(is_positive_definite(&g));
            let (l, d) = ldl(&g);
            let mut dl = transpose(&l);
            for (i, row) in dl.iter_mut().enumerate() {
                for x in row.iter_mut() { *x *= &d[i]; }
            }
            prop_assert_eq!(mat_mul(&l, &dl), g);
        }

        #[test]
        fn inertia_is_congruence_invariant(d in prop::collection::vec(-2i64..3, 3), p in prop::collection::vec(-2i64..3, 9)) {
            let pm = qm(&[&p[0..3], &p[3..6], &p[6..9]]);
            prop_assume!(!det(&pm).is_zero());
            let dm = qm(&[&[d[0], 0, 0], &[0, d[1], 0], &[0, 0, d[2]]]);
            let g = mat_mul(&mat_mul(&transpose(&pm), &dm), &pm);
            let pos = d.iter().filter(|&&x| x > 0).count();
            let neg = d.iter().filter(|&&x| x < 0).count();
            prop_assert_eq!(inertia(&g), (pos, neg, 3 - pos - neg));
        }

        #[test]
        fn integer_solutions_are_solutions(r in prop::collection::vec(-5i64..6, 6), v in prop::collection::vec(-4i64..5, 3)) {
            let rows = qm(&[&r[0..3], &r[3..6]]);
            let vq: Vec<_> = v.iter().map(|&x| rat(x)).collect();
            let rhs = mat_vec(&rows, &vq);
            let sol = solve_integer(&rows, &rhs, 3).expect("solvable by construction");
            prop_assert_eq!(mat_vec(&rows, &int_to_rat(&sol)), rhs);
            for k in integer_kernel(&rows, 3) {
                prop_assert!(mat_vec(&rows, &int_to_rat(&k)).iter().all(|x| x.is_zero()));
            }
        }
    }
}
