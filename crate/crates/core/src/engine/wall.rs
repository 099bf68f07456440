//! The `S`- and `U`-series attached to a wall, their brute-force
//! counterparts, and the blow-up factor.
//!
//! For pieces `(r_i, beta_i)` with `beta_i = beta_bar_i mod r_i` and
//! `sum beta_i = (l, 1 - l)`, both series sum a Joyce coefficient times
//! `prod_{i -> j} K.(r_j beta_i - r_i beta_j)` times
//! `q^{-sum_{i<j} (r_j beta_i - r_i beta_j)^2 / (2 r r_i r_j)}`.
//!
//! The fast path rewrites the `S`-series in the consecutive slope
//! differences `nu_i = beta_i/r_i - beta_{i+1}/r_{i+1}`, which turns it into
//! a signed combination of indefinite theta series in `q^{1/r}`. The
//! `U`-series is reduced to `S`-series of grouped pieces times positive
//! definite sums over how each group splits along the exceptional curve.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::geometry::{intersect, k_dot, NSVec, SheafClass};
use crate::joyce::{compositions, s_coeff, u_coeff_with_limit, Digraph};
use crate::linalg::{self, rat, QMat};
use crate::qseries::{eta_pow, QExp};
use crate::theta::{self, classical_theta, indefinite_theta, XiData};
use crate::QSeries;

use super::{GroupedWall, Part, WallData};

fn total_class(l: i64) -> NSVec {
    NSVec::new(l, 1 - l)
}

fn qexp_to_rational(e: QExp) -> BigRational {
    BigRational::new((*e.numer()).into(), (*e.denom()).into())
}

/// `B(nu, nu') = sum_{p,q} a_pq (nu_p . nu'_q)` with
/// `a_pq = -sum_{k <= min(p,q) < max(p,q) < l} r_k r_l`, laid out on
/// coordinates `(x_1, y_1, ..., x_{m-1}, y_{m-1})`.
pub fn ambient_gram(ranks: &[i64]) -> Vec<Vec<i64>> {
    let m = ranks.len();
    let d = m.saturating_sub(1);
    let mut a = vec![vec![0i64; d]; d];
    for p in 0..d {
        for q in 0..d {
            let (lo, hi) = (p.min(q), p.max(q));
            let left: i64 = ranks[..=lo].iter().sum();
            let right: i64 = ranks[hi + 1..].iter().sum();
            a[p][q] = -left * right;
        }
    }
    let mut g = vec![vec![0i64; 2 * d]; 2 * d];
    for p in 0..d {
        for q in 0..d {
            g[2 * p][2 * q] = a[p][q];
            g[2 * p + 1][2 * q + 1] = -a[p][q];
        }
    }
    g
}

/// The theta datum whose series (in `q^{1/r}`, before the sign expansion
/// over tied indices) gives the `S`-series of a wall with at least two
/// groups. `None` when the congruence coset is empty.
pub fn s_series_theta_data(wall: &GroupedWall) -> Result<Option<XiData>> {
    wall.validate()?;
    let m = wall.groups.len();
    if m < 2 {
        return Err(Error::InvalidInput("theta data needs at least two groups".into()));
    }
    let r = wall.rank();
    let ranks: Vec<i64> = wall.groups.iter().map(|p| p.r).collect();
    let d = 2 * (m - 1);
    let g_amb = ambient_gram(&ranks);
    let gq = linalg::to_rational(&g_amb);
    let weights: Vec<i64> = (0..m - 1).map(|i| ranks[i + 1..].iter().sum()).collect();

    let slope = |p: &Part| (BigRational::new(p.beta_bar.x.into(), p.r.into()), BigRational::new(p.beta_bar.y.into(), p.r.into()));
    let mut nu_bar = Vec::with_capacity(d);
    for i in 0..m - 1 {
        let (a, b) = (slope(&wall.groups[i]), slope(&wall.groups[i + 1]));
        nu_bar.push(a.0 - b.0);
        nu_bar.push(a.1 - b.1);
    }

    // integral shifts w with sum_i weights_i w_i = -(beta - beta_bar) mod r
    let beta = total_class(wall.l);
    let beta_bar = wall.groups.iter().fold(NSVec::ZERO, |acc, p| acc + p.beta_bar);
    let diff = beta - beta_bar;
    let rows: Vec<Vec<BigRational>> = (0..2)
        .map(|t| {
            let mut row = vec![BigRational::zero(); d + 2];
            for (i, &w) in weights.iter().enumerate() {
                row[2 * i + t] = rat(w);
            }
            row[d + t] = rat(r);
            row
        })
        .collect();
    let rhs = vec![rat(-diff.x), rat(-diff.y)];
    let Some(shift) = linalg::solve_integer(&rows, &rhs, d + 2) else {
        return Ok(None);
    };
    let nu_prime: Vec<BigRational> = nu_bar
        .iter()
        .zip(&shift[..d])
        .map(|(a, s)| a + BigRational::from_integer(s.clone()))
        .collect();

    let basis = linalg::congruence_lattice(&weights, 2, r);
    let basis_q: QMat = basis.iter().map(|v| linalg::int_to_rat(v)).collect();
    let basis_inv = linalg::inverse(&basis_q)
        .ok_or_else(|| Error::Assertion("congruence lattice basis is singular".into()))?;
    let coords = |v: &[BigRational]| linalg::vec_mat(v, &basis_inv);
    let gram_q = linalg::mat_mul(&linalg::mat_mul(&basis_q, &gq), &linalg::transpose(&basis_q));
    let gram: Vec<Vec<i64>> = gram_q
        .iter()
        .map(|row| {
            row.iter()
                .map(|x| x.to_integer().to_i64().expect("Gram entry fits in i64"))
                .collect()
        })
        .collect();
    let g_inv = linalg::inverse(&gq).ok_or_else(|| Error::Assertion("ambient form is degenerate".into()))?;
    // vector representing the functional f, i.e. B(v, .) = f
    let represent = |f: &[BigRational]| coords(&linalg::mat_vec(&g_inv, f));

    let mut c = Vec::with_capacity(m - 1);
    let mut c_prime = Vec::with_capacity(m - 1);
    for i in 0..m - 1 {
        // B(c_i, nu) = H.nu_i (the x coordinate of slot i)
        let mut f = vec![BigRational::zero(); d];
        f[2 * i] = BigRational::one();
        c.push(represent(&f));
        // c'_i = -F in slot i
        let mut v = vec![BigRational::zero(); d];
        v[2 * i] = rat(-1);
        v[2 * i + 1] = rat(1);
        c_prime.push(coords(&v));
    }
    let alpha = wall
        .weight_graph
        .edges
        .iter()
        .map(|&(a, b)| {
            // B(alpha, nu) = K.(nu_a + ... + nu_{b-1})
            let mut f = vec![BigRational::zero(); d];
            for p in a..b {
                f[2 * p] = rat(-3);
                f[2 * p + 1] = rat(-1);
            }
            represent(&f)
        })
        .collect();
    Ok(Some(XiData {
        gram,
        nu_bar: coords(&nu_prime),
        c,
        c_prime,
        alpha,
    }))
}

/// `S`-series of a (possibly grouped) wall, exact below `prec`.
pub fn s_series(wall: &GroupedWall, prec: QExp) -> Result<QSeries> {
    wall.validate()?;
    let m = wall.groups.len();
    let r = wall.rank();
    let edges = &wall.weight_graph.edges;
    if edges.iter().any(|&(i, j)| i == j) {
        // K.0 = 0
        return Ok(QSeries::zero(prec));
    }
    if m == 1 {
        let p = wall.groups[0];
        let diff = total_class(wall.l) - p.beta_bar;
        let hit = diff.x.rem_euclid(r) == 0 && diff.y.rem_euclid(r) == 0;
        return Ok(if hit {
            QSeries::one().truncate(prec)
        } else {
            QSeries::zero(prec)
        });
    }
    let Some(xi) = s_series_theta_data(wall)? else {
        return Ok(QSeries::zero(prec));
    };
    let inner_prec = prec * QExp::from_integer(r);
    let mut acc = QSeries::zero(inner_prec);
    for mask in 0u32..1 << (m - 1) {
        let tied: Vec<usize> = (0..m - 1).filter(|i| mask >> i & 1 == 1).collect();
        let Some(sub) = theta::restrict(&xi, &tied)? else {
            continue;
        };
        let t = indefinite_theta(&sub, inner_prec)?;
        acc = if tied.len().is_multiple_of(2) { &acc + &t } else { &acc - &t };
    }
    let mut factor = BigRational::new(BigInt::one(), BigInt::from(2).pow(m as u32 - 1));
    for &(i, j) in edges {
        factor *= rat(wall.groups[i].r * wall.groups[j].r);
    }
    Ok(acc.rescale_exponents(QExp::new(1, r)).scale(&factor).truncate(prec))
}

fn factorial(n: usize) -> BigInt {
    (1..=n).map(BigInt::from).product()
}

/// One way a group's members split along the exceptional curve: the
/// offsets `l_j` of its members and `sum r_j l_j^2 / 2`.
struct Split {
    offsets: Vec<BigRational>,
    exponent: BigRational,
}

/// All `l_j in o_j + Z` with `sum r_j l_j = 0` and `sum r_j l_j^2 / 2 < bound`.
fn group_splits(ranks: &[i64], shifts: &[BigRational], bound: &BigRational) -> Vec<Split> {
    let k = ranks.len();
    let last = k - 1;
    let mut out = Vec::new();
    let two = rat(2);
    let bf = bound.to_f64().unwrap_or(0.0).max(0.0);
    // |l_j| < sqrt(2 bound / r_j)
    let range = |j: usize| -> (i64, i64) {
        let rad = (2.0 * bf / ranks[j] as f64).sqrt();
        let o = shifts[j].to_f64().unwrap_or(0.0);
        ((-rad - o).floor() as i64 - 1, (rad - o).ceil() as i64 + 1)
    };
    let mut cur = vec![0i64; last];
    fn rec(
        idx: usize,
        cur: &mut Vec<i64>,
        range: &dyn Fn(usize) -> (i64, i64),
        emit: &mut dyn FnMut(&[i64]),
    ) {
        if idx == cur.len() {
            emit(cur);
            return;
        }
        let (lo, hi) = range(idx);
        for n in lo..=hi {
            cur[idx] = n;
            rec(idx + 1, cur, range, emit);
        }
    }
    rec(0, &mut cur, &range, &mut |ns: &[i64]| {
        let mut ls: Vec<BigRational> = ns.iter().zip(shifts).map(|(&n, o)| o + rat(n)).collect();
        let partial: BigRational = ls.iter().zip(ranks).map(|(l, &r)| l * rat(r)).sum();
        let l_last = -partial / rat(ranks[last]);
        if !(&l_last - &shifts[last]).is_integer() {
            return;
        }
        ls.push(l_last);
        let exponent: BigRational = ls.iter().zip(ranks).map(|(l, &r)| l * l * rat(r)).sum::<BigRational>() / &two;
        if &exponent < bound {
            out.push(Split { offsets: ls, exponent });
        }
    });
    out
}

/// `U`-series of a wall, exact below `prec`.
pub fn u_series(wall: &WallData, prec: QExp) -> Result<QSeries> {
    u_series_memo(wall, prec, &mut HashMap::new())
}

pub(crate) fn u_series_memo(
    wall: &WallData,
    prec: QExp,
    memo: &mut HashMap<GroupedWall, QSeries>,
) -> Result<QSeries> {
    wall.validate()?;
    let m = wall.parts.len();
    let parts = &wall.parts;
    let edges = &wall.graph.edges;
    let prec_q = qexp_to_rational(prec);
    let mut edge_factor = BigInt::one();
    for &(i, j) in edges {
        edge_factor *= parts[i].r * parts[j].r;
    }
    let mut total = QSeries::zero(prec);

    for psi in compositions(m) {
        let mut members: Vec<Vec<usize>> = Vec::new();
        let mut group_of = vec![0usize; m];
        let mut k = 0;
        for (g, &size) in psi.iter().enumerate() {
            members.push((k..k + size).collect());
            for j in k..k + size {
                group_of[j] = g;
            }
            k += size;
        }
        let big_r: Vec<i64> = members.iter().map(|js| js.iter().map(|&j| parts[j].r).sum()).collect();
        // residues X with X/R = x_j/r_j mod 1 for every member j
        let x_choices: Vec<Vec<i64>> = members
            .iter()
            .zip(&big_r)
            .map(|(js, &rr)| {
                (0..rr)
                    .filter(|&x| {
                        js.iter().all(|&j| {
                            let p = parts[j];
                            (x * p.r - p.beta_bar.x * rr).rem_euclid(rr * p.r) == 0
                        })
                    })
                    .collect()
            })
            .collect();
        if x_choices.iter().any(Vec::is_empty) {
            continue;
        }
        let fib: BigInt = psi.iter().map(|&s| factorial(s)).product();
        let mut residue_tuples: Vec<Vec<NSVec>> = vec![vec![]];
        for (xs, &rr) in x_choices.iter().zip(&big_r) {
            let mut next = Vec::new();
            for t in &residue_tuples {
                for &x in xs {
                    for y in 0..rr {
                        let mut t2 = t.clone();
                        t2.push(NSVec::new(x, y));
                        next.push(t2);
                    }
                }
            }
            residue_tuples = next;
        }

        for mask in 0u32..1 << edges.len() {
            let outer: Vec<(usize, usize)> = (0..edges.len())
                .filter(|e| mask >> e & 1 == 1)
                .map(|e| edges[e])
                .collect();
            if outer.iter().any(|&(i, j)| group_of[i] == group_of[j]) {
                continue;
            }
            let inner_edges: Vec<(usize, usize)> = (0..edges.len())
                .filter(|e| mask >> e & 1 == 0)
                .map(|e| edges[e])
                .collect();
            let outer_graph = Digraph::new(
                members.len(),
                outer.iter().map(|&(i, j)| (group_of[i], group_of[j])).collect(),
            );
            let mut outer_den = BigInt::one();
            for &(a, b) in &outer_graph.edges {
                outer_den *= big_r[a] * big_r[b];
            }
            let scale = BigRational::new(edge_factor.clone(), &fib * &outer_den);

            for tuple in &residue_tuples {
                let gw = GroupedWall {
                    l: wall.l,
                    groups: big_r
                        .iter()
                        .zip(tuple)
                        .map(|(&rr, &b)| Part { r: rr, beta_bar: b })
                        .collect(),
                    weight_graph: outer_graph.clone(),
                };
                let s = match memo.get(&gw) {
                    Some(s) => s.clone(),
                    None => {
                        let s = s_series(&gw, prec)?;
                        memo.insert(gw.clone(), s.clone());
                        s
                    }
                };
                let Some(s_lead) = s.lead() else {
                    continue;
                };
                let bound = &prec_q - qexp_to_rational(s_lead);
                let inner = inner_sum(parts, &members, tuple, &big_r, &inner_edges, &bound)?;
                total = &total + &(&inner * &s).scale(&scale);
            }
        }
    }
    let total = total.truncate(prec);
    if m == 2 {
        if let Some((e, _)) = total.iter().find(|(e, _)| *e <= QExp::zero()) {
            return Err(Error::Assertion(format!(
                "two-part wall series has a term at exponent {e}, expected only positive exponents"
            )));
        }
    }
    Ok(total)
}

/// Sum over the splittings of every group along the exceptional curve,
/// weighted by `prod_{i -> j} (l_j - l_i)` over the inner edges.
fn inner_sum(
    parts: &[Part],
    members: &[Vec<usize>],
    residues: &[NSVec],
    big_r: &[i64],
    inner_edges: &[(usize, usize)],
    bound: &BigRational,
) -> Result<QSeries> {
    let prec = rational_to_qexp(bound)?;
    if !bound.is_positive() {
        return Ok(QSeries::zero(prec));
    }
    let m = parts.len();
    let mut per_group: Vec<Vec<Split>> = Vec::new();
    for ((js, res), &rr) in members.iter().zip(residues).zip(big_r) {
        let ranks: Vec<i64> = js.iter().map(|&j| parts[j].r).collect();
        let shifts: Vec<BigRational> = js
            .iter()
            .map(|&j| BigRational::new(parts[j].beta_bar.y.into(), parts[j].r.into()) - BigRational::new(res.y.into(), rr.into()))
            .collect();
        let splits = group_splits(&ranks, &shifts, bound);
        if splits.is_empty() {
            return Ok(QSeries::zero(prec));
        }
        per_group.push(splits);
    }
    let mut terms: Vec<(BigRational, BigRational)> = Vec::new();
    let mut offsets = vec![BigRational::zero(); m];
    fn rec(
        g: usize,
        exponent: BigRational,
        per_group: &[Vec<Split>],
        members: &[Vec<usize>],
        offsets: &mut Vec<BigRational>,
        inner_edges: &[(usize, usize)],
        bound: &BigRational,
        terms: &mut Vec<(BigRational, BigRational)>,
    ) {
        if g == per_group.len() {
            let mut w = BigRational::one();
            for &(i, j) in inner_edges {
                w *= &offsets[j] - &offsets[i];
            }
            if !w.is_zero() {
                terms.push((exponent, w));
            }
            return;
        }
        for split in &per_group[g] {
            let e = &exponent + &split.exponent;
            if &e >= bound {
                continue;
            }
            for (&j, l) in members[g].iter().zip(&split.offsets) {
                offsets[j] = l.clone();
            }
            rec(g + 1, e, per_group, members, offsets, inner_edges, bound, terms);
        }
    }
    rec(0, BigRational::zero(), &per_group, members, &mut offsets, inner_edges, bound, &mut terms);
    Ok(theta::series_from_rational_exponents(terms, prec))
}

fn rational_to_qexp(x: &BigRational) -> Result<QExp> {
    let n = x.numer().to_i64();
    let d = x.denom().to_i64();
    match (n, d) {
        (Some(n), Some(d)) => Ok(QExp::new(n, d)),
        _ => Err(Error::Assertion(format!("exponent {x} does not fit in 64 bits"))),
    }
}

/// Direct summation of a wall series over a box of classes. `coeff` is the
/// Joyce coefficient (`S` or `U`).
fn bruteforce<F>(l: i64, parts: &[Part], edges: &[(usize, usize)], prec: QExp, radius: u32, coeff: F) -> Result<QSeries>
where
    F: Fn(&[SheafClass]) -> Result<BigRational>,
{
    let m = parts.len();
    let r: i64 = parts.iter().map(|p| p.r).sum();
    let beta = total_class(l);
    let prec_q = qexp_to_rational(prec);
    let rad = radius as i64;
    let mut terms: Vec<(BigRational, BigRational)> = Vec::new();
    let free = 2 * (m - 1);
    let mut u = vec![-rad; free];
    loop {
        let mut betas: Vec<NSVec> = (0..m - 1)
            .map(|i| parts[i].beta_bar + parts[i].r * NSVec::new(u[2 * i], u[2 * i + 1]))
            .collect();
        let rest = betas.iter().fold(beta, |acc, b| acc - *b);
        let last = parts[m - 1];
        let d = rest - last.beta_bar;
        if d.x.rem_euclid(last.r) == 0 && d.y.rem_euclid(last.r) == 0 {
            betas.push(rest);
            let mut kprod = BigInt::one();
            for &(i, j) in edges {
                kprod *= k_dot(parts[j].r * betas[i] - parts[i].r * betas[j]);
            }
            if !kprod.is_zero() {
                let mut exponent = BigRational::zero();
                for i in 0..m {
                    for j in i + 1..m {
                        let dv = parts[j].r * betas[i] - parts[i].r * betas[j];
                        exponent -= BigRational::new(
                            intersect(dv, dv).into(),
                            (2 * r * parts[i].r * parts[j].r).into(),
                        );
                    }
                }
                if exponent < prec_q {
                    let classes: Vec<SheafClass> = (0..m).map(|i| SheafClass::new(parts[i].r, betas[i])).collect();
                    let c = coeff(&classes)?;
                    if !c.is_zero() {
                        if u.iter().any(|x| x.abs() == rad) {
                            return Err(Error::RadiusTooSmall(radius));
                        }
                        terms.push((exponent, c * BigRational::from_integer(kprod)));
                    }
                }
            }
        }
        let mut k = 0;
        loop {
            if k == free {
                return Ok(theta::series_from_rational_exponents(terms, prec));
            }
            if u[k] < rad {
                u[k] += 1;
                break;
            }
            u[k] = -rad;
            k += 1;
        }
    }
}

/// `U`-series by direct summation with Joyce's `U` evaluated per term.
pub fn u_series_bruteforce(wall: &WallData, prec: QExp, radius: u32) -> Result<QSeries> {
    wall.validate()?;
    let max = wall.parts.len();
    bruteforce(wall.l, &wall.parts, &wall.graph.edges, prec, radius, |cs| {
        u_coeff_with_limit(cs, max)
    })
}

/// `S`-series by direct summation with Joyce's `S` evaluated per term.
pub fn s_series_bruteforce(wall: &GroupedWall, prec: QExp, radius: u32) -> Result<QSeries> {
    wall.validate()?;
    bruteforce(wall.l, &wall.groups, &wall.weight_graph.edges, prec, radius, |cs| {
        Ok(rat(s_coeff(cs) as i64))
    })
}

/// `q^{r/24} eta^{-r} theta_{r,a}`: the factor relating the invariants of
/// the blow-up (for the pulled-back polarization) to those of the plane.
pub fn blowup_factor(r: i64, a: i64, prec: QExp) -> QSeries {
    let shift = QExp::new(r, 24);
    let partitions: QSeries = eta_pow(-r, prec - shift).shift(shift);
    let theta = classical_theta(r, a, prec);
    (&partitions * &theta).truncate(prec)
}
