//! Classical and indefinite theta series.
//!
//! An indefinite theta datum ([`XiData`]) is a lattice `Z^n` with an integer
//! Gram matrix `B`, a shift `nu_bar`, pairs of vectors `(c_i, c'_i)` whose
//! sign differences cut the indefinite directions down to a convergent
//! sum, and polynomial weights `alpha_j`:
//!
//! ```text
//! sum_{v in nu_bar + Z^n} prod_i (sgn B(c_i, v) - sgn B(c'_i, v))
//!                         prod_j B(alpha_j, v) q^{B(v, v)/2}
//! ```
//!
//! [`indefinite_theta`] enumerates this sum exactly below a precision by
//! splitting `v = mu + sum_i m_i c'_i` with `mu` in finitely many cosets of
//! the positive definite complement of the `c_i`, and walking each `m_i`
//! along the only half-line where the weight can be nonzero.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer as _;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, QMat};
use crate::qseries::{parse_rational, rational_to_string, QExp};
use crate::QSeries;

#[derive(Clone, Debug, PartialEq)]
pub struct XiData {
    pub gram: Vec<Vec<i64>>,
    pub nu_bar: Vec<BigRational>,
    pub c: Vec<Vec<BigRational>>,
    pub c_prime: Vec<Vec<BigRational>>,
    pub alpha: Vec<Vec<BigRational>>,
}

/// A failed validity condition, labelled by the condition it breaks.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    /// Vectors or matrices of the wrong size.
    Shape(String),
    /// (i) the form is degenerate.
    Degenerate,
    /// (i) the number of negative directions differs from the number of
    /// `c_i`, or exceeds the number of positive ones.
    Signature { pos: usize, neg: usize, b: usize },
    /// (ii) the `c_i` do not span a negative definite subspace.
    NotNegativeDefinite,
    /// (iii) `B(c_i, c'_j) != 0` for `i != j`.
    CrossPairing { i: usize, j: usize },
    /// (iii) `B(c'_i, c'_j) != 0`.
    PrimePairing { i: usize, j: usize },
    /// (iii) `B(c_i, c'_i) >= 0`.
    NonNegativePairing { i: usize },
    /// (iv) `B(c'_i, v)` vanishes somewhere on the coset.
    CosetMeetsWall { i: usize },
}

impl Violation {
    /// The condition label: `(i)` to `(v)`, or `shape`.
    pub fn condition(&self) -> &'static str {
        match self {
            Violation::Shape(_) => "shape",
            Violation::Degenerate | Violation::Signature { .. } => "(i)",
            Violation::NotNegativeDefinite => "(ii)",
            Violation::CrossPairing { .. }
            | Violation::PrimePairing { .. }
            | Violation::NonNegativePairing { .. } => "(iii)",
            Violation::CosetMeetsWall { .. } => "(iv)",
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ", self.condition())?;
        match self {
            Violation::Shape(s) => write!(f, "{s}"),
            Violation::Degenerate => write!(f, "Gram matrix is singular"),
            Violation::Signature { pos, neg, b } => {
                write!(f, "signature ({pos}, {neg}) does not match b = {b}")
            }
            Violation::NotNegativeDefinite => write!(f, "c vectors do not span a negative definite subspace"),
            Violation::CrossPairing { i, j } => write!(f, "B(c_{i}, c'_{j}) is nonzero"),
            Violation::PrimePairing { i, j } => write!(f, "B(c'_{i}, c'_{j}) is nonzero"),
            Violation::NonNegativePairing { i } => write!(f, "B(c_{i}, c'_{i}) is not negative"),
            Violation::CosetMeetsWall { i } => write!(f, "B(c'_{i}, v) vanishes on the coset"),
        }
    }
}

impl XiData {
    pub fn n(&self) -> usize {
        self.gram.len()
    }

    pub fn b(&self) -> usize {
        self.c.len()
    }

    /// Positive definite data with no sign factors or weights.
    pub fn classical(gram: Vec<Vec<i64>>, nu_bar: Vec<BigRational>) -> Self {
        XiData {
            gram,
            nu_bar,
            c: vec![],
            c_prime: vec![],
            alpha: vec![],
        }
    }

    fn gram_q(&self) -> QMat {
        linalg::to_rational(&self.gram)
    }

    pub fn pairing(&self, u: &[BigRational], v: &[BigRational]) -> BigRational {
        linalg::bilinear(&self.gram_q(), u, v)
    }

    /// The datum with every `c_i`, `c'_i` replaced by a positive multiple
    /// that is an integer vector, as used by the enumerator.
    fn cleared_c_prime(&self) -> Vec<Vec<BigInt>> {
        self.c_prime.iter().map(|v| primitive(v)).collect()
    }
}

/// Smallest positive multiple of `v` that is a primitive integer vector.
fn primitive(v: &[BigRational]) -> Vec<BigInt> {
    let d = BigRational::from_integer(linalg::lcm_of_denoms(v));
    let z: Vec<BigInt> = v.iter().map(|x| (x * &d).to_integer()).collect();
    let g = z.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    if g.is_zero() {
        return z;
    }
    z.into_iter().map(|x| x / &g).collect()
}

/// Checks conditions (i) to (v); every failure is reported.
pub fn validate_xi(xi: &XiData) -> std::result::Result<(), Vec<Violation>> {
    let n = xi.n();
    let mut out = Vec::new();
    if xi.gram.iter().any(|r| r.len() != n) {
        out.push(Violation::Shape(format!("Gram matrix is not {n}x{n}")));
        return Err(out);
    }
    if (0..n).any(|i| (0..n).any(|j| xi.gram[i][j] != xi.gram[j][i])) {
        out.push(Violation::Shape("Gram matrix is not symmetric".into()));
    }
    if xi.nu_bar.len() != n {
        out.push(Violation::Shape(format!("nu_bar has length {}, expected {n}", xi.nu_bar.len())));
    }
    if xi.c_prime.len() != xi.c.len() {
        out.push(Violation::Shape(format!(
            "{} c vectors but {} c' vectors",
            xi.c.len(),
            xi.c_prime.len()
        )));
    }
    for (name, vs) in [("c", &xi.c), ("c'", &xi.c_prime), ("alpha", &xi.alpha)] {
        for (i, v) in vs.iter().enumerate() {
            if v.len() != n {
                out.push(Violation::Shape(format!("{name}_{i} has length {}, expected {n}", v.len())));
            }
        }
    }
    if !out.is_empty() {
        return Err(out);
    }

    let g = xi.gram_q();
    let b = xi.b();
    if linalg::det(&g).is_zero() {
        out.push(Violation::Degenerate);
    } else {
        let (pos, neg, _) = linalg::inertia(&g);
        if neg != b || pos < neg {
            out.push(Violation::Signature { pos, neg, b });
        }
    }
    let cg: QMat = (0..b)
        .map(|i| (0..b).map(|j| linalg::bilinear(&g, &xi.c[i], &xi.c[j])).collect())
        .collect();
    if b > 0 && !linalg::is_negative_definite(&cg) {
        out.push(Violation::NotNegativeDefinite);
    }
    for i in 0..b {
        for j in 0..b {
            let bcc = linalg::bilinear(&g, &xi.c[i], &xi.c_prime[j]);
            if i == j {
                if !bcc.is_negative() {
                    out.push(Violation::NonNegativePairing { i });
                }
            } else if !bcc.is_zero() {
                out.push(Violation::CrossPairing { i, j });
            }
            if j >= i && !linalg::bilinear(&g, &xi.c_prime[i], &xi.c_prime[j]).is_zero() {
                out.push(Violation::PrimePairing { i, j });
            }
        }
    }
    for i in 0..b {
        // {B(c'_i, v) : v in Z^n} = g_i Z; need B(c'_i, nu_bar) outside it
        let f = linalg::vec_mat(&xi.c_prime[i], &g);
        let gen = f.iter().fold(BigRational::zero(), |acc, x| rational_gcd(&acc, x));
        let val = linalg::dot(&f, &xi.nu_bar);
        let hits = if gen.is_zero() {
            val.is_zero()
        } else {
            (&val / &gen).is_integer()
        };
        if hits {
            out.push(Violation::CosetMeetsWall { i });
        }
    }
    if out.is_empty() {
        Ok(())
    } else {
        Err(out)
    }
}

fn rational_gcd(a: &BigRational, b: &BigRational) -> BigRational {
    if a.is_zero() {
        return b.abs();
    }
    if b.is_zero() {
        return a.abs();
    }
    let d = a.denom().lcm(b.denom());
    let an = (a * BigRational::from_integer(d.clone())).to_integer();
    let bn = (b * BigRational::from_integer(d.clone())).to_integer();
    BigRational::new(an.gcd(&bn), d)
}

fn require_valid(xi: &XiData) -> Result<()> {
    validate_xi(xi).map_err(Error::InvalidTheta)
}

fn prec_parts(prec: QExp) -> (i128, i128) {
    (*prec.numer() as i128, *prec.denom() as i128)
}

fn isqrt_floor(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        x.sqrt()
    }
}

/// `sum_{k in (a/r, ..., a/r) + Z^{r-1}} q^{sum_{i<=j} k_i k_j}` below `prec`.
pub fn classical_theta(r: i64, a: i64, prec: QExp) -> QSeries {
    assert!(r >= 1, "rank must be positive");
    let dim = (r - 1) as usize;
    // with k_i = K_i / r the exponent is (sum K_i^2 + (sum K_i)^2) / (2 r^2)
    let (pn, pd) = prec_parts(prec);
    let den = 2 * (r as i128) * (r as i128);
    let a = a.rem_euclid(r) as i128;
    let r128 = r as i128;
    // sum k_i^2 <= 2 * exponent, so |K_i| < r * sqrt(2 prec)
    let kmax = (r as f64 * isqrt_floor(2.0 * pn as f64 / pd as f64)).ceil() as i128 + r128;
    let mut terms: BTreeMap<i128, i64> = BTreeMap::new();
    let mut ks = vec![0i128; dim];
    fn rec(
        idx: usize,
        ks: &mut Vec<i128>,
        a: i128,
        r: i128,
        kmax: i128,
        den: i128,
        pn: i128,
        pd: i128,
        terms: &mut BTreeMap<i128, i64>,
    ) {
        if idx == ks.len() {
            let sq: i128 = ks.iter().map(|k| k * k).sum();
            let s: i128 = ks.iter().sum();
            let num = sq + s * s;
            if num * pd < pn * den {
                *terms.entry(num).or_insert(0) += 1;
            }
            return;
        }
        // K = a + r n with |K| <= kmax
        let lo = (-kmax - a).div_euclid(r);
        let hi = (kmax - a).div_euclid(r) + 1;
        for n in lo..=hi {
            ks[idx] = a + r * n;
            rec(idx + 1, ks, a, r, kmax, den, pn, pd, terms);
        }
    }
    rec(0, &mut ks, a, r128, kmax, den, pn, pd, &mut terms);
    QSeries::from_terms(
        terms.into_iter().map(|(num, c)| {
            (
                QExp::new(num as i64, den as i64),
                BigRational::from_integer(c.into()),
            )
        }),
        Some(prec),
    )
}

/// Output of the enumerator together with diagnostics.
#[derive(Clone, Debug)]
pub struct ThetaReport {
    pub series: QSeries,
    /// No term of the full series has an exponent below this value.
    pub lower_bound: BigRational,
    /// Number of coset translates of the positive definite complement.
    pub cosets: usize,
    /// Number of lattice points with nonzero weight that were summed.
    pub points: usize,
}

pub fn indefinite_theta(xi: &XiData, prec: QExp) -> Result<QSeries> {
    Ok(indefinite_theta_report(xi, prec)?.series)
}

/// Integer form of the datum used by the inner loops: a point
/// `v = N / den` is carried as the integer vector `N`.
struct Scaled {
    gram: Vec<Vec<i128>>,
    den: i128,
    /// `B(c_i, .)` as a positive multiple of an integer row.
    f_c: Vec<Vec<i128>>,
    /// `B(c'_i, .)` as integer rows (the `c'_i` are integral after clearing).
    f_cp: Vec<Vec<i128>>,
    cp: Vec<Vec<i128>>,
    /// `B(alpha_j, .)` as integer rows over `alpha_den[j]`.
    f_alpha: Vec<Vec<i128>>,
    alpha_den: Vec<BigInt>,
}

fn to_i128(x: &BigInt) -> Result<i128> {
    x.to_i128()
        .ok_or_else(|| Error::Assertion(format!("integer {x} does not fit in 128 bits")))
}

fn row_i128(v: &[BigInt]) -> Result<Vec<i128>> {
    v.iter().map(to_i128).collect()
}

fn dot_i(a: &[i128], b: &[i128]) -> i128 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn quad_i(g: &[Vec<i128>], v: &[i128]) -> i128 {
    g.iter().zip(v).map(|(row, vi)| vi * dot_i(row, v)).sum()
}

impl Scaled {
    fn new(xi: &XiData, den: &BigInt) -> Result<Self> {
        let g = xi.gram_q();
        let n = xi.n();
        let gram: Vec<Vec<i128>> = xi
            .gram
            .iter()
            .map(|r| r.iter().map(|&x| x as i128).collect())
            .collect();
        let functional = |v: &[BigRational]| linalg::vec_mat(v, &g);
        let f_c = xi
            .c
            .iter()
            .map(|c| row_i128(&primitive(&functional(c))))
            .collect::<Result<Vec<_>>>()?;
        let cp_big = xi.cleared_c_prime();
        let cp = cp_big.iter().map(|v| row_i128(v)).collect::<Result<Vec<_>>>()?;
        let f_cp = cp
            .iter()
            .map(|v| (0..n).map(|j| (0..n).map(|k| v[k] * gram[k][j]).sum()).collect())
            .collect();
        let mut f_alpha = Vec::new();
        let mut alpha_den = Vec::new();
        for a in &xi.alpha {
            let f = functional(a);
            let d = linalg::lcm_of_denoms(&f);
            let dq = BigRational::from_integer(d.clone());
            let row: Vec<BigInt> = f.iter().map(|x| (x * &dq).to_integer()).collect();
            f_alpha.push(row_i128(&row)?);
            alpha_den.push(d);
        }
        Ok(Scaled {
            gram,
            den: to_i128(den)?,
            f_c,
            f_cp,
            cp,
            f_alpha,
            alpha_den,
        })
    }

    /// Product of sign differences and the integer numerators of the
    /// `alpha` pairings at `v = nv / den`.
    fn weight_numerator(&self, nv: &[i128]) -> BigInt {
        let mut w = BigInt::one();
        for (fc, fcp) in self.f_c.iter().zip(&self.f_cp) {
            let d = dot_i(fc, nv).signum() - dot_i(fcp, nv).signum();
            if d == 0 {
                return BigInt::zero();
            }
            w *= d;
        }
        for fa in &self.f_alpha {
            let x = dot_i(fa, nv);
            if x == 0 {
                return BigInt::zero();
            }
            w *= x;
        }
        w
    }
}

pub fn indefinite_theta_report(xi: &XiData, prec: QExp) -> Result<ThetaReport> {
    require_valid(xi)?;
    let n = xi.n();
    let b = xi.b();
    let g = xi.gram_q();
    let den = linalg::lcm_of_denoms(&xi.nu_bar);
    let sc = Scaled::new(xi, &den)?;
    let den_q = BigRational::from_integer(den.clone());

    let f_c: Vec<Vec<BigRational>> = xi.c.iter().map(|c| linalg::vec_mat(c, &g)).collect();
    let cp_big = xi.cleared_c_prime();
    let cp_q: Vec<Vec<BigRational>> = cp_big.iter().map(|v| linalg::int_to_rat(v)).collect();
    let f_c_cp: Vec<BigRational> = (0..b).map(|i| linalg::dot(&f_c[i], &cp_q[i])).collect();

    // positive definite complement of span(c)
    let comp = linalg::integer_kernel(&f_c, n);
    let comp_q: QMat = comp.iter().map(|v| linalg::int_to_rat(v)).collect();
    let comp_gram = linalg::mat_mul(&linalg::mat_mul(&comp_q, &g), &linalg::transpose(&comp_q));
    let comp_gram_inv = linalg::inverse(&comp_gram)
        .ok_or_else(|| Error::Assertion("complement of the c vectors is degenerate".into()))?;
    let c_gram: QMat = (0..b)
        .map(|i| (0..b).map(|j| linalg::dot(&f_c[i], &xi.c[j])).collect())
        .collect();
    let c_gram_inv = linalg::inverse(&c_gram)
        .ok_or_else(|| Error::Assertion("c vectors are linearly dependent".into()))?;

    // coset representatives of Z^n / (complement + sum Z c'_i)
    let mut gens = comp.clone();
    gens.extend(cp_big.iter().cloned());
    let basis = linalg::lattice_basis(&gens, n);
    if basis.len() != n {
        return Err(Error::Assertion("complement and c' vectors do not span a full lattice".into()));
    }
    let diag: Vec<i64> = (0..n)
        .map(|k| basis[k][k].to_i64().expect("small index"))
        .collect();
    let mut reps: Vec<Vec<i64>> = vec![vec![]];
    for &d in &diag {
        reps = reps
            .into_iter()
            .flat_map(|p| {
                (0..d).map(move |x| {
                    let mut q = p.clone();
                    q.push(x);
                    q
                })
            })
            .collect();
    }

    let (pn, pd) = prec_parts(prec);
    let two_den2 = 2 * sc.den * sc.den;
    let prec_q = BigRational::new(pn.into(), pd.into());

    struct CosetOut {
        terms: BTreeMap<i128, BigInt>,
        floor: BigRational,
        points: usize,
    }

    let run = |rep: &Vec<i64>| -> Result<CosetOut> {
        // mu = nu_bar + rep, normalized so that B(c_i, mu)/B(c_i, c'_i) in [0, 1)
        let mut mu: Vec<BigRational> = xi
            .nu_bar
            .iter()
            .zip(rep)
            .map(|(x, &p)| x + linalg::rat(p))
            .collect();
        for i in 0..b {
            let t = linalg::dot(&f_c[i], &mu) / &f_c_cp[i];
            let fl = t.floor();
            if !fl.is_zero() {
                for (m, c) in mu.iter_mut().zip(&cp_q[i]) {
                    *m -= &fl * c;
                }
            }
        }
        // mu = w + mu_plus with w in span(c), mu_plus orthogonal to it
        let fmu: Vec<BigRational> = f_c.iter().map(|f| linalg::dot(f, &mu)).collect();
        let coeffs = linalg::mat_vec(&c_gram_inv, &fmu);
        let mut w = vec![BigRational::zero(); n];
        for (a, c) in coeffs.iter().zip(&xi.c) {
            for (wi, ci) in w.iter_mut().zip(c) {
                *wi += a * ci;
            }
        }
        let q_w = linalg::dot(&fmu, &coeffs) / linalg::rat(2);
        let mu_plus: Vec<BigRational> = mu.iter().zip(&w).map(|(a, b)| a - b).collect();
        // coordinates of mu_plus in the complement basis
        let rhs = linalg::mat_vec(&comp_q, &linalg::mat_vec(&g, &mu_plus));
        let center = linalg::mat_vec(&comp_gram_inv, &rhs);
        let budget = &prec_q - &q_w;
        let mut out = CosetOut {
            terms: BTreeMap::new(),
            floor: q_w.clone(),
            points: 0,
        };
        if !budget.is_positive() {
            return Ok(out);
        }
        let mu_num: Vec<i128> = mu
            .iter()
            .map(|x| to_i128(&(x * &den_q).to_integer()))
            .collect::<Result<_>>()?;
        let comp_i: Vec<Vec<i128>> = comp.iter().map(|v| row_i128(v)).collect::<Result<_>>()?;
        for z in short_vectors(&comp_gram, &center, &budget) {
            let mut nv = mu_num.clone();
            for (zk, row) in z.iter().zip(&comp_i) {
                for (x, r) in nv.iter_mut().zip(row) {
                    *x += *zk as i128 * r * sc.den;
                }
            }
            let base = quad_i(&sc.gram, &nv);
            if base * pd >= pn * two_den2 {
                continue;
            }
            walk_half_lines(&sc, &mut nv, 0, pn, pd, two_den2, &mut out.terms, &mut out.points)?;
        }
        Ok(out)
    };

    let results: Vec<Result<CosetOut>> = reps.par_iter().map(run).collect();
    let mut total: BTreeMap<i128, BigInt> = BTreeMap::new();
    let mut floor: Option<BigRational> = None;
    let mut points = 0;
    for r in results {
        let r = r?;
        for (k, v) in r.terms {
            *total.entry(k).or_insert_with(BigInt::zero) += v;
        }
        floor = Some(match floor {
            Some(f) if f <= r.floor => f,
            _ => r.floor,
        });
        points += r.points;
    }
    // coefficient = numerator / (prod alpha_den * den^k)
    let mut scale = BigInt::one();
    for d in &sc.alpha_den {
        scale *= d * &den;
    }
    let exp_den = i64::try_from(two_den2)
        .map_err(|_| Error::Assertion("exponent denominator overflow".into()))?;
    let mut terms = Vec::new();
    for (k, v) in total {
        if v.is_zero() {
            continue;
        }
        let k = i64::try_from(k).map_err(|_| Error::Assertion("exponent overflow".into()))?;
        terms.push((QExp::new(k, exp_den), BigRational::new(v, scale.clone())));
    }
    Ok(ThetaReport {
        series: QSeries::from_terms(terms, Some(prec)),
        lower_bound: floor.unwrap_or_else(BigRational::zero),
        cosets: reps.len(),
        points,
    })
}

/// Walks `m_i` for `i >= idx` along the half-line where the sign factor of
/// `c_i` can be nonzero, accumulating every term below the precision.
#[allow(clippy::too_many_arguments)]
fn walk_half_lines(
    sc: &Scaled,
    nv: &mut Vec<i128>,
    idx: usize,
    pn: i128,
    pd: i128,
    two_den2: i128,
    terms: &mut BTreeMap<i128, BigInt>,
    points: &mut usize,
) -> Result<()> {
    if idx == sc.cp.len() {
        let w = sc.weight_numerator(nv);
        if !w.is_zero() {
            *terms.entry(quad_i(&sc.gram, nv)).or_insert_with(BigInt::zero) += w;
            *points += 1;
        }
        return Ok(());
    }
    // B(c'_i, v) is constant along every c'_j direction
    let s = dot_i(&sc.f_cp[idx], nv);
    if s == 0 {
        return Err(Error::Assertion(format!(
            "B(c'_{idx}, v) vanished on a validated coset"
        )));
    }
    let dir = s.signum();
    let step: Vec<i128> = sc.cp[idx].iter().map(|c| c * sc.den * dir).collect();
    // the first term on the other side must carry a zero sign factor
    {
        let back: Vec<i128> = nv.iter().zip(&step).map(|(x, st)| x - st).collect();
        let d = dot_i(&sc.f_c[idx], &back).signum() - dir;
        if d != 0 {
            return Err(Error::Assertion(format!(
                "sign factor {idx} is nonzero on the discarded half-line"
            )));
        }
    }
    // exponent numerator grows by 2 * den * |s| per step (B(c', c') = 0)
    let inc = 2 * sc.den * s.abs();
    let saved = nv.clone();
    let mut e = quad_i(&sc.gram, nv);
    let mut prev = e;
    loop {
        if e * pd >= pn * two_den2 {
            break;
        }
        walk_half_lines(sc, nv, idx + 1, pn, pd, two_den2, terms, points)?;
        for (x, st) in nv.iter_mut().zip(&step) {
            *x += st;
        }
        e = quad_i(&sc.gram, nv);
        if e - prev != inc {
            return Err(Error::Assertion(format!(
                "exponent is not monotone along c'_{idx}"
            )));
        }
        prev = e;
    }
    nv.copy_from_slice(&saved);
    Ok(())
}

/// All integer `z` with `(z + y)^T g (z + y) / 2 < bound` for a positive
/// definite `g` (possibly a few more; callers re-check exactly).
pub fn short_vectors(g: &[Vec<BigRational>], center: &[BigRational], bound: &BigRational) -> Vec<Vec<i64>> {
    let d = g.len();
    if d == 0 {
        return vec![vec![]];
    }
    let (l, diag) = linalg::ldl(g);
    let lf: Vec<Vec<f64>> = l
        .iter()
        .map(|r| r.iter().map(|x| x.to_f64().unwrap_or(0.0)).collect())
        .collect();
    let df: Vec<f64> = diag.iter().map(|x| x.to_f64().unwrap_or(0.0)).collect();
    let yf: Vec<f64> = center.iter().map(|x| x.to_f64().unwrap_or(0.0)).collect();
    let budget = 2.0 * bound.to_f64().unwrap_or(0.0);
    let mut out = Vec::new();
    let mut z = vec![0i64; d];
    fn rec(
        k: usize,
        rem: f64,
        z: &mut Vec<i64>,
        lf: &[Vec<f64>],
        df: &[f64],
        yf: &[f64],
        out: &mut Vec<Vec<i64>>,
    ) {
        let d = z.len();
        let s: f64 = (k + 1..d).map(|j| lf[j][k] * (yf[j] + z[j] as f64)).sum();
        let rad = (rem.max(0.0) / df[k]).sqrt();
        let lo = (-s - rad - yf[k]).floor() as i64 - 1;
        let hi = (-s + rad - yf[k]).ceil() as i64 + 1;
        let tol = 1e-9 * (1.0 + rem.abs());
        for zk in lo..=hi {
            let u = yf[k] + zk as f64 + s;
            let t = df[k] * u * u;
            if t > rem + tol {
                continue;
            }
            z[k] = zk;
            if k == 0 {
                out.push(z.clone());
            } else {
                rec(k - 1, rem - t, z, lf, df, yf, out);
            }
        }
        z[k] = 0;
    }
    rec(d - 1, budget, &mut z, &lf, &df, &yf, &mut out);
    out
}

/// Direct summation over `nu_bar + z`, `|z_k| <= radius`. Fails with
/// [`Error::RadiusTooSmall`] if a nonzero term on the outer shell of the
/// box has exponent below `prec`.
pub fn indefinite_theta_bruteforce(xi: &XiData, prec: QExp, radius: u32) -> Result<QSeries> {
    require_valid(xi)?;
    let n = xi.n();
    let g = xi.gram_q();
    let prec_q = BigRational::new((*prec.numer()).into(), (*prec.denom()).into());
    let r = radius as i64;
    let mut terms: Vec<(BigRational, BigRational)> = Vec::new();
    // centre the box on the origin: same coset, and the shell test is only
    // meaningful when the box surrounds the region where weights live
    let base: Vec<BigRational> = xi.nu_bar.iter().map(|a| a - a.floor()).collect();
    let mut z = vec![-r; n];
    loop {
        let v: Vec<BigRational> = base
            .iter()
            .zip(&z)
            .map(|(a, &k)| a + linalg::rat(k))
            .collect();
        let mut w = BigRational::one();
        for (c, cp) in xi.c.iter().zip(&xi.c_prime) {
            let s1 = sign_of(&linalg::bilinear(&g, c, &v));
            let s2 = sign_of(&linalg::bilinear(&g, cp, &v));
            w *= linalg::rat(s1 - s2);
        }
        for a in &xi.alpha {
            w *= linalg::bilinear(&g, a, &v);
        }
        if !w.is_zero() {
            let e = linalg::bilinear(&g, &v, &v) / linalg::rat(2);
            if e < prec_q {
                if z.iter().any(|&k| k.abs() == r) {
                    return Err(Error::RadiusTooSmall(radius));
                }
                terms.push((e, w));
            }
        }
        // odometer over the box
        let mut k = 0;
        loop {
            if k == n {
                return Ok(series_from_rational_exponents(terms, prec));
            }
            if z[k] < r {
                z[k] += 1;
                break;
            }
            z[k] = -r;
            k += 1;
        }
    }
}

fn sign_of(x: &BigRational) -> i64 {
    if x.is_positive() {
        1
    } else if x.is_negative() {
        -1
    } else {
        0
    }
}

/// Builds a series from exact rational exponents (which must have
/// machine-sized numerators and denominators).
pub fn series_from_rational_exponents(terms: Vec<(BigRational, BigRational)>, prec: QExp) -> QSeries {
    QSeries::from_terms(
        terms.into_iter().map(|(e, c)| {
            let n = e.numer().to_i64().expect("exponent numerator fits in i64");
            let d = e.denom().to_i64().expect("exponent denominator fits in i64");
            (QExp::new(n, d), c)
        }),
        Some(prec),
    )
}

/// Restriction of `xi` to the sublattice where `B(c_i, v) = 0` for every
/// `i` in `tied`; the remaining `c_i` and the `alpha_j` are replaced by
/// their projections. `None` when no point of the coset satisfies the
/// constraints.
pub fn restrict(xi: &XiData, tied: &[usize]) -> Result<Option<XiData>> {
    let n = xi.n();
    let g = xi.gram_q();
    if tied.is_empty() {
        return Ok(Some(xi.clone()));
    }
    let rows: Vec<Vec<BigRational>> = tied.iter().map(|&i| linalg::vec_mat(&xi.c[i], &g)).collect();
    let rhs: Vec<BigRational> = rows.iter().map(|f| -linalg::dot(f, &xi.nu_bar)).collect();
    let Some(shift) = linalg::solve_integer(&rows, &rhs, n) else {
        return Ok(None);
    };
    let nu0: Vec<BigRational> = xi
        .nu_bar
        .iter()
        .zip(&shift)
        .map(|(a, s)| a + BigRational::from_integer(s.clone()))
        .collect();
    let sub = linalg::integer_kernel(&rows, n);
    let sub_q: QMat = sub.iter().map(|v| linalg::int_to_rat(v)).collect();
    let sub_gram_q = linalg::mat_mul(&linalg::mat_mul(&sub_q, &g), &linalg::transpose(&sub_q));
    let sub_gram_inv = linalg::inverse(&sub_gram_q)
        .ok_or_else(|| Error::Assertion("restricted lattice is degenerate".into()))?;
    let sub_gram: Vec<Vec<i64>> = sub_gram_q
        .iter()
        .map(|r| r.iter().map(|x| x.to_integer().to_i64().expect("small Gram entry")).collect())
        .collect();
    let coords = |v: &[BigRational]| -> Result<Vec<BigRational>> {
        solve_in_span(&sub_q, v)
            .ok_or_else(|| Error::Assertion("vector is not in the restricted span".into()))
    };
    let project = |v: &[BigRational]| -> Vec<BigRational> {
        // functional B(v, .) on the sublattice, represented there
        let f = linalg::mat_vec(&sub_q, &linalg::mat_vec(&g, v));
        linalg::mat_vec(&sub_gram_inv, &f)
    };
    let keep: Vec<usize> = (0..xi.b()).filter(|i| !tied.contains(i)).collect();
    Ok(Some(XiData {
        gram: sub_gram,
        nu_bar: coords(&nu0)?,
        c: keep.iter().map(|&i| project(&xi.c[i])).collect(),
        c_prime: keep
            .iter()
            .map(|&i| coords(&xi.c_prime[i]))
            .collect::<Result<_>>()?,
        alpha: xi.alpha.iter().map(|a| project(a)).collect(),
    }))
}

/// Coefficients `y` with `y^T rows = v`, if `v` lies in the row span.
fn solve_in_span(rows: &[Vec<BigRational>], v: &[BigRational]) -> Option<Vec<BigRational>> {
    let k = rows.len();
    let n = v.len();
    // augmented system rows^T y = v: n equations, k unknowns
    let mut a: QMat = (0..n)
        .map(|i| {
            let mut r: Vec<BigRational> = (0..k).map(|j| rows[j][i].clone()).collect();
            r.push(v[i].clone());
            r
        })
        .collect();
    let mut piv_cols = Vec::new();
    let mut row = 0;
    for col in 0..k {
        let Some(p) = (row..n).find(|&i| !a[i][col].is_zero()) else {
            continue;
        };
        a.swap(p, row);
        let pv = a[row][col].clone();
        for x in a[row].iter_mut() {
            *x /= &pv;
        }
        for i in 0..n {
            if i != row && !a[i][col].is_zero() {
                let f = a[i][col].clone();
                for j in 0..=k {
                    let t = &f * &a[row][j];
                    a[i][j] -= t;
                }
            }
        }
        piv_cols.push(col);
        row += 1;
    }
    if a[row..].iter().any(|r| !r[k].is_zero()) {
        return None;
    }
    let mut y = vec![BigRational::zero(); k];
    for (r, &c) in piv_cols.iter().enumerate() {
        y[c] = a[r][k].clone();
    }
    Some(y)
}

/// JSON form of [`XiData`]; rationals are `"p/q"` strings.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct XiFile {
    pub gram: Vec<Vec<i64>>,
    pub nu_bar: Vec<String>,
    #[serde(default)]
    pub c: Vec<Vec<String>>,
    #[serde(default)]
    pub c_prime: Vec<Vec<String>>,
    #[serde(default)]
    pub alpha: Vec<Vec<String>>,
}

fn parse_vec(v: &[String]) -> Result<Vec<BigRational>> {
    v.iter().map(|s| parse_rational(s)).collect()
}

fn show_vec(v: &[BigRational]) -> Vec<String> {
    v.iter().map(rational_to_string).collect()
}

impl XiData {
    pub fn from_file(f: &XiFile) -> Result<Self> {
        let parse_all = |vs: &[Vec<String>]| vs.iter().map(|v| parse_vec(v)).collect::<Result<Vec<_>>>();
        Ok(XiData {
            gram: f.gram.clone(),
            nu_bar: parse_vec(&f.nu_bar)?,
            c: parse_all(&f.c)?,
            c_prime: parse_all(&f.c_prime)?,
            alpha: parse_all(&f.alpha)?,
        })
    }

    pub fn to_file(&self) -> XiFile {
        let show_all = |vs: &[Vec<BigRational>]| vs.iter().map(|v| show_vec(v)).collect();
        XiFile {
            gram: self.gram.clone(),
            nu_bar: show_vec(&self.nu_bar),
            c: show_all(&self.c),
            c_prime: show_all(&self.c_prime),
            alpha: show_all(&self.alpha),
        }
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let f: XiFile = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        Self::from_file(&f)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("plain data serializes")
    }
}
