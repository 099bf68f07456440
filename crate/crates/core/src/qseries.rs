//! Truncated formal series in fractional powers of `q`.
//!
//! A [`Series`] stores its exponents as integer numerators over one
//! positive denominator `N` shared by every term, so `q^{k/N}` is keyed by
//! `k`. The precision bound is strict: a coefficient at an exponent `>= prec`
//! is unknown, never zero. A series with no precision bound (`prec() ==
//! None`) is an exact finite sum.
//!
//! Binary operations move both operands to the lcm grid and the result is
//! renormalised to the smallest denominator that still represents every
//! exponent and the bound, so structurally equal values compare equal.

use std::collections::BTreeMap;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::{BigRational, Rational64};
use num_traits::{FromPrimitive, Num, One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A rational exponent of `q`.
pub type QExp = Rational64;

/// Coefficient ring of a [`Series`]. Inversion needs exact division, so in
/// practice this is a field such as `BigRational` or `Rational64`.
pub trait Coefficient:
    Clone + Num + Neg<Output = Self> + PartialEq + fmt::Debug + Send + Sync
{
}

impl<T> Coefficient for T where
    T: Clone + Num + Neg<Output = T> + PartialEq + fmt::Debug + Send + Sync
{
}

#[derive(Clone, Debug, PartialEq)]
pub struct Series<T> {
    denom: i64,
    terms: BTreeMap<i64, T>,
    prec: Option<i64>,
}

fn min_bound(a: Option<i64>, b: Option<i64>) -> Option<i64> {
    match (a, b) {
        (None, x) | (x, None) => x,
        (Some(x), Some(y)) => Some(x.min(y)),
    }
}

fn add_bound(a: Option<i64>, b: Option<i64>) -> Option<i64> {
    Some(a? + b?)
}

impl<T: Coefficient> Series<T> {
    /// The exact zero series.
    pub fn exact_zero() -> Self {
        Series {
            denom: 1,
            terms: BTreeMap::new(),
            prec: None,
        }
    }

    /// `O(q^prec)`.
    pub fn zero(prec: QExp) -> Self {
        Series {
            denom: *prec.denom(),
            terms: BTreeMap::new(),
            prec: Some(*prec.numer()),
        }
        .normalized()
    }

    pub fn one() -> Self {
        Self::monomial(T::one(), QExp::zero())
    }

    /// The exact series `coef * q^exp`.
    pub fn monomial(coef: T, exp: QExp) -> Self {
        Self::from_terms([(exp, coef)], None)
    }

    /// Builds a series from `(exponent, coefficient)` pairs. Repeated
    /// exponents are summed; terms at or above `prec` are dropped.
    pub fn from_terms<I>(terms: I, prec: Option<QExp>) -> Self
    where
        I: IntoIterator<Item = (QExp, T)>,
    {
        let terms: Vec<(QExp, T)> = terms.into_iter().collect();
        let mut denom = prec.map_or(1, |p| *p.denom());
        for (e, _) in &terms {
            denom = denom.lcm(e.denom());
        }
        let prec = prec.map(|p| p.numer() * (denom / p.denom()));
        let mut map: BTreeMap<i64, T> = BTreeMap::new();
        for (e, c) in terms {
            let k = e.numer() * (denom / e.denom());
            if prec.is_some_and(|p| k >= p) {
                continue;
            }
            let slot = map.entry(k).or_insert_with(T::zero);
            *slot = slot.clone() + c;
        }
        map.retain(|_, c| !c.is_zero());
        Series {
            denom,
            terms: map,
            prec,
        }
        .normalized()
    }

    fn normalized(mut self) -> Self {
        let mut g = self.denom;
        for k in self.terms.keys() {
            g = g.gcd(k);
            if g == 1 {
                return self;
            }
        }
        if let Some(p) = self.prec {
            g = g.gcd(&p);
        }
        if g > 1 {
            self.denom /= g;
            self.prec = self.prec.map(|p| p / g);
            self.terms = std::mem::take(&mut self.terms)
                .into_iter()
                .map(|(k, c)| (k / g, c))
                .collect();
        }
        self
    }

    /// Re-expresses the series on the grid `1/denom`; `denom` must be a
    /// multiple of the current denominator.
    fn on_grid(&self, denom: i64) -> (BTreeMap<i64, T>, Option<i64>) {
        let f = denom / self.denom;
        debug_assert_eq!(f * self.denom, denom);
        let terms = self.terms.iter().map(|(k, c)| (k * f, c.clone())).collect();
        (terms, self.prec.map(|p| p * f))
    }

    pub fn denom(&self) -> i64 {
        self.denom
    }

    pub fn prec(&self) -> Option<QExp> {
        self.prec.map(|p| QExp::new(p, self.denom))
    }

    pub fn is_exact(&self) -> bool {
        self.prec.is_none()
    }

    /// True when no nonzero coefficient is known (the series may still be
    /// nonzero above its precision).
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Nonzero terms in ascending exponent order.
    pub fn iter(&self) -> impl Iterator<Item = (QExp, &T)> + '_ {
        let d = self.denom;
        self.terms.iter().map(move |(k, c)| (QExp::new(*k, d), c))
    }

    /// Raw access: `(numerator, coefficient)` pairs over [`Series::denom`].
    pub fn raw_terms(&self) -> &BTreeMap<i64, T> {
        &self.terms
    }

    /// Coefficient of `q^e`, or `None` when `e` is at or above the precision.
    pub fn coeff(&self, e: QExp) -> Option<T> {
        if let Some(p) = self.prec() {
            if e >= p {
                return None;
            }
        }
        if (self.denom % e.denom()) != 0 {
            return Some(T::zero());
        }
        let k = e.numer() * (self.denom / e.denom());
        Some(self.terms.get(&k).cloned().unwrap_or_else(T::zero))
    }

    /// Lowest exponent with a known nonzero coefficient.
    pub fn lead(&self) -> Option<QExp> {
        self.terms
            .keys()
            .next()
            .map(|k| QExp::new(*k, self.denom))
    }

    /// A lower bound for the true leading exponent: the leading term if
    /// one is known, otherwise the precision. `None` means exact zero.
    pub fn lead_bound(&self) -> Option<QExp> {
        self.lead().or_else(|| self.prec())
    }

    fn lead_bound_raw(&self) -> Option<i64> {
        self.terms.keys().next().copied().or(self.prec)
    }

    /// Lowers the precision to `min(prec, p)`.
    pub fn truncate(&self, p: QExp) -> Self {
        let prec = match self.prec() {
            Some(q) if q <= p => q,
            _ => p,
        };
        Self::from_terms(self.iter().map(|(e, c)| (e, c.clone())), Some(prec))
    }

    pub fn scale(&self, c: &T) -> Self {
        if c.is_zero() {
            return match self.prec() {
                Some(p) => Self::zero(p),
                None => Self::exact_zero(),
            };
        }
        Series {
            denom: self.denom,
            terms: self
                .terms
                .iter()
                .map(|(k, v)| (*k, v.clone() * c.clone()))
                .collect(),
            prec: self.prec,
        }
    }

    /// Multiplies by `q^e`.
    pub fn shift(&self, e: QExp) -> Self {
        let denom = self.denom.lcm(e.denom());
        let (terms, prec) = self.on_grid(denom);
        let s = e.numer() * (denom / e.denom());
        Series {
            denom,
            terms: terms.into_iter().map(|(k, c)| (k + s, c)).collect(),
            prec: prec.map(|p| p + s),
        }
        .normalized()
    }

    /// Substitutes `q -> q^c` for a positive rational `c`.
    pub fn rescale_exponents(&self, c: QExp) -> Self {
        assert!(c > QExp::zero(), "exponent scale must be positive");
        let (cn, cd) = (*c.numer(), *c.denom());
        // k/N * cn/cd = k*cn / (N*cd)
        Series {
            denom: self.denom * cd,
            terms: self.terms.iter().map(|(k, v)| (k * cn, v.clone())).collect(),
            prec: self.prec.map(|p| p * cn),
        }
        .normalized()
    }

    fn combine(&self, other: &Self, negate: bool) -> Self {
        let denom = self.denom.lcm(&other.denom);
        let (mut terms, pa) = self.on_grid(denom);
        let (tb, pb) = other.on_grid(denom);
        let prec = min_bound(pa, pb);
        for (k, c) in tb {
            let c = if negate { -c } else { c };
            let slot = terms.entry(k).or_insert_with(T::zero);
            *slot = slot.clone() + c;
        }
        terms.retain(|k, c| !c.is_zero() && prec.is_none_or(|p| *k < p));
        Series { denom, terms, prec }.normalized()
    }

    /// Cauchy product. The precision is the guaranteed bound
    /// `min(a.prec + lead(b), b.prec + lead(a))`.
    pub fn mul_series(&self, other: &Self) -> Self {
        let denom = self.denom.lcm(&other.denom);
        let (ta, pa) = self.on_grid(denom);
        let (tb, pb) = other.on_grid(denom);
        let la = self.lead_bound_raw().map(|x| x * (denom / self.denom));
        let lb = other.lead_bound_raw().map(|x| x * (denom / other.denom));
        let prec = min_bound(add_bound(pa, lb), add_bound(pb, la));
        let mut out: BTreeMap<i64, T> = BTreeMap::new();
        for (ka, ca) in &ta {
            for (kb, cb) in &tb {
                let k = ka + kb;
                if prec.is_some_and(|p| k >= p) {
                    break;
                }
                let slot = out.entry(k).or_insert_with(T::zero);
                *slot = slot.clone() + ca.clone() * cb.clone();
            }
        }
        out.retain(|_, c| !c.is_zero());
        Series {
            denom,
            terms: out,
            prec,
        }
        .normalized()
    }

    /// Multiplicative inverse. The leading exponent of the result is minus
    /// the leading exponent of `self`, and a precision `p` with leading
    /// exponent `e` becomes `p - 2e`.
    pub fn invert(&self) -> Result<Self> {
        let (&k0, c0) = self.terms.iter().next().ok_or(Error::NotInvertible)?;
        let inv_c0 = T::one() / c0.clone();
        let Some(p) = self.prec else {
            if self.terms.len() == 1 {
                return Ok(Series {
                    denom: self.denom,
                    terms: BTreeMap::from([(-k0, inv_c0)]),
                    prec: None,
                }
                .normalized());
            }
            return Err(Error::UnboundedInverse(self.terms.len()));
        };
        let rel = usize::try_from(p - k0).expect("leading term lies below the precision");
        let f: Vec<(usize, T)> = self
            .terms
            .iter()
            .skip(1)
            .map(|(k, c)| ((k - k0) as usize, c.clone() * inv_c0.clone()))
            .collect();
        let mut g: Vec<T> = Vec::with_capacity(rel);
        g.push(T::one());
        for n in 1..rel {
            let mut acc = T::zero();
            for (k, fk) in &f {
                if *k > n {
                    break;
                }
                let gk = &g[n - k];
                if !gk.is_zero() {
                    acc = acc - fk.clone() * gk.clone();
                }
            }
            g.push(acc);
        }
        let terms = g
            .into_iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(n, c)| (n as i64 - k0, c * inv_c0.clone()))
            .collect();
        Ok(Series {
            denom: self.denom,
            terms,
            prec: Some(p - 2 * k0),
        }
        .normalized())
    }

    pub fn pow(&self, k: i64) -> Result<Self> {
        let base = if k < 0 { self.invert()? } else { self.clone() };
        let mut acc = Self::one();
        for _ in 0..k.unsigned_abs() {
            acc = acc.mul_series(&base);
        }
        Ok(acc)
    }

    /// True when both series agree on every exponent below the smaller of
    /// the two precisions.
    pub fn agrees_with(&self, other: &Self) -> bool {
        let p = match (self.prec(), other.prec()) {
            (None, None) => None,
            (Some(a), None) | (None, Some(a)) => Some(a),
            (Some(a), Some(b)) => Some(a.min(b)),
        };
        let keep = |e: &QExp| p.is_none_or(|p| *e < p);
        let a: Vec<_> = self.iter().filter(|(e, _)| keep(e)).collect();
        let b: Vec<_> = other.iter().filter(|(e, _)| keep(e)).collect();
        a == b
    }
}

impl<T: Coefficient> Default for Series<T> {
    fn default() -> Self {
        Self::exact_zero()
    }
}

impl<T: Coefficient> Add for &Series<T> {
    type Output = Series<T>;
    fn add(self, rhs: Self) -> Series<T> {
        self.combine(rhs, false)
    }
}

impl<T: Coefficient> Sub for &Series<T> {
    type Output = Series<T>;
    fn sub(self, rhs: Self) -> Series<T> {
        self.combine(rhs, true)
    }
}

impl<T: Coefficient> Mul for &Series<T> {
    type Output = Series<T>;
    fn mul(self, rhs: Self) -> Series<T> {
        self.mul_series(rhs)
    }
}

impl<T: Coefficient> Neg for &Series<T> {
    type Output = Series<T>;
    fn neg(self) -> Series<T> {
        self.scale(&-T::one())
    }
}

impl<T: Coefficient> Add for Series<T> {
    type Output = Series<T>;
    fn add(self, rhs: Self) -> Series<T> {
        &self + &rhs
    }
}

impl<T: Coefficient> Sub for Series<T> {
    type Output = Series<T>;
    fn sub(self, rhs: Self) -> Series<T> {
        &self - &rhs
    }
}

impl<T: Coefficient> Mul for Series<T> {
    type Output = Series<T>;
    fn mul(self, rhs: Self) -> Series<T> {
        &self * &rhs
    }
}

impl<T: Coefficient> Sum for Series<T> {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Self::exact_zero(), |a, b| &a + &b)
    }
}

/// `q^{k/24} * prod_{m>=1} (1 - q^m)^k` expanded below `prec`. Negative
/// powers are obtained by inverting the product.
pub fn eta_pow<T: Coefficient + FromPrimitive>(k: i64, prec: QExp) -> Series<T> {
    if k == 0 {
        return Series::one();
    }
    let shift = QExp::new(k, 24);
    let need = prec - shift;
    // integer exponents n with n < need
    let len = if need <= QExp::zero() {
        0
    } else {
        need.ceil().to_integer() as usize
    };
    if len == 0 {
        return Series::zero(prec);
    }
    let mut a: Vec<T> = vec![T::zero(); len];
    a[0] = T::one();
    for m in 1..len {
        for _ in 0..k.unsigned_abs() {
            for n in (m..len).rev() {
                let sub = a[n - m].clone();
                if !sub.is_zero() {
                    a[n] = a[n].clone() - sub;
                }
            }
        }
    }
    let product = Series::from_terms(
        a.into_iter()
            .enumerate()
            .map(|(n, c)| (QExp::from_integer(n as i64), c)),
        Some(QExp::from_integer(len as i64)),
    );
    let base = if k < 0 {
        product.invert().expect("product has constant term 1")
    } else {
        product
    };
    base.shift(shift).truncate(prec)
}

/// Renders a rational as `p/q` (denominator always present).
pub fn rational_to_string(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Parses `p/q` or a bare integer.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let parse_int = |t: &str| {
        BigInt::from_str_radix(t.trim(), 10).map_err(|e| Error::Parse(format!("{t:?}: {e}")))
    };
    match s.split_once('/') {
        Some((n, d)) => {
            let d = parse_int(d)?;
            if d.is_zero() {
                return Err(Error::Parse(format!("{s:?}: zero denominator")));
            }
            Ok(BigRational::new(parse_int(n)?, d))
        }
        None => Ok(BigRational::from_integer(parse_int(s)?)),
    }
}

/// JSON form of a series with rational coefficients.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesRecord {
    pub denom: i64,
    /// `None` for an exact series.
    pub prec: Option<String>,
    pub terms: Vec<(i64, String)>,
}

impl Series<BigRational> {
    pub fn to_record(&self) -> SeriesRecord {
        SeriesRecord {
            denom: self.denom,
            prec: self.prec().map(|p| format!("{}/{}", p.numer(), p.denom())),
            terms: self
                .terms
                .iter()
                .map(|(k, c)| (*k, rational_to_string(c)))
                .collect(),
        }
    }

    pub fn from_record(rec: &SeriesRecord) -> Result<Self> {
        if rec.denom <= 0 {
            return Err(Error::Parse(format!("nonpositive denominator {}", rec.denom)));
        }
        let prec = match &rec.prec {
            None => None,
            Some(p) => {
                let r = parse_rational(p)?;
                let n = r.numer().try_into().map_err(|_| Error::Parse(p.clone()));
                let d = r.denom().try_into().map_err(|_| Error::Parse(p.clone()));
                Some(QExp::new(n?, d?))
            }
        };
        let mut last = None;
        let mut terms = Vec::with_capacity(rec.terms.len());
        for (k, c) in &rec.terms {
            if last.is_some_and(|l| l >= *k) {
                return Err(Error::Parse("terms are not strictly ascending".into()));
            }
            last = Some(*k);
            let c = parse_rational(c)?;
            if c.is_zero() {
                return Err(Error::Parse(format!("zero coefficient at {k}")));
            }
            terms.push((QExp::new(*k, rec.denom), c));
        }
        Ok(Self::from_terms(terms, prec))
    }
}

fn fmt_exp(e: QExp) -> String {
    if e.is_integer() {
        format!("{}", e.numer())
    } else {
        format!("({}/{})", e.numer(), e.denom())
    }
}

impl fmt::Display for Series<BigRational> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (e, c) in self.iter() {
            let (sign, mag) = if c.is_negative() {
                ("-", -c.clone())
            } else {
                ("+", c.clone())
            };
            if first {
                if sign == "-" {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            first = false;
            let unit = mag.is_one();
            if e.is_zero() {
                write!(f, "{mag}")?;
            } else if unit {
                write!(f, "q^{}", fmt_exp(e))?;
            } else {
                write!(f, "{mag}*q^{}", fmt_exp(e))?;
            }
        }
        if let Some(p) = self.prec() {
            if !first {
                write!(f, " + ")?;
            }
            write!(f, "O(q^{})", fmt_exp(p))?;
        } else if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::QSeries;
    use proptest::prelude::*;

    fn r(n: i64) -> BigRational {
        BigRational::from_integer(n.into())
    }

    fn e(n: i64, d: i64) -> QExp {
        QExp::new(n, d)
    }

    fn poly(coefs: &[(i64, i64, i64)], prec: Option<QExp>) -> QSeries {
        QSeries::from_terms(coefs.iter().map(|&(n, d, c)| (e(n, d), r(c))), prec)
    }

    #[test]
    fn additive_identity_and_inverse() {
        let a = poly(&[(0, 1, 1), (1, 1, 1)], None);
        assert_eq!(&a + &QSeries::exact_zero(), a);
        let h = poly(&[(1, 2, 1)], None);
        assert!((&h + &(-&h)).is_zero());
        let b = poly(&[(0, 1, 1), (1, 1, 3)], None);
        let c = poly(&[(1, 1, 2), (2, 1, 1)], None);
        assert_eq!(&b + &c, poly(&[(0, 1, 1), (1, 1, 5), (2, 1, 1)], None));
    }

    #[test]
    fn add_takes_min_precision() {
        let a = poly(&[(0, 1, 1)], Some(e(3, 1)));
        let b = poly(&[(1, 2, 1)], Some(e(5, 2)));
        assert_eq!((&a + &b).prec(), Some(e(5, 2)));
    }

    #[test]
    fn product_examples() {
        let p = e(10, 1);
        let one_minus_q = poly(&[(0, 1, 1), (1, 1, -1)], None);
        let geom = QSeries::from_terms((0..10).map(|n| (e(n, 1), r(1))), Some(p));
        let prod = &one_minus_q * &geom;
        assert_eq!(prod, QSeries::one().truncate(p));

        let a = poly(&[(1, 2, 1)], None);
        let b = poly(&[(1, 3, 1)], None);
        assert_eq!(&a * &b, poly(&[(5, 6, 1)], None));
        assert_eq!((&a * &b).denom(), 6);

        let s = poly(&[(0, 1, 1), (1, 1, 3)], None);
        assert_eq!(&s * &s, poly(&[(0, 1, 1), (1, 1, 6), (2, 1, 9)], None));
    }

    #[test]
    fn product_precision_uses_leading_exponents() {
        // (q + O(q^3)) * (q^2 + O(q^5)) = q^3 + O(q^5)
        let a = poly(&[(1, 1, 1)], Some(e(3, 1)));
        let b = poly(&[(2, 1, 1)], Some(e(5, 1)));
        let c = &a * &b;
        assert_eq!(c.prec(), Some(e(5, 1)));
        assert_eq!(c.coeff(e(3, 1)), Some(r(1)));
    }

    #[test]
    fn invert_examples() {
        let a = poly(&[(0, 1, 1), (1, 1, -1)], Some(e(6, 1)));
        let inv = a.invert().unwrap();
        assert_eq!(inv, QSeries::from_terms((0..6).map(|n| (e(n, 1), r(1))), Some(e(6, 1))));

        let m = QSeries::monomial(r(2), e(1, 4));
        let inv = m.invert().unwrap();
        assert_eq!(inv, QSeries::monomial(BigRational::new(1.into(), 2.into()), e(-1, 4)));

        // frozen from a long-division oracle
        let theta = poly(&[(0, 1, 1), (1, 1, 2), (4, 1, 2)], Some(e(9, 1)));
        let inv = theta.invert().unwrap();
        let expect = [1, -2, 4, -8, 14, -24, 40, -64, 100];
        for (n, c) in expect.iter().enumerate() {
            assert_eq!(inv.coeff(e(n as i64, 1)), Some(r(*c)), "n = {n}");
        }
        assert_eq!(inv.prec(), Some(e(9, 1)));
    }

    #[test]
    fn invert_rejects_degenerate_input() {
        assert!(matches!(QSeries::zero(e(2, 1)).invert(), Err(Error::NotInvertible)));
        assert!(matches!(QSeries::exact_zero().invert(), Err(Error::NotInvertible)));
        let p = poly(&[(0, 1, 1), (1, 1, 1)], None);
        assert!(matches!(p.invert(), Err(Error::UnboundedInverse(2))));
    }

    #[test]
    fn rescale_examples() {
        let a = poly(&[(0, 1, 1), (1, 1, 1)], None);
        assert_eq!(a.rescale_exponents(e(1, 2)), poly(&[(0, 1, 1), (1, 2, 1)], None));
        assert_eq!(poly(&[(1, 3, 1)], None).rescale_exponents(e(3, 1)), poly(&[(1, 1, 1)], None));
        let b = poly(&[(-1, 5, 3), (2, 7, -1)], Some(e(4, 3)));
        assert_eq!(b.rescale_exponents(e(7, 2)).rescale_exponents(e(2, 7)), b);
        assert_eq!(b.rescale_exponents(e(3, 1)).prec(), Some(e(4, 1)));
    }

    #[test]
    fn eta_examples() {
        assert_eq!(eta_pow::<BigRational>(0, e(5, 1)), QSeries::one());
        // Euler pentagonal numbers
        let eta = eta_pow::<BigRational>(1, e(16, 1));
        let mut pent = BTreeMap::new();
        for k in -4i64..=4 {
            let g = k * (3 * k - 1) / 2;
            if g < 16 {
                pent.insert(g, if k % 2 == 0 { 1 } else { -1 });
            }
        }
        let shifted = eta.shift(e(-1, 24));
        for n in 0..16 {
            let want = pent.get(&n).copied().unwrap_or(0);
            assert_eq!(shifted.coeff(e(n, 1)), Some(r(want)), "n = {n}");
        }
        let inv3 = eta_pow::<BigRational>(-3, e(8, 1)).shift(e(1, 8));
        let expect = [1, 3, 9, 22, 51, 108, 221, 429];
        for (n, c) in expect.iter().enumerate() {
            assert_eq!(inv3.coeff(e(n as i64, 1)), Some(r(*c)));
        }
    }

    #[test]
    fn record_roundtrip_and_format() {
        let a = poly(&[(-1, 4, 3), (2, 3, -5)], Some(e(7, 2)));
        let rec = a.to_record();
        assert_eq!(rec.terms[0].1, "3/1");
        assert_eq!(QSeries::from_record(&rec).unwrap(), a);
        let bad = SeriesRecord {
            denom: 2,
            prec: None,
            terms: vec![(1, "1/2".into()), (0, "1".into())],
        };
        assert!(QSeries::from_record(&bad).is_err());
        assert_eq!(format!("{}", poly(&[(0, 1, 1), (1, 3, -2)], Some(e(1, 1)))), "1 - 2*q^(1/3) + O(q^1)");
    }

    #[test]
    fn generic_over_machine_rationals() {
        let a: Series<Rational64> =
            Series::from_terms([(e(0, 1), Rational64::from_integer(1)), (e(1, 1), Rational64::from_integer(-1))], Some(e(5, 1)));
        let inv = a.invert().unwrap();
        assert_eq!(inv.len(), 5);
        let eta: Series<Rational64> = eta_pow(-1, e(4, 1));
        assert_eq!(eta.shift(e(1, 24)).coeff(e(3, 1)), Some(Rational64::from_integer(3)));
    }

    fn arb_series() -> impl Strategy<Value = QSeries> {
        (
            1i64..4,
            prop::collection::vec((-3i64..12, -5i64..6), 0..6),
            4i64..14,
        )
            .prop_map(|(d, terms, p)| {
                QSeries::from_terms(
                    terms.into_iter().map(|(k, c)| (e(k, d), r(c))),
                    Some(e(p, d)),
                )
            })
    }

    fn arb_unit() -> impl Strategy<Value = QSeries> {
        (1i64..4, 1i64..5, prop::collection::vec((1i64..10, -4i64..5), 0..5), -2i64..3)
            .prop_map(|(d, c0, rest, lead)| {
                let mut t = vec![(e(lead, d), r(c0))];
                t.extend(rest.into_iter().map(|(k, c)| (e(lead + k, d), r(c))));
                QSeries::from_terms(t, Some(e(lead + 10, d)))
            })
    }

    proptest! {
        #[test]
        fn ring_axioms(a in arb_series(), b in arb_series(), c in arb_series()) {
            prop_assert_eq!(&a + &b, &b + &a);
            prop_assert_eq!(&a * &b, &b * &a);
            prop_assert!((&(&a + &b) + &c).agrees_with(&(&a + &(&b + &c))));
            prop_assert!((&(&a * &b) * &c).agrees_with(&(&a * &(&b * &c))));
            prop_assert!((&a * &(&b + &c)).agrees_with(&(&(&a * &b) + &(&a * &c))));
        }

        #[test]
        fn inverse_is_inverse(a in arb_unit()) {
            let inv = a.invert().unwrap();
            prop_assert_eq!(inv.lead(), a.lead().map(|x| -x));
            let prod = &a * &inv;
            prop_assert!(prod.agrees_with(&QSeries::one()));
            prop_assert!(prod.prec().unwrap() > QExp::zero());
        }

        #[test]
        fn eta_powers_multiply(x in -6i64..=6, y in -6i64..=6) {
            let p = e(6, 1);
            let lhs = &eta_pow::<BigRational>(x, p) * &eta_pow::<BigRational>(y, p);
            prop_assert!(lhs.agrees_with(&eta_pow::<BigRational>(x + y, p)));
        }

        #[test]
        fn precision_soundness(a in arb_unit(), b in arb_series(), extra in 1i64..6) {
            // recomputing from a longer expansion never changes known coefficients
            let lo_a = a.truncate(a.prec().unwrap() - e(extra, 2));
            prop_assert!((&lo_a * &b).agrees_with(&(&a * &b)));
            prop_assert!(lo_a.invert().unwrap().agrees_with(&a.invert().unwrap()));
        }
    }
}
