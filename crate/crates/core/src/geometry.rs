//! Neron-Severi lattice of the plane blown up at one point.
//!
//! A class `x*H + y*C` is stored as `(x, y)` where `H` is the pulled-back
//! hyperplane and `C` the exceptional curve, so `H.H = 1`, `C.C = -1` and
//! `H.C = 0`. The canonical class is `-3H + C`.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_rational::Rational64;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct NSVec {
    pub x: i64,
    pub y: i64,
}

impl NSVec {
    pub const fn new(x: i64, y: i64) -> Self {
        NSVec { x, y }
    }

    pub const ZERO: NSVec = NSVec::new(0, 0);
    /// Pulled-back hyperplane class.
    pub const H0: NSVec = NSVec::new(1, 0);
    /// Exceptional curve.
    pub const C: NSVec = NSVec::new(0, 1);
    /// Fibre of the ruling, `H - C`.
    pub const F: NSVec = NSVec::new(1, -1);
    pub const CANONICAL: NSVec = NSVec::new(-3, 1);

    /// Componentwise remainder in `[0, r)`.
    pub fn reduce(self, r: i64) -> NSVec {
        NSVec::new(self.x.rem_euclid(r), self.y.rem_euclid(r))
    }
}

impl fmt::Display for NSVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.x, self.y)
    }
}

impl Add for NSVec {
    type Output = NSVec;
    fn add(self, o: NSVec) -> NSVec {
        NSVec::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for NSVec {
    type Output = NSVec;
    fn sub(self, o: NSVec) -> NSVec {
        NSVec::new(self.x - o.x, self.y - o.y)
    }
}

impl Neg for NSVec {
    type Output = NSVec;
    fn neg(self) -> NSVec {
        NSVec::new(-self.x, -self.y)
    }
}

impl Mul<NSVec> for i64 {
    type Output = NSVec;
    fn mul(self, v: NSVec) -> NSVec {
        NSVec::new(self * v.x, self * v.y)
    }
}

/// Intersection pairing.
pub fn intersect(a: NSVec, b: NSVec) -> i64 {
    a.x * b.x - a.y * b.y
}

/// Pairing with the canonical class.
pub fn k_dot(b: NSVec) -> i64 {
    -3 * b.x - b.y
}

/// Rank together with a first Chern class on the blow-up. The second
/// Chern character never affects a slope, so it is not carried.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SheafClass {
    pub r: i64,
    pub beta: NSVec,
}

impl SheafClass {
    pub fn new(r: i64, beta: NSVec) -> Self {
        assert!(r >= 1, "rank must be positive, got {r}");
        SheafClass { r, beta }
    }
}

impl Add for SheafClass {
    type Output = SheafClass;
    fn add(self, o: SheafClass) -> SheafClass {
        SheafClass::new(self.r + o.r, self.beta + o.beta)
    }
}

impl fmt::Display for SheafClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.r, self.beta)
    }
}

/// Slope with respect to the pulled-back hyperplane.
pub fn slope_h0(c: SheafClass) -> Rational64 {
    Rational64::new(c.beta.x, c.r)
}

/// Slope for `H_t = H - tC` as `t -> 1` from below, ordered
/// lexicographically: first the fibre degree, then the tie-breaking
/// `-y/r` term.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct LexSlope {
    pub f_part: Rational64,
    pub c_part: Rational64,
}

impl Ord for LexSlope {
    fn cmp(&self, o: &Self) -> Ordering {
        self.f_part.cmp(&o.f_part).then(self.c_part.cmp(&o.c_part))
    }
}

impl PartialOrd for LexSlope {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

pub fn slope_fplus(c: SheafClass) -> LexSlope {
    let NSVec { x, y } = c.beta;
    LexSlope {
        f_part: Rational64::new(x + y, c.r),
        c_part: Rational64::new(-y, c.r),
    }
}

/// Residues modulo `r` in row-major order.
pub fn ns_box(r: i64) -> Vec<NSVec> {
    assert!(r >= 1);
    (0..r)
        .flat_map(|x| (0..r).map(move |y| NSVec::new(x, y)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(n: i64, d: i64) -> Rational64 {
        Rational64::new(n, d)
    }

    #[test]
    fn pairings() {
        assert_eq!(intersect(NSVec::F, NSVec::F), 0);
        for l in -5..5 {
            assert_eq!(intersect(NSVec::F, NSVec::new(l, 1 - l)), 1);
        }
        assert_eq!(intersect(NSVec::C, NSVec::C), -1);
        assert_eq!(intersect(NSVec::H0, NSVec::H0), 1);
        assert_eq!(k_dot(NSVec::C), -1);
        assert_eq!(k_dot(NSVec::F), -2);
        assert_eq!(k_dot(NSVec::ZERO), 0);
        assert_eq!(k_dot(NSVec::new(2, 7)), intersect(NSVec::CANONICAL, NSVec::new(2, 7)));
    }

    #[test]
    fn slopes() {
        let c = |r, x, y| SheafClass::new(r, NSVec::new(x, y));
        assert_eq!(slope_h0(c(1, 0, 2)), q(0, 1));
        assert_eq!(slope_h0(c(2, 1, 0)), q(1, 2));
        assert_eq!(slope_h0(c(3, -2, 5)), q(-2, 3));
        let lex = |a, b| LexSlope { f_part: a, c_part: b };
        assert_eq!(slope_fplus(c(1, 0, 2)), lex(q(2, 1), q(-2, 1)));
        assert_eq!(slope_fplus(c(1, 1, -1)), lex(q(0, 1), q(1, 1)));
        assert_eq!(slope_fplus(c(2, 1, 1)), lex(q(1, 1), q(-1, 2)));
    }

    #[test]
    fn residue_box() {
        assert_eq!(ns_box(1), vec![NSVec::ZERO]);
        assert_eq!(
            ns_box(2),
            vec![NSVec::new(0, 0), NSVec::new(0, 1), NSVec::new(1, 0), NSVec::new(1, 1)]
        );
        for r in 1..6 {
            assert_eq!(ns_box(r).len() as i64, r * r);
        }
    }

    #[test]
    fn fibre_slopes_never_tie_on_walls() {
        for l in -4i64..=4 {
            let total = NSVec::new(l, 1 - l);
            for r1 in 1..=6i64 {
                for r2 in 1..=6i64 {
                    for x in -8..=8 {
                        for y in -8..=8 {
                            let b1 = NSVec::new(x, y);
                            let b2 = total - b1;
                            let f1 = q(intersect(b1, NSVec::F), r1);
                            let f2 = q(intersect(b2, NSVec::F), r2);
                            assert_ne!(f1, f2, "l={l} r=({r1},{r2}) b1={b1}");
                        }
                    }
                }
            }
        }
    }

    fn arb_class() -> impl Strategy<Value = SheafClass> {
        (1i64..=10, -20i64..=20, -20i64..=20).prop_map(|(r, x, y)| SheafClass::new(r, NSVec::new(x, y)))
    }

    proptest! {
        #[test]
        fn pairing_is_symmetric_bilinear(a in (-50i64..50, -50i64..50), b in (-50i64..50, -50i64..50), c in (-50i64..50, -50i64..50), k in -5i64..5) {
            let (a, b, c) = (NSVec::new(a.0, a.1), NSVec::new(b.0, b.1), NSVec::new(c.0, c.1));
            prop_assert_eq!(intersect(a, b), intersect(b, a));
            prop_assert_eq!(intersect(a + k * b, c), intersect(a, c) + k * intersect(b, c));
        }

        #[test]
        fn lex_order_matches_nearby_polarization(a in arb_class(), b in arb_class()) {
            // mu_t = (x + t y)/r at t = 1 - 1/1000, compared exactly
            let t = q(999, 1000);
            let mu = |c: SheafClass| (q(c.beta.x, 1) + t * q(c.beta.y, 1)) / q(c.r, 1);
            prop_assert_eq!(slope_fplus(a).cmp(&slope_fplus(b)), mu(a).cmp(&mu(b)));
        }
    }
}
