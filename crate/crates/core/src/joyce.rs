//! Joyce's combinatorial wall-crossing coefficients for the polarization
//! pair (pulled-back hyperplane, fibre limit), and the graph sets they are
//! summed over.
//!
//! Vertices are 0-based throughout: a graph on `m` vertices uses labels
//! `0..m`.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{slope_fplus, slope_h0, SheafClass};

/// Default guard on the number of parts of a wall.
pub const DEFAULT_MAX_PARTS: usize = 7;

/// A labelled tree whose edges point from the smaller to the larger label.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Tree {
    pub m: usize,
    pub edges: Vec<(usize, usize)>,
}

impl Tree {
    /// Checks the tree invariants: `m - 1` edges, each `i < j < m`,
    /// connected and acyclic.
    pub fn is_valid(&self) -> bool {
        if self.m == 0 || self.edges.len() + 1 != self.m {
            return false;
        }
        if self.edges.iter().any(|&(i, j)| i >= j || j >= self.m) {
            return false;
        }
        // m-1 edges without a cycle span m vertices
        let mut parent: Vec<usize> = (0..self.m).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for &(i, j) in &self.edges {
            let (a, b) = (find(&mut parent, i), find(&mut parent, j));
            if a == b {
                return false;
            }
            parent[a] = b;
        }
        true
    }
}

/// A directed graph on `0..m` with edges `i -> j`, `i <= j`. Loops and
/// repeated edges are allowed.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Digraph {
    pub m: usize,
    pub edges: Vec<(usize, usize)>,
}

impl Digraph {
    pub fn new(m: usize, edges: Vec<(usize, usize)>) -> Self {
        debug_assert!(edges.iter().all(|&(i, j)| i <= j && j < m));
        Digraph { m, edges }
    }
}

impl From<&Tree> for Digraph {
    fn from(t: &Tree) -> Self {
        Digraph::new(t.m, t.edges.clone())
    }
}

/// All labelled trees on `m` vertices, ordered by their sorted edge list.
pub fn trees(m: usize) -> Result<Vec<Tree>> {
    trees_with_limit(m, DEFAULT_MAX_PARTS)
}

pub fn trees_with_limit(m: usize, max_parts: usize) -> Result<Vec<Tree>> {
    if m == 0 {
        return Err(Error::InvalidInput("a tree needs at least one vertex".into()));
    }
    if m > max_parts {
        return Err(Error::LimitExceeded {
            what: "number of tree vertices",
            value: m as u64,
            max: max_parts as u64,
        });
    }
    let all: Vec<(usize, usize)> = (0..m)
        .flat_map(|i| (i + 1..m).map(move |j| (i, j)))
        .collect();
    let mut out = Vec::new();
    let mut pick = Vec::with_capacity(m - 1);
    choose(&all, 0, m - 1, &mut pick, &mut |edges| {
        let t = Tree {
            m,
            edges: edges.to_vec(),
        };
        if t.is_valid() {
            out.push(t);
        }
    });
    Ok(out)
}

fn choose<F: FnMut(&[(usize, usize)])>(
    all: &[(usize, usize)],
    from: usize,
    left: usize,
    pick: &mut Vec<(usize, usize)>,
    emit: &mut F,
) {
    if left == 0 {
        emit(pick);
        return;
    }
    for k in from..=all.len() - left {
        pick.push(all[k]);
        choose(all, k + 1, left - 1, pick, emit);
        pick.pop();
    }
}

/// Ordered compositions of `n` into positive parts. A composition lists
/// the fibre sizes of a non-decreasing surjection from `0..n`.
pub fn compositions(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    // bit k of the mask set means "cut after position k"
    (0..1u64 << (n - 1))
        .map(|mask| {
            let mut parts = Vec::new();
            let mut run = 1;
            for k in 0..n - 1 {
                if mask >> k & 1 == 1 {
                    parts.push(run);
                    run = 1;
                } else {
                    run += 1;
                }
            }
            parts.push(run);
            parts
        })
        .collect()
}

/// Joyce's `S` for the pair (hyperplane slope, fibre-limit slope).
pub fn s_coeff(classes: &[SheafClass]) -> i8 {
    assert!(!classes.is_empty(), "s_coeff needs at least one class");
    let total = classes
        .iter()
        .copied()
        .reduce(|a, b| a + b)
        .expect("nonempty");
    let mut left = classes[0];
    let mut sign = 1i8;
    for i in 0..classes.len() - 1 {
        let right = SheafClass::new(total.r - left.r, total.beta - left.beta);
        let h_le = slope_h0(classes[i]) <= slope_h0(classes[i + 1]);
        let f_cmp = slope_fplus(left).cmp(&slope_fplus(right));
        if h_le && f_cmp == Ordering::Greater {
            sign = -sign;
        } else if h_le || f_cmp == Ordering::Greater {
            return 0;
        }
        left = left + classes[i + 1];
    }
    sign
}

fn factorial(n: usize) -> BigInt {
    (1..=n).map(BigInt::from).product()
}

/// Groups consecutive classes according to a composition.
pub fn group_by(classes: &[SheafClass], parts: &[usize]) -> Vec<SheafClass> {
    let mut out = Vec::with_capacity(parts.len());
    let mut k = 0;
    for &p in parts {
        let sum = classes[k..k + p]
            .iter()
            .copied()
            .reduce(|a, b| a + b)
            .expect("positive part");
        out.push(sum);
        k += p;
    }
    out
}

/// Joyce's `U`: the full sum over pairs of non-decreasing surjections.
pub fn u_coeff(classes: &[SheafClass]) -> Result<BigRational> {
    u_coeff_with_limit(classes, DEFAULT_MAX_PARTS)
}

pub fn u_coeff_with_limit(classes: &[SheafClass], max_parts: usize) -> Result<BigRational> {
    let m = classes.len();
    if m == 0 {
        return Err(Error::InvalidInput("u_coeff needs at least one class".into()));
    }
    if m > max_parts {
        return Err(Error::LimitExceeded {
            what: "number of classes",
            value: m as u64,
            max: max_parts as u64,
        });
    }
    let mut total = BigRational::zero();
    for psi in compositions(m) {
        let mut start = 0;
        let mut ok = true;
        for &p in &psi {
            let s0 = slope_h0(classes[start]);
            if classes[start..start + p].iter().any(|c| slope_h0(*c) != s0) {
                ok = false;
                break;
            }
            start += p;
        }
        if !ok {
            continue;
        }
        let upsilon = group_by(classes, &psi);
        let fib: BigInt = psi.iter().map(|&p| factorial(p)).product();
        for psi2 in compositions(upsilon.len()) {
            let big = group_by(&upsilon, &psi2);
            let s0 = slope_fplus(big[0]);
            if big.iter().any(|c| slope_fplus(*c) != s0) {
                continue;
            }
            let mut s_prod = 1i64;
            let mut k = 0;
            for &p in &psi2 {
                s_prod *= s_coeff(&upsilon[k..k + p]) as i64;
                k += p;
                if s_prod == 0 {
                    break;
                }
            }
            if s_prod == 0 {
                continue;
            }
            let m2 = psi2.len() as i64;
            let sign = if m2 % 2 == 1 { 1 } else { -1 };
            total += BigRational::new(
                BigInt::from(s_prod * sign),
                BigInt::from(m2) * fib.clone(),
            );
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::NSVec;
    use proptest::prelude::*;
    use std::collections::HashSet;

    fn cl(r: i64, x: i64, y: i64) -> SheafClass {
        SheafClass::new(r, NSVec::new(x, y))
    }

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn tree_examples() {
        let t1 = trees(1).unwrap();
        assert_eq!(t1, vec![Tree { m: 1, edges: vec![] }]);
        let t3: Vec<Vec<(usize, usize)>> = trees(3).unwrap().into_iter().map(|t| t.edges).collect();
        assert_eq!(t3, vec![vec![(0, 1), (0, 2)], vec![(0, 1), (1, 2)], vec![(0, 2), (1, 2)]]);
        assert!(matches!(trees(8), Err(Error::LimitExceeded { .. })));
        assert!(trees_with_limit(8, 8).is_ok());
    }

    #[test]
    fn cayley_counts() {
        for m in 1..=6usize {
            let ts = trees(m).unwrap();
            let expect = if m == 1 { 1 } else { m.pow(m as u32 - 2) };
            assert_eq!(ts.len(), expect, "m = {m}");
            assert!(ts.iter().all(Tree::is_valid));
            let distinct: HashSet<_> = ts.iter().collect();
            assert_eq!(distinct.len(), ts.len());
        }
    }

    #[test]
    fn composition_counts() {
        for n in 1..8 {
            let cs = compositions(n);
            assert_eq!(cs.len(), 1 << (n - 1));
            assert!(cs.iter().all(|c| c.iter().sum::<usize>() == n));
        }
        assert_eq!(compositions(3)[0], vec![3]);
    }

    #[test]
    fn s_examples() {
        assert_eq!(s_coeff(&[cl(3, 1, 2)]), 1);
        assert_eq!(s_coeff(&[cl(1, 0, 2), cl(1, 1, -1)]), -1);
        assert_eq!(s_coeff(&[cl(1, 1, 0), cl(1, 0, 1)]), 0);
    }

    #[test]
    fn u_examples() {
        assert_eq!(u_coeff(&[cl(2, 1, 1)]).unwrap(), q(1, 1));
        assert_eq!(u_coeff(&[cl(1, 0, 2), cl(1, 0, -1)]).unwrap(), q(-1, 2));
        let l = [cl(1, 0, 0), cl(1, 1, 0)];
        assert_eq!(u_coeff(&l).unwrap(), q(s_coeff(&l) as i64, 1));
        let long = vec![cl(1, 0, 0); 8];
        assert!(u_coeff(&long).is_err());
    }

    fn arb_classes() -> impl Strategy<Value = Vec<SheafClass>> {
        prop::collection::vec((1i64..4, -4i64..5, -4i64..5), 1..5)
            .prop_map(|v| v.into_iter().map(|(r, x, y)| cl(r, x, y)).collect())
    }

    proptest! {
        #[test]
        fn s_is_a_sign(cs in arb_classes()) {
            prop_assert!([-1, 0, 1].contains(&s_coeff(&cs)));
        }

        #[test]
        fn scaling_invariance(cs in arb_classes(), k in 2i64..4) {
            let scaled: Vec<_> = cs.iter().map(|c| SheafClass::new(k * c.r, k * c.beta)).collect();
            prop_assert_eq!(s_coeff(&cs), s_coeff(&scaled));
            prop_assert_eq!(u_coeff(&cs).unwrap(), u_coeff(&scaled).unwrap());
        }

        #[test]
        fn generic_u_equals_s(cs in arb_classes()) {
            let m = cs.len();
            let h: Vec<_> = cs.iter().map(|c| slope_h0(*c)).collect();
            let distinct_h = (0..m).all(|i| (i + 1..m).all(|j| h[i] != h[j]));
            // every coarsening into two or more blocks has distinct fibre slopes
            let generic_f = compositions(m).into_iter().filter(|p| p.len() > 1).all(|p| {
                let g = group_by(&cs, &p);
                let s0 = slope_fplus(g[0]);
                g.iter().any(|c| slope_fplus(*c) != s0)
            });
            prop_assume!(distinct_h && generic_f);
            prop_assert_eq!(u_coeff(&cs).unwrap(), q(s_coeff(&cs) as i64, 1));
        }
    }
}
