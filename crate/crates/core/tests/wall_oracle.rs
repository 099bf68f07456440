use lp2dt::engine::{
    s_series, s_series_bruteforce, u_series, u_series_bruteforce, walls, GroupedWall, Part, WallData,
};
use lp2dt::joyce::{Digraph, Tree};
use lp2dt::{Error, QExp, QSeries};

fn certified<F: Fn(u32) -> lp2dt::Result<QSeries>>(f: F) -> QSeries {
    let mut radius = 4;
    loop {
        match f(radius) {
            Ok(s) => return s,
            Err(Error::RadiusTooSmall(_)) if radius < 24 => radius *= 2,
            Err(e) => panic!("{e}"),
        }
    }
}

#[test]
fn rank_two_walls_match_direct_sums() {
    let prec = QExp::from_integer(3);
    for l in 0..4 {
        for w in walls(2, l, 7).unwrap() {
            let fast = u_series(&w, prec).unwrap();
            let slow = certified(|rad| u_series_bruteforce(&w, prec, rad));
            assert_eq!(fast, slow, "l = {l}");
            let gw = GroupedWall::from(&w);
            let s_fast = s_series(&gw, prec).unwrap();
            let s_slow = certified(|rad| s_series_bruteforce(&gw, prec, rad));
            assert_eq!(s_fast, s_slow, "l = {l}");
        }
    }
}

#[test]
fn rank_three_wall_matches_direct_sum() {
    let w = WallData {
        l: 1,
        parts: vec![Part::new(1, 0, 0), Part::new(2, 0, 1)],
        graph: Tree { m: 2, edges: vec![(0, 1)] },
    };
    let prec = QExp::from_integer(2);
    let fast = u_series(&w, prec).unwrap();
    assert_eq!(fast, certified(|rad| u_series_bruteforce(&w, prec, rad)));
}

#[test]
fn three_part_walls_match_direct_sums() {
    let prec = QExp::from_integer(1);
    for w in walls(3, 1, 7).unwrap().into_iter().filter(|w| w.parts.len() == 3) {
        let fast = u_series(&w, prec).unwrap();
        assert_eq!(fast, certified(|rad| u_series_bruteforce(&w, prec, rad)), "{w:?}");
    }
}

#[test]
fn merged_slopes_differ_from_plain_s_series() {
    // both parts have slope 0, so they can merge; U sees this and S does not
    let w = WallData {
        l: 0,
        parts: vec![Part::new(1, 0, 0), Part::new(2, 0, 1)],
        graph: Tree { m: 2, edges: vec![(0, 1)] },
    };
    let prec = QExp::from_integer(2);
    let u = u_series(&w, prec).unwrap();
    let s = s_series(&GroupedWall::from(&w), prec).unwrap();
    assert_ne!(u, s);
    assert_eq!(u, certified(|rad| u_series_bruteforce(&w, prec, rad)));
    assert_eq!(s, certified(|rad| s_series_bruteforce(&GroupedWall::from(&w), prec, rad)));
}

#[test]
fn grouped_series_with_loops_and_repeats() {
    let prec = QExp::from_integer(2);
    let looped = GroupedWall {
        l: 1,
        groups: vec![Part::new(1, 0, 0), Part::new(1, 0, 0)],
        weight_graph: Digraph::new(2, vec![(0, 0)]),
    };
    assert!(s_series(&looped, prec).unwrap().is_zero());
    let doubled = GroupedWall {
        l: 1,
        groups: vec![Part::new(1, 0, 0), Part::new(2, 1, 1)],
        weight_graph: Digraph::new(2, vec![(0, 1), (0, 1)]),
    };
    let fast = s_series(&doubled, prec).unwrap();
    assert_eq!(fast, certified(|rad| s_series_bruteforce(&doubled, prec, rad)));
    let disconnected = GroupedWall {
        l: 2,
        groups: vec![Part::new(1, 0, 0), Part::new(1, 0, 0), Part::new(1, 0, 0)],
        weight_graph: Digraph::new(3, vec![(1, 2)]),
    };
    let fast = s_series(&disconnected, QExp::from_integer(1)).unwrap();
    assert_eq!(fast, certified(|rad| s_series_bruteforce(&disconnected, QExp::from_integer(1), rad)));
}

#[test]
fn prec_zero_is_empty() {
    for w in walls(2, 1, 7).unwrap() {
        assert!(u_series(&w, QExp::from_integer(0)).unwrap().is_zero());
    }
}
