use proptest::prelude::*;
use ratiocut_core::dynamics::{normalize, split_domain, CurvilinearQuad};
use ratiocut_core::geometry::{arc_length, cap_area, stokes_area, BoundaryCurve, Point};
use ratiocut_core::graphlap::{
    energy, functional_f2, graph_p_laplacian_apply, median, var_p, AffinityGraph,
};
use ratiocut_core::perturbation::{first_order_offset, MultiIndex, Ratio};
use ratiocut_core::ratiocut::{lemma2_check, ratio_cut, ratio_cut_value_unchecked};
use ratiocut_core::sweep::SweepSpec;
use ratiocut_core::{CutParams, DomainParams};

fn sigma(bound: f64) -> impl Strategy<Value = DomainParams> {
    proptest::array::uniform7(-bound..=bound).prop_map(DomainParams::from_array)
}

fn cut() -> impl Strategy<Value = CutParams> {
    (0.4..0.6f64, 0.4..0.6f64, -0.2..0.2f64).prop_map(|(q, p, t)| CutParams::new(q, p, t))
}

fn graph() -> impl Strategy<Value = AffinityGraph> {
    (3usize..9).prop_flat_map(|n| {
        proptest::collection::vec(0.05..1.0f64, n - 1).prop_map(move |w| {
            // a weighted path plus one chord keeps every graph connected
            let mut e: Vec<_> = w.iter().enumerate().map(|(i, &w)| (i, i + 1, w)).collect();
            e.push((0, n - 1, 0.5));
            AffinityGraph::from_edges(n, &e).unwrap()
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn mirror_preserves_ratio_cut(s in sigma(0.05), c in cut()) {
        let m = CutParams::new(1.0 - c.q, 1.0 - c.p, -c.theta);
        let a = ratio_cut_value_unchecked(&s, &c).unwrap();
        let b = ratio_cut_value_unchecked(&s.mirror(), &m).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * a.abs());
    }

    #[test]
    fn areas_split_the_domain(s in sigma(0.05), c in cut()) {
        let b = ratio_cut(&s, &c).unwrap();
        let q = CurvilinearQuad::from_sigma(&s).unwrap();
        let (l, r) = split_domain(&q, &c).unwrap();
        prop_assert!((l.area - b.area_left).abs() < 1e-9);
        prop_assert!((l.area + r.area - q.area).abs() < 1e-9);
        prop_assert!((b.area_left + b.area_right - b.total_area()).abs() < 1e-12);
    }

    #[test]
    fn cap_is_odd_and_arc_even(c in 0.05..2.0f64, t in 1e-6..3.0f64) {
        prop_assert_eq!(cap_area(c, -t).unwrap(), -cap_area(c, t).unwrap());
        prop_assert_eq!(arc_length(c, -t), arc_length(c, t));
        prop_assert!(cap_area(c, t).unwrap() > 0.0);
        prop_assert!(arc_length(c, t) > c);
    }

    #[test]
    fn arc_points_match_stokes_area(c in 0.1..2.0f64, t in -2.5..2.5f64) {
        let (a, b) = (Point::new(0.0, 0.0), Point::new(c, 0.0));
        let loop_area = stokes_area(&[BoundaryCurve::arc(a, b, t), BoundaryCurve::line(b, a)]);
        // θ > 0 bulges right of a→b, below the x-axis, so the loop runs counter-clockwise
        let polygon: Vec<Point> = BoundaryCurve::arc(a, b, t).sample(4000);
        let shoelace: f64 = polygon.windows(2).map(|w| 0.5 * w[0].cross(w[1])).sum();
        let cap = cap_area(c, t).unwrap();
        prop_assert!((shoelace.abs() - cap.abs()).abs() <= 1e-6 * c * c);
        if t > 0.0 {
            prop_assert!((loop_area.unwrap() - cap).abs() <= 1e-12);
        } else {
            prop_assert!(loop_area.is_err());
        }
    }

    #[test]
    fn cap_bound_holds_for_small_arcs(c in 0.1..2.0f64, t in 1e-3..0.4f64) {
        prop_assert!(lemma2_check(c, t, 0.05, 0.5).unwrap().holds);
    }

    #[test]
    fn first_order_offset_is_linear(s in sigma(0.1), k in -3.0..3.0f64) {
        let scaled = DomainParams::from_array(s.to_array().map(|v| k * v));
        let (a, b) = (first_order_offset(&s), first_order_offset(&scaled));
        for i in 0..3 {
            prop_assert!((b[i] - k * a[i]).abs() <= 1e-14);
        }
    }

    #[test]
    fn normalize_is_idempotent(s in sigma(0.04), w in 0.5..3.0f64) {
        let q = CurvilinearQuad::from_sigma(&s).unwrap();
        let big = q.map(&ratiocut_core::dynamics::Similarity {
            scale: w, cos: 0.6, sin: 0.8, tx: 1.0, ty: -2.0,
        }).unwrap();
        let (n1, _) = normalize(&big).unwrap();
        let (n2, t2) = normalize(&n1).unwrap();
        prop_assert!((t2.scale - 1.0).abs() < 1e-9);
        prop_assert!((t2.sin).abs() < 1e-9);
        prop_assert!((n1.area - n2.area).abs() < 1e-9);
    }

    #[test]
    fn f2_is_invariant_under_affine_maps(
        g in graph(),
        seed in proptest::collection::vec(-1.0..1.0f64, 9),
        alpha in prop_oneof![-4.0..-0.1f64, 0.1..4.0f64],
        shift in -3.0..3.0f64,
    ) {
        let f: Vec<f64> = seed[..g.len()].to_vec();
        prop_assume!(f.iter().any(|v| (v - f[0]).abs() > 1e-6));
        let h: Vec<f64> = f.iter().map(|v| alpha * v + shift).collect();
        let (a, b) = (functional_f2(&g, &f, 1.0).unwrap(), functional_f2(&g, &h, 1.0).unwrap());
        prop_assert!((a - b).abs() <= 1e-10 * a.abs().max(1.0));
    }

    #[test]
    fn median_minimizes_var1(f in proptest::collection::vec(-5.0..5.0f64, 1..20), c in -5.0..5.0f64) {
        let m = median(&f);
        let at = |c: f64| f.iter().map(|v| (v - c).abs()).sum::<f64>();
        prop_assert!((var_p(&f, 1.0).unwrap() - at(m)).abs() < 1e-12);
        prop_assert!(at(m) <= at(c) + 1e-12);
    }

    #[test]
    fn p2_laplacian_is_d_minus_w(g in graph(), seed in proptest::collection::vec(-1.0..1.0f64, 9)) {
        let f = &seed[..g.len()];
        let lf = graph_p_laplacian_apply(&g, f, 2.0).unwrap();
        for (i, v) in lf.iter().enumerate() {
            let expect: f64 = g.degree(i) * f[i]
                - g.neighbors(i).iter().map(|&(j, w)| w * f[j]).sum::<f64>();
            prop_assert!((v - expect).abs() < 1e-12);
        }
        let e = energy(&g, f, 2.0).unwrap();
        // the sum over ordered pairs counts each edge twice
        let quad: f64 = f.iter().zip(&lf).map(|(a, b)| a * b).sum();
        prop_assert!((e - quad).abs() < 1e-12);
    }

    #[test]
    fn ratio_round_trips(n in -1000i64..1000, d in 1i64..1000) {
        let r: Ratio = Ratio::reduced(n, d);
        prop_assert_eq!(r.to_string().parse::<Ratio>().unwrap(), r);
        prop_assert!((r.to_f64() - n as f64 / d as f64).abs() < 1e-15);
    }

    #[test]
    fn sweep_grid_hits_both_ends(lo in -0.1..0.0f64, span in 0.01..0.2f64, count in 2usize..40) {
        let s = SweepSpec::new("a1=-eps_t/5", (lo, lo + span), count).unwrap();
        let v = s.values();
        prop_assert_eq!(v.len(), count);
        prop_assert_eq!(v[0], lo);
        prop_assert!((v[count - 1] - (lo + span)).abs() < 1e-15);
        let mid = s.sigma(v[count / 2]);
        prop_assert!((mid.eps_t + 5.0 * mid.a1).abs() < 1e-15);
    }
}

#[test]
fn multi_indices_round_trip() {
    for idx in MultiIndex::all() {
        assert_eq!(idx.to_string().parse::<MultiIndex>().unwrap(), idx);
    }
    assert_eq!(MultiIndex::all().len(), 36);
}
