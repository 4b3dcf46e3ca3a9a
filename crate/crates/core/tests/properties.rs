use ftspanner::assembly::{build_construction, BuildConfig};
use ftspanner::hnets::{build_nets, validate_nets};
use ftspanner::metric::pow2;
use ftspanner::{MetricSpace, Spanner, Tags};
use proptest::prelude::*;

fn points(max_n: usize, dim: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec(-100i32..100, dim), 2..=max_n).prop_map(|raw| {
        let mut seen = std::collections::BTreeSet::new();
        raw.into_iter()
            .filter(|p| seen.insert(p.clone()))
            .map(|p| p.into_iter().map(|c| c as f64 * 0.37).collect())
            .collect()
    })
}

fn space(max_n: usize, dim: usize) -> impl Strategy<Value = MetricSpace> {
    points(max_n, dim)
        .prop_filter("two distinct points", |p| p.len() >= 2)
        .prop_map(|p| MetricSpace::from_points(&p).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn normalize_idempotent(ms in space(30, 2)) {
        let (a, _) = ms.normalize().unwrap();
        let (b, scale) = a.normalize().unwrap();
        prop_assert_eq!(scale, 1.0);
        for i in 0..a.len() {
            for j in 0..a.len() {
                prop_assert_eq!(a.dist(i, j), b.dist(i, j));
            }
        }
    }

    #[test]
    fn mst_bounds(ms in space(40, 2), k in 0usize..3) {
        let ns = ms.normalize().unwrap().0;
        let mst = ns.mst().weight;
        prop_assert!(mst >= ns.diameter() * (1.0 - 1e-12));
        let k = k.min(ns.len() - 2);
        let nets = build_nets(&ns, k).unwrap();
        for i in 0..=nets.top {
            for c in 0..nets.colors() {
                let size = nets.net(i, c).len() as f64;
                prop_assert!(mst >= pow2(i as i64) * size / 2.0 * (1.0 - 1e-12));
            }
        }
    }

    #[test]
    fn nets_valid_and_deterministic(ms in space(40, 2), k in 0usize..4) {
        let ns = ms.normalize().unwrap().0;
        let k = k.min(ns.len() - 2);
        let nets = build_nets(&ns, k).unwrap();
        prop_assert_eq!(validate_nets(&nets, &ns), vec![]);
        prop_assert_eq!(&nets, &build_nets(&ns, k).unwrap());
    }

    #[test]
    fn net_size_bound(ms in space(40, 2), k in 0usize..3, factor in 2u32..6) {
        let ns = ms.normalize().unwrap().0;
        let k = k.min(ns.len() - 2);
        let nets = build_nets(&ns, k).unwrap();
        let dim = 2;
        for i in 0..=nets.top {
            let r = pow2(i as i64);
            let big = factor as f64 * r;
            let cap = (big / r).powi(2 * dim);
            for c in 0..nets.colors() {
                for center in 0..ns.len() {
                    let inside = nets.net(i, c).iter().filter(|&&y| ns.dist(center, y) <= big).count();
                    prop_assert!(inside as f64 <= cap);
                }
            }
        }
    }

    #[test]
    fn geometric_chain(
        eps in 0.01f64..(1.0 / 6.0),
        steps in prop::collection::vec((1.0f64..20.0, 0.0f64..std::f64::consts::TAU), 1..8),
    ) {
        let mut pts = vec![vec![0.0, 0.0]];
        let mut radius = 1.0;
        for (grow, angle) in steps {
            radius *= grow / eps;
            pts.push(vec![radius * angle.cos(), radius * angle.sin()]);
        }
        let ms = MetricSpace::from_points(&pts).unwrap();
        let l = pts.len() - 1;
        for i in 0..l {
            prop_assume!(ms.dist(0, i) <= eps * ms.dist(0, i + 1));
        }
        let length: f64 = (0..l).map(|i| ms.dist(i, i + 1)).sum();
        prop_assert!(length <= (1.0 + 3.0 * eps) * ms.dist(0, l) * (1.0 + 1e-12));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn build_round_trips_and_is_deterministic(ms in space(25, 2), k in 0usize..3, eps in 0.05f64..0.49) {
        let k = k.min(ms.len() - 2);
        let cfg = BuildConfig::new(eps, k, 2);
        let a = build_construction(&ms, &cfg).unwrap();
        let b = build_construction(&ms, &cfg).unwrap();
        prop_assert_eq!(&a.spanner, &b.spanner);
        prop_assert_eq!(&Spanner::from_csv(&a.spanner.to_csv()).unwrap(), &a.spanner);
        prop_assert_eq!(&Spanner::from_json(&a.spanner.to_json().unwrap()).unwrap(), &a.spanner);
        prop_assert_eq!(&Spanner::from_csv(&a.base.to_csv()).unwrap(), &a.base);
        for (u, v, e) in a.spanner.edges() {
            prop_assert_eq!(e.weight, ms.dist(u, v));
            prop_assert!(!e.tags.is_empty());
        }
        prop_assert!(a.spanner.edges().all(|(_, _, e)| e.tags.is_skeleton() || e.tags == Tags::SINGLE_SINK));
    }

    #[test]
    fn fault_tolerant_stretch(ms in space(14, 2), k in 0usize..3, eps in 0.05f64..0.49) {
        let k = k.min(ms.len() - 2);
        let s = build_construction(&ms, &BuildConfig::new(eps, k, 2)).unwrap().spanner;
        let r = ftspanner::verify::fault_stretch(&s, &ms, k, 1.0 + eps, ftspanner::verify::FaultMode::Exhaustive, &[]);
        prop_assert!(r.violations.is_empty(), "{:?}", r.violations.first());
    }
}
