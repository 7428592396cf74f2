//! Property tests over randomly drawn rates, trees and programs.

use std::collections::BTreeMap;

use dendrite::dsl;
use dendrite::export::{from_json, simplify_indices, to_json};
use dendrite::{
    evaluate_accessories, evaluate_tree, evaluate_via_transform_stack, integrate_path, resample, turn_angle,
    BranchPointSet, DerivativeCoords, EnhancedTree, ForkSchedule, Pose, SGrid, ScalarFn, TreeSpec,
};
use num_complex::Complex64;
use proptest::prelude::*;

fn tree(turn: f64, ratio: f64, generations: usize, arity: usize, ds: f64) -> TreeSpec {
    let grid = SGrid::new(0.0, generations as f64, ds).unwrap();
    let coords = DerivativeCoords::new(
        grid,
        ScalarFn::from_fn(&grid, |s| ratio.powf(s.floor())),
        vec![ScalarFn::Constant(turn)],
    )
    .unwrap();
    let b = BranchPointSet::every(&grid, 1.0, 0.0).unwrap();
    TreeSpec::new(coords, vec![b], ForkSchedule::cycle(vec![arity]).unwrap(), generations).unwrap()
}

fn up() -> Pose {
    Pose::new(vec![0.0, 0.0], vec![std::f64::consts::FRAC_PI_2])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn constant_rates_trace_the_geometric_sum(
        r in 0.1f64..3.0, omega in -4.0f64..4.0, theta0 in -3.0f64..3.0, steps in 1usize..400
    ) {
        let ds = 0.01;
        let grid = SGrid::from_count(0.0, ds, steps + 1).unwrap();
        let coords = DerivativeCoords::constant(grid, r, &[omega]).unwrap();
        let line = integrate_path(&coords, &Pose::new(vec![0.0, 0.0], vec![theta0])).unwrap();
        let mut z = Complex64::new(0.0, 0.0);
        for k in 1..=steps {
            z += Complex64::from_polar(r * ds, theta0 + omega * ds * k as f64);
        }
        let end = line.points.last().unwrap();
        prop_assert!((end[0] - z.re).abs() < 1e-9 && (end[1] - z.im).abs() < 1e-9);
        prop_assert!((line.cum_arc.last().unwrap() - r * ds * steps as f64).abs() < 1e-9);
    }

    #[test]
    fn trees_are_connected_and_counted(
        turn in -2.0f64..2.0, ratio in 0.3f64..0.95, generations in 1usize..5, arity in 2usize..4
    ) {
        let spec = tree(turn, ratio, generations, arity, 0.02);
        let t = evaluate_tree(&spec, &up()).unwrap();
        let want: usize = (1..=generations as u32).map(|g| arity.pow(g)).sum();
        prop_assert_eq!(t.nodes.len(), want);
        prop_assert_eq!(t.nodes.len() as u128, spec.node_count());
        let samples: usize = t.edges.iter().map(|e| e.polyline.len()).sum();
        prop_assert_eq!(samples as u128, spec.sample_count());
        for (i, e) in t.edges.iter().enumerate() {
            prop_assert_eq!(&e.polyline.points[0], &t.parent_position(i).to_vec());
        }
    }

    #[test]
    fn binary_trees_are_mirror_symmetric(turn in 0.05f64..2.0, ratio in 0.3f64..0.95, generations in 1usize..6) {
        let t = evaluate_tree(&tree(turn, ratio, generations, 2, 0.01), &up()).unwrap();
        for g in 1..=generations {
            let pts: Vec<(f64, f64)> = t.generation(g).map(|n| (n.position[0], n.position[1])).collect();
            for &(x, y) in &pts {
                let twin = pts.iter().any(|&(u, v)| (u + x).abs() < 1e-9 && (v - y).abs() < 1e-9);
                prop_assert!(twin, "no mirror image of ({}, {}) in generation {}", x, y, g);
            }
        }
    }

    #[test]
    fn transform_stack_matches_accumulation(turn in -2.0f64..2.0, ratio in 0.3f64..0.95, generations in 1usize..5) {
        let spec = tree(turn, ratio, generations, 2, 0.01);
        let a = evaluate_tree(&spec, &up()).unwrap();
        let b = evaluate_via_transform_stack(&spec, &up()).unwrap();
        for (x, y) in a.nodes.iter().zip(&b.nodes) {
            for (p, q) in x.position.iter().zip(&y.position) {
                prop_assert!((p - q).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn resampling_keeps_turns_between_branch_points(a in -3.0f64..3.0, w in 0.5f64..6.0, coarse in 2usize..6) {
        let spec = tree(0.0, 0.8, 3, 2, 0.005);
        let grid = *spec.coords().grid();
        let coords = DerivativeCoords::new(
            grid,
            ScalarFn::Constant(1.0),
            vec![ScalarFn::from_fn(&grid, |s| a * (w * s).sin())],
        ).unwrap();
        let spec = spec.with_coords(coords).unwrap();
        let re = spec.resample(0.005 * coarse as f64).unwrap();
        for k in 0..3 {
            let (s0, s1) = (k as f64, k as f64 + 1.0);
            let before = turn_angle(spec.coords(), s0, s1).unwrap();
            let after = turn_angle(re.coords(), s0, s1).unwrap();
            prop_assert!((before - after).abs() < 1e-9, "{} vs {}", before, after);
        }
        let whole = resample(spec.coords(), 0.02).unwrap();
        prop_assert!((turn_angle(&whole, 0.0, 3.0).unwrap() - turn_angle(spec.coords(), 0.0, 3.0).unwrap()).abs() < 1e-9);
    }

    #[test]
    fn json_reads_back_what_it_wrote(turn in -2.0f64..2.0, ratio in 0.3f64..0.95, generations in 1usize..4) {
        let t = EnhancedTree::bare(tree(turn, ratio, generations, 2, 0.05), up());
        let d = evaluate_accessories(&t, &BTreeMap::new()).unwrap();
        prop_assert_eq!(from_json(&to_json(&d)).unwrap(), d);
    }

    #[test]
    fn simplified_polylines_stay_within_tolerance(
        ys in proptest::collection::vec(-1.0f64..1.0, 2..60), tol in 0.0f64..0.3
    ) {
        let pts: Vec<Vec<f64>> = ys.iter().enumerate().map(|(i, y)| vec![i as f64 * 0.1, *y]).collect();
        let keep = simplify_indices(&pts, tol);
        prop_assert_eq!(keep[0], 0);
        prop_assert_eq!(*keep.last().unwrap(), pts.len() - 1);
        prop_assert!(keep.windows(2).all(|w| w[0] < w[1]));
        for w in keep.windows(2) {
            let (a, b) = (&pts[w[0]], &pts[w[1]]);
            for p in &pts[w[0]..=w[1]] {
                prop_assert!(segment_distance(p, a, b) <= tol + 1e-12);
            }
        }
    }
}

fn segment_distance(p: &[f64], a: &[f64], b: &[f64]) -> f64 {
    let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
    let len2 = dx * dx + dy * dy;
    let t = if len2 == 0.0 {
        0.0
    } else {
        (((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / len2).clamp(0.0, 1.0)
    };
    (p[0] - a[0] - t * dx).hypot(p[1] - a[1] - t * dy)
}

/// Random expressions over `s`, `pi` and a few functions, printed with
/// full parentheses.
fn expr() -> impl Strategy<Value = String> {
    let leaf = prop_oneof![
        (0u32..100).prop_map(|n| format!("{}", n as f64 / 10.0)),
        Just("s".to_string()),
        Just("pi".to_string()),
    ];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            (
                inner.clone(),
                inner.clone(),
                prop_oneof![Just("+"), Just("-"), Just("*"), Just("/")]
            )
                .prop_map(|(a, b, op)| format!("({a} {op} {b})")),
            (inner.clone(), 1u32..4).prop_map(|(a, n)| format!("({a}) ^ {n}")),
            inner.clone().prop_map(|a| format!("-({a})")),
            (inner, prop_oneof![Just("sin"), Just("cos"), Just("abs")]).prop_map(|(a, f)| format!("{f}({a})")),
        ]
    })
}

fn sampled_phi(src: &str) -> Option<Vec<f64>> {
    let p = dsl::parse(src).unwrap();
    dsl::compile(&p)
        .ok()
        .map(|t| t.spec.coords().angular_samples(0).to_vec())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn formatting_preserves_meaning(e in expr()) {
        let src = format!("tree t {{\n    domain: [0, 1];\n    ds: 0.125;\n    dr: 1;\n    dphi: {e};\n}}\n");
        let program = dsl::parse(&src).unwrap();
        let once = dsl::format(&program);
        let twice = dsl::format(&dsl::parse(&once).unwrap());
        prop_assert_eq!(&once, &twice);
        match (sampled_phi(&src), sampled_phi(&once)) {
            (Some(a), Some(b)) => {
                for (x, y) in a.iter().zip(&b) {
                    prop_assert!(x == y || (x - y).abs() <= 1e-12 * x.abs().max(1.0), "{} vs {} in {}", x, y, once);
                }
            }
            (None, None) => {}
            (a, b) => prop_assert!(false, "compile differs: {:?} / {:?}", a.is_some(), b.is_some()),
        }
    }
}
