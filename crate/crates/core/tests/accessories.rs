//! Accessory channels, concatenation and perimeter feedback.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use dendrite::accessory::{perimeter_feedback, Perimeter, PERIMETER_CHANNEL};
use dendrite::dsl;
use dendrite::presets::{smooth, upright};
use dendrite::{
    concatenate, evaluate_accessories, AccessoryFn, AccessoryKind, AccessorySet, BranchPointSet, DecoratedTree,
    DerivativeCoords, EnhancedTree, ForkSchedule, Pose, SGrid, ScalarFn, TreeSpec,
};

fn hybrid_program() -> dsl::TreeProgram {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../programs/golden_hybrid.ftree");
    dsl::parse(&fs::read_to_string(path).unwrap()).unwrap()
}

/// Edge index of the all-first-child branch at generation `g`.
fn spine(d: &DecoratedTree, g: usize) -> usize {
    d.tree
        .edges
        .iter()
        .position(|e| e.child_id.generation() == g && e.child_id.digits().iter().all(|&x| x == 0))
        .unwrap()
}

#[test]
fn derivative_channel_is_continuous_across_the_junction() {
    let program = hybrid_program();
    let hybrid = dsl::compile(&program).unwrap();
    let d = evaluate_accessories(&hybrid, &BTreeMap::new()).unwrap();
    let ds: f64 = 1e-3;
    // width' = -0.3 width from 0.05: the left sum after k steps is 0.05 (1 - 0.3 ds)^k
    let oracle = |k: usize| 0.05 * (1.0 - 0.3 * ds).powi(k as i32);
    let width = &d.channels["width"];
    for g in 1..=8 {
        let e = spine(&d, g);
        let edge = &d.tree.edges[e];
        for j in 0..edge.polyline.len() {
            let k = edge.start_index + j;
            let got = width.value(e, j, 0);
            assert!((got - oracle(k)).abs() <= 1e-12, "sample {k}: {got} vs {}", oracle(k));
        }
    }
    // the junction sits at s = 4 between generations 4 and 5
    let (before, after) = (spine(&d, 4), spine(&d, 5));
    assert_eq!(d.tree.edges[after].start_index, 4000);
    let last = width.per_edge[before].last().unwrap();
    let first = width.per_edge[after][0];
    assert!((last - first).abs() <= 1e-9);

    let junction = &hybrid.junctions[0];
    assert_eq!(junction.index, 4000);
    assert!((junction.constants["width"] - oracle(4000)).abs() <= 1e-9);

    // the first tree on its own ends where the hybrid crosses the junction
    let koch = dsl::compile_named(&program, "koch", &Default::default()).unwrap();
    let dk = evaluate_accessories(&koch, &BTreeMap::new()).unwrap();
    let alone = dk.channels["width"].per_edge[spine(&dk, 4)].last().copied().unwrap();
    assert!((alone - last).abs() <= 1e-9);
}

#[test]
fn absolute_color_steps_at_the_junction() {
    let d = evaluate_accessories(&dsl::compile(&hybrid_program()).unwrap(), &BTreeMap::new()).unwrap();
    let color = &d.channels["color"];
    let e = spine(&d, 4);
    let n = d.tree.edges[e].polyline.len();
    let at = |j: usize| [color.value(e, j, 0), color.value(e, j, 1), color.value(e, j, 2)];
    // sample 3999 still belongs to the first tree, 4000 to the second
    assert_eq!(at(n - 2), [0.9, 0.5, 0.1]);
    assert_eq!(at(n - 1), [0.1, 0.4, 0.9]);
}

fn small(turn: f64, ratio: f64) -> EnhancedTree {
    let grid = SGrid::new(0.0, 2.0, 0.01).unwrap();
    let coords = DerivativeCoords::new(
        grid,
        ScalarFn::from_fn(&grid, |s| ratio.powf(s)),
        vec![ScalarFn::Constant(turn)],
    )
    .unwrap();
    let b = BranchPointSet::every(&grid, 1.0, 0.0).unwrap();
    let spec = TreeSpec::new(coords, vec![b], ForkSchedule::binary(), 2).unwrap();
    let width = AccessoryFn::scalar("width", AccessoryKind::Derivative, ScalarFn::Constant(-turn));
    let acc = AccessorySet::new().with(width).unwrap();
    EnhancedTree::new(spec, acc, upright())
}

#[test]
fn concatenation_is_associative() {
    let (a, b, c) = (small(0.4, 0.9), small(1.1, 0.7), small(0.2, 0.8));
    let left = concatenate(&concatenate(&a, &b).unwrap(), &c).unwrap();
    let right = concatenate(&a, &concatenate(&b, &c).unwrap()).unwrap();
    let (dl, dr) = (
        evaluate_accessories(&left, &BTreeMap::new()).unwrap(),
        evaluate_accessories(&right, &BTreeMap::new()).unwrap(),
    );
    assert_eq!(dl.tree.nodes.len(), dr.tree.nodes.len());
    assert_eq!(dl.tree.nodes.len(), 2 + 4 + 8 + 16 + 32 + 64);
    for (x, y) in dl.tree.nodes.iter().zip(&dr.tree.nodes) {
        assert_eq!(x.id, y.id);
        for (p, q) in x.position.iter().zip(&y.position) {
            assert!((p - q).abs() < 1e-9);
        }
    }
    for (x, y) in dl.channels["width"].per_edge.iter().zip(&dr.channels["width"].per_edge) {
        for (p, q) in x.iter().zip(y) {
            assert!((p - q).abs() < 1e-9);
        }
    }
}

fn outside(d: &DecoratedTree, p: &Perimeter) -> usize {
    d.tree
        .edges
        .iter()
        .flat_map(|e| &e.polyline.points)
        .filter(|q| !p.contains([q[0], q[1]]))
        .count()
}

#[test]
fn perimeter_feedback_keeps_branches_inside() {
    let tree = EnhancedTree::bare(smooth(1e-3, 8).unwrap(), upright());
    let square = || Perimeter::new(vec![[-1.6, -0.5], [1.6, -0.5], [1.6, 2.2], [-1.6, 2.2]]).unwrap();
    let free = evaluate_accessories(&tree, &BTreeMap::new()).unwrap();
    assert!(outside(&free, &square()) > 0, "the free tree should cross the square");

    let steered = perimeter_feedback(&tree, square(), 40.0, 0.1).unwrap();
    let d = evaluate_accessories(&steered, &BTreeMap::new()).unwrap();
    assert_eq!(outside(&d, &square()), 0);
    let dist = &d.channels[PERIMETER_CHANNEL];
    assert!(dist.per_edge.iter().flatten().all(|v| *v > 0.0));
    // steering changes geometry only, not the topology
    assert_eq!(d.tree.nodes.len(), free.tree.nodes.len());
}

#[test]
fn perimeter_needs_a_planar_tree() {
    let grid = SGrid::new(0.0, 1.0, 0.1).unwrap();
    let coords = DerivativeCoords::constant(grid, 1.0, &[0.1, 0.1]).unwrap();
    let t = EnhancedTree::bare(TreeSpec::path(coords), Pose::origin(3));
    let p = Perimeter::circle([0.0, 0.0], 1.0, 16).unwrap();
    assert!(perimeter_feedback(&t, p, 1.0, 0.1).is_err());
}
