//! Acceptance suite: one line per criterion, PASS or FAIL, with the measured
//! numbers. Run with
//!
//! ```text
//! cargo test -p dendrite-cli --test acceptance -- --nocapture
//! ```

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, PI};
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use dendrite::dsl::{self, CompileOptions};
use dendrite::export::{to_stl, to_svg, RadiusSource, TubeParams};
use dendrite::presets::{smooth, straight, upright, RATIO};
use dendrite::tree::{
    box_dimension, classify_self_similarity, default_box_scales, estimate_box_dimension, Classification, EvalOptions,
    DEFAULT_TOLERANCE,
};
use dendrite::{
    bounding_radius, compare_canopies, derive_path, evaluate_accessories, evaluate_tree, evaluate_via_transform_stack,
    integrate_path, AccessoryKind, BranchPointSet, DecoratedTree, DerivativeCoords, EvaluatedTree, ForkSchedule, Pose,
    SGrid, TreeError, TreeSpec,
};
use dendrite_cli::{bench_backends, CliError};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn repo() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn read_program(name: &str) -> String {
    fs::read_to_string(repo().join("programs").join(name)).unwrap()
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn max_node_gap(a: &EvaluatedTree, b: &EvaluatedTree) -> f64 {
    if a.nodes.len() != b.nodes.len() {
        return f64::INFINITY;
    }
    a.nodes
        .iter()
        .zip(&b.nodes)
        .flat_map(|(x, y)| x.position.iter().zip(&y.position).map(|(p, q)| (p - q).abs()))
        .fold(0.0, f64::max)
}

fn circle_error(ds: f64) -> f64 {
    let grid = SGrid::new(0.0, 2.0, ds).unwrap();
    let coords = DerivativeCoords::constant(grid, 1.0, &[FRAC_PI_2]).unwrap();
    let line = integrate_path(&coords, &Pose::origin(2)).unwrap();
    let end = line.points.last().unwrap();
    end[0].hypot(end[1] - 4.0 / PI)
}

fn c1_riemann_convergence() -> Outcome {
    let t0 = Instant::now();
    let e1 = circle_error(1e-4);
    let elapsed = t0.elapsed().as_secs_f64();
    let e2 = circle_error(5e-5);
    check(
        e1 < 1e-3 && e2 <= e1 / 2.0 && elapsed < 1.0,
        format!(
            "error {e1:.3e} at ds=1e-4, {e2:.3e} at ds=5e-5 (ratio {:.4}), {elapsed:.3}s",
            e2 / e1
        ),
    )
}

fn round_trip_rms(f: &dyn Fn(f64) -> Vec<f64>, s0: f64, s1: f64) -> f64 {
    let grid = SGrid::new(s0, s1, 1e-3).unwrap();
    let samples: Vec<Vec<f64>> = grid.samples().map(f).collect();
    let (coords, start) = derive_path(&samples, &grid, samples[0].len()).unwrap();
    let line = integrate_path(&coords, &start).unwrap();
    let sum: f64 = line
        .points
        .iter()
        .zip(&samples)
        .map(|(p, q)| p.iter().zip(q).map(|(a, b)| (a - b).powi(2)).sum::<f64>())
        .sum();
    (sum / samples.len() as f64).sqrt()
}

fn c2_round_trip() -> Outcome {
    let line = round_trip_rms(&|s| vec![1.0 + 2.0 * s, 0.5 - s], 0.0, 2.0);
    let circle = round_trip_rms(&|s| vec![s.cos(), s.sin()], 0.0, 2.0 * PI);
    let parabola = round_trip_rms(&|s| vec![s, s * s], -1.0, 1.0);
    check(
        line < 1e-3 && circle < 1e-3 && parabola < 1e-3,
        format!("rms line {line:.2e}, circle {circle:.2e}, parabola {parabola:.2e}"),
    )
}

fn c3_oracle_equivalence() -> Outcome {
    let mut detail = Vec::new();
    let mut ok = true;
    for (name, spec) in [
        ("smooth", smooth(1e-3, 8).unwrap()),
        ("straight", straight(1e-3, 8).unwrap()),
    ] {
        let a = evaluate_tree(&spec, &upright()).unwrap();
        let b = evaluate_via_transform_stack(&spec, &upright()).unwrap();
        let gap = max_node_gap(&a, &b);
        ok &= a.nodes.len() == 510 && gap <= 1e-6;
        detail.push(format!("{name}: {} nodes, max gap {gap:.2e}", a.nodes.len()));
    }
    check(ok, detail.join("; "))
}

fn c4_continuity_symmetry() -> Outcome {
    let t = evaluate_tree(&smooth(1e-3, 8).unwrap(), &upright()).unwrap();
    let mut joint = 0.0f64;
    for (i, e) in t.edges.iter().enumerate() {
        let from = t.parent_position(i);
        for (a, b) in e.polyline.points[0].iter().zip(from) {
            joint = joint.max((a - b).abs());
        }
    }
    // mirror about the root axis x = 0: every node has a twin at (-x, y)
    let mut mirror = 0.0f64;
    for g in 1..=8 {
        let pts: Vec<&[f64]> = t.generation(g).map(|n| n.position.as_slice()).collect();
        for p in &pts {
            let best = pts
                .iter()
                .map(|q| (p[0] + q[0]).abs().max((p[1] - q[1]).abs()))
                .fold(f64::INFINITY, f64::min);
            mirror = mirror.max(best);
        }
    }
    check(
        joint <= 1e-12 && mirror <= 1e-9,
        format!("max joint gap {joint:.2e}, max mirror mismatch {mirror:.2e}"),
    )
}

fn c5_bounding_radius() -> Outcome {
    let spec = smooth(1e-3, 8).unwrap();
    let b = bounding_radius(&spec);
    let t = evaluate_tree(&spec, &upright()).unwrap();
    let far = t
        .edges
        .iter()
        .flat_map(|e| &e.polyline.points)
        .map(|p| p[0].hypot(p[1]))
        .fold(0.0, f64::max);
    check(
        b.extrapolated && (b.radius - 3.0).abs() <= 1e-6 && far <= b.radius,
        format!(
            "bound {:.9} (extrapolated {}), farthest point {far:.6}",
            b.radius, b.extrapolated
        ),
    )
}

fn c6_classification() -> Outcome {
    let spec = smooth(1e-3, 8).unwrap();
    let exact = classify_self_similarity(&spec, DEFAULT_TOLERANCE).unwrap();
    let rho = exact.rho.unwrap_or(f64::NAN);

    let c = spec.coords();
    let grid = *c.grid();
    let mut phi = c.angular_samples(0).to_vec();
    for (k, v) in phi.iter_mut().enumerate() {
        if (3.0..4.0).contains(&grid.s_at(k)) {
            *v += 1e-3;
        }
    }
    let bent = spec
        .with_coords(DerivativeCoords::from_samples(grid, c.radial_samples().to_vec(), vec![phi]).unwrap())
        .unwrap();
    let quasi = classify_self_similarity(&bent, DEFAULT_TOLERANCE).unwrap();

    let b = BranchPointSet::new(&[0.0, 0.7, 1.9, 2.4, 3.8, 4.1, 5.5, 6.2], &grid).unwrap();
    let arbitrary = TreeSpec::new(c.clone(), vec![b], ForkSchedule::binary(), 8).unwrap();
    let non = classify_self_similarity(&arbitrary, DEFAULT_TOLERANCE).unwrap();
    check(
        exact.classification == Classification::ExactFractal
            && (rho - 2.0 / 3.0).abs() <= 1e-9
            && quasi.classification == Classification::QuasiFractal
            && non.classification == Classification::NonFractal,
        format!(
            "{} rho={rho:.12}; perturbed -> {}; arbitrary -> {}",
            exact.classification, quasi.classification, non.classification
        ),
    )
}

fn c7_canopy_equivalence() -> Outcome {
    let ds = 2e-4;
    let t0 = Instant::now();
    let a = evaluate_tree(&smooth(ds, 8).unwrap(), &upright()).unwrap();
    let b = evaluate_tree(&straight(ds, 8).unwrap(), &upright()).unwrap();
    let report = compare_canopies(&a, &b, 8).unwrap();
    let elapsed = t0.elapsed().as_secs_f64();

    let d = &report.per_generation_distance;
    let worst = (1..8)
        .map(|i| ((d[i] / d[0]) / RATIO.powi(i as i32) - 1.0).abs())
        .fold(0.0, f64::max);
    // discretization error of a first-order scheme: twice the change on halving ds
    let (a2, b2) = (
        evaluate_tree(&smooth(ds / 2.0, 8).unwrap(), &upright()).unwrap(),
        evaluate_tree(&straight(ds / 2.0, 8).unwrap(), &upright()).unwrap(),
    );
    let disc = 2.0 * max_node_gap(&a, &a2).max(max_node_gap(&b, &b2));
    check(
        worst <= 0.1 && disc < 0.1 * d[7] && elapsed < 10.0,
        format!(
            "worst relative deviation {:.2}% over generations 2-8, discretization {disc:.2e} vs 0.1*d8 {:.2e}, {elapsed:.2}s",
            worst * 100.0,
            0.1 * d[7]
        ),
    )
}

fn spine(d: &DecoratedTree, g: usize) -> usize {
    d.tree
        .edges
        .iter()
        .position(|e| e.child_id.generation() == g && e.child_id.digits().iter().all(|&x| x == 0))
        .unwrap()
}

fn c8_concatenation() -> Outcome {
    let program = dsl::parse(&read_program("golden_hybrid.ftree")).unwrap();
    let hybrid = dsl::compile(&program).unwrap();
    let d = evaluate_accessories(&hybrid, &BTreeMap::new()).unwrap();
    let j = hybrid.junctions[0].index;
    let (before, after) = (spine(&d, 4), spine(&d, 5));
    let (eb, ea) = (&d.tree.edges[before], &d.tree.edges[after]);
    if ea.start_index != j {
        return Err(format!(
            "junction at {j} but the second part starts at {}",
            ea.start_index
        ));
    }
    let mut gap = 0.0f64;
    for ch in d.channels.values() {
        if ch.kind == AccessoryKind::Derivative {
            let last = &ch.per_edge[before][ch.per_edge[before].len() - ch.arity..];
            for (c, v) in last.iter().enumerate() {
                gap = gap.max((v - ch.value(after, 0, c)).abs());
            }
        }
    }
    // the coordinates' own primitives: position, heading, arc length
    let pl = eb.polyline.len() - 1;
    for (p, q) in eb.polyline.points[pl].iter().zip(&ea.polyline.points[0]) {
        gap = gap.max((p - q).abs());
    }
    for (p, q) in eb.polyline.headings[pl].iter().zip(&ea.polyline.headings[0]) {
        gap = gap.max((p - q).abs());
    }
    gap = gap.max((eb.polyline.cum_arc[pl] - ea.polyline.cum_arc[0]).abs());

    let color = &d.channels["color"];
    let n = eb.polyline.len();
    let rgb = |j: usize| {
        [
            color.value(before, j, 0),
            color.value(before, j, 1),
            color.value(before, j, 2),
        ]
    };
    let (c0, c1) = (rgb(n - 2), rgb(n - 1));
    check(
        gap <= 1e-9 && c0 == [0.9, 0.5, 0.1] && c1 == [0.1, 0.4, 0.9],
        format!("max primitive jump {gap:.2e}; color {c0:?} -> {c1:?} across the junction"),
    )
}

fn c9_box_dimension() -> Outcome {
    // sets kept just inside [0, 1) so no point sits on a box boundary
    let scales: Vec<f64> = (3..=8).map(|k| 0.5f64.powi(k)).collect();
    let side = 0.999;
    let segment = vec![vec![0.0, 0.0], vec![side, 0.0]];
    let d_seg = box_dimension(&[&segment], &scales).unwrap();
    let rows: Vec<Vec<Vec<f64>>> = (0..=1000)
        .map(|i| {
            let y = side * i as f64 / 1000.0;
            vec![vec![0.0, y], vec![side, y]]
        })
        .collect();
    let refs: Vec<&[Vec<f64>]> = rows.iter().map(|r| r.as_slice()).collect();
    let d_sq = box_dimension(&refs, &scales).unwrap();
    let t = evaluate_tree(&smooth(1e-3, 8).unwrap(), &upright()).unwrap();
    let d_tree = estimate_box_dimension(&t, &default_box_scales(&t, 8)).unwrap();
    check(
        (d_seg - 1.0).abs() <= 0.1 && (d_sq - 2.0).abs() <= 0.1 && d_tree > 1.1 && d_tree < 2.0,
        format!("segment {d_seg:.4}, dense square {d_sq:.4}, tree {d_tree:.4}"),
    )
}

fn c10_dsl() -> Outcome {
    let dir = repo().join("programs");
    let mut names: Vec<PathBuf> = fs::read_dir(&dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "ftree"))
        .collect();
    names.sort();
    let mut idempotent = 0;
    for p in &names {
        let src = fs::read_to_string(p).unwrap();
        let Ok(parsed) = dsl::parse(&src) else {
            return Err(format!("{} does not parse", p.display()));
        };
        let once = dsl::format(&parsed);
        if dsl::parse(&once).map(|q| dsl::format(&q)).as_deref() == Ok(once.as_str()) {
            idempotent += 1;
        }
    }
    let smooth = dsl::compile(&dsl::parse(&read_program("smooth_pi3.ftree")).unwrap()).unwrap();
    let r = classify_self_similarity(&smooth.spec, DEFAULT_TOLERANCE).unwrap();
    let rho_ok = r.rho.is_some_and(|x| (x - 2.0 / 3.0).abs() <= 1e-9);

    let mut invalid: Vec<PathBuf> = fs::read_dir(dir.join("invalid"))
        .unwrap()
        .map(|e| e.unwrap().path())
        .collect();
    invalid.sort();
    let mut positioned = 0;
    for p in &invalid {
        let src = fs::read_to_string(p).unwrap();
        let diag = match dsl::parse(&src) {
            Err(d) => d.0.into_iter().next(),
            Ok(prog) => dsl::compile(&prog).err().and_then(|e| e.to_diagnostic(&src)),
        };
        if diag.is_some_and(|d| d.line >= 1 && d.column >= 1) {
            positioned += 1;
        }
    }
    check(
        idempotent == names.len()
            && r.classification == Classification::ExactFractal
            && rho_ok
            && positioned == invalid.len(),
        format!(
            "{idempotent}/{} programs idempotent; smooth -> {} rho={:?}; {positioned}/{} fixtures positioned",
            names.len(),
            r.classification,
            r.rho,
            invalid.len()
        ),
    )
}

fn golden_decorated(program: &str, ds: f64, generations: usize) -> DecoratedTree {
    let p = dsl::parse(&read_program(program)).unwrap();
    let mut t = dsl::compile_with(&p, &CompileOptions { delta_s: Some(ds) }).unwrap();
    t.spec = t.spec.with_max_generations(generations).unwrap();
    evaluate_accessories(&t, &BTreeMap::new()).unwrap()
}

fn c11_export_bit_exactness() -> Outcome {
    let golden = repo().join("crates/core/tests/golden");
    let styles: BTreeMap<String, String> = [("width", "stroke-width"), ("opacity", "stroke-opacity")]
        .into_iter()
        .map(|(a, b)| (a.to_string(), b.to_string()))
        .collect();
    let svg_a = to_svg(&golden_decorated("smooth_pi3.ftree", 0.01, 8), &styles).unwrap();
    let svg_b = to_svg(&golden_decorated("smooth_pi3.ftree", 0.01, 8), &styles).unwrap();
    let svg_ok = svg_a == svg_b && fs::read(golden.join("smooth_pi3.svg")).ok().as_deref() == Some(svg_a.as_bytes());

    let stl = |d: &DecoratedTree| {
        to_stl(
            d,
            &TubeParams {
                radial_segments: 8,
                radius: RadiusSource::Channel("width".into()),
                cap_ends: true,
                tolerance: d.bound * 1e-4,
            },
        )
        .unwrap()
    };
    let stl_a = stl(&golden_decorated("spatial.ftree", 0.05, 3));
    let stl_b = stl(&golden_decorated("spatial.ftree", 0.05, 3));
    let n = u32::from_le_bytes(stl_a[80..84].try_into().unwrap()) as usize;
    let mut worst = 0.0f64;
    for t in 0..n {
        let at = 84 + 50 * t;
        let f = |i: usize| f32::from_le_bytes(stl_a[at + 4 * i..at + 4 * i + 4].try_into().unwrap()) as f64;
        worst = worst.max(((f(0).powi(2) + f(1).powi(2) + f(2).powi(2)).sqrt() - 1.0).abs());
    }
    let stl_ok = stl_a == stl_b
        && fs::read(golden.join("spatial.stl")).ok() == Some(stl_a.clone())
        && stl_a.len() == 84 + 50 * n
        && worst <= 1e-6;
    check(
        svg_ok && stl_ok,
        format!(
            "svg {} bytes identical={svg_ok}; stl {} triangles, {} bytes, max |n|-1 {worst:.1e}, identical={stl_ok}",
            svg_a.len(),
            n,
            stl_a.len()
        ),
    )
}

fn c12_bench_integrity() -> Outcome {
    let spec = smooth(0.01, 8).unwrap();
    let opts = EvalOptions::default();
    let skewed = |s: &TreeSpec, p: &Pose, o: &EvalOptions| -> Result<EvaluatedTree, TreeError> {
        let mut t = dendrite::tree::evaluate_via_transform_stack_with(s, p, o)?;
        t.nodes[100].position[0] += 1e-4;
        Ok(t)
    };
    let refused = matches!(
        bench_backends(&spec, &upright(), &opts, 1, &skewed),
        Err(CliError::Bench(_))
    );
    let honest = bench_backends(
        &spec,
        &upright(),
        &opts,
        1,
        &dendrite::tree::evaluate_via_transform_stack_with,
    );
    match honest {
        Ok(r) => check(
            refused,
            format!(
                "refused on disagreement: {refused}; honest run {} segments, deviation {:.1e}, ratio {:.2} (not asserted)",
                r.segments,
                r.max_deviation,
                r.ratio()
            ),
        ),
        Err(e) => Err(format!("honest run failed: {e}")),
    }
}

#[test]
fn acceptance() {
    let criteria: [Criterion; 12] = [
        ("riemann convergence", c1_riemann_convergence),
        ("round trip", c2_round_trip),
        ("oracle equivalence", c3_oracle_equivalence),
        ("continuity and symmetry", c4_continuity_symmetry),
        ("bounding radius", c5_bounding_radius),
        ("classification", c6_classification),
        ("canopy equivalence", c7_canopy_equivalence),
        ("concatenation continuity", c8_concatenation),
        ("box dimension", c9_box_dimension),
        ("dsl", c10_dsl),
        ("export bit-exactness", c11_export_bit_exactness),
        ("benchmark integrity", c12_bench_integrity),
    ];
    let mut failed = Vec::new();
    for (i, (name, f)) in criteria.iter().enumerate() {
        let outcome = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail}", i + 1),
            Err(detail) => {
                println!("criterion {:>2} FAIL  {name}: {detail}", i + 1);
                failed.push(i + 1);
            }
        }
    }
    assert!(failed.is_empty(), "failing criteria: {failed:?}");
}
