//! The shipped programs and the invalid fixtures.

use std::fs;
use std::path::{Path, PathBuf};

use dendrite::dsl::{self, CompileOptions};
use dendrite::presets;
use dendrite::tree::{classify_self_similarity, Classification, DEFAULT_TOLERANCE};

fn programs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../programs")
}

fn ftree_files(dir: &Path) -> Vec<PathBuf> {
    let mut v: Vec<PathBuf> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "ftree"))
        .collect();
    v.sort();
    v
}

fn read(name: &str) -> String {
    fs::read_to_string(programs_dir().join(name)).unwrap()
}

#[test]
fn every_program_is_a_format_fixed_point() {
    let files = ftree_files(&programs_dir());
    assert!(files.len() >= 6);
    for f in files {
        let src = fs::read_to_string(&f).unwrap();
        let once = dsl::format(&dsl::parse(&src).unwrap_or_else(|e| panic!("{}: {e}", f.display())));
        let twice = dsl::format(&dsl::parse(&once).unwrap());
        assert_eq!(once, twice, "{}", f.display());
        // shipped files are kept in canonical layout
        assert_eq!(src, once, "{} is not formatted", f.display());
    }
}

#[test]
fn comments_survive_formatting() {
    let src = read("smooth_pi3.ftree");
    let out = dsl::format(&dsl::parse(&src).unwrap());
    assert!(out.contains("# (2/3)^s scaled so that the sampled first branch has length 1"));
    assert!(out.starts_with("# Smooth fractal"));
}

#[test]
fn smooth_program_matches_the_preset() {
    let tree = dsl::compile(&dsl::parse(&read("smooth_pi3.ftree")).unwrap()).unwrap();
    let preset = presets::smooth(1e-3, 8).unwrap();
    let (a, b) = (tree.spec.coords(), preset.coords());
    assert_eq!(a.grid().count(), b.grid().count());
    for (x, y) in a.radial_samples().iter().zip(b.radial_samples()) {
        assert!((x - y).abs() < 1e-9, "{x} vs {y}");
    }
    assert_eq!(tree.spec.all_branch_points(), preset.all_branch_points());
    let r = classify_self_similarity(&tree.spec, DEFAULT_TOLERANCE).unwrap();
    assert_eq!(r.classification, Classification::ExactFractal);
    assert!((r.rho.unwrap() - 2.0 / 3.0).abs() < 1e-9);
}

#[test]
fn arbitrary_program_is_not_fractal() {
    let tree = dsl::compile(&dsl::parse(&read("arbitrary_branches.ftree")).unwrap()).unwrap();
    let r = classify_self_similarity(&tree.spec, DEFAULT_TOLERANCE).unwrap();
    assert_eq!(r.classification, Classification::NonFractal);
}

#[test]
fn delta_s_override_changes_the_grid_only() {
    let program = dsl::parse(&read("straight_pi3.ftree")).unwrap();
    let coarse = dsl::compile_with(&program, &CompileOptions { delta_s: Some(0.01) }).unwrap();
    assert_eq!(coarse.spec.coords().grid().count(), 801);
    let r = classify_self_similarity(&coarse.spec, DEFAULT_TOLERANCE).unwrap();
    assert_eq!(r.classification, Classification::ExactFractal);
}

#[test]
fn higher_dimensional_programs_compile() {
    let spatial = dsl::compile(&dsl::parse(&read("spatial.ftree")).unwrap()).unwrap();
    assert_eq!(spatial.dim(), 3);
    let hyper = dsl::compile(&dsl::parse(&read("hyper4d.ftree")).unwrap()).unwrap();
    assert_eq!(hyper.dim(), 4);
    // forks [3 | 2]: three children first, binary afterwards
    assert_eq!(hyper.spec.forks().arity_at(0), 3);
    assert_eq!(hyper.spec.forks().arity_at(5), 2);
}

/// (file, line, fragment of the message); lines read off the fixtures.
const FIXTURES: &[(&str, usize, &str)] = &[
    ("division_by_zero.ftree", 3, "division by zero"),
    ("negative_radial.ftree", 3, "non-negative"),
    ("recursive.ftree", 5, "itself"),
    ("syntax_error.ftree", 2, "expected `;`"),
    ("unknown_function.ftree", 4, "sinh"),
    ("unknown_identifier.ftree", 4, "twist"),
    ("wrong_dimension.ftree", 5, "dpsi"),
];

#[test]
fn every_invalid_fixture_gets_a_positioned_diagnostic() {
    let dir = programs_dir().join("invalid");
    let files = ftree_files(&dir);
    assert_eq!(files.len(), FIXTURES.len(), "fixture table out of date");
    for (name, line, fragment) in FIXTURES {
        let src = fs::read_to_string(dir.join(name)).unwrap();
        let diag = match dsl::parse(&src) {
            Err(d) => d.0.into_iter().next().unwrap(),
            Ok(p) => dsl::compile(&p)
                .err()
                .unwrap_or_else(|| panic!("{name} compiled"))
                .to_diagnostic(&src)
                .unwrap_or_else(|| panic!("{name}: error without a position")),
        };
        assert_eq!(diag.line, *line, "{name}: {diag}");
        assert!(diag.column >= 1);
        assert!(diag.message.contains(fragment), "{name}: {}", diag.message);
        let rendered = diag.render(name);
        assert!(rendered.contains(&format!("{name}:{line}:")), "{rendered}");
        assert!(rendered.contains('^'));
    }
}

#[test]
fn several_errors_are_reported_together() {
    let src = "tree t {\n    domain: [0, 1];\n    dr: foo;\n    dphi: bar(s);\n}\n";
    let diags = dsl::parse(src).unwrap_err().0;
    assert_eq!(diags.len(), 2);
    assert_eq!((diags[0].line, diags[1].line), (3, 4));
}
