//! Byte-for-byte comparisons against checked-in renders.
//!
//! Run with `UPDATE_GOLDEN=1` to rewrite the files after an intended change.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use dendrite::dsl::{self, CompileOptions};
use dendrite::export::{from_json, to_json, to_stl, to_svg, RadiusSource, TubeParams, STL_HEADER};
use dendrite::{evaluate_accessories, DecoratedTree};

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).to_path_buf()
}

fn decorated(program: &str, ds: f64, generations: usize) -> DecoratedTree {
    let src = fs::read_to_string(root().join("../../programs").join(program)).unwrap();
    let p = dsl::parse(&src).unwrap();
    let mut t = dsl::compile_with(&p, &CompileOptions { delta_s: Some(ds) }).unwrap();
    t.spec = t.spec.with_max_generations(generations).unwrap();
    evaluate_accessories(&t, &BTreeMap::new()).unwrap()
}

fn check(name: &str, bytes: &[u8]) {
    let path = root().join("tests/golden").join(name);
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        fs::write(&path, bytes).unwrap();
        return;
    }
    let want = fs::read(&path).unwrap_or_else(|e| panic!("{}: {e}; run with UPDATE_GOLDEN=1", path.display()));
    assert!(
        want == bytes,
        "{name} differs from the golden file ({} vs {} bytes)",
        bytes.len(),
        want.len()
    );
}

fn smooth_svg() -> String {
    let d = decorated("smooth_pi3.ftree", 0.01, 8);
    let styles: BTreeMap<String, String> = [("width", "stroke-width"), ("opacity", "stroke-opacity")]
        .into_iter()
        .map(|(a, b)| (a.to_string(), b.to_string()))
        .collect();
    to_svg(&d, &styles).unwrap()
}

fn spatial_stl() -> Vec<u8> {
    let d = decorated("spatial.ftree", 0.05, 3);
    let params = TubeParams {
        radial_segments: 8,
        radius: RadiusSource::Channel("width".into()),
        cap_ends: true,
        tolerance: d.bound * 1e-4,
    };
    to_stl(&d, &params).unwrap()
}

#[test]
fn smooth_svg_matches_golden() {
    let svg = smooth_svg();
    assert_eq!(svg, smooth_svg(), "two renders differ");
    assert!(svg.starts_with("<?xml") || svg.starts_with("<svg"));
    assert_eq!(svg.matches("<path").count(), 510);
    check("smooth_pi3.svg", svg.as_bytes());
}

#[test]
fn spatial_stl_matches_golden() {
    let stl = spatial_stl();
    assert_eq!(stl, spatial_stl(), "two renders differ");
    assert_eq!(&stl[..STL_HEADER.len()], STL_HEADER);
    let n = u32::from_le_bytes(stl[80..84].try_into().unwrap()) as usize;
    assert_eq!(stl.len(), 84 + 50 * n);
    for t in 0..n {
        let at = 84 + 50 * t;
        let f = |i: usize| f32::from_le_bytes(stl[at + 4 * i..at + 4 * i + 4].try_into().unwrap()) as f64;
        let norm = (f(0).powi(2) + f(1).powi(2) + f(2).powi(2)).sqrt();
        assert!((norm - 1.0).abs() < 1e-6, "facet {t}: |n| = {norm}");
    }
    check("spatial.stl", &stl);
}

#[test]
fn straight_json_matches_golden_and_reads_back() {
    let d = decorated("straight_pi3.ftree", 0.05, 3);
    let text = to_json(&d);
    assert_eq!(from_json(&text).unwrap(), d);
    check("straight_pi3.json", text.as_bytes());
}
