//! Command line behaviour: exit codes, outputs and file round trips.

use std::fs;
use std::path::PathBuf;

use kisin_core::variety::HodgeType;
use kisin_core::{Field, Fq, LaurentSeries, SeriesMatrix};
use kisin_tools::cli::{figure_files, run};
use kisin_tools::error::ToolError;
use kisin_tools::format::ModuleFile;
use proptest::prelude::*;

fn data(name: &str) -> String {
    concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/").to_string() + name
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("kisin-cli-{}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn kisin(args: &[&str]) -> (i32, String, String) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = run(std::iter::once("kisin").chain(args.iter().copied()), &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

#[test]
fn analyze_reports_slopes() {
    let (code, out, _) = kisin(&["analyze", "--input", &data("antidiagonal.km")]);
    assert_eq!(code, 0);
    assert!(out.contains("semistable, slope 1/2"), "{out}");
    let (code, out, _) = kisin(&["hn", "--input", &data("split.km")]);
    assert_eq!(code, 0, "{out}");
}

#[test]
fn help_and_usage_errors() {
    assert_eq!(kisin(&["--help"]).0, 0);
    assert_eq!(kisin(&["no-such-command"]).0, 1);
    assert_eq!(kisin(&["--jobs", "0", "hn", "--input", &data("split.km")]).0, 1);
    let (code, _, err) = kisin(&["hn", "--input", "/nonexistent/file.km"]);
    assert_eq!(code, 1);
    assert!(err.starts_with("error: "));
}

#[test]
fn malformed_input_exits_with_parse_code() {
    let path = scratch("bad.km");
    fs::write(&path, "p = 2\nA = [[1, u], [u]]\n").unwrap();
    assert_eq!(kisin(&["hn", "--input", path.to_str().unwrap()]).0, 2);
    fs::write(&path, "p = 4\nA = [[1]]\n").unwrap();
    assert_eq!(kisin(&["analyze", "--input", path.to_str().unwrap()]).0, 2);
}

#[test]
fn uncertified_precision_exits_with_precision_code() {
    let path = scratch("coarse.km");
    fs::write(&path, "p = 2\nprecision = 1\nA = [[1, u], [u, 1]]\n").unwrap();
    let (code, _, err) = kisin(&["hn", "--input", path.to_str().unwrap()]);
    assert_eq!(code, 3, "{err}");
    assert!(err.contains("hint:"));
}

#[test]
fn property_failures_map_to_four() {
    assert_eq!(ToolError::Property("x".into()).exit_code(), 4);
}

#[test]
fn jobs_flag_gives_identical_output() {
    let plain = kisin(&["variety", "--input", &data("identity.km"), "--nu", "0,1"]);
    let pooled = kisin(&["--jobs", "2", "variety", "--input", &data("identity.km"), "--nu", "0,1"]);
    assert_eq!(plain.0, 0);
    assert_eq!(plain, pooled);
}

#[test]
fn figures_are_deterministic() {
    let dir = scratch("figs");
    let written = || {
        assert_eq!(kisin(&["figures", "--nu", "0,0,1", "--out-dir", dir.to_str().unwrap()]).0, 0);
        let csv = fs::read_dir(&dir).unwrap().map(|e| e.unwrap().path()).find(|p| p.extension().is_some_and(|x| x == "csv")).unwrap();
        fs::read_to_string(csv).unwrap()
    };
    let first = written();
    assert_eq!(first, written());
    let (csv, svg) = figure_files(&HodgeType::new(vec![0, 0, 1])).unwrap();
    assert_eq!(first, csv);
    assert!(svg.starts_with("<svg") || svg.starts_with("<?xml"));
}

fn matrix(field: &Field, n: usize, raw: &[u16]) -> SeriesMatrix {
    let q = field.size() as u16;
    SeriesMatrix::from_fn(field, n, n, |i, j| {
        let c = &raw[(i * n + j) * 3..(i * n + j + 1) * 3];
        LaurentSeries::from_coeffs(0, c.iter().map(|&x| Fq(x % q)).collect(), i64::MAX / 4)
    })
}

proptest! {
    #[test]
    fn module_files_round_trip(size in prop::sample::select(vec![2u32, 3, 4, 5]), n in 1usize..4, raw in prop::collection::vec(0u16..64, 27)) {
        let field = Field::with_size(size).unwrap();
        let a = matrix(&field, n, &raw);
        prop_assume!(kisin_core::smith::elementary_divisors(&a).is_ok());
        let file = ModuleFile { field: field.clone(), e: 1, precision: None, a, g: None };
        let text = file.to_text();
        let back = ModuleFile::parse(&text).unwrap();
        prop_assert_eq!(&back.a, &file.a);
        prop_assert_eq!(back.to_text(), text);
    }
}
