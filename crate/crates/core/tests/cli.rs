mod common;

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use fmdx::cli::occurrence_checksum;
use fmdx::suffix::naive_count;
use fmdx::text::read_patterns;

fn fmdx(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fmdx")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn value<'a>(report: &'a str, key: &str) -> &'a str {
    report
        .lines()
        .find_map(|l| l.strip_prefix(key).and_then(|r| r.strip_prefix('=')))
        .unwrap_or_else(|| panic!("no {key}= in {report}"))
}

struct Fixture {
    _dir: tempfile::TempDir,
    root: PathBuf,
    text: Vec<u8>,
}

impl Fixture {
    fn new(text: Vec<u8>) -> Self {
        let dir = tempfile::tempdir().unwrap();
        let root = dir.path().to_path_buf();
        std::fs::write(root.join("text"), &text).unwrap();
        Self { _dir: dir, root, text }
    }

    fn path(&self, name: &str) -> String {
        self.root.join(name).to_string_lossy().into_owned()
    }
}

fn dna_fixture() -> Fixture {
    Fixture::new(common::uniform_text(20_000, b"ACGT", 1))
}

fn expected_counts(text: &[u8], patterns: &Path) -> Vec<u64> {
    let ps = read_patterns(std::io::BufReader::new(std::fs::File::open(patterns).unwrap())).unwrap();
    ps.iter().map(|p| naive_count(text, p) as u64).collect()
}

#[test]
fn genpat_is_deterministic() {
    let f = dna_fixture();
    let (a, b, c) = (f.path("a"), f.path("b"), f.path("c"));
    for (out, seed) in [(&a, "7"), (&b, "7"), (&c, "8")] {
        let o = fmdx(&["genpat", "--in", &f.path("text"), "--m", "12", "--count", "50", "--seed", seed, "--out", out]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let (a, b, c) = (std::fs::read(a).unwrap(), std::fs::read(b).unwrap(), std::fs::read(c).unwrap());
    assert_eq!(a, b);
    assert_ne!(a, c);
    assert_eq!(a.len(), 50 * 13);
}

#[test]
fn every_variant_counts_like_the_oracle() {
    let f = dna_fixture();
    let pats = f.path("pats");
    assert!(fmdx(&["genpat", "--in", &f.path("text"), "--m", "8", "--count", "200", "--seed", "3", "--acgt", "--out", &pats])
        .status
        .success());
    let want = expected_counts(&f.text, Path::new(&pats));
    let checksum = format!("checksum={:016x}", occurrence_checksum(want.iter().copied()));
    let builds: &[&[&str]] = &[
        &["--variant", "d1"],
        &["--variant", "d1", "--layout", "256", "--counter", "32"],
        &["--variant", "d1", "--layout", "512c", "--hash-k", "5", "--load-factor", "0.8"],
        &["--variant", "d2", "--scbo", "4,2,4,6", "--layout", "256c"],
        &["--variant", "d2cb", "--cb", "3", "--digit-bits", "3"],
        &["--variant", "d3", "--block", "1024", "--prefetch", "on"],
        &["--variant", "d3", "--hash-k", "5"],
        &["--variant", "hwt", "--arity", "2"],
        &["--variant", "hwt", "--arity", "8", "--block", "1024", "--hash-k", "4"],
    ];
    let text = f.path("text");
    for extra in builds {
        let idx = f.path("idx");
        let mut args = vec!["build", "--in", &text, "--out", &idx];
        args.extend_from_slice(extra);
        let o = fmdx(&args);
        assert!(o.status.success(), "{extra:?}: {}", String::from_utf8_lossy(&o.stderr));
        assert_eq!(value(&stdout(&o), "n"), "20000");

        let o = fmdx(&["count", "--idx", &idx, "--patterns", &pats]);
        assert!(o.status.success(), "{extra:?}");
        let out = stdout(&o);
        let got: Vec<u64> = out.lines().take(want.len()).map(|l| l.parse().unwrap()).collect();
        assert_eq!(got, want, "{extra:?}");
        assert_eq!(out.lines().last().unwrap(), checksum, "{extra:?}");

        let o = fmdx(&["bench", "--idx", &idx, "--patterns", &pats, "--repeat", "3"]);
        assert!(o.status.success(), "{extra:?}");
        let report = stdout(&o);
        assert_eq!(format!("checksum={}", value(&report, "checksum")), checksum);
        assert!(value(&report, "ns_per_char").parse::<f64>().unwrap() > 0.0);
        assert_eq!(value(&report, "patterns"), "200");
        assert_eq!(value(&report, "m"), "8");
        assert_eq!(value(&report, "corpus"), "text");
        let bytes: f64 = value(&report, "index_bytes").parse().unwrap();
        let ratio: f64 = value(&report, "bytes_per_n").parse().unwrap();
        assert!((bytes / 20_000.0 - ratio).abs() < 1e-3);
    }
}

#[test]
fn absent_patterns_count_zero() {
    let f = dna_fixture();
    let (idx, pats) = (f.path("idx"), f.path("pats"));
    std::fs::write(&pats, "AAAAAAAAAAAAAAAAAAAAAAAAAAAAAAAAAAAAAAAAAAAAAAAAAA\nxyz\n").unwrap();
    assert!(fmdx(&["build", "--in", &f.path("text"), "--out", &idx, "--variant", "hwt"]).status.success());
    let o = fmdx(&["count", "--idx", &idx, "--patterns", &pats]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), format!("0\n0\nchecksum={:016x}\n", occurrence_checksum([0, 0])));
}

#[test]
fn report_file_lists_every_pattern() {
    let f = Fixture::new(b"abracadabra".to_vec());
    let (idx, pats, report) = (f.path("idx"), f.path("pats"), f.path("report"));
    std::fs::write(&pats, "abra\ncad\nz\n").unwrap();
    assert!(fmdx(&["build", "--in", &f.path("text"), "--out", &idx, "--variant", "d1"]).status.success());
    let o = fmdx(&["count", "--idx", &idx, "--patterns", &pats, "--report", &report]);
    assert!(o.status.success());
    assert_eq!(std::fs::read_to_string(&report).unwrap(), "abra\t2\ncad\t1\nz\t0\n");
    assert_eq!(value(&stdout(&o), "occurrences"), "3");
}

#[test]
fn usage_and_data_errors_have_distinct_codes() {
    let f = dna_fixture();
    let idx = f.path("idx");
    let text = f.path("text");
    let usage: &[&[&str]] = &[
        &["build", "--in", &text, "--out", &idx, "--variant", "d1", "--arity", "4"],
        &["build", "--in", &text, "--out", &idx, "--variant", "d3", "--layout", "256"],
        &["build", "--in", &text, "--out", &idx, "--variant", "d2cb"],
        &["build", "--in", &text, "--out", &idx, "--variant", "d2", "--scbo", "4,2,4"],
        &["build", "--in", &text, "--out", &idx, "--variant", "d2", "--scbo", "4,2,4,5"],
        &["build", "--in", &text, "--out", &idx, "--variant", "d1", "--unknown"],
        &["count", "--idx", &idx],
        &["nonsense"],
    ];
    for args in usage {
        assert_eq!(fmdx(args).status.code(), Some(2), "{args:?}");
    }

    assert_eq!(fmdx(&["build", "--in", &f.path("missing"), "--out", &idx, "--variant", "d1"]).status.code(), Some(3));
    std::fs::write(&idx, b"not an index").unwrap();
    std::fs::write(f.path("pats"), "ACGT\n").unwrap();
    let o = fmdx(&["count", "--idx", &idx, "--patterns", &f.path("pats")]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("bad magic"));

    assert!(fmdx(&["build", "--in", &text, "--out", &idx, "--variant", "d3"]).status.success());
    std::fs::write(f.path("pats"), "ACGN\n").unwrap();
    assert_eq!(fmdx(&["count", "--idx", &idx, "--patterns", &f.path("pats")]).status.code(), Some(3));
    std::fs::write(f.path("pats"), "ACG").unwrap();
    assert_eq!(fmdx(&["count", "--idx", &idx, "--patterns", &f.path("pats")]).status.code(), Some(3));
    std::fs::write(f.path("pats"), "\n").unwrap();
    assert_eq!(fmdx(&["count", "--idx", &idx, "--patterns", &f.path("pats")]).status.code(), Some(3));
    assert_eq!(
        fmdx(&["genpat", "--in", &text, "--m", "30000", "--count", "1", "--seed", "1", "--out", &f.path("p")]).status.code(),
        Some(3)
    );
}

#[test]
fn selftest_passes() {
    let o = fmdx(&["selftest"]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(!stdout(&o).contains("FAIL"));
}

#[test]
fn help_exits_zero() {
    assert_eq!(fmdx(&["--help"]).status.code(), Some(0));
    assert_eq!(fmdx(&["build", "--help"]).status.code(), Some(0));
}
