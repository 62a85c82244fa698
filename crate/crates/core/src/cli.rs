//! Command-line front end.
//!
//! Exit codes: 0 success, 1 selftest failure, 2 usage error, 3 data error.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand_xoshiro::rand_core::{Rng, SeedableRng};
use rand_xoshiro::SplitMix64;

use crate::dense_code::DenseCodeParams;
use crate::dummy3::Dna3Block;
use crate::hash_boost::{fnv1a, DEFAULT_LOAD_FACTOR};
use crate::hwt::HwtBlock;
use crate::index::{Index, IndexConfig, Variant};
use crate::index_io;
use crate::rank::RankLayout;
use crate::suffix::naive_count;
use crate::text::{extract_patterns, load_text, read_patterns, write_patterns, Text};

pub const EXIT_OK: i32 = 0;
pub const EXIT_SELFTEST_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DATA: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "fmdx", version, about = "Cache-conscious FM-index variants for count queries")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build an index file from a text.
    Build(BuildArgs),
    /// Draw random patterns from a text.
    Genpat(GenpatArgs),
    /// Count occurrences of every pattern in a file.
    Count(CountArgs),
    /// Time count queries.
    Bench(BenchArgs),
    /// Check every variant against a naive scan on built-in texts.
    Selftest,
}

#[derive(Args, Debug)]
struct BuildArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_parser = parse_variant)]
    variant: Variant,
    /// Bit-vector block layout (d1, d2, d2cb).
    #[arg(long, value_parser = ["256", "512", "256c", "512c"])]
    layout: Option<String>,
    /// Block counter width for the plain layouts.
    #[arg(long, value_parser = ["32", "64"])]
    counter: Option<String>,
    /// Node arity (hwt).
    #[arg(long, value_parser = ["2", "4", "8"])]
    arity: Option<String>,
    /// SCBDC parameters `s,c,b,o` (d2).
    #[arg(long)]
    scbo: Option<String>,
    /// Number of beginner digits (d2cb).
    #[arg(long)]
    cb: Option<u8>,
    /// Digit width in bits (d2cb).
    #[arg(long = "digit-bits", value_parser = ["3", "4"])]
    digit_bits: Option<String>,
    /// Block size in bits (d3, hwt).
    #[arg(long, value_parser = ["512", "1024"])]
    block: Option<String>,
    /// Gram length of the k-gram table.
    #[arg(long = "hash-k")]
    hash_k: Option<usize>,
    #[arg(long = "load-factor")]
    load_factor: Option<f64>,
    #[arg(long)]
    prefetch: Option<OnOff>,
    /// Corpus name stored in the index (defaults to the input file name).
    #[arg(long)]
    name: Option<String>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum OnOff {
    On,
    Off,
}

#[derive(Args, Debug)]
struct GenpatArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    m: usize,
    #[arg(long)]
    count: usize,
    #[arg(long)]
    seed: u64,
    /// Only draw windows over A, C, G, T.
    #[arg(long)]
    acgt: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct CountArgs {
    #[arg(long)]
    idx: PathBuf,
    #[arg(long)]
    patterns: PathBuf,
    /// Write `pattern<TAB>count` lines here and print only the summary.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct BenchArgs {
    #[arg(long)]
    idx: PathBuf,
    #[arg(long)]
    patterns: PathBuf,
    #[arg(long, default_value_t = 5)]
    repeat: usize,
}

fn parse_variant(s: &str) -> Result<Variant, String> {
    s.parse()
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Data(String),
}

impl Failure {
    fn data(e: impl std::fmt::Display) -> Self {
        Failure::Data(e.to_string())
    }
}

/// FNV-1a over the little-endian bytes of every count, in order.
pub fn occurrence_checksum<I: IntoIterator<Item = u64>>(counts: I) -> u64 {
    let bytes: Vec<u8> = counts.into_iter().flat_map(u64::to_le_bytes).collect();
    fnv1a(&bytes)
}

/// Runs the CLI on `args` (including the program name); returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let stdout = io::stdout();
    let mut out = stdout.lock();
    let result = match cli.command {
        Command::Build(a) => build(&a, &mut out),
        Command::Genpat(a) => genpat(&a, &mut out),
        Command::Count(a) => count(&a, &mut out),
        Command::Bench(a) => bench(&a, &mut out),
        Command::Selftest => return selftest(&mut out),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Data(msg)) => {
            eprintln!("error: {msg}");
            EXIT_DATA
        }
    }
}

fn config_from_args(a: &BuildArgs) -> Result<IndexConfig, Failure> {
    let v = a.variant;
    let only = |present: bool, flag: &str, allowed: &[Variant]| {
        if present && !allowed.contains(&v) {
            let names: Vec<&str> = allowed.iter().map(|x| x.name()).collect();
            Err(Failure::Usage(format!("{flag} applies to {} only, not {v}", names.join("/"))))
        } else {
            Ok(())
        }
    };
    use Variant::*;
    only(a.layout.is_some(), "--layout", &[Dummy1, Dummy2Scbdc, Dummy2Cb])?;
    only(a.counter.is_some(), "--counter", &[Dummy1, Dummy2Scbdc, Dummy2Cb])?;
    only(a.arity.is_some(), "--arity", &[Hwt])?;
    only(a.scbo.is_some(), "--scbo", &[Dummy2Scbdc])?;
    only(a.cb.is_some(), "--cb", &[Dummy2Cb])?;
    only(a.digit_bits.is_some(), "--digit-bits", &[Dummy2Cb])?;
    only(a.block.is_some(), "--block", &[Dummy3, Hwt])?;
    only(a.hash_k.is_some(), "--hash-k", &[Dummy1, Dummy3, Hwt])?;
    if a.load_factor.is_some() && a.hash_k.is_none() {
        return Err(Failure::Usage("--load-factor needs --hash-k".into()));
    }

    let layout = || -> Result<RankLayout, Failure> {
        let name = a.layout.as_deref().unwrap_or("512");
        let (bits, sub) = match name {
            "256" => (256, false),
            "512" => (512, false),
            "256c" => (256, true),
            _ => (512, true),
        };
        let counter = match (&a.counter, sub) {
            (Some(_), true) => return Err(Failure::Usage(format!("--counter does not apply to layout {name}"))),
            (Some(c), false) => Some(c.parse::<u32>().unwrap()),
            (None, _) => None,
        };
        RankLayout::from_parts(bits, counter, sub).ok_or_else(|| Failure::Usage(format!("no layout {name}")))
    };
    let block: u32 = a.block.as_deref().unwrap_or("512").parse().unwrap();

    let mut cfg = match v {
        Dummy1 => IndexConfig::dummy1(layout()?),
        Dummy2Scbdc => {
            let spec = a.scbo.as_deref().unwrap_or("4,2,4,6");
            let parts: Vec<u8> = spec
                .split(',')
                .map(|x| x.trim().parse::<u8>())
                .collect::<Result<_, _>>()
                .map_err(|_| Failure::Usage(format!("--scbo expects four small integers, got {spec:?}")))?;
            let [s, c, b, o] = parts[..] else {
                return Err(Failure::Usage(format!("--scbo expects s,c,b,o, got {spec:?}")));
            };
            let params = DenseCodeParams::scbdc(s, c, b, o).map_err(|e| Failure::Usage(e.to_string()))?;
            IndexConfig::dummy2(params, layout()?)
        }
        Dummy2Cb => {
            let b = a.cb.ok_or_else(|| Failure::Usage("d2cb needs --cb".into()))?;
            let bits: u8 = a.digit_bits.as_deref().unwrap_or("4").parse().unwrap();
            let params = DenseCodeParams::cb(b, bits).map_err(|e| Failure::Usage(e.to_string()))?;
            IndexConfig::dummy2(params, layout()?)
        }
        Dummy3 => IndexConfig::dummy3(Dna3Block::from_bits(block).unwrap()),
        Hwt => {
            let arity: usize = a.arity.as_deref().unwrap_or("4").parse().unwrap();
            IndexConfig::hwt(arity, HwtBlock::from_bits(block).unwrap())
        }
    };
    if let Some(k) = a.hash_k {
        let lf = a.load_factor.unwrap_or(DEFAULT_LOAD_FACTOR);
        if k == 0 {
            return Err(Failure::Usage("--hash-k must be positive".into()));
        }
        if !(lf > 0.0 && lf < 1.0) {
            return Err(Failure::Usage(format!("--load-factor must be in (0, 1), got {lf}")));
        }
        cfg = cfg.with_hash(k, lf);
    }
    Ok(cfg.with_prefetch(matches!(a.prefetch, Some(OnOff::On))))
}

fn build(a: &BuildArgs, out: &mut impl Write) -> Result<(), Failure> {
    let cfg = config_from_args(a)?;
    let text = load_text(&a.input).map_err(Failure::data)?;
    let name = a.name.clone().unwrap_or_else(|| file_name(&a.input));
    let started = Instant::now();
    let index = Index::build(text.bytes(), &cfg, &name).map_err(Failure::data)?;
    log::info!("built {} over {} bytes in {:.2?}", cfg.describe(), text.len(), started.elapsed());
    let written = index_io::save(&index, &a.out).map_err(|e| Failure::Data(format!("{}: {e}", a.out.display())))?;
    let _ = writeln!(out, "variant={}", cfg.variant);
    let _ = writeln!(out, "params={}", cfg.describe());
    let _ = writeln!(out, "n={}", text.len());
    let _ = writeln!(out, "index_bytes={}", index.size_bytes());
    let _ = writeln!(out, "file_bytes={written}");
    Ok(())
}

fn file_name(p: &Path) -> String {
    p.file_name().map_or_else(String::new, |s| s.to_string_lossy().into_owned())
}

fn genpat(a: &GenpatArgs, out: &mut impl Write) -> Result<(), Failure> {
    if a.m == 0 || a.count == 0 {
        return Err(Failure::Usage("--m and --count must be positive".into()));
    }
    let text = load_text(&a.input).map_err(Failure::data)?;
    let set = extract_patterns(&text, a.count, a.m, a.seed, a.acgt).map_err(Failure::data)?;
    let file = File::create(&a.out).map_err(|e| Failure::Data(format!("{}: {e}", a.out.display())))?;
    write_patterns(BufWriter::new(file), &set.patterns)
        .map_err(|e| Failure::Data(format!("{}: {e}", a.out.display())))?;
    let _ = writeln!(out, "patterns={} m={} seed={}", set.patterns.len(), a.m, a.seed);
    Ok(())
}

fn load_inputs(idx: &Path, patterns: &Path) -> Result<(Index, Vec<Vec<u8>>), Failure> {
    let index = index_io::load(idx).map_err(|e| Failure::Data(format!("{}: {e}", idx.display())))?;
    let file = File::open(patterns).map_err(|e| Failure::Data(format!("{}: {e}", patterns.display())))?;
    let patterns = read_patterns(BufReader::new(file)).map_err(Failure::data)?;
    Ok((index, patterns))
}

fn count_all(index: &Index, patterns: &[Vec<u8>]) -> Result<Vec<u64>, Failure> {
    patterns
        .iter()
        .enumerate()
        .map(|(i, p)| {
            index
                .count(p)
                .map(|c| c as u64)
                .map_err(|e| Failure::Data(format!("pattern {}: {e}", i + 1)))
        })
        .collect()
}

fn count(a: &CountArgs, out: &mut impl Write) -> Result<(), Failure> {
    let (index, patterns) = load_inputs(&a.idx, &a.patterns)?;
    let counts = count_all(&index, &patterns)?;
    let checksum = occurrence_checksum(counts.iter().copied());
    match &a.report {
        Some(path) => {
            let mut report = String::new();
            for (p, c) in patterns.iter().zip(&counts) {
                let _ = writeln!(report, "{}\t{c}", String::from_utf8_lossy(p));
            }
            std::fs::write(path, report).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))?;
            let _ = writeln!(out, "patterns={}", counts.len());
            let _ = writeln!(out, "occurrences={}", counts.iter().sum::<u64>());
        }
        None => {
            for c in &counts {
                let _ = writeln!(out, "{c}");
            }
        }
    }
    let _ = writeln!(out, "checksum={checksum:016x}");
    Ok(())
}

/// Timing summary of one `bench` run, printed as `key=value` lines.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub variant: String,
    pub params: String,
    pub corpus: String,
    pub m: f64,
    pub patterns: usize,
    pub repeat: usize,
    pub total_ns: u128,
    pub ns_per_char: f64,
    pub index_bytes: usize,
    pub n: usize,
    pub checksum: u64,
}

impl BenchReport {
    pub fn bytes_per_n(&self) -> f64 {
        self.index_bytes as f64 / self.n as f64
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "variant={}", self.variant);
        let _ = writeln!(s, "params={}", self.params);
        let _ = writeln!(s, "corpus={}", self.corpus);
        let _ = writeln!(s, "m={}", self.m);
        let _ = writeln!(s, "patterns={}", self.patterns);
        let _ = writeln!(s, "repeat={}", self.repeat);
        let _ = writeln!(s, "total_ns={}", self.total_ns);
        let _ = writeln!(s, "ns_per_char={:.3}", self.ns_per_char);
        let _ = writeln!(s, "index_bytes={}", self.index_bytes);
        let _ = writeln!(s, "n={}", self.n);
        let _ = writeln!(s, "bytes_per_n={:.4}", self.bytes_per_n());
        let _ = writeln!(s, "checksum={:016x}", self.checksum);
        s
    }
}

fn bench(a: &BenchArgs, out: &mut impl Write) -> Result<(), Failure> {
    if a.repeat < 3 {
        return Err(Failure::Usage(format!("--repeat must be at least 3, got {}", a.repeat)));
    }
    let (index, patterns) = load_inputs(&a.idx, &a.patterns)?;
    if patterns.is_empty() {
        return Err(Failure::Data("pattern file is empty".into()));
    }
    let chars: usize = patterns.iter().map(Vec::len).sum();
    if chars == 0 {
        return Err(Failure::Data("all patterns are empty".into()));
    }
    // Untimed warm-up pass, which also validates every pattern.
    let counts = count_all(&index, &patterns)?;
    let mut times = Vec::with_capacity(a.repeat);
    for _ in 0..a.repeat {
        let started = Instant::now();
        let mut sink = 0usize;
        for p in &patterns {
            sink = sink.wrapping_add(index.count(std::hint::black_box(p)).unwrap_or(0));
        }
        std::hint::black_box(sink);
        times.push(started.elapsed().as_nanos().max(1));
    }
    times.sort_unstable();
    let total_ns = times[times.len() / 2];
    let report = BenchReport {
        variant: index.config.variant.to_string(),
        params: index.config.describe(),
        corpus: index.corpus.clone(),
        m: chars as f64 / patterns.len() as f64,
        patterns: patterns.len(),
        repeat: a.repeat,
        total_ns,
        ns_per_char: total_ns as f64 / chars as f64,
        index_bytes: index.size_bytes(),
        n: index.text_len,
        checksum: occurrence_checksum(counts),
    };
    let _ = out.write_all(report.render().as_bytes());
    Ok(())
}

fn random_text(len: usize, alphabet: &[u8], seed: u64) -> Vec<u8> {
    let mut rng = SplitMix64::seed_from_u64(seed);
    (0..len)
        .map(|_| alphabet[((rng.next_u64() as u128 * alphabet.len() as u128) >> 64) as usize])
        .collect()
}

fn selftest_configs(dna: bool) -> Vec<IndexConfig> {
    let mut v = Vec::new();
    for layout in RankLayout::ALL {
        v.push(IndexConfig::dummy1(layout));
    }
    v.push(IndexConfig::dummy1(RankLayout::Plain512x64).with_hash(5, DEFAULT_LOAD_FACTOR));
    v.push(IndexConfig::dummy2(DenseCodeParams::scbdc(4, 2, 4, 6).unwrap(), RankLayout::Plain512x64));
    v.push(IndexConfig::dummy2(DenseCodeParams::cb(10, 4).unwrap(), RankLayout::Sub256));
    v.push(IndexConfig::dummy2(DenseCodeParams::cb(5, 3).unwrap(), RankLayout::Sub512));
    for arity in [2, 4, 8] {
        for block in [HwtBlock::Bits512, HwtBlock::Bits1024] {
            v.push(IndexConfig::hwt(arity, block));
        }
    }
    v.push(IndexConfig::hwt(4, HwtBlock::Bits512).with_hash(5, DEFAULT_LOAD_FACTOR));
    if dna {
        for block in [Dna3Block::Bits512, Dna3Block::Bits1024] {
            v.push(IndexConfig::dummy3(block));
        }
        v.push(IndexConfig::dummy3(Dna3Block::Bits512).with_hash(5, DEFAULT_LOAD_FACTOR));
    }
    v
}

fn selftest(out: &mut impl Write) -> i32 {
    let corpora: Vec<(&str, Vec<u8>, bool)> = vec![
        ("phrase", b"she sells sea shells by the sea shore; the shells she sells are sea shells".repeat(20), false),
        ("dna", random_text(6000, b"ACGTACGTACGTN", 1), true),
        ("sigma64", random_text(5000, &(b'0'..b'0' + 64).collect::<Vec<u8>>(), 2), false),
    ];
    let mut failures = 0;
    let mut checks = 0;
    for (name, text, dna) in &corpora {
        let t = Text::new(text.clone()).expect("built-in corpus is non-empty");
        let mut patterns = Vec::new();
        for (i, m) in [1usize, 3, 5, 6, 12].into_iter().enumerate() {
            patterns.extend(extract_patterns(&t, 40, m, 100 + i as u64, *dna).expect("corpus has windows").patterns);
        }
        patterns.push(b"#never#".to_vec());
        for cfg in selftest_configs(*dna) {
            let result = Index::build(text, &cfg, name)
                .map_err(|e| e.to_string())
                .and_then(|idx| {
                    let back = index_io::from_bytes(&index_io::to_bytes(&idx)).map_err(|e| e.to_string())?;
                    for p in &patterns {
                        if *dna && p.iter().any(|b| !b"ACGT".contains(b)) && cfg.variant == Variant::Dummy3 {
                            continue;
                        }
                        let want = naive_count(text, p);
                        for (which, i) in [("built", &idx), ("reloaded", &back)] {
                            let got = i.count(p).map_err(|e| e.to_string())?;
                            if got != want {
                                return Err(format!(
                                    "{which} index counts {got} for {:?}, expected {want}",
                                    String::from_utf8_lossy(p)
                                ));
                            }
                        }
                    }
                    Ok(())
                });
            checks += 1;
            match result {
                Ok(()) => {
                    let _ = writeln!(out, "ok   {name:<8} {}", cfg.describe());
                }
                Err(e) => {
                    failures += 1;
                    let _ = writeln!(out, "FAIL {name:<8} {}: {e}", cfg.describe());
                }
            }
        }
    }
    let _ = writeln!(out, "selftest: {} of {checks} suites passed", checks - failures);
    if failures == 0 {
        EXIT_OK
    } else {
        EXIT_SELFTEST_FAILED
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn checksum_of_zeros_is_fnv_of_zero_bytes() {
        assert_eq!(occurrence_checksum([0, 0]), fnv1a(&[0u8; 16]));
        assert_eq!(occurrence_checksum([]), fnv1a(&[]));
    }

    #[test]
    fn variant_flag_mismatches_are_usage_errors() {
        for args in [
            &["fmdx", "build", "--in", "x", "--out", "y", "--variant", "d1", "--arity", "4"][..],
            &["fmdx", "build", "--in", "x", "--out", "y", "--variant", "hwt", "--layout", "256"],
            &["fmdx", "build", "--in", "x", "--out", "y", "--variant", "d2", "--cb", "3"],
            &["fmdx", "build", "--in", "x", "--out", "y", "--variant", "d2cb"],
            &["fmdx", "build", "--in", "x", "--out", "y", "--variant", "d1", "--layout", "256c", "--counter", "32"],
            &["fmdx", "build", "--in", "x", "--out", "y", "--variant", "d2", "--hash-k", "5"],
            &["fmdx", "build", "--in", "x", "--out", "y", "--variant", "d1", "--load-factor", "0.5"],
            &["fmdx", "build", "--in", "x", "--out", "y", "--variant", "d9"],
            &["fmdx", "bench", "--idx", "x", "--patterns", "y", "--repeat", "2"],
            &["fmdx", "frobnicate"],
        ] {
            assert_eq!(run(args.iter().copied()), EXIT_USAGE, "{args:?}");
        }
    }

    #[test]
    fn missing_input_is_a_data_error() {
        let args = ["fmdx", "build", "--in", "/nonexistent/t", "--out", "/nonexistent/i", "--variant", "d1"];
        assert_eq!(run(args), EXIT_DATA);
    }
}
