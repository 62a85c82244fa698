//! Every variant against the naive scan on small adversarial texts.

use fmdx::dense_code::DenseCodeParams;
use fmdx::dummy3::Dna3Block;
use fmdx::fm::QueryError;
use fmdx::hwt::HwtBlock;
use fmdx::dense_code::{CodeError, MAX_CODEWORD_LEN};
use fmdx::index::{BuildError, Index, IndexConfig, Variant};
use fmdx::index_io;
use fmdx::rank::RankLayout;
use fmdx::suffix::naive_count;
use proptest::prelude::*;

fn configs(dna: bool) -> Vec<IndexConfig> {
    let mut v = vec![
        IndexConfig::dummy1(RankLayout::Plain256x32),
        IndexConfig::dummy1(RankLayout::Sub512).with_hash(2, 0.5),
        IndexConfig::dummy2(DenseCodeParams::scbdc(4, 2, 4, 6).unwrap(), RankLayout::Sub256),
        IndexConfig::dummy2(DenseCodeParams::scbdc(1, 1, 1, 13).unwrap(), RankLayout::Plain512x32),
        IndexConfig::dummy2(DenseCodeParams::cb(1, 3).unwrap(), RankLayout::Plain512x64),
        IndexConfig::dummy2(DenseCodeParams::cb(15, 4).unwrap(), RankLayout::Plain256x64),
    ];
    for arity in [2, 4, 8] {
        v.push(IndexConfig::hwt(arity, HwtBlock::Bits512));
    }
    v.push(IndexConfig::hwt(8, HwtBlock::Bits1024).with_hash(3, 0.7));
    if dna {
        v.push(IndexConfig::dummy3(Dna3Block::Bits512));
        v.push(IndexConfig::dummy3(Dna3Block::Bits1024).with_hash(2, 0.9));
    }
    v
}

fn check(text: &[u8], patterns: &[Vec<u8>], dna: bool) -> Result<(), TestCaseError> {
    for cfg in configs(dna) {
        let idx = match Index::build(text, &cfg, "prop") {
            Ok(idx) => idx,
            // Too many distinct symbols for the code, or a text shorter than k.
            Err(BuildError::Code(CodeError::CapacityExceeded { symbols, params })) => {
                prop_assert!(params.codeword_capacity(MAX_CODEWORD_LEN) < symbols as u128);
                continue;
            }
            Err(BuildError::InvalidHashK { k, n }) => {
                prop_assert!(k > n);
                continue;
            }
            Err(e) => return Err(TestCaseError::fail(format!("{}: {e}", cfg.describe()))),
        };
        let back = index_io::from_bytes(&index_io::to_bytes(&idx)).unwrap();
        for p in patterns {
            if p.is_empty() {
                prop_assert_eq!(idx.count(p), Err(QueryError::EmptyPattern));
                continue;
            }
            if cfg.variant == Variant::Dummy3 && !p.iter().all(|b| b"ACGT".contains(b)) {
                prop_assert!(matches!(idx.count(p), Err(QueryError::InvalidDnaSymbol(_))));
                continue;
            }
            let want = naive_count(text, p);
            prop_assert_eq!(idx.count(p).unwrap(), want, "{} {:?}", cfg.describe(), p);
            prop_assert_eq!(back.count(p).unwrap(), want);
        }
    }
    Ok(())
}

fn substrings(text: &[u8]) -> Vec<Vec<u8>> {
    let mut out = Vec::new();
    for m in [1, 2, 3, 5, 8] {
        for start in (0..text.len().saturating_sub(m - 1)).step_by(7) {
            out.push(text[start..start + m].to_vec());
        }
    }
    out.push(text.to_vec());
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn binary_alphabet(text in proptest::collection::vec(prop_oneof![Just(0u8), Just(255u8)], 1..400),
                       extra in proptest::collection::vec(proptest::collection::vec(any::<u8>(), 0..6), 0..8)) {
        let mut patterns = substrings(&text);
        patterns.extend(extra);
        check(&text, &patterns, false)?;
    }

    #[test]
    fn dna_with_n(text in proptest::collection::vec(prop::sample::select(b"ACGTN".to_vec()), 1..600),
                  extra in proptest::collection::vec(proptest::collection::vec(prop::sample::select(b"ACGTNx".to_vec()), 0..7), 0..8)) {
        let mut patterns = substrings(&text);
        patterns.extend(extra);
        check(&text, &patterns, true)?;
    }

    #[test]
    fn wide_alphabet(text in proptest::collection::vec(any::<u8>(), 1..500)) {
        check(&text, &substrings(&text), false)?;
    }
}

#[test]
fn single_symbol_texts() {
    for text in [&b"A"[..], b"AAAAAAAAAAAAAAAAAAAAAAAAAAAAAAAAAAAAAAAAAAAAAAAA", &[0u8; 700]] {
        let patterns = vec![text[..1].to_vec(), text.to_vec(), vec![text[0]; text.len() + 1], b"C".to_vec()];
        check(text, &patterns, text[0] == b'A').unwrap();
    }
}

#[test]
fn block_boundary_lengths() {
    // Text lengths that put the BWT end exactly on block boundaries.
    for n in [143usize, 144, 191, 192, 335, 336, 447, 448, 479, 480, 1023] {
        let text: Vec<u8> = (0..n).map(|i| b"ACGT"[(i * 7 + i / 5) % 4]).collect();
        check(&text, &substrings(&text), true).unwrap();
    }
}
