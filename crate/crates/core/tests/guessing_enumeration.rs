//! Closed-form guess probabilities against exhaustive enumeration of the
//! response space, and Monte Carlo checks of the formula-score correction.

use proptest::prelude::*;
use testgauge_core::guessing::{corrected_score, guess_probability, min_format_size};
use testgauge_core::simulation::experiment_guesser_bias;
use testgauge_core::{FormatFamily, ItemFormat};

/// Counts injective assignments of `n` prompts into `m` responses, and how
/// many of them equal the key (prompt i -> response i).
fn enumerate_injections(n: usize, m: usize) -> (u64, u64) {
    fn go(depth: usize, n: usize, m: usize, used: &mut Vec<bool>, all_correct: bool, acc: &mut (u64, u64)) {
        if depth == n {
            acc.0 += 1;
            if all_correct {
                acc.1 += 1;
            }
            return;
        }
        for r in 0..m {
            if !used[r] {
                used[r] = true;
                go(depth + 1, n, m, used, all_correct && r == depth, acc);
                used[r] = false;
            }
        }
    }
    let mut acc = (0, 0);
    go(0, n, m, &mut vec![false; m], true, &mut acc);
    acc
}

fn enumerated(format: ItemFormat) -> f64 {
    match format {
        ItemFormat::SingleChoice { m } => {
            let hits = (0..m).filter(|option| *option == 0).count();
            hits as f64 / m as f64
        }
        ItemFormat::MultiSelect { m } => {
            let key = 0b101u64 & ((1 << m) - 1) | 1;
            let subsets = 1..(1u64 << m);
            let total = subsets.clone().count();
            let hits = subsets.filter(|s| *s == key).count();
            hits as f64 / total as f64
        }
        ItemFormat::Matching { n, m } => {
            let (total, hits) = enumerate_injections(n as usize, m as usize);
            hits as f64 / total as f64
        }
        ItemFormat::Ordering { n } => {
            let (total, hits) = enumerate_injections(n as usize, n as usize);
            hits as f64 / total as f64
        }
    }
}

fn assert_close(format: ItemFormat) {
    let closed = guess_probability(format).unwrap();
    let brute = enumerated(format);
    assert!((closed - brute).abs() <= 1e-15 * brute.max(1e-300) * 8.0, "{format:?}: {closed} vs {brute}");
}

#[test]
fn every_family_matches_enumeration() {
    for m in 2..=50 {
        assert_close(ItemFormat::SingleChoice { m });
    }
    for m in 2..=19 {
        assert_close(ItemFormat::MultiSelect { m });
    }
    for m in 1..=9u32 {
        for n in 1..=m {
            let space: u64 = (0..n).map(|i| (m - i) as u64).product();
            if space <= 1_000_000 {
                assert_close(ItemFormat::Matching { n, m });
            }
        }
    }
    for n in 2..=9 {
        assert_close(ItemFormat::Ordering { n });
    }
}

#[test]
fn enumeration_examples() {
    assert_eq!(enumerate_injections(5, 5), (120, 1));
    assert_eq!(enumerate_injections(4, 6), (360, 1));
    assert!((guess_probability(ItemFormat::Ordering { n: 5 }).unwrap() - 0.008333).abs() < 5e-7);
    assert!((guess_probability(ItemFormat::Matching { n: 4, m: 6 }).unwrap() - 0.002778).abs() < 5e-7);
}

fn smaller(format: ItemFormat) -> Option<ItemFormat> {
    match format {
        ItemFormat::SingleChoice { m } if m > 2 => Some(ItemFormat::SingleChoice { m: m - 1 }),
        ItemFormat::MultiSelect { m } if m > 2 => Some(ItemFormat::MultiSelect { m: m - 1 }),
        ItemFormat::Matching { n, m } if n > 1 => Some(ItemFormat::Matching { n: n - 1, m: m - 1 }),
        ItemFormat::Ordering { n } if n > 2 => Some(ItemFormat::Ordering { n: n - 1 }),
        _ => None,
    }
}

#[test]
fn design_sizes_are_minimal_by_enumeration() {
    let expect = [
        (FormatFamily::Ordering, ItemFormat::Ordering { n: 5 }),
        (FormatFamily::MultiSelect, ItemFormat::MultiSelect { m: 7 }),
        (FormatFamily::SingleChoice, ItemFormat::SingleChoice { m: 101 }),
    ];
    for (family, format) in expect {
        let found = min_format_size(family, 0.01).unwrap();
        assert_eq!(found, format);
        assert!(enumerated(found) < 0.01);
        assert!(enumerated(smaller(found).unwrap()) >= 0.01);
    }
}

proptest! {
    #[test]
    fn design_is_tight(family_ix in 0usize..4, p in 1e-6f64..0.99) {
        let family = [FormatFamily::SingleChoice, FormatFamily::MultiSelect, FormatFamily::Matching, FormatFamily::Ordering][family_ix];
        let found = min_format_size(family, p).unwrap();
        prop_assert!(guess_probability(found).unwrap() < p);
        if let Some(prev) = smaller(found) {
            prop_assert!(guess_probability(prev).unwrap() >= p);
        }
    }

    #[test]
    fn correction_is_monotone(r in 0u32..200, w in 0u32..200, m in 2u32..10) {
        let base = corrected_score(r, w, m).unwrap();
        prop_assert!((corrected_score(r + 1, w, m).unwrap() - base - 1.0).abs() < 1e-9);
        prop_assert!((base - corrected_score(r, w + 1, m).unwrap() - 1.0 / (m - 1) as f64).abs() < 1e-9);
        prop_assert!(base <= r as f64);
        prop_assert_eq!(base == r as f64, w == 0);
    }
}

#[test]
fn correction_is_unbiased_for_blind_guessers() {
    for (known, total) in [(0, 40), (10, 40), (26, 42)] {
        for m in [2, 4, 5] {
            let (bias, _) = experiment_guesser_bias(known, total, m, 10_000, 0xC0FFEE).unwrap();
            assert!((bias.mean_corrected - known as f64).abs() <= 0.1, "K={known} m={m}: {}", bias.mean_corrected);
            let raw_oracle = known as f64 + (total - known) as f64 / m as f64;
            assert!((bias.mean_raw - raw_oracle).abs() <= 0.2);
        }
    }
}

#[test]
fn worked_correction_matches_simulated_examinee() {
    // 26 known of 42 four-option items, 16 guessed: expected 4 right, 12 wrong.
    let (bias, _) = experiment_guesser_bias(26, 42, 4, 10_000, 77).unwrap();
    assert!((bias.mean_corrected - corrected_score(30, 12, 4).unwrap()).abs() <= 0.1);
}
