use boole_bell::sign::{
    boole_bell_lhs, boole_bell_lhs_prob, boole_bell_numerator, brute_force_max_lhs, coincidence_probability,
    correlation,
};
use boole_bell::SignSequence;
use proptest::collection::vec;
use proptest::prelude::*;

fn signs(bits: &[bool]) -> Vec<i8> {
    bits.iter().map(|&b| if b { 1 } else { -1 }).collect()
}

fn seq(bits: &[bool]) -> SignSequence {
    SignSequence::from_bools(bits).unwrap()
}

/// Pointwise sum of products, no bit tricks.
fn naive_dot(f: &[i8], g: &[i8]) -> i64 {
    f.iter().zip(g).map(|(&a, &b)| (a * b) as i64).sum()
}

fn naive_lhs(f: &[i8], g: &[i8], h: &[i8]) -> f64 {
    let n = f.len() as f64;
    ((naive_dot(f, g) - naive_dot(f, h)).abs() + naive_dot(g, h)) as f64 / n
}

fn triple() -> impl Strategy<Value = (Vec<bool>, Vec<bool>, Vec<bool>)> {
    (1usize..=1000).prop_flat_map(|n| (vec(any::<bool>(), n), vec(any::<bool>(), n), vec(any::<bool>(), n)))
}

fn pair() -> impl Strategy<Value = (Vec<bool>, Vec<bool>)> {
    (1usize..=1000).prop_flat_map(|n| (vec(any::<bool>(), n), vec(any::<bool>(), n)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn lhs_never_exceeds_one((f, g, h) in triple()) {
        let (f, g, h) = (seq(&f), seq(&g), seq(&h));
        let (num, n) = boole_bell_numerator(&f, &g, &h).unwrap();
        prop_assert!(num <= n as i64);
        prop_assert!(boole_bell_lhs(&f, &g, &h).unwrap() <= 1.0);
    }

    #[test]
    fn lhs_matches_pointwise_oracle((f, g, h) in triple()) {
        let oracle = naive_lhs(&signs(&f), &signs(&g), &signs(&h));
        prop_assert_eq!(boole_bell_lhs(&seq(&f), &seq(&g), &seq(&h)).unwrap(), oracle);
    }

    #[test]
    fn correlation_is_an_exact_rational((f, g) in pair()) {
        let (fs, gs) = (seq(&f), seq(&g));
        let est = correlation(&fs, &gs).unwrap();
        prop_assert_eq!(est.sum, naive_dot(&signs(&f), &signs(&g)));
        prop_assert_eq!(est.value, est.sum as f64 / f.len() as f64);
        prop_assert_eq!(est.n, f.len());
    }

    #[test]
    fn negation_is_bilinear((f, g) in pair()) {
        let (f, g) = (seq(&f), seq(&g));
        let c = correlation(&f, &g).unwrap().sum;
        prop_assert_eq!(correlation(&-&f, &g).unwrap().sum, -c);
        prop_assert_eq!(correlation(&f, &-&g).unwrap().sum, -c);
        prop_assert_eq!(correlation(&-&f, &-&g).unwrap().sum, c);
    }

    #[test]
    fn coincidences_of_g_and_minus_g_sum_to_one((f, g) in pair()) {
        let (f, g) = (seq(&f), seq(&g));
        let n = f.len();
        let agree = n - f.hamming_distance(&g).unwrap();
        let agree_neg = n - f.hamming_distance(&-&g).unwrap();
        prop_assert_eq!(agree + agree_neg, n);
        let p = coincidence_probability(&f, &g).unwrap() + coincidence_probability(&f, &-&g).unwrap();
        prop_assert!((p - 1.0).abs() <= 1e-15);
    }

    #[test]
    fn probability_identity_holds_in_integers((f, g) in pair()) {
        let (f, g) = (seq(&f), seq(&g));
        let n = f.len() as i64;
        let agree = n - f.hamming_distance(&g).unwrap() as i64;
        let sum = correlation(&f, &g).unwrap().sum;
        prop_assert_eq!(2 * agree, n + sum);
    }

    #[test]
    fn probability_form_agrees_with_correlation_form((f, g, h) in triple()) {
        let (f, g, h) = (seq(&f), seq(&g), seq(&h));
        let form = boole_bell_lhs_prob(&f, &g, &h).unwrap();
        prop_assert!(form.holds());
        // |P_fg − P_fh| − (1 − P_gh) = (lhs − 1)/2
        let lhs = boole_bell_lhs(&f, &g, &h).unwrap();
        prop_assert!(((form.lhs - form.rhs) - (lhs - 1.0) / 2.0).abs() <= 1e-12);
    }

    #[test]
    fn text_round_trip(bits in vec(any::<bool>(), 1..600)) {
        let s = seq(&bits);
        prop_assert_eq!(SignSequence::parse_text(&s.to_text()).unwrap(), s.clone());
        prop_assert_eq!(s.to_text().parse::<SignSequence>().unwrap(), s);
    }

    #[test]
    fn binary_round_trip(bits in vec(any::<bool>(), 1..600)) {
        let s = seq(&bits);
        let bytes = s.to_bytes();
        prop_assert_eq!(bytes.len(), 8 + 8 * bits.len().div_ceil(64));
        prop_assert_eq!(SignSequence::from_bytes(&bytes).unwrap(), s);
    }

    #[test]
    fn common_sign_flip_preserves_lhs((f, g, h) in triple(), seed in any::<u64>()) {
        let (f, g, h) = (seq(&f), seq(&g), seq(&h));
        let mut state = seed;
        let w = SignSequence::from_fn(f.len(), |_| {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            state >> 63 == 1
        }).unwrap();
        let before = boole_bell_lhs(&f, &g, &h).unwrap();
        let after = boole_bell_lhs(&f.product(&w).unwrap(), &g.product(&w).unwrap(), &h.product(&w).unwrap()).unwrap();
        prop_assert_eq!(before, after);
    }
}

/// Full enumeration of all 2^(3n) triples, without the symmetry reduction.
fn exhaustive_max(n: usize) -> f64 {
    let unpack = |m: u32| -> Vec<i8> { (0..n).map(|i| if m >> i & 1 == 1 { 1 } else { -1 }).collect() };
    let all: Vec<Vec<i8>> = (0..1u32 << n).map(unpack).collect();
    let mut best = f64::NEG_INFINITY;
    for f in &all {
        for g in &all {
            for h in &all {
                best = best.max(naive_lhs(f, g, h));
            }
        }
    }
    best
}

#[test]
fn reduced_search_agrees_with_full_enumeration() {
    for n in 1..=4 {
        assert_eq!(brute_force_max_lhs(n).unwrap(), exhaustive_max(n), "n = {n}");
        assert_eq!(exhaustive_max(n), 1.0);
    }
}

#[test]
fn bound_is_attained_by_equal_sequences() {
    for n in [1, 7, 64, 65, 1000] {
        let f = SignSequence::from_fn(n, |i| i % 3 == 0).unwrap();
        assert_eq!(boole_bell_lhs(&f, &f, &f).unwrap(), 1.0);
    }
}

#[test]
fn sequences_crossing_word_boundaries() {
    for n in [63, 64, 65, 127, 128, 129] {
        let f = SignSequence::from_fn(n, |i| i % 2 == 0).unwrap();
        let g = SignSequence::constant(n, 1).unwrap();
        let expect = naive_dot(&f.iter().collect::<Vec<_>>(), &g.iter().collect::<Vec<_>>());
        assert_eq!(correlation(&f, &g).unwrap().sum, expect);
        assert_eq!((-&f).count_plus(), n - f.count_plus());
        let both = SignSequence::concat([&f, &g]).unwrap();
        assert_eq!(both.slice(n..2 * n).unwrap(), g);
        assert_eq!(both.slice(0..n).unwrap(), f);
    }
}
