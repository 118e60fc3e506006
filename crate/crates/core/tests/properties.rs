use proptest::prelude::*;
use zigfast::exp::{classify_point, OverhangOutcome};
use zigfast::tables::{verify_tables, DEFAULT_TOLERANCE};
use zigfast::{
    solve_layers, Algorithm, DensityKind, Distribution, ExpSampler, Generator, NormalSampler,
    SamplerPair, Ziggurat,
};

fn any_algorithm() -> impl Strategy<Value = Algorithm> {
    prop_oneof![Just(Algorithm::Modified), Just(Algorithm::Traditional)]
}

fn any_distribution() -> impl Strategy<Value = Distribution> {
    prop_oneof![Just(Distribution::Exponential), Just(Distribution::Normal)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn outputs_are_finite_and_in_support(seed in any::<u64>(), d in any_distribution(), a in any_algorithm()) {
        let mut g = Generator::new(d, a, seed);
        let mut buf = vec![0.0; 4096];
        g.fill(&mut buf);
        for x in buf {
            prop_assert!(x.is_finite());
            if d == Distribution::Exponential {
                prop_assert!(x >= 0.0);
            }
        }
    }

    #[test]
    fn fill_equals_sequential_draws(seed in any::<u64>(), len in 0usize..600, d in any_distribution(), a in any_algorithm()) {
        let mut bulk = Generator::new(d, a, seed);
        let mut scalar = bulk.clone();
        let mut buf = vec![0.0; len];
        bulk.fill(&mut buf);
        for x in &buf {
            prop_assert_eq!(x.to_bits(), scalar.sample().to_bits());
        }
        prop_assert_eq!(bulk.sample().to_bits(), scalar.sample().to_bits());
    }

    #[test]
    fn split_fills_continue_the_stream(seed in any::<u64>(), split in 0usize..300) {
        let mut whole = NormalSampler::from_seed(seed);
        let mut parts = whole.clone();
        let mut a = vec![0.0; 300];
        whole.fill(&mut a);
        let mut b = vec![0.0; 300];
        let (left, right) = b.split_at_mut(split);
        parts.fill(left);
        parts.fill(right);
        prop_assert_eq!(a, b);
    }

    #[test]
    fn shared_seed_pair_matches_standalone(seed in any::<u64>(), ne in 0usize..200, nn in 0usize..200) {
        let mut pair = SamplerPair::new(seed);
        let e = pair.exponential(ne);
        let n = pair.normal(nn);
        let mut exp = ExpSampler::from_seed(seed);
        let mut normal = NormalSampler::from_seed(seed);
        prop_assert!(e.iter().all(|x| x.to_bits() == exp.sample().to_bits()));
        prop_assert!(n.iter().all(|x| x.to_bits() == normal.sample().to_bits()));
    }

    #[test]
    fn fast_accept_points_are_under_the_curve(j in 1usize..=252, s in 0.0f64..1.0, v in 0.0f64..1.0) {
        let zig = Ziggurat::exponential();
        let b = *zig.overhang_box(j);
        let (s, v) = if v > s { (v, s) } else { (s, v) };
        let outcome = classify_point(&b, zig.epsilon(), s, v);
        let x = b.x_right - s * b.width();
        let y = b.y_bottom + v * b.height();
        match outcome {
            OverhangOutcome::FastAccept(at) => {
                prop_assert_eq!(at, x);
                prop_assert!(y <= (-x).exp() * (1.0 + 1e-12));
            }
            OverhangOutcome::BandAccept(at) => {
                prop_assert_eq!(at, x);
                prop_assert!(s - v < zig.epsilon());
                prop_assert!(y < (-x).exp());
            }
            OverhangOutcome::Reject => {
                prop_assert!(s - v < zig.epsilon());
                prop_assert!(y >= (-x).exp());
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn small_tables_verify(log2 in 1u32..=10, half_normal in any::<bool>()) {
        let kind = if half_normal { DensityKind::HalfNormal } else { DensityKind::Exponential };
        let t = solve_layers(kind, 1 << log2, DEFAULT_TOLERANCE).unwrap();
        prop_assert!(t.l_max() < t.i_max());
        prop_assert_eq!(t.x().len(), t.l_max() + 1);
        prop_assert!((t.a().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let problems = verify_tables(&t, DEFAULT_TOLERANCE);
        prop_assert!(problems.is_empty(), "{:?}", problems);
    }
}
