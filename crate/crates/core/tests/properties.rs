use chainwatch_core::analysis::{f_score, lcs, score_pairs};
use chainwatch_core::hmm::{
    init_model, model_from_str, model_to_string, train_observed, viterbi, ObservationAlphabet,
    ObservationSequence, StateSpace, TrainConfig,
};
use chainwatch_core::sim::{generate, ChainSpec, EvidenceEmission};
use chainwatch_core::trace::{extract_verified, parse_trace_str, write_trace, WindowConfig};
use proptest::prelude::*;

fn small_labels() -> impl Strategy<Value = Vec<String>> {
    prop::collection::vec(prop::sample::select(vec!["a", "b", "c", "d"]), 0..10)
        .prop_map(|v| v.into_iter().map(String::from).collect())
}

fn is_subsequence(sub: &[String], of: &[String]) -> bool {
    let mut it = of.iter();
    sub.iter().all(|s| it.any(|o| o == s))
}

/// Random chain with lossy evidence, jittered delays and background noise.
fn noisy_spec() -> impl Strategy<Value = ChainSpec> {
    (
        1usize..6,
        1usize..6,
        any::<u64>(),
        prop::collection::vec((0u64..400, 0.3f64..1.0), 6),
        0.0f64..0.002,
    )
        .prop_map(|(len, reps, seed, evidence, noise)| {
            let mut spec = ChainSpec::smart_home();
            spec.device_events = (0..len).map(|i| format!("dev{i}")).collect();
            spec.evidence_map = (0..len)
                .map(|i| {
                    let (delay_ms, probability) = evidence[i];
                    let emission = EvidenceEmission {
                        id: format!("ev{}", i % 3),
                        delay_ms,
                        probability,
                    };
                    (format!("dev{i}"), vec![emission])
                })
                .collect();
            spec.injections.clear();
            spec.repetitions = reps;
            spec.inter_event_gap_ms = 250;
            spec.spurious_evidence_rate = noise;
            spec.seed = seed;
            spec
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn em_is_monotone_and_stays_stochastic(
        n in 1usize..=4,
        k in 1usize..=4,
        seed in any::<u64>(),
        y in prop::collection::vec(0usize..4, 1..=50),
    ) {
        let y: Vec<usize> = y.into_iter().map(|s| s % k).collect();
        let obs = ObservationSequence::new(y).unwrap();
        let model = init_model(
            StateSpace::numbered(n).unwrap(),
            ObservationAlphabet::numbered(k).unwrap(),
            seed,
        )
        .unwrap();
        let mut bad = None;
        let config = TrainConfig { max_iters: 200, tol: 1e-6 };
        let (_, report) = train_observed(&model, &obs, config, |iter, m| {
            if bad.is_none() {
                if let Err(e) = m.check_stochastic(1e-9) {
                    bad = Some(format!("iteration {iter}: {e}"));
                }
            }
        })
        .unwrap();
        prop_assert!(bad.is_none(), "{:?}", bad);
        for w in report.log_likelihood_history.windows(2) {
            prop_assert!(w[1] >= w[0] - 1e-9, "{} then {}", w[0], w[1]);
        }
    }

    #[test]
    fn model_text_round_trips(n in 1usize..=5, k in 1usize..=5, seed in any::<u64>(),
                              y in prop::collection::vec(0usize..5, 1..20)) {
        let model = init_model(
            StateSpace::numbered(n).unwrap(),
            ObservationAlphabet::numbered(k).unwrap(),
            seed,
        )
        .unwrap();
        let back = model_from_str(&model_to_string(&model)).unwrap();
        prop_assert_eq!(&back, &model);
        let obs = ObservationSequence::new(y.into_iter().map(|s| s % k).collect()).unwrap();
        prop_assert_eq!(viterbi(&back, &obs).unwrap(), viterbi(&model, &obs).unwrap());
    }

    #[test]
    fn lcs_is_a_common_subsequence(a in small_labels(), b in small_labels()) {
        let common = lcs(&a, &b);
        prop_assert!(common.len() <= a.len().min(b.len()));
        prop_assert!(is_subsequence(&common, &a));
        prop_assert!(is_subsequence(&common, &b));
        prop_assert_eq!(lcs(&b, &a).len(), common.len());
        prop_assert_eq!(lcs(&a, &a), a.clone());
    }

    #[test]
    fn pair_scores_are_bounded(original in small_labels(), extracted in prop::collection::vec(small_labels(), 0..5)) {
        prop_assume!(!original.is_empty());
        let table = score_pairs(&original, &extracted).unwrap();
        let total: usize = table.iter().map(|(_, _, c)| c).sum();
        let bound: usize = extracted.iter().map(|e| lcs(&original, e).len().saturating_sub(1)).sum();
        prop_assert_eq!(total, bound);
    }

    #[test]
    fn f_score_is_symmetric_and_bounded(pairs in prop::collection::vec((0usize..4, 0usize..4), 1..40)) {
        let (truth, decoded): (Vec<usize>, Vec<usize>) = pairs.into_iter().unzip();
        let f = f_score(&truth, &decoded).unwrap();
        prop_assert!((0.0..=1.0).contains(&f));
        prop_assert_eq!(f, f_score(&decoded, &truth).unwrap());
        prop_assert_eq!(f_score(&truth, &truth).unwrap(), 1.0);
    }

    #[test]
    fn wider_windows_verify_supersets(spec in noisy_spec(), w in 1u64..300, extra in 0u64..300) {
        let sim = generate(&spec).unwrap();
        let narrow = extract_verified(&sim.events, &sim.evidence, WindowConfig::new(w).unwrap());
        let wide = extract_verified(&sim.events, &sim.evidence, WindowConfig::new(w + extra).unwrap());
        let wide_times: Vec<u64> = wide.entries.iter().map(|e| e.timestamp_ms).collect();
        for e in &narrow.entries {
            prop_assert!(wide_times.contains(&e.timestamp_ms));
        }
        for seq in [&narrow, &wide] {
            prop_assert_eq!(seq.len() + seq.discarded_count, sim.events.len());
        }
    }

    #[test]
    fn trace_text_round_trips(spec in noisy_spec()) {
        let sim = generate(&spec).unwrap();
        let mut buf = Vec::new();
        write_trace(&sim.events, &sim.evidence, &mut buf).unwrap();
        let parsed = parse_trace_str(std::str::from_utf8(&buf).unwrap()).unwrap();
        prop_assert_eq!(parsed.events, sim.events);
        prop_assert_eq!(parsed.evidence, sim.evidence);
    }

    #[test]
    fn generation_is_deterministic(spec in noisy_spec()) {
        prop_assert_eq!(generate(&spec).unwrap(), generate(&spec).unwrap());
    }
}
