mod common;

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use reactscope::analysis::*;
use reactscope::ingest::ReactionRecord;
use reactscope::model::{train, Dataset, Model, ModelConfig, TrainOptions};
use reactscope::{Platform, ReactionType, SourceClass, SourceGroup};

use ReactionType::*;

fn labeled(platform: Platform, class: SourceClass, key: &str, t: ReactionType, delay: i64) -> LabeledReaction {
    LabeledReaction {
        record: ReactionRecord {
            platform,
            reaction_id: format!("{key}-{t}-{delay}"),
            parent_id: "p".into(),
            source_key: key.into(),
            reaction_text: "x".into(),
            parent_text: "y".into(),
            parent_created_at: 1_000,
            reaction_created_at: 1_000 + delay,
        },
        reaction_type: t,
        probability: 1.0,
        source_class: class,
    }
}

#[test]
fn annotation_table_percentages() {
    // Resolved counts in label order plus the no-majority items.
    let counts = [3_857, 32_561, 6_973, 2_654, 14_966, 1_878, 1_473, 8_194, 1_538];
    let d = TypeDistribution::from_counts_with_unresolved("annotated", None, counts, 9_532).unwrap();
    assert_eq!(d.total, 83_626);
    let printed = [
        (Agreement, 4.61),
        (Answer, 38.94),
        (Appreciation, 8.34),
        (Disagreement, 3.17),
        (Elaboration, 17.90),
        (Humor, 2.25),
        (NegativeReaction, 1.76),
        (Other, 1.84),
        (Question, 9.80),
    ];
    for (t, p) in printed {
        assert!((d.percent_of(t) - p).abs() <= 0.005, "{t}: {}", d.percent_of(t));
    }
    assert!((d.unresolved_percent() - 11.40).abs() <= 0.005);
}

#[test]
fn two_type_distribution() {
    let mut rows: Vec<_> = (0..5).map(|i| labeled(Platform::Reddit, SourceClass::Trusted, "a", Answer, i)).collect();
    rows.extend((0..5).map(|i| labeled(Platform::Reddit, SourceClass::Trusted, "a", Question, i)));
    let d = type_distribution(&rows, SourceGroup::TRUSTED, Platform::Reddit).unwrap();
    assert_eq!(d.percent_of(Answer), 50.0);
    assert_eq!(d.percent_of(Question), 50.0);
    assert_eq!(d.percent.iter().sum::<f64>(), 100.0);
    rows.reverse();
    assert_eq!(type_distribution(&rows, SourceGroup::TRUSTED, Platform::Reddit).unwrap(), d);
    assert!(matches!(
        type_distribution(&rows, SourceGroup::DeceptiveAll, Platform::Reddit),
        Err(AnalysisError::EmptyGroup { .. })
    ));
}

proptest! {
    #[test]
    fn percentages_sum_to_100(counts in proptest::array::uniform9(0u64..10_000), seed in any::<u64>()) {
        prop_assume!(counts.iter().sum::<u64>() > 0);
        let d = TypeDistribution::from_counts("g", None, counts).unwrap();
        prop_assert!((d.percent.iter().sum::<f64>() - 100.0).abs() < 1e-6);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut rows = Vec::new();
        for (i, &c) in counts.iter().enumerate().take(3) {
            for _ in 0..c.min(50) {
                rows.push(labeled(Platform::Twitter, SourceClass::Propaganda, "s", ReactionType::ALL[i], 0));
            }
        }
        if !rows.is_empty() {
            let a = type_distribution(&rows, SourceGroup::DeceptiveAll, Platform::Twitter).unwrap();
            rows.shuffle(&mut rng);
            prop_assert_eq!(type_distribution(&rows, SourceGroup::DeceptiveAll, Platform::Twitter).unwrap(), a);
        }
    }

    #[test]
    fn cdf_is_monotone_and_ends_at_one(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let delays: Vec<i64> = (0..10_000).map(|_| rng.gen_range(0..500_000)).collect();
        let cdf = delay_cdf(&delays, 3_600).unwrap();
        prop_assert!(cdf.points.windows(2).all(|w| w[0].1 <= w[1].1));
        prop_assert_eq!(cdf.points.last().unwrap().1, 1.0);
        prop_assert!(cdf.points.iter().enumerate().all(|(k, p)| p.0 == (k as u64 + 1) * 3_600));
    }

    #[test]
    fn mwu_swap_symmetry_and_shift_invariance(
        a in proptest::collection::vec(0i64..50, 1..40),
        b in proptest::collection::vec(0i64..50, 1..40),
        shift in 0i64..100_000,
    ) {
        let af: Vec<f64> = a.iter().map(|&v| v as f64).collect();
        let bf: Vec<f64> = b.iter().map(|&v| v as f64).collect();
        let ab = mann_whitney_u(&af, &bf, MwuMethod::Auto).unwrap();
        let ba = mann_whitney_u(&bf, &af, MwuMethod::Auto).unwrap();
        prop_assert_eq!(ab.u1 + ab.u2, (a.len() * b.len()) as f64);
        prop_assert_eq!((ab.u1, ab.u2), (ba.u2, ba.u1));
        prop_assert_eq!(ab.z, -ba.z);
        prop_assert!((ab.p - ba.p).abs() < 1e-12);
        prop_assert!(ab.p > 0.0 && ab.p <= 1.0);
        let shifted = |v: &[f64]| v.iter().map(|x| x + shift as f64).collect::<Vec<_>>();
        let s = mann_whitney_u(&shifted(&af), &shifted(&bf), MwuMethod::Auto).unwrap();
        prop_assert_eq!((s.u1, s.z, s.p), (ab.u1, ab.z, ab.p));
    }
}

/// Brute-force pair counting: U1 = #{a > b} + ½ #{a = b}.
fn u_by_pairs(a: &[f64], b: &[f64]) -> f64 {
    a.iter().flat_map(|x| b.iter().map(move |y| if x > y { 1.0 } else if x == y { 0.5 } else { 0.0 })).sum()
}

#[test]
fn mwu_u_matches_pair_counting() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..200 {
        let n1 = rng.gen_range(1..15);
        let n2 = rng.gen_range(1..15);
        let a: Vec<f64> = (0..n1).map(|_| rng.gen_range(0..10) as f64).collect();
        let b: Vec<f64> = (0..n2).map(|_| rng.gen_range(0..10) as f64).collect();
        assert_eq!(mann_whitney_u(&a, &b, MwuMethod::Auto).unwrap().u1, u_by_pairs(&a, &b));
    }
}

#[test]
fn exact_p_matches_enumeration_of_rank_assignments() {
    // a = [1,2], b = [3,4]: of the 6 equally likely rank pairs for `a`,
    // U ∈ {0,1,2,2,3,4}; |U − 2| ≥ 2 for U ∈ {0,4}.
    let r = mann_whitney_u(&[1.0, 2.0], &[3.0, 4.0], MwuMethod::Exact).unwrap();
    assert_eq!(r.p, 2.0 / 6.0);
    let n = mann_whitney_u(&[1.0, 2.0], &[3.0, 4.0], MwuMethod::Normal).unwrap();
    assert_eq!(n.method, MwuMethodUsed::NormalApprox);
}

#[test]
fn reddit_trusted_frequent_types() {
    let mut percent = [1.0; 9];
    for (t, p) in [(Elaboration, 56.25), (Question, 20.97), (Answer, 12.39), (Appreciation, 5.65), (Other, 5.16)] {
        percent[t.index()] = p;
    }
    let d = TypeDistribution { group: "trusted".into(), platform: Some(Platform::Reddit), counts: [0; 9], unresolved: 0, total: 1, percent };
    assert_eq!(frequent_types(&d, 5.0), vec![Elaboration, Question, Answer, Appreciation, Other]);
    assert_eq!(frequent_types(&d, 0.0).len(), 9);
    let single = TypeDistribution::from_counts("g", None, [0, 0, 0, 0, 0, 7, 0, 0, 0]).unwrap();
    assert_eq!(frequent_types(&single, 5.0), vec![Humor]);
}

fn shifted_corpus(shift: i64, seed: u64) -> Vec<LabeledReaction> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::new();
    let classes = [
        (SourceClass::Trusted, 0),
        (SourceClass::Clickbait, shift),
        (SourceClass::Propaganda, shift),
        (SourceClass::Disinformation, shift),
    ];
    for (class, extra) in classes {
        for s in 0..4 {
            for _ in 0..150 {
                let t = [Answer, Elaboration, Question][rng.gen_range(0..3)];
                let delay = (-(1.0 - rng.gen::<f64>()).ln() * 7_200.0) as i64 + extra;
                rows.push(labeled(Platform::Twitter, class, &format!("{class}_{s}"), t, delay));
            }
        }
    }
    rows
}

#[test]
fn constructed_shift_is_detected() {
    let rows = shifted_corpus(3_600, 1);
    let report = compare_groups(&rows, Platform::Twitter, &CompareOptions::default()).unwrap();
    let overall: Vec<_> = report.delay_tests.iter().filter(|t| t.reaction_type.is_none()).collect();
    assert_eq!(overall.len(), 2);
    assert!(overall.iter().all(|t| t.significant));
    let trusted = report.cdfs.iter().find(|c| c.group == "trusted" && c.reaction_type.is_none()).unwrap();
    let deceptive = report.cdfs.iter().find(|c| c.group == "deceptive_all" && c.reaction_type.is_none()).unwrap();
    assert!(trusted.series.dominates(&deceptive.series));
    assert!(report.mwu_csv().lines().skip(1).any(|l| l.ends_with(",true")));
}

#[test]
fn identical_groups_are_not_flagged() {
    let mut rows = Vec::new();
    for class in [SourceClass::Trusted, SourceClass::Conspiracy] {
        for s in 0..3 {
            for d in 0..60 {
                let t = [Answer, Question][d as usize % 2];
                rows.push(labeled(Platform::Reddit, class, &format!("{class}{s}"), t, d * 100));
            }
        }
    }
    let report = compare_groups(&rows, Platform::Reddit, &CompareOptions::default()).unwrap();
    let ran: Vec<_> = report.delay_tests.iter().filter_map(|t| t.result.as_ref()).collect();
    assert!(!ran.is_empty());
    assert!(ran.iter().all(|r| (r.p - 1.0).abs() < 1e-12));
    assert!(report.delay_tests.iter().all(|t| !t.significant));
    assert!(report.proportion_tests.iter().all(|t| !t.significant));
}

#[test]
fn report_echoes_distributions_and_skips_small_groups() {
    let mut rows = shifted_corpus(0, 2);
    rows.retain(|r| r.source_class != SourceClass::Propaganda || r.reaction_type != Question || r.delay_secs() % 7 == 0);
    let options = CompareOptions { min_group_size: 30, ..Default::default() };
    let report = compare_groups(&rows, Platform::Twitter, &options).unwrap();
    for d in &report.distributions {
        let group: SourceGroup = d.group.parse().unwrap();
        assert_eq!(d, &type_distribution(&rows, group, Platform::Twitter).unwrap());
    }
    let strict = CompareOptions { min_group_size: 10_000, ..Default::default() };
    let report = compare_groups(&rows, Platform::Twitter, &strict).unwrap();
    assert!(report.delay_tests.iter().all(|t| t.skipped.is_some() && t.result.is_none()));

    let dir = tempfile::tempdir().unwrap();
    report.write_to(dir.path()).unwrap();
    let mwu = std::fs::read_to_string(dir.path().join("mwu_summary.csv")).unwrap();
    assert!(mwu.starts_with("group_a,group_b,type,U,z,p,significant\n"));
    let dist = std::fs::read_to_string(dir.path().join("dist_trusted.csv")).unwrap();
    assert!(dist.starts_with("type,percent,count\n"));
    let cdf = std::fs::read_to_string(dir.path().join("cdf_trusted_all.csv")).unwrap();
    assert!(cdf.starts_with("t_seconds,fraction\n3600,"));
}

#[test]
fn single_group_corpus_is_rejected() {
    let rows = vec![labeled(Platform::Reddit, SourceClass::Trusted, "a", Answer, 5)];
    assert!(matches!(
        compare_groups(&rows, Platform::Reddit, &CompareOptions::default()),
        Err(AnalysisError::InsufficientGroups(_))
    ));
}

#[test]
fn corpus_labeling_matches_direct_prediction() {
    let s = common::setup(1_000, 8, 12);
    let data = Dataset::from_samples(&s.encoder, &s.fixture.samples[..300]);
    let cfg = ModelConfig { max_epochs: 1, ..common::config(8) };
    let model = Model::build(cfg, &s.embeddings, &s.encoder).unwrap();
    let (model, _) = train(model, &data, &data, &TrainOptions::default()).unwrap();

    let records = &s.fixture.records;
    let out = label_corpus(&model, &s.encoder, records, &s.fixture.registry).unwrap();
    assert_eq!(out.labeled.len(), 1_000);
    assert_eq!(out.unattributed, 0);
    let direct = model
        .predict(&s.encoder.encode_batch(&records.iter().map(|r| r.to_sample()).collect::<Vec<_>>()))
        .unwrap();
    for (l, p) in out.labeled.iter().zip(&direct) {
        assert_eq!(l.reaction_type, p.label);
        assert_eq!(l.probability, p.probability);
    }

    let empty = label_corpus(&model, &s.encoder, &[], &s.fixture.registry).unwrap();
    assert!(empty.labeled.is_empty());
    let unknown = reactscope::ingest::SourceRegistry::new();
    let dropped = label_corpus(&model, &s.encoder, records, &unknown).unwrap();
    assert!(dropped.labeled.is_empty());
    assert_eq!(dropped.unattributed, records.len());
}
