use ethkb_core::observation::{
    Dataset, MappingRecord, MappingSet, ObservationItem, RedundancyGrouping, ScopeVoteRecord,
    SourceSet,
};
use ethkb_core::pipeline::{
    apply_scope_votes, merge_redundant, raw_counts, run_pipeline, Bundle, MergeConfig, Stage,
};
use ethkb_core::report::{format_table, ReportFormat};
use ethkb_core::MappingLabel;
use proptest::prelude::*;

#[derive(Debug, Clone)]
struct SideSpec {
    /// label index, secondary ref count, vote
    items: Vec<(usize, usize, Option<[bool; 3]>)>,
    /// group sizes taken from a shuffled item order, plus bridging members
    groups: Vec<usize>,
    bridges: Vec<(usize, usize)>,
    shuffle: Vec<u32>,
}

fn arb_side() -> impl Strategy<Value = SideSpec> {
    (
        prop::collection::vec(
            (0usize..4, 1usize..15, prop::option::of(any::<[bool; 3]>())),
            1..40,
        ),
        prop::collection::vec(2usize..5, 0..8),
        prop::collection::vec((any::<usize>(), any::<usize>()), 0..3),
        prop::collection::vec(any::<u32>(), 40),
    )
        .prop_map(|(items, groups, bridges, shuffle)| SideSpec {
            items,
            groups,
            bridges,
            shuffle,
        })
}

fn build_side(
    set: SourceSet,
    spec: &SideSpec,
    other_len: usize,
) -> (
    Dataset,
    MappingSet,
    Vec<ScopeVoteRecord>,
    RedundancyGrouping,
) {
    let id = |i: usize| format!("{}{}", set.as_str(), i + 1);
    let other = |i: usize| format!("{}{}", set.other().as_str(), i % other_len + 1);
    let dataset = Dataset {
        name: format!("generated-{}", set.as_str()),
        source_set: set,
        subject_paper: "generated".into(),
        critique: None,
        items: (0..spec.items.len())
            .map(|i| ObservationItem {
                id: id(i),
                source_set: set,
                text: format!("item {i}"),
                kb_leaf_ref: None,
                parent_id: None,
                excluded: false,
                annotation: None,
            })
            .collect(),
    };
    let records = spec.items.iter().enumerate().map(|(i, &(label, refs, _))| {
        let label = MappingLabel::ALL[label];
        let secondary_refs = if matches!(label, MappingLabel::PlusAlpha | MappingLabel::Shared) {
            (0..refs)
                .map(|r| other(i + r))
                .collect::<std::collections::BTreeSet<_>>()
                .into_iter()
                .collect()
        } else {
            Vec::new()
        };
        MappingRecord {
            primary_item: id(i),
            label,
            secondary_refs,
            rationale: None,
        }
    });
    let mapping = MappingSet::from_records(set, records, other_len);
    let votes = spec
        .items
        .iter()
        .enumerate()
        .filter_map(|(i, (_, _, v))| v.map(|v| ScopeVoteRecord::new(id(i), v)))
        .collect();

    let mut order: Vec<usize> = (0..spec.items.len()).collect();
    order.sort_by_key(|&i| (spec.shuffle[i], i));
    let mut groups: Vec<Vec<String>> = Vec::new();
    let mut cursor = 0;
    for &size in &spec.groups {
        if cursor + size > order.len() {
            break;
        }
        groups.push(
            order[cursor..cursor + size]
                .iter()
                .map(|&i| id(i))
                .collect(),
        );
        cursor += size;
    }
    if groups.len() >= 2 {
        for &(g, m) in &spec.bridges {
            let from = g % groups.len();
            let to = (from + 1) % groups.len();
            let member = groups[from][m % groups[from].len()].clone();
            if !groups[to].contains(&member) {
                groups[to].push(member);
            }
        }
    }
    (
        dataset,
        mapping,
        votes,
        RedundancyGrouping {
            dataset: set,
            groups,
        },
    )
}

fn build_bundle(e: &SideSpec, t: &SideSpec) -> Bundle {
    let (dataset_e, mapping_e, votes_e, grouping_e) = build_side(SourceSet::E, e, t.items.len());
    let (dataset_t, mapping_t, votes_t, grouping_t) = build_side(SourceSet::T, t, e.items.len());
    Bundle {
        subject_paper: "generated".into(),
        dataset_e,
        dataset_t,
        mapping_e,
        mapping_t,
        votes_e,
        votes_t,
        grouping_e,
        grouping_t,
    }
}

fn arb_config() -> impl Strategy<Value = MergeConfig> {
    (prop::option::of(1u32..12), 0u32..4, 0u32..4).prop_map(|(threshold, wu, wa)| MergeConfig {
        broad_link_threshold: threshold.map(ethkb_core::pipeline::BroadLinkThreshold::Count),
        weight_unique: wu as f64 * 0.5,
        weight_plus_alpha: wa as f64 * 0.5,
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn total_is_constant_through_voting_and_non_increasing_after_merge(
        e in arb_side(), t in arb_side(), config in arb_config()
    ) {
        let bundle = build_bundle(&e, &t);
        let table = run_pipeline(&bundle, &config).unwrap();
        for side in [SourceSet::E, SourceSet::T] {
            let g = |s: Stage| table.stage(s).result.side(side).counts.total();
            prop_assert_eq!(g(Stage::Raw), g(Stage::NoOutOfScope));
            prop_assert!(g(Stage::NoRedundancy) <= g(Stage::NoOutOfScope));
            let oos = |s: Stage| table.stage(s).result.side(side).counts.out_of_scope;
            prop_assert!(oos(Stage::NoOutOfScope) >= oos(Stage::Raw));
        }
    }

    #[test]
    fn merged_total_is_groups_plus_ungrouped(e in arb_side(), config in arb_config()) {
        let (_, mapping, votes, grouping) = build_side(SourceSet::E, &e, 30);
        let voted = apply_scope_votes(&mapping, &votes).unwrap().mapping;
        let merged = merge_redundant(&voted, &grouping, &config).unwrap();
        let grouped: std::collections::HashSet<&String> = grouping.groups.iter().flatten().collect();
        let expect = grouping.groups.len() + mapping.len() - grouped.len();
        prop_assert_eq!(merged.side.counts.total() as usize, expect);
        prop_assert_eq!(merged.side.items.len(), expect);
    }

    #[test]
    fn labeler_out_of_scope_always_stays_out_of_scope(e in arb_side()) {
        let (_, mapping, votes, _) = build_side(SourceSet::E, &e, 30);
        let voted = apply_scope_votes(&mapping, &votes).unwrap().mapping;
        for record in mapping.records() {
            let after = voted.record(&record.primary_item).unwrap().label;
            let vote = votes.iter().find(|v| v.item_id == record.primary_item);
            let voted_out = vote.is_some_and(|v| !v.majority_in_scope());
            let expect_out = voted_out || record.label == MappingLabel::OutOfScope;
            prop_assert_eq!(after == MappingLabel::OutOfScope, expect_out);
            if !expect_out {
                prop_assert_eq!(after, record.label);
            }
        }
        prop_assert_eq!(raw_counts(&voted).total(), raw_counts(&mapping).total());
    }

    #[test]
    fn metrics_rows_satisfy_identities(e in arb_side(), t in arb_side(), config in arb_config()) {
        let bundle = build_bundle(&e, &t);
        let table = run_pipeline(&bundle, &config).unwrap();
        for report in &table.stages {
            for row in [&report.metrics.e, &report.metrics.t] {
                let c = row.counts;
                prop_assert_eq!(row.in_scope, c.unique + c.plus_alpha + c.shared);
                prop_assert_eq!(row.total, row.in_scope + c.out_of_scope);
                let s_plus = config.weight_unique * c.unique as f64 + config.weight_plus_alpha * c.plus_alpha as f64;
                prop_assert!((row.coverage - s_plus).abs() < 1e-9);
                prop_assert_eq!(row.efficiency.is_none(), row.total == 0);
            }
        }
    }

    #[test]
    fn default_weights_keep_coverage_within_in_scope(e in arb_side(), t in arb_side()) {
        let bundle = build_bundle(&e, &t);
        let table = run_pipeline(&bundle, &MergeConfig::default()).unwrap();
        for report in &table.stages {
            for row in [&report.metrics.e, &report.metrics.t] {
                prop_assert_eq!(row.coverage, (row.counts.unique + row.counts.plus_alpha) as f64);
                prop_assert!(row.coverage <= row.in_scope as f64);
            }
        }
    }

    #[test]
    fn zero_plus_alpha_weight_counts_unique_only(e in arb_side(), t in arb_side()) {
        let bundle = build_bundle(&e, &t);
        let config = MergeConfig { weight_plus_alpha: 0.0, ..MergeConfig::default() };
        let table = run_pipeline(&bundle, &config).unwrap();
        for report in &table.stages {
            prop_assert_eq!(report.metrics.e.coverage, report.metrics.e.counts.unique as f64);
        }
    }

    #[test]
    fn reports_are_deterministic(e in arb_side(), t in arb_side(), config in arb_config()) {
        let a = build_bundle(&e, &t);
        let b = build_bundle(&e, &t);
        let ta = run_pipeline(&a, &config).unwrap();
        let tb = run_pipeline(&b, &config).unwrap();
        for format in [ReportFormat::Text, ReportFormat::Csv, ReportFormat::Json] {
            prop_assert_eq!(format_table(std::slice::from_ref(&ta), format), format_table(std::slice::from_ref(&tb), format));
        }
    }
}

#[test]
fn empty_votes_and_groupings_give_three_identical_stages() {
    let spec = SideSpec {
        items: vec![(0, 1, None), (1, 2, None), (2, 1, None), (3, 1, None)],
        groups: vec![],
        bridges: vec![],
        shuffle: vec![0; 40],
    };
    let bundle = build_bundle(&spec, &spec);
    let table = run_pipeline(&bundle, &MergeConfig::default()).unwrap();
    let counts: Vec<_> = table
        .stages
        .iter()
        .map(|s| (s.result.e.counts, s.result.t.counts))
        .collect();
    assert!(counts.windows(2).all(|w| w[0] == w[1]));
}
