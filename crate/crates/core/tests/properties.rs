mod common;

use chrono::NaiveDate;
use proptest::prelude::*;

use overrun_lint::cfg::{build_cfgs, complexity_bd, complexity_en, reachability, unreachable_nodes, EXIT};
use overrun_lint::detectors::{analyze_unit, find_duplicates, PriorityColor, RankBand, RuleSet};
use overrun_lint::frontend::parse_source;
use overrun_lint::reporting::{
    annotate_source, coverage_percent, efficiency_rate, is_reviewed, render, Format, Report, ReviewAnnotation, Scale,
};

use common::*;

fn review(rule: &str) -> ReviewAnnotation {
    ReviewAnnotation {
        rule_id: rule.to_string(),
        reviewer: "QA".to_string(),
        time: NaiveDate::from_ymd_opt(2012, 3, 28)
            .unwrap()
            .and_hms_opt(9, 30, 0)
            .unwrap(),
    }
}

proptest! {
    #[test]
    fn complexity_formulas_agree(seed in any::<u64>()) {
        let m = generate_method(seed);
        let unit = parse_source(&method_source(&m.body), "g.sl").unwrap();
        let g = &build_cfgs(&unit)[0];
        prop_assert_eq!(complexity_en(g), complexity_bd(g));
        prop_assert_eq!(complexity_bd(g), m.binary_decisions as i64 + 1);
    }

    #[test]
    fn try_catch_does_not_change_complexity(seed in any::<u64>()) {
        let m = generate_method(seed);
        let plain = parse_source(&method_source(&m.body), "g.sl").unwrap();
        let wrapped = parse_source(&method_source(&wrapped_in_try(&m.body)), "g.sl").unwrap();
        let (p, w) = (&build_cfgs(&plain)[0], &build_cfgs(&wrapped)[0]);
        prop_assert_eq!(complexity_en(p), complexity_en(w));
        prop_assert_eq!(complexity_bd(p), complexity_bd(w));
    }

    #[test]
    fn structured_code_is_fully_reachable(seed in any::<u64>()) {
        let m = generate_method(seed);
        let unit = parse_source(&method_source(&m.body), "g.sl").unwrap();
        let g = &build_cfgs(&unit)[0];
        let closure = reachability(g);
        prop_assert!(unreachable_nodes(g, &closure).is_empty());
        prop_assert!(closure[0][EXIT]);
    }

    #[test]
    fn coverage_percent_bounds(covered in 0u64..10_000, missed in 0u64..10_000) {
        prop_assume!(covered + missed > 0);
        let p = coverage_percent(covered, missed).unwrap();
        prop_assert!((0.0..=100.0).contains(&p));
        let exact = 100.0 * covered as f64 / (covered + missed) as f64;
        prop_assert!((p - exact).abs() <= 0.05 + 1e-9);
        prop_assert_eq!(p == 100.0, exact >= 99.95);
    }

    #[test]
    fn efficiency_scales_agree(warnings in 0u64..5_000, loc in 1u64..50_000) {
        let per100 = efficiency_rate(warnings, loc, Scale::Per100).unwrap();
        let per1000 = efficiency_rate(warnings, loc, Scale::Per1000).unwrap();
        prop_assert!((per1000 - 10.0 * per100).abs() <= 0.5 + 1e-9);
        prop_assert!(per100 >= 0.0);
    }

    #[test]
    fn annotation_is_idempotent_and_suppresses(file_idx in 0usize..13, line_frac in 0.0f64..1.0) {
        let files = corpus_files();
        let name = &files[file_idx % files.len()];
        let src = corpus_source(name);
        let lines = src.lines().count() as u32;
        let line = 1 + ((lines - 1) as f64 * line_frac) as u32;
        let once = annotate_source(&src, line, &review("SystemPrintln")).unwrap();
        let twice = annotate_source(&once, line + 1, &review("SystemPrintln")).unwrap();
        prop_assert_eq!(&once, &twice);
        prop_assert_eq!(once.lines().count(), src.lines().count() + 1);
        prop_assert!(is_reviewed(&once, line + 1, "SystemPrintln"));
        prop_assert!(parse_source(&once, name.as_str()).is_ok());
    }

    #[test]
    fn finding_fields_are_consistent(file_idx in 0usize..13) {
        let files = corpus_files();
        let name = &files[file_idx % files.len()];
        let unit = parse_source(&corpus_source(name), name.as_str()).unwrap();
        let findings = analyze_unit(&unit, &RuleSet::default());
        for f in &findings {
            prop_assert!((1..=5).contains(&f.priority));
            prop_assert!((1..=20).contains(&f.rank));
            prop_assert_eq!(f.priority_color, PriorityColor::of(f.priority));
            prop_assert_eq!(f.rank_band, RankBand::of(f.rank));
        }
        let keys: Vec<_> = findings.iter().map(|f| (f.span.line, f.rule_id.clone(), f.span.column)).collect();
        let mut sorted = keys.clone();
        sorted.sort();
        prop_assert_eq!(keys, sorted);
        let report = Report::new(findings.clone(), NaiveDate::from_ymd_opt(2020, 1, 1).unwrap().and_hms_opt(0, 0, 0).unwrap());
        prop_assert_eq!(report.category_summary.values().sum::<usize>(), findings.len());
        let csv = render(&report, Format::Csv);
        prop_assert_eq!(csv.lines().count(), findings.len() + 1);
    }

    #[test]
    fn clone_pairs_meet_threshold(min in 10usize..80) {
        let units: Vec<_> = corpus_files()
            .iter()
            .map(|n| parse_source(&corpus_source(n), n.as_str()).unwrap())
            .collect();
        let pairs = find_duplicates(&units, min);
        for p in &pairs {
            prop_assert!(p.token_length >= min);
        }
        // Raising the threshold never adds pairs.
        prop_assert!(find_duplicates(&units, min + 10).len() <= pairs.len());
    }
}
