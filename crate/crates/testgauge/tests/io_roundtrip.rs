use proptest::prelude::*;
use testgauge::{parse_report, parse_response_matrix, render_report, write_response_matrix, AnalysisReport, ParseOptions, RenderFormat};
use testgauge_core::classical::{item_statistics, reliability_kr20, CriterionSource, DEFAULT_GROUP_FRACTION};
use testgauge_core::quanta::{quanta_report, ErrorDistribution};
use testgauge_core::{OmitPolicy, ResponseCell, ResponseMatrix};

fn cell() -> impl Strategy<Value = ResponseCell> {
    prop_oneof![
        Just(ResponseCell::Correct),
        Just(ResponseCell::Incorrect),
        Just(ResponseCell::Omitted),
        Just(ResponseCell::NotAdministered),
    ]
}

fn matrix() -> impl Strategy<Value = ResponseMatrix> {
    (1usize..8, 1usize..6, any::<bool>()).prop_flat_map(|(n, k, with_criterion)| {
        (
            prop::collection::vec(cell(), n * k),
            prop::collection::vec(-1e6f64..1e6, n),
            prop::collection::vec("[a-z ,\"]{1,6}", k),
        )
            .prop_map(move |(cells, criterion, names)| {
                let examinees = (0..n).map(|i| format!("e{i}")).collect();
                // Prefix keeps ids unique and distinct from the criterion header.
                let items = names.iter().enumerate().map(|(j, s)| format!("{j}{s}")).collect();
                ResponseMatrix::new(examinees, items, cells, with_criterion.then_some(criterion)).unwrap()
            })
    })
}

proptest! {
    #[test]
    fn csv_round_trip(m in matrix()) {
        let text = write_response_matrix(&m).unwrap();
        let parsed = parse_response_matrix(&text, &ParseOptions::default()).unwrap();
        prop_assert_eq!(&parsed, &m);
        prop_assert_eq!(write_response_matrix(&parsed).unwrap(), text);
    }

    #[test]
    fn report_json_round_trip(m in matrix(), r in 0.0f64..0.999) {
        let report = AnalysisReport {
            items: Some(
                item_statistics(&m, CriterionSource::CorrectedItemTotal, OmitPolicy::OmitAsWrong, DEFAULT_GROUP_FRACTION)
                    .into_iter()
                    .map(|stats| testgauge::report::ItemReport { stats, screening: None, discrimination_screening: None })
                    .collect(),
            ),
            reliability: reliability_kr20(&m, OmitPolicy::OmitAsWrong).ok(),
            quanta: Some(vec![quanta_report(r, Some(m.examinee_count() as u64 + 1), ErrorDistribution::Normal).unwrap()]),
            ..AnalysisReport::default()
        };
        let text = render_report(&report, RenderFormat::Json).unwrap();
        prop_assert_eq!(&parse_report(&text).unwrap(), &report);
        prop_assert_eq!(render_report(&report, RenderFormat::Json).unwrap(), text);
    }
}
