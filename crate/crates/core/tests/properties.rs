use proptest::prelude::*;

use mft_core::io::{
    format_change_points, format_spike_train, parse_change_points, parse_spike_train,
};
use mft_core::limit::{decode_table, encode_table, threshold_q};
use mft_core::model_spec::{format_model_spec, parse_model_spec, ModelSpec};
use mft_core::simulate::{GammaRenewal, IsiModel, JitterModel};
use mft_core::{SpikeTrain, WindowSet};

/// Strictly increasing positive times inside `(0, T]`.
fn train_strategy() -> impl Strategy<Value = SpikeTrain> {
    (prop::collection::vec(1e-3f64..2.0, 1..200), 0.0f64..5.0).prop_map(|(gaps, tail)| {
        let mut t = 0.0;
        let times: Vec<f64> = gaps
            .iter()
            .map(|g| {
                t += g;
                t
            })
            .collect();
        SpikeTrain::new(times, t + tail).unwrap()
    })
}

proptest! {
    #[test]
    fn isis_sum_back_to_times(train in train_strategy()) {
        let isis = train.isis();
        let cum = isis.cumulative_times();
        prop_assert_eq!(cum.len(), train.len());
        for (c, s) in cum.iter().zip(train.times()) {
            prop_assert!((c - s).abs() <= 1e-9 * s.max(1.0));
        }
        prop_assert!(isis.values().iter().all(|&x| x > 0.0));
    }

    #[test]
    fn counts_are_half_open(train in train_strategy(), a in 0.0f64..1.0, b in 0.0f64..1.0) {
        let t = train.duration();
        let (a, b) = if a <= b { (a * t, b * t) } else { (b * t, a * t) };
        let direct = train.times().iter().filter(|&&s| s > a && s <= b).count();
        prop_assert_eq!(train.count_events(a, b).unwrap(), direct);
        // an event sitting on the right edge counts, on the left edge it does not
        let s = train.times()[train.len() / 2];
        let left = train.count_events(0.0, s).unwrap();
        let right = train.count_events(s, t).unwrap();
        prop_assert_eq!(left + right, train.len());
        prop_assert_eq!(train.count_up_to(s), left);
    }

    #[test]
    fn adjacent_windows_share_no_interval(train in train_strategy(), u in 0.05f64..0.95) {
        let t = train.duration();
        let mid = u * t;
        let le = train.window_isis(0.0, mid).unwrap();
        let ri = train.window_isis(mid, t).unwrap();
        let l = le.indices();
        let r = ri.indices();
        prop_assert!(l.end <= r.start || l.is_empty() || r.is_empty());
        // every interval in a window lies inside it
        let times = train.times();
        for j in r.clone() {
            prop_assert!(j >= 1 && times[j - 1] > mid && times[j] <= t);
        }
        for j in l.clone() {
            prop_assert!(j >= 1 && times[j] <= mid);
        }
        // the intervals dropped between the two sides are the first one and the one straddling `mid`
        let lost = train.len() - le.len() - ri.len();
        prop_assert!(lost <= 2, "lost {}", lost);
    }

    #[test]
    fn spike_file_round_trip(train in train_strategy()) {
        let back = parse_spike_train(&format_spike_train(&train)).unwrap();
        prop_assert_eq!(back, train);
    }

    #[test]
    fn change_point_round_trip(mut cps in prop::collection::vec(0.0f64..1e4, 0..20)) {
        cps.sort_by(f64::total_cmp);
        cps.dedup();
        prop_assert_eq!(parse_change_points(&format_change_points(&cps)).unwrap(), cps);
    }

    #[test]
    fn spike_parser_never_panics(text in "[0-9eE#T=. +\\-\\n]{0,200}") {
        let _ = parse_spike_train(&text);
        let _ = parse_change_points(&text);
    }

    #[test]
    fn model_spec_round_trip(mean in 0.01f64..2.0, cv in 0.05f64..2.0, nu in 0.05f64..1.0, f in 0.0f64..0.3) {
        for model in [
            IsiModel::Renewal(GammaRenewal { mean, sd: cv * mean }),
            IsiModel::Jitter(JitterModel { nu, sigma1: f * nu, sigma2: f * nu / 2.0 }),
        ] {
            let spec = ModelSpec::Stationary(model);
            let back = parse_model_spec(&format_model_spec(&spec).unwrap()).unwrap();
            prop_assert_eq!(back, spec);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn table_encoding_round_trip(seed in any::<u64>(), alpha in 0.01f64..0.2) {
        let ws = WindowSet::new(&[5.0, 10.0], 40.0, None).unwrap();
        let table = threshold_q(&ws, alpha, 50, seed).unwrap();
        let back = decode_table(&encode_table(&table).unwrap()).unwrap();
        prop_assert_eq!(&back, &table);
        back.check_matches(&ws).unwrap();
    }
}
