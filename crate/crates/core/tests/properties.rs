use auction_core::baselines::{run_greedy, run_random};
use auction_core::engine::run_traced;
use auction_core::metrics::summarize;
use auction_core::model::{emit_instance, emit_schedule, parse_instance, parse_schedule, validate_instance, validate_schedule};
use auction_core::online::check_event_grammar;
use auction_core::workload::{generate, linear_slack, GeneratorSpec, PriceBasis, PriceModel};
use auction_core::engine::Strategy as Eviction;
use auction_core::{run_offline, run_online, EngineConfig};
use proptest::prelude::*;

fn spec() -> impl Strategy<Value = GeneratorSpec> {
    (
        0usize..=40,
        1usize..=3,
        1usize..=5,
        1u32..=8,
        (1u32..=400, 0u32..=600),
        prop_oneof![Just(PriceBasis::Flat), Just(PriceBasis::Footprint)],
        (1u32..=1000, 0u32..=3),
        any::<u64>(),
    )
        .prop_flat_map(|(users, m, b, s_hi, (d_lo, d_span), basis, (decay, first), seed)| {
            (s_hi + 1..=s_hi + 60).prop_map(move |horizon| GeneratorSpec {
                num_users: users,
                num_resources: m,
                num_options: b,
                horizon,
                slots_required: (1, s_hi),
                demand: (d_lo, (d_lo + d_span).min(1000)),
                price: PriceModel {
                    basis,
                    decay_permille: decay,
                    ..PriceModel::default()
                },
                slack: linear_slack(b, first, 1),
                seed,
            })
        })
}

fn engines() -> [EngineConfig; 2] {
    [EngineConfig::new(Eviction::Truem), EngineConfig::new(Eviction::Trwaem)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn generated_instances_are_valid_and_round_trip(spec in spec()) {
        let inst = generate(&spec).unwrap();
        prop_assert!(validate_instance(&inst).is_empty());
        prop_assert_eq!(inst.num_users(), spec.num_users);
        let text = emit_instance(&inst);
        prop_assert_eq!(&parse_instance(&text).unwrap(), &inst);
        prop_assert_eq!(generate(&spec).unwrap(), inst);
    }

    #[test]
    fn every_algorithm_returns_a_valid_schedule(spec in spec(), rng in any::<u64>()) {
        let inst = generate(&spec).unwrap();
        let mut schedules = vec![run_greedy(&inst), run_random(&inst, rng)];
        for cfg in engines() {
            schedules.push(run_offline(&inst, &cfg).unwrap());
        }
        for (sched, report) in schedules {
            prop_assert!(validate_schedule(&inst, &sched).is_empty(), "{:?}", validate_schedule(&inst, &sched));
            prop_assert_eq!(report.settled_total(), report.welfare);
            prop_assert_eq!(report.accepted_count + report.rejected_count, inst.num_users());
            let text = emit_schedule(&sched);
            prop_assert_eq!(parse_schedule(&text).unwrap(), sched);
        }
    }

    #[test]
    fn online_matches_offline(spec in spec()) {
        let inst = generate(&spec).unwrap();
        for cfg in engines() {
            let (offline, report) = run_offline(&inst, &cfg).unwrap();
            let (online, events, online_report) = run_online(&inst, &cfg).unwrap();
            prop_assert_eq!(&online, &offline);
            prop_assert!(check_event_grammar(&events).is_ok());
            prop_assert_eq!(online_report.welfare, report.welfare);
            prop_assert_eq!(online_report.move_count, report.move_count);
        }
    }

    #[test]
    fn one_resource_makes_the_valuations_agree(spec in spec()) {
        let inst = generate(&GeneratorSpec { num_resources: 1, ..spec }).unwrap();
        let (a, _, trace_a) = run_traced(&inst, &EngineConfig::new(Eviction::Truem)).unwrap();
        let (b, _, trace_b) = run_traced(&inst, &EngineConfig::new(Eviction::Trwaem)).unwrap();
        prop_assert_eq!(a, b);
        prop_assert_eq!(trace_a, trace_b);
    }

    #[test]
    fn summaries_ignore_order(mut values in prop::collection::vec(0.0f64..=1.0, 1..50), seed in any::<u64>()) {
        let before = summarize(&values).unwrap();
        let k = (seed as usize) % values.len();
        values.rotate_left(k);
        values.reverse();
        let after = summarize(&values).unwrap();
        prop_assert_eq!(before, after);
        prop_assert!(before.min <= before.mean && before.mean <= before.max);
    }
}
