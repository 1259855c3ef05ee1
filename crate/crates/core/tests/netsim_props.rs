use dyncast_core::fec::CodecKind;
use dyncast_core::netsim::{GilbertLoss, ReceiverSpec, Scenario, TraceEvent};
use dyncast_core::transfer::{prepare, simulate, CodecChoice};
use proptest::prelude::*;

fn scenario() -> impl Strategy<Value = Scenario> {
    (
        500_000.0..6_000_000.0f64,
        1usize..40,
        0.0..0.1f64,
        any::<bool>(),
        proptest::collection::vec((100_000.0..5_000_000.0f64, 0.0..3.0f64), 1..4),
        any::<u64>(),
    )
        .prop_map(
            |(bottleneck_rate, queue_capacity, iid_loss, bursty, rx, rng_seed)| Scenario {
                bottleneck_rate,
                queue_capacity,
                iid_loss,
                burst_loss: bursty.then_some(GilbertLoss::DEFAULT),
                receivers: rx
                    .into_iter()
                    .map(|(target_rate, start_time)| ReceiverSpec {
                        target_rate,
                        start_time,
                    })
                    .collect(),
                duration: 6.0,
                rng_seed,
                ..Scenario::default()
            },
        )
}

fn payload(len: usize) -> Vec<u8> {
    (0..len).map(|i| (i * 7 % 256) as u8).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn links_conserve_packets_and_runs_repeat(sc in scenario()) {
        let session = prepare(&payload(120_000), &sc.channel, CodecChoice::new(CodecKind::SparseParity), None).unwrap();
        let a = simulate(&sc, &session).unwrap();
        let b = simulate(&sc, &session).unwrap();
        prop_assert_eq!(&a, &b);
        for r in &a.sim.receivers {
            prop_assert!(r.link.is_balanced());
            let delivered = r.trace.iter().filter(|t| t.event == TraceEvent::Delivered).count() as u64;
            prop_assert_eq!(delivered, r.link.delivered_packets);
            // joins are cumulative and never undone
            let joins: Vec<u64> = r.trace.iter().filter(|t| t.event == TraceEvent::Join).map(|t| t.group).collect();
            prop_assert!(joins.windows(2).all(|w| w[0] < w[1]));
            prop_assert!(r.trace.windows(2).all(|w| w[0].time_us <= w[1].time_us));
        }
    }

    #[test]
    fn decoded_files_match_the_input(sc in scenario(), len in 1usize..150_000, mds in any::<bool>()) {
        let kind = if mds { CodecKind::Mds } else { CodecKind::SparseParity };
        let data = payload(len);
        let session = prepare(&data, &sc.channel, CodecChoice::new(kind), None).unwrap();
        let out = simulate(&sc, &session).unwrap();
        for rx in &out.receivers {
            if let Some(d) = &rx.data {
                prop_assert_eq!(d, &data);
                let m = rx.metrics.unwrap();
                prop_assert!(m.net >= m.head - 1e-9);
                prop_assert!(m.values().iter().all(|v| *v >= 0.0));
            }
        }
    }
}
