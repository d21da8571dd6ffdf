use std::collections::HashSet;

use chrono::TimeDelta;
use corrosion_sensornet::{consolidate, write_corpus, Network, NetworkConfig, SensorRecord, CORPUS_HEADER};
use proptest::prelude::*;

fn config(days: f64, seed: u64) -> NetworkConfig {
    NetworkConfig {
        days,
        seed,
        ..Default::default()
    }
}

fn csv_bytes(net: &Network) -> Vec<u8> {
    let mut out = Vec::new();
    write_corpus(&mut out, &consolidate(net), &net.station_ids()).unwrap();
    out
}

fn key(r: &SensorRecord) -> (chrono::NaiveDateTime, u16) {
    (r.timestamp, r.station)
}

fn assert_aligned(net: &Network) {
    let start = net.config().start;
    for i in 0..net.config().stations.len() {
        for (m, r) in net.sd_log(i).iter().enumerate() {
            assert_eq!(r.timestamp, start + TimeDelta::minutes(m as i64), "station {i}");
        }
    }
}

#[test]
fn zero_drift_clocks_equal_true_time() {
    let mut cfg = config(1.0, 1);
    cfg.sync.reference_drift_ppm = 0.0;
    cfg.sync.gateway_drift_ppm = 0.0;
    for s in &mut cfg.stations {
        s.drift_ppm = 0.0;
    }
    let net = Network::run(cfg).unwrap();
    let sync = net.report().sync;
    assert_eq!(sync.checks, 14 * 1440);
    assert_eq!(sync.max_station_true_offset_ms, 0.0);
    assert_eq!(sync.max_station_gateway_offset_ms, 0.0);
}

#[test]
fn drift_bound_holds_at_fifty_ppm() {
    let mut cfg = config(1.0, 2);
    cfg.sync.gateway_drift_ppm = 0.0;
    for s in &mut cfg.stations {
        s.drift_ppm = 50.0;
    }
    let net = Network::run(cfg).unwrap();
    let sync = net.report().sync;
    assert_eq!(sync.bound_violations, 0);
    assert!(sync.max_station_gateway_offset_ms <= 50e-6 * 60_000.0 + 1_000.0);
    assert_eq!(net.gateway_records().len(), 14 * 1440);
}

#[test]
fn lossless_day_conserves_records() {
    let net = Network::run(config(1.0, 3)).unwrap();
    assert_eq!(net.gateway_records().len(), 14 * 1440);
    let sd: HashSet<_> = (0..14).flat_map(|i| net.sd_log(i).iter().map(key)).collect();
    let gw: HashSet<_> = net.gateway_records().iter().map(key).collect();
    assert_eq!(sd, gw);
    assert_aligned(&net);
    assert_eq!(net.report().sync.bound_violations, 0);
}

#[test]
fn lossy_gateway_is_subset_of_sd_logs() {
    let mut cfg = config(0.5, 4);
    cfg.loss_p = 0.3;
    let net = Network::run(cfg).unwrap();
    let sd: HashSet<_> = (0..14).flat_map(|i| net.sd_log(i).iter().cloned().map(|r| format!("{r:?}"))).collect();
    let gw: Vec<_> = net.gateway_records().iter().map(|r| format!("{r:?}")).collect();
    assert!(gw.len() < sd.len());
    assert!(gw.iter().all(|r| sd.contains(r)));
    let report = net.report();
    assert_eq!(report.gateway_records as usize, gw.len());
    assert!(report.batches_delivered < report.batches_sent);
}

#[test]
fn retransmit_fills_every_gap() {
    let mut cfg = config(0.25, 5);
    cfg.loss_p = 0.5;
    cfg.retransmit = true;
    let net = Network::run(cfg).unwrap();
    let sd: HashSet<_> = (0..14).flat_map(|i| net.sd_log(i).iter().map(key)).collect();
    let gw: Vec<_> = net.gateway_records().iter().map(key).collect();
    assert_eq!(gw.len(), sd.len());
    assert_eq!(gw.into_iter().collect::<HashSet<_>>(), sd);
    assert!(net.report().records_retransmitted > 0);
}

#[test]
fn identical_config_gives_identical_bytes() {
    let mut cfg = config(0.5, 6);
    cfg.loss_p = 0.2;
    let a = csv_bytes(&Network::run(cfg.clone()).unwrap());
    let b = csv_bytes(&Network::run(cfg.clone()).unwrap());
    assert_eq!(a, b);
    cfg.seed = 7;
    assert_ne!(a, csv_bytes(&Network::run(cfg).unwrap()));
}

#[test]
fn one_hour_corpus_shape() {
    let net = Network::run(config(1.0 / 24.0, 8)).unwrap();
    let bytes = csv_bytes(&net);
    let text = String::from_utf8(bytes).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), CORPUS_HEADER.join(","));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 840);
    let keys: HashSet<(&str, &str)> = rows
        .iter()
        .map(|l| {
            let mut f = l.split(',');
            (f.next().unwrap(), f.next().unwrap())
        })
        .collect();
    assert_eq!(keys.len(), 840);
    let mut sorted = rows.clone();
    sorted.sort_by_key(|l| {
        let mut f = l.split(',');
        (f.next().unwrap().to_string(), f.next().unwrap().to_string())
    });
    assert_eq!(sorted, rows);
    assert!(rows[0].starts_with("2021-01-01T00:00,S01,"));
    let tower = rows.iter().find(|l| l.contains(",S14,")).unwrap();
    assert_eq!(tower.split(',').count(), 7);
    assert!(tower.split(',').all(|f| !f.is_empty()));
    let indoor = rows.iter().find(|l| l.contains(",S01,")).unwrap();
    assert!(indoor.ends_with(",,,"));
}

#[test]
fn empty_run_is_header_only() {
    let net = Network::run(config(0.0, 9)).unwrap();
    let text = String::from_utf8(csv_bytes(&net)).unwrap();
    assert_eq!(text, format!("{}\n", CORPUS_HEADER.join(",")));
}

#[test]
fn sensor_noise_pushes_rh_over_100() {
    let mut cfg = config(20.0, 10);
    cfg.stations.truncate(1);
    let net = Network::run(cfg).unwrap();
    assert!(net.sd_log(0).iter().any(|r| r.rh_pct.is_some_and(|v| v > 100.0)));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn offset_bound_and_alignment_for_any_drift(
        drifts in prop::collection::vec(-200.0f64..200.0, 3),
        gw in -200.0f64..200.0,
        seed in any::<u64>(),
    ) {
        let mut cfg = config(3.0 / 24.0, seed);
        cfg.stations.truncate(3);
        cfg.sync.gateway_drift_ppm = gw;
        for (s, d) in cfg.stations.iter_mut().zip(&drifts) {
            s.drift_ppm = *d;
        }
        let net = Network::run(cfg).unwrap();
        prop_assert_eq!(net.report().sync.bound_violations, 0);
        for i in 0..3 {
            prop_assert_eq!(net.sd_log(i).len(), 180);
        }
        assert_aligned(&net);
    }
}
