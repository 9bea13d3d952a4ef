mod common;

use benchgate::detection::{
    analyze_reports, analyze_series, detect_jumps, detect_trends, dynamic_threshold, Direction, DetectorConfig, Kind,
};
use benchgate::measurements::{CommitSeries, TrimConfig};
use benchgate::stats::{initial_threshold, BootstrapConfig, ChangeReport, Intensity};
use common::fixtures;
use proptest::prelude::*;

fn report(i: usize, median: f64, half_width: f64) -> ChangeReport {
    ChangeReport {
        commit: format!("c{i:03}"),
        metric: "m".into(),
        median_change_pct: median,
        ci_low_pct: median - half_width,
        ci_high_pct: median + half_width,
        instability_pct: 2.0 * half_width,
        intensity: Intensity::None,
    }
}

fn series(medians: &[f64], half_width: f64) -> Vec<ChangeReport> {
    medians.iter().enumerate().map(|(i, &m)| report(i, m, half_width)).collect()
}

#[test]
fn threshold_arithmetic() {
    let cfg = DetectorConfig::default();
    assert_eq!(dynamic_threshold(&[4.0], &cfg, 1.0), 3.0);
    let full = DetectorConfig { threshold_factor: 1.0, ..cfg.clone() };
    assert_eq!(dynamic_threshold(&[4.0], &full, 1.0), 4.0);
    assert_eq!(dynamic_threshold(&[0.4], &cfg, 1.0), 1.0);
    assert_eq!(dynamic_threshold(&[], &cfg, 2.5), 2.5);
    assert_eq!(dynamic_threshold(&[], &cfg, 0.2), 1.0);

    // Only the last `instability_window` values count.
    let mut history = vec![100.0];
    history.extend([4.0; 10]);
    assert_eq!(dynamic_threshold(&history, &cfg, 1.0), 3.0);
    let sparse = DetectorConfig::sparse();
    assert_eq!(dynamic_threshold(&[40.0, 4.0, 4.0, 4.0], &sparse, 1.0), 3.0);

    assert_eq!(initial_threshold(4.0, 0.75, 1.0, None), 3.0);
    assert_eq!(initial_threshold(1.0, 0.75, 1.0, None), 1.0);
}

#[test]
fn ten_small_steps_make_a_trend_not_a_jump() {
    let medians: Vec<f64> = (0..=10).map(|i| 0.5 * i as f64).collect();
    let cfg = DetectorConfig { initial_threshold_pct: 3.0, min_threshold_pct: 3.0, ..Default::default() };
    let reports = series(&medians, 0.2);
    assert!(detect_jumps(&reports, &cfg).unwrap().is_empty());
    let trends = detect_trends(&reports, &cfg).unwrap();
    assert_eq!(trends.len(), 1);
    assert_eq!((trends[0].kind, trends[0].direction, trends[0].commit_index), (Kind::Trend, Direction::Up, 10));
    assert_eq!(trends[0].intensity, Intensity::Definite);
    assert_eq!(trends[0].window_start, "c000");
}

#[test]
fn a_single_jump_suppresses_trends_over_its_window() {
    let mut medians = vec![0.0; 6];
    medians.extend([5.0; 6]);
    let cfg = DetectorConfig { initial_threshold_pct: 3.0, min_threshold_pct: 3.0, ..Default::default() };
    let a = analyze_reports(series(&medians, 0.2), (0..12).collect(), &cfg).unwrap();
    assert_eq!(a.detections.len(), 1);
    assert_eq!((a.detections[0].kind, a.detections[0].commit_index), (Kind::Jump, 6));
    assert_eq!(a.detections[0].intensity, Intensity::Definite);
    assert_eq!(a.reports[6].intensity, Intensity::Definite);
}

#[test]
fn overlapping_intervals_make_a_jump_potential() {
    let cfg = DetectorConfig::default();
    let reports = series(&[0.0, 1.6], 1.0);
    let jumps = detect_jumps(&reports, &cfg).unwrap();
    assert_eq!(jumps.len(), 1);
    assert_eq!(jumps[0].intensity, Intensity::Potential);
}

#[test]
fn detection_needs_enough_commits() {
    let cfg = DetectorConfig::default();
    assert!(detect_jumps(&series(&[0.0], 0.5), &cfg).is_err());
    assert!(detect_trends(&series(&[0.0; 9], 0.5), &cfg).is_err());
    let short = analyze_reports(series(&[0.0; 4], 0.5), (0..4).collect(), &cfg).unwrap();
    assert!(short.detections.is_empty());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn jumps_subsume_trends(
        len in 12usize..40,
        at_frac in 0.0f64..1.0,
        magnitude in 2.5f64..30.0,
        up in any::<bool>(),
        window in 3usize..=10,
        noise in prop::collection::vec(-0.3f64..0.3, 40),
    ) {
        let at = 1 + ((len - 1) as f64 * at_frac) as usize % (len - 1);
        let step = if up { magnitude } else { -magnitude };
        let medians: Vec<f64> = (0..len)
            .map(|i| noise[i] + if i >= at { step } else { 0.0 })
            .collect();
        let cfg = DetectorConfig { trend_window: window, ..Default::default() };
        // Constant CI width 2 gives thresholds of max(1, 0.75 * 2) = 1.5.
        let a = analyze_reports(series(&medians, 1.0), (0..len).collect(), &cfg).unwrap();
        let jumps: Vec<_> = a.detections.iter().filter(|d| d.kind == Kind::Jump).collect();
        prop_assert_eq!(jumps.len(), 1);
        prop_assert_eq!(jumps[0].commit_index, at);
        for d in a.detections.iter().filter(|d| d.kind == Kind::Trend) {
            let start = d.commit_index - window;
            prop_assert!(
                !(start < at && at <= d.commit_index),
                "trend at {} over ({start}, {}] explained by the jump at {at}", d.commit_index, d.commit_index
            );
        }
        prop_assert!(a.detections.iter().all(|d| d.kind == Kind::Jump));
    }

    #[test]
    fn thresholds_stay_above_floor(history in prop::collection::vec(0.0f64..50.0, 0..30), factor in 0.05f64..=1.0) {
        let cfg = DetectorConfig { threshold_factor: factor, ..Default::default() };
        let t = dynamic_threshold(&history, &cfg, 1.0);
        prop_assert!(t >= cfg.min_threshold_pct);
        if let Some(max) = history.iter().rev().take(cfg.instability_window).copied().reduce(f64::max) {
            prop_assert!(t <= (factor * max).max(cfg.min_threshold_pct) + 1e-12);
        }
    }
}

#[test]
fn sparse_fixture_uses_the_sampled_commits() {
    let dir = fixtures().join("sparse/series");
    let series = CommitSeries::load(&dir.join("manifest.json"), TrimConfig::default()).unwrap();
    let m = &series.metrics["MB1"];
    let indices: Vec<usize> = m.points.iter().map(|p| p.commit_index).collect();
    assert_eq!(indices, [0, 5, 10, 15, 20, 25, 30, 35]);
    let bcfg = BootstrapConfig { samples: 1000, rng_seed: 1, ..Default::default() };
    let dcfg = DetectorConfig { trend_window: 3, ..DetectorConfig::sparse() };
    let a = analyze_series(&series, &bcfg, &dcfg).unwrap();
    let dets = a.detections();
    assert_eq!(dets.len(), 1);
    assert_eq!((dets[0].kind, dets[0].direction, dets[0].commit_index), (Kind::Jump, Direction::Up, 25));
    assert_eq!(dets[0].window_start, "c020");
}

#[test]
fn aa_fixture_is_quiet_and_regression_fixture_flags_mb3() {
    let bcfg = BootstrapConfig { samples: 1000, rng_seed: 1, ..Default::default() };
    let load = |d: &str| CommitSeries::load(&fixtures().join(d).join("series/manifest.json"), TrimConfig::default()).unwrap();

    let aa = analyze_series(&load("aa"), &bcfg, &DetectorConfig::default()).unwrap();
    assert!(aa.detections().is_empty());

    let reg = analyze_series(&load("regression"), &bcfg, &DetectorConfig::default()).unwrap();
    let dets = reg.detections();
    assert_eq!(dets.len(), 1);
    assert_eq!((dets[0].metric.as_str(), dets[0].commit.as_str()), ("MB3", "c006"));
    assert!(dets[0].is_definite_regression());
    assert!((dets[0].magnitude_pct - 15.0).abs() < 3.0);
}
