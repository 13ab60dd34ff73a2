use mfbalance::metrics::{
    average_utilization, full_report, resource_imbalance, system_averages, ImbalanceReport,
    ResourceUtilization, ServerSpec, UtilizationSample, WeightTriple,
};
use proptest::prelude::*;

/// Straight transcription of the imbalance formulas, sharing no code with
/// the library.
fn brute_force(
    utils: &[(f64, f64, f64)],
    specs: &[ServerSpec],
    w: &WeightTriple,
) -> ImbalanceReport {
    let n = utils.len() as f64;
    let mut num = [0.0; 3];
    let mut den = [0.0; 3];
    for (u, s) in utils.iter().zip(specs) {
        let caps = [s.cpu_count as f64, s.ram_capacity, s.net_capacity];
        let vals = [u.0, u.1, u.2];
        for r in 0..3 {
            num[r] += vals[r] * caps[r];
            den[r] += caps[r];
        }
    }
    let avg = [num[0] / den[0], num[1] / den[1], num[2] / den[2]];
    let mut isl = [0.0; 3];
    let mut sil = Vec::new();
    let mut load = 0.0;
    for u in utils {
        let d = [u.0 - avg[0], u.1 - avg[1], u.2 - avg[2]];
        for r in 0..3 {
            isl[r] += d[r] * d[r];
        }
        sil.push(w.a * d[0] * d[0] + w.b * d[1] * d[1] + w.c * d[2] * d[2]);
        load += w.a * u.0 + w.b * u.1 + w.c * u.2;
    }
    ImbalanceReport {
        isl_cpu: isl[0],
        isl_ram: isl[1],
        isl_net: isl[2],
        ibl_tot: isl[0] + isl[1] + isl[2],
        isl_tot: sil.iter().sum::<f64>() / n,
        sil,
        efficiency: load / n,
    }
}

fn to_utils(raw: &[(f64, f64, f64)]) -> Vec<ResourceUtilization> {
    raw.iter()
        .map(|&(c, r, n)| ResourceUtilization::new(c, r, n, 1).unwrap())
        .collect()
}

fn specs_strategy(n: usize) -> impl Strategy<Value = Vec<ServerSpec>> {
    prop::collection::vec((1u32..=16, 1.0f64..64.0, 1.0f64..32.0), n).prop_map(|v| {
        v.into_iter()
            .enumerate()
            .map(|(i, (c, r, n))| ServerSpec::new(i as u32, c, r, n).unwrap())
            .collect()
    })
}

fn weights_strategy() -> impl Strategy<Value = WeightTriple> {
    (0.0f64..1.0, 0.0f64..1.0, 0.0f64..1.0)
        .prop_filter("non-zero", |(a, b, c)| a + b + c > 1e-3)
        .prop_map(|(a, b, c)| {
            let s = a + b + c;
            WeightTriple {
                a: a / s,
                b: b / s,
                c: 1.0 - a / s - b / s,
            }
        })
}

fn fixture() -> impl Strategy<Value = (Vec<ServerSpec>, Vec<(f64, f64, f64)>, WeightTriple)> {
    (1usize..=8).prop_flat_map(|n| {
        (
            specs_strategy(n),
            prop::collection::vec((0.0f64..=1.0, 0.0f64..=1.0, 0.0f64..=1.0), n),
            weights_strategy(),
        )
    })
}

fn assert_close(a: &ImbalanceReport, b: &ImbalanceReport, tol: f64) {
    let pairs = [
        (a.isl_cpu, b.isl_cpu),
        (a.isl_ram, b.isl_ram),
        (a.isl_net, b.isl_net),
        (a.ibl_tot, b.ibl_tot),
        (a.isl_tot, b.isl_tot),
        (a.efficiency, b.efficiency),
    ];
    for (x, y) in pairs {
        assert!((x - y).abs() <= tol, "{x} vs {y}");
    }
    for (x, y) in a.sil.iter().zip(&b.sil) {
        assert!((x - y).abs() <= tol, "{x} vs {y}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn full_report_matches_brute_force((specs, raw, w) in fixture()) {
        let report = full_report(&to_utils(&raw), &specs, &w).unwrap();
        assert_close(&report, &brute_force(&raw, &specs, &w), 1e-12);
    }

    #[test]
    fn outputs_are_non_negative((specs, raw, w) in fixture()) {
        let r = full_report(&to_utils(&raw), &specs, &w).unwrap();
        prop_assert!(r.isl_cpu >= 0.0 && r.isl_ram >= 0.0 && r.isl_net >= 0.0);
        prop_assert!(r.ibl_tot >= 0.0 && r.isl_tot >= 0.0);
        prop_assert!(r.sil.iter().all(|s| *s >= 0.0));
    }

    #[test]
    fn scaling_utilizations_scales_imbalance_quadratically(
        (specs, raw, w) in fixture(),
        alpha in 0.01f64..=1.0,
    ) {
        let r = full_report(&to_utils(&raw), &specs, &w).unwrap();
        let scaled: Vec<_> = raw.iter().map(|&(c, m, n)| (alpha * c, alpha * m, alpha * n)).collect();
        let s = full_report(&to_utils(&scaled), &specs, &w).unwrap();
        let a2 = alpha * alpha;
        for (x, y) in [
            (r.isl_cpu, s.isl_cpu), (r.isl_ram, s.isl_ram), (r.isl_net, s.isl_net), (r.isl_tot, s.isl_tot),
        ] {
            prop_assert!((a2 * x - y).abs() <= 1e-12, "{} vs {}", a2 * x, y);
        }
        for (x, y) in r.sil.iter().zip(&s.sil) {
            prop_assert!((a2 * x - y).abs() <= 1e-12);
        }
    }

    #[test]
    fn shifting_cpu_leaves_cpu_imbalance_unchanged(
        (specs, raw, w) in fixture(),
        delta in -0.2f64..0.2,
    ) {
        // keep every shifted value inside [0, 1]
        let raw: Vec<_> = raw.iter().map(|&(c, r, n)| (0.2 + 0.6 * c, r, n)).collect();
        let shifted: Vec<_> = raw.iter().map(|&(c, r, n)| (c + delta, r, n)).collect();
        let a = full_report(&to_utils(&raw), &specs, &w).unwrap();
        let b = full_report(&to_utils(&shifted), &specs, &w).unwrap();
        prop_assert!((a.isl_cpu - b.isl_cpu).abs() <= 1e-12);
    }

    #[test]
    fn permuting_servers_permutes_sil(
        (specs, raw, w) in fixture(),
        rotation in 0usize..8,
    ) {
        let n = specs.len();
        let k = rotation % n;
        let mut specs2 = specs.clone();
        let mut raw2 = raw.clone();
        specs2.rotate_left(k);
        raw2.rotate_left(k);
        let a = full_report(&to_utils(&raw), &specs, &w).unwrap();
        let b = full_report(&to_utils(&raw2), &specs2, &w).unwrap();
        for i in 0..n {
            prop_assert!((a.sil[(i + k) % n] - b.sil[i]).abs() <= 1e-12);
        }
        for (x, y) in [(a.isl_cpu, b.isl_cpu), (a.isl_tot, b.isl_tot), (a.efficiency, b.efficiency)] {
            prop_assert!((x - y).abs() <= 1e-12);
        }
    }
}

#[test]
fn uniform_utilization_is_exactly_balanced() {
    let specs: Vec<_> = (0..5)
        .map(|i| ServerSpec::new(i, 1 + i, 3.0 + i as f64, 7.0).unwrap())
        .collect();
    let r = full_report(
        &to_utils(&[(0.37, 0.81, 0.05); 5]),
        &specs,
        &WeightTriple::equal(),
    )
    .unwrap();
    assert_eq!(
        (r.isl_cpu, r.isl_ram, r.isl_net, r.ibl_tot, r.isl_tot),
        (0.0, 0.0, 0.0, 0.0, 0.0)
    );
}

#[test]
fn one_perturbed_server_gives_the_hand_computed_imbalance() {
    // N equal servers at u, one moved to u + δ on cpu: the mean moves by
    // δ/N, so ISL_cpu = δ²(N-1)/N and ISL_tot = a δ²(N-1)/N².
    let n = 4;
    let specs: Vec<_> = (0..n)
        .map(|i| ServerSpec::new(i, 4, 8.0, 4.0).unwrap())
        .collect();
    let w = WeightTriple::new(0.5, 0.25, 0.25).unwrap();
    for delta in [1e-3, 0.05, 0.3] {
        let mut raw = vec![(0.4, 0.4, 0.4); n as usize];
        raw[0].0 += delta;
        let r = full_report(&to_utils(&raw), &specs, &w).unwrap();
        let nf = n as f64;
        let isl_cpu = delta * delta * (nf - 1.0) / nf;
        let isl_tot = w.a * delta * delta * (nf - 1.0) / (nf * nf);
        assert!(
            (r.isl_cpu - isl_cpu).abs() <= 1e-15,
            "{} {isl_cpu}",
            r.isl_cpu
        );
        assert!(
            (r.isl_tot - isl_tot).abs() <= 1e-15,
            "{} {isl_tot}",
            r.isl_tot
        );
        assert!(r.isl_tot > 0.0);
    }
}

#[test]
fn window_average_is_the_sample_mean() {
    let samples = [
        UtilizationSample::new(0.2, 0.4, 0.6),
        UtilizationSample::new(0.4, 0.4, 0.0),
        UtilizationSample::new(0.9, 0.1, 0.3),
    ];
    let u = average_utilization(&samples).unwrap();
    assert!((u.cpu - 0.5).abs() < 1e-15);
    assert!((u.ram - 0.3).abs() < 1e-15);
    assert!((u.net - 0.3).abs() < 1e-15);
    assert_eq!(u.window, 3);
}

#[test]
fn averages_are_capacity_weighted() {
    let specs = [
        ServerSpec::new(1, 1, 10.0, 1.0).unwrap(),
        ServerSpec::new(2, 3, 30.0, 3.0).unwrap(),
    ];
    let avg = system_averages(&to_utils(&[(1.0, 1.0, 1.0), (0.0, 0.0, 0.0)]), &specs).unwrap();
    assert!((avg.cpu_all - 0.25).abs() < 1e-15);
    assert!((avg.ram_all - 0.25).abs() < 1e-15);
    assert!((avg.net_all - 0.25).abs() < 1e-15);
    // not divided by N
    assert!((resource_imbalance(&[1.0, 0.0], 0.5).unwrap() - 0.5).abs() < 1e-15);
}

#[test]
fn invalid_inputs_are_rejected() {
    assert!(WeightTriple::new(0.5, 0.5, 0.5)
        .unwrap_err()
        .to_string()
        .contains("a + b + c = 1"));
    assert!(ResourceUtilization::new(1.2, 0.0, 0.0, 1).is_err());
    let specs = [ServerSpec::new(1, 1, 1.0, 1.0).unwrap()];
    assert!(full_report(&[], &specs, &WeightTriple::equal()).is_err());
    assert!(ServerSpec::new(1, 0, 1.0, 1.0).is_err());
}
