use renoq::red::{red_drop_profile, RedAnalysis, RedModel};
use renoq::sim::{simulate_red, simulate_renovation, SimConfig, SimReport};
use renoq::{analyze, ModelParams, Resolution};

fn tail_drop(c: usize) -> Vec<f64> {
    let mut d = vec![0.0; c + 1];
    d[c] = 1.0;
    d
}

fn check_bookkeeping(report: &SimReport) {
    for flow in &report.flows {
        assert_eq!(
            flow.arrivals,
            flow.served + flow.blocked + flow.renovated + flow.in_system,
            "{flow:?}"
        );
    }
    let reps = report.loss_prob.replication_values.len();
    for r in 0..reps {
        let total: f64 = report.occupancy.iter().map(|e| e.replication_values[r]).sum();
        assert!((total - 1.0).abs() < 1e-12);
        let split = report.blocked_prob.replication_values[r] + report.renovated_prob.replication_values[r];
        assert!((split - report.loss_prob.replication_values[r]).abs() < 1e-12);
    }
}

#[test]
fn moderate_load_option1_contains_analytic_values() {
    let p = ModelParams::new(0.9, 1.0, 5, vec![0.7, 0.2, 0.1, 0.0, 0.0, 0.0], Resolution::KeepLast).unwrap();
    let a = analyze(&p).unwrap();
    let sim = simulate_renovation(&p, &SimConfig::new(200_000, 10, 11)).unwrap();
    check_bookkeeping(&sim);
    assert!(sim.loss_prob.contains(a.loss.pi), "{} vs {:?}", a.loss.pi, sim.loss_prob.mean);
    assert!(sim.mean_queue.contains(a.mean_queue()));
    let misses = a
        .profile
        .pn
        .iter()
        .zip(&sim.occupancy)
        .filter(|(p, e)| !e.contains(**p))
        .count();
    assert!(misses <= 1, "{misses} occupancy levels outside the 99% interval");
}

#[test]
fn heavy_load_option2_contains_analytic_loss() {
    let p = ModelParams::new(1.6, 1.0, 4, vec![0.3, 0.3, 0.2, 0.1, 0.1], Resolution::Cancel).unwrap();
    let a = analyze(&p).unwrap();
    let sim = simulate_renovation(&p, &SimConfig::new(200_000, 10, 12)).unwrap();
    check_bookkeeping(&sim);
    assert!(sim.loss_prob.contains(a.loss.pi), "{} vs {}", a.loss.pi, sim.loss_prob.mean);
    assert!(sim.blocked_prob.contains(a.loss.blocked));
    assert!(sim.renovated_prob.contains(a.loss.renovated));
}

#[test]
fn classic_blocking_is_reproduced() {
    let p = ModelParams::classic(0.5, 1.0, 3).unwrap();
    let a = analyze(&p).unwrap();
    let sim = simulate_renovation(&p, &SimConfig::new(1_000_000, 10, 4)).unwrap();
    assert!(sim.loss_prob.contains(a.profile.blocking()), "{} vs {} ± {}", a.profile.blocking(), sim.loss_prob.mean, sim.loss_prob.half_width_99);
    assert!(sim.renovated_prob.replication_values.iter().all(|v| *v == 0.0));
}

#[test]
fn light_traffic_concentrates_at_zero() {
    let p = ModelParams::new(1e-4, 1.0, 3, vec![0.5, 0.5, 0.0, 0.0], Resolution::KeepLast).unwrap();
    let sim = simulate_renovation(&p, &SimConfig::new(10_000, 4, 5)).unwrap();
    assert!(sim.loss_prob.mean < 1e-3);
    assert!(sim.occupancy[0].mean > 0.999);
}

#[test]
fn identical_seeds_give_identical_reports() {
    let p = ModelParams::new(1.2, 1.0, 3, vec![0.4, 0.4, 0.1, 0.1], Resolution::Cancel).unwrap();
    let config = SimConfig::new(20_000, 4, 99);
    let a = simulate_renovation(&p, &config).unwrap();
    let b = simulate_renovation(&p, &config).unwrap();
    assert_eq!(a, b);
    let c = simulate_renovation(&p, &SimConfig::new(20_000, 4, 100)).unwrap();
    assert_ne!(a.loss_prob.mean, c.loss_prob.mean);
}

#[test]
fn replication_values_do_not_depend_on_the_replication_count() {
    let p = ModelParams::new(1.2, 1.0, 3, vec![0.4, 0.4, 0.1, 0.1], Resolution::KeepLast).unwrap();
    let few = simulate_renovation(&p, &SimConfig::new(20_000, 2, 7)).unwrap();
    let many = simulate_renovation(&p, &SimConfig::new(20_000, 5, 7)).unwrap();
    assert_eq!(few.loss_prob.replication_values[..], many.loss_prob.replication_values[..2]);
}

#[test]
fn red_tail_drop_with_equal_rates_is_uniform() {
    let m = RedModel::new(1.0, 1.0, 4, tail_drop(4)).unwrap();
    let sim = simulate_red(&m, &SimConfig::new(200_000, 10, 21)).unwrap();
    check_bookkeeping(&sim);
    let misses = sim.occupancy.iter().filter(|e| !e.contains(0.2)).count();
    assert!(misses <= 1);
}

#[test]
fn red_always_dropping_accepts_nobody() {
    let m = RedModel::new(1.0, 1.0, 3, vec![1.0; 4]).unwrap();
    let sim = simulate_red(&m, &SimConfig::new(5_000, 3, 1)).unwrap();
    assert!(sim.loss_prob.replication_values.iter().all(|v| *v == 1.0));
    assert_eq!(sim.occupancy[0].mean, 1.0);
}

#[test]
fn red_profile_run_lengths_match_the_recursion() {
    let drop = red_drop_profile(2, 4, 0.5, 5).unwrap();
    let m = RedModel::new(1.0, 1.0, 5, drop).unwrap();
    let a = RedAnalysis::new(&m, 200).unwrap();
    let mut config = SimConfig::new(400_000, 10, 31);
    config.kmax = 10;
    let sim = simulate_red(&m, &config).unwrap();
    assert!(sim.loss_prob.contains(a.loss()));
    let misses = (0..10)
        .filter(|k| !sim.cl_histogram[*k].contains(a.cl.pmf[*k]))
        .count();
    assert!(misses <= 1, "{misses} run lengths outside the 99% interval");
}

#[test]
fn reference_cases_at_a_million_arrivals() {
    let cases = [
        (vec![0.7, 0.2, 0.1, 0.0, 0.0, 0.0], Resolution::KeepLast),
        (vec![0.3, 0.3, 0.4, 0.0, 0.0, 0.0], Resolution::Cancel),
    ];
    for (q, option) in cases {
        let p = ModelParams::new(0.9, 1.0, 5, q, option).unwrap();
        let a = analyze(&p).unwrap();
        let sim = simulate_renovation(&p, &SimConfig::new(1_000_000, 10, 2024)).unwrap();
        check_bookkeeping(&sim);
        assert!(sim.loss_prob.contains(a.loss.pi), "{option:?} π {} vs {}", a.loss.pi, sim.loss_prob.mean);
        for (n, (v, e)) in a.profile.pn.iter().zip(&sim.occupancy).enumerate() {
            assert!(e.contains(*v), "{option:?} P_{n} {v} vs {} ± {}", e.mean, e.half_width_99);
        }
    }
}
