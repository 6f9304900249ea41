//! Acceptance run over the shipped configs. Prints one PASS/FAIL line per
//! criterion and fails at the end if any criterion failed.

use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use wavemap_lab::experiments::commutator::max_name;
use wavemap_lab::experiments::lp_checks::IDENTITY_TOLERANCE;
use wavemap_lab::output::format_number;
use wavemap_lab::run::{check_identities, execute};
use wavemap_lab::{ExperimentConfig, Row};

const ROUND_TRIP_TOLERANCE: f64 = 1e-12;
const DEFECT_TOLERANCE: f64 = 1e-12;

fn config(name: &str) -> ExperimentConfig {
    let path: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "configs", &format!("{name}.json")].iter().collect();
    ExperimentConfig::from_path(&path).unwrap_or_else(|e| panic!("{name}: {e}"))
}

struct Run {
    rows: Vec<Row>,
    csv: Vec<u8>,
    elapsed: Duration,
}

impl Run {
    fn values(&self, quantity: &str) -> Vec<&Row> {
        self.rows.iter().filter(|r| r.quantity == quantity).collect()
    }

    fn value(&self, quantity: &str) -> Option<f64> {
        self.values(quantity).first().map(|r| r.value)
    }
}

fn run(cfg: &ExperimentConfig, root: &Path) -> Run {
    let t0 = Instant::now();
    let res = execute(cfg, root, None).expect("run completes");
    let elapsed = t0.elapsed();
    assert!(!res.outcome.is_partial(), "failed points: {:?}", res.outcome.failures);
    let csv = std::fs::read(res.dir.join("results.csv")).expect("results.csv");
    Run { rows: res.outcome.rows, csv, elapsed }
}

struct Report {
    failed: Vec<usize>,
}

impl Report {
    fn record(&mut self, id: usize, ok: bool, detail: String) {
        println!("{} criterion {id}: {detail}", if ok { "PASS" } else { "FAIL" });
        if !ok {
            self.failed.push(id);
        }
    }
}

fn fmt(x: f64) -> String {
    format_number(x)
}

#[test]
fn acceptance() {
    let tmp = tempfile::tempdir().unwrap();
    let root = tmp.path();
    let mut report = Report { failed: Vec::new() };

    // 1. Exact identities on 32^2 and 16^5.
    let t0 = Instant::now();
    let checks = check_identities().expect("identity suite");
    let elapsed = t0.elapsed();
    let worst = checks.iter().map(|c| c.2).fold(0.0, f64::max);
    let bad: Vec<String> = checks
        .iter()
        .filter(|c| !(c.2 <= IDENTITY_TOLERANCE))
        .map(|c| format!("{} {}", c.0, c.1))
        .collect();
    report.record(
        1,
        bad.is_empty() && elapsed <= Duration::from_secs(120),
        format!("{} identities, max residual {} (tol 1e-12), {:.1}s (limit 120s){}", checks.len(), fmt(worst),
            elapsed.as_secs_f64(), if bad.is_empty() { String::new() } else { format!(", failing: {}", bad.join("; ")) }),
    );

    // 2. Geodesic convergence, and the 2D conservation numbers for the record.
    let solver_cfg = config("solver_convergence");
    let solver = run(&solver_cfg, root);
    let geo_ratios: Vec<f64> = solver.values("geodesic_error_ratio").iter().map(|r| r.value).collect();
    let geo_ok = !geo_ratios.is_empty() && geo_ratios.iter().all(|r| (3.5..=4.5).contains(r));
    report.record(
        2,
        geo_ok && solver.elapsed <= Duration::from_secs(60),
        format!("geodesic error ratios [{}] (want [3.5, 4.5]), {:.1}s for the whole run (limit 60s)",
            geo_ratios.iter().map(|r| fmt(*r)).collect::<Vec<_>>().join(", "), solver.elapsed.as_secs_f64()),
    );

    // 3. Energy drift at the default step, defects on every sampled slice.
    let energy = run(&config("energy_1d"), root);
    let drift = energy.value("energy_drift").unwrap_or(f64::INFINITY);
    let defects = ["sphere_defect", "tangency_defect"]
        .iter()
        .flat_map(|q| energy.values(q).into_iter().chain(solver.values(q)))
        .map(|r| r.value)
        .fold(0.0, f64::max);
    let drift_2d = solver.value("energy_drift").unwrap_or(f64::NAN);
    report.record(
        3,
        drift <= 1e-6 && defects <= DEFECT_TOLERANCE,
        format!("relative energy drift {} at default dt (n=1, N=2048; tol 1e-6), max sampled defect {} (tol 1e-12); \
                 2D N=128 drift at default dt {} (not gated)", fmt(drift), fmt(defects), fmt(drift_2d)),
    );

    // 4 and 5. Gauge quadratic smallness and transport cancellation.
    let gauge_cfg = config("gauge_defects");
    let gauge = run(&gauge_cfg, root);
    let slope = gauge.value("orth_defect_slope").unwrap_or(f64::NAN);
    report.record(
        4,
        (slope - 2.0).abs() <= 0.3 && gauge.elapsed <= Duration::from_secs(600),
        format!("orthogonality defect slope {} over eps {:?} (want 2 +- 0.3), {:.1}s (limit 600s)", fmt(slope),
            gauge_cfg.epsilons, gauge.elapsed.as_secs_f64()),
    );
    let mut transport_ok = true;
    let mut worst_share = 0.0_f64;
    let mut count = 0;
    for d in gauge.rows.iter().filter(|r| r.quantity.starts_with("transport_defect_alpha")) {
        let c = gauge
            .rows
            .iter()
            .find(|r| r.quantity == d.quantity.replace("transport_defect", "connection_transport") && r.epsilon == d.epsilon && r.seed == d.seed)
            .map(|r| r.value)
            .unwrap_or(0.0);
        transport_ok &= d.value < c;
        worst_share = worst_share.max(d.value / c);
        count += 1;
    }
    report.record(
        5,
        transport_ok && count > 0,
        format!("{count} (eps, alpha) cases, max ||dU - AU|| / ||AU|| = {} (want < 1)", fmt(worst_share)),
    );

    // 6. Commutator constants across resolutions.
    let comm_cfg = config("commutator_sweep");
    let comm = run(&comm_cfg, root);
    let ratios: Vec<f64> = comm.rows.iter().filter(|r| r.quantity.starts_with("commutator_ratio_N")).map(|r| r.value).collect();
    let finite = ratios.iter().all(|r| r.is_finite());
    let spread = comm.value("commutator_max_spread").unwrap_or(f64::INFINITY);
    let maxima: Vec<String> = comm_cfg
        .commutator_resolutions()
        .iter()
        .map(|&n| format!("N={n}: {}", fmt(comm.value(&max_name(n)).unwrap_or(f64::NAN))))
        .collect();
    report.record(
        6,
        finite && ratios.len() == 2 * comm_cfg.commutator.pairs && spread < 2.0,
        format!("{} ratios, all finite: {finite}; maxima {}; spread {} (want < 2)", ratios.len(), maxima.join(", "), fmt(spread)),
    );

    // 7. Renormalisation benefit.
    let renorm_cfg = config("renorm_compare");
    let renorm = run(&renorm_cfg, root);
    let imp: Vec<(f64, f64)> = renorm.values("improvement_ratio").iter().map(|r| (r.epsilon.unwrap_or(0.0), r.value)).collect();
    let mut sorted = imp.clone();
    sorted.sort_by(|a, b| b.0.total_cmp(&a.0));
    let below_one = !sorted.is_empty() && sorted.iter().all(|p| p.1 < 1.0);
    let monotone = sorted.windows(2).all(|w| w[1].1 <= w[0].1);
    let round_trip = renorm.values("round_trip").iter().map(|r| r.value).fold(0.0, f64::max);
    report.record(
        7,
        below_one && monotone && round_trip <= ROUND_TRIP_TOLERANCE && sorted.len() == renorm_cfg.epsilons.len(),
        format!("improvement ratios {} (want < 1, non-increasing), max round trip {} (tol 1e-12)",
            sorted.iter().map(|(e, v)| format!("eps {}: {}", fmt(*e), fmt(*v))).collect::<Vec<_>>().join(", "), fmt(round_trip)),
    );

    // 8. Envelope stability on the two smallest epsilons.
    let env_cfg = config("envelope_stability");
    let envelope = run(&env_cfg, root);
    let mut eps = env_cfg.epsilons.clone();
    eps.sort_by(f64::total_cmp);
    let growth: Vec<(f64, f64)> = eps
        .iter()
        .take(2)
        .map(|&e| {
            let g = envelope.values("growth_factor").iter().find(|r| r.epsilon == Some(e)).map(|r| r.value).unwrap_or(f64::NAN);
            (e, g)
        })
        .collect();
    report.record(
        8,
        growth.len() == 2 && growth.iter().all(|g| g.1 <= 4.0),
        format!("growth factors {} (want <= 4)",
            growth.iter().map(|(e, g)| format!("eps {}: {}", fmt(*e), fmt(*g))).collect::<Vec<_>>().join(", ")),
    );

    // 9. Repeat every run except the full commutator sweep; repeat that one
    // on its first pairs in a separate directory.
    let mut mismatched = Vec::new();
    let repeat_root = root.join("repeat");
    for (name, first) in [
        ("solver_convergence", &solver),
        ("energy_1d", &energy),
        ("gauge_defects", &gauge),
        ("renorm_compare", &renorm),
        ("envelope_stability", &envelope),
    ] {
        if run(&config(name), &repeat_root).csv != first.csv {
            mismatched.push(name.to_string());
        }
    }
    let mut short = comm_cfg.clone();
    short.commutator.pairs = 10;
    let a = run(&short, &root.join("short_a"));
    let b = run(&short, &root.join("short_b"));
    if a.csv != b.csv {
        mismatched.push("commutator_sweep (10 pairs)".into());
    }
    // Per-pair rows of the short sweep must match the full sweep's.
    let full_lines: std::collections::HashSet<String> =
        String::from_utf8_lossy(&comm.csv).lines().map(|l| l.split_once(',').unwrap().1.to_string()).collect();
    let short_text = String::from_utf8_lossy(&a.csv).into_owned();
    let pair_lines = short_text.lines().skip(1).filter(|l| l.contains(",commutator_ratio_N"));
    if !pair_lines.clone().all(|l| full_lines.contains(l.split_once(',').unwrap().1)) {
        mismatched.push("commutator pairs vs full sweep".into());
    }
    report.record(
        9,
        mismatched.is_empty(),
        if mismatched.is_empty() {
            "repeated runs give byte-identical results.csv for all configs".to_string()
        } else {
            format!("CSV bodies differ for {}", mismatched.join(", "))
        },
    );

    assert!(report.failed.is_empty(), "failed criteria: {:?}", report.failed);
}
