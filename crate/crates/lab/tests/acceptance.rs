//! Acceptance run: one PASS/FAIL line per criterion. Runs without the test
//! harness so the lines always reach the console.

use std::f64::consts::TAU;
use std::time::Instant;

use ricci_core::energy::{build_cutoff_weight, gronwall_certificate, Basepoint, CertificateParams, WeightParams};
use ricci_core::random::{sample_rng, TrigMetric};
use ricci_core::verify::{negative_control, verify_all, Corruption, SuiteConfig, MIN_ORDER};
use ricci_core::{Chart, MetricField};
use ricci_lab::config::{Family, ScenarioConfig};
use ricci_lab::report::Outcome;
use ricci_lab::scenario::{run_scenario, ScenarioKind, ALPHA0};
use ricci_lab::series::pair_series;

type Verdict = Result<(bool, String), String>;

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn scenario(kind: ScenarioKind, cfg: &ScenarioConfig) -> Result<Outcome, String> {
    run_scenario(kind, cfg).map_err(err)
}

fn check<'a>(o: &'a Outcome, name: &str) -> Result<&'a ricci_lab::report::Check, String> {
    o.checks.iter().find(|c| c.name == name).ok_or(format!("{} ran no `{name}` check", o.scenario))
}

/// Identity suite: 20 seeded pairs at N = 64 in n = 2 and 3, order over
/// N ∈ {32, 64, 128}.
fn identity_suite() -> Verdict {
    let mut pass = true;
    let mut notes = Vec::new();
    for (dim, refinement_samples) in [(2, 3), (3, 1)] {
        let cfg = SuiteConfig {
            dim,
            seed: 7,
            samples: 20,
            resolution: 64,
            resolutions: vec![32, 64, 128],
            refinement_samples,
        };
        for r in verify_all(&cfg).map_err(err)? {
            let order_ok = r.exact || r.order.is_some_and(|o| o >= MIN_ORDER);
            pass &= r.pass && order_ok && r.residuals.len() == 20;
            let order = r.order.map_or("exact".to_string(), |o| format!("{o:.2}"));
            notes.push(format!("n={dim} {} ratio {:.2} order {order}", r.id, r.max_ratio()));
        }
    }
    Ok((pass, notes.join("; ")))
}

/// Sphere and cylinder radius laws with RK4 at Δt = 10⁻³ to t = 0.2, and
/// RK4 error ratios per halving in [12, 20]. The ladders stay above the
/// roundoff floor; the 2-sphere and 3-cylinder share r² = r₀² − 2t.
fn exact_solutions() -> Verdict {
    let mut pass = true;
    let mut notes = Vec::new();
    for (family, dim, dts) in [
        (Family::Sphere, 2, vec![0.04, 0.02, 0.01]),
        (Family::Sphere, 3, vec![0.02, 0.01, 0.005]),
        (Family::Cylinder, 3, vec![0.04, 0.02, 0.01]),
    ] {
        let cfg = ScenarioConfig {
            family,
            dim,
            r0: 1.0,
            dt: 1e-3,
            t_end: 0.2,
            dts,
            stride: 20,
            ..Default::default()
        };
        let o = scenario(ScenarioKind::Flow, &cfg)?;
        let law = check(&o, "radius-law")?;
        let order = check(&o, "rk4-order")?;
        pass &= law.pass && law.bound == 1e-6 && order.pass;
        notes.push(format!("{family:?} n={dim} error {:.2e}, {}", law.value, order.detail));
    }
    Ok((pass, notes.join("; ")))
}

/// Monitored K on the shrinking sphere, σ = ½ on [0, 0.2], against the
/// closed form within 1%.
fn curvature_rate() -> Verdict {
    let mut pass = true;
    let mut notes = Vec::new();
    for dim in [2, 3] {
        let cfg = ScenarioConfig {
            family: Family::Sphere,
            dim,
            sigma: 0.5,
            dt: 1e-3,
            t_end: 0.2,
            stride: 10,
            ..Default::default()
        };
        let o = scenario(ScenarioKind::BlowupMonitor, &cfg)?;
        let c = check(&o, "closed-form-rate")?;
        pass &= c.pass && c.bound == 0.01;
        notes.push(format!("n={dim} relative error {:.2e} ({})", c.value, c.detail));
    }
    Ok((pass, notes.join("; ")))
}

/// Every cutoff/weight invariant at N = 64 for three parameter sets with
/// β ∈ {0.25/(L₁γ), 0.1/(L₁γ)}.
fn cutoff_weights() -> Verdict {
    let chart = Chart::periodic(2, 64, TAU).map_err(err)?;
    let sets = [(1.0, 1.0, 1.0, 0.25, 1.0), (1.0, 1.0, 1.0, 0.1, 1.0), (0.5, 2.0, 1.5, 0.25, 1.5)];
    let mut notes = Vec::new();
    for (k, &(l1, l2, gamma, frac, r)) in sets.iter().enumerate() {
        let g = MetricField::from_source(&chart, &TrigMetric::random(2, &mut sample_rng(40, k as u64))).map_err(err)?;
        let params = WeightParams {
            r,
            l1,
            l2,
            gamma,
            beta: Some(frac / (l1 * gamma)),
            tau: None,
        };
        // Builds only if (φ′)² ≤ 10φ, |∇̄θ|² ≤ 40θ/r², η ≥ L₂r̄² and the
        // weight inequality hold at every trusted point.
        let cw = build_cutoff_weight(&g, Basepoint::Point(0), params).map_err(err)?;
        for t in [0.0, 0.5 * cw.tau, cw.tau] {
            cw.check_weight_inequality(&g, t).map_err(err)?;
        }
        notes.push(format!("set {k}: beta {:.4}, tau {:.4}, {} leakage points", cw.beta, cw.tau, cw.leakage_set().len()));
    }
    Ok((true, notes.join("; ")))
}

/// Bumpy cylinder, n = 3, Nx = 32, integrated at Δt and Δt/2 for
/// Δt ∈ {0.01, 0.005, 0.0025}: E_r(0.1) shrinks ≥ 8× per halving with
/// fitted order ≥ 2.5.
fn uniqueness_by_refinement() -> Verdict {
    let cfg = ScenarioConfig {
        family: Family::BumpyCylinder,
        dim: 3,
        resolution: 32,
        r0: 1.0,
        amplitude: 0.1,
        dts: vec![0.01, 0.005, 0.0025],
        t_end: 0.1,
        ..Default::default()
    };
    let o = scenario(ScenarioKind::ConvergenceStudy, &cfg)?;
    let f = check(&o, "halving-factor")?;
    let p = check(&o, "time-order")?;
    Ok((
        f.pass && p.pass && f.bound == 8.0 && p.bound == 2.5,
        format!("smallest factor {:.1}, order {:.2}", f.value, p.value),
    ))
}

/// δ-perturbed pairs, δ ∈ {10⁻³, 10⁻⁴}: Gronwall constants within 20%
/// and E_r(t₀) ∝ δ² within 10%.
fn gronwall_stability() -> Verdict {
    let mut fits = Vec::new();
    for delta in [1e-3, 1e-4] {
        let cfg = ScenarioConfig {
            family: Family::WarpedCylinder,
            seed: Some(5),
            delta,
            dt: 2e-3,
            stride: 5,
            ..Default::default()
        };
        cfg.validate().map_err(err)?;
        let (samples, _) = pair_series(&cfg).map_err(err)?;
        let params = CertificateParams {
            sigma: cfg.sigma,
            a: cfg.a,
            alpha0: ALPHA0,
            r: cfg.r,
            vbar: 0.0,
            t0: cfg.t0,
        };
        let c = gronwall_certificate(&samples, &params).map_err(err)?;
        fits.push((c.c, c.e_t0));
    }
    let (c1, c2) = (fits[0].0, fits[1].0);
    let spread = (c1 - c2).abs() / c1.abs().max(c2.abs());
    let scaling = fits[0].1 / fits[1].1 / 100.0;
    Ok((
        spread <= 0.2 && (scaling - 1.0).abs() <= 0.1,
        format!("C = {c1:.4}, {c2:.4} (spread {spread:.2e}); E(t0) ratio / delta^2 ratio = {scaling:.4}"),
    ))
}

/// A 1% corruption of any single term of the B evolution trips the
/// verifier by at least 10× the tolerance.
fn negative_controls() -> Verdict {
    let mut pass = true;
    let mut notes = Vec::new();
    for c in Corruption::ALL {
        let nc = negative_control(c, 2, 256, 7, 0).map_err(err)?;
        pass &= nc.ratio >= 10.0;
        notes.push(format!("{c:?} residual/tol {:.1}", nc.ratio));
    }
    Ok((pass, notes.join("; ")))
}

fn main() {
    let criteria: [(&str, fn() -> Verdict); 7] = [
        ("identity suite", identity_suite),
        ("exact solutions", exact_solutions),
        ("curvature rate", curvature_rate),
        ("cutoff and weight", cutoff_weights),
        ("uniqueness by refinement", uniqueness_by_refinement),
        ("gronwall stability", gronwall_stability),
        ("negative controls", negative_controls),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (pass, detail) = run().unwrap_or_else(|e| (false, format!("error: {e}")));
        failed += usize::from(!pass);
        println!(
            "criterion {} {name}: {} [{:.0}s] {detail}",
            k + 1,
            if pass { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64()
        );
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
