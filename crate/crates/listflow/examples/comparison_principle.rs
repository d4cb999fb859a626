//! Tracks min S(t) against the scalar comparison solution x(t) on two
//! presets. On the winding preset both sides have closed forms,
//! -2/(1+4t) and -2/(1+2t), so the gap is visible analytically: the
//! geometric minimum stays strictly above the ODE barrier for t > 0.

use listflow::scenario::{Preset, ScenarioConfig};
use listflow::{flow, verify};

fn run_preset(preset: Preset, t_final: f64) -> (Vec<f64>, Vec<f64>, Vec<f64>, bool) {
    let mut cfg = ScenarioConfig::default();
    cfg.grid.n = 96;
    cfg.init.preset = preset;
    cfg.flow.t_final = t_final;

    let state0 = cfg.initial_state().expect("preset state");
    let dt = cfg.effective_dt(&state0);
    let traj = flow::run(state0, cfg.flow.t_final, dt, 1).expect("integration");
    let report = verify::check_comparison_bound(&traj, 1e-8).expect("comparison check");
    (report.times.clone(), report.lhs.clone(), report.rhs.clone(), report.pass)
}

fn main() {
    let mut all_pass = true;

    for (label, preset, t_final) in [
        ("winding", Preset::Winding, 0.5),
        ("bump_b", Preset::BumpB, 0.25),
    ] {
        let (times, s_min, x, pass) = run_preset(preset, t_final);
        all_pass &= pass;
        println!("{label}:");
        println!("{:>8}  {:>14}  {:>14}  {:>12}", "t", "min S", "x(t)", "margin");
        let stride = (times.len() / 8).max(1);
        let mut rows: Vec<usize> = (0..times.len()).step_by(stride).collect();
        if *rows.last().unwrap() != times.len() - 1 {
            rows.push(times.len() - 1);
        }
        for i in rows {
            println!(
                "{:>8.4}  {:>14.9}  {:>14.9}  {:>12.3e}",
                times[i],
                s_min[i],
                x[i],
                s_min[i] - x[i]
            );
        }
        println!("  bound holds: {}\n", if pass { "yes" } else { "NO" });
    }

    // The winding closed forms make the strictness explicit.
    println!("winding closed forms, min S = -2/(1+4t) vs x = -2/(1+2t):");
    for t in [0.0, 0.1, 0.25, 0.5] {
        let s_exact = -2.0 / (1.0 + 4.0 * t);
        let x_exact = -2.0 / (1.0 + 2.0 * t);
        println!(
            "  t = {t:<5} margin = {:.6}  {}",
            s_exact - x_exact,
            if t == 0.0 { "(equality at t = 0)" } else { "(strict)" }
        );
        assert!(s_exact >= x_exact);
        if t > 0.0 {
            assert!(s_exact > x_exact);
        }
    }

    assert!(all_pass);
    println!("\ncomparison bound verified on both presets");
}
