use beamsync_core::config::ExperimentConfig;
use beamsync_core::montecarlo::{
    run_multi_panel_schedule, run_sweep_detailed, run_trial, SweepOutput,
};
use beamsync_core::protocol::Scheme;

fn config() -> ExperimentConfig {
    ExperimentConfig {
        mp: 8,
        ms: 8,
        tau_p: 8,
        trials: 1000,
        snr_grid_db: vec![-20.0, -10.0, 0.0, 10.0, 30.0],
        schemes: vec![Scheme::BeamSyncGenie, Scheme::BeamSync, Scheme::Analog],
        master_seed: 5,
        ..ExperimentConfig::default()
    }
}

fn rmse_and_se(out: &SweepOutput, scheme: Scheme, snr: f64) -> (f64, f64, f64) {
    let i = out
        .curve
        .points
        .iter()
        .position(|p| p.scheme == scheme && p.snr_db == snr)
        .unwrap();
    let sq: Vec<f64> = out.trials[i].iter().map(|r| r.squared_error).collect();
    let n = sq.len() as f64;
    let mse = sq.iter().sum::<f64>() / n;
    let var = sq.iter().map(|e| (e - mse).powi(2)).sum::<f64>() / (n - 1.0);
    let p = &out.curve.points[i];
    (
        p.rmse,
        (var / n).sqrt() / (2.0 * mse.sqrt()),
        p.crb_sqrt_avg,
    )
}

#[test]
fn sweep_level_properties() {
    let out = run_sweep_detailed(&config(), 0).unwrap();
    for snr in [-20.0, -10.0, 0.0, 10.0, 30.0] {
        let (g, g_se, _) = rmse_and_se(&out, Scheme::BeamSyncGenie, snr);
        let (b, b_se, _) = rmse_and_se(&out, Scheme::BeamSync, snr);
        let (a, a_se, _) = rmse_and_se(&out, Scheme::Analog, snr);
        assert!(
            g <= b + 3.0 * g_se.hypot(b_se),
            "{snr} dB: genie {g} > beamsync {b}"
        );
        assert!(
            b <= a + 3.0 * b_se.hypot(a_se),
            "{snr} dB: beamsync {b} > analog {a}"
        );

        for scheme in [Scheme::BeamSyncGenie, Scheme::BeamSync, Scheme::Analog] {
            let (r, _, crb) = rmse_and_se(&out, scheme, snr);
            if r <= 10.0 * crb {
                assert!(
                    r >= 0.5 * crb,
                    "{scheme} at {snr} dB: RMSE {r} below half of sqrt(CRB) {crb}"
                );
            }
        }
    }

    let (g, _, crb) = rmse_and_se(&out, Scheme::BeamSyncGenie, 30.0);
    assert!(
        g <= 2.0 * crb && g >= 0.5 * crb,
        "genie RMSE {g}, sqrt(CRB) {crb}"
    );
    let (b, _, _) = rmse_and_se(&out, Scheme::BeamSync, 30.0);
    assert!(b / g < 1.05, "beamsync {b} vs genie {g}");

    let r = &out.trials[3][123];
    let again = run_trial(&config(), r.scheme, r.snr_db, r.trial_index).unwrap();
    assert_eq!(r, &again);
}

#[test]
fn schedule_panels_are_independent_links() {
    let cfg = ExperimentConfig {
        mp: 8,
        ms: 8,
        tau_p: 8,
        noise_scale: 0.0,
        ..ExperimentConfig::default()
    };
    let panels = run_multi_panel_schedule(&cfg, 4, 0.0).unwrap();
    assert_eq!(panels.len(), 4);
    for (i, p) in panels.iter().enumerate() {
        assert_eq!(p.panel, i);
        assert!(p.residual.abs() < 1e-9);
        assert_eq!(
            p.delta_true,
            run_trial(&cfg, Scheme::BeamSync, 0.0, i as u64)
                .unwrap()
                .delta_true
        );
    }
}
