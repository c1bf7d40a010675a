//! Sweep, calibration and campaign runs.

use rfsqueeze_core::instrument::{
    calibrate_imperfections, estimate_quadrature_variance, postselect, Calibration, CampaignModel,
    QuadratureResponse,
};
use rfsqueeze_core::quadrature::percent_below_vacuum;
use rfsqueeze_core::{dipole_phase, heisenberg_product, variance_phase_scan, FieldSource, SystemParams};
use serde_json::json;

use crate::config::RunConfig;
use crate::error::CliError;
use crate::figures::Artifacts;
use crate::output::Table;
use crate::svg::{line_chart, Chart, Series};

/// Normally ordered variance over the saturation × phase grid, plus
/// per-power Heisenberg product and dipole phase.
pub fn sweep(config: &RunConfig, render_svg: bool) -> Result<Artifacts, CliError> {
    let template = config.params()?;
    let s_grid = config.s_grid();
    let phi = config.phi_grid();
    let active = config.instrument_active();
    let mut grid = if active {
        Table::new(["s", "phi_rad", "variance", "variance_instrument"])
    } else {
        Table::new(["s", "phi_rad", "variance"])
    };
    let mut per_s = Table::new([
        "s",
        "rabi_per_ns",
        "variance_min",
        "phi_min_rad",
        "heisenberg_product",
        "dipole_phase_rad",
    ]);
    let mut best = (f64::NAN, f64::NAN, f64::INFINITY);
    for &s in &s_grid {
        let params = template.with_saturation(s)?;
        let scan = variance_phase_scan(&FieldSource::TwoLevel(params), &phi)?;
        let degraded = if active {
            let response = QuadratureResponse::new(&params, &config.instrument)?;
            let m = &config.instrument;
            Some(
                phi.iter()
                    .map(|&p| response.variance(p, m.irf_fwhm, m.phase_jitter_sigma))
                    .collect::<Result<Vec<f64>, _>>()?,
            )
        } else {
            None
        };
        for (k, (&p, &v)) in phi.iter().zip(&scan.variance).enumerate() {
            let mut row = vec![s, p, v];
            if let Some(d) = &degraded {
                row.push(d[k]);
            }
            grid.push(row);
        }
        let (phi_min, v_min) = scan.minimum();
        if v_min < best.2 {
            best = (s, phi_min, v_min);
        }
        per_s.push(vec![
            s,
            params.rabi,
            v_min,
            phi_min,
            heisenberg_product(&params)?,
            dipole_phase(&params)?,
        ]);
    }
    let mut out = Artifacts::default();
    if render_svg {
        let s = per_s.column("s").unwrap();
        out.svgs.push((
            "sweep_minimum".into(),
            line_chart(&Chart {
                title: "Smallest normally ordered variance over phase",
                x_label: "s",
                y_label: "min <:(dX)^2:>",
                log_x: s.iter().all(|&v| v > 0.0),
                series: vec![Series::line("minimum over phase", &s, &per_s.column("variance_min").unwrap())],
            }),
        ));
    }
    out.summary = json!({
        "points": s_grid.len() * phi.len(),
        "minimum": { "s": best.0, "phi_rad": best.1, "variance": best.2, "percent_below_vacuum": percent_below_vacuum(best.2) },
    });
    out.tables.push(("sweep_grid".into(), grid));
    out.tables.push(("sweep_per_s".into(), per_s));
    Ok(out)
}

fn calibration_params(config: &RunConfig) -> Result<SystemParams, CliError> {
    let s = config.calibration.s.expect("resolved");
    Ok(config.params()?.with_saturation(s)?)
}

fn run_calibration(config: &RunConfig) -> Result<Calibration, CliError> {
    let params = calibration_params(config)?;
    let target = config.calibration.target.expect("resolved");
    Ok(calibrate_imperfections(
        &params,
        target,
        config.free_parameter(),
        &config.instrument,
        &config.s_grid(),
    )?)
}

/// Solves for the free imperfection width that reproduces the target squeezing.
pub fn calibrate(config: &RunConfig, render_svg: bool) -> Result<(Artifacts, Calibration), CliError> {
    let cal = run_calibration(config)?;
    let mut out = Artifacts::default();
    let curve = &cal.power_curve;
    let (s_min, v_min) = curve.minimum();
    if render_svg {
        out.svgs.push((
            "calibration_power_curve".into(),
            line_chart(&Chart {
                title: "Calibrated in-phase variance versus power",
                x_label: "s",
                y_label: "<:(dX)^2:>",
                log_x: true,
                series: vec![Series::line("calibrated", &curve.grid, &curve.variance)],
            }),
        ));
    }
    out.tables.push((
        "calibration_power_curve".into(),
        Table::from_columns(vec![
            ("s".into(), curve.grid.clone()),
            ("variance_in_phase_instrument".into(), curve.variance.clone()),
        ]),
    ));
    out.summary = json!({
        "free": config.calibration.free,
        "value": cal.value,
        "target": cal.target,
        "target_percent": percent_below_vacuum(cal.target),
        "ideal": cal.ideal,
        "achieved": cal.achieved,
        "curve_minimum": { "s": s_min, "variance": v_min },
    });
    Ok((out, cal))
}

/// Result of a campaign run: artifacts for the emitter and the raw result,
/// which writes its own directory tree.
pub struct CampaignRun {
    pub artifacts: Artifacts,
    pub result: rfsqueeze_core::instrument::CampaignResult,
    pub calibration: Option<Calibration>,
}

/// Emulates, postselects, bins and estimates one acquisition campaign.
pub fn campaign(config: &RunConfig, seed: u64) -> Result<CampaignRun, CliError> {
    let params = config.params()?;
    let lo = config.lo_config()?;
    let block = &config.campaign;
    let calibration = if block.calibrate { Some(run_calibration(config)?) } else { None };
    let model = calibration.as_ref().map_or_else(|| config.instrument.clone(), |c| c.model.clone());
    let cm = CampaignModel::build(&params, &lo, &model)?;
    let raw = cm.simulate(block.duration_s, seed)?;
    let kept = postselect(&raw, &block.thresholds)?.with_binning(block.bins)?;
    let estimates = estimate_quadrature_variance(&kept, &cm, &block.estimator)?;
    let response = QuadratureResponse::new(&params, &model)?;
    let mut table = Table::new([
        "bin",
        "partner",
        "phi_low_rad",
        "phi_high_rad",
        "intervals",
        "estimate",
        "standard_error",
        "expected",
        "model",
    ]);
    let mut summary_bins = Vec::new();
    for e in &estimates {
        let mid = 0.5 * (e.phi_low + e.phi_high);
        let model_value = response.variance(mid, model.irf_fwhm, model.phase_jitter_sigma)?;
        table.push(vec![
            e.bin as f64,
            e.partner as f64,
            e.phi_low,
            e.phi_high,
            (e.intervals + e.partner_intervals) as f64,
            e.estimate,
            e.standard_error,
            e.expected,
            model_value,
        ]);
        summary_bins.push(json!({ "bin": e.bin, "estimate": e.estimate, "standard_error": e.standard_error }));
    }
    let best = estimates
        .iter()
        .min_by(|a, b| a.estimate.total_cmp(&b.estimate))
        .expect("estimates are non-empty");
    let mut artifacts = Artifacts {
        summary: json!({
            "duration_s": block.duration_s,
            "intervals": raw.intervals.len(),
            "accepted": kept.accepted_count(),
            "coincidences": raw.total_coincidences(),
            "fringe_visibility": raw.fringe_reference.visibility(),
            "calibrated": calibration.as_ref().map(|c| json!({ "free": config.calibration.free, "value": c.value })),
            "most_squeezed_bin": {
                "bin": best.bin,
                "estimate": best.estimate,
                "standard_error": best.standard_error,
                "percent_below_vacuum": percent_below_vacuum(best.estimate),
            },
            "bins": summary_bins,
        }),
        ..Artifacts::default()
    };
    artifacts.notes.push("model: degraded variance at the bin mid-phase".into());
    artifacts.notes.push("campaign/: per-interval histograms, fringe reference and phase-binned data".into());
    artifacts.tables.push(("estimates".into(), table));
    Ok(CampaignRun {
        artifacts,
        result: kept,
        calibration,
    })
}
