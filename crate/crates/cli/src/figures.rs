//! Figure-data reproduction. Every figure yields tables, optional SVG
//! renderings and a JSON summary.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use rfsqueeze_core::correlators::{CorrelationKind, CorrelationTrace, QuadratureFrame};
use rfsqueeze_core::homodyne::{g2_total_in_frame, Fringe};
use rfsqueeze_core::instrument::{
    average_spectral_wandering, convolve_irf, degraded_phase_scan, degraded_power_curve, CampaignModel,
    QuadratureResponse,
};
use rfsqueeze_core::quadrature::{percent_below_vacuum, FieldSource, QUOTED_OPTIMUM_SATURATION};
use rfsqueeze_core::{
    build_liouvillian, dipole_phase, field_state_from_atom, g2_rf, half_max_contour, quadrature_fluctuation_autocorrelation,
    steady_state, variance_phase_scan, variance_power_scan, wigner, GridSpec, SystemParams,
};
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::Table;
use crate::svg::{heatmap, line_chart, Chart, Series};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum FigureId {
    Fig1b,
    Fig1c,
    Fig1d,
    Fig1e,
    Fig2a,
    Fig2b,
    Fig3a,
    Fig3b,
}

impl FigureId {
    pub fn name(self) -> &'static str {
        match self {
            Self::Fig1b => "fig1b",
            Self::Fig1c => "fig1c",
            Self::Fig1d => "fig1d",
            Self::Fig1e => "fig1e",
            Self::Fig2a => "fig2a",
            Self::Fig2b => "fig2b",
            Self::Fig3a => "fig3a",
            Self::Fig3b => "fig3b",
        }
    }
}

/// Everything a command emits besides the manifest.
#[derive(Default)]
pub struct Artifacts {
    pub tables: Vec<(String, Table)>,
    pub svgs: Vec<(String, String)>,
    pub summary: Value,
    pub notes: Vec<String>,
}

impl Artifacts {
    fn table(&mut self, name: impl Into<String>, table: Table) {
        self.tables.push((name.into(), table));
    }

    fn svg(&mut self, name: impl Into<String>, doc: String) {
        self.svgs.push((name.into(), doc));
    }
}

pub fn reproduce(figure: FigureId, config: &RunConfig, render_svg: bool) -> Result<Artifacts, CliError> {
    let mut out = match figure {
        FigureId::Fig1b => fig1b(config, render_svg),
        FigureId::Fig1c => fig1c(config, render_svg),
        FigureId::Fig1d => fig1d(config, render_svg),
        FigureId::Fig1e => fig1e(config, render_svg),
        FigureId::Fig2a => fig2a(config, render_svg),
        FigureId::Fig2b => fig2b(config, render_svg),
        FigureId::Fig3a => fig3a(config, render_svg),
        FigureId::Fig3b => fig3b(config, render_svg),
    }?;
    if let Value::Object(map) = &mut out.summary {
        map.insert("figure".into(), json!(figure.name()));
    }
    Ok(out)
}

fn col(name: &str, values: Vec<f64>) -> (String, Vec<f64>) {
    (name.to_string(), values)
}

/// Intensity of the superimposed field on one detector versus LO phase.
fn fig1b(config: &RunConfig, render_svg: bool) -> Result<Artifacts, CliError> {
    let params = config.params()?;
    let lo = config.lo_config()?;
    let unit = Fringe::new(&params, &lo, 1.0)?;
    let overlap = unit.mode_overlap_for_visibility(config.lo.visibility)?;
    let fringe = Fringe::new(&params, &lo, overlap)?;
    let phi = config.phi_grid();
    let total = fringe.rf_intensity + fringe.lo_intensity;
    let norm: Vec<f64> = phi.iter().map(|&p| fringe.at(p) / total).collect();
    let per_unit = config.instrument.detector_rate / fringe.rf_intensity;
    let rate: Vec<f64> = phi.iter().map(|&p| fringe.at(p) * per_unit).collect();
    let mut out = Artifacts::default();
    if render_svg {
        out.svg(
            "fig1b",
            line_chart(&Chart {
                title: "Superimposed-field intensity on one detector",
                x_label: "LO phase (rad)",
                y_label: "counts/s",
                log_x: false,
                series: vec![Series::line("fringe", &phi, &rate)],
            }),
        );
    }
    out.table(
        "fig1b",
        Table::from_columns(vec![col("phi_rad", phi), col("intensity_rel", norm), col("rate_cps", rate)]),
    );
    out.summary = json!({
        "visibility": fringe.visibility(),
        "mode_overlap": overlap,
        "max_visibility": unit.visibility(),
        "rate_max_cps": fringe.at(0.0) * per_unit,
        "rate_min_cps": fringe.at(PI) * per_unit,
    });
    Ok(out)
}

/// Dipole phase versus laser detuning at fixed Rabi frequency.
fn fig1c(config: &RunConfig, render_svg: bool) -> Result<Artifacts, CliError> {
    let params = config.params()?;
    if params.rabi == 0.0 {
        return Err(CliError::Config(vec!["fig1c needs a driven emitter (system.s > 0)".into()]));
    }
    let span = config.sweep.detuning_span.expect("resolved");
    let n = config.sweep.detuning_points;
    let detuning: Vec<f64> = (0..n).map(|k| -span + 2.0 * span * k as f64 / (n - 1) as f64).collect();
    let resonant = dipole_phase(&params.with_detuning(0.0))?;
    let phase = detuning
        .iter()
        .map(|&d| dipole_phase(&params.with_detuning(d)))
        .collect::<Result<Vec<f64>, _>>()?;
    let offset: Vec<f64> = phase.iter().map(|p| p - resonant).collect();
    let mut out = Artifacts::default();
    if render_svg {
        out.svg(
            "fig1c",
            line_chart(&Chart {
                title: "Dipole phase offset versus detuning",
                x_label: "detuning (1/ns)",
                y_label: "phase offset (rad)",
                log_x: false,
                series: vec![Series::line("offset", &detuning, &offset)],
            }),
        );
    }
    out.table(
        "fig1c",
        Table::from_columns(vec![
            col("detuning_per_ns", detuning),
            col("dipole_phase_rad", phase),
            col("phase_offset_rad", offset),
        ]),
    );
    out.summary = json!({ "resonant_dipole_phase_rad": resonant });
    Ok(out)
}

/// Mirrors a one-sided trace to negative delays.
fn symmetric(tau: &[f64], values: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mut t: Vec<f64> = tau[1..].iter().rev().map(|x| -x).collect();
    let mut v: Vec<f64> = values[1..].iter().rev().copied().collect();
    t.extend_from_slice(tau);
    v.extend_from_slice(values);
    (t, v)
}

/// Fluorescence-only intensity correlation, ideal and through the instrument.
fn fig1d(config: &RunConfig, render_svg: bool) -> Result<Artifacts, CliError> {
    let params = config.params()?;
    let tau = config.tau_grid()?;
    let model = &config.instrument;
    let ideal = g2_rf(&params, &tau, true)?.real();
    let mut out = Artifacts::default();
    let (t_sym, ideal_sym) = symmetric(&tau, &ideal);
    let mut columns = vec![col("tau_ns", t_sym.clone()), col("g2_ideal", ideal_sym.clone())];
    let mut summary = json!({ "g2_zero_ideal": ideal[0] });
    let instrument_sym;
    if config.instrument_active() {
        let averaged: Vec<C64> = average_spectral_wandering(&params, model, |p| {
            let mut v = g2_rf(p, &tau, false)?.values;
            v.push(C64::new(steady_state(&build_liouvillian(p)?)?.rho_ee, 0.0));
            Ok(v)
        })?;
        let pop = averaged[tau.len()].re;
        let values: Vec<f64> = averaged[..tau.len()].iter().map(|v| v.re / (pop * pop)).collect();
        let trace = CorrelationTrace::from_real(tau.clone(), &values, CorrelationKind::G2Rf);
        let convolved = convolve_irf(&trace, model)?.real();
        summary["g2_zero_instrument"] = json!(convolved[0]);
        instrument_sym = symmetric(&tau, &convolved).1;
        columns.push(col("g2_instrument", instrument_sym.clone()));
        out.notes.push("g2_instrument: wandering-averaged, then convolved with the Gaussian timing response".into());
    } else {
        instrument_sym = Vec::new();
    }
    if render_svg {
        let mut series = vec![Series::line("ideal", &t_sym, &ideal_sym)];
        if !instrument_sym.is_empty() {
            series.push(Series::dashed("instrument", &t_sym, &instrument_sym));
        }
        out.svg(
            "fig1d",
            line_chart(&Chart {
                title: "Intensity correlation, LO blocked",
                x_label: "delay (ns)",
                y_label: "g2",
                log_x: false,
                series,
            }),
        );
    }
    out.table("fig1d", Table::from_columns(columns));
    out.summary = summary;
    Ok(out)
}

/// Superimposed-field intensity correlation at several LO phases.
fn fig1e(config: &RunConfig, render_svg: bool) -> Result<Artifacts, CliError> {
    let params = config.params()?;
    let lo = config.lo_config()?;
    let tau = config.tau_grid()?;
    let phases = &config.sweep.correlation_phases;
    if phases.is_empty() {
        return Err(CliError::Config(vec!["fig1e needs sweep.correlation_phases".into()]));
    }
    let rho_ee = steady_state(&build_liouvillian(&params)?)?.rho_ee;
    let scale = (rho_ee + lo.beta2()).powi(2);
    let frame = QuadratureFrame::Dipole;
    let mut columns = vec![col("tau_ns", tau.clone())];
    let mut levels = Vec::new();
    for (k, &phi) in phases.iter().enumerate() {
        let g = g2_total_in_frame(&params, &lo.with_phase(phi), frame, &tau)?.real();
        levels.push(json!({ "phi_rad": phi, "zero_delay": g[0] / scale, "long_delay": g[g.len() - 1] / scale }));
        columns.push(col(&format!("g2_phase{k}_rel"), g.iter().map(|v| v / scale).collect()));
    }
    let mut out = Artifacts::default();
    out.notes.push(format!(
        "g2_phaseK_rel: G2 over (rho_ee + beta2)^2; phase K is sweep.correlation_phases[K] = {phases:?} rad"
    ));
    let ratio = match (levels.first(), levels.iter().find(|l| (l["phi_rad"].as_f64().unwrap() - PI).abs() < 1e-12)) {
        (Some(a), Some(b)) => json!(a["long_delay"].as_f64().unwrap() / b["long_delay"].as_f64().unwrap()),
        _ => Value::Null,
    };
    let table = Table::from_columns(columns);
    let mut instrument_table = None;
    if config.instrument_active() {
        let cm = CampaignModel::build(&params, &lo, &config.instrument)?;
        let mut cols = vec![col("tau_ns", cm.tau_centers.clone())];
        for (k, &phi) in phases.iter().enumerate() {
            let g = cm.nominal.g2(cm.frozen_coefficients(phi));
            cols.push(col(&format!("g2_phase{k}_rel"), g.iter().map(|v| v / scale).collect()));
        }
        instrument_table = Some(Table::from_columns(cols));
        out.notes.push(
            "fig1e_instrument: histogram bin centres, with wandering, timing response and phase jitter".into(),
        );
    }
    if render_svg {
        let names: Vec<String> = phases.iter().map(|p| format!("phi = {p:.3}")).collect();
        let ys: Vec<Vec<f64>> = (0..phases.len()).map(|k| table.column(&format!("g2_phase{k}_rel")).unwrap()).collect();
        let series = names.iter().zip(&ys).map(|(n, y)| Series::line(n, &tau, y)).collect();
        out.svg(
            "fig1e",
            line_chart(&Chart {
                title: "Intensity correlation, LO unblocked",
                x_label: "delay (ns)",
                y_label: "G2 / (I_RF + I_LO)^2",
                log_x: false,
                series,
            }),
        );
    }
    out.table("fig1e", table);
    if let Some(t) = instrument_table {
        out.table("fig1e_instrument", t);
    }
    out.summary = json!({ "levels": levels, "long_delay_ratio_0_over_pi": ratio, "beta2": lo.beta2() });
    Ok(out)
}

/// Normally ordered quadrature autocorrelations in phase and out of phase.
fn fig2a(config: &RunConfig, render_svg: bool) -> Result<Artifacts, CliError> {
    let params = config.params()?;
    let tau = config.tau_grid()?;
    let x1 = quadrature_fluctuation_autocorrelation(&params, 0.0, &tau)?.real();
    let x2 = quadrature_fluctuation_autocorrelation(&params, PI / 2.0, &tau)?.real();
    let mut out = Artifacts::default();
    let mut instrument = None;
    if config.instrument_active() {
        let response = QuadratureResponse::new(&params, &config.instrument)?;
        let a = response.autocorrelation(0.0, &config.instrument)?;
        let b = response.autocorrelation(PI / 2.0, &config.instrument)?;
        instrument = Some(Table::from_columns(vec![
            col("tau_ns", a.tau_grid.clone()),
            col("in_phase", a.real()),
            col("out_of_phase", b.real()),
        ]));
    }
    if render_svg {
        let mut series = vec![Series::line("in phase", &tau, &x1), Series::line("out of phase", &tau, &x2)];
        let cols = instrument.as_ref().map(|t| (t.column("tau_ns").unwrap(), t.column("in_phase").unwrap(), t.column("out_of_phase").unwrap()));
        if let Some((t, a, b)) = &cols {
            series.push(Series::dashed("in phase, instrument", t, a));
            series.push(Series::dashed("out of phase, instrument", t, b));
        }
        out.svg(
            "fig2a",
            line_chart(&Chart {
                title: "Normally ordered quadrature autocorrelations",
                x_label: "delay (ns)",
                y_label: "<:dX(0) dX(tau):>",
                log_x: false,
                series,
            }),
        );
    }
    out.summary = json!({ "in_phase_zero": x1[0], "out_of_phase_zero": x2[0] });
    out.table(
        "fig2a",
        Table::from_columns(vec![col("tau_ns", tau), col("in_phase", x1), col("out_of_phase", x2)]),
    );
    if let Some(t) = instrument {
        out.table("fig2a_instrument", t);
    }
    Ok(out)
}

/// Normally ordered variance over the full LO phase.
fn fig2b(config: &RunConfig, render_svg: bool) -> Result<Artifacts, CliError> {
    let params = config.params()?;
    let phi = config.phi_grid();
    let ideal = variance_phase_scan(&FieldSource::TwoLevel(params), &phi)?.variance;
    let mut columns = vec![col("phi_rad", phi.clone()), col("variance_ideal", ideal.clone())];
    let degraded = if config.instrument_active() {
        let v = degraded_phase_scan(&params, &config.instrument, &phi)?.variance;
        columns.push(col("variance_instrument", v.clone()));
        Some(v)
    } else {
        None
    };
    let coherent = if config.sweep.coherent_reference {
        let v = variance_phase_scan(&FieldSource::Coherent, &phi)?.variance;
        columns.push(col("variance_coherent", v.clone()));
        Some(v)
    } else {
        None
    };
    let mut out = Artifacts::default();
    if render_svg {
        let mut series = vec![Series::line("ideal", &phi, &ideal)];
        if let Some(v) = &degraded {
            series.push(Series::dashed("instrument", &phi, v));
        }
        if let Some(v) = &coherent {
            series.push(Series::line("coherent reference", &phi, v));
        }
        out.svg(
            "fig2b",
            line_chart(&Chart {
                title: "Normally ordered variance versus LO phase",
                x_label: "LO phase (rad)",
                y_label: "<:(dX)^2:>",
                log_x: false,
                series,
            }),
        );
    }
    let min = ideal.iter().cloned().fold(f64::INFINITY, f64::min);
    out.summary = json!({
        "ideal_min": min,
        "instrument_min": degraded.as_ref().map(|v| v.iter().cloned().fold(f64::INFINITY, f64::min)),
    });
    out.table("fig2b", Table::from_columns(columns));
    Ok(out)
}

/// In-phase and out-of-phase variance versus saturation parameter.
fn fig3a(config: &RunConfig, render_svg: bool) -> Result<Artifacts, CliError> {
    let params = config.params()?;
    let s = config.s_grid();
    let (in_phase, quadrature) = variance_power_scan(&params, &s)?;
    let (s_min, n_min) = in_phase.minimum();
    let mut columns = vec![
        col("s", s.clone()),
        col("variance_in_phase", in_phase.variance.clone()),
        col("variance_out_of_phase", quadrature.variance.clone()),
    ];
    let degraded = if config.instrument_active() {
        let curve = degraded_power_curve(&params, &config.instrument, &s)?;
        columns.push(col("variance_in_phase_instrument", curve.variance.clone()));
        Some(curve)
    } else {
        None
    };
    let mut out = Artifacts::default();
    if render_svg {
        let mut series = vec![
            Series::line("in phase", &s, &in_phase.variance),
            Series::line("out of phase", &s, &quadrature.variance),
        ];
        if let Some(c) = &degraded {
            series.push(Series::dashed("in phase, instrument", &s, &c.variance));
        }
        out.svg(
            "fig3a",
            line_chart(&Chart {
                title: "Normally ordered variance versus excitation power",
                x_label: "s",
                y_label: "<:(dX)^2:>",
                log_x: true,
                series,
            }),
        );
    }
    out.summary = json!({
        "reference_optimum_s": QUOTED_OPTIMUM_SATURATION,
        "in_phase_minimum": { "s": s_min, "variance": n_min, "percent_below_vacuum": percent_below_vacuum(n_min) },
        "instrument_minimum": degraded.as_ref().map(|c| {
            let (s, v) = c.minimum();
            json!({ "s": s, "variance": v, "percent_below_vacuum": percent_below_vacuum(v) })
        }),
    });
    out.notes.push(format!(
        "the ideal in-phase variance is smallest at s = 1/3, not at reference_optimum_s = {QUOTED_OPTIMUM_SATURATION}; the gap is reported, not fitted"
    ));
    out.table("fig3a", Table::from_columns(columns));
    Ok(out)
}

/// Wigner functions of the single-mode field for a set of drive strengths.
fn fig3b(config: &RunConfig, render_svg: bool) -> Result<Artifacts, CliError> {
    let sw = &config.sweep;
    if sw.wigner_s.is_empty() {
        return Err(CliError::Config(vec!["fig3b needs at least one value in sweep.wigner_s".into()]));
    }
    let spec = GridSpec {
        half_width: sw.wigner_half_width,
        points: sw.wigner_points,
    };
    let template = config.params()?;
    let mut out = Artifacts::default();
    let mut panels = Vec::new();
    for (k, &s) in sw.wigner_s.iter().enumerate() {
        let params = SystemParams::new(template.gamma, 0.0, template.detuning, template.dephasing)?.with_saturation(s)?;
        let rho = steady_state(&build_liouvillian(&params)?)?;
        let state = field_state_from_atom(&rho)?.aligned();
        let grid = wigner(&state, &spec)?;
        let contours = half_max_contour(&grid);
        let mut table = Table::new(["x1", "x2", "w"]);
        for (j, &x2) in grid.x2_axis.iter().enumerate() {
            for (i, &x1) in grid.x1_axis.iter().enumerate() {
                table.push(vec![x1, x2, grid.at(i, j)]);
            }
        }
        let mut contour_table = Table::new(["segment", "x1", "x2"]);
        for (c, line) in contours.iter().enumerate() {
            for &(x, y) in &line.points {
                contour_table.push(vec![c as f64, x, y]);
            }
        }
        let (v1, v2) = grid.marginal_variances();
        panels.push(json!({
            "s": s,
            "p0": state.p0,
            "p1": state.p1,
            "coherence": state.coh.norm(),
            "integral": grid.integral(),
            "max": grid.max(),
            "x1_variance": v1,
            "x2_variance": v2,
            "contour_segments": contours.len(),
        }));
        if render_svg {
            out.svg(format!("fig3b_panel{k}"), heatmap(&format!("Wigner function, s = {s}"), &grid, &contours));
        }
        out.table(format!("fig3b_panel{k}"), table);
        out.table(format!("fig3b_panel{k}_contour"), contour_table);
    }
    if sw.wigner_s.iter().any(|&s| s >= 1e5) {
        out.notes.push("panels with s >= 1e5 stand in for s -> infinity, where the state is a mixture with vanishing coherence".into());
    }
    out.notes.push("x1, x2 are dimensionless quadratures; w is the Wigner quasi-probability density".into());
    out.summary = json!({ "panels": panels, "grid": { "half_width": spec.half_width, "points": spec.points } });
    Ok(out)
}
