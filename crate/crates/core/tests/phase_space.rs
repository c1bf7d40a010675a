use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64 as C64;
use rfsqueeze_core::phase_space::level_contour;
use rfsqueeze_core::{
    build_liouvillian, field_state_from_atom, half_max_contour, normally_ordered_variance, steady_state, wigner,
    FieldModeState, GridSpec, SystemParams, WignerGrid,
};

fn atom_state(s: f64) -> FieldModeState {
    let p = SystemParams::from_saturation(1.0, s).unwrap();
    let rho = steady_state(&build_liouvillian(&p).unwrap()).unwrap();
    field_state_from_atom(&rho).unwrap().aligned()
}

fn n_oracle(s: f64, phi: f64) -> f64 {
    if s == 0.0 {
        return 0.0;
    }
    normally_ordered_variance(&SystemParams::from_saturation(1.0, s).unwrap(), phi)
        .unwrap()
        .normally_ordered_variance
}

#[test]
fn field_state_populations() {
    let st = atom_state(0.36);
    assert!((st.p1 - 0.36 / 2.72).abs() < 1e-12);
    assert!((st.coh.norm_sqr() - 0.18 / 1.8496).abs() < 1e-12);
    let vac = atom_state(0.0);
    assert_eq!((vac.p0, vac.p1), (1.0, 0.0));
    assert_eq!(vac.coh.norm(), 0.0);
    let hot = atom_state(1e6);
    assert!((hot.p1 - 0.5).abs() < 1e-6 && hot.coh.norm() < 1e-3);
}

#[test]
fn normalization_and_marginal_variances() {
    for s in [0.0, 0.1, 0.36, 10.0] {
        let g = wigner(&atom_state(s), &GridSpec::default()).unwrap();
        assert!((g.integral() - 1.0).abs() < 1e-6, "s={s}");
        let (v1, v2) = g.marginal_variances();
        assert!((v1 - (0.25 + n_oracle(s, 0.0))).abs() < 1e-6, "s={s} v1={v1}");
        assert!((v2 - (0.25 + n_oracle(s, FRAC_PI_2))).abs() < 1e-6, "s={s} v2={v2}");
    }
}

#[test]
fn squeezed_spread_is_narrower_than_vacuum() {
    let g = wigner(&atom_state(0.36), &GridSpec::default()).unwrap();
    let (v1, v2) = g.marginal_variances();
    assert!(v1 < 0.25 && v2 > 0.25);
}

#[test]
fn vacuum_contour_is_a_circle() {
    let spec = GridSpec::default();
    let g = wigner(&FieldModeState::vacuum(), &spec).unwrap();
    let lines = half_max_contour(&g);
    assert_eq!(lines.len(), 1);
    assert!(lines[0].closed);
    let step = 2.0 * spec.half_width / (spec.points - 1) as f64;
    let radius = (std::f64::consts::LN_2 / 2.0).sqrt();
    for &(x, y) in &lines[0].points {
        assert!((x.hypot(y) - radius).abs() < step, "{x} {y}");
    }
}

#[test]
fn squeezed_contour_is_compressed_along_x1() {
    let g = wigner(&atom_state(0.36), &GridSpec::default()).unwrap();
    let lines = half_max_contour(&g);
    let points: Vec<(f64, f64)> = lines.iter().flat_map(|l| l.points.iter().copied()).collect();
    let width = |f: &dyn Fn(&(f64, f64)) -> f64| {
        let v: Vec<f64> = points.iter().map(f).collect();
        v.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - v.iter().cloned().fold(f64::INFINITY, f64::min)
    };
    let (w1, w2) = (width(&|p| p.0), width(&|p| p.1));
    assert!(w1 < w2, "{w1} {w2}");
}

#[test]
fn incoherent_state_contour_is_isotropic() {
    let st = FieldModeState::new(0.7, 0.3, C64::new(0.0, 0.0)).unwrap();
    let g = wigner(&st, &GridSpec::default()).unwrap();
    let lines = half_max_contour(&g);
    assert!(!lines.is_empty());
    let radii: Vec<f64> = lines.iter().flat_map(|l| l.points.iter().map(|(x, y)| x.hypot(*y))).collect();
    let spread = radii.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        - radii.iter().cloned().fold(f64::INFINITY, f64::min);
    assert!(spread < 0.0625, "{spread}");
}

#[test]
fn equal_mixture_origin() {
    let st = FieldModeState::new(0.5, 0.5, C64::new(0.0, 0.0)).unwrap();
    let g = wigner(&st, &GridSpec::default()).unwrap();
    assert!(g.at(64, 64).abs() < 1e-9);
    assert!((g.x1_axis[64]).abs() < 1e-15);
}

#[test]
fn quarter_turn_permutes_the_grid() {
    let st = atom_state(0.2);
    let spec = GridSpec::default();
    let a = wigner(&st, &spec).unwrap();
    let b = wigner(&st.rotated(FRAC_PI_2), &spec).unwrap();
    let n = spec.points;
    // Rotation by π/2 maps (x1, x2) to (−x2, x1).
    for j in (0..n).step_by(7) {
        for i in (0..n).step_by(7) {
            assert!((b.at(n - 1 - j, i) - a.at(i, j)).abs() < 1e-12);
        }
    }
}

#[test]
fn serialization_round_trips() {
    let g = wigner(&atom_state(0.1), &GridSpec { half_width: 4.0, points: 129 }).unwrap();
    let mut bytes = Vec::new();
    g.write_binary(&mut bytes).unwrap();
    assert_eq!(WignerGrid::read_binary(bytes.as_slice()).unwrap(), g);
    let mut csv = Vec::new();
    g.write_csv(&mut csv).unwrap();
    let text = String::from_utf8(csv).unwrap();
    assert!(text.starts_with("x1,x2,w\n"));
    assert_eq!(text.lines().count(), 129 * 129 + 1);
}

#[test]
fn level_above_maximum_is_empty() {
    let g = wigner(&FieldModeState::vacuum(), &GridSpec::default()).unwrap();
    assert!(level_contour(&g, 2.0 / PI + 0.1).is_empty());
}
