//! Single-mode field states on `{|0⟩, |1⟩}` and their Wigner functions.
//!
//! The emitted mode inherits the atomic state under `σ⁻ ↔ a`. Quadratures
//! are `X₁ = (a + a†)/2`, `X₂ = (a − a†)/2i`, so the vacuum Wigner function is
//! `(2/π) exp(−2|α|²)` with `α = x₁ + i x₂`.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::io::{Read, Write};

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::dynamics::DensityMatrix2;
use crate::error::{Error, Result};

const STATE_TOL: f64 = 1e-12;
const NORMALIZATION_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldModeState {
    pub p0: f64,
    pub p1: f64,
    /// Field amplitude `⟨a⟩ = ⟨1|ρ|0⟩`.
    pub coh: C64,
}

impl FieldModeState {
    pub fn new(p0: f64, p1: f64, coh: C64) -> Result<Self> {
        let state = Self { p0, p1, coh };
        state.validate()?;
        Ok(state)
    }

    pub fn vacuum() -> Self {
        Self {
            p0: 1.0,
            p1: 0.0,
            coh: C64::new(0.0, 0.0),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p0.is_finite() && self.p1.is_finite() && self.coh.re.is_finite() && self.coh.im.is_finite()) {
            return Err(Error::InvalidInput("field state has non-finite entries".into()));
        }
        if (self.p0 + self.p1 - 1.0).abs() > STATE_TOL {
            return Err(Error::InvalidInput(format!(
                "field populations sum to {}, expected 1",
                self.p0 + self.p1
            )));
        }
        if self.p0 < -STATE_TOL || self.p1 < -STATE_TOL || self.coh.norm_sqr() > self.p0 * self.p1 + STATE_TOL {
            return Err(Error::InvalidInput("field state is not positive semidefinite".into()));
        }
        Ok(())
    }

    /// Coherence rotated to the real positive axis, so that `X₁` is the
    /// in-phase quadrature.
    pub fn aligned(&self) -> Self {
        Self {
            coh: C64::new(self.coh.norm(), 0.0),
            ..*self
        }
    }

    /// Phase-space rotation by `theta`.
    pub fn rotated(&self, theta: f64) -> Self {
        Self {
            coh: self.coh * C64::from_polar(1.0, theta),
            ..*self
        }
    }

    /// Wigner function at `(x1, x2)` as a complex number; the imaginary part
    /// is the Hermiticity residue.
    pub fn wigner_complex(&self, x1: f64, x2: f64) -> C64 {
        let alpha = C64::new(x1, x2);
        let r2 = alpha.norm_sqr();
        let envelope = 2.0 / PI * (-2.0 * r2).exp();
        // W₀₀ = 1, W₁₁ = 4|α|² − 1, W₁₀ = 2α*, W₀₁ = 2α, all times the envelope.
        let bracket = C64::new(self.p0 + self.p1 * (4.0 * r2 - 1.0), 0.0)
            + 2.0 * self.coh * alpha.conj()
            + 2.0 * self.coh.conj() * alpha;
        bracket * envelope
    }

    pub fn wigner_at(&self, x1: f64, x2: f64) -> f64 {
        self.wigner_complex(x1, x2).re
    }

    /// `⟨X₁⟩` and `⟨X₂⟩`.
    pub fn mean_quadratures(&self) -> (f64, f64) {
        (self.coh.re, self.coh.im)
    }

    /// Variances of `X₁` and `X₂`: `1/4 + p₁/2 − ⟨X⟩²`.
    pub fn quadrature_variances(&self) -> (f64, f64) {
        let base = 0.25 + 0.5 * self.p1;
        (base - self.coh.re.powi(2), base - self.coh.im.powi(2))
    }
}

/// Maps the atomic state onto the emitted mode: `p₁ = ρ_ee`, `⟨a⟩ = ⟨σ⁻⟩`.
pub fn field_state_from_atom(rho: &DensityMatrix2) -> Result<FieldModeState> {
    rho.validate()?;
    Ok(FieldModeState {
        p0: rho.rho_gg,
        p1: rho.rho_ee,
        coh: rho.lowering_expectation(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    /// Each axis spans `[-half_width, half_width]`.
    pub half_width: f64,
    pub points: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        // Odd so the origin is sampled.
        Self {
            half_width: 4.0,
            points: 129,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WignerGrid {
    pub x1_axis: Vec<f64>,
    pub x2_axis: Vec<f64>,
    /// Row-major with `x2` as the outer index: `values[j * n1 + i] = W(x1_i, x2_j)`.
    pub values: Vec<f64>,
    pub cell_area: f64,
}

impl WignerGrid {
    pub fn at(&self, i1: usize, i2: usize) -> f64 {
        self.values[i2 * self.x1_axis.len() + i1]
    }

    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.cell_area
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Marginal along `x1` (integrated over `x2`).
    pub fn marginal_x1(&self) -> Vec<f64> {
        let n1 = self.x1_axis.len();
        let dx2 = step(&self.x2_axis);
        (0..n1)
            .map(|i| (0..self.x2_axis.len()).map(|j| self.at(i, j)).sum::<f64>() * dx2)
            .collect()
    }

    pub fn marginal_x2(&self) -> Vec<f64> {
        let n1 = self.x1_axis.len();
        let dx1 = step(&self.x1_axis);
        self.values
            .chunks(n1)
            .map(|row| row.iter().sum::<f64>() * dx1)
            .collect()
    }

    /// Variances of the two marginals.
    pub fn marginal_variances(&self) -> (f64, f64) {
        (
            distribution_variance(&self.x1_axis, &self.marginal_x1()),
            distribution_variance(&self.x2_axis, &self.marginal_x2()),
        )
    }

    /// CSV with header `x1,x2,w`, `x1` varying fastest.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "x1,x2,w")?;
        for (j, &x2) in self.x2_axis.iter().enumerate() {
            for (i, &x1) in self.x1_axis.iter().enumerate() {
                writeln!(out, "{x1:.10e},{x2:.10e},{:.16e}", self.at(i, j))?;
            }
        }
        Ok(())
    }

    /// Dense little-endian binary layout:
    ///
    /// | offset | type      | content                         |
    /// |--------|-----------|---------------------------------|
    /// | 0      | `[u8; 4]` | magic `WGNR`                    |
    /// | 4      | `u32`     | format version (1)              |
    /// | 8      | `u32`     | `n1` (points along x1)          |
    /// | 12     | `u32`     | `n2` (points along x2)          |
    /// | 16     | `f64` × 4 | `x1_min, x1_step, x2_min, x2_step` |
    /// | 48     | `f64` × n1·n2 | values, x2-major (row = fixed x2) |
    pub fn write_binary<W: Write>(&self, mut out: W) -> Result<()> {
        out.write_all(b"WGNR")?;
        out.write_all(&1u32.to_le_bytes())?;
        out.write_all(&(self.x1_axis.len() as u32).to_le_bytes())?;
        out.write_all(&(self.x2_axis.len() as u32).to_le_bytes())?;
        for v in [
            self.x1_axis[0],
            step(&self.x1_axis),
            self.x2_axis[0],
            step(&self.x2_axis),
        ] {
            out.write_all(&v.to_le_bytes())?;
        }
        for v in &self.values {
            out.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(mut input: R) -> Result<Self> {
        let mut magic = [0u8; 4];
        input.read_exact(&mut magic)?;
        if &magic != b"WGNR" {
            return Err(Error::Io("not a Wigner grid file".into()));
        }
        let mut word = [0u8; 4];
        let mut read_u32 = |input: &mut R| -> Result<u32> {
            input.read_exact(&mut word)?;
            Ok(u32::from_le_bytes(word))
        };
        let version = read_u32(&mut input)?;
        if version != 1 {
            return Err(Error::Io(format!("unsupported Wigner grid version {version}")));
        }
        let n1 = read_u32(&mut input)? as usize;
        let n2 = read_u32(&mut input)? as usize;
        let read_f64 = |input: &mut R| -> Result<f64> {
            let mut b = [0u8; 8];
            input.read_exact(&mut b)?;
            Ok(f64::from_le_bytes(b))
        };
        let (x1_min, dx1, x2_min, dx2) = (
            read_f64(&mut input)?,
            read_f64(&mut input)?,
            read_f64(&mut input)?,
            read_f64(&mut input)?,
        );
        let mut values = Vec::with_capacity(n1 * n2);
        for _ in 0..n1 * n2 {
            values.push(read_f64(&mut input)?);
        }
        Ok(Self {
            x1_axis: (0..n1).map(|i| x1_min + i as f64 * dx1).collect(),
            x2_axis: (0..n2).map(|j| x2_min + j as f64 * dx2).collect(),
            values,
            cell_area: dx1 * dx2,
        })
    }
}

fn step(axis: &[f64]) -> f64 {
    if axis.len() < 2 {
        0.0
    } else {
        (axis[axis.len() - 1] - axis[0]) / (axis.len() - 1) as f64
    }
}

fn distribution_variance(axis: &[f64], density: &[f64]) -> f64 {
    let mass: f64 = density.iter().sum();
    let mean = axis.iter().zip(density).map(|(x, p)| x * p).sum::<f64>() / mass;
    axis.iter()
        .zip(density)
        .map(|(x, p)| (x - mean).powi(2) * p)
        .sum::<f64>()
        / mass
}

/// Samples the Wigner function of `state` on a square grid.
pub fn wigner(state: &FieldModeState, spec: &GridSpec) -> Result<WignerGrid> {
    state.validate()?;
    if !(spec.half_width > 0.0) || spec.points < 3 {
        return Err(Error::InvalidInput(format!(
            "grid needs a positive half width and at least 3 points, got {spec:?}"
        )));
    }
    let n = spec.points;
    let dx = 2.0 * spec.half_width / (n - 1) as f64;
    let axis: Vec<f64> = (0..n).map(|k| -spec.half_width + k as f64 * dx).collect();
    let mut values = Vec::with_capacity(n * n);
    let mut residue: f64 = 0.0;
    for &x2 in &axis {
        for &x1 in &axis {
            let w = state.wigner_complex(x1, x2);
            residue = residue.max(w.im.abs());
            values.push(w.re);
        }
    }
    if residue > 1e-12 {
        return Err(Error::Accuracy {
            context: "Wigner function imaginary residue".into(),
            defect: residue,
            tolerance: 1e-12,
        });
    }
    let grid = WignerGrid {
        x1_axis: axis.clone(),
        x2_axis: axis,
        values,
        cell_area: dx * dx,
    };
    let defect = (grid.integral() - 1.0).abs();
    if defect > NORMALIZATION_TOL {
        return Err(Error::Accuracy {
            context: "Wigner normalization (grid too small or too coarse)".into(),
            defect,
            tolerance: NORMALIZATION_TOL,
        });
    }
    Ok(grid)
}

/// A level-set polyline in `(x1, x2)` coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polyline {
    pub points: Vec<(f64, f64)>,
    pub closed: bool,
}

impl Polyline {
    /// Largest `|x1|` and `|x2|` reached.
    pub fn extents(&self) -> (f64, f64) {
        self.points.iter().fold((0.0f64, 0.0f64), |(a, b), &(x, y)| {
            (a.max(x.abs()), b.max(y.abs()))
        })
    }
}

/// Contour at half of the grid maximum.
pub fn half_max_contour(grid: &WignerGrid) -> Vec<Polyline> {
    let max = grid.max();
    if !(max > 0.0) {
        return Vec::new();
    }
    level_contour(grid, 0.5 * max)
}

/// Edge identifiers: horizontal edge from (i, j) to (i+1, j), or vertical
/// edge from (i, j) to (i, j+1).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Edge {
    H(usize, usize),
    V(usize, usize),
}

/// Marching-squares level set with linear interpolation along cell edges.
/// Saddle cells are resolved by the cell-centre average.
pub fn level_contour(grid: &WignerGrid, level: f64) -> Vec<Polyline> {
    let n1 = grid.x1_axis.len();
    let n2 = grid.x2_axis.len();
    let value = |i: usize, j: usize| grid.at(i, j);
    let point = |edge: Edge| -> (f64, f64) {
        match edge {
            Edge::H(i, j) => {
                let (a, b) = (value(i, j), value(i + 1, j));
                let t = (level - a) / (b - a);
                let x = grid.x1_axis[i] + t * (grid.x1_axis[i + 1] - grid.x1_axis[i]);
                (x, grid.x2_axis[j])
            }
            Edge::V(i, j) => {
                let (a, b) = (value(i, j), value(i, j + 1));
                let t = (level - a) / (b - a);
                let y = grid.x2_axis[j] + t * (grid.x2_axis[j + 1] - grid.x2_axis[j]);
                (grid.x1_axis[i], y)
            }
        }
    };

    let mut segments: Vec<(Edge, Edge)> = Vec::new();
    for j in 0..n2.saturating_sub(1) {
        for i in 0..n1.saturating_sub(1) {
            let corners = [value(i, j), value(i + 1, j), value(i + 1, j + 1), value(i, j + 1)];
            let above: Vec<bool> = corners.iter().map(|&v| v >= level).collect();
            // Edges in order bottom, right, top, left; corner k sits between edges k-1 and k.
            let edges = [Edge::H(i, j), Edge::V(i + 1, j), Edge::H(i, j + 1), Edge::V(i, j)];
            let crossing: Vec<usize> = (0..4)
                .filter(|&e| above[e] != above[(e + 1) % 4])
                .collect();
            match crossing.len() {
                2 => segments.push((edges[crossing[0]], edges[crossing[1]])),
                4 => {
                    let centre = corners.iter().sum::<f64>() / 4.0;
                    // Pair edges around the corners that share the centre's side.
                    if (centre >= level) == above[0] {
                        segments.push((edges[0], edges[1]));
                        segments.push((edges[2], edges[3]));
                    } else {
                        segments.push((edges[3], edges[0]));
                        segments.push((edges[1], edges[2]));
                    }
                }
                _ => {}
            }
        }
    }

    let mut adjacency: HashMap<Edge, Vec<usize>> = HashMap::new();
    for (k, (a, b)) in segments.iter().enumerate() {
        adjacency.entry(*a).or_default().push(k);
        adjacency.entry(*b).or_default().push(k);
    }
    let mut used = vec![false; segments.len()];
    let mut lines = Vec::new();
    for start in 0..segments.len() {
        if used[start] {
            continue;
        }
        used[start] = true;
        let (first, second) = segments[start];
        let mut chain = vec![first, second];
        // Walk forward from `second`, then backward from `first`.
        for direction in 0..2 {
            loop {
                let tip = if direction == 0 { *chain.last().unwrap() } else { chain[0] };
                let next = adjacency
                    .get(&tip)
                    .and_then(|ks| ks.iter().copied().find(|&k| !used[k]));
                let Some(k) = next else { break };
                used[k] = true;
                let (a, b) = segments[k];
                let other = if a == tip { b } else { a };
                if direction == 0 {
                    chain.push(other);
                } else {
                    chain.insert(0, other);
                }
            }
        }
        let closed = chain.len() > 2 && chain.first() == chain.last();
        if closed {
            chain.pop();
        }
        lines.push(Polyline {
            points: chain.into_iter().map(point).collect(),
            closed,
        });
    }
    lines
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn vacuum_origin_value() {
        assert_abs_diff_eq!(FieldModeState::vacuum().wigner_at(0.0, 0.0), 2.0 / PI, epsilon = 1e-15);
    }

    #[test]
    fn equal_mixture_vanishes_at_origin() {
        let s = FieldModeState::new(0.5, 0.5, C64::new(0.0, 0.0)).unwrap();
        assert_abs_diff_eq!(s.wigner_at(0.0, 0.0), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn invalid_states_rejected() {
        assert!(FieldModeState::new(0.6, 0.5, C64::new(0.0, 0.0)).is_err());
        assert!(FieldModeState::new(0.5, 0.5, C64::new(0.6, 0.0)).is_err());
    }

    #[test]
    fn small_grid_reports_defect() {
        let spec = GridSpec {
            half_width: 0.5,
            points: 33,
        };
        assert!(matches!(
            wigner(&FieldModeState::vacuum(), &spec),
            Err(Error::Accuracy { .. })
        ));
    }

    #[test]
    fn binary_roundtrip() {
        let grid = wigner(&FieldModeState::vacuum(), &GridSpec { half_width: 4.0, points: 65 }).unwrap();
        let mut buf = Vec::new();
        grid.write_binary(&mut buf).unwrap();
        assert_eq!(buf.len(), 48 + 8 * 65 * 65);
        let back = WignerGrid::read_binary(buf.as_slice()).unwrap();
        assert_eq!(back.values, grid.values);
        assert_abs_diff_eq!(back.x1_axis[64], 4.0, epsilon = 1e-12);
    }

    #[test]
    fn contour_of_flat_negative_grid_is_empty() {
        let s = FieldModeState::new(0.0, 1.0, C64::new(0.0, 0.0)).unwrap();
        let grid = wigner(&s, &GridSpec::default()).unwrap();
        // The n = 1 state has a positive ring, so the half-max set is an annulus.
        assert_eq!(half_max_contour(&grid).len(), 2);
        let empty = WignerGrid {
            x1_axis: vec![0.0, 1.0],
            x2_axis: vec![0.0, 1.0],
            values: vec![-1.0; 4],
            cell_area: 1.0,
        };
        assert!(half_max_contour(&empty).is_empty());
    }
}
