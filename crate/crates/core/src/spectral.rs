//! Discretized Witten Laplacians on the model suspensions `Σ(S¹)` and `Σ(T²)`
//! with the metric `dφ² + sin²φ |dθ|²` and height function `h = cos φ`.
//!
//! Forms are expanded in Fourier modes along the circle factors. Each mode is
//! a complex on the radial interval `[0, π]`: components `dφ^a ∧ dθ_I` with
//! `a = 0` on the `N + 1` grid nodes and `a = 1` on the `N` cell midpoints.
//! The deformed differential is the exact discrete conjugate
//! `e^{-εh} d e^{εh}`, so `d_ε² = 0` holds without error terms and the
//! discrete cohomology is the same for every `ε`.

use std::collections::HashMap;

use nalgebra::DMatrix;
use num_rational::Ratio;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::perversity::Subspace;
use crate::rational::{to_f64, RationalSpec};
use crate::space::{SpaceExpr, SubspaceSpec};

pub const MIN_GRID_POINTS: usize = 50;
/// Lowest eigenvalues scanned by the automatic threshold.
pub const AUTO_WINDOW: usize = 20;
/// `gap_ratio` an `ε` must reach in every degree before its counts are trusted.
pub const REQUIRED_GAP: f64 = 10.0;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ModelKind {
    SpindleCircle,
    SuspensionTorus2 { w: Subspace },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Threshold {
    Auto,
    Fixed(Ratio<i64>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpectralModel {
    pub kind: ModelKind,
    pub grid_points: usize,
    pub mode_cutoff: usize,
    pub epsilons: Vec<Ratio<i64>>,
    pub threshold: Threshold,
    /// Eigenvalues retained per degree in reports.
    pub keep: usize,
}

impl SpectralModel {
    pub fn new(
        kind: ModelKind,
        grid_points: usize,
        mode_cutoff: usize,
        epsilons: Vec<Ratio<i64>>,
        threshold: Threshold,
    ) -> Result<Self> {
        if grid_points < MIN_GRID_POINTS {
            return Err(Error::InvalidModel(format!(
                "grid_points = {grid_points}, need at least {MIN_GRID_POINTS}"
            )));
        }
        if let Some(e) = epsilons.iter().find(|e| **e < Ratio::from_integer(0)) {
            return Err(Error::InvalidModel(format!("epsilon {e} is negative")));
        }
        if let Threshold::Fixed(c) = threshold {
            if c <= Ratio::from_integer(0) {
                return Err(Error::InvalidModel(format!(
                    "threshold {c} must be positive"
                )));
            }
        }
        if let ModelKind::SuspensionTorus2 { w } = &kind {
            if w.ambient().dim() != 2 {
                return Err(Error::InvalidModel("w must live in H¹(T²)".into()));
            }
        }
        Ok(SpectralModel {
            kind,
            grid_points,
            mode_cutoff,
            epsilons,
            threshold,
            keep: AUTO_WINDOW,
        })
    }

    pub fn spindle_circle(
        grid_points: usize,
        mode_cutoff: usize,
        epsilons: Vec<Ratio<i64>>,
    ) -> Result<Self> {
        Self::new(
            ModelKind::SpindleCircle,
            grid_points,
            mode_cutoff,
            epsilons,
            Threshold::Auto,
        )
    }

    pub fn suspension_torus2(
        w: Vec<Vec<i64>>,
        grid_points: usize,
        mode_cutoff: usize,
        epsilons: Vec<Ratio<i64>>,
    ) -> Result<Self> {
        let w = match SpaceExpr::suspension(SpaceExpr::Torus(2), w)? {
            SpaceExpr::Suspension(node) => node.w,
            _ => unreachable!(),
        };
        Self::new(
            ModelKind::SuspensionTorus2 { w },
            grid_points,
            mode_cutoff,
            epsilons,
            Threshold::Auto,
        )
    }

    /// Number of circle factors in the link.
    pub fn circles(&self) -> usize {
        match self.kind {
            ModelKind::SpindleCircle => 1,
            ModelKind::SuspensionTorus2 { .. } => 2,
        }
    }

    pub fn dim(&self) -> usize {
        self.circles() + 1
    }

    /// The stratified space this model discretizes.
    pub fn space(&self) -> SpaceExpr {
        match &self.kind {
            ModelKind::SpindleCircle => SpaceExpr::suspension(SpaceExpr::Circle, vec![]),
            ModelKind::SuspensionTorus2 { w } => {
                SpaceExpr::suspension(SpaceExpr::Torus(2), w.rows().to_vec())
            }
        }
        .expect("model spaces are valid")
    }

    /// All modes in `[-Mmax, Mmax]^k`, lexicographic.
    pub fn modes(&self) -> Vec<Vec<i64>> {
        let m = self.mode_cutoff as i64;
        let mut out = vec![vec![]];
        for _ in 0..self.circles() {
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    (-m..=m).map(move |j| {
                        let mut v = prefix.clone();
                        v.push(j);
                        v
                    })
                })
                .collect();
        }
        out
    }

    /// Orthonormal basis of `w` in the middle-degree channels.
    fn w_frame(&self) -> Vec<[f64; 2]> {
        let ModelKind::SuspensionTorus2 { w } = &self.kind else {
            return vec![];
        };
        let mut frame: Vec<[f64; 2]> = Vec::new();
        for row in w.rows() {
            let mut v = [row[0] as f64, row[1] as f64];
            for u in &frame {
                let dot = u[0] * v[0] + u[1] * v[1];
                v = [v[0] - dot * u[0], v[1] - dot * u[1]];
            }
            let norm = v[0].hypot(v[1]);
            frame.push([v[0] / norm, v[1] / norm]);
        }
        frame
    }
}

/// A basis vector of a discrete form space: a grid location and a unit
/// combination of `dθ_I` channels there.
#[derive(Debug, Clone)]
struct Dof {
    a: usize,
    pos: usize,
    coeffs: Vec<(usize, f64)>,
}

fn sign(j: usize, mask: usize) -> f64 {
    if (mask & ((1 << j) - 1)).count_ones().is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

struct Grid {
    n: usize,
    step: f64,
    epsilon: f64,
    circles: usize,
}

impl Grid {
    fn node(&self, i: usize) -> f64 {
        i as f64 * self.step
    }

    fn edge(&self, e: usize) -> f64 {
        (e as f64 + 0.5) * self.step
    }

    fn weight_power(&self, mask: usize) -> i32 {
        self.circles as i32 - 2 * mask.count_ones() as i32
    }

    /// Quadrature of `sin^p` over the dual cell of a node or over an edge.
    fn mass(&self, a: usize, pos: usize, mask: usize) -> f64 {
        let p = self.weight_power(mask);
        let h = self.step;
        if a == 1 {
            return h * self.edge(pos).sin().powi(p);
        }
        if pos == 0 || pos == self.n {
            return 0.5 * h * (0.25 * h).sin().powi(p);
        }
        let phi = self.node(pos);
        0.5 * h * ((phi - 0.25 * h).sin().powi(p) + (phi + 0.25 * h).sin().powi(p))
    }

    fn dof_mass(&self, d: &Dof) -> f64 {
        d.coeffs
            .iter()
            .map(|&(mask, c)| c * c * self.mass(d.a, d.pos, mask))
            .sum()
    }

    /// Image of the unit form at `(a, pos, mask)` under `d_ε`.
    fn apply(
        &self,
        a: usize,
        pos: usize,
        mask: usize,
        mode: &[i64],
        out: &mut Vec<(usize, usize, usize, f64)>,
    ) {
        let eps = self.epsilon;
        let h = |phi: f64| phi.cos();
        if a == 0 {
            let i = pos;
            let hi = h(self.node(i));
            if i >= 1 {
                let e = i - 1;
                out.push((1, e, mask, (eps * (hi - h(self.edge(e)))).exp() / self.step));
            }
            if i < self.n {
                out.push((
                    1,
                    i,
                    mask,
                    -(eps * (hi - h(self.edge(i)))).exp() / self.step,
                ));
            }
        }
        for (j, &m) in mode.iter().enumerate() {
            if m == 0 || mask & (1 << j) != 0 {
                continue;
            }
            let s = sign(j, mask) * m as f64;
            let value = if a == 0 { s } else { -s };
            out.push((a, pos, mask | (1 << j), value));
        }
    }
}

fn dofs_for_degree(grid: &Grid, q: usize, zero_mode: bool, frame: &[[f64; 2]]) -> Vec<Dof> {
    let k = grid.circles;
    let n = grid.n;
    let mut dofs = Vec::new();
    for a in 0..=1usize {
        if q < a {
            continue;
        }
        let masks: Vec<usize> = (0..1usize << k)
            .filter(|m| m.count_ones() as usize + a == q)
            .collect();
        if a == 1 {
            for &mask in &masks {
                dofs.extend((0..n).map(|e| Dof {
                    a,
                    pos: e,
                    coeffs: vec![(mask, 1.0)],
                }));
            }
            continue;
        }
        for &mask in &masks {
            let twice = 2 * mask.count_ones() as usize;
            let poles = zero_mode && twice < k;
            let range = if poles { 0..n + 1 } else { 1..n };
            dofs.extend(range.map(|i| Dof {
                a,
                pos: i,
                coeffs: vec![(mask, 1.0)],
            }));
        }
        let middle =
            zero_mode && k.is_multiple_of(2) && masks.iter().any(|m| 2 * m.count_ones() as usize == k);
        if middle {
            // pole values constrained to w; the middle masks for T² are 0b01, 0b10
            for pole in [0, n] {
                for u in frame {
                    dofs.push(Dof {
                        a,
                        pos: pole,
                        coeffs: vec![(0b01, u[0]), (0b10, u[1])],
                    });
                }
            }
        }
    }
    dofs
}

/// Per-mode discrete complex in orthonormal coordinates together with its
/// degree-block Laplacians.
#[derive(Debug, Clone)]
pub struct ModeOperator {
    pub mode: Vec<i64>,
    /// `d̃_q`, mapping degree `q` to `q + 1`.
    pub differentials: Vec<DMatrix<f64>>,
    /// `Δ_q = d̃_qᵀ d̃_q + d̃_{q-1} d̃_{q-1}ᵀ`.
    pub blocks: Vec<DMatrix<f64>>,
}

impl ModeOperator {
    pub fn degree_dims(&self) -> Vec<usize> {
        self.blocks.iter().map(|b| b.nrows()).collect()
    }

    /// The full block-diagonal Laplacian and the form degree of each row.
    pub fn full(&self) -> (DMatrix<f64>, Vec<usize>) {
        let total: usize = self.degree_dims().iter().sum();
        let mut m = DMatrix::zeros(total, total);
        let mut degrees = Vec::with_capacity(total);
        let mut offset = 0;
        for (q, b) in self.blocks.iter().enumerate() {
            m.view_mut((offset, offset), (b.nrows(), b.ncols()))
                .copy_from(b);
            degrees.extend(std::iter::repeat_n(q, b.nrows()));
            offset += b.nrows();
        }
        (m, degrees)
    }

    /// `max_q ‖Δ_q - Δ_qᵀ‖_F / ‖Δ_q‖_F`.
    pub fn asymmetry(&self) -> f64 {
        self.blocks
            .iter()
            .filter(|b| b.nrows() > 0)
            .map(|b| (b - b.transpose()).norm() / b.norm().max(f64::MIN_POSITIVE))
            .fold(0.0, f64::max)
    }

    /// `max_q ‖d̃_{q+1} d̃_q‖_F / (‖d̃_{q+1}‖_F ‖d̃_q‖_F)`.
    pub fn complex_defect(&self) -> f64 {
        self.differentials
            .windows(2)
            .map(|w| {
                let denom = (w[1].norm() * w[0].norm()).max(f64::MIN_POSITIVE);
                (&w[1] * &w[0]).norm() / denom
            })
            .fold(0.0, f64::max)
    }
}

pub fn assemble_mode_operator(
    model: &SpectralModel,
    mode: &[i64],
    epsilon: Ratio<i64>,
) -> Result<ModeOperator> {
    let k = model.circles();
    if mode.len() != k {
        return Err(Error::InvalidModel(format!(
            "mode {mode:?} needs {k} components"
        )));
    }
    if let Some(m) = mode
        .iter()
        .find(|m| m.unsigned_abs() as usize > model.mode_cutoff)
    {
        return Err(Error::InvalidModel(format!(
            "mode component {m} exceeds cutoff {}",
            model.mode_cutoff
        )));
    }
    let grid = Grid {
        n: model.grid_points,
        step: std::f64::consts::PI / model.grid_points as f64,
        epsilon: to_f64(epsilon),
        circles: k,
    };
    let zero_mode = mode.iter().all(|&m| m == 0);
    let frame = model.w_frame();
    let dofs: Vec<Vec<Dof>> = (0..=k + 1)
        .map(|q| dofs_for_degree(&grid, q, zero_mode, &frame))
        .collect();
    let scales: Vec<Vec<f64>> = dofs
        .iter()
        .map(|ds| ds.iter().map(|d| grid.dof_mass(d).sqrt()).collect())
        .collect();

    let mut differentials = Vec::with_capacity(k + 1);
    let mut image = Vec::new();
    for q in 0..=k {
        let mut lookup: HashMap<(usize, usize, usize), Vec<(usize, f64)>> = HashMap::new();
        for (row, d) in dofs[q + 1].iter().enumerate() {
            for &(mask, c) in &d.coeffs {
                lookup.entry((d.a, d.pos, mask)).or_default().push((row, c));
            }
        }
        let mut mat = DMatrix::zeros(dofs[q + 1].len(), dofs[q].len());
        for (col, d) in dofs[q].iter().enumerate() {
            for &(mask, c) in &d.coeffs {
                image.clear();
                grid.apply(d.a, d.pos, mask, mode, &mut image);
                for &(a, pos, m, v) in &image {
                    // targets outside the boundary-condition space carry no weight
                    for &(row, rc) in lookup.get(&(a, pos, m)).into_iter().flatten() {
                        mat[(row, col)] += rc * c * v * scales[q + 1][row] / scales[q][col];
                    }
                }
            }
        }
        differentials.push(mat);
    }

    let blocks = (0..=k + 1)
        .map(|q| {
            let n = dofs[q].len();
            let mut b = DMatrix::zeros(n, n);
            if q <= k {
                b += differentials[q].transpose() * &differentials[q];
            }
            if q >= 1 {
                b += &differentials[q - 1] * differentials[q - 1].transpose();
            }
            b
        })
        .collect();
    Ok(ModeOperator {
        mode: mode.to_vec(),
        differentials,
        blocks,
    })
}

/// Ascending eigenvalues of a symmetric block. Only the lower triangle is read.
pub fn symmetric_eigenvalues(m: &DMatrix<f64>) -> Result<Vec<f64>> {
    if m.nrows() == 0 {
        return Ok(vec![]);
    }
    if m.iter().any(|x| !x.is_finite()) {
        return Err(Error::NoConvergence("matrix has non-finite entries".into()));
    }
    let mut vals: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
    if vals.iter().any(|x| !x.is_finite()) {
        return Err(Error::NoConvergence(format!(
            "{}x{} block",
            m.nrows(),
            m.ncols()
        )));
    }
    vals.sort_by(f64::total_cmp);
    Ok(vals)
}

/// Roundoff scale of eigenvalues of `m`: `n · ε_mach · ‖m‖_∞`.
pub fn roundoff_floor(m: &DMatrix<f64>) -> f64 {
    let norm = m
        .row_iter()
        .map(|r| r.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max);
    m.nrows() as f64 * f64::EPSILON * norm
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModeSpectrum {
    pub mode: Vec<i64>,
    /// Full ascending spectrum of each degree block.
    pub eigenvalues: Vec<Vec<f64>>,
    pub floor: f64,
    pub asymmetry: f64,
    pub complex_defect: f64,
    /// Max relative mismatch between nonzero even- and odd-degree spectra;
    /// infinite when their sizes differ.
    pub pairing_error: f64,
}

fn pairing_error(eigenvalues: &[Vec<f64>], floor: f64) -> f64 {
    let collect = |parity: usize| {
        let mut v: Vec<f64> = eigenvalues
            .iter()
            .enumerate()
            .filter(|(q, _)| q % 2 == parity)
            .flat_map(|(_, e)| e.iter().copied().filter(|&x| x > floor))
            .collect();
        v.sort_by(f64::total_cmp);
        v
    };
    let (even, odd) = (collect(0), collect(1));
    if even.len() != odd.len() {
        return f64::INFINITY;
    }
    even.iter()
        .zip(&odd)
        .map(|(a, b)| (a - b).abs() / a.abs().max(b.abs()))
        .fold(0.0, f64::max)
}

pub fn mode_spectrum(
    model: &SpectralModel,
    mode: &[i64],
    epsilon: Ratio<i64>,
) -> Result<ModeSpectrum> {
    let op = assemble_mode_operator(model, mode, epsilon)?;
    let eigenvalues = op
        .blocks
        .iter()
        .map(symmetric_eigenvalues)
        .collect::<Result<Vec<_>>>()?;
    let floor = op.blocks.iter().map(roundoff_floor).fold(0.0, f64::max);
    Ok(ModeSpectrum {
        mode: mode.to_vec(),
        pairing_error: pairing_error(&eigenvalues, floor),
        asymmetry: op.asymmetry(),
        complex_defect: op.complex_defect(),
        eigenvalues,
        floor,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DegreeSpectrum {
    pub degree: usize,
    pub low_eigenvalues: Vec<f64>,
    pub small_count: usize,
    /// Smallest excluded over largest included eigenvalue, the latter
    /// clamped to the roundoff floor; infinite when nothing is included.
    pub gap_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumReport {
    pub epsilon: RationalSpec,
    #[serde(skip)]
    pub epsilon_value: Ratio<i64>,
    pub threshold: f64,
    pub roundoff_floor: f64,
    pub degrees: Vec<DegreeSpectrum>,
    pub min_eigenvalue: f64,
    pub max_asymmetry: f64,
    pub max_complex_defect: f64,
    pub max_pairing_error: f64,
    /// Modes owning at least one eigenvalue at or below the threshold.
    pub small_modes: Vec<Vec<i64>>,
}

impl SpectrumReport {
    pub fn counts(&self) -> Vec<usize> {
        self.degrees.iter().map(|d| d.small_count).collect()
    }

    pub fn min_gap_ratio(&self) -> f64 {
        self.degrees
            .iter()
            .map(|d| d.gap_ratio)
            .fold(f64::INFINITY, f64::min)
    }
}

/// Threshold at the largest multiplicative gap among the lowest
/// [`AUTO_WINDOW`] eigenvalues, all clamped below by `floor`.
pub fn auto_threshold(eigenvalues: &[f64], floor: f64) -> f64 {
    let mut low: Vec<f64> = eigenvalues.iter().map(|&x| x.max(floor)).collect();
    low.sort_by(f64::total_cmp);
    low.truncate(AUTO_WINDOW);
    low.windows(2)
        .max_by(|a, b| (a[1] / a[0]).total_cmp(&(b[1] / b[0])))
        .map(|w| (w[0] * w[1]).sqrt())
        .unwrap_or(floor)
}

pub fn spectrum(model: &SpectralModel, epsilon: Ratio<i64>) -> Result<SpectrumReport> {
    let modes = model.modes();
    let per_mode = modes
        .par_iter()
        .map(|m| mode_spectrum(model, m, epsilon))
        .collect::<Result<Vec<_>>>()?;
    Ok(summarize(model, epsilon, &per_mode))
}

fn summarize(
    model: &SpectralModel,
    epsilon: Ratio<i64>,
    per_mode: &[ModeSpectrum],
) -> SpectrumReport {
    let degrees = model.dim() + 1;
    let floor = per_mode.iter().map(|s| s.floor).fold(0.0, f64::max);
    let mut merged: Vec<Vec<f64>> = vec![Vec::new(); degrees];
    for s in per_mode {
        for (q, e) in s.eigenvalues.iter().enumerate() {
            merged[q].extend_from_slice(e);
        }
    }
    for v in &mut merged {
        v.sort_by(f64::total_cmp);
    }
    let threshold = match model.threshold {
        Threshold::Fixed(c) => to_f64(c),
        Threshold::Auto => {
            let pooled: Vec<f64> = merged
                .iter()
                .flat_map(|v| v.iter().take(AUTO_WINDOW).copied())
                .collect();
            auto_threshold(&pooled, floor)
        }
    };
    let degree_reports = merged
        .iter()
        .enumerate()
        .map(|(q, v)| {
            let small_count = v.iter().take_while(|&&x| x <= threshold).count();
            let gap_ratio = match (small_count, v.get(small_count)) {
                (0, _) | (_, None) => f64::INFINITY,
                (c, Some(&next)) => next / v[c - 1].max(floor),
            };
            DegreeSpectrum {
                degree: q,
                low_eigenvalues: v
                    .iter()
                    .take(model.keep.max(small_count + 1))
                    .copied()
                    .collect(),
                small_count,
                gap_ratio,
            }
        })
        .collect();
    let small_modes = per_mode
        .iter()
        .filter(|s| s.eigenvalues.iter().flatten().any(|&x| x <= threshold))
        .map(|s| s.mode.clone())
        .collect();
    SpectrumReport {
        epsilon: epsilon.into(),
        epsilon_value: epsilon,
        threshold,
        roundoff_floor: floor,
        degrees: degree_reports,
        min_eigenvalue: merged
            .iter()
            .flatten()
            .copied()
            .fold(f64::INFINITY, f64::min),
        max_asymmetry: per_mode.iter().map(|s| s.asymmetry).fold(0.0, f64::max),
        max_complex_defect: per_mode
            .iter()
            .map(|s| s.complex_defect)
            .fold(0.0, f64::max),
        max_pairing_error: per_mode.iter().map(|s| s.pairing_error).fold(0.0, f64::max),
        small_modes,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepReport {
    pub reports: Vec<SpectrumReport>,
    /// First `ε` (ascending) whose gap ratio reaches [`REQUIRED_GAP`] in every degree.
    pub stable_from: Option<RationalSpec>,
    pub stable_counts: Option<Vec<usize>>,
    pub stable: bool,
}

pub fn sweep(model: &SpectralModel) -> Result<SweepReport> {
    let mut eps = model.epsilons.clone();
    eps.sort();
    eps.dedup();
    if eps.len() < 2 {
        return Err(Error::InvalidModel(
            "a sweep needs at least two epsilon values".into(),
        ));
    }
    let reports = eps
        .iter()
        .map(|&e| spectrum(model, e))
        .collect::<Result<Vec<_>>>()?;
    let start = reports
        .iter()
        .position(|r| r.min_gap_ratio() >= REQUIRED_GAP);
    let (stable, stable_counts) = match start {
        None => (false, None),
        Some(i) => {
            let counts = reports[i].counts();
            (
                reports[i..].iter().all(|r| r.counts() == counts),
                Some(counts),
            )
        }
    };
    Ok(SweepReport {
        stable_from: start.map(|i| reports[i].epsilon.clone()),
        reports,
        stable_counts,
        stable,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RefinementLevel {
    pub grid_points: usize,
    pub counts: Vec<usize>,
    pub roundoff_floor: f64,
    /// Largest eigenvalue at or below the threshold, per degree.
    pub largest_small: Vec<Option<f64>>,
    /// Smallest eigenvalue above the threshold, per degree.
    pub lowest_nonzero: Vec<Option<f64>>,
}

/// Spectra of the same model at fixed `ε` on a sequence of grids.
pub fn refinement_study(
    model: &SpectralModel,
    epsilon: Ratio<i64>,
    grids: &[usize],
) -> Result<Vec<RefinementLevel>> {
    grids
        .iter()
        .map(|&n| {
            if n < MIN_GRID_POINTS {
                return Err(Error::InvalidModel(format!(
                    "grid_points = {n}, need at least {MIN_GRID_POINTS}"
                )));
            }
            let mut m = model.clone();
            m.grid_points = n;
            let r = spectrum(&m, epsilon)?;
            Ok(RefinementLevel {
                grid_points: n,
                counts: r.counts(),
                roundoff_floor: r.roundoff_floor,
                largest_small: r
                    .degrees
                    .iter()
                    .map(|d| d.small_count.checked_sub(1).map(|i| d.low_eigenvalues[i]))
                    .collect(),
                lowest_nonzero: r
                    .degrees
                    .iter()
                    .map(|d| d.low_eigenvalues.get(d.small_count).copied())
                    .collect(),
            })
        })
        .collect()
}

/// Runs `f` on a rayon pool with `threads` workers.
pub fn with_threads<R: Send>(threads: usize, f: impl FnOnce() -> R + Send) -> Result<R> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| Error::InvalidModel(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

/// Rows `epsilon,degree,index,eigenvalue` of the retained eigenvalues.
pub fn csv_table(reports: &[SpectrumReport]) -> String {
    let mut out = String::from("epsilon,degree,index,eigenvalue\n");
    for r in reports {
        for d in &r.degrees {
            for (i, x) in d.low_eigenvalues.iter().enumerate() {
                out.push_str(&format!(
                    "{},{},{},{:.12e}\n",
                    r.epsilon_value, d.degree, i, x
                ));
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKindSpec {
    SpindleCircle,
    SuspensionTorus2 {
        #[serde(default)]
        w: SubspaceSpec,
    },
}

fn default_cutoff() -> usize {
    3
}

fn default_threshold() -> RationalSpec {
    RationalSpec::Text("auto".into())
}

fn default_keep() -> usize {
    AUTO_WINDOW
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectralModelSpec {
    pub model: ModelKindSpec,
    pub grid_points: usize,
    #[serde(default = "default_cutoff")]
    pub mode_cutoff: usize,
    pub epsilons: Vec<RationalSpec>,
    /// `"auto"` or a rational.
    #[serde(default = "default_threshold")]
    pub threshold: RationalSpec,
    #[serde(default = "default_keep")]
    pub keep: usize,
}

pub fn parse_threshold(spec: &RationalSpec) -> Result<Threshold> {
    match spec {
        RationalSpec::Text(t) if t.trim() == "auto" => Ok(Threshold::Auto),
        other => Ok(Threshold::Fixed(other.parse()?)),
    }
}

impl TryFrom<SpectralModelSpec> for SpectralModel {
    type Error = Error;
    fn try_from(spec: SpectralModelSpec) -> Result<Self> {
        let epsilons = spec
            .epsilons
            .iter()
            .map(RationalSpec::parse)
            .collect::<Result<_>>()?;
        let threshold = parse_threshold(&spec.threshold)?;
        let mut model = match spec.model {
            ModelKindSpec::SpindleCircle => SpectralModel::new(
                ModelKind::SpindleCircle,
                spec.grid_points,
                spec.mode_cutoff,
                epsilons,
                threshold,
            )?,
            ModelKindSpec::SuspensionTorus2 { w } => {
                let mut m = SpectralModel::suspension_torus2(
                    w.span,
                    spec.grid_points,
                    spec.mode_cutoff,
                    epsilons,
                )?;
                m.threshold = threshold;
                m
            }
        };
        model.keep = spec.keep;
        Ok(model)
    }
}

impl From<&SpectralModel> for SpectralModelSpec {
    fn from(m: &SpectralModel) -> Self {
        SpectralModelSpec {
            model: match &m.kind {
                ModelKind::SpindleCircle => ModelKindSpec::SpindleCircle,
                ModelKind::SuspensionTorus2 { w } => ModelKindSpec::SuspensionTorus2 {
                    w: SubspaceSpec {
                        span: w.rows().to_vec(),
                    },
                },
            },
            grid_points: m.grid_points,
            mode_cutoff: m.mode_cutoff,
            epsilons: m.epsilons.iter().map(|&e| e.into()).collect(),
            threshold: match m.threshold {
                Threshold::Auto => default_threshold(),
                Threshold::Fixed(c) => c.into(),
            },
            keep: m.keep,
        }
    }
}

impl Serialize for SpectralModel {
    fn serialize<S: serde::Serializer>(
        &self,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        SpectralModelSpec::from(self).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for SpectralModel {
    fn deserialize<D: serde::Deserializer<'de>>(
        deserializer: D,
    ) -> std::result::Result<Self, D::Error> {
        let spec = SpectralModelSpec::deserialize(deserializer)?;
        SpectralModel::try_from(spec).map_err(serde::de::Error::custom)
    }
}
