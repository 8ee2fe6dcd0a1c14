//! Seeded experiment drivers.
//!
//! Every experiment is a grid of independent cells. A cell draws all of its
//! randomness from `subseed(master, tag, coords)`, so extending the grid
//! never changes existing cells. Cells run in parallel and are collected in
//! grid order.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::bounds::{lemma_failure_bounds, BoundParams, DeltaChoice};
use super::design::{frame_potential, DesignEnsembleSpec, FramePotential};
use super::overlap::{fh_decay_profile, local_cross_overlap_max, DEFAULT_THETA_GRID};
use crate::error::{Error, Result};
use crate::hamiltonian::{assemble, compile_feynman_kitaev, gamma_norm, ClockKind, CompileOptions};
use crate::history::{
    chain_history_state, late_labels, profiles, truncated_states, uniform_amplitudes, xi_split,
    ClockLabeling, HistoryState,
};
use crate::linalg::{self, C64};
use crate::qcircuit::{sample_seeded_circuit, Circuit, QuditRegister};
use crate::report::{opt, CsvRow, ExperimentReport};
use crate::rng;
use crate::spectral::{energy, ground_and_gap, Method, SolverOptions};

/// Least-squares slope and `r^2` of `ln y` against `ln x`; points with a
/// non-positive coordinate are skipped. `None` with fewer than two points.
pub fn fit_power_law(xs: &[f64], ys: &[f64]) -> Option<(f64, f64)> {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| **x > 0.0 && **y > 0.0 && y.is_finite())
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 {
        1.0
    } else {
        sxy * sxy / (sxx * syy)
    };
    Some((slope, r2))
}

fn labeling(clock: ClockKind) -> ClockLabeling {
    match clock {
        ClockKind::Register => ClockLabeling::Register,
        ClockKind::Unary => ClockLabeling::Unary,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CircuitFamily {
    LocalRandom,
    Identity,
}

// ---------------------------------------------------------------- gap

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapConfig {
    pub n: usize,
    pub d: usize,
    #[serde(rename = "T")]
    pub t_list: Vec<usize>,
    /// Truncation cut; `None` means `T / 4`.
    pub r: Option<usize>,
    /// Window for the cross sum; `None` means equal to the cut.
    pub r1: Option<usize>,
    pub seeds: usize,
    pub seed: u64,
    pub circuits: CircuitFamily,
    pub compile: CompileOptions,
    pub method: Method,
    pub solver: SolverOptions,
    pub delta: DeltaChoice,
    /// Multiplier applied to the combined energy right-hand side.
    pub energy_constant: f64,
}

impl GapConfig {
    pub fn new(n: usize, d: usize, t_list: Vec<usize>, seeds: usize, seed: u64) -> Self {
        Self {
            n,
            d,
            t_list,
            r: None,
            r1: None,
            seeds,
            seed,
            circuits: CircuitFamily::LocalRandom,
            compile: CompileOptions::default(),
            method: Method::Auto,
            solver: SolverOptions::default(),
            delta: DeltaChoice::ProofPlugIn,
            energy_constant: 1.0,
        }
    }

    fn validate(&self) -> Result<()> {
        QuditRegister::new(self.n, self.d)?;
        if self.t_list.is_empty() || self.t_list.contains(&0) {
            return Err(Error::InvalidParameter(
                "T list must be non-empty with T >= 1".into(),
            ));
        }
        if self.seeds == 0 {
            return Err(Error::InvalidParameter("seeds must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct GapDiagnostics {
    pub dim: usize,
    pub r: usize,
    pub e1: Option<f64>,
    pub level_gap: Option<f64>,
    pub ground_multiplicity: Option<usize>,
    pub psi_energy: Option<f64>,
    pub phi_energy: Option<f64>,
    /// `|<Phi~|Psi>|`.
    pub witness_overlap: Option<f64>,
    pub alpha: Option<f64>,
    /// `gap <= <Phi~|H|Phi~> - E0 + 1e-9`.
    pub variational_ok: Option<bool>,
    pub gamma: Option<f64>,
    pub cross_sum: Option<f64>,
    pub rhs: Option<f64>,
    /// `|<Psi|H|Psi> - <Phi~|H|Phi~>| <= energy_constant * rhs`.
    pub rhs_pass: Option<bool>,
    pub lemma7_log10: Option<f64>,
    pub lemma9_log10: Option<f64>,
    pub max_residual: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapRow {
    #[serde(rename = "T")]
    pub t_len: usize,
    pub seed_index: usize,
    pub seed: u64,
    #[serde(rename = "E0")]
    pub e0: Option<f64>,
    pub gap: Option<f64>,
    pub phi_energy_gap: Option<f64>,
    pub diagnostics: GapDiagnostics,
    pub error: Option<String>,
}

impl CsvRow for GapRow {
    fn header() -> &'static [&'static str] {
        &[
            "T",
            "seed_index",
            "seed",
            "dim",
            "E0",
            "gap",
            "level_gap",
            "phi_energy_gap",
            "psi_energy",
            "witness_overlap",
            "alpha",
            "variational_ok",
            "gamma",
            "rhs",
            "rhs_pass",
            "error",
        ]
    }

    fn record(&self) -> Vec<String> {
        let g = &self.diagnostics;
        let b = |x: Option<bool>| x.map(|v| v.to_string()).unwrap_or_default();
        vec![
            self.t_len.to_string(),
            self.seed_index.to_string(),
            self.seed.to_string(),
            g.dim.to_string(),
            opt(self.e0),
            opt(self.gap),
            opt(g.level_gap),
            opt(self.phi_energy_gap),
            opt(g.psi_energy),
            opt(g.witness_overlap),
            opt(g.alpha),
            b(g.variational_ok),
            opt(g.gamma),
            opt(g.rhs),
            b(g.rhs_pass),
            self.error.clone().unwrap_or_default(),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapMedian {
    #[serde(rename = "T")]
    pub t_len: usize,
    pub rows_ok: usize,
    pub median_gap: f64,
    pub median_level_gap: f64,
    pub median_phi_energy_gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapAggregates {
    pub medians: Vec<GapMedian>,
    /// Median level gap non-increasing in `T`.
    pub monotone_non_increasing: bool,
    /// Slope of `ln(median level gap)` against `ln T`.
    pub fit_exponent: Option<f64>,
    pub fit_r2: Option<f64>,
    /// Same slope against `ln(T + 1)`.
    pub fit_exponent_clock: Option<f64>,
    pub fit_r2_clock: Option<f64>,
    pub variational_all: bool,
    pub max_witness_overlap: f64,
    pub failed_rows: usize,
}

pub type GapReport = ExperimentReport<GapConfig, GapRow, GapAggregates>;

/// Cut `p >= chain[r+1]`, window `r < t_p <= r + r1`:
/// `sum_{R2} |alpha| * sum_{not R} |alpha|`.
pub fn truncation_cross_sum(hs: &HistoryState, r: usize, r1: usize) -> f64 {
    let late = late_labels(hs, r);
    let window: f64 = (0..hs.len())
        .filter(|&p| hs.poset.t_p(p).is_some_and(|t| t > r && t <= r + r1))
        .map(|p| hs.amplitudes[p].norm())
        .sum();
    let early: f64 = (0..hs.len())
        .filter(|&p| !late[p])
        .map(|p| hs.amplitudes[p].norm())
        .sum();
    window * early
}

fn gap_cell(cfg: &GapConfig, t_len: usize, seed_index: usize) -> GapRow {
    let seed = rng::subseed(cfg.seed, "gap", &[t_len as u64, seed_index as u64]);
    let mut row = GapRow {
        t_len,
        seed_index,
        seed,
        e0: None,
        gap: None,
        phi_energy_gap: None,
        diagnostics: GapDiagnostics::default(),
        error: None,
    };
    if let Err(e) = gap_cell_fill(cfg, &mut row) {
        row.error = Some(e.to_string());
    }
    row
}

fn gap_cell_fill(cfg: &GapConfig, row: &mut GapRow) -> Result<()> {
    let t_len = row.t_len;
    let reg = QuditRegister::new(cfg.n, cfg.d)?;
    let circuit = match cfg.circuits {
        CircuitFamily::LocalRandom => sample_seeded_circuit(reg, t_len, row.seed)?,
        CircuitFamily::Identity => Circuit::identity(reg, t_len),
    };
    let fk = compile_feynman_kitaev(&circuit, &cfg.compile)?;
    let h = &fk.hamiltonian;
    let g = &mut row.diagnostics;
    g.dim = fk.total_dim();
    let r = cfg.r.unwrap_or(t_len / 4);
    g.r = r;
    let spec = ground_and_gap(&assemble(h)?, cfg.method, &cfg.solver)?;
    row.e0 = Some(spec.e0);
    row.gap = Some(spec.gap);
    g.e1 = Some(spec.e1);
    g.level_gap = Some(spec.level_gap);
    g.ground_multiplicity = Some(spec.ground_multiplicity);
    g.max_residual = spec.residuals.iter().copied().reduce(f64::max);

    let hs = chain_history_state(
        &circuit,
        &uniform_amplitudes(t_len + 1),
        &reg.zero_state(),
        labeling(cfg.compile.clock),
    )?;
    let psi = hs.to_vector()?;
    let psi_energy = energy(&psi, h)?;
    let tr = truncated_states(&circuit, &hs, r, &reg.flipped_state())?;
    let phi = tr.phi.to_vector()?;
    let phi_energy = energy(&phi, h)?;
    g.psi_energy = Some(psi_energy);
    g.phi_energy = Some(phi_energy);
    row.phi_energy_gap = Some(phi_energy - spec.e0);
    g.witness_overlap = Some(linalg::inner(&phi, &psi).norm());
    g.alpha = Some(tr.alpha);
    g.variational_ok = Some(spec.gap <= phi_energy - spec.e0 + 1e-9);

    let gamma = gamma_norm(h)?.gamma;
    let cross = truncation_cross_sum(&hs, r, cfg.r1.unwrap_or(r));
    let mut bp = BoundParams::new(
        cfg.n as u64,
        cfg.d as u64,
        h.locality().max(1) as u64,
        h.m() as u64,
        t_len as u64,
    );
    bp.r = r as f64;
    bp.r1 = cfg.r1.unwrap_or(r) as f64;
    bp.gamma = gamma;
    bp.alpha_mass = tr.alpha;
    bp.cross_sum = cross;
    bp.delta = cfg.delta;
    let lb = lemma_failure_bounds(&bp)?;
    g.gamma = Some(gamma);
    g.cross_sum = Some(cross);
    g.rhs = Some(lb.combined_energy_rhs);
    g.rhs_pass =
        Some((psi_energy - phi_energy).abs() <= cfg.energy_constant * lb.combined_energy_rhs);
    g.lemma7_log10 = Some(lb.lemma7_log10);
    g.lemma9_log10 = Some(lb.lemma9_log10);
    Ok(())
}

fn median_of<F: Fn(&GapRow) -> Option<f64>>(rows: &[&GapRow], f: F) -> f64 {
    let v: Vec<f64> = rows.iter().filter_map(|r| f(r)).collect();
    linalg::median(&v)
}

pub fn gap_experiment(cfg: &GapConfig) -> Result<GapReport> {
    cfg.validate()?;
    let mut ts = cfg.t_list.clone();
    ts.sort_unstable();
    ts.dedup();
    let cells: Vec<(usize, usize)> = ts
        .iter()
        .flat_map(|&t| (0..cfg.seeds).map(move |s| (t, s)))
        .collect();
    let rows: Vec<GapRow> = cells
        .par_iter()
        .map(|&(t, s)| gap_cell(cfg, t, s))
        .collect();

    let medians: Vec<GapMedian> = ts
        .iter()
        .map(|&t| {
            let rs: Vec<&GapRow> = rows
                .iter()
                .filter(|r| r.t_len == t && r.error.is_none())
                .collect();
            GapMedian {
                t_len: t,
                rows_ok: rs.len(),
                median_gap: median_of(&rs, |r| r.gap),
                median_level_gap: median_of(&rs, |r| r.diagnostics.level_gap),
                median_phi_energy_gap: median_of(&rs, |r| r.phi_energy_gap),
            }
        })
        .collect();
    let lg: Vec<f64> = medians.iter().map(|m| m.median_level_gap).collect();
    let monotone = lg.windows(2).all(|w| w[1] <= w[0]);
    let xs: Vec<f64> = medians.iter().map(|m| m.t_len as f64).collect();
    let xs1: Vec<f64> = xs.iter().map(|x| x + 1.0).collect();
    let fit = fit_power_law(&xs, &lg);
    let fit1 = fit_power_law(&xs1, &lg);
    let aggregates = GapAggregates {
        monotone_non_increasing: monotone && lg.iter().all(|x| x.is_finite()),
        fit_exponent: fit.map(|f| f.0),
        fit_r2: fit.map(|f| f.1),
        fit_exponent_clock: fit1.map(|f| f.0),
        fit_r2_clock: fit1.map(|f| f.1),
        variational_all: rows
            .iter()
            .all(|r| r.diagnostics.variational_ok == Some(true)),
        max_witness_overlap: rows
            .iter()
            .filter_map(|r| r.diagnostics.witness_overlap)
            .fold(0.0, f64::max),
        failed_rows: rows.iter().filter(|r| r.error.is_some()).count(),
        medians,
    };
    Ok(ExperimentReport::new("gap", cfg.clone(), rows, aggregates))
}

// ---------------------------------------------------------------- split

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum ProfileKind {
    Uniform,
    /// `alpha_t` proportional to `exp(-rate t)`.
    Geometric {
        rate: f64,
    },
}

impl ProfileKind {
    pub fn amplitudes(self, t_len: usize) -> Vec<C64> {
        match self {
            Self::Uniform => profiles::uniform(t_len).1,
            Self::Geometric { rate } => profiles::geometric(t_len, rate).1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitConfig {
    pub n: usize,
    pub d: usize,
    #[serde(rename = "T")]
    pub t_len: usize,
    /// Slice width.
    pub r: usize,
    /// Cut index; the cut sits at chain time `x0 * r`. `None` means the
    /// middle of the chain.
    pub x0: Option<usize>,
    pub profile: ProfileKind,
    pub seeds: usize,
    pub seed: u64,
    pub compile: CompileOptions,
    pub method: Method,
    pub solver: SolverOptions,
    /// Per-pair deviation added to `d^{-n/2}` in the far-pair term.
    pub delta: f64,
    /// Energy window `E0 + c / T` for the low-energy rider.
    pub remark2_c: f64,
    /// Basis initial states tried by the rider (capped at `d^n`).
    pub remark2_states: usize,
    /// Truncation cut for the rider; `None` means `T / 4`.
    pub remark2_r: Option<usize>,
}

impl SplitConfig {
    pub fn new(n: usize, d: usize, t_len: usize, seeds: usize, seed: u64) -> Self {
        Self {
            n,
            d,
            t_len,
            r: 1,
            x0: None,
            profile: ProfileKind::Uniform,
            seeds,
            seed,
            compile: CompileOptions::default(),
            method: Method::Auto,
            solver: SolverOptions::default(),
            delta: 0.0,
            remark2_c: std::f64::consts::PI.powi(2) / 2.0,
            remark2_states: 16,
            remark2_r: None,
        }
    }

    pub fn cut_index(&self) -> usize {
        self.x0
            .unwrap_or_else(|| self.t_len.div_ceil(2).div_ceil(self.r.max(1)).max(1))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct LowEnergyRider {
    pub checked: usize,
    pub threshold: f64,
    /// States with energy `<= threshold`.
    pub count: usize,
    pub target: usize,
    pub max_energy: f64,
    pub max_pair_overlap: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct SplitRow {
    pub seed_index: usize,
    pub seed: u64,
    #[serde(rename = "E0")]
    pub e0: Option<f64>,
    pub psi_energy: Option<f64>,
    pub lambda: Option<f64>,
    pub d0: Option<f64>,
    pub d1: Option<f64>,
    pub cross: Option<f64>,
    /// `lambda D0 + (1 - lambda) D1 + 2 sqrt(lambda (1 - lambda)) cross`.
    pub identity: Option<f64>,
    /// Cross coefficient `2 lambda (1 - lambda)`.
    pub alternative: Option<f64>,
    pub identity_residual: Option<f64>,
    pub alternative_residual: Option<f64>,
    /// `lambda (D0 - E) + (1 - lambda)(D1 - E)` with `E = <Psi|H|Psi>`.
    pub excess: Option<f64>,
    pub proof_bound: Option<f64>,
    pub bound_holds: Option<bool>,
    pub gamma: Option<f64>,
    pub rider: Option<LowEnergyRider>,
    pub error: Option<String>,
}

impl CsvRow for SplitRow {
    fn header() -> &'static [&'static str] {
        &[
            "seed_index",
            "seed",
            "E0",
            "psi_energy",
            "lambda",
            "d0",
            "d1",
            "cross",
            "identity",
            "alternative",
            "identity_residual",
            "alternative_residual",
            "excess",
            "proof_bound",
            "bound_holds",
            "low_energy_count",
            "error",
        ]
    }

    fn record(&self) -> Vec<String> {
        vec![
            self.seed_index.to_string(),
            self.seed.to_string(),
            opt(self.e0),
            opt(self.psi_energy),
            opt(self.lambda),
            opt(self.d0),
            opt(self.d1),
            opt(self.cross),
            opt(self.identity),
            opt(self.alternative),
            opt(self.identity_residual),
            opt(self.alternative_residual),
            opt(self.excess),
            opt(self.proof_bound),
            self.bound_holds.map(|b| b.to_string()).unwrap_or_default(),
            self.rider
                .as_ref()
                .map(|r| r.count.to_string())
                .unwrap_or_default(),
            self.error.clone().unwrap_or_default(),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SplitAggregates {
    pub max_identity_residual: f64,
    pub max_alternative_residual: f64,
    pub bound_holds_all: bool,
    pub min_low_energy_count: Option<usize>,
    pub failed_rows: usize,
}

pub type SplitReport = ExperimentReport<SplitConfig, SplitRow, SplitAggregates>;

/// `2 gamma (sum_{A_x0} |a|)(sum_{A_x0+1} |a|) + 2 gamma (sum_F |a_p||a_p'|)(d^{-n/2} + delta)`,
/// where `A_x` holds `(x-1) r <= t_p < x r`, the cut is at `x0 r`, and `F`
/// holds the pairs across the cut more than `r` apart in chain time.
pub fn split_proof_bound(
    hs: &HistoryState,
    x0: usize,
    r: usize,
    gamma: f64,
    n: usize,
    d: usize,
    delta: f64,
) -> f64 {
    let cut = x0 * r;
    let slice = |x: usize| -> f64 {
        let lo = (x.saturating_sub(1)) * r;
        let hi = x * r;
        (0..hs.len())
            .filter(|&p| match hs.poset.t_p(p) {
                Some(t) => t >= lo && t < hi,
                None => x == 1,
            })
            .map(|p| hs.amplitudes[p].norm())
            .sum()
    };
    let near = 2.0 * gamma * slice(x0) * slice(x0 + 1);
    let mut far = 0.0;
    for p in 0..hs.len() {
        let tp = hs.poset.t_p(p);
        if tp.is_some_and(|t| t >= cut) {
            continue;
        }
        for q in 0..hs.len() {
            let Some(tq) = hs.poset.t_p(q) else { continue };
            if tq < cut {
                continue;
            }
            let apart = tp.is_none_or(|t| tq.abs_diff(t) > r);
            if apart {
                far += hs.amplitudes[p].norm() * hs.amplitudes[q].norm();
            }
        }
    }
    near + 2.0 * gamma * far * ((d as f64).powf(-(n as f64) / 2.0) + delta)
}

/// Truncated states grown from the first `states` computational basis
/// vectors, with their energies and pairwise overlaps.
pub fn low_energy_rider(
    circuit: &Circuit,
    hs: &HistoryState,
    h: &crate::hamiltonian::LocalHamiltonian,
    r: usize,
    states: usize,
    threshold: f64,
) -> Result<LowEnergyRider> {
    let reg = circuit.register;
    let checked = states.min(reg.dim());
    let mut vecs = Vec::with_capacity(checked);
    let mut energies = Vec::with_capacity(checked);
    for i in 0..checked {
        let mut e = vec![C64::new(0.0, 0.0); reg.dim()];
        e[i] = C64::new(1.0, 0.0);
        let v = truncated_states(circuit, hs, r, &e)?.phi.to_vector()?;
        energies.push(energy(&v, h)?);
        vecs.push(v);
    }
    let mut max_pair = 0.0f64;
    for i in 0..checked {
        for j in (i + 1)..checked {
            max_pair = max_pair.max(linalg::inner(&vecs[i], &vecs[j]).norm());
        }
    }
    Ok(LowEnergyRider {
        checked,
        threshold,
        count: energies.iter().filter(|&&e| e <= threshold).count(),
        target: 16.min(reg.dim()),
        max_energy: energies.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        max_pair_overlap: max_pair,
    })
}

fn split_cell(cfg: &SplitConfig, seed_index: usize) -> SplitRow {
    let seed = rng::subseed(cfg.seed, "split", &[seed_index as u64]);
    let mut row = SplitRow {
        seed_index,
        seed,
        ..Default::default()
    };
    if let Err(e) = split_cell_fill(cfg, &mut row) {
        row.error = Some(e.to_string());
    }
    row
}

fn split_cell_fill(cfg: &SplitConfig, row: &mut SplitRow) -> Result<()> {
    let reg = QuditRegister::new(cfg.n, cfg.d)?;
    let circuit = sample_seeded_circuit(reg, cfg.t_len, row.seed)?;
    let fk = compile_feynman_kitaev(&circuit, &cfg.compile)?;
    let h = &fk.hamiltonian;
    let spec = ground_and_gap(&assemble(h)?, cfg.method, &cfg.solver)?;
    row.e0 = Some(spec.e0);
    let lab = labeling(cfg.compile.clock);
    let hs = chain_history_state(
        &circuit,
        &cfg.profile.amplitudes(cfg.t_len),
        &reg.zero_state(),
        lab,
    )?;
    let psi_energy = energy(&hs.to_vector()?, h)?;
    row.psi_energy = Some(psi_energy);
    let x0 = cfg.cut_index();
    let split = xi_split(&hs, x0, cfg.r)?;
    let en = split.energies(h)?;
    let l = split.lambda;
    row.lambda = Some(l);
    row.d0 = Some(en.d0);
    row.d1 = Some(en.d1);
    row.cross = Some(en.cross);
    row.identity = Some(en.identity);
    row.alternative = Some(en.alternative);
    row.identity_residual = Some((en.identity - psi_energy).abs());
    row.alternative_residual = Some((en.alternative - psi_energy).abs());
    let excess = l * (en.d0 - psi_energy) + (1.0 - l) * (en.d1 - psi_energy);
    let gamma = gamma_norm(h)?.gamma;
    let bound = split_proof_bound(&hs, x0, cfg.r, gamma, cfg.n, cfg.d, cfg.delta);
    row.excess = Some(excess);
    row.proof_bound = Some(bound);
    row.bound_holds = Some(excess <= bound + 1e-12);
    row.gamma = Some(gamma);
    if cfg.remark2_states > 0 {
        let uniform = chain_history_state(
            &circuit,
            &uniform_amplitudes(cfg.t_len + 1),
            &reg.zero_state(),
            lab,
        )?;
        let r2 = cfg.remark2_r.unwrap_or(cfg.t_len / 4);
        let threshold = spec.e0 + cfg.remark2_c / cfg.t_len as f64;
        row.rider = Some(low_energy_rider(
            &circuit,
            &uniform,
            h,
            r2,
            cfg.remark2_states,
            threshold,
        )?);
    }
    Ok(())
}

pub fn split_experiment(cfg: &SplitConfig) -> Result<SplitReport> {
    QuditRegister::new(cfg.n, cfg.d)?;
    if cfg.seeds == 0 || cfg.r == 0 || cfg.t_len == 0 {
        return Err(Error::InvalidParameter(
            "seeds, r and T must be >= 1".into(),
        ));
    }
    let rows: Vec<SplitRow> = (0..cfg.seeds)
        .into_par_iter()
        .map(|s| split_cell(cfg, s))
        .collect();
    let fold = |f: fn(&SplitRow) -> Option<f64>| rows.iter().filter_map(f).fold(0.0, f64::max);
    let aggregates = SplitAggregates {
        max_identity_residual: fold(|r| r.identity_residual),
        max_alternative_residual: fold(|r| r.alternative_residual),
        bound_holds_all: rows.iter().all(|r| r.bound_holds == Some(true)),
        min_low_energy_count: rows
            .iter()
            .filter_map(|r| r.rider.as_ref().map(|x| x.count))
            .min(),
        failed_rows: rows.iter().filter(|r| r.error.is_some()).count(),
    };
    Ok(ExperimentReport::new(
        "split",
        cfg.clone(),
        rows,
        aggregates,
    ))
}

// ---------------------------------------------------------------- fh

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FhConfig {
    pub n: usize,
    pub d: usize,
    pub k: usize,
    pub checkpoints: Vec<usize>,
    pub seeds: usize,
    pub seed: u64,
    pub grid: usize,
    /// Median threshold and the depth by which it must be reached.
    pub threshold: f64,
    pub by_depth: usize,
}

impl FhConfig {
    pub fn new(
        n: usize,
        d: usize,
        k: usize,
        checkpoints: Vec<usize>,
        seeds: usize,
        seed: u64,
    ) -> Self {
        Self {
            n,
            d,
            k,
            checkpoints,
            seeds,
            seed,
            grid: DEFAULT_THETA_GRID,
            threshold: 0.1,
            by_depth: 200,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FhRow {
    pub seed_index: usize,
    pub seed: u64,
    pub depth: usize,
    pub value: f64,
}

impl CsvRow for FhRow {
    fn header() -> &'static [&'static str] {
        &["seed_index", "seed", "depth", "value"]
    }

    fn record(&self) -> Vec<String> {
        vec![
            self.seed_index.to_string(),
            self.seed.to_string(),
            self.depth.to_string(),
            self.value.to_string(),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FhMedian {
    pub depth: usize,
    pub median: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FhAggregates {
    pub medians: Vec<FhMedian>,
    /// First checkpoint whose median is below the threshold.
    pub first_depth_below: Option<usize>,
    pub pass: bool,
}

pub type FhReport = ExperimentReport<FhConfig, FhRow, FhAggregates>;

pub fn fh_experiment(cfg: &FhConfig) -> Result<FhReport> {
    let reg = QuditRegister::new(cfg.n, cfg.d)?;
    if cfg.seeds == 0 || cfg.checkpoints.is_empty() {
        return Err(Error::InvalidParameter(
            "need >= 1 seed and >= 1 checkpoint".into(),
        ));
    }
    let mut depths = cfg.checkpoints.clone();
    depths.sort_unstable();
    depths.dedup();
    let max_depth = depths.last().copied().unwrap_or(0).max(1);
    let per_seed: Vec<Result<Vec<FhRow>>> = (0..cfg.seeds)
        .into_par_iter()
        .map(|s| {
            let seed = rng::subseed(cfg.seed, "fh", &[s as u64]);
            let c = sample_seeded_circuit(reg, max_depth, seed)?;
            Ok(fh_decay_profile(&c, cfg.k, &depths, cfg.grid)?
                .into_iter()
                .map(|p| FhRow {
                    seed_index: s,
                    seed,
                    depth: p.depth,
                    value: p.value,
                })
                .collect())
        })
        .collect();
    let mut rows = Vec::new();
    for r in per_seed {
        rows.extend(r?);
    }
    let medians: Vec<FhMedian> = depths
        .iter()
        .map(|&t| FhMedian {
            depth: t,
            median: linalg::median(
                &rows
                    .iter()
                    .filter(|r| r.depth == t)
                    .map(|r| r.value)
                    .collect::<Vec<_>>(),
            ),
        })
        .collect();
    let first_depth_below = medians
        .iter()
        .find(|m| m.median < cfg.threshold)
        .map(|m| m.depth);
    let aggregates = FhAggregates {
        pass: first_depth_below.is_some_and(|t| t <= cfg.by_depth),
        first_depth_below,
        medians,
    };
    Ok(ExperimentReport::new("fh", cfg.clone(), rows, aggregates))
}

// ---------------------------------------------------------------- Haar cross overlap

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HaarOverlapConfig {
    pub n: usize,
    pub d: usize,
    pub k: usize,
    pub samples: usize,
    pub seed: u64,
    pub grid: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OverlapRow {
    pub sample: usize,
    pub value: f64,
}

impl CsvRow for OverlapRow {
    fn header() -> &'static [&'static str] {
        &["sample", "value"]
    }

    fn record(&self) -> Vec<String> {
        vec![self.sample.to_string(), self.value.to_string()]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OverlapAggregates {
    pub median: f64,
    pub mean: f64,
    pub stderr: f64,
    /// `d^{-n/2}`.
    pub reference: f64,
    pub median_ratio: f64,
    /// Median within a factor 3 of the reference.
    pub within_factor3: bool,
}

pub type OverlapReport = ExperimentReport<HaarOverlapConfig, OverlapRow, OverlapAggregates>;

/// Cross overlap of independent Haar state pairs.
pub fn haar_overlap_experiment(cfg: &HaarOverlapConfig) -> Result<OverlapReport> {
    let reg = QuditRegister::new(cfg.n, cfg.d)?;
    if cfg.samples < 2 {
        return Err(Error::InvalidParameter("need >= 2 samples".into()));
    }
    let values: Vec<Result<f64>> = (0..cfg.samples)
        .into_par_iter()
        .map(|i| {
            let mut g = rng::cell_rng(cfg.seed, "haar-overlap", &[i as u64]);
            let a = rng::haar_state(reg.dim(), &mut g);
            let b = rng::haar_state(reg.dim(), &mut g);
            Ok(local_cross_overlap_max(&a, &b, cfg.n, cfg.d, cfg.k, cfg.grid)?.value)
        })
        .collect();
    let rows: Vec<OverlapRow> = values
        .into_iter()
        .enumerate()
        .map(|(sample, v)| v.map(|value| OverlapRow { sample, value }))
        .collect::<Result<_>>()?;
    let xs: Vec<f64> = rows.iter().map(|r| r.value).collect();
    let k = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / k;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (k - 1.0);
    let median = linalg::median(&xs);
    let reference = (cfg.d as f64).powf(-(cfg.n as f64) / 2.0);
    let ratio = median / reference;
    let aggregates = OverlapAggregates {
        median,
        mean,
        stderr: (var / k).sqrt(),
        reference,
        median_ratio: ratio,
        within_factor3: (1.0 / 3.0..=3.0).contains(&ratio),
    };
    Ok(ExperimentReport::new(
        "haar-overlap",
        cfg.clone(),
        rows,
        aggregates,
    ))
}

// ---------------------------------------------------------------- design

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignConfig {
    pub ensemble: DesignEnsembleSpec,
    pub s: Vec<u32>,
}

impl CsvRow for FramePotential {
    fn header() -> &'static [&'static str] {
        &["s", "estimate", "stderr", "haar_value", "samples", "dim"]
    }

    fn record(&self) -> Vec<String> {
        vec![
            self.s.to_string(),
            self.estimate.to_string(),
            self.stderr.to_string(),
            self.haar_value.to_string(),
            self.samples.to_string(),
            self.dim.to_string(),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DesignAggregates {
    /// `|estimate / haar - 1|` per requested `s`.
    pub relative_deviation: Vec<f64>,
    /// `|estimate - haar| / stderr` per requested `s`.
    pub sigmas: Vec<f64>,
}

pub type DesignReport = ExperimentReport<DesignConfig, FramePotential, DesignAggregates>;

pub fn design_experiment(cfg: &DesignConfig) -> Result<DesignReport> {
    let rows = cfg
        .s
        .iter()
        .map(|&s| frame_potential(&cfg.ensemble, s))
        .collect::<Result<Vec<_>>>()?;
    let aggregates = DesignAggregates {
        relative_deviation: rows
            .iter()
            .map(|f| (f.estimate / f.haar_value as f64 - 1.0).abs())
            .collect(),
        sigmas: rows
            .iter()
            .map(|f| (f.estimate - f.haar_value as f64).abs() / f.stderr)
            .collect(),
    };
    Ok(ExperimentReport::new(
        "design",
        cfg.clone(),
        rows,
        aggregates,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::Rescale;

    #[test]
    fn power_law_fit_recovers_exponent() {
        let xs = [2.0, 4.0, 8.0, 16.0];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| 3.0 * x.powf(-1.5)).collect();
        let (s, r2) = fit_power_law(&xs, &ys).unwrap();
        assert!((s + 1.5).abs() < 1e-12);
        assert!((r2 - 1.0).abs() < 1e-12);
        assert!(fit_power_law(&[1.0], &[1.0]).is_none());
    }

    #[test]
    fn gap_rows_and_witness() {
        let mut cfg = GapConfig::new(2, 2, vec![4, 8], 3, 7);
        cfg.compile.rescale = Rescale::ByT;
        let rep = gap_experiment(&cfg).unwrap();
        assert_eq!(rep.rows.len(), 6);
        assert_eq!(rep.aggregates.failed_rows, 0);
        assert!(rep.aggregates.variational_all);
        assert!(rep.aggregates.max_witness_overlap < 1e-12);
        for r in &rep.rows {
            assert!(r.e0.unwrap().abs() < 1e-9);
        }
        let again = gap_experiment(&cfg).unwrap();
        assert_eq!(rep.to_json().unwrap(), again.to_json().unwrap());
    }

    #[test]
    fn gap_cells_are_stable_under_grid_extension() {
        let small = gap_experiment(&GapConfig::new(2, 2, vec![4], 2, 9)).unwrap();
        let big = gap_experiment(&GapConfig::new(2, 2, vec![4, 6], 3, 9)).unwrap();
        for r in &small.rows {
            let twin = big
                .rows
                .iter()
                .find(|b| b.t_len == r.t_len && b.seed_index == r.seed_index)
                .unwrap();
            assert_eq!(r, twin);
        }
    }

    #[test]
    fn identity_split_on_uniform_profile() {
        let mut cfg = SplitConfig::new(2, 2, 7, 2, 5);
        cfg.remark2_states = 4;
        let rep = split_experiment(&cfg).unwrap();
        assert_eq!(rep.aggregates.failed_rows, 0);
        assert!(rep.aggregates.max_identity_residual < 1e-10);
        for r in &rep.rows {
            assert!((r.lambda.unwrap() - 0.5).abs() < 1e-12);
            assert!(r.bound_holds.unwrap());
            let rider = r.rider.as_ref().unwrap();
            assert!(rider.max_pair_overlap < 1e-12);
        }
    }

    #[test]
    fn haar_overlap_runs() {
        let rep = haar_overlap_experiment(&HaarOverlapConfig {
            n: 4,
            d: 2,
            k: 1,
            samples: 8,
            seed: 1,
            grid: 16,
        })
        .unwrap();
        assert_eq!(rep.rows.len(), 8);
        assert!(rep.aggregates.median > 0.0 && rep.aggregates.median < 1.0);
    }
}
