//! Computable forms of the two amplitude conditions.
//!
//! Case 1 keeps enough mass after time `r` and little cross weight between
//! the early labels and the window `r+1..=r+r1`. Case 2 asks for a cut
//! point `x0 * r` around which the history carries almost no amplitude while
//! both sides keep non-negligible mass.

use serde::{Deserialize, Serialize};

use super::poset::TimePoset;
use crate::error::{Error, Result};
use crate::linalg::C64;

/// Poset plus amplitudes: all the checkers need.
#[derive(Debug, Clone, Copy)]
pub struct AmplitudeProfile<'a> {
    pub poset: &'a TimePoset,
    pub amplitudes: &'a [C64],
}

impl AmplitudeProfile<'_> {
    fn weight(&self, p: usize) -> f64 {
        self.amplitudes[p].norm()
    }

    fn mass_where(&self, pred: impl Fn(usize) -> bool) -> f64 {
        (0..self.poset.len())
            .filter(|&p| pred(p))
            .map(|p| self.amplitudes[p].norm_sqr())
            .sum()
    }
}

/// Owned chain profiles used as fixtures.
pub mod profiles {
    use super::*;

    pub fn uniform(t_len: usize) -> (TimePoset, Vec<C64>) {
        let q = t_len + 1;
        (
            TimePoset::chain_only(t_len),
            vec![C64::new(1.0 / (q as f64).sqrt(), 0.0); q],
        )
    }

    /// `alpha_t` proportional to `exp(-rate * t)`.
    pub fn geometric(t_len: usize, rate: f64) -> (TimePoset, Vec<C64>) {
        let raw: Vec<f64> = (0..=t_len).map(|t| (-rate * t as f64).exp()).collect();
        let s = raw.iter().map(|x| x * x).sum::<f64>().sqrt();
        (
            TimePoset::chain_only(t_len),
            raw.iter().map(|x| C64::new(x / s, 0.0)).collect(),
        )
    }

    /// Uniform weight except on chain times `start..start+width`, which are zero.
    pub fn zero_window(t_len: usize, start: usize, width: usize) -> (TimePoset, Vec<C64>) {
        let inside = |t: usize| t >= start && t < start + width;
        let live = (0..=t_len).filter(|&t| !inside(t)).count();
        let a = 1.0 / (live as f64).sqrt();
        (
            TimePoset::chain_only(t_len),
            (0..=t_len)
                .map(|t| {
                    if inside(t) {
                        C64::new(0.0, 0.0)
                    } else {
                        C64::new(a, 0.0)
                    }
                })
                .collect(),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AmplitudeCheckParams {
    /// Computational qudits.
    pub n: usize,
    pub d: usize,
    /// Value of the circuit-size polynomial `q(n)` bounding junk circuits.
    pub q: f64,
    pub r: usize,
    pub r1: usize,
    pub theta: f64,
    /// Ratio threshold is `ratio_constant / n`.
    pub ratio_constant: f64,
    /// Exponent `C` in `n^C`.
    pub exponent_c: f64,
    /// User scale for the size predicate on `r`, `r1`; the literal scale is
    /// always reported alongside.
    pub constant_scale: Option<f64>,
    /// Restrict case 2 to one cut point.
    pub x0: Option<usize>,
}

impl AmplitudeCheckParams {
    pub fn new(n: usize, d: usize, r: usize, r1: usize) -> Self {
        Self {
            n,
            d,
            q: 1.0,
            r,
            r1,
            theta: 2.0,
            ratio_constant: 1.0,
            exponent_c: 1.0,
            constant_scale: None,
            x0: None,
        }
    }

    /// `11050 n^2 ln d max{(4 q d^4)^11, n^C}`.
    pub fn literal_constant_scale(&self) -> f64 {
        let n = self.n as f64;
        let d = self.d as f64;
        11050.0
            * n
            * n
            * d.ln()
            * (4.0 * self.q * d.powi(4))
                .powi(11)
                .max(n.powf(self.exponent_c))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleCheck {
    pub literal_constant_scale: f64,
    pub clears_literal: bool,
    pub constant_scale: Option<f64>,
    pub clears_scaled: Option<bool>,
}

fn scale_check(params: &AmplitudeCheckParams, sizes: &[usize]) -> ScaleCheck {
    let lit = params.literal_constant_scale();
    let min = sizes.iter().copied().min().unwrap_or(0) as f64;
    ScaleCheck {
        literal_constant_scale: lit,
        clears_literal: min >= lit,
        constant_scale: params.constant_scale,
        clears_scaled: params.constant_scale.map(|s| min >= s),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Case1Report {
    pub t_len: usize,
    pub r: usize,
    pub r1: usize,
    /// `sum_{p in R2} sum_{p' not in R} |alpha_p| |alpha_p'|`.
    pub numerator: f64,
    /// `sum_{p in R} |alpha_p|^2`.
    pub denominator: f64,
    pub ratio: f64,
    pub tail_mass: f64,
    pub ratio_threshold: f64,
    pub tail_threshold: f64,
    pub ratio_pass: bool,
    pub tail_pass: bool,
    pub pass: bool,
    pub scale: ScaleCheck,
}

pub fn check_amplitudes_case1(
    profile: AmplitudeProfile<'_>,
    params: &AmplitudeCheckParams,
) -> Result<Case1Report> {
    let poset = profile.poset;
    let t_len = poset.t_len();
    let (r, r1) = (params.r, params.r1);
    if r + r1 > t_len {
        return Err(Error::Precondition(format!(
            "r + r1 = {} exceeds T = {t_len}",
            r + r1
        )));
    }
    if params.n == 0 {
        return Err(Error::InvalidParameter("n must be positive".into()));
    }
    let anchor = poset.chain()[r + 1];
    let in_r = |p: usize| poset.leq(anchor, p);
    let in_r2 = |p: usize| poset.t_p(p).is_some_and(|t| t > r && t <= r + r1);
    let w_r2: f64 = (0..poset.len())
        .filter(|&p| in_r2(p))
        .map(|p| profile.weight(p))
        .sum();
    let w_out: f64 = (0..poset.len())
        .filter(|&p| !in_r(p))
        .map(|p| profile.weight(p))
        .sum();
    let numerator = w_r2 * w_out;
    let denominator = profile.mass_where(in_r);
    let ratio = if denominator > 0.0 {
        numerator / denominator
    } else {
        f64::INFINITY
    };
    let n = params.n as f64;
    let ratio_threshold = params.ratio_constant / n;
    let tail_threshold = n.powf(-(params.theta - 1.0));
    let ratio_pass = ratio <= ratio_threshold;
    let tail_pass = denominator >= tail_threshold;
    Ok(Case1Report {
        t_len,
        r,
        r1,
        numerator,
        denominator,
        ratio,
        tail_mass: denominator,
        ratio_threshold,
        tail_threshold,
        ratio_pass,
        tail_pass,
        pass: ratio_pass && tail_pass,
        scale: scale_check(params, &[r, r1]),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Case2Candidate {
    pub x0: usize,
    /// Mass of `A_{x0} union A_{x0+1}`.
    pub slice_mass: f64,
    /// Mass outside `B_{x0}`.
    pub before_mass: f64,
    /// Mass of `B_{x0}`.
    pub cut_mass: f64,
    pub slice_pass: bool,
    pub before_pass: bool,
    pub cut_pass: bool,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Case2Report {
    pub t_len: usize,
    pub r: usize,
    /// `floor(ln(T/2) / ln r) - 1`.
    pub u: i64,
    pub kappa: f64,
    /// `r^-u`.
    pub slice_bound: f64,
    /// `r^-kappa`.
    pub mass_bound: f64,
    /// Masses of `A_1, ..., A_{2 r^u}`.
    pub slice_masses: Vec<f64>,
    /// Inclusive range of admissible cut points, if non-empty.
    pub admissible: Option<(usize, usize)>,
    pub candidates: Vec<Case2Candidate>,
    pub x0_found: Option<usize>,
    pub pass: bool,
    pub scale: ScaleCheck,
}

pub fn check_amplitudes_case2(
    profile: AmplitudeProfile<'_>,
    params: &AmplitudeCheckParams,
) -> Result<Case2Report> {
    let poset = profile.poset;
    let t_len = poset.t_len();
    let r = params.r;
    if r < 2 {
        return Err(Error::Precondition(format!("case 2 needs r >= 2, got {r}")));
    }
    if t_len < 2 * r {
        return Err(Error::Precondition(format!(
            "case 2 needs T >= 2r, got T = {t_len}, r = {r}"
        )));
    }
    let rf = r as f64;
    let u = ((t_len as f64 / 2.0).ln() / rf.ln()).floor() as i64 - 1;
    let n = params.n.max(1) as f64;
    let kappa = ((2 * u - 2) as f64).min((params.theta - 1.0) * n.ln() / rf.ln());
    let slice_bound = rf.powf(-(u as f64));
    let mass_bound = rf.powf(-kappa);
    let slices: usize = if u >= 0 { 2 * r.pow(u as u32) } else { 0 };

    let slice_of = |p: usize| -> Option<usize> {
        match poset.t_p(p) {
            None => Some(1),
            Some(t) if t < r => Some(1),
            Some(t) => Some(t / r + 1),
        }
    };
    let mut slice_masses = vec![0.0; slices];
    for p in 0..poset.len() {
        if let Some(x) = slice_of(p) {
            if x <= slices {
                slice_masses[x - 1] += profile.amplitudes[p].norm_sqr();
            }
        }
    }

    let admissible = if slices >= 3 {
        Some((2, slices - 1))
    } else {
        None
    };
    let mut candidates = Vec::new();
    if let Some((lo, hi)) = admissible {
        let range: Vec<usize> = match params.x0 {
            Some(x) if x >= lo && x <= hi => vec![x],
            Some(_) => Vec::new(),
            None => (lo..=hi).collect(),
        };
        for x0 in range {
            let slice_mass = slice_masses[x0 - 1] + slice_masses[x0];
            let cut_mass = profile.mass_where(|p| poset.t_p(p).is_some_and(|t| t >= x0 * r));
            let before_mass = profile.mass_where(|p| !poset.t_p(p).is_some_and(|t| t >= x0 * r));
            let slice_pass = slice_mass <= slice_bound;
            let before_pass = before_mass >= mass_bound;
            let cut_pass = cut_mass >= mass_bound;
            candidates.push(Case2Candidate {
                x0,
                slice_mass,
                before_mass,
                cut_mass,
                slice_pass,
                before_pass,
                cut_pass,
                pass: slice_pass && before_pass && cut_pass,
            });
        }
    }
    let x0_found = candidates.iter().find(|c| c.pass).map(|c| c.x0);
    Ok(Case2Report {
        t_len,
        r,
        u,
        kappa,
        slice_bound,
        mass_bound,
        slice_masses,
        admissible,
        candidates,
        x0_found,
        pass: x0_found.is_some(),
        scale: scale_check(params, &[r, params.r1]),
    })
}
