//! Closed-form bound evaluators.
//!
//! Integer and rational quantities are evaluated exactly with big-number
//! arithmetic; factors that are irrational (logarithms, fractional powers)
//! enter as the nearest `f64` and are then carried exactly. Probability
//! bounds are reported as `log10` because they routinely leave the `f64`
//! range.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Exponents above this are only reported in `log10` form.
pub const EXACT_EXPONENT_LIMIT: u64 = 1 << 14;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundValue {
    #[serde(skip)]
    pub value: Option<BigRational>,
    /// Exact value as `p/q` or an integer, when computed.
    pub exact: Option<String>,
    pub log10: f64,
    /// Nearest `f64`, infinite when out of range.
    pub approx: f64,
}

impl BoundValue {
    fn from_exact(v: BigRational) -> Self {
        let log10 = log10_rational(&v);
        Self {
            exact: Some(v.to_string()),
            approx: rational_to_f64(&v),
            value: Some(v),
            log10,
        }
    }

    fn from_log10(log10: f64) -> Self {
        Self {
            value: None,
            exact: None,
            log10,
            approx: 10f64.powf(log10),
        }
    }
}

pub fn log10_biguint(x: &BigUint) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = x.bits();
    if bits <= 1000 {
        return x.to_f64().expect("fits").log10();
    }
    let shift = bits - 64;
    let top = (x >> shift).to_f64().expect("64 bits");
    top.log10() + shift as f64 * std::f64::consts::LOG10_2
}

pub fn log10_rational(x: &BigRational) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    let num = x.numer().abs().to_biguint().expect("non-negative");
    let den = x.denom().abs().to_biguint().expect("non-negative");
    log10_biguint(&num) - log10_biguint(&den)
}

fn rational_to_f64(x: &BigRational) -> f64 {
    let l = log10_rational(x);
    if l > 308.0 {
        return if x.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        };
    }
    if l < -320.0 {
        return 0.0;
    }
    x.to_f64().unwrap_or(f64::NAN)
}

fn exact(x: f64) -> Result<BigRational> {
    BigRational::from_float(x)
        .ok_or_else(|| Error::InvalidParameter(format!("non-finite value {x}")))
}

fn int(x: u64) -> BigRational {
    BigRational::from_integer(BigInt::from(x))
}

pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    acc
}

fn ceil_rational(x: &BigRational) -> BigUint {
    x.ceil().to_integer().to_biguint().unwrap_or_default()
}

/// Smallest `c >= 0` with `d^c >= x`.
fn ceil_log(d: u64, x: u64) -> u64 {
    let mut c = 0;
    let mut p: u128 = 1;
    while p < x as u128 {
        p *= d as u128;
        c += 1;
    }
    c
}

/// `ceil(425 n ceil(log_d 4s)^2 d^2 s^5 s^{3.1/ln d} (2 n s ln d + ln(1/eps)))`.
pub fn bhh_design_length(n: u64, d: u64, s: u64, eps: f64) -> Result<BigUint> {
    if n == 0 || s == 0 || d < 2 {
        return Err(Error::InvalidParameter(format!(
            "need n, s >= 1 and d >= 2 (n={n}, d={d}, s={s})"
        )));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "design error eps = {eps} must lie in (0, 1)"
        )));
    }
    let c = ceil_log(d, 4 * s);
    let integer = BigUint::from(425u32)
        * BigUint::from(n)
        * BigUint::from(c).pow(2)
        * BigUint::from(d).pow(2)
        * BigUint::from(s).pow(5);
    let ln_d = (d as f64).ln();
    let real = (s as f64).powf(3.1 / ln_d) * (2.0 * n as f64 * s as f64 * ln_d + (1.0 / eps).ln());
    let total = BigRational::from_integer(BigInt::from(integer)) * exact(real)?;
    Ok(ceil_rational(&total))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DesignOrderVariant {
    /// Constant 11050.
    S1Lemma8,
    /// Constant 1400.
    SLemma9,
    /// Constant 1900.
    SAppendix,
}

impl DesignOrderVariant {
    pub fn constant(self) -> f64 {
        match self {
            Self::S1Lemma8 => 11050.0,
            Self::SLemma9 => 1400.0,
            Self::SAppendix => 1900.0,
        }
    }
}

/// `C n^2 ln d`, evaluated in one fixed order so callers can build exact
/// multiples of it.
pub fn design_order_base(n: u64, d: u64, variant: DesignOrderVariant) -> f64 {
    variant.constant() * (n * n) as f64 * (d as f64).ln()
}

/// `floor((r / (C n^2 ln d))^{1/11})`: the largest `s` with
/// `base * s^11 <= r`.
pub fn design_order(r: f64, n: u64, d: u64, variant: DesignOrderVariant) -> u64 {
    let base = design_order_base(n, d, variant);
    if !(r > 0.0) || base <= 0.0 {
        return 0;
    }
    let fits = |s: u64| base * (s as f64).powi(11) <= r;
    let mut s = (r / base).powf(1.0 / 11.0).floor().max(0.0) as u64;
    while s > 0 && !fits(s) {
        s -= 1;
    }
    while fits(s + 1) {
        s += 1;
    }
    s
}

fn power(base: &BigRational, exp: u64) -> Option<BigRational> {
    if exp > EXACT_EXPONENT_LIMIT {
        return None;
    }
    Some(num_traits::pow(base.clone(), exp as usize))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NetSizes {
    /// `binom(m, k) (3/eps)^{d^{2k}}`.
    pub hamiltonian_net_bound: BoundValue,
    /// `binom(n, 2)^r (6r/eps)^{r d^4}`.
    pub circuit_net_bound: BoundValue,
}

pub fn net_sizes(m: u64, k: u64, d: u64, eps_net: f64, n: u64, r_circ: u64) -> Result<NetSizes> {
    if !(eps_net > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "net resolution {eps_net} must be positive"
        )));
    }
    let eps = exact(eps_net)?;
    let e1 = d.checked_pow(2 * k as u32).unwrap_or(u64::MAX);
    let b1 = BigRational::from_integer(BigInt::from(binomial(m, k)));
    let ratio1 = int(3) / &eps;
    let hamiltonian_net_bound = match power(&ratio1, e1) {
        Some(p) => BoundValue::from_exact(b1 * p),
        None => BoundValue::from_log10(log10_rational(&b1) + e1 as f64 * log10_rational(&ratio1)),
    };
    let e2 = r_circ.saturating_mul(d.saturating_pow(4));
    let b2 = BigRational::from_integer(BigInt::from(binomial(n, 2)));
    let ratio2 = int(6 * r_circ) / &eps;
    let circuit_net_bound = match (power(&b2, r_circ), power(&ratio2, e2)) {
        (Some(a), Some(b)) => BoundValue::from_exact(a * b),
        _ => BoundValue::from_log10(
            r_circ as f64 * log10_rational(&b2) + e2 as f64 * log10_rational(&ratio2),
        ),
    };
    Ok(NetSizes {
        hamiltonian_net_bound,
        circuit_net_bound,
    })
}

/// `(1/delta^{2m}) (C (m/a)^m + 2 eps (alpha + |mu|)^{2m})` with `m = m_half`.
pub fn low_tail_bound(
    c: f64,
    a: f64,
    alpha_poly: f64,
    mu: f64,
    eps_design: f64,
    m_half: u64,
    delta: f64,
) -> Result<BoundValue> {
    if !(a > 0.0) || m_half == 0 || !(delta > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "need a > 0, m >= 1, delta > 0 (a={a}, m={m_half}, delta={delta})"
        )));
    }
    let m = int(m_half);
    let first = exact(c)? * power(&(m / exact(a)?), m_half).ok_or_else(too_large)?;
    let second = int(2)
        * exact(eps_design)?
        * power(&(exact(alpha_poly)? + exact(mu.abs())?), 2 * m_half).ok_or_else(too_large)?;
    let scale = power(&exact(delta)?, 2 * m_half).ok_or_else(too_large)?;
    Ok(BoundValue::from_exact((first + second) / scale))
}

fn too_large() -> Error {
    Error::Resource {
        what: "exact exponent".into(),
        required: u128::MAX,
        available: EXACT_EXPONENT_LIMIT as u128,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeltaChoice {
    Value(f64),
    /// `delta = (1 - alpha) / ((q1 + m) T)`.
    ProofPlugIn,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundParams {
    pub n: u64,
    pub d: u64,
    pub k: u64,
    /// Qudits of the Hamiltonian.
    pub m: u64,
    #[serde(rename = "T")]
    pub t_len: u64,
    /// Circuit-size polynomial `q(n)`.
    pub q: u64,
    /// Poset cardinality `q1(n)`.
    pub q1: u64,
    pub r: f64,
    pub r1: f64,
    pub delta: DeltaChoice,
    pub gamma: f64,
    /// Truncated mass `alpha`.
    pub alpha_mass: f64,
    /// `sum_{p in R2} sum_{p' not in R} |alpha_p| |alpha_p'|`.
    pub cross_sum: f64,
    /// Leading factor of the first failure probability.
    pub lemma7_prefactor: f64,
    pub s_variant: DesignOrderVariant,
}

impl BoundParams {
    pub fn new(n: u64, d: u64, k: u64, m: u64, t_len: u64) -> Self {
        Self {
            n,
            d,
            k,
            m,
            t_len,
            q: t_len,
            q1: t_len + 1,
            r: (t_len / 4) as f64,
            r1: (t_len / 4) as f64,
            delta: DeltaChoice::ProofPlugIn,
            gamma: 1.0,
            alpha_mass: 0.25,
            cross_sum: 0.0,
            lemma7_prefactor: 16.0,
            s_variant: DesignOrderVariant::SAppendix,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n == 0
            || self.d < 2
            || self.k == 0
            || self.m == 0
            || self.t_len == 0
            || self.q1 == 0
        {
            return Err(Error::InvalidParameter(
                "counts must be positive and d >= 2".into(),
            ));
        }
        if !(0.0..1.0).contains(&self.alpha_mass) {
            return Err(Error::InvalidParameter(format!(
                "truncated mass {} must lie in [0, 1)",
                self.alpha_mass
            )));
        }
        if let DeltaChoice::Value(dl) = self.delta {
            if !(dl >= 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "delta = {dl} must be non-negative"
                )));
            }
        }
        Ok(())
    }

    pub fn delta_exact(&self) -> Result<BigRational> {
        match self.delta {
            DeltaChoice::Value(v) => exact(v),
            DeltaChoice::ProofPlugIn => {
                Ok((int(1) - exact(self.alpha_mass)?) / (int(self.q1 + self.m) * int(self.t_len)))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LemmaBounds {
    pub delta: f64,
    pub s1: u64,
    pub s: u64,
    /// `log10` of the first failure probability.
    pub lemma7_log10: f64,
    pub lemma9_log10: f64,
    /// `(2 gamma cross_sum + 2 gamma q1 (d^{-n/2} + delta)) / (1 - alpha)`.
    pub lemma7_energy_rhs: f64,
    /// `(q1 + m) gamma delta`, exact.
    pub lemma9_energy_rhs: BoundValue,
    pub combined_energy_rhs: f64,
    /// Whether the second right-hand side equals `gamma (1 - alpha) / T`
    /// exactly in rational arithmetic.
    pub plug_in_identity_exact: bool,
}

pub fn lemma_failure_bounds(p: &BoundParams) -> Result<LemmaBounds> {
    p.validate()?;
    let delta_q = p.delta_exact()?;
    let delta = rational_to_f64(&delta_q);
    let s1 = design_order(p.r1, p.n, p.d, DesignOrderVariant::S1Lemma8);
    let s = design_order(p.r, p.n, p.d, p.s_variant);
    let (n, d, q, m, k) = (p.n as f64, p.d as f64, p.q as f64, p.m as f64, p.k);
    let d4 = d.powi(4);
    let d2k = d.powf(2.0 * k as f64);
    let lg = |x: f64| x.log10();
    let common = 2.0 * q * log10_biguint(&binomial(p.n, 2))
        + 2.0 * q * d4 * lg(48.0 * q / delta)
        + log10_biguint(&binomial(p.m, p.k))
        + d2k * lg(12.0 / delta);
    let tail = |order: u64, c: f64| {
        if order == 0 {
            0.0
        } else {
            order as f64 / 2.0 * lg(c * order as f64 / (d.powf(n) * delta * delta))
        }
    };
    let q1 = p.q1 as f64;
    let lemma7_log10 = lg(p.lemma7_prefactor * q1 * q1) + common + tail(s1, 96.0);
    let lemma9_log10 = lg(8.0 * (q1 * q1 + m * q1 * q1)) + common + tail(s, 6144.0);

    let gamma = p.gamma;
    let lemma7_energy_rhs = (2.0 * gamma * p.cross_sum
        + 2.0 * gamma * q1 * (d.powf(-n / 2.0) + delta))
        / (1.0 - p.alpha_mass);
    let rhs9 = int(p.q1 + p.m) * exact(gamma)? * &delta_q;
    let plug = exact(gamma)? * (int(1) - exact(p.alpha_mass)?) / int(p.t_len);
    let lemma9_energy_rhs = BoundValue::from_exact(rhs9.clone());
    Ok(LemmaBounds {
        delta,
        s1,
        s,
        lemma7_log10,
        lemma9_log10,
        combined_energy_rhs: lemma7_energy_rhs + lemma9_energy_rhs.approx,
        lemma7_energy_rhs,
        lemma9_energy_rhs,
        plug_in_identity_exact: rhs9 == plug,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn design_order_units() {
        for n in 1..6u64 {
            let base = design_order_base(n, 2, DesignOrderVariant::S1Lemma8);
            assert_eq!(design_order(base, n, 2, DesignOrderVariant::S1Lemma8), 1);
            assert_eq!(
                design_order(base * 2048.0, n, 2, DesignOrderVariant::S1Lemma8),
                2
            );
            assert_eq!(
                design_order(base * 0.999, n, 2, DesignOrderVariant::S1Lemma8),
                0
            );
        }
        for r in [1e3, 1e6, 1e9, 1e12, 1e15] {
            assert!(
                design_order(r, 3, 2, DesignOrderVariant::SLemma9)
                    >= design_order(r, 3, 2, DesignOrderVariant::SAppendix)
            );
        }
    }

    #[test]
    fn net_examples() {
        let a = net_sizes(4, 1, 2, 0.25, 2, 1).unwrap();
        assert_eq!(a.hamiltonian_net_bound.exact.as_deref(), Some("82944"));
        let expected = BigUint::from(24u32).pow(16u32).to_string();
        assert_eq!(
            a.circuit_net_bound.exact.as_deref(),
            Some(expected.as_str())
        );
        let b = net_sizes(1, 1, 2, 1.5, 2, 1).unwrap();
        assert_eq!(b.hamiltonian_net_bound.exact.as_deref(), Some("16"));
    }

    #[test]
    fn bhh_monotone() {
        let base = bhh_design_length(3, 2, 2, 0.1).unwrap();
        assert!(bhh_design_length(4, 2, 2, 0.1).unwrap() > base);
        assert!(bhh_design_length(3, 2, 2, 0.2).unwrap() < base);
        assert!(bhh_design_length(3, 2, 2, 1.0).is_err());
        assert_eq!(bhh_design_length(3, 2, 2, 0.1).unwrap(), base);
    }

    #[test]
    fn low_tail_cases() {
        let z = low_tail_bound(0.0, 1.0, 1.0, 0.0, 0.0, 3, 0.5).unwrap();
        assert_eq!(z.approx, 0.0);
        let a = low_tail_bound(2.0, 3.0, 1.0, 0.5, 0.01, 2, 0.25).unwrap();
        let b = low_tail_bound(2.0, 3.0, 1.0, 0.5, 0.01, 2, 0.5).unwrap();
        assert_eq!(a.value.unwrap(), b.value.unwrap() * int(16));
    }

    #[test]
    fn plug_in_delta_is_exact() {
        let mut p = BoundParams::new(6, 2, 2, 10, 64);
        p.gamma = 3.0;
        p.alpha_mass = 0.3;
        let b = lemma_failure_bounds(&p).unwrap();
        assert!(b.plug_in_identity_exact);
        assert!(b.lemma7_log10 > 0.0);
        p.delta = DeltaChoice::Value(0.0);
        let z = lemma_failure_bounds(&p).unwrap();
        assert!(z.lemma7_log10.is_infinite());
        let lim = 2.0 * 3.0 * 65.0 * 2f64.powf(-3.0) / 0.7;
        assert!((z.lemma7_energy_rhs - lim).abs() < 1e-12);
    }
}
