//! Ground energies, gaps and low-lying level counts.
//!
//! Two eigenvalues within [`DEGENERACY_TOL`] are treated as one level.
//! `gap` is `E_1 - E_0` counting multiplicity (zero when the ground space
//! is degenerate); `level_gap` is the distance from `E_0` to the next
//! distinct level.

mod lanczos;

use std::io::Write;

use serde::{Deserialize, Serialize};

pub use lanczos::{lowest_eigenpair, Eigenpair, LanczosOptions, LinearOperator};

use crate::error::{Error, Result};
use crate::hamiltonian::{LocalHamiltonian, SparseOperator};
use crate::linalg::{self, Layout, C64, ZERO};

pub const DEGENERACY_TOL: f64 = 1e-10;
pub const DENSE_LIMIT: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Dense,
    Krylov,
    /// Dense up to [`DENSE_LIMIT`], Krylov above.
    Auto,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub krylov_dim: usize,
    pub max_restarts: usize,
    pub tol: f64,
    pub seed: u64,
    /// Largest ground multiplicity resolved by Krylov deflation.
    pub max_multiplicity: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            krylov_dim: 80,
            max_restarts: 400,
            tol: 1e-9,
            seed: 0x5eed,
            max_multiplicity: 64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumResult {
    pub e0: f64,
    pub e1: f64,
    pub gap: f64,
    pub degenerate: bool,
    pub level_gap: f64,
    pub ground_multiplicity: usize,
    /// Whether `ground_multiplicity` hit the deflation cap.
    pub multiplicity_capped: bool,
    #[serde(skip)]
    pub ground_vector: Vec<C64>,
    pub eigenvalues: Vec<f64>,
    pub residuals: Vec<f64>,
    pub method: Method,
    pub dim: usize,
}

impl SpectrumResult {
    /// CSV with header `index,value,residual`.
    pub fn write_eigen_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["index", "value", "residual"])?;
        for (i, (v, r)) in self.eigenvalues.iter().zip(&self.residuals).enumerate() {
            w.write_record([i.to_string(), format!("{v}"), format!("{r}")])?;
        }
        w.flush()?;
        Ok(())
    }
}

fn resolve(method: Method, dim: usize) -> Method {
    match method {
        Method::Auto if dim <= DENSE_LIMIT => Method::Dense,
        Method::Auto => Method::Krylov,
        m => m,
    }
}

fn residual_of(a: &SparseOperator, value: f64, v: &[C64]) -> f64 {
    let av = a.matvec(v);
    av.iter()
        .zip(v)
        .map(|(x, y)| (x - y * value).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

fn dense_spectrum(a: &SparseOperator) -> Result<SpectrumResult> {
    let dim = a.dim();
    if dim > DENSE_LIMIT {
        return Err(Error::Resource {
            what: "dense eigensolver dimension".into(),
            required: dim as u128,
            available: DENSE_LIMIT as u128,
        });
    }
    if dim == 0 {
        return Err(Error::InvalidDimension("empty operator".into()));
    }
    let (values, vectors) = linalg::hermitian_eigen(&a.to_dense());
    let e0 = values[0];
    let mult = values
        .iter()
        .take_while(|&&v| v - e0 <= DEGENERACY_TOL)
        .count();
    let e1 = values.get(1).copied().unwrap_or(f64::INFINITY);
    let next_level = values.get(mult).copied().unwrap_or(f64::INFINITY);
    let keep = (mult + 1).min(dim).max(2.min(dim));
    let mut residuals = Vec::with_capacity(keep);
    for i in 0..keep {
        let v: Vec<C64> = vectors.column(i).iter().copied().collect();
        residuals.push(residual_of(a, values[i], &v));
    }
    let ground_vector = vectors.column(0).iter().copied().collect();
    let (gap, degenerate) = gap_and_flag(e0, e1);
    Ok(SpectrumResult {
        e0,
        e1,
        gap,
        degenerate,
        level_gap: next_level - e0,
        ground_multiplicity: mult,
        multiplicity_capped: false,
        ground_vector,
        eigenvalues: values[..keep].to_vec(),
        residuals,
        method: Method::Dense,
        dim,
    })
}

fn gap_and_flag(e0: f64, e1: f64) -> (f64, bool) {
    if e1 - e0 <= DEGENERACY_TOL {
        (0.0, true)
    } else {
        (e1 - e0, false)
    }
}

fn lanczos_opts(a: &SparseOperator, opts: &SolverOptions) -> LanczosOptions {
    LanczosOptions {
        krylov_dim: opts.krylov_dim,
        max_restarts: opts.max_restarts,
        tol: opts.tol,
        shift: a.gershgorin().0,
    }
}

fn random_start(dim: usize, seed: u64, index: u64) -> Vec<C64> {
    let mut rng = crate::rng::cell_rng(seed, "lanczos-start", &[index]);
    crate::rng::haar_state(dim, &mut rng)
}

/// Successive deflated Lanczos runs, stopping once an eigenvalue exceeds
/// `stop_above` or `cap` pairs have been found.
fn deflated_pairs(
    a: &SparseOperator,
    opts: &SolverOptions,
    stop_above: impl Fn(f64, &[Eigenpair]) -> bool,
    cap: usize,
) -> Result<Vec<Eigenpair>> {
    let lo = lanczos_opts(a, opts);
    let mut found: Vec<Eigenpair> = Vec::new();
    let mut deflate: Vec<Vec<C64>> = Vec::new();
    while found.len() < cap && found.len() < a.dim() {
        let start = random_start(a.dim(), opts.seed, found.len() as u64);
        let pair = lowest_eigenpair(a, &deflate, start, &lo)?;
        let stop = stop_above(pair.value, &found);
        deflate.push(pair.vector.clone());
        found.push(pair);
        if stop {
            break;
        }
    }
    Ok(found)
}

fn krylov_spectrum(a: &SparseOperator, opts: &SolverOptions) -> Result<SpectrumResult> {
    let dim = a.dim();
    if dim == 0 {
        return Err(Error::InvalidDimension("empty operator".into()));
    }
    let cap = opts.max_multiplicity.saturating_add(1).max(2);
    let pairs = deflated_pairs(
        a,
        opts,
        |v, found| found.first().is_some_and(|g| v - g.value > DEGENERACY_TOL),
        cap,
    )?;
    let e0 = pairs[0].value;
    let e1 = pairs.get(1).map(|p| p.value).unwrap_or(f64::INFINITY);
    let mult = pairs
        .iter()
        .take_while(|p| p.value - e0 <= DEGENERACY_TOL)
        .count();
    let capped = mult == pairs.len() && pairs.len() == cap;
    let level_gap = pairs
        .get(mult)
        .map(|p| p.value - e0)
        .unwrap_or(f64::INFINITY);
    let (gap, degenerate) = gap_and_flag(e0, e1);
    Ok(SpectrumResult {
        e0,
        e1,
        gap,
        degenerate,
        level_gap,
        ground_multiplicity: mult,
        multiplicity_capped: capped,
        ground_vector: pairs[0].vector.clone(),
        eigenvalues: pairs.iter().map(|p| p.value).collect(),
        residuals: pairs.iter().map(|p| p.residual).collect(),
        method: Method::Krylov,
        dim,
    })
}

/// Two lowest eigenvalues of `a`, the ground vector, and the ground
/// multiplicity.
pub fn ground_and_gap(
    a: &SparseOperator,
    method: Method,
    opts: &SolverOptions,
) -> Result<SpectrumResult> {
    match resolve(method, a.dim()) {
        Method::Dense => dense_spectrum(a),
        _ => krylov_spectrum(a, opts),
    }
}

/// `<v|H|v>`, evaluated term by term without assembling `H`.
pub fn energy(v: &[C64], h: &LocalHamiltonian) -> Result<f64> {
    let nrm = linalg::norm(v);
    if (nrm - 1.0).abs() > 1e-10 {
        return Err(Error::Precondition(format!(
            "state has norm {nrm}, expected 1"
        )));
    }
    let hv = h.apply(v)?;
    let e = linalg::inner(v, &hv);
    if e.im.abs() > 1e-10 * e.re.abs().max(1.0) {
        return Err(Error::Validation(format!(
            "energy has imaginary part {:e}",
            e.im
        )));
    }
    Ok(e.re)
}

/// Matrix-free view of a local Hamiltonian.
pub struct MatrixFree<'a> {
    h: &'a LocalHamiltonian,
    layout: Layout,
}

impl<'a> MatrixFree<'a> {
    pub fn new(h: &'a LocalHamiltonian) -> Result<Self> {
        Ok(Self {
            h,
            layout: h.layout()?,
        })
    }
}

impl LinearOperator for MatrixFree<'_> {
    fn dim(&self) -> usize {
        self.layout.total()
    }

    fn apply(&self, x: &[C64], y: &mut [C64]) {
        y.iter_mut().for_each(|v| *v = ZERO);
        for t in self.h.terms() {
            t.apply(&self.layout, x, y);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelCount {
    pub count: usize,
    /// True when the Krylov cap stopped the count early.
    pub lower_bound: bool,
}

/// Number of eigenvalues `<= threshold`.
pub fn low_energy_dimension(
    a: &SparseOperator,
    threshold: f64,
    method: Method,
    opts: &SolverOptions,
    cap: usize,
) -> Result<LevelCount> {
    match resolve(method, a.dim()) {
        Method::Dense => {
            if a.dim() > DENSE_LIMIT {
                return Err(Error::Resource {
                    what: "dense eigensolver dimension".into(),
                    required: a.dim() as u128,
                    available: DENSE_LIMIT as u128,
                });
            }
            let values = linalg::hermitian_eigenvalues(&a.to_dense());
            if threshold < values[0] - 1e-12 {
                return Err(Error::Precondition(format!(
                    "threshold {threshold} below ground energy {}",
                    values[0]
                )));
            }
            Ok(LevelCount {
                count: values.iter().filter(|&&v| v <= threshold).count(),
                lower_bound: false,
            })
        }
        _ => {
            let pairs = deflated_pairs(a, opts, |v, _| v > threshold, cap.saturating_add(1))?;
            if threshold < pairs[0].value - 1e-12 {
                return Err(Error::Precondition(format!(
                    "threshold {threshold} below ground energy {}",
                    pairs[0].value
                )));
            }
            let count = pairs.iter().filter(|p| p.value <= threshold).count();
            Ok(LevelCount {
                count: count.min(cap),
                lower_bound: count >= cap,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::CMatrix;

    fn diag(values: &[f64]) -> SparseOperator {
        SparseOperator::from_dense(&CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            values.len(),
            values.iter().map(|&v| C64::new(v, 0.0)),
        )))
    }

    #[test]
    fn diagonal_gap() {
        for method in [Method::Dense, Method::Krylov] {
            let r =
                ground_and_gap(&diag(&[0.0, 1.0, 2.0]), method, &SolverOptions::default()).unwrap();
            assert!(r.e0.abs() < 1e-9);
            assert!((r.gap - 1.0).abs() < 1e-9);
            assert!(!r.degenerate);
        }
    }

    #[test]
    fn degenerate_ground_flagged() {
        for method in [Method::Dense, Method::Krylov] {
            let r = ground_and_gap(
                &diag(&[3.0, -1.0, 0.5, -1.0]),
                method,
                &SolverOptions::default(),
            )
            .unwrap();
            assert!(r.degenerate);
            assert_eq!(r.gap, 0.0);
            assert_eq!(r.ground_multiplicity, 2);
            assert!((r.level_gap - 1.5).abs() < 1e-9);
        }
    }

    #[test]
    fn level_counts() {
        let a = diag(&[0.0, 0.1, 5.0]);
        for method in [Method::Dense, Method::Krylov] {
            let c = low_energy_dimension(&a, 1.0, method, &SolverOptions::default(), 10).unwrap();
            assert_eq!(c.count, 2);
            assert!(!c.lower_bound);
        }
        let c =
            low_energy_dimension(&a, 10.0, Method::Krylov, &SolverOptions::default(), 2).unwrap();
        assert_eq!(c.count, 2);
        assert!(c.lower_bound);
        assert!(
            low_energy_dimension(&a, -1.0, Method::Dense, &SolverOptions::default(), 2).is_err()
        );
    }

    #[test]
    fn dense_limit_enforced() {
        let a = diag(&vec![0.0; DENSE_LIMIT + 1]);
        assert!(matches!(
            ground_and_gap(&a, Method::Dense, &SolverOptions::default()),
            Err(Error::Resource { .. })
        ));
    }
}
