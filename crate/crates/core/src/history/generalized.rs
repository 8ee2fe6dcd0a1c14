//! Generalized history states and their reduction to standard form.
//!
//! A site `i` carries a direct sum `H_i = (+)_{x in Sigma_i} H_x`. Each label
//! `p` picks one symbol per site; the `n` computational qudits live on the
//! carrier sites `carriers[p][j]`, whose symbols have dimension `d`, and
//! every other site must sit on a one-dimensional symbol.
//!
//! The reduced space keeps, per site, a label factor spanned by the symbols
//! that occur in some assignment and a computational factor of dimension
//! `d` (or 1 when the site never carries a qudit). States of the reduced
//! space that do not come from the original site are lifted by a penalty
//! larger than `||H||`, so the reduced Hamiltonian is block diagonal with
//! the restriction of `H` as its low block.

use std::collections::HashSet;

use rand::Rng;
use serde::Serialize;

use super::poset::TimePoset;
use super::state::{computational_states, HistoryState, JunkRule, JunkUnitary};
use crate::error::{Error, Result};
use crate::hamiltonian::{
    compile_feynman_kitaev, ClockKind, CompileOptions, LocalHamiltonian, LocalTerm,
};
use crate::linalg::{self, CMatrix, Layout, C64, ZERO};
use crate::qcircuit::{self, Circuit, Gate, QuditRegister};
use crate::rng;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SiteAlphabet {
    pub symbols: Vec<String>,
    /// `dim H_x` per symbol.
    pub dims: Vec<usize>,
}

impl SiteAlphabet {
    pub fn new(symbols: Vec<String>, dims: Vec<usize>) -> Result<Self> {
        if symbols.is_empty() || symbols.len() != dims.len() || dims.contains(&0) {
            return Err(Error::Validation(format!(
                "site alphabet {symbols:?} with dims {dims:?} is malformed"
            )));
        }
        Ok(Self { symbols, dims })
    }

    /// `dim H_i`.
    pub fn dim(&self) -> usize {
        self.dims.iter().sum()
    }

    /// Offset of symbol `x` inside `H_i`.
    pub fn offset(&self, x: usize) -> usize {
        self.dims[..x].iter().sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneralizedHistoryState {
    pub n: usize,
    pub d: usize,
    pub sites: Vec<SiteAlphabet>,
    pub poset: TimePoset,
    /// `x_i(p)` as symbol indices, one row per label.
    pub assignments: Vec<Vec<usize>>,
    /// Site carrying computational qudit `j` for label `p`.
    pub carriers: Vec<Vec<usize>>,
    pub amplitudes: Vec<C64>,
    /// `psi_p` on `(C^d)^n`.
    pub comp_states: Vec<Vec<C64>>,
    pub junk: Vec<JunkRule>,
}

impl GeneralizedHistoryState {
    /// Computational states come from `circuit` and the junk rules.
    #[allow(clippy::too_many_arguments)]
    pub fn from_circuit(
        circuit: &Circuit,
        initial: &[C64],
        sites: Vec<SiteAlphabet>,
        poset: TimePoset,
        assignments: Vec<Vec<usize>>,
        carriers: Vec<Vec<usize>>,
        amplitudes: Vec<C64>,
        junk: Vec<JunkRule>,
    ) -> Result<Self> {
        let comp_states = computational_states(circuit, initial, &poset, &junk)?;
        let g = Self {
            n: circuit.register.n,
            d: circuit.register.d,
            sites,
            poset,
            assignments,
            carriers,
            amplitudes,
            comp_states,
            junk,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn num_sites(&self) -> usize {
        self.sites.len()
    }

    pub fn site_dims(&self) -> Vec<usize> {
        self.sites.iter().map(SiteAlphabet::dim).collect()
    }

    /// Shape checks: sizes, symbol ranges, distinct assignments, distinct
    /// carriers, normalization.
    pub fn validate(&self) -> Result<()> {
        let q = self.poset.len();
        let big_n = self.sites.len();
        if self.assignments.len() != q || self.carriers.len() != q || self.amplitudes.len() != q {
            return Err(Error::Validation(
                "per-label data does not match the poset size".into(),
            ));
        }
        let comp = self.d.pow(self.n as u32);
        let mut seen = HashSet::new();
        for p in 0..q {
            let x = &self.assignments[p];
            if x.len() != big_n
                || x.iter()
                    .zip(&self.sites)
                    .any(|(&s, a)| s >= a.symbols.len())
            {
                return Err(Error::Validation(format!(
                    "assignment of label {p} is out of range"
                )));
            }
            if !seen.insert(x.clone()) {
                return Err(Error::Validation(format!(
                    "assignment of label {p} repeats"
                )));
            }
            let c = &self.carriers[p];
            let distinct: HashSet<_> = c.iter().collect();
            if c.len() != self.n || distinct.len() != self.n || c.iter().any(|&s| s >= big_n) {
                return Err(Error::Validation(format!(
                    "carriers of label {p} are invalid"
                )));
            }
            if self.comp_states[p].len() != comp {
                return Err(Error::DimensionMismatch {
                    expected: comp,
                    actual: self.comp_states[p].len(),
                });
            }
        }
        let mass: f64 = self.amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (mass - 1.0).abs() > 1e-10 {
            return Err(Error::Validation(format!(
                "amplitude mass {mass} differs from 1"
            )));
        }
        Ok(())
    }

    /// Checks that carrier symbols have dimension `d` and every other
    /// occurring symbol has dimension 1.
    pub fn check_structure(&self) -> Result<()> {
        for p in 0..self.poset.len() {
            for (i, site) in self.sites.iter().enumerate() {
                let x = self.assignments[p][i];
                let dim = site.dims[x];
                let carrier = self.carriers[p].contains(&i);
                if carrier && dim != self.d {
                    return Err(Error::Structure(format!(
                        "label {p}: carrier symbol {} on site {i} has dim {dim}, expected {}",
                        site.symbols[x], self.d
                    )));
                }
                if !carrier && dim != 1 {
                    return Err(Error::Structure(format!(
                        "label {p}: symbol {} on site {i} has dim {dim} but carries no qudit",
                        site.symbols[x]
                    )));
                }
            }
        }
        Ok(())
    }

    /// Dense `|Psi>` on `(x)_i H_i`.
    pub fn to_vector(&self) -> Result<Vec<C64>> {
        self.check_structure()?;
        let layout = Layout::new(&self.site_dims())?;
        let comp_layout = Layout::new(&vec![self.d; self.n])?;
        let mut out = vec![ZERO; layout.total()];
        let mut digits = vec![0usize; self.sites.len()];
        for p in 0..self.poset.len() {
            let a = self.amplitudes[p];
            if a == ZERO {
                continue;
            }
            for (i, site) in self.sites.iter().enumerate() {
                digits[i] = site.offset(self.assignments[p][i]);
            }
            for (z, &v) in self.comp_states[p].iter().enumerate() {
                let mut dg = digits.clone();
                for (j, &s) in self.carriers[p].iter().enumerate() {
                    dg[s] += comp_layout.digit(z, j);
                }
                out[layout.index(&dg)] += a * v;
            }
        }
        Ok(out)
    }
}

/// Where one basis vector of `H_i` lands in `C^{U_i} (x) C^{c_i}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Embedded {
    pub label: usize,
    pub comp: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SiteReduction {
    /// Symbols of the site that occur in some assignment.
    pub used: Vec<usize>,
    pub label_dim: usize,
    pub comp_dim: usize,
    /// Image of each basis vector of `H_i`; `None` for unused symbols.
    pub map: Vec<Option<Embedded>>,
}

#[derive(Debug, Clone)]
pub struct Reduction {
    /// Factors `[label_0, ..., label_{N-1}, comp_0, ..., comp_{N-1}]`.
    pub hamiltonian: LocalHamiltonian,
    pub state: HistoryState,
    pub sites: Vec<SiteReduction>,
    pub k: usize,
    pub k_prime: usize,
    /// Weight `M` of the non-image penalty; zero when no site needs one.
    pub penalty: f64,
    /// Every site maps onto a single non-trivial factor and no penalty is
    /// present, so `H'` is `H` with relabelled basis.
    pub isomorphic: bool,
}

impl Reduction {
    /// Image of a vector of `(x)_i H_i`; components on unused symbols must
    /// vanish.
    pub fn embed(&self, v: &[C64], site_dims: &[usize]) -> Result<Vec<C64>> {
        let src = Layout::new(site_dims)?;
        let dst = self.hamiltonian.layout()?;
        let big_n = self.sites.len();
        let mut out = vec![ZERO; dst.total()];
        let mut dg = vec![0usize; 2 * big_n];
        for (flat, &a) in v.iter().enumerate() {
            if a == ZERO {
                continue;
            }
            let mut ok = true;
            for i in 0..big_n {
                match self.sites[i].map[src.digit(flat, i)] {
                    Some(e) => {
                        dg[i] = e.label;
                        dg[big_n + i] = e.comp;
                    }
                    None => ok = false,
                }
            }
            if !ok {
                return Err(Error::Validation(
                    "vector has weight on symbols outside the reduced space".into(),
                ));
            }
            out[dst.index(&dg)] += a;
        }
        Ok(out)
    }
}

fn site_reductions(gen: &GeneralizedHistoryState) -> Vec<SiteReduction> {
    let q = gen.poset.len();
    gen.sites
        .iter()
        .enumerate()
        .map(|(i, site)| {
            let mut used: Vec<usize> = (0..q).map(|p| gen.assignments[p][i]).collect();
            used.sort_unstable();
            used.dedup();
            let comp_dim = if used.iter().any(|&x| site.dims[x] > 1) {
                gen.d
            } else {
                1
            };
            let mut map = vec![None; site.dim()];
            for (u, &x) in used.iter().enumerate() {
                let off = site.offset(x);
                for a in 0..site.dims[x] {
                    map[off + a] = Some(Embedded { label: u, comp: a });
                }
            }
            SiteReduction {
                label_dim: used.len(),
                comp_dim,
                used,
                map,
            }
        })
        .collect()
}

/// Restricts `h` to the reduced space and adds the non-image penalty.
///
/// Each term on `k` sites becomes a term on at most `2k` non-trivial
/// factors; terms that become scalars are kept as multiples of the identity
/// on the first non-trivial factor.
pub fn reduce_to_standard(
    gen: &GeneralizedHistoryState,
    h: &LocalHamiltonian,
) -> Result<Reduction> {
    gen.validate()?;
    gen.check_structure()?;
    let site_dims = gen.site_dims();
    if h.dims() != site_dims.as_slice() {
        return Err(Error::Validation(format!(
            "Hamiltonian dims {:?} differ from the site dims {site_dims:?}",
            h.dims()
        )));
    }
    let big_n = gen.sites.len();
    let sites = site_reductions(gen);
    let mut dims: Vec<usize> = sites.iter().map(|s| s.label_dim).collect();
    dims.extend(sites.iter().map(|s| s.comp_dim));

    let mut terms = Vec::new();
    let mut scalar = 0.0;
    for term in h.terms() {
        let z = term.support();
        let mut support = Vec::new();
        let mut local = Vec::new();
        for &i in z {
            if sites[i].label_dim > 1 {
                support.push(i);
                local.push(sites[i].label_dim);
            }
        }
        for &i in z {
            if sites[i].comp_dim > 1 {
                support.push(big_n + i);
                local.push(sites[i].comp_dim);
            }
        }
        let map_index = |idx: usize| -> Option<usize> {
            let mut rem = idx;
            let mut emb = vec![Embedded { label: 0, comp: 0 }; z.len()];
            for (pos, &i) in z.iter().enumerate().rev() {
                let di = site_dims[i];
                emb[pos] = sites[i].map[rem % di]?;
                rem /= di;
            }
            let mut out = 0;
            for (pos, &i) in z.iter().enumerate() {
                if sites[i].label_dim > 1 {
                    out = out * sites[i].label_dim + emb[pos].label;
                }
            }
            for (pos, &i) in z.iter().enumerate() {
                if sites[i].comp_dim > 1 {
                    out = out * sites[i].comp_dim + emb[pos].comp;
                }
            }
            Some(out)
        };
        let entries: Vec<(usize, usize, C64)> = term
            .entries()
            .iter()
            .filter_map(|&(r, c, v)| Some((map_index(r)?, map_index(c)?, v)))
            .collect();
        if support.is_empty() {
            scalar += entries.iter().map(|e| e.2.re).sum::<f64>();
            continue;
        }
        if !entries.is_empty() {
            terms.push(LocalTerm::from_entries(support, local, entries)?);
        }
    }
    if scalar != 0.0 {
        let f = dims
            .iter()
            .position(|&d| d > 1)
            .ok_or_else(|| Error::Structure("reduced space is one-dimensional".into()))?;
        terms.push(LocalTerm::from_entries(
            vec![f],
            vec![dims[f]],
            (0..dims[f]).map(|a| (a, a, C64::new(scalar, 0.0))),
        )?);
    }

    let images: Vec<Vec<bool>> = sites
        .iter()
        .map(|s| {
            let mut image = vec![false; s.label_dim * s.comp_dim];
            for e in s.map.iter().flatten() {
                image[e.label * s.comp_dim + e.comp] = true;
            }
            image
        })
        .collect();
    let needs_penalty = images.iter().any(|im| im.iter().any(|&b| !b));
    let penalty = if needs_penalty {
        1.0 + 2.0 * h.terms().iter().map(LocalTerm::operator_norm).sum::<f64>()
    } else {
        0.0
    };
    for (i, (s, image)) in sites.iter().zip(&images).enumerate() {
        let entries: Vec<_> = (0..image.len())
            .filter(|&x| !image[x])
            .map(|x| (x, x, C64::new(penalty, 0.0)))
            .collect();
        if entries.is_empty() {
            continue;
        }
        // Non-image states exist only when some symbol is narrower than c_i > 1.
        let (support, local) = if s.label_dim > 1 {
            (vec![i, big_n + i], vec![s.label_dim, s.comp_dim])
        } else {
            (vec![big_n + i], vec![s.comp_dim])
        };
        terms.push(LocalTerm::from_entries(support, local, entries)?);
    }
    let hamiltonian = LocalHamiltonian::new(dims, terms)?;

    let state = reduced_state(gen, &sites)?;
    let isomorphic = penalty == 0.0 && sites.iter().all(|s| s.label_dim == 1 || s.comp_dim == 1);
    Ok(Reduction {
        k: h.locality(),
        k_prime: hamiltonian.locality(),
        hamiltonian,
        state,
        sites,
        penalty,
        isomorphic,
    })
}

fn reduced_state(gen: &GeneralizedHistoryState, sites: &[SiteReduction]) -> Result<HistoryState> {
    let big_n = sites.len();
    let comp_dims: Vec<usize> = sites.iter().map(|s| s.comp_dim).collect();
    let comp_layout = Layout::new(&comp_dims)?;
    let qudit_layout = Layout::new(&vec![gen.d; gen.n])?;
    let mut clock_labels = Vec::with_capacity(gen.poset.len());
    let mut comp_states = Vec::with_capacity(gen.poset.len());
    for p in 0..gen.poset.len() {
        clock_labels.push(
            (0..big_n)
                .map(|i| {
                    sites[i]
                        .used
                        .binary_search(&gen.assignments[p][i])
                        .expect("used symbol")
                })
                .collect(),
        );
        let mut v = vec![ZERO; comp_layout.total()];
        let mut dg = vec![0usize; big_n];
        for (z, &a) in gen.comp_states[p].iter().enumerate() {
            for (j, &s) in gen.carriers[p].iter().enumerate() {
                dg[s] = qudit_layout.digit(z, j);
            }
            v[comp_layout.index(&dg)] += a;
        }
        comp_states.push(v);
    }
    let hs = HistoryState {
        poset: gen.poset.clone(),
        clock_dims: sites.iter().map(|s| s.label_dim).collect(),
        clock_labels,
        amplitudes: gen.amplitudes.clone(),
        comp_dims,
        comp_states,
        junk: gen.junk.clone(),
    };
    hs.validate()?;
    Ok(hs)
}

fn single(symbol: &str, dim: usize) -> SiteAlphabet {
    SiteAlphabet {
        symbols: vec![symbol.to_string()],
        dims: vec![dim],
    }
}

/// Kitaev's qubit-clock instance: sites `0..T` are clock qubits with
/// `Sigma = {0, 1}` (both one-dimensional), sites `T..T+n` carry the
/// computation with `Sigma = {q}`. The Hamiltonian is the unary-clock
/// Feynman–Kitaev compile of `circuit`.
pub fn kitaev_unary(
    circuit: &Circuit,
    initial: &[C64],
) -> Result<(GeneralizedHistoryState, LocalHamiltonian)> {
    let t_len = circuit.len();
    let reg = circuit.register;
    let mut sites = vec![
        SiteAlphabet {
            symbols: vec!["0".into(), "1".into()],
            dims: vec![1, 1],
        };
        t_len
    ];
    sites.extend(std::iter::repeat_n(single("q", reg.d), reg.n));
    let poset = TimePoset::chain_only(t_len);
    let assignments = (0..=t_len)
        .map(|t| {
            let mut x: Vec<usize> = (0..t_len).map(|i| usize::from(i < t)).collect();
            x.extend(std::iter::repeat_n(0, reg.n));
            x
        })
        .collect();
    let carriers = vec![(t_len..t_len + reg.n).collect(); t_len + 1];
    let gen = GeneralizedHistoryState::from_circuit(
        circuit,
        initial,
        sites,
        poset,
        assignments,
        carriers,
        super::state::uniform_amplitudes(t_len + 1),
        vec![JunkRule::Chain; t_len + 1],
    )?;
    let opts = CompileOptions {
        clock: ClockKind::Unary,
        ..CompileOptions::default()
    };
    Ok((gen, compile_feynman_kitaev(circuit, &opts)?.hamiltonian))
}

/// Register-clock instance: site 0 holds `Sigma = {0, ..., T}` (all
/// one-dimensional), sites `1..=n` carry the computation.
pub fn standard_register(
    circuit: &Circuit,
    initial: &[C64],
) -> Result<(GeneralizedHistoryState, LocalHamiltonian)> {
    let t_len = circuit.len();
    let reg = circuit.register;
    let mut sites = vec![SiteAlphabet {
        symbols: (0..=t_len).map(|t| t.to_string()).collect(),
        dims: vec![1; t_len + 1],
    }];
    sites.extend(std::iter::repeat_n(single("q", reg.d), reg.n));
    let assignments = (0..=t_len)
        .map(|t| {
            let mut x = vec![t];
            x.extend(std::iter::repeat_n(0, reg.n));
            x
        })
        .collect();
    let gen = GeneralizedHistoryState::from_circuit(
        circuit,
        initial,
        sites,
        TimePoset::chain_only(t_len),
        assignments,
        vec![(1..=reg.n).collect(); t_len + 1],
        super::state::uniform_amplitudes(t_len + 1),
        vec![JunkRule::Chain; t_len + 1],
    )?;
    Ok((
        gen,
        compile_feynman_kitaev(circuit, &CompileOptions::default())?.hamiltonian,
    ))
}

/// Random small instance with a frustration-free 2-local Hamiltonian whose
/// ground space contains the generalized history state.
#[derive(Debug, Clone)]
pub struct RandomInstance {
    pub circuit: Circuit,
    pub state: GeneralizedHistoryState,
    pub hamiltonian: LocalHamiltonian,
}

pub const RANDOM_INSTANCE_MAX_DIM: usize = 700;

fn random_circuit(reg: QuditRegister, t_len: usize, r: &mut rng::Rng) -> Result<Circuit> {
    if reg.n >= 2 {
        return qcircuit::sample_local_random_circuit(reg, t_len, r);
    }
    let gates = (1..=t_len)
        .map(|t| {
            Ok(Gate {
                t,
                site: 1,
                u: qcircuit::haar_unitary(reg.d, r)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Circuit::new(reg, gates, None)
}

/// `P R P` with `P` the kernel projector of `rho` and `R` random PSD.
fn kernel_term(rho: &CMatrix, r: &mut rng::Rng) -> CMatrix {
    let dim = rho.nrows();
    let (values, vectors) = linalg::hermitian_eigen(rho);
    let mut proj = CMatrix::zeros(dim, dim);
    for (k, &v) in values.iter().enumerate() {
        if v <= 1e-10 {
            let col = vectors.column(k);
            proj += col * col.adjoint();
        }
    }
    let g = CMatrix::from_fn(dim, dim, |_, _| rng::complex_normal(r));
    let psd = &g * g.adjoint() / C64::new(dim as f64, 0.0);
    let h = &proj * psd * &proj;
    (&h + h.adjoint()) * C64::new(0.5, 0.0)
}

pub fn random_instance(seed: u64) -> Result<RandomInstance> {
    for attempt in 0u64.. {
        let mut r = rng::cell_rng(seed, "generalized-instance", &[attempt]);
        if let Some(inst) = try_random_instance(&mut r)? {
            return Ok(inst);
        }
    }
    unreachable!("attempt counter is unbounded")
}

fn try_random_instance(r: &mut rng::Rng) -> Result<Option<RandomInstance>> {
    let d = 2;
    let n = r.random_range(1..=2usize);
    let big_n = r.random_range(3..=5usize);
    let t_len = r.random_range(1..=3usize);
    let n_junk = r.random_range(0..=2usize);
    let reg = QuditRegister::new(n, d)?;

    // Per site: active symbols (dim d), blank symbols (dim 1), unused symbols.
    let mut sites = Vec::with_capacity(big_n);
    let mut active = Vec::with_capacity(big_n);
    let mut blank = Vec::with_capacity(big_n);
    for _ in 0..big_n {
        let na = r.random_range(1..=2usize);
        let nb = r.random_range(1..=2usize);
        let nu = r.random_range(0..=1usize);
        let mut symbols = Vec::new();
        let mut dims = Vec::new();
        for a in 0..na {
            symbols.push(format!("a{a}"));
            dims.push(d);
        }
        for b in 0..nb {
            symbols.push(format!("b{b}"));
            dims.push(1);
        }
        for u in 0..nu {
            symbols.push(format!("u{u}"));
            dims.push(r.random_range(1..=d));
        }
        active.push((0..na).collect::<Vec<_>>());
        blank.push((na..na + nb).collect::<Vec<_>>());
        sites.push(SiteAlphabet::new(symbols, dims)?);
    }
    let total: usize = sites.iter().map(SiteAlphabet::dim).product();
    if total > RANDOM_INSTANCE_MAX_DIM {
        return Ok(None);
    }

    let q = t_len + 1 + n_junk;
    let labels: Vec<String> = (0..q).map(|p| format!("p{p}")).collect();
    let mut relations: Vec<(usize, usize)> = (0..t_len).map(|t| (t, t + 1)).collect();
    let circuit = random_circuit(reg, t_len, r)?;
    let mut junk = vec![JunkRule::Chain; t_len + 1];
    for j in 0..n_junk {
        let p = t_len + 1 + j;
        if r.random_bool(0.6) {
            let t = r.random_range(0..=t_len);
            relations.push((t, p));
            let v = if r.random_bool(0.5) {
                JunkUnitary::Fixed(qcircuit::haar_unitary(reg.dim(), r)?)
            } else {
                let site = if n >= 2 { r.random_range(1..n) } else { 1 };
                let dim = if n >= 2 { d * d } else { d };
                JunkUnitary::Gates(vec![Gate {
                    t: 1,
                    site,
                    u: qcircuit::haar_unitary(dim, r)?,
                }])
            };
            junk.push(JunkRule::Derived(v));
        } else {
            junk.push(JunkRule::Explicit(rng::haar_state(reg.dim(), r)));
        }
    }
    let poset = TimePoset::new(labels, &relations, (0..=t_len).collect())?;

    let mut assignments = Vec::with_capacity(q);
    let mut carriers = Vec::with_capacity(q);
    let mut seen = HashSet::new();
    for _ in 0..q {
        let mut ok = false;
        for _ in 0..64 {
            let mut order: Vec<usize> = (0..big_n).collect();
            for i in (1..big_n).rev() {
                order.swap(i, r.random_range(0..=i));
            }
            let c: Vec<usize> = order[..n].to_vec();
            let x: Vec<usize> = (0..big_n)
                .map(|i| {
                    let pool = if c.contains(&i) {
                        &active[i]
                    } else {
                        &blank[i]
                    };
                    pool[r.random_range(0..pool.len())]
                })
                .collect();
            if seen.insert(x.clone()) {
                assignments.push(x);
                carriers.push(c);
                ok = true;
                break;
            }
        }
        if !ok {
            return Ok(None);
        }
    }
    let mut amplitudes: Vec<C64> = (0..q).map(|_| rng::complex_normal(r)).collect();
    linalg::normalize(&mut amplitudes);

    let state = GeneralizedHistoryState::from_circuit(
        &circuit,
        &reg.zero_state(),
        sites,
        poset,
        assignments,
        carriers,
        amplitudes,
        junk,
    )?;
    let psi = state.to_vector()?;
    let dims = state.site_dims();
    let layout = Layout::new(&dims)?;
    let mut terms = Vec::new();
    for i in 0..big_n {
        for j in (i + 1)..big_n {
            let rho = linalg::partial_trace_outer(&layout, &[i, j], &psi, &psi);
            let h = kernel_term(&rho, r);
            terms.push(LocalTerm::from_dense(
                vec![i, j],
                vec![dims[i], dims[j]],
                &h,
            )?);
        }
    }
    let hamiltonian = LocalHamiltonian::new(dims, terms)?;
    Ok(Some(RandomInstance {
        circuit,
        state,
        hamiltonian,
    }))
}

/// Generalized view of a standard history state: one site per clock qudit
/// (one-dimensional symbols) followed by `n` computational sites.
pub fn from_standard(hs: &HistoryState, d: usize, n: usize) -> Result<GeneralizedHistoryState> {
    let nc = hs.clock_dims.len();
    let mut sites: Vec<SiteAlphabet> = hs
        .clock_dims
        .iter()
        .map(|&dim| SiteAlphabet {
            symbols: (0..dim).map(|x| x.to_string()).collect(),
            dims: vec![1; dim],
        })
        .collect();
    sites.extend(std::iter::repeat_n(single("q", d), n));
    let assignments = hs
        .clock_labels
        .iter()
        .map(|l| {
            let mut x = l.clone();
            x.extend(std::iter::repeat_n(0, n));
            x
        })
        .collect();
    let g = GeneralizedHistoryState {
        n,
        d,
        sites,
        poset: hs.poset.clone(),
        assignments,
        carriers: vec![(nc..nc + n).collect(); hs.len()],
        amplitudes: hs.amplitudes.clone(),
        comp_states: hs.comp_states.clone(),
        junk: hs.junk.clone(),
    };
    g.validate()?;
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::assemble;
    use crate::qcircuit::sample_seeded_circuit;

    fn dense_gap(h: &LocalHamiltonian) -> (f64, f64) {
        let a = assemble(h).unwrap();
        let v = linalg::hermitian_eigenvalues(&a.to_dense());
        (v[0], v[1] - v[0])
    }

    #[test]
    fn unary_instance_is_isomorphic() {
        let reg = QuditRegister::new(2, 2).unwrap();
        let c = sample_seeded_circuit(reg, 3, 5).unwrap();
        let (gen, h) = kitaev_unary(&c, &reg.zero_state()).unwrap();
        let red = reduce_to_standard(&gen, &h).unwrap();
        assert!(red.isomorphic);
        assert_eq!(red.k, red.k_prime);
        let a = linalg::hermitian_eigenvalues(&assemble(&h).unwrap().to_dense());
        let b = linalg::hermitian_eigenvalues(&assemble(&red.hamiltonian).unwrap().to_dense());
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-10);
        }
        let psi = gen.to_vector().unwrap();
        let emb = red.embed(&psi, &gen.site_dims()).unwrap();
        let direct = red.state.to_vector().unwrap();
        for (x, y) in emb.iter().zip(&direct) {
            assert!((x - y).norm() < 1e-12);
        }
    }

    #[test]
    fn register_instance_is_isomorphic() {
        let reg = QuditRegister::new(2, 2).unwrap();
        let c = sample_seeded_circuit(reg, 4, 9).unwrap();
        let (gen, h) = standard_register(&c, &reg.zero_state()).unwrap();
        let red = reduce_to_standard(&gen, &h).unwrap();
        assert!(red.isomorphic);
        assert_eq!(red.k, red.k_prime);
    }

    #[test]
    fn random_instances_respect_gap_inequality() {
        for seed in 0..8 {
            let inst = random_instance(seed).unwrap();
            let psi = inst.state.to_vector().unwrap();
            let hpsi = inst.hamiltonian.apply(&psi).unwrap();
            assert!(
                linalg::norm(&hpsi) < 1e-9,
                "seed {seed}: history state not frustration free"
            );
            let red = reduce_to_standard(&inst.state, &inst.hamiltonian).unwrap();
            assert!(red.k_prime <= 2 * red.k);
            let (e0, gap) = dense_gap(&inst.hamiltonian);
            let (e0p, gapp) = dense_gap(&red.hamiltonian);
            assert!((e0 - e0p).abs() < 1e-9);
            assert!(gap <= gapp + 1e-10, "seed {seed}: {gap} > {gapp}");
        }
    }

    #[test]
    fn wide_symbol_off_carrier_is_structure_error() {
        let reg = QuditRegister::new(1, 2).unwrap();
        let c = Circuit::identity(reg, 1);
        let sites = vec![
            SiteAlphabet::new(vec!["q".into()], vec![2]).unwrap(),
            SiteAlphabet::new(vec!["w".into(), "z".into()], vec![2, 1]).unwrap(),
        ];
        let gen = GeneralizedHistoryState::from_circuit(
            &c,
            &reg.zero_state(),
            sites,
            TimePoset::chain_only(1),
            vec![vec![0, 0], vec![0, 1]],
            vec![vec![0], vec![0]],
            super::super::state::uniform_amplitudes(2),
            vec![JunkRule::Chain; 2],
        )
        .unwrap();
        let h = LocalHamiltonian::empty(gen.site_dims());
        assert!(matches!(
            reduce_to_standard(&gen, &h),
            Err(Error::Structure(_))
        ));
    }
}
