use histgap::analysis::{
    bhh_design_length, design_order, lemma_failure_bounds, local_cross_overlap_max, low_tail_bound,
    BoundParams, DesignOrderVariant,
};
use histgap::hamiltonian::{
    assemble, compile_feynman_kitaev, gamma_norm, ClockKind, CompileOptions, LocalHamiltonian,
    LocalTerm, Rescale,
};
use histgap::history::{
    chain_history_state, check_amplitudes_case1, profiles, truncated_states, uniform_amplitudes,
    xi_split, AmplitudeCheckParams, ClockLabeling,
};
use histgap::linalg::{self, C64};
use histgap::qcircuit::{evolve, haar_unitary, sample_seeded_circuit, Circuit, QuditRegister};
use histgap::rng::{cell_rng, haar_state, rng_from_seed};
use histgap::spectral::{ground_and_gap, Method, SolverOptions};
use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;

fn circuit(n: usize, d: usize, t: usize, seed: u64) -> Circuit {
    sample_seeded_circuit(QuditRegister::new(n, d).unwrap(), t, seed).unwrap()
}

fn random_vector(dim: usize, seed: u64) -> Vec<C64> {
    haar_state(dim, &mut rng_from_seed(seed))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn trajectories_preserve_norm_and_orthogonality(
        n in 2usize..5, d in 2usize..4, t in 1usize..30, seed: u64,
    ) {
        let c = circuit(n, d, t, seed);
        let a = evolve(&c, &c.register.zero_state()).unwrap();
        let b = evolve(&c, &c.register.flipped_state()).unwrap();
        prop_assert_eq!(a.len(), t + 1);
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((linalg::norm(x) - 1.0).abs() <= 1e-10);
            prop_assert!(linalg::inner(x, y).norm() <= 1e-10);
        }
    }

    #[test]
    fn circuits_are_seed_deterministic_and_json_exact(
        n in 1usize..5, d in 2usize..4, t in 1usize..12, seed: u64,
    ) {
        let reg = QuditRegister::new(n, d).unwrap();
        let c = if n == 1 {
            Circuit::identity(reg, t)
        } else {
            circuit(n, d, t, seed)
        };
        let back = Circuit::from_json(&c.to_json().unwrap()).unwrap();
        prop_assert_eq!(&back, &c);
        if n > 1 {
            prop_assert_eq!(circuit(n, d, t, seed), c);
        }
    }

    #[test]
    fn gamma_is_permutation_and_conjugation_invariant(
        n in 2usize..4, t in 2usize..8, seed: u64,
    ) {
        let fk = compile_feynman_kitaev(&circuit(n, 2, t, seed), &CompileOptions::default()).unwrap();
        let h = &fk.hamiltonian;
        let base = gamma_norm(h).unwrap().gamma;
        let mut terms: Vec<LocalTerm> = h.terms().to_vec();
        terms.reverse();
        let mut rng = rng_from_seed(seed ^ 0xabc);
        let j = seed as usize % terms.len();
        let m = terms[j].to_dense();
        let u = haar_unitary(m.nrows(), &mut rng).unwrap();
        let conj = &u * m * u.adjoint();
        terms[j] = LocalTerm::from_dense(
            terms[j].support().to_vec(),
            terms[j].local_dims().to_vec(),
            &conj,
        ).unwrap();
        let permuted = LocalHamiltonian::new(h.dims().to_vec(), terms).unwrap();
        let g = gamma_norm(&permuted).unwrap().gamma;
        prop_assert!((g - base).abs() <= 1e-9 * base.max(1.0), "{} vs {}", g, base);
    }

    #[test]
    fn assembled_matches_matrix_free(
        n in 2usize..4, t in 1usize..10, seed: u64, unary: bool,
    ) {
        let mut opts = CompileOptions::default();
        if unary {
            opts.clock = ClockKind::Unary;
        }
        let fk = compile_feynman_kitaev(&circuit(n, 2, t, seed), &opts).unwrap();
        let h = &fk.hamiltonian;
        let a = assemble(h).unwrap();
        prop_assert!(a.hermiticity_defect() <= 1e-12);
        let v = random_vector(a.dim(), seed.wrapping_add(1));
        let x = a.matvec(&v);
        let y = h.apply(&v).unwrap();
        let err = x.iter().zip(&y).map(|(p, q)| (p - q).norm()).fold(0.0, f64::max);
        prop_assert!(err <= 1e-10);
        let e1 = histgap::spectral::energy(&v, h).unwrap();
        let e2 = a.quadratic_form(&v).re;
        prop_assert!((e1 - e2).abs() <= 1e-10);
    }

    #[test]
    fn rescaled_compilation_has_bounded_gamma(
        n in 2usize..5, extra in 0usize..36, seed: u64, unary: bool,
    ) {
        // Register clock: gamma = 1 + n/T, so the bound needs T >= n/2.
        let t = n + extra;
        let opts = CompileOptions {
            rescale: Rescale::ByT,
            clock: if unary { ClockKind::Unary } else { ClockKind::Register },
            memory_cap: usize::MAX,
            ..CompileOptions::default()
        };
        let fk = compile_feynman_kitaev(&circuit(n, 2, t, seed), &opts).unwrap();
        let g = gamma_norm(&fk.hamiltonian).unwrap().gamma;
        prop_assert!(g <= 3.0 + 1e-12, "gamma {}", g);
        if !unary {
            prop_assert!((g - (1.0 + n as f64 / t as f64)).abs() <= 1e-12);
        }
    }

    #[test]
    fn truncation_is_orthogonal_to_history(
        n in 2usize..4, t in 2usize..16, r_frac in 0.0f64..1.0, seed: u64,
    ) {
        let c = circuit(n, 2, t, seed);
        let hs = chain_history_state(
            &c, &uniform_amplitudes(t + 1), &c.register.zero_state(), ClockLabeling::Register,
        ).unwrap();
        let r = ((t - 1) as f64 * r_frac) as usize;
        let tr = truncated_states(&c, &hs, r, &c.register.flipped_state()).unwrap();
        prop_assert!(tr.phi.inner(&hs).unwrap().norm() <= 1e-10);
        let expect_alpha = (r + 1) as f64 / (t + 1) as f64;
        prop_assert!((tr.alpha - expect_alpha).abs() <= 1e-12);
    }

    #[test]
    fn split_reconstructs_history(
        t in 4usize..20, x0 in 1usize..4, seed: u64,
    ) {
        let c = circuit(2, 2, t, seed);
        let hs = chain_history_state(
            &c, &uniform_amplitudes(t + 1), &c.register.zero_state(), ClockLabeling::Register,
        ).unwrap();
        let r = 1;
        prop_assume!(x0 * r <= t);
        let s = xi_split(&hs, x0, r).unwrap();
        let psi = hs.to_vector().unwrap();
        let v0 = s.xi0.to_vector().unwrap();
        let v1 = s.xi1.to_vector().unwrap();
        let (a, b) = (s.lambda.sqrt(), (1.0 - s.lambda).sqrt());
        let err = psi.iter().zip(v0.iter().zip(&v1))
            .map(|(p, (x, y))| (p - (x * a + y * b)).norm())
            .fold(0.0, f64::max);
        prop_assert!(err <= 1e-12);
    }

    #[test]
    fn uniform_case1_ratio_closed_form(
        n in 1usize..8, t in 4usize..200, rf in 0.0f64..1.0, r1f in 0.0f64..1.0,
    ) {
        let half = t / 2;
        let r = 1 + ((half - 1) as f64 * rf) as usize;
        prop_assume!(r < half);
        let r1 = 1 + ((half - r - 1) as f64 * r1f) as usize;
        prop_assume!(r + r1 <= half);
        let (poset, amps) = profiles::uniform(t);
        let profile = histgap::history::AmplitudeProfile { poset: &poset, amplitudes: &amps };
        let rep = check_amplitudes_case1(profile, &AmplitudeCheckParams::new(n, 2, r, r1)).unwrap();
        let bound = 2.0 * ((r1 + 1) * (r + 1)) as f64 / (t - r) as f64;
        prop_assert!(rep.ratio <= bound);
        let exact = (r1 * (r + 1)) as f64 / (t - r) as f64;
        prop_assert!((rep.ratio - exact).abs() <= 1e-12 * exact.max(1.0));
    }

    #[test]
    fn cross_overlap_symmetry_and_envelope(n in 2usize..5, k in 1usize..3, seed: u64) {
        prop_assume!(k <= n);
        let dim = 1 << n;
        let mut rng = cell_rng(seed, "prop-overlap", &[]);
        let psi = haar_state(dim, &mut rng);
        let phi = haar_state(dim, &mut rng);
        let a = local_cross_overlap_max(&psi, &phi, n, 2, k, 32).unwrap();
        let b = local_cross_overlap_max(&phi, &psi, n, 2, k, 32).unwrap();
        prop_assert!((a.value - b.value).abs() <= 1e-10);
        let fine = local_cross_overlap_max(&psi, &phi, n, 2, k, 64).unwrap();
        prop_assert!(fine.value >= a.value - 1e-12);
        let layout = linalg::Layout::new(&vec![2; n]).unwrap();
        let m = linalg::partial_trace_outer(&layout, &fine.subset, &phi, &psi);
        prop_assert!(fine.value <= linalg::trace_norm(&m) + 1e-10);
        let g = 64;
        let phase = C64::from_polar(1.0, std::f64::consts::PI * (seed % g) as f64 / g as f64);
        let rotated: Vec<C64> = psi.iter().map(|z| z * phase).collect();
        let c = local_cross_overlap_max(&rotated, &phi, n, 2, k, g as usize).unwrap();
        prop_assert!((c.value - fine.value).abs() <= 1e-10);
    }

    #[test]
    fn low_tail_scales_with_delta(
        c in 0.1f64..10.0, a in 0.5f64..8.0, alpha in 0.0f64..3.0, m in 1u64..6, delta in 0.05f64..1.0,
    ) {
        let one = low_tail_bound(c, a, alpha, 0.0, 0.01, m, delta).unwrap();
        let half = low_tail_bound(c, a, alpha, 0.0, 0.01, m, delta / 2.0).unwrap();
        let factor = BigRational::from_integer(BigInt::from(2u32).pow(2 * m as u32));
        prop_assert_eq!(half.value.unwrap(), one.value.unwrap() * factor);
    }

    #[test]
    fn bound_evaluators_are_deterministic_and_monotone(
        n in 1u64..12, k in 1u64..4, t in 4u64..2000, s in 1u64..6,
    ) {
        let p = BoundParams::new(n, 2, k, n + 1, t);
        let a = lemma_failure_bounds(&p).unwrap();
        let b = lemma_failure_bounds(&p).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert!(a.plug_in_identity_exact);
        let lo = bhh_design_length(n, 2, s, 0.25).unwrap();
        let hi = bhh_design_length(n, 2, s, 0.5).unwrap();
        prop_assert!(lo >= hi);
        prop_assert!(bhh_design_length(n + 1, 2, s, 0.5).unwrap() >= hi);
        for v in [DesignOrderVariant::S1Lemma8, DesignOrderVariant::SLemma9, DesignOrderVariant::SAppendix] {
            let x = design_order(t as f64 * 1e6, n, 2, v);
            let y = design_order(2.0 * t as f64 * 1e6, n, 2, v);
            prop_assert!(y >= x);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn psd_penalty_never_lowers_ground_energy(n in 2usize..4, t in 2usize..6, seed: u64) {
        let c = circuit(n, 2, t, seed);
        let base = compile_feynman_kitaev(&c, &CompileOptions::propagation_only()).unwrap();
        let full = compile_feynman_kitaev(&c, &CompileOptions::default()).unwrap();
        let opts = SolverOptions::default();
        let e_base = ground_and_gap(&assemble(&base.hamiltonian).unwrap(), Method::Dense, &opts).unwrap();
        let e_full = ground_and_gap(&assemble(&full.hamiltonian).unwrap(), Method::Dense, &opts).unwrap();
        prop_assert!(e_full.e0 >= e_base.e0 - 1e-10);
        prop_assert!(e_base.gap >= -1e-10 && e_full.gap >= -1e-10);
    }

    #[test]
    fn dense_and_krylov_agree(n in 2usize..4, t in 2usize..10, seed: u64) {
        let fk = compile_feynman_kitaev(&circuit(n, 2, t, seed), &CompileOptions::default()).unwrap();
        let a = assemble(&fk.hamiltonian).unwrap();
        let opts = SolverOptions::default();
        let d = ground_and_gap(&a, Method::Dense, &opts).unwrap();
        let k = ground_and_gap(&a, Method::Krylov, &opts).unwrap();
        prop_assert!((d.e0 - k.e0).abs() <= 1e-8);
        prop_assert!((d.e1 - k.e1).abs() <= 1e-8);
    }
}
