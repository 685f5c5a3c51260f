//! Property tests for the invariants every kernel, check and artifact must satisfy.

mod common;

use hybrid_gibbs::bounds::{
    alpha_t, approx_quality, beta_t, check_block, check_gap_sandwich, check_variance_sandwich, check_da_sandwich,
    check_da_tstep, check_da_variance_t, check_selection_probs, check_slice, check_power_expansion,
    check_dirichlet_sandwich, CheckOptions, DaModel, GammaProfile,
};
use hybrid_gibbs::cli::{demo_config, parse_config_str, ApproximatorConfig, CoordOverride, ModelConfig, ModelSpec};
use hybrid_gibbs::gibbs::random::{random_explicit_spec, random_selection, random_slice};
use hybrid_gibbs::gibbs::{
    block_hybrid_scan, block_random_scan, da_approximator, da_exact, da_hybrid, exact_random_scan, hybrid_random_scan,
    slice_exact, slice_hybrid, ApproxRule, ApproximatorSpec, SelectionProbs, SliceModel,
};
use hybrid_gibbs::sim::{mixing_curve, simulate, Start};
use hybrid_gibbs::spectral::{
    asymptotic_variance, check_reversibility, dirichlet_form, spectral_decomposition, spectral_jensen_check,
    spectral_summary, t_step, ProbVec, ReversiblePair, StochasticKernel,
};
use hybrid_gibbs::{BoundReport, Status};
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::Rng;

fn affine(eps: f64, k: &ReversiblePair) -> DMatrix<f64> {
    let n = k.n();
    DMatrix::identity(n, n) * eps + k.kernel().matrix() * (1.0 - eps)
}

fn assert_acceptable(reports: &[BoundReport]) -> Result<(), TestCaseError> {
    for r in reports {
        prop_assert!(r.acceptable(), "{} failed: lhs {} rhs {} slack {}", r.name, r.lhs, r.rhs, r.slack);
        if r.status == Status::Pass {
            prop_assert!(r.slack >= -r.tol, "{}", r.name);
        }
    }
    Ok(())
}

fn find<'a>(reports: &'a [BoundReport], name: &str) -> &'a BoundReport {
    reports.iter().find(|r| r.name == name).unwrap_or_else(|| panic!("no report {name}"))
}

fn two_block_model(seed: u64) -> (hybrid_gibbs::gibbs::JointDistribution, ApproximatorSpec) {
    let mut rng = common::rng(seed);
    let joint = common::joint_with(&mut rng, 2, 4);
    let spec = random_explicit_spec(&mut rng, &joint, &[0], 0.5).unwrap();
    (joint, spec)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn norm_dominates_rayleigh_quotients(seed in any::<u64>(), len in 2usize..=7) {
        let mut rng = common::rng(seed);
        let rev = common::reversible(&mut rng, len);
        let dec = spectral_decomposition(&rev).unwrap();
        let norm = dec.summary.operator_norm;
        let from_basis = dec
            .eigenfunctions
            .iter()
            .map(|f| common::rayleigh(&rev, f.as_slice()).abs())
            .fold(0.0, f64::max);
        prop_assert!((from_basis - norm).abs() < 1e-9, "{from_basis} vs {norm}");
        for _ in 0..200 {
            let f = common::function(&mut rng, len);
            prop_assert!(common::rayleigh(&rev, f.as_slice()).abs() <= norm + 1e-9);
        }
    }

    #[test]
    fn dirichlet_formulas_agree(seed in any::<u64>(), len in 2usize..=7) {
        let mut rng = common::rng(seed);
        let rev = common::reversible(&mut rng, len);
        let f = common::function(&mut rng, len);
        let omega = rev.stationary().as_slice();
        let kf = rev.kernel().apply(f.as_slice());
        let ikf: Vec<f64> = f.as_slice().iter().zip(&kf).map(|(a, b)| a - b).collect();
        let inner = common::centered_inner(omega, f.as_slice(), &ikf);
        let double_sum = common::dirichlet(&rev, f.as_slice());
        let computed = dirichlet_form(&rev, &f).unwrap();
        prop_assert!((inner - double_sum).abs() < 1e-10);
        prop_assert!((computed - double_sum).abs() < 1e-10);
    }

    #[test]
    fn psd_variance_dominates_squared_norm(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let joint = common::joint(&mut rng, 3, 3);
        let t = exact_random_scan(&joint, &random_selection(&mut rng, joint.n_coords())).unwrap();
        let f = common::function(&mut rng, joint.total());
        let w = joint.weights().as_slice();
        let norm = common::centered_inner(w, f.as_slice(), f.as_slice());
        prop_assert!(asymptotic_variance(&t, &f).unwrap() >= norm - 1e-9);
    }

    #[test]
    fn jensen_holds_for_even_powers(seed in any::<u64>(), len in 2usize..=6) {
        let mut rng = common::rng(seed);
        let rev = common::reversible(&mut rng, len);
        let f = common::function(&mut rng, len);
        for t in [2, 4, 6, 8] {
            let r = spectral_jensen_check(&rev, &f, t).unwrap();
            prop_assert!(r.pass, "t = {t}: {r:?}");
        }
    }

    #[test]
    fn power_norm_is_norm_power(seed in any::<u64>(), len in 2usize..=6, t in 1usize..=6) {
        let mut rng = common::rng(seed);
        let rev = common::reversible(&mut rng, len);
        let s = spectral_summary(&rev).unwrap();
        let kt = check_reversibility(t_step(rev.kernel(), t).unwrap(), rev.stationary().clone(), 1e-10).unwrap();
        let st = spectral_summary(&kt).unwrap();
        let dominating = s.eigenvalues.iter().map(|l| l.abs().powi(t as i32)).fold(0.0, f64::max);
        prop_assert!((st.operator_norm - s.operator_norm.powi(t as i32)).abs() < 1e-9);
        prop_assert!((st.operator_norm - dominating).abs() < 1e-9);
    }

    #[test]
    fn built_kernels_are_reversible(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let joint = common::joint(&mut rng, 3, 3);
        let n = joint.n_coords();
        let p = random_selection(&mut rng, n);
        let spec = random_explicit_spec(&mut rng, &joint, &(0..n).collect::<Vec<_>>(), 0.3).unwrap();
        let w = joint.weights();
        let mut kernels = vec![exact_random_scan(&joint, &p).unwrap(), hybrid_random_scan(&joint, &p, &spec).unwrap()];
        for l in 1..n {
            kernels.push(block_random_scan(&joint, l).unwrap());
        }
        for k in &kernels {
            prop_assert_eq!(k.stationary(), w);
            prop_assert!(k.reversibility_defect() <= 1e-10);
            prop_assert!(k.stationarity_defect() <= 1e-10);
        }
        let (joint2, spec2) = two_block_model(seed);
        let m1 = ProbVec::new(joint2.marginal(&[0]).unwrap().as_slice().to_vec()).unwrap();
        for k in [da_exact(&joint2).unwrap(), da_hybrid(&joint2, &spec2).unwrap()] {
            prop_assert!(k.kernel().stationarity_defect(&m1) <= 1e-10);
            prop_assert!(k.reversibility_defect() <= 1e-10);
        }
        let slice = random_slice(&mut rng, 4).unwrap();
        let target = slice.target().unwrap();
        for k in [slice_exact(&slice).unwrap(), slice_hybrid(&slice).unwrap()] {
            prop_assert!(k.kernel().stationarity_defect(&target) <= 1e-10);
            prop_assert!(k.reversibility_defect() <= 1e-10);
        }
    }

    #[test]
    fn exact_and_block_kernels_are_psd(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let joint = common::joint(&mut rng, 4, 4);
        let p = random_selection(&mut rng, joint.n_coords());
        prop_assert!(spectral_summary(&exact_random_scan(&joint, &p).unwrap()).unwrap().lambda_min >= -1e-9);
        for l in 1..joint.n_coords() {
            prop_assert!(spectral_summary(&block_random_scan(&joint, l).unwrap()).unwrap().lambda_min >= -1e-9);
        }
    }

    #[test]
    fn exact_spec_reproduces_exact_kernel(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let joint = common::joint(&mut rng, 3, 4);
        let p = random_selection(&mut rng, joint.n_coords());
        let t = exact_random_scan(&joint, &p).unwrap();
        let th = hybrid_random_scan(&joint, &p, &ApproximatorSpec::exact()).unwrap();
        prop_assert!(common::max_entry_diff(t.kernel(), th.kernel()) <= 1e-14);
    }

    #[test]
    fn lazy_hybrids_are_affine(seed in any::<u64>(), eps in 0.0f64..=1.0) {
        let mut rng = common::rng(seed);
        let joint = common::joint(&mut rng, 3, 4);
        let p = random_selection(&mut rng, joint.n_coords());
        let spec = ApproximatorSpec::lazy(eps);
        let t = exact_random_scan(&joint, &p).unwrap();
        let th = hybrid_random_scan(&joint, &p, &spec).unwrap();
        prop_assert!((th.kernel().matrix() - affine(eps, &t)).abs().max() <= 1e-12);
        let (joint2, _) = two_block_model(seed);
        let s = da_exact(&joint2).unwrap();
        let sh = da_hybrid(&joint2, &spec).unwrap();
        prop_assert!((sh.kernel().matrix() - affine(eps, &s)).abs().max() <= 1e-12);
    }

    #[test]
    fn two_level_slice_matches_closed_form(a in 0.1f64..10.0, b in 0.1f64..10.0) {
        prop_assume!((a - b).abs() > 1e-3);
        let (hi, lo) = if a > b { (a, b) } else { (b, a) };
        let s = slice_exact(&SliceModel::new(vec![a, b]).unwrap()).unwrap();
        // From the higher state the slice stays put above `lo`; below `lo` both states are uniform.
        let stay = (hi - lo) / hi + lo / (2.0 * hi);
        let high_row = [stay, 1.0 - stay];
        let expected = if a > b {
            [[high_row[0], high_row[1]], [0.5, 0.5]]
        } else {
            [[0.5, 0.5], [high_row[1], high_row[0]]]
        };
        for x in 0..2 {
            for y in 0..2 {
                prop_assert!((s.kernel().get(x, y) - expected[x][y]).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn nested_blocks_reproduce_smaller_blocks(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let joint = common::joint(&mut rng, 4, 3);
        let n = joint.n_coords();
        for outer in 2..n {
            for inner in 1..outer {
                let nested = block_hybrid_scan(&joint, outer, inner).unwrap();
                let direct = block_random_scan(&joint, inner).unwrap();
                prop_assert!(common::max_entry_diff(nested.kernel(), direct.kernel()) <= 1e-12);
            }
        }
    }

    #[test]
    fn every_check_passes_on_random_models(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let joint = common::joint(&mut rng, 3, 4);
        let n = joint.n_coords();
        let p = random_selection(&mut rng, n);
        let p2 = random_selection(&mut rng, n);
        let spec = random_explicit_spec(&mut rng, &joint, &(0..n).collect::<Vec<_>>(), 0.3).unwrap();
        let opts = CheckOptions::default().with_trials(16).with_seed(seed);
        assert_acceptable(&check_dirichlet_sandwich(&joint, &p, &spec, opts).unwrap())?;
        assert_acceptable(&check_gap_sandwich(&joint, &p, &spec, opts.tol).unwrap())?;
        assert_acceptable(&check_variance_sandwich(&joint, &p, &spec, None, opts).unwrap())?;
        assert_acceptable(&check_selection_probs(&joint, &p, &p2, &spec, opts.tol).unwrap())?;
        let uniform = SelectionProbs::uniform(n);
        for t in 1..=4 {
            assert_acceptable(&check_power_expansion(&joint, &uniform, &spec, t, opts.tol).unwrap())?;
        }
        for outer in 2..n {
            for inner in 1..outer {
                assert_acceptable(&check_block(&joint, outer, inner, opts).unwrap())?;
            }
        }
        let (joint2, spec2) = two_block_model(seed);
        assert_acceptable(&check_da_sandwich(&joint2, &spec2, opts.tol).unwrap())?;
        let model = DaModel::Joint { joint: &joint2, spec: &spec2 };
        for t in 1..=4 {
            assert_acceptable(&check_da_tstep(&model, t, opts).unwrap())?;
            assert_acceptable(&check_da_variance_t(&model, t, opts).unwrap())?;
        }
        let d = rng.random_range(2..=5);
        let slice = random_slice(&mut rng, d).unwrap();
        for t in [1, 2, 4, 8] {
            assert_acceptable(&check_slice(&slice, t, opts.tol).unwrap())?;
        }
    }

    #[test]
    fn quality_constants_are_consistent(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let joint = common::joint(&mut rng, 3, 4);
        let n = joint.n_coords();
        let spec = random_explicit_spec(&mut rng, &joint, &(0..n).collect::<Vec<_>>(), 0.5).unwrap();
        let q = approx_quality(&joint, &spec).unwrap();
        prop_assert!(1.0 - q.c <= q.c1 + 1e-9);
        prop_assert!(q.c2 <= 1.0 + q.c + 1e-9);
        if q.all_psd {
            prop_assert!(q.c2 <= 1.0 + 1e-9);
        }
    }

    #[test]
    fn alpha_is_monotone_and_below_beta(seed in any::<u64>()) {
        let (joint, spec) = two_block_model(seed);
        let model = DaModel::Joint { joint: &joint, spec: &spec };
        let gamma = GammaProfile::exact(&model).unwrap();
        let alphas: Vec<f64> = (1..=10).map(|t| alpha_t(&model, &gamma, t).unwrap()).collect();
        for w in alphas.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-12);
        }
        for t in 1..=10 {
            prop_assert!(alphas[t - 1] <= beta_t(&model, &gamma, t).unwrap() + 1e-12);
        }
    }

    #[test]
    fn lazy_lower_bounds_are_tight(seed in any::<u64>(), eps in 0.0f64..0.99) {
        let mut rng = common::rng(seed);
        let joint = common::joint(&mut rng, 3, 3);
        let p = random_selection(&mut rng, joint.n_coords());
        let spec = ApproximatorSpec::lazy(eps);
        let opts = CheckOptions::default().with_trials(16).with_seed(seed);
        let gap = check_gap_sandwich(&joint, &p, &spec, opts.tol).unwrap();
        prop_assert!(find(&gap, "gap_sandwich.lower").slack.abs() <= 1e-10);
        let dir = check_dirichlet_sandwich(&joint, &p, &spec, opts).unwrap();
        prop_assert!(find(&dir, "dirichlet_sandwich.lower").slack.abs() <= 1e-10);
        let var = check_variance_sandwich(&joint, &p, &spec, None, opts).unwrap();
        let lower = find(&var, "variance_sandwich.lower");
        prop_assert!(lower.slack.abs() <= 1e-10 * (1.0 + lower.rhs.abs()));
        let (joint2, _) = two_block_model(seed);
        let da = check_da_sandwich(&joint2, &spec, opts.tol).unwrap();
        prop_assert!(find(&da, "da_sandwich.lower").slack.abs() <= 1e-10);
    }

    #[test]
    fn tstep_functional_holds_per_eigenvector(seed in any::<u64>(), t in 1usize..=6) {
        let (joint, spec) = two_block_model(seed);
        let s = da_exact(&joint).unwrap();
        let sh = da_hybrid(&joint, &spec).unwrap();
        let d0 = joint.space().sizes()[0];
        let d1 = joint.space().sizes()[1];
        // Independent α_t: worst conditional average of ‖Q_z‖ᵗ.
        let norms: Vec<f64> = (0..d1)
            .map(|z| spectral_summary(&da_approximator(&joint, &spec, z).unwrap()).unwrap().operator_norm)
            .collect();
        let w = joint.weights().as_slice();
        let alpha = (0..d0)
            .map(|y| {
                let row: f64 = (0..d1).map(|z| w[y + d0 * z]).sum();
                (0..d1).map(|z| w[y + d0 * z] / row * norms[z].powi(t as i32)).sum::<f64>()
            })
            .fold(0.0, f64::max);
        let model = DaModel::Joint { joint: &joint, spec: &spec };
        let lib_alpha = alpha_t(&model, &GammaProfile::exact(&model).unwrap(), t).unwrap();
        prop_assert!((alpha - lib_alpha).abs() <= 1e-12);
        let psd = spectral_summary(&sh).unwrap().psd;
        prop_assume!(t % 2 == 0 || psd);
        for f in spectral_decomposition(&sh).unwrap().eigenfunctions {
            let lhs = common::rayleigh(&sh, f.as_slice()).powi(t as i32);
            let rhs = common::rayleigh(&s, f.as_slice()) + alpha;
            prop_assert!(lhs <= rhs + 1e-9, "{lhs} > {rhs}");
        }
    }

    #[test]
    fn trajectories_are_reproducible(seed in any::<u64>(), len in 2usize..=6) {
        let mut rng = common::rng(seed);
        let rev = common::reversible(&mut rng, len);
        let start = Start::Dist(rev.stationary().clone());
        let a = simulate(&rev, &start, 500, seed).unwrap();
        let b = simulate(&rev, &start, 500, seed).unwrap();
        prop_assert_eq!(&a, &b);
        let k = rev.kernel();
        for w in a.states.windows(2) {
            prop_assert!(k.get(w[0], w[1]) > 0.0);
        }
    }

    #[test]
    fn psd_mixing_distances_never_increase(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let joint = common::joint(&mut rng, 3, 3);
        let t = exact_random_scan(&joint, &random_selection(&mut rng, joint.n_coords())).unwrap();
        let mu0 = ProbVec::delta(joint.total(), rng.random_range(0..joint.total())).unwrap();
        let curve = mixing_curve(&t, &mu0, 40).unwrap();
        for w in curve.distances.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-12);
        }
        prop_assert!(curve.rate_report.acceptable());
    }

    #[test]
    fn config_round_trip_is_a_fixed_point(
        sizes in proptest::collection::vec(2usize..=3, 2..=3),
        seed in 0..=hybrid_gibbs::cli::config::MAX_SEED,
        eps in 0.0f64..=1.0,
        coord in 0usize..2,
        t in proptest::collection::vec(1usize..=8, 1..=4),
    ) {
        let mut config = ModelConfig::new(ModelSpec::Random { sizes, seed }).with_approximator(ApproximatorConfig {
            default: ApproxRule::Lazy { eps },
            overrides: vec![CoordOverride { coord, rule: ApproxRule::MetropolisRw { radius: 1 } }],
            explicit: Vec::new(),
        });
        config.run.t = t;
        config.run.seed = seed;
        let config = config.canonicalize();
        let once = parse_config_str(&config.to_toml().unwrap()).unwrap();
        prop_assert_eq!(&once, &config);
        let twice = parse_config_str(&once.to_toml().unwrap()).unwrap();
        prop_assert_eq!(&twice, &once);
        prop_assert_eq!(once.fingerprint().unwrap(), config.fingerprint().unwrap());
    }
}

#[test]
fn demo_configs_round_trip() {
    for name in hybrid_gibbs::cli::list_demos() {
        let c = demo_config(name).unwrap();
        assert_eq!(parse_config_str(&c.to_toml().unwrap()).unwrap(), c, "{name}");
    }
}

#[test]
fn identity_kernel_has_no_gap() {
    let omega = ProbVec::uniform(3).unwrap();
    let rev = check_reversibility(StochasticKernel::identity(3), omega, 1e-12).unwrap();
    assert!((spectral_summary(&rev).unwrap().gap).abs() < 1e-12);
}
