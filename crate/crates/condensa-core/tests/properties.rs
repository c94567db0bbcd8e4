use condensa_core::asymptotics::gordan::{verify_alpha, verify_beta};
use condensa_core::asymptotics::{gordan_certificate, probe_branches, GordanBranch};
use condensa_core::generator::Generator;
use condensa_core::hitting::mean_jump_rate_exact;
use condensa_core::regions::{flow_table, RegionSpec};
use condensa_core::simulator::{simulate, Horizon};
use condensa_core::states::enumerate_states;
use condensa_core::stationary::{stationary_closed_form, stationary_exact};
use condensa_core::thermo::{build_torus, kernel_1d, torus_condensation};
use condensa_core::{apply_move, Configuration, ProcessParams, WalkSpec};
use proptest::prelude::*;

fn rates3() -> impl Strategy<Value = WalkSpec> {
    prop::collection::vec(0.1f64..3.0, 6).prop_map(|v| {
        WalkSpec::from_rows(vec![vec![0.0, v[0], v[1]], vec![v[2], 0.0, v[3]], vec![v[4], v[5], 0.0]]).unwrap()
    })
}

fn counts(kappa: usize, n: u32) -> impl Strategy<Value = Configuration> {
    prop::collection::vec(0.0f64..1.0, kappa).prop_map(move |w| {
        let s: f64 = w.iter().sum::<f64>().max(1e-9);
        let mut c: Vec<u32> = w.iter().map(|x| (x / s * n as f64).floor() as u32).collect();
        let left = n - c.iter().sum::<u32>();
        c[0] += left;
        Configuration::new(c)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn rank_is_a_bijection(kappa in 2usize..6, n in 1u32..14, frac in 0.0f64..1.0) {
        let e = enumerate_states(kappa, n).unwrap();
        let r = ((e.size() as f64 - 1.0) * frac) as usize;
        let c = e.unrank(r).unwrap();
        prop_assert_eq!(c.total(), n);
        prop_assert_eq!(e.rank(&c).unwrap(), r);
    }

    #[test]
    fn moves_conserve_and_invert(c in counts(4, 9), x in 0usize..4, y in 0usize..4) {
        prop_assume!(x != y && c.counts[x] > 0);
        let m = apply_move(&c, x, y).unwrap();
        prop_assert_eq!(m.total(), c.total());
        prop_assert_eq!(apply_move(&m, y, x).unwrap(), c);
    }

    #[test]
    fn stationary_is_a_probability(w in rates3(), n in 1u32..9, d in 0.05f64..2.0) {
        let p = ProcessParams::new(n, d).unwrap();
        let mu = stationary_exact(&w, &p).unwrap();
        prop_assert!(mu.weights.iter().all(|&v| v >= 0.0));
        prop_assert!((mu.total() - 1.0).abs() < 1e-12);
        let g = Generator::build(&w, &p).unwrap();
        prop_assert!(g.balance_residual(&mu.weights) <= 1e-11 * g.max_abs().max(1.0));
    }

    #[test]
    fn closed_form_for_uniform_walks(pr in 0.05f64..0.95, n in 1u32..12, d in 1e-4f64..1.0) {
        let w = WalkSpec::cycle(4, pr).unwrap();
        let p = ProcessParams::new(n, d).unwrap();
        let diff = stationary_exact(&w, &p).unwrap().max_abs_diff(&stationary_closed_form(&w, &p).unwrap()).unwrap();
        prop_assert!(diff <= 1e-12, "{}", diff);
    }

    #[test]
    fn flows_balance(w in rates3(), n in 2u32..10, d in 0.01f64..1.0) {
        let p = ProcessParams::new(n, d).unwrap();
        let mu = stationary_exact(&w, &p).unwrap();
        let region = RegionSpec::new(&w, n, &[0, 1, 2], 0.1).unwrap();
        for row in flow_table(&w, &p, &mu, &region).unwrap() {
            for (up, down) in row {
                prop_assert!((up - down).abs() <= 1e-13, "{} {}", up, down);
            }
        }
    }

    /// The trace chain on the condensed states is stationary for μ
    /// restricted to them.
    #[test]
    fn trace_chain_keeps_mu(w in rates3(), n in 2u32..8, d in 0.05f64..1.0) {
        let p = ProcessParams::new(n, d).unwrap();
        let mu = stationary_exact(&w, &p).unwrap();
        let m = mu.condensed_masses().unwrap();
        let total: f64 = m.iter().sum();
        let pi = mean_jump_rate_exact(&w, &p, &[0, 1, 2]).unwrap().stationary().unwrap();
        for x in 0..3 {
            prop_assert!((pi[x] - m[x] / total).abs() < 1e-10, "{:?} {:?}", pi, m);
        }
    }

    #[test]
    fn gordan_exactly_one_branch(n in 2usize..9, entries in prop::collection::vec(-1.0f64..1.0, 28)) {
        let mut q = vec![0.0; n * n];
        let mut it = entries.iter();
        for a in 0..n {
            for b in a + 1..n {
                let v = *it.next().unwrap();
                q[a * n + b] = v;
                q[b * n + a] = -v;
            }
        }
        let cert = gordan_certificate(&q, n).unwrap();
        let probe = probe_branches(&q, n).unwrap();
        prop_assert!(probe.alpha != probe.beta);
        match &cert.branch {
            GordanBranch::Alpha(a) => {
                prop_assert!(probe.alpha);
                prop_assert!(verify_alpha(&q, n, a).is_some());
            }
            GordanBranch::Beta(b) => {
                prop_assert!(probe.beta);
                prop_assert!(verify_beta(&q, n, b).is_some());
            }
        }
    }

    #[test]
    fn simulation_conserves_particles(w in rates3(), n in 1u32..20, d in 0.01f64..2.0, seed in any::<u64>()) {
        let p = ProcessParams::new(n, d).unwrap();
        let t = simulate(&w, &p, &Configuration::balanced(3, n), Horizon::Events(300), seed).unwrap();
        prop_assert_eq!(t.final_configuration().total(), n);
        prop_assert!(t.events.windows(2).all(|e| e[0].time <= e[1].time));
    }

    #[test]
    fn torus_partition_function_agrees(side in 5usize..20, rho in 0.5f64..4.0) {
        let t = build_torus(1, side, &kernel_1d(&[(1, 0.5), (-1, 0.5)]), rho, None).unwrap();
        let r = torus_condensation(&t);
        prop_assert!((r.log_z - r.log_z_check).abs() <= 1e-9 * r.log_z.abs().max(1.0));
        prop_assert!(r.decomposition_residual < 1e-9);
    }
}
