use proptest::prelude::*;
use vortical::emden::{
    closed_form_gamma2, energy_drift, integrate, IntegrationConfig, TerminalEvent,
};
use vortical::solution::SolutionParams;

fn bounded_params() -> impl Strategy<Value = SolutionParams> {
    (
        1.1f64..3.0,
        0.3f64..2.0,
        0.2f64..1.5,
        -1.5f64..1.5,
        0.5f64..2.0,
        -1.0f64..1.0,
    )
        .prop_map(|(g, k, xi, lam, a0, a1)| {
            SolutionParams::new(g, k, xi, lam, 1.0, a0, a1).unwrap()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn energy_is_conserved_without_collapse(p in bounded_params()) {
        let cfg = IntegrationConfig::until(5.0);
        let tr = integrate(&p, &cfg).unwrap();
        if tr.event() == TerminalEvent::ReachedEnd {
            prop_assert!(energy_drift(&tr) <= 100.0 * cfg.rel_tol, "{}", energy_drift(&tr));
        }
    }

    #[test]
    fn gamma_two_matches_the_quadratic(xi in 0.1f64..2.0, lam in -2.0f64..2.0, a0 in 0.5f64..2.0, a1 in -1.0f64..1.0) {
        let p = SolutionParams::new(2.0, 1.0, xi, lam, 1.0, a0, a1).unwrap();
        let t_end = 2.0;
        // a^2 = a0^2 + 2 a0 a1 t + (a1^2 + (xi^2 + lambda)/a0^2) t^2 must stay positive on [0, t_end]
        let c2 = a1 * a1 + (xi * xi + lam) / (a0 * a0);
        let q = |t: f64| a0 * a0 + 2.0 * a0 * a1 * t + c2 * t * t;
        let vertex = if c2 > 0.0 { (-a0 * a1 / c2).clamp(0.0, t_end) } else { 0.0 };
        prop_assume!(q(0.0).min(q(t_end)).min(q(vertex)) > 0.05);
        let tr = integrate(&p, &IntegrationConfig::until(t_end)).unwrap();
        prop_assert_eq!(tr.event(), TerminalEvent::ReachedEnd);
        for n in tr.nodes() {
            let exact = closed_form_gamma2(&p, n.state.t).unwrap();
            prop_assert!((n.state.a - exact.a).abs() <= 1e-8, "t = {}", n.state.t);
        }
    }

    #[test]
    fn reversing_the_velocity_retraces_the_orbit(p in bounded_params(), dt in 0.1f64..2.0) {
        let fwd = integrate(&p, &IntegrationConfig::until(dt)).unwrap();
        prop_assume!(fwd.event() == TerminalEvent::ReachedEnd);
        let end = fwd.state_at(dt).unwrap();
        let back = integrate(&p.with_initial(end.a, -end.adot).unwrap(), &IntegrationConfig::until(dt)).unwrap();
        prop_assume!(back.event() == TerminalEvent::ReachedEnd);
        let st = back.state_at(dt).unwrap();
        prop_assert!((st.a - p.a0()).abs() <= 1e-7, "{} vs {}", st.a, p.a0());
        prop_assert!((st.adot + p.a1()).abs() <= 1e-7, "{} vs {}", st.adot, -p.a1());
    }

    #[test]
    fn dense_output_reproduces_nodes(p in bounded_params()) {
        let tr = integrate(&p, &IntegrationConfig::until(3.0)).unwrap();
        for n in tr.nodes() {
            let st = tr.state_at(n.state.t).unwrap();
            prop_assert_eq!(st.a.to_bits(), n.state.a.to_bits());
            prop_assert_eq!(st.adot.to_bits(), n.state.adot.to_bits());
        }
    }

    /// With an attractive net force below the hump the scale only falls
    /// once it starts falling.
    #[test]
    fn collapse_is_monotone(xi in 0.1f64..1.5, extra in 0.1f64..2.0, a0 in 0.3f64..2.0, a1 in -1.0f64..=0.0) {
        let gamma_two = SolutionParams::new(2.0, 1.0, xi, -(xi * xi) - extra, 1.0, a0, a1).unwrap();
        let tr = integrate(&gamma_two, &IntegrationConfig::until(50.0)).unwrap();
        prop_assert!(matches!(tr.event(), TerminalEvent::Collapsed { .. }), "{:?}", tr.event());
        for w in tr.nodes().windows(2) {
            prop_assert!(w[1].state.a < w[0].state.a);
        }
    }

    #[test]
    fn collapse_below_the_hump_is_monotone(xi in 0.5f64..1.5, frac in 0.2f64..0.9, a1 in -1.0f64..=-0.01) {
        // gamma = 3, lambda = -1: hump at a_max = sqrt(-lambda) / xi
        let a_max = 1.0 / xi;
        let p = SolutionParams::new(3.0, 1.0, xi, -1.0, 1.0, frac * a_max, a1).unwrap();
        let tr = integrate(&p, &IntegrationConfig::until(50.0)).unwrap();
        prop_assert!(matches!(tr.event(), TerminalEvent::Collapsed { .. }), "{:?}", tr.event());
        for w in tr.nodes().windows(2) {
            prop_assert!(w[1].state.a < w[0].state.a);
        }
    }
}
