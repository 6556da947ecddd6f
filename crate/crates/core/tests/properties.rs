use harmonium::entanglement::{epsilon_a, epsilon_species, epsilon_species_closed, slater_purity_bound};
use harmonium::model::{ground_energy, ground_state, ModelParams};
use harmonium::rdm::{ground_state_purity, Bipartition};
use proptest::prelude::*;

fn coupling() -> impl Strategy<Value = f64> {
    prop_oneof![-20.0f64..-0.01, 0.01f64..0.49]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn species_pipeline_matches_closed_form(n in 1usize..=3, nl in coupling()) {
        let p = ModelParams::from_n_lambda(n, nl).unwrap();
        let e = epsilon_species(&p).unwrap().epsilon;
        prop_assert!((e - epsilon_species_closed(&p)).abs() < 1e-8);
        prop_assert!((0.0..1.0).contains(&e));
    }

    #[test]
    fn purities_respect_the_slater_bound(n in 2usize..=3, nl in coupling(), ka in 0usize..=3, kb in 0usize..=3) {
        prop_assume!(ka <= n && kb <= n);
        let Ok(bip) = Bipartition::new(ka, kb, n) else { return Ok(()); };
        let p = ModelParams::from_n_lambda(n, nl).unwrap();
        let purity = ground_state_purity(&p, bip).unwrap();
        let bound = slater_purity_bound(n, ka).unwrap() * slater_purity_bound(n, kb).unwrap();
        prop_assert!(purity > 0.0 && purity <= bound * (1.0 + 1e-10), "{purity} > {bound}");
        if let Some(other) = bip.complement(n) {
            prop_assert!((ground_state_purity(&p, other).unwrap() - purity).abs() < 1e-10);
        }
    }

    #[test]
    fn one_body_entanglement_shrinks_with_n(nl in -20.0f64..-0.5) {
        let e: Vec<f64> = (2..=4)
            .map(|n| epsilon_a(&ModelParams::from_n_lambda(n, nl).unwrap()).unwrap().epsilon)
            .collect();
        prop_assert!(e[0] > e[1] && e[1] > e[2], "{e:?}");
    }

    #[test]
    fn energy_falls_as_coupling_grows(n in 1usize..=5, a in -30.0f64..0.49, b in -30.0f64..0.49) {
        prop_assume!((a - b).abs() > 1e-9);
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let e_lo = ground_energy(&ModelParams::from_n_lambda(n, lo).unwrap());
        let e_hi = ground_energy(&ModelParams::from_n_lambda(n, hi).unwrap());
        prop_assert!(e_lo > e_hi);
    }

    #[test]
    fn exchange_symmetry_at_random_points(
        n in 2usize..=3,
        nl in coupling(),
        x in prop::collection::vec(-2.0f64..2.0, 6),
        i in 0usize..3,
        j in 0usize..3,
    ) {
        prop_assume!(i < n && j < n && i != j);
        let p = ModelParams::from_n_lambda(n, nl).unwrap();
        let psi = ground_state(&p);
        let x = &x[..2 * n];
        let v = psi.evaluate(x).unwrap();
        let tol = 1e-10 * v.abs().max(1e-12);
        let mut y = x.to_vec();
        y.swap(i, j);
        prop_assert!((psi.evaluate(&y).unwrap() + v).abs() <= tol);
        let mut z = x.to_vec();
        z.swap(n + i, n + j);
        prop_assert!((psi.evaluate(&z).unwrap() + v).abs() <= tol);
        let swapped: Vec<f64> = x[n..].iter().chain(&x[..n]).copied().collect();
        prop_assert!((psi.evaluate(&swapped).unwrap() - v).abs() <= tol);
    }
}
