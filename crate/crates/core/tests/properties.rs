use proptest::prelude::*;

use stagate_core::benchmarking::{build_clifford_table, fit_decay};
use stagate_core::dynamics::{unitary_gate_fidelity, Channel};
use stagate_core::linalg::{c, cis, to_dynamic, Mat2};
use stagate_core::pulse::{counter_diabatic_components, reference_field_with_rate, GateName, GatePreset};
use stagate_core::tomography::{ideal_chi, process_fidelity, reconstruct_chi, run_qpt, MeasurementModel};

fn euler(a: f64, b: f64, g: f64, d: f64) -> Mat2 {
    let rz = |x: f64| Mat2::new(cis(-x / 2.0), c(0.0, 0.0), c(0.0, 0.0), cis(x / 2.0));
    let (s, co) = (b / 2.0).sin_cos();
    rz(a) * Mat2::new(c(co, 0.0), c(-s, 0.0), c(s, 0.0), c(co, 0.0)) * rz(g) * cis(d)
}

fn angle() -> impl Strategy<Value = f64> {
    0.0..std::f64::consts::TAU
}

proptest! {
    #[test]
    fn cd_field_is_orthogonal(i in 0usize..10, frac in 0.0f64..=1.0) {
        let p = GatePreset::standard(GateName::ALL[i]);
        let t = frac * p.duration();
        let (b0, _) = reference_field_with_rate(&p, t);
        let cd = counter_diabatic_components(&p.schedule, t).unwrap();
        prop_assert!(cd.dot(&b0).abs() <= 1e-12 * (1.0 + b0.norm() * cd.norm()));
    }

    #[test]
    fn fidelity_bounds(a in angle(), b in angle(), g in angle(), d in angle(), e in angle()) {
        let u = euler(a, b, g, d);
        let v = euler(b, g, a, e);
        prop_assert!((unitary_gate_fidelity(&u, &u) - 1.0).abs() < 1e-12);
        let f = unitary_gate_fidelity(&u, &v);
        prop_assert!((0.0..=1.0).contains(&f));
        prop_assert!((f - unitary_gate_fidelity(&v, &u)).abs() < 1e-12);
    }

    #[test]
    fn exact_qpt_reconstructs(a in angle(), b in angle(), g in angle(), d in angle()) {
        let u = euler(a, b, g, d);
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(0);
        let data = run_qpt(&Channel::from_unitary(&to_dynamic(&u)), &MeasurementModel::ideal(), &mut rng);
        let chi = reconstruct_chi(&data).unwrap();
        prop_assert!(chi.max_abs_diff(&ideal_chi(&u)) < 1e-9);
        prop_assert!((process_fidelity(&chi, &ideal_chi(&u)) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn fit_recovers_exact_decays(a0 in 0.2f64..0.8, p in 0.95f64..0.9995, b0 in 0.2f64..0.6) {
        let pts: Vec<(f64, f64)> = [1.0, 3.0, 6.0, 10.0, 20.0, 40.0, 70.0, 100.0, 150.0, 200.0, 300.0]
            .iter()
            .map(|&m| (m, a0 * p.powf(m) + b0))
            .collect();
        let fit = fit_decay(&pts).unwrap();
        prop_assert!((fit.p - p).abs() < 1e-8, "{} vs {}", fit.p, p);
    }

    #[test]
    fn clifford_products_close(seq in proptest::collection::vec(0usize..24, 1..40)) {
        let t = build_clifford_table().unwrap();
        let net = t.compose(&seq);
        let u = seq.iter().fold(Mat2::identity(), |acc, &i| t.element(i).unitary * acc);
        prop_assert_eq!(t.find(&u), Some(net));
        prop_assert_eq!(t.multiply(t.inverse(net), net), t.identity());
    }
}
