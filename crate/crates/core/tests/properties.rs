use proptest::prelude::*;

use qott_core::baseline::{rivest_setup, run_honest};
use qott_core::maskers::{Family, SECRET};
use qott_core::protocol::{run_protocol, AliceStrategy, DetectorModel};
use qott_core::qott::{lock, unlock, IndexCards, QottParams};
use qott_core::qudit::{
    clock_matrix, random_density, random_pure, shift_matrix, trace_distance, Container, DensityOperator, Dim, Register,
    C64,
};
use qott_core::rng::seeded;

fn prime() -> impl Strategy<Value = usize> {
    prop::sample::select(vec![3usize, 5, 7])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn clock_and_shift_commute_up_to_a_root_of_unity(d in 2usize..8, a in 0i64..8, b in 0i64..8) {
        let x = shift_matrix(d, a);
        let z = clock_matrix(d, b);
        let omega = C64::from_polar(1.0, 2.0 * std::f64::consts::PI * (a * b) as f64 / d as f64);
        let diff = (&z * &x) - (&x * &z).map(|v| v * omega);
        prop_assert!(diff.iter().all(|v| v.norm() < 1e-12));
    }

    #[test]
    fn partial_trace_of_product_is_the_factor(da in 2usize..4, db in 2usize..4, seed in any::<u64>()) {
        let mut rng = seeded(seed);
        let a = random_density(&Register::single("A", da).unwrap(), da, &mut rng);
        let b = random_density(&Register::single("B", db).unwrap(), 1, &mut rng);
        let joint = a.tensor(&b).unwrap();
        prop_assert!(trace_distance(&joint.reduced(&["A"]).unwrap(), &a).unwrap() < 1e-12);
        prop_assert!(trace_distance(&joint.reduced(&["B"]).unwrap(), &b).unwrap() < 1e-12);
    }

    #[test]
    fn trace_distance_is_a_bounded_metric(d in 2usize..5, seed in any::<u64>()) {
        let mut rng = seeded(seed);
        let reg = Register::single("Q", d).unwrap();
        let r: Vec<DensityOperator> = (0..3).map(|k| random_density(&reg, 1 + k % d, &mut rng)).collect();
        let ab = trace_distance(&r[0], &r[1]).unwrap();
        let bc = trace_distance(&r[1], &r[2]).unwrap();
        let ac = trace_distance(&r[0], &r[2]).unwrap();
        prop_assert!((0.0..=1.0 + 1e-12).contains(&ab));
        prop_assert!(ac <= ab + bc + 1e-12);
    }

    #[test]
    fn masked_shares_ignore_the_secret(d in prop::sample::select(vec![2usize, 3, 5]), seed in any::<u64>()) {
        let mut rng = seeded(seed);
        let reg = Register::single(SECRET, d).unwrap();
        for family in Family::catalogue().into_iter().filter(|f| f.masks_at(d)) {
            let m = family.build(Dim::new(d).unwrap()).unwrap().unwrap();
            let (sa, sb) = m.marginals().unwrap();
            let rho = random_density(&reg, 1 + (seed as usize) % d, &mut rng);
            let out = m.mask(&rho).unwrap();
            prop_assert!(trace_distance(&out.reduced(&["A"]).unwrap(), &sa).unwrap() < 1e-9);
            prop_assert!(trace_distance(&out.reduced(&["B"]).unwrap(), &sb).unwrap() < 1e-9);
            prop_assert!(trace_distance(&m.unmask(&out).unwrap(), &rho).unwrap() < 1e-9);
        }
    }

    #[test]
    fn true_indices_undo_the_lock(p in prime(), i in (0usize..7, 0usize..7), j in (1usize..7, 1usize..7)) {
        let i = [i.0 % p, i.1 % p];
        let j = [1 + j.0 % (p - 1), 1 + j.1 % (p - 1)];
        let prod = unlock(p, i, j) * lock(p, i, j);
        let phase = prod[(0, 0)];
        prop_assert!((phase.norm() - 1.0).abs() < 1e-12);
        let want = nalgebra::DMatrix::<C64>::identity(p, p).map(|v| v * phase);
        prop_assert!((prod - want).iter().all(|v| v.norm() < 1e-12));
    }

    #[test]
    fn honest_commitments_always_open(p in prop::sample::select(vec![3usize, 5]), seed in any::<u64>(),
                                      alice in (0usize..5, 0usize..5), bob in (0usize..2, 0usize..2)) {
        let params = QottParams::minimal(p, &[1, 2]).unwrap();
        let cards = IndexCards { alice: [alice.0 % p, alice.1 % p], bob: [bob.0 + 1, bob.1 + 1] };
        let rho = DensityOperator::pure(&random_pure(&Register::single("I", p).unwrap(), &mut seeded(seed)));
        let (t, _) = run_protocol(&params, Some(cards), &AliceStrategy::honest(&rho).unwrap(), DetectorModel::ideal(), seed).unwrap();
        prop_assert!((t.accept_probability - 1.0).abs() < 1e-10);
        prop_assert!(t.output_fidelity.unwrap() > 1.0 - 1e-9);
    }

    #[test]
    fn classical_commitments_open(p in prime(), m in 0usize..7, seed in any::<u64>()) {
        let ott = rivest_setup(p, &mut seeded(seed)).unwrap();
        prop_assert!(run_honest(&ott, m % p).unwrap().accept);
    }

    #[test]
    fn containers_round_trip(d in 2usize..5, seed in any::<u64>()) {
        let mut rng = seeded(seed);
        let reg = Register::new(&[("X", d), ("Y", 2)]).unwrap();
        let rho = random_density(&reg, 2, &mut rng);
        let back = Container::from_bytes(&Container::Density(rho.clone()).to_bytes().unwrap()).unwrap();
        match back {
            Container::Density(r) => prop_assert_eq!(r.matrix(), rho.matrix()),
            _ => prop_assert!(false, "wrong kind"),
        }
    }
}
