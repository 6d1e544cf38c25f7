use std::collections::BTreeMap;

use proptest::prelude::*;
use ringdd::bench::{dense_oracle, fidelity, shor_postprocess};
use ringdd::circuits::gen_shor;
use ringdd::circuits::shor::{bit_length, counting_value, validate_modulus};
use ringdd::engine::{run_circuit, Comm, RunConfig, SwapMode};
use ringdd::partition::PartitionPlan;

#[test]
fn widths_follow_bit_length() {
    assert_eq!(gen_shor(15, 2).unwrap().n_qubits(), 18);
    assert_eq!(gen_shor(57, 2).unwrap().n_qubits(), 26);
    assert_eq!(gen_shor(511, 2).unwrap().n_qubits(), 38);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]
    #[test]
    fn width_is_four_bits_plus_two(n in 15u64..=1024) {
        prop_assume!(validate_modulus(n).is_ok());
        let base = (2..n).find(|&a| ringdd::circuits::shor::gcd(a, n) == 1).unwrap();
        prop_assert_eq!(gen_shor(n, base).unwrap().n_qubits(), 4 * bit_length(n) + 2);
    }
}

#[test]
fn counting_register_peaks_for_fifteen() {
    let c = gen_shor(15, 2).unwrap();
    let dense = dense_oracle(&c).unwrap();
    let mut mass: BTreeMap<u64, f64> = BTreeMap::new();
    for (i, a) in dense.iter().enumerate() {
        *mass.entry(counting_value(4, i as u64)).or_insert(0.0) += a.norm_sqr();
    }
    for y in [0u64, 64, 128, 192] {
        assert!((mass[&y] - 0.25).abs() < 1e-9, "y={y}: {}", mass[&y]);
    }
    // work register ends in 2^k mod 15 with ancillas cleared
    for (i, a) in dense.iter().enumerate() {
        if a.norm_sqr() > 1e-12 {
            let work = (i >> 8) & 0xf;
            assert!([1, 2, 4, 8].contains(&work), "index {i:#x}");
            assert_eq!(i >> 12, 0, "index {i:#x}");
        }
    }
}

#[test]
fn distributed_run_factors_fifteen() {
    let c = gen_shor(15, 7).unwrap();
    let plan = PartitionPlan::new(18, 4).unwrap();
    let out = run_circuit(&c, &RunConfig::new(plan).comm(Comm::Ring).swap(SwapMode::V1)).unwrap();
    let oracle = dense_oracle(&c).unwrap();
    assert!(fidelity(&out, &oracle) >= 1.0 - 1e-9);
    let hist = out.sample(1024, 11).unwrap();
    let res = shor_postprocess(&hist, 15, 7, 10);
    assert_eq!(res.factors, Some((3, 5)));
    assert_eq!(res.period, Some(4));
}

#[test]
fn twenty_one_single_rank() {
    let c = gen_shor(21, 2).unwrap();
    let plan = PartitionPlan::new(22, 1).unwrap();
    let out = run_circuit(&c, &RunConfig::new(plan)).unwrap();
    assert!((out.squared_norm() - 1.0).abs() < 1e-9);
    let hist = out.sample(2048, 5).unwrap();
    let res = shor_postprocess(&hist, 21, 2, 10);
    assert_eq!(res.factors, Some((3, 7)));
}
