//! Acceptance checks, one line per criterion. Runs without the libtest
//! harness so the report reads top to bottom; exits non-zero if any fails.

use std::path::PathBuf;
use std::process::Command;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ringdd::bench::{dense_oracle, fidelity};
use ringdd::circuits::{gen_qcbm, random_circuit, Circuit, Gate};
use ringdd::engine::{run_circuit, Comm, RunConfig, SwapMode};
use ringdd::partition::PartitionPlan;
use ringdd::swap::{plan_swaps_v1, plan_swaps_v2, QubitLayout};
use ringdd::transport::wire::{decode, encode};
use ringdd::{Complex, Package, VecEdge};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

const AMP_TOL: f64 = 1e-10;
const FIDELITY_FLOOR: f64 = 1.0 - 1e-9;
const NORM_TOL: f64 = 1e-9;
const WIRE_TOL: f64 = 1e-12;

fn max_diff(a: &[Complex], b: &[Complex]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn run(c: &Circuit, ranks: usize, comm: Comm, swap: SwapMode) -> Result<ringdd::engine::RunOutcome, String> {
    let plan = PartitionPlan::new(c.n_qubits(), ranks).map_err(|e| e.to_string())?;
    run_circuit(c, &RunConfig::new(plan).comm(comm).swap(swap)).map_err(|e| e.to_string())
}

fn fig1_fixture() -> Outcome {
    let mut pkg = Package::new();
    let one = VecEdge::terminal(Complex::new(1.0, 0.0));
    let zero = VecEdge::zero();
    let leaf = pkg.make_vec_node(0, [one, one]).map_err(|e| e.to_string())?;
    let left = pkg.make_vec_node(1, [zero, leaf]).map_err(|e| e.to_string())?;
    let right = pkg.make_vec_node(1, [leaf, zero]).map_err(|e| e.to_string())?;
    let neg = pkg.scale(right, Complex::new(-1.0, 0.0));
    let root = pkg.make_vec_node(2, [left, neg]).map_err(|e| e.to_string())?;
    let root = pkg.scale(root, Complex::new(0.5, 0.0));
    let a101 = pkg.amplitude(root, &[true, false, true]).map_err(|e| e.to_string())?;
    let a110 = pkg.amplitude(root, &[true, true, false]).map_err(|e| e.to_string())?;
    ensure(a101 == Complex::new(-0.5, 0.0), || format!("amplitude(101) = {a101}"))?;
    ensure(a110 == Complex::new(0.0, 0.0), || format!("amplitude(110) = {a110}"))?;
    let nodes = pkg.size(root);
    ensure(nodes == 4 && pkg.vector_node_count() == 4, || format!("{nodes} nodes"))?;
    Ok(format!(
        "amplitude(101) = {a101}, amplitude(110) = {a110}, {nodes} nodes"
    ))
}

fn oracle_equivalence() -> Outcome {
    let mut worst: f64 = 0.0;
    for seed in 0..200u64 {
        let n = 1 + (seed % 6) as usize;
        let len = (seed * 7 % 31) as usize;
        let c = random_circuit(n, len, seed);
        let out = run(&c, 1, Comm::Ring, SwapMode::None)?;
        let d = max_diff(&out.to_dense_logical(), &dense_oracle(&c).map_err(|e| e.to_string())?);
        ensure(d <= AMP_TOL, || format!("circuit {seed}: max amplitude error {d:e}"))?;
        worst = worst.max(d);
    }
    Ok(format!("200 circuits, max amplitude error {worst:.2e}"))
}

/// Circuit `seed` of the random family embedded into 8 qubits at seeded
/// random positions.
fn padded(seed: u64) -> Circuit {
    let n = 1 + (seed % 6) as usize;
    let len = (seed * 7 % 31) as usize;
    let c = random_circuit(n, len, seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let mut slots: Vec<usize> = (0..8).collect();
    slots.shuffle(&mut rng);
    c.embed(8, &slots[..n]).expect("embedding is injective")
}

fn distribution_invariance() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut runs = 0;
    for seed in 0..50u64 {
        let c = padded(seed);
        let base = run(&c, 1, Comm::Ring, SwapMode::None)?.to_dense_logical();
        for ranks in [1, 2, 4, 8] {
            for comm in [Comm::Ring, Comm::Broadcast] {
                for swap in [SwapMode::None, SwapMode::V1, SwapMode::V2] {
                    let d = max_diff(&run(&c, ranks, comm, swap)?.to_dense_logical(), &base);
                    ensure(d <= AMP_TOL, || {
                        format!("circuit {seed} P={ranks} {comm:?} {swap:?}: {d:e}")
                    })?;
                    worst = worst.max(d);
                    runs += 1;
                }
            }
        }
    }
    Ok(format!(
        "50 circuits x {} configurations, max deviation {worst:.2e}",
        runs / 50
    ))
}

fn letters(layout: &QubitLayout) -> String {
    (0..layout.len())
        .map(|p| (b'a' + layout.logical(p) as u8) as char)
        .collect()
}

fn swap_examples() -> Outcome {
    let start = QubitLayout::identity(5);
    let plan = PartitionPlan::new(5, 2).map_err(|e| e.to_string())?;
    let one_based = |s: &[(usize, usize)]| s.iter().map(|&(a, b)| (a + 1, b + 1)).collect::<Vec<_>>();
    let v1 = plan_swaps_v1(&start, &[2]);
    let v2 = plan_swaps_v2(&start, &[2], &plan);
    let (s1, s2) = (one_based(&v1.swaps), one_based(&v2.swaps));
    ensure(s1 == [(3, 4), (4, 5)] && letters(&v1.result) == "abdec", || {
        format!("v1 gave {s1:?} -> {}", letters(&v1.result))
    })?;
    ensure(s2 == [(3, 5)] && letters(&v2.result) == "abedc", || {
        format!("v2 gave {s2:?} -> {}", letters(&v2.result))
    })?;
    Ok(format!(
        "v1 {s1:?} -> [{}], v2 {s2:?} -> [{}]",
        letters(&v1.result),
        letters(&v2.result)
    ))
}

fn top_qubit_pattern() -> Result<(u64, u64, u64), String> {
    let c = Circuit::from_gates(3, vec![Gate::h(2), Gate::rz(0.7, 2), Gate::x(2), Gate::rx(0.4, 2)])
        .map_err(|e| e.to_string())?;
    let plan = PartitionPlan::new(3, 2).map_err(|e| e.to_string())?;
    let none = run_circuit(&c, &RunConfig::new(plan)).map_err(|e| e.to_string())?;
    let reference = none.to_dense_logical();
    let mut counts = vec![none.total_metrics().global_applications];
    for swap in [SwapMode::V1, SwapMode::V2] {
        let mut cfg = RunConfig::new(plan).swap(swap);
        cfg.restore_layout = true;
        let out = run_circuit(&c, &cfg).map_err(|e| e.to_string())?;
        let d = max_diff(&out.to_dense_logical(), &reference);
        ensure(d <= AMP_TOL, || format!("{swap:?} state differs by {d:e}"))?;
        counts.push(out.total_metrics().global_applications);
    }
    Ok((counts[0], counts[1], counts[2]))
}

fn communication_reduction() -> Outcome {
    let (none, v1, v2) = top_qubit_pattern()?;
    ensure(none == 4 && v1 == 2 && v2 == 2, || {
        format!("global applications none={none} v1={v1} v2={v2}")
    })?;
    Ok(format!(
        "global applications: none={none}, v1={v1}, v2={v2}; states agree"
    ))
}

fn single_gate_messages() -> Result<[(u64, u64); 2], String> {
    let c = Circuit::from_gates(4, vec![Gate::h(3)]).map_err(|e| e.to_string())?;
    let mut out = [(0, 0); 2];
    for (i, comm) in [Comm::Ring, Comm::Broadcast].into_iter().enumerate() {
        let t = run(&c, 4, comm, SwapMode::None)?.total_metrics();
        out[i] = (t.messages_sent, t.max_sends_in_round);
    }
    Ok(out)
}

fn message_accounting() -> Outcome {
    let [(rm, rmax), (bm, bmax)] = single_gate_messages()?;
    ensure(rm == 12 && bm == 12 && rmax == 1 && bmax == 3, || {
        format!("ring {rm} msgs / max {rmax}; bcast {bm} msgs / max {bmax}")
    })?;
    Ok(format!(
        "ring: {rm} messages, max {rmax} per rank per round; broadcast: {bm} messages, max {bmax}"
    ))
}

fn shor_end_to_end() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let report = dir.path().join("shor.json");
    let status = Command::new(env!("CARGO_BIN_EXE_ringdd"))
        .args([
            "verify",
            "--circuit",
            "shor:n=15",
            "--ranks",
            "4",
            "--comm",
            "ring",
            "--swap",
            "v1",
            "--shots",
            "4096",
        ])
        .arg("--report")
        .arg(&report)
        .output()
        .map_err(|e| e.to_string())?;
    ensure(status.status.success(), || {
        format!(
            "exit {:?}: {}",
            status.status.code(),
            String::from_utf8_lossy(&status.stderr)
        )
    })?;
    let text = std::fs::read_to_string(&report).map_err(|e| e.to_string())?;
    let json: serde_json::Value = serde_json::from_str(&text).map_err(|e| e.to_string())?;
    let qubits = json["config"]["qubits"].as_u64().unwrap_or(0);
    let fid = json["fidelity"].as_f64().unwrap_or(0.0);
    let factors = &json["shor"]["factors"];
    let attempts = json["shor"]["attempts"].as_u64().unwrap_or(u64::MAX);
    ensure(qubits == 18, || format!("{qubits} qubits"))?;
    ensure(fid >= FIDELITY_FLOOR, || format!("fidelity {fid}"))?;
    ensure(*factors == serde_json::json!([3, 5]) && attempts <= 10, || {
        format!("factors {factors} after {attempts} attempts")
    })?;
    Ok(format!(
        "{qubits} qubits, fidelity {fid:.12}, factors {factors} after {attempts} attempt(s)"
    ))
}

fn qcbm_end_to_end() -> Outcome {
    let c = gen_qcbm(12, 8, 7).map_err(|e| e.to_string())?;
    let oracle = dense_oracle(&c).map_err(|e| e.to_string())?;
    let mut worst: f64 = 1.0;
    let mut swaps = Vec::new();
    for ranks in [1, 4] {
        let mut per_mode = [0u64; 3];
        for (i, swap) in [SwapMode::None, SwapMode::V1, SwapMode::V2].into_iter().enumerate() {
            let out = run(&c, ranks, Comm::Ring, swap)?;
            let f = fidelity(&out, &oracle);
            ensure(f >= FIDELITY_FLOOR, || format!("P={ranks} {swap:?}: fidelity {f}"))?;
            worst = worst.min(f);
            per_mode[i] = out.total_metrics().swaps_inserted;
        }
        ensure(per_mode[2] <= per_mode[1], || {
            format!("P={ranks}: v2 {} swaps > v1 {}", per_mode[2], per_mode[1])
        })?;
        swaps.push(format!("P={ranks} v1={} v2={}", per_mode[1], per_mode[2]));
    }
    Ok(format!("min fidelity {worst:.12}; swaps {}", swaps.join(", ")))
}

fn random_state(pkg: &mut Package, n: usize, rng: &mut ChaCha8Rng) -> VecEdge {
    let sparsity = rng.gen_range(0.0..0.8);
    let amps: Vec<Complex> = (0..1usize << n)
        .map(|_| {
            if rng.gen_bool(sparsity) {
                Complex::new(0.0, 0.0)
            } else {
                Complex::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
            }
        })
        .collect();
    pkg.from_dense_vec(&amps).expect("power-of-two length")
}

fn wire_round_trip() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut src = Package::new();
    let mut dst = Package::new();
    let mut worst: f64 = 0.0;
    for i in 0..1000 {
        let n = rng.gen_range(1..=10);
        let v = random_state(&mut src, n, &mut rng);
        let bytes = encode(&src, v).map_err(|e| e.to_string())?;
        let back = decode(&mut dst, &bytes).map_err(|e| e.to_string())?;
        let d = max_diff(&src.to_dense_vec(v, n), &dst.to_dense_vec(back, n));
        ensure(d <= WIRE_TOL, || format!("state {i}: {d:e}"))?;
        worst = worst.max(d);
    }
    let golden = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/tests/data/four_node.ddqw");
    let stored = std::fs::read(&golden).map_err(|e| format!("{}: {e}", golden.display()))?;
    let encode_fresh = || {
        let mut pkg = Package::new();
        let h = Complex::new(0.5, 0.0);
        let z = Complex::new(0.0, 0.0);
        let v = pkg.from_dense_vec(&[z, z, h, h, -h, -h, z, z]).expect("dense input");
        encode(&pkg, v).expect("encodable")
    };
    let (a, b) = (encode_fresh(), encode_fresh());
    ensure(a == b && a == stored, || "golden bytes differ".into())?;
    Ok(format!(
        "1000 states, max error {worst:.2e}; golden file ({} bytes) stable",
        stored.len()
    ))
}

fn desk_scale_substitutes() -> Outcome {
    let (none, v1, v2) = top_qubit_pattern()?;
    ensure((none, v1, v2) == (4, 2, 2), || {
        "global-application counters changed".into()
    })?;
    let [(rm, rmax), (bm, bmax)] = single_gate_messages()?;
    ensure((rm, rmax, bm, bmax) == (12, 1, 12, 3), || {
        "message-concentration counters changed".into()
    })?;
    let mut drift: f64 = 0.0;
    for seed in 0..10u64 {
        let c = padded(seed * 5 + 3);
        for k in 0..=c.len() {
            let prefix = Circuit::from_gates(8, c.gates()[..k].to_vec()).map_err(|e| e.to_string())?;
            for comm in [Comm::Ring, Comm::Broadcast] {
                let d = (run(&prefix, 4, comm, SwapMode::V2)?.squared_norm() - 1.0).abs();
                ensure(d <= NORM_TOL, || {
                    format!("norm drift {d:e} after gate {k} of circuit {seed}")
                })?;
                drift = drift.max(d);
            }
        }
    }
    Ok(format!(
        "wall-clock tables not reproduced; substitutes hold: counters 4->2 global, 12 msgs (max 1 vs 3), norm drift {drift:.2e}, rank invariance per criterion 3"
    ))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("fixture amplitudes and node count", fig1_fixture),
        ("single-rank engine vs dense oracle", oracle_equivalence),
        ("rank/schedule/swap invariance", distribution_invariance),
        ("swap planner examples", swap_examples),
        ("communication reduction by swap insertion", communication_reduction),
        ("message accounting", message_accounting),
        ("Shor N=15 end to end", shor_end_to_end),
        ("QCBM 12 qubits end to end", qcbm_end_to_end),
        ("wire format round trip", wire_round_trip),
        ("desk-scale substitutes for timing results", desk_scale_substitutes),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let res = check();
        let secs = t.elapsed().as_secs_f64();
        match res {
            Ok(detail) => println!("PASS criterion {:>2} [{name}] ({secs:.1}s): {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {:>2} [{name}] ({secs:.1}s): {why}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
