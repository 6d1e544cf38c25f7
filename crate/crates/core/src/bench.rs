//! Verification and reporting helpers: a dense reference simulator,
//! fidelity against it, classical post-processing for order finding, and the
//! JSON run report.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::circuits::shor::{bit_length, counting_value, default_base, gcd};
use crate::circuits::{gen_qcbm, gen_shor, Circuit, Gate, GateKind};
use crate::engine::RunOutcome;
use crate::error::CircuitError;
use crate::numerics::Complex;
use crate::transport::CommMetrics;

/// Largest width the dense oracle accepts.
pub const ORACLE_MAX_QUBITS: usize = 24;

pub const REPORT_SCHEMA_VERSION: u32 = 1;

fn c(re: f64, im: f64) -> Complex {
    Complex::new(re, im)
}

/// Row-major 2x2 unitary of a single-target kind, written out independently
/// of the diagram builder.
fn oracle_matrix(kind: GateKind, params: &[f64]) -> [Complex; 4] {
    let r = 0.5f64.sqrt();
    match kind {
        GateKind::H => [c(r, 0.), c(r, 0.), c(r, 0.), c(-r, 0.)],
        GateKind::X => [c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)],
        GateKind::Y => [c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)],
        GateKind::Z => [c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)],
        GateKind::S => [c(1., 0.), c(0., 0.), c(0., 0.), c(0., 1.)],
        GateKind::Sdg => [c(1., 0.), c(0., 0.), c(0., 0.), c(0., -1.)],
        GateKind::T => [c(1., 0.), c(0., 0.), c(0., 0.), c(r, r)],
        GateKind::Tdg => [c(1., 0.), c(0., 0.), c(0., 0.), c(r, -r)],
        GateKind::Rx => {
            let t = params[0] / 2.0;
            [c(t.cos(), 0.), c(0., -t.sin()), c(0., -t.sin()), c(t.cos(), 0.)]
        }
        GateKind::Ry => {
            let t = params[0] / 2.0;
            [c(t.cos(), 0.), c(-t.sin(), 0.), c(t.sin(), 0.), c(t.cos(), 0.)]
        }
        GateKind::Rz => {
            let t = params[0] / 2.0;
            [c(t.cos(), -t.sin()), c(0., 0.), c(0., 0.), c(t.cos(), t.sin())]
        }
        GateKind::Phase => [c(1., 0.), c(0., 0.), c(0., 0.), c(params[0].cos(), params[0].sin())],
        GateKind::Swap => unreachable!("swap is a permutation"),
    }
}

/// Applies one gate to a dense state in place.
pub fn dense_apply(state: &mut [Complex], gate: &Gate) {
    let cmask: usize = gate.controls.iter().map(|&q| 1usize << q).sum();
    if gate.kind == GateKind::Swap {
        let (a, b) = (1usize << gate.targets[0], 1usize << gate.targets[1]);
        for i in 0..state.len() {
            if i & cmask == cmask && i & a != 0 && i & b == 0 {
                state.swap(i, i ^ a ^ b);
            }
        }
        return;
    }
    let u = oracle_matrix(gate.kind, &gate.params);
    let t = 1usize << gate.targets[0];
    for i in 0..state.len() {
        if i & t == 0 && i & cmask == cmask {
            let (a0, a1) = (state[i], state[i | t]);
            state[i] = u[0] * a0 + u[1] * a1;
            state[i | t] = u[2] * a0 + u[3] * a1;
        }
    }
}

/// Gate-by-gate dense simulation from `|0…0⟩`; index bit `q` is qubit `q`.
pub fn dense_oracle(circuit: &Circuit) -> Result<Vec<Complex>, CircuitError> {
    let n = circuit.n_qubits();
    if n > ORACLE_MAX_QUBITS {
        return Err(CircuitError::Argument(format!(
            "dense oracle is limited to {ORACLE_MAX_QUBITS} qubits, circuit has {n}"
        )));
    }
    let mut state = vec![Complex::new(0.0, 0.0); 1 << n];
    state[0] = Complex::new(1.0, 0.0);
    for g in circuit.gates() {
        dense_apply(&mut state, g);
    }
    Ok(state)
}

/// `|⟨a|b⟩|²`.
pub fn overlap(a: &[Complex], b: &[Complex]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum::<Complex>().norm_sqr()
}

/// Fidelity of a distributed result against a dense reference.
pub fn fidelity(outcome: &RunOutcome, oracle: &[Complex]) -> f64 {
    overlap(oracle, &outcome.to_dense_logical())
}

fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1u64 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = (r as u128 * b as u128 % m as u128) as u64;
        }
        b = (b as u128 * b as u128 % m as u128) as u64;
        e >>= 1;
    }
    r
}

/// Non-trivial factors from a period `r` of `base` mod `n`, if `r` is even
/// and `base^(r/2) ≢ -1`.
pub fn factors_from_period(n: u64, base: u64, r: u64) -> Option<(u64, u64)> {
    if r == 0 || r % 2 == 1 || pow_mod(base, r, n) != 1 {
        return None;
    }
    let h = pow_mod(base, r / 2, n);
    if h == n - 1 {
        return None;
    }
    for f in [gcd(h + 1, n), gcd(h + n - 1, n)] {
        if f > 1 && f < n {
            let (p, q) = (f, n / f);
            return Some((p.min(q), p.max(q)));
        }
    }
    None
}

/// Denominators of the continued-fraction convergents of `y / 2^t`.
fn convergent_denominators(y: u64, t: usize) -> Vec<u64> {
    let (mut num, mut den) = (y as u128, 1u128 << t);
    let (mut q_prev, mut q) = (1u128, 0u128);
    let mut out = Vec::new();
    while den != 0 {
        let a = num / den;
        (num, den) = (den, num - a * den);
        let next = a * q + q_prev;
        (q_prev, q) = (q, next);
        if q > 1 {
            out.push(q as u64);
        }
    }
    out
}

/// Smallest period of `base` mod `n` suggested by the phase estimate `y`
/// over `t` bits, trying small multiples of each convergent denominator.
pub fn period_from_measurement(y: u64, t: usize, n: u64, base: u64) -> Option<u64> {
    if y == 0 {
        return None;
    }
    for d in convergent_denominators(y, t) {
        if d >= n {
            break;
        }
        let mut r = d;
        while r < n {
            if pow_mod(base, r, n) == 1 {
                return Some(r);
            }
            r += d;
        }
    }
    None
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShorOutcome {
    pub factors: Option<(u64, u64)>,
    pub period: Option<u64>,
    pub attempts: usize,
}

/// Tries the most frequent outcomes of an order-finding run (histogram
/// over full logical indices) until factors appear or `max_attempts`
/// outcomes have been used.
pub fn shor_postprocess(hist: &BTreeMap<u64, u64>, n: u64, base: u64, max_attempts: usize) -> ShorOutcome {
    let bits = bit_length(n);
    let mut counted: BTreeMap<u64, u64> = BTreeMap::new();
    for (&idx, &k) in hist {
        *counted.entry(counting_value(bits, idx)).or_insert(0) += k;
    }
    let mut ranked: Vec<(u64, u64)> = counted.into_iter().collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    let mut attempts = 0;
    for &(y, _) in ranked.iter().take(max_attempts) {
        attempts += 1;
        if let Some(r) = period_from_measurement(y, 2 * bits, n, base) {
            if let Some(f) = factors_from_period(n, base, r) {
                return ShorOutcome {
                    factors: Some(f),
                    period: Some(r),
                    attempts,
                };
            }
        }
    }
    ShorOutcome {
        factors: None,
        period: None,
        attempts,
    }
}

/// Generated-circuit description such as `shor:n=15,a=7` or
/// `qcbm:q=12,layers=8,seed=3`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CircuitSpec {
    Shor {
        n: u64,
        a: Option<u64>,
    },
    Qcbm {
        qubits: usize,
        layers: usize,
        seed: Option<u64>,
    },
}

impl CircuitSpec {
    /// Builds the circuit; `seed` applies when the spec carries none.
    pub fn build(&self, seed: u64) -> Result<Circuit, CircuitError> {
        match *self {
            CircuitSpec::Shor { n, a } => gen_shor(n, a.unwrap_or_else(|| default_base(n))),
            CircuitSpec::Qcbm {
                qubits,
                layers,
                seed: s,
            } => gen_qcbm(qubits, layers, s.unwrap_or(seed)),
        }
    }

    /// `(modulus, base)` for order-finding specs.
    pub fn shor_params(&self) -> Option<(u64, u64)> {
        match *self {
            CircuitSpec::Shor { n, a } => Some((n, a.unwrap_or_else(|| default_base(n)))),
            _ => None,
        }
    }
}

impl fmt::Display for CircuitSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CircuitSpec::Shor { n, a } => {
                write!(f, "shor:n={n}")?;
                if let Some(a) = a {
                    write!(f, ",a={a}")?;
                }
                Ok(())
            }
            CircuitSpec::Qcbm { qubits, layers, seed } => {
                write!(f, "qcbm:q={qubits},layers={layers}")?;
                if let Some(s) = seed {
                    write!(f, ",seed={s}")?;
                }
                Ok(())
            }
        }
    }
}

impl FromStr for CircuitSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (family, rest) = s
            .split_once(':')
            .ok_or_else(|| format!("expected FAMILY:key=value,..., got `{s}`"))?;
        let mut kv = BTreeMap::new();
        for item in rest.split(',').filter(|i| !i.is_empty()) {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| format!("expected key=value, got `{item}`"))?;
            let v: u64 = v
                .trim()
                .parse()
                .map_err(|_| format!("`{k}` needs a non-negative integer, got `{v}`"))?;
            if kv.insert(k.trim().to_string(), v).is_some() {
                return Err(format!("`{k}` given twice"));
            }
        }
        let allowed: &[&str] = match family {
            "shor" => &["n", "a"],
            "qcbm" => &["q", "layers", "seed"],
            _ => return Err(format!("unknown circuit family `{family}` (expected shor or qcbm)")),
        };
        if let Some(k) = kv.keys().find(|k| !allowed.contains(&k.as_str())) {
            return Err(format!("unknown key `{k}` for {family}"));
        }
        let need = |k: &str| kv.get(k).copied().ok_or_else(|| format!("{family} needs `{k}=`"));
        Ok(match family {
            "shor" => CircuitSpec::Shor {
                n: need("n")?,
                a: kv.get("a").copied(),
            },
            _ => CircuitSpec::Qcbm {
                qubits: need("q")? as usize,
                layers: need("layers")? as usize,
                seed: kv.get("seed").copied(),
            },
        })
    }
}

/// Echo of the run configuration inside a report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportConfig {
    pub circuit: String,
    pub qubits: usize,
    pub gates: usize,
    pub ranks: usize,
    pub comm: crate::engine::Comm,
    pub swap: crate::engine::SwapMode,
    pub transport: crate::engine::TransportKind,
    pub seed: u64,
    pub shots: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShorReport {
    pub modulus: u64,
    pub base: u64,
    pub factors: Option<(u64, u64)>,
    pub period: Option<u64>,
    pub attempts: usize,
}

/// JSON run report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub config: ReportConfig,
    /// Seconds per phase.
    pub wall_time: BTreeMap<String, f64>,
    pub ranks: Vec<CommMetrics>,
    pub totals: CommMetrics,
    pub final_layout: Vec<usize>,
    pub squared_norm: f64,
    pub fidelity: Option<f64>,
    /// Outcome counts keyed by logical bitstring, highest qubit first.
    pub histogram: Option<BTreeMap<String, u64>>,
    pub shor: Option<ShorReport>,
}

/// Bitstring of a logical index, highest qubit first.
pub fn bitstring(index: u64, n_qubits: usize) -> String {
    (0..n_qubits)
        .rev()
        .map(|q| if index >> q & 1 == 1 { '1' } else { '0' })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn oracle_basics() {
        let mut c = Circuit::new(1);
        c.push(Gate::h(0)).unwrap();
        let s = dense_oracle(&c).unwrap();
        assert!((s[0].re - 0.5f64.sqrt()).abs() < 1e-15 && (s[1].re - 0.5f64.sqrt()).abs() < 1e-15);

        let c = Circuit::from_gates(2, vec![Gate::h(1), Gate::cx(0, 1)]).unwrap();
        let s = dense_oracle(&c).unwrap();
        // control qubit 0 is never set, so the state stays (|00⟩+|10⟩)/√2
        assert!((s[2].re - 0.5f64.sqrt()).abs() < 1e-15);
        let c = Circuit::from_gates(2, vec![Gate::h(1), Gate::cx(1, 0)]).unwrap();
        let s = dense_oracle(&c).unwrap();
        assert!((s[0].re - 0.5f64.sqrt()).abs() < 1e-15 && (s[3].re - 0.5f64.sqrt()).abs() < 1e-15);
        assert!(dense_oracle(&Circuit::new(25)).is_err());
    }

    #[test]
    fn overlaps() {
        let a = [c(1., 0.), c(0., 0.)];
        let b = [c(0., 0.), c(1., 0.)];
        assert_eq!(overlap(&a, &a), 1.0);
        assert_eq!(overlap(&a, &b), 0.0);
    }

    #[test]
    fn factors_from_known_periods() {
        assert_eq!(factors_from_period(15, 7, 4), Some((3, 5)));
        assert_eq!(factors_from_period(21, 2, 6), Some((3, 7)));
        assert_eq!(factors_from_period(15, 2, 3), None);
        assert_eq!(factors_from_period(15, 14, 2), None);
    }

    #[test]
    fn measurement_to_period() {
        // y/2^8 = 1/4, 3/4 → r = 4; 2/4 → denominator 2, multiple 4 works
        assert_eq!(period_from_measurement(64, 8, 15, 2), Some(4));
        assert_eq!(period_from_measurement(192, 8, 15, 2), Some(4));
        assert_eq!(period_from_measurement(128, 8, 15, 2), Some(4));
        assert_eq!(period_from_measurement(0, 8, 15, 2), None);
    }

    #[test]
    fn postprocess_histogram() {
        // counting value y sits bit-reversed on the counting qubits
        let to_index = |y: u64| counting_value(4, y);
        let mut hist = BTreeMap::new();
        hist.insert(to_index(0), 500);
        hist.insert(to_index(64), 300);
        let out = shor_postprocess(&hist, 15, 2, 10);
        assert_eq!(out.factors, Some((3, 5)));
        assert_eq!(out.attempts, 2);
        let only_zero: BTreeMap<u64, u64> = [(0, 10)].into_iter().collect();
        assert_eq!(shor_postprocess(&only_zero, 15, 2, 10).factors, None);
    }

    #[test]
    fn circuit_specs() {
        let s: CircuitSpec = "shor:n=15".parse().unwrap();
        assert_eq!(s, CircuitSpec::Shor { n: 15, a: None });
        assert_eq!(s.shor_params(), Some((15, 2)));
        let q: CircuitSpec = "qcbm:q=12,layers=8".parse().unwrap();
        assert_eq!(q.to_string(), "qcbm:q=12,layers=8");
        assert_eq!(q.build(1).unwrap().n_qubits(), 12);
        for bad in [
            "shor",
            "shor:a=2",
            "qcbm:q=3",
            "foo:n=1",
            "shor:n=x",
            "shor:n=15,b=2",
            "shor:n=15,n=21",
        ] {
            assert!(bad.parse::<CircuitSpec>().is_err(), "{bad}");
        }
    }

    #[test]
    fn bitstrings() {
        assert_eq!(bitstring(0b101, 4), "0101");
    }
}
