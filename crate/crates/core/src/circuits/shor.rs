//! Order-finding circuit for Shor's algorithm on `4n + 2` qubits, `n` the
//! bit length of the number to factor.
//!
//! Qubit map (qubit 0 is the least significant):
//!
//! | qubits            | register                                  |
//! |-------------------|-------------------------------------------|
//! | `0 .. 2n`         | counting register                         |
//! | `2n .. 3n`        | work register `x`, starts at `|1⟩`        |
//! | `3n .. 4n+1`      | Fourier-space accumulator `b` (n+1 bits)  |
//! | `4n+1`            | overflow ancilla                          |
//!
//! Modular exponentiation uses controlled modular multipliers built from
//! Fourier-space adders. The final inverse QFT leaves bit `k` of the phase
//! estimate on counting qubit `2n-1-k`; [`counting_value`] undoes that.

use std::f64::consts::PI;

use super::{Circuit, Gate};
use crate::error::CircuitError;

/// Bit length of `n`.
pub fn bit_length(n: u64) -> usize {
    (u64::BITS - n.leading_zeros()) as usize
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn mod_inverse(a: u64, m: u64) -> Option<u64> {
    let (mut old_r, mut r) = (a as i128, m as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    (old_r == 1).then(|| old_s.rem_euclid(m as i128) as u64)
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    (a as u128 * b as u128 % m as u128) as u64
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

fn is_prime_power(n: u64) -> bool {
    let mut p = 2;
    while p * p <= n {
        if n.is_multiple_of(p) {
            let mut m = n;
            while m.is_multiple_of(p) {
                m /= p;
            }
            return m == 1;
        }
        p += 1;
    }
    // n itself is prime
    n >= 2
}

/// Checks that `n` can be factored by order finding: odd, composite and not
/// a prime power.
pub fn validate_modulus(n: u64) -> Result<(), CircuitError> {
    if n < 15 || n.is_multiple_of(2) {
        return Err(CircuitError::Argument(format!("{n} must be odd and at least 15")));
    }
    if is_prime(n) {
        return Err(CircuitError::Argument(format!("{n} is prime")));
    }
    if is_prime_power(n) {
        return Err(CircuitError::Argument(format!("{n} is a prime power")));
    }
    if bit_length(n) > 15 {
        return Err(CircuitError::Argument(format!(
            "{n} is too large for a circuit register"
        )));
    }
    Ok(())
}

/// Smallest base `a >= 2` coprime to `n`.
pub fn default_base(n: u64) -> u64 {
    (2..n).find(|&a| gcd(a, n) == 1).unwrap_or(2)
}

/// Maps a full basis-state index of a [`gen_shor`] circuit to the phase
/// estimate `y` read from its `2n` counting qubits.
pub fn counting_value(modulus_bits: usize, index: u64) -> u64 {
    let t = 2 * modulus_bits;
    let raw = index & ((1u64 << t) - 1);
    (0..t).fold(0, |y, k| y | ((raw >> (t - 1 - k)) & 1) << k)
}

struct Layout {
    n: usize,
}

impl Layout {
    fn up(&self, k: usize) -> usize {
        k
    }
    fn x(&self, i: usize) -> usize {
        2 * self.n + i
    }
    fn b(&self, j: usize) -> usize {
        3 * self.n + j
    }
    fn b_reg(&self) -> Vec<usize> {
        (0..=self.n).map(|j| self.b(j)).collect()
    }
    fn anc(&self) -> usize {
        4 * self.n + 1
    }
}

/// Fourier transform without output reversal: afterwards `reg[j]` carries
/// the phase `2π·v / 2^(j+1)` of the input value `v`.
pub(crate) fn qft(reg: &[usize]) -> Vec<Gate> {
    let mut out = Vec::new();
    for j in (0..reg.len()).rev() {
        out.push(Gate::h(reg[j]));
        for l in (0..j).rev() {
            out.push(Gate::mcphase(PI / (1u64 << (j - l)) as f64, vec![reg[l]], reg[j]));
        }
    }
    out
}

pub(crate) fn inverse(gates: &[Gate]) -> Vec<Gate> {
    gates.iter().rev().map(Gate::inverse).collect()
}

/// Adds the constant `value` to the Fourier-space register `reg`.
fn phi_add(reg: &[usize], value: u64, controls: &[usize]) -> Vec<Gate> {
    let mut out = Vec::new();
    for (j, &q) in reg.iter().enumerate() {
        let modulus = 1u64 << (j + 1);
        let v = value % modulus;
        if v != 0 {
            let angle = 2.0 * PI * v as f64 / modulus as f64;
            out.push(Gate::mcphase(angle, controls.to_vec(), q));
        }
    }
    out
}

/// Doubly-controlled `b <- (b + a) mod N` on Fourier-space `b < N`.
fn cc_add_mod(l: &Layout, a: u64, modulus: u64, c1: usize, c2: usize) -> Vec<Gate> {
    let b = l.b_reg();
    let top = l.b(l.n);
    let anc = l.anc();
    let mut out = Vec::new();
    out.extend(phi_add(&b, a, &[c1, c2]));
    out.extend(inverse(&phi_add(&b, modulus, &[])));
    out.extend(inverse(&qft(&b)));
    out.push(Gate::cx(top, anc));
    out.extend(qft(&b));
    out.extend(phi_add(&b, modulus, &[anc]));
    out.extend(inverse(&phi_add(&b, a, &[c1, c2])));
    out.extend(inverse(&qft(&b)));
    out.push(Gate::x(top));
    out.push(Gate::cx(top, anc));
    out.push(Gate::x(top));
    out.extend(qft(&b));
    out.extend(phi_add(&b, a, &[c1, c2]));
    out
}

/// Controlled `b <- (b + a·x) mod N`.
fn c_mult(l: &Layout, a: u64, modulus: u64, control: usize) -> Vec<Gate> {
    let b = l.b_reg();
    let mut out = qft(&b);
    let mut term = a % modulus;
    for i in 0..l.n {
        out.extend(cc_add_mod(l, term, modulus, control, l.x(i)));
        term = mul_mod(term, 2, modulus);
    }
    out.extend(inverse(&qft(&b)));
    out
}

/// Controlled in-place `x <- a·x mod N`, leaving `b` at zero.
fn c_ua(l: &Layout, a: u64, modulus: u64, control: usize) -> Vec<Gate> {
    let a_inv = mod_inverse(a, modulus).expect("base is coprime to the modulus");
    let mut out = c_mult(l, a, modulus, control);
    for i in 0..l.n {
        out.push(Gate::cswap(control, l.x(i), l.b(i)));
    }
    out.extend(inverse(&c_mult(l, a_inv, modulus, control)));
    out
}

/// Order-finding circuit for `base` modulo `modulus` on
/// `4·bit_length(modulus) + 2` qubits.
pub fn gen_shor(modulus: u64, base: u64) -> Result<Circuit, CircuitError> {
    validate_modulus(modulus)?;
    if base < 2 || base >= modulus {
        return Err(CircuitError::Argument(format!(
            "base {base} must lie in [2, {modulus})"
        )));
    }
    if gcd(base, modulus) != 1 {
        return Err(CircuitError::Argument(format!(
            "base {base} shares the factor {} with {modulus}",
            gcd(base, modulus)
        )));
    }
    let n = bit_length(modulus);
    let l = Layout { n };
    let t = 2 * n;
    let mut gates = Vec::new();
    gates.push(Gate::x(l.x(0)));
    for k in 0..t {
        gates.push(Gate::h(l.up(k)));
    }
    let mut a = base;
    for k in 0..t {
        gates.extend(c_ua(&l, a, modulus, l.up(k)));
        a = mul_mod(a, a, modulus);
    }
    let reversed: Vec<usize> = (0..t).rev().map(|k| l.up(k)).collect();
    gates.extend(inverse(&qft(&reversed)));
    Circuit::from_gates(4 * n + 2, gates)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_theory_helpers() {
        assert_eq!(bit_length(15), 4);
        assert_eq!(bit_length(511), 9);
        assert_eq!(mod_inverse(7, 15), Some(13));
        assert_eq!(mod_inverse(5, 15), None);
        assert_eq!(default_base(15), 2);
        assert_eq!(default_base(21), 2);
        assert!(is_prime_power(27));
        assert!(!is_prime_power(21));
        assert_eq!(counting_value(2, 0b0001), 0b1000);
        assert_eq!(counting_value(2, 0b1_0110), 0b0110);
    }

    #[test]
    fn widths() {
        assert_eq!(gen_shor(15, 2).unwrap().n_qubits(), 18);
        assert_eq!(gen_shor(57, 2).unwrap().n_qubits(), 26);
    }

    #[test]
    fn rejects_bad_inputs() {
        for (n, a) in [(16, 3), (13, 2), (9, 2), (25, 2), (15, 5), (15, 1), (15, 15), (1, 2)] {
            assert!(gen_shor(n, a).is_err(), "accepted N={n} a={a}");
        }
    }

    #[test]
    fn deterministic() {
        assert_eq!(gen_shor(21, 5).unwrap(), gen_shor(21, 5).unwrap());
    }
}
