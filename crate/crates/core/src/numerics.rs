//! Canonical complex edge weights.
//!
//! Every weight stored inside a decision-diagram node passes through a
//! [`ComplexTable`], which snaps values that agree within a tolerance onto a
//! single stored representative. Structural equality of nodes can then be
//! decided by bit comparison of their weights.

use num_complex::Complex64;
use rustc_hash::FxHashMap;

use crate::error::NumericError;

/// Complex amplitude / edge weight.
pub type Complex = Complex64;

/// Exact zero.
pub const ZERO: Complex = Complex::new(0.0, 0.0);
/// Exact one.
pub const ONE: Complex = Complex::new(1.0, 0.0);

/// Default per-component interning tolerance.
pub const DEFAULT_TOLERANCE: f64 = 1e-12;

/// True iff both components of `a` and `b` differ by less than `tol`.
#[inline]
pub fn approx_equal(a: Complex, b: Complex, tol: f64) -> bool {
    (a.re - b.re).abs() < tol && (a.im - b.im).abs() < tol
}

#[inline]
pub(crate) fn approx_zero(a: Complex, tol: f64) -> bool {
    a.re.abs() < tol && a.im.abs() < tol
}

/// Bit pattern of a complex value, used for hashing canonical weights.
#[inline]
pub(crate) fn bits(c: Complex) -> (u64, u64) {
    (c.re.to_bits(), c.im.to_bits())
}

/// Tolerance-based interning table for complex values.
///
/// Values are bucketed on their components quantized by the tolerance, so a
/// value within tolerance of a stored one lives in the same or an adjacent
/// bucket. When several stored values qualify, the one stored first wins.
#[derive(Debug, Clone)]
pub struct ComplexTable {
    tolerance: f64,
    values: Vec<Complex>,
    buckets: FxHashMap<(i64, i64), Vec<u32>>,
}

impl Default for ComplexTable {
    fn default() -> Self {
        Self::new(DEFAULT_TOLERANCE)
    }
}

impl ComplexTable {
    pub fn new(tolerance: f64) -> Self {
        assert!(tolerance > 0.0 && tolerance.is_finite(), "tolerance must be positive");
        let mut table = Self {
            tolerance,
            values: Vec::new(),
            buckets: FxHashMap::default(),
        };
        table.store(ZERO);
        table.store(ONE);
        table
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    /// Number of distinct stored values (including the two constants).
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    #[inline]
    fn key(&self, c: Complex) -> (i64, i64) {
        // `as` saturates for out-of-range floats, which only merges far-away
        // buckets and never breaks the within-tolerance search.
        (
            (c.re / self.tolerance).floor() as i64,
            (c.im / self.tolerance).floor() as i64,
        )
    }

    fn store(&mut self, c: Complex) -> Complex {
        // -0.0 and 0.0 hash differently; keep a single sign for zero components.
        let c = Complex::new(c.re + 0.0, c.im + 0.0);
        let id = self.values.len() as u32;
        self.values.push(c);
        let key = self.key(c);
        self.buckets.entry(key).or_default().push(id);
        c
    }

    fn find(&self, c: Complex) -> Option<Complex> {
        let (kr, ki) = self.key(c);
        let mut best: Option<u32> = None;
        for dr in -1..=1i64 {
            for di in -1..=1i64 {
                let Some(ids) = self.buckets.get(&(kr.saturating_add(dr), ki.saturating_add(di))) else {
                    continue;
                };
                for &id in ids {
                    if approx_equal(self.values[id as usize], c, self.tolerance) && best.is_none_or(|b| id < b) {
                        best = Some(id);
                    }
                }
            }
        }
        best.map(|id| self.values[id as usize])
    }

    /// Returns the canonical stored value for `(re, im)`.
    pub fn intern(&mut self, re: f64, im: f64) -> Result<Complex, NumericError> {
        if !re.is_finite() || !im.is_finite() {
            return Err(NumericError::NonFinite { re, im });
        }
        Ok(self.intern_value(Complex::new(re, im)))
    }

    /// Interning for values already known to be finite.
    #[inline]
    pub(crate) fn intern_value(&mut self, c: Complex) -> Complex {
        debug_assert!(c.re.is_finite() && c.im.is_finite(), "non-finite weight {c}");
        if approx_zero(c, self.tolerance) {
            return ZERO;
        }
        if approx_equal(c, ONE, self.tolerance) {
            return ONE;
        }
        match self.find(c) {
            Some(v) => v,
            None => self.store(c),
        }
    }

    /// Drops every stored value and re-stores `live` in order.
    ///
    /// The stored values are re-inserted exactly; since no two stored values
    /// are within tolerance of each other, each comes back as itself.
    pub(crate) fn rebuild<I: IntoIterator<Item = Complex>>(&mut self, live: I) {
        self.values.clear();
        self.buckets.clear();
        self.store(ZERO);
        self.store(ONE);
        for c in live {
            if self.find(c).is_none() {
                self.store(c);
            }
        }
    }
}
