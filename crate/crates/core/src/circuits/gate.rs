use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::CircuitError;
use crate::numerics::{Complex, ONE, ZERO};

/// Base operation of a gate. Controlled variants (CX, CU1, CCX, CSWAP, ...)
/// are a base kind plus a non-empty control list.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GateKind {
    H,
    X,
    Y,
    Z,
    S,
    Sdg,
    T,
    Tdg,
    Rx,
    Ry,
    Rz,
    /// Phase gate `diag(1, e^{iλ})`, a.k.a. U1.
    Phase,
    Swap,
}

impl GateKind {
    pub fn name(self) -> &'static str {
        match self {
            GateKind::H => "h",
            GateKind::X => "x",
            GateKind::Y => "y",
            GateKind::Z => "z",
            GateKind::S => "s",
            GateKind::Sdg => "sdg",
            GateKind::T => "t",
            GateKind::Tdg => "tdg",
            GateKind::Rx => "rx",
            GateKind::Ry => "ry",
            GateKind::Rz => "rz",
            GateKind::Phase => "u1",
            GateKind::Swap => "swap",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "h" => GateKind::H,
            "x" => GateKind::X,
            "y" => GateKind::Y,
            "z" => GateKind::Z,
            "s" => GateKind::S,
            "sdg" => GateKind::Sdg,
            "t" => GateKind::T,
            "tdg" => GateKind::Tdg,
            "rx" => GateKind::Rx,
            "ry" => GateKind::Ry,
            "rz" => GateKind::Rz,
            "u1" | "p" => GateKind::Phase,
            "swap" => GateKind::Swap,
            _ => return None,
        })
    }

    pub fn param_count(self) -> usize {
        match self {
            GateKind::Rx | GateKind::Ry | GateKind::Rz | GateKind::Phase => 1,
            _ => 0,
        }
    }

    pub fn target_count(self) -> usize {
        match self {
            GateKind::Swap => 2,
            _ => 1,
        }
    }

    /// Row-major 2x2 matrix of a single-target kind.
    ///
    /// # Panics
    /// On [`GateKind::Swap`] or a wrong parameter count.
    pub fn matrix(self, params: &[f64]) -> [Complex; 4] {
        let i = Complex::new(0.0, 1.0);
        let h = Complex::new(FRAC_1_SQRT_2, 0.0);
        match self {
            GateKind::H => [h, h, h, -h],
            GateKind::X => [ZERO, ONE, ONE, ZERO],
            GateKind::Y => [ZERO, -i, i, ZERO],
            GateKind::Z => [ONE, ZERO, ZERO, -ONE],
            GateKind::S => [ONE, ZERO, ZERO, i],
            GateKind::Sdg => [ONE, ZERO, ZERO, -i],
            GateKind::T => [ONE, ZERO, ZERO, Complex::new(FRAC_1_SQRT_2, FRAC_1_SQRT_2)],
            GateKind::Tdg => [ONE, ZERO, ZERO, Complex::new(FRAC_1_SQRT_2, -FRAC_1_SQRT_2)],
            GateKind::Rx => {
                let (s, c) = (params[0] / 2.0).sin_cos();
                [
                    Complex::new(c, 0.0),
                    Complex::new(0.0, -s),
                    Complex::new(0.0, -s),
                    Complex::new(c, 0.0),
                ]
            }
            GateKind::Ry => {
                let (s, c) = (params[0] / 2.0).sin_cos();
                [
                    Complex::new(c, 0.0),
                    Complex::new(-s, 0.0),
                    Complex::new(s, 0.0),
                    Complex::new(c, 0.0),
                ]
            }
            GateKind::Rz => {
                let half = params[0] / 2.0;
                [
                    Complex::from_polar(1.0, -half),
                    ZERO,
                    ZERO,
                    Complex::from_polar(1.0, half),
                ]
            }
            GateKind::Phase => [ONE, ZERO, ZERO, Complex::from_polar(1.0, params[0])],
            GateKind::Swap => panic!("swap has no 2x2 matrix"),
        }
    }
}

/// One gate application on logical (or, after remapping, physical) qubits.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Gate {
    pub kind: GateKind,
    pub params: Vec<f64>,
    pub targets: Vec<usize>,
    pub controls: Vec<usize>,
}

impl Gate {
    pub fn new(kind: GateKind, params: Vec<f64>, targets: Vec<usize>, controls: Vec<usize>) -> Self {
        Self {
            kind,
            params,
            targets,
            controls,
        }
    }

    pub fn single(kind: GateKind, q: usize) -> Self {
        Self::new(kind, vec![], vec![q], vec![])
    }

    pub fn h(q: usize) -> Self {
        Self::single(GateKind::H, q)
    }

    pub fn x(q: usize) -> Self {
        Self::single(GateKind::X, q)
    }

    pub fn rx(theta: f64, q: usize) -> Self {
        Self::new(GateKind::Rx, vec![theta], vec![q], vec![])
    }

    pub fn rz(theta: f64, q: usize) -> Self {
        Self::new(GateKind::Rz, vec![theta], vec![q], vec![])
    }

    pub fn phase(lambda: f64, q: usize) -> Self {
        Self::new(GateKind::Phase, vec![lambda], vec![q], vec![])
    }

    pub fn cx(control: usize, target: usize) -> Self {
        Self::new(GateKind::X, vec![], vec![target], vec![control])
    }

    pub fn ccx(c1: usize, c2: usize, target: usize) -> Self {
        Self::new(GateKind::X, vec![], vec![target], vec![c1, c2])
    }

    /// Phase gate with any number of controls.
    pub fn mcphase(lambda: f64, controls: Vec<usize>, target: usize) -> Self {
        Self::new(GateKind::Phase, vec![lambda], vec![target], controls)
    }

    pub fn swap(a: usize, b: usize) -> Self {
        Self::new(GateKind::Swap, vec![], vec![a, b], vec![])
    }

    pub fn cswap(control: usize, a: usize, b: usize) -> Self {
        Self::new(GateKind::Swap, vec![], vec![a, b], vec![control])
    }

    /// Touched qubits, targets first then controls, each in declaration order.
    pub fn qubits(&self) -> impl Iterator<Item = usize> + '_ {
        self.targets.iter().chain(&self.controls).copied()
    }

    /// The inverse gate.
    pub fn inverse(&self) -> Gate {
        let kind = match self.kind {
            GateKind::S => GateKind::Sdg,
            GateKind::Sdg => GateKind::S,
            GateKind::T => GateKind::Tdg,
            GateKind::Tdg => GateKind::T,
            k => k,
        };
        Gate {
            kind,
            params: self.params.iter().map(|p| -p).collect(),
            targets: self.targets.clone(),
            controls: self.controls.clone(),
        }
    }

    /// Same gate with every qubit index passed through `map`.
    pub fn mapped(&self, map: impl Fn(usize) -> usize) -> Gate {
        Gate {
            kind: self.kind,
            params: self.params.clone(),
            targets: self.targets.iter().map(|&q| map(q)).collect(),
            controls: self.controls.iter().map(|&q| map(q)).collect(),
        }
    }

    /// Checks parameter/target counts, index range and disjointness.
    pub fn validate(&self, width: usize) -> Result<(), CircuitError> {
        if self.params.len() != self.kind.param_count() {
            return Err(CircuitError::ParamCount {
                kind: self.kind.name(),
                expected: self.kind.param_count(),
                found: self.params.len(),
            });
        }
        if self.targets.len() != self.kind.target_count() {
            return Err(CircuitError::TargetCount {
                kind: self.kind.name(),
                expected: self.kind.target_count(),
                found: self.targets.len(),
            });
        }
        let mut seen = Vec::with_capacity(self.targets.len() + self.controls.len());
        for q in self.qubits() {
            if q >= width {
                return Err(CircuitError::QubitOutOfRange { qubit: q, width });
            }
            if seen.contains(&q) {
                return Err(CircuitError::DuplicateQubit(q));
            }
            seen.push(q);
        }
        if let Some(p) = self.params.iter().find(|p| !p.is_finite()) {
            return Err(CircuitError::Argument(format!("non-finite angle {p}")));
        }
        Ok(())
    }
}

impl fmt::Display for Gate {
    /// OpenQASM 2 statement without the trailing newline, register `q`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for _ in &self.controls {
            f.write_str("c")?;
        }
        f.write_str(self.kind.name())?;
        if !self.params.is_empty() {
            let ps: Vec<String> = self.params.iter().map(|p| format!("{p:?}")).collect();
            write!(f, "({})", ps.join(","))?;
        }
        let args: Vec<String> = self
            .controls
            .iter()
            .chain(&self.targets)
            .map(|q| format!("q[{q}]"))
            .collect();
        write!(f, " {};", args.join(","))
    }
}

/// Ordered gate list over a fixed register width.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    n_qubits: usize,
    gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(n_qubits: usize) -> Self {
        Self {
            n_qubits,
            gates: Vec::new(),
        }
    }

    pub fn from_gates(n_qubits: usize, gates: Vec<Gate>) -> Result<Self, CircuitError> {
        let mut c = Self::new(n_qubits);
        for g in gates {
            c.push(g)?;
        }
        Ok(c)
    }

    pub fn push(&mut self, gate: Gate) -> Result<(), CircuitError> {
        gate.validate(self.n_qubits)?;
        self.gates.push(gate);
        Ok(())
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    /// Same gates on a wider register, logical qubit `q` moved to `map[q]`.
    pub fn embed(&self, width: usize, map: &[usize]) -> Result<Circuit, CircuitError> {
        if map.len() != self.n_qubits {
            return Err(CircuitError::Argument(format!(
                "embedding maps {} qubits, circuit has {}",
                map.len(),
                self.n_qubits
            )));
        }
        Circuit::from_gates(width, self.gates.iter().map(|g| g.mapped(|q| map[q])).collect())
    }
}
