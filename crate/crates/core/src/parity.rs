//! Parity superposition states, their preparation circuits, the XOR decode
//! circuit and a minimal OpenQASM 2.0 emitter/reader.

use std::fmt::Write as _;

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::statevector::{BasisOutcome, StateVector, MAX_QUBITS};

/// Largest scheme size handled anywhere (sampled shares keep one bit per qubit).
pub const MAX_PARTICIPANTS: usize = 64;

/// Largest `n` for which the parity basis is listed explicitly.
pub const MAX_ENUMERATED: usize = 24;

/// Number of participants `n` and secret bit `b` of `|C_b⟩`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ParitySpec {
    n: usize,
    b: u8,
}

impl ParitySpec {
    pub fn new(n: usize, b: u8) -> Result<Self> {
        if b > 1 {
            return Err(Error::Argument(format!("secret bit must be 0 or 1, got {b}")));
        }
        if n < 2 {
            return Err(Error::Argument(format!("a parity state needs n >= 2 qubits, got {n}")));
        }
        if n > MAX_PARTICIPANTS {
            return Err(Error::Size(format!(
                "n = {n} exceeds the {MAX_PARTICIPANTS}-participant limit"
            )));
        }
        Ok(Self { n, b })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn b(&self) -> u8 {
        self.b
    }
}

/// `|C_b⟩`: amplitude `1/√(2^(n-1))` on every n-bit string of parity `b`.
pub fn prepare_parity_state_direct(spec: ParitySpec) -> Result<StateVector> {
    if spec.n > MAX_QUBITS {
        return Err(Error::Size(format!(
            "n = {} exceeds the statevector limit of {MAX_QUBITS} qubits",
            spec.n
        )));
    }
    let amp = Complex64::new((0.5f64).powf((spec.n - 1) as f64 / 2.0), 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let amplitudes = (0..1usize << spec.n)
        .map(|i| if (i.count_ones() & 1) as u8 == spec.b { amp } else { zero })
        .collect();
    StateVector::from_amplitudes(amplitudes)
}

/// The `2^(n-1)` bitstrings of parity `b`, ascending.
pub fn enumerate_parity_basis(spec: ParitySpec) -> Result<Vec<BasisOutcome>> {
    if spec.n > MAX_ENUMERATED {
        return Err(Error::Size(format!(
            "refusing to list 2^{} parity strings",
            spec.n - 1
        )));
    }
    Ok((0..1usize << spec.n)
        .filter(|i| (i.count_ones() & 1) as u8 == spec.b)
        .map(|i| BasisOutcome::from_index(i, spec.n))
        .collect())
}

/// Uniform draw from the parity-`b` strings: `n - 1` free bits, the last
/// bit fixes the parity.
pub fn sample_parity_outcome<R: Rng + ?Sized>(spec: ParitySpec, rng: &mut R) -> BasisOutcome {
    let mut bits: Vec<u8> = (0..spec.n - 1).map(|_| rng.random_range(0..=1u8)).collect();
    let partial = bits.iter().fold(0, |acc, &b| acc ^ b);
    bits.push(partial ^ spec.b);
    BasisOutcome::new(bits).expect("bits are binary and non-empty")
}

/// XOR of all measured bits: 0 decodes to white, 1 to black.
pub fn xor_decode_classical(bits: &[u8]) -> Result<u8> {
    if bits.is_empty() {
        return Err(Error::Argument("cannot decode an empty outcome".into()));
    }
    Ok(bits.iter().fold(0, |acc, &b| acc ^ (b & 1)))
}

/// One gate of the supported set; operands are one-based qubit numbers.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Gate {
    H(usize),
    X(usize),
    Z(usize),
    Cnot { control: usize, target: usize },
    Toffoli { c1: usize, c2: usize, target: usize },
}

impl Gate {
    pub fn operands(&self) -> Vec<usize> {
        match *self {
            Gate::H(q) | Gate::X(q) | Gate::Z(q) => vec![q],
            Gate::Cnot { control, target } => vec![control, target],
            Gate::Toffoli { c1, c2, target } => vec![c1, c2, target],
        }
    }

    pub fn opcode(&self) -> &'static str {
        match self {
            Gate::H(_) => "h",
            Gate::X(_) => "x",
            Gate::Z(_) => "z",
            Gate::Cnot { .. } => "cx",
            Gate::Toffoli { .. } => "ccx",
        }
    }

    fn apply(&self, state: &mut StateVector) -> Result<()> {
        match *self {
            Gate::H(q) => state.apply_h(q),
            Gate::X(q) => state.apply_x(q),
            Gate::Z(q) => state.apply_z(q),
            Gate::Cnot { control, target } => state.apply_cnot(control, target),
            Gate::Toffoli { c1, c2, target } => state.apply_toffoli(c1, c2, target),
        }
    }
}

/// Ordered gate list over `num_qubits` qubits.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Circuit {
    num_qubits: usize,
    gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(num_qubits: usize) -> Result<Self> {
        if num_qubits == 0 {
            return Err(Error::Argument("circuit needs at least one qubit".into()));
        }
        Ok(Self {
            num_qubits,
            gates: Vec::new(),
        })
    }

    /// Appends a gate after validating its operands.
    pub fn push(&mut self, gate: Gate) -> Result<&mut Self> {
        let ops = gate.operands();
        for (i, &q) in ops.iter().enumerate() {
            if q == 0 || q > self.num_qubits {
                return Err(Error::Index {
                    qubit: q,
                    num_qubits: self.num_qubits,
                });
            }
            if ops[..i].contains(&q) {
                return Err(Error::Argument(format!(
                    "{} gate repeats qubit {q}",
                    gate.opcode()
                )));
            }
        }
        self.gates.push(gate);
        Ok(self)
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    /// Applies the gates in order to a copy of `initial`.
    pub fn simulate(&self, initial: &StateVector) -> Result<StateVector> {
        if initial.num_qubits() != self.num_qubits {
            return Err(Error::Argument(format!(
                "circuit acts on {} qubits but the register has {}",
                self.num_qubits,
                initial.num_qubits()
            )));
        }
        let mut state = initial.clone();
        for gate in &self.gates {
            gate.apply(&mut state)?;
        }
        Ok(state)
    }

    /// OpenQASM 2.0 text: preamble, `q`/`c` register declarations, then one
    /// gate per line. Qubit `j` is register slot `j - 1`.
    pub fn emit_assembly(&self) -> String {
        let mut out = String::new();
        out.push_str("OPENQASM 2.0;\n");
        out.push_str("include \"qelib1.inc\";\n");
        let _ = writeln!(out, "qreg q[{}];", self.num_qubits);
        let _ = writeln!(out, "creg c[{}];", self.num_qubits);
        for gate in &self.gates {
            let args = gate
                .operands()
                .iter()
                .map(|q| format!("q[{}]", q - 1))
                .collect::<Vec<_>>()
                .join(",");
            let _ = writeln!(out, "{} {};", gate.opcode(), args);
        }
        out
    }

    /// Reads text produced by [`Circuit::emit_assembly`]. Other OpenQASM
    /// constructs are rejected.
    pub fn parse_assembly(text: &str) -> Result<Self> {
        let mut lines: Vec<(usize, &str)> = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i, l.trim()))
            .filter(|(_, l)| !l.is_empty())
            .collect();
        for (k, want) in ["OPENQASM 2.0;", "include \"qelib1.inc\";"].iter().enumerate() {
            match lines.get(k) {
                Some((_, l)) if l == want => {}
                Some((i, l)) => {
                    return Err(Error::format(
                        format!("line {}", i + 1),
                        format!("expected {want:?}, found {l:?}"),
                    ))
                }
                None => return Err(Error::format("end of input", format!("expected {want:?}"))),
            }
        }
        if lines.len() < 4 {
            return Err(Error::format("end of input", "missing register declarations"));
        }
        let mut lines = lines.split_off(2);
        let rest = lines.split_off(2);
        let n = parse_register(lines[0], "qreg q[")?;
        let cn = parse_register(lines[1], "creg c[")?;
        if cn != n {
            return Err(Error::format(
                format!("line {}", lines[1].0 + 1),
                "classical register size differs from quantum register",
            ));
        }

        let mut circuit = Circuit::new(n)?;
        for (i, line) in rest {
            let at = format!("line {}", i + 1);
            let body = line
                .strip_suffix(';')
                .ok_or_else(|| Error::format(&at, "missing ';'"))?;
            let (op, args) = body
                .split_once(' ')
                .ok_or_else(|| Error::format(&at, "missing operands"))?;
            let qubits = args
                .split(',')
                .map(|a| {
                    a.trim()
                        .strip_prefix("q[")
                        .and_then(|a| a.strip_suffix(']'))
                        .and_then(|a| a.parse::<usize>().ok())
                        .map(|slot| slot + 1)
                        .ok_or_else(|| Error::format(&at, format!("bad operand {a:?}")))
                })
                .collect::<Result<Vec<_>>>()?;
            let gate = match (op, qubits.as_slice()) {
                ("h", &[q]) => Gate::H(q),
                ("x", &[q]) => Gate::X(q),
                ("z", &[q]) => Gate::Z(q),
                ("cx", &[control, target]) => Gate::Cnot { control, target },
                ("ccx", &[c1, c2, target]) => Gate::Toffoli { c1, c2, target },
                _ => {
                    return Err(Error::format(
                        &at,
                        format!("unsupported instruction {body:?}"),
                    ))
                }
            };
            circuit
                .push(gate)
                .map_err(|e| Error::format(&at, e.to_string()))?;
        }
        Ok(circuit)
    }
}

fn parse_register((i, line): (usize, &str), prefix: &str) -> Result<usize> {
    line.strip_prefix(prefix)
        .and_then(|r| r.strip_suffix("];"))
        .and_then(|r| r.parse::<usize>().ok())
        .filter(|&n| n > 0)
        .ok_or_else(|| {
            Error::format(
                format!("line {}", i + 1),
                format!("expected register declaration `{prefix}N];`, found {line:?}"),
            )
        })
}

/// `H` on qubits `1..n-1`, CNOT from each of them into qubit `n`, then `X`
/// on qubit `n` when `b = 1`. From `|0…0⟩` this yields `|C_b⟩`.
pub fn build_parity_circuit(spec: ParitySpec) -> Circuit {
    let n = spec.n;
    let mut circuit = Circuit::new(n).expect("n >= 2");
    for q in 1..n {
        circuit.push(Gate::H(q)).expect("operand in range");
    }
    for q in 1..n {
        circuit
            .push(Gate::Cnot { control: q, target: n })
            .expect("operands in range");
    }
    if spec.b == 1 {
        circuit.push(Gate::X(n)).expect("operand in range");
    }
    circuit
}

/// CNOT from every qubit `j < n` into qubit `n`; on a basis input qubit `n`
/// ends up holding the XOR of all input bits.
pub fn build_xor_circuit(n: usize) -> Result<Circuit> {
    if n < 2 {
        return Err(Error::Argument(format!("XOR circuit needs n >= 2, got {n}")));
    }
    let mut circuit = Circuit::new(n)?;
    for q in 1..n {
        circuit.push(Gate::Cnot { control: q, target: n })?;
    }
    Ok(circuit)
}

/// Runs the XOR circuit on basis input `bits` and reads the result qubit.
pub fn xor_decode_quantum(bits: &BasisOutcome) -> Result<u8> {
    let circuit = build_xor_circuit(bits.len())?;
    let out = circuit.simulate(&StateVector::basis(bits)?)?;
    // The output is a basis state; its last qubit carries the parity.
    let (outcome, _) = out
        .support(0.5)
        .into_iter()
        .next()
        .ok_or(Error::StateCorruption { norm_sqr: out.norm_sqr() })?;
    Ok(outcome.bit(bits.len()))
}
