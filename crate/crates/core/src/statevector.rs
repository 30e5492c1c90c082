//! Dense statevector simulation of small qubit registers.
//!
//! Amplitudes are stored big-endian: qubit 1 is the most significant bit of
//! the basis index, so index `0b011` of a 3-qubit register is `|011⟩` with
//! qubit 1 in state 0. Gates update amplitude pairs in place.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};

/// Largest register the engine will allocate.
pub const MAX_QUBITS: usize = 16;

/// Tolerance for analytic comparisons of amplitudes and probabilities.
pub const ANALYTIC_TOL: f64 = 1e-12;

/// Tolerance for the normalization guard on measurement and deserialization.
pub const RUNTIME_TOL: f64 = 1e-9;

/// A computational-basis measurement result, `bits[j - 1]` being qubit `j`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BasisOutcome {
    bits: Vec<u8>,
}

impl BasisOutcome {
    /// Builds an outcome from explicit bits; every entry must be 0 or 1.
    pub fn new(bits: Vec<u8>) -> Result<Self> {
        if bits.is_empty() {
            return Err(Error::Argument("basis outcome must have at least one bit".into()));
        }
        if let Some(pos) = bits.iter().position(|&b| b > 1) {
            return Err(Error::Argument(format!(
                "bit {} of basis outcome is {}, expected 0 or 1",
                pos + 1,
                bits[pos]
            )));
        }
        Ok(Self { bits })
    }

    /// The outcome for basis index `index` of a `num_qubits` register.
    pub fn from_index(index: usize, num_qubits: usize) -> Self {
        let bits = (0..num_qubits)
            .map(|k| ((index >> (num_qubits - 1 - k)) & 1) as u8)
            .collect();
        Self { bits }
    }

    /// Big-endian basis index. Only meaningful for outcomes of at most
    /// `usize::BITS` bits.
    pub fn to_index(&self) -> usize {
        debug_assert!(self.bits.len() <= usize::BITS as usize);
        self.bits
            .iter()
            .fold(0usize, |acc, &b| (acc << 1) | b as usize)
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    /// Bit held by qubit `qubit` (one-based).
    pub fn bit(&self, qubit: usize) -> u8 {
        self.bits[qubit - 1]
    }

    /// XOR of all bits.
    pub fn parity(&self) -> u8 {
        self.bits.iter().fold(0, |acc, &b| acc ^ b)
    }

    pub fn into_bits(self) -> Vec<u8> {
        self.bits
    }
}

impl fmt::Display for BasisOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            f.write_str(if b == 1 { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for BasisOutcome {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bits = s
            .trim()
            .chars()
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                other => Err(Error::Argument(format!(
                    "unexpected character {other:?} in bitstring {s:?}"
                ))),
            })
            .collect::<Result<Vec<u8>>>()?;
        BasisOutcome::new(bits)
    }
}

/// Exact distribution of the bit patterns on an ordered qubit subset.
///
/// `probabilities[p]` is the probability of pattern `p`, whose most
/// significant bit belongs to `subset[0]`.
#[derive(Clone, Debug, PartialEq)]
pub struct MarginalDistribution {
    pub subset: Vec<usize>,
    pub probabilities: Vec<f64>,
}

impl MarginalDistribution {
    pub fn probability(&self, pattern: &BasisOutcome) -> Option<f64> {
        (pattern.len() == self.subset.len()).then(|| self.probabilities[pattern.to_index()])
    }

    /// Largest absolute difference from the uniform distribution.
    pub fn max_deviation_from_uniform(&self) -> f64 {
        let uniform = 1.0 / self.probabilities.len() as f64;
        self.probabilities
            .iter()
            .map(|p| (p - uniform).abs())
            .fold(0.0, f64::max)
    }

    /// Largest absolute entrywise difference to another distribution over
    /// the same subset.
    pub fn max_difference(&self, other: &MarginalDistribution) -> f64 {
        assert_eq!(self.subset, other.subset, "marginals over different subsets");
        self.probabilities
            .iter()
            .zip(&other.probabilities)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Dense register of `num_qubits` qubits holding `2^num_qubits` amplitudes.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    num_qubits: usize,
    amplitudes: Vec<Complex64>,
}

fn check_size(n: usize) -> Result<()> {
    if n == 0 || n > MAX_QUBITS {
        return Err(Error::Size(format!(
            "register of {n} qubits outside supported range 1..={MAX_QUBITS}"
        )));
    }
    Ok(())
}

impl StateVector {
    /// `|0…0⟩` on `n` qubits.
    pub fn new_zero(n: usize) -> Result<Self> {
        check_size(n)?;
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << n];
        amplitudes[0] = Complex64::new(1.0, 0.0);
        Ok(Self {
            num_qubits: n,
            amplitudes,
        })
    }

    /// The basis state `|bits⟩`.
    pub fn basis(bits: &BasisOutcome) -> Result<Self> {
        let mut state = Self::new_zero(bits.len())?;
        state.amplitudes[0] = Complex64::new(0.0, 0.0);
        state.amplitudes[bits.to_index()] = Complex64::new(1.0, 0.0);
        Ok(state)
    }

    /// Wraps raw amplitudes. The length must be a power of two within the
    /// size cap and the vector must be normalized within [`RUNTIME_TOL`].
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        let len = amplitudes.len();
        if !len.is_power_of_two() || len < 2 {
            return Err(Error::Size(format!(
                "amplitude count {len} is not 2^n for n >= 1"
            )));
        }
        let num_qubits = len.trailing_zeros() as usize;
        check_size(num_qubits)?;
        let state = Self {
            num_qubits,
            amplitudes,
        };
        state.check_normalized()?;
        Ok(state)
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn check_normalized(&self) -> Result<()> {
        let norm_sqr = self.norm_sqr();
        if (norm_sqr - 1.0).abs() > RUNTIME_TOL || !norm_sqr.is_finite() {
            return Err(Error::StateCorruption { norm_sqr });
        }
        Ok(())
    }

    /// Bit mask of qubit `q` in a basis index.
    fn mask(&self, q: usize) -> Result<usize> {
        if q == 0 || q > self.num_qubits {
            return Err(Error::Index {
                qubit: q,
                num_qubits: self.num_qubits,
            });
        }
        Ok(1 << (self.num_qubits - q))
    }

    pub fn apply_h(&mut self, q: usize) -> Result<()> {
        let m = self.mask(q)?;
        let s = std::f64::consts::FRAC_1_SQRT_2;
        for i in (0..self.amplitudes.len()).filter(|i| i & m == 0) {
            let a = self.amplitudes[i];
            let b = self.amplitudes[i | m];
            self.amplitudes[i] = (a + b) * s;
            self.amplitudes[i | m] = (a - b) * s;
        }
        Ok(())
    }

    pub fn apply_x(&mut self, q: usize) -> Result<()> {
        let m = self.mask(q)?;
        for i in (0..self.amplitudes.len()).filter(|i| i & m == 0) {
            self.amplitudes.swap(i, i | m);
        }
        Ok(())
    }

    pub fn apply_z(&mut self, q: usize) -> Result<()> {
        let m = self.mask(q)?;
        for (i, a) in self.amplitudes.iter_mut().enumerate() {
            if i & m != 0 {
                *a = -*a;
            }
        }
        Ok(())
    }

    pub fn apply_cnot(&mut self, control: usize, target: usize) -> Result<()> {
        if control == target {
            return Err(Error::Argument(format!(
                "CNOT control and target are both qubit {control}"
            )));
        }
        let c = self.mask(control)?;
        let t = self.mask(target)?;
        for i in (0..self.amplitudes.len()).filter(|i| i & c != 0 && i & t == 0) {
            self.amplitudes.swap(i, i | t);
        }
        Ok(())
    }

    pub fn apply_toffoli(&mut self, c1: usize, c2: usize, target: usize) -> Result<()> {
        if c1 == c2 || c1 == target || c2 == target {
            return Err(Error::Argument(format!(
                "Toffoli operands ({c1}, {c2}, {target}) are not pairwise distinct"
            )));
        }
        let m1 = self.mask(c1)?;
        let m2 = self.mask(c2)?;
        let t = self.mask(target)?;
        let controls = m1 | m2;
        for i in (0..self.amplitudes.len()).filter(|i| i & controls == controls && i & t == 0) {
            self.amplitudes.swap(i, i | t);
        }
        Ok(())
    }

    /// `|amplitude|^2` of every basis index.
    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn probability_of(&self, bits: &BasisOutcome) -> Result<f64> {
        if bits.len() != self.num_qubits {
            return Err(Error::Argument(format!(
                "outcome has {} bits, register has {} qubits",
                bits.len(),
                self.num_qubits
            )));
        }
        Ok(self.amplitudes[bits.to_index()].norm_sqr())
    }

    /// Draws a basis index with probability `|amplitude|^2` without collapsing.
    fn sample_index<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let r: f64 = rng.random();
        let mut acc = 0.0;
        let mut last_nonzero = 0;
        for (i, a) in self.amplitudes.iter().enumerate() {
            let p = a.norm_sqr();
            if p > 0.0 {
                last_nonzero = i;
                acc += p;
                if r < acc {
                    return i;
                }
            }
        }
        // r landed in the rounding gap above the accumulated mass.
        last_nonzero
    }

    /// Measures every qubit in the computational basis and collapses the
    /// register onto the observed basis state.
    pub fn measure_all<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<BasisOutcome> {
        self.check_normalized()?;
        let index = self.sample_index(rng);
        self.amplitudes.fill(Complex64::new(0.0, 0.0));
        self.amplitudes[index] = Complex64::new(1.0, 0.0);
        Ok(BasisOutcome::from_index(index, self.num_qubits))
    }

    /// Histogram of `shots` independent full-register measurements of copies
    /// of this state. Entry `i` counts basis index `i`.
    pub fn sample_counts<R: Rng + ?Sized>(&self, shots: usize, rng: &mut R) -> Result<Vec<u64>> {
        self.check_normalized()?;
        let cumulative: Vec<f64> = self
            .amplitudes
            .iter()
            .scan(0.0, |acc, a| {
                *acc += a.norm_sqr();
                Some(*acc)
            })
            .collect();
        let last_nonzero = self
            .amplitudes
            .iter()
            .rposition(|a| a.norm_sqr() > 0.0)
            .unwrap_or(0);
        let mut counts = vec![0u64; self.amplitudes.len()];
        for _ in 0..shots {
            let r: f64 = rng.random();
            let idx = cumulative.partition_point(|&c| c <= r).min(last_nonzero);
            counts[idx] += 1;
        }
        Ok(counts)
    }

    /// Exact probabilities of the bit patterns on `subset`, tracing out the
    /// remaining qubits.
    pub fn marginal_distribution(&self, subset: &[usize]) -> Result<MarginalDistribution> {
        if subset.is_empty() {
            return Err(Error::Argument("marginal subset is empty".into()));
        }
        let masks = subset
            .iter()
            .map(|&q| self.mask(q))
            .collect::<Result<Vec<_>>>()?;
        for (i, q) in subset.iter().enumerate() {
            if subset[..i].contains(q) {
                return Err(Error::Argument(format!("qubit {q} repeated in subset")));
            }
        }
        let mut probabilities = vec![0.0; 1 << subset.len()];
        for (index, a) in self.amplitudes.iter().enumerate() {
            let pattern = masks
                .iter()
                .fold(0usize, |acc, &m| (acc << 1) | usize::from(index & m != 0));
            probabilities[pattern] += a.norm_sqr();
        }
        Ok(MarginalDistribution {
            subset: subset.to_vec(),
            probabilities,
        })
    }

    /// Basis states with probability above `tol`, in ascending index order.
    pub fn support(&self, tol: f64) -> Vec<(BasisOutcome, Complex64)> {
        self.amplitudes
            .iter()
            .enumerate()
            .filter(|(_, a)| a.norm_sqr() > tol)
            .map(|(i, a)| (BasisOutcome::from_index(i, self.num_qubits), *a))
            .collect()
    }

    /// Largest entrywise amplitude difference; `None` for different sizes.
    pub fn max_amplitude_difference(&self, other: &StateVector) -> Option<f64> {
        (self.num_qubits == other.num_qubits).then(|| {
            self.amplitudes
                .iter()
                .zip(&other.amplitudes)
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max)
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn random_state(n: usize, seed: u64) -> StateVector {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut amps: Vec<Complex64> = (0..1 << n)
            .map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
            .collect();
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        amps.iter_mut().for_each(|a| *a /= norm);
        StateVector::from_amplitudes(amps).unwrap()
    }

    fn bits(s: &str) -> BasisOutcome {
        s.parse().unwrap()
    }

    #[test]
    fn zero_states() {
        assert_eq!(StateVector::new_zero(1).unwrap().amplitudes(), &[c(1.0), c(0.0)]);
        assert_eq!(
            StateVector::new_zero(2).unwrap().amplitudes(),
            &[c(1.0), c(0.0), c(0.0), c(0.0)]
        );
        let s = StateVector::new_zero(3).unwrap();
        assert_eq!(s.probability_of(&bits("000")).unwrap(), 1.0);
    }

    #[test]
    fn size_limits() {
        assert!(matches!(StateVector::new_zero(0), Err(Error::Size(_))));
        assert!(matches!(StateVector::new_zero(17), Err(Error::Size(_))));
        assert!(StateVector::new_zero(16).is_ok());
    }

    #[test]
    fn hadamard_action() {
        let mut s = StateVector::new_zero(1).unwrap();
        s.apply_h(1).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!(s.max_amplitude_difference(&StateVector::from_amplitudes(vec![c(h), c(h)]).unwrap()).unwrap() < 1e-15);

        let mut s = StateVector::new_zero(2).unwrap();
        s.apply_h(1).unwrap();
        let expected = StateVector::from_amplitudes(vec![c(h), c(0.0), c(h), c(0.0)]).unwrap();
        assert!(s.max_amplitude_difference(&expected).unwrap() < 1e-15);
    }

    #[test]
    fn pauli_actions() {
        let mut s = StateVector::new_zero(1).unwrap();
        s.apply_x(1).unwrap();
        assert_eq!(s.amplitudes(), &[c(0.0), c(1.0)]);
        let mut s = StateVector::new_zero(1).unwrap();
        s.apply_z(1).unwrap();
        assert_eq!(s.amplitudes(), &[c(1.0), c(0.0)]);
        s.apply_x(1).unwrap();
        s.apply_z(1).unwrap();
        assert_eq!(s.amplitudes(), &[c(0.0), c(-1.0)]);
    }

    #[test]
    fn cnot_truth_table() {
        let mut s = StateVector::basis(&bits("10")).unwrap();
        s.apply_cnot(1, 2).unwrap();
        assert_eq!(s.probability_of(&bits("11")).unwrap(), 1.0);
        let mut s = StateVector::basis(&bits("00")).unwrap();
        s.apply_cnot(1, 2).unwrap();
        assert_eq!(s.probability_of(&bits("00")).unwrap(), 1.0);
        // control below target in significance
        let mut s = StateVector::basis(&bits("01")).unwrap();
        s.apply_cnot(2, 1).unwrap();
        assert_eq!(s.probability_of(&bits("11")).unwrap(), 1.0);
    }

    #[test]
    fn toffoli_truth_table() {
        for (input, output) in [
            ("000", "000"),
            ("001", "001"),
            ("010", "010"),
            ("011", "011"),
            ("100", "100"),
            ("101", "101"),
            ("110", "111"),
            ("111", "110"),
        ] {
            let mut s = StateVector::basis(&bits(input)).unwrap();
            s.apply_toffoli(1, 2, 3).unwrap();
            assert_eq!(s.probability_of(&bits(output)).unwrap(), 1.0, "{input}");
        }
    }

    #[test]
    fn operand_errors() {
        let mut s = StateVector::new_zero(3).unwrap();
        assert!(matches!(s.apply_h(0), Err(Error::Index { .. })));
        assert!(matches!(s.apply_x(4), Err(Error::Index { .. })));
        assert!(matches!(s.apply_cnot(2, 2), Err(Error::Argument(_))));
        assert!(matches!(s.apply_cnot(1, 5), Err(Error::Index { .. })));
        assert!(matches!(s.apply_toffoli(1, 1, 3), Err(Error::Argument(_))));
        assert!(matches!(s.apply_toffoli(1, 2, 2), Err(Error::Argument(_))));
    }

    #[test]
    fn involutions_on_random_states() {
        for seed in 0..8 {
            let original = random_state(4, seed);
            let mut s = original.clone();
            s.apply_h(2).unwrap();
            s.apply_h(2).unwrap();
            s.apply_x(1).unwrap();
            s.apply_x(1).unwrap();
            s.apply_z(4).unwrap();
            s.apply_z(4).unwrap();
            s.apply_cnot(3, 1).unwrap();
            s.apply_cnot(3, 1).unwrap();
            s.apply_toffoli(4, 2, 3).unwrap();
            s.apply_toffoli(4, 2, 3).unwrap();
            assert!(s.max_amplitude_difference(&original).unwrap() < 1e-12);
            assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn measurement_collapses() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut s = StateVector::new_zero(3).unwrap();
        assert_eq!(s.measure_all(&mut rng).unwrap(), bits("000"));

        let mut s = random_state(3, 9);
        let outcome = s.measure_all(&mut rng).unwrap();
        assert_eq!(s.probability_of(&outcome).unwrap(), 1.0);
    }

    #[test]
    fn measurement_rejects_unnormalized() {
        let mut s = StateVector::new_zero(2).unwrap();
        s.amplitudes[1] = c(0.5);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(matches!(s.measure_all(&mut rng), Err(Error::StateCorruption { .. })));
    }

    #[test]
    fn sampling_matches_probabilities_within_three_sigma() {
        let state = random_state(3, 4);
        let shots = 20_000;
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let counts = state.sample_counts(shots, &mut rng).unwrap();
        for (p, &k) in state.probabilities().iter().zip(&counts) {
            let sigma = (p * (1.0 - p) / shots as f64).sqrt();
            let freq = k as f64 / shots as f64;
            assert!((freq - p).abs() <= 3.0 * sigma + 1e-12, "{freq} vs {p}");
        }
    }

    #[test]
    fn probability_length_mismatch() {
        let s = StateVector::new_zero(3).unwrap();
        assert!(matches!(s.probability_of(&bits("01")), Err(Error::Argument(_))));
    }

    #[test]
    fn marginals() {
        let s = StateVector::new_zero(3).unwrap();
        let m = s.marginal_distribution(&[2, 3]).unwrap();
        assert_eq!(m.probabilities, vec![1.0, 0.0, 0.0, 0.0]);

        let s = random_state(3, 2);
        let full = s.marginal_distribution(&[1, 2, 3]).unwrap();
        assert_eq!(full.probabilities, s.probabilities());

        // reversed order permutes pattern bits
        let mut s = StateVector::basis(&bits("10")).unwrap();
        let m = s.marginal_distribution(&[2, 1]).unwrap();
        assert_eq!(m.probabilities, vec![0.0, 1.0, 0.0, 0.0]);
        s.apply_h(2).unwrap();
        assert!(s.marginal_distribution(&[1, 1]).is_err());
        assert!(s.marginal_distribution(&[]).is_err());
        assert!(matches!(s.marginal_distribution(&[3]), Err(Error::Index { .. })));
    }

    #[test]
    fn bitstring_parsing() {
        let b = bits("1011");
        assert_eq!(b.to_index(), 0b1011);
        assert_eq!(b.to_string(), "1011");
        assert_eq!(BasisOutcome::from_index(0b0110, 4), bits("0110"));
        assert_eq!(b.parity(), 1);
        assert!("10a".parse::<BasisOutcome>().is_err());
        assert!("".parse::<BasisOutcome>().is_err());
    }
}
