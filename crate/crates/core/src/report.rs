//! Side-by-side comparison of the pixel-expansion baseline and the quantum
//! scheme on a concrete image, with each property backed by a measurement.

use std::fmt;

use crate::error::Result;
use crate::image::{write_pbm, BinaryImage, PbmVariant};
use crate::naor::{
    block_shape, build_nn_matrix_sets, classical_recover_image, classical_share_image,
    classical_share_pixel, expand_image,
};
use crate::protocol::{recover_image, serialize_share, share_image, share_pixel, Backend};
use crate::seed::derived_rng;
use crate::statevector::MAX_QUBITS;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SchemeProfile {
    pub name: &'static str,
    /// Every pixel re-shared on its own reproduced the full-image result.
    pub single_pixel_parallel: bool,
    /// A share holds more entries than the secret has pixels.
    pub pixel_expansion: bool,
    /// The recovered image differs from the secret at the secret's detail level.
    pub resolution_loss: bool,
    pub expansion_factor: usize,
    /// Entries (subpixels or qubits) per share.
    pub share_entries: usize,
    /// Encoded size of share 1.
    pub share_bytes: usize,
    /// The decoded pixel image equals the secret.
    pub decodes_exactly: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComparisonReport {
    pub n: usize,
    pub secret_pixels: usize,
    pub baseline: SchemeProfile,
    pub quantum: SchemeProfile,
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "Yes"
    } else {
        "No"
    }
}

impl fmt::Display for ComparisonReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (b, q) = (&self.baseline, &self.quantum);
        writeln!(f, "({n}, {n}) sharing of a {} pixel secret", self.secret_pixels, n = self.n)?;
        writeln!(f, "{:<34}{:>20}{:>20}", "Property", b.name, q.name)?;
        let rows: [(&str, String, String); 7] = [
            ("Single-pixel parallel processing", yes_no(b.single_pixel_parallel).into(), yes_no(q.single_pixel_parallel).into()),
            ("Pixel expansion", yes_no(b.pixel_expansion).into(), yes_no(q.pixel_expansion).into()),
            ("The loss in resolution", yes_no(b.resolution_loss).into(), yes_no(q.resolution_loss).into()),
            ("Expansion factor", b.expansion_factor.to_string(), q.expansion_factor.to_string()),
            ("Entries per share", b.share_entries.to_string(), q.share_entries.to_string()),
            ("Bytes in share 1", b.share_bytes.to_string(), q.share_bytes.to_string()),
            ("Decoded image equals secret", yes_no(b.decodes_exactly).into(), yes_no(q.decodes_exactly).into()),
        ];
        for (label, bv, qv) in rows {
            writeln!(f, "{label:<34}{bv:>20}{qv:>20}")?;
        }
        Ok(())
    }
}

/// Runs both schemes end to end on `image`. The quantum side uses the
/// statevector backend when `n` fits the engine, otherwise the sampled one.
pub fn comparison_report(image: &BinaryImage, n: usize, seed: u64) -> Result<ComparisonReport> {
    let s = image.pixel_count();

    let sets = build_nn_matrix_sets(n)?;
    let m = sets.m();
    let shares = classical_share_image(image, &sets, seed)?;
    let recovery = classical_recover_image(&shares, &sets)?;
    let (br, bc) = block_shape(m);
    let baseline_parallel = (1..=s).all(|l| {
        let matrix = classical_share_pixel(image.pixel(l), &sets, &mut derived_rng(seed, l as u64));
        let (row, col) = image.position(l);
        shares.iter().enumerate().all(|(i, share)| {
            matrix.row(i + 1).iter().enumerate().all(|(k, &bit)| {
                share.get(row * br + k / bc, col * bc + k % bc).bit() == bit
            })
        })
    });
    let share_entries = shares[0].pixel_count();
    let baseline = SchemeProfile {
        name: "Pixel expansion VSS",
        single_pixel_parallel: baseline_parallel,
        pixel_expansion: share_entries > s,
        resolution_loss: recovery.stacked != expand_image(image, m)?,
        expansion_factor: share_entries / s,
        share_entries,
        share_bytes: write_pbm(&shares[0], PbmVariant::Raw).len(),
        decodes_exactly: recovery.decoded == *image,
    };

    let backend = if n <= MAX_QUBITS { Backend::StateVector } else { Backend::Sampled };
    let (mut session, qshares) = share_image(image, n, backend, seed)?;
    let quantum_parallel = (1..=s).all(|l| {
        share_pixel(image.pixel(l), n, backend, seed, l).is_ok_and(|r| &r == session.register(l))
    });
    let recovered = recover_image(&qshares, &mut session, seed)?;
    let entries = qshares[0].payload.len();
    let quantum = SchemeProfile {
        name: "Quantum VSS",
        single_pixel_parallel: quantum_parallel,
        pixel_expansion: entries > s,
        resolution_loss: recovered != *image,
        expansion_factor: entries / s,
        share_entries: entries,
        share_bytes: serialize_share(&qshares[0]).len(),
        decodes_exactly: recovered == *image,
    };

    Ok(ComparisonReport {
        n,
        secret_pixels: s,
        baseline,
        quantum,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::image::Color::{Black, White};

    #[test]
    fn worked_example_comparison() {
        let img = BinaryImage::from_pixel_list(4, 1, &[White, Black, Black, White]).unwrap();
        let r = comparison_report(&img, 3, 1).unwrap();
        let b = &r.baseline;
        assert_eq!((b.single_pixel_parallel, b.pixel_expansion, b.resolution_loss), (true, true, true));
        assert_eq!(b.expansion_factor, 4);
        assert!(b.decodes_exactly);
        let q = &r.quantum;
        assert_eq!((q.single_pixel_parallel, q.pixel_expansion, q.resolution_loss), (true, false, false));
        assert_eq!(q.expansion_factor, 1);
        let text = r.to_string();
        assert!(text.contains("Pixel expansion"));
    }

    #[test]
    fn two_participants_expand_by_two() {
        let img = BinaryImage::filled(3, 3, Black).unwrap();
        assert_eq!(comparison_report(&img, 2, 0).unwrap().baseline.expansion_factor, 2);
    }
}
