use std::fmt;

use super::{Backend, Register, SessionStore};
use crate::error::{Error, Result};
use crate::stats::chi_square;
use crate::statevector::{MarginalDistribution, ANALYTIC_TOL};

/// Significance level for the empirical uniformity test.
pub const EMPIRICAL_ALPHA: f64 = 0.001;

/// Widest subset whose pattern table the audit will build.
pub const MAX_AUDIT_SUBSET: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    /// Proper subset whose view is uniform: it learns nothing.
    NoInformation,
    /// Proper subset whose view is not uniform.
    InformationLeak,
    /// Full participant set and every register has a definite parity.
    FullRecovery,
    /// Full participant set but some register mixes both parities.
    Inconsistent,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::NoInformation => "no-information",
            Verdict::InformationLeak => "information-leak",
            Verdict::FullRecovery => "full-recovery",
            Verdict::Inconsistent => "inconsistent",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AuditReport {
    pub subset: Vec<usize>,
    pub n: usize,
    pub backend: Backend,
    pub pixels: usize,
    /// Pattern distribution over the subset, pattern MSB = `subset[0]`.
    /// Exact mean over pixels (statevector) or pooled empirical frequencies
    /// (sampled).
    pub distribution: Vec<f64>,
    /// Largest deviation from uniform: worst single pixel (statevector) or
    /// worst pooled frequency (sampled).
    pub max_deviation: f64,
    /// Chi-square p-value against uniform; sampled proper subsets only.
    pub p_value: Option<f64>,
    pub verdict: Verdict,
}

fn validate_subset(subset: &[usize], n: usize) -> Result<()> {
    if subset.is_empty() {
        return Err(Error::Argument("audit subset is empty".into()));
    }
    for (i, &j) in subset.iter().enumerate() {
        if j == 0 || j > n {
            return Err(Error::Argument(format!("participant {j} outside 1..={n}")));
        }
        if subset[..i].contains(&j) {
            return Err(Error::Argument(format!("participant {j} listed twice")));
        }
    }
    if subset.len() > MAX_AUDIT_SUBSET {
        return Err(Error::Size(format!(
            "subset of {} participants exceeds the {MAX_AUDIT_SUBSET}-wide pattern table",
            subset.len()
        )));
    }
    Ok(())
}

/// What the participants in `subset` can learn from their shares.
pub fn audit_subset(session: &SessionStore, subset: &[usize]) -> Result<AuditReport> {
    validate_subset(subset, session.n)?;
    let full = subset.len() == session.n;
    let patterns = 1usize << subset.len();
    let uniform = 1.0 / patterns as f64;

    let mut report = AuditReport {
        subset: subset.to_vec(),
        n: session.n,
        backend: session.backend,
        pixels: session.pixel_count(),
        distribution: vec![0.0; patterns],
        max_deviation: 0.0,
        p_value: None,
        verdict: Verdict::NoInformation,
    };

    match session.backend {
        Backend::StateVector => {
            let mut consistent = true;
            for r in &session.registers {
                let Register::State(state) = r else {
                    return Err(Error::Integrity("statevector session holds a sampled register".into()));
                };
                let marginal: MarginalDistribution = state.marginal_distribution(subset)?;
                for (acc, p) in report.distribution.iter_mut().zip(&marginal.probabilities) {
                    *acc += p;
                }
                report.max_deviation = report.max_deviation.max(marginal.max_deviation_from_uniform());
                if full {
                    let parity_mass = |b: u32| -> f64 {
                        marginal
                            .probabilities
                            .iter()
                            .enumerate()
                            .filter(|(i, _)| i.count_ones() & 1 == b)
                            .map(|(_, p)| p)
                            .sum()
                    };
                    consistent &= parity_mass(0) < ANALYTIC_TOL || parity_mass(1) < ANALYTIC_TOL;
                }
            }
            let pixels = session.pixel_count() as f64;
            report.distribution.iter_mut().for_each(|p| *p /= pixels);
            report.verdict = match (full, consistent) {
                (true, true) => Verdict::FullRecovery,
                (true, false) => Verdict::Inconsistent,
                (false, _) if report.max_deviation < ANALYTIC_TOL => Verdict::NoInformation,
                (false, _) => Verdict::InformationLeak,
            };
        }
        Backend::Sampled => {
            let mut counts = vec![0u64; patterns];
            for r in &session.registers {
                let Register::Outcome(outcome) = r else {
                    return Err(Error::Integrity("sampled session holds a statevector register".into()));
                };
                let pattern = subset
                    .iter()
                    .fold(0usize, |acc, &j| (acc << 1) | outcome.bit(j) as usize);
                counts[pattern] += 1;
            }
            let total = session.pixel_count() as f64;
            for (p, &c) in report.distribution.iter_mut().zip(&counts) {
                *p = c as f64 / total;
            }
            report.max_deviation = report
                .distribution
                .iter()
                .map(|p| (p - uniform).abs())
                .fold(0.0, f64::max);
            report.verdict = if full {
                // every sampled outcome has a definite parity by construction
                Verdict::FullRecovery
            } else {
                let (_, p) = chi_square(&counts, &vec![total * uniform; patterns]);
                report.p_value = Some(p);
                if p > EMPIRICAL_ALPHA {
                    Verdict::NoInformation
                } else {
                    Verdict::InformationLeak
                }
            };
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::image::BinaryImage;
    use crate::protocol::share_image;

    fn mixed_image(w: usize, h: usize) -> BinaryImage {
        let pixels = (0..w * h).map(|i| (crate::seed::mix64(i as u64) & 1) as u8).collect();
        BinaryImage::new(w, h, pixels).unwrap()
    }

    #[test]
    fn single_participant_learns_nothing() {
        let (session, _) = share_image(&mixed_image(4, 1), 3, Backend::StateVector, 1).unwrap();
        let report = audit_subset(&session, &[2]).unwrap();
        assert_eq!(report.verdict, Verdict::NoInformation);
        assert!(report.max_deviation < 1e-12);
        for p in &report.distribution {
            assert!((p - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn five_of_six_is_uniform() {
        let (session, _) = share_image(&mixed_image(5, 5), 6, Backend::StateVector, 1).unwrap();
        let report = audit_subset(&session, &[1, 2, 3, 4, 5]).unwrap();
        assert_eq!(report.distribution.len(), 32);
        assert!(report.max_deviation < 1e-12);
        assert_eq!(report.verdict, Verdict::NoInformation);
    }

    #[test]
    fn full_set_recovers() {
        let (session, _) = share_image(&mixed_image(4, 1), 3, Backend::StateVector, 1).unwrap();
        let report = audit_subset(&session, &[1, 2, 3]).unwrap();
        assert_eq!(report.verdict, Verdict::FullRecovery);
        assert!(report.max_deviation > 0.1);
    }

    #[test]
    fn collapsed_registers_leak() {
        let img = mixed_image(6, 6);
        let (mut session, shares) = share_image(&img, 3, Backend::StateVector, 1).unwrap();
        crate::protocol::recover_image(&shares, &mut session, 2).unwrap();
        let report = audit_subset(&session, &[1]).unwrap();
        assert_eq!(report.verdict, Verdict::InformationLeak);
    }

    #[test]
    fn sampled_audit() {
        let (session, _) = share_image(&mixed_image(64, 64), 4, Backend::Sampled, 3).unwrap();
        let report = audit_subset(&session, &[1, 3]).unwrap();
        assert!(report.p_value.unwrap() > EMPIRICAL_ALPHA);
        assert_eq!(report.verdict, Verdict::NoInformation);
        assert_eq!(audit_subset(&session, &[4, 3, 2, 1]).unwrap().verdict, Verdict::FullRecovery);
    }

    #[test]
    fn invalid_subsets() {
        let (session, _) = share_image(&mixed_image(2, 2), 3, Backend::StateVector, 1).unwrap();
        for bad in [&[][..], &[0], &[4], &[1, 1]] {
            assert!(matches!(audit_subset(&session, bad), Err(Error::Argument(_))), "{bad:?}");
        }
    }
}
