//! Dealer and participant workflow.
//!
//! The dealer encodes pixel `l` with bit `b_l` into `|C_{b_l}⟩` and hands
//! qubit `j` of every register to participant `j`. Since qubits cannot be
//! copied, the [`SessionStore`] holds the joint registers and a statevector
//! share only carries handles `(l, j)` into it. The sampled backend instead
//! measures every register at share time and hands out plain bits; all
//! protocol steps are computational-basis measurements, so the observable
//! statistics are the same.

mod audit;
mod codec;

pub use audit::{audit_subset, AuditReport, Verdict};
pub use codec::{
    deserialize_session, deserialize_share, serialize_session, serialize_share, FORMAT_VERSION,
    SESSION_MAGIC, SHARE_MAGIC,
};

use std::fmt;
use std::str::FromStr;

use rand::RngCore;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::image::{BinaryImage, Color};
use crate::parity::{prepare_parity_state_direct, sample_parity_outcome, xor_decode_classical, ParitySpec};
use crate::seed::{derived_rng, domain_rng};
use crate::statevector::{BasisOutcome, StateVector, MAX_QUBITS};

/// Largest `n` for the sampled backend.
pub const MAX_SAMPLED_PARTICIPANTS: usize = 64;

const SESSION_ID_DOMAIN: u64 = 0x5345_5353;
const RECOVERY_DOMAIN: u64 = 0x5245_4356;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Backend {
    /// Full `2^n` statevector per pixel; measured at recovery.
    StateVector,
    /// Register measured at share time; shares carry bits.
    Sampled,
}

impl Backend {
    pub fn id(self) -> u8 {
        match self {
            Backend::StateVector => 0,
            Backend::Sampled => 1,
        }
    }

    pub fn from_id(id: u8) -> Option<Self> {
        match id {
            0 => Some(Backend::StateVector),
            1 => Some(Backend::Sampled),
            _ => None,
        }
    }

    pub fn max_participants(self) -> usize {
        match self {
            Backend::StateVector => MAX_QUBITS,
            Backend::Sampled => MAX_SAMPLED_PARTICIPANTS,
        }
    }
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Backend::StateVector => "statevector",
            Backend::Sampled => "sampled",
        })
    }
}

impl FromStr for Backend {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "statevector" => Ok(Backend::StateVector),
            "sampled" => Ok(Backend::Sampled),
            other => Err(Error::Argument(format!(
                "unknown backend {other:?} (expected statevector or sampled)"
            ))),
        }
    }
}

/// Dealer-side register of one pixel.
#[derive(Clone, Debug, PartialEq)]
pub enum Register {
    State(StateVector),
    Outcome(BasisOutcome),
}

/// The joint quantum system of a sharing session.
#[derive(Clone, Debug, PartialEq)]
pub struct SessionStore {
    n: usize,
    backend: Backend,
    master_seed: u64,
    width: usize,
    height: usize,
    session_id: [u8; 16],
    registers: Vec<Register>,
}

impl SessionStore {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn backend(&self) -> Backend {
        self.backend
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixel_count(&self) -> usize {
        self.registers.len()
    }

    pub fn session_id(&self) -> [u8; 16] {
        self.session_id
    }

    /// Register of pixel `l` (one-based).
    pub fn register(&self, l: usize) -> &Register {
        &self.registers[l - 1]
    }

    pub fn registers(&self) -> &[Register] {
        &self.registers
    }
}

/// Reference to qubit `qubit` of the register of pixel `pixel`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct QubitHandle {
    pub pixel: u32,
    pub qubit: u16,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SharePayload {
    Handles(Vec<QubitHandle>),
    /// Bit `x^j` of every pixel, in pixel order.
    Bits(Vec<u8>),
}

impl SharePayload {
    pub fn len(&self) -> usize {
        match self {
            SharePayload::Handles(h) => h.len(),
            SharePayload::Bits(b) => b.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Everything participant `j` holds.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShareFile {
    pub participant: usize,
    pub n: usize,
    pub backend: Backend,
    pub width: usize,
    pub height: usize,
    pub session_id: [u8; 16],
    pub payload: SharePayload,
}

impl ShareFile {
    pub fn pixel_count(&self) -> usize {
        self.width * self.height
    }

    fn check_against(&self, session: &SessionStore) -> Result<()> {
        let j = self.participant;
        if self.session_id != session.session_id {
            return Err(Error::Integrity(format!("share {j} belongs to a different session")));
        }
        if self.n != session.n
            || self.backend != session.backend
            || self.width != session.width
            || self.height != session.height
        {
            return Err(Error::Integrity(format!(
                "share {j} header does not match the session parameters"
            )));
        }
        if j == 0 || j > session.n {
            return Err(Error::Integrity(format!(
                "participant index {j} outside 1..={}",
                session.n
            )));
        }
        if self.payload.len() != session.pixel_count() {
            return Err(Error::Integrity(format!(
                "share {j} has {} entries for {} pixels",
                self.payload.len(),
                session.pixel_count()
            )));
        }
        if let SharePayload::Handles(handles) = &self.payload {
            for (i, h) in handles.iter().enumerate() {
                if h.pixel as usize != i + 1 || h.qubit as usize != j {
                    return Err(Error::Integrity(format!(
                        "share {j} entry {} references pixel {} qubit {}",
                        i + 1,
                        h.pixel,
                        h.qubit
                    )));
                }
            }
        }
        Ok(())
    }
}

fn check_n(n: usize, backend: Backend) -> Result<()> {
    if n < 2 {
        return Err(Error::Argument(format!("scheme needs n >= 2 participants, got {n}")));
    }
    if n > backend.max_participants() {
        return Err(Error::Size(format!(
            "n = {n} exceeds the {backend} backend limit of {}",
            backend.max_participants()
        )));
    }
    Ok(())
}

/// Encodes pixel `l` with color `color`. Depends only on `(seed, l)`.
pub fn share_pixel(
    color: Color,
    n: usize,
    backend: Backend,
    seed: u64,
    l: usize,
) -> Result<Register> {
    check_n(n, backend)?;
    let spec = ParitySpec::new(n, color.bit())?;
    match backend {
        Backend::StateVector => Ok(Register::State(prepare_parity_state_direct(spec)?)),
        Backend::Sampled => {
            let mut rng = derived_rng(seed, l as u64);
            Ok(Register::Outcome(sample_parity_outcome(spec, &mut rng)))
        }
    }
}

/// Shares `image` among `n` participants. Deterministic in `seed`.
pub fn share_image(
    image: &BinaryImage,
    n: usize,
    backend: Backend,
    seed: u64,
) -> Result<(SessionStore, Vec<ShareFile>)> {
    check_n(n, backend)?;
    let registers = (1..=image.pixel_count())
        .into_par_iter()
        .map(|l| share_pixel(image.pixel(l), n, backend, seed, l))
        .collect::<Result<Vec<_>>>()?;

    let mut session_id = [0u8; 16];
    domain_rng(seed, SESSION_ID_DOMAIN, (n as u64) << 8 | u64::from(backend.id()))
        .fill_bytes(&mut session_id);

    let session = SessionStore {
        n,
        backend,
        master_seed: seed,
        width: image.width(),
        height: image.height(),
        session_id,
        registers,
    };
    let shares = (1..=n).map(|j| share_for(&session, j)).collect();
    Ok((session, shares))
}

fn share_for(session: &SessionStore, j: usize) -> ShareFile {
    let payload = match session.backend {
        Backend::StateVector => SharePayload::Handles(
            (1..=session.pixel_count())
                .map(|l| QubitHandle {
                    pixel: l as u32,
                    qubit: j as u16,
                })
                .collect(),
        ),
        Backend::Sampled => SharePayload::Bits(
            session
                .registers
                .iter()
                .map(|r| match r {
                    Register::Outcome(o) => o.bit(j),
                    Register::State(_) => unreachable!("sampled session holds outcomes"),
                })
                .collect(),
        ),
    };
    ShareFile {
        participant: j,
        n: session.n,
        backend: session.backend,
        width: session.width,
        height: session.height,
        session_id: session.session_id,
        payload,
    }
}

/// White iff the outcome XORs to 0.
pub fn recover_pixel(outcome: &BasisOutcome) -> Color {
    Color::from_bit(outcome.parity())
}

/// Recovers the image from all `n` shares.
///
/// Statevector registers are measured (and collapse) with per-pixel streams
/// derived from `seed`; sampled shares are XOR-ed directly. Fewer than `n`
/// distinct participants is an error: no image is produced.
pub fn recover_image(
    shares: &[ShareFile],
    session: &mut SessionStore,
    seed: u64,
) -> Result<BinaryImage> {
    for share in shares {
        share.check_against(session)?;
    }
    let mut seen = vec![false; session.n + 1];
    for share in shares {
        if std::mem::replace(&mut seen[share.participant], true) {
            return Err(Error::Integrity(format!(
                "participant {} supplied more than one share",
                share.participant
            )));
        }
    }
    if shares.len() < session.n {
        return Err(Error::IncompleteShares {
            have: shares.len(),
            need: session.n,
        });
    }
    let mut ordered: Vec<&ShareFile> = shares.iter().collect();
    ordered.sort_by_key(|s| s.participant);

    let n = session.n;
    let pixels = session
        .registers
        .par_iter_mut()
        .enumerate()
        .map(|(i, register)| -> Result<u8> {
            let l = i + 1;
            match register {
                Register::State(state) => {
                    let mut rng = domain_rng(seed, RECOVERY_DOMAIN, l as u64);
                    let outcome = state.measure_all(&mut rng)?;
                    if outcome.len() != n {
                        return Err(Error::Integrity(format!(
                            "pixel {l} register has {} qubits, expected {n}",
                            outcome.len()
                        )));
                    }
                    Ok(recover_pixel(&outcome).bit())
                }
                Register::Outcome(stored) => {
                    let bits: Vec<u8> = ordered
                        .iter()
                        .map(|s| match &s.payload {
                            SharePayload::Bits(b) => b[i],
                            SharePayload::Handles(_) => unreachable!("checked backend"),
                        })
                        .collect();
                    if bits != stored.bits() {
                        return Err(Error::Integrity(format!(
                            "share bits of pixel {l} disagree with the session record"
                        )));
                    }
                    xor_decode_classical(&bits)
                }
            }
        })
        .collect::<Result<Vec<u8>>>()?;
    BinaryImage::new(session.width, session.height, pixels)
}
