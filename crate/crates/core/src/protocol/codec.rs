//! Binary share (`QVSS`) and session (`QVSE`) files.
//!
//! Both start with the same little-endian header:
//!
//! ```text
//! magic[4] version:u8 backend:u8 n:u16 participant:u16
//! pixels:u32 width:u32 height:u32 session_id[16]
//! ```
//!
//! and end with a CRC-32 (IEEE) of every preceding byte. A share payload is
//! either `pixel:u32 qubit:u16` per pixel (statevector) or the participant's
//! bits packed MSB-first (sampled). A session has participant 0, then the
//! master seed as u64, then per pixel either `n:u16` followed by `2^n`
//! `(re:f64, im:f64)` pairs (statevector) or all outcome bits, pixel after
//! pixel, packed MSB-first (sampled).

use num_complex::Complex64;

use super::{Backend, QubitHandle, Register, SessionStore, ShareFile, SharePayload};
use crate::error::{Error, Result};
use crate::image::MAX_DIMENSION;
use crate::statevector::{BasisOutcome, StateVector};

pub const SHARE_MAGIC: &[u8; 4] = b"QVSS";
pub const SESSION_MAGIC: &[u8; 4] = b"QVSE";
pub const FORMAT_VERSION: u8 = 1;

const HEADER_LEN: usize = 4 + 1 + 1 + 2 + 2 + 4 + 4 + 4 + 16;
const CRC_LEN: usize = 4;

struct Header {
    backend: Backend,
    n: usize,
    participant: usize,
    pixels: usize,
    width: usize,
    height: usize,
    session_id: [u8; 16],
}

fn write_header(out: &mut Vec<u8>, magic: &[u8; 4], h: &Header) {
    out.extend_from_slice(magic);
    out.push(FORMAT_VERSION);
    out.push(h.backend.id());
    out.extend_from_slice(&(h.n as u16).to_le_bytes());
    out.extend_from_slice(&(h.participant as u16).to_le_bytes());
    out.extend_from_slice(&(h.pixels as u32).to_le_bytes());
    out.extend_from_slice(&(h.width as u32).to_le_bytes());
    out.extend_from_slice(&(h.height as u32).to_le_bytes());
    out.extend_from_slice(&h.session_id);
}

fn finish(mut out: Vec<u8>) -> Vec<u8> {
    let crc = crc32fast::hash(&out);
    out.extend_from_slice(&crc.to_le_bytes());
    out
}

fn pack_bits(bits: impl IntoIterator<Item = u8>, out: &mut Vec<u8>) {
    let mut byte = 0u8;
    let mut filled = 0;
    for bit in bits {
        byte |= (bit & 1) << (7 - filled);
        filled += 1;
        if filled == 8 {
            out.push(byte);
            byte = 0;
            filled = 0;
        }
    }
    if filled > 0 {
        out.push(byte);
    }
}

fn unpack_bits(bytes: &[u8], count: usize) -> Vec<u8> {
    (0..count).map(|k| (bytes[k / 8] >> (7 - k % 8)) & 1).collect()
}

pub fn serialize_share(share: &ShareFile) -> Vec<u8> {
    let mut out = Vec::new();
    write_header(
        &mut out,
        SHARE_MAGIC,
        &Header {
            backend: share.backend,
            n: share.n,
            participant: share.participant,
            pixels: share.pixel_count(),
            width: share.width,
            height: share.height,
            session_id: share.session_id,
        },
    );
    match &share.payload {
        SharePayload::Handles(handles) => {
            for h in handles {
                out.extend_from_slice(&h.pixel.to_le_bytes());
                out.extend_from_slice(&h.qubit.to_le_bytes());
            }
        }
        SharePayload::Bits(bits) => pack_bits(bits.iter().copied(), &mut out),
    }
    finish(out)
}

pub fn serialize_session(session: &SessionStore) -> Vec<u8> {
    let mut out = Vec::new();
    write_header(
        &mut out,
        SESSION_MAGIC,
        &Header {
            backend: session.backend,
            n: session.n,
            participant: 0,
            pixels: session.pixel_count(),
            width: session.width,
            height: session.height,
            session_id: session.session_id,
        },
    );
    out.extend_from_slice(&session.master_seed.to_le_bytes());
    match session.backend {
        Backend::StateVector => {
            for r in &session.registers {
                let Register::State(state) = r else {
                    unreachable!("statevector session holds states")
                };
                out.extend_from_slice(&(state.num_qubits() as u16).to_le_bytes());
                for a in state.amplitudes() {
                    out.extend_from_slice(&a.re.to_le_bytes());
                    out.extend_from_slice(&a.im.to_le_bytes());
                }
            }
        }
        Backend::Sampled => {
            let bits = session.registers.iter().flat_map(|r| match r {
                Register::Outcome(o) => o.bits().to_vec(),
                Register::State(_) => unreachable!("sampled session holds outcomes"),
            });
            pack_bits(bits, &mut out);
        }
    }
    finish(out)
}

/// Bounds-checked little-endian reader that names the field it fails on.
struct Reader<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, len: usize, field: &str) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(len).filter(|&e| e <= self.data.len());
        match end {
            Some(end) => {
                let s = &self.data[self.pos..end];
                self.pos = end;
                Ok(s)
            }
            None => Err(Error::format(
                field,
                format!("truncated: need {len} bytes at offset {}", self.pos),
            )),
        }
    }

    fn u8(&mut self, field: &str) -> Result<u8> {
        Ok(self.take(1, field)?[0])
    }

    fn u16(&mut self, field: &str) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2, field)?.try_into().unwrap()))
    }

    fn u32(&mut self, field: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4, field)?.try_into().unwrap()))
    }

    fn u64(&mut self, field: &str) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8, field)?.try_into().unwrap()))
    }

    fn f64(&mut self, field: &str) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8, field)?.try_into().unwrap()))
    }
}

/// Reads and validates the common header plus the trailing checksum.
/// `payload_len` computes the exact body length (excluding header and CRC)
/// from the header, or `None` when the body is self-describing.
fn read_framed<'a>(
    bytes: &'a [u8],
    magic: &[u8; 4],
    payload_len: impl Fn(&Header) -> Option<usize>,
) -> Result<(Header, Reader<'a>)> {
    if bytes.len() < HEADER_LEN + CRC_LEN {
        return Err(Error::format(
            "header",
            format!("truncated: {} bytes, header alone needs {}", bytes.len(), HEADER_LEN + CRC_LEN),
        ));
    }
    let mut r = Reader { data: bytes, pos: 0 };
    let got = r.take(4, "magic")?;
    if got != magic {
        return Err(Error::format(
            "magic",
            format!("expected {:?}, found {:?}", String::from_utf8_lossy(magic), String::from_utf8_lossy(got)),
        ));
    }
    let version = r.u8("version")?;
    if version != FORMAT_VERSION {
        return Err(Error::format("version", format!("unsupported version {version}")));
    }
    let backend_id = r.u8("backend")?;
    let backend = Backend::from_id(backend_id)
        .ok_or_else(|| Error::format("backend", format!("unknown backend id {backend_id}")))?;
    let n = r.u16("n")? as usize;
    if n < 2 || n > backend.max_participants() {
        return Err(Error::format("n", format!("{n} outside 2..={}", backend.max_participants())));
    }
    let participant = r.u16("participant")? as usize;
    let pixels = r.u32("pixel count")? as usize;
    let width = r.u32("width")? as usize;
    let height = r.u32("height")? as usize;
    if width == 0 || height == 0 || width > MAX_DIMENSION || height > MAX_DIMENSION {
        return Err(Error::format("width/height", format!("invalid dimensions {width}x{height}")));
    }
    if pixels != width * height {
        return Err(Error::format(
            "pixel count",
            format!("{pixels} does not equal {width}x{height}"),
        ));
    }
    let session_id: [u8; 16] = r.take(16, "session id")?.try_into().unwrap();
    let header = Header {
        backend,
        n,
        participant,
        pixels,
        width,
        height,
        session_id,
    };

    if let Some(len) = payload_len(&header) {
        let expected = HEADER_LEN + len + CRC_LEN;
        if bytes.len() != expected {
            return Err(Error::format(
                "length",
                format!("{} bytes, header implies {expected}", bytes.len()),
            ));
        }
    }
    let body_end = bytes.len() - CRC_LEN;
    let stored = u32::from_le_bytes(bytes[body_end..].try_into().unwrap());
    let actual = crc32fast::hash(&bytes[..body_end]);
    if stored != actual {
        return Err(Error::format(
            "checksum",
            format!("stored {stored:08x}, computed {actual:08x}"),
        ));
    }
    let body = Reader {
        data: &bytes[..body_end],
        pos: HEADER_LEN,
    };
    Ok((header, body))
}

pub fn deserialize_share(bytes: &[u8]) -> Result<ShareFile> {
    let (h, mut r) = read_framed(bytes, SHARE_MAGIC, |h| {
        Some(match h.backend {
            Backend::StateVector => h.pixels * 6,
            Backend::Sampled => h.pixels.div_ceil(8),
        })
    })?;
    if h.participant == 0 || h.participant > h.n {
        return Err(Error::format(
            "participant",
            format!("{} outside 1..={}", h.participant, h.n),
        ));
    }
    let payload = match h.backend {
        Backend::StateVector => {
            let mut handles = Vec::with_capacity(h.pixels);
            for i in 0..h.pixels {
                let pixel = r.u32("payload")?;
                let qubit = r.u16("payload")?;
                if pixel as usize != i + 1 || qubit as usize != h.participant {
                    return Err(Error::format(
                        "payload",
                        format!(
                            "entry {} is handle ({pixel}, {qubit}), expected ({}, {})",
                            i + 1,
                            i + 1,
                            h.participant
                        ),
                    ));
                }
                handles.push(QubitHandle { pixel, qubit });
            }
            SharePayload::Handles(handles)
        }
        Backend::Sampled => {
            let packed = r.take(h.pixels.div_ceil(8), "payload")?;
            SharePayload::Bits(unpack_bits(packed, h.pixels))
        }
    };
    Ok(ShareFile {
        participant: h.participant,
        n: h.n,
        backend: h.backend,
        width: h.width,
        height: h.height,
        session_id: h.session_id,
        payload,
    })
}

pub fn deserialize_session(bytes: &[u8]) -> Result<SessionStore> {
    let (h, mut r) = read_framed(bytes, SESSION_MAGIC, |h| {
        Some(
            8 + match h.backend {
                Backend::StateVector => h.pixels * (2 + 16 * (1usize << h.n)),
                Backend::Sampled => (h.pixels * h.n).div_ceil(8),
            },
        )
    })?;
    if h.participant != 0 {
        return Err(Error::format("participant", "session header must carry participant 0"));
    }
    let master_seed = r.u64("master seed")?;
    let registers = match h.backend {
        Backend::StateVector => {
            let mut registers = Vec::with_capacity(h.pixels);
            for l in 1..=h.pixels {
                let field = format!("register {l}");
                let qubits = r.u16(&field)? as usize;
                if qubits != h.n {
                    return Err(Error::format(field, format!("{qubits} qubits, expected {}", h.n)));
                }
                let amplitudes = (0..1usize << qubits)
                    .map(|_| Ok(Complex64::new(r.f64(&field)?, r.f64(&field)?)))
                    .collect::<Result<Vec<_>>>()?;
                let state = StateVector::from_amplitudes(amplitudes)
                    .map_err(|e| Error::format(&field, e.to_string()))?;
                registers.push(Register::State(state));
            }
            registers
        }
        Backend::Sampled => {
            let packed = r.take((h.pixels * h.n).div_ceil(8), "payload")?;
            unpack_bits(packed, h.pixels * h.n)
                .chunks(h.n)
                .map(|bits| Register::Outcome(BasisOutcome::new(bits.to_vec()).expect("binary bits")))
                .collect()
        }
    };
    Ok(SessionStore {
        n: h.n,
        backend: h.backend,
        master_seed,
        width: h.width,
        height: h.height,
        session_id: h.session_id,
        registers,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::image::BinaryImage;
    use crate::protocol::share_image;
    use proptest::prelude::*;

    fn table1() -> BinaryImage {
        BinaryImage::new(4, 1, vec![0, 1, 1, 0]).unwrap()
    }

    fn field_of(err: Error) -> String {
        match err {
            Error::Format { at, .. } => at,
            other => panic!("expected format error, got {other}"),
        }
    }

    #[test]
    fn header_layout() {
        let (session, shares) = share_image(&table1(), 3, Backend::StateVector, 1).unwrap();
        let bytes = serialize_session(&session);
        assert_eq!(&bytes[..4], b"QVSE");
        assert_eq!(u32::from_le_bytes(bytes[10..14].try_into().unwrap()), 4);
        let share = serialize_share(&shares[1]);
        assert_eq!(&share[..4], b"QVSS");
        assert_eq!(share[4], FORMAT_VERSION);
        assert_eq!(share[5], 0);
        assert_eq!(u16::from_le_bytes([share[6], share[7]]), 3);
        assert_eq!(u16::from_le_bytes([share[8], share[9]]), 2);
        assert_eq!(share.len(), HEADER_LEN + 4 * 6 + CRC_LEN);
    }

    #[test]
    fn sessions_round_trip() {
        for backend in [Backend::StateVector, Backend::Sampled] {
            let (session, shares) = share_image(&table1(), 3, backend, 8).unwrap();
            assert_eq!(deserialize_session(&serialize_session(&session)).unwrap(), session);
            for s in &shares {
                assert_eq!(&deserialize_share(&serialize_share(s)).unwrap(), s);
            }
        }
    }

    #[test]
    fn corrupt_inputs_name_the_field() {
        let (session, shares) = share_image(&table1(), 3, Backend::Sampled, 8).unwrap();
        let good = serialize_share(&shares[0]);

        let mut bad = good.clone();
        bad[0] = b'X';
        assert_eq!(field_of(deserialize_share(&bad).unwrap_err()), "magic");

        let mut bad = good.clone();
        bad[4] = 9;
        assert_eq!(field_of(deserialize_share(&bad).unwrap_err()), "version");

        let mut bad = good.clone();
        let last = bad.len() - 5;
        bad[last] ^= 0x80;
        assert_eq!(field_of(deserialize_share(&bad).unwrap_err()), "checksum");

        assert_eq!(field_of(deserialize_share(&good[..good.len() - 1]).unwrap_err()), "length");
        assert_eq!(field_of(deserialize_share(&good[..10]).unwrap_err()), "header");

        // a session file is not a share
        let s = serialize_session(&session);
        assert_eq!(field_of(deserialize_share(&s).unwrap_err()), "magic");
        assert_eq!(field_of(deserialize_session(&s[..s.len() - 3]).unwrap_err()), "length");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn any_share_round_trips(
            w in 1usize..=12,
            h in 1usize..=12,
            n in 2usize..=8,
            sampled in any::<bool>(),
            seed in any::<u64>(),
        ) {
            let pixels = (0..w * h).map(|i| (crate::seed::mix64(seed ^ i as u64) & 1) as u8).collect();
            let img = BinaryImage::new(w, h, pixels).unwrap();
            let backend = if sampled { Backend::Sampled } else { Backend::StateVector };
            let (session, shares) = share_image(&img, n, backend, seed).unwrap();
            for s in &shares {
                prop_assert_eq!(&deserialize_share(&serialize_share(s)).unwrap(), s);
            }
            prop_assert_eq!(deserialize_session(&serialize_session(&session)).unwrap(), session);
        }

        #[test]
        fn truncation_never_yields_a_value(cut in 0usize..60, seed in any::<u64>()) {
            let (_, shares) = share_image(&table1(), 3, Backend::StateVector, seed).unwrap();
            let bytes = serialize_share(&shares[0]);
            let cut = cut.min(bytes.len() - 1);
            let is_format_err = matches!(deserialize_share(&bytes[..cut]), Err(Error::Format { .. }));
            prop_assert!(is_format_err);
        }
    }
}
