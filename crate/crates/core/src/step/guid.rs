//! IFC GlobalId: a 128-bit value printed as 22 characters of a custom
//! base-64 alphabet. The first character carries the top two bits.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

pub const ALPHABET: &[u8; 64] =
    b"0123456789ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz_$";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GuidError {
    #[error("GlobalId must be 22 characters, got {0}")]
    Length(usize),
    #[error("invalid GlobalId character {0:?}")]
    Character(char),
    #[error("GlobalId first character must be in '0'..'3', got {0:?}")]
    Overflow(char),
}

/// Encodes 128 bits into the 22-character text form.
pub fn guid_encode(bits: u128) -> String {
    let mut out = [0u8; 22];
    let mut v = bits;
    for slot in out.iter_mut().rev() {
        *slot = ALPHABET[(v & 63) as usize];
        v >>= 6;
    }
    String::from_utf8(out.to_vec()).unwrap()
}

pub fn guid_decode(text: &str) -> Result<u128, GuidError> {
    let bytes = text.as_bytes();
    if bytes.len() != 22 || text.chars().count() != 22 {
        return Err(GuidError::Length(text.chars().count()));
    }
    let mut v: u128 = 0;
    for (i, &b) in bytes.iter().enumerate() {
        let d = ALPHABET
            .iter()
            .position(|&a| a == b)
            .ok_or(GuidError::Character(b as char))? as u128;
        if i == 0 && d > 3 {
            return Err(GuidError::Overflow(b as char));
        }
        v = (v << 6) | d;
    }
    Ok(v)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Guid(u128);

impl Guid {
    pub fn from_bits(bits: u128) -> Self {
        Guid(bits)
    }

    pub fn bits(self) -> u128 {
        self.0
    }
}

impl fmt::Display for Guid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&guid_encode(self.0))
    }
}

impl FromStr for Guid {
    type Err = GuidError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        guid_decode(s).map(Guid)
    }
}

enum Source {
    Os(rand::rngs::ThreadRng),
    Seeded(Box<ChaCha20Rng>),
}

/// Issues GlobalIds that never repeat within the generator's lifetime.
///
/// The default source is the thread-local CSPRNG. [`GuidGenerator::seeded`]
/// gives a reproducible stream for golden-file tests.
pub struct GuidGenerator {
    source: Source,
    issued: HashSet<u128>,
}

impl GuidGenerator {
    pub fn random() -> Self {
        Self {
            source: Source::Os(rand::thread_rng()),
            issued: HashSet::new(),
        }
    }

    pub fn seeded(seed: u64) -> Self {
        Self {
            source: Source::Seeded(Box::new(ChaCha20Rng::seed_from_u64(seed))),
            issued: HashSet::new(),
        }
    }

    pub fn is_seeded(&self) -> bool {
        matches!(self.source, Source::Seeded(_))
    }

    /// Marks an existing id as taken, e.g. after loading a file.
    pub fn reserve(&mut self, guid: Guid) {
        self.issued.insert(guid.0);
    }

    pub fn fresh(&mut self) -> Guid {
        loop {
            let mut buf = [0u8; 16];
            match &mut self.source {
                Source::Os(rng) => rng.fill_bytes(&mut buf),
                Source::Seeded(rng) => rng.fill_bytes(&mut buf),
            }
            let bits = u128::from_be_bytes(buf);
            if self.issued.insert(bits) {
                return Guid(bits);
            }
        }
    }
}

impl Default for GuidGenerator {
    fn default() -> Self {
        Self::random()
    }
}

impl fmt::Debug for GuidGenerator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GuidGenerator")
            .field("seeded", &self.is_seeded())
            .field("issued", &self.issued.len())
            .finish()
    }
}
