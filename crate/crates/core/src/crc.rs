//! Cyclic redundancy check over bit sequences.
//!
//! Bits are processed MSB-first (no reflection). The checksum is the remainder
//! of `M(x)·x^r` divided by the generator, starting from `initial_register`.

use crate::error::{Error, Result};

/// Generator description of a CRC. `polynomial` omits the leading `x^r` term.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CrcSpec {
    width: usize,
    polynomial: u64,
    initial_register: u64,
}

impl CrcSpec {
    /// Largest supported checksum width.
    pub const MAX_WIDTH: usize = 64;

    pub fn new(width: usize, polynomial: u64, initial_register: u64) -> Result<Self> {
        if width > Self::MAX_WIDTH {
            return Err(Error::InvalidParameter(format!(
                "CRC width {width} exceeds {}",
                Self::MAX_WIDTH
            )));
        }
        let mask = width_mask(width);
        if polynomial & !mask != 0 || initial_register & !mask != 0 {
            return Err(Error::InvalidParameter(format!(
                "CRC polynomial/initial register wider than {width} bits"
            )));
        }
        Ok(Self {
            width,
            polynomial,
            initial_register,
        })
    }

    /// Default generator for a given width.
    ///
    /// Widths 6, 8, 11, 16 and 24 use the 3GPP generators (CRC-6, CRC-8, CRC-11,
    /// CRC-16, CRC-24A), 32 uses the IEEE 802.3 generator. Any other width falls
    /// back to `x^r + x + 1`, which still detects every single-bit error and every
    /// burst of length `≤ r`.
    pub fn default_for_width(width: usize) -> Result<Self> {
        let polynomial = match width {
            0 => 0,
            1 => 0x1,
            6 => 0x21,
            8 => 0x9B,
            11 => 0x621,
            16 => 0x1021,
            24 => 0x86_4CFB,
            32 => 0x04C1_1DB7,
            w => 0b11 & width_mask(w),
        };
        Self::new(width, polynomial, 0)
    }

    /// No checksum at all (`r = 0`). Every word checks.
    pub fn none() -> Self {
        Self {
            width: 0,
            polynomial: 0,
            initial_register: 0,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn polynomial(&self) -> u64 {
        self.polynomial
    }

    pub fn initial_register(&self) -> u64 {
        self.initial_register
    }

    fn register_over(&self, bits: &[u8]) -> u64 {
        if self.width == 0 {
            return 0;
        }
        let mask = width_mask(self.width);
        let top = self.width - 1;
        let mut reg = self.initial_register;
        for &b in bits {
            let feedback = ((reg >> top) & 1) ^ u64::from(b & 1);
            reg = (reg << 1) & mask;
            if feedback == 1 {
                reg ^= self.polynomial;
            }
        }
        reg
    }

    /// Checksum bits of `message`, MSB first.
    pub fn checksum(&self, message: &[u8]) -> Vec<u8> {
        let reg = self.register_over(message);
        (0..self.width)
            .rev()
            .map(|i| ((reg >> i) & 1) as u8)
            .collect()
    }

    /// `message` followed by its `r` checksum bits.
    pub fn append(&self, message: &[u8], expected_len: usize) -> Result<Vec<u8>> {
        if message.len() != expected_len {
            return Err(Error::LengthMismatch {
                expected: expected_len,
                got: message.len(),
            });
        }
        let mut word = Vec::with_capacity(message.len() + self.width);
        word.extend_from_slice(message);
        word.extend(self.checksum(message));
        Ok(word)
    }

    /// True iff the remainder of `word` (message followed by checksum) is zero.
    pub fn check(&self, word: &[u8], expected_len: usize) -> Result<bool> {
        if word.len() != expected_len {
            return Err(Error::LengthMismatch {
                expected: expected_len,
                got: word.len(),
            });
        }
        Ok(self.is_valid(word))
    }

    /// Unchecked variant of [`CrcSpec::check`] used on decoder hot paths.
    pub(crate) fn is_valid(&self, word: &[u8]) -> bool {
        if self.width == 0 {
            return true;
        }
        // Feeding a message through the register and then its own checksum
        // leaves the register at zero; any other tail does not.
        let split = word.len().saturating_sub(self.width);
        let (msg, tail) = word.split_at(split);
        self.register_over(msg) == bits_to_u64(tail)
    }
}

fn width_mask(width: usize) -> u64 {
    if width >= 64 {
        u64::MAX
    } else {
        (1u64 << width) - 1
    }
}

fn bits_to_u64(bits: &[u8]) -> u64 {
    bits.iter()
        .fold(0u64, |acc, &b| (acc << 1) | u64::from(b & 1))
}
