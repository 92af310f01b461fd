//! Polar code description, Bhattacharyya construction and the `u·F_N` encoder.
//!
//! Indices are in natural order: `F_N = F^{⊗n}` with `F = [[1,0],[1,1]]` and no
//! bit-reversal permutation. Information positions carry the message followed
//! by its CRC, so the checksum sits in the last `r` unfrozen positions.

use std::fmt::Write as _;

use crate::crc::CrcSpec;
use crate::error::{Error, Result};

/// An `(N, K)` polar code with an outer CRC of width `r`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarCode {
    log2_len: usize,
    frozen: Vec<bool>,
    info_positions: Vec<usize>,
    crc: CrcSpec,
    design_snr_db: f64,
}

impl PolarCode {
    /// Builds a code from an explicit frozen mask (`true` = frozen).
    ///
    /// `K = 0` is accepted here (all positions frozen) as long as `r = 0`.
    pub fn from_frozen_mask(frozen: Vec<bool>, crc: CrcSpec, design_snr_db: f64) -> Result<Self> {
        let n = frozen.len();
        if !n.is_power_of_two() {
            return Err(Error::NotPowerOfTwo(n));
        }
        let info_positions: Vec<usize> = (0..n).filter(|&i| !frozen[i]).collect();
        let k = info_positions.len();
        let r = crc.width();
        if r > k || (r == k && k > 0) {
            return Err(Error::InvalidDimensions { n, k, r });
        }
        Ok(Self {
            log2_len: n.trailing_zeros() as usize,
            frozen,
            info_positions,
            crc,
            design_snr_db,
        })
    }

    /// Code length `N`.
    pub fn len(&self) -> usize {
        self.frozen.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frozen.is_empty()
    }

    /// `n = log2 N`.
    pub fn log2_len(&self) -> usize {
        self.log2_len
    }

    /// Information bits including CRC.
    pub fn k(&self) -> usize {
        self.info_positions.len()
    }

    pub fn crc_width(&self) -> usize {
        self.crc.width()
    }

    /// Payload bits per block, `K − r`.
    pub fn message_len(&self) -> usize {
        self.k() - self.crc.width()
    }

    pub fn rate(&self) -> f64 {
        self.k() as f64 / self.len() as f64
    }

    pub fn frozen_mask(&self) -> &[bool] {
        &self.frozen
    }

    pub fn is_frozen(&self, i: usize) -> bool {
        self.frozen[i]
    }

    /// Unfrozen positions in ascending order.
    pub fn info_positions(&self) -> &[usize] {
        &self.info_positions
    }

    pub fn crc(&self) -> &CrcSpec {
        &self.crc
    }

    pub fn design_snr_db(&self) -> f64 {
        self.design_snr_db
    }

    /// Places `K` information bits into a length-`N` source word.
    pub fn source_word(&self, info: &[u8]) -> Result<Vec<u8>> {
        if info.len() != self.k() {
            return Err(Error::LengthMismatch {
                expected: self.k(),
                got: info.len(),
            });
        }
        let mut u = vec![0u8; self.len()];
        for (&pos, &b) in self.info_positions.iter().zip(info) {
            u[pos] = b;
        }
        Ok(u)
    }

    /// Reads the `K` information bits back out of a source word.
    pub fn extract_info(&self, u: &[u8]) -> Vec<u8> {
        self.info_positions.iter().map(|&i| u[i]).collect()
    }

    /// Message → CRC → source word → codeword.
    pub fn encode_message(&self, message: &[u8]) -> Result<Vec<u8>> {
        let info = self.crc.append(message, self.message_len())?;
        let u = self.source_word(&info)?;
        encode(self, &u)
    }
}

/// Constructs a code whose `K` unfrozen positions are the most reliable bit
/// channels under Bhattacharyya evolution from `z0 = exp(−10^(snr/10))`.
///
/// The CRC uses [`CrcSpec::default_for_width`].
pub fn construct_code(n: usize, k: usize, r: usize, design_snr_db: f64) -> Result<PolarCode> {
    if !n.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(n));
    }
    if k == 0 || k > n || r >= k {
        return Err(Error::InvalidDimensions { n, k, r });
    }
    if !design_snr_db.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "design SNR must be finite, got {design_snr_db}"
        )));
    }
    let crc = CrcSpec::default_for_width(r)?;
    let log_z = bhattacharyya_log(n, design_snr_db);
    let mut order: Vec<usize> = (0..n).collect();
    // most reliable first; among equal parameters prefer the higher index
    order.sort_by(|&a, &b| log_z[a].total_cmp(&log_z[b]).then(b.cmp(&a)));
    let mut frozen = vec![true; n];
    for &i in &order[..k] {
        frozen[i] = false;
    }
    PolarCode::from_frozen_mask(frozen, crc, design_snr_db)
}

/// Natural-log Bhattacharyya parameters of the `n` synthetic bit channels.
///
/// Evaluated in the log domain so that long codes at high design SNR keep a
/// strict ordering instead of underflowing to zero.
pub fn bhattacharyya_log(n: usize, design_snr_db: f64) -> Vec<f64> {
    let mut z = vec![-(10f64.powf(design_snr_db / 10.0))];
    while z.len() < n {
        let mut next = Vec::with_capacity(2 * z.len());
        for &lz in &z {
            // 2z − z² = z(2 − z)
            next.push(lz + (2.0 - lz.exp()).ln());
            next.push(2.0 * lz);
        }
        z = next;
    }
    z
}

/// `x = u·F_N` over GF(2) using the in-place butterfly.
pub fn encode(code: &PolarCode, u: &[u8]) -> Result<Vec<u8>> {
    if u.len() != code.len() {
        return Err(Error::LengthMismatch {
            expected: code.len(),
            got: u.len(),
        });
    }
    let mut x = u.to_vec();
    butterfly(&mut x);
    Ok(x)
}

/// In-place `F^{⊗n}` transform of a power-of-two-length bit slice.
pub fn butterfly(x: &mut [u8]) {
    let n = x.len();
    let mut half = 1;
    while half < n {
        for block in (0..n).step_by(2 * half) {
            for i in block..block + half {
                x[i] ^= x[i + half];
            }
        }
        half *= 2;
    }
}

/// Serializes a code as flat `key = value` text.
pub fn to_code_file(code: &PolarCode) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "N = {}", code.len());
    let _ = writeln!(s, "K = {}", code.k());
    let _ = writeln!(s, "r = {}", code.crc_width());
    let _ = writeln!(s, "design_snr_db = {}", code.design_snr_db);
    let _ = writeln!(s, "crc_polynomial = 0x{:x}", code.crc.polynomial());
    let _ = writeln!(
        s,
        "crc_initial_register = 0x{:x}",
        code.crc.initial_register()
    );
    let _ = writeln!(s, "frozen_mask = {}", mask_to_hex(&code.frozen));
    s
}

/// Parses the format written by [`to_code_file`].
pub fn from_code_file(text: &str) -> Result<PolarCode> {
    let mut n = None;
    let mut k = None;
    let mut r = None;
    let mut snr = None;
    let mut poly = None;
    let mut init = 0u64;
    let mut mask = None;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::CodeFile(format!("line {}: expected key = value", lineno + 1)))?;
        let (key, value) = (key.trim(), value.trim());
        let bad =
            |what: &str| Error::CodeFile(format!("line {}: bad {what} '{value}'", lineno + 1));
        match key {
            "N" => n = Some(value.parse::<usize>().map_err(|_| bad("N"))?),
            "K" => k = Some(value.parse::<usize>().map_err(|_| bad("K"))?),
            "r" => r = Some(value.parse::<usize>().map_err(|_| bad("r"))?),
            "design_snr_db" => snr = Some(value.parse::<f64>().map_err(|_| bad("design_snr_db"))?),
            "crc_polynomial" => poly = Some(parse_hex(value).ok_or_else(|| bad("crc_polynomial"))?),
            "crc_initial_register" => {
                init = parse_hex(value).ok_or_else(|| bad("crc_initial_register"))?
            }
            "frozen_mask" => mask = Some(value.to_string()),
            other => return Err(Error::CodeFile(format!("unknown key '{other}'"))),
        }
    }
    let missing = |key: &str| Error::CodeFile(format!("missing key '{key}'"));
    let n = n.ok_or_else(|| missing("N"))?;
    let k = k.ok_or_else(|| missing("K"))?;
    let r = r.ok_or_else(|| missing("r"))?;
    let snr = snr.ok_or_else(|| missing("design_snr_db"))?;
    let poly = poly.ok_or_else(|| missing("crc_polynomial"))?;
    let mask = mask.ok_or_else(|| missing("frozen_mask"))?;
    if !n.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(n));
    }
    let frozen = hex_to_mask(&mask, n)?;
    let crc = CrcSpec::new(r, poly, init)?;
    let code = PolarCode::from_frozen_mask(frozen, crc, snr)?;
    if code.k() != k {
        return Err(Error::CodeFile(format!(
            "frozen_mask has {} unfrozen positions, K = {k}",
            code.k()
        )));
    }
    Ok(code)
}

fn parse_hex(s: &str) -> Option<u64> {
    let digits = s.strip_prefix("0x").or_else(|| s.strip_prefix("0X"))?;
    u64::from_str_radix(digits, 16).ok()
}

/// Nibble `j` holds positions `4j..4j+4`, position `4j` in the most significant bit.
fn mask_to_hex(mask: &[bool]) -> String {
    mask.chunks(4)
        .map(|chunk| {
            let nibble = chunk
                .iter()
                .enumerate()
                .fold(0u32, |acc, (i, &b)| acc | (u32::from(b) << (3 - i)));
            char::from_digit(nibble, 16).unwrap()
        })
        .collect()
}

fn hex_to_mask(hex: &str, n: usize) -> Result<Vec<bool>> {
    let expected = n.div_ceil(4);
    if hex.len() != expected {
        return Err(Error::CodeFile(format!(
            "frozen_mask has {} hex digits, expected {expected}",
            hex.len()
        )));
    }
    let mut mask = Vec::with_capacity(4 * expected);
    for c in hex.chars() {
        let nibble = c
            .to_digit(16)
            .ok_or_else(|| Error::CodeFile(format!("frozen_mask: bad hex digit '{c}'")))?;
        for i in (0..4).rev() {
            mask.push((nibble >> i) & 1 == 1);
        }
    }
    if mask[n..].iter().any(|&b| b) {
        return Err(Error::CodeFile("frozen_mask: padding bits set".into()));
    }
    mask.truncate(n);
    Ok(mask)
}
