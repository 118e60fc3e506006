//! Table files.
//!
//! JSON: `{schema_version, distribution, i_max, L_max, X[], F[], A[],
//! epsilon_max, checksum}` with every real written as an exact hexadecimal
//! float string (`"0x1.e46a0b8d3a9c2p+2"`), so files round-trip bit-exactly.
//!
//! Binary: `"ZIGT"`, then a payload of version byte, distribution byte,
//! `i_max` and `L_max` as little-endian `u32`, `epsilon_max`, then `X`, `F`
//! and `A` as little-endian `f64`, then the CRC-32 of the payload. The JSON
//! `checksum` field is the same CRC, as eight hex digits.

use serde::{Deserialize, Serialize};

use crate::density::DensityKind;
use crate::error::FormatError;
use crate::tables::ZigguratTables;

pub const SCHEMA_VERSION: u32 = 1;
pub const MAGIC: &[u8; 4] = b"ZIGT";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableFormat {
    Json,
    Binary,
}

/// Formats `v` as a C99-style hexadecimal float.
pub fn format_hex_f64(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    let sign = if v.is_sign_negative() { "-" } else { "" };
    if v.is_infinite() {
        return format!("{sign}inf");
    }
    let bits = v.to_bits();
    let biased = ((bits >> 52) & 0x7ff) as i32;
    let mantissa = bits & ((1u64 << 52) - 1);
    if biased == 0 && mantissa == 0 {
        return format!("{sign}0x0p+0");
    }
    let (lead, exp) = if biased == 0 {
        (0, -1022)
    } else {
        (1, biased - 1023)
    };
    let digits = format!("{mantissa:013x}");
    let digits = digits.trim_end_matches('0');
    if digits.is_empty() {
        format!("{sign}0x{lead}p{exp:+}")
    } else {
        format!("{sign}0x{lead}.{digits}p{exp:+}")
    }
}

/// Parses the output of [`format_hex_f64`] (and other normalized hex floats).
pub fn parse_hex_f64(s: &str) -> Result<f64, FormatError> {
    let bad = || FormatError::HexFloat(s.to_string());
    let (negative, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let signed = |v: f64| if negative { -v } else { v };
    match body {
        "nan" => return Ok(f64::NAN),
        "inf" => return Ok(signed(f64::INFINITY)),
        _ => {}
    }
    let body = body.strip_prefix("0x").ok_or_else(bad)?;
    let (significand, exp) = body.split_once('p').ok_or_else(bad)?;
    let exp: i32 = exp.parse().map_err(|_| bad())?;
    let (lead, frac) = significand.split_once('.').unwrap_or((significand, ""));
    if frac.len() > 13 || !frac.chars().all(|c| c.is_ascii_hexdigit()) {
        return Err(bad());
    }
    let mantissa = if frac.is_empty() {
        0
    } else {
        u64::from_str_radix(frac, 16).map_err(|_| bad())? << (4 * (13 - frac.len()))
    };
    let bits = match lead {
        "1" if (-1022..=1023).contains(&exp) => (((exp + 1023) as u64) << 52) | mantissa,
        "0" if mantissa == 0 => 0,
        "0" if exp == -1022 => mantissa,
        _ => return Err(bad()),
    };
    Ok(signed(f64::from_bits(bits)))
}

#[derive(Debug, Serialize, Deserialize)]
struct TableFile {
    schema_version: u32,
    distribution: String,
    i_max: usize,
    #[serde(rename = "L_max")]
    l_max: usize,
    #[serde(rename = "X")]
    x: Vec<String>,
    #[serde(rename = "F")]
    f: Vec<String>,
    #[serde(rename = "A")]
    a: Vec<String>,
    epsilon_max: String,
    checksum: String,
}

fn kind_code(kind: DensityKind) -> u8 {
    match kind {
        DensityKind::Exponential => 0,
        DensityKind::HalfNormal => 1,
    }
}

fn payload(t: &ZigguratTables) -> Vec<u8> {
    let n = t.x().len();
    let mut out = Vec::with_capacity(18 + 24 * n);
    out.push(SCHEMA_VERSION as u8);
    out.push(kind_code(t.kind()));
    out.extend_from_slice(&(t.i_max() as u32).to_le_bytes());
    out.extend_from_slice(&(t.l_max() as u32).to_le_bytes());
    out.extend_from_slice(&t.epsilon_max().to_le_bytes());
    for v in t.x().iter().chain(t.f()).chain(t.a()) {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn checksum(t: &ZigguratTables) -> u32 {
    crc32fast::hash(&payload(t))
}

pub fn to_json(t: &ZigguratTables) -> String {
    let hex = |v: &[f64]| v.iter().map(|&x| format_hex_f64(x)).collect();
    let file = TableFile {
        schema_version: SCHEMA_VERSION,
        distribution: t.kind().name().to_string(),
        i_max: t.i_max(),
        l_max: t.l_max(),
        x: hex(t.x()),
        f: hex(t.f()),
        a: hex(t.a()),
        epsilon_max: format_hex_f64(t.epsilon_max()),
        checksum: format!("{:08x}", checksum(t)),
    };
    serde_json::to_string_pretty(&file).expect("table file always serializes")
}

pub fn from_json(text: &str) -> Result<ZigguratTables, FormatError> {
    let file: TableFile = serde_json::from_str(text)?;
    if file.schema_version != SCHEMA_VERSION {
        return Err(FormatError::UnsupportedVersion(file.schema_version));
    }
    let kind = DensityKind::from_name(&file.distribution)
        .ok_or_else(|| FormatError::UnknownDistribution(file.distribution.clone()))?;
    let parse = |v: &[String]| {
        v.iter()
            .map(|s| parse_hex_f64(s))
            .collect::<Result<Vec<_>, _>>()
    };
    let (x, f, a) = (parse(&file.x)?, parse(&file.f)?, parse(&file.a)?);
    if x.len() != file.l_max + 1 {
        return Err(FormatError::Malformed(format!(
            "L_max {} but {} X entries",
            file.l_max,
            x.len()
        )));
    }
    let epsilon = parse_hex_f64(&file.epsilon_max)?;
    let tables = ZigguratTables::from_parts(kind, file.i_max, x, f, a, epsilon)
        .map_err(FormatError::Malformed)?;
    let stored = u32::from_str_radix(&file.checksum, 16)
        .map_err(|_| FormatError::Malformed(format!("checksum `{}`", file.checksum)))?;
    let computed = checksum(&tables);
    if stored != computed {
        return Err(FormatError::Checksum { stored, computed });
    }
    Ok(tables)
}

pub fn to_binary(t: &ZigguratTables) -> Vec<u8> {
    let body = payload(t);
    let mut out = Vec::with_capacity(body.len() + 8);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&body);
    out.extend_from_slice(&crc32fast::hash(&body).to_le_bytes());
    out
}

pub fn from_binary(bytes: &[u8]) -> Result<ZigguratTables, FormatError> {
    let short = || FormatError::Malformed("truncated binary table".into());
    let rest = bytes
        .strip_prefix(MAGIC.as_slice())
        .ok_or(FormatError::BadMagic)?;
    if rest.len() < 4 {
        return Err(short());
    }
    let (body, crc) = rest.split_at(rest.len() - 4);
    let stored = u32::from_le_bytes(crc.try_into().unwrap());
    let computed = crc32fast::hash(body);
    if stored != computed {
        return Err(FormatError::Checksum { stored, computed });
    }
    if body.len() < 18 {
        return Err(short());
    }
    if body[0] as u32 != SCHEMA_VERSION {
        return Err(FormatError::UnsupportedVersion(body[0] as u32));
    }
    let kind = match body[1] {
        0 => DensityKind::Exponential,
        1 => DensityKind::HalfNormal,
        other => return Err(FormatError::UnknownDistribution(format!("code {other}"))),
    };
    let i_max = u32::from_le_bytes(body[2..6].try_into().unwrap()) as usize;
    let l_max = u32::from_le_bytes(body[6..10].try_into().unwrap()) as usize;
    let epsilon = f64::from_le_bytes(body[10..18].try_into().unwrap());
    let n = l_max + 1;
    let reals = &body[18..];
    if reals.len() != 24 * n {
        return Err(FormatError::Malformed(format!(
            "expected {} array bytes for L_max {l_max}, found {}",
            24 * n,
            reals.len()
        )));
    }
    let column = |k: usize| -> Vec<f64> {
        reals[8 * n * k..8 * n * (k + 1)]
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect()
    };
    ZigguratTables::from_parts(kind, i_max, column(0), column(1), column(2), epsilon)
        .map_err(FormatError::Malformed)
}

pub fn serialize_tables(t: &ZigguratTables, format: TableFormat) -> Vec<u8> {
    match format {
        TableFormat::Json => to_json(t).into_bytes(),
        TableFormat::Binary => to_binary(t),
    }
}

/// Reads either format, telling them apart by the magic header.
pub fn deserialize_tables(bytes: &[u8]) -> Result<ZigguratTables, FormatError> {
    if bytes.starts_with(MAGIC) {
        from_binary(bytes)
    } else {
        let text = std::str::from_utf8(bytes)
            .map_err(|_| FormatError::Malformed("neither ZIGT binary nor UTF-8 JSON".into()))?;
        from_json(text)
    }
}
