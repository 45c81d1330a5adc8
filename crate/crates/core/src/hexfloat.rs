//! Hexadecimal floating-point literals (`0x1.8p-1`) for bit-exact text round trips.

pub fn format_hex(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let bits = x.to_bits();
    let sign = if bits >> 63 == 1 { "-" } else { "" };
    let exp_bits = ((bits >> 52) & 0x7ff) as i64;
    let mant = bits & ((1u64 << 52) - 1);
    if exp_bits == 0 && mant == 0 {
        return format!("{sign}0x0p+0");
    }
    let (lead, exp) = if exp_bits == 0 { (0, -1022) } else { (1, exp_bits - 1023) };
    let mut frac = format!("{mant:013x}");
    while frac.ends_with('0') {
        frac.pop();
    }
    let esign = if exp >= 0 { "+" } else { "" };
    if frac.is_empty() {
        format!("{sign}0x{lead}p{esign}{exp}")
    } else {
        format!("{sign}0x{lead}.{frac}p{esign}{exp}")
    }
}

/// Parses a hexadecimal float; returns `None` on malformed input.
pub fn parse_hex(s: &str) -> Option<f64> {
    let s = s.trim();
    match s {
        "nan" => return Some(f64::NAN),
        "inf" => return Some(f64::INFINITY),
        "-inf" => return Some(f64::NEG_INFINITY),
        _ => {}
    }
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let body = body.strip_prefix("0x").or_else(|| body.strip_prefix("0X"))?;
    let (mantissa, exp) = body.split_once(['p', 'P'])?;
    let exp: i32 = exp.parse().ok()?;
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() || int_part.len() + frac_part.len() > 15 {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let m = u64::from_str_radix(&digits, 16).ok()?;
    let shift = exp - 4 * frac_part.len() as i32;
    // two-step scaling keeps subnormal results exact
    let half = shift / 2;
    let v = (m as f64) * 2f64.powi(half) * 2f64.powi(shift - half);
    Some(if neg { -v } else { v })
}

/// Parses either a decimal or a hexadecimal float.
pub fn parse_float(s: &str) -> Option<f64> {
    let t = s.trim();
    if t.contains("0x") || t.contains("0X") {
        parse_hex(t)
    } else {
        t.parse().ok()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn known_values() {
        assert_eq!(format_hex(0.5), "0x1p-1");
        assert_eq!(format_hex(0.75), "0x1.8p-1");
        assert_eq!(format_hex(-3.0), "-0x1.8p+1");
        assert_eq!(format_hex(0.0), "0x0p+0");
        assert_eq!(parse_hex("0x1.8p-1"), Some(0.75));
    }

    proptest! {
        #[test]
        fn round_trip_bits(bits in any::<u64>()) {
            let x = f64::from_bits(bits);
            prop_assume!(x.is_finite());
            let back = parse_hex(&format_hex(x)).unwrap();
            prop_assert_eq!(back.to_bits(), x.to_bits());
        }
    }
}
