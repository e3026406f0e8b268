//! Number formatting shared by every writer.

/// Shortest round-trip decimal; switches to exponent form outside
/// `[1e-5, 1e16)` so tiny and huge values stay short.
pub fn num(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || !x.is_finite() || (1e-5..1e16).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

/// C-style `%.<sig>g`: `sig` significant digits, trailing zeros dropped,
/// exponent form with a signed two-digit exponent when the exponent is
/// below -4 or at least `sig`.
pub fn general(x: f64, sig: usize) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sig = sig.max(1);
    let sci = format!("{:.*e}", sig - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= sig as i32 {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (sig as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{:.*}", decimals, x)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn general_matches_printf() {
        assert_eq!(general(14780.0, 4), "1.478e+04");
        assert_eq!(general(-1262.4, 4), "-1262");
        assert_eq!(general(0.8046, 4), "0.8046");
        assert_eq!(general(2691.2, 4), "2691");
        assert_eq!(general(2.399, 4), "2.399");
        assert_eq!(general(0.04009, 4), "0.04009");
        assert_eq!(general(0.000012345, 4), "1.234e-05");
        assert_eq!(general(9999.6, 4), "1e+04");
        assert_eq!(general(1.025e9, 4), "1.025e+09");
        assert_eq!(general(0.5, 4), "0.5");
    }

    #[test]
    fn num_round_trips() {
        for x in [0.0, 464450.0, 0.0605, 1e-9, -3.5e20, 123.456] {
            assert_eq!(num(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(num(464450.0), "464450");
        assert_eq!(num(1e-9), "1e-9");
    }
}
