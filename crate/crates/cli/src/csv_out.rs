//! Sweep serialization: a fixed-schema CSV with plain decimal numbers at 12
//! significant digits, byte-identical across runs and thread counts.

use keyrate_core::SweepPoint;

pub const SWEEP_HEADER: &str = "distance_km,mu_opt,p_s,s_m,p_exp,eps,gain,bits_per_sec,secure";

const SIG_DIGITS: i32 = 12;

/// Formats a non-negative finite value in plain decimal notation with 12
/// significant digits.
pub fn fmt_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    // Decimal exponent read off the shortest round-trip form; log10 can
    // misplace it by one at exact powers of ten.
    let sci = format!("{x:e}");
    let exp: i32 = sci
        .split('e')
        .nth(1)
        .and_then(|e| e.parse().ok())
        .unwrap_or(0);
    let decimals = (SIG_DIGITS - 1 - exp).max(0) as usize;
    format!("{x:.decimals$}")
}

pub fn sweep_to_csv(points: &[SweepPoint]) -> String {
    let mut out = String::with_capacity(64 * (points.len() + 1));
    out.push_str(SWEEP_HEADER);
    out.push('\n');
    for p in points {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            fmt_sig(p.d_km),
            fmt_sig(p.mu_opt),
            fmt_sig(p.p_s),
            fmt_sig(p.s_m),
            fmt_sig(p.p_exp),
            fmt_sig(p.eps),
            fmt_sig(p.gain),
            fmt_sig(p.bits_per_sec),
            u8::from(p.secure()),
        ));
    }
    out
}

/// Log-spaced distance grid with exact endpoints.
pub fn log_spaced(d_lo: f64, d_hi: f64, n_points: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n_points);
    let log_lo = d_lo.ln();
    let log_hi = d_hi.ln();
    for i in 0..n_points {
        if i == 0 {
            out.push(d_lo);
        } else if i == n_points - 1 {
            out.push(d_hi);
        } else {
            let frac = i as f64 / (n_points - 1) as f64;
            out.push((log_lo + frac * (log_hi - log_lo)).exp());
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plain_decimal_with_twelve_significant_digits() {
        assert_eq!(fmt_sig(0.0), "0");
        assert_eq!(fmt_sig(0.5), "0.500000000000");
        assert_eq!(fmt_sig(123.456), "123.456000000");
        assert_eq!(fmt_sig(1e-5), "0.0000100000000000");
        assert_eq!(fmt_sig(4.2e-3), "0.00420000000000");
        assert_eq!(fmt_sig(1e8), "100000000.000");
    }

    #[test]
    fn formatted_values_round_trip() {
        for &x in &[0.5, 1.0 / 3.0, 2.580785216e-1, 1.704090180e-3, 17.54, 1e-12] {
            let parsed: f64 = fmt_sig(x).parse().unwrap();
            assert!(
                ((parsed - x) / x).abs() < 1e-11,
                "{x} formatted as {} reparses to {parsed}",
                fmt_sig(x)
            );
        }
    }

    #[test]
    fn grid_endpoints_are_exact() {
        let g = log_spaced(1.0, 80.0, 40);
        assert_eq!(g.len(), 40);
        assert_eq!(g[0], 1.0);
        assert_eq!(g[39], 80.0);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
        let two = log_spaced(2.5, 7.5, 2);
        assert_eq!(two, vec![2.5, 7.5]);
    }
}
