//! Deterministic number and CSV formatting.
//!
//! Every CSV cell uses the shortest decimal representation that parses back
//! to the same `f64` (`{:e}`), so emitted tables are byte-stable across runs
//! and lossless under round-trip. Human-readable tables honour `--precision`
//! instead; 17 significant digits or more is equivalent to the shortest
//! round-trip form, so that is what it falls back to.

/// Shortest scientific-notation decimal that round-trips to the same `f64`.
///
/// This is the only formatter used for CSV cells. Non-finite values print
/// as `inf`/`-inf`/`NaN`, which downstream status columns disambiguate.
pub fn fmt_shortest(v: f64) -> String {
    format!("{v:e}")
}

/// `digits` significant decimal digits in scientific notation. At 17 digits
/// an `f64` is already uniquely determined, so anything from there up uses
/// the shortest round-trip form instead of padding with noise digits.
pub fn fmt_digits(v: f64, digits: usize) -> String {
    debug_assert!(digits >= 1);
    if digits >= 17 {
        fmt_shortest(v)
    } else {
        format!("{:.*e}", digits - 1, v)
    }
}

/// Assemble a CSV document: one header row, `\n` line endings (including a
/// trailing newline), no quoting — cells never contain commas here.
pub fn csv_table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut out = String::new();
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        debug_assert_eq!(row.len(), header.len());
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shortest_form_round_trips() {
        for v in [0.0, 0.28, 1.04, 108.90220225132442, 3.6542193107785255e-4] {
            let s = fmt_shortest(v);
            assert_eq!(s.parse::<f64>().unwrap(), v, "{s} does not round-trip");
        }
        assert_eq!(fmt_shortest(f64::INFINITY), "inf");
        assert_eq!(fmt_shortest(0.0), "0e0");
    }

    #[test]
    fn digit_count_is_honoured() {
        assert_eq!(fmt_digits(108.90220225132442, 3), "1.09e2");
        assert_eq!(fmt_digits(0.28, 1), "3e-1");
        // 17+ digits means shortest round-trip, not padded zeros.
        assert_eq!(fmt_digits(0.28, 17), "2.8e-1");
        assert_eq!(fmt_digits(0.28, 40), "2.8e-1");
    }

    #[test]
    fn csv_layout() {
        let table = csv_table(
            &["a", "b"],
            &[
                vec!["1e0".into(), "2e0".into()],
                vec!["3e0".into(), "4e0".into()],
            ],
        );
        assert_eq!(table, "a,b\n1e0,2e0\n3e0,4e0\n");
    }
}
