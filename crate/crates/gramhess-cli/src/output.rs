//! Deterministic text output: round-trip-exact float formatting and the
//! CSV writer for sweeps.

use gramhess::so3::SweepRow;

/// 17-significant-digit scientific notation: enough digits to round-trip
/// any f64, locale-independent, byte-stable across runs and platforms.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub const SWEEP_HEADER: &str = "alpha,set,lambda1,lambda2,lambda3,classification,q0,q1,q2,q3";

/// One CSV line per sweep row; sets without admissible quartic roots get
/// empty numeric fields and the classification `absent`. LF endings.
pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::with_capacity(rows.len() * 96 + 64);
    out.push_str(SWEEP_HEADER);
    out.push('\n');
    for row in rows {
        out.push_str(&fmt_f64(row.alpha));
        out.push(',');
        out.push_str(row.set.as_str());
        match (row.eigenvalues, row.classification, row.quaternion) {
            (Some(eig), Some(class), Some(q)) => {
                for v in eig {
                    out.push(',');
                    out.push_str(&fmt_f64(v));
                }
                out.push(',');
                out.push_str(class.as_str());
                for v in q {
                    out.push(',');
                    out.push_str(&fmt_f64(v));
                }
            }
            _ => out.push_str(",,,,absent,,,,"),
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use gramhess::so3::{Classification, SetLabel};

    #[test]
    fn float_formatting_round_trips() {
        for v in [
            0.0,
            -1.5,
            std::f64::consts::PI,
            1e-300,
            -2.2250738585072014e-308,
            3.0,
        ] {
            let s = fmt_f64(v);
            let back: f64 = s.parse().unwrap();
            assert_eq!(back.to_bits(), v.to_bits(), "{v} -> {s}");
        }
    }

    #[test]
    fn absent_rows_have_empty_numeric_fields() {
        let rows = vec![
            SweepRow {
                alpha: 0.5,
                set: SetLabel::Green,
                eigenvalues: None,
                classification: None,
                quaternion: None,
                closed_form: None,
            },
            SweepRow {
                alpha: 0.5,
                set: SetLabel::Black,
                eigenvalues: Some([-4.0, -2.0, 0.0]),
                classification: Some(Classification::Degenerate),
                quaternion: Some([0.0, 0.0, 1.0, 0.0]),
                closed_form: Some([-4.0, -2.0, 0.0]),
            },
        ];
        let csv = sweep_csv(&rows);
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some(SWEEP_HEADER));
        let absent = lines.next().unwrap();
        assert!(absent.contains(",green,,,,absent,,,,"), "{absent}");
        let black = lines.next().unwrap();
        assert!(black.contains(",black,"), "{black}");
        assert!(black.contains("degenerate"));
    }
}
