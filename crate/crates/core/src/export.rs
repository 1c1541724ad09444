//! Machine-readable output: numbers with 17 significant digits, CSV tables
//! with fixed headers.

use std::io::{self, Write};

/// Scientific notation with 17 significant digits; lossless for `f64`.
/// Non-finite values become `null`, which keeps JSON output valid.
pub fn sig17(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        "null".to_string()
    }
}

/// Writes `header` followed by one line per row.
pub fn write_csv<W, R, const N: usize>(mut out: W, header: &str, rows: R) -> io::Result<()>
where
    W: Write,
    R: IntoIterator<Item = [f64; N]>,
{
    writeln!(out, "{header}")?;
    for row in rows {
        let mut first = true;
        for v in row {
            if !first {
                out.write_all(b",")?;
            }
            first = false;
            out.write_all(sig17(v).as_bytes())?;
        }
        out.write_all(b"\n")?;
    }
    out.flush()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sig17_round_trips() {
        for &x in &[0.1, -2.5e-300, std::f64::consts::PI, 1e22, 0.0] {
            let s = sig17(x);
            assert_eq!(s.parse::<f64>().unwrap(), x);
        }
        assert_eq!(sig17(f64::NAN), "null");
    }

    #[test]
    fn csv_layout() {
        let mut buf = Vec::new();
        write_csv(&mut buf, "t,x,y", vec![[0.0, 1.0, -0.5]]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "t,x,y\n0.0000000000000000e0,1.0000000000000000e0,-5.0000000000000000e-1\n"
        );
    }
}
