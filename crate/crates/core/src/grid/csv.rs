//! Scalar fields as CSV: a header `# nx ny x0 y0 h`, then `ny` lines of `nx`
//! comma-separated values (grid row `j` on data line `j`). Values are printed
//! in shortest round-trip form so a write/read cycle is lossless.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::{GridDomain, ScalarField};
use crate::error::{Error, Result};

pub fn encode_field_csv(field: &ScalarField) -> String {
    let d = field.domain();
    let mut out = String::with_capacity(d.len() * 12);
    writeln!(out, "# {} {} {} {} {}", d.nx, d.ny, d.x0, d.y0, d.h).unwrap();
    for j in 0..d.ny {
        for i in 0..d.nx {
            if i > 0 {
                out.push(',');
            }
            write!(out, "{}", field.get(i, j)).unwrap();
        }
        out.push('\n');
    }
    out
}

pub fn write_field_csv(path: &Path, field: &ScalarField) -> Result<()> {
    fs::write(path, encode_field_csv(field))?;
    Ok(())
}

pub fn read_field_csv(path: &Path) -> Result<ScalarField> {
    let text = fs::read_to_string(path)?;
    decode_field_csv(&text).map_err(|m| Error::parse(path, m))
}

pub(crate) fn decode_field_csv(text: &str) -> std::result::Result<ScalarField, String> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines.next().ok_or("empty file")?;
    let header = header.trim().strip_prefix('#').ok_or("missing `# nx ny x0 y0 h` header")?;
    let parts: Vec<&str> = header.split_whitespace().collect();
    if parts.len() != 5 {
        return Err(format!("header needs 5 entries, found {}", parts.len()));
    }
    let nx: usize = parts[0].parse().map_err(|_| "bad nx")?;
    let ny: usize = parts[1].parse().map_err(|_| "bad ny")?;
    let x0: f64 = parts[2].parse().map_err(|_| "bad x0")?;
    let y0: f64 = parts[3].parse().map_err(|_| "bad y0")?;
    let h: f64 = parts[4].parse().map_err(|_| "bad h")?;
    let domain = GridDomain::new(x0, y0, h, nx, ny).map_err(|e| e.to_string())?;

    let mut values = Vec::with_capacity(domain.len());
    for j in 0..ny {
        let line = lines.next().ok_or_else(|| format!("expected {ny} rows, found {j}"))?;
        let before = values.len();
        for tok in line.split(',') {
            let v: f64 = tok
                .trim()
                .parse()
                .map_err(|_| format!("row {j}: `{}` is not a number", tok.trim()))?;
            values.push(v);
        }
        if values.len() - before != nx {
            return Err(format!("row {j} has {} values, expected {nx}", values.len() - before));
        }
    }
    if lines.next().is_some() {
        return Err(format!("more than {ny} data rows"));
    }
    ScalarField::new(domain, values).map_err(|e| e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn layout_is_row_per_line() {
        let d = GridDomain::new(-1.0, 0.5, 0.25, 3, 2).unwrap();
        let f = ScalarField::new(d, vec![0.0, 1.5, -2.0, 3.0, 4.0, 1e-7]).unwrap();
        let text = encode_field_csv(&f);
        assert_eq!(text, "# 3 2 -1 0.5 0.25\n0,1.5,-2\n3,4,0.0000001\n");
        assert_eq!(decode_field_csv(&text).unwrap(), f);
    }

    #[test]
    fn malformed_inputs() {
        assert!(decode_field_csv("1,2\n").is_err());
        assert!(decode_field_csv("# 2 1 0 0 1\n1\n").is_err());
        assert!(decode_field_csv("# 2 2 0 0 1\n1,2\n").is_err());
        assert!(decode_field_csv("# 1 1 0 0 1\nnan\n").is_err());
        assert!(decode_field_csv("# 1 1 0 0 1\n1\n2\n").is_err());
    }

    proptest! {
        #[test]
        fn lossless_round_trip(vals in proptest::collection::vec(-1e6f64..1e6, 12), h in 1e-3f64..10.0) {
            let d = GridDomain::new(-3.25, 7.0, h, 4, 3).unwrap();
            let f = ScalarField::new(d, vals).unwrap();
            prop_assert_eq!(decode_field_csv(&encode_field_csv(&f)).unwrap(), f);
        }
    }
}
