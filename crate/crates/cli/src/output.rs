use std::fmt::Write as _;
use std::path::Path;

use crate::CliError;

/// Shortest round-trip text for a number; empty for NaN.
pub fn num(v: f64) -> String {
    if v.is_nan() { String::new() } else { format!("{v}") }
}

pub fn opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, num)
}

/// Writes a comma-separated table preceded by a provenance comment line.
pub fn write_table(path: &Path, config_hash: &str, seed: u64, header: &[&str], rows: &[Vec<String>]) -> Result<(), CliError> {
    let mut s = String::with_capacity(64 * (rows.len() + 2));
    writeln!(s, "# config_sha256={config_hash} seed={seed}").unwrap();
    writeln!(s, "{}", header.join(",")).unwrap();
    for r in rows {
        debug_assert_eq!(r.len(), header.len());
        writeln!(s, "{}", r.join(",")).unwrap();
    }
    std::fs::write(path, s).map_err(|e| CliError::Runtime(format!("writing {}: {e}", path.display())))
}

pub fn write_json(path: &Path, value: &serde_json::Value) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).expect("JSON values serialise");
    text.push('\n');
    std::fs::write(path, text).map_err(|e| CliError::Runtime(format!("writing {}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for v in [0.1, 1.0 / 3.0, -2.5e-12, 2.3e6] {
            assert_eq!(num(v).parse::<f64>().unwrap(), v);
        }
        assert_eq!(num(f64::NAN), "");
        assert_eq!(opt(None), "");
    }

    #[test]
    fn table_has_comment_and_header() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("t.csv");
        write_table(&p, "abc", 7, &["a", "b"], &[vec!["1".into(), "2".into()]]).unwrap();
        let text = std::fs::read_to_string(&p).unwrap();
        assert_eq!(text, "# config_sha256=abc seed=7\na,b\n1,2\n");
    }
}
