//! Flat `key = value` configuration text with `#` comments.

use crate::error::{Error, Result};

/// One parsed assignment and the 1-based line it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct Entry {
    pub key: String,
    pub value: String,
    pub line: usize,
}

/// Parses `key = value` lines. Keys are normalized so that `t-max` and
/// `t_max` are the same key. Later assignments override earlier ones.
pub fn parse(text: &str) -> Result<Vec<Entry>> {
    let mut out: Vec<Entry> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            Error::Parse(format!(
                "line {}: expected `key = value`, got `{}`",
                i + 1,
                raw.trim()
            ))
        })?;
        let key = normalize_key(k);
        if key.is_empty() {
            return Err(Error::Parse(format!("line {}: empty key", i + 1)));
        }
        let entry = Entry {
            key,
            value: v.trim().to_string(),
            line: i + 1,
        };
        out.retain(|e| e.key != entry.key);
        out.push(entry);
    }
    Ok(out)
}

pub fn normalize_key(k: &str) -> String {
    k.trim().to_ascii_lowercase().replace('-', "_")
}

/// Parses a float value, naming the key and line on failure.
pub fn parse_f64(e: &Entry) -> Result<f64> {
    e.value.parse::<f64>().map_err(|_| {
        Error::Parse(format!(
            "line {}: key `{}` expects a number, got `{}`",
            e.line, e.key, e.value
        ))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_overrides() {
        let cfg =
            parse("# gadget\ndelta = 1.0\nepsilon=0.05 # small\n\nt-max = 3\ndelta = 2").unwrap();
        assert_eq!(cfg.len(), 3);
        let d = cfg.iter().find(|e| e.key == "delta").unwrap();
        assert_eq!(d.value, "2");
        assert_eq!(d.line, 6);
        assert!(cfg.iter().any(|e| e.key == "t_max"));
    }

    #[test]
    fn reports_line_numbers() {
        let err = parse("a = 1\nbogus line").unwrap_err();
        assert!(err.to_string().contains("line 2"));
        let e = &parse("x = abc").unwrap()[0];
        assert!(parse_f64(e).unwrap_err().to_string().contains("`x`"));
    }
}
