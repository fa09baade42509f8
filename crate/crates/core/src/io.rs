//! Shared helpers for the CSV artifacts: every file starts with `# key=value`
//! provenance lines, then a header row.

use std::io::Write;

/// Ordered provenance pairs echoed at the top of each CSV.
pub type Meta = Vec<(String, String)>;

pub fn meta<K: ToString, V: ToString>(pairs: &[(K, V)]) -> Meta {
    pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
}

pub fn write_meta<W: Write>(w: &mut W, meta: &Meta) -> std::io::Result<()> {
    for (k, v) in meta {
        writeln!(w, "# {k}={v}")?;
    }
    Ok(())
}

/// Parses the `# key=value` preamble of a CSV written by this crate.
pub fn read_meta(text: &str) -> Meta {
    text.lines()
        .map_while(|l| l.strip_prefix("# "))
        .filter_map(|l| l.split_once('='))
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect()
}
