//! Channel description files.
//!
//! Three shapes are accepted:
//! `{"outputs": [[w0, w1], ...]}`, `{"bec": epsilon}` and `{"bsc": p}`.

use std::fs;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use polar_extrema::{make_bec, make_bsc, Bdmc};
use serde_json::Value;

#[derive(Debug, Clone, PartialEq)]
pub enum ChannelSpecFile {
    Outputs(Vec<(f64, f64)>),
    Bec(f64),
    Bsc(f64),
}

impl ChannelSpecFile {
    pub fn parse_str(text: &str) -> Result<Self> {
        let value: Value = serde_json::from_str(text).context("not valid JSON")?;
        let obj = value
            .as_object()
            .ok_or_else(|| anyhow!("expected a JSON object with one of \"outputs\", \"bec\", \"bsc\""))?;
        let known = ["outputs", "bec", "bsc"];
        if let Some(k) = obj.keys().find(|k| !known.contains(&k.as_str())) {
            bail!("unknown field \"{k}\"");
        }
        let present: Vec<&str> = known.iter().copied().filter(|k| obj.contains_key(*k)).collect();
        match present.as_slice() {
            ["outputs"] => parse_outputs(&obj["outputs"]).map(ChannelSpecFile::Outputs),
            ["bec"] => number(&obj["bec"], "bec").map(ChannelSpecFile::Bec),
            ["bsc"] => number(&obj["bsc"], "bsc").map(ChannelSpecFile::Bsc),
            [] => bail!("missing field: expected one of \"outputs\", \"bec\", \"bsc\""),
            many => bail!("fields {many:?} are mutually exclusive"),
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::parse_str(&text).with_context(|| format!("parsing {}", path.display()))
    }

    pub fn to_channel(&self) -> Result<Bdmc> {
        let ch = match self {
            ChannelSpecFile::Outputs(rows) => Bdmc::new(rows.iter().copied()),
            ChannelSpecFile::Bec(e) => make_bec(*e),
            ChannelSpecFile::Bsc(p) => make_bsc(*p),
        };
        ch.map_err(|e| match self {
            ChannelSpecFile::Outputs(_) => anyhow!("field \"outputs\": {e}"),
            ChannelSpecFile::Bec(_) => anyhow!("field \"bec\": {e}"),
            ChannelSpecFile::Bsc(_) => anyhow!("field \"bsc\": {e}"),
        })
    }
}

fn number(v: &Value, field: &str) -> Result<f64> {
    v.as_f64()
        .ok_or_else(|| anyhow!("field \"{field}\": expected a number, found {v}"))
}

fn parse_outputs(v: &Value) -> Result<Vec<(f64, f64)>> {
    let rows = v
        .as_array()
        .ok_or_else(|| anyhow!("field \"outputs\": expected an array of [w0, w1] rows"))?;
    if rows.is_empty() {
        bail!("field \"outputs\": no rows");
    }
    rows.iter()
        .enumerate()
        .map(|(i, row)| match row.as_array().map(|r| r.as_slice()) {
            Some([a, b]) => {
                let a = number(a, &format!("outputs[{i}][0]"))?;
                let b = number(b, &format!("outputs[{i}][1]"))?;
                Ok((a, b))
            }
            _ => bail!("row outputs[{i}]: expected [w0, w1], found {row}"),
        })
        .collect()
}

/// Loads and validates a channel file in one step.
pub fn load_channel(path: &Path) -> Result<(ChannelSpecFile, Bdmc)> {
    let spec = ChannelSpecFile::load(path)?;
    let ch = spec
        .to_channel()
        .with_context(|| format!("invalid channel in {}", path.display()))?;
    Ok((spec, ch))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shapes() {
        assert_eq!(ChannelSpecFile::parse_str(r#"{"bec": 0.5}"#).unwrap(), ChannelSpecFile::Bec(0.5));
        assert_eq!(ChannelSpecFile::parse_str(r#"{"bsc": 0.1}"#).unwrap(), ChannelSpecFile::Bsc(0.1));
        let s = ChannelSpecFile::parse_str(r#"{"outputs": [[0.7, 0], [0, 0.7], [0.3, 0.3]]}"#).unwrap();
        assert_eq!(s.to_channel().unwrap().len(), 3);
    }

    #[test]
    fn diagnostics_name_the_offender() {
        let e = ChannelSpecFile::parse_str(r#"{"outputs": [[0.5, 0.5], [0.5]]}"#).unwrap_err();
        assert!(e.to_string().contains("outputs[1]"), "{e}");
        let e = ChannelSpecFile::parse_str(r#"{"outputs": [[0.5, "x"]]}"#).unwrap_err();
        assert!(e.to_string().contains("outputs[0][1]"), "{e}");
        let e = ChannelSpecFile::parse_str(r#"{"bec": 0.5, "bsc": 0.1}"#).unwrap_err();
        assert!(e.to_string().contains("mutually exclusive"));
        let e = ChannelSpecFile::parse_str(r#"{"bsc": "a"}"#).unwrap_err();
        assert!(e.to_string().contains("\"bsc\""));
        let e = ChannelSpecFile::parse_str(r#"{"bec": 1.5}"#).unwrap().to_channel().unwrap_err();
        assert!(e.to_string().contains("\"bec\""));
        let e = ChannelSpecFile::parse_str(r#"{"outputs": [[1.2, 0.5], [-0.2, 0.5]]}"#)
            .unwrap()
            .to_channel()
            .unwrap_err();
        assert!(e.to_string().contains("row 0"), "{e}");
        assert!(ChannelSpecFile::parse_str(r#"{"erasure": 0.5}"#).is_err());
    }
}
