//! CSV and JSON emission with schema versioning.

use std::io::Write;

use serde_json::{Map, Value};

use crate::config::{config_hash, Failure};
use crate::{Common, Format};

pub const SCHEMA_VERSION: u32 = 1;

/// A command's result: a CSV table and a JSON body, emitted together with
/// the resolved config.
pub struct Report {
    pub command: &'static str,
    pub config: Value,
    /// False when a tolerance was overridden.
    pub certifying: bool,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
    pub body: Map<String, Value>,
}

/// Shortest round-trip decimal, scientific outside `[1e-4, 1e15)`; `inf`
/// and `nan` spelled out.
pub fn num(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else if x == 0.0 || (1e-4..1e15).contains(&x.abs()) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

pub fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

impl Report {
    pub fn new(command: &'static str, config: Value, certifying: bool) -> Self {
        Self { command, config, certifying, header: Vec::new(), rows: Vec::new(), body: Map::new() }
    }

    pub fn set(&mut self, key: &str, value: impl serde::Serialize) {
        self.body.insert(key.to_string(), serde_json::to_value(value).expect("report fields serialize"));
    }

    pub fn render(&self, format: Format) -> Result<String, Failure> {
        match format {
            Format::Json => {
                let mut doc = Map::new();
                doc.insert("schema_version".into(), SCHEMA_VERSION.into());
                doc.insert("command".into(), self.command.into());
                doc.insert("certifying".into(), self.certifying.into());
                doc.insert("config".into(), self.config.clone());
                for (k, v) in &self.body {
                    doc.insert(k.clone(), v.clone());
                }
                let mut text = serde_json::to_string_pretty(&Value::Object(doc)).map_err(|e| Failure::Numeric(e.to_string()))?;
                text.push('\n');
                Ok(text)
            }
            Format::Csv => {
                let mut out = format!(
                    "# thermocap {} schema_version={} config={} certifying={}\n",
                    self.command,
                    SCHEMA_VERSION,
                    config_hash(&self.config),
                    self.certifying
                )
                .into_bytes();
                {
                    let mut w = csv::Writer::from_writer(&mut out);
                    w.write_record(&self.header).map_err(|e| Failure::Numeric(e.to_string()))?;
                    for row in &self.rows {
                        w.write_record(row).map_err(|e| Failure::Numeric(e.to_string()))?;
                    }
                    w.flush()?;
                }
                String::from_utf8(out).map_err(|e| Failure::Numeric(e.to_string()))
            }
        }
    }

    pub fn emit(&self, common: &Common, default: Format) -> Result<(), Failure> {
        let text = self.render(common.format.unwrap_or(default))?;
        match &common.output {
            Some(path) => std::fs::write(path, text)?,
            None => std::io::stdout().lock().write_all(text.as_bytes())?,
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers() {
        assert_eq!(num(f64::INFINITY), "inf");
        assert_eq!(num(0.1), "0.1");
        assert_eq!(num(0.0), "0");
        assert_eq!(num(1.5e-9), "1.5e-9");
        assert_eq!(opt(None), "");
    }

    #[test]
    fn csv_has_schema_line() {
        let mut r = Report::new("capacity", serde_json::json!({"noise": [0.1]}), true);
        r.header = vec!["noise", "capacity"];
        r.rows.push(vec![num(0.1), num(1.5)]);
        let text = r.render(Format::Csv).unwrap();
        let mut lines = text.lines();
        assert!(lines.next().unwrap().starts_with("# thermocap capacity schema_version=1 config="));
        assert_eq!(lines.next(), Some("noise,capacity"));
        assert_eq!(lines.next(), Some("0.1,1.5"));
    }

    #[test]
    fn json_has_schema_and_config() {
        let mut r = Report::new("nc", serde_json::json!({"mode": "two-mode"}), false);
        r.set("nc", 0.25);
        let v: Value = serde_json::from_str(&r.render(Format::Json).unwrap()).unwrap();
        assert_eq!(v["schema_version"], 1);
        assert_eq!(v["certifying"], false);
        assert_eq!(v["config"]["mode"], "two-mode");
        assert_eq!(v["nc"], 0.25);
    }
}
