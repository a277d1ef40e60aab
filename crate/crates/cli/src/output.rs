use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use serde_json::{json, Map, Value};

use crate::exit::{CliError, CliResult};

pub const SCHEMA: u32 = 1;

/// Resolved configuration embedded in every artifact.
#[derive(Clone, Debug, Default)]
pub struct Metadata {
    fields: Vec<(String, String)>,
}

impl Metadata {
    pub fn new(command: &str, seed: u64) -> Self {
        let mut m = Self::default();
        m.push("schema", SCHEMA);
        m.push("version", env!("CARGO_PKG_VERSION"));
        m.push("command", command);
        m.push("seed", seed);
        m
    }

    pub fn push(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.fields.push((key.to_string(), value.to_string()));
        self
    }

    pub fn fields(&self) -> &[(String, String)] {
        &self.fields
    }

    /// `# key=value` lines.
    pub fn comment_block(&self) -> String {
        self.fields.iter().map(|(k, v)| format!("# {k}={v}\n")).collect()
    }

    pub fn to_json(&self) -> Value {
        let mut map = Map::new();
        for (k, v) in &self.fields {
            map.insert(k.clone(), Value::String(v.clone()));
        }
        Value::Object(map)
    }

    /// `{"metadata": …, "result": …}`.
    pub fn wrap(&self, result: Value) -> Value {
        json!({ "metadata": self.to_json(), "result": result })
    }
}

pub fn open(path: Option<&Path>) -> CliResult<Box<dyn Write>> {
    Ok(match path {
        Some(p) => {
            Box::new(BufWriter::new(File::create(p).map_err(|e| {
                CliError::input(format!("cannot create {}: {e}", p.display()))
            })?))
        }
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

pub fn write_json(out: &mut dyn Write, value: &Value) -> CliResult<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::input(e.to_string()))?;
    writeln!(out, "{text}")?;
    Ok(())
}
