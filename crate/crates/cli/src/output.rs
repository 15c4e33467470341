//! Serialization helpers: 17-significant-digit floats, CSV rows, flat JSON
//! objects and the metadata comment line.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::Path;

use serde::Serialize;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Round-trip exact decimal form of a double.
pub fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

/// Like [`num`] but non-finite values become JSON `null`.
pub fn json_num(x: f64) -> String {
    if x.is_finite() {
        num(x)
    } else {
        "null".into()
    }
}

#[derive(Default)]
pub struct JsonObject(Vec<(String, String)>);

impl JsonObject {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn num(mut self, key: &str, v: f64) -> Self {
        self.0.push((key.into(), json_num(v)));
        self
    }

    pub fn int(mut self, key: &str, v: u64) -> Self {
        self.0.push((key.into(), v.to_string()));
        self
    }

    pub fn bool(mut self, key: &str, v: bool) -> Self {
        self.0.push((key.into(), v.to_string()));
        self
    }

    pub fn str(mut self, key: &str, v: &str) -> Self {
        self.0.push((key.into(), serde_json::to_string(v).expect("strings serialize")));
        self
    }

    pub fn extend(&mut self, other: JsonObject) {
        self.0.extend(other.0);
    }

    pub fn render(&self) -> String {
        let mut s = String::from("{");
        for (i, (k, v)) in self.0.iter().enumerate() {
            if i > 0 {
                s.push(',');
            }
            let _ = write!(s, "{}:{v}", serde_json::to_string(k).expect("keys serialize"));
        }
        s.push('}');
        s
    }
}

/// Buffered document starting with the `#` metadata line.
pub struct Document {
    text: String,
}

impl Document {
    pub fn new(command: &str, config: &impl Serialize) -> Self {
        let cfg = serde_json::to_string(config).expect("config serializes");
        Self { text: format!("# gprkhs {VERSION} {command} {cfg}\n") }
    }

    pub fn line(&mut self, line: impl AsRef<str>) {
        self.text.push_str(line.as_ref());
        self.text.push('\n');
    }

    pub fn csv_row<S: AsRef<str>>(&mut self, cells: impl IntoIterator<Item = S>) {
        let row: Vec<String> = cells.into_iter().map(|c| c.as_ref().to_string()).collect();
        self.line(row.join(","));
    }

    pub fn write(&self, out: Option<&Path>) -> io::Result<()> {
        match out {
            Some(p) => fs::write(p, &self.text),
            None => {
                let mut stdout = io::stdout().lock();
                stdout.write_all(self.text.as_bytes())?;
                stdout.flush()
            }
        }
    }
}

/// CSV cell for free text: quoted when it contains a separator or quote.
pub fn text_cell(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}
