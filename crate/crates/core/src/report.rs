//! CSV tables, JSON summaries and two-column plot series.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::experiment::{ApCertificate, ApRow};
use crate::geometry::UnitVector3;
use crate::VERSION;

pub const TOOL_NAME: &str = "boole-bell";

/// Hex SHA-256 of the JSON encoding of `config`.
pub fn config_hash<T: Serialize>(config: &T) -> String {
    let bytes = serde_json::to_vec(config).expect("config serializes");
    let digest = Sha256::digest(&bytes);
    let mut out = String::with_capacity(64);
    for b in digest {
        write!(out, "{b:02x}").expect("string write");
    }
    out
}

/// JSON envelope shared by every command.
#[derive(Debug, Serialize)]
pub struct Summary<'a, C: Serialize, B: Serialize> {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'a str,
    pub seed: u64,
    pub config_hash: String,
    pub config: &'a C,
    pub result: B,
}

impl<'a, C: Serialize, B: Serialize> Summary<'a, C, B> {
    pub fn new(command: &'a str, seed: u64, config: &'a C, result: B) -> Self {
        Self { tool: TOOL_NAME, version: VERSION, command, seed, config_hash: config_hash(config), config, result }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("summary serializes");
        s.push('\n');
        s
    }
}

/// Row-oriented CSV builder with a fixed header.
pub struct Table {
    writer: csv::Writer<Vec<u8>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        let mut writer = csv::Writer::from_writer(Vec::new());
        writer.write_record(header).expect("in-memory write");
        Self { writer }
    }

    pub fn row<I, S>(&mut self, fields: I)
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        self.writer.write_record(fields).expect("in-memory write");
    }

    pub fn finish(self) -> String {
        let bytes = self.writer.into_inner().expect("in-memory flush");
        String::from_utf8(bytes).expect("csv output is utf-8")
    }
}

pub fn vector_field(v: &UnitVector3) -> String {
    serde_json::to_string(v).expect("vector serializes")
}

pub const CORRELATION_HEADER: [&str; 5] = ["direction_alpha", "direction_beta", "n", "correlation", "stderr"];

pub const CERTIFICATE_HEADER: [&str; 9] =
    ["certificate", "axis", "alpha", "target", "estimate", "stderr", "n", "gap", "pass"];

pub fn certificate_rows(table: &mut Table, name: &str, axis: &UnitVector3, rows: &[ApRow]) {
    for r in rows {
        table.row([
            name.to_string(),
            vector_field(axis),
            vector_field(&r.alpha),
            r.target.to_string(),
            r.estimate.to_string(),
            r.stderr.to_string(),
            r.n.to_string(),
            r.gap.to_string(),
            r.pass.to_string(),
        ]);
    }
}

pub fn certificate_csv(name: &str, cert: &ApCertificate) -> String {
    let mut t = Table::new(&CERTIFICATE_HEADER);
    certificate_rows(&mut t, name, &cert.axis_claimed, &cert.rows);
    t.finish()
}

/// Whitespace-separated `(x, y)` series with a commented header line.
pub fn plot_series(x_label: &str, y_label: &str, points: &[(f64, f64)]) -> String {
    let mut out = format!("# {x_label} {y_label}\n");
    for (x, y) in points {
        writeln!(out, "{x} {y}").expect("string write");
    }
    out
}

pub fn write_plot(dir: &Path, series: &str, x_label: &str, y_label: &str, points: &[(f64, f64)]) -> std::io::Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join(format!("{series}.dat")), plot_series(x_label, y_label, points))
}
