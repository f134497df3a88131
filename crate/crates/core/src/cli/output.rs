use std::fs;
use std::path::PathBuf;

use serde_json::{json, Map, Value};

use super::config::{Format, RunConfig};
use crate::error::{Result, StabilityError};

/// One CSV cell; floats are written with 17 significant digits.
#[derive(Debug, Clone)]
pub enum Cell {
    F(f64),
    I(i64),
    S(String),
    B(bool),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::F(x) => format!("{x:.16e}"),
            Cell::I(i) => i.to_string(),
            Cell::S(s) => s.clone(),
            Cell::B(b) => b.to_string(),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::F(x)
    }
}

impl From<i64> for Cell {
    fn from(x: i64) -> Self {
        Cell::I(x)
    }
}

impl From<bool> for Cell {
    fn from(x: bool) -> Self {
        Cell::B(x)
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::S(x.to_string())
    }
}

#[derive(Debug, Clone, Default)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Self {
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        let io = |e: csv::Error| StabilityError::Io(e.to_string());
        w.write_record(&self.header).map_err(io)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render)).map_err(io)?;
        }
        w.into_inner().map_err(|e| StabilityError::Io(e.to_string()))
    }
}

/// Writes the outputs of one command into `config.out`.
pub struct Sink<'a> {
    pub config: &'a RunConfig,
}

impl<'a> Sink<'a> {
    pub fn new(config: &'a RunConfig) -> Result<Self> {
        fs::create_dir_all(&config.out)?;
        Ok(Self { config })
    }

    fn wants(&self, f: Format) -> bool {
        self.config.formats.contains(&f)
    }

    fn path(&self, name: &str) -> PathBuf {
        self.config.out.join(name)
    }

    fn write(&self, name: &str, bytes: &[u8]) -> Result<()> {
        fs::write(self.path(name), bytes)?;
        Ok(())
    }

    pub fn csv(&self, name: &str, table: &Table) -> Result<()> {
        if self.wants(Format::Csv) {
            self.write(&format!("{name}.csv"), &table.to_csv()?)?;
        }
        Ok(())
    }

    /// Writes `{"schema": 1, "command", "config", ...fields}`.
    pub fn json(&self, name: &str, fields: Value) -> Result<()> {
        if self.wants(Format::Json) {
            let v = summary(self.config, fields);
            let mut text = serde_json::to_string_pretty(&v).map_err(|e| StabilityError::Io(e.to_string()))?;
            text.push('\n');
            self.write(&format!("{name}.json"), text.as_bytes())?;
        }
        Ok(())
    }

    pub fn svg(&self, name: &str, plot: &Plot) -> Result<()> {
        if self.wants(Format::Svg) {
            self.write(&format!("{name}.svg"), plot.render().as_bytes())?;
        }
        Ok(())
    }
}

/// JSON summary with the schema tag and the resolved configuration.
pub fn summary(config: &RunConfig, fields: Value) -> Value {
    let mut cfg = Map::new();
    for (k, v) in config.pairs() {
        cfg.insert(k.to_string(), Value::String(v));
    }
    let mut out = Map::new();
    out.insert("schema".into(), json!(1));
    out.insert("command".into(), json!(config.command.name()));
    out.insert("config".into(), Value::Object(cfg));
    if let Value::Object(m) = fields {
        out.extend(m);
    }
    Value::Object(out)
}

/// Finite floats as numbers, everything else as `null`.
pub fn jnum(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        Value::Null
    }
}

/// A bare-bones line plot.
pub struct Plot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_y: bool,
    pub lines: Vec<Vec<(f64, f64)>>,
}

impl Plot {
    pub fn render(&self) -> String {
        const W: f64 = 640.0;
        const H: f64 = 480.0;
        const PAD: f64 = 50.0;
        let tf = |y: f64| if self.log_y { y.max(1e-300).log10() } else { y };
        let pts: Vec<(f64, f64)> = self
            .lines
            .iter()
            .flatten()
            .map(|&(x, y)| (x, tf(y)))
            .filter(|(x, y)| x.is_finite() && y.is_finite())
            .collect();
        let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for &(x, y) in &pts {
            x0 = x0.min(x);
            x1 = x1.max(x);
            y0 = y0.min(y);
            y1 = y1.max(y);
        }
        if pts.is_empty() {
            (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
        }
        if x1 == x0 {
            x1 = x0 + 1.0;
        }
        if y1 == y0 {
            y1 = y0 + 1.0;
        }
        let sx = |x: f64| PAD + (x - x0) / (x1 - x0) * (W - 2.0 * PAD);
        let sy = |y: f64| H - PAD - (y - y0) / (y1 - y0) * (H - 2.0 * PAD);
        let colours = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"];
        let mut s = format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">\n\
             <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n\
             <rect x=\"{PAD}\" y=\"{PAD}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>\n\
             <text x=\"{}\" y=\"30\" text-anchor=\"middle\" font-size=\"16\">{}</text>\n\
             <text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-size=\"12\">{}</text>\n\
             <text x=\"15\" y=\"{}\" font-size=\"12\" transform=\"rotate(-90 15 {})\" text-anchor=\"middle\">{}{}</text>\n\
             <text x=\"{PAD}\" y=\"{}\" font-size=\"10\">{x0:.3}</text>\n\
             <text x=\"{}\" y=\"{}\" font-size=\"10\" text-anchor=\"end\">{x1:.3}</text>\n\
             <text x=\"{}\" y=\"{}\" font-size=\"10\" text-anchor=\"end\">{y0:.3}</text>\n\
             <text x=\"{}\" y=\"{PAD}\" font-size=\"10\" text-anchor=\"end\">{y1:.3}</text>\n",
            W - 2.0 * PAD,
            H - 2.0 * PAD,
            W / 2.0,
            escape(&self.title),
            W / 2.0,
            H - 10.0,
            escape(&self.x_label),
            H / 2.0,
            H / 2.0,
            if self.log_y { "log10 " } else { "" },
            escape(&self.y_label),
            H - PAD + 15.0,
            W - PAD,
            H - PAD + 15.0,
            PAD - 4.0,
            H - PAD,
            PAD - 4.0,
        );
        for (i, line) in self.lines.iter().enumerate() {
            let points: Vec<String> = line
                .iter()
                .map(|&(x, y)| (x, tf(y)))
                .filter(|(x, y)| x.is_finite() && y.is_finite())
                .map(|(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
                .collect();
            s.push_str(&format!(
                "<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.2\" points=\"{}\"/>\n",
                colours[i % colours.len()],
                points.join(" ")
            ));
        }
        s.push_str("</svg>\n");
        s
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
