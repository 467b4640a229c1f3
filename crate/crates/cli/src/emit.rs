//! Output documents and their CSV/JSON serialization.
//!
//! Values are held in nats until [`Document::rendered`], which converts rate
//! columns to the requested units and rounds every float to 12 significant
//! digits. CSV and JSON are both written from the rendered document, so the
//! JSON re-parses to exactly the rows that the CSV shows.

use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::Path;

use oimac::region::{CornerSet, HRegion, VRegion};
use oimac::report::{BoundReport, Units};
use serde::{Deserialize, Serialize};

use crate::config::Format;
use crate::CliError;

/// What a scalar column measures. Only rates are converted between units.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    Rate,
    Linear,
    Db,
    Count,
}

impl Quantity {
    fn label(self, units: Units) -> &'static str {
        match self {
            Quantity::Rate => units.as_str(),
            Quantity::Linear => "linear",
            Quantity::Db => "dB",
            Quantity::Count => "count",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CornerRow {
    pub rates: Vec<f64>,
    pub label: String,
    pub method: String,
    pub est_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HalfspaceRow {
    pub coeffs: Vec<f64>,
    pub bound: f64,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub x: f64,
    pub value: f64,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    pub method: String,
    pub est_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub name: String,
    pub value: f64,
    pub quantity: Quantity,
    pub method: String,
    pub est_error: f64,
    pub source: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtomRow {
    pub location: f64,
    pub mass: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentRow {
    pub lo: f64,
    pub hi: f64,
    pub density: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Payload {
    Corners { dim: usize, rows: Vec<CornerRow>, warnings: Vec<String> },
    Halfspaces { dim: usize, rows: Vec<HalfspaceRow>, diagnostics: Vec<String> },
    /// `x` is described by `x_name`; `value`, `lower`, `upper` and
    /// `est_error` measure `quantity`.
    Curve { x_name: String, quantity: Quantity, rows: Vec<CurveRow> },
    Report { rows: Vec<ReportRow> },
    Atoms { rows: Vec<AtomRow> },
    Segments { rows: Vec<SegmentRow> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Section {
    pub name: String,
    pub payload: Payload,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Document {
    pub scenario: String,
    pub units: Units,
    pub operating_point: Vec<(String, f64)>,
    pub notes: Vec<String>,
    pub sections: Vec<Section>,
}

impl Document {
    pub fn new(scenario: &str, operating_point: Vec<(String, f64)>) -> Self {
        Self { scenario: scenario.into(), units: Units::Nats, operating_point, notes: Vec::new(), sections: Vec::new() }
    }

    pub fn push(&mut self, name: &str, payload: Payload) {
        self.sections.push(Section { name: name.into(), payload });
    }

    pub fn section(&self, name: &str) -> Option<&Payload> {
        self.sections.iter().find(|s| s.name == name).map(|s| &s.payload)
    }

    /// Copy with rate columns in `units` and all floats rounded to 12
    /// significant digits.
    pub fn rendered(&self, units: Units) -> Document {
        let r = |v: f64| round12(v);
        let rate = |v: f64| round12(units.from_nats(v));
        let sections = self
            .sections
            .iter()
            .map(|s| {
                let payload = match &s.payload {
                    Payload::Corners { dim, rows, warnings } => Payload::Corners {
                        dim: *dim,
                        rows: rows
                            .iter()
                            .map(|c| CornerRow { rates: c.rates.iter().map(|v| rate(*v)).collect(), label: c.label.clone(), method: c.method.clone(), est_error: rate(c.est_error) })
                            .collect(),
                        warnings: warnings.clone(),
                    },
                    Payload::Halfspaces { dim, rows, diagnostics } => Payload::Halfspaces {
                        dim: *dim,
                        rows: rows.iter().map(|h| HalfspaceRow { coeffs: h.coeffs.iter().map(|v| r(*v)).collect(), bound: rate(h.bound), label: h.label.clone() }).collect(),
                        diagnostics: diagnostics.clone(),
                    },
                    Payload::Curve { x_name, quantity, rows } => {
                        let q = |v: f64| if *quantity == Quantity::Rate { rate(v) } else { r(v) };
                        Payload::Curve {
                            x_name: x_name.clone(),
                            quantity: *quantity,
                            rows: rows
                                .iter()
                                .map(|c| CurveRow { x: r(c.x), value: q(c.value), lower: c.lower.map(q), upper: c.upper.map(q), method: c.method.clone(), est_error: q(c.est_error) })
                                .collect(),
                        }
                    }
                    Payload::Report { rows } => Payload::Report {
                        rows: rows
                            .iter()
                            .map(|e| {
                                let q = |v: f64| if e.quantity == Quantity::Rate { rate(v) } else { r(v) };
                                ReportRow { value: q(e.value), est_error: q(e.est_error), ..e.clone() }
                            })
                            .collect(),
                    },
                    Payload::Atoms { rows } => Payload::Atoms { rows: rows.iter().map(|a| AtomRow { location: r(a.location), mass: r(a.mass) }).collect() },
                    Payload::Segments { rows } => Payload::Segments { rows: rows.iter().map(|g| SegmentRow { lo: r(g.lo), hi: r(g.hi), density: r(g.density) }).collect() },
                };
                Section { name: s.name.clone(), payload }
            })
            .collect();
        Document {
            scenario: self.scenario.clone(),
            units,
            operating_point: self.operating_point.iter().map(|(k, v)| (k.clone(), r(*v))).collect(),
            notes: self.notes.clone(),
            sections,
        }
    }
}

/// Round to 12 significant digits.
pub fn round12(v: f64) -> f64 {
    if !v.is_finite() || v == 0.0 {
        return v;
    }
    format!("{v:.11e}").parse().expect("formatted float parses")
}

/// Shortest decimal text of an already rounded value.
fn num(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 {
        "0".into()
    } else if (1e-4..1e15).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

impl From<&VRegion> for Payload {
    fn from(v: &VRegion) -> Self {
        Payload::Corners {
            dim: v.dim,
            rows: v.corners.iter().zip(&v.labels).map(|(c, l)| CornerRow { rates: c.clone(), label: l.clone(), method: "closed_form".into(), est_error: 0.0 }).collect(),
            warnings: Vec::new(),
        }
    }
}

/// Corner payload of a numerically evaluated corner set.
pub fn corner_payload(c: &CornerSet, method: &str) -> Payload {
    Payload::Corners {
        dim: c.points.first().map_or(0, |p| p.len()),
        rows: c.points.iter().zip(&c.labels).map(|(p, l)| CornerRow { rates: p.clone(), label: l.clone(), method: method.into(), est_error: c.est_error }).collect(),
        warnings: c.warnings.clone(),
    }
}

impl From<&HRegion> for Payload {
    fn from(h: &HRegion) -> Self {
        Payload::Halfspaces {
            dim: h.dim,
            rows: h.halfspaces.iter().map(|s| HalfspaceRow { coeffs: s.coeffs.clone(), bound: s.bound, label: s.label.clone() }).collect(),
            diagnostics: h.diagnostics.clone(),
        }
    }
}

impl From<&BoundReport> for Payload {
    fn from(r: &BoundReport) -> Self {
        Payload::Report {
            rows: r
                .entries
                .iter()
                .map(|e| ReportRow { name: e.name.clone(), value: e.value, quantity: Quantity::Rate, method: e.method.clone(), est_error: e.est_error, source: e.source.clone() })
                .collect(),
        }
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// CSV text of one rendered payload.
pub fn payload_csv(p: &Payload, units: Units) -> String {
    let mut out = String::new();
    let u = units.as_str();
    match p {
        Payload::Corners { dim, rows, .. } => {
            let cols: Vec<String> = (1..=*dim).map(|i| format!("r{i}")).collect();
            let _ = writeln!(out, "{},label,units,method,est_error", cols.join(","));
            for c in rows {
                let rates: Vec<String> = c.rates.iter().map(|v| num(*v)).collect();
                let _ = writeln!(out, "{},{},{u},{},{}", rates.join(","), csv_field(&c.label), c.method, num(c.est_error));
            }
        }
        Payload::Halfspaces { dim, rows, .. } => {
            let cols: Vec<String> = (1..=*dim).map(|i| format!("a{i}")).collect();
            let _ = writeln!(out, "{},bound,label,units", cols.join(","));
            for h in rows {
                let coeffs: Vec<String> = h.coeffs.iter().map(|v| num(*v)).collect();
                let _ = writeln!(out, "{},{},{},{u}", coeffs.join(","), num(h.bound), csv_field(&h.label));
            }
        }
        Payload::Curve { rows, .. } => {
            out.push_str("x,value,lower,upper,method,est_error\n");
            let opt = |v: Option<f64>| v.map(num).unwrap_or_default();
            for c in rows {
                let _ = writeln!(out, "{},{},{},{},{},{}", num(c.x), num(c.value), opt(c.lower), opt(c.upper), c.method, num(c.est_error));
            }
        }
        Payload::Report { rows } => {
            out.push_str("name,value,units,method,est_error,source\n");
            for e in rows {
                let _ = writeln!(out, "{},{},{},{},{},{}", csv_field(&e.name), num(e.value), e.quantity.label(units), e.method, num(e.est_error), csv_field(&e.source));
            }
        }
        Payload::Atoms { rows } => {
            out.push_str("location,mass\n");
            for a in rows {
                let _ = writeln!(out, "{},{}", num(a.location), num(a.mass));
            }
        }
        Payload::Segments { rows } => {
            out.push_str("lo,hi,density\n");
            for g in rows {
                let _ = writeln!(out, "{},{},{}", num(g.lo), num(g.hi), num(g.density));
            }
        }
    }
    out
}

/// Write a document. CSV goes to `<out>/<section>.csv` (one file per
/// section); JSON goes to the file `out`. Without `out` everything goes to
/// `sink`, CSV sections preceded by a `# <section>` line.
pub fn emit(doc: &Document, units: Units, format: Format, out: Option<&Path>, sink: &mut dyn Write) -> Result<(), CliError> {
    let doc = doc.rendered(units);
    match (format, out) {
        (Format::Json, path) => {
            let text = serde_json::to_string_pretty(&doc)? + "\n";
            match path {
                Some(p) => {
                    if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                        fs::create_dir_all(dir)?;
                    }
                    fs::write(p, text)?
                }
                None => sink.write_all(text.as_bytes())?,
            }
        }
        (Format::Csv, Some(dir)) => {
            fs::create_dir_all(dir)?;
            for s in &doc.sections {
                fs::write(dir.join(format!("{}.csv", s.name)), payload_csv(&s.payload, units))?;
            }
        }
        (Format::Csv, None) => {
            for (i, s) in doc.sections.iter().enumerate() {
                if i > 0 {
                    sink.write_all(b"\n")?;
                }
                writeln!(sink, "# {}", s.name)?;
                sink.write_all(payload_csv(&s.payload, units).as_bytes())?;
            }
        }
    }
    Ok(())
}
