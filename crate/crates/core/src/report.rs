//! Named bound values with units, method and error, ready for export.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Units {
    #[default]
    Nats,
    Bits,
}

impl Units {
    /// Convert a value held in nats.
    pub fn from_nats(self, nats: f64) -> f64 {
        match self {
            Units::Nats => nats,
            Units::Bits => nats / std::f64::consts::LN_2,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Units::Nats => "nats",
            Units::Bits => "bits",
        }
    }
}

/// One reported number. `value` and `est_error` are always in nats.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundEntry {
    pub name: String,
    pub value: f64,
    pub method: String,
    pub est_error: f64,
    /// Which construction produced the value.
    pub source: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct BoundReport {
    /// Operating point as `(name, value)` pairs, e.g. `("snr1", 31.6)`.
    pub operating_point: Vec<(String, f64)>,
    pub entries: Vec<BoundEntry>,
}

impl BoundReport {
    pub fn new(operating_point: Vec<(String, f64)>) -> Self {
        Self { operating_point, entries: Vec::new() }
    }

    pub fn push(&mut self, name: &str, value: f64, method: &str, est_error: f64, source: &str) {
        self.entries.push(BoundEntry {
            name: name.into(),
            value,
            method: method.into(),
            est_error,
            source: source.into(),
        });
    }

    pub fn get(&self, name: &str) -> Option<&BoundEntry> {
        self.entries.iter().find(|e| e.name == name)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bits_conversion() {
        assert_eq!(Units::Nats.from_nats(2.0), 2.0);
        assert!((Units::Bits.from_nats(std::f64::consts::LN_2) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn lookup_by_name() {
        let mut r = BoundReport::new(vec![("pnr".into(), 2.0)]);
        r.push("upper", 0.3, "closed_form", 0.0, "peak-power upper bound");
        assert_eq!(r.get("upper").unwrap().value, 0.3);
        assert!(r.get("lower").is_none());
    }
}
