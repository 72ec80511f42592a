//! Text formats: comma-separated tables, flat `key = value` records and
//! lattice field dumps. Numbers use Rust's shortest round-trip formatting,
//! so every writer is locale independent and byte deterministic.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::operators::ScalarField;

/// A table with a header row, written as CSV with LF line endings.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Table {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn push_numbers(&mut self, row: &[f64]) {
        self.push(row.iter().map(|v| num(*v)).collect());
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    /// Parses one column as numbers.
    pub fn numbers(&self, name: &str) -> Result<Vec<f64>> {
        let c = self
            .column(name)
            .ok_or_else(|| Error::format("table", format!("missing column {name}")))?;
        self.rows
            .iter()
            .map(|r| {
                r[c].parse::<f64>()
                    .map_err(|_| Error::format("table", format!("non-numeric {name} value {:?}", r[c])))
            })
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    pub fn parse_csv(text: &str) -> Result<Table> {
        let mut lines = text.lines().filter(|l| !l.is_empty());
        let header: Vec<String> = lines
            .next()
            .ok_or_else(|| Error::format("table", "empty input"))?
            .split(',')
            .map(str::to_owned)
            .collect();
        let mut rows = Vec::new();
        for (i, line) in lines.enumerate() {
            let row: Vec<String> = line.split(',').map(str::to_owned).collect();
            if row.len() != header.len() {
                return Err(Error::format(
                    "table",
                    format!("row {} has {} fields, header has {}", i + 1, row.len(), header.len()),
                ));
            }
            rows.push(row);
        }
        Ok(Table { header, rows })
    }
}

/// Shortest round-trip decimal form of a number.
pub fn num(v: f64) -> String {
    format!("{v}")
}

/// Ordered `key = value` lines.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FlatRecord {
    pub entries: Vec<(String, String)>,
}

impl FlatRecord {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.entries.push((key.to_owned(), value.to_string()));
        self
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn get_f64(&self, key: &str) -> Result<f64> {
        let v = self
            .get(key)
            .ok_or_else(|| Error::format("record", format!("missing key {key}")))?;
        v.parse()
            .map_err(|_| Error::format("record", format!("{key} is not a number: {v:?}")))
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.entries {
            let _ = writeln!(out, "{k} = {v}");
        }
        out
    }

    pub fn parse(text: &str) -> Result<FlatRecord> {
        let mut rec = FlatRecord::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::format("record", format!("line {} lacks '='", i + 1)))?;
            rec.set(k.trim(), v.trim());
        }
        Ok(rec)
    }
}

/// A field on its full bounding lattice, as read back from a dump.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeDump {
    pub dim: usize,
    pub nx: usize,
    pub ny: usize,
    pub h: f64,
    /// Row-major, `nx * ny` values.
    pub values: Vec<f64>,
}

impl LatticeDump {
    pub fn from_field(u: &ScalarField) -> Self {
        let d = u.domain();
        let (nx, ny) = d.lattice_shape();
        LatticeDump {
            dim: d.dim(),
            nx,
            ny,
            h: d.h(),
            values: u.lattice_values(),
        }
    }

    /// Header `dim nx [ny] h`, then one lattice row per line.
    pub fn to_text(&self) -> String {
        let mut out = if self.dim == 1 {
            format!("{} {} {:e}\n", self.dim, self.nx, self.h)
        } else {
            format!("{} {} {} {:e}\n", self.dim, self.nx, self.ny, self.h)
        };
        for row in self.values.chunks(self.nx) {
            let line: Vec<String> = row.iter().map(|v| format!("{v:e}")).collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<LatticeDump> {
        let bad = |m: &str| Error::format("field dump", m.to_owned());
        let mut tokens = text.split_whitespace();
        let mut next = |what: &str| tokens.next().ok_or_else(|| bad(&format!("missing {what}")));
        let dim: usize = next("dim")?.parse().map_err(|_| bad("bad dim"))?;
        let nx: usize = next("nx")?.parse().map_err(|_| bad("bad nx"))?;
        let ny: usize = match dim {
            1 => 1,
            2 => next("ny")?.parse().map_err(|_| bad("bad ny"))?,
            _ => return Err(bad("dim must be 1 or 2")),
        };
        let h: f64 = next("h")?.parse().map_err(|_| bad("bad h"))?;
        let values: Vec<f64> = tokens
            .map(|t| t.parse::<f64>().map_err(|_| bad(&format!("bad value {t:?}"))))
            .collect::<Result<_>>()?;
        if values.len() != nx * ny {
            return Err(bad(&format!("expected {} values, found {}", nx * ny, values.len())));
        }
        if values.iter().any(|v| !v.is_finite()) || h <= 0.0 {
            return Err(bad("non-finite data"));
        }
        Ok(LatticeDump {
            dim,
            nx,
            ny,
            h,
            values,
        })
    }
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)?;
        }
    }
    std::fs::write(path, text)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{make_domain, Resolution, Shape, ShapeSpec};
    use std::sync::Arc;

    #[test]
    fn csv_round_trip() {
        let mut t = Table::new(["n", "ratio"]);
        t.push_numbers(&[3.0, 1.2825]);
        t.push_numbers(&[50.0, 0.1 + 0.2]);
        let text = t.to_csv();
        assert_eq!(text, "n,ratio\n3,1.2825\n50,0.30000000000000004\n");
        let back = Table::parse_csv(&text).unwrap();
        assert_eq!(back, t);
        assert_eq!(back.numbers("ratio").unwrap()[1], 0.1 + 0.2);
        assert!(Table::parse_csv("a,b\n1\n").is_err());
    }

    #[test]
    fn record_round_trip() {
        let mut r = FlatRecord::new();
        r.set("p", 128.0).set("bc", "clamped").set("lambda", 5.97290125);
        let back = FlatRecord::parse(&r.to_text()).unwrap();
        assert_eq!(back, r);
        assert_eq!(back.get_f64("lambda").unwrap(), 5.97290125);
        assert!(back.get_f64("bc").is_err());
    }

    #[test]
    fn dump_round_trip() {
        let d = Arc::new(
            make_domain(&ShapeSpec::new(Shape::Disk { radius: 1.0 }, Resolution::Spacing(0.25))).unwrap(),
        );
        let u = ScalarField::from_fn(d, |[x, y]| 1.0 - x * x - y * y / 3.0).unwrap();
        let dump = LatticeDump::from_field(&u);
        let text = dump.to_text();
        assert!(text.starts_with("2 "));
        let back = LatticeDump::parse(&text).unwrap();
        assert_eq!(back, dump);
        assert!(LatticeDump::parse("2 3 3 0.1\n1 2 3\n").is_err());
    }
}
