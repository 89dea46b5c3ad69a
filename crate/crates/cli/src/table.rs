//! Plot-ready CSV tables.

use std::fmt::Write as _;

/// One CSV cell. Floats are written with 17 significant digits so they
/// read back bit-exact.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell {
    Int(u64),
    Float(f64),
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as u64)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

fn write_cell(out: &mut String, cell: Cell) {
    match cell {
        Cell::Int(v) => write!(out, "{v}").unwrap(),
        Cell::Float(v) if v.is_nan() => out.push_str("NaN"),
        Cell::Float(v) => write!(out, "{v:.16e}").unwrap(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub name: &'static str,
    pub unit: &'static str,
}

pub const fn col(name: &'static str, unit: &'static str) -> Column {
    Column { name, unit }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultTable {
    /// File name within the output directory.
    pub file_name: String,
    pub title: String,
    pub columns: Vec<Column>,
    rows: Vec<Vec<Cell>>,
}

impl ResultTable {
    pub fn new(
        file_name: impl Into<String>,
        title: impl Into<String>,
        columns: Vec<Column>,
    ) -> Self {
        Self {
            file_name: file_name.into(),
            title: title.into(),
            columns,
            rows: Vec::new(),
        }
    }

    /// Panics if the row width differs from the header.
    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(
            row.len(),
            self.columns.len(),
            "row width in {}",
            self.file_name
        );
        self.rows.push(row);
    }

    pub fn rows(&self) -> &[Vec<Cell>] {
        &self.rows
    }

    /// CSV text. `manifest` is the reference line: a file name, or the
    /// whole manifest inlined in pipe mode.
    pub fn render(&self, manifest: &str) -> String {
        let mut out = String::new();
        writeln!(out, "# {}; manifest: {manifest}", self.title).unwrap();
        out.push_str("# units: ");
        for (k, c) in self.columns.iter().enumerate() {
            if k > 0 {
                out.push_str(", ");
            }
            write!(out, "{}={}", c.name, c.unit).unwrap();
        }
        out.push('\n');
        let header: Vec<&str> = self.columns.iter().map(|c| c.name).collect();
        out.push_str(&header.join(","));
        out.push('\n');
        for row in &self.rows {
            for (k, &cell) in row.iter().enumerate() {
                if k > 0 {
                    out.push(',');
                }
                write_cell(&mut out, cell);
            }
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn render_layout() {
        let mut t = ResultTable::new(
            "c.csv",
            "couplings",
            vec![col("i", "1"), col("coupling", "J_max")],
        );
        t.push(vec![1usize.into(), 0.5.into()]);
        t.push(vec![2usize.into(), f64::NAN.into()]);
        let text = t.render("manifest.json");
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "# couplings; manifest: manifest.json");
        assert_eq!(lines[1], "# units: i=1, coupling=J_max");
        assert_eq!(lines[2], "i,coupling");
        assert_eq!(lines[3], "1,5.0000000000000000e-1");
        assert_eq!(lines[4], "2,NaN");
    }

    #[test]
    fn floats_round_trip() {
        for v in [
            0.1,
            1.0 / 3.0,
            8.660254037844386e-1,
            1e-300,
            -2.5e17,
            f64::MIN_POSITIVE,
        ] {
            let mut s = String::new();
            write_cell(&mut s, Cell::Float(v));
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), v.to_bits());
        }
    }

    #[test]
    #[should_panic]
    fn ragged_row_rejected() {
        let mut t = ResultTable::new("x.csv", "x", vec![col("a", "1")]);
        t.push(vec![1usize.into(), 2usize.into()]);
    }
}
