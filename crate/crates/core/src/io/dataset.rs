use crate::error::{LbsError, Result};
use crate::simstudy::fmt17;
use std::collections::HashSet;
use std::io::{Read, Write};
use std::path::Path;

/// Rectangular table of named numeric columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    names: Vec<String>,
    columns: Vec<Vec<f64>>,
}

impl Dataset {
    pub fn new(names: Vec<String>, columns: Vec<Vec<f64>>) -> Result<Self> {
        if names.len() != columns.len() {
            return Err(LbsError::InvalidParameter("name and column counts differ".into()));
        }
        let mut seen = HashSet::new();
        for name in &names {
            if !seen.insert(name.as_str()) {
                return Err(LbsError::InvalidParameter(format!("duplicate column '{name}'")));
            }
        }
        if let Some(first) = columns.first() {
            if columns.iter().any(|c| c.len() != first.len()) {
                return Err(LbsError::InvalidParameter("columns differ in length".into()));
            }
        }
        Ok(Dataset { names, columns })
    }

    pub fn n(&self) -> usize {
        self.columns.first().map_or(0, |c| c.len())
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn column(&self, name: &str) -> Result<&[f64]> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| self.columns[i].as_slice())
            .ok_or_else(|| LbsError::Config(format!("column '{name}' not found")))
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.names)?;
        for i in 0..self.n() {
            w.write_record(self.columns.iter().map(|c| fmt17(c[i])))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_path(&self, path: &Path) -> Result<()> {
        self.write_csv(std::fs::File::create(path)?)
    }
}

/// Reads a header row and numeric cells. Rows are numbered from 1 for the
/// first data row.
pub fn ingest_reader<R: Read>(input: R) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(input);
    let headers = rdr.headers()?.clone();
    if headers.is_empty() || (headers.len() == 1 && headers[0].is_empty()) {
        return Err(LbsError::Parse {
            row: 0,
            column: String::new(),
            message: "empty file or missing header".into(),
        });
    }
    let names: Vec<String> = headers.iter().map(str::to_string).collect();
    let mut seen = HashSet::new();
    for name in &names {
        if name.is_empty() || !seen.insert(name.as_str()) {
            return Err(LbsError::Parse {
                row: 0,
                column: name.clone(),
                message: if name.is_empty() {
                    "empty header"
                } else {
                    "duplicate header"
                }
                .into(),
            });
        }
    }
    let mut columns = vec![Vec::new(); names.len()];
    for (r, rec) in rdr.records().enumerate() {
        let row = r + 1;
        let rec = rec.map_err(|e| LbsError::Parse {
            row,
            column: String::new(),
            message: e.to_string(),
        })?;
        for (j, cell) in rec.iter().enumerate() {
            let v: f64 = cell.parse().map_err(|_| LbsError::Parse {
                row,
                column: names[j].clone(),
                message: format!("'{cell}' is not a number"),
            })?;
            if !v.is_finite() {
                return Err(LbsError::Parse {
                    row,
                    column: names[j].clone(),
                    message: format!("'{cell}' is not finite"),
                });
            }
            columns[j].push(v);
        }
    }
    if columns[0].is_empty() {
        return Err(LbsError::Parse {
            row: 1,
            column: String::new(),
            message: "no data rows".into(),
        });
    }
    Dataset::new(names, columns)
}

pub fn ingest_csv(path: &Path) -> Result<Dataset> {
    ingest_reader(std::fs::File::open(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_file() {
        let d = ingest_reader("a,b\n1,2\n3.5,-4e-3\n".as_bytes()).unwrap();
        assert_eq!(d.n(), 2);
        assert_eq!(d.column("b").unwrap(), &[2.0, -4e-3]);
        assert!(d.column("c").is_err());
    }

    #[test]
    fn na_cell_names_location() {
        let err = ingest_reader("a,b\n1,2\n3,NA\n".as_bytes()).unwrap_err();
        match err {
            LbsError::Parse { row, column, .. } => assert_eq!((row, column.as_str()), (2, "b")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn structural_errors() {
        assert!(matches!(
            ingest_reader("".as_bytes()),
            Err(LbsError::Parse { row: 0, .. })
        ));
        assert!(matches!(
            ingest_reader("a,a\n1,2\n".as_bytes()),
            Err(LbsError::Parse { row: 0, .. })
        ));
        assert!(matches!(ingest_reader("a,b\n".as_bytes()), Err(LbsError::Parse { .. })));
        assert!(matches!(
            ingest_reader("a,b\n1,2\n3\n".as_bytes()),
            Err(LbsError::Parse { row: 2, .. })
        ));
    }

    #[test]
    fn round_trip_full_precision() {
        let vals = vec![0.1 + 0.2, std::f64::consts::PI, 1e-300, -123_456.789_012_345_67, 5e300];
        let d = Dataset::new(vec!["x".into()], vec![vals.clone()]).unwrap();
        let mut buf = Vec::new();
        d.write_csv(&mut buf).unwrap();
        let back = ingest_reader(buf.as_slice()).unwrap();
        assert_eq!(back.column("x").unwrap(), vals.as_slice());
    }
}
