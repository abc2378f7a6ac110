//! Column-oriented datasets: what the target consumes and what gets sampled.

use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// On-disk layout of a dataset. Samples handed to external commands are
/// written back in the same layout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DatasetFormat {
    /// Comma-separated with a header row.
    Csv,
    /// One text record per line.
    Lines,
    /// Fixed-size binary records.
    Bytes { record_bytes: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub enum ColumnData {
    Numeric(Vec<f64>),
    Categorical { codes: Vec<u32>, levels: Vec<String> },
    Text(Vec<String>),
    Bytes(Vec<Vec<u8>>),
}

impl ColumnData {
    fn len(&self) -> usize {
        match self {
            ColumnData::Numeric(v) => v.len(),
            ColumnData::Categorical { codes, .. } => codes.len(),
            ColumnData::Text(v) => v.len(),
            ColumnData::Bytes(v) => v.len(),
        }
    }

    fn take(&self, rows: &[usize]) -> ColumnData {
        match self {
            ColumnData::Numeric(v) => ColumnData::Numeric(rows.iter().map(|&i| v[i]).collect()),
            ColumnData::Categorical { codes, levels } => ColumnData::Categorical {
                codes: rows.iter().map(|&i| codes[i]).collect(),
                levels: levels.clone(),
            },
            ColumnData::Text(v) => ColumnData::Text(rows.iter().map(|&i| v[i].clone()).collect()),
            ColumnData::Bytes(v) => {
                ColumnData::Bytes(rows.iter().map(|&i| v[i].clone()).collect())
            }
        }
    }

    fn head(&self, k: usize) -> ColumnData {
        match self {
            ColumnData::Numeric(v) => ColumnData::Numeric(v[..k].to_vec()),
            ColumnData::Categorical { codes, levels } => ColumnData::Categorical {
                codes: codes[..k].to_vec(),
                levels: levels.clone(),
            },
            ColumnData::Text(v) => ColumnData::Text(v[..k].to_vec()),
            ColumnData::Bytes(v) => ColumnData::Bytes(v[..k].to_vec()),
        }
    }

    fn cell(&self, row: usize) -> String {
        match self {
            ColumnData::Numeric(v) => v[row].to_string(),
            ColumnData::Categorical { codes, levels } => levels[codes[row] as usize].clone(),
            ColumnData::Text(v) => v[row].clone(),
            ColumnData::Bytes(v) => String::from_utf8_lossy(&v[row]).into_owned(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub name: String,
    pub data: ColumnData,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    columns: Vec<Column>,
    len: usize,
    format: DatasetFormat,
}

impl Dataset {
    pub fn new(columns: Vec<Column>, format: DatasetFormat) -> Result<Self> {
        let len = columns.first().map_or(0, |c| c.data.len());
        if let Some(c) = columns.iter().find(|c| c.data.len() != len) {
            return Err(Error::Precondition(format!(
                "column `{}` has {} rows, expected {len}",
                c.name,
                c.data.len()
            )));
        }
        Ok(Self {
            columns,
            len,
            format,
        })
    }

    /// A single numeric column named `value`.
    pub fn from_values(values: Vec<f64>) -> Self {
        let len = values.len();
        Self {
            columns: vec![Column {
                name: "value".into(),
                data: ColumnData::Numeric(values),
            }],
            len,
            format: DatasetFormat::Csv,
        }
    }

    pub fn from_lines(lines: Vec<String>) -> Self {
        let len = lines.len();
        Self {
            columns: vec![Column {
                name: "line".into(),
                data: ColumnData::Text(lines),
            }],
            len,
            format: DatasetFormat::Lines,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn format(&self) -> DatasetFormat {
        self.format
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn column(&self, name: &str) -> Option<&Column> {
        self.columns.iter().find(|c| c.name == name)
    }

    /// The first numeric column, which is what the built-in targets consume.
    pub fn first_numeric(&self) -> Option<&[f64]> {
        self.columns.iter().find_map(|c| match &c.data {
            ColumnData::Numeric(v) => Some(v.as_slice()),
            _ => None,
        })
    }

    /// Category code per row for a categorical column.
    pub fn categories(&self, name: &str) -> Result<&[u32]> {
        match self.column(name).map(|c| &c.data) {
            Some(ColumnData::Categorical { codes, .. }) => Ok(codes),
            Some(_) => Err(Error::Config(format!(
                "strata column `{name}` is not categorical"
            ))),
            None => Err(Error::Config(format!(
                "strata column `{name}` is not in the dataset"
            ))),
        }
    }

    /// Rows at `rows`, in that order.
    pub fn take(&self, rows: &[usize]) -> Dataset {
        Dataset {
            columns: self
                .columns
                .iter()
                .map(|c| Column {
                    name: c.name.clone(),
                    data: c.data.take(rows),
                })
                .collect(),
            len: rows.len(),
            format: self.format,
        }
    }

    /// First `k` rows, clamped to the dataset length.
    pub fn head(&self, k: usize) -> Dataset {
        let k = k.min(self.len);
        Dataset {
            columns: self
                .columns
                .iter()
                .map(|c| Column {
                    name: c.name.clone(),
                    data: c.data.head(k),
                })
                .collect(),
            len: k,
            format: self.format,
        }
    }

    /// Writes the dataset in its native format.
    pub fn write_native(&self, out: &mut impl Write) -> Result<()> {
        match self.format {
            DatasetFormat::Csv => {
                let mut w = csv::Writer::from_writer(out);
                w.write_record(self.columns.iter().map(|c| c.name.as_str()))
                    .map_err(csv_io)?;
                for row in 0..self.len {
                    w.write_record(self.columns.iter().map(|c| c.data.cell(row)))
                        .map_err(csv_io)?;
                }
                w.flush()?;
            }
            DatasetFormat::Lines => {
                for row in 0..self.len {
                    let line = self.columns.first().map(|c| c.data.cell(row));
                    writeln!(out, "{}", line.unwrap_or_default())?;
                }
            }
            DatasetFormat::Bytes { .. } => {
                for column in &self.columns {
                    if let ColumnData::Bytes(records) = &column.data {
                        for record in records {
                            out.write_all(record)?;
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

fn csv_io(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

fn ingest_error(path: &Path, message: impl Into<String>) -> Error {
    Error::Ingest {
        path: path.display().to_string(),
        message: message.into(),
    }
}

/// Reads a dataset file. CSV columns are numeric when every cell parses as a
/// number and categorical otherwise.
pub fn ingest_dataset(path: &Path, format: DatasetFormat) -> Result<Dataset> {
    let bytes = fs::read(path).map_err(|e| ingest_error(path, e.to_string()))?;
    let dataset = match format {
        DatasetFormat::Csv => parse_csv(path, &bytes)?,
        DatasetFormat::Lines => {
            let text = std::str::from_utf8(&bytes).map_err(|e| {
                ingest_error(path, format!("invalid UTF-8 at byte offset {}", e.valid_up_to()))
            })?;
            Dataset::from_lines(text.lines().map(str::to_owned).collect())
        }
        DatasetFormat::Bytes { record_bytes } => {
            if record_bytes == 0 {
                return Err(ingest_error(path, "record size must be at least 1 byte"));
            }
            let tail = bytes.len() % record_bytes;
            if tail != 0 {
                return Err(ingest_error(
                    path,
                    format!(
                        "truncated record of {tail} bytes at offset {}",
                        bytes.len() - tail
                    ),
                ));
            }
            let records = bytes.chunks(record_bytes).map(<[u8]>::to_vec).collect();
            Dataset::new(
                vec![Column {
                    name: "record".into(),
                    data: ColumnData::Bytes(records),
                }],
                format,
            )?
        }
    };
    if dataset.is_empty() {
        return Err(ingest_error(path, "the dataset has no data rows"));
    }
    Ok(dataset)
}

fn parse_csv(path: &Path, bytes: &[u8]) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(bytes);
    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| ingest_error(path, e.to_string()))?
        .iter()
        .map(|h| h.trim().to_owned())
        .collect();
    if headers.is_empty() || headers.iter().all(String::is_empty) {
        return Err(ingest_error(path, "missing header row"));
    }

    let mut cells: Vec<Vec<String>> = vec![Vec::new(); headers.len()];
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            ingest_error(path, format!("line {line}: {e}"))
        })?;
        for (column, cell) in cells.iter_mut().zip(record.iter()) {
            column.push(cell.trim().to_owned());
        }
    }

    let columns = headers
        .into_iter()
        .zip(cells)
        .map(|(name, raw)| Column {
            name,
            data: infer_column(raw),
        })
        .collect();
    Dataset::new(columns, DatasetFormat::Csv)
}

fn infer_column(raw: Vec<String>) -> ColumnData {
    let numeric: Option<Vec<f64>> = raw.iter().map(|s| s.parse::<f64>().ok()).collect();
    match numeric {
        Some(values) if !values.is_empty() => ColumnData::Numeric(values),
        _ => {
            let mut levels: Vec<String> = Vec::new();
            let mut index: HashMap<String, u32> = HashMap::new();
            let codes = raw
                .into_iter()
                .map(|s| {
                    *index.entry(s.clone()).or_insert_with(|| {
                        levels.push(s);
                        (levels.len() - 1) as u32
                    })
                })
                .collect();
            ColumnData::Categorical { codes, levels }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn file_with(contents: &[u8]) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents).unwrap();
        f
    }

    #[test]
    fn lines_file() {
        let f = file_with(b"alpha\nbeta\ngamma\n");
        let d = ingest_dataset(f.path(), DatasetFormat::Lines).unwrap();
        assert_eq!(d.len(), 3);
    }

    #[test]
    fn csv_types_columns() {
        let f = file_with(b"glucose,age,diabetes\n148,50,pos\n85,31,neg\n183,32,pos\n");
        let d = ingest_dataset(f.path(), DatasetFormat::Csv).unwrap();
        assert_eq!(d.len(), 3);
        assert_eq!(d.first_numeric().unwrap(), [148.0, 85.0, 183.0]);
        assert_eq!(d.categories("diabetes").unwrap(), [0, 1, 0]);
        assert!(d.categories("age").is_err());
        assert!(d.categories("missing").is_err());
    }

    #[test]
    fn header_only_csv_is_an_error() {
        let f = file_with(b"a,b\n");
        let err = ingest_dataset(f.path(), DatasetFormat::Csv).unwrap_err();
        assert!(matches!(err, Error::Ingest { .. }));
    }

    #[test]
    fn ragged_csv_names_the_line() {
        let f = file_with(b"a,b\n1,2\n3\n");
        let err = ingest_dataset(f.path(), DatasetFormat::Csv).unwrap_err();
        assert!(err.to_string().contains("line 3"), "{err}");
    }

    #[test]
    fn byte_records() {
        let f = file_with(&[1, 2, 3, 4, 5, 6]);
        let d = ingest_dataset(f.path(), DatasetFormat::Bytes { record_bytes: 2 }).unwrap();
        assert_eq!(d.len(), 3);
        let err = ingest_dataset(f.path(), DatasetFormat::Bytes { record_bytes: 4 }).unwrap_err();
        assert!(err.to_string().contains("offset 4"), "{err}");
    }

    #[test]
    fn missing_file_is_an_ingest_error() {
        let err = ingest_dataset(Path::new("/nonexistent/data.csv"), DatasetFormat::Csv).unwrap_err();
        assert!(err.is_configuration());
    }

    #[test]
    fn native_csv_round_trip() {
        let f = file_with(b"x,label\n1.5,a\n2,b\n-3,a\n");
        let d = ingest_dataset(f.path(), DatasetFormat::Csv).unwrap();
        let mut buf = Vec::new();
        d.write_native(&mut buf).unwrap();
        let g = file_with(&buf);
        assert_eq!(ingest_dataset(g.path(), DatasetFormat::Csv).unwrap(), d);
    }

    #[test]
    fn head_and_take() {
        let d = Dataset::from_values(vec![10.0, 20.0, 30.0, 40.0]);
        assert_eq!(d.head(2).first_numeric().unwrap(), [10.0, 20.0]);
        assert_eq!(d.head(10).len(), 4);
        assert_eq!(d.take(&[3, 0]).first_numeric().unwrap(), [40.0, 10.0]);
    }
}
