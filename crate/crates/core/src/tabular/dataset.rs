use std::path::Path;
use std::sync::Arc;

use super::schema::{ColumnKind, Schema};
use crate::error::{Error, Result};
use crate::numcore::{Matrix, Rng};

/// Feature rows without targets. Discrete cells hold the category index
/// as an exact integer-valued `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTable {
    schema: Arc<Schema>,
    features: Matrix,
}

impl FeatureTable {
    pub fn new(schema: Arc<Schema>, features: Matrix) -> Result<Self> {
        if features.cols() != schema.feature_count() {
            return Err(Error::Dimension(format!(
                "{} feature columns for a schema with {}",
                features.cols(),
                schema.feature_count()
            )));
        }
        for r in 0..features.rows() {
            check_row(&schema, features.row(r), r)?;
        }
        Ok(FeatureTable { schema, features })
    }

    pub fn schema(&self) -> &Arc<Schema> {
        &self.schema
    }

    pub fn features(&self) -> &Matrix {
        &self.features
    }

    pub fn len(&self) -> usize {
        self.features.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.features.rows() == 0
    }

    pub fn select(&self, indices: &[usize]) -> FeatureTable {
        FeatureTable {
            schema: Arc::clone(&self.schema),
            features: self.features.select_rows(indices),
        }
    }

    pub fn concat(&self, other: &FeatureTable) -> Result<FeatureTable> {
        if self.schema != other.schema {
            return Err(Error::Schema("cannot concatenate tables with different schemas".into()));
        }
        Ok(FeatureTable {
            schema: Arc::clone(&self.schema),
            features: self.features.vstack(&other.features)?,
        })
    }

    /// Numeric design matrix: continuous columns as-is, discrete columns
    /// one-hot expanded in place.
    pub fn one_hot(&self) -> Matrix {
        let width = self.schema.one_hot_width();
        let mut out = Matrix::zeros(self.len(), width);
        for r in 0..self.len() {
            let src = self.features.row(r);
            let dst = out.row_mut(r);
            let mut at = 0;
            for (c, col) in self.schema.features().iter().enumerate() {
                match &col.kind {
                    ColumnKind::Continuous => {
                        dst[at] = src[c];
                        at += 1;
                    }
                    ColumnKind::Discrete { categories } => {
                        dst[at + src[c] as usize] = 1.0;
                        at += categories.len();
                    }
                }
            }
        }
        out
    }
}

fn check_row(schema: &Schema, row: &[f64], index: usize) -> Result<()> {
    for (v, col) in row.iter().zip(schema.features()) {
        match &col.kind {
            ColumnKind::Continuous => {
                if !v.is_finite() {
                    return Err(Error::Parse {
                        row: index,
                        column: col.name.clone(),
                        message: format!("non-finite value {v}"),
                    });
                }
            }
            ColumnKind::Discrete { categories } => {
                if v.fract() != 0.0 || *v < 0.0 || *v >= categories.len() as f64 {
                    return Err(Error::Parse {
                        row: index,
                        column: col.name.clone(),
                        message: format!("category index {v} outside 0..{}", categories.len()),
                    });
                }
            }
        }
    }
    Ok(())
}

/// Feature rows paired with the continuous target (one-way delay in ms).
#[derive(Debug, Clone, PartialEq)]
pub struct TabularDataset {
    table: FeatureTable,
    targets: Vec<f64>,
}

impl TabularDataset {
    pub fn new(table: FeatureTable, targets: Vec<f64>) -> Result<Self> {
        if table.len() != targets.len() {
            return Err(Error::Dimension(format!(
                "{} rows but {} targets",
                table.len(),
                targets.len()
            )));
        }
        if let Some(i) = targets.iter().position(|t| !t.is_finite()) {
            return Err(Error::Parse {
                row: i,
                column: table.schema().target().to_string(),
                message: "non-finite target".into(),
            });
        }
        Ok(TabularDataset { table, targets })
    }

    pub fn schema(&self) -> &Arc<Schema> {
        self.table.schema()
    }

    pub fn table(&self) -> &FeatureTable {
        &self.table
    }

    pub fn features(&self) -> &Matrix {
        self.table.features()
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    pub fn select(&self, indices: &[usize]) -> TabularDataset {
        TabularDataset {
            table: self.table.select(indices),
            targets: indices.iter().map(|&i| self.targets[i]).collect(),
        }
    }

    pub fn concat(&self, other: &TabularDataset) -> Result<TabularDataset> {
        let mut targets = self.targets.clone();
        targets.extend_from_slice(&other.targets);
        Ok(TabularDataset {
            table: self.table.concat(&other.table)?,
            targets,
        })
    }

    /// Bytes needed to retain this data as raw `f64` cells (features + target).
    pub fn raw_bytes(&self) -> u64 {
        (self.len() * (self.schema().feature_count() + 1) * std::mem::size_of::<f64>()) as u64
    }

    /// Writes the rows as CSV in the schema's column order.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path).map_err(|e| csv_io(path, e))?;
        let schema = self.schema();
        w.write_record(schema.csv_header()).map_err(|e| csv_io(path, e))?;
        let mut record: Vec<String> = Vec::with_capacity(schema.feature_count() + 1);
        for r in 0..self.len() {
            record.clear();
            let row = self.features().row(r);
            for (c, col) in schema.features().iter().enumerate() {
                if c == schema.target_position() {
                    record.push(format_float(self.targets[r]));
                }
                record.push(match col.categories() {
                    Some(cats) => cats[row[c] as usize].clone(),
                    None => format_float(row[c]),
                });
            }
            if schema.target_position() == schema.feature_count() {
                record.push(format_float(self.targets[r]));
            }
            w.write_record(&record).map_err(|e| csv_io(path, e))?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }
}

fn format_float(v: f64) -> String {
    // Shortest representation that parses back to the same value.
    format!("{v:?}")
}

fn csv_io(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::Format(format!("{}: {other:?}", path.display())),
    }
}

/// Reads a comma-separated file whose header matches the schema exactly.
pub fn load_csv(path: &Path, schema: &Arc<Schema>) -> Result<TabularDataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_io(path, e))?;
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| csv_io(path, e))?
        .iter()
        .map(str::to_string)
        .collect();
    let expected = schema.csv_header();
    for name in &expected {
        if !header.iter().any(|h| h == name) {
            return Err(Error::Schema(format!(
                "{}: missing column `{name}`",
                path.display()
            )));
        }
    }
    if header.len() != expected.len() || header.iter().zip(&expected).any(|(h, e)| h != e) {
        return Err(Error::Schema(format!(
            "{}: header {:?} does not match schema order {:?}",
            path.display(),
            header,
            expected
        )));
    }

    let nf = schema.feature_count();
    let mut data = Vec::new();
    let mut targets = Vec::new();
    for (row, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| Error::Parse {
            row,
            column: String::new(),
            message: e.to_string(),
        })?;
        let mut feats = schema.features().iter();
        for (field, name) in rec.iter().zip(&expected) {
            if *name == schema.target() {
                targets.push(parse_float(field, row, name)?);
                continue;
            }
            let col = feats.next().expect("header checked");
            match col.categories() {
                None => data.push(parse_float(field, row, name)?),
                Some(cats) => {
                    let idx = cats.iter().position(|c| c == field).ok_or_else(|| Error::Parse {
                        row,
                        column: col.name.clone(),
                        message: format!("unknown category `{field}`"),
                    })?;
                    data.push(idx as f64);
                }
            }
        }
    }
    let n = targets.len();
    let table = FeatureTable::new(Arc::clone(schema), Matrix::from_vec(n, nf, data)?)?;
    TabularDataset::new(table, targets)
}

fn parse_float(field: &str, row: usize, column: &str) -> Result<f64> {
    field
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| Error::Parse {
            row,
            column: column.to_string(),
            message: format!("cannot parse `{field}` as a finite number"),
        })
}

/// Random disjoint partition; the train side gets `floor(n · fraction)` rows.
pub fn split_train_test(
    dataset: &TabularDataset,
    train_fraction: f64,
    rng: &mut Rng,
) -> Result<(TabularDataset, TabularDataset)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::Domain(format!(
            "train fraction {train_fraction} outside (0, 1)"
        )));
    }
    if dataset.is_empty() {
        return Err(Error::Domain("cannot split an empty dataset".into()));
    }
    let n = dataset.len();
    let n_train = ((n as f64) * train_fraction + 1e-9).floor() as usize;
    let perm = rng.permutation(n);
    let (train_idx, test_idx) = perm.split_at(n_train);
    Ok((dataset.select(train_idx), dataset.select(test_idx)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tabular::schema::Column;

    fn schema() -> Arc<Schema> {
        Arc::new(
            Schema::with_trailing_target(
                vec![
                    Column::continuous("x"),
                    Column::discrete("ue", vec!["UE1".into(), "UE2".into(), "UE3".into()]),
                ],
                "owd",
            )
            .unwrap(),
        )
    }

    fn dataset(n: usize) -> TabularDataset {
        let feats = (0..n).flat_map(|i| [i as f64, (i % 3) as f64]).collect();
        let table = FeatureTable::new(schema(), Matrix::from_vec(n, 2, feats).unwrap()).unwrap();
        TabularDataset::new(table, (0..n).map(|i| 1.0 + i as f64).collect()).unwrap()
    }

    #[test]
    fn loads_valid_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("d.csv");
        std::fs::write(&p, "x,ue,owd\n1.5,UE2,4.0\n-2,UE1,5.5\n0,UE3,7\n").unwrap();
        let d = load_csv(&p, &schema()).unwrap();
        assert_eq!(d.len(), 3);
        assert_eq!(d.features().row(0), &[1.5, 1.0]);
        assert_eq!(d.targets(), &[4.0, 5.5, 7.0]);
    }

    #[test]
    fn unknown_category_names_the_row() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("d.csv");
        std::fs::write(&p, "x,ue,owd\n1.5,UE2,4.0\n2,UE9,5.5\n").unwrap();
        match load_csv(&p, &schema()).unwrap_err() {
            Error::Parse { row, column, .. } => {
                assert_eq!(row, 1);
                assert_eq!(column, "ue");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn header_only_file_is_empty_and_missing_columns_fail() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("d.csv");
        std::fs::write(&p, "x,ue,owd\n").unwrap();
        assert!(load_csv(&p, &schema()).unwrap().is_empty());
        std::fs::write(&p, "x,owd\n1,2\n").unwrap();
        assert!(matches!(load_csv(&p, &schema()), Err(Error::Schema(_))));
        std::fs::write(&p, "x,ue,owd\nabc,UE1,2\n").unwrap();
        assert!(matches!(load_csv(&p, &schema()), Err(Error::Parse { row: 0, .. })));
    }

    #[test]
    fn csv_write_read_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("d.csv");
        let d = dataset(7);
        d.write_csv(&p).unwrap();
        assert_eq!(load_csv(&p, &schema()).unwrap(), d);
    }

    #[test]
    fn split_sizes_and_determinism() {
        let d = dataset(10);
        let (tr, te) = split_train_test(&d, 0.7, &mut Rng::new(1)).unwrap();
        assert_eq!((tr.len(), te.len()), (7, 3));
        let (tr2, _) = split_train_test(&d, 0.7, &mut Rng::new(1)).unwrap();
        assert_eq!(tr, tr2);
        let mut all: Vec<f64> = tr.targets().iter().chain(te.targets()).copied().collect();
        all.sort_by(f64::total_cmp);
        assert_eq!(all, d.targets());

        let (a, b) = split_train_test(&dataset(2), 0.5, &mut Rng::new(3)).unwrap();
        assert_eq!((a.len(), b.len()), (1, 1));
        assert!(split_train_test(&d, 1.0, &mut Rng::new(1)).is_err());
        assert!(split_train_test(&d, 0.0, &mut Rng::new(1)).is_err());
    }

    #[test]
    fn one_hot_expansion() {
        let d = dataset(2);
        let m = d.table().one_hot();
        assert_eq!(m.row(0), &[0.0, 1.0, 0.0, 0.0]);
        assert_eq!(m.row(1), &[1.0, 0.0, 1.0, 0.0]);
    }
}
