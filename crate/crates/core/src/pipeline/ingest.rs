//! CSV ingestion, discretisation and the group-wise TV feature table.

use std::path::Path;
use std::sync::Arc;

use serde::Serialize;

use crate::distributions::{tv_distance, Point, Support};
use crate::error::{Error, Result};
use crate::pipeline::config::RunConfig;
use crate::projection::{tuple_support, Table, WeightedDataset, WeightedRow};

/// Reads a headered CSV file; cells are trimmed.
pub fn read_table(path: &Path) -> Result<Table> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_table_from(file)
}

pub fn read_table_from<R: std::io::Read>(reader: R) -> Result<Table> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers()?.iter().map(str::to_string).collect();
    let records = rdr
        .records()
        .map(|r| r.map(|rec| rec.iter().map(str::to_string).collect()))
        .collect::<std::result::Result<_, _>>()?;
    Ok(Table { headers, records })
}

/// Rounds `value` to `decimals` places (negative values round to tens,
/// hundreds, ...).
pub fn round_to(value: f64, decimals: i32) -> f64 {
    let scale = 10f64.powi(decimals);
    let r = (value * scale).round() / scale;
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

/// Rewrites the configured columns with their rounded values.
pub fn round_columns(table: &mut Table, config: &RunConfig) -> Result<()> {
    for (name, &decimals) in &config.rounding {
        let c = table.column(name)?;
        let vals = table.numeric(name)?;
        for (rec, v) in table.records.iter_mut().zip(vals) {
            rec[c] = round_to(v, decimals).to_string();
        }
    }
    Ok(())
}

/// Keeps the rows whose group value is one of the two configured values.
pub fn filter_groups(table: &Table, config: &RunConfig) -> Result<Table> {
    let Some(gc) = &config.group_column else {
        return Ok(table.clone());
    };
    let c = table
        .column(gc)
        .map_err(|_| Error::MissingColumn(gc.clone()))?;
    let records = table
        .records
        .iter()
        .filter(|r| config.group_values.iter().any(|g| r.get(c) == Some(g)))
        .cloned()
        .collect();
    Ok(Table {
        headers: table.headers.clone(),
        records,
    })
}

fn require(table: &Table, name: &str) -> Result<usize> {
    table
        .column(name)
        .map_err(|_| Error::MissingColumn(name.to_string()))
}

/// Builds a dataset from an already group-filtered table. The support is the
/// set of observed (rounded) adjusted-feature tuples.
pub fn dataset_from_table(table: &Table, config: &RunConfig) -> Result<WeightedDataset> {
    if config.adjusted_columns.is_empty() {
        return Err(Error::Config("no adjusted columns configured".into()));
    }
    for name in &config.adjusted_columns {
        require(table, name)?;
    }
    let group = config
        .group_column
        .as_deref()
        .map(|c| require(table, c))
        .transpose()?;
    let label = config
        .label_column
        .as_deref()
        .map(|c| require(table, c))
        .transpose()?;
    let score_col = config
        .score_column
        .as_deref()
        .map(|c| require(table, c))
        .transpose()?;
    let weight_col = config
        .weight_column
        .as_deref()
        .map(|c| require(table, c))
        .transpose()?;
    if table.records.is_empty() {
        return Err(Error::EmptyDataset);
    }

    let support = Arc::new(tuple_support(table, &config.adjusted_columns)?);
    let points = table.points(&config.adjusted_columns)?;
    let scores = match &config.score_column {
        Some(c) => Some(table.numeric(c)?),
        None => None,
    };
    let weights = match &config.weight_column {
        Some(c) => Some(table.numeric(c)?),
        None => None,
    };

    let reserved: Vec<usize> = config
        .adjusted_columns
        .iter()
        .filter_map(|c| table.column(c).ok())
        .chain([group, label, score_col, weight_col].into_iter().flatten())
        .collect();
    let neutral: Vec<usize> = (0..table.headers.len())
        .filter(|c| !reserved.contains(c))
        .collect();
    let neutral_columns = neutral.iter().map(|&c| table.headers[c].clone()).collect();

    let mut rows = Vec::with_capacity(table.records.len());
    for (r, (rec, point)) in table.records.iter().zip(&points).enumerate() {
        let s = match group {
            Some(c) => {
                let v = &rec[c];
                let g = config
                    .group_values
                    .iter()
                    .position(|gv| gv == v)
                    .ok_or_else(|| Error::ParseError {
                        row: r + 1,
                        column: table.headers[c].clone(),
                        message: format!(
                            "group value {v:?} is not one of {:?}",
                            config.group_values
                        ),
                    })?;
                Some(g as u8)
            }
            None => None,
        };
        let y = label.map(|c| u8::from(config.positive_labels.iter().any(|p| *p == rec[c])));
        rows.push(WeightedRow {
            x: support
                .index_of(point)
                .expect("observed support holds every point"),
            u: neutral.iter().map(|&c| rec[c].clone()).collect(),
            s,
            y,
            score: scores.as_ref().map(|v| v[r]),
            w: weights.as_ref().map_or(1.0, |v| v[r]),
            origin: r,
        });
    }
    WeightedDataset::new(support, neutral_columns, rows)
}

/// Reads, group-filters, rounds and converts a CSV file.
pub fn ingest_csv(path: &Path, config: &RunConfig) -> Result<WeightedDataset> {
    let mut table = filter_groups(&read_table(path)?, config)?;
    round_columns(&mut table, config)?;
    dataset_from_table(&table, config)
}

/// Reads a per-point vector from a CSV file with a `point` column and a
/// value column, matching points by their printed form. Every support point
/// must appear exactly once.
pub fn read_point_values(path: &Path, support: &Support, column: &str) -> Result<Vec<f64>> {
    let table = read_table(path)?;
    let pc = require(&table, "point")?;
    let vals = {
        require(&table, column)?;
        table.numeric(column)?
    };
    let labels: Vec<String> = support.points().iter().map(|p| p.to_string()).collect();
    let mut out = vec![None; support.len()];
    for (r, (rec, v)) in table.records.iter().zip(vals).enumerate() {
        let i = labels
            .iter()
            .position(|l| *l == rec[pc])
            .ok_or_else(|| Error::PointOffSupport(rec[pc].clone()))?;
        if out[i].replace(v).is_some() {
            return Err(Error::ParseError {
                row: r + 1,
                column: "point".into(),
                message: format!("point {} listed twice", rec[pc]),
            });
        }
    }
    out.iter()
        .zip(&labels)
        .map(|(v, l)| {
            v.ok_or_else(|| Error::ParseError {
                row: 0,
                column: "point".into(),
                message: format!("support point {l} is missing"),
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TvRow {
    pub feature: String,
    pub tv: f64,
    pub selected: bool,
}

/// Group-wise TV of each candidate column's empirical distribution; columns
/// strictly above `threshold` are selected.
pub fn select_adjusted_features(
    table: &Table,
    config: &RunConfig,
    candidates: &[String],
    threshold: f64,
) -> Result<(Vec<String>, Vec<TvRow>)> {
    let gc = config
        .group_column
        .as_ref()
        .ok_or_else(|| Error::Config("a group column is required".into()))?;
    let table = filter_groups(table, config)?;
    let g = require(&table, gc)?;
    let groups: Vec<usize> = table
        .records
        .iter()
        .map(|r| config.group_values.iter().position(|v| *v == r[g]).unwrap())
        .collect();
    let mut rows = Vec::with_capacity(candidates.len());
    for name in candidates {
        let vals = table.numeric(name)?;
        let support = Arc::new(Support::from_observed(
            vals.iter().map(|&v| Point::scalar(v)),
        )?);
        let dist = |k: usize| {
            crate::distributions::empirical_from_indices(
                vals.iter()
                    .zip(&groups)
                    .filter(|(_, &gg)| gg == k)
                    .map(|(&v, _)| (support.index_of(&Point::scalar(v)).unwrap(), 1.0)),
                support.clone(),
            )
            .map_err(|e| match e {
                Error::ZeroTotalWeight => Error::EmptyGroup(config.group_values[k].clone()),
                e => e,
            })
        };
        let tv = tv_distance(&dist(0)?, &dist(1)?)?;
        rows.push(TvRow {
            feature: name.clone(),
            tv,
            selected: tv > threshold,
        });
    }
    let selected = rows
        .iter()
        .filter(|r| r.selected)
        .map(|r| r.feature.clone())
        .collect();
    Ok((selected, rows))
}

#[cfg(test)]
mod tests {
    use super::*;

    const CSV: &str = "x,s,y\n1,0,1\n2,1,0\n2,0,1\n";

    fn config() -> RunConfig {
        RunConfig {
            adjusted_columns: vec!["x".into()],
            group_column: Some("s".into()),
            label_column: Some("y".into()),
            ..Default::default()
        }
    }

    #[test]
    fn point_values_follow_support_order() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("v.csv");
        std::fs::write(&p, "point,v\n2,0.5\n0,-1\n1,0.25\n").unwrap();
        let s = Support::integer_range(0, 2).unwrap();
        assert_eq!(
            read_point_values(&p, &s, "v").unwrap(),
            vec![-1.0, 0.25, 0.5]
        );
        std::fs::write(&p, "point,v\n0,1\n1,2\n").unwrap();
        assert!(matches!(
            read_point_values(&p, &s, "v"),
            Err(Error::ParseError { .. })
        ));
        std::fs::write(&p, "point,v\n0,1\n1,2\n7,0\n").unwrap();
        assert!(matches!(
            read_point_values(&p, &s, "v"),
            Err(Error::PointOffSupport(_))
        ));
    }

    #[test]
    fn three_rows() {
        let t = read_table_from(CSV.as_bytes()).unwrap();
        let d = dataset_from_table(&t, &config()).unwrap();
        assert_eq!(d.len(), 3);
        assert!(d.rows().iter().all(|r| r.w == 1.0));
        assert_eq!(d.support().len(), 2);
        assert_eq!(d.rows()[1].s, Some(1));
        assert_eq!(d.rows()[1].y, Some(0));
        assert!(d.neutral_columns().is_empty());
    }

    #[test]
    fn missing_label_column() {
        let t = read_table_from(CSV.as_bytes()).unwrap();
        let c = RunConfig {
            label_column: Some("income".into()),
            ..config()
        };
        assert!(
            matches!(dataset_from_table(&t, &c), Err(Error::MissingColumn(n)) if n == "income")
        );
    }

    #[test]
    fn parse_errors_name_row_and_column() {
        let t = read_table_from("x,s\n1,0\nabc,1\n".as_bytes()).unwrap();
        let c = RunConfig {
            label_column: None,
            ..config()
        };
        match dataset_from_table(&t, &c) {
            Err(Error::ParseError { row, column, .. }) => {
                assert_eq!(row, 2);
                assert_eq!(column, "x");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rounding_and_filters() {
        let t = read_table_from("x,s,u\n1.26,0,a\n1.24,1,b\n1.31,2,c\n".as_bytes()).unwrap();
        let mut c = RunConfig {
            label_column: None,
            ..config()
        };
        c.rounding.insert("x".into(), 1);
        let mut f = filter_groups(&t, &c).unwrap();
        assert_eq!(f.records.len(), 2);
        round_columns(&mut f, &c).unwrap();
        let d = dataset_from_table(&f, &c).unwrap();
        assert_eq!(
            d.support().points(),
            &[Point::scalar(1.2), Point::scalar(1.3)]
        );
        assert_eq!(d.neutral_columns(), &["u".to_string()]);
        assert_eq!(d.rows()[1].u, vec!["b".to_string()]);
        assert_eq!(round_to(-0.04, 1), 0.0);
        assert_eq!(round_to(1234.0, -2), 1200.0);
    }

    #[test]
    fn tv_table_selection() {
        let t = read_table_from("a,b,s\n1,5,0\n1,5,0\n2,5,1\n1,5,1\n".as_bytes()).unwrap();
        let c = RunConfig {
            group_column: Some("s".into()),
            ..Default::default()
        };
        let cands = vec!["a".to_string(), "b".to_string()];
        let (sel, rows) = select_adjusted_features(&t, &c, &cands, 0.08).unwrap();
        assert_eq!(sel, vec!["a".to_string()]);
        assert_eq!(rows[0].tv, 0.5);
        assert_eq!(rows[1].tv, 0.0);
        let (sel, _) = select_adjusted_features(&t, &c, &cands, 1.0).unwrap();
        assert!(sel.is_empty());
    }
}
