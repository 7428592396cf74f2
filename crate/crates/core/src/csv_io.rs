//! CSV ingestion of sampled derivative coordinates.
//!
//! Columns: `s, dr, dphi[, dpsi, ...]` with a header row and one row per
//! grid sample. An optional column named `u` marks branch points with 0
//! (the single-valued node of the unit function); any other value means
//! "between branch points".

use std::io::Read;

use crate::curve::{CurveError, DerivativeCoords};
use crate::grid::SGrid;

/// Coordinates read from CSV, plus branch points when a `u` column exists.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvCoords {
    pub coords: DerivativeCoords,
    pub branch_points: Option<Vec<f64>>,
}

fn err(msg: impl Into<String>) -> CurveError {
    CurveError::Csv(msg.into())
}

pub fn read_coords_csv<R: Read>(reader: R) -> Result<CsvCoords, CurveError> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(reader);
    let headers = rdr.headers().map_err(|e| err(e.to_string()))?.clone();
    let names: Vec<&str> = headers.iter().collect();
    if names.len() < 3 || names[0] != "s" || names[1] != "dr" {
        return Err(err(format!(
            "header must start with `s,dr` followed by angular columns, got `{}`",
            names.join(",")
        )));
    }
    let u_col = names.iter().position(|n| *n == "u");
    let angular_cols: Vec<usize> = (2..names.len()).filter(|c| Some(*c) != u_col).collect();
    if angular_cols.is_empty() {
        return Err(err("no angular columns"));
    }

    let mut s = Vec::new();
    let mut dr = Vec::new();
    let mut ang: Vec<Vec<f64>> = vec![Vec::new(); angular_cols.len()];
    let mut u = Vec::new();
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| err(e.to_string()))?;
        let line = row + 2;
        let field = |c: usize| -> Result<f64, CurveError> {
            let raw = rec
                .get(c)
                .ok_or_else(|| err(format!("line {line}: missing column {}", c + 1)))?;
            raw.parse::<f64>()
                .map_err(|_| err(format!("line {line}: `{raw}` is not a number")))
        };
        s.push(field(0)?);
        dr.push(field(1)?);
        for (a, &c) in angular_cols.iter().enumerate() {
            ang[a].push(field(c)?);
        }
        if let Some(c) = u_col {
            u.push(field(c)?);
        }
    }
    if s.len() < 2 {
        return Err(err(format!("need at least 2 rows, got {}", s.len())));
    }
    let ds = s[1] - s[0];
    let grid = SGrid::from_count(s[0], ds, s.len())?;
    for (k, v) in s.iter().enumerate() {
        let expect = grid.s_at(k);
        if (v - expect).abs() > 1e-6 * ds {
            return Err(err(format!(
                "row {}: s = {v} breaks the uniform step {ds} (expected {expect})",
                k + 1
            )));
        }
    }
    let branch_points = u_col.map(|_| {
        u.iter()
            .enumerate()
            .filter(|(_, v)| **v == 0.0)
            .map(|(k, _)| grid.s_at(k))
            .collect()
    });
    Ok(CsvCoords {
        coords: DerivativeCoords::from_samples(grid, dr, ang)?,
        branch_points,
    })
}

/// Reads a polygon from CSV: a header row `x,y` and one vertex per row.
pub fn read_points_csv<R: Read>(reader: R) -> Result<Vec<[f64; 2]>, CurveError> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(reader);
    let headers = rdr.headers().map_err(|e| err(e.to_string()))?.clone();
    if headers.len() < 2 || &headers[0] != "x" || &headers[1] != "y" {
        return Err(err("header must be `x,y`"));
    }
    let mut out = Vec::new();
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| err(e.to_string()))?;
        let mut xy = [0.0; 2];
        for (c, v) in xy.iter_mut().enumerate() {
            let raw = rec.get(c).unwrap_or("");
            *v = raw
                .parse::<f64>()
                .map_err(|_| err(format!("line {}: `{raw}` is not a number", row + 2)))?;
        }
        out.push(xy);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_columns_and_branch_marks() {
        let text = "s,dr,dphi,u\n0,1,0.5,0\n0.5,1,0.5,1\n1.0,1,0.5,0\n1.5,1,0.5,1\n";
        let c = read_coords_csv(text.as_bytes()).unwrap();
        assert_eq!(c.coords.dim(), 2);
        assert_eq!(c.coords.grid().count(), 4);
        assert_eq!(c.branch_points, Some(vec![0.0, 1.0]));
    }

    #[test]
    fn rejects_non_uniform_and_bad_header() {
        let text = "s,dr,dphi\n0,1,0\n0.5,1,0\n1.2,1,0\n";
        assert!(read_coords_csv(text.as_bytes()).is_err());
        assert!(read_coords_csv("x,dr,dphi\n0,1,0\n1,1,0\n".as_bytes()).is_err());
        assert!(read_coords_csv("s,dr,dphi\n0,1,0\n1,-1,0\n".as_bytes()).is_err());
    }
}
