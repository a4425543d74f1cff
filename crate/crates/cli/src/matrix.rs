//! Matrix CSV: one record per row, each cell `"re,im"`.

use std::path::Path;

use nalgebra::DMatrix;
use uec_core::operators::BOperator;
use uec_core::C64;

use crate::error::CliError;

fn parse_cell(cell: &str) -> Option<C64> {
    let (re, im) = cell.split_once(',')?;
    Some(C64::new(re.trim().parse().ok()?, im.trim().parse().ok()?))
}

pub fn parse_matrix_csv(text: &str) -> Result<DMatrix<C64>, String> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut rows: Vec<Vec<C64>> = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| e.to_string())?;
        let row = record
            .iter()
            .enumerate()
            .map(|(j, c)| parse_cell(c).ok_or_else(|| format!("row {}, column {}: bad cell {c:?}", i + 1, j + 1)))
            .collect::<Result<Vec<_>, _>>()?;
        rows.push(row);
    }
    let n = rows.len();
    if n == 0 {
        return Err("matrix is empty".into());
    }
    if let Some(r) = rows.iter().position(|r| r.len() != n) {
        return Err(format!("matrix is not square: row {} has {} cells, expected {n}", r + 1, rows[r].len()));
    }
    Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

/// Reads a contraction; an entry set with `sigma_max > 1 + 1e-9` is a
/// numeric-contract violation.
pub fn read_matrix_csv(path: &Path) -> Result<BOperator, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Validation(format!("cannot read {}: {e}", path.display())))?;
    let m = parse_matrix_csv(&text).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
    Ok(BOperator::new(m)?)
}

pub fn format_matrix_csv(m: &DMatrix<C64>) -> String {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    for i in 0..m.nrows() {
        let cells: Vec<String> = (0..m.ncols()).map(|j| format!("{},{}", m[(i, j)].re, m[(i, j)].im)).collect();
        w.write_record(&cells).expect("writing to memory");
    }
    String::from_utf8(w.into_inner().expect("writing to memory")).expect("csv output is utf-8")
}

pub fn write_matrix_csv(path: &Path, m: &DMatrix<C64>) -> Result<(), CliError> {
    std::fs::write(path, format_matrix_csv(m))
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
}
