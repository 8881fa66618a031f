//! Response matrices as CSV.
//!
//! The first header cell names the examinee-id column; the remaining
//! headers are item ids, plus an optional criterion column. Cell tokens:
//! `1` correct, `0` incorrect, `?` omitted, empty not administered.
//! Ids are kept verbatim; cell tokens and criterion values may carry
//! surrounding whitespace.

use testgauge_core::{ResponseCell, ResponseMatrix};

use crate::error::{Error, Result};

pub const DEFAULT_CRITERION_COLUMN: &str = "criterion";

#[derive(Debug, Clone)]
pub struct ParseOptions {
    /// Header whose column is read as the external criterion.
    pub criterion_column: String,
}

impl Default for ParseOptions {
    fn default() -> Self {
        Self { criterion_column: DEFAULT_CRITERION_COLUMN.to_owned() }
    }
}

fn parse_cell(token: &str) -> Option<ResponseCell> {
    match token {
        "1" => Some(ResponseCell::Correct),
        "0" => Some(ResponseCell::Incorrect),
        "?" => Some(ResponseCell::Omitted),
        "" => Some(ResponseCell::NotAdministered),
        _ => None,
    }
}

fn cell_token(cell: ResponseCell) -> &'static str {
    match cell {
        ResponseCell::Correct => "1",
        ResponseCell::Incorrect => "0",
        ResponseCell::Omitted => "?",
        ResponseCell::NotAdministered => "",
    }
}

pub fn parse_response_matrix(text: &str, options: &ParseOptions) -> Result<ResponseMatrix> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut records = reader.records();
    let header = records.next().ok_or(Error::MissingHeader)??;
    if header.is_empty() {
        return Err(Error::MissingHeader);
    }
    let width = header.len();
    let criterion_at = header.iter().skip(1).position(|h| h == options.criterion_column).map(|p| p + 1);
    let item_columns: Vec<usize> = (1..width).filter(|c| Some(*c) != criterion_at).collect();
    let item_ids: Vec<String> = item_columns.iter().map(|&c| header[c].to_owned()).collect();

    let mut examinee_ids = Vec::new();
    let mut cells = Vec::new();
    let mut criterion = criterion_at.map(|_| Vec::new());
    for record in records {
        let record = record?;
        if record.len() != width {
            let row = record.position().map_or(0, |p| p.line());
            return Err(Error::Structural { row, expected: width, found: record.len() });
        }
        let examinee = record[0].to_owned();
        for (&c, item) in item_columns.iter().zip(&item_ids) {
            let token = record[c].trim();
            cells.push(parse_cell(token).ok_or_else(|| Error::Token {
                examinee: examinee.clone(),
                item: item.clone(),
                token: token.to_owned(),
            })?);
        }
        if let (Some(c), Some(values)) = (criterion_at, criterion.as_mut()) {
            let raw = record[c].trim();
            let value: f64 = raw
                .parse()
                .map_err(|_| Error::Criterion { examinee: examinee.clone(), value: raw.to_owned() })?;
            values.push(value);
        }
        examinee_ids.push(examinee);
    }
    Ok(ResponseMatrix::new(examinee_ids, item_ids, cells, criterion)?)
}

/// Serializes with `id` as the examinee column and a trailing criterion column when present.
pub fn write_response_matrix(matrix: &ResponseMatrix) -> Result<String> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["id".to_owned()];
    header.extend(matrix.item_ids().iter().cloned());
    if matrix.criterion().is_some() {
        header.push(DEFAULT_CRITERION_COLUMN.to_owned());
    }
    writer.write_record(&header)?;
    for i in 0..matrix.examinee_count() {
        let mut row = vec![matrix.examinee_ids()[i].clone()];
        row.extend(matrix.row(i).iter().map(|c| cell_token(*c).to_owned()));
        if let Some(values) = matrix.criterion() {
            row.push(values[i].to_string());
        }
        writer.write_record(&row)?;
    }
    let bytes = writer.into_inner().map_err(|e| Error::Usage(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}
