//! Table serializers.
//!
//! Markdown output follows the pipe-table layout used by pandas'
//! `to_markdown`: every column is padded to `max(len(header) + 2, widest
//! cell)`, numeric columns are right-aligned on the decimal point and text
//! columns left-aligned.

use serde::{Deserialize, Serialize};

use crate::table::{ColumnType, Table, TableError};
use crate::value::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum SerializerStyle {
    #[default]
    Markdown,
    Flatten,
}

impl SerializerStyle {
    pub fn as_str(self) -> &'static str {
        match self {
            SerializerStyle::Markdown => "markdown",
            SerializerStyle::Flatten => "flatten",
        }
    }
}

/// A serialized table plus the byte offset where every cell's text begins.
#[derive(Debug, Clone, PartialEq)]
pub struct Serialized {
    pub text: String,
    /// `cell_offsets[row][col]`.
    pub cell_offsets: Vec<Vec<usize>>,
    /// Byte offset where each row's line begins.
    pub row_offsets: Vec<usize>,
}

pub fn serialize(table: &Table, style: SerializerStyle) -> Serialized {
    match style {
        SerializerStyle::Markdown => markdown_with_offsets(table),
        SerializerStyle::Flatten => flatten_with_offsets(table),
    }
}

pub fn to_markdown(table: &Table) -> String {
    markdown_with_offsets(table).text
}

pub fn to_flatten(table: &Table) -> String {
    flatten_with_offsets(table).text
}

struct Col {
    header: String,
    cells: Vec<String>,
    numeric: bool,
}

fn markdown_with_offsets(table: &Table) -> Serialized {
    let mut cols = Vec::with_capacity(table.num_columns() + 1);
    cols.push(Col {
        header: String::new(),
        cells: (0..table.num_rows()).map(|i| i.to_string()).collect(),
        numeric: true,
    });
    for (j, spec) in table.columns.iter().enumerate() {
        cols.push(Col {
            header: spec.header.clone(),
            cells: table.column_values(j).map(Value::render).collect(),
            numeric: spec.ctype == ColumnType::Int,
        });
    }
    let (text, offsets, row_offsets) = pipe_table(&cols, table.num_rows());
    let cell_offsets = offsets.into_iter().map(|mut r| r.split_off(1)).collect();
    Serialized { text, cell_offsets, row_offsets }
}

/// Markdown table of an answer or intermediate relation, without an index column.
pub fn values_markdown(headers: &[String], rows: &[Vec<Value>]) -> String {
    let cols: Vec<Col> = headers
        .iter()
        .enumerate()
        .map(|(j, h)| {
            let vals: Vec<&Value> = rows.iter().map(|r| &r[j]).collect();
            Col {
                header: h.clone(),
                cells: vals.iter().map(|v| v.render()).collect(),
                numeric: !vals.is_empty()
                    && vals.iter().all(|v| matches!(v, Value::Int(_) | Value::Decimal(_) | Value::Bool(_))),
            }
        })
        .collect();
    pipe_table(&cols, rows.len()).0
}

/// Digits after the decimal point, -1 when there is none.
fn afterpoint(s: &str) -> isize {
    match s.rfind('.') {
        Some(p) => (s.len() - p - 1) as isize,
        None => -1,
    }
}

fn pipe_table(cols: &[Col], nrows: usize) -> (String, Vec<Vec<usize>>, Vec<usize>) {
    let mut aligned: Vec<Vec<String>> = Vec::with_capacity(cols.len());
    let mut widths = Vec::with_capacity(cols.len());
    for c in cols {
        let mut cells = c.cells.clone();
        if c.numeric {
            let maxdec = cells.iter().map(|s| afterpoint(s)).max().unwrap_or(-1);
            for s in &mut cells {
                let pad = (maxdec - afterpoint(s)) as usize;
                s.push_str(&" ".repeat(pad));
            }
        }
        let w = cells.iter().map(|s| s.len()).max().unwrap_or(0).max(c.header.len() + 2);
        widths.push(w);
        aligned.push(cells);
    }

    let mut text = String::new();
    let pad = |s: &str, w: usize, right: bool| {
        if right {
            format!("{s:>w$}")
        } else {
            format!("{s:<w$}")
        }
    };
    let header: Vec<String> = cols.iter().zip(&widths).map(|(c, &w)| pad(&c.header, w, c.numeric)).collect();
    text.push_str(&format!("| {} |", header.join(" | ")));
    let rule: Vec<String> = cols
        .iter()
        .zip(&widths)
        .map(|(c, &w)| if c.numeric { format!("{}:", "-".repeat(w + 1)) } else { format!(":{}", "-".repeat(w + 1)) })
        .collect();
    text.push_str(&format!("\n|{}|", rule.join("|")));

    let mut offsets = Vec::with_capacity(nrows);
    let mut row_offsets = Vec::with_capacity(nrows);
    for i in 0..nrows {
        text.push('\n');
        row_offsets.push(text.len());
        text.push('|');
        let mut row_off = Vec::with_capacity(cols.len());
        for (j, c) in cols.iter().enumerate() {
            let cell = &aligned[j][i];
            let w = widths[j];
            let padded = pad(cell, w, c.numeric);
            let lead = padded.len() - padded.trim_start().len();
            text.push(' ');
            row_off.push(text.len() + lead);
            text.push_str(&padded);
            text.push_str(" |");
        }
        offsets.push(row_off);
    }
    (text, offsets, row_offsets)
}

fn flatten_with_offsets(table: &Table) -> Serialized {
    let headers: Vec<&str> = table.headers().collect();
    let mut text = format!("The table have {} columns: {}", headers.len(), headers.join(" | "));
    let mut cell_offsets = Vec::with_capacity(table.num_rows());
    let mut row_offsets = Vec::with_capacity(table.num_rows());
    for (i, row) in table.rows.iter().enumerate() {
        text.push('\n');
        row_offsets.push(text.len());
        text.push_str(&format!("row {} : ", i + 1));
        let mut offs = Vec::with_capacity(row.len());
        for (h, v) in headers.iter().zip(row) {
            text.push_str(h);
            text.push_str(" is ");
            offs.push(text.len());
            text.push_str(&v.render());
            text.push_str(". ");
        }
        cell_offsets.push(offs);
    }
    Serialized { text, cell_offsets, row_offsets }
}

/// Reads a pipe table back. A leading column with an empty header is taken
/// to be the row index and dropped. Column types are inferred from the cells.
pub fn parse_markdown(text: &str) -> Result<Table, TableError> {
    let lines: Vec<&str> = text.lines().map(str::trim).filter(|l| !l.is_empty()).collect();
    if lines.len() < 2 {
        return Err(TableError::Malformed("markdown table needs a header and a rule line".into()));
    }
    let split = |l: &str| -> Result<Vec<String>, TableError> {
        let inner = l
            .strip_prefix('|')
            .and_then(|s| s.strip_suffix('|'))
            .ok_or_else(|| TableError::Malformed(format!("line `{l}` is not a pipe row")))?;
        Ok(inner.split('|').map(|c| c.trim().to_string()).collect())
    };
    let mut headers = split(lines[0])?;
    let rule = split(lines[1])?;
    if rule.len() != headers.len() || !rule.iter().all(|c| !c.is_empty() && c.chars().all(|ch| ch == '-' || ch == ':')) {
        return Err(TableError::Malformed("second line is not an alignment rule".into()));
    }
    let has_index = headers.first().is_some_and(|h| h.is_empty());
    let mut rows = Vec::with_capacity(lines.len() - 2);
    for l in &lines[2..] {
        let mut cells = split(l)?;
        if cells.len() != headers.len() {
            return Err(TableError::Malformed(format!("row `{l}` has {} cells, expected {}", cells.len(), headers.len())));
        }
        if has_index {
            cells.remove(0);
        }
        rows.push(cells);
    }
    if has_index {
        headers.remove(0);
    }
    Table::from_strings(headers, rows)
}
