//! alist sparse-matrix interchange.
//!
//! Layout, one item per line:
//!
//! ```text
//! n m
//! max_col_weight max_row_weight
//! <n column weights>
//! <m row weights>
//! <n lines: 1-based row indices of each column>
//! <m lines: 1-based column indices of each row>
//! ```
//!
//! Entries are written unpadded. On read, `0` entries are accepted as
//! padding so that files from tools that pad to the maximum weight parse.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::gf2::BitMatrix;

fn join<T: ToString>(items: impl IntoIterator<Item = T>) -> String {
    items
        .into_iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

/// Renders `h` in alist format.
pub fn to_alist_string(h: &BitMatrix) -> String {
    let cols = h.col_supports();
    let rows = h.row_supports();
    let col_w: Vec<usize> = cols.iter().map(Vec::len).collect();
    let row_w: Vec<usize> = rows.iter().map(Vec::len).collect();
    let mut out = String::new();
    let _ = writeln!(out, "{} {}", h.num_cols(), h.num_rows());
    let _ = writeln!(
        out,
        "{} {}",
        col_w.iter().max().copied().unwrap_or(0),
        row_w.iter().max().copied().unwrap_or(0)
    );
    let _ = writeln!(out, "{}", join(&col_w));
    let _ = writeln!(out, "{}", join(&row_w));
    for c in &cols {
        let _ = writeln!(out, "{}", join(c.iter().map(|i| i + 1)));
    }
    for r in &rows {
        let _ = writeln!(out, "{}", join(r.iter().map(|j| j + 1)));
    }
    out
}

pub fn write_alist(h: &BitMatrix, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, to_alist_string(h))?;
    Ok(())
}

pub fn read_alist(path: impl AsRef<Path>) -> Result<BitMatrix> {
    parse_alist(&fs::read_to_string(path)?)
}

struct Lines<'a> {
    lines: Vec<&'a str>,
    pos: usize,
}

impl<'a> Lines<'a> {
    fn next(&mut self, what: &str) -> Result<(usize, &'a str)> {
        let line_no = self.pos + 1;
        let line = self.lines.get(self.pos).ok_or_else(|| Error::Parse {
            line: line_no,
            message: format!("unexpected end of file, expected {what}"),
        })?;
        self.pos += 1;
        Ok((line_no, line))
    }
}

fn parse_numbers(line_no: usize, line: &str) -> Result<Vec<usize>> {
    line.split_whitespace()
        .map(|tok| {
            tok.parse::<usize>().map_err(|_| Error::Parse {
                line: line_no,
                message: format!("`{tok}` is not a non-negative integer"),
            })
        })
        .collect()
}

fn expect_len(line_no: usize, values: &[usize], len: usize, what: &str) -> Result<()> {
    if values.len() != len {
        return Err(Error::Parse {
            line: line_no,
            message: format!("expected {len} {what}, found {}", values.len()),
        });
    }
    Ok(())
}

/// Reads one index list, dropping `0` padding and converting to 0-based.
fn parse_index_list(
    line_no: usize,
    line: &str,
    declared_weight: usize,
    bound: usize,
) -> Result<Vec<usize>> {
    let mut out = Vec::with_capacity(declared_weight);
    for idx in parse_numbers(line_no, line)? {
        if idx == 0 {
            continue;
        }
        if idx > bound {
            return Err(Error::Parse {
                line: line_no,
                message: format!("index {idx} out of range 1..={bound}"),
            });
        }
        if out.contains(&(idx - 1)) {
            return Err(Error::Parse {
                line: line_no,
                message: format!("index {idx} listed twice"),
            });
        }
        out.push(idx - 1);
    }
    if out.len() != declared_weight {
        return Err(Error::Parse {
            line: line_no,
            message: format!(
                "declared weight {declared_weight} but {} indices listed",
                out.len()
            ),
        });
    }
    Ok(out)
}

/// Parses alist text into a matrix, validating every count.
pub fn parse_alist(text: &str) -> Result<BitMatrix> {
    let mut lines = Lines {
        lines: text.lines().collect(),
        pos: 0,
    };

    let (ln, line) = lines.next("dimensions")?;
    let dims = parse_numbers(ln, line)?;
    expect_len(ln, &dims, 2, "dimensions")?;
    let (n, m) = (dims[0], dims[1]);
    if n == 0 || m == 0 {
        return Err(Error::Parse {
            line: ln,
            message: "matrix dimensions must be positive".into(),
        });
    }

    let (ln_max, line) = lines.next("maximum weights")?;
    let maxes = parse_numbers(ln_max, line)?;
    expect_len(ln_max, &maxes, 2, "maximum weights")?;

    let (ln, line) = lines.next("column weights")?;
    let col_w = parse_numbers(ln, line)?;
    expect_len(ln, &col_w, n, "column weights")?;

    let (ln, line) = lines.next("row weights")?;
    let row_w = parse_numbers(ln, line)?;
    expect_len(ln, &row_w, m, "row weights")?;

    let max_col = col_w.iter().max().copied().unwrap_or(0);
    let max_row = row_w.iter().max().copied().unwrap_or(0);
    if maxes != [max_col, max_row] {
        return Err(Error::Parse {
            line: ln_max,
            message: format!(
                "declared maximum weights {maxes:?} disagree with listed weights ({max_col}, {max_row})"
            ),
        });
    }

    let mut cols = Vec::with_capacity(n);
    for &w in &col_w {
        let (ln, line) = lines.next("a column index list")?;
        cols.push((ln, parse_index_list(ln, line, w, m)?));
    }
    let mut rows = Vec::with_capacity(m);
    for &w in &row_w {
        let (ln, line) = lines.next("a row index list")?;
        rows.push(parse_index_list(ln, line, w, n)?);
    }
    while let Some(line) = lines.lines.get(lines.pos) {
        if !line.trim().is_empty() {
            return Err(Error::Parse {
                line: lines.pos + 1,
                message: "trailing content after row lists".into(),
            });
        }
        lines.pos += 1;
    }

    let h = BitMatrix::from_row_supports(n, &rows)?;
    for (j, (ln, col)) in cols.iter().enumerate() {
        let mut from_rows: Vec<usize> = (0..m).filter(|&i| h.get(i, j)).collect();
        let mut listed = col.clone();
        listed.sort_unstable();
        from_rows.sort_unstable();
        if listed != from_rows {
            return Err(Error::Parse {
                line: *ln,
                message: format!("column {} disagrees with the row lists", j + 1),
            });
        }
    }
    Ok(h)
}
