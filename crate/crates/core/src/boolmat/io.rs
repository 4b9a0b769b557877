//! The BMM1 sparse text format.
//!
//! ```text
//! BMM1 <rows> <cols> <nnz>
//! <i> <j>        # nnz lines, 1-based, row-major sorted, no duplicates
//! ```

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use super::BoolMatrix;
use crate::error::{Error, Result};

pub fn write_matrix<W: Write>(m: &BoolMatrix, mut out: W) -> Result<()> {
    writeln!(out, "BMM1 {} {} {}", m.rows(), m.cols(), m.count_ones())?;
    for (i, j) in m.iter_ones() {
        writeln!(out, "{} {}", i + 1, j + 1)?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_matrix<R: BufRead>(input: R) -> Result<BoolMatrix> {
    let mut lines = input.lines().enumerate().map(|(n, l)| (n + 1, l));

    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::parse(1, "empty file, expected BMM1 header"))?;
    let header = header?;
    let fields: Vec<&str> = header.split(' ').collect();
    if fields.len() != 4 || fields[0] != "BMM1" {
        return Err(Error::parse(
            1,
            "expected header `BMM1 <rows> <cols> <nnz>`",
        ));
    }
    let rows = parse_count(fields[1], 1, "rows")?;
    let cols = parse_count(fields[2], 1, "cols")?;
    let nnz = parse_count(fields[3], 1, "nnz")?;
    if rows == 0 || cols == 0 {
        return Err(Error::parse(1, "dimensions must be positive"));
    }
    if nnz as u128 > rows as u128 * cols as u128 {
        return Err(Error::parse(1, format!("nnz {nnz} exceeds {rows}x{cols}")));
    }

    let mut m = BoolMatrix::zeros(rows, cols);
    let mut prev: Option<(usize, usize)> = None;
    for _ in 0..nnz {
        let (line_no, line) = lines
            .next()
            .ok_or_else(|| Error::parse(nnz + 1, format!("expected {nnz} coordinate lines")))?;
        let line = line?;
        let mut parts = line.split(' ');
        let (Some(si), Some(sj), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(Error::parse(line_no, "expected `<i> <j>`"));
        };
        let i = parse_count(si, line_no, "row")?;
        let j = parse_count(sj, line_no, "column")?;
        if i == 0 || i > rows || j == 0 || j > cols {
            return Err(Error::parse(
                line_no,
                format!("coordinate ({i}, {j}) outside {rows}x{cols}"),
            ));
        }
        let pos = (i - 1, j - 1);
        if let Some(p) = prev {
            if pos == p {
                return Err(Error::parse(
                    line_no,
                    format!("duplicate coordinate ({i}, {j})"),
                ));
            }
            if pos < p {
                return Err(Error::parse(line_no, "coordinates not in row-major order"));
            }
        }
        prev = Some(pos);
        m.set(pos.0, pos.1, true);
    }
    for (line_no, line) in lines {
        if !line?.is_empty() {
            return Err(Error::parse(
                line_no,
                "trailing content after last coordinate",
            ));
        }
    }
    Ok(m)
}

fn parse_count(s: &str, line: usize, what: &str) -> Result<usize> {
    if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
        return Err(Error::parse(
            line,
            format!("{what}: `{s}` is not a decimal count"),
        ));
    }
    s.parse()
        .map_err(|_| Error::parse(line, format!("{what}: `{s}` is too large")))
}

pub fn read_matrix_file(path: impl AsRef<Path>) -> Result<BoolMatrix> {
    read_matrix(BufReader::new(File::open(path)?))
}

pub fn write_matrix_file(m: &BoolMatrix, path: impl AsRef<Path>) -> Result<()> {
    write_matrix(m, BufWriter::new(File::create(path)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn parse(s: &str) -> Result<BoolMatrix> {
        read_matrix(s.as_bytes())
    }

    #[test]
    fn reads_single_entry() {
        let m = parse("BMM1 2 2 1\n1 2\n").unwrap();
        assert_eq!(m, BoolMatrix::from_rows(&[[0, 1], [0, 0]]));
    }

    #[test]
    fn writes_canonical_text() {
        let m = BoolMatrix::from_rows(&[[1, 0], [1, 1]]);
        let mut buf = Vec::new();
        write_matrix(&m, &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "BMM1 2 2 3\n1 1\n2 1\n2 2\n"
        );
    }

    #[test]
    fn rejects_bad_files_with_line_numbers() {
        let cases = [
            ("BMM1 2 2 1\n3 1\n", 2),
            ("BMM1 2 2 2\n1 1\n1 1\n", 3),
            ("BMM1 2 2 2\n2 1\n1 1\n", 3),
            ("BMM2 2 2 0\n", 1),
            ("BMM1 0 2 0\n", 1),
            ("BMM1 2 2 5\n", 1),
            ("BMM1 2 2 2\n1 1\n", 3),
            ("BMM1 2 2 1\n1 x\n", 2),
            ("BMM1 2 2 1\n1 1\n2 2\n", 3),
        ];
        for (text, line) in cases {
            match parse(text) {
                Err(Error::Parse { line: l, .. }) => assert_eq!(l, line, "{text:?}"),
                other => panic!("{text:?} gave {other:?}"),
            }
        }
    }

    proptest! {
        #[test]
        fn round_trip(rows in 1usize..20, cols in 1usize..80, seed: u64) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let m = BoolMatrix::from_fn(rows, cols, |_, _| rng.gen_bool(0.3));
            let mut buf = Vec::new();
            write_matrix(&m, &mut buf).unwrap();
            prop_assert_eq!(parse(std::str::from_utf8(&buf).unwrap()).unwrap(), m);
        }
    }
}
