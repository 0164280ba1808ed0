//! Line-oriented text formats: svmlight, triplets and weighted edge lists.
//!
//! Fields are separated by runs of spaces or tabs; lines end in LF or CRLF;
//! blank lines and lines starting with `#` are skipped. Floats are written
//! with Rust's shortest round-trip formatting, so write-then-parse is exact.

use std::collections::HashSet;
use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::problems::SparseVec;

/// Nonempty, non-comment lines with 1-based line numbers.
fn data_lines<R: BufRead>(reader: R) -> impl Iterator<Item = Result<(usize, String)>> {
    reader
        .lines()
        .enumerate()
        .filter_map(|(i, line)| match line {
            Err(e) => Some(Err(Error::Io(e))),
            Ok(l) => {
                let t = l.trim_matches(|c: char| c.is_ascii_whitespace());
                if t.is_empty() || t.starts_with('#') {
                    None
                } else {
                    Some(Ok((i + 1, t.to_string())))
                }
            }
        })
}

fn fields(line: &str) -> impl Iterator<Item = &str> {
    line.split([' ', '\t']).filter(|f| !f.is_empty())
}

fn parse_num<T: std::str::FromStr>(s: &str, line: usize, what: &str) -> Result<T> {
    s.parse()
        .map_err(|_| Error::parse(line, format!("invalid {what} `{s}`")))
}

/// Labeled sparse examples with 0-based feature indices.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SvmData {
    pub examples: Vec<(SparseVec, f64)>,
    /// One past the largest feature index seen.
    pub num_features: usize,
}

impl SvmData {
    /// Examples containing each feature.
    pub fn feature_counts(&self) -> Vec<u32> {
        let mut d = vec![0u32; self.num_features];
        for (z, _) in &self.examples {
            for &u in &z.indices {
                d[u] += 1;
            }
        }
        d
    }
}

/// `<label> <idx>:<val> ...` with labels ±1 and strictly ascending 1-based
/// indices.
pub fn parse_svmlight<R: BufRead>(reader: R) -> Result<SvmData> {
    let mut data = SvmData::default();
    for item in data_lines(reader) {
        let (ln, line) = item?;
        let mut it = fields(&line);
        let label_str = it.next().expect("nonempty line");
        let label: f64 = parse_num(label_str, ln, "label")?;
        if label != 1.0 && label != -1.0 {
            return Err(Error::parse(ln, "label must be ±1"));
        }
        let mut indices = Vec::new();
        let mut values = Vec::new();
        for pair in it {
            let (i, v) = pair
                .split_once(':')
                .ok_or_else(|| Error::parse(ln, format!("malformed pair `{pair}`")))?;
            let idx: usize = parse_num(i, ln, "feature index")?;
            if idx == 0 {
                return Err(Error::parse(ln, "feature indices are 1-based"));
            }
            let val: f64 = parse_num(v, ln, "feature value")?;
            if !val.is_finite() {
                return Err(Error::parse(ln, format!("non-finite value `{v}`")));
            }
            if indices.last().is_some_and(|&prev| prev >= idx - 1) {
                return Err(Error::parse(ln, "feature indices must be ascending"));
            }
            indices.push(idx - 1);
            values.push(val);
        }
        if indices.is_empty() {
            return Err(Error::parse(ln, "example has no features"));
        }
        data.num_features = data.num_features.max(indices.last().unwrap() + 1);
        data.examples.push((SparseVec { indices, values }, label));
    }
    Ok(data)
}

pub fn write_svmlight<W: Write>(mut w: W, examples: &[(SparseVec, f64)]) -> Result<()> {
    for (z, y) in examples {
        write!(w, "{}", if *y > 0.0 { "+1" } else { "-1" })?;
        for (u, v) in z.iter() {
            write!(w, " {}:{}", u + 1, v)?;
        }
        writeln!(w)?;
    }
    Ok(())
}

/// `u v value` with 0-based indices inside an `rows × cols` matrix. Each
/// cell may appear once.
pub fn parse_triplets<R: BufRead>(
    reader: R,
    rows: usize,
    cols: usize,
) -> Result<Vec<(usize, usize, f64)>> {
    let mut seen = HashSet::new();
    let mut entries = Vec::new();
    for item in data_lines(reader) {
        let (ln, line) = item?;
        let f: Vec<&str> = fields(&line).collect();
        if f.len() != 3 {
            return Err(Error::parse(
                ln,
                format!("expected `u v value`, got {} fields", f.len()),
            ));
        }
        let u: usize = parse_num(f[0], ln, "row index")?;
        let v: usize = parse_num(f[1], ln, "column index")?;
        let z: f64 = parse_num(f[2], ln, "value")?;
        if u >= rows || v >= cols {
            return Err(Error::parse(
                ln,
                format!("entry ({u}, {v}) outside a {rows}x{cols} matrix"),
            ));
        }
        if !z.is_finite() {
            return Err(Error::parse(ln, "value must be finite"));
        }
        if !seen.insert((u, v)) {
            return Err(Error::parse(ln, format!("duplicate entry ({u}, {v})")));
        }
        entries.push((u, v, z));
    }
    Ok(entries)
}

pub fn write_triplets<W: Write>(mut w: W, entries: &[(usize, usize, f64)]) -> Result<()> {
    for (u, v, z) in entries {
        writeln!(w, "{u} {v} {z}")?;
    }
    Ok(())
}

/// Weighted arcs and the inferred node count.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct EdgeList {
    pub arcs: Vec<(usize, usize, f64)>,
    /// One past the largest node index seen.
    pub nodes: usize,
}

/// `u v w` with `u ≠ v` and `w > 0`.
pub fn parse_edgelist<R: BufRead>(reader: R) -> Result<EdgeList> {
    let mut list = EdgeList::default();
    for item in data_lines(reader) {
        let (ln, line) = item?;
        let f: Vec<&str> = fields(&line).collect();
        if f.len() != 3 {
            return Err(Error::parse(
                ln,
                format!("expected `u v w`, got {} fields", f.len()),
            ));
        }
        let u: usize = parse_num(f[0], ln, "node index")?;
        let v: usize = parse_num(f[1], ln, "node index")?;
        let w: f64 = parse_num(f[2], ln, "weight")?;
        if u == v {
            return Err(Error::parse(ln, format!("self-loop on node {u}")));
        }
        if !(w > 0.0 && w.is_finite()) {
            return Err(Error::parse(
                ln,
                format!("nonnegative weight required, got {w}"),
            ));
        }
        list.nodes = list.nodes.max(u.max(v) + 1);
        list.arcs.push((u, v, w));
    }
    Ok(list)
}

pub fn write_edgelist<W: Write>(mut w: W, arcs: &[(usize, usize, f64)]) -> Result<()> {
    for (u, v, x) in arcs {
        writeln!(w, "{u} {v} {x}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn svmlight_basic() {
        let d = parse_svmlight("+1 3:0.5 7:1.2\n".as_bytes()).unwrap();
        assert_eq!(d.examples.len(), 1);
        assert_eq!(d.examples[0].0.indices, vec![2, 6]);
        assert_eq!(d.examples[0].1, 1.0);
        assert_eq!(d.num_features, 7);
    }

    #[test]
    fn svmlight_comments_blank_and_crlf() {
        let d = parse_svmlight("# header\r\n\r\n-1 1:1\r\n+1 3:2 4:1\r\n".as_bytes()).unwrap();
        assert_eq!(d.examples.len(), 2);
        assert_eq!(d.feature_counts(), vec![1, 0, 1, 1]);
    }

    #[test]
    fn svmlight_errors_carry_line_numbers() {
        let e = parse_svmlight("+2 1:1.0".as_bytes()).unwrap_err();
        assert_eq!(e.to_string(), "label must be ±1 (line 1)");
        let e = parse_svmlight("+1 1:1\n+1 3:1 2:1".as_bytes()).unwrap_err();
        assert!(e.to_string().ends_with("(line 2)"), "{e}");
        assert!(parse_svmlight("+1 3".as_bytes()).is_err());
        assert!(parse_svmlight("+1 2:1 2:1".as_bytes()).is_err());
    }

    #[test]
    fn triplets_basic_and_errors() {
        assert_eq!(
            parse_triplets("0 1 5.0\n".as_bytes(), 2, 2).unwrap(),
            vec![(0, 1, 5.0)]
        );
        let e = parse_triplets("0 1 5\n0 1 6\n".as_bytes(), 2, 2).unwrap_err();
        assert!(e.to_string().contains("duplicate"), "{e}");
        assert!(parse_triplets("2 0 1".as_bytes(), 2, 2).is_err());
    }

    #[test]
    fn edgelist_basic_and_errors() {
        let l = parse_edgelist("0 1 2.0".as_bytes()).unwrap();
        assert_eq!((l.arcs.len(), l.nodes), (1, 2));
        let e = parse_edgelist("0 0 1.0".as_bytes()).unwrap_err();
        assert!(e.to_string().contains("self-loop"));
        let e = parse_edgelist("0 1 -1".as_bytes()).unwrap_err();
        assert!(e.to_string().contains("nonnegative weight required"));
    }
}
