//! Line-oriented tree interchange format:
//!
//! ```text
//! tree v1 <n> <root>
//! <vertex> <parent> <edge_length>      (one line per non-root vertex)
//! mass <vertex> <value>                (optional)
//! ```
//!
//! Blank lines are skipped. Reals are written with 17 significant digits so
//! that a round trip is exact.

use std::fmt::Write as _;

use super::{RootedMetricTree, SpeedMeasure, Vertex};
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct TreeFile {
    pub tree: RootedMetricTree,
    /// Present iff the file carried at least one `mass` line; missing
    /// vertices get mass zero.
    pub measure: Option<SpeedMeasure>,
}

fn real(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_tree(t: &RootedMetricTree, nu: Option<&SpeedMeasure>) -> String {
    let mut out = String::new();
    writeln!(out, "tree v1 {} {}", t.vertex_count(), t.root()).unwrap();
    for v in t.vertices().filter(|&v| v != t.root()) {
        writeln!(out, "{} {} {}", v, t.parent(v), real(t.edge_length(v))).unwrap();
    }
    if let Some(nu) = nu {
        for v in t.vertices() {
            writeln!(out, "mass {} {}", v, real(nu.mass(v))).unwrap();
        }
    }
    out
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn field<T: std::str::FromStr>(tok: Option<&str>, line: usize, what: &str) -> Result<T> {
    let tok = tok.ok_or_else(|| parse_err(line, format!("missing {what}")))?;
    tok.parse()
        .map_err(|_| parse_err(line, format!("cannot parse {what} from {tok:?}")))
}

pub fn read_tree(text: &str) -> Result<TreeFile> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());
    let (hl, header) = lines.next().ok_or_else(|| parse_err(1, "empty file"))?;
    let mut toks = header.split_whitespace();
    if toks.next() != Some("tree") || toks.next() != Some("v1") {
        return Err(parse_err(hl, "expected header `tree v1 <n> <root>`"));
    }
    let n: usize = field(toks.next(), hl, "vertex count")?;
    let root: Vertex = field(toks.next(), hl, "root")?;
    if toks.next().is_some() {
        return Err(parse_err(hl, "trailing tokens in header"));
    }
    if root >= n {
        return Err(parse_err(hl, format!("root {root} out of range")));
    }
    let mut parent: Vec<Option<Vertex>> = vec![None; n];
    parent[root] = Some(root);
    let mut length = vec![0.0; n];
    let mut mass: Option<Vec<f64>> = None;
    for (ln, line) in lines {
        let mut toks = line.split_whitespace();
        let first = toks.next().unwrap();
        if first == "mass" {
            let v: Vertex = field(toks.next(), ln, "vertex")?;
            let m: f64 = field(toks.next(), ln, "mass")?;
            if v >= n {
                return Err(parse_err(ln, format!("vertex {v} out of range")));
            }
            mass.get_or_insert_with(|| vec![0.0; n])[v] = m;
        } else {
            let v: Vertex = field(Some(first), ln, "vertex")?;
            let p: Vertex = field(toks.next(), ln, "parent")?;
            let l: f64 = field(toks.next(), ln, "edge length")?;
            if v >= n {
                return Err(parse_err(ln, format!("vertex {v} out of range")));
            }
            if v == root || parent[v].is_some() {
                return Err(parse_err(ln, format!("duplicate entry for vertex {v}")));
            }
            parent[v] = Some(p);
            length[v] = l;
        }
        if toks.next().is_some() {
            return Err(parse_err(ln, "trailing tokens"));
        }
    }
    let parent = parent
        .into_iter()
        .enumerate()
        .map(|(v, p)| p.ok_or(Error::DanglingVertex(v)))
        .collect::<Result<Vec<_>>>()?;
    let tree = RootedMetricTree::new(parent, length, root)?;
    let measure = mass.map(SpeedMeasure::new_allow_zero).transpose()?;
    Ok(TreeFile { tree, measure })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_minimal_file() {
        let f = read_tree("tree v1 3 0\n1 0 1.5\n2 1 0.25\nmass 2 3\n").unwrap();
        assert_eq!(f.tree.distance(0, 2), 1.75);
        assert_eq!(f.measure.unwrap().masses(), &[0.0, 0.0, 3.0]);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(read_tree("tree v2 1 0"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(
            read_tree("tree v1 2 0\n1 0 x\n"),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(matches!(
            read_tree("tree v1 3 0\n1 0 1\n"),
            Err(Error::DanglingVertex(2))
        ));
        assert!(matches!(
            read_tree("tree v1 2 0\n1 0 -1\n"),
            Err(Error::NonPositiveLength { .. })
        ));
    }

    proptest! {
        #[test]
        fn round_trip_is_exact(lengths in prop::collection::vec(1e-6f64..1e3, 1..20),
                               masses in prop::collection::vec(0.0f64..10.0, 21)) {
            let t = RootedMetricTree::path(&lengths).unwrap();
            let nu = SpeedMeasure::new_allow_zero(masses[..t.vertex_count()].to_vec()).unwrap();
            let text = write_tree(&t, Some(&nu));
            let back = read_tree(&text).unwrap();
            prop_assert_eq!(back.tree.edge_lengths(), t.edge_lengths());
            prop_assert_eq!(back.measure.unwrap(), nu);
        }
    }
}
