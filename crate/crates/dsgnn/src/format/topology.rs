//! Edge-list text: `n m seed`, then `u v` per edge with `u < v` in
//! lexicographic order. `m = 0` marks a graph that did not come from the
//! generator.

use std::io::{BufRead, Write};
use std::path::Path;

use dsgnn_core::Topology;

use crate::error::{Error, Result};
use crate::format::{create, open};

pub fn write_topology<W: Write>(t: &Topology, mut w: W) -> std::io::Result<()> {
    writeln!(w, "{} {} {}", t.node_count(), t.ba_m().unwrap_or(0), t.seed())?;
    for (u, v) in t.edges() {
        writeln!(w, "{u} {v}")?;
    }
    w.flush()
}

pub fn read_topology<R: BufRead>(r: R, path: &Path) -> Result<Topology> {
    let mut lines = r.lines().enumerate();
    let (n, m, seed) = match lines.next() {
        Some((_, line)) => {
            let line = line.map_err(|e| Error::io(path, e))?;
            let f: Vec<&str> = line.split_whitespace().collect();
            if f.len() != 3 {
                return Err(Error::parse(path, 1, "header must be `n m seed`"));
            }
            let num = |s: &str, what: &str| s.parse::<u64>().map_err(|_| Error::parse(path, 1, format!("bad {what} `{s}`")));
            (num(f[0], "node count")? as usize, num(f[1], "m")? as usize, num(f[2], "seed")?)
        }
        None => return Err(Error::parse(path, 1, "empty topology file")),
    };
    if n > u32::MAX as usize {
        return Err(Error::parse(path, 1, "node count exceeds u32 range"));
    }
    let mut edges = Vec::new();
    let mut last: Option<(u32, u32)> = None;
    for (i, line) in lines {
        let line = line.map_err(|e| Error::io(path, e))?;
        let line_no = i + 1;
        let mut f = line.split_whitespace();
        let (Some(a), Some(b), None) = (f.next(), f.next(), f.next()) else {
            return Err(Error::parse(path, line_no, "edge line must be `u v`"));
        };
        let parse = |s: &str| s.parse::<u32>().map_err(|_| Error::parse(path, line_no, format!("bad node id `{s}`")));
        let (u, v) = (parse(a)?, parse(b)?);
        if u >= v {
            return Err(Error::parse(path, line_no, format!("edge {u} {v} must have u < v")));
        }
        if v as usize >= n {
            return Err(Error::parse(path, line_no, format!("node {v} out of range for n = {n}")));
        }
        if last.is_some_and(|p| p >= (u, v)) {
            return Err(Error::parse(path, line_no, "edges must be strictly increasing in lexicographic order"));
        }
        last = Some((u, v));
        edges.push((u, v));
    }
    let t = if m == 0 {
        Topology::from_edges(n, &edges)?
    } else {
        Topology::from_ba_edges(n, m, seed, &edges)?
    };
    Ok(t)
}

pub fn save_topology(t: &Topology, path: &Path) -> Result<()> {
    write_topology(t, create(path)?).map_err(|e| Error::io(path, e))
}

pub fn load_topology(path: &Path) -> Result<Topology> {
    read_topology(open(path)?, path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use dsgnn_core::topology::generate_ba;

    fn bytes(t: &Topology) -> Vec<u8> {
        let mut out = Vec::new();
        write_topology(t, &mut out).unwrap();
        out
    }

    #[test]
    fn round_trip_is_byte_exact() {
        let t = generate_ba(300, 4, 17).unwrap();
        let first = bytes(&t);
        let back = read_topology(&first[..], Path::new("mem")).unwrap();
        assert_eq!(back, t);
        assert_eq!(bytes(&back), first);
        assert!(first.starts_with(b"300 4 17\n0 4\n"));
    }

    #[test]
    fn non_generator_graph_round_trips() {
        let t = Topology::from_edges(4, &[(0, 1), (2, 3)]).unwrap();
        let text = bytes(&t);
        assert_eq!(text, b"4 0 0\n0 1\n2 3\n");
        assert_eq!(read_topology(&text[..], Path::new("mem")).unwrap(), t);
    }

    #[test]
    fn malformed_files_name_the_line() {
        let cases: [(&str, usize); 6] = [
            ("", 1),
            ("3 1\n", 1),
            ("3 1 0\n1 0\n", 2),
            ("3 1 0\n0 1\n0 3\n", 3),
            ("3 1 0\n0 2\n0 1\n", 3),
            ("3 1 0\n0 1\n0 1\n", 3),
        ];
        for (text, line) in cases {
            match read_topology(text.as_bytes(), Path::new("t.txt")) {
                Err(Error::Parse { line: l, .. }) => assert_eq!(l, line, "{text:?}"),
                other => panic!("{text:?}: {other:?}"),
            }
        }
    }
}
