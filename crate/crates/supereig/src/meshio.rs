//! Plain-text meshes and coordinate-format matrices.
//!
//! ```text
//! nodes 4
//! 0 0 0 9
//! ...
//! elements 2
//! 0 0 1 3
//! ...
//! ```
//!
//! Node records are `index x y boundary_tag`, where `boundary_tag` is the
//! bitmask of the boundary segments through the node (bit `s - 1` for
//! segment `s`, zero for interior nodes). On import a boundary edge gets
//! the lowest segment shared by both endpoints. Blank lines and lines
//! starting with `#` are ignored.

use std::io::{BufRead, Write};

use supereig_core::sparse::CsrMatrix;
use supereig_core::Triangulation;

use crate::error::{CliError, CliResult};

pub fn write_mesh(mesh: &Triangulation, mut w: impl Write) -> CliResult<()> {
    let masks = mesh.vertex_segment_masks();
    writeln!(w, "nodes {}", mesh.n_vertices())?;
    for (i, (p, m)) in mesh.vertices().iter().zip(&masks).enumerate() {
        writeln!(w, "{i} {:?} {:?} {m}", p[0], p[1])?;
    }
    writeln!(w, "elements {}", mesh.n_triangles())?;
    for (i, t) in mesh.triangles().iter().enumerate() {
        writeln!(w, "{i} {} {} {}", t[0], t[1], t[2])?;
    }
    w.flush()?;
    Ok(())
}

struct Lines<R> {
    inner: std::io::Lines<R>,
    line: usize,
}

impl<R: BufRead> Lines<R> {
    fn next_record(&mut self) -> CliResult<Option<(usize, Vec<String>)>> {
        for l in self.inner.by_ref() {
            self.line += 1;
            let l = l?;
            let t = l.trim();
            if t.is_empty() || t.starts_with('#') {
                continue;
            }
            return Ok(Some((self.line, t.split_whitespace().map(str::to_owned).collect())));
        }
        Ok(None)
    }

    fn expect(&mut self, what: &str) -> CliResult<(usize, Vec<String>)> {
        self.next_record()?
            .ok_or_else(|| CliError::Parse { line: self.line + 1, message: format!("unexpected end of file, expected {what}") })
    }

    fn header(&mut self, name: &str) -> CliResult<usize> {
        let (line, f) = self.expect(name)?;
        match f.as_slice() {
            [h, n] if h == name => field(line, n),
            _ => Err(CliError::Parse { line, message: format!("expected `{name} <count>`") }),
        }
    }
}

fn field<T: std::str::FromStr>(line: usize, s: &str) -> CliResult<T> {
    s.parse().map_err(|_| CliError::Parse { line, message: format!("bad field `{s}`") })
}

fn record(line: usize, f: &[String], index: usize) -> CliResult<&[String]> {
    if f.len() != 4 {
        return Err(CliError::Parse { line, message: format!("expected 4 fields, found {}", f.len()) });
    }
    if field::<usize>(line, &f[0])? != index {
        return Err(CliError::Parse { line, message: format!("expected record index {index}") });
    }
    Ok(&f[1..])
}

/// Reads a mesh written by [`write_mesh`]. The result has no domain and
/// counts as level 1.
pub fn read_mesh(r: impl BufRead) -> CliResult<Triangulation> {
    let mut lines = Lines { inner: r.lines(), line: 0 };
    let nv = lines.header("nodes")?;
    let mut vertices = Vec::with_capacity(nv);
    let mut masks = Vec::with_capacity(nv);
    for i in 0..nv {
        let (line, f) = lines.expect("a node record")?;
        let f = record(line, &f, i)?;
        vertices.push([field::<f64>(line, &f[0])?, field::<f64>(line, &f[1])?]);
        masks.push(field::<u32>(line, &f[2])?);
    }
    let nt = lines.header("elements")?;
    let mut triangles = Vec::with_capacity(nt);
    for i in 0..nt {
        let (line, f) = lines.expect("an element record")?;
        let f = record(line, &f, i)?;
        triangles.push([field(line, &f[0])?, field(line, &f[1])?, field(line, &f[2])?]);
    }
    if let Some((line, _)) = lines.next_record()? {
        return Err(CliError::Parse { line, message: "trailing data after elements".into() });
    }
    let tag = |a: usize, b: usize| {
        let common = masks[a] & masks[b];
        if common == 0 {
            0
        } else {
            (common.trailing_zeros() + 1) as u8
        }
    };
    Ok(Triangulation::from_parts(vertices, triangles, tag)?)
}

/// `i j value` lines, 0-based, one per stored entry.
pub fn write_coo(a: &CsrMatrix, mut w: impl Write) -> CliResult<()> {
    for (i, j, v) in a.iter() {
        writeln!(w, "{i} {j} {v:?}")?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use supereig_core::Domain;

    #[test]
    fn round_trip_keeps_everything() {
        let m = Triangulation::build(Domain::LShape, 2).unwrap();
        let mut buf = Vec::new();
        write_mesh(&m, &mut buf).unwrap();
        let back = read_mesh(buf.as_slice()).unwrap();
        assert_eq!(back.vertices(), m.vertices());
        assert_eq!(back.triangles(), m.triangles());
        assert_eq!(back.edges(), m.edges());
    }

    #[test]
    fn rejects_bad_records() {
        let bad = "nodes 1\n0 0.0 zero 0\nelements 0\n";
        match read_mesh(bad.as_bytes()) {
            Err(CliError::Parse { line: 2, .. }) => {}
            other => panic!("{other:?}"),
        }
        assert!(read_mesh("nodes 2\n0 0 0 0\n".as_bytes()).is_err());
    }

    #[test]
    fn untagged_boundary_is_an_error() {
        let s = "nodes 3\n0 0 0 0\n1 1 0 0\n2 0 1 0\nelements 1\n0 0 1 2\n";
        assert!(matches!(read_mesh(s.as_bytes()), Err(CliError::Core(_))));
    }

    #[test]
    fn coo_lines() {
        let a = CsrMatrix::from_triplets(2, 2, vec![(0, 0, 2.0), (1, 0, -1.0)]);
        let mut buf = Vec::new();
        write_coo(&a, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "0 0 2.0\n1 0 -1.0\n");
    }
}
