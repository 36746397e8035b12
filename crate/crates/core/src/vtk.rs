//! Legacy-VTK ASCII writers: unstructured grids with cell data and polydata
//! lines with point data. Points are padded to three coordinates.

use std::io::Write;

use crate::error::{Error, Result};

pub const VTK_TRIANGLE: u8 = 5;
pub const VTK_QUAD: u8 = 9;
pub const VTK_HEXAHEDRON: u8 = 12;

fn padded(p: &[f64]) -> Result<[f64; 3]> {
    if p.len() > 3 {
        return Err(Error::Unsupported(format!("VTK output needs at most 3 coordinates, found {}", p.len())));
    }
    let mut out = [0.0; 3];
    out[..p.len()].copy_from_slice(p);
    Ok(out)
}

fn write_points<W: Write>(w: &mut W, points: &[Vec<f64>]) -> Result<()> {
    writeln!(w, "POINTS {} double", points.len())?;
    for p in points {
        let [x, y, z] = padded(p)?;
        writeln!(w, "{x:e} {y:e} {z:e}")?;
    }
    Ok(())
}

fn sanitize(name: &str) -> String {
    name.chars().map(|c| if c.is_ascii_alphanumeric() || c == '_' { c } else { '_' }).collect()
}

fn write_data<W: Write>(w: &mut W, scalars: &[(&str, &[f64])], vectors: &[(&str, &[Vec<f64>])], count: usize) -> Result<()> {
    for (name, values) in scalars {
        if values.len() != count {
            return Err(Error::DimensionMismatch { expected: count, found: values.len() });
        }
        writeln!(w, "SCALARS {} double 1\nLOOKUP_TABLE default", sanitize(name))?;
        for v in values.iter() {
            writeln!(w, "{v:e}")?;
        }
    }
    for (name, values) in vectors {
        if values.len() != count {
            return Err(Error::DimensionMismatch { expected: count, found: values.len() });
        }
        writeln!(w, "VECTORS {} double", sanitize(name))?;
        for v in values.iter() {
            let [x, y, z] = padded(v)?;
            writeln!(w, "{x:e} {y:e} {z:e}")?;
        }
    }
    Ok(())
}

/// Unstructured grid of `(vtk type, point indices)` cells with per-cell data.
pub fn write_unstructured<W: Write>(
    mut w: W,
    title: &str,
    points: &[Vec<f64>],
    cells: &[(u8, Vec<usize>)],
    scalars: &[(&str, &[f64])],
    vectors: &[(&str, &[Vec<f64>])],
) -> Result<()> {
    writeln!(w, "# vtk DataFile Version 3.0\n{}\nASCII\nDATASET UNSTRUCTURED_GRID", title.replace('\n', " "))?;
    write_points(&mut w, points)?;
    let size: usize = cells.iter().map(|c| c.1.len() + 1).sum();
    writeln!(w, "CELLS {} {size}", cells.len())?;
    for (_, ids) in cells {
        write!(w, "{}", ids.len())?;
        for i in ids {
            write!(w, " {i}")?;
        }
        writeln!(w)?;
    }
    writeln!(w, "CELL_TYPES {}", cells.len())?;
    for (t, _) in cells {
        writeln!(w, "{t}")?;
    }
    if !scalars.is_empty() || !vectors.is_empty() {
        writeln!(w, "CELL_DATA {}", cells.len())?;
        write_data(&mut w, scalars, vectors, cells.len())?;
    }
    Ok(())
}

/// Polylines with per-point scalars (one value per point of every line, concatenated).
pub fn write_polylines<W: Write>(mut w: W, title: &str, lines: &[Vec<Vec<f64>>], scalars: &[(&str, &[f64])]) -> Result<()> {
    writeln!(w, "# vtk DataFile Version 3.0\n{}\nASCII\nDATASET POLYDATA", title.replace('\n', " "))?;
    let points: Vec<Vec<f64>> = lines.iter().flatten().cloned().collect();
    write_points(&mut w, &points)?;
    let size: usize = lines.iter().map(|l| l.len() + 1).sum();
    writeln!(w, "LINES {} {size}", lines.len())?;
    let mut next = 0;
    for l in lines {
        write!(w, "{}", l.len())?;
        for _ in l {
            write!(w, " {next}")?;
            next += 1;
        }
        writeln!(w)?;
    }
    if !scalars.is_empty() {
        writeln!(w, "POINT_DATA {}", points.len())?;
        write_data(&mut w, scalars, &[], points.len())?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polyline_counts_are_consistent() {
        let lines = vec![vec![vec![0.0, 0.0], vec![1.0, 0.0]], vec![vec![0.0, 1.0, 2.0]]];
        let mut out = Vec::new();
        write_polylines(&mut out, "t", &lines, &[("s", &[1.0, 2.0, 3.0])]).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert!(text.contains("POINTS 3 double") && text.contains("LINES 2 5") && text.contains("POINT_DATA 3"));
        assert!(write_polylines(Vec::new(), "t", &[vec![vec![0.0; 4]]], &[]).is_err());
    }
}
