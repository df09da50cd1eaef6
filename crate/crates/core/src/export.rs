//! Legacy ASCII VTK output with polygon cells, a reader for the same
//! subset, and CSV helpers.
//!
//! Numbers are written with 17 significant digits so that a write/read
//! cycle reproduces every `f64` exactly.

use std::fmt::Write as _;

use crate::assembly::NodalFields;
use crate::mesh::PolygonalMesh;
use crate::{Error, Result};

const VTK_POLYGON: usize = 7;

/// One named point-data array with 1 to 4 components per node.
#[derive(Debug, Clone, PartialEq)]
pub struct PointField {
    pub name: String,
    pub components: usize,
    pub values: Vec<f64>,
}

impl PointField {
    pub fn scalar(name: &str, values: Vec<f64>) -> Self {
        PointField {
            name: name.to_string(),
            components: 1,
            values,
        }
    }

    pub fn with_components(name: &str, components: usize, values: Vec<f64>) -> Self {
        PointField {
            name: name.to_string(),
            components,
            values,
        }
    }
}

/// The standard output fields: displacement, strain, stress, pressure and
/// von Mises stress.
pub fn nodal_point_fields(fields: &NodalFields) -> Vec<PointField> {
    let flat3 = |v: &[crate::Voigt]| v.iter().flat_map(|s| [s[0], s[1], s[2]]).collect::<Vec<_>>();
    vec![
        PointField::with_components(
            "displacement",
            3,
            fields.displacement.iter().flat_map(|u| [u.x, u.y, 0.0]).collect(),
        ),
        PointField::with_components("strain", 3, flat3(&fields.strain)),
        PointField::with_components("stress", 3, flat3(&fields.stress)),
        PointField::scalar("pressure", fields.pressure.clone()),
        PointField::scalar("von_mises", fields.von_mises.clone()),
    ]
}

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

/// `DATASET UNSTRUCTURED_GRID` with one `VTK_POLYGON` cell per element.
/// A field named `displacement` with 3 components is written as
/// `VECTORS`, everything else as `SCALARS`.
pub fn export_vtk(mesh: &PolygonalMesh, fields: &[PointField], title: &str) -> Result<String> {
    let n = mesh.num_nodes();
    for f in fields {
        if !(1..=4).contains(&f.components) {
            return Err(Error::Argument(format!("field `{}` has {} components", f.name, f.components)));
        }
        if f.values.len() != n * f.components {
            return Err(Error::Argument(format!(
                "field `{}` has {} values, expected {}",
                f.name,
                f.values.len(),
                n * f.components
            )));
        }
        if f.name.is_empty() || f.name.contains(char::is_whitespace) {
            return Err(Error::Argument(format!("invalid field name `{}`", f.name)));
        }
    }
    let mut s = String::new();
    s.push_str("# vtk DataFile Version 3.0\n");
    s.push_str(title.lines().next().unwrap_or(""));
    s.push_str("\nASCII\nDATASET UNSTRUCTURED_GRID\n");
    let _ = writeln!(s, "POINTS {n} double");
    for p in &mesh.nodes {
        let _ = writeln!(s, "{} {} {}", num(p.x), num(p.y), num(0.0));
    }
    let size: usize = mesh.elements.iter().map(|r| r.len() + 1).sum();
    let _ = writeln!(s, "CELLS {} {size}", mesh.num_elements());
    for ring in &mesh.elements {
        let _ = write!(s, "{}", ring.len());
        for v in ring {
            let _ = write!(s, " {v}");
        }
        s.push('\n');
    }
    let _ = writeln!(s, "CELL_TYPES {}", mesh.num_elements());
    for _ in &mesh.elements {
        let _ = writeln!(s, "{VTK_POLYGON}");
    }
    if !fields.is_empty() {
        let _ = writeln!(s, "POINT_DATA {n}");
    }
    for f in fields {
        if f.name == "displacement" && f.components == 3 {
            let _ = writeln!(s, "VECTORS {} double", f.name);
        } else {
            let _ = writeln!(s, "SCALARS {} double {}", f.name, f.components);
            s.push_str("LOOKUP_TABLE default\n");
        }
        for row in f.values.chunks(f.components) {
            let line: Vec<String> = row.iter().map(|&v| num(v)).collect();
            s.push_str(&line.join(" "));
            s.push('\n');
        }
    }
    Ok(s)
}

/// Contents of a file written by [`export_vtk`].
#[derive(Debug, Clone, PartialEq)]
pub struct VtkData {
    pub points: Vec<[f64; 3]>,
    pub cells: Vec<Vec<usize>>,
    pub fields: Vec<PointField>,
}

struct Tokens<'a> {
    items: Vec<&'a str>,
    pos: usize,
}

impl<'a> Tokens<'a> {
    fn next(&mut self) -> Result<&'a str> {
        let t = self.items.get(self.pos).copied().ok_or_else(|| bad("unexpected end of file"))?;
        self.pos += 1;
        Ok(t)
    }

    fn peek(&self) -> Option<&'a str> {
        self.items.get(self.pos).copied()
    }

    fn expect(&mut self, word: &str) -> Result<()> {
        match self.next()? {
            t if t == word => Ok(()),
            t => Err(bad(&format!("expected `{word}`, found `{t}`"))),
        }
    }

    fn parse<T: std::str::FromStr>(&mut self) -> Result<T> {
        let t = self.next()?;
        t.parse().map_err(|_| bad(&format!("cannot parse `{t}`")))
    }
}

fn bad(message: &str) -> Error {
    Error::Parse {
        line: 0,
        message: message.to_string(),
    }
}

/// Reads the subset of legacy ASCII VTK produced by [`export_vtk`].
pub fn read_vtk(text: &str) -> Result<VtkData> {
    let mut t = Tokens {
        items: text.lines().skip(3).flat_map(|l| l.split_whitespace()).collect(),
        pos: 0,
    };
    t.expect("DATASET")?;
    t.expect("UNSTRUCTURED_GRID")?;
    t.expect("POINTS")?;
    let n: usize = t.parse()?;
    t.next()?;
    let mut points = Vec::with_capacity(n);
    for _ in 0..n {
        points.push([t.parse()?, t.parse()?, t.parse()?]);
    }
    t.expect("CELLS")?;
    let ne: usize = t.parse()?;
    t.next()?;
    let mut cells = Vec::with_capacity(ne);
    for _ in 0..ne {
        let k: usize = t.parse()?;
        cells.push((0..k).map(|_| t.parse()).collect::<Result<Vec<usize>>>()?);
    }
    t.expect("CELL_TYPES")?;
    for _ in 0..=ne {
        t.next()?;
    }
    let mut fields = Vec::new();
    if t.peek().is_some() {
        t.expect("POINT_DATA")?;
        t.next()?;
        while let Some(kind) = t.peek() {
            t.next()?;
            let name = t.next()?.to_string();
            t.next()?;
            let components = match kind {
                "VECTORS" => 3,
                "SCALARS" => {
                    let c: usize = t.parse()?;
                    t.expect("LOOKUP_TABLE")?;
                    t.next()?;
                    c
                }
                other => return Err(bad(&format!("unsupported section `{other}`"))),
            };
            let values = (0..n * components).map(|_| t.parse()).collect::<Result<Vec<f64>>>()?;
            fields.push(PointField {
                name,
                components,
                values,
            });
        }
    }
    Ok(VtkData { points, cells, fields })
}

/// Comma-separated table with a header row; values use 17 significant
/// digits.
pub fn csv_table(header: &[&str], rows: &[Vec<f64>]) -> String {
    let mut s = header.join(",");
    s.push('\n');
    for r in rows {
        let line: Vec<String> = r.iter().map(|&v| num(v)).collect();
        s.push_str(&line.join(","));
        s.push('\n');
    }
    s
}
