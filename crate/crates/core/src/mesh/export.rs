use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use super::Mesh;

/// Writes `triangles.csv`, `edges.csv` and `duals.csv` into `dir`.
///
/// Plane meshes omit the z columns. Reals use 17 significant digits.
pub fn write_csv(mesh: &Mesh, dir: &Path) -> io::Result<()> {
    std::fs::create_dir_all(dir)?;
    let sphere = mesh.geometry().is_sphere();

    let mut w = BufWriter::new(File::create(dir.join("triangles.csv"))?);
    writeln!(w, "{}", if sphere { "id,cx,cy,cz,area" } else { "id,cx,cy,area" })?;
    for (id, c) in mesh.cells().iter().enumerate() {
        let p = c.circumcenter;
        if sphere {
            writeln!(w, "{id},{:.16e},{:.16e},{:.16e},{:.16e}", p.x, p.y, p.z, c.area)?;
        } else {
            writeln!(w, "{id},{:.16e},{:.16e},{:.16e}", p.x, p.y, c.area)?;
        }
    }
    w.flush()?;

    let mut w = BufWriter::new(File::create(dir.join("edges.csv"))?);
    writeln!(w, "{}", if sphere { "id,i,j,len_e,len_de,nx,ny,nz" } else { "id,i,j,len_e,len_de,nx,ny" })?;
    for (id, e) in mesh.edges().iter().enumerate() {
        let n = e.normal;
        write!(w, "{id},{},{},{:.16e},{:.16e},{:.16e},{:.16e}", e.cells[0], e.cells[1], e.length, e.dual_length, n.x, n.y)?;
        if sphere {
            write!(w, ",{:.16e}", n.z)?;
        }
        writeln!(w)?;
    }
    w.flush()?;

    let mut w = BufWriter::new(File::create(dir.join("duals.csv"))?);
    writeln!(w, "id,area")?;
    for (id, d) in mesh.duals().iter().enumerate() {
        writeln!(w, "{id},{:.16e}", d.area)?;
    }
    w.flush()
}
