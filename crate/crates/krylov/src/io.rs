//! CSV field dumps. Columns are documented in `docs/config.md`; floats use
//! shortest round-trip scientific notation.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use krylov_core::{HermitianField, ScalarField, TorusGrid};

fn coord_header(grid: &TorusGrid) -> String {
    (1..=grid.n()).map(|i| format!(",x{i},y{i}")).collect()
}

fn write_coords(w: &mut impl Write, grid: &TorusGrid, node: usize) -> std::io::Result<()> {
    write!(w, "{node}")?;
    for c in grid.coords(node) {
        write!(w, ",{c:e}")?;
    }
    Ok(())
}

/// `index,x1,y1,…,xn,yn,value`.
pub fn write_scalar(path: &Path, field: &ScalarField) -> std::io::Result<()> {
    let grid = field.grid();
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "index{},value", coord_header(grid))?;
    for (node, v) in field.values().iter().enumerate() {
        write_coords(&mut w, grid, node)?;
        writeln!(w, ",{v:e}")?;
    }
    w.flush()
}

/// `index,coords…,re_1_1,im_1_1,re_1_2,im_1_2,…` in row-major entry order.
pub fn write_hermitian(path: &Path, field: &HermitianField) -> std::io::Result<()> {
    let grid = field.grid();
    let n = grid.n();
    let mut w = BufWriter::new(File::create(path)?);
    write!(w, "index{}", coord_header(grid))?;
    for i in 1..=n {
        for j in 1..=n {
            write!(w, ",re_{i}_{j},im_{i}_{j}")?;
        }
    }
    writeln!(w)?;
    for node in 0..grid.nodes() {
        write_coords(&mut w, grid, node)?;
        for z in field.entries(node) {
            write!(w, ",{:e},{:e}", z.re, z.im)?;
        }
        writeln!(w)?;
    }
    w.flush()
}

/// `index,coords…,lambda_min,lambda_max`.
pub fn write_eigen_range(path: &Path, field: &HermitianField) -> Result<(), crate::CliError> {
    let grid = field.grid();
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "index{},lambda_min,lambda_max", coord_header(grid))?;
    for node in 0..grid.nodes() {
        let lambda = field.eigenvalues(node).map_err(crate::CliError::Math)?;
        write_coords(&mut w, grid, node)?;
        // eigenvalues are sorted descending
        writeln!(w, ",{:e},{:e}", lambda[lambda.len() - 1], lambda[0])?;
    }
    w.flush()?;
    Ok(())
}
