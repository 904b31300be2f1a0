//! CSV persistence of profiles, fields and tables. Floats are written in
//! shortest round-trip form, so reading a file back gives the same bits.

use std::fs;
use std::path::Path;

use layered_ac_core::grid::SymGrid;
use layered_ac_core::one_dim::Profile1D;
use layered_ac_core::prism3d::{Field3D, PrismGrid};
use layered_ac_core::strip2d::Field2D;

use crate::config::PrismConfig;
use crate::error::CliError;

pub fn f(v: f64) -> String {
    format!("{v}")
}

pub fn flag(b: bool) -> String {
    if b { "true" } else { "false" }.to_string()
}

pub fn write_csv(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// A parsed CSV file with named columns.
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
    path: String,
}

impl Table {
    pub fn read(path: &Path) -> Result<Self, CliError> {
        let mut r = csv::Reader::from_path(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        let header = r.headers()?.iter().map(str::to_string).collect();
        let rows = r
            .records()
            .map(|rec| rec.map(|r| r.iter().map(str::to_string).collect()))
            .collect::<Result<Vec<Vec<String>>, _>>()?;
        Ok(Self { header, rows, path: path.display().to_string() })
    }

    pub fn column(&self, name: &str) -> Result<usize, CliError> {
        self.header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| CliError::Io(format!("{}: no column `{name}`", self.path)))
    }

    pub fn num(&self, row: usize, col: usize) -> Result<f64, CliError> {
        let s = &self.rows[row][col];
        s.parse().map_err(|_| CliError::Io(format!("{}: row {}: `{s}` is not a number", self.path, row + 1)))
    }

    pub fn numbers(&self, name: &str) -> Result<Vec<f64>, CliError> {
        let c = self.column(name)?;
        (0..self.rows.len()).map(|r| self.num(r, c)).collect()
    }
}

fn grid_from_abscissae(xs: &[f64], what: &str) -> Result<SymGrid<f64>, CliError> {
    let last = *xs.last().ok_or_else(|| CliError::Io(format!("{what}: empty")))?;
    SymGrid::new(last, xs.len()).map_err(|e| CliError::Io(format!("{what}: {e}")))
}

/// Profiles side by side: `x, q1_0, q2_0, q1_1, q2_1, ...`.
pub fn write_profiles(path: &Path, profiles: &[&Profile1D<f64>], names: [&str; 2]) -> Result<(), CliError> {
    let first = profiles.first().ok_or_else(|| CliError::Io("no profiles to write".into()))?;
    let mut header = vec!["x".to_string()];
    for k in 0..profiles.len() {
        header.push(format!("{}_{k}", names[0]));
        header.push(format!("{}_{k}", names[1]));
    }
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let rows = (0..first.n()).map(|i| {
        let mut row = vec![f(first.x(i))];
        for q in profiles {
            row.push(f(q.values[i][0]));
            row.push(f(q.values[i][1]));
        }
        row
    });
    write_csv(path, &header, rows)
}

pub fn read_profiles(path: &Path) -> Result<Vec<Profile1D<f64>>, CliError> {
    let t = Table::read(path)?;
    let grid = grid_from_abscissae(&t.numbers("x")?, &path.display().to_string())?;
    let count = (t.header.len() - 1) / 2;
    (0..count)
        .map(|k| {
            let values = (0..t.rows.len())
                .map(|r| Ok([t.num(r, 1 + 2 * k)?, t.num(r, 2 + 2 * k)?]))
                .collect::<Result<Vec<_>, CliError>>()?;
            Ok(Profile1D { grid, values })
        })
        .collect()
}

pub fn write_field2d(path: &Path, v: &Field2D<f64>) -> Result<(), CliError> {
    let rows = (0..v.ny()).flat_map(|iy| {
        (0..v.nx()).map(move |ix| {
            let p = v.at(ix, iy);
            vec![f(v.xgrid.x(ix)), f(v.ygrid.x(iy)), f(p[0]), f(p[1])]
        })
    });
    write_csv(path, &["x", "y", "v1", "v2"], rows)
}

/// Active prism nodes level by level, rows `y = -n hy .. n hy`, `x` fastest.
pub fn write_field3d(path: &Path, u: &Field3D<f64>) -> Result<(), CliError> {
    let rows = (0..u.nz()).flat_map(|k| {
        let n = u.half_rows[k] as isize;
        (-n..=n).flat_map(move |iy| {
            (0..u.nx()).map(move |ix| {
                let p = u.at(k, ix, iy);
                vec![
                    k.to_string(),
                    iy.to_string(),
                    ix.to_string(),
                    f(u.xgrid.x(ix)),
                    f(iy as f64 * u.hy),
                    f(u.z(k)),
                    f(p[0]),
                    f(p[1]),
                ]
            })
        })
    });
    write_csv(path, &["k", "iy", "ix", "x", "y", "z", "u1", "u2"], rows)
}

/// Rebuilds a prism field written by [`write_field3d`] on the grid of `cfg`.
pub fn read_field3d(path: &Path, cfg: &PrismConfig) -> Result<Field3D<f64>, CliError> {
    let t = Table::read(path)?;
    let (c1, c2) = (t.column("u1")?, t.column("u2")?);
    let grid = PrismGrid { x_extent: cfg.x_extent, hx: cfg.hx, hy: cfg.hy, hz: cfg.hz };
    let mut row = 0;
    let mut failure = None;
    let u = Field3D::from_fn(cfg.j, cfg.z_extent, &grid, cfg.cap, |_, _, _| {
        if row >= t.rows.len() {
            failure.get_or_insert_with(|| CliError::Io(format!("{}: too few rows", path.display())));
            return [0.0; 2];
        }
        let v = t.num(row, c1).and_then(|a| Ok([a, t.num(row, c2)?]));
        row += 1;
        v.unwrap_or_else(|e| {
            failure.get_or_insert(e);
            [0.0; 2]
        })
    })?;
    if let Some(e) = failure {
        return Err(e);
    }
    if row != t.rows.len() {
        return Err(CliError::Io(format!(
            "{}: {} rows but the configured prism has {row} nodes",
            path.display(),
            t.rows.len()
        )));
    }
    Ok(u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use layered_ac_core::prism3d::CapCondition;

    fn tmp(name: &str) -> std::path::PathBuf {
        std::env::temp_dir().join(format!("lac-artifacts-{}-{name}", std::process::id()))
    }

    #[test]
    fn profiles_round_trip_bitwise() {
        let g = SymGrid::with_spacing(3.0, 0.1).unwrap();
        let q = Profile1D::from_fn(g, |x: f64| [x.tanh(), 0.3 / x.cosh()]);
        let path = tmp("profiles.csv");
        write_profiles(&path, &[&q, &q.bar()], ["q1", "q2"]).unwrap();
        let back = read_profiles(&path).unwrap();
        assert_eq!(back, vec![q.clone(), q.bar()]);
        fs::remove_file(path).unwrap();
    }

    #[test]
    fn prism_field_round_trip_bitwise() {
        let cfg = PrismConfig {
            j: 3,
            z_extent: 1.2,
            x_extent: 1.0,
            hx: 0.25,
            hy: 0.2,
            hz: 0.2,
            cap: CapCondition::Dirichlet,
            grad_tol: 1e-7,
            max_iterations: 10,
        };
        let grid = PrismGrid { x_extent: 1.0, hx: 0.25, hy: 0.2, hz: 0.2 };
        let u = Field3D::from_fn(3, 1.2, &grid, CapCondition::Dirichlet, |x: f64, y: f64, z: f64| {
            [x.tanh() + 0.1 * z, y * 0.7]
        })
        .unwrap();
        let path = tmp("field.csv");
        write_field3d(&path, &u).unwrap();
        assert_eq!(read_field3d(&path, &cfg).unwrap(), u);
        let mut other = cfg.clone();
        other.z_extent = 1.0;
        assert!(read_field3d(&path, &other).is_err());
        fs::remove_file(path).unwrap();
    }
}
