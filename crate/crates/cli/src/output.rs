//! Plot-ready CSV files. Reals use 17 significant digits.

use std::fmt::Write as _;
use std::path::Path;

use choquard::diagnostics::{format_real, DiagnosticsReport};
use choquard::Field;

use crate::CliError;

fn real_or_na(x: Option<f64>) -> String {
    x.map_or_else(|| "n/a".into(), format_real)
}

/// Multi-index of the grid point nearest to `x`.
fn nearest(field: &Field, x: &[f64]) -> [usize; 3] {
    field.grid().unravel(field.grid().nearest_index(x))
}

/// Samples along the first axis through the grid point nearest to `through`:
/// `(x_0 - through_0, value)` for every point on that line.
pub fn axis_cut(field: &Field, through: &[f64]) -> Vec<(f64, f64)> {
    let grid = field.grid();
    let mut idx = nearest(field, through);
    (0..grid.points_per_axis())
        .map(|i| {
            idx[0] = i;
            let k = grid.ravel(&idx[..grid.dim()]);
            (grid.coordinate(i) - through[0], field.values()[k])
        })
        .collect()
}

/// `r, v` along the positive first axis from `center`.
pub fn radial_profile_csv(field: &Field, center: &[f64]) -> String {
    let mut out = String::from("r,value\n");
    for (r, v) in axis_cut(field, center).into_iter().filter(|(r, _)| *r >= 0.0) {
        let _ = writeln!(out, "{},{}", format_real(r), format_real(v));
    }
    out
}

pub const OVERLAY_HEADER: &str = "y,rescaled_solution,limiting_profile\n";

/// `y, u(a + eps y), v(y)` on the rescaled grid, along the first axis through 0.
pub fn overlay_csv(rescaled: &Field, limiting: &Field) -> String {
    let origin = vec![0.0; rescaled.grid().dim()];
    let mut out = String::from(OVERLAY_HEADER);
    for ((y, u), (_, v)) in axis_cut(rescaled, &origin).into_iter().zip(axis_cut(limiting, &origin)) {
        let _ = writeln!(out, "{},{},{}", format_real(y), format_real(u), format_real(v));
    }
    out
}

/// One row per eps, in ladder order.
pub fn sweep_table_csv(dim: usize, reports: &[DiagnosticsReport]) -> String {
    let mut out = String::from("eps,energy,scaled_energy");
    for k in 0..dim {
        let _ = write!(out, ",a_{k}");
    }
    out.push_str(",v_at_a,scaled_mass,sup_outside,unpenalized,hardy_kappa,residual,iterations\n");
    for r in reports {
        let c = r.concentration.as_ref();
        let mut row = vec![real_or_na(r.eps), real_or_na(r.energy), real_or_na(c.map(|c| c.scaled_energy))];
        for k in 0..dim {
            row.push(real_or_na(c.and_then(|c| c.a_eps.get(k).copied())));
        }
        row.extend([
            real_or_na(c.map(|c| c.v_at_a)),
            real_or_na(c.map(|c| c.scaled_mass_in_ball)),
            real_or_na(c.map(|c| c.sup_outside)),
            r.unpenalized.map_or_else(|| "n/a".into(), |b| b.to_string()),
            real_or_na(r.hardy_kappa),
            real_or_na(r.residual_rel),
            r.iterations.map_or_else(|| "n/a".into(), |n| n.to_string()),
        ]);
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

pub fn write(path: &Path, contents: &str) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    std::fs::write(path, contents)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use choquard::make_grid;

    #[test]
    fn axis_cut_follows_the_first_axis() {
        let grid = make_grid(2, 8, 4.0).unwrap();
        let f = Field::from_fn(grid, |x| x[0] + 10.0 * x[1]);
        let cut = axis_cut(&f, &[1.0, 2.0]);
        assert_eq!(cut.len(), 8);
        for (dx, v) in cut {
            assert!((v - (dx + 1.0 + 20.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn sweep_table_has_one_row_per_report() {
        let mut r = DiagnosticsReport::new();
        r.eps = Some(0.1);
        r.iterations = Some(3);
        let csv = sweep_table_csv(2, &[r.clone(), r]);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[0].contains("a_0,a_1"));
        assert!(lines[1].starts_with("1.0000000000000001e-1,n/a"));
        assert_eq!(lines[1].split(',').count(), lines[0].split(',').count());
    }
}
