//! Plot-ready data files plus a gnuplot script. No images are rendered.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::csv::{format_significant, write_atomic};
use super::scenario::ControllerSpec;
use crate::error::{Error, Result};
use crate::trajectory::Trajectory;

/// Subplot arrangement.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotLayout {
    /// 2x2: x, x', theta, theta'.
    FourPanel,
    /// 3x2: the four state panels plus s1/s2 and the outer surface.
    SixPanel,
}

impl PlotLayout {
    /// Six panels for the aggregated law, whose outer surface is worth
    /// plotting; four for everything else.
    pub fn for_controller(c: &ControllerSpec) -> Self {
        match c {
            ControllerSpec::Ahssmc(_) => PlotLayout::SixPanel,
            _ => PlotLayout::FourPanel,
        }
    }
}

struct Panel {
    file: &'static str,
    ylabel: &'static str,
    columns: Vec<&'static str>,
}

fn panels(layout: PlotLayout) -> Vec<Panel> {
    let mut p = vec![
        Panel { file: "x", ylabel: "x", columns: vec!["x"] },
        Panel { file: "xdot", ylabel: "derivative of x", columns: vec!["xdot"] },
        Panel { file: "theta", ylabel: "theta", columns: vec!["theta"] },
        Panel { file: "thetadot", ylabel: "derivative of theta", columns: vec!["thetadot"] },
    ];
    if layout == PlotLayout::SixPanel {
        p.push(Panel { file: "s1s2", ylabel: "s_1 (-), s_2 (:)", columns: vec!["s1", "s2"] });
        p.push(Panel { file: "S", ylabel: "S", columns: vec!["S"] });
    }
    p
}

fn row_values(traj: &Trajectory, i: usize, panel: usize) -> Vec<f64> {
    let s = traj.states[i];
    let sv = traj.surfaces[i].unwrap_or_default();
    match panel {
        0 => vec![s.x1],
        1 => vec![s.x2],
        2 => vec![s.x3],
        3 => vec![s.x4],
        4 => vec![sv.s1, sv.s2],
        _ => vec![sv.s3],
    }
}

/// Writes one whitespace-separated data file per subplot and a gnuplot
/// script `<prefix>.gp` that arranges them. Returns every written path, the
/// script last.
pub fn emit_plot_data(traj: &Trajectory, layout: PlotLayout, dir: &Path, prefix: &str) -> Result<Vec<PathBuf>> {
    if traj.is_empty() {
        return Err(Error::InvalidParams("cannot plot an empty trajectory".into()));
    }
    if layout == PlotLayout::SixPanel && !traj.has_surfaces() {
        return Err(Error::Config("six-panel layout needs surface values".into()));
    }
    std::fs::create_dir_all(dir)?;
    let (rows, cols) = match layout {
        PlotLayout::FourPanel => (2, 2),
        PlotLayout::SixPanel => (3, 2),
    };

    let mut written = Vec::new();
    let mut script = String::new();
    let _ = writeln!(script, "# gnuplot script");
    let _ = writeln!(script, "set terminal pngcairo size 1000,{}", 330 * rows);
    let _ = writeln!(script, "set output '{prefix}.png'");
    let _ = writeln!(script, "set multiplot layout {rows},{cols}");
    let _ = writeln!(script, "set xlabel 't(sec)'");

    for (pi, panel) in panels(layout).iter().enumerate() {
        let name = format!("{prefix}_{}.dat", panel.file);
        let mut data = format!("# t {}\n", panel.columns.join(" "));
        for i in 0..traj.len() {
            data.push_str(&format_significant(traj.times[i], 9));
            for v in row_values(traj, i, pi) {
                data.push(' ');
                data.push_str(&format_significant(v, 9));
            }
            data.push('\n');
        }
        let path = dir.join(&name);
        write_atomic(&path, &data)?;
        written.push(path);

        let _ = writeln!(script, "set ylabel '{}'", panel.ylabel);
        if panel.columns.len() == 2 {
            let _ = writeln!(
                script,
                "plot '{name}' using 1:2 with lines dt 1 title 's_1', '' using 1:3 with lines dt 3 title 's_2'"
            );
        } else {
            let _ = writeln!(script, "plot '{name}' using 1:2 with lines notitle");
        }
    }
    let _ = writeln!(script, "unset multiplot");
    let path = dir.join(format!("{prefix}.gp"));
    write_atomic(&path, &script)?;
    written.push(path);
    Ok(written)
}
