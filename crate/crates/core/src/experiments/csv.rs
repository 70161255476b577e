//! Trajectory CSV format.
//!
//! Header `t,x1,x2,x3,x4,u,s1,s2,s3_or_S,status`, one row per recorded
//! sample, numbers in plain decimal notation with nine significant digits.
//! Surface columns are blank for open-loop runs. The status column holds
//! `ok` on every row except the last, which carries the terminal status
//! token (`completed`, `diverged`, `singular_gain:<denominator>`,
//! `step_underflow`).

use std::fmt::Write as _;
use std::path::Path;

use crate::control::SurfaceValues;
use crate::error::{Error, Result};
use crate::ode::Status;
use crate::plant::StateVector;
use crate::trajectory::Trajectory;

pub const HEADER: &str = "t,x1,x2,x3,x4,u,s1,s2,s3_or_S,status";

/// Decimal rendering of `x` with `digits` significant digits.
pub fn format_significant(x: f64, digits: usize) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let exponent = x.abs().log10().floor() as i64;
    let decimals = (digits as i64 - 1 - exponent).max(0) as usize;
    let s = format!("{x:.decimals$}");
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

fn num(x: f64) -> String {
    format_significant(x, 9)
}

pub fn to_csv_string(traj: &Trajectory) -> String {
    let mut out = String::with_capacity(64 * (traj.len() + 1));
    out.push_str(HEADER);
    out.push('\n');
    let last = traj.len().saturating_sub(1);
    for i in 0..traj.len() {
        let s = traj.states[i];
        let _ = write!(
            out,
            "{},{},{},{},{},{},",
            num(traj.times[i]),
            num(s.x1),
            num(s.x2),
            num(s.x3),
            num(s.x4),
            num(traj.controls[i])
        );
        match traj.surfaces[i] {
            Some(sv) => {
                let _ = write!(out, "{},{},{},", num(sv.s1), num(sv.s2), num(sv.s3));
            }
            None => out.push_str(",,,"),
        }
        if i == last {
            out.push_str(&traj.status.token());
        } else {
            out.push_str("ok");
        }
        out.push('\n');
    }
    out
}

/// Writes `contents` to `path` through a temporary sibling and a rename.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    std::fs::write(&tmp, contents)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

pub fn export_csv(traj: &Trajectory, path: &Path) -> Result<()> {
    write_atomic(path, &to_csv_string(traj))
}

fn parse_f64(field: &str, line: usize) -> Result<f64> {
    field.trim().parse().map_err(|_| Error::Config(format!("line {line}: bad number `{field}`")))
}

/// Parses the CSV format back into a trajectory. Effective gains on the
/// surfaces and step statistics are not stored and come back as zero.
pub fn parse_csv(text: &str) -> Result<Trajectory> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == HEADER => {}
        _ => return Err(Error::Config("missing trajectory CSV header".into())),
    }
    let mut traj = Trajectory::empty();
    let mut last_status = None;
    for (idx, line) in lines {
        let n = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 10 {
            return Err(Error::Config(format!("line {n}: expected 10 fields, found {}", fields.len())));
        }
        let v: Vec<f64> = fields[..6].iter().map(|f| parse_f64(f, n)).collect::<Result<_>>()?;
        traj.times.push(v[0]);
        traj.states.push(StateVector::new(v[1], v[2], v[3], v[4]));
        traj.controls.push(v[5]);
        let surf = &fields[6..9];
        if surf.iter().all(|f| f.trim().is_empty()) {
            traj.surfaces.push(None);
        } else {
            traj.surfaces.push(Some(SurfaceValues {
                s1: parse_f64(surf[0], n)?,
                s2: parse_f64(surf[1], n)?,
                s3: parse_f64(surf[2], n)?,
                ..Default::default()
            }));
        }
        last_status = Some((fields[9].trim().to_string(), v[0]));
    }
    if let Some((token, t)) = last_status {
        traj.status =
            Status::from_token(&token, t).ok_or_else(|| Error::Config(format!("unknown status `{token}`")))?;
    }
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn significant_digit_formatting() {
        assert_eq!(format_significant(0.0, 9), "0");
        assert_eq!(format_significant(1.0, 9), "1");
        assert_eq!(format_significant(-3.278688524590164, 9), "-3.27868852");
        assert_eq!(format_significant(1234.5678912345, 9), "1234.56789");
        assert_eq!(format_significant(0.000123456789123, 9), "0.000123456789");
        assert_eq!(format_significant(123456789012.0, 9), "123456789012");
    }

    #[test]
    fn empty_trajectory_is_header_only() {
        assert_eq!(to_csv_string(&Trajectory::empty()), format!("{HEADER}\n"));
        let back = parse_csv(&to_csv_string(&Trajectory::empty())).unwrap();
        assert!(back.is_empty());
    }

    #[test]
    fn rejects_malformed_input() {
        assert!(parse_csv("t,x\n").is_err());
        assert!(parse_csv(&format!("{HEADER}\n1,2,3\n")).is_err());
        assert!(parse_csv(&format!("{HEADER}\n0,0,0,0,0,0,,,,bogus\n")).is_err());
    }

    proptest! {
        #[test]
        fn round_trip_is_lossless_to_nine_digits(
            rows in proptest::collection::vec(
                (proptest::array::uniform4(-1e4..1e4f64), -1e3..1e3f64, proptest::option::of(proptest::array::uniform3(-1e3..1e3f64))),
                1..20),
            diverged in any::<bool>()
        ) {
            let mut traj = Trajectory::empty();
            for (i, (x, u, sv)) in rows.iter().enumerate() {
                traj.times.push(0.01 * (i + 1) as f64 + 1e-7);
                traj.states.push(StateVector::from_array(*x));
                traj.controls.push(*u);
                traj.surfaces.push(sv.map(|s| SurfaceValues { s1: s[0], s2: s[1], s3: s[2], ..Default::default() }));
            }
            let t_last = *traj.times.last().unwrap();
            traj.status = if diverged { Status::Diverged { t: t_last } } else { Status::Completed };
            let back = parse_csv(&to_csv_string(&traj)).unwrap();
            prop_assert_eq!(back.len(), traj.len());
            prop_assert_eq!(back.status.token(), traj.status.token());
            if let (Status::Diverged { t: a }, Status::Diverged { t: b }) = (back.status, traj.status) {
                prop_assert!((a - b).abs() <= 1e-8 * b.abs());
            }
            let close = |a: f64, b: f64| (a - b).abs() <= 1e-8 * b.abs().max(1e-300);
            for i in 0..traj.len() {
                prop_assert!(close(back.times[i], traj.times[i]));
                for (a, b) in back.states[i].to_array().iter().zip(traj.states[i].to_array()) {
                    prop_assert!(close(*a, b), "{} vs {}", a, b);
                }
                prop_assert!(close(back.controls[i], traj.controls[i]));
                match (back.surfaces[i], traj.surfaces[i]) {
                    (None, None) => {}
                    (Some(a), Some(b)) => {
                        prop_assert!(close(a.s1, b.s1) && close(a.s2, b.s2) && close(a.s3, b.s3));
                    }
                    _ => prop_assert!(false, "surface presence mismatch"),
                }
            }
        }
    }
}
