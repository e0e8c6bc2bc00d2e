//! CSV files: motion cues in, trajectories out.

use std::path::Path;

use cannpi_core::eval::TrajectorySample;
use cannpi_core::pi::MotionCue;
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{Error, Result};

pub const CUE_HEADER: [&str; 4] = ["t", "v_trans", "v_height", "yaw_rate"];
pub const TRAJECTORY_HEADER: [&str; 6] = ["frame", "t", "x", "y", "z", "yaw"];

fn read_rows<T: DeserializeOwned>(path: &Path, header: &[&str]) -> Result<Vec<T>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    let found = rdr.headers().map_err(|e| csv_error(path, e))?.clone();
    if found.iter().ne(header.iter().copied()) {
        return Err(Error::Line {
            path: path.to_path_buf(),
            line: 1,
            message: format!("expected header `{}`", header.join(",")),
        });
    }
    let mut rows = Vec::new();
    for rec in rdr.deserialize() {
        rows.push(rec.map_err(|e| csv_error(path, e))?);
    }
    Ok(rows)
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    if let Some(line) = e.position().map(|p| p.line() as usize) {
        return Error::Line {
            path: path.to_path_buf(),
            line,
            message: e.to_string(),
        };
    }
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::format(path, format!("{other:?}")),
    }
}

fn write_rows<T: Serialize>(path: &Path, header: &[&str], rows: impl IntoIterator<Item = T>) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    w.write_record(header).map_err(|e| csv_error(path, e))?;
    for r in rows {
        w.serialize(r).map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Reads a cue file. Values must be finite and timestamps strictly increasing;
/// violations name the offending line.
pub fn read_cues(path: &Path) -> Result<Vec<MotionCue>> {
    let cues: Vec<MotionCue> = read_rows(path, &CUE_HEADER)?;
    for (i, c) in cues.iter().enumerate() {
        let line = i + 2;
        let finite = [c.t, c.v_trans, c.v_height, c.yaw_rate].iter().all(|v| v.is_finite());
        let message = if !finite {
            "non-finite value"
        } else if i > 0 && c.t <= cues[i - 1].t {
            "timestamps must increase"
        } else {
            continue;
        };
        return Err(Error::Line {
            path: path.to_path_buf(),
            line,
            message: message.into(),
        });
    }
    Ok(cues)
}

pub fn write_cues(path: &Path, cues: &[MotionCue]) -> Result<()> {
    write_rows(path, &CUE_HEADER, cues.iter().map(|c| (c.t, c.v_trans, c.v_height, c.yaw_rate)))
}

pub fn read_trajectory(path: &Path) -> Result<Vec<TrajectorySample>> {
    let traj: Vec<TrajectorySample> = read_rows(path, &TRAJECTORY_HEADER)?;
    if traj.is_empty() {
        return Err(Error::format(path, "trajectory has no rows"));
    }
    for (i, w) in traj.windows(2).enumerate() {
        if w[1].frame <= w[0].frame {
            return Err(Error::Line {
                path: path.to_path_buf(),
                line: i + 3,
                message: "frames must increase".into(),
            });
        }
    }
    Ok(traj)
}

pub fn write_trajectory(path: &Path, traj: &[TrajectorySample]) -> Result<()> {
    write_rows(path, &TRAJECTORY_HEADER, traj.iter().map(|s| (s.frame, s.t, s.x, s.y, s.z, s.yaw)))
}

/// Writes arbitrary numeric rows under a header.
pub fn write_table(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    write_rows(path, header, rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cue_round_trip_and_line_errors() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("cues.csv");
        let cues = vec![MotionCue::still(0.0), MotionCue { t: 0.1, v_trans: 1.0 / 3.0, v_height: 0.0, yaw_rate: -0.2 }];
        write_cues(&p, &cues).unwrap();
        assert_eq!(read_cues(&p).unwrap(), cues);

        std::fs::write(&p, "t,v_trans,v_height,yaw_rate\n0,0,0,0\n0.1,abc,0,0\n").unwrap();
        match read_cues(&p) {
            Err(Error::Line { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        std::fs::write(&p, "t,v_trans,v_height,yaw_rate\n0,0,0,0\n0.1,0,0\n").unwrap();
        assert!(matches!(read_cues(&p), Err(Error::Line { line: 3, .. })));
        std::fs::write(&p, "t,v_trans,v_height,yaw_rate\n0,0,0,0\n0,0,0,0\n").unwrap();
        assert!(matches!(read_cues(&p), Err(Error::Line { line: 3, .. })));
        std::fs::write(&p, "time,v\n").unwrap();
        assert!(matches!(read_cues(&p), Err(Error::Line { line: 1, .. })));
    }

    #[test]
    fn trajectory_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("traj.csv");
        let traj: Vec<_> = (0..5)
            .map(|i| TrajectorySample { frame: i, t: i as f64 * 0.1, x: 0.1 * i as f64, y: -1.0, z: 0.0, yaw: 3.0 })
            .collect();
        write_trajectory(&p, &traj).unwrap();
        assert_eq!(read_trajectory(&p).unwrap(), traj);
    }
}
