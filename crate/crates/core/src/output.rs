//! Trajectory CSV, event log and report files.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::integrator::{Event, Trajectory};
use crate::pipeline::RunOutput;
use crate::regions::ViablePair;
use crate::rhs::RhsModel;

/// Header `t,x1..xn,h,surface_distance`, one row per grid time.
pub fn trajectory_csv(traj: &Trajectory, model: &RhsModel, pair: &ViablePair) -> String {
    let n = traj.dim();
    let mut s = String::with_capacity(traj.len() * (n + 3) * 24);
    s.push('t');
    for i in 1..=n {
        let _ = write!(s, ",x{i}");
    }
    s.push_str(",h,surface_distance\n");
    for (t, x) in traj.times.iter().zip(&traj.states) {
        let _ = write!(s, "{t}");
        for v in x.iter() {
            let _ = write!(s, ",{v}");
        }
        let _ = writeln!(
            s,
            ",{},{}",
            pair.h(*t, x),
            model.surface_distance_unchecked(*t, x)
        );
    }
    s
}

#[derive(Serialize)]
struct EventLog<'a> {
    count: usize,
    events: &'a [Event],
}

pub fn events_text(events: &[Event]) -> Result<String> {
    toml::to_string(&EventLog {
        count: events.len(),
        events,
    })
    .map_err(|e| Error::Scenario(format!("event rendering: {e}")))
}

/// Write through a temporary sibling file and rename over `path`.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("out");
    let tmp = dir.join(format!(".{name}.{}.tmp", std::process::id()));
    let result = (|| {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(contents)?;
        f.sync_all()?;
        std::fs::rename(&tmp, path)
    })();
    if let Err(e) = result {
        let _ = std::fs::remove_file(&tmp);
        return Err(Error::io(path, e));
    }
    Ok(())
}

pub fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

/// `trajectory.csv`, `events.toml` and `report.toml` under `dir`.
pub fn write_run(dir: &Path, out: &RunOutput) -> Result<()> {
    ensure_dir(dir)?;
    let csv = trajectory_csv(&out.trajectory, &out.built.model, &out.built.pair);
    write_atomic(&dir.join("trajectory.csv"), csv.as_bytes())?;
    write_atomic(
        &dir.join("events.toml"),
        events_text(&out.trajectory.events)?.as_bytes(),
    )?;
    write_atomic(&dir.join("report.toml"), out.report.to_text()?.as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrator::{integrate_modified, IntegratorConfig};
    use crate::presets;
    use crate::regions::ball_pair;

    #[test]
    fn csv_layout() {
        let model = presets::constant(vec![0.5, 0.0], 1.0).unwrap();
        let pair = ball_pair(1.0, 2).unwrap();
        let tr = integrate_modified(
            &model,
            &pair,
            &[0.0, 0.0],
            &IntegratorConfig::default().with_step(0.5),
        )
        .unwrap();
        let csv = trajectory_csv(&tr, &model, &pair);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "t,x1,x2,h,surface_distance");
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[3], "1,0.5,0,0,inf");
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = std::env::temp_dir().join(format!("region-ode-out-{}", std::process::id()));
        ensure_dir(&dir).unwrap();
        let p = dir.join("a.txt");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(std::fs::read_to_string(&p).unwrap(), "two");
        assert_eq!(std::fs::read_dir(&dir).unwrap().count(), 1);
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
