//! Task trajectories as CSV, one file per task.
//!
//! Columns (header required, any order, extra columns ignored):
//! `t` [s], `roll`, `pitch` [deg], `roll_rate`, `pitch_rate` [deg/s],
//! `tau_roll`, `tau_pitch` [Nm]. Lines starting with `#` are comments.

use std::f64::consts::PI;
use std::path::Path;

use super::{degrees_exact, display, radians, read_text, IoError};
use crate::mechkin::FootOrientation;
use crate::optimizer::{TaskSample, TaskTrajectory};

pub const TASK_COLUMNS: [&str; 7] = ["t", "roll", "pitch", "roll_rate", "pitch_rate", "tau_roll", "tau_pitch"];

/// Parses one trajectory; `origin` labels error messages.
pub fn parse_tasks(text: &str, id: &str, origin: &str) -> Result<TaskTrajectory, IoError> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let parse_err = |message: String| IoError::Parse { path: origin.into(), message };
    let headers = reader.headers().map_err(|e| parse_err(e.to_string()))?.clone();
    if headers.iter().all(str::is_empty) {
        return Err(IoError::Empty { path: origin.into() });
    }
    let mut index = [0usize; 7];
    for (slot, name) in index.iter_mut().zip(TASK_COLUMNS) {
        *slot = headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| IoError::MissingColumn { path: origin.into(), column: name.into() })?;
    }
    let mut samples = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(|e| parse_err(e.to_string()))?;
        let mut v = [0.0; 7];
        for (k, &col) in index.iter().enumerate() {
            let field = record.get(col).unwrap_or("");
            v[k] = field
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| parse_err(format!("data row {}: column `{}`: bad number {field:?}", row + 1, TASK_COLUMNS[k])))?;
        }
        samples.push(TaskSample {
            t: v[0],
            pose: FootOrientation::new(radians(v[1]), radians(v[2])),
            rate: [radians(v[3]), radians(v[4])],
            torque: [v[5], v[6]],
        });
    }
    let task = TaskTrajectory { id: id.into(), samples };
    if task.samples.is_empty() {
        return Err(IoError::Empty { path: origin.into() });
    }
    if let Some(k) = task.first_non_monotone() {
        return Err(IoError::NonMonotoneTime { path: origin.into(), row: k + 1 });
    }
    Ok(task)
}

/// Loads one CSV file; the task id is the file stem.
pub fn load_task_file(path: &Path) -> Result<TaskTrajectory, IoError> {
    let id = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    parse_tasks(&read_text(path)?, &id, &display(path))
}

/// Loads every `*.csv` in `dir`, ordered by file name.
pub fn load_tasks(dir: &Path) -> Result<Vec<TaskTrajectory>, IoError> {
    let read_err = |e: std::io::Error| IoError::Read { path: display(dir), message: e.to_string() };
    let mut files: Vec<_> = std::fs::read_dir(dir)
        .map_err(read_err)?
        .collect::<Result<Vec<_>, _>>()
        .map_err(read_err)?
        .into_iter()
        .map(|e| e.path())
        .filter(|p| p.is_file() && p.extension().is_some_and(|x| x.eq_ignore_ascii_case("csv")))
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(IoError::Empty { path: display(dir) });
    }
    files.iter().map(|p| load_task_file(p)).collect()
}

pub fn write_task_csv(task: &TaskTrajectory, header_comment: &str, out: &mut impl std::io::Write) -> std::io::Result<()> {
    for line in header_comment.lines() {
        writeln!(out, "# {line}")?;
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TASK_COLUMNS)?;
    for s in &task.samples {
        let row = [
            s.t,
            degrees_exact(s.pose.roll),
            degrees_exact(s.pose.pitch),
            degrees_exact(s.rate[0]),
            degrees_exact(s.rate[1]),
            s.torque[0],
            s.torque[1],
        ];
        w.write_record(row.iter().map(|v| v.to_string()))?;
    }
    w.flush()
}

/// `offset + a1 sin(phi + p1) + a2 sin(2 phi + p2)`.
#[derive(Clone, Copy)]
struct Harmonic {
    offset: f64,
    a1: f64,
    p1: f64,
    a2: f64,
    p2: f64,
}

impl Harmonic {
    fn value(&self, phi: f64) -> f64 {
        self.offset + self.a1 * (phi + self.p1).sin() + self.a2 * (2.0 * phi + self.p2).sin()
    }

    fn derivative(&self, phi: f64) -> f64 {
        self.a1 * (phi + self.p1).cos() + 2.0 * self.a2 * (2.0 * phi + self.p2).cos()
    }
}

struct GaitProfile {
    id: &'static str,
    period: f64,
    roll: Harmonic,
    pitch: Harmonic,
    tau_roll: f64,
    tau_pitch: f64,
}

fn gait(profile: &GaitProfile, cycles: usize, rate_hz: f64) -> TaskTrajectory {
    let n = (cycles as f64 * profile.period * rate_hz).round() as usize;
    let omega = 2.0 * PI / profile.period;
    let samples = (0..n)
        .map(|k| {
            let t = k as f64 / rate_hz;
            let phi = omega * t;
            let stance = phi.sin().max(0.0);
            TaskSample {
                t,
                pose: FootOrientation::from_degrees(profile.roll.value(phi), profile.pitch.value(phi)),
                rate: [
                    radians(omega * profile.roll.derivative(phi)),
                    radians(omega * profile.pitch.derivative(phi)),
                ],
                torque: [
                    profile.tau_roll * (phi + 0.5).sin(),
                    -profile.tau_pitch * (0.1 + 0.9 * stance * stance),
                ],
            }
        })
        .collect();
    TaskTrajectory { id: profile.id.into(), samples }
}

/// Synthetic stand-ins for level walking, ramp walking and stepping: two
/// gait cycles each at 100 Hz, all inside `[-17.5, 17.5] x [-60, 20]` deg.
pub fn synthetic_tasks() -> Vec<TaskTrajectory> {
    let profiles = [
        GaitProfile {
            id: "synthetic_walk",
            period: 1.0,
            roll: Harmonic { offset: 0.0, a1: 5.0, p1: 0.0, a2: 1.5, p2: 0.3 },
            pitch: Harmonic { offset: -5.0, a1: 15.0, p1: 0.0, a2: 5.0, p2: 0.8 },
            tau_roll: 6.0,
            tau_pitch: 60.0,
        },
        GaitProfile {
            id: "synthetic_ramp",
            period: 1.1,
            roll: Harmonic { offset: 0.0, a1: 4.0, p1: 0.0, a2: 1.0, p2: 0.2 },
            pitch: Harmonic { offset: -14.0, a1: 16.0, p1: 0.2, a2: 4.0, p2: 1.0 },
            tau_roll: 7.0,
            tau_pitch: 75.0,
        },
        GaitProfile {
            id: "synthetic_step",
            period: 1.3,
            roll: Harmonic { offset: 0.0, a1: 8.0, p1: 0.0, a2: 3.0, p2: 0.4 },
            pitch: Harmonic { offset: -20.0, a1: 28.0, p1: 0.0, a2: 6.0, p2: 0.5 },
            tau_roll: 10.0,
            tau_pitch: 85.0,
        },
    ];
    profiles.iter().map(|p| gait(p, 2, 100.0)).collect()
}
