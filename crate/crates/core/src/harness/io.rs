//! CSV files written and read by the harness.
//!
//! Every file starts with `# key=value` comment lines carrying the run
//! tunables, followed by a normal header row.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::analytics::{DistanceMatrix, PhaseLabel, Trajectory};
use crate::dynamics::{BoundaryEvent, BoundaryKind, Heatmap};
use crate::error::{Error, Result};
use crate::vector::BeliefVector;

use super::runner::Frame;

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

fn write_header(out: &mut impl Write, path: &Path, header: &[(String, String)]) -> Result<()> {
    for (k, v) in header {
        writeln!(out, "# {k}={v}").map_err(|e| Error::io(path, e))?;
    }
    Ok(())
}

fn finish(writer: csv::Writer<BufWriter<File>>, path: &Path) -> Result<()> {
    let mut inner = writer
        .into_inner()
        .map_err(|e| Error::io(path, e.into_error()))?;
    inner.flush().map_err(|e| Error::io(path, e))
}

/// Column names of the trajectory CSV for `dimensions` belief dimensions.
pub fn trajectory_columns(dimensions: usize) -> Vec<String> {
    let mut cols: Vec<String> = ["run_id", "step", "time", "agent_id", "population"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    cols.extend((0..dimensions).map(|k| format!("pos_{k}")));
    cols.extend((0..dimensions).map(|k| format!("ori_{k}")));
    cols.push("speed".into());
    cols.push("weight".into());
    cols
}

pub fn write_trajectory_csv(
    path: &Path,
    run_id: &str,
    header: &[(String, String)],
    frames: &[Frame],
) -> Result<()> {
    let mut out = create(path)?;
    write_header(&mut out, path, header)?;
    let dims = frames
        .first()
        .and_then(|f| f.agents.first())
        .map_or(0, |a| a.dimensions());
    let mut w = csv::Writer::from_writer(out);
    w.write_record(trajectory_columns(dims))
        .map_err(|e| Error::csv(path, e))?;
    let mut record: Vec<String> = Vec::with_capacity(7 + 2 * dims);
    for frame in frames {
        for a in &frame.agents {
            record.clear();
            record.push(run_id.to_string());
            record.push(frame.step.to_string());
            record.push(frame.time.to_string());
            record.push(a.id.to_string());
            record.push(a.population.to_string());
            record.extend(a.position.iter().map(f64::to_string));
            record.extend(a.orientation.iter().map(f64::to_string));
            record.push(a.speed.to_string());
            record.push(a.weight.to_string());
            w.write_record(&record).map_err(|e| Error::csv(path, e))?;
        }
    }
    finish(w, path)
}

pub fn write_events_csv(
    path: &Path,
    run_id: &str,
    header: &[(String, String)],
    events: &[BoundaryEvent],
) -> Result<()> {
    let mut out = create(path)?;
    write_header(&mut out, path, header)?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["run_id", "step", "agent_id", "population", "kind", "dimension"])
        .map_err(|e| Error::csv(path, e))?;
    for e in events {
        let kind = match e.kind {
            BoundaryKind::Reflected => "REFLECTED",
            BoundaryKind::Respawned => "RESPAWNED",
        };
        w.write_record([
            run_id,
            &e.step.to_string(),
            &e.agent.to_string(),
            &e.population.to_string(),
            kind,
            &e.dimension.to_string(),
        ])
        .map_err(|e| Error::csv(path, e))?;
    }
    finish(w, path)
}

pub fn write_heatmap_csv(
    path: &Path,
    header: &[(String, String)],
    heatmap: &Heatmap,
    dimensions: usize,
) -> Result<()> {
    let mut out = create(path)?;
    write_header(&mut out, path, header)?;
    writeln!(out, "# cell_size={}", heatmap.cell_size()).map_err(|e| Error::io(path, e))?;
    let mut w = csv::Writer::from_writer(out);
    let mut cols: Vec<String> = (0..dimensions).map(|k| format!("cell_{k}")).collect();
    cols.push("count".into());
    w.write_record(&cols).map_err(|e| Error::csv(path, e))?;
    for (cell, count) in heatmap.cells() {
        let mut rec: Vec<String> = cell.iter().map(i32::to_string).collect();
        rec.push(count.to_string());
        w.write_record(&rec).map_err(|e| Error::csv(path, e))?;
    }
    finish(w, path)
}

pub fn write_matrix_csv(path: &Path, matrix: &DistanceMatrix) -> Result<()> {
    let out = create(path)?;
    let mut w = csv::Writer::from_writer(out);
    let mut cols = vec!["agent_id".to_string()];
    cols.extend(matrix.ids().iter().map(|id| id.to_string()));
    w.write_record(&cols).map_err(|e| Error::csv(path, e))?;
    for (i, id) in matrix.ids().iter().enumerate() {
        let mut rec = vec![id.to_string()];
        rec.extend(matrix.row(i).iter().map(f64::to_string));
        w.write_record(&rec).map_err(|e| Error::csv(path, e))?;
    }
    finish(w, path)
}

pub fn write_social_distance_csv(
    path: &Path,
    trajectories: &[Trajectory],
    distances: &[f64],
) -> Result<()> {
    let out = create(path)?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["agent_id", "population", "social_distance"])
        .map_err(|e| Error::csv(path, e))?;
    for (t, d) in trajectories.iter().zip(distances) {
        w.write_record([t.agent_id.to_string(), t.population.to_string(), d.to_string()])
            .map_err(|e| Error::csv(path, e))?;
    }
    finish(w, path)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseSummaryRow {
    pub run_id: String,
    pub sih: f64,
    pub mean_distance: f64,
    pub phase: Option<PhaseLabel>,
    pub separation: f64,
}

pub fn write_phase_summary_csv(path: &Path, rows: &[PhaseSummaryRow]) -> Result<()> {
    let out = create(path)?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["run_id", "sih", "mean_distance", "phase", "separation_score"])
        .map_err(|e| Error::csv(path, e))?;
    for r in rows {
        w.write_record([
            r.run_id.clone(),
            r.sih.to_string(),
            r.mean_distance.to_string(),
            r.phase.map(|p| p.to_string()).unwrap_or_default(),
            r.separation.to_string(),
        ])
        .map_err(|e| Error::csv(path, e))?;
    }
    finish(w, path)
}

/// A trajectory CSV read back into per-agent trajectories.
#[derive(Debug, Clone)]
pub struct TrajectoryFile {
    pub run_id: String,
    pub header: BTreeMap<String, String>,
    /// Ordered by agent id.
    pub trajectories: Vec<Trajectory>,
}

impl TrajectoryFile {
    pub fn header_f64(&self, key: &str) -> Option<f64> {
        self.header.get(key).and_then(|v| v.parse().ok())
    }
}

pub fn read_trajectory_csv(path: &Path) -> Result<TrajectoryFile> {
    let format_err = |message: String| Error::Format {
        path: path.to_path_buf(),
        message,
    };
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut header = BTreeMap::new();
    for line in BufReader::new(file).lines() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let Some(entry) = line.strip_prefix('#') else {
            break;
        };
        if let Some((k, v)) = entry.trim().split_once('=') {
            header.insert(k.trim().to_string(), v.trim().to_string());
        }
    }

    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|e| Error::csv(path, e))?;
    let cols = reader.headers().map_err(|e| Error::csv(path, e))?.clone();
    let dims = cols.iter().filter(|c| c.starts_with("pos_")).count();
    if dims == 0 || cols.len() != trajectory_columns(dims).len() {
        return Err(format_err("not a trajectory file (unexpected columns)".into()));
    }

    struct Acc {
        population: usize,
        positions: Vec<BeliefVector>,
        headings: Vec<BeliefVector>,
        times: Vec<f64>,
    }
    let mut by_agent: BTreeMap<u32, Acc> = BTreeMap::new();
    let mut run_id = String::new();
    for (line, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| Error::csv(path, e))?;
        let num = |i: usize| -> Result<f64> {
            rec[i]
                .parse::<f64>()
                .map_err(|_| format_err(format!("row {}: bad number in column {}", line + 1, &cols[i])))
        };
        if run_id.is_empty() {
            run_id = rec[0].to_string();
        }
        let time = num(2)?;
        let agent = num(3)? as u32;
        let population = num(4)? as usize;
        let mut pos = Vec::with_capacity(dims);
        let mut ori = Vec::with_capacity(dims);
        for k in 0..dims {
            pos.push(num(5 + k)?);
            ori.push(num(5 + dims + k)?);
        }
        let acc = by_agent.entry(agent).or_insert_with(|| Acc {
            population,
            positions: Vec::new(),
            headings: Vec::new(),
            times: Vec::new(),
        });
        acc.population = population;
        acc.positions
            .push(BeliefVector::from_slice(&pos).map_err(|e| format_err(e.to_string()))?);
        acc.headings
            .push(BeliefVector::from_slice(&ori).map_err(|e| format_err(e.to_string()))?);
        acc.times.push(time);
    }
    if run_id.is_empty() {
        run_id = header.get("run_id").cloned().unwrap_or_default();
    }
    let mut trajectories = Vec::with_capacity(by_agent.len());
    for (id, acc) in by_agent {
        let period = match acc.times.as_slice() {
            [a, b, ..] => b - a,
            _ => 0.0,
        };
        let t = Trajectory::new(id, acc.population, period, acc.positions)
            .and_then(|t| t.with_headings(acc.headings))
            .map_err(|e| format_err(e.to_string()))?;
        trajectories.push(t);
    }
    Ok(TrajectoryFile {
        run_id,
        header,
        trajectories,
    })
}
