//! Prevalence and mean-degree trajectories sampled on a time grid, and a
//! simple wave count on smoothed prevalence.

use crate::error::{usage, Error, Result};
use crate::graph::SimState;
use crate::model::{EventKind, EventRecord, Recorder};

pub const DEFAULT_GRID_POINTS: usize = 500;
pub const DEFAULT_WAVE_WINDOW: usize = 11;
pub const DEFAULT_WAVE_PROMINENCE: f64 = 0.05;

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub replica: usize,
    pub n: usize,
    pub grid: Vec<f64>,
    pub prevalence: Vec<f64>,
    pub mean_degree: Vec<f64>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }
}

/// `points` equally spaced times covering `[0, horizon]`.
pub fn uniform_grid(horizon: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![horizon],
        _ => (0..points).map(|i| horizon * i as f64 / (points - 1) as f64).collect(),
    }
}

fn validate_grid(grid: &[f64]) -> Result<()> {
    if grid.iter().any(|t| !t.is_finite() || *t < 0.0) {
        return usage("grid times must be finite and non-negative");
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return usage("grid must be strictly increasing");
    }
    Ok(())
}

/// Samples the infected and edge counts on a grid while events stream in.
///
/// A grid point at time `g` reflects every event with `t <= g`. Call
/// [`GridRecorder::finish`] after the run to fill the remaining points.
#[derive(Debug)]
pub struct GridRecorder {
    n: usize,
    grid: Vec<f64>,
    infected: i64,
    edges: i64,
    last_t: f64,
    next: usize,
    prevalence: Vec<f64>,
    mean_degree: Vec<f64>,
    error: Option<Error>,
}

impl GridRecorder {
    pub fn new(initial: &SimState, grid: Vec<f64>) -> Result<Self> {
        validate_grid(&grid)?;
        let cap = grid.len();
        Ok(GridRecorder {
            n: initial.n(),
            grid,
            infected: initial.infected_count() as i64,
            edges: initial.edge_count() as i64,
            last_t: initial.time(),
            next: 0,
            prevalence: Vec::with_capacity(cap),
            mean_degree: Vec::with_capacity(cap),
            error: None,
        })
    }

    fn emit_until(&mut self, t: f64) {
        let n = self.n.max(1) as f64;
        while self.next < self.grid.len() && self.grid[self.next] < t {
            self.prevalence.push(self.infected as f64 / n);
            self.mean_degree.push(2.0 * self.edges as f64 / n);
            self.next += 1;
        }
    }

    fn try_record(&mut self, ev: &EventRecord) -> Result<()> {
        if ev.t.is_nan() || ev.t < self.last_t {
            return Err(Error::Integrity(format!("event at t={} precedes previous event at t={}", ev.t, self.last_t)));
        }
        self.emit_until(ev.t);
        self.last_t = ev.t;
        match ev.kind {
            EventKind::Recovery => self.infected -= 1,
            EventKind::Transmission => self.infected += 1,
            EventKind::Disconnect => self.edges -= 1,
            EventKind::Connect => self.edges += 1,
        }
        if self.infected < 0 || self.infected > self.n as i64 || self.edges < 0 {
            return Err(Error::Integrity(format!("replay left counts out of range at t={}", ev.t)));
        }
        Ok(())
    }

    pub fn finish(mut self, replica: usize) -> Result<Trajectory> {
        if let Some(e) = self.error.take() {
            return Err(e);
        }
        self.emit_until(f64::INFINITY);
        Ok(Trajectory { replica, n: self.n, grid: self.grid, prevalence: self.prevalence, mean_degree: self.mean_degree })
    }
}

impl Recorder for GridRecorder {
    fn record(&mut self, event: &EventRecord) {
        if self.error.is_none() {
            if let Err(e) = self.try_record(event) {
                self.error = Some(e);
            }
        }
    }
}

/// Replays `events` from `initial` and samples on `grid`.
pub fn record_on_grid(events: &[EventRecord], initial: &SimState, grid: &[f64]) -> Result<Trajectory> {
    let mut rec = GridRecorder::new(initial, grid.to_vec())?;
    for ev in events {
        rec.try_record(ev)?;
    }
    rec.finish(0)
}

/// Centered moving average; the window shrinks at the ends.
pub fn moving_average(xs: &[f64], window: usize) -> Vec<f64> {
    let half = window.max(1) / 2;
    (0..xs.len())
        .map(|i| {
            let lo = i.saturating_sub(half);
            let hi = (i + half + 1).min(xs.len());
            xs[lo..hi].iter().sum::<f64>() / (hi - lo) as f64
        })
        .collect()
}

/// Topographic prominence of each strict local maximum (plateaus count
/// once, at their first index). Endpoints are never peaks.
pub fn peak_prominences(xs: &[f64]) -> Vec<(usize, f64)> {
    let mut peaks = Vec::new();
    let mut i = 1;
    while i + 1 < xs.len() {
        if xs[i] > xs[i - 1] {
            let mut j = i;
            while j + 1 < xs.len() && xs[j + 1] == xs[i] {
                j += 1;
            }
            if j + 1 < xs.len() && xs[j + 1] < xs[i] {
                peaks.push(i);
            }
            i = j + 1;
        } else {
            i += 1;
        }
    }
    peaks
        .into_iter()
        .map(|p| {
            let h = xs[p];
            let mut left_min = h;
            for &x in xs[..p].iter().rev() {
                if x > h {
                    break;
                }
                left_min = left_min.min(x);
            }
            let mut right_min = h;
            for &x in &xs[p + 1..] {
                if x > h {
                    break;
                }
                right_min = right_min.min(x);
            }
            (p, h - left_min.max(right_min))
        })
        .collect()
}

/// Number of local maxima of the smoothed prevalence whose prominence
/// exceeds `min_prominence`.
pub fn count_waves(trajectory: &Trajectory, window: usize, min_prominence: f64) -> usize {
    count_waves_in(&trajectory.prevalence, window, min_prominence)
}

pub fn count_waves_in(series: &[f64], window: usize, min_prominence: f64) -> usize {
    let smooth = moving_average(series, window);
    peak_prominences(&smooth).into_iter().filter(|&(_, prom)| prom > min_prominence).count()
}

/// Whether prevalence rises above its initial value while the mean degree
/// ends lower than it started, both within the first `fraction` of the grid.
pub fn early_rise_with_degree_drop(trajectory: &Trajectory, fraction: f64) -> bool {
    let len = trajectory.len();
    if len < 2 {
        return false;
    }
    let end = ((len as f64 * fraction).ceil() as usize).clamp(2, len);
    let p0 = trajectory.prevalence[0];
    let rises = trajectory.prevalence[..end].iter().any(|&p| p > p0);
    let drops = trajectory.mean_degree[end - 1] < trajectory.mean_degree[0];
    rises && drops
}
