//! Dwell-time attainable sets and invariant control sets on RP^1.
//!
//! Subsets of RP^1 are boolean masks over `n` equal angular cells. Every
//! projected linear flow on RP^1 is an orientation-preserving circle map and
//! each orbit moves monotonically in angle, so the image of a cell under all
//! durations in `[t_lo, t_hi]` is the arc between the lifted images of its
//! endpoints at the two extreme durations. Intermediate duration samples are
//! only used to follow the lift continuously.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::matrix::{expm_unchecked, snapped_sin_cos, Mat, ModeSet};
use crate::projective::{wrap_half, Angle, ProjPoint};

/// Boundary roundoff allowance when converting arcs to cells.
const CELL_EPS: f64 = 1e-9;

/// Closed subset of RP^1 on a uniform grid; cell `i` is `[iπ/n, (i+1)π/n)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GridSet {
    mask: Vec<bool>,
}

/// Closed arc of RP^1 running from `start` in the direction of increasing
/// angle for `len` radians.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Arc {
    pub start: f64,
    pub len: f64,
}

impl Arc {
    pub fn new(start: f64, len: f64) -> Self {
        Arc {
            start: Angle::new(start).value(),
            len: len.clamp(0.0, PI),
        }
    }

    /// Arc from `from` to `to` in the direction of increasing angle.
    pub fn between(from: f64, to: f64) -> Self {
        Arc::new(from, (to - from).rem_euclid(PI))
    }

    pub fn end(&self) -> f64 {
        Angle::new(self.start + self.len).value()
    }

    pub fn contains(&self, theta: f64) -> bool {
        (theta - self.start).rem_euclid(PI) <= self.len + 1e-15
    }
}

/// Run of consecutive member cells; may wrap past cell `n − 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CellRun {
    pub start: usize,
    pub len: usize,
}

impl GridSet {
    pub fn empty(n: usize) -> Result<Self> {
        if n < 16 {
            return Err(invalid(format!("grid resolution must be at least 16, got {n}")));
        }
        Ok(GridSet {
            mask: vec![false; n],
        })
    }

    pub fn full(n: usize) -> Result<Self> {
        let mut g = GridSet::empty(n)?;
        g.mask.iter_mut().for_each(|m| *m = true);
        Ok(g)
    }

    pub fn from_mask(mask: Vec<bool>) -> Result<Self> {
        GridSet::empty(mask.len())?;
        Ok(GridSet { mask })
    }

    pub fn from_cells(n: usize, cells: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut g = GridSet::empty(n)?;
        for c in cells {
            g.mask[c % n] = true;
        }
        Ok(g)
    }

    pub fn n(&self) -> usize {
        self.mask.len()
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn step(&self) -> f64 {
        PI / self.n() as f64
    }

    pub fn cell_of(&self, theta: f64) -> usize {
        cell_index(Angle::new(theta).value(), self.n())
    }

    pub fn cell_bounds(&self, i: usize) -> (f64, f64) {
        let h = self.step();
        (i as f64 * h, (i + 1) as f64 * h)
    }

    pub fn center(&self, i: usize) -> f64 {
        (i as f64 + 0.5) * self.step()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.mask[i % self.n()]
    }

    pub fn contains_angle(&self, theta: f64) -> bool {
        self.mask[self.cell_of(theta)]
    }

    pub fn insert(&mut self, i: usize) {
        let n = self.n();
        self.mask[i % n] = true;
    }

    pub fn count(&self) -> usize {
        self.mask.iter().filter(|m| **m).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.mask.iter().any(|m| *m)
    }

    pub fn is_full(&self) -> bool {
        self.mask.iter().all(|m| *m)
    }

    pub fn cells(&self) -> impl Iterator<Item = usize> + '_ {
        self.mask
            .iter()
            .enumerate()
            .filter(|(_, m)| **m)
            .map(|(i, _)| i)
    }

    fn zip_with(&self, other: &GridSet, f: impl Fn(bool, bool) -> bool) -> GridSet {
        assert_eq!(self.n(), other.n(), "grid resolution mismatch");
        GridSet {
            mask: self
                .mask
                .iter()
                .zip(&other.mask)
                .map(|(a, b)| f(*a, *b))
                .collect(),
        }
    }

    pub fn union(&self, other: &GridSet) -> GridSet {
        self.zip_with(other, |a, b| a || b)
    }

    pub fn intersection(&self, other: &GridSet) -> GridSet {
        self.zip_with(other, |a, b| a && b)
    }

    pub fn is_subset(&self, other: &GridSet) -> bool {
        self.mask.iter().zip(&other.mask).all(|(a, b)| !a || *b)
    }

    /// Adds every cell within `k` cells of a member.
    pub fn thickened(&self, k: usize) -> GridSet {
        let n = self.n();
        let mut out = self.clone();
        for i in self.cells() {
            for d in 1..=k.min(n) {
                out.mask[(i + d) % n] = true;
                out.mask[(i + n - d % n) % n] = true;
            }
        }
        out
    }

    /// Maximal runs of member cells, treating the grid as a circle.
    pub fn components(&self) -> Vec<CellRun> {
        let n = self.n();
        if self.is_full() {
            return vec![CellRun { start: 0, len: n }];
        }
        let Some(gap) = self.mask.iter().position(|m| !m) else {
            return Vec::new();
        };
        let mut runs = Vec::new();
        let mut current: Option<CellRun> = None;
        for k in 1..=n {
            let i = (gap + k) % n;
            if self.mask[i] {
                match current.as_mut() {
                    Some(run) => run.len += 1,
                    None => current = Some(CellRun { start: i, len: 1 }),
                }
            } else if let Some(run) = current.take() {
                runs.push(run);
            }
        }
        runs.sort_by_key(|r| r.start);
        runs
    }

    pub fn arcs(&self) -> Vec<Arc> {
        let h = self.step();
        self.components()
            .into_iter()
            .map(|r| Arc {
                start: r.start as f64 * h,
                len: (r.len as f64 * h).min(PI),
            })
            .collect()
    }

    /// CSV with columns `cell_index,theta_lo,theta_hi,member`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("cell_index,theta_lo,theta_hi,member\n");
        for i in 0..self.n() {
            let (lo, hi) = self.cell_bounds(i);
            out.push_str(&format!(
                "{i},{lo:.16e},{hi:.16e},{}\n",
                u8::from(self.mask[i])
            ));
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<GridSet> {
        let mut mask = Vec::new();
        for (line_no, line) in text.lines().enumerate().skip(1) {
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            let bad = || invalid(format!("malformed grid CSV line {}", line_no + 1));
            if fields.len() != 4 {
                return Err(bad());
            }
            let idx: usize = fields[0].parse().map_err(|_| bad())?;
            if idx != mask.len() {
                return Err(bad());
            }
            mask.push(match fields[3] {
                "1" => true,
                "0" => false,
                _ => return Err(bad()),
            });
        }
        GridSet::from_mask(mask)
    }
}

fn cell_index(theta: f64, n: usize) -> usize {
    ((theta / PI * n as f64).floor() as usize).min(n - 1)
}

/// Discretization parameters for attainable-set computations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReachConfig {
    pub tau: f64,
    /// Longest single bang explored.
    pub t_max: f64,
    pub n_durations: usize,
    pub max_depth: usize,
    /// Grid resolution.
    pub n: usize,
}

impl ReachConfig {
    /// Defaults: `t_max = 10 (tau + 1)`, 32 durations, depth cap `10 n`.
    pub fn new(tau: f64, n: usize) -> Self {
        ReachConfig {
            tau,
            t_max: 10.0 * (tau + 1.0),
            n_durations: 32,
            max_depth: 10 * n,
            n,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tau.is_finite() && self.tau >= 0.0) {
            return Err(invalid(format!("tau must be >= 0, got {}", self.tau)));
        }
        if !(self.t_max.is_finite() && self.t_max > self.tau) {
            return Err(invalid(format!(
                "t_max ({}) must exceed tau ({})",
                self.t_max, self.tau
            )));
        }
        if self.n_durations < 2 {
            return Err(invalid("n_durations must be at least 2"));
        }
        if self.n < 16 {
            return Err(invalid("grid resolution must be at least 16"));
        }
        if self.max_depth == 0 {
            return Err(invalid("max_depth must be positive"));
        }
        Ok(())
    }

    /// `{tau, tau r, …, t_max}`; for `tau = 0` the geometric part starts at
    /// `t_max / 1000` after an initial `0`.
    pub fn durations(&self) -> Vec<f64> {
        duration_grid(self.tau, self.t_max, self.n_durations)
    }
}

pub(crate) fn duration_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let (mut out, start, k) = if lo > 0.0 {
        (Vec::with_capacity(count), lo, count)
    } else {
        (vec![0.0], hi * 1e-3, count - 1)
    };
    if k == 1 {
        out.push(hi);
        return out;
    }
    let ratio = (hi / start).powf(1.0 / (k - 1) as f64);
    for i in 0..k {
        out.push(if i == 0 {
            start
        } else if i == k - 1 {
            hi
        } else {
            start * ratio.powi(i as i32)
        });
    }
    out
}

/// Cells met by a lifted arc `[lo, hi]`, as a run.
fn arc_cells(lo: f64, hi: f64, n: usize) -> CellRun {
    let h = PI / n as f64;
    if hi - lo >= PI {
        return CellRun { start: 0, len: n };
    }
    if hi - lo <= 2.0 * CELL_EPS {
        let c = ((0.5 * (lo + hi)) / h).floor() as i64;
        return CellRun {
            start: c.rem_euclid(n as i64) as usize,
            len: 1,
        };
    }
    let first = ((lo + CELL_EPS) / h).floor() as i64;
    let last = ((hi - CELL_EPS) / h).ceil() as i64 - 1;
    let len = ((last - first + 1).max(1) as usize).min(n);
    CellRun {
        start: first.rem_euclid(n as i64) as usize,
        len,
    }
}

/// Lifted-angle trajectories of every cell boundary under every mode at every
/// duration sample.
#[derive(Clone, Debug)]
pub struct TransitionTable {
    n: usize,
    durations: Vec<f64>,
    n_modes: usize,
    /// `[mode][boundary * K + k]`, boundaries `0..=n`.
    lifts: Vec<Vec<f64>>,
    /// Images of each cell over the whole duration range, `[mode][cell]`.
    images: Vec<Vec<CellRun>>,
    /// Per-mode substep matrices for the gaps between duration samples.
    steps: Vec<Vec<(Mat, usize)>>,
}

impl TransitionTable {
    pub fn new(modes: &ModeSet, cfg: &ReachConfig) -> Result<Self> {
        cfg.validate()?;
        TransitionTable::with_durations(modes, cfg.n, cfg.durations())
    }

    /// Table over the duration range `[durations[0], durations[last]]`.
    pub fn with_durations(modes: &ModeSet, n: usize, durations: Vec<f64>) -> Result<Self> {
        if modes.dim() != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                got: modes.dim(),
            });
        }
        if n < 16 {
            return Err(invalid("grid resolution must be at least 16"));
        }
        if durations.is_empty() || durations.windows(2).any(|w| w[1] < w[0]) || durations[0] < 0.0
        {
            return Err(invalid("durations must be nonnegative and sorted"));
        }
        let k = durations.len();
        let h = PI / n as f64;
        let mut lifts = Vec::with_capacity(modes.len());
        let mut steps = Vec::with_capacity(modes.len());
        for a in modes.modes() {
            let mode_steps = gap_steps(a, &durations);
            let mut lift = vec![0.0; (n + 1) * k];
            for j in 0..n {
                let traj = lifted_trajectory(&mode_steps, j as f64 * h);
                lift[j * k..(j + 1) * k].copy_from_slice(&traj);
            }
            // the line at angle π is the line at 0
            for kk in 0..k {
                lift[n * k + kk] = lift[kk] + PI;
            }
            lifts.push(lift);
            steps.push(mode_steps);
        }
        let mut table = TransitionTable {
            n,
            durations,
            n_modes: modes.len(),
            lifts,
            images: Vec::new(),
            steps,
        };
        table.images = (0..table.n_modes)
            .map(|m| (0..n).map(|c| table.cell_arc(m, c, 0, k - 1)).collect())
            .collect();
        Ok(table)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn durations(&self) -> &[f64] {
        &self.durations
    }

    fn lift(&self, mode: usize, boundary: usize, k: usize) -> f64 {
        self.lifts[mode][boundary * self.durations.len() + k]
    }

    /// Cells swept by cell `c` for durations between samples `ka` and `kb`.
    fn cell_arc(&self, mode: usize, c: usize, ka: usize, kb: usize) -> CellRun {
        let lo = self.lift(mode, c, ka).min(self.lift(mode, c, kb));
        let hi = self.lift(mode, c + 1, ka).max(self.lift(mode, c + 1, kb));
        arc_cells(lo, hi, self.n)
    }

    /// Lifted trajectory of an arbitrary angle under one mode.
    fn point_trajectory(&self, mode: usize, theta: f64) -> Vec<f64> {
        lifted_trajectory(&self.steps[mode], theta)
    }

    /// One-step image `⋃_A ⋃_t e^{tA}(G)` over the table's duration range.
    pub fn step(&self, g: &GridSet) -> Result<GridSet> {
        self.check_grid(g)?;
        if g.is_empty() {
            return Err(Error::EmptySet);
        }
        let mut out = GridSet::empty(self.n)?;
        for c in g.cells() {
            for m in 0..self.n_modes {
                mark_run(&mut out.mask, self.images[m][c]);
            }
        }
        Ok(out)
    }

    /// Cells reachable from `seeds` (included) in at most `max_depth` steps.
    pub fn closure(&self, seeds: &[usize], max_depth: usize) -> GridSet {
        let n = self.n;
        let mut visited = vec![false; n];
        // next[i]: smallest unvisited index >= i, with n as sentinel
        let mut next: Vec<usize> = (0..=n).collect();
        let mut frontier = Vec::new();
        for &s in seeds {
            let s = s % n;
            if !visited[s] {
                visited[s] = true;
                next[s] = s + 1;
                frontier.push(s);
            }
        }
        let mut depth = 0;
        while !frontier.is_empty() && depth < max_depth {
            let mut fresh = Vec::new();
            for &c in &frontier {
                for m in 0..self.n_modes {
                    let run = self.images[m][c];
                    for (lo, hi) in split_run(run, n) {
                        let mut i = find_next(&mut next, lo);
                        while i < hi {
                            visited[i] = true;
                            next[i] = i + 1;
                            fresh.push(i);
                            i = find_next(&mut next, i + 1);
                        }
                    }
                }
            }
            frontier = fresh;
            depth += 1;
        }
        GridSet { mask: visited }
    }

    fn check_grid(&self, g: &GridSet) -> Result<()> {
        if g.n() != self.n {
            return Err(invalid(format!(
                "grid of {} cells against a table of {}",
                g.n(),
                self.n
            )));
        }
        Ok(())
    }
}

fn find_next(next: &mut [usize], i: usize) -> usize {
    let mut root = i;
    while next[root] != root {
        root = next[root];
    }
    let mut cur = i;
    while next[cur] != root {
        let up = next[cur];
        next[cur] = root;
        cur = up;
    }
    root
}

/// Splits a possibly wrapping run into at most two half-open index ranges.
fn split_run(run: CellRun, n: usize) -> Vec<(usize, usize)> {
    let end = run.start + run.len;
    if end <= n {
        vec![(run.start, end)]
    } else {
        vec![(run.start, n), (0, end - n)]
    }
}

fn mark_run(mask: &mut [bool], run: CellRun) {
    let n = mask.len();
    for (lo, hi) in split_run(run, n) {
        mask[lo..hi].iter_mut().for_each(|m| *m = true);
    }
}

/// Substep matrices between consecutive duration samples (starting from 0),
/// each turning a line by less than one radian.
fn gap_steps(a: &Mat, durations: &[f64]) -> Vec<(Mat, usize)> {
    let speed = a.norm_fro().max(1e-300);
    let mut prev = 0.0;
    durations
        .iter()
        .map(|&d| {
            let gap = d - prev;
            prev = d;
            let count = (gap * speed).ceil().max(1.0) as usize;
            (expm_unchecked(a, gap / count as f64), count)
        })
        .collect()
}

fn lifted_trajectory(steps: &[(Mat, usize)], theta: f64) -> Vec<f64> {
    let (s, c) = snapped_sin_cos(theta);
    let mut v = [c, s];
    let mut lifted = theta;
    let mut raw = theta;
    let mut out = Vec::with_capacity(steps.len());
    for (m, count) in steps {
        for _ in 0..*count {
            let x = [
                m.get(0, 0) * v[0] + m.get(0, 1) * v[1],
                m.get(1, 0) * v[0] + m.get(1, 1) * v[1],
            ];
            let norm = x[0].hypot(x[1]);
            v = [x[0] / norm, x[1] / norm];
            let new_raw = v[1].atan2(v[0]);
            lifted += wrap_half(new_raw - raw);
            raw = new_raw;
        }
        out.push(lifted);
    }
    out
}

/// Grid over-approximation of `⋃_{A∈S} ⋃_{t∈[tau, t_max]} e^{tA}(G)`.
pub fn step_reach(g: &GridSet, modes: &ModeSet, cfg: &ReachConfig) -> Result<GridSet> {
    if g.n() != cfg.n {
        return Err(invalid("grid resolution differs from the configuration"));
    }
    TransitionTable::new(modes, cfg)?.step(g)
}

/// Grid approximation of the closure of the dwell-time attainable set of
/// `q0`, together with the cell of `q0`.
pub fn attainable(q0: &ProjPoint, modes: &ModeSet, cfg: &ReachConfig) -> Result<GridSet> {
    let theta = q0
        .angle()
        .ok_or(Error::DimensionMismatch {
            expected: 2,
            got: q0.dim(),
        })?
        .value();
    let table = TransitionTable::new(modes, cfg)?;
    Ok(table.closure(&[cell_index(theta, cfg.n)], cfg.max_depth))
}

/// Candidate invariant dwell-time control sets.
///
/// First intersects the attainable sets of all cells; a nonempty intersection
/// is returned as the single candidate. Otherwise returns every closed class
/// of the cell transition relation (a set reachable from each of its cells
/// that reaches nothing outside itself). An empty list means the grid is too
/// coarse to resolve any.
pub fn ics_compute(modes: &ModeSet, cfg: &ReachConfig) -> Result<Vec<GridSet>> {
    let table = TransitionTable::new(modes, cfg)?;
    ics_from_table(&table, cfg.max_depth)
}

pub fn ics_from_table(table: &TransitionTable, max_depth: usize) -> Result<Vec<GridSet>> {
    let n = table.n();
    let reach: Vec<GridSet> = (0..n).map(|c| table.closure(&[c], max_depth)).collect();
    let mut common = GridSet::full(n)?;
    for r in &reach {
        common = common.intersection(r);
    }
    if !common.is_empty() {
        return Ok(vec![common]);
    }
    let mut found: Vec<GridSet> = Vec::new();
    for (c, rc) in reach.iter().enumerate() {
        let closed_class = rc.cells().all(|d| reach[d].contains(c));
        if closed_class && !found.contains(rc) {
            found.push(rc.clone());
        }
    }
    Ok(found)
}

/// Proxy for a nonempty interior of the attainable set within time `horizon`:
/// three consecutive cells reached by signals of total duration at most
/// `horizon`, starting from the exact point `q0`.
pub fn interior_nonempty_check(
    q0: &ProjPoint,
    modes: &ModeSet,
    cfg: &ReachConfig,
    horizon: f64,
) -> Result<bool> {
    let theta = q0
        .angle()
        .ok_or(Error::DimensionMismatch {
            expected: 2,
            got: q0.dim(),
        })?
        .value();
    let d = modes.dim() as f64;
    if !(horizon > d * cfg.tau) {
        return Err(invalid(format!(
            "time horizon {horizon} must exceed d * tau = {}",
            d * cfg.tau
        )));
    }
    let table = TransitionTable::new(modes, cfg)?;
    let durations = table.durations().to_vec();
    let n = cfg.n;
    let mut arrival = vec![f64::INFINITY; n];
    let mut heap = std::collections::BinaryHeap::new();

    let relax = |run: CellRun,
                 t: f64,
                 arrival: &mut Vec<f64>,
                 heap: &mut std::collections::BinaryHeap<Pending>| {
        for (lo, hi) in split_run(run, n) {
            for c in lo..hi {
                if t < arrival[c] {
                    arrival[c] = t;
                    heap.push(Pending { time: t, cell: c });
                }
            }
        }
    };

    for m in 0..modes.len() {
        let traj = table.point_trajectory(m, theta);
        for k in 0..durations.len() {
            if durations[k] > horizon {
                break;
            }
            let prev = k.saturating_sub(1);
            let lo = traj[prev].min(traj[k]);
            let hi = traj[prev].max(traj[k]);
            relax(arc_cells(lo, hi, n), durations[k], &mut arrival, &mut heap);
        }
    }
    while let Some(Pending { time, cell }) = heap.pop() {
        if time > arrival[cell] {
            continue;
        }
        for m in 0..modes.len() {
            for k in 0..durations.len() {
                let t = time + durations[k];
                if t > horizon {
                    break;
                }
                let run = table.cell_arc(m, cell, k.saturating_sub(1), k);
                relax(run, t, &mut arrival, &mut heap);
            }
        }
    }
    let reached: Vec<bool> = arrival.iter().map(|t| *t <= horizon).collect();
    Ok((0..n).any(|c| reached[c] && reached[(c + 1) % n] && reached[(c + n - 1) % n]))
}

#[derive(PartialEq)]
struct Pending {
    time: f64,
    cell: usize,
}

impl Eq for Pending {}

impl Ord for Pending {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        other
            .time
            .total_cmp(&self.time)
            .then(other.cell.cmp(&self.cell))
    }
}

impl PartialOrd for Pending {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// `D ∪ ⋃_A ⋃_{t∈[0,t_hi]} e^{tA}(D)`.
pub fn flow_thicken(d: &GridSet, modes: &ModeSet, t_hi: f64, n_durations: usize) -> Result<GridSet> {
    if t_hi <= 0.0 {
        return Ok(d.clone());
    }
    if d.is_empty() {
        return Ok(d.clone());
    }
    let table =
        TransitionTable::with_durations(modes, d.n(), duration_grid(0.0, t_hi, n_durations.max(2)))?;
    Ok(d.union(&table.step(d)?))
}

/// The two modes of the projective-circle example: a double integrator
/// conjugated to have its equilibrium at `a` (angle decreasing elsewhere,
/// `ψ' = −sin²(ψ − a)`) and a reversed one with equilibrium at `b`
/// (`ψ' = +sin²(ψ − b)`).
pub fn example31_modes(a: Angle, b: Angle) -> ModeSet {
    let n = Mat::from_array([[0.0, 1.0], [0.0, 0.0]]);
    let conj = |theta: f64, m: &Mat| {
        let r = Mat::rotation(theta);
        &(&r * m) * &r.transpose()
    };
    ModeSet::new(vec![conj(a.value(), &n), conj(b.value(), &n.scale(-1.0))])
        .expect("two 2x2 modes")
        .with_labels(vec!["f1".into(), "f2".into()])
        .expect("two labels")
}

/// Closed-form description of the invariant control set of
/// [`example31_modes`]: `A = a`, `B = b`, `A' = e^{τ f1}(B)`,
/// `B' = e^{τ f2}(A)`, and the dwell-time at which `A' = B'`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Example31 {
    pub tau: f64,
    pub a: f64,
    pub a_prime: f64,
    pub b_prime: f64,
    pub b: f64,
    /// Length of the arc from `a` to `b` in the increasing direction.
    pub span: f64,
    /// Length of the arcs `AA'` and `B'B`.
    pub reach: f64,
    pub tau_critical: f64,
}

impl Example31 {
    pub fn connected(&self) -> bool {
        2.0 * self.reach >= self.span
    }

    /// `AA' ∪ B'B`, or the single arc `AB` when they overlap.
    pub fn arcs(&self) -> Vec<Arc> {
        if self.connected() {
            vec![Arc::new(self.a, self.span)]
        } else {
            vec![Arc::new(self.a, self.reach), Arc::new(self.b_prime, self.reach)]
        }
    }
}

fn arccot(x: f64) -> f64 {
    PI / 2.0 - x.atan()
}

pub fn example31_oracle(tau: f64, a: Angle, b: Angle) -> Result<Example31> {
    if !(tau.is_finite() && tau >= 0.0) {
        return Err(invalid(format!("tau must be >= 0, got {tau}")));
    }
    let span = (b.value() - a.value()).rem_euclid(PI);
    if span == 0.0 {
        return Err(invalid("equilibria a and b must differ"));
    }
    let cot_span = 1.0 / span.tan();
    // f1 moves the relative angle r = ψ − a by cot r(t) = cot r0 + t, and
    // f2 moves s = ψ − b by cot s(t) = cot s0 − t; both arcs have this length.
    let reach_at = |t: f64| arccot(cot_span + t);
    let reach = reach_at(tau);
    let a_prime = Angle::new(a.value() + reach).value();
    let b_prime = Angle::new(b.value() - reach).value();

    let gap = |t: f64| 2.0 * reach_at(t) - span;
    let mut lo = 0.0;
    let mut hi = 1.0;
    while gap(hi) > 0.0 {
        lo = hi;
        hi *= 2.0;
    }
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if gap(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Example31 {
        tau,
        a: a.value(),
        a_prime,
        b_prime,
        b: b.value(),
        span,
        reach,
        tau_critical: 0.5 * (lo + hi),
    })
}

fn circle_dist(p: f64, q: f64) -> f64 {
    let d = (p - q).rem_euclid(PI);
    d.min(PI - d)
}

fn dist_to_arcs(p: f64, arcs: &[Arc]) -> f64 {
    arcs.iter()
        .map(|a| {
            if a.contains(p) {
                0.0
            } else {
                circle_dist(p, a.start).min(circle_dist(p, a.end()))
            }
        })
        .fold(f64::INFINITY, f64::min)
}

/// Complement arcs of a union of arcs.
fn gaps(arcs: &[Arc]) -> Vec<Arc> {
    // sweep from a point outside every arc, if any
    let mut starts: Vec<f64> = arcs.iter().map(|a| a.end()).collect();
    starts.sort_by(f64::total_cmp);
    let mut out = Vec::new();
    for s in starts {
        if arcs.iter().any(|a| a.len >= PI) {
            return Vec::new();
        }
        // gap begins at an arc end not covered by another arc's interior
        let covered = arcs
            .iter()
            .any(|a| (s - a.start).rem_euclid(PI) < a.len && a.end() != s);
        if covered {
            continue;
        }
        let next = arcs
            .iter()
            .map(|a| (a.start - s).rem_euclid(PI))
            .fold(PI, f64::min);
        if next > 0.0 {
            out.push(Arc::new(s, next));
        }
    }
    out
}

fn directed_hausdorff(x: &[Arc], y: &[Arc]) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    if y.is_empty() {
        return f64::INFINITY;
    }
    let mut candidates: Vec<f64> = x.iter().flat_map(|a| [a.start, a.end()]).collect();
    for g in gaps(y) {
        let mid = Angle::new(g.start + 0.5 * g.len).value();
        if x.iter().any(|a| a.contains(mid)) {
            candidates.push(mid);
        }
    }
    candidates
        .into_iter()
        .map(|p| dist_to_arcs(p, y))
        .fold(0.0, f64::max)
}

/// Hausdorff distance between two finite unions of closed arcs of RP^1.
pub fn hausdorff(x: &[Arc], y: &[Arc]) -> f64 {
    directed_hausdorff(x, y).max(directed_hausdorff(y, x))
}

/// Bisects the dwell-time at which the computed control set of `modes`
/// stops being connected, between `lo` (connected) and `hi` (not).
pub fn connectivity_transition(
    modes: &ModeSet,
    mut lo: f64,
    mut hi: f64,
    iterations: usize,
    config_for: impl Fn(f64) -> ReachConfig,
) -> Result<f64> {
    let connected = |tau: f64| -> Result<bool> {
        let sets = ics_compute(modes, &config_for(tau))?;
        Ok(sets.len() == 1 && sets[0].components().len() == 1)
    };
    if !connected(lo)? || connected(hi)? {
        return Err(invalid("bracket does not straddle the connectivity transition"));
    }
    for _ in 0..iterations {
        let mid = 0.5 * (lo + hi);
        if connected(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
