//! Closed-form accumulation of stationary functionals along linear pieces,
//! batch-means bookkeeping, and the merge across seed replications.

use super::engine::{MajorantSegment, Regime, Segment};
use super::SimConfig;
use crate::dist::Direction;
use crate::network::{DerivedQuantities, NetworkParams};
use crate::{Error, Result};

/// Occupation time of `{w(s) > x}` on a linear piece `w(s) = w0 + slope s`,
/// `s` in `[0, dt]`.
#[inline]
fn time_above(w0: f64, slope: f64, dt: f64, x: f64) -> f64 {
    if slope == 0.0 {
        return if w0 > x { dt } else { 0.0 };
    }
    let tau = (x - w0) / slope;
    if slope < 0.0 {
        tau.clamp(0.0, dt)
    } else {
        dt - tau.clamp(0.0, dt)
    }
}

/// `integral_0^dt exp(a + b s) ds`, stable for small `b dt`.
#[inline]
fn exp_integral(a: f64, b: f64, dt: f64) -> f64 {
    if a < -700.0 {
        return 0.0;
    }
    let ea = a.exp();
    let u = b * dt;
    if u.abs() < 1e-12 {
        ea * dt * (1.0 + 0.5 * u)
    } else {
        ea * u.exp_m1() / b
    }
}

/// Per-batch integrals. All fields are raw time integrals over the batch
/// window; rates divide by `dur` at read-out.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Batch {
    pub dur: f64,
    /// occupation of `{c . Z > x}`, layout `[dir][grid]`
    pub occ: Vec<f64>,
    /// majorant marginal occupation, layout `[node][grid]`
    pub maj_occ: Vec<f64>,
    /// regulator increments
    pub y: [f64; 2],
    /// time with `Z = (0, 0)`
    pub empty: f64,
    /// `integral 1(Z_{3-i} > x) dY_i`, layout `[node][palm_grid]`
    pub palm_tail: Vec<f64>,
    /// `integral 1(Z_{3-i} = 0) dY_i`
    pub palm_atom: [f64; 2],
    /// occupation of `{Z_i > x, Z_{3-i} = 0}`, layout `[node][palm_grid]`
    pub boundary_joint: Vec<f64>,
    /// `integral exp(theta . Z) dt` per theta pair
    pub mgf: Vec<f64>,
    /// `integral exp(theta_{3-i} Z_{3-i}) dY_i`, layout `[node][theta]`
    pub palm_mgf: Vec<f64>,
    /// `integral 1(Z_i = 0) exp(theta_{3-i} Z_{3-i}) dt`, layout `[node][theta]`
    pub boundary_mgf: Vec<f64>,
}

impl Batch {
    fn zeroed(ndir: usize, ngrid: usize, npalm: usize, ntheta: usize) -> Self {
        Self {
            dur: 0.0,
            occ: vec![0.0; ndir * ngrid],
            maj_occ: vec![0.0; 2 * ngrid],
            y: [0.0; 2],
            empty: 0.0,
            palm_tail: vec![0.0; 2 * npalm],
            palm_atom: [0.0; 2],
            boundary_joint: vec![0.0; 2 * npalm],
            mgf: vec![0.0; ntheta],
            palm_mgf: vec![0.0; 2 * ntheta],
            boundary_mgf: vec![0.0; 2 * ntheta],
        }
    }
}

pub(crate) struct Accumulator {
    warmup: f64,
    horizon: f64,
    batch_dur: f64,
    nbatch: usize,
    dirs: Vec<(f64, f64)>,
    grid: Vec<f64>,
    palm_grid: Vec<f64>,
    thetas: Vec<(f64, f64)>,
    pub batches: Vec<Batch>,
}

impl Accumulator {
    pub fn new(cfg: &SimConfig) -> Self {
        let nbatch = cfg.batches;
        let batch_dur = (cfg.horizon - cfg.warmup) / nbatch as f64;
        Self {
            warmup: cfg.warmup,
            horizon: cfg.horizon,
            batch_dur,
            nbatch,
            dirs: cfg.directions.iter().map(|c| (c.c1(), c.c2())).collect(),
            grid: cfg.grid.clone(),
            palm_grid: cfg.palm_grid.clone(),
            thetas: cfg.thetas.clone(),
            batches: vec![
                Batch::zeroed(
                    cfg.directions.len(),
                    cfg.grid.len(),
                    cfg.palm_grid.len(),
                    cfg.thetas.len()
                );
                nbatch
            ],
        }
    }

    /// Clip a piece to the accumulation window and walk it across batch
    /// boundaries.
    fn windowed<F: FnMut(&mut Self, usize, f64, f64)>(&mut self, t0: f64, dt: f64, mut add: F) {
        let mut a = t0.max(self.warmup);
        let end = (t0 + dt).min(self.horizon);
        while a < end {
            let bi = (((a - self.warmup) / self.batch_dur) as usize).min(self.nbatch - 1);
            let b_end = self.warmup + (bi + 1) as f64 * self.batch_dur;
            let b = end.min(b_end);
            if b <= a {
                break;
            }
            add(self, bi, a, b);
            a = b;
        }
    }

    pub fn add_segment(&mut self, seg: &Segment) {
        self.windowed(seg.t0, seg.dt, |acc, bi, a, b| acc.add_piece(bi, seg, a, b));
    }

    fn add_piece(&mut self, bi: usize, seg: &Segment, a: f64, b: f64) {
        let dt = b - a;
        let off = a - seg.t0;
        let z1 = seg.z1 + seg.zdot1 * off;
        let z2 = seg.z2 + seg.zdot2 * off;
        let ngrid = self.grid.len();
        let npalm = self.palm_grid.len();
        let ntheta = self.thetas.len();
        let batch = &mut self.batches[bi];
        batch.dur += dt;
        batch.y[0] += seg.ydot1 * dt;
        batch.y[1] += seg.ydot2 * dt;

        for (di, &(c1, c2)) in self.dirs.iter().enumerate() {
            let w0 = c1 * z1 + c2 * z2;
            let slope = c1 * seg.zdot1 + c2 * seg.zdot2;
            let wmax = w0.max(w0 + slope * dt);
            let base = di * ngrid;
            for (gi, &x) in self.grid.iter().enumerate() {
                if x >= wmax {
                    break;
                }
                batch.occ[base + gi] += time_above(w0, slope, dt, x);
            }
        }

        for (ti, &(t1, t2)) in self.thetas.iter().enumerate() {
            let e0 = t1 * z1 + t2 * z2;
            let eslope = t1 * seg.zdot1 + t2 * seg.zdot2;
            batch.mgf[ti] += exp_integral(e0, eslope, dt);
        }

        match seg.regime {
            Regime::Interior => {}
            Regime::Empty => {
                batch.empty += dt;
                batch.palm_atom[0] += seg.ydot1 * dt;
                batch.palm_atom[1] += seg.ydot2 * dt;
                for ti in 0..ntheta {
                    batch.palm_mgf[ti] += seg.ydot1 * dt;
                    batch.palm_mgf[ntheta + ti] += seg.ydot2 * dt;
                    batch.boundary_mgf[ti] += dt;
                    batch.boundary_mgf[ntheta + ti] += dt;
                }
            }
            Regime::Stick1 => {
                // Y1 grows; Z2 moves linearly above zero
                for (pi, &x) in self.palm_grid.iter().enumerate() {
                    let above = time_above(z2, seg.zdot2, dt, x);
                    batch.palm_tail[pi] += seg.ydot1 * above;
                    batch.boundary_joint[npalm + pi] += above;
                }
                for (ti, &(_, t2)) in self.thetas.iter().enumerate() {
                    let v = exp_integral(t2 * z2, t2 * seg.zdot2, dt);
                    batch.palm_mgf[ti] += seg.ydot1 * v;
                    batch.boundary_mgf[ti] += v;
                }
            }
            Regime::Stick2 => {
                for (pi, &x) in self.palm_grid.iter().enumerate() {
                    let above = time_above(z1, seg.zdot1, dt, x);
                    batch.palm_tail[npalm + pi] += seg.ydot2 * above;
                    batch.boundary_joint[pi] += above;
                }
                for (ti, &(t1, _)) in self.thetas.iter().enumerate() {
                    let v = exp_integral(t1 * z1, t1 * seg.zdot1, dt);
                    batch.palm_mgf[ntheta + ti] += seg.ydot2 * v;
                    batch.boundary_mgf[ntheta + ti] += v;
                }
            }
        }
    }

    pub fn add_majorant_segment(&mut self, seg: &MajorantSegment) {
        let node = seg.node;
        let w0 = seg.w0;
        let slope = seg.slope;
        self.windowed(seg.t0, seg.dt, |acc, bi, a, b| {
            let dt = b - a;
            let w = w0 + slope * (a - seg.t0);
            let ngrid = acc.grid.len();
            let wmax = w.max(w + slope * dt);
            let base = (node - 1) * ngrid;
            let batch = &mut acc.batches[bi];
            for (gi, &x) in acc.grid.iter().enumerate() {
                if x >= wmax {
                    break;
                }
                batch.maj_occ[base + gi] += time_above(w, slope, dt, x);
            }
        });
    }
}

/// Majorant dominance summary for one path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MajorantCheck {
    pub dominance_ok: bool,
    /// most negative of `Ztilde_i - Z_i` over all checked epochs
    pub min_gap: f64,
    pub epochs_checked: u64,
}

/// Everything accumulated along one seed's path.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub seed: u64,
    pub(crate) batches: Vec<Batch>,
    /// accumulation window length (horizon - warmup)
    pub window: f64,
    pub events: u64,
    pub max_residual: f64,
    pub min_z: f64,
    pub majorant: Option<MajorantCheck>,
}

/// A point estimate with its batch-means standard error (one sigma).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub halfwidth: f64,
}

/// Merged stationary estimates over one or more seeds.
///
/// The merge is associative and commutative by construction: records are
/// sorted by seed before pooling, so any grouping or ordering of the same
/// records produces bit-identical results.
#[derive(Debug, Clone)]
pub struct PathStats {
    pub directions: Vec<Direction>,
    pub grid: Vec<f64>,
    pub palm_grid: Vec<f64>,
    pub thetas: Vec<(f64, f64)>,
    pub seeds: Vec<u64>,
    pub total_time: f64,
    pub events: u64,
    pub max_residual: f64,
    pub min_z: f64,
    /// None when the majorant was not simulated
    pub dominance: Option<bool>,
    pub majorant_min_gap: Option<f64>,
    batches: Vec<Batch>,
}

impl PathStats {
    pub fn from_records(records: &[RunRecord], cfg: &SimConfig) -> Result<Self> {
        if records.is_empty() {
            return Err(Error::Insufficient("no run records to merge"));
        }
        let mut sorted: Vec<&RunRecord> = records.iter().collect();
        sorted.sort_by_key(|r| r.seed);
        let mut batches = Vec::with_capacity(sorted.len() * cfg.batches);
        let mut total_time = 0.0;
        let mut events = 0;
        let mut max_residual: f64 = 0.0;
        let mut min_z: f64 = 0.0;
        let mut dominance: Option<bool> = None;
        let mut min_gap: Option<f64> = None;
        let mut seeds = Vec::with_capacity(sorted.len());
        for r in sorted {
            seeds.push(r.seed);
            batches.extend(r.batches.iter().cloned());
            total_time += r.window;
            events += r.events;
            max_residual = max_residual.max(r.max_residual);
            min_z = min_z.min(r.min_z);
            if let Some(m) = &r.majorant {
                dominance = Some(dominance.unwrap_or(true) && m.dominance_ok);
                min_gap = Some(min_gap.map_or(m.min_gap, |g: f64| g.min(m.min_gap)));
            }
        }
        Ok(Self {
            directions: cfg.directions.clone(),
            grid: cfg.grid.clone(),
            palm_grid: cfg.palm_grid.clone(),
            thetas: cfg.thetas.clone(),
            seeds,
            total_time,
            events,
            max_residual,
            min_z,
            dominance,
            majorant_min_gap: min_gap,
            batches,
        })
    }

    pub fn n_batches(&self) -> usize {
        self.batches.len()
    }

    /// Batch-means estimate of a time-average: `value` is the time-weighted
    /// pooled mean, `halfwidth` one standard error of the batch means.
    fn estimate<F: Fn(&Batch) -> f64>(&self, f: F) -> Estimate {
        let n = self.batches.len();
        let mut sum = 0.0;
        let mut dur = 0.0;
        let mut vals = Vec::with_capacity(n);
        for b in &self.batches {
            sum += f(b);
            dur += b.dur;
            vals.push(f(b) / b.dur);
        }
        let value = sum / dur;
        let mean = vals.iter().sum::<f64>() / n as f64;
        let var = vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n as f64 - 1.0);
        Estimate {
            value,
            halfwidth: (var / n as f64).sqrt(),
        }
    }

    /// Time fraction of `{c . Z > x}` for direction index `di`, grid index `gi`.
    pub fn tail(&self, di: usize, gi: usize) -> Estimate {
        let ng = self.grid.len();
        self.estimate(|b| b.occ[di * ng + gi])
    }

    /// Majorant marginal tail for `node` (1 or 2).
    pub fn majorant_tail(&self, node: usize, gi: usize) -> Estimate {
        let ng = self.grid.len();
        self.estimate(|b| b.maj_occ[(node - 1) * ng + gi])
    }

    /// Regulator growth rate `Y_i(T)/T`.
    pub fn y_rate(&self, node: usize) -> Estimate {
        self.estimate(|b| b.y[node - 1])
    }

    /// Time fraction with `Z = (0, 0)`.
    pub fn empty_fraction(&self) -> Estimate {
        self.estimate(|b| b.empty)
    }

    /// Palm tail rate `(1/T) integral 1(Z_{3-i} > x) dY_i`.
    pub fn palm_tail(&self, node: usize, pi: usize) -> Estimate {
        let np = self.palm_grid.len();
        self.estimate(|b| b.palm_tail[(node - 1) * np + pi])
    }

    /// Palm atom rate `(1/T) integral 1(Z_{3-i} = 0) dY_i`.
    pub fn palm_atom(&self, node: usize) -> Estimate {
        self.estimate(|b| b.palm_atom[node - 1])
    }

    /// Time fraction of `{Z_i > x, Z_{3-i} = 0}`.
    pub fn boundary_joint(&self, node: usize, pi: usize) -> Estimate {
        let np = self.palm_grid.len();
        self.estimate(|b| b.boundary_joint[(node - 1) * np + pi])
    }

    /// Stationary transform estimate `Ehat exp(theta . Z)`.
    pub fn mgf(&self, ti: usize) -> Estimate {
        self.estimate(|b| b.mgf[ti])
    }

    /// Palm transform rate `(1/T) integral exp(theta_{3-i} Z_{3-i}) dY_i`.
    pub fn palm_mgf(&self, node: usize, ti: usize) -> Estimate {
        let nt = self.thetas.len();
        self.estimate(|b| b.palm_mgf[(node - 1) * nt + ti])
    }

    /// Boundary transform `Ehat 1(Z_i = 0) exp(theta_{3-i} Z_{3-i})`.
    pub fn boundary_mgf(&self, node: usize, ti: usize) -> Estimate {
        let nt = self.thetas.len();
        self.estimate(|b| b.boundary_mgf[(node - 1) * nt + ti])
    }

    /// Stationary-equation residual at theta pair `ti`:
    /// `kappa(theta) phi(theta) - (theta1 - p12 theta2) phi_1(theta2)
    ///  - (theta2 - p21 theta1) phi_2(theta1)`.
    ///
    /// The residual is formed per batch so its standard error propagates the
    /// correlation between the three estimators. Requires Poisson arrivals.
    pub fn balance_residual(&self, params: &NetworkParams, ti: usize) -> Result<Estimate> {
        if !params.arrival().is_poisson() {
            return Err(Error::WrongModel {
                required: "Poisson arrivals",
                got: "renewal arrivals",
            });
        }
        let (t1, t2) = self.thetas[ti];
        if t1 > 0.0 || t2 > 0.0 {
            return Err(Error::InvalidParameter {
                name: "theta",
                value: t1.max(t2),
                reason: "transform arguments must be componentwise nonpositive",
            });
        }
        let d = params.derive();
        let kappa = kappa(&d, params, t1, t2);
        let a1 = t1 - d.p12 * t2;
        let a2 = t2 - d.p21 * t1;
        let nt = self.thetas.len();
        let n = self.batches.len();
        let mut vals = Vec::with_capacity(n);
        for b in &self.batches {
            let phi = b.mgf[ti] / b.dur;
            let phi1 = b.palm_mgf[ti] / b.dur;
            let phi2 = b.palm_mgf[nt + ti] / b.dur;
            vals.push(kappa * phi - a1 * phi1 - a2 * phi2);
        }
        let mean = vals.iter().sum::<f64>() / n as f64;
        let var = vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n as f64 - 1.0);
        Ok(Estimate {
            value: mean.abs(),
            halfwidth: (var / n as f64).sqrt(),
        })
    }
}

/// Levy exponent `kappa(theta) = <drain, theta> - lambda (Fhat(theta) - 1)`.
pub fn kappa(d: &DerivedQuantities, params: &NetworkParams, t1: f64, t2: f64) -> f64 {
    d.drain1 * t1 + d.drain2 * t2 - d.lambda * (params.jumps().joint_mgf(t1, t2) - 1.0)
}
