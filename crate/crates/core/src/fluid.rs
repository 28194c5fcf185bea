//! Deterministic fluid drain model used as an independent oracle for the
//! single-big-jump event geometry.
//!
//! The model runs with the continuous input rates `alpha_i` switched on, in
//! contrast to the stochastic simulator whose between-jump dynamics have no
//! input. Starting from levels `(y1, y2)` at time `-t`, the closed-form
//! reachability condition decides whether the projected content at time 0
//! reaches `x`; the brute-force Euler integrator exists purely to check it.

use crate::dist::Direction;
use crate::network::{DerivedQuantities, Stability};
use crate::{Error, Result};

/// Levels at time `-t` together with the elapsed horizon.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluidState {
    pub y1: f64,
    pub y2: f64,
    pub t: f64,
}

impl FluidState {
    pub fn new(y1: f64, y2: f64, t: f64) -> Result<Self> {
        if !(y1 >= 0.0 && y2 >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "y",
                value: y1.min(y2),
                reason: "levels must be nonnegative",
            });
        }
        if !(t > 0.0) {
            return Err(Error::InvalidParameter {
                name: "t",
                value: t,
                reason: "horizon must be positive",
            });
        }
        Ok(Self { y1, y2, t })
    }

    /// Drain times `L_i = y_i / net_drift_i`; defined only under strong
    /// stability.
    pub fn drain_times(&self, d: &DerivedQuantities) -> (f64, f64) {
        (self.y1 / d.net_drift1, self.y2 / d.net_drift2)
    }
}

fn require_strong(d: &DerivedQuantities) -> Result<()> {
    if d.stability() != Stability::StronglyStable {
        return Err(Error::NotStronglyStable);
    }
    Ok(())
}

/// Closed-form reachability: the projected content at time 0 reaches `x`
/// if and only if
/// `c1 (y1 - t D1 - p21 (t D2 - y2)^+)^+ + c2 (y2 - t D2 - p12 (t D1 - y1)^+)^+ >= x`
/// with `D_i` the net drifts.
pub fn reachability(fs: &FluidState, d: &DerivedQuantities, c: Direction, x: f64) -> Result<bool> {
    require_strong(d)?;
    if x < 0.0 {
        return Err(Error::InvalidParameter {
            name: "x",
            value: x,
            reason: "threshold must be nonnegative",
        });
    }
    Ok(projected_level(fs, d, c) >= x)
}

/// The left-hand side of the reachability condition (the exact projected
/// content at time 0).
pub fn projected_level(fs: &FluidState, d: &DerivedQuantities, c: Direction) -> f64 {
    let z1 = (fs.y1
        - fs.t * d.net_drift1
        - d.p21 * (fs.t * d.net_drift2 - fs.y2).max(0.0))
    .max(0.0);
    let z2 = (fs.y2
        - fs.t * d.net_drift2
        - d.p12 * (fs.t * d.net_drift1 - fs.y1).max(0.0))
    .max(0.0);
    c.project(z1, z2)
}

/// Instantaneous rates of the continuous-input fluid model.
///
/// Regimes: both positive drain at the net drifts; an empty node passes its
/// inflow through; the empty-empty state is absorbing under strong stability.
pub fn fluid_rates(z1: f64, z2: f64, d: &DerivedQuantities) -> (f64, f64) {
    let busy1 = z1 > 0.0;
    let busy2 = z2 > 0.0;
    match (busy1, busy2) {
        (true, true) => (-d.net_drift1, -d.net_drift2),
        // node 2 empty: its output equals its input alpha2 + p12 mu1
        (true, false) => (-(d.net_drift1 + d.p21 * d.net_drift2), 0.0),
        (false, true) => (0.0, -(d.net_drift2 + d.p12 * d.net_drift1)),
        (false, false) => (0.0, 0.0),
    }
}

/// Forward-Euler integration of the fluid model from `(y1, y2)` at `-t` to
/// time 0. Deliberately naive: the monotone property (an emptied coordinate
/// stays empty) must emerge from the rate table, not be imposed.
pub fn integrate_fluid(fs: &FluidState, d: &DerivedQuantities, dt: f64) -> Result<(f64, f64)> {
    require_strong(d)?;
    if !(dt > 0.0 && dt <= 1e-4 * fs.t) {
        return Err(Error::InvalidParameter {
            name: "dt",
            value: dt,
            reason: "step must be positive and at most 1e-4 of the horizon",
        });
    }
    let steps = (fs.t / dt).ceil() as u64;
    let h = fs.t / steps as f64;
    let (mut z1, mut z2) = (fs.y1, fs.y2);
    for _ in 0..steps {
        let (r1, r2) = fluid_rates(z1, z2, d);
        z1 = (z1 + h * r1).max(0.0);
        z2 = (z2 + h * r2).max(0.0);
    }
    Ok((z1, z2))
}

/// Big-jump event threshold for one node at drain time `t = n a`:
/// node 1 needs `y1 > x/c1 + t (D1 + p21 D2)`, node 2 symmetric.
/// A zero direction component yields an infinite threshold (empty event).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BigJumpEvent {
    pub node: u8,
    pub n: u64,
    pub threshold: f64,
}

/// Threshold sequences for `n = 0..=n_max` feeding the single-big-jump
/// series. Requires strong stability.
pub fn big_jump_thresholds(
    d: &DerivedQuantities,
    a: f64,
    c: Direction,
    x: f64,
    n_max: u64,
) -> Result<Vec<BigJumpEvent>> {
    require_strong(d)?;
    if n_max < 1 {
        return Err(Error::InvalidParameter {
            name: "n_max",
            value: n_max as f64,
            reason: "need at least one drain step",
        });
    }
    let slope1 = a * (d.net_drift1 + d.p21 * d.net_drift2);
    let slope2 = a * (d.net_drift2 + d.p12 * d.net_drift1);
    let base1 = if c.c1() > 0.0 { x / c.c1() } else { f64::INFINITY };
    let base2 = if c.c2() > 0.0 { x / c.c2() } else { f64::INFINITY };
    let mut out = Vec::with_capacity(2 * (n_max as usize + 1));
    for n in 0..=n_max {
        out.push(BigJumpEvent {
            node: 1,
            n,
            threshold: base1 + n as f64 * slope1,
        });
        out.push(BigJumpEvent {
            node: 2,
            n,
            threshold: base2 + n as f64 * slope2,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::{HeavyDist, JumpModel};
    use crate::network::{ArrivalModel, NetworkParams};

    // net drifts (0.5, 0.5) with p12 = p21 = 0.5
    fn derived() -> DerivedQuantities {
        let j = JumpModel::independent(
            HeavyDist::deterministic(0.5).unwrap(),
            HeavyDist::deterministic(0.5).unwrap(),
        );
        NetworkParams::new(2.0, 2.0, 0.5, 0.5, ArrivalModel::Poisson { rate: 1.0 }, j)
            .unwrap()
            .derive()
    }

    #[test]
    fn boundary_equality_holds() {
        let d = derived();
        // exactly representable values so the boundary equality is exact
        let x = 1.25;
        let t = 2.0;
        let y1 = x + t * d.net_drift1 + d.p21 * t * d.net_drift2;
        let fs = FluidState::new(y1, 0.0, t).unwrap();
        let c = Direction::new(1.0, 0.0).unwrap();
        assert!(reachability(&fs, &d, c, x).unwrap());
        assert!(!reachability(&fs, &d, c, x + 1e-9).unwrap());
    }

    #[test]
    fn deep_second_queue_reduces_to_plain_drain() {
        let d = derived();
        let t = 2.0;
        // y2 >= t D2: condition reduces to y1 >= x + t D1
        let fs = FluidState::new(3.0, 5.0, t).unwrap();
        let c = Direction::new(1.0, 0.0).unwrap();
        let edge = 3.0 - t * d.net_drift1;
        assert!(reachability(&fs, &d, c, edge).unwrap());
        assert!(!reachability(&fs, &d, c, edge + 1e-9).unwrap());
    }

    #[test]
    fn worked_reachability_example() {
        let d = derived();
        let fs = FluidState::new(2.4, 0.5, 2.0).unwrap();
        let c = Direction::new(1.0, 0.0).unwrap();
        // (t D2 - y2)^+ = 0.5, level = 2.4 - 1.0 - 0.25 = 1.15
        assert!((projected_level(&fs, &d, c) - 1.15).abs() < 1e-12);
        assert!(reachability(&fs, &d, c, 1.15).unwrap());
        assert!(!reachability(&fs, &d, c, 1.1501).unwrap());
    }

    #[test]
    fn euler_matches_linear_case() {
        let d = derived();
        // both drain times exceed t: Z = y - t*netdrift
        let fs = FluidState::new(3.0, 2.5, 2.0).unwrap();
        let (z1, z2) = integrate_fluid(&fs, &d, 1e-4 * 2.0).unwrap();
        assert!((z1 - 2.0).abs() < 1e-3);
        assert!((z2 - 1.5).abs() < 1e-3);
    }

    #[test]
    fn empty_stays_empty() {
        let d = derived();
        let fs = FluidState::new(0.0, 0.0, 1.0).unwrap();
        let (z1, z2) = integrate_fluid(&fs, &d, 1e-4).unwrap();
        assert_eq!((z1, z2), (0.0, 0.0));
    }

    #[test]
    fn euler_matches_pass_through_closed_form() {
        let d = derived();
        // L2 < t and the result positive:
        // Z1 = y1 - t D1 - t p21 D2 + y2 p21
        let fs = FluidState::new(2.4, 0.5, 2.0).unwrap();
        let want = 2.4 - 2.0 * 0.5 - 2.0 * 0.5 * 0.5 + 0.5 * 0.5;
        let (z1, _) = integrate_fluid(&fs, &d, 2.0 * 1e-6).unwrap();
        assert!(
            (z1 - want).abs() / want < 1e-4,
            "euler {z1} vs closed {want}"
        );
    }

    #[test]
    fn threshold_examples() {
        let d = derived();
        let c = Direction::new(1.0, 0.0).unwrap();
        let th = big_jump_thresholds(&d, 1.0, c, 10.0, 4).unwrap();
        let n0: Vec<_> = th.iter().filter(|e| e.n == 0).collect();
        assert_eq!(n0[0].threshold, 10.0);
        assert_eq!(n0[1].threshold, f64::INFINITY);
        let n4 = th.iter().find(|e| e.n == 4 && e.node == 1).unwrap();
        assert!((n4.threshold - 13.0).abs() < 1e-12);
        // symmetric params and direction give equal thresholds per n
        let c = Direction::new(0.5, 0.5).unwrap();
        let th = big_jump_thresholds(&d, 1.0, c, 10.0, 3).unwrap();
        for n in 0..=3u64 {
            let per: Vec<_> = th.iter().filter(|e| e.n == n).collect();
            assert_eq!(per[0].threshold, per[1].threshold);
        }
    }

    #[test]
    fn requires_strong_stability() {
        let j = JumpModel::independent(
            HeavyDist::deterministic(1.1).unwrap(),
            HeavyDist::deterministic(0.5).unwrap(),
        );
        let d = NetworkParams::new(2.0, 2.0, 0.5, 0.5, ArrivalModel::Poisson { rate: 1.0 }, j)
            .unwrap()
            .derive();
        let fs = FluidState::new(1.0, 1.0, 1.0).unwrap();
        let c = Direction::new(1.0, 0.0).unwrap();
        assert!(reachability(&fs, &d, c, 0.5).is_err());
    }
}
