//! `oracle`: randomized agreement suite between the closed-form drain
//! reachability condition and brute-force Euler integration.

use crate::verdict::{exit_class, render, Verdict, VerdictClass};
use crate::ExitClass;
use anyhow::Result;
use fluidnet::dist::{Direction, HeavyDist, JumpModel};
use fluidnet::fluid::{integrate_fluid, projected_level, reachability, FluidState};
use fluidnet::network::{ArrivalModel, DerivedQuantities, NetworkParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

fn configs() -> Vec<DerivedQuantities> {
    let mk = |mu: (f64, f64), p12: f64, p21: f64, m: (f64, f64)| {
        let j = JumpModel::independent(
            HeavyDist::deterministic(m.0).unwrap(),
            HeavyDist::deterministic(m.1).unwrap(),
        );
        NetworkParams::new(mu.0, mu.1, p12, p21, ArrivalModel::Poisson { rate: 1.0 }, j)
            .unwrap()
            .derive()
    };
    vec![
        mk((2.0, 2.0), 0.5, 0.5, (0.5, 0.5)),
        mk((2.0, 1.5), 0.4, 0.6, (0.3, 0.3)),
        mk((3.0, 1.2), 0.2, 0.7, (0.8, 0.2)),
    ]
}

fn rate_bound(d: &DerivedQuantities) -> f64 {
    (d.net_drift1 + d.p21 * d.net_drift2)
        .abs()
        .max((d.net_drift2 + d.p12 * d.net_drift1).abs())
        .max(d.net_drift1.abs())
        .max(d.net_drift2.abs())
}

pub fn cmd_oracle(tuples: u64, seed: u64) -> Result<(Vec<Verdict>, ExitClass)> {
    let configs = configs();
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut disagreements = 0u64;
    let mut out_of_band = 0u64;
    for i in 0..tuples {
        let d = &configs[(i % configs.len() as u64) as usize];
        let t = 0.5 + 4.0 * rng.random::<f64>();
        let l1 = rng.random::<f64>() * 2.0 * t;
        let l2 = rng.random::<f64>() * 2.0 * t;
        let fs = FluidState::new(l1 * d.net_drift1, l2 * d.net_drift2, t)?;
        let c1 = rng.random::<f64>();
        let c = Direction::new(c1, 1.0 - c1)?;
        let level = projected_level(&fs, d, c);
        let x = if rng.random::<f64>() < 0.5 {
            (level + 0.2 * (rng.random::<f64>() - 0.5)).max(0.0)
        } else {
            rng.random::<f64>() * 3.0
        };
        let dt = 1e-4 * t;
        let closed = reachability(&fs, d, c, x)?;
        let (z1, z2) = integrate_fluid(&fs, d, dt)?;
        let euler_level = c.project(z1, z2);
        if closed != (euler_level >= x) {
            disagreements += 1;
            if (euler_level - x).abs() >= 10.0 * dt * rate_bound(d) {
                out_of_band += 1;
            }
        }
    }
    let rate = 1.0 - disagreements as f64 / tuples as f64;
    let verdicts = vec![
        Verdict::new(
            "fluid_oracle_agreement",
            VerdictClass::Invariant,
            rate >= 0.999,
            format!("{disagreements} disagreements of {tuples} tuples (rate {rate:.5})"),
        ),
        Verdict::new(
            "fluid_oracle_boundary_band",
            VerdictClass::Invariant,
            out_of_band == 0,
            format!("{out_of_band} disagreements outside the Euler boundary band"),
        ),
    ];
    print!("{}", render(&verdicts));
    let class = exit_class(&verdicts);
    Ok((verdicts, class))
}
