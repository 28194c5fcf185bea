//! `selfcheck`: distribution-kernel diagnostics — mean vs tail integral,
//! the Wald identity, subexponentiality flags, and the single-big-jump
//! series against its integral form.

use crate::verdict::{exit_class, render, Verdict, VerdictClass};
use crate::ExitClass;
use anyhow::Result;
use fluidnet::asym::{big_jump_series, exact_asymptote};
use fluidnet::config::ExperimentConfig;
use fluidnet::dist::{subexponentiality_diagnostic, Direction, GeometricSum, HeavyDist};
use fluidnet::network::Stability;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

fn canonical_families() -> Vec<HeavyDist> {
    vec![
        HeavyDist::pareto(1.0, 2.5).unwrap(),
        HeavyDist::weibull(1.5, 0.6).unwrap(),
        HeavyDist::lognormal(0.0, 1.0).unwrap(),
        HeavyDist::exponential(1.0).unwrap(),
        HeavyDist::deterministic(2.0).unwrap(),
    ]
}

/// Midpoint quadrature of `integral_0^inf tail`, dense head plus
/// log-substituted far tail.
fn tail_integral(d: &HeavyDist) -> f64 {
    let knee = (d.support_min() + 1.0) * 2.0;
    let mut hi = knee * 2.0;
    while d.tail(hi) > 1e-14 {
        hi *= 2.0;
    }
    let knot = d.support_min();
    let head = if knot > 0.0 {
        midpoint(|y| d.tail(y), 0.0, knot, 60_000) + midpoint(|y| d.tail(y), knot, knee, 60_000)
    } else {
        midpoint(|y| d.tail(y), 0.0, knee, 120_000)
    };
    head + midpoint(
        |u| {
            let y = u.exp();
            d.tail(y) * y
        },
        knee.ln(),
        hi.ln(),
        120_000,
    )
}

fn midpoint<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    (0..n).map(|i| f(a + (i as f64 + 0.5) * h)).sum::<f64>() * h
}

pub fn cmd_selfcheck(cfg: Option<&ExperimentConfig>) -> Result<(Vec<Verdict>, ExitClass)> {
    let mut verdicts = Vec::new();
    let mut families = canonical_families();
    if let Some(cfg) = cfg {
        let params = cfg.network.build()?;
        families.push(*params.jumps().component(1));
        families.push(*params.jumps().component(2));
    }

    // mean vs tail integral, every family
    let mut worst_rel: f64 = 0.0;
    for d in &families {
        let oracle = tail_integral(d);
        worst_rel = worst_rel.max((d.mean() - oracle).abs() / d.mean());
    }
    verdicts.push(Verdict::new(
        "mean_tail_integral",
        VerdictClass::Invariant,
        worst_rel < 1e-6,
        format!("worst relative gap {worst_rel:.2e} over {} families", families.len()),
    ));

    // Wald identity at a million draws
    let it = HeavyDist::pareto(1.0, 3.0).unwrap().integrated_tail();
    let g = GeometricSum::from_integrated(0.5, it).unwrap();
    let mut rng = ChaCha12Rng::seed_from_u64(0xACC3);
    let n = 1_000_000u64;
    let (mut sum, mut sumsq) = (0.0, 0.0);
    for _ in 0..n {
        let s = g.sample(&mut rng);
        sum += s;
        sumsq += s * s;
    }
    let mean = sum / n as f64;
    let se = ((sumsq / n as f64 - mean * mean) / n as f64).sqrt();
    verdicts.push(Verdict::new(
        "wald_identity",
        VerdictClass::Statistical,
        (mean - g.mean()).abs() < 3.0 * se,
        format!("empirical {mean} vs r/(1-r)*summand-mean {} (se {se:.2e})", g.mean()),
    ));

    // subexponentiality diagnostics
    let pareto = HeavyDist::pareto(1.0, 2.0).unwrap();
    let ratio_pareto = subexponentiality_diagnostic(&pareto, &[100.0])[0].1;
    verdicts.push(Verdict::new(
        "subexp_pareto",
        VerdictClass::Invariant,
        (0.95..=1.05).contains(&ratio_pareto),
        format!("convolution ratio {ratio_pareto:.4} at x=100"),
    ));
    let exp = HeavyDist::exponential(1.0).unwrap();
    let ratio_exp = subexponentiality_diagnostic(&exp, &[20.0])[0].1;
    verdicts.push(Verdict::new(
        "subexp_exponential_flagged",
        VerdictClass::Invariant,
        ratio_exp > 2.0,
        format!("convolution ratio {ratio_exp:.2} at x=20 (light tail)"),
    ));

    // series form vs integral form of the single-big-jump lower bound
    let series_check = series_vs_integral(cfg)?;
    verdicts.push(series_check);

    print!("{}", render(&verdicts));
    let class = exit_class(&verdicts);
    Ok((verdicts, class))
}

fn series_vs_integral(cfg: Option<&ExperimentConfig>) -> Result<Verdict> {
    // use the configured model when it is a strongly stable mixture,
    // otherwise a canonical one
    let params = match cfg {
        Some(cfg) => {
            let p = cfg.network.build()?;
            if p.jumps().is_mixture() && p.derive().stability() == Stability::StronglyStable {
                p
            } else {
                canonical_mixture()?
            }
        }
        None => canonical_mixture()?,
    };
    let d = params.derive();
    let scale = params.jumps().component(1).support_min().max(0.02);
    let x = 50.0 * scale;
    let a = 1.0 / d.lambda;
    let c = Direction::new(1.0, 0.0).unwrap();
    let series = big_jump_series(&d, params.jumps(), a, c, x, 1)?;
    let integral = exact_asymptote(&d, params.jumps(), c)?.eval(x);
    let rel = (series.value - integral).abs() / integral;
    Ok(Verdict::new(
        "series_vs_integral",
        VerdictClass::Invariant,
        rel < 0.05,
        format!(
            "series {} (err bound {:.1e}) vs integral {integral}: rel {rel:.4}",
            series.value, series.remainder_bound
        ),
    ))
}

fn canonical_mixture() -> Result<fluidnet::network::NetworkParams> {
    use fluidnet::config::{DistSpec, JumpsSpec};
    use fluidnet::network::{ArrivalModel, NetworkParams};
    let jumps = JumpsSpec::Mixture {
        p1: 0.5,
        p2: 0.5,
        dist1: DistSpec::Pareto { scale: 1.0, index: 2.5 },
        dist2: DistSpec::Pareto { scale: 1.0, index: 2.5 },
    }
    .build()?;
    Ok(NetworkParams::new(
        2.0,
        2.0,
        0.5,
        0.5,
        ArrivalModel::Poisson { rate: 1.0 },
        jumps,
    )?)
}
