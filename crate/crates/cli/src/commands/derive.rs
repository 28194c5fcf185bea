//! `derive`: print the closed-form model quantities, stability class, and
//! per-direction coefficients; optionally dump them as CSV.

use crate::io::Csv;
use crate::ExitClass;
use anyhow::Result;
use fluidnet::asym::tail_equivalence_constant;
use fluidnet::config::ExperimentConfig;
use fluidnet::dist::Direction;
use fluidnet::network::{DirectionCase, Stability};
use std::fmt::Write as _;
use std::path::Path;

pub fn cmd_derive(cfg: &ExperimentConfig, out: Option<&Path>) -> Result<ExitClass> {
    let params = cfg.network.build()?;
    let d = params.derive();
    let stability = d.stability();

    let mut text = String::new();
    let _ = writeln!(text, "stability: {stability}");
    let _ = writeln!(
        text,
        "lambda {} | m ({}, {}) | alpha ({}, {})",
        d.lambda, d.m1, d.m2, d.alpha1, d.alpha2
    );
    let _ = writeln!(
        text,
        "drain ({}, {}) | net drift ({}, {}) | rho ({}, {})",
        d.drain1, d.drain2, d.net_drift1, d.net_drift2, d.rho1, d.rho2
    );
    let _ = writeln!(
        text,
        "ratio ({}, {}) | ratio' ({}, {})",
        d.ratio1, d.ratio2, d.ratio_prime1, d.ratio_prime2
    );

    let mut csv = Csv::new("key,value");
    for (k, v) in [
        ("stability", f64::NAN),
        ("lambda", d.lambda),
        ("m1", d.m1),
        ("m2", d.m2),
        ("alpha1", d.alpha1),
        ("alpha2", d.alpha2),
        ("drain1", d.drain1),
        ("drain2", d.drain2),
        ("net_drift1", d.net_drift1),
        ("net_drift2", d.net_drift2),
        ("rho1", d.rho1),
        ("rho2", d.rho2),
        ("ratio1", d.ratio1),
        ("ratio2", d.ratio2),
        ("ratio_prime1", d.ratio_prime1),
        ("ratio_prime2", d.ratio_prime2),
    ] {
        if k == "stability" {
            csv.row(&[&k, &stability]);
        } else {
            csv.row(&[&k, &v]);
        }
    }

    let mut dir_csv = Csv::new(
        "direction_c1,direction_c2,case,ratio_c,ratio_prime_c,eta1,eta2,m_c,d1,d2,k_constant",
    );
    for &[c1, c2] in &cfg.simulate.directions {
        let c = Direction::new(c1, c2)?;
        if stability != Stability::StronglyStable {
            let _ = writeln!(text, "direction ({c1}, {c2}): n/a (needs strong stability)");
            continue;
        }
        let dc = d.classify_direction(c)?;
        let na = f64::NAN;
        let rp = dc.ratio_prime_c.unwrap_or(na);
        let d1 = dc.d1.unwrap_or(na);
        let d2 = dc.d2.unwrap_or(na);
        let k = if matches!(dc.case, DirectionCase::C0 | DirectionCase::C1) && c1 > 0.0 {
            tail_equivalence_constant(&dc, &d)
        } else {
            na
        };
        let _ = writeln!(
            text,
            "direction ({c1}, {c2}): case {} | r_c {} | r'_c {} | eta ({}, {}) | m_c {} | d ({}, {}) | K {}",
            dc.case, dc.ratio_c, rp, dc.eta1, dc.eta2, dc.m_c, d1, d2, k
        );
        dir_csv.row(&[
            &c1, &c2, &dc.case, &dc.ratio_c, &rp, &dc.eta1, &dc.eta2, &dc.m_c, &d1, &d2, &k,
        ]);
    }

    print!("{text}");
    if let Some(dir) = out {
        std::fs::create_dir_all(dir)?;
        csv.write_to(&dir.join("derived.csv"))?;
        dir_csv.write_to(&dir.join("directions.csv"))?;
    }
    Ok(ExitClass::Ok)
}
