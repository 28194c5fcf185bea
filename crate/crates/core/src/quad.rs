//! Adaptive Simpson quadrature for the distribution kernels.

/// Integrate `f` over `[a, b]` to relative tolerance `rel_tol`.
///
/// `knots` are interior points where the integrand kinks or jumps; the
/// interval is split there before refinement so the Richardson error
/// estimate stays valid on each piece.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64, knots: &[f64]) -> f64 {
    if !(b > a) {
        return 0.0;
    }
    let mut points = vec![a];
    let mut ks: Vec<f64> = knots.iter().copied().filter(|&k| k > a && k < b).collect();
    ks.sort_by(|x, y| x.partial_cmp(y).unwrap());
    ks.dedup();
    points.extend(ks);
    points.push(b);

    // Coarse pass to set an absolute budget, then refine each piece.
    let coarse: f64 = points
        .windows(2)
        .map(|w| simpson(&f, w[0], w[1]))
        .sum();
    let eps = rel_tol * coarse.abs().max(1e-300);
    let n = (points.len() - 1) as f64;
    points
        .windows(2)
        .map(|w| {
            let (lo, hi) = (w[0], w[1]);
            let (fl, fm, fh) = (f(lo), f(0.5 * (lo + hi)), f(hi));
            let s = (hi - lo) / 6.0 * (fl + 4.0 * fm + fh);
            adaptive(&f, lo, hi, fl, fm, fh, s, eps / n, 52)
        })
        .sum()
}

fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
    (b - a) / 6.0 * (f(a) + 4.0 * f(0.5 * (a + b)) + f(b))
}

#[allow(clippy::too_many_arguments)]
fn adaptive<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    eps: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let split = left + right;
    if depth == 0 || (split - whole).abs() <= 15.0 * eps || m <= a || m >= b {
        return split + (split - whole) / 15.0;
    }
    adaptive(f, a, m, fa, flm, fm, left, 0.5 * eps, depth - 1)
        + adaptive(f, m, b, fm, frm, fb, right, 0.5 * eps, depth - 1)
}
