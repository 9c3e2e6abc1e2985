//! Small scalar routines shared by the link-budget and oracle code.

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Golden-section minimisation of a unimodal `f` on `[a, b]`, stopping once
/// the bracket is narrower than `tol`. Returns `(x_min, f(x_min))`.
pub fn golden_section<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    let fx = f(x);
    // keep the best point seen in the final bracket
    [(x, fx), (c, fc), (d, fd)]
        .into_iter()
        .min_by(|p, q| p.1.total_cmp(&q.1))
        .unwrap()
}

/// Bisection for a sign change of `g` on `[a, b]`; `g(a)` and `g(b)` must
/// have opposite signs.
pub fn bisect<G: Fn(f64) -> f64>(g: G, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let mut ga = g(a);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if (b - a).abs() <= tol * m.abs().max(1.0) {
            return m;
        }
        let gm = g(m);
        if gm == 0.0 {
            return m;
        }
        if (gm > 0.0) == (ga > 0.0) {
            a = m;
            ga = gm;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Adaptive composite Simpson quadrature with relative tolerance `rel_tol`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    const PANELS: usize = 16;
    let h = (b - a) / PANELS as f64;
    let mut panels = Vec::with_capacity(PANELS);
    let mut rough = 0.0;
    for i in 0..PANELS {
        let lo = a + h * i as f64;
        let hi = if i + 1 == PANELS { b } else { lo + h };
        let (flo, fmid, fhi) = (f(lo), f(0.5 * (lo + hi)), f(hi));
        let s = simpson(lo, hi, flo, fmid, fhi);
        rough += s;
        panels.push((lo, hi, flo, fmid, fhi, s));
    }
    let abs_tol = rel_tol * rough.abs().max(f64::MIN_POSITIVE);
    let per_panel = abs_tol / PANELS as f64;
    panels
        .into_iter()
        .map(|(lo, hi, flo, fmid, fhi, s)| refine(&f, lo, hi, flo, fmid, fhi, s, per_panel, 48))
        .sum()
}

#[inline]
fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn refine<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    refine(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + refine(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// `count` points spaced evenly in log10 between `lo` and `hi` inclusive.
pub fn logspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => vec![],
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.log10(), hi.log10());
            (0..count)
                .map(|i| {
                    if i + 1 == count {
                        hi
                    } else {
                        10f64.powf(a + (b - a) * i as f64 / (count - 1) as f64)
                    }
                })
                .collect()
        }
    }
}
