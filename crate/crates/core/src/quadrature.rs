//! Adaptive Gauss–Legendre integration on finite intervals.

use std::sync::OnceLock;

use gauss_quad::GaussLegendre;

const ORDER: usize = 15;
const MAX_DEPTH: u32 = 40;

fn rule() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(ORDER).expect("order ≥ 2"))
}

/// Integrates `f` over `[a, b]` to absolute tolerance `tol`.
///
/// The interval is first cut into panels no wider than `scale` so that narrow
/// features are seen by the initial rule; each panel is then bisected until the
/// one-panel and two-panel estimates agree to within its share of `tol`.
pub fn integrate<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, scale: f64, tol: f64) -> f64 {
    if !(b > a) {
        return 0.0;
    }
    let panels = ((b - a) / scale).ceil().clamp(1.0, 4096.0) as usize;
    let width = (b - a) / panels as f64;
    let panel_tol = tol / panels as f64;
    (0..panels)
        .map(|i| {
            let lo = a + width * i as f64;
            let hi = if i + 1 == panels { b } else { lo + width };
            let whole = rule().integrate(lo, hi, f);
            refine(f, lo, hi, whole, panel_tol, 0)
        })
        .sum()
}

fn refine<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let mid = 0.5 * (a + b);
    let left = rule().integrate(a, mid, f);
    let right = rule().integrate(mid, b, f);
    let split = left + right;
    if (split - whole).abs() <= tol || depth >= MAX_DEPTH {
        return split;
    }
    refine(f, a, mid, left, 0.5 * tol, depth + 1) + refine(f, mid, b, right, 0.5 * tol, depth + 1)
}
