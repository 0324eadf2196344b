//! Reference computations for tests: plain quadrature, direct Bayes
//! posteriors, Monte-Carlo entropy estimates and brute-force enumerations.
//! Nothing here shares code with the library under test.

use std::collections::HashMap;
use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

/// Composite Simpson rule with `n` panels (rounded up to even).
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let n = n + n % 2;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(a + i as f64 * h);
    }
    s * h / 3.0
}

pub fn normal_pdf(d: f64, var: f64) -> f64 {
    (-d * d / (2.0 * var)).exp() / (2.0 * PI * var).sqrt()
}

pub fn phi(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

pub fn h2(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        0.0
    } else {
        -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
    }
}

/// Shannon entropy in bits of a probability vector (need not be normalised).
pub fn entropy(ws: &[f64]) -> f64 {
    let tot: f64 = ws.iter().sum();
    ws.iter()
        .filter(|&&w| w > 0.0)
        .map(|&w| -(w / tot) * (w / tot).log2())
        .sum()
}

/// Soft quantiser with thresholds `a` (sorted, positive).
#[derive(Debug, Clone)]
pub struct Quant {
    pub a: Vec<f64>,
}

impl Quant {
    pub fn levels(&self) -> usize {
        self.a.len() + 1
    }

    pub fn level(&self, x: f64) -> usize {
        self.a.iter().filter(|&&t| x.abs() > t).count()
    }

    /// `[lo, hi)` bounds on |x| of a level.
    pub fn band(&self, level: usize) -> (f64, f64) {
        let lo = if level == 0 { 0.0 } else { self.a[level - 1] };
        let hi = self.a.get(level).copied().unwrap_or(f64::INFINITY);
        (lo, hi)
    }

    /// `P(bit, level | u)` for noise variance `v`.
    pub fn cell(&self, u: f64, bit: u8, level: usize, v: f64) -> f64 {
        let s = v.sqrt();
        let (lo, hi) = self.band(level);
        let (l, h) = if bit == 1 { (lo, hi) } else { (-hi, -lo) };
        phi((h - u) / s) - phi((l - u) / s)
    }

    pub fn level_prob(&self, u: f64, level: usize, v: f64) -> f64 {
        self.cell(u, 0, level, v) + self.cell(u, 1, level, v)
    }
}

/// Variances of the three channels.
#[derive(Debug, Clone, Copy)]
pub struct Vars {
    pub a: f64,
    pub b: f64,
    pub e: f64,
}

impl Vars {
    pub fn from_snr_nnr(snr_db: f64, nnr: f64) -> Self {
        let v = 10f64.powf(-snr_db / 10.0);
        Self { a: v, b: v, e: nnr * v }
    }
}

/// Which bit and which observation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Term {
    XGivenY,
    XGivenZ,
    YGivenX,
    YGivenZ,
}

pub const TERMS: [Term; 4] = [Term::XGivenY, Term::XGivenZ, Term::YGivenX, Term::YGivenZ];

/// `P(target bit = 1 | obs, w_a, w_b)` by Bayes' rule over `u = ±1`.
pub fn posterior(term: Term, obs: f64, wa: usize, wb: usize, q: &Quant, v: &Vars) -> f64 {
    let (vt, vo, wt, wo, obs_var) = match term {
        Term::XGivenY => (v.a, v.b, wa, wb, v.b),
        Term::XGivenZ => (v.a, v.b, wa, wb, v.e),
        Term::YGivenX => (v.b, v.a, wb, wa, v.a),
        Term::YGivenZ => (v.b, v.a, wb, wa, v.e),
    };
    let eve = matches!(term, Term::XGivenZ | Term::YGivenZ);
    let (mut num, mut den) = (0.0, 0.0);
    for u in [-1.0, 1.0] {
        let mut w = normal_pdf(obs - u, obs_var);
        if eve {
            w *= q.level_prob(u, wo, vo);
        }
        num += w * q.cell(u, 1, wt, vt);
        den += w * q.level_prob(u, wt, vt);
    }
    num / den
}

/// `H(term | cell)` by Simpson quadrature of density × h2(posterior).
pub fn entropy_by_simpson(term: Term, wa: usize, wb: usize, q: &Quant, v: &Vars, panels: usize) -> f64 {
    let p_cell: f64 = [-1.0, 1.0]
        .iter()
        .map(|&u| 0.5 * q.level_prob(u, wa, v.a) * q.level_prob(u, wb, v.b))
        .sum();
    let (obs_var, ranges) = match term {
        Term::XGivenZ | Term::YGivenZ => {
            let r = 1.0 + 12.0 * v.e.sqrt();
            (v.e, vec![(-r, r)])
        }
        Term::XGivenY | Term::YGivenX => {
            let (var, level) = if term == Term::XGivenY { (v.b, wb) } else { (v.a, wa) };
            let (lo, hi) = q.band(level);
            let hi = hi.min(lo.max(1.0) + 12.0 * var.sqrt());
            (var, vec![(-hi, -lo), (lo, hi)])
        }
    };
    let (vt_self, vt_other, wt, wo) = match term {
        Term::XGivenY | Term::XGivenZ => (v.a, v.b, wa, wb),
        Term::YGivenX | Term::YGivenZ => (v.b, v.a, wb, wa),
    };
    let eve = matches!(term, Term::XGivenZ | Term::YGivenZ);
    let density = |o: f64| {
        [-1.0, 1.0]
            .iter()
            .map(|&u| {
                let mut w = 0.5 * normal_pdf(o - u, obs_var) * q.level_prob(u, wt, vt_self);
                if eve {
                    w *= q.level_prob(u, wo, vt_other);
                }
                w
            })
            .sum::<f64>()
    };
    ranges
        .into_iter()
        .map(|(a, b)| {
            simpson(
                |o| density(o) * h2(posterior(term, o, wa, wb, q, v)),
                a,
                b,
                panels,
            )
        })
        .sum::<f64>()
        / p_cell
}

/// Monte-Carlo estimate of one conditional entropy with its standard error.
#[derive(Debug, Clone, Copy)]
pub struct McEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub count: usize,
}

/// Cell and level probabilities of one channel, indexed `[u][bit][level]`.
struct Laws {
    cell: [[Vec<f64>; 2]; 2],
    level: [Vec<f64>; 2],
}

impl Laws {
    fn new(q: &Quant, v: f64) -> Self {
        let cell = [-1.0, 1.0].map(|u| [0u8, 1].map(|b| (0..q.levels()).map(|l| q.cell(u, b, l, v)).collect()));
        let level = [0, 1].map(|ui| (0..q.levels()).map(|l| q.level_prob([-1.0, 1.0][ui], l, v)).collect());
        Self { cell, level }
    }
}

fn posterior_cached(term: Term, obs: f64, wa: usize, wb: usize, la: &Laws, lb: &Laws, v: &Vars) -> f64 {
    let (lt, lo, wt, wo, obs_var) = match term {
        Term::XGivenY => (la, lb, wa, wb, v.b),
        Term::XGivenZ => (la, lb, wa, wb, v.e),
        Term::YGivenX => (lb, la, wb, wa, v.a),
        Term::YGivenZ => (lb, la, wb, wa, v.e),
    };
    let eve = matches!(term, Term::XGivenZ | Term::YGivenZ);
    let (mut num, mut den) = (0.0, 0.0);
    for (ui, u) in [-1.0, 1.0].into_iter().enumerate() {
        let mut w = normal_pdf(obs - u, obs_var);
        if eve {
            w *= lo.level[ui][wo];
        }
        num += w * lt.cell[ui][1][wt];
        den += w * lt.level[ui][wt];
    }
    num / den
}

/// Per-cell Monte-Carlo estimates of all four conditional entropies from
/// `samples` draws of `(U, X, Y, Z)`. Each draw contributes `h2(posterior)`
/// to its cell, an unbiased estimate of the conditional entropy.
pub fn mc_cell_entropies(
    q: &Quant,
    v: &Vars,
    samples: usize,
    seed: u64,
) -> HashMap<(usize, usize, Term), McEstimate> {
    let (la, lb) = (Laws::new(q, v.a), Laws::new(q, v.b));
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut acc: HashMap<(usize, usize, Term), (f64, f64, usize)> = HashMap::new();
    for _ in 0..samples {
        let u = if rng.random::<bool>() { 1.0 } else { -1.0 };
        let n: [f64; 3] = [
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
        ];
        let x = u + v.a.sqrt() * n[0];
        let y = u + v.b.sqrt() * n[1];
        let z = u + v.e.sqrt() * n[2];
        let (wa, wb) = (q.level(x), q.level(y));
        for term in TERMS {
            let obs = match term {
                Term::XGivenY => y,
                Term::YGivenX => x,
                _ => z,
            };
            let h = h2(posterior_cached(term, obs, wa, wb, &la, &lb, v));
            let e = acc.entry((wa, wb, term)).or_insert((0.0, 0.0, 0));
            e.0 += h;
            e.1 += h * h;
            e.2 += 1;
        }
    }
    acc.into_iter()
        .map(|(k, (s, s2, c))| {
            let n = c as f64;
            let mean = s / n;
            let var = if c > 1 { ((s2 - n * mean * mean) / (n - 1.0)).max(0.0) } else { f64::NAN };
            (
                k,
                McEstimate {
                    mean,
                    stderr: (var / n).sqrt(),
                    count: c,
                },
            )
        })
        .collect()
}

/// Importance-sampled variant of [`mc_cell_entropies`] for regimes where the
/// entropy mass sits in rare noise excursions.
///
/// Each noise term is drawn from the defensive mixture `½·N(0, v) + ½·N(0, widen²·v)`
/// and reweighted by the density ratio, which is at most 2 per term. Cell
/// estimates are self-normalised ratios; `stderr` is the delta-method
/// standard error and `count` the number of draws landing in the cell.
pub fn mc_cell_entropies_weighted(
    q: &Quant,
    v: &Vars,
    samples: usize,
    widen: f64,
    seed: u64,
) -> HashMap<(usize, usize, Term), McEstimate> {
    let (la, lb) = (Laws::new(q, v.a), Laws::new(q, v.b));
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let draw = |rng: &mut ChaCha12Rng| -> (f64, f64) {
        let z: f64 = rng.sample(StandardNormal);
        let n = if rng.random::<bool>() { z } else { widen * z };
        let mix = 0.5 * normal_pdf(n, 1.0) + 0.5 * normal_pdf(n, widen * widen);
        (n, normal_pdf(n, 1.0) / mix)
    };
    // Σw, Σw·h, Σw², Σw²·h, Σw²·h², count
    let mut acc: HashMap<(usize, usize, Term), [f64; 6]> = HashMap::new();
    for _ in 0..samples {
        let u = if rng.random::<bool>() { 1.0 } else { -1.0 };
        let (na, wa_) = draw(&mut rng);
        let (nb, wb_) = draw(&mut rng);
        let (ne, we_) = draw(&mut rng);
        let w = wa_ * wb_ * we_;
        let x = u + v.a.sqrt() * na;
        let y = u + v.b.sqrt() * nb;
        let z = u + v.e.sqrt() * ne;
        let (wa, wb) = (q.level(x), q.level(y));
        for term in TERMS {
            let obs = match term {
                Term::XGivenY => y,
                Term::YGivenX => x,
                _ => z,
            };
            let h = h2(posterior_cached(term, obs, wa, wb, &la, &lb, v));
            let e = acc.entry((wa, wb, term)).or_insert([0.0; 6]);
            e[0] += w;
            e[1] += w * h;
            e[2] += w * w;
            e[3] += w * w * h;
            e[4] += w * w * h * h;
            e[5] += 1.0;
        }
    }
    acc.into_iter()
        .map(|(k, [sw, swh, sw2, sw2h, sw2h2, c])| {
            let mean = swh / sw;
            let var = (sw2h2 - 2.0 * mean * sw2h + mean * mean * sw2).max(0.0) / (sw * sw);
            (
                k,
                McEstimate {
                    mean,
                    stderr: var.sqrt(),
                    count: c as usize,
                },
            )
        })
        .collect()
}

/// Repetition-code advantage distillation over three BSCs, by enumerating
/// every satellite word, noise pattern and key bit. Eve conditions on her
/// whole received word and the public message.
pub fn repetition_rate_brute_force(n: usize, eps_a: f64, eps_b: f64, eps_e: f64) -> f64 {
    let pr = |bit: u32, eps: f64| if bit == 1 { eps } else { 1.0 - eps };
    let mask = (1u32 << n) - 1;
    let mut p_acc = 0.0;
    let mut bob: HashMap<(u32, u32), f64> = HashMap::new();
    let mut eve: HashMap<(u32, u32, u32), f64> = HashMap::new();
    for c in 0..2u32 {
        for u in 0..(1u32 << n) {
            for na in 0..(1u32 << n) {
                for nb in 0..(1u32 << n) {
                    for ne in 0..(1u32 << n) {
                        let mut p = 0.5 * 0.5f64.powi(n as i32);
                        for i in 0..n {
                            p *= pr(na >> i & 1, eps_a) * pr(nb >> i & 1, eps_b) * pr(ne >> i & 1, eps_e);
                        }
                        let (x, y, z) = (u ^ na, u ^ nb, u ^ ne);
                        let msg = x ^ if c == 1 { mask } else { 0 };
                        let v = y ^ msg;
                        if v != 0 && v != mask {
                            continue;
                        }
                        p_acc += p;
                        *bob.entry((c, v & 1)).or_default() += p;
                        *eve.entry((c, z, msg)).or_default() += p;
                    }
                }
            }
        }
    }
    let cond = |joint: Vec<((u32, u64), f64)>| -> f64 {
        let mut by_obs: HashMap<u64, [f64; 2]> = HashMap::new();
        for ((c, o), p) in joint {
            by_obs.entry(o).or_default()[c as usize] += p / p_acc;
        }
        by_obs.values().map(|w| (w[0] + w[1]) * entropy(w)).sum()
    };
    let h_bob = cond(bob.into_iter().map(|((c, b), p)| ((c, b as u64), p)).collect());
    let h_eve = cond(
        eve.into_iter()
            .map(|((c, z, m), p)| ((c, (u64::from(z) << 32) | u64::from(m)), p))
            .collect(),
    );
    p_acc / n as f64 * (h_eve - h_bob).max(0.0)
}

/// Pearson χ² statistic of observed counts against a uniform law.
pub fn chi_square_uniform(counts: &[u64]) -> f64 {
    let total: u64 = counts.iter().sum();
    let e = total as f64 / counts.len() as f64;
    counts.iter().map(|&c| (c as f64 - e).powi(2) / e).sum()
}

/// Upper `1 − p` quantile of χ² with `k` degrees of freedom
/// (Wilson–Hilferty approximation with the normal quantile `z`).
pub fn chi_square_critical(k: usize, z: f64) -> f64 {
    let k = k as f64;
    let t = 1.0 - 2.0 / (9.0 * k) + z * (2.0 / (9.0 * k)).sqrt();
    k * t * t * t
}
