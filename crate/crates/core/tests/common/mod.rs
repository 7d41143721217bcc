//! Reference implementations used as test oracles. None of these call the
//! library's own algorithms; they recompute each quantity from its
//! definition with a different method.

#![allow(dead_code)]

use std::f64::consts::PI;

use num_complex::Complex64;

pub fn gaussian_pdf(x: f64, mean: f64, std: f64) -> f64 {
    let z = (x - mean) / std;
    (-0.5 * z * z).exp() / (std * (2.0 * PI).sqrt())
}

/// Mixture density as a plain weighted sum.
pub fn mixture_pdf(weights: &[f64], means: &[f64], stds: &[f64], x: f64) -> f64 {
    weights
        .iter()
        .zip(means)
        .zip(stds)
        .map(|((w, m), s)| w * gaussian_pdf(x, *m, *s))
        .sum()
}

/// KL(mixture || N(mu, sigma²)) by composite Simpson quadrature over
/// ±12 component standard deviations.
pub fn kld_quadrature(weights: &[f64], means: &[f64], stds: &[f64], mu: f64, sigma: f64) -> f64 {
    let lo = means
        .iter()
        .zip(stds)
        .map(|(m, s)| m - 12.0 * s)
        .fold(f64::INFINITY, f64::min);
    let hi = means
        .iter()
        .zip(stds)
        .map(|(m, s)| m + 12.0 * s)
        .fold(f64::NEG_INFINITY, f64::max);
    let n = 200_000usize;
    let h = (hi - lo) / n as f64;
    let f = |x: f64| {
        let p = mixture_pdf(weights, means, stds, x);
        if p <= 0.0 {
            0.0
        } else {
            p * (p / gaussian_pdf(x, mu, sigma)).ln()
        }
    };
    let mut sum = f(lo) + f(hi);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * f(lo + i as f64 * h);
    }
    sum * h / 3.0
}

/// Even-odd ray casting: count crossings of a horizontal ray to +∞.
pub fn inside_ray_casting(poly: &[(f64, f64)], x: f64, y: f64) -> bool {
    let mut inside = false;
    let n = poly.len();
    for i in 0..n {
        let (xi, yi) = poly[i];
        let (xj, yj) = poly[(i + n - 1) % n];
        if (yi > y) != (yj > y) {
            let x_cross = xi + (y - yi) * (xj - xi) / (yj - yi);
            if x < x_cross {
                inside = !inside;
            }
        }
    }
    inside
}

/// Convex-polygon half-plane test. Both axes are normalised to unit span
/// and edges are oriented by the polygon's signed area.
pub struct HalfPlanes {
    origin: (f64, f64),
    scale: (f64, f64),
    pts: Vec<(f64, f64)>,
    sign: f64,
}

impl HalfPlanes {
    pub fn new(poly: &[(f64, f64)]) -> Self {
        let (min_x, max_x) = poly
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p.0), b.max(p.0)));
        let (min_y, max_y) = poly
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p.1), b.max(p.1)));
        let origin = (min_x, min_y);
        let scale = (max_x - min_x, max_y - min_y);
        let pts: Vec<(f64, f64)> = poly
            .iter()
            .map(|p| ((p.0 - origin.0) / scale.0, (p.1 - origin.1) / scale.1))
            .collect();
        let n = pts.len();
        let area: f64 = (0..n)
            .map(|i| {
                let (a, b) = (pts[i], pts[(i + 1) % n]);
                a.0 * b.1 - b.0 * a.1
            })
            .sum();
        Self {
            origin,
            scale,
            pts,
            sign: area.signum(),
        }
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        let q = ((x - self.origin.0) / self.scale.0, (y - self.origin.1) / self.scale.1);
        let n = self.pts.len();
        (0..n).all(|i| {
            let (a, b) = (self.pts[i], self.pts[(i + 1) % n]);
            let cross = (b.0 - a.0) * (q.1 - a.1) - (b.1 - a.1) * (q.0 - a.0);
            self.sign * cross >= -1e-12
        })
    }
}

/// Samples overtaken by their successor: sort every sample by arrival time
/// and flag `k` when `k + 1` lands earlier in the sorted order.
pub fn arrival_inversions(send_times: &[f64], latencies: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..send_times.len()).collect();
    order.sort_by(|&a, &b| {
        (send_times[a] + latencies[a])
            .partial_cmp(&(send_times[b] + latencies[b]))
            .unwrap()
            .then(a.cmp(&b))
    });
    let mut rank = vec![0usize; order.len()];
    for (r, &k) in order.iter().enumerate() {
        rank[k] = r;
    }
    (0..send_times.len().saturating_sub(1))
        .filter(|&k| rank[k + 1] < rank[k])
        .collect()
}

/// Magnitude of the DFT of `x` (mean removed) at `freq`, for samples spaced
/// `dt` apart.
pub fn dft_magnitude(x: &[f64], dt: f64, freq: f64) -> f64 {
    let mean = x.iter().sum::<f64>() / x.len() as f64;
    x.iter()
        .enumerate()
        .map(|(n, v)| Complex64::from_polar(v - mean, -2.0 * PI * freq * n as f64 * dt))
        .sum::<Complex64>()
        .norm()
}

/// Frequency in `(0, max_freq]` on a `step` grid with the largest DFT magnitude.
pub fn spectral_peak(x: &[f64], dt: f64, step: f64, max_freq: f64) -> f64 {
    let bins = (max_freq / step).round() as usize;
    (1..=bins)
        .map(|b| b as f64 * step)
        .map(|f| (f, dft_magnitude(x, dt, f)))
        .fold(
            (0.0, f64::NEG_INFINITY),
            |best, cur| if cur.1 > best.1 { cur } else { best },
        )
        .0
}

/// Windowed synchrophasor straight from its defining sum: sinc low-pass
/// with a Hamming window, normalised by the tap sum, RMS scaling.
pub fn brute_phasor(
    x: impl Fn(i64) -> f64,
    center: i64,
    order: usize,
    filter_ref_freq: f64,
    sampling_freq: f64,
    nominal_freq: f64,
) -> Complex64 {
    let half = (order / 2) as i64;
    let tap = |k: i64| {
        let window = 0.54 + 0.46 * (2.0 * PI * k as f64 / order as f64).cos();
        let arg = 4.0 * PI * filter_ref_freq * k as f64 / sampling_freq;
        let sinc = if k == 0 { 1.0 } else { arg.sin() / arg };
        sinc * window
    };
    let gain: f64 = (-half..=half).map(tap).sum();
    let sum: Complex64 = (-half..=half)
        .map(|k| {
            let n = center + k;
            let theta = -2.0 * PI * nominal_freq * n as f64 / sampling_freq;
            Complex64::from_polar(x(n) * tap(k), theta)
        })
        .sum();
    sum * (2f64.sqrt() / gain)
}

/// Distance in units in the last place between two finite doubles.
pub fn ulps(a: f64, b: f64) -> u64 {
    let key = |x: f64| {
        let bits = x.to_bits() as i64;
        if bits < 0 {
            i64::MIN - bits
        } else {
            bits
        }
    };
    key(a).abs_diff(key(b))
}
