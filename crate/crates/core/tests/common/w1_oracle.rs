//! Independent evaluation of `int |F_emp(x) - Phi(x)| dx` by composite
//! Gauss-Legendre quadrature, with crossings located by bisection.

fn cdf(x: f64) -> f64 {
    0.5 * statrs::function::erf::erfc(-x / std::f64::consts::SQRT_2)
}

const GL: [(f64, f64); 10] = [
    (0.148_874_338_981_631_2, 0.295_524_224_714_752_9),
    (0.433_395_394_129_247_2, 0.269_266_719_309_996_4),
    (0.679_409_568_299_024_4, 0.219_086_362_515_982),
    (0.865_063_366_688_984_5, 0.149_451_349_150_580_6),
    (0.973_906_528_517_171_7, 0.066_671_344_308_688_14),
    (-0.148_874_338_981_631_2, 0.295_524_224_714_752_9),
    (-0.433_395_394_129_247_2, 0.269_266_719_309_996_4),
    (-0.679_409_568_299_024_4, 0.219_086_362_515_982),
    (-0.865_063_366_688_984_5, 0.149_451_349_150_580_6),
    (-0.973_906_528_517_171_7, 0.066_671_344_308_688_14),
];

fn gauss(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let panels = (((b - a) / 0.05).ceil() as usize).clamp(4, 4000);
    let h = (b - a) / panels as f64;
    let mut acc = 0.0;
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * h;
        for &(x, w) in &GL {
            acc += w * f(mid + 0.5 * h * x);
        }
    }
    acc * 0.5 * h
}

/// Bisection for `Phi(z) = p` inside `[a, b]`, if it crosses there.
fn crossing(a: f64, b: f64, p: f64) -> Option<f64> {
    let (fa, fb) = (cdf(a) - p, cdf(b) - p);
    if fa >= 0.0 || fb <= 0.0 {
        return None;
    }
    let (mut lo, mut hi) = (a, b);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if cdf(mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

fn piece(a: f64, b: f64, p: f64) -> f64 {
    let f = move |x: f64| (p - cdf(x)).abs();
    match crossing(a, b, p) {
        Some(z) => gauss(&f, a, z) + gauss(&f, z, b),
        None => gauss(&f, a, b),
    }
}

pub fn w1_by_quadrature(samples: &[f64]) -> f64 {
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let r = xs.len();
    let lo = xs[0].min(-40.0);
    let hi = xs[r - 1].max(40.0);
    let mut total = piece(lo, xs[0], 0.0);
    for k in 1..r {
        total += piece(xs[k - 1], xs[k], k as f64 / r as f64);
    }
    total + piece(xs[r - 1], hi, 1.0)
}
