//! Special functions: normal tail, normal quantile and the Hurwitz zeta
//! function at real arguments.

/// `1 − Φ(x)` evaluated through the complementary error function, so the
/// result keeps full relative precision deep in the upper tail.
pub fn normal_tail(x: f64) -> f64 {
    0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
}

/// Standard normal quantile `Φ^{-1}(p)` for `p ∈ (0, 1)`.
pub fn normal_quantile(p: f64) -> f64 {
    use statrs::distribution::{ContinuousCDF, Normal};
    let mut x = Normal::standard().inverse_cdf(p);
    // Newton polish against the accurate tail
    for _ in 0..2 {
        let density = (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt();
        if density <= 0.0 || !x.is_finite() {
            break;
        }
        let resid = if p > 0.5 { normal_tail(x) - (1.0 - p) } else { (1.0 - normal_tail(x)) - p };
        x += if p > 0.5 { resid } else { -resid } / density;
    }
    x
}

/// Hurwitz zeta `ζ(s, a) = Σ_{j≥0} (a + j)^{−s}` for `s > 1`, `a > 0`, by
/// Euler–Maclaurin summation.
pub fn hurwitz_zeta(s: f64, a: f64) -> f64 {
    debug_assert!(s > 1.0 && a > 0.0);
    const HEAD: usize = 16;
    // B_{2j} / (2j)!
    const BERNOULLI_OVER_FACT: [f64; 6] = [
        1.0 / 12.0,
        -1.0 / 720.0,
        1.0 / 30240.0,
        -1.0 / 1209600.0,
        1.0 / 47900160.0,
        -691.0 / 1307674368000.0,
    ];
    let mut acc = 0.0;
    for j in 0..HEAD {
        acc += (a + j as f64).powf(-s);
    }
    let b = a + HEAD as f64;
    acc += b.powf(1.0 - s) / (s - 1.0) + 0.5 * b.powf(-s);
    // rising factorial s(s+1)…(s+2j−2) times b^{−s−2j+1}
    let mut rising = s;
    let mut power = b.powf(-s - 1.0);
    for (j, c) in BERNOULLI_OVER_FACT.iter().enumerate() {
        acc += c * rising * power;
        let k = 2 * j as i32;
        rising *= (s + k as f64 + 1.0) * (s + k as f64 + 2.0);
        power /= b * b;
    }
    acc
}
