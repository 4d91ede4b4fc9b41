//! Hurwitz zeta by Euler–Maclaurin summation.

const DIRECT_TERMS: u32 = 16;

/// `B_2j / (2j)!` for `j = 1..=8`.
const BERNOULLI_OVER_FACTORIAL: [f64; 8] = [
    1.0 / 6.0 / 2.0,
    -1.0 / 30.0 / 24.0,
    1.0 / 42.0 / 720.0,
    -1.0 / 30.0 / 40_320.0,
    5.0 / 66.0 / 3_628_800.0,
    -691.0 / 2730.0 / 479_001_600.0,
    7.0 / 6.0 / 87_178_291_200.0,
    -3617.0 / 510.0 / 20_922_789_888_000.0,
];

/// `sum_{n >= 0} (n + a)^(-s)` for `s > 1`, `a > 0`.
pub(crate) fn hurwitz_zeta(s: f64, a: f64) -> f64 {
    debug_assert!(s > 1.0 && a > 0.0);
    let mut sum = 0.0;
    for n in 0..DIRECT_TERMS {
        sum += (a + n as f64).powf(-s);
    }
    let x = a + DIRECT_TERMS as f64;
    let mut tail = x.powf(1.0 - s) / (s - 1.0) + 0.5 * x.powf(-s);
    // Rising factorial s (s+1) ... (s+2j-2), times x^(-s-2j+1).
    let mut rising = s;
    let mut power = x.powf(-s - 1.0);
    let inv_x2 = 1.0 / (x * x);
    for (j, coef) in BERNOULLI_OVER_FACTORIAL.iter().enumerate() {
        if j > 0 {
            let base = s + (2 * j) as f64;
            rising *= (base - 1.0) * base;
            power *= inv_x2;
        }
        tail += coef * rising * power;
    }
    sum + tail
}
