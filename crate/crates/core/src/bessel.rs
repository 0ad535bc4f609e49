//! Integer-order Bessel functions of the first kind for real arguments.
//!
//! The ascending series is used while its terms do not grow (`z²/4 ≤ n+1`)
//! or `z ≤ 2`. Otherwise Miller's backward recurrence, normalized by
//! `J_0 + 2 Σ J_{2k} = 1`.

/// Highest supported order.
pub const MAX_ORDER: u32 = 64;
/// Largest supported `|z|`.
pub const MAX_ARG: f64 = 200.0;

const RESCALE_AT: f64 = 1e250;

/// `J_n(z)`. Returns NaN outside `n <= 64`, `|z| <= 200`.
pub fn bessel_j(n: u32, z: f64) -> f64 {
    if n > MAX_ORDER || !(z.abs() <= MAX_ARG) {
        return f64::NAN;
    }
    let sign = if z < 0.0 && n % 2 == 1 { -1.0 } else { 1.0 };
    let z = z.abs();
    if z == 0.0 {
        return if n == 0 { 1.0 } else { 0.0 };
    }
    let v = if z <= 2.0 || 0.25 * z * z <= (n + 1) as f64 { series(n, z) } else { miller(n, z) };
    sign * v
}

fn series(n: u32, z: f64) -> f64 {
    let half = 0.5 * z;
    let q = -half * half;
    // (z/2)^n / n!
    let mut term = 1.0;
    for k in 1..=n {
        term *= half / k as f64;
    }
    let mut sum = term;
    let mut k = 1.0;
    loop {
        term *= q / (k * (k + n as f64));
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() || k > 200.0 {
            break;
        }
        k += 1.0;
    }
    sum
}

fn miller(n: u32, z: f64) -> f64 {
    let start = 2 * (n as usize + z.ceil() as usize + 20);
    let start = start + start % 2; // even, so the normalization sum pairs up
    let mut values = vec![0.0; start + 2];
    values[start + 1] = 0.0;
    values[start] = 1e-300;
    for k in (1..=start).rev() {
        let next = 2.0 * k as f64 / z * values[k] - values[k + 1];
        values[k - 1] = next;
        if next.abs() > RESCALE_AT {
            for v in values[k - 1..].iter_mut() {
                *v /= RESCALE_AT;
            }
        }
    }
    let mut norm = values[0];
    for k in (2..=start).step_by(2) {
        norm += 2.0 * values[k];
    }
    values[n as usize] / norm
}
