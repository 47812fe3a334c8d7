use rand::Rng;

use crate::model::RegimeChain;

/// Exponential variate with the given rate; `+inf` when the rate is zero.
#[inline]
pub fn exponential<R: Rng + ?Sized>(rate: f64, rng: &mut R) -> f64 {
    if !(rate > 0.0) {
        return f64::INFINITY;
    }
    let u: f64 = rng.random();
    -libm::log1p(-u) / rate
}

/// Sojourn time in regime `i` and the regime entered afterwards. A regime
/// with no exits returns `(+inf, i)`.
pub fn ctmc_next_switch<R: Rng + ?Sized>(chain: &RegimeChain, i: usize, rng: &mut R) -> (f64, usize) {
    let total = chain.exit_rate(i);
    if !(total > 0.0) {
        return (f64::INFINITY, i);
    }
    let sojourn = exponential(total, rng);
    let target = rng.random::<f64>() * total;
    let row = chain.row(i);
    let mut acc = 0.0;
    let mut last = i;
    for (j, &w) in row.iter().enumerate() {
        if j == i || w <= 0.0 {
            continue;
        }
        acc += w;
        last = j;
        if target < acc {
            return (sojourn, j);
        }
    }
    (sojourn, last)
}
