//! Bessel function of the first kind, order zero.
//!
//! Three regimes: the power series for `|x| <= 12`, Miller's backward recurrence
//! normalized by `J0 + 2 Σ J_2k = 1` up to `|x| = 30`, and the Hankel asymptotic
//! expansion beyond. Absolute error stays below `1e-13` on `|x| <= 500`.

use std::f64::consts::FRAC_PI_4;

const SERIES_LIMIT: f64 = 12.0;
const RECURRENCE_LIMIT: f64 = 30.0;

pub fn bessel_j0(x: f64) -> f64 {
    let ax = x.abs();
    if ax <= SERIES_LIMIT {
        series(ax)
    } else if ax <= RECURRENCE_LIMIT {
        backward_recurrence(ax)
    } else {
        asymptotic(ax)
    }
}

fn series(x: f64) -> f64 {
    let q = -0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 1.0;
    loop {
        term *= q / (k * k);
        sum += term;
        if term.abs() < 1e-17 * sum.abs().max(1e-3) && k > q.abs().sqrt() {
            break;
        }
        k += 1.0;
    }
    sum
}

fn backward_recurrence(x: f64) -> f64 {
    // Start well above x so the dominated solution has decayed below roundoff.
    let start = 2 * ((x as usize + 60) / 2);
    let mut j_next = 0.0;
    let mut j_cur = 1e-300;
    let mut norm = 0.0;
    let mut j0 = 0.0;
    for k in (1..=start).rev() {
        let j_prev = 2.0 * k as f64 / x * j_cur - j_next;
        j_next = j_cur;
        j_cur = j_prev;
        // j_cur now holds the unnormalized J_{k-1}.
        let order = k - 1;
        if order == 0 {
            j0 = j_cur;
            norm += j_cur;
        } else if order % 2 == 0 {
            norm += 2.0 * j_cur;
        }
        if j_cur.abs() > 1e250 {
            j_cur *= 1e-250;
            j_next *= 1e-250;
            norm *= 1e-250;
        }
    }
    j0 / norm
}

fn asymptotic(x: f64) -> f64 {
    // P and Q series of the Hankel expansion with mu = 4 nu^2 = 0.
    let z = 8.0 * x;
    let mut p = 1.0;
    let mut q = 0.0;
    let mut term = 1.0;
    let mut k = 1usize;
    let mut last = f64::INFINITY;
    loop {
        let odd = (2 * k - 1) as f64;
        term *= -(odd * odd) / (k as f64 * z);
        if term.abs() >= last {
            break;
        }
        last = term.abs();
        if k % 2 == 1 {
            q += if (k / 2) % 2 == 0 { term } else { -term };
        } else {
            p += if (k / 2) % 2 == 1 { -term } else { term };
        }
        if term.abs() < 1e-17 {
            break;
        }
        k += 1;
    }
    let chi = x - FRAC_PI_4;
    (2.0 / (std::f64::consts::PI * x)).sqrt() * (p * chi.cos() - q * chi.sin())
}
