//! Closed forms for the birth-death chain with `a = 1`, `d(e) = |e|` and
//! `P(W = 1) = P(W = -1) = p`.

use crate::error::{Error, Result};
use crate::model::{DiscountFactor, PerfPoint, Provenance};

fn check(p: f64, k: u32) -> Result<()> {
    if !(p > 0.0 && p < 0.5) {
        return Err(Error::InvalidArgument(format!(
            "p must lie in (0, 1/2), got {p}"
        )));
    }
    if k == 0 {
        return Err(Error::InvalidArgument("closed forms need k >= 1".into()));
    }
    Ok(())
}

/// `m = acosh(-K_beta / 2)` with `K_beta = -2 - (1 - beta) / (beta p)`.
fn decay_rate(p: f64, beta: f64) -> f64 {
    let half_k = 1.0 + (1.0 - beta) / (2.0 * beta * p);
    half_k.acosh()
}

/// `(D^(k), N^(k))` in closed form.
pub fn bd_closed_form(p: f64, beta: DiscountFactor, k: u32) -> Result<PerfPoint> {
    check(p, k)?;
    let kf = f64::from(k);
    let (d, n) = if beta.is_average() {
        ((kf * kf - 1.0) / (3.0 * kf), 2.0 * p / (kf * kf))
    } else {
        let b = beta.value();
        let m = decay_rate(p, b);
        let sh_half = (kf * m / 2.0).sinh();
        let d = ((kf * m).sinh() - kf * m.sinh()) / (2.0 * sh_half * sh_half * m.sinh());
        let n = 2.0 * b * p * (m / 2.0).sinh().powi(2) * (kf * m).cosh() / (sh_half * sh_half)
            - (1.0 - b);
        (d, n)
    };
    Ok(PerfPoint::new(d, n, Provenance::ClosedForm))
}

/// Entry `(i, j)` of `(I - beta T)^{-1}` on the silent set, `|i|, |j| < k`.
pub fn bd_q_entry(p: f64, beta: DiscountFactor, k: u32, i: i64, j: i64) -> Result<f64> {
    check(p, k)?;
    let ki = i64::from(k);
    if i.abs() >= ki || j.abs() >= ki {
        return Err(Error::InvalidArgument(format!(
            "indices ({i}, {j}) outside the silent set for k = {k}"
        )));
    }
    if beta.is_average() {
        let (lo, hi) = (i.min(j), i.max(j));
        return Ok(((ki - hi) * (ki + lo)) as f64 / (2.0 * p * f64::from(k)));
    }
    let b = beta.value();
    let m = decay_rate(p, b);
    let kf = f64::from(k);
    let num = ((2.0 * kf - (i - j).abs() as f64) * m).cosh() - ((i + j) as f64 * m).cosh();
    Ok(num / (2.0 * b * p * m.sinh() * (2.0 * kf * m).sinh()))
}

/// Corner price `lambda^(k)` for the long-term average criterion.
pub fn bd_lambda_average(p: f64, k: u32) -> Result<f64> {
    check(p, k)?;
    let kf = f64::from(k);
    Ok(kf * (kf + 1.0) * (kf * kf + kf + 1.0) / (6.0 * p * (2.0 * kf + 1.0)))
}
