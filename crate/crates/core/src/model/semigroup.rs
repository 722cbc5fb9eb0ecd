use crate::error::Error;
use crate::model::{overlap_raw, ModelParams, State};

fn check_time(t: f64) -> Result<(), Error> {
    if !t.is_finite() || t < 0.0 {
        return Err(Error::Domain(format!("time must be finite and non-negative, got {t}")));
    }
    Ok(())
}

/// `p_t(i, j)` for a single ball whose generator has off-diagonal rate
/// `1/(N-1)`.
pub fn single_ball_semigroup(params: &ModelParams, t: f64, i: u32, j: u32) -> Result<f64, Error> {
    check_time(t)?;
    let n = params.urns() as f64;
    let decay = (-n * t / (n - 1.0)).exp();
    Ok(if i == j { ((n - 1.0) * decay + 1.0) / n } else { (1.0 - decay) / n })
}

/// `P_t(x, z)` of the product chain, which depends on `x, z` only through
/// their overlap.
pub fn product_semigroup(params: &ModelParams, t: f64, x: &State, z: &State) -> Result<f64, Error> {
    check_time(t)?;
    params.check_state(x)?;
    params.check_state(z)?;
    let n = params.urns() as f64;
    let m = params.balls() as i32;
    let k = overlap_raw(x.positions(), z.positions()) as i32;
    let decay = (-n * t / (n - 1.0)).exp();
    Ok(((n - 1.0) * decay + 1.0).powi(k) * (1.0 - decay).powi(m - k) / n.powi(m))
}
