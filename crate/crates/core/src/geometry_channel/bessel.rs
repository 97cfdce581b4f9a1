use crate::error::ModelError;

/// Largest |x| accepted by [`bessel_j0`].
pub const J0_MAX_ARG: f64 = 50.0;

/// Zero-order Bessel function of the first kind, valid for |x| <= 50.
///
/// Uses Miller's backward recurrence normalized by
/// `J0 + 2(J2 + J4 + ...) = 1`.
pub fn bessel_j0(x: f64) -> Result<f64, ModelError> {
    if !x.is_finite() || x.abs() > J0_MAX_ARG {
        return Err(ModelError::BesselDomain(x));
    }
    let x = x.abs();
    if x < 1e-4 {
        let q = x * x / 4.0;
        return Ok(1.0 - q + q * q / 4.0);
    }
    // Start well above x so the seed error decays below f64 resolution.
    let mut m = (x + 12.0 * x.cbrt() + 30.0) as usize;
    m += m % 2;
    let two_over_x = 2.0 / x;
    let mut j_next = 0.0f64;
    let mut j_cur = 1e-30f64;
    let mut norm = 0.0f64;
    let mut j0 = 0.0;
    for k in (1..=m).rev() {
        let j_prev = k as f64 * two_over_x * j_cur - j_next;
        j_next = j_cur;
        j_cur = j_prev;
        if j_cur.abs() > 1e250 {
            j_cur *= 1e-250;
            j_next *= 1e-250;
            norm *= 1e-250;
        }
        // j_cur now holds J_{k-1}.
        if k == 1 {
            j0 = j_cur;
        } else if (k - 1) % 2 == 0 {
            norm += 2.0 * j_cur;
        }
    }
    norm += j0;
    Ok(j0 / norm)
}
