/// V2V SINR of a VUE sharing spectrum with a single CUE.
pub fn sinr_vue(p_c: f64, p_d: f64, g_d: f64, g_cross: f64, sigma2: f64) -> f64 {
    p_d * g_d / (sigma2 + p_c * g_cross)
}

/// V2I SINR of a CUE sharing spectrum with a single VUE.
pub fn sinr_cue(p_c: f64, p_d: f64, g_c: f64, g_b: f64, sigma2: f64) -> f64 {
    p_c * g_c / (sigma2 + p_d * g_b)
}

/// V2V SINR of VUE s under reuse pattern column `rho_col[j]`.
/// `g_cross_col[j]` is the gain from CUE j to this VUE's receiver.
pub fn sinr_vue_reuse(p_c: &[f64], p_d: f64, g_d: f64, g_cross_col: &[f64], rho_col: &[bool], sigma2: f64) -> f64 {
    let interference: f64 = p_c
        .iter()
        .zip(g_cross_col)
        .zip(rho_col)
        .filter(|(_, &r)| r)
        .map(|((p, g), _)| p * g)
        .sum();
    p_d * g_d / (sigma2 + interference)
}

/// V2I SINR of CUE j under reuse pattern row `rho_row[s]`.
pub fn sinr_cue_reuse(p_c: f64, p_d: &[f64], g_c: f64, g_b: &[f64], rho_row: &[bool], sigma2: f64) -> f64 {
    let interference: f64 = p_d
        .iter()
        .zip(g_b)
        .zip(rho_row)
        .filter(|(_, &r)| r)
        .map(|((p, g), _)| p * g)
        .sum();
    p_c * g_c / (sigma2 + interference)
}
