use statrs::function::gamma::ln_gamma;

/// Log Dirichlet-multinomial normalizer for one group of counts under a
/// symmetric prior: lnΓ(Kh) − lnΓ(n+Kh) + Σ_k [lnΓ(c_k+h) − lnΓ(h)].
/// Zero counts contribute nothing and are skipped.
pub fn log_dirichlet_multinomial<I>(counts: I, dim: usize, conc: f64) -> f64
where
    I: IntoIterator<Item = u32>,
{
    let ln_g = ln_gamma(conc);
    let mut total = 0u64;
    let mut acc = 0.0;
    for c in counts {
        if c > 0 {
            total += c as u64;
            acc += ln_gamma(c as f64 + conc) - ln_g;
        }
    }
    let k = dim as f64 * conc;
    acc + ln_gamma(k) - ln_gamma(total as f64 + k)
}

/// Indices of the `k` largest entries, probability descending, ties by index.
pub fn top_words(row: &[f64], k: usize) -> Vec<(usize, f64)> {
    let mut idx: Vec<usize> = (0..row.len()).collect();
    idx.sort_by(|&a, &b| row[b].total_cmp(&row[a]).then(a.cmp(&b)));
    idx.truncate(k.min(row.len()));
    idx.into_iter().map(|i| (i, row[i])).collect()
}

pub(crate) fn normalize(weights: &mut [f64]) {
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= total);
}
