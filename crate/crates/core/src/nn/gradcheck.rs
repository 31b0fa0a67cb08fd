//! Finite-difference gradient checking.

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// A scalar function of a flat parameter vector with an analytic gradient.
pub trait Differentiable {
    fn value(&self, params: &[f64]) -> f64;
    fn gradient(&self, params: &[f64]) -> Vec<f64>;
}

/// Adapts a pair of closures to [`Differentiable`].
pub struct FnFragment<F, G> {
    pub value: F,
    pub gradient: G,
}

impl<F, G> Differentiable for FnFragment<F, G>
where
    F: Fn(&[f64]) -> f64,
    G: Fn(&[f64]) -> Vec<f64>,
{
    fn value(&self, params: &[f64]) -> f64 {
        (self.value)(params)
    }

    fn gradient(&self, params: &[f64]) -> Vec<f64> {
        (self.gradient)(params)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradCheckOptions {
    pub eps: f64,
    /// Upper bound on checked coordinates; larger vectors are sampled.
    pub max_coords: usize,
    pub seed: u64,
}

impl Default for GradCheckOptions {
    fn default() -> Self {
        GradCheckOptions { eps: 1e-5, max_coords: 200, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradCheckReport {
    pub checked: Vec<usize>,
    pub max_rel_error: f64,
    pub worst_coord: Option<usize>,
}

/// `|a − n| / max(1e-8, |a| + |n|)`.
pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / (analytic.abs() + numeric.abs()).max(1e-8)
}

/// Compares the analytic gradient with central differences at `params`.
pub fn grad_check(f: &dyn Differentiable, params: &[f64], opts: GradCheckOptions) -> GradCheckReport {
    let analytic = f.gradient(params);
    let n = params.len();
    let checked: Vec<usize> = if n <= opts.max_coords {
        (0..n).collect()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        let mut idx = sample(&mut rng, n, opts.max_coords).into_vec();
        idx.sort_unstable();
        idx
    };
    let mut probe = params.to_vec();
    let mut max_rel_error = 0.0;
    let mut worst_coord = None;
    for &i in &checked {
        let orig = probe[i];
        probe[i] = orig + opts.eps;
        let plus = f.value(&probe);
        probe[i] = orig - opts.eps;
        let minus = f.value(&probe);
        probe[i] = orig;
        let numeric = (plus - minus) / (2.0 * opts.eps);
        let err = relative_error(analytic[i], numeric);
        if err > max_rel_error || worst_coord.is_none() {
            max_rel_error = err;
            worst_coord = Some(i);
        }
    }
    GradCheckReport { checked, max_rel_error, worst_coord }
}
