//! Tree-structured Parzen Estimator over box-bounded continuous dimensions
//! with uniform priors, driven through an ask/tell interface.
//!
//! Suggestions are uniform until `n_startup` observations exist. After that
//! the log splits into a good set (the `min(ceil(0.25 sqrt(n)), 25)` lowest
//! losses) and a bad set; each dimension gets two Parzen mixtures of
//! truncated Gaussians (one component per observation plus one wide prior
//! component at the range midpoint), candidates are drawn from the good
//! mixture, and the candidate maximizing the summed log density ratio wins.
//! Dimensions are treated independently; the space here is flat, so the tree
//! structure degenerates to a product.

use crate::error::{Error, Result};
use crate::numerics::{normal_cdf, normal_quantile};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// A box-bounded continuous search domain.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SearchSpace {
    pub dims: Vec<SearchDim>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SearchDim {
    pub name: String,
    pub lower: f64,
    pub upper: f64,
}

impl SearchSpace {
    pub fn new(dims: Vec<(String, f64, f64)>) -> Result<SearchSpace> {
        for (name, lo, hi) in &dims {
            if !(lo < hi) {
                return Err(Error::Optimizer(format!(
                    "dimension `{name}`: lower {lo} must be < upper {hi}"
                )));
            }
        }
        Ok(SearchSpace {
            dims: dims
                .into_iter()
                .map(|(name, lower, upper)| SearchDim { name, lower, upper })
                .collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.dims.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dims.is_empty()
    }

    pub fn contains(&self, point: &[f64]) -> bool {
        point.len() == self.dims.len()
            && point
                .iter()
                .zip(&self.dims)
                .all(|(&x, d)| x >= d.lower && x <= d.upper)
    }
}

/// Optimizer hyperparameters.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct TpeConfig {
    /// Uniform samples before the model kicks in.
    pub n_startup: usize,
    /// Candidates drawn from the good mixture per suggestion.
    pub n_candidates: usize,
    pub seed: u64,
}

impl Default for TpeConfig {
    fn default() -> Self {
        TpeConfig {
            n_startup: 64,
            n_candidates: 24,
            seed: 0,
        }
    }
}

/// One evaluated point.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Observation {
    pub point: Vec<f64>,
    pub loss: f64,
}

/// Ask/tell TPE state for one trial.
#[derive(Debug, Clone)]
pub struct TpeOptimizer {
    space: SearchSpace,
    cfg: TpeConfig,
    log: Vec<Observation>,
    rng: ChaCha8Rng,
}

impl TpeOptimizer {
    pub fn new(space: SearchSpace, cfg: TpeConfig) -> TpeOptimizer {
        let rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        TpeOptimizer {
            space,
            cfg,
            log: Vec::new(),
            rng,
        }
    }

    pub fn space(&self) -> &SearchSpace {
        &self.space
    }

    pub fn observations(&self) -> &[Observation] {
        &self.log
    }

    /// Number of good observations at log size `n`.
    fn n_good(n: usize) -> usize {
        ((0.25 * (n as f64).sqrt()).ceil() as usize).min(25).max(1)
    }

    /// The next point to evaluate; always within bounds.
    pub fn suggest(&mut self) -> Vec<f64> {
        if self.log.len() < self.cfg.n_startup {
            return self
                .space
                .dims
                .iter()
                .map(|d| self.rng.gen_range(d.lower..d.upper))
                .collect();
        }

        let n = self.log.len();
        let n_good = Self::n_good(n);
        // Stable partition: lowest losses first, earliest on ties.
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| {
            self.log[a]
                .loss
                .partial_cmp(&self.log[b].loss)
                .unwrap()
                .then(a.cmp(&b))
        });
        let good: Vec<usize> = order[..n_good].to_vec();
        let bad: Vec<usize> = order[n_good..].to_vec();

        let mut candidates: Vec<Vec<f64>> =
            vec![Vec::with_capacity(self.space.len()); self.cfg.n_candidates];
        let mut scores = vec![0.0f64; self.cfg.n_candidates];

        for (di, dim) in self.space.dims.iter().enumerate() {
            let good_vals: Vec<f64> = good.iter().map(|&i| self.log[i].point[di]).collect();
            let bad_vals: Vec<f64> = bad.iter().map(|&i| self.log[i].point[di]).collect();
            let l = Mixture::build(&good_vals, dim.lower, dim.upper, n);
            let g = Mixture::build(&bad_vals, dim.lower, dim.upper, n);
            for c in 0..self.cfg.n_candidates {
                let x = l.sample(&mut self.rng);
                scores[c] += l.log_pdf(x) - g.log_pdf(x);
                candidates[c].push(x);
            }
        }

        let mut best = 0usize;
        for c in 1..self.cfg.n_candidates {
            if scores[c] > scores[best] {
                best = c;
            }
        }
        candidates.swap_remove(best)
    }

    /// Records an evaluation.
    pub fn observe(&mut self, point: Vec<f64>, loss: f64) -> Result<()> {
        if !loss.is_finite() {
            return Err(Error::Optimizer(format!("non-finite loss {loss}")));
        }
        if !self.space.contains(&point) {
            return Err(Error::Optimizer(format!("point {point:?} out of bounds")));
        }
        self.log.push(Observation { point, loss });
        Ok(())
    }

    /// The minimal-loss observation; the earliest wins ties.
    pub fn best(&self) -> Result<(&[f64], f64)> {
        let mut best: Option<&Observation> = None;
        for obs in &self.log {
            if best.map_or(true, |b| obs.loss < b.loss) {
                best = Some(obs);
            }
        }
        best.map(|o| (o.point.as_slice(), o.loss))
            .ok_or_else(|| Error::Optimizer("empty observation log".into()))
    }
}

/// A 1-D Parzen mixture of truncated Gaussians on [lo, hi]: one component
/// per observation plus the wide prior, all equally weighted. Observation
/// components are kept sorted by mean so density evaluation can window to
/// the components within six bandwidths of the query (the excluded tail
/// mass is below 1e-7 of the total).
struct Mixture {
    lo: f64,
    hi: f64,
    /// Observation components sorted by mean:
    /// (mean, sigma, log of weight / (sigma * sqrt(2 pi) * truncated mass)).
    components: Vec<(f64, f64, f64)>,
    prior: (f64, f64, f64),
    /// Query window half-width: 6 x the largest observation bandwidth.
    window: f64,
}

impl Mixture {
    /// `n_total` is the size of the whole observation log; the bandwidth
    /// clip is `[range / min(100, n_total), range]`.
    fn build(values: &[f64], lo: f64, hi: f64, n_total: usize) -> Mixture {
        let range = hi - lo;
        let mid = 0.5 * (lo + hi);
        let k = values.len() + 1;
        let min_bw = range / n_total.min(100).max(1) as f64;
        let log_weight = -(k as f64).ln();

        // Sorted means with the prior midpoint spliced in: each bandwidth is
        // the larger gap to the adjacent sorted neighbors, so singleton sets
        // stay finite via the prior's mean.
        let mut sorted: Vec<f64> = values.to_vec();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mid_pos = sorted.partition_point(|&x| x < mid);

        let neighbor = |i: usize| -> f64 {
            // Value at merged position i (observations with mid inserted).
            if i < mid_pos {
                sorted[i]
            } else if i == mid_pos {
                mid
            } else {
                sorted[i - 1]
            }
        };
        let merged_len = sorted.len() + 1;
        let mut components = Vec::with_capacity(sorted.len());
        let mut window = 0.0f64;
        for (i, &v) in sorted.iter().enumerate() {
            let pos = if i < mid_pos { i } else { i + 1 };
            let left = if pos > 0 { v - neighbor(pos - 1) } else { 0.0 };
            let right = if pos + 1 < merged_len {
                neighbor(pos + 1) - v
            } else {
                0.0
            };
            let bw = left.max(right).clamp(min_bw, range);
            window = window.max(bw);
            components.push(Self::component(v, bw, lo, hi, log_weight));
        }
        Mixture {
            lo,
            hi,
            components,
            prior: Self::component(mid, range, lo, hi, log_weight),
            window: 6.0 * window,
        }
    }

    fn component(mean: f64, sigma: f64, lo: f64, hi: f64, log_weight: f64) -> (f64, f64, f64) {
        let mass = normal_cdf((hi - mean) / sigma) - normal_cdf((lo - mean) / sigma);
        let log_norm =
            log_weight - (sigma * (2.0 * std::f64::consts::PI).sqrt() * mass.max(1e-300)).ln();
        (mean, sigma, log_norm)
    }

    fn log_pdf(&self, x: f64) -> f64 {
        let (p_mean, p_sigma, p_norm) = self.prior;
        let z = (x - p_mean) / p_sigma;
        let mut acc = (p_norm - 0.5 * z * z).exp();
        let lo_i = self.components.partition_point(|c| c.0 < x - self.window);
        let hi_i = self.components.partition_point(|c| c.0 <= x + self.window);
        for &(mean, sigma, log_norm) in &self.components[lo_i..hi_i] {
            let z = (x - mean) / sigma;
            acc += (log_norm - 0.5 * z * z).exp();
        }
        acc.max(1e-300).ln()
    }

    /// Draws from the mixture: uniform component choice, then truncated
    /// normal sampling by rejection with an inverse-CDF fallback after 100
    /// rejections.
    fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        let idx = rng.gen_range(0..self.components.len() + 1);
        let (mean, sigma, _) = if idx == self.components.len() {
            self.prior
        } else {
            self.components[idx]
        };
        for _ in 0..100 {
            let u1: f64 = rng.gen::<f64>().max(1e-300);
            let u2: f64 = rng.gen();
            let z = (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos();
            let x = mean + sigma * z;
            if x >= self.lo && x <= self.hi {
                return x;
            }
        }
        let a = normal_cdf((self.lo - mean) / sigma);
        let b = normal_cdf((self.hi - mean) / sigma);
        let u = (a + rng.gen::<f64>() * (b - a)).clamp(1e-15, 1.0 - 1e-15);
        (mean + sigma * normal_quantile(u)).clamp(self.lo, self.hi)
    }
}

/// Simple benchmark harness shared by the CLI and the acceptance suite:
/// minimizes the sphere function with TPE and with pure random search and
/// reports the best loss per seed.
pub mod bench {
    use super::*;

    pub fn sphere(xs: &[f64]) -> f64 {
        xs.iter().map(|x| x * x).sum()
    }

    /// Best sphere loss reached by TPE with `evals` evaluations.
    pub fn tpe_best(dim: usize, evals: usize, seed: u64) -> f64 {
        let space = SearchSpace::new(
            (0..dim)
                .map(|i| (format!("x{i}"), -5.0, 5.0))
                .collect(),
        )
        .unwrap();
        let mut opt = TpeOptimizer::new(space, TpeConfig { seed, ..TpeConfig::default() });
        for _ in 0..evals {
            let p = opt.suggest();
            let loss = sphere(&p);
            opt.observe(p, loss).unwrap();
        }
        opt.best().unwrap().1
    }

    /// Best sphere loss reached by uniform random search.
    pub fn random_best(dim: usize, evals: usize, seed: u64) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut best = f64::INFINITY;
        for _ in 0..evals {
            let p: Vec<f64> = (0..dim).map(|_| rng.gen_range(-5.0..5.0)).collect();
            best = best.min(sphere(&p));
        }
        best
    }

    pub fn median(mut xs: Vec<f64>) -> f64 {
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let n = xs.len();
        if n % 2 == 1 {
            xs[n / 2]
        } else {
            0.5 * (xs[n / 2 - 1] + xs[n / 2])
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn space_1d() -> SearchSpace {
        SearchSpace::new(vec![("x".into(), -5.0, 5.0)]).unwrap()
    }

    #[test]
    fn empty_log_suggestion_is_uniform_and_deterministic() {
        let cfg = TpeConfig { seed: 7, ..TpeConfig::default() };
        let a = TpeOptimizer::new(space_1d(), cfg).suggest();
        let b = TpeOptimizer::new(space_1d(), cfg).suggest();
        assert_eq!(a, b);
        assert!(a[0] >= -5.0 && a[0] <= 5.0);
    }

    #[test]
    fn equal_losses_still_yield_in_bounds_suggestions() {
        let cfg = TpeConfig { n_startup: 4, seed: 3, ..TpeConfig::default() };
        let mut opt = TpeOptimizer::new(space_1d(), cfg);
        for i in 0..40 {
            let p = vec![-5.0 + 10.0 * (i as f64 / 39.0)];
            opt.observe(p, 1.0).unwrap();
        }
        for _ in 0..20 {
            let s = opt.suggest();
            assert!(s[0].is_finite() && (-5.0..=5.0).contains(&s[0]));
        }
    }

    #[test]
    fn observe_validates_inputs() {
        let mut opt = TpeOptimizer::new(space_1d(), TpeConfig::default());
        assert!(opt.observe(vec![0.0], f64::NAN).is_err());
        assert!(opt.observe(vec![9.0], 1.0).is_err());
        opt.observe(vec![1.0], 0.5).unwrap();
        opt.observe(vec![1.0], 0.7).unwrap(); // duplicates accepted
        assert_eq!(opt.observations().len(), 2);
    }

    #[test]
    fn best_breaks_ties_toward_earliest() {
        let mut opt = TpeOptimizer::new(space_1d(), TpeConfig::default());
        opt.observe(vec![0.0], 3.0).unwrap();
        opt.observe(vec![1.0], 1.0).unwrap();
        opt.observe(vec![2.0], 1.0).unwrap();
        let (p, loss) = opt.best().unwrap();
        assert_eq!(loss, 1.0);
        assert_eq!(p, &[1.0]);
    }

    #[test]
    fn best_matches_linear_scan_oracle() {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut opt = TpeOptimizer::new(space_1d(), TpeConfig::default());
        let mut oracle: Vec<f64> = Vec::new();
        for _ in 0..1000 {
            let x: f64 = rng.gen_range(-5.0..5.0);
            let loss: f64 = rng.gen_range(0.0..10.0);
            opt.observe(vec![x], loss).unwrap();
            oracle.push(loss);
        }
        let scan = oracle.iter().cloned().fold(f64::INFINITY, f64::min);
        assert_eq!(opt.best().unwrap().1, scan);
    }

    #[test]
    fn empty_best_is_an_error() {
        assert!(TpeOptimizer::new(space_1d(), TpeConfig::default()).best().is_err());
    }

    #[test]
    fn quadratic_concentrates_near_optimum() {
        let cfg = TpeConfig { seed: 5, ..TpeConfig::default() };
        let mut opt = TpeOptimizer::new(space_1d(), cfg);
        for _ in 0..300 {
            let p = opt.suggest();
            let loss = (p[0] - 1.0) * (p[0] - 1.0);
            opt.observe(p, loss).unwrap();
        }
        let mut errs = Vec::new();
        for _ in 0..50 {
            let p = opt.suggest();
            errs.push((p[0] - 1.0).abs());
            let loss = (p[0] - 1.0) * (p[0] - 1.0);
            opt.observe(p, loss).unwrap();
        }
        let med = bench::median(errs);
        assert!(med < 1.0, "median |suggestion - 1| = {med}");
    }

    #[test]
    fn identical_seeds_reproduce_suggestions_exactly() {
        let cfg = TpeConfig { n_startup: 8, seed: 42, ..TpeConfig::default() };
        let run = || {
            let mut opt = TpeOptimizer::new(space_1d(), cfg);
            let mut out = Vec::new();
            for i in 0..40 {
                let p = opt.suggest();
                out.push(p.clone());
                opt.observe(p, (i as f64 * 0.37).sin().abs()).unwrap();
            }
            out
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn parzen_densities_integrate_to_one() {
        use crate::numerics::simpson;
        let values = vec![-4.0, -1.0, -0.5, 0.0, 2.0, 2.0, 4.9];
        let m = Mixture::build(&values, -5.0, 5.0, 200);
        let integral = simpson(|x| m.log_pdf(x).exp(), -5.0, 5.0, 4000);
        assert!((integral - 1.0).abs() < 1e-3, "integral {integral}");

        let empty = Mixture::build(&[], -5.0, 5.0, 200);
        let integral = simpson(|x| empty.log_pdf(x).exp(), -5.0, 5.0, 4000);
        assert!((integral - 1.0).abs() < 1e-3, "prior-only integral {integral}");
    }

    #[test]
    fn sphere_benchmark_beats_random() {
        // Smaller than the acceptance run: 3 seeds as a smoke check.
        let tpe: Vec<f64> = (0..3).map(|s| bench::tpe_best(6, 300, s)).collect();
        let rnd: Vec<f64> = (0..3).map(|s| bench::random_best(6, 300, s)).collect();
        assert!(
            bench::median(tpe.clone()) <= 0.5 * bench::median(rnd.clone()),
            "tpe {tpe:?} vs random {rnd:?}"
        );
    }
}
