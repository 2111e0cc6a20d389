//! Triple-sum kernels shared by the beta and verification modules.
//!
//! Deterministic sums are split into one partial per outer index and reduced
//! in index order, so serial and parallel runs agree bit for bit. Monte Carlo
//! sums draw from per-chunk ChaCha streams derived from `(seed, stream, chunk)`
//! and merge chunk statistics in chunk order for the same reason.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::metric::DistanceMatrix;

pub const DEFAULT_TRIPLE_CAP: u64 = 20_000_000;
pub const DEFAULT_MC_SAMPLES: u64 = 1_000_000;
const MC_CHUNK: u64 = 1 << 16;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    #[default]
    Det,
    Mc,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimatorSettings {
    pub mode: Mode,
    /// Unordered triple count above which a deterministic request falls back
    /// to Monte Carlo.
    pub triple_cap: u64,
    pub mc_samples: u64,
    pub seed: u64,
    pub parallel: bool,
}

impl Default for EstimatorSettings {
    fn default() -> Self {
        EstimatorSettings {
            mode: Mode::Det,
            triple_cap: DEFAULT_TRIPLE_CAP,
            mc_samples: DEFAULT_MC_SAMPLES,
            seed: 0,
            parallel: true,
        }
    }
}

impl EstimatorSettings {
    pub fn monte_carlo(samples: u64, seed: u64) -> Self {
        EstimatorSettings {
            mode: Mode::Mc,
            mc_samples: samples,
            seed,
            ..Default::default()
        }
    }

    pub fn serial(mut self) -> Self {
        self.parallel = false;
        self
    }
}

/// Value of a triple sum together with how it was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TripleEstimate {
    pub value: f64,
    /// Zero for deterministic sums.
    pub std_error: f64,
    /// Triples evaluated: unordered count (det) or draws (mc).
    pub evaluated: u64,
    pub mode: Mode,
}

impl TripleEstimate {
    pub fn zero() -> Self {
        TripleEstimate {
            value: 0.0,
            std_error: 0.0,
            evaluated: 0,
            mode: Mode::Det,
        }
    }

    pub fn scaled(self, factor: f64) -> Self {
        TripleEstimate {
            value: self.value * factor,
            std_error: self.std_error * factor.abs(),
            ..self
        }
    }
}

pub fn unordered_triples(n: usize) -> u64 {
    let n = n as u64;
    if n < 3 {
        0
    } else {
        n * (n - 1) * (n - 2) / 6
    }
}

fn partials<F>(n: usize, parallel: bool, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    let parts: Vec<f64> = if parallel {
        (0..n).into_par_iter().map(&f).collect()
    } else {
        (0..n).map(&f).collect()
    };
    parts.iter().sum()
}

/// `sum_{a<b<c} f(d_ab, d_bc, d_ac) w_a w_b w_c` over local positions of `idx`.
/// `idx` indexes rows of `dm` and entries of `w`.
pub fn index_ordered_sum<F>(dm: &DistanceMatrix, idx: &[usize], w: &[f64], parallel: bool, f: F) -> f64
where
    F: Fn(f64, f64, f64) -> f64 + Sync + Send,
{
    let n = idx.len();
    partials(n, parallel, |a| {
        let ia = idx[a];
        let row_a = dm.row(ia);
        let wa = w[ia];
        let mut acc = 0.0;
        for b in (a + 1)..n {
            let ib = idx[b];
            let row_b = dm.row(ib);
            let dab = row_a[ib];
            let wab = wa * w[ib];
            let mut inner = 0.0;
            for &ic in &idx[b + 1..] {
                inner += f(dab, row_b[ic], row_a[ic]) * w[ic];
            }
            acc += inner * wab;
        }
        acc
    })
}

/// Sum of a symmetric integrand over all ordered triples of distinct points:
/// six times the index-ordered sum.
pub fn symmetric_sum<F>(dm: &DistanceMatrix, idx: &[usize], w: &[f64], parallel: bool, f: F) -> f64
where
    F: Fn(f64, f64, f64) -> f64 + Sync + Send,
{
    6.0 * index_ordered_sum(dm, idx, w, parallel, f)
}

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

#[derive(Clone, Copy, Default)]
struct Welford {
    count: u64,
    mean: f64,
    m2: f64,
}

impl Welford {
    fn push(&mut self, x: f64) {
        self.count += 1;
        let d = x - self.mean;
        self.mean += d / self.count as f64;
        self.m2 += d * (x - self.mean);
    }

    fn merge(self, o: Welford) -> Welford {
        if o.count == 0 {
            return self;
        }
        if self.count == 0 {
            return o;
        }
        let n = self.count + o.count;
        let d = o.mean - self.mean;
        Welford {
            count: n,
            mean: self.mean + d * o.count as f64 / n as f64,
            m2: self.m2 + o.m2 + d * d * self.count as f64 * o.count as f64 / n as f64,
        }
    }
}

/// Unbiased Monte Carlo estimate of [`symmetric_sum`]: triples drawn uniformly
/// with replacement from `idx^3`; draws with a repeated index contribute zero.
pub fn symmetric_sum_mc<F>(
    dm: &DistanceMatrix,
    idx: &[usize],
    w: &[f64],
    samples: u64,
    seed: u64,
    stream: u64,
    parallel: bool,
    f: F,
) -> TripleEstimate
where
    F: Fn(f64, f64, f64) -> f64 + Sync + Send,
{
    let n = idx.len();
    if n < 3 || samples == 0 {
        return TripleEstimate {
            mode: Mode::Mc,
            ..TripleEstimate::zero()
        };
    }
    let chunks = samples.div_ceil(MC_CHUNK);
    let base = splitmix(seed ^ splitmix(stream));
    let run = |chunk: u64| {
        let mut rng = ChaCha8Rng::seed_from_u64(splitmix(base ^ chunk));
        let count = MC_CHUNK.min(samples - chunk * MC_CHUNK);
        let mut acc = Welford::default();
        for _ in 0..count {
            let (a, b, c) = (rng.gen_range(0..n), rng.gen_range(0..n), rng.gen_range(0..n));
            let x = if a == b || b == c || a == c {
                0.0
            } else {
                let (ia, ib, ic) = (idx[a], idx[b], idx[c]);
                f(dm.get(ia, ib), dm.get(ib, ic), dm.get(ia, ic)) * w[ia] * w[ib] * w[ic]
            };
            acc.push(x);
        }
        acc
    };
    let stats: Vec<Welford> = if parallel {
        (0..chunks).into_par_iter().map(run).collect()
    } else {
        (0..chunks).map(run).collect()
    };
    let total = stats.into_iter().fold(Welford::default(), Welford::merge);
    let volume = (n as f64).powi(3);
    let var = if total.count > 1 {
        total.m2 / (total.count - 1) as f64
    } else {
        0.0
    };
    TripleEstimate {
        value: volume * total.mean,
        std_error: volume * (var / total.count as f64).sqrt(),
        evaluated: total.count,
        mode: Mode::Mc,
    }
}

/// Deterministic when requested and within the cap, Monte Carlo otherwise.
pub fn estimate_symmetric<F>(
    dm: &DistanceMatrix,
    idx: &[usize],
    w: &[f64],
    settings: &EstimatorSettings,
    stream: u64,
    f: F,
) -> TripleEstimate
where
    F: Fn(f64, f64, f64) -> f64 + Sync + Send,
{
    let count = unordered_triples(idx.len());
    if settings.mode == Mode::Det && count <= settings.triple_cap {
        TripleEstimate {
            value: symmetric_sum(dm, idx, w, settings.parallel, f),
            std_error: 0.0,
            evaluated: count,
            mode: Mode::Det,
        }
    } else {
        symmetric_sum_mc(
            dm,
            idx,
            w,
            settings.mc_samples,
            settings.seed,
            stream,
            settings.parallel,
            f,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{EuclideanCloud, MetricSpace};

    fn random_space(n: usize) -> (DistanceMatrix, Vec<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let pts = (0..n).map(|_| vec![rng.gen::<f64>(), rng.gen::<f64>()]).collect();
        let s: MetricSpace = EuclideanCloud::new(pts).unwrap().into();
        let w = (0..n).map(|_| rng.gen::<f64>()).collect();
        (s.full_distance_matrix(), w)
    }

    #[test]
    fn matches_brute_force_over_ordered_triples() {
        let (dm, w) = random_space(12);
        let idx: Vec<usize> = (0..12).collect();
        let f = |a: f64, b: f64, c: f64| a + 2.0 * b * c;
        let sym = |a: f64, b: f64, c: f64| a.max(b).max(c);
        let mut brute = 0.0;
        let mut brute_ordered = 0.0;
        for i in 0..12 {
            for j in 0..12 {
                for k in 0..12 {
                    if i == j || j == k || i == k {
                        continue;
                    }
                    let t = w[i] * w[j] * w[k];
                    brute += sym(dm.get(i, j), dm.get(j, k), dm.get(i, k)) * t;
                    if i < j && j < k {
                        brute_ordered += f(dm.get(i, j), dm.get(j, k), dm.get(i, k)) * t;
                    }
                }
            }
        }
        assert!((symmetric_sum(&dm, &idx, &w, true, sym) - brute).abs() < 1e-12 * brute);
        let got = index_ordered_sum(&dm, &idx, &w, false, f);
        assert!((got - brute_ordered).abs() < 1e-12 * brute_ordered);
    }

    #[test]
    fn serial_and_parallel_are_bit_identical() {
        let (dm, w) = random_space(80);
        let idx: Vec<usize> = (0..80).collect();
        let f = |a: f64, b: f64, c: f64| (a + b + c).sqrt();
        let p = symmetric_sum(&dm, &idx, &w, true, f);
        let s = symmetric_sum(&dm, &idx, &w, false, f);
        assert_eq!(p.to_bits(), s.to_bits());
        let mp = symmetric_sum_mc(&dm, &idx, &w, 200_000, 3, 1, true, f);
        let ms = symmetric_sum_mc(&dm, &idx, &w, 200_000, 3, 1, false, f);
        assert_eq!(mp, ms);
    }

    #[test]
    fn monte_carlo_is_consistent() {
        let (dm, w) = random_space(40);
        let idx: Vec<usize> = (0..40).collect();
        let f = |a: f64, b: f64, c: f64| a * b + c;
        let exact = symmetric_sum(&dm, &idx, &w, true, f);
        let mc = symmetric_sum_mc(&dm, &idx, &w, 500_000, 11, 0, true, f);
        assert!((mc.value - exact).abs() < 4.0 * mc.std_error, "{mc:?} vs {exact}");
    }

    #[test]
    fn cap_forces_monte_carlo() {
        let (dm, w) = random_space(30);
        let idx: Vec<usize> = (0..30).collect();
        let settings = EstimatorSettings {
            triple_cap: 100,
            mc_samples: 1000,
            ..Default::default()
        };
        let e = estimate_symmetric(&dm, &idx, &w, &settings, 0, |a, _, _| a);
        assert_eq!(e.mode, Mode::Mc);
        assert_eq!(e.evaluated, 1000);
        assert_eq!(unordered_triples(30), 4060);
        assert_eq!(unordered_triples(2), 0);
    }
}
