//! Marginal welfare of one block, averaged over which later blocks agree.
//!
//! Both the exact and the sampled path split their work into a fixed number of
//! chunks that depends only on the problem, never on the worker count, and
//! combine chunk results in chunk order. Output bits are therefore the same
//! for any `workers`.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model::GroupingStructure;
use crate::welfare::WelfareFn;

/// Neumaier-compensated sum.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct Compensated {
    sum: f64,
    carry: f64,
}

impl Compensated {
    pub(crate) fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.carry += (self.sum - t) + v;
        } else {
            self.carry += (v - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn total(&self) -> f64 {
        self.sum + self.carry
    }
}

/// Mean and spread of a set of samples, mergeable across chunks.
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    count: f64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, v: f64) {
        self.count += 1.0;
        let d = v - self.mean;
        self.mean += d / self.count;
        self.m2 += d * (v - self.mean);
    }

    fn merge(&mut self, other: &Moments) {
        if other.count == 0.0 {
            return;
        }
        let n = self.count + other.count;
        let d = other.mean - self.mean;
        self.mean += d * other.count / n;
        self.m2 += other.m2 + d * d * self.count * other.count / n;
        self.count = n;
    }
}

/// Estimate of a block's averaged marginal welfare.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarginalEstimate {
    pub mean: f64,
    /// Standard error of `mean`; `None` when it was enumerated exactly.
    pub stderr: Option<f64>,
}

/// Runs `job(chunk)` for every chunk on up to `workers` threads and returns
/// results in chunk order.
pub(crate) fn run_chunks<T: Send>(chunks: usize, workers: usize, job: impl Fn(usize) -> T + Sync) -> Vec<T> {
    let workers = workers.max(1).min(chunks.max(1));
    if workers == 1 {
        return (0..chunks).map(&job).collect();
    }
    let mut slots: Vec<Option<T>> = (0..chunks).map(|_| None).collect();
    std::thread::scope(|scope| {
        let job = &job;
        let handles: Vec<_> = (0..workers)
            .map(|w| scope.spawn(move || (w..chunks).step_by(workers).map(|c| (c, job(c))).collect::<Vec<_>>()))
            .collect();
        for h in handles {
            for (c, v) in h.join().expect("worker thread panicked") {
                slots[c] = Some(v);
            }
        }
    });
    slots.into_iter().map(|s| s.expect("every chunk ran")).collect()
}

/// Shared setup: a profile with earlier blocks at `x*` and the positions of
/// block `k` and of the later blocks.
struct Context<'a> {
    x_star: &'a [f64],
    base: Vec<f64>,
    own: &'a [usize],
    later: &'a [Vec<usize>],
}

impl<'a> Context<'a> {
    fn new(x_star: &'a [f64], grouping: &'a GroupingStructure, k: usize) -> Self {
        let blocks = grouping.blocks();
        let mut base = vec![0.0; x_star.len()];
        for b in &blocks[..k] {
            for &i in b {
                base[i] = x_star[i];
            }
        }
        Context { x_star, base, own: &blocks[k], later: &blocks[k + 1..] }
    }

    fn set_later(&self, x: &mut [f64], j: usize, on: bool) {
        for &i in &self.later[j] {
            x[i] = if on { self.x_star[i] } else { 0.0 };
        }
    }

    /// `Psi(.., block k at x*, ..) - Psi(.., block k at 0, ..)` for the current `x`.
    fn delta<W: WelfareFn + ?Sized>(&self, w: &W, x: &mut [f64]) -> f64 {
        for &i in self.own {
            x[i] = self.x_star[i];
        }
        let with = w.value(x);
        for &i in self.own {
            x[i] = 0.0;
        }
        with - w.value(x)
    }
}

fn gray(i: u64) -> u64 {
    i ^ (i >> 1)
}

/// Number of exact-enumeration chunks for `m` later blocks; a function of `m` only.
fn exact_chunks(m: usize) -> usize {
    1usize << m.min(8)
}

/// Average of the marginal welfare of block `k` over all `2^m` agree/disagree
/// patterns of the `m` blocks after it, enumerated in Gray-code order.
pub(crate) fn exact<W: WelfareFn + ?Sized>(
    w: &W,
    x_star: &[f64],
    grouping: &GroupingStructure,
    k: usize,
    workers: usize,
) -> f64 {
    let ctx = Context::new(x_star, grouping, k);
    let m = ctx.later.len();
    let total = 1u64 << m;
    let chunks = exact_chunks(m);
    let per = total / chunks as u64;
    let sums = run_chunks(chunks, workers, |c| {
        let start = c as u64 * per;
        let mut x = ctx.base.clone();
        let mut code = gray(start);
        for j in 0..m {
            ctx.set_later(&mut x, j, code >> j & 1 == 1);
        }
        let mut acc = Compensated::default();
        acc.add(ctx.delta(w, &mut x));
        for i in start + 1..start + per {
            let next = gray(i);
            let j = (next ^ code).trailing_zeros() as usize;
            ctx.set_later(&mut x, j, next >> j & 1 == 1);
            code = next;
            acc.add(ctx.delta(w, &mut x));
        }
        acc.total()
    });
    let mut acc = Compensated::default();
    for s in sums {
        acc.add(s);
    }
    acc.total() / total as f64
}

/// Samples per Monte Carlo chunk.
const MC_CHUNK: usize = 4096;

/// Unbiased estimate with i.i.d. fair-coin agreement of later blocks.
///
/// Chunk `c` of block `k` draws from its own ChaCha stream `(k << 32) | c`.
pub(crate) fn sampled<W: WelfareFn + ?Sized>(
    w: &W,
    x_star: &[f64],
    grouping: &GroupingStructure,
    k: usize,
    samples: usize,
    seed: u64,
    workers: usize,
) -> MarginalEstimate {
    let ctx = Context::new(x_star, grouping, k);
    let m = ctx.later.len();
    let chunks = samples.div_ceil(MC_CHUNK);
    let parts = run_chunks(chunks, workers, |c| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(((k as u64) << 32) | c as u64);
        let count = MC_CHUNK.min(samples - c * MC_CHUNK);
        let mut x = ctx.base.clone();
        let mut mom = Moments::default();
        let mut bits = 0u64;
        for _ in 0..count {
            for j in 0..m {
                if j % 64 == 0 {
                    bits = rng.next_u64();
                }
                ctx.set_later(&mut x, j, bits >> (j % 64) & 1 == 1);
            }
            mom.push(ctx.delta(w, &mut x));
        }
        mom
    });
    let mut all = Moments::default();
    for p in &parts {
        all.merge(p);
    }
    let var = if all.count > 1.0 { all.m2 / (all.count - 1.0) } else { 0.0 };
    MarginalEstimate { mean: all.mean, stderr: Some((var / all.count).sqrt()) }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::welfare::SymmetricTableWelfare;

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let mut acc = Compensated::default();
        acc.add(1e16);
        for _ in 0..10 {
            acc.add(1.0);
        }
        acc.add(-1e16);
        assert_eq!(acc.total(), 10.0);
    }

    #[test]
    fn merged_moments_match_single_pass() {
        let data: Vec<f64> = (0..1000).map(|i| ((i * 37) % 101) as f64 * 0.3).collect();
        let mut one = Moments::default();
        data.iter().for_each(|&v| one.push(v));
        let mut merged = Moments::default();
        for chunk in data.chunks(64) {
            let mut part = Moments::default();
            chunk.iter().for_each(|&v| part.push(v));
            merged.merge(&part);
        }
        assert!((one.mean - merged.mean).abs() < 1e-12);
        assert!((one.m2 - merged.m2).abs() < 1e-8 * one.m2);
    }

    #[test]
    fn gray_walk_visits_every_pattern_once() {
        let m = 10;
        let mut seen = vec![false; 1 << m];
        for i in 0..1u64 << m {
            let g = gray(i) as usize;
            assert!(!seen[g]);
            seen[g] = true;
            if i > 0 {
                assert_eq!((gray(i) ^ gray(i - 1)).count_ones(), 1);
            }
        }
    }

    #[test]
    fn exact_result_ignores_worker_count() {
        let n = 14;
        let psi: Vec<f64> = (0..=n).map(|k| (k as f64).sqrt() * 3.0 + 0.01 * k as f64).collect();
        let w = SymmetricTableWelfare::new(n, psi);
        let g = GroupingStructure::singletons(n);
        let x = vec![1.0; n];
        let one = exact(&w, &x, &g, 0, 1);
        for workers in [2, 3, 8] {
            assert_eq!(exact(&w, &x, &g, 0, workers).to_bits(), one.to_bits());
        }
        let a = sampled(&w, &x, &g, 0, 20_000, 9, 1);
        let b = sampled(&w, &x, &g, 0, 20_000, 9, 5);
        assert_eq!(a, b);
    }
}
