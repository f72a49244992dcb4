//! Sampling oracle for the trace of `A = a₁ v`, `B = b` words.
//!
//! `a₁` is drawn as an independent Haar unitary on each pair block
//! `span{e_k, e_{k+3n}} ⊗ ℂ^N`, the commutant of `B₀ ⊗ 1`, and the matrices
//! `v`, `b` act as `v ⊗ 1_N`, `b ⊗ 1_N`. A single such unitary averages
//! `x` to `E_{B₀}(x)`, so words where each `a₁^{±1}` appears once are exact
//! in expectation for any `N`; longer words approach the free value as the
//! block size grows. The trace of each sample is estimated with a Gaussian
//! probe vector, which keeps every sample at vector cost.

use nalgebra::{DMatrix, DVector};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::approx::{root_of_unity, ApproxRep};
use crate::linalg::C64;
use crate::random::{complex_normal, derive_seed, random_unitary, seeded};
use crate::words::{GroupWord, Syllable};

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct McConfig {
    pub samples: usize,
    /// Multiplicity `N` of each pair block.
    pub amplification: usize,
    pub seed: u64,
}

impl Default for McConfig {
    fn default() -> Self {
        McConfig { samples: 400, amplification: 8, seed: 0 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean_re: f64,
    pub mean_im: f64,
    /// Standard error of the complex mean, `sqrt((var_re + var_im) / S)`.
    pub std_err: f64,
    pub samples: usize,
}

impl McEstimate {
    pub fn mean(&self) -> C64 {
        C64::new(self.mean_re, self.mean_im)
    }

    pub fn within(&self, exact: C64, sigmas: f64) -> bool {
        (self.mean() - exact).norm() <= sigmas * self.std_err
    }
}

enum Op {
    V,
    VStar,
    A1,
    A1Star,
    B(i64),
}

struct Model<'a> {
    sigma: &'a [usize],
    dim: usize,
    big_n: usize,
}

impl Model<'_> {
    fn idx(&self, i: usize, s: usize) -> usize {
        i * self.big_n + s
    }

    fn apply(&self, op: &Op, x: &DVector<C64>, blocks: &[DMatrix<C64>]) -> DVector<C64> {
        let nn = self.big_n;
        let mut y = DVector::zeros(x.len());
        match op {
            // (v x)_i = x_{σ(i)}
            Op::V => {
                for i in 0..self.dim {
                    for s in 0..nn {
                        y[self.idx(i, s)] = x[self.idx(self.sigma[i], s)];
                    }
                }
            }
            Op::VStar => {
                for i in 0..self.dim {
                    for s in 0..nn {
                        y[self.idx(self.sigma[i], s)] = x[self.idx(i, s)];
                    }
                }
            }
            Op::B(beta) => {
                for i in 0..self.dim {
                    let w = root_of_unity(*beta as i128 * i as i128, self.dim);
                    for s in 0..nn {
                        y[self.idx(i, s)] = x[self.idx(i, s)] * w;
                    }
                }
            }
            Op::A1 | Op::A1Star => {
                let h = self.dim / 2;
                for (k, u) in blocks.iter().enumerate() {
                    let gather: Vec<usize> = (0..nn).map(|s| self.idx(k, s)).chain((0..nn).map(|s| self.idx(k + h, s))).collect();
                    let local = DVector::from_iterator(2 * nn, gather.iter().map(|&g| x[g]));
                    let out = if matches!(op, Op::A1) { u * local } else { u.adjoint() * local };
                    for (j, &g) in gather.iter().enumerate() {
                        y[g] = out[j];
                    }
                }
            }
        }
        y
    }
}

/// Operators of `w` in application order (rightmost first).
fn ops(w: &GroupWord, dim: usize) -> Vec<Op> {
    let mut out = Vec::new();
    for s in w.syllables().iter().rev() {
        match s {
            Syllable::A(alpha) => {
                for _ in 0..alpha.unsigned_abs() {
                    if *alpha > 0 {
                        out.push(Op::V);
                        out.push(Op::A1);
                    } else {
                        out.push(Op::A1Star);
                        out.push(Op::VStar);
                    }
                }
            }
            Syllable::B(beta) => {
                let r = beta.mod_floor(&BigInt::from(dim)).to_i64().expect("reduced exponent fits");
                out.push(Op::B(r));
            }
        }
    }
    out
}

fn one_sample(model: &Model, ops: &[Op], seed: u64) -> C64 {
    let mut rng = seeded(seed);
    let block = 2 * model.big_n;
    let blocks: Vec<DMatrix<C64>> =
        (0..model.dim / 2).map(|_| random_unitary(&mut rng, block).into_matrix().into_inner()).collect();
    let total = model.dim * model.big_n;
    let xi = DVector::from_iterator(total, (0..total).map(|_| complex_normal(&mut rng)));
    let mut y = xi.clone();
    for op in ops {
        y = model.apply(op, &y, &blocks);
    }
    xi.dotc(&y) / total as f64
}

/// Sample mean and standard error of `τ(W)` over the block-Haar model.
pub fn monte_carlo_tau(w: &GroupWord, rep: &ApproxRep, cfg: &McConfig) -> McEstimate {
    assert!(cfg.samples >= 2 && cfg.amplification >= 1);
    let model = Model { sigma: rep.sigma(), dim: rep.dim(), big_n: cfg.amplification };
    let ops = ops(w, rep.dim());
    let run = |s: usize| one_sample(&model, &ops, derive_seed(cfg.seed, s as u64));
    #[cfg(feature = "parallel")]
    let values: Vec<C64> = {
        use rayon::prelude::*;
        (0..cfg.samples).into_par_iter().map(run).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let values: Vec<C64> = (0..cfg.samples).map(run).collect();

    let s = values.len() as f64;
    let mean = values.iter().sum::<C64>() / s;
    let var = values.iter().map(|v| (v - mean).norm_sqr()).sum::<f64>() / (s - 1.0);
    McEstimate { mean_re: mean.re, mean_im: mean.im, std_err: (var / s).sqrt(), samples: values.len() }
}
