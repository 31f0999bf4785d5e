//! Samplers for (approximately or exactly) uniform doubly stochastic
//! matrices and the comparison models they are tested against.
//!
//! The workhorse is a Gibbs chain on 2x2 blocks: pick two distinct rows and
//! two distinct columns, and resample their intersection uniformly among the
//! nonnegative 2x2 matrices with the same row and column sums. For n = 2 one
//! move already gives exact uniformity; for larger n the chain is validated
//! against an exact rejection sampler at n <= 4.

use crate::batch::{SampleBatch, SamplerId};
use crate::error::{Error, Result};
use crate::matrix::{check_doubly_stochastic, SquareMatrix};
use crate::rng::seeded_stream;
use crate::sinkhorn::sinkhorn_repair;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Chain parameters. Burn-in and spacing are counted in block moves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GibbsConfig {
    pub n: usize,
    pub burn_in: u64,
    pub spacing: u64,
    pub repair_period: u64,
}

impl GibbsConfig {
    /// Defaults: burn_in = 10 n^2 ceil(ln n) moves, spacing = n^2 moves,
    /// repair every 10 n^2 moves. Each move touches 4 of the n^2 entries,
    /// so n^2 moves is one effective sweep. Validated against the exact
    /// rejection sampler at n = 3, 4.
    pub fn defaults(n: usize) -> Self {
        assert!(n >= 1);
        let n2 = (n * n) as u64;
        let log_ceil = ((n as f64).ln().ceil() as u64).max(1);
        Self {
            n,
            burn_in: 10 * n2 * log_ceil,
            spacing: n2,
            repair_period: 10 * n2,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.spacing < 1 || self.repair_period < 1 {
            return Err(Error::InvalidConfig(
                "spacing and repair_period must be >= 1".into(),
            ));
        }
        Ok(())
    }
}

/// One accepted 2x2 block move.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlockMove {
    pub rows: (usize, usize),
    pub cols: (usize, usize),
    pub new_value: f64,
}

/// Uniform unordered pair from 0..n, n >= 2.
fn random_pair(rng: &mut ChaCha8Rng, n: usize) -> (usize, usize) {
    let i = rng.gen_range(0..n);
    let mut j = rng.gen_range(0..n - 1);
    if j >= i {
        j += 1;
    }
    if i < j {
        (i, j)
    } else {
        (j, i)
    }
}

/// Applies one random block move in place. The three dependent block
/// entries are recomputed from the block's row/column sums each move.
fn block_move_in_place(m: &mut SquareMatrix, rng: &mut ChaCha8Rng) -> Result<BlockMove> {
    let n = m.n();
    debug_assert!(n >= 2);
    let (i, i2) = random_pair(rng, n);
    let (j, j2) = random_pair(rng, n);
    let a = m.get(i, j);
    let b = m.get(i, j2);
    let c = m.get(i2, j);
    let d = m.get(i2, j2);
    let lo = (a - d).max(0.0);
    let hi = a + b.min(c);
    if hi < lo - 1e-12 {
        return Err(Error::CorruptedState(format!(
            "block ({i},{i2})x({j},{j2}) has infeasible interval [{lo}, {hi}]"
        )));
    }
    // degenerate interval: the move is a no-op but still counts
    let new_a = if hi <= lo { a } else { rng.gen_range(lo..hi) };
    m.set(i, j, new_a);
    m.set(i, j2, a + b - new_a);
    m.set(i2, j, a + c - new_a);
    m.set(i2, j2, d + new_a - a);
    Ok(BlockMove {
        rows: (i, i2),
        cols: (j, j2),
        new_value: new_a,
    })
}

/// One Gibbs step on a copy of the input.
pub fn gibbs_step(m: &SquareMatrix, rng: &mut ChaCha8Rng) -> Result<(SquareMatrix, BlockMove)> {
    let mut out = m.clone();
    let mv = block_move_in_place(&mut out, rng)?;
    Ok((out, mv))
}

struct Chain {
    state: SquareMatrix,
    rng: ChaCha8Rng,
    cfg: GibbsConfig,
    moves: u64,
}

impl Chain {
    fn new(cfg: GibbsConfig, seed: u64, stream: u64) -> Self {
        Self {
            state: SquareMatrix::barycenter(cfg.n),
            rng: seeded_stream(seed, stream),
            cfg,
            moves: 0,
        }
    }

    fn advance(&mut self, moves: u64) -> Result<()> {
        if self.cfg.n < 2 {
            return Ok(());
        }
        for _ in 0..moves {
            block_move_in_place(&mut self.state, &mut self.rng).map_err(|e| Error::ChainStep {
                move_index: self.moves,
                source: Box::new(e),
            })?;
            self.moves += 1;
            if self.moves.is_multiple_of(self.cfg.repair_period) {
                let report = check_doubly_stochastic(&self.state, 1e-9)?;
                if !report.ok {
                    self.state = sinkhorn_repair(&self.state, 1e-12, 10_000)?;
                }
            }
        }
        Ok(())
    }
}

/// Runs a single Gibbs chain from the barycenter and retains `count`
/// matrices after burn-in, one every `spacing` moves.
pub fn gibbs_chain(cfg: GibbsConfig, count: usize, seed: u64) -> Result<SampleBatch> {
    gibbs_chain_on_stream(cfg, count, seed, 0)
}

fn gibbs_chain_on_stream(
    cfg: GibbsConfig,
    count: usize,
    seed: u64,
    stream: u64,
) -> Result<SampleBatch> {
    assert!(count >= 1);
    cfg.validate()?;
    let mut chain = Chain::new(cfg, seed, stream);
    chain.advance(cfg.burn_in)?;
    let mut matrices = Vec::with_capacity(count);
    for _ in 0..count {
        chain.advance(cfg.spacing)?;
        matrices.push(chain.state.clone());
    }
    Ok(SampleBatch::new(
        SamplerId::Gibbs,
        seed,
        cfg.burn_in,
        cfg.spacing,
        matrices,
    ))
}

/// Runs `chains` independent chains (stream indices 0..chains) and
/// concatenates their samples in stream order. Deterministic for a fixed
/// (seed, chains) pair.
pub fn gibbs_chain_parallel(
    cfg: GibbsConfig,
    count: usize,
    seed: u64,
    chains: usize,
) -> Result<SampleBatch> {
    assert!(count >= 1 && chains >= 1);
    cfg.validate()?;
    let per = count.div_ceil(chains);
    let counts: Vec<usize> = (0..chains)
        .map(|c| per.min(count - (per * c).min(count)))
        .filter(|&c| c > 0)
        .collect();
    let results: Vec<Result<SampleBatch>> = std::thread::scope(|scope| {
        let handles: Vec<_> = counts
            .iter()
            .enumerate()
            .map(|(idx, &c)| {
                scope.spawn(move || gibbs_chain_on_stream(cfg, c, seed, idx as u64))
            })
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });
    let mut matrices = Vec::with_capacity(count);
    for r in results {
        matrices.extend(r?.matrices().iter().cloned());
    }
    Ok(SampleBatch::new(
        SamplerId::Gibbs,
        seed,
        cfg.burn_in,
        cfg.spacing,
        matrices,
    ))
}

/// Largest n accepted without the explicit override: the acceptance rate is
/// the free-block volume, which decays super-exponentially.
pub const REJECTION_MAX_N: usize = 5;
const REJECTION_PROPOSAL_CAP: u64 = 1_000_000_000;

/// Exactly uniform samples by rejection: draw the (n-1)^2 free entries
/// uniformly on [0,1] and accept iff the forced completion is entrywise
/// nonnegative. The acceptance rate estimates the free-block volume of the
/// Birkhoff polytope.
pub fn rejection_exact(n: usize, count: usize, seed: u64) -> Result<(SampleBatch, f64)> {
    rejection_exact_with_override(n, count, seed, false)
}

pub fn rejection_exact_with_override(
    n: usize,
    count: usize,
    seed: u64,
    allow_large: bool,
) -> Result<(SampleBatch, f64)> {
    assert!(n >= 1 && count >= 1);
    if n > REJECTION_MAX_N && !allow_large {
        return Err(Error::TooLarge {
            n,
            max: REJECTION_MAX_N,
            what: "rejection sampling (pass the override to force it)",
        });
    }
    let mut rng = seeded_stream(seed, 0);
    let mut matrices = Vec::with_capacity(count);
    let mut proposals: u64 = 0;
    let mut free = vec![0.0_f64; (n - 1) * (n - 1)];
    while matrices.len() < count {
        if proposals >= REJECTION_PROPOSAL_CAP {
            return Err(Error::ZeroAcceptance { proposals });
        }
        proposals += 1;
        for v in free.iter_mut() {
            *v = rng.gen::<f64>();
        }
        if let Some(m) = complete_free_block(n, &free) {
            matrices.push(m);
        }
    }
    let rate = count as f64 / proposals as f64;
    Ok((
        SampleBatch::new(SamplerId::Rejection, seed, 0, 1, matrices),
        rate,
    ))
}

/// Completes an (n-1)x(n-1) free block to an n x n matrix with unit
/// margins, or None if any forced entry is negative.
fn complete_free_block(n: usize, free: &[f64]) -> Option<SquareMatrix> {
    let mut m = SquareMatrix::barycenter(n);
    if n == 1 {
        m.set(0, 0, 1.0);
        return Some(m);
    }
    for i in 0..n - 1 {
        for j in 0..n - 1 {
            m.set(i, j, free[i * (n - 1) + j]);
        }
    }
    let mut last_col_sum = 0.0;
    for i in 0..n - 1 {
        let row_rest: f64 = (0..n - 1).map(|j| m.get(i, j)).sum();
        let v = 1.0 - row_rest;
        if v < 0.0 {
            return None;
        }
        m.set(i, n - 1, v);
        last_col_sum += v;
    }
    for j in 0..n - 1 {
        let col_rest: f64 = (0..n - 1).map(|i| m.get(i, j)).sum();
        let v = 1.0 - col_rest;
        if v < 0.0 {
            return None;
        }
        m.set(n - 1, j, v);
    }
    let corner = 1.0 - last_col_sum;
    if corner < 0.0 {
        return None;
    }
    m.set(n - 1, n - 1, corner);
    Some(m)
}

/// Largest n for which all n! permutation matrices are materialized.
pub const VERTEX_MIXTURE_MAX_N: usize = 8;

/// Uniform convex combinations of the n! permutation matrices: weights are
/// Dirichlet(1, ..., 1) over the n!-simplex, realized as normalized
/// exponentials. Each entry is marginally Beta((n-1)!, (n-1) (n-1)!).
pub fn vertex_mixture(n: usize, count: usize, seed: u64) -> Result<SampleBatch> {
    assert!(n >= 1 && count >= 1);
    if n > VERTEX_MIXTURE_MAX_N {
        return Err(Error::TooLarge {
            n,
            max: VERTEX_MIXTURE_MAX_N,
            what: "vertex mixture (materializes all n! permutations)",
        });
    }
    let perms = all_permutations(n);
    let mut rng = seeded_stream(seed, 0);
    let exp = rand_distr::Exp1;
    let mut matrices = Vec::with_capacity(count);
    let mut weights = vec![0.0_f64; perms.len()];
    for _ in 0..count {
        let mut total = 0.0;
        for w in weights.iter_mut() {
            let e: f64 = rng.sample(exp);
            *w = e;
            total += e;
        }
        let mut m = SquareMatrix::from_fn(n, |_, _| 0.0);
        for (perm, &w) in perms.iter().zip(&weights) {
            let w = w / total;
            for (i, &j) in perm.iter().enumerate() {
                m.set(i, j, m.get(i, j) + w);
            }
        }
        matrices.push(m);
    }
    Ok(SampleBatch::new(SamplerId::VertexMixture, seed, 0, 1, matrices))
}

fn all_permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..n).collect();
    heap_permute(&mut cur, n, &mut out);
    out
}

fn heap_permute(cur: &mut Vec<usize>, k: usize, out: &mut Vec<Vec<usize>>) {
    if k <= 1 {
        out.push(cur.clone());
        return;
    }
    for i in 0..k {
        heap_permute(cur, k - 1, out);
        if k.is_multiple_of(2) {
            cur.swap(i, k - 1);
        } else {
            cur.swap(0, k - 1);
        }
    }
}

/// The comparison model Y: n^2 iid Exp(1) entries.
pub fn iid_exponential_matrix(n: usize, rng: &mut ChaCha8Rng) -> SquareMatrix {
    let exp = rand_distr::Exp1;
    SquareMatrix::from_fn(n, |_, _| rng.sample(exp))
}

pub fn iid_exponential_batch(n: usize, count: usize, seed: u64) -> SampleBatch {
    let mut rng = seeded_stream(seed, 0);
    let matrices = (0..count).map(|_| iid_exponential_matrix(n, &mut rng)).collect();
    SampleBatch::new(SamplerId::IidExponential, seed, 0, 1, matrices)
}

/// Uniform stochastic matrix: rows independent and uniform on the
/// (n-1)-simplex (exponential spacings, normalized). Entries are
/// marginally Beta(1, n-1).
pub fn dirichlet_row_matrix(n: usize, rng: &mut ChaCha8Rng) -> SquareMatrix {
    let exp = rand_distr::Exp1;
    let mut m = SquareMatrix::from_fn(n, |_, _| rng.sample(exp));
    for i in 0..n {
        let s = m.row_sum(i);
        for j in 0..n {
            m.set(i, j, m.get(i, j) / s);
        }
    }
    m
}

pub fn dirichlet_row_batch(n: usize, count: usize, seed: u64) -> SampleBatch {
    let mut rng = seeded_stream(seed, 0);
    let matrices = (0..count).map(|_| dirichlet_row_matrix(n, &mut rng)).collect();
    SampleBatch::new(SamplerId::DirichletRows, seed, 0, 1, matrices)
}
