//! Counter-based `G(n, p)` sampling.
//!
//! Every sample is addressed by `(seed, stream, index)`. The generator for a
//! sample is a ChaCha8 keyed by `seed`, switched to `stream`, and positioned at
//! word `index << 32`; edge rank `r` then consumes the `r`-th 64-bit output.
//! Any sample can therefore be regenerated alone, and workers sampling
//! disjoint index ranges share no state.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{check_probability, check_vertex_count, Error, Result};
use crate::graph::{edge_total, Graph};

/// Largest `index` that keeps sample windows disjoint.
pub const MAX_INDEX: u64 = (1 << 36) - 1;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub n: usize,
    pub p: f64,
    pub seed: u64,
    pub stream: u64,
}

impl SamplerConfig {
    pub fn new(n: usize, p: f64, seed: u64, stream: u64) -> Result<Self> {
        let cfg = SamplerConfig { n, p, seed, stream };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        check_vertex_count(self.n)?;
        check_probability(self.p)?;
        if edge_total(self.n) >= 1 << 31 {
            return Err(Error::Capacity(format!("n = {} is too large to sample", self.n)));
        }
        Ok(())
    }

    pub fn with_stream(self, stream: u64) -> Self {
        SamplerConfig { stream, ..self }
    }

    /// `⌊p·2⁶⁴⌋`: an edge is present when the uniform word falls below it.
    #[inline]
    pub fn threshold(&self) -> u64 {
        (self.p * 2f64.powi(64)) as u64
    }
}

/// The generator positioned at the start of sample `index`.
pub fn sample_rng(seed: u64, stream: u64, index: u64) -> ChaCha8Rng {
    debug_assert!(index <= MAX_INDEX);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng.set_word_pos((index as u128) << 32);
    rng
}

fn check_index(index: u64) -> Result<()> {
    if index > MAX_INDEX {
        Err(Error::InvalidInput(format!("sample index {index} exceeds {MAX_INDEX}")))
    } else {
        Ok(())
    }
}

/// Sample `index` of the `G(n, p)` sequence selected by `cfg`.
pub fn sample_gnp(cfg: &SamplerConfig, index: u64) -> Result<Graph> {
    cfg.validate()?;
    check_index(index)?;
    Ok(gnp_unchecked(cfg, index))
}

pub(crate) fn gnp_unchecked(cfg: &SamplerConfig, index: u64) -> Graph {
    let total = edge_total(cfg.n);
    let thr = cfg.threshold();
    let mut rng = sample_rng(cfg.seed, cfg.stream, index);
    let mut bits = vec![0u64; total.div_ceil(64)];
    for (wi, word) in bits.iter_mut().enumerate() {
        let len = (total - wi * 64).min(64);
        let mut w = 0u64;
        for b in 0..len {
            w |= ((rng.next_u64() < thr) as u64) << b;
        }
        *word = w;
    }
    Graph::from_raw(cfg.n, bits)
}

/// Which proxy statistic to draw.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum ProxyVariant {
    /// `Y = Σ_{i<j<k} I_{ij} I_{ijk}`: pair `(i, j)` is the triple's two smallest labels.
    #[default]
    Literal,
    /// Every pair owns `n - 2` independent `Be(p²)` marks, so `Y` is a sum of
    /// `C(n,2)` i.i.d. terms.
    Iid,
}

/// One draw of the independent proxy statistic.
///
/// Both variants are generated through their exact binomial representation:
/// for the literal model the `j` pairs with larger label `j` each own
/// `n - 1 - j` marks, so given `K_j ~ Bin(j, p)` present pairs the count is
/// `Bin(Σ_j K_j (n-1-j), p²)`.
pub fn sample_proxy(cfg: &SamplerConfig, index: u64, variant: ProxyVariant) -> Result<u64> {
    cfg.validate()?;
    check_index(index)?;
    let mut rng = sample_rng(cfg.seed, cfg.stream, index);
    let n = cfg.n as u64;
    let p = cfg.p;
    let marks = match variant {
        ProxyVariant::Literal => {
            let mut m = 0u64;
            for j in 1..n - 1 {
                m += binomial(&mut rng, j, p)? * (n - 1 - j);
            }
            m
        }
        ProxyVariant::Iid => binomial(&mut rng, n * (n - 1) / 2, p)? * (n - 2),
    };
    binomial(&mut rng, marks, p * p)
}

fn binomial<R: Rng>(rng: &mut R, trials: u64, p: f64) -> Result<u64> {
    if trials == 0 {
        return Ok(0);
    }
    Binomial::new(trials, p).map(|d| d.sample(rng)).map_err(|e| Error::Numeric(format!("binomial({trials}, {p}): {e}")))
}
