//! Exhaustive enumeration of `G(n, p)` for `n ≤ 7`.
//!
//! A graph is an edge mask over the colex ranks; its weight is
//! `p^k (1-p)^{C(n,2)-k}` with `k` the popcount. Sums run over fixed
//! contiguous mask blocks in parallel and are merged in block order, so
//! every result is reproducible bit for bit.
//!
//! Local sums here are formed from explicit neighbourhood unions, a route
//! independent of the per-edge closed forms used by [`crate::coupling`].

use std::ops::Range;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coupling::{graph_terms, LocalView, Needs, REstimates, RTermEstimate};
use crate::error::{check_probability, check_vertex_count, Error, Result};
use crate::graph::{edge_total, neighborhood, neighborhood_size, triple_total, Graph, TripleId};
use crate::moments::{exact_moments, MomentReport};
use crate::special::normal_cdf;
use crate::stats::{ComplexNeumaier, Neumaier};

/// Largest `n` the oracle enumerates.
pub const MAX_ORACLE_N: usize = 7;

const BLOCKS: u64 = 64;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExactDistribution {
    pub n: usize,
    pub p: f64,
    /// `(t, P[T = t])`, sorted by `t`, zero-probability counts omitted.
    pub atoms: Vec<(u64, f64)>,
}

impl ExactDistribution {
    pub fn mean(&self) -> f64 {
        self.atoms.iter().map(|&(t, q)| t as f64 * q).collect::<Neumaier>().value()
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.atoms.iter().map(|&(t, q)| (t as f64 - m).powi(2) * q).collect::<Neumaier>().value()
    }

    /// Atoms of `W = (T - E T)/σ` with the exact `σ`.
    pub fn standardized(&self) -> Result<Vec<(f64, f64)>> {
        let m = exact_moments(self.n, self.p)?;
        Ok(self.atoms.iter().map(|&(t, q)| ((t as f64 - m.mean_t) / m.sigma, q)).collect())
    }
}

fn check_oracle(n: usize, p: f64, max: usize) -> Result<()> {
    check_vertex_count(n)?;
    check_probability(p)?;
    if n > max {
        return Err(Error::Capacity(format!(
            "exact enumeration supports n <= {max} (2^{} graphs at n = {n})",
            edge_total(n)
        )));
    }
    Ok(())
}

/// Weight of a mask by popcount.
pub(crate) struct Weights(Vec<f64>);

impl Weights {
    pub(crate) fn new(n: usize, p: f64) -> Self {
        let e = edge_total(n) as i32;
        Weights((0..=e).map(|k| p.powi(k) * (1.0 - p).powi(e - k)).collect())
    }

    #[inline]
    pub(crate) fn of(&self, mask: u64) -> f64 {
        self.0[mask.count_ones() as usize]
    }
}

pub(crate) fn blocks(n: usize) -> Vec<Range<u64>> {
    let total = 1u64 << edge_total(n);
    let b = BLOCKS.min(total);
    let size = total / b;
    (0..b).map(|i| i * size..if i + 1 == b { total } else { (i + 1) * size }).collect()
}

/// Sums `weight(g)·h(g)` over every graph on `n` vertices.
fn weighted_sum<F>(n: usize, p: f64, reverse: bool, h: F) -> Complex64
where
    F: Fn(u64) -> Complex64 + Sync,
{
    let w = Weights::new(n, p);
    let mut parts: Vec<ComplexNeumaier> = blocks(n)
        .into_par_iter()
        .map(|r| {
            let mut acc = ComplexNeumaier::new();
            let masks: Box<dyn Iterator<Item = u64>> = if reverse { Box::new(r.rev()) } else { Box::new(r) };
            for mask in masks {
                acc.add(h(mask) * w.of(mask));
            }
            acc
        })
        .collect();
    if reverse {
        parts.reverse();
    }
    let mut total = ComplexNeumaier::new();
    for part in &parts {
        total.merge(part);
    }
    total.value()
}

/// The exact law of `T`.
pub fn enumerate_distribution(n: usize, p: f64) -> Result<ExactDistribution> {
    check_oracle(n, p, MAX_ORACLE_N)?;
    let idx = OracleIndex::new(n);
    let w = Weights::new(n, p);
    let c3 = triple_total(n);
    let parts: Vec<Vec<Neumaier>> = blocks(n)
        .into_par_iter()
        .map(|r| {
            let mut acc = vec![Neumaier::new(); c3 + 1];
            for mask in r {
                acc[idx.triangles(mask)].add(w.of(mask));
            }
            acc
        })
        .collect();
    let mut probs = vec![Neumaier::new(); c3 + 1];
    for part in &parts {
        for (a, b) in probs.iter_mut().zip(part) {
            a.merge(b);
        }
    }
    let atoms = probs.iter().enumerate().map(|(t, q)| (t as u64, q.value())).filter(|&(_, q)| q > 0.0).collect();
    Ok(ExactDistribution { n, p, atoms })
}

/// `E h(G)` by exact enumeration.
pub fn exact_expectation<F>(n: usize, p: f64, h: F) -> Result<Complex64>
where
    F: Fn(&Graph) -> Complex64 + Sync,
{
    check_oracle(n, p, MAX_ORACLE_N)?;
    Ok(weighted_sum(n, p, false, |mask| h(&Graph::from_mask(n, mask))))
}

/// Kolmogorov distance between a finite law and `Φ`.
///
/// The sup is attained at an atom, approached from one side or the other.
pub fn dk_of_atoms(atoms: &[(f64, f64)]) -> f64 {
    let mut sorted = atoms.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut below = Neumaier::new();
    let mut d = 0.0f64;
    for (x, q) in sorted {
        let phi = normal_cdf(x);
        let left = below.value();
        below.add(q);
        d = d.max((left - phi).abs()).max((below.value() - phi).abs());
    }
    d
}

/// Exact `d_K(L(W), Φ)`.
pub fn exact_dk(n: usize, p: f64) -> Result<f64> {
    Ok(dk_of_atoms(&enumerate_distribution(n, p)?.standardized()?))
}

/// Precomputed triple and neighbourhood structure for one `n`.
pub(crate) struct OracleIndex {
    n: usize,
    /// Edge masks of each triple.
    tri: Vec<u64>,
    /// `ν_v`, with `v` first.
    nbr: Vec<Vec<usize>>,
    /// `ν_{v,w}` for `w = nbr[v][k]`.
    unions: Vec<Vec<Vec<usize>>>,
}

impl OracleIndex {
    pub fn new(n: usize) -> Self {
        let all: Vec<TripleId> = TripleId::all(n).collect();
        let tri = all.iter().map(|v| v.edges().iter().fold(0u64, |m, e| m | 1 << e.rank())).collect();
        let mut nbr = Vec::with_capacity(all.len());
        let mut unions = Vec::with_capacity(all.len());
        for &v in &all {
            let mut list: Vec<TripleId> = neighborhood(v, n, None).expect("valid triple");
            list.retain(|&w| w != v);
            list.insert(0, v);
            unions.push(
                list.iter()
                    .map(|&w| neighborhood(v, n, Some(w)).expect("w in ν_v").iter().map(|u| u.rank()).collect())
                    .collect(),
            );
            nbr.push(list.iter().map(|w| w.rank()).collect());
        }
        OracleIndex { n, tri, nbr, unions }
    }

    #[inline]
    pub fn triangles(&self, mask: u64) -> usize {
        self.tri.iter().filter(|&&t| mask & t == t).count()
    }

    pub fn view(&self, mask: u64, p: f64) -> SetSums<'_> {
        let p3 = p * p * p;
        let x: Vec<f64> = self.tri.iter().map(|&t| if mask & t == t { 1.0 - p3 } else { -p3 }).collect();
        let y = self.nbr.iter().map(|list| list.iter().map(|&u| x[u]).sum()).collect();
        SetSums { idx: self, x, y }
    }
}

/// Local sums of one graph computed by summing over explicit index sets.
pub(crate) struct SetSums<'a> {
    idx: &'a OracleIndex,
    x: Vec<f64>,
    y: Vec<f64>,
}

impl SetSums<'_> {
    fn w(&self, sigma: f64) -> f64 {
        self.x.iter().sum::<f64>() / sigma
    }
}

impl LocalView for SetSums<'_> {
    fn n(&self) -> usize {
        self.idx.n
    }

    fn x(&self, v: usize) -> f64 {
        self.x[v]
    }

    fn y(&self, v: usize) -> f64 {
        self.y[v]
    }

    fn for_each_pair(&self, v: usize, f: &mut dyn FnMut(usize, f64)) {
        for (k, &w) in self.idx.nbr[v].iter().enumerate() {
            f(w, self.idx.unions[v][k].iter().map(|&u| self.x[u]).sum());
        }
    }
}

/// The characteristic-function identity at one `t`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OdeCheck {
    pub t: f64,
    pub phi: Complex64,
    pub phi_prime: Complex64,
    pub a_t: Complex64,
    pub b_t: Complex64,
    /// `|φ' + t(1 + a)φ - b|`
    pub residual: f64,
}

/// Evaluates `φ' = -t(1 + a(t))φ + b(t)` by enumeration over graphs and `V`.
pub fn exact_chf_ode(n: usize, p: f64, t: f64) -> Result<OdeCheck> {
    check_oracle(n, p, MAX_ORACLE_N)?;
    if !t.is_finite() {
        return Err(Error::InvalidInput(format!("t = {t} must be finite")));
    }
    if t == 0.0 {
        return Ok(OdeCheck {
            t,
            phi: Complex64::new(1.0, 0.0),
            phi_prime: Complex64::default(),
            a_t: Complex64::default(),
            b_t: Complex64::default(),
            residual: 0.0,
        });
    }
    use crate::coupling::Conditional::{R41, R42, R43};
    let idx = OracleIndex::new(n);
    let m = exact_moments(n, p)?;
    let s = m.sigma;
    let i = Complex64::i();
    // [φ, E We, E c41, E c41 e, E c42, E c42 e, E c43, E c43 e]
    let mut sums = [Complex64::default(); 8];
    for (k, slot) in sums.iter_mut().enumerate() {
        *slot = weighted_sum(n, p, false, |mask| {
            let view = idx.view(mask, p);
            let w = view.w(s);
            let e = (i * t * w).exp();
            let c = |which| crate::coupling::conditional_on_view(&view, &m, s, t, which);
            match k {
                0 => e,
                1 => e * w,
                2 => c(R41),
                3 => c(R41) * e,
                4 => c(R42),
                5 => c(R42) * e,
                6 => c(R43),
                _ => c(R43) * e,
            }
        });
    }
    let [phi, we, c41, c41e, c42, c42e, c43, c43e] = sums;
    let phi_prime = i * we;
    let a_t = c41 / (i * t) - c42 + c43;
    let b_t = i * (c41e - c41 * phi) + t * (c42e - c42 * phi) - t * (c43e - c43 * phi);
    let residual = (phi_prime + t * (1.0 + a_t) * phi - b_t).norm();
    Ok(OdeCheck { t, phi, phi_prime, a_t, b_t, residual })
}

/// Test functions for the coupling identities.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TestFn {
    One,
    Identity,
    Square,
    Sin,
    /// `e^{itx}`
    Exp(f64),
}

impl TestFn {
    pub fn eval(self, x: f64) -> Complex64 {
        match self {
            TestFn::One => Complex64::new(1.0, 0.0),
            TestFn::Identity => Complex64::new(x, 0.0),
            TestFn::Square => Complex64::new(x * x, 0.0),
            TestFn::Sin => Complex64::new(x.sin(), 0.0),
            TestFn::Exp(t) => Complex64::new(0.0, t * x).exp(),
        }
    }

    pub fn label(self) -> String {
        match self {
            TestFn::One => "1".into(),
            TestFn::Identity => "x".into(),
            TestFn::Square => "x^2".into(),
            TestFn::Sin => "sin x".into(),
            TestFn::Exp(t) => format!("exp({t}ix)"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Residual {
    pub f: String,
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CouplingReport {
    pub n: usize,
    pub p: f64,
    /// `|E{G f(W') - G f(W)} - E{W f(W)}|` per test function.
    pub stein: Vec<Residual>,
    /// `max_g |E[G D̃ | g] - E[G D | g]|`.
    pub conditional_gd: f64,
    pub expected_s: f64,
    pub expected_s_analytic: f64,
    /// `|E[(G D̃ - S) h(W'')]|` per test function.
    pub weak: Vec<Residual>,
}

impl CouplingReport {
    pub fn max_residual(&self) -> f64 {
        self.stein
            .iter()
            .chain(&self.weak)
            .map(|r| r.residual)
            .fold(self.conditional_gd, f64::max)
            .max((self.expected_s - 1.0).abs())
            .max((self.expected_s_analytic - 1.0).abs())
    }
}

/// Checks the coupling and extended-coupling identities exactly.
pub fn verify_couplings(n: usize, p: f64, family: &[TestFn]) -> Result<CouplingReport> {
    check_oracle(n, p, 6)?;
    let idx = OracleIndex::new(n);
    let m = exact_moments(n, p)?;
    let s = m.sigma;
    let c3 = triple_total(n) as f64;
    let nu = neighborhood_size(n) as f64;
    let total = triple_total(n);

    let stein = family
        .iter()
        .map(|&f| {
            let r = weighted_sum(n, p, false, |mask| {
                let view = idx.view(mask, p);
                let w = view.w(s);
                let fw = f.eval(w);
                let mut lhs = ComplexNeumaier::new();
                for v in 0..total {
                    lhs.add((f.eval(w - view.y(v) / s) - fw) * (-view.x(v) / s));
                }
                lhs.value() - fw * w
            });
            Residual { f: f.label(), residual: r.norm() }
        })
        .collect();

    let conditional_gd = blocks(n)
        .into_par_iter()
        .map(|r| {
            r.map(|mask| {
                let view = idx.view(mask, p);
                let (mut tilde, mut plain) = (Neumaier::new(), Neumaier::new());
                for v in 0..total {
                    let xv = view.x(v);
                    for &w in &idx.nbr[v] {
                        tilde.add(xv * view.x(w));
                    }
                    plain.add(xv * view.y(v));
                }
                ((tilde.value() - plain.value()) / (s * s)).abs()
            })
            .fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max);

    let s_of = |same: bool| c3 * nu / (s * s) * m.sigma_vw(same);
    let expected_s = weighted_sum(n, p, false, |_| {
        let mut acc = Neumaier::new();
        for v in 0..total {
            for &w in &idx.nbr[v] {
                acc.add(s_of(w == v));
            }
        }
        Complex64::new(acc.value() / (c3 * nu), 0.0)
    })
    .re;
    let expected_s_analytic = c3 * (m.var_x + 3.0 * (n as f64 - 3.0) * m.cov_overlap2) / m.var_t;

    let weak = family
        .iter()
        .map(|&h| {
            let r = weighted_sum(n, p, false, |mask| {
                let view = idx.view(mask, p);
                let w = view.w(s);
                let mut acc = ComplexNeumaier::new();
                for v in 0..total {
                    let xv = view.x(v);
                    view.for_each_pair(v, &mut |u, yvw| {
                        acc.add(h.eval(w - yvw / s) * (xv * view.x(u) - m.sigma_vw(u == v)));
                    });
                }
                acc.value() / (s * s)
            });
            Residual { f: h.label(), residual: r.norm() }
        })
        .collect();

    Ok(CouplingReport { n, p, stein, conditional_gd, expected_s, expected_s_analytic, weak })
}

/// Every r-term computed exactly: inner averages over `(V, V')` per graph,
/// outer means and variances over all graphs.
///
/// Returned in the same shape as the Monte Carlo estimates, with zero
/// standard errors and `samples = 0`.
pub fn exact_r_terms(n: usize, p: f64, t_grid: &[f64]) -> Result<REstimates> {
    exact_r_terms_ordered(n, p, t_grid, false)
}

pub(crate) fn exact_r_terms_ordered(n: usize, p: f64, t_grid: &[f64], reverse: bool) -> Result<REstimates> {
    check_oracle(n, p, 6)?;
    if t_grid.iter().any(|t| !(t.is_finite() && *t != 0.0)) {
        return Err(Error::InvalidInput("t grid values must be finite and nonzero".into()));
    }
    let idx = OracleIndex::new(n);
    let m = exact_moments(n, p)?;
    let needs = Needs { r1: true, r2: !t_grid.is_empty(), r3: true, r4: !t_grid.is_empty() };
    // per-graph terms; at most 2^15 graphs
    let w = Weights::new(n, p);
    let masks: Vec<u64> =
        if reverse { (0..1u64 << edge_total(n)).rev().collect() } else { (0..1u64 << edge_total(n)).collect() };
    let per: Vec<_> = masks.par_iter().map(|&mask| graph_terms(&idx.view(mask, p), &m, t_grid, needs)).collect();
    let weights: Vec<f64> = masks.iter().map(|&mask| w.of(mask)).collect();

    let mean =
        |f: &dyn Fn(usize) -> f64| -> f64 { (0..per.len()).map(|i| weights[i] * f(i)).collect::<Neumaier>().value() };
    let exact = |name: &str, value: f64, t: Option<f64>| RTermEstimate {
        name: name.into(),
        value,
        std_error: 0.0,
        samples: 0,
        t,
    };
    let mut terms = Vec::new();
    let r1 = mean(&|i| per[i].r1);
    let r32 = mean(&|i| per[i].r32);
    let r33 = mean(&|i| per[i].r33);
    terms.push(exact("r1", r1, None));
    terms.push(exact("r3_1", r1, None));
    terms.push(exact("r3_2", r32, None));
    terms.push(exact("r3_3", r33, None));
    terms.push(exact("r3", 0.5 * r1 + r32 + r33, None));

    let sd = |pick: &dyn Fn(usize) -> Complex64| -> f64 {
        let mu = (0..per.len())
            .fold(ComplexNeumaier::new(), |mut a, i| {
                a.add(pick(i) * weights[i]);
                a
            })
            .value();
        mean(&|i| (pick(i) - mu).norm_sqr()).max(0.0).sqrt()
    };
    if !t_grid.is_empty() {
        let family =
            |name: &str, power: i32, pick: &dyn Fn(usize, usize) -> Complex64, terms: &mut Vec<RTermEstimate>| {
                let mut sup = 0.0f64;
                for (k, &t) in t_grid.iter().enumerate() {
                    let v = sd(&|i| pick(i, k)) / t.abs().powi(power);
                    terms.push(exact(name, v, Some(t)));
                    sup = sup.max(v);
                }
                sup
            };
        let r2 = family("r2", 1, &|i, k| per[i].c2[k], &mut terms);
        terms.push(exact("r2", r2, None));
        let a = family("r4_1", 2, &|i, k| per[i].c41[k], &mut terms);
        let b = family("r4_2", 1, &|i, k| per[i].c42[k], &mut terms);
        let c = family("r4_3", 1, &|i, k| per[i].c43[k], &mut terms);
        terms.push(exact("r4", a + b + c, None));
    }
    Ok(REstimates { n, p, samples: 0, seed: 0, t_grid: t_grid.to_vec(), terms })
}

/// Exact moments of `T` recomputed from the enumerated law.
pub fn oracle_moments(n: usize, p: f64) -> Result<(f64, f64)> {
    let d = enumerate_distribution(n, p)?;
    Ok((d.mean(), d.variance()))
}

/// Closed-form moments next to the oracle ones, for reports.
pub fn moment_agreement(n: usize, p: f64) -> Result<(MomentReport, f64, f64)> {
    let (mean, var) = oracle_moments(n, p)?;
    Ok((exact_moments(n, p)?, mean, var))
}
