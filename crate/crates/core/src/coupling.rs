//! The Stein coupling for the triangle count and its extension.
//!
//! With `V` uniform on all triples, `W' = W - Y_V/σ` and `G = -C(n,3)X_V/σ`
//! form a Stein coupling. The extension draws `V'` uniformly from `ν_V` and
//! sets `D̃ = -|ν_V| X_{V'}/σ`, `D' = -Y_{V,V'}/σ` and `S` as a constant
//! depending only on whether `V' = V`.
//!
//! The r-terms of the bound condition on the whole graph, so every inner
//! expectation over `(V, V')` is an exact finite sum; only the outer
//! expectation over graphs is Monte Carlo.

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{theorem2_bound, BoundForm, BoundInputs};
use crate::error::{check_probability, Error, Result};
use crate::graph::{edge_total, neighborhood_size, triple_total, Adjacency, Graph, TripleId};
use crate::moments::{exact_moments, regime_rates, MomentReport, Regime, RegimeRates};
use crate::sampler::{gnp_unchecked, SamplerConfig};
use crate::stats::{batch_means, DEFAULT_BATCHES};

/// Colex rank of a triple given in any order.
#[inline]
pub(crate) fn rank3(a: usize, b: usize, c: usize) -> usize {
    let (mut i, mut j, mut k) = (a, b, c);
    if i > j {
        std::mem::swap(&mut i, &mut j);
    }
    if j > k {
        std::mem::swap(&mut j, &mut k);
    }
    if i > j {
        std::mem::swap(&mut i, &mut j);
    }
    k * (k - 1) * (k - 2) / 6 + j * (j - 1) / 2 + i
}

/// Per-graph access to the centred indicators and local sums, keyed by
/// triple rank.
pub trait LocalView {
    fn n(&self) -> usize;
    fn x(&self, v: usize) -> f64;
    fn y(&self, v: usize) -> f64;
    /// Calls `f(w, Y_{v,w})` for every `w ∈ ν_v`, starting with `w = v`.
    fn for_each_pair(&self, v: usize, f: &mut dyn FnMut(usize, f64));
}

/// Local sums from per-edge aggregates.
///
/// With `S_e = Σ_{x∉e} X_{e∪x} = I_e·codeg(e) - (n-2)p³`, a triple
/// `v = abc` has `Y_v = S_ab + S_ac + S_bc - 2X_v`, and for `w = abd`
/// `Y_{v,w} = Y_v + Y_w - S_ab - X_acd - X_bcd`.
#[derive(Clone, Debug)]
pub struct LocalSums {
    n: usize,
    x: Vec<f64>,
    y: Vec<f64>,
    s: Vec<f64>,
}

impl LocalSums {
    pub fn new(g: &Graph, p: f64) -> Result<Self> {
        check_probability(p)?;
        crate::error::check_vertex_count(g.n())?;
        Ok(Self::build(g, p))
    }

    pub(crate) fn build(g: &Graph, p: f64) -> Self {
        let n = g.n();
        let p3 = p * p * p;
        let adj = Adjacency::from_graph(g);
        let mut s = vec![0.0; edge_total(n)];
        let mut r = 0;
        for j in 1..n {
            for i in 0..j {
                let tri = if adj.has(i, j) { adj.codegree(i, j) as f64 } else { 0.0 };
                s[r] = tri - (n - 2) as f64 * p3;
                r += 1;
            }
        }
        let mut x = vec![0.0; triple_total(n)];
        let mut y = vec![0.0; triple_total(n)];
        let mut r = 0;
        for k in 2..n {
            for j in 1..k {
                for i in 0..j {
                    let t = adj.has(i, j) && adj.has(i, k) && adj.has(j, k);
                    let xv = if t { 1.0 - p3 } else { -p3 };
                    x[r] = xv;
                    y[r] = s[erank(i, j)] + s[erank(i, k)] + s[erank(j, k)] - 2.0 * xv;
                    r += 1;
                }
            }
        }
        LocalSums { n, x, y, s }
    }

    /// `S_e` for the edge of colex rank `e`.
    pub fn edge_sum(&self, e: usize) -> f64 {
        self.s[e]
    }

    /// `Y_{v,w}` for `w ∈ ν_v`.
    pub fn pair_sum(&self, v: TripleId, w: TripleId) -> Result<f64> {
        if v.max_vertex() >= self.n || w.max_vertex() >= self.n {
            return Err(Error::InvalidInput("triple outside the graph".into()));
        }
        match v.overlap(w) {
            3 => Ok(self.y[v.rank()]),
            2 => {
                let vv = v.vertices();
                let c = vv.iter().copied().find(|&u| !w.contains(u)).expect("overlap 2");
                let d = w.vertices().into_iter().find(|&u| !v.contains(u)).expect("overlap 2");
                let ab: Vec<usize> = vv.iter().copied().filter(|&u| u != c).collect();
                Ok(self.pair_by_parts(v.rank(), w.rank(), ab[0], ab[1], c, d))
            }
            _ => Err(Error::InvalidInput(format!("{w} is not in the neighbourhood of {v}"))),
        }
    }

    #[inline]
    fn pair_by_parts(&self, v: usize, w: usize, a: usize, b: usize, c: usize, d: usize) -> f64 {
        self.y[v] + self.y[w] - self.s[erank(a, b)] - self.x[rank3(a, c, d)] - self.x[rank3(b, c, d)]
    }
}

#[inline]
fn erank(i: usize, j: usize) -> usize {
    let (lo, hi) = if i < j { (i, j) } else { (j, i) };
    hi * (hi - 1) / 2 + lo
}

impl LocalView for LocalSums {
    fn n(&self) -> usize {
        self.n
    }

    #[inline]
    fn x(&self, v: usize) -> f64 {
        self.x[v]
    }

    #[inline]
    fn y(&self, v: usize) -> f64 {
        self.y[v]
    }

    fn for_each_pair(&self, v: usize, f: &mut dyn FnMut(usize, f64)) {
        f(v, self.y[v]);
        let [a, b, c] = TripleId::from_rank(v).vertices();
        for (e0, e1, third) in [(a, b, c), (a, c, b), (b, c, a)] {
            for d in (0..self.n).filter(|&d| d != a && d != b && d != c) {
                let w = rank3(e0, e1, d);
                f(w, self.pair_by_parts(v, w, e0, e1, third, d));
            }
        }
    }
}

/// `φ(x) = (e^{ix} - 1 - ix)/x`, `φ(0) = 0`.
pub fn phi_kernel(x: f64) -> Complex64 {
    if x.abs() < 0.1 {
        let x2 = x * x;
        // (cos x - 1)/x and (sin x - x)/x by their Taylor series
        let re = -x * (0.5 - x2 * (1.0 / 24.0 - x2 * (1.0 / 720.0 - x2 / 40320.0)));
        let im = -x2 * (1.0 / 6.0 - x2 * (1.0 / 120.0 - x2 * (1.0 / 5040.0 - x2 / 362880.0)));
        Complex64::new(re, im)
    } else {
        (psi_kernel(x) - Complex64::new(0.0, x)) / x
    }
}

/// `ψ(x) = e^{ix} - 1`, evaluated without cancellation near zero.
#[inline]
pub fn psi_kernel(x: f64) -> Complex64 {
    let h = (0.5 * x).sin();
    Complex64::new(-2.0 * h * h, x.sin())
}

/// Both kernels at `x`.
pub fn kernels(x: f64) -> (Complex64, Complex64) {
    (phi_kernel(x), psi_kernel(x))
}

/// Which graph-conditional expectation to evaluate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Conditional {
    /// `E[G(e^{itD} - 1) | g]`
    R2,
    /// `E[G(e^{itD} - 1 - itD) | g]`
    R41,
    /// `E[G D̃ (e^{itD'} - 1) | g]`
    R42,
    /// `E[S (e^{itD'} - 1) | g]`
    R43,
}

/// Exact `E[· | g]` for one graph, averaging over `V` and `V'`.
pub fn graph_conditional(g: &Graph, p: f64, sigma: f64, t: f64, which: Conditional) -> Result<Complex64> {
    if !(sigma > 0.0) {
        return Err(Error::InvalidInput(format!("sigma = {sigma} must be positive")));
    }
    if t == 0.0 {
        return Err(Error::InvalidInput("t must be nonzero".into()));
    }
    let view = LocalSums::new(g, p)?;
    let m = exact_moments(g.n(), p)?;
    Ok(conditional_on_view(&view, &m, sigma, t, which))
}

pub(crate) fn conditional_on_view(
    view: &dyn LocalView,
    m: &MomentReport,
    sigma: f64,
    t: f64,
    which: Conditional,
) -> Complex64 {
    let total = triple_total(view.n());
    let mut acc = Complex64::default();
    match which {
        Conditional::R2 | Conditional::R41 => {
            for v in 0..total {
                let (xv, yv) = (view.x(v), view.y(v));
                let z = -t * yv / sigma;
                acc += match which {
                    // -(1/σ) X_v ψ(-tY_v/σ)
                    Conditional::R2 => psi_kernel(z) * (-xv / sigma),
                    // -(1/σ) X_v z φ(z)
                    _ => phi_kernel(z) * (-xv * z / sigma),
                };
            }
        }
        Conditional::R42 | Conditional::R43 => {
            for v in 0..total {
                let xv = view.x(v);
                view.for_each_pair(v, &mut |w, yvw| {
                    let weight = match which {
                        Conditional::R42 => xv * view.x(w),
                        _ => m.sigma_vw(w == v),
                    };
                    acc += psi_kernel(-t * yvw / sigma) * weight;
                });
            }
            acc /= sigma * sigma;
        }
    }
    acc
}

/// Per-graph integrands of every r-term.
#[derive(Clone, Debug, Default)]
pub(crate) struct GraphTerms {
    /// `Σ_v |X_v| Y_v² / σ³`: both `r₁` and `r₃,₁`.
    pub r1: f64,
    pub r32: f64,
    pub r33: f64,
    pub c2: Vec<Complex64>,
    pub c41: Vec<Complex64>,
    pub c42: Vec<Complex64>,
    pub c43: Vec<Complex64>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub(crate) struct Needs {
    pub r1: bool,
    pub r2: bool,
    pub r3: bool,
    pub r4: bool,
}

impl Needs {
    pub fn from_terms(terms: &[RTerm]) -> Self {
        let mut n = Needs::default();
        for t in terms {
            match t {
                RTerm::R1 => n.r1 = true,
                RTerm::R2 => n.r2 = true,
                RTerm::R3 => n.r3 = true,
                RTerm::R4 => n.r4 = true,
            }
        }
        n
    }
}

pub(crate) fn graph_terms(view: &dyn LocalView, m: &MomentReport, t_grid: &[f64], needs: Needs) -> GraphTerms {
    let total = triple_total(view.n());
    let s = m.sigma;
    let s3 = s * s * s;
    let mut out = GraphTerms::default();
    if needs.r1 || needs.r3 {
        out.r1 = (0..total).map(|v| view.x(v).abs() * view.y(v).powi(2)).sum::<f64>() / s3;
    }
    if needs.r3 {
        let (mut a, mut b) = (0.0, 0.0);
        for v in 0..total {
            let xv = view.x(v);
            view.for_each_pair(v, &mut |w, yvw| {
                a += (xv * view.x(w) * yvw).abs();
                b += m.sigma_vw(w == v) * yvw.abs();
            });
        }
        out.r32 = a / s3;
        out.r33 = b / s3;
    }
    if needs.r2 {
        out.c2 = t_grid.iter().map(|&t| conditional_on_view(view, m, s, t, Conditional::R2)).collect();
    }
    if needs.r4 {
        out.c41 = t_grid.iter().map(|&t| conditional_on_view(view, m, s, t, Conditional::R41)).collect();
        // one pass over pairs for both pair conditionals
        let k = t_grid.len();
        let (mut c42, mut c43) = (vec![Complex64::default(); k], vec![Complex64::default(); k]);
        for v in 0..total {
            let xv = view.x(v);
            view.for_each_pair(v, &mut |w, yvw| {
                let (wx, ws) = (xv * view.x(w), m.sigma_vw(w == v));
                for (i, &t) in t_grid.iter().enumerate() {
                    let z = psi_kernel(-t * yvw / s);
                    c42[i] += z * wx;
                    c43[i] += z * ws;
                }
            });
        }
        let s2 = s * s;
        out.c42 = c42.into_iter().map(|z| z / s2).collect();
        out.c43 = c43.into_iter().map(|z| z / s2).collect();
    }
    out
}

/// One realisation of the coupling and its extension.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CouplingDraw {
    #[serde(skip)]
    pub graph: Option<Graph>,
    pub v: TripleId,
    pub vp: TripleId,
    pub w: f64,
    pub wp: f64,
    pub wpp: f64,
    pub g: f64,
    pub d: f64,
    pub dtilde: f64,
    pub dprime: f64,
    pub s: f64,
}

/// Draws `(V, V')` for `g` and evaluates every coupling variable.
pub fn draw_coupling<R: Rng>(g: &Graph, p: f64, sigma: f64, rng: &mut R) -> Result<CouplingDraw> {
    let view = LocalSums::new(g, p)?;
    let mut d = draw_on_view(&view, p, sigma, rng)?;
    d.graph = Some(g.clone());
    Ok(d)
}

pub fn draw_on_view<R: Rng>(view: &LocalSums, p: f64, sigma: f64, rng: &mut R) -> Result<CouplingDraw> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidInput(format!("sigma = {sigma} must be positive")));
    }
    let n = view.n();
    let m = exact_moments(n, p)?;
    let c3 = triple_total(n) as f64;
    let nu = neighborhood_size(n);
    let v = rng.random_range(0..triple_total(n));
    let k = rng.random_range(0..nu);
    let (mut vp, mut yvw, mut i) = (v, 0.0, 0);
    view.for_each_pair(v, &mut |w, y| {
        if i == k {
            vp = w;
            yvw = y;
        }
        i += 1;
    });
    let w = view.x.iter().sum::<f64>() / sigma;
    let wp = w + -view.y(v) / sigma;
    let wpp = w + -yvw / sigma;
    Ok(CouplingDraw {
        graph: None,
        v: TripleId::from_rank(v),
        vp: TripleId::from_rank(vp),
        w,
        wp,
        wpp,
        g: -c3 * view.x(v) / sigma,
        // stored as the realised increments so W' - W = D holds bit for bit
        d: wp - w,
        dtilde: -(nu as f64) * view.x(vp) / sigma,
        dprime: wpp - w,
        s: c3 * nu as f64 / (sigma * sigma) * m.sigma_vw(vp == v),
    })
}

/// A Monte Carlo r-term with its batch-means standard error.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RTermEstimate {
    pub name: String,
    pub value: f64,
    pub std_error: f64,
    pub samples: u64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub t: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RTerm {
    R1,
    R2,
    R3,
    R4,
}

/// `count` log-spaced points in `[lo, hi]`.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..count).map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp()).collect()
}

pub fn default_t_grid() -> Vec<f64> {
    log_grid(1e-2, 10.0, 24)
}

/// Estimates for one `(n, p)`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct REstimates {
    pub n: usize,
    pub p: f64,
    pub samples: u64,
    pub seed: u64,
    pub t_grid: Vec<f64>,
    pub terms: Vec<RTermEstimate>,
}

impl REstimates {
    pub fn get(&self, name: &str) -> Option<&RTermEstimate> {
        self.terms.iter().find(|e| e.name == name && e.t.is_none())
    }

    pub fn at(&self, name: &str, t: f64) -> Option<&RTermEstimate> {
        self.terms.iter().find(|e| e.name == name && e.t.is_some_and(|s| (s - t).abs() <= 1e-12 * t.abs()))
    }

    fn value(&self, name: &str) -> Option<f64> {
        self.get(name).map(|e| e.value)
    }
}

/// Running complex mean and `Σ|z - mean|²` (Welford).
#[derive(Clone, Copy, Debug, Default)]
pub(crate) struct ComplexWelford {
    pub count: f64,
    pub mean: Complex64,
    pub m2: f64,
}

impl ComplexWelford {
    pub fn push(&mut self, z: Complex64) {
        self.count += 1.0;
        let delta = z - self.mean;
        self.mean += delta / self.count;
        self.m2 += (delta * (z - self.mean).conj()).re;
    }

    pub fn merge(&mut self, o: &ComplexWelford) {
        if o.count == 0.0 {
            return;
        }
        let total = self.count + o.count;
        let delta = o.mean - self.mean;
        self.m2 += o.m2 + delta.norm_sqr() * self.count * o.count / total;
        self.mean += delta * (o.count / total);
        self.count = total;
    }

    /// Plug-in variance `E|Z - EZ|²`.
    pub fn variance(&self) -> f64 {
        if self.count > 0.0 {
            (self.m2 / self.count).max(0.0)
        } else {
            f64::NAN
        }
    }
}

#[derive(Clone, Debug, Default)]
struct BatchAcc {
    r1: Vec<f64>,
    r32: Vec<f64>,
    r33: Vec<f64>,
    c2: Vec<ComplexWelford>,
    c41: Vec<ComplexWelford>,
    c42: Vec<ComplexWelford>,
    c43: Vec<ComplexWelford>,
}

fn push_all(acc: &mut Vec<ComplexWelford>, zs: &[Complex64]) {
    if acc.len() < zs.len() {
        acc.resize(zs.len(), ComplexWelford::default());
    }
    for (a, z) in acc.iter_mut().zip(zs) {
        a.push(*z);
    }
}

fn spread(values: &[f64]) -> f64 {
    let b = values.len() as f64;
    let mean = values.iter().sum::<f64>() / b;
    (values.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (b - 1.0) / b).sqrt()
}

/// Monte Carlo r-terms at `(n, p)`.
///
/// Each graph contributes exact inner averages over `(V, V')`; `r₁` and the
/// `r₃` pieces are then plain means over graphs, while `r₂` and `r₄` use the
/// variance across graphs of the complex graph conditionals. Standard errors
/// come from 16 contiguous batches of sample indices.
pub fn estimate_r(n: usize, p: f64, samples: u64, t_grid: &[f64], which: &[RTerm], seed: u64) -> Result<REstimates> {
    if samples < 1000 {
        return Err(Error::InvalidInput(format!("at least 1000 samples are required, got {samples}")));
    }
    let needs = Needs::from_terms(which);
    if (needs.r2 || needs.r4) && t_grid.is_empty() {
        return Err(Error::InvalidInput("r2 and r4 need a nonempty t grid".into()));
    }
    if t_grid.iter().any(|t| !(t.is_finite() && *t != 0.0)) {
        return Err(Error::InvalidInput("t grid values must be finite and nonzero".into()));
    }
    let cfg = SamplerConfig::new(n, p, seed, 0)?;
    let m = exact_moments(n, p)?;
    let batches = DEFAULT_BATCHES as u64;
    let size = samples / batches;
    let accs: Vec<BatchAcc> = (0..batches)
        .into_par_iter()
        .map(|b| {
            let lo = b * size;
            let hi = if b + 1 == batches { samples } else { lo + size };
            let mut acc = BatchAcc::default();
            for i in lo..hi {
                let g = gnp_unchecked(&cfg, i);
                let view = LocalSums::build(&g, p);
                let gt = graph_terms(&view, &m, t_grid, needs);
                acc.r1.push(gt.r1);
                acc.r32.push(gt.r32);
                acc.r33.push(gt.r33);
                push_all(&mut acc.c2, &gt.c2);
                push_all(&mut acc.c41, &gt.c41);
                push_all(&mut acc.c42, &gt.c42);
                push_all(&mut acc.c43, &gt.c43);
            }
            acc
        })
        .collect();

    let mut terms = Vec::new();
    let est = |name: &str, value: f64, se: f64, t: Option<f64>| RTermEstimate {
        name: name.to_string(),
        value,
        std_error: se,
        samples,
        t,
    };
    let cat =
        |f: &dyn Fn(&BatchAcc) -> &Vec<f64>| -> Vec<f64> { accs.iter().flat_map(|a| f(a).iter().copied()).collect() };
    if needs.r1 || needs.r3 {
        let (v, se) = batch_means(&cat(&|a| &a.r1), DEFAULT_BATCHES);
        if needs.r1 {
            terms.push(est("r1", v, se, None));
        }
        if needs.r3 {
            terms.push(est("r3_1", v, se, None));
            let (v2, se2) = batch_means(&cat(&|a| &a.r32), DEFAULT_BATCHES);
            let (v3, se3) = batch_means(&cat(&|a| &a.r33), DEFAULT_BATCHES);
            terms.push(est("r3_2", v2, se2, None));
            terms.push(est("r3_3", v3, se3, None));
            let combined: Vec<f64> =
                accs.iter().flat_map(|a| (0..a.r1.len()).map(move |i| 0.5 * a.r1[i] + a.r32[i] + a.r33[i])).collect();
            let (vt, set) = batch_means(&combined, DEFAULT_BATCHES);
            terms.push(est("r3", vt, set, None));
        }
    }
    // sqrt(Var)/|t|^power per grid point, pooled and per batch
    let sup_family =
        |name: &str, pick: &dyn Fn(&BatchAcc) -> &Vec<ComplexWelford>, power: i32, terms: &mut Vec<RTermEstimate>| {
            let mut pooled_sup = 0.0f64;
            let mut batch_sup = vec![0.0f64; accs.len()];
            for (i, &t) in t_grid.iter().enumerate() {
                let scale = t.abs().powi(power);
                let mut pooled = ComplexWelford::default();
                let per_batch: Vec<f64> = accs
                    .iter()
                    .map(|a| {
                        pooled.merge(&pick(a)[i]);
                        pick(a)[i].variance().sqrt() / scale
                    })
                    .collect();
                let value = pooled.variance().sqrt() / scale;
                terms.push(est(name, value, spread(&per_batch), Some(t)));
                pooled_sup = pooled_sup.max(value);
                for (s, x) in batch_sup.iter_mut().zip(&per_batch) {
                    *s = s.max(*x);
                }
            }
            (pooled_sup, batch_sup)
        };
    if needs.r2 {
        let (sup, per) = sup_family("r2", &|a| &a.c2, 1, &mut terms);
        terms.push(est("r2", sup, spread(&per), None));
    }
    if needs.r4 {
        let (s1, p1) = sup_family("r4_1", &|a| &a.c41, 2, &mut terms);
        let (s2, p2) = sup_family("r4_2", &|a| &a.c42, 1, &mut terms);
        let (s3, p3) = sup_family("r4_3", &|a| &a.c43, 1, &mut terms);
        let per: Vec<f64> = (0..p1.len()).map(|i| p1[i] + p2[i] + p3[i]).collect();
        terms.push(est("r4", s1 + s2 + s3, spread(&per), None));
    }
    Ok(REstimates { n, p, samples, seed, t_grid: t_grid.to_vec(), terms })
}

/// How `r̃` is chosen when assembling the bound.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TildePolicy {
    /// `r̃ = r`, the estimate itself.
    Estimate,
    /// `r̃₃` from the regime rate with unit constant.
    Theoretical,
    Fixed(f64),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BoundReport {
    pub n: usize,
    pub p: f64,
    pub regime: Regime,
    pub rates: RegimeRates,
    pub policy: TildePolicy,
    pub inputs: BoundInputs,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub simple: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub extended: Option<f64>,
    pub warnings: Vec<String>,
    pub t_grid: Vec<f64>,
    pub estimates: Vec<RTermEstimate>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub empirical_dk: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub dkw_band: Option<f64>,
}

/// Evaluates whichever bound forms the estimates support.
pub fn assemble_bound(est: &REstimates, policy: TildePolicy) -> Result<BoundReport> {
    let rates = regime_rates(est.n, est.p)?;
    let mut warnings = Vec::new();
    let mut inputs = BoundInputs::default();
    let pick = |r: f64, theoretical: f64| match policy {
        TildePolicy::Estimate => r,
        TildePolicy::Theoretical => theoretical,
        TildePolicy::Fixed(x) => x,
    };
    let mut simple = None;
    if let (Some(r1), Some(r2)) = (est.value("r1"), est.value("r2")) {
        inputs.r1 = r1;
        inputs.r2 = r2;
        // no separate theoretical r̃₁ exists; fall back to the estimate
        inputs.r1_tilde = match policy {
            TildePolicy::Fixed(x) => x,
            _ => r1,
        };
        if inputs.r1_tilde < r1 {
            warnings.push(format!("r1_tilde {} below r1 estimate {r1}; raised to r1", inputs.r1_tilde));
            inputs.r1_tilde = r1;
        }
        if inputs.r1_tilde > 0.0 {
            simple = Some(theorem2_bound(&inputs, BoundForm::Simple)?);
        }
    }
    let mut extended = None;
    if let (Some(r3), Some(r4)) = (est.value("r3"), est.value("r4")) {
        inputs.r3 = r3;
        inputs.r4 = r4;
        inputs.r3_tilde = pick(r3, rates.r3_rate);
        if inputs.r3_tilde < r3 {
            warnings.push(format!("r3_tilde {} below r3 estimate {r3}; raised to r3", inputs.r3_tilde));
            inputs.r3_tilde = r3;
        }
        if inputs.r3_tilde > 0.0 {
            extended = Some(theorem2_bound(&inputs, BoundForm::Extended)?);
        }
    }
    if simple.is_none() && extended.is_none() {
        return Err(Error::InvalidInput("estimates support neither bound form (need r1+r2 or r3+r4)".into()));
    }
    Ok(BoundReport {
        n: est.n,
        p: est.p,
        regime: rates.regime,
        rates,
        policy,
        inputs,
        simple,
        extended,
        warnings,
        t_grid: est.t_grid.clone(),
        estimates: est.terms.clone(),
        empirical_dk: None,
        dkw_band: None,
    })
}
