//! Overlap patterns of four triples `(v, w, v', w')` with `w ∈ ν_v` and
//! `w' ∈ ν_{v'}`.
//!
//! A pattern is identified up to vertex relabelling by the multiset of
//! per-vertex membership signatures (one bit per slot). The class records
//! `m = |M(v, w, v', w')|`, the number of vertices outside `v ∪ v'` (the
//! order in `n` of its number of occurrences) and which covariance lemma
//! applies.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coupling::{phi_kernel, psi_kernel};
use crate::error::{check_probability, check_vertex_count, Error, Result};
use crate::graph::{centered_indicator, edge_union_size, local_sum, neighborhood, TripleId};
use crate::moments::exact_moments;
use crate::oracle::{blocks, Weights};
use crate::sampler::{gnp_unchecked, SamplerConfig};
use crate::stats::{ComplexNeumaier, DEFAULT_BATCHES};

/// Largest number of distinct vertices a pattern may span.
pub const MAX_SPAN: usize = 9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PatternConfig {
    pub v: TripleId,
    pub w: TripleId,
    pub vp: TripleId,
    pub wp: TripleId,
}

impl PatternConfig {
    pub fn new(v: TripleId, w: TripleId, vp: TripleId, wp: TripleId) -> Result<Self> {
        let cfg = PatternConfig { v, w, vp, wp };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.v.overlap(self.w) < 2 {
            return Err(Error::InvalidInput(format!("{} is not in the neighbourhood of {}", self.w, self.v)));
        }
        if self.vp.overlap(self.wp) < 2 {
            return Err(Error::InvalidInput(format!("{} is not in the neighbourhood of {}", self.wp, self.vp)));
        }
        if self.vertices().len() > MAX_SPAN {
            return Err(Error::Capacity(format!("pattern spans more than {MAX_SPAN} vertices")));
        }
        Ok(())
    }

    pub fn triples(&self) -> [TripleId; 4] {
        [self.v, self.w, self.vp, self.wp]
    }

    pub fn vertices(&self) -> BTreeSet<usize> {
        self.triples().iter().flat_map(|t| t.vertices()).collect()
    }

    /// The same pattern on labels `0, 1, …` in order of first appearance.
    pub fn compact(&self) -> PatternConfig {
        let mut map = BTreeMap::new();
        for t in self.triples() {
            for x in t.vertices() {
                let next = map.len();
                map.entry(x).or_insert(next);
            }
        }
        let r = |t: TripleId| {
            let [a, b, c] = t.vertices();
            TripleId::new(map[&a], map[&b], map[&c]).expect("relabelling is injective")
        };
        PatternConfig { v: r(self.v), w: r(self.w), vp: r(self.vp), wp: r(self.wp) }
    }

    /// Sorted membership signatures, bit `i` set when the vertex is in slot `i`.
    pub fn canonical(&self) -> Vec<u8> {
        let slots = self.triples();
        let mut sig: Vec<u8> = self
            .vertices()
            .into_iter()
            .map(|x| slots.iter().enumerate().fold(0u8, |s, (i, t)| s | ((t.contains(x) as u8) << i)))
            .collect();
        sig.sort_unstable();
        sig
    }
}

impl fmt::Display for PatternConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {}, {})", self.v, self.w, self.vp, self.wp)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum LemmaTag {
    L9,
    L10,
    L11,
    L12,
}

impl LemmaTag {
    /// Exponent added to `m` in the small-`p` leading term.
    pub fn offset(self) -> u32 {
        match self {
            LemmaTag::L9 => 0,
            LemmaTag::L10 | LemmaTag::L12 => 1,
            LemmaTag::L11 => 3,
        }
    }

    /// The bound family with unit constant and unit Lipschitz norms.
    pub fn bound(self, n: usize, p: f64, m: u32) -> f64 {
        let nf = n as f64;
        let m = m as i32;
        match self {
            LemmaTag::L9 => (nf * nf * (1.0 - p)).min(p.powi(m) + nf * p.powi(m + 2) + nf * nf * p.powi(m + 4)),
            LemmaTag::L10 | LemmaTag::L12 => (nf * (1.0 - p)).min(p.powi(m + 1) + nf * p.powi(m + 3)),
            LemmaTag::L11 => (1.0 - p).min(p.powi(m + 3)),
        }
    }

    pub fn family(self, m: u32) -> String {
        match self {
            LemmaTag::L9 => format!("min{{n^2(1-p), p^{m}+np^{}+n^2p^{}}}", m + 2, m + 4),
            LemmaTag::L10 | LemmaTag::L12 => format!("min{{n(1-p), p^{}+np^{}}}", m + 1, m + 3),
            LemmaTag::L11 => format!("min{{1-p, p^{}}}", m + 3),
        }
    }
}

impl fmt::Display for LemmaTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatternClass {
    /// A compact member of the class.
    pub representative: PatternConfig,
    pub canonical: Vec<u8>,
    pub m: u32,
    pub multiplicity_order: u32,
    pub lemma_tag: LemmaTag,
}

impl PatternClass {
    /// Leading exponent of the small-`p` bound, `m` plus the lemma offset.
    pub fn small_p_exponent(&self) -> u32 {
        self.m + self.lemma_tag.offset()
    }

    pub fn bound_family(&self) -> String {
        self.lemma_tag.family(self.m)
    }
}

fn lemma_tag(c: &PatternConfig) -> LemmaTag {
    let set = |ts: &[TripleId]| -> BTreeSet<usize> { ts.iter().flat_map(|t| t.vertices()).collect() };
    let vv = c.v.overlap(c.vp);
    let left = set(&[c.v, c.w]);
    let right = set(&[c.vp, c.wp]);
    let shared = left.intersection(&right).count();
    let base = set(&[c.v]).intersection(&set(&[c.vp])).copied().collect::<BTreeSet<_>>();
    let ww: BTreeSet<usize> = set(&[c.w]).intersection(&set(&[c.wp])).copied().collect();
    if vv == 1 && ww.difference(&base).next().is_none() {
        LemmaTag::L10
    } else if shared == 0 {
        LemmaTag::L11
    } else if vv == 0 && shared == 1 {
        LemmaTag::L12
    } else {
        LemmaTag::L9
    }
}

pub fn classify_pattern(cfg: PatternConfig) -> Result<PatternClass> {
    cfg.validate()?;
    let base: BTreeSet<usize> = cfg.v.vertices().into_iter().chain(cfg.vp.vertices()).collect();
    let fresh = cfg.vertices().difference(&base).count() as u32;
    Ok(PatternClass {
        representative: cfg.compact(),
        canonical: cfg.canonical(),
        m: edge_union_size(&cfg.triples()) as u32,
        multiplicity_order: fresh,
        lemma_tag: lemma_tag(&cfg),
    })
}

/// Base pair of an expansion.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Anchor {
    /// `v = v'`
    R411,
    /// `|v ∩ v'| = 2`
    R412,
    /// `|v ∩ v'| = 1`
    R413,
    /// `v ∩ v' = ∅`
    R414,
}

impl Anchor {
    pub const ALL: [Anchor; 4] = [Anchor::R411, Anchor::R412, Anchor::R413, Anchor::R414];

    pub fn base(self) -> (TripleId, TripleId) {
        let t = |a, b, c| TripleId::new(a, b, c).expect("distinct");
        let v = t(0, 1, 2);
        let vp = match self {
            Anchor::R411 => t(0, 1, 2),
            Anchor::R412 => t(0, 1, 3),
            Anchor::R413 => t(0, 3, 4),
            Anchor::R414 => t(3, 4, 5),
        };
        (v, vp)
    }
}

impl std::str::FromStr for Anchor {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "r411" => Ok(Anchor::R411),
            "r412" => Ok(Anchor::R412),
            "r413" => Ok(Anchor::R413),
            "r414" => Ok(Anchor::R414),
            _ => Err(Error::InvalidInput(format!("unknown anchor {s:?} (r411, r412, r413, r414)"))),
        }
    }
}

impl fmt::Display for Anchor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Anchor::R411 => "r411",
            Anchor::R412 => "r412",
            Anchor::R413 => "r413",
            Anchor::R414 => "r414",
        })
    }
}

/// 0 for `w = v`, 1 when the extra vertex lies in the other base triple,
/// 2 for a fresh vertex.
fn kind(v: TripleId, w: TripleId, other: TripleId) -> u8 {
    if v == w {
        return 0;
    }
    let x = w.vertices().into_iter().find(|&x| !v.contains(x)).expect("w differs from v");
    if other.contains(x) {
        1
    } else {
        2
    }
}

/// All classes of completions `(w, w')` of an anchor.
///
/// Exchanging the two sides only conjugates the covariance, so each pair is
/// oriented with `kind(w) ≥ kind(w')`; pairs of equal kind are kept in both
/// orientations.
pub fn enumerate_classes(anchor: Anchor) -> Vec<PatternClass> {
    let (v, vp) = anchor.base();
    let span: BTreeSet<usize> = v.vertices().into_iter().chain(vp.vertices()).collect();
    let n = span.len() + 2;
    let nv = neighborhood(v, n, None).expect("anchor fits");
    let nvp = neighborhood(vp, n, None).expect("anchor fits");
    let mut seen = BTreeMap::new();
    for &w in &nv {
        for &wp in &nvp {
            if kind(v, w, vp) < kind(vp, wp, v) {
                continue;
            }
            let cfg = PatternConfig { v, w, vp, wp };
            seen.entry(cfg.canonical())
                .or_insert_with(|| classify_pattern(cfg).expect("enumerated patterns are valid"));
        }
    }
    let mut out: Vec<PatternClass> = seen.into_values().collect();
    out.sort_by(|a, b| {
        (a.multiplicity_order, a.small_p_exponent(), &a.canonical).cmp(&(
            b.multiplicity_order,
            b.small_p_exponent(),
            &b.canonical,
        ))
    });
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentBoundRow {
    pub p: f64,
    /// `E|X_{v₁}⋯X_{v_k}|`
    pub exact: f64,
    /// `6(1-p)`
    pub large_p: f64,
    /// `2ᵏpᵐ`
    pub small_p: f64,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentBoundReport {
    pub triples: Vec<TripleId>,
    pub k: usize,
    pub m: u32,
    pub rows: Vec<MomentBoundRow>,
}

impl MomentBoundReport {
    pub fn violations(&self) -> usize {
        self.rows.iter().filter(|r| !r.holds).count()
    }
}

/// Exact `E|∏X|` against `min{6(1-p), 2ᵏpᵐ}`.
///
/// Only the edges of `M(v₁, …, v_k)` matter, so the expectation is a sum
/// over their `2ᵐ` states.
pub fn moment_bound_check(triples: &[TripleId], p_grid: &[f64]) -> Result<MomentBoundReport> {
    let k = triples.len();
    if k == 0 || k > 6 {
        return Err(Error::InvalidInput(format!("k = {k}: between one and six triples are supported")));
    }
    let span: BTreeSet<usize> = triples.iter().flat_map(|t| t.vertices()).collect();
    if span.len() > MAX_SPAN {
        return Err(Error::Capacity(format!("triples span {} > {MAX_SPAN} vertices", span.len())));
    }
    let edges: Vec<_> = triples.iter().flat_map(|t| t.edges()).collect::<BTreeSet<_>>().into_iter().collect();
    let m = edges.len();
    let tri_masks: Vec<u32> = triples
        .iter()
        .map(|t| t.edges().iter().fold(0u32, |s, e| s | 1 << edges.iter().position(|x| x == e).expect("edge in M")))
        .collect();
    let mut rows = Vec::with_capacity(p_grid.len());
    for &p in p_grid {
        check_probability(p)?;
        let p3 = p * p * p;
        let mut acc = crate::stats::Neumaier::new();
        for state in 0u32..1 << m {
            let ones = state.count_ones() as i32;
            let weight = p.powi(ones) * (1.0 - p).powi(m as i32 - ones);
            let prod: f64 = tri_masks.iter().map(|&t| if state & t == t { 1.0 - p3 } else { p3 }).product();
            acc.add(weight * prod);
        }
        let exact = acc.value();
        let large_p = 6.0 * (1.0 - p);
        let small_p = 2f64.powi(k as i32) * p.powi(m as i32);
        rows.push(MomentBoundRow { p, exact, large_p, small_p, holds: exact <= large_p.min(small_p) * (1.0 + 1e-12) });
    }
    Ok(MomentBoundReport { triples: triples.to_vec(), k, m: m as u32, rows })
}

/// The test function applied to the local sum.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kernel {
    /// `y ↦ φ(ty/σ)`, Lipschitz constant `t/(2σ)`
    Phi,
    /// `y ↦ ψ(ty/σ)`, Lipschitz constant `t/σ`
    Psi,
    Zero,
}

impl Kernel {
    fn eval(self, y: f64, t: f64, sigma: f64) -> Complex64 {
        match self {
            Kernel::Phi => phi_kernel(t * y / sigma),
            Kernel::Psi => psi_kernel(t * y / sigma),
            Kernel::Zero => Complex64::default(),
        }
    }

    pub fn lipschitz(self, t: f64, sigma: f64) -> f64 {
        match self {
            Kernel::Phi => t.abs() / (2.0 * sigma),
            Kernel::Psi => t.abs() / sigma,
            Kernel::Zero => 0.0,
        }
    }
}

/// Which local sum the kernel is applied to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum LocalArg {
    /// `Y_v` and `Y_{v'}`
    Single,
    /// `Y_{v,w}` and `Y_{v',w'}`
    #[default]
    Pair,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "mode")]
pub enum CovMode {
    Exact,
    Mc { samples: u64, seed: u64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CovCheck {
    pub n: usize,
    pub p: f64,
    pub t: f64,
    pub mode: CovMode,
    pub kernel: Kernel,
    pub arg: LocalArg,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CovReport {
    pub pattern: PatternConfig,
    pub lemma: LemmaTag,
    pub m: u32,
    pub check: CovCheck,
    pub cov: Complex64,
    pub abs_cov: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub std_error: Option<f64>,
    /// `‖f'‖‖g'‖` times the lemma's bound family with unit constant.
    pub bound: f64,
    /// `|Cov| / bound`, zero when both vanish.
    pub ratio: f64,
}

/// `|Cov(X_v X_w f(Y), X_{v'} X_{w'} f(Y'))|` for the class representative.
pub fn pattern_cov_check(cls: &PatternClass, check: &CovCheck) -> Result<CovReport> {
    check_vertex_count(check.n)?;
    check_probability(check.p)?;
    if !(check.t.is_finite() && check.t != 0.0) {
        return Err(Error::InvalidInput("t must be finite and nonzero".into()));
    }
    let cfg = cls.representative.compact();
    if cfg.vertices().len() > check.n {
        return Err(Error::InvalidInput(format!("pattern needs {} vertices, n = {}", cfg.vertices().len(), check.n)));
    }
    let sigma = exact_moments(check.n, check.p)?.sigma;
    let (cov, std_error) = match check.mode {
        CovMode::Exact => (exact_cov(&cfg, check, sigma)?, None),
        CovMode::Mc { samples, seed } => {
            let (c, se) = mc_cov(&cfg, check, sigma, samples, seed)?;
            (c, Some(se))
        }
    };
    let lip = check.kernel.lipschitz(check.t, sigma);
    let bound = lip * lip * cls.lemma_tag.bound(check.n, check.p, cls.m);
    let abs_cov = cov.norm();
    let ratio = if bound > 0.0 {
        abs_cov / bound
    } else if abs_cov == 0.0 {
        0.0
    } else {
        f64::INFINITY
    };
    Ok(CovReport { pattern: cfg, lemma: cls.lemma_tag, m: cls.m, check: *check, cov, abs_cov, std_error, bound, ratio })
}

fn sum_sets(cfg: &PatternConfig, n: usize, arg: LocalArg) -> Result<[Vec<TripleId>; 2]> {
    Ok(match arg {
        LocalArg::Single => [neighborhood(cfg.v, n, None)?, neighborhood(cfg.vp, n, None)?],
        LocalArg::Pair => [neighborhood(cfg.v, n, Some(cfg.w))?, neighborhood(cfg.vp, n, Some(cfg.wp))?],
    })
}

fn exact_cov(cfg: &PatternConfig, check: &CovCheck, sigma: f64) -> Result<Complex64> {
    let n = check.n;
    if n > crate::oracle::MAX_ORACLE_N {
        return Err(Error::Capacity(format!("exact covariance needs n <= {}", crate::oracle::MAX_ORACLE_N)));
    }
    let (p, t) = (check.p, check.t);
    let p3 = p * p * p;
    let mask = |tr: &TripleId| tr.edges().iter().fold(0u64, |s, e| s | 1 << e.rank());
    let x = move |m: u64, tm: u64| if m & tm == tm { 1.0 - p3 } else { -p3 };
    let slots: Vec<u64> = cfg.triples().iter().map(mask).collect();
    let [s1, s2] = sum_sets(cfg, n, check.arg)?;
    let (y1, y2): (Vec<u64>, Vec<u64>) = (s1.iter().map(mask).collect(), s2.iter().map(mask).collect());
    let pair = |m: u64| {
        let a = check.kernel.eval(y1.iter().map(|&u| x(m, u)).sum(), t, sigma) * (x(m, slots[0]) * x(m, slots[1]));
        let b = check.kernel.eval(y2.iter().map(|&u| x(m, u)).sum(), t, sigma) * (x(m, slots[2]) * x(m, slots[3]));
        (a, b)
    };
    let weights = Weights::new(n, p);
    let ranges = blocks(n);
    let sum = |f: &(dyn Fn(u64) -> Complex64 + Sync)| {
        let parts: Vec<ComplexNeumaier> = ranges
            .clone()
            .into_par_iter()
            .map(|r| {
                let mut acc = ComplexNeumaier::new();
                for m in r {
                    acc.add(f(m) * weights.of(m));
                }
                acc
            })
            .collect();
        let mut total = ComplexNeumaier::new();
        parts.iter().for_each(|q| total.merge(q));
        total.value()
    };
    let ea = sum(&|m| pair(m).0);
    let eb = sum(&|m| pair(m).1);
    Ok(sum(&|m| {
        let (a, b) = pair(m);
        (a - ea) * (b - eb).conj()
    }))
}

fn mc_cov(cfg: &PatternConfig, check: &CovCheck, sigma: f64, samples: u64, seed: u64) -> Result<(Complex64, f64)> {
    if samples < 10_000 {
        return Err(Error::InvalidInput(format!("mc mode needs at least 10000 samples, got {samples}")));
    }
    let sampler = SamplerConfig::new(check.n, check.p, seed, 0)?;
    let (p, t) = (check.p, check.t);
    let (ws, wps) = match check.arg {
        LocalArg::Single => (None, None),
        LocalArg::Pair => (Some(cfg.w), Some(cfg.wp)),
    };
    let draws: Vec<(Complex64, Complex64)> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let g = gnp_unchecked(&sampler, i);
            let x = |tr| centered_indicator(&g, p, tr).expect("in range");
            let a = check.kernel.eval(local_sum(&g, p, cfg.v, ws).expect("valid"), t, sigma) * (x(cfg.v) * x(cfg.w));
            let b =
                check.kernel.eval(local_sum(&g, p, cfg.vp, wps).expect("valid"), t, sigma) * (x(cfg.vp) * x(cfg.wp));
            (a, b)
        })
        .collect();
    let cov = |d: &[(Complex64, Complex64)]| crate::cstats::complex_stats(d).map(|s| s.cov_uv);
    let total = cov(&draws)?;
    let size = draws.len() / DEFAULT_BATCHES;
    let per: Vec<f64> = (0..DEFAULT_BATCHES)
        .map(|b| {
            let hi = if b + 1 == DEFAULT_BATCHES { draws.len() } else { (b + 1) * size };
            cov(&draws[b * size..hi]).map(|c| c.norm())
        })
        .collect::<Result<_>>()?;
    let mean = per.iter().sum::<f64>() / per.len() as f64;
    let var = per.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (per.len() - 1) as f64;
    Ok((total, (var / per.len() as f64).sqrt()))
}

/// One CSV line per class: id, lemma, m, multiplicity order, bound family,
/// measured value, ratio.
pub fn classes_csv(classes: &[PatternClass], reports: Option<&[CovReport]>) -> String {
    let mut out = String::from("class_id,lemma,m,multiplicity_order,bound_family,measured,ratio\n");
    for (i, c) in classes.iter().enumerate() {
        let (measured, ratio) = match reports.and_then(|r| r.get(i)) {
            Some(r) => (format!("{:e}", r.abs_cov), format!("{:e}", r.ratio)),
            None => (String::new(), String::new()),
        };
        out.push_str(&format!(
            "{i},{},{},{},\"{}\",{measured},{ratio}\n",
            c.lemma_tag,
            c.m,
            c.multiplicity_order,
            c.bound_family()
        ));
    }
    out
}
