//! Γ and Γ° hypergeometric series with values in the sector algebras and
//! modules, and term-level checks of the GKZ equations they satisfy.

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::PI;
use std::sync::Arc;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use statrs::function::gamma::{digamma, ln_gamma};

use crate::error::{Error, Result};
use crate::exactnum::rational_to_f64;
use crate::fans::Fan;
use crate::ktheory::KTheory;
use crate::lattice::{self, IntMatrix};

const TWO_PI_I: Complex64 = Complex64::new(0.0, 2.0 * PI);

/// Truncation and evaluation point of a series.
#[derive(Clone, Debug)]
pub struct SeriesConfig {
    /// Bound on `Σ_{l_i > 0} l_i` for the enumerated exponents.
    pub truncation: u32,
    /// Chosen values of `log x_i`; this fixes the branch.
    pub log_x: Vec<Complex64>,
    /// Relative size of the last shell above which a warning is attached.
    pub tolerance: f64,
}

impl SeriesConfig {
    pub fn new(truncation: u32, log_x: Vec<Complex64>) -> Self {
        SeriesConfig {
            truncation,
            log_x,
            tolerance: 1e-10,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    /// Values in `⊕_γ H_γ`.
    Plain,
    /// Values in `⊕_γ H_γ^c`.
    Compact,
}

/// One summand: `x^{l + D/2πi}` times `coeff`, where `coeff` is the value at
/// `log x = 0` in the basis of the sector algebra or module.
#[derive(Clone, Debug)]
pub struct Term {
    pub sector: usize,
    pub l: Vec<BigRational>,
    pub coeff: Vec<Complex64>,
}

#[derive(Clone, Debug)]
pub struct GammaValue {
    pub c: Vec<i64>,
    pub kind: Kind,
    pub sectors: Vec<Vec<Complex64>>,
    /// Norm of the outermost shell relative to the whole value.
    pub tail: f64,
    pub warnings: Vec<String>,
}

/// Integer relations `Σ l_i v_i = 0`.
pub fn relation_lattice(fan: &Fan) -> IntMatrix {
    point_snf(fan).kernel_basis()
}

fn point_snf(fan: &Fan) -> lattice::Snf {
    let a = lattice::transpose(&fan.points);
    lattice::smith_normal_form(&a, fan.n())
}

fn positive_part(l: &[BigRational]) -> BigRational {
    l.iter().filter(|x| x.is_positive()).sum()
}

/// All `l` with `Σ l_i v_i = -c`, `l - γ ∈ ℤⁿ` and `Σ_{l_i>0} l_i ≤ k`,
/// ordered by that sum and then lexicographically.
pub fn enumerate_l(fan: &Fan, c: &[i64], sector: usize, k: u32) -> Vec<Vec<BigRational>> {
    let n = fan.n();
    let snf = point_snf(fan);
    let b = &fan.boxes[sector];
    let rhs: Vec<i64> = c.iter().zip(&b.gamma).map(|(ci, gi)| -ci - gi).collect();
    let Some(k0) = snf.solve_integer(&rhs) else {
        return Vec::new();
    };
    let base: Vec<BigRational> = (0..n)
        .map(|i| &b.coords[i] + BigRational::from_integer(k0[i].into()))
        .collect();
    let kernel = snf.kernel_basis();
    let r = kernel.len();
    let bound = BigRational::from_integer(BigInt::from(2 * k as i64 + fan.degree(c).unwrap_or(0).abs() + 1));
    let kmax = BigRational::from_integer(BigInt::from(k));
    let accept = |l: &[BigRational]| l.iter().all(|x| x.abs() <= bound) && positive_part(l) <= kmax;
    if r == 0 {
        return if accept(&base) { vec![base] } else { Vec::new() };
    }
    // bound each kernel coordinate through an invertible r×r minor
    let rows = invertible_rows(&kernel, n);
    let minor: lattice::RatMatrix = rows
        .iter()
        .map(|&i| (0..r).map(|j| BigRational::from_integer(kernel[j][i].into())).collect())
        .collect();
    let inv = lattice::inverse(&minor).expect("minor chosen invertible");
    let spans: Vec<i64> = (0..r)
        .map(|j| {
            let s: BigRational = rows
                .iter()
                .enumerate()
                .map(|(x, &i)| inv[j][x].abs() * (&bound + base[i].abs()))
                .sum();
            s.ceil().to_integer().to_i64().expect("bound fits")
        })
        .collect();
    let mut out = Vec::new();
    let mut t: Vec<i64> = spans.iter().map(|s| -s).collect();
    loop {
        let l: Vec<BigRational> = (0..n)
            .map(|i| {
                let shift: i64 = (0..r).map(|j| t[j] * kernel[j][i]).sum();
                &base[i] + BigRational::from_integer(shift.into())
            })
            .collect();
        if accept(&l) {
            out.push(l);
        }
        let mut j = 0;
        loop {
            if j == r {
                out.sort_by(|a, b| positive_part(a).cmp(&positive_part(b)).then_with(|| a.cmp(b)));
                return out;
            }
            t[j] += 1;
            if t[j] <= spans[j] {
                break;
            }
            t[j] = -spans[j];
            j += 1;
        }
    }
}

fn invertible_rows(kernel: &IntMatrix, n: usize) -> Vec<usize> {
    let r = kernel.len();
    let mut rows = Vec::new();
    let mut current: lattice::RatMatrix = Vec::new();
    for i in 0..n {
        let mut trial = current.clone();
        trial.push((0..r).map(|j| BigRational::from_integer(kernel[j][i].into())).collect());
        if lattice::rank(&trial) == trial.len() {
            current = trial;
            rows.push(i);
            if rows.len() == r {
                break;
            }
        }
    }
    rows
}

/// `ζ(s, a) = Σ_{k≥0} (k + a)^{-s}` for `s ≥ 2`, `a > 0`, by Euler–Maclaurin.
pub fn hurwitz_zeta(s: u32, a: f64) -> f64 {
    const N: usize = 16;
    const B2K: [f64; 8] = [
        1.0 / 6.0,
        -1.0 / 30.0,
        1.0 / 42.0,
        -1.0 / 30.0,
        5.0 / 66.0,
        -691.0 / 2730.0,
        7.0 / 6.0,
        -3617.0 / 510.0,
    ];
    let s_f = s as f64;
    let mut sum: f64 = (0..N).map(|k| (k as f64 + a).powf(-s_f)).sum();
    let x = N as f64 + a;
    sum += x.powf(1.0 - s_f) / (s_f - 1.0) + 0.5 * x.powf(-s_f);
    // B_{2j}/(2j)! · s(s+1)…(s+2j-2) · x^{-s-2j+1}
    let mut rising = s_f;
    let mut fact = 2.0;
    let mut xp = x.powf(-s_f - 1.0);
    for (j, b) in B2K.iter().enumerate() {
        let j = j + 1;
        sum += b / fact * rising * xp;
        rising *= (s_f + 2.0 * j as f64 - 1.0) * (s_f + 2.0 * j as f64);
        fact *= (2.0 * j as f64 + 1.0) * (2.0 * j as f64 + 2.0);
        xp /= x * x;
    }
    sum
}

/// Taylor coefficients of `t ↦ 1/Γ(a + t)` at 0, up to `t^order`.
pub fn recip_gamma_jet(a: &BigRational, order: usize) -> Vec<f64> {
    let floor = a.floor();
    let (a0, steps) = if floor == *a {
        (1.0, (a - BigRational::from_integer(1.into())).to_integer())
    } else {
        (rational_to_f64(&(a - &floor)), floor.to_integer())
    };
    let steps = steps.to_i64().expect("shift fits");
    // log(1/Γ(a0 + t))
    let mut log = vec![0.0; order + 1];
    log[0] = -ln_gamma(a0);
    if order >= 1 {
        log[1] = -digamma(a0);
    }
    for (k, slot) in log.iter_mut().enumerate().skip(2) {
        let sign = if k % 2 == 0 { -1.0 } else { 1.0 };
        *slot = sign * hurwitz_zeta(k as u32, a0) / k as f64;
    }
    let mut jet = exp_series(&log);
    let mut b = a0;
    for _ in 0..steps.max(0) {
        // 1/Γ(b + 1 + t) = 1/((b + t) Γ(b + t))
        let mut h = vec![0.0; order + 1];
        for k in 0..=order {
            let prev = if k > 0 { h[k - 1] } else { 0.0 };
            h[k] = (jet[k] - prev) / b;
        }
        jet = h;
        b += 1.0;
    }
    for _ in 0..(-steps).max(0) {
        // 1/Γ(b - 1 + t) = (b - 1 + t)/Γ(b + t)
        let c = b - 1.0;
        let mut h = vec![0.0; order + 1];
        for k in 0..=order {
            h[k] = c * jet[k] + if k > 0 { jet[k - 1] } else { 0.0 };
        }
        jet = h;
        b = c;
    }
    jet
}

fn exp_series(log: &[f64]) -> Vec<f64> {
    // f' = g' f with f(0) = exp(g(0))
    let n = log.len();
    let mut f = vec![0.0; n];
    f[0] = log[0].exp();
    for k in 1..n {
        let mut acc = 0.0;
        for j in 1..=k {
            acc += j as f64 * log[j] * f[k - j];
        }
        f[k] = acc / k as f64;
    }
    f
}

fn is_negative_integer(q: &BigRational) -> bool {
    q.is_integer() && q.is_negative()
}

fn complex(v: &[BigRational]) -> Vec<Complex64> {
    v.iter().map(|q| Complex64::new(rational_to_f64(q), 0.0)).collect()
}

/// `D_i / 2πi` in sector `s`.
fn shifted_class(kt: &KTheory, s: usize, i: usize) -> Vec<Complex64> {
    complex(kt.log_class(s, i)).into_iter().map(|z| z / TWO_PI_I).collect()
}

fn jet_at(kt: &KTheory, s: usize, i: usize, jet: &[f64]) -> Vec<Complex64> {
    let alg = &kt.sectors[s].algebra;
    let coeffs: Vec<Complex64> = jet.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    alg.power_series(&shifted_class(kt, s, i), &coeffs)
}

fn jet_order(kt: &KTheory, s: usize) -> usize {
    kt.sectors[s].algebra.socle_degree() + 2
}

fn gamma_term(kt: &KTheory, s: usize, l: &[BigRational]) -> Option<Vec<Complex64>> {
    let sector = &kt.sectors[s];
    let alg = &sector.algebra;
    let mut neg: Vec<usize> = (0..l.len()).filter(|&i| is_negative_integer(&l[i])).collect();
    neg.extend(&sector.element.sigma);
    neg.sort_unstable();
    if !kt.fan.is_simplex(&neg) {
        return None;
    }
    let order = jet_order(kt, s);
    let mut acc: Vec<Complex64> = alg.one();
    for (i, li) in l.iter().enumerate() {
        let jet = recip_gamma_jet(&(li + BigRational::from_integer(1.into())), order);
        acc = alg.mul(&acc, &jet_at(kt, s, i, &jet));
    }
    Some(acc)
}

fn gamma_circ_term(kt: &KTheory, s: usize, l: &[BigRational]) -> Result<Option<Vec<Complex64>>> {
    let sector = &kt.sectors[s];
    let alg = &sector.algebra;
    let sigma_l: Vec<usize> = (0..l.len()).filter(|&i| is_negative_integer(&l[i])).collect();
    let mut full: Vec<usize> = sigma_l.iter().chain(&sector.element.sigma).copied().collect();
    full.sort_unstable();
    if !kt.fan.is_simplex(&full) {
        return Ok(None);
    }
    if !sector.quotient.is_interior(&sigma_l) {
        let lab: Vec<usize> = sigma_l.iter().map(|i| i + 1).collect();
        return Err(Error::NotInterior(format!(
            "{lab:?} in sector {:?}",
            sector.element.gamma
        )));
    }
    let order = jet_order(kt, s);
    let mut acc: Vec<Complex64> = alg.one();
    for (i, li) in l.iter().enumerate() {
        let jet = recip_gamma_jet(&(li + BigRational::from_integer(1.into())), order);
        let factor = if sigma_l.contains(&i) {
            // the jet vanishes to first order; divide out t = D_i/2πi
            let reduced: Vec<f64> = jet[1..].to_vec();
            jet_at(kt, s, i, &reduced).into_iter().map(|z| z / TWO_PI_I).collect()
        } else {
            jet_at(kt, s, i, &jet)
        };
        acc = alg.mul(&acc, &factor);
    }
    let gen: Vec<Complex64> = sector.module.generator(&sigma_l);
    Ok(Some(sector.module.act(&acc, &gen)))
}

/// Terms of `Γ_c` with `Σ_{l_i>0} l_i ≤ k`.
pub fn gamma_terms(kt: &KTheory, c: &[i64], k: u32) -> Result<Vec<Term>> {
    kt.fan.require_gorenstein()?;
    check_point(kt, c)?;
    Ok((0..kt.sectors.len())
        .flat_map(|s| {
            enumerate_l(&kt.fan, c, s, k)
                .into_iter()
                .filter_map(move |l| gamma_term(kt, s, &l).map(|coeff| Term { sector: s, l, coeff }))
        })
        .collect())
}

/// Terms of `Γ°_c` with `Σ_{l_i>0} l_i ≤ k`.
pub fn gamma_circ_terms(kt: &KTheory, c: &[i64], k: u32) -> Result<Vec<Term>> {
    kt.fan.require_gorenstein()?;
    check_point(kt, c)?;
    if !kt.fan.in_interior(c) {
        return Err(Error::InteriorRequired(c.to_vec()));
    }
    let mut out = Vec::new();
    for s in 0..kt.sectors.len() {
        for l in enumerate_l(&kt.fan, c, s, k) {
            if let Some(coeff) = gamma_circ_term(kt, s, &l)? {
                out.push(Term { sector: s, l, coeff });
            }
        }
    }
    Ok(out)
}

fn check_point(kt: &KTheory, c: &[i64]) -> Result<()> {
    if c.len() != kt.fan.rank {
        return Err(Error::Input(format!("point needs {} coordinates", kt.fan.rank)));
    }
    if !kt.fan.in_cone(c) {
        return Err(Error::NotInCone(c.to_vec()));
    }
    Ok(())
}

fn x_power(l: &[BigRational], log_x: &[Complex64]) -> Complex64 {
    l.iter()
        .zip(log_x)
        .map(|(li, lx)| lx * rational_to_f64(li))
        .sum::<Complex64>()
        .exp()
}

/// `exp(Σ_i D_i log x_i / 2πi)` in sector `s`.
pub fn log_twist(kt: &KTheory, s: usize, log_x: &[Complex64]) -> Vec<Complex64> {
    let alg = &kt.sectors[s].algebra;
    let mut n: Vec<Complex64> = alg.zero();
    for (i, lx) in log_x.iter().enumerate() {
        for (a, d) in n.iter_mut().zip(shifted_class(kt, s, i)) {
            *a += d * lx;
        }
    }
    alg.exp(&n)
}

fn apply(kt: &KTheory, s: usize, kind: Kind, a: &[Complex64], v: &[Complex64]) -> Vec<Complex64> {
    match kind {
        Kind::Plain => kt.sectors[s].algebra.mul(a, v),
        Kind::Compact => kt.sectors[s].module.act(a, v),
    }
}

fn zero_value(kt: &KTheory, kind: Kind) -> Vec<Vec<Complex64>> {
    kt.sectors
        .iter()
        .map(|s| match kind {
            Kind::Plain => s.algebra.zero(),
            Kind::Compact => s.module.zero(),
        })
        .collect()
}

fn norm(v: &[Vec<Complex64>]) -> f64 {
    v.iter().flatten().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Sums terms at a point. `twist` selects whether the factors
/// `x^{D/2πi}` are applied.
pub fn sum_terms(kt: &KTheory, kind: Kind, terms: &[Term], log_x: &[Complex64], twist: bool) -> Vec<Vec<Complex64>> {
    let mut out = zero_value(kt, kind);
    for t in terms {
        let w = x_power(&t.l, log_x);
        for (o, c) in out[t.sector].iter_mut().zip(&t.coeff) {
            *o += c * w;
        }
    }
    if twist {
        for (s, v) in out.iter_mut().enumerate() {
            *v = apply(kt, s, kind, &log_twist(kt, s, log_x), v);
        }
    }
    out
}

fn value(kt: &KTheory, kind: Kind, c: &[i64], terms: Vec<Term>, cfg: &SeriesConfig) -> Result<GammaValue> {
    if cfg.log_x.len() != kt.n() {
        return Err(Error::Input(format!("log x needs {} entries", kt.n())));
    }
    let sectors = sum_terms(kt, kind, &terms, &cfg.log_x, true);
    let edge = BigRational::from_integer(BigInt::from(cfg.truncation.saturating_sub(1)));
    let shell: Vec<Term> = terms.into_iter().filter(|t| positive_part(&t.l) > edge).collect();
    let total = norm(&sectors);
    let tail = if total == 0.0 {
        0.0
    } else {
        norm(&sum_terms(kt, kind, &shell, &cfg.log_x, true)) / total
    };
    let mut warnings = Vec::new();
    if tail > cfg.tolerance {
        warnings.push(format!(
            "truncation too small: outermost shell has relative size {tail:.3e}"
        ));
    }
    Ok(GammaValue {
        c: c.to_vec(),
        kind,
        sectors,
        tail,
        warnings,
    })
}

pub fn gamma_series(kt: &KTheory, c: &[i64], cfg: &SeriesConfig) -> Result<GammaValue> {
    let terms = gamma_terms(kt, c, cfg.truncation)?;
    value(kt, Kind::Plain, c, terms, cfg)
}

pub fn gamma_circ_series(kt: &KTheory, c: &[i64], cfg: &SeriesConfig) -> Result<GammaValue> {
    let terms = gamma_circ_terms(kt, c, cfg.truncation)?;
    value(kt, Kind::Compact, c, terms, cfg)
}

/// A family `{Φ_c}` of candidate solutions of the GKZ system.
pub trait SolutionFamily: Send + Sync {
    fn name(&self) -> &'static str;
    fn kind(&self) -> Kind;
    fn terms(&self, kt: &KTheory, c: &[i64], k: u32) -> Result<Vec<Term>>;
    /// Whether the terms carry the factor `x^{D/2πi}`.
    fn twisted(&self) -> bool {
        true
    }
    /// Whether `Φ_c` is defined at `c`.
    fn defined_at(&self, fan: &Fan, c: &[i64]) -> bool {
        match self.kind() {
            Kind::Plain => fan.in_cone(c),
            Kind::Compact => fan.in_interior(c),
        }
    }

    fn evaluate(&self, kt: &KTheory, c: &[i64], cfg: &SeriesConfig) -> Result<GammaValue> {
        let terms = self.terms(kt, c, cfg.truncation)?;
        if self.twisted() {
            value(kt, self.kind(), c, terms, cfg)
        } else {
            Ok(GammaValue {
                c: c.to_vec(),
                kind: self.kind(),
                sectors: sum_terms(kt, self.kind(), &terms, &cfg.log_x, false),
                tail: 0.0,
                warnings: Vec::new(),
            })
        }
    }
}

pub struct GammaFamily;

impl SolutionFamily for GammaFamily {
    fn name(&self) -> &'static str {
        "gamma"
    }
    fn kind(&self) -> Kind {
        Kind::Plain
    }
    fn terms(&self, kt: &KTheory, c: &[i64], k: u32) -> Result<Vec<Term>> {
        gamma_terms(kt, c, k)
    }
}

pub struct GammaCircFamily;

impl SolutionFamily for GammaCircFamily {
    fn name(&self) -> &'static str {
        "gamma-circ"
    }
    fn kind(&self) -> Kind {
        Kind::Compact
    }
    fn terms(&self, kt: &KTheory, c: &[i64], k: u32) -> Result<Vec<Term>> {
        gamma_circ_terms(kt, c, k)
    }
}

/// `Φ_c = δ_c^0`, constant in the unit of the untwisted sector.
pub struct TrivialFamily;

impl SolutionFamily for TrivialFamily {
    fn name(&self) -> &'static str {
        "trivial"
    }
    fn kind(&self) -> Kind {
        Kind::Plain
    }
    fn twisted(&self) -> bool {
        false
    }
    fn terms(&self, kt: &KTheory, c: &[i64], _k: u32) -> Result<Vec<Term>> {
        if c.iter().any(|&x| x != 0) {
            return Ok(Vec::new());
        }
        let s = untwisted_sector(kt);
        Ok(vec![Term {
            sector: s,
            l: vec![BigRational::zero(); kt.n()],
            coeff: kt.sectors[s].algebra.one(),
        }])
    }
}

/// Solution families by name.
pub struct FamilyRegistry {
    entries: BTreeMap<&'static str, Arc<dyn SolutionFamily>>,
}

impl Default for FamilyRegistry {
    fn default() -> Self {
        let mut r = FamilyRegistry {
            entries: BTreeMap::new(),
        };
        r.register(Arc::new(GammaFamily));
        r.register(Arc::new(GammaCircFamily));
        r.register(Arc::new(TrivialFamily));
        r
    }
}

impl FamilyRegistry {
    pub fn register(&mut self, f: Arc<dyn SolutionFamily>) {
        self.entries.insert(f.name(), f);
    }

    pub fn get(&self, name: &str) -> Result<Arc<dyn SolutionFamily>> {
        self.entries.get(name).cloned().ok_or_else(|| Error::Unknown {
            kind: "solution family",
            name: name.to_string(),
        })
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.entries.keys().copied().collect()
    }
}

/// Three sample values of `log x` deep in the region where the series of
/// this fan converge: `log x_i = -s μ_i + iθ_i` with `μ` the convexity
/// weights, scaled so that the smallest relation monomial has size ≤ 1/200.
pub fn default_samples(fan: &Fan) -> Vec<Vec<Complex64>> {
    let mu: Vec<f64> = fan.weights.iter().map(rational_to_f64).collect();
    let kernel = relation_lattice(fan);
    let mut delta = f64::INFINITY;
    let r = kernel.len();
    let mut t = vec![-2i64; r];
    loop {
        let value: f64 = (0..fan.n())
            .map(|i| (0..r).map(|j| t[j] * kernel[j][i]).sum::<i64>() as f64 * mu[i])
            .sum();
        if value > 1e-12 {
            delta = delta.min(value);
        }
        let mut j = 0;
        while j < r {
            t[j] += 1;
            if t[j] <= 2 {
                break;
            }
            t[j] = -2;
            j += 1;
        }
        if j == r {
            break;
        }
    }
    let s = if delta.is_finite() { 200f64.ln() / delta } else { 1.0 };
    [(1.0, 0.3), (1.15, -0.7), (1.3, 1.1)]
        .iter()
        .map(|&(f, phase)| {
            (0..fan.n())
                .map(|i| Complex64::new(-s * f * mu[i], phase * ((i % 3) as f64 - 1.0)))
                .collect()
        })
        .collect()
}

pub fn untwisted_sector(kt: &KTheory) -> usize {
    kt.sectors
        .iter()
        .position(|s| s.element.is_untwisted())
        .expect("the zero box element is always present")
}

/// Lattice points of the support (or of its interior) of degree at most `max_degree`.
pub fn lattice_points(fan: &Fan, max_degree: i64, interior: bool) -> Vec<Vec<i64>> {
    let rank = fan.rank;
    let bound: i64 = fan
        .points
        .iter()
        .flat_map(|p| p.iter().map(|x| x.abs()))
        .max()
        .unwrap_or(0)
        * max_degree.max(0);
    let mut out = Vec::new();
    let mut c = vec![-bound; rank];
    loop {
        let keep = if interior { fan.in_interior(&c) } else { fan.in_cone(&c) };
        if keep && fan.degree(&c).is_none_or(|d| d <= max_degree) {
            out.push(c.clone());
        }
        let mut j = 0;
        loop {
            if j == rank {
                out.sort_by_key(|p| (fan.degree(p).unwrap_or(0), p.clone()));
                return out;
            }
            c[j] += 1;
            if c[j] <= bound {
                break;
            }
            c[j] = -bound;
            j += 1;
        }
    }
}

#[derive(Clone, Debug, Default, serde::Serialize)]
pub struct GkzReport {
    pub family: String,
    /// Largest relative residual of `∂_i Φ_c = Φ_{c+v_i}`.
    pub shift_residual: f64,
    /// Largest relative residual of the homogeneity relations.
    pub euler_residual: f64,
    /// Whether every exponent of `Φ_{c+v_i}` comes from one of `Φ_c`.
    pub exponents_match: bool,
    pub relations_checked: usize,
}

impl GkzReport {
    pub fn max_residual(&self) -> f64 {
        self.shift_residual.max(self.euler_residual)
    }
}

fn relative(diff: f64, scale: f64) -> f64 {
    if scale == 0.0 {
        diff
    } else {
        diff / scale
    }
}

fn sub(a: &[Vec<Complex64>], b: &[Vec<Complex64>]) -> Vec<Vec<Complex64>> {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.iter().zip(y).map(|(p, q)| p - q).collect())
        .collect()
}

/// Multiplies each term by `l_i + D_i/2πi` (or just `l_i` for untwisted families).
fn raise(kt: &KTheory, kind: Kind, twisted: bool, t: &Term, i: usize) -> Vec<Complex64> {
    let alg = &kt.sectors[t.sector].algebra;
    let mut a: Vec<Complex64> = alg.zero();
    if twisted {
        a = shifted_class(kt, t.sector, i);
    }
    a[0] += rational_to_f64(&t.l[i]);
    apply(kt, t.sector, kind, &a, &t.coeff)
}

/// Checks the shift and homogeneity equations on every `c` in `points` and at
/// every sample point.
pub fn check_gkz(
    kt: &KTheory,
    family: &dyn SolutionFamily,
    points: &[Vec<i64>],
    samples: &[Vec<Complex64>],
    k: u32,
) -> Result<GkzReport> {
    let fan = &kt.fan;
    let n = fan.n();
    let kind = family.kind();
    let twisted = family.twisted();
    let kb = BigRational::from_integer(BigInt::from(k));
    let results: Vec<(f64, f64, bool, usize)> = points
        .par_iter()
        .map(|c| -> Result<(f64, f64, bool, usize)> {
            let terms = family.terms(kt, c, k + 1)?;
            let inner: Vec<Term> = terms.iter().filter(|t| positive_part(&t.l) <= kb).cloned().collect();
            let mut shift = 0.0f64;
            let mut euler = 0.0f64;
            let mut matched = true;
            let mut count = 0;
            for i in 0..n {
                let next: Vec<i64> = c.iter().zip(&fan.points[i]).map(|(a, b)| a + b).collect();
                if !family.defined_at(fan, &next) {
                    continue;
                }
                let target = family.terms(kt, &next, k)?;
                let lowered: Vec<Term> = terms
                    .iter()
                    .filter_map(|t| {
                        let mut l = t.l.clone();
                        l[i] -= BigRational::from_integer(1.into());
                        (positive_part(&l) <= kb).then(|| Term {
                            sector: t.sector,
                            l,
                            coeff: raise(kt, kind, twisted, t, i),
                        })
                    })
                    .collect();
                let have: BTreeSet<(usize, &Vec<BigRational>)> = lowered.iter().map(|t| (t.sector, &t.l)).collect();
                matched &= target.iter().all(|t| have.contains(&(t.sector, &t.l)));
                for lx in samples {
                    let lhs = sum_terms(kt, kind, &lowered, lx, twisted);
                    let rhs = sum_terms(kt, kind, &target, lx, twisted);
                    shift = shift.max(relative(norm(&sub(&lhs, &rhs)), norm(&lhs).max(norm(&rhs))));
                }
                count += 1;
            }
            for m in 0..fan.rank {
                let mc = c[m];
                let mut pieces: Vec<(f64, Vec<Term>)> = Vec::new();
                for i in 0..n {
                    let w = fan.points[i][m];
                    if w != 0 {
                        let raised: Vec<Term> = inner
                            .iter()
                            .map(|t| Term {
                                sector: t.sector,
                                l: t.l.clone(),
                                coeff: raise(kt, kind, twisted, t, i),
                            })
                            .collect();
                        pieces.push((w as f64, raised));
                    }
                }
                for lx in samples {
                    let base = sum_terms(kt, kind, &inner, lx, twisted);
                    let mut total: Vec<Vec<Complex64>> =
                        base.iter().map(|v| v.iter().map(|z| z * mc as f64).collect()).collect();
                    let mut scale = mc.abs() as f64 * norm(&base);
                    for (w, raised) in &pieces {
                        let part = sum_terms(kt, kind, raised, lx, twisted);
                        scale += w.abs() * norm(&part);
                        for (tv, pv) in total.iter_mut().zip(&part) {
                            for (a, b) in tv.iter_mut().zip(pv) {
                                *a += b * w;
                            }
                        }
                    }
                    euler = euler.max(relative(norm(&total), scale));
                }
                count += 1;
            }
            Ok((shift, euler, matched, count))
        })
        .collect::<Result<_>>()?;
    let mut report = GkzReport {
        family: family.name().to_string(),
        exponents_match: true,
        ..Default::default()
    };
    for (s, e, m, c) in results {
        report.shift_residual = report.shift_residual.max(s);
        report.euler_residual = report.euler_residual.max(e);
        report.exponents_match &= m;
        report.relations_checked += c;
    }
    Ok(report)
}

/// The unit coefficient of the untwisted component of `Γ_c`.
pub fn rank_functional(kt: &KTheory, c: &[i64], cfg: &SeriesConfig) -> Result<Complex64> {
    let v = gamma_series(kt, c, cfg)?;
    Ok(v.sectors[untwisted_sector(kt)][0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::rat;
    use crate::input::{key_example, key_example_coarse};
    use proptest::prelude::*;
    use statrs::function::gamma::gamma;

    const EULER: f64 = 0.577_215_664_901_532_9;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    /// `Σ_{k≥0} (k + a)^{-s}` summed from the small end, plus the integral tail.
    fn brute_zeta(s: u32, a: f64) -> f64 {
        let n = 100_000;
        let x = n as f64 + a;
        let mut acc = x.powf(1.0 - s as f64) / (s as f64 - 1.0) + 0.5 * x.powi(-(s as i32));
        for k in (0..n).rev() {
            acc += (k as f64 + a).powi(-(s as i32));
        }
        acc
    }

    #[test]
    fn hurwitz_zeta_values() {
        let pi2 = PI * PI;
        assert!(close(hurwitz_zeta(2, 1.0), pi2 / 6.0, 1e-14));
        assert!(close(hurwitz_zeta(2, 0.5), pi2 / 2.0, 1e-14));
        assert!(close(hurwitz_zeta(4, 1.0), pi2 * pi2 / 90.0, 1e-14));
        let zeta3 = 1.202_056_903_159_594_2;
        let catalan = 0.915_965_594_177_219;
        assert!(close(hurwitz_zeta(3, 0.25), 28.0 * zeta3 + PI * pi2, 1e-14));
        assert!(close(hurwitz_zeta(2, 0.25), pi2 + 8.0 * catalan, 1e-14));
        assert!(close(hurwitz_zeta(2, 0.75), pi2 - 8.0 * catalan, 1e-14));
        for (s, a) in [(3, 0.25), (5, 0.9), (7, 0.1), (2, 0.75)] {
            assert!(close(hurwitz_zeta(s, a), brute_zeta(s, a), 1e-12), "{s} {a}");
        }
    }

    #[test]
    fn jets_at_integers() {
        let j = recip_gamma_jet(&rat(1, 1), 3);
        assert!(close(j[0], 1.0, 1e-15) && close(j[1], EULER, 1e-14));
        let j = recip_gamma_jet(&rat(0, 1), 3);
        assert_eq!(j[0], 0.0);
        assert!(close(j[1], 1.0, 1e-14) && close(j[2], EULER, 1e-14));
        let j = recip_gamma_jet(&rat(-1, 1), 3);
        assert_eq!(j[0], 0.0);
        assert!(close(j[1], -1.0, 1e-14));
        let j = recip_gamma_jet(&rat(-3, 1), 2);
        assert!(close(j[1], -6.0, 1e-13));
        let j = recip_gamma_jet(&rat(1, 2), 1);
        let sqrt_pi = PI.sqrt();
        assert!(close(j[0], 1.0 / sqrt_pi, 1e-14));
        assert!(close(j[1], (EULER + 2.0 * 2f64.ln()) / sqrt_pi, 1e-14));
    }

    proptest! {
        #[test]
        fn jet_matches_gamma(num in -40i64..60, den in prop::sample::select(vec![2i64, 3, 5, 7])) {
            prop_assume!(num % den != 0);
            let a = rat(num, den);
            let x = num as f64 / den as f64;
            let j = recip_gamma_jet(&a, 2);
            let g = gamma(x);
            prop_assert!(close(j[0], 1.0 / g, 1e-11));
            prop_assert!(close(j[1], -digamma(x) / g, 1e-10));
            // (1/Γ)'' = (ψ² - ψ')/Γ with ψ'(x) = Σ_k (x + k)^{-2}
            let psi = digamma(x);
            let trigamma = brute_zeta(2, x);
            prop_assert!(close(j[2], (psi * psi - trigamma) / g / 2.0, 1e-8));
        }
    }

    fn kt() -> KTheory {
        KTheory::new(key_example()).unwrap()
    }

    fn strs(l: &[BigRational]) -> Vec<String> {
        l.iter().map(|x| x.to_string()).collect()
    }

    #[test]
    fn exponent_sets() {
        let fan = key_example();
        assert_eq!(relation_lattice(&fan).len(), 1);
        let r = &relation_lattice(&fan)[0];
        assert!(r == &vec![2, -3, 1] || r == &vec![-2, 3, -1]);
        let untwisted = fan.sector_index(&[0, 0]).unwrap();
        let twisted = fan.sector_index(&[2, 1]).unwrap();
        let l = enumerate_l(&fan, &[0, 0], untwisted, 3);
        let got: Vec<Vec<String>> = l.iter().map(|x| strs(x)).collect();
        assert_eq!(got[0], ["0", "0", "0"]);
        assert!(got.contains(&vec!["2".into(), "-3".into(), "1".into()]));
        assert!(got.contains(&vec!["-2".into(), "3".into(), "-1".into()]));
        let l = enumerate_l(&fan, &[2, 1], twisted, 0);
        assert_eq!(strs(&l[0]), ["0", "-1/2", "-1/2"]);
        let l = enumerate_l(&fan, &[1, 1], untwisted, 0);
        assert_eq!(strs(&l[0]), ["0", "-1", "0"]);
        for c in lattice_points(&fan, 2, false) {
            for s in 0..fan.boxes.len() {
                for l in enumerate_l(&fan, &c, s, 6) {
                    for m in 0..2 {
                        let total: BigRational = l
                            .iter()
                            .zip(&fan.points)
                            .map(|(li, p)| li * BigRational::from_integer(p[m].into()))
                            .sum();
                        assert_eq!(total, BigRational::from_integer((-c[m]).into()));
                    }
                    for (li, gi) in l.iter().zip(&fan.boxes[s].coords) {
                        assert!((li - gi).is_integer());
                    }
                    assert!(positive_part(&l) <= rat(6, 1));
                }
            }
        }
    }

    /// Coefficient of `component` in the term with exponent `base + k·(2,-3,1)`, rescaled.
    fn coefficient(
        terms: &[Term],
        sector: usize,
        base: [i64; 3],
        k: i64,
        component: usize,
        scale: Complex64,
    ) -> Complex64 {
        let l: Vec<BigRational> = (0..3).map(|i| rat(base[i] + k * [2, -3, 1][i], 1)).collect();
        let t = terms
            .iter()
            .find(|t| t.sector == sector && t.l == l)
            .expect("term present");
        t.coeff[component] * scale
    }

    fn assert_series(values: &[Complex64], expected: &[f64]) {
        for (v, e) in values.iter().zip(expected) {
            assert!((v.re - e).abs() <= 1e-10 * e.abs() && v.im.abs() <= 1e-10, "{v} vs {e}");
        }
    }

    #[test]
    fn key_example_series() {
        let k = kt();
        let un = k.fan.sector_index(&[0, 0]).unwrap();
        let tw = k.fan.sector_index(&[2, 1]).unwrap();
        let pi = Complex64::new(PI, 0.0);
        let t = gamma_terms(&k, &[0, 0], 8).unwrap();
        let v: Vec<Complex64> = (1..=2)
            .map(|j| coefficient(&t, un, [0, 0, 0], j, 1, TWO_PI_I))
            .collect();
        assert_series(&v, &[-3.0, 7.5]);
        let tw_terms: Vec<Complex64> = t.iter().filter(|x| x.sector == tw).map(|x| x.coeff[0] * pi).collect();
        assert_series(&tw_terms[..3], &[-1.0, 35.0 / 24.0, -3003.0 / 640.0]);
        let t = gamma_terms(&k, &[2, 1], 8).unwrap();
        let tw_terms: Vec<Complex64> = t.iter().filter(|x| x.sector == tw).map(|x| x.coeff[0] * pi).collect();
        assert_series(&tw_terms[..3], &[1.0, -15.0 / 8.0, 1155.0 / 128.0]);
        let t = gamma_circ_terms(&k, &[1, 1], 8).unwrap();
        let f2: Vec<Complex64> = (0..3)
            .map(|j| coefficient(&t, un, [0, -1, 0], j, 0, TWO_PI_I))
            .collect();
        assert_series(&f2, &[1.0, -3.0, 15.0]);
        let d3f2: Vec<Complex64> = (1..=2)
            .map(|j| coefficient(&t, un, [0, -1, 0], j, 1, TWO_PI_I * TWO_PI_I))
            .collect();
        assert_series(&d3f2, &[-4.5, 25.25]);
        let tw_terms: Vec<Complex64> = t.iter().filter(|x| x.sector == tw).map(|x| x.coeff[0] * pi).collect();
        assert_series(&tw_terms[..2], &[1.5, -105.0 / 16.0]);
    }

    fn samples() -> Vec<Vec<Complex64>> {
        [
            [(0.1, 0.2), (2.0, 0.3), (-0.2, 0.1)],
            [(-1.0, 0.5), (1.5, -0.4), (0.3, 2.0)],
        ]
        .iter()
        .map(|s| s.iter().map(|&(a, b)| Complex64::new(a, b)).collect())
        .collect()
    }

    #[test]
    fn gkz_equations_hold() {
        let k = kt();
        let reg = FamilyRegistry::default();
        for name in reg.names() {
            let f = reg.get(name).unwrap();
            let pts = lattice_points(&k.fan, 2, f.kind() == Kind::Compact);
            let r = check_gkz(&k, f.as_ref(), &pts, &samples(), 12).unwrap();
            assert!(r.exponents_match, "{name}");
            assert!(r.max_residual() < 1e-10, "{name}: {r:?}");
        }
    }

    #[test]
    fn gkz_on_local_p2() {
        use crate::fans::{validate_fan, FanInput};
        let input = FanInput {
            rank: 3,
            points: vec![vec![0, 0, 1], vec![1, 0, 1], vec![0, 1, 1], vec![-1, -1, 1]],
            max_simplices: vec![vec![1, 2, 3], vec![1, 3, 4], vec![1, 2, 4]],
            weights: None,
        };
        let k = KTheory::new(validate_fan(&input).unwrap()).unwrap();
        let lx: Vec<Complex64> = [(-1.0, 0.2), (-2.0, 0.1), (-2.5, -0.3), (-1.5, 0.4)]
            .iter()
            .map(|&(a, b)| Complex64::new(a, b))
            .collect();
        for f in [&GammaFamily as &dyn SolutionFamily, &GammaCircFamily] {
            let pts = lattice_points(&k.fan, 1, f.kind() == Kind::Compact);
            let r = check_gkz(&k, f, &pts, std::slice::from_ref(&lx), 10).unwrap();
            assert!(r.exponents_match && r.max_residual() < 1e-9, "{r:?}");
        }
        let cfg = SeriesConfig::new(12, lx);
        let one = rank_functional(&k, &[0, 0, 0], &cfg).unwrap();
        assert!((one - 1.0).norm() < 1e-12);
    }

    #[test]
    fn rank_functional_is_a_delta() {
        let k = kt();
        let cfg = SeriesConfig::new(12, samples()[0].clone());
        for c in [[0, 0], [1, 1], [2, 1], [3, 1]] {
            let v = rank_functional(&k, &c, &cfg).unwrap();
            let expected = if c == [0, 0] { 1.0 } else { 0.0 };
            assert!((v - expected).norm() < 1e-10, "{c:?}: {v}");
        }
    }

    #[test]
    fn default_samples_lie_in_the_region() {
        for fan in [key_example(), key_example_coarse()] {
            let k = KTheory::new(fan).unwrap();
            for lx in default_samples(&k.fan) {
                let v = gamma_series(&k, &[1, 1], &SeriesConfig::new(24, lx)).unwrap();
                assert!(v.warnings.is_empty() && v.tail < 1e-10, "{}", v.tail);
            }
        }
    }

    #[test]
    fn truncation_is_convergent() {
        let k = kt();
        let lx = samples()[0].clone();
        let a = gamma_series(&k, &[1, 1], &SeriesConfig::new(24, lx.clone())).unwrap();
        let b = gamma_series(&k, &[1, 1], &SeriesConfig::new(48, lx)).unwrap();
        assert!(norm(&sub(&a.sectors, &b.sectors)) < 1e-10 * norm(&b.sectors));
        assert!(b.warnings.is_empty());
    }

    #[test]
    fn far_from_origin_warns() {
        let k = kt();
        let lx = vec![
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
        ];
        let v = gamma_series(&k, &[0, 0], &SeriesConfig::new(6, lx)).unwrap();
        assert!(!v.warnings.is_empty());
    }

    #[test]
    fn compact_series_needs_interior_point() {
        let k = kt();
        let cfg = SeriesConfig::new(4, samples()[0].clone());
        assert!(matches!(
            gamma_circ_series(&k, &[0, 1], &cfg),
            Err(Error::InteriorRequired(_))
        ));
        assert!(matches!(gamma_series(&k, &[-1, 1], &cfg), Err(Error::NotInCone(_))));
    }

    #[test]
    fn coarse_fan_terms() {
        let k = KTheory::new(key_example_coarse()).unwrap();
        // at large |x| the coarse series converges
        let lx = vec![
            Complex64::new(0.0, 0.1),
            Complex64::new(3.0, 0.2),
            Complex64::new(0.0, -0.3),
        ];
        let pts = lattice_points(&k.fan, 2, false);
        let r = check_gkz(&k, &GammaFamily, &pts, &[lx], 16).unwrap();
        assert!(r.exponents_match && r.max_residual() < 1e-10, "{r:?}");
    }
}
