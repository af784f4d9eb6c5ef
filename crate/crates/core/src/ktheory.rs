//! K-theory of the toric stack and of its compactly supported part, in
//! sector coordinates: the maps `ch`, `ch^c`, the Euler characteristic χ and
//! the Euler pairing matrix.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::exactnum::field::{self as fld};
use crate::exactnum::{Cyclotomic, EpsSeries};
use crate::fans::Fan;
use crate::lattice;
use crate::sectoralg::{build_sectors, Sector};

/// An element of `⊕_γ H_γ` (or `⊕_γ H_γ^c`), one coefficient vector per sector.
pub type SectorVector<F> = Vec<Vec<F>>;

/// `R^α G_I`: a Laurent monomial times the generator of an interior simplex.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct KcMonomial {
    pub alpha: Vec<i64>,
    pub simplex: Vec<usize>,
}

impl KcMonomial {
    pub fn new(alpha: Vec<i64>, simplex: Vec<usize>) -> Self {
        KcMonomial { alpha, simplex }
    }
}

pub fn monomial_label(alpha: &[i64]) -> String {
    let parts: Vec<String> = alpha
        .iter()
        .enumerate()
        .filter(|(_, &a)| a != 0)
        .map(|(i, &a)| {
            if a == 1 {
                format!("R{}", i + 1)
            } else {
                format!("R{}^{}", i + 1, a)
            }
        })
        .collect();
    if parts.is_empty() {
        "1".into()
    } else {
        parts.join("*")
    }
}

pub fn kc_label(m: &KcMonomial) -> String {
    let g: Vec<String> = m.simplex.iter().map(|i| (i + 1).to_string()).collect();
    let g = format!("G[{}]", g.join(","));
    if m.alpha.iter().all(|&a| a == 0) {
        g
    } else {
        format!("{}*{g}", monomial_label(&m.alpha))
    }
}

/// Fan together with its sector algebras and the data of `ch`.
#[derive(Clone, Debug)]
pub struct KTheory {
    pub fan: Fan,
    pub sectors: Vec<Sector>,
    /// Common order of all phases `e^{2πiγ_i}`.
    pub order: u64,
    /// `log_classes[s][i]`: the nilpotent `N_i` with `ch_γ(R_i) = e^{2πiγ_i} e^{N_i}`.
    log_classes: Vec<Vec<Vec<BigRational>>>,
}

fn factorial_series(sign: i64, shift: u64, len: usize) -> Vec<BigRational> {
    // Σ sign^k x^k / (k + shift)!
    let mut out = Vec::with_capacity(len);
    let mut f = BigRational::one();
    for j in 1..=shift {
        f /= BigRational::from_integer(BigInt::from(j));
    }
    for k in 0..len as u64 {
        if k > 0 {
            f /= BigRational::from_integer(BigInt::from(k + shift));
        }
        let s = if sign < 0 && k % 2 == 1 { -f.clone() } else { f.clone() };
        out.push(s);
    }
    out
}

impl KTheory {
    pub fn new(fan: Fan) -> Result<Self> {
        let sectors = build_sectors(&fan)?;
        let order = fan.phase_order();
        let mut kt = KTheory {
            fan,
            sectors,
            order,
            log_classes: Vec::new(),
        };
        kt.log_classes = (0..kt.sectors.len())
            .map(|s| {
                let cone = kt.cones_over_sector(s)[0];
                kt.log_classes_with(s, cone)
            })
            .collect::<Result<_>>()?;
        Ok(kt)
    }

    pub fn dim(&self) -> usize {
        self.sectors.iter().map(|s| s.algebra.dim()).sum()
    }

    pub fn n(&self) -> usize {
        self.fan.n()
    }

    /// Maximal cones containing σ(γ) of sector `s`.
    pub fn cones_over_sector(&self, s: usize) -> Vec<usize> {
        let sigma = &self.sectors[s].element.sigma;
        self.fan.max_cones_containing(sigma).map(|(k, _)| k).collect()
    }

    /// `N_i` computed with the functional `m_i = -u_{i,J}` of a chosen maximal
    /// cone `J ⊇ σ(γ)`.
    pub fn log_classes_with(&self, s: usize, cone: usize) -> Result<Vec<Vec<BigRational>>> {
        let sector = &self.sectors[s];
        let sigma = &sector.element.sigma;
        let j = &self.fan.max_cones[cone];
        let dual = self.fan.dual_covectors(j)?;
        let alg = &sector.algebra;
        let zero = vec![BigRational::zero(); alg.dim()];
        Ok((0..self.n())
            .map(|i| {
                if !sigma.contains(&i) {
                    return alg.d_classes[i].clone();
                }
                let u = &dual[j.iter().position(|&x| x == i).expect("σ ⊆ J")];
                let mut acc = zero.clone();
                for &r in &sector.quotient.ray_labels {
                    let c = -lattice::dot_rat(u, &self.fan.points[r]);
                    for (a, d) in acc.iter_mut().zip(&alg.d_classes[r]) {
                        *a += &c * d;
                    }
                }
                acc
            })
            .collect())
    }

    /// The nilpotent class `D_i = log ch_γ(R_i e^{-2πiγ_i})`.
    pub fn log_class(&self, s: usize, i: usize) -> &[BigRational] {
        &self.log_classes[s][i]
    }

    /// `e^{2πi r}` in the common cyclotomic field.
    pub fn phase(&self, r: &BigRational) -> Cyclotomic {
        let k = r * BigRational::from_integer(BigInt::from(self.order));
        let k = k.to_integer().to_i64().expect("phase exponent is integral");
        Cyclotomic::root_of_unity(k, self.order)
    }

    fn gamma_dot(&self, s: usize, alpha: &[i64]) -> BigRational {
        self.sectors[s]
            .element
            .coords
            .iter()
            .zip(alpha)
            .map(|(g, &a)| g * BigRational::from_integer(a.into()))
            .sum()
    }

    pub fn ch_monomial(&self, s: usize, alpha: &[i64]) -> Vec<Cyclotomic> {
        let alg = &self.sectors[s].algebra;
        let mut n = vec![BigRational::zero(); alg.dim()];
        for (i, &a) in alpha.iter().enumerate() {
            if a != 0 {
                let c = BigRational::from_integer(a.into());
                for (x, d) in n.iter_mut().zip(&self.log_classes[s][i]) {
                    *x += &c * d;
                }
            }
        }
        let e = alg.exp::<Cyclotomic>(&alg.lift(&n));
        let p = self.phase(&self.gamma_dot(s, alpha));
        e.iter().map(|x| x.mul(&p)).collect()
    }

    pub fn ch(&self, alpha: &[i64]) -> SectorVector<Cyclotomic> {
        (0..self.sectors.len()).map(|s| self.ch_monomial(s, alpha)).collect()
    }

    pub fn chc_monomial(&self, s: usize, m: &KcMonomial) -> Vec<Cyclotomic> {
        let sector = &self.sectors[s];
        let sigma = &sector.element.sigma;
        let mut full: Vec<usize> = m.simplex.iter().chain(sigma).copied().collect();
        full.sort_unstable();
        full.dedup();
        if !self.fan.is_simplex(&full) {
            return sector.module.zero();
        }
        let alg = &sector.algebra;
        let mut acc = self.ch_monomial(s, &m.alpha);
        let todd_inv: Vec<Cyclotomic> = factorial_series(-1, 1, alg.socle_degree() + 1)
            .iter()
            .map(|q| Cyclotomic::from_rational(1, q.clone()))
            .collect();
        let mut bar = Vec::new();
        for &i in &m.simplex {
            if sigma.contains(&i) {
                let mut e = vec![0i64; self.n()];
                e[i] = -1;
                let inv = self.ch_monomial(s, &e);
                let mut f: Vec<Cyclotomic> = inv.iter().map(|x| x.neg()).collect();
                f[0] = f[0].add(&Cyclotomic::one(1));
                acc = alg.mul(&acc, &f);
            } else {
                let d = alg.d_class::<Cyclotomic>(i);
                acc = alg.mul(&acc, &alg.power_series(&d, &todd_inv));
                bar.push(i);
            }
        }
        let gen = sector.module.generator::<Cyclotomic>(&bar);
        sector.module.act(&acc, &gen)
    }

    pub fn chc(&self, m: &KcMonomial) -> SectorVector<Cyclotomic> {
        (0..self.sectors.len()).map(|s| self.chc_monomial(s, m)).collect()
    }

    pub fn check_interior(&self, simplex: &[usize]) -> Result<()> {
        if self.fan.is_interior(simplex) {
            Ok(())
        } else {
            let l: Vec<usize> = simplex.iter().map(|i| i + 1).collect();
            Err(Error::NotInterior(format!("{l:?}")))
        }
    }

    /// Canonical monomial basis of K₀: 1, then powers `R_i^k` for i from
    /// the last index down, then mixed monomials, greedily while independent.
    pub fn canonical_k_basis(&self) -> Vec<Vec<i64>> {
        let n = self.n();
        let d = self.dim();
        let mut chosen: Vec<Vec<i64>> = Vec::new();
        let mut rows: Vec<Vec<Cyclotomic>> = Vec::new();
        let mut try_add = |alpha: Vec<i64>, chosen: &mut Vec<Vec<i64>>| {
            if chosen.len() == d || chosen.contains(&alpha) {
                return;
            }
            let mut trial = rows.clone();
            trial.push(flatten(&self.ch(&alpha)));
            if fld::rank(trial.clone()) == trial.len() {
                rows = trial;
                chosen.push(alpha);
            }
        };
        try_add(vec![0; n], &mut chosen);
        for i in (0..n).rev() {
            for k in 1..=d as i64 {
                let mut a = vec![0; n];
                a[i] = k;
                try_add(a, &mut chosen);
            }
        }
        for alpha in small_monomials(n, d as i64) {
            try_add(alpha, &mut chosen);
        }
        chosen
    }

    /// Canonical basis of K₀^c: for each interior simplex (by size, then
    /// lexicographically) `G_I` followed by `R_i^k G_I`.
    pub fn canonical_kc_basis(&self) -> Vec<KcMonomial> {
        let n = self.n();
        let d = self.dim();
        let mut chosen: Vec<KcMonomial> = Vec::new();
        let mut rows: Vec<Vec<Cyclotomic>> = Vec::new();
        for simplex in &self.fan.interior {
            let mut candidates = vec![vec![0; n]];
            for i in (0..n).rev() {
                for k in 1..=d as i64 {
                    let mut a = vec![0; n];
                    a[i] = k;
                    candidates.push(a);
                }
            }
            candidates.extend(small_monomials(n, d as i64));
            for alpha in candidates {
                if chosen.len() == d {
                    return chosen;
                }
                let m = KcMonomial::new(alpha, simplex.clone());
                if chosen.contains(&m) {
                    continue;
                }
                let mut trial = rows.clone();
                trial.push(flatten(&self.chc(&m)));
                if fld::rank(trial.clone()) == trial.len() {
                    rows = trial;
                    chosen.push(m);
                }
            }
        }
        chosen
    }
}

/// Monomials with exponents in `-bound..=bound`, by total degree.
fn small_monomials(n: usize, bound: i64) -> Vec<Vec<i64>> {
    let mut all: Vec<Vec<i64>> = vec![vec![]];
    for _ in 0..n {
        all = all
            .into_iter()
            .flat_map(|v| {
                (-bound..=bound).map(move |e| {
                    let mut v = v.clone();
                    v.push(e);
                    v
                })
            })
            .collect();
    }
    all.sort_by_key(|v| {
        (
            v.iter().map(|x| x.abs()).sum::<i64>(),
            v.iter().map(|x| -x).collect::<Vec<_>>(),
        )
    });
    all
}

pub fn flatten<F: Clone>(v: &SectorVector<F>) -> Vec<F> {
    v.iter().flatten().cloned().collect()
}

/// An algorithm computing χ(R^α G_I).
pub trait ChiEvaluator: Send + Sync {
    fn name(&self) -> &'static str;
    fn evaluate(&self, kt: &KTheory, m: &KcMonomial) -> Result<BigRational>;
}

/// Constant term of the character formula along a generic one-parameter
/// direction `q^u = exp(⟨u, w⟩ε)`.
pub struct CharacterFormula {
    pub max_attempts: usize,
}

impl Default for CharacterFormula {
    fn default() -> Self {
        CharacterFormula { max_attempts: 8 }
    }
}

const PRIMES: [i64; 10] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29];

impl CharacterFormula {
    fn direction(rank: usize, attempt: usize) -> Vec<i64> {
        let p = PRIMES[attempt % PRIMES.len()] + (attempt / PRIMES.len()) as i64 * 31;
        let mut w = Vec::with_capacity(rank);
        let mut x = 1i64;
        for _ in 0..rank {
            w.push(x);
            x *= p;
        }
        w
    }

    fn along(&self, kt: &KTheory, m: &KcMonomial, w: &[i64]) -> Result<Cyclotomic> {
        let fan = &kt.fan;
        let rank = fan.rank;
        let trunc = 2 * rank as i64 + 4;
        let order = kt.order;
        let one = Cyclotomic::one(order);
        let mut total: EpsSeries = EpsSeries::zero(trunc);
        for (jx, cone) in fan.max_cones_containing(&m.simplex) {
            let dual = fan.dual_covectors(cone)?;
            let a: Vec<BigRational> = dual.iter().map(|u| lattice::dot_rat(u, w)).collect();
            for (k, &i) in cone.iter().enumerate() {
                if !m.simplex.contains(&i) && a[k].is_zero() {
                    return Err(Error::NonGenericDirection { attempts: 1 });
                }
            }
            let vol = BigRational::from_integer(fan.simplex_volume(cone).into());
            let shift: BigRational = cone
                .iter()
                .enumerate()
                .map(|(k, &i)| -(&a[k] * BigRational::from_integer(m.alpha[i].into())))
                .sum();
            let base = EpsSeries::exp_series(&shift, trunc - 1);
            for &b in &fan.cone_boxes[jx] {
                let g = &fan.boxes[b].coords;
                let phase_exp: BigRational = cone
                    .iter()
                    .map(|&i| -(&g[i] * BigRational::from_integer(m.alpha[i].into())))
                    .sum();
                let mut term = base.scale(&kt.phase(&phase_exp).scale(&vol.recip()));
                for (k, &i) in cone.iter().enumerate() {
                    if m.simplex.contains(&i) {
                        continue;
                    }
                    let z = kt.phase(&g[i]);
                    let denom =
                        EpsSeries::constant(one.clone(), trunc).sub(&EpsSeries::exp_series(&a[k], trunc - 1).scale(&z));
                    term = term.mul(&denom.invert()?);
                }
                total = total.add(&term);
            }
        }
        total.constant_term_at_zero()
    }
}

impl ChiEvaluator for CharacterFormula {
    fn name(&self) -> &'static str {
        "character"
    }

    fn evaluate(&self, kt: &KTheory, m: &KcMonomial) -> Result<BigRational> {
        kt.check_interior(&m.simplex)?;
        for attempt in 0..self.max_attempts {
            let w = Self::direction(kt.fan.rank, attempt);
            match self.along(kt, m, &w) {
                Ok(v) => {
                    return v
                        .to_rational()
                        .ok_or_else(|| Error::NonInteger { value: v.to_string() })
                }
                Err(Error::NonGenericDirection { .. } | Error::PoleRemains { .. } | Error::ZeroLeadingCoefficient) => {
                    continue
                }
                Err(e) => return Err(e),
            }
        }
        Err(Error::NonGenericDirection {
            attempts: self.max_attempts,
        })
    }
}

/// The sector-wise integral formula of Hirzebruch–Riemann–Roch type.
pub struct Hrr;

impl Hrr {
    pub fn evaluate_vector(kt: &KTheory, v: &SectorVector<Cyclotomic>) -> Result<Cyclotomic> {
        let mut total = Cyclotomic::zero(kt.order);
        for (s, sector) in kt.sectors.iter().enumerate() {
            let alg = &sector.algebra;
            let sigma = &sector.element.sigma;
            let mut factor: Vec<Cyclotomic> = alg.one();
            for &i in sigma {
                let mut e = vec![0i64; kt.n()];
                e[i] = -1;
                let mut f: Vec<Cyclotomic> = kt.ch_monomial(s, &e).iter().map(|x| x.neg()).collect();
                f[0] = f[0].add(&Cyclotomic::one(1));
                factor = alg.mul(&factor, &alg.inverse(&f).ok_or(Error::SingularMatrix)?);
            }
            let t: Vec<Cyclotomic> = factorial_series(-1, 1, alg.socle_degree() + 1)
                .into_iter()
                .map(|q| Cyclotomic::from_rational(1, q))
                .collect();
            for &i in &sector.quotient.ray_labels {
                let d = alg.d_class::<Cyclotomic>(i);
                let todd = alg.inverse(&alg.power_series(&d, &t)).ok_or(Error::SingularMatrix)?;
                factor = alg.mul(&factor, &todd);
            }
            let value = sector.module.integrate(&sector.module.act(&factor, &v[s]));
            let w = BigRational::from_integer(sector.quotient.box_order.into()).recip();
            total = total.add(&value.scale(&w));
        }
        Ok(total)
    }
}

impl ChiEvaluator for Hrr {
    fn name(&self) -> &'static str {
        "hrr"
    }

    fn evaluate(&self, kt: &KTheory, m: &KcMonomial) -> Result<BigRational> {
        kt.check_interior(&m.simplex)?;
        let v = Self::evaluate_vector(kt, &kt.chc(m))?;
        v.to_rational()
            .ok_or_else(|| Error::NonInteger { value: v.to_string() })
    }
}

/// χ of an arbitrary element of `⊕_γ H_γ^c`.
pub fn chi_hrr(kt: &KTheory, v: &SectorVector<Cyclotomic>) -> Result<Cyclotomic> {
    Hrr::evaluate_vector(kt, v)
}

/// χ evaluators by name.
pub struct ChiRegistry {
    entries: BTreeMap<&'static str, Arc<dyn ChiEvaluator>>,
}

impl Default for ChiRegistry {
    fn default() -> Self {
        let mut r = ChiRegistry {
            entries: BTreeMap::new(),
        };
        r.register(Arc::new(CharacterFormula::default()));
        r.register(Arc::new(Hrr));
        r
    }
}

impl ChiRegistry {
    pub fn register(&mut self, e: Arc<dyn ChiEvaluator>) {
        self.entries.insert(e.name(), e);
    }

    pub fn get(&self, name: &str) -> Result<Arc<dyn ChiEvaluator>> {
        self.entries.get(name).cloned().ok_or_else(|| Error::Unknown {
            kind: "chi evaluator",
            name: name.to_string(),
        })
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.entries.keys().copied().collect()
    }
}

pub fn to_integer(q: &BigRational) -> Result<BigInt> {
    if q.is_integer() {
        Ok(q.to_integer())
    } else {
        Err(Error::NonInteger { value: q.to_string() })
    }
}

/// χ(R^α G_I) by the character formula.
pub fn chi(kt: &KTheory, alpha: &[i64], simplex: &[usize]) -> Result<BigInt> {
    let v = CharacterFormula::default().evaluate(kt, &KcMonomial::new(alpha.to_vec(), simplex.to_vec()))?;
    to_integer(&v)
}

/// `⟨R^β, R^α G_I⟩ = χ(R^{α-β} G_I)`.
pub fn euler_pairing(kt: &KTheory, evaluator: &dyn ChiEvaluator, beta: &[i64], m: &KcMonomial) -> Result<BigInt> {
    let alpha: Vec<i64> = m.alpha.iter().zip(beta).map(|(a, b)| a - b).collect();
    to_integer(&evaluator.evaluate(kt, &KcMonomial::new(alpha, m.simplex.clone()))?)
}

#[derive(Clone, Debug, PartialEq)]
pub struct PairingMatrix {
    pub k_basis: Vec<Vec<i64>>,
    pub kc_basis: Vec<KcMonomial>,
    /// Rows indexed by the K₀^c basis, columns by the K₀ basis.
    pub entries: Vec<Vec<BigInt>>,
    pub determinant: BigInt,
}

pub fn pairing_matrix(
    kt: &KTheory,
    evaluator: &dyn ChiEvaluator,
    k_basis: &[Vec<i64>],
    kc_basis: &[KcMonomial],
) -> Result<PairingMatrix> {
    let d = kt.dim();
    for b in k_basis {
        if b.len() != kt.n() {
            return Err(Error::Input(format!("K-monomial needs {} exponents", kt.n())));
        }
    }
    for m in kc_basis {
        if m.alpha.len() != kt.n() {
            return Err(Error::Input(format!("K^c-monomial needs {} exponents", kt.n())));
        }
        kt.check_interior(&m.simplex)?;
    }
    let k_rows: Vec<Vec<Cyclotomic>> = k_basis.iter().map(|a| flatten(&kt.ch(a))).collect();
    let r = fld::rank(k_rows);
    if r != d || k_basis.len() != d {
        return Err(Error::NotABasis { rank: r, expected: d });
    }
    let kc_rows: Vec<Vec<Cyclotomic>> = kc_basis.iter().map(|m| flatten(&kt.chc(m))).collect();
    let r = fld::rank(kc_rows);
    if r != d || kc_basis.len() != d {
        return Err(Error::NotABasis { rank: r, expected: d });
    }
    let cells: Vec<(usize, usize)> = (0..d).flat_map(|i| (0..d).map(move |j| (i, j))).collect();
    let values: Vec<BigInt> = cells
        .par_iter()
        .map(|&(i, j)| euler_pairing(kt, evaluator, &k_basis[j], &kc_basis[i]))
        .collect::<Result<_>>()?;
    let entries: Vec<Vec<BigInt>> = values.chunks(d).map(|c| c.to_vec()).collect();
    let rat: Vec<Vec<BigRational>> = entries
        .iter()
        .map(|r| r.iter().map(|x| BigRational::from_integer(x.clone())).collect())
        .collect();
    let determinant = rational_det(&rat).to_integer();
    Ok(PairingMatrix {
        k_basis: k_basis.to_vec(),
        kc_basis: kc_basis.to_vec(),
        entries,
        determinant,
    })
}

pub fn rational_det(m: &[Vec<BigRational>]) -> BigRational {
    let n = m.len();
    let mut a = m.to_vec();
    let mut det = BigRational::one();
    for c in 0..n {
        let Some(p) = (c..n).find(|&i| !a[i][c].is_zero()) else {
            return BigRational::zero();
        };
        if p != c {
            a.swap(p, c);
            det = -det;
        }
        det *= &a[c][c];
        let pivot = a[c].clone();
        for row in a.iter_mut().skip(c + 1) {
            if !row[c].is_zero() {
                let f = &row[c] / &pivot[c];
                for (x, y) in row.iter_mut().zip(&pivot) {
                    *x -= &f * y;
                }
            }
        }
    }
    det
}
