//! Artinian algebras `H_γ` and their dual modules `H_γ^c`, one pair per
//! twisted sector, built as graded monomial quotients over the quotient fan.
//!
//! The module is realised as the ideal spanned by monomials whose support is
//! an interior simplex, so the generator `F_I` is the monomial `Π_{i∈I} D_i`.

use std::collections::HashMap;

use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::exactnum::field as fld;
use crate::fans::{BoxElement, Fan, QuotientFan};
use crate::lattice;

/// Exponent vector over the quotient ray labels.
pub type Monomial = Vec<u32>;

/// Monomials, pivots, reduction matrix and kept indices of one degree.
type DegreeData = (Vec<Monomial>, Vec<usize>, lattice::RatMatrix, Vec<usize>);

/// A finite graded quotient of a polynomial ring with a monomial basis.
#[derive(Clone, Debug)]
pub struct GradedSpace {
    pub labels: Vec<usize>,
    pub basis: Vec<Monomial>,
    pub degrees: Vec<usize>,
    pub top_degree: usize,
    table: HashMap<Monomial, Vec<BigRational>>,
}

fn monomials_of_degree(vars: usize, d: u32) -> Vec<Monomial> {
    if vars == 0 {
        return if d == 0 { vec![vec![]] } else { vec![] };
    }
    let mut out = Vec::new();
    for first in (0..=d).rev() {
        for mut rest in monomials_of_degree(vars - 1, d - first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

pub fn support(m: &Monomial, labels: &[usize]) -> Vec<usize> {
    let mut s: Vec<usize> = m
        .iter()
        .enumerate()
        .filter(|(_, &e)| e > 0)
        .map(|(k, _)| labels[k])
        .collect();
    s.sort_unstable();
    s
}

impl GradedSpace {
    /// Quotient of the span of `allowed` monomials in degrees
    /// `min_degree..=top_degree` by the products of the linear forms with
    /// allowed monomials one degree lower.
    fn build(
        labels: &[usize],
        linear_forms: &[Vec<i64>],
        allowed: impl Fn(&Monomial) -> bool,
        min_degree: usize,
        top_degree: usize,
    ) -> Result<Self> {
        let m = labels.len();
        let mut basis = Vec::new();
        let mut degrees = Vec::new();
        let mut per_degree: Vec<DegreeData> = Vec::new();
        let mut prev_allowed: Vec<Monomial> = Vec::new();

        for d in min_degree..=top_degree + 1 {
            // descending lexicographic order: earlier labels are larger
            let cols: Vec<Monomial> = monomials_of_degree(m, d as u32)
                .into_iter()
                .filter(|mono| allowed(mono))
                .collect();
            let index: HashMap<&Monomial, usize> = cols.iter().enumerate().map(|(k, c)| (c, k)).collect();
            let mut rows: lattice::RatMatrix = Vec::new();
            if d > min_degree {
                for lower in &prev_allowed {
                    for form in linear_forms {
                        let mut row = vec![BigRational::zero(); cols.len()];
                        let mut nonzero = false;
                        for (k, &coef) in form.iter().enumerate() {
                            if coef == 0 {
                                continue;
                            }
                            let mut up = lower.clone();
                            up[k] += 1;
                            if let Some(&c) = index.get(&up) {
                                row[c] += BigRational::from_integer(coef.into());
                                nonzero = true;
                            }
                        }
                        if nonzero {
                            rows.push(row);
                        }
                    }
                }
            }
            let pivots = lattice::rref(&mut rows);
            let free: Vec<usize> = (0..cols.len()).filter(|c| !pivots.contains(c)).collect();
            if d == top_degree + 1 {
                if !free.is_empty() {
                    return Err(Error::Input(format!(
                        "quotient does not vanish above degree {top_degree}"
                    )));
                }
            } else {
                for &c in &free {
                    basis.push(cols[c].clone());
                    degrees.push(d);
                }
            }
            per_degree.push((cols.clone(), pivots, rows, free));
            prev_allowed = cols;
        }

        let dim = basis.len();
        let pos: HashMap<Monomial, usize> = basis.iter().cloned().enumerate().map(|(k, b)| (b, k)).collect();
        let mut table = HashMap::new();
        for (cols, pivots, rows, free) in per_degree {
            for (c, mono) in cols.iter().enumerate() {
                let mut v = vec![BigRational::zero(); dim];
                if let Some(r) = pivots.iter().position(|&p| p == c) {
                    for &f in &free {
                        if !rows[r][f].is_zero() {
                            v[pos[&cols[f]]] = -rows[r][f].clone();
                        }
                    }
                } else if let Some(&k) = pos.get(mono) {
                    v[k] = BigRational::one();
                }
                table.insert(mono.clone(), v);
            }
        }
        Ok(GradedSpace {
            labels: labels.to_vec(),
            basis,
            degrees,
            top_degree,
            table,
        })
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Coordinates of a monomial; zero if it is not allowed or too large.
    pub fn reduce(&self, mono: &Monomial) -> Vec<BigRational> {
        self.table
            .get(mono)
            .cloned()
            .unwrap_or_else(|| vec![BigRational::zero(); self.dim()])
    }

    pub fn monomial_of(&self, indices: &[usize]) -> Monomial {
        let mut mono = vec![0u32; self.labels.len()];
        for i in indices {
            let k = self
                .labels
                .iter()
                .position(|l| l == i)
                .expect("index is a ray of the quotient fan");
            mono[k] += 1;
        }
        mono
    }

    fn d_label(&self, mono: &Monomial) -> String {
        let parts: Vec<String> = mono
            .iter()
            .enumerate()
            .filter(|(_, &e)| e > 0)
            .map(|(k, &e)| {
                if e == 1 {
                    format!("D{}", self.labels[k] + 1)
                } else {
                    format!("D{}^{}", self.labels[k] + 1, e)
                }
            })
            .collect();
        parts.join("*")
    }
}

fn add_monomials(a: &Monomial, b: &Monomial) -> Monomial {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

fn combine<F: fld::Field>(vectors: &[BigRational], acc: &mut [F], scale: &F) {
    for (k, v) in vectors.iter().enumerate() {
        if !v.is_zero() {
            acc[k] = acc[k].add(&scale.scale(v));
        }
    }
}

#[derive(Clone, Debug)]
pub struct SectorAlgebra {
    pub space: GradedSpace,
    /// `mult[a][b]` = product of basis elements a and b.
    pub mult: Vec<Vec<Vec<BigRational>>>,
    /// Class of `D̄_i` for every point index i (zero off the quotient rays).
    pub d_classes: Vec<Vec<BigRational>>,
}

impl SectorAlgebra {
    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn socle_degree(&self) -> usize {
        self.space.top_degree
    }

    pub fn labels(&self) -> Vec<String> {
        self.space
            .basis
            .iter()
            .map(|m| {
                let l = self.space.d_label(m);
                if l.is_empty() {
                    "1".into()
                } else {
                    l
                }
            })
            .collect()
    }

    pub fn one<F: fld::Field>(&self) -> Vec<F> {
        let mut v = vec![F::zero(); self.dim()];
        v[0] = F::one();
        v
    }

    pub fn zero<F: fld::Field>(&self) -> Vec<F> {
        vec![F::zero(); self.dim()]
    }

    pub fn lift<F: fld::Field>(&self, v: &[BigRational]) -> Vec<F> {
        v.iter().map(F::from_rational).collect()
    }

    pub fn mul<F: fld::Field>(&self, x: &[F], y: &[F]) -> Vec<F> {
        let mut out: Vec<F> = self.zero();
        for (a, xa) in x.iter().enumerate() {
            if xa.is_zero() {
                continue;
            }
            for (b, yb) in y.iter().enumerate() {
                if yb.is_zero() {
                    continue;
                }
                combine(&self.mult[a][b], &mut out, &xa.mul(yb));
            }
        }
        out
    }

    /// `Σ_k coeffs[k] n^k` for nilpotent `n`.
    pub fn power_series<F: fld::Field>(&self, n: &[F], coeffs: &[F]) -> Vec<F> {
        assert!(n[0].is_zero(), "argument must be nilpotent");
        let mut out: Vec<F> = self.zero();
        let mut power: Vec<F> = self.one();
        for (k, c) in coeffs.iter().enumerate() {
            if k > self.socle_degree() {
                break;
            }
            if !c.is_zero() {
                for (o, p) in out.iter_mut().zip(&power) {
                    *o = o.add(&p.mul(c));
                }
            }
            power = self.mul(&power, n);
        }
        out
    }

    /// `exp(n)` for nilpotent `n`.
    pub fn exp<F: fld::Field>(&self, n: &[F]) -> Vec<F> {
        let mut coeffs = Vec::new();
        let mut f = BigRational::one();
        for k in 0..=self.socle_degree() {
            if k > 0 {
                f /= BigRational::from_integer((k as i64).into());
            }
            coeffs.push(F::from_rational(&f));
        }
        self.power_series(n, &coeffs)
    }

    /// Inverse of `c(1 + n)` with `c` a nonzero scalar and `n` nilpotent.
    pub fn inverse<F: fld::Field>(&self, x: &[F]) -> Option<Vec<F>> {
        let c_inv = x[0].inv()?;
        let mut n: Vec<F> = x.iter().map(|v| v.mul(&c_inv)).collect();
        n[0] = F::zero();
        let coeffs: Vec<F> = (0..=self.socle_degree())
            .map(|k| if k % 2 == 0 { F::one() } else { F::one().neg() })
            .collect();
        Some(
            self.power_series(&n, &coeffs)
                .into_iter()
                .map(|v| v.mul(&c_inv))
                .collect(),
        )
    }

    pub fn d_class<F: fld::Field>(&self, i: usize) -> Vec<F> {
        self.lift(&self.d_classes[i])
    }
}

#[derive(Clone, Debug)]
pub struct SectorModule {
    pub space: GradedSpace,
    /// `action[a][b]` = algebra basis a acting on module basis b.
    pub action: Vec<Vec<Vec<BigRational>>>,
    /// ∫ on each basis element.
    pub integral: Vec<BigRational>,
    /// Interior quotient simplices, in the order used for generators.
    pub generators: Vec<Vec<usize>>,
    interior: Vec<Vec<usize>>,
}

impl SectorModule {
    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn zero<F: fld::Field>(&self) -> Vec<F> {
        vec![F::zero(); self.dim()]
    }

    /// Labels `D-monomial * F[I]` with I the first minimal interior subset of
    /// the support.
    pub fn labels(&self) -> Vec<String> {
        self.space
            .basis
            .iter()
            .map(|m| {
                let supp = support(m, &self.space.labels);
                let gen = self
                    .interior
                    .iter()
                    .find(|s| s.iter().all(|i| supp.contains(i)))
                    .expect("support contains an interior simplex");
                let mut rest = m.clone();
                for i in gen {
                    let k = self.space.labels.iter().position(|l| l == i).expect("label");
                    rest[k] -= 1;
                }
                let names: Vec<String> = gen.iter().map(|i| (i + 1).to_string()).collect();
                let f = format!("F[{}]", names.join(","));
                let d = self.space.d_label(&rest);
                if d.is_empty() {
                    f
                } else {
                    format!("{d}*{f}")
                }
            })
            .collect()
    }

    /// The generator `F̄_I` for an interior quotient simplex.
    pub fn generator<F: fld::Field>(&self, simplex: &[usize]) -> Vec<F> {
        self.space
            .reduce(&self.space.monomial_of(simplex))
            .iter()
            .map(F::from_rational)
            .collect()
    }

    pub fn act<F: fld::Field>(&self, a: &[F], m: &[F]) -> Vec<F> {
        let mut out: Vec<F> = self.zero();
        for (x, ax) in a.iter().enumerate() {
            if ax.is_zero() {
                continue;
            }
            for (y, my) in m.iter().enumerate() {
                if my.is_zero() {
                    continue;
                }
                combine(&self.action[x][y], &mut out, &ax.mul(my));
            }
        }
        out
    }

    pub fn integrate<F: fld::Field>(&self, m: &[F]) -> F {
        m.iter()
            .zip(&self.integral)
            .fold(F::zero(), |acc, (x, w)| acc.add(&x.scale(w)))
    }
}

#[derive(Clone, Debug)]
pub struct Sector {
    pub index: usize,
    pub element: BoxElement,
    pub quotient: QuotientFan,
    pub algebra: SectorAlgebra,
    pub module: SectorModule,
}

impl Sector {
    /// ∫(a·m).
    pub fn pair<F: fld::Field>(&self, a: &[F], m: &[F]) -> F {
        self.module.integrate(&self.module.act(a, m))
    }

    /// Gram matrix of the pairing on the two monomial bases.
    pub fn gram(&self) -> lattice::RatMatrix {
        (0..self.algebra.dim())
            .map(|a| {
                let mut ea = vec![BigRational::zero(); self.algebra.dim()];
                ea[a] = BigRational::one();
                (0..self.module.dim())
                    .map(|b| {
                        let mut eb = vec![BigRational::zero(); self.module.dim()];
                        eb[b] = BigRational::one();
                        self.pair(&ea, &eb)
                    })
                    .collect()
            })
            .collect()
    }
}

pub fn build_sector_algebra(q: &QuotientFan, n: usize) -> Result<SectorAlgebra> {
    let forms = linear_forms(q);
    let space = GradedSpace::build(
        &q.ray_labels,
        &forms,
        |m| q.is_simplex(&support(m, &q.ray_labels)),
        0,
        q.quotient_rank,
    )?;
    if space.basis.first().is_none_or(|b| b.iter().any(|&e| e > 0)) {
        return Err(Error::Input("algebra lost its identity".into()));
    }
    let dim = space.dim();
    let mult = space
        .basis
        .iter()
        .map(|a| space.basis.iter().map(|b| space.reduce(&add_monomials(a, b))).collect())
        .collect();
    let d_classes = (0..n)
        .map(|i| {
            if q.ray_labels.contains(&i) {
                space.reduce(&space.monomial_of(&[i]))
            } else {
                vec![BigRational::zero(); dim]
            }
        })
        .collect();
    Ok(SectorAlgebra { space, mult, d_classes })
}

/// Coefficient rows `(⟨m, v̄_i⟩)_i` for a basis of quotient functionals.
fn linear_forms(q: &QuotientFan) -> Vec<Vec<i64>> {
    (0..q.quotient_rank)
        .map(|k| q.quotient_points.iter().map(|p| p[k]).collect())
        .collect()
}

pub fn build_sector_module(q: &QuotientFan, alg: &SectorAlgebra) -> Result<SectorModule> {
    let forms = linear_forms(q);
    let min_degree = q
        .interior
        .iter()
        .map(|s| s.len())
        .min()
        .ok_or_else(|| Error::NotInterior(format!("sector with σ = {:?} has no interior simplex", q.sigma)))?;
    let space = GradedSpace::build(
        &q.ray_labels,
        &forms,
        |m| {
            let s = support(m, &q.ray_labels);
            q.is_simplex(&s) && q.is_interior(&s)
        },
        min_degree,
        q.quotient_rank,
    )?;
    let sector: Vec<i64> = q.sigma.iter().map(|&i| i as i64 + 1).collect();
    if space.dim() != alg.dim() {
        return Err(Error::DualityMismatch {
            sector,
            algebra: alg.dim(),
            module: space.dim(),
        });
    }
    let top: Vec<usize> = (0..space.dim())
        .filter(|&k| space.degrees[k] == q.quotient_rank)
        .collect();
    if top.len() != 1 {
        return Err(Error::DualityMismatch {
            sector,
            algebra: 1,
            module: top.len(),
        });
    }
    let top = top[0];
    let mut top_value: Option<BigRational> = None;
    for s in q.simplices.iter().filter(|s| s.len() == q.quotient_rank) {
        let c = space.reduce(&space.monomial_of(s))[top].clone();
        let vol = q.volume(s);
        if c.is_zero() || vol == 0 {
            return Err(Error::Input(format!(
                "top-dimensional simplex {s:?} integrates to zero"
            )));
        }
        let value = (c * BigRational::from_integer(vol.into())).recip();
        match &top_value {
            None => top_value = Some(value),
            Some(v) if *v == value => {}
            Some(_) => return Err(Error::Input(format!("integration functional is inconsistent at {s:?}"))),
        }
    }
    let mut integral = vec![BigRational::zero(); space.dim()];
    integral[top] = top_value.expect("a top-dimensional simplex");
    let action = alg
        .space
        .basis
        .iter()
        .map(|a| space.basis.iter().map(|b| space.reduce(&add_monomials(a, b))).collect())
        .collect();
    Ok(SectorModule {
        generators: q.interior.clone(),
        interior: q.interior.clone(),
        space,
        action,
        integral,
    })
}

/// Builds every sector of the fan, concurrently.
pub fn build_sectors(fan: &Fan) -> Result<Vec<Sector>> {
    (0..fan.boxes.len())
        .into_par_iter()
        .map(|k| {
            let quotient = fan.star_quotient(k);
            let algebra = build_sector_algebra(&quotient, fan.n())?;
            let module = build_sector_module(&quotient, &algebra)?;
            Ok(Sector {
                index: k,
                element: fan.boxes[k].clone(),
                quotient,
                algebra,
                module,
            })
        })
        .collect()
}


#[cfg(test)]
mod proptests {
    use super::*;
    use crate::fans::{validate_fan, FanInput};
    use proptest::prelude::*;

    fn segment_fan() -> impl Strategy<Value = Fan> {
        (2i64..7, proptest::collection::vec(any::<bool>(), 6)).prop_map(|(len, keep)| {
            let points: Vec<Vec<i64>> = (0..=len).map(|a| vec![a, 1]).collect();
            let mut rays = vec![0usize];
            for a in 1..len as usize {
                if keep[a - 1] {
                    rays.push(a);
                }
            }
            rays.push(len as usize);
            let cones = rays.windows(2).map(|w| vec![w[0] + 1, w[1] + 1]).collect();
            validate_fan(&FanInput {
                rank: 2,
                points,
                max_simplices: cones,
                weights: None,
            })
            .unwrap()
        })
    }

    /// Cones over triangulated polygons at height one in rank 3.
    fn polygon_fan() -> impl Strategy<Value = Fan> {
        prop_oneof![
            Just((
                vec![vec![0, 0, 1], vec![1, 0, 1], vec![0, 1, 1], vec![1, 1, 1]],
                vec![vec![1, 2, 4], vec![1, 3, 4]]
            )),
            Just((
                vec![vec![0, 0, 1], vec![1, 0, 1], vec![0, 1, 1], vec![1, 1, 1]],
                vec![vec![1, 2, 3], vec![2, 3, 4]]
            )),
            Just((
                vec![vec![0, 0, 1], vec![2, 0, 1], vec![0, 2, 1], vec![1, 1, 1]],
                vec![vec![1, 2, 4], vec![1, 3, 4]]
            )),
            Just((vec![vec![0, 0, 1], vec![2, 0, 1], vec![0, 2, 1]], vec![vec![1, 2, 3]])),
            Just((
                vec![vec![0, 0, 1], vec![3, 0, 1], vec![0, 3, 1], vec![1, 1, 1]],
                vec![vec![1, 2, 4], vec![2, 3, 4], vec![1, 3, 4]]
            )),
        ]
        .prop_map(|(points, cones)| {
            validate_fan(&FanInput {
                rank: 3,
                points,
                max_simplices: cones,
                weights: None,
            })
            .unwrap()
        })
    }

    fn check_invariants(fan: &Fan) -> std::result::Result<(), TestCaseError> {
        let sectors = build_sectors(fan).unwrap();
        let total: usize = sectors.iter().map(|s| s.algebra.dim()).sum();
        let volume: i64 = fan.max_cones.iter().map(|c| fan.simplex_volume(c)).sum();
        prop_assert_eq!(total as i64, volume);
        for s in &sectors {
            prop_assert_eq!(lattice::rank(&s.gram()), s.algebra.dim());
            for (k, &d) in s.module.space.degrees.iter().enumerate() {
                if d != s.quotient.quotient_rank {
                    prop_assert!(s.module.integral[k].is_zero());
                }
            }
            // global linear forms act as zero on the module
            for m in &s.quotient.functionals {
                let mut form = s.algebra.zero::<BigRational>();
                for (k, &i) in s.quotient.ray_labels.iter().enumerate() {
                    let c = BigRational::from_integer(lattice::dot(m, &fan.points[i]).into());
                    let di = &s.algebra.d_classes[i];
                    for (f, x) in form.iter_mut().zip(di) {
                        *f += &c * x;
                    }
                    let _ = k;
                }
                for b in 0..s.module.dim() {
                    let mut eb = s.module.zero::<BigRational>();
                    eb[b] = BigRational::one();
                    prop_assert!(s.module.act(&form, &eb).iter().all(|x| x.is_zero()));
                }
            }
        }
        Ok(())
    }

    proptest! {
        #[test]
        fn duality_and_volume_on_segments(fan in segment_fan()) {
            check_invariants(&fan)?;
        }

        #[test]
        fn duality_and_volume_on_polygons(fan in polygon_fan()) {
            check_invariants(&fan)?;
        }
    }
}
