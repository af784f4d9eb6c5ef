//! Pairings between solutions of the two GKZ systems: the logarithmic
//! Hessian, pairing with the constant solution and candidate pairing tables.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use num_rational::BigRational;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exactnum::field as fld;
use crate::exactnum::{rational_to_f64, Cyclotomic};
use crate::gamma::{untwisted_sector, GammaCircFamily, Kind, SeriesConfig, SolutionFamily};
use crate::input::PairingEntry;
use crate::ktheory::{flatten, KTheory, KcMonomial, PairingMatrix};
use crate::lattice;

/// `Σ_{|I| = rank} Vol_I² x^I [Σ_{i∈I} v_i]`, grouped by the lattice point.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HessianPolynomial {
    pub terms: BTreeMap<Vec<i64>, Vec<(Vec<usize>, i64)>>,
}

impl HessianPolynomial {
    /// Value of the coefficient of `[d]` at a point given by `log x`.
    pub fn coefficient(&self, d: &[i64], log_x: &[Complex64]) -> Complex64 {
        self.terms.get(d).map_or(Complex64::new(0.0, 0.0), |ts| {
            ts.iter()
                .map(|(s, w)| *w as f64 * s.iter().map(|&i| log_x[i]).sum::<Complex64>().exp())
                .sum()
        })
    }
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    if n < k {
        return Vec::new();
    }
    let mut out = subsets(n - 1, k);
    for mut s in subsets(n - 1, k - 1) {
        s.push(n - 1);
        out.push(s);
    }
    out.sort();
    out
}

pub fn hessian(points: &[Vec<i64>], rank: usize) -> HessianPolynomial {
    let mut terms: BTreeMap<Vec<i64>, Vec<(Vec<usize>, i64)>> = BTreeMap::new();
    for s in subsets(points.len(), rank) {
        let vs: Vec<Vec<i64>> = s.iter().map(|&i| points[i].clone()).collect();
        let vol = lattice::det(&vs).abs();
        if vol == 0 {
            continue;
        }
        let d: Vec<i64> = (0..rank).map(|m| vs.iter().map(|v| v[m]).sum()).collect();
        terms.entry(d).or_default().push((s, vol * vol));
    }
    HessianPolynomial { terms }
}

#[derive(Clone, Debug, Serialize)]
pub struct ConstancyReport {
    pub rows: usize,
    pub cols: usize,
    /// Row-major values, one per sample point.
    #[serde(serialize_with = "ser_complex_rows")]
    pub values: Vec<Vec<Complex64>>,
    #[serde(serialize_with = "ser_complex")]
    pub constant: Vec<Complex64>,
    /// Largest distance from the mean, relative to the mean's norm.
    pub deviation: f64,
    pub tolerance: f64,
    pub passed: bool,
}

fn pair(z: &Complex64) -> [f64; 2] {
    [z.re, z.im]
}

fn ser_complex<S: serde::Serializer>(v: &[Complex64], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(pair))
}

fn ser_complex_rows<S: serde::Serializer>(v: &[Vec<Complex64>], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|r| r.iter().map(pair).collect::<Vec<_>>()))
}

pub fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn constancy(rows: usize, cols: usize, values: Vec<Vec<Complex64>>, tolerance: f64) -> ConstancyReport {
    let len = rows * cols;
    let mut mean = vec![Complex64::new(0.0, 0.0); len];
    for v in &values {
        for (m, z) in mean.iter_mut().zip(v) {
            *m += z / values.len() as f64;
        }
    }
    let scale = norm(&mean);
    let deviation = values
        .iter()
        .map(|v| {
            let d: Vec<Complex64> = v.iter().zip(&mean).map(|(a, b)| a - b).collect();
            if scale == 0.0 {
                norm(&d)
            } else {
                norm(&d) / scale
            }
        })
        .fold(0.0, f64::max);
    ConstancyReport {
        rows,
        cols,
        values,
        constant: mean,
        deviation,
        tolerance,
        passed: deviation <= tolerance,
    }
}

fn require(family: &dyn SolutionFamily, kt: &KTheory, p: &[i64]) -> Result<()> {
    if family.defined_at(&kt.fan, p) {
        Ok(())
    } else {
        Err(Error::MissingComponent {
            what: family.name(),
            point: p.to_vec(),
        })
    }
}

/// `Σ_d Coeff_d(Hessian)(x) Ψ_d(x)` at every sample.
pub fn pair_with_one(
    kt: &KTheory,
    psi: &dyn SolutionFamily,
    samples: &[Vec<Complex64>],
    truncation: u32,
    tolerance: f64,
) -> Result<ConstancyReport> {
    let h = hessian(&kt.fan.points, kt.fan.rank);
    for d in h.terms.keys() {
        require(psi, kt, d)?;
    }
    let values: Vec<Vec<Complex64>> = samples
        .par_iter()
        .map(|lx| -> Result<Vec<Complex64>> {
            let cfg = SeriesConfig::new(truncation, lx.clone());
            let mut acc: Option<Vec<Complex64>> = None;
            for d in h.terms.keys() {
                let w = h.coefficient(d, lx);
                let v = flatten(&psi.evaluate(kt, d, &cfg)?.sectors);
                let acc = acc.get_or_insert_with(|| vec![Complex64::new(0.0, 0.0); v.len()]);
                for (a, b) in acc.iter_mut().zip(&v) {
                    *a += b * w;
                }
            }
            Ok(acc.unwrap_or_default())
        })
        .collect::<Result<_>>()?;
    let len = values.first().map_or(0, |v| v.len());
    Ok(constancy(1, len, values, tolerance))
}

/// `Vol_I F_I` in the untwisted sector, for every maximal cone `I`.
pub fn point_class(kt: &KTheory) -> Result<Vec<Vec<BigRational>>> {
    let s = untwisted_sector(kt);
    let module = &kt.sectors[s].module;
    let classes: Vec<Vec<BigRational>> = kt
        .fan
        .max_cones
        .iter()
        .map(|cone| {
            let v = BigRational::from_integer(kt.fan.simplex_volume(cone).into());
            module.generator::<BigRational>(cone).iter().map(|x| x * &v).collect()
        })
        .collect();
    if classes.windows(2).any(|w| w[0] != w[1]) {
        return Err(Error::Input("the point class depends on the chosen cone".into()));
    }
    let mut out: Vec<Vec<BigRational>> = kt.sectors.iter().map(|x| x.module.zero()).collect();
    out[s] = classes[0].clone();
    Ok(out)
}

#[derive(Clone, Debug, Serialize)]
pub struct VolumeReport {
    pub conv_volume: i64,
    #[serde(serialize_with = "ser_complex")]
    pub expected: Vec<Complex64>,
    pub constancy: ConstancyReport,
    pub residual: f64,
    pub passed: bool,
}

/// Compares `pair_with_one(Γ°)` with `Vol(conv)/(2πi)^rank · [O_p]`.
pub fn verify_volume_identity(
    kt: &KTheory,
    samples: &[Vec<Complex64>],
    truncation: u32,
    tolerance: f64,
) -> Result<VolumeReport> {
    let constancy = pair_with_one(kt, &GammaCircFamily, samples, truncation, tolerance)?;
    let conv_volume: i64 = kt.fan.max_cones.iter().map(|c| kt.fan.simplex_volume(c)).sum();
    let factor = conv_volume as f64 / Complex64::new(0.0, 2.0 * PI).powi(kt.fan.rank as i32);
    let expected: Vec<Complex64> = flatten(&point_class(kt)?)
        .iter()
        .map(|q| factor * rational_to_f64(q))
        .collect();
    let diff: Vec<Complex64> = constancy.constant.iter().zip(&expected).map(|(a, b)| a - b).collect();
    let residual = norm(&diff) / norm(&expected);
    let passed = residual <= tolerance && constancy.passed;
    Ok(VolumeReport {
        conv_volume,
        expected,
        constancy,
        residual,
        passed,
    })
}

/// `Σ p_{c,d}(x) Φ_c(x) ⊗ Ψ_d(x)` at every sample, as a matrix indexed by
/// the global bases of `⊕H_γ` and `⊕H_γ^c`.
pub fn evaluate_candidate_pairing(
    kt: &KTheory,
    table: &[PairingEntry],
    phi: &dyn SolutionFamily,
    psi: &dyn SolutionFamily,
    samples: &[Vec<Complex64>],
    truncation: u32,
    tolerance: f64,
) -> Result<ConstancyReport> {
    for e in table {
        require(phi, kt, &e.c)?;
        require(psi, kt, &e.d)?;
    }
    let dims = |kind: Kind| -> usize {
        kt.sectors
            .iter()
            .map(|s| match kind {
                Kind::Plain => s.algebra.dim(),
                Kind::Compact => s.module.dim(),
            })
            .sum()
    };
    let (rows, cols) = (dims(phi.kind()), dims(psi.kind()));
    let values: Vec<Vec<Complex64>> = samples
        .par_iter()
        .map(|lx| -> Result<Vec<Complex64>> {
            let cfg = SeriesConfig::new(truncation, lx.clone());
            let mut phis: BTreeMap<&Vec<i64>, Vec<Complex64>> = BTreeMap::new();
            let mut psis: BTreeMap<&Vec<i64>, Vec<Complex64>> = BTreeMap::new();
            let mut acc = vec![Complex64::new(0.0, 0.0); rows * cols];
            for e in table {
                if !phis.contains_key(&e.c) {
                    phis.insert(&e.c, flatten(&phi.evaluate(kt, &e.c, &cfg)?.sectors));
                }
                if !psis.contains_key(&e.d) {
                    psis.insert(&e.d, flatten(&psi.evaluate(kt, &e.d, &cfg)?.sectors));
                }
                let w: Complex64 = e
                    .poly
                    .iter()
                    .map(|(q, mono)| {
                        let lg: Complex64 = mono.iter().zip(lx).map(|(&k, l)| l * k as f64).sum();
                        rational_to_f64(q) * lg.exp()
                    })
                    .sum();
                let (a, b) = (&phis[&e.c], &psis[&e.d]);
                for (i, x) in a.iter().enumerate() {
                    for (j, y) in b.iter().enumerate() {
                        acc[i * cols + j] += w * x * y;
                    }
                }
            }
            Ok(acc)
        })
        .collect::<Result<_>>()?;
    Ok(constancy(rows, cols, values, tolerance))
}

#[derive(Clone, Debug, Serialize)]
pub struct InverseEulerReport {
    /// The tensor in the monomial bases, indexed `[K basis][K^c basis]`.
    #[serde(serialize_with = "ser_complex_rows")]
    pub monomial_tensor: Vec<Vec<Complex64>>,
    /// Inverse of the pairing matrix, indexed the same way.
    pub inverse_pairing: Vec<Vec<String>>,
    #[serde(serialize_with = "ser_one")]
    pub best_scale: Complex64,
    pub residual: f64,
    pub passed: bool,
}

fn ser_one<S: serde::Serializer>(z: &Complex64, s: S) -> std::result::Result<S::Ok, S::Error> {
    serde::Serialize::serialize(&pair(z), s)
}

fn complex_matrix(m: &[Vec<Cyclotomic>]) -> Vec<Vec<Complex64>> {
    m.iter()
        .map(|r| r.iter().map(|z| z.complex_value()).collect())
        .collect()
}

/// Rewrites a tensor `T` in `(⊕H_γ) ⊗ (⊕H_γ^c)` through the bases of the
/// pairing matrix and compares it with `scale · P^{-1}`. With no scale the
/// least-squares scale is used.
pub fn inverse_euler_check(
    kt: &KTheory,
    tensor: &[Vec<Complex64>],
    matrix: &PairingMatrix,
    scale: Option<Complex64>,
    tolerance: f64,
) -> Result<InverseEulerReport> {
    let ch: Vec<Vec<Cyclotomic>> = matrix.k_basis.iter().map(|a| flatten(&kt.ch(a))).collect();
    let chc: Vec<Vec<Cyclotomic>> = matrix
        .kc_basis
        .iter()
        .map(|m: &KcMonomial| flatten(&kt.chc(m)))
        .collect();
    // T = Chᵀ M Chc
    let ch_t_inv = complex_matrix(&fld::inverse(&lattice::transpose(&ch)).ok_or(Error::SingularMatrix)?);
    let chc_inv = complex_matrix(&fld::inverse(&chc).ok_or(Error::SingularMatrix)?);
    let m = matmul(&matmul(&ch_t_inv, tensor), &chc_inv);
    let p: Vec<Vec<BigRational>> = matrix
        .entries
        .iter()
        .map(|r| r.iter().map(|x| BigRational::from_integer(x.clone())).collect())
        .collect();
    let p_inv = fld::inverse(&p).ok_or(Error::SingularMatrix)?;
    let q: Vec<Vec<Complex64>> = p_inv
        .iter()
        .map(|r| r.iter().map(|x| Complex64::new(rational_to_f64(x), 0.0)).collect())
        .collect();
    let qf: Vec<Complex64> = q.iter().flatten().copied().collect();
    let mf: Vec<Complex64> = m.iter().flatten().copied().collect();
    let best_scale = qf.iter().zip(&mf).map(|(a, b)| a.conj() * b).sum::<Complex64>() / norm(&qf).powi(2);
    let s = scale.unwrap_or(best_scale);
    let diff: Vec<Complex64> = qf.iter().zip(&mf).map(|(a, b)| b - a * s).collect();
    let residual = norm(&diff) / (norm(&qf) * s.norm()).max(f64::MIN_POSITIVE);
    Ok(InverseEulerReport {
        monomial_tensor: m,
        inverse_pairing: p_inv
            .iter()
            .map(|r| r.iter().map(|x| x.to_string()).collect())
            .collect(),
        best_scale,
        residual,
        passed: residual <= tolerance,
    })
}

fn matmul(a: &[Vec<Complex64>], b: &[Vec<Complex64>]) -> Vec<Vec<Complex64>> {
    let inner = b.len();
    let cols = b.first().map_or(0, |r| r.len());
    a.iter()
        .map(|r| (0..cols).map(|j| (0..inner).map(|k| r[k] * b[k][j]).sum()).collect())
        .collect()
}

/// Reshapes a row-major constant into a matrix.
pub fn as_matrix(report: &ConstancyReport) -> Vec<Vec<Complex64>> {
    report.constant.chunks(report.cols.max(1)).map(|c| c.to_vec()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::rat;
    use crate::gamma::{GammaFamily, TrivialFamily};
    use crate::input::{explicit_pairing, key_example, key_example_coarse, PairingEntry};
    use crate::ktheory::{pairing_matrix, Hrr};

    fn c(v: &[(f64, f64)]) -> Vec<Complex64> {
        v.iter().map(|&(a, b)| Complex64::new(a, b)).collect()
    }

    fn fine_samples() -> Vec<Vec<Complex64>> {
        vec![
            c(&[(0.1, 0.2), (2.0, 0.3), (-0.2, 0.1)]),
            c(&[(-1.0, 0.5), (1.5, -0.4), (0.3, 2.0)]),
            c(&[(0.0, 0.0), (1.7, 0.0), (0.4, -1.0)]),
        ]
    }

    fn coarse_samples() -> Vec<Vec<Complex64>> {
        vec![
            c(&[(0.1, 0.2), (-2.0, 0.3), (-0.2, 0.1)]),
            c(&[(1.0, 0.5), (-1.5, -0.4), (0.3, 2.0)]),
            c(&[(0.0, 0.0), (-1.7, 0.0), (0.4, -1.0)]),
        ]
    }

    #[test]
    fn hessian_of_key_example() {
        let h = hessian(&key_example().points, 2);
        let expected: BTreeMap<Vec<i64>, Vec<(Vec<usize>, i64)>> = [
            (vec![1, 2], vec![(vec![0, 1], 1)]),
            (vec![3, 2], vec![(vec![0, 2], 9)]),
            (vec![4, 2], vec![(vec![1, 2], 4)]),
        ]
        .into_iter()
        .collect();
        assert_eq!(h.terms, expected);
        let dup = hessian(&[vec![1], vec![1]], 1);
        assert_eq!(dup.terms[&vec![1]], vec![(vec![0], 1), (vec![1], 1)]);
        let flat = hessian(&[vec![1, 1], vec![2, 2], vec![0, 1]], 2);
        assert!(flat.terms.values().flatten().all(|(s, _)| s != &vec![0, 1]));
    }

    #[test]
    fn hessian_total_weight() {
        let pts = vec![
            vec![0, 0, 1],
            vec![1, 0, 1],
            vec![0, 1, 1],
            vec![-1, -1, 1],
            vec![1, 1, 1],
        ];
        let h = hessian(&pts, 3);
        let total: i64 = h.terms.values().flatten().map(|(_, w)| w).sum();
        let brute: i64 = subsets(5, 3)
            .iter()
            .map(|s| {
                let m: Vec<Vec<i64>> = s.iter().map(|&i| pts[i].clone()).collect();
                lattice::det(&m).pow(2)
            })
            .sum();
        assert_eq!(total, brute);
    }

    #[test]
    fn volume_identity_on_both_fans() {
        for (fan, samples) in [
            (key_example(), fine_samples()),
            (key_example_coarse(), coarse_samples()),
        ] {
            let kt = KTheory::new(fan).unwrap();
            let r = verify_volume_identity(&kt, &samples, 24, 1e-8).unwrap();
            assert_eq!(r.conv_volume, 3);
            assert!(r.passed, "{} {}", r.residual, r.constancy.deviation);
        }
    }

    #[test]
    fn pairing_with_one_is_stable_in_truncation() {
        let kt = KTheory::new(key_example()).unwrap();
        let s = fine_samples();
        let a = pair_with_one(&kt, &GammaCircFamily, &s, 24, 1e-8).unwrap();
        let b = pair_with_one(&kt, &GammaCircFamily, &s, 28, 1e-8).unwrap();
        let diff: Vec<Complex64> = a.constant.iter().zip(&b.constant).map(|(x, y)| x - y).collect();
        assert!(norm(&diff) < 1e-8 * norm(&a.constant));
    }

    #[test]
    fn trivial_family_restricts_to_pairing_with_one() {
        let kt = KTheory::new(key_example()).unwrap();
        let h = hessian(&kt.fan.points, 2);
        let table: Vec<PairingEntry> = h
            .terms
            .iter()
            .map(|(d, ts)| PairingEntry {
                c: vec![0, 0],
                d: d.clone(),
                poly: ts
                    .iter()
                    .map(|(s, w)| {
                        let mut mono = vec![0u32; 3];
                        for &i in s {
                            mono[i] = 1;
                        }
                        (rat(*w, 1), mono)
                    })
                    .collect(),
            })
            .collect();
        let s = fine_samples();
        let r = evaluate_candidate_pairing(&kt, &table, &TrivialFamily, &GammaCircFamily, &s, 24, 1e-8).unwrap();
        let one = pair_with_one(&kt, &GammaCircFamily, &s, 24, 1e-8).unwrap();
        let row: Vec<Complex64> = as_matrix(&r)[0].clone();
        let diff: Vec<Complex64> = row.iter().zip(&one.constant).map(|(x, y)| x - y).collect();
        assert!(norm(&diff) < 1e-12);
    }

    #[test]
    fn explicit_pairing_on_fine_fan() {
        let kt = KTheory::new(key_example()).unwrap();
        let table = explicit_pairing(&kt.fan);
        let r =
            evaluate_candidate_pairing(&kt, &table, &GammaFamily, &GammaCircFamily, &fine_samples(), 24, 1e-6).unwrap();
        assert!(r.passed, "{}", r.deviation);
        let k = -3.0 / (2.0 * PI * PI);
        let expected = [[0.0, k, 0.0], [-k, 0.0, 0.0], [0.0, 0.0, 4.0 * k]];
        for (row, exp) in as_matrix(&r).iter().zip(expected) {
            for (z, e) in row.iter().zip(exp) {
                assert!((z - e).norm() < 1e-6, "{z} vs {e}");
            }
        }
        let kb = kt.canonical_k_basis();
        let kc = kt.canonical_kc_basis();
        let pm = pairing_matrix(&kt, &Hrr, &kb, &kc).unwrap();
        let scale = Complex64::new(-3.0 / (4.0 * PI * PI), 0.0);
        let ie = inverse_euler_check(&kt, &as_matrix(&r), &pm, Some(scale), 1e-6).unwrap();
        assert!(ie.passed, "{}", ie.residual);
    }

    #[test]
    fn explicit_pairing_on_coarse_fan() {
        let kt = KTheory::new(key_example_coarse()).unwrap();
        let table = explicit_pairing(&kt.fan);
        let r = evaluate_candidate_pairing(&kt, &table, &GammaFamily, &GammaCircFamily, &coarse_samples(), 24, 1e-6)
            .unwrap();
        assert!(r.passed);
        let kb = kt.canonical_k_basis();
        let kc = kt.canonical_kc_basis();
        let pm = pairing_matrix(&kt, &Hrr, &kb, &kc).unwrap();
        let ie = inverse_euler_check(&kt, &as_matrix(&r), &pm, None, 1e-6).unwrap();
        assert!(ie.passed);
        assert!((ie.best_scale - Complex64::new(-3.0 / (4.0 * PI * PI), 0.0)).norm() < 1e-8);
    }

    #[test]
    fn inverse_of_pairing_is_self_consistent() {
        let kt = KTheory::new(key_example()).unwrap();
        let kb = kt.canonical_k_basis();
        let kc = kt.canonical_kc_basis();
        let pm = pairing_matrix(&kt, &Hrr, &kb, &kc).unwrap();
        // T = Chᵀ P⁻¹ Chc
        let ch: Vec<Vec<Complex64>> = kb
            .iter()
            .map(|a| flatten(&kt.ch(a)).iter().map(|z| z.complex_value()).collect())
            .collect();
        let chc: Vec<Vec<Complex64>> = kc
            .iter()
            .map(|m| flatten(&kt.chc(m)).iter().map(|z| z.complex_value()).collect())
            .collect();
        let p: Vec<Vec<BigRational>> = pm
            .entries
            .iter()
            .map(|r| r.iter().map(|x| BigRational::from_integer(x.clone())).collect())
            .collect();
        let q: Vec<Vec<Complex64>> = fld::inverse(&p)
            .unwrap()
            .iter()
            .map(|r| r.iter().map(|x| Complex64::new(rational_to_f64(x), 0.0)).collect())
            .collect();
        let t = matmul(&matmul(&lattice::transpose(&ch), &q), &chc);
        let ie = inverse_euler_check(&kt, &t, &pm, Some(Complex64::new(1.0, 0.0)), 1e-12).unwrap();
        assert!(ie.passed);
    }

    #[test]
    fn missing_component_is_reported() {
        let kt = KTheory::new(key_example()).unwrap();
        let table = vec![PairingEntry {
            c: vec![0, 0],
            d: vec![0, 1],
            poly: vec![(rat(1, 1), vec![0, 0, 0])],
        }];
        let r = evaluate_candidate_pairing(&kt, &table, &GammaFamily, &GammaCircFamily, &fine_samples(), 8, 1e-6);
        assert!(matches!(r, Err(Error::MissingComponent { .. })));
    }
}
