//! Lattice and fan combinatorics: validation of the cone and its
//! triangulation, simplex volumes, twisted sectors and quotient fans.
//!
//! Point indices are 0-based inside the library; input and output layers
//! shift them to the 1-based convention.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{self, IntMatrix};
use crate::lp;

/// Raw cone description, indices 1-based as in the JSON input.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FanInput {
    pub rank: usize,
    pub points: Vec<Vec<i64>>,
    pub max_simplices: Vec<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<RationalText>>,
}

/// A rational written either as a JSON integer or as a `"p/q"` string.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RationalText {
    Int(i64),
    Text(String),
}

impl RationalText {
    pub fn parse(&self) -> Result<BigRational> {
        match self {
            RationalText::Int(k) => Ok(BigRational::from_integer(BigInt::from(*k))),
            RationalText::Text(s) => parse_rational(s),
        }
    }
}

/// A twisted sector `γ = Σ γ_i v_i`, `0 ≤ γ_i < 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoxElement {
    pub gamma: Vec<i64>,
    /// Minimal cone containing γ (sorted, 0-based).
    pub sigma: Vec<usize>,
    /// γ_i for every point index (zero off `sigma`).
    pub coords: Vec<BigRational>,
    pub phase_order: u64,
}

impl BoxElement {
    pub fn is_untwisted(&self) -> bool {
        self.sigma.is_empty()
    }
}

#[derive(Clone, Debug)]
pub struct QuotientFan {
    /// Index of the base sector in `Fan::boxes`.
    pub base: usize,
    pub sigma: Vec<usize>,
    pub quotient_rank: usize,
    /// Indices i ∈ Star(σ) \ σ.
    pub ray_labels: Vec<usize>,
    /// Images of `v_i` for each label, in a basis of N/Span(σ).
    pub quotient_points: Vec<Vec<i64>>,
    /// Functionals on N vanishing on σ: a basis of the dual of the quotient.
    pub functionals: Vec<Vec<i64>>,
    /// Images `I \ σ` of the cones `I ⊇ σ`, ordered by size then lexicographically.
    pub simplices: Vec<Vec<usize>>,
    /// Those images whose preimage `I ∪ σ` is interior.
    pub interior: Vec<Vec<usize>>,
    pub box_order: i64,
}

impl QuotientFan {
    pub fn label_position(&self, i: usize) -> Option<usize> {
        self.ray_labels.iter().position(|&r| r == i)
    }

    pub fn is_simplex(&self, s: &[usize]) -> bool {
        self.simplices.iter().any(|t| t == s)
    }

    pub fn is_interior(&self, s: &[usize]) -> bool {
        self.interior.iter().any(|t| t == s)
    }

    /// Volume of a quotient simplex inside the quotient lattice.
    pub fn volume(&self, s: &[usize]) -> i64 {
        let vecs: Vec<Vec<i64>> = s
            .iter()
            .map(|&i| self.quotient_points[self.label_position(i).expect("label")].clone())
            .collect();
        lattice::lattice_volume(&vecs, self.quotient_rank)
    }
}

#[derive(Clone, Debug)]
pub struct Fan {
    pub rank: usize,
    pub points: Vec<Vec<i64>>,
    pub max_cones: Vec<Vec<usize>>,
    /// Every face of Σ including ∅, ordered by size then lexicographically.
    pub simplices: Vec<Vec<usize>>,
    simplex_set: BTreeSet<Vec<usize>>,
    pub boundary_walls: Vec<Vec<usize>>,
    pub interior: Vec<Vec<usize>>,
    pub weights: Vec<BigRational>,
    pub weights_supplied: bool,
    pub gorenstein_degree: Option<Vec<i64>>,
    pub boxes: Vec<BoxElement>,
    /// For each maximal cone, indices into `boxes` of Box(J).
    pub cone_boxes: Vec<Vec<usize>>,
}

pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let parse = |t: &str| {
        t.trim()
            .parse::<BigInt>()
            .map_err(|_| Error::Input(format!("bad rational `{s}`")))
    };
    match s.split_once('/') {
        Some((n, d)) => {
            let d = parse(d)?;
            if d.is_zero() {
                return Err(Error::Input(format!("zero denominator in `{s}`")));
            }
            Ok(BigRational::new(parse(n)?, d))
        }
        None => Ok(BigRational::from_integer(parse(s)?)),
    }
}

fn sort_size_lex(v: &mut [Vec<usize>]) {
    v.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
}

fn subsets(set: &[usize]) -> impl Iterator<Item = Vec<usize>> + '_ {
    (0u64..1 << set.len()).map(move |mask| {
        set.iter()
            .enumerate()
            .filter(|(k, _)| mask >> k & 1 == 1)
            .map(|(_, &i)| i)
            .collect()
    })
}

pub fn validate_fan(input: &FanInput) -> Result<Fan> {
    let rank = input.rank;
    let n = input.points.len();
    if rank == 0 {
        return Err(Error::Input("rank must be positive".into()));
    }
    if n == 0 || input.max_simplices.is_empty() {
        return Err(Error::Input("points and max_simplices must be nonempty".into()));
    }
    for (k, p) in input.points.iter().enumerate() {
        if p.len() != rank {
            return Err(Error::Input(format!(
                "point {} has {} coordinates, expected {rank}",
                k + 1,
                p.len()
            )));
        }
    }
    let mut max_cones = Vec::new();
    for s in &input.max_simplices {
        let mut c: Vec<usize> = Vec::with_capacity(s.len());
        for &i in s {
            if i == 0 || i > n {
                return Err(Error::Input(format!("simplex index {i} out of range 1..={n}")));
            }
            c.push(i - 1);
        }
        c.sort_unstable();
        c.dedup();
        if c.len() != rank {
            return Err(Error::Input(format!(
                "maximal simplex {s:?} must have {rank} distinct indices"
            )));
        }
        max_cones.push(c);
    }
    max_cones.sort();
    max_cones.dedup();

    let points = input.points.clone();
    let vecs = |s: &[usize]| -> Vec<Vec<i64>> { s.iter().map(|&i| points[i].clone()).collect() };
    for c in &max_cones {
        if lattice::lattice_volume(&vecs(c), rank) == 0 {
            return Err(Error::NonSimplicial {
                simplex: c.iter().map(|i| i + 1).collect(),
            });
        }
    }

    let mut simplex_set = BTreeSet::new();
    for c in &max_cones {
        simplex_set.extend(subsets(c));
    }
    let mut simplices: Vec<Vec<usize>> = simplex_set.iter().cloned().collect();
    sort_size_lex(&mut simplices);

    let boundary_walls = check_walls(&points, &max_cones, rank)?;
    let inverses: Vec<lattice::RatMatrix> = max_cones
        .iter()
        .map(|c| cone_inverse(&points, c).expect("nonsingular"))
        .collect();
    check_covering(&points, &inverses)?;

    let mut interior: Vec<Vec<usize>> = simplices
        .iter()
        .filter(|s| !boundary_walls.iter().any(|w| s.iter().all(|i| w.contains(i))))
        .cloned()
        .collect();
    sort_size_lex(&mut interior);

    let gorenstein_degree = {
        let snf = lattice::smith_normal_form(&points, rank);
        snf.solve_integer(&vec![1; n])
    };

    let (weights, weights_supplied) = {
        let ineqs = convexity_inequalities(&points, &max_cones, &inverses);
        match &input.weights {
            Some(ws) => {
                if ws.len() != n {
                    return Err(Error::Input(format!("expected {n} weights, got {}", ws.len())));
                }
                let mu: Vec<BigRational> = ws.iter().map(RationalText::parse).collect::<Result<_>>()?;
                for (row, what) in &ineqs {
                    let v: BigRational = row.iter().zip(&mu).map(|(a, b)| a * b).sum();
                    if !v.is_positive() {
                        return Err(Error::NotProjective(format!("convexity fails strictly at {what}")));
                    }
                }
                (mu, true)
            }
            None => {
                let a: Vec<Vec<BigRational>> = ineqs.iter().map(|(r, _)| r.clone()).collect();
                let b = vec![BigRational::one(); a.len()];
                // a single cone imposes nothing; any weights will do
                let mu = if a.is_empty() {
                    vec![BigRational::zero(); n]
                } else {
                    lp::feasible_point(&a, &b)
                        .ok_or_else(|| Error::NotProjective("no strictly convex support function exists".into()))?
                };
                (mu, false)
            }
        }
    };

    let (boxes, cone_boxes) = compute_boxes(&points, &max_cones, &inverses, rank);

    Ok(Fan {
        rank,
        points,
        max_cones,
        simplices,
        simplex_set,
        boundary_walls,
        interior,
        weights,
        weights_supplied,
        gorenstein_degree,
        boxes,
        cone_boxes,
    })
}

/// Inverse of the matrix whose columns are `v_j, j ∈ cone`; row k is the
/// dual covector of the k-th vertex.
fn cone_inverse(points: &[Vec<i64>], cone: &[usize]) -> Option<lattice::RatMatrix> {
    let cols: IntMatrix = cone.iter().map(|&i| points[i].clone()).collect();
    lattice::inverse(&lattice::to_rational(&lattice::transpose(&cols)))
}

fn coords_in(inv: &lattice::RatMatrix, p: &[i64]) -> Vec<BigRational> {
    inv.iter().map(|row| lattice::dot_rat(row, p)).collect()
}

fn check_walls(points: &[Vec<i64>], cones: &[Vec<usize>], rank: usize) -> Result<Vec<Vec<usize>>> {
    let mut walls: BTreeMap<Vec<usize>, Vec<i64>> = BTreeMap::new();
    let mut normals: BTreeMap<Vec<usize>, Vec<i64>> = BTreeMap::new();
    for c in cones {
        for &a in c {
            let face: Vec<usize> = c.iter().copied().filter(|&i| i != a).collect();
            let h = normals
                .entry(face.clone())
                .or_insert_with(|| {
                    let vs: Vec<Vec<i64>> = face.iter().map(|&i| points[i].clone()).collect();
                    lattice::normal_covector(&vs, rank)
                })
                .clone();
            let s = lattice::dot(&h, &points[a]).signum();
            walls.entry(face).or_default().push(s);
        }
    }
    let mut boundary = Vec::new();
    for (face, sides) in walls {
        let h = &normals[&face];
        let label: Vec<usize> = face.iter().map(|i| i + 1).collect();
        match sides.as_slice() {
            [s] => {
                if points.iter().any(|p| s * lattice::dot(h, p) < 0) {
                    return Err(Error::NotCovering(format!(
                        "points lie beyond the unshared wall {label:?}"
                    )));
                }
                boundary.push(face);
            }
            [s, t] if s * t < 0 => {}
            _ => {
                return Err(Error::NotCovering(format!(
                    "wall {label:?} is shared inconsistently by {} cones",
                    sides.len()
                )))
            }
        }
    }
    Ok(boundary)
}

fn check_covering(points: &[Vec<i64>], inverses: &[lattice::RatMatrix]) -> Result<()> {
    for (j, p) in points.iter().enumerate() {
        let inside = inverses
            .iter()
            .any(|inv| coords_in(inv, p).iter().all(|x| !x.is_negative()));
        if !inside {
            return Err(Error::NotCovering(format!("point {} lies in no maximal cone", j + 1)));
        }
    }
    // a generic point of C must lie in exactly one maximal cone
    const PRIMES: [i64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    let rank = points[0].len();
    for attempt in 0..16 {
        let mut p = vec![0i64; rank];
        for (j, v) in points.iter().enumerate() {
            let w = PRIMES[(j + attempt) % PRIMES.len()] + (j * j + attempt) as i64;
            for k in 0..rank {
                p[k] += w * v[k];
            }
        }
        let mut count = 0;
        let mut degenerate = false;
        for inv in inverses {
            let xs = coords_in(inv, &p);
            if xs.iter().all(|x| x.is_positive()) {
                count += 1;
            } else if xs.iter().all(|x| !x.is_negative()) {
                degenerate = true;
            }
        }
        if degenerate {
            continue;
        }
        if count != 1 {
            return Err(Error::NotCovering(format!(
                "a generic point lies in {count} maximal cones"
            )));
        }
        return Ok(());
    }
    Err(Error::NotCovering("could not find a generic point".into()))
}

/// Rows `r` with `r · μ > 0` required for strict convexity, with a label.
fn convexity_inequalities(
    points: &[Vec<i64>],
    cones: &[Vec<usize>],
    inverses: &[lattice::RatMatrix],
) -> Vec<(Vec<BigRational>, String)> {
    let n = points.len();
    let mut rows = Vec::new();
    for (x, c1) in cones.iter().enumerate() {
        for c2 in cones.iter().skip(x + 1) {
            let common = c1.iter().filter(|i| c2.contains(i)).count();
            if common + 1 != c1.len() {
                continue;
            }
            let b = *c2.iter().find(|i| !c1.contains(i)).expect("vertex");
            let beta = coords_in(&inverses[x], &points[b]);
            let mut row = vec![BigRational::zero(); n];
            row[b] += BigRational::one();
            for (k, &j) in c1.iter().enumerate() {
                row[j] -= &beta[k];
            }
            let l1: Vec<usize> = c1.iter().map(|i| i + 1).collect();
            let l2: Vec<usize> = c2.iter().map(|i| i + 1).collect();
            rows.push((row, format!("the wall between {l1:?} and {l2:?}")));
        }
    }
    let used: BTreeSet<usize> = cones.iter().flatten().copied().collect();
    for i in 0..n {
        if used.contains(&i) {
            continue;
        }
        for (x, c) in cones.iter().enumerate() {
            let beta = coords_in(&inverses[x], &points[i]);
            if beta.iter().all(|q| !q.is_negative()) {
                let mut row = vec![BigRational::zero(); n];
                row[i] += BigRational::one();
                for (k, &j) in c.iter().enumerate() {
                    row[j] -= &beta[k];
                }
                rows.push((row, format!("the unused point {}", i + 1)));
                break;
            }
        }
    }
    rows
}

fn lcm_denominators(qs: &[BigRational]) -> u64 {
    qs.iter().fold(1u64, |acc, q| {
        let d = q.denom().to_u64().expect("small denominator");
        acc.lcm(&d)
    })
}

fn compute_boxes(
    points: &[Vec<i64>],
    cones: &[Vec<usize>],
    inverses: &[lattice::RatMatrix],
    rank: usize,
) -> (Vec<BoxElement>, Vec<Vec<usize>>) {
    let n = points.len();
    let mut all: BTreeMap<Vec<i64>, BoxElement> = BTreeMap::new();
    let mut per_cone: Vec<Vec<Vec<i64>>> = Vec::new();
    for (x, c) in cones.iter().enumerate() {
        let cols: IntMatrix = c.iter().map(|&i| points[i].clone()).collect();
        let m = lattice::transpose(&cols);
        let snf = lattice::smith_normal_form(&m, rank);
        let u_inv = lattice::inverse(&lattice::to_rational(&snf.u)).expect("unimodular");
        let u_inv: IntMatrix = u_inv
            .iter()
            .map(|r| r.iter().map(|q| q.to_integer().to_i64().expect("integral")).collect())
            .collect();
        let mut reps: Vec<Vec<i64>> = vec![vec![]];
        for &d in &snf.diag {
            reps = reps
                .into_iter()
                .flat_map(|r| {
                    (0..d).map(move |k| {
                        let mut r = r.clone();
                        r.push(k);
                        r
                    })
                })
                .collect();
        }
        let mut here = Vec::new();
        for k in reps {
            let p = lattice::mat_vec(&u_inv, &k);
            let frac: Vec<BigRational> = coords_in(&inverses[x], &p)
                .into_iter()
                .map(|q| &q - q.floor())
                .collect();
            let mut gamma = vec![0i64; rank];
            let mut coords = vec![BigRational::zero(); n];
            let mut sigma = Vec::new();
            for (kk, &j) in c.iter().enumerate() {
                if !frac[kk].is_zero() {
                    sigma.push(j);
                    coords[j] = frac[kk].clone();
                }
            }
            let g: Vec<BigRational> = (0..rank)
                .map(|t| {
                    c.iter()
                        .map(|&j| &coords[j] * BigRational::from_integer(BigInt::from(points[j][t])))
                        .sum()
                })
                .collect();
            for t in 0..rank {
                gamma[t] = g[t].to_integer().to_i64().expect("lattice point");
            }
            let phase_order = lcm_denominators(&coords);
            all.entry(gamma.clone()).or_insert(BoxElement {
                gamma: gamma.clone(),
                sigma,
                coords,
                phase_order,
            });
            here.push(gamma);
        }
        per_cone.push(here);
    }
    let boxes: Vec<BoxElement> = all.into_values().collect();
    let cone_boxes = per_cone
        .into_iter()
        .map(|gs| {
            let mut idx: Vec<usize> = gs
                .iter()
                .map(|g| boxes.iter().position(|b| &b.gamma == g).expect("box"))
                .collect();
            idx.sort_unstable();
            idx.dedup();
            idx
        })
        .collect();
    (boxes, cone_boxes)
}

impl Fan {
    pub fn n(&self) -> usize {
        self.points.len()
    }

    pub fn is_simplex(&self, s: &[usize]) -> bool {
        self.simplex_set.contains(s)
    }

    pub fn is_interior(&self, s: &[usize]) -> bool {
        self.interior.iter().any(|t| t == s)
    }

    pub fn is_gorenstein(&self) -> bool {
        self.gorenstein_degree.is_some()
    }

    pub fn require_gorenstein(&self) -> Result<&[i64]> {
        self.gorenstein_degree
            .as_deref()
            .ok_or_else(|| Error::BadGorenstein("no covector takes the value 1 on every point".into()))
    }

    pub fn simplex_volume(&self, s: &[usize]) -> i64 {
        let vecs: Vec<Vec<i64>> = s.iter().map(|&i| self.points[i].clone()).collect();
        lattice::lattice_volume(&vecs, self.rank)
    }

    /// Dual basis `u_{i,J}` to `v_i, i ∈ J`, in the order of `J`.
    pub fn dual_covectors(&self, cone: &[usize]) -> Result<Vec<Vec<BigRational>>> {
        if cone.len() != self.rank {
            return Err(Error::Input(format!("dual covectors need {} indices", self.rank)));
        }
        cone_inverse(&self.points, cone).ok_or_else(|| Error::SingularSimplex {
            simplex: cone.iter().map(|i| i + 1).collect(),
        })
    }

    /// Maximal cones containing `s`.
    pub fn max_cones_containing<'a>(&'a self, s: &'a [usize]) -> impl Iterator<Item = (usize, &'a Vec<usize>)> + 'a {
        self.max_cones
            .iter()
            .enumerate()
            .filter(move |(_, c)| s.iter().all(|i| c.contains(i)))
    }

    /// Vertices of the cones containing `s`.
    pub fn star(&self, s: &[usize]) -> Vec<usize> {
        let set: BTreeSet<usize> = self
            .max_cones_containing(s)
            .flat_map(|(_, c)| c.iter().copied())
            .collect();
        set.into_iter().collect()
    }

    /// Lowest common phase order over all twisted sectors.
    pub fn phase_order(&self) -> u64 {
        self.boxes.iter().fold(1u64, |acc, b| acc.lcm(&b.phase_order))
    }

    pub fn sector_index(&self, gamma: &[i64]) -> Option<usize> {
        self.boxes.iter().position(|b| b.gamma == gamma)
    }

    /// Coordinates of a lattice point in some maximal cone containing it.
    pub fn cone_coordinates(&self, p: &[i64]) -> Option<(usize, Vec<BigRational>)> {
        self.max_cones.iter().enumerate().find_map(|(x, c)| {
            let inv = cone_inverse(&self.points, c)?;
            let xs = coords_in(&inv, p);
            xs.iter().all(|q| !q.is_negative()).then_some((x, xs))
        })
    }

    pub fn in_cone(&self, p: &[i64]) -> bool {
        self.cone_coordinates(p).is_some()
    }

    /// Whether `p` lies in the interior of the support: no boundary wall's
    /// normal vanishes on it.
    pub fn in_interior(&self, p: &[i64]) -> bool {
        if !self.in_cone(p) {
            return false;
        }
        self.boundary_walls.iter().all(|w| {
            let vs: Vec<Vec<i64>> = w.iter().map(|&i| self.points[i].clone()).collect();
            lattice::dot(&lattice::normal_covector(&vs, self.rank), p) != 0
        })
    }

    pub fn degree(&self, p: &[i64]) -> Option<i64> {
        self.gorenstein_degree.as_ref().map(|m| lattice::dot(m, p))
    }

    pub fn star_quotient(&self, sector: usize) -> QuotientFan {
        let b = &self.boxes[sector];
        let sigma = b.sigma.clone();
        let k = sigma.len();
        let sig_vecs: Vec<Vec<i64>> = sigma.iter().map(|&i| self.points[i].clone()).collect();
        let functionals: Vec<Vec<i64>> = if k == 0 {
            (0..self.rank)
                .map(|i| (0..self.rank).map(|j| i64::from(i == j)).collect())
                .collect()
        } else {
            let a = lattice::transpose(&sig_vecs);
            let snf = lattice::smith_normal_form(&a, k);
            snf.u[k..].to_vec()
        };
        let star = self.star(&sigma);
        let ray_labels: Vec<usize> = star.into_iter().filter(|i| !sigma.contains(i)).collect();
        let quotient_points = ray_labels
            .iter()
            .map(|&i| functionals.iter().map(|m| lattice::dot(m, &self.points[i])).collect())
            .collect();
        let mut simplices: Vec<Vec<usize>> = self
            .simplices
            .iter()
            .filter(|s| sigma.iter().all(|i| s.contains(i)))
            .map(|s| s.iter().copied().filter(|i| !sigma.contains(i)).collect())
            .collect();
        sort_size_lex(&mut simplices);
        let interior = simplices
            .iter()
            .filter(|s| {
                let mut full: Vec<usize> = s.iter().chain(&sigma).copied().collect();
                full.sort_unstable();
                self.is_interior(&full)
            })
            .cloned()
            .collect();
        QuotientFan {
            base: sector,
            sigma,
            quotient_rank: self.rank - k,
            ray_labels,
            quotient_points,
            functionals,
            simplices,
            interior,
            box_order: lattice::lattice_volume(&sig_vecs, self.rank),
        }
    }

    /// Rays and maximal simplices back in the 1-based input form.
    pub fn to_input(&self) -> FanInput {
        FanInput {
            rank: self.rank,
            points: self.points.clone(),
            max_simplices: self
                .max_cones
                .iter()
                .map(|c| c.iter().map(|i| i + 1).collect())
                .collect(),
            weights: None,
        }
    }
}


#[cfg(test)]
mod proptests {
    use super::*;
    use proptest::prelude::*;

    /// Cone over a lattice segment at height one, triangulated at a random
    /// subset of interior lattice points.
    fn segment_fan() -> impl Strategy<Value = (FanInput, FanInput)> {
        (2i64..7, proptest::collection::vec(any::<bool>(), 6)).prop_map(|(len, keep)| {
            let points: Vec<Vec<i64>> = (0..=len).map(|a| vec![a, 1]).collect();
            let mut rays = vec![0usize];
            for a in 1..len as usize {
                if keep[a - 1] {
                    rays.push(a);
                }
            }
            rays.push(len as usize);
            let cones: Vec<Vec<usize>> = rays.windows(2).map(|w| vec![w[0] + 1, w[1] + 1]).collect();
            let mut shuffled = cones.clone();
            shuffled.reverse();
            let a = FanInput {
                rank: 2,
                points: points.clone(),
                max_simplices: cones,
                weights: None,
            };
            let b = FanInput {
                rank: 2,
                points,
                max_simplices: shuffled,
                weights: None,
            };
            (a, b)
        })
    }

    proptest! {
        #[test]
        fn box_size_is_volume((a, b) in segment_fan()) {
            let f = validate_fan(&a).unwrap();
            for (k, c) in f.max_cones.iter().enumerate() {
                prop_assert_eq!(f.cone_boxes[k].len() as i64, f.simplex_volume(c));
            }
            let g = validate_fan(&b).unwrap();
            prop_assert_eq!(&f.boxes, &g.boxes);
            let m = f.gorenstein_degree.clone().unwrap();
            for bx in &f.boxes {
                let s: BigRational = bx.coords.iter().sum();
                prop_assert_eq!(BigRational::from_integer(lattice::dot(&m, &bx.gamma).into()), s);
            }
        }

        #[test]
        fn covectors_are_dual((a, _) in segment_fan()) {
            let f = validate_fan(&a).unwrap();
            for c in &f.max_cones {
                let u = f.dual_covectors(c).unwrap();
                for (x, ux) in u.iter().enumerate() {
                    for (y, &j) in c.iter().enumerate() {
                        let v = lattice::dot_rat(ux, &f.points[j]);
                        prop_assert_eq!(v, BigRational::from_integer(i64::from(x == y).into()));
                    }
                }
            }
        }

        #[test]
        fn interior_closed_under_supersets((a, _) in segment_fan()) {
            let f = validate_fan(&a).unwrap();
            for s in &f.interior {
                for t in &f.simplices {
                    if s.iter().all(|i| t.contains(i)) {
                        prop_assert!(f.is_interior(t));
                    }
                }
            }
        }
    }
}
