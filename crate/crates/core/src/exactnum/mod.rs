//! Exact arithmetic kernel: rationals, cyclotomic numbers and truncated
//! Laurent series in an auxiliary variable ε.

mod cyclotomic;
pub mod field;
mod series;

pub use cyclotomic::{cyclotomic_polynomial, totient, Cyclotomic};
pub use field::{int, rat, rational_to_f64, Field};
pub use series::EpsSeries;

pub type Rational = num_rational::BigRational;

/// ζ_den^num in Q(ζ_den).
pub fn root_of_unity(num: i64, den: u64) -> Cyclotomic {
    Cyclotomic::root_of_unity(num, den)
}

/// Σ_{k ≤ order} (aε)^k / k!.
pub fn exp_series(a: &Rational, order: i64) -> EpsSeries {
    EpsSeries::exp_series(a, order)
}

#[cfg(test)]
mod proptests {
    use super::*;
    use proptest::prelude::*;

    fn cyclo(order: u64) -> impl Strategy<Value = Cyclotomic> {
        let n = totient(order);
        proptest::collection::vec((-6i64..7, 1i64..5), n)
            .prop_map(move |cs| Cyclotomic::from_poly(order, cs.into_iter().map(|(a, b)| rat(a, b)).collect()))
    }

    fn series_of(order: u64) -> impl Strategy<Value = EpsSeries> {
        (-2i64..2, proptest::collection::vec(cyclo(order), 1..5), 3i64..6)
            .prop_map(|(low, cs, rel)| EpsSeries::new(low, cs, low + rel))
    }

    proptest! {
        #[test]
        fn cyclotomic_ring_axioms(a in cyclo(12), b in cyclo(12), c in cyclo(12)) {
            prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
            prop_assert_eq!(a.mul(&b.add(&c)), a.mul(&b).add(&a.mul(&c)));
            prop_assert_eq!(a.mul(&b), b.mul(&a));
            if let Some(ai) = a.inv() {
                prop_assert_eq!(a.mul(&ai), Cyclotomic::one(12));
            }
        }

        #[test]
        fn embedding_commutes_with_arithmetic(a in cyclo(3), b in cyclo(3)) {
            prop_assert_eq!(a.mul(&b).embed(12), a.embed(12).mul(&b.embed(12)));
            prop_assert_eq!(a.add(&b).embed(6), a.embed(6).add(&b.embed(6)));
        }

        #[test]
        fn series_inverse_is_two_sided(s in series_of(5)) {
            if let Ok(inv) = s.invert() {
                let p = s.mul(&inv);
                let q = inv.mul(&s);
                prop_assert_eq!(p.coeff(0), Some(Cyclotomic::one(5)));
                for k in 1..p.truncation() {
                    prop_assert!(p.coeff(k).unwrap().is_zero());
                }
                prop_assert_eq!(p, q);
            }
        }

        #[test]
        fn series_distributive(a in series_of(3), b in series_of(3), c in series_of(3)) {
            let lhs = a.mul(&b.add(&c));
            let rhs = a.mul(&b).add(&a.mul(&c));
            let t = lhs.truncation().min(rhs.truncation());
            for k in -6..t {
                prop_assert_eq!(lhs.coeff(k), rhs.coeff(k));
            }
        }
    }
}
