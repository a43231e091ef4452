use cfdim::contfrac::{gauss_step, rational_from_digits};
use cfdim::diophantine::{eta_witnesses, psi_witnesses, ApproxFn};
use cfdim::indexsets::{make_geometric, make_i0, IndexSet};
use cfdim::pressure::{kz_increment_bounds, operator_bracket};
use cfdim::{Bracket, Digit, DigitWord};
use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use proptest::prelude::*;

fn word(d: &[u64]) -> DigitWord {
    DigitWord::from_digits(d.iter().copied()).unwrap()
}

fn naive_pq(d: &[u64]) -> (BigUint, BigUint) {
    // value of [0; d_0, ..., d_{n-1}] folded from the right
    let mut num = BigUint::zero();
    let mut den = BigUint::one();
    for &a in d.iter().rev() {
        let new_den = BigUint::from(a) * &den + &num;
        num = den;
        den = new_den;
    }
    (num, den)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn convergents_match_folded_fraction(d in prop::collection::vec(1u64..=100, 1..30)) {
        let w = word(&d);
        let (p, q) = naive_pq(&d);
        prop_assert_eq!(w.p_cur(), &p);
        prop_assert_eq!(w.q_cur(), &q);
        prop_assert!(w.determinant() == 1 || w.determinant() == -1);
    }

    #[test]
    fn distortion_and_log_q_slacks(d in prop::collection::vec(1u64..=100, 1..30)) {
        let w = word(&d);
        let r = w.distortion_ratio();
        prop_assert!(r <= BigRational::from_integer(4.into()) && r >= BigRational::one());
        prop_assert_eq!(w.log_q_bounds_exact(), (true, true));
    }

    #[test]
    fn approximation_gap_is_strict(d in prop::collection::vec(1u64..=100, 1..20), tail in prop::collection::vec(1u64..=1000, 2..12)) {
        let w = word(&d);
        let next = w.append_digit(tail[0]).unwrap();
        let all: Vec<BigUint> = d.iter().chain(&tail).map(|&v| BigUint::from(v)).collect();
        let x = rational_from_digits(&all);
        let pn = BigRational::new(w.p_cur().clone().into(), w.q_cur().clone().into());
        let gap = (x - pn).abs();
        let qn: BigRational = BigRational::from_integer(w.q_cur().clone().into());
        let qn1: BigRational = BigRational::from_integer(next.q_cur().clone().into());
        prop_assert!(gap < (&qn * &qn1).recip());
        prop_assert!(gap > (&qn * (&qn + &qn1)).recip());
    }

    #[test]
    fn gauss_step_shifts(d in prop::collection::vec(1u64..=50, 1..15), last in 2u64..=50) {
        // canonical expansion: the final digit is at least 2
        let big: Vec<BigUint> = d.iter().chain([&last]).map(|&v| BigUint::from(v)).collect();
        let x = rational_from_digits(&big);
        let (digit, rest) = gauss_step(&x).unwrap();
        prop_assert_eq!(digit, Some(big[0].clone()));
        prop_assert_eq!(rest, rational_from_digits(&big[1..]));
    }

    #[test]
    fn bracket_arithmetic_encloses(a in -1e3f64..1e3, b in -1e3f64..1e3, c in 1e-3f64..1e3) {
        let (x, y, z) = (Bracket::point(a), Bracket::point(b), Bracket::point(c));
        prop_assert!(x.add(y).contains(a + b));
        prop_assert!(x.mul(y).contains(a * b));
        prop_assert!(x.sub(y).contains(a - b));
        prop_assert!(z.ln().contains(c.ln()));
        prop_assert!(z.powf(0.37).contains(c.powf(0.37)));
        prop_assert!(x.div(z).contains(a / c));
    }

    #[test]
    fn vwa_witness_implies_power_witness(d in prop::collection::vec(1u64..=1_000_000, 2..60), c in 0.05f64..3.0) {
        // ln q_n <= Σ_{j<n} η_j and ln ω >= η − ln 2 give ω_n >= q_n^c / 2
        let digits: Vec<Digit> = d.iter().map(|&v| Digit::Small(v)).collect();
        let psi = ApproxFn::Power { c };
        let pw: Vec<usize> = psi_witnesses(&digits, &psi, 0.5, digits.len()).unwrap().iter().map(|r| r.n).collect();
        for r in eta_witnesses(&digits, c, digits.len(), 0) {
            prop_assert!(pw.contains(&r.n), "vwa witness at {} without ψ witness", r.n);
        }
    }

    #[test]
    fn tail_sums_decrease(a in 2u64..6, k1 in 0u64..5000, dk in 0u64..5000) {
        let set = make_geometric(a).unwrap();
        let s = 0.8;
        let t1 = set.tail_sum(k1, s);
        let t2 = set.tail_sum(k1 + dk, s);
        prop_assert!(t2.lo <= t1.hi);
        // Σ_{j>=j0} a^{-js} in closed form, j0 the first power above k1
        let mut j0 = 1u32;
        while a.pow(j0) <= k1 { j0 += 1; }
        let r = (a as f64).powf(-s);
        let oracle = r.powi(j0 as i32) / (1.0 - r);
        prop_assert!(t1.lo <= oracle * (1.0 + 1e-12) && oracle <= t1.hi * (1.0 + 1e-12) + 1e-15);
    }

    #[test]
    fn phi_is_nondecreasing(lq in 0.0f64..50.0, step in 0.0f64..10.0, c in 0.0f64..3.0, alpha in 0.1f64..2.0) {
        for f in [ApproxFn::Power { c }, ApproxFn::Log { alpha }, ApproxFn::Scaled { eps: 0.3 }] {
            prop_assert!(f.ln_phi(lq + step) >= f.ln_phi(lq));
            prop_assert!(f.ln_phi(lq) >= 0.0);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn kz_increments_are_respected(
        elems in prop::collection::btree_set(2u64..=200, 1..8),
        delta in 0.3f64..1.0,
        i in 2u64..=50,
    ) {
        prop_assume!(!elems.contains(&i));
        let base = IndexSet::finite(elems.iter().copied().collect()).unwrap();
        let mut more: Vec<u64> = elems.iter().copied().collect();
        more.push(i);
        let ext = IndexSet::finite(more).unwrap();
        let l0 = operator_bracket(&base, delta, 512).unwrap().lambda;
        let l1 = operator_bracket(&ext, delta, 512).unwrap().lambda;
        let (lo, hi) = kz_increment_bounds(i, delta).unwrap();
        let eps = l0.width() + l1.width();
        prop_assert!(l1.hi >= l0.lo + lo.lo - eps);
        prop_assert!(l1.lo <= l0.hi + hi.hi + eps);
    }
}

#[test]
fn i0_membership_agrees_with_enumeration() {
    let set = make_i0(0.5).unwrap();
    let listed = set.elements_upto(5000);
    for n in 1..=5000u64 {
        assert_eq!(set.contains_u64(n), listed.binary_search(&n).is_ok(), "{n}");
    }
}
