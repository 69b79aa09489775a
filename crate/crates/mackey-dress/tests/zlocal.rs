use mackey_dress::zlocal::*;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use proptest::prelude::*;

fn matrix(max: usize) -> impl Strategy<Value = IntMatrix> {
    (1..=max, 1..=max).prop_flat_map(|(r, c)| {
        proptest::collection::vec(-6i64..=6, r * c).prop_map(move |v| {
            IntMatrix::from_rows(&v.chunks(c).map(|row| row.to_vec()).collect::<Vec<_>>())
        })
    })
}

proptest! {
    #[test]
    fn snf_is_a_unimodular_diagonalization(m in matrix(5)) {
        let s = snf(&m);
        prop_assert_eq!(s.u.mul(&m).mul(&s.v), s.d.clone());
        prop_assert!(s.u.determinant().abs().is_one());
        prop_assert!(s.v.determinant().abs().is_one());
        for w in s.diagonal.windows(2) {
            prop_assert!((&w[1] % &w[0]).is_zero());
        }
        for (i, d) in s.diagonal.iter().enumerate() {
            prop_assert_eq!(s.d.get(i, i), d);
            prop_assert!(d.is_positive());
        }
    }

    #[test]
    fn rank_nullity(m in matrix(5)) {
        let k = kernel(&m);
        let im = image(&m);
        prop_assert_eq!(k.rank() + im.rank(), m.cols());
        for v in k.basis().columns() {
            prop_assert!(m.mul_vec(&v).iter().all(Zero::is_zero));
        }
    }

    #[test]
    fn consistent_systems_solve_exactly(m in matrix(4), x in proptest::collection::vec(-5i64..=5, 4), p in prop::sample::select(vec![2u64, 3, 5])) {
        let x: Vec<BigInt> = x.into_iter().take(m.cols()).map(BigInt::from).chain(std::iter::repeat(BigInt::zero())).take(m.cols()).collect();
        let b = m.mul_vec(&x);
        let sol = solve_localized(&m, &b, Some(p)).expect("integral solution exists");
        let q: Vec<BigRational> = (0..m.rows())
            .map(|i| (0..m.cols()).map(|j| BigRational::from_integer(m.get(i, j).clone()) * &sol[j]).sum())
            .collect();
        for (qi, bi) in q.iter().zip(&b) {
            prop_assert_eq!(qi, &BigRational::from_integer(bi.clone()));
        }
        prop_assert!(is_p_local(&sol, p));
    }

    #[test]
    fn lattice_sum_and_intersection_ranks(a in matrix(4), b in matrix(4)) {
        prop_assume!(a.rows() == b.rows());
        let (la, lb) = (Lattice::span(&a), Lattice::span(&b));
        let s = la.sum(&lb);
        let i = la.intersection(&lb);
        prop_assert_eq!(s.rank() + i.rank(), la.rank() + lb.rank());
    }
}

#[test]
fn small_cases() {
    let two = IntMatrix::from_rows(&[vec![2]]);
    assert!(is_surjective_localized(&two, Locale::Prime(3)).surjective);
    assert!(!is_surjective_localized(&two, Locale::Prime(2)).surjective);
    assert!(!is_surjective_localized(&two, Locale::Integral).surjective);
    assert!(is_surjective_localized(&IntMatrix::from_rows(&[vec![2, 3]]), Locale::Integral).surjective);
    let s = snf(&IntMatrix::from_rows(&[vec![2, 0], vec![0, 3]]));
    assert_eq!(s.diagonal, vec![BigInt::from(1), BigInt::from(6)]);
    let half = solve_localized(&two, &[BigInt::one()], Some(3)).unwrap();
    assert_eq!(half[0], BigRational::new(BigInt::one(), BigInt::from(2)));
    let bad = solve_localized(&two, &[BigInt::one()], Some(2)).unwrap_err();
    assert_eq!(bad.divisor, BigInt::from(2));
    assert!(snf(&IntMatrix::zeros(2, 3)).diagonal.is_empty());
}
