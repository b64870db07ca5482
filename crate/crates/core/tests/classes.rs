use quatgenus::classes::{
    check_pairwise_inequivalent, check_right_orders, eichler_mass, mass_per_narrow_class,
    narrow_class_mass, predicted_two_sided_count, right_ideal_classes, two_sided_orbit_count,
};
use quatgenus::field::{make_field, FieldSpec};
use quatgenus::lattice::left_order;
use quatgenus::linalg::rat;
use quatgenus::quat::{make_algebra, QuatAlgebra};

fn algebra(spec: FieldSpec, a: i64, b: i64) -> QuatAlgebra {
    let k = make_field(spec).unwrap();
    make_algebra(&k, &k.from_int(a), &k.from_int(b)).unwrap()
}

/// Eichler's formula evaluated by hand from `ζ(−1) = −1/12` over Q.
fn rational_mass(ramified: &[i64]) -> num_rational::BigRational {
    ramified
        .iter()
        .fold(rat(1, 12), |acc, p| acc * rat(p - 1, 1))
}

#[test]
fn rational_masses() {
    assert_eq!(
        eichler_mass(&algebra(FieldSpec::Rationals, 1, 1)),
        rational_mass(&[2])
    );
    assert_eq!(
        eichler_mass(&algebra(FieldSpec::Rationals, 1, 11)),
        rational_mass(&[11])
    );
    assert_eq!(
        eichler_mass(&algebra(FieldSpec::Rationals, 1, 23)),
        rational_mass(&[23])
    );
}

#[test]
fn class_set_invariants() {
    for (a, b, h) in [(1, 1, 1), (1, 11, 2), (1, 23, 3), (1, 3, 1)] {
        let alg = algebra(FieldSpec::Rationals, a, b);
        let cd = right_ideal_classes(&alg).unwrap();
        assert_eq!(cd.class_number(), h, "({a},{b})");
        assert!(cd.type_number() <= cd.class_number());
        assert!(check_right_orders(&alg, &cd));
        assert!(check_pairwise_inequivalent(&alg, &cd));
        let direct: num_rational::BigRational =
            cd.unit_indices.iter().map(|u| rat(1, *u as i64)).sum();
        assert_eq!(direct, eichler_mass(&alg));
        for (idx, o) in cd.left_orders.iter().enumerate() {
            assert_eq!(*o, left_order(&alg, &cd.ideals[idx]));
        }
    }
}

#[test]
fn minus_eleven_units() {
    let alg = algebra(FieldSpec::Rationals, 1, 11);
    let cd = right_ideal_classes(&alg).unwrap();
    let mut ui = cd.unit_indices.clone();
    ui.sort();
    assert_eq!(ui, vec![2, 3]);
    assert_eq!(cd.mass, rat(5, 6));
}

#[test]
fn hurwitz_normalizer() {
    let alg = algebra(FieldSpec::Rationals, 1, 1);
    let cd = right_ideal_classes(&alg).unwrap();
    let nd = &cd.types[0].normalizer;
    assert_eq!(nd.coset_reps.len(), 2);
    assert_eq!(nd.f, 1);
    let norms = nd.norms(&alg);
    let k = alg.field();
    assert_eq!(norms, vec![k.one(), k.from_int(2)]);
    for g in &nd.coset_reps {
        let conj = quatgenus::lattice::scale_right(
            &alg,
            &quatgenus::lattice::scale_left(&alg, g, &cd.order),
            &alg.inv(g),
        );
        assert_eq!(conj, cd.order);
    }
}

#[test]
fn quadratic_field_mass_partition() {
    let alg = algebra(FieldSpec::RealQuadratic(6), 1, 1);
    let k = alg.field().clone();
    let cd = right_ideal_classes(&alg).unwrap();
    for a in &k.class_groups().narrow_reps {
        assert_eq!(narrow_class_mass(&alg, &cd, a), mass_per_narrow_class(&alg));
    }
    let total: usize = k
        .class_groups()
        .narrow_reps
        .iter()
        .map(|a| {
            cd.ideals
                .iter()
                .filter(|i| k.narrow_equivalent(&i.norm(&alg), a))
                .count()
        })
        .sum();
    assert_eq!(total, cd.class_number());
}

#[test]
fn two_sided_counts_with_ramification() {
    let alg = algebra(FieldSpec::RealQuadratic(7), 1, 3);
    let cd = right_ideal_classes(&alg).unwrap();
    for i in 0..cd.type_number() {
        for j in 0..cd.type_number() {
            assert_eq!(
                two_sided_orbit_count(&alg, &cd, i, j).unwrap(),
                predicted_two_sided_count(&alg, &cd, i, j)
            );
        }
    }
}
