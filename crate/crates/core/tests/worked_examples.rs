use csck_core::rational::{frac, q};
use csck_core::toriclat::{
    boundary_lattice_volume, coefficient_table, dim_weight_oracle, intersection_number, lattice_volume, s_hat,
    BundleSel, LatticePolytope, PolarizedTuple, TorusAction,
};

#[test]
fn volumes() {
    assert_eq!(lattice_volume(&LatticePolytope::segment(q(0), q(1)).unwrap()), q(1));
    assert_eq!(lattice_volume(&LatticePolytope::simplex(q(1)).unwrap()), frac(1, 2));
    assert_eq!(lattice_volume(&LatticePolytope::simplex(q(2)).unwrap()), q(2));
    assert_eq!(boundary_lattice_volume(&LatticePolytope::segment(q(0), q(5)).unwrap()), q(2));
    assert_eq!(boundary_lattice_volume(&LatticePolytope::rectangle(q(1), q(1)).unwrap()), q(4));
    assert_eq!(boundary_lattice_volume(&LatticePolytope::simplex(q(2)).unwrap()), q(6));
}

#[test]
fn intersections_and_s_hat() {
    let p1 = PolarizedTuple::cp1_int(&[2]).unwrap();
    assert_eq!(intersection_number(&p1, &[0]).unwrap(), q(2));
    let p2 = PolarizedTuple::new(
        csck_core::toriclat::Model::Toric,
        vec![LatticePolytope::simplex(q(2)).unwrap(), LatticePolytope::simplex(q(3)).unwrap()],
    )
    .unwrap();
    assert_eq!(intersection_number(&p2, &[0, 1]).unwrap(), q(6));
    let sq = PolarizedTuple::product_cp1(&[(q(1), q(1)), (q(1), q(1))]).unwrap();
    assert_eq!(intersection_number(&sq, &[0, 1]).unwrap(), q(2));
    assert_eq!(s_hat(&PolarizedTuple::cp1_int(&[1, 1]).unwrap()).unwrap(), q(0));
    assert_eq!(s_hat(&PolarizedTuple::cp1_int(&[2, 3]).unwrap()).unwrap(), frac(-3, 2));
    assert_eq!(s_hat(&sq).unwrap(), q(0));
}

#[test]
fn coefficient_tables() {
    let t = PolarizedTuple::cp1_int(&[1, 1]).unwrap();
    let tab = coefficient_table(&t, &TorusAction::new(vec![q(1)], vec![q(0), q(0)]).unwrap()).unwrap();
    for c in &tab.bundles {
        // stored over 2π
        assert_eq!((c.a0.clone(), c.a1.clone(), c.b0.clone(), c.b1.clone()), (q(1), q(1), frac(-1, 2), frac(-1, 2)));
    }
    let tw = tab.twisted.unwrap();
    assert_eq!((tw.a0, tw.a1), (q(1), q(-1)));

    let t2 = PolarizedTuple::cp1_int(&[2]).unwrap();
    let tab = coefficient_table(&t2, &TorusAction::trivial(&t2)).unwrap();
    assert!(tab.bundles.iter().all(|c| c.b0 == q(0) && c.b1 == q(0)));
}

#[test]
fn lattice_oracles() {
    let t = PolarizedTuple::cp1_int(&[2]).unwrap();
    let a = TorusAction::new(vec![q(1)], vec![q(0)]).unwrap();
    let c = dim_weight_oracle(&t, &a, BundleSel::Index(0), 3).unwrap();
    assert_eq!(c.dimension, 7);
    assert_eq!(c.moment_sum, q(21));
    let t = PolarizedTuple::cp1_int(&[1, 1]).unwrap();
    let a = TorusAction::trivial(&t);
    assert_eq!(dim_weight_oracle(&t, &a, BundleSel::Twisted, 5).unwrap().dimension, 4);
    assert!(dim_weight_oracle(&t, &a, BundleSel::Twisted, 1).is_err());
}
