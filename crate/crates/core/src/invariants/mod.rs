//! Futaki-type invariants and Donaldson–Futaki assemblies, each with at
//! least two independent routes.

mod df;
mod futaki;
mod report;
mod scan;

pub use df::{df_coefficient_route, df_intersection_exact, df_intersection_fano, futaki_classical};
pub use futaki::{futaki_coupled, futaki_fano, futaki_twisted, TwistedFutaki};
pub use report::{invariant_report, InvariantReport, RouteDelta};
pub use scan::{evaluate, invariance_scan, InvariantKind, ScanResult};

#[cfg(test)]
mod tests {
    use num::Zero;

    use super::*;
    use crate::geom1d::{Grid, MetricTuple, SymmetricPotential, TwistRef};
    use crate::rational::{frac, q, Q};
    use crate::toriclat::{coefficient_table, untwisted_table, LatticePolytope, Model, Normalization, PolarizedTuple, TorusAction};

    fn cp1(d: &[i64]) -> PolarizedTuple {
        PolarizedTuple::cp1_int(d).unwrap()
    }

    fn perturbed_fano() -> MetricTuple {
        MetricTuple::round(cp1(&[1, 1]))
            .unwrap()
            .perturbed(&[vec![0.0, 0.04, -0.05, 0.01], vec![0.0, 0.0, 0.1]], 1.0)
            .unwrap()
    }

    #[test]
    fn vanishing_on_round() {
        let g = Grid::default_grid();
        let mt = MetricTuple::round(cp1(&[1, 1])).unwrap();
        let a = TorusAction::new(vec![q(1)], vec![q(0), q(0)]).unwrap();
        assert!(futaki_coupled(&mt, &a, &g).unwrap().abs() < 1e-8);
        assert!(futaki_fano(&mt, &a, &g).unwrap().abs() < 1e-8);
        assert!(df_intersection_fano(&mt, &a, &g).unwrap().abs() < 1e-8);
        let triv = TorusAction::trivial(mt.tuple());
        assert_eq!(futaki_coupled(&mt, &triv, &g).unwrap(), 0.0);
        assert_eq!(futaki_fano(&mt, &triv, &g).unwrap(), 0.0);
    }

    #[test]
    fn routes_agree_and_shift_invariance() {
        let g = Grid::default_grid();
        let mt = perturbed_fano();
        let a = TorusAction::new(vec![q(1)], vec![frac(-1, 2), q(2)]).unwrap();
        let c = futaki_coupled(&mt, &a, &g).unwrap();
        let f = futaki_fano(&mt, &a, &g).unwrap();
        let d = df_intersection_fano(&mt, &a, &g).unwrap();
        assert!((c - f).abs() < 1e-6 && (f - d).abs() < 1e-6);
        let shifted = a.with_shifted(&[q(5), q(5)]);
        assert!((futaki_fano(&mt, &shifted, &g).unwrap() - f).abs() < 1e-10);
        assert!((futaki_coupled(&mt, &shifted, &g).unwrap() - c).abs() < 1e-10);
        for s in [q(2), q(-1), frac(1, 3)] {
            let v = futaki_coupled(&mt, &a.scaled(&s), &g).unwrap();
            assert!((v - crate::rational::to_f64(&s) * c).abs() < 1e-10);
        }
    }

    #[test]
    fn non_fano_scope() {
        let g = Grid::default_grid();
        let mt = MetricTuple::round(cp1(&[2, 1])).unwrap();
        let a = TorusAction::new(vec![q(1)], vec![q(0), q(0)]).unwrap();
        assert!(matches!(futaki_fano(&mt, &a, &g), Err(crate::Error::Scope(_))));
        assert!(matches!(df_intersection_fano(&mt, &a, &g), Err(crate::Error::Scope(_))));
        assert!(futaki_coupled(&mt, &a, &g).unwrap().abs() < 1e-8);
    }

    #[test]
    fn classical_and_coefficient_route() {
        let t = cp1(&[1]);
        let a = TorusAction::new(vec![q(1)], vec![q(0)]).unwrap();
        let tab = untwisted_table(&t, &a).unwrap();
        assert!(futaki_classical(&tab).is_zero());
        let shifted = untwisted_table(&t, &a.with_shifted(&[q(7)])).unwrap();
        assert!(futaki_classical(&shifted).is_zero());
        for (deg, norm) in [(vec![1, 1], Normalization::ZeroMean), (vec![2], Normalization::MinZero), (vec![3, 1], Normalization::ZeroMean)] {
            let tuple = cp1(&deg);
            let act = TorusAction::normalized(vec![q(1)], &tuple, norm).unwrap();
            let tab = coefficient_table(&tuple, &act).unwrap();
            assert!(df_coefficient_route(&tab).unwrap().is_zero());
        }
        let triv = TorusAction::trivial(&cp1(&[1, 1]));
        assert!(df_coefficient_route(&coefficient_table(&cp1(&[1, 1]), &triv).unwrap()).unwrap().is_zero());
    }

    #[test]
    fn classical_futaki_of_blowup_is_nonzero_and_linear() {
        // first Hirzebruch surface, anticanonical polytope
        let p = LatticePolytope::from_vertices(vec![
            vec![q(-1), q(-1)],
            vec![q(2), q(-1)],
            vec![q(0), q(1)],
            vec![q(-1), q(1)],
        ])
        .unwrap();
        let tuple = PolarizedTuple::new(Model::Toric, vec![p]).unwrap();
        let a = TorusAction::new(vec![q(1), q(0)], vec![q(0)]).unwrap();
        let f = futaki_classical(&untwisted_table(&tuple, &a).unwrap());
        assert!(!f.is_zero());
        for s in [q(2), q(-1), frac(1, 3)] {
            assert_eq!(futaki_classical(&untwisted_table(&tuple, &a.scaled(&s)).unwrap()), &s * &f);
        }
        let f2 = futaki_classical(&untwisted_table(&tuple, &a.with_shifted(&[frac(3, 7)])).unwrap());
        assert_eq!(f, f2);
        let _: Q = f;
    }

    #[test]
    fn exact_intersection_route() {
        let t = cp1(&[1, 1]);
        for a in [
            TorusAction::new(vec![q(1)], vec![q(0), q(0)]).unwrap(),
            TorusAction::new(vec![q(3)], vec![q(2), frac(-1, 5)]).unwrap(),
        ] {
            let tab = untwisted_table(&t, &a).unwrap();
            assert!(df_intersection_exact(&t, &tab).unwrap().is_zero());
        }
    }

    #[test]
    fn twisted_limits() {
        let g = Grid::default_grid();
        let a = TorusAction::new(vec![q(1)], vec![q(0), q(1)]).unwrap();
        let mt = perturbed_fano();
        let same: Vec<TwistRef> = mt.potentials().iter().cloned().map(TwistRef::Smooth).collect();
        let tw = mt.clone().with_twist(0.3, same).unwrap();
        let r = futaki_twisted(&tw, &a, &g).unwrap();
        assert!(r.correction.abs() < 1e-12);
        let tw1 = mt.clone().with_twist(1.0, vec![TwistRef::PoleCurrent { mass_at_zero: 0.2 }; 2]).unwrap();
        let r1 = futaki_twisted(&tw1, &a, &g).unwrap();
        assert_eq!(r1.value, futaki_coupled(&mt, &a, &g).unwrap());
        let round = SymmetricPotential::round(1.0).unwrap();
        let rt = MetricTuple::round(cp1(&[1, 1]))
            .unwrap()
            .with_twist(0.4, vec![TwistRef::Smooth(round.clone()), TwistRef::Smooth(round)])
            .unwrap();
        assert!(futaki_twisted(&rt, &a, &g).unwrap().value.abs() < 1e-8);
    }

    #[test]
    fn scans() {
        let g = Grid::default_grid();
        let base = MetricTuple::round(cp1(&[1, 1])).unwrap();
        let a = TorusAction::new(vec![q(1)], vec![q(0), q(0)]).unwrap();
        let dirs = vec![vec![], vec![0.0, 0.0, 0.25]];
        let r = invariance_scan(&base, &a, &dirs, &[0.0, 0.05, 0.1, 0.2], InvariantKind::Coupled, &g).unwrap();
        assert!(r.max_deviation < 1e-7);
        let r0 = invariance_scan(&base, &a, &dirs, &[0.0], InvariantKind::Coupled, &g).unwrap();
        assert_eq!(r0.max_deviation, 0.0);
        let tw = base.with_twist(0.5, vec![TwistRef::PoleCurrent { mass_at_zero: 0.3 }; 2]).unwrap();
        let r = invariance_scan(&tw, &a, &dirs, &[0.0, 0.05, 0.1, 0.2], InvariantKind::Twisted, &g).unwrap();
        assert!(r.max_deviation < 1e-7);
        let bad = vec![vec![], vec![0.0, 0.0, 5.0]];
        assert!(invariance_scan(&MetricTuple::round(cp1(&[1, 1])).unwrap(), &a, &bad, &[0.0, 0.2], InvariantKind::Coupled, &g).is_err());
    }

    #[test]
    fn report_agrees() {
        let g = Grid::default_grid();
        let mt = perturbed_fano();
        let a = TorusAction::normalized(vec![q(1)], mt.tuple(), Normalization::ZeroMean).unwrap();
        let r = invariant_report(&mt, &a, &g, 1e-6).unwrap();
        assert!(r.routes_agree);
        assert_eq!(r.route_deltas.len(), 4);
        assert_eq!(r.s_hat, "0");
        let a = TorusAction::normalized(vec![q(1)], mt.tuple(), Normalization::MinZero).unwrap();
        let r = invariant_report(&mt, &a, &g, 1e-6).unwrap();
        assert_eq!(r.route_deltas.len(), 3);
        assert_eq!(r.skipped.len(), 1);
    }
}
