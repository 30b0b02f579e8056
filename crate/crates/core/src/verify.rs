//! The acceptance suite: ten pass/fail checks with pinned tolerances and
//! runtime limits.

use std::time::Instant;

use num::Zero;
use serde::Serialize;

use crate::bergman::{bergman_sample, expansion_report, sample_nodes};
use crate::error::Result;
use crate::geom1d::{cp1_integrals, key_identity_residual, Grid, MetricTuple, ProductMetric, QuadratureSpec, SymmetricPotential, TwistRef};
use crate::invariants::{
    df_coefficient_route, df_intersection_fano, futaki_coupled, futaki_fano, invariance_scan, InvariantKind,
};
use crate::rational::{fmt_q, frac, q, to_f64, Q};
use crate::solver::{solve_coupled_csck, sup_distance, SolveConfig};
use crate::toriclat::{
    coefficient_table, dim_weight_oracle, s_hat, untwisted_table, BundleSel, Normalization, PolarizedTuple, TorusAction,
};

#[derive(Clone, Debug, Serialize)]
pub struct CriterionResult {
    pub id: u32,
    pub title: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed_ms: u128,
    pub limit_ms: u128,
}

impl std::fmt::Display for CriterionResult {
    fn fmt(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
        write!(
            f,
            "[{}] {:>2} {} ({} ms / {} ms): {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.title,
            self.elapsed_ms,
            self.limit_ms,
            self.detail
        )
    }
}

pub const CRITERIA: [(u32, &str, u128); 10] = [
    (1, "S-hat vanishes on anticanonical tuples", 1_000),
    (2, "exact twisted dimension expansion", 1_000),
    (3, "round Bergman density and first-order prediction", 10_000),
    (4, "equivariant Bergman expansion order", 60_000),
    (5, "Futaki invariants vanish on the round solution", 5_000),
    (6, "invariants independent of the metric in the class", 30_000),
    (7, "agreement of Futaki and DF routes", 60_000),
    (8, "key identity for Hamiltonians", 10_000),
    (9, "solver recovers the round solution", 120_000),
    (10, "lattice coefficients match quadrature integrals", 10_000),
];

type Check = fn() -> Result<(bool, String)>;

fn check_of(id: u32) -> Check {
    match id {
        1 => c1,
        2 => c2,
        3 => c3,
        4 => c4,
        5 => c5,
        6 => c6,
        7 => c7,
        8 => c8,
        9 => c9,
        _ => c10,
    }
}

/// Runs criterion `id` (1..=10).
pub fn run_criterion(id: u32) -> CriterionResult {
    let (_, title, limit_ms) = CRITERIA[(id - 1) as usize];
    let start = Instant::now();
    let outcome = check_of(id)();
    let elapsed_ms = start.elapsed().as_millis();
    let (ok, detail) = match outcome {
        Ok(v) => v,
        Err(e) => (false, format!("error: {e}")),
    };
    let passed = ok && elapsed_ms <= limit_ms;
    let detail = if ok && !passed { format!("{detail}; runtime limit exceeded") } else { detail };
    CriterionResult { id, title, passed, detail, elapsed_ms, limit_ms }
}

pub fn run_all() -> Vec<CriterionResult> {
    CRITERIA.iter().map(|c| run_criterion(c.0)).collect()
}

fn cp1(d: &[Q]) -> Result<PolarizedTuple> {
    PolarizedTuple::cp1(d)
}

fn ell(l: i64, shifts: &[Q]) -> Result<TorusAction> {
    TorusAction::new(vec![q(l)], shifts.to_vec())
}

/// Perturbed anticanonical tuples shared by several checks.
fn fano_family() -> Result<Vec<MetricTuple>> {
    let r11 = MetricTuple::round(cp1(&[q(1), q(1)])?)?;
    Ok(vec![
        r11.perturbed(&[vec![], vec![0.0, 0.0, 0.1]], 1.0)?,
        r11.perturbed(&[vec![0.0, 0.04, -0.05, 0.01], vec![0.0, -0.03, 0.05]], 1.0)?,
        MetricTuple::round(cp1(&[q(2)])?)?.perturbed(&[vec![0.0, 0.1, 0.08, -0.02, 0.01]], 1.0)?,
        MetricTuple::round(cp1(&[frac(1, 2), frac(3, 2)])?)?
            .perturbed(&[vec![0.0, 0.01, 0.02], vec![0.0, 0.0, -0.05, 0.02]], 1.0)?,
        MetricTuple::round(cp1(&[frac(1, 2), frac(1, 2), q(1)])?)?
            .perturbed(&[vec![0.0, 0.0, 0.02], vec![0.0, -0.02], vec![0.0, 0.03, 0.0, 0.02]], 1.0)?,
    ])
}

fn c1() -> Result<(bool, String)> {
    let tuples = vec![
        cp1(&[q(2)])?,
        cp1(&[q(1), q(1)])?,
        PolarizedTuple::product_cp1(&[(q(2), q(2))])?,
        PolarizedTuple::product_cp1(&[(q(1), q(1)), (q(1), q(1))])?,
        PolarizedTuple::product_cp1(&[(frac(3, 2), frac(1, 2)), (frac(1, 2), frac(3, 2))])?,
    ];
    let vals = tuples.iter().map(s_hat).collect::<Result<Vec<_>>>()?;
    let ok = vals.iter().all(|v| v.is_zero());
    Ok((ok, format!("S-hat = [{}]", vals.iter().map(fmt_q).collect::<Vec<_>>().join(", "))))
}

fn c2() -> Result<(bool, String)> {
    let t = cp1(&[q(1), q(1)])?;
    let triv = TorusAction::trivial(&t);
    let table = coefficient_table(&t, &triv)?;
    let tw = table.twisted.expect("twisted entries");
    let mut bad = Vec::new();
    for k in 3..=40 {
        let d = dim_weight_oracle(&t, &triv, BundleSel::Twisted, k)?.dimension;
        let r = Q::from_integer((d as i64).into()) - (&tw.a0 * q(k) + &tw.a1);
        if !r.is_zero() {
            bad.push(k);
        }
    }
    Ok((bad.is_empty(), format!("a_t = ({}, {}); nonzero residual at k = {bad:?}", fmt_q(&tw.a0), fmt_q(&tw.a1))))
}

fn c3() -> Result<(bool, String)> {
    let mt = MetricTuple::round(cp1(&[q(1), q(1)])?)?;
    let a = ell(1, &[q(0), q(0)])?;
    let nodes = sample_nodes(200);
    let mut worst: f64 = 0.0;
    let mut worst_pred: f64 = 0.0;
    for k in [5u32, 10, 20] {
        let s = bergman_sample(&mt, &a, k, &nodes, QuadratureSpec::default())?;
        let exact = (k as f64 - 1.0) / k as f64;
        worst = worst.max(s.rho.iter().fold(0.0, |m, r| m.max((r - exact).abs())));
        worst_pred = worst_pred.max(s.rho_prediction.iter().fold(0.0, |m, r| m.max((r - exact).abs())));
    }
    Ok((worst < 1e-8 && worst_pred < 1e-8, format!("sup|2πρ_k - (k-1)/k| = {worst:.2e}, prediction error {worst_pred:.2e}")))
}

fn c4() -> Result<(bool, String)> {
    let ks = [8u32, 16, 32, 64];
    let a = ell(1, &[q(0), q(0)])?;
    let round = MetricTuple::round(cp1(&[q(1), q(1)])?)?;
    let perturbed = round.perturbed(&[vec![0.0, 0.0075, 0.0125], vec![0.0, 0.0, -0.01, 0.0025]], 1.0)?;
    let mut ok = true;
    let mut detail = Vec::new();
    for (name, mt) in [("round", &round), ("perturbed", &perturbed)] {
        let r = expansion_report(mt, &a, &ks, QuadratureSpec::default(), 200)?;
        let cs: Vec<f64> = r.rows.iter().map(|row| row.k as f64 * row.equivariant_leading).collect();
        let bounded = cs.iter().all(|c| c.is_finite()) && cs[cs.len() - 1] <= 2.0 * cs[0] + 1e-12;
        ok &= r.equivariant_residual_exponent <= -1.4 && bounded;
        detail.push(format!(
            "{name}: exponent {:.3}, C = {:.3}",
            r.equivariant_residual_exponent, r.leading_constant
        ));
    }
    Ok((ok, detail.join("; ")))
}

fn c5() -> Result<(bool, String)> {
    let g = Grid::default_grid();
    let mt = MetricTuple::round(cp1(&[q(1), q(1)])?)?;
    let mut worst: f64 = 0.0;
    for a in [ell(1, &[q(0), q(0)])?, TorusAction::normalized(vec![q(1)], mt.tuple(), Normalization::ZeroMean)?] {
        for v in [futaki_coupled(&mt, &a, &g)?, futaki_fano(&mt, &a, &g)?, df_intersection_fano(&mt, &a, &g)?] {
            worst = worst.max(v.abs());
        }
    }
    Ok((worst < 1e-8, format!("max |invariant| = {worst:.2e}")))
}

fn c6() -> Result<(bool, String)> {
    let g = Grid::default_grid();
    let base = MetricTuple::round(cp1(&[q(1), q(1)])?)?;
    let a = ell(1, &[q(0), frac(1, 2)])?;
    let dirs = [
        vec![vec![0.0, 0.0, 0.25], vec![]],
        vec![vec![], vec![0.0, 0.0, 0.0, 0.2]],
        vec![vec![0.0, 0.1, 0.0, 0.0, 0.1], vec![0.0, 0.0, -0.15]],
    ];
    let s = [0.0, 0.05, 0.1, 0.2];
    let twisted = base.clone().with_twist(0.5, vec![TwistRef::PoleCurrent { mass_at_zero: 0.25 }, TwistRef::PoleCurrent { mass_at_zero: 0.7 }])?;
    let mut worst: f64 = 0.0;
    for d in &dirs {
        for kind in [InvariantKind::Coupled, InvariantKind::Fano] {
            worst = worst.max(invariance_scan(&base, &a, d, &s, kind, &g)?.max_deviation);
        }
        worst = worst.max(invariance_scan(&twisted, &a, d, &s, InvariantKind::Twisted, &g)?.max_deviation);
    }
    Ok((worst < 1e-7, format!("max deviation {worst:.2e}")))
}

fn c7() -> Result<(bool, String)> {
    let g = Grid::default_grid();
    let mut worst: f64 = 0.0;
    let mut worst_coeff: f64 = 0.0;
    for mt in fano_family()? {
        let m = mt.len();
        let shifts: Vec<Q> = (0..m).map(|i| frac(i as i64 * 3 - 1, 4)).collect();
        let a = TorusAction::new(vec![q(1)], shifts)?;
        let v = [futaki_coupled(&mt, &a, &g)?, futaki_fano(&mt, &a, &g)?, df_intersection_fano(&mt, &a, &g)?];
        for i in 0..3 {
            for j in i + 1..3 {
                worst = worst.max((v[i] - v[j]).abs());
            }
        }
        let zm = TorusAction::normalized(vec![q(1)], mt.tuple(), Normalization::ZeroMean)?;
        let route = to_f64(&df_coefficient_route(&coefficient_table(mt.tuple(), &zm)?)?);
        worst_coeff = worst_coeff.max((route - futaki_coupled(&mt, &zm, &g)?).abs());
    }
    Ok((
        worst < 1e-6 && worst_coeff < 1e-6,
        format!("max pairwise delta {worst:.2e}; coefficient route delta {worst_coeff:.2e}"),
    ))
}

fn c8() -> Result<(bool, String)> {
    let g = Grid::default_grid();
    let mut family = vec![MetricTuple::round(cp1(&[q(1), q(1)])?)?];
    family.extend(fano_family()?);
    let mut worst: f64 = 0.0;
    for mt in &family {
        let shifts: Vec<Q> = (0..mt.len()).map(|i| frac(2 * i as i64 + 1, 3)).collect();
        let a = TorusAction::new(vec![q(1)], shifts)?;
        worst = worst.max(key_identity_residual(mt, &a, &g.nodes, &g)?);
    }
    Ok((worst < 1e-7, format!("sup residual {worst:.2e} over {} tuples", family.len())))
}

fn c9() -> Result<(bool, String)> {
    let cfg = SolveConfig::default();
    let starts: Vec<(MetricTuple, MetricTuple)> = {
        let r11 = MetricTuple::round(cp1(&[q(1), q(1)])?)?;
        let r2 = MetricTuple::round(cp1(&[q(2)])?)?;
        let r12 = MetricTuple::round(cp1(&[q(1), q(2)])?)?;
        vec![
            (r11.perturbed(&[vec![], vec![0.0, 0.0, 0.05]], 1.0)?, r11.clone()),
            (r11.perturbed(&[vec![0.0, 0.0, 0.05], vec![0.0, 0.0, 0.0, 0.05]], 1.0)?, r11.clone()),
            (r2.perturbed(&[vec![0.0, 0.0, 0.05, 0.05]], 1.0)?, r2),
            (r12.perturbed(&[vec![0.0, 0.0, -0.05], vec![0.0, 0.0, 0.05]], 1.0)?, r12),
        ]
    };
    let mut ok = true;
    let mut detail = Vec::new();
    for (start, round) in &starts {
        let out = solve_coupled_csck(start, &cfg)?;
        let dist = sup_distance(&out.metric, round);
        ok &= out.residual < 1e-10 && dist < 1e-6 && out.iterations <= 15;
        detail.push(format!("{} steps, residual {:.1e}, distance {:.1e}", out.iterations, out.residual, dist));
    }
    Ok((ok, detail.join("; ")))
}

fn c10() -> Result<(bool, String)> {
    let g = Grid::default_grid();
    let mut worst: f64 = 0.0;
    // ℂP¹
    let degrees = [q(1), q(2), frac(3, 2)];
    let t = cp1(&degrees)?;
    let table = untwisted_table(&t, &TorusAction::trivial(&t))?;
    for (i, d) in degrees.iter().enumerate() {
        let u = SymmetricPotential::new(to_f64(d), vec![0.0, 0.02, 0.03, -0.01])?;
        let (vol, curv) = cp1_integrals(&u, &g)?;
        worst = worst.max((vol - to_f64(&table.bundles[i].a0)).abs());
        worst = worst.max((curv - to_f64(&table.bundles[i].a1)).abs());
    }
    // ℂP¹×ℂP¹
    let bideg = [(q(1), q(1)), (q(2), q(3)), (frac(1, 2), q(2))];
    let t = PolarizedTuple::product_cp1(&bideg)?;
    let table = untwisted_table(&t, &TorusAction::trivial(&t))?;
    for (i, (a, b)) in bideg.iter().enumerate() {
        let p = ProductMetric {
            a: SymmetricPotential::new(to_f64(a), vec![0.0, 0.0, 0.02])?,
            b: SymmetricPotential::new(to_f64(b), vec![0.0, 0.01, 0.0, 0.01])?,
        };
        worst = worst.max((p.volume(&g)? - to_f64(&table.bundles[i].a0)).abs());
        worst = worst.max((p.half_total_scalar(&g)? - to_f64(&table.bundles[i].a1)).abs());
    }
    Ok((worst < 1e-8, format!("max |coefficient - integral| = {worst:.2e}")))
}
