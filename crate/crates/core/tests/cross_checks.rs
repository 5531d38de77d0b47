//! Cross-module checks through the public API: closed forms against the
//! finite-difference oracle and the grid generators over random parameters.

use std::sync::Arc;

use pdmosc::gridops::{closed_form_states, eigen_residual};
use pdmosc::oracle::{assemble_default, compare_spectrum, eigensolve};
use pdmosc::spectrum::energy;
use pdmosc::{ModelParams, Parity, RadialGrid, SectorLabel};
use proptest::prelude::*;

fn radial(alpha: f64, omega: f64, d: u32, l: u32) -> pdmosc::DerivedParams {
    ModelParams::new(alpha, omega, SectorLabel::Radial { d, l })
        .unwrap()
        .derive()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn oracle_reproduces_closed_spectrum(alpha in 0.3f64..5.0, omega in 0.5f64..6.0, d in 3u32..6, l in 0u32..3) {
        let dp = radial(alpha, omega, d, l);
        // d = 4, l = 0 (psi ~ r^(3/2) at the origin) converges only as h^2 after
        // extrapolation; with heavy tails (lambda/alpha near 1) it needs the extra points
        let cmp = compare_spectrum(&dp, 2, 8000).unwrap();
        for row in &cmp.rows {
            prop_assert!(row.rel_err <= 1e-6, "{row:?}");
            prop_assert!(row.overlap >= 1.0 - 1e-6, "{row:?}");
        }
    }

    #[test]
    fn closed_forms_are_grid_eigenfunctions(alpha in 0.3f64..5.0, omega in 0.5f64..6.0, l in 0u32..3) {
        let dp = radial(alpha, omega, 3, l);
        let grid = Arc::new(RadialGrid::for_model(&dp, 4, 4001).unwrap());
        for (n, psi) in closed_form_states(&dp, &grid, 4).iter().enumerate() {
            let rep = eigen_residual(&dp, n as u32, psi).unwrap();
            prop_assert!(rep.relative <= 1e-5, "{}: {:e}", rep.identity, rep.relative);
        }
    }
}

#[test]
fn oracle_states_have_n_nodes() {
    for dp in [
        radial(3.0, 4.0, 3, 0),
        ModelParams::new(1.0, 8f64.sqrt(), SectorLabel::Line { parity: Parity::Odd })
            .unwrap()
            .derive(),
    ] {
        let disc = assemble_default(&dp, 1000).unwrap();
        let spec = eigensolve(&disc, 6).unwrap();
        for (n, psi) in spec.eigenvectors.iter().enumerate() {
            // ignore the numerically zero tail
            let peak = psi.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let live: Vec<f64> = psi.iter().copied().filter(|v| v.abs() > 1e-10 * peak).collect();
            let nodes = live.windows(2).filter(|w| w[0] * w[1] < 0.0).count();
            assert_eq!(nodes, n, "{}", dp.sector);
        }
    }
}

#[test]
fn critical_centrifugal_sector_is_reported_but_not_certified() {
    // d = 2, l = 0: L = -1/2 and psi ~ r^(1/2) at the origin, which the
    // Dirichlet stencil resolves only logarithmically slowly
    let dp = radial(1.0, 2.0, 2, 0);
    assert!(dp.is_critical_centrifugal());
    let coarse = compare_spectrum(&dp, 1, 500).unwrap();
    let fine = compare_spectrum(&dp, 1, 2000).unwrap();
    for (c, f) in coarse.rows.iter().zip(&fine.rows) {
        assert!(f.e_extrap.is_finite());
        assert!(f.rel_err < c.rel_err, "{c:?} {f:?}");
        assert!(f.rel_err > 1e-6);
        assert!(f.e_extrap > energy(&dp, f.n));
    }
}
