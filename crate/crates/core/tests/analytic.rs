mod common;

use common::sup_diff;
use ionlaser::analytic::{dispersive_pe, lir_pe, mir_pe, DispersiveFrame};
use ionlaser::models::{coupling_constants, h_lir, h_mir};
use ionlaser::propagation::evolve_series;
use ionlaser::{DispersiveForm, FockDim, ModelParams, ModelTag, Spin, StateVector, TimeGrid};
use proptest::prelude::*;

fn dim() -> FockDim {
    FockDim::new(16, 4).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn lir_closed_form_solves_its_hamiltonian(
        nu in 0.5f64..2.0,
        ratio in 0.01f64..0.5,
        eta in 0.0f64..0.5,
        k in -3i32..=3,
        alpha in 0.0f64..1.2,
    ) {
        let p = ModelParams::new(nu, ratio * nu, eta).unwrap().with_harmonic_detuning(k).unwrap();
        let psi0 = StateVector::coherent(dim(), Spin::Excited, alpha).unwrap();
        let grid = TimeGrid::uniform(80.0, 81).unwrap();
        let closed = lir_pe(&p, &psi0, &grid).unwrap();
        let matrix = evolve_series(ModelTag::LirEq5, &p, &h_lir(&p, dim()).unwrap(), &psi0, &grid).unwrap();
        prop_assert!(sup_diff(&closed, &matrix) <= 1e-10);
        prop_assert!(closed.pe().all(|pe| (0.0..=1.0 + 1e-12).contains(&pe)));
    }

    #[test]
    fn jc_closed_form_solves_its_hamiltonian(
        nu in 0.2f64..2.0,
        omega in 0.0f64..1.5,
        eta in 0.0f64..0.5,
        alpha in 0.0f64..1.2,
        ground in proptest::bool::ANY,
    ) {
        let p = ModelParams::new(nu, omega, eta).unwrap();
        let spin = if ground { Spin::Ground } else { Spin::Excited };
        let psi0 = StateVector::coherent(dim(), spin, alpha).unwrap();
        let grid = TimeGrid::uniform(100.0, 101).unwrap();
        let closed = mir_pe(&p, &psi0, &grid).unwrap();
        let matrix = evolve_series(ModelTag::MirEq8, &p, &h_mir(&p, dim()).unwrap(), &psi0, &grid).unwrap();
        prop_assert!(sup_diff(&closed, &matrix) <= 1e-10);
    }

    #[test]
    fn frame_map_inverts(
        nu in 0.2f64..2.0,
        omega in 0.0f64..1.5,
        eta in 0.0f64..0.3,
        alpha in 0.0f64..1.0,
    ) {
        let p = ModelParams::new(nu, omega, eta).unwrap();
        prop_assume!((4.0 * omega * omega - nu * nu).abs() > 0.05);
        let d = FockDim::new(30, 4).unwrap();
        let frame = DispersiveFrame::new(&p, &coupling_constants(&p).unwrap(), d).unwrap();
        let psi0 = StateVector::coherent(d, Spin::Excited, alpha).unwrap();
        let back = frame.backward().apply(&frame.forward().apply(psi0.amplitudes()));
        prop_assert!((back - psi0.amplitudes()).iter().map(|z| z.norm()).fold(0.0, f64::max) <= 1e-10);
    }
}

#[test]
fn dispersive_tracks_exact_dynamics_in_both_regimes() {
    let grid = TimeGrid::uniform(100.0, 2000).unwrap();
    for (p, n_max) in [(common::fig1(), 40), (common::fig2(), 60)] {
        let d = FockDim::new(n_max, 4).unwrap();
        let psi0 = StateVector::basis(d, Spin::Excited, 0).unwrap();
        let exact = evolve_series(
            ModelTag::ExactEq2,
            &p,
            &ionlaser::models::h_ion(&p, d).unwrap(),
            &psi0,
            &grid,
        )
        .unwrap();
        let disp = dispersive_pe(&p, &psi0, &grid, DispersiveForm::SecondOrder).unwrap();
        assert!(sup_diff(&exact, &disp) <= 0.05);
    }
}

#[test]
fn direct_coefficients_drift_at_low_intensity() {
    // the directly inserted shift has the wrong sign and twice the size
    let d = FockDim::new(40, 4).unwrap();
    let p = common::fig1();
    let psi0 = StateVector::basis(d, Spin::Excited, 0).unwrap();
    let grid = TimeGrid::uniform(100.0, 2000).unwrap();
    let exact = evolve_series(ModelTag::ExactEq2, &p, &ionlaser::models::h_ion(&p, d).unwrap(), &psi0, &grid).unwrap();
    let direct = dispersive_pe(&p, &psi0, &grid, DispersiveForm::Direct).unwrap();
    let second = dispersive_pe(&p, &psi0, &grid, DispersiveForm::SecondOrder).unwrap();
    assert!(sup_diff(&exact, &direct) > 0.3);
    assert!(sup_diff(&exact, &second) < 1e-3);
}
