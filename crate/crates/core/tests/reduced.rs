use std::f64::consts::PI;

use diracwalk::lattice::{build_torus, Sublattice};
use diracwalk::operators::{search_hamiltonian, Perturbation};
use diracwalk::reduced::{
    reduced_communication, reduced_comm_evolution, reduced_extra_site, reduced_search_evolution, reduced_three_bond,
    ReducedKind,
};
use diracwalk::spectral::dirac_states;
use diracwalk::C64;
use proptest::prelude::*;

fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
}

#[test]
fn three_level_spectrum() {
    let m = reduced_three_bond(288, 0, 0).unwrap();
    let ev = m.eigenvalues().unwrap();
    assert!(close(&ev, &[-0.2041, 0.0, 0.2041], 1e-4));
    assert!((m.e_plus() - 2.0 * (3.0f64 / 288.0).sqrt()).abs() < 1e-15);
    assert_eq!(m.basis_labels, vec!["K", "K'", "l"]);
    assert!(m.matrix.iter().flatten().all(|z| z.im.abs() < 1e-15));
}

#[test]
fn three_level_evolution() {
    let m = reduced_three_bond(288, 1, 2).unwrap();
    assert_eq!(reduced_search_evolution(&m, 0.0), (1.0, 0.0));
    let t = PI / 4.0 * 96f64.sqrt();
    assert!((m.peak_time() - t).abs() < 1e-12);
    let (s, l) = reduced_search_evolution(&m, t);
    assert!(s.abs() < 1e-12 && (l - 1.0).abs() < 1e-12);
}

#[test]
fn extra_site_time() {
    let m = reduced_extra_site(288, 0, 0).unwrap();
    assert_eq!(m.kind, ReducedKind::ExtraSite);
    assert!((m.peak_time() - 13.33).abs() < 0.01);
    assert_eq!(reduced_search_evolution(&m, 0.0).1, 0.0);
}

#[test]
fn communication_models() {
    let lat = build_torus(12, 12).unwrap();
    let a = |x, y| lat.site(x, y, Sublattice::A).unwrap();
    let eq = reduced_communication(288, &a(0, 0), &a(3, 3)).unwrap();
    assert_eq!(eq.kind, ReducedKind::CommEquivalent);
    let p = 2.0 * (6.0f64 / 288.0).sqrt();
    assert!(close(&eq.eigenvalues().unwrap(), &[-p, 0.0, 0.0, p], 1e-12));
    assert!((p - 0.2887).abs() < 1e-4);
    assert_eq!(reduced_comm_evolution(&eq, 0.0), (1.0, 0.0));
    let t = PI / 2.0 * 48f64.sqrt();
    assert!((eq.peak_time() - t).abs() < 1e-12);
    let (s, tt) = reduced_comm_evolution(&eq, t);
    assert!(s.abs() < 1e-12 && (tt - 1.0).abs() < 1e-12);

    let ne = reduced_communication(288, &a(0, 0), &a(1, 0)).unwrap();
    assert_eq!(ne.kind, ReducedKind::CommNonEquivalent);
    let ev = ne.eigenvalues().unwrap();
    assert!((ev[3] / ev[2] - 3f64.sqrt()).abs() < 1e-12 && (ev[0] + ev[3]).abs() < 1e-12);
    let best = (0..4000).map(|k| reduced_comm_evolution(&ne, k as f64 * 0.05).1).fold(0.0, f64::max);
    assert!(best < 1.0 && best > 0.5);
    // prefactors do not depend on where the pair sits
    let moved = reduced_communication(288, &a(5, 7), &a(6, 7)).unwrap();
    assert_eq!(moved.prefactor, ne.prefactor);
    assert!(close(&moved.eigenvalues().unwrap(), &ev, 1e-12));
}

#[test]
fn invalid_inputs() {
    assert!(reduced_three_bond(100, 0, 0).is_err());
    let lat = build_torus(12, 12).unwrap();
    let s = lat.site(0, 0, Sublattice::A).unwrap();
    let t = lat.site(3, 3, Sublattice::B).unwrap();
    assert!(reduced_communication(288, &s, &t).is_err());
}

#[test]
fn serializes_matrix_as_pairs() {
    let v = serde_json::to_value(reduced_three_bond(288, 1, 0).unwrap()).unwrap();
    assert_eq!(v["matrix"].as_array().unwrap().len(), 3);
    assert_eq!(v["matrix"][0][2].as_array().unwrap().len(), 2);
    assert_eq!(v["kind"], "three_bond");
}

/// Projection of the full H at γ = 1 onto (|K⟩, |K′⟩, |ℓ⟩) equals the
/// reduced matrix, phases included.
#[test]
fn full_hamiltonian_projects_onto_reduced_model() {
    let lat = build_torus(12, 12).unwrap();
    for (a, b) in [(0, 0), (1, 2), (2, 1), (5, 9)] {
        let o = lat.site(a, b, Sublattice::A).unwrap();
        let h = search_hamiltonian(&lat, &Perturbation::ThreeBond { marked: o }, 1.0).unwrap();
        let (k, kp) = dirac_states(&lat, Sublattice::A).unwrap();
        let nb = lat.neighbor_indices(o.linear);
        let mut l = vec![C64::new(0.0, 0.0); lat.n_sites];
        for &j in nb {
            l[j] = C64::new(1.0 / 3f64.sqrt(), 0.0);
        }
        let basis = [k, kp, l];
        let hv: Vec<Vec<C64>> = basis.iter().map(|v| h.apply(v).unwrap()).collect();
        let red = reduced_three_bond(288, a, b).unwrap().hamiltonian();
        for i in 0..3 {
            for j in 0..3 {
                let x: C64 = basis[i].iter().zip(&hv[j]).map(|(u, w)| u.conj() * w).sum();
                assert!((x - red.get(i, j)).norm() < 1e-12, "({a},{b}) [{i}{j}]: {x} vs {}", red.get(i, j));
            }
        }
    }
}

proptest! {
    #[test]
    fn closed_forms_and_probabilities(a in 0i64..9, b in 0i64..9, c in 0i64..9, d in 0i64..9, k in 1usize..8, t in 0.0f64..200.0) {
        let n = 18 * k * k;
        let lat = build_torus(3 * k as i64 + 6, 3 * k as i64 + 6).unwrap();
        for m in [reduced_three_bond(n, a, b).unwrap(), reduced_extra_site(n, a, b).unwrap()] {
            prop_assert!(m.hamiltonian().hermiticity_residual() < 1e-15);
            prop_assert!(close(&m.eigenvalues().unwrap(), &m.closed_form_eigenvalues(), 1e-12));
            let (p, q) = reduced_search_evolution(&m, t);
            prop_assert!((p + q - 1.0).abs() < 1e-12);
        }
        let s = lat.site(a, b, Sublattice::B).unwrap();
        let g = lat.site(c, d, Sublattice::B).unwrap();
        prop_assume!(s != g);
        let m = reduced_communication(n, &s, &g).unwrap();
        prop_assert!(close(&m.eigenvalues().unwrap(), &m.closed_form_eigenvalues(), 1e-12));
        let (p, q) = reduced_comm_evolution(&m, t);
        prop_assert!(p + q <= 1.0 + 1e-12);
    }
}
