//! Finite-difference and closed-form oracles for the mean-field maps.

use episis::dynamics::EpidemicParams;
use episis::graph::{gen_erdos_renyi, largest_connected_component, rewire_social, Graph};
use episis::mfa::{
    dominance_check, iterate_fixed_point, threshold_classify, MfaMap, MfaVector, ThresholdClass,
    FIXED_POINT_MAX_ITER, FIXED_POINT_TOL,
};

fn params(beta: f64, delta: f64, alpha: f64) -> EpidemicParams {
    EpidemicParams::new(beta, delta, alpha).unwrap()
}

/// Central-difference Jacobian of `map` about the near-origin base point
/// `eps * 1`, which keeps both evaluation points inside the domain.
fn finite_difference_jacobian(map: &MfaMap, n: usize, eps: f64) -> Vec<Vec<f64>> {
    let mut jac = vec![vec![0.0; n]; n];
    for j in 0..n {
        let mut plus = vec![eps; n];
        plus[j] = 2.0 * eps;
        let mut minus = vec![eps; n];
        minus[j] = 0.0;
        let f_plus = map.apply(&MfaVector::new(plus).unwrap());
        let f_minus = map.apply(&MfaVector::new(minus).unwrap());
        for i in 0..n {
            jac[i][j] = (f_plus.get(i) - f_minus.get(i)) / (2.0 * eps);
        }
    }
    jac
}

#[test]
fn jacobians_at_origin_match_closed_form_and_each_other() {
    let contact = largest_connected_component(&gen_erdos_renyi(12, 0.35, 21).unwrap());
    let social = rewire_social(&contact, 0.5, 22).unwrap();
    let n = contact.n();
    let p = params(0.4, 0.3, 0.6);
    let psi = MfaMap::Psi {
        contact: &contact,
        params: p,
    };
    let phi = MfaMap::Phi {
        contact: &contact,
        social: &social,
        params: p,
    };
    let eps = 1e-7;
    let j_psi = finite_difference_jacobian(&psi, n, eps);
    let j_phi = finite_difference_jacobian(&phi, n, eps);
    for i in 0..n {
        for j in 0..n {
            let closed_form = if i == j {
                1.0 - p.delta()
            } else if contact.has_edge(i, j) {
                p.beta()
            } else {
                0.0
            };
            assert!(
                (j_psi[i][j] - closed_form).abs() < 1e-6,
                "psi J[{i}][{j}] = {} vs {closed_form}",
                j_psi[i][j]
            );
            assert!(
                (j_phi[i][j] - closed_form).abs() < 1e-6,
                "phi J[{i}][{j}] = {} vs {closed_form}",
                j_phi[i][j]
            );
            assert!((j_psi[i][j] - j_phi[i][j]).abs() < 1e-6);
        }
    }
}

#[test]
fn psi_linearizes_to_beta_a_plus_decay_on_small_vectors() {
    let contact = Graph::cycle(6).unwrap();
    let p = params(0.4, 0.3, 0.5);
    let psi = MfaMap::Psi {
        contact: &contact,
        params: p,
    };
    let eps = 1e-7;
    let v: Vec<f64> = (0..6).map(|i| eps * (1.0 + i as f64 / 6.0)).collect();
    let image = psi.apply(&MfaVector::new(v.clone()).unwrap());
    for i in 0..6 {
        let mut linear = (1.0 - p.delta()) * v[i];
        for &j in contact.neighbors(i) {
            linear += p.beta() * v[j];
        }
        assert!(
            (image.get(i) - linear).abs() < 1e-6 * eps.max(linear),
            "node {i}: {} vs linearization {linear}",
            image.get(i)
        );
    }
}

#[test]
fn subcritical_settings_drive_both_maps_to_zero() {
    let contact = largest_connected_component(&gen_erdos_renyi(60, 0.1, 30).unwrap());
    let lambda =
        episis::graph::spectral_radius(&contact, 1e-12, 200_000).unwrap();
    // choose delta so that beta * lambda + 1 - delta = 0.9
    let beta = 0.05;
    let delta = beta * lambda + 0.1;
    assert!(delta < 1.0);
    let p = params(beta, delta, 0.5);
    assert_eq!(
        threshold_classify(&contact, &p).unwrap(),
        ThresholdClass::Subcritical
    );
    let social = rewire_social(&contact, 0.3, 31).unwrap();
    for map in [
        MfaMap::Psi {
            contact: &contact,
            params: p,
        },
        MfaMap::Phi {
            contact: &contact,
            social: &social,
            params: p,
        },
    ] {
        let x0 = MfaVector::uniform(contact.n(), 0.5).unwrap();
        let report = iterate_fixed_point(&map, &x0, FIXED_POINT_TOL, FIXED_POINT_MAX_ITER).unwrap();
        assert!(report.converged);
        assert!(
            report.point.sup_norm() < 1e-8,
            "{}: sup norm {}",
            map.name(),
            report.point.sup_norm()
        );
    }
}

#[test]
fn supercritical_awareness_fixed_point_is_strictly_positive_and_dominated() {
    let contact = largest_connected_component(&gen_erdos_renyi(60, 0.12, 32).unwrap());
    let social = rewire_social(&contact, 0.4, 33).unwrap();
    let p = params(0.3, 0.4, 0.5);
    assert_eq!(
        threshold_classify(&contact, &p).unwrap(),
        ThresholdClass::Supercritical
    );
    let x0 = MfaVector::uniform(contact.n(), 0.5).unwrap();
    let phi = MfaMap::Phi {
        contact: &contact,
        social: &social,
        params: p,
    };
    let psi = MfaMap::Psi {
        contact: &contact,
        params: p,
    };
    let p_star = iterate_fixed_point(&phi, &x0, FIXED_POINT_TOL, FIXED_POINT_MAX_ITER).unwrap();
    let q_star = iterate_fixed_point(&psi, &x0, FIXED_POINT_TOL, FIXED_POINT_MAX_ITER).unwrap();
    assert!(p_star.converged && q_star.converged);
    assert!(p_star.point.min_component() > 0.0);
    let report = dominance_check(&p_star.point, &q_star.point).unwrap();
    assert!(report.dominated, "worst margin {}", report.worst_margin);
}
