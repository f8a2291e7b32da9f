//! Closed-form stationary spectrum and its dense-diagonalization oracle.
//!
//! E(n_g, n_d) = ħΩ(n_g + n_d + 1) − c·κ(n_g − n_d), with Ω and κ from the
//! effective-parameter reduction and c the coupling convention. Numerical
//! eigenvalues of the Bopp-shifted Hamiltonian adjudicate c.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fockspace::{CMat, OperatorMatrix};
use crate::ncspace::{effective_params, CouplingConvention, NCParams, OscParams};

/// How an energy value was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EnergySource {
    ClosedForm,
    Numerical,
}

#[derive(Clone, Debug, Serialize)]
pub struct EnergyLevel {
    pub n_g: usize,
    pub n_d: usize,
    pub energy: f64,
    pub source: EnergySource,
}

/// E = ħΩ(n_g + n_d + 1) − c·κ(n_g − n_d).
pub fn energy_closed_form(
    n_g: usize,
    n_d: usize,
    osc: &OscParams,
    nc: &NCParams,
    convention: CouplingConvention,
) -> f64 {
    let eff = effective_params(osc, nc);
    let c = convention.factor(nc.hbar());
    nc.hbar() * eff.omega_eff * (n_g + n_d + 1) as f64
        - c * eff.kappa * (n_g as f64 - n_d as f64)
}

/// All levels with n_g + n_d ≤ `max_total_quanta`, ascending by energy,
/// ties broken by (n_g, n_d) lexicographic order.
pub fn spectrum_table(
    osc: &OscParams,
    nc: &NCParams,
    max_total_quanta: usize,
    convention: CouplingConvention,
) -> Vec<EnergyLevel> {
    let mut levels = Vec::new();
    for total in 0..=max_total_quanta {
        for n_g in 0..=total {
            let n_d = total - n_g;
            levels.push(EnergyLevel {
                n_g,
                n_d,
                energy: energy_closed_form(n_g, n_d, osc, nc, convention),
                source: EnergySource::ClosedForm,
            });
        }
    }
    levels.sort_by(|a, b| {
        a.energy
            .total_cmp(&b.energy)
            .then(a.n_g.cmp(&b.n_g))
            .then(a.n_d.cmp(&b.n_d))
    });
    levels
}

/// Hermiticity gate for [`diagonalize`] and [`diagonalize_full`].
const HERMITICITY_TOL: f64 = 1e-10;

fn check_hermitian(h: &OperatorMatrix) -> Result<()> {
    let defect = h.hermiticity_defect();
    if defect > HERMITICITY_TOL {
        return Err(Error::NonHermitian(format!(
            "'{}' has hermiticity defect {defect:.3e} > {HERMITICITY_TOL:.1e}",
            h.label()
        )));
    }
    Ok(())
}

/// Ascending real eigenvalues of a Hermitian operator.
pub fn diagonalize(h: &OperatorMatrix) -> Result<Vec<f64>> {
    check_hermitian(h)?;
    let mut evs: Vec<f64> = h.entries().clone().symmetric_eigenvalues().iter().copied().collect();
    evs.sort_by(f64::total_cmp);
    Ok(evs)
}

/// Ascending eigenpairs of a Hermitian operator; column k of the returned
/// matrix is the eigenvector of the k-th eigenvalue.
pub fn diagonalize_full(h: &OperatorMatrix) -> Result<(Vec<f64>, CMat)> {
    check_hermitian(h)?;
    let se = h
        .entries()
        .clone()
        .try_symmetric_eigen(f64::EPSILON, 0)
        .ok_or_else(|| Error::EigenFailure(format!("'{}' did not converge", h.label())))?;
    let mut order: Vec<usize> = (0..se.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| se.eigenvalues[i].total_cmp(&se.eigenvalues[j]));
    let evs: Vec<f64> = order.iter().map(|&i| se.eigenvalues[i]).collect();
    let n = se.eigenvectors.nrows();
    let mut vecs = CMat::zeros(n, se.eigenvalues.len());
    for (k, &i) in order.iter().enumerate() {
        vecs.set_column(k, &se.eigenvectors.column(i));
    }
    Ok((evs, vecs))
}

/// Energy shift per unit of angular momentum (in units of ħ) inside a
/// degenerate multiplet: c·κ. Adjacent sublevels (n_g ± 1, n_d ∓ 1) change
/// n_g − n_d by two, so their spacing is twice this value.
pub fn level_splitting(
    osc: &OscParams,
    nc: &NCParams,
    k: usize,
    convention: CouplingConvention,
) -> Result<f64> {
    if k < 1 {
        return Err(Error::InvalidParameter(
            "multiplet index k must be >= 1".into(),
        ));
    }
    let eff = effective_params(osc, nc);
    Ok(convention.factor(nc.hbar()) * eff.kappa)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fockspace::{hamiltonian_direct, hamiltonian_ladder, FockBasis, OperatorMatrix};
    use num_complex::Complex64;

    fn osc(m: f64, w: f64) -> OscParams {
        OscParams::new(m, w).unwrap()
    }

    fn nc(t: f64, tb: f64) -> NCParams {
        NCParams::new(t, tb).unwrap()
    }

    const HBAR_C: CouplingConvention = CouplingConvention::HbarScaled;

    #[test]
    fn closed_form_examples() {
        let o = osc(1.0, 1.0);
        let p = nc(0.1, 0.1);
        assert!((energy_closed_form(1, 0, &o, &p, HBAR_C) - 1.905).abs() < 1e-12);
        assert!((energy_closed_form(0, 0, &o, &p, HBAR_C) - 1.0025).abs() < 1e-12);
        assert!((energy_closed_form(0, 1, &o, &p, HBAR_C) - 2.105).abs() < 1e-12);
    }

    #[test]
    fn commutative_reduction_is_exact() {
        let o = osc(1.3, 0.7);
        let p = nc(0.0, 0.0);
        for n_g in 0..5 {
            for n_d in 0..5 {
                let e = energy_closed_form(n_g, n_d, &o, &p, HBAR_C);
                let want = p.hbar() * o.omega() * (n_g + n_d + 1) as f64;
                assert_eq!(e, want);
            }
        }
    }

    #[test]
    fn commutative_degeneracy() {
        let o = osc(1.0, 1.0);
        let p = nc(0.0, 0.0);
        let table = spectrum_table(&o, &p, 4, HBAR_C);
        for k in 0..=4usize {
            let want = (k + 1) as f64;
            let count = table
                .iter()
                .filter(|l| (l.energy - want).abs() < 1e-12)
                .count();
            assert_eq!(count, k + 1, "multiplet {k}");
        }
    }

    #[test]
    fn table_sorted_and_deterministic() {
        let o = osc(1.0, 1.0);
        let p = nc(0.1, 0.05);
        let t1 = spectrum_table(&o, &p, 5, HBAR_C);
        let t2 = spectrum_table(&o, &p, 5, HBAR_C);
        for (a, b) in t1.iter().zip(&t2) {
            assert_eq!(a.energy.to_bits(), b.energy.to_bits());
            assert_eq!((a.n_g, a.n_d), (b.n_g, b.n_d));
        }
        for w in t1.windows(2) {
            assert!(w[0].energy <= w[1].energy);
        }
    }

    #[test]
    fn multiplet_splitting_structure() {
        let o = osc(1.0, 1.0);
        let p = nc(0.1, 0.1);
        let split = level_splitting(&o, &p, 2, HBAR_C).unwrap();
        assert!((split - 0.1).abs() < 1e-15);
        assert!(level_splitting(&o, &p, 0, HBAR_C).is_err());
        // independent of k, and consistent with the closed form:
        // |E(k,0) − E(k−1,1)| = 2·c·κ
        for k in 1..5usize {
            let e_k0 = energy_closed_form(k, 0, &o, &p, HBAR_C);
            let e_km1 = energy_closed_form(k - 1, 1, &o, &p, HBAR_C);
            assert!(((e_k0 - e_km1).abs() / 2.0 - split).abs() < 1e-12);
        }
        // adjacent distinct sublevels within a multiplet are spaced by 2cκ
        let table = spectrum_table(&o, &p, 3, HBAR_C);
        let mut m3: Vec<f64> = table
            .iter()
            .filter(|l| l.n_g + l.n_d == 3)
            .map(|l| l.energy)
            .collect();
        m3.sort_by(f64::total_cmp);
        for w in m3.windows(2) {
            assert!((w[1] - w[0] - 2.0 * split).abs() < 1e-12);
        }
    }

    #[test]
    fn splitting_vanishes_commutatively() {
        assert_eq!(
            level_splitting(&osc(1.0, 1.0), &nc(0.0, 0.0), 3, HBAR_C).unwrap(),
            0.0
        );
    }

    #[test]
    fn diagonalize_diagonal_matrix() {
        let b = FockBasis::new(2).unwrap();
        let mut m = CMat::zeros(b.dim(), b.dim());
        for (i, v) in [3.0, -1.0, 2.0, 0.0, 5.0, 4.0, 1.0, -2.0, 6.0].iter().enumerate() {
            m[(i, i)] = Complex64::new(*v, 0.0);
        }
        let op = OperatorMatrix::two_mode(b, "diag", m).unwrap();
        let evs = diagonalize(&op).unwrap();
        assert_eq!(evs, vec![-2.0, -1.0, 0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
    }

    #[test]
    fn diagonalize_rejects_non_hermitian() {
        let b = FockBasis::new(2).unwrap();
        let mut m = CMat::zeros(b.dim(), b.dim());
        m[(0, 1)] = Complex64::new(1.0, 0.0);
        let op = OperatorMatrix::two_mode(b, "bad", m).unwrap();
        assert!(matches!(diagonalize(&op), Err(Error::NonHermitian(_))));
    }

    #[test]
    fn eigensolver_backward_error() {
        let b = FockBasis::new(9).unwrap();
        let h = hamiltonian_direct(&osc(1.0, 1.0), &nc(0.1, 0.1), b);
        let (evs, vecs) = diagonalize_full(&h).unwrap();
        let lam = CMat::from_diagonal(
            &nalgebra::DVector::from_iterator(evs.len(), evs.iter().map(|&e| Complex64::new(e, 0.0))),
        );
        let resid = (h.entries() * &vecs - &vecs * lam).norm() / h.entries().norm();
        assert!(resid < 1e-10, "relative backward error {resid:.3e}");
    }

    #[test]
    fn ladder_eigenvalues_match_table() {
        let b = FockBasis::new(10).unwrap();
        let o = osc(1.0, 1.0);
        let p = nc(0.1, 0.1);
        let h = hamiltonian_ladder(&o, &p, b, HBAR_C);
        let evs = diagonalize(&h).unwrap();
        let table = spectrum_table(&o, &p, b.n_max() - 6, HBAR_C);
        for (got, want) in evs.iter().zip(table.iter().take(6)) {
            assert!(
                (got - want.energy).abs() < 1e-9,
                "{got} vs {}",
                want.energy
            );
        }
    }

    #[test]
    fn ladder_interior_trace_matches_table_sum() {
        let b = FockBasis::new(10).unwrap();
        let o = osc(1.0, 1.0);
        let p = nc(0.1, 0.05);
        let h = hamiltonian_ladder(&o, &p, b, HBAR_C);
        let q = b.interior_total();
        let trace: f64 = h.interior_block(q).diagonal().iter().map(|z| z.re).sum();
        let want: f64 = spectrum_table(&o, &p, q, HBAR_C)
            .iter()
            .map(|l| l.energy)
            .sum();
        assert!((trace - want).abs() < 1e-9, "{trace} vs {want}");
    }

    #[test]
    fn direct_low_spectrum_matches_closed_form() {
        let b = FockBasis::new(10).unwrap();
        let o = osc(1.0, 1.0);
        let p = nc(0.1, 0.1);
        let evs = diagonalize(&hamiltonian_direct(&o, &p, b)).unwrap();
        let table = spectrum_table(&o, &p, b.n_max() - 6, HBAR_C);
        for (got, want) in evs.iter().zip(table.iter().take(6)) {
            let rel = (got - want.energy).abs() / want.energy.abs();
            assert!(rel < 1e-6, "rel dev {rel:.3e}");
        }
    }

    #[test]
    fn ground_state_is_minimum_and_positive() {
        let o = osc(1.0, 1.0);
        let p = nc(0.1, 0.1);
        let eff = effective_params(&o, &p);
        let table = spectrum_table(&o, &p, 6, HBAR_C);
        let e0 = p.hbar() * eff.omega_eff;
        assert!(e0 > 0.0);
        // c·κ < ħΩ here, so the vacuum heads the table
        assert_eq!((table[0].n_g, table[0].n_d), (0, 0));
        assert!((table[0].energy - e0).abs() < 1e-14);
    }
}
