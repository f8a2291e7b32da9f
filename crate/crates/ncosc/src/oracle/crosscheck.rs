//! Three-way spectrum comparison: closed form (both coupling conventions),
//! ladder-form diagonalization, and direct Bopp-shifted diagonalization. The
//! direct Hamiltonian takes no convention input, so it arbitrates which
//! convention the closed form should carry.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fockspace::{
    hamiltonian_direct, hamiltonian_ladder, number_operators, FockBasis, QuantumState,
};
use crate::ncspace::{CouplingConvention, NCParams, OscParams};
use crate::spectrum::{diagonalize, diagonalize_full, spectrum_table};

#[derive(Clone, Debug, Serialize)]
pub struct CrosscheckRow {
    pub n_g: usize,
    pub n_d: usize,
    pub closed_bare: f64,
    pub closed_hbar_scaled: f64,
    pub ladder: f64,
    pub direct: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct CrosscheckReport {
    pub hbar: f64,
    pub n_max: usize,
    pub n_levels: usize,
    pub rows: Vec<CrosscheckRow>,
    /// max relative deviation of the c = 1 closed form from the direct spectrum
    pub max_rel_dev_bare: f64,
    /// max relative deviation of the c = ħ closed form from the direct spectrum
    pub max_rel_dev_hbar_scaled: f64,
    /// max relative deviation of the ladder matrix (preferred convention)
    pub max_rel_dev_ladder: f64,
    /// convention whose closed form tracks the direct Hamiltonian
    pub preferred: CouplingConvention,
    /// whether the (n_g, n_d) assignment was confirmed through ⟨N_g − N_d⟩
    pub pairing_validated: bool,
}

fn max_rel_dev(got: &[f64], want: &[f64]) -> f64 {
    got.iter()
        .zip(want)
        .map(|(g, w)| (g - w).abs() / w.abs().max(f64::MIN_POSITIVE))
        .fold(0.0, f64::max)
}

/// Compare the lowest `n_levels` energies of the three constructions.
///
/// Levels participate only up to total quanta n_max − 6 (the
/// truncation-validity guard); asking for more is an error.
pub fn spectrum_crosscheck(
    osc: &OscParams,
    nc: &NCParams,
    basis: FockBasis,
    n_levels: usize,
) -> Result<CrosscheckReport> {
    if n_levels == 0 {
        return Err(Error::InvalidParameter("n_levels must be >= 1".into()));
    }
    let guard_total = basis.n_max().checked_sub(6).ok_or_else(|| {
        Error::TruncationOverflow(format!(
            "truncation-validity guard needs n_max >= 6 (plus headroom), got n_max = {}; \
             levels within n_max - 6 total quanta would be empty",
            basis.n_max()
        ))
    })?;
    let available = (guard_total + 1) * (guard_total + 2) / 2;
    if n_levels > available {
        return Err(Error::TruncationOverflow(format!(
            "{n_levels} levels requested but only {available} lie within the \
             truncation-validity guard (total quanta <= n_max - 6 = {guard_total})"
        )));
    }

    let table_bare = spectrum_table(osc, nc, guard_total, CouplingConvention::Bare);
    let table_hbar = spectrum_table(osc, nc, guard_total, CouplingConvention::HbarScaled);
    let closed_bare: Vec<f64> = table_bare.iter().take(n_levels).map(|l| l.energy).collect();
    let closed_hbar: Vec<f64> = table_hbar.iter().take(n_levels).map(|l| l.energy).collect();

    let h_direct = hamiltonian_direct(osc, nc, basis);
    let (direct_all, direct_vecs) = diagonalize_full(&h_direct)?;
    let direct: Vec<f64> = direct_all.iter().take(n_levels).copied().collect();

    let dev_bare = max_rel_dev(&closed_bare, &direct);
    let dev_hbar = max_rel_dev(&closed_hbar, &direct);
    let preferred = if dev_hbar <= dev_bare {
        CouplingConvention::HbarScaled
    } else {
        CouplingConvention::Bare
    };

    let h_ladder = hamiltonian_ladder(osc, nc, basis, preferred);
    let ladder_all = diagonalize(&h_ladder)?;
    let ladder: Vec<f64> = ladder_all.iter().take(n_levels).copied().collect();
    let dev_ladder = max_rel_dev(&ladder, &direct);

    // The preferred table labels the rows. Validate the assignment through
    // the <N_g - N_d> expectation of the direct eigenvectors wherever the
    // spectrum is resolvable (gaps above the eigensolver noise floor).
    let preferred_table = match preferred {
        CouplingConvention::Bare => &table_bare,
        CouplingConvention::HbarScaled => &table_hbar,
    };
    let (n_g_op, n_d_op) = number_operators(basis);
    let mut pairing_validated = true;
    let gap_floor = 1e-8 * nc.hbar() * osc.omega();
    for (k, row) in preferred_table.iter().take(n_levels).enumerate() {
        let isolated = {
            let below = k
                .checked_sub(1)
                .map(|j| (preferred_table[j].energy - row.energy).abs() > gap_floor)
                .unwrap_or(true);
            let above = preferred_table
                .get(k + 1)
                .map(|l| (l.energy - row.energy).abs() > gap_floor)
                .unwrap_or(true);
            below && above
        };
        if !isolated {
            continue;
        }
        let state = QuantumState::new(basis, direct_vecs.column(k).into_owned())?;
        let lz = n_g_op.expectation(&state)?.re - n_d_op.expectation(&state)?.re;
        let want = row.n_g as f64 - row.n_d as f64;
        if (lz - want).abs() > 1e-6 {
            pairing_validated = false;
        }
    }

    let rows = preferred_table
        .iter()
        .take(n_levels)
        .enumerate()
        .map(|(k, l)| CrosscheckRow {
            n_g: l.n_g,
            n_d: l.n_d,
            closed_bare: closed_bare[k],
            closed_hbar_scaled: closed_hbar[k],
            ladder: ladder[k],
            direct: direct[k],
        })
        .collect();

    Ok(CrosscheckReport {
        hbar: nc.hbar(),
        n_max: basis.n_max(),
        n_levels,
        rows,
        max_rel_dev_bare: dev_bare,
        max_rel_dev_hbar_scaled: dev_hbar,
        max_rel_dev_ladder: dev_ladder,
        preferred,
        pairing_validated,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn commutative_case_agrees_everywhere() {
        let osc = OscParams::new(1.0, 1.0).unwrap();
        let nc = NCParams::new(0.0, 0.0).unwrap();
        let basis = FockBasis::new(14).unwrap();
        let report = spectrum_crosscheck(&osc, &nc, basis, 6).unwrap();
        assert!(report.max_rel_dev_bare < 1e-9);
        assert!(report.max_rel_dev_hbar_scaled < 1e-9);
        assert!(report.max_rel_dev_ladder < 1e-9);
        assert!(report.pairing_validated);
    }

    #[test]
    fn noncommutative_agreement_at_unit_hbar() {
        let osc = OscParams::new(1.0, 1.0).unwrap();
        let nc = NCParams::new(0.1, 0.1).unwrap();
        let basis = FockBasis::new(14).unwrap();
        let report = spectrum_crosscheck(&osc, &nc, basis, 6).unwrap();
        // at hbar = 1 the conventions coincide
        assert!(report.max_rel_dev_bare < 1e-6);
        assert!(report.max_rel_dev_hbar_scaled < 1e-6);
        assert!(report.pairing_validated);
    }

    #[test]
    fn arbiter_discriminates_at_hbar_two() {
        let osc = OscParams::new(1.0, 1.0).unwrap();
        let nc = NCParams::with_hbar(0.1, 0.1, 2.0).unwrap();
        let basis = FockBasis::new(14).unwrap();
        let report = spectrum_crosscheck(&osc, &nc, basis, 6).unwrap();
        let (winner, loser) = if report.preferred == CouplingConvention::HbarScaled {
            (report.max_rel_dev_hbar_scaled, report.max_rel_dev_bare)
        } else {
            (report.max_rel_dev_bare, report.max_rel_dev_hbar_scaled)
        };
        assert!(winner <= 1e-6, "winner deviation {winner:.3e}");
        assert!(loser >= 1e-2, "loser deviation {loser:.3e}");
    }

    #[test]
    fn guard_rejects_small_bases() {
        let osc = OscParams::new(1.0, 1.0).unwrap();
        let nc = NCParams::new(0.1, 0.1).unwrap();
        let basis = FockBasis::new(3).unwrap();
        let err = spectrum_crosscheck(&osc, &nc, basis, 6).unwrap_err();
        assert!(matches!(err, Error::TruncationOverflow(_)));
        let basis = FockBasis::new(8).unwrap();
        // guard total = 2 -> 6 levels available, 7 is too many
        assert!(spectrum_crosscheck(&osc, &nc, basis, 7).is_err());
        assert!(spectrum_crosscheck(&osc, &nc, basis, 6).is_ok());
    }
}
