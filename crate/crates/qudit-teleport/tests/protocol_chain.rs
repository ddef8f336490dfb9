//! Cross-module invariants of the measurement chain: the brute-force
//! projections must reproduce the predicted coefficient families step by
//! step, under the convention each family claims.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use qudit_teleport::linalg::{omega, PureState, SlotSet};
use qudit_teleport::protocol::{
    collapsed_state, control_change_gate, correction, predicted_collapsed, predicted_residual,
    rotated_ket, run_protocol, total_state, CorrectionRuleset, FormulaSet, InputCoefficients,
    MEBasisConvention, Outcome,
};
use qudit_teleport::verifier::{oracle_correction, ref1_implied, sample_generic};

fn residual_for(
    c: &InputCoefficients,
    conv: &MEBasisConvention,
    m: usize,
    n: usize,
) -> (PureState, f64) {
    let total = total_state(c, conv).unwrap();
    let me = conv.me_state(c.dim(), m, n).unwrap();
    total.project(&me, &SlotSet::new(&[1, 3]).unwrap()).unwrap()
}

#[test]
fn ours_chain_consistency_under_discovered_convention() {
    let conv = ref1_implied().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..50 {
        let c = sample_generic(3, &mut rng);
        for m in 0..3 {
            for n in 0..3 {
                let (residual, p) = residual_for(&c, &conv, m, n);
                assert!((p - 1.0 / 9.0).abs() < 1e-12);
                let predicted = predicted_residual(FormulaSet::Ours, &c, m, n).unwrap();
                assert!(
                    residual.normalized().unwrap().equal_up_to_global_phase(&predicted, 1e-10).unwrap(),
                    "(m,n)=({m},{n})"
                );
            }
        }
        for o in Outcome::all(3) {
            let (collapsed, p) = collapsed_state(&c, &conv, o).unwrap();
            assert!((p - 1.0 / 27.0).abs() < 1e-12);
            let predicted = predicted_collapsed(FormulaSet::Ours, &c, o).unwrap();
            assert!(collapsed.equal_up_to_global_phase(&predicted, 1e-10).unwrap(), "{o}");
        }
    }
}

#[test]
fn baan_chain_consistency_under_m2() {
    let conv = MEBasisConvention::m2();
    let mut rng = ChaCha8Rng::seed_from_u64(2025);
    for _ in 0..50 {
        let c = sample_generic(3, &mut rng);
        for m in 0..3 {
            for n in 0..3 {
                let (residual, _) = residual_for(&c, &conv, m, n);
                let predicted = predicted_residual(FormulaSet::BaAn, &c, m, n).unwrap();
                assert!(
                    residual.normalized().unwrap().equal_up_to_global_phase(&predicted, 1e-10).unwrap(),
                    "(m,n)=({m},{n})"
                );
            }
        }
        for o in Outcome::all(3) {
            let (collapsed, _) = collapsed_state(&c, &conv, o).unwrap();
            let predicted = predicted_collapsed(FormulaSet::BaAn, &c, o).unwrap();
            assert!(collapsed.equal_up_to_global_phase(&predicted, 1e-10).unwrap(), "{o}");
        }
    }
}

#[test]
fn me_basis_gram_matrix_is_identity_for_named_conventions() {
    let named = [MEBasisConvention::std(), MEBasisConvention::m2(), ref1_implied().unwrap()];
    for conv in &named {
        for dim in 2..=7 {
            let states: Vec<PureState> = (0..dim)
                .flat_map(|m| (0..dim).map(move |n| (m, n)))
                .map(|(m, n)| conv.me_state(dim, m, n).unwrap())
                .collect();
            for (i, a) in states.iter().enumerate() {
                for (j, b) in states.iter().enumerate() {
                    let want = if i == j { 1.0 } else { 0.0 };
                    let ip = a.inner(b).unwrap();
                    assert!(
                        (ip - Complex64::new(want, 0.0)).norm() < 1e-10,
                        "{} dim {dim} ({i},{j})",
                        conv.name()
                    );
                }
            }
        }
    }
}

#[test]
fn probabilities_are_uniform_for_every_convention() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for conv in [MEBasisConvention::std(), MEBasisConvention::m2(), ref1_implied().unwrap()] {
        let c = sample_generic(3, &mut rng);
        let mut total = 0.0;
        for o in Outcome::all(3) {
            let run = run_protocol(&c, &conv, CorrectionRuleset::OursFormula, o).unwrap();
            assert!((run.probability - 1.0 / 27.0).abs() < 1e-10, "{} {o}", conv.name());
            total += run.probability;
        }
        assert!((total - 1.0).abs() < 1e-10);
    }
}

#[test]
fn formula_correction_inverts_predicted_collapse_at_all_dimensions() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for dim in 2..=7 {
        let c = sample_generic(dim, &mut rng);
        for o in Outcome::all(dim) {
            let collapsed = predicted_collapsed(FormulaSet::Ours, &c, o).unwrap();
            let u = correction(CorrectionRuleset::OursFormula, dim, o).unwrap();
            let corrected = u.apply(&collapsed, &SlotSet::new(&[1, 2]).unwrap()).unwrap();
            let f = corrected.fidelity(&c.input_state()).unwrap();
            assert!(f >= 1.0 - 1e-10, "dim {dim} {o}: {f}");
        }
    }
}

#[test]
fn table_rulesets_equal_their_formulas_row_by_row() {
    use qudit_teleport::protocol::diagonal_rows;
    for (table, formula) in [
        (CorrectionRuleset::OursTable, CorrectionRuleset::OursFormula),
        (CorrectionRuleset::BaAnTable, CorrectionRuleset::BaAnFormula),
    ] {
        for o in Outcome::all(3) {
            let ut = correction(table, 3, o).unwrap();
            let uf = correction(formula, 3, o).unwrap();
            // diagonal data is integer-exact
            assert_eq!(diagonal_rows(&ut, 3).unwrap(), diagonal_rows(&uf, 3).unwrap(), "{o}");
            assert_eq!(ut, uf, "{o}");
        }
    }
}

#[test]
fn ruleset_agreement_boundary_is_two_m_mod_n() {
    for dim in 2..=7 {
        for o in Outcome::all(dim) {
            let a = correction(CorrectionRuleset::OursFormula, dim, o).unwrap();
            let b = correction(CorrectionRuleset::BaAnFormula, dim, o).unwrap();
            let equal = a.max_entry_diff(&b).unwrap() < 1e-12;
            assert_eq!(equal, (2 * o.m) % dim == 0, "dim {dim} {o}");
        }
    }
}

#[test]
fn rotated_basis_reproduces_the_reexpansion_exponent() {
    // expanding the post-gate state in {|l~>} must give coefficients
    // w^{km+mn-kl+m}/sqrt(N) times alpha_k on |[k+n],[k+n]>
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let dim = 3;
    let c = sample_generic(dim, &mut rng);
    for m in 0..dim {
        for n in 0..dim {
            let residual = predicted_residual(FormulaSet::Ours, &c, m, n).unwrap();
            let with_anc = residual.tensor(&PureState::ket(dim, &[0]).unwrap()).unwrap();
            let after = control_change_gate(dim)
                .apply(&with_anc, &SlotSet::new(&[2, 3]).unwrap())
                .unwrap();
            for l in 0..dim {
                let (branch, _) = after
                    .project(&rotated_ket(dim, l).unwrap(), &SlotSet::new(&[1]).unwrap())
                    .unwrap();
                let scale = 1.0 / (dim as f64).sqrt();
                for k in 0..dim {
                    let kk = (k + n) % dim;
                    let e = (k * m + m * n + m) as i64 - (k * l) as i64;
                    let want = c.alpha()[k] * omega(dim as u32, e) * scale;
                    let got = branch.amp(kk * dim + kk);
                    assert!((got - want).norm() < 1e-12, "l={l} m={m} n={n} k={k}");
                }
            }
        }
    }
}

#[test]
fn collapse_drops_exactly_the_m_n_plus_one_phase() {
    // the reexpansion branch and the collapsed-state formula agree up to the
    // global factor w^{m(n+1)}
    let mut rng = ChaCha8Rng::seed_from_u64(405);
    let c = sample_generic(3, &mut rng);
    for o in Outcome::all(3) {
        let mut branch = vec![Complex64::new(0.0, 0.0); 9];
        for k in 0..3 {
            let kk = (k + o.n) % 3;
            let e = (k * o.m + o.m * o.n + o.m) as i64 - (k * o.l) as i64;
            branch[kk * 3 + kk] = c.alpha()[k] * omega(3, e);
        }
        let branch = PureState::new(3, 2, branch).unwrap();
        let collapsed = predicted_collapsed(FormulaSet::Ours, &c, o).unwrap();
        assert!(branch.equal_up_to_global_phase(&collapsed, 1e-10).unwrap(), "{o}");
        let expected_phase = omega(3, (o.m * (o.n + 1)) as i64);
        let scaled = collapsed.scaled(expected_phase);
        for i in 0..9 {
            assert!((branch.amp(i) - scaled.amp(i)).norm() < 1e-12, "{o} amp {i}");
        }
    }
}

#[test]
fn oracle_agrees_with_baan_indices_on_the_real_m2_chain() {
    let mut rng = ChaCha8Rng::seed_from_u64(406);
    let conv = MEBasisConvention::m2();
    for dim in [2usize, 3] {
        let c = sample_generic(dim, &mut rng);
        for o in Outcome::all(dim) {
            let (collapsed, _) = collapsed_state(&c, &conv, o).unwrap();
            let res = oracle_correction(&collapsed, &c, dim, 1e-10).unwrap();
            assert_eq!(res.maximizers, vec![((o.l + o.m) % dim, o.n)], "dim {dim} {o}");
            assert!(res.unique);
        }
    }
}

#[test]
fn zero_fidelity_sharpness_under_uniform_coefficients() {
    let c = InputCoefficients::uniform(3).unwrap();
    let conv = MEBasisConvention::m2();
    for o in Outcome::all(3) {
        let run = run_protocol(&c, &conv, CorrectionRuleset::OursFormula, o).unwrap();
        if run.fidelity_after_correction < 1.0 - 1e-10 {
            assert!(run.fidelity_after_correction <= 1e-10, "{o}: {}", run.fidelity_after_correction);
        }
    }
}
