//! Dense complex linear algebra for multi-qudit pure states.
//!
//! A [`PureState`] is an amplitude vector over the computational basis of
//! `Q` qudits of dimension `N`, indexed big-endian: qudit 1 owns the most
//! significant digit, so |d₁ d₂ … d_Q⟩ sits at index Σ dᵢ N^(Q−i). All
//! gates live in [`PhasePermOp`] form — a phase times a permutation of basis
//! labels — which covers every operator the protocol needs and keeps them
//! exactly unitary. Everything is immutable; operations return new values.

use num_complex::Complex64;
use std::f64::consts::TAU;

use crate::{Error, Result};

/// ω^exp for ω = e^{2πi/order}, the principal primitive root; the exponent is
/// reduced mod `order` before evaluation so each power is computed directly
/// from its reduced angle.
pub fn omega(order: u32, exp: i64) -> Complex64 {
    let e = exp.rem_euclid(i64::from(order));
    Complex64::from_polar(1.0, TAU * e as f64 / f64::from(order))
}

/// An ordered set of distinct qudit positions, 1-based.
///
/// Position 1 is the most significant digit of the basis index. Ranges are
/// checked against a concrete state when the set is used.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SlotSet(Vec<usize>);

impl SlotSet {
    pub fn new(slots: &[usize]) -> Result<Self> {
        for (i, &s) in slots.iter().enumerate() {
            if s == 0 {
                return Err(Error::SlotOutOfRange { slot: 0, qudits: 0 });
            }
            if slots[..i].contains(&s) {
                return Err(Error::DuplicateSlot(s));
            }
        }
        Ok(SlotSet(slots.to_vec()))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn contains(&self, slot: usize) -> bool {
        self.0.contains(&slot)
    }

    fn check_range(&self, qudits: usize) -> Result<()> {
        for &s in &self.0 {
            if s > qudits {
                return Err(Error::SlotOutOfRange { slot: s, qudits });
            }
        }
        Ok(())
    }
}

/// Dense pure state of `qudits` qudits, each of dimension `dim`.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    dim: usize,
    qudits: usize,
    amps: Vec<Complex64>,
}

impl PureState {
    /// Builds a state from raw amplitudes; the vector length must be
    /// dim^qudits and every component finite.
    pub fn new(dim: usize, qudits: usize, amps: Vec<Complex64>) -> Result<Self> {
        if dim < 2 {
            return Err(Error::BadDimension(dim));
        }
        if qudits == 0 {
            return Err(Error::ShapeMismatch("state needs at least one qudit".into()));
        }
        let want = dim.pow(qudits as u32);
        if amps.len() != want {
            return Err(Error::ShapeMismatch(format!(
                "expected {} amplitudes for {} qudits of dimension {}, got {}",
                want,
                qudits,
                dim,
                amps.len()
            )));
        }
        if let Some(i) = amps.iter().position(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(Error::NonFiniteAmplitude(i));
        }
        Ok(PureState { dim, qudits, amps })
    }

    /// The computational basis ket |d₁ d₂ … d_Q⟩.
    pub fn ket(dim: usize, digits: &[usize]) -> Result<Self> {
        if dim < 2 {
            return Err(Error::BadDimension(dim));
        }
        if digits.is_empty() {
            return Err(Error::ShapeMismatch("ket needs at least one digit".into()));
        }
        let mut index = 0usize;
        for &d in digits {
            if d >= dim {
                return Err(Error::DigitOutOfRange { digit: d, dim });
            }
            index = index * dim + d;
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); dim.pow(digits.len() as u32)];
        amps[index] = Complex64::new(1.0, 0.0);
        Ok(PureState { dim, qudits: digits.len(), amps })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn qudits(&self) -> usize {
        self.qudits
    }

    pub fn amps(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amp(&self, index: usize) -> Complex64 {
        self.amps[index]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn is_normalized(&self, tol: f64) -> bool {
        (self.norm_sqr() - 1.0).abs() <= tol
    }

    /// Returns the unit-norm rescaling of this state.
    pub fn normalized(&self) -> Result<Self> {
        let n2 = self.norm_sqr();
        if n2 < 1e-200 {
            return Err(Error::ZeroNorm);
        }
        let s = 1.0 / n2.sqrt();
        let amps = self.amps.iter().map(|a| a * s).collect();
        Ok(PureState { dim: self.dim, qudits: self.qudits, amps })
    }

    /// Multiplies every amplitude by `z`.
    pub fn scaled(&self, z: Complex64) -> Self {
        let amps = self.amps.iter().map(|a| a * z).collect();
        PureState { dim: self.dim, qudits: self.qudits, amps }
    }

    /// Kronecker product; `self`'s qudits occupy the leading (most
    /// significant) slots of the result.
    pub fn tensor(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch(self.dim, other.dim));
        }
        let mut amps = Vec::with_capacity(self.amps.len() * other.amps.len());
        for a in &self.amps {
            for b in &other.amps {
                amps.push(a * b);
            }
        }
        Ok(PureState { dim: self.dim, qudits: self.qudits + other.qudits, amps })
    }

    /// ⟨self|other⟩ = Σ conj(aᵢ)·bᵢ.
    pub fn inner(&self, other: &Self) -> Result<Complex64> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch(self.dim, other.dim));
        }
        if self.qudits != other.qudits {
            return Err(Error::ShapeMismatch(format!(
                "qudit count mismatch: {} vs {}",
                self.qudits, other.qudits
            )));
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// |⟨a|b⟩|² / (‖a‖²‖b‖²): 1 means identical up to global phase, 0 means
    /// orthogonal. Invariant under global phase and rescaling of either
    /// argument; zero-norm inputs are an error.
    pub fn fidelity(&self, other: &Self) -> Result<f64> {
        let na = self.norm_sqr();
        let nb = other.norm_sqr();
        if na < 1e-200 || nb < 1e-200 {
            return Err(Error::ZeroNorm);
        }
        let ov = self.inner(other)?;
        Ok(ov.norm_sqr() / (na * nb))
    }

    /// True iff fidelity(self, other) ≥ 1 − tol. Both states must be
    /// normalized; use [`PureState::fidelity`] directly for raw residuals.
    pub fn equal_up_to_global_phase(&self, other: &Self, tol: f64) -> Result<bool> {
        for s in [self, other] {
            if !s.is_normalized(1e-8) {
                return Err(Error::NotNormalized(s.norm_sqr()));
            }
        }
        Ok(self.fidelity(other)? >= 1.0 - tol)
    }

    /// Contracts `bra` against the named slots: the unnormalized residual on
    /// the remaining qudits (relative order kept) plus its squared norm,
    /// which is the probability of that measurement branch.
    pub fn project(&self, bra: &PureState, slots: &SlotSet) -> Result<(PureState, f64)> {
        if bra.dim != self.dim {
            return Err(Error::DimensionMismatch(self.dim, bra.dim));
        }
        if bra.qudits != slots.len() {
            return Err(Error::ShapeMismatch(format!(
                "bra covers {} qudits but {} slots were named",
                bra.qudits,
                slots.len()
            )));
        }
        slots.check_range(self.qudits)?;
        if slots.len() >= self.qudits {
            return Err(Error::ShapeMismatch(
                "projection must leave at least one qudit".into(),
            ));
        }
        let n = self.dim;
        let strides = strides(n, self.qudits);
        let remaining: Vec<usize> =
            (1..=self.qudits).filter(|i| !slots.contains(*i)).collect();

        let mut res = vec![Complex64::new(0.0, 0.0); n.pow(remaining.len() as u32)];
        for (idx, &a) in self.amps.iter().enumerate() {
            let mut sub = 0usize;
            for &s in slots.as_slice() {
                sub = sub * n + (idx / strides[s - 1]) % n;
            }
            let b = bra.amps[sub];
            if b == Complex64::new(0.0, 0.0) {
                continue;
            }
            let mut rem = 0usize;
            for &s in &remaining {
                rem = rem * n + (idx / strides[s - 1]) % n;
            }
            res[rem] += b.conj() * a;
        }
        let residual = PureState { dim: n, qudits: remaining.len(), amps: res };
        let probability = residual.norm_sqr();
        Ok((residual, probability))
    }
}

fn strides(dim: usize, qudits: usize) -> Vec<usize> {
    (1..=qudits).map(|i| dim.pow((qudits - i) as u32)).collect()
}

/// A unitary of the form "phase times permutation of basis labels":
/// U|r⟩ = ω^{phases[r]} |perm[r]⟩ with ω = e^{2πi/root_order}.
///
/// The permutation is a bijection, so the dense matrix is exactly unitary.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PhasePermOp {
    dim: usize,
    perm: Vec<usize>,
    phases: Vec<u32>,
    root_order: u32,
}

impl PhasePermOp {
    pub fn new(perm: Vec<usize>, phases: Vec<u32>, root_order: u32) -> Result<Self> {
        let dim = perm.len();
        if phases.len() != dim {
            return Err(Error::ShapeMismatch(format!(
                "perm has {} entries but phases has {}",
                dim,
                phases.len()
            )));
        }
        if root_order == 0 {
            return Err(Error::ShapeMismatch("root order must be positive".into()));
        }
        let mut seen = vec![false; dim];
        for &p in &perm {
            if p >= dim || seen[p] {
                return Err(Error::NonBijectivePerm(dim));
            }
            seen[p] = true;
        }
        for &t in &phases {
            if t >= root_order {
                return Err(Error::PhaseOutOfRange { exp: t, order: root_order });
            }
        }
        Ok(PhasePermOp { dim, perm, phases, root_order })
    }

    pub fn identity(dim: usize, root_order: u32) -> Self {
        PhasePermOp {
            dim,
            perm: (0..dim).collect(),
            phases: vec![0; dim],
            root_order,
        }
    }

    /// Generalized shift X on a single qudit: X|q⟩ = |[q+1]_N⟩.
    pub fn shift(dim: usize) -> Self {
        PhasePermOp {
            dim,
            perm: (0..dim).map(|q| (q + 1) % dim).collect(),
            phases: vec![0; dim],
            root_order: dim as u32,
        }
    }

    /// Generalized phase Z on a single qudit: Z|q⟩ = ω^q |q⟩.
    pub fn clock(dim: usize) -> Self {
        PhasePermOp {
            dim,
            perm: (0..dim).collect(),
            phases: (0..dim as u32).collect(),
            root_order: dim as u32,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn root_order(&self) -> u32 {
        self.root_order
    }

    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    pub fn phases(&self) -> &[u32] {
        &self.phases
    }

    /// self ∘ first: apply `first`, then `self`.
    pub fn compose(&self, first: &Self) -> Result<Self> {
        if self.dim != first.dim {
            return Err(Error::DimensionMismatch(self.dim, first.dim));
        }
        if self.root_order != first.root_order {
            return Err(Error::RootOrderMismatch(self.root_order, first.root_order));
        }
        let perm = (0..self.dim).map(|r| self.perm[first.perm[r]]).collect();
        let phases = (0..self.dim)
            .map(|r| (first.phases[r] + self.phases[first.perm[r]]) % self.root_order)
            .collect();
        PhasePermOp::new(perm, phases, self.root_order)
    }

    /// k-fold composition of self; k = 0 gives the identity.
    pub fn pow(&self, k: u32) -> Self {
        let mut out = PhasePermOp::identity(self.dim, self.root_order);
        for _ in 0..k {
            out = out.compose(self).expect("same shape by construction");
        }
        out
    }

    /// Kronecker product; `self` acts on the leading (most significant)
    /// factor.
    pub fn tensor(&self, other: &Self) -> Result<Self> {
        if self.root_order != other.root_order {
            return Err(Error::RootOrderMismatch(self.root_order, other.root_order));
        }
        let dim = self.dim * other.dim;
        let mut perm = Vec::with_capacity(dim);
        let mut phases = Vec::with_capacity(dim);
        for a in 0..self.dim {
            for b in 0..other.dim {
                perm.push(self.perm[a] * other.dim + other.perm[b]);
                phases.push((self.phases[a] + other.phases[b]) % self.root_order);
            }
        }
        PhasePermOp::new(perm, phases, self.root_order)
    }

    /// Dense row-major matrix, entry (row, col) at `row * dim + col`.
    pub fn dense(&self) -> Vec<Complex64> {
        let mut m = vec![Complex64::new(0.0, 0.0); self.dim * self.dim];
        for r in 0..self.dim {
            m[self.perm[r] * self.dim + r] = omega(self.root_order, i64::from(self.phases[r]));
        }
        m
    }

    /// Largest entrywise distance between the dense matrices of two ops.
    pub fn max_entry_diff(&self, other: &Self) -> Result<f64> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch(self.dim, other.dim));
        }
        let a = self.dense();
        let b = other.dense();
        Ok(a.iter()
            .zip(&b)
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max))
    }

    /// Applies the operator to the named slots of `state`, identity
    /// elsewhere. The operator dimension must equal N^(slot count).
    pub fn apply(&self, state: &PureState, slots: &SlotSet) -> Result<PureState> {
        slots.check_range(state.qudits)?;
        let n = state.dim;
        let expected = n.pow(slots.len() as u32);
        if self.dim != expected {
            return Err(Error::ShapeMismatch(format!(
                "operator dimension {} does not match {} slots of dimension {}",
                self.dim,
                slots.len(),
                n
            )));
        }
        let strides = strides(n, state.qudits);
        let mut out = vec![Complex64::new(0.0, 0.0); state.amps.len()];
        for (idx, &a) in state.amps.iter().enumerate() {
            if a == Complex64::new(0.0, 0.0) {
                continue;
            }
            let mut sub = 0usize;
            for &s in slots.as_slice() {
                sub = sub * n + (idx / strides[s - 1]) % n;
            }
            let target = self.perm[sub];
            // rebuild the full index with the slot digits replaced
            let mut new_idx = idx as i64;
            let mut t = target;
            for &s in slots.as_slice().iter().rev() {
                let old = (idx / strides[s - 1]) % n;
                let new = t % n;
                t /= n;
                new_idx += (new as i64 - old as i64) * strides[s - 1] as i64;
            }
            out[new_idx as usize] += omega(self.root_order, i64::from(self.phases[sub])) * a;
        }
        Ok(PureState { dim: n, qudits: state.qudits, amps: out })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn ket_places_unit_amplitude_big_endian() {
        let s = PureState::ket(3, &[0, 0]).unwrap();
        assert_eq!(s.amps().len(), 9);
        assert_eq!(s.amp(0), c(1.0, 0.0));

        let s = PureState::ket(3, &[2, 0]).unwrap();
        assert_eq!(s.amp(6), c(1.0, 0.0));
        assert_eq!(s.norm_sqr(), 1.0);

        let s = PureState::ket(3, &[1, 2, 0]).unwrap();
        assert_eq!(s.amp(15), c(1.0, 0.0));
    }

    #[test]
    fn ket_rejects_out_of_range_digit() {
        assert!(matches!(
            PureState::ket(3, &[3]),
            Err(Error::DigitOutOfRange { digit: 3, dim: 3 })
        ));
    }

    #[test]
    fn tensor_of_kets_is_joint_ket() {
        let a = PureState::ket(3, &[1]).unwrap();
        let b = PureState::ket(3, &[2]).unwrap();
        assert_eq!(a.tensor(&b).unwrap(), PureState::ket(3, &[1, 2]).unwrap());
    }

    #[test]
    fn tensor_rejects_dimension_mismatch() {
        let a = PureState::ket(3, &[0]).unwrap();
        let b = PureState::ket(2, &[0]).unwrap();
        assert!(matches!(a.tensor(&b), Err(Error::DimensionMismatch(3, 2))));
    }

    #[test]
    fn tensor_preserves_norm() {
        // |Ψ⟩ with α=(1,0,0) against a uniform 2-qudit state
        let psi = PureState::ket(3, &[0, 0]).unwrap();
        let u = 1.0 / 3.0f64.sqrt();
        let phi = PureState::new(
            3,
            2,
            (0..9).map(|i| if i % 4 == 0 { c(u, 0.0) } else { c(0.0, 0.0) }).collect(),
        )
        .unwrap();
        let t = psi.tensor(&phi).unwrap();
        assert!((t.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn inner_product_basics() {
        let a = PureState::ket(3, &[0]).unwrap();
        let b = PureState::ket(3, &[1]).unwrap();
        assert_eq!(a.inner(&b).unwrap(), c(0.0, 0.0));
        let psi = PureState::new(3, 1, vec![c(0.6, 0.0), c(0.0, 0.8), c(0.0, 0.0)]).unwrap();
        let ip = psi.inner(&psi).unwrap();
        assert!((ip.re - 1.0).abs() < 1e-12 && ip.im.abs() < 1e-15);
    }

    #[test]
    fn fidelity_is_global_phase_invariant() {
        let psi = PureState::new(3, 1, vec![c(0.6, 0.0), c(0.0, 0.8), c(0.0, 0.0)]).unwrap();
        assert!((psi.fidelity(&psi).unwrap() - 1.0).abs() < 1e-12);
        let rotated = psi.scaled(Complex64::from_polar(1.0, 1.234));
        assert!((psi.fidelity(&rotated).unwrap() - 1.0).abs() < 1e-12);
        assert!(psi.equal_up_to_global_phase(&rotated, 1e-10).unwrap());
        assert!(psi.equal_up_to_global_phase(&psi.scaled(c(-1.0, 0.0)), 1e-10).unwrap());
    }

    #[test]
    fn fidelity_of_distinct_kets_is_zero() {
        let a = PureState::ket(3, &[0]).unwrap();
        let b = PureState::ket(3, &[1]).unwrap();
        assert_eq!(a.fidelity(&b).unwrap(), 0.0);
        assert!(!a.equal_up_to_global_phase(&b, 1e-10).unwrap());
    }

    #[test]
    fn fidelity_of_uniform_vs_clock_diagonal_is_zero() {
        // ⟨Σ|kk⟩, Σ ω^k|kk⟩⟩ = Σ_k ω^k = 0
        let u = 1.0 / 3.0f64.sqrt();
        let mut a = vec![c(0.0, 0.0); 9];
        let mut b = vec![c(0.0, 0.0); 9];
        for k in 0..3 {
            a[k * 3 + k] = c(u, 0.0);
            b[k * 3 + k] = omega(3, k as i64) * u;
        }
        let a = PureState::new(3, 2, a).unwrap();
        let b = PureState::new(3, 2, b).unwrap();
        assert!(a.fidelity(&b).unwrap() < 1e-30);
    }

    #[test]
    fn fidelity_rejects_zero_norm() {
        let z = PureState::new(2, 1, vec![c(0.0, 0.0); 2]).unwrap();
        let a = PureState::ket(2, &[0]).unwrap();
        assert!(matches!(a.fidelity(&z), Err(Error::ZeroNorm)));
    }

    #[test]
    fn project_onto_matching_ket() {
        let s = PureState::ket(3, &[1, 2]).unwrap();
        let bra = PureState::ket(3, &[1]).unwrap();
        let (res, p) = s.project(&bra, &SlotSet::new(&[1]).unwrap()).unwrap();
        assert_eq!(res, PureState::ket(3, &[2]).unwrap());
        assert!((p - 1.0).abs() < 1e-12);
    }

    #[test]
    fn project_onto_orthogonal_ket_gives_zero() {
        let s = PureState::ket(3, &[1, 2]).unwrap();
        let bra = PureState::ket(3, &[0]).unwrap();
        let (res, p) = s.project(&bra, &SlotSet::new(&[1]).unwrap()).unwrap();
        assert_eq!(p, 0.0);
        assert!(res.amps().iter().all(|a| *a == c(0.0, 0.0)));
    }

    #[test]
    fn project_validates_slots() {
        let s = PureState::ket(3, &[1, 2]).unwrap();
        let bra = PureState::ket(3, &[1]).unwrap();
        assert!(matches!(
            s.project(&bra, &SlotSet::new(&[5]).unwrap()),
            Err(Error::SlotOutOfRange { slot: 5, qudits: 2 })
        ));
        assert!(matches!(SlotSet::new(&[1, 1]), Err(Error::DuplicateSlot(1))));
    }

    #[test]
    fn apply_shift_on_slot() {
        let s = PureState::ket(3, &[2, 0]).unwrap();
        let x = PhasePermOp::shift(3);
        let out = x.apply(&s, &SlotSet::new(&[1]).unwrap()).unwrap();
        assert_eq!(out, PureState::ket(3, &[0, 0]).unwrap());
    }

    #[test]
    fn apply_identity_is_noop() {
        let s = PureState::new(
            3,
            2,
            (0..9).map(|i| c(i as f64 / 10.0, -(i as f64) / 20.0)).collect(),
        )
        .unwrap();
        let id = PhasePermOp::identity(9, 3);
        let out = id.apply(&s, &SlotSet::new(&[1, 2]).unwrap()).unwrap();
        assert_eq!(out, s);
    }

    #[test]
    fn apply_rejects_shape_mismatch() {
        let s = PureState::ket(3, &[0, 0]).unwrap();
        let x = PhasePermOp::shift(3);
        assert!(x.apply(&s, &SlotSet::new(&[1, 2]).unwrap()).is_err());
    }

    #[test]
    fn clock_and_shift_and_composition() {
        let z = PhasePermOp::clock(3);
        let x = PhasePermOp::shift(3);
        // Z X |1⟩ = Z|2⟩ = ω²|2⟩
        let zx = z.compose(&x).unwrap();
        let s = PureState::ket(3, &[1]).unwrap();
        let out = zx.apply(&s, &SlotSet::new(&[1]).unwrap()).unwrap();
        let expect = PureState::ket(3, &[2]).unwrap().scaled(omega(3, 2));
        assert!(out.equal_up_to_global_phase(&expect, 1e-12).unwrap());
        assert!((out.amp(2) - omega(3, 2)).norm() < 1e-15);
        // X^3 = I
        assert_eq!(x.pow(3), PhasePermOp::identity(3, 3));
    }

    #[test]
    fn op_construction_rejects_bad_input() {
        assert!(matches!(
            PhasePermOp::new(vec![0, 0, 1], vec![0, 0, 0], 3),
            Err(Error::NonBijectivePerm(3))
        ));
        assert!(matches!(
            PhasePermOp::new(vec![0, 1, 2], vec![0, 3, 0], 3),
            Err(Error::PhaseOutOfRange { exp: 3, order: 3 })
        ));
    }

    #[test]
    fn dense_matrix_is_unitary() {
        let op = PhasePermOp::new(vec![2, 0, 1], vec![1, 0, 2], 3).unwrap();
        let m = op.dense();
        // U†U = I
        for i in 0..3 {
            for j in 0..3 {
                let mut acc = c(0.0, 0.0);
                for k in 0..3 {
                    acc += m[k * 3 + i].conj() * m[k * 3 + j];
                }
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((acc - c(want, 0.0)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn tensor_of_ops_acts_factorwise() {
        let x = PhasePermOp::shift(3);
        let z = PhasePermOp::clock(3);
        let op = z.tensor(&x).unwrap();
        let s = PureState::ket(3, &[1, 1]).unwrap();
        let out = op.apply(&s, &SlotSet::new(&[1, 2]).unwrap()).unwrap();
        // (Z⊗X)|11⟩ = ω|12⟩
        assert!((out.amp(3 + 2) - omega(3, 1)).norm() < 1e-15);
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;
        use rand::seq::SliceRandom;
        use rand::{Rng, SeedableRng};
        use rand_chacha::ChaCha8Rng;

        fn random_state(dim: usize, qudits: usize, rng: &mut ChaCha8Rng) -> PureState {
            let len = dim.pow(qudits as u32);
            loop {
                let amps: Vec<Complex64> = (0..len)
                    .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                    .collect();
                let s = PureState::new(dim, qudits, amps).unwrap();
                if s.norm_sqr() > 1e-6 {
                    return s;
                }
            }
        }

        fn random_op(dim: usize, root: u32, rng: &mut ChaCha8Rng) -> PhasePermOp {
            let mut perm: Vec<usize> = (0..dim).collect();
            perm.shuffle(rng);
            let phases = (0..dim).map(|_| rng.gen_range(0..root)).collect();
            PhasePermOp::new(perm, phases, root).unwrap()
        }

        proptest! {
            #[test]
            fn phase_perm_ops_preserve_norm(seed in any::<u64>()) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let s = random_state(3, 3, &mut rng);
                let op = random_op(9, 3, &mut rng);
                let out = op.apply(&s, &SlotSet::new(&[1, 3]).unwrap()).unwrap();
                prop_assert!((out.norm_sqr() - s.norm_sqr()).abs() < 1e-12);
            }

            #[test]
            fn fidelity_is_symmetric_and_bounded(seed in any::<u64>()) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let a = random_state(3, 2, &mut rng);
                let b = random_state(3, 2, &mut rng);
                let fab = a.fidelity(&b).unwrap();
                let fba = b.fidelity(&a).unwrap();
                prop_assert!((fab - fba).abs() < 1e-12);
                prop_assert!((-1e-12..=1.0 + 1e-12).contains(&fab));
            }

            #[test]
            fn projection_over_basis_is_complete(seed in any::<u64>()) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let s = random_state(3, 3, &mut rng);
                let slots = SlotSet::new(&[1, 3]).unwrap();
                let mut total = 0.0;
                for d1 in 0..3 {
                    for d2 in 0..3 {
                        let bra = PureState::ket(3, &[d1, d2]).unwrap();
                        total += s.project(&bra, &slots).unwrap().1;
                    }
                }
                prop_assert!((total - s.norm_sqr()).abs() < 1e-10);
            }

            #[test]
            fn random_op_dense_matrix_is_unitary(seed in any::<u64>()) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let op = random_op(9, 3, &mut rng);
                let m = op.dense();
                for i in 0..9 {
                    for j in 0..9 {
                        let mut acc = Complex64::new(0.0, 0.0);
                        for k in 0..9 {
                            acc += m[k * 9 + i].conj() * m[k * 9 + j];
                        }
                        let want = if i == j { 1.0 } else { 0.0 };
                        prop_assert!((acc - Complex64::new(want, 0.0)).norm() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn norm_preservation_over_100_random_states() {
        use rand::seq::SliceRandom;
        use rand::{Rng, SeedableRng};
        use rand_chacha::ChaCha8Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let amps: Vec<Complex64> = (0..27)
                .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect();
            let s = PureState::new(3, 3, amps).unwrap();
            let mut perm: Vec<usize> = (0..9).collect();
            perm.shuffle(&mut rng);
            let phases = (0..9).map(|_| rng.gen_range(0..3)).collect();
            let op = PhasePermOp::new(perm, phases, 3).unwrap();
            let out = op.apply(&s, &SlotSet::new(&[2, 3]).unwrap()).unwrap();
            assert!((out.norm_sqr() - s.norm_sqr()).abs() < 1e-12);
        }
    }

    #[test]
    fn tensor_project_round_trip_on_kets() {
        let a = PureState::ket(3, &[1, 0]).unwrap();
        let b = PureState::ket(3, &[2]).unwrap();
        let t = a.tensor(&b).unwrap();
        let (res, p) = t.project(&a, &SlotSet::new(&[1, 2]).unwrap()).unwrap();
        assert_eq!(res, b);
        assert!((p - 1.0).abs() < 1e-12);
    }
}
