//! Everything the teleportation protocol names: ME-basis conventions, the
//! input state, the control-change gate, the rotated measurement basis, the
//! two rival predicted expansion/collapse coefficient families, the four
//! correction rulesets, and the full measurement-and-correction chain.
//!
//! Qudit labels follow the protocol: 1-2 hold the input pair, 3-4 the shared
//! ME pair, 5 the receiver's ancilla. All functions are pure.

use num_complex::Complex64;

use crate::linalg::{omega, PhasePermOp, PureState, SlotSet};
use crate::{Error, Result};

/// Partner-label rule q ↦ pairing(q, n) defining which second label each
/// summand of |Φ_mn⟩ carries.
#[derive(Clone, Copy, Debug)]
pub enum PairingRule {
    /// q ↦ [q+n]_N
    Add,
    /// q ↦ [q−n]_N
    Sub,
    /// q ↦ [N−1−q−n]_N
    Complement,
    /// q ↦ [n−q]_N
    Reflect,
    /// Arbitrary rule; lets tests probe malformed conventions.
    Custom(fn(q: usize, n: usize, modulus: usize) -> usize),
}

impl PairingRule {
    pub fn partner(&self, q: usize, n: usize, modulus: usize) -> usize {
        let m = modulus as i64;
        let (q, n) = (q as i64, n as i64);
        let p = match self {
            PairingRule::Add => (q + n).rem_euclid(m),
            PairingRule::Sub => (q - n).rem_euclid(m),
            PairingRule::Complement => (m - 1 - q - n).rem_euclid(m),
            PairingRule::Reflect => (n - q).rem_euclid(m),
            PairingRule::Custom(f) => return f(q as usize, n as usize, modulus),
        };
        p as usize
    }
}

/// Phase exponent rule (q, n, m) ↦ exponent of ω attached to the summand.
#[derive(Clone, Copy, Debug)]
pub enum PhaseRule {
    /// q·m — the rule every named convention uses.
    QTimesM,
    Custom(fn(q: usize, n: usize, m: usize, modulus: usize) -> usize),
}

impl PhaseRule {
    pub fn exponent(&self, q: usize, n: usize, m: usize, modulus: usize) -> usize {
        match self {
            PhaseRule::QTimesM => (q * m) % modulus,
            PhaseRule::Custom(f) => f(q, n, m, modulus) % modulus,
        }
    }
}

/// A concrete definition of the N² maximally entangled basis states
/// |Φ_mn⟩ = (1/√N) Σ_q ω^{phase(q,n,m)} |q, pairing(q,n)⟩, with the two ket
/// labels swapped when `phase_on_first` is false (the summation variable q —
/// the label the phase winds with — then sits in the second slot).
#[derive(Clone, Debug)]
pub struct MEBasisConvention {
    name: String,
    pairing: PairingRule,
    phase: PhaseRule,
    phase_on_first: bool,
}

impl MEBasisConvention {
    pub fn new(name: &str, pairing: PairingRule, phase: PhaseRule, phase_on_first: bool) -> Self {
        MEBasisConvention { name: name.to_string(), pairing, phase, phase_on_first }
    }

    /// The textbook generalized Bell basis: partner [q+n], phase ω^{qm} on
    /// the first label.
    pub fn std() -> Self {
        Self::new("STD", PairingRule::Add, PhaseRule::QTimesM, true)
    }

    /// The redefined basis |Φ_mn⟩ = (1/√N) Σ_q ω^{qm} |q, [N−1−q−n]⟩ under
    /// which the original formulas and correction table stay valid.
    pub fn m2() -> Self {
        Self::new("M2", PairingRule::Complement, PhaseRule::QTimesM, true)
    }

    /// The eight-member search family: each pairing rule with the phase
    /// attached to either ket label. Contains [`MEBasisConvention::std`] and
    /// [`MEBasisConvention::m2`] under their own names.
    pub fn candidate_family() -> Vec<Self> {
        let pairings = [
            ("ADD", PairingRule::Add),
            ("SUB", PairingRule::Sub),
            ("COMP", PairingRule::Complement),
            ("REFL", PairingRule::Reflect),
        ];
        let mut out = Vec::new();
        for (pname, pairing) in pairings {
            for (sname, first) in [("FIRST", true), ("SECOND", false)] {
                let name = match (pairing, first) {
                    (PairingRule::Add, true) => "STD".to_string(),
                    (PairingRule::Complement, true) => "M2".to_string(),
                    _ => format!("{pname}_{sname}"),
                };
                out.push(Self::new(&name, pairing, PhaseRule::QTimesM, first));
            }
        }
        out
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn renamed(&self, name: &str) -> Self {
        let mut c = self.clone();
        c.name = name.to_string();
        c
    }

    fn check_bijective(&self, dim: usize, n: usize) -> Result<()> {
        let mut seen = vec![false; dim];
        for q in 0..dim {
            let p = self.pairing.partner(q, n, dim);
            if p >= dim || seen[p] {
                return Err(Error::NonBijectivePairing { dim, n });
            }
            seen[p] = true;
        }
        Ok(())
    }

    /// The normalized two-qudit ME state |Φ_mn⟩ for this convention.
    pub fn me_state(&self, dim: usize, m: usize, n: usize) -> Result<PureState> {
        if dim < 2 {
            return Err(Error::BadDimension(dim));
        }
        for (label, v) in [("m", m), ("n", n)] {
            if v >= dim {
                let _ = label;
                return Err(Error::IndexOutOfRange { index: v, dim });
            }
        }
        self.check_bijective(dim, n)?;
        let scale = 1.0 / (dim as f64).sqrt();
        let mut amps = vec![Complex64::new(0.0, 0.0); dim * dim];
        for q in 0..dim {
            let p = self.pairing.partner(q, n, dim);
            let e = self.phase.exponent(q, n, m, dim) as i64;
            let idx = if self.phase_on_first { q * dim + p } else { p * dim + q };
            amps[idx] += omega(dim as u32, e) * scale;
        }
        PureState::new(dim, 2, amps)
    }
}

/// The unknown coefficients α_k of the input pair Σ_k α_k |k,k⟩; normalized
/// at construction.
#[derive(Clone, Debug, PartialEq)]
pub struct InputCoefficients {
    dim: usize,
    alpha: Vec<Complex64>,
}

impl InputCoefficients {
    pub fn new(alpha: Vec<Complex64>) -> Result<Self> {
        let dim = alpha.len();
        if dim < 2 {
            return Err(Error::BadDimension(dim));
        }
        if let Some(i) = alpha.iter().position(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(Error::NonFiniteAmplitude(i));
        }
        let n2: f64 = alpha.iter().map(|a| a.norm_sqr()).sum();
        if (n2 - 1.0).abs() > 1e-10 {
            return Err(Error::NotNormalized(n2));
        }
        Ok(InputCoefficients { dim, alpha })
    }

    /// α_k = 1/√N for every k.
    pub fn uniform(dim: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::BadDimension(dim));
        }
        let u = Complex64::new(1.0 / (dim as f64).sqrt(), 0.0);
        Ok(InputCoefficients { dim, alpha: vec![u; dim] })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn alpha(&self) -> &[Complex64] {
        &self.alpha
    }

    /// The input pair Σ_k α_k |k,k⟩ on qudits 1-2; also the target the
    /// receiver must reconstruct on 4-5.
    pub fn input_state(&self) -> PureState {
        let mut amps = vec![Complex64::new(0.0, 0.0); self.dim * self.dim];
        for (k, a) in self.alpha.iter().enumerate() {
            amps[k * self.dim + k] = *a;
        }
        PureState::new(self.dim, 2, amps).expect("normalized by construction")
    }
}

/// A full classical measurement record: `l` from the rotated-basis
/// measurement of qudit 2, `(m, n)` from the joint ME measurement of 1-3.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Outcome {
    pub l: usize,
    pub m: usize,
    pub n: usize,
}

impl Outcome {
    pub fn new(l: usize, m: usize, n: usize) -> Self {
        Outcome { l, m, n }
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        for v in [self.l, self.m, self.n] {
            if v >= dim {
                return Err(Error::IndexOutOfRange { index: v, dim });
            }
        }
        Ok(())
    }

    /// All N³ outcomes in lexicographic (l, m, n) order.
    pub fn all(dim: usize) -> impl Iterator<Item = Outcome> {
        (0..dim).flat_map(move |l| {
            (0..dim).flat_map(move |m| (0..dim).map(move |n| Outcome { l, m, n }))
        })
    }
}

impl std::fmt::Display for Outcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} {} {}", self.l, self.m, self.n)
    }
}

/// Which published coefficient family a prediction follows: the corrected
/// one (`Ours`) or the original one (`BaAn`).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FormulaSet {
    Ours,
    BaAn,
}

impl FormulaSet {
    pub fn name(&self) -> &'static str {
        match self {
            FormulaSet::Ours => "OURS",
            FormulaSet::BaAn => "BAAN",
        }
    }
}

/// The four named outcome → correction-unitary maps. Formula rulesets are
/// the phase-and-shift family U(j, n) with j = [l−m]_N (`OursFormula`) or
/// j = [l+m]_N (`BaAnFormula`) at any dimension; table rulesets are the two
/// printed 27-row qutrit columns, kept as literal data.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CorrectionRuleset {
    OursFormula,
    BaAnFormula,
    OursTable,
    BaAnTable,
}

impl CorrectionRuleset {
    pub fn name(&self) -> &'static str {
        match self {
            CorrectionRuleset::OursFormula => "OURS_FORMULA",
            CorrectionRuleset::BaAnFormula => "BAAN_FORMULA",
            CorrectionRuleset::OursTable => "OURS_TABLE",
            CorrectionRuleset::BaAnTable => "BAAN_TABLE",
        }
    }

    pub fn all() -> [CorrectionRuleset; 4] {
        [
            CorrectionRuleset::OursFormula,
            CorrectionRuleset::BaAnFormula,
            CorrectionRuleset::OursTable,
            CorrectionRuleset::BaAnTable,
        ]
    }

    /// The formula family this ruleset instantiates.
    pub fn formula(&self) -> FormulaSet {
        match self {
            CorrectionRuleset::OursFormula | CorrectionRuleset::OursTable => FormulaSet::Ours,
            CorrectionRuleset::BaAnFormula | CorrectionRuleset::BaAnTable => FormulaSet::BaAn,
        }
    }

    /// The (j, n) index pair this ruleset assigns to an outcome.
    pub fn indices(&self, dim: usize, o: Outcome) -> (usize, usize) {
        let j = match self.formula() {
            FormulaSet::Ours => (o.l + dim - o.m) % dim,
            FormulaSet::BaAn => (o.l + o.m) % dim,
        };
        (j, o.n)
    }
}

/// Outcome of one simulated protocol branch.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProtocolRun {
    pub outcome: Outcome,
    pub probability: f64,
    pub fidelity_after_correction: f64,
    /// Set when the branch has (numerically) zero probability; the fidelity
    /// is then reported as 0 and carries no meaning.
    pub zero_probability: bool,
}

/// Squared norms below this count as a vanished measurement branch.
const ZERO_PROB_EPS: f64 = 1e-15;

/// 4-qudit state of the 1-2-3-4 system before any measurement: the input
/// pair on 1-2 tensored with this convention's |Φ_00⟩ on 3-4.
pub fn total_state(c: &InputCoefficients, conv: &MEBasisConvention) -> Result<PureState> {
    let pair = conv.me_state(c.dim(), 0, 0)?;
    c.input_state().tensor(&pair)
}

/// The predicted (normalized) 2-4 residual after the ME measurement finds
/// (m, n): amplitude α_k ω^{([n+k]_N+1)·m} (`Ours`) or α_k ω^{−k·m} (`BaAn`)
/// on |k, [k+n]_N⟩.
pub fn predicted_residual(
    f: FormulaSet,
    c: &InputCoefficients,
    m: usize,
    n: usize,
) -> Result<PureState> {
    let dim = c.dim();
    for v in [m, n] {
        if v >= dim {
            return Err(Error::IndexOutOfRange { index: v, dim });
        }
    }
    let mut amps = vec![Complex64::new(0.0, 0.0); dim * dim];
    for (k, a) in c.alpha().iter().enumerate() {
        let e = match f {
            FormulaSet::Ours => ((((n + k) % dim) + 1) * m) as i64,
            FormulaSet::BaAn => -((k * m) as i64),
        };
        amps[k * dim + (k + n) % dim] = a * omega(dim as u32, e);
    }
    PureState::new(dim, 2, amps)
}

/// The predicted (normalized) 4-5 state after both measurements: amplitude
/// α_k ω^{−k(l−m)} (`Ours`) or α_k ω^{−k(l+m)} (`BaAn`) on |[k+n], [k+n]⟩.
pub fn predicted_collapsed(f: FormulaSet, c: &InputCoefficients, o: Outcome) -> Result<PureState> {
    let dim = c.dim();
    o.validate(dim)?;
    let mut amps = vec![Complex64::new(0.0, 0.0); dim * dim];
    for (k, a) in c.alpha().iter().enumerate() {
        let e = match f {
            FormulaSet::Ours => -((k as i64) * (o.l as i64 - o.m as i64)),
            FormulaSet::BaAn => -((k * (o.l + o.m)) as i64),
        };
        let kk = (k + o.n) % dim;
        amps[kk * dim + kk] = a * omega(dim as u32, e);
    }
    PureState::new(dim, 2, amps)
}

/// The control-change gate C: |x, y⟩ ↦ |x, [x+y]_N⟩, the qudit analogue of
/// CNOT the receiver uses to copy his ME-pair label onto the ancilla.
pub fn control_change_gate(dim: usize) -> PhasePermOp {
    let mut perm = Vec::with_capacity(dim * dim);
    for x in 0..dim {
        for y in 0..dim {
            perm.push(x * dim + (x + y) % dim);
        }
    }
    PhasePermOp::new(perm, vec![0; dim * dim], dim as u32).expect("bijection by construction")
}

/// Fourier (rotated) basis ket |l̃⟩ = (1/√N) Σ_k ω^{k·l} |k⟩.
pub fn rotated_ket(dim: usize, l: usize) -> Result<PureState> {
    if dim < 2 {
        return Err(Error::BadDimension(dim));
    }
    if l >= dim {
        return Err(Error::IndexOutOfRange { index: l, dim });
    }
    let scale = 1.0 / (dim as f64).sqrt();
    let amps = (0..dim)
        .map(|k| omega(dim as u32, (k * l) as i64) * scale)
        .collect();
    PureState::new(dim, 1, amps)
}

/// The phase-and-shift correction family on the full two-qudit space:
/// U(j, n) = (Z^j X^{N−n}) ⊗ X^{N−n}, which sends |[k+n], [k+n]⟩ to
/// ω^{k·j} |k, k⟩ and so restricts on the diagonal subspace to
/// Σ_q ω^{q·j} |q,q⟩⟨[q+n],[q+n]|.
pub fn correction_unitary(dim: usize, j: usize, n: usize) -> PhasePermOp {
    let back_shift = PhasePermOp::shift(dim).pow((dim - n % dim) as u32 % dim as u32);
    let a = PhasePermOp::clock(dim)
        .pow((j % dim) as u32)
        .compose(&back_shift)
        .expect("same shape");
    a.tensor(&back_shift).expect("same root order")
}

/// Builds the full-space operator from per-row diagonal data
/// (U = Σ_r ω^{t_r} |p_r,p_r⟩⟨r,r| on the diagonal subspace): A ⊗ B with
/// A|r⟩ = ω^{t_r}|p_r⟩ and B|r⟩ = |p_r⟩.
pub fn op_from_diagonal_rows(dim: usize, perm: &[usize], phases: &[u32]) -> Result<PhasePermOp> {
    let a = PhasePermOp::new(perm.to_vec(), phases.to_vec(), dim as u32)?;
    let b = PhasePermOp::new(perm.to_vec(), vec![0; dim], dim as u32)?;
    a.tensor(&b)
}

/// Reads the diagonal-subspace action of a two-qudit operator back out as
/// (perm, phases) rows; errors if any |r,r⟩ maps off the diagonal.
pub fn diagonal_rows(op: &PhasePermOp, dim: usize) -> Result<(Vec<usize>, Vec<u32>)> {
    if op.dim() != dim * dim {
        return Err(Error::DimensionMismatch(op.dim(), dim * dim));
    }
    let mut perm = Vec::with_capacity(dim);
    let mut phases = Vec::with_capacity(dim);
    for r in 0..dim {
        let i = r * dim + r;
        let t = op.perm()[i];
        let (a, b) = (t / dim, t % dim);
        if a != b {
            return Err(Error::NotDiagonalPreserving(r));
        }
        perm.push(a);
        phases.push(op.phases()[i]);
    }
    Ok((perm, phases))
}

/// One printed correction-table row: outcome (l, m, n) with the operator's
/// diagonal data.
pub type TableRowData = (usize, usize, usize, [usize; 3], [u32; 3]);

/// The corrected qutrit correction column, one row per outcome in
/// lexicographic (l, m, n) order. Rows are literal data (transcribed, not
/// generated); their agreement with the U(j=[l−m], n) formula is a test.
pub const CORRECTION_TABLE_OURS: [TableRowData; 27] = [
    (0, 0, 0, [0, 1, 2], [0, 0, 0]),
    (0, 0, 1, [2, 0, 1], [0, 0, 0]),
    (0, 0, 2, [1, 2, 0], [0, 0, 0]),
    (0, 1, 0, [0, 1, 2], [0, 2, 1]),
    (0, 1, 1, [2, 0, 1], [1, 0, 2]),
    (0, 1, 2, [1, 2, 0], [2, 1, 0]),
    (0, 2, 0, [0, 1, 2], [0, 1, 2]),
    (0, 2, 1, [2, 0, 1], [2, 0, 1]),
    (0, 2, 2, [1, 2, 0], [1, 2, 0]),
    (1, 0, 0, [0, 1, 2], [0, 1, 2]),
    (1, 0, 1, [2, 0, 1], [2, 0, 1]),
    (1, 0, 2, [1, 2, 0], [1, 2, 0]),
    (1, 1, 0, [0, 1, 2], [0, 0, 0]),
    (1, 1, 1, [2, 0, 1], [0, 0, 0]),
    (1, 1, 2, [1, 2, 0], [0, 0, 0]),
    (1, 2, 0, [0, 1, 2], [0, 2, 1]),
    (1, 2, 1, [2, 0, 1], [1, 0, 2]),
    (1, 2, 2, [1, 2, 0], [2, 1, 0]),
    (2, 0, 0, [0, 1, 2], [0, 2, 1]),
    (2, 0, 1, [2, 0, 1], [1, 0, 2]),
    (2, 0, 2, [1, 2, 0], [2, 1, 0]),
    (2, 1, 0, [0, 1, 2], [0, 1, 2]),
    (2, 1, 1, [2, 0, 1], [2, 0, 1]),
    (2, 1, 2, [1, 2, 0], [1, 2, 0]),
    (2, 2, 0, [0, 1, 2], [0, 0, 0]),
    (2, 2, 1, [2, 0, 1], [0, 0, 0]),
    (2, 2, 2, [1, 2, 0], [0, 0, 0]),
];

/// The original qutrit correction column, same layout; agrees with the
/// U(j=[l+m], n) formula.
pub const CORRECTION_TABLE_BAAN: [TableRowData; 27] = [
    (0, 0, 0, [0, 1, 2], [0, 0, 0]),
    (0, 0, 1, [2, 0, 1], [0, 0, 0]),
    (0, 0, 2, [1, 2, 0], [0, 0, 0]),
    (0, 1, 0, [0, 1, 2], [0, 1, 2]),
    (0, 1, 1, [2, 0, 1], [2, 0, 1]),
    (0, 1, 2, [1, 2, 0], [1, 2, 0]),
    (0, 2, 0, [0, 1, 2], [0, 2, 1]),
    (0, 2, 1, [2, 0, 1], [1, 0, 2]),
    (0, 2, 2, [1, 2, 0], [2, 1, 0]),
    (1, 0, 0, [0, 1, 2], [0, 1, 2]),
    (1, 0, 1, [2, 0, 1], [2, 0, 1]),
    (1, 0, 2, [1, 2, 0], [1, 2, 0]),
    (1, 1, 0, [0, 1, 2], [0, 2, 1]),
    (1, 1, 1, [2, 0, 1], [1, 0, 2]),
    (1, 1, 2, [1, 2, 0], [2, 1, 0]),
    (1, 2, 0, [0, 1, 2], [0, 0, 0]),
    (1, 2, 1, [2, 0, 1], [0, 0, 0]),
    (1, 2, 2, [1, 2, 0], [0, 0, 0]),
    (2, 0, 0, [0, 1, 2], [0, 2, 1]),
    (2, 0, 1, [2, 0, 1], [1, 0, 2]),
    (2, 0, 2, [1, 2, 0], [2, 1, 0]),
    (2, 1, 0, [0, 1, 2], [0, 0, 0]),
    (2, 1, 1, [2, 0, 1], [0, 0, 0]),
    (2, 1, 2, [1, 2, 0], [0, 0, 0]),
    (2, 2, 0, [0, 1, 2], [0, 1, 2]),
    (2, 2, 1, [2, 0, 1], [2, 0, 1]),
    (2, 2, 2, [1, 2, 0], [1, 2, 0]),
];

pub(crate) fn table_data(rs: CorrectionRuleset) -> Option<&'static [TableRowData; 27]> {
    match rs {
        CorrectionRuleset::OursTable => Some(&CORRECTION_TABLE_OURS),
        CorrectionRuleset::BaAnTable => Some(&CORRECTION_TABLE_BAAN),
        _ => None,
    }
}

/// The N²-dimensional correction operator this ruleset prescribes for an
/// outcome. Table rulesets exist only at dimension 3.
pub fn correction(rs: CorrectionRuleset, dim: usize, o: Outcome) -> Result<PhasePermOp> {
    if dim < 2 {
        return Err(Error::BadDimension(dim));
    }
    o.validate(dim)?;
    match table_data(rs) {
        None => {
            let (j, n) = rs.indices(dim, o);
            Ok(correction_unitary(dim, j, n))
        }
        Some(table) => {
            if dim != 3 {
                return Err(Error::TableDimension(rs.name().to_string(), dim));
            }
            let idx = o.l * 9 + o.m * 3 + o.n;
            let (l, m, n, perm, phases) = table[idx];
            debug_assert_eq!((l, m, n), (o.l, o.m, o.n));
            op_from_diagonal_rows(3, &perm, &phases)
        }
    }
}

/// Simulates one branch of the protocol by explicit linear algebra:
/// build the 1-2-3-4 state, project 1-3 onto |Φ_mn⟩, adjoin the ancilla,
/// apply the control-change gate to 4-5, project qudit 2 onto |l̃⟩, apply
/// the ruleset's correction to 4-5, and score fidelity against Σ α_k |k,k⟩.
pub fn run_protocol(
    c: &InputCoefficients,
    conv: &MEBasisConvention,
    rs: CorrectionRuleset,
    o: Outcome,
) -> Result<ProtocolRun> {
    let dim = c.dim();
    o.validate(dim)?;

    let total = total_state(c, conv)?;
    let me = conv.me_state(dim, o.m, o.n)?;
    // qudits (1,2,3,4): measuring 1-3 leaves (2,4)
    let (residual, _) = total.project(&me, &SlotSet::new(&[1, 3])?)?;

    // adjoin |0⟩ ancilla: positions are now (2,4,5)
    let with_ancilla = residual.tensor(&PureState::ket(dim, &[0])?)?;
    let after_gate = control_change_gate(dim).apply(&with_ancilla, &SlotSet::new(&[2, 3])?)?;

    // measure qudit 2 (position 1) in the rotated basis; (4,5) remain
    let (collapsed, probability) =
        after_gate.project(&rotated_ket(dim, o.l)?, &SlotSet::new(&[1])?)?;

    if probability < ZERO_PROB_EPS {
        return Ok(ProtocolRun {
            outcome: o,
            probability,
            fidelity_after_correction: 0.0,
            zero_probability: true,
        });
    }

    let corrected = correction(rs, dim, o)?.apply(&collapsed.normalized()?, &SlotSet::new(&[1, 2])?)?;
    let fidelity = corrected.fidelity(&c.input_state())?;
    Ok(ProtocolRun {
        outcome: o,
        probability,
        fidelity_after_correction: fidelity,
        zero_probability: false,
    })
}

/// The normalized 4-5 state the chain actually produces for an outcome,
/// with its joint probability — the collapse before any correction.
pub fn collapsed_state(
    c: &InputCoefficients,
    conv: &MEBasisConvention,
    o: Outcome,
) -> Result<(PureState, f64)> {
    let dim = c.dim();
    o.validate(dim)?;
    let total = total_state(c, conv)?;
    let me = conv.me_state(dim, o.m, o.n)?;
    let (residual, _) = total.project(&me, &SlotSet::new(&[1, 3])?)?;
    let with_ancilla = residual.tensor(&PureState::ket(dim, &[0])?)?;
    let after_gate = control_change_gate(dim).apply(&with_ancilla, &SlotSet::new(&[2, 3])?)?;
    let (collapsed, probability) =
        after_gate.project(&rotated_ket(dim, o.l)?, &SlotSet::new(&[1])?)?;
    Ok((collapsed.normalized()?, probability))
}
