//! The subspace-hypercyclicity criterion engine.
//!
//! Given a witness bundle (T, A, a subspace M, a power sequence (m_k), and
//! a geometric decay certificate for A), this module
//!
//! 1. checks the four hypothesis conditions on sample vectors: decay of
//!    A^{m_k} on ker*(T) ∩ M, membership of the iterates, difference
//!    closure of (m_k), and T∘A = I;
//! 2. greedily selects a subsequence (m_{j_k}) so that, writing x_k for the
//!    k-th vector of a dense prefix, ‖A^{m_{j_k}} x_k‖ < 2^{-k},
//!    T^{m_{j_k}} x_k = 0, every later member keeps ‖A^m x_{k+1}‖ below
//!    2^{-(k+1)}, and m_{j_{k+1}} ≥ 2·m_{j_k};
//! 3. builds the truncated vector x := Σ_{k≤K} A^{m_{j_k}} x_k with the
//!    analytic tail bound 2^{-K} (the discarded terms have norms < 2^{-i},
//!    i > K);
//! 4. verifies the resulting certificate by recomputing T-powers directly,
//!    independently of the left-inverse identity used to build it: the
//!    decomposition T^{m_{j_k}} x = (vanishing sum) + x_k + (small tail)
//!    becomes the exact inequality ‖T^{m_{j_k}} x − x_k‖ + 2^{-K} < 2^{-k}.
//!
//! The truncation costs margin: the analytic tail estimate Σ_{i>k} 2^{-i} =
//! 2^{-k} is tight, so the strict inequality is asserted only for
//! k ≤ K − 2 and reported informationally for k ∈ {K−1, K}.
//!
//! A separate checker covers the older kernel criterion (decay over all
//! powers plus T∘A = I), whose subspace conclusion additionally needs
//! ker*(T) ⊆ M and M-invariance of T; the report distinguishes "applicable"
//! from "subspace prerequisites fail but the direct criterion may still
//! apply", which is exactly the situation the 2B example lives in.

use serde::{Deserialize, Serialize};

use crate::construction::{check_invariance, InvarianceReport};
use crate::dyadic::DyadicScalar;
use crate::operator::{is_left_inverse_on, LeftInverseReport, OperatorExpr};
use crate::subspace::SubspaceSpec;
use crate::vector::{vec_axpy, CertifiedVector, SparseVector};

/// The affine power sequence m_k = step·k + offset, k ≥ 1.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "PowerSequenceRepr")]
pub struct PowerSequence {
    pub step: u64,
    pub offset: u64,
}

#[derive(Deserialize)]
struct PowerSequenceRepr {
    step: u64,
    offset: u64,
}

impl TryFrom<PowerSequenceRepr> for PowerSequence {
    type Error = CriterionError;
    fn try_from(r: PowerSequenceRepr) -> Result<Self, CriterionError> {
        PowerSequence::new(r.step, r.offset)
    }
}

impl PowerSequence {
    pub fn new(step: u64, offset: u64) -> Result<Self, CriterionError> {
        if step == 0 {
            return Err(CriterionError::BadSequence);
        }
        Ok(PowerSequence { step, offset })
    }

    /// The i-th member, i ≥ 1.
    pub fn member(&self, i: u64) -> u64 {
        debug_assert!(i >= 1);
        self.step * i + self.offset
    }

    pub fn first(&self) -> u64 {
        self.member(1)
    }

    /// The index i with member(i) = m, if m is a member.
    pub fn index_of(&self, m: u64) -> Option<u64> {
        if m < self.first() || (m - self.offset) % self.step != 0 {
            return None;
        }
        Some((m - self.offset) / self.step)
    }

    pub fn least_member_at_least(&self, x: u64) -> u64 {
        if x <= self.first() {
            return self.first();
        }
        let i = (x - self.offset).div_ceil(self.step);
        // Saturating keeps degenerate thresholds (from corrupt certificates)
        // from overflowing; legitimate picks never get near the cap.
        self.step.saturating_mul(i).saturating_add(self.offset)
    }

    /// Differences m_j − m_i (j > i) are again members exactly when the
    /// offset vanishes: m_j − m_i = step·(j − i) = m_{j−i}.
    pub fn is_difference_closed(&self) -> bool {
        self.offset == 0
    }
}

/// Closed-form decay of A-powers: ‖A^m x‖ = 2^(rate_exp·m)·‖x‖ for every
/// finitely supported x. The certificate is never trusted blindly: each
/// consumer recomputes exact norms for the powers it actually consults and
/// fails loudly on any mismatch.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
#[serde(try_from = "DecayCertificateRepr")]
pub enum DecayCertificate {
    ExactGeometric { rate_exp: i64 },
}

#[derive(Deserialize)]
#[serde(rename_all = "snake_case")]
enum DecayCertificateRepr {
    ExactGeometric { rate_exp: i64 },
}

impl TryFrom<DecayCertificateRepr> for DecayCertificate {
    type Error = CriterionError;
    fn try_from(r: DecayCertificateRepr) -> Result<Self, CriterionError> {
        let DecayCertificateRepr::ExactGeometric { rate_exp } = r;
        if rate_exp >= 0 {
            return Err(CriterionError::BadDecayRate { rate_exp });
        }
        Ok(DecayCertificate::ExactGeometric { rate_exp })
    }
}

impl DecayCertificate {
    pub fn exact_geometric(rate_exp: i64) -> Result<Self, CriterionError> {
        DecayCertificateRepr::ExactGeometric { rate_exp }.try_into()
    }

    pub fn rate_exp(&self) -> i64 {
        let DecayCertificate::ExactGeometric { rate_exp } = self;
        *rate_exp
    }

    /// The predicted ‖A^m x‖ given ‖x‖.
    pub fn predicted(&self, base_norm: &DyadicScalar, m: u64) -> DyadicScalar {
        let total = self.rate_exp() as i128 * m as i128;
        base_norm.shift2(i64::try_from(total).expect("power out of range"))
    }

    /// Least integer m ≥ 0 with predicted norm < 2^(−k).
    fn least_killing_power(&self, base_norm: &DyadicScalar, k: i64) -> u64 {
        if base_norm.is_zero() {
            return 0;
        }
        // base = p·2^(−e), p ≥ 1: p·2^(−e + r·m) < 2^(−k) ⟺
        // bits(p) ≤ e − k − r·m ⟺ m ≥ (bits(p) + k − e) / |r|.
        let bits = base_norm.numer().bits() as i128;
        let need = bits + k as i128 - base_norm.exp() as i128;
        if need <= 0 {
            return 0;
        }
        let r = self.rate_exp().unsigned_abs() as i128;
        ((need + r - 1) / r) as u64
    }
}

/// The hypothesis bundle of the criterion.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CriterionWitness {
    pub t: OperatorExpr,
    pub a: OperatorExpr,
    pub subspace: SubspaceSpec,
    pub seq: PowerSequence,
    pub decay: DecayCertificate,
    pub kernel_budget: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CriterionError {
    #[error("power sequence needs step ≥ 1")]
    BadSequence,
    #[error("decay certificate needs a negative rate, got {rate_exp}")]
    BadDecayRate { rate_exp: i64 },
    #[error("need at least {needed} dense-prefix vectors, got {got}")]
    PrefixTooShort { needed: usize, got: usize },
    #[error("K must be at least 1")]
    ZeroK,
    #[error("sample {sample_index} is outside the subspace at support index {bad_index}")]
    SampleNotMember { sample_index: usize, bad_index: u64 },
    #[error("sample {sample_index} is not annihilated by any power ≤ {budget} of t")]
    SampleNotInKernel { sample_index: usize, budget: u64 },
    #[error("decay certificate mismatch on sample {sample_index} at power {power}: predicted {predicted}, exact {actual}")]
    DecayMismatch {
        sample_index: usize,
        power: u64,
        predicted: DyadicScalar,
        actual: DyadicScalar,
    },
    #[error("selection for k = {k} needs a member above the scan limit {limit}")]
    ScanLimit { k: u64, limit: u64 },
    #[error("selection picks are empty or inconsistent with the dense prefix")]
    BadSelection,
}

/// The four lower bounds whose maximum determines a pick. `decay_self` is
/// the least integer power taking x_k below 2^{-k}; `decay_next` is the
/// bound induced on m_{j_k} by the lookahead (the least power taking
/// x_{k+1} below 2^{-(k+1)}, minus one member step); `kernel_p` is the
/// kernel index of x_k; `doubling` is 2·m_{j_{k−1}} (absent at k = 1).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Thresholds {
    pub decay_self: u64,
    pub decay_next: u64,
    pub kernel_p: u64,
    pub doubling: Option<u64>,
}

impl Thresholds {
    fn lower_bound(&self) -> u64 {
        self.decay_self
            .max(self.decay_next)
            .max(self.kernel_p)
            .max(self.doubling.unwrap_or(0))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Pick {
    pub k: u64,
    /// Index of the selected member within the sequence: m = member(j).
    pub j: u64,
    pub m: u64,
    pub thresholds: Thresholds,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubseqSelection {
    pub picks: Vec<Pick>,
}

/// Per-k record stored in a certificate: the exact residual norm
/// ‖T^{m_{j_k}} x_partial − x_k‖, the analytic tail bound for the
/// discarded terms, and whether the verified orbit point stays in the
/// subspace.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub k: u64,
    pub exact_error: DyadicScalar,
    pub tail_bound: DyadicScalar,
    pub membership_ok: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HypercyclicCertificate {
    pub witness: CriterionWitness,
    #[serde(rename = "K")]
    pub k_terms: u64,
    pub dense_prefix: Vec<SparseVector>,
    pub selection: SubseqSelection,
    pub x_partial: CertifiedVector,
    pub checks: Vec<CheckRecord>,
}

fn require_samples(
    w: &CriterionWitness,
    samples: &[SparseVector],
) -> Result<(), CriterionError> {
    for (sample_index, x) in samples.iter().enumerate() {
        if let Some(bad_index) = w.subspace.first_violation(x) {
            return Err(CriterionError::SampleNotMember { sample_index, bad_index });
        }
        if w.t.kernel_index(x, w.kernel_budget).is_none() {
            return Err(CriterionError::SampleNotInKernel {
                sample_index,
                budget: w.kernel_budget,
            });
        }
    }
    Ok(())
}

/// Exact norm of A^m x, recomputed from scratch.
fn exact_power_norm(w: &CriterionWitness, x: &SparseVector, m: u64) -> DyadicScalar {
    w.a.apply_power(m, x).norm(w.subspace.norm)
}

/// Validates the decay certificate on `x` at one power; exact recomputation.
fn validate_decay_at(
    w: &CriterionWitness,
    sample_index: usize,
    x: &SparseVector,
    m: u64,
) -> Result<DyadicScalar, CriterionError> {
    let predicted = w.decay.predicted(&x.norm(w.subspace.norm), m);
    let actual = exact_power_norm(w, x, m);
    if predicted != actual {
        return Err(CriterionError::DecayMismatch { sample_index, power: m, predicted, actual });
    }
    Ok(actual)
}

/// Least member m* of the sequence such that every member m ≥ m* has
/// ‖A^m x‖ < 2^(−k). The zero vector vacuously returns the first member.
/// The certificate is validated exactly at m* and at the preceding member.
pub fn decay_threshold(
    w: &CriterionWitness,
    x: &SparseVector,
    k: i64,
) -> Result<u64, CriterionError> {
    if x.is_zero() {
        return Ok(w.seq.first());
    }
    let raw = w.decay.least_killing_power(&x.norm(w.subspace.norm), k);
    let member = w.seq.least_member_at_least(raw);
    let at_member = validate_decay_at(w, 0, x, member)?;
    debug_assert!(at_member.lt_pow2(k));
    if member > w.seq.first() {
        let prev = member - w.seq.step;
        if prev < raw {
            let at_prev = validate_decay_at(w, 0, x, prev)?;
            debug_assert!(!at_prev.lt_pow2(k));
        }
    }
    Ok(member)
}

fn raw_threshold(w: &CriterionWitness, x: &SparseVector, k: i64) -> u64 {
    if x.is_zero() {
        0
    } else {
        w.decay.least_killing_power(&x.norm(w.subspace.norm), k)
    }
}

fn thresholds_for(
    w: &CriterionWitness,
    x_k: &SparseVector,
    x_next: &SparseVector,
    k: u64,
    prev_m: Option<u64>,
) -> Thresholds {
    Thresholds {
        decay_self: raw_threshold(w, x_k, k as i64),
        decay_next: raw_threshold(w, x_next, k as i64 + 1).saturating_sub(w.seq.step),
        kernel_p: w.t.kernel_index(x_k, w.kernel_budget).unwrap_or(u64::MAX),
        doubling: prev_m.map(|m| m.saturating_mul(2)),
    }
}

/// Greedy deterministic choice of (m_{j_k}): the least member clearing all
/// four thresholds. Exact norms are recomputed at each pick and at its
/// successor member (the lookahead), so a lying decay certificate cannot
/// produce a selection.
pub fn select_subsequence(
    w: &CriterionWitness,
    dense_prefix: &[SparseVector],
    k_terms: u64,
    scan_limit: u64,
) -> Result<SubseqSelection, CriterionError> {
    if k_terms == 0 {
        return Err(CriterionError::ZeroK);
    }
    let needed = k_terms as usize + 1;
    if dense_prefix.len() < needed {
        return Err(CriterionError::PrefixTooShort { needed, got: dense_prefix.len() });
    }
    require_samples(w, &dense_prefix[..needed])?;

    let mut picks = Vec::with_capacity(k_terms as usize);
    let mut prev_m: Option<u64> = None;
    for k in 1..=k_terms {
        let x_k = &dense_prefix[(k - 1) as usize];
        let x_next = &dense_prefix[k as usize];
        let thresholds = thresholds_for(w, x_k, x_next, k, prev_m);
        let m = w.seq.least_member_at_least(thresholds.lower_bound());
        if m > scan_limit {
            return Err(CriterionError::ScanLimit { k, limit: scan_limit });
        }
        // Window of powers actually consulted: the pick and its successor.
        let self_norm = validate_decay_at(w, (k - 1) as usize, x_k, m)?;
        debug_assert!(self_norm.lt_pow2(k as i64));
        let next_norm = validate_decay_at(w, k as usize, x_next, m + w.seq.step)?;
        debug_assert!(next_norm.lt_pow2(k as i64 + 1));
        let j = w.seq.index_of(m).expect("least_member_at_least returns members");
        picks.push(Pick { k, j, m, thresholds });
        prev_m = Some(m);
    }
    Ok(SubseqSelection { picks })
}

fn partial_sum(
    w: &CriterionWitness,
    dense_prefix: &[SparseVector],
    picks: &[Pick],
) -> SparseVector {
    let one = DyadicScalar::one();
    let mut acc = SparseVector::zero();
    for pick in picks {
        let term = w.a.apply_power(pick.m, &dense_prefix[(pick.k - 1) as usize]);
        acc = vec_axpy(&one, &term, &acc);
    }
    acc
}

fn check_records_for(
    w: &CriterionWitness,
    dense_prefix: &[SparseVector],
    picks: &[Pick],
    computed: &SparseVector,
    tail_bound: &DyadicScalar,
) -> Vec<CheckRecord> {
    picks
        .iter()
        .map(|pick| {
            let orbit_point = w.t.apply_power(pick.m, computed);
            let exact_error =
                (&orbit_point - &dense_prefix[(pick.k - 1) as usize]).norm(w.subspace.norm);
            CheckRecord {
                k: pick.k,
                exact_error,
                tail_bound: tail_bound.clone(),
                membership_ok: w.subspace.contains(&orbit_point),
            }
        })
        .collect()
}

/// Assembles the certified truncation x_partial = Σ_{k≤K} A^{m_{j_k}} x_k
/// with tail bound 2^{-K}, and populates the per-k check records.
pub fn build_vector(
    w: &CriterionWitness,
    dense_prefix: &[SparseVector],
    selection: &SubseqSelection,
) -> Result<HypercyclicCertificate, CriterionError> {
    let k_terms = selection.picks.len() as u64;
    if k_terms == 0 {
        return Err(CriterionError::ZeroK);
    }
    if selection.picks.iter().enumerate().any(|(i, p)| p.k != i as u64 + 1) {
        return Err(CriterionError::BadSelection);
    }
    if dense_prefix.len() < k_terms as usize {
        return Err(CriterionError::PrefixTooShort {
            needed: k_terms as usize,
            got: dense_prefix.len(),
        });
    }
    let computed = partial_sum(w, dense_prefix, &selection.picks);
    let tail_bound = DyadicScalar::pow2(-(k_terms as i64));
    let checks = check_records_for(w, dense_prefix, &selection.picks, &computed, &tail_bound);
    let kept = dense_prefix.len().min(k_terms as usize + 1);
    Ok(HypercyclicCertificate {
        witness: w.clone(),
        k_terms,
        dense_prefix: dense_prefix[..kept].to_vec(),
        selection: selection.clone(),
        x_partial: CertifiedVector {
            computed,
            tail_bound,
            norm: w.subspace.norm,
        },
        checks,
    })
}

/// Structural problems that make a certificate unverifiable or unsound.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StructureIssue {
    PicksCountMismatch { expected: u64, got: u64 },
    PicksOutOfOrder,
    PrefixTooShort { needed: u64, got: u64 },
    SequenceNotDifferenceClosed,
    NormKindMismatch,
    TailBoundMismatch { expected: DyadicScalar, got: DyadicScalar },
    PrefixVectorNotMember { position: u64, bad_index: u64 },
    PrefixVectorNotInKernel { position: u64, budget: u64 },
    RecordCountMismatch { expected: u64, got: u64 },
}

/// Re-derived verdicts for one pick.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelectionCheck {
    pub k: u64,
    /// m is a member of the sequence with the recorded index.
    pub member_ok: bool,
    /// m ≥ 2·m_prev for k ≥ 2 (vacuous at k = 1).
    pub doubling_ok: bool,
    /// The recorded thresholds equal the recomputed ones.
    pub thresholds_ok: bool,
    /// m is the least member clearing the recomputed thresholds.
    pub minimal_ok: bool,
    /// Exact ‖A^m x_k‖ < 2^{-k}, recomputed by iterating A.
    pub decay_ok: bool,
    /// Exact T^m x_k = 0, recomputed by iterating T.
    pub annihilation_ok: bool,
    /// Exact ‖A^{m'} x_{k+1}‖ < 2^{-(k+1)} for the next few members m';
    /// absent when the prefix does not include x_{k+1}.
    pub lookahead_ok: Option<bool>,
}

impl SelectionCheck {
    pub fn passed(&self) -> bool {
        self.member_ok
            && self.doubling_ok
            && self.thresholds_ok
            && self.minimal_ok
            && self.decay_ok
            && self.annihilation_ok
            && self.lookahead_ok.unwrap_or(true)
    }
}

/// Re-derived verdicts for one per-k check record.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckVerdict {
    pub k: u64,
    /// T^{m_{j_k}} x_i = 0 for all i < k, exactly.
    pub vanishing_ok: bool,
    /// Recomputed ‖T^{m_{j_k}} x_partial − x_k‖.
    pub exact_error: DyadicScalar,
    /// Recomputed orbit point stays inside the subspace.
    pub membership_ok: bool,
    /// Recorded record matches the recomputation field by field.
    pub record_ok: bool,
    /// exact_error + 2^{-K} < 2^{-k}, exactly.
    pub margin_ok: bool,
    /// Whether margin_ok is required for the overall verdict (k ≤ K−2) or
    /// merely informational (the tail estimate is tight at k ∈ {K−1, K}).
    pub asserted: bool,
}

impl CheckVerdict {
    pub fn passed(&self) -> bool {
        self.vanishing_ok
            && self.membership_ok
            && self.record_ok
            && (!self.asserted || self.margin_ok)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationReport {
    #[serde(rename = "K")]
    pub k_terms: u64,
    pub issues: Vec<StructureIssue>,
    /// Σ_{k≤K} A^{m_{j_k}} x_k equals the stored x_partial.computed.
    pub sum_ok: bool,
    pub selection: Vec<SelectionCheck>,
    pub checks: Vec<CheckVerdict>,
    pub passed: bool,
}

/// Width of the empirical lookahead window: exact norms are recomputed for
/// this many members after each pick (the geometric decay handles the rest
/// analytically).
pub const LOOKAHEAD_WINDOW: u64 = 4;

/// Re-derives every verdict of a certificate from its own contents: no
/// state other than the certificate participates. T-powers are recomputed
/// by iteration, so the verification does not reuse the left-inverse
/// identity that motivated the construction.
pub fn verify_certificate(cert: &HypercyclicCertificate) -> VerificationReport {
    let w = &cert.witness;
    let k_terms = cert.k_terms;
    let mut issues = Vec::new();

    let picks = &cert.selection.picks;
    if picks.len() as u64 != k_terms {
        issues.push(StructureIssue::PicksCountMismatch {
            expected: k_terms,
            got: picks.len() as u64,
        });
    }
    if picks.iter().enumerate().any(|(i, p)| p.k != i as u64 + 1) {
        issues.push(StructureIssue::PicksOutOfOrder);
    }
    if (cert.dense_prefix.len() as u64) < k_terms {
        issues.push(StructureIssue::PrefixTooShort {
            needed: k_terms,
            got: cert.dense_prefix.len() as u64,
        });
    }
    if !w.seq.is_difference_closed() {
        // The analytic tail bound needs selected differences to be members.
        issues.push(StructureIssue::SequenceNotDifferenceClosed);
    }
    if cert.x_partial.norm != w.subspace.norm {
        issues.push(StructureIssue::NormKindMismatch);
    }
    let expected_tail = DyadicScalar::pow2(-(k_terms as i64));
    if cert.x_partial.tail_bound != expected_tail {
        issues.push(StructureIssue::TailBoundMismatch {
            expected: expected_tail.clone(),
            got: cert.x_partial.tail_bound.clone(),
        });
    }
    if cert.checks.len() as u64 != k_terms {
        issues.push(StructureIssue::RecordCountMismatch {
            expected: k_terms,
            got: cert.checks.len() as u64,
        });
    }
    for (pos, x) in cert.dense_prefix.iter().enumerate() {
        if let Some(bad_index) = w.subspace.first_violation(x) {
            issues.push(StructureIssue::PrefixVectorNotMember {
                position: pos as u64 + 1,
                bad_index,
            });
        } else if w.t.kernel_index(x, w.kernel_budget).is_none() {
            issues.push(StructureIssue::PrefixVectorNotInKernel {
                position: pos as u64 + 1,
                budget: w.kernel_budget,
            });
        }
    }

    if !issues.is_empty()
        && (picks.len() as u64 != k_terms || (cert.dense_prefix.len() as u64) < k_terms)
    {
        // Counting failures leave nothing meaningful to recompute.
        return VerificationReport {
            k_terms,
            issues,
            sum_ok: false,
            selection: Vec::new(),
            checks: Vec::new(),
            passed: false,
        };
    }

    let mut selection = Vec::with_capacity(picks.len());
    let mut prev_m: Option<u64> = None;
    for pick in picks {
        let k = pick.k;
        let x_k = &cert.dense_prefix[(k - 1) as usize];
        let x_next = cert.dense_prefix.get(k as usize);
        let member_ok = w.seq.index_of(pick.m) == Some(pick.j);
        let doubling_ok = prev_m.is_none_or(|p| pick.m >= p.saturating_mul(2));
        let (thresholds_ok, minimal_ok) = match x_next {
            Some(x_next) => {
                let recomputed = thresholds_for(w, x_k, x_next, k, prev_m);
                let minimal =
                    w.seq.least_member_at_least(recomputed.lower_bound()) == pick.m;
                (recomputed == pick.thresholds, minimal)
            }
            None => {
                // Without x_{k+1} the lookahead bound cannot be re-derived;
                // check the other three and minimality against the record.
                let partial = thresholds_for(w, x_k, &SparseVector::zero(), k, prev_m);
                let fields_ok = partial.decay_self == pick.thresholds.decay_self
                    && partial.kernel_p == pick.thresholds.kernel_p
                    && partial.doubling == pick.thresholds.doubling;
                let minimal =
                    w.seq.least_member_at_least(pick.thresholds.lower_bound()) == pick.m;
                (fields_ok, minimal)
            }
        };
        let decay_ok = exact_power_norm(w, x_k, pick.m).lt_pow2(k as i64);
        let annihilation_ok = w.t.apply_power(pick.m, x_k).is_zero();
        let lookahead_ok = x_next.map(|x_next| {
            (1..=LOOKAHEAD_WINDOW).all(|i| {
                exact_power_norm(w, x_next, pick.m + i * w.seq.step).lt_pow2(k as i64 + 1)
            })
        });
        selection.push(SelectionCheck {
            k,
            member_ok,
            doubling_ok,
            thresholds_ok,
            minimal_ok,
            decay_ok,
            annihilation_ok,
            lookahead_ok,
        });
        prev_m = Some(pick.m);
    }

    let recomputed_sum = partial_sum(w, &cert.dense_prefix, picks);
    let sum_ok = recomputed_sum == cert.x_partial.computed;

    let mut checks = Vec::with_capacity(picks.len());
    for pick in picks {
        let k = pick.k;
        let vanishing_ok = cert.dense_prefix[..(k - 1) as usize]
            .iter()
            .all(|x_i| w.t.apply_power(pick.m, x_i).is_zero());
        let orbit_point = w.t.apply_power(pick.m, &cert.x_partial.computed);
        let exact_error =
            (&orbit_point - &cert.dense_prefix[(k - 1) as usize]).norm(w.subspace.norm);
        let membership_ok = w.subspace.contains(&orbit_point);
        let record_ok = cert.checks.get((k - 1) as usize).is_some_and(|rec| {
            rec.k == k
                && rec.exact_error == exact_error
                && rec.tail_bound == expected_tail
                && rec.membership_ok == membership_ok
        });
        let margin_ok = (&exact_error + &expected_tail).lt_pow2(k as i64);
        let asserted = k + 2 <= k_terms;
        checks.push(CheckVerdict {
            k,
            vanishing_ok,
            exact_error,
            membership_ok,
            record_ok,
            margin_ok,
            asserted,
        });
    }

    let passed = issues.is_empty()
        && sum_ok
        && selection.iter().all(SelectionCheck::passed)
        && checks.iter().all(CheckVerdict::passed);

    VerificationReport { k_terms, issues, sum_ok, selection, checks, passed }
}

/// Witness for a failed decay validation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecayFailure {
    pub sample_index: usize,
    pub power: u64,
    pub predicted: DyadicScalar,
    pub actual: DyadicScalar,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IterateIssue {
    LeftSubspace { bad_index: u64 },
    LeftKernel { budget: u64 },
}

/// Witness for an iterate A^{m_k}(sample) escaping ker*(T) ∩ M.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IterateFailure {
    pub sample_index: usize,
    pub power: u64,
    pub issue: IterateIssue,
}

/// The four hypothesis verdicts.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConditionsReport {
    pub samples: usize,
    pub k_probe: u64,
    /// (i) A^{m_k} decays on the samples, validated against the certificate.
    pub decay_ok: bool,
    pub decay_failure: Option<DecayFailure>,
    /// (ii) iterates stay in ker*(T) ∩ M for all probed members.
    pub iterates_ok: bool,
    pub iterate_failure: Option<IterateFailure>,
    /// (iii) the sequence is difference-closed.
    pub difference_closed: bool,
    /// (iv) T∘A = I on the samples.
    pub left_inverse: LeftInverseReport,
}

impl ConditionsReport {
    pub fn passed(&self) -> bool {
        self.decay_ok
            && self.iterates_ok
            && self.difference_closed
            && self.left_inverse.passed()
    }
}

/// Checks the four criterion hypotheses on a sample set, probing the first
/// `k_probe` members of the power sequence.
pub fn check_conditions(
    w: &CriterionWitness,
    samples: &[SparseVector],
    k_probe: u64,
) -> Result<ConditionsReport, CriterionError> {
    require_samples(w, samples)?;

    let mut decay_failure = None;
    let mut iterate_failure = None;
    'outer: for (sample_index, x) in samples.iter().enumerate() {
        let base = x.norm(w.subspace.norm);
        let mut v = x.clone();
        let mut power = 0u64;
        for k in 1..=k_probe {
            let m = w.seq.member(k);
            while power < m {
                v = w.a.apply(&v);
                power += 1;
            }
            if decay_failure.is_none() {
                let predicted = w.decay.predicted(&base, m);
                let actual = v.norm(w.subspace.norm);
                if predicted != actual {
                    decay_failure = Some(DecayFailure { sample_index, power: m, predicted, actual });
                }
            }
            if iterate_failure.is_none() {
                if let Some(bad_index) = w.subspace.first_violation(&v) {
                    iterate_failure = Some(IterateFailure {
                        sample_index,
                        power: m,
                        issue: IterateIssue::LeftSubspace { bad_index },
                    });
                } else {
                    let budget = w.kernel_budget.max(v.max_support().unwrap_or(0));
                    if w.t.kernel_index(&v, budget).is_none() {
                        iterate_failure = Some(IterateFailure {
                            sample_index,
                            power: m,
                            issue: IterateIssue::LeftKernel { budget },
                        });
                    }
                }
            }
            if decay_failure.is_some() && iterate_failure.is_some() {
                break 'outer;
            }
        }
    }

    Ok(ConditionsReport {
        samples: samples.len(),
        k_probe,
        decay_ok: decay_failure.is_none(),
        decay_failure,
        iterates_ok: iterate_failure.is_none(),
        iterate_failure,
        difference_closed: w.seq.is_difference_closed(),
        left_inverse: is_left_inverse_on(&w.t, &w.a, samples),
    })
}

/// Outcome of the kernel-criterion check. `SubspaceObstruction` means the
/// kernel conditions hold but the subspace prerequisites (ker*(T) samples
/// inside M, T mapping M into M) fail, so only the direct criterion can
/// apply; `CoreConditionsFail` means the kernel conditions themselves fail.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LeClassification {
    Applicable,
    SubspaceObstruction,
    CoreConditionsFail,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContainmentFailure {
    pub sample_index: usize,
    pub bad_index: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LeReport {
    pub samples: usize,
    pub k_probe: u64,
    /// Samples lie in ker*(T) (budget: max support + k_probe).
    pub kernel_ok: bool,
    pub kernel_failure: Option<usize>,
    /// A-powers 1..k_probe decay on the samples per the certificate.
    pub decay_ok: bool,
    pub decay_failure: Option<DecayFailure>,
    pub left_inverse: LeftInverseReport,
    /// Kernel samples are members of the subspace.
    pub containment_ok: bool,
    pub containment_failure: Option<ContainmentFailure>,
    /// T maps member samples back into the subspace.
    pub invariance: InvarianceReport,
    pub classification: LeClassification,
}

impl LeReport {
    pub fn core_ok(&self) -> bool {
        self.kernel_ok && self.decay_ok && self.left_inverse.passed()
    }
}

/// Checks the kernel criterion (decay over all powers and T∘A = I on
/// ker*(T) samples) together with the subspace prerequisites its
/// M-hypercyclicity conclusion needs: sample containment in M and
/// M-invariance of T.
pub fn check_le_criterion(
    t: &OperatorExpr,
    a: &OperatorExpr,
    m: &SubspaceSpec,
    samples: &[SparseVector],
    k_probe: u64,
    decay: &DecayCertificate,
) -> LeReport {
    let mut kernel_failure = None;
    for (sample_index, x) in samples.iter().enumerate() {
        let budget = x.max_support().unwrap_or(0) + k_probe;
        if t.kernel_index(x, budget).is_none() {
            kernel_failure = Some(sample_index);
            break;
        }
    }

    let mut decay_failure = None;
    'outer: for (sample_index, x) in samples.iter().enumerate() {
        let base = x.norm(m.norm);
        let mut v = x.clone();
        for power in 1..=k_probe {
            v = a.apply(&v);
            let predicted = decay.predicted(&base, power);
            let actual = v.norm(m.norm);
            if predicted != actual {
                decay_failure = Some(DecayFailure { sample_index, power, predicted, actual });
                break 'outer;
            }
        }
    }

    let mut containment_failure = None;
    for (sample_index, x) in samples.iter().enumerate() {
        if let Some(bad_index) = m.first_violation(x) {
            containment_failure = Some(ContainmentFailure { sample_index, bad_index });
            break;
        }
    }

    let members: Vec<SparseVector> =
        samples.iter().filter(|x| m.contains(x)).cloned().collect();
    let invariance =
        check_invariance(t, m, &members).expect("members were filtered by membership");

    let report = LeReport {
        samples: samples.len(),
        k_probe,
        kernel_ok: kernel_failure.is_none(),
        kernel_failure,
        decay_ok: decay_failure.is_none(),
        decay_failure,
        left_inverse: is_left_inverse_on(t, a, samples),
        containment_ok: containment_failure.is_none(),
        containment_failure,
        invariance,
        classification: LeClassification::CoreConditionsFail,
    };
    let classification = if !report.core_ok() {
        LeClassification::CoreConditionsFail
    } else if report.containment_ok && report.invariance.passed() {
        LeClassification::Applicable
    } else {
        LeClassification::SubspaceObstruction
    };
    LeReport { classification, ..report }
}
