//! End-to-end flows: the explicit construction with its companion shift,
//! the criterion from condition checks through certified vector to
//! independent verification, and the orbit diagnostics downstream.

use orbitlab::construction::{
    build_s, build_t, check_invariance, check_quasiconjugacy, BiorthogonalSystem,
};
use orbitlab::criterion::{
    build_vector, check_conditions, check_le_criterion, select_subsequence, verify_certificate,
    CriterionWitness, DecayCertificate, LeClassification, PowerSequence,
};
use orbitlab::dyadic::DyadicScalar;
use orbitlab::enumerate::enumerate_dense;
use orbitlab::operator::OperatorExpr;
use orbitlab::orbit::{density_report, orbit};
use orbitlab::subspace::{SubspaceSpec, SupportPattern};
use orbitlab::vector::{CertifiedVector, NormKind, SparseVector};

fn v(s: &str) -> SparseVector {
    s.parse().unwrap()
}

fn d(s: &str) -> DyadicScalar {
    s.parse().unwrap()
}

fn example_witness() -> CriterionWitness {
    CriterionWitness {
        t: OperatorExpr::scale(d("2"), OperatorExpr::BackwardShift),
        a: OperatorExpr::scale(d("1/2"), OperatorExpr::ForwardShift),
        subspace: SubspaceSpec::odd_sup(),
        seq: PowerSequence::new(2, 0).unwrap(),
        decay: DecayCertificate::exact_geometric(-1).unwrap(),
        kernel_budget: 64,
    }
}

#[test]
fn construction_intertwines_at_scale() {
    let sys = BiorthogonalSystem::odd();
    let t = build_t(&sys);
    let s = build_s();
    let report = check_quasiconjugacy(&t, &s, &sys, 500);
    assert_eq!(report.checked, 500);
    assert!(report.passed());

    // Dropping the perturbation breaks the intertwining immediately.
    let report = check_quasiconjugacy(&OperatorExpr::Identity, &s, &sys, 5);
    assert_eq!(report.failures[0].k, 2);
    assert_eq!(report.failures[0].lhs, v("{3:1}"));
    assert_eq!(report.failures[0].rhs, v("{1:1/2, 3:1}"));
}

#[test]
fn construction_preserves_the_subspace() {
    let sys = BiorthogonalSystem::odd();
    let t = build_t(&sys);
    let m = SubspaceSpec::odd_sup();
    let members = enumerate_dense(&m, 200);
    let report = check_invariance(&t, &m, &members).unwrap();
    assert_eq!(report.checked, 200);
    assert!(report.passed());

    // The doubled shift is the canonical non-invariant comparison point.
    let two_b = OperatorExpr::scale(d("2"), OperatorExpr::BackwardShift);
    let report = check_invariance(&two_b, &m, &[v("{3:1}")]).unwrap();
    let witness = report.counterexample.unwrap();
    assert_eq!(witness.image, v("{2:2}"));
    assert_eq!(witness.violating_index, 2);
}

#[test]
fn enumerated_vectors_feed_the_criterion_directly() {
    // Soundness of the stream as a sample source: membership and finite
    // annihilation order, with kernel budget equal to the max support.
    let two_b = OperatorExpr::scale(d("2"), OperatorExpr::BackwardShift);
    for m in [
        SubspaceSpec::odd_sup(),
        SubspaceSpec::new(SupportPattern::Progression { step: 3, start: 2 }, NormKind::L1)
            .unwrap(),
    ] {
        for x in enumerate_dense(&m, 200) {
            assert!(m.contains(&x));
            let budget = x.max_support().unwrap_or(0);
            assert!(two_b.kernel_index(&x, budget).is_some());
        }
    }
}

#[test]
fn conditions_hold_on_twenty_enumerated_samples() {
    let w = example_witness();
    let samples = enumerate_dense(&w.subspace, 20);
    let report = check_conditions(&w, &samples, 20).unwrap();
    assert!(report.passed(), "{report:?}");
    assert_eq!(report.samples, 20);
}

#[test]
fn kernel_criterion_splits_by_space() {
    let w = example_witness();
    let samples = enumerate_dense(&w.subspace, 20);
    // On the sup-norm odd-support subspace the kernel conditions hold but
    // invariance fails, so only the direct criterion applies.
    let report = check_le_criterion(&w.t, &w.a, &w.subspace, &samples, 10, &w.decay);
    assert!(report.core_ok());
    assert_eq!(report.classification, LeClassification::SubspaceObstruction);

    // On the whole space with the ℓ¹ norm the same pair is unobstructed.
    let all = SubspaceSpec::all_l1();
    let samples = enumerate_dense(&all, 20);
    let report = check_le_criterion(&w.t, &w.a, &all, &samples, 10, &w.decay);
    assert_eq!(report.classification, LeClassification::Applicable);
}

#[test]
fn decomposition_identity_at_desk_scale() {
    // T^{m_{j_k}} x_partial = x_k + Σ_{i>k} A^{m_{j_i} − m_{j_k}} x_i,
    // exactly: earlier terms are annihilated, the k-th is restored by the
    // left-inverse law, later terms keep their surplus A-powers.
    let w = example_witness();
    let prefix = [v("{1:1}"), v("{3:1}"), v("{1:1/2, 5:1}"), v("{7:1}"), v("{1:1}")];
    let sel = select_subsequence(&w, &prefix, 4, 100_000).unwrap();
    let cert = build_vector(&w, &prefix, &sel).unwrap();
    let ms: Vec<u64> = sel.picks.iter().map(|p| p.m).collect();
    assert_eq!(ms, vec![2, 4, 8, 16]);
    for (k0, pick) in sel.picks.iter().enumerate() {
        let lhs = w.t.apply_power(pick.m, &cert.x_partial.computed);
        let mut rhs = prefix[k0].clone();
        for later in &sel.picks[k0 + 1..] {
            let surplus = w.a.apply_power(later.m - pick.m, &prefix[(later.k - 1) as usize]);
            rhs = &rhs + &surplus;
        }
        assert_eq!(lhs, rhs, "decomposition fails at k = {}", pick.k);
    }
}

#[test]
fn full_depth_certificate_verifies() {
    let w = example_witness();
    let prefix = enumerate_dense(&w.subspace, 13);
    let sel = select_subsequence(&w, &prefix, 12, 100_000).unwrap();
    let ms: Vec<u64> = sel.picks.iter().map(|p| p.m).collect();
    assert_eq!(ms, vec![4, 8, 16, 32, 64, 128, 256, 512, 1024, 2048, 4096, 8192]);

    let cert = build_vector(&w, &prefix, &sel).unwrap();
    let report = verify_certificate(&cert);
    assert!(report.passed, "issues: {:?}", report.issues);
    assert!(report.sum_ok);
    assert!(report.selection.iter().all(|s| s.passed()));
    // Margins: asserted and holding through k = K−2, still holding at
    // K−1, and exactly saturated (hence failing) at k = K.
    for check in &report.checks {
        assert_eq!(check.asserted, check.k <= 10);
        assert_eq!(check.margin_ok, check.k <= 11, "k = {}", check.k);
        assert!(check.vanishing_ok && check.membership_ok && check.record_ok);
    }
}

#[test]
fn tampering_any_field_fails_verification() {
    let w = example_witness();
    let prefix = enumerate_dense(&w.subspace, 6);
    let sel = select_subsequence(&w, &prefix, 5, 100_000).unwrap();
    let cert = build_vector(&w, &prefix, &sel).unwrap();
    assert!(verify_certificate(&cert).passed);

    let mut t = cert.clone();
    t.selection.picks[2].m += 2;
    t.selection.picks[2].j += 1;
    assert!(!verify_certificate(&t).passed, "non-minimal pick accepted");

    let mut t = cert.clone();
    t.selection.picks[1].thresholds.decay_self = 0;
    assert!(!verify_certificate(&t).passed, "forged threshold accepted");

    let mut t = cert.clone();
    t.witness.seq = PowerSequence::new(2, 2).unwrap();
    assert!(!verify_certificate(&t).passed, "offset sequence accepted");

    let mut t = cert.clone();
    let bumped = &t.x_partial.computed + &v("{1:1/2^30}");
    t.x_partial.computed = bumped;
    assert!(!verify_certificate(&t).passed, "perturbed vector accepted");

    let mut t = cert.clone();
    t.checks[0].membership_ok = false;
    assert!(!verify_certificate(&t).passed, "flipped membership accepted");

    let mut t = cert.clone();
    t.x_partial.tail_bound = d("1/2^40");
    assert!(!verify_certificate(&t).passed, "shrunk tail bound accepted");

    let mut t = cert.clone();
    t.dense_prefix[1] = v("{5:1}");
    assert!(!verify_certificate(&t).passed, "swapped prefix vector accepted");

    let mut t = cert.clone();
    t.k_terms = 4;
    assert!(!verify_certificate(&t).passed, "shortened K accepted");
}

#[test]
fn companion_orbit_matches_hand_expansion() {
    let report = orbit(&build_s(), &v("{2:1}"), 1, NormKind::L1);
    assert_eq!(report.points[0].vector, Some(v("{2:1}")));
    assert_eq!(report.points[1].vector, Some(v("{1:1/2, 2:1}")));
}

#[test]
fn density_trivia() {
    let two_b = OperatorExpr::scale(d("2"), OperatorExpr::BackwardShift);
    let exact = |s: &str| CertifiedVector {
        computed: v(s),
        tail_bound: d("0"),
        norm: NormKind::Sup,
    };
    // The start point itself is a hit.
    let report = density_report(&two_b, &exact("{1:1}"), &[v("{1:1}")], &d("1/2"), 16);
    assert_eq!(report.hits[0].orbit_index, 0);
    assert!(report.hits[0].distance.is_zero());
    // A constant orbit never approaches a distant target.
    let report =
        density_report(&OperatorExpr::Identity, &exact("{}"), &[v("{1:1}")], &d("1/2"), 16);
    assert!(report.hits.is_empty());
    assert_eq!(report.points.len(), 17);
}

#[test]
fn certificate_drives_density_evidence() {
    let w = example_witness();
    let prefix = enumerate_dense(&w.subspace, 7);
    let sel = select_subsequence(&w, &prefix, 6, 100_000).unwrap();
    let cert = build_vector(&w, &prefix, &sel).unwrap();
    assert!(verify_certificate(&cert).passed);
    for (k0, pick) in sel.picks.iter().enumerate() {
        let eps = DyadicScalar::pow2(-(pick.k as i64));
        let report =
            density_report(&w.t, &cert.x_partial, &prefix[k0..k0 + 1], &eps, pick.m);
        assert!(report.all_hit(), "target {} missed", k0 + 1);
        assert!(report.hits[0].orbit_index <= pick.m);
        // The designated power itself is a hit, whatever came earlier.
        let at_pick = w.t.apply_power(pick.m, &cert.x_partial.computed);
        let dist = (&at_pick - &prefix[k0]).norm(w.subspace.norm);
        assert!(dist.lt_pow2(pick.k as i64));
    }
}
