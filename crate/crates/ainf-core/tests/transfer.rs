use std::collections::BTreeMap;
use std::sync::Arc;

use ainf_core::ainfty::{compose, lemma_obs_alg_del, lemma_obs_comp, lemma_obs_htpy_del, lemma_obs_mor_del, precompose_power, AInfAlgebra, AInfMorphism};
use ainf_core::chaincx::{ChainComplex, GradedMap};
use ainf_core::fixtures::{complex_with_pairs, direct_sum, exterior, ground_field, massey, massey_basis, random_automorphism, random_square_zero_dga, rng, triple_product_outside_indeterminacy};
use ainf_core::signs::MultiMap;
use ainf_core::transfer::{certify_uniqueness, homology_section, lift_morphism, lift_morphism_unital, transfer, transfer_unital, TransferOptions, Transferred};
use ainf_core::{Error, Field, PivotRule};

fn q() -> Field {
    Field::Rational
}

fn f5() -> Field {
    Field::prime(5).unwrap()
}

fn massey_transfer(rule: PivotRule, unital: bool) -> (Arc<AInfAlgebra>, Transferred) {
    let b = Arc::new(massey(q()));
    let h = homology_section(b.complex(), b.unit());
    let opts = TransferOptions::with_rule(rule);
    let t = if unital { transfer_unital(&b, &h.complex, h.unit.unwrap(), &h.section, &opts) } else { transfer(&b, &h.complex, &h.section, &opts) };
    (b, t.unwrap())
}

/// Classes of `a, b, c` in the homology basis `1; a, b, c; w; P, R, Q`.
const CLASSES: (usize, usize, usize) = (1, 2, 3);

#[test]
fn identity_transfer_of_exterior_algebra() {
    let b = Arc::new(exterior(q()));
    let id = GradedMap::identity(b.module());
    let t = transfer(&b, b.complex(), &id, &TransferOptions::default()).unwrap();
    assert_eq!(t.algebra.mu(2), b.mu(2));
    assert!(t.algebra.mus()[2..].iter().all(|m| m.is_zero()));
    assert!(t.morphism.phis()[1..].iter().all(|m| m.is_zero()));
}

#[test]
fn identity_transfer_of_massey_fixture() {
    let b = Arc::new(massey(q()));
    let id = GradedMap::identity(b.module());
    let t = transfer(&b, b.complex(), &id, &TransferOptions::with_rule(PivotRule::Last)).unwrap();
    assert_eq!(t.algebra.mu(2), b.mu(2));
}

#[test]
fn acyclic_algebra_transfers_to_zero() {
    // ranks {0: 1, 1: 1} with ∂e = 1.
    let cx = ChainComplex::from_i64(q(), &[(0, 1), (1, 1)], &[(1, &[&[1]])]).unwrap();
    let mu2 = ainf_core::ainfty::product_from_table(cx.module(), |i, j| match (i, j) {
        (0, k) | (k, 0) => vec![(k, 1)],
        _ => vec![],
    });
    let b = Arc::new(AInfAlgebra::new(cx, vec![mu2], Some(0)).unwrap());
    let h = homology_section(b.complex(), b.unit());
    assert_eq!(h.complex.module().total_rank(), 0);
    assert_eq!(h.unit, None);
    let t = transfer(&b, &h.complex, &h.section, &TransferOptions::default()).unwrap();
    assert!(t.algebra.mus().iter().all(|m| m.is_zero()));
}

#[test]
fn homology_of_massey_fixture() {
    let b = massey(q());
    let h = homology_section(b.complex(), b.unit());
    let ranks: Vec<(i32, usize)> = h.complex.module().degrees().collect();
    assert_eq!(ranks, vec![(0, 1), (1, 3), (3, 1), (4, 3)]);
    assert_eq!(h.unit, Some(0));
    use massey_basis::*;
    let col = |g: usize| h.section.column(h.complex.module().local(g).0, h.complex.module().local(g).1).to_vec();
    assert_eq!(col(4), vec![(W - 6, q().one())]);
    assert_eq!(col(CLASSES.0), vec![(A - 1, q().one())]);
}

#[test]
fn massey_product_survives_under_both_rules() {
    for rule in [PivotRule::First, PivotRule::Last] {
        for unital in [false, true] {
            let (_, t) = massey_transfer(rule, unital);
            let (a, b, c) = CLASSES;
            assert!(triple_product_outside_indeterminacy(&t.algebra, a, b, c), "rule {rule:?}, unital {unital}");
            assert_eq!(t.algebra.arity_bound(), 6);
            assert!(t.algebra.mus()[3..].iter().all(|m| m.is_zero()));
        }
    }
}

#[test]
fn unital_transfer_is_split_unital() {
    let (_, t) = massey_transfer(PivotRule::First, true);
    for d in ainf_core::ainfty::unit_defects(&t.algebra, 6).unwrap() {
        assert!(d.map.is_zero(), "k={} u={}", d.k, d.u);
    }
    for d in ainf_core::ainfty::morphism_unit_defects(&t.morphism, 6) {
        assert!(d.map.is_zero(), "k={} u={}", d.k, d.u);
    }
}

#[test]
fn unital_identity_transfer_of_ground_field_and_exterior() {
    for b in [ground_field(q()), exterior(q()), exterior(f5())] {
        let b = Arc::new(b);
        let id = GradedMap::identity(b.module());
        let t = transfer_unital(&b, b.complex(), 0, &id, &TransferOptions::default()).unwrap();
        assert_eq!(t.algebra.mu(2), b.mu(2));
        assert_eq!(t.algebra.unit(), Some(0));
    }
}

#[test]
fn unital_transfer_rejects_bad_unit() {
    let b = Arc::new(exterior(q()));
    let id = GradedMap::identity(b.module());
    let nonunital = Arc::new(b.with_unit(None).unwrap());
    assert!(matches!(transfer_unital(&nonunital, b.complex(), 0, &id, &TransferOptions::default()), Err(Error::Precondition(_))));
    let twice = id.scale(&q().from_i64(2));
    assert!(matches!(transfer_unital(&b, b.complex(), 0, &twice, &TransferOptions::default()), Err(Error::Precondition(_))));
}

#[test]
fn transfer_rejects_non_quasi_isomorphism() {
    let b = Arc::new(exterior(q()));
    let zero = GradedMap::zero(b.module(), b.module(), 0);
    assert!(matches!(transfer(&b, b.complex(), &zero, &TransferOptions::default()), Err(Error::NotQuasiIso(_))));
}

/// `B ⊕ C` with `C` acyclic, projecting onto `B`.
fn thickened(b: &AInfAlgebra, pairs: &[(i32, usize)], seed: u64) -> (ChainComplex, GradedMap) {
    let mut rg = rng(seed);
    let mut ranks = BTreeMap::new();
    let mut ps = BTreeMap::new();
    for &(d, n) in pairs {
        *ranks.entry(d).or_insert(0) += n;
        *ranks.entry(d - 1).or_insert(0) += n;
        ps.insert(d, n);
    }
    let c = complex_with_pairs(&mut rg, b.field(), &ranks, &ps, true);
    let (sum, _, projs) = direct_sum(&[b.complex(), &c]);
    (sum, projs[0].clone())
}

#[test]
fn surjective_strict_mode_gives_strict_morphism() {
    for b in [exterior(q()), massey(q())] {
        let b = Arc::new(b);
        let (a, p) = thickened(&b, &[(2, 1)], 9);
        let opts = TransferOptions { surjective_strict: true, ..TransferOptions::default() };
        let t = transfer(&b, &a, &p, &opts).unwrap();
        assert!(t.morphism.is_strict());
        assert_eq!(t.morphism.arity_bound(), t.algebra.arity_bound());
    }
}

#[test]
fn surjective_strict_mode_rejects_non_surjective_map() {
    let b = Arc::new(massey(q()));
    let h = homology_section(b.complex(), b.unit());
    let opts = TransferOptions { surjective_strict: true, ..TransferOptions::default() };
    assert!(matches!(transfer(&b, &h.complex, &h.section, &opts), Err(Error::Precondition(_))));
}

#[test]
fn random_square_zero_dgas_transfer_to_homology() {
    for seed in 0..12 {
        for field in [q(), f5()] {
            let mut rg = rng(1000 + seed);
            let b = Arc::new(random_square_zero_dga(&mut rg, field, 5));
            let h = homology_section(b.complex(), b.unit());
            let t = transfer(&b, &h.complex, &h.section, &TransferOptions::default()).unwrap();
            t.algebra.verify(t.algebra.complete_bound()).unwrap();
            if let Some(u) = h.unit {
                let tu = transfer_unital(&b, &h.complex, u, &h.section, &TransferOptions::with_rule(PivotRule::Last)).unwrap();
                tu.morphism.verify_unital(tu.algebra.arity_bound()).unwrap();
            }
        }
    }
}

#[test]
fn obstruction_lemmas_on_transferred_structures() {
    let (_, t1) = massey_transfer(PivotRule::First, false);
    let (_, t2) = massey_transfer(PivotRule::Last, false);
    let l = lift_morphism(&t2.morphism, &t1.morphism, &TransferOptions::default()).unwrap();
    for n in 1..=3 {
        for alg in [&t1.algebra, &t2.algebra] {
            assert!(lemma_obs_alg_del(alg, n).unwrap().is_zero());
        }
        assert!(lemma_obs_mor_del(&t1.morphism, n).unwrap().is_zero());
        assert!(lemma_obs_mor_del(&l.phi, n).unwrap().is_zero());
        assert!(lemma_obs_comp(&t2.morphism, &l.phi, n).unwrap().is_zero());
        assert!(lemma_obs_htpy_del(&l.sigma, n).unwrap().is_zero());
    }
}

#[test]
fn lifting_through_identity() {
    let (b, t) = massey_transfer(PivotRule::First, false);
    let id = AInfMorphism::identity(&b);
    let l = lift_morphism(&id, &t.morphism, &TransferOptions::default()).unwrap();
    assert_eq!(l.phi.linear(), t.morphism.linear());
    assert!(l.sigma.sigmas()[0].is_zero());
}

#[test]
fn lifting_a_known_composite() {
    let (_, t) = massey_transfer(PivotRule::Last, false);
    let (_, t2) = massey_transfer(PivotRule::First, false);
    let phi0 = lift_morphism(&t2.morphism, &t.morphism, &TransferOptions::default()).unwrap().phi;
    let psi = compose(&t2.morphism, &phi0).unwrap();
    let l = lift_morphism(&t2.morphism, &psi, &TransferOptions::with_rule(PivotRule::Last)).unwrap();
    l.phi.verify(l.phi.complete_bound()).unwrap();
    l.sigma.verify(l.sigma.complete_bound()).unwrap();
}

#[test]
fn unital_lift_keeps_units() {
    let (_, t1) = massey_transfer(PivotRule::First, true);
    let (_, t2) = massey_transfer(PivotRule::Last, true);
    let l = lift_morphism_unital(&t2.morphism, &t1.morphism, &TransferOptions::default()).unwrap();
    l.phi.verify_unital(6).unwrap();
    for d in ainf_core::ainfty::homotopy_unit_defects(&l.sigma, 6) {
        assert!(d.map.is_zero());
    }
}

#[test]
fn uniqueness_certificate_across_pivot_rules() {
    for unital in [false, true] {
        let (_, t1) = massey_transfer(PivotRule::First, unital);
        let (_, t2) = massey_transfer(PivotRule::Last, unital);
        let cert = certify_uniqueness(&t1.morphism, &t2.morphism, &TransferOptions::default()).unwrap();
        cert.verify().unwrap();
    }
}

#[test]
fn uniqueness_certificate_for_equal_transfers() {
    let (_, t) = massey_transfer(PivotRule::First, false);
    let cert = certify_uniqueness(&t.morphism, &t.morphism, &TransferOptions::default()).unwrap();
    cert.verify().unwrap();
}

#[test]
fn uniqueness_for_conjugated_structure() {
    // a₂ = P·a₁·(P⁻¹)^{⊗k} for a random automorphism P, with e₂ = e₁∘P⁻¹.
    let (b, t1) = massey_transfer(PivotRule::First, false);
    let a1 = t1.algebra.clone();
    let mut rg = rng(77);
    let (p, pinv) = random_automorphism(&mut rg, a1.module());
    let pinv1 = MultiMap::unary(&pinv);
    let higher = a1.mus()[1..].iter().map(|m| precompose_power(&m.then(&p), &pinv1, m.basis())).collect();
    let a2 = Arc::new(AInfAlgebra::new(a1.complex().clone(), higher, None).unwrap());
    assert_ne!(a2.mu(3), a1.mu(3));
    let eps = t1.morphism.phis().iter().map(|f| precompose_power(f, &pinv1, f.basis())).collect();
    let e2 = AInfMorphism::new(&a2, &b, eps).unwrap();
    let cert = certify_uniqueness(&t1.morphism, &e2, &TransferOptions::default()).unwrap();
    cert.verify().unwrap();
}

#[test]
fn arity_cap_verifies_truncation() {
    let b = Arc::new(massey(q()));
    let h = homology_section(b.complex(), b.unit());
    let opts = TransferOptions { max_arity: Some(3), ..TransferOptions::default() };
    let t = transfer(&b, &h.complex, &h.section, &opts).unwrap();
    assert_eq!(t.algebra.arity_bound(), 3);
    let opts = TransferOptions { max_arity: Some(8), ..TransferOptions::default() };
    let t = transfer(&b, &h.complex, &h.section, &opts).unwrap();
    assert!(t.algebra.mus()[6..].iter().all(|m| m.is_zero()));
}
