use std::sync::Arc;

use ainf_core::aimod::*;
use ainf_core::ainfty::{compose, multi_hom_differential, AInfAlgebra, AInfMorphism};
use ainf_core::chaincx::{ChainComplex, GradedMap};
use ainf_core::fixtures::{exterior, ground_field, massey, random_complex, random_map, rng};
use ainf_core::signs::{module_square_component, shift_to_bar, unshift_from_bar, MultiMap, ShiftKind};
use ainf_core::transfer::{homology_section, transfer, TransferOptions};
use ainf_core::{Field, PivotRule};
use rand::Rng;

fn q() -> Field {
    Field::Rational
}

fn f5() -> Field {
    Field::prime(5).unwrap()
}

/// Random module-shaped tables `A^{⊗(k−1)} ⊗ S → T` for `2 ≤ k ≤ n`.
fn random_module_table(rg: &mut impl Rng, a: &ChainComplex, s: &ChainComplex, t: &ChainComplex, n: usize, deg: impl Fn(usize) -> i32) -> Vec<MultiMap> {
    (2..=n)
        .map(|k| {
            let basis = module_basis(a.module(), s.module(), k);
            MultiMap::new(&basis, random_map(rg, basis.module(), t.module(), deg(k))).unwrap()
        })
        .collect()
}

fn free(a: AInfAlgebra) -> Arc<AInfModule> {
    Arc::new(AInfModule::free(&Arc::new(a)))
}

struct Random {
    m: Arc<AInfModule>,
    n: Arc<AInfModule>,
    rho: AInfModuleMorphism,
    pi: AInfModuleMorphism,
    tau: AInfModuleHomotopy,
}

/// Arbitrary tables (no identities imposed) over a random algebra table.
fn random_tables(seed: u64, k: usize) -> Random {
    let mut rg = rng(seed);
    let ca = random_complex(&mut rg, q(), (-1, 1), 2, false);
    let cm = random_complex(&mut rg, q(), (-1, 1), 2, false);
    let cn = random_complex(&mut rg, q(), (-1, 1), 2, false);
    let higher: Vec<MultiMap> = (2..=k)
        .map(|j| {
            let basis = Arc::new(ainf_core::signs::TensorBasis::power(ca.module(), j));
            MultiMap::new(&basis, random_map(&mut rg, basis.module(), ca.module(), j as i32 - 2)).unwrap()
        })
        .collect();
    let a = Arc::new(AInfAlgebra::new_unchecked(ca.clone(), higher, None).unwrap());
    let m = Arc::new(AInfModule::new_unchecked(&a, cm.clone(), random_module_table(&mut rg, &ca, &cm, &cm, k, |j| j as i32 - 2), false).unwrap());
    let n = Arc::new(AInfModule::new_unchecked(&a, cn.clone(), random_module_table(&mut rg, &ca, &cn, &cn, k, |j| j as i32 - 2), false).unwrap());
    let morphism = |rg: &mut rand_chacha::ChaCha8Rng| {
        let mut rhos = vec![MultiMap::unary(&random_map(rg, cm.module(), cn.module(), 0))];
        rhos.extend(random_module_table(rg, &ca, &cm, &cn, k, |j| j as i32 - 1));
        AInfModuleMorphism::new_unchecked(&m, &n, rhos).unwrap()
    };
    let rho = morphism(&mut rg);
    let pi = morphism(&mut rg);
    let mut taus = vec![MultiMap::unary(&random_map(&mut rg, cm.module(), cn.module(), 1))];
    taus.extend(random_module_table(&mut rg, &ca, &cm, &cn, k, |j| j as i32));
    let tau = AInfModuleHomotopy::new_unchecked(&rho, &pi, taus).unwrap();
    Random { m, n, rho, pi, tau }
}

#[test]
fn free_modules_verify() {
    for a in [ground_field(q()), exterior(q()), massey(q()), massey(f5())] {
        let m = free(a);
        m.verify(m.complete_bound()).unwrap();
        assert!(m.is_unital());
        assert!(module_defect(&m, 1).is_zero());
    }
}

#[test]
fn shifted_module_square_matches_defect() {
    for seed in 0..4 {
        let r = random_tables(seed, 4);
        let ma: Vec<MultiMap> = r.m.base().mus().iter().map(|m| shift_to_bar(m, ShiftKind::Multiplication)).collect();
        let mm: Vec<MultiMap> = r.m.mus().iter().map(|m| shift_to_bar(m, ShiftKind::Module)).collect();
        for k in 1..=4 {
            let c = unshift_from_bar(&module_square_component(&ma, &mm, k), ShiftKind::Module);
            assert_eq!(c, module_defect(&r.m, k), "seed {seed} k {k}");
            assert_eq!(unshift_from_bar(&mm[k - 1], ShiftKind::Module), r.m.mus()[k - 1]);
        }
    }
}

#[test]
fn identity_is_neutral_and_composition_associative() {
    for seed in 0..3 {
        let r = random_tables(seed, 3);
        let id_m = AInfModuleMorphism::identity(&r.m);
        let id_n = AInfModuleMorphism::identity(&r.n);
        assert_eq!(compose_module(&id_n, &r.rho).unwrap().rhos(), r.rho.rhos());
        assert_eq!(compose_module(&r.rho, &id_m).unwrap().rhos(), r.rho.rhos());
        let mut rg = rng(40 + seed);
        let ca = r.m.base().complex().clone();
        let mut endo = || {
            let mut rhos = vec![MultiMap::unary(&random_map(&mut rg, r.n.module(), r.n.module(), 0))];
            rhos.extend(random_module_table(&mut rg, &ca, r.n.complex(), r.n.complex(), 3, |j| j as i32 - 1));
            AInfModuleMorphism::new_unchecked(&r.n, &r.n, rhos).unwrap()
        };
        let (p, s) = (endo(), endo());
        let left = compose_module(&compose_module(&s, &p).unwrap(), &r.rho).unwrap();
        let right = compose_module(&s, &compose_module(&p, &r.rho).unwrap()).unwrap();
        assert_eq!(left.rhos(), right.rhos());
    }
}

#[test]
fn first_defects_expand_to_differentials() {
    let r = random_tables(7, 3);
    let d = module_defect(&r.m, 1);
    let dm = r.m.complex().differential();
    assert_eq!(d.map(), &dm.compose(dm));
    let e = module_morphism_defect(&r.rho, 1);
    let dn = r.n.complex().differential();
    assert_eq!(e.map(), &r.rho.linear().compose(dm).sub(&dn.compose(r.rho.linear())));
    let h = module_homotopy_defect(&r.tau, 1);
    let t1 = r.tau.taus()[0].map();
    let expected = r.rho.linear().sub(r.pi.linear()).sub(&t1.compose(dm)).sub(&dn.compose(t1));
    assert_eq!(h.map(), &expected);
    let zero = AInfModuleHomotopy::zero(&r.rho, 3);
    for k in 1..=3 {
        assert!(module_homotopy_defect(&zero, k).is_zero());
    }
}

#[test]
fn dg_module_with_vanishing_higher_action() {
    // `A ⊕ A` over the Massey DGA with the diagonal action.
    let b = Arc::new(massey(q()));
    let (cx, inc, proj) = ainf_core::fixtures::direct_sum(&[b.complex(), b.complex()]);
    let basis = module_basis(b.module(), cx.module(), 2);
    let mu2 = b.mu(2).unwrap();
    let (inc, proj): (Vec<MultiMap>, Vec<MultiMap>) = (inc.iter().map(MultiMap::unary).collect(), proj.iter().map(MultiMap::unary).collect());
    let act = ainf_core::signs::tabulate(&basis, cx.module(), 0, None, |x, sink| {
        for (i, p) in inc.iter().zip(&proj) {
            for (y, v) in p.eval(&[x[1]]).iter() {
                for (z, w) in mu2.eval(&[x[0], y]).iter() {
                    for (t, u) in i.eval(&[z]).iter() {
                        sink.add(t, &(&(v * w) * u));
                    }
                }
            }
        }
    });
    let m = Arc::new(AInfModule::new(&b, cx, vec![act], true).unwrap());
    m.verify(m.complete_bound()).unwrap();
    let hs = homology_section(m.complex(), None);
    let t = transfer_module(&m, &hs.complex, &hs.section, &TransferOptions::default()).unwrap();
    t.module.verify(t.module.complete_bound()).unwrap();
}

#[test]
fn transfer_free_massey_to_its_homology() {
    for field in [q(), f5()] {
        let m = free(massey(field));
        let hs = homology_section(m.complex(), None);
        let t = transfer_module(&m, &hs.complex, &hs.section, &TransferOptions::default()).unwrap();
        t.module.verify(t.module.complete_bound()).unwrap();
        t.morphism.verify(t.morphism.complete_bound()).unwrap();
        assert!(t.module.mus().iter().skip(2).any(|m| !m.is_zero()));
    }
}

#[test]
fn identity_transfer_of_free_module() {
    let m = free(exterior(q()));
    let id = GradedMap::identity(m.module());
    let t = transfer_module(&m, m.complex(), &id, &TransferOptions::default()).unwrap();
    assert_eq!(t.module.mus()[1], m.mus()[1]);
    t.module.verify(t.module.complete_bound()).unwrap();
}

#[test]
fn acyclic_module_transfers_to_zero() {
    let b = Arc::new(massey(q()));
    let mut rg = rng(3);
    let cm = random_complex(&mut rg, q(), (0, 3), 2, true);
    let m = Arc::new(AInfModule::trivial(&b, cm.clone()));
    let zero = ChainComplex::with_zero_differential(&ainf_core::chaincx::GradedModule::zero(q()));
    let e = GradedMap::zero(zero.module(), cm.module(), 0);
    let t = transfer_module(&m, &zero, &e, &TransferOptions::default()).unwrap();
    assert!(t.module.mus().iter().all(|m| m.is_zero()));
}

#[test]
fn surjective_strict_module_transfer() {
    let m = free(massey(q()));
    let id = GradedMap::identity(m.module());
    let opts = TransferOptions { surjective_strict: true, ..TransferOptions::default() };
    let t = transfer_module(&m, m.complex(), &id, &opts).unwrap();
    assert!(t.morphism.is_strict());
    t.morphism.verify(t.morphism.complete_bound()).unwrap();
}

#[test]
fn unital_module_transfer() {
    for field in [q(), f5()] {
        let m = free(massey(field));
        let hs = homology_section(m.complex(), Some(0));
        let t = transfer_module_unital(&m, &hs.complex, &hs.section, &TransferOptions::default()).unwrap();
        assert!(t.module.is_unital());
        t.module.verify(t.module.complete_bound()).unwrap();
        t.morphism.verify_unital(6).unwrap();
        for d in module_unit_defects(&t.module, 6) {
            assert!(d.map.is_zero(), "k {} u {}", d.k, d.u);
        }
    }
}

#[test]
fn non_unital_module_is_rejected_in_unital_mode() {
    let b = Arc::new(massey(q()));
    let m = Arc::new(AInfModule::trivial(&b, b.complex().clone()));
    let hs = homology_section(m.complex(), None);
    assert!(transfer_module_unital(&m, &hs.complex, &hs.section, &TransferOptions::default()).is_err());
}

#[test]
fn restriction_along_identity_and_transfer() {
    let b = Arc::new(massey(q()));
    let m = Arc::new(AInfModule::free(&b));
    let id = AInfMorphism::identity(&b);
    let r = restrict_module(&id, &m, 4).unwrap();
    assert_eq!(&r.mus()[..2], m.mus());
    assert!(r.mus()[2..].iter().all(|m| m.is_zero()));
    let hs = homology_section(b.complex(), Some(0));
    let t = transfer(&b, &hs.complex, &hs.section, &TransferOptions::default()).unwrap();
    let r = restrict_module(&t.morphism, &m, 5).unwrap();
    r.verify(5).unwrap();
    assert!(!r.is_unital());
    let t = ainf_core::transfer::transfer_unital(&b, &hs.complex, hs.unit.unwrap(), &hs.section, &TransferOptions::default()).unwrap();
    let r = restrict_module(&t.morphism, &m, 5).unwrap();
    r.verify(5).unwrap();
    assert!(r.is_unital());
}

#[test]
fn restriction_along_strict_morphism() {
    let a = Arc::new(exterior(q()));
    let m = Arc::new(AInfModule::free(&a));
    let scale = ainf_core::ainfty::linear_map(a.module(), a.module(), 0, |j| vec![(j, q().from_i64(if j == 1 { 2 } else { 1 }))]);
    let phi = AInfMorphism::strict(&a, &a, &scale).unwrap();
    phi.verify(3).unwrap();
    let r = restrict_module(&phi, &m, 3).unwrap();
    // μ₂(φ₁ ⊗ id): x·1 ↦ 2x, 1·x ↦ x.
    assert_eq!(r.mu(2).unwrap().eval(&[1, 0]).iter().map(|(i, v)| (i, v.clone())).collect::<Vec<_>>(), vec![(1, q().from_i64(2))]);
    assert_eq!(r.mu(2).unwrap().eval(&[0, 1]).iter().map(|(i, v)| (i, v.clone())).collect::<Vec<_>>(), vec![(1, q().one())]);
    assert!(r.mu(3).unwrap().is_zero());
}

fn massey_transfers() -> (Arc<AInfAlgebra>, ainf_core::transfer::Transferred, ainf_core::transfer::Transferred) {
    let b = Arc::new(massey(q()));
    let hs = homology_section(b.complex(), Some(0));
    let t1 = transfer(&b, &hs.complex, &hs.section, &TransferOptions::with_rule(PivotRule::First)).unwrap();
    let t2 = transfer(&b, &hs.complex, &hs.section, &TransferOptions::with_rule(PivotRule::Last)).unwrap();
    (b, t1, t2)
}

#[test]
fn restriction_is_functorial() {
    let (b, t1, t2) = massey_transfers();
    let lift = ainf_core::transfer::lift_morphism(&t1.morphism, &t2.morphism, &TransferOptions::default()).unwrap();
    let m = Arc::new(AInfModule::free(&b));
    let k = 4;
    let comp = compose(&t1.morphism, &lift.phi).unwrap();
    let direct = restrict_module(&comp, &m, k).unwrap();
    let r1 = restrict_module(&t1.morphism, &m, k).unwrap();
    let iterated = restrict_module(&lift.phi, &r1, k).unwrap();
    assert_eq!(direct.mus(), iterated.mus());
}

fn module_fixtures() -> (Arc<AInfModule>, ModuleTransferred, ModuleTransferred, ModuleLifted) {
    let m = free(massey(q()));
    let hs = homology_section(m.complex(), None);
    let t1 = transfer_module(&m, &hs.complex, &hs.section, &TransferOptions::with_rule(PivotRule::First)).unwrap();
    let t2 = transfer_module(&m, &hs.complex, &hs.section, &TransferOptions::with_rule(PivotRule::Last)).unwrap();
    let l = lift_module_morphism(&t1.morphism, &t2.morphism, &TransferOptions::default()).unwrap();
    (m, t1, t2, l)
}

#[test]
fn lift_between_module_transfers() {
    let (_, t1, _, l) = module_fixtures();
    l.rho.verify(l.rho.complete_bound()).unwrap();
    l.tau.verify(l.tau.complete_bound()).unwrap();
    let comp = compose_module(&t1.morphism, &l.rho).unwrap();
    comp.verify(comp.complete_bound()).unwrap();
}

#[test]
fn lift_along_identity_and_known_composite() {
    let (m, t1, _, _) = module_fixtures();
    let id = AInfModuleMorphism::identity(&m);
    let l = lift_module_morphism(&id, &t1.morphism, &TransferOptions::default()).unwrap();
    l.tau.verify(l.tau.complete_bound()).unwrap();
    let g = t1.module.clone();
    let id_g = AInfModuleMorphism::identity(&g);
    let known = compose_module(&t1.morphism, &id_g).unwrap();
    let l = lift_module_morphism(&t1.morphism, &known, &TransferOptions::default()).unwrap();
    l.rho.verify(l.rho.complete_bound()).unwrap();
    l.tau.verify(l.tau.complete_bound()).unwrap();
}

#[test]
fn unital_module_lift() {
    let m = free(massey(q()));
    let hs = homology_section(m.complex(), Some(0));
    let t1 = transfer_module_unital(&m, &hs.complex, &hs.section, &TransferOptions::with_rule(PivotRule::First)).unwrap();
    let t2 = transfer_module_unital(&m, &hs.complex, &hs.section, &TransferOptions::with_rule(PivotRule::Last)).unwrap();
    let l = lift_module_morphism_unital(&t1.morphism, &t2.morphism, &TransferOptions::default()).unwrap();
    l.rho.verify_unital(6).unwrap();
    l.tau.verify_unital(6).unwrap();
}

#[test]
fn obstruction_criteria_on_transferred_module() {
    let (m, t1, _, _) = module_fixtures();
    let g = &t1.module;
    let e = &t1.morphism;
    for n in 1..=3 {
        let mut facs = vec![g.base().complex(); n];
        facs.push(g.complex());
        let obs = module_obstruction(g, n).unwrap();
        let d = multi_hom_differential(g.mu(n + 1).unwrap(), &facs, g.complex()).unwrap();
        assert_eq!(obs.map(), &d.neg(), "module n {n}");
        let obs = module_morphism_obstruction(e, n).unwrap();
        let de = multi_hom_differential(e.rho(n + 1).unwrap(), &facs, m.complex()).unwrap();
        let basis = g.basis(n + 1);
        let lin = MultiMap::unary(e.linear());
        let mu = m.mu(n + 1).cloned().unwrap_or_else(|| MultiMap::zero(&m.basis(n + 1), m.module(), n as i32 - 1));
        let act = ainf_core::signs::tabulate(&basis, m.module(), n as i32 - 1, None, |x, sink| {
            let mut y = x.to_vec();
            for (i, v) in lin.eval(&[x[n]]).iter() {
                y[n] = i;
                sink.add_column(mu.eval(&y), v);
            }
        });
        let rhs = de.add(act.map()).sub(g.mu(n + 1).unwrap().then(e.linear()).map());
        assert_eq!(obs.map(), &rhs, "morphism n {n}");
    }
}

#[test]
fn obstruction_lemmas_hold_on_verified_fixtures() {
    let (m, t1, _, l) = module_fixtures();
    let (b, ta, _) = massey_transfers();
    let mb = Arc::new(AInfModule::free(&b));
    let r = restrict_module(&ta.morphism, &mb, 4).unwrap();
    for n in 1..=3 {
        for x in [&*m, &*t1.module, &r] {
            assert!(lemma_obs_mod_del(x, n).unwrap().is_zero(), "del n {n}");
        }
        assert!(lemma_obs_mod_mor(&t1.morphism, n).unwrap().is_zero(), "mor n {n}");
        assert!(lemma_obs_mod_mor(&l.rho, n).unwrap().is_zero(), "mor rho n {n}");
        assert!(lemma_obs_mod_comp(&t1.morphism, &l.rho, n).unwrap().is_zero(), "comp n {n}");
        assert!(lemma_obs_mod_hpty(&l.tau, n).unwrap().is_zero(), "hpty n {n}");
        assert!(lemma_obs_mod_rest(&ta.morphism, &mb, &r, n).unwrap().is_zero(), "rest n {n}");
    }
}

#[test]
fn combined_transfer_on_massey() {
    let b = Arc::new(massey(q()));
    let m = Arc::new(AInfModule::free(&b));
    let ha = homology_section(b.complex(), Some(0));
    let hm = homology_section(m.complex(), Some(0));
    for unit in [None, ha.unit] {
        let p = transfer_pair(&b, &m, &ha.complex, &ha.section, &hm.complex, &hm.section, unit, &TransferOptions::default()).unwrap();
        let g = &p.module.module;
        assert!(Arc::ptr_eq(g.base(), &p.algebra.algebra));
        g.verify(g.complete_bound()).unwrap();
        p.module.morphism.verify(p.module.morphism.complete_bound()).unwrap();
        p.restricted.verify(p.restricted.arity_bound()).unwrap();
        assert_eq!(g.is_unital(), unit.is_some());
        if unit.is_some() {
            p.module.morphism.verify_unital(6).unwrap();
        }
    }
}

#[test]
fn combined_transfer_identities_and_zero_module() {
    let b = Arc::new(exterior(q()));
    let m = Arc::new(AInfModule::free(&b));
    let id = GradedMap::identity(b.module());
    let p = transfer_pair(&b, &m, b.complex(), &id, m.complex(), &id, None, &TransferOptions::default()).unwrap();
    assert_eq!(p.algebra.algebra.mus()[1], b.mus()[1]);
    assert_eq!(p.module.module.mus()[1], m.mus()[1]);
    let mut rg = rng(11);
    let cm = random_complex(&mut rg, q(), (0, 2), 2, true);
    let z = Arc::new(AInfModule::trivial(&b, cm.clone()));
    let zero = ChainComplex::with_zero_differential(&ainf_core::chaincx::GradedModule::zero(q()));
    let e = GradedMap::zero(zero.module(), cm.module(), 0);
    let p = transfer_pair(&b, &z, b.complex(), &id, &zero, &e, None, &TransferOptions::default()).unwrap();
    assert!(p.module.module.mus().iter().all(|m| m.is_zero()));
}

mod props {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn module_shift_round_trips_and_matches(seed in any::<u64>()) {
            let r = random_tables(seed, 3);
            let ma: Vec<MultiMap> = r.m.base().mus().iter().map(|m| shift_to_bar(m, ShiftKind::Multiplication)).collect();
            let mm: Vec<MultiMap> = r.m.mus().iter().map(|m| shift_to_bar(m, ShiftKind::Module)).collect();
            for k in 1..=3 {
                prop_assert_eq!(unshift_from_bar(&module_square_component(&ma, &mm, k), ShiftKind::Module), module_defect(&r.m, k));
            }
        }

        #[test]
        fn module_composition_is_associative(seed in any::<u64>()) {
            let r = random_tables(seed, 3);
            let mut rg = rng(seed ^ 0xa5);
            let ca = r.m.base().complex().clone();
            let mut endo = || {
                let mut rhos = vec![MultiMap::unary(&random_map(&mut rg, r.n.module(), r.n.module(), 0))];
                rhos.extend(random_module_table(&mut rg, &ca, r.n.complex(), r.n.complex(), 3, |j| j as i32 - 1));
                AInfModuleMorphism::new_unchecked(&r.n, &r.n, rhos).unwrap()
            };
            let (p, s) = (endo(), endo());
            let left = compose_module(&compose_module(&s, &p).unwrap(), &r.rho).unwrap();
            let right = compose_module(&s, &compose_module(&p, &r.rho).unwrap()).unwrap();
            prop_assert_eq!(left.rhos(), right.rhos());
        }
    }
}
