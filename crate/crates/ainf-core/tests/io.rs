use std::sync::Arc;

use ainf_core::aimod::{transfer_module, transfer_pair, AInfModule, AInfModuleHomotopy, AInfModuleMorphism};
use ainf_core::ainfty::{AInfHomotopy, AInfMorphism};
use ainf_core::chaincx::ChainComplex;
use ainf_core::fixtures::{exterior, massey, random_square_zero_dga, rng};
use ainf_core::io::{Document, PairDocument};
use ainf_core::transfer::{certify_uniqueness, homology_section, lift_morphism, transfer, transfer_unital, TransferOptions};
use ainf_core::{Error, Field, PivotRule};

fn q() -> Field {
    Field::Rational
}

fn round_trip(doc: &Document) -> Document {
    let s = doc.to_canonical_string();
    let back = Document::parse_str(&s).unwrap();
    assert_eq!(back.kind(), doc.kind());
    assert_eq!(back.to_canonical_string(), s, "{} document is not stable", doc.kind());
    back
}

#[test]
fn complexes_and_algebras_round_trip() {
    for field in [q(), Field::prime(5).unwrap()] {
        let a = Arc::new(massey(field));
        let Document::Complex(c) = round_trip(&Document::Complex(a.complex().clone())) else { panic!() };
        assert_eq!(&c, a.complex());
        let Document::Algebra(b) = round_trip(&Document::Algebra(a.clone())) else { panic!() };
        assert_eq!(*b, *a);
        assert_eq!(b.unit(), a.unit());
    }
    let mut rg = rng(5);
    for _ in 0..5 {
        let a = Arc::new(random_square_zero_dga(&mut rg, q(), 5));
        let Document::Algebra(b) = round_trip(&Document::Algebra(a.clone())) else { panic!() };
        assert_eq!(*b, *a);
    }
}

#[test]
fn transfer_outputs_round_trip() {
    let b = Arc::new(massey(q()));
    let hs = homology_section(b.complex(), Some(0));
    let t1 = transfer_unital(&b, &hs.complex, 0, &hs.section, &TransferOptions::with_rule(PivotRule::First)).unwrap();
    let t2 = transfer(&b, &hs.complex, &hs.section, &TransferOptions::with_rule(PivotRule::Last)).unwrap();
    let Document::Morphism(m) = round_trip(&Document::Morphism(t1.morphism.clone())) else { panic!() };
    assert_eq!(m, t1.morphism);
    m.verify(m.complete_bound()).unwrap();
    let l = lift_morphism(&t1.morphism, &t2.morphism, &TransferOptions::default()).unwrap();
    let Document::Lift(back) = round_trip(&Document::Lift(l.clone())) else { panic!() };
    assert_eq!(back.phi, l.phi);
    assert_eq!(back.sigma, l.sigma);
    let Document::Homotopy(h) = round_trip(&Document::Homotopy(l.sigma.clone())) else { panic!() };
    assert_eq!(h, l.sigma);
    let c = certify_uniqueness(&t1.morphism, &t2.morphism, &TransferOptions::default()).unwrap();
    let Document::Uniqueness(back) = round_trip(&Document::Uniqueness(c)) else { panic!() };
    back.verify().unwrap();
    let zero = AInfHomotopy::zero(&AInfMorphism::identity(&b), 2);
    round_trip(&Document::Homotopy(zero));
}

#[test]
fn module_documents_round_trip() {
    let b = Arc::new(massey(q()));
    let m = Arc::new(AInfModule::free(&b));
    let Document::Module(back) = round_trip(&Document::Module(m.clone())) else { panic!() };
    assert_eq!(*back, *m);
    let hs = homology_section(m.complex(), None);
    let t = transfer_module(&m, &hs.complex, &hs.section, &TransferOptions::default()).unwrap();
    let Document::ModuleMorphism(r) = round_trip(&Document::ModuleMorphism(t.morphism.clone())) else { panic!() };
    assert_eq!(r, t.morphism);
    let h = AInfModuleHomotopy::zero(&AInfModuleMorphism::identity(&m), 2);
    round_trip(&Document::ModuleHomotopy(h));
    let ha = homology_section(b.complex(), Some(0));
    let p = transfer_pair(&b, &m, &ha.complex, &ha.section, &hs.complex, &hs.section, Some(0), &TransferOptions::default()).unwrap();
    let doc = Document::Pair(PairDocument { algebra: p.algebra.morphism, restricted: p.restricted, module: p.module.morphism });
    round_trip(&doc);
}

#[test]
fn map_documents_round_trip() {
    let b = massey(q());
    let hs = homology_section(b.complex(), None);
    let doc = Document::Map { source: hs.complex.clone(), target: b.complex().clone(), map: hs.section.clone() };
    let Document::Map { map, .. } = round_trip(&doc) else { panic!() };
    assert_eq!(map, hs.section);
}

#[test]
fn canonical_text_is_sorted_and_exact() {
    let a = exterior(q()).rescaled(|_| q().parse("-2/4").unwrap());
    let s = Document::Algebra(Arc::new(a)).to_canonical_string();
    assert!(s.contains("\"-1/2\""));
    let (c, d, k, m) = (s.find("\"complex\"").unwrap(), s.find("\"kind\"").unwrap(), s.find("\"mu\"").unwrap(), s.find("\"unit\"").unwrap());
    assert!(c < d && d < k && k < m);
}

fn parse_err(s: &str) -> String {
    match Document::parse_str(s) {
        Err(Error::Parse(msg)) => msg,
        other => panic!("expected a parse error, got {other:?}"),
    }
}

#[test]
fn malformed_json_reports_position() {
    let msg = parse_err("{\n  \"kind\": \"complex\",\n  oops\n}");
    assert!(msg.contains("line 3"), "{msg}");
}

#[test]
fn schema_errors_name_the_location() {
    let c = ChainComplex::from_i64(q(), &[(0, 1), (1, 1)], &[(1, &[&[1]])]).unwrap();
    let good = Document::Complex(c).to_canonical_string();
    let msg = parse_err(&good.replace("\"Q\"", "\"R\""));
    assert!(msg.contains("$.field.type"), "{msg}");
    let msg = parse_err(&good.replace("[\"1\"]", "[\"1\", \"0\"]"));
    assert!(msg.contains("$.differential.1.0"), "{msg}");
    let msg = parse_err(&good.replace("\"complex\"", "\"algbra\""));
    assert!(msg.contains("unknown kind"), "{msg}");
    let msg = parse_err("{\"kind\": \"complex\"}");
    assert!(msg.contains("missing field \"field\""), "{msg}");
    let msg = parse_err(&good.replace("[\"1\"]", "[\"x\"]"));
    assert!(msg.contains("$.differential.1.0.0"), "{msg}");
}

#[test]
fn non_complex_input_names_the_degree() {
    let text = r#"{"kind": "complex", "field": {"type": "Q"}, "degrees": {"0": 1, "1": 1, "2": 1},
        "differential": {"1": [["1"]], "2": [["1"]]}}"#;
    let msg = parse_err(text);
    assert!(msg.contains("degree 2"), "{msg}");
}

#[test]
fn inconsistent_table_is_rejected() {
    let a = Arc::new(massey(q()));
    let s = Document::Algebra(a).to_canonical_string();
    let msg = parse_err(&s.replacen("\"degree\": 0", "\"degree\": 1", 1));
    assert!(msg.contains("$.mu.2.degree"), "{msg}");
}
