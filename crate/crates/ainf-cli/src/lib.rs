//! Commands behind the `ainf` binary. Each command returns the lines it
//! prints and, where it produces one, the output document.

use std::fmt;
use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use ainf_core::aimod::{transfer_module, transfer_module_unital, transfer_pair, AInfModule, AInfModuleHomotopy, AInfModuleMorphism};
use ainf_core::ainfty::{AInfAlgebra, AInfHomotopy, AInfMorphism};
use ainf_core::chaincx::{ChainComplex, GradedMap};
use ainf_core::fixtures::{massey, random_square_zero_dga, rng, triple_product_outside_indeterminacy};
use ainf_core::io::{Document, PairDocument};
use ainf_core::transfer::{certify_uniqueness, homology_section, lift_morphism, lift_morphism_unital, transfer, transfer_unital, Lifted, TransferOptions, UniquenessCertificate};
use ainf_core::{Error, Field, PivotRule};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFICATION: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_PRECONDITION: i32 = 3;
pub const EXIT_CERTIFICATE: i32 = 4;

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Parse(_) | Error::NotComplex(_) => EXIT_PARSE,
        Error::Verification(_) => EXIT_VERIFICATION,
        Error::Precondition(_) | Error::Mismatch(_) | Error::NotChainMap(_) | Error::NotQuasiIso(_) => EXIT_PRECONDITION,
        Error::Certificate(_) | Error::Lin(_) => EXIT_CERTIFICATE,
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> CliError {
        CliError { code: exit_code(&e), message: e.to_string() }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// Flags shared by every command.
#[derive(Clone, Debug, Default)]
pub struct Options {
    pub field: Option<Field>,
    pub max_arity: Option<usize>,
    pub pivot: PivotRule,
    pub unital: bool,
    pub homology: bool,
    pub surjective_strict: bool,
    pub pair: bool,
    pub seed: u64,
}

impl Options {
    pub fn transfer_options(&self) -> TransferOptions {
        TransferOptions { rule: self.pivot, max_arity: self.max_arity, surjective_strict: self.surjective_strict, certify: true }
    }
}

/// What a command prints, its output document and its exit code.
#[derive(Debug)]
pub struct Outcome {
    pub lines: Vec<String>,
    pub document: Option<Document>,
    pub code: i32,
}

pub fn parse_field(s: &str) -> std::result::Result<Field, String> {
    match s {
        "Q" => Ok(Field::Rational),
        _ => {
            let p = s.strip_prefix("Fp:").ok_or_else(|| format!("expected Q or Fp:<p>, got {s:?}"))?;
            let p: u64 = p.parse().map_err(|_| format!("bad prime {p:?}"))?;
            Field::prime(p).map_err(|e| e.to_string())
        }
    }
}

pub fn parse_pivot(s: &str) -> std::result::Result<PivotRule, String> {
    match s {
        "first" => Ok(PivotRule::First),
        "last" => Ok(PivotRule::Last),
        _ => Err(format!("expected first or last, got {s:?}")),
    }
}

pub fn read_document(path: &Path) -> CliResult<Document> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError { code: EXIT_PARSE, message: format!("{}: {e}", path.display()) })?;
    Document::parse_str(&text).map_err(|e| CliError { code: exit_code(&e), message: format!("{}: {e}", path.display()) })
}

fn document_field(doc: &Document) -> Field {
    match doc {
        Document::Complex(c) => c.field(),
        Document::Map { map, .. } => map.field(),
        Document::Algebra(a) => a.field(),
        Document::Morphism(f) => f.source().field(),
        Document::Homotopy(h) => h.phi().source().field(),
        Document::Lift(l) => l.phi.source().field(),
        Document::Uniqueness(u) => u.phi.phi.source().field(),
        Document::Module(m) => m.field(),
        Document::ModuleMorphism(r) => r.source().field(),
        Document::ModuleHomotopy(h) => h.rho().source().field(),
        Document::Pair(p) => p.algebra.source().field(),
    }
}

fn load(path: &Path, opts: &Options) -> CliResult<Document> {
    let doc = read_document(path)?;
    if let Some(f) = opts.field {
        let g = document_field(&doc);
        if f != g {
            return Err(Error::Precondition(format!("{} is over {}, not {}", path.display(), g.name(), f.name())).into());
        }
    }
    Ok(doc)
}

fn wrong_kind(path: &Path, doc: &Document, wanted: &str) -> CliError {
    CliError { code: EXIT_PARSE, message: format!("{}: expected a {wanted} document, found {}", path.display(), doc.kind()) }
}

fn load_algebra(path: &Path, opts: &Options) -> CliResult<Arc<AInfAlgebra>> {
    match load(path, opts)? {
        Document::Algebra(a) => Ok(a),
        d => Err(wrong_kind(path, &d, "algebra")),
    }
}

fn load_morphism(path: &Path, opts: &Options) -> CliResult<AInfMorphism> {
    match load(path, opts)? {
        Document::Morphism(f) => Ok(f),
        d => Err(wrong_kind(path, &d, "morphism")),
    }
}

fn load_module(path: &Path, opts: &Options) -> CliResult<Arc<AInfModule>> {
    match load(path, opts)? {
        Document::Module(m) => Ok(m),
        d => Err(wrong_kind(path, &d, "module")),
    }
}

fn load_map(path: &Path, opts: &Options, target: &ChainComplex) -> CliResult<(ChainComplex, GradedMap)> {
    match load(path, opts)? {
        Document::Map { source, target: t, map } => {
            if &t != target {
                return Err(Error::Mismatch(format!("{}: the map does not land in the given complex", path.display())).into());
            }
            Ok((source, map))
        }
        d => Err(wrong_kind(path, &d, "map")),
    }
}

/// One identity family of a document with its check result.
#[derive(Debug)]
pub struct Check {
    pub name: String,
    pub arity: usize,
    pub result: ainf_core::Result<()>,
}

fn push(checks: &mut Vec<Check>, name: &str, arity: usize, result: ainf_core::Result<()>) {
    checks.push(Check { name: name.to_string(), arity, result });
}

fn check_algebra(a: &AInfAlgebra, name: &str, checks: &mut Vec<Check>) {
    let k = a.complete_bound();
    push(checks, &format!("{name} algebra"), k, a.verify(k));
}

fn check_morphism(f: &AInfMorphism, name: &str, checks: &mut Vec<Check>) {
    check_algebra(f.source(), &format!("{name} source"), checks);
    check_algebra(f.target(), &format!("{name} target"), checks);
    let k = f.complete_bound();
    push(checks, &format!("{name} morphism"), k, f.verify(k));
    if f.source().unit().is_some() && f.target().unit().is_some() {
        push(checks, &format!("{name} morphism unit"), k, f.verify_unital(k));
    }
}

fn check_homotopy(h: &AInfHomotopy, name: &str, checks: &mut Vec<Check>) {
    check_morphism(h.phi(), &format!("{name} phi"), checks);
    check_morphism(h.psi(), &format!("{name} psi"), checks);
    let k = h.complete_bound();
    push(checks, &format!("{name} homotopy"), k, h.verify(k));
    if h.phi().source().unit().is_some() && h.phi().target().unit().is_some() {
        push(checks, &format!("{name} homotopy unit"), k, h.verify_unital(k));
    }
}

fn check_lift(l: &Lifted, name: &str, checks: &mut Vec<Check>) {
    check_morphism(&l.phi, &format!("{name} lift"), checks);
    check_homotopy(&l.sigma, &format!("{name} witness"), checks);
}

fn check_module(m: &AInfModule, name: &str, checks: &mut Vec<Check>) {
    check_algebra(m.base(), &format!("{name} base"), checks);
    let k = m.complete_bound();
    push(checks, &format!("{name} module"), k, m.verify(k));
}

fn check_module_morphism(r: &AInfModuleMorphism, name: &str, checks: &mut Vec<Check>) {
    check_module(r.source(), &format!("{name} source"), checks);
    check_module(r.target(), &format!("{name} target"), checks);
    let k = r.complete_bound();
    push(checks, &format!("{name} module morphism"), k, r.verify(k));
    if r.source().is_unital() && r.target().is_unital() {
        push(checks, &format!("{name} module morphism unit"), k, r.verify_unital(k));
    }
}

fn check_module_homotopy(h: &AInfModuleHomotopy, name: &str, checks: &mut Vec<Check>) {
    check_module_morphism(h.rho(), &format!("{name} rho"), checks);
    check_module_morphism(h.pi(), &format!("{name} pi"), checks);
    let k = h.complete_bound();
    push(checks, &format!("{name} module homotopy"), k, h.verify(k));
    if h.rho().source().is_unital() && h.rho().target().is_unital() {
        push(checks, &format!("{name} module homotopy unit"), k, h.verify_unital(k));
    }
}

/// Every identity the document claims, each up to the arity beyond which it
/// holds for degree or table-length reasons.
pub fn checks(doc: &Document) -> Vec<Check> {
    let mut out = Vec::new();
    match doc {
        Document::Complex(_) => {}
        Document::Map { source, target, map } => {
            let r = ainf_core::chaincx::is_chain_map(map, source, target).and_then(|ok| if ok { Ok(()) } else { Err(Error::Verification("not a chain map".into())) });
            push(&mut out, "chain map", 1, r);
        }
        Document::Algebra(a) => check_algebra(a, "the", &mut out),
        Document::Morphism(f) => check_morphism(f, "the", &mut out),
        Document::Homotopy(h) => check_homotopy(h, "the", &mut out),
        Document::Lift(l) => check_lift(l, "the", &mut out),
        Document::Uniqueness(u) => {
            check_lift(&u.phi, "phi", &mut out);
            check_lift(&u.psi, "psi", &mut out);
            check_lift(&u.chi, "chi", &mut out);
        }
        Document::Module(m) => check_module(m, "the", &mut out),
        Document::ModuleMorphism(r) => check_module_morphism(r, "the", &mut out),
        Document::ModuleHomotopy(h) => check_module_homotopy(h, "the", &mut out),
        Document::Pair(p) => {
            check_morphism(&p.algebra, "algebra", &mut out);
            check_module(&p.restricted, "restricted", &mut out);
            check_module_morphism(&p.module, "module", &mut out);
        }
    }
    for c in &mut out {
        c.name = c.name.trim_start_matches("the ").to_string();
    }
    out
}

fn report(doc: &Document) -> (Vec<String>, bool) {
    let cs = checks(doc);
    let mut lines = Vec::new();
    let mut ok = true;
    for c in &cs {
        match &c.result {
            Ok(()) => lines.push(format!("{}: ok (k ≤ {})", c.name, c.arity)),
            Err(e) => {
                ok = false;
                lines.push(format!("{}: FAILED: {e}", c.name));
            }
        }
    }
    if ok {
        let k = cs.iter().map(|c| c.arity).max().unwrap_or(0);
        lines.push(format!("all identities hold (k ≤ {k})"));
    }
    (lines, ok)
}

pub fn cmd_verify(path: &Path, opts: &Options) -> CliResult<Outcome> {
    let doc = load(path, opts)?;
    let (lines, ok) = report(&doc);
    Ok(Outcome { lines, document: None, code: if ok { EXIT_OK } else { EXIT_VERIFICATION } })
}

/// Serializes, reparses and re-verifies an output before handing it out.
fn emit(doc: Document, mut lines: Vec<String>) -> CliResult<Outcome> {
    let text = doc.to_canonical_string();
    let back = Document::parse_str(&text).map_err(|e| CliError { code: EXIT_CERTIFICATE, message: format!("output does not reparse: {e}") })?;
    if back.to_canonical_string() != text {
        return Err(CliError { code: EXIT_CERTIFICATE, message: "output is not stable under reparsing".into() });
    }
    for c in checks(&back) {
        if let Err(e) = c.result {
            return Err(CliError { code: EXIT_CERTIFICATE, message: format!("output fails to verify: {}: {e}", c.name) });
        }
    }
    lines.push(format!("output verifies ({})", doc.kind()));
    Ok(Outcome { lines, document: Some(doc), code: EXIT_OK })
}

/// A degree-zero basis element of the source mapped to the unit, if any.
fn preimage_of_unit(eps1: &GradedMap, b: &AInfAlgebra) -> Option<usize> {
    let u = b.unit()?;
    let field = b.field();
    (0..eps1.source().rank(0)).find(|&i| {
        let col = eps1.column(0, i);
        col.len() == 1 && col[0].0 == u && col[0].1 == field.one()
    })
}

fn transfer_algebra(b: &Arc<AInfAlgebra>, map: Option<&Path>, opts: &Options) -> CliResult<(ainf_core::transfer::Transferred, Vec<String>)> {
    let (a, eps1, unit) = source_and_map(b.complex(), b.unit(), map, opts)?;
    let to = opts.transfer_options();
    let t = if opts.unital {
        let b_unit = b.unit().ok_or_else(|| Error::Precondition("--unital needs an algebra with a unit".into()))?;
        let _ = b_unit;
        let u = match unit {
            Some(u) => u,
            None => preimage_of_unit(&eps1, b).ok_or_else(|| Error::Precondition("no source basis element maps to the unit".into()))?,
        };
        transfer_unital(b, &a, u, &eps1, &to)?
    } else {
        transfer(b, &a, &eps1, &to)?
    };
    let mut lines = vec![format!("transferred onto a complex of total rank {}", a.module().total_rank())];
    lines.push(format!("arity bound {}", t.morphism.arity_bound()));
    let nonzero: Vec<String> = t.algebra.mus().iter().enumerate().skip(2).filter(|(_, m)| !m.is_zero()).map(|(j, _)| (j + 1).to_string()).collect();
    lines.push(format!("nonzero higher operations: {}", if nonzero.is_empty() { "none".to_string() } else { nonzero.join(", ") }));
    if t.morphism.is_strict() {
        lines.push("the quasi-isomorphism is strict".into());
    }
    Ok((t, lines))
}

/// The source complex and `ε₁`, from `--homology` or a map document. The
/// third entry is the unit class when the homology section provides one.
fn source_and_map(target: &ChainComplex, unit: Option<usize>, map: Option<&Path>, opts: &Options) -> CliResult<(ChainComplex, GradedMap, Option<usize>)> {
    match (map, opts.homology) {
        (Some(_), true) => Err(Error::Precondition("give either --homology or --map, not both".into()).into()),
        (None, false) => Err(Error::Precondition("give --homology or --map".into()).into()),
        (None, true) => {
            let hs = homology_section(target, if opts.unital { unit } else { None });
            if opts.unital && unit.is_some() && hs.unit.is_none() {
                return Err(Error::Precondition("the unit is a boundary".into()).into());
            }
            Ok((hs.complex, hs.section, hs.unit))
        }
        (Some(p), false) => {
            let (a, eps1) = load_map(p, opts, target)?;
            Ok((a, eps1, None))
        }
    }
}

pub fn cmd_transfer(input: &Path, map: Option<&Path>, opts: &Options) -> CliResult<Outcome> {
    let b = load_algebra(input, opts)?;
    let (t, lines) = transfer_algebra(&b, map, opts)?;
    emit(Document::Morphism(t.morphism), lines)
}

pub fn cmd_lift(eps: &Path, psi: &Path, opts: &Options) -> CliResult<Outcome> {
    let e = load_morphism(eps, opts)?;
    let p = load_morphism(psi, opts)?;
    let to = opts.transfer_options();
    let l = if opts.unital { lift_morphism_unital(&e, &p, &to)? } else { lift_morphism(&e, &p, &to)? };
    let lines = vec![format!("lift of arity bound {}", l.phi.arity_bound())];
    emit(Document::Lift(l), lines)
}

pub fn cmd_uniqueness(e1: &Path, e2: &Path, opts: &Options) -> CliResult<Outcome> {
    let a = load_morphism(e1, opts)?;
    let b = load_morphism(e2, opts)?;
    let c: UniquenessCertificate = certify_uniqueness(&a, &b, &opts.transfer_options())?;
    c.verify()?;
    let lines = vec![format!("homotopy equivalence certified up to arity {}", c.arity)];
    emit(Document::Uniqueness(c), lines)
}

pub fn cmd_transfer_module(input: &Path, map: Option<&Path>, opts: &Options) -> CliResult<Outcome> {
    let m = load_module(input, opts)?;
    let to = opts.transfer_options();
    if opts.pair {
        if map.is_some() || !opts.homology {
            return Err(Error::Precondition("--pair transfers both structures onto homology; pass --homology".into()).into());
        }
        let b = m.base().clone();
        let unit = if opts.unital { Some(b.unit().ok_or_else(|| Error::Precondition("--unital needs a unital base algebra".into()))?) } else { None };
        let ha = homology_section(b.complex(), unit);
        if unit.is_some() && ha.unit.is_none() {
            return Err(Error::Precondition("the unit is a boundary".into()).into());
        }
        let hm = homology_section(m.complex(), None);
        let p = transfer_pair(&b, &m, &ha.complex, &ha.section, &hm.complex, &hm.section, ha.unit, &to)?;
        let lines = vec![format!("algebra arity bound {}, module arity bound {}", p.algebra.morphism.arity_bound(), p.module.morphism.arity_bound())];
        return emit(Document::Pair(PairDocument { algebra: p.algebra.morphism, restricted: p.restricted, module: p.module.morphism }), lines);
    }
    let (g, eps1, _) = source_and_map(m.complex(), None, map, &Options { unital: false, ..opts.clone() })?;
    let t = if opts.unital { transfer_module_unital(&m, &g, &eps1, &to)? } else { transfer_module(&m, &g, &eps1, &to)? };
    let lines = vec![format!("module arity bound {}", t.morphism.arity_bound())];
    emit(Document::ModuleMorphism(t.morphism), lines)
}

pub fn cmd_homology(input: &Path, opts: &Options) -> CliResult<Outcome> {
    let (target, unit) = match load(input, opts)? {
        Document::Complex(c) => (c, None),
        Document::Algebra(a) => (a.complex().clone(), a.unit()),
        Document::Module(m) => (m.complex().clone(), None),
        d => return Err(wrong_kind(input, &d, "complex, algebra or module")),
    };
    let hs = homology_section(&target, if opts.unital { unit } else { None });
    let ranks: Vec<String> = hs.complex.module().degrees().map(|(d, r)| format!("H_{d} = {r}")).collect();
    let mut lines = vec![if ranks.is_empty() { "acyclic".to_string() } else { ranks.join(", ") }];
    if let Some(u) = hs.unit {
        lines.push(format!("unit class at degree-0 index {u}"));
    }
    emit(Document::Map { source: hs.complex, target, map: hs.section }, lines)
}

/// Random square-zero DGAs and the Massey fixture pushed through every
/// algorithm, each output re-verified.
pub fn cmd_selftest(opts: &Options) -> CliResult<Outcome> {
    let field = opts.field.unwrap_or(Field::Rational);
    let start = Instant::now();
    let mut lines = Vec::new();
    let mut failed = 0;
    let mut record = |name: String, r: CliResult<()>, lines: &mut Vec<String>| match r {
        Ok(()) => lines.push(format!("ok      {name}")),
        Err(e) => {
            failed += 1;
            lines.push(format!("FAILED  {name}: {e}"));
        }
    };
    let mut rg = rng(opts.seed);
    for i in 0..10 {
        let b = Arc::new(random_square_zero_dga(&mut rg, field, 5));
        let r = (|| {
            let hs = homology_section(b.complex(), Some(0));
            let to = opts.transfer_options();
            let t = match hs.unit {
                Some(u) => transfer_unital(&b, &hs.complex, u, &hs.section, &to)?,
                None => transfer(&b, &hs.complex, &hs.section, &to)?,
            };
            emit(Document::Morphism(t.morphism), vec![]).map(|_| ())
        })();
        record(format!("random DGA {i} (total rank {}) transfers to homology", b.module().total_rank()), r, &mut lines);
    }
    let b = Arc::new(massey(field));
    for rule in [PivotRule::First, PivotRule::Last] {
        let r = (|| {
            let hs = homology_section(b.complex(), Some(0));
            let t = transfer_unital(&b, &hs.complex, hs.unit.expect("unit survives"), &hs.section, &TransferOptions::with_rule(rule))?;
            let (a, c) = massey_classes(&t.algebra);
            if !triple_product_outside_indeterminacy(&t.algebra, a, c.0, c.1) {
                return Err(Error::Verification("the triple product lies in its indeterminacy".into()).into());
            }
            emit(Document::Morphism(t.morphism), vec![]).map(|_| ())
        })();
        record(format!("Massey product survives transfer ({rule:?} pivots)"), r, &mut lines);
    }
    let r = (|| {
        let m = Arc::new(AInfModule::free(&b));
        let hm = homology_section(m.complex(), None);
        let t = transfer_module(&m, &hm.complex, &hm.section, &TransferOptions::default())?;
        emit(Document::ModuleMorphism(t.morphism), vec![]).map(|_| ())
    })();
    record("Massey fixture as a module over itself transfers".into(), r, &mut lines);
    lines.push(format!("{} failures in {:.2}s", failed, start.elapsed().as_secs_f64()));
    Ok(Outcome { lines, document: None, code: if failed == 0 { EXIT_OK } else { EXIT_VERIFICATION } })
}

/// The degree-one classes `a` and `(b, c)` of the transferred Massey fixture.
fn massey_classes(h: &AInfAlgebra) -> (usize, (usize, usize)) {
    let m = h.module();
    (m.global(1, 0), (m.global(1, 1), m.global(1, 2)))
}
