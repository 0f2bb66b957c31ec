//! Self-describing JSON documents for every structure in the crate.
//!
//! Keys are sorted, scalars are canonical strings and all-zero blocks are
//! omitted, so `write(parse(s)) == s` for any canonical document.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde_json::{Map, Value};

use crate::aimod::{module_basis, AInfModule, AInfModuleHomotopy, AInfModuleMorphism};
use crate::ainfty::{AInfAlgebra, AInfHomotopy, AInfMorphism};
use crate::chaincx::{ChainComplex, GradedMap, GradedModule};
use crate::signs::{MultiMap, TensorBasis};
use crate::transfer::{Lifted, UniquenessCertificate};
use crate::{Error, Field, FieldElement, Result, SparseMatrix};

/// The combined output of an algebra and module transfer.
#[derive(Clone, Debug)]
pub struct PairDocument {
    pub algebra: AInfMorphism,
    pub restricted: Arc<AInfModule>,
    pub module: AInfModuleMorphism,
}

#[derive(Clone, Debug)]
pub enum Document {
    Complex(ChainComplex),
    Map { source: ChainComplex, target: ChainComplex, map: GradedMap },
    Algebra(Arc<AInfAlgebra>),
    Morphism(AInfMorphism),
    Homotopy(AInfHomotopy),
    Lift(Lifted),
    Uniqueness(UniquenessCertificate),
    Module(Arc<AInfModule>),
    ModuleMorphism(AInfModuleMorphism),
    ModuleHomotopy(AInfModuleHomotopy),
    Pair(PairDocument),
}

impl Document {
    pub fn kind(&self) -> &'static str {
        match self {
            Document::Complex(_) => "complex",
            Document::Map { .. } => "map",
            Document::Algebra(_) => "algebra",
            Document::Morphism(_) => "morphism",
            Document::Homotopy(_) => "homotopy",
            Document::Lift(_) => "lift",
            Document::Uniqueness(_) => "uniqueness",
            Document::Module(_) => "module",
            Document::ModuleMorphism(_) => "module_morphism",
            Document::ModuleHomotopy(_) => "module_homotopy",
            Document::Pair(_) => "pair",
        }
    }

    pub fn to_value(&self) -> Value {
        match self {
            Document::Complex(c) => complex_value(c),
            Document::Map { source, target, map } => map_value(source, target, map),
            Document::Algebra(a) => algebra_value(a),
            Document::Morphism(f) => morphism_value(f),
            Document::Homotopy(h) => homotopy_value(h),
            Document::Lift(l) => lift_value(l),
            Document::Uniqueness(u) => object([
                ("kind", "uniqueness".into()),
                ("arity", u.arity.into()),
                ("phi", lift_value(&u.phi)),
                ("psi", lift_value(&u.psi)),
                ("chi", lift_value(&u.chi)),
            ]),
            Document::Module(m) => module_value(m),
            Document::ModuleMorphism(r) => module_morphism_value(r),
            Document::ModuleHomotopy(h) => module_homotopy_value(h),
            Document::Pair(p) => object([
                ("kind", "pair".into()),
                ("algebra", morphism_value(&p.algebra)),
                ("restricted", module_value(&p.restricted)),
                ("module", module_morphism_value(&p.module)),
            ]),
        }
    }

    /// Canonical text: sorted keys, two-space indentation, scalar rows inline.
    pub fn to_canonical_string(&self) -> String {
        let mut out = String::new();
        write_value(&self.to_value(), 0, &mut out);
        out.push('\n');
        out
    }

    pub fn parse_str(s: &str) -> Result<Document> {
        let v: Value = serde_json::from_str(s).map_err(|e| Error::Parse(format!("line {}, column {}: {e}", e.line(), e.column())))?;
        Document::from_value(&v)
    }

    pub fn from_value(v: &Value) -> Result<Document> {
        let p = Path::root();
        let kind = p.str_field(v, "kind")?;
        Ok(match kind {
            "complex" => Document::Complex(read_complex(v, &p)?),
            "map" => {
                let source = read_complex(p.field(v, "source")?, &p.at("source"))?;
                let target = read_complex(p.field(v, "target")?, &p.at("target"))?;
                let degree = p.int_field(v, "degree")?;
                let map = read_blocks(p.field(v, "blocks")?, source.module(), target.module(), degree, &p.at("blocks"))?;
                Document::Map { source, target, map }
            }
            "algebra" => Document::Algebra(Arc::new(read_algebra(v, &p)?)),
            "morphism" => Document::Morphism(read_morphism(v, &p)?),
            "homotopy" => Document::Homotopy(read_homotopy(v, &p)?),
            "lift" => Document::Lift(read_lift(v, &p)?),
            "uniqueness" => {
                let arity = p.int_field(v, "arity")?;
                let arity = usize::try_from(arity).map_err(|_| p.at("arity").err("expected a nonnegative integer"))?;
                let lift = |k: &str| read_lift(p.field(v, k)?, &p.at(k));
                Document::Uniqueness(UniquenessCertificate { phi: lift("phi")?, psi: lift("psi")?, chi: lift("chi")?, arity })
            }
            "module" => Document::Module(Arc::new(read_module(v, &p)?)),
            "module_morphism" => Document::ModuleMorphism(read_module_morphism(v, &p)?),
            "module_homotopy" => Document::ModuleHomotopy(read_module_homotopy(v, &p)?),
            "pair" => Document::Pair(PairDocument {
                algebra: read_morphism(p.field(v, "algebra")?, &p.at("algebra"))?,
                restricted: Arc::new(read_module(p.field(v, "restricted")?, &p.at("restricted"))?),
                module: read_module_morphism(p.field(v, "module")?, &p.at("module"))?,
            }),
            other => return Err(p.at("kind").err(&format!("unknown kind {other:?}"))),
        })
    }
}

fn object<const N: usize>(entries: [(&str, Value); N]) -> Value {
    Value::Object(entries.into_iter().map(|(k, v)| (k.to_string(), v)).collect())
}

fn write_value(v: &Value, indent: usize, out: &mut String) {
    let pad = |n: usize, out: &mut String| out.extend(std::iter::repeat_n(' ', n));
    match v {
        Value::Object(m) if !m.is_empty() => {
            out.push_str("{\n");
            for (i, (k, x)) in m.iter().enumerate() {
                pad(indent + 2, out);
                out.push_str(&Value::String(k.clone()).to_string());
                out.push_str(": ");
                write_value(x, indent + 2, out);
                if i + 1 < m.len() {
                    out.push(',');
                }
                out.push('\n');
            }
            pad(indent, out);
            out.push('}');
        }
        Value::Array(a) if a.iter().any(|x| x.is_array() || x.is_object()) => {
            out.push_str("[\n");
            for (i, x) in a.iter().enumerate() {
                pad(indent + 2, out);
                write_value(x, indent + 2, out);
                if i + 1 < a.len() {
                    out.push(',');
                }
                out.push('\n');
            }
            pad(indent, out);
            out.push(']');
        }
        Value::Array(a) => {
            out.push('[');
            for (i, x) in a.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                out.push_str(&x.to_string());
            }
            out.push(']');
        }
        other => out.push_str(&other.to_string()),
    }
}

/// Location inside a document, for schema errors.
#[derive(Clone)]
struct Path(String);

impl Path {
    fn root() -> Path {
        Path("$".into())
    }

    fn at(&self, k: &str) -> Path {
        Path(format!("{}.{k}", self.0))
    }

    fn err(&self, msg: &str) -> Error {
        Error::Parse(format!("{}: {msg}", self.0))
    }

    fn field<'a>(&self, v: &'a Value, k: &str) -> Result<&'a Value> {
        let obj = v.as_object().ok_or_else(|| self.err("expected an object"))?;
        obj.get(k).ok_or_else(|| self.err(&format!("missing field {k:?}")))
    }

    fn str_field<'a>(&self, v: &'a Value, k: &str) -> Result<&'a str> {
        self.field(v, k)?.as_str().ok_or_else(|| self.at(k).err("expected a string"))
    }

    fn int_field(&self, v: &Value, k: &str) -> Result<i32> {
        as_i32(self.field(v, k)?, &self.at(k))
    }

    fn object<'a>(&self, v: &'a Value) -> Result<&'a Map<String, Value>> {
        v.as_object().ok_or_else(|| self.err("expected an object"))
    }

    fn expect_kind(&self, v: &Value, kind: &str) -> Result<()> {
        let k = self.str_field(v, "kind")?;
        if k != kind {
            return Err(self.at("kind").err(&format!("expected {kind:?}, found {k:?}")));
        }
        Ok(())
    }
}

fn as_i32(v: &Value, p: &Path) -> Result<i32> {
    v.as_i64().and_then(|x| i32::try_from(x).ok()).ok_or_else(|| p.err("expected an integer"))
}

fn int_key(k: &str, p: &Path) -> Result<i32> {
    let x: i32 = k.parse().map_err(|_| p.err(&format!("key {k:?} is not an integer")))?;
    if x.to_string() != k {
        return Err(p.err(&format!("key {k:?} is not in canonical form")));
    }
    Ok(x)
}

fn field_value(f: Field) -> Value {
    match f {
        Field::Rational => object([("type", "Q".into())]),
        Field::Prime(p) => object([("type", "Fp".into()), ("p", p.into())]),
    }
}

fn read_field(v: &Value, p: &Path) -> Result<Field> {
    match p.str_field(v, "type")? {
        "Q" => Ok(Field::Rational),
        "Fp" => {
            let q = p.field(v, "p")?.as_u64().ok_or_else(|| p.at("p").err("expected a positive integer"))?;
            Field::prime(q).map_err(|e| p.at("p").err(&e.to_string()))
        }
        t => Err(p.at("type").err(&format!("unknown field type {t:?}"))),
    }
}

fn read_scalar(v: &Value, field: Field, p: &Path) -> Result<FieldElement> {
    let s = v.as_str().ok_or_else(|| p.err("expected a scalar string"))?;
    field.parse(s).map_err(|e| p.err(&e.to_string()))
}

fn matrix_value(m: &SparseMatrix) -> Value {
    let d = m.to_dense();
    Value::Array((0..d.rows()).map(|i| Value::Array(d.row(i).iter().map(|x| Value::String(x.to_canonical())).collect())).collect())
}

fn read_matrix(v: &Value, field: Field, rows: usize, cols: usize, p: &Path) -> Result<SparseMatrix> {
    let a = v.as_array().ok_or_else(|| p.err("expected a matrix"))?;
    if a.len() != rows {
        return Err(p.err(&format!("expected {rows} rows, found {}", a.len())));
    }
    let mut columns = vec![Vec::with_capacity(rows); cols];
    for (i, row) in a.iter().enumerate() {
        let pi = p.at(&i.to_string());
        let r = row.as_array().ok_or_else(|| pi.err("expected a row"))?;
        if r.len() != cols {
            return Err(pi.err(&format!("expected {cols} entries, found {}", r.len())));
        }
        for (j, x) in r.iter().enumerate() {
            columns[j].push(read_scalar(x, field, &pi.at(&j.to_string()))?);
        }
    }
    Ok(SparseMatrix::from_dense_columns(field, rows, &columns))
}

fn blocks_value(f: &GradedMap) -> Value {
    Value::Object(f.blocks().iter().filter(|(_, b)| !b.is_zero()).map(|(d, b)| (d.to_string(), matrix_value(b))).collect())
}

fn read_blocks(v: &Value, source: &GradedModule, target: &GradedModule, degree: i32, p: &Path) -> Result<GradedMap> {
    let mut blocks = BTreeMap::new();
    for (k, m) in p.object(v)? {
        let d = int_key(k, p)?;
        let (r, c) = (target.rank(d + degree), source.rank(d));
        if c == 0 {
            return Err(p.err(&format!("no basis in source degree {d}")));
        }
        blocks.insert(d, read_matrix(m, source.field(), r, c, &p.at(k))?);
    }
    GradedMap::from_blocks(source, target, degree, blocks).map_err(|e| p.err(&e.to_string()))
}

fn complex_value(c: &ChainComplex) -> Value {
    let degrees = c.module().degrees().map(|(d, r)| (d.to_string(), Value::from(r))).collect();
    object([
        ("kind", "complex".into()),
        ("field", field_value(c.field())),
        ("degrees", Value::Object(degrees)),
        ("differential", blocks_value(c.differential())),
    ])
}

fn read_complex(v: &Value, p: &Path) -> Result<ChainComplex> {
    p.expect_kind(v, "complex")?;
    let field = read_field(p.field(v, "field")?, &p.at("field"))?;
    let pd = p.at("degrees");
    let mut ranks = Vec::new();
    for (k, r) in pd.object(p.field(v, "degrees")?)? {
        let d = int_key(k, &pd)?;
        let r = r.as_u64().filter(|&r| r > 0).ok_or_else(|| pd.at(k).err("expected a positive rank"))?;
        ranks.push((d, r as usize));
    }
    let module = GradedModule::new(field, ranks);
    let diff = read_blocks(p.field(v, "differential")?, &module, &module, -1, &p.at("differential"))?;
    ChainComplex::from_differential(diff).map_err(|e| p.at("differential").err(&e.to_string()))
}

fn map_value(source: &ChainComplex, target: &ChainComplex, f: &GradedMap) -> Value {
    object([
        ("kind", "map".into()),
        ("source", complex_value(source)),
        ("target", complex_value(target)),
        ("degree", f.degree().into()),
        ("blocks", blocks_value(f)),
    ])
}

fn multimap_value(f: &MultiMap) -> Value {
    object([("arity", f.arity().into()), ("degree", f.degree().into()), ("blocks", blocks_value(f.map()))])
}

fn read_multimap(v: &Value, basis: &Arc<TensorBasis>, target: &GradedModule, degree: i32, p: &Path) -> Result<MultiMap> {
    let arity = p.int_field(v, "arity")?;
    if arity as usize != basis.arity() {
        return Err(p.at("arity").err(&format!("expected arity {}, found {arity}", basis.arity())));
    }
    let d = p.int_field(v, "degree")?;
    if d != degree {
        return Err(p.at("degree").err(&format!("expected degree {degree}, found {d}")));
    }
    let map = read_blocks(p.field(v, "blocks")?, basis.module(), target, degree, &p.at("blocks"))?;
    MultiMap::new(basis, map).map_err(|e| p.err(&e.to_string()))
}

/// `{"<k>": multimap}` for `k = first, first + 1, …`.
fn table_value(ms: &[MultiMap], first: usize) -> Value {
    Value::Object(ms.iter().enumerate().map(|(j, m)| ((j + first).to_string(), multimap_value(m))).collect())
}

fn read_table(v: &Value, first: usize, p: &Path, mut entry: impl FnMut(usize, &Value, &Path) -> Result<MultiMap>) -> Result<Vec<MultiMap>> {
    let obj = p.object(v)?;
    let mut keys = Vec::new();
    for k in obj.keys() {
        let n = int_key(k, p)?;
        if n < first as i32 {
            return Err(p.err(&format!("arity {n} below {first}")));
        }
        keys.push(n as usize);
    }
    keys.sort_unstable();
    if keys.iter().enumerate().any(|(i, &k)| k != i + first) {
        return Err(p.err("arities must be consecutive"));
    }
    keys.iter().map(|k| entry(*k, &obj[&k.to_string()], &p.at(&k.to_string()))).collect()
}

fn algebra_value(a: &AInfAlgebra) -> Value {
    let mut m = Map::new();
    m.insert("kind".into(), "algebra".into());
    m.insert("complex".into(), complex_value(a.complex()));
    m.insert("mu".into(), table_value(&a.mus()[1..], 2));
    if let Some(u) = a.unit() {
        m.insert("unit".into(), object([("degree0_index", u.into())]));
    }
    Value::Object(m)
}

fn read_algebra(v: &Value, p: &Path) -> Result<AInfAlgebra> {
    p.expect_kind(v, "algebra")?;
    let complex = read_complex(p.field(v, "complex")?, &p.at("complex"))?;
    let module = complex.module().clone();
    let higher = read_table(p.field(v, "mu")?, 2, &p.at("mu"), |k, x, q| {
        read_multimap(x, &Arc::new(TensorBasis::power(&module, k)), &module, k as i32 - 2, q)
    })?;
    let unit = match v.get("unit") {
        None => None,
        Some(u) => {
            let pu = p.at("unit");
            let i = pu.field(u, "degree0_index")?.as_u64().ok_or_else(|| pu.at("degree0_index").err("expected an index"))? as usize;
            if i >= module.rank(0) {
                return Err(pu.at("degree0_index").err("index out of range"));
            }
            Some(i)
        }
    };
    AInfAlgebra::new_unchecked(complex, higher, unit).map_err(|e| p.err(&e.to_string()))
}

fn morphism_value(f: &AInfMorphism) -> Value {
    object([
        ("kind", "morphism".into()),
        ("source", algebra_value(f.source())),
        ("target", algebra_value(f.target())),
        ("phi", table_value(f.phis(), 1)),
    ])
}

fn read_morphism(v: &Value, p: &Path) -> Result<AInfMorphism> {
    p.expect_kind(v, "morphism")?;
    let source = Arc::new(read_algebra(p.field(v, "source")?, &p.at("source"))?);
    let target = Arc::new(read_algebra(p.field(v, "target")?, &p.at("target"))?);
    let phis = read_table(p.field(v, "phi")?, 1, &p.at("phi"), |k, x, q| read_multimap(x, &source.basis(k), target.module(), k as i32 - 1, q))?;
    AInfMorphism::new_unchecked(&source, &target, phis).map_err(|e| p.err(&e.to_string()))
}

fn homotopy_value(h: &AInfHomotopy) -> Value {
    object([
        ("kind", "homotopy".into()),
        ("phi", morphism_value(h.phi())),
        ("psi", morphism_value(h.psi())),
        ("sigma", table_value(h.sigmas(), 1)),
    ])
}

fn read_homotopy(v: &Value, p: &Path) -> Result<AInfHomotopy> {
    p.expect_kind(v, "homotopy")?;
    let phi = read_morphism(p.field(v, "phi")?, &p.at("phi"))?;
    let psi = read_morphism(p.field(v, "psi")?, &p.at("psi"))?;
    let (s, t) = (phi.source().clone(), phi.target().clone());
    let sigmas = read_table(p.field(v, "sigma")?, 1, &p.at("sigma"), |k, x, q| read_multimap(x, &s.basis(k), t.module(), k as i32, q))?;
    AInfHomotopy::new_unchecked(&phi, &psi, sigmas).map_err(|e| p.err(&e.to_string()))
}

fn lift_value(l: &Lifted) -> Value {
    object([("kind", "lift".into()), ("phi", morphism_value(&l.phi)), ("sigma", homotopy_value(&l.sigma))])
}

fn read_lift(v: &Value, p: &Path) -> Result<Lifted> {
    p.expect_kind(v, "lift")?;
    let phi = read_morphism(p.field(v, "phi")?, &p.at("phi"))?;
    let sigma = read_homotopy(p.field(v, "sigma")?, &p.at("sigma"))?;
    Ok(Lifted { phi, sigma })
}

fn module_value(m: &AInfModule) -> Value {
    object([
        ("kind", "module".into()),
        ("algebra", algebra_value(m.base())),
        ("complex", complex_value(m.complex())),
        ("mu", table_value(&m.mus()[1..], 2)),
        ("unital", m.is_unital().into()),
    ])
}

fn read_module(v: &Value, p: &Path) -> Result<AInfModule> {
    p.expect_kind(v, "module")?;
    let base = Arc::new(read_algebra(p.field(v, "algebra")?, &p.at("algebra"))?);
    let complex = read_complex(p.field(v, "complex")?, &p.at("complex"))?;
    let module = complex.module().clone();
    let higher = read_table(p.field(v, "mu")?, 2, &p.at("mu"), |k, x, q| read_multimap(x, &module_basis(base.module(), &module, k), &module, k as i32 - 2, q))?;
    let unital = p.field(v, "unital")?.as_bool().ok_or_else(|| p.at("unital").err("expected a boolean"))?;
    AInfModule::new_unchecked(&base, complex, higher, unital).map_err(|e| p.err(&e.to_string()))
}

fn module_morphism_value(r: &AInfModuleMorphism) -> Value {
    object([
        ("kind", "module_morphism".into()),
        ("source", module_value(r.source())),
        ("target", module_value(r.target())),
        ("rho", table_value(r.rhos(), 1)),
    ])
}

fn read_module_morphism(v: &Value, p: &Path) -> Result<AInfModuleMorphism> {
    p.expect_kind(v, "module_morphism")?;
    let source = Arc::new(read_module(p.field(v, "source")?, &p.at("source"))?);
    let target = Arc::new(read_module(p.field(v, "target")?, &p.at("target"))?);
    let rhos = read_table(p.field(v, "rho")?, 1, &p.at("rho"), |k, x, q| read_multimap(x, &source.basis(k), target.module(), k as i32 - 1, q))?;
    AInfModuleMorphism::new_unchecked(&source, &target, rhos).map_err(|e| p.err(&e.to_string()))
}

fn module_homotopy_value(h: &AInfModuleHomotopy) -> Value {
    object([
        ("kind", "module_homotopy".into()),
        ("rho", module_morphism_value(h.rho())),
        ("pi", module_morphism_value(h.pi())),
        ("tau", table_value(h.taus(), 1)),
    ])
}

fn read_module_homotopy(v: &Value, p: &Path) -> Result<AInfModuleHomotopy> {
    p.expect_kind(v, "module_homotopy")?;
    let rho = read_module_morphism(p.field(v, "rho")?, &p.at("rho"))?;
    let pi = read_module_morphism(p.field(v, "pi")?, &p.at("pi"))?;
    let (s, t) = (rho.source().clone(), rho.target().clone());
    let taus = read_table(p.field(v, "tau")?, 1, &p.at("tau"), |k, x, q| read_multimap(x, &s.basis(k), t.module(), k as i32, q))?;
    AInfModuleHomotopy::new_unchecked(&rho, &pi, taus).map_err(|e| p.err(&e.to_string()))
}
