//! Writes the built-in fixtures as documents into the given directory.

use std::sync::Arc;

use ainf_core::aimod::AInfModule;
use ainf_core::fixtures::{exterior, ground_field, massey};
use ainf_core::io::Document;
use ainf_core::Field;

fn main() -> std::io::Result<()> {
    let dir = std::path::PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "fixtures".into()));
    std::fs::create_dir_all(&dir)?;
    let f5 = Field::prime(5).expect("5 is prime");
    let algebras = [
        ("ground_field", ground_field(Field::Rational)),
        ("exterior", exterior(Field::Rational)),
        ("massey", massey(Field::Rational)),
        ("massey_f5", massey(f5)),
    ];
    for (name, a) in algebras {
        let a = Arc::new(a);
        std::fs::write(dir.join(format!("{name}.json")), Document::Algebra(a.clone()).to_canonical_string())?;
        if name == "massey" {
            let m = Arc::new(AInfModule::free(&a));
            std::fs::write(dir.join("massey_module.json"), Document::Module(m).to_canonical_string())?;
        }
    }
    Ok(())
}
