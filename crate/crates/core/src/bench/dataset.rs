//! Dataset directories: `catalog.txt` plus one `<Relation>.csv` per base
//! relation, each with a header row naming the attributes.

use std::fs;
use std::io::Read;
use std::path::Path;

use crate::catalog::{Catalog, RelationKind};
use crate::engine::{Database, RelationInstance};
use crate::error::{Error, Result};
use crate::value::Value;

pub const CATALOG_FILE: &str = "catalog.txt";

/// Reads one relation's CSV against its catalog entry.
pub fn read_relation<R: Read>(catalog: &Catalog, name: &str, input: R) -> Result<RelationInstance> {
    let entry = catalog.require(name)?;
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let header: Vec<String> = rdr.headers()?.iter().map(|h| h.trim().to_string()).collect();
    if header != entry.attribute_names() {
        return Err(Error::Dataset(format!(
            "{name}.csv header ({}) does not match the catalog ({})",
            header.join(", "),
            entry.attribute_names().join(", ")
        )));
    }
    let mut rel = RelationInstance::new(name, header);
    for rec in rdr.records() {
        let rec = rec?;
        let row = rec
            .iter()
            .zip(&entry.attributes)
            .map(|(raw, a)| Value::parse_as(a.kind, raw))
            .collect::<Result<Vec<_>>>()?;
        rel.insert(row)?;
    }
    Ok(rel)
}

pub fn write_relation<W: std::io::Write>(rel: &RelationInstance, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(rel.attributes())?;
    for row in rel.rows() {
        w.write_record(row.iter().map(|v| v.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

/// Loads every base relation named in the catalog.
pub fn load_dataset(dir: &Path) -> Result<Database> {
    let text = fs::read_to_string(dir.join(CATALOG_FILE))
        .map_err(|e| Error::Dataset(format!("{}: {e}", dir.join(CATALOG_FILE).display())))?;
    let catalog = Catalog::parse(&text)?;
    let mut db = Database::new(catalog.clone());
    for entry in catalog.entries().filter(|e| e.kind == RelationKind::Base) {
        let path = dir.join(format!("{}.csv", entry.name));
        let file = fs::File::open(&path).map_err(|e| Error::Dataset(format!("{}: {e}", path.display())))?;
        db.insert(read_relation(&catalog, &entry.name, file)?)?;
    }
    Ok(db)
}

pub fn save_dataset(db: &Database, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join(CATALOG_FILE), db.catalog().to_string())?;
    for entry in db.catalog().entries().filter(|e| e.kind == RelationKind::Base) {
        if let Some(rel) = db.get(&entry.name) {
            write_relation(rel, fs::File::create(dir.join(format!("{}.csv", entry.name)))?)?;
        }
    }
    Ok(())
}
