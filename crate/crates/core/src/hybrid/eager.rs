use std::collections::BTreeMap;

use crate::engine::{join_all, semijoin, Database, JoinInput, RelationInstance};
use crate::error::{Error, Result};
use crate::ir::{OccurrenceId, Program, Rule};

/// Fully materialized provenance: per rule, the head columns joined with
/// every derivation, where each occurrence's columns are kept under
/// `Head.Label.attr` names. A view's store is folded into its parent's, so
/// the final store covers every occurrence of the program.
#[derive(Debug, Clone)]
pub struct EagerStore {
    stores: BTreeMap<String, RelationInstance>,
    result: String,
    a_r: Vec<String>,
}

pub fn qualified(occ: &OccurrenceId, attr: &str) -> String {
    format!("{}.{}.{attr}", occ.rule, occ.label)
}

fn build(program: &Program, rule: &Rule, db: &Database, stores: &mut BTreeMap<String, RelationInstance>) -> Result<()> {
    let mut owned: Vec<(usize, RelationInstance)> = Vec::new();
    for (i, atom) in rule.atoms.iter().enumerate() {
        if let Some(view) = program.rule(&atom.relation) {
            build(program, view, db, stores)?;
            owned.push((i, stores[&view.head].clone()));
        }
    }
    let mut inputs = Vec::with_capacity(rule.atoms.len() + 1);
    for (i, atom) in rule.atoms.iter().enumerate() {
        let occ = OccurrenceId::new(&rule.head, &atom.label);
        if let Some((_, child)) = owned.iter().find(|(j, _)| *j == i) {
            let mut columns = Vec::new();
            for (pos, a) in child.attributes().iter().enumerate() {
                match atom.exposed_name(a) {
                    Some(exp) => {
                        columns.push((pos, exp.to_string()));
                        columns.push((pos, qualified(&occ, a)));
                    }
                    None => columns.push((pos, a.clone())),
                }
            }
            inputs.push(JoinInput {
                relation: child,
                columns,
            });
        } else {
            let rel = db.require(&atom.relation)?;
            let mut input = JoinInput::atom(rel, atom)?;
            for (src, _) in &atom.columns {
                let pos = rel.position(src).expect("resolved");
                input.columns.push((pos, qualified(&occ, src)));
            }
            inputs.push(input);
        }
    }
    inputs.push(JoinInput::whole(db.require(&rule.head)?));
    let b = join_all(&inputs, &rule.predicates)?;
    let mut cols: Vec<(String, String)> = rule.head_attributes().into_iter().map(|a| (a.clone(), a)).collect();
    cols.extend(
        b.attributes
            .iter()
            .filter(|a| a.contains('.'))
            .map(|a| (a.clone(), a.clone())),
    );
    stores.insert(rule.head.clone(), b.project(&format!("PView_{}", rule.head), &cols)?);
    Ok(())
}

impl EagerStore {
    /// `db` must hold the evaluated program.
    pub fn materialize(program: &Program, db: &Database) -> Result<EagerStore> {
        let mut stores = BTreeMap::new();
        build(program, program.final_rule(), db, &mut stores)?;
        Ok(EagerStore {
            stores,
            result: program.result_name().to_string(),
            a_r: program.final_rule().head_attributes(),
        })
    }

    pub fn top(&self) -> &RelationInstance {
        &self.stores[&self.result]
    }

    pub fn store(&self, head: &str) -> Option<&RelationInstance> {
        self.stores.get(head)
    }

    /// Total stored cells, for reporting.
    pub fn cells(&self) -> usize {
        self.top().len() * self.top().attributes().len()
    }

    /// The original result, recomputed from the store.
    pub fn answer(&self) -> Result<RelationInstance> {
        Ok(self.top().project(&self.a_r)?.with_name(&self.result))
    }

    pub fn retrieve(&self, program: &Program, occ: &OccurrenceId, selection: &RelationInstance) -> Result<RelationInstance> {
        let atom = program.atom(occ)?;
        let picked = semijoin(self.top(), selection);
        let map: Vec<(String, String)> = atom
            .columns
            .iter()
            .map(|(src, _)| (qualified(occ, src), src.clone()))
            .collect();
        let pos = picked.positions(&map.iter().map(|(q, _)| q.clone()).collect::<Vec<_>>())
            .map_err(|_| Error::UnknownOccurrence(occ.to_string()))?;
        let mut out = RelationInstance::new(format!("P{}", atom.label), map.into_iter().map(|(_, s)| s));
        for row in picked.rows() {
            out.insert(pos.iter().map(|&p| row[p].clone()).collect())?;
        }
        Ok(out)
    }
}
