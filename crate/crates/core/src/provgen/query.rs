use std::fmt;

use crate::engine::{join_all, Database, JoinInput, RelationInstance};
use crate::error::Result;
use crate::ir::{OccurrenceId, Predicate, TableAtom};

/// A generated retrieval rule:
/// `P<target>(source cols) :- <selection>(cols), retained atoms, retained predicates.`
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProvQuery {
    pub target: OccurrenceId,
    /// Rule whose body the atoms come from.
    pub rule: String,
    /// Name of the driving relation, e.g. `R'`, `RK'` or `PQ18_tmp`.
    pub selection_source: String,
    /// (selection column, body name) pairs joined from the selection.
    pub selection_columns: Vec<(String, String)>,
    /// In original body order.
    pub retained_atoms: Vec<TableAtom>,
    pub retained_predicates: Vec<Predicate>,
    /// The target atom, used for the output columns even when it is not
    /// joined (projection straight from the selection).
    pub target_atom: TableAtom,
}

impl ProvQuery {
    /// Relation references in the body, the selection included, minus one.
    pub fn join_count(&self) -> usize {
        self.retained_atoms.len()
    }

    pub fn joins_target(&self) -> bool {
        self.retained_atoms.iter().any(|a| a.label == self.target_atom.label)
    }

    /// Body as labels, selection first, atoms sorted. Equal for equal queries
    /// regardless of body order.
    pub fn canonical_body(&self) -> Vec<String> {
        let mut atoms: Vec<String> = self.retained_atoms.iter().map(|a| a.label.clone()).collect();
        atoms.sort();
        let mut out = vec![self.selection_source.clone()];
        out.extend(atoms);
        out
    }

    pub fn output_name(&self) -> String {
        format!("P{}", self.target_atom.label)
    }

    pub fn evaluate(&self, selection: &RelationInstance, db: &Database) -> Result<RelationInstance> {
        let mut inputs = vec![JoinInput::renamed(selection, &self.selection_columns)?];
        for atom in &self.retained_atoms {
            inputs.push(JoinInput::atom(db.require(&atom.relation)?, atom)?);
        }
        let b = join_all(&inputs, &self.retained_predicates)?;
        let cols: Vec<(String, String)> = self
            .target_atom
            .columns
            .iter()
            .map(|(src, exp)| (exp.clone(), src.clone()))
            .collect();
        b.project(&self.output_name(), &cols)
    }
}

impl fmt::Display for ProvQuery {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let head: Vec<&str> = self.target_atom.columns.iter().map(|(s, _)| s.as_str()).collect();
        let sel: Vec<String> = self
            .selection_columns
            .iter()
            .map(|(s, e)| if s == e { s.clone() } else { format!("{s} as {e}") })
            .collect();
        write!(
            f,
            "{}({}) :- {}({})",
            self.output_name(),
            head.join(", "),
            self.selection_source,
            sel.join(", ")
        )?;
        for a in &self.retained_atoms {
            write!(f, ", {a}")?;
        }
        for p in &self.retained_predicates {
            write!(f, ", {p}")?;
        }
        f.write_str(".")
    }
}

/// Queries run top-down: each step's output is the next step's selection.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RetrievalChain {
    pub steps: Vec<ProvQuery>,
}

impl RetrievalChain {
    pub fn join_count(&self) -> usize {
        let refs: usize = self.steps.iter().map(|q| 1 + q.retained_atoms.len()).sum();
        refs.saturating_sub(1)
    }

    pub fn retained_atoms(&self) -> usize {
        self.steps.iter().map(|q| q.retained_atoms.len()).sum()
    }

    pub fn last(&self) -> &ProvQuery {
        self.steps.last().expect("chains are non-empty")
    }

    pub fn evaluate(&self, selection: &RelationInstance, db: &Database) -> Result<RelationInstance> {
        let mut cur = selection.clone();
        for q in &self.steps {
            cur = q.evaluate(&cur, db)?;
        }
        Ok(cur)
    }
}

impl fmt::Display for RetrievalChain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, q) in self.steps.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{q}")?;
        }
        Ok(())
    }
}
