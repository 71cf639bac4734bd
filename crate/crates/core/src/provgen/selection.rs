use crate::engine::{fmt_row, RelationInstance, Row};
use crate::error::{Error, Result};

/// Rows picked from a rule head's instance. Construction enforces that
/// every row is present in that instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Selection {
    rows: RelationInstance,
}

impl Selection {
    pub fn new(result: &RelationInstance, rows: impl IntoIterator<Item = Row>) -> Result<Selection> {
        let mut sel = RelationInstance::new(result.name(), result.attributes().iter().cloned());
        for row in rows {
            if !result.contains(&row) {
                return Err(Error::NotInResult {
                    relation: result.name().to_string(),
                    row: fmt_row(&row),
                });
            }
            sel.insert(row)?;
        }
        Ok(Selection { rows: sel })
    }

    /// Every row of `result`.
    pub fn all(result: &RelationInstance) -> Selection {
        Selection {
            rows: result.clone(),
        }
    }

    pub fn empty(result: &RelationInstance) -> Selection {
        Selection {
            rows: RelationInstance::new(result.name(), result.attributes().iter().cloned()),
        }
    }

    /// Matches textual tuples (as typed by a user) against `result`.
    pub fn from_literals(result: &RelationInstance, tuples: &[Vec<String>]) -> Result<Selection> {
        let mut rows = Vec::with_capacity(tuples.len());
        for t in tuples {
            let found = (t.len() == result.attributes().len())
                .then(|| {
                    result
                        .rows()
                        .iter()
                        .find(|r| r.iter().zip(t).all(|(v, lit)| v.matches_literal(lit)))
                })
                .flatten();
            match found {
                Some(r) => rows.push(r.clone()),
                None => {
                    return Err(Error::NotInResult {
                        relation: result.name().to_string(),
                        row: format!("({})", t.join(", ")),
                    })
                }
            }
        }
        Selection::new(result, rows)
    }

    pub fn relation(&self) -> &str {
        self.rows.name()
    }

    pub fn instance(&self) -> &RelationInstance {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}
