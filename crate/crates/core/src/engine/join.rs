use std::collections::{BTreeSet, HashMap};

use super::relation::{RelationInstance, Row};
use crate::error::{Error, Result};
use crate::ir::{Operand, Predicate, TableAtom};
use crate::value::Value;

/// One join operand: a relation plus the (position, exposed name) pairs it
/// contributes. Unlisted positions are ignored.
#[derive(Debug, Clone)]
pub struct JoinInput<'a> {
    pub relation: &'a RelationInstance,
    pub columns: Vec<(usize, String)>,
}

impl<'a> JoinInput<'a> {
    /// Every column under its own name.
    pub fn whole(relation: &'a RelationInstance) -> JoinInput<'a> {
        JoinInput {
            relation,
            columns: relation.attributes().iter().cloned().enumerate().collect(),
        }
    }

    /// The atom's source columns under their exposed names.
    pub fn atom(relation: &'a RelationInstance, atom: &TableAtom) -> Result<JoinInput<'a>> {
        let mut columns = Vec::with_capacity(atom.columns.len());
        for (src, exp) in &atom.columns {
            let pos = relation.position(src).ok_or_else(|| Error::UnknownAttribute {
                relation: relation.name().to_string(),
                attribute: src.clone(),
            })?;
            columns.push((pos, exp.clone()));
        }
        Ok(JoinInput { relation, columns })
    }

    /// Selected columns renamed; `map` is (source attribute, new name).
    pub fn renamed(relation: &'a RelationInstance, map: &[(String, String)]) -> Result<JoinInput<'a>> {
        let mut columns = Vec::with_capacity(map.len());
        for (src, exp) in map {
            let pos = relation.position(src).ok_or_else(|| Error::UnknownAttribute {
                relation: relation.name().to_string(),
                attribute: src.clone(),
            })?;
            columns.push((pos, exp.clone()));
        }
        Ok(JoinInput { relation, columns })
    }
}

/// The rows of a multiway natural join, before projection.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bindings {
    pub attributes: Vec<String>,
    pub rows: Vec<Row>,
}

impl Bindings {
    fn unit() -> Bindings {
        Bindings {
            attributes: Vec::new(),
            rows: vec![Vec::new()],
        }
    }

    pub fn position(&self, attr: &str) -> Option<usize> {
        self.attributes.iter().position(|a| a == attr)
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Projection onto `attrs`, optionally renamed, as a set.
    pub fn project(&self, name: &str, attrs: &[(String, String)]) -> Result<RelationInstance> {
        let pos: Vec<usize> = attrs
            .iter()
            .map(|(a, _)| {
                self.position(a).ok_or_else(|| Error::UnknownAttribute {
                    relation: name.to_string(),
                    attribute: a.clone(),
                })
            })
            .collect::<Result<_>>()?;
        let mut out = RelationInstance::new(name, attrs.iter().map(|(_, n)| n.clone()));
        for row in &self.rows {
            out.insert_unchecked(pos.iter().map(|&p| row[p].clone()).collect());
        }
        Ok(out)
    }
}

fn operand_value<'r>(op: &'r Operand, row: &'r [Value], pos: &HashMap<&str, usize>) -> &'r Value {
    match op {
        Operand::Attr(a) => &row[pos[a.as_str()]],
        Operand::Const(v) => v,
    }
}

fn predicate_holds(p: &Predicate, row: &[Value], pos: &HashMap<&str, usize>) -> Result<bool> {
    let l = operand_value(&p.left, row, pos);
    let r = operand_value(&p.right, row, pos);
    Ok(p.op.holds(l.compare(r)?))
}

fn apply_ready(
    b: &mut Bindings,
    predicates: &[Predicate],
    applied: &mut [bool],
) -> Result<()> {
    let bound: BTreeSet<&str> = b.attributes.iter().map(String::as_str).collect();
    let mut ready: Vec<&Predicate> = Vec::new();
    for (i, p) in predicates.iter().enumerate() {
        if !applied[i] && p.attributes().iter().all(|a| bound.contains(a.as_str())) {
            applied[i] = true;
            ready.push(p);
        }
    }
    if ready.is_empty() {
        return Ok(());
    }
    let pos: HashMap<&str, usize> = b
        .attributes
        .iter()
        .enumerate()
        .map(|(i, a)| (a.as_str(), i))
        .collect();
    let mut kept = Vec::with_capacity(b.rows.len());
    for row in std::mem::take(&mut b.rows) {
        let mut ok = true;
        for p in &ready {
            if !predicate_holds(p, &row, &pos)? {
                ok = false;
                break;
            }
        }
        if ok {
            kept.push(row);
        }
    }
    b.rows = kept;
    Ok(())
}

fn join_one(cur: Bindings, input: &JoinInput<'_>) -> Bindings {
    let mut shared: Vec<(usize, usize)> = Vec::new();
    let mut fresh: Vec<(usize, String)> = Vec::new();
    for (pos, name) in &input.columns {
        match cur.position(name) {
            Some(cp) => shared.push((cp, *pos)),
            None => fresh.push((*pos, name.clone())),
        }
    }
    let mut attributes = cur.attributes.clone();
    attributes.extend(fresh.iter().map(|(_, n)| n.clone()));
    let mut table: HashMap<Vec<&Value>, Vec<&Row>> = HashMap::new();
    for row in input.relation.rows() {
        let k: Vec<&Value> = shared.iter().map(|&(_, p)| &row[p]).collect();
        table.entry(k).or_default().push(row);
    }
    let mut rows = Vec::new();
    for row in &cur.rows {
        let k: Vec<&Value> = shared.iter().map(|&(c, _)| &row[c]).collect();
        if let Some(matches) = table.get(&k) {
            for m in matches {
                let mut out = row.clone();
                out.extend(fresh.iter().map(|&(p, _)| m[p].clone()));
                rows.push(out);
            }
        }
    }
    Bindings { attributes, rows }
}

/// Natural join of `inputs` on equal names, filtered by `predicates`.
///
/// Starts from the smallest input and repeatedly joins the smallest input
/// sharing an attribute with what is bound so far; each predicate runs as
/// soon as all of its attributes are bound. Output row order is unspecified.
pub fn join_all(inputs: &[JoinInput<'_>], predicates: &[Predicate]) -> Result<Bindings> {
    let mut applied = vec![false; predicates.len()];
    let mut cur = Bindings::unit();
    apply_ready(&mut cur, predicates, &mut applied)?;
    let mut left: Vec<usize> = (0..inputs.len()).collect();
    while !left.is_empty() {
        let bound: BTreeSet<&str> = cur.attributes.iter().map(String::as_str).collect();
        let pick = left
            .iter()
            .copied()
            .min_by_key(|&i| {
                let connected = inputs[i].columns.iter().any(|(_, n)| bound.contains(n.as_str()));
                (!connected && !bound.is_empty(), inputs[i].relation.len(), i)
            })
            .expect("non-empty");
        left.retain(|&i| i != pick);
        cur = join_one(cur, &inputs[pick]);
        apply_ready(&mut cur, predicates, &mut applied)?;
        if cur.rows.is_empty() {
            // keep the schema complete for callers that project
            for &i in &left {
                for (_, n) in &inputs[i].columns {
                    if cur.position(n).is_none() {
                        cur.attributes.push(n.clone());
                    }
                }
            }
            break;
        }
    }
    if let Some(i) = applied.iter().position(|a| !a) {
        let missing: Vec<String> = predicates[i]
            .attributes()
            .into_iter()
            .filter(|a| cur.position(a).is_none())
            .collect();
        if !missing.is_empty() {
            return Err(Error::Unsafe {
                rule: format!("predicate {}", predicates[i]),
                attributes: missing,
            });
        }
    }
    Ok(cur)
}
