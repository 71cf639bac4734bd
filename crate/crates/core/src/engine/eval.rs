use std::collections::HashMap;

use rust_decimal::Decimal;

use super::join::{join_all, Bindings, JoinInput};
use super::relation::{RelationInstance, Row};
use super::Database;
use crate::error::{Error, Result};
use crate::ir::{AggFn, HeadColumn, Program, Rule};
use crate::value::{round_avg, Value};

/// The joined, filtered body of `rule` over exposed names.
pub fn eval_body(rule: &Rule, db: &Database) -> Result<Bindings> {
    let mut inputs = Vec::with_capacity(rule.atoms.len());
    for atom in &rule.atoms {
        inputs.push(JoinInput::atom(db.require(&atom.relation)?, atom)?);
    }
    join_all(&inputs, &rule.predicates)
}

pub fn eval_rule(rule: &Rule, db: &Database) -> Result<RelationInstance> {
    let b = eval_body(rule, db)?;
    head_from_bindings(rule, &b)
}

/// Projects (SPJ) or groups and aggregates (SPJA) the body bindings.
pub fn head_from_bindings(rule: &Rule, b: &Bindings) -> Result<RelationInstance> {
    let pos = |a: &str| {
        b.position(a).ok_or_else(|| Error::Unsafe {
            rule: rule.head.clone(),
            attributes: vec![a.to_string()],
        })
    };
    let mut out = RelationInstance::new(&rule.head, rule.head_attributes());
    if rule.head_columns.iter().all(HeadColumn::is_plain) {
        let ps: Vec<usize> = rule.head_columns.iter().map(|c| pos(c.output())).collect::<Result<_>>()?;
        for row in &b.rows {
            out.insert_unchecked(ps.iter().map(|&p| row[p].clone()).collect());
        }
        return Ok(out);
    }
    let group: Vec<usize> = rule
        .plain_columns()
        .iter()
        .map(|a| pos(a))
        .collect::<Result<_>>()?;
    let mut groups: HashMap<Vec<&Value>, Vec<&Row>> = HashMap::new();
    for row in &b.rows {
        groups
            .entry(group.iter().map(|&p| &row[p]).collect())
            .or_default()
            .push(row);
    }
    for rows in groups.values() {
        let mut out_row = Vec::with_capacity(rule.head_columns.len());
        for c in &rule.head_columns {
            match c {
                HeadColumn::Plain(a) => out_row.push(rows[0][pos(a)?].clone()),
                HeadColumn::Aggregate { func, input, .. } => {
                    let p = pos(input)?;
                    out_row.push(aggregate(*func, rows.iter().map(|r| &r[p]))?);
                }
            }
        }
        out.insert_unchecked(out_row);
    }
    Ok(out)
}

/// Folds a non-empty group of values.
pub fn aggregate<'a>(func: AggFn, mut values: impl Iterator<Item = &'a Value>) -> Result<Value> {
    let first = values.next().ok_or_else(|| Error::Plan("aggregate over an empty group".into()))?;
    let bad = |v: &Value| Error::BadAggregate {
        func: func.name().to_string(),
        kind: v.kind(),
    };
    let overflow = || Error::Overflow(func.name().to_string());
    match func {
        AggFn::Count => Ok(Value::Int(1 + values.count() as i64)),
        AggFn::Min | AggFn::Max => {
            let mut best = first;
            for v in values {
                let ord = v.compare(best)?;
                let better = match func {
                    AggFn::Min => ord.is_lt(),
                    _ => ord.is_gt(),
                };
                if better {
                    best = v;
                }
            }
            Ok(best.clone())
        }
        AggFn::Sum | AggFn::Avg => {
            let mut n: i64 = 1;
            let total = match first {
                Value::Int(i) => {
                    let mut acc = *i;
                    for v in values {
                        let Value::Int(x) = v else { return Err(bad(v)) };
                        acc = acc.checked_add(*x).ok_or_else(overflow)?;
                        n += 1;
                    }
                    if func == AggFn::Sum {
                        return Ok(Value::Int(acc));
                    }
                    Decimal::from(acc)
                }
                Value::Decimal(d) => {
                    let mut acc = *d;
                    for v in values {
                        let Value::Decimal(x) = v else { return Err(bad(v)) };
                        acc = acc.checked_add(*x).ok_or_else(overflow)?;
                        n += 1;
                    }
                    if func == AggFn::Sum {
                        return Ok(Value::Decimal(acc));
                    }
                    acc
                }
                other => return Err(bad(other)),
            };
            let avg = total.checked_div(Decimal::from(n)).ok_or_else(overflow)?;
            Ok(Value::Decimal(round_avg(avg)))
        }
    }
}

/// Evaluates every rule in order; the returned database also holds each head.
pub fn eval_program(program: &Program, db: &Database) -> Result<Database> {
    let mut out = db.with_catalog(program.catalog().clone());
    for rule in program.rules() {
        let inst = eval_rule(rule, &out)?;
        out.put(inst);
    }
    Ok(out)
}
