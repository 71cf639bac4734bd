use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::value::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CmpOp {
    Lt,
    Le,
    Eq,
    Ne,
    Ge,
    Gt,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Eq => "=",
            CmpOp::Ne => "!=",
            CmpOp::Ge => ">=",
            CmpOp::Gt => ">",
        }
    }

    pub fn holds(self, ord: std::cmp::Ordering) -> bool {
        use std::cmp::Ordering::*;
        match self {
            CmpOp::Lt => ord == Less,
            CmpOp::Le => ord != Greater,
            CmpOp::Eq => ord == Equal,
            CmpOp::Ne => ord != Equal,
            CmpOp::Ge => ord != Less,
            CmpOp::Gt => ord == Greater,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Operand {
    Attr(String),
    Const(Value),
}

impl Operand {
    pub fn attr(&self) -> Option<&str> {
        match self {
            Operand::Attr(a) => Some(a),
            Operand::Const(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Predicate {
    pub left: Operand,
    pub op: CmpOp,
    pub right: Operand,
}

impl Predicate {
    pub fn new(left: Operand, op: CmpOp, right: Operand) -> Predicate {
        Predicate { left, op, right }
    }

    pub fn attributes(&self) -> BTreeSet<String> {
        [&self.left, &self.right]
            .into_iter()
            .filter_map(|o| o.attr().map(str::to_string))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AggFn {
    Sum,
    Count,
    Min,
    Max,
    Avg,
}

impl AggFn {
    pub fn parse(s: &str) -> Option<AggFn> {
        match s.to_ascii_lowercase().as_str() {
            "sum" => Some(AggFn::Sum),
            "count" => Some(AggFn::Count),
            "min" => Some(AggFn::Min),
            "max" => Some(AggFn::Max),
            "avg" => Some(AggFn::Avg),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            AggFn::Sum => "sum",
            AggFn::Count => "count",
            AggFn::Min => "min",
            AggFn::Max => "max",
            AggFn::Avg => "avg",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum HeadColumn {
    Plain(String),
    Aggregate {
        func: AggFn,
        input: String,
        output: String,
    },
}

impl HeadColumn {
    pub fn output(&self) -> &str {
        match self {
            HeadColumn::Plain(a) => a,
            HeadColumn::Aggregate { output, .. } => output,
        }
    }

    pub fn is_plain(&self) -> bool {
        matches!(self, HeadColumn::Plain(_))
    }
}

/// One appearance of a relation in a rule body.
///
/// `columns` lists every source attribute of the relation, in schema order,
/// paired with the name it is exposed under. `listed` keeps the column list as
/// written so the printer can reproduce it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TableAtom {
    pub relation: String,
    pub alias: String,
    pub label: String,
    pub listed: Vec<(String, String)>,
    pub columns: Vec<(String, String)>,
}

impl TableAtom {
    pub fn label_for(relation: &str, alias: &str) -> String {
        if alias == relation {
            relation.to_string()
        } else {
            format!("{relation}{alias}")
        }
    }

    pub fn exposed(&self) -> BTreeSet<String> {
        self.columns.iter().map(|(_, e)| e.clone()).collect()
    }

    pub fn exposed_name(&self, source: &str) -> Option<&str> {
        self.columns
            .iter()
            .find(|(s, _)| s == source)
            .map(|(_, e)| e.as_str())
    }

    pub fn source_name(&self, exposed: &str) -> Option<&str> {
        self.columns
            .iter()
            .find(|(_, e)| e == exposed)
            .map(|(s, _)| s.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RuleKind {
    Spj,
    Spja,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rule {
    pub head: String,
    pub head_columns: Vec<HeadColumn>,
    pub atoms: Vec<TableAtom>,
    pub predicates: Vec<Predicate>,
}

impl Rule {
    pub fn kind(&self) -> RuleKind {
        if self.head_columns.iter().any(|c| !c.is_plain()) {
            RuleKind::Spja
        } else {
            RuleKind::Spj
        }
    }

    /// A_R: the head's output column names in order.
    pub fn head_attributes(&self) -> Vec<String> {
        self.head_columns.iter().map(|c| c.output().to_string()).collect()
    }

    /// The group-by list (all head columns for an SPJ rule).
    pub fn plain_columns(&self) -> Vec<String> {
        self.head_columns
            .iter()
            .filter_map(|c| match c {
                HeadColumn::Plain(a) => Some(a.clone()),
                HeadColumn::Aggregate { .. } => None,
            })
            .collect()
    }

    pub fn atom(&self, label: &str) -> Option<&TableAtom> {
        self.atoms.iter().find(|a| a.label == label)
    }

    pub fn atom_index(&self, label: &str) -> Option<usize> {
        self.atoms.iter().position(|a| a.label == label)
    }
}

/// A_RHS: union of the exposed attributes of the body atoms.
pub fn rhs_attributes(rule: &Rule) -> BTreeSet<String> {
    rule.atoms.iter().flat_map(|a| a.exposed()).collect()
}

fn fmt_const(v: &Value, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match v {
        Value::Int(_) | Value::Decimal(_) => write!(f, "{v}"),
        Value::Text(s) => write!(f, "'{}'", s.replace('\'', "''")),
        Value::Date(s) => write!(f, "date'{s}'"),
    }
}

impl fmt::Display for Operand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Operand::Attr(a) => f.write_str(a),
            Operand::Const(v) => fmt_const(v, f),
        }
    }
}

impl fmt::Display for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.left, self.op.symbol(), self.right)
    }
}

impl fmt::Display for HeadColumn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HeadColumn::Plain(a) => f.write_str(a),
            HeadColumn::Aggregate {
                func,
                input,
                output,
            } => write!(f, "{}({input}) as {output}", func.name()),
        }
    }
}

impl fmt::Display for TableAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.relation)?;
        if self.alias != self.relation {
            write!(f, "@{}", self.alias)?;
        }
        if !self.listed.is_empty() {
            let cols: Vec<String> = self
                .listed
                .iter()
                .map(|(s, e)| if s == e { s.clone() } else { format!("{s} as {e}") })
                .collect();
            write!(f, "({})", cols.join(", "))?;
        }
        Ok(())
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let head: Vec<String> = self.head_columns.iter().map(|c| c.to_string()).collect();
        write!(f, "{}({}) :- ", self.head, head.join(", "))?;
        let body: Vec<String> = self
            .atoms
            .iter()
            .map(|a| a.to_string())
            .chain(self.predicates.iter().map(|p| p.to_string()))
            .collect();
        write!(f, "{}.", body.join(", "))
    }
}
