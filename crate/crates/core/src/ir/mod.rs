//! The rule language: SPJ and SPJA rules over named-column atoms.

mod ast;
mod parser;
mod program;
mod safety;

pub use ast::{
    rhs_attributes, AggFn, CmpOp, HeadColumn, Operand, Predicate, Rule, RuleKind, TableAtom,
};
pub use program::{view_entry, OccurrenceId, OccurrenceInfo, Program};
pub use safety::{check_safety, unsafe_attributes};

use crate::catalog::Catalog;
use crate::error::Result;

/// Parses a program against the base relations of `catalog`.
pub fn parse_program(text: &str, catalog: &Catalog) -> Result<Program> {
    Program::parse(text, catalog)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::CatalogEntry;
    use crate::error::Error;
    use crate::value::ValueKind::{Int, Text};
    use std::collections::BTreeSet;

    fn tpch() -> Catalog {
        Catalog::from_entries([
            CatalogEntry::base("Customers", &[("c_key", Text), ("c_name", Text), ("c_address", Text)])
                .with_key(&["c_key"]),
            CatalogEntry::base("Orders", &[("o_key", Text), ("c_key", Text), ("o_date", Text)])
                .with_key(&["o_key"]),
            CatalogEntry::base("Lineitem", &[("o_key", Text), ("linenum", Text), ("qty", Int)])
                .with_key(&["o_key", "linenum"]),
            CatalogEntry::base("T", &[("A", Int)]),
            CatalogEntry::base("U", &[("B", Int)]),
        ])
        .unwrap()
    }

    const Q18: &str = "Q18_tmp(o_key, sum(qty) as t_sum_qty) :- Lineitem@2.\n\
        R(c_name, c_key, o_key, o_date, sum(qty) as total_qty) :- \
        Customers, Orders, Lineitem@1, Q18_tmp, t_sum_qty > 300.";

    fn set(xs: &[&str]) -> BTreeSet<String> {
        xs.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn parses_q18() {
        let p = parse_program(Q18, &tpch()).unwrap();
        assert_eq!(p.rules().len(), 2);
        assert_eq!(p.rules()[0].kind(), RuleKind::Spja);
        let r = p.final_rule();
        assert_eq!(r.kind(), RuleKind::Spja);
        let rels: Vec<&str> = r.atoms.iter().map(|a| a.relation.as_str()).collect();
        assert_eq!(rels, ["Customers", "Orders", "Lineitem", "Q18_tmp"]);
        assert_eq!(r.predicates.len(), 1);
        assert_eq!(r.predicates[0].to_string(), "t_sum_qty > 300");
        assert_eq!(
            rhs_attributes(r),
            set(&["c_key", "c_name", "c_address", "o_key", "o_date", "linenum", "qty", "t_sum_qty"])
        );
        let labels: Vec<String> = p.occurrences().iter().map(|o| o.id.label.clone()).collect();
        assert_eq!(labels, ["Customers", "Orders", "Lineitem1", "Q18_tmp", "Lineitem2"]);
    }

    #[test]
    fn identity_rule_and_unsafe_rule() {
        let p = parse_program("R(A) :- T(A).", &tpch()).unwrap();
        let r = p.final_rule();
        assert_eq!(r.kind(), RuleKind::Spj);
        assert_eq!(r.head_attributes(), ["A"]);
        assert!(r.predicates.is_empty());
        assert_eq!(rhs_attributes(r), set(&["A"]));
        match parse_program("R(A) :- U(B).", &tpch()).unwrap_err() {
            Error::Unsafe { attributes, .. } => assert_eq!(attributes, ["A"]),
            other => panic!("{other}"),
        }
    }

    #[test]
    fn renaming_hides_the_source_name() {
        let err = parse_program("R(o_key) :- Lineitem(qty as qty2), qty > 3.", &tpch()).unwrap_err();
        match err {
            Error::Unsafe { attributes, .. } => assert_eq!(attributes, ["qty"]),
            other => panic!("{other}"),
        }
        let err = parse_program("R(o_key) :- Lineitem(nope as x).", &tpch()).unwrap_err();
        assert!(matches!(err, Error::UnknownAttribute { .. }));
        let err = parse_program("R(x) :- Nowhere(x).", &tpch()).unwrap_err();
        assert!(matches!(err, Error::UnknownRelation(_)));
    }

    #[test]
    fn program_level_errors() {
        let c = tpch();
        assert!(matches!(
            parse_program("V(A) :- T. V(A) :- T. R(A) :- V.", &c).unwrap_err(),
            Error::DuplicateHead(_)
        ));
        assert!(matches!(
            parse_program("R(A) :- V. V(A) :- T.", &c).unwrap_err(),
            Error::ForwardReference(_)
        ));
        assert!(parse_program("T(A) :- U(B as A).", &c).is_err());
        assert!(parse_program("V(A) :- T. R(B) :- U.", &c).is_err());
        assert!(parse_program("R(A) :- T, T.", &c).is_err());
        assert!(parse_program("R(A, count(A) as B) :- T, U.", &c).is_err());
        assert!(parse_program("", &c).is_err());
    }

    #[test]
    fn print_then_parse_is_a_fixed_point() {
        let c = tpch();
        for text in [
            Q18,
            "R(A) :- T(A).",
            "R(x, avg(B) as m) :- T@1(A as x), U@b, B >= -2, x != 3.25.",
            "R(o_key) :- Orders, c_key = 'it''s', o_date < date'2020-01-01'.",
        ] {
            let p = parse_program(text, &c).unwrap();
            let printed = p.to_string();
            let again = parse_program(&printed, &c).unwrap();
            assert_eq!(again, p);
            assert_eq!(again.to_string(), printed);
        }
    }

    #[test]
    fn resolves_occurrence_names() {
        let p = parse_program(Q18, &tpch()).unwrap();
        assert_eq!(p.resolve_occurrence("Lineitem2").unwrap(), OccurrenceId::new("Q18_tmp", "Lineitem2"));
        assert_eq!(p.resolve_occurrence("R.Orders").unwrap(), OccurrenceId::new("R", "Orders"));
        assert!(p.resolve_occurrence("Lineitem").is_err());
        let path = p.path_to(&OccurrenceId::new("Q18_tmp", "Lineitem2")).unwrap();
        assert_eq!(path.len(), 2);
        assert_eq!(path[0], OccurrenceId::new("R", "Q18_tmp"));
        assert_eq!(p.depth_of("Q18_tmp"), 1);
        let key = p.catalog().get("Q18_tmp").unwrap().key.clone().unwrap();
        assert_eq!(key, set(&["o_key"]));
    }
}
