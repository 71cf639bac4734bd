use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::fixtures::tpch_catalog;
use crate::engine::{Database, RelationInstance};
use crate::value::{Value, ValueKind};

/// Deterministic Customers/Orders/Lineitem with key and foreign-key
/// integrity. Every order gets at least one line item while line items last;
/// the rest go to random orders. Quantities are in [1, 200].
pub fn gen_minitpch(customers: usize, orders: usize, lineitems: usize, seed: u64) -> Database {
    let customers = customers.max(1);
    let orders = orders.max(1);
    let lineitems = lineitems.max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut db = Database::new(tpch_catalog(ValueKind::Date));

    let mut c = RelationInstance::new("Customers", ["c_key", "c_name", "c_address"]);
    for i in 1..=customers {
        c.insert(vec![
            Value::text(format!("c{i}")),
            Value::text(format!("n{i}")),
            Value::text(format!("a{}", rng.gen_range(1..=customers.max(2) * 3))),
        ])
        .expect("arity");
    }

    let mut o = RelationInstance::new("Orders", ["o_key", "c_key", "o_date"]);
    for i in 1..=orders {
        let cust = rng.gen_range(1..=customers);
        let date = format!(
            "{}-{:02}-{:02}",
            rng.gen_range(1992..=1998),
            rng.gen_range(1..=12),
            rng.gen_range(1..=28)
        );
        o.insert(vec![
            Value::text(format!("o{i}")),
            Value::text(format!("c{cust}")),
            Value::Date(date),
        ])
        .expect("arity");
    }

    let mut per_order = vec![0usize; orders + 1];
    let mut l = RelationInstance::new("Lineitem", ["o_key", "linenum", "qty"]);
    for i in 0..lineitems {
        let ord = if i < orders { i + 1 } else { rng.gen_range(1..=orders) };
        per_order[ord] += 1;
        l.insert(vec![
            Value::text(format!("o{ord}")),
            Value::text(format!("l{}", per_order[ord])),
            Value::Int(rng.gen_range(1..=200)),
        ])
        .expect("arity");
    }

    db.insert(c).expect("generated customers are valid");
    db.insert(o).expect("generated orders are valid");
    db.insert(l).expect("generated line items are valid");
    db
}
