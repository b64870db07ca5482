//! Exact JSON encodings and plain-text tables.

use num_traits::One;
use quatgenus::field::{BaseField, FieldIdeal};
use quatgenus::lattice::QuatLattice;
use quatgenus::linalg::{common_denominator, rat_int, Int, Rat};
use quatgenus::quat::QuatAlgebra;
use serde_json::{json, Value};

fn int_json(x: &Int) -> Value {
    // i64 when it fits, decimal string otherwise
    match i64::try_from(x) {
        Ok(v) => json!(v),
        Err(_) => json!(x.to_string()),
    }
}

/// Rational matrix as integer rows over a common denominator.
pub fn gram(g: &[Vec<Rat>]) -> Value {
    let den = common_denominator(g.iter().flatten());
    let rows: Vec<Vec<Value>> = g
        .iter()
        .map(|r| {
            r.iter()
                .map(|x| int_json(&(x * rat_int(&den)).to_integer()))
                .collect()
        })
        .collect();
    json!({ "denominator": int_json(&den), "matrix": rows })
}

pub fn int_matrix(g: &[Vec<Int>]) -> Value {
    json!(g
        .iter()
        .map(|r| r.iter().map(int_json).collect::<Vec<_>>())
        .collect::<Vec<_>>())
}

fn hnf_text(den: &Int, rows: &[Vec<Int>]) -> String {
    let rows: Vec<String> = rows
        .iter()
        .map(|r| {
            format!(
                "[{}]",
                r.iter()
                    .map(|x| x.to_string())
                    .collect::<Vec<_>>()
                    .join(",")
            )
        })
        .collect();
    let mut s = format!("[{}]", rows.join(","));
    if !den.is_one() {
        s += &format!("/{den}");
    }
    s
}

/// `norm:HNF`, the HNF given in integral-basis coordinates.
pub fn ideal(k: &BaseField, a: &FieldIdeal) -> String {
    let z = a.lattice();
    format!("{}:{}", k.ideal_norm(a), hnf_text(z.den(), z.int_rows()))
}

pub fn lattice(alg: &QuatAlgebra, l: &QuatLattice) -> Value {
    let z = l.zlattice();
    json!({
        "norm": ideal(alg.field(), &l.norm(alg)),
        "denominator": int_json(z.den()),
        "hnf": int_matrix(z.int_rows()),
        "basis": l.basis(alg).iter().map(|x| alg.render(x)).collect::<Vec<_>>(),
    })
}

/// Plain-text table with right-aligned columns.
pub struct Table {
    pub title: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(title: &str, header: &[&str]) -> Self {
        Table {
            title: title.into(),
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    pub fn render(&self) -> String {
        let n = self.header.len();
        let mut w = vec![0; n];
        for r in std::iter::once(&self.header).chain(&self.rows) {
            for (c, cell) in r.iter().enumerate() {
                w[c] = w[c].max(cell.chars().count());
            }
        }
        let line = |r: &[String]| {
            let cells: Vec<String> = r
                .iter()
                .enumerate()
                .map(|(c, s)| format!("{s:>width$}", width = w[c]))
                .collect();
            cells.join("  ").trim_end().to_string()
        };
        let mut out = format!("{}\n{}\n", self.title, line(&self.header));
        for r in &self.rows {
            out += &line(r);
            out.push('\n');
        }
        out
    }
}
