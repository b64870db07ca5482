use std::time::Instant;

use num_rational::BigRational;
use num_traits::Zero;
use quatgenus::classes::{
    check_pairwise_inequivalent, check_right_orders, eichler_mass, mass_per_narrow_class,
    narrow_class_mass, predicted_two_sided_count, right_ideal_classes, siegel_mass,
    two_sided_orbit_count, ClassData,
};
use quatgenus::enumeration::minimum;
use quatgenus::field::{BaseField, FieldIdeal};
use quatgenus::genus::{
    all_invariants, genus_representatives, integral_rescaling, is_a_maximal,
    proper_automorphism_order, GenusData, Section6Invariants,
};
use quatgenus::linalg::{rat, rat_int, Rat};
use quatgenus::quat::QuatAlgebra;
use quatgenus::Result;
use serde_json::{json, Map, Value};

use crate::render::{self, Table};

pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl Check {
    fn new(name: impl Into<String>, pass: bool, detail: impl Into<String>) -> Self {
        Check {
            name: name.into(),
            pass,
            detail: detail.into(),
        }
    }

    pub fn to_json(&self) -> Value {
        json!({ "name": self.name, "status": if self.pass { "PASS" } else { "FAIL" }, "detail": self.detail })
    }
}

/// What a command hands back to the report writer.
#[derive(Default)]
pub struct Outcome {
    pub results: Value,
    pub tables: Vec<Table>,
    pub checks: Vec<Check>,
}

/// Wall-clock stage timer; records nothing unless enabled.
pub struct Timer {
    on: bool,
    start: Instant,
    pub stages: Map<String, Value>,
}

impl Timer {
    pub fn new(on: bool) -> Self {
        Timer {
            on,
            start: Instant::now(),
            stages: Map::new(),
        }
    }

    fn lap(&mut self, stage: &str) {
        if self.on {
            let secs = self.start.elapsed().as_secs_f64();
            self.stages
                .insert(stage.into(), json!((secs * 1000.0).round() / 1000.0));
            self.start = Instant::now();
        }
    }
}

fn classes(alg: &QuatAlgebra, timer: &mut Timer) -> Result<ClassData> {
    let cd = right_ideal_classes(alg)?;
    timer.lap("ideal_classes");
    Ok(cd)
}

fn genus_json(alg: &QuatAlgebra, g: &GenusData) -> Result<(Value, Table)> {
    let k = alg.field();
    let mut table = Table::new(
        &format!(
            "genus of a-maximal lattices, a = {}",
            render::ideal(k, &g.a)
        ),
        &[
            "#", "left", "right", "unit", "|Aut+|", "scale", "min", "gram",
        ],
    );
    let mut reps = Vec::new();
    for (n, r) in g.reps.iter().enumerate() {
        let (scale, ints) = integral_rescaling(&r.trace_gram);
        let int_rat: Vec<Vec<Rat>> = ints
            .iter()
            .map(|row| row.iter().map(rat_int).collect())
            .collect();
        let rescaled_min = minimum(&int_rat)?;
        let trace_min = minimum(&r.trace_gram)?;
        table.push(vec![
            n.to_string(),
            r.left_type.to_string(),
            r.right_type.to_string(),
            r.u.to_string(),
            r.aut_plus_order.to_string(),
            scale.to_string(),
            rescaled_min.to_string(),
            render::int_matrix(&ints).to_string(),
        ]);
        reps.push(json!({
            "index": n,
            "ideal_class": r.class,
            "left_type": r.left_type,
            "right_type": r.right_type,
            "unit_coset": r.u.to_string(),
            "weight": r.weight.to_string(),
            "x_j": alg.render(&r.x_j),
            "alpha_u": alg.render(&r.alpha_u),
            "aut_plus_order": r.aut_plus_order,
            "ideal": render::lattice(alg, &r.ideal),
            "lattice": render::lattice(alg, &r.lattice),
            "trace_gram": render::gram(&r.trace_gram),
            "trace_minimum": trace_min.to_string(),
            "rescaled_gram": { "scale": scale.to_string(), "matrix": render::int_matrix(&ints) },
            "rescaled_minimum": rescaled_min.to_string(),
        }));
    }
    let v = json!({
        "ideal": render::ideal(k, &g.a),
        "narrow_class": k.narrow_class_index(&g.a),
        "class_count": g.reps.len(),
        "mass": g.mass().to_string(),
        "s_sizes": g.s_sizes,
        "t_sizes": g.t_sizes,
        "representatives": reps,
    });
    Ok((v, table))
}

fn genus_checks(alg: &QuatAlgebra, cd: &ClassData, g: &GenusData, tag: &str) -> Result<Vec<Check>> {
    let siegel = siegel_mass(alg);
    let mut out = vec![Check::new(
        format!("{tag}mass_closure"),
        g.mass() == siegel,
        format!("sum 1/|Aut+| = {}, Siegel mass {siegel}", g.mass()),
    )];
    let bad = g
        .reps
        .iter()
        .filter(|r| !is_a_maximal(alg, &r.lattice, &g.a))
        .count();
    out.push(Check::new(
        format!("{tag}a_maximal"),
        bad == 0,
        format!("{} of {} fail", bad, g.reps.len()),
    ));
    let mut mismatch = 0;
    for r in &g.reps {
        let inv = &g.invariants[r.left_type * cd.type_number() + r.right_type];
        if proper_automorphism_order(cd, inv)? != r.aut_plus_order {
            mismatch += 1;
        }
    }
    out.push(Check::new(
        format!("{tag}aut_plus_order"),
        mismatch == 0,
        format!("{mismatch} mismatches"),
    ));
    Ok(out)
}

pub fn genus(alg: &QuatAlgebra, a: &FieldIdeal, cap: u32, timer: &mut Timer) -> Result<Outcome> {
    let cd = classes(alg, timer)?;
    let inv = all_invariants(alg, &cd)?;
    timer.lap("invariants");
    let g = genus_representatives(alg, &cd, &inv, a, cap)?;
    timer.lap("genus");
    let (mut results, table) = genus_json(alg, &g)?;
    results["siegel_mass"] = json!(siegel_mass(alg).to_string());
    let checks = genus_checks(alg, &cd, &g, "")?;
    let mut summary = Table::new("summary", &["count", "mass", "siegel"]);
    summary.push(vec![
        g.reps.len().to_string(),
        g.mass().to_string(),
        siegel_mass(alg).to_string(),
    ]);
    Ok(Outcome {
        results,
        tables: vec![summary, table],
        checks,
    })
}

pub fn ideal_classes(alg: &QuatAlgebra, timer: &mut Timer) -> Result<Outcome> {
    let k = alg.field();
    let cd = classes(alg, timer)?;
    let mut table = Table::new(
        &format!("right ideal classes, h = {}", cd.class_number()),
        &["#", "type", "[O*:Z*]", "norm"],
    );
    let mut reps = Vec::new();
    for (n, i) in cd.ideals.iter().enumerate() {
        let norm = i.norm(alg);
        table.push(vec![
            n.to_string(),
            cd.ideal_type[n].to_string(),
            cd.unit_indices[n].to_string(),
            render::ideal(k, &norm),
        ]);
        reps.push(json!({
            "index": n,
            "left_type": cd.ideal_type[n],
            "unit_index": cd.unit_indices[n],
            "narrow_class": k.narrow_class_index(&norm),
            "ideal": render::lattice(alg, i),
        }));
    }
    let results = json!({
        "class_number": cd.class_number(),
        "type_number": cd.type_number(),
        "mass": cd.mass.to_string(),
        "primes_used": cd.primes_used.iter().map(|p| render::ideal(k, &p.ideal)).collect::<Vec<_>>(),
        "order": render::lattice(alg, &cd.order),
        "classes": reps,
    });
    let checks = vec![
        Check::new(
            "eichler_mass_closure",
            cd.mass == eichler_mass(alg),
            format!("{} = {}", cd.mass, eichler_mass(alg)),
        ),
        Check::new(
            "right_orders",
            check_right_orders(alg, &cd),
            "every representative has right order M",
        ),
    ];
    Ok(Outcome {
        results,
        tables: vec![table],
        checks,
    })
}

pub fn orders(alg: &QuatAlgebra, timer: &mut Timer) -> Result<Outcome> {
    let k = alg.field();
    let cd = classes(alg, timer)?;
    let tp = k.tp_unit_reps();
    let mut table = Table::new(
        &format!("orders of type, t = {}", cd.type_number()),
        &["type", "|M1/+-1|", "[M*:Z*]", "n(M*)", "f", "H", "ideal"],
    );
    let mut rows = Vec::new();
    for (n, t) in cd.types.iter().enumerate() {
        let image: Vec<String> = t
            .units
            .norm_image
            .iter()
            .map(|&i| tp[i].to_string())
            .collect();
        table.push(vec![
            n.to_string(),
            t.units.norm_one_mod_pm1.to_string(),
            t.units.unit_index.to_string(),
            image.join(","),
            t.normalizer.f.to_string(),
            t.two_sided_classes.to_string(),
            t.ideal_index.to_string(),
        ]);
        rows.push(json!({
            "index": n,
            "ideal_index": t.ideal_index,
            "norm_one_mod_pm1": t.units.norm_one_mod_pm1,
            "unit_index": t.units.unit_index,
            "norm_image": image,
            "f": t.normalizer.f,
            "two_sided_classes": t.two_sided_classes,
            "normalizer_norms": t.normalizer.norms(alg).iter().map(|x| x.to_string()).collect::<Vec<_>>(),
            "order": render::lattice(alg, &t.order),
        }));
    }
    let results = json!({ "type_number": cd.type_number(), "class_number": cd.class_number(), "types": rows });
    Ok(Outcome {
        results,
        tables: vec![table],
        ..Default::default()
    })
}

pub fn mass(alg: &QuatAlgebra, timer: &mut Timer) -> Result<Outcome> {
    let k = alg.field();
    let cd = classes(alg, timer)?;
    let e = eichler_mass(alg);
    let share = mass_per_narrow_class(alg);
    let mut table = Table::new("masses", &["quantity", "value"]);
    table.push(vec!["eichler".into(), e.to_string()]);
    table.push(vec!["per narrow class".into(), share.to_string()]);
    table.push(vec!["siegel".into(), siegel_mass(alg).to_string()]);
    let mut per = Vec::new();
    let mut checks = vec![Check::new(
        "eichler_mass_closure",
        cd.mass == e,
        format!("{} = {e}", cd.mass),
    )];
    for (n, a) in k.class_groups().narrow_reps.iter().enumerate() {
        let direct = narrow_class_mass(alg, &cd, a);
        checks.push(Check::new(
            format!("narrow_class_mass[{n}]"),
            direct == share,
            format!("{direct} = {share}"),
        ));
        per.push(json!({ "index": n, "ideal": render::ideal(k, a), "mass": direct.to_string() }));
    }
    let results = json!({
        "eichler_mass": e.to_string(),
        "mass_per_narrow_class": share.to_string(),
        "narrow_classes": per,
        "siegel_mass": siegel_mass(alg).to_string(),
    });
    Ok(Outcome {
        results,
        tables: vec![table],
        checks,
    })
}

fn identity_holds(x: &Section6Invariants) -> bool {
    x.y_ij + x.u == x.f_ij + x.x_i + x.x_j + x.z_ij
}

/// Every invariant suite that applies to the algebra. `fault` corrupts the
/// expected Eichler mass so that the failure path can be exercised.
pub fn verify(alg: &QuatAlgebra, cap: u32, fault: bool, timer: &mut Timer) -> Result<Outcome> {
    let k = alg.field();
    let cg = k.class_groups();
    let s = alg.ramified_primes().len() as u32;
    let cd = classes(alg, timer)?;
    let mut checks = Vec::new();

    let mut e = eichler_mass(alg);
    if fault {
        e += rat(1, 1);
    }
    checks.push(Check::new(
        "eichler_mass_closure",
        cd.mass == e,
        format!("{} vs {e}", cd.mass),
    ));
    checks.push(Check::new("right_orders", check_right_orders(alg, &cd), ""));
    checks.push(Check::new(
        "pairwise_inequivalent",
        check_pairwise_inequivalent(alg, &cd),
        "",
    ));
    let share = mass_per_narrow_class(alg);
    let mut covered = 0;
    for (n, a) in cg.narrow_reps.iter().enumerate() {
        let direct = narrow_class_mass(alg, &cd, a);
        checks.push(Check::new(
            format!("narrow_class_mass[{n}]"),
            direct == share,
            format!("{direct} vs {share}"),
        ));
        covered += cd
            .ideals
            .iter()
            .filter(|i| k.narrow_equivalent(&i.norm(alg), a))
            .count();
    }
    checks.push(Check::new(
        "norm_class_partition",
        covered == cd.class_number(),
        format!("{covered} of {} classes", cd.class_number()),
    ));
    for (n, t) in cd.types.iter().enumerate() {
        let h = (cg.h << s) >> t.normalizer.f;
        checks.push(Check::new(
            format!("two_sided_classes[{n}]"),
            t.two_sided_classes == h,
            format!("H = {} vs h*2^s/2^f = {h}", t.two_sided_classes),
        ));
    }

    let inv = all_invariants(alg, &cd)?;
    timer.lap("invariants");
    let t = cd.type_number();
    let pairs = inv.len();
    let ident = inv.iter().filter(|x| identity_holds(x)).count();
    checks.push(Check::new(
        "unit_identity",
        ident == pairs,
        format!("{ident} of {pairs} pairs"),
    ));
    let mut lemma = 0;
    let mut aut = 0;
    for x in &inv {
        if two_sided_orbit_count(alg, &cd, x.i, x.j)?
            == predicted_two_sided_count(alg, &cd, x.i, x.j)
        {
            lemma += 1;
        }
        if proper_automorphism_order(&cd, x)? == 2 * x.v_count as u64 {
            aut += 1;
        }
    }
    checks.push(Check::new(
        "two_sided_orbit_counts",
        lemma == pairs,
        format!("{lemma} of {pairs} pairs"),
    ));
    checks.push(Check::new(
        "aut_plus_brute_force",
        aut == pairs,
        format!("{aut} of {pairs} pairs"),
    ));
    timer.lap("pair_checks");

    let mut total = BigRational::zero();
    let mut genera = Vec::new();
    for (n, a) in cg.narrow_reps.iter().enumerate() {
        let g = genus_representatives(alg, &cd, &inv, a, cap)?;
        checks.extend(genus_checks(alg, &cd, &g, &format!("genus[{n}]."))?);
        total += g.mass();
        genera.push(json!({ "ideal": render::ideal(k, a), "class_count": g.reps.len(), "mass": g.mass().to_string() }));
    }
    timer.lap("genera");
    let m = eichler_mass(alg);
    let expected = &m * &m * rat(cg.h_plus as i64, (cg.h * cg.h) as i64) * rat(1, 2i64 << s);
    checks.push(Check::new(
        "global_mass_identity",
        total == expected,
        format!("{total} vs {expected}"),
    ));

    let mut table = Table::new("genera", &["narrow class", "count", "mass"]);
    for (n, g) in genera.iter().enumerate() {
        table.push(vec![
            n.to_string(),
            g["class_count"].to_string(),
            g["mass"].as_str().unwrap_or_default().into(),
        ]);
    }
    let results = json!({
        "class_number": cd.class_number(),
        "type_number": t,
        "pairs": pairs,
        "genera": genera,
    });
    Ok(Outcome {
        results,
        tables: vec![table],
        checks,
    })
}

pub fn field_json(k: &BaseField) -> Value {
    let cg = k.class_groups();
    let mut v = json!({
        "degree": k.degree(),
        "discriminant": k.discriminant().to_string(),
        "class_number": cg.h,
        "narrow_class_number": cg.h_plus,
        "narrow_class_reps": cg.narrow_reps.iter().map(|a| render::ideal(k, a)).collect::<Vec<_>>(),
    });
    if k.degree() == 1 {
        v["kind"] = json!("rationals");
    } else {
        v["kind"] = json!("real_quadratic");
        v["d"] = json!(k.d());
        v["fundamental_unit"] = json!(k
            .fundamental_unit()
            .map(|u| u.to_string())
            .unwrap_or_default());
    }
    v
}

pub fn algebra_json(alg: &QuatAlgebra) -> Value {
    let k = alg.field();
    let (a, b) = alg.input_params();
    let (ai, bi) = alg.params();
    json!({
        "a": a.to_string(),
        "b": b.to_string(),
        // the basis is built from integral multiples of a, b by square factors
        "basis_params": [ai.to_string(), bi.to_string()],
        "relations": "i^2 = -a', j^2 = -b', ij = -ji with (a', b') = basis_params",
        "ramified_primes": alg.ramified_primes().iter().map(|p| render::ideal(k, &p.ideal)).collect::<Vec<_>>(),
    })
}
