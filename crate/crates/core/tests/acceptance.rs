//! Acceptance run: one line per criterion, non-zero exit if any fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_rational::BigRational;
use quatgenus::classes::{
    eichler_mass, mass_per_narrow_class, narrow_class_mass, predicted_two_sided_count,
    right_ideal_classes, siegel_mass, two_sided_orbit_count, ClassData,
};
use quatgenus::enumeration::{minimum, trace_gram};
use quatgenus::field::{make_field, FieldSpec};
use quatgenus::genus::{
    all_invariants, genus_representatives, integral_rescaling, is_a_maximal,
    proper_automorphism_order, GenusData, Section6Invariants,
};
use quatgenus::lattice::{lattice_mul, maximal_order};
use quatgenus::linalg::{int, rat, rat_int};
use quatgenus::quat::{make_algebra, QuatAlgebra};

type Rat = BigRational;

// ------------------------------------------------------------------ oracles

fn sigma1(n: i64) -> i64 {
    (1..=n).filter(|d| n % d == 0).sum()
}

/// `ζ_K(−1)` for the real quadratic field of discriminant `disc`, via
/// `(1/60)·Σ_{b² < D, b ≡ D (2)} σ₁((D − b²)/4)`.
fn zeta_oracle(disc: i64) -> Rat {
    let mut total = 0;
    let mut b = -disc;
    while b <= disc {
        if b * b < disc && (disc - b).rem_euclid(2) == 0 {
            total += sigma1((disc - b * b) / 4);
        }
        b += 1;
    }
    rat(total, 60)
}

/// Units of norm one in an order, by brute force over a coefficient box.
fn brute_force_norm_one(alg: &QuatAlgebra, box_size: i64) -> usize {
    let m = maximal_order(alg);
    let basis = m.basis(alg);
    let one = alg.field().one();
    let mut count = 0;
    let r = -box_size..=box_size;
    for a in r.clone() {
        for b in r.clone() {
            for c in r.clone() {
                for d in r.clone() {
                    let x = [a, b, c, d]
                        .iter()
                        .zip(&basis)
                        .fold(alg.zero(), |acc, (ci, e)| {
                            alg.add(&acc, &alg.scale(e, &rat(*ci, 1)))
                        });
                    if alg.reduced_norm(&x) == one {
                        count += 1;
                    }
                }
            }
        }
    }
    count
}

// ---------------------------------------------------------------- fixtures

struct Q15 {
    alg: QuatAlgebra,
    cd: ClassData,
    inv: Vec<Section6Invariants>,
    /// narrow classes of `1`, `𝔭₃`, `𝔭₅`, `𝔭₃𝔭₅`
    labels: Vec<usize>,
    genera: Vec<GenusData>,
    elapsed: Duration,
}

fn q15() -> Result<Q15, String> {
    let t0 = Instant::now();
    let k = make_field(FieldSpec::RealQuadratic(15)).map_err(|e| e.to_string())?;
    let alg = make_algebra(&k, &k.one(), &k.one()).map_err(|e| e.to_string())?;
    let cd = right_ideal_classes(&alg).map_err(|e| e.to_string())?;
    let inv = all_invariants(&alg, &cd).map_err(|e| e.to_string())?;
    let p3 = k.primes_above(&int(3))[0].ideal.clone();
    let p5 = k.primes_above(&int(5))[0].ideal.clone();
    let p15 = k.ideal_mul(&p3, &p5);
    // Z_K, 𝔭₃⁻¹, 𝔭₅⁻¹, (𝔭₃𝔭₅)⁻¹
    let ideals = vec![
        k.unit_ideal(),
        k.ideal_inverse(&p3),
        k.ideal_inverse(&p5),
        k.ideal_inverse(&p15),
    ];
    let labels = [k.unit_ideal(), p3, p5, p15]
        .iter()
        .map(|a| k.narrow_class_index(a))
        .collect();
    let mut genera = Vec::new();
    for a in &ideals {
        genera.push(genus_representatives(&alg, &cd, &inv, a, 32).map_err(|e| e.to_string())?);
    }
    Ok(Q15 {
        alg,
        cd,
        inv,
        labels,
        genera,
        elapsed: t0.elapsed(),
    })
}

// ------------------------------------------------------- published tables

/// Per type: (|M^(1)/±1|, [M^*:Z_K^*]).
const UNIT_TABLE: [(usize, usize); 8] = [
    (4, 4),
    (2, 4),
    (12, 12),
    (1, 2),
    (3, 6),
    (6, 6),
    (2, 4),
    (3, 3),
];
/// Narrow class of `n(M_1 M_i)`, as an index into `1, 𝔭₃, 𝔭₅, 𝔭₃𝔭₅`.
const NORM_CLASS: [usize; 8] = [0, 2, 2, 1, 3, 2, 0, 3];
const Z_ONE: [(usize, usize); 6] = [(1, 1), (3, 3), (1, 3), (6, 6), (8, 8), (6, 8)];
/// Rows `Z_K, 𝔭₃⁻¹, 𝔭₅⁻¹, 𝔭₁₅⁻¹`; columns: left types with norm class `1, 𝔭₅, 𝔭₃, 𝔭₁₅`.
const PARTITION: [[usize; 4]; 4] = [[5, 11, 1, 5], [2, 7, 2, 7], [7, 7, 2, 2], [4, 3, 3, 4]];
const COLUMN_CLASS: [usize; 4] = [0, 2, 1, 3];
const COUNTS: [usize; 4] = [22, 18, 18, 14];

fn z_expected(i: usize, j: usize) -> u32 {
    Z_ONE
        .iter()
        .any(|&(a, b)| (a, b) == (i + 1, j + 1) || (b, a) == (i + 1, j + 1)) as u32
}

/// Assignments of our types to the published indices that respect the unit
/// table and the norm classes.
fn matchings(q: &Q15) -> Vec<Vec<usize>> {
    let k = q.alg.field();
    let t = q.cd.type_number();
    let ours: Vec<((usize, usize), usize)> =
        q.cd.types
            .iter()
            .map(|ty| {
                let n = lattice_mul(&q.alg, &q.cd.order, &ty.order).norm(&q.alg);
                let c = k.narrow_class_index(&n);
                let label = q.labels.iter().position(|l| *l == c).expect("narrow class");
                ((ty.units.norm_one_mod_pm1, ty.units.unit_index), label)
            })
            .collect();
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn go(
        ours: &[((usize, usize), usize)],
        cur: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
        t: usize,
    ) {
        if cur.len() == t {
            out.push(cur.clone());
            return;
        }
        let (u, c) = ours[cur.len()];
        for p in 0..8 {
            if !cur.contains(&p) && UNIT_TABLE[p] == u && NORM_CLASS[p] == c {
                cur.push(p);
                go(ours, cur, out, t);
                cur.pop();
            }
        }
    }
    if t == 8 {
        go(&ours, &mut cur, &mut out, t);
    }
    out
}

// ----------------------------------------------------------------- criteria

type Outcome = (bool, String);

fn criterion1(q: &Q15) -> Outcome {
    let counts: Vec<usize> = q.genera.iter().map(|g| g.reps.len()).collect();
    let fast = q.elapsed < Duration::from_secs(600);
    (
        counts == COUNTS && fast,
        format!("counts {counts:?}, {:.1}s", q.elapsed.as_secs_f64()),
    )
}

fn criterion2(q: &Q15) -> Outcome {
    let t = q.cd.type_number();
    let h = q.cd.class_number();
    let perms = matchings(q);
    let z_ok = perms
        .iter()
        .find(|p| q.inv.iter().all(|x| x.z_ij == z_expected(p[x.i], p[x.j])));
    let k = q.alg.field();
    // left type of each representative, by norm class of n(M·M_i)
    let partition_ok = q.genera.iter().enumerate().all(|(row, g)| {
        (0..4).all(|col| {
            let got = g
                .reps
                .iter()
                .filter(|r| {
                    let n = lattice_mul(&q.alg, &q.cd.order, &q.cd.types[r.left_type].order)
                        .norm(&q.alg);
                    k.narrow_class_index(&n) == q.labels[COLUMN_CLASS[col]]
                })
                .count();
            got == PARTITION[row][col]
        })
    });
    let ok = t == 8 && h == 8 && !perms.is_empty() && z_ok.is_some() && partition_ok;
    (
        ok,
        format!(
            "t={t}, h={h}, unit table matched: {}, z pattern matched: {}, partition table: {}",
            !perms.is_empty(),
            z_ok.is_some(),
            partition_ok
        ),
    )
}

fn criterion3(q: &Q15) -> Outcome {
    let z = zeta_oracle(60);
    let siegel = rat(1, 8) * &z * &z;
    let masses: Vec<Rat> = q.genera.iter().map(|g| g.mass()).collect();
    let genus_ok =
        masses.iter().all(|m| *m == siegel && *m == rat(1, 2)) && siegel_mass(&q.alg) == siegel;
    let direct: Rat = q.cd.unit_indices.iter().map(|u| rat(1, *u as i64)).sum();
    let table: Rat = UNIT_TABLE.iter().map(|(_, u)| rat(1, *u as i64)).sum();
    let eichler_ok = eichler_mass(&q.alg) == rat(2, 1)
        && direct == rat(2, 1)
        && table == rat(2, 1)
        && z == rat(2, 1);
    (
        genus_ok && eichler_ok,
        format!(
            "genus masses {} (oracle {siegel}), Eichler {direct}",
            masses
                .iter()
                .map(|m| m.to_string())
                .collect::<Vec<_>>()
                .join(", ")
        ),
    )
}

fn criterion4() -> Outcome {
    let t0 = Instant::now();
    let run = || -> quatgenus::Result<(usize, u64, Rat, Rat, Rat)> {
        let k = make_field(FieldSpec::Rationals)?;
        let alg = make_algebra(&k, &k.one(), &k.one())?;
        let cd = right_ideal_classes(&alg)?;
        let inv = all_invariants(&alg, &cd)?;
        let g = genus_representatives(&alg, &cd, &inv, &k.unit_ideal(), 32)?;
        Ok((
            g.reps.len(),
            g.reps[0].aut_plus_order,
            eichler_mass(&alg),
            siegel_mass(&alg),
            g.mass(),
        ))
    };
    match run() {
        Ok((n, aut, eichler, siegel, mass)) => {
            let elapsed = t0.elapsed();
            let k = make_field(FieldSpec::Rationals).unwrap();
            let alg = make_algebra(&k, &k.one(), &k.one()).unwrap();
            // |Aut⁺| = |M^(1)|²/2 · [N(M):K^*M^*] with the units counted by brute force
            let units = brute_force_norm_one(&alg, 2) as u64;
            let oracle_aut = units * units / 2 * 2;
            let ok = n == 1
                && aut == 576
                && aut == oracle_aut
                && eichler == rat(1, 12)
                && siegel == rat(1, 576)
                && mass == siegel
                && elapsed < Duration::from_secs(5);
            (ok, format!("{n} class, |Aut⁺| {aut} (oracle {oracle_aut}), Eichler {eichler}, Siegel {siegel}, {:.2}s", elapsed.as_secs_f64()))
        }
        Err(e) => (false, e.to_string()),
    }
}

fn criterion5() -> Outcome {
    let run = || -> quatgenus::Result<Outcome> {
        let k = make_field(FieldSpec::Rationals)?;
        let alg = make_algebra(&k, &k.one(), &k.from_int(11))?;
        let cd = right_ideal_classes(&alg)?;
        let inv = all_invariants(&alg, &cd)?;
        let g = genus_representatives(&alg, &cd, &inv, &k.unit_ideal(), 32)?;
        let mut ui = cd.unit_indices.clone();
        ui.sort();
        let direct: Rat = ui.iter().map(|u| rat(1, *u as i64)).sum();
        let oracle_mass = rat(1, 12) * rat(10, 1);
        let oracle_siegel = rat(1, 2) * rat(1, 144) * rat(100, 2);
        let ok = cd.class_number() == 2
            && ui == vec![2, 3]
            && direct == oracle_mass
            && direct == rat(5, 6)
            && siegel_mass(&alg) == oracle_siegel
            && g.mass() == oracle_siegel;
        Ok((
            ok,
            format!(
                "h={}, unit indices {ui:?}, mass {direct}, genus mass {} (Siegel {oracle_siegel})",
                cd.class_number(),
                g.mass()
            ),
        ))
    };
    run().unwrap_or_else(|e| (false, e.to_string()))
}

fn criterion6(q: &Q15) -> Outcome {
    let e8 = &q.genera[3];
    let mins: Vec<Rat> = e8
        .reps
        .iter()
        .map(|r| {
            let (_, g) = integral_rescaling(&r.trace_gram);
            let g: Vec<Vec<Rat>> = g
                .iter()
                .map(|row| row.iter().map(rat_int).collect())
                .collect();
            minimum(&g).expect("positive definite")
        })
        .collect();
    let e8_ok = mins.len() == 14 && mins.iter().all(|m| *m == rat(2, 1));
    let k = q.alg.field();
    let eps = k.fundamental_unit().expect("unit");
    // the type with unit group A4 (published index 3)
    let m3 = matchings(q)
        .first()
        .and_then(|p| p.iter().position(|&x| x == 2));
    let min6 = m3.map(|i| {
        minimum(&trace_gram(&q.alg, &q.cd.types[i].order, &eps).expect("totally positive"))
            .expect("definite")
    });
    let ok = e8_ok && min6 == Some(rat(6, 1));
    (
        ok,
        format!(
            "{} rescaled minima all 2: {e8_ok}; (M_3, εn) minimum {:?}",
            mins.len(),
            min6.map(|m| m.to_string())
        ),
    )
}

fn identity_suite(
    alg: &QuatAlgebra,
    cd: &ClassData,
    inv: &[Section6Invariants],
    genera: &[GenusData],
) -> Result<usize, String> {
    let k = alg.field();
    let s = alg.ramified_primes().len() as u32;
    let h = k.class_groups().h;
    let mut checks = 0;
    for t in &cd.types {
        if t.two_sided_classes != (h << s) >> t.normalizer.f {
            return Err("H formula".into());
        }
        checks += 1;
    }
    for x in inv {
        if x.y_ij + x.u != x.f_ij + x.x_i + x.x_j + x.z_ij {
            return Err(format!("identity at ({}, {})", x.i, x.j));
        }
        let count = two_sided_orbit_count(alg, cd, x.i, x.j).map_err(|e| e.to_string())?;
        if count != predicted_two_sided_count(alg, cd, x.i, x.j) {
            return Err(format!("two-sided count at ({}, {})", x.i, x.j));
        }
        let aut = proper_automorphism_order(cd, x).map_err(|e| e.to_string())?;
        if aut != 2 * x.v_count as u64 {
            return Err(format!("Aut⁺ at ({}, {})", x.i, x.j));
        }
        checks += 3;
    }
    for g in genera {
        for r in &g.reps {
            if !is_a_maximal(alg, &r.lattice, &g.a) {
                return Err("representative not 𝔞-maximal".into());
            }
            checks += 1;
        }
    }
    let hp = BigInt::from(k.class_groups().h_plus);
    for a in &k.class_groups().narrow_reps {
        let m = narrow_class_mass(alg, cd, a);
        if m != mass_per_narrow_class(alg)
            || eichler_mass(alg) != &m * BigRational::from_integer(hp.clone())
        {
            return Err("narrow class mass".into());
        }
        checks += 1;
    }
    Ok(checks)
}

fn criterion7(q: &Q15) -> Outcome {
    let mut total = 0;
    let mut others = vec![
        (FieldSpec::Rationals, 1, 1),
        (FieldSpec::Rationals, 1, 11),
        (FieldSpec::RealQuadratic(7), 1, 3),
    ];
    match identity_suite(&q.alg, &q.cd, &q.inv, &q.genera) {
        Ok(n) => total += n,
        Err(e) => return (false, format!("q15: {e}")),
    }
    for (spec, a, b) in others.drain(..) {
        let run = || -> Result<usize, String> {
            let k = make_field(spec).map_err(|e| e.to_string())?;
            let alg =
                make_algebra(&k, &k.from_int(a), &k.from_int(b)).map_err(|e| e.to_string())?;
            let cd = right_ideal_classes(&alg).map_err(|e| e.to_string())?;
            let inv = all_invariants(&alg, &cd).map_err(|e| e.to_string())?;
            let genera = k
                .class_groups()
                .narrow_reps
                .iter()
                .map(|nr| genus_representatives(&alg, &cd, &inv, nr, 32).map_err(|e| e.to_string()))
                .collect::<Result<Vec<_>, _>>()?;
            identity_suite(&alg, &cd, &inv, &genera)
        };
        match run() {
            Ok(n) => total += n,
            Err(e) => return (false, format!("{spec:?} ({a},{b}): {e}")),
        }
    }
    (
        true,
        format!("{total} checks over q15, Hurwitz, (-1,-11/Q), (-1,-3/Q(√7))"),
    )
}

fn main() -> ExitCode {
    let q = q15();
    let results: Vec<Outcome> = match &q {
        Ok(q) => vec![
            criterion1(q),
            criterion2(q),
            criterion3(q),
            criterion4(),
            criterion5(),
            criterion6(q),
            criterion7(q),
        ],
        Err(e) => {
            let fail = (false, format!("q15 pipeline failed: {e}"));
            vec![
                fail.clone(),
                fail.clone(),
                fail.clone(),
                criterion4(),
                criterion5(),
                fail.clone(),
                fail,
            ]
        }
    };
    let mut all = true;
    for (i, (ok, detail)) in results.iter().enumerate() {
        all &= ok;
        println!(
            "criterion {}: {} ({detail})",
            i + 1,
            if *ok { "PASS" } else { "FAIL" }
        );
    }
    println!("criterion 8: EXCLUDED (degree-9 example is out of scope at desk scale)");
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
