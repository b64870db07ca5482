//! Proper isometry classes of `𝔞`-maximal quaternary lattices, built from
//! the normal ideals of the algebra.

use std::collections::HashMap;

use num_integer::Integer;
use num_traits::{Signed, Zero};

use crate::classes::{pi_intersection, siegel_mass, ClassData, TypeData};
use crate::enumeration::{is_left_principal, minimum, solve_norm_equation, trace_gram};
use crate::error::{Error, Result};
use crate::field::{FieldElem, FieldIdeal};
use crate::lattice::{
    inverse_unchecked, is_normal, lattice_mul, right_order, scale_left, scale_right, QuatLattice,
};
use crate::linalg::{common_denominator, rat, rat_int, Int, Rat};
use crate::quat::{QuatAlgebra, QuatElem};

/// True if `l` is normal with `n(l) = 𝔞`.
pub fn is_a_maximal(alg: &QuatAlgebra, l: &QuatLattice, a: &FieldIdeal) -> bool {
    is_normal(alg, l) && l.norm(alg) == *a
}

/// Invariants of a pair of types; all `2^…` exponents.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Section6Invariants {
    pub i: usize,
    pub j: usize,
    pub f_i: u32,
    pub f_j: u32,
    pub f_ij: u32,
    pub x_i: u32,
    pub x_j: u32,
    pub y_ij: u32,
    pub z_ij: u32,
    pub u: u32,
    /// Indices (into the totally positive unit representatives) of `U(J)/(Z_K^*)²`.
    pub u_j: Vec<usize>,
    /// `|V_ij|`, counted directly.
    pub v_count: usize,
    /// `|U_ij|`, counted directly.
    pub u_count: usize,
}

impl Section6Invariants {
    /// `½|M_i^(1)||M_j^(1)|2^y`.
    pub fn aut_order(&self, cd: &ClassData) -> u64 {
        let a = cd.types[self.i].units.norm_one_mod_pm1 as u64;
        let b = cd.types[self.j].units.norm_one_mod_pm1 as u64;
        (2 * a * b) << self.y_ij
    }
}

/// Elements of `N(O)/K^*`: normalizer coset representatives times unit
/// representatives.
fn normalizer_elements(alg: &QuatAlgebra, t: &TypeData) -> Vec<FieldElem> {
    let mut out = Vec::new();
    for g in &t.normalizer.coset_reps {
        for m in &t.units.unit_reps {
            out.push(alg.reduced_norm(&alg.mul(g, m)));
        }
    }
    out
}

/// `U(J)/(Z_K^*)²` for `J` with left order of type `i` and right order of
/// type `j`, as indices of totally positive unit classes.
pub fn compute_u(alg: &QuatAlgebra, left: &TypeData, right: &TypeData) -> Vec<usize> {
    let k = alg.field();
    let mut gens: Vec<usize> = left.units.norm_image.clone();
    gens.extend(&right.units.norm_image);
    for gl in left.normalizer.norms(alg) {
        for gr in right.normalizer.norms(alg) {
            if let Some(e) = k.unit_part(&k.div(&gl, &gr)) {
                gens.push(
                    k.unit_square_class(&e)
                        .expect("quotient of totally positive norms"),
                );
            }
        }
    }
    // Z_{K,>0}^*/(Z_K^*)² has order at most 2 for the fields handled here
    let n = k.tp_unit_reps().len();
    assert!(n <= 2);
    if gens.iter().any(|&g| g != 0) {
        (0..n).collect()
    } else {
        vec![0]
    }
}

/// The invariants of types `i`, `j`, with the identities relating them
/// checked against direct counts.
pub fn section6_invariants(
    alg: &QuatAlgebra,
    cd: &ClassData,
    i: usize,
    j: usize,
) -> Result<Section6Invariants> {
    let k = alg.field();
    let (ti, tj) = (&cd.types[i], &cd.types[j]);
    let u = k.class_groups().u;
    let f_ij = pi_intersection(alg, &ti.normalizer, &tj.normalizer);
    let u_j = compute_u(alg, ti, tj);
    let z_ij = u - u_j.len().trailing_zeros();
    let (x_i, x_j) = (ti.units.x, tj.units.x);
    let y = (f_ij + x_i + x_j + z_ij)
        .checked_sub(u)
        .ok_or_else(|| Error::Inconsistent(format!("negative y for types {i}, {j}")))?;
    let ni = normalizer_elements(alg, ti);
    let nj = normalizer_elements(alg, tj);
    let mut v_count = 0;
    let mut u_count = 0;
    for a in &ni {
        for b in &nj {
            let r = k.div(a, b);
            if k.is_square(&r) {
                v_count += 1;
            }
            if k.is_unit_times_square(&r) {
                u_count += 1;
            }
        }
    }
    let base = ti.units.norm_one_mod_pm1 * tj.units.norm_one_mod_pm1;
    if v_count != base << y {
        return Err(Error::Inconsistent(format!(
            "|V_{i}{j}| = {v_count}, expected {}",
            base << y
        )));
    }
    if u_count != (ti.units.unit_index * tj.units.unit_index) << f_ij
        || u_count != v_count << (u - z_ij)
    {
        return Err(Error::Inconsistent(format!(
            "|U_{i}{j}| = {u_count} inconsistent"
        )));
    }
    Ok(Section6Invariants {
        i,
        j,
        f_i: ti.normalizer.f,
        f_j: tj.normalizer.f,
        f_ij,
        x_i,
        x_j,
        y_ij: y,
        z_ij,
        u,
        u_j,
        v_count,
        u_count,
    })
}

/// `½|M_i^(1)||M_j^(1)|2^y` for the orders of `j`, cross-checked against
/// the direct count of `V_ij`.
pub fn proper_automorphism_order(cd: &ClassData, inv: &Section6Invariants) -> Result<u64> {
    let n = inv.aut_order(cd);
    if n != 2 * inv.v_count as u64 {
        return Err(Error::Inconsistent(format!(
            "Aut⁺ {n} vs 2|V| = {}",
            2 * inv.v_count
        )));
    }
    Ok(n)
}

/// A member of `S_i`.
#[derive(Clone, Debug)]
pub struct SMember {
    /// Index of the right ideal class `I_j`.
    pub class: usize,
    pub left_type: usize,
    pub ideal: QuatLattice,
}

/// `S_i = {I_j·M_i : [n(I_j·M_i)] = [𝔞]}`.
pub fn build_s_i(
    alg: &QuatAlgebra,
    cd: &ClassData,
    i: usize,
    a: &FieldIdeal,
) -> Result<Vec<SMember>> {
    let k = alg.field();
    let mi = &cd.types[i].order;
    let mut out = Vec::new();
    for (j, ij) in cd.ideals.iter().enumerate() {
        let l = lattice_mul(alg, ij, mi);
        if !k.narrow_equivalent(&l.norm(alg), a) {
            continue;
        }
        if !is_normal(alg, &l) || right_order(alg, &l) != *mi {
            return Err(Error::NotNormal);
        }
        out.push(SMember {
            class: j,
            left_type: cd.ideal_type[j],
            ideal: l,
        });
    }
    Ok(out)
}

fn left_equivalent(alg: &QuatAlgebra, x: &QuatLattice, y: &QuatLattice) -> bool {
    is_left_principal(alg, &lattice_mul(alg, x, &inverse_unchecked(alg, y))).is_some()
}

/// Orbit representatives of `S_i` under `I ↦ I·g⁻¹` for `g ∈ N(M_i)`; each
/// orbit is represented by its member with the smallest canonical basis.
pub fn normalizer_orbits(alg: &QuatAlgebra, s: &[SMember], t: &TypeData) -> Result<Vec<SMember>> {
    let n = s.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn root(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            x = p[x];
        }
        x
    }
    for g in t.normalizer.coset_reps.iter().skip(1) {
        let ginv = alg.inv(g);
        for a in 0..n {
            let y = scale_right(alg, &s[a].ideal, &ginv);
            let b = (0..n)
                .find(|&b| {
                    s[b].left_type == s[a].left_type && left_equivalent(alg, &y, &s[b].ideal)
                })
                .ok_or_else(|| Error::Inconsistent("normalizer image outside S_i".into()))?;
            let (ra, rb) = (root(&mut parent, a), root(&mut parent, b));
            parent[ra.max(rb)] = ra.min(rb);
        }
    }
    let mut best: HashMap<usize, usize> = HashMap::new();
    for x in 0..n {
        let r = root(&mut parent, x);
        let e = best.entry(r).or_insert(x);
        if s[x].ideal < s[*e].ideal {
            *e = x;
        }
    }
    let mut reps: Vec<usize> = best.into_values().collect();
    reps.sort();
    Ok(reps.into_iter().map(|x| s[x].clone()).collect())
}

/// One proper isometry class of the genus.
#[derive(Clone, Debug)]
pub struct GenusRep {
    /// `α_u·x_J·J`
    pub lattice: QuatLattice,
    pub ideal: QuatLattice,
    pub x_j: QuatElem,
    pub alpha_u: QuatElem,
    /// Totally positive unit coset label.
    pub u: FieldElem,
    /// `u·a_J`, so that `(J, weight·n)` is isometric to `(lattice, n)`.
    pub weight: FieldElem,
    pub left_type: usize,
    pub right_type: usize,
    /// Index of the right ideal class of `M` that `J` came from.
    pub class: usize,
    pub aut_plus_order: u64,
    /// Gram matrix of `Tr∘n` on `lattice`.
    pub trace_gram: Vec<Vec<Rat>>,
}

#[derive(Clone, Debug)]
pub struct GenusData {
    pub a: FieldIdeal,
    pub reps: Vec<GenusRep>,
    pub invariants: Vec<Section6Invariants>,
    /// `|S_i|` and `|T_i|` per type.
    pub s_sizes: Vec<usize>,
    pub t_sizes: Vec<usize>,
}

impl GenusData {
    /// `Σ 1/|Aut⁺(L)|`.
    pub fn mass(&self) -> Rat {
        self.reps
            .iter()
            .map(|r| rat(1, r.aut_plus_order as i64))
            .sum()
    }
}

/// All pair invariants, indexed by `i·t + j`.
pub fn all_invariants(alg: &QuatAlgebra, cd: &ClassData) -> Result<Vec<Section6Invariants>> {
    let t = cd.type_number();
    let mut out = Vec::with_capacity(t * t);
    for i in 0..t {
        for j in 0..t {
            out.push(section6_invariants(alg, cd, i, j)?);
        }
    }
    Ok(out)
}

/// Representatives of the proper isometry classes in the genus of
/// `𝔞`-maximal lattices.
pub fn genus_representatives(
    alg: &QuatAlgebra,
    cd: &ClassData,
    invariants: &[Section6Invariants],
    a: &FieldIdeal,
    cap: u32,
) -> Result<GenusData> {
    let k = alg.field();
    let t = cd.type_number();
    let units = k.tp_unit_reps();
    let mut alpha: Vec<Option<QuatElem>> = vec![None; units.len()];
    alpha[0] = Some(alg.one());
    let mut reps = Vec::new();
    let mut s_sizes = Vec::new();
    let mut t_sizes = Vec::new();
    for i in 0..t {
        let s = build_s_i(alg, cd, i, a)?;
        let orbits = normalizer_orbits(alg, &s, &cd.types[i])?;
        s_sizes.push(s.len());
        t_sizes.push(orbits.len());
        for m in orbits {
            let inv = &invariants[m.left_type * t + i];
            let aut = proper_automorphism_order(cd, inv)?;
            let nj = m.ideal.norm(alg);
            let target = k.ideal_mul(&k.ideal_inverse(&nj), a);
            let a_j = k
                .totally_positive_generator(&target)
                .ok_or_else(|| Error::Inconsistent("n(J)⁻¹𝔞 not narrowly principal".into()))?;
            let x_j = solve_norm_equation(alg, &cd.order, &a_j, cap)?;
            let xj_lat = scale_left(alg, &x_j, &m.ideal);
            for (ui, u) in units.iter().enumerate() {
                if inv.u_j.contains(&ui) && ui != 0 {
                    continue;
                }
                let al = match &alpha[ui] {
                    Some(x) => x.clone(),
                    None => {
                        let x = solve_norm_equation(alg, &cd.order, u, cap)?;
                        alpha[ui] = Some(x.clone());
                        x
                    }
                };
                let lattice = scale_left(alg, &al, &xj_lat);
                if !is_a_maximal(alg, &lattice, a) {
                    return Err(Error::Inconsistent(
                        "representative is not 𝔞-maximal".into(),
                    ));
                }
                let trace_gram = trace_gram(alg, &lattice, &k.one())?;
                reps.push(GenusRep {
                    lattice,
                    ideal: m.ideal.clone(),
                    x_j: x_j.clone(),
                    alpha_u: al,
                    u: u.clone(),
                    weight: k.mul(u, &a_j),
                    left_type: m.left_type,
                    right_type: i,
                    class: m.class,
                    aut_plus_order: aut,
                    trace_gram,
                });
            }
        }
    }
    let data = GenusData {
        a: a.clone(),
        reps,
        invariants: invariants.to_vec(),
        s_sizes,
        t_sizes,
    };
    let expected = siegel_mass(alg);
    if data.mass() != expected {
        return Err(Error::Inconsistent(format!(
            "genus mass {} differs from {expected}",
            data.mass()
        )));
    }
    Ok(data)
}

/// Minimum of the trace lattice of a representative.
pub fn trace_lattice_minimum(rep: &GenusRep) -> Result<Rat> {
    minimum(&rep.trace_gram)
}

/// The positive multiple of `g` that is integral with coprime entries.
pub fn integral_rescaling(g: &[Vec<Rat>]) -> (Rat, Vec<Vec<Int>>) {
    let den = common_denominator(g.iter().flatten());
    let ints: Vec<Vec<Int>> = g
        .iter()
        .map(|r| r.iter().map(|x| (x * rat_int(&den)).to_integer()).collect())
        .collect();
    let gcd = ints
        .iter()
        .flatten()
        .fold(Int::zero(), |acc, x| acc.gcd(x))
        .abs();
    let scale = Rat::new(den, gcd.clone());
    (
        scale,
        ints.into_iter()
            .map(|r| r.into_iter().map(|x| x / &gcd).collect())
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classes::right_ideal_classes;
    use crate::field::{make_field, FieldSpec};
    use crate::lattice::{ideal_times_lattice, maximal_order};
    use crate::quat::make_algebra;

    #[test]
    fn hurwitz_genus() {
        let k = make_field(FieldSpec::Rationals).unwrap();
        let alg = make_algebra(&k, &k.one(), &k.one()).unwrap();
        let cd = right_ideal_classes(&alg).unwrap();
        let inv = all_invariants(&alg, &cd).unwrap();
        assert_eq!(inv[0].y_ij, 1);
        let g = genus_representatives(&alg, &cd, &inv, &k.unit_ideal(), 32).unwrap();
        assert_eq!(g.reps.len(), 1);
        assert_eq!(g.reps[0].aut_plus_order, 576);
        assert_eq!(trace_lattice_minimum(&g.reps[0]).unwrap(), rat(1, 1));
    }

    #[test]
    fn a_maximal_examples() {
        let k = make_field(FieldSpec::Rationals).unwrap();
        let alg = make_algebra(&k, &k.one(), &k.one()).unwrap();
        let m = maximal_order(&alg);
        assert!(is_a_maximal(&alg, &m, &k.unit_ideal()));
        let two = k.principal_ideal(&k.from_int(2));
        assert!(!is_a_maximal(
            &alg,
            &ideal_times_lattice(&alg, &two, &m),
            &k.unit_ideal()
        ));
    }
}
