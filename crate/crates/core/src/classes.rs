//! Right ideal classes of a maximal order, types of maximal orders, their
//! normalizers and the associated counting invariants.

use std::collections::BTreeMap;

use num_traits::Signed;

use crate::enumeration::{is_left_principal, short_vectors, trace_gram, unit_data, UnitData};
use crate::error::{Error, Result};
use crate::field::{FieldElem, FieldIdeal, PrimeIdeal};
use crate::lattice::{
    ideal_times_lattice, inverse_unchecked, lattice_mul, left_order, maximal_order,
    right_ideals_of_prime_norm, right_order, scale_left, scale_right, two_sided_maximal_ideal,
    QuatLattice,
};
use crate::linalg::{rat, rat_int, Rat};
use crate::quat::{QuatAlgebra, QuatElem};

/// `Mass(M) = Σ 1/[O_ℓ(I)^* : Z_K^*]` over the right ideal classes of a
/// maximal order, as given by Eichler's formula.
pub fn eichler_mass(alg: &QuatAlgebra) -> Rat {
    let k = alg.field();
    let n = k.degree() as i64;
    let mut m = k.zeta_minus_one().abs() * rat(2, 1 << n) * rat(k.class_groups().h as i64, 1);
    for p in alg.ramified_primes() {
        m *= rat_int(&(p.norm() - 1u32));
    }
    m
}

/// The share of the mass carried by ideals whose norm lies in one narrow
/// class.
pub fn mass_per_narrow_class(alg: &QuatAlgebra) -> Rat {
    eichler_mass(alg) / rat(alg.field().class_groups().h_plus as i64, 1)
}

/// Minkowski–Siegel mass of any genus of `𝔞`-maximal lattices.
pub fn siegel_mass(alg: &QuatAlgebra) -> Rat {
    let k = alg.field();
    let z = k.zeta_minus_one();
    let mut m = &z * &z * rat(2, 1 << (2 * k.degree()));
    for p in alg.ramified_primes() {
        let q = rat_int(&(p.norm() - 1u32));
        m *= &q * &q / rat(2, 1);
    }
    m
}

/// Theta-series prefix of `Tr∘n` on an order: vector counts (up to sign)
/// by value, for values up to `2[K:Q]`. Conjugate orders share it.
pub fn order_key(alg: &QuatAlgebra, o: &QuatLattice) -> Vec<(Rat, usize)> {
    let k = alg.field();
    let g = trace_gram(alg, o, &k.one()).expect("trace form of an order is positive definite");
    let bound = rat(2 * k.degree() as i64, 1);
    let mut counts: BTreeMap<Rat, usize> = BTreeMap::new();
    for (_, v) in short_vectors(&g, &bound).expect("positive definite") {
        *counts.entry(v).or_default() += 1;
    }
    counts.into_iter().collect()
}

/// Normalizer of a maximal order modulo `K^*·O^*`.
#[derive(Clone, Debug)]
pub struct NormalizerData {
    /// Two-sided ideals `𝔟·Π_S P_𝔭` representing all two-sided ideals
    /// modulo `{xO : x ∈ K^*}`; the first is `O`.
    pub transversal: Vec<QuatLattice>,
    /// Indices of the principal members of the transversal.
    pub principal: Vec<usize>,
    /// Generators of the principal members: coset representatives of
    /// `N(O)/K^*O^*`, starting with `1`.
    pub coset_reps: Vec<QuatElem>,
    /// `log2 |N(O)/K^*O^*|`
    pub f: u32,
}

impl NormalizerData {
    /// Norms of the coset representatives.
    pub fn norms(&self, alg: &QuatAlgebra) -> Vec<FieldElem> {
        self.coset_reps
            .iter()
            .map(|g| alg.reduced_norm(g))
            .collect()
    }
}

/// True if `x = λ·y` for some `λ ∈ K^*`, for lattices with equal left order
/// `o`.
pub fn equal_up_to_scalar(
    alg: &QuatAlgebra,
    o: &QuatLattice,
    x: &QuatLattice,
    y: &QuatLattice,
) -> bool {
    let k = alg.field();
    let z = lattice_mul(alg, x, &inverse_unchecked(alg, y));
    let Some(c) = k.ideal_sqrt(&z.norm(alg)) else {
        return false;
    };
    ideal_times_lattice(alg, &c, o) == z && k.is_principal(&c).is_some()
}

/// The two-sided ideal transversal and normalizer of a maximal order.
pub fn normalizer_data(alg: &QuatAlgebra, o: &QuatLattice) -> NormalizerData {
    let k = alg.field();
    let ram = alg.ramified_primes();
    let ps: Vec<QuatLattice> = ram
        .iter()
        .map(|p| two_sided_maximal_ideal(alg, o, p))
        .collect();
    let mut transversal = Vec::new();
    for b in &k.class_groups().class_reps {
        let bo = ideal_times_lattice(alg, b, o);
        for mask in 0..(1usize << ps.len()) {
            let t = ps
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .fold(bo.clone(), |acc, (_, p)| lattice_mul(alg, &acc, p));
            transversal.push(t);
        }
    }
    let mut principal = Vec::new();
    let mut coset_reps = Vec::new();
    for (i, t) in transversal.iter().enumerate() {
        if let Some(g) = is_left_principal(alg, t) {
            principal.push(i);
            coset_reps.push(if i == 0 { alg.one() } else { g });
        }
    }
    let f = coset_reps.len().trailing_zeros();
    assert!(
        coset_reps.len().is_power_of_two(),
        "normalizer quotient is elementary abelian"
    );
    NormalizerData {
        transversal,
        principal,
        coset_reps,
        f,
    }
}

/// Class of each coset representative norm in `𝒫/𝒫²` (principal ideals
/// modulo squares of principal ideals), as a partition of `Π`.
fn same_square_class(alg: &QuatAlgebra, a: &FieldElem, b: &FieldElem) -> bool {
    let k = alg.field();
    k.unit_part(&k.div(a, b)).is_some()
}

/// `log2 |Π_1 ∩ Π_2|` where `Π` is the image of the normalizer norms in
/// `𝒫/𝒫²`.
pub fn pi_intersection(alg: &QuatAlgebra, a: &NormalizerData, b: &NormalizerData) -> u32 {
    let na = a.norms(alg);
    let nb = b.norms(alg);
    let count = na
        .iter()
        .filter(|x| nb.iter().any(|y| same_square_class(alg, x, y)))
        .count();
    count.trailing_zeros()
}

/// Number of two-sided ideal classes, counted as orbits of the transversal
/// under multiplication by its principal members.
pub fn two_sided_class_number(
    alg: &QuatAlgebra,
    o: &QuatLattice,
    nd: &NormalizerData,
) -> Result<usize> {
    let n = nd.transversal.len();
    let mut orbit = vec![usize::MAX; n];
    let mut count = 0;
    for s in 0..n {
        if orbit[s] != usize::MAX {
            continue;
        }
        for &p in &nd.principal {
            let y = lattice_mul(alg, &nd.transversal[s], &nd.transversal[p]);
            let t = (0..n)
                .find(|&t| equal_up_to_scalar(alg, o, &y, &nd.transversal[t]))
                .ok_or_else(|| {
                    Error::Inconsistent("two-sided ideal outside the transversal".into())
                })?;
            orbit[t] = count;
        }
        count += 1;
    }
    Ok(count)
}

/// Everything about a maximal order type needed downstream.
#[derive(Clone, Debug)]
pub struct TypeData {
    pub order: QuatLattice,
    /// Index of the right ideal class whose left order is `order`.
    pub ideal_index: usize,
    pub units: UnitData,
    pub normalizer: NormalizerData,
    /// Number of two-sided ideal classes.
    pub two_sided_classes: usize,
}

#[derive(Clone, Debug)]
pub struct ClassData {
    /// The base maximal order `M`.
    pub order: QuatLattice,
    /// Right `M`-ideals, one per left equivalence class; the first is `M`.
    pub ideals: Vec<QuatLattice>,
    pub left_orders: Vec<QuatLattice>,
    pub unit_indices: Vec<usize>,
    /// Type of each ideal's left order.
    pub ideal_type: Vec<usize>,
    pub types: Vec<TypeData>,
    pub mass: Rat,
    /// Primes whose neighbours were used.
    pub primes_used: Vec<PrimeIdeal>,
}

impl ClassData {
    pub fn class_number(&self) -> usize {
        self.ideals.len()
    }

    pub fn type_number(&self) -> usize {
        self.types.len()
    }

    /// A lattice with left order `M_i` and right order `M_j`.
    pub fn connecting_ideal(&self, alg: &QuatAlgebra, i: usize, j: usize) -> QuatLattice {
        let a = &self.ideals[self.types[i].ideal_index];
        let b = &self.ideals[self.types[j].ideal_index];
        lattice_mul(alg, a, &inverse_unchecked(alg, b))
    }
}

struct ClassTable {
    ideals: Vec<QuatLattice>,
    left_orders: Vec<QuatLattice>,
    keys: Vec<Vec<(Rat, usize)>>,
    unit_indices: Vec<usize>,
}

impl ClassTable {
    fn find(&self, alg: &QuatAlgebra, j: &QuatLattice, key: &[(Rat, usize)]) -> Option<usize> {
        (0..self.ideals.len()).find(|&e| {
            self.keys[e] == key
                && is_left_principal(
                    alg,
                    &lattice_mul(alg, j, &inverse_unchecked(alg, &self.ideals[e])),
                )
                .is_some()
        })
    }
}

fn unramified_primes(alg: &QuatAlgebra, bound: u64) -> Vec<PrimeIdeal> {
    let ram = alg.ramified_primes();
    alg.field()
        .primes_up_to(bound)
        .into_iter()
        .filter(|p| !ram.contains(p))
        .collect()
}

/// Representatives of the right ideal classes of `M`, found by exploring
/// neighbours at unramified primes until the mass formula is met.
pub fn right_ideal_classes(alg: &QuatAlgebra) -> Result<ClassData> {
    let m = maximal_order(alg);
    let target = eichler_mass(alg);
    let key = order_key(alg, &m);
    let ui = unit_data(alg, &m).unit_index;
    let mut table = ClassTable {
        ideals: vec![m.clone()],
        left_orders: vec![m.clone()],
        keys: vec![key],
        unit_indices: vec![ui],
    };
    let mut mass = rat(1, ui as i64);
    let mut bound = 2u64;
    let mut primes: Vec<PrimeIdeal> = Vec::new();
    let mut done: Vec<usize> = Vec::new();
    while mass != target {
        if mass > target {
            return Err(Error::Inconsistent(format!(
                "class mass {mass} exceeds {target}"
            )));
        }
        let next = loop {
            let cands = unramified_primes(alg, bound);
            if let Some(p) = cands.into_iter().find(|p| !primes.contains(p)) {
                break p;
            }
            bound *= 2;
        };
        primes.push(next);
        done.push(0);
        // neighbours at every prime so far, for every ideal (including new ones)
        let mut changed = true;
        while changed && mass != target {
            changed = false;
            for (pi, p) in primes.iter().enumerate() {
                while done[pi] < table.ideals.len() && mass != target {
                    let idx = done[pi];
                    done[pi] += 1;
                    let o = table.left_orders[idx].clone();
                    let i = table.ideals[idx].clone();
                    for kk in right_ideals_of_prime_norm(alg, &o, p) {
                        let j = lattice_mul(alg, &kk, &i);
                        let oj = left_order(alg, &j);
                        let key = order_key(alg, &oj);
                        if table.find(alg, &j, &key).is_some() {
                            continue;
                        }
                        let ui = unit_data(alg, &oj).unit_index;
                        mass += rat(1, ui as i64);
                        table.ideals.push(j);
                        table.left_orders.push(oj);
                        table.keys.push(key);
                        table.unit_indices.push(ui);
                        changed = true;
                        if mass == target {
                            break;
                        }
                    }
                }
            }
        }
    }
    let (ideal_type, types) = order_types(alg, &table)?;
    Ok(ClassData {
        order: m,
        ideals: table.ideals,
        left_orders: table.left_orders,
        unit_indices: table.unit_indices,
        ideal_type,
        types,
        mass,
        primes_used: primes,
    })
}

/// True if `O_ℓ(a)` and `O_ℓ(b)` are conjugate, for right `M`-ideals `a`, `b`
/// with `nd` the normalizer data of `O_ℓ(b)`.
fn left_orders_conjugate(
    alg: &QuatAlgebra,
    a: &QuatLattice,
    b: &QuatLattice,
    nd: &NormalizerData,
) -> bool {
    let c = lattice_mul(alg, a, &inverse_unchecked(alg, b));
    nd.transversal
        .iter()
        .any(|t| is_left_principal(alg, &lattice_mul(alg, &c, t)).is_some())
}

fn order_types(alg: &QuatAlgebra, table: &ClassTable) -> Result<(Vec<usize>, Vec<TypeData>)> {
    let mut ideal_type = Vec::with_capacity(table.ideals.len());
    let mut types: Vec<TypeData> = Vec::new();
    for idx in 0..table.ideals.len() {
        let found = types.iter().position(|t| {
            table.keys[t.ideal_index] == table.keys[idx]
                && left_orders_conjugate(
                    alg,
                    &table.ideals[idx],
                    &table.ideals[t.ideal_index],
                    &t.normalizer,
                )
        });
        match found {
            Some(t) => ideal_type.push(t),
            None => {
                let o = table.left_orders[idx].clone();
                let normalizer = normalizer_data(alg, &o);
                let two_sided_classes = two_sided_class_number(alg, &o, &normalizer)?;
                let s = alg.ramified_primes().len() as u32;
                let expected = (alg.field().class_groups().h << s) >> normalizer.f;
                if two_sided_classes != expected {
                    return Err(Error::Inconsistent(format!(
                        "H = {two_sided_classes}, expected {expected}"
                    )));
                }
                let units = unit_data(alg, &o);
                ideal_type.push(types.len());
                types.push(TypeData {
                    order: o,
                    ideal_index: idx,
                    units,
                    normalizer,
                    two_sided_classes,
                });
            }
        }
    }
    Ok((ideal_type, types))
}

/// Number of classes of lattices with left order `M_i` and right order
/// `M_j` modulo `X ~ aXb` with `a ∈ N(M_i)`, `b ∈ N(M_j)`, counted as orbits
/// on `{T·C}` for `T` in the two-sided transversal of `M_i` and `C` a
/// connecting ideal.
pub fn two_sided_orbit_count(
    alg: &QuatAlgebra,
    cd: &ClassData,
    i: usize,
    j: usize,
) -> Result<usize> {
    let ti = &cd.types[i];
    let tj = &cd.types[j];
    let c = cd.connecting_ideal(alg, i, j);
    let set: Vec<QuatLattice> = ti
        .normalizer
        .transversal
        .iter()
        .map(|t| lattice_mul(alg, t, &c))
        .collect();
    let hinv: Vec<QuatElem> = tj
        .normalizer
        .coset_reps
        .iter()
        .map(|h| alg.inv(h))
        .collect();
    let n = set.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn root(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for s in 0..n {
        for g in &ti.normalizer.coset_reps {
            for h in &hinv {
                let y = scale_right(alg, &scale_left(alg, g, &set[s]), h);
                let t = (0..n)
                    .find(|&t| equal_up_to_scalar(alg, &ti.order, &y, &set[t]))
                    .ok_or_else(|| {
                        Error::Inconsistent("ideal outside the two-sided orbit set".into())
                    })?;
                let (a, b) = (root(&mut parent, s), root(&mut parent, t));
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    Ok((0..n).filter(|&x| root(&mut parent, x) == x).count())
}

/// `h_K·2^{s−f_i−f_j+f_ij}`.
pub fn predicted_two_sided_count(alg: &QuatAlgebra, cd: &ClassData, i: usize, j: usize) -> usize {
    let s = alg.ramified_primes().len() as u32;
    let fi = cd.types[i].normalizer.f;
    let fj = cd.types[j].normalizer.f;
    let fij = pi_intersection(alg, &cd.types[i].normalizer, &cd.types[j].normalizer);
    (alg.field().class_groups().h << (s + fij)) >> (fi + fj)
}

/// Sanity check that `o` is the right order of every class representative.
pub fn check_right_orders(alg: &QuatAlgebra, cd: &ClassData) -> bool {
    cd.ideals.iter().all(|i| right_order(alg, i) == cd.order)
}

/// True if no two class representatives are left equivalent.
pub fn check_pairwise_inequivalent(alg: &QuatAlgebra, cd: &ClassData) -> bool {
    let n = cd.ideals.len();
    (0..n).all(|a| {
        (0..n).filter(|&b| b != a).all(|b| {
            is_left_principal(
                alg,
                &lattice_mul(alg, &cd.ideals[a], &inverse_unchecked(alg, &cd.ideals[b])),
            )
            .is_none()
        })
    })
}

/// `Σ 1/[O_ℓ(I)^* : Z_K^*]` over the classes with `[n(I)] = [𝔞]`.
pub fn narrow_class_mass(alg: &QuatAlgebra, cd: &ClassData, a: &FieldIdeal) -> Rat {
    let k = alg.field();
    cd.ideals
        .iter()
        .zip(&cd.unit_indices)
        .filter(|(i, _)| k.narrow_equivalent(&i.norm(alg), a))
        .map(|(_, u)| rat(1, *u as i64))
        .sum()
}
