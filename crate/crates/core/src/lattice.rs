//! Full `Z_K`-lattices in the quaternion algebra, stored as canonical
//! rank-`4n` Z-lattices in the ambient frame. Orders and normal ideals are
//! roles of the same type.

use crate::error::{Error, Result};
use crate::field::{FieldElem, FieldIdeal, PrimeIdeal};
use crate::linalg::{common_denominator, mat_inverse, mat_mul, transpose, Rat, ZLattice};
use crate::quat::{QuatAlgebra, QuatElem};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct QuatLattice(pub(crate) ZLattice);

impl QuatLattice {
    pub fn zlattice(&self) -> &ZLattice {
        &self.0
    }

    pub fn basis(&self, alg: &QuatAlgebra) -> Vec<QuatElem> {
        self.0.basis().iter().map(|v| alg.from_ambient(v)).collect()
    }

    pub fn contains(&self, alg: &QuatAlgebra, x: &QuatElem) -> bool {
        self.0.contains(&alg.to_ambient(x))
    }

    pub fn is_sublattice_of(&self, other: &QuatLattice) -> bool {
        self.0.is_sublattice_of(&other.0)
    }

    /// The ideal `n(L)` generated by the reduced norms of all elements.
    pub fn norm(&self, alg: &QuatAlgebra) -> FieldIdeal {
        let k = alg.field();
        let b = self.basis(alg);
        let mut gens: Vec<FieldElem> = b.iter().map(|x| alg.reduced_norm(x)).collect();
        for i in 0..b.len() {
            let ci = alg.conj(&b[i]);
            for bj in &b[i + 1..] {
                gens.push(alg.reduced_trace(&alg.mul(bj, &ci)));
            }
        }
        k.ideal(&gens)
            .expect("norm ideal of a full lattice is nonzero")
    }

    /// `[Λ : L]`-style volume in the ambient frame.
    pub fn covolume(&self) -> Rat {
        self.0.covolume()
    }
}

fn from_elems(alg: &QuatAlgebra, gens: &[QuatElem]) -> Result<QuatLattice> {
    let rows: Vec<Vec<Rat>> = gens.iter().map(|g| alg.to_ambient(g)).collect();
    ZLattice::from_rat_rows(alg.ambient_dim(), &rows).map(QuatLattice)
}

/// The `Z_K`-span of `gens`.
pub fn lattice_from_generators(alg: &QuatAlgebra, gens: &[QuatElem]) -> Result<QuatLattice> {
    let k = alg.field();
    let ib = k.integral_basis();
    let all: Vec<QuatElem> = gens
        .iter()
        .flat_map(|g| ib.iter().map(move |w| (g, w)))
        .map(|(g, w)| alg.scale_field(g, w))
        .collect();
    from_elems(alg, &all)
}

pub fn lattice_mul(alg: &QuatAlgebra, a: &QuatLattice, b: &QuatLattice) -> QuatLattice {
    let ba = a.basis(alg);
    let bb = b.basis(alg);
    let prods: Vec<QuatElem> = ba
        .iter()
        .flat_map(|x| bb.iter().map(move |y| (x, y)))
        .map(|(x, y)| alg.mul(x, y))
        .collect();
    from_elems(alg, &prods).expect("product of full lattices")
}

pub fn lattice_sum(a: &QuatLattice, b: &QuatLattice) -> QuatLattice {
    QuatLattice(a.0.sum(&b.0))
}

/// `x·L`.
pub fn scale_left(alg: &QuatAlgebra, x: &QuatElem, l: &QuatLattice) -> QuatLattice {
    let g: Vec<QuatElem> = l.basis(alg).iter().map(|b| alg.mul(x, b)).collect();
    from_elems(alg, &g).expect("nonzero scaling")
}

/// `L·x`.
pub fn scale_right(alg: &QuatAlgebra, l: &QuatLattice, x: &QuatElem) -> QuatLattice {
    let g: Vec<QuatElem> = l.basis(alg).iter().map(|b| alg.mul(b, x)).collect();
    from_elems(alg, &g).expect("nonzero scaling")
}

/// `𝔞·L` for a fractional ideal `𝔞` of `K`.
pub fn ideal_times_lattice(alg: &QuatAlgebra, a: &FieldIdeal, l: &QuatLattice) -> QuatLattice {
    let lb = l.basis(alg);
    let g: Vec<QuatElem> = a
        .basis()
        .iter()
        .flat_map(|c| lb.iter().map(move |b| (c, b)))
        .map(|(c, b)| alg.scale_field(b, c))
        .collect();
    from_elems(alg, &g).expect("nonzero ideal")
}

pub fn conj_lattice(alg: &QuatAlgebra, l: &QuatLattice) -> QuatLattice {
    let g: Vec<QuatElem> = l.basis(alg).iter().map(|b| alg.conj(b)).collect();
    from_elems(alg, &g).expect("involution is bijective")
}

/// `{x : y·x·B⁻¹ integral for all basis vectors y}` style multiplier order.
fn multiplier(alg: &QuatAlgebra, l: &QuatLattice, right: bool) -> QuatLattice {
    let m = alg.ambient_dim();
    let basis = l.0.basis();
    let binv = mat_inverse(&basis).expect("full-rank basis");
    let mut cols: Vec<Vec<Rat>> = Vec::with_capacity(m * m);
    for b in l.basis(alg) {
        let a = if right {
            alg.left_mult_matrix(&b)
        } else {
            alg.right_mult_matrix(&b)
        };
        cols.extend(transpose(&mat_mul(&a, &binv)));
    }
    let span = ZLattice::from_rat_rows(m, &cols).expect("multiplication is injective");
    QuatLattice(span.dual())
}

/// `O_r(L) = {α : Lα ⊆ L}`.
pub fn right_order(alg: &QuatAlgebra, l: &QuatLattice) -> QuatLattice {
    multiplier(alg, l, true)
}

/// `O_ℓ(L) = {α : αL ⊆ L}`.
pub fn left_order(alg: &QuatAlgebra, l: &QuatLattice) -> QuatLattice {
    multiplier(alg, l, false)
}

pub fn is_order(alg: &QuatAlgebra, o: &QuatLattice) -> bool {
    o.contains(alg, &alg.one()) && lattice_mul(alg, o, o) == *o
}

/// The reduced discriminant, generated by `trd([x,y]z)` over basis triples.
pub fn reduced_discriminant(alg: &QuatAlgebra, o: &QuatLattice) -> FieldIdeal {
    let k = alg.field();
    let b = o.basis(alg);
    let mut gens = Vec::new();
    for i in 0..b.len() {
        for j in i + 1..b.len() {
            let c = alg.sub(&alg.mul(&b[i], &b[j]), &alg.mul(&b[j], &b[i]));
            for z in &b {
                let t = alg.reduced_trace(&alg.mul(&c, z));
                if !t.is_zero() {
                    gens.push(t);
                }
            }
        }
    }
    k.ideal(&gens).expect("orders have nonzero discriminant")
}

/// `Z_K⟨1, i, j, ij⟩`.
pub fn standard_order(alg: &QuatAlgebra) -> QuatLattice {
    lattice_from_generators(alg, &alg.standard_basis()).expect("standard basis spans")
}

fn is_integral_lattice(alg: &QuatAlgebra, l: &QuatLattice) -> bool {
    let k = alg.field();
    let b = l.basis(alg);
    b.iter()
        .all(|x| k.is_integral(&alg.reduced_norm(x)) && k.is_integral(&alg.reduced_trace(x)))
        && b.iter().enumerate().all(|(i, x)| {
            b[i..]
                .iter()
                .all(|y| k.trace(&alg.reduced_trace(&alg.mul(x, y))).is_integer())
        })
}

/// The order generated by `o` and `y`, if every element of it is integral.
fn ring_closure(alg: &QuatAlgebra, o: &QuatLattice, y: &QuatElem) -> Option<QuatLattice> {
    let mut gens = o.basis(alg);
    gens.push(y.clone());
    let mut l = lattice_from_generators(alg, &gens).ok()?;
    loop {
        if !is_integral_lattice(alg, &l) {
            return None;
        }
        let next = lattice_sum(&l, &lattice_mul(alg, &l, &l));
        if next == l {
            return Some(l);
        }
        l = next;
    }
}

/// Integer data for testing `Σ c_i u_i` quickly: linear forms for the
/// coordinates of `trd` and quadratic forms for those of `g·nrd`, all scaled
/// by a common denominator `den`. The element passes when every form is
/// integral.
struct IntegralityTest {
    den: i128,
    lin: Vec<Vec<i128>>,
    quad: Vec<Vec<Vec<i128>>>,
}

impl IntegralityTest {
    fn new(
        alg: &QuatAlgebra,
        u: &[QuatElem],
        mults: &[FieldElem],
        with_trace: bool,
    ) -> Option<Self> {
        let k = alg.field();
        let m = u.len();
        let n = k.degree();
        let trd: Vec<FieldElem> = if with_trace {
            u.iter().map(|x| alg.reduced_trace(x)).collect()
        } else {
            vec![]
        };
        // quadratic form coefficients: q_ii = nrd(u_i), q_ij = trd(u_i ū_j) for i < j
        let mut q = vec![vec![k.zero(); m]; m];
        for i in 0..m {
            q[i][i] = alg.reduced_norm(&u[i]);
            let ci = alg.conj(&u[i]);
            for j in i + 1..m {
                q[i][j] = alg.reduced_trace(&alg.mul(&u[j], &ci));
            }
        }
        let qs: Vec<Vec<Vec<FieldElem>>> = mults
            .iter()
            .map(|g| {
                q.iter()
                    .map(|row| row.iter().map(|e| k.mul(g, e)).collect())
                    .collect()
            })
            .collect();
        let all: Vec<&Rat> = trd
            .iter()
            .chain(qs.iter().flatten().flatten())
            .flat_map(|e| e.coords())
            .collect();
        let den = i128::try_from(&common_denominator(all))
            .ok()
            .filter(|d| *d < 1 << 40)?;
        let conv = |r: &Rat| -> Option<i128> {
            let v = (r * Rat::from_integer(den.into())).to_integer();
            i128::try_from(&(v % den)).ok()
        };
        let lin = if with_trace {
            (0..n)
                .map(|c| trd.iter().map(|t| conv(&t.coords()[c])).collect())
                .collect::<Option<Vec<Vec<i128>>>>()?
        } else {
            vec![]
        };
        let mut quad = Vec::new();
        for qg in &qs {
            for c in 0..n {
                quad.push(
                    qg.iter()
                        .map(|row| row.iter().map(|e| conv(&e.coords()[c])).collect())
                        .collect::<Option<Vec<Vec<i128>>>>()?,
                );
            }
        }
        Some(IntegralityTest { den, lin, quad })
    }

    fn passes(&self, c: &[i128]) -> bool {
        let m = c.len();
        self.lin
            .iter()
            .all(|l| l.iter().zip(c).map(|(a, b)| a * b).sum::<i128>() % self.den == 0)
            && self.quad.iter().all(|q| {
                let mut s = 0i128;
                for i in 0..m {
                    if c[i] == 0 {
                        continue;
                    }
                    let mut row = 0i128;
                    for j in i..m {
                        row += q[i][j] * c[j];
                    }
                    s = (s + (row % self.den) * c[i]) % self.den;
                }
                s == 0
            })
    }
}

/// Calls `f` on the coefficient vectors of the nonzero residues of the box
/// `diag`, in a fixed order, until it returns a value.
fn find_residue<T, F>(diag: &[usize], mut f: F) -> Option<T>
where
    F: FnMut(&[i128]) -> Option<T>,
{
    let mut c = vec![0i128; diag.len()];
    loop {
        let mut i = 0;
        loop {
            if i == c.len() {
                return None;
            }
            c[i] += 1;
            if c[i] < diag[i] as i128 {
                break;
            }
            c[i] = 0;
            i += 1;
        }
        if let Some(t) = f(&c) {
            return Some(t);
        }
    }
}

fn combine(alg: &QuatAlgebra, u: &[QuatElem], c: &[i128]) -> QuatElem {
    c.iter()
        .zip(u)
        .filter(|(ci, _)| **ci != 0)
        .fold(alg.zero(), |acc, (ci, b)| {
            alg.add(&acc, &alg.scale(b, &Rat::from_integer((*ci).into())))
        })
}

/// One enlargement step at `𝔭`: an order strictly containing `o` inside
/// `𝔭⁻¹o`, if any.
fn enlarge_at(alg: &QuatAlgebra, o: &QuatLattice, p: &PrimeIdeal) -> Option<QuatLattice> {
    let k = alg.field();
    let over = ideal_times_lattice(alg, &k.ideal_inverse(&p.ideal), o);
    let u = over.basis(alg);
    let test = IntegralityTest::new(alg, &u, &[k.one()], true);
    find_residue(&over.0.residue_box(&o.0), |c| {
        if test.as_ref().is_some_and(|t| !t.passes(c)) {
            return None;
        }
        let y = combine(alg, &u, c);
        if !k.is_integral(&alg.reduced_norm(&y)) || !k.is_integral(&alg.reduced_trace(&y)) {
            return None;
        }
        ring_closure(alg, o, &y)
    })
}

/// A maximal order containing the standard order (memoized per algebra).
pub fn maximal_order(alg: &QuatAlgebra) -> QuatLattice {
    alg.maximal_cache()
        .get_or_init(|| {
            let k = alg.field();
            let mut o = standard_order(alg);
            'outer: loop {
                let d = reduced_discriminant(alg, &o);
                let mut primes: Vec<PrimeIdeal> = k
                    .factor_ideal(&d)
                    .expect("nonzero")
                    .into_iter()
                    .map(|(p, _)| p)
                    .collect();
                primes.sort_by(|a, b| a.norm().cmp(&b.norm()).then_with(|| a.ideal.cmp(&b.ideal)));
                for p in &primes {
                    if let Some(bigger) = enlarge_at(alg, &o, p) {
                        o = bigger;
                        continue 'outer;
                    }
                }
                return o;
            }
        })
        .clone()
}

/// Product of the finite ramified primes.
pub fn ramified_product(alg: &QuatAlgebra) -> FieldIdeal {
    let k = alg.field();
    alg.ramified_primes()
        .iter()
        .fold(k.unit_ideal(), |acc, p| k.ideal_mul(&acc, &p.ideal))
}

pub fn is_maximal_order(alg: &QuatAlgebra, o: &QuatLattice) -> bool {
    is_order(alg, o) && reduced_discriminant(alg, o) == ramified_product(alg)
}

/// A lattice is normal when its right order is maximal.
pub fn is_normal(alg: &QuatAlgebra, l: &QuatLattice) -> bool {
    is_maximal_order(alg, &right_order(alg, l))
}

/// `J⁻¹ = conj(J)·n(J)⁻¹`.
pub fn ideal_inverse(alg: &QuatAlgebra, j: &QuatLattice) -> Result<QuatLattice> {
    if !is_normal(alg, j) {
        return Err(Error::NotNormal);
    }
    Ok(inverse_unchecked(alg, j))
}

pub(crate) fn inverse_unchecked(alg: &QuatAlgebra, j: &QuatLattice) -> QuatLattice {
    let k = alg.field();
    ideal_times_lattice(alg, &k.ideal_inverse(&j.norm(alg)), &conj_lattice(alg, j))
}

/// The unique maximal two-sided ideal of `m` over `𝔭`.
pub fn two_sided_maximal_ideal(alg: &QuatAlgebra, m: &QuatLattice, p: &PrimeIdeal) -> QuatLattice {
    let pm = ideal_times_lattice(alg, &p.ideal, m);
    if !alg.ramified_primes().contains(p) {
        return pm;
    }
    // P = 𝔭M + xM for any x ∈ M \ 𝔭M with nrd(x) ∈ 𝔭
    let k = alg.field();
    let u = m.basis(alg);
    let pinv = k.ideal_inverse(&p.ideal).basis();
    let test = IntegralityTest::new(alg, &u, &pinv, false);
    let x = find_residue(&m.0.residue_box(&pm.0), |c| {
        if test.as_ref().is_some_and(|t| !t.passes(c)) {
            return None;
        }
        let x = combine(alg, &u, c);
        p.ideal.contains(&alg.reduced_norm(&x)).then_some(x)
    })
    .expect("ramified prime has a nonzero radical");
    let mut gens = pm.basis(alg);
    gens.extend(u.iter().map(|b| alg.mul(&x, b)));
    lattice_from_generators(alg, &gens).expect("contains pM")
}

/// The right ideals of `o` of norm `𝔭` (q+1 of them at unramified `𝔭`, the
/// two-sided maximal ideal at ramified `𝔭`), in canonical order.
pub fn right_ideals_of_prime_norm(
    alg: &QuatAlgebra,
    o: &QuatLattice,
    p: &PrimeIdeal,
) -> Vec<QuatLattice> {
    if alg.ramified_primes().contains(p) {
        return vec![two_sided_maximal_ideal(alg, o, p)];
    }
    let q = p.norm();
    let target = usize::try_from(&(&q + 1u32)).expect("small prime");
    let po = ideal_times_lattice(alg, &p.ideal, o);
    let ob = o.basis(alg);
    let k = alg.field();
    let pinv = k.ideal_inverse(&p.ideal).basis();
    let test = IntegralityTest::new(alg, &ob, &pinv, false);
    let pob = po.basis(alg);
    let mut out: Vec<QuatLattice> = Vec::new();
    find_residue(&o.0.residue_box(&po.0), |c| {
        if test.as_ref().is_some_and(|t| !t.passes(c)) {
            return None;
        }
        let x = combine(alg, &ob, c);
        if !p.ideal.contains(&alg.reduced_norm(&x)) {
            return None;
        }
        let mut gens: Vec<QuatElem> = ob.iter().map(|b| alg.mul(&x, b)).collect();
        gens.extend(pob.iter().cloned());
        let r = lattice_from_generators(alg, &gens).expect("contains pO");
        if !out.contains(&r) {
            out.push(r);
        }
        (out.len() == target).then_some(())
    });
    out.sort();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{make_field, FieldSpec};
    use crate::linalg::{int, rat};
    use crate::quat::make_algebra;

    fn hamilton() -> QuatAlgebra {
        let k = make_field(FieldSpec::Rationals).unwrap();
        make_algebra(&k, &k.one(), &k.one()).unwrap()
    }

    fn hurwitz(q: &QuatAlgebra) -> QuatLattice {
        let mut g = q.standard_basis();
        let h = q.from_ambient(&[rat(1, 2), rat(1, 2), rat(1, 2), rat(1, 2)]);
        g[3] = h;
        lattice_from_generators(q, &g).unwrap()
    }

    #[test]
    fn hurwitz_basics() {
        let q = hamilton();
        let lip = standard_order(&q);
        let hur = hurwitz(&q);
        assert_eq!(lip.covolume() / hur.covolume(), rat(2, 1));
        assert!(is_order(&q, &hur));
        assert_eq!(
            reduced_discriminant(&q, &lip),
            q.field().principal_ideal(&q.field().from_int(4))
        );
        assert_eq!(
            reduced_discriminant(&q, &hur),
            q.field().principal_ideal(&q.field().from_int(2))
        );
        assert_eq!(maximal_order(&q), hur);
        assert_eq!(conj_lattice(&q, &hur), hur);
        assert_eq!(right_order(&q, &hur), hur);
        assert_eq!(left_order(&q, &hur), hur);
        let r = lattice_from_generators(&q, &q.standard_basis()[..2]);
        assert_eq!(r, Err(Error::RankDeficient));
    }

    #[test]
    fn prime_ideal_of_hurwitz() {
        let q = hamilton();
        let k = q.field();
        let m = maximal_order(&q);
        let one_plus_i = q.add(&q.one(), &q.standard_basis()[1]);
        let p2 = scale_left(&q, &one_plus_i, &m);
        assert_eq!(right_order(&q, &p2), m);
        assert_eq!(p2.norm(&q), k.principal_ideal(&k.from_int(2)));
        assert_eq!(
            lattice_mul(&q, &p2, &p2),
            ideal_times_lattice(&q, &k.principal_ideal(&k.from_int(2)), &m)
        );
        let pr2 = &k.primes_above(&int(2))[0];
        assert_eq!(two_sided_maximal_ideal(&q, &m, pr2), p2);
        let pr3 = &k.primes_above(&int(3))[0];
        assert_eq!(
            two_sided_maximal_ideal(&q, &m, pr3),
            ideal_times_lattice(&q, &pr3.ideal, &m)
        );
        let inv = ideal_inverse(&q, &p2).unwrap();
        assert_eq!(lattice_mul(&q, &p2, &inv), left_order(&q, &p2));
        assert_eq!(right_ideals_of_prime_norm(&q, &m, pr3).len(), 4);
        assert_eq!(q.ramified_primes().len(), 1);
    }

    #[test]
    fn ramification_of_minus_eleven() {
        let k = make_field(FieldSpec::Rationals).unwrap();
        let q = make_algebra(&k, &k.one(), &k.from_int(11)).unwrap();
        let ps: Vec<_> = q.ramified_primes().iter().map(|p| p.p.clone()).collect();
        assert_eq!(ps, vec![int(11)]);
        let m = maximal_order(&q);
        assert!(is_maximal_order(&q, &m));
        assert!(standard_order(&q).is_sublattice_of(&m));
    }

    #[test]
    fn q15_maximal_order_is_unramified() {
        let k = make_field(FieldSpec::RealQuadratic(15)).unwrap();
        let q = make_algebra(&k, &k.one(), &k.one()).unwrap();
        let m = maximal_order(&q);
        assert_eq!(reduced_discriminant(&q, &m), k.unit_ideal());
        assert!(q.ramified_primes().is_empty());
        assert_eq!(m.norm(&q), k.unit_ideal());
        let p3 = &k.primes_above(&int(3))[0];
        assert_eq!(
            two_sided_maximal_ideal(&q, &m, p3),
            ideal_times_lattice(&q, &p3.ideal, &m)
        );
        // idempotence: starting from a maximal order does not enlarge it
        let p2 = &k.primes_above(&int(2))[0];
        assert!(enlarge_at(&q, &m, p2).is_none());
    }
}
