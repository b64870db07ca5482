//! The totally definite quaternion algebra `(−a, −b / K)`.
//!
//! Elements are quadruples over the basis `(1, i, j, ij)`. The ambient
//! `Q`-frame used by lattices has coordinate `k·n + l` for `ω^l · e_k`,
//! where `n = [K:Q]` and `e = (1, i, j, ij)`.

use std::sync::OnceLock;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::field::{BaseField, FieldElem, PrimeIdeal};
use crate::lattice::QuatLattice;
use crate::linalg::{common_denominator, rat_int, Rat};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct QuatElem(pub [FieldElem; 4]);

#[derive(Clone, Debug)]
pub struct QuatAlgebra {
    field: BaseField,
    /// The parameters as given.
    input_a: FieldElem,
    input_b: FieldElem,
    /// Integral parameters actually used; they differ from the inputs by
    /// squares, which does not change the algebra.
    a: FieldElem,
    b: FieldElem,
    ab: FieldElem,
    maximal: OnceLock<QuatLattice>,
    ramified: OnceLock<Vec<PrimeIdeal>>,
}

impl PartialEq for QuatAlgebra {
    fn eq(&self, o: &Self) -> bool {
        self.field == o.field && self.a == o.a && self.b == o.b
    }
}

fn clear_denominator(x: &FieldElem) -> FieldElem {
    let c = rat_int(&common_denominator(x.coords()));
    x.scale(&(&c * &c))
}

/// Build `(−a, −b / K)`; `a` and `b` must be totally positive.
pub fn make_algebra(k: &BaseField, a: &FieldElem, b: &FieldElem) -> Result<QuatAlgebra> {
    for x in [a, b] {
        if !k.is_totally_positive(x) {
            return Err(Error::NotTotallyPositive(x.to_string()));
        }
    }
    let ai = clear_denominator(a);
    let bi = clear_denominator(b);
    Ok(QuatAlgebra {
        field: k.clone(),
        input_a: a.clone(),
        input_b: b.clone(),
        ab: k.mul(&ai, &bi),
        a: ai,
        b: bi,
        maximal: OnceLock::new(),
        ramified: OnceLock::new(),
    })
}

impl QuatAlgebra {
    pub fn field(&self) -> &BaseField {
        &self.field
    }

    /// Integral parameters `(a, b)` of the standard basis.
    pub fn params(&self) -> (&FieldElem, &FieldElem) {
        (&self.a, &self.b)
    }

    pub fn input_params(&self) -> (&FieldElem, &FieldElem) {
        (&self.input_a, &self.input_b)
    }

    /// Dimension of the ambient `Q`-frame, `4·[K:Q]`.
    pub fn ambient_dim(&self) -> usize {
        4 * self.field.degree()
    }

    pub fn elem(&self, t: FieldElem, x: FieldElem, y: FieldElem, z: FieldElem) -> QuatElem {
        QuatElem([t, x, y, z])
    }

    pub fn from_field(&self, t: &FieldElem) -> QuatElem {
        let z = self.field.zero();
        QuatElem([t.clone(), z.clone(), z.clone(), z])
    }

    pub fn zero(&self) -> QuatElem {
        self.from_field(&self.field.zero())
    }

    pub fn one(&self) -> QuatElem {
        self.from_field(&self.field.one())
    }

    /// The standard basis `(1, i, j, ij)`.
    pub fn standard_basis(&self) -> Vec<QuatElem> {
        (0..4)
            .map(|k| {
                let mut q = self.zero();
                q.0[k] = self.field.one();
                q
            })
            .collect()
    }

    pub fn add(&self, x: &QuatElem, y: &QuatElem) -> QuatElem {
        QuatElem(std::array::from_fn(|k| &x.0[k] + &y.0[k]))
    }

    pub fn sub(&self, x: &QuatElem, y: &QuatElem) -> QuatElem {
        QuatElem(std::array::from_fn(|k| &x.0[k] - &y.0[k]))
    }

    pub fn neg(&self, x: &QuatElem) -> QuatElem {
        QuatElem(std::array::from_fn(|k| -&x.0[k]))
    }

    pub fn scale(&self, x: &QuatElem, r: &Rat) -> QuatElem {
        QuatElem(std::array::from_fn(|k| x.0[k].scale(r)))
    }

    /// Multiplication by a central element.
    pub fn scale_field(&self, x: &QuatElem, c: &FieldElem) -> QuatElem {
        QuatElem(std::array::from_fn(|k| self.field.mul(&x.0[k], c)))
    }

    pub fn mul(&self, x: &QuatElem, y: &QuatElem) -> QuatElem {
        let k = &self.field;
        let m = |p: &FieldElem, q: &FieldElem| k.mul(p, q);
        let [t1, x1, y1, z1] = &x.0;
        let [t2, x2, y2, z2] = &y.0;
        let t = &(&(&m(t1, t2) - &m(&self.a, &m(x1, x2))) - &m(&self.b, &m(y1, y2)))
            - &m(&self.ab, &m(z1, z2));
        let xx = &(&m(t1, x2) + &m(x1, t2)) + &m(&self.b, &(&m(y1, z2) - &m(z1, y2)));
        let yy = &(&m(t1, y2) + &m(y1, t2)) + &m(&self.a, &(&m(z1, x2) - &m(x1, z2)));
        let zz = &(&(&m(t1, z2) + &m(z1, t2)) + &m(x1, y2)) - &m(y1, x2);
        QuatElem([t, xx, yy, zz])
    }

    pub fn conj(&self, x: &QuatElem) -> QuatElem {
        QuatElem([x.0[0].clone(), -&x.0[1], -&x.0[2], -&x.0[3]])
    }

    pub fn reduced_norm(&self, x: &QuatElem) -> FieldElem {
        let k = &self.field;
        let sq = |p: &FieldElem| k.mul(p, p);
        let [t, xx, y, z] = &x.0;
        &(&(&sq(t) + &k.mul(&self.a, &sq(xx))) + &k.mul(&self.b, &sq(y))) + &k.mul(&self.ab, &sq(z))
    }

    pub fn reduced_trace(&self, x: &QuatElem) -> FieldElem {
        x.0[0].scale(&Rat::from_integer(2.into()))
    }

    pub fn inv(&self, x: &QuatElem) -> QuatElem {
        let n = self.reduced_norm(x);
        self.scale_field(&self.conj(x), &self.field.inv(&n))
    }

    pub fn is_zero(&self, x: &QuatElem) -> bool {
        x.0.iter().all(|c| c.is_zero())
    }

    pub fn is_central(&self, x: &QuatElem) -> bool {
        x.0[1..].iter().all(|c| c.is_zero())
    }

    pub fn to_ambient(&self, x: &QuatElem) -> Vec<Rat> {
        x.0.iter()
            .flat_map(|c| c.coords().iter().cloned())
            .collect()
    }

    pub fn from_ambient(&self, v: &[Rat]) -> QuatElem {
        let n = self.field.degree();
        QuatElem(std::array::from_fn(|k| {
            crate::field::FieldElem(v[k * n..(k + 1) * n].to_vec())
        }))
    }

    /// The ambient `Q`-basis `ω^l · e_k`.
    pub fn ambient_basis(&self) -> Vec<QuatElem> {
        let m = self.ambient_dim();
        (0..m)
            .map(|r| {
                let mut v = vec![Rat::zero(); m];
                v[r] = Rat::from_integer(1.into());
                self.from_ambient(&v)
            })
            .collect()
    }

    /// Matrix (row convention) of `y ↦ x·y`.
    pub fn left_mult_matrix(&self, x: &QuatElem) -> Vec<Vec<Rat>> {
        self.ambient_basis()
            .iter()
            .map(|e| self.to_ambient(&self.mul(x, e)))
            .collect()
    }

    /// Matrix (row convention) of `y ↦ y·x`.
    pub fn right_mult_matrix(&self, x: &QuatElem) -> Vec<Vec<Rat>> {
        self.ambient_basis()
            .iter()
            .map(|e| self.to_ambient(&self.mul(e, x)))
            .collect()
    }

    pub(crate) fn maximal_cache(&self) -> &OnceLock<QuatLattice> {
        &self.maximal
    }

    /// Finite primes of `K` ramified in the algebra, sorted by norm.
    pub fn ramified_primes(&self) -> &[PrimeIdeal] {
        self.ramified.get_or_init(|| {
            let m = crate::lattice::maximal_order(self);
            let d = crate::lattice::reduced_discriminant(self, &m);
            let mut ps: Vec<PrimeIdeal> = self
                .field
                .factor_ideal(&d)
                .expect("nonzero discriminant")
                .into_iter()
                .map(|(p, _)| p)
                .collect();
            ps.sort_by(|a, b| a.norm().cmp(&b.norm()).then_with(|| a.ideal.cmp(&b.ideal)));
            ps
        })
    }

    /// Render an element as `[t, x, y, z]` in field-element syntax.
    pub fn render(&self, x: &QuatElem) -> String {
        let parts: Vec<String> = x.0.iter().map(|c| c.to_string()).collect();
        format!("[{}]", parts.join(", "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{make_field, FieldSpec};
    use crate::linalg::rat;

    fn hamilton() -> QuatAlgebra {
        let k = make_field(FieldSpec::Rationals).unwrap();
        make_algebra(&k, &k.one(), &k.one()).unwrap()
    }

    #[test]
    fn defining_relations() {
        let q = hamilton();
        let [_, i, j, ij] = <[QuatElem; 4]>::try_from(q.standard_basis()).unwrap();
        assert_eq!(q.mul(&i, &j), ij);
        assert_eq!(q.mul(&j, &i), q.neg(&ij));
        assert_eq!(q.mul(&i, &i), q.neg(&q.one()));
        let one_plus_i = q.add(&q.one(), &i);
        assert_eq!(q.reduced_norm(&one_plus_i), q.field().from_int(2));
    }

    #[test]
    fn rejects_indefinite() {
        let k = make_field(FieldSpec::Rationals).unwrap();
        assert!(matches!(
            make_algebra(&k, &k.from_int(-1), &k.one()),
            Err(Error::NotTotallyPositive(_))
        ));
        let k15 = make_field(FieldSpec::RealQuadratic(15)).unwrap();
        let s = k15.elem(rat(0, 1), rat(1, 1));
        assert!(make_algebra(&k15, &s, &k15.one()).is_err());
    }

    #[test]
    fn norm_gram_is_diagonal() {
        let k = make_field(FieldSpec::Rationals).unwrap();
        let q = make_algebra(&k, &k.from_int(2), &k.from_int(3)).unwrap();
        let b = q.standard_basis();
        for (r, x) in b.iter().enumerate() {
            for (c, y) in b.iter().enumerate() {
                let bil = q.reduced_trace(&q.mul(x, &q.conj(y))).scale(&rat(1, 2));
                let expect = if r != c { 0 } else { [1, 2, 3, 6][r] };
                assert_eq!(bil, k.from_int(expect));
            }
        }
    }

    #[test]
    fn integral_scaling() {
        let k = make_field(FieldSpec::Rationals).unwrap();
        let q = make_algebra(&k, &k.from_rat(rat(1, 2)), &k.one()).unwrap();
        assert_eq!(q.params().0, &k.from_int(2));
    }

    fn elem_strategy() -> impl proptest::strategy::Strategy<Value = Vec<i64>> {
        proptest::collection::vec(-5i64..=5, 8)
    }

    proptest::proptest! {
        #[test]
        fn multiplicative(xs in elem_strategy(), ys in elem_strategy()) {
            let k = make_field(FieldSpec::RealQuadratic(15)).unwrap();
            let q = make_algebra(&k, &k.one(), &k.elem(rat(4, 1), rat(1, 1))).unwrap();
            let x = q.from_ambient(&xs.iter().map(|&c| rat(c, 1)).collect::<Vec<_>>());
            let y = q.from_ambient(&ys.iter().map(|&c| rat(c, 3)).collect::<Vec<_>>());
            let xy = q.mul(&x, &y);
            proptest::prop_assert_eq!(q.reduced_norm(&xy), k.mul(&q.reduced_norm(&x), &q.reduced_norm(&y)));
            proptest::prop_assert_eq!(q.conj(&xy), q.mul(&q.conj(&y), &q.conj(&x)));
            proptest::prop_assert_eq!(q.conj(&q.conj(&x)), x.clone());
            if !q.is_zero(&x) {
                proptest::prop_assert!(k.is_totally_positive(&q.reduced_norm(&x)));
                proptest::prop_assert_eq!(q.mul(&x, &q.inv(&x)), q.one());
            }
            proptest::prop_assert_eq!(q.from_ambient(&q.to_ambient(&x)), x);
        }
    }
}
