//! Exact arithmetic in the base field `K`, which is either `Q` or a real
//! quadratic field `Q(√d)`, together with its fractional ideals, units and
//! (narrow) class groups.
//!
//! Elements are stored as rational coordinates over the integral basis
//! `(1)` or `(1, ω)`, where `ω = √d` for `d ≡ 2, 3 (mod 4)` and
//! `ω = (1 + √d)/2` for `d ≡ 1 (mod 4)`. In both cases `ω² = tω − m` with
//! `t = Tr(ω)`, `m = N(ω)`.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Neg, Sub};
use std::sync::OnceLock;

use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::enumeration::short_vectors;
use crate::error::{Error, Result};
use crate::linalg::{exact_isqrt, factor_int, rat_int, rat_sqrt, Int, Rat, ZLattice};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FieldSpec {
    Rationals,
    RealQuadratic(i64),
}

/// Element of `K` in integral-basis coordinates.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FieldElem(pub Vec<Rat>);

impl FieldElem {
    pub fn coords(&self) -> &[Rat] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|c| c.is_zero())
    }

    pub fn scale(&self, r: &Rat) -> FieldElem {
        FieldElem(self.0.iter().map(|c| c * r).collect())
    }

    /// The rational value when the element lies in `Q`.
    pub fn as_rational(&self) -> Option<Rat> {
        self.0[1..]
            .iter()
            .all(|c| c.is_zero())
            .then(|| self.0[0].clone())
    }
}

impl Add for &FieldElem {
    type Output = FieldElem;
    fn add(self, o: &FieldElem) -> FieldElem {
        FieldElem(self.0.iter().zip(&o.0).map(|(a, b)| a + b).collect())
    }
}

impl Sub for &FieldElem {
    type Output = FieldElem;
    fn sub(self, o: &FieldElem) -> FieldElem {
        FieldElem(self.0.iter().zip(&o.0).map(|(a, b)| a - b).collect())
    }
}

impl Neg for &FieldElem {
    type Output = FieldElem;
    fn neg(self) -> FieldElem {
        FieldElem(self.0.iter().map(|a| -a).collect())
    }
}

impl fmt::Display for FieldElem {
    /// Canonical `p+q*w` syntax; `w` is the integral basis generator.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let a = &self.0[0];
        let b = self.0.get(1).cloned().unwrap_or_else(Rat::zero);
        if b.is_zero() {
            return write!(f, "{a}");
        }
        let w = if b == Rat::one() {
            "w".to_string()
        } else if b == -Rat::one() {
            "-w".to_string()
        } else {
            format!("{b}*w")
        };
        if a.is_zero() {
            write!(f, "{w}")
        } else if w.starts_with('-') {
            write!(f, "{a}{w}")
        } else {
            write!(f, "{a}+{w}")
        }
    }
}

/// Fractional ideal of `Z_K`, stored as its canonical Z-lattice.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FieldIdeal(pub(crate) ZLattice);

impl FieldIdeal {
    pub fn lattice(&self) -> &ZLattice {
        &self.0
    }

    pub fn basis(&self) -> Vec<FieldElem> {
        self.0.basis().into_iter().map(FieldElem).collect()
    }

    pub fn contains(&self, x: &FieldElem) -> bool {
        self.0.contains(&x.0)
    }

    pub fn is_integral(&self) -> bool {
        self.0.den().is_one()
    }

    pub fn norm(&self) -> Rat {
        self.0.covolume()
    }
}

/// A prime ideal together with its rational prime, ramification index and
/// residue degree.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PrimeIdeal {
    pub ideal: FieldIdeal,
    pub p: Int,
    pub e: u32,
    pub f: u32,
}

impl PrimeIdeal {
    pub fn norm(&self) -> Int {
        num_traits::pow(self.p.clone(), self.f as usize)
    }
}

#[derive(Clone, Debug)]
pub struct ClassGroupData {
    pub h: usize,
    pub class_reps: Vec<FieldIdeal>,
    pub h_plus: usize,
    pub narrow_reps: Vec<FieldIdeal>,
    /// `2^u = h⁺ / h`.
    pub u: u32,
    /// Representatives of totally positive units modulo squares of units; the
    /// first entry is always `1`.
    pub tp_unit_reps: Vec<FieldElem>,
}

#[derive(Clone, Debug)]
pub struct BaseField {
    d: i64,
    degree: usize,
    om_trace: Int,
    om_norm: Int,
    disc: Int,
    unit: OnceLock<Option<FieldElem>>,
    classes: OnceLock<ClassGroupData>,
}

impl PartialEq for BaseField {
    fn eq(&self, o: &Self) -> bool {
        self.d == o.d && self.degree == o.degree
    }
}
impl Eq for BaseField {}

fn is_squarefree(d: i64) -> bool {
    let mut k = 2i64;
    while k * k <= d {
        if d % (k * k) == 0 {
            return false;
        }
        k += 1;
    }
    true
}

/// Build the base field.
pub fn make_field(spec: FieldSpec) -> Result<BaseField> {
    match spec {
        FieldSpec::Rationals => Ok(BaseField {
            d: 1,
            degree: 1,
            om_trace: Int::zero(),
            om_norm: Int::zero(),
            disc: Int::one(),
            unit: OnceLock::new(),
            classes: OnceLock::new(),
        }),
        FieldSpec::RealQuadratic(d) => {
            if d <= 1 {
                return Err(Error::BadDiscriminant(d));
            }
            if !is_squarefree(d) {
                return Err(Error::NotSquarefree(d));
            }
            let (t, m, disc) = if d.rem_euclid(4) == 1 {
                (1, (1 - d) / 4, d)
            } else {
                (0, -d, 4 * d)
            };
            Ok(BaseField {
                d,
                degree: 2,
                om_trace: Int::from(t),
                om_norm: Int::from(m),
                disc: Int::from(disc),
                unit: OnceLock::new(),
                classes: OnceLock::new(),
            })
        }
    }
}

fn sigma1(n: &Int) -> Int {
    factor_int(n).iter().fold(Int::one(), |acc, (p, e)| {
        let pe1 = num_traits::pow(p.clone(), *e as usize + 1);
        acc * ((pe1 - 1u32) / (p - 1u32))
    })
}

/// `floor((p + √disc) / q)` for a non-square `disc`.
fn floor_quadratic(p: &Int, q: &Int, disc: &Int) -> Int {
    let s = num_integer::Roots::sqrt(disc);
    let lo = Rat::new(p + &s, q.clone());
    let hi = Rat::new(p + &s + 1u32, q.clone());
    let (lo, hi) = if lo < hi { (lo, hi) } else { (hi, lo) };
    let fl = lo.floor().to_integer();
    let cand = &fl + 1u32;
    if Rat::from_integer(cand.clone()) > hi {
        return fl;
    }
    // is (p + √disc)/q >= cand ?
    let t = &cand * q - p;
    let ge = if q.is_positive() {
        !t.is_positive() || *disc >= &t * &t
    } else {
        !t.is_negative() && *disc <= &t * &t
    };
    if ge {
        cand
    } else {
        fl
    }
}

impl BaseField {
    pub fn spec(&self) -> FieldSpec {
        if self.degree == 1 {
            FieldSpec::Rationals
        } else {
            FieldSpec::RealQuadratic(self.d)
        }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn d(&self) -> i64 {
        self.d
    }

    pub fn discriminant(&self) -> &Int {
        &self.disc
    }

    pub fn zero(&self) -> FieldElem {
        FieldElem(vec![Rat::zero(); self.degree])
    }

    pub fn one(&self) -> FieldElem {
        self.from_rat(Rat::one())
    }

    pub fn from_rat(&self, r: Rat) -> FieldElem {
        let mut v = vec![Rat::zero(); self.degree];
        v[0] = r;
        FieldElem(v)
    }

    pub fn from_int(&self, v: i64) -> FieldElem {
        self.from_rat(Rat::from_integer(Int::from(v)))
    }

    /// `a + b·ω`; `b` must be zero over `Q`.
    pub fn elem(&self, a: Rat, b: Rat) -> FieldElem {
        if self.degree == 1 {
            assert!(b.is_zero(), "rational field has no ω");
            FieldElem(vec![a])
        } else {
            FieldElem(vec![a, b])
        }
    }

    /// The integral basis `(1)` or `(1, ω)`.
    pub fn integral_basis(&self) -> Vec<FieldElem> {
        (0..self.degree)
            .map(|l| {
                let mut v = vec![Rat::zero(); self.degree];
                v[l] = Rat::one();
                FieldElem(v)
            })
            .collect()
    }

    pub fn mul(&self, x: &FieldElem, y: &FieldElem) -> FieldElem {
        if self.degree == 1 {
            return FieldElem(vec![&x.0[0] * &y.0[0]]);
        }
        let (a, b) = (&x.0[0], &x.0[1]);
        let (c, d) = (&y.0[0], &y.0[1]);
        let bd = b * d;
        let t = rat_int(&self.om_trace);
        let m = rat_int(&self.om_norm);
        FieldElem(vec![a * c - &bd * m, a * d + b * c + bd * t])
    }

    pub fn conj(&self, x: &FieldElem) -> FieldElem {
        if self.degree == 1 {
            return x.clone();
        }
        let t = rat_int(&self.om_trace);
        FieldElem(vec![&x.0[0] + &x.0[1] * t, -&x.0[1]])
    }

    pub fn norm(&self, x: &FieldElem) -> Rat {
        if self.degree == 1 {
            return x.0[0].clone();
        }
        self.mul(x, &self.conj(x)).0[0].clone()
    }

    pub fn trace(&self, x: &FieldElem) -> Rat {
        if self.degree == 1 {
            return x.0[0].clone();
        }
        &x.0[0] * Rat::from_integer(Int::from(2)) + &x.0[1] * rat_int(&self.om_trace)
    }

    pub fn inv(&self, x: &FieldElem) -> FieldElem {
        assert!(!x.is_zero(), "inverse of zero");
        if self.degree == 1 {
            return FieldElem(vec![x.0[0].recip()]);
        }
        let n = self.norm(x);
        self.conj(x).scale(&n.recip())
    }

    pub fn div(&self, x: &FieldElem, y: &FieldElem) -> FieldElem {
        self.mul(x, &self.inv(y))
    }

    pub fn pow(&self, x: &FieldElem, e: i64) -> FieldElem {
        let base = if e < 0 { self.inv(x) } else { x.clone() };
        (0..e.unsigned_abs()).fold(self.one(), |acc, _| self.mul(&acc, &base))
    }

    pub fn is_integral(&self, x: &FieldElem) -> bool {
        x.0.iter().all(|c| c.is_integer())
    }

    /// `(r, s)` with `x = r + s·√disc`.
    fn sqrt_disc_parts(&self, x: &FieldElem) -> (Rat, Rat) {
        if self.degree == 1 {
            return (x.0[0].clone(), Rat::zero());
        }
        let half = Rat::new(Int::one(), Int::from(2));
        (
            &x.0[0] + &x.0[1] * rat_int(&self.om_trace) * &half,
            &x.0[1] * half,
        )
    }

    /// Exact sign of `x` under real embedding `emb` (0: √disc > 0, 1: √disc < 0).
    pub fn sign(&self, x: &FieldElem, emb: usize) -> Ordering {
        let (r, mut s) = self.sqrt_disc_parts(x);
        if emb == 1 {
            s = -s;
        }
        let zero = Rat::zero();
        let rs = r.cmp(&zero);
        let ss = s.cmp(&zero);
        match (rs, ss) {
            (Ordering::Equal, _) => ss,
            (_, Ordering::Equal) => rs,
            (a, b) if a == b => a,
            _ => {
                let r2 = &r * &r;
                let s2d = &s * &s * rat_int(&self.disc);
                // r and s have opposite signs: r dominates iff r² > s²·disc
                match r2.cmp(&s2d) {
                    Ordering::Greater => rs,
                    _ => ss,
                }
            }
        }
    }

    pub fn is_totally_positive(&self, x: &FieldElem) -> bool {
        (0..self.degree).all(|e| self.sign(x, e) == Ordering::Greater)
    }

    pub fn approx(&self, x: &FieldElem, emb: usize) -> f64 {
        let (r, s) = self.sqrt_disc_parts(x);
        let sq = self.disc.to_f64().unwrap().sqrt();
        let s = if emb == 1 { -s } else { s };
        r.to_f64().unwrap() + s.to_f64().unwrap() * sq
    }

    /// Square root in `K`, if `x` is a square.
    pub fn sqrt(&self, x: &FieldElem) -> Option<FieldElem> {
        if x.is_zero() {
            return Some(self.zero());
        }
        if self.degree == 1 {
            return rat_sqrt(&x.0[0]).map(|r| self.from_rat(r));
        }
        let (r, s) = self.sqrt_disc_parts(x);
        let disc = rat_int(&self.disc);
        let n = &r * &r - &s * &s * &disc;
        let m = rat_sqrt(&n)?;
        let half = Rat::new(Int::one(), Int::from(2));
        for sigma in [Rat::one(), -Rat::one()] {
            let p2 = (&r + &m * &sigma) * &half;
            if p2.is_negative() {
                continue;
            }
            let candidates: Vec<(Rat, Rat)> = if p2.is_zero() {
                // x = D q² with q rational
                match rat_sqrt(&(&r / &disc)) {
                    Some(q) => vec![(Rat::zero(), q)],
                    None => vec![],
                }
            } else {
                match rat_sqrt(&p2) {
                    Some(p) => {
                        let q = &s / (&p * Rat::from_integer(Int::from(2)));
                        vec![(p, q)]
                    }
                    None => vec![],
                }
            };
            for (p, q) in candidates {
                // p + q√disc back into (1, ω) coordinates: √disc = 2ω − t
                let t = rat_int(&self.om_trace);
                let y = self.elem(&p - &q * &t, &q * Rat::from_integer(Int::from(2)));
                if self.mul(&y, &y) == *x {
                    return Some(y);
                }
            }
        }
        None
    }

    pub fn is_square(&self, x: &FieldElem) -> bool {
        self.sqrt(x).is_some()
    }

    /// Compare `x` and `y` as real numbers under embedding `emb`.
    pub fn cmp_real(&self, x: &FieldElem, y: &FieldElem, emb: usize) -> Ordering {
        self.sign(&(x - y), emb)
    }

    /// Fundamental unit `ε > 1` (first embedding) of a real quadratic field.
    pub fn fundamental_unit(&self) -> Result<FieldElem> {
        self.unit
            .get_or_init(|| (self.degree == 2).then(|| self.compute_fundamental_unit()))
            .clone()
            .ok_or(Error::NoFundamentalUnit)
    }

    fn unit_from_norm_eq(&self, x: &Int, y: &Int) -> Option<FieldElem> {
        let e = self.elem(rat_int(x), rat_int(y));
        let n = self.norm(&e);
        if n.abs().is_one() && self.cmp_real(&e, &self.one(), 0) == Ordering::Greater {
            Some(e)
        } else {
            None
        }
    }

    fn compute_fundamental_unit(&self) -> FieldElem {
        let t = self.om_trace.clone();
        let m = self.om_norm.clone();
        let mut found: Vec<FieldElem> = Vec::new();
        // small y: N(x + yω) = x² + t·x·y + m·y² = ±1
        for y in 1i64..=64 {
            let y = Int::from(y);
            for pm in [1i64, -1] {
                let disc = &t * &t * &y * &y - (&m * &y * &y - pm) * 4u32;
                if let Some(r) = exact_isqrt(&disc) {
                    for sgn in [&r, &(-&r)] {
                        let num = -&t * &y + sgn;
                        if num.is_even() {
                            let x = num / 2;
                            if let Some(u) = self.unit_from_norm_eq(&x, &y) {
                                found.push(u);
                            }
                        }
                    }
                }
            }
            if !found.is_empty() {
                break;
            }
        }
        if found.is_empty() {
            // continued fraction of ω = (t + √disc)/2
            let disc = self.disc.clone();
            let (mut p, mut q) = (t.clone(), Int::from(2));
            let (mut pm1, mut pm2) = (Int::one(), Int::zero());
            let (mut qm1, mut qm2) = (Int::zero(), Int::one());
            for _ in 0..1_000_000 {
                let a = floor_quadratic(&p, &q, &disc);
                let pk = &a * &pm1 + &pm2;
                let qk = &a * &qm1 + &qm2;
                // η = pk − qk·ω̄ = (pk − qk·t) + qk·ω
                if let Some(u) = self.unit_from_norm_eq(&(&pk - &qk * &t), &qk) {
                    found.push(u);
                    break;
                }
                pm2 = std::mem::replace(&mut pm1, pk);
                qm2 = std::mem::replace(&mut qm1, qk);
                let np = &a * &q - &p;
                let nq = (&disc - &np * &np) / &q;
                p = np;
                q = nq;
            }
        }
        found
            .into_iter()
            .min_by(|a, b| self.cmp_real(a, b, 0))
            .expect("continued fraction expansion yields a unit")
    }

    /// Totally positive units modulo squares of units.
    pub fn tp_unit_reps(&self) -> Vec<FieldElem> {
        self.class_groups().tp_unit_reps.clone()
    }

    /// Index of the class of `x` in `tp_unit_reps` when `x` is a totally
    /// positive unit times a square of `K^*`.
    pub fn unit_square_class(&self, x: &FieldElem) -> Option<usize> {
        if !self.is_totally_positive(x) {
            return None;
        }
        self.class_groups()
            .tp_unit_reps
            .iter()
            .position(|u| self.is_square(&self.div(x, u)))
    }

    /// True if `x ∈ Z_K^* · (K^*)²`, i.e. `(x)` is a square of a principal ideal.
    pub fn is_unit_times_square(&self, x: &FieldElem) -> bool {
        let units: Vec<FieldElem> = match self.fundamental_unit() {
            Ok(e) => vec![self.one(), -&self.one(), e.clone(), -&e],
            Err(_) => vec![self.one(), -&self.one()],
        };
        units.iter().any(|u| self.is_square(&self.mul(x, u)))
    }

    // ---------------------------------------------------------------- ideals

    pub fn ideal(&self, gens: &[FieldElem]) -> Result<FieldIdeal> {
        let basis = self.integral_basis();
        let rows: Vec<Vec<Rat>> = gens
            .iter()
            .flat_map(|g| basis.iter().map(move |b| (g, b)))
            .map(|(g, b)| self.mul(g, b).0)
            .collect();
        if rows.iter().all(|r| r.iter().all(|x| x.is_zero())) {
            return Err(Error::ZeroIdeal);
        }
        ZLattice::from_rat_rows(self.degree, &rows).map(FieldIdeal)
    }

    pub fn principal_ideal(&self, x: &FieldElem) -> FieldIdeal {
        self.ideal(std::slice::from_ref(x))
            .expect("nonzero generator")
    }

    pub fn unit_ideal(&self) -> FieldIdeal {
        FieldIdeal(ZLattice::identity(self.degree))
    }

    pub fn ideal_mul(&self, a: &FieldIdeal, b: &FieldIdeal) -> FieldIdeal {
        let rows: Vec<Vec<Rat>> = a
            .basis()
            .iter()
            .flat_map(|x| b.basis().into_iter().map(move |y| (x.clone(), y)))
            .map(|(x, y)| self.mul(&x, &y).0)
            .collect();
        FieldIdeal(ZLattice::from_rat_rows(self.degree, &rows).expect("product of nonzero ideals"))
    }

    pub fn ideal_add(&self, a: &FieldIdeal, b: &FieldIdeal) -> FieldIdeal {
        FieldIdeal(a.0.sum(&b.0))
    }

    pub fn ideal_conj(&self, a: &FieldIdeal) -> FieldIdeal {
        let rows: Vec<Vec<Rat>> = a.basis().iter().map(|x| self.conj(x).0).collect();
        FieldIdeal(ZLattice::from_rat_rows(self.degree, &rows).expect("conjugate ideal"))
    }

    pub fn ideal_inverse(&self, a: &FieldIdeal) -> FieldIdeal {
        let n = a.norm();
        if self.degree == 1 {
            return FieldIdeal(a.0.scale(&(&n * &n).recip()));
        }
        let c = self.ideal_conj(a);
        FieldIdeal(c.0.scale(&n.recip()))
    }

    pub fn ideal_pow(&self, a: &FieldIdeal, e: i64) -> FieldIdeal {
        let base = if e < 0 {
            self.ideal_inverse(a)
        } else {
            a.clone()
        };
        (0..e.unsigned_abs()).fold(self.unit_ideal(), |acc, _| self.ideal_mul(&acc, &base))
    }

    pub fn ideal_scale(&self, a: &FieldIdeal, x: &FieldElem) -> FieldIdeal {
        self.ideal_mul(a, &self.principal_ideal(x))
    }

    pub fn ideal_norm(&self, a: &FieldIdeal) -> Rat {
        a.norm()
    }

    /// Prime ideals above the rational prime `p`, sorted canonically.
    pub fn primes_above(&self, p: &Int) -> Vec<PrimeIdeal> {
        if self.degree == 1 {
            return vec![PrimeIdeal {
                ideal: self.principal_ideal(&self.from_rat(rat_int(p))),
                p: p.clone(),
                e: 1,
                f: 1,
            }];
        }
        let pu = p.to_u64().expect("prime fits in u64");
        let t = self.om_trace.mod_floor(p);
        let m = self.om_norm.mod_floor(p);
        let roots: Vec<Int> = (0..pu)
            .map(Int::from)
            .filter(|r| ((r * r) - (&t * r) + &m).mod_floor(p).is_zero())
            .collect();
        let pe = self.from_rat(rat_int(p));
        let mk = |r: &Int| {
            self.ideal(&[pe.clone(), self.elem(-rat_int(r), Rat::one())])
                .expect("prime ideal")
        };
        let mut out: Vec<PrimeIdeal> = match roots.len() {
            0 => vec![PrimeIdeal {
                ideal: self.principal_ideal(&pe),
                p: p.clone(),
                e: 1,
                f: 2,
            }],
            1 => vec![PrimeIdeal {
                ideal: mk(&roots[0]),
                p: p.clone(),
                e: 2,
                f: 1,
            }],
            _ => roots
                .iter()
                .map(|r| PrimeIdeal {
                    ideal: mk(r),
                    p: p.clone(),
                    e: 1,
                    f: 1,
                })
                .collect(),
        };
        out.sort_by(|a, b| a.ideal.cmp(&b.ideal));
        out
    }

    /// All prime ideals with norm at most `bound`, sorted by norm.
    pub fn primes_up_to(&self, bound: u64) -> Vec<PrimeIdeal> {
        let mut out: Vec<PrimeIdeal> = (2..=bound)
            .filter(|&p| (2..p).take_while(|k| k * k <= p).all(|k| p % k != 0))
            .flat_map(|p| self.primes_above(&Int::from(p)))
            .filter(|pr| pr.norm() <= Int::from(bound))
            .collect();
        out.sort_by(|a, b| a.norm().cmp(&b.norm()).then_with(|| a.ideal.cmp(&b.ideal)));
        out
    }

    /// The prime ideal above `p` lying under a given ideal, if it is prime.
    pub fn as_prime(&self, a: &FieldIdeal) -> Option<PrimeIdeal> {
        let n = a.norm();
        if !n.is_integer() {
            return None;
        }
        let f = factor_int(&n.to_integer());
        if f.len() != 1 {
            return None;
        }
        self.primes_above(&f[0].0)
            .into_iter()
            .find(|pr| pr.ideal == *a)
    }

    /// Valuation of a nonzero fractional ideal at a prime.
    pub fn valuation(&self, a: &FieldIdeal, pr: &PrimeIdeal) -> i64 {
        let den = a.0.den().clone();
        let mut integral = FieldIdeal(a.0.scale(&rat_int(&den)));
        let pinv = self.ideal_inverse(&pr.ideal);
        let mut v = 0i64;
        while integral.basis().iter().all(|x| pr.ideal.contains(x)) {
            integral = self.ideal_mul(&integral, &pinv);
            v += 1;
        }
        let mut dd = den;
        let mut vp = 0i64;
        while (&dd % &pr.p).is_zero() {
            dd /= &pr.p;
            vp += 1;
        }
        v - vp * pr.e as i64
    }

    /// Unique factorisation into prime ideals.
    pub fn factor_ideal(&self, a: &FieldIdeal) -> Result<Vec<(PrimeIdeal, i64)>> {
        let n = a.norm();
        if n.is_zero() {
            return Err(Error::ZeroIdeal);
        }
        // primes of the integral numerator `den·a` and of `den`; the norm of `a`
        // alone can hide cancelling primes
        let den = a.0.den().clone();
        let num = FieldIdeal(a.0.scale(&rat_int(&den))).norm();
        let mut ps: Vec<Int> = factor_int(num.numer())
            .into_iter()
            .map(|(p, _)| p)
            .collect();
        ps.extend(factor_int(&den).into_iter().map(|(p, _)| p));
        ps.sort();
        ps.dedup();
        let mut out = Vec::new();
        for p in ps {
            for pr in self.primes_above(&p) {
                let v = self.valuation(a, &pr);
                if v != 0 {
                    out.push((pr, v));
                }
            }
        }
        Ok(out)
    }

    fn trace_gram(&self, basis: &[FieldElem]) -> Vec<Vec<Rat>> {
        basis
            .iter()
            .map(|x| basis.iter().map(|y| self.trace(&self.mul(x, y))).collect())
            .collect()
    }

    /// `𝔟` with `𝔟² = a`, if it exists.
    pub fn ideal_sqrt(&self, a: &FieldIdeal) -> Option<FieldIdeal> {
        let f = self.factor_ideal(a).ok()?;
        f.iter().try_fold(self.unit_ideal(), |acc, (p, e)| {
            (e % 2 == 0).then(|| self.ideal_mul(&acc, &self.ideal_pow(&p.ideal, e / 2)))
        })
    }

    /// For `r ≠ 0` with `(r) = (b)²`, the element `r/b²` (a unit); `None`
    /// when `(r)` is not the square of a principal ideal.
    pub fn unit_part(&self, r: &FieldElem) -> Option<FieldElem> {
        let b = self.is_principal(&self.ideal_sqrt(&self.principal_ideal(r))?)?;
        Some(self.div(r, &self.mul(&b, &b)))
    }

    /// A generator of `a` if it is principal.
    pub fn is_principal(&self, a: &FieldIdeal) -> Option<FieldElem> {
        let basis = a.basis();
        if self.degree == 1 {
            return Some(basis[0].clone());
        }
        let n = a.norm();
        let eps = self.fundamental_unit().expect("real quadratic");
        // some generator has both embeddings bounded by sqrt(N·ε)
        let (r, s) = self.sqrt_disc_parts(&eps);
        let ub = r + s.abs() * Rat::from_integer(num_integer::Roots::sqrt(&self.disc) + 1u32);
        let bound = n.clone() * ub * Rat::from_integer(Int::from(2));
        let gram = self.trace_gram(&basis);
        let vecs = short_vectors(&gram, &bound).expect("trace form is positive definite");
        for (v, _) in vecs {
            let g = v
                .iter()
                .zip(&basis)
                .fold(self.zero(), |acc, (c, b)| &acc + &b.scale(&rat_int(c)));
            if self.norm(&g).abs() == n {
                return Some(g);
            }
        }
        None
    }

    /// A totally positive generator of `a`, if one exists.
    pub fn totally_positive_generator(&self, a: &FieldIdeal) -> Option<FieldElem> {
        let g = self.is_principal(a)?;
        let mut units = vec![self.one(), -&self.one()];
        if let Ok(e) = self.fundamental_unit() {
            units.push(e.clone());
            units.push(-&e);
        }
        units
            .iter()
            .map(|u| self.mul(&g, u))
            .find(|x| self.is_totally_positive(x))
    }

    pub fn wide_equivalent(&self, a: &FieldIdeal, b: &FieldIdeal) -> bool {
        self.is_principal(&self.ideal_mul(a, &self.ideal_inverse(b)))
            .is_some()
    }

    pub fn narrow_equivalent(&self, a: &FieldIdeal, b: &FieldIdeal) -> bool {
        self.totally_positive_generator(&self.ideal_mul(a, &self.ideal_inverse(b)))
            .is_some()
    }

    /// Index of the narrow class of `a` among `class_groups().narrow_reps`.
    pub fn narrow_class_index(&self, a: &FieldIdeal) -> usize {
        self.class_groups()
            .narrow_reps
            .iter()
            .position(|r| self.narrow_equivalent(a, r))
            .expect("narrow representatives are complete")
    }

    pub fn wide_class_index(&self, a: &FieldIdeal) -> usize {
        self.class_groups()
            .class_reps
            .iter()
            .position(|r| self.wide_equivalent(a, r))
            .expect("class representatives are complete")
    }

    fn minkowski_bound(&self) -> u64 {
        if self.degree == 1 {
            return 1;
        }
        // √disc / 2
        (num_integer::Roots::sqrt(&self.disc) / 2u32 + 1u32)
            .to_u64()
            .unwrap()
    }

    fn class_closure(
        &self,
        gens: &[FieldIdeal],
        reps: &mut Vec<FieldIdeal>,
        equiv: &dyn Fn(&FieldIdeal, &FieldIdeal) -> bool,
    ) {
        let mut i = 0;
        while i < reps.len() {
            for g in gens {
                let c = self.ideal_mul(&reps[i], g);
                if !reps.iter().any(|r| equiv(&c, r)) {
                    reps.push(c);
                }
            }
            i += 1;
        }
    }

    /// Class group, narrow class group and totally positive units.
    pub fn class_groups(&self) -> &ClassGroupData {
        self.classes.get_or_init(|| self.compute_class_groups())
    }

    fn compute_class_groups(&self) -> ClassGroupData {
        if self.degree == 1 {
            return ClassGroupData {
                h: 1,
                class_reps: vec![self.unit_ideal()],
                h_plus: 1,
                narrow_reps: vec![self.unit_ideal()],
                u: 0,
                tp_unit_reps: vec![self.one()],
            };
        }
        let eps = self.fundamental_unit().expect("real quadratic");
        let (u, tp_unit_reps) = if self.norm(&eps).is_one() {
            (1, vec![self.one(), eps.clone()])
        } else {
            (0, vec![self.one()])
        };
        let gens: Vec<FieldIdeal> = self
            .primes_up_to(self.minkowski_bound())
            .into_iter()
            .map(|p| p.ideal)
            .collect();
        let mut class_reps = vec![self.unit_ideal()];
        self.class_closure(&gens, &mut class_reps, &|a, b| self.wide_equivalent(a, b));
        let h = class_reps.len();
        let h_plus = h << u;
        let mut narrow_reps = vec![self.unit_ideal()];
        let mut bound = self.minkowski_bound().max(2);
        let mut ngens: Vec<FieldIdeal> = Vec::new();
        loop {
            let more: Vec<FieldIdeal> = self
                .primes_up_to(bound)
                .into_iter()
                .map(|p| p.ideal)
                .filter(|p| !ngens.contains(p))
                .collect();
            ngens.extend(more);
            self.class_closure(&ngens, &mut narrow_reps, &|a, b| {
                self.narrow_equivalent(a, b)
            });
            if narrow_reps.len() >= h_plus {
                break;
            }
            bound *= 2;
        }
        assert_eq!(narrow_reps.len(), h_plus, "narrow class count");
        ClassGroupData {
            h,
            class_reps,
            h_plus,
            narrow_reps,
            u,
            tp_unit_reps,
        }
    }

    /// `ζ_K(−1)`, exactly.
    pub fn zeta_minus_one(&self) -> Rat {
        if self.degree == 1 {
            return Rat::new(Int::from(-1), Int::from(12));
        }
        let dd = &self.disc;
        let lim = num_integer::Roots::sqrt(dd);
        let mut total = Int::zero();
        let mut b = -lim.clone();
        while b <= lim {
            let b2 = &b * &b;
            if &b2 < dd && (dd - &b).is_even() {
                total += sigma1(&((dd - &b2) / 4u32));
            }
            b += 1u32;
        }
        Rat::new(total, Int::from(60))
    }

    /// Parse `p+q*w` syntax (rationals allowed for p and q).
    pub fn parse_elem(&self, s: &str) -> Result<FieldElem> {
        let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if s.is_empty() {
            return Err(Error::Parse("empty field element".into()));
        }
        let mut terms: Vec<String> = Vec::new();
        let mut cur = String::new();
        for (i, ch) in s.chars().enumerate() {
            if (ch == '+' || ch == '-') && i > 0 && !cur.ends_with('*') && !cur.ends_with('/') {
                terms.push(std::mem::take(&mut cur));
            }
            cur.push(ch);
        }
        terms.push(cur);
        let mut a = Rat::zero();
        let mut b = Rat::zero();
        for t in terms {
            let (neg, body) = match t.strip_prefix('-') {
                Some(r) => (true, r.to_string()),
                None => (false, t.trim_start_matches('+').to_string()),
            };
            let (coef, is_w) = if body == "w" {
                (Rat::one(), true)
            } else if let Some(c) = body.strip_suffix("*w") {
                (parse_rat(c)?, true)
            } else {
                (parse_rat(&body)?, false)
            };
            let coef = if neg { -coef } else { coef };
            if is_w {
                b += coef;
            } else {
                a += coef;
            }
        }
        if self.degree == 1 && !b.is_zero() {
            return Err(Error::Parse(format!("'{s}' uses w over the rationals")));
        }
        Ok(if self.degree == 1 {
            FieldElem(vec![a])
        } else {
            FieldElem(vec![a, b])
        })
    }
}

pub fn parse_rat(s: &str) -> Result<Rat> {
    let bad = || Error::Parse(format!("bad rational '{s}'"));
    match s.split_once('/') {
        Some((n, d)) => {
            let n: Int = n.parse().map_err(|_| bad())?;
            let d: Int = d.parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            Ok(Rat::new(n, d))
        }
        None => s.parse::<Int>().map(Rat::from_integer).map_err(|_| bad()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::rat;

    fn q15() -> BaseField {
        make_field(FieldSpec::RealQuadratic(15)).unwrap()
    }

    #[test]
    fn make_field_examples() {
        let q = make_field(FieldSpec::Rationals).unwrap();
        assert_eq!(q.degree(), 1);
        assert_eq!(q.discriminant(), &Int::from(1));
        let k = q15();
        assert_eq!(k.discriminant(), &Int::from(60));
        assert_eq!(
            make_field(FieldSpec::RealQuadratic(5))
                .unwrap()
                .discriminant(),
            &Int::from(5)
        );
        assert_eq!(
            make_field(FieldSpec::RealQuadratic(12)),
            Err(Error::NotSquarefree(12))
        );
        assert_eq!(
            make_field(FieldSpec::RealQuadratic(1)),
            Err(Error::BadDiscriminant(1))
        );
    }

    /// Continued fraction of √d by the textbook recurrence, returning the
    /// first convergent solving Pell's equation x² − d·y² = ±1.
    fn pell_oracle(d: i64) -> (i64, i64) {
        let a0 = (d as f64).sqrt() as i64;
        let (mut m, mut den, mut a) = (0i64, 1i64, a0);
        let (mut p0, mut p1) = (1i64, a0);
        let (mut q0, mut q1) = (0i64, 1i64);
        loop {
            if (p1 * p1 - d * q1 * q1).abs() == 1 {
                return (p1, q1);
            }
            m = den * a - m;
            den = (d - m * m) / den;
            a = (a0 + m) / den;
            let p2 = a * p1 + p0;
            let q2 = a * q1 + q0;
            p0 = p1;
            p1 = p2;
            q0 = q1;
            q1 = q2;
        }
    }

    #[test]
    fn fundamental_units() {
        let k = q15();
        assert_eq!(k.fundamental_unit().unwrap(), k.elem(rat(4, 1), rat(1, 1)));
        let k2 = make_field(FieldSpec::RealQuadratic(2)).unwrap();
        let (x, y) = pell_oracle(2);
        assert_eq!(
            k2.fundamental_unit().unwrap(),
            k2.elem(rat(x, 1), rat(y, 1))
        );
        let k5 = make_field(FieldSpec::RealQuadratic(5)).unwrap();
        assert_eq!(
            k5.fundamental_unit().unwrap(),
            k5.elem(rat(0, 1), rat(1, 1))
        );
        for d in [3i64, 6, 7, 11, 19, 22, 23, 31, 43, 46] {
            let k = make_field(FieldSpec::RealQuadratic(d)).unwrap();
            let (x, y) = pell_oracle(d);
            assert_eq!(
                k.fundamental_unit().unwrap(),
                k.elem(rat(x, 1), rat(y, 1)),
                "d = {d}"
            );
        }
        // d ≡ 1 (mod 4): the Pell unit is the fundamental unit or its cube
        for d in [13i64, 17, 21, 29, 37, 41] {
            let k = make_field(FieldSpec::RealQuadratic(d)).unwrap();
            let e = k.fundamental_unit().unwrap();
            let (x, y) = pell_oracle(d);
            let pell = k.elem(rat(x - y, 1), rat(2 * y, 1));
            assert!(e == pell || k.pow(&e, 3) == pell, "d = {d}");
        }
        assert_eq!(
            make_field(FieldSpec::Rationals).unwrap().fundamental_unit(),
            Err(Error::NoFundamentalUnit)
        );
    }

    #[test]
    fn class_groups_examples() {
        let q = make_field(FieldSpec::Rationals).unwrap();
        let c = q.class_groups();
        assert_eq!((c.h, c.h_plus, c.u), (1, 1, 0));
        let k = q15();
        let c = k.class_groups();
        assert_eq!((c.h, c.h_plus, c.u), (2, 4, 1));
        assert_eq!(c.tp_unit_reps.len(), 2);
        let p3 = k.primes_above(&Int::from(3))[0].ideal.clone();
        let p5 = k.primes_above(&Int::from(5))[0].ideal.clone();
        let p15 = k.ideal_mul(&p3, &p5);
        let reps = [k.unit_ideal(), p3, p5, p15];
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(k.narrow_equivalent(&reps[i], &reps[j]), i == j);
            }
        }
        let k2 = make_field(FieldSpec::RealQuadratic(2)).unwrap();
        let c = k2.class_groups();
        assert_eq!((c.h, c.h_plus, c.u), (1, 1, 0));
        // N(1+√2) = −1 kills the narrow quotient
        assert_eq!(k2.norm(&k2.fundamental_unit().unwrap()), rat(-1, 1));
    }

    #[test]
    fn ideal_arithmetic_examples() {
        let k = q15();
        let p3 = k.primes_above(&Int::from(3))[0].ideal.clone();
        let p5 = k.primes_above(&Int::from(5))[0].ideal.clone();
        let sqrt15 = k.elem(rat(0, 1), rat(1, 1));
        assert_eq!(k.ideal_mul(&p3, &p5), k.principal_ideal(&sqrt15));
        let q = make_field(FieldSpec::Rationals).unwrap();
        let six = q.principal_ideal(&q.from_int(6));
        assert_eq!(q.ideal_mul(&six, &q.ideal_inverse(&six)), q.unit_ideal());
        let two = k.principal_ideal(&k.from_int(2));
        let f = k.factor_ideal(&two).unwrap();
        assert_eq!(f.len(), 1);
        assert_eq!(f[0].1, 2);
        assert_eq!(f[0].0.e, 2);
        // ramification oracle: x² ≡ 15 (mod 4) has the double root 1 mod 2
        assert!(
            (0..2)
                .filter(|x| (x * x - 15i64).rem_euclid(2) == 0)
                .count()
                == 1
        );
    }

    #[test]
    fn principality_examples() {
        let k = q15();
        assert_eq!(
            k.is_principal(&k.unit_ideal()).map(|g| k.norm(&g).abs()),
            Some(rat(1, 1))
        );
        let sqrt15 = k.elem(rat(0, 1), rat(1, 1));
        let g = k.is_principal(&k.principal_ideal(&sqrt15)).unwrap();
        assert_eq!(k.principal_ideal(&g), k.principal_ideal(&sqrt15));
        assert!(k
            .totally_positive_generator(&k.principal_ideal(&sqrt15))
            .is_none());
        let p3 = k.primes_above(&Int::from(3))[0].ideal.clone();
        assert!(k.is_principal(&p3).is_none());
        assert_eq!(k.totally_positive_generator(&k.unit_ideal()), Some(k.one()));
    }

    #[test]
    fn zeta_values() {
        assert_eq!(
            make_field(FieldSpec::Rationals).unwrap().zeta_minus_one(),
            rat(-1, 12)
        );
        assert_eq!(q15().zeta_minus_one(), rat(2, 1));
        assert_eq!(
            make_field(FieldSpec::RealQuadratic(5))
                .unwrap()
                .zeta_minus_one(),
            rat(1, 30)
        );
    }

    #[test]
    fn signs_and_squares() {
        let k = q15();
        let e = k.fundamental_unit().unwrap();
        assert!(k.is_totally_positive(&e));
        let s = k.elem(rat(0, 1), rat(1, 1));
        assert_eq!(k.sign(&s, 0), Ordering::Greater);
        assert_eq!(k.sign(&s, 1), Ordering::Less);
        let x = k.elem(rat(3, 2), rat(-5, 7));
        assert_eq!(
            k.sqrt(&k.mul(&x, &x)).map(|y| k.mul(&y, &y)),
            Some(k.mul(&x, &x))
        );
        assert!(!k.is_square(&e));
        assert!(k.is_square(&k.from_int(60)));
        assert!(!k.is_square(&k.from_int(6)));
        assert!(k.is_square(&k.mul(&s, &s)));
        assert_eq!(k.unit_square_class(&k.mul(&e, &k.from_int(9))), Some(1));
    }

    proptest::proptest! {
        #[test]
        fn parse_render_round_trip(a in -50i64..50, b in 1i64..9, c in -50i64..50, d in 1i64..9) {
            let k = q15();
            let x = k.elem(rat(a, b), rat(c, d));
            let y = k.parse_elem(&x.to_string()).unwrap();
            proptest::prop_assert_eq!(x, y);
        }

        #[test]
        fn ideal_laws(a in -6i64..6, b in -6i64..6, c in -6i64..6, d in -6i64..6) {
            proptest::prop_assume!((a, b) != (0, 0) && (c, d) != (0, 0));
            let k = q15();
            let i = k.ideal(&[k.elem(rat(a, 1), rat(b, 1)), k.from_int(6)]).unwrap();
            let j = k.ideal(&[k.elem(rat(c, 1), rat(d, 1)), k.from_int(10)]).unwrap();
            let ij = k.ideal_mul(&i, &j);
            proptest::prop_assert_eq!(&ij, &k.ideal_mul(&j, &i));
            proptest::prop_assert_eq!(k.ideal_mul(&i, &k.ideal_inverse(&i)), k.unit_ideal());
            proptest::prop_assert_eq!(ij.norm(), i.norm() * j.norm());
            let f = k.factor_ideal(&ij).unwrap();
            let back = f.iter().fold(k.unit_ideal(), |acc, (p, e)| k.ideal_mul(&acc, &k.ideal_pow(&p.ideal, *e)));
            proptest::prop_assert_eq!(back, ij.clone());
            if let Some(g) = k.is_principal(&ij) {
                proptest::prop_assert_eq!(k.principal_ideal(&g), ij);
            }
        }

        #[test]
        fn quotients_factor(a in 1i64..40, b in -20i64..20, c in 1i64..40, d in -20i64..20) {
            let k = make_field(FieldSpec::RealQuadratic(5)).unwrap();
            let x = k.principal_ideal(&k.elem(rat(a, 1), rat(b, 1)));
            let y = k.principal_ideal(&k.elem(rat(c, 1), rat(d, 1)));
            let q = k.ideal_mul(&x, &k.ideal_inverse(&y));
            let f = k.factor_ideal(&q).unwrap();
            let back = f.iter().fold(k.unit_ideal(), |acc, (p, e)| k.ideal_mul(&acc, &k.ideal_pow(&p.ideal, *e)));
            proptest::prop_assert_eq!(back, q);
        }

        #[test]
        fn rational_inverse(n in 1i64..1000, d in 1i64..1000) {
            let k = make_field(FieldSpec::Rationals).unwrap();
            let x = k.from_rat(rat(n, d));
            proptest::prop_assert_eq!(k.mul(&x, &k.inv(&x)), k.one());
        }
    }
}
