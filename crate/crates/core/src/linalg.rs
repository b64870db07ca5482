//! Exact integer and rational linear algebra.
//!
//! [`ZLattice`] is the workhorse: a full-rank Z-lattice in Q^m stored as a
//! lower-triangular Hermite normal form over a single positive denominator.
//! Both fractional ideals of the base field (m = 1, 2) and lattices in the
//! quaternion algebra (m = 4, 8) use it.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

pub type Int = BigInt;
pub type Rat = BigRational;

pub fn int(v: i64) -> Int {
    Int::from(v)
}

pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(Int::from(n), Int::from(d))
}

pub fn rat_int(v: &Int) -> Rat {
    Rat::from_integer(v.clone())
}

/// Extended gcd with a non-negative gcd: `a*x + b*y = g`.
pub fn egcd(a: &Int, b: &Int) -> (Int, Int, Int) {
    let (mut old_r, mut r) = (a.clone(), b.clone());
    let (mut old_s, mut s) = (Int::one(), Int::zero());
    let (mut old_t, mut t) = (Int::zero(), Int::one());
    while !r.is_zero() {
        let q = old_r.div_floor(&r);
        let nr = &old_r - &q * &r;
        old_r = std::mem::replace(&mut r, nr);
        let ns = &old_s - &q * &s;
        old_s = std::mem::replace(&mut s, ns);
        let nt = &old_t - &q * &t;
        old_t = std::mem::replace(&mut t, nt);
    }
    if old_r.is_negative() {
        (-old_r, -old_s, -old_t)
    } else {
        (old_r, old_s, old_t)
    }
}

/// Least common multiple of the denominators of a slice of rationals.
pub fn common_denominator<'a, I: IntoIterator<Item = &'a Rat>>(vals: I) -> Int {
    vals.into_iter()
        .fold(Int::one(), |acc, v| acc.lcm(v.denom()))
}

/// Symmetric residue of `a` modulo `m > 0`, in `(-m/2, m/2]`.
fn sym_mod(a: &Int, m: &Int) -> Int {
    let r = a.mod_floor(m);
    if &r * 2 > *m {
        r - m
    } else {
        r
    }
}

/// Row-by-row insertion into a lower-triangular echelon basis.
///
/// `basis[c]` holds the row whose last non-zero entry sits in column `c`.
struct Echelon {
    basis: Vec<Option<Vec<Int>>>,
    modulus: Option<Int>,
}

impl Echelon {
    fn new(m: usize) -> Self {
        Echelon {
            basis: vec![None; m],
            modulus: None,
        }
    }

    fn reduce_mod(&self, v: &mut [Int]) {
        if let Some(m) = &self.modulus {
            for x in v.iter_mut() {
                *x = sym_mod(x, m);
            }
        }
    }

    fn insert(&mut self, mut v: Vec<Int>) {
        self.reduce_mod(&mut v);
        for c in (0..v.len()).rev() {
            if v[c].is_zero() {
                continue;
            }
            match self.basis[c].take() {
                None => {
                    if v[c].is_negative() {
                        v.iter_mut().for_each(|x| *x = -x.clone());
                    }
                    self.basis[c] = Some(v);
                    self.refresh_modulus();
                    return;
                }
                Some(b) => {
                    let (g, x, y) = egcd(&b[c], &v[c]);
                    let bq = &b[c] / &g;
                    let vq = &v[c] / &g;
                    let mut nb: Vec<Int> = b.iter().zip(&v).map(|(p, q)| &x * p + &y * q).collect();
                    let mut nv: Vec<Int> =
                        v.iter().zip(&b).map(|(q, p)| &bq * q - &vq * p).collect();
                    // the new pivot is g > 0; keep pivot untouched when reducing
                    if let Some(m) = &self.modulus {
                        for (k, e) in nb.iter_mut().enumerate() {
                            if k != c {
                                *e = sym_mod(e, m);
                            }
                        }
                    }
                    self.reduce_mod(&mut nv);
                    self.basis[c] = Some(nb);
                    self.refresh_modulus();
                    v = nv;
                }
            }
        }
    }

    fn refresh_modulus(&mut self) {
        if self.basis.iter().all(|b| b.is_some()) {
            let d = self
                .basis
                .iter()
                .enumerate()
                .fold(Int::one(), |acc, (c, b)| acc * &b.as_ref().unwrap()[c]);
            self.modulus = Some(d.abs());
        }
    }

    fn finish(self) -> Option<Vec<Vec<Int>>> {
        let mut rows: Vec<Vec<Int>> = self.basis.into_iter().collect::<Option<Vec<_>>>()?;
        let m = rows.len();
        for c in (0..m).rev() {
            let piv = rows[c][c].clone();
            for r in c + 1..m {
                let q = rows[r][c].div_floor(&piv);
                if !q.is_zero() {
                    let (lo, hi) = rows.split_at_mut(r);
                    for (e, p) in hi[0].iter_mut().zip(&lo[c]) {
                        *e -= &q * p;
                    }
                }
            }
        }
        Some(rows)
    }
}

/// Full-rank lattice `(1/den) * rowspan(rows)` in canonical form.
///
/// `rows` is a lower-triangular Hermite normal form with positive diagonal and
/// entries below each pivot reduced into `[0, pivot)`; `den` is the least
/// positive integer with `den * L ⊆ Z^m`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ZLattice {
    den: Int,
    rows: Vec<Vec<Int>>,
}

impl ZLattice {
    /// Lattice spanned by `(1/den) * gens`; errors if the span is not of full rank `m`.
    pub fn from_int_rows(m: usize, gens: &[Vec<Int>], den: &Int) -> Result<Self> {
        let mut ech = Echelon::new(m);
        for g in gens {
            debug_assert_eq!(g.len(), m);
            if g.iter().any(|x| !x.is_zero()) {
                ech.insert(g.clone());
            }
        }
        let rows = ech.finish().ok_or(Error::RankDeficient)?;
        Ok(Self::canonical(rows, den.clone()))
    }

    pub fn from_rat_rows(m: usize, gens: &[Vec<Rat>]) -> Result<Self> {
        let den = common_denominator(gens.iter().flatten());
        let ints: Vec<Vec<Int>> = gens
            .iter()
            .map(|g| g.iter().map(|x| (x * rat_int(&den)).to_integer()).collect())
            .collect();
        Self::from_int_rows(m, &ints, &den)
    }

    fn canonical(mut rows: Vec<Vec<Int>>, den: Int) -> Self {
        let g = rows.iter().flatten().fold(Int::zero(), |acc, x| acc.gcd(x));
        let scale = Rat::new(g.clone(), den);
        let (p, q) = (scale.numer().clone(), scale.denom().clone());
        for row in rows.iter_mut() {
            for x in row.iter_mut() {
                *x = &*x / &g * &p;
            }
        }
        ZLattice { den: q, rows }
    }

    pub fn identity(m: usize) -> Self {
        let rows = (0..m)
            .map(|i| {
                (0..m)
                    .map(|j| if i == j { Int::one() } else { Int::zero() })
                    .collect()
            })
            .collect();
        ZLattice {
            den: Int::one(),
            rows,
        }
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn den(&self) -> &Int {
        &self.den
    }

    pub fn int_rows(&self) -> &[Vec<Int>] {
        &self.rows
    }

    pub fn basis(&self) -> Vec<Vec<Rat>> {
        let d = rat_int(&self.den);
        self.rows
            .iter()
            .map(|r| r.iter().map(|x| rat_int(x) / &d).collect())
            .collect()
    }

    /// Index-style volume: `det(basis)` as a positive rational.
    pub fn covolume(&self) -> Rat {
        let diag = (0..self.dim()).fold(Int::one(), |acc, i| acc * &self.rows[i][i]);
        Rat::new(diag, num_traits::pow(self.den.clone(), self.dim()))
    }

    /// Coordinates of `v` with respect to the HNF basis (rational in general).
    pub fn coordinates(&self, v: &[Rat]) -> Vec<Rat> {
        let m = self.dim();
        let d = rat_int(&self.den);
        let mut rest: Vec<Rat> = v.iter().map(|x| x * &d).collect();
        let mut coords = vec![Rat::zero(); m];
        for c in (0..m).rev() {
            let k = &rest[c] / rat_int(&self.rows[c][c]);
            if !k.is_zero() {
                for (r, e) in rest.iter_mut().zip(&self.rows[c]) {
                    *r -= &k * rat_int(e);
                }
            }
            coords[c] = k;
        }
        coords
    }

    pub fn contains(&self, v: &[Rat]) -> bool {
        self.coordinates(v).iter().all(|c| c.is_integer())
    }

    pub fn is_sublattice_of(&self, other: &ZLattice) -> bool {
        self.basis().iter().all(|b| other.contains(b))
    }

    pub fn sum(&self, other: &ZLattice) -> ZLattice {
        let mut gens = self.basis();
        gens.extend(other.basis());
        ZLattice::from_rat_rows(self.dim(), &gens).expect("sum of full-rank lattices")
    }

    pub fn scale(&self, r: &Rat) -> ZLattice {
        assert!(!r.is_zero());
        let gens: Vec<Vec<Rat>> = self
            .basis()
            .into_iter()
            .map(|b| b.iter().map(|x| x * r).collect())
            .collect();
        ZLattice::from_rat_rows(self.dim(), &gens).expect("scaling keeps full rank")
    }

    /// Basis of `L ∩ span(e_0, …, e_{k-1})`; uses the lower-triangular shape.
    pub fn leading_part(&self, k: usize) -> Vec<Vec<Rat>> {
        let d = rat_int(&self.den);
        self.rows[..k]
            .iter()
            .map(|r| r[..k].iter().map(|x| rat_int(x) / &d).collect())
            .collect()
    }

    /// Dual lattice `{x : x·y ∈ Z for all y ∈ L}` for the standard dot product.
    pub fn dual(&self) -> ZLattice {
        let b = self.basis();
        let inv = mat_inverse(&b).expect("full-rank lattice basis is invertible");
        let t = transpose(&inv);
        ZLattice::from_rat_rows(self.dim(), &t).expect("dual is full rank")
    }

    /// Box sizes `d_i` such that `Σ c_i b_i` with `0 ≤ c_i < d_i` runs over a
    /// transversal of `self / sub`, `b_i` the basis of `self`.
    pub fn residue_box(&self, sub: &ZLattice) -> Vec<usize> {
        let rel: Vec<Vec<Rat>> = sub.basis().iter().map(|v| self.coordinates(v)).collect();
        let rel_l = ZLattice::from_rat_rows(self.dim(), &rel).expect("sublattice of full rank");
        assert!(rel_l.den.is_one(), "residues: not a sublattice");
        (0..self.dim())
            .map(|i| usize::try_from(&rel_l.rows[i][i]).expect("small index"))
            .collect()
    }

    /// A transversal of `self / sub` (requires `sub ⊆ self`), as rational vectors.
    pub fn residues(&self, sub: &ZLattice) -> Vec<Vec<Rat>> {
        let basis = self.basis();
        let diag = self.residue_box(sub);
        let mut out = Vec::new();
        let mut c = vec![0usize; diag.len()];
        loop {
            let v: Vec<Rat> = (0..self.dim())
                .map(|k| {
                    c.iter().zip(&basis).fold(Rat::zero(), |acc, (ci, b)| {
                        acc + &b[k] * Rat::from_integer(Int::from(*ci))
                    })
                })
                .collect();
            out.push(v);
            let mut i = 0;
            loop {
                if i == c.len() {
                    return out;
                }
                c[i] += 1;
                if c[i] < diag[i] {
                    break;
                }
                c[i] = 0;
                i += 1;
            }
        }
    }
}

pub fn transpose(m: &[Vec<Rat>]) -> Vec<Vec<Rat>> {
    if m.is_empty() {
        return vec![];
    }
    (0..m[0].len())
        .map(|j| m.iter().map(|r| r[j].clone()).collect())
        .collect()
}

pub fn mat_mul(a: &[Vec<Rat>], b: &[Vec<Rat>]) -> Vec<Vec<Rat>> {
    let n = b.first().map_or(0, |r| r.len());
    a.iter()
        .map(|row| {
            (0..n)
                .map(|j| {
                    row.iter()
                        .zip(b)
                        .filter(|(x, _)| !x.is_zero())
                        .fold(Rat::zero(), |acc, (x, br)| acc + x * &br[j])
                })
                .collect()
        })
        .collect()
}

/// Gauss–Jordan inverse of a square rational matrix.
pub fn mat_inverse(m: &[Vec<Rat>]) -> Option<Vec<Vec<Rat>>> {
    let n = m.len();
    let mut a: Vec<Vec<Rat>> = m
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut row = r.clone();
            row.extend((0..n).map(|j| if i == j { Rat::one() } else { Rat::zero() }));
            row
        })
        .collect();
    for col in 0..n {
        let piv = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, piv);
        let p = a[col][col].clone();
        for x in a[col].iter_mut() {
            *x = &*x / &p;
        }
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let f = a[r][col].clone();
                let (src, dst) = if r < col {
                    let (lo, hi) = a.split_at_mut(col);
                    (&hi[0], &mut lo[r])
                } else {
                    let (lo, hi) = a.split_at_mut(r);
                    (&lo[col], &mut hi[0])
                };
                for (d, s) in dst.iter_mut().zip(src.iter()) {
                    *d -= &f * s;
                }
            }
        }
    }
    Some(a.into_iter().map(|r| r[n..].to_vec()).collect())
}

pub fn determinant(m: &[Vec<Rat>]) -> Rat {
    let n = m.len();
    let mut a = m.to_vec();
    let mut det = Rat::one();
    for col in 0..n {
        let Some(piv) = (col..n).find(|&r| !a[r][col].is_zero()) else {
            return Rat::zero();
        };
        if piv != col {
            a.swap(col, piv);
            det = -det;
        }
        let p = a[col][col].clone();
        det *= &p;
        for r in col + 1..n {
            if !a[r][col].is_zero() {
                let f = &a[r][col] / &p;
                let (lo, hi) = a.split_at_mut(r);
                for (d, s) in hi[0].iter_mut().zip(&lo[col]) {
                    *d -= &f * s;
                }
            }
        }
    }
    det
}

/// Integer square root if `n` is a perfect square.
pub fn exact_isqrt(n: &Int) -> Option<Int> {
    if n.is_negative() {
        return None;
    }
    let r = num_integer::Roots::sqrt(n);
    (&r * &r == *n).then_some(r)
}

/// Square root of a non-negative rational if it is a rational square.
pub fn rat_sqrt(q: &Rat) -> Option<Rat> {
    Some(Rat::new(exact_isqrt(q.numer())?, exact_isqrt(q.denom())?))
}

/// Factorisation of a positive integer by trial division.
pub fn factor_int(n: &Int) -> Vec<(Int, u32)> {
    let mut n = n.abs();
    let mut out = Vec::new();
    let mut p = Int::from(2);
    while &p * &p <= n {
        let mut e = 0;
        while (&n % &p).is_zero() {
            n /= &p;
            e += 1;
        }
        if e > 0 {
            out.push((p.clone(), e));
        }
        p += 1;
    }
    if n > Int::one() {
        out.push((n, 1));
    }
    out
}
