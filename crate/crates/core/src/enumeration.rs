//! Short vectors of positive definite forms, and the minimum-based tests
//! built on them: principality of normal ideals, unit groups of orders and
//! norm equations.

use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::field::{FieldElem, FieldIdeal};
use crate::lattice::{ideal_times_lattice, QuatLattice};
use crate::linalg::{common_denominator, rat, rat_int, Int, Rat};
use crate::quat::{QuatAlgebra, QuatElem};

/// Gram–Schmidt data `(μ, B)` of a Gram matrix, or `None` if it is not
/// positive definite.
fn gso(g: &[Vec<Rat>]) -> Option<(Vec<Vec<Rat>>, Vec<Rat>)> {
    let n = g.len();
    let mut mu = vec![vec![Rat::zero(); n]; n];
    let mut r = vec![vec![Rat::zero(); n]; n];
    let mut b = vec![Rat::zero(); n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = g[i][j].clone();
            for k in 0..j {
                s -= &mu[j][k] * &r[i][k];
            }
            r[i][j] = s.clone();
            if j < i {
                mu[i][j] = s / &b[j];
            } else {
                if !s.is_positive() {
                    return None;
                }
                b[i] = s;
                mu[i][i] = Rat::one();
            }
        }
    }
    Some((mu, b))
}

fn round_rat(x: &Rat) -> Int {
    (x + rat(1, 2)).floor().to_integer()
}

type Reduced = (Vec<Vec<Rat>>, Vec<Vec<Int>>);

/// LLL-reduce a Gram matrix. Returns the reduced Gram and the transform
/// whose rows express the reduced basis in the input basis.
#[allow(clippy::needless_range_loop)]
fn lll(g: &[Vec<Rat>]) -> Result<Reduced> {
    let n = g.len();
    let mut g = g.to_vec();
    let mut t: Vec<Vec<Int>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { Int::one() } else { Int::zero() })
                .collect()
        })
        .collect();
    let delta = rat(3, 4);
    let (mut mu, mut b) = gso(&g).ok_or(Error::NotPositiveDefinite)?;
    let mut k = 1;
    while k < n {
        for j in (0..k).rev() {
            let r = round_rat(&mu[k][j]);
            if r.is_zero() {
                continue;
            }
            let rr = rat_int(&r);
            for l in 0..n {
                let v = &g[j][l] * &rr;
                g[k][l] -= v;
            }
            for l in 0..n {
                let v = &g[l][j] * &rr;
                g[l][k] -= v;
            }
            for l in 0..n {
                let v = &t[j][l] * &r;
                t[k][l] -= v;
            }
            for l in 0..j {
                let v = &mu[j][l] * &rr;
                mu[k][l] -= v;
            }
            mu[k][j] -= &rr;
        }
        let lhs = b[k].clone();
        let rhs = (&delta - &mu[k][k - 1] * &mu[k][k - 1]) * &b[k - 1];
        if lhs >= rhs {
            k += 1;
        } else {
            g.swap(k, k - 1);
            for row in g.iter_mut() {
                row.swap(k, k - 1);
            }
            t.swap(k, k - 1);
            let (m, bb) = gso(&g).ok_or(Error::NotPositiveDefinite)?;
            mu = m;
            b = bb;
            k = (k - 1).max(1);
        }
    }
    Ok((g, t))
}

/// Calls `f` on every nonzero `v` (one of each pair `±v`) with
/// `vᵀ G v ≤ bound`, passing the exact value. Enumeration stops as soon as
/// `f` returns `false`; the return value reports whether it ran to the end.
pub fn for_each_short_vector<F>(gram: &[Vec<Rat>], bound: &Rat, mut f: F) -> Result<bool>
where
    F: FnMut(&[Int], &Rat) -> bool,
{
    let n = gram.len();
    if n == 0 || bound.is_negative() {
        return Ok(true);
    }
    let (g, t) = lll(gram)?;
    let (mu, b) = gso(&g).ok_or(Error::NotPositiveDefinite)?;
    let den = common_denominator(g.iter().flatten());
    let gi: Vec<Vec<Int>> = g
        .iter()
        .map(|r| r.iter().map(|x| (x * rat_int(&den)).to_integer()).collect())
        .collect();
    let bound_scaled = bound * rat_int(&den);
    let muf: Vec<Vec<f64>> = mu
        .iter()
        .map(|r| r.iter().map(|x| x.to_f64().unwrap()).collect())
        .collect();
    let bf: Vec<f64> = b.iter().map(|x| x.to_f64().unwrap()).collect();
    let cf = bound.to_f64().unwrap() * (1.0 + 1e-9) + 1e-9;

    let mut x = vec![0i64; n];
    let mut v = vec![Int::zero(); n];
    let mut stack_rem = vec![0f64; n + 1];
    let mut center = vec![0f64; n];
    let mut upper = vec![0i64; n];
    stack_rem[n] = cf;

    // explicit-stack Schnorr–Euchner style walk with a plain increasing order
    let mut i = n - 1;
    let init_level =
        |i: usize, x: &[i64], rem: f64, center: &mut [f64], upper: &mut [i64]| -> i64 {
            let c: f64 = -(i + 1..n).map(|j| muf[j][i] * x[j] as f64).sum::<f64>();
            center[i] = c;
            let r = (rem.max(0.0) / bf[i]).sqrt();
            let mut lo = (c - r - 1e-9).ceil() as i64;
            let hi = (c + r + 1e-9).floor() as i64;
            if x[i + 1..].iter().all(|&y| y == 0) {
                lo = lo.max(0);
            }
            upper[i] = hi;
            lo
        };
    x[i] = init_level(i, &x, stack_rem[n], &mut center, &mut upper);
    loop {
        if x[i] > upper[i] {
            if i == n - 1 {
                return Ok(true);
            }
            i += 1;
            x[i] += 1;
            continue;
        }
        let d = x[i] as f64 - center[i];
        let rem = stack_rem[i + 1] - bf[i] * d * d;
        if rem < -1e-9 * cf.max(1.0) {
            x[i] += 1;
            continue;
        }
        if i > 0 {
            stack_rem[i] = rem;
            i -= 1;
            x[i] = init_level(i, &x, rem, &mut center, &mut upper);
            continue;
        }
        if x.iter().any(|&c| c != 0) {
            let xi: Vec<Int> = x.iter().map(|&c| Int::from(c)).collect();
            let mut val = Int::zero();
            for a in 0..n {
                if xi[a].is_zero() {
                    continue;
                }
                let row: Int = (0..n).map(|c| &gi[a][c] * &xi[c]).sum();
                val += &xi[a] * row;
            }
            let val = Rat::from_integer(val);
            if val <= bound_scaled {
                for (c, vc) in v.iter_mut().enumerate() {
                    *vc = (0..n).map(|r| &xi[r] * &t[r][c]).sum();
                }
                if v.iter()
                    .find(|c| !c.is_zero())
                    .is_some_and(|c| c.is_negative())
                {
                    for vc in v.iter_mut() {
                        *vc = -&*vc;
                    }
                }
                if !f(&v, &(val / rat_int(&den))) {
                    return Ok(false);
                }
            }
        }
        x[0] += 1;
    }
}

/// All nonzero vectors up to sign with `vᵀ G v ≤ bound`, sorted by value and
/// then lexicographically. The first nonzero coordinate is positive.
pub fn short_vectors(gram: &[Vec<Rat>], bound: &Rat) -> Result<Vec<(Vec<Int>, Rat)>> {
    let mut out = Vec::new();
    for_each_short_vector(gram, bound, |v, val| {
        out.push((v.to_vec(), val.clone()));
        true
    })?;
    out.sort_by(|a, b| a.1.cmp(&b.1).then_with(|| a.0.cmp(&b.0)));
    Ok(out)
}

/// Minimum of a positive definite Gram matrix.
pub fn minimum(gram: &[Vec<Rat>]) -> Result<Rat> {
    let (g, _) = lll(gram)?;
    let upper = (0..g.len())
        .map(|i| g[i][i].clone())
        .min()
        .expect("nonempty");
    let sv = short_vectors(gram, &upper)?;
    Ok(sv[0].1.clone())
}

/// Gram matrix of `x ↦ Tr_{K/Q}(w·n(x))` on the basis of `l`.
pub fn trace_gram(alg: &QuatAlgebra, l: &QuatLattice, w: &FieldElem) -> Result<Vec<Vec<Rat>>> {
    let k = alg.field();
    if !k.is_totally_positive(w) {
        return Err(Error::NotTotallyPositive(w.to_string()));
    }
    Ok(gram_on(alg, &l.basis(alg), w))
}

pub(crate) fn gram_on(alg: &QuatAlgebra, basis: &[QuatElem], w: &FieldElem) -> Vec<Vec<Rat>> {
    let k = alg.field();
    let half = rat(1, 2);
    let m = basis.len();
    let conjs: Vec<QuatElem> = basis.iter().map(|b| alg.conj(b)).collect();
    let mut g = vec![vec![Rat::zero(); m]; m];
    for i in 0..m {
        for j in i..m {
            let t = alg.reduced_trace(&alg.mul(&basis[i], &conjs[j]));
            let v = k.trace(&k.mul(w, &t)) * &half;
            g[i][j] = v.clone();
            g[j][i] = v;
        }
    }
    g
}

fn combine(alg: &QuatAlgebra, basis: &[QuatElem], coeffs: &[Int]) -> QuatElem {
    coeffs
        .iter()
        .zip(basis)
        .filter(|(c, _)| !c.is_zero())
        .fold(alg.zero(), |acc, (c, b)| {
            alg.add(&acc, &alg.scale(b, &rat_int(c)))
        })
}

/// Elements `x` of `l` with `w·n(x)` a unit, found as the vectors of
/// `Tr(w·n(x)) = [K:Q]`; `f` is called on each (up to sign).
fn for_each_weighted_unit<F>(
    alg: &QuatAlgebra,
    l: &QuatLattice,
    w: &FieldElem,
    mut f: F,
) -> Result<bool>
where
    F: FnMut(QuatElem) -> bool,
{
    let basis = l.basis(alg);
    let gram = gram_on(alg, &basis, w);
    let deg = rat(alg.field().degree() as i64, 1);
    let k = alg.field();
    for_each_short_vector(&gram, &deg, |v, val| {
        if *val != deg {
            return true;
        }
        let x = combine(alg, &basis, v);
        if k.mul(w, &alg.reduced_norm(&x)) == k.one() {
            f(x)
        } else {
            true
        }
    })
}

/// A generator `α` with `J = α·O_r(J)`, if `J` is left principal.
pub fn is_left_principal(alg: &QuatAlgebra, j: &QuatLattice) -> Option<QuatElem> {
    let k = alg.field();
    let nj = j.norm(alg);
    let w = k.totally_positive_generator(&k.ideal_inverse(&nj))?;
    for u in k.tp_unit_reps() {
        let uw = k.mul(&u, &w);
        let mut found = None;
        for_each_weighted_unit(alg, j, &uw, |x| {
            found = Some(x);
            false
        })
        .expect("trace form of a lattice is positive definite");
        if found.is_some() {
            return found;
        }
    }
    None
}

#[derive(Clone, Debug)]
pub struct UnitData {
    /// `|M^(1) / {±1}|`
    pub norm_one_mod_pm1: usize,
    /// `[M^* : Z_K^*]`
    pub unit_index: usize,
    /// Representatives of `n(M^*)/(Z_K^*)²`, as indices into the totally
    /// positive unit representatives of the base field.
    pub norm_image: Vec<usize>,
    pub x: u32,
    /// Representatives of `M^* / Z_K^*` (one per coset, first is `1`).
    pub unit_reps: Vec<QuatElem>,
    /// `M^(1)` up to sign.
    pub norm_one: Vec<QuatElem>,
}

/// Unit group data of an order.
pub fn unit_data(alg: &QuatAlgebra, m: &QuatLattice) -> UnitData {
    let k = alg.field();
    let reps = k.tp_unit_reps();
    let mut norm_image = Vec::new();
    let mut unit_reps = Vec::new();
    let mut norm_one = Vec::new();
    let mut unit_index = 0;
    for (idx, u) in reps.iter().enumerate() {
        let mut xs = Vec::new();
        for_each_weighted_unit(alg, m, &k.inv(u), |x| {
            xs.push(x);
            true
        })
        .expect("order has a positive definite trace form");
        if xs.is_empty() {
            continue;
        }
        norm_image.push(idx);
        if idx == 0 {
            norm_one = xs.clone();
        }
        // x and εx have the same class mod Z_K^* only if ε is a square; the
        // enumeration returns exactly the units with n(x) = u, one per ±.
        unit_index += xs.len();
        unit_reps.extend(xs);
    }
    let x = norm_image.len().trailing_zeros();
    // put 1 first among the representatives
    if let Some(p) = unit_reps
        .iter()
        .position(|e| *e == alg.one() || *e == alg.neg(&alg.one()))
    {
        unit_reps.remove(p);
        unit_reps.insert(0, alg.one());
    }
    UnitData {
        norm_one_mod_pm1: norm_one.len(),
        unit_index,
        norm_image,
        x,
        unit_reps,
        norm_one,
    }
}

/// Some `x` with `n(x) = a`, searching `(1/m)·𝔡M` for increasing `m ≤ cap`.
pub fn solve_norm_equation(
    alg: &QuatAlgebra,
    m: &QuatLattice,
    a: &FieldElem,
    cap: u32,
) -> Result<QuatElem> {
    let k = alg.field();
    if !k.is_totally_positive(a) {
        return Err(Error::NotTotallyPositive(a.to_string()));
    }
    // search 𝔡·M with (a) = 𝔡²·𝔰, 𝔰 squarefree, so small denominators suffice
    let mut d = k.unit_ideal();
    for (p, e) in k.factor_ideal(&k.principal_ideal(a))? {
        d = k.ideal_mul(&d, &k.ideal_pow(&p.ideal, e.div_euclid(2)));
    }
    let basis = ideal_times_lattice(alg, &d, m).basis(alg);
    let ainv = k.inv(a);
    let gram = gram_on(alg, &basis, &ainv);
    let deg = k.degree() as i64;
    for den in 1..=cap {
        let d2 = rat((den as i64) * (den as i64), 1);
        let target = k.from_rat(d2.clone());
        // y ∈ M with n(y) = m²·a ⇔ Tr(n(y)/a) = [K:Q]·m² and equality in AM–GM
        let bound = rat(deg, 1) * &d2;
        let mut hit = None;
        for_each_short_vector(&gram, &bound, |v, val| {
            if *val != bound {
                return true;
            }
            let y = combine(alg, &basis, v);
            if k.mul(&alg.reduced_norm(&y), &ainv) == target {
                hit = Some(y);
                false
            } else {
                true
            }
        })?;
        if let Some(y) = hit {
            return Ok(alg.scale(&y, &rat(1, den as i64)));
        }
    }
    Err(Error::DenominatorCapExceeded {
        target: a.to_string(),
        cap,
    })
}

/// True if `n(x)` generates the ideal `nj` and `x ∈ j`.
pub fn generates(alg: &QuatAlgebra, j: &QuatLattice, x: &QuatElem, nj: &FieldIdeal) -> bool {
    let k = alg.field();
    j.contains(alg, x) && k.principal_ideal(&alg.reduced_norm(x)) == *nj
}
