//! Exact rational arithmetic and the elementary arithmetic functions used by
//! the rest of the crate.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Arbitrary precision rational, always stored in lowest terms with a
/// positive denominator.
pub type Rat = BigRational;

pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

pub fn rint(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// Formats as `p/q`, or `p` for integers.
pub fn rat_to_string(r: &Rat) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn parse_rat(s: &str) -> Result<Rat> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a rational: {s:?}"));
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().map_err(|_| bad())?;
            let d: BigInt = d.trim().parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            Ok(Rat::new(n, d))
        }
        None => Ok(Rat::from_integer(s.parse().map_err(|_| bad())?)),
    }
}

pub fn rat_to_f64(r: &Rat) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // fall back for huge numerators/denominators
        let n = r.numer().to_f64().unwrap_or(f64::NAN);
        let d = r.denom().to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

pub fn rat_pow(base: &Rat, exp: u32) -> Rat {
    num_traits::pow(base.clone(), exp as usize)
}

/// Prime factorisation by trial division.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2u64;
    while p * p <= n {
        if n.is_multiple_of(p) {
            let mut e = 0;
            while n.is_multiple_of(p) {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

/// Sorted list of positive divisors.
pub fn divisors(n: u64) -> Vec<u64> {
    let mut small = Vec::new();
    let mut large = Vec::new();
    let mut d = 1u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            small.push(d);
            if d * d != n {
                large.push(n / d);
            }
        }
        d += 1;
    }
    small.extend(large.into_iter().rev());
    small
}

fn positive(n: i64, what: &str) -> Result<u64> {
    if n <= 0 {
        Err(Error::InvalidArgument(format!("{what}: n must be positive, got {n}")))
    } else {
        Ok(n as u64)
    }
}

/// `sum_{d | n} d^k`.
pub fn sigma_k(n: i64, k: u32) -> Result<Rat> {
    let n = positive(n, "sigma_k")?;
    let s: BigInt = divisors(n).into_iter().map(|d| num_traits::pow(BigInt::from(d), k as usize)).sum();
    Ok(Rat::from_integer(s))
}

/// `(1/2) sum_{d | n} min(d, n/d)^k`.
pub fn lambda_k(n: i64, k: u32) -> Result<Rat> {
    let n = positive(n, "lambda_k")?;
    let s: BigInt = divisors(n)
        .into_iter()
        .map(|d| num_traits::pow(BigInt::from(d.min(n / d)), k as usize))
        .sum();
    Ok(Rat::new(s, BigInt::from(2)))
}

pub fn moebius(n: i64) -> Result<i32> {
    let n = positive(n, "moebius")?;
    let f = factorize(n);
    if f.iter().any(|&(_, e)| e > 1) {
        Ok(0)
    } else if f.len().is_multiple_of(2) {
        Ok(1)
    } else {
        Ok(-1)
    }
}

fn binomial(n: u64, k: u64) -> BigInt {
    let mut r = BigInt::one();
    for i in 0..k {
        r = r * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    r
}

/// Bernoulli numbers `B_0..=B_n` with `B_1 = -1/2`.
pub fn bernoulli_table(n: usize) -> Vec<Rat> {
    let mut b: Vec<Rat> = Vec::with_capacity(n + 1);
    b.push(Rat::one());
    for m in 1..=n {
        // sum_{j=0}^{m} C(m+1, j) B_j = 0
        let mut acc = Rat::zero();
        for (j, bj) in b.iter().enumerate() {
            acc += Rat::from_integer(binomial(m as u64 + 1, j as u64)) * bj;
        }
        b.push(-acc / Rat::from_integer(BigInt::from(m + 1)));
    }
    b
}

pub fn bernoulli(n: usize) -> Rat {
    bernoulli_table(n).pop().unwrap()
}

/// Bernoulli polynomial `B_n(x) = sum_k C(n,k) B_k x^(n-k)`.
pub fn bernoulli_poly(n: usize, x: &Rat) -> Rat {
    let b = bernoulli_table(n);
    let mut acc = Rat::zero();
    for (k, bk) in b.iter().enumerate() {
        acc += Rat::from_integer(binomial(n as u64, k as u64)) * bk * rat_pow(x, (n - k) as u32);
    }
    acc
}

/// Jacobi symbol `(a/m)` for odd positive `m`.
fn jacobi(a: i64, m: i64) -> i32 {
    debug_assert!(m > 0 && m % 2 == 1);
    let mut a = a.rem_euclid(m);
    let mut m = m;
    let mut t = 1;
    while a != 0 {
        while a % 2 == 0 {
            a /= 2;
            let r = m % 8;
            if r == 3 || r == 5 {
                t = -t;
            }
        }
        std::mem::swap(&mut a, &mut m);
        if a % 4 == 3 && m % 4 == 3 {
            t = -t;
        }
        a %= m;
    }
    if m == 1 {
        t
    } else {
        0
    }
}

/// Kronecker symbol `(d/n)`.
pub fn kronecker(d: i64, n: i64) -> i32 {
    if n == 0 {
        return if d.abs() == 1 { 1 } else { 0 };
    }
    let mut result = 1;
    let mut n = n;
    if n < 0 {
        n = -n;
        if d < 0 {
            result = -result;
        }
    }
    while n % 2 == 0 {
        n /= 2;
        let r = d.rem_euclid(8);
        match r {
            0 | 2 | 4 | 6 => return 0,
            1 | 7 => {}
            _ => result = -result,
        }
    }
    if n == 1 {
        return result;
    }
    result * jacobi(d, n)
}

fn squarefree(n: u64) -> bool {
    factorize(n).iter().all(|&(_, e)| e == 1)
}

pub fn is_fundamental_discriminant(d: i64) -> bool {
    if d == 1 {
        return true;
    }
    if d == 0 {
        return false;
    }
    match d.rem_euclid(4) {
        1 => squarefree(d.unsigned_abs()),
        0 => {
            let m = d / 4;
            matches!(m.rem_euclid(4), 2 | 3) && squarefree(m.unsigned_abs())
        }
        _ => false,
    }
}

/// Writes a discriminant `d != 0`, `d = 0,1 mod 4`, as `d0 * f^2` with `d0`
/// fundamental and `f > 0`.
pub fn fundamental_split(d: i64) -> Result<(i64, u64)> {
    if d == 0 || !matches!(d.rem_euclid(4), 0 | 1) {
        return Err(Error::InvalidArgument(format!("{d} is not a nonzero discriminant")));
    }
    let sign = d.signum();
    let mut core = 1u64;
    let mut f = 1u64;
    for (p, e) in factorize(d.unsigned_abs()) {
        f *= p.pow(e / 2);
        if e % 2 == 1 {
            core *= p;
        }
    }
    let mut d0 = sign * core as i64;
    if d0.rem_euclid(4) != 1 {
        d0 *= 4;
        if !f.is_multiple_of(2) {
            return Err(Error::InvalidArgument(format!("{d}: no fundamental factorisation")));
        }
        f /= 2;
    }
    debug_assert!(is_fundamental_discriminant(d0));
    Ok((d0, f))
}

/// Kronecker character `(D/.)` of a fundamental discriminant.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DirichletChar {
    discriminant: i64,
}

impl DirichletChar {
    pub fn new(discriminant: i64) -> Result<Self> {
        if !is_fundamental_discriminant(discriminant) {
            return Err(Error::InvalidArgument(format!("{discriminant} is not a fundamental discriminant")));
        }
        Ok(Self { discriminant })
    }

    pub fn trivial() -> Self {
        Self { discriminant: 1 }
    }

    pub fn discriminant(&self) -> i64 {
        self.discriminant
    }

    pub fn modulus(&self) -> u64 {
        self.discriminant.unsigned_abs()
    }

    pub fn eval(&self, n: i64) -> i32 {
        kronecker(self.discriminant, n)
    }
}

/// `B_{n,chi} = f^(n-1) sum_{a=1}^{f} chi(a) B_n(a/f)` with `f` the conductor.
pub fn generalized_bernoulli(chi: &DirichletChar, n: usize) -> Rat {
    let f = chi.modulus() as i64;
    let mut acc = Rat::zero();
    for a in 1..=f {
        let c = chi.eval(a);
        if c != 0 {
            acc += rint(c as i64) * bernoulli_poly(n, &rat(a, f));
        }
    }
    if n == 0 {
        acc / rint(f)
    } else {
        acc * rat_pow(&rint(f), (n - 1) as u32)
    }
}

/// `zeta(1 - n) = -B_n / n` for `n >= 1`.
pub fn zeta_one_minus(n: usize) -> Result<Rat> {
    if n == 0 {
        return Err(Error::InvalidArgument("zeta(1-n) needs n >= 1".into()));
    }
    if n == 1 {
        // zeta(0) = -1/2, which the B_1 = -1/2 convention would get wrong
        return Ok(rat(-1, 2));
    }
    Ok(-bernoulli(n) / rint(n as i64))
}

/// `L(1 - n, chi) = -B_{n,chi} / n` for `n >= 1`.
pub fn dirichlet_l_one_minus(chi: &DirichletChar, n: usize) -> Result<Rat> {
    if n == 0 {
        return Err(Error::InvalidArgument("L(1-n, chi) needs n >= 1".into()));
    }
    if chi.discriminant == 1 {
        return zeta_one_minus(n);
    }
    Ok(-generalized_bernoulli(chi, n) / rint(n as i64))
}

/// `gcd` of two `i64` as a non-negative value.
pub fn gcd(a: i64, b: i64) -> i64 {
    a.gcd(&b).abs()
}

pub fn is_integer(r: &Rat) -> bool {
    r.denom().is_one()
}

pub fn floor_rat(r: &Rat) -> BigInt {
    r.floor().to_integer()
}

pub fn abs_rat(r: &Rat) -> Rat {
    r.abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn sigma_examples() {
        assert_eq!(sigma_k(1, 1).unwrap(), rint(1));
        assert_eq!(sigma_k(9, 1).unwrap(), rint(13));
        assert_eq!(sigma_k(6, 3).unwrap(), rint(1 + 8 + 27 + 216));
        assert!(sigma_k(0, 1).is_err());
        assert!(sigma_k(-3, 1).is_err());
    }

    #[test]
    fn lambda_examples() {
        assert_eq!(lambda_k(5, 1).unwrap(), rint(1));
        assert_eq!(lambda_k(9, 1).unwrap(), rat(5, 2));
        assert_eq!(lambda_k(5, 3).unwrap(), rint(1));
        assert!(lambda_k(0, 1).is_err());
    }

    /// Independent oracle: B_n from the Akiyama-Tanigawa algorithm (which
    /// yields B_1 = +1/2).
    fn akiyama_tanigawa(n: usize) -> Rat {
        let mut a: Vec<Rat> = Vec::new();
        for m in 0..=n {
            a.push(Rat::new(BigInt::one(), BigInt::from(m + 1)));
            for j in (1..=m).rev() {
                a[j - 1] = rint(j as i64) * (&a[j - 1] - &a[j]);
            }
        }
        a[0].clone()
    }

    #[test]
    fn bernoulli_values() {
        assert_eq!(bernoulli(4), rat(-1, 30));
        assert_eq!(zeta_one_minus(4).unwrap(), rat(1, 120));
        assert_eq!(zeta_one_minus(2).unwrap(), rat(-1, 12));
        assert_eq!(bernoulli(1), rat(-1, 2));
        for n in 2..30 {
            assert_eq!(bernoulli(n), akiyama_tanigawa(n), "B_{n}");
        }
        for n in 1..15 {
            assert!(bernoulli(2 * n + 1).is_zero());
        }
        assert!(zeta_one_minus(0).is_err());
    }

    #[test]
    fn trivial_character_bernoulli() {
        let chi = DirichletChar::trivial();
        assert_eq!(generalized_bernoulli(&chi, 1), rat(1, 2));
        for n in 2..12 {
            assert_eq!(generalized_bernoulli(&chi, n), bernoulli(n));
        }
    }

    #[test]
    fn l_values_at_zero_give_class_numbers() {
        // L(0, chi_D) = 2 h(D) / w(D) for D < 0
        let chi3 = DirichletChar::new(-3).unwrap();
        assert_eq!(dirichlet_l_one_minus(&chi3, 1).unwrap(), rat(1, 3));
        let chi4 = DirichletChar::new(-4).unwrap();
        assert_eq!(dirichlet_l_one_minus(&chi4, 1).unwrap(), rat(1, 2));
        let chi23 = DirichletChar::new(-23).unwrap();
        assert_eq!(dirichlet_l_one_minus(&chi23, 1).unwrap(), rint(3));
        // L(-1, chi_5) = -B_{2,chi_5}/2 = 2/5... known value: zeta_K(-1) = 1/30 for Q(sqrt5)
        let chi5 = DirichletChar::new(5).unwrap();
        let l = dirichlet_l_one_minus(&chi5, 2).unwrap();
        assert_eq!(l * zeta_one_minus(2).unwrap(), rat(1, 30));
    }

    #[test]
    fn kronecker_and_moebius() {
        assert_eq!(kronecker(-4, 3), -1);
        assert_eq!(kronecker(-4, 5), 1);
        assert_eq!(kronecker(-4, 2), 0);
        assert_eq!(kronecker(5, 2), -1);
        assert_eq!(kronecker(-7, 2), 1);
        assert_eq!(kronecker(-3, -1), -1);
        assert_eq!(moebius(12).unwrap(), 0);
        assert_eq!(moebius(30).unwrap(), -1);
        assert_eq!(moebius(1).unwrap(), 1);
        assert_eq!(moebius(6).unwrap(), 1);
        assert!(moebius(0).is_err());
    }

    #[test]
    fn kronecker_matches_quadratic_residues_mod_prime() {
        for &p in &[3i64, 5, 7, 11, 13] {
            for d in -30i64..30 {
                let r = d.rem_euclid(p);
                let expect = if r == 0 {
                    0
                } else if (1..p).any(|x| (x * x) % p == r) {
                    1
                } else {
                    -1
                };
                assert_eq!(kronecker(d, p), expect, "({d}/{p})");
            }
        }
    }

    #[test]
    fn fundamental_splitting() {
        assert_eq!(fundamental_split(-3).unwrap(), (-3, 1));
        assert_eq!(fundamental_split(-12).unwrap(), (-3, 2));
        assert_eq!(fundamental_split(-16).unwrap(), (-4, 2));
        assert_eq!(fundamental_split(-4).unwrap(), (-4, 1));
        assert_eq!(fundamental_split(-32).unwrap(), (-8, 2));
        assert_eq!(fundamental_split(9).unwrap(), (1, 3));
        assert_eq!(fundamental_split(-27).unwrap(), (-3, 3));
        assert!(fundamental_split(-5).is_err());
        assert!(fundamental_split(0).is_err());
        assert!(DirichletChar::new(-12).is_err());
    }

    #[test]
    fn parse_and_print() {
        assert_eq!(parse_rat("-3/6").unwrap(), rat(-1, 2));
        assert_eq!(parse_rat(" 7 ").unwrap(), rint(7));
        assert!(parse_rat("1/0").is_err());
        assert_eq!(rat_to_string(&rat(4, -6)), "-2/3");
        assert_eq!(rat_to_string(&rint(5)), "5");
    }

    proptest! {
        #[test]
        fn sigma_multiplicative(a in 1i64..10_000, b in 1i64..10_000, k in 0u32..4) {
            prop_assume!(gcd(a, b) == 1);
            prop_assert_eq!(sigma_k(a * b, k).unwrap(), sigma_k(a, k).unwrap() * sigma_k(b, k).unwrap());
        }

        #[test]
        fn rat_inverse(n in -1000i64..1000, d in 1i64..1000) {
            prop_assume!(n != 0);
            let a = rat(n, d);
            let b = rat(d, n);
            prop_assert_eq!(a * b, rint(1));
        }
    }
}
