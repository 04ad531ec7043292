//! Truncated Fourier expansions, scalar and vector-valued.
//!
//! A series stores coefficients of `q^(k/exp_den)` for each coset of a finite
//! abelian group. Everything at or above `prec` is unknown.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::numth::{parse_rat, rat_to_f64, rat_to_string, rint, Rat};

/// A coefficient, either exact or a complex double.
#[derive(Clone, Debug, PartialEq)]
pub enum Coeff {
    Rat(Rat),
    Num(Complex64),
}

impl Coeff {
    pub fn zero() -> Self {
        Coeff::Rat(Rat::zero())
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Coeff::Rat(r) => r.is_zero(),
            Coeff::Num(c) => c.re == 0.0 && c.im == 0.0,
        }
    }

    pub fn to_complex(&self) -> Complex64 {
        match self {
            Coeff::Rat(r) => Complex64::new(rat_to_f64(r), 0.0),
            Coeff::Num(c) => *c,
        }
    }

    pub fn as_rat(&self) -> Option<&Rat> {
        match self {
            Coeff::Rat(r) => Some(r),
            Coeff::Num(_) => None,
        }
    }

    pub fn add(&self, o: &Coeff) -> Coeff {
        match (self, o) {
            (Coeff::Rat(a), Coeff::Rat(b)) => Coeff::Rat(a + b),
            _ => Coeff::Num(self.to_complex() + o.to_complex()),
        }
    }

    pub fn mul(&self, o: &Coeff) -> Coeff {
        match (self, o) {
            (Coeff::Rat(a), Coeff::Rat(b)) => Coeff::Rat(a * b),
            _ => Coeff::Num(self.to_complex() * o.to_complex()),
        }
    }

    pub fn neg(&self) -> Coeff {
        match self {
            Coeff::Rat(a) => Coeff::Rat(-a),
            Coeff::Num(c) => Coeff::Num(-c),
        }
    }
}

impl From<Rat> for Coeff {
    fn from(r: Rat) -> Self {
        Coeff::Rat(r)
    }
}

impl From<i64> for Coeff {
    fn from(n: i64) -> Self {
        Coeff::Rat(rint(n))
    }
}

impl From<Complex64> for Coeff {
    fn from(c: Complex64) -> Self {
        Coeff::Num(c)
    }
}

impl fmt::Display for Coeff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coeff::Rat(r) => write!(f, "{}", rat_to_string(r)),
            Coeff::Num(c) => write!(f, "{}{:+}i", c.re, c.im),
        }
    }
}

/// Finite abelian group `Z/n1 x ... x Z/nk`. Cosets are indexed in
/// mixed radix with the first factor varying slowest. The empty product is
/// the trivial group used for scalar series.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct CosetGroup {
    orders: Vec<u64>,
}

impl CosetGroup {
    pub fn trivial() -> Self {
        Self { orders: Vec::new() }
    }

    /// Drops trivial factors.
    pub fn new(orders: Vec<u64>) -> Self {
        Self { orders: orders.into_iter().filter(|&n| n > 1).collect() }
    }

    pub fn orders(&self) -> &[u64] {
        &self.orders
    }

    pub fn size(&self) -> usize {
        self.orders.iter().product::<u64>() as usize
    }

    pub fn is_trivial(&self) -> bool {
        self.orders.is_empty()
    }

    pub fn to_tuple(&self, mut idx: usize) -> Vec<u64> {
        let mut t = vec![0; self.orders.len()];
        for (i, &n) in self.orders.iter().enumerate().rev() {
            t[i] = idx as u64 % n;
            idx /= n as usize;
        }
        t
    }

    pub fn from_tuple(&self, t: &[u64]) -> usize {
        let mut idx = 0usize;
        for (&x, &n) in t.iter().zip(&self.orders) {
            idx = idx * n as usize + (x % n) as usize;
        }
        idx
    }

    pub fn add(&self, a: usize, b: usize) -> usize {
        let ta = self.to_tuple(a);
        let tb = self.to_tuple(b);
        let s: Vec<u64> = ta.iter().zip(&tb).zip(&self.orders).map(|((x, y), n)| (x + y) % n).collect();
        self.from_tuple(&s)
    }

    pub fn neg(&self, a: usize) -> usize {
        let t: Vec<u64> = self.to_tuple(a).iter().zip(&self.orders).map(|(x, n)| (n - x) % n).collect();
        self.from_tuple(&t)
    }

    pub fn direct_sum(&self, other: &CosetGroup) -> CosetGroup {
        let mut o = self.orders.clone();
        o.extend_from_slice(&other.orders);
        CosetGroup { orders: o }
    }

    /// Index in `self ⊕ other` of the pair `(a, b)`.
    pub fn pair_index(&self, other: &CosetGroup, a: usize, b: usize) -> usize {
        a * other.size() + b
    }

    pub fn label(&self, idx: usize) -> String {
        let t = self.to_tuple(idx);
        let parts: Vec<String> = t.iter().map(|x| x.to_string()).collect();
        format!("({})", parts.join(","))
    }
}

/// Truncated q-expansion. See the module docs.
#[derive(Clone, Debug, PartialEq)]
pub struct QSeries {
    weight: Rat,
    group: CosetGroup,
    exp_den: i64,
    prec: Rat,
    coeffs: BTreeMap<(usize, i64), Coeff>,
}

fn lcm(a: i64, b: i64) -> i64 {
    a.lcm(&b)
}

impl QSeries {
    /// The zero series, known up to `prec`.
    pub fn zero(weight: Rat, group: CosetGroup, exp_den: i64, prec: Rat) -> Self {
        assert!(exp_den >= 1, "exp_den must be positive");
        Self { weight, group, exp_den, prec, coeffs: BTreeMap::new() }
    }

    /// Scalar series with integer exponents `start, start+1, ...` and
    /// coefficients from `coeffs`, known up to `prec`.
    pub fn scalar(weight: Rat, start: i64, coeffs: &[Rat], prec: i64) -> Self {
        let mut s = Self::zero(weight, CosetGroup::trivial(), 1, rint(prec));
        for (i, c) in coeffs.iter().enumerate() {
            let e = start + i as i64;
            if e < prec {
                s.set(0, e, Coeff::Rat(c.clone()));
            }
        }
        s
    }

    /// Scalar series `sum_{0 <= n < prec} f(n) q^n`.
    pub fn from_fn(weight: Rat, prec: i64, f: impl Fn(i64) -> Rat) -> Self {
        let mut s = Self::zero(weight, CosetGroup::trivial(), 1, rint(prec));
        for n in 0..prec {
            s.set(0, n, Coeff::Rat(f(n)));
        }
        s
    }

    /// `q^e`, with `e` an integer.
    pub fn monomial(weight: Rat, e: i64, prec: i64) -> Self {
        let mut s = Self::zero(weight, CosetGroup::trivial(), 1, rint(prec));
        if e < prec {
            s.set(0, e, Coeff::Rat(Rat::one()));
        }
        s
    }

    pub fn weight(&self) -> &Rat {
        &self.weight
    }

    pub fn with_weight(mut self, w: Rat) -> Self {
        self.weight = w;
        self
    }

    pub fn group(&self) -> &CosetGroup {
        &self.group
    }

    pub fn exp_den(&self) -> i64 {
        self.exp_den
    }

    pub fn prec(&self) -> &Rat {
        &self.prec
    }

    pub fn is_scalar(&self) -> bool {
        self.group.is_trivial()
    }

    pub fn is_exact(&self) -> bool {
        self.coeffs.values().all(|c| matches!(c, Coeff::Rat(_)))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Smallest exponent with a nonzero coefficient; `prec` for the zero
    /// series.
    pub fn principal_min(&self) -> Rat {
        self.coeffs
            .keys()
            .map(|&(_, k)| k)
            .min()
            .map(|k| Rat::new(k.into(), self.exp_den.into()))
            .unwrap_or_else(|| self.prec.clone())
    }

    fn prec_num_bound(&self) -> i64 {
        // exponents k/exp_den with k < this bound are below prec
        let p = &self.prec * rint(self.exp_den);
        p.ceil().to_integer().to_i64().expect("prec out of range")
    }

    /// Sets the coefficient of `q^(k/exp_den)` on coset `coset`. Coefficients
    /// at or above `prec` are ignored.
    pub fn set(&mut self, coset: usize, k: i64, c: Coeff) {
        assert!(coset < self.group.size().max(1), "coset index out of range");
        if k >= self.prec_num_bound() {
            return;
        }
        if c.is_zero() {
            self.coeffs.remove(&(coset, k));
        } else {
            self.coeffs.insert((coset, k), c);
        }
    }

    fn add_at(&mut self, coset: usize, k: i64, c: &Coeff) {
        let key = (coset, k);
        let new = match self.coeffs.get(&key) {
            Some(old) => old.add(c),
            None => c.clone(),
        };
        self.set(coset, k, new);
    }

    /// Coefficient at raw exponent numerator `k` (exponent `k/exp_den`).
    pub fn get(&self, coset: usize, k: i64) -> Coeff {
        self.coeffs.get(&(coset, k)).cloned().unwrap_or_else(Coeff::zero)
    }

    /// Coefficient of `q^e`; errors if `e >= prec`.
    pub fn coeff(&self, coset: usize, e: &Rat) -> Result<Coeff> {
        if e >= &self.prec {
            return Err(Error::InsufficientPrecision { needed: rat_to_string(e), have: rat_to_string(&self.prec) });
        }
        let k = e * rint(self.exp_den);
        if !k.is_integer() {
            return Ok(Coeff::zero());
        }
        Ok(self.get(coset, k.to_integer().to_i64().expect("exponent out of range")))
    }

    /// Exact coefficient of `q^n` of a scalar series, integer `n`.
    pub fn rat_coeff(&self, n: i64) -> Result<Rat> {
        match self.coeff(0, &rint(n))? {
            Coeff::Rat(r) => Ok(r),
            Coeff::Num(_) => Err(Error::InvalidArgument("series has inexact coefficients".into())),
        }
    }

    /// Iterates over `(coset, exponent numerator, coefficient)`.
    pub fn iter(&self) -> impl Iterator<Item = (usize, i64, &Coeff)> {
        self.coeffs.iter().map(|(&(c, k), v)| (c, k, v))
    }

    pub fn exponent(&self, k: i64) -> Rat {
        Rat::new(k.into(), self.exp_den.into())
    }

    /// Re-expresses exponents over a multiple of the current denominator.
    pub fn with_exp_den(&self, den: i64) -> Result<Self> {
        if den % self.exp_den != 0 {
            return Err(Error::InvalidArgument(format!("{den} is not a multiple of {}", self.exp_den)));
        }
        let f = den / self.exp_den;
        let mut out = Self::zero(self.weight.clone(), self.group.clone(), den, self.prec.clone());
        for (&(c, k), v) in &self.coeffs {
            out.coeffs.insert((c, k * f), v.clone());
        }
        Ok(out)
    }

    pub fn truncate(&self, prec: &Rat) -> Result<Self> {
        let p = prec.min(&self.prec).clone();
        let mut out = Self::zero(self.weight.clone(), self.group.clone(), self.exp_den, p);
        let bound = out.prec_num_bound();
        for (&(c, k), v) in &self.coeffs {
            if k < bound {
                out.coeffs.insert((c, k), v.clone());
            }
        }
        if !out.is_zero() && out.prec <= out.principal_min() {
            return Err(Error::PrecisionUnderflow {
                prec: rat_to_string(&out.prec),
                valuation: rat_to_string(&out.principal_min()),
            });
        }
        Ok(out)
    }

    fn aligned(a: &Self, b: &Self) -> Result<(Self, Self)> {
        let d = lcm(a.exp_den, b.exp_den);
        Ok((a.with_exp_den(d)?, b.with_exp_den(d)?))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.group != other.group {
            return Err(Error::IncompatibleCosets(format!("{:?} vs {:?}", self.group, other.group)));
        }
        let (a, b) = Self::aligned(self, other)?;
        let prec = a.prec.clone().min(b.prec.clone());
        let mut out = a.truncate(&prec)?;
        let bound = out.prec_num_bound();
        for (&(c, k), v) in &b.coeffs {
            if k < bound {
                out.add_at(c, k, v);
            }
        }
        Ok(out)
    }

    pub fn neg(&self) -> Self {
        let mut out = self.clone();
        for v in out.coeffs.values_mut() {
            *v = v.neg();
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn scale(&self, s: &Rat) -> Self {
        self.scale_coeff(&Coeff::Rat(s.clone()))
    }

    pub fn scale_coeff(&self, s: &Coeff) -> Self {
        let mut out = Self::zero(self.weight.clone(), self.group.clone(), self.exp_den, self.prec.clone());
        for (&(c, k), v) in &self.coeffs {
            out.set(c, k, v.mul(s));
        }
        out
    }

    /// Product. Scalars act on every coset; two vector-valued series over the
    /// same group combine cosets additively.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        let group = if self.group.is_trivial() {
            other.group.clone()
        } else if other.group.is_trivial() || other.group == self.group {
            self.group.clone()
        } else {
            return Err(Error::IncompatibleCosets(format!("{:?} vs {:?}", self.group, other.group)));
        };
        let combine = |x: usize, y: usize| -> usize {
            if self.group.is_trivial() {
                y
            } else if other.group.is_trivial() {
                x
            } else {
                group.add(x, y)
            }
        };
        self.convolve(other, group.clone(), combine)
    }

    fn convolve(&self, other: &Self, group: CosetGroup, combine: impl Fn(usize, usize) -> usize) -> Result<Self> {
        let (a, b) = Self::aligned(self, other)?;
        let prec = (&a.prec + b.principal_min()).min(&b.prec + a.principal_min());
        let weight = &a.weight + &b.weight;
        let mut out = Self::zero(weight, group, a.exp_den, prec);
        let bound = out.prec_num_bound();
        for (&(ca, ka), va) in &a.coeffs {
            for (&(cb, kb), vb) in &b.coeffs {
                if ka + kb >= bound {
                    continue;
                }
                out.add_at(combine(ca, cb), ka + kb, &va.mul(vb));
            }
        }
        Ok(out)
    }

    pub fn pow(&self, n: u32) -> Result<Self> {
        if n == 0 {
            let mut one = Self::zero(Rat::zero(), CosetGroup::trivial(), self.exp_den, self.prec.clone());
            one.set(0, 0, Coeff::Rat(Rat::one()));
            return Ok(one);
        }
        let mut acc = self.clone();
        for _ in 1..n {
            acc = acc.mul(self)?;
        }
        Ok(acc)
    }

    /// Multiplicative inverse of a scalar series with integral exponents and
    /// nonzero exact leading coefficient.
    pub fn inverse(&self) -> Result<Self> {
        if !self.is_scalar() || self.exp_den != 1 {
            return Err(Error::InvalidArgument("inverse needs a scalar series in integral powers of q".into()));
        }
        let v = self.principal_min();
        if self.is_zero() {
            return Err(Error::InvalidArgument("inverse of the zero series".into()));
        }
        let v = v.to_integer().to_i64().unwrap();
        let p = self.prec.ceil().to_integer().to_i64().unwrap();
        let len = p - v;
        let lead = self.rat_coeff(v)?;
        let a: Vec<Rat> = (0..len).map(|i| self.rat_coeff(v + i)).collect::<Result<_>>()?;
        let mut b: Vec<Rat> = Vec::with_capacity(len as usize);
        b.push(Rat::one() / &lead);
        for n in 1..len as usize {
            let mut s = Rat::zero();
            for i in 1..=n {
                if !a[i].is_zero() {
                    s += &a[i] * &b[n - i];
                }
            }
            b.push(-s / &lead);
        }
        // 1/f = q^{-v} (b0 + b1 q + ...), known to exponent -v + len
        Ok(Self::scalar(-self.weight.clone(), -v, &b, -v + len))
    }

    /// `q d/dq`: multiplies the coefficient of `q^e` by `e`. Adds 2 to the
    /// weight, which is only meaningful inside brackets.
    pub fn derivative(&self) -> Self {
        let mut out = Self::zero(&self.weight + rint(2), self.group.clone(), self.exp_den, self.prec.clone());
        for (&(c, k), v) in &self.coeffs {
            let e = self.exponent(k);
            out.set(c, k, v.mul(&Coeff::Rat(e)));
        }
        out
    }

    pub fn derivative_n(&self, n: u32) -> Self {
        let mut acc = self.clone();
        for _ in 0..n {
            acc = acc.derivative();
        }
        acc
    }

    /// Value at `tau` per coset, summing every stored term.
    pub fn eval(&self, tau: Complex64) -> Vec<Complex64> {
        let mut out = vec![Complex64::zero(); self.group.size()];
        let two_pi_i = Complex64::new(0.0, 2.0 * std::f64::consts::PI);
        for (&(c, k), v) in &self.coeffs {
            let e = k as f64 / self.exp_den as f64;
            out[c] += v.to_complex() * (two_pi_i * e * tau).exp();
        }
        out
    }

    /// Converts every coefficient to a complex double.
    pub fn to_numeric(&self) -> Self {
        let mut out = self.clone();
        for v in out.coeffs.values_mut() {
            *v = Coeff::Num(v.to_complex());
        }
        out
    }

    /// Maximum absolute coefficient difference on the common range.
    pub fn max_diff(&self, other: &Self) -> Result<f64> {
        let d = self.sub(other)?;
        Ok(d.coeffs.values().map(|c| c.to_complex().norm()).fold(0.0, f64::max))
    }

    pub fn to_json(&self) -> Value {
        let coeffs: Vec<Value> = self
            .coeffs
            .iter()
            .map(|(&(c, k), v)| {
                let exp = rat_to_string(&self.exponent(k));
                match v {
                    Coeff::Rat(r) => json!({"coset": c, "exp": exp, "rat": rat_to_string(r)}),
                    Coeff::Num(z) => json!({"coset": c, "exp": exp, "re": z.re, "im": z.im}),
                }
            })
            .collect();
        let cosets: Vec<Value> = (0..self.group.size()).map(|i| json!(self.group.to_tuple(i))).collect();
        json!({
            "weight": rat_to_string(&self.weight),
            "group": self.group.orders(),
            "cosets": cosets,
            "exp_den": self.exp_den,
            "prec": rat_to_string(&self.prec),
            "coeffs": coeffs,
        })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let perr = |m: &str| Error::Parse(format!("qseries json: {m}"));
        let s = |key: &str| -> Result<&str> { v.get(key).and_then(Value::as_str).ok_or_else(|| perr(key)) };
        let weight = parse_rat(s("weight")?)?;
        let prec = parse_rat(s("prec")?)?;
        let exp_den = v.get("exp_den").and_then(Value::as_i64).ok_or_else(|| perr("exp_den"))?;
        if exp_den < 1 {
            return Err(perr("exp_den must be positive"));
        }
        let group = match v.get("group") {
            Some(Value::Array(a)) => {
                CosetGroup::new(a.iter().map(|x| x.as_u64().ok_or_else(|| perr("group"))).collect::<Result<_>>()?)
            }
            None => {
                let n = v.get("cosets").and_then(Value::as_array).map(|a| a.len()).unwrap_or(1) as u64;
                CosetGroup::new(vec![n])
            }
            _ => return Err(perr("group")),
        };
        let mut out = Self::zero(weight, group, exp_den, prec);
        let coeffs = v.get("coeffs").and_then(Value::as_array).ok_or_else(|| perr("coeffs"))?;
        for c in coeffs {
            let coset = c.get("coset").and_then(Value::as_u64).ok_or_else(|| perr("coset"))? as usize;
            if coset >= out.group.size() {
                return Err(perr("coset out of range"));
            }
            let e = parse_rat(c.get("exp").and_then(Value::as_str).ok_or_else(|| perr("exp"))?)?;
            let k = &e * rint(exp_den);
            if !k.is_integer() {
                return Err(perr("exponent denominator does not divide exp_den"));
            }
            let k = k.to_integer().to_i64().ok_or_else(|| perr("exp"))?;
            let val = if let Some(r) = c.get("rat").and_then(Value::as_str) {
                Coeff::Rat(parse_rat(r)?)
            } else {
                let re = c.get("re").and_then(Value::as_f64).ok_or_else(|| perr("re"))?;
                let im = c.get("im").and_then(Value::as_f64).unwrap_or(0.0);
                Coeff::Num(Complex64::new(re, im))
            };
            out.add_at(coset, k, &val);
        }
        Ok(out)
    }
}

impl fmt::Display for QSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (&(c, k), v) in &self.coeffs {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            let e = rat_to_string(&self.exponent(k));
            if self.is_scalar() {
                write!(f, "({v})q^{e}")?;
            } else {
                write!(f, "({v})q^{e}e{}", self.group.label(c))?;
            }
        }
        if first {
            write!(f, "0")?;
        }
        write!(f, " + O(q^{})", rat_to_string(&self.prec))
    }
}

/// `f ⊗ g` over the direct sum of the coset groups; weights add.
pub fn tensor_product(f: &QSeries, g: &QSeries) -> Result<QSeries> {
    let group = f.group.direct_sum(&g.group);
    let (fg, gg) = (f.group.clone(), g.group.clone());
    f.convolve(g, group, move |a, b| fg.pair_index(&gg, a, b))
}

/// Coefficient `(-1)^r Γ(κ+n)Γ(ℓ+n) / (s! Γ(κ+n-s) r! Γ(ℓ+n-r))` written as a
/// finite product.
pub fn rc_coefficient(kappa: &Rat, ell: &Rat, r: u32, s: u32) -> Rat {
    let n = rint((r + s) as i64);
    let mut c = Rat::one();
    for i in 1..=s {
        c *= kappa + &n - rint(i as i64);
    }
    for i in 1..=r {
        c *= ell + &n - rint(i as i64);
    }
    let fact = |m: u32| -> Rat { Rat::from_integer((1..=m as u64).map(BigInt::from).product()) };
    c /= fact(r) * fact(s);
    if r % 2 == 1 {
        -c
    } else {
        c
    }
}

fn is_nonpositive_integer(x: &Rat) -> bool {
    x.is_integer() && !x.is_positive()
}

/// `n`-th Rankin-Cohen bracket using the weights stored on `f` and `g` and the
/// `q d/dq` derivative.
pub fn rc_bracket(f: &QSeries, g: &QSeries, n: u32) -> Result<QSeries> {
    let kappa = f.weight.clone();
    let ell = g.weight.clone();
    let nn = rint(n as i64);
    for w in [&kappa, &ell] {
        // n = 0 is the plain product, no Gamma factors survive
        if n > 0 && is_nonpositive_integer(&(w + &nn)) {
            return Err(Error::GammaPole(format!("Gamma({}) in Rankin-Cohen bracket", rat_to_string(&(w + &nn)))));
        }
    }
    let mut acc: Option<QSeries> = None;
    for r in 0..=n {
        let s = n - r;
        let c = rc_coefficient(&kappa, &ell, r, s);
        let term = tensor_product(&f.derivative_n(r), &g.derivative_n(s))?.scale(&c);
        acc = Some(match acc {
            None => term,
            Some(a) => a.add(&term)?,
        });
    }
    Ok(acc.unwrap().with_weight(&kappa + &ell + rint(2 * n as i64)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numth::rat;
    use proptest::prelude::*;

    fn ints(w: i64, v: &[i64], prec: i64) -> QSeries {
        QSeries::scalar(rint(w), 0, &v.iter().map(|&x| rint(x)).collect::<Vec<_>>(), prec)
    }

    fn theta(prec: i64) -> QSeries {
        QSeries::from_fn(rat(1, 2), prec, |n| {
            if n == 0 {
                rint(1)
            } else {
                let s = (n as f64).sqrt().round() as i64;
                if s * s == n {
                    rint(2)
                } else {
                    rint(0)
                }
            }
        })
    }

    #[test]
    fn product_truncation() {
        let a = ints(0, &[1, 1], 2);
        let b = ints(0, &[1, -1], 2);
        let p = a.mul(&b).unwrap();
        assert_eq!(p.prec(), &rint(2));
        assert_eq!(p.rat_coeff(0).unwrap(), rint(1));
        assert_eq!(p.rat_coeff(1).unwrap(), rint(0));
        assert!(p.rat_coeff(2).is_err());
    }

    #[test]
    fn theta_squared_counts_two_squares() {
        let t = theta(10);
        let t2 = t.mul(&t).unwrap();
        // r_2(n) by direct count
        for n in 0..10i64 {
            let mut cnt = 0;
            for x in -4i64..=4 {
                for y in -4i64..=4 {
                    if x * x + y * y == n {
                        cnt += 1;
                    }
                }
            }
            assert_eq!(t2.rat_coeff(n).unwrap(), rint(cnt));
        }
        assert_eq!(t2.weight(), &rint(1));
    }

    #[test]
    fn additive_identity_and_derivative() {
        let a = ints(2, &[3, 0, 5], 3);
        let z = QSeries::zero(rint(2), CosetGroup::trivial(), 1, rint(3));
        assert_eq!(a.add(&z).unwrap(), a);
        let mut s = QSeries::zero(rint(0), CosetGroup::trivial(), 1, rint(3));
        s.set(0, -1, 1.into());
        s.set(0, 0, 504.into());
        let d = s.derivative();
        assert_eq!(d.rat_coeff(-1).unwrap(), rint(-1));
        assert_eq!(d.rat_coeff(0).unwrap(), rint(0));
        assert!(ints(0, &[7], 4).derivative().is_zero());
    }

    #[test]
    fn bracket_basics() {
        let q = QSeries::monomial(rint(2), 1, 6);
        let b = rc_bracket(&q, &q, 1).unwrap();
        assert!(b.is_zero());
        assert_eq!(b.weight(), &rint(6));
        let f = ints(2, &[1, 2, 3], 3);
        let g = ints(4, &[2, 0, 1], 3);
        assert_eq!(rc_bracket(&f, &g, 0).unwrap(), f.mul(&g).unwrap());
        // [f,g]_1 = κ f g' - ℓ f' g
        let direct = f.mul(&g.derivative()).unwrap().scale(&rint(2)).sub(&f.derivative().mul(&g).unwrap().scale(&rint(4))).unwrap();
        let b1 = rc_bracket(&f, &g, 1).unwrap();
        assert_eq!(b1.max_diff(&direct).unwrap(), 0.0);
    }

    #[test]
    fn bracket_gamma_pole() {
        let f = ints(-3, &[1], 2);
        let g = ints(2, &[1], 2);
        assert!(matches!(rc_bracket(&f, &g, 2), Err(Error::GammaPole(_))));
    }

    #[test]
    fn tensor_bookkeeping() {
        let g2 = CosetGroup::new(vec![2]);
        let mut f = QSeries::zero(rint(1), g2.clone(), 1, rint(3));
        f.set(0, 0, 1.into());
        let mut g = QSeries::zero(rint(1), g2.clone(), 1, rint(3));
        g.set(1, 1, 1.into());
        let t = tensor_product(&f, &g).unwrap();
        assert_eq!(t.group().orders(), &[2, 2]);
        let idx = t.group().from_tuple(&[0, 1]);
        assert_eq!(t.get(idx, 1), Coeff::from(1));
        assert_eq!(t.iter().count(), 1);
        let a = ints(0, &[1, 2], 2);
        let b = ints(0, &[3, 4], 2);
        assert_eq!(tensor_product(&a, &b).unwrap(), a.mul(&b).unwrap());
    }

    #[test]
    fn inverse_roundtrip() {
        let a = ints(0, &[2, 3, 0, 1, 5, 1], 6);
        let inv = a.inverse().unwrap();
        let p = a.mul(&inv).unwrap();
        assert_eq!(p.rat_coeff(0).unwrap(), rint(1));
        for n in 1..6 {
            assert_eq!(p.rat_coeff(n).unwrap(), rint(0));
        }
    }

    #[test]
    fn json_roundtrip() {
        let mut f = QSeries::zero(rat(3, 2), CosetGroup::new(vec![2]), 4, rint(3));
        f.set(0, 0, Coeff::Rat(rat(-1, 12)));
        f.set(1, 3, Coeff::Rat(rat(1, 3)));
        f.set(1, 7, Coeff::Num(Complex64::new(0.5, -1.0)));
        let v = f.to_json();
        assert_eq!(QSeries::from_json(&v).unwrap(), f);
        assert!(QSeries::from_json(&json!({"weight": "1"})).is_err());
    }

    fn arb_series() -> impl Strategy<Value = QSeries> {
        (prop::collection::vec(-20i64..20, 1..8), 0i64..3, -1i64..2).prop_map(|(v, w, start)| {
            let c: Vec<Rat> = v.iter().map(|&x| rint(x)).collect();
            let prec = start + c.len() as i64;
            QSeries::scalar(rint(w), start, &c, prec)
        })
    }

    proptest! {
        #[test]
        fn bracket_antisymmetric(f in arb_series(), g in arb_series()) {
            let g = g.with_weight(f.weight().clone());
            let a = rc_bracket(&f, &g, 1).unwrap();
            let b = rc_bracket(&g, &f, 1).unwrap();
            prop_assert_eq!(a, b.neg());
        }

        #[test]
        fn leibniz(f in arb_series(), g in arb_series()) {
            let lhs = f.mul(&g).unwrap().derivative();
            let rhs = f.derivative().mul(&g).unwrap().add(&f.mul(&g.derivative()).unwrap()).unwrap();
            prop_assert_eq!(lhs.max_diff(&rhs).unwrap(), 0.0);
            prop_assert_eq!(lhs.prec(), rhs.prec());
        }

        #[test]
        fn truncation_stable(f in arb_series(), g in arb_series(), n in 0u32..3) {
            let hi = rc_bracket(&f, &g, n).unwrap();
            let flo = f.truncate(&(f.prec() - rint(1))).ok();
            if let Some(flo) = flo {
                let lo = rc_bracket(&flo, &g, n).unwrap();
                prop_assert_eq!(hi.truncate(lo.prec()).unwrap(), lo);
            }
        }
    }
}
