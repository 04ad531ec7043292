//! Hurwitz class numbers and Cohen's generalized class numbers.

use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::numth::{
    dirichlet_l_one_minus, fundamental_split, kronecker, moebius, rat, rat_to_string, rint, sigma_k, zeta_one_minus,
    DirichletChar, Rat,
};
use crate::qexp::QSeries;

/// Weighted count of reduced positive definite forms of discriminant `-n`.
/// `H(0) = -1/12`.
pub fn hurwitz_by_forms(n: i64) -> Result<Rat> {
    if n < 0 {
        return Err(Error::InvalidArgument(format!("hurwitz: n = {n} < 0")));
    }
    if n == 0 {
        return Ok(rat(-1, 12));
    }
    if matches!(n % 4, 1 | 2) {
        return Ok(Rat::zero());
    }
    let mut h = Rat::zero();
    let mut a = 1i64;
    // reduced forms have 3a^2 <= n
    while 3 * a * a <= n {
        for b in -a + 1..=a {
            let num = b * b + n;
            if num % (4 * a) != 0 {
                continue;
            }
            let c = num / (4 * a);
            if c < a || (c == a && b < 0) {
                continue;
            }
            h += if b == 0 && a == c {
                rat(1, 2)
            } else if b == a && a == c {
                rat(1, 3)
            } else {
                Rat::one()
            };
        }
        a += 1;
    }
    Ok(h)
}

/// `H(0..=max)` by reduced forms.
#[derive(Clone, Debug, PartialEq)]
pub struct HurwitzTable {
    values: Vec<Rat>,
}

impl HurwitzTable {
    pub fn new(max: usize) -> Self {
        let values = (0..=max as i64).into_par_iter().map(|n| hurwitz_by_forms(n).unwrap()).collect();
        Self { values }
    }

    pub fn max(&self) -> usize {
        self.values.len() - 1
    }

    /// `H(n)`; zero for negative `n`, panics beyond the table.
    pub fn get(&self, n: i64) -> Rat {
        if n < 0 {
            Rat::zero()
        } else {
            self.values[n as usize].clone()
        }
    }
}

/// Cohen's `H(r, N)` for `r >= 1`, `N >= 0`.
pub fn cohen_number(r: u32, n: i64) -> Result<Rat> {
    if r == 0 {
        return Err(Error::InvalidArgument("cohen_number needs r >= 1".into()));
    }
    if n < 0 {
        return Err(Error::InvalidArgument(format!("cohen_number: N = {n} < 0")));
    }
    if n == 0 {
        return zeta_one_minus(2 * r as usize);
    }
    let d = if r.is_multiple_of(2) { n } else { -n };
    if !matches!(d.rem_euclid(4), 0 | 1) {
        return Ok(Rat::zero());
    }
    let (d0, f) = fundamental_split(d)?;
    let chi = DirichletChar::new(d0)?;
    let l = dirichlet_l_one_minus(&chi, r as usize)?;
    let mut s = Rat::zero();
    for dd in crate::numth::divisors(f) {
        let mu = moebius(dd as i64)?;
        if mu == 0 {
            continue;
        }
        let k = kronecker(d0, dd as i64);
        if k == 0 {
            continue;
        }
        let term = rint((mu * k) as i64)
            * crate::numth::rat_pow(&rint(dd as i64), r - 1)
            * sigma_k((f / dd) as i64, 2 * r - 1)?;
        s += term;
    }
    Ok(l * s)
}

/// Coefficient `H(ℓ, n)` of the generating series `𝓗_ℓ`, i.e. Cohen's
/// `H(ℓ-1, n)`; `H(2, n)` is the Hurwitz class number.
pub fn cohen_coeff(ell: u32, n: i64) -> Result<Rat> {
    if ell < 2 {
        return Err(Error::InvalidArgument(format!("ell = {ell} < 2")));
    }
    cohen_number(ell - 1, n)
}

/// `𝓗_ℓ = Σ H(ℓ, n) qⁿ` to `q^prec`, weight `ℓ - 1/2`.
pub fn cohen_series(ell: u32, prec: i64) -> Result<QSeries> {
    let coeffs: Vec<Rat> = (0..prec).into_par_iter().map(|n| cohen_coeff(ell, n)).collect::<Result<_>>()?;
    Ok(QSeries::scalar(rint(ell as i64) - rat(1, 2), 0, &coeffs, prec))
}

/// Hurwitz generating series `𝓗` from the forms count.
pub fn hurwitz_series(prec: i64) -> QSeries {
    let t = HurwitzTable::new(prec.max(1) as usize);
    QSeries::from_fn(rat(3, 2), prec, |n| t.get(n))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HurwitzMethod {
    Forms,
    LFunction,
}

/// CSV `n,H(n)` for `0 <= n <= max`.
pub fn hurwitz_csv(max: i64, method: HurwitzMethod) -> Result<String> {
    let vals: Vec<Rat> = (0..=max)
        .into_par_iter()
        .map(|n| match method {
            HurwitzMethod::Forms => hurwitz_by_forms(n),
            HurwitzMethod::LFunction => cohen_number(1, n),
        })
        .collect::<Result<_>>()?;
    let mut out = String::from("n,H\n");
    for (n, v) in vals.iter().enumerate() {
        out.push_str(&format!("{n},{}\n", rat_to_string(v)));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Oracle: scan a full box for reduced forms instead of the bounded loop.
    fn brute_reduced(n: i64) -> Rat {
        let mut h = Rat::zero();
        for a in 1..=n {
            for c in a..=n {
                for b in -a..=a {
                    if b * b - 4 * a * c != -n {
                        continue;
                    }
                    if b == -a || (a == c && b < 0) {
                        continue;
                    }
                    h += if a == c && b == 0 {
                        rat(1, 2)
                    } else if a == c && b == a {
                        rat(1, 3)
                    } else {
                        Rat::one()
                    };
                }
            }
        }
        h
    }

    #[test]
    fn small_values() {
        assert_eq!(hurwitz_by_forms(0).unwrap(), rat(-1, 12));
        assert_eq!(hurwitz_by_forms(3).unwrap(), rat(1, 3));
        assert_eq!(hurwitz_by_forms(4).unwrap(), rat(1, 2));
        assert_eq!(hurwitz_by_forms(5).unwrap(), rint(0));
        assert_eq!(hurwitz_by_forms(7).unwrap(), rint(1));
        assert_eq!(hurwitz_by_forms(8).unwrap(), rint(1));
        assert_eq!(hurwitz_by_forms(12).unwrap(), rat(4, 3));
        assert_eq!(hurwitz_by_forms(16).unwrap(), rat(3, 2));
        assert_eq!(hurwitz_by_forms(23).unwrap(), rint(3));
        assert!(hurwitz_by_forms(-1).is_err());
        for n in 1..60 {
            assert_eq!(hurwitz_by_forms(n).unwrap(), brute_reduced(n), "n = {n}");
        }
    }

    #[test]
    fn cohen_special_values() {
        assert_eq!(cohen_coeff(2, 0).unwrap(), rat(-1, 12));
        assert_eq!(cohen_coeff(3, 0).unwrap(), rat(1, 120));
        // H(2, 0) in Cohen's indexing is zeta(-3)
        assert_eq!(cohen_number(2, 0).unwrap(), rat(1, 120));
        assert_eq!(cohen_number(2, 2).unwrap(), rint(0));
        assert!(cohen_number(0, 3).is_err());
    }

    #[test]
    fn cohen_matches_forms() {
        for n in 0..=200 {
            assert_eq!(cohen_coeff(2, n).unwrap(), hurwitz_by_forms(n).unwrap(), "n = {n}");
        }
    }

    #[test]
    fn cohen_support() {
        for ell in 2..6u32 {
            for n in 1..80i64 {
                let d = if (ell - 1) % 2 == 0 { n } else { -n };
                if !matches!(d.rem_euclid(4), 0 | 1) {
                    assert_eq!(cohen_coeff(ell, n).unwrap(), rint(0));
                }
            }
        }
    }

    #[test]
    fn cohen_eisenstein_weight_5_2() {
        // H_3 = 1/120 - (1/12) q - (7/12) q^4 - (2/5) q^5 - q^8 + ...
        let s = cohen_series(3, 9).unwrap();
        let expect = [rat(1, 120), rat(-1, 12), rint(0), rint(0), rat(-7, 12), rat(-2, 5), rint(0), rint(0), rint(-1)];
        for (n, e) in expect.iter().enumerate() {
            assert_eq!(&s.rat_coeff(n as i64).unwrap(), e, "n = {n}");
        }
    }

    #[test]
    fn hurwitz_series_start() {
        let s = cohen_series(2, 9).unwrap();
        let expect = [rat(-1, 12), rint(0), rint(0), rat(1, 3), rat(1, 2), rint(0), rint(0), rint(1), rint(1)];
        for (n, e) in expect.iter().enumerate() {
            assert_eq!(&s.rat_coeff(n as i64).unwrap(), e);
        }
        assert_eq!(s, hurwitz_series(9));
    }

    #[test]
    fn csv_methods_agree() {
        let a = hurwitz_csv(40, HurwitzMethod::Forms).unwrap();
        let b = hurwitz_csv(40, HurwitzMethod::LFunction).unwrap();
        assert_eq!(a, b);
        assert!(a.contains("\n0,-1/12\n"));
        assert!(a.contains("\n3,1/3\n"));
    }
}
