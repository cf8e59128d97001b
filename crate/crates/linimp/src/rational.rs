//! Exact rational arithmetic helpers used by the exact-mode tableau and lift
//! constructions and by golden-coefficient verification.

use crate::error::LinimpError;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Rational = BigRational;

pub fn rat(num: i64, den: i64) -> Rational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

pub fn rat_to_f64(r: &Rational) -> f64 {
    r.to_f64().expect("rational out of f64 range")
}

/// Parse "1/3", "-5/72", "0.25" or "3" as an exact rational.
pub fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    if let Some((num, den)) = s.split_once('/') {
        let n: BigInt = num.trim().parse().ok()?;
        let d: BigInt = den.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(BigRational::new(n, d));
    }
    if let Some((int, frac)) = s.split_once('.') {
        let neg = int.trim_start().starts_with('-');
        let i: BigInt = if int == "-" || int.is_empty() {
            BigInt::zero()
        } else {
            int.parse().ok()?
        };
        let digits = frac.trim();
        if digits.is_empty() {
            return Some(BigRational::from_integer(i));
        }
        let f: BigInt = digits.parse().ok()?;
        if f.is_negative() {
            return None;
        }
        let den = BigInt::from(10u32).pow(digits.len() as u32);
        let frac_part = BigRational::new(f, den);
        let int_part = BigRational::from_integer(i);
        Some(if neg {
            int_part - frac_part
        } else {
            int_part + frac_part
        })
    } else {
        let i: BigInt = s.parse().ok()?;
        Some(BigRational::from_integer(i))
    }
}

/// Best rational approximation of `x` with denominator at most `max_den`,
/// via the continued fraction expansion. Returns `None` when no convergent
/// matches `x` to within `tol`.
pub fn reconstruct_rational(x: f64, max_den: u64, tol: f64) -> Option<Rational> {
    if !x.is_finite() {
        return None;
    }
    let mut h_prev = BigInt::zero();
    let mut h = BigInt::one();
    let mut k_prev = BigInt::one();
    let mut k = BigInt::zero();
    let mut v = x;
    for _ in 0..64 {
        let a = v.floor();
        if a.abs() > 1e18 {
            break;
        }
        let ai = BigInt::from(a as i64);
        let h_next = &ai * &h + &h_prev;
        let k_next = &ai * &k + &k_prev;
        if k_next > BigInt::from(max_den) {
            break;
        }
        h_prev = std::mem::replace(&mut h, h_next);
        k_prev = std::mem::replace(&mut k, k_next);
        let r = BigRational::new(h.clone(), k.clone());
        let approx = rat_to_f64(&r);
        if (approx - x).abs() <= tol * x.abs().max(1.0) {
            return Some(r);
        }
        let frac = v - a;
        if frac.abs() < 1e-15 {
            break;
        }
        v = 1.0 / frac;
    }
    None
}

/// Solve a dense square rational system by exact Gaussian elimination.
pub fn solve_rational(
    mut a: Vec<Vec<Rational>>,
    mut b: Vec<Rational>,
) -> Result<Vec<Rational>, LinimpError> {
    let n = b.len();
    assert!(a.len() == n && a.iter().all(|r| r.len() == n));
    for k in 0..n {
        let p = (k..n)
            .find(|&i| !a[i][k].is_zero())
            .ok_or(LinimpError::SingularSystem)?;
        a.swap(k, p);
        b.swap(k, p);
        for i in (k + 1)..n {
            if a[i][k].is_zero() {
                continue;
            }
            let m = &a[i][k] / &a[k][k];
            for j in k..n {
                let v = &a[k][j] * &m;
                a[i][j] -= v;
            }
            let v = &b[k] * &m;
            b[i] -= v;
        }
    }
    let mut x = vec![Rational::zero(); n];
    for k in (0..n).rev() {
        let mut acc = b[k].clone();
        for j in (k + 1)..n {
            acc -= &a[k][j] * &x[j];
        }
        x[k] = acc / &a[k][k];
    }
    Ok(x)
}

/// Render as "p/q" (or "p" for integers).
pub fn format_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        format!("{}", r.numer())
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_forms() {
        assert_eq!(parse_rational("1/3").unwrap(), rat(1, 3));
        assert_eq!(parse_rational("-5/72").unwrap(), rat(-5, 72));
        assert_eq!(parse_rational("0.25").unwrap(), rat(1, 4));
        assert_eq!(parse_rational("-0.5").unwrap(), rat(-1, 2));
        assert_eq!(parse_rational("3").unwrap(), rat(3, 1));
        assert!(parse_rational("1/0").is_none());
    }

    #[test]
    fn reconstruct_published_fractions() {
        // order-6 lift coefficients have denominators up to 500000
        let cases = [
            (2783.0 / 320.0, rat(2783, 320)),
            (193389.0 / 125000.0, rat(193389, 125000)),
            (1111047.0 / 250000.0, rat(1111047, 250000)),
            (21.0 / 2560.0, rat(21, 2560)),
        ];
        for (x, want) in cases {
            let got = reconstruct_rational(x, 10_000_000, 1e-12).unwrap();
            assert_eq!(got, want);
        }
    }

    #[test]
    fn gaussian_elimination_exact() {
        // 2x + y = 5, x - y = 1  ->  x = 2, y = 1
        let a = vec![vec![rat(2, 1), rat(1, 1)], vec![rat(1, 1), rat(-1, 1)]];
        let b = vec![rat(5, 1), rat(1, 1)];
        let x = solve_rational(a, b).unwrap();
        assert_eq!(x, vec![rat(2, 1), rat(1, 1)]);
    }
}
