//! Clebsch-Gordan coefficients from the Racah closed form, evaluated in exact
//! rational arithmetic and rounded once at the end.

use std::cell::RefCell;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{domain, Result};

thread_local! {
    static FACTORIALS: RefCell<Vec<BigInt>> = RefCell::new(vec![BigInt::one()]);
}

fn factorial(n: i64) -> BigInt {
    debug_assert!(n >= 0);
    FACTORIALS.with(|cache| {
        let mut cache = cache.borrow_mut();
        while cache.len() <= n as usize {
            let next = cache.last().unwrap() * BigInt::from(cache.len());
            cache.push(next);
        }
        cache[n as usize].clone()
    })
}

fn check_pair(tj: i32, tm: i32) -> Result<()> {
    if tj < 0 || tm.abs() > tj || (tj - tm) % 2 != 0 {
        return domain(format!("invalid angular momentum pair (2j, 2m) = ({tj}, {tm})"));
    }
    Ok(())
}

/// `<j1 m1; j2 m2 | J M>` with Condon-Shortley phases. All arguments are
/// doubled quantum numbers. Returns 0 when `M ≠ m1 + m2` or `J` violates the
/// triangle rule.
pub fn clebsch_gordan(tj1: i32, tm1: i32, tj2: i32, tm2: i32, tj: i32, tm: i32) -> Result<f64> {
    check_pair(tj1, tm1)?;
    check_pair(tj2, tm2)?;
    check_pair(tj, tm)?;
    if tm1 + tm2 != tm || tj < (tj1 - tj2).abs() || tj > tj1 + tj2 {
        return Ok(0.0);
    }
    if (tj1 + tj2 + tj) % 2 != 0 {
        return Ok(0.0);
    }

    // Integer combinations appearing in the Racah formula.
    let h = |x: i32| -> i64 { (x / 2) as i64 };
    let a = h(tj1 + tj2 - tj); // j1+j2-J
    let b = h(tj1 - tm1); // j1-m1
    let c = h(tj2 + tm2); // j2+m2
    let d = h(tj - tj2 + tm1); // J-j2+m1
    let e = h(tj - tj1 - tm2); // J-j1-m2

    let k_min = 0.max(-d).max(-e);
    let k_max = a.min(b).min(c);

    let mut sum = BigRational::zero();
    for k in k_min..=k_max {
        let denom = factorial(k)
            * factorial(a - k)
            * factorial(b - k)
            * factorial(c - k)
            * factorial(d + k)
            * factorial(e + k);
        let term = BigRational::new(BigInt::one(), denom);
        if k % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
    }
    if sum.is_zero() {
        return Ok(0.0);
    }

    let radicand_num = BigInt::from(tj + 1)
        * factorial(h(tj + tj1 - tj2))
        * factorial(h(tj - tj1 + tj2))
        * factorial(a)
        * factorial(h(tj + tm))
        * factorial(h(tj - tm))
        * factorial(h(tj1 - tm1))
        * factorial(h(tj1 + tm1))
        * factorial(h(tj2 - tm2))
        * factorial(h(tj2 + tm2));
    let radicand = BigRational::new(radicand_num, factorial(h(tj1 + tj2 + tj) + 1));

    let squared = radicand * &sum * &sum;
    let magnitude = squared.to_f64().expect("finite CG magnitude").sqrt();
    Ok(if sum.is_negative() { -magnitude } else { magnitude })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stretched_and_singlet() {
        assert_eq!(clebsch_gordan(1, 1, 1, 1, 2, 2).unwrap(), 1.0);
        let s = clebsch_gordan(1, 1, 1, -1, 0, 0).unwrap();
        assert!((s - 1.0 / 2f64.sqrt()).abs() < 1e-15);
        let s2 = clebsch_gordan(1, -1, 1, 1, 0, 0).unwrap();
        assert!((s2 + 1.0 / 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn selection_rules_and_domain() {
        assert_eq!(clebsch_gordan(3, 1, 2, 0, 3, 3).unwrap(), 0.0);
        assert_eq!(clebsch_gordan(1, 1, 1, 1, 6, 2).unwrap(), 0.0);
        assert!(clebsch_gordan(1, 3, 1, 1, 2, 4).is_err());
        assert!(clebsch_gordan(2, 1, 1, 1, 2, 2).is_err());
    }

    #[test]
    fn known_values() {
        // <1 0; 1 0 | 2 0> = sqrt(2/3), <1 1; 1 -1 | 1 0> = 1/sqrt(2)
        let v = clebsch_gordan(2, 0, 2, 0, 4, 0).unwrap();
        assert!((v - (2.0f64 / 3.0).sqrt()).abs() < 1e-15);
        let w = clebsch_gordan(2, 2, 2, -2, 2, 0).unwrap();
        assert!((w - 0.5f64.sqrt()).abs() < 1e-15);
        // <1 0; 1 0 | 1 0> vanishes by symmetry
        assert_eq!(clebsch_gordan(2, 0, 2, 0, 2, 0).unwrap(), 0.0);
    }
}
