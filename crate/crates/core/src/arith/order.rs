use super::prime::OddPrime;
use super::residue::Residue;
use super::ring::Modulus;
use crate::error::{Error, Result};

/// Order of `a` in `(Z/pZ)^*`.
pub fn mult_order(a: u64, p: OddPrime) -> Result<u64> {
    let m = Modulus::new(p.get());
    let a = m.reduce(a);
    if a == 0 {
        return Err(Error::ZeroResidue(a));
    }
    let mut d = p.get() - 1;
    for q in prime_factors(p.get() - 1) {
        while d % q == 0 && m.pow(a, d / q) == 1 {
            d /= q;
        }
    }
    Ok(d)
}

/// Order of a level-1 residue.
pub fn residue_order(a: Residue) -> Result<u64> {
    if a.level() != 1 {
        return Err(Error::Precondition(format!(
            "multiplicative order needs a level-1 residue, got level {}",
            a.level()
        )));
    }
    mult_order(a.value(), a.prime())
}

fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut q = 2;
    while q * q <= n {
        if n % q == 0 {
            out.push(q);
            while n % q == 0 {
                n /= q;
            }
        }
        q += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pr(p: u64) -> OddPrime {
        OddPrime::new(p).unwrap()
    }

    #[test]
    fn examples() {
        assert_eq!(mult_order(1, pr(7)), Ok(1));
        assert_eq!(mult_order(2, pr(7)), Ok(3));
        assert_eq!(mult_order(2, pr(5)), Ok(4));
        assert_eq!(mult_order(10, pr(5)), Err(Error::ZeroResidue(0)));
    }

    #[test]
    fn order_is_minimal_and_divides_p_minus_one() {
        for p in [3u64, 5, 7, 11, 13, 31, 97] {
            let m = Modulus::new(p);
            for a in 1..p {
                let d = mult_order(a, pr(p)).unwrap();
                assert_eq!((p - 1) % d, 0);
                assert_eq!(m.pow(a, d), 1);
                assert!((1..d).all(|e| m.pow(a, e) != 1));
            }
        }
    }

    #[test]
    fn residue_wrapper_checks_level() {
        let r = Residue::new(2, pr(5), 1).unwrap();
        assert_eq!(residue_order(r), Ok(4));
        let r2 = Residue::new(2, pr(5), 2).unwrap();
        assert!(residue_order(r2).is_err());
    }
}
