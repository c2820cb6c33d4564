//! Small integer helpers: factorization, sieves, extended gcd.

use num_integer::Integer;

/// Prime factorization by trial division, primes in increasing order.
pub fn factorize(mut m: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2u64;
    while p * p <= m {
        if m.is_multiple_of(p) {
            let mut e = 0;
            while m.is_multiple_of(p) {
                m /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if m > 1 {
        out.push((m, 1));
    }
    out
}

pub fn is_prime(m: u64) -> bool {
    m >= 2 && factorize(m) == [(m, 1)]
}

/// Primes up to and including `bound`.
pub fn primes_up_to(bound: usize) -> Vec<u64> {
    smallest_prime_factors(bound)
        .iter()
        .enumerate()
        .filter(|&(i, &p)| i >= 2 && p as usize == i)
        .map(|(i, _)| i as u64)
        .collect()
}

/// spf[n] = smallest prime factor of n (spf[0] = spf[1] = 0).
pub fn smallest_prime_factors(bound: usize) -> Vec<u32> {
    let mut spf = vec![0u32; bound + 1];
    for i in 2..=bound {
        if spf[i] == 0 {
            let mut j = i;
            while j <= bound {
                if spf[j] == 0 {
                    spf[j] = i as u32;
                }
                j += i;
            }
        }
    }
    spf
}

/// All positive divisors in increasing order.
pub fn divisors(m: u64) -> Vec<u64> {
    let mut out = vec![1u64];
    for (p, e) in factorize(m) {
        let len = out.len();
        let mut pk = 1;
        for _ in 0..e {
            pk *= p;
            for i in 0..len {
                out.push(out[i] * pk);
            }
        }
    }
    out.sort_unstable();
    out
}

/// (g, a, b) with a·x + b·y = g = gcd(x, y) ≥ 0.
pub fn ext_gcd(x: i64, y: i64) -> (i64, i64, i64) {
    let e = x.extended_gcd(&y);
    if e.gcd < 0 {
        (-e.gcd, -e.x, -e.y)
    } else {
        (e.gcd, e.x, e.y)
    }
}

pub fn gcd(x: i64, y: i64) -> i64 {
    x.gcd(&y)
}

pub fn gcd3(v: [i64; 3]) -> i64 {
    gcd(gcd(v[0], v[1]), v[2])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factor_and_divisors() {
        assert_eq!(factorize(360), vec![(2, 3), (3, 2), (5, 1)]);
        assert_eq!(factorize(1), vec![]);
        assert_eq!(divisors(12), vec![1, 2, 3, 4, 6, 12]);
        assert_eq!(primes_up_to(20), vec![2, 3, 5, 7, 11, 13, 17, 19]);
    }

    #[test]
    fn bezout() {
        for &(x, y) in &[(12, 18), (-7, 3), (0, 5), (5, 0), (-4, -6)] {
            let (g, a, b) = ext_gcd(x, y);
            assert_eq!(a * x + b * y, g);
            assert_eq!(g, gcd(x, y));
        }
    }
}
