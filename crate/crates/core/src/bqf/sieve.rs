//! Reduced-form enumeration by factoring `(b² - D)/4` with a smallest-prime-factor table.
//!
//! Equivalent to the direct scan but visits only the divisors of each
//! `(b² - D)/4`, which makes class numbers of millions of discriminants cheap.

use num_integer::Integer;

use super::{reduced_forms_small, SmallForm};

pub struct DivisorSieve {
    spf: Vec<u32>,
}

impl DivisorSieve {
    /// Table covering every `n <= limit`.
    pub fn new(limit: u64) -> Self {
        let limit = limit.max(2) as usize;
        let mut spf = vec![0u32; limit + 1];
        for i in 2..=limit {
            if spf[i] == 0 {
                spf[i] = i as u32;
                if (i as u64) * (i as u64) <= limit as u64 {
                    let mut j = i * i;
                    while j <= limit {
                        if spf[j] == 0 {
                            spf[j] = i as u32;
                        }
                        j += i;
                    }
                }
            }
        }
        Self { spf }
    }

    /// Sieve large enough for discriminants with `|D| <= max_abs_disc`.
    pub fn for_discriminants(max_abs_disc: u64) -> Self {
        Self::new(max_abs_disc / 3 + 1)
    }

    pub fn limit(&self) -> u64 {
        (self.spf.len() - 1) as u64
    }

    fn covers(&self, abs_disc: u64) -> bool {
        abs_disc / 3 < self.limit()
    }

    fn factor(&self, mut n: u64, out: &mut Vec<(u64, u32)>) {
        out.clear();
        while n > 1 {
            let p = self.spf[n as usize] as u64;
            let mut e = 0;
            while n.is_multiple_of(p) {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
    }

    /// Reduced primitive forms of discriminant `disc`, sorted by `(a, b)`.
    /// Falls back to the direct scan outside the table.
    pub fn reduced_forms(&self, disc: i64) -> Vec<SmallForm> {
        let n = disc.unsigned_abs();
        if !self.covers(n) {
            return reduced_forms_small(disc);
        }
        let mut out = Vec::new();
        let mut fac = Vec::new();
        let mut divs = Vec::new();
        let mut b = n & 1;
        while 3 * b * b <= n {
            let big_n = (b * b + n) / 4;
            self.factor(big_n, &mut fac);
            divs.clear();
            divs.push(1u64);
            for &(p, e) in &fac {
                let len = divs.len();
                let mut pk = 1;
                for _ in 0..e {
                    pk *= p;
                    for i in 0..len {
                        divs.push(divs[i] * pk);
                    }
                }
            }
            for &a in &divs {
                if a < b.max(1) || a * a > big_n {
                    continue;
                }
                let c = big_n / a;
                if a.gcd(&b).gcd(&c) != 1 {
                    continue;
                }
                let (a, bb, c) = (a as i128, b as i128, c as i128);
                out.push(SmallForm::from_parts_unchecked(a, bb, c));
                if bb != 0 && bb != a && a != c {
                    out.push(SmallForm::from_parts_unchecked(a, -bb, c));
                }
            }
            b += 2;
        }
        out.sort();
        out
    }

    pub fn class_number(&self, disc: i64) -> u64 {
        self.reduced_forms(disc).len() as u64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_direct_scan() {
        let sieve = DivisorSieve::for_discriminants(200_000);
        for n in (3u64..20_000).chain(199_000..199_400) {
            if n % 4 != 0 && n % 4 != 3 {
                continue;
            }
            let d = -(n as i64);
            assert_eq!(sieve.reduced_forms(d), reduced_forms_small(d), "D={d}");
        }
    }

    #[test]
    fn falls_back_beyond_table() {
        let sieve = DivisorSieve::new(10);
        assert_eq!(sieve.reduced_forms(-1048), reduced_forms_small(-1048));
        assert_eq!(sieve.class_number(-1048), 6);
    }
}
