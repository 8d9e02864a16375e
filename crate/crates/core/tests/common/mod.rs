use std::collections::HashSet;

use anticyclo::bqf::{Form, FormInt};

pub fn check_laws<T>(f: &Form<T>, g: &Form<T>, h: &Form<T>, one: &Form<T>)
where
    T: FormInt,
{
    let fg = f.mul(g);
    assert!(fg.is_reduced());
    assert_eq!(fg.discriminant(), f.discriminant());
    assert_eq!(fg, g.mul(f));
    assert_eq!(fg.mul(h), f.mul(&g.mul(h)));
    assert_eq!(f.mul(one), *f);
    assert!(f.mul(&f.inverse()).is_principal());
    assert_eq!(f.pow(3), f.mul(f).mul(f));
}

pub fn partitions(k: u32, max: u32) -> Vec<Vec<u32>> {
    if k == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for first in (1..=k.min(max)).rev() {
        for mut rest in partitions(k - first, first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// All elements of `⊕ Z/p^e_i` as coordinate vectors.
pub fn elements(p: u64, e: &[u32]) -> Vec<Vec<u64>> {
    let mut out = vec![vec![]];
    for &ei in e {
        let m = p.pow(ei);
        out = out
            .into_iter()
            .flat_map(|v| {
                (0..m).map(move |x| {
                    let mut w = v.clone();
                    w.push(x);
                    w
                })
            })
            .collect();
    }
    out
}

pub fn element_order(p: u64, e: &[u32], x: &[u64]) -> u32 {
    x.iter()
        .zip(e)
        .map(|(&xi, &ei)| (0..=ei).find(|&o| xi * p.pow(o) % p.pow(ei) == 0).unwrap())
        .max()
        .unwrap_or(0)
}

/// Surjections onto `Z/p^n`, by listing every homomorphism and its image.
pub fn brute_surjections(p: u64, e: &[u32], n: u32) -> u64 {
    let target = p.pow(n);
    let elems = elements(p, e);
    let admissible: Vec<Vec<u64>> = e
        .iter()
        .map(|&ei| {
            (0..target)
                .filter(|&x| x * p.pow(ei) % target == 0)
                .collect()
        })
        .collect();
    let mut homs: Vec<Vec<u64>> = vec![vec![]];
    for a in &admissible {
        homs = homs
            .into_iter()
            .flat_map(|h| {
                a.iter().map(move |&x| {
                    let mut w = h.clone();
                    w.push(x);
                    w
                })
            })
            .collect();
    }
    homs.iter()
        .filter(|img| {
            let image: HashSet<u64> = elems
                .iter()
                .map(|g| g.iter().zip(img.iter()).map(|(c, x)| c * x).sum::<u64>() % target)
                .collect();
            image.len() as u64 == target
        })
        .count() as u64
}
