use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::latin::gen_bp;
use crate::modular::Modulus;
use crate::orthomorphism::{orthomorphism_distance, Orthomorphism};

use super::transversals::for_each_transversal;
use super::EXHAUSTIVE_ORDER_CAP;

/// Every orthomorphism of `Z_p`, read off the transversals of `B_p(1)` in
/// their enumeration order.
pub fn enumerate_orthomorphisms(p: Modulus, force: bool) -> Result<Vec<Orthomorphism>> {
    if p.usize() > EXHAUSTIVE_ORDER_CAP && !force {
        return Err(Error::OrderCap { n: p.usize(), cap: EXHAUSTIVE_ORDER_CAP });
    }
    let b = gen_bp(p, 1)?;
    let mut out = Vec::new();
    for_each_transversal(&b, &mut |cols| {
        let images = cols.iter().enumerate().map(|(x, &c)| p.add(x as u32, c as u32)).collect();
        out.push(Orthomorphism::new(p, images));
    });
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistanceReport {
    pub p: Modulus,
    pub k: u32,
    pub orthomorphisms: usize,
    /// Fewest points where another orthomorphism differs from `x -> kx`.
    pub min_distance: usize,
    /// An orthomorphism attaining `min_distance`, first in enumeration order.
    pub witness: Orthomorphism,
    /// `log_K(p) + 1` with `K = min(k, k^{-1})`.
    pub bound: f64,
    pub exceeds_bound: bool,
}

/// Tolerance when comparing integer distances against the real bound.
pub const DISTANCE_EPS: f64 = 1e-9;

pub fn min_distance_from_linear(p: Modulus, k: u32, force: bool) -> Result<DistanceReport> {
    p.require_prime()?;
    if k < 2 || k >= p.get() {
        return Err(Error::IndexOutOfRange { k, p: p.get() });
    }
    let linear = Orthomorphism::linear(p, k);
    let all = enumerate_orthomorphisms(p, force)?;
    let mut best: Option<(usize, &Orthomorphism)> = None;
    for phi in &all {
        let d = orthomorphism_distance(&linear, phi)?;
        if d > 0 && best.is_none_or(|(b, _)| d < b) {
            best = Some((d, phi));
        }
    }
    let (min_distance, witness) = best.ok_or_else(|| Error::NotOrthomorphism("no other orthomorphism".into()))?;
    let k_min = k.min(p.inv(k)?);
    let bound = (p.get() as f64).ln() / (k_min as f64).ln() + 1.0;
    Ok(DistanceReport {
        p,
        k,
        orthomorphisms: all.len(),
        min_distance,
        witness: witness.clone(),
        bound,
        exceeds_bound: min_distance as f64 > bound - DISTANCE_EPS,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::orthomorphism::orthomorphism_check;

    #[test]
    fn counts_and_validity() {
        let p5 = Modulus::prime(5).unwrap();
        let all = enumerate_orthomorphisms(p5, false).unwrap();
        assert_eq!(all.len(), 15);
        assert!(all.iter().all(|o| orthomorphism_check(o).unwrap()));
        assert_eq!(enumerate_orthomorphisms(Modulus::prime(7).unwrap(), false).unwrap().len(), 133);
    }

    #[test]
    fn p7_distance_from_doubling() {
        let r = min_distance_from_linear(Modulus::prime(7).unwrap(), 2, false).unwrap();
        assert!(r.min_distance >= 4);
        assert!(r.exceeds_bound);
        assert_eq!(orthomorphism_distance(&Orthomorphism::linear(r.p, 2), &r.witness).unwrap(), r.min_distance);
    }
}
