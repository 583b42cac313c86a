//! Orthomorphisms of the cyclic group `Z_p` and their transversals in `B_p`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::latin::{LatinSquare, Transversal};
use crate::modular::Modulus;

/// Candidate orthomorphism: `images[x]` is the image of `x`.
///
/// Construction does not validate; use [`orthomorphism_check`].
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Orthomorphism {
    pub p: Modulus,
    pub images: Vec<u32>,
}

impl Orthomorphism {
    pub fn new(p: Modulus, images: Vec<u32>) -> Self {
        Orthomorphism { p, images }
    }

    /// `x -> k x`.
    pub fn linear(p: Modulus, k: u32) -> Self {
        Orthomorphism {
            p,
            images: (0..p.get()).map(|x| p.mul(k, x)).collect(),
        }
    }

    pub fn from_fn(p: Modulus, f: impl Fn(u32) -> u32) -> Self {
        Orthomorphism {
            p,
            images: (0..p.get()).map(|x| p.reduce(f(x) as i64)).collect(),
        }
    }

    /// Reads an orthomorphism off a transversal of `B_p(1)`: the image of
    /// `x` is the symbol in row `x`.
    pub fn from_transversal(p: Modulus, bp: &LatinSquare, t: &Transversal) -> Result<Self> {
        if t.n != p.usize() || bp.order() != p.usize() {
            return Err(Error::OrderMismatch(p.usize(), t.n));
        }
        let mut images = vec![u32::MAX; p.usize()];
        for &(r, c) in &t.cells {
            images[r] = bp.get(r, c);
        }
        if images.contains(&u32::MAX) {
            return Err(Error::NotOrthomorphism("transversal misses a row".into()));
        }
        Ok(Orthomorphism { p, images })
    }
}

/// True iff `phi` and `x -> phi(x) - x` are both permutations of `Z_p`.
pub fn orthomorphism_check(phi: &Orthomorphism) -> Result<bool> {
    let p = phi.p;
    let n = p.usize();
    if phi.images.len() != n {
        return Err(Error::NotOrthomorphism(format!("{} images for p = {}", phi.images.len(), n)));
    }
    if let Some(&bad) = phi.images.iter().find(|&&v| v as usize >= n) {
        return Err(Error::CellOutOfRange { row: bad as usize, col: 0, n });
    }
    let mut img = vec![false; n];
    let mut diff = vec![false; n];
    for (x, &y) in phi.images.iter().enumerate() {
        let d = p.sub(y, x as u32) as usize;
        if std::mem::replace(&mut img[y as usize], true) || std::mem::replace(&mut diff[d], true) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// The transversal `{(x, phi(x) - x)}` of `B_p(1)`; the symbol at row `x`
/// is `phi(x)`.
pub fn transversal_from_orthomorphism(phi: &Orthomorphism) -> Result<Transversal> {
    if !orthomorphism_check(phi)? {
        return Err(Error::NotOrthomorphism("fails the permutation conditions".into()));
    }
    let p = phi.p;
    Ok(Transversal {
        n: p.usize(),
        cells: phi
            .images
            .iter()
            .enumerate()
            .map(|(x, &y)| (x, p.sub(y, x as u32) as usize))
            .collect(),
    })
}

/// Number of points where the two maps differ.
pub fn orthomorphism_distance(phi: &Orthomorphism, psi: &Orthomorphism) -> Result<usize> {
    if phi.p != psi.p || phi.images.len() != psi.images.len() {
        return Err(Error::ModulusMismatch(phi.p.get(), psi.p.get()));
    }
    Ok(phi.images.iter().zip(&psi.images).filter(|(a, b)| a != b).count())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::latin::{back_circulant, is_transversal};

    fn m(p: u32) -> Modulus {
        Modulus::prime(p).unwrap()
    }

    #[test]
    fn linear_maps_are_orthomorphisms() {
        assert!(orthomorphism_check(&Orthomorphism::linear(m(7), 2)).unwrap());
        assert!(!orthomorphism_check(&Orthomorphism::linear(m(7), 1)).unwrap());
        for k in 2..11 {
            assert!(orthomorphism_check(&Orthomorphism::linear(m(11), k)).unwrap());
        }
    }

    #[test]
    fn check_rejects_malformed() {
        assert!(orthomorphism_check(&Orthomorphism::new(m(5), vec![0, 1])).is_err());
        assert!(orthomorphism_check(&Orthomorphism::new(m(5), vec![0, 1, 2, 3, 7])).is_err());
    }

    #[test]
    fn transversals_from_orthomorphisms() {
        let t = transversal_from_orthomorphism(&Orthomorphism::linear(m(7), 2)).unwrap();
        assert_eq!(t, Transversal::from_columns(&[0, 1, 2, 3, 4, 5, 6]));
        let t3 = transversal_from_orthomorphism(&Orthomorphism::linear(m(7), 3)).unwrap();
        assert!(t3.cells.iter().all(|&(x, c)| c == (2 * x) % 7));

        let phi = Orthomorphism::from_fn(m(5), |x| 2 * x + 1);
        let t = transversal_from_orthomorphism(&phi).unwrap();
        let b5 = back_circulant(m(5));
        assert!(t.cells.iter().all(|&(x, c)| c == (x + 1) % 5));
        assert!(is_transversal(&b5, &t).unwrap());
        for &(x, c) in &t.cells {
            assert_eq!(b5.get(x, c), phi.images[x]);
        }
        assert!(transversal_from_orthomorphism(&Orthomorphism::linear(m(5), 1)).is_err());
    }

    #[test]
    fn distances() {
        let a = Orthomorphism::linear(m(7), 2);
        let b = Orthomorphism::linear(m(7), 3);
        assert_eq!(orthomorphism_distance(&a, &a).unwrap(), 0);
        assert_eq!(orthomorphism_distance(&a, &b).unwrap(), 6);
        assert!(orthomorphism_distance(&a, &Orthomorphism::linear(m(5), 2)).is_err());
    }

    #[test]
    fn json_shape() {
        let phi = Orthomorphism::linear(m(5), 2);
        let s = serde_json::to_string(&phi).unwrap();
        assert_eq!(s, r#"{"p":5,"images":[0,2,4,1,3]}"#);
        let back: Orthomorphism = serde_json::from_str(&s).unwrap();
        assert_eq!(back, phi);
    }
}
