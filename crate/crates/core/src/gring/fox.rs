use std::sync::Arc;

use num_bigint::BigInt;

use crate::error::{Error, Result};
use crate::groups::{FiniteGroup, Word};

use super::{LaurentElement, ModuleElement};

fn check_word(w: &Word, images: &[(usize, i64)]) -> Result<()> {
    match w.letters.iter().find(|l| l.gen >= images.len()) {
        Some(l) => Err(Error::UndeclaredGenerator(format!("generator index {}", l.gen))),
        None => Ok(()),
    }
}

fn letter_image(group: &FiniteGroup, img: (usize, i64), exp: i8) -> (usize, i64) {
    if exp > 0 {
        img
    } else {
        (group.inv(img.0), -img.1)
    }
}

/// Image of `w` in G×C, given images (element, c-power) of the generators.
pub fn word_image(w: &Word, group: &FiniteGroup, images: &[(usize, i64)]) -> (usize, i64) {
    w.letters.iter().fold((0, 0), |(g, k), l| {
        let (h, j) = letter_image(group, images[l.gen], l.exp);
        (group.mul(g, h), k + j)
    })
}

/// Left Fox derivative ∂w/∂x, with ∂(uv) = ∂u + u·∂v.
pub fn fox_derivative(w: &Word, x: usize, group: &Arc<FiniteGroup>, images: &[(usize, i64)]) -> Result<LaurentElement> {
    check_word(w, images)?;
    if x >= images.len() {
        return Err(Error::UndeclaredGenerator(format!("generator index {x}")));
    }
    let mut out = LaurentElement::zero(group.clone());
    let mut prefix = (0usize, 0i64);
    for l in &w.letters {
        let (h, j) = letter_image(group, images[l.gen], l.exp);
        if l.gen == x {
            if l.exp > 0 {
                out.add_term(prefix.0, prefix.1, BigInt::from(1));
            } else {
                // u·(−x⁻¹) = −(u x⁻¹)
                out.add_term(group.mul(prefix.0, h), prefix.1 + j, BigInt::from(-1));
            }
        }
        prefix = (group.mul(prefix.0, h), prefix.1 + j);
    }
    Ok(out)
}

/// Right Fox derivative, with ∂(uv) = ∂u·v + ∂v and w − 1 = Σ (x − 1)·∂w/∂x.
pub fn fox_derivative_right(w: &Word, x: usize, group: &Arc<FiniteGroup>, images: &[(usize, i64)]) -> Result<LaurentElement> {
    check_word(w, images)?;
    if x >= images.len() {
        return Err(Error::UndeclaredGenerator(format!("generator index {x}")));
    }
    let mut out = LaurentElement::zero(group.clone());
    let mut suffix = (0usize, 0i64);
    for l in w.letters.iter().rev() {
        let (h, j) = letter_image(group, images[l.gen], l.exp);
        if l.gen == x {
            if l.exp > 0 {
                out.add_term(suffix.0, suffix.1, BigInt::from(1));
            } else {
                out.add_term(group.mul(h, suffix.0), suffix.1 + j, BigInt::from(-1));
            }
        }
        suffix = (group.mul(h, suffix.0), suffix.1 + j);
    }
    Ok(out)
}

/// All left derivatives of `w`, as a row in ℤH^d.
pub fn fox_row(w: &Word, group: &Arc<FiniteGroup>, images: &[(usize, i64)]) -> Result<ModuleElement> {
    Ok(ModuleElement::new((0..images.len()).map(|x| fox_derivative(w, x, group, images)).collect::<Result<_>>()?))
}

/// A word with its left Fox derivatives.
#[derive(Clone, Debug)]
pub struct FoxImage {
    pub word: Word,
    pub derivatives: ModuleElement,
    images: Vec<(usize, i64)>,
}

impl FoxImage {
    pub fn new(word: Word, group: &Arc<FiniteGroup>, images: &[(usize, i64)]) -> Result<Self> {
        let derivatives = fox_row(&word, group, images)?;
        Ok(FoxImage { word, derivatives, images: images.to_vec() })
    }

    /// Σ_x (∂w/∂x)(x − 1) − (w − 1); zero iff the fundamental identity holds.
    pub fn fundamental_residue(&self) -> Result<LaurentElement> {
        let group = self.derivatives.coords.first().map(|c| c.group().clone());
        let Some(group) = group else { return Ok(LaurentElement::zero(Arc::new(FiniteGroup::trivial()))) };
        let one = LaurentElement::one(group.clone());
        let mut lhs = LaurentElement::zero(group.clone());
        for (d, &(g, k)) in self.derivatives.coords.iter().zip(&self.images) {
            let xm1 = LaurentElement::monomial(group.clone(), g, k, BigInt::from(1)).sub(&one)?;
            lhs = lhs.add(&d.mul(&xm1)?)?;
        }
        let (g, k) = word_image(&self.word, &group, &self.images);
        let rhs = LaurentElement::monomial(group, g, k, BigInt::from(1)).sub(&one)?;
        lhs.sub(&rhs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup(n: u64) -> (Arc<FiniteGroup>, Vec<(usize, i64)>, Vec<String>) {
        let g = Arc::new(FiniteGroup::cyclic(n).unwrap());
        let a = g.generators()[0];
        (g, vec![(a, 0), (0, 1)], vec!["x".into(), "c".into()])
    }

    #[test]
    fn fox_examples() {
        let (g, img, al) = setup(3);
        let xn = Word::parse("x^3", &al).unwrap();
        assert_eq!(fox_derivative(&xn, 0, &g, &img).unwrap(), LaurentElement::ghat(g.clone()));
        let comm = Word::parse("[x,c]", &al).unwrap();
        let one = LaurentElement::one(g.clone());
        let c = LaurentElement::c_pow(g.clone(), 1);
        let a = LaurentElement::element(g.clone(), g.generators()[0]);
        assert_eq!(fox_derivative(&comm, 0, &g, &img).unwrap(), one.sub(&c).unwrap());
        assert_eq!(fox_derivative(&comm, 1, &g, &img).unwrap(), a.sub(&one).unwrap());
        let x = Word::parse("x", &al).unwrap();
        assert_eq!(fox_derivative(&x, 0, &g, &img).unwrap(), one);
        assert!(fox_derivative(&Word::parse("c", &al).unwrap(), 0, &g, &img).unwrap().is_zero());
        assert!(matches!(fox_derivative(&x, 5, &g, &img), Err(Error::UndeclaredGenerator(_))));
    }

    #[test]
    fn right_derivative_identity() {
        let (g, img, al) = setup(4);
        let w = Word::parse("x c^-1 x^2 [c,x] c", &al).unwrap();
        let one = LaurentElement::one(g.clone());
        let mut lhs = LaurentElement::zero(g.clone());
        for (x, &(e, k)) in img.iter().enumerate() {
            let xm1 = LaurentElement::monomial(g.clone(), e, k, BigInt::from(1)).sub(&one).unwrap();
            lhs = lhs.add(&xm1.mul(&fox_derivative_right(&w, x, &g, &img).unwrap()).unwrap()).unwrap();
        }
        let (e, k) = word_image(&w, &g, &img);
        assert_eq!(lhs, LaurentElement::monomial(g, e, k, BigInt::from(1)).sub(&one).unwrap());
    }
}
