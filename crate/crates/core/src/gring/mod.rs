//! Group rings ℤG and 𝔽_pG, the Laurent extension ℤ[G×C], Fox calculus and identity checking.

mod cyclic_z;
mod fox;
mod identity;
mod laurent;

use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::groups::FiniteGroup;

pub use cyclic_z::CyclicZ;
pub use fox::{fox_derivative, fox_derivative_right, fox_row, FoxImage};
pub use identity::{eval_expr, verify_identity, IdentityContext, IdentityOutcome, Value};
pub use laurent::{LaurentElement, ModuleElement};

pub(crate) fn same_group(a: &Arc<FiniteGroup>, b: &Arc<FiniteGroup>) -> bool {
    Arc::ptr_eq(a, b) || a.table() == b.table()
}

/// Element of ℤG, or of 𝔽_pG when `modulus` is set.
#[derive(Clone, Debug)]
pub struct GroupRingElement {
    group: Arc<FiniteGroup>,
    coeffs: Vec<BigInt>,
    modulus: Option<u64>,
}

impl PartialEq for GroupRingElement {
    fn eq(&self, other: &Self) -> bool {
        same_group(&self.group, &other.group) && self.modulus == other.modulus && self.coeffs == other.coeffs
    }
}

impl GroupRingElement {
    pub fn zero(group: Arc<FiniteGroup>) -> Self {
        let n = group.order();
        GroupRingElement { group, coeffs: vec![BigInt::zero(); n], modulus: None }
    }

    pub fn one(group: Arc<FiniteGroup>) -> Self {
        Self::element(group, 0)
    }

    pub fn element(group: Arc<FiniteGroup>, g: usize) -> Self {
        let mut e = Self::zero(group);
        e.coeffs[g] = BigInt::one();
        e
    }

    /// Ĝ = Σ_g g.
    pub fn ghat(group: Arc<FiniteGroup>) -> Self {
        let n = group.order();
        GroupRingElement { group, coeffs: vec![BigInt::one(); n], modulus: None }
    }

    pub fn from_coeffs(group: Arc<FiniteGroup>, coeffs: Vec<BigInt>) -> Result<Self> {
        if coeffs.len() != group.order() {
            return Err(Error::ShapeMismatch(format!("{} coefficients for a group of order {}", coeffs.len(), group.order())));
        }
        Ok(GroupRingElement { group, coeffs, modulus: None })
    }

    pub fn group(&self) -> &Arc<FiniteGroup> {
        &self.group
    }
    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }
    pub fn modulus(&self) -> Option<u64> {
        self.modulus
    }

    /// Image in 𝔽_pG.
    pub fn reduce_mod(&self, p: u64) -> Result<Self> {
        crate::exactla::check_prime(p)?;
        let m = BigInt::from(p);
        Ok(GroupRingElement { group: self.group.clone(), coeffs: self.coeffs.iter().map(|c| c.mod_floor(&m)).collect(), modulus: Some(p) })
    }

    fn check(&self, other: &Self) -> Result<()> {
        if !same_group(&self.group, &other.group) {
            return Err(Error::ContextMismatch(format!("{} vs {}", self.group.name(), other.group.name())));
        }
        if self.modulus != other.modulus {
            return Err(Error::ContextMismatch("coefficient domains differ".into()));
        }
        Ok(())
    }

    fn normalized(mut self) -> Self {
        if let Some(p) = self.modulus {
            let m = BigInt::from(p);
            for c in &mut self.coeffs {
                *c = c.mod_floor(&m);
            }
        }
        self
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect();
        Ok(GroupRingElement { coeffs, ..self.clone() }.normalized())
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(&BigInt::from(-1)))
    }

    pub fn scale(&self, k: &BigInt) -> Self {
        GroupRingElement { coeffs: self.coeffs.iter().map(|a| a * k).collect(), ..self.clone() }.normalized()
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let mut coeffs = vec![BigInt::zero(); self.group.order()];
        for (g, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (h, b) in other.coeffs.iter().enumerate() {
                if !b.is_zero() {
                    coeffs[self.group.mul(g, h)] += a * b;
                }
            }
        }
        Ok(GroupRingElement { coeffs, ..self.clone() }.normalized())
    }

    /// Coefficient sum, reduced mod p in 𝔽_pG.
    pub fn augment(&self) -> BigInt {
        let s: BigInt = self.coeffs.iter().sum();
        match self.modulus {
            Some(p) => s.mod_floor(&BigInt::from(p)),
            None => s,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ring_examples() {
        let g = Arc::new(FiniteGroup::cyclic(4).unwrap());
        let gh = GroupRingElement::ghat(g.clone());
        assert_eq!(gh.augment(), BigInt::from(4));
        let a = GroupRingElement::element(g.clone(), g.generators()[0]);
        let am1 = a.sub(&GroupRingElement::one(g.clone())).unwrap();
        assert!(am1.mul(&gh).unwrap().is_zero());
        assert_eq!(gh.mul(&gh).unwrap(), gh.scale(&BigInt::from(4)));
        let h = Arc::new(FiniteGroup::cyclic(3).unwrap());
        assert!(matches!(gh.add(&GroupRingElement::one(h)), Err(Error::ContextMismatch(_))));
        assert_eq!(gh.reduce_mod(2).unwrap().augment(), BigInt::zero());
    }
}
