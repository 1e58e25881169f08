use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::groups::{FiniteGroup, Word};

use super::{fox_row, LaurentElement, ModuleElement};

/// H = C_n × C with presentation ⟨x, c | xⁿ, [x, c]⟩; the relation module S̄ sits in ℤH²
/// as the kernel of (λ_x, λ_c) ↦ λ_x(a − 1) + λ_c(c − 1).
#[derive(Clone, Debug)]
pub struct CyclicZ {
    n: u64,
    group: Arc<FiniteGroup>,
    a: usize,
    alphabet: Vec<String>,
}

impl CyclicZ {
    pub fn new(n: u64) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidGroup(format!("C{n}xZ needs n >= 2")));
        }
        let group = Arc::new(FiniteGroup::cyclic(n)?);
        let a = group.generators()[0];
        Ok(CyclicZ { n, group, a, alphabet: vec!["x".into(), "c".into()] })
    }

    pub fn n(&self) -> u64 {
        self.n
    }
    pub fn group(&self) -> &Arc<FiniteGroup> {
        &self.group
    }
    pub fn alphabet(&self) -> &[String] {
        &self.alphabet
    }
    pub fn images(&self) -> [(usize, i64); 2] {
        [(self.a, 0), (0, 1)]
    }

    /// Index of aʲ.
    pub fn a_index(&self, j: i64) -> usize {
        self.group.pow(self.a, j.rem_euclid(self.n as i64))
    }

    pub fn a_pow(&self, j: i64) -> LaurentElement {
        LaurentElement::element(self.group.clone(), self.a_index(j))
    }

    pub fn one(&self) -> LaurentElement {
        LaurentElement::one(self.group.clone())
    }

    pub fn c(&self, k: i64) -> LaurentElement {
        LaurentElement::c_pow(self.group.clone(), k)
    }

    pub fn int(&self, k: i64) -> LaurentElement {
        LaurentElement::integer(self.group.clone(), k)
    }

    pub fn ghat(&self) -> LaurentElement {
        LaurentElement::ghat(self.group.clone())
    }

    /// a − 1.
    pub fn a_minus_1(&self) -> LaurentElement {
        self.a_pow(1).sub(&self.one()).expect("same group")
    }

    pub fn fox(&self, relator: &str) -> Result<ModuleElement> {
        let w = Word::parse(relator, &self.alphabet)?;
        fox_row(&w, &self.group, &self.images())
    }

    /// Fox image of xⁿ: (Ĝ, 0).
    pub fn r1(&self) -> ModuleElement {
        self.fox(&format!("x^{}", self.n)).expect("valid relator")
    }

    /// Fox image of [x, c]: (1 − c, a − 1).
    pub fn r2(&self) -> ModuleElement {
        self.fox("[x,c]").expect("valid relator")
    }

    /// Fox image of [c, x] = −r₂: (c − 1, 1 − a).
    pub fn rho(&self) -> ModuleElement {
        self.fox("[c,x]").expect("valid relator")
    }

    /// Whether `v` lies in S̄.
    pub fn in_relation_module(&self, v: &ModuleElement) -> Result<bool> {
        if v.coords.len() != 2 {
            return Err(Error::ContextMismatch("expected a vector in ZH^2".into()));
        }
        let cm1 = self.c(1).sub(&self.one())?;
        Ok(v.coords[0].mul(&self.a_minus_1())?.add(&v.coords[1].mul(&cm1)?)?.is_zero())
    }

    /// Coordinates of u ∈ ΔG ⊗ ℤC in the basis (aʲ − 1) ⊗ cⁱ, j = 1..n−1.
    pub fn delta_coords(&self, u: &LaurentElement) -> Result<Vec<(i64, i64, BigInt)>> {
        let mut out = Vec::new();
        for (i, v) in u.terms() {
            let s: BigInt = v.iter().sum();
            if !s.is_zero() {
                return Err(Error::ContextMismatch(format!("element {u} is not in the augmentation ideal of G over ZC")));
            }
            for j in 1..self.n as i64 {
                let c = &v[self.a_index(j)];
                if !c.is_zero() {
                    out.push((j, i, c.clone()));
                }
            }
        }
        Ok(out)
    }

    /// τ((aʲ − 1) ⊗ cⁱ) = Fox([c, xʲ])·cⁱ, extended ℤ-linearly.
    pub fn tau(&self, u: &LaurentElement) -> Result<ModuleElement> {
        let mut out = ModuleElement::zero(self.group.clone(), 2);
        for (j, i, coeff) in self.delta_coords(u)? {
            let f = self.fox(&format!("[c,x^{j}]"))?;
            out = out.add(&f.act(&self.c(i))?.scale(&coeff))?;
        }
        Ok(out)
    }

    /// τĜ(v) = Σ_g τ(v g⁻¹)·g.
    pub fn tau_ghat(&self, u: &LaurentElement) -> Result<ModuleElement> {
        let mut out = ModuleElement::zero(self.group.clone(), 2);
        for g in 0..self.group.order() {
            let shifted = u.mul_group_right(self.group.inv(g));
            let t = self.tau(&shifted)?;
            out = out.add(&t.act(&LaurentElement::element(self.group.clone(), g))?)?;
        }
        Ok(out)
    }

    /// σ(λ_x, λ_c) = −λ_c, a left inverse of τ.
    pub fn sigma(&self, v: &ModuleElement) -> Result<LaurentElement> {
        match v.coords.as_slice() {
            [_, lc] => Ok(lc.neg()),
            _ => Err(Error::ContextMismatch("expected a vector in ZH^2".into())),
        }
    }

    /// z = τĜ((a − 1) ⊗ 1) − x̄ⁿ.
    pub fn z(&self) -> ModuleElement {
        self.tau_ghat(&self.a_minus_1()).and_then(|t| t.sub(&self.r1())).expect("well-formed")
    }

    /// n·[x,c]‾ − x̄ⁿ·c with [x,c]‾ read as the Fox image of [c, x].
    pub fn literal_z(&self) -> ModuleElement {
        let n = BigInt::from(self.n);
        self.rho().scale(&n).sub(&self.r1().act(&self.c(1)).expect("same group")).expect("same rank")
    }

    /// ψ(g)(u) = τ(u g⁻¹)·g − τ(u), the failure of τ to be G-equivariant.
    pub fn psi(&self, g: usize, u: &LaurentElement) -> Result<ModuleElement> {
        let t = self.tau(&u.mul_group_right(self.group.inv(g)))?.act(&LaurentElement::element(self.group.clone(), g))?;
        t.sub(&self.tau(u)?)
    }

    /// Whether ψ(g)(u) lies in S̄·(c − 1), i.e. vanishes on C-coinvariants.
    pub fn psi_vanishes_on_coinvariants(&self, g: usize, u: &LaurentElement) -> Result<bool> {
        let v = self.psi(g, u)?;
        let mut quotient = Vec::new();
        for coord in &v.coords {
            match coord.div_c_minus_1() {
                Some(q) => quotient.push(q),
                None => return Ok(false),
            }
        }
        self.in_relation_module(&ModuleElement::new(quotient))
    }
}
