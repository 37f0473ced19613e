//! Finite abelian groups H = Z_{d₁} × … × Z_{d_r}, their characters, maximal
//! subgroups and the pair sets S_{α,β}.
//!
//! Elements and characters are addressed by a row-major index (last factor
//! varies fastest); index 0 is the identity / trivial character.

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_ENUMERATION_CAP: u64 = 4096;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "GroupSpec", into = "GroupSpec")]
pub struct FiniteAbelianGroup {
    orders: Vec<u64>,
    size: u64,
    exponent: u64,
    strides: Vec<u64>,
}

#[derive(Serialize, Deserialize)]
struct GroupSpec {
    cyclic_orders: Vec<u64>,
}

impl TryFrom<GroupSpec> for FiniteAbelianGroup {
    type Error = Error;
    fn try_from(s: GroupSpec) -> Result<Self> {
        FiniteAbelianGroup::new(&s.cyclic_orders)
    }
}

impl From<FiniteAbelianGroup> for GroupSpec {
    fn from(g: FiniteAbelianGroup) -> Self {
        GroupSpec { cyclic_orders: g.orders }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GroupElement {
    pub residues: Vec<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Character {
    pub residues: Vec<u64>,
}

/// A subgroup as a membership mask over element indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Subgroup {
    pub members: Vec<bool>,
    pub generators: Vec<GroupElement>,
    pub index: u64,
}

impl Subgroup {
    pub fn contains(&self, idx: usize) -> bool {
        self.members[idx]
    }

    pub fn size(&self) -> usize {
        self.members.iter().filter(|&&m| m).count()
    }
}

impl FiniteAbelianGroup {
    pub fn new(orders: &[u64]) -> Result<Self> {
        if orders.iter().any(|&d| d == 0) {
            return Err(Error::InvalidArgument("cyclic orders must be positive".into()));
        }
        let mut size: u64 = 1;
        for &d in orders {
            size = size
                .checked_mul(d)
                .ok_or_else(|| Error::InvalidArgument("group order overflows u64".into()))?;
        }
        let exponent = orders.iter().fold(1u64, |a, &d| a.lcm(&d));
        let mut strides = vec![1u64; orders.len()];
        for i in (0..orders.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * orders[i + 1];
        }
        Ok(FiniteAbelianGroup { orders: orders.to_vec(), size, exponent, strides })
    }

    /// Z_n.
    pub fn cyclic(n: u64) -> Self {
        FiniteAbelianGroup::new(&[n]).expect("positive order")
    }

    pub fn cyclic_orders(&self) -> &[u64] {
        &self.orders
    }

    pub fn order(&self) -> u64 {
        self.size
    }

    pub fn n(&self) -> usize {
        self.size as usize
    }

    /// Exponent N = lcm of the cyclic orders.
    pub fn exponent(&self) -> u64 {
        self.exponent
    }

    /// All character values are ±1.
    pub fn is_real(&self) -> bool {
        self.exponent <= 2
    }

    pub fn check_cap(&self, cap: u64) -> Result<()> {
        if self.size > cap {
            Err(Error::CapExceeded { order: self.size, cap })
        } else {
            Ok(())
        }
    }

    pub fn product(&self, other: &FiniteAbelianGroup) -> FiniteAbelianGroup {
        let mut o = self.orders.clone();
        o.extend_from_slice(&other.orders);
        FiniteAbelianGroup::new(&o).expect("valid orders")
    }

    pub fn residues(&self, idx: usize) -> Vec<u64> {
        let idx = idx as u64;
        self.orders.iter().zip(&self.strides).map(|(&d, &s)| (idx / s) % d).collect()
    }

    pub fn element(&self, idx: usize) -> GroupElement {
        GroupElement { residues: self.residues(idx) }
    }

    pub fn character(&self, idx: usize) -> Character {
        Character { residues: self.residues(idx) }
    }

    fn index_of_residues(&self, r: &[u64]) -> Result<usize> {
        if r.len() != self.orders.len() {
            return Err(Error::InvalidArgument(format!(
                "expected {} residues, got {}",
                self.orders.len(),
                r.len()
            )));
        }
        Ok(r.iter()
            .zip(&self.orders)
            .zip(&self.strides)
            .map(|((&x, &d), &s)| (x % d) * s)
            .sum::<u64>() as usize)
    }

    pub fn index(&self, g: &GroupElement) -> Result<usize> {
        self.index_of_residues(&g.residues)
    }

    pub fn char_index(&self, a: &Character) -> Result<usize> {
        self.index_of_residues(&a.residues)
    }

    pub fn mul_idx(&self, a: usize, b: usize) -> usize {
        let (mut a, mut b) = (a as u64, b as u64);
        let mut out = 0;
        for (&d, &s) in self.orders.iter().zip(&self.strides).rev() {
            out += ((a % d + b % d) % d) * s;
            a /= d;
            b /= d;
        }
        out as usize
    }

    pub fn inv_idx(&self, a: usize) -> usize {
        let mut a = a as u64;
        let mut out = 0;
        for (&d, &s) in self.orders.iter().zip(&self.strides).rev() {
            out += ((d - a % d) % d) * s;
            a /= d;
        }
        out as usize
    }

    /// g·h⁻¹.
    pub fn div_idx(&self, a: usize, b: usize) -> usize {
        self.mul_idx(a, self.inv_idx(b))
    }

    pub fn pow_idx(&self, a: usize, k: u64) -> usize {
        let mut a = a as u64;
        let mut out = 0;
        for (&d, &s) in self.orders.iter().zip(&self.strides).rev() {
            out += (((a % d) as u128 * k as u128) % d as u128) as u64 * s;
            a /= d;
        }
        out as usize
    }

    /// Root-of-unity index t with α(g) = ξ_N^t, both given by index.
    pub fn pairing_idx(&self, alpha: usize, g: usize) -> u64 {
        let n = self.exponent;
        let (mut a, mut b) = (alpha as u64, g as u64);
        let mut t: u64 = 0;
        for &d in self.orders.iter().rev() {
            let (ai, gi) = (a % d, b % d);
            t = (t + ((ai * gi) % d) * (n / d)) % n;
            a /= d;
            b /= d;
        }
        t
    }

    pub fn char_value(&self, alpha: &Character, g: &GroupElement) -> Result<u64> {
        Ok(self.pairing_idx(self.char_index(alpha)?, self.index(g)?))
    }

    /// Elements and characters in index order; identity and χ₀ first.
    pub fn enumerate(&self, cap: u64) -> Result<(Vec<GroupElement>, Vec<Character>)> {
        self.check_cap(cap)?;
        let els = (0..self.n()).map(|i| self.element(i)).collect();
        let chars = (0..self.n()).map(|i| self.character(i)).collect();
        Ok((els, chars))
    }

    /// Membership mask of ker α.
    pub fn kernel(&self, alpha: usize) -> Vec<bool> {
        (0..self.n()).map(|g| self.pairing_idx(alpha, g) == 0).collect()
    }

    fn generated(&self, gens: &[usize]) -> Vec<bool> {
        let mut mem = vec![false; self.n()];
        mem[0] = true;
        let mut frontier = vec![0usize];
        while let Some(x) = frontier.pop() {
            for &g in gens {
                let y = self.mul_idx(x, g);
                if !mem[y] {
                    mem[y] = true;
                    frontier.push(y);
                }
            }
        }
        mem
    }

    fn subgroup_from_mask(&self, members: Vec<bool>) -> Subgroup {
        let mut gens: Vec<usize> = Vec::new();
        let mut span = self.generated(&gens);
        for (i, &m) in members.iter().enumerate() {
            if m && !span[i] {
                gens.push(i);
                span = self.generated(&gens);
            }
        }
        let size = members.iter().filter(|&&m| m).count() as u64;
        Subgroup {
            generators: gens.iter().map(|&i| self.element(i)).collect(),
            index: self.size / size,
            members,
        }
    }

    /// Maximal proper subgroups: kernels of nontrivial homomorphisms onto Z_p.
    pub fn maximal_subgroups(&self, cap: u64) -> Result<Vec<Subgroup>> {
        self.check_cap(cap)?;
        if self.size == 1 {
            return Err(Error::TrivialGroup);
        }
        let mut out: Vec<Subgroup> = Vec::new();
        let mut seen: std::collections::HashSet<Vec<bool>> = std::collections::HashSet::new();
        for p in prime_factors(self.size) {
            let comps: Vec<usize> =
                (0..self.orders.len()).filter(|&i| self.orders[i] % p == 0).collect();
            let r = comps.len() as u32;
            for code in 1..p.pow(r) {
                // digits of code give the hom coefficients; keep the normalized ones
                let mut c = vec![0u64; comps.len()];
                let mut x = code;
                for ci in c.iter_mut() {
                    *ci = x % p;
                    x /= p;
                }
                if c.iter().find(|&&v| v != 0) != Some(&1) {
                    continue;
                }
                let members: Vec<bool> = (0..self.n())
                    .map(|g| {
                        let res = self.residues(g);
                        comps.iter().zip(&c).map(|(&i, &ci)| ci * (res[i] % p)).sum::<u64>() % p
                            == 0
                    })
                    .collect();
                if seen.insert(members.clone()) {
                    out.push(self.subgroup_from_mask(members));
                }
            }
        }
        Ok(out)
    }

    /// Whether (g, h) ∈ S_{α,β}, i.e. αβ⁻¹(gh⁻¹) ≠ 1.
    pub fn in_s_idx(&self, alpha: usize, beta: usize, g: usize, h: usize) -> bool {
        let gamma = self.div_idx(alpha, beta);
        self.pairing_idx(gamma, self.div_idx(g, h)) != 0
    }

    pub fn s_set(&self, alpha: &Character, beta: &Character) -> Result<Vec<(GroupElement, GroupElement)>> {
        let (a, b) = (self.char_index(alpha)?, self.char_index(beta)?);
        if a == b {
            return Err(Error::EqualCharacters);
        }
        let mut out = Vec::new();
        for g in 0..self.n() {
            for h in 0..self.n() {
                if self.in_s_idx(a, b, g, h) {
                    out.push((self.element(g), self.element(h)));
                }
            }
        }
        Ok(out)
    }
}

pub fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            out.push(p);
            while n % p == 0 {
                n /= p;
            }
        }
        p += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}
