//! The algebra AH of H-hemicirculant matrices M = Σ_g q_g m_g with
//! m_g(e_h) = e_{gh}, plus a small dense-matrix type for everything that is
//! not hemicirculant (V columns, W rows, blowups, θ and ψ).

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::chargroup::{FiniteAbelianGroup, GroupElement};
use crate::error::{Error, Result};
use crate::laurent::{LaurentPoly, Poly, QPoly};
use crate::num::{Bound, CBall, Coeff, Cyclo, Exponent, Rational};

/// M = Σ_g q_g m_g, coefficients stored densely by element index.
#[derive(Clone, Debug, PartialEq)]
pub struct Hemi<C: Coeff> {
    group: FiniteAbelianGroup,
    coeffs: Vec<Poly<C>>,
}

pub type HemicirculantMatrix = Hemi<Rational>;

impl<C: Coeff> Hemi<C> {
    pub fn new(group: FiniteAbelianGroup, coeffs: Vec<Poly<C>>) -> Result<Self> {
        if coeffs.len() != group.n() {
            return Err(Error::ShapeMismatch(format!(
                "{} coefficients for a group of order {}",
                coeffs.len(),
                group.order()
            )));
        }
        Ok(Hemi { group, coeffs })
    }

    pub fn from_pairs(
        group: FiniteAbelianGroup,
        pairs: impl IntoIterator<Item = (GroupElement, Poly<C>)>,
    ) -> Result<Self> {
        let mut coeffs = vec![Poly::zero(); group.n()];
        for (g, p) in pairs {
            let i = group.index(&g)?;
            coeffs[i] = coeffs[i].add(&p);
        }
        Ok(Hemi { group, coeffs })
    }

    pub fn zero(group: &FiniteAbelianGroup) -> Self {
        Hemi { group: group.clone(), coeffs: vec![Poly::zero(); group.n()] }
    }

    pub fn identity(group: &FiniteAbelianGroup) -> Self {
        Hemi::basis(group, 0, Poly::one())
    }

    /// p·m_g for the element with index g.
    pub fn basis(group: &FiniteAbelianGroup, g: usize, p: Poly<C>) -> Self {
        let mut m = Hemi::zero(group);
        m.coeffs[g] = p;
        m
    }

    pub fn group(&self) -> &FiniteAbelianGroup {
        &self.group
    }

    pub fn coeff(&self, g: usize) -> &Poly<C> {
        &self.coeffs[g]
    }

    pub fn coeffs(&self) -> &[Poly<C>] {
        &self.coeffs
    }

    fn same_group(&self, o: &Self) -> Result<()> {
        if self.group != o.group {
            Err(Error::GroupMismatch)
        } else {
            Ok(())
        }
    }

    /// Group convolution (MN)_g = Σ_h q_h(M) q_{h⁻¹g}(N).
    pub fn mul(&self, o: &Self) -> Result<Self> {
        self.same_group(o)?;
        let n = self.group.n();
        let mut out = vec![Poly::zero(); n];
        for h in 0..n {
            if self.coeffs[h].is_zero() {
                continue;
            }
            for k in 0..n {
                if o.coeffs[k].is_zero() {
                    continue;
                }
                let g = self.group.mul_idx(h, k);
                let prod = self.coeffs[h].mul(&o.coeffs[k]);
                out[g] = if out[g].is_zero() { prod } else { out[g].add(&prod) };
            }
        }
        Ok(Hemi { group: self.group.clone(), coeffs: out })
    }

    pub fn add(&self, o: &Self) -> Result<Self> {
        self.same_group(o)?;
        Ok(Hemi {
            group: self.group.clone(),
            coeffs: self.coeffs.iter().zip(&o.coeffs).map(|(a, b)| a.add(b)).collect(),
        })
    }

    pub fn sub(&self, o: &Self) -> Result<Self> {
        self.same_group(o)?;
        Ok(Hemi {
            group: self.group.clone(),
            coeffs: self.coeffs.iter().zip(&o.coeffs).map(|(a, b)| a.sub(b)).collect(),
        })
    }

    /// Multiply every coefficient by the polynomial p (i.e. p·M).
    pub fn scale_poly(&self, p: &Poly<C>) -> Self {
        Hemi { group: self.group.clone(), coeffs: self.coeffs.iter().map(|c| c.mul(p)).collect() }
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Hemi::identity(&self.group);
        for _ in 0..k {
            acc = acc.mul(self).expect("same group");
        }
        acc
    }

    /// m_g·M, coefficient at h becomes q_{g⁻¹h}.
    pub fn translate(&self, g: usize) -> Self {
        let n = self.group.n();
        let mut out = vec![Poly::zero(); n];
        for h in 0..n {
            out[self.group.mul_idx(g, h)] = self.coeffs[h].clone();
        }
        Hemi { group: self.group.clone(), coeffs: out }
    }

    pub fn substitute(&self, m: &Exponent) -> Result<Self> {
        Ok(Hemi {
            group: self.group.clone(),
            coeffs: self.coeffs.iter().map(|c| c.substitute(m)).collect::<Result<_>>()?,
        })
    }

    pub fn map_coeffs<D: Coeff>(&self, f: impl Fn(&C) -> D + Copy) -> Hemi<D> {
        Hemi { group: self.group.clone(), coeffs: self.coeffs.iter().map(|c| c.map_coeffs(f)).collect() }
    }

    /// λ_α(M) = Σ_g q_g α(g⁻¹), α given by character index.
    pub fn lambda(&self, alpha: usize) -> Result<Poly<C>> {
        let n_exp = self.group.exponent();
        let mut acc = Poly::zero();
        for (g, q) in self.coeffs.iter().enumerate() {
            if q.is_zero() {
                continue;
            }
            let t = self.group.pairing_idx(alpha, self.group.inv_idx(g));
            let z = C::root_of_unity(n_exp, t).ok_or_else(|| {
                Error::InvalidArgument("character value not representable in this field".into())
            })?;
            acc = acc.add(&q.scale(&z));
        }
        Ok(acc)
    }

    pub fn eigenvalues(&self) -> Result<Vec<Poly<C>>> {
        (0..self.group.n()).map(|a| self.lambda(a)).collect()
    }

    /// q_g = (1/|H|) Σ_α λ_α α(g).
    pub fn fourier_inverse(eigs: &[Poly<C>], group: &FiniteAbelianGroup) -> Result<Self> {
        if eigs.len() != group.n() {
            return Err(Error::IncompleteEigenvalues { expected: group.n(), got: eigs.len() });
        }
        let inv = C::from_rational(&Rational::new(1, group.order() as i64));
        let n_exp = group.exponent();
        let mut coeffs = Vec::with_capacity(group.n());
        for g in 0..group.n() {
            let mut acc = Poly::zero();
            for (a, lam) in eigs.iter().enumerate() {
                if lam.is_zero() {
                    continue;
                }
                let z = C::root_of_unity(n_exp, group.pairing_idx(a, g)).ok_or_else(|| {
                    Error::InvalidArgument("character value not representable in this field".into())
                })?;
                acc = acc.add(&lam.scale(&z));
            }
            coeffs.push(acc.scale(&inv));
        }
        Ok(Hemi { group: group.clone(), coeffs })
    }

    /// tr M = |H|·q_e.
    pub fn trace(&self) -> Poly<C> {
        self.coeffs[0].scale(&C::from_rational(&Rational::from_integer(self.group.order() as i64)))
    }

    pub fn transpose(&self) -> Self {
        let n = self.group.n();
        Hemi {
            group: self.group.clone(),
            coeffs: (0..n).map(|g| self.coeffs[self.group.inv_idx(g)].clone()).collect(),
        }
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.group.n()).all(|g| self.coeffs[g] == self.coeffs[self.group.inv_idx(g)])
    }

    /// (trace, transpose, is_symmetric).
    pub fn structure(&self) -> (Poly<C>, Self, bool) {
        (self.trace(), self.transpose(), self.is_symmetric())
    }

    /// M⊗N over H×H: coefficient at (g,h) is q_g(M) q_h(N).
    pub fn tensor(&self, o: &Self) -> Self {
        let group = self.group.product(&o.group);
        let mut coeffs = Vec::with_capacity(group.n());
        for a in &self.coeffs {
            for b in &o.coeffs {
                coeffs.push(if a.is_zero() || b.is_zero() { Poly::zero() } else { a.mul(b) });
            }
        }
        Hemi { group, coeffs }
    }

    /// θ T ψ for T over H×H: coefficient at g is Σ_{ab=g} t_{(a,b)}.
    pub fn collapse(&self, base: &FiniteAbelianGroup) -> Result<Self> {
        if self.group != base.product(base) {
            return Err(Error::GroupMismatch);
        }
        let n = base.n();
        let mut coeffs = vec![Poly::zero(); n];
        for a in 0..n {
            for b in 0..n {
                let t = &self.coeffs[a * n + b];
                if !t.is_zero() {
                    let g = base.mul_idx(a, b);
                    coeffs[g] = coeffs[g].add(t);
                }
            }
        }
        Ok(Hemi { group: base.clone(), coeffs })
    }

    /// Dense form: entry (r, c) = q_{r c⁻¹}.
    pub fn to_dense(&self) -> Dense<C> {
        let n = self.group.n();
        let mut d = Dense::zeros(n, n);
        for r in 0..n {
            for c in 0..n {
                d.set(r, c, self.coeffs[self.group.div_idx(r, c)].clone());
            }
        }
        d
    }

    /// Largest support among the coefficients.
    pub fn max_support(&self) -> usize {
        self.coeffs.iter().map(|c| c.len()).max().unwrap_or(0)
    }

    /// Operator 1-norm; every column holds each coefficient once.
    pub fn norm_bound(&self) -> Bound {
        let mut v = 0.0;
        let mut e = 0.0;
        for c in &self.coeffs {
            let b = c.norm_bound();
            v += b.value;
            e += b.err;
        }
        Bound { value: v, err: e * (1.0 + 1e-15) }
    }
}

impl Hemi<Rational> {
    pub fn is_nonneg(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_nonneg())
    }

    /// Σ_g q_g(1): the common column sum at x = 1.
    pub fn column_sum_at_one(&self) -> Rational {
        self.coeffs.iter().map(|c| c.eval_one()).sum()
    }

    /// c_g = q_g(1).
    pub fn values_at_one(&self) -> Vec<Rational> {
        self.coeffs.iter().map(|c| c.eval_one()).collect()
    }

    /// Exact operator 1-norm.
    pub fn norm(&self) -> Rational {
        self.coeffs.iter().map(|c| c.norm()).sum()
    }

    pub fn to_cyclo(&self) -> Hemi<Cyclo> {
        self.map_coeffs(|c| Cyclo::rational(c.clone()))
    }

    pub fn to_cball(&self) -> Hemi<CBall> {
        self.map_coeffs(|c| c.to_cball())
    }

    /// λ_α in the mode the group dictates: exact when characters are ±1.
    pub fn lambda_eig(&self, alpha: usize) -> Result<LaurentPoly> {
        if self.group.is_real() {
            Ok(LaurentPoly::Exact(self.lambda(alpha)?))
        } else {
            Ok(LaurentPoly::Complex(self.to_cyclo().lambda(alpha)?.to_cpoly()))
        }
    }

    /// Cyclic permutation P = m_{[1]} over Z_n (P e_i = e_{i+1}).
    pub fn cyclic_shift(n: u64) -> Self {
        Hemi::basis(&FiniteAbelianGroup::cyclic(n), 1 % n as usize, Poly::one())
    }
}

impl<C: Coeff> Serialize for Hemi<C>
where
    Poly<C>: Serialize,
{
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Out<'a, P: Serialize> {
            group: &'a FiniteAbelianGroup,
            coeffs: Vec<(Vec<u64>, &'a P)>,
        }
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, p)| !p.is_zero())
            .map(|(i, p)| (self.group.residues(i), p))
            .collect();
        Out { group: &self.group, coeffs }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Hemi<Rational> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct In {
            group: FiniteAbelianGroup,
            coeffs: Vec<(Vec<u64>, QPoly)>,
        }
        let raw = In::deserialize(d)?;
        for (r, _) in &raw.coeffs {
            if r.len() != raw.group.cyclic_orders().len()
                || r.iter().zip(raw.group.cyclic_orders()).any(|(x, d)| x >= d)
            {
                return Err(D::Error::custom(format!("element residues {r:?} out of range")));
            }
        }
        let group = raw.group;
        Hemi::from_pairs(
            group,
            raw.coeffs.into_iter().map(|(r, p)| (GroupElement { residues: r }, p)),
        )
        .map_err(D::Error::custom)
    }
}

// ---------------------------------------------------------------------------
// Dense matrices

/// Row-major matrix of polynomials; explicit zero entries allowed.
#[derive(Clone, Debug, PartialEq)]
pub struct Dense<C: Coeff> {
    rows: usize,
    cols: usize,
    entries: Vec<Poly<C>>,
}

pub type DenseMatrix = Dense<Rational>;

/// Serialized as a list of rows.
impl<C: Coeff> Serialize for Dense<C>
where
    Poly<C>: Serialize,
{
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<&[Poly<C>]> = self.entries.chunks(self.cols.max(1)).take(self.rows).collect();
        rows.serialize(s)
    }
}

impl<C: Coeff> Dense<C> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Dense { rows, cols, entries: vec![Poly::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut d = Dense::zeros(n, n);
        for i in 0..n {
            d.set(i, i, Poly::one());
        }
        d
    }

    pub fn from_rows(rows: Vec<Vec<Poly<C>>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map(|x| x.len()).unwrap_or(0);
        if rows.iter().any(|x| x.len() != c) {
            return Err(Error::ShapeMismatch("ragged rows".into()));
        }
        Ok(Dense { rows: r, cols: c, entries: rows.into_iter().flatten().collect() })
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn get(&self, r: usize, c: usize) -> &Poly<C> {
        &self.entries[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, p: Poly<C>) {
        self.entries[r * self.cols + c] = p;
    }

    pub fn entries(&self) -> &[Poly<C>] {
        &self.entries
    }

    pub fn mul(&self, o: &Self) -> Result<Self> {
        if self.cols != o.rows {
            return Err(Error::ShapeMismatch(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, o.rows, o.cols
            )));
        }
        let mut out = Dense::zeros(self.rows, o.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..o.cols {
                    let b = o.get(k, j);
                    if b.is_zero() {
                        continue;
                    }
                    let idx = i * o.cols + j;
                    out.entries[idx] = out.entries[idx].add(&a.mul(b));
                }
            }
        }
        Ok(out)
    }

    fn zip(&self, o: &Self, f: impl Fn(&Poly<C>, &Poly<C>) -> Poly<C>) -> Result<Self> {
        if self.shape() != o.shape() {
            return Err(Error::ShapeMismatch(format!("{:?} vs {:?}", self.shape(), o.shape())));
        }
        Ok(Dense {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().zip(&o.entries).map(|(a, b)| f(a, b)).collect(),
        })
    }

    pub fn add(&self, o: &Self) -> Result<Self> {
        self.zip(o, |a, b| a.add(b))
    }

    pub fn sub(&self, o: &Self) -> Result<Self> {
        self.zip(o, |a, b| a.sub(b))
    }

    pub fn scale_poly(&self, p: &Poly<C>) -> Self {
        Dense { rows: self.rows, cols: self.cols, entries: self.entries.iter().map(|e| e.mul(p)).collect() }
    }

    pub fn transpose(&self) -> Self {
        let mut out = Dense::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.set(c, r, self.get(r, c).clone());
            }
        }
        out
    }

    pub fn map_entries(&self, f: impl Fn(&Poly<C>) -> Poly<C>) -> Self {
        Dense { rows: self.rows, cols: self.cols, entries: self.entries.iter().map(f).collect() }
    }

    pub fn map_coeffs<D: Coeff>(&self, f: impl Fn(&C) -> D + Copy) -> Dense<D> {
        Dense { rows: self.rows, cols: self.cols, entries: self.entries.iter().map(|e| e.map_coeffs(f)).collect() }
    }

    pub fn to_cball(&self) -> Dense<CBall> {
        self.map_coeffs(|c| c.to_cball())
    }

    /// Certified operator 1-norm: max over columns of Σ_rows ‖entry‖.
    pub fn operator_norm_bound(&self) -> Bound {
        let mut best = Bound::exact(0.0);
        for c in 0..self.cols {
            let mut v = 0.0;
            let mut e = 0.0;
            for r in 0..self.rows {
                let b = self.get(r, c).norm_bound();
                v += b.value;
                e += b.err;
            }
            if v + e > best.value + best.err {
                best = Bound { value: v, err: e };
            }
        }
        best
    }

    pub fn eval_at_one(&self) -> Vec<Vec<C>> {
        (0..self.rows)
            .map(|r| (0..self.cols).map(|c| self.get(r, c).eval_one()).collect())
            .collect()
    }

    pub fn column_sums_at_one(&self) -> Vec<C> {
        (0..self.cols)
            .map(|c| {
                let mut acc = C::zero();
                for r in 0..self.rows {
                    acc = acc.add(&self.get(r, c).eval_one());
                }
                acc
            })
            .collect()
    }
}

impl Dense<Rational> {
    /// Exact per-column l¹ norms.
    pub fn column_norms(&self) -> Vec<Rational> {
        (0..self.cols)
            .map(|c| (0..self.rows).map(|r| self.get(r, c).norm()).sum())
            .collect()
    }

    /// Exact operator 1-norm.
    pub fn operator_norm(&self) -> Rational {
        self.column_norms().into_iter().max().unwrap_or_else(Rational::zero)
    }

    pub fn is_nonneg(&self) -> bool {
        self.entries.iter().all(|e| e.is_nonneg())
    }

    pub fn is_column_stochastic(&self) -> bool {
        self.column_sums_at_one().iter().all(|s| s.is_one())
    }

    /// (operator 1-norm, values at x=1, column sums).
    pub fn dense_ops(&self) -> (Rational, Vec<Vec<Rational>>, Vec<Rational>) {
        (self.operator_norm(), self.eval_at_one(), self.column_sums_at_one())
    }
}

/// θ: e_g ⊗ e_h ↦ e_{gh}, an |H| × |H|² matrix.
pub fn theta_dense<C: Coeff>(group: &FiniteAbelianGroup) -> Dense<C> {
    let n = group.n();
    let mut d = Dense::zeros(n, n * n);
    for g in 0..n {
        for h in 0..n {
            d.set(group.mul_idx(g, h), g * n + h, Poly::one());
        }
    }
    d
}

/// ψ: e_g ↦ (1/|H|) Σ_h e_h ⊗ e_{gh⁻¹}, an |H|² × |H| matrix.
pub fn psi_dense<C: Coeff>(group: &FiniteAbelianGroup) -> Dense<C> {
    let n = group.n();
    let w = Poly::constant(C::from_rational(&Rational::new(1, n as i64)));
    let mut d = Dense::zeros(n * n, n);
    for g in 0..n {
        for h in 0..n {
            d.set(h * n + group.div_idx(g, h), g, w.clone());
        }
    }
    d
}

/// (θ T ψ as a hemicirculant over H, ψ·M dense) for T over H×H and M over H.
pub fn theta_psi<C: Coeff>(t: &Hemi<C>, m: &Hemi<C>) -> Result<(Hemi<C>, Dense<C>)> {
    let collapsed = t.collapse(m.group())?;
    let split = psi_dense::<C>(m.group()).mul(&m.to_dense())?;
    Ok((collapsed, split))
}

/// Σ_{α,β} f(α,β) v_α w_β as a dense matrix; entry (r,c) is
/// (1/|H|) Σ f(α,β) α(r) β(c⁻¹).
pub fn spectral_bilinear<C: Coeff>(
    group: &FiniteAbelianGroup,
    f: impl Fn(usize, usize) -> Option<Poly<C>>,
) -> Result<Dense<C>> {
    let n = group.n();
    let n_exp = group.exponent();
    let inv = C::from_rational(&Rational::new(1, n as i64));
    let root = |t: u64| {
        C::root_of_unity(n_exp, t)
            .ok_or_else(|| Error::InvalidArgument("character value not representable".into()))
    };
    let mut coef = Vec::with_capacity(n * n);
    for a in 0..n {
        for b in 0..n {
            coef.push(f(a, b));
        }
    }
    let mut d = Dense::zeros(n, n);
    for r in 0..n {
        for c in 0..n {
            let ci = group.inv_idx(c);
            let mut acc = Poly::zero();
            for a in 0..n {
                for b in 0..n {
                    if let Some(p) = &coef[a * n + b] {
                        let t = (group.pairing_idx(a, r) + group.pairing_idx(b, ci)) % n_exp;
                        acc = acc.add(&p.scale(&root(t)?));
                    }
                }
            }
            d.set(r, c, acc.scale(&inv));
        }
    }
    Ok(d)
}

/// Σ_α λ_α v_α w_α.
pub fn spectral_dense<C: Coeff>(eigs: &[Poly<C>], group: &FiniteAbelianGroup) -> Result<Dense<C>> {
    if eigs.len() != group.n() {
        return Err(Error::IncompleteEigenvalues { expected: group.n(), got: eigs.len() });
    }
    spectral_bilinear(group, |a, b| if a == b { Some(eigs[a].clone()) } else { None })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::laurent::qpoly;

    fn half_i_plus_xp(n: u64) -> HemicirculantMatrix {
        let g = FiniteAbelianGroup::cyclic(n);
        Hemi::basis(&g, 0, qpoly(&[(0, 1, 2)]))
            .add(&Hemi::basis(&g, 1, qpoly(&[(1, 1, 2)])))
            .unwrap()
    }

    #[test]
    fn z2_convolution() {
        let g = FiniteAbelianGroup::cyclic(2);
        let (a, b, c, d) = (qpoly(&[(0, 2, 1)]), qpoly(&[(1, 3, 1)]), qpoly(&[(2, 5, 1)]), qpoly(&[(0, 7, 1)]));
        let m = Hemi::new(g.clone(), vec![a.clone(), b.clone()]).unwrap();
        let n = Hemi::new(g.clone(), vec![c.clone(), d.clone()]).unwrap();
        let p = m.mul(&n).unwrap();
        assert_eq!(p.coeff(0), &a.mul(&c).add(&b.mul(&d)));
        assert_eq!(p.coeff(1), &a.mul(&d).add(&b.mul(&c)));
        assert_eq!(m.mul(&Hemi::identity(&g)).unwrap(), m);
    }

    #[test]
    fn square_over_z3_matches_dense() {
        let m = half_i_plus_xp(3);
        let sq = m.mul(&m).unwrap();
        assert_eq!(sq.coeff(0), &qpoly(&[(0, 1, 4)]));
        assert_eq!(sq.coeff(1), &qpoly(&[(1, 1, 2)]));
        assert_eq!(sq.coeff(2), &qpoly(&[(2, 1, 4)]));
        assert_eq!(sq.to_dense(), m.to_dense().mul(&m.to_dense()).unwrap());
    }

    #[test]
    fn lambda_examples() {
        let m = half_i_plus_xp(2);
        assert_eq!(m.lambda(0).unwrap(), qpoly(&[(0, 1, 2), (1, 1, 2)]));
        assert_eq!(m.lambda(1).unwrap(), qpoly(&[(0, 1, 2), (1, -1, 2)]));
        // Z₃: λ_[k]((I+xP)/2) = (1 + ξ^{-k} x)/2
        let m3 = half_i_plus_xp(3).to_cyclo();
        for k in 0..3u64 {
            let expect = Poly::from_terms(vec![
                (Exponent::ZERO, Cyclo::rational(Rational::new(1, 2))),
                (Exponent::from(1i64), Coeff::mul(&Cyclo::root(3, (3 - k) % 3), &Cyclo::rational(Rational::new(1, 2)))),
            ]);
            assert_eq!(m3.lambda(k as usize).unwrap(), expect);
        }
        let id = HemicirculantMatrix::identity(&FiniteAbelianGroup::new(&[2, 2]).unwrap());
        for a in 0..4 {
            assert_eq!(id.lambda(a).unwrap(), QPoly::one());
        }
    }

    #[test]
    fn fourier_examples() {
        let g = FiniteAbelianGroup::cyclic(2);
        let one = vec![QPoly::one(), QPoly::one()];
        assert_eq!(Hemi::fourier_inverse(&one, &g).unwrap(), Hemi::identity(&g));
        let eigs = vec![qpoly(&[(0, 1, 2), (1, 1, 2)]), qpoly(&[(0, 1, 2), (1, -1, 2)])];
        assert_eq!(Hemi::fourier_inverse(&eigs, &g).unwrap(), half_i_plus_xp(2));
        assert!(Hemi::fourier_inverse(&eigs[..1], &g).is_err());
    }

    #[test]
    fn structure_examples() {
        let m = half_i_plus_xp(3);
        assert_eq!(m.trace(), qpoly(&[(0, 3, 2)]));
        let g = FiniteAbelianGroup::cyclic(3);
        let q: Vec<QPoly> = vec![qpoly(&[(0, 1, 1)]), qpoly(&[(1, 1, 1)]), qpoly(&[(2, 1, 1)])];
        let c = Hemi::new(g, q.clone()).unwrap();
        assert_eq!(c.transpose().coeffs(), &[q[0].clone(), q[2].clone(), q[1].clone()]);
        let sq = m.mul(&m).unwrap();
        let two_way = m
            .coeffs()
            .iter()
            .enumerate()
            .fold(QPoly::zero(), |acc, (gi, qg)| {
                acc.add(&qg.mul(m.coeff(m.group().inv_idx(gi))))
            })
            .scale(&Rational::from_integer(3));
        assert_eq!(sq.trace(), two_way);
    }

    #[test]
    fn tensor_examples() {
        let m = half_i_plus_xp(2);
        let t = m.tensor(&m);
        assert_eq!(t.coeffs(), &[
            qpoly(&[(0, 1, 4)]),
            qpoly(&[(1, 1, 4)]),
            qpoly(&[(1, 1, 4)]),
            qpoly(&[(2, 1, 4)])
        ]);
        let g = FiniteAbelianGroup::cyclic(2);
        let i = HemicirculantMatrix::identity(&g);
        assert_eq!(i.tensor(&i), HemicirculantMatrix::identity(&g.product(&g)));
    }

    #[test]
    fn theta_psi_section() {
        let g = FiniteAbelianGroup::new(&[2, 2]).unwrap();
        let th = theta_dense::<Rational>(&g);
        let ps = psi_dense::<Rational>(&g);
        assert_eq!(th.mul(&ps).unwrap(), Dense::identity(4));
        let i = HemicirculantMatrix::identity(&g);
        let (col, _) = theta_psi(&i.tensor(&i), &i).unwrap();
        assert_eq!(col, i);
    }

    #[test]
    fn dense_ops_examples() {
        let (n, _, _) = DenseMatrix::identity(3).dense_ops();
        assert_eq!(n, Rational::one());
        let d = half_i_plus_xp(3).to_dense();
        let (n, at1, sums) = d.dense_ops();
        assert_eq!(n, Rational::one());
        assert!(sums.iter().all(|s| s.is_one()));
        for r in 0..3 {
            assert_eq!(at1[r].iter().cloned().sum::<Rational>(), Rational::one());
        }
    }

    #[test]
    fn json_round_trip() {
        let m = half_i_plus_xp(3);
        let s = serde_json::to_string(&m).unwrap();
        assert_eq!(s, r#"{"group":{"cyclic_orders":[3]},"coeffs":[[[0],[["0","1","2"]]],[[1],[["1","1","2"]]]]}"#);
        let back: HemicirculantMatrix = serde_json::from_str(&s).unwrap();
        assert_eq!(back, m);
    }
}
