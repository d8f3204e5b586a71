//! Altruism matrices and the uniform-weight `Γ_V` family.

use std::fmt;

use thiserror::Error;

use crate::numerics::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ContextError {
    #[error("social context must be square and non-empty")]
    NotSquare,
    #[error("gamma[{row}][{col}] = {value} is negative: spite unsupported")]
    Negative { row: usize, col: usize, value: Rational },
    #[error("altruism level v[{index}] = {value} outside [0, 1]")]
    OutOfRange { index: usize, value: Rational },
    #[error("context is not normalizable: gamma[{player}][{player}] = 0")]
    ZeroDiagonal { player: usize },
    #[error("context is not restricted: gamma[{row}][{col}] > gamma[{row}][{row}]")]
    NotRestricted { row: usize, col: usize },
}

/// Per-player altruism levels `v_i ∈ [0, 1]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AltruismVector(Vec<Rational>);

impl AltruismVector {
    pub fn new(v: Vec<Rational>) -> Result<Self, ContextError> {
        let one = Rational::one();
        for (i, x) in v.iter().enumerate() {
            if x.is_negative() || *x > one {
                return Err(ContextError::OutOfRange { index: i + 1, value: x.clone() });
            }
        }
        Ok(Self(v))
    }

    pub fn uniform(n: usize, v: Rational) -> Result<Self, ContextError> {
        Self::new(vec![v; n])
    }

    pub fn values(&self) -> &[Rational] {
        &self.0
    }

    pub fn get(&self, i: usize) -> &Rational {
        &self.0[i]
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_uniform(&self) -> bool {
        self.0.windows(2).all(|w| w[0] == w[1])
    }

    /// `v̄`, the largest level.
    pub fn max(&self) -> Rational {
        self.0.iter().max().cloned().unwrap_or_else(Rational::zero)
    }

    /// `v_`, the smallest level.
    pub fn min(&self) -> Rational {
        self.0.iter().min().cloned().unwrap_or_else(Rational::zero)
    }
}

/// Classification flags, recomputed from the matrix on demand.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContextFlags {
    pub restricted: bool,
    pub symmetric: bool,
    pub unit_diagonal: bool,
    /// `Some(V)` when the matrix has the `Γ_V` shape (never for `n = 1`).
    pub gamma_v: Option<AltruismVector>,
}

impl ContextFlags {
    pub fn gamma_v_form(&self) -> bool {
        self.gamma_v.is_some()
    }
}

/// The `n × n` matrix `Γ` with non-negative rational entries.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SocialContext {
    n: usize,
    gamma: Vec<Rational>,
}

impl SocialContext {
    pub fn new(rows: Vec<Vec<Rational>>) -> Result<Self, ContextError> {
        let n = rows.len();
        if n == 0 || rows.iter().any(|r| r.len() != n) {
            return Err(ContextError::NotSquare);
        }
        for (i, row) in rows.iter().enumerate() {
            for (j, x) in row.iter().enumerate() {
                if x.is_negative() {
                    return Err(ContextError::Negative { row: i + 1, col: j + 1, value: x.clone() });
                }
            }
        }
        Ok(Self { n, gamma: rows.into_iter().flatten().collect() })
    }

    pub fn identity(n: usize) -> Self {
        let gamma = (0..n * n)
            .map(|k| if k / n == k % n { Rational::one() } else { Rational::zero() })
            .collect();
        Self { n, gamma }
    }

    /// `γ_ii = 1 − v_i`, `γ_ij = v_i`.
    pub fn gamma_v(v: &AltruismVector) -> Self {
        let n = v.len();
        let mut gamma = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                gamma.push(if i == j { Rational::one() - v.get(i) } else { v.get(i).clone() });
            }
        }
        Self { n, gamma }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn gamma(&self, i: usize, j: usize) -> &Rational {
        &self.gamma[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[Rational] {
        &self.gamma[i * self.n..(i + 1) * self.n]
    }

    pub fn rows(&self) -> Vec<Vec<Rational>> {
        (0..self.n).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn is_restricted(&self) -> bool {
        self.first_unrestricted().is_none()
    }

    fn first_unrestricted(&self) -> Option<(usize, usize)> {
        (0..self.n)
            .flat_map(|i| (0..self.n).map(move |j| (i, j)))
            .find(|&(i, j)| self.gamma(i, j) > self.gamma(i, i))
    }

    /// Rows for which `γ_ii ≥ γ_ij` holds.
    pub fn restricted_rows(&self) -> Vec<bool> {
        (0..self.n)
            .map(|i| (0..self.n).all(|j| self.gamma(i, j) <= self.gamma(i, i)))
            .collect()
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.n).all(|i| (i + 1..self.n).all(|j| self.gamma(i, j) == self.gamma(j, i)))
    }

    pub fn has_unit_diagonal(&self) -> bool {
        (0..self.n).all(|i| self.gamma(i, i).is_one())
    }

    pub fn extract_gamma_v(&self) -> Option<AltruismVector> {
        if self.n < 2 {
            return None;
        }
        let one = Rational::one();
        let mut v = Vec::with_capacity(self.n);
        for i in 0..self.n {
            let vi = self.gamma(i, (i + 1) % self.n).clone();
            if vi > one || (0..self.n).any(|j| j != i && *self.gamma(i, j) != vi) {
                return None;
            }
            if &one - &vi != *self.gamma(i, i) {
                return None;
            }
            v.push(vi);
        }
        AltruismVector::new(v).ok()
    }

    pub fn classify(&self) -> ContextFlags {
        ContextFlags {
            restricted: self.is_restricted(),
            symmetric: self.is_symmetric(),
            unit_diagonal: self.has_unit_diagonal(),
            gamma_v: self.extract_gamma_v(),
        }
    }

    /// Divide every row by its diagonal entry.
    ///
    /// Requires a restricted context with a positive diagonal.
    pub fn normalize(&self) -> Result<Self, ContextError> {
        if let Some(i) = (0..self.n).find(|&i| self.gamma(i, i).is_zero()) {
            return Err(ContextError::ZeroDiagonal { player: i + 1 });
        }
        if let Some((i, j)) = self.first_unrestricted() {
            return Err(ContextError::NotRestricted { row: i + 1, col: j + 1 });
        }
        Ok(self.scale_rows())
    }

    /// Row scaling without the restricted precondition; only the diagonal must be positive.
    pub fn scale_rows_checked(&self) -> Result<Self, ContextError> {
        if let Some(i) = (0..self.n).find(|&i| self.gamma(i, i).is_zero()) {
            return Err(ContextError::ZeroDiagonal { player: i + 1 });
        }
        Ok(self.scale_rows())
    }

    fn scale_rows(&self) -> Self {
        let mut gamma = self.gamma.clone();
        for i in 0..self.n {
            let d = self.gamma(i, i).clone();
            for x in &mut gamma[i * self.n..(i + 1) * self.n] {
                *x = &*x / &d;
            }
        }
        Self { n: self.n, gamma }
    }
}

impl fmt::Display for SocialContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.n {
            let row: Vec<String> = self.row(i).iter().map(|x| x.to_string()).collect();
            writeln!(f, "[{}]", row.join(", "))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances;
    use crate::numerics::rat;

    fn ctx(rows: &[&[(i64, i64)]]) -> SocialContext {
        SocialContext::new(rows.iter().map(|r| r.iter().map(|&(p, q)| rat(p, q)).collect()).collect()).unwrap()
    }

    #[test]
    fn gamma_v_examples() {
        let id = SocialContext::gamma_v(&AltruismVector::uniform(3, rat(0, 1)).unwrap());
        assert_eq!(id, SocialContext::identity(3));
        let half = SocialContext::gamma_v(&AltruismVector::uniform(2, rat(1, 2)).unwrap());
        assert_eq!(half, ctx(&[&[(1, 2), (1, 2)], &[(1, 2), (1, 2)]]));
        let mixed = SocialContext::gamma_v(&AltruismVector::new(vec![rat(1, 4), rat(3, 4)]).unwrap());
        assert_eq!(mixed.restricted_rows(), vec![true, false]);
        assert!(!mixed.is_restricted());
        assert!(AltruismVector::new(vec![rat(3, 2)]).is_err());
    }

    #[test]
    fn classify_examples() {
        let f = instances::gen_ne2().context.classify();
        assert!(f.restricted && !f.symmetric);
        let f = instances::gen_ne1().context.classify();
        assert!(f.symmetric && !f.restricted);
        let f = SocialContext::identity(3).classify();
        assert!(f.restricted && f.symmetric && f.unit_diagonal);
        assert_eq!(f.gamma_v.unwrap().values(), &[rat(0, 1), rat(0, 1), rat(0, 1)]);
        assert!(SocialContext::identity(1).classify().gamma_v.is_none());
    }

    #[test]
    fn normalize_examples() {
        let id = SocialContext::identity(2);
        assert_eq!(id.normalize().unwrap(), id);
        let c = ctx(&[&[(2, 1), (1, 1)], &[(1, 2), (1, 2)]]);
        assert_eq!(c.normalize().unwrap(), ctx(&[&[(1, 1), (1, 2)], &[(1, 1), (1, 1)]]));
        assert_eq!(
            instances::gen_ne1().context.normalize(),
            Err(ContextError::ZeroDiagonal { player: 2 })
        );
    }

    #[test]
    fn negative_rejected() {
        let r = SocialContext::new(vec![vec![rat(1, 1), rat(-1, 2)], vec![rat(0, 1), rat(1, 1)]]);
        assert!(matches!(r, Err(ContextError::Negative { row: 1, col: 2, .. })));
    }
}
