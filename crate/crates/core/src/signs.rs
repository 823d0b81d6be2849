//! Sign vectors of linear subspaces: componentwise sign patterns, their
//! partial order and orthogonality, enumeration of all patterns realized by a
//! subspace, and the two sign conditions governing uniqueness and existence of
//! the Birch-point intersection.

use std::collections::BTreeSet;
use std::fmt;

use num_traits::Signed;

use crate::error::{GmasError, Result};
use crate::ratcore::{strict_sign_feasible, Rational, SubspaceBasis};

/// Default ambient-dimension cap for full 3^n enumeration.
pub const ENUMERATION_CAP: usize = 14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sign {
    Minus,
    Zero,
    Plus,
}

impl Sign {
    pub fn of_f64(x: f64) -> Sign {
        if x > 0.0 {
            Sign::Plus
        } else if x < 0.0 {
            Sign::Minus
        } else {
            Sign::Zero
        }
    }

    pub fn of_rational(x: &Rational) -> Sign {
        if x.is_positive() {
            Sign::Plus
        } else if x.is_negative() {
            Sign::Minus
        } else {
            Sign::Zero
        }
    }

    pub fn negate(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
            Sign::Zero => Sign::Zero,
        }
    }

    /// Sign product: + * - = -, - * - = +, anything with 0 is 0.
    pub fn mul(self, other: Sign) -> Sign {
        match (self, other) {
            (Sign::Zero, _) | (_, Sign::Zero) => Sign::Zero,
            (a, b) if a == b => Sign::Plus,
            _ => Sign::Minus,
        }
    }

    fn to_char(self) -> char {
        match self {
            Sign::Minus => '-',
            Sign::Zero => '0',
            Sign::Plus => '+',
        }
    }

    fn from_char(c: char) -> Option<Sign> {
        match c {
            '-' => Some(Sign::Minus),
            '0' => Some(Sign::Zero),
            '+' => Some(Sign::Plus),
            _ => None,
        }
    }
}

/// An element of {-, 0, +}^n.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SignVector(pub Vec<Sign>);

impl SignVector {
    pub fn zero(n: usize) -> Self {
        SignVector(vec![Sign::Zero; n])
    }

    pub fn of_rational_vec(v: &[Rational]) -> Self {
        SignVector(v.iter().map(Sign::of_rational).collect())
    }

    pub fn of_f64_vec(v: &[f64]) -> Self {
        SignVector(v.iter().copied().map(Sign::of_f64).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|s| *s == Sign::Zero)
    }

    pub fn negate(&self) -> Self {
        SignVector(self.0.iter().map(|s| s.negate()).collect())
    }

    /// Partial order: self <= other iff each entry is 0 or equals the other's.
    pub fn leq(&self, other: &SignVector) -> Result<bool> {
        self.check_len(other)?;
        Ok(self
            .0
            .iter()
            .zip(&other.0)
            .all(|(a, b)| *a == Sign::Zero || a == b))
    }

    /// Orthogonality: all entrywise products are 0, or both a + and a - product occur.
    pub fn orthogonal(&self, other: &SignVector) -> Result<bool> {
        self.check_len(other)?;
        let products: Vec<Sign> = self
            .0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| a.mul(*b))
            .collect();
        let has_plus = products.contains(&Sign::Plus);
        let has_minus = products.contains(&Sign::Minus);
        Ok((!has_plus && !has_minus) || (has_plus && has_minus))
    }

    pub fn parse(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| {
                Sign::from_char(c)
                    .ok_or_else(|| GmasError::Invalid(format!("bad sign character '{c}'")))
            })
            .collect::<Result<Vec<_>>>()
            .map(SignVector)
    }

    fn check_len(&self, other: &SignVector) -> Result<()> {
        if self.len() != other.len() {
            return Err(GmasError::Dimension(format!(
                "sign vector lengths differ: {} vs {}",
                self.len(),
                other.len()
            )));
        }
        Ok(())
    }
}

impl fmt::Display for SignVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.0 {
            write!(f, "{}", s.to_char())?;
        }
        Ok(())
    }
}

/// A finite set of sign vectors, ordered for deterministic iteration.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SignSet {
    members: BTreeSet<SignVector>,
}

impl SignSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_iter<I: IntoIterator<Item = SignVector>>(iter: I) -> Self {
        SignSet { members: iter.into_iter().collect() }
    }

    pub fn insert(&mut self, v: SignVector) {
        self.members.insert(v);
    }

    pub fn contains(&self, v: &SignVector) -> bool {
        self.members.contains(v)
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &SignVector> {
        self.members.iter()
    }

    pub fn is_subset(&self, other: &SignSet) -> bool {
        self.members.is_subset(&other.members)
    }

    /// Downward closure under the partial order: every tau with tau <= some member.
    pub fn closure(&self) -> SignSet {
        let mut out = BTreeSet::new();
        for v in &self.members {
            // Expand by zeroing every subset of the nonzero coordinates.
            let nonzero: Vec<usize> = (0..v.len()).filter(|&i| v.0[i] != Sign::Zero).collect();
            for mask in 0u64..(1u64 << nonzero.len()) {
                let mut w = v.clone();
                for (bit, &idx) in nonzero.iter().enumerate() {
                    if mask & (1 << bit) != 0 {
                        w.0[idx] = Sign::Zero;
                    }
                }
                out.insert(w);
            }
        }
        SignSet { members: out }
    }
}

/// sigma(x) for an exact rational vector.
pub fn sign_of(v: &[Rational]) -> SignVector {
    SignVector::of_rational_vec(v)
}

/// All sign vectors realized by the subspace, i.e. sigma(span(basis)).
///
/// Each candidate pattern in {-, 0, +}^n is decided by exact strict-sign
/// feasibility (zeros fixed); negation symmetry of subspaces halves the work.
pub fn enumerate_sign_vectors(basis: &SubspaceBasis) -> Result<SignSet> {
    enumerate_sign_vectors_capped(basis, ENUMERATION_CAP)
}

pub fn enumerate_sign_vectors_capped(basis: &SubspaceBasis, cap: usize) -> Result<SignSet> {
    let n = basis.ambient_dim();
    if n > cap {
        return Err(GmasError::EnumerationCap { dim: n, cap });
    }
    let mut out = SignSet::new();
    out.insert(SignVector::zero(n));
    if basis.dim() == 0 {
        return Ok(out);
    }
    let mut pattern = vec![Sign::Zero; n];
    enumerate_rec(basis, &mut pattern, 0, true, &mut out)?;
    Ok(out)
}

// Recursively fills the pattern left to right; `leading_zero` tracks whether all
// entries so far are zero, so only patterns whose first nonzero entry is + are
// tested and negatives are added by symmetry.
fn enumerate_rec(
    basis: &SubspaceBasis,
    pattern: &mut Vec<Sign>,
    idx: usize,
    leading_zero: bool,
    out: &mut SignSet,
) -> Result<()> {
    if idx == pattern.len() {
        if leading_zero {
            return Ok(());
        }
        let sv = SignVector(pattern.clone());
        if strict_sign_feasible(basis, pattern, false)?.feasible {
            out.insert(sv.negate());
            out.insert(sv);
        }
        return Ok(());
    }
    let choices: &[Sign] = if leading_zero {
        &[Sign::Zero, Sign::Plus]
    } else {
        &[Sign::Minus, Sign::Zero, Sign::Plus]
    };
    for &c in choices {
        pattern[idx] = c;
        enumerate_rec(basis, pattern, idx + 1, leading_zero && c == Sign::Zero, out)?;
    }
    pattern[idx] = Sign::Zero;
    Ok(())
}

#[derive(Debug, Clone)]
pub struct ConditionCheck {
    pub holds: bool,
    /// A violating sign vector when the condition fails.
    pub witness: Option<SignVector>,
}

// Sign vectors of a few hundred exact sample points of the subspace: a cheap
// source of certified members of sigma(S) used to detect condition violations
// before paying for the full 3^n enumeration.
fn sample_sign_vectors(basis: &SubspaceBasis) -> Vec<SignVector> {
    let k = basis.dim();
    let n = basis.ambient_dim();
    if k == 0 {
        return Vec::new();
    }
    let combine = |coeffs: &[i64]| -> Vec<Rational> {
        (0..n)
            .map(|i| {
                (0..k).fold(Rational::from_integer(0.into()), |acc, j| {
                    acc + &basis.vectors()[j][i] * Rational::from_integer(coeffs[j].into())
                })
            })
            .collect()
    };
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    let mut push = |coeffs: &[i64], seen: &mut BTreeSet<SignVector>| {
        let tau = SignVector::of_rational_vec(&combine(coeffs));
        if !tau.is_zero() && seen.insert(tau.clone()) {
            out.push(tau);
        }
    };
    // basis vectors and pairwise sums/differences, then pseudo-random small
    // integer combinations (xorshift, fixed seed, fully deterministic)
    for j in 0..k {
        let mut c = vec![0i64; k];
        c[j] = 1;
        push(&c, &mut seen);
        c[j] = -1;
        push(&c, &mut seen);
    }
    for a in 0..k {
        for b in a + 1..k {
            for (ca, cb) in [(1, 1), (1, -1), (-1, 1), (-1, -1)] {
                let mut c = vec![0i64; k];
                c[a] = ca;
                c[b] = cb;
                push(&c, &mut seen);
            }
        }
    }
    let mut state = 0x9e3779b97f4a7c15u64;
    let mut next = move || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        state
    };
    for _ in 0..300 {
        let coeffs: Vec<i64> = (0..k).map(|_| (next() % 7) as i64 - 3).collect();
        push(&coeffs, &mut seen);
    }
    out
}

/// Checks sigma(S) subset of cl(sigma(S~)).
///
/// Membership of tau in the closure is decided directly by relaxed strict
/// feasibility in S~ (zeros free), avoiding enumeration of sigma(S~).
/// Violations are first searched among sampled members of sigma(S); a "holds"
/// answer always rests on the full enumeration.
pub fn check_sigma_subset_closure(
    s: &SubspaceBasis,
    s_tilde: &SubspaceBasis,
) -> Result<ConditionCheck> {
    check_dims(s, s_tilde)?;
    for tau in sample_sign_vectors(s) {
        if !strict_sign_feasible(s_tilde, &tau.0, true)?.feasible {
            return Ok(ConditionCheck { holds: false, witness: Some(tau) });
        }
    }
    let sigma_s = enumerate_sign_vectors(s)?;
    for tau in sigma_s.iter() {
        if tau.is_zero() {
            continue;
        }
        if !strict_sign_feasible(s_tilde, &tau.0, true)?.feasible {
            return Ok(ConditionCheck { holds: false, witness: Some(tau.clone()) });
        }
    }
    Ok(ConditionCheck { holds: true, witness: None })
}

/// Checks the uniqueness condition sigma(S) intersect sigma(S~ perp) = {0}.
pub fn check_uniqueness_condition(
    s: &SubspaceBasis,
    s_tilde: &SubspaceBasis,
) -> Result<ConditionCheck> {
    check_dims(s, s_tilde)?;
    let s_tilde_perp = s_tilde.orth_complement();
    for tau in sample_sign_vectors(s) {
        if strict_sign_feasible(&s_tilde_perp, &tau.0, false)?.feasible {
            return Ok(ConditionCheck { holds: false, witness: Some(tau) });
        }
    }
    let sigma_s = enumerate_sign_vectors(s)?;
    for tau in sigma_s.iter() {
        if tau.is_zero() {
            continue;
        }
        if strict_sign_feasible(&s_tilde_perp, &tau.0, false)?.feasible {
            return Ok(ConditionCheck { holds: false, witness: Some(tau.clone()) });
        }
    }
    Ok(ConditionCheck { holds: true, witness: None })
}

fn check_dims(a: &SubspaceBasis, b: &SubspaceBasis) -> Result<()> {
    if a.ambient_dim() != b.ambient_dim() {
        return Err(GmasError::Dimension(format!(
            "ambient dims differ: {} vs {}",
            a.ambient_dim(),
            b.ambient_dim()
        )));
    }
    Ok(())
}
