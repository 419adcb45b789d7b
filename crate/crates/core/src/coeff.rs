//! The coefficient ring: cohomology of a point with constant mod 2
//! coefficients, as a bigraded ring with its Margolis operations.
//!
//! Basis: the positive cone `a^j σ^{-n}` (`j, n ≥ 0`) in degree `(-n, n+j)`
//! and the negative cone `a^{-m} σ^{n+2}` (`m, n ≥ 0`) in degree
//! `(n+2, -(n+2)-m)`. Twist `-1` is empty.

use std::fmt;

use crate::grmod::{bd, BiDegree, Window};

/// A basis monomial of the coefficient ring.
#[derive(Copy, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Coeff {
    /// `a^j σ^{-n}`.
    Pos { j: u32, n: u32 },
    /// `a^{-m} σ^{n+2}`.
    Neg { m: u32, n: u32 },
}

/// The degree of `σ^2`, also the degree of the duality pairing.
pub const SIGMA2: BiDegree = bd(2, -2);

pub const ONE: Coeff = Coeff::Pos { j: 0, n: 0 };
pub const A: Coeff = Coeff::Pos { j: 1, n: 0 };
pub const SIGMA_INV: Coeff = Coeff::Pos { j: 0, n: 1 };
pub const SIGMA_SQ: Coeff = Coeff::Neg { m: 0, n: 0 };

impl Coeff {
    pub fn degree(self) -> BiDegree {
        match self {
            Coeff::Pos { j, n } => bd(-(n as i32), (n + j) as i32),
            Coeff::Neg { m, n } => bd(n as i32 + 2, -(n as i32 + 2) - m as i32),
        }
    }

    pub fn is_positive(self) -> bool {
        matches!(self, Coeff::Pos { .. })
    }

    /// Power of `a` (negative in the negative cone).
    pub fn a_power(self) -> i32 {
        match self {
            Coeff::Pos { j, .. } => j as i32,
            Coeff::Neg { m, .. } => -(m as i32),
        }
    }

    /// Product in the ring.
    pub fn product(self, o: Coeff) -> Option<Coeff> {
        match (self, o) {
            (Coeff::Pos { j: j1, n: n1 }, Coeff::Pos { j: j2, n: n2 }) => Some(Coeff::Pos {
                j: j1 + j2,
                n: n1 + n2,
            }),
            (Coeff::Pos { j, n: p }, Coeff::Neg { m, n })
            | (Coeff::Neg { m, n }, Coeff::Pos { j, n: p }) => {
                (j <= m && p <= n).then(|| Coeff::Neg { m: m - j, n: n - p })
            }
            (Coeff::Neg { .. }, Coeff::Neg { .. }) => None,
        }
    }

    pub fn times_a(self) -> Option<Coeff> {
        A.product(self)
    }

    pub fn times_sigma_inv(self) -> Option<Coeff> {
        SIGMA_INV.product(self)
    }

    /// `Q0`, of degree `(1, 0)`.
    pub fn q0(self) -> Option<Coeff> {
        match self {
            Coeff::Pos { j, n } => (n % 2 == 1).then(|| Coeff::Pos { j: j + 1, n: n - 1 }),
            Coeff::Neg { m, n } => {
                (n % 2 == 0 && m >= 1).then(|| Coeff::Neg { m: m - 1, n: n + 1 })
            }
        }
    }

    /// `Q1`, of degree `(2, 1)`.
    pub fn q1(self) -> Option<Coeff> {
        match self {
            Coeff::Pos { j, n } => (n % 4 >= 2).then(|| Coeff::Pos { j: j + 3, n: n - 2 }),
            Coeff::Neg { m, n } => {
                (n % 4 <= 1 && m >= 3).then(|| Coeff::Neg { m: m - 3, n: n + 2 })
            }
        }
    }

    /// The dual monomial under the pairing `(h, h') ↦ coefficient of σ² in h·h'`.
    pub fn dual(self) -> Coeff {
        match self {
            Coeff::Pos { j, n } => Coeff::Neg { m: j, n },
            Coeff::Neg { m, n } => Coeff::Pos { j: m, n },
        }
    }

    /// Parses the names produced by `Display`.
    pub fn parse(s: &str) -> Option<Coeff> {
        if s == "1" {
            return Some(ONE);
        }
        let (apart, spart) = match s.find('s') {
            Some(i) => (&s[..i], Some(&s[i + 1..])),
            None => (s, None),
        };
        let apow: i64 = match apart {
            "" => 0,
            "a" => 1,
            _ => apart.strip_prefix("a^")?.parse().ok()?,
        };
        let spow: i64 = match spart {
            None => 0,
            Some(p) => p.strip_prefix('^')?.parse().ok()?,
        };
        if spow <= 0 {
            (apow >= 0).then(|| Coeff::Pos {
                j: apow as u32,
                n: (-spow) as u32,
            })
        } else {
            (spow >= 2 && apow <= 0).then(|| Coeff::Neg {
                m: (-apow) as u32,
                n: (spow - 2) as u32,
            })
        }
    }
}

impl fmt::Display for Coeff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let apart = |p: i64| match p {
            0 => String::new(),
            1 => "a".to_string(),
            _ => format!("a^{p}"),
        };
        match *self {
            Coeff::Pos { j: 0, n: 0 } => write!(f, "1"),
            Coeff::Pos { j, n } => {
                let s = if n == 0 {
                    String::new()
                } else {
                    format!("s^-{n}")
                };
                write!(f, "{}{}", apart(j as i64), s)
            }
            Coeff::Neg { m, n } => write!(f, "{}s^{}", apart(-(m as i64)), n + 2),
        }
    }
}

/// Monomials of a given twist, ordered by `m`-degree.
pub fn monomials_of_twist(k: i32) -> Vec<Coeff> {
    if k >= 0 {
        (0..=k as u32)
            .rev()
            .map(|n| Coeff::Pos { j: k as u32 - n, n })
            .collect()
    } else if k <= -2 {
        let t = (-k) as u32;
        (0..=t - 2)
            .map(|n| Coeff::Neg { m: t - (n + 2), n })
            .collect()
    } else {
        Vec::new()
    }
}

/// Monomials whose degree lies in `w`.
pub fn monomials_in(w: Window) -> Vec<Coeff> {
    let mut v = Vec::new();
    for k in w.k_lo..=w.k_hi {
        v.extend(
            monomials_of_twist(k)
                .into_iter()
                .filter(|c| w.contains(c.degree())),
        );
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Vec<Coeff> {
        (-12..=12).flat_map(monomials_of_twist).collect()
    }

    #[test]
    fn degrees_of_named_elements() {
        assert_eq!(A.degree(), bd(0, 1));
        assert_eq!(SIGMA_INV.degree(), bd(-1, 1));
        assert_eq!(SIGMA_SQ.degree(), bd(2, -2));
        assert!(monomials_of_twist(-1).is_empty());
        assert_eq!(monomials_of_twist(3).len(), 4);
        assert_eq!(monomials_of_twist(-4).len(), 3);
    }

    #[test]
    fn names_round_trip() {
        for c in sample() {
            assert_eq!(Coeff::parse(&c.to_string()), Some(c), "{c}");
        }
        assert_eq!(SIGMA_SQ.to_string(), "s^2");
        assert_eq!(Coeff::Neg { m: 1, n: 1 }.to_string(), "a^-1s^3");
    }

    #[test]
    fn operations_square_to_zero_and_commute() {
        for c in sample() {
            assert_eq!(c.q0().and_then(Coeff::q0), None);
            assert_eq!(c.q1().and_then(Coeff::q1), None);
            assert_eq!(
                c.q0().and_then(Coeff::q1),
                c.q1().and_then(Coeff::q0),
                "{c}"
            );
            if let Some(d) = c.q0() {
                assert_eq!(d.degree(), c.degree() + bd(1, 0));
            }
            if let Some(d) = c.q1() {
                assert_eq!(d.degree(), c.degree() + bd(2, 1));
            }
        }
    }

    #[test]
    fn negative_cone_operations_are_transposes() {
        // <Q h, g> = <h, Q g> for the pairing picking out σ²
        let pairs = |x: Coeff, y: Coeff| x.product(y) == Some(SIGMA_SQ);
        let pos: Vec<Coeff> = sample().into_iter().filter(|c| c.is_positive()).collect();
        let neg: Vec<Coeff> = sample().into_iter().filter(|c| !c.is_positive()).collect();
        for &h in &pos {
            for &g in &neg {
                let lhs0 = h.q0().is_some_and(|q| pairs(q, g));
                let rhs0 = g.q0().is_some_and(|q| pairs(h, q));
                assert_eq!(lhs0, rhs0, "Q0 on {h}, {g}");
                let lhs1 = h.q1().is_some_and(|q| pairs(q, g));
                let rhs1 = g.q1().is_some_and(|q| pairs(h, q));
                assert_eq!(lhs1, rhs1, "Q1 on {h}, {g}");
            }
        }
    }

    #[test]
    fn dual_pairs_to_sigma_squared() {
        for c in sample() {
            assert_eq!(c.product(c.dual()), Some(SIGMA_SQ));
            assert_eq!(c.degree() + c.dual().degree(), SIGMA2);
        }
    }

    #[test]
    fn q0_is_a_derivation_on_positive_cone() {
        let pos: Vec<Coeff> = (0..=6).flat_map(monomials_of_twist).collect();
        for &x in &pos {
            for &y in &pos {
                let lhs = x.product(y).and_then(Coeff::q0);
                let mut terms: Vec<Coeff> = Vec::new();
                if let Some(t) = x.q0().and_then(|q| q.product(y)) {
                    terms.push(t);
                }
                if let Some(t) = y.q0().and_then(|q| x.product(q)) {
                    terms.push(t);
                }
                let rhs = match terms.as_slice() {
                    [] => None,
                    [t] => Some(*t),
                    [s, t] if s == t => None,
                    _ => panic!("two distinct terms in one degree"),
                };
                assert_eq!(lhs, rhs, "{x} * {y}");
            }
        }
    }
}
