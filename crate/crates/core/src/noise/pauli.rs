//! Two-qubit Pauli labels and the binary symplectic product.

use crate::error::{Error, Result};

/// Single-qubit Pauli factors in index order I, X, Y, Z.
const FACTORS: [char; 4] = ['I', 'X', 'Y', 'Z'];

/// A two-qubit Pauli P_a ⊗ P_b, packed as 4·a + b with I=0, X=1, Y=2, Z=3.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Pauli2(u8);

impl Pauli2 {
    pub const COUNT: usize = 16;
    pub const IDENTITY: Pauli2 = Pauli2(0);

    pub fn from_index(index: usize) -> Self {
        assert!(index < Self::COUNT);
        Pauli2(index as u8)
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    /// All 16 two-qubit Paulis in index order II, IX, .., ZZ.
    pub fn all() -> impl Iterator<Item = Pauli2> {
        (0..Self::COUNT).map(Pauli2::from_index)
    }

    pub fn first_factor(self) -> u8 {
        self.0 >> 2
    }

    pub fn second_factor(self) -> u8 {
        self.0 & 3
    }

    pub fn parse(label: &str) -> Result<Self> {
        let chars: Vec<char> = label.chars().collect();
        if chars.len() != 2 {
            return Err(Error::UnknownPauliLabel(label.to_string()));
        }
        let factor = |c: char| FACTORS.iter().position(|&f| f == c);
        match (factor(chars[0]), factor(chars[1])) {
            (Some(a), Some(b)) => Ok(Pauli2((4 * a + b) as u8)),
            _ => Err(Error::UnknownPauliLabel(label.to_string())),
        }
    }

    pub fn label(self) -> String {
        let mut s = String::with_capacity(2);
        s.push(FACTORS[self.first_factor() as usize]);
        s.push(FACTORS[self.second_factor() as usize]);
        s
    }
}

/// Binary symplectic product ⟨a,b⟩: 0 if P_a and P_b commute, 1 if they
/// anticommute.
pub fn symplectic_product(a: Pauli2, b: Pauli2) -> u8 {
    let anti = |x: u8, y: u8| (x != 0 && y != 0 && x != y) as u8;
    (anti(a.first_factor(), b.first_factor()) + anti(a.second_factor(), b.second_factor())) % 2
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn parse_and_label_round_trip() {
        for p in Pauli2::all() {
            assert_eq!(Pauli2::parse(&p.label()).unwrap(), p);
        }
        assert!(Pauli2::parse("XQ").is_err());
        assert!(Pauli2::parse("XXX").is_err());
    }

    #[test]
    fn symplectic_known_pairs() {
        let xx = Pauli2::parse("XX").unwrap();
        let zz = Pauli2::parse("ZZ").unwrap();
        let xi = Pauli2::parse("XI").unwrap();
        let zi = Pauli2::parse("ZI").unwrap();
        assert_eq!(symplectic_product(xx, zz), 0);
        assert_eq!(symplectic_product(xi, zi), 1);
    }

    /// 4×4 matrix of a two-qubit Pauli.
    fn matrix(p: Pauli2) -> [[Complex64; 4]; 4] {
        let single = |f: u8| -> [[Complex64; 2]; 2] {
            let z = Complex64::new(0.0, 0.0);
            let one = Complex64::new(1.0, 0.0);
            let i = Complex64::new(0.0, 1.0);
            match f {
                0 => [[one, z], [z, one]],
                1 => [[z, one], [one, z]],
                2 => [[z, -i], [i, z]],
                _ => [[one, z], [z, -one]],
            }
        };
        let a = single(p.first_factor());
        let b = single(p.second_factor());
        let mut out = [[Complex64::new(0.0, 0.0); 4]; 4];
        for (r, row) in out.iter_mut().enumerate() {
            for (c, entry) in row.iter_mut().enumerate() {
                *entry = a[r / 2][c / 2] * b[r % 2][c % 2];
            }
        }
        out
    }

    #[test]
    fn symplectic_matches_matrix_commutator_for_all_pairs() {
        for a in Pauli2::all() {
            for b in Pauli2::all() {
                let (ma, mb) = (matrix(a), matrix(b));
                let mut comm_norm = 0.0;
                for r in 0..4 {
                    for c in 0..4 {
                        let mut ab = Complex64::new(0.0, 0.0);
                        let mut ba = Complex64::new(0.0, 0.0);
                        for k in 0..4 {
                            ab += ma[r][k] * mb[k][c];
                            ba += mb[r][k] * ma[k][c];
                        }
                        comm_norm += (ab - ba).norm_sqr();
                    }
                }
                let expected = if comm_norm < 1e-20 { 0 } else { 1 };
                assert_eq!(
                    symplectic_product(a, b),
                    expected,
                    "pair ({}, {})",
                    a.label(),
                    b.label()
                );
            }
        }
    }
}
