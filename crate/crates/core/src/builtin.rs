//! Reference designs shipped with the crate.
//!
//! `D1` and `D2` are two 18-run, 4-factor, 3-level orthogonal arrays of
//! strength 2 that rank in opposite order under minimum beta-aberration and
//! minimum contamination. They are stored factor-by-row, the way they are
//! usually printed, and transposed on load.
//!
//! `L18` is the 3-level part of the Taguchi `L18 (2^1 x 3^7)` mixed array:
//! columns 2 through 8 of the standard table, levels `1,2,3` relabeled
//! `0,1,2`, run order kept. It is an `OA(18, 3^7, 2)`. Column `c` here
//! (1-based) is column `c + 1` of the Taguchi table.

use crate::design::{Design, LevelPermutation};

pub const NAMES: [&str; 5] = ["D1", "D2", "D1p", "D2p", "L18"];

const D1_BY_FACTOR: [[usize; 18]; 4] = [
    [2, 0, 1, 2, 0, 1, 2, 0, 1, 2, 0, 1, 2, 0, 1, 2, 0, 1],
    [0, 1, 2, 0, 1, 2, 1, 2, 0, 2, 0, 1, 1, 2, 0, 2, 0, 1],
    [0, 1, 2, 1, 2, 0, 0, 1, 2, 2, 0, 1, 2, 0, 1, 1, 2, 0],
    [0, 1, 2, 1, 2, 0, 2, 0, 1, 1, 2, 0, 0, 1, 2, 2, 0, 1],
];

const D2_BY_FACTOR: [[usize; 18]; 4] = [
    [0, 0, 0, 1, 1, 1, 2, 2, 2, 0, 0, 0, 1, 1, 1, 2, 2, 2],
    [2, 0, 1, 2, 0, 1, 2, 0, 1, 2, 0, 1, 2, 0, 1, 2, 0, 1],
    [1, 2, 0, 1, 2, 0, 2, 0, 1, 0, 1, 2, 2, 0, 1, 0, 1, 2],
    [0, 1, 2, 2, 0, 1, 1, 2, 0, 1, 2, 0, 2, 0, 1, 0, 1, 2],
];

// Taguchi L18 columns 2..8, levels minus one.
const L18_ROWS: [[usize; 7]; 18] = [
    [0, 0, 0, 0, 0, 0, 0],
    [0, 1, 1, 1, 1, 1, 1],
    [0, 2, 2, 2, 2, 2, 2],
    [1, 0, 0, 1, 1, 2, 2],
    [1, 1, 1, 2, 2, 0, 0],
    [1, 2, 2, 0, 0, 1, 1],
    [2, 0, 1, 0, 2, 1, 2],
    [2, 1, 2, 1, 0, 2, 0],
    [2, 2, 0, 2, 1, 0, 1],
    [0, 0, 2, 2, 1, 1, 0],
    [0, 1, 0, 0, 2, 2, 1],
    [0, 2, 1, 1, 0, 0, 2],
    [1, 0, 1, 2, 0, 2, 1],
    [1, 1, 2, 0, 1, 0, 2],
    [1, 2, 0, 1, 2, 1, 0],
    [2, 0, 2, 1, 2, 0, 1],
    [2, 1, 0, 2, 0, 1, 2],
    [2, 2, 1, 0, 1, 2, 0],
];

/// Level map `{0,1,2} -> {2,0,1}`.
pub const SHIFT_TWO: [usize; 3] = [2, 0, 1];

fn from_factor_rows<const R: usize>(by_factor: &[[usize; R]]) -> Design {
    let rows: Vec<Vec<usize>> = (0..R)
        .map(|i| by_factor.iter().map(|f| f[i]).collect())
        .collect();
    Design::new(&rows, &vec![3; by_factor.len()]).expect("embedded design is valid")
}

pub fn d1() -> Design {
    from_factor_rows(&D1_BY_FACTOR)
}

pub fn d2() -> Design {
    from_factor_rows(&D2_BY_FACTOR)
}

fn permute_one(design: &Design, factor: usize) -> Design {
    let perm = LevelPermutation::identity(design.levels())
        .with_factor(factor, SHIFT_TWO.to_vec())
        .expect("valid permutation");
    design
        .apply_permutation(&perm)
        .expect("matching dimensions")
}

/// `D1` with factor 2 relabeled `{0,1,2} -> {2,0,1}`; mirror-symmetric.
pub fn d1_prime() -> Design {
    permute_one(&d1(), 1)
}

/// `D2` with factor 3 relabeled `{0,1,2} -> {2,0,1}`; mirror-symmetric.
pub fn d2_prime() -> Design {
    permute_one(&d2(), 2)
}

pub fn l18() -> Design {
    let rows: Vec<Vec<usize>> = L18_ROWS.iter().map(|r| r.to_vec()).collect();
    Design::new(&rows, &[3; 7]).expect("embedded design is valid")
}

/// Looks up a design by name (case-insensitive; `D1'` and `D1p` are the same).
pub fn by_name(name: &str) -> Option<Design> {
    match name.to_ascii_uppercase().as_str() {
        "D1" => Some(d1()),
        "D2" => Some(d2()),
        "D1P" | "D1'" => Some(d1_prime()),
        "D2P" | "D2'" => Some(d2_prime()),
        "L18" => Some(l18()),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn embedded_designs_have_strength_two() {
        for d in [d1(), d2(), d1_prime(), d2_prime(), l18()] {
            assert_eq!(d.runs(), 18);
            assert_eq!(d.strength(), 2);
        }
    }

    #[test]
    fn table_layout_round_trips() {
        let d = d1();
        for (j, factor) in D1_BY_FACTOR.iter().enumerate() {
            for (i, &x) in factor.iter().enumerate() {
                assert_eq!(d.cell(i, j), x);
            }
        }
        assert_eq!(d2().row(0), &[0, 2, 1, 0]);
    }

    #[test]
    fn primes_are_mirror_symmetric() {
        assert!(d1_prime().is_mirror_symmetric());
        assert!(d2_prime().is_mirror_symmetric());
        assert!(!d1().is_mirror_symmetric());
        assert!(!d2().is_mirror_symmetric());
    }

    #[test]
    fn lookup() {
        for name in NAMES {
            assert!(by_name(name).is_some(), "{name}");
        }
        assert_eq!(by_name("d1'"), Some(d1_prime()));
        assert!(by_name("L9").is_none());
    }
}
