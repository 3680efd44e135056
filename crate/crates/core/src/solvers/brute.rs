//! Exhaustive search, used as a test oracle.

use super::{Cover, CoverInstance, SolverStatus};
use crate::error::SolverError;

pub const BRUTE_FORCE_MAX_VERTICES: usize = 25;

/// Minimum-weight cover by enumerating all vertex subsets. Ties go to the
/// lexicographically smallest sorted vertex sequence.
pub fn brute_force_min_cover(instance: &CoverInstance) -> Result<Cover, SolverError> {
    let n = instance.len();
    if n > BRUTE_FORCE_MAX_VERTICES {
        return Err(SolverError::OracleTooLarge { max: BRUTE_FORCE_MAX_VERTICES, actual: n });
    }
    let masks: Vec<u32> = instance.hyperedges().iter().map(|e| e.iter().fold(0, |m, &i| m | 1 << i)).collect();
    let w = instance.weights();

    let mut best: Option<(f64, u32)> = None;
    for set in 0..(1u32 << n) {
        if !masks.iter().all(|m| m & set != 0) {
            continue;
        }
        let weight: f64 = (0..n).filter(|i| set >> i & 1 == 1).map(|i| w[i]).sum();
        best = match best {
            Some((bw, bs)) if weight > bw + 1e-9 => Some((bw, bs)),
            Some((bw, bs)) if weight >= bw - 1e-9 && !lex_less(set, bs) => Some((bw, bs)),
            _ => Some((weight, set)),
        };
    }
    let (_, set) = best.expect("the full vertex set is a cover");
    Ok(instance.cover_from((0..n).filter(|i| set >> i & 1 == 1), SolverStatus::Optimal))
}

/// Compares the ascending index sequences of two sets.
fn lex_less(a: u32, b: u32) -> bool {
    let (mut a, mut b) = (a, b);
    loop {
        match (a, b) {
            (0, 0) => return false,
            (0, _) => return true,
            (_, 0) => return false,
            _ => {}
        }
        let (x, y) = (a.trailing_zeros(), b.trailing_zeros());
        if x != y {
            return x < y;
        }
        a &= a - 1;
        b &= b - 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solvers::tests::{ids, instance, running_instance};

    #[test]
    fn running_example() {
        let cover = brute_force_min_cover(&running_instance()).unwrap();
        assert_eq!(cover.weight, 1.0);
        assert_eq!(ids(&cover), ["r1"]);
    }

    #[test]
    fn singleton() {
        assert_eq!(ids(&brute_force_min_cover(&instance(&[("a", 1.0)], &[&["a"]])).unwrap()), ["a"]);
    }

    #[test]
    fn triangle() {
        let inst = instance(&[("a", 1.0), ("b", 1.0), ("c", 1.0)], &[&["a", "b"], &["b", "c"], &["a", "c"]]);
        let cover = brute_force_min_cover(&inst).unwrap();
        assert_eq!(cover.weight, 2.0);
        assert_eq!(ids(&cover), ["a", "b"]);
    }

    #[test]
    fn lexicographic_order() {
        assert!(lex_less(0b011, 0b101));
        assert!(lex_less(0b001, 0b011));
        assert!(!lex_less(0b110, 0b101));
        assert!(!lex_less(0b101, 0b101));
    }

    #[test]
    fn too_large() {
        let names: Vec<String> = (0..26).map(|i| format!("v{i:02}")).collect();
        let weights: Vec<(&str, f64)> = names.iter().map(|n| (n.as_str(), 1.0)).collect();
        let edge: Vec<&str> = names.iter().map(|n| n.as_str()).collect();
        let inst = instance(&weights, &[&edge]);
        assert_eq!(brute_force_min_cover(&inst), Err(SolverError::OracleTooLarge { max: 25, actual: 26 }));
    }
}
