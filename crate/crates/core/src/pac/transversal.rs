//! ε-transversals (ε-nets) of a finite concept list under a finitely
//! supported distribution, and the two sets built from them.

use num_bigint::BigInt;
use num_traits::Zero;

use super::learning::Memo;
use super::Distribution;
use crate::cantor::PointGen;
use crate::error::{Error, Result};
use crate::pi01::ConceptClassEnum;
use crate::rational::Rational;

/// Concepts of `concepts` whose mass exceeds `eps`.
fn heavy(memo: &Memo<'_>, concepts: &[usize], d: &Distribution, eps: &Rational) -> Result<Vec<usize>> {
    let atoms = d
        .atoms()
        .ok_or_else(|| Error::InvalidArgument("transversal checks need a finitely supported distribution".into()))?;
    let mut out = Vec::new();
    for &c in concepts {
        let mut mass = Rational::zero();
        for (x, w) in &atoms {
            if !w.is_zero() && memo.member(c, x)? {
                mass += w;
            }
        }
        if mass > *eps {
            out.push(c);
        }
    }
    Ok(out)
}

fn hits(memo: &Memo<'_>, c: usize, points: &[PointGen]) -> Result<bool> {
    for x in points {
        if memo.member(c, x)? {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Whether `n` meets every listed concept of mass greater than `eps`.
pub fn transversal_check(
    n: &[PointGen],
    class: &ConceptClassEnum,
    concepts: &[usize],
    d: &Distribution,
    eps: &Rational,
    precision: usize,
) -> Result<bool> {
    d.validate()?;
    let memo = Memo::new(class, precision);
    for c in heavy(&memo, concepts, d, eps)? {
        if !hits(&memo, c, n)? {
            return Ok(false);
        }
    }
    Ok(true)
}

fn distinct(xs: &[PointGen]) -> Vec<PointGen> {
    let mut out: Vec<PointGen> = Vec::new();
    for x in xs {
        if !out.iter().any(|y| y.same_point(x)) {
            out.push(x.clone());
        }
    }
    out
}

/// The distinct entries of `xs` do not form an ε-transversal.
pub fn q_membership(
    xs: &[PointGen],
    class: &ConceptClassEnum,
    concepts: &[usize],
    d: &Distribution,
    eps: &Rational,
    precision: usize,
) -> Result<bool> {
    transversal_check(&distinct(xs), class, concepts, d, eps, precision).map(|t| !t)
}

/// Some heavy concept misses `xs` entirely while at least `εm/2` entries of
/// `ys` fall inside it.
pub fn j_membership(
    xs: &[PointGen],
    ys: &[PointGen],
    class: &ConceptClassEnum,
    concepts: &[usize],
    d: &Distribution,
    eps: &Rational,
    precision: usize,
) -> Result<bool> {
    if xs.len() != ys.len() {
        return Err(Error::InvalidArgument(format!(
            "tuples have lengths {} and {}; they must match",
            xs.len(),
            ys.len()
        )));
    }
    d.validate()?;
    let memo = Memo::new(class, precision);
    let m = Rational::from_integer(BigInt::from(ys.len()));
    for c in heavy(&memo, concepts, d, eps)? {
        if hits(&memo, c, xs)? {
            continue;
        }
        let mut count = 0usize;
        for y in ys {
            if memo.member(c, y)? {
                count += 1;
            }
        }
        // count ≥ εm/2
        if Rational::from_integer(BigInt::from(2 * count)) >= eps * &m {
            return Ok(true);
        }
    }
    Ok(false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::TreeSpec;
    use crate::concepts::RationalInterval;
    use crate::pi01::StageTree;
    use crate::rational::{int, ratio};

    fn pt(x: Rational) -> PointGen {
        PointGen::rational(vec![x]).unwrap()
    }

    fn setup() -> (ConceptClassEnum, Distribution, Vec<PointGen>) {
        // Atoms 1/8, 3/8, 5/8, 7/8; concept 0 holds the first two, 1 holds one.
        let atoms: Vec<_> = (0..4).map(|i| pt(ratio(2 * i + 1, 8))).collect();
        let class = ConceptClassEnum::effective(vec![
            StageTree::from_spec(TreeSpec::Interval(RationalInterval::new(int(0), ratio(1, 2)).unwrap())).unwrap(),
            StageTree::from_spec(TreeSpec::Interval(RationalInterval::new(ratio(3, 4), int(1)).unwrap())).unwrap(),
        ]);
        (class, Distribution::uniform(atoms.clone()).unwrap(), atoms)
    }

    #[test]
    fn transversal_examples() {
        let (class, d, atoms) = setup();
        let eps = ratio(1, 4);
        assert!(transversal_check(&[], &class, &[], &d, &eps, 16).unwrap());
        assert!(transversal_check(&[atoms[0].clone()], &class, &[0], &d, &eps, 16).unwrap());
        assert!(!transversal_check(&[atoms[2].clone(), atoms[3].clone()], &class, &[0, 1], &d, &eps, 16).unwrap());
    }

    #[test]
    fn q_is_negated_transversal() {
        let (class, d, atoms) = setup();
        let eps = ratio(1, 4);
        assert!(!q_membership(&[atoms[1].clone(), atoms[1].clone()], &class, &[0, 1], &d, &eps, 16).unwrap());
        assert!(q_membership(&[atoms[3].clone()], &class, &[0, 1], &d, &eps, 16).unwrap());
        // Nothing is heavier than 1/2.
        assert!(!q_membership(&[atoms[3].clone()], &class, &[0, 1], &d, &ratio(1, 2), 16).unwrap());
    }

    #[test]
    fn j_examples() {
        let (class, d, atoms) = setup();
        let eps = ratio(1, 4);
        let xs = vec![atoms[2].clone(); 4];
        let ys = vec![atoms[0].clone(); 4];
        assert!(j_membership(&xs, &ys, &class, &[0], &d, &eps, 16).unwrap());
        let xs_hit = vec![atoms[0].clone(); 4];
        assert!(!j_membership(&xs_hit, &ys, &class, &[0], &d, &eps, 16).unwrap());
        // m = 4, εm/2 = 1/2: a single entry inside is exactly enough.
        let ys_one = vec![atoms[0].clone(), atoms[2].clone(), atoms[2].clone(), atoms[3].clone()];
        assert!(j_membership(&xs, &ys_one, &class, &[0], &d, &eps, 16).unwrap());
        let ys_none = vec![atoms[2].clone(); 4];
        assert!(!j_membership(&xs, &ys_none, &class, &[0], &d, &eps, 16).unwrap());
        assert!(j_membership(&xs, &ys[..3], &class, &[0], &d, &eps, 16).is_err());
    }
}
