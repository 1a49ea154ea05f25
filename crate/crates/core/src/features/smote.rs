use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// How one synthetic row was made: `x[base] + u * (x[neighbor] - x[base])`,
/// with indices into the input rows.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Synthetic {
    pub base: usize,
    pub neighbor: usize,
    pub u: f64,
}

/// Input rows followed by the synthetic minority rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Resampled {
    pub x: Vec<Vec<f64>>,
    pub y: Vec<u8>,
    pub synthetic: Vec<Synthetic>,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum()
}

/// Oversamples the minority class until both classes have equal counts.
///
/// Each synthetic row interpolates between a uniformly drawn minority row
/// and one of its `k` nearest minority neighbours (Euclidean, ties to the
/// lower index). `k` is clamped to `minority_count - 1`.
pub fn smote(x: &[Vec<f64>], y: &[u8], k: usize, seed: u64) -> Result<Resampled> {
    if x.len() != y.len() {
        return Err(Error::invalid(format!("{} rows but {} labels", x.len(), y.len())));
    }
    if x.is_empty() {
        return Err(Error::Empty("SMOTE input"));
    }
    if k == 0 {
        return Err(Error::invalid("SMOTE needs k >= 1"));
    }
    let dim = x[0].len();
    for row in x {
        if row.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: row.len(),
            });
        }
        if row.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteFeature);
        }
    }
    if let Some(bad) = y.iter().find(|&&l| l > 1) {
        return Err(Error::invalid(format!("label {bad} not in {{0, 1}}")));
    }
    let ones = y.iter().filter(|&&l| l == 1).count();
    let zeros = y.len() - ones;
    if ones == 0 || zeros == 0 {
        return Err(Error::SingleClass);
    }
    let mut out = Resampled {
        x: x.to_vec(),
        y: y.to_vec(),
        synthetic: Vec::new(),
    };
    if ones == zeros {
        return Ok(out);
    }
    let minority_label = u8::from(ones < zeros);
    let minority: Vec<usize> = (0..y.len()).filter(|&i| y[i] == minority_label).collect();
    let m = minority.len();
    if m < 2 {
        return Err(Error::MinorityTooSmall(m));
    }
    let k = k.min(m - 1);
    let need = ones.max(zeros) - m;

    let mut neighbours: Vec<Option<Vec<usize>>> = vec![None; m];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..need {
        let b = rng.gen_range(0..m);
        let nn = neighbours[b].get_or_insert_with(|| {
            let base = &x[minority[b]];
            let mut cand: Vec<(f64, usize)> = (0..m)
                .filter(|&j| j != b)
                .map(|j| (sq_dist(base, &x[minority[j]]), j))
                .collect();
            cand.sort_by(|p, q| p.0.total_cmp(&q.0).then(p.1.cmp(&q.1)));
            cand.into_iter().take(k).map(|(_, j)| j).collect()
        });
        let pick = nn[rng.gen_range(0..k)];
        let u: f64 = rng.gen();
        let (base, neighbor) = (minority[b], minority[pick]);
        let row = x[base]
            .iter()
            .zip(&x[neighbor])
            .map(|(a, c)| a + u * (c - a))
            .collect();
        out.x.push(row);
        out.y.push(minority_label);
        out.synthetic.push(Synthetic { base, neighbor, u });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn balanced_input_is_unchanged() {
        let x = vec![vec![0.0], vec![1.0]];
        let y = vec![0, 1];
        let r = smote(&x, &y, 5, 1).unwrap();
        assert_eq!(r.x, x);
        assert_eq!(r.y, y);
        assert!(r.synthetic.is_empty());
    }

    #[test]
    fn two_point_minority_stays_on_segment() {
        let x = vec![
            vec![0.0, 0.0],
            vec![1.0, 1.0],
            vec![5.0, 0.0],
            vec![6.0, 0.0],
            vec![7.0, 0.0],
        ];
        let y = vec![1, 1, 0, 0, 0];
        let r = smote(&x, &y, 5, 3).unwrap();
        assert_eq!(r.x.len(), 6);
        let s = &r.x[5];
        assert_eq!(s[0], s[1]);
        assert!((0.0..=1.0).contains(&s[0]));
        assert_eq!(r.y[5], 1);
    }

    #[test]
    fn counts_balance() {
        let mut x = Vec::new();
        let mut y = Vec::new();
        for i in 0..140 {
            x.push(vec![i as f64, (i % 7) as f64]);
            y.push(u8::from(i % 7 < 2));
        }
        let ones = y.iter().filter(|&&l| l == 1).count();
        let r = smote(&x, &y, 5, 9).unwrap();
        let ones_after = r.y.iter().filter(|&&l| l == 1).count();
        assert_eq!(ones_after, 140 - ones);
        assert_eq!(r.x.len(), 2 * (140 - ones));
        assert_eq!(r.x[..140], x[..]);
        assert_eq!(smote(&x, &y, 5, 9).unwrap(), r);
    }

    #[test]
    fn errors() {
        assert!(matches!(
            smote(&[vec![0.0], vec![1.0]], &[1, 1], 5, 0),
            Err(Error::SingleClass)
        ));
        assert!(matches!(
            smote(&[vec![0.0], vec![1.0], vec![2.0]], &[1, 0, 0], 5, 0),
            Err(Error::MinorityTooSmall(1))
        ));
        assert!(smote(&[vec![0.0]], &[0, 1], 5, 0).is_err());
        assert!(smote(&[vec![f64::NAN], vec![0.0]], &[0, 1], 5, 0).is_err());
    }

    #[test]
    fn neighbour_ties_prefer_lower_index() {
        let x = vec![
            vec![0.0],
            vec![1.0],
            vec![-1.0],
            vec![9.0],
            vec![9.0],
            vec![9.0],
            vec![9.0],
        ];
        let y = vec![1, 1, 1, 0, 0, 0, 0];
        let mut hits = 0;
        for seed in 0..30 {
            for s in smote(&x, &y, 1, seed).unwrap().synthetic {
                if s.base == 0 {
                    assert_eq!(s.neighbor, 1);
                    hits += 1;
                }
            }
        }
        assert!(hits > 0);
    }
}
