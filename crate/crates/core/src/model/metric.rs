use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::scalar::Rational;

/// Finite (pseudo)metric as a dense matrix of non-negative rationals.
/// Distinct points at distance zero are allowed; they model co-located items.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Metric {
    dist: Vec<Vec<Rational>>,
}

impl Metric {
    pub fn new(dist: Vec<Vec<Rational>>) -> Result<Self> {
        let n = dist.len();
        if n == 0 {
            return Err(Error::InvalidMetric("empty matrix".into()));
        }
        for (u, row) in dist.iter().enumerate() {
            if row.len() != n {
                return Err(Error::InvalidMetric(format!(
                    "row {u} has {} entries, expected {n}",
                    row.len()
                )));
            }
            if !row[u].is_zero() {
                return Err(Error::InvalidMetric(format!("d({u},{u}) = {} ≠ 0", row[u])));
            }
            for (v, d) in row.iter().enumerate() {
                if d.is_negative() {
                    return Err(Error::InvalidMetric(format!("d({u},{v}) = {d} < 0")));
                }
                if *d != dist[v][u] {
                    return Err(Error::InvalidMetric(format!(
                        "asymmetric: d({u},{v}) = {d} but d({v},{u}) = {}",
                        dist[v][u]
                    )));
                }
            }
        }
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if dist[a][c] > &dist[a][b] + &dist[b][c] {
                        return Err(Error::TriangleViolation(a, b, c));
                    }
                }
            }
        }
        Ok(Self { dist })
    }

    /// Builds the star metric `d(u,v) = leg[u] + leg[v]` for `u ≠ v`
    /// (`leg[center]` must be zero). Co-located leaves use `leg` equal and are
    /// joined by zero distance when listed in the same `group`.
    pub fn star(leg: &[Rational], group: &[usize]) -> Result<Self> {
        let n = leg.len();
        let mut dist = vec![vec![Rational::zero(); n]; n];
        for u in 0..n {
            for v in 0..n {
                if u != v && group[u] != group[v] {
                    dist[u][v] = &leg[u] + &leg[v];
                }
            }
        }
        Self::new(dist)
    }

    pub fn n(&self) -> usize {
        self.dist.len()
    }

    pub fn d(&self, u: usize, v: usize) -> &Rational {
        &self.dist[u][v]
    }

    pub fn rows(&self) -> &[Vec<Rational>] {
        &self.dist
    }

    pub fn min_positive(&self) -> Option<Rational> {
        self.dist
            .iter()
            .flatten()
            .filter(|d| d.is_positive())
            .min()
            .cloned()
    }

    pub fn scaled(&self, factor: &Rational) -> Self {
        Self {
            dist: self
                .dist
                .iter()
                .map(|row| row.iter().map(|d| d * factor).collect())
                .collect(),
        }
    }
}

/// Divides all distances by the minimum positive entry. Returns the
/// normalized metric and the scale (original = normalized × scale).
pub fn normalize_metric(m: &Metric) -> Result<(Metric, Rational)> {
    let scale = m.min_positive().ok_or(Error::DegenerateMetric)?;
    if scale.is_one() {
        return Ok((m.clone(), scale));
    }
    Ok((m.scaled(&scale.recip()), scale))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::int;

    fn m(rows: &[&[i64]]) -> Result<Metric> {
        Metric::new(
            rows.iter()
                .map(|r| r.iter().map(|&x| int(x)).collect())
                .collect(),
        )
    }

    #[test]
    fn normalizes_by_min_positive() {
        let (n, s) = normalize_metric(&m(&[&[0, 2], &[2, 0]]).unwrap()).unwrap();
        assert_eq!(s, int(2));
        assert_eq!(n, m(&[&[0, 1], &[1, 0]]).unwrap());

        let id = m(&[&[0, 1], &[1, 0]]).unwrap();
        let (n, s) = normalize_metric(&id).unwrap();
        assert_eq!(s, int(1));
        assert_eq!(n, id);

        let (n, s) = normalize_metric(&m(&[&[0, 3, 6], &[3, 0, 3], &[6, 3, 0]]).unwrap()).unwrap();
        assert_eq!(s, int(3));
        assert_eq!(n, m(&[&[0, 1, 2], &[1, 0, 1], &[2, 1, 0]]).unwrap());
        assert_eq!(n.min_positive(), Some(int(1)));
    }

    #[test]
    fn degenerate_metric_is_rejected() {
        let z = m(&[&[0, 0], &[0, 0]]).unwrap();
        assert_eq!(normalize_metric(&z).unwrap_err(), Error::DegenerateMetric);
    }

    #[test]
    fn triangle_violation_names_the_triple() {
        let err = m(&[&[0, 1, 5], &[1, 0, 1], &[5, 1, 0]]).unwrap_err();
        assert_eq!(err, Error::TriangleViolation(0, 1, 2));
        assert!(err.to_string().contains("(0, 1, 2)"));
    }

    #[test]
    fn rejects_asymmetry_and_diagonal() {
        assert!(m(&[&[0, 1], &[2, 0]]).is_err());
        assert!(m(&[&[1, 1], &[1, 0]]).is_err());
    }

    #[test]
    fn star_with_colocated_leaves() {
        let leg = [int(0), int(2), int(2), int(1)];
        let s = Metric::star(&leg, &[0, 1, 1, 2]).unwrap();
        assert_eq!(s.d(1, 2), &int(0));
        assert_eq!(s.d(1, 3), &int(3));
        assert_eq!(s.d(0, 2), &int(2));
    }
}
