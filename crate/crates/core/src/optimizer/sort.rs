//! Fast nondominated sorting and crowding distance.

/// `a` Pareto-dominates `b` (minimization).
pub fn dominates(a: &[f64], b: &[f64]) -> bool {
    let mut strictly = false;
    for (x, y) in a.iter().zip(b) {
        if x > y {
            return false;
        }
        if x < y {
            strictly = true;
        }
    }
    strictly
}

/// Fronts of indices `0..n` under an arbitrary dominance relation, in rank
/// order. Indices within a front are ascending.
pub fn sort_fronts(n: usize, dominates: impl Fn(usize, usize) -> bool) -> Vec<Vec<usize>> {
    let mut dominated_by: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut counts = vec![0usize; n];
    for p in 0..n {
        for q in p + 1..n {
            if dominates(p, q) {
                dominated_by[p].push(q);
                counts[q] += 1;
            } else if dominates(q, p) {
                dominated_by[q].push(p);
                counts[p] += 1;
            }
        }
    }
    let mut fronts = Vec::new();
    let mut current: Vec<usize> = (0..n).filter(|&p| counts[p] == 0).collect();
    while !current.is_empty() {
        let mut next = Vec::new();
        for &p in &current {
            for &q in &dominated_by[p] {
                counts[q] -= 1;
                if counts[q] == 0 {
                    next.push(q);
                }
            }
        }
        next.sort_unstable();
        fronts.push(current);
        current = next;
    }
    fronts
}

/// Pareto rank of each point (0 = nondominated).
pub fn nondominated_sort(points: &[Vec<f64>]) -> Vec<usize> {
    let mut ranks = vec![0; points.len()];
    for (rank, front) in sort_fronts(points.len(), |p, q| dominates(&points[p], &points[q])).iter().enumerate() {
        for &i in front {
            ranks[i] = rank;
        }
    }
    ranks
}

/// Crowding distance of each point of one front. Extremes of every
/// objective get `+inf`; objectives with zero or non-finite span contribute
/// nothing to interior points.
pub fn crowding_distance(front: &[Vec<f64>]) -> Vec<f64> {
    let n = front.len();
    let mut distance = vec![0.0; n];
    if n == 0 {
        return distance;
    }
    let m = front[0].len();
    for obj in 0..m {
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| front[i][obj].total_cmp(&front[j][obj]).then(i.cmp(&j)));
        distance[order[0]] = f64::INFINITY;
        distance[order[n - 1]] = f64::INFINITY;
        let span = front[order[n - 1]][obj] - front[order[0]][obj];
        if !(span > 0.0 && span.is_finite()) {
            continue;
        }
        for k in 1..n.saturating_sub(1) {
            distance[order[k]] += (front[order[k + 1]][obj] - front[order[k - 1]][obj]) / span;
        }
    }
    distance
}

/// Hypervolume dominated by a two-objective point set relative to `reference`.
pub fn hypervolume_2d(points: &[[f64; 2]], reference: [f64; 2]) -> f64 {
    let mut pts: Vec<[f64; 2]> = points
        .iter()
        .copied()
        .filter(|p| p[0] < reference[0] && p[1] < reference[1])
        .collect();
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    let mut volume = 0.0;
    let mut ceiling = reference[1];
    for p in pts {
        if p[1] < ceiling {
            volume += (reference[0] - p[0]) * (ceiling - p[1]);
            ceiling = p[1];
        }
    }
    volume
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn hand_checked_ranks() {
        let pts = vec![vec![1.0, 2.0], vec![2.0, 1.0], vec![3.0, 3.0]];
        assert_eq!(nondominated_sort(&pts), vec![0, 0, 1]);
    }

    #[test]
    fn identical_points_share_rank_zero() {
        let pts = vec![vec![1.0, 1.0]; 5];
        assert_eq!(nondominated_sort(&pts), vec![0; 5]);
    }

    #[test]
    fn collinear_crowding() {
        let d = crowding_distance(&[vec![0.0, 2.0], vec![1.0, 1.0], vec![2.0, 0.0]]);
        assert_eq!(d[0], f64::INFINITY);
        assert_eq!(d[2], f64::INFINITY);
        assert_eq!(d[1], 2.0);
    }

    #[test]
    fn hypervolume_of_simple_sets() {
        assert!((hypervolume_2d(&[[0.0, 0.0]], [1.0, 1.0]) - 1.0).abs() < 1e-15);
        let hv = hypervolume_2d(&[[0.0, 1.0], [0.5, 0.5], [1.0, 0.0]], [1.1, 1.1]);
        let expected = 1.1 * 0.1 + 0.6 * 0.5 + 0.1 * 0.5;
        assert!((hv - expected).abs() < 1e-12);
    }

    /// Rank by repeatedly peeling the points no remaining point dominates.
    fn brute_force_ranks(points: &[Vec<f64>]) -> Vec<usize> {
        let n = points.len();
        let matrix: Vec<Vec<bool>> = (0..n).map(|i| (0..n).map(|j| dominates(&points[i], &points[j])).collect()).collect();
        let mut ranks = vec![usize::MAX; n];
        let mut rank = 0;
        while ranks.contains(&usize::MAX) {
            let layer: Vec<usize> = (0..n)
                .filter(|&j| ranks[j] == usize::MAX && !(0..n).any(|i| ranks[i] == usize::MAX && matrix[i][j]))
                .collect();
            for j in layer {
                ranks[j] = rank;
            }
            rank += 1;
        }
        ranks
    }

    proptest! {
        #[test]
        fn ranks_match_dominance_matrix(
            pts in proptest::collection::vec(proptest::collection::vec(0u8..12, 3), 1..200)
        ) {
            let pts: Vec<Vec<f64>> = pts.into_iter().map(|p| p.into_iter().map(f64::from).collect()).collect();
            prop_assert_eq!(nondominated_sort(&pts), brute_force_ranks(&pts));
        }

        #[test]
        fn crowding_is_nonnegative_with_infinite_extremes(
            pts in proptest::collection::vec((0.0f64..1.0, 0.0f64..1.0), 3..40)
        ) {
            let front: Vec<Vec<f64>> = pts.iter().map(|&(a, b)| vec![a, b]).collect();
            let d = crowding_distance(&front);
            prop_assert!(d.iter().all(|&x| x >= 0.0));
            prop_assert!(d.iter().filter(|x| x.is_infinite()).count() >= 2);
        }
    }
}
