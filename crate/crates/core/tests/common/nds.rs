//! Repeated peeling of the non-dominated set, and a reference replacement step.

pub type Point = [f64; 2];

pub fn dominates(a: &Point, b: &Point) -> bool {
    a[0] >= b[0] && a[1] >= b[1] && (a[0] > b[0] || a[1] > b[1])
}

/// Fronts best first, each sorted ascending. O(n^3).
pub fn peel(points: &[Point]) -> Vec<Vec<usize>> {
    let mut left: Vec<usize> = (0..points.len()).collect();
    let mut fronts = Vec::new();
    while !left.is_empty() {
        let front: Vec<usize> = left
            .iter()
            .copied()
            .filter(|&i| !left.iter().any(|&j| dominates(&points[j], &points[i])))
            .collect();
        left.retain(|i| !front.contains(i));
        fronts.push(front);
    }
    fronts
}

/// Crowding by brute force: for each member and objective, find its neighbours in
/// the order `(value, index)` and add the normalized gap.
#[allow(clippy::needless_range_loop)]
pub fn crowding(front: &[usize], points: &[Point]) -> Vec<f64> {
    if front.len() <= 2 {
        return vec![f64::INFINITY; front.len()];
    }
    let key = |i: usize, m: usize| (points[i][m], i);
    let before = |a: (f64, usize), b: (f64, usize)| a.0 < b.0 || (a.0 == b.0 && a.1 < b.1);
    front
        .iter()
        .map(|&i| {
            let mut d = 0.0;
            for m in 0..2 {
                let lower: Vec<usize> = front.iter().copied().filter(|&j| before(key(j, m), key(i, m))).collect();
                let upper: Vec<usize> = front.iter().copied().filter(|&j| before(key(i, m), key(j, m))).collect();
                if lower.is_empty() || upper.is_empty() {
                    return f64::INFINITY;
                }
                let lo = front.iter().map(|&j| points[j][m]).fold(f64::INFINITY, f64::min);
                let hi = front.iter().map(|&j| points[j][m]).fold(f64::NEG_INFINITY, f64::max);
                if hi - lo <= 0.0 {
                    continue;
                }
                let prev = lower.iter().copied().max_by(|&a, &b| cmp(key(a, m), key(b, m))).unwrap();
                let next = upper.iter().copied().min_by(|&a, &b| cmp(key(a, m), key(b, m))).unwrap();
                d += (points[next][m] - points[prev][m]) / (hi - lo);
            }
            d
        })
        .collect()
}

fn cmp(a: (f64, usize), b: (f64, usize)) -> std::cmp::Ordering {
    a.0.total_cmp(&b.0).then(a.1.cmp(&b.1))
}

/// Indices kept when truncating `points` to `capacity`: sort by front, then
/// descending crowding, then index.
pub fn select(points: &[Point], capacity: usize) -> Vec<usize> {
    let mut rank = vec![0usize; points.len()];
    let mut dist = vec![0.0f64; points.len()];
    for (r, front) in peel(points).iter().enumerate() {
        for (&i, d) in front.iter().zip(crowding(front, points)) {
            rank[i] = r;
            dist[i] = d;
        }
    }
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| rank[a].cmp(&rank[b]).then(dist[b].total_cmp(&dist[a])).then(a.cmp(&b)));
    order.truncate(capacity);
    order.sort_unstable();
    order
}
