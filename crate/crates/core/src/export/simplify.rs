/// Indices of the points kept by Ramer-Douglas-Peucker simplification: no
/// dropped point lies farther than `tolerance` from the kept polyline. The
/// end points are always kept; `tolerance <= 0` keeps everything.
pub fn simplify_indices(points: &[Vec<f64>], tolerance: f64) -> Vec<usize> {
    let n = points.len();
    if n <= 2 || !(tolerance > 0.0) {
        return (0..n).collect();
    }
    let mut keep = vec![false; n];
    keep[0] = true;
    keep[n - 1] = true;
    let mut stack = vec![(0usize, n - 1)];
    while let Some((a, b)) = stack.pop() {
        if b <= a + 1 {
            continue;
        }
        let (mut worst, mut at) = (0.0, a);
        for i in a + 1..b {
            let d = segment_distance(&points[i], &points[a], &points[b]);
            if d > worst {
                worst = d;
                at = i;
            }
        }
        if worst > tolerance {
            keep[at] = true;
            stack.push((a, at));
            stack.push((at, b));
        }
    }
    (0..n).filter(|&i| keep[i]).collect()
}

fn segment_distance(p: &[f64], a: &[f64], b: &[f64]) -> f64 {
    let ab: Vec<f64> = a.iter().zip(b).map(|(x, y)| y - x).collect();
    let ap: Vec<f64> = a.iter().zip(p).map(|(x, y)| y - x).collect();
    let len2: f64 = ab.iter().map(|v| v * v).sum();
    let t = if len2 > 0.0 {
        (ap.iter().zip(&ab).map(|(u, v)| u * v).sum::<f64>() / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    ap.iter().zip(&ab).map(|(u, v)| (u - t * v).powi(2)).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn straight_line_keeps_ends() {
        let pts: Vec<Vec<f64>> = (0..100).map(|i| vec![i as f64, 2.0 * i as f64]).collect();
        assert_eq!(simplify_indices(&pts, 1e-9), vec![0, 99]);
        assert_eq!(simplify_indices(&pts, 0.0).len(), 100);
        let bent = vec![vec![0.0, 0.0], vec![1.0, 1.0], vec![2.0, 0.0]];
        assert_eq!(simplify_indices(&bent, 0.5), vec![0, 1, 2]);
        assert_eq!(simplify_indices(&bent, 2.0), vec![0, 2]);
    }
}
