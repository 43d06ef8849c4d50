/// Maximum mean weight over all cycles of a weighted digraph on `n` nodes,
/// by Karp's algorithm. `None` if the graph is acyclic.
///
/// `best[k][v]` is the heaviest walk of exactly `k` edges ending at `v`,
/// starting anywhere. Then
/// `max_v min_k (best[n][v] - best[k][v]) / (n - k)` is the answer.
pub fn max_mean_cycle(n: usize, edges: &[(usize, usize, f64)]) -> Option<f64> {
    if n == 0 {
        return None;
    }
    let ninf = f64::NEG_INFINITY;
    let mut best = vec![vec![ninf; n]; n + 1];
    best[0].iter_mut().for_each(|x| *x = 0.0);
    for k in 1..=n {
        let (prev, cur) = best.split_at_mut(k);
        let prev = &prev[k - 1];
        let cur = &mut cur[0];
        for &(u, v, w) in edges {
            if prev[u] > ninf {
                cur[v] = cur[v].max(prev[u] + w);
            }
        }
    }
    let mut answer: Option<f64> = None;
    for v in 0..n {
        if best[n][v] == ninf {
            continue;
        }
        let worst = (0..n)
            .filter(|&k| best[k][v] > ninf)
            .map(|k| (best[n][v] - best[k][v]) / (n - k) as f64)
            .fold(f64::INFINITY, f64::min);
        answer = Some(answer.map_or(worst, |a: f64| a.max(worst)));
    }
    answer
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Enumerates simple cycles by DFS from each smallest node.
    fn brute(n: usize, edges: &[(usize, usize, f64)]) -> Option<f64> {
        let mut best: Option<f64> = None;
        fn dfs(
            start: usize,
            v: usize,
            len: usize,
            w: f64,
            edges: &[(usize, usize, f64)],
            seen: &mut Vec<bool>,
            best: &mut Option<f64>,
        ) {
            for &(a, b, x) in edges {
                if a != v {
                    continue;
                }
                if b == start {
                    let mean = (w + x) / (len + 1) as f64;
                    *best = Some(best.map_or(mean, |m| m.max(mean)));
                } else if b > start && !seen[b] {
                    seen[b] = true;
                    dfs(start, b, len + 1, w + x, edges, seen, best);
                    seen[b] = false;
                }
            }
        }
        for s in 0..n {
            let mut seen = vec![false; n];
            seen[s] = true;
            dfs(s, s, 0, 0.0, edges, &mut seen, &mut best);
        }
        best
    }

    #[test]
    fn simple_cases() {
        assert_eq!(max_mean_cycle(2, &[(0, 1, 1.0)]), None);
        let m = max_mean_cycle(2, &[(0, 0, -1.0), (0, 1, 2.0), (1, 0, 0.0)]).unwrap();
        assert!((m - 1.0).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn matches_cycle_enumeration(
            n in 1usize..6,
            raw in proptest::collection::vec((0usize..6, 0usize..6, -3.0f64..3.0), 0..14),
        ) {
            let edges: Vec<_> = raw.into_iter().filter(|&(a, b, _)| a < n && b < n).collect();
            let fast = max_mean_cycle(n, &edges);
            let slow = brute(n, &edges);
            match (fast, slow) {
                (None, None) => {}
                (Some(a), Some(b)) => prop_assert!((a - b).abs() < 1e-9, "{a} vs {b}"),
                other => prop_assert!(false, "mismatch {:?}", other),
            }
        }
    }
}
