//! DBSCAN over integer pixel coordinates.
//!
//! Points are processed in row-major order, which fixes cluster numbering
//! and makes border points belong to the first cluster that reaches them.
//! Neighbor queries go through a hash of occupied pixels and a precomputed
//! disc of offsets, so the cost is `O(n * eps^2)`.

use std::collections::{HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use super::PixelSet;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DbscanParams {
    /// Neighborhood radius, pixels (Euclidean, inclusive).
    pub eps: f64,
    /// Neighbors (self included) a point needs to be a core point.
    pub min_pts: usize,
}

impl Default for DbscanParams {
    fn default() -> Self {
        Self { eps: 3.0, min_pts: 4 }
    }
}

impl DbscanParams {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.eps > 0.0 && self.eps.is_finite()) {
            return Err(format!("eps must be > 0, got {}", self.eps));
        }
        if self.min_pts == 0 {
            return Err("min_pts must be >= 1".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Clustering {
    pub clusters: Vec<PixelSet>,
    pub noise: PixelSet,
}

#[derive(Clone, Copy, PartialEq)]
enum Label {
    Unvisited,
    Noise,
    Cluster(usize),
}

fn disc_offsets(eps: f64) -> Vec<(i64, i64)> {
    let r = eps.floor() as i64;
    let eps2 = eps * eps;
    let mut out = Vec::new();
    for dy in -r..=r {
        for dx in -r..=r {
            if ((dx * dx + dy * dy) as f64) <= eps2 {
                out.push((dx, dy));
            }
        }
    }
    out
}

pub fn cluster_pixels(ps: &PixelSet, params: &DbscanParams) -> Clustering {
    let points = ps.pixels();
    let n = points.len();
    if n == 0 {
        return Clustering::default();
    }
    let index: HashMap<(i64, i64), usize> = points
        .iter()
        .enumerate()
        .map(|(i, p)| ((i64::from(p.x), i64::from(p.y)), i))
        .collect();
    let offsets = disc_offsets(params.eps);
    // offsets run row-major, so hits come out in increasing index order
    let neighbors = |i: usize, out: &mut Vec<usize>| {
        out.clear();
        let (x, y) = (i64::from(points[i].x), i64::from(points[i].y));
        out.extend(offsets.iter().filter_map(|(dx, dy)| index.get(&(x + dx, y + dy)).copied()));
    };

    let mut labels = vec![Label::Unvisited; n];
    let mut n_clusters = 0;
    let mut buf = Vec::new();
    let mut queue = VecDeque::new();
    for p in 0..n {
        if labels[p] != Label::Unvisited {
            continue;
        }
        neighbors(p, &mut buf);
        if buf.len() < params.min_pts {
            labels[p] = Label::Noise;
            continue;
        }
        let c = n_clusters;
        n_clusters += 1;
        labels[p] = Label::Cluster(c);
        queue.clear();
        queue.extend(buf.iter().copied().filter(|&q| q != p));
        while let Some(q) = queue.pop_front() {
            match labels[q] {
                Label::Noise => {
                    labels[q] = Label::Cluster(c);
                    continue;
                }
                Label::Cluster(_) => continue,
                Label::Unvisited => {}
            }
            labels[q] = Label::Cluster(c);
            neighbors(q, &mut buf);
            if buf.len() >= params.min_pts {
                queue.extend(buf.iter().copied().filter(|&r| labels[r] == Label::Unvisited || labels[r] == Label::Noise));
            }
        }
    }

    let mut clusters = vec![Vec::new(); n_clusters];
    let mut noise = Vec::new();
    for (i, l) in labels.iter().enumerate() {
        match l {
            Label::Cluster(c) => clusters[*c].push(points[i]),
            _ => noise.push(points[i]),
        }
    }
    Clustering {
        clusters: clusters.into_iter().map(PixelSet::from_sorted_unique).collect(),
        noise: PixelSet::from_sorted_unique(noise),
    }
}

/// Largest cluster; ties go to the smaller centroid row, then column.
pub fn select_drone_cluster(clusters: &[PixelSet]) -> Option<&PixelSet> {
    clusters.iter().min_by(|a, b| {
        b.len().cmp(&a.len()).then_with(|| {
            let (ca, cb) = (a.centroid(), b.centroid());
            ca.x2.total_cmp(&cb.x2).then(ca.x1.total_cmp(&cb.x1))
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vision::Pixel;
    use proptest::prelude::*;
    use std::collections::BTreeSet;

    fn set(points: &[(u32, u32)]) -> PixelSet {
        PixelSet::new(points.iter().map(|&(x, y)| Pixel { x, y }).collect())
    }

    /// O(n^2) reference: core points from pairwise distances, clusters as
    /// connected components of core points, numbered by their first core
    /// point in row-major order; border points join the lowest-numbered
    /// adjacent cluster.
    pub(crate) fn brute_force(ps: &PixelSet, params: &DbscanParams) -> (Vec<BTreeSet<Pixel>>, BTreeSet<Pixel>) {
        let pts = ps.pixels();
        let n = pts.len();
        let close = |i: usize, j: usize| {
            let dx = f64::from(pts[i].x) - f64::from(pts[j].x);
            let dy = f64::from(pts[i].y) - f64::from(pts[j].y);
            dx * dx + dy * dy <= params.eps * params.eps
        };
        let core: Vec<bool> = (0..n).map(|i| (0..n).filter(|&j| close(i, j)).count() >= params.min_pts).collect();
        let mut comp = vec![usize::MAX; n];
        let mut n_comp = 0;
        for i in 0..n {
            if !core[i] || comp[i] != usize::MAX {
                continue;
            }
            let mut stack = vec![i];
            comp[i] = n_comp;
            while let Some(a) = stack.pop() {
                for b in 0..n {
                    if core[b] && comp[b] == usize::MAX && close(a, b) {
                        comp[b] = n_comp;
                        stack.push(b);
                    }
                }
            }
            n_comp += 1;
        }
        let mut clusters = vec![BTreeSet::new(); n_comp];
        let mut noise = BTreeSet::new();
        for i in 0..n {
            let c = if core[i] {
                Some(comp[i])
            } else {
                (0..n).filter(|&j| core[j] && close(i, j)).map(|j| comp[j]).min()
            };
            match c {
                Some(c) => {
                    clusters[c].insert(pts[i]);
                }
                None => {
                    noise.insert(pts[i]);
                }
            }
        }
        (clusters, noise)
    }

    pub(crate) fn as_sets(c: &Clustering) -> (Vec<BTreeSet<Pixel>>, BTreeSet<Pixel>) {
        (
            c.clusters.iter().map(|s| s.pixels().iter().copied().collect()).collect(),
            c.noise.pixels().iter().copied().collect(),
        )
    }

    #[test]
    fn empty_input() {
        let c = cluster_pixels(&PixelSet::default(), &DbscanParams::default());
        assert!(c.clusters.is_empty() && c.noise.is_empty());
    }

    #[test]
    fn isolated_pixel_is_noise() {
        let c = cluster_pixels(&set(&[(5, 5)]), &DbscanParams { eps: 3.0, min_pts: 4 });
        assert!(c.clusters.is_empty());
        assert_eq!(c.noise.len(), 1);
    }

    #[test]
    fn three_by_three_block() {
        let pts: Vec<(u32, u32)> = (0..3).flat_map(|y| (0..3).map(move |x| (x + 10, y + 10))).collect();
        let ps = set(&pts);
        let params = DbscanParams { eps: 3.0, min_pts: 4 };
        let c = cluster_pixels(&ps, &params);
        assert_eq!(c.clusters.len(), 1);
        assert_eq!(c.clusters[0].len(), 9);
        assert_eq!(as_sets(&c), brute_force(&ps, &params));
    }

    #[test]
    fn border_point_goes_to_first_cluster() {
        // two horizontal bars whose ends are 4 apart; the middle pixel is a
        // border point of both but core of neither
        let mut pts: Vec<(u32, u32)> = (0..5).map(|x| (x, 0)).collect();
        pts.push((6, 0));
        pts.extend((8..13).map(|x| (x, 0)));
        let params = DbscanParams { eps: 2.0, min_pts: 4 };
        let ps = set(&pts);
        let c = cluster_pixels(&ps, &params);
        assert_eq!(as_sets(&c), brute_force(&ps, &params));
        assert!(c.clusters[0].pixels().contains(&Pixel { x: 6, y: 0 }));
    }

    #[test]
    fn selection_rules() {
        assert!(select_drone_cluster(&[]).is_none());
        let big = set(&(0..40).map(|i| (i % 8, i / 8)).collect::<Vec<_>>());
        let small = set(&(0..7).map(|i| (100 + i, 50)).collect::<Vec<_>>());
        assert_eq!(select_drone_cluster(&[small.clone(), big.clone()]), Some(&big));

        // equal sizes, centroids (10,10) and (10,30) as (column, row)
        let square = |cx: u32, cy: u32| {
            set(&[(cx - 1, cy - 1), (cx, cy - 1), (cx + 1, cy - 1), (cx - 1, cy), (cx + 1, cy), (cx - 1, cy + 1), (cx, cy + 1), (cx + 1, cy + 1), (cx - 2, cy), (cx + 2, cy), (cx, cy - 2), (cx, cy + 2)])
        };
        let a = square(10, 10);
        let b = square(10, 30);
        assert_eq!(a.len(), 12);
        assert_eq!(select_drone_cluster(&[b.clone(), a.clone()]), Some(&a));
    }

    fn arb_pixels() -> impl Strategy<Value = Vec<(u32, u32)>> {
        prop::collection::vec((0u32..60, 0u32..40), 0..300)
    }

    proptest! {
        #[test]
        fn matches_brute_force(pts in arb_pixels(), eps in 1.0..4.5f64, min_pts in 1usize..8) {
            let ps = set(&pts);
            let params = DbscanParams { eps, min_pts };
            prop_assert_eq!(as_sets(&cluster_pixels(&ps, &params)), brute_force(&ps, &params));
        }

        #[test]
        fn input_order_does_not_matter(mut pts in arb_pixels(), seed in any::<u64>()) {
            let params = DbscanParams::default();
            let a = cluster_pixels(&set(&pts), &params);
            // deterministic shuffle
            let n = pts.len();
            let mut s = seed | 1;
            for i in (1..n).rev() {
                s ^= s << 13; s ^= s >> 7; s ^= s << 17;
                pts.swap(i, (s % (i as u64 + 1)) as usize);
            }
            let b = cluster_pixels(&set(&pts), &params);
            prop_assert_eq!(a, b);
        }
    }
}
