use crate::geometry::Vec3;

/// Static 3-d tree for exact nearest-neighbour distance queries.
#[derive(Clone, Debug)]
pub struct KdTree {
    points: Vec<Vec3>,
    // implicit balanced tree over `points`, split axis per node
    axis: Vec<u8>,
}

impl KdTree {
    pub fn new(points: &[Vec3]) -> Self {
        let mut pts = points.to_vec();
        let mut axis = vec![0u8; pts.len()];
        build(&mut pts, &mut axis);
        KdTree { points: pts, axis }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn nearest_sq_dist(&self, q: &Vec3) -> f64 {
        let mut best = f64::INFINITY;
        self.search(0, self.points.len(), q, &mut best);
        best
    }

    fn search(&self, lo: usize, hi: usize, q: &Vec3, best: &mut f64) {
        if lo >= hi {
            return;
        }
        let mid = (lo + hi) / 2;
        let p = &self.points[mid];
        *best = best.min((p - q).norm_squared());
        let a = self.axis[mid] as usize;
        let diff = q[a] - p[a];
        let (near, far) = if diff < 0.0 { ((lo, mid), (mid + 1, hi)) } else { ((mid + 1, hi), (lo, mid)) };
        self.search(near.0, near.1, q, best);
        if diff * diff <= *best {
            self.search(far.0, far.1, q, best);
        }
    }
}

fn build(pts: &mut [Vec3], axis: &mut [u8]) {
    if pts.len() <= 1 {
        return;
    }
    let (lo, hi) = pts.iter().fold((Vec3::repeat(f64::INFINITY), Vec3::repeat(f64::NEG_INFINITY)), |(lo, hi), p| {
        (lo.inf(p), hi.sup(p))
    });
    let a = (hi - lo).imax();
    let mid = pts.len() / 2;
    pts.select_nth_unstable_by(mid, |x, y| x[a].total_cmp(&y[a]));
    axis[mid] = a as u8;
    let (left, right) = pts.split_at_mut(mid);
    let (al, ar) = axis.split_at_mut(mid);
    build(left, al);
    build(&mut right[1..], &mut ar[1..]);
}
