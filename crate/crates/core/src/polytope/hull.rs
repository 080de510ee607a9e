//! Exact convex hulls of integer point sets by beneath-beyond, carried out in
//! coordinates of the affine span.

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{One, Zero};

type Q = Ratio<i128>;

/// Reduced row echelon form; returns the reduced rows and pivot columns.
pub(crate) fn rref(mut rows: Vec<Vec<Q>>, ncols: usize) -> (Vec<Vec<Q>>, Vec<usize>) {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        let inv = rows[r][c].recip();
        for v in rows[r].iter_mut() {
            *v *= inv;
        }
        for i in 0..rows.len() {
            if i != r && !rows[i][c].is_zero() {
                let f = rows[i][c];
                for j in 0..ncols {
                    let sub = rows[r][j] * f;
                    rows[i][j] -= sub;
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == rows.len() {
            break;
        }
    }
    rows.truncate(r);
    (rows, pivots)
}

/// Scales a rational vector to the primitive integer vector in the same direction.
pub(crate) fn primitive(v: &[Q]) -> Vec<i64> {
    let lcm = v.iter().fold(1i128, |acc, x| acc.lcm(x.denom()));
    let ints: Vec<i128> = v.iter().map(|x| (x * lcm).to_integer()).collect();
    let g = ints.iter().fold(0i128, |acc, x| acc.gcd(x));
    let g = if g == 0 { 1 } else { g };
    ints.iter().map(|x| i64::try_from(x / g).expect("normal entry overflows i64")).collect()
}

/// Integer basis of the null space of `rows` (each row of length `ncols`).
pub(crate) fn null_space(rows: &[Vec<i64>], ncols: usize) -> Vec<Vec<i64>> {
    let q: Vec<Vec<Q>> = rows.iter().map(|r| r.iter().map(|&v| Q::from_integer(v as i128)).collect()).collect();
    let (red, pivots) = rref(q, ncols);
    (0..ncols)
        .filter(|c| !pivots.contains(c))
        .map(|free| {
            let mut v = vec![Q::zero(); ncols];
            v[free] = Q::one();
            for (row, &p) in red.iter().zip(&pivots) {
                v[p] = -row[free];
            }
            primitive(&v)
        })
        .collect()
}

pub(crate) fn dot(a: &[i64], b: &[i64]) -> i128 {
    a.iter().zip(b).map(|(&x, &y)| x as i128 * y as i128).sum()
}

/// Rank of the differences `p_i − p_0`; −1 for an empty set.
pub(crate) fn affine_rank(points: &[&[i64]]) -> isize {
    let Some(first) = points.first() else {
        return -1;
    };
    let n = first.len();
    let rows: Vec<Vec<Q>> = points[1..]
        .iter()
        .map(|p| p.iter().zip(first.iter()).map(|(&a, &b)| Q::from_integer((a - b) as i128)).collect())
        .collect();
    rref(rows, n).1.len() as isize
}

/// The affine span of a point set: an origin, coordinates that parametrize it,
/// and integer equations cutting it out.
#[derive(Clone, Debug, PartialEq)]
pub struct AffineSpan {
    origin: Vec<i64>,
    /// Reduced basis of the direction space, one row per pivot.
    basis: Vec<Vec<Q>>,
    pivots: Vec<usize>,
    equations: Vec<(Vec<i64>, i64)>,
}

impl AffineSpan {
    pub fn of(points: &[Vec<i64>]) -> Self {
        let origin = points[0].clone();
        let n = origin.len();
        let diffs: Vec<Vec<Q>> = points[1..]
            .iter()
            .map(|p| p.iter().zip(&origin).map(|(&a, &b)| Q::from_integer((a - b) as i128)).collect())
            .collect();
        let (basis, pivots) = rref(diffs, n);
        let int_rows: Vec<Vec<i64>> = basis.iter().map(|r| primitive(r)).collect();
        let equations = null_space(&int_rows, n)
            .into_iter()
            .map(|c| {
                let e = dot(&c, &origin) as i64;
                (c, e)
            })
            .collect();
        Self { origin, basis, pivots, equations }
    }

    pub fn dim(&self) -> usize {
        self.pivots.len()
    }

    pub fn ambient(&self) -> usize {
        self.origin.len()
    }

    /// Coordinates used to parametrize the span.
    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    /// Primitive integer equations `⟨c, x⟩ = e` whose common solutions are the span.
    pub fn equations(&self) -> &[(Vec<i64>, i64)] {
        &self.equations
    }

    pub fn contains(&self, x: &[i64]) -> bool {
        self.equations.iter().all(|(c, e)| dot(c, x) == *e as i128)
    }

    pub fn project(&self, x: &[i64]) -> Vec<i64> {
        self.pivots.iter().map(|&p| x[p]).collect()
    }

    /// The point of the span with the given pivot coordinates, if it is integral.
    pub fn lift(&self, y: &[i64]) -> Option<Vec<i64>> {
        let mut x: Vec<Q> = self.origin.iter().map(|&v| Q::from_integer(v as i128)).collect();
        for ((row, &p), &yv) in self.basis.iter().zip(&self.pivots).zip(y) {
            let lambda = Q::from_integer((yv - self.origin[p]) as i128);
            for (xi, r) in x.iter_mut().zip(row) {
                *xi += lambda * r;
            }
        }
        x.iter().map(|v| if v.is_integer() { i64::try_from(v.to_integer()).ok() } else { None }).collect()
    }

    /// Embeds a functional on pivot coordinates as an ambient vector.
    pub fn embed_functional(&self, w: &[i64]) -> Vec<i64> {
        let mut out = vec![0; self.ambient()];
        for (&p, &v) in self.pivots.iter().zip(w) {
            out[p] = v;
        }
        out
    }
}

/// A facet `⟨normal, x⟩ ≤ offset` with the input points lying on it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Facet {
    /// Primitive integer normal in ambient coordinates, zero off the span pivots.
    pub normal: Vec<i64>,
    pub offset: i64,
    /// Indices into [`Hull::points`] of the points on this facet.
    pub points: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct Hull {
    points: Vec<Vec<i64>>,
    span: AffineSpan,
    facets: Vec<Facet>,
    vertices: Vec<usize>,
}

struct LocalFacet {
    normal: Vec<i64>,
    offset: i128,
    members: Vec<usize>,
}

impl Hull {
    /// Hull of a nonempty set of points of equal length. Duplicates are removed.
    pub fn new(points: &[Vec<i64>]) -> Self {
        assert!(!points.is_empty(), "hull of an empty set");
        let mut pts = points.to_vec();
        pts.sort();
        pts.dedup();
        let span = AffineSpan::of(&pts);
        let local: Vec<Vec<i64>> = pts.iter().map(|p| span.project(p)).collect();
        let k = span.dim();
        let (facets, vertices) = match k {
            0 => (Vec::new(), vec![0]),
            1 => {
                let lo = (0..local.len()).min_by_key(|&i| local[i][0]).unwrap_or(0);
                let hi = (0..local.len()).max_by_key(|&i| local[i][0]).unwrap_or(0);
                let f = vec![
                    LocalFacet { normal: vec![-1], offset: -(local[lo][0] as i128), members: vec![lo] },
                    LocalFacet { normal: vec![1], offset: local[hi][0] as i128, members: vec![hi] },
                ];
                (f, vec![lo.min(hi), lo.max(hi)])
            }
            _ => beneath_beyond(&local, k),
        };
        let facets = facets
            .into_iter()
            .map(|f| Facet {
                normal: span.embed_functional(&f.normal),
                offset: i64::try_from(f.offset).expect("facet offset overflows i64"),
                points: f.members,
            })
            .collect();
        Self { points: pts, span, facets, vertices }
    }

    /// Distinct input points, sorted.
    pub fn points(&self) -> &[Vec<i64>] {
        &self.points
    }

    pub fn span(&self) -> &AffineSpan {
        &self.span
    }

    pub fn dim(&self) -> usize {
        self.span.dim()
    }

    pub fn facets(&self) -> &[Facet] {
        &self.facets
    }

    /// Vertices in sorted order.
    pub fn vertices(&self) -> Vec<Vec<i64>> {
        self.vertices.iter().map(|&i| self.points[i].clone()).collect()
    }

    pub fn contains(&self, x: &[i64]) -> bool {
        self.span.contains(x) && self.facets.iter().all(|f| dot(&f.normal, x) <= f.offset as i128)
    }

    /// Number of integer points in the hull.
    pub fn lattice_point_count(&self) -> usize {
        let k = self.dim();
        let local: Vec<Vec<i64>> = self.points.iter().map(|p| self.span.project(p)).collect();
        let lo: Vec<i64> = (0..k).map(|j| local.iter().map(|p| p[j]).min().unwrap_or(0)).collect();
        let hi: Vec<i64> = (0..k).map(|j| local.iter().map(|p| p[j]).max().unwrap_or(0)).collect();
        let mut count = 0;
        let mut y = lo.clone();
        loop {
            if let Some(x) = self.span.lift(&y) {
                if self.facets.iter().all(|f| dot(&f.normal, &x) <= f.offset as i128) {
                    count += 1;
                }
            }
            let mut j = 0;
            loop {
                if j == k {
                    return count;
                }
                if y[j] < hi[j] {
                    y[j] += 1;
                    break;
                }
                y[j] = lo[j];
                j += 1;
            }
        }
    }
}

/// Hyperplane through `k` affinely independent points of `ℤ^k`, oriented so
/// that `interior / scale` lies on the negative side.
fn hyperplane(points: &[&[i64]], interior: &[i64], scale: i128) -> (Vec<i64>, i128) {
    let base = points[0];
    let rows: Vec<Vec<i64>> = points[1..].iter().map(|p| p.iter().zip(base).map(|(a, b)| a - b).collect()).collect();
    let normal = null_space(&rows, base.len()).into_iter().next().expect("points are not independent");
    let offset = dot(&normal, base);
    if dot(&normal, interior) > scale * offset {
        (normal.iter().map(|v| -v).collect(), -offset)
    } else {
        (normal, offset)
    }
}

fn beneath_beyond(points: &[Vec<i64>], k: usize) -> (Vec<LocalFacet>, Vec<usize>) {
    // Greedy initial simplex.
    let mut simplex = vec![0usize];
    for i in 1..points.len() {
        if simplex.len() == k + 1 {
            break;
        }
        let mut trial: Vec<&[i64]> = simplex.iter().map(|&j| points[j].as_slice()).collect();
        trial.push(&points[i]);
        if affine_rank(&trial) as usize == simplex.len() {
            simplex.push(i);
        }
    }
    assert_eq!(simplex.len(), k + 1, "span dimension and simplex disagree");
    let mut interior = vec![0i64; k];
    for &i in &simplex {
        for (c, v) in interior.iter_mut().zip(&points[i]) {
            *c += v;
        }
    }
    let scale = (k + 1) as i128;
    let mut facets: Vec<LocalFacet> = (0..=k)
        .map(|omit| {
            let members: Vec<usize> = simplex.iter().enumerate().filter(|&(j, _)| j != omit).map(|(_, &i)| i).collect();
            let pts: Vec<&[i64]> = members.iter().map(|&i| points[i].as_slice()).collect();
            let (normal, offset) = hyperplane(&pts, &interior, scale);
            LocalFacet { normal, offset, members }
        })
        .collect();
    for (p, point) in points.iter().enumerate() {
        if simplex.contains(&p) {
            continue;
        }
        let side: Vec<i128> = facets.iter().map(|f| dot(&f.normal, point) - f.offset).collect();
        if side.iter().all(|&s| s <= 0) {
            for (f, &s) in facets.iter_mut().zip(&side) {
                if s == 0 {
                    f.members.push(p);
                }
            }
            continue;
        }
        let mut new: Vec<LocalFacet> = Vec::new();
        for (vi, vf) in facets.iter().enumerate() {
            if side[vi] <= 0 {
                continue;
            }
            for (gi, gf) in facets.iter().enumerate() {
                if side[gi] > 0 {
                    continue;
                }
                let ridge: Vec<usize> = vf.members.iter().copied().filter(|m| gf.members.contains(m)).collect();
                let pts: Vec<&[i64]> = ridge.iter().map(|&i| points[i].as_slice()).collect();
                if affine_rank(&pts) != k as isize - 2 {
                    continue;
                }
                if side[gi] == 0 {
                    continue;
                }
                let mut basis = independent_subset(points, &ridge, k - 1);
                basis.push(p);
                let bpts: Vec<&[i64]> = basis.iter().map(|&i| points[i].as_slice()).collect();
                let (normal, offset) = hyperplane(&bpts, &interior, scale);
                let mut members = ridge;
                members.push(p);
                match new.iter_mut().find(|f| f.normal == normal && f.offset == offset) {
                    Some(f) => {
                        for m in members {
                            if !f.members.contains(&m) {
                                f.members.push(m);
                            }
                        }
                    }
                    None => new.push(LocalFacet { normal, offset, members }),
                }
            }
        }
        let mut kept: Vec<LocalFacet> = Vec::new();
        for (f, &s) in facets.into_iter().zip(&side) {
            if s > 0 {
                continue;
            }
            let mut f = f;
            if s == 0 {
                f.members.push(p);
            }
            kept.push(f);
        }
        kept.extend(new);
        facets = kept;
    }
    for f in &mut facets {
        f.members.sort_unstable();
        f.members.dedup();
    }
    facets.sort_by(|a, b| (&a.normal, a.offset).cmp(&(&b.normal, b.offset)));
    let vertices = (0..points.len())
        .filter(|&i| {
            let normals: Vec<Vec<i64>> =
                facets.iter().filter(|f| f.members.contains(&i)).map(|f| f.normal.clone()).collect();
            null_space(&normals, k).is_empty()
        })
        .collect();
    (facets, vertices)
}

/// `count` affinely independent members of `set`.
fn independent_subset(points: &[Vec<i64>], set: &[usize], count: usize) -> Vec<usize> {
    let mut chosen: Vec<usize> = Vec::with_capacity(count);
    for &i in set {
        if chosen.len() == count {
            break;
        }
        let mut trial: Vec<&[i64]> = chosen.iter().map(|&j| points[j].as_slice()).collect();
        trial.push(&points[i]);
        if affine_rank(&trial) as usize == chosen.len() {
            chosen.push(i);
        }
    }
    chosen
}
