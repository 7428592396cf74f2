use super::simplify::simplify_indices;
use super::ExportError;
use crate::accessory::DecoratedTree;

/// First bytes of the 80-byte header; the rest is zero padding.
pub const STL_HEADER: &[u8] = b"dendrite binary STL";

#[derive(Debug, Clone, PartialEq)]
pub enum RadiusSource {
    /// Component 0 of a channel, sample by sample.
    Channel(String),
    Constant(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TubeParams {
    pub radial_segments: usize,
    pub radius: RadiusSource,
    pub cap_ends: bool,
    /// Polyline thinning tolerance; 0 keeps every sample.
    pub tolerance: f64,
}

impl Default for TubeParams {
    fn default() -> Self {
        Self {
            radial_segments: 8,
            radius: RadiusSource::Channel("width".into()),
            cap_ends: true,
            tolerance: 0.0,
        }
    }
}

type V3 = [f64; 3];

fn sub(a: V3, b: V3) -> V3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn dot(a: V3, b: V3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross(a: V3, b: V3) -> V3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn scale(a: V3, k: f64) -> V3 {
    [a[0] * k, a[1] * k, a[2] * k]
}

fn unit(a: V3) -> V3 {
    scale(a, 1.0 / dot(a, a).sqrt())
}

fn reflect(v: V3, axis: V3, c: f64) -> V3 {
    sub(v, scale(axis, 2.0 / c * dot(axis, v)))
}

/// Any unit vector perpendicular to `t`.
fn perpendicular(t: V3) -> V3 {
    let a = t.map(f64::abs);
    let helper = if a[0] <= a[1] && a[0] <= a[2] {
        [1.0, 0.0, 0.0]
    } else if a[1] <= a[2] {
        [0.0, 1.0, 0.0]
    } else {
        [0.0, 0.0, 1.0]
    };
    unit(cross(t, helper))
}

struct Mesh {
    bytes: Vec<u8>,
    count: u32,
}

impl Mesh {
    fn triangle(&mut self, a: V3, b: V3, c: V3) {
        let n = unit(cross(sub(b, a), sub(c, a)));
        for v in [n, a, b, c] {
            for x in v {
                self.bytes.extend_from_slice(&(x as f32).to_le_bytes());
            }
        }
        self.bytes.extend_from_slice(&0u16.to_le_bytes());
        self.count += 1;
    }
}

/// Sweeps a circle along every edge and writes the tubes as binary STL.
///
/// Cross-section frames are carried along each polyline by parallel
/// transport (double reflection), so tubes do not twist. Each edge with `n`
/// kept samples yields `2 m (n - 1)` side triangles and, with caps,
/// `2 (m - 2)` more, for `m` radial segments. Facet normals point out of
/// the tube.
pub fn to_stl(decorated: &DecoratedTree, params: &TubeParams) -> Result<Vec<u8>, ExportError> {
    let tree = &decorated.tree;
    if tree.dim != 3 {
        return Err(ExportError::Dimension {
            format: "STL",
            want: 3,
            got: tree.dim,
        });
    }
    let m = params.radial_segments;
    if m < 3 {
        return Err(ExportError::TooFewSegments(m));
    }
    let channel = match &params.radius {
        RadiusSource::Channel(name) => Some(
            decorated
                .channels
                .get(name)
                .ok_or_else(|| ExportError::UnknownChannel(name.clone()))?,
        ),
        RadiusSource::Constant(_) => None,
    };
    let ring_dirs: Vec<(f64, f64)> = (0..m)
        .map(|j| (2.0 * std::f64::consts::PI * j as f64 / m as f64).sin_cos())
        .collect();

    let mut mesh = Mesh {
        bytes: vec![0u8; 84],
        count: 0,
    };
    mesh.bytes[..STL_HEADER.len()].copy_from_slice(STL_HEADER);

    for (e, edge) in tree.edges.iter().enumerate() {
        let all = &edge.polyline.points;
        if all.len() < 2 {
            continue;
        }
        let keep = simplify_indices(all, params.tolerance);
        let pts: Vec<V3> = keep.iter().map(|&i| [all[i][0], all[i][1], all[i][2]]).collect();
        let mut radii = Vec::with_capacity(keep.len());
        for &i in &keep {
            let r = match (&params.radius, channel) {
                (RadiusSource::Constant(r), _) => *r,
                (_, Some(ch)) => ch.value(e, i, 0),
                _ => unreachable!(),
            };
            if !(r > 0.0) || !r.is_finite() {
                return Err(ExportError::NonPositiveRadius { edge: e, value: r });
            }
            radii.push(r);
        }
        for (w, pair) in pts.windows(2).enumerate() {
            let d = sub(pair[1], pair[0]);
            if dot(d, d) == 0.0 {
                return Err(ExportError::DegenerateStep {
                    edge: e,
                    index: keep[w],
                });
            }
        }

        let n = pts.len();
        let tangent = |i: usize| -> V3 {
            if i == 0 {
                unit(sub(pts[1], pts[0]))
            } else if i == n - 1 {
                unit(sub(pts[n - 1], pts[n - 2]))
            } else {
                let a = unit(sub(pts[i], pts[i - 1]));
                let b = unit(sub(pts[i + 1], pts[i]));
                let s = [a[0] + b[0], a[1] + b[1], a[2] + b[2]];
                if dot(s, s) < 1e-24 {
                    b
                } else {
                    unit(s)
                }
            }
        };
        let mut rings: Vec<Vec<V3>> = Vec::with_capacity(n);
        let mut t = tangent(0);
        let mut normal = perpendicular(t);
        for i in 0..n {
            if i > 0 {
                // double reflection: rotation-minimizing frame transport
                let v1 = sub(pts[i], pts[i - 1]);
                let c1 = dot(v1, v1);
                let r_l = reflect(normal, v1, c1);
                let t_l = reflect(t, v1, c1);
                let t_next = tangent(i);
                let v2 = sub(t_next, t_l);
                let c2 = dot(v2, v2);
                normal = if c2 > 1e-24 { reflect(r_l, v2, c2) } else { r_l };
                // keep the frame exactly orthonormal
                normal = unit(sub(normal, scale(t_next, dot(normal, t_next))));
                t = t_next;
            }
            let binormal = cross(t, normal);
            rings.push(
                ring_dirs
                    .iter()
                    .map(|&(sin, cos)| {
                        let off = [
                            cos * normal[0] + sin * binormal[0],
                            cos * normal[1] + sin * binormal[1],
                            cos * normal[2] + sin * binormal[2],
                        ];
                        let p = pts[i];
                        [
                            p[0] + radii[i] * off[0],
                            p[1] + radii[i] * off[1],
                            p[2] + radii[i] * off[2],
                        ]
                    })
                    .collect(),
            );
        }
        for i in 0..n - 1 {
            for j in 0..m {
                let k = (j + 1) % m;
                let (a, b) = (rings[i][j], rings[i][k]);
                let (c, d) = (rings[i + 1][k], rings[i + 1][j]);
                mesh.triangle(a, b, c);
                mesh.triangle(a, c, d);
            }
        }
        if params.cap_ends {
            let first = &rings[0];
            let last = &rings[n - 1];
            for j in 1..m - 1 {
                mesh.triangle(first[0], first[j + 1], first[j]);
            }
            for j in 1..m - 1 {
                mesh.triangle(last[0], last[j], last[j + 1]);
            }
        }
    }
    let count = mesh.count.to_le_bytes();
    mesh.bytes[80..84].copy_from_slice(&count);
    Ok(mesh.bytes)
}
