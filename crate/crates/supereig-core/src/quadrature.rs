//! Symmetric quadrature on triangles (degree 5) and edges (degree 5).

/// One triangle node: barycentric coordinates and weight (weights sum to 1).
#[derive(Debug, Clone, Copy)]
pub struct TriNode {
    pub bary: [f64; 3],
    pub weight: f64,
}

const A1: f64 = 0.059_715_871_789_769_82;
const B1: f64 = 0.470_142_064_105_115_1;
const A2: f64 = 0.797_426_985_353_087_3;
const B2: f64 = 0.101_286_507_323_456_34;
const W0: f64 = 0.225;
const W1: f64 = 0.132_394_152_788_506_18;
const W2: f64 = 0.125_939_180_544_827_15;

/// 7-point rule, exact for polynomials of degree 5.
pub const TRI7: [TriNode; 7] = [
    TriNode { bary: [1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0], weight: W0 },
    TriNode { bary: [A1, B1, B1], weight: W1 },
    TriNode { bary: [B1, A1, B1], weight: W1 },
    TriNode { bary: [B1, B1, A1], weight: W1 },
    TriNode { bary: [A2, B2, B2], weight: W2 },
    TriNode { bary: [B2, A2, B2], weight: W2 },
    TriNode { bary: [B2, B2, A2], weight: W2 },
];

const G: f64 = 0.387_298_334_620_741_7; // sqrt(15)/10

/// 3-point Gauss rule on [0, 1]: (parameter, weight), exact to degree 5.
pub const EDGE3: [(f64, f64); 3] = [
    (0.5 - G, 5.0 / 18.0),
    (0.5, 8.0 / 18.0),
    (0.5 + G, 5.0 / 18.0),
];

#[inline]
pub fn bary_point(p: &[[f64; 2]; 3], b: &[f64; 3]) -> [f64; 2] {
    [
        b[0] * p[0][0] + b[1] * p[1][0] + b[2] * p[2][0],
        b[0] * p[0][1] + b[1] * p[1][1] + b[2] * p[2][1],
    ]
}

/// Integral of `f` over the triangle `p` with area `area`.
pub fn integrate_tri(p: &[[f64; 2]; 3], area: f64, mut f: impl FnMut([f64; 2], [f64; 3]) -> f64) -> f64 {
    let mut s = 0.0;
    for n in &TRI7 {
        s += n.weight * f(bary_point(p, &n.bary), n.bary);
    }
    s * area
}

/// Mean of `f` over the segment `a`-`b`.
pub fn edge_mean(a: [f64; 2], b: [f64; 2], mut f: impl FnMut([f64; 2]) -> f64) -> f64 {
    let mut s = 0.0;
    for &(t, w) in &EDGE3 {
        s += w * f([a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]);
    }
    s
}
