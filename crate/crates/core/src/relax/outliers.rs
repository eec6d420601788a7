use crate::convex::{Assignment, GramSdpModel, LpModel};
use crate::metric::{mask_of, MetricSpace};

use super::{pair_index, union_balls};

/// `min Σ (n-f) x_v + Σ y_uv` with `y_uv >= 1 - z_u - z_v - Σ_{w ∈ B_u(v)} x_w`
/// and `Σ z <= f`. Variables: `x` (n), `y` (n² ordered pairs), `z` (n).
pub fn build_lp_tz2o(ms: &MetricSpace, f: usize) -> LpModel {
    let n = ms.len();
    assert!(f <= n);
    let mut m = LpModel::new();
    for v in 0..n {
        m.add_var(format!("x_{}", v + 1), 1.0, (n - f) as f64);
    }
    for u in 0..n {
        for v in 0..n {
            m.add_var(format!("y_{}_{}", u + 1, v + 1), f64::INFINITY, 1.0);
        }
    }
    let z0 = n + n * n;
    for v in 0..n {
        m.add_var(format!("z_{}", v + 1), 1.0, 0.0);
    }
    for u in 0..n {
        for v in 0..n {
            let mut terms = vec![(n + u * n + v, 1.0), (z0 + u, 1.0), (z0 + v, 1.0)];
            terms.extend(ms.ball_through(u, v).into_iter().map(|w| (w, 1.0)));
            m.add_row(terms, 1.0);
        }
    }
    m.add_row((0..n).map(|v| (z0 + v, -1.0)).collect(), -(f as f64));
    m
}

/// Scalars `X_v = |x_v|²` then `Y_uv = |y_uv|²` over ordered pairs; Gram matrix
/// `Z_uv = z_u · z_v`. Rows `Y_uv + Z_uv + Σ_{w ∈ B_u(v)} X_w >= 1`.
#[derive(Debug, Clone)]
pub struct SdpTz2o {
    pub model: GramSdpModel,
    pub n: usize,
    pub f: usize,
}

impl SdpTz2o {
    pub fn x(&self, v: usize) -> usize {
        v
    }

    pub fn y(&self, u: usize, v: usize) -> usize {
        self.n + u * self.n + v
    }
}

pub fn build_sdp_tz2o(ms: &MetricSpace, f: usize) -> SdpTz2o {
    let n = ms.len();
    assert!(f <= n);
    let mut m = GramSdpModel::new(n, f as f64);
    for v in 0..n {
        m.add_scalar(format!("X_{}", v + 1), 1.0, (n - f) as f64);
    }
    for u in 0..n {
        for v in 0..n {
            m.add_scalar(format!("Y_{}_{}", u + 1, v + 1), 1.0, 1.0);
        }
    }
    for u in 0..n {
        for v in 0..n {
            let mut s = vec![(n + u * n + v, 1.0)];
            s.extend(ms.ball_through(u, v).into_iter().map(|w| (w, 1.0)));
            m.add_row(s, vec![(u, v, 1.0)], 1.0);
        }
    }
    SdpTz2o { model: m, n, f }
}

/// Scalars `X_v` then `Y_uv` over unordered pairs; one row per distinct union
/// of balls, as in the landmark LP, plus the Gram term `Z_uv`.
#[derive(Debug, Clone)]
pub struct SdpPro {
    pub model: GramSdpModel,
    pub n: usize,
    pub f: usize,
}

impl SdpPro {
    pub fn x(&self, v: usize) -> usize {
        v
    }

    pub fn y(&self, u: usize, v: usize) -> usize {
        self.n + pair_index(self.n, u, v)
    }
}

pub fn build_sdp_pro(ms: &MetricSpace, f: usize) -> SdpPro {
    let n = ms.len();
    assert!(f <= n);
    let mut m = GramSdpModel::new(n, f as f64);
    for v in 0..n {
        m.add_scalar(format!("X_{}", v + 1), 1.0, (n - f) as f64);
    }
    for u in 0..n {
        for v in u + 1..n {
            m.add_scalar(format!("Y_{}_{}", u + 1, v + 1), 1.0, 1.0);
        }
    }
    for u in 0..n {
        for v in u + 1..n {
            for set in union_balls(ms, u, v) {
                let mut s = vec![(n + pair_index(n, u, v), 1.0)];
                s.extend(set.into_iter().map(|w| (w, 1.0)));
                m.add_row(s, vec![(u, v, 1.0)], 1.0);
            }
        }
    }
    SdpPro { model: m, n, f }
}

/// `X = [v ∈ A \ F]`, all outliers share one unit vector (`Z_uv = 1` iff both
/// are in `F`), and each `Y` is the smallest value in `{0, 1}` meeting its rows.
fn embed_outliers(model: &GramSdpModel, n: usize, landmarks: &[usize], outliers: &[usize], num_x: usize) -> Assignment {
    let out = mask_of(n, outliers);
    let a = mask_of(n, landmarks);
    let mut s = vec![0.0; model.num_scalars()];
    for v in (0..n).filter(|&v| a[v] && !out[v]) {
        s[v] = 1.0;
    }
    let mut gram = vec![0.0; n * n];
    for u in 0..n {
        for v in 0..n {
            if out[u] && out[v] {
                gram[u * n + v] = 1.0;
            }
        }
    }
    for r in model.rows() {
        let lhs: f64 = r.scalars.iter().filter(|t| t.0 < num_x).map(|&(v, c)| c * s[v]).sum::<f64>()
            + r.gram.iter().map(|&(p, q, c)| c * gram[p * n + q]).sum::<f64>();
        if lhs < r.rhs {
            let (y, _) = *r.scalars.iter().find(|t| t.0 >= num_x).expect("every row has a pair scalar");
            s[y] = 1.0;
        }
    }
    model.assignment(s, gram)
}

pub fn embed_integral_tz2o(sdp: &SdpTz2o, landmarks: &[usize], outliers: &[usize]) -> Assignment {
    embed_outliers(&sdp.model, sdp.n, landmarks, outliers, sdp.n)
}

pub fn embed_integral_pro(sdp: &SdpPro, landmarks: &[usize], outliers: &[usize]) -> Assignment {
    embed_outliers(&sdp.model, sdp.n, landmarks, outliers, sdp.n)
}
