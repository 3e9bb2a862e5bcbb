//! Numerical integration: adaptive Simpson (scalar and vector-valued) with
//! error reporting, and fixed Gauss–Legendre rules.

use std::sync::OnceLock;

#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    /// Absolute tolerance on the integral.
    pub abs_tol: f64,
    /// Relative tolerance, measured against a coarse first estimate.
    pub rel_tol: f64,
    /// Number of equal panels the interval is split into before refining.
    pub initial_panels: usize,
    /// Maximum bisection depth of any panel.
    pub max_depth: u32,
    /// Hard cap on the number of accepted panels.
    pub max_panels: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            rel_tol: 0.0,
            initial_panels: 8,
            max_depth: 48,
            max_panels: 1 << 20,
        }
    }
}

impl QuadOptions {
    pub fn with_abs_tol(mut self, tol: f64) -> Self {
        self.abs_tol = tol;
        self
    }

    pub fn with_rel_tol(mut self, tol: f64) -> Self {
        self.rel_tol = tol;
        self
    }

    pub fn with_panels(mut self, panels: usize) -> Self {
        self.initial_panels = panels.max(1);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    /// Richardson error estimate summed over accepted panels.
    pub err: f64,
    pub evals: usize,
    /// False if the panel cap or depth limit was hit somewhere.
    pub converged: bool,
}

struct Panel {
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
}

/// Relative size of a Simpson difference treated as pure round-off.
const ROUNDOFF: f64 = 64.0 * f64::EPSILON;

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

/// Adaptive Simpson quadrature of `f` over `[a, b]`.
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, opts: &QuadOptions) -> Integral {
    if a == b {
        return Integral { value: 0.0, err: 0.0, evals: 0, converged: true };
    }
    let panels = opts.initial_panels.max(1);
    let h = (b - a) / panels as f64;
    let mut evals = 0usize;
    let mut eval = |x: f64, evals: &mut usize| {
        *evals += 1;
        f(x)
    };
    let mut nodes = Vec::with_capacity(2 * panels + 1);
    for i in 0..=2 * panels {
        let x = if i == 2 * panels { b } else { a + h * i as f64 / 2.0 };
        nodes.push((x, eval(x, &mut evals)));
    }
    let mut coarse = 0.0;
    let mut stack = Vec::new();
    for p in 0..panels {
        let (xa, fa) = nodes[2 * p];
        let (_, fm) = nodes[2 * p + 1];
        let (xb, fb) = nodes[2 * p + 2];
        let whole = simpson(xa, xb, fa, fm, fb);
        coarse += whole;
        stack.push(Panel { a: xa, b: xb, fa, fm, fb, whole, tol: 0.0, depth: 0 });
    }
    let tol = opts.abs_tol.max(opts.rel_tol * coarse.abs());
    for p in &mut stack {
        p.tol = tol / panels as f64;
    }
    stack.reverse();

    let mut value = 0.0;
    let mut err = 0.0;
    let mut accepted = 0usize;
    let mut converged = true;
    while let Some(p) = stack.pop() {
        let m = 0.5 * (p.a + p.b);
        let lm = 0.5 * (p.a + m);
        let rm = 0.5 * (m + p.b);
        let flm = eval(lm, &mut evals);
        let frm = eval(rm, &mut evals);
        let left = simpson(p.a, m, p.fa, flm, p.fm);
        let right = simpson(m, p.b, p.fm, frm, p.fb);
        let delta = left + right - p.whole;
        let capped = p.depth >= opts.max_depth || accepted + stack.len() >= opts.max_panels;
        // Differences at the level of round-off cannot be refined away.
        let noise = ROUNDOFF * (left.abs() + right.abs());
        if delta.abs() <= (15.0 * p.tol).max(noise) || capped || !delta.is_finite() {
            if capped && delta.abs() > 15.0 * p.tol {
                converged = false;
            }
            value += left + right + delta / 15.0;
            err += delta.abs() / 15.0;
            accepted += 1;
        } else {
            let tol = p.tol / 2.0;
            stack.push(Panel { a: m, b: p.b, fa: p.fm, fm: frm, fb: p.fb, whole: right, tol, depth: p.depth + 1 });
            stack.push(Panel { a: p.a, b: m, fa: p.fa, fm: flm, fb: p.fm, whole: left, tol, depth: p.depth + 1 });
        }
    }
    Integral { value, err, evals, converged }
}

/// Vector-valued result of [`integrate_vec`].
#[derive(Debug, Clone, PartialEq)]
pub struct VecIntegral {
    pub value: Vec<f64>,
    /// Componentwise error estimates.
    pub err: Vec<f64>,
    pub evals: usize,
    pub converged: bool,
}

struct VecPanel {
    a: f64,
    b: f64,
    fa: Vec<f64>,
    fm: Vec<f64>,
    fb: Vec<f64>,
    whole: Vec<f64>,
    tol: f64,
    depth: u32,
}

fn simpson_vec(a: f64, b: f64, fa: &[f64], fm: &[f64], fb: &[f64]) -> Vec<f64> {
    let w = (b - a) / 6.0;
    fa.iter().zip(fm).zip(fb).map(|((x, y), z)| w * (x + 4.0 * y + z)).collect()
}

/// Adaptive Simpson for an integrand with `dim` components sharing the same
/// abscissae. A panel is accepted when every component meets the tolerance.
pub fn integrate_vec<F: FnMut(f64, &mut [f64])>(
    mut f: F,
    dim: usize,
    a: f64,
    b: f64,
    opts: &QuadOptions,
) -> VecIntegral {
    let mut evals = 0usize;
    let mut eval = |x: f64, evals: &mut usize| {
        *evals += 1;
        let mut v = vec![0.0; dim];
        f(x, &mut v);
        v
    };
    if a == b {
        return VecIntegral { value: vec![0.0; dim], err: vec![0.0; dim], evals: 0, converged: true };
    }
    let panels = opts.initial_panels.max(1);
    let h = (b - a) / panels as f64;
    let mut nodes: Vec<(f64, Vec<f64>)> = Vec::with_capacity(2 * panels + 1);
    for i in 0..=2 * panels {
        let x = if i == 2 * panels { b } else { a + h * i as f64 / 2.0 };
        let v = eval(x, &mut evals);
        nodes.push((x, v));
    }
    let mut stack = Vec::new();
    let mut coarse_max = 0.0f64;
    for p in 0..panels {
        let whole = simpson_vec(nodes[2 * p].0, nodes[2 * p + 2].0, &nodes[2 * p].1, &nodes[2 * p + 1].1, &nodes[2 * p + 2].1);
        coarse_max = coarse_max.max(whole.iter().fold(0.0f64, |m, v| m.max(v.abs())));
        stack.push(VecPanel {
            a: nodes[2 * p].0,
            b: nodes[2 * p + 2].0,
            fa: nodes[2 * p].1.clone(),
            fm: nodes[2 * p + 1].1.clone(),
            fb: nodes[2 * p + 2].1.clone(),
            whole,
            tol: 0.0,
            depth: 0,
        });
    }
    let tol = opts.abs_tol.max(opts.rel_tol * coarse_max);
    for p in &mut stack {
        p.tol = tol / panels as f64;
    }
    stack.reverse();

    let mut value = vec![0.0; dim];
    let mut err = vec![0.0; dim];
    let mut accepted = 0usize;
    let mut converged = true;
    while let Some(p) = stack.pop() {
        let m = 0.5 * (p.a + p.b);
        let flm = eval(0.5 * (p.a + m), &mut evals);
        let frm = eval(0.5 * (m + p.b), &mut evals);
        let left = simpson_vec(p.a, m, &p.fa, &flm, &p.fm);
        let right = simpson_vec(m, p.b, &p.fm, &frm, &p.fb);
        let worst = left
            .iter()
            .zip(&right)
            .zip(&p.whole)
            .fold(0.0f64, |w, ((l, r), s)| w.max((l + r - s).abs()));
        let capped = p.depth >= opts.max_depth || accepted + stack.len() >= opts.max_panels;
        let noise = ROUNDOFF
            * left.iter().zip(&right).fold(0.0f64, |m, (l, r)| m.max(l.abs() + r.abs()));
        if worst <= (15.0 * p.tol).max(noise) || capped || !worst.is_finite() {
            if capped && worst > 15.0 * p.tol {
                converged = false;
            }
            for i in 0..dim {
                let delta = left[i] + right[i] - p.whole[i];
                value[i] += left[i] + right[i] + delta / 15.0;
                err[i] += delta.abs() / 15.0;
            }
            accepted += 1;
        } else {
            let tol = p.tol / 2.0;
            stack.push(VecPanel { a: m, b: p.b, fa: p.fm.clone(), fm: frm, fb: p.fb, whole: right, tol, depth: p.depth + 1 });
            stack.push(VecPanel { a: p.a, b: m, fa: p.fa, fm: flm, fb: p.fm, whole: left, tol, depth: p.depth + 1 });
        }
    }
    VecIntegral { value, err, evals, converged }
}

/// Abscissae of the 15-point Kronrod rule on `[-1, 1]` (non-negative half,
/// descending); odd indices are the 7-point Gauss nodes.
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
/// Gauss weights for `XGK[1], XGK[3], XGK[5], XGK[7]`.
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

struct GkPanel {
    a: f64,
    b: f64,
    kronrod: Vec<f64>,
    err: Vec<f64>,
    worst: f64,
}

impl PartialEq for GkPanel {
    fn eq(&self, other: &Self) -> bool {
        self.worst == other.worst
    }
}
impl Eq for GkPanel {}
impl PartialOrd for GkPanel {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for GkPanel {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.worst.total_cmp(&other.worst)
    }
}

fn gk_panel<F: FnMut(f64, &mut [f64])>(f: &mut F, dim: usize, a: f64, b: f64, buf: &mut [f64], evals: &mut usize) -> GkPanel {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut kronrod = vec![0.0; dim];
    let mut gauss = vec![0.0; dim];
    let mut scale = 0.0f64;
    for i in 0..8 {
        let xs: &[f64] = if i == 7 { &[0.0] } else { &[-XGK[i], XGK[i]] };
        for &x in xs {
            buf.iter_mut().for_each(|v| *v = 0.0);
            f(mid + half * x, buf);
            *evals += 1;
            for j in 0..dim {
                kronrod[j] += WGK[i] * buf[j];
                if i % 2 == 1 {
                    gauss[j] += WG[i / 2] * buf[j];
                }
                scale = scale.max(buf[j].abs());
            }
        }
    }
    let mut err = vec![0.0; dim];
    let mut worst = 0.0f64;
    let noise = ROUNDOFF * scale * half.abs() * 2.0;
    for j in 0..dim {
        kronrod[j] *= half;
        let e = (kronrod[j] - gauss[j] * half).abs();
        err[j] = if e <= noise { 0.0 } else { e };
        worst = worst.max(err[j]);
    }
    GkPanel { a, b, kronrod, err, worst }
}

/// Globally adaptive Gauss–Kronrod (7–15) quadrature of a vector-valued
/// integrand. The panel with the largest component error is bisected until
/// the summed error of every component is within tolerance. `|K15 − G7|` is
/// used as a (conservative) panel error.
pub fn integrate_vec_gk<F: FnMut(f64, &mut [f64])>(
    mut f: F,
    dim: usize,
    a: f64,
    b: f64,
    opts: &QuadOptions,
) -> VecIntegral {
    if a == b {
        return VecIntegral { value: vec![0.0; dim], err: vec![0.0; dim], evals: 0, converged: true };
    }
    let mut evals = 0usize;
    let mut buf = vec![0.0; dim];
    let panels = opts.initial_panels.max(1);
    // Each live panel holds two vectors of length `dim`; keep them to a
    // bounded footprint.
    let max_panels = opts.max_panels.min((1usize << 26) / dim.max(1)).max(panels + 2);
    let h = (b - a) / panels as f64;
    let mut heap = std::collections::BinaryHeap::new();
    for p in 0..panels {
        let lo = a + h * p as f64;
        let hi = if p + 1 == panels { b } else { a + h * (p + 1) as f64 };
        heap.push(gk_panel(&mut f, dim, lo, hi, &mut buf, &mut evals));
    }
    // Running sums, updated as panels are replaced.
    let mut running = vec![0.0; dim];
    let mut total_worst = 0.0;
    for p in heap.iter() {
        running.iter_mut().zip(&p.kronrod).for_each(|(r, v)| *r += v);
        total_worst += p.worst;
    }
    let mut converged = true;
    loop {
        // The summed worst-component error bounds every component's error.
        let magnitude = running.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let tol = opts.abs_tol.max(opts.rel_tol * magnitude);
        if total_worst <= tol {
            break;
        }
        if heap.len() >= max_panels {
            converged = false;
            break;
        }
        let p = heap.pop().expect("at least one panel");
        let m = 0.5 * (p.a + p.b);
        if !(m > p.a && m < p.b) {
            heap.push(p);
            converged = false;
            break;
        }
        let left = gk_panel(&mut f, dim, p.a, m, &mut buf, &mut evals);
        let right = gk_panel(&mut f, dim, m, p.b, &mut buf, &mut evals);
        for j in 0..dim {
            running[j] += left.kronrod[j] + right.kronrod[j] - p.kronrod[j];
        }
        total_worst += left.worst + right.worst - p.worst;
        heap.push(left);
        heap.push(right);
    }
    let mut value = vec![0.0; dim];
    let mut err = vec![0.0; dim];
    // Sum in interval order so the result does not depend on heap layout.
    let mut panels: Vec<GkPanel> = heap.into_vec();
    panels.sort_by(|x, y| x.a.total_cmp(&y.a));
    for p in &panels {
        for j in 0..dim {
            value[j] += p.kronrod[j];
            err[j] += p.err[j];
        }
    }
    VecIntegral { value, err, evals, converged }
}

/// Gauss–Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for j in 2..=n {
                    let jf = j as f64;
                    let p2 = ((2.0 * jf - 1.0) * x * p1 - (jf - 1.0) * p0) / jf;
                    p0 = p1;
                    p1 = p2;
                }
                let pn = if n == 1 { x } else { p1 };
                let pn1 = if n == 1 { 1.0 } else { p0 };
                dp = nf * (x * pn - pn1) / (x * x - 1.0);
                let dx = pn / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            nodes[i] = x;
            nodes[n - 1 - i] = -x;
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    /// Shared 32-point rule.
    pub fn n32() -> &'static GaussLegendre {
        static RULE: OnceLock<GaussLegendre> = OnceLock::new();
        RULE.get_or_init(|| GaussLegendre::new(32))
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F, a: f64, b: f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes.iter().zip(&self.weights).map(|(x, w)| w * f(mid + half * x)).sum::<f64>() * half
    }
}
