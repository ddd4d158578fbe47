//! Dynamic program over a ramp-limited chain of sorted consumption levels,
//! and the multiplier search that adds the long-term requirement on top.

use crate::error::{Error, Result};

/// Slack allowed when testing a level difference against a ramp limit.
pub(crate) const LEVEL_TOL: f64 = 1e-12;

/// Sorted levels together with, for each level, the contiguous range of
/// predecessor levels its ramp limits admit.
#[derive(Debug, Clone)]
pub(crate) struct Chain {
    pub levels: Vec<f64>,
    pub r_up: f64,
    pub r_dn: f64,
    pub x0: f64,
    /// Half-open index range of levels reachable at the first stage.
    first: (usize, usize),
    /// Half-open predecessor index range per level.
    windows: Vec<(usize, usize)>,
}

/// Reusable buffers for repeated solves on one chain.
#[derive(Debug, Default)]
pub(crate) struct Workspace {
    prev: Vec<f64>,
    cur: Vec<f64>,
    pred: Vec<u32>,
    queue: Vec<u32>,
}

impl Chain {
    pub fn new(levels: Vec<f64>, r_up: f64, r_dn: f64, x0: f64) -> Self {
        debug_assert!(levels.windows(2).all(|w| w[0] < w[1]));
        let span = |center: f64| {
            let lo = levels.partition_point(|&l| l < center - r_dn - LEVEL_TOL);
            let hi = levels.partition_point(|&l| l <= center + r_up + LEVEL_TOL);
            (lo, hi)
        };
        let first = span(x0);
        let windows = levels
            .iter()
            .map(|&l| {
                // predecessor p of l needs l - p <= r_up and p - l <= r_dn
                let lo = levels.partition_point(|&p| p < l - r_up - LEVEL_TOL);
                let hi = levels.partition_point(|&p| p <= l + r_dn + LEVEL_TOL);
                (lo, hi)
            })
            .collect();
        Self {
            levels,
            r_up,
            r_dn,
            x0,
            first,
            windows,
        }
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    /// Minimizes `sum_t cost(t, path[t])` over ramp-feasible level paths.
    /// Predecessor and final ties resolve to the lower level. Returns `None`
    /// when no path exists.
    pub fn solve(
        &self,
        horizon: usize,
        cost: impl Fn(usize, usize) -> f64,
        ws: &mut Workspace,
    ) -> Option<(f64, Vec<usize>)> {
        let n = self.len();
        if horizon == 0 || n == 0 {
            return None;
        }
        ws.prev.clear();
        ws.prev.resize(n, f64::INFINITY);
        ws.cur.clear();
        ws.cur.resize(n, f64::INFINITY);
        ws.pred.clear();
        ws.pred.resize(horizon * n, 0);

        for i in self.first.0..self.first.1 {
            ws.prev[i] = cost(0, i);
        }
        ws.queue.clear();
        ws.queue.resize(n, 0);
        for t in 1..horizon {
            let prev = &ws.prev[..];
            let cur = &mut ws.cur[..];
            let queue = &mut ws.queue[..];
            let row = &mut ws.pred[t * n..(t + 1) * n];
            // monotone queue of candidate predecessors in queue[head..tail]
            let (mut head, mut tail) = (0usize, 0usize);
            let mut pushed = 0;
            for i in 0..n {
                let (lo, hi) = self.windows[i];
                while pushed < hi {
                    let v = prev[pushed];
                    while tail > head && prev[queue[tail - 1] as usize] > v {
                        tail -= 1;
                    }
                    queue[tail] = pushed as u32;
                    tail += 1;
                    pushed += 1;
                }
                while tail > head && (queue[head] as usize) < lo {
                    head += 1;
                }
                cur[i] = f64::INFINITY;
                if tail > head {
                    let j = queue[head] as usize;
                    if prev[j].is_finite() {
                        row[i] = j as u32;
                        cur[i] = prev[j] + cost(t, i);
                    }
                }
            }
            std::mem::swap(&mut ws.prev, &mut ws.cur);
        }

        let mut best: Option<usize> = None;
        for i in 0..n {
            if ws.prev[i].is_finite() && best.is_none_or(|b| ws.prev[i] < ws.prev[b]) {
                best = Some(i);
            }
        }
        let end = best?;
        let mut path = vec![0; horizon];
        path[horizon - 1] = end;
        for t in (1..horizon).rev() {
            path[t - 1] = ws.pred[t * n + path[t]] as usize;
        }
        Some((ws.prev[end], path))
    }

    pub fn energy(&self, path: &[usize]) -> f64 {
        path.iter().map(|&i| self.levels[i]).sum()
    }

    /// Path climbing as fast as the ramps allow; every feasible path lies
    /// pointwise below it.
    pub fn highest_path(&self, horizon: usize) -> Option<Vec<usize>> {
        if self.first.0 >= self.first.1 {
            return None;
        }
        let mut path = Vec::with_capacity(horizon);
        let mut cur = self.first.1 - 1;
        for t in 0..horizon {
            if t > 0 {
                let top = self.levels[cur] + self.r_up + LEVEL_TOL;
                cur = self.levels.partition_point(|&l| l <= top) - 1;
            }
            path.push(cur);
        }
        Some(path)
    }

    fn step_allowed(&self, path: &[usize], t: usize, level: usize) -> bool {
        let x = self.levels[level];
        let prev = if t == 0 { self.x0 } else { self.levels[path[t - 1]] };
        if x - prev > self.r_up + LEVEL_TOL || prev - x > self.r_dn + LEVEL_TOL {
            return false;
        }
        match path.get(t + 1) {
            Some(&next) => {
                let nx = self.levels[next];
                nx - x <= self.r_up + LEVEL_TOL && x - nx <= self.r_dn + LEVEL_TOL
            }
            None => true,
        }
    }

    /// Raises single stages one level at a time, always taking the cheapest
    /// ramp-feasible raise, until the path holds `requirement` energy.
    pub fn repair(
        &self,
        mut path: Vec<usize>,
        base: &[f64],
        requirement: f64,
    ) -> Option<Vec<usize>> {
        let n = self.len();
        let mut energy = self.energy(&path);
        while energy < requirement - REQUIREMENT_TOL {
            let mut best: Option<(f64, usize)> = None;
            for t in 0..path.len() {
                let next = path[t] + 1;
                if next >= n || !self.step_allowed(&path, t, next) {
                    continue;
                }
                let inc = base[t * n + next] - base[t * n + path[t]];
                if best.is_none_or(|(b, _)| inc < b) {
                    best = Some((inc, t));
                }
            }
            let (_, t) = best?;
            energy += self.levels[path[t] + 1] - self.levels[path[t]];
            path[t] += 1;
        }
        Some(path)
    }

    /// Evenly spaced levels over `[lo, hi]` with exact endpoints.
    pub fn uniform_levels(lo: f64, hi: f64, n: usize) -> Vec<f64> {
        if n == 1 || hi == lo {
            return vec![lo];
        }
        let step = (hi - lo) / (n - 1) as f64;
        (0..n)
            .map(|k| if k + 1 == n { hi } else { lo + k as f64 * step })
            .collect()
    }

    /// Every value a vertex of the continuous polytope
    /// `{x in [lo, hi]^T : |x_t - x_{t-1}| <= r}` can take: offsets by whole
    /// ramps from `x0` or from either bound.
    pub fn lattice_levels(lo: f64, hi: f64, r: f64, x0: f64) -> Vec<f64> {
        let mut out = Vec::new();
        let mut push_family = |start: f64, dir: f64| {
            let mut k = 0.0;
            loop {
                let v = start + dir * k * r;
                if (dir > 0.0 && v > hi + LEVEL_TOL) || (dir < 0.0 && v < lo - LEVEL_TOL) {
                    break;
                }
                if v >= lo - LEVEL_TOL && v <= hi + LEVEL_TOL {
                    out.push(v.clamp(lo, hi));
                }
                k += 1.0;
            }
        };
        push_family(lo, 1.0);
        push_family(hi, -1.0);
        push_family(x0, 1.0);
        push_family(x0, -1.0);
        out.sort_by(f64::total_cmp);
        out.dedup_by(|a, b| (*a - *b).abs() <= LEVEL_TOL);
        out
    }
}

/// Slack on the long-term requirement when judging a path feasible.
pub(crate) const REQUIREMENT_TOL: f64 = 1e-9;

/// Outcome of the multiplier search on one chain.
#[derive(Debug, Clone)]
pub(crate) struct Lagrange {
    pub path: Vec<usize>,
    /// Base cost of `path`.
    pub cost: f64,
    pub delta: f64,
}

/// Minimizes `sum_t base[t][i_t]` subject to the ramp chain and
/// `sum_t level(i_t) >= requirement`. The requirement is dualized with a
/// multiplier found by bisection; the returned path is the cheaper of the
/// over-satisfying bisection end and the greedy repair of the
/// under-satisfying end. `base` is row-major `horizon x levels`; `hint`
/// is a guess of the multiplier used to seed the bracket.
pub(crate) fn lagrange_solve(
    chain: &Chain,
    base: &[f64],
    horizon: usize,
    requirement: f64,
    delta_tol: f64,
    hint: Option<f64>,
    ws: &mut Workspace,
) -> Result<Lagrange> {
    let n = chain.len();
    let path_cost = |path: &[usize]| -> f64 {
        path.iter().enumerate().map(|(t, &i)| base[t * n + i]).sum()
    };
    let run = |delta: f64, ws: &mut Workspace| -> Result<Vec<usize>> {
        chain
            .solve(horizon, |t, i| base[t * n + i] - delta * chain.levels[i], ws)
            .map(|(_, p)| p)
            .ok_or_else(|| Error::Infeasible("no ramp-feasible level path".into()))
    };
    let target = requirement - REQUIREMENT_TOL;
    let done = |path: Vec<usize>, delta: f64| Lagrange {
        cost: path_cost(&path),
        path,
        delta,
    };
    let reachable = chain
        .highest_path(horizon)
        .map(|p| chain.energy(&p))
        .unwrap_or(f64::NEG_INFINITY);
    if reachable < target {
        return Err(Error::Infeasible(format!(
            "requirement {requirement} exceeds the {reachable} reachable under the ramps"
        )));
    }

    // Above the steepest marginal cost every stage prefers more energy, so
    // the minimizer is the highest path.
    let mut steepest = 0.0f64;
    for t in 0..horizon {
        for i in 1..n {
            let slope = (base[t * n + i] - base[t * n + i - 1])
                / (chain.levels[i] - chain.levels[i - 1]);
            steepest = steepest.max(slope);
        }
    }
    let top = steepest + 1.0;
    let mut lo = 0.0;
    let mut lo_path = None;
    let mut hi = top;
    let mut hi_path = None;
    // Grow a bracket outwards from the hint before bisecting.
    if let Some(h) = hint.filter(|h| *h > 0.0 && *h < top) {
        let mut width = (0.05 * h).max(16.0 * delta_tol);
        let path = run(h, ws)?;
        if chain.energy(&path) >= target {
            hi = h;
            hi_path = Some(path);
            loop {
                let probe = hi - width;
                if probe <= 0.0 {
                    break;
                }
                let path = run(probe, ws)?;
                if chain.energy(&path) >= target {
                    hi = probe;
                    hi_path = Some(path);
                    width *= 2.0;
                } else {
                    lo = probe;
                    lo_path = Some(path);
                    break;
                }
            }
        } else {
            lo = h;
            lo_path = Some(path);
            loop {
                let probe = lo + width;
                if probe >= top {
                    break;
                }
                let path = run(probe, ws)?;
                if chain.energy(&path) >= target {
                    hi = probe;
                    hi_path = Some(path);
                    break;
                }
                lo = probe;
                lo_path = Some(path);
                width *= 2.0;
            }
        }
    }
    let mut lo_path = match lo_path {
        Some(p) => p,
        None => {
            let at_zero = run(0.0, ws)?;
            if chain.energy(&at_zero) >= target {
                return Ok(done(at_zero, 0.0));
            }
            at_zero
        }
    };
    let mut hi_path = match hi_path {
        Some(p) => p,
        None => run(hi, ws)?,
    };
    if chain.energy(&hi_path) < target {
        return Err(Error::Numeric(format!(
            "multiplier bracket [0, {hi}] does not reach the requirement"
        )));
    }
    let step = chain
        .levels
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(0.0, f64::max);
    for _ in 0..200 {
        if hi - lo <= delta_tol || chain.energy(&hi_path) - requirement <= step {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let path = run(mid, ws)?;
        if chain.energy(&path) >= target {
            hi = mid;
            hi_path = path;
        } else {
            lo = mid;
            lo_path = path;
        }
    }

    let mut best = done(hi_path, hi);
    if let Some(repaired) = chain.repair(lo_path, base, requirement) {
        let c = path_cost(&repaired);
        if c < best.cost {
            best = Lagrange {
                cost: c,
                path: repaired,
                delta: hi,
            };
        }
    }
    Ok(best)
}
