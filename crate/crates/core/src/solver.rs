//! The three-layer deception-rate optimizer and its reference oracles.
//!
//! The continuous relaxation is solved by an outer majorization loop that
//! re-anchors the surrogate objective at the incumbent, a middle block
//! coordinate loop alternating the key and ciphertext blocklengths, and an
//! inner fractional-programming loop that alternates a closed-form update of
//! the auxiliary variable with a golden-section maximization of the
//! transformed objective. The continuous optimum is then rounded by
//! comparing its integer neighbors.
//!
//! `grid_oracle` is the exhaustive integer-grid reference the solver is
//! validated against, and `baseline_pls` is the conventional single-variable
//! baseline without deceptive ciphering.

use crate::error::{Error, Result};
use crate::metrics::{
    check_feasible, evaluate, CodeAllocation, ErasureProfile, LinkConfig, Thresholds,
};
use crate::qbounds::{surrogate_factors, BoundAnchor, Q_FLOOR};

/// How the solver picks its feasible starting point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InitStrategy {
    /// Check only the midpoint of the search box.
    BoxMidpoint,
    /// Scan a coarse 8x8 lattice over the box and start from the feasible
    /// point with the highest true deception rate, falling back to the box
    /// midpoint.
    #[default]
    CoarseGrid,
}

/// Stopping thresholds, iteration caps and the search box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub tol_mm: f64,
    pub tol_bcd: f64,
    pub tol_fp: f64,
    pub max_mm: u32,
    pub max_bcd: u32,
    pub max_fp: u32,
    pub n_min: f64,
    pub n_max: f64,
    pub init_strategy: InitStrategy,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            tol_mm: 2e-16,
            tol_bcd: 2e-16,
            tol_fp: 2e-16,
            max_mm: 100,
            max_bcd: 100,
            max_fp: 100,
            n_min: 16.0,
            n_max: 128.0,
            init_strategy: InitStrategy::default(),
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        for (what, v) in [("tol_mm", self.tol_mm), ("tol_bcd", self.tol_bcd), ("tol_fp", self.tol_fp)]
        {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::domain(what, v));
            }
        }
        if self.max_mm < 1 || self.max_bcd < 1 || self.max_fp < 1 {
            return Err(Error::domain("iteration cap", 0.0));
        }
        if !self.n_min.is_finite() || self.n_min < 1.0 {
            return Err(Error::domain("n_min", self.n_min));
        }
        if !self.n_max.is_finite() || self.n_max < self.n_min {
            return Err(Error::domain("n_max", self.n_max));
        }
        Ok(())
    }

    fn int_box(&self) -> (u32, u32) {
        (self.n_min.ceil() as u32, self.n_max.floor() as u32)
    }
}

/// Which blocklength a per-variable operation works on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Component {
    Ciphertext,
    Key,
}

/// A closed interval of blocklengths.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn clamp(&self, x: f64) -> f64 {
        x.clamp(self.lo, self.hi)
    }
}

/// Which layer of the solver produced a trace record.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Layer {
    Mm,
    Bcd,
    Fp,
}

/// One solver iterate: the layer and index it came from, the blocklength
/// pair, the auxiliary variable when one exists, the surrogate objective and
/// the true deception rate at the iterate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRecord {
    pub layer: Layer,
    pub index: u32,
    pub n_m: f64,
    pub n_k: f64,
    pub y: Option<f64>,
    pub surrogate: f64,
    pub true_rd: f64,
}

/// The ordered iterate history of one solve call.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct IterationTrace {
    pub records: Vec<TraceRecord>,
}

impl IterationTrace {
    pub fn mm_records(&self) -> impl Iterator<Item = &TraceRecord> {
        self.records.iter().filter(|r| r.layer == Layer::Mm)
    }
}

/// Solver output: the integer allocation, the metric profile at it, whether
/// it satisfies the constraints, the full iterate trace, and an optional
/// relative gap against the grid oracle filled in by callers that run both.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub n_m_opt: u32,
    pub n_k_opt: u32,
    pub profile: ErasureProfile,
    pub feasible: bool,
    pub trace: IterationTrace,
    pub oracle_gap: Option<f64>,
}

fn relative_improvement(cur: f64, prev: f64) -> f64 {
    if !prev.is_finite() {
        return f64::INFINITY;
    }
    (cur - prev) / prev.abs().max(1e-300)
}

/// Golden-section tolerance as a fraction of the interval width.
const GSS_TOL: f64 = 1e-6;
/// Scan resolution used to locate the throughput-feasible stretch.
const THROUGHPUT_SCAN_POINTS: usize = 96;

/// Maximizes a concave function on `[lo, hi]` by golden-section search down
/// to a bracket of width `tol * (hi - lo)`, returning the bracket midpoint,
/// or the exact endpoint when the maximum sits on the boundary.
pub fn concave_max_1d(f: impl Fn(f64) -> f64, lo: f64, hi: f64, tol: f64) -> Result<(f64, f64)> {
    if !(lo.is_finite() && hi.is_finite()) || hi < lo {
        return Err(Error::domain("interval", hi - lo));
    }
    let eval = |x: f64| -> Result<f64> {
        let v = f(x);
        if v.is_nan() {
            return Err(Error::Numeric(format!("objective is NaN at {x}")));
        }
        Ok(v)
    };
    let width = hi - lo;
    if width == 0.0 {
        return Ok((lo, eval(lo)?));
    }
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut a = lo;
    let mut b = hi;
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = eval(x1)?;
    let mut f2 = eval(x2)?;
    while b - a > tol * width {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = eval(x2)?;
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = eval(x1)?;
        }
    }
    let mut best_x = 0.5 * (a + b);
    let mut best_f = eval(best_x)?;
    // boundary maxima are returned as exact endpoints
    for x in [lo, hi] {
        let v = eval(x)?;
        if v > best_f {
            best_x = x;
            best_f = v;
        }
    }
    Ok((best_x, best_f))
}

/// Exact maximizer of the quadratic transform `2y sqrt(A) - y^2 / B`:
/// `y* = sqrt(A) * B`, at which the transform value equals `A * B`.
pub fn fp_y_closed_form(a_term: f64, b_term: f64) -> Result<f64> {
    if !a_term.is_finite() || a_term < 0.0 {
        return Err(Error::domain("a_term", a_term));
    }
    if !b_term.is_finite() || b_term <= 0.0 {
        return Err(Error::domain("b_term", b_term));
    }
    Ok(a_term.sqrt() * b_term)
}

fn erasure(n: f64, d: f64, gamma: f64) -> f64 {
    crate::metrics::erasure_prob(n, d, gamma).expect("validated erasure inputs")
}

/// Finds the crossing of the (monotone decreasing in n) erasure probability
/// with `target` inside `[lo, hi]`; callers ensure the crossing is bracketed.
fn bisect_erasure(d: f64, gamma: f64, target: f64, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..200 {
        if hi - lo <= 1e-10 {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if erasure(mid, d, gamma) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// The interval of the chosen blocklength over which every erasure-threshold
/// constraint on that variable and the throughput floor hold, intersected
/// with the search box; the other blocklength is taken from `alloc`. Returns
/// `None` when the interval is empty (infeasible subproblem).
///
/// The erasure thresholds are monotone in the variable and become plain
/// bisection bounds. The throughput along one variable rises while
/// reliability improves and then decays with the growing blocklength, so its
/// feasible stretch is located by a scan and the edges are refined by
/// bisection; when the incumbent coordinate is itself feasible its own
/// stretch is kept.
pub fn feasible_interval(
    which: Component,
    link: &LinkConfig,
    alloc: &CodeAllocation,
    th: &Thresholds,
    cfg: &SolverConfig,
) -> Result<Option<Interval>> {
    cfg.validate()?;
    let mut lo = cfg.n_min;
    let mut hi = cfg.n_max;
    let gb = link.snr_bob();
    let ge = link.snr_eve();

    match which {
        Component::Key => {
            if alloc.d_k < 1 {
                return Err(Error::domain("d_k", alloc.d_k as f64));
            }
            let d = alloc.d_k as f64;
            // Bob must recover the key: eps_bob_k <= cap, a lower bound on n_k
            if erasure(lo, d, gb) > th.eps_bob_k_max {
                if erasure(hi, d, gb) > th.eps_bob_k_max {
                    return Ok(None);
                }
                lo = bisect_erasure(d, gb, th.eps_bob_k_max, lo, hi);
            }
            // Eve must lose the key: eps_eve_k >= floor, an upper bound on n_k
            if erasure(hi, d, ge) < th.eps_eve_k_min {
                if erasure(lo, d, ge) < th.eps_eve_k_min {
                    return Ok(None);
                }
                hi = bisect_erasure(d, ge, th.eps_eve_k_min, lo, hi);
            }
        }
        Component::Ciphertext => {
            let d = alloc.d_m as f64;
            // both receivers must recover the message: two lower bounds
            for (gamma, cap) in [(gb, th.eps_bob_m_max), (ge, th.eps_eve_m_max)] {
                if erasure(lo, d, gamma) > cap {
                    if erasure(hi, d, gamma) > cap {
                        return Ok(None);
                    }
                    lo = lo.max(bisect_erasure(d, gamma, cap, lo, hi));
                }
            }
        }
    }
    if lo > hi {
        return Ok(None);
    }

    let throughput_at = |x: f64| -> f64 {
        let a = match which {
            Component::Key => CodeAllocation { n_k: x, ..*alloc },
            Component::Ciphertext => CodeAllocation { n_m: x, ..*alloc },
        };
        evaluate(link, &a).expect("validated throughput inputs").throughput
    };

    let n = THROUGHPUT_SCAN_POINTS;
    let xs: Vec<f64> = (0..=n).map(|i| lo + (hi - lo) * i as f64 / n as f64).collect();
    let ts: Vec<f64> = xs.iter().map(|&x| throughput_at(x)).collect();
    let ok: Vec<bool> = ts.iter().map(|&t| t >= th.throughput_min).collect();

    // the feasible stretch can be narrower than the scan step, so a feasible
    // incumbent seeds the component directly; otherwise the best scan point
    let incumbent = match which {
        Component::Key => alloc.n_k,
        Component::Ciphertext => alloc.n_m,
    };
    let seed = if (lo..=hi).contains(&incumbent) && throughput_at(incumbent) >= th.throughput_min {
        incumbent
    } else {
        let best = (0..=n)
            .max_by(|&i, &j| ts[i].partial_cmp(&ts[j]).expect("finite throughput"))
            .expect("nonempty scan");
        if !ok[best] {
            return Ok(None);
        }
        xs[best]
    };

    let refine = |mut infeasible: f64, mut feasible: f64| -> f64 {
        for _ in 0..80 {
            if (infeasible - feasible).abs() <= 1e-10 {
                break;
            }
            let mid = 0.5 * (infeasible + feasible);
            if throughput_at(mid) >= th.throughput_min {
                feasible = mid;
            } else {
                infeasible = mid;
            }
        }
        feasible
    };
    // nearest infeasible scan points bracket the component edges
    let left_block = xs.iter().zip(&ok).filter(|&(&x, &o)| x < seed && !o).map(|(&x, _)| x);
    let t_lo = match left_block.fold(None::<f64>, |acc, x| Some(acc.map_or(x, |a| a.max(x)))) {
        Some(x) => refine(x, seed),
        None => lo,
    };
    let right_block = xs.iter().zip(&ok).filter(|&(&x, &o)| x > seed && !o).map(|(&x, _)| x);
    let t_hi = match right_block.fold(None::<f64>, |acc, x| Some(acc.map_or(x, |a| a.min(x)))) {
        Some(x) => refine(x, seed),
        None => hi,
    };

    let lo = lo.max(t_lo);
    let hi = hi.min(t_hi);
    if lo > hi {
        return Ok(None);
    }
    Ok(Some(Interval { lo, hi }))
}

struct FpProblem<'a> {
    link: &'a LinkConfig,
    anchor: &'a BoundAnchor,
    alloc: CodeAllocation,
    which: Component,
}

impl FpProblem<'_> {
    fn factors(&self, x: f64) -> (f64, f64) {
        let alloc = match self.which {
            Component::Key => CodeAllocation { n_k: x, ..self.alloc },
            Component::Ciphertext => CodeAllocation { n_m: x, ..self.alloc },
        };
        surrogate_factors(&alloc, self.link, self.anchor).expect("validated surrogate inputs")
    }

    /// The quadratic transform of the surrogate objective: the factor the
    /// free variable enters through a square root stays under the root and
    /// the other becomes the quadratic penalty weight.
    fn transform(&self, x: f64, y: f64) -> f64 {
        let (a, b) = self.factors(x);
        match self.which {
            Component::Key => 2.0 * y * a.sqrt() - y * y / b.max(Q_FLOOR),
            Component::Ciphertext => 2.0 * y * b.sqrt() - y * y / a.max(Q_FLOOR),
        }
    }

    fn y_update(&self, x: f64) -> Result<f64> {
        let (a, b) = self.factors(x);
        match self.which {
            Component::Key => fp_y_closed_form(a, b.max(Q_FLOOR)),
            Component::Ciphertext => fp_y_closed_form(b, a.max(Q_FLOOR)),
        }
    }
}

fn fp_solve(
    which: Component,
    anchor: &BoundAnchor,
    link: &LinkConfig,
    alloc: &CodeAllocation,
    th: &Thresholds,
    cfg: &SolverConfig,
    trace: &mut IterationTrace,
) -> Result<Option<f64>> {
    let Some(iv) = feasible_interval(which, link, alloc, th, cfg)? else {
        return Ok(None);
    };
    let problem = FpProblem { link, anchor, alloc: *alloc, which };
    let mut incumbent = iv.clamp(match which {
        Component::Key => alloc.n_k,
        Component::Ciphertext => alloc.n_m,
    });
    let mut prev = f64::NEG_INFINITY;
    for i in 1..=cfg.max_fp {
        let y = problem.y_update(incumbent)?;
        let (mut x, mut fx) = concave_max_1d(|v| problem.transform(v, y), iv.lo, iv.hi, GSS_TOL)?;
        // the alternating scheme never moves to a worse point than the incumbent
        let f_inc = problem.transform(incumbent, y);
        if f_inc > fx {
            x = incumbent;
            fx = f_inc;
        }
        incumbent = x;
        let (n_m, n_k) = match which {
            Component::Key => (alloc.n_m, incumbent),
            Component::Ciphertext => (incumbent, alloc.n_k),
        };
        let point = CodeAllocation { n_m, n_k, ..*alloc };
        trace.records.push(TraceRecord {
            layer: Layer::Fp,
            index: i,
            n_m,
            n_k,
            y: Some(y),
            surrogate: crate::qbounds::rd_surrogate(&point, link, anchor)?,
            true_rd: evaluate(link, &point)?.r_d,
        });
        if relative_improvement(fx, prev) <= cfg.tol_fp {
            break;
        }
        prev = fx;
    }
    Ok(Some(incumbent))
}

/// Inner fractional-programming solve of the key blocklength with the
/// ciphertext blocklength fixed at `alloc.n_m`; `alloc.n_k` seeds the
/// incumbent. Returns the continuous optimum, or `None` when the key
/// subproblem has no feasible point.
pub fn fp_solve_key(
    anchor: &BoundAnchor,
    link: &LinkConfig,
    alloc: &CodeAllocation,
    th: &Thresholds,
    cfg: &SolverConfig,
    trace: &mut IterationTrace,
) -> Result<Option<f64>> {
    fp_solve(Component::Key, anchor, link, alloc, th, cfg, trace)
}

/// Mirror of [`fp_solve_key`] for the ciphertext blocklength with the key
/// blocklength fixed; the transform roles of the two surrogate factors are
/// exchanged.
pub fn fp_solve_msg(
    anchor: &BoundAnchor,
    link: &LinkConfig,
    alloc: &CodeAllocation,
    th: &Thresholds,
    cfg: &SolverConfig,
    trace: &mut IterationTrace,
) -> Result<Option<f64>> {
    fp_solve(Component::Ciphertext, anchor, link, alloc, th, cfg, trace)
}

fn feasible_rd(link: &LinkConfig, alloc: &CodeAllocation, th: &Thresholds) -> Result<Option<f64>> {
    let profile = evaluate(link, alloc)?;
    if check_feasible(&profile, alloc, th).feasible {
        Ok(Some(profile.r_d))
    } else {
        Ok(None)
    }
}

fn initial_point(
    link: &LinkConfig,
    d_m: u32,
    d_k: u32,
    th: &Thresholds,
    cfg: &SolverConfig,
) -> Result<Option<(f64, f64)>> {
    let midpoint = 0.5 * (cfg.n_min + cfg.n_max);
    match cfg.init_strategy {
        InitStrategy::BoxMidpoint => {
            let alloc = CodeAllocation::new(d_m, d_k, midpoint, midpoint)?;
            Ok(feasible_rd(link, &alloc, th)?.map(|_| (midpoint, midpoint)))
        }
        InitStrategy::CoarseGrid => {
            // an 8x8 lattice covers the default box; wider boxes can slip
            // a narrow feasible region between lattice points, so escalate
            // the resolution before giving up
            for points in [8usize, 16, 32] {
                let mut best: Option<(f64, f64, f64)> = None;
                for i in 0..points {
                    for j in 0..points {
                        let n_m =
                            cfg.n_min + (cfg.n_max - cfg.n_min) * i as f64 / (points - 1) as f64;
                        let n_k =
                            cfg.n_min + (cfg.n_max - cfg.n_min) * j as f64 / (points - 1) as f64;
                        let alloc = CodeAllocation::new(d_m, d_k, n_m, n_k)?;
                        if let Some(rd) = feasible_rd(link, &alloc, th)? {
                            if best.is_none_or(|(r, _, _)| rd > r) {
                                best = Some((rd, n_m, n_k));
                            }
                        }
                    }
                }
                if let Some((_, n_m, n_k)) = best {
                    return Ok(Some((n_m, n_k)));
                }
            }
            let alloc = CodeAllocation::new(d_m, d_k, midpoint, midpoint)?;
            Ok(feasible_rd(link, &alloc, th)?.map(|_| (midpoint, midpoint)))
        }
    }
}

fn infeasible_result(
    link: &LinkConfig,
    d_m: u32,
    d_k: u32,
    n_m: f64,
    n_k: f64,
    cfg: &SolverConfig,
    trace: IterationTrace,
) -> Result<SolveResult> {
    let (lo, hi) = cfg.int_box();
    let n_m_i = (n_m.round() as u32).clamp(lo, hi);
    let n_k_i = if d_k == 0 { 0 } else { (n_k.round() as u32).clamp(lo, hi) };
    let alloc = CodeAllocation::new(d_m, d_k, n_m_i as f64, n_k_i as f64)?;
    Ok(SolveResult {
        n_m_opt: n_m_i,
        n_k_opt: n_k_i,
        profile: evaluate(link, &alloc)?,
        feasible: false,
        trace,
        oracle_gap: None,
    })
}

/// Integer-neighbor comparison around the continuous optimum. Ties on the
/// deception rate go to the smaller total blocklength, then the smaller
/// ciphertext blocklength.
fn round_to_integer(
    link: &LinkConfig,
    d_m: u32,
    d_k: u32,
    n_m: f64,
    n_k: f64,
    th: &Thresholds,
    cfg: &SolverConfig,
) -> Result<Option<(u32, u32, ErasureProfile)>> {
    let (lo, hi) = cfg.int_box();
    let mut candidates: Vec<(u32, u32)> = Vec::new();
    for a in [n_m.floor(), n_m.ceil()] {
        for b in [n_k.floor(), n_k.ceil()] {
            let c = ((a as u32).clamp(lo, hi), (b as u32).clamp(lo, hi));
            if !candidates.contains(&c) {
                candidates.push(c);
            }
        }
    }
    let pick = |cands: &[(u32, u32)]| -> Result<Option<(u32, u32, ErasureProfile)>> {
        let mut best: Option<(f64, u32, u32, ErasureProfile)> = None;
        for &(a, b) in cands {
            let alloc = CodeAllocation::new(d_m, d_k, a as f64, b as f64)?;
            let profile = evaluate(link, &alloc)?;
            if !check_feasible(&profile, &alloc, th).feasible {
                continue;
            }
            let better = match &best {
                None => true,
                Some((rd, bm, bk, _)) => {
                    profile.r_d > *rd
                        || (profile.r_d == *rd
                            && (a + b, a) < (*bm + *bk, *bm))
                }
            };
            if better {
                best = Some((profile.r_d, a, b, profile));
            }
        }
        Ok(best.map(|(_, a, b, p)| (a, b, p)))
    };
    if let Some(found) = pick(&candidates)? {
        return Ok(Some(found));
    }
    // every direct neighbor infeasible: widen to the +-2 neighborhood once
    let (rm, rk) = (n_m.round() as i64, n_k.round() as i64);
    let mut widened = Vec::new();
    for da in -2..=2i64 {
        for db in -2..=2i64 {
            let a = ((rm + da).max(lo as i64) as u32).min(hi);
            let b = ((rk + db).max(lo as i64) as u32).min(hi);
            if !widened.contains(&(a, b)) {
                widened.push((a, b));
            }
        }
    }
    pick(&widened)
}

/// Runs the full majorization / block-coordinate / fractional-programming
/// stack and returns the rounded integer allocation. An infeasible problem
/// (no feasible starting point, or no feasible integer neighbor) yields a
/// result with `feasible = false` holding the last probed point.
pub fn solve(
    link: &LinkConfig,
    d_m: u32,
    d_k: u32,
    th: &Thresholds,
    cfg: &SolverConfig,
) -> Result<SolveResult> {
    cfg.validate()?;
    if d_k < 1 {
        return Err(Error::domain("d_k", d_k as f64));
    }
    let mut trace = IterationTrace::default();
    let Some((mut n_m, mut n_k)) = initial_point(link, d_m, d_k, th, cfg)? else {
        let mid = 0.5 * (cfg.n_min + cfg.n_max);
        return infeasible_result(link, d_m, d_k, mid, mid, cfg, trace);
    };

    let mut prev_mm = f64::NEG_INFINITY;
    let mut q = 1;
    loop {
        let anchor = BoundAnchor::new(link, d_m, d_k, n_m, n_k)?;
        trace.records.push(TraceRecord {
            layer: Layer::Mm,
            index: q,
            n_m,
            n_k,
            y: None,
            surrogate: anchor.profile.r_d,
            true_rd: anchor.profile.r_d,
        });

        let mut prev_bcd = f64::NEG_INFINITY;
        for t in 1..=cfg.max_bcd {
            let alloc = CodeAllocation::new(d_m, d_k, n_m, n_k)?;
            let Some(nk_new) = fp_solve_key(&anchor, link, &alloc, th, cfg, &mut trace)? else {
                return infeasible_result(link, d_m, d_k, n_m, n_k, cfg, trace);
            };
            n_k = nk_new;
            let alloc = CodeAllocation::new(d_m, d_k, n_m, n_k)?;
            let Some(nm_new) = fp_solve_msg(&anchor, link, &alloc, th, cfg, &mut trace)? else {
                return infeasible_result(link, d_m, d_k, n_m, n_k, cfg, trace);
            };
            n_m = nm_new;

            let point = CodeAllocation::new(d_m, d_k, n_m, n_k)?;
            let cur = crate::qbounds::rd_surrogate(&point, link, &anchor)?;
            trace.records.push(TraceRecord {
                layer: Layer::Bcd,
                index: t,
                n_m,
                n_k,
                y: None,
                surrogate: cur,
                true_rd: evaluate(link, &point)?.r_d,
            });
            if relative_improvement(cur, prev_bcd) <= cfg.tol_bcd {
                break;
            }
            prev_bcd = cur;
        }

        let cur_mm = evaluate(link, &CodeAllocation::new(d_m, d_k, n_m, n_k)?)?.r_d;
        q += 1;
        if relative_improvement(cur_mm, prev_mm) <= cfg.tol_mm {
            // record the final anchor before leaving
            trace.records.push(TraceRecord {
                layer: Layer::Mm,
                index: q,
                n_m,
                n_k,
                y: None,
                surrogate: cur_mm,
                true_rd: cur_mm,
            });
            break;
        }
        prev_mm = cur_mm;
        if q > cfg.max_mm {
            trace.records.push(TraceRecord {
                layer: Layer::Mm,
                index: q,
                n_m,
                n_k,
                y: None,
                surrogate: cur_mm,
                true_rd: cur_mm,
            });
            break;
        }
    }

    match round_to_integer(link, d_m, d_k, n_m, n_k, th, cfg)? {
        Some((a, b, profile)) => Ok(SolveResult {
            n_m_opt: a,
            n_k_opt: b,
            profile,
            feasible: true,
            trace,
            oracle_gap: None,
        }),
        None => infeasible_result(link, d_m, d_k, n_m, n_k, cfg, trace),
    }
}

/// One point of the exhaustive integer surface.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfacePoint {
    pub n_m: u32,
    pub n_k: u32,
    pub profile: ErasureProfile,
    pub feasible: bool,
}

/// The exhaustive integer-grid reference: the feasible argmax (if any
/// feasible point exists) and the full surface for export.
#[derive(Debug, Clone, PartialEq)]
pub struct GridOracle {
    pub best: Option<(u32, u32, f64)>,
    pub surface: Vec<SurfacePoint>,
}

/// Evaluates every integer pair in `box_range` (inclusive, both axes) and
/// returns the feasible deception-rate argmax plus the full surface. Uses
/// the same tie-breaking as the solver.
pub fn grid_oracle(
    link: &LinkConfig,
    d_m: u32,
    d_k: u32,
    th: &Thresholds,
    box_range: (u32, u32),
) -> Result<GridOracle> {
    let (lo, hi) = box_range;
    if lo < 1 || hi < lo {
        return Err(Error::domain("box", hi as f64));
    }
    if d_k < 1 {
        return Err(Error::domain("d_k", d_k as f64));
    }
    let mut surface = Vec::with_capacity(((hi - lo + 1) * (hi - lo + 1)) as usize);
    let mut best: Option<(u32, u32, f64)> = None;
    for n_m in lo..=hi {
        for n_k in lo..=hi {
            let alloc = CodeAllocation::new(d_m, d_k, n_m as f64, n_k as f64)?;
            let profile = evaluate(link, &alloc)?;
            let feasible = check_feasible(&profile, &alloc, th).feasible;
            if feasible {
                let better = match best {
                    None => true,
                    Some((bm, bk, rd)) => {
                        profile.r_d > rd
                            || (profile.r_d == rd && (n_m + n_k, n_m) < (bm + bk, bm))
                    }
                };
                if better {
                    best = Some((n_m, n_k, profile.r_d));
                }
            }
            surface.push(SurfacePoint { n_m, n_k, profile, feasible });
        }
    }
    Ok(GridOracle { best, surface })
}

/// The conventional baseline without deceptive ciphering: an exhaustive
/// integer scan of the ciphertext blocklength minimizing the
/// leakage-failure probability subject to the message erasure thresholds
/// and the throughput floor.
pub fn baseline_pls(
    link: &LinkConfig,
    d_m: u32,
    th: &Thresholds,
    cfg: &SolverConfig,
) -> Result<SolveResult> {
    cfg.validate()?;
    let (lo, hi) = cfg.int_box();
    let mut best: Option<(f64, u32, ErasureProfile)> = None;
    for n_m in lo..=hi {
        let alloc = CodeAllocation::new(d_m, 0, n_m as f64, 0.0)?;
        let profile = evaluate(link, &alloc)?;
        if !check_feasible(&profile, &alloc, th).feasible {
            continue;
        }
        if best.as_ref().is_none_or(|(lf, _, _)| profile.eps_lf < *lf) {
            best = Some((profile.eps_lf, n_m, profile));
        }
    }
    match best {
        Some((_, n_m, profile)) => Ok(SolveResult {
            n_m_opt: n_m,
            n_k_opt: 0,
            profile,
            feasible: true,
            trace: IterationTrace::default(),
            oracle_gap: None,
        }),
        None => {
            let mid = 0.5 * (cfg.n_min + cfg.n_max);
            infeasible_result(link, d_m, 0, mid, 0.0, cfg, IterationTrace::default())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::shannon_capacity;

    fn surface_link() -> LinkConfig {
        LinkConfig::from_db(0.0, -10.0, 5.0, 1.0).unwrap()
    }

    fn search_path_link() -> LinkConfig {
        LinkConfig::from_db(-5.0, -15.0, 5.0, 1.0).unwrap()
    }

    #[test]
    fn concave_max_quadratic() {
        let (x, _) = concave_max_1d(|v| -(v - 3.0) * (v - 3.0), 0.0, 10.0, 1e-6).unwrap();
        assert!((x - 3.0).abs() < 1e-4, "{x}");
    }

    #[test]
    fn concave_max_boundary_is_exact() {
        let (x, f) = concave_max_1d(|v| -(v - 2.0).abs(), 0.0, 1.0, 1e-6).unwrap();
        assert_eq!(x, 1.0);
        assert_eq!(f, -1.0);
    }

    #[test]
    fn concave_max_rejects_nan() {
        let err = concave_max_1d(|_| f64::NAN, 0.0, 1.0, 1e-6);
        assert!(err.is_err());
    }

    #[test]
    fn y_closed_form() {
        assert_eq!(fp_y_closed_form(1.0, 1.0).unwrap(), 1.0);
        assert_eq!(fp_y_closed_form(0.0, 5.0).unwrap(), 0.0);
        let y = fp_y_closed_form(0.75, 0.25).unwrap();
        assert!((y - 0.25 * 0.75f64.sqrt()).abs() < 1e-15);
        // transform value at y* equals the product
        let val = 2.0 * y * 0.75f64.sqrt() - y * y / 0.25;
        assert!((val - 0.1875).abs() < 1e-15);
        assert!(fp_y_closed_form(1.0, 0.0).is_err());
    }

    #[test]
    fn message_interval_bounds() {
        // symmetric links at the 0.5 threshold: lo is exactly d/C
        let link = LinkConfig::from_db(0.0, 0.0, 5.0, 1.0).unwrap();
        let th = Thresholds { throughput_min: 0.0, ..Thresholds::default() };
        let cfg = SolverConfig { n_min: 1.0, ..SolverConfig::default() };
        let alloc = CodeAllocation::new(16, 16, 64.0, 20.0).unwrap();
        let iv = feasible_interval(Component::Ciphertext, &link, &alloc, &th, &cfg)
            .unwrap()
            .unwrap();
        let expected = 16.0 / shannon_capacity(link.snr_bob()).unwrap();
        assert!((iv.lo - expected).abs() < 1e-6, "{} vs {expected}", iv.lo);

        // asymmetric links: the weaker (Eve) message constraint binds
        let link = surface_link();
        let alloc = CodeAllocation::new(16, 16, 64.0, 20.0).unwrap();
        let iv = feasible_interval(Component::Ciphertext, &link, &alloc, &th, &cfg)
            .unwrap()
            .unwrap();
        let bob_only = 16.0 / shannon_capacity(link.snr_bob()).unwrap();
        let eve_bound = 16.0 / shannon_capacity(link.snr_eve()).unwrap();
        assert!((bob_only - 6.189_644_915_752_665).abs() < 1e-9);
        assert!((iv.lo - eve_bound).abs() < 1e-6, "{} vs {eve_bound}", iv.lo);
    }

    #[test]
    fn key_interval_upper_bound_is_eve_capacity_ratio() {
        let link = surface_link();
        let th = Thresholds { throughput_min: 0.0, ..Thresholds::default() };
        let cfg = SolverConfig::default();
        let alloc = CodeAllocation::new(16, 16, 64.0, 20.0).unwrap();
        let iv = feasible_interval(Component::Key, &link, &alloc, &th, &cfg).unwrap().unwrap();
        let expected = 16.0 / shannon_capacity(link.snr_eve()).unwrap();
        assert!((iv.hi - expected).abs() < 1e-6, "{} vs {expected}", iv.hi);
        assert_eq!(iv.lo, 16.0, "Bob key bound sits below the box");
    }

    #[test]
    fn key_interval_empty_when_eve_matches_bob() {
        // Eve as strong as Bob and a tight Bob cap: no key length both
        // reliable for Bob and erased for Eve
        let link = LinkConfig::from_db(0.0, 0.0, 5.0, 1.0).unwrap();
        let th = Thresholds {
            eps_bob_k_max: 0.1,
            eps_eve_k_min: 0.9,
            throughput_min: 0.0,
            ..Thresholds::default()
        };
        let cfg = SolverConfig::default();
        let alloc = CodeAllocation::new(16, 16, 64.0, 20.0).unwrap();
        assert!(feasible_interval(Component::Key, &link, &alloc, &th, &cfg).unwrap().is_none());
    }

    #[test]
    fn throughput_restricts_key_interval() {
        let link = search_path_link();
        let th = Thresholds::default();
        let cfg = SolverConfig::default();
        let alloc = CodeAllocation::new(16, 16, 128.0, 26.0).unwrap();
        let iv = feasible_interval(Component::Key, &link, &alloc, &th, &cfg).unwrap().unwrap();
        // at n_m = 128 the short-key corner violates the throughput floor
        assert!(iv.lo > 16.0, "throughput floor must lift the lower edge, got {}", iv.lo);
        let at_lo = evaluate(&link, &CodeAllocation { n_k: iv.lo, ..alloc }).unwrap();
        assert!(at_lo.throughput >= th.throughput_min - 1e-9);
    }

    #[test]
    fn solve_matches_grid_oracle_on_search_path_scenarios() {
        let link = search_path_link();
        let th = Thresholds::default();
        let cfg = SolverConfig::default();
        for d_m in [16, 24] {
            let result = solve(&link, d_m, 16, &th, &cfg).unwrap();
            assert!(result.feasible);
            // a feasible verdict must survive an independent recheck
            let alloc =
                CodeAllocation::new(d_m, 16, result.n_m_opt as f64, result.n_k_opt as f64)
                    .unwrap();
            assert!(check_feasible(&result.profile, &alloc, &th).feasible);
            let oracle = grid_oracle(&link, d_m, 16, &th, (16, 128)).unwrap();
            let (om, ok, ord) = oracle.best.unwrap();
            assert!(
                result.profile.r_d >= (1.0 - 1e-6) * ord,
                "d_m={d_m}: solver {} at ({}, {}) vs oracle {} at ({om}, {ok})",
                result.profile.r_d,
                result.n_m_opt,
                result.n_k_opt,
                ord
            );
        }
    }

    #[test]
    fn box_midpoint_init_strategy() {
        let cfg = SolverConfig { init_strategy: InitStrategy::BoxMidpoint, ..Default::default() };
        // a longer key payload than ciphertext payload makes the midpoint
        // allocation feasible: the eavesdropper can carry the message rate
        // but not the key rate at equal blocklengths
        let link = LinkConfig::from_db(0.0, -15.0, 5.0, 1.0).unwrap();
        let th = Thresholds { throughput_min: 0.02, ..Thresholds::default() };
        let result = solve(&link, 8, 24, &th, &cfg).unwrap();
        assert!(result.feasible);

        // with equal payloads no midpoint can satisfy both message and key
        // thresholds at once, so the midpoint strategy reports infeasible
        let result = solve(&surface_link(), 16, 16, &Thresholds::default(), &cfg).unwrap();
        assert!(!result.feasible);
    }

    #[test]
    fn solve_trace_is_monotone_at_anchors() {
        let link = search_path_link();
        let result = solve(&link, 16, 16, &Thresholds::default(), &SolverConfig::default()).unwrap();
        let anchors: Vec<f64> = result.trace.mm_records().map(|r| r.true_rd).collect();
        assert!(anchors.len() >= 2);
        for w in anchors.windows(2) {
            assert!(w[1] >= w[0] - 1e-12, "anchor sequence decreased: {w:?}");
        }
    }

    #[test]
    fn solve_is_deterministic() {
        let link = search_path_link();
        let a = solve(&link, 16, 16, &Thresholds::default(), &SolverConfig::default()).unwrap();
        let b = solve(&link, 16, 16, &Thresholds::default(), &SolverConfig::default()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn solve_reports_infeasible_problems() {
        let link = surface_link();
        let th = Thresholds { throughput_min: 10.0, ..Thresholds::default() };
        let result = solve(&link, 16, 16, &th, &SolverConfig::default()).unwrap();
        assert!(!result.feasible);
    }

    #[test]
    fn grid_oracle_singleton_box() {
        let link = surface_link();
        let th = Thresholds {
            eps_bob_m_max: 1.0,
            eps_eve_m_max: 1.0,
            eps_bob_k_max: 1.0,
            eps_eve_k_min: 0.0,
            throughput_min: 0.0,
        };
        let oracle = grid_oracle(&link, 16, 16, &th, (20, 20)).unwrap();
        assert_eq!(oracle.surface.len(), 1);
        let best = oracle.best.unwrap();
        assert_eq!((best.0, best.1), (20, 20));
    }

    #[test]
    fn grid_oracle_empty_verdict() {
        let link = surface_link();
        let th = Thresholds { throughput_min: 10.0, ..Thresholds::default() };
        let oracle = grid_oracle(&link, 16, 16, &th, (16, 32)).unwrap();
        assert!(oracle.best.is_none());
        assert_eq!(oracle.surface.len(), 17 * 17);
    }

    #[test]
    fn baseline_is_exhaustive_minimum() {
        let link = surface_link();
        let th = Thresholds { throughput_min: 0.05, ..Thresholds::default() };
        let cfg = SolverConfig::default();
        let result = baseline_pls(&link, 16, &th, &cfg).unwrap();
        assert!(result.feasible);
        assert_eq!(result.profile.r_d, 0.0);
        assert_eq!(result.n_k_opt, 0);
        // re-scan: no feasible n_m does better
        for n_m in 16..=128u32 {
            let alloc = CodeAllocation::new(16, 0, n_m as f64, 0.0).unwrap();
            let p = evaluate(&link, &alloc).unwrap();
            if check_feasible(&p, &alloc, &th).feasible {
                assert!(result.profile.eps_lf <= p.eps_lf + 1e-15);
            }
        }
    }

    #[test]
    fn baseline_infeasible_when_floor_unreachable() {
        let link = surface_link();
        let th = Thresholds { throughput_min: 10.0, ..Thresholds::default() };
        let result = baseline_pls(&link, 16, &th, &SolverConfig::default()).unwrap();
        assert!(!result.feasible);
    }

    #[test]
    fn fp_iterates_stay_inside_their_interval() {
        let link = search_path_link();
        let th = Thresholds::default();
        let cfg = SolverConfig::default();
        let anchor = BoundAnchor::new(&link, 16, 16, 112.0, 32.0).unwrap();
        let alloc = CodeAllocation::new(16, 16, 112.0, 32.0).unwrap();
        let iv = feasible_interval(Component::Key, &link, &alloc, &th, &cfg).unwrap().unwrap();
        let mut trace = IterationTrace::default();
        let nk = fp_solve_key(&anchor, &link, &alloc, &th, &cfg, &mut trace).unwrap().unwrap();
        assert!(nk >= iv.lo && nk <= iv.hi);
        for r in &trace.records {
            assert!(r.n_k >= iv.lo - 1e-9 && r.n_k <= iv.hi + 1e-9);
        }
        // objective sequence is non-decreasing across inner iterations
        let vals: Vec<f64> = trace.records.iter().map(|r| r.surrogate).collect();
        for w in vals.windows(2) {
            assert!(w[1] >= w[0] - 1e-12, "fp objective decreased: {w:?}");
        }
    }
}
