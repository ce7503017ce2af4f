//! Certified existence of zeros.
//!
//! Two kinds of evidence: an exact Gaussian-rational zero, or a rectangle in
//! one free coordinate (the others fixed) on whose boundary `f` winds around
//! the origin at least once.

use std::cmp::Ordering;
use std::collections::{BTreeMap, VecDeque};
use std::sync::Arc;
use std::time::Instant;

use thiserror::Error;

use crate::budget::EnumerationBudget;
use crate::epoly::{canonicalize, EPoly};
use crate::gaussian::{gaussian_tuples, GaussianRational, TuplesByHeight};
use crate::numerics::{enclose_epoly, precision_schedule, ComplexInterval, Dyadic, Interval, Precision};
use crate::term::Term;
use crate::zerofree::{bind, check_roles, restrict, Point, RoleError};

/// Axis-parallel rectangle with dyadic corners and positive area.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Rectangle {
    re: Interval,
    im: Interval,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum RootError {
    #[error("rectangle has zero area")]
    Degenerate,
    #[error("expected one free variable, found {0}")]
    NotUnivariate(usize),
}

impl Rectangle {
    pub fn new(re: Interval, im: Interval) -> Result<Rectangle, RootError> {
        if re.width().is_zero() || im.width().is_zero() {
            return Err(RootError::Degenerate);
        }
        Ok(Rectangle { re, im })
    }

    /// `[re_lo, re_hi] × [im_lo, im_hi]`.
    pub fn from_corners(re_lo: Dyadic, re_hi: Dyadic, im_lo: Dyadic, im_hi: Dyadic) -> Result<Rectangle, RootError> {
        if re_lo >= re_hi || im_lo >= im_hi {
            return Err(RootError::Degenerate);
        }
        Rectangle::new(Interval::new(re_lo, re_hi), Interval::new(im_lo, im_hi))
    }

    /// Square of side `2^side_exp` centred at `(cx, cy)·2^center_exp`.
    pub fn square(cx: i64, cy: i64, center_exp: i64, side_exp: i64) -> Rectangle {
        let half = Dyadic::pow2(side_exp - 1);
        let x = Dyadic::from_int(cx).shift(center_exp);
        let y = Dyadic::from_int(cy).shift(center_exp);
        Rectangle {
            re: Interval::new(x.sub(&half), x.add(&half)),
            im: Interval::new(y.sub(&half), y.add(&half)),
        }
    }

    pub fn re(&self) -> &Interval {
        &self.re
    }

    pub fn im(&self) -> &Interval {
        &self.im
    }

    pub fn contains_gaussian(&self, g: &GaussianRational) -> bool {
        self.re.contains_rational(&g.re) && self.im.contains_rational(&g.im)
    }

    fn corners(&self) -> [(Dyadic, Dyadic); 4] {
        let (a, b) = (self.re.lo().clone(), self.re.hi().clone());
        let (c, d) = (self.im.lo().clone(), self.im.hi().clone());
        [(a.clone(), c.clone()), (b.clone(), c), (b, d.clone()), (a, d)]
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum HasZeroCertificate {
    /// `P(ā, point) = 0` exactly.
    ExactRationalZero { point: Point },
    /// With the coordinates in `fixed` substituted, `P(ā, ·)` winds
    /// `winding` times around 0 along the boundary of `rect` in `free_var`.
    WindingZero {
        fixed: Point,
        free_var: String,
        rect: Rectangle,
        winding: u64,
        precision: Precision,
    },
}

/// Per-rectangle limits on the boundary subdivision.
const MAX_DEPTH: u32 = 20;
const MAX_SEGMENTS: usize = 4096;

type Vertex = (Dyadic, Dyadic);

/// Open half-plane containing the enclosure: 0 for re>0, 1 for im>0, 2 for
/// re<0, 3 for im<0.
fn half_plane(z: &ComplexInterval) -> Option<u8> {
    let zero = Dyadic::zero();
    if z.re.lo() > &zero {
        Some(0)
    } else if z.im.lo() > &zero {
        Some(1)
    } else if z.re.hi() < &zero {
        Some(2)
    } else if z.im.hi() < &zero {
        Some(3)
    } else {
        None
    }
}

struct Walk<'a> {
    f: &'a EPoly,
    var: &'a str,
    p: Precision,
    evals: usize,
    labels: Vec<u8>,
}

impl Walk<'_> {
    fn segment(&mut self, a: &Vertex, b: &Vertex, depth: u32) -> Option<()> {
        self.evals += 1;
        if self.evals > MAX_SEGMENTS {
            return None;
        }
        let hull = |x: &Dyadic, y: &Dyadic| Interval::new(x.clone().min(y.clone()), x.clone().max(y.clone()));
        let mut env = BTreeMap::new();
        env.insert(self.var.to_string(), ComplexInterval::new(hull(&a.0, &b.0), hull(&a.1, &b.1)));
        if let Some(label) = enclose_epoly(self.f, &env, self.p).ok().as_ref().and_then(half_plane) {
            self.labels.push(label);
            return Some(());
        }
        if depth >= MAX_DEPTH {
            return None;
        }
        let mid = (a.0.add(&b.0).shift(-1), a.1.add(&b.1).shift(-1));
        self.segment(a, &mid, depth + 1)?;
        self.segment(&mid, b, depth + 1)
    }
}

/// Winding of a univariate canonical form along the counterclockwise
/// boundary of `rect`, or `None` when 0 cannot be excluded.
pub fn winding_of(f: &EPoly, rect: &Rectangle, p: Precision) -> Result<Option<i64>, RootError> {
    let vars = f.free_vars();
    if vars.len() > 1 {
        return Err(RootError::NotUnivariate(vars.len()));
    }
    let var = vars.into_iter().next().unwrap_or_default();
    let mut walk = Walk {
        f,
        var: &var,
        p,
        evals: 0,
        labels: Vec::new(),
    };
    let c = rect.corners();
    for k in 0..4 {
        if walk.segment(&c[k], &c[(k + 1) % 4], 0).is_none() {
            return Ok(None);
        }
    }
    let n = walk.labels.len();
    let mut quarters = 0i64;
    for k in 0..n {
        match (4 + walk.labels[(k + 1) % n] - walk.labels[k]) % 4 {
            0 => {}
            1 => quarters += 1,
            3 => quarters -= 1,
            // adjacent enclosures share a point, so they cannot sit in opposite half-planes
            _ => return Ok(None),
        }
    }
    debug_assert_eq!(quarters % 4, 0);
    Ok(Some(quarters / 4))
}

/// Winding of `f` (one free variable) along the boundary of `rect`.
pub fn winding_number(f: &Term, rect: &Rectangle, p: Precision) -> Result<Option<i64>, RootError> {
    winding_of(&canonicalize(f), rect, p)
}

/// One unit of zero-hunting work.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ZeroJob {
    Exact(Point),
    Rect {
        fixed: Point,
        free: String,
        rect: Rectangle,
    },
}

// Counterclockwise from the positive real axis.
fn angle_cmp(a: (i64, i64), b: (i64, i64)) -> Ordering {
    let half = |(x, y): (i64, i64)| if y > 0 || (y == 0 && x > 0) { 0 } else { 1 };
    half(a)
        .cmp(&half(b))
        .then_with(|| (b.0 * a.1).cmp(&(a.0 * b.1)))
}

fn ring(points: impl Iterator<Item = (i64, i64)>) -> Vec<(i64, i64)> {
    let mut v: Vec<_> = points.collect();
    v.sort_by(|a, b| angle_cmp(*a, *b));
    v
}

/// Rectangles tried for each slice: unit squares centred on integer points,
/// ring by ring outwards, each ring followed by the unit squares of the
/// half-shifted grid; then squares of side ½ within radius 2.
pub fn rectangle_schedule(max_height: u64) -> Vec<Rectangle> {
    let h = max_height as i64;
    let mut out = Vec::new();
    for r in 0..=h {
        let main = ring((-r..=r).flat_map(|a| (-r..=r).map(move |b| (a, b))).filter(|&(a, b)| a.abs().max(b.abs()) == r));
        out.extend(main.into_iter().map(|(a, b)| Rectangle::square(a, b, 0, 0)));
        let s = 2 * r + 1;
        let offset = ring(
            (-s..=s)
                .step_by(2)
                .flat_map(|a| (-s..=s).step_by(2).map(move |b| (a, b)))
                .filter(|&(a, b)| a.abs().max(b.abs()) == s),
        );
        out.extend(offset.into_iter().map(|(a, b)| Rectangle::square(a, b, -1, 0)));
    }
    let mut fine: Vec<(i64, i64)> = (-8..=8)
        .filter(|a: &i64| a.rem_euclid(2) == 1)
        .flat_map(|a| (-8..=8).filter(|b: &i64| b.rem_euclid(2) == 1).map(move |b| (a, b)))
        .filter(|&(a, b)| a.abs().max(b.abs()) <= 8)
        .collect();
    fine.sort_by(|a, b| {
        a.0.abs()
            .max(a.1.abs())
            .cmp(&b.0.abs().max(b.1.abs()))
            .then_with(|| angle_cmp(*a, *b))
    });
    out.extend(fine.into_iter().map(|(a, b)| Rectangle::square(a, b, -2, -1)));
    out
}

/// Jobs for one slice: exact values of the free coordinate by height,
/// alternating with the rectangle schedule.
struct SliceJobs {
    fixed: Point,
    free: String,
    exact: TuplesByHeight<GaussianRational>,
    rects: Arc<Vec<Rectangle>>,
    next_rect: usize,
    turn: bool,
}

impl Iterator for SliceJobs {
    type Item = ZeroJob;

    fn next(&mut self) -> Option<ZeroJob> {
        for _ in 0..2 {
            self.turn = !self.turn;
            if self.turn {
                if let Some(v) = self.exact.next() {
                    let mut point = self.fixed.clone();
                    point.insert(self.free.clone(), v[0].clone());
                    return Some(ZeroJob::Exact(point));
                }
            } else if let Some(rect) = self.rects.get(self.next_rect) {
                self.next_rect += 1;
                return Some(ZeroJob::Rect {
                    fixed: self.fixed.clone(),
                    free: self.free.clone(),
                    rect: rect.clone(),
                });
            }
        }
        None
    }
}

/// The fixed dovetail order of zero-hunting jobs for `m` quantified
/// variables.
///
/// Each round yields the next exact `m`-tuple, then one job from every
/// active slice in activation order. Slice `s` becomes active in round
/// `2^s − 1`, or as soon as every active slice is used up.
pub struct ZeroJobs {
    y_vars: Vec<String>,
    max_height: u64,
    rects: Arc<Vec<Rectangle>>,
    exact: Option<TuplesByHeight<GaussianRational>>,
    fixings: Option<TuplesByHeight<GaussianRational>>,
    current_fixing: Option<Vec<GaussianRational>>,
    free_index: usize,
    active: Vec<SliceJobs>,
    round: u64,
    next_activation: u64,
    queue: VecDeque<ZeroJob>,
}

impl ZeroJobs {
    pub fn new(y_vars: &[String], max_height: u64) -> ZeroJobs {
        let m = y_vars.len();
        let rects = Arc::new(rectangle_schedule(max_height));
        let mut jobs = ZeroJobs {
            y_vars: y_vars.to_vec(),
            max_height,
            rects,
            exact: None,
            fixings: None,
            current_fixing: None,
            free_index: 0,
            active: Vec::new(),
            round: 0,
            next_activation: 0,
            queue: VecDeque::new(),
        };
        match m {
            0 => jobs.queue.push_back(ZeroJob::Exact(Point::new())),
            1 => jobs.active.push(jobs.slice(Point::new(), 0)),
            _ => {
                jobs.exact = Some(gaussian_tuples(m, max_height));
                jobs.fixings = Some(gaussian_tuples(m - 1, max_height));
            }
        }
        jobs
    }

    fn slice(&self, fixed: Point, free: usize) -> SliceJobs {
        SliceJobs {
            fixed,
            free: self.y_vars[free].clone(),
            exact: gaussian_tuples(1, self.max_height),
            rects: Arc::clone(&self.rects),
            next_rect: 0,
            turn: false,
        }
    }

    fn next_slice(&mut self) -> Option<SliceJobs> {
        let fixings = self.fixings.as_mut()?;
        if self.current_fixing.is_none() || self.free_index == 0 {
            self.current_fixing = Some(fixings.next()?);
            self.free_index = self.y_vars.len();
        }
        self.free_index -= 1;
        let free = self.free_index;
        let values = self.current_fixing.as_ref().expect("set above");
        let names: Vec<String> = (0..self.y_vars.len())
            .filter(|&i| i != free)
            .map(|i| self.y_vars[i].clone())
            .collect();
        Some(self.slice(bind(&names, values), free))
    }

    fn fill_round(&mut self) -> bool {
        let mut progressed = false;
        if let Some(t) = self.exact.as_mut().and_then(|e| e.next()) {
            self.queue.push_back(ZeroJob::Exact(bind(&self.y_vars, &t)));
            progressed = true;
        }
        if self.round >= self.next_activation || self.active.is_empty() {
            if let Some(s) = self.next_slice() {
                self.active.push(s);
                self.next_activation = 2 * self.round + 1;
            }
        }
        let mut i = 0;
        while i < self.active.len() {
            match self.active[i].next() {
                Some(j) => {
                    self.queue.push_back(j);
                    progressed = true;
                    i += 1;
                }
                None => {
                    self.active.remove(i);
                }
            }
        }
        self.round += 1;
        progressed || !self.active.is_empty()
    }
}

impl Iterator for ZeroJobs {
    type Item = ZeroJob;

    fn next(&mut self) -> Option<ZeroJob> {
        loop {
            if let Some(j) = self.queue.pop_front() {
                return Some(j);
            }
            if !self.fill_round() && self.queue.is_empty() {
                return None;
            }
        }
    }
}

/// Runs one job against `P(ā, ·)`.
pub fn attempt(restricted: &EPoly, job: &ZeroJob, max_bits: Precision) -> Option<HasZeroCertificate> {
    match job {
        ZeroJob::Exact(point) => {
            let value = restricted.substitute_values(point).as_constant()?;
            value.is_zero().then(|| HasZeroCertificate::ExactRationalZero { point: point.clone() })
        }
        ZeroJob::Rect { fixed, free, rect } => {
            let f = restricted.substitute_values(fixed);
            if f.free_vars().iter().any(|v| v != free) {
                return None;
            }
            for p in precision_schedule(max_bits) {
                match winding_of(&f, rect, p) {
                    Ok(Some(w)) if w >= 1 => {
                        return Some(HasZeroCertificate::WindingZero {
                            fixed: fixed.clone(),
                            free_var: free.clone(),
                            rect: rect.clone(),
                            winding: w as u64,
                            precision: p,
                        })
                    }
                    Ok(Some(_)) | Err(_) => return None,
                    Ok(None) => {}
                }
            }
            None
        }
    }
}

/// First certified zero of `f` in its only free variable.
pub fn find_zero_1d(f: &Term, budget: &EnumerationBudget) -> Option<HasZeroCertificate> {
    let vars: Vec<String> = f.free_vars().into_iter().collect();
    if vars.len() > 1 {
        return None;
    }
    let canon = canonicalize(f);
    let start = Instant::now();
    ZeroJobs::new(&vars, budget.max_height)
        .take_while(|_| start.elapsed() < budget.timeout)
        .find_map(|job| attempt(&canon, &job, budget.max_bits))
}

/// First certified zero of `P(ā, ·)` in the fixed job order.
pub fn search_zero(
    p: &Term,
    point: &Point,
    y_vars: &[String],
    budget: &EnumerationBudget,
) -> Result<Option<HasZeroCertificate>, RoleError> {
    check_roles(&[p], point, y_vars)?;
    let restricted = restrict(p, point);
    let start = Instant::now();
    Ok(ZeroJobs::new(y_vars, budget.max_height)
        .take_while(|_| start.elapsed() < budget.timeout)
        .find_map(|job| attempt(&restricted, &job, budget.max_bits)))
}
