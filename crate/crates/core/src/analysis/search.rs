//! Candidate-pair search shared by the modulus and certificate engines.
//!
//! Both metrics are weighted l1 seminorms of a linear image of the
//! difference. A pair with input distance `f` and output distance `g`
//! therefore has value `g * min(1, delta / f)` at radius `delta` once the
//! second point is moved toward the first along the segment.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::operators::{BOperator, SuperMap};
use crate::space::sample::{gaussian_vector, random_ball, random_sphere};
use crate::space::{derive_seed, seeded_rng, HVector, MetricScheme};
use super::Witness;
use crate::{Result, C64};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchMethod {
    Structured,
    Sampling,
    LocalSearch,
}

pub(crate) const LOCAL_ITERS: usize = 50;
pub(crate) const LOCAL_STARTS: usize = 3;
pub(crate) const START_POOL: usize = 64;
const SHORTLIST: usize = 32;
const BATCH: usize = 64;
/// Rows of the coefficient matrix kept when evaluating `d` during search.
/// The omitted tail is bounded and added to every input distance.
const OPERATOR_ROWS: usize = 64;

const TAG_RANDOM: u64 = 0x7261_6e64;
const TAG_POOL: u64 = 0x706f_6f6c;
const TAG_LOCAL: u64 = 0x6c6f_6361;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

pub(crate) fn scaled(inp: f64, out: f64, delta: f64) -> f64 {
    if inp <= delta {
        out
    } else {
        delta * (out / inp)
    }
}

/// Segment parameter `s` placing the second point at input distance at most
/// `delta`; the small margin absorbs rounding in the exact recomputation.
pub(crate) fn segment_factor(inp: f64, delta: f64) -> f64 {
    if inp <= delta {
        1.0
    } else {
        delta / inp * (1.0 - 1e-12)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct Eval {
    pub inp: f64,
    pub out: f64,
    pub member: usize,
}

fn better(out: f64, member: usize, best: (f64, usize)) -> (f64, usize) {
    if out > best.0 {
        (out, member)
    } else {
        best
    }
}

#[derive(Clone, Debug)]
pub(crate) struct Hit<P> {
    pub value: f64,
    pub eval: Eval,
    pub pair: P,
    pub method: SearchMethod,
}

fn ranks_above<P>(v: f64, e: &Eval, h: &Hit<P>) -> bool {
    v > h.value || (v == h.value && e.inp < h.eval.inp)
}

/// Per-radius best values, local-search starts and (optionally) a
/// shortlist of pairs reaching a qualification threshold at the first radius.
pub(crate) struct Tracker<P> {
    pub deltas: Vec<f64>,
    pub best: Vec<Option<Hit<P>>>,
    pub starts: Vec<Vec<Hit<P>>>,
    pub qualify: Option<f64>,
    pub qualified: Vec<Hit<P>>,
    pub evaluated: usize,
}

impl<P: Clone> Tracker<P> {
    pub fn new(deltas: &[f64], qualify: Option<f64>) -> Self {
        Self {
            deltas: deltas.to_vec(),
            best: vec![None; deltas.len()],
            starts: vec![Vec::new(); deltas.len()],
            qualify,
            qualified: Vec::new(),
            evaluated: 0,
        }
    }

    pub fn offer(&mut self, pair: &P, e: Eval, method: SearchMethod, as_start: bool) {
        self.evaluated += 1;
        for k in 0..self.deltas.len() {
            let v = scaled(e.inp, e.out, self.deltas[k]);
            let hit = || Hit {
                value: v,
                eval: e,
                pair: pair.clone(),
                method,
            };
            if self.best[k].as_ref().is_none_or(|h| ranks_above(v, &e, h)) {
                self.best[k] = Some(hit());
            }
            if as_start {
                insert_ranked(&mut self.starts[k], hit(), v, &e, LOCAL_STARTS);
            }
            if k == 0 && self.qualify.is_some_and(|t| v >= t) {
                insert_ranked(&mut self.qualified, hit(), v, &e, SHORTLIST);
            }
        }
    }
}

fn insert_ranked<P>(list: &mut Vec<Hit<P>>, hit: Hit<P>, v: f64, e: &Eval, cap: usize) {
    if list.len() >= cap && !ranks_above(v, e, &list[list.len() - 1]) {
        return;
    }
    let pos = list
        .iter()
        .position(|h| ranks_above(v, e, h))
        .unwrap_or(list.len());
    list.insert(pos, hit);
    list.truncate(cap);
}

pub(crate) struct RunConfig {
    pub budget: usize,
    pub seed: u64,
    /// Evaluate the budget-independent pool of random local-search starts.
    pub pool: bool,
    /// Let budget samples seed the local search.
    pub random_starts: bool,
    /// Stop after the first phase that produced a qualifying pair.
    pub stop_when_qualified: bool,
}

fn random_point<R: Rng>(rng: &mut R, n: usize) -> DVector<C64> {
    if rng.random::<bool>() {
        random_sphere(rng, n).into_dvector()
    } else {
        random_ball(rng, n).into_dvector()
    }
}

fn gaussian_step<R: Rng>(rng: &mut R, step: f64) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re * step, im * step)
}

fn local_step(it: usize) -> f64 {
    0.5 * 0.93f64.powi(it as i32)
}

fn net_positions(scheme: &MetricScheme) -> Vec<usize> {
    let one = ONE;
    scheme
        .sequence()
        .iter()
        .enumerate()
        .filter(|(_, h)| {
            let c = h.coords();
            let nz = c.iter().filter(|z| **z != ZERO).count();
            !(nz == 1 && c.iter().any(|z| *z == one))
        })
        .map(|(i, _)| i)
        .collect()
}

// ---------------------------------------------------------------- vectors

pub(crate) struct VectorObjective {
    weights: Vec<f64>,
    coeffs: DMatrix<C64>,
    images: Vec<DMatrix<C64>>,
}

impl VectorObjective {
    pub fn new(scheme: &MetricScheme, ops: &[&BOperator]) -> Self {
        let coeffs = scheme.coeffs().clone();
        let images = ops.iter().map(|t| &coeffs * t.matrix()).collect();
        Self {
            weights: scheme.weights().to_vec(),
            coeffs,
            images,
        }
    }

    pub fn dim(&self) -> usize {
        self.coeffs.ncols()
    }

    fn l1_diff(&self, a: &DVector<C64>, b: &DVector<C64>) -> f64 {
        a.iter()
            .zip(b.iter())
            .zip(&self.weights)
            .map(|((u, v), w)| (u - v).norm() * w)
            .sum()
    }

    fn l1_col(&self, m: &DMatrix<C64>, j: usize) -> f64 {
        m.column(j)
            .iter()
            .zip(&self.weights)
            .map(|(z, w)| z.norm() * w)
            .sum()
    }

    fn basis_l1(&self, m: &DMatrix<C64>, x: Option<(usize, C64)>, y: Option<(usize, C64)>) -> f64 {
        let mut total = 0.0;
        for i in 0..m.nrows() {
            let mut v = ZERO;
            if let Some((p, a)) = x {
                v += a * m[(i, p)];
            }
            if let Some((q, b)) = y {
                v -= b * m[(i, q)];
            }
            total += v.norm() * self.weights[i];
        }
        total
    }

    pub fn eval_basis(&self, x: Option<(usize, C64)>, y: Option<(usize, C64)>) -> Eval {
        let inp = self.basis_l1(&self.coeffs, x, y);
        let (out, member) = self
            .images
            .iter()
            .enumerate()
            .fold((0.0, 0), |b, (k, m)| better(self.basis_l1(m, x, y), k, b));
        Eval { inp, out, member }
    }

    /// Evaluates every column of `z` as a difference vector.
    pub fn eval_dense(&self, z: &DMatrix<C64>) -> Vec<Eval> {
        let cin = &self.coeffs * z;
        let mut out = vec![(0.0, 0usize); z.ncols()];
        for (k, m) in self.images.iter().enumerate() {
            let w = m * z;
            for (j, o) in out.iter_mut().enumerate() {
                *o = better(self.l1_col(&w, j), k, *o);
            }
        }
        out.into_iter()
            .enumerate()
            .map(|(j, (o, member))| Eval {
                inp: self.l1_col(&cin, j),
                out: o,
                member,
            })
            .collect()
    }
}

#[derive(Clone, Debug)]
pub(crate) enum VPoint {
    Zero,
    Basis(usize, C64),
    Seq(usize),
    Given(Arc<DVector<C64>>),
}

#[derive(Clone, Debug)]
pub(crate) enum VPair {
    Points(VPoint, VPoint),
    Random {
        seed: u64,
        anchor: Option<Arc<DVector<C64>>>,
    },
}

pub(crate) struct VectorEngine<'a> {
    pub obj: VectorObjective,
    scheme: &'a MetricScheme,
    anchor: Option<Arc<DVector<C64>>>,
}

impl<'a> VectorEngine<'a> {
    pub fn new(scheme: &'a MetricScheme, ops: &[&BOperator], anchor: Option<&HVector>) -> Self {
        Self {
            obj: VectorObjective::new(scheme, ops),
            scheme,
            anchor: anchor.map(|a| Arc::new(a.coords().clone())),
        }
    }

    fn point(&self, p: &VPoint) -> DVector<C64> {
        let n = self.obj.dim();
        match p {
            VPoint::Zero => DVector::zeros(n),
            VPoint::Basis(i, a) => {
                let mut v = DVector::zeros(n);
                v[*i] = *a;
                v
            }
            VPoint::Seq(i) => self.scheme.sequence()[*i].coords().clone(),
            VPoint::Given(v) => (**v).clone(),
        }
    }

    pub fn materialize(&self, pair: &VPair) -> (DVector<C64>, DVector<C64>) {
        match pair {
            VPair::Points(x, y) => (self.point(x), self.point(y)),
            VPair::Random { seed, anchor } => {
                let n = self.obj.dim();
                let mut rng = seeded_rng(*seed);
                let x = match anchor {
                    Some(a) => (**a).clone(),
                    None => random_point(&mut rng, n),
                };
                (x, random_point(&mut rng, n))
            }
        }
    }

    /// `(x, y_s)` with `y_s` moved toward `x` so that the input distance is
    /// at most `delta`.
    pub fn feasible_pair(&self, hit: &Hit<VPair>, delta: f64) -> (HVector, HVector) {
        let (x, y) = self.materialize(&hit.pair);
        let s = segment_factor(hit.eval.inp, delta);
        let ys = &x + (&y - &x) * C64::new(s, 0.0);
        (HVector::from_dvector(x), HVector::from_dvector(ys))
    }

    fn offer_dense(&self, t: &mut Tracker<VPair>, pairs: &[VPair], method: SearchMethod, as_start: bool) {
        let n = self.obj.dim();
        for chunk in pairs.chunks(BATCH) {
            let mut z = DMatrix::zeros(n, chunk.len());
            for (j, p) in chunk.iter().enumerate() {
                let (x, y) = self.materialize(p);
                z.set_column(j, &(x - y));
            }
            for (p, e) in chunk.iter().zip(self.obj.eval_dense(&z)) {
                t.offer(p, e, method, as_start);
            }
        }
    }

    fn structured(&self, t: &mut Tracker<VPair>) {
        let n = self.obj.dim();
        let nets = net_positions(self.scheme);
        match &self.anchor {
            None => {
                for p in 0..n {
                    let x = VPoint::Basis(p, ONE);
                    let e = self.obj.eval_basis(Some((p, ONE)), None);
                    t.offer(&VPair::Points(x.clone(), VPoint::Zero), e, SearchMethod::Structured, true);
                    for q in p + 1..n {
                        let e = self.obj.eval_basis(Some((p, ONE)), Some((q, ONE)));
                        let pair = VPair::Points(x.clone(), VPoint::Basis(q, ONE));
                        t.offer(&pair, e, SearchMethod::Structured, true);
                    }
                }
                let mut pairs = Vec::new();
                for (k, &a) in nets.iter().enumerate() {
                    pairs.push(VPair::Points(VPoint::Seq(a), VPoint::Zero));
                    for &b in &nets[k + 1..] {
                        pairs.push(VPair::Points(VPoint::Seq(a), VPoint::Seq(b)));
                    }
                }
                self.offer_dense(t, &pairs, SearchMethod::Structured, true);
            }
            Some(x0) => {
                let x = VPoint::Given(x0.clone());
                let mut pairs = vec![VPair::Points(x.clone(), VPoint::Zero)];
                for p in 0..n {
                    for a in [ONE, -ONE, C64::new(0.0, 1.0)] {
                        pairs.push(VPair::Points(x.clone(), VPoint::Basis(p, a)));
                    }
                }
                for &a in &nets {
                    pairs.push(VPair::Points(x.clone(), VPoint::Seq(a)));
                }
                self.offer_dense(t, &pairs, SearchMethod::Structured, true);
            }
        }
    }

    fn random(&self, tag: u64, count: usize, seed: u64) -> Vec<VPair> {
        (0..count as u64)
            .map(|k| VPair::Random {
                seed: derive_seed(seed, tag, k),
                anchor: self.anchor.clone(),
            })
            .collect()
    }

    pub fn run(&self, t: &mut Tracker<VPair>, cfg: &RunConfig) {
        let done = |t: &Tracker<VPair>| cfg.stop_when_qualified && !t.qualified.is_empty();
        self.structured(t);
        if done(t) {
            return;
        }
        if cfg.pool {
            let pool = self.random(TAG_POOL, START_POOL, cfg.seed);
            self.offer_dense(t, &pool, SearchMethod::Sampling, true);
        }
        let samples = self.random(TAG_RANDOM, cfg.budget, cfg.seed);
        self.offer_dense(t, &samples, SearchMethod::Sampling, cfg.random_starts);
        if done(t) {
            return;
        }
        for k in 0..t.deltas.len() {
            let starts = t.starts[k].clone();
            for (si, start) in starts.iter().enumerate() {
                let (x, y) = self.materialize(&start.pair);
                let seed = derive_seed(cfg.seed, TAG_LOCAL, (k * LOCAL_STARTS + si) as u64);
                let (x, y, e) = self.ascend(x, y, t.deltas[k], seed);
                let pair = VPair::Points(VPoint::Given(Arc::new(x)), VPoint::Given(Arc::new(y)));
                t.offer(&pair, e, SearchMethod::LocalSearch, false);
            }
        }
    }

    /// Coordinate perturbation ascent of the value at `delta`, keeping both
    /// points in the unit ball.
    fn ascend(
        &self,
        mut x: DVector<C64>,
        mut y: DVector<C64>,
        delta: f64,
        seed: u64,
    ) -> (DVector<C64>, DVector<C64>, Eval) {
        let obj = &self.obj;
        let n = obj.dim();
        let mut rng = seeded_rng(seed);
        let image = |v: &DVector<C64>| -> (DVector<C64>, Vec<DVector<C64>>) {
            (&obj.coeffs * v, obj.images.iter().map(|m| m * v).collect())
        };
        let eval = |a: &(DVector<C64>, Vec<DVector<C64>>), b: &(DVector<C64>, Vec<DVector<C64>>)| {
            let (out, member) = a
                .1
                .iter()
                .zip(&b.1)
                .enumerate()
                .fold((0.0, 0), |best, (k, (u, v))| better(obj.l1_diff(u, v), k, best));
            Eval {
                inp: obj.l1_diff(&a.0, &b.0),
                out,
                member,
            }
        };
        let mut ix = image(&x);
        let mut iy = image(&y);
        let mut cur = eval(&ix, &iy);
        let mut cur_v = scaled(cur.inp, cur.out, delta);
        for it in 0..LOCAL_ITERS {
            let p = rng.random_range(0..n);
            let move_x = self.anchor.is_none() && rng.random::<bool>();
            let eta = gaussian_step(&mut rng, local_step(it));
            let (v, iv) = if move_x { (&x, &ix) } else { (&y, &iy) };
            let mut v2 = v.clone();
            v2[p] += eta;
            let norm = v2.norm();
            let shrink = C64::new(if norm > 1.0 { 1.0 / norm } else { 1.0 }, 0.0);
            v2 *= shrink;
            let shift = |img: &DVector<C64>, m: &DMatrix<C64>| (img + m.column(p) * eta) * shrink;
            let iv2 = (
                shift(&iv.0, &obj.coeffs),
                iv.1.iter().zip(&obj.images).map(|(u, m)| shift(u, m)).collect::<Vec<_>>(),
            );
            let e = if move_x { eval(&iv2, &iy) } else { eval(&ix, &iv2) };
            let v = scaled(e.inp, e.out, delta);
            if v > cur_v {
                cur_v = v;
                cur = e;
                if move_x {
                    x = v2;
                    ix = iv2;
                } else {
                    y = v2;
                    iy = iv2;
                }
            }
        }
        (x, y, cur)
    }
}

// -------------------------------------------------------------- operators

struct MapImages {
    /// `C L`, truncated to the search rows.
    l: DMatrix<C64>,
    /// `C R^H`, truncated to the search rows.
    r: DMatrix<C64>,
    /// `C L R C^H`, the image of the identity.
    ident: DMatrix<C64>,
}

impl MapImages {
    fn new(c: &DMatrix<C64>, left: Option<&BOperator>, right: Option<&BOperator>) -> Self {
        let l = match left {
            Some(t) => c * t.matrix(),
            None => c.clone(),
        };
        let r = match right {
            Some(t) => c * t.matrix().adjoint(),
            None => c.clone(),
        };
        let ident = &l * r.adjoint();
        Self { l, r, ident }
    }
}

#[derive(Clone, Debug)]
pub(crate) enum OPoint {
    Zero,
    Identity,
    /// `e_p e_q^H`
    Unit(usize, usize),
    /// `x y^H`
    RankOne(Arc<DVector<C64>>, Arc<DVector<C64>>),
    Dense(Arc<DMatrix<C64>>),
}

impl OPoint {
    fn factored(&self) -> bool {
        matches!(self, OPoint::Zero | OPoint::Unit(..) | OPoint::RankOne(..))
    }

    fn factors(&self, n: usize) -> Option<(DVector<C64>, DVector<C64>)> {
        let unit = |i: usize| {
            let mut v = DVector::zeros(n);
            v[i] = ONE;
            v
        };
        match self {
            OPoint::Zero => Some((DVector::zeros(n), DVector::zeros(n))),
            OPoint::Unit(p, q) => Some((unit(*p), unit(*q))),
            OPoint::RankOne(x, y) => Some(((**x).clone(), (**y).clone())),
            OPoint::Identity | OPoint::Dense(_) => None,
        }
    }

    /// `x` when the point is the projection-like `x (x) x`.
    fn square_factor(&self, n: usize) -> Option<DVector<C64>> {
        match self {
            OPoint::Zero => Some(DVector::zeros(n)),
            OPoint::Unit(p, q) if p == q => self.factors(n).map(|f| f.0),
            OPoint::RankOne(x, y) if Arc::ptr_eq(x, y) || x == y => Some((**x).clone()),
            _ => None,
        }
    }

    fn matrix(&self, n: usize) -> DMatrix<C64> {
        match self {
            OPoint::Zero => DMatrix::zeros(n, n),
            OPoint::Identity => DMatrix::identity(n, n),
            OPoint::Dense(z) => (**z).clone(),
            _ => {
                let (x, y) = self.factors(n).expect("rank-one point");
                &x * y.adjoint()
            }
        }
    }
}

#[derive(Clone, Debug)]
pub(crate) enum OPair {
    Points(OPoint, OPoint),
    Random(u64, u64),
}

pub(crate) struct OperatorObjective {
    weights: Vec<f64>,
    tail: f64,
    input: MapImages,
    maps: Vec<MapImages>,
}

type Term = (C64, DVector<C64>, DVector<C64>);

impl OperatorObjective {
    pub fn new(scheme: &MetricScheme, maps: &[&SuperMap]) -> Self {
        let m = scheme.len();
        let rows = m.min(OPERATOR_ROWS);
        let c: DMatrix<C64> = scheme.coeffs().rows(0, rows).into_owned();
        // |<Z h_b, h_a>| <= 2 on the ball and sum_{a or b > rows} w_a w_b <= 2^(1 - rows)
        let tail = if rows < m { 4.0 * 0.5f64.powi(rows as i32) } else { 0.0 };
        Self {
            weights: scheme.weights()[..rows].to_vec(),
            tail,
            input: MapImages::new(&c, None, None),
            maps: maps
                .iter()
                .map(|s| MapImages::new(&c, s.left(), s.right()))
                .collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.input.l.ncols()
    }

    fn l1(&self, dense: Option<&DMatrix<C64>>, terms: &[Term]) -> f64 {
        let rows = self.weights.len();
        let mut total = 0.0;
        let mut conj_b = vec![ZERO; terms.len()];
        for b in 0..rows {
            for (k, (coef, _, beta)) in terms.iter().enumerate() {
                conj_b[k] = coef * beta[b].conj();
            }
            let mut col = 0.0;
            for a in 0..rows {
                let mut v = dense.map_or(ZERO, |d| d[(a, b)]);
                for (k, (_, alpha, _)) in terms.iter().enumerate() {
                    v += alpha[a] * conj_b[k];
                }
                col += v.norm() * self.weights[a];
            }
            total += col * self.weights[b];
        }
        total
    }

    fn map_l1(&self, mi: &MapImages, a: &OPoint, b: &OPoint) -> f64 {
        let mut dense: Option<DMatrix<C64>> = None;
        let mut terms: Vec<Term> = Vec::new();
        for (sign, pt) in [(ONE, a), (-ONE, b)] {
            let add = |dense: &mut Option<DMatrix<C64>>, w: DMatrix<C64>| {
                let w = w * sign;
                *dense = Some(match dense.take() {
                    Some(d) => d + w,
                    None => w,
                });
            };
            match pt {
                OPoint::Zero => {}
                OPoint::Identity => add(&mut dense, mi.ident.clone()),
                OPoint::Dense(z) => add(&mut dense, &mi.l * &**z * mi.r.adjoint()),
                OPoint::Unit(p, q) => {
                    terms.push((sign, mi.l.column(*p).into_owned(), mi.r.column(*q).into_owned()))
                }
                OPoint::RankOne(x, y) => terms.push((sign, &mi.l * &**x, &mi.r * &**y)),
            }
        }
        self.l1(dense.as_ref(), &terms)
    }

    pub fn eval(&self, a: &OPoint, b: &OPoint) -> Eval {
        let inp = self.map_l1(&self.input, a, b) + self.tail;
        let (out, member) = self
            .maps
            .iter()
            .enumerate()
            .fold((0.0, 0), |best, (k, mi)| better(self.map_l1(mi, a, b), k, best));
        Eval { inp, out, member }
    }
}

fn random_contraction<R: Rng>(rng: &mut R, n: usize) -> DMatrix<C64> {
    let g = DMatrix::from_vec(n, n, gaussian_vector(rng, n * n));
    let u: f64 = rng.random();
    // the Frobenius norm dominates the operator norm
    let f = g.norm();
    g * C64::new(u / f, 0.0)
}

pub(crate) struct OperatorEngine<'a> {
    pub obj: OperatorObjective,
    scheme: &'a MetricScheme,
}

impl<'a> OperatorEngine<'a> {
    pub fn new(scheme: &'a MetricScheme, maps: &[&SuperMap]) -> Self {
        Self {
            obj: OperatorObjective::new(scheme, maps),
            scheme,
        }
    }

    pub fn points(&self, pair: &OPair) -> (OPoint, OPoint) {
        let n = self.obj.dim();
        match pair {
            OPair::Points(a, b) => (a.clone(), b.clone()),
            OPair::Random(seed, k) => {
                let mut rng = seeded_rng(*seed);
                if k % 64 == 63 {
                    let a = random_contraction(&mut rng, n);
                    let b = random_contraction(&mut rng, n);
                    (OPoint::Dense(Arc::new(a)), OPoint::Dense(Arc::new(b)))
                } else {
                    let x = Arc::new(random_point(&mut rng, n));
                    let y = Arc::new(random_point(&mut rng, n));
                    if k % 2 == 0 {
                        (OPoint::RankOne(x.clone(), x), OPoint::RankOne(y.clone(), y))
                    } else {
                        (OPoint::RankOne(x, y), OPoint::Zero)
                    }
                }
            }
        }
    }

    /// `(A, B_s)` with `B_s` moved toward `A` so that the input distance is
    /// at most `delta`.
    pub fn feasible_pair(&self, hit: &Hit<OPair>, delta: f64) -> (DMatrix<C64>, DMatrix<C64>) {
        let n = self.obj.dim();
        let (a, b) = self.points(&hit.pair);
        let a = a.matrix(n);
        let b = b.matrix(n);
        let s = segment_factor(hit.eval.inp, delta);
        let bs = &a + (b - &a) * C64::new(s, 0.0);
        (a, bs)
    }

    /// The feasible pair as a certificate witness, kept in factored form
    /// when it is an unmoved `(x (x) x, y (x) y)` pair.
    pub fn feasible_witness(&self, hit: &Hit<OPair>, delta: f64) -> Result<Witness> {
        let n = self.obj.dim();
        let (a, b) = self.points(&hit.pair);
        if segment_factor(hit.eval.inp, delta) == 1.0 {
            if let (Some(x), Some(y)) = (a.square_factor(n), b.square_factor(n)) {
                return Ok(Witness::RankOne {
                    x: HVector::from_dvector(x),
                    y: HVector::from_dvector(y),
                });
            }
        }
        let (a, b) = self.feasible_pair(hit, delta);
        Ok(Witness::Operators {
            a: BOperator::new(a)?,
            b: BOperator::new(b)?,
        })
    }

    fn offer(&self, t: &mut Tracker<OPair>, pair: OPair, method: SearchMethod, as_start: bool) {
        let (a, b) = self.points(&pair);
        let startable = as_start && a.factored() && b.factored();
        let e = self.obj.eval(&a, &b);
        t.offer(&OPair::Points(a, b), e, method, startable);
    }

    fn structured(&self, t: &mut Tracker<OPair>) {
        let n = self.obj.dim();
        let s = SearchMethod::Structured;
        self.offer(t, OPair::Points(OPoint::Identity, OPoint::Zero), s, true);
        for p in 0..n {
            self.offer(t, OPair::Points(OPoint::Unit(p, p), OPoint::Zero), s, true);
            for q in p + 1..n.min(p + 3) {
                self.offer(t, OPair::Points(OPoint::Unit(p, p), OPoint::Unit(q, q)), s, true);
                self.offer(t, OPair::Points(OPoint::Unit(p, q), OPoint::Zero), s, true);
                self.offer(t, OPair::Points(OPoint::Unit(q, p), OPoint::Zero), s, true);
            }
        }
        let nets: Vec<Arc<DVector<C64>>> = net_positions(self.scheme)
            .into_iter()
            .take(START_POOL)
            .map(|i| Arc::new(self.scheme.sequence()[i].coords().clone()))
            .collect();
        for (k, x) in nets.iter().enumerate() {
            let xx = OPoint::RankOne(x.clone(), x.clone());
            self.offer(t, OPair::Points(xx.clone(), OPoint::Zero), s, true);
            for y in &nets[k + 1..] {
                let yy = OPoint::RankOne(y.clone(), y.clone());
                self.offer(t, OPair::Points(xx.clone(), yy), s, true);
            }
        }
    }

    pub fn run(&self, t: &mut Tracker<OPair>, cfg: &RunConfig) {
        let done = |t: &Tracker<OPair>| cfg.stop_when_qualified && !t.qualified.is_empty();
        self.structured(t);
        if done(t) {
            return;
        }
        if cfg.pool {
            for k in 0..START_POOL as u64 {
                let pair = OPair::Random(derive_seed(cfg.seed, TAG_POOL, k), 2 * k);
                self.offer(t, pair, SearchMethod::Sampling, true);
            }
        }
        for k in 0..cfg.budget as u64 {
            let pair = OPair::Random(derive_seed(cfg.seed, TAG_RANDOM, k), k);
            self.offer(t, pair, SearchMethod::Sampling, cfg.random_starts);
        }
        if done(t) {
            return;
        }
        let n = self.obj.dim();
        for k in 0..t.deltas.len() {
            let starts = t.starts[k].clone();
            for (si, start) in starts.iter().enumerate() {
                let OPair::Points(a, b) = &start.pair else { continue };
                let (Some((x1, y1)), Some((x2, y2))) = (a.factors(n), b.factors(n)) else {
                    continue;
                };
                let seed = derive_seed(cfg.seed, TAG_LOCAL, (k * LOCAL_STARTS + si) as u64);
                let (v, e) = self.ascend([x1, y1, x2, y2], t.deltas[k], seed);
                let [x1, y1, x2, y2] = v.map(Arc::new);
                let pair = OPair::Points(OPoint::RankOne(x1, y1), OPoint::RankOne(x2, y2));
                t.offer(&pair, e, SearchMethod::LocalSearch, false);
            }
        }
    }

    /// Perturbation ascent over `A = x1 y1^H`, `B = x2 y2^H`.
    fn ascend(&self, mut v: [DVector<C64>; 4], delta: f64, seed: u64) -> ([DVector<C64>; 4], Eval) {
        let obj = &self.obj;
        let n = obj.dim();
        let mut rng = seeded_rng(seed);
        let all: Vec<&MapImages> = std::iter::once(&obj.input).chain(obj.maps.iter()).collect();
        // images[k][map]: L-side image for x's, R-side image for y's
        let img = |k: usize, x: &DVector<C64>| -> Vec<DVector<C64>> {
            all.iter()
                .map(|mi| if k.is_multiple_of(2) { &mi.l * x } else { &mi.r * x })
                .collect()
        };
        let eval = |im: &[Vec<DVector<C64>>; 4]| -> Eval {
            let value = |j: usize| {
                let terms: [Term; 2] = [
                    (ONE, im[0][j].clone(), im[1][j].clone()),
                    (-ONE, im[2][j].clone(), im[3][j].clone()),
                ];
                obj.l1(None, &terms)
            };
            let (out, member) = (1..all.len()).fold((0.0, 0), |b, j| better(value(j), j - 1, b));
            Eval {
                inp: value(0) + obj.tail,
                out,
                member,
            }
        };
        let mut im: [Vec<DVector<C64>>; 4] = [img(0, &v[0]), img(1, &v[1]), img(2, &v[2]), img(3, &v[3])];
        let mut cur = eval(&im);
        let mut cur_v = scaled(cur.inp, cur.out, delta);
        for it in 0..LOCAL_ITERS {
            let k = rng.random_range(0..4);
            let p = rng.random_range(0..n);
            let eta = gaussian_step(&mut rng, local_step(it));
            let mut w = v[k].clone();
            w[p] += eta;
            let norm = w.norm();
            let shrink = C64::new(if norm > 1.0 { 1.0 / norm } else { 1.0 }, 0.0);
            w *= shrink;
            let mut trial = im.clone();
            trial[k] = im[k]
                .iter()
                .zip(&all)
                .map(|(u, mi)| {
                    let m = if k % 2 == 0 { &mi.l } else { &mi.r };
                    (u + m.column(p) * eta) * shrink
                })
                .collect();
            let e = eval(&trial);
            let val = scaled(e.inp, e.out, delta);
            if val > cur_v {
                cur_v = val;
                cur = e;
                v[k] = w;
                im = trial;
            }
        }
        (v, cur)
    }
}
