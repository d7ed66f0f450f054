//! MAP reconstruction over a Markov random field: an erf-integral
//! likelihood per pixel (with the modulo wrap folded in analytically), an
//! edge-aware absolute-difference prior over the 8-connected grid, and
//! alpha-expansion inference over a max-flow kernel.

pub mod maxflow;

use crate::fastdec::heuristic_fill;
use crate::image::ImagePlane;
use crate::quant::{CodecParams, QuantizedImage};
use crate::real::Real;
use crate::{Error, Result};

/// Cost assigned where the likelihood underflows to zero probability.
pub const DATA_COST_CAP: f64 = 50.0;

/// MRF decoder parameters. None of these are published figures; they were
/// calibrated once against the acceptance suite and frozen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MrfParams<F: Real = f64> {
    /// Quantization-noise scale in intensity units.
    pub sigma: F,
    /// Smoothness weight; scaled by the received-subimage fraction during
    /// progressive decoding.
    pub gamma: F,
    /// Intensity-similarity threshold for the binary edge gate.
    pub t_sim: F,
    /// Logistic slope of the shift-difference compensation weight.
    pub alpha_nu: F,
    /// Maximum number of full expansion sweeps.
    pub max_sweeps: u32,
    /// Dilation of each pixel's candidate label interval, in intensity
    /// units on each side.
    pub label_margin: u16,
}

impl<F: Real> Default for MrfParams<F> {
    fn default() -> Self {
        Self {
            sigma: F::c(5.0),
            gamma: F::c(0.02),
            t_sim: F::c(32.0),
            alpha_nu: F::c(0.25),
            max_sweeps: 4,
            label_margin: 32,
        }
    }
}

impl<F: Real> MrfParams<F> {
    fn validate(&self) -> Result<()> {
        if self.sigma <= F::zero()
            || self.gamma < F::zero()
            || self.t_sim <= F::zero()
            || self.alpha_nu <= F::zero()
            || self.max_sweeps == 0
        {
            return Err(Error::InvalidParams("mrf parameters out of range".into()));
        }
        Ok(())
    }
}

/// Negative log likelihood of observing level `z` under shift `shift` when
/// the true intensity is `x`.
///
/// The wrap variable of the modulo quantizer is eliminated analytically:
/// of the representatives `x + shift + 256k`, the one nearest the center
/// of the observation interval is scored, which is exactly the per-pixel
/// minimum over the binary wrap choice.
pub fn data_cost<F: Real>(x: u8, z: u8, shift: u8, cp: &CodecParams, mp: &MrfParams<F>) -> F {
    let delta = cp.delta() as f64;
    let lz = cp.level_value(z) as f64;
    let center = lz + delta / 2.0;
    let y = x.wrapping_add(shift) as f64;
    let s = if y - center > 128.0 {
        y - 256.0
    } else if center - y > 128.0 {
        y + 256.0
    } else {
        y
    };

    let denom = mp.sigma * F::c(std::f64::consts::SQRT_2);
    let a = (F::c(lz) - F::c(s)) / denom;
    let b = (F::c(lz + delta) - F::c(s)) / denom;
    // erf(b) - erf(a), computed through erfc on whichever side keeps the
    // tails meaningful.
    let diff = if a >= F::zero() {
        a.erfc() - b.erfc()
    } else if b <= F::zero() {
        (-b).erfc() - (-a).erfc()
    } else {
        F::c(2.0) - b.erfc() - (-a).erfc()
    };
    let prob = diff / F::c(2.0 * delta);
    let cap = F::c(DATA_COST_CAP);
    if prob > F::zero() {
        (-prob.ln()).min(cap)
    } else {
        cap
    }
}

#[inline]
fn nu_weight<F: Real>(shift_p: u8, shift_q: u8, mp: &MrfParams<F>) -> F {
    let d = F::c((shift_p as i32 - shift_q as i32).abs() as f64);
    F::one() / (F::one() + (-mp.alpha_nu * d).exp())
}

#[inline]
fn mu_weight<F: Real>(zp: u8, shift_p: u8, zq: u8, shift_q: u8, cp: &CodecParams, mp: &MrfParams<F>) -> F {
    let rp = cp.level_value(zp).wrapping_sub(shift_p);
    let rq = cp.level_value(zq).wrapping_sub(shift_q);
    let d = crate::quant::circular_distance(rp, rq);
    if F::c(d as f64) < mp.t_sim {
        F::one()
    } else {
        F::zero()
    }
}

/// Smoothness weight `lambda * mu * nu` between two 8-neighbors with
/// observed levels `zp`, `zq` and shifts `shift_p`, `shift_q`.
pub fn edge_weight<F: Real>(
    p: (usize, usize),
    q: (usize, usize),
    zp: u8,
    shift_p: u8,
    zq: u8,
    shift_q: u8,
    cp: &CodecParams,
    mp: &MrfParams<F>,
) -> Result<F> {
    let dr = p.0 as i64 - q.0 as i64;
    let dc = p.1 as i64 - q.1 as i64;
    if dr == 0 && dc == 0 || dr.abs() > 1 || dc.abs() > 1 {
        return Err(Error::InvalidParams("edge endpoints are not 8-neighbors".into()));
    }
    let lambda = if dr != 0 && dc != 0 {
        F::c(std::f64::consts::FRAC_1_SQRT_2)
    } else {
        F::one()
    };
    Ok(lambda * mu_weight(zp, shift_p, zq, shift_q, cp, mp) * nu_weight(shift_p, shift_q, mp))
}

/// One pairwise clique edge; `w` already includes the gamma scaling.
#[derive(Debug, Clone, Copy)]
pub struct PairEdge<F> {
    pub p: u32,
    pub q: u32,
    pub w: F,
}

/// Energy over labelings: a data term per pixel plus scaled-absolute-
/// difference pairwise terms. Implementations may restrict each pixel's
/// candidate labels; alpha-expansion leaves a pixel untouched for labels
/// outside its candidate set.
pub trait EnergyModel<F: Real> {
    fn pixel_count(&self) -> usize;
    fn data_cost_at(&self, p: usize, x: u8) -> F;
    fn is_candidate(&self, p: usize, x: u8) -> bool;
    fn edges(&self) -> &[PairEdge<F>];
}

/// Total energy `sum(data) + sum(w * |x_p - x_q|)` (weights carry gamma).
pub fn total_energy<F: Real>(labels: &[u8], model: &impl EnergyModel<F>) -> F {
    assert_eq!(labels.len(), model.pixel_count());
    let mut e = F::zero();
    for (p, &x) in labels.iter().enumerate() {
        e = e + model.data_cost_at(p, x);
    }
    for edge in model.edges() {
        let d = (labels[edge.p as usize] as i32 - labels[edge.q as usize] as i32).abs();
        e = e + edge.w * F::c(d as f64);
    }
    e
}

/// The image-derived MRF: a shared data-cost table over (level, pattern
/// position, label), per-pixel presence and candidate intervals, and the
/// 8-connected edge list. Absent pixels (progressive decoding) carry zero
/// data cost, admit every label, and keep their smoothness edges with the
/// similarity gate held open.
pub struct MrfModel<F: Real> {
    width: usize,
    height: usize,
    data_table: Vec<F>,
    zt: Vec<u32>,
    present: Vec<bool>,
    cand_lo: Vec<u8>,
    cand_w: Vec<u16>,
    edges: Vec<PairEdge<F>>,
}

impl<F: Real> MrfModel<F> {
    pub fn build(q: &QuantizedImage, mp: &MrfParams<F>, received: usize) -> Result<Self> {
        mp.validate()?;
        let cp = q.params().clone();
        let nn = cp.subimage_count();
        if received == 0 || received > nn {
            return Err(Error::InvalidParams(format!("received count {received} not in 1..={nn}")));
        }
        let (w, h) = (q.width(), q.height());
        let n = cp.n();
        let gamma_eff = mp.gamma * F::c(received as f64 / nn as f64);

        let lc = cp.level_count();
        let mut data_table = vec![F::zero(); lc * nn * 256];
        for z in 0..lc as u8 {
            for t in 0..nn {
                let shift = cp.shifts()[t];
                let base = (z as usize * nn + t) * 256;
                for x in 0..=255u8 {
                    data_table[base + x as usize] = data_cost(x, z, shift, &cp, mp);
                }
            }
        }

        let count = w * h;
        let mut zt = vec![0u32; count];
        let mut present = vec![false; count];
        let mut cand_lo = vec![0u8; count];
        let mut cand_w = vec![256u16; count];
        let margin = mp.label_margin as u16;
        for r in 0..h {
            for c in 0..w {
                let i = r * w + c;
                let t = crate::quant::pattern_index(r, c, n);
                let z = q.level(r, c);
                zt[i] = (z as usize * nn + t) as u32;
                present[i] = q.present(r, c);
                if present[i] {
                    let own = crate::quant::uncertainty_of(z, cp.shifts()[t], &cp);
                    let width = (own.width + 2 * margin).min(256);
                    cand_lo[i] = own.lo.wrapping_sub(margin as u8);
                    cand_w[i] = width;
                }
            }
        }

        let mut edges = Vec::with_capacity(4 * count);
        let diag = F::c(std::f64::consts::FRAC_1_SQRT_2);
        for r in 0..h {
            for c in 0..w {
                let i = r * w + c;
                // E, S, SE, SW cover every unordered 8-neighbor pair once.
                let neigh: [(isize, isize, bool); 4] =
                    [(0, 1, false), (1, 0, false), (1, 1, true), (1, -1, true)];
                for (dr, dc, diagonal) in neigh {
                    let (rr, cc) = (r as isize + dr, c as isize + dc);
                    if rr < 0 || cc < 0 || rr >= h as isize || cc >= w as isize {
                        continue;
                    }
                    let (rr, cc) = (rr as usize, cc as usize);
                    let j = rr * w + cc;
                    let lambda = if diagonal { diag } else { F::one() };
                    let mu = if present[i] && present[j] {
                        mu_weight(
                            q.level(r, c),
                            cp.shift_at(r, c),
                            q.level(rr, cc),
                            cp.shift_at(rr, cc),
                            &cp,
                            mp,
                        )
                    } else {
                        F::one()
                    };
                    let nu = nu_weight(cp.shift_at(r, c), cp.shift_at(rr, cc), mp);
                    let weight = gamma_eff * lambda * mu * nu;
                    if weight > F::zero() {
                        edges.push(PairEdge { p: i as u32, q: j as u32, w: weight });
                    }
                }
            }
        }

        Ok(Self { width: w, height: h, data_table, zt, present, cand_lo, cand_w, edges })
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }
}

impl<F: Real> EnergyModel<F> for MrfModel<F> {
    fn pixel_count(&self) -> usize {
        self.width * self.height
    }

    #[inline]
    fn data_cost_at(&self, p: usize, x: u8) -> F {
        if self.present[p] {
            self.data_table[self.zt[p] as usize * 256 + x as usize]
        } else {
            F::zero()
        }
    }

    #[inline]
    fn is_candidate(&self, p: usize, x: u8) -> bool {
        (x.wrapping_sub(self.cand_lo[p]) as u16) < self.cand_w[p]
    }

    fn edges(&self) -> &[PairEdge<F>] {
        &self.edges
    }
}

/// Direct per-pixel cost model, used by the oracle tests to exercise the
/// optimizer on instances small enough for exhaustive comparison.
pub struct DenseModel<F: Real> {
    /// Cost of each label for each pixel, stride 256.
    pub costs: Vec<F>,
    /// Allowed labels (the sweep palette).
    pub palette: Vec<u8>,
    pub edges: Vec<PairEdge<F>>,
}

impl<F: Real> EnergyModel<F> for DenseModel<F> {
    fn pixel_count(&self) -> usize {
        self.costs.len() / 256
    }

    fn data_cost_at(&self, p: usize, x: u8) -> F {
        self.costs[p * 256 + x as usize]
    }

    fn is_candidate(&self, _p: usize, x: u8) -> bool {
        self.palette.contains(&x)
    }

    fn edges(&self) -> &[PairEdge<F>] {
        &self.edges
    }
}

/// Reusable alpha-expansion machinery over one model: owns the adjacency
/// index and the per-move scratch buffers.
pub struct Expander<'a, F: Real, M: EnergyModel<F>> {
    model: &'a M,
    adj_start: Vec<u32>,
    adj: Vec<u32>,
    node_of: Vec<u32>,
    in_part: Vec<u32>,
    flipped: Vec<u32>,
    stamp: u32,
    part: Vec<u32>,
    theta0: Vec<F>,
    theta1: Vec<F>,
    arcs: Vec<maxflow::Arc<F>>,
}

#[inline]
fn absdiff<F: Real>(a: u8, b: u8) -> F {
    F::c((a as i32 - b as i32).abs() as f64)
}

impl<'a, F: Real, M: EnergyModel<F>> Expander<'a, F, M> {
    pub fn new(model: &'a M) -> Self {
        let n = model.pixel_count();
        let edges = model.edges();
        let mut deg = vec![0u32; n];
        for e in edges {
            deg[e.p as usize] += 1;
            deg[e.q as usize] += 1;
        }
        let mut adj_start = vec![0u32; n + 1];
        for i in 0..n {
            adj_start[i + 1] = adj_start[i] + deg[i];
        }
        let mut adj = vec![0u32; adj_start[n] as usize];
        let mut fill = adj_start.clone();
        for (idx, e) in edges.iter().enumerate() {
            adj[fill[e.p as usize] as usize] = idx as u32;
            fill[e.p as usize] += 1;
            adj[fill[e.q as usize] as usize] = idx as u32;
            fill[e.q as usize] += 1;
        }
        Self {
            model,
            adj_start,
            adj,
            node_of: vec![0; n],
            in_part: vec![0; n],
            flipped: vec![0; n],
            stamp: 0,
            part: Vec::new(),
            theta0: Vec::new(),
            theta1: Vec::new(),
            arcs: Vec::new(),
        }
    }

    /// One expansion move toward `alpha`: solves the binary min-cut over
    /// the pixels allowed to switch and applies the move if it strictly
    /// decreases the energy. Returns the applied energy change (zero when
    /// the move was rejected or empty).
    pub fn move_toward(&mut self, labels: &mut [u8], alpha: u8) -> F {
        let model = self.model;
        let edges = model.edges();
        let n = model.pixel_count();
        self.stamp += 1;
        let stamp = self.stamp;
        self.part.clear();
        for p in 0..n {
            if labels[p] != alpha && model.is_candidate(p, alpha) {
                self.node_of[p] = self.part.len() as u32;
                self.in_part[p] = stamp;
                self.part.push(p as u32);
            }
        }
        if self.part.is_empty() {
            return F::zero();
        }

        self.theta0.clear();
        self.theta1.clear();
        for &p in &self.part {
            self.theta0.push(model.data_cost_at(p as usize, labels[p as usize]));
            self.theta1.push(model.data_cost_at(p as usize, alpha));
        }

        self.arcs.clear();
        for e in edges {
            let (p, q, w) = (e.p as usize, e.q as usize, e.w);
            let p_in = self.in_part[p] == stamp;
            let q_in = self.in_part[q] == stamp;
            if !p_in && !q_in {
                continue;
            }
            let (xp, xq) = (labels[p], labels[q]);
            if p_in && q_in {
                let a = w * absdiff(xp, xq);
                let b = w * absdiff(xp, alpha);
                let c = w * absdiff(alpha, xq);
                let (np, nq) = (self.node_of[p] as usize, self.node_of[q] as usize);
                self.theta1[np] = self.theta1[np] + c - a;
                self.theta1[nq] = self.theta1[nq] - c;
                let cap = b + c - a; // >= 0: |.| is a metric
                if cap > F::zero() {
                    self.arcs.push((np as u32, nq as u32, cap, F::zero()));
                }
            } else if p_in {
                let np = self.node_of[p] as usize;
                self.theta0[np] = self.theta0[np] + w * absdiff(xp, xq);
                self.theta1[np] = self.theta1[np] + w * absdiff::<F>(alpha, xq);
            } else {
                let nq = self.node_of[q] as usize;
                self.theta0[nq] = self.theta0[nq] + w * absdiff(xp, xq);
                self.theta1[nq] = self.theta1[nq] + w * absdiff::<F>(xp, alpha);
            }
        }

        let s = self.part.len() as u32;
        let t = s + 1;
        for i in 0..self.part.len() {
            let m = self.theta0[i].min(self.theta1[i]);
            let keep = self.theta0[i] - m;
            let switch = self.theta1[i] - m;
            if switch > F::zero() {
                self.arcs.push((s, i as u32, switch, F::zero()));
            }
            if keep > F::zero() {
                self.arcs.push((i as u32, t, keep, F::zero()));
            }
        }

        let (_, side) = maxflow::max_flow(self.part.len() + 2, &self.arcs, s, t);

        // Sink-side nodes take alpha; compute the exact energy delta.
        self.stamp += 1;
        let fstamp = self.stamp;
        let mut any = false;
        for (i, &p) in self.part.iter().enumerate() {
            if !side[i] {
                self.flipped[p as usize] = fstamp;
                any = true;
            }
        }
        if !any {
            return F::zero();
        }
        let mut delta = F::zero();
        for &p in &self.part {
            let p = p as usize;
            if self.flipped[p] != fstamp {
                continue;
            }
            delta = delta + model.data_cost_at(p, alpha) - model.data_cost_at(p, labels[p]);
            for ai in self.adj_start[p]..self.adj_start[p + 1] {
                let e = &edges[self.adj[ai as usize] as usize];
                let other = if e.p as usize == p { e.q as usize } else { e.p as usize };
                if self.flipped[other] == fstamp && other < p {
                    continue; // both flipped: count once
                }
                let new_other = if self.flipped[other] == fstamp { alpha } else { labels[other] };
                delta = delta
                    + e.w * (absdiff::<F>(alpha, new_other) - absdiff::<F>(labels[p], labels[other]));
            }
        }
        debug_assert!(
            delta <= F::c(1e-6),
            "expansion move must not increase energy: delta = {delta:?}"
        );
        if delta < -F::c(1e-9) {
            for &p in &self.part {
                if self.flipped[p as usize] == fstamp {
                    labels[p as usize] = alpha;
                }
            }
            delta
        } else {
            F::zero()
        }
    }
}

/// Alpha-expansion: sweeps over labels, solving one binary min-cut per
/// label; a pixel participates only where the label is in its candidate
/// set. A move is applied only if it strictly decreases the energy, so the
/// energy is non-increasing, and iteration stops after `max_sweeps` sweeps
/// or a sweep with no accepted move.
pub fn alpha_expansion<F: Real>(
    init: &[u8],
    model: &impl EnergyModel<F>,
    max_sweeps: u32,
) -> Vec<u8> {
    let n = model.pixel_count();
    assert_eq!(init.len(), n);
    let mut labels = init.to_vec();
    let mut expander = Expander::new(model);
    for _ in 0..max_sweeps {
        let mut moved = false;
        for alpha in 0..=255u8 {
            if expander.move_toward(&mut labels, alpha) < F::zero() {
                moved = true;
            }
        }
        if !moved {
            break;
        }
    }
    labels
}

/// MAP decode: build the model from the (possibly partial) level image,
/// initialize from the heuristic-plus-bilinear reconstruction, and run
/// alpha-expansion. `received` scales the smoothness weight during
/// progressive decoding.
pub fn mrf_decode<F: Real>(
    q: &QuantizedImage,
    mp: &MrfParams<F>,
    received: usize,
) -> Result<ImagePlane> {
    let init = heuristic_fill(q)?;
    let model = MrfModel::build(q, mp, received)?;
    let labels = alpha_expansion(init.samples(), &model, mp.max_sweeps);
    ImagePlane::new(q.width() as u16, q.height() as u16, labels)
}
