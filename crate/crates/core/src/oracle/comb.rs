//! Finite-element model of one fiber of the perturbed lattice.
//!
//! The fiber is a chain of `a`-edges whose vertices each carry a loop of
//! length `b`; the loop end re-enters its vertex with phase `e^{iθ₂}`. Vertex
//! `0` has coupling `γ̃`, all others `γ`. The chain is cut after `N` cells on
//! each side with Dirichlet vertices. Linear elements with a lumped mass give
//! `K − E M` with `M` diagonal; eigenvalues below `E` are counted by the
//! inertia of a banded LDLᴴ factorisation.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Result, SpectrumError};
use crate::types::{FiberParams, LatticeParams};
use crate::unperturbed::GapRecord;

/// Eigenvalues at `h₀`, `h₀/2`, `h₀/4` and their extrapolation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CombRichardson {
    pub h0: f64,
    pub levels: [Vec<f64>; 3],
    /// `O(h⁴)` combination; empty when the levels disagree in count.
    pub extrapolated: Vec<f64>,
}

struct Comb {
    n: usize,
    bw: usize,
    /// Row `i` holds `A[i][i − d]` at index `d`.
    stiff: Vec<Vec<Complex64>>,
    mass: Vec<f64>,
}

struct Builder {
    keys: Vec<(i64, f64, usize)>,
    entries: Vec<(usize, usize, Complex64)>,
    mass: Vec<f64>,
}

impl Builder {
    fn node(&mut self, cell: i64, progress: f64) -> usize {
        let id = self.mass.len();
        self.keys.push((cell, progress, id));
        self.mass.push(0.0);
        id
    }

    /// Element between `p` and `q` (or a Dirichlet end when `None`), with
    /// `q`'s value entering as `phase · u_q`.
    fn element(&mut self, p: usize, q: Option<usize>, h: f64, phase: Complex64) {
        let s = 1.0 / h;
        self.entries.push((p, p, Complex64::new(s, 0.0)));
        self.mass[p] += 0.5 * h;
        if let Some(q) = q {
            self.entries.push((q, q, Complex64::new(s, 0.0)));
            self.mass[q] += 0.5 * h;
            // conj(u_p)·(phase u_q) term of |u_p − phase·u_q|²/h
            self.entries.push((p, q, -phase * s));
        }
    }
}

fn subdivisions(len: f64, h: f64) -> usize {
    (len / h).ceil().max(2.0) as usize
}

fn assemble(params: &LatticeParams<f64>, gamma_tilde: f64, theta: f64, h: f64, n_cells: usize) -> Result<Comb> {
    let (a, b, g) = (params.a(), params.b(), params.gamma());
    let (ma, mb) = (subdivisions(a, h), subdivisions(b, h));
    let (ha, hb) = (a / ma as f64, b / mb as f64);
    let phase = Complex64::from_polar(1.0, theta);
    let one = Complex64::new(1.0, 0.0);
    let n = n_cells as i64;
    let mut bld = Builder { keys: Vec::new(), entries: Vec::new(), mass: Vec::new() };

    let vertices: Vec<usize> = (-n..=n).map(|j| bld.node(j, 0.0)).collect();
    let vertex = |j: i64| (j.abs() <= n).then(|| vertices[(j + n) as usize]);
    for j in -n..=n {
        let v = vertex(j).unwrap();
        let coupling = if j == 0 { gamma_tilde } else { g };
        bld.entries.push((v, v, Complex64::new(coupling, 0.0)));
        // Loop nodes ordered by distance from the vertex, both ends first.
        let inner: Vec<usize> = (1..mb)
            .map(|i| bld.node(j, 2.0 * i.min(mb - i) as f64 / mb as f64 + 1e-9 * i as f64))
            .collect();
        let mut prev = v;
        for &u in &inner {
            bld.element(prev, Some(u), hb, one);
            prev = u;
        }
        bld.element(prev, Some(v), hb, phase);
    }
    // a-edges from vertex j to j + 1, including the two Dirichlet ends.
    for j in -n - 1..=n {
        let inner: Vec<usize> = (1..ma).map(|i| bld.node(j, i as f64 / ma as f64)).collect();
        let mut prev = vertex(j);
        for &u in &inner {
            match prev {
                Some(p) => bld.element(p, Some(u), ha, one),
                None => bld.element(u, None, ha, one),
            }
            prev = Some(u);
        }
        let last = prev.unwrap();
        match vertex(j + 1) {
            Some(v) => bld.element(last, Some(v), ha, one),
            None => bld.element(last, None, ha, one),
        }
    }

    let count = bld.mass.len();
    bld.keys.sort_by(|x, y| x.0.cmp(&y.0).then(x.1.partial_cmp(&y.1).unwrap()));
    let mut order = vec![0usize; count];
    for (pos, &(_, _, id)) in bld.keys.iter().enumerate() {
        order[id] = pos;
    }
    let bw = bld.entries.iter().map(|&(p, q, _)| order[p].abs_diff(order[q])).max().unwrap_or(0);
    let mut stiff = vec![vec![Complex64::new(0.0, 0.0); bw + 1]; count];
    for &(p, q, val) in &bld.entries {
        let (i, j) = (order[p], order[q]);
        if i >= j {
            stiff[i][i - j] += val;
        } else {
            stiff[j][j - i] += val.conj();
        }
    }
    let mut mass = vec![0.0; count];
    for (id, m) in bld.mass.iter().enumerate() {
        mass[order[id]] = *m;
    }
    if mass.iter().any(|&m| !(m > 0.0)) || stiff.iter().any(|r| r[0].im != 0.0) {
        return Err(SpectrumError::Internal("inconsistent comb discretisation".into()));
    }
    Ok(Comb { n: count, bw, stiff, mass })
}

impl Comb {
    /// Number of eigenvalues of `K x = λ M x` below `e`.
    fn count_below(&self, e: f64) -> usize {
        let (n, w) = (self.n, self.bw);
        let mut l = vec![vec![Complex64::new(0.0, 0.0); w + 1]; n];
        let mut d = vec![0.0f64; n];
        let mut negative = 0;
        for i in 0..n {
            let j0 = i.saturating_sub(w);
            for j in j0..i {
                let mut s = self.stiff[i][i - j];
                let k0 = j0.max(j.saturating_sub(w));
                for k in k0..j {
                    s -= l[i][i - k] * l[j][j - k].conj() * d[k];
                }
                l[i][i - j] = s / d[j];
            }
            let mut p = self.stiff[i][0].re - e * self.mass[i];
            for k in j0..i {
                p -= l[i][i - k].norm_sqr() * d[k];
            }
            if p == 0.0 {
                p = -f64::EPSILON * (self.stiff[i][0].re.abs() + e.abs() * self.mass[i]).max(f64::MIN_POSITIVE);
            }
            if p < 0.0 {
                negative += 1;
            }
            d[i] = p;
        }
        negative
    }

    fn eigenvalues_in(&self, lo: f64, hi: f64) -> Vec<f64> {
        let mut out = Vec::new();
        let mut stack = vec![(lo, hi, self.count_below(lo), self.count_below(hi))];
        while let Some((x, y, cx, cy)) = stack.pop() {
            if cy == cx {
                continue;
            }
            let tol = 1e-13 * x.abs().max(y.abs()).max(1.0);
            if y - x <= tol {
                out.extend(std::iter::repeat_n(0.5 * (x + y), cy - cx));
                continue;
            }
            let m = 0.5 * (x + y);
            let cm = self.count_below(m);
            stack.push((x, m, cx, cm));
            stack.push((m, y, cm, cy));
        }
        out.sort_by(|p, q| p.partial_cmp(q).unwrap());
        out
    }
}

/// Gap interval with 1% of its width removed at each finite end, where the
/// discretisation shifts the band edges. The semi-infinite gap starts at
/// `−κ_max²` and loses 1% of `max(1, |E|)` at its top.
fn search_window(gap: &GapRecord<f64>, params: &LatticeParams<f64>) -> Result<(f64, f64)> {
    let hi = gap.interval.hi;
    if gap.is_semi_infinite() {
        let q = crate::fiber::semi_infinite_floor(params, crate::types::signed_momentum_of(hi))?;
        return Ok((-(q * q), hi - 0.01 * hi.abs().max(1.0)));
    }
    let shrink = 0.01 * (hi - gap.interval.lo);
    Ok((gap.interval.lo + shrink, hi - shrink))
}

/// Eigenvalues of the discretised fiber inside `gap` for mesh size `h`.
pub fn oracle_comb_discretization(
    params: &LatticeParams<f64>,
    fiber: &FiberParams<f64>,
    gap: &GapRecord<f64>,
    h: f64,
    n_cells: usize,
) -> Result<Vec<f64>> {
    let gt = params.require_gamma_tilde()?;
    if !(h > 0.0 && h <= params.min_edge() / 50.0 * (1.0 + 1e-12)) {
        return Err(SpectrumError::Precondition(format!("h must be at most min(a, b)/50, got {h}")));
    }
    if n_cells < 20 {
        return Err(SpectrumError::Precondition(format!("N_cells must be at least 20, got {n_cells}")));
    }
    let comb = assemble(params, gt, fiber.theta2, h, n_cells)?;
    let (lo, hi) = search_window(gap, params)?;
    Ok(comb.eigenvalues_in(lo, hi))
}

/// Runs the discretisation at `h₀`, `h₀/2`, `h₀/4` and extrapolates each
/// eigenvalue assuming an `O(h²)` leading error.
pub fn oracle_comb_richardson(
    params: &LatticeParams<f64>,
    fiber: &FiberParams<f64>,
    gap: &GapRecord<f64>,
    h0: f64,
    n_cells: usize,
) -> Result<CombRichardson> {
    let levels = [
        oracle_comb_discretization(params, fiber, gap, h0, n_cells)?,
        oracle_comb_discretization(params, fiber, gap, h0 / 2.0, n_cells)?,
        oracle_comb_discretization(params, fiber, gap, h0 / 4.0, n_cells)?,
    ];
    let extrapolated = if levels[0].len() == levels[1].len() && levels[1].len() == levels[2].len() {
        (0..levels[0].len())
            .map(|i| {
                let r1 = (4.0 * levels[1][i] - levels[0][i]) / 3.0;
                let r2 = (4.0 * levels[2][i] - levels[1][i]) / 3.0;
                (16.0 * r2 - r1) / 15.0
            })
            .collect()
    } else {
        Vec::new()
    };
    Ok(CombRichardson { h0, levels, extrapolated })
}
