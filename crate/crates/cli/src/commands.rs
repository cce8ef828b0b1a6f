use std::f64::consts::PI;

use lattice_bands::fiber::{fiber_spectrum, semi_infinite_floor};
use lattice_bands::measure::measure_report;
use lattice_bands::{
    classify_regime, compute_bands, gaps_in_window, mode_profile, negative_band, new_bands_in_gaps, Branch,
    EdgeKind, EnergyInterval, Estimator, FiberParams, Gap, Lattice, LatticeParams, SpectrumError,
};
use rayon::prelude::*;

use crate::output::{Cell, Report, Table};
use crate::svg::{Diagram, Segment, Tag};

pub type Result<T> = std::result::Result<T, SpectrumError>;

fn invalid(msg: impl Into<String>) -> SpectrumError {
    SpectrumError::InvalidParameter(msg.into())
}

fn edge_name(kind: EdgeKind) -> &'static str {
    match kind {
        EdgeKind::XiPoint => "xi_point",
        EdgeKind::ConditionEdge => "condition_edge",
        EdgeKind::SpectrumBottom => "spectrum_bottom",
    }
}

fn condition_name(branch: Branch) -> &'static str {
    match branch {
        Branch::Plus => "bc_plus",
        Branch::Minus => "bc_minus",
    }
}

/// Window starting just below the negative band, or at `−1` without one.
pub fn default_emin(params: &Lattice) -> Result<f64> {
    Ok(negative_band(&params.unperturbed())?.map_or(-1.0, |nb| nb.lo - (0.1 * nb.lo.abs()).max(1.0)))
}

fn window(emin: f64, emax: f64) -> Result<EnergyInterval<f64>> {
    if !(emin < emax) {
        return Err(invalid(format!("--emin must be below --emax, got {emin} and {emax}")));
    }
    EnergyInterval::new(emin, emax)
}

fn put_params(r: &mut Report, p: &Lattice) {
    r.num("a", p.a());
    r.num("b", p.b());
    r.num("gamma", p.gamma());
    if let Some(gt) = p.gamma_tilde() {
        r.num("gamma_tilde", gt);
    }
}

fn gap_cells(gap: &Gap) -> Vec<Cell> {
    vec![
        gap.interval.lo.into(),
        gap.interval.hi.into(),
        edge_name(gap.left_edge_kind).into(),
        edge_name(gap.right_edge_kind).into(),
    ]
}

pub fn bands(p: &Lattice, emin: Option<f64>, emax: f64) -> Result<Report> {
    let nb = negative_band(p)?;
    let lo = emin.unwrap_or_else(|| nb.map_or(0.0, |n| n.lo));
    let w = window(lo, emax)?;
    let bs = compute_bands(p, w)?;
    let gaps = gaps_in_window(p, w)?;

    let mut rows: Vec<(f64, Vec<Cell>)> = Vec::new();
    let blank = || vec![Cell::Empty, Cell::Empty];
    if let Some(n) = nb.and_then(|n| n.intersect(&w)) {
        rows.push((n.lo, [vec!["band".into(), "negative".into(), n.lo.into(), n.hi.into()], blank()].concat()));
    }
    for b in bs.positive_bands() {
        rows.push((b.lo, [vec!["band".into(), "ac".into(), b.lo.into(), b.hi.into()], blank()].concat()));
    }
    if nb.is_none() && bs.bands.iter().any(|b| b.is_degenerate() && b.lo == 0.0) {
        rows.push((0.0, [vec!["band".into(), "ac".into(), 0.0.into(), 0.0.into()], blank()].concat()));
    }
    for &f in &bs.flat_bands {
        rows.push((f, [vec!["band".into(), "flat".into(), f.into(), f.into()], blank()].concat()));
    }
    rows.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut table = Table::new(&["record", "kind", "lo", "hi", "left_edge", "right_edge"]);
    for (_, r) in rows {
        table.push(r);
    }
    for g in &gaps {
        table.push([vec!["gap".into(), Cell::Empty], gap_cells(g)].concat());
    }
    let mut rep = Report::new("bands", "rows", table);
    put_params(&mut rep, p);
    rep.num("emin", w.lo);
    rep.num("emax", w.hi);
    rep.field("zero_in_spectrum", bs.contains(0.0));
    Ok(rep)
}

pub fn perturbed(p: &Lattice, emin: Option<f64>, emax: f64) -> Result<Report> {
    let w = window(emin.map_or_else(|| default_emin(p), Ok)?, emax)?;
    let report = classify_regime(p, w)?;
    let mut table = Table::new(&[
        "gap_lo",
        "gap_hi",
        "left_edge",
        "right_edge",
        "band_lo",
        "band_hi",
        "condition",
        "touches_lower",
        "touches_upper",
        "closes_gap",
    ]);
    for (gap, nb) in &report.per_gap {
        let band = match nb {
            Some(b) => vec![
                b.interval.lo.into(),
                b.interval.hi.into(),
                condition_name(b.condition).into(),
                b.touches_lower_edge.into(),
                b.touches_upper_edge.into(),
                b.closes_gap().into(),
            ],
            None => vec![Cell::Empty; 6],
        };
        table.push([gap_cells(gap), band].concat());
    }
    let mut rep = Report::new("perturbed", "gaps", table);
    put_params(&mut rep, p);
    rep.num("emin", w.lo);
    rep.num("emax", w.hi);
    rep.field("case", report.case.label());
    rep.field("spectrum_unchanged", report.spectrum_unchanged);
    rep.field("new_band_count", report.per_gap.iter().filter(|(_, b)| b.is_some()).count());
    let closed: Vec<serde_json::Value> = report
        .closed_gaps
        .iter()
        .map(|g| serde_json::json!({ "lo": finite_or_null(g.interval.lo), "hi": finite_or_null(g.interval.hi) }))
        .collect();
    rep.field("closed_gaps", closed);
    Ok(rep)
}

fn finite_or_null(x: f64) -> serde_json::Value {
    serde_json::Number::from_f64(x).map_or(serde_json::Value::Null, serde_json::Value::Number)
}

pub fn theta_values(explicit: &[f64], grid: Option<i64>) -> Result<Vec<f64>> {
    let mut out = explicit.to_vec();
    if let Some(n) = grid {
        if n <= 0 {
            return Err(invalid(format!("--theta2-grid must be positive, got {n}")));
        }
        out.extend(linspace(-PI, PI, n as usize));
    }
    if out.is_empty() {
        return Err(invalid("give --theta2 or --theta2-grid"));
    }
    Ok(out)
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n).map(|i| if i + 1 == n { hi } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 }).collect()
}

pub fn fiber(p: &Lattice, thetas: &[f64], emin: Option<f64>, emax: f64, profile: Option<u32>) -> Result<Report> {
    let fibers = thetas.iter().map(|&t| FiberParams::new(t)).collect::<Result<Vec<_>>>()?;
    let lo = match emin {
        Some(e) => e,
        None => {
            let floor = semi_infinite_floor(p, 0.0)?;
            default_emin(p)?.min(-(floor * floor))
        }
    };
    let w = window(lo, emax)?;
    let spectra = fibers.par_iter().map(|f| fiber_spectrum(p, f, w)).collect::<Result<Vec<_>>>()?;
    let mut table = Table::new(&[
        "record",
        "theta2",
        "tau",
        "lo",
        "hi",
        "energy",
        "branch",
        "lambda_decaying",
        "localization_length",
        "j",
        "value",
    ]);
    let mut eigen_count = 0;
    for spec in &spectra {
        let (t, tau) = (spec.fiber.theta2, spec.fiber.tau);
        for b in &spec.bands {
            let mut row = vec!["band".into(), t.into(), tau.into(), b.lo.into(), b.hi.into()];
            row.extend(vec![Cell::Empty; 6]);
            table.push(row);
        }
        for e in &spec.eigenvalues {
            eigen_count += 1;
            table.push(vec![
                "eigenvalue".into(),
                t.into(),
                tau.into(),
                Cell::Empty,
                Cell::Empty,
                e.energy.into(),
                condition_name(e.branch).into(),
                e.lambda_decaying.into(),
                e.localization_length.into(),
                Cell::Empty,
                Cell::Empty,
            ]);
            if let Some(j_max) = profile {
                for (j, v) in mode_profile(e, j_max).vertex_values {
                    let mut row = vec!["profile".into(), t.into(), tau.into(), Cell::Empty, Cell::Empty];
                    row.extend([e.energy.into(), Cell::Empty, Cell::Empty, Cell::Empty, Cell::Int(j), v.into()]);
                    table.push(row);
                }
            }
        }
    }
    let mut rep = Report::new("fiber", "rows", table);
    put_params(&mut rep, p);
    rep.num("emin", w.lo);
    rep.num("emax", w.hi);
    rep.field("fiber_count", spectra.len());
    rep.field("eigenvalue_count", eigen_count);
    Ok(rep)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Vary {
    #[value(name = "gamma_tilde")]
    GammaTilde,
    A,
}

pub struct SweepArgs {
    pub vary: Vary,
    pub from: f64,
    pub to: f64,
    pub steps: i64,
    pub a: Option<f64>,
    pub b: f64,
    pub gamma: f64,
    pub gamma_tilde: Option<f64>,
    pub emin: Option<f64>,
    pub emax: f64,
}

pub fn sweep(args: &SweepArgs) -> Result<(Report, Diagram)> {
    if args.steps <= 0 {
        return Err(invalid(format!("--steps must be positive, got {}", args.steps)));
    }
    if !(args.from.is_finite() && args.to.is_finite()) {
        return Err(invalid("--from and --to must be finite"));
    }
    let values = linspace(args.from, args.to, args.steps as usize);
    let lattice_at = |v: f64| -> Result<Lattice> {
        let (a, gt) = match args.vary {
            Vary::GammaTilde => (args.a.ok_or_else(|| invalid("--a is required when varying gamma_tilde"))?, Some(v)),
            Vary::A => (v, args.gamma_tilde),
        };
        let p = LatticeParams::new(a, args.b, args.gamma)?;
        gt.map_or(Ok(p), |g| p.with_gamma_tilde(g))
    };
    let lattices = values.iter().map(|&v| lattice_at(v)).collect::<Result<Vec<_>>>()?;
    let emin = match args.emin {
        Some(e) => e,
        None => lattices.iter().map(default_emin).collect::<Result<Vec<_>>>()?.into_iter().fold(-1.0, f64::min),
    };
    let w = window(emin, args.emax)?;
    let columns = lattices
        .par_iter()
        .map(|p| -> Result<Vec<(f64, f64, Tag)>> {
            let bs = compute_bands(p, w)?;
            let mut out: Vec<(f64, f64, Tag)> = bs.bands.iter().map(|b| (b.lo, b.hi, Tag::Original)).collect();
            out.extend(bs.flat_bands.iter().map(|&f| (f, f, Tag::Flat)));
            if let Some(gt) = p.gamma_tilde() {
                if gt != p.gamma() {
                    for nb in new_bands_in_gaps(p, w)? {
                        let tag = if nb.condition == Branch::Plus { Tag::NewPlus } else { Tag::NewMinus };
                        out.push((nb.interval.lo.max(w.lo), nb.interval.hi.min(w.hi), tag));
                    }
                }
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?;

    let name = match args.vary {
        Vary::GammaTilde => "gamma_tilde",
        Vary::A => "a",
    };
    let mut table = Table::new(&["parameter", "value", "lo", "hi", "tag"]);
    let mut segments = Vec::new();
    for (col, (v, segs)) in values.iter().zip(&columns).enumerate() {
        for &(lo, hi, tag) in segs {
            if hi < lo {
                continue;
            }
            table.push(vec![name.into(), (*v).into(), lo.into(), hi.into(), tag.name().into()]);
            segments.push(Segment { column: col, lo, hi, tag });
        }
    }
    let mut rep = Report::new("sweep", "rows", table);
    rep.field("vary", name);
    if let Some(a) = args.a.filter(|_| args.vary == Vary::GammaTilde) {
        rep.num("a", a);
    }
    rep.num("b", args.b);
    rep.num("gamma", args.gamma);
    if let (Vary::A, Some(gt)) = (args.vary, args.gamma_tilde) {
        rep.num("gamma_tilde", gt);
    }
    rep.num("emin", w.lo);
    rep.num("emax", w.hi);
    rep.field("steps", args.steps);
    let label = match args.vary {
        Vary::GammaTilde => "gamma tilde",
        Vary::A => "a",
    };
    let diagram = Diagram { x_label: label.into(), x_values: values, e_min: w.lo, e_max: w.hi, segments };
    Ok((rep, diagram))
}

pub fn measure(p: &Lattice, kmax: f64, samples: usize, est: Estimator) -> Result<serde_json::Value> {
    if !(kmax > 0.0 && kmax.is_finite()) {
        return Err(invalid(format!("--kmax must be positive, got {kmax}")));
    }
    if let Some(gt) = p.gamma_tilde() {
        if gt == p.gamma() {
            return Err(SpectrumError::NoPerturbation);
        }
    }
    let r = measure_report(p, kmax * kmax, samples, est)?;
    let mut obj = serde_json::Map::new();
    obj.insert("command".into(), "measure".into());
    obj.insert("a".into(), finite_or_null(p.a()));
    obj.insert("b".into(), finite_or_null(p.b()));
    obj.insert("gamma".into(), finite_or_null(p.gamma()));
    if let Some(gt) = p.gamma_tilde() {
        obj.insert("gamma_tilde".into(), finite_or_null(gt));
    }
    obj.insert("kmax".into(), finite_or_null(kmax));
    obj.insert("energy_cutoff".into(), finite_or_null(r.energy_cutoff));
    obj.insert("p_sigma".into(), finite_or_null(r.p_sigma));
    obj.insert("p_sigma_bands".into(), finite_or_null(r.p_sigma_bands));
    if let Some(ps) = r.p_s {
        obj.insert("p_S".into(), finite_or_null(ps));
    }
    obj.insert("p1".into(), finite_or_null(r.p1));
    obj.insert("p2".into(), finite_or_null(r.p2));
    obj.insert("xi_k_cutoff".into(), finite_or_null(r.xi_k_cutoff));
    obj.insert("sample_count".into(), r.sample_count.into());
    obj.insert("estimator".into(), serde_json::to_value(r.estimator).unwrap_or(serde_json::Value::Null));
    Ok(serde_json::Value::Object(obj))
}
