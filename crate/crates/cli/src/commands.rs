//! One function per command. Each returns its checks, measurements and the
//! artifact contents it can produce; [`run`] writes the requested ones.

use std::time::Instant;

use critlab::brownian::{sample_loop_soup, TimeCutoff};
use critlab::cle::{boundaries_of, central_charge, ChargeFormula, Region};
use critlab::gff::{covariance_deviation, driving_diagnostic, green_matrix, level_line_explore, sample_many, GffDomain, LevelLineDomain, MarkovSplit};
use critlab::lattice::{count_bond_clusters, Graph, LatticeDomain, LatticeKind, Shape};
use critlab::loop_models::{enumerate_saw, estimate_connective_constant, exact_on_partition, nienhuis_theta_c, OnChain};
use critlab::percolation::{cluster_loops, estimate_crossing, half_plane_crossing, rhombus_crossing, sample_site_percolation};
use critlab::rng::replicate;
use critlab::sle::{cardy_g, compute_trace, sample_driving, trace_dimension};
use critlab::spin_fk::{
    correlation_identity_check, es_spin_marginal, fk_cluster_count, hamiltonian, p_to_beta, potts_exact, sample_fk, sample_ust_wilson,
    spanning_trees, SwChain, DEFAULT_MAX_STATES,
};
use critlab::stats::{batch_means, chi_square_gof, total_variation, Welford};
use critlab::{Point, RngStream};

use crate::checks;
use crate::config::{Format, RunConfig};
use crate::emit::{csv_string, pgm_string, svg_string, write_file, Figure};
use crate::report::{Check, Measurement, RunReport, Threshold};
use crate::CliError;

/// What a command computed; artifacts are rendered lazily by [`run`].
#[derive(Debug, Default)]
pub struct Output {
    pub checks: Vec<Check>,
    pub measurements: Vec<Measurement>,
    pub csv: Option<(Vec<String>, Vec<Vec<String>>)>,
    /// Extra `#` lines appended after the CSV table.
    pub csv_footer: Vec<String>,
    pub figures: Vec<Figure>,
    pub field: Option<(usize, usize, Vec<f64>)>,
}

impl Output {
    fn table(&mut self, header: &[&str], rows: Vec<Vec<String>>) {
        self.csv = Some((header.iter().map(|s| s.to_string()).collect(), rows));
    }
}

/// Runs the command, writes its artifacts and returns the report; the
/// report passes iff every check passes.
pub fn run(config: &RunConfig) -> Result<RunReport, CliError> {
    let start = Instant::now();
    let out = compute(config)?;
    let mut report = RunReport::new(config.clone(), out.checks.clone(), out.measurements.clone());
    let paths = config.artifact_paths();
    report.artifacts = paths.values().cloned().collect();
    let stamp = config.stamp();
    for (&f, path) in &paths {
        let text = match f {
            Format::Json => report.artifact_json(),
            Format::Csv => {
                let (header, rows) = out.csv.as_ref().ok_or_else(|| CliError::Usage(format!("{} produced no table", config.command)))?;
                let header: Vec<&str> = header.iter().map(String::as_str).collect();
                let mut s = csv_string(&stamp, &header, rows);
                for line in &out.csv_footer {
                    s.push_str(&format!("# {line}\n"));
                }
                s
            }
            Format::Svg => {
                if out.figures.is_empty() {
                    return Err(CliError::Usage(format!("{} produced no geometry for SVG", config.command)));
                }
                svg_string(&out.figures, &stamp)?
            }
            Format::Pgm => {
                let (w, h, v) = out.field.as_ref().ok_or_else(|| CliError::Usage(format!("{} produced no field", config.command)))?;
                pgm_string(*w, *h, v, &stamp)?
            }
        };
        write_file(path, &text)?;
    }
    report.wall_clock_s = Some(start.elapsed().as_secs_f64());
    Ok(report)
}

fn compute(cfg: &RunConfig) -> Result<Output, CliError> {
    match cfg.command.as_str() {
        "perco" => perco(cfg),
        "spin" => spin(cfg),
        "fk" => fk(cfg),
        "ust" => ust(cfg),
        "onmodel" => onmodel(cfg),
        "saw" => saw(cfg),
        "loopsoup" => loopsoup(cfg),
        "cle" => cle(cfg),
        "sle" => sle(cfg),
        "cardy" => cardy(cfg),
        "gff" => gff(cfg),
        "verify" => verify(cfg),
        other => Err(CliError::Usage(format!("unknown command {other:?}"))),
    }
}

fn stream(cfg: &RunConfig, k: u64) -> RngStream {
    RngStream::new(cfg.seed, k)
}

fn grid_point(v: usize, w: usize) -> Point {
    Point::new((v % w) as f64, (v / w) as f64)
}

fn edge_figures(g: &Graph, open: &[bool], w: usize) -> Vec<Figure> {
    g.edges()
        .iter()
        .zip(open)
        .filter(|(_, &o)| o)
        .map(|(&(a, b), _)| Figure::open(vec![grid_point(a, w), grid_point(b, w)]))
        .collect()
}

fn critical_or(cfg: &RunConfig, key: &str, critical: impl FnOnce() -> Result<f64, CliError>) -> Result<f64, CliError> {
    if cfg.param(key)? == "critical" {
        critical()
    } else {
        cfg.f64(key)
    }
}

fn perco(cfg: &RunConfig) -> Result<Output, CliError> {
    let p = cfg.f64("p")?;
    let geometry = cfg.param("geometry")?;
    let (d, ev) = match geometry {
        "halfplane" => half_plane_crossing(cfg.f64("mesh")?)?,
        "rhombus" => rhombus_crossing(cfg.usize("n")?)?,
        other => return Err(CliError::Usage(format!("geometry must be halfplane or rhombus, not {other:?}"))),
    };
    let e = estimate_crossing(&d, p, &ev, cfg.samples(), stream(cfg, 0))?;
    let mut o = Output::default();
    o.measurements.push(Measurement::estimate("crossing probability", &e));
    o.measurements.push(Measurement::new("sites", d.len() as f64));
    if p == 0.5 {
        // both geometries cross with probability exactly 1/2 at p = 1/2
        o.checks.push(Check::z_within("crossing, |z| vs 1/2", &e, 0.5, 3.0));
    }
    o.table(
        &["geometry", "mesh", "p", "samples", "crossing", "std_error"],
        vec![vec![geometry.into(), d.mesh().to_string(), p.to_string(), cfg.samples().to_string(), e.mean.to_string(), e.std_error.to_string()]],
    );
    let open = sample_site_percolation(&d, p, &mut stream(cfg, 1).rng())?.open;
    o.figures = cluster_loops(&d, &open)?.iter().map(|l| Figure::closed(l.path(d.mesh()).vertices().to_vec())).collect();
    Ok(o)
}

fn spin(cfg: &RunConfig) -> Result<Output, CliError> {
    let n = cfg.usize("n")?;
    let q: u32 = cfg.usize("q")? as u32;
    if n < 2 || q < 2 {
        return Err(CliError::Usage("spin needs n >= 2 and q >= 2".into()));
    }
    let beta = critical_or(cfg, "beta", || Ok((1.0 + (q as f64).sqrt()).ln()))?;
    let g = Graph::grid(n, n);
    let mut rng = stream(cfg, 0).rng();
    let mut chain = SwChain::new(&g, q, beta, vec![None; n * n], &mut rng)?;
    let sweeps = cfg.samples() as usize;
    for _ in 0..sweeps / 10 {
        chain.step(&mut rng);
    }
    let row = (n / 2) * n;
    let mut same = vec![Welford::new(); n];
    let mut energy = Vec::with_capacity(sweeps);
    for _ in 0..sweeps {
        chain.step(&mut rng);
        let s = chain.spins();
        energy.push(hamiltonian(&g, s) as f64);
        for (r, w) in same.iter_mut().enumerate() {
            w.push((s[row] == s[row + r]) as u8 as f64);
        }
    }
    let mut o = Output::default();
    let batches = (sweeps / 50).clamp(2, 50);
    let e = batch_means(&energy, batches)?;
    o.measurements.push(Measurement::estimate("mean number of disagreeing edges", &e));
    o.measurements.push(Measurement::new("beta", beta));
    if (q as f64).powi((n * n) as i32) <= (1u64 << 20) as f64 {
        let pi = potts_exact(&g, q, beta, &vec![None; n * n], DEFAULT_MAX_STATES)?;
        let exact: f64 = pi.probs.iter().enumerate().map(|(k, p)| p * hamiltonian(&g, &critlab::spin_fk::decode_spins(k, n * n, q)) as f64).sum();
        // batch means understate the error of short correlated series, hence 4
        o.checks.push(Check::z_within("mean energy vs exact enumeration, |z|", &e, exact, 4.0));
    }
    o.table(
        &["r", "P_same", "std_error"],
        same.iter().enumerate().map(|(r, w)| vec![r.to_string(), w.mean().to_string(), w.estimate().std_error.to_string()]).collect(),
    );
    o.field = Some((n, n, chain.spins().iter().map(|&s| s as f64).collect()));
    Ok(o)
}

fn fk(cfg: &RunConfig) -> Result<Output, CliError> {
    let n = cfg.usize("n")?;
    let p = cfg.f64("p")?;
    let q = cfg.usize("q")? as u32;
    if n < 2 || q < 1 {
        return Err(CliError::Usage("fk needs n >= 2 and q >= 1".into()));
    }
    let g = Graph::grid(n, n);
    let mut o = Output::default();
    if g.edge_count() <= 12 {
        let es = es_spin_marginal(&g, p, q, DEFAULT_MAX_STATES)?;
        let potts = potts_exact(&g, q, p_to_beta(p), &vec![None; n * n], DEFAULT_MAX_STATES)?;
        let dev = es.iter().zip(&potts.probs).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        o.checks.push(Check::new("max |Edwards-Sokal marginal - Boltzmann|", dev, Threshold::AtMost(1e-12)));
        let c = correlation_identity_check(&g, p, q, 0, n * n - 1)?;
        o.checks.push(Check::new("corner-to-corner correlation identity", c.difference(), Threshold::AtMost(1e-12)));
    }
    let samples = replicate(stream(cfg, 0), cfg.samples(), |_, rng| sample_fk(&g, p, q, &[], 20, rng));
    let samples = samples.into_iter().collect::<critlab::Result<Vec<_>>>()?;
    let (mut open, mut clusters) = (Welford::new(), Welford::new());
    let mut rows = Vec::new();
    for (k, s) in samples.iter().enumerate() {
        let c = fk_cluster_count(&g, &s.open, &[]);
        open.push(s.open_count() as f64 / g.edge_count() as f64);
        clusters.push(c as f64);
        rows.push(vec![k.to_string(), s.open_count().to_string(), c.to_string()]);
    }
    o.measurements.push(Measurement::estimate("open edge fraction", &open.estimate()));
    o.measurements.push(Measurement::estimate("clusters", &clusters.estimate()));
    o.table(&["sample", "open_edges", "clusters"], rows);
    if let Some(last) = samples.last() {
        o.figures = edge_figures(&g, &last.open, n);
    }
    Ok(o)
}

fn ust(cfg: &RunConfig) -> Result<Output, CliError> {
    let n = cfg.usize("n")?;
    if n < 2 {
        return Err(CliError::Usage("ust needs n >= 2".into()));
    }
    let g = Graph::grid(n, n);
    let trees = replicate(stream(cfg, 0), cfg.samples(), |_, rng| sample_ust_wilson(&g, rng));
    let trees = trees.into_iter().collect::<critlab::Result<Vec<_>>>()?;
    let mut o = Output::default();
    let valid = trees.iter().all(|t| t.iter().filter(|&&e| e).count() == n * n - 1 && count_bond_clusters(&g, t) == 1);
    o.checks.push(Check::flag("every sample is a spanning tree", valid));
    if g.edge_count() <= 16 {
        let all = spanning_trees(&g);
        let mut counts = vec![0u64; all.len()];
        for t in &trees {
            if let Some(k) = all.iter().position(|x| x == t) {
                counts[k] += 1;
            }
        }
        let test = chi_square_gof(&counts, &vec![1.0 / all.len() as f64; all.len()])?;
        o.checks.push(Check::new("uniform over spanning trees: chi-square p", test.p_value, Threshold::AtLeast(0.001)));
        o.measurements.push(Measurement::new("spanning trees", all.len() as f64));
        o.table(&["tree", "count"], counts.iter().enumerate().map(|(k, c)| vec![k.to_string(), c.to_string()]).collect());
    } else {
        let mut hist = vec![0u64; 5];
        for t in &trees {
            for v in 0..g.vertex_count() {
                let deg = g.incident(v).iter().filter(|&&(_, e)| t[e]).count();
                hist[deg.min(4)] += 1;
            }
        }
        o.table(&["degree", "count"], hist.iter().enumerate().map(|(d, c)| vec![d.to_string(), c.to_string()]).collect());
    }
    if let Some(t) = trees.first() {
        o.figures = edge_figures(&g, t, n);
    }
    Ok(o)
}

fn onmodel(cfg: &RunConfig) -> Result<Output, CliError> {
    let n = cfg.f64("n")?;
    let theta = critical_or(cfg, "theta", || Ok(nienhuis_theta_c(n)?))?;
    let size = cfg.usize("size")?;
    if size == 0 {
        return Err(CliError::Usage("size must be positive".into()));
    }
    let cells: Vec<(i64, i64)> = (0..size as i64).flat_map(|j| (0..size as i64).map(move |i| (i, j))).collect();
    let d = LatticeDomain::honeycomb_patch(&cells, 1.0)?;
    let g = d.graph();
    let mut chain = OnChain::new(&d, n, theta)?;
    let mut rng = stream(cfg, 0).rng();
    let exact = if g.edge_count() <= 30 { Some(exact_on_partition(g, n, theta, 30)?) } else { None };
    let mut visits = exact.as_ref().map(|ex| vec![0.0; ex.configs.len()]);
    let mut lengths = vec![0u64; g.edge_count() + 1];
    let (mut loops, mut last_drawn) = (Welford::new(), None);
    for _ in 0..cfg.samples() {
        chain.sweep(&mut rng);
        let c = chain.config();
        lengths[c.total_length()] += 1;
        loops.push(c.loop_count(g) as f64);
        if let (Some(ex), Some(v)) = (&exact, visits.as_mut()) {
            let k = ex.configs.iter().position(|(x, _)| x == c).ok_or_else(|| CliError::Failed("chain left the configuration space".into()))?;
            v[k] += 1.0;
        }
        if c.total_length() > 0 {
            last_drawn = Some(c.clone());
        }
    }
    let mut o = Output::default();
    o.measurements.push(Measurement::new("theta", theta));
    o.measurements.push(Measurement::estimate("loops per configuration", &loops.estimate()));
    if let (Some(ex), Some(v)) = (&exact, &visits) {
        let probs: Vec<f64> = ex.configs.iter().map(|(_, w)| w / ex.partition).collect();
        o.checks.push(Check::new("TV of visited configurations vs exact", total_variation(v, &probs), Threshold::AtMost(0.02)));
    }
    o.table(&["total_length", "sweeps"], lengths.iter().enumerate().filter(|(_, &c)| c > 0).map(|(l, c)| vec![l.to_string(), c.to_string()]).collect());
    if let Some(c) = last_drawn {
        o.figures = c.loops(g).iter().map(|l| Figure::closed(l.iter().map(|&v| d.position(v)).collect())).collect();
    }
    Ok(o)
}

fn saw(cfg: &RunConfig) -> Result<Output, CliError> {
    let kind = match cfg.param("lattice")? {
        "hex" | "hexagonal" => LatticeKind::Hexagonal,
        "square" => LatticeKind::Square,
        other => return Err(CliError::Usage(format!("lattice must be hex or square, not {other:?}"))),
    };
    let table = enumerate_saw(kind, cfg.usize("nmax")?)?;
    let mut o = Output::default();
    let violations = table.submultiplicativity_violations();
    o.checks.push(Check::new("submultiplicativity violations", violations.len() as f64, Threshold::AtMost(0.0)));
    if let Ok(est) = estimate_connective_constant(&table) {
        o.measurements.push(Measurement::new("bracket lower", est.bracket.0));
        o.measurements.push(Measurement::new("bracket upper", est.bracket.1));
        o.measurements.push(Measurement::new("A_N / A_(N-1)", est.ratio));
        if kind == LatticeKind::Hexagonal {
            let target = (2.0 + 2f64.sqrt()).sqrt();
            o.checks.push(Check::flag("bracket contains sqrt(2 + sqrt 2)", est.bracket.0 <= target && target <= est.bracket.1));
        }
    }
    let rows = (1..table.walks.len()).map(|n| vec![n.to_string(), table.walks[n].to_string(), table.polygons[n].to_string()]).collect();
    o.table(&["N", "A_N", "A_prime_N_unrooted_unoriented"], rows);
    o.csv_footer = o.checks.iter().map(|c| format!("check,{},{},{}", c.name, c.value, if c.pass { "pass" } else { "fail" })).collect();
    Ok(o)
}

fn soup_cutoff(cfg: &RunConfig) -> Result<(TimeCutoff, usize), CliError> {
    Ok((TimeCutoff::new(cfg.f64("tmin")?, cfg.f64("tmax")?)?, cfg.usize("steps")?))
}

fn loop_figures(loops: &[critlab::brownian::PlanarPath]) -> Vec<Figure> {
    loops
        .iter()
        .map(|l| {
            let mut pts = l.points().to_vec();
            pts.pop();
            Figure::closed(pts)
        })
        .collect()
}

fn loopsoup(cfg: &RunConfig) -> Result<Output, CliError> {
    let c = cfg.f64("c")?;
    let (cutoff, steps) = soup_cutoff(cfg)?;
    let d = Shape::unit_square();
    let soups = replicate(stream(cfg, 0), cfg.samples(), |_, rng| sample_loop_soup(&d, c, cutoff, steps, rng));
    let soups = soups.into_iter().collect::<critlab::Result<Vec<_>>>()?;
    let mut w = Welford::new();
    soups.iter().for_each(|s| w.push(s.count() as f64));
    let mut o = Output::default();
    o.measurements.push(Measurement::estimate("loops per soup", &w.estimate()));
    if w.mean() > 0.0 {
        o.measurements.push(Measurement::new("variance / mean of the count", w.variance() / w.mean()));
    }
    o.table(&["replica", "loops"], soups.iter().enumerate().map(|(k, s)| vec![k.to_string(), s.count().to_string()]).collect());
    if let Some(s) = soups.iter().find(|s| s.count() > 0) {
        o.figures = loop_figures(&s.loops);
    }
    Ok(o)
}

fn cle(cfg: &RunConfig) -> Result<Output, CliError> {
    let kappa = cfg.f64("kappa")?;
    let formula: ChargeFormula = cfg.param("formula")?.parse().map_err(|e: critlab::Error| CliError::Usage(e.to_string()))?;
    let c = if cfg.param("c")? == "from-kappa" { central_charge(kappa, formula) } else { cfg.f64("c")? };
    if !(c > 0.0) {
        return Err(CliError::Usage(format!("soup intensity must be positive, got {c}")));
    }
    let (cutoff, steps) = soup_cutoff(cfg)?;
    let h = cfg.f64("h")?;
    let d = Shape::unit_square();
    let configs = replicate(stream(cfg, 0), cfg.samples(), |_, rng| -> critlab::Result<_> {
        let soup = sample_loop_soup(&d, c, cutoff, steps, rng)?;
        let lines: Vec<&[Point]> = soup.loops.iter().map(|l| l.points()).collect();
        boundaries_of(&lines, Region::from(d), h)
    });
    let configs = configs.into_iter().collect::<critlab::Result<Vec<_>>>()?;
    let mut o = Output::default();
    o.measurements.push(Measurement::new("c", c));
    o.measurements.push(Measurement::new("c (printed formula)", central_charge(kappa, ChargeFormula::Printed)));
    o.measurements.push(Measurement::new("c (standard formula)", central_charge(kappa, ChargeFormula::Standard)));
    o.checks.push(Check::flag("outer boundaries are simple, disjoint and non-nested", configs.iter().all(|g| g.validate().is_ok())));
    let mut w = Welford::new();
    configs.iter().for_each(|g| w.push(g.len() as f64));
    o.measurements.push(Measurement::estimate("boundary loops per sample", &w.estimate()));
    o.table(
        &["replica", "loops", "largest_area"],
        configs.iter().enumerate().map(|(k, g)| vec![k.to_string(), g.len().to_string(), g.largest_area().to_string()]).collect(),
    );
    if let Some(g) = configs.iter().find(|g| !g.is_empty()) {
        o.figures = g.loops.iter().map(|l| Figure::closed(l.vertices().to_vec())).collect();
    }
    Ok(o)
}

fn sle(cfg: &RunConfig) -> Result<Output, CliError> {
    let kappa = cfg.f64("kappa")?;
    let (tmax, dt) = (cfg.f64("tmax")?, cfg.f64("dt")?);
    let d = sample_driving(kappa, tmax, dt, &mut stream(cfg, 0).rng())?;
    let tr = compute_trace(&d)?;
    let dim = trace_dimension(&tr, cfg.usize("kmin")? as u32, cfg.usize("kmax")? as u32)?;
    let mut o = Output::default();
    o.measurements.push(Measurement::estimate("box-counting dimension", &dim));
    o.measurements.push(Measurement::new("subdivided steps", tr.subdivided.len() as f64));
    if kappa < 8.0 {
        o.checks.push(Check::new("dimension vs 1 + kappa/8", dim.mean, Threshold::Within { target: 1.0 + kappa / 8.0, tol: 0.1 }));
    }
    o.table(&["t", "x", "y"], tr.times.iter().zip(&tr.points).map(|(t, p)| vec![t.to_string(), p.re.to_string(), p.im.to_string()]).collect());
    o.figures = vec![Figure::open(tr.points.clone())];
    Ok(o)
}

fn cardy(cfg: &RunConfig) -> Result<Output, CliError> {
    let kappa = cfg.f64("kappa")?;
    let z = cfg.f64("z")?;
    let mut o = Output::default();
    o.measurements.push(Measurement::new("G(z, kappa)", cardy_g(z, kappa)?));
    o.checks.push(Check::new("G(1/2, kappa)", cardy_g(0.5, kappa)?, Threshold::Within { target: 0.5, tol: 1e-9 }));
    if kappa == 6.0 {
        o.checks.push(Check::new("G(2, 6)", cardy_g(2.0, 6.0)?, Threshold::Within { target: 0.5, tol: 1e-9 }));
    }
    let grid = [0.0, 0.01, 0.1, 0.25, 0.5, 1.0, 2.0, 4.0, 10.0, 100.0, f64::INFINITY];
    let rows = grid.iter().map(|&x| Ok(vec![x.to_string(), cardy_g(x, kappa)?.to_string()])).collect::<Result<Vec<_>, CliError>>()?;
    o.table(&["z", "G"], rows);
    Ok(o)
}

fn gff(cfg: &RunConfig) -> Result<Output, CliError> {
    let n = cfg.usize("n")?;
    let lambda = cfg.f64("lambda")?;
    if n < 3 {
        return Err(CliError::Usage("gff needs n >= 3".into()));
    }
    let d = GffDomain::rectangle(n, n)?;
    let g = green_matrix(&d)?;
    let samples = sample_many(&g, cfg.samples(), stream(cfg, 0));
    let mut o = Output::default();
    let row = n + 2;
    let cut: Vec<usize> = (1..=n).map(|y| y * row + (n + 1) / 2).collect();
    let split = MarkovSplit::new(&d, &cut)?;
    let mut err: f64 = 0.0;
    for s in &samples {
        let p = split.decompose(&d, s)?;
        for v in 0..d.len() {
            err = err.max((p.harmonic.values[v] + p.first.values[v] + p.second.values[v] - s.values[v]).abs());
        }
    }
    o.checks.push(Check::new("Markov decomposition reconstructs h", err, Threshold::AtMost(1e-12)));
    if samples.len() >= 1000 {
        let (dev, _) = covariance_deviation(&g, &samples)?;
        o.checks.push(Check::new("max |cov - G| / se", dev, Threshold::AtMost(5.0)));
    }
    let center = (n / 2 + 1) * row + n / 2 + 1;
    let k = g.sites().iter().position(|&s| s == center).unwrap_or(0);
    o.measurements.push(Measurement::new("G(center, center)", g.entry(k, k)));
    let first = &samples[0];
    o.table(&["x", "y", "h"], (0..d.len()).map(|s| vec![(s % row).to_string(), (s / row).to_string(), first.values[s].to_string()]).collect());
    // rows top to bottom
    let field: Vec<f64> = (0..row).rev().flat_map(|y| (0..row).map(move |x| (x, y))).map(|(x, y)| first.values[y * row + x]).collect();
    o.field = Some((row, row, field));
    if lambda > 0.0 {
        let width = if row % 2 == 0 { row } else { row + 1 };
        let dom = LevelLineDomain::new(width, row)?;
        let line = level_line_explore(&dom, lambda, &mut stream(cfg, 1).rng())?;
        let diag = driving_diagnostic(&line.points)?;
        o.measurements.push(Measurement::new("level line: driving quadratic variation / time", diag.kappa_estimate));
        o.measurements.push(Measurement::new("level line: points", line.points.len() as f64));
        o.figures = vec![Figure::open(line.points)];
    }
    Ok(o)
}

fn verify(cfg: &RunConfig) -> Result<Output, CliError> {
    let mut o = Output::default();
    for c in checks::select(cfg.param("suite")?)? {
        let start = Instant::now();
        let out = (c.run)(cfg.seed)?;
        eprintln!("criterion {:>2} {:<14} {} ({:.1} s)", c.id, c.key, if out.passed() { "PASS" } else { "FAIL" }, start.elapsed().as_secs_f64());
        let tag = |name: &str| format!("{} {}: {name}", c.id, c.key);
        o.checks.extend(out.checks.into_iter().map(|mut k| {
            k.name = tag(&k.name);
            k
        }));
        o.measurements.extend(out.measurements.into_iter().map(|mut m| {
            m.name = tag(&m.name);
            m
        }));
    }
    Ok(o)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;

    fn cfg(command: &str, pairs: &[(&str, &str)]) -> RunConfig {
        let flags: BTreeMap<String, String> = pairs.iter().map(|&(k, v)| (k.to_string(), v.to_string())).collect();
        RunConfig::resolve(command, &BTreeMap::new(), &flags).unwrap()
    }

    #[test]
    fn verify_cardy_passes() {
        let r = run(&cfg("verify", &[("suite", "cardy")])).unwrap();
        assert!(r.passed && r.consistent());
        assert_eq!(r.checks.len(), 5);
    }

    #[test]
    fn artifacts_are_reproducible() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().to_str().unwrap();
        let c = cfg("perco", &[("geometry", "rhombus"), ("n", "8"), ("samples", "200"), ("out", out), ("format", "csv,json,svg"), ("seed", "5")]);
        let first = run(&c).unwrap();
        let read = |f: &str| std::fs::read(dir.path().join(f)).unwrap();
        let (csv, json, svg) = (read("perco.csv"), read("perco.json"), read("perco.svg"));
        run(&c).unwrap();
        assert_eq!(csv, read("perco.csv"));
        assert_eq!(json, read("perco.json"));
        assert_eq!(svg, read("perco.svg"));
        assert!(String::from_utf8(csv).unwrap().starts_with("# critlab perco seed=5"));
        let back: RunReport = serde_json::from_slice(&json).unwrap();
        assert_eq!(back.config, c);
        assert!(back.wall_clock_s.is_none() && first.wall_clock_s.is_some());
        // the echoed config reproduces the run
        let again = run(&back.config).unwrap();
        assert_eq!(again.measurements, first.measurements);
    }

    #[test]
    fn saw_table_with_checks() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("counts.csv");
        let r = run(&cfg("saw", &[("nmax", "12"), ("out", path.to_str().unwrap())])).unwrap();
        assert!(r.passed, "{:?}", r.checks);
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.contains("\n1,3,0\n2,6,0\n"));
        assert!(text.contains("# check,submultiplicativity violations,0,pass"));
    }

    #[test]
    fn small_commands_run() {
        for (c, kv) in [
            ("spin", vec![("n", "2"), ("samples", "2000")]),
            ("fk", vec![("n", "3"), ("samples", "20")]),
            ("ust", vec![("n", "2"), ("samples", "4000")]),
            ("onmodel", vec![("size", "1"), ("samples", "20000")]),
            ("loopsoup", vec![("samples", "3"), ("tmin", "0.01")]),
            ("cle", vec![("kappa", "3"), ("tmin", "0.002"), ("h", "0.02")]),
            ("sle", vec![("kappa", "2"), ("dt", "1e-3")]),
            ("cardy", vec![("kappa", "6"), ("z", "2")]),
            ("gff", vec![("n", "6"), ("samples", "10"), ("lambda", "1")]),
        ] {
            let r = run(&cfg(c, &kv)).unwrap_or_else(|e| panic!("{c}: {e}"));
            assert!(r.consistent(), "{c}");
            assert!(r.checks.iter().all(|k| k.pass || c == "sle"), "{c}: {:?}", r.checks);
        }
    }

    #[test]
    fn bad_values_are_usage_errors() {
        let e = run(&cfg("perco", &[("p", "1.5"), ("samples", "10")])).unwrap_err();
        assert_eq!(e.exit_code(), 2);
        let e = run(&cfg("perco", &[("geometry", "disc")])).unwrap_err();
        assert_eq!(e.exit_code(), 2);
        let e = run(&cfg("sle", &[("kappa", "abc")])).unwrap_err();
        assert_eq!(e.exit_code(), 2);
    }
}
