//! The acceptance criteria, shared by `critlab verify` and the acceptance
//! test target. Each criterion runs at its stated scale and tolerance from
//! a seed; the stream for part `k` of criterion `id` is
//! `RngStream::new(seed, 1000 * id + k)`.

use std::f64::consts::PI;

use rand::Rng as _;

use critlab::brownian::{diffusive_resolution, path_hull, sample_brownian_bridge, sample_loop_soup, TimeCutoff};
use critlab::cle::{
    cluster_count_vs_intensity, extinction_probability, mandelbrot_crossing, markov_resample_test, sample_mandelbrot,
    sample_mandelbrot_with, DiscDecoySampler, ResampleStatistic, RetentionField, SoupBoundarySampler,
};
use critlab::gff::{covariance_deviation, empirical_covariance, green_matrix, sample_many, GffDomain, MarkovSplit};
use critlab::lattice::{hex, LatticeDomain, LatticeKind, Graph, Shape};
use critlab::loop_models::{enumerate_saw, estimate_connective_constant, exact_on_partition, nienhuis_theta_c, OnChain};
use critlab::percolation::{empirical_loop_density, estimate_crossing, half_plane_crossing, perco_loop_mass, rhombus_crossing};
use critlab::rng::replicate;
use critlab::sle::{
    absorption_by, cardy_g, cardy_kappa_root, compute_trace, hitting_probability_mc, loewner_map, martingale_diagnostic,
    radial_slit_map, sample_driving, sample_restriction, trace_dimension, BrownianHullSource, DrivingFunction,
};
use critlab::spin_fk::{
    correlation_identity_check, es_spin_marginal, p_to_beta, potts_exact, sample_ust_wilson, spanning_trees, SwChain,
    DEFAULT_MAX_STATES,
};
use critlab::stats::{binomial_estimate, chi_square_gof, chi_square_homogeneity, integer_histogram, linear_fit, total_variation, Welford};
use critlab::{Point, RngStream};

use crate::report::{Check, Measurement, Threshold};
use crate::CliError;

/// Checks and side measurements of one criterion.
#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub checks: Vec<Check>,
    pub measurements: Vec<Measurement>,
}

impl Outcome {
    pub fn passed(&self) -> bool {
        !self.checks.is_empty() && self.checks.iter().all(|c| c.pass)
    }

    fn check(&mut self, c: Check) {
        self.checks.push(c);
    }

    fn measure(&mut self, m: Measurement) {
        self.measurements.push(m);
    }
}

type Run = fn(u64) -> Result<Outcome, CliError>;

#[derive(Clone, Copy)]
pub struct Criterion {
    pub id: u8,
    pub key: &'static str,
    pub title: &'static str,
    pub run: Run,
}

impl std::fmt::Debug for Criterion {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Criterion({} {})", self.id, self.key)
    }
}

pub const CRITERIA: &[Criterion] = &[
    Criterion { id: 1, key: "cardy", title: "Cardy exact values and kappa root", run: cardy },
    Criterion { id: 2, key: "perco", title: "percolation crossings at p = 1/2", run: perco },
    Criterion { id: 3, key: "perco-loop", title: "single-hexagon boundary-loop density 2^-7", run: perco_loop },
    Criterion { id: 4, key: "sle-solver", title: "Loewner solver with zero driving", run: sle_solver },
    Criterion { id: 5, key: "sle-dimension", title: "SLE box-counting dimension 1 + kappa/8", run: sle_dimension },
    Criterion { id: 6, key: "sle-phases", title: "SLE swallowing of boundary points", run: sle_phases },
    Criterion { id: 7, key: "martingale", title: "log f_t(i) drift at kappa = 2, 4, 6", run: martingale },
    Criterion { id: 8, key: "fk", title: "FK / Potts coupling and Swendsen-Wang", run: fk },
    Criterion { id: 9, key: "ust", title: "Wilson's algorithm on the 4-cycle", run: ust },
    Criterion { id: 10, key: "saw", title: "honeycomb connective constant and O(n) sampler", run: saw },
    Criterion { id: 11, key: "hull", title: "mean hull area of the Brownian bridge", run: hull },
    Criterion { id: 12, key: "loopsoup", title: "loop-soup superposition and clusters", run: loopsoup },
    Criterion { id: 13, key: "mandelbrot", title: "fractal percolation extinction and coupling", run: mandelbrot },
    Criterion { id: 14, key: "restriction", title: "restriction functional of Brownian hulls", run: restriction },
    Criterion { id: 15, key: "gff", title: "discrete GFF covariance and Markov split", run: gff },
    Criterion { id: 16, key: "cle", title: "loop-ensemble Markov resampling", run: cle },
];

/// Criteria selected by `all`, a number or a key.
pub fn select(name: &str) -> Result<Vec<&'static Criterion>, CliError> {
    if name == "all" {
        return Ok(CRITERIA.iter().collect());
    }
    let found = match name.parse::<u8>() {
        Ok(id) => CRITERIA.iter().find(|c| c.id == id),
        Err(_) => CRITERIA.iter().find(|c| c.key == name),
    };
    found.map(|c| vec![c]).ok_or_else(|| {
        let keys: Vec<&str> = CRITERIA.iter().map(|c| c.key).collect();
        CliError::Usage(format!("unknown suite {name:?}; expected all, 1-16 or one of {}", keys.join(", ")))
    })
}

fn stream(seed: u64, id: u64, k: u64) -> RngStream {
    RngStream::new(seed, 1000 * id + k)
}

fn within(target: f64, tol: f64) -> Threshold {
    Threshold::Within { target, tol }
}

fn cardy(_seed: u64) -> Result<Outcome, CliError> {
    let mut o = Outcome::default();
    for kappa in [4.5, 6.0, 7.5] {
        o.check(Check::new(format!("G(1/2, {kappa})"), cardy_g(0.5, kappa)?, within(0.5, 1e-9)));
    }
    o.check(Check::new("G(2, 6)", cardy_g(2.0, 6.0)?, within(0.5, 1e-9)));
    let root = cardy_kappa_root(2.0, 0.5, 4.5, 7.5, 1e-8)?;
    o.check(Check::new("kappa with G(2, kappa) = 1/2", root, within(6.0, 1e-3)));
    Ok(o)
}

fn perco(seed: u64) -> Result<Outcome, CliError> {
    let mut o = Outcome::default();
    let (d, ev) = half_plane_crossing(1.0 / 64.0)?;
    let e = estimate_crossing(&d, 0.5, &ev, 10_000, stream(seed, 2, 0))?;
    o.check(Check::estimate("[0,1] -> [2,inf) crossing, mesh 1/64", &e, within(0.5, 0.03)));
    let (d, ev) = rhombus_crossing(64)?;
    let e = estimate_crossing(&d, 0.5, &ev, 10_000, stream(seed, 2, 1))?;
    o.check(Check::z_within("64 x 64 rhombus crossing, |z| vs 1/2", &e, 0.5, 3.0));
    o.measure(Measurement::estimate("rhombus crossing", &e));
    Ok(o)
}

fn perco_loop(seed: u64) -> Result<Outcome, CliError> {
    let mut o = Outcome::default();
    let d = LatticeDomain::triangular_rhombus(12, 1.0)?;
    let target = hex::trace_outer_boundary(&[(0, 0)])?;
    let mass = perco_loop_mass(&target);
    o.check(Check::new("mass of the single-hexagon loop", mass, within(2f64.powi(-7), 0.0)));
    let dens = empirical_loop_density(&d, &target, 100_000, stream(seed, 3, 0))?;
    let e = dens.estimate();
    o.check(Check::z_within("empirical density, |z| vs 2^-7", &e, 2f64.powi(-7), 3.0));
    o.measure(Measurement::estimate("density per position", &e));
    o.measure(Measurement::new("positions", dens.positions as f64));
    Ok(o)
}

/// Upper-half-plane square root of `z^2 + 4t`, computed independently of
/// the solver's branch handling.
fn slit_map_reference(z: Point, t: f64) -> Point {
    let w = (z * z + 4.0 * t).sqrt();
    if w.im < 0.0 {
        -w
    } else {
        w
    }
}

fn sle_solver(seed: u64) -> Result<Outcome, CliError> {
    let mut o = Outcome::default();
    let (t_max, steps) = (1.0, 1000);
    let zero = DrivingFunction::zero(t_max, steps)?;
    let mut rng = stream(seed, 4, 0).rng();
    let mut err: f64 = 0.0;
    for _ in 0..100 {
        let z = Point::new(rng.random_range(-5.0..5.0), rng.random_range(0.1..10.0));
        let t = rng.random_range(0.0..t_max);
        err = err.max((loewner_map(&zero, z, t)? - slit_map_reference(z, t)).norm());
    }
    o.check(Check::new("max |f_t(z) - sqrt(z^2 + 4t)| over 100 points", err, Threshold::AtMost(1e-6)));
    let tr = compute_trace(&zero)?;
    let err = tr
        .times
        .iter()
        .zip(&tr.points)
        .map(|(&t, &p)| (p - Point::new(0.0, 2.0 * t.sqrt())).norm())
        .fold(0.0, f64::max);
    o.check(Check::new("max |gamma(t) - 2i sqrt(t)|", err, Threshold::AtMost(1e-6)));
    Ok(o)
}

pub const DIMENSION_STEPS: usize = 100_000;
pub const DIMENSION_TRACES: u64 = 3;
pub const DIMENSION_WINDOW: (u32, u32) = (2, 7);

fn sle_dimension(seed: u64) -> Result<Outcome, CliError> {
    let mut o = Outcome::default();
    for (k, kappa) in [8.0 / 3.0, 4.0, 6.0].into_iter().enumerate() {
        let mut w = Welford::new();
        for r in 0..DIMENSION_TRACES {
            let mut rng = stream(seed, 5, 10 * k as u64 + r).rng();
            let d = sample_driving(kappa, 1.0, 1.0 / DIMENSION_STEPS as f64, &mut rng)?;
            let tr = compute_trace(&d)?;
            let dim = trace_dimension(&tr, DIMENSION_WINDOW.0, DIMENSION_WINDOW.1)?;
            o.measure(Measurement::estimate(format!("kappa {kappa:.4} trace {r}"), &dim));
            w.push(dim.mean);
        }
        let target = 1.0 + kappa / 8.0;
        o.check(Check::estimate(format!("dimension at kappa {kappa:.4} (target {target:.4})"), &w.estimate(), within(target, 0.1)));
    }
    Ok(o)
}

fn sle_phases(seed: u64) -> Result<Outcome, CliError> {
    let mut o = Outcome::default();
    let r = absorption_by(2.0, -1.0, 1.0, 1.0, 1000, stream(seed, 6, 0))?;
    o.check(Check::new("kappa 2: runs swallowing -1 or 1 by t = 1 (of 1000)", r.absorbed as f64, Threshold::AtMost(0.0)));
    for (k, (x, y)) in [(-1.0, 1.0), (-1.0, 3.0)].into_iter().enumerate() {
        let h = hitting_probability_mc(6.0, x, y, 10_000, stream(seed, 6, 1 + k as u64))?;
        let mut c = Check::new(format!("kappa 6: P(x = {x} before y = {y}), |z| vs G = {:.4}", h.predicted), h.z_score().abs(), Threshold::AtMost(3.0));
        c.ci = Some(h.estimate.interval());
        o.check(c);
        o.measure(Measurement::estimate(format!("kappa 6 hitting ({x}, {y})"), &h.estimate));
        o.measure(Measurement::new(format!("kappa 6 undecided ({x}, {y})"), h.undecided as f64));
    }
    Ok(o)
}

fn martingale(seed: u64) -> Result<Outcome, CliError> {
    let mut o = Outcome::default();
    let times: Vec<f64> = (0..=10).map(|k| k as f64 / 10.0).collect();
    let z = Point::new(0.0, 1.0);
    for (k, kappa) in [2.0, 4.0, 6.0].into_iter().enumerate() {
        let r = martingale_diagnostic(kappa, z, &times, 1e-3, 10_000, stream(seed, 7, k as u64))?;
        o.measure(Measurement::estimate(format!("kappa {kappa}: slope of E Re log f_t(i)"), &r.slope_re));
        o.measure(Measurement::estimate(format!("kappa {kappa}: slope of E Im log f_t(i)"), &r.slope_im));
        if kappa == 4.0 {
            o.check(Check::z_within("kappa 4: Re slope, |z| vs 0", &r.slope_re, 0.0, 3.0));
            o.check(Check::z_within("kappa 4: Im slope, |z| vs 0", &r.slope_im, 0.0, 3.0));
        } else {
            o.check(Check::new(format!("kappa {kappa}: largest slope |z|"), r.max_abs_z(), Threshold::AtLeast(3.0)));
        }
    }
    Ok(o)
}

/// Graphs with at most 12 edges used for the exact coupling checks.
pub fn fk_test_graphs() -> Vec<(&'static str, Graph)> {
    vec![
        ("path 2", Graph::path(2)),
        ("path 4", Graph::path(4)),
        ("triangle", Graph::complete(3)),
        ("4-cycle", Graph::cycle(4)),
        ("5-cycle", Graph::cycle(5)),
        ("K4", Graph::complete(4)),
        ("3 x 2 grid", Graph::grid(3, 2)),
        ("double edge", Graph::new(3, vec![(0, 1), (0, 1), (1, 2)])),
        ("3 x 3 grid", Graph::grid(3, 3)),
    ]
}

fn fk(seed: u64) -> Result<Outcome, CliError> {
    let mut o = Outcome::default();
    let (mut es_dev, mut corr_dev) = (0.0f64, 0.0f64);
    for (_, g) in fk_test_graphs() {
        debug_assert!(g.edge_count() <= 12);
        let n = g.vertex_count();
        for (p, q) in [(0.3, 2u32), (0.5, 3), (0.8, 2)] {
            let es = es_spin_marginal(&g, p, q, DEFAULT_MAX_STATES)?;
            let potts = potts_exact(&g, q, p_to_beta(p), &vec![None; n], DEFAULT_MAX_STATES)?;
            es_dev = es.iter().zip(&potts.probs).map(|(a, b)| (a - b).abs()).fold(es_dev, f64::max);
            for y in 1..n {
                corr_dev = corr_dev.max(correlation_identity_check(&g, p, q, 0, y)?.difference());
            }
        }
    }
    o.check(Check::new("max |Edwards-Sokal marginal - Boltzmann|", es_dev, Threshold::AtMost(1e-12)));
    o.check(Check::new("max |P(same) - 1/q - (1 - 1/q) P(connected)|", corr_dev, Threshold::AtMost(1e-12)));

    let g = Graph::grid(3, 3);
    let (q, beta, sweeps) = (3u32, 0.5, 100_000usize);
    let pi = potts_exact(&g, q, beta, &[None; 9], DEFAULT_MAX_STATES)?;
    let mut rng = stream(seed, 8, 0).rng();
    let mut chain = SwChain::new(&g, q, beta, vec![None; 9], &mut rng)?;
    for _ in 0..100 {
        chain.step(&mut rng);
    }
    let mut law = vec![0.0; pi.probs.len()];
    let mut raw = vec![0.0; pi.probs.len()];
    for _ in 0..sweeps {
        chain.step(&mut rng);
        chain.accumulate_conditional_law(&mut law, 1.0 / sweeps as f64);
        raw[chain.state_index()] += 1.0;
    }
    o.check(Check::new("3 x 3 grid, q = 3, beta = 0.5: TV of the chain's conditional law", total_variation(&law, &pi.probs), Threshold::AtMost(0.02)));
    o.measure(Measurement::new("TV of the raw visit histogram", total_variation(&raw, &pi.probs)));
    // what an exact i.i.d. sampler gives for the raw histogram
    let cdf: Vec<f64> = pi.probs.iter().scan(0.0, |s, p| {
        *s += p;
        Some(*s)
    }).collect();
    let mut iid = vec![0.0; pi.probs.len()];
    let mut rng = stream(seed, 8, 1).rng();
    for _ in 0..sweeps {
        let u: f64 = rng.random::<f64>() * cdf[cdf.len() - 1];
        iid[cdf.partition_point(|&c| c < u).min(cdf.len() - 1)] += 1.0;
    }
    o.measure(Measurement::new("TV of an i.i.d. histogram of the same size", total_variation(&iid, &pi.probs)));
    Ok(o)
}

fn ust(seed: u64) -> Result<Outcome, CliError> {
    let mut o = Outcome::default();
    let g = Graph::cycle(4);
    let trees = spanning_trees(&g);
    let mut rng = stream(seed, 9, 0).rng();
    let mut counts = vec![0u64; trees.len()];
    for _ in 0..100_000 {
        let t = sample_ust_wilson(&g, &mut rng)?;
        let k = trees.iter().position(|x| *x == t).ok_or_else(|| CliError::Failed("Wilson output is not a spanning tree".into()))?;
        counts[k] += 1;
    }
    o.check(Check::new("spanning trees of the 4-cycle", trees.len() as f64, within(4.0, 0.0)));
    let test = chi_square_gof(&counts, &vec![1.0 / trees.len() as f64; trees.len()])?;
    o.check(Check::new("chi-square p-value, uniform over trees", test.p_value, Threshold::AtLeast(0.001)));
    Ok(o)
}

fn saw(seed: u64) -> Result<Outcome, CliError> {
    let mut o = Outcome::default();
    let target = (2.0 + 2f64.sqrt()).sqrt();
    let table = enumerate_saw(LatticeKind::Hexagonal, 20)?;
    let est = estimate_connective_constant(&table)?;
    o.check(Check::new("bracket lower end <= sqrt(2 + sqrt 2)", est.bracket.0, Threshold::AtMost(target)));
    o.check(Check::new("bracket upper end >= sqrt(2 + sqrt 2)", est.bracket.1, Threshold::AtLeast(target)));
    o.check(Check::new("submultiplicativity violations", table.submultiplicativity_violations().len() as f64, Threshold::AtMost(0.0)));
    o.measure(Measurement::new("A_20 / A_19", est.ratio));
    o.measure(Measurement::new("A_20^(1/20)", est.root));

    let (n, theta) = (2.0, nienhuis_theta_c(2.0)?);
    let two = LatticeDomain::honeycomb_patch(&[(0, 0), (1, 0)], 1.0)?;
    let ex = exact_on_partition(two.graph(), n, theta, 30)?;
    let mut chain = OnChain::new(&two, n, theta)?;
    let mut rng = stream(seed, 10, 0).rng();
    let sweeps = 100_000;
    let mut counts = vec![0.0; ex.configs.len()];
    for _ in 0..sweeps {
        chain.sweep(&mut rng);
        let k = ex.configs.iter().position(|(c, _)| c == chain.config()).ok_or_else(|| CliError::Failed("chain left the configuration space".into()))?;
        counts[k] += 1.0;
    }
    let exact: Vec<f64> = ex.configs.iter().map(|(_, w)| w / ex.partition).collect();
    o.check(Check::new("two hexagons, n = 2 at theta_c: TV of 1e5 sweeps", total_variation(&counts, &exact), Threshold::AtMost(0.02)));
    o.check(Check::new("theta_c(2)", nienhuis_theta_c(2.0)?, within(1.0 / 2f64.sqrt(), 1e-15)));
    o.check(Check::new("theta_c(1)", nienhuis_theta_c(1.0)?, within(1.0 / 3f64.sqrt(), 1e-15)));
    Ok(o)
}

fn hull(seed: u64) -> Result<Outcome, CliError> {
    let mut o = Outcome::default();
    let areas = replicate(stream(seed, 11, 0), 100_000, |_, rng| -> critlab::Result<f64> {
        let b = sample_brownian_bridge(10_000, rng)?;
        Ok(path_hull(&b, diffusive_resolution(&b))?.area())
    });
    let mut w = Welford::new();
    for a in areas {
        w.push(a?);
    }
    let target = PI / 5.0;
    o.check(Check::estimate("mean hull area (target pi/5)", &w.estimate(), within(target, 0.05 * target)));
    Ok(o)
}

fn loopsoup(seed: u64) -> Result<Outcome, CliError> {
    let mut o = Outcome::default();
    let d = Shape::unit_square();
    let small = TimeCutoff::new(0.002, 0.05)?;
    let n = 3000;
    let sum = replicate(stream(seed, 12, 0), n, |_, r| -> critlab::Result<usize> {
        Ok(sample_loop_soup(&d, 0.3, small, 8, r)?.count() + sample_loop_soup(&d, 0.5, small, 8, r)?.count())
    });
    let direct = replicate(stream(seed, 12, 1), n, |_, r| -> critlab::Result<usize> { Ok(sample_loop_soup(&d, 0.8, small, 8, r)?.count()) });
    let sum = sum.into_iter().collect::<critlab::Result<Vec<_>>>()?;
    let direct = direct.into_iter().collect::<critlab::Result<Vec<_>>>()?;
    let bins = 1 + sum.iter().chain(&direct).copied().max().unwrap_or(0);
    let test = chi_square_homogeneity(&integer_histogram(sum, bins), &integer_histogram(direct, bins))?;
    o.check(Check::new("counts of soup(0.3) + soup(0.5) vs soup(0.8): chi-square p", test.p_value, Threshold::AtLeast(0.001)));

    let grid = [0.1, 0.25, 0.5, 1.0, 2.0, 4.0, 6.0, 8.0];
    let table = cluster_count_vs_intensity(&d, &grid, TimeCutoff::new(1e-3, 1.0)?, 32, 100, stream(seed, 12, 2))?;
    for r in &table.rows {
        o.measure(Measurement { name: format!("c = {}: mean macroscopic clusters", r.c), value: r.mean_macroscopic, std_error: Some(r.std_error) });
    }
    o.check(Check::flag("mean macroscopic cluster count nonincreasing in c", table.monotone_nonincreasing()));
    o.measure(Measurement::new("clusters coarsen pathwise under thinning (1 = yes)", table.pathwise_coarsening as u8 as f64));
    let last = table.rows.last().ok_or_else(|| CliError::Failed("empty intensity table".into()))?;
    o.check(Check::new(format!("single macroscopic cluster frequency at c = {}", last.c), last.single_frequency, Threshold::AtLeast(0.99)));
    Ok(o)
}

fn mandelbrot(seed: u64) -> Result<Outcome, CliError> {
    let mut o = Outcome::default();
    let (p, depth, n) = (0.2, 8, 10_000u64);
    let dead = replicate(stream(seed, 13, 0), n, |_, r| sample_mandelbrot(p, depth, r).map(|q| q.is_empty()));
    let dead = dead.into_iter().collect::<critlab::Result<Vec<_>>>()?;
    let e = binomial_estimate(dead.iter().filter(|&&d| d).count() as u64, n);
    o.check(Check::estimate("p = 0.2: empty by depth 8", &e, Threshold::AtLeast(0.99)));
    o.measure(Measurement::new("exact extinction probability by depth 8", extinction_probability(p, depth)));

    let grid = [0.5, 0.6, 0.7, 0.8, 0.9, 1.0];
    let mut rng = stream(seed, 13, 1).rng();
    let mut monotone = true;
    let mut freq = vec![0u64; grid.len()];
    let runs = 1000;
    for _ in 0..runs {
        let field = RetentionField::from_rng(&mut rng);
        let mut prev = false;
        for (k, &p) in grid.iter().enumerate() {
            let c = mandelbrot_crossing(&sample_mandelbrot_with(p, 6, &field)?);
            monotone &= c || !prev;
            prev = c;
            freq[k] += c as u64;
        }
    }
    for (k, &p) in grid.iter().enumerate() {
        o.measure(Measurement::new(format!("crossing frequency at p = {p}"), freq[k] as f64 / runs as f64));
    }
    o.check(Check::flag("crossing monotone in p in every coupled run", monotone));
    Ok(o)
}

pub const RESTRICTION_DRAWS: u64 = 10_000_000;
pub const RESTRICTION_STEPS: usize = 2048;

fn restriction(seed: u64) -> Result<Outcome, CliError> {
    let mut o = Outcome::default();
    let src = BrownianHullSource { cutoff: TimeCutoff::new(0.01, 4.0)?, steps: RESTRICTION_STEPS };
    let (one, i, minus) = (Point::new(1.0, 0.0), Point::new(0.0, 1.0), Point::new(-1.0, 0.0));
    let phi = |t: f64, z: Point| radial_slit_map(t, z);
    let maps = vec![phi(0.1, one)?, phi(0.2, one)?, phi(0.3, one)?, phi(0.2, i)?, phi(0.1, one)?.compose(&phi(0.2, i)?), phi(0.25, minus)?];
    let logs: Vec<f64> = maps.iter().map(|m| m.derivative_at_zero().map(|d| -d.ln()).unwrap_or(f64::NAN)).collect();
    let s = sample_restriction(&src, &maps, RESTRICTION_DRAWS, stream(seed, 14, 0))?;
    let a: Vec<_> = (0..maps.len()).map(|k| s.estimate(k)).collect();
    let names = ["phi(1, 0.1)", "phi(1, 0.2)", "phi(1, 0.3)", "phi(i, 0.2)", "phi(1, 0.1) o phi(i, 0.2)", "phi(-1, 0.25)"];
    for (k, e) in a.iter().enumerate() {
        o.measure(Measurement::estimate(format!("a({})", names[k]), e));
    }

    let fit = linear_fit(&logs[..3], &[a[0].mean, a[1].mean, a[2].mean])?;
    o.check(Check::new("a(phi(1, t)) linear in t: R^2", fit.r_squared, Threshold::AtLeast(0.99)));
    o.measure(Measurement { name: "slope in t".into(), value: fit.slope, std_error: Some(fit.slope_std_error) });

    let diff = s.combination(&[(4, 1.0), (0, -1.0), (3, -1.0)]);
    o.check(Check::z_within("a(composite) - a(phi(1, 0.1)) - a(phi(i, 0.2)), |z| vs 0", &diff, 0.0, 3.0));
    o.measure(Measurement::estimate("additivity defect", &diff));

    let ratios: Vec<f64> = [1usize, 3, 5].iter().map(|&k| a[k].mean / logs[k]).collect();
    let (lo, hi) = ratios.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &r| (l.min(r), h.max(r)));
    o.check(Check::new("a / log(1/phi'(0)) over three slits: max/min - 1", hi / lo - 1.0, Threshold::AtMost(0.1)));
    o.measure(Measurement::new("draws with a surrounding loop", s.rows.len() as f64));
    Ok(o)
}

fn gff(seed: u64) -> Result<Outcome, CliError> {
    let mut o = Outcome::default();
    let (w, h) = (16usize, 16usize);
    let d = GffDomain::rectangle(w, h)?;
    let g = green_matrix(&d)?;
    let samples = sample_many(&g, 10_000, stream(seed, 15, 0));
    let (dev, (si, sj)) = covariance_deviation(&g, &samples)?;
    o.check(Check::new(format!("max |cov - G| / se over all pairs (worst {si}, {sj})"), dev, Threshold::AtMost(5.0)));

    let row = w + 2;
    let cut: Vec<usize> = (1..=h).map(|y| y * row + w / 2).collect();
    let split = MarkovSplit::new(&d, &cut)?;
    let parts = samples.iter().map(|s| split.decompose(&d, s)).collect::<critlab::Result<Vec<_>>>()?;
    let mut err: f64 = 0.0;
    for (s, p) in samples.iter().zip(&parts) {
        for v in 0..d.len() {
            err = err.max((p.harmonic.values[v] + p.first.values[v] + p.second.values[v] - s.values[v]).abs());
        }
    }
    o.check(Check::new("max |harmonic + first + second - h|", err, Threshold::AtMost(1e-12)));

    let (left, right) = (&split.pieces()[0], &split.pieces()[1]);
    let side = |x: usize, y: usize| y * row + x;
    // next to the cut, mirrored, and far apart
    let pairs = [(side(w / 2 - 1, h / 2), side(w / 2 + 1, h / 2)), (side(w / 2 - 1, 3), side(w / 2 + 1, h - 2)), (side(1, h / 2), side(w, 1))];
    for (x, y) in pairs {
        let (x, y) = if left.contains(&x) { (x, y) } else { (y, x) };
        if !left.contains(&x) || !right.contains(&y) {
            return Err(CliError::Failed("probe pair does not straddle the cut".into()));
        }
        let a: Vec<f64> = parts.iter().map(|p| p.first.values[x]).collect();
        let b: Vec<f64> = parts.iter().map(|p| p.second.values[y]).collect();
        let cov = empirical_covariance(&a, &b);
        o.check(Check::z_within(format!("cov(first[{x}], second[{y}]), |z| vs 0"), &cov, 0.0, 3.0));
    }
    Ok(o)
}

fn cle(seed: u64) -> Result<Outcome, CliError> {
    let mut o = Outcome::default();
    let d = Shape::unit_square();
    let sub = Shape::Rectangle { min: Point::new(0.0, 0.0), max: Point::new(0.5, 1.0) };
    let probe = ResampleStatistic::ProbeCount { center: Point::new(0.25, 0.5), radius: 0.15 };
    let soup = SoupBoundarySampler { c: 0.5, cutoff: TimeCutoff::new(0.002, 0.1)?, steps: 32, h: 0.01 };
    let r = markov_resample_test(&soup, &d, &sub, probe, 1000, stream(seed, 16, 0))?;
    o.check(Check::new("soup cluster boundaries: resample p-value", r.p_value, Threshold::AtLeast(0.001)));
    o.measure(Measurement::new("soup: mean probe count, original", r.mean_original()));
    o.measure(Measurement::new("soup: mean probe count, resampled", r.mean_resampled()));
    let decoy = DiscDecoySampler { count: 30, radius: (0.02, 0.08), vertices: 24 };
    let r = markov_resample_test(&decoy, &d, &sub, probe, 2000, stream(seed, 16, 1))?;
    o.check(Check::new("i.i.d. disc decoy: resample p-value", r.p_value, Threshold::AtMost(0.001)));
    Ok(o)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn selection() {
        assert_eq!(select("all").unwrap().len(), 16);
        assert_eq!(select("3").unwrap()[0].key, "perco-loop");
        assert_eq!(select("gff").unwrap()[0].id, 15);
        assert!(select("17").is_err() && select("bogus").is_err());
        let ids: Vec<u8> = CRITERIA.iter().map(|c| c.id).collect();
        assert_eq!(ids, (1..=16).collect::<Vec<u8>>());
    }

    #[test]
    fn fast_criteria_pass() {
        for c in [1u8, 4] {
            let out = (CRITERIA[c as usize - 1].run)(1).unwrap();
            assert!(out.passed(), "{:?}", out.checks);
        }
    }

    #[test]
    fn fk_graphs_are_small() {
        assert!(fk_test_graphs().iter().all(|(_, g)| g.edge_count() <= 12));
    }
}
