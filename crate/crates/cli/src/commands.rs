use bloch_teleport::bounds::{comm_bound, qse_bound, sphere_average_error, trace_distance, CommQuadrature};
use bloch_teleport::dephasing::{
    dephased_bob_output, dephased_distribution, dephased_equator_error, DephasingConfig,
};
use bloch_teleport::oracle::{dephase_monte_carlo, run_protocol_exact, BobGateOrder};
use bloch_teleport::protocol::ProtocolModel;
use bloch_teleport::{
    bob_output, peak_positions, BlochAngles, JointDistribution, OutcomeTriple, PeakValue, PostselectionRule,
    ProtocolConfig, QuadratureRule, SphereGrid,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::{FRAC_PI_2, PI};

use crate::config::{Command, ExperimentSpec};
use crate::error::{CliError, CliResult};
use crate::table::{Cell, Table};

pub const ORACLE_TOL: f64 = 1e-10;
pub const MC_ABS_TOL: f64 = 5e-2;
pub const MC_SIGMAS: f64 = 3.0;

/// A finished table plus the number of failed checks in it.
pub struct Report {
    pub table: Table,
    pub failures: usize,
}

impl From<Table> for Report {
    fn from(table: Table) -> Self {
        Self { table, failures: 0 }
    }
}

pub fn run(spec: &ExperimentSpec) -> CliResult<Report> {
    match spec.command {
        Command::Distributions => distributions(spec).map(Report::from),
        Command::Peaks => peaks(spec).map(Report::from),
        Command::TeleportError => teleport_error(spec).map(Report::from),
        Command::SuccessProb => success_prob(spec).map(Report::from),
        Command::Dephasing => dephasing(spec).map(Report::from),
        Command::Bounds => bounds(spec).map(Report::from),
        Command::OracleCheck => oracle_check(spec),
    }
}

fn cfg(n: u32) -> CliResult<ProtocolConfig<f64>> {
    Ok(ProtocolConfig::new(n)?)
}

/// Every `(θ, φ)` pair of the two sweeps, `θ`-major.
fn alice_states(spec: &ExperimentSpec) -> CliResult<Vec<BlochAngles<f64>>> {
    let mut out = Vec::new();
    for &t in spec.theta.values() {
        for &p in spec.phi.values() {
            out.push(BlochAngles::new(t, p)?);
        }
    }
    Ok(out)
}

/// Requested cuts that are valid for `n`; without `--k1-cut`, `default(n)`.
fn cuts(spec: &ExperimentSpec, n: u32, default: fn(u32) -> Vec<u32>) -> Vec<u32> {
    match &spec.k1_cut {
        Some(s) => s.values().iter().copied().filter(|&c| c <= n / 2).collect(),
        None => default(n),
    }
}

fn unconditional(n: u32) -> Vec<u32> {
    vec![n / 2]
}

fn quad(spec: &ExperimentSpec) -> CliResult<QuadratureRule<f64>> {
    Ok(QuadratureRule::gauss_hermite(spec.quad_nodes)?)
}

fn distributions(spec: &ExperimentSpec) -> CliResult<Table> {
    let mut t = Table::new(&["N", "theta", "phi", "gamma", "k1", "k2", "k3", "prob"]);
    let rule = quad(spec)?;
    for &n in spec.n.values() {
        if let Some(k1) = spec.k1 {
            if k1 > n {
                return Err(CliError::Usage(format!("--k1: {k1} exceeds N = {n}")));
            }
        }
        let c = cfg(n)?;
        for alice in alice_states(spec)? {
            for &gamma in spec.gamma.values() {
                let dist = if gamma == 0.0 {
                    JointDistribution::new(&c, &alice)?
                } else {
                    dephased_distribution(&c, &DephasingConfig::new(gamma, &c)?, &alice, &rule)?
                };
                let probs = dist.probabilities();
                let k1s: Vec<u32> = spec.k1.map_or_else(|| (0..=n).collect(), |k| vec![k]);
                for k1 in k1s {
                    for k2 in 0..=n {
                        for k3 in 0..=n {
                            t.push(vec![
                                n.into(),
                                alice.theta().into(),
                                alice.phi().into(),
                                gamma.into(),
                                k1.into(),
                                k2.into(),
                                k3.into(),
                                probs[dist.index(k1, k2, k3)].into(),
                            ]);
                        }
                    }
                }
            }
        }
    }
    Ok(t)
}

fn peak_cells(p: PeakValue<f64>) -> [Cell; 2] {
    let kind = match p {
        PeakValue::Regular(_) => "regular",
        PeakValue::Clamped(_) => "clamped",
        PeakValue::Undefined => "undefined",
    };
    [p.value().into(), kind.into()]
}

/// Grid point maximizing `p(k1, ⌊N/2⌋, ⌊N/2⌋)` over `points` raw angles.
fn scan_argmax(c: &ProtocolConfig<f64>, out: &OutcomeTriple, points: impl Iterator<Item = (f64, f64)>, pick: fn((f64, f64)) -> f64) -> f64 {
    let mut best = (f64::NEG_INFINITY, f64::NAN);
    for pt in points {
        let lp = ProtocolModel::from_raw_angles(c, pt.0, pt.1).log_prob(out);
        if lp > best.0 {
            best = (lp, pick(pt));
        }
    }
    best.1
}

fn peaks(spec: &ExperimentSpec) -> CliResult<Table> {
    let mut t = Table::new(&[
        "N",
        "theta",
        "phi",
        "k1",
        "s1",
        "phi_peak",
        "phi_peak_kind",
        "theta_peak",
        "theta_peak_kind",
        "phi_argmax",
        "theta_argmax",
    ]);
    for &n in spec.n.values() {
        let c = cfg(n)?;
        let half = n / 2;
        for alice in alice_states(spec)? {
            for k1 in 0..=n {
                let s1 = 2 * i64::from(k1) - i64::from(n);
                let pk = peak_positions(n, s1, &alice)?;
                let out = OutcomeTriple::new(n, k1, half, half)?;
                let (gp, gt) = (spec.grid_phi, spec.grid_theta);
                let phis = (0..=gp).map(|i| (alice.theta(), PI * i as f64 / gp as f64));
                let thetas = (0..=gt).map(|i| (-FRAC_PI_2 + PI * i as f64 / gt as f64, alice.phi()));
                let [pv, pkind] = peak_cells(pk.phi_peak);
                let [tv, tkind] = peak_cells(pk.theta_peak);
                t.push(vec![
                    n.into(),
                    alice.theta().into(),
                    alice.phi().into(),
                    k1.into(),
                    s1.into(),
                    pv,
                    pkind,
                    tv,
                    tkind,
                    scan_argmax(&c, &out, phis, |p| p.1).into(),
                    scan_argmax(&c, &out, thetas, |p| p.0).into(),
                ]);
            }
        }
    }
    Ok(t)
}

fn teleport_error(spec: &ExperimentSpec) -> CliResult<Table> {
    let mut t = Table::new(&["N", "k1_cut", "epsilon", "epsilon_qse", "epsilon_comm", "success_prob"]);
    let grid = SphereGrid::new(spec.grid_theta, spec.grid_phi, 0.5)?;
    for &n in spec.n.values() {
        let c = cfg(n)?;
        for cut in cuts(spec, n, unconditional) {
            let r = sphere_average_error(&c, &PostselectionRule::new(n, cut)?, &grid, spec.correction)?;
            t.push(vec![
                n.into(),
                cut.into(),
                r.epsilon.into(),
                r.epsilon_qse.into(),
                r.epsilon_comm.into(),
                r.success_prob.into(),
            ]);
        }
    }
    Ok(t)
}

fn success_prob(spec: &ExperimentSpec) -> CliResult<Table> {
    let mut t = Table::new(&["N", "theta", "phi", "k1_cut", "k1_cut_ratio", "success_prob", "epsilon"]);
    for &n in spec.n.values() {
        let c = cfg(n)?;
        for alice in alice_states(spec)? {
            for cut in cuts(spec, n, |n| (0..=n / 2).collect()) {
                let out = bob_output(&c, &alice, &PostselectionRule::new(n, cut)?, spec.correction)?;
                t.push(vec![
                    n.into(),
                    alice.theta().into(),
                    alice.phi().into(),
                    cut.into(),
                    (f64::from(cut) / f64::from(n)).into(),
                    out.success_prob.into(),
                    trace_distance(&alice, &out.spins).into(),
                ]);
            }
        }
    }
    Ok(t)
}

fn dephasing(spec: &ExperimentSpec) -> CliResult<Table> {
    let mut t = Table::new(&[
        "N",
        "gamma",
        "k1_cut",
        "theta",
        "phi",
        "epsilon",
        "success_prob",
        "equator_epsilon",
    ]);
    let rule = quad(spec)?;
    for &n in spec.n.values() {
        let c = cfg(n)?;
        for &gamma in spec.gamma.values() {
            let deph = DephasingConfig::new(gamma, &c)?;
            for cut in cuts(spec, n, unconditional) {
                let post = PostselectionRule::new(n, cut)?;
                let equator = dephased_equator_error(&c, &deph, &post, &rule, spec.correction, spec.grid_phi)?;
                for alice in alice_states(spec)? {
                    let out = dephased_bob_output(&c, &deph, &alice, &post, &rule, spec.correction)?;
                    t.push(vec![
                        n.into(),
                        gamma.into(),
                        cut.into(),
                        alice.theta().into(),
                        alice.phi().into(),
                        trace_distance(&alice, &out.spins).into(),
                        out.success_prob.into(),
                        equator.into(),
                    ]);
                }
            }
        }
    }
    Ok(t)
}

fn bounds(spec: &ExperimentSpec) -> CliResult<Table> {
    let mut t = Table::new(&["N", "epsilon_qse", "epsilon_comm"]);
    let comm: f64 = comm_bound(&CommQuadrature::new(spec.grid_theta, spec.grid_phi)?)?;
    for &n in spec.n.values() {
        t.push(vec![n.into(), qse_bound::<f64>(n).into(), comm.into()]);
    }
    Ok(t)
}

/// The swept states followed by `spec.states` uniform random ones from `seed`.
fn oracle_states(spec: &ExperimentSpec) -> CliResult<Vec<BlochAngles<f64>>> {
    let mut states = alice_states(spec)?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    for _ in 0..spec.states {
        let u: f64 = rng.random_range(-1.0..1.0);
        let phi: f64 = rng.random_range(-PI..PI);
        states.push(BlochAngles::new(u.acos(), phi)?);
    }
    Ok(states)
}

fn oracle_check(spec: &ExperimentSpec) -> CliResult<Report> {
    let mut t = Table::new(&[
        "N",
        "theta",
        "phi",
        "gamma",
        "check",
        "max_deviation",
        "tolerance",
        "pass",
    ]);
    let rule = quad(spec)?;
    let mut failures = 0;
    for &n in spec.n.values() {
        let c = cfg(n)?;
        for alice in oracle_states(spec)? {
            let analytic = JointDistribution::new(&c, &alice)?.probabilities();
            let exact = run_protocol_exact(&c, &alice, spec.correction, BobGateOrder::default())?;
            let dev = analytic
                .iter()
                .zip(exact.distribution())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            let pass = dev < ORACLE_TOL;
            failures += usize::from(!pass);
            t.push(vec![
                n.into(),
                alice.theta().into(),
                alice.phi().into(),
                0.0.into(),
                "exact".into(),
                dev.into(),
                ORACLE_TOL.into(),
                pass.into(),
            ]);
            for &gamma in spec.gamma.values().iter().filter(|&&g| g > 0.0) {
                let (dev, tol) = monte_carlo_deviation(spec, &c, &alice, gamma, &rule)?;
                let pass = dev <= tol;
                failures += usize::from(!pass);
                t.push(vec![
                    n.into(),
                    alice.theta().into(),
                    alice.phi().into(),
                    gamma.into(),
                    "monte-carlo".into(),
                    dev.into(),
                    tol.into(),
                    pass.into(),
                ]);
            }
        }
    }
    Ok(Report { table: t, failures })
}

/// Deviation and tolerance at the entry closest to failing, with per-entry
/// tolerance `max(5e-2, 3 se)`.
fn monte_carlo_deviation(
    spec: &ExperimentSpec,
    c: &ProtocolConfig<f64>,
    alice: &BlochAngles<f64>,
    gamma: f64,
    rule: &QuadratureRule<f64>,
) -> CliResult<(f64, f64)> {
    let mc = dephase_monte_carlo(c, alice, gamma, spec.trajectories, spec.seed, spec.correction)?;
    let quad = dephased_distribution(c, &DephasingConfig::new(gamma, c)?, alice, rule)?.probabilities();
    let mut worst = (f64::NEG_INFINITY, 0.0, MC_ABS_TOL);
    for ((&p, &se), &q) in mc.distribution().iter().zip(mc.standard_errors()).zip(&quad) {
        let tol = MC_ABS_TOL.max(MC_SIGMAS * se);
        let d = (p - q).abs();
        if d / tol > worst.0 {
            worst = (d / tol, d, tol);
        }
    }
    Ok((worst.1, worst.2))
}
