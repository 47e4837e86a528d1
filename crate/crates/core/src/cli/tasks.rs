//! Task dispatch: each task turns a validated config into result tables.

use crate::collective::DickeBasis;
use crate::error::Result;
use crate::liouville::{
    build_liouvillian, evolve_rho_sampled, liouvillian_gap_with, magnetization, steady_state_detailed, DensityMatrix,
};
use crate::meanfield::{
    detect_limit_cycle, find_fixed_points, integrate_trajectory_sampled, BlochVector, FixedPoint,
};
use crate::sweep::{
    analytic_boundaries, hysteresis_experiment, multistability_map, phase_diagram, HysteresisSolver, PhasePoint,
    QuantumOptions, Solver,
};

use super::config::{InitialRho, RunConfig, Task};
use super::output::{Cell, Table};

fn fixed_point_cells(fp: &FixedPoint) -> Vec<Cell> {
    let mut row = vec![fp.state.x.into(), fp.state.y.into(), fp.state.z.into(), fp.stability.as_str().into()];
    for ev in &fp.jacobian_eigenvalues {
        row.push(ev.re.into());
        row.push(ev.im.into());
    }
    row.push(fp.residual.into());
    row
}

const FIXED_POINT_COLUMNS: [&str; 11] =
    ["X", "Y", "Z", "stability", "re_l1", "im_l1", "re_l2", "im_l2", "re_l3", "im_l3", "residual"];

fn phase_tables(rows: &[PhasePoint], quantum: bool) -> Vec<Table> {
    let mut cols = vec!["index", "V", "g", "p", "gamma"];
    if quantum {
        cols.push("N");
    }
    cols.extend(["stable_count", "selected_X", "selected_Y", "selected_Z", "limit_cycle", "gap", "zero_multiplicity", "error"]);
    let mut table = Table::new("phase_diagram", &cols);
    let mut stable = Table::new("stable_points", &[&["index", "k"][..], &FIXED_POINT_COLUMNS[..]].concat());
    for r in rows {
        let p = &r.params;
        let mut row: Vec<Cell> = vec![r.index.into(), p.v.into(), p.g.into(), p.p.into(), p.gamma.into()];
        if quantum {
            row.push(p.n.into());
        }
        row.extend([
            r.stable_count.into(),
            r.selected.x.into(),
            r.selected.y.into(),
            r.selected.z.into(),
            r.limit_cycle.into(),
            r.gap.into(),
            r.zero_multiplicity.into(),
            r.error.clone().into(),
        ]);
        table.push(row);
        for (k, fp) in r.stable_points.iter().enumerate() {
            let mut srow: Vec<Cell> = vec![r.index.into(), k.into()];
            srow.extend(fixed_point_cells(fp));
            stable.push(srow);
        }
    }
    if quantum {
        vec![table]
    } else {
        vec![table, stable]
    }
}

fn initial_rho(basis: DickeBasis, init: &InitialRho) -> Result<DensityMatrix> {
    Ok(match init {
        InitialRho::Ground => DensityMatrix::ground(basis),
        InitialRho::Top => DensityMatrix::top(basis),
        InitialRho::MaximallyMixed => DensityMatrix::maximally_mixed(basis),
        InitialRho::Coherent(v) => DensityMatrix::coherent(basis, &BlochVector::from_array(*v))?,
    })
}

/// Runs a validated, resolved config.
pub fn execute(cfg: &RunConfig) -> Result<Vec<Table>> {
    let seed = cfg.seed_value();
    let workers = cfg.worker_count();
    match cfg.task {
        Task::MfFixedPoints => {
            let model = cfg.model.expect("validated");
            let mf = cfg.meanfield.clone().unwrap_or_default();
            let mut t = Table::new("fixed_points", &[&["index"][..], &FIXED_POINT_COLUMNS[..]].concat());
            for (i, fp) in find_fixed_points(&model, mf.n_seeds, seed).iter().enumerate() {
                let mut row: Vec<Cell> = vec![i.into()];
                row.extend(fixed_point_cells(fp));
                t.push(row);
            }
            Ok(vec![t])
        }
        Task::MfEvolve => {
            let model = cfg.model.expect("validated");
            let e = cfg.evolve.as_ref().expect("validated");
            let mut traj_t = Table::new("trajectory", &["trajectory", "t", "X", "Y", "Z"]);
            let mut cyc_t = Table::new(
                "limit_cycles",
                &["trajectory", "X0", "Y0", "Z0", "limit_cycle", "period", "z_amplitude", "z_mean", "final_X", "final_Y", "final_Z"],
            );
            for (k, init) in e.initial.iter().enumerate() {
                let start = BlochVector::from_array(*init).normalized();
                let traj = integrate_trajectory_sampled(&start, &model, e.t_end, e.rel_tol, e.abs_tol, e.sample_interval)?;
                for (t, s) in traj.times.iter().zip(&traj.states) {
                    traj_t.push(vec![k.into(), (*t).into(), s.x.into(), s.y.into(), s.z.into()]);
                }
                let cycle = detect_limit_cycle(&traj, e.transient_fraction).unwrap_or(None);
                let last = traj.last();
                cyc_t.push(vec![
                    k.into(),
                    start.x.into(),
                    start.y.into(),
                    start.z.into(),
                    cycle.is_some().into(),
                    cycle.map(|c| c.period).into(),
                    cycle.map(|c| c.z_amplitude).into(),
                    cycle.map(|c| c.z_mean).into(),
                    last.x.into(),
                    last.y.into(),
                    last.z.into(),
                ]);
            }
            Ok(vec![traj_t, cyc_t])
        }
        Task::MfPhaseDiagram => {
            let grid = cfg.grid_spec().expect("validated");
            let opts = cfg.meanfield.clone().unwrap_or_default().options(seed);
            Ok(phase_tables(&phase_diagram(&grid, &Solver::MeanField(opts), workers)?, false))
        }
        Task::Multistability => {
            let grid = cfg.grid_spec().expect("validated");
            let opts = cfg.meanfield.clone().unwrap_or_default().options(seed);
            Ok(phase_tables(&multistability_map(&grid, grid.fixed.v, workers, &opts)?, false))
        }
        Task::QuantumSteady | Task::QuantumGap => {
            let model = cfg.model.expect("validated");
            let n = model.n.expect("validated");
            let gap = cfg.task == Task::QuantumGap;
            let spectral = cfg.spectral.clone().unwrap_or_default();
            if let Some(grid) = cfg.grid_spec() {
                let q = QuantumOptions { n, gap, gap_method: spectral.method, spectral: spectral.options() };
                return Ok(phase_tables(&phase_diagram(&grid, &Solver::Quantum(q), workers)?, true));
            }
            let basis = DickeBasis::new(n)?;
            let l = build_liouvillian(&model, basis)?;
            let mut tables = Vec::new();
            let rho = if gap {
                let res = liouvillian_gap_with(&l, spectral.method, &spectral.options())?;
                let mut g = Table::new("gap", &["V", "g", "p", "gamma", "N", "method", "gap", "zero_multiplicity", "zero_tolerance", "warning"]);
                g.push(vec![
                    model.v.into(),
                    model.g.into(),
                    model.p.into(),
                    model.gamma.into(),
                    n.into(),
                    format!("{:?}", res.method).to_lowercase().into(),
                    res.gap.into(),
                    res.zero_multiplicity.into(),
                    res.zero_tolerance.into(),
                    res.warning.clone().into(),
                ]);
                let mut ev = Table::new("eigenvalues", &["k", "re", "im"]);
                for (k, v) in res.eigenvalues.iter().enumerate() {
                    ev.push(vec![k.into(), v.re.into(), v.im.into()]);
                }
                tables.push(g);
                tables.push(ev);
                res.steady_state
            } else {
                let ss = steady_state_detailed(&l)?;
                let m = magnetization(&ss.rho);
                let mut s = Table::new(
                    "steady_state",
                    &["V", "g", "p", "gamma", "N", "X", "Y", "Z", "purity", "residual", "min_eigenvalue", "zero_multiplicity"],
                );
                s.push(vec![
                    model.v.into(),
                    model.g.into(),
                    model.p.into(),
                    model.gamma.into(),
                    n.into(),
                    m.x.into(),
                    m.y.into(),
                    m.z.into(),
                    ss.rho.purity().into(),
                    ss.residual.into(),
                    ss.min_eigenvalue.into(),
                    ss.zero_multiplicity.into(),
                ]);
                tables.push(s);
                ss.rho
            };
            let mut pop = Table::new("populations", &["m", "population"]);
            for i in 0..basis.dim() {
                pop.push(vec![basis.m(i).into(), rho.matrix()[(i, i)].re.into()]);
            }
            tables.push(pop);
            Ok(tables)
        }
        Task::QuantumEvolve => {
            let model = cfg.model.expect("validated");
            let q = cfg.quantum_evolve.as_ref().expect("validated");
            let basis = DickeBasis::new(model.n.expect("validated"))?;
            let rho0 = initial_rho(basis, &q.initial)?;
            let (_, samples) = evolve_rho_sampled(&rho0, &model, q.t_end, q.tol, q.sample_interval)?;
            let mut t = Table::new("magnetization", &["t", "X", "Y", "Z"]);
            for (time, m) in samples {
                t.push(vec![time.into(), m.x.into(), m.y.into(), m.z.into()]);
            }
            Ok(vec![t])
        }
        Task::Hysteresis => {
            let spec = cfg.hysteresis_spec().expect("validated");
            let res = hysteresis_experiment(&spec, workers)?;
            let n: Cell = match spec.solver {
                HysteresisSolver::Quantum { n, .. } => n.into(),
                HysteresisSolver::MeanField { .. } => Cell::Empty,
            };
            let mut b = Table::new("branches", &["direction", "step", "p", "N", "X", "Y", "Z"]);
            for (name, branch) in [("up", &res.up), ("down", &res.down)] {
                for (k, pt) in branch.iter().flatten().enumerate() {
                    b.push(vec![
                        name.into(),
                        k.into(),
                        pt.p.into(),
                        n.clone(),
                        pt.state.x.into(),
                        pt.state.y.into(),
                        pt.state.z.into(),
                    ]);
                }
            }
            let mut iv = Table::new("bistable_intervals", &["p_start", "p_end", "threshold"]);
            for (a, z) in &res.intervals {
                iv.push(vec![(*a).into(), (*z).into(), res.threshold.into()]);
            }
            Ok(vec![b, iv])
        }
        Task::Boundaries => {
            let bc = cfg.boundaries.as_ref().expect("validated");
            let mut t = Table::new(
                "boundaries",
                &["V", "gc_p1", "gplus_c", "gminus_c", "gplus_c_abs", "gminus_c_abs", "V_c"],
            );
            for r in analytic_boundaries(bc.v_min, bc.v_max, bc.count, bc.gamma)? {
                t.push(vec![
                    r.v.into(),
                    r.gc_p1.into(),
                    r.gplus_c.into(),
                    r.gminus_c.into(),
                    r.gplus_c_abs.into(),
                    r.gminus_c_abs.into(),
                    r.v_c.into(),
                ]);
            }
            Ok(vec![t])
        }
    }
}
