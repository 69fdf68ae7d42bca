use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::coherent::{optimal_pair, optimal_sequence, threshold_set, CoherentFamily, Direction, PairResult};
use crate::error::{Error, Result};
use crate::experiment::config::{Config, ExperimentKind};
use crate::experiment::{box_runs, Report};
use crate::grid::Grid;
use crate::oseledets::{
    align_parity, convergence_delta, discrete_approx, eigenvector, nonzero_eigenvalues, normalize_l1,
    positive_part_bound, OseledetsApprox,
};
use crate::systems::{MapFamily, SymbolSequence};
use crate::transfer::io::{write_coo, write_vector};
use crate::transfer::{
    rho_hat, ulam_family, ulam_flow_snapshots, FamilyMatrices, LinearOperator, TransferMatrix,
};

pub(super) fn execute(config: &Config) -> Result<Report> {
    let mut report = Report::default();
    let grid = config.grid()?;
    report.put_text("experiment", config.experiment.name());
    report.put_text("boxes", grid.len().to_string());
    report.put_text("q", config.q.to_string());
    report.put_text("m", config.m.to_string());
    report.put_text("n_push", config.n_push.to_string());
    match config.experiment {
        ExperimentKind::SingleMap => single_map(config, &grid, &mut report)?,
        ExperimentKind::Periodic3 => periodic3(config, &grid, &mut report)?,
        ExperimentKind::Aperiodic4 => aperiodic4(config, &grid, &mut report)?,
        ExperimentKind::Wave2d => wave2d(config, &grid, &mut report)?,
    }
    Ok(report)
}

fn vector_csv(v: &[f64]) -> Result<String> {
    let mut buf = Vec::new();
    write_vector(v, &mut buf)?;
    Ok(String::from_utf8(buf).expect("CSV is ASCII"))
}

/// Column sums, mass conservation on a random unit-mass vector, and
/// optionally the matrix files.
fn structural(config: &Config, report: &mut Report, label: &str, mats: &[&TransferMatrix]) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.svd.seed);
    let mut worst: f64 = 0.0;
    for (i, p) in mats.iter().enumerate() {
        report.check(
            format!("{label}_{i}_columns_stochastic"),
            p.columns_are_stochastic(),
            "",
        );
        let mut f: Vec<f64> = (0..p.dim()).map(|_| rng.random_range(-1.0..1.0)).collect();
        normalize_l1(&mut f)?;
        let pf = p.apply(&f)?;
        worst = worst.max((pf.iter().sum::<f64>() - f.iter().sum::<f64>()).abs());
        if config.write_matrices {
            let mut buf = Vec::new();
            write_coo(p, &mut buf)?;
            report.file(
                format!("matrices/{label}_{i}.coo"),
                String::from_utf8(buf).expect("COO text is ASCII"),
            );
        }
    }
    report.put(format!("{label}_mass_defect"), worst);
    report.check(format!("{label}_mass_conservation"), worst < 1e-12, format!("{worst:e}"));
    Ok(())
}

/// Spectrum, amplitudes and every stored vector.
fn record_approx(report: &mut Report, approx: &OseledetsApprox, prefix: &str) -> Result<()> {
    let mut csv = String::from("j,sigma,amplitude\n");
    for (j, (s, l)) in approx
        .spectrum
        .singular_values
        .iter()
        .zip(&approx.amplitudes)
        .enumerate()
    {
        report.put(format!("{prefix}sigma_{}", j + 1), *s);
        report.put(format!("{prefix}amplitude_{}", j + 1), *l);
        let _ = writeln!(csv, "{},{s:?},{l:?}", j + 1);
    }
    report.put_text(format!("{prefix}svd_sweeps"), approx.spectrum.sweeps.to_string());
    let defect = approx.spectrum.orthonormality_defect();
    report.check(format!("{prefix}orthonormality"), defect < 1e-8, format!("{defect:e}"));
    report.file(format!("{prefix}spectrum.csv"), csv);
    let mut worst: f64 = 0.0;
    for (t, vectors) in approx.checkpoints.iter().enumerate() {
        for (j, v) in vectors.iter().enumerate() {
            worst = worst.max((v.iter().map(|x| x.abs()).sum::<f64>() - 1.0).abs());
            report.file(format!("vectors/{prefix}checkpoint_{t}_mode_{}.csv", j + 1), vector_csv(v)?);
        }
    }
    report.check(format!("{prefix}unit_vectors"), worst < 1e-12, format!("{worst:e}"));
    Ok(())
}

fn sign_name(d: Direction) -> &'static str {
    match d {
        Direction::Above => "plus",
        Direction::Below => "minus",
    }
}

fn record_pair(report: &mut Report, grid: &Grid, pair: &PairResult) {
    let key = format!("pair_{}", sign_name(pair.direction));
    report.put(format!("{key}_rho"), pair.rho);
    report.put(format!("{key}_threshold"), pair.threshold);
    report.put(format!("{key}_matched_threshold"), pair.matched_threshold);
    report.put(format!("{key}_measure"), pair.source.measure());
    report.put(format!("{key}_matched_measure"), pair.target.measure());
    if grid.dim() == 1 {
        report.put_text(format!("{key}_source"), box_runs(&pair.source, true));
        report.put_text(format!("{key}_target"), box_runs(&pair.target, true));
    } else {
        report.put_text(format!("{key}_source_components"), grid.components(&pair.source).len().to_string());
        report.put_text(format!("{key}_target_components"), grid.components(&pair.target).len().to_string());
    }
    let best = pair.curve.iter().map(|c| c.rho).fold(f64::NEG_INFINITY, f64::max);
    report.check(
        format!("{key}_is_curve_maximum"),
        (best - pair.rho).abs() < 1e-12,
        format!("curve max {best:?}, reported {:?}", pair.rho),
    );
    let mut csv = String::from("threshold,measure,matched_measure,rho\n");
    for c in &pair.curve {
        let _ = writeln!(csv, "{:?},{:?},{:?},{:?}", c.threshold, c.measure, c.matched_measure, c.rho);
    }
    report.file(format!("threshold_curve_{}.csv", sign_name(pair.direction)), csv);
}

fn record_family(report: &mut Report, grid: &Grid, fam: &CoherentFamily) -> Result<()> {
    let s = sign_name(fam.direction);
    let key = format!("family_{s}");
    report.put(format!("{key}_level"), fam.level);
    report.put(format!("{key}_mean_rho"), fam.mean_rho);
    report.put(format!("{key}_mean_rho_connected"), fam.mean_rho_connected);
    let n = grid.len() as f64;
    let mut csv = String::from("k,threshold,measure,components,rho,set\n");
    let mut within = true;
    for (k, m) in fam.members.iter().enumerate() {
        within &= (m.raw.measure() - fam.level).abs() <= 1.0 / n + 1e-12;
        within &= (m.set.measure() - fam.level).abs() <= 1.0 / n + 1e-12;
        report.put(format!("{key}_threshold_{k}"), m.threshold);
        report.put_text(format!("{key}_components_{k}"), m.components.to_string());
        let runs = box_runs(&m.set, true);
        report.put_text(format!("{key}_set_{k}"), runs.clone());
        if let Some(rho) = m.rho {
            report.put(format!("{key}_rho_{k}"), rho);
        }
        let rho = m.rho.map_or(String::new(), |r| format!("{r:?}"));
        let _ = writeln!(
            csv,
            "{k},{:?},{:?},{},{rho},{runs}",
            m.threshold,
            m.set.measure(),
            m.components
        );
        let mut flags = String::from("box,in_set\n");
        let mask = m.set.mask();
        for (i, b) in mask.iter().enumerate() {
            let _ = writeln!(flags, "{i},{}", u8::from(*b));
        }
        report.file(format!("sets/{s}_k{k}.csv"), flags);
    }
    report.check(format!("{key}_common_measure"), within, "");
    let mut curve = String::from("level,mean_rho\n");
    for (l, r) in &fam.curve {
        let _ = writeln!(curve, "{l:?},{r:?}");
    }
    report.file(format!("rho_mean_{s}.csv"), curve);
    report.file(format!("family_{s}.csv"), csv);
    Ok(())
}

fn record_eigenvalues(report: &mut Report, dense: &nalgebra::DMatrix<f64>, prefix: &str) -> Result<Vec<f64>> {
    let eigs = nonzero_eigenvalues(dense, 1e-10)?;
    for (j, z) in eigs.iter().enumerate() {
        report.put(format!("{prefix}eigenvalue_{}_re", j + 1), z.re);
        report.put(format!("{prefix}eigenvalue_{}_im", j + 1), z.im);
    }
    Ok(eigs.iter().filter(|z| z.im == 0.0).map(|z| z.re).collect())
}

fn single_map(config: &Config, grid: &Grid, report: &mut Report) -> Result<()> {
    let family = MapFamily::single();
    let p = ulam_family(grid, &family, 1, config.q, 0)?;
    structural(config, report, "map", &[&p])?;
    report.check("map_rows_stochastic", p.rows_are_stochastic(), "");
    let dense = p.to_dense();
    let real = record_eigenvalues(report, &dense, "")?;
    let lambda = *real
        .get(1)
        .ok_or_else(|| Error::Precondition("the map has no second real eigenvalue".into()))?;
    let f2 = eigenvector(&dense, lambda)?;
    report.file("vectors/eigenvector_2.csv", vector_csv(&f2)?);
    let positive = threshold_set(&f2, 0.0, Direction::Above);
    report.put_text("eigenvector_2_positive_set", box_runs(&positive, true));
    report.put("eigenvector_2_positive_rho", rho_hat(&p, &positive, &positive)?);
    let bound = positive_part_bound(&p, &f2)?;
    report.put("bound_lhs", bound.lhs);
    report.put("bound_rhs", bound.rhs);
    report.check("positive_part_bound", bound.pass, format!("{:e} <= {:e}", bound.lhs, bound.rhs));

    let horizon = (config.m + config.family_steps) as i64;
    let symbols = SymbolSequence::periodic(&[1], -horizon, horizon)?;
    let cache = FamilyMatrices::new(grid, &family, config.q)?;
    let approx = discrete_approx(&cache, &symbols, 0, config.m, config.n_push, config.modes, config.family_steps, &config.svd)?;
    record_approx(report, &approx, "")
}

fn periodic3(config: &Config, grid: &Grid, report: &mut Report) -> Result<()> {
    let family = MapFamily::periodic3();
    let cache = FamilyMatrices::new(grid, &family, config.q)?;
    let factors: Vec<&TransferMatrix> = (1..=3).map(|s| cache.for_symbol(s)).collect::<Result<_>>()?;
    structural(config, report, "map", &factors)?;
    let horizon = (config.m + config.family_steps + 3) as i64;
    let symbols = SymbolSequence::periodic(&[1, 2, 3], -horizon, horizon)?;
    let triple = cache.cocycle(&symbols, 0, 3)?;
    let dense = triple.compose();
    record_eigenvalues(report, &dense, "product_")?;

    let approx = discrete_approx(&cache, &symbols, 0, config.m, config.n_push, config.modes, config.family_steps, &config.svd)?;
    record_approx(report, &approx, "")?;
    for (t, w) in approx.mode(1).iter().enumerate() {
        let set = threshold_set(w, 0.0, Direction::Above);
        report.put_text(format!("mode_2_positive_set_{t}"), box_runs(&set, true));
    }
    Ok(())
}

fn aperiodic4(config: &Config, grid: &Grid, report: &mut Report) -> Result<()> {
    let family = MapFamily::aperiodic4();
    let cache = FamilyMatrices::new(grid, &family, config.q)?;
    let factors: Vec<&TransferMatrix> = (1..=4).map(|s| cache.for_symbol(s)).collect::<Result<_>>()?;
    structural(config, report, "map", &factors)?;

    let widest = config.delta_n.iter().copied().max().unwrap_or(0);
    let first = -(config.n_push.max(widest) as i64) - 1;
    let last = (config.m.max(config.family_steps).max(widest + 1) + 1) as i64;
    let symbols = SymbolSequence::driving(first, last)?;
    symbols.check_adjacency()?;
    report.put_text(
        "symbols_0_to_20",
        symbols.slice(0, 21)?.iter().map(|s| s.to_string()).collect::<String>(),
    );

    let k = config.family_steps;
    let approx = discrete_approx(&cache, &symbols, 0, config.m, config.n_push, config.modes, k, &config.svd)?;
    record_approx(report, &approx, "")?;
    let ws = approx.mode(1);
    let steps = (0..k as i64)
        .map(|t| cache.step(&symbols, t))
        .collect::<Result<Vec<_>>>()?;
    for dir in [Direction::Above, Direction::Below] {
        let pair = optimal_pair(&ws[0], &ws[1], &steps[0], dir)?;
        record_pair(report, grid, &pair);
        let fam = optimal_sequence(&ws, &steps, grid, dir)?;
        record_family(report, grid, &fam)?;
    }

    if !config.delta_n.is_empty() {
        let deltas = convergence_delta(&cache, &symbols, config.delta_n.iter().copied(), 1, &config.svd)?;
        let mut csv = String::from("N,delta\n");
        for (n, d) in deltas {
            report.put(format!("delta_{n}"), d);
            let _ = writeln!(csv, "{n},{d:?}");
        }
        report.file("delta_n.csv", csv);
    }
    Ok(())
}

fn wave2d(config: &Config, grid: &Grid, report: &mut Report) -> Result<()> {
    let system = &config.flow;
    let (m, n) = (config.m as f64, config.n_push as f64);
    let horizon = *config.checkpoints.last().expect("validated");
    report.put("reference_time", n);
    report.put("horizon", horizon);

    // Seed and push matrices for the reference time t = N, all started at t = 0.
    let seed_times = if config.n_push < config.m { vec![n, m] } else { vec![m] };
    let first = ulam_flow_snapshots(grid, system, 0.0, &seed_times, config.q)?;
    // The same construction shifted by the pair horizon.
    let second = ulam_flow_snapshots(grid, system, horizon, &seed_times, config.q)?;
    // Push-forwards from the reference time to each checkpoint.
    let pushes = ulam_flow_snapshots(grid, system, n, &config.checkpoints, config.q)?;
    let all: Vec<&TransferMatrix> = first.iter().chain(&second).chain(&pushes).collect();
    structural(config, report, "flow", &all)?;

    let (long, push) = (first.last().expect("one snapshot"), &first[0]);
    let mut approx = OseledetsApprox::build(long, m, push, n, config.modes, &config.svd)?;
    for p in &pushes {
        let pushed = approx.checkpoints[0]
            .iter()
            .map(|w| {
                let mut v = p.apply(w)?;
                normalize_l1(&mut v)?;
                Ok(v)
            })
            .collect::<Result<Vec<_>>>()?;
        approx.checkpoints.push(pushed);
    }
    record_approx(report, &approx, "")?;
    let (long, push) = (second.last().expect("one snapshot"), &second[0]);
    let later = OseledetsApprox::build(long, m, push, n, config.modes, &config.svd)?;
    record_approx(report, &later, "later_")?;

    let source = approx.vector(0, 1).to_vec();
    let pushed = approx.vector(approx.checkpoints.len() - 1, 1).to_vec();
    let mut target = later.vector(0, 1).to_vec();
    align_parity(&mut target, &pushed);
    let dot: f64 = pushed.iter().zip(&target).map(|(a, b)| a * b).sum();
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    report.put("push_cosine", dot.abs() / (norm(&pushed) * norm(&target)));
    let step = pushes.last().expect("one checkpoint");
    report.put("push_diagonal_mass", step.diagonal_mass());
    report.file("vectors/aligned_later_mode_2.csv", vector_csv(&target)?);

    for dir in [Direction::Above, Direction::Below] {
        let pair = optimal_pair(&source, &target, step, dir)?;
        record_pair(report, grid, &pair);
    }
    Ok(())
}
