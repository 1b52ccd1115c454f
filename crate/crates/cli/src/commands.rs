//! One runner per command. Each returns the data rows, the summary and
//! whether every contract of the run held.

use hessq::concavity::{gap_from_parts, verify_batch, BatchConfig, Lemma};
use hessq::fields::calculus::{b_field, empirical_forcing, jacobi_terms, PointFlag};
use hessq::fields::legendre::{gradient_map_monotonicity, legendre_field, DualGrid};
use hessq::fields::newton::{divergence_refinement, newton_divergence, refinement_fields};
use hessq::operator::relative_variation;
use hessq::sampling::{log_uniform, stream};
use hessq::singular::{convex_radius, holder_estimate, profile, viscosity_limit_check, SingularFamily};
use hessq::stats::log_log_slope;
use hessq::symfun::{identity_residuals, EigenTuple};
use hessq::{EigenTuple64, Matrix64, QuotientOperator, ScalarField64};

use crate::config::{Command, ExperimentConfig, Params, TestField};
use crate::report::{real, Cell, Report};
use crate::{read_field, write_field, CliError, Hooks, Outcome};

type Run = Result<Outcome, CliError>;

pub fn dispatch(cfg: &ExperimentConfig, hooks: &Hooks<'_>) -> Run {
    match cfg.command {
        Command::Identities => identities(cfg),
        Command::Concavity => concavity(cfg, hooks),
        Command::Induction => induction(cfg),
        Command::SpectralBounds => spectral_bounds(cfg),
        Command::Ellipticity => ellipticity(cfg),
        Command::Singular => singular(cfg),
        Command::Jacobi => jacobi(cfg),
        Command::Divergence => divergence(cfg),
        Command::Legendre => legendre(cfg),
    }
}

fn log_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..points).map(|i| (a + (b - a) * i as f64 / (points - 1) as f64).exp()).collect()
}

fn tuple_text(v: &[f64]) -> String {
    v.iter().map(|&x| real(x)).collect::<Vec<_>>().join(";")
}

/// Draw `index` of the positive log-uniform tuple stream.
fn sample_tuple(cfg: &ExperimentConfig, index: u64) -> Result<EigenTuple64, CliError> {
    let mut rng = stream(cfg.seed, index);
    Ok(EigenTuple::new(log_uniform(&mut rng, cfg.n, 1e-3, 1e3))?)
}

fn input_field(cfg: &ExperimentConfig, built_in: impl FnOnce() -> Result<ScalarField64, CliError>) -> Result<ScalarField64, CliError> {
    let field = match &cfg.field_in {
        Some(path) => read_field(path)?,
        None => built_in()?,
    };
    if let Some(path) = &cfg.field_out {
        write_field(path, &field)?;
    }
    Ok(field)
}

fn identities(cfg: &ExperimentConfig) -> Run {
    const NAMES: [&str; 4] = ["splitting", "minor_sum", "euler", "second_moment"];
    let tol = cfg.tol("residual");
    let mut worst = [(0.0f64, 0u64); 4];
    for i in 0..cfg.samples {
        let r = identity_residuals(&sample_tuple(cfg, i)?, cfg.k)?.normalized();
        for (w, v) in worst.iter_mut().zip(r) {
            if v > w.0 || v.is_nan() {
                *w = (v, i);
            }
        }
    }
    let mut report = Report::new(&["identity", "max_normalized_residual", "witness_index", "witness_lambda"]);
    let mut passed = true;
    for (name, (v, i)) in NAMES.iter().zip(worst) {
        let lam = sample_tuple(cfg, i)?;
        report.row(vec![(*name).into(), v.into(), i.into(), tuple_text(lam.values()).into()]);
        if !(v <= tol) {
            passed = false;
            report.result("witness", format!("{name} index {i} lambda {}", tuple_text(lam.values())));
        }
    }
    report.result("max_normalized_residual", worst.iter().map(|w| w.0).fold(0.0, f64::max));
    Ok(Outcome { report, passed })
}

fn concavity(cfg: &ExperimentConfig, hooks: &Hooks<'_>) -> Run {
    let op = QuotientOperator::new(cfg.n, cfg.k)?;
    let lemma = Lemma::for_operator(&op)?;
    let batch = verify_batch(lemma, &BatchConfig::new(cfg.n, cfg.samples, cfg.seed), hooks.tensor)?;

    // ξ = e₁ at the isotropic tuple is an equality case for k = n − 1
    let equality = if lemma == Lemma::NMinusOne {
        let lam = EigenTuple::isotropic(cfg.n, 1.0)?;
        let mut xi = vec![0.0; cfg.n];
        xi[0] = 1.0;
        let hess = (hooks.tensor)(&op, &lam)?;
        let ev = gap_from_parts(op.value(&lam)?, &op.grad_diag(&lam)?, &hess.diag_block, 1.0, &xi, lemma.factor(cfg.n));
        Some(ev.gap)
    } else {
        None
    };

    let mut cols = vec!["witness_index".to_string()];
    cols.extend((1..=cfg.n).map(|i| format!("lambda_{i}")));
    cols.extend((1..=cfg.n).map(|i| format!("xi_{i}")));
    cols.extend(["lhs", "rhs", "gap", "scale", "normalized_gap"].map(String::from));
    let mut report = Report { columns: cols, ..Report::default() };
    let w = &batch.witness;
    let mut row: Vec<Cell> = vec![w.index.into()];
    row.extend(w.lambda.values().iter().map(|&x| Cell::from(x)));
    row.extend(w.xi.iter().map(|&x| Cell::from(x)));
    row.extend([w.evaluation.lhs, w.evaluation.rhs, w.evaluation.gap, w.evaluation.scale, batch.min_gap].map(Cell::from));
    report.row(row);

    let mut passed = batch.passes(cfg.tol("gap"));
    report.result("min_gap", batch.min_gap);
    if let Some(d) = &batch.diagnostics {
        report.result("witness_eta", tuple_text(&d.eta));
        report.result("witness_i", d.i_value);
    }
    if let Some(g) = equality {
        report.result("equality_gap", g);
        if !(g.abs() <= cfg.tol("equality")) {
            passed = false;
            report.result("witness", "equality case lambda = (1, ..., 1), xi = e_1");
        }
    }
    if !batch.passes(cfg.tol("gap")) {
        report.result("witness", format!("sample {} lambda {} xi {}", w.index, tuple_text(w.lambda.values()), tuple_text(&w.xi)));
    }
    Ok(Outcome { report, passed })
}

fn induction(cfg: &ExperimentConfig) -> Run {
    let Params::Induction { l, points } = cfg.params else { unreachable!() };
    let op = QuotientOperator::new(cfg.n, cfg.k)?;
    let rows = hessq::concavity::induction_sweep(&op, l, (0.5, 2.0), 5, &log_grid(1e2, 1e6, points))?;
    let mut report = Report::new(&["lambda1", "c0", "worst_f"]);
    for r in &rows {
        report.row(vec![r.lambda1.into(), r.c0.into(), r.worst_f.into()]);
    }
    report.meta("f_range", "[0.5, 2]");
    let spread = relative_variation(rows.iter().map(|r| r.c0));
    report.result("c0_variation", spread);
    let passed = spread <= cfg.tol("plateau");
    if !passed {
        let top = rows.iter().max_by(|a, b| a.c0.total_cmp(&b.c0)).expect("non-empty sweep");
        report.result("witness", format!("lambda1 {}", real(top.lambda1)));
    }
    Ok(Outcome { report, passed })
}

fn spectral_bounds(cfg: &ExperimentConfig) -> Run {
    let op = QuotientOperator::new(cfg.n, cfg.k)?;
    let tol = cfg.tol("slack");
    let mut names = Vec::new();
    let mut worst: Vec<(f64, u64)> = Vec::new();
    let mut constant = 0.0;
    for i in 0..cfg.samples {
        let r = op.eigen_bounds_check(&sample_tuple(cfg, i)?)?;
        constant = r.constant;
        if worst.is_empty() {
            names = r.checks.iter().map(|c| c.name).collect();
            worst = vec![(f64::INFINITY, 0); r.checks.len()];
        }
        for (w, c) in worst.iter_mut().zip(&r.checks) {
            let s = c.normalized_slack();
            if s < w.0 || s.is_nan() {
                *w = (s, i);
            }
        }
    }
    let iso = op.eigen_bounds_check(&EigenTuple::isotropic(cfg.n, 1.7)?)?;
    let mut report = Report::new(&["bound", "min_normalized_slack", "witness_index", "isotropic_slack"]);
    let mut passed = true;
    for (j, (name, (s, i))) in names.iter().zip(&worst).enumerate() {
        report.row(vec![(*name).into(), (*s).into(), (*i).into(), iso.checks[j].normalized_slack().into()]);
        if !(*s >= -tol) {
            passed = false;
            report.result("witness", format!("{name} index {i} lambda {}", tuple_text(sample_tuple(cfg, *i)?.values())));
        }
    }
    let tight = iso.checks.iter().map(|c| c.normalized_slack().abs()).fold(f64::INFINITY, f64::min);
    report.result("constant", constant);
    report.result("isotropic_tight_slack", tight);
    if !(tight <= cfg.tol("tight")) {
        passed = false;
        report.result("witness", "isotropic tuple (1.7, ..., 1.7)");
    }
    Ok(Outcome { report, passed })
}

fn ellipticity(cfg: &ExperimentConfig) -> Run {
    let Params::Ellipticity { f, shift, points } = cfg.params else { unreachable!() };
    let op = QuotientOperator::new(cfg.n, cfg.k)?;
    let rows = op.ellipticity_sweep(f, shift, &log_grid(1e3, 1e6, points))?;
    let mut report = Report::new(&["lambda1", "t", "min_g", "max_g", "ratio", "lambda_nm1", "min_g_scaled", "max_g_scaled"]);
    for r in &rows {
        report.row([r.lambda1, r.t, r.min_g, r.max_g, r.ratio, r.lambda_nm1, r.min_g_scaled, r.max_g_scaled].map(Cell::from).to_vec());
    }
    // k = n−1: G is uniformly elliptic; k = n−2: G/λ_{n−1} is
    let spread = if cfg.k + 1 == cfg.n {
        relative_variation(rows.iter().map(|r| r.ratio))
    } else {
        relative_variation(rows.iter().map(|r| r.min_g_scaled)).max(relative_variation(rows.iter().map(|r| r.max_g_scaled)))
    };
    report.meta("measure", if cfg.k + 1 == cfg.n { "ratio" } else { "g_over_lambda_nm1" });
    report.result("variation", spread);
    let passed = spread <= cfg.tol("variation");
    if !passed {
        report.result("witness", format!("lambda1 {}", real(rows.last().expect("non-empty sweep").lambda1)));
    }
    Ok(Outcome { report, passed })
}

fn singular(cfg: &ExperimentConfig) -> Run {
    let Params::Singular { profile: want_profile, sigma, viscosity } = cfg.params else { unreachable!() };
    let limit = SingularFamily::new(cfg.n, cfg.k, 0.0)?;
    let radii = log_grid(1e-1, 1e-5, 5);
    let holder = holder_estimate(&limit, &radii)?;
    let convex = convex_radius(&limit, 200, 1.0)?;
    let flat_rhos = log_grid(1e-2, 1e-4, 5);
    let flat_f: Vec<f64> = flat_rhos.iter().map(|&r| limit.quotient_f(&limit.plane_point(0.0, r))).collect::<Result<_, _>>()?;
    let flat_slope = log_log_slope(&flat_rhos, &flat_f)?;

    let mut report;
    if want_profile {
        let fam = limit.with_sigma(sigma)?;
        report = Report::new(&["r", "u", "grad_norm", "lambda_min", "f"]);
        for row in profile(&fam, 0.0, &log_grid(1e-1, 1e-4, 13))? {
            let lmin = row.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
            report.row(vec![row.x[1].into(), row.u.into(), row.grad_norm.into(), lmin.into(), row.f.into()]);
        }
    } else {
        report = Report::new(&["r", "gradient_increment"]);
        for (r, d) in holder.radii.iter().zip(&holder.increments) {
            report.row(vec![(*r).into(), (*d).into()]);
        }
    }
    let mut passed = true;
    let mut fail = |report: &mut Report, what: String| {
        passed = false;
        report.result("witness", what);
    };
    report.result("alpha", limit.alpha());
    report.result("exponent", holder.exponent);
    report.result("threshold", holder.threshold);
    report.result("convex_radius", convex.radius);
    report.result("quotient_log_slope", flat_slope);
    if !((holder.exponent - holder.threshold).abs() <= cfg.tol("exponent")) {
        fail(&mut report, format!("exponent {}", real(holder.exponent)));
    }
    if !(convex.radius > 0.0) {
        fail(&mut report, "no convex neighbourhood sampled".into());
    }
    if !(flat_slope.abs() <= cfg.tol("flatness")) {
        fail(&mut report, format!("quotient slope {}", real(flat_slope)));
    }
    if viscosity {
        let r_hat = convex.radius;
        let sigmas = log_grid(1e-1, 1e-6, 6);
        let v = viscosity_limit_check(cfg.n, cfg.k, &sigmas, r_hat / 2.0, 100, cfg.tol("viscosity"))?;
        for row in &v.rows {
            report.result(format!("viscosity.sigma_{}", real(row.sigma)), format!("{};{}", real(row.u_distance), real(row.f_distance)));
        }
        report.result("viscosity.radius", v.radius);
        report.result("viscosity.u_monotone", v.u_monotone);
        report.result("viscosity.f_monotone", v.f_monotone);
        if !v.passes() {
            let last = v.rows.last().expect("non-empty sigma list");
            fail(&mut report, format!("sigma {} u distance {}", real(last.sigma), real(last.u_distance)));
        }
    }
    Ok(Outcome { report, passed })
}

fn exponential_family(n: usize, grid: usize) -> Result<ScalarField64, CliError> {
    Ok(ScalarField64::from_fn(&vec![-0.5; n], &vec![0.5; n], &vec![grid; n], |x: &[f64]| {
        x.iter().enumerate().map(|(i, &xi)| ((i + 1) as f64 * xi).exp()).sum()
    })?)
}

fn jacobi(cfg: &ExperimentConfig) -> Run {
    let Params::Jacobi { grid, big_c } = cfg.params else { unreachable!() };
    let field = input_field(cfg, || exponential_family(cfg.n, grid))?;
    if field.n() != cfg.n {
        return Err(CliError::Config(format!("field has dimension {}, expected n = {}", field.n(), cfg.n)));
    }
    let op = QuotientOperator::new(cfg.n, cfg.k)?;
    let big_c = match big_c {
        Some(c) => c,
        None => empirical_forcing(&field, &op)?,
    };
    let terms = jacobi_terms(&field, &op)?;
    let flagged = b_field(&field)?.count(|f| matches!(f, PointFlag::Multiple(_)));
    let mut report = Report::new(&["nodes", "admitted", "excluded_multiple", "excluded_other", "flagged_multiple", "big_c", "c_max", "min_gap"]);
    let c_max = terms.max_c(big_c);
    let c = c_max.filter(|c| c.is_finite()).unwrap_or(0.0);
    let r = terms.report(c, big_c)?;
    report.row(vec![
        field.len().into(),
        r.admitted.into(),
        r.excluded_multiple.into(),
        r.excluded_other.into(),
        flagged.into(),
        big_c.into(),
        c_max.map_or(Cell::from("none"), Cell::from),
        r.min_gap.into(),
    ]);
    report.result("c_max", c_max.map_or(Cell::from("none"), Cell::from));
    let passed = c_max.is_some_and(|c| c > 0.0) && r.min_gap >= -cfg.tol("gap") * big_c.max(1.0);
    if !passed {
        report.result("witness", format!("node {:?}", r.witness));
    }
    Ok(Outcome { report, passed })
}

fn test_field(which: TestField) -> fn(&[f64]) -> f64 {
    match which {
        TestField::Cubic => |x| x[0].powi(3) + x[1].powi(3) + x[0] * x[1] * x[2],
        TestField::Smooth => |x| (x[0] + 0.3 * x[1]).exp() + (x[1] * x[2]).sin() + x[0].powi(4),
    }
}

fn divergence(cfg: &ExperimentConfig) -> Run {
    let Params::Divergence { test_field: which, cells, levels } = cfg.params else { unreachable!() };
    let fields = match &cfg.field_in {
        Some(path) => vec![read_field(path)?],
        None => {
            let u = test_field(which);
            refinement_fields(&u, &vec![-0.5; cfg.n], &vec![0.5; cfg.n], cells, levels)?
        }
    };
    if let Some(path) = &cfg.field_out {
        write_field(path, fields.last().expect("at least one level"))?;
    }
    if fields[0].n() != cfg.n {
        return Err(CliError::Config(format!("field has dimension {}, expected n = {}", fields[0].n(), cfg.n)));
    }
    let mut report = Report::new(&["spacing", "residual", "floor", "scale"]);
    let refinement = divergence_refinement(&fields, cfg.k)?;
    let mut k1_ok = true;
    for (f, (h, (res, floor))) in fields.iter().zip(refinement.spacing.iter().zip(refinement.residual.iter().zip(&refinement.floor))) {
        let d = newton_divergence(f, cfg.k)?;
        report.row(vec![(*h).into(), (*res).into(), (*floor).into(), d.scale.into()]);
        if cfg.k == 1 {
            k1_ok &= d.max_residual <= cfg.tol("k1") * d.scale;
        }
    }
    report.result("slope", refinement.slope.map_or(Cell::from("undefined"), Cell::from));
    report.result("at_rounding_floor", refinement.at_rounding_floor());
    let passed = if cfg.k == 1 {
        k1_ok
    } else {
        refinement.at_rounding_floor() || refinement.slope.is_some_and(|s| s >= cfg.tol("slope"))
    };
    if !passed {
        report.result("witness", format!("finest residual {}", real(*refinement.residual.last().expect("one level"))));
    }
    Ok(Outcome { report, passed })
}

fn legendre(cfg: &ExperimentConfig) -> Run {
    let Params::Legendre { shift } = cfg.params else { unreachable!() };
    let n = cfg.n;
    // built-in quadratics are paired with a dual lattice on which the
    // conjugate's maximizers are primal nodes
    let (field, dual) = match &cfg.field_in {
        Some(_) => {
            let f = input_field(cfg, || unreachable!())?;
            let d = DualGrid::covering(&f, shift)?;
            (f, d)
        }
        None if n == 2 && shift == 1.0 => {
            let a = Matrix64::from_rows(&[vec![5.0 / 3.0, -4.0 / 3.0], vec![-4.0 / 3.0, 5.0 / 3.0]])?;
            let f = input_field(cfg, || Ok(ScalarField64::from_fn(&[-2.0; 2], &[2.0; 2], &[41; 2], |x: &[f64]| 0.5 * a.quad_form(x))?))?;
            (f, DualGrid::centred(&[0.4; 2], 6))
        }
        None => {
            let h = 0.2;
            let f = input_field(cfg, || {
                Ok(ScalarField64::from_fn(&vec![-1.0; n], &vec![1.0; n], &vec![11; n], |x: &[f64]| 0.5 * x.iter().map(|v| v * v).sum::<f64>())?)
            })?;
            (f, DualGrid::centred(&vec![(1.0 + shift) * h; n], 3))
        }
    };
    let lt = legendre_field(&field, shift, Some(&dual))?;
    let mono = gradient_map_monotonicity(&field, shift, cfg.samples as usize, cfg.seed)?;

    let mut cols: Vec<String> = (1..=n).map(|i| format!("y_{i}")).collect();
    cols.push("w".into());
    cols.extend((1..=n).map(|i| format!("argmax_x_{i}")));
    let mut report = Report { columns: cols, ..Report::default() };
    for lin in 0..lt.w.len() {
        if lt.boundary[lin] {
            continue;
        }
        let idx = lt.w.unravel(lin);
        let mut row: Vec<Cell> = lt.w.coords(&idx).into_iter().map(Cell::from).collect();
        row.push(lt.w.values[lin].into());
        row.extend(field.coords(&lt.argmax[lin]).into_iter().map(Cell::from));
        report.row(row);
    }
    report.result("matched", lt.matched);
    report.result("max_rel_error", lt.max_rel_error);
    report.result("pairs", mono.pairs);
    report.result("violations", mono.violations);
    report.result("min_ratio", mono.min_ratio);
    let hessian_ok = lt.matched > 0 && lt.max_rel_error <= cfg.tol("hessian");
    let passed = hessian_ok && mono.violations == 0 && mono.min_ratio >= 1.0 - cfg.tol("monotone");
    if !hessian_ok {
        report.result("witness", format!("dual node {:?}", lt.worst));
    } else if !passed {
        report.result("witness", format!("min ratio {}", real(mono.min_ratio)));
    }
    Ok(Outcome { report, passed })
}
