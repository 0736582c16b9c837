use std::time::Instant;

use brqw::correlation::{localisation_length_bound, mass_estimate_with_slack};
use brqw::dynamics::{mc_moment_table, McParams};
use brqw::paths::build_class_table;
use brqw::polymer::{
    closed_form_alpha_upper, decorated_tree_bound, linf_alpha_c_bound, saw_search_bound, tree_saw_alpha_c, FamilyCensus, PathFamily,
    LATTICE_ALPHA_C_UPPER,
};
use brqw::{Graph, GraphKind, Letter, NormKind, SkeletonMatrix};
use serde_json::json;

use crate::args::{
    ClassesArgs, Command, CrosscheckArgs, ExactSumArgs, Format, MassArgs, PolymerArgs, ReportArgs,
    SimulateArgs, WalkArgs,
};
use crate::error::{CliError, CliResult};
use crate::output::{f, Outcome, Table};

/// Largest `n` for `classes --dump`.
pub const DUMP_MAX_N: usize = 6;

pub fn run(command: &Command) -> CliResult<()> {
    let (outcome, output, failure) = match command {
        Command::Simulate(a) => (simulate(a)?, &a.output, None),
        Command::ExactSum(a) => (exact_sum(a)?, &a.output, None),
        Command::Classes(a) => (classes(a)?, &a.output, None),
        Command::Polymer(a) => (polymer(a)?, &a.output, None),
        Command::Mass(a) => (mass(a)?, &a.output, None),
        Command::Report(a) => (report(a)?, &a.output, None),
        Command::Crosscheck(a) => {
            let (o, failure) = crosscheck(a)?;
            (o, &a.output, failure)
        }
    };
    outcome.emit(output)?;
    match failure {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

struct Walk {
    graph: Graph,
    coin: SkeletonMatrix,
    tau0: Letter,
    norm: NormKind,
}

/// Accepts `a1`, `a2^-1` or a bare index.
pub fn parse_letter(s: &str, d: usize) -> CliResult<Letter> {
    let s = s.trim();
    match s.parse::<usize>() {
        Ok(i) => Letter::new(i, d).map_err(|e| CliError::validation("tau0", e.to_string())),
        Err(_) => Letter::parse(s, d).map_err(|e| CliError::validation("tau0", e.to_string())),
    }
}

fn norm_for(graph: Graph, norm: Option<NormKind>) -> CliResult<NormKind> {
    let norm = norm.unwrap_or(graph.default_norm());
    graph.check_norm(norm).map_err(|e| CliError::validation("norm", e.to_string()))?;
    Ok(norm)
}

impl Walk {
    fn from_args(a: &WalkArgs) -> CliResult<Self> {
        let graph = Graph::new(a.graph, a.d)?;
        let coin = a.coin.build(a.d)?;
        let tau0 = parse_letter(&a.tau0, a.d)?;
        let norm = norm_for(graph, a.norm)?;
        Ok(Walk { graph, coin, tau0, norm })
    }

    fn describe(&self, coin: &brqw::CoinSpec) -> String {
        format!(
            "{} d={} coin={} tau0={} norm={}",
            self.graph.kind,
            self.graph.d,
            coin,
            self.tau0.label(self.graph.d),
            self.norm
        )
    }
}

fn simulate(a: &SimulateArgs) -> CliResult<Outcome> {
    let w = Walk::from_args(&a.walk)?;
    let params = McParams {
        graph: w.graph,
        coin: &w.coin,
        tau0: w.tau0,
        steps: a.n,
        norm: w.norm,
        samples: a.samples,
        seed: a.seed,
        node_budget: a.node_budget as u128,
    };
    let start = Instant::now();
    let table = mc_moment_table(&params, &a.alpha)?;
    let elapsed = start.elapsed().as_secs_f64();

    let steps: Vec<usize> = if a.all_steps { (1..=a.n).collect() } else { vec![a.n] };
    let mut t = Table::new("moments", &["n", "alpha", "mean", "stderr", "samples"]);
    let mut rows = Vec::new();
    for &n in &steps {
        for (k, alpha) in a.alpha.iter().enumerate() {
            let e = table[n][k];
            t.push(vec![n.to_string(), f(*alpha), f(e.mean), f(e.stderr), e.samples.to_string()]);
            rows.push(json!({ "n": n, "alpha": alpha, "mean": e.mean, "stderr": e.stderr, "samples": e.samples }));
        }
    }
    let mut result = json!({ "norm": w.norm, "rows": rows });
    if a.timing {
        result["runtime_seconds"] = json!(elapsed);
    }
    let mut o = Outcome::new("simulate", a, &result)?;
    o.summary = format!("simulate: {}, M={} seed={}\n{}", w.describe(&a.walk.coin), a.samples, a.seed, t.to_text());
    o.default_format = if a.alpha.len() > 1 || a.all_steps { Format::Csv } else { Format::Json };
    o.tables.push(t);
    Ok(o)
}

fn exact_sum(a: &ExactSumArgs) -> CliResult<Outcome> {
    let w = Walk::from_args(&a.walk)?;
    let classes = build_class_table(w.graph, a.n, w.tau0, &w.coin, a.budget as u128)?;
    let census = classes.zero_census()?;
    let mut t = Table::new(
        "exact_sum",
        &["n", "alpha", "s_n", "class_count", "zero_class_count", "paths_in_zero_classes"],
    );
    let mut rows = Vec::new();
    for alpha in &a.alpha {
        let s = classes.s_n(*alpha, w.norm)?;
        t.push(vec![
            a.n.to_string(),
            f(*alpha),
            f(s),
            census.classes.to_string(),
            census.zero_classes.to_string(),
            census.paths_in_zero_classes.to_string(),
        ]);
        rows.push(json!({ "alpha": alpha, "s_n": s }));
    }
    let result = json!({ "n": a.n, "norm": w.norm, "census": census, "rows": rows });
    let mut o = Outcome::new("exact-sum", a, &result)?;
    o.summary = format!("exact-sum: {}\n{}", w.describe(&a.walk.coin), t.to_text());
    o.default_format = Format::Csv;
    o.tables.push(t);
    Ok(o)
}

fn classes(a: &ClassesArgs) -> CliResult<Outcome> {
    if a.dump && a.n > DUMP_MAX_N {
        return Err(CliError::validation("n", format!("--dump lists classes for n <= {DUMP_MAX_N}, got {}", a.n)));
    }
    let w = Walk::from_args(&a.walk)?;
    let table = build_class_table(w.graph, a.n, w.tau0, &w.coin, a.budget as u128)?;
    let census = table.zero_census()?;
    let single = table.single_path_count();
    let mut counts = Table::new(
        "class_census",
        &["n", "classes", "zero_classes", "paths_in_zero_classes", "single_path_classes", "total_paths"],
    );
    counts.push(vec![
        a.n.to_string(),
        census.classes.to_string(),
        census.zero_classes.to_string(),
        census.paths_in_zero_classes.to_string(),
        single.to_string(),
        table.total_paths().to_string(),
    ]);
    let mut result = json!({
        "n": a.n,
        "census": census,
        "single_path_classes": single,
        "total_paths": table.total_paths().to_string(),
    });
    let mut o_tables = Vec::new();
    if a.dump {
        let mut list = Table::new("classes", &["endpoint", "cardinality", "zero", "representative"]);
        for c in table.classes() {
            list.push(vec![
                c.endpoint().display(w.graph.d),
                c.cardinality.to_string(),
                c.is_zero().to_string(),
                c.representative.display(),
            ]);
        }
        let zero: Vec<bool> = table.classes().iter().map(|c| c.is_zero()).collect();
        let records: Vec<_> = table
            .records()
            .into_iter()
            .zip(zero)
            .map(|(r, z)| {
                let mut v = serde_json::to_value(r).expect("plain record");
                v["zero"] = json!(z);
                v
            })
            .collect();
        result["classes"] = json!(records);
        o_tables.push(list);
    }
    let mut o = Outcome::new("classes", a, &result)?;
    o.summary = format!("classes: {}\n{}", w.describe(&a.walk.coin), counts.to_text());
    o.tables = o_tables;
    o.tables.push(counts);
    Ok(o)
}

fn polymer(a: &PolymerArgs) -> CliResult<Outcome> {
    let graph = Graph::new(a.graph, a.d)?;
    let norm = norm_for(graph, a.norm)?;
    let family = PathFamily { tag: a.family, graph };
    let census = FamilyCensus::new(family, a.n_max, a.budget as u128)?;

    let mut counts = Table::new("partition", &["n", "alpha", "count", "z_n"]);
    for n in 0..=a.n_max {
        let c = census.count(n).to_string();
        for alpha in &a.alpha {
            counts.push(vec![n.to_string(), f(*alpha), c.clone(), f(census.partition(n, *alpha, norm)?)]);
        }
    }
    let mut free = Table::new("free_energy", &["alpha", "lambda_lower", "lambda_upper", "upper_monotone"]);
    let mut chi = Table::new(
        "susceptibility",
        &["alpha", "z", "chi_partial", "geometric_floor", "z_c_lower", "z_c_upper", "regime"],
    );
    let mut bounds_json = Vec::new();
    let mut chi_json = Vec::new();
    for alpha in &a.alpha {
        let b = census.lambda_bounds(*alpha)?;
        free.push(vec![f(*alpha), f(b.lower), f(b.upper.value), b.upper.monotone.to_string()]);
        bounds_json.push(b);
        for z in &a.z {
            let s = census.susceptibility(*alpha, *z)?;
            chi.push(vec![
                f(*alpha),
                f(*z),
                f(s.estimate.value),
                f(s.geometric_floor),
                f(s.z_c_lower),
                f(s.z_c_upper),
                serde_json::to_value(s.regime)?.as_str().unwrap_or_default().to_owned(),
            ]);
            chi_json.push(s);
        }
    }
    let bracket = census.alpha_c_bracket()?;
    let mut ac = Table::new("alpha_c", &["lower", "upper", "upper_source"]);
    ac.push(vec![f(bracket.lower), f(bracket.upper), bracket.upper_source.to_owned()]);
    let (mu_lo, mu_hi) = census.connective_estimate()?;

    let decorated = if a.graph == GraphKind::Tree && a.d >= 2 { Some(decorated_tree_bound(a.d)?) } else { None };
    let result = json!({
        "norm": norm,
        "counts": (0..=a.n_max).map(|n| census.count(n).to_string()).collect::<Vec<_>>(),
        "lambda": bounds_json,
        "susceptibility": chi_json,
        "alpha_c": bracket,
        "connective_constant": { "lower": mu_lo, "upper": mu_hi },
        "decorated_bound": decorated,
    });
    let mut o = Outcome::new("polymer", a, &result)?;
    o.summary = format!(
        "polymer: {} on {} d={} n_max={}\n{}\nalpha_c in [{}, {}] ({})\nconnective constant in [{}, {}]",
        a.family,
        a.graph,
        a.d,
        a.n_max,
        free.to_text(),
        f(bracket.lower),
        f(bracket.upper),
        bracket.upper_source,
        f(mu_lo),
        f(mu_hi)
    );
    o.default_format = Format::Json;
    o.tables = vec![counts, free, ac, chi];
    Ok(o)
}

fn mass(a: &MassArgs) -> CliResult<Outcome> {
    let z = match (a.z, a.z_critical) {
        (Some(z), false) => z,
        (None, true) => 1.0 / (2 * a.d) as f64,
        _ => return Err(CliError::validation("z", "give --z or --z-critical")),
    };
    let m = mass_estimate_with_slack(a.d, z, a.l_max, a.n_max, a.slack, a.budget as u128)?;
    let mut t = Table::new("planes", &["l", "g_l", "mass", "sandwich"]);
    for r in &m.rows {
        t.push(vec![r.l.to_string(), f(r.g_l), f(r.mass), r.sandwich.to_string()]);
    }
    let localisation = if a.z_critical && a.d >= 2 {
        Some(localisation_length_bound(a.d, a.l_max, a.n_max, a.budget as u128)?)
    } else {
        None
    };
    let result = json!({
        "mass": m,
        "xi_hat": 1.0 / m.sup_estimate,
        "localisation_length": localisation.as_ref().map(|l| json!({
            "xi_hat": l.xi_hat,
            "unconditional": l.unconditional,
            "best": l.best,
            "best_source": l.best_source,
        })),
    });
    let mut o = Outcome::new("mass", a, &result)?;
    let caveat = if m.low_dimension_caveat { ", d below the regime of the estimate" } else { "" };
    o.summary = format!(
        "mass: d={} z={} n_max={}\n{}m_hat = {} (non-certified, {}{caveat})",
        a.d,
        f(z),
        a.n_max,
        t.to_text(),
        f(m.sup_estimate),
        m.bias
    );
    o.default_format = Format::Json;
    o.tables.push(t);
    Ok(o)
}

fn report(a: &ReportArgs) -> CliResult<Outcome> {
    let d = a.d;
    let mut t = Table::new("bounds", &["name", "value", "expression"]);
    let mut entries = serde_json::Map::new();
    let mut add = |t: &mut Table, name: &str, value: f64, expr: String| {
        t.push(vec![name.to_owned(), f(value), expr.clone()]);
        entries.insert(name.to_owned(), json!({ "value": value, "expression": expr }));
    };
    add(&mut t, "tree_saw_alpha_c", tree_saw_alpha_c(d), format!("ln({}/{})", 2 * d, 2 * d - 1));
    let decorated = if d >= 2 {
        let b = decorated_tree_bound(d)?;
        let q = 2 * d;
        add(
            &mut t,
            "decorated_alpha_threshold",
            b.alpha_threshold,
            format!("ln((1-z^2({q}-1))/((1-z^2) z ({q}-1))), z=1/{q}"),
        );
        add(
            &mut t,
            "decorated_alpha_threshold_closed",
            b.alpha_threshold_closed,
            format!("ln((1-u+u^2)/((1-u)(1-u^2))), u=1/{q}"),
        );
        add(&mut t, "decorated_asymptotic_check", b.asymptotic_check, "threshold * 2d^2".into());
        Some(b)
    } else {
        None
    };
    add(&mut t, "lattice_alpha_c", LATTICE_ALPHA_C_UPPER, "ln(2)".into());
    let tree = Graph::tree(d)?;
    let (sp_upper, sp_source) = closed_form_alpha_upper(PathFamily::sp(tree))?;
    add(&mut t, "tree_sp_alpha_c", sp_upper, sp_source.into());
    add(&mut t, "localisation_length_floor", 1.0 / LATTICE_ALPHA_C_UPPER, "1/ln(2)".into());
    let mu_lower = if d >= 2 {
        let lower = Graph::lattice(d - 1)?;
        let budget = a.budget as u128;
        let n_max = a
            .n_max
            .unwrap_or_else(|| (1..=8).rev().find(|&n| saw_search_bound(&lower, n) <= budget).unwrap_or(1));
        let (lo, hi) = FamilyCensus::new(PathFamily::saw(lower), n_max, budget)?.connective_estimate()?;
        add(&mut t, "connective_lower_dim_lower", lo, format!("mu(Z^{}) lower, n_max={n_max}", d - 1));
        add(&mut t, "connective_lower_dim_upper", hi, format!("mu(Z^{}) upper, n_max={n_max}", d - 1));
        if let Some(b) = linf_alpha_c_bound(d, lo) {
            add(&mut t, "linf_alpha_c", b, format!("ln({} - mu(Z^{})) with the lower mu", 2 * d, d - 1));
        }
        Some((lo, hi))
    } else {
        None
    };
    let result = json!({
        "d": d,
        "entries": entries,
        "decorated": decorated,
        "connective_lower_dim": mu_lower,
    });
    let mut o = Outcome::new("report", a, &result)?;
    o.summary = format!("report: bounds for d={d}\n{}", t.to_text());
    o.tables.push(t);
    Ok(o)
}

fn crosscheck(a: &CrosscheckArgs) -> CliResult<(Outcome, Option<CliError>)> {
    let w = Walk::from_args(&a.walk)?;
    let params = McParams {
        graph: w.graph,
        coin: &w.coin,
        tau0: w.tau0,
        steps: a.n_max,
        norm: w.norm,
        samples: a.samples,
        seed: a.seed,
        node_budget: a.node_budget as u128,
    };
    let mc = mc_moment_table(&params, &a.alpha)?;
    let mut t = Table::new("crosscheck", &["n", "alpha", "exact", "mc_mean", "stderr", "z_score", "pass"]);
    let mut rows = Vec::new();
    let mut failed = 0;
    let mut total = 0;
    for n in 1..=a.n_max {
        let classes = build_class_table(w.graph, n, w.tau0, &w.coin, a.budget as u128)?;
        for (k, alpha) in a.alpha.iter().enumerate() {
            let exact = classes.s_n(*alpha, w.norm)?;
            let e = mc[n][k];
            let z = z_score(e.mean, exact, e.stderr);
            let pass = z.abs() <= a.threshold;
            total += 1;
            if !pass {
                failed += 1;
            }
            t.push(vec![n.to_string(), f(*alpha), f(exact), f(e.mean), f(e.stderr), f(z), pass.to_string()]);
            rows.push(json!({
                "n": n, "alpha": alpha, "exact": exact, "mc_mean": e.mean,
                "stderr": e.stderr, "z_score": z, "pass": pass,
            }));
        }
    }
    let result = json!({ "threshold": a.threshold, "failed": failed, "total": total, "rows": rows });
    let mut o = Outcome::new("crosscheck", a, &result)?;
    o.summary = format!(
        "crosscheck: {}, M={} seed={}\n{}{} of {} cells within |z| <= {}",
        w.describe(&a.walk.coin),
        a.samples,
        a.seed,
        t.to_text(),
        total - failed,
        total,
        a.threshold
    );
    o.default_format = Format::Csv;
    o.tables.push(t);
    let failure = (failed > 0).then_some(CliError::Crosscheck { failed, total, threshold: a.threshold });
    Ok((o, failure))
}

/// `(mean − exact)/stderr`, with exact agreement counted as zero.
pub fn z_score(mean: f64, exact: f64, stderr: f64) -> f64 {
    let diff = mean - exact;
    if diff.abs() <= 1e-12 * exact.abs().max(1.0) {
        0.0
    } else if stderr > 0.0 {
        diff / stderr
    } else {
        f64::INFINITY.copysign(diff)
    }
}
