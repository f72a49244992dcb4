use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use hyperlinear::amalgam::{claim2_check, monte_carlo_tau, McConfig};
use hyperlinear::approx::{verify_properties_with, ApproxRep};
use hyperlinear::linalg::c64;
use hyperlinear::moments::{
    augment_with_adjoints, hull_membership, projection_moments, unitary_moments, HullResult, PairMoments, HULL_MAX_N,
};
use hyperlinear::optimizer::{brute_force_diagonal, kkt_check, solve, FunctionalCoeffs, SolveOptions};
use hyperlinear::random::{random_projection, random_unitary, seeded};
use hyperlinear::suite::{determinism_check, run_criterion, CRITERIA, DETERMINISM};
use hyperlinear::words::{britton_equal, britton_is_identity, britton_reduce, format, normalize_step_iv, parse};
use serde_json::{json, Value};

use crate::{
    ApproxRepArgs, Cli, Command, Failure, Format, MomentKind, MomentsArgs, OptimizeArgs, Report, SuiteArgs,
    TraceArgs, WordArgs,
};

type Outcome = Result<Report, Failure>;

pub fn run(cli: &Cli) -> Outcome {
    match &cli.command {
        Command::ApproxRep(a) => json_only(cli, approx_rep(a)),
        Command::Word(a) => json_only(cli, word(a)),
        Command::Trace(a) => json_only(cli, trace(a)),
        Command::Moments(a) => moments(cli, a),
        Command::Hull(a) => json_only(cli, hull(a.n, &a.lambda)),
        Command::Optimize(a) => optimize(cli, a),
        Command::Suite(a) => suite(cli, a),
    }
}

fn json_only(cli: &Cli, value: Result<Value, Failure>) -> Outcome {
    if cli.format == Format::Csv {
        return Err(Failure::Usage(format!("{} has no CSV output", cli.command.name())));
    }
    value.map(Report::Json)
}

fn to_value<T: serde::Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("reports serialize")
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

/// A list of numbers given inline (`"1,-2,1"`) or as a JSON file holding a
/// list or a symmetric matrix, returned in the row-by-row upper-triangle order.
fn number_list(source: &str, n: usize) -> Result<Vec<f64>, Failure> {
    let path = Path::new(source);
    if !path.is_file() {
        return source
            .split(',')
            .map(|t| t.trim().parse::<f64>().map_err(|e| usage(format!("bad number {t:?}: {e}"))))
            .collect();
    }
    let text = std::fs::read_to_string(path)?;
    let value: Value = serde_json::from_str(&text).map_err(|e| usage(format!("{source} is not JSON: {e}")))?;
    let num = |v: &Value| v.as_f64().ok_or_else(|| usage(format!("{source}: {v} is not a number")));
    let Value::Array(items) = value else {
        return Err(usage(format!("{source}: expected a list or a matrix")));
    };
    if !items.iter().any(Value::is_array) {
        return items.iter().map(num).collect();
    }
    let rows: Vec<Vec<f64>> = items
        .iter()
        .map(|r| r.as_array().ok_or_else(|| usage(format!("{source}: mixed rows")))?.iter().map(num).collect())
        .collect::<Result<_, _>>()?;
    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
        return Err(usage(format!("{source}: expected a {n}x{n} matrix")));
    }
    let mut out = Vec::new();
    for i in 0..n {
        for j in i..n {
            if (rows[i][j] - rows[j][i]).abs() > 1e-12 {
                return Err(usage(format!("{source}: matrix is not symmetric at ({}, {})", i + 1, j + 1)));
            }
            out.push(rows[i][j]);
        }
    }
    Ok(out)
}

fn pair_entries(pm: &PairMoments) -> Value {
    let n = pm.n();
    let list: Vec<Value> =
        (1..=n).flat_map(|i| (i..=n).map(move |j| (i, j))).map(|(i, j)| json!({"i": i, "j": j, "lambda": pm.get(i, j)})).collect();
    Value::Array(list)
}

fn hull_value(n: usize, r: &HullResult) -> Value {
    let weights: Vec<Value> = r
        .weights
        .iter()
        .map(|&(s, w)| json!({"subset": (1..=n).filter(|i| (s >> (i - 1)) & 1 == 1).collect::<Vec<_>>(), "weight": w}))
        .collect();
    json!({
        "n": n,
        "member": r.member,
        "residual": r.residual,
        "weights": weights,
        "certificate": r.certificate,
    })
}

fn approx_rep(a: &ApproxRepArgs) -> Result<Value, Failure> {
    let rep = ApproxRep::build(a.n)?;
    let mut v = to_value(&verify_properties_with(&rep, a.p_max));
    v["relation_bound"] = json!(8.0 / a.n as f64);
    v["equations"] = to_value(&rep.equation_residuals());
    Ok(v)
}

fn word(a: &WordArgs) -> Result<Value, Failure> {
    let (mode, text) = match (&a.normalize, &a.reduce) {
        (Some(t), _) => ("normalize", t),
        (None, Some(t)) => ("reduce", t),
        (None, None) => return Err(usage("word needs --normalize or --reduce")),
    };
    let input = parse(text)?;
    let output = match mode {
        "normalize" => normalize_step_iv(&input)?,
        _ => britton_reduce(&input),
    };
    Ok(json!({
        "input": format(&input),
        "mode": mode,
        "output": format(&output),
        "equal": britton_equal(&input, &output),
        "is_identity": britton_is_identity(&input),
        "a13": output.a13_check(),
    }))
}

fn trace(a: &TraceArgs) -> Result<Value, Failure> {
    let w = parse(&a.word)?;
    let rep = ApproxRep::build(a.n)?;
    let report = claim2_check(&w, &rep)?;
    let mut v = to_value(&report);
    v["word"] = json!(format(&w));
    if let Some(samples) = a.mc_samples {
        if samples < 2 {
            return Err(usage("--mc-samples needs at least 2 samples"));
        }
        let est = monte_carlo_tau(&w, &rep, &McConfig { samples, amplification: a.amplification, seed: a.seed });
        let gap = (est.mean() - c64(report.tau_re, report.tau_im)).norm();
        let mut mc = to_value(&est);
        mc["z"] = json!(if est.std_err > 0.0 { gap / est.std_err } else if gap == 0.0 { 0.0 } else { f64::INFINITY });
        mc["within_3_std_err"] = json!(gap <= 3.0 * est.std_err);
        v["monte_carlo"] = mc;
    }
    Ok(v)
}

fn moments(cli: &Cli, a: &MomentsArgs) -> Outcome {
    let need = |x: Option<usize>, flag: &str| x.ok_or_else(|| usage(format!("moments needs --{flag}")));
    match a.kind {
        MomentKind::Hull => {
            let n = need(a.n, "n")?;
            let lambda = a.lambda.as_deref().ok_or_else(|| usage("moments hull needs --lambda"))?;
            json_only(cli, hull(n, lambda))
        }
        MomentKind::Unitary => {
            let (n, dim) = (need(a.n, "n")?, need(a.dim, "dim")?);
            let mut rng = seeded(a.seed);
            let mut us: Vec<_> = (0..n).map(|_| random_unitary(&mut rng, dim)).collect();
            if a.augment {
                us = augment_with_adjoints(&us);
            }
            let mv = unitary_moments(&us, a.p)?;
            if cli.format == Format::Csv {
                return Ok(Report::Csv(mv.to_csv()));
            }
            let mut v = to_value(&mv);
            v["kind"] = json!("unitary");
            v["dim"] = json!(dim);
            v["seed"] = json!(a.seed);
            v["augmented"] = json!(a.augment);
            Ok(Report::Json(v))
        }
        MomentKind::Projection => {
            let (n, dim) = (need(a.n, "n")?, need(a.dim, "dim")?);
            let mut rng = seeded(a.seed);
            let es: Vec<_> = (0..n).map(|_| random_projection(&mut rng, dim)).collect();
            let pm = projection_moments(&es)?;
            if cli.format == Format::Csv {
                return Ok(Report::Csv(pm.to_csv()));
            }
            let in_hull = if n <= HULL_MAX_N { Some(hull_membership(&pm)?.member) } else { None };
            Ok(Report::Json(json!({
                "kind": "projection",
                "n": n,
                "dim": dim,
                "seed": a.seed,
                "moments": pair_entries(&pm),
                "invariant_violations": pm.invariant_violations(1e-10),
                "in_abelian_hull": in_hull,
            })))
        }
    }
}

fn hull(n: usize, lambda: &str) -> Result<Value, Failure> {
    let pm = PairMoments::new(n, number_list(lambda, n)?)?;
    Ok(hull_value(n, &hull_membership(&pm)?))
}

fn optimize(cli: &Cli, a: &OptimizeArgs) -> Outcome {
    let coeffs = FunctionalCoeffs::new(a.n, number_list(&a.coeffs, a.n)?)?;
    let opts = SolveOptions {
        restarts: a.restarts,
        max_sweeps: a.max_sweeps,
        seed: a.seed,
        scalar_starts: !a.no_scalar_starts,
        ..SolveOptions::default()
    };
    let state = solve(&coeffs, a.dim, &opts)?;
    let csv = state.trajectory_csv();
    if let Some(path) = &a.trajectory {
        std::fs::write(path, &csv)?;
    }
    if cli.format == Format::Csv {
        return Ok(Report::Csv(csv));
    }
    let brute_force = brute_force_diagonal(&coeffs, a.dim).ok();
    Ok(Report::Json(json!({
        "n": a.n,
        "dim": a.dim,
        "coeffs": coeffs.values(),
        "restarts": a.restarts,
        "seed": a.seed,
        "objective": state.objective,
        "converged": state.converged,
        "sweeps": state.sweeps,
        "best_restart": state.restart,
        "moments": pair_entries(&state.moments()),
        "residuals": state.residuals,
        "kkt": kkt_check(&state, 1e-8)?,
        "brute_force": brute_force,
    })))
}

fn suite(cli: &Cli, a: &SuiteArgs) -> Outcome {
    let ids: Vec<u32> = match &a.only {
        Some(ids) if !ids.is_empty() => ids.clone(),
        _ => CRITERIA.iter().copied().chain([DETERMINISM]).collect(),
    };
    let rerun: Vec<u32> = {
        let rest: Vec<u32> = ids.iter().copied().filter(|&i| i != DETERMINISM).collect();
        if rest.is_empty() {
            CRITERIA.to_vec()
        } else {
            rest
        }
    };
    let mut results = Vec::with_capacity(ids.len());
    for &id in &ids {
        let mut r = if id == DETERMINISM {
            determinism_check(a.seed, &rerun)?
        } else {
            run_criterion(id, a.seed, cli.deterministic)?
        };
        if cli.deterministic {
            r.elapsed_secs = None;
        }
        eprintln!("{}", r.line());
        results.push(r);
    }
    let failing: Vec<u32> = results.iter().filter(|r| !r.passed).map(|r| r.id).collect();
    let report = if cli.format == Format::Csv {
        let mut out = String::from("id,name,passed,key,value\n");
        for r in &results {
            for (k, v) in &r.measured {
                out.push_str(&format!("{},{},{},{},{:.16e}\n", r.id, r.name, r.passed, k, v));
            }
        }
        Report::Csv(out)
    } else {
        let mut v = json!({
            "seed": a.seed,
            "deterministic": cli.deterministic,
            "passed": failing.is_empty(),
            "failing": failing,
            "criteria": results,
        });
        if !cli.deterministic {
            let now = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
            v["generated_at_unix"] = json!(now);
        }
        Report::Json(v)
    };
    if failing.is_empty() {
        Ok(report)
    } else {
        Err(Failure::Checks(report, failing))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inline_and_file_lists() {
        assert_eq!(number_list("1,-2, 0.5", 2).unwrap(), vec![1.0, -2.0, 0.5]);
        assert!(number_list("1,x", 2).is_err());
        let dir = tempfile::tempdir().unwrap();
        let flat = dir.path().join("flat.json");
        std::fs::write(&flat, "[1, 2, 3]").unwrap();
        assert_eq!(number_list(flat.to_str().unwrap(), 2).unwrap(), vec![1.0, 2.0, 3.0]);
        let matrix = dir.path().join("m.json");
        std::fs::write(&matrix, "[[1, 2], [2, 3]]").unwrap();
        assert_eq!(number_list(matrix.to_str().unwrap(), 2).unwrap(), vec![1.0, 2.0, 3.0]);
        std::fs::write(&matrix, "[[1, 2], [0, 3]]").unwrap();
        assert!(number_list(matrix.to_str().unwrap(), 2).is_err());
    }
}
