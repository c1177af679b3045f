//! Subcommand implementations; each returns the records to print.

use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use specgap::auxiliary::{jeq_residual, k_bar, solve_j, CurvatureProfile, Geometry};
use specgap::bounds::{bound_report, AubryInputs, BoundReport};
use specgap::eigen::lambda1_model;
use specgap::matching::{m_min, match_maximum};
use specgap::perturbation::{check_term_iii, n_condition, verify_conditions, PerturbedParams};
use specgap::verify::{
    catalog, check_main_inequality, diameter_chain_check, gradient_comparison_sphere,
};

use crate::config::{Config, Grid};
use crate::output::Record;
use crate::{BoundArgs, CliError, JsolveArgs, MatchArgs, PerturbArgs, SweepArgs, VerifyArgs};

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn bound_record(
    n: f64,
    k: f64,
    d: f64,
    alpha: f64,
    aubry: Option<AubryInputs>,
) -> (Record, Result<BoundReport, CliError>) {
    let start = Instant::now();
    let mut r = Record::new("bound")
        .query("n", n)
        .query("K", k)
        .query("D", d)
        .query("alpha", alpha);
    if let Some(a) = aubry {
        r = r
            .query("aubry_C", a.c)
            .query("aubry_kbar", a.k_bar)
            .query("aubry_p", a.p);
    }
    let rep = bound_report(n, k, d, alpha, aubry).map_err(CliError::from);
    match &rep {
        Ok(rep) => {
            r.result("model_lambda1", rep.model_lambda1);
            r.result("main_bound", rep.main_bound);
            r.opt_result("lichnerowicz", rep.lichnerowicz);
            r.result("zhong_yang", rep.zhong_yang);
            r.result("shi_zhang", rep.shi_zhang);
            r.result("shi_zhang_clamped", rep.shi_zhang_clamped);
            r.opt_result("yang", rep.yang);
            r.opt_result("aubry", rep.aubry);
            r.flags = rep.consistency.clone();
        }
        Err(e) => {
            r.result("error", e.to_string());
            r.flag("evaluated", false);
        }
    }
    r.time("compute", start);
    (r, rep)
}

pub fn bound(a: &BoundArgs, cfg: &Config) -> Result<Record, CliError> {
    let n = cfg.need(a.n, "n")?;
    let k = cfg.need(a.k, "K")?;
    let d = cfg.need(a.d, "D")?;
    let alpha = cfg.or(a.alpha, "alpha", 1.0)?;
    let aubry = match (
        cfg.pick(a.aubry_c, "aubry_c")?,
        cfg.pick(a.aubry_kbar, "aubry_kbar")?,
        cfg.pick(a.aubry_p, "aubry_p")?,
    ) {
        (Some(c), Some(k_bar), Some(p)) => {
            eprintln!("note: Aubry constant C(n, p) supplied by the user; no value for it is known in closed form");
            Some(AubryInputs { p, k_bar, c })
        }
        (None, None, None) => None,
        _ => {
            return Err(CliError::Input(
                "--aubry-C, --aubry-kbar and --aubry-p must be given together".into(),
            ))
        }
    };
    let (record, rep) = bound_record(n, k, d, alpha, aubry);
    rep.map(|_| record)
}

/// Bound records for every grid point, plus the first error in grid order.
pub fn sweep(a: &SweepArgs) -> Result<(Vec<Record>, Option<CliError>), CliError> {
    let grid = Grid::parse(&read(&a.grid)?, &a.grid.display().to_string())?;
    let rows: Vec<_> = grid
        .points()
        .into_par_iter()
        .map(|(n, k, d, alpha)| bound_record(n, k, d, alpha, None))
        .collect();
    let mut first_err = None;
    let mut records = Vec::with_capacity(rows.len());
    for (r, rep) in rows {
        if let (Err(e), None) = (rep, &first_err) {
            first_err = Some(e);
        }
        records.push(r);
    }
    Ok((records, first_err))
}

pub fn matching(a: &MatchArgs, cfg: &Config) -> Result<Record, CliError> {
    let big_n = cfg.need(a.big_n, "N")?;
    let k_bar = cfg.need(a.k_bar, "K_bar")?;
    let lambda_bar = cfg.need(a.lambda_bar, "lambda_bar")?;
    let u_star = cfg.need(a.u_star, "u_star")?;
    let start = Instant::now();
    let params = specgap::ModelParams::symmetric(big_n, k_bar)?;
    let res = match_maximum(&params, lambda_bar, u_star)?;
    let mut r = Record::new("match")
        .query("N", big_n)
        .query("K_bar", k_bar)
        .query("lambda_bar", lambda_bar)
        .query("u_star", u_star);
    r.result("a", res.a);
    r.result("b", res.b);
    r.result("d", res.solution.d);
    r.result("u_star_achieved", res.u_star_achieved);
    r.result("residual", (res.u_star_achieved - u_star).abs());
    r.result("branch", format!("{:?}", res.branch()));
    r.result("case", format!("{:?}", res.case_tag));
    if k_bar != 0.0 {
        match m_min(&params, lambda_bar) {
            Ok(m) => r.result("m_min", m),
            Err(specgap::Error::CertifiedInfinite) => r.result("m_min", 0.0),
            Err(e) => return Err(e.into()),
        }
    }
    r.flag(
        "residual < 1e-8",
        (res.u_star_achieved - u_star).abs() < specgap::matching::MATCH_TOL,
    );
    r.time("compute", start);
    Ok(r)
}

fn parse_geometry(name: &str, length: f64) -> Result<Geometry, CliError> {
    match name.to_ascii_lowercase().as_str() {
        "circle" => Ok(Geometry::Circle { length }),
        "interval" => Ok(Geometry::Interval { length }),
        other => Err(CliError::Input(format!(
            "geometry `{other}` is not `circle` or `interval`"
        ))),
    }
}

/// Length implied by the sampled `t` column.
fn infer_length(text: &str, geometry: &str) -> Result<f64, CliError> {
    let ts: Vec<f64> = text
        .lines()
        .skip(1)
        .filter_map(|l| l.split(',').next()?.trim().parse().ok())
        .collect();
    if ts.len() < 2 {
        return Err(CliError::Input("profile has fewer than two samples".into()));
    }
    let last = ts[ts.len() - 1];
    Ok(if geometry.eq_ignore_ascii_case("circle") {
        last + (ts[1] - ts[0])
    } else {
        last
    })
}

pub fn jsolve(a: &JsolveArgs, cfg: &Config) -> Result<Record, CliError> {
    let path: std::path::PathBuf = cfg.need(a.profile.clone(), "profile")?;
    let geometry_name: String = cfg.or(a.geometry.clone(), "geometry", "circle".into())?;
    let n: usize = cfg.need(a.n, "n")?;
    let k: f64 = cfg.need(a.k, "K")?;
    let tau: f64 = cfg.or(a.tau, "tau", 2.0)?;
    let delta: Option<f64> = cfg.pick(a.delta, "delta")?;
    let eps: Option<f64> = cfg.pick(a.eps, "eps")?;
    let p: Option<f64> = cfg.pick(a.p, "p")?;
    let text = read(&path)?;
    let length = match cfg.pick(a.length, "length")? {
        Some(l) => l,
        None => infer_length(&text, &geometry_name)?,
    };
    let geometry = parse_geometry(&geometry_name, length)?;

    let start = Instant::now();
    let profile = CurvatureProfile::from_csv(&text, geometry, n)?;
    let sol = solve_j(&profile, k, tau)?;
    let mut r = Record::new("jsolve")
        .query("profile", path.display().to_string())
        .query("geometry", geometry_name.to_ascii_lowercase())
        .query("length", length)
        .query("n", n)
        .query("K", k)
        .query("tau", tau);
    if let Some(d) = delta {
        r = r.query("delta", d);
    }
    if let Some(e) = eps {
        r = r.query("eps", e);
    }
    if let Some(p) = p {
        r = r.query("p", p);
    }
    r.time("solve", start);
    r.result("points", profile.len());
    r.result("sigma", sol.sigma);
    r.result("sigma_tilde", sol.sigma_tilde);
    r.result("sup_J_minus_1", sol.sup_deviation);
    let resid = jeq_residual(&profile, k, &sol)
        .iter()
        .fold(0.0f64, |m, x| m.max(x.abs()));
    r.result("residual_sup", resid);
    if let Some(p) = p {
        r.result("k_bar", k_bar(&profile, k, p)?);
    }
    r.flag("sigma >= 0", sol.sigma >= 0.0);
    if let Some(e) = eps {
        r.flag("sigma <= 4 eps", sol.sigma <= 4.0 * e);
    }
    if let Some(d) = delta {
        r.flag("sup|J-1| <= delta", sol.sup_deviation <= d);
    }
    if let Some(out) = &a.output_profile {
        let mut body = String::from("t,J,W\n");
        for ((t, j), w) in sol.t.iter().zip(&sol.j).zip(&sol.w) {
            body.push_str(&format!("{t:?},{j:?},{w:?}\n"));
        }
        std::fs::write(out, body)
            .map_err(|e| CliError::Input(format!("{}: {e}", out.display())))?;
    }
    Ok(r)
}

pub fn perturb(a: &PerturbArgs, cfg: &Config) -> Result<Record, CliError> {
    let n = cfg.need(a.n, "n")?;
    let delta = cfg.need(a.delta, "delta")?;
    let lambda1 = cfg.need(a.lambda1, "lambda1")?;
    let k = cfg.need(a.k, "K")?;
    let sigma = cfg.or(a.sigma, "sigma", 0.0)?;
    let start = Instant::now();
    let pp = PerturbedParams::choose(n, delta, lambda1, k, sigma, None)?;
    let mut r = Record::new("perturb")
        .query("n", n)
        .query("delta", delta)
        .query("lambda1", lambda1)
        .query("K", k)
        .query("sigma", sigma);
    r.result("lambda_bar", pp.lambda_bar);
    r.result("N", pp.big_n);
    r.result("alpha", pp.alpha);
    r.result("beta", pp.beta);
    r.result("K_bar", pp.k_bar);
    r.result("y_lo", pp.y_lo);
    r.result("y_hi", pp.y_hi);

    let ys: Vec<f64> = pp.y_grid(1000).collect();
    let mut worst = [f64::INFINITY; 3];
    let mut all = true;
    for &y in &ys {
        let c = verify_conditions(&pp, n, y);
        worst[0] = worst[0].min(c.cond1);
        worst[1] = worst[1].min(c.cond2);
        worst[2] = worst[2].min(c.cond3);
        all &= c.all_pass();
    }
    r.result("min_cond1", worst[0]);
    r.result("min_cond2", worst[1]);
    r.result("min_cond3", worst[2]);
    r.flag("N condition", n_condition(n, pp.big_n, delta));
    r.flag("conditions on y-grid", all);
    for (label, j) in [("J = 1-delta", 1.0 - delta), ("J = 1+delta", 1.0 + delta)] {
        let t = check_term_iii(n, k, pp.big_n, pp.k_bar, sigma, delta, lambda1, j)?;
        r.result(&format!("term_iii({label})"), t.value);
        r.flag(&format!("term III >= 0 at {label}"), t.pass);
    }
    r.time("compute", start);
    Ok(r)
}

fn keep(filter: &Option<String>, name: &str) -> bool {
    filter.as_deref().map_or(true, |f| name.contains(f))
}

pub fn verify(a: &VerifyArgs, cfg: &Config) -> Result<Vec<Record>, CliError> {
    let filter: Option<String> = cfg.pick(a.filter.clone(), "filter")?;
    type Job = Box<dyn Fn() -> Result<Record, CliError> + Send + Sync>;
    let mut jobs: Vec<Job> = Vec::new();

    for m in catalog() {
        if !keep(&filter, &m.name) {
            continue;
        }
        for alpha in [0.5, 0.9, 0.99, 1.0] {
            let m = m.clone();
            jobs.push(Box::new(move || {
                let start = Instant::now();
                let rep = check_main_inequality(&m, alpha)?;
                let mut r = Record::new("verify")
                    .query("check", "inequality")
                    .query("name", m.name.clone())
                    .query("alpha", alpha);
                r.result("dim", m.dim);
                r.result("K", rep.k);
                r.result("D", rep.d);
                r.result("lambda1_exact", rep.lambda1_exact);
                r.result("model_lambda1", rep.model_lambda1);
                r.result("slack", rep.slack);
                r.flag("lambda1 >= alpha * model", rep.pass);
                r.time("compute", start);
                Ok(r)
            }));
        }
    }
    for n in 2..=5 {
        let name = format!("gradient S{n}");
        if !keep(&filter, &name) {
            continue;
        }
        jobs.push(Box::new(move || {
            let start = Instant::now();
            let rep = gradient_comparison_sphere(n)?;
            let mut r = Record::new("verify")
                .query("check", "gradient")
                .query("name", name.clone());
            r.result("latitudes", rep.latitudes);
            r.result("sup_discrepancy", rep.sup_discrepancy);
            r.flag("discrepancy < 1e-8", rep.sup_discrepancy < 1e-8);
            r.time("compute", start);
            Ok(r)
        }));
    }
    for delta in [0.1, 0.01, 0.001] {
        let name = format!("chain n=3 K=-1 D=1 delta={delta}");
        if !keep(&filter, &name) {
            continue;
        }
        jobs.push(Box::new(move || {
            let start = Instant::now();
            let lam1 = lambda1_model(3.0, -1.0, 1.0)?;
            let rep = diameter_chain_check(3.0, -1.0, lam1, delta)?;
            let mut r = Record::new("verify")
                .query("check", "chain")
                .query("name", name.clone())
                .query("delta", delta);
            r.result("lambda1", rep.lambda1);
            r.result("N", rep.big_n);
            r.result("K_bar", rep.k_bar);
            r.result("C1", rep.c1);
            r.result("C2", rep.c2);
            r.result("alpha_achieved", rep.alpha);
            r.result("slack", rep.slack);
            r.flag("C1 C2 lambda_bar >= model", rep.pass);
            r.flag("alpha < 1", rep.alpha < 1.0);
            r.time("compute", start);
            Ok(r)
        }));
    }
    if jobs.is_empty() {
        return Err(CliError::Input(format!(
            "filter `{}` matches no verification rows",
            filter.unwrap_or_default()
        )));
    }
    jobs.par_iter().map(|job| job()).collect()
}
