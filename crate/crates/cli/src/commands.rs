use std::time::Instant;

use serde_json::json;

use selfnorm::blockstats::BlockScheme;
use selfnorm::bounds::{mdp_rate, uniformity_range, BorelSet, BoundParams, Part};
use selfnorm::conditions::{advise_block_size, condition_report, delta_m, epsilon_m, gamma_m, Regime};
use selfnorm::mc::{
    berry_esseen_empirical, ci_coverage, default_x_grid, enumerate_exact, mdp_empirical,
    run_tail_curve, MdpConfig, RunSettings,
};
use selfnorm::processes::{ModelSpec, ProcessModel};
use selfnorm::Error;

use crate::config::{invalid, parse_grid, parse_sizes, Format, Options};
use crate::output::{csv_header, header_text, opt};

pub struct Outcome {
    pub artifact: String,
    pub summary: String,
}

fn pretty(v: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json value serializes");
    s.push('\n');
    s
}

fn run_settings(o: &Options, spec: &ModelSpec, default_r: u64) -> Result<RunSettings, Error> {
    Ok(RunSettings::new(o.replicates(default_r)?, o.seed(Some(spec))).with_threads(o.threads.unwrap_or(0)))
}

fn scheme(o: &Options) -> Result<BlockScheme, Error> {
    BlockScheme::new(Options::require(o.n, "n")?, o.m.unwrap_or(1), o.kind()?)
}

/// Uniformity-range boundary for the default grid, when the dependence
/// quantities are computable for this model.
fn range_boundary(model: &ProcessModel, scheme: &BlockScheme, rho: f64) -> Option<f64> {
    let sigma2 = model.long_run_variance(1e-12).ok()?;
    let m = scheme.m();
    let eps = epsilon_m(model, m, scheme.n(), rho, sigma2).ok()?;
    let gamma = gamma_m(model, m, sigma2, 1e-10).ok()?;
    let delta = delta_m(model, m, sigma2).ok()?;
    let p = BoundParams::new(rho, eps.value, gamma.value, delta, m, scheme.n()).ok()?;
    Some(uniformity_range(&p))
}

pub fn tail_ratio(o: &Options) -> Result<Outcome, Error> {
    let (spec, model) = o.build_model()?;
    let scheme = scheme(o)?;
    let run = run_settings(o, &spec, 10_000)?;
    let confidence = o.confidence()?;
    let grid = match &o.x_grid {
        Some(text) => parse_grid(text)?,
        None => default_x_grid(range_boundary(&model, &scheme, o.rho.unwrap_or(1.0))),
    };
    let hash = o.hash("tail-ratio", Some(&spec));
    let curve = run_tail_curve(&model, &scheme, &grid, &run, confidence)?;
    let artifact = match o.format()? {
        Format::Csv => curve.to_csv(&csv_header(&[
            ("config_hash", hash.clone()),
            ("model_hash", curve.meta.model_hash.clone()),
            ("seed", run.seed.to_string()),
            ("replicates", run.replicates.to_string()),
            ("n", scheme.n().to_string()),
            ("m", scheme.m().to_string()),
            ("kind", scheme.kind().to_string()),
            ("confidence", confidence.to_string()),
            ("degenerate_count", curve.degenerate_count.to_string()),
        ])),
        Format::Structured => pretty(&json!({ "config_hash": hash, "seed": run.seed, "tail_curve": curve })),
    };
    let dev = curve
        .max_ratio_deviation(0.0, f64::INFINITY)
        .map_or("n/a".to_string(), |d| format!("{d:.4}"));
    Ok(Outcome {
        artifact,
        summary: format!(
            "tail-ratio n={} m={} kind={} R={} max|ratio-1|={dev} degenerate={} seed={} config={} time={:.2}s",
            scheme.n(),
            scheme.m(),
            scheme.kind(),
            run.replicates,
            curve.degenerate_count,
            run.seed,
            &hash[..12],
            curve.meta.wall_time_secs
        ),
    })
}

pub fn berry_esseen(o: &Options) -> Result<Outcome, Error> {
    let (spec, model) = o.build_model()?;
    let scheme = scheme(o)?;
    let run = run_settings(o, &spec, 10_000)?;
    let hash = o.hash("berry-esseen", Some(&spec));
    let started = Instant::now();
    let be = berry_esseen_empirical(&model, &scheme, &run)?;
    let artifact = match o.format()? {
        Format::Csv => {
            let mut s = header_text(&csv_header(&[
                ("config_hash", hash.clone()),
                ("model_hash", spec.hash()),
                ("seed", run.seed.to_string()),
                ("kind", scheme.kind().to_string()),
            ]));
            s.push_str("n,m,replicates,sup_distance,standard_error,degenerate_count\n");
            s.push_str(&format!(
                "{},{},{},{},{},{}\n",
                scheme.n(),
                scheme.m(),
                be.replicates,
                be.sup_distance,
                be.standard_error,
                be.degenerate_count
            ));
            s
        }
        Format::Structured => pretty(&json!({
            "config_hash": hash, "seed": run.seed, "n": scheme.n(), "m": scheme.m(),
            "kind": scheme.kind(), "berry_esseen": be,
        })),
    };
    Ok(Outcome {
        artifact,
        summary: format!(
            "berry-esseen n={} m={} R={} sup_distance={:.5} (se {:.5}) seed={} config={} time={:.2}s",
            scheme.n(),
            scheme.m(),
            be.replicates,
            be.sup_distance,
            be.standard_error,
            run.seed,
            &hash[..12],
            started.elapsed().as_secs_f64()
        ),
    })
}

pub fn mdp(o: &Options) -> Result<Outcome, Error> {
    let (spec, model) = o.build_model()?;
    let n_grid = parse_sizes(o.n_grid.as_deref().ok_or_else(|| invalid("--n-grid is required"))?)?;
    let set: BorelSet = o.set.as_deref().unwrap_or("[1,inf)").parse()?;
    let cfg = MdpConfig {
        n_grid,
        m_exponent: o.m_exponent.unwrap_or(0.0),
        a_exponent: o.a_exponent.unwrap_or(0.25),
        kind: o.kind()?,
        set,
        confidence: o.confidence()?,
    };
    let run = run_settings(o, &spec, 10_000)?;
    let hash = o.hash("mdp", Some(&spec));
    let started = Instant::now();
    let points = mdp_empirical(&model, &cfg, &run)?;
    let lower = -mdp_rate(&cfg.set, Part::Interior);
    let upper = -mdp_rate(&cfg.set, Part::Closure);
    let artifact = match o.format()? {
        Format::Csv => {
            let mut s = header_text(&csv_header(&[
                ("config_hash", hash.clone()),
                ("model_hash", spec.hash()),
                ("seed", run.seed.to_string()),
                ("replicates", run.replicates.to_string()),
                ("set", cfg.set.to_string()),
                ("bracket_lower", lower.to_string()),
                ("bracket_upper", upper.to_string()),
            ]));
            s.push_str("n,m,a_n,count,degenerate_count,p_hat,estimate,band_lo,band_hi,censored\n");
            for p in &points {
                s.push_str(&format!(
                    "{},{},{},{},{},{},{},{},{},{}\n",
                    p.n,
                    p.m,
                    p.a_n,
                    p.count,
                    p.degenerate_count,
                    p.p_hat,
                    opt(p.estimate),
                    opt(p.band_lo),
                    p.band_hi,
                    p.censored
                ));
            }
            s
        }
        Format::Structured => pretty(&json!({
            "config_hash": hash, "seed": run.seed, "set": cfg.set.to_string(),
            "bracket_lower": lower, "bracket_upper": upper, "points": points,
        })),
    };
    let last = points.last().expect("n grid is nonempty");
    let last_text = last.estimate.map_or("censored".to_string(), |e| format!("{e:.4}"));
    Ok(Outcome {
        artifact,
        summary: format!(
            "mdp n={} estimate={last_text} bracket=[{lower}, {upper}] R={} seed={} config={} time={:.2}s",
            last.n,
            run.replicates,
            run.seed,
            &hash[..12],
            started.elapsed().as_secs_f64()
        ),
    })
}

pub fn ci(o: &Options) -> Result<Outcome, Error> {
    let (spec, model) = o.build_model()?;
    let n = Options::require(o.n, "n")?;
    let m = match o.m {
        Some(m) => m,
        None => advise_block_size(Regime::Ci, n)?.m,
    };
    let kappa = o.kappa.unwrap_or(0.05);
    let mu = o.mu.or(spec.mean).unwrap_or(0.0);
    let run = run_settings(o, &spec, 1_000)?;
    let hash = o.hash("ci-coverage", Some(&spec));
    let started = Instant::now();
    let report = ci_coverage(&model, mu, n, m, kappa, &run)?;
    let artifact = match o.format()? {
        Format::Csv => {
            let mut s = header_text(&csv_header(&[
                ("config_hash", hash.clone()),
                ("model_hash", spec.hash()),
                ("seed", run.seed.to_string()),
            ]));
            s.push_str("n,m,kappa,mu,replicates,hits,coverage,degenerate,mean_halfwidth,quantile\n");
            s.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{}\n",
                report.n,
                report.m,
                report.kappa,
                report.mu,
                report.replicates,
                report.hits,
                report.coverage,
                report.degenerate,
                report.mean_halfwidth,
                report.quantile
            ));
            s
        }
        Format::Structured => pretty(&json!({ "config_hash": hash, "seed": run.seed, "coverage": report })),
    };
    Ok(Outcome {
        artifact,
        summary: format!(
            "ci-coverage n={n} m={m} kappa={kappa} coverage={} ({}/{}) mean_halfwidth={:.6} seed={} config={} time={:.2}s",
            report.coverage,
            report.hits,
            report.replicates,
            report.mean_halfwidth,
            run.seed,
            &hash[..12],
            started.elapsed().as_secs_f64()
        ),
    })
}

pub fn conditions(o: &Options) -> Result<Outcome, Error> {
    let (spec, model) = o.build_model()?;
    let n = Options::require(o.n, "n")?;
    let m = Options::require(o.m, "m")?;
    let sigma2 = match o.sigma2 {
        Some(s) => s,
        None => model.long_run_variance(1e-12)?,
    };
    let report = condition_report(
        &model,
        m,
        n,
        o.rho.unwrap_or(1.0),
        sigma2,
        o.max_lag.unwrap_or(10),
        o.tail_tol.unwrap_or(1e-10),
    )?;
    let hash = o.hash("conditions", Some(&spec));
    let artifact = match o.format()? {
        Format::Csv => {
            let mut s = header_text(&csv_header(&[("config_hash", hash.clone()), ("model_hash", spec.hash())]));
            s.push_str("quantity,lag,value\n");
            for (name, v) in [
                ("m", m as f64),
                ("epsilon_m", report.epsilon_m),
                ("gamma_m", report.gamma_m),
                ("gamma_tail", report.gamma_tail),
                ("delta_m", report.delta_m),
                ("sigma2", report.sigma2),
                ("max_vanishing", report.max_vanishing),
            ] {
                s.push_str(&format!("{name},,{v}\n"));
            }
            s.push_str(&format!(
                "epsilon_method,,{}\n",
                serde_json::to_value(report.epsilon_method).expect("enum serializes").as_str().unwrap_or("")
            ));
            for (i, (a, b)) in report.eta1.iter().zip(&report.eta2).enumerate() {
                s.push_str(&format!("eta1,{},{a}\neta2,{},{b}\n", i + 1, i + 1));
            }
            s
        }
        Format::Structured => report.to_json() + "\n",
    };
    Ok(Outcome {
        artifact,
        summary: format!(
            "conditions m={m} n={n} epsilon_m={:.6e} gamma_m={:.6e} delta_m={:.6e} sigma2={} max_vanishing={:.6e} config={}",
            report.epsilon_m,
            report.gamma_m,
            report.delta_m,
            report.sigma2,
            report.max_vanishing,
            &hash[..12]
        ),
    })
}

pub fn enumerate(o: &Options) -> Result<Outcome, Error> {
    let (spec, model) = o.build_model()?;
    let scheme = scheme(o)?;
    let grid = match (o.x, &o.x_grid) {
        (Some(_), Some(_)) => return Err(invalid("give either --x or --x-grid, not both")),
        (Some(x), None) => vec![x],
        (None, Some(text)) => parse_grid(text)?,
        (None, None) => default_x_grid(None),
    };
    let hash = o.hash("enumerate", Some(&spec));
    let exact = enumerate_exact(&model, &scheme, &grid)?;
    let artifact = match o.format()? {
        Format::Csv => {
            let mut s = header_text(&csv_header(&[
                ("config_hash", hash.clone()),
                ("model_hash", spec.hash()),
                ("n", scheme.n().to_string()),
                ("m", scheme.m().to_string()),
                ("kind", scheme.kind().to_string()),
                ("degenerate_mass", exact.degenerate_mass.to_string()),
            ]));
            s.push_str("x,tail\n");
            for (x, t) in exact.x_grid.iter().zip(&exact.tail) {
                s.push_str(&format!("{x},{t}\n"));
            }
            s
        }
        Format::Structured => pretty(&json!({ "config_hash": hash, "exact": exact })),
    };
    let shown: Vec<String> = exact
        .x_grid
        .iter()
        .zip(&exact.tail)
        .take(4)
        .map(|(x, t)| format!("P(W>={x})={t}"))
        .collect();
    Ok(Outcome {
        artifact,
        summary: format!(
            "enumerate n={} m={} {}{} degenerate_mass={} config={}",
            scheme.n(),
            scheme.m(),
            shown.join(" "),
            if exact.x_grid.len() > 4 { " ..." } else { "" },
            exact.degenerate_mass,
            &hash[..12]
        ),
    })
}

pub fn advise(o: &Options) -> Result<Outcome, Error> {
    let n = Options::require(o.n, "n")?;
    let regime = match o.regime.as_deref().map(|r| r.replace('_', "-")).as_deref() {
        Some("phi-mixing") => Regime::PhiMixing {
            beta: Options::require(o.beta, "beta")?,
        },
        Some("martingale") => Regime::Martingale {
            rho: Options::require(o.rho, "rho")?,
            theta: Options::require(o.theta, "theta")?,
        },
        Some("generic") => Regime::Generic {
            rho: Options::require(o.rho, "rho")?,
        },
        Some("ci") => Regime::Ci,
        Some(other) => return Err(invalid(format!("unknown regime `{other}`"))),
        None => return Err(invalid("--regime is required")),
    };
    let advice = advise_block_size(regime, n)?;
    let hash = o.hash("advise", None);
    let artifact = match o.format()? {
        Format::Csv => format!(
            "# config_hash={hash}\nregime,n,m,x_range\n{},{n},{},\"{}\"\n",
            o.regime.as_deref().unwrap_or_default(),
            advice.m,
            advice.x_range
        ),
        Format::Structured => pretty(&json!({ "config_hash": hash, "regime": regime, "n": n, "advice": advice })),
    };
    Ok(Outcome {
        artifact,
        summary: format!("advise m={} x_range={}", advice.m, advice.x_range),
    })
}
