//! knds: batch front-end for the KN-dS Dirac scattering laboratory.
//!
//! Usage: knds <geometry|angular|scatter|asymptotics|inverse|compare>
//!        --config <file> --out <dir> [--seed N]
//!
//! Exit codes are part of the contract: 2 = config parse error,
//! 3 = inadmissible parameters, 4 = numerical failure. Outputs are
//! deterministic: identical configs produce byte-identical files.

mod config;

use std::io::Write as _;
use std::path::{Path, PathBuf};

use knds_core::angular::{angular_eigenfunction, angular_eigenvalues, muntz_certificate};
use knds_core::asymptotics::AsymptoticModel;
use knds_core::geometry::{
    build_radial_profile, capital_a, horizon_roots, suggested_grid, validate_params,
    Admissibility, BlackHoleParams, GridSpec, RadialProfile,
};
use knds_core::inverse::{compare_blackholes, full_inverse, InverseOpts};
use knds_core::radial::{PathChoice, Scattered, ScatteringEngine};
use num_complex::Complex64;
use rayon::prelude::*;

use config::{Config, ConfigError};

enum CliError {
    Usage(String),
    Config(String),
    Inadmissible(String),
    Numerical(String),
    Io(String),
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e.0)
    }
}

impl From<knds_core::Error> for CliError {
    fn from(e: knds_core::Error) -> Self {
        match e {
            knds_core::Error::RootIsolation(m) => CliError::Inadmissible(m),
            knds_core::Error::Config(m) => CliError::Config(m),
            other => CliError::Numerical(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

fn main() {
    match run_cli() {
        Ok(()) => {}
        Err(e) => {
            let (code, kind, msg) = match e {
                CliError::Usage(m) => (2, "usage", m),
                CliError::Config(m) => (2, "config", m),
                CliError::Inadmissible(m) => (3, "inadmissible", m),
                CliError::Numerical(m) => (4, "numerical", m),
                CliError::Io(m) => (4, "io", m),
            };
            eprintln!("knds: error code={code} kind={kind} msg={msg:?}");
            std::process::exit(code);
        }
    }
}

struct Args {
    command: String,
    config: String,
    out: PathBuf,
    seed: Option<u64>,
}

fn parse_args() -> Result<Args, CliError> {
    let mut argv = std::env::args().skip(1);
    let command = argv.next().ok_or_else(|| CliError::Usage(usage_line()))?;
    let mut config = None;
    let mut out = None;
    let mut seed = None;
    while let Some(flag) = argv.next() {
        match flag.as_str() {
            "--config" => config = argv.next(),
            "--out" => out = argv.next(),
            "--seed" => {
                let v = argv
                    .next()
                    .ok_or_else(|| CliError::Usage("--seed needs a value".into()))?;
                seed = Some(
                    v.parse()
                        .map_err(|_| CliError::Usage(format!("bad seed {v:?}")))?,
                );
            }
            other => return Err(CliError::Usage(format!("unknown flag {other:?}"))),
        }
    }
    Ok(Args {
        command,
        config: config.ok_or_else(|| CliError::Usage("--config <file> is required".into()))?,
        out: PathBuf::from(
            out.ok_or_else(|| CliError::Usage("--out <dir> is required".into()))?,
        ),
        seed,
    })
}

fn usage_line() -> String {
    "usage: knds <geometry|angular|scatter|asymptotics|inverse|compare> \
     --config <file> --out <dir> [--seed N]"
        .to_string()
}

fn run_cli() -> Result<(), CliError> {
    if let Ok(threads) = std::env::var("KNDS_THREADS") {
        if let Ok(n) = threads.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global();
        }
    }
    let args = parse_args()?;
    let cfg = Config::load(&args.config)?;
    std::fs::create_dir_all(&args.out)?;
    let params = cfg.params()?;
    if let Admissibility::Reject(reason) = validate_params(&params) {
        return Err(CliError::Inadmissible(reason.to_string()));
    }
    match args.command.as_str() {
        "geometry" => cmd_geometry(&cfg, &params, &args.out),
        "angular" => cmd_angular(&cfg, &params, &args.out),
        "scatter" => cmd_scatter(&cfg, &params, &args.out),
        "asymptotics" => cmd_asymptotics(&cfg, &params, &args.out),
        "inverse" => cmd_inverse(&cfg, &params, &args.out, args.seed),
        "compare" => cmd_compare(&cfg, &params, &args.out),
        other => Err(CliError::Usage(format!(
            "unknown command {other:?}; {}",
            usage_line()
        ))),
    }
}

fn grid_from_config(
    cfg: &Config,
    params: &BlackHoleParams,
    h: &knds_core::geometry::HorizonData,
) -> Result<GridSpec, CliError> {
    let auto = suggested_grid(params, h, 1e-12, cfg.f64_or("grid_spacing", 0.008)?);
    let x_min = cfg.f64_or("x_min", auto.x_min)?;
    let x_max = cfg.f64_or("x_max", auto.x_max)?;
    let n = cfg.usize_or("grid_n", auto.n)?;
    Ok(GridSpec { x_min, x_max, n })
}

fn profile_for(cfg: &Config, params: &BlackHoleParams, k: f64) -> Result<RadialProfile, CliError> {
    let h = horizon_roots(params)?;
    let grid = grid_from_config(cfg, params, &h)?;
    Ok(build_radial_profile(params, &h, k, &grid)?)
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    let mut f = std::fs::File::create(path)?;
    f.write_all(contents.as_bytes())?;
    Ok(())
}

fn cmd_geometry(cfg: &Config, params: &BlackHoleParams, out: &Path) -> Result<(), CliError> {
    let h = horizon_roots(params)?;
    let a_total = capital_a(params, &h);
    let ks = cfg.list_or("k", &[0.5])?;
    let mut horizon_csv = String::from("quantity,value\n");
    for (name, v) in [
        ("r_n", h.r_n),
        ("r_c", h.r_c),
        ("r_minus", h.r_minus),
        ("r_plus", h.r_plus),
        ("kappa_n", h.kappa_n),
        ("kappa_c", h.kappa_c),
        ("kappa_minus", h.kappa_minus),
        ("kappa_plus", h.kappa_plus),
        ("E", h.e_const),
        ("A_total", a_total),
    ] {
        horizon_csv.push_str(&format!("{name},{v}\n"));
    }
    for &k in &ks {
        let profile = profile_for(cfg, params, k)?;
        horizon_csv.push_str(&format!("beta_k_{k},{}\n", profile.beta));
        horizon_csv.push_str(&format!("Omega_minus_k_{k},{}\n", profile.omega_minus));
        horizon_csv.push_str(&format!("Omega_plus_k_{k},{}\n", profile.omega_plus));
        let mut profile_csv = String::from("x,r,a,c,C,Re(q),Im(q)\n");
        for i in 0..profile.n() {
            profile_csv.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                profile.x[i],
                profile.points[i].r,
                profile.a[i],
                profile.c[i],
                profile.big_c[i],
                profile.q[i].re,
                profile.q[i].im
            ));
        }
        write_file(&out.join(format!("profile_k{k}.csv")), &profile_csv)?;
    }
    write_file(&out.join("horizon.csv"), &horizon_csv)?;
    Ok(())
}

fn cmd_angular(cfg: &Config, params: &BlackHoleParams, out: &Path) -> Result<(), CliError> {
    let ks = cfg.list_or("k", &[0.5, 1.5])?;
    let lambdas = cfg.list_or("lambda", &[0.3])?;
    let l_max = cfg.usize_or("l_max", 4)? as u32;
    let mut eigen_csv = String::from("k,l,lambda,mu,residual\n");
    for &k in &ks {
        for &lambda in &lambdas {
            let mus = angular_eigenvalues(lambda, k, l_max, params)?;
            for (i, &mu) in mus.iter().enumerate() {
                let l = (i + 1) as u32;
                let pair = angular_eigenfunction(lambda, k, l, mu, params)?;
                eigen_csv.push_str(&format!("{k},{l},{lambda},{mu},{}\n", pair.residual));
                let mut fn_csv = String::from("theta,Re(u1),Im(u1),Re(u2),Im(u2)\n");
                for j in 0..pair.theta.len() {
                    fn_csv.push_str(&format!(
                        "{},{},{},{},{}\n",
                        pair.theta[j],
                        pair.u1[j].re,
                        pair.u1[j].im,
                        pair.u2[j].re,
                        pair.u2[j].im
                    ));
                }
                write_file(
                    &out.join(format!("eigenfunction_k{k}_l{l}_lambda{lambda}.csv")),
                    &fn_csv,
                )?;
            }
        }
    }
    if cfg.has("muntz_L") {
        let big_l = cfg.usize_or("muntz_L", 200)? as u32;
        let mut muntz_csv = String::from("k,lambda,L,partial_sum,log_slope\n");
        for &k in &ks {
            for &lambda in &lambdas {
                let cert = muntz_certificate(lambda, k, big_l, params)?;
                for (l, s) in &cert.partial_sums {
                    muntz_csv.push_str(&format!("{k},{lambda},{l},{s},{}\n", cert.log_slope));
                }
            }
        }
        write_file(&out.join("muntz.csv"), &muntz_csv)?;
    }
    write_file(&out.join("eigenvalues.csv"), &eigen_csv)?;
    Ok(())
}

fn cmd_scatter(cfg: &Config, params: &BlackHoleParams, out: &Path) -> Result<(), CliError> {
    let ks = cfg.list_or("k", &[0.5])?;
    let lambdas = cfg.list_or("lambda", &[0.3])?;
    if lambdas.is_empty() {
        return Err(CliError::Config(
            "scatter needs a non-empty lambda list".into(),
        ));
    }
    let z_re = cfg.list_or("z", &[0.5, 1.0, 1.5, 2.0, 3.0, 4.0])?;
    let z_im = cfg.list_or("z_im", &[0.0])?;
    let mut rows = String::from("lambda,k,z_re,z_im,T_re,T_im,R_re,R_im,L_re,L_im,method\n");
    let mut al_dump = Vec::new();
    for &k in &ks {
        let profile = profile_for(cfg, params, k)?;
        for &lambda in &lambdas {
            let engine = ScatteringEngine::new(&profile, lambda);
            let zs: Vec<Complex64> = z_re
                .iter()
                .flat_map(|&re| z_im.iter().map(move |&im| Complex64::new(re, im)))
                .collect();
            let results: Vec<_> = zs
                .par_iter()
                .map(|&z| engine.record(z, PathChoice::Auto).map(|s| (z, s)))
                .collect::<Result<_, _>>()
                .map_err(CliError::from)?;
            for (z, scattered) in results {
                match scattered {
                    Scattered::Record(rec) => {
                        rows.push_str(&format!(
                            "{lambda},{k},{},{},{},{},{},{},{},{},{}\n",
                            z.re,
                            z.im,
                            rec.phys.t.re,
                            rec.phys.t.im,
                            rec.phys.r.re,
                            rec.phys.r.im,
                            rec.phys.l.re,
                            rec.phys.l.im,
                            rec.method
                        ));
                        let al = engine.al(z, PathChoice::Auto)?;
                        al_dump.push(serde_json::json!({
                            "lambda": lambda,
                            "k": k,
                            "z": [z.re, z.im],
                            "a_l": (0..4).map(|j| {
                                let v = al.m.0[j];
                                serde_json::json!([v.re, v.im])
                            }).collect::<Vec<_>>(),
                            "log_scale": al.log_scale,
                        }));
                    }
                    Scattered::Pole(p) => {
                        rows.push_str(&format!(
                            "{lambda},{k},{},{},nan,nan,nan,nan,nan,nan,pole\n",
                            p.z.re, p.z.im
                        ));
                    }
                }
            }
        }
    }
    write_file(&out.join("scattering.csv"), &rows)?;
    write_file(
        &out.join("al_matrices.json"),
        &serde_json::to_string_pretty(&al_dump).unwrap(),
    )?;
    Ok(())
}

fn cmd_asymptotics(cfg: &Config, params: &BlackHoleParams, out: &Path) -> Result<(), CliError> {
    let ks = cfg.list_or("k", &[0.5])?;
    let lambdas = cfg.list_or("lambda", &[0.3])?;
    let za = cfg.list_or("zA", &[30.0, 35.0, 40.0, 45.0, 50.0, 55.0, 60.0])?;
    let mut rows = String::from(
        "lambda,k,z,|T|,argT,|R|,argR,|L|,argL,pred_|T|,pred_argT,pred_|R|,pred_argR,pred_|L|,pred_argL\n",
    );
    for &k in &ks {
        let profile = profile_for(cfg, params, k)?;
        for &lambda in &lambdas {
            let engine = ScatteringEngine::new(&profile, lambda);
            let model = AsymptoticModel::new(&profile, lambda);
            for &w in &za {
                let z = w / profile.a_total;
                let rec = engine.record_real(z, PathChoice::Ode)?;
                let pred = model.predict_scattering(z);
                rows.push_str(&format!(
                    "{lambda},{k},{z},{},{},{},{},{},{},{},{},{},{},{},{}\n",
                    rec.phys.t_log_abs.exp(),
                    rec.phys.t.arg(),
                    rec.phys.r.norm(),
                    rec.phys.r.arg(),
                    rec.phys.l.norm(),
                    rec.phys.l.arg(),
                    pred.t_log_abs.exp(),
                    pred.t.arg(),
                    pred.r.norm(),
                    pred.r.arg(),
                    pred.l.norm(),
                    pred.l.arg()
                ));
            }
        }
    }
    write_file(&out.join("asymptotics.csv"), &rows)?;
    Ok(())
}

fn cmd_inverse(
    cfg: &Config,
    params: &BlackHoleParams,
    out: &Path,
    seed: Option<u64>,
) -> Result<(), CliError> {
    let mut opts = InverseOpts {
        lambda1: cfg.f64_or("lambda1", 0.3)?,
        lambda2: cfg.f64_or("lambda2", 0.45)?,
        za_lo: cfg.f64_or("zA_lo", 40.0)?,
        za_hi: cfg.f64_or("zA_hi", 240.0)?,
        z_count: cfg.usize_or("z_n", 16)?,
        k1: cfg.f64_or("k1", 0.5)?,
        k2: cfg.f64_or("k2", 1.5)?,
        grid_spacing: cfg.f64_or("grid_spacing", 0.008)?,
        noise_sigma: cfg.f64_or("noise_sigma", 0.0)?,
        ..InverseOpts::default()
    };
    if let Some(s) = seed {
        opts.noise_seed = s;
    }
    let report = full_inverse(params, &opts)?;
    write_file(
        &out.join("inverse_report.json"),
        &serde_json::to_string_pretty(&report).unwrap(),
    )?;
    let truth_q2 = params.charge * params.charge;
    let h = horizon_roots(params)?;
    let residual = report
        .delta_residual_plus
        .max(report.delta_residual_minus);
    let mut diag = String::from("quantity,estimate,truth,rel_error,residual\n");
    for (name, est, truth, rel) in [
        ("M", report.mass_est, params.mass, report.rel_errors.mass),
        (
            "Q2",
            report.q_squared_est,
            truth_q2,
            report.rel_errors.q_squared,
        ),
        ("a", report.a_est, params.spin, report.rel_errors.spin),
        (
            "Lambda",
            report.lambda_cosmo_est,
            params.cosmological,
            report.rel_errors.lambda_cosmo,
        ),
        (
            "kappa_minus",
            report.kappa_minus_est,
            h.kappa_minus,
            report.rel_errors.kappa_minus,
        ),
        (
            "kappa_plus",
            report.kappa_plus_est,
            h.kappa_plus,
            report.rel_errors.kappa_plus,
        ),
        (
            "r_minus",
            report.r_minus_est,
            h.r_minus,
            report.rel_errors.r_minus,
        ),
        (
            "r_plus",
            report.r_plus_est,
            h.r_plus,
            report.rel_errors.r_plus,
        ),
    ] {
        diag.push_str(&format!("{name},{est},{truth},{rel},{residual}\n"));
    }
    write_file(&out.join("fit_diagnostics.csv"), &diag)?;
    Ok(())
}

fn cmd_compare(cfg: &Config, params: &BlackHoleParams, out: &Path) -> Result<(), CliError> {
    let p2 = cfg.params2()?.ok_or_else(|| {
        CliError::Config("compare needs a second parameter set (M2=...)".into())
    })?;
    let lambda = cfg.f64_or("lambda1", cfg.list_or("lambda", &[0.3])?[0])?;
    let ks = cfg.list_or("k", &[0.5, 1.5])?;
    let ls: Vec<u32> = cfg
        .list_or("l", &[1.0, 2.0])?
        .into_iter()
        .map(|v| v as u32)
        .collect();
    let tol = cfg.f64_or("tol", 1e-8)?;
    let report = compare_blackholes(params, &p2, lambda, &ks, &ls, tol)?;
    write_file(
        &out.join("compare_report.json"),
        &serde_json::to_string_pretty(&report).unwrap(),
    )?;
    println!(
        "verdict: {} (margin {:.3e} at tol {:.1e}, aligned c = {:.6})",
        if report.distinguishable {
            "distinguishable"
        } else {
            "indistinguishable"
        },
        report.margin,
        report.tolerance,
        report.c_aligned
    );
    Ok(())
}
