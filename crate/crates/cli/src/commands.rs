use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde_json::json;

use revheston::calibration::{calibrate, CalibrationConfig, Weighting};
use revheston::charfn::{cf_limit, cf_reversionary, FourierArg};
use revheston::mc::{empirical_cf, simulate_reversionary, z_score, CirScheme, SampleConfig};
use revheston::params::{days_to_years, TRADING_DAYS};
use revheston::pricing::{atm_skew, cos_price, implied_vol, skew_csv, smile, VolSurface};
use revheston::Regime;

use crate::config::{
    parse, CalibrateConfig, ConvergeConfig, PriceConfig, SimulateConfig, SkewConfig, SmileConfig, TimeUnit, WeightSpec,
};
use crate::{CliError, Common};

/// Files produced by a command, relative to the output directory.
type Outputs = Vec<(String, String)>;

pub fn run(name: &str, common: &Common) -> Result<(), CliError> {
    let start = Instant::now();
    let text = fs::read_to_string(&common.config)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", common.config.display())))?;
    let threads = common.threads.unwrap_or(0);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    let base_dir = common.config.parent().map(Path::to_path_buf).unwrap_or_default();
    let mut seed = common.seed;
    let result = pool.install(|| match name {
        "price" => price(&text),
        "converge" => converge(&text),
        "smile" => smile_cmd(&text),
        "skew" => skew(&text),
        "calibrate" => calibrate_cmd(&text, &base_dir),
        "simulate" => simulate(&text, &mut seed),
        _ => Err(fail(CliError::Config(format!("unknown command {name}")))),
    });
    let (outputs, status) = match result {
        Ok(out) => (out, Ok(())),
        Err((out, e)) => (out, Err(e)),
    };
    fs::create_dir_all(&common.out)
        .map_err(|e| CliError::Config(format!("cannot create {}: {e}", common.out.display())))?;
    for (file, body) in &outputs {
        write(&common.out.join(file), body)?;
    }
    let manifest = json!({
        "command": name,
        "config": common.config.display().to_string(),
        "out": common.out.display().to_string(),
        "seed": seed,
        "threads": threads,
        "version": env!("CARGO_PKG_VERSION"),
        "wall_time_s": start.elapsed().as_secs_f64(),
        "outputs": outputs.iter().map(|o| o.0.clone()).collect::<Vec<_>>(),
        "status": match &status { Ok(()) => "ok".to_string(), Err(e) => e.to_string() },
    });
    write(
        &common.out.join("manifest.json"),
        &serde_json::to_string_pretty(&manifest).unwrap(),
    )?;
    status
}

fn write(path: &PathBuf, body: &str) -> Result<(), CliError> {
    fs::write(path, body).map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))
}

type CmdResult = Result<Outputs, (Outputs, CliError)>;

fn fail<E: Into<CliError>>(e: E) -> (Outputs, CliError) {
    (Vec::new(), e.into())
}

fn price(text: &str) -> CmdResult {
    let cfg: PriceConfig = parse(text).map_err(fail)?;
    let model = cfg.model.model().map_err(fail)?;
    let cos = cfg.cos.unwrap_or_default();
    let spot = revheston::pricing::CfProvider::spot(&model);
    let mut out = String::from("maturity_years,strike,call_price,implied_vol\n");
    for &t in &cfg.maturities {
        for &k in &cfg.strikes {
            let p = cos_price(&model, k, t, &cos).map_err(fail)?;
            let iv = if k > 0.0 {
                implied_vol(p, spot, k, t).map(|v| v.to_string()).unwrap_or_default()
            } else {
                String::new()
            };
            let _ = writeln!(out, "{t},{k},{p},{iv}");
        }
    }
    Ok(vec![("prices.csv".into(), out)])
}

fn eps_years(value: f64, unit: TimeUnit) -> f64 {
    match unit {
        TimeUnit::Days => days_to_years(value),
        TimeUnit::Years => value,
    }
}

fn converge(text: &str) -> CmdResult {
    let cfg: ConvergeConfig = parse(text).map_err(fail)?;
    let mut out = String::from("regime,h,u,v,eps_days,re_cf,im_cf,re_limit,im_limit,abs_err\n");
    for run in &cfg.regimes {
        let regime = Regime::parse(&run.regime)
            .ok_or_else(|| fail(CliError::Config(format!("unknown regime {:?}", run.regime))))?;
        for &e in &cfg.eps {
            let eps = eps_years(e, cfg.eps_unit);
            let p = revheston::ReversionaryParams::new(1.0, cfg.v0, cfg.theta, cfg.xi, cfg.rho, eps, run.h)
                .map_err(fail)?;
            for &u in &cfg.u {
                let arg = FourierArg::new(u, cfg.v);
                let a = cf_reversionary(arg, 0.0, cfg.maturity, 0.0, p.v0, &p).map_err(fail)?;
                let b = cf_limit(arg, cfg.maturity, &p, regime).map_err(fail)?;
                let _ = writeln!(
                    out,
                    "{},{},{u},{},{},{},{},{},{},{}",
                    regime.name(),
                    run.h,
                    cfg.v,
                    eps * TRADING_DAYS,
                    a.re,
                    a.im,
                    b.re,
                    b.im,
                    (a - b).norm()
                );
            }
        }
    }
    Ok(vec![("converge.csv".into(), out)])
}

fn smile_cmd(text: &str) -> CmdResult {
    let cfg: SmileConfig = parse(text).map_err(fail)?;
    let model = cfg.model.model().map_err(fail)?;
    let surface = smile(&model, &cfg.maturities, &cfg.log_moneyness, &cfg.cos.unwrap_or_default()).map_err(fail)?;
    let missing = surface.missing_cells();
    if !missing.is_empty() {
        eprintln!("warning: {} cells without implied vol", missing.len());
    }
    Ok(vec![("smile.csv".into(), surface.to_csv())])
}

fn skew(text: &str) -> CmdResult {
    let cfg: SkewConfig = parse(text).map_err(fail)?;
    let model = cfg.model.model().map_err(fail)?;
    let cos = cfg.cos.unwrap_or_default();
    let points = cfg
        .maturities
        .iter()
        .map(|&t| atm_skew(&model, t, cfg.dk, &cos).map(|s| (t, s)))
        .collect::<Result<Vec<_>, _>>()
        .map_err(fail)?;
    Ok(vec![("skew.csv".into(), skew_csv(&points))])
}

fn calibrate_cmd(text: &str, base_dir: &Path) -> CmdResult {
    let cfg: CalibrateConfig = parse(text).map_err(fail)?;
    let base = cfg.base.params().map_err(fail)?;
    let path = base_dir.join(&cfg.target);
    let target_text = fs::read_to_string(&path)
        .map_err(|e| fail(CliError::Config(format!("cannot read {}: {e}", path.display()))))?;
    let target = VolSurface::from_csv(&target_text, base.s0).map_err(fail)?;
    let mut cc = CalibrationConfig::new(base);
    cc.weighting = match cfg.weighting {
        None | Some(WeightSpec::Uniform) => Weighting::Uniform,
        Some(WeightSpec::InverseVega) => Weighting::InverseVega,
    };
    if let Some((lo, hi)) = cfg.eps_bounds {
        cc.eps_bounds = (lo.years(), hi.years());
    }
    if let Some(b) = cfg.h_bounds {
        cc.h_bounds = b;
    }
    if let Some(n) = cfg.max_iterations {
        cc.max_iterations = n;
    }
    if let Some(n) = cfg.restarts {
        cc.restarts = n;
    }
    if let Some(t) = cfg.loss_threshold {
        cc.loss_threshold = t;
    }
    cc.cos = cfg.cos.unwrap_or_default();
    let r = calibrate(&target, &cc).map_err(fail)?;
    let summary = json!({
        "eps_hat": r.eps_hat,
        "eps_hat_days": r.eps_hat * TRADING_DAYS,
        "H_hat": r.h_hat,
        "loss": r.loss,
        "initial_loss": r.initial_loss,
        "iterations": r.iterations,
        "converged": r.converged,
    });
    let outputs = vec![
        ("calibration.json".into(), serde_json::to_string_pretty(&summary).unwrap()),
        ("trace.csv".into(), r.trace_csv()),
    ];
    if r.converged {
        Ok(outputs)
    } else {
        let msg = format!("loss {:.3e} after {} iterations", r.loss, r.iterations);
        Err((outputs, CliError::NotConverged(msg)))
    }
}

fn simulate(text: &str, seed: &mut Option<u64>) -> CmdResult {
    let cfg: SimulateConfig = parse(text).map_err(fail)?;
    let params = cfg.params.params().map_err(fail)?;
    let s = seed.or(cfg.seed).unwrap_or(0);
    *seed = Some(s);
    let sc = SampleConfig {
        n_paths: cfg.n_paths,
        grid: cfg.grid.clone(),
        seed: s,
        scheme: CirScheme::FullTruncationEuler,
        substeps: cfg.substeps,
    };
    let paths = simulate_reversionary(&params, &sc).map_err(fail)?;
    let last = paths.grid.len() - 1;
    let horizon = paths.grid[last];
    let xs = paths.at(last);
    let mut out = String::from("u,v,re_mc,im_mc,se_re,se_im,re_exact,im_exact,z_score\n");
    for &(u, v) in &cfg.points {
        let arg = FourierArg::new(u, v);
        let (m, se) = empirical_cf(&xs, arg).map_err(fail)?;
        let exact = cf_reversionary(arg, 0.0, horizon, params.s0.ln(), params.v0, &params).map_err(fail)?;
        let _ = writeln!(
            out,
            "{u},{v},{},{},{},{},{},{},{}",
            m.re,
            m.im,
            se.re,
            se.im,
            exact.re,
            exact.im,
            z_score(m, se, exact)
        );
    }
    let mut outputs = vec![("simulate_cf.csv".to_string(), out)];
    if cfg.dump_paths {
        outputs.push(("paths.csv".into(), paths.to_csv()));
    }
    Ok(outputs)
}
