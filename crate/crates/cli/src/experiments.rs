//! Dispatch from a config to the library, producing one tabular report.

use mvlab::additive::{default_z_grid, gaussian_comparison, omega_phi_report, tk_suite, turan_kubilius, WeightedEmpiricalCDF};
use mvlab::estimates::{
    comparison_prediction, mf_bound, gallagher_check, halasz_rhs, hypothesis_diagnostics, random_gallagher_instance,
    wirsing_main_term, HypothesisParams, DEFAULT_TAU_STEP,
};
use mvlab::local_laws::{histogram_generating_sum, local_law_report, omega_histogram, s_exact_many, HistogramMode, LocalLawReport};
use mvlab::mean_values::{mean_value, mean_value_series, prime_sums, MeanValueSeries};
use mvlab::registry::{parse_complex, parse_prime_set, parse_rule, parse_rule_of_kind, RuleContext};
use mvlab::{Complex64, PrimePowerRule, RuleKind, Streaming};
use serde_json::{json, Value};

use crate::config::{field_error, ConfigError, Experiment, ExperimentConfig};

/// Default Gallagher instance shape.
const GALLAGHER_T_VALUES: [f64; 3] = [0.5, 1.0, 5.0];
const GALLAGHER_MAX_N: usize = 200;

#[derive(Debug)]
pub enum RunError {
    Config(ConfigError),
    /// A library error, with the config field it came from when known.
    Lab { field: Option<String>, err: mvlab::Error },
}

impl From<ConfigError> for RunError {
    fn from(e: ConfigError) -> Self {
        Self::Config(e)
    }
}

impl From<mvlab::Error> for RunError {
    fn from(err: mvlab::Error) -> Self {
        Self::Lab { field: None, err }
    }
}

fn at(field: &str) -> impl FnOnce(mvlab::Error) -> RunError + '_ {
    move |err| RunError::Lab { field: Some(field.to_string()), err }
}

/// A finished experiment: one table plus a JSON document with the same data.
pub struct Report {
    /// Schema name, e.g. `mean_value`.
    pub kind: &'static str,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub json: Value,
    pub summary: Vec<String>,
    /// Largest `n` factorized, 0 if no sieve ran.
    pub sieve_limit: u64,
}

fn header(cols: &[&str]) -> Vec<String> {
    cols.iter().map(|s| s.to_string()).collect()
}

fn row(cells: impl IntoIterator<Item = f64>) -> Vec<String> {
    cells.into_iter().map(|v| v.to_string()).collect()
}

fn rel_err(a: Complex64, b: Complex64) -> f64 {
    (a / b - 1.0).norm()
}

struct Ctx<'a> {
    cfg: &'a ExperimentConfig,
    rules: RuleContext,
    streaming: Streaming,
}

impl Ctx<'_> {
    fn rule(&mut self, field: &str, value: &Option<String>, default: Option<&str>) -> Result<PrimePowerRule, RunError> {
        let spec = match (value, default) {
            (Some(s), _) => s.as_str(),
            (None, Some(d)) => d,
            (None, None) => return Err(self.cfg.require::<String>(field, &None).unwrap_err().into()),
        };
        parse_rule(spec, &mut self.rules).map_err(at(field))
    }

    fn rule_of_kind(&mut self, field: &str, value: &Option<String>, kind: RuleKind) -> Result<PrimePowerRule, RunError> {
        let spec = self.cfg.require(field, value)?;
        parse_rule_of_kind(spec, kind, &mut self.rules).map_err(at(field))
    }

    fn t_or_log_x(&self, x: f64) -> f64 {
        self.cfg.t.unwrap_or_else(|| x.ln())
    }
}

pub fn run(cfg: &ExperimentConfig, threads: usize) -> Result<Report, RunError> {
    let seed = cfg.seed.unwrap_or(0);
    let factor_limit = cfg.checkpoints.iter().flatten().chain(&cfg.x).fold(2.0f64, |m, &v| m.max(v)) as u64;
    let mut streaming = Streaming { threads: threads.max(1), ..Streaming::default() };
    if let Some(len) = cfg.segment_length {
        if len == 0 {
            return Err(field_error("segment_length", "must be positive").into());
        }
        streaming.segment_length = len;
    }
    let mut ctx = Ctx { cfg, rules: RuleContext::new(seed, factor_limit), streaming };
    match cfg.experiment {
        Experiment::MeanValue => run_mean_value(&mut ctx),
        Experiment::PrimeSums => run_prime_sums(&mut ctx),
        Experiment::Halasz => run_halasz(&mut ctx),
        Experiment::Wirsing => run_wirsing(&mut ctx),
        Experiment::Comparison => run_comparison(&mut ctx),
        Experiment::LocalLaw => run_local_law(&mut ctx),
        Experiment::Clt => run_clt(&mut ctx),
        Experiment::OmegaPhi => run_omega_phi(&mut ctx),
        Experiment::Tk => run_tk(&mut ctx),
        Experiment::Gallagher => run_gallagher(&mut ctx),
        Experiment::Hypotheses => run_hypotheses(&mut ctx),
    }
}

fn series_report(kind: &'static str, series: &MeanValueSeries, json: Value, summary: Vec<String>) -> Report {
    Report {
        kind,
        header: header(&MeanValueSeries::CSV_HEADER),
        rows: series.rows().map(|(x, v)| std::iter::once(x.to_string()).chain(row(v)).collect()).collect(),
        json,
        summary,
        sieve_limit: *series.checkpoints.last().unwrap_or(&0),
    }
}

fn run_mean_value(ctx: &mut Ctx) -> Result<Report, RunError> {
    let f = ctx.rule("f", &ctx.cfg.f, None)?;
    let xs = ctx.cfg.checkpoint_ints()?;
    let series = mean_value_series(&f, &xs, &ctx.streaming).map_err(at("f"))?;
    let m = series.last_m();
    let summary = vec![format!("M({}; {}) = {} {:+}i", xs[xs.len() - 1], f.name(), m.re, m.im)];
    let json = json!({ "f": f.name(), "series": series });
    Ok(series_report("mean_value", &series, json, summary))
}

fn run_prime_sums(ctx: &mut Ctx) -> Result<Report, RunError> {
    let f = ctx.rule("f", &ctx.cfg.f, Some("one"))?;
    let ys = ctx.cfg.checkpoint_list()?;
    let series = prime_sums(&f, &ys).map_err(at("f"))?;
    let mut rows = Vec::new();
    for ((y, z), z1) in series.checkpoints.iter().zip(&series.z_values).zip(&series.z1_values) {
        rows.push(row([*y, z.re, z.im, z1.re, z1.im, z.re - y.ln().ln()]));
    }
    let last = rows.last().map(|r| r[5].clone()).unwrap_or_default();
    Ok(Report {
        kind: "prime_sums",
        header: header(&["y", "re_z", "im_z", "re_z1", "im_z1", "re_z_minus_loglog"]),
        rows,
        json: json!({ "f": f.name(), "series": series }),
        summary: vec![format!("Z(y; {}) - log log y at y = {}: {last}", f.name(), ys[ys.len() - 1])],
        sieve_limit: 0,
    })
}

fn run_halasz(ctx: &mut Ctx) -> Result<Report, RunError> {
    let f = ctx.rule("f", &ctx.cfg.f, None)?;
    let r = ctx.rule("r", &ctx.cfg.r, Some("one"))?;
    let x = ctx.cfg.x_int()?;
    let xf = x as f64;
    if x < 3 {
        return Err(field_error("x", "must be >= 3").into());
    }
    let t = ctx.t_or_log_x(xf);
    let tau_step = ctx.cfg.tau_step.unwrap_or(DEFAULT_TAU_STEP);
    let halasz = halasz_rhs(&f, &r, xf, t, ctx.cfg.drop_tail.unwrap_or(false), tau_step)?;
    let bound = mf_bound(&f, &r, xf, t, &ctx.streaming)?;
    let m = mean_value(&f, x, &ctx.streaming)?;
    let quantities = [
        ("abs_m", m.norm()),
        ("halasz_rhs", halasz.rhs),
        ("integral_term", halasz.integral_term),
        ("sqrt_t_term", halasz.sqrt_t_term),
        ("tail_term", halasz.tail_term),
        ("quadrature_error", halasz.quadrature_error),
        ("z_r", halasz.z_r),
        ("m_f", bound.m_f),
        ("argmin_tau", bound.argmin_tau),
        ("mass_r", bound.mass_r),
        ("mf_bound", bound.bound),
    ];
    Ok(Report {
        kind: "halasz",
        header: header(&["quantity", "value"]),
        rows: quantities.iter().map(|(k, v)| vec![k.to_string(), v.to_string()]).collect(),
        json: json!({ "f": f.name(), "r": r.name(), "mean_value": m, "halasz": halasz, "mf_bound": bound }),
        summary: vec![
            format!("|M(x; f)| = {}  at x = {x}, T = {t}", m.norm()),
            format!("Halasz rhs = {}  (ratio {})", halasz.rhs, m.norm() / halasz.rhs),
            format!("m_f bound = {}  (m_f = {}, ratio {})", bound.bound, bound.m_f, m.norm() / bound.bound),
        ],
        sieve_limit: x,
    })
}

fn run_wirsing(ctx: &mut Ctx) -> Result<Report, RunError> {
    let f = ctx.rule("f", &ctx.cfg.f, None)?;
    let rho = *ctx.cfg.require("rho", &ctx.cfg.rho)?;
    let xs = ctx.cfg.checkpoint_ints()?;
    let series = mean_value_series(&f, &xs, &ctx.streaming).map_err(at("f"))?;
    let mut rows = Vec::new();
    let mut summary = Vec::new();
    let mut points = Vec::new();
    for (&x, &m) in xs.iter().zip(&series.m_values) {
        let main = wirsing_main_term(&f, rho, x as f64).map_err(at("rho"))?;
        let err = rel_err(m, main);
        rows.push(row([x as f64, m.re, m.im, main.re, main.im, err]));
        summary.push(format!("x = {x}: |M/main - 1| = {err}"));
        points.push(json!({ "x": x, "m": m, "main_term": main, "rel_err": err }));
    }
    Ok(Report {
        kind: "wirsing",
        header: header(&["x", "re_m", "im_m", "re_main", "im_main", "rel_err"]),
        rows,
        json: json!({ "f": f.name(), "rho": rho, "points": points }),
        summary,
        sieve_limit: xs[xs.len() - 1],
    })
}

fn run_comparison(ctx: &mut Ctx) -> Result<Report, RunError> {
    let f = ctx.rule("f", &ctx.cfg.f, None)?;
    let r = ctx.rule("r", &ctx.cfg.r, None)?;
    let xs = ctx.cfg.checkpoint_ints()?;
    let series = mean_value_series(&f, &xs, &ctx.streaming).map_err(at("f"))?;
    let mut rows = Vec::new();
    let mut summary = Vec::new();
    let mut points = Vec::new();
    for (&x, &m) in xs.iter().zip(&series.m_values) {
        let pred = comparison_prediction(&f, &r, x as f64, &ctx.streaming)?;
        let err = rel_err(m, pred);
        rows.push(row([x as f64, m.re, m.im, pred.re, pred.im, err]));
        summary.push(format!("x = {x}: |M(x; f) / prediction - 1| = {err}"));
        points.push(json!({ "x": x, "m": m, "prediction": pred, "rel_err": err }));
    }
    Ok(Report {
        kind: "comparison",
        header: header(&["x", "re_m", "im_m", "re_prediction", "im_prediction", "rel_err"]),
        rows,
        json: json!({ "f": f.name(), "r": r.name(), "points": points }),
        summary,
        sieve_limit: xs[xs.len() - 1],
    })
}

fn local_law_rows(rep: &LocalLawReport) -> Vec<Vec<String>> {
    (0..=rep.m_max())
        .map(|m| {
            let mut cells = vec![m.to_string(), rep.counts[m].to_string()];
            cells.extend(row([rep.crude[m], rep.refined[m], rep.ratio_crude(m), rep.ratio_refined(m)]));
            cells.push(rep.in_range[m].to_string());
            cells
        })
        .collect()
}

fn run_local_law(ctx: &mut Ctx) -> Result<Report, RunError> {
    let cfg = ctx.cfg;
    let set = parse_prime_set(cfg.set.as_deref().unwrap_or("all"), cfg.seed.unwrap_or(0)).map_err(at("E"))?;
    let x = cfg.x_int()?;
    let kappa = cfg.kappa.unwrap_or(0.3);
    let mode = cfg.mode.unwrap_or(HistogramMode::BigOmega);
    let rep = local_law_report(&set, x, kappa, mode, &ctx.streaming).map_err(at("kappa"))?;
    let window: Vec<usize> = rep.window().collect();
    let mut summary = vec![format!("E(x) = {}, window m = {:?}", rep.e_of_x, window)];
    for &m in &window {
        summary.push(format!("m = {m}: N_m = {}, crude ratio {}, refined ratio {}", rep.counts[m], rep.ratio_crude(m), rep.ratio_refined(m)));
    }

    let mut identity = Vec::new();
    if let Some(zs) = &cfg.z {
        let zs: Vec<Complex64> = zs.iter().map(|s| parse_complex(s)).collect::<Result<_, _>>().map_err(at("z"))?;
        let counts = omega_histogram(&set, x, mode, &ctx.streaming)?;
        let direct = s_exact_many(&set, &zs, x, mode, &ctx.streaming)?;
        for (z, s) in zs.iter().zip(direct) {
            let g = histogram_generating_sum(&counts, *z);
            let err = rel_err(g, s);
            summary.push(format!("z = {z}: sum N_m z^m vs S_exact rel err {err}"));
            identity.push(json!({ "z": z, "generating_sum": g, "s_exact": s, "rel_err": err }));
        }
    }
    Ok(Report {
        kind: "local_law",
        header: header(&LocalLawReport::CSV_HEADER),
        rows: local_law_rows(&rep),
        json: json!({ "report": rep, "generating_identity": identity }),
        summary,
        sieve_limit: x,
    })
}

fn cdf_rows(cdf: &WeightedEmpiricalCDF, center: f64, scale: f64) -> Vec<Vec<String>> {
    cdf.comparison_table(center, scale, &default_z_grid()).into_iter().map(row).collect()
}

const CDF_HEADER: [&str; 4] = ["z", "F_x", "Phi", "gap"];

fn run_clt(ctx: &mut Ctx) -> Result<Report, RunError> {
    let h = ctx.rule_of_kind("h", &ctx.cfg.h, RuleKind::Additive)?;
    let r = ctx.rule("r", &ctx.cfg.r, Some("one"))?;
    let x = ctx.cfg.x_int()?;
    let (rep, cdf) = gaussian_comparison(&h, &r, x, &ctx.streaming)?;
    let rows = cdf_rows(&cdf, rep.e_h, rep.d_h);
    Ok(Report {
        kind: "clt",
        header: header(&CDF_HEADER),
        rows,
        json: json!({ "h": h.name(), "r": r.name(), "report": rep, "table": cdf.comparison_table(rep.e_h, rep.d_h, &default_z_grid()) }),
        summary: vec![
            format!("E_h = {}, D_h = {} at x = {x}", rep.e_h, rep.d_h),
            format!("Kolmogorov distance = {}  (1/sqrt(log log x) = {})", rep.kolmogorov_distance, 1.0 / (x as f64).ln().ln().sqrt()),
        ],
        sieve_limit: x,
    })
}

fn run_omega_phi(ctx: &mut Ctx) -> Result<Report, RunError> {
    let r = ctx.rule("r", &ctx.cfg.r, Some("one"))?;
    let rho = ctx.cfg.rho.unwrap_or(1.0);
    let x = ctx.cfg.x_int()?;
    let (rep, cdf) = omega_phi_report(&r, rho, x, &ctx.streaming).map_err(at("x"))?;
    Ok(Report {
        kind: "omega_phi",
        header: header(&CDF_HEADER),
        rows: cdf_rows(&cdf, rep.center, rep.scale),
        json: json!({ "r": r.name(), "report": rep, "table": cdf.comparison_table(rep.center, rep.scale, &default_z_grid()) }),
        summary: vec![
            format!("center = {}, scale = {} (exact E_h = {}, D_h = {})", rep.center, rep.scale, rep.e_h, rep.d_h),
            format!("Kolmogorov distance = {}  (envelope {})", rep.kolmogorov_distance, rep.envelope),
        ],
        sieve_limit: x,
    })
}

fn run_tk(ctx: &mut Ctx) -> Result<Report, RunError> {
    let x = ctx.cfg.x_int()?;
    let pairs = match (&ctx.cfg.lambda, &ctx.cfg.theta) {
        (None, None) => tk_suite(ctx.cfg.seed.unwrap_or(0)),
        (lambda, theta) => {
            let l = ctx.rule_of_kind("lambda", lambda, RuleKind::Multiplicative)?;
            let t = ctx.rule_of_kind("theta", theta, RuleKind::Additive)?;
            vec![(l, t)]
        }
    };
    let mut rows = Vec::new();
    let mut reports = Vec::new();
    let mut worst = 0.0f64;
    for (lambda, theta) in &pairs {
        let rep = turan_kubilius(lambda, theta, x, &ctx.streaming)?;
        worst = worst.max(rep.ratio);
        let mut cells = vec![lambda.name().to_string(), theta.name().to_string()];
        cells.extend(row([x as f64, rep.lhs, rep.l, rep.frak_s, rep.ratio]));
        rows.push(cells);
        reports.push(json!({ "lambda": lambda.name(), "theta": theta.name(), "report": rep }));
    }
    Ok(Report {
        kind: "tk",
        header: header(&["lambda", "theta", "x", "lhs", "L", "frak_s", "ratio"]),
        rows,
        json: json!({ "reports": reports }),
        summary: vec![format!("{} pair(s) at x = {x}; max lhs/(L frak_s) = {worst}", pairs.len())],
        sieve_limit: x,
    })
}

fn run_gallagher(ctx: &mut Ctx) -> Result<Report, RunError> {
    let cfg = ctx.cfg;
    let step = cfg.tau_step;
    let instances: Vec<(Vec<f64>, Vec<Complex64>, f64)> = match (&cfg.points, cfg.instances) {
        (Some(points), None) => {
            let coeffs: Vec<Complex64> = cfg.require("coeffs", &cfg.coeffs)?.iter().map(|s| parse_complex(s)).collect::<Result<_, _>>().map_err(at("coeffs"))?;
            vec![(points.clone(), coeffs, *cfg.require("T", &cfg.t)?)]
        }
        (None, Some(n)) => {
            let ts = cfg.t_values.clone().unwrap_or(GALLAGHER_T_VALUES.to_vec());
            if ts.is_empty() {
                return Err(field_error("t_values", "must not be empty").into());
            }
            let seed = cfg.seed.unwrap_or(0);
            (seed..seed + n)
                .map(|s| {
                    let g = random_gallagher_instance(s, cfg.max_n.unwrap_or(GALLAGHER_MAX_N), &ts);
                    (g.points, g.coeffs, g.t)
                })
                .collect()
        }
        _ => return Err(field_error("points", "give either points + coeffs + T, or instances").into()),
    };
    let mut rows = Vec::new();
    let mut results = Vec::new();
    let mut worst = 0.0f64;
    for (i, (points, coeffs, t)) in instances.iter().enumerate() {
        let g = gallagher_check(points, coeffs, *t, step).map_err(at("points"))?;
        worst = worst.max(g.ratio());
        rows.push(row([i as f64, points.len() as f64, *t, g.lhs, g.rhs, g.ratio()]));
        results.push(json!({ "n": points.len(), "t": t, "result": g }));
    }
    Ok(Report {
        kind: "gallagher",
        header: header(&["instance", "n", "T", "lhs", "rhs", "ratio"]),
        rows,
        json: json!({ "instances": results }),
        summary: vec![format!("{} instance(s); max lhs/rhs = {worst}", instances.len())],
        sieve_limit: 0,
    })
}

fn run_hypotheses(ctx: &mut Ctx) -> Result<Report, RunError> {
    let cfg = ctx.cfg;
    let f = ctx.rule("f", &cfg.f, None)?;
    let r = ctx.rule("r", &cfg.r, Some("one"))?;
    let x = *cfg.require("x", &cfg.x)?;
    let params = HypothesisParams {
        frak_a: *cfg.require("frak_a", &cfg.frak_a)?,
        frak_b: *cfg.require("frak_b", &cfg.frak_b)?,
        class_a: *cfg.require("class_a", &cfg.class_a)?,
        class_b: *cfg.require("class_b", &cfg.class_b)?,
        rho: *cfg.require("rho", &cfg.rho)?,
        eps: *cfg.require("eps", &cfg.eps)?,
        delta1: *cfg.require("delta1", &cfg.delta1)?,
    };
    let rep = hypothesis_diagnostics(&f, &r, &params, x, None)?;
    let d = rep.derived;
    let quantities = [
        ("frak_p", d.frak_p),
        ("beta", d.beta),
        ("frak_h", d.frak_h),
        ("beta0", d.beta0),
        ("delta0", d.delta0),
        ("w_f", d.w_f),
        ("delta", d.delta),
        ("eps1", d.eps1),
        ("gap_sum", rep.gap_sum),
        ("gap_threshold", rep.gap_threshold),
        ("large_gap_log_ratio", rep.large_gap_log_ratio),
        ("rho_density_ratio", rep.rho_density_ratio),
        ("large_gap_ratio", rep.large_gap_ratio),
        ("max_gap_ratio", rep.max_gap_ratio),
        ("short_interval_min_ratio", rep.short_interval_min_ratio.unwrap_or(f64::NAN)),
    ];
    Ok(Report {
        kind: "hypotheses",
        header: header(&["quantity", "value"]),
        rows: quantities.iter().map(|(k, v)| vec![k.to_string(), v.to_string()]).collect(),
        json: json!({ "f": f.name(), "r": r.name(), "report": rep }),
        summary: quantities.iter().map(|(k, v)| format!("{k:>24} = {v}")).collect(),
        sieve_limit: 0,
    })
}
