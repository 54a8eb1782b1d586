use rayon::prelude::*;

use truncgauss::ball::{alpha, alpha_mc, verify_structural, MultiIndex};
use truncgauss::eta::{asymptotic_checks, eta_fd_table, eta_table, oracle_equivalence};
use truncgauss::expansion::{convergence_estimate, gamma_nm_cancellation_check, gamma_nn_convergence};
use truncgauss::moments::{delta_sweep, inequality_battery, log_grid, sweep_lambdas, PointIntegrals, SWEEP_RHO};
use truncgauss::xi::{alpha_inverse_check, omega_inequality_scan, xi_dn_dd_convolution_check};
use truncgauss::{Report, Spectrum};

use crate::args::{CpArgs, EtaArgs, EtaMethod, FigureArgs, IntegralArgs, MomentsArgs, VerifyArgs};
use crate::output::{emit, render_report, Format, Table};
use crate::CliError;

pub fn integral(a: &IntegralArgs) -> Result<(), CliError> {
    let s = a.common.spectrum()?;
    let idx = MultiIndex::parse(&a.index, s.dim()).map_err(|e| CliError::Usage(e.to_string()))?;
    let rhos = a.common.rhos()?;
    let table = match a.samples {
        None => {
            let mut t = Table::new(["rho", "value", "est_abs_error"]);
            let rows: Vec<Vec<f64>> = rhos
                .par_iter()
                .map(|&rho| alpha(&idx, rho, &s).map(|r| vec![rho, r.value, r.est_abs_error]))
                .collect::<Result<_, _>>()?;
            rows.into_iter().for_each(|r| t.push(r));
            t
        }
        Some(n) => {
            let mut t = Table::new(["rho", "mean", "std_error", "n_kept", "n_total"]);
            for &rho in &rhos {
                let r = alpha_mc(&idx, rho, &s, n, a.seed)?;
                t.push(vec![rho, r.mean, r.std_error, r.n_kept as f64, r.n_total as f64]);
            }
            t
        }
    };
    emit(&table.render(a.common.table_format()), a.common.out.as_deref())
}

pub fn moments(a: &MomentsArgs) -> Result<(), CliError> {
    let s = a.common.spectrum()?;
    let rhos = a.common.rhos()?;
    let mut t = Table::new(["rho", "n", "second", "fourth", "delta", "delta_err", "gamma_nn"]);
    let blocks: Vec<Vec<Vec<f64>>> = rhos
        .par_iter()
        .map(|&rho| {
            let p = PointIntegrals::diagonal(rho, &s)?;
            Ok((0..s.dim())
                .map(|n| {
                    let d = p.delta(n);
                    vec![rho, (n + 1) as f64, p.second(n).value, p.fourth(n).value, d.value, d.err, p.gamma(n, n).value]
                })
                .collect())
        })
        .collect::<Result<_, truncgauss::Error>>()?;
    blocks.into_iter().flatten().for_each(|r| t.push(r));
    emit(&t.render(a.common.table_format()), a.common.out.as_deref())
}

pub fn eta(a: &EtaArgs) -> Result<(), CliError> {
    let s = a.common.spectrum()?;
    let rhos = a.common.rhos()?;
    let mut header = vec!["rho".to_string()];
    header.extend((0..=a.order).map(|k| format!("eta_{k}")));
    let mut t = Table::new(header);
    let rows: Vec<Vec<f64>> = rhos
        .par_iter()
        .map(|&rho| {
            let table = match a.method {
                EtaMethod::Combinatorial => eta_table(a.order, rho, &s)?,
                EtaMethod::Fd => eta_fd_table(a.order, rho, &s)?,
            };
            let mut row = vec![rho];
            row.extend(table.values);
            Ok(row)
        })
        .collect::<Result<_, truncgauss::Error>>()?;
    rows.into_iter().for_each(|r| t.push(r));
    emit(&t.render(a.common.table_format()), a.common.out.as_deref())
}

fn cp_table(vs: &[u32], p_min: usize, p_max: usize) -> Result<Table, CliError> {
    let mut t = Table::new(["v", "p", "C", "fit_A", "fit_eps", "fit_chi2"]);
    for &v in vs {
        let e = convergence_estimate(v, p_min, p_max)?;
        for (p, c) in e.p_values.iter().zip(&e.c_values) {
            t.push(vec![v as f64, *p as f64, *c, e.fit_a, e.fit_eps, e.fit_chi2]);
        }
    }
    Ok(t)
}

fn cp_dims(v: Option<u32>) -> Vec<u32> {
    v.map(|v| vec![v]).unwrap_or_else(|| (2..=6).collect())
}

pub fn cp(a: &CpArgs) -> Result<(), CliError> {
    let t = cp_table(&cp_dims(a.v), a.p_min, a.p_max)?;
    emit(&t.render(a.format), a.out.as_deref())
}

pub const DELTA_GRID_POINTS: usize = 60;
pub const CURVE_POINTS: usize = 200;

fn ratio_axis(a: &FigureArgs, default: (f64, f64, usize)) -> Result<Vec<f64>, CliError> {
    if a.common.rho.is_some() {
        return Err(CliError::Usage("figures take --rho-range in units of the reference variance, not --rho".into()));
    }
    match &a.common.rho_range {
        Some(spec) => crate::args::parse_range(spec),
        None => Ok(log_grid(default.0, default.1, a.points.unwrap_or(default.2))),
    }
}

pub fn figure(a: &FigureArgs) -> Result<(), CliError> {
    let table = match a.id.as_str() {
        "delta-grid" => {
            let points = a.points.unwrap_or(DELTA_GRID_POINTS);
            if points < 2 {
                return Err(CliError::Usage("--points must be at least 2".into()));
            }
            let mut t = Table::new(["lambda1", "lambda2", "delta_1", "delta_2"]);
            for p in delta_sweep(2, &sweep_lambdas(points), SWEEP_RHO)? {
                t.push(vec![p.lambdas[0], p.lambdas[1], p.delta[0].value, p.delta[1].value]);
            }
            t
        }
        "gamma-curves" => {
            let s = a.common.spectrum_or(&[1.0, 2.0, 3.0])?;
            let v = s.dim();
            if v < 2 {
                return Err(CliError::Usage("gamma-curves needs at least two variances".into()));
            }
            let ratios = ratio_axis(a, (0.1, 40.0, CURVE_POINTS))?;
            let pairs: Vec<(usize, usize)> = (0..v).flat_map(|n| (n + 1..v).map(move |m| (n, m))).collect();
            let mut header = vec![format!("rho_over_lambda{v}")];
            header.extend(pairs.iter().map(|(n, m)| format!("abs_gamma_{}{}", n + 1, m + 1)));
            let mut t = Table::new(header);
            let last = s.get(v - 1);
            let rows: Vec<Vec<f64>> = ratios
                .par_iter()
                .map(|&r| {
                    let p = PointIntegrals::new(r * last, &s)?;
                    let mut row = vec![r];
                    row.extend(pairs.iter().map(|&(n, m)| p.gamma(n, m).value.abs()));
                    Ok(row)
                })
                .collect::<Result<_, truncgauss::Error>>()?;
            rows.into_iter().for_each(|r| t.push(r));
            t
        }
        "gamma-convergence" => {
            let s = a.common.spectrum_or(&[1.0, 2.0, 3.0])?;
            if a.n == 0 || a.n > s.dim() {
                return Err(CliError::Usage(format!("--n must be between 1 and {}", s.dim())));
            }
            let n = a.n - 1;
            let ratios = ratio_axis(a, (1.0, 60.0, 60))?;
            let mut t = Table::new(["rho_over_lambda_n", "gamma_v", "gamma_1", "first_order"]);
            let lam = s.get(n);
            let rows: Vec<Vec<f64>> = ratios
                .par_iter()
                .map(|&r| gamma_nn_convergence(n, r * lam, &s).map(|c| vec![r, c.gamma_v, c.gamma_1, c.first_order]))
                .collect::<Result<_, _>>()?;
            rows.into_iter().for_each(|r| t.push(r));
            t
        }
        "cp-table" => cp_table(&cp_dims(a.common.v.map(|v| v as u32)), a.p_min, a.p_max)?,
        other => return Err(CliError::Usage(format!("unknown figure '{other}'"))),
    };
    emit(&table.render(a.common.table_format()), a.common.out.as_deref())
}

const DEFAULT_SPECTRA: [&[f64]; 3] = [&[1.0, 2.0], &[1.0, 2.0, 3.0], &[0.5, 1.5, 4.0]];

fn inequality_grid(quick: bool) -> Result<Report, CliError> {
    let mut report = Report::new("inequalities");
    let points = if quick { 6 } else { 16 };
    let ratios = log_grid(0.05, 50.0, points);
    let mut spectra: Vec<Spectrum> = vec![Spectrum::new(vec![1.0])?];
    for l in DEFAULT_SPECTRA {
        spectra.push(Spectrum::new(l.to_vec())?);
    }
    if !quick {
        spectra.push(Spectrum::new(vec![0.3, 1.0, 2.0, 5.0])?);
    }
    for s in &spectra {
        let parts: Vec<Report> =
            ratios.par_iter().map(|&r| inequality_battery(r * s.max(), s)).collect::<Result<_, _>>()?;
        parts.into_iter().for_each(|p| report.extend(p));
    }
    Ok(report)
}

fn asymptotic_suite() -> Result<Report, CliError> {
    let mut report = Report::new("asymptotic");
    for l in DEFAULT_SPECTRA {
        let s = Spectrum::new(l.to_vec())?;
        let schedule: Vec<f64> = [20.0, 40.0, 80.0].iter().map(|f| f * s.max() / 3.0).collect();
        report.extend(asymptotic_checks(&s, 4, &schedule)?);
    }
    let s = Spectrum::new(vec![1.0, 2.0, 3.0])?;
    report.extend(gamma_nm_cancellation_check(0, 1, 30.0, &s)?);
    Ok(report)
}

fn xi_suite(qmax: usize) -> Result<Report, CliError> {
    if qmax == 0 || qmax > 8 {
        return Err(CliError::Usage(format!("--qmax must be between 1 and 8, got {qmax}")));
    }
    let mut report = omega_inequality_scan(qmax)?;
    report.suite = "xi".into();
    report.extend(xi_dn_dd_convolution_check(qmax.min(6))?);
    report.extend(alpha_inverse_check(qmax.min(4))?);
    Ok(report)
}

fn structural(a: &VerifyArgs) -> Result<Report, CliError> {
    let s = a.common.spectrum_or(&[1.0, 2.0])?;
    let rhos = match (a.common.rho, &a.common.rho_range) {
        (None, None) => vec![3.0],
        _ => a.common.rhos()?,
    };
    let mut report = Report::new("structural");
    for rho in rhos {
        report.extend(verify_structural(rho, &s, a.order)?);
    }
    Ok(report)
}

/// Returns whether every check passed.
pub fn verify(a: &VerifyArgs) -> Result<bool, CliError> {
    let report = match a.suite.as_str() {
        "structural" => structural(a)?,
        "inequalities" => match (&a.common.lambda, a.common.rho.is_some() || a.common.rho_range.is_some()) {
            (Some(_), true) => {
                let s = a.common.spectrum()?;
                let mut r = Report::new("inequalities");
                for rho in a.common.rhos()? {
                    r.extend(inequality_battery(rho, &s)?);
                }
                r
            }
            (None, false) => inequality_grid(a.quick)?,
            _ => return Err(CliError::Usage("inequalities takes both --lambda and a radius, or neither".into())),
        },
        "eta" => oracle_equivalence()?,
        "asymptotic" => asymptotic_suite()?,
        "xi" => xi_suite(a.qmax)?,
        "all" => {
            let mut r = Report::new("all");
            r.extend(structural(a)?);
            r.extend(inequality_grid(a.quick)?);
            r.extend(oracle_equivalence()?);
            r.extend(asymptotic_suite()?);
            r.extend(xi_suite(if a.quick { a.qmax.min(6) } else { a.qmax })?);
            r
        }
        other => return Err(CliError::Usage(format!("unknown suite '{other}'"))),
    };
    let format = a.common.format.unwrap_or(Format::Json);
    emit(&render_report(&report, format), a.common.out.as_deref())?;
    Ok(report.all_pass())
}
