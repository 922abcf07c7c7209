//! One function per subcommand. Every command loads and validates its
//! configuration fully, computes all tables, then flushes artifacts in one
//! step.

use mcmc_core::drug::{
    absorption_rate_moments, chebyshev_lower_bound, design_release, exceedance_probability,
};
use mcmc_core::link::{
    bit_error_probability, efficiency_curve, optimal_frame_duration, optimize_release,
    optimize_threshold_uniform, FrameDuration,
};
use mcmc_core::sim::{monte_carlo_cir_stats, simulate_distance};
use mcmc_core::stats::CirStatistics;
use mcmc_core::{
    channel, DrugDesignProblem, EnvParams, McLinkConfig, QuadratureSpec, ReleaseSchedule,
    SimConfig,
};

use crate::config::{DrugConfig, FileConfig};
use crate::output::{sig, Csv, OutputSet};
use crate::{AppError, CommonArgs, Scale};

pub fn run(name: &str, args: &CommonArgs) -> Result<(), AppError> {
    let cfg = FileConfig::load(&args.config)?;
    let env = cfg.env.build()?;
    let quad = cfg.quadrature.build()?;
    let mut out = OutputSet::new(&args.out);
    match name {
        "channel-stats" => channel_stats(&cfg, env, quad, &mut out)?,
        "simulate" => simulate(&cfg, env, args, &mut out)?,
        "drug-design" => drug_design(&cfg, env, quad, args.scale, &mut out)?,
        "drug-eval" => drug_eval(&cfg, env, quad, args.scale, &mut out)?,
        "mc-threshold" => mc_threshold(&cfg, env, quad, &mut out)?,
        "mc-release" => mc_release(&cfg, env, quad, &mut out)?,
        "mc-frame" => mc_frame(&cfg, env, quad, &mut out)?,
        other => return Err(AppError::Config(format!("unknown command {other}"))),
    }
    out.flush(name, &args.config, args.seed)
}

fn channel_stats(
    cfg: &FileConfig,
    env: EnvParams,
    quad: QuadratureSpec,
    out: &mut OutputSet,
) -> Result<(), AppError> {
    let cs = FileConfig::require(&cfg.channel_stats, "channel_stats")?;
    if cs.t_list_s.is_empty() {
        return Err(AppError::Config("[channel_stats] t_list_s is empty".into()));
    }
    if cs.h_points < 1 {
        return Err(AppError::Config("[channel_stats] h_points must be >= 1".into()));
    }
    let taus = cs.tau_grid_s.build("[channel_stats] tau_grid_s")?;
    let stats = CirStatistics::new(env, quad)?;

    let mut moments = Csv::new("moments.csv", "t_s,tau_s,mean_per_s,var_per_s2");
    for &t in &cs.t_list_s {
        for &tau in &taus {
            let m = stats.cir_mean(t, tau)?;
            let v = stats.cir_variance(t, tau)?;
            moments.row(&[sig(t), sig(tau), sig(m), sig(v)]);
        }
    }
    out.add_csv(moments);

    let (_, h_star) = channel::cir_peak(&env, cs.dist_tau_s)?;
    let mut dist = Csv::new("distribution.csv", "t_s,h_per_s,pdf,cdf");
    for &t in &cs.t_list_s {
        for k in 1..=cs.h_points {
            // interior grid: the density diverges at the support endpoint
            let h = h_star * k as f64 / (cs.h_points + 1) as f64;
            let pdf = stats.cir_pdf(t, cs.dist_tau_s, h)?;
            let cdf = stats.cir_cdf(t, cs.dist_tau_s, h)?;
            dist.row(&[sig(t), sig(h), sig(pdf), sig(cdf)]);
        }
    }
    out.add_csv(dist);
    Ok(())
}

fn simulate(
    cfg: &FileConfig,
    env: EnvParams,
    args: &CommonArgs,
    out: &mut OutputSet,
) -> Result<(), AppError> {
    let sc = FileConfig::require(&cfg.simulate, "simulate")?;
    let taus = sc.tau_grid_s.build("[simulate] tau_grid_s")?;
    let realizations = match args.scale {
        Scale::Desk => sc.realizations.min(2000),
        Scale::Paper => sc.realizations,
    };
    let sim = SimConfig {
        step: sc.step_s,
        horizon: sc.t_s.max(sc.step_s),
        realizations,
        seed: args.seed,
        mode: sc.mode()?,
    };
    let rows = monte_carlo_cir_stats(&env, &sim, sc.t_s, &taus)?;
    let mut csv = Csv::new("mc_stats.csv", "tau_s,mean,var");
    for (&tau, &(m, v)) in taus.iter().zip(rows.iter()) {
        csv.row(&[sig(tau), sig(m), sig(v)]);
    }
    out.add_csv(csv);

    if sc.dump_trajectory {
        let traj = simulate_distance(&env, &sim)?;
        let mut csv = Csv::new("trajectory.csv", "time_s,distance_m");
        for (&t, &r) in traj.times.iter().zip(traj.distances.iter()) {
            csv.row(&[sig(t), sig(r)]);
        }
        out.add_csv(csv);
    }
    Ok(())
}

fn drug_problem(
    dc: &DrugConfig,
    env: EnvParams,
    quad: QuadratureSpec,
    scale: Scale,
) -> DrugDesignProblem {
    let (releases, constraints) = match scale {
        Scale::Desk => {
            let r = dc.releases.min(300);
            (r, dc.constraints.min(r))
        }
        Scale::Paper => (dc.releases, dc.constraints),
    };
    DrugDesignProblem {
        env,
        window: dc.window_s,
        constraint_window: dc.constraint_window_s,
        releases,
        constraints,
        beta: dc.beta,
        theta: vec![dc.theta_per_s; constraints],
        quad,
    }
}

fn drug_design(
    cfg: &FileConfig,
    env: EnvParams,
    quad: QuadratureSpec,
    scale: Scale,
    out: &mut OutputSet,
) -> Result<(), AppError> {
    let dc = FileConfig::require(&cfg.drug, "drug")?;
    let problem = drug_problem(dc, env, quad, scale);
    problem.validate()?;
    let result = design_release(&problem)?;
    if !result.feasible {
        return Err(AppError::Infeasible(
            "no release schedule satisfies the target constraints".into(),
        ));
    }
    let mut csv = Csv::new("release_profile.csv", "release_time_s,alpha");
    for (&t, &a) in problem.release_times().iter().zip(result.alphas.iter()) {
        csv.row(&[sig(t), sig(a)]);
    }
    out.add_csv(csv);
    out.add_text(
        "report.txt",
        format!(
            "total_alpha={}\nlp_objective={}\n",
            sig(result.total),
            sig(result.lp_objective)
        ),
    );
    Ok(())
}

fn load_profile(path: &str) -> Result<ReleaseSchedule, AppError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| AppError::Config(format!("cannot read profile {path}: {e}")))?;
    let mut times = Vec::new();
    let mut alphas = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if i == 0 || line.trim().is_empty() {
            continue;
        }
        let mut parts = line.split(',');
        let parse = |s: Option<&str>| -> Result<f64, AppError> {
            s.and_then(|v| v.trim().parse::<f64>().ok())
                .ok_or_else(|| AppError::Config(format!("profile {path} line {}: bad row", i + 1)))
        };
        times.push(parse(parts.next())?);
        alphas.push(parse(parts.next())?);
    }
    if times.is_empty() {
        return Err(AppError::Config(format!("profile {path} has no rows")));
    }
    Ok(ReleaseSchedule { times, alphas })
}

fn drug_eval(
    cfg: &FileConfig,
    env: EnvParams,
    quad: QuadratureSpec,
    scale: Scale,
    out: &mut OutputSet,
) -> Result<(), AppError> {
    let dc = FileConfig::require(&cfg.drug, "drug")?;
    let ec = FileConfig::require(&cfg.drug_eval, "drug_eval")?;
    let problem = drug_problem(dc, env, quad, scale);
    problem.validate()?;
    let schedule = match &ec.profile_csv {
        Some(path) => load_profile(path)?,
        None => {
            let result = design_release(&problem)?;
            if !result.feasible {
                return Err(AppError::Infeasible(
                    "no release schedule satisfies the target constraints".into(),
                ));
            }
            ReleaseSchedule {
                times: problem.release_times(),
                alphas: result.alphas,
            }
        }
    };
    let grid = ec.t_grid_s.build("[drug_eval] t_grid_s")?;
    let resolution = match scale {
        Scale::Desk => ec.grid_resolution.min(1024),
        Scale::Paper => ec.grid_resolution,
    };
    let cheb = chebyshev_lower_bound(dc.beta);
    let mut csv = Csv::new("pthresh.csv", "t_s,E_g,V_upper,P_theta,chebyshev_bound");
    for &t in &grid {
        let (mean, dev) = absorption_rate_moments(&env, &quad, &schedule, t)?;
        let p = exceedance_probability(&env, &quad, &schedule, dc.theta_per_s, t, resolution)?;
        // the certification only applies where the design constraint holds
        let bound = if mean - dc.beta * dev >= dc.theta_per_s {
            cheb
        } else {
            0.0
        };
        csv.row(&[sig(t), sig(mean), sig(dev * dev), sig(p), sig(bound)]);
    }
    out.add_csv(csv);
    Ok(())
}

fn link_config(
    cfg: &FileConfig,
    env: EnvParams,
    quad: QuadratureSpec,
) -> Result<McLinkConfig, AppError> {
    let lc = FileConfig::require(&cfg.link, "link")?;
    let link = McLinkConfig {
        env,
        bits: lc.bits,
        t_b: lc.t_b_s,
        eta: lc.eta,
        budget: lc.budget,
        psi: lc.psi,
        confidence: lc.confidence,
        quad,
    };
    link.validate().map_err(|e| AppError::Config(format!("[link]: {e}")))?;
    Ok(link)
}

fn write_bit_table(
    link: &McLinkConfig,
    xi: f64,
    alphas: &[f64],
    out: &mut OutputSet,
) -> Result<f64, AppError> {
    let mut csv = Csv::new("bit_ber.csv", "bit_index,alpha,ber");
    let mut worst: f64 = 0.0;
    for i in 1..=link.bits {
        let ber = bit_error_probability(link, i, xi, alphas[i - 1])?;
        worst = worst.max(ber);
        csv.row(&[i.to_string(), sig(alphas[i - 1]), sig(ber)]);
    }
    out.add_csv(csv);
    Ok(worst)
}

fn mc_threshold(
    cfg: &FileConfig,
    env: EnvParams,
    quad: QuadratureSpec,
    out: &mut OutputSet,
) -> Result<(), AppError> {
    let link = link_config(cfg, env, quad)?;
    let (xi, max_ber) = optimize_threshold_uniform(&link)?;
    let alphas = vec![link.budget / link.bits as f64; link.bits];
    write_bit_table(&link, xi, &alphas, out)?;
    out.add_text(
        "report.txt",
        format!("xi={}\nmax_ber={}\n", sig(xi), sig(max_ber)),
    );
    Ok(())
}

fn mc_release(
    cfg: &FileConfig,
    env: EnvParams,
    quad: QuadratureSpec,
    out: &mut OutputSet,
) -> Result<(), AppError> {
    let link = link_config(cfg, env, quad)?;
    let (xi, _) = optimize_threshold_uniform(&link)?;
    let alphas = optimize_release(&link, xi)?;
    let max_ber = write_bit_table(&link, xi, &alphas, out)?;
    out.add_text(
        "report.txt",
        format!("xi={}\nmax_ber={}\n", sig(xi), sig(max_ber)),
    );
    Ok(())
}

fn mc_frame(
    cfg: &FileConfig,
    env: EnvParams,
    quad: QuadratureSpec,
    out: &mut OutputSet,
) -> Result<(), AppError> {
    let lc = FileConfig::require(&cfg.link, "link")?;
    let link = link_config(cfg, env, quad)?;
    let duration = optimal_frame_duration(&link, lc.horizon_s)?;
    let (t_star, status) = match duration {
        FrameDuration::Bounded(t) => (t, "bounded"),
        FrameDuration::Unattainable => (0.0, "unattainable"),
        FrameDuration::HorizonReached(t) => (t, "horizon_reached"),
    };
    let mut psi_list = vec![link.psi];
    for &p in &lc.psi_list {
        if !psi_list.contains(&p) {
            psi_list.push(p);
        }
    }
    let n = lc.frame_points.max(1);
    let grid: Vec<f64> = (1..=n)
        .map(|k| lc.horizon_s * k as f64 / n as f64)
        .collect();
    let rows = efficiency_curve(&link, &psi_list, &grid)?;
    let mut csv = Csv::new("efficiency.csv", "psi,t_s,prob");
    for (&psi, row) in psi_list.iter().zip(rows.iter()) {
        for (&t, &p) in grid.iter().zip(row.iter()) {
            csv.row(&[sig(psi), sig(t), sig(p)]);
        }
    }
    out.add_csv(csv);
    out.add_text(
        "report.txt",
        format!("T_star_s={}\nstatus={status}\n", sig(t_star)),
    );
    Ok(())
}
