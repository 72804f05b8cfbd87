mod args;
mod commands;
mod config;
mod output;

use std::collections::BTreeSet;
use std::path::PathBuf;
use std::time::Instant;

use clap::error::ErrorKind;
use clap::{CommandFactory, Parser};
use serde_json::json;
use waveqft_core::scans::Theory;

use args::{BosonCommand, Cli, Command, FermionCommand};
use commands::{Artifact, Ctx};
use config::{CliError, Resolver, Result};
use output::{emit_matrices, emit_table, Manifest, PointTiming, Sink};

fn command_path(c: &Command) -> Vec<&'static str> {
    match c {
        Command::Filters(_) => vec!["filters"],
        Command::Cascade(_) => vec!["cascade"],
        Command::Stencil(_) => vec!["stencil"],
        Command::Dwt(_) => vec!["dwt"],
        Command::Fermion(FermionCommand::Covariance(_)) => vec!["fermion", "covariance"],
        Command::Fermion(FermionCommand::EntropyScan(_)) => vec!["fermion", "entropy-scan"],
        Command::Fermion(FermionCommand::FidelityScan(_)) => vec!["fermion", "fidelity-scan"],
        Command::Boson(BosonCommand::EntropyScan(_)) => vec!["boson", "entropy-scan"],
        Command::Boson(BosonCommand::Entropy2d(_)) => vec!["boson", "entropy-2d"],
        Command::Boson(BosonCommand::Covariance(_)) => vec!["boson", "covariance"],
        Command::CorrelatorScan(_) => vec!["correlator-scan"],
        Command::MiCompress(_) => vec!["mi-compress"],
        Command::EopScan(_) => vec!["eop-scan"],
    }
}

/// Long flag names accepted by the subcommand at `path`, which are also the config keys.
fn known_options(path: &[&str]) -> BTreeSet<String> {
    let mut cmd = Cli::command();
    cmd.build();
    let mut out = BTreeSet::new();
    let mut cur = &cmd;
    let mut add = |c: &clap::Command| {
        out.extend(c.get_arguments().filter_map(|a| a.get_long()).map(str::to_string));
    };
    add(cur);
    for name in path {
        cur = cur.find_subcommand(name).expect("subcommand exists");
        add(cur);
    }
    for skip in ["config", "help", "version", "dry-run"] {
        out.remove(skip);
    }
    out
}

fn run() -> Result<()> {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => match e.kind() {
            ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                let _ = e.print();
                return Ok(());
            }
            _ => return Err(CliError::Usage(e.render().to_string().trim().to_string())),
        },
    };
    let path = command_path(&cli.command);
    let name = path.join(" ");
    let g = &cli.global;
    let mut r = Resolver::load(g.config.as_deref(), &name, &known_options(&path))?;

    let threads = r.get_opt("threads", g.threads)?;
    if threads == Some(0) {
        return Err(CliError::config("threads", "must be positive"));
    }
    let mem_cap_gb = r.get("mem-cap-gb", g.mem_cap_gb, 8.0)?;
    if !(mem_cap_gb > 0.0) {
        return Err(CliError::config("mem-cap-gb", "must be positive"));
    }
    let out = r.get_str("out", g.out.clone(), "csv")?;
    let format = r.get_opt("format", g.format.clone())?;
    let manifest = r.get_opt("manifest", g.manifest.as_ref().map(|p| p.display().to_string()))?.map(PathBuf::from);

    let mut ctx = Ctx { r, mem_cap: (mem_cap_gb * (1u64 << 30) as f64) as u64, dry_run: g.dry_run, force_json: false };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.unwrap_or(0))
        .build()
        .map_err(|e| CliError::config("threads", e))?;

    let start = Instant::now();
    let outcome = pool.install(|| match &cli.command {
        Command::Filters(a) => commands::filters(&mut ctx, a),
        Command::Cascade(a) => commands::cascade(&mut ctx, a),
        Command::Stencil(a) => commands::stencil(&mut ctx, a),
        Command::Dwt(a) => commands::dwt_cmd(&mut ctx, a),
        Command::Fermion(FermionCommand::Covariance(a)) => commands::fermion_covariance(&mut ctx, a),
        Command::Fermion(FermionCommand::EntropyScan(a)) => commands::entropy(&mut ctx, Theory::Fermion, a),
        Command::Fermion(FermionCommand::FidelityScan(a)) => commands::fidelity(&mut ctx, a),
        Command::Boson(BosonCommand::EntropyScan(a)) => commands::entropy(&mut ctx, Theory::Boson, a),
        Command::Boson(BosonCommand::Entropy2d(a)) => commands::entropy_2d(&mut ctx, a),
        Command::Boson(BosonCommand::Covariance(a)) => commands::boson_covariance(&mut ctx, a),
        Command::CorrelatorScan(a) => commands::correlators(&mut ctx, a),
        Command::MiCompress(a) => commands::mi_compress(&mut ctx, a),
        Command::EopScan(a) => commands::eop(&mut ctx, a),
    })?;
    let total_wall_s = start.elapsed().as_secs_f64();

    let format = if ctx.force_json && format.is_none() { Some("json".to_string()) } else { format };
    let sink = Sink::resolve(&out, format.as_deref())?;
    let Some(outcome) = outcome else {
        let text = serde_json::to_string_pretty(&json!({ "command": name, "config": ctx.r.echo })).expect("echo serializes");
        println!("{text}");
        return Ok(());
    };
    let outputs = match &outcome.artifact {
        Artifact::Table(t) => vec![emit_table(t, &sink)?],
        Artifact::Matrices { blocks, lattice } => {
            let Some(p) = sink.path() else {
                return Err(CliError::config("out", "binary covariance output needs a file path"));
            };
            let refs: Vec<(&str, &nalgebra::DMatrix<f64>)> = blocks.iter().map(|(n, m)| (*n, m)).collect();
            emit_matrices(p, &refs, lattice.clone())?
        }
    };
    let manifest_path = manifest.or_else(|| sink.path().map(|p| PathBuf::from(format!("{}.manifest.json", p.display()))));
    if let Some(mp) = manifest_path {
        Manifest {
            tool: "waveqft",
            version: env!("CARGO_PKG_VERSION"),
            command: name,
            config: ctx.r.echo,
            threads: pool.current_num_threads(),
            points: outcome.timings.iter().enumerate().map(|(index, &wall_s)| PointTiming { index, wall_s }).collect(),
            total_wall_s,
            outputs,
        }
        .write(&mp)?;
    }
    Ok(())
}

fn main() {
    if let Err(e) = run() {
        eprintln!("{}", e.to_json());
        std::process::exit(e.exit_code());
    }
}
