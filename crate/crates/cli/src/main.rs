mod args;
mod commands;
mod run;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};
use run::{now, read_manifest, write_manifest, Failure, RunDir, RunManifest, MANIFEST, MANIFEST_SCHEMA};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}

fn execute(command: Command) -> Result<(), Failure> {
    let (mut command, base) = match command {
        Command::Replay(r) => {
            let m = read_manifest(&r.manifest)?;
            let hash = m.config.hash();
            if hash != m.config_hash {
                return Err(Failure::Config(format!(
                    "config hash mismatch: manifest records {}, embedded config hashes to {hash}",
                    m.config_hash
                )));
            }
            let mut cmd = m.command;
            if let Some(c) = cmd.common_mut() {
                c.out = r.out;
            }
            (cmd, Some(m.config))
        }
        other => (other, None),
    };
    let cfg = commands::effective_config(&command, base)?;
    commands::resolve_paths(&mut command)?;
    let out = command.common_mut().and_then(|c| c.out.clone());
    let mut run = RunDir::open(out.as_deref(), command.name(), &cfg)?;
    let started = now();
    let result = commands::dispatch(&command, &cfg, &mut run);
    let manifest = RunManifest {
        schema: MANIFEST_SCHEMA,
        tool: env!("CARGO_PKG_NAME").into(),
        version: env!("CARGO_PKG_VERSION").into(),
        command,
        config_hash: cfg.hash(),
        config: cfg.clone(),
        seed: cfg.seed,
        run_dir: run.dir.clone(),
        artifacts: run.artifacts.clone(),
        started,
        finished: now(),
        exit_code: result.as_ref().map_or_else(|f| f.code(), |_| 0),
        error: result.as_ref().err().map(|f| f.message().to_string()),
    };
    write_manifest(&run.dir.join(MANIFEST), &manifest)?;
    let summary = result?;
    println!("{summary}");
    println!("run directory: {}", run.dir.display());
    Ok(())
}
