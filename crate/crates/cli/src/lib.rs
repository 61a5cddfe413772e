//! The `yule` command line.
//!
//! Each subcommand builds a [`Report`] holding both renderings (CSV and
//! JSON); [`run`] picks one, writes it to stdout or `--out`, and, for file
//! output, writes a `<out>.manifest.json` sidecar recording everything needed
//! to reproduce the file with `yule rerun`.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::Parser;

pub mod args;
pub mod commands;
pub mod error;
pub mod manifest;
mod render;

pub use args::{Cli, Command};
pub use commands::Report;
pub use error::CliError;

/// Caps the global rayon pool at `VC_THREADS` workers when set.
pub fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("VC_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n >= 1)
        .ok_or_else(|| CliError::Usage(format!("VC_THREADS must be a positive integer (got {raw:?})")))?;
    // A second call in the same process keeps the first pool.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

/// Parses `argv` (program name first) and runs the command.
pub fn run<I, T>(argv: I) -> Result<(), CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            if e.use_stderr() {
                return Err(CliError::Usage(e.to_string().trim_start_matches("error: ").trim_end().to_string()));
            }
            // --help and --version
            print!("{e}");
            return Ok(());
        }
    };
    configure_threads()?;
    if let Command::Rerun { manifest } = &cli.command {
        let m = manifest::RunManifest::read(manifest)?;
        return run(m.argv);
    }
    let report = commands::execute(&cli.command)?;
    let out = cli.command.output();
    emit(&report, out.format, out.out.as_deref(), &argv)?;
    match report.failure {
        Some(msg) => Err(CliError::Verification(msg)),
        None => Ok(()),
    }
}

fn emit(report: &Report, format: args::Format, out: Option<&Path>, argv: &[OsString]) -> Result<(), CliError> {
    let body = match format {
        args::Format::Csv => report.csv.clone(),
        args::Format::Json => render::json_string(&report.json),
    };
    let Some(path) = out else {
        std::io::stdout().write_all(body.as_bytes())?;
        return Ok(());
    };
    fs::write(path, &body)?;
    let mut outputs = vec![file_name(path)];
    if format == args::Format::Csv {
        for (suffix, contents) in &report.sidecars {
            let side = sidecar(path, suffix);
            fs::write(&side, contents)?;
            outputs.push(file_name(&side));
        }
    }
    let m = manifest::RunManifest::new(argv, report, outputs);
    fs::write(sidecar(path, "manifest.json"), render::json_string(&m.to_json()))?;
    Ok(())
}

/// `<path>.<suffix>`
pub fn sidecar(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".");
    s.push(suffix);
    PathBuf::from(s)
}

fn file_name(p: &Path) -> String {
    p.file_name().map_or_else(|| p.display().to_string(), |n| n.to_string_lossy().into_owned())
}
