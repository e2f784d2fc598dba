//! Top-level driver: resolves the command, runs it on the worker pool, writes
//! outputs and the manifest.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};

use crate::args::{Cli, Command};
use crate::commands::{execute, writes_directory, Artifact};
use crate::manifest::Manifest;
use crate::parallel::thread_pool;
use crate::table::json_bytes;

/// A problem with how the tool was invoked rather than with the computation.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

pub fn run(cli: Cli) -> anyhow::Result<()> {
    let (command, format, recorded) = match (&cli.replay, cli.command) {
        (Some(_), Some(_)) => return Err(usage("--replay cannot be combined with a subcommand")),
        (None, None) => return Err(usage("a subcommand or --replay is required; see --help")),
        (None, Some(command)) => (command, cli.format, None),
        (Some(path), None) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let manifest: Manifest =
                serde_json::from_str(&text).with_context(|| format!("parsing manifest {}", path.display()))?;
            (manifest.command.clone(), manifest.format, Some(manifest))
        }
    };
    if writes_directory(&command) && cli.out.is_none() {
        return Err(usage(format!("`{}` writes several files; give a directory with --out", command.name())));
    }

    let pool = thread_pool(cli.threads).map_err(|e| usage(e.to_string()))?;
    let artifacts = pool.install(|| execute(&command, format))?;
    let manifest = Manifest::new(&command, format, &artifacts);

    let manifest_path = write_outputs(&command, &artifacts, cli.out.as_deref(), cli.manifest.as_deref())?;
    let manifest_bytes = json_bytes(&serde_json::to_value(&manifest)?);
    match manifest_path {
        Some(path) => write_file(&path, &manifest_bytes)?,
        None => std::io::stderr().write_all(&manifest_bytes)?,
    }

    if let Some(recorded) = recorded {
        if recorded.outputs.len() != manifest.outputs.len()
            || recorded.outputs.iter().zip(&manifest.outputs).any(|(a, b)| a.sha256 != b.sha256)
        {
            bail!("replay produced different outputs from the manifest");
        }
        eprintln!("replay: {} output(s) match the manifest", manifest.outputs.len());
    }
    Ok(())
}

/// Writes the artifacts and returns where the manifest belongs (`None` for stderr).
fn write_outputs(
    command: &Command,
    artifacts: &[Artifact],
    out: Option<&Path>,
    manifest: Option<&Path>,
) -> anyhow::Result<Option<PathBuf>> {
    let default_manifest = match out {
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            for a in artifacts {
                lock.write_all(&a.bytes)?;
            }
            lock.flush()?;
            None
        }
        Some(dir) if writes_directory(command) || dir.is_dir() => {
            fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            for a in artifacts {
                write_file(&dir.join(&a.name), &a.bytes)?;
            }
            Some(dir.join("manifest.json"))
        }
        Some(file) => {
            let [single] = artifacts else {
                bail!("expected a single output for {}", file.display());
            };
            write_file(file, &single.bytes)?;
            let mut name = file.as_os_str().to_owned();
            name.push(".manifest.json");
            Some(PathBuf::from(name))
        }
    };
    Ok(manifest.map(Path::to_path_buf).or(default_manifest))
}

fn write_file(path: &Path, bytes: &[u8]) -> anyhow::Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
    }
    fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}

/// Exit status for a finished run: 0 success, 1 runtime failure, 2 usage error.
pub fn exit_code(result: &anyhow::Result<()>) -> i32 {
    match result {
        Ok(()) => 0,
        Err(e) if e.downcast_ref::<UsageError>().is_some() => 2,
        Err(_) => 1,
    }
}
