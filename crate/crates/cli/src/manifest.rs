//! Run manifests: enough metadata to rerun a command. Written with status
//! "running" before the work starts and finalized afterwards. Timestamps are
//! excluded from the byte-determinism contract of the data CSVs.

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

pub struct Manifest {
    pub command: String,
    pub config_path: PathBuf,
    pub out_dir: PathBuf,
    pub seed: u64,
    pub threads: usize,
    started_unix: u64,
}

fn now_unix() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

impl Manifest {
    pub fn start(
        command: &str,
        config_path: &Path,
        out_dir: &Path,
        seed: u64,
        threads: usize,
    ) -> std::io::Result<Manifest> {
        std::fs::create_dir_all(out_dir)?;
        let m = Manifest {
            command: command.to_string(),
            config_path: config_path.to_path_buf(),
            out_dir: out_dir.to_path_buf(),
            seed,
            threads,
            started_unix: now_unix(),
        };
        m.write("running", None)?;
        Ok(m)
    }

    pub fn finalize(&self, status: &str) -> std::io::Result<()> {
        self.write(status, Some(now_unix()))
    }

    fn write(&self, status: &str, finished: Option<u64>) -> std::io::Result<()> {
        let finished_field = match finished {
            Some(f) => f.to_string(),
            None => "null".to_string(),
        };
        let body = format!(
            "{{\n  \"command\": {:?},\n  \"config\": {:?},\n  \"out_dir\": {:?},\n  \"seed\": {},\n  \"threads\": {},\n  \"version\": {:?},\n  \"started_unix\": {},\n  \"finished_unix\": {},\n  \"status\": {:?}\n}}\n",
            self.command,
            self.config_path.display().to_string(),
            self.out_dir.display().to_string(),
            self.seed,
            self.threads,
            env!("CARGO_PKG_VERSION"),
            self.started_unix,
            finished_field,
            status,
        );
        std::fs::write(self.out_dir.join("manifest.json"), body)
    }
}
