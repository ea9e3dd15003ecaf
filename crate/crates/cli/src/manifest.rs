//! `manifest.txt`: what produced the outputs and their SHA-256 digests.

use std::io::{self, Read};
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use sha2::{Digest, Sha256};

use crate::config::ScenarioConfig;

pub const FILE: &str = "manifest.txt";

pub fn sha256_file(path: &Path) -> io::Result<String> {
    let mut file = std::fs::File::open(path)?;
    let mut hasher = Sha256::new();
    let mut buf = [0u8; 1 << 16];
    loop {
        let n = file.read(&mut buf)?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
    }
    Ok(hex::encode(hasher.finalize()))
}

pub fn write(dir: &Path, command: &str, cfg: &ScenarioConfig, files: &[String]) -> io::Result<()> {
    let timestamp = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let mut text = format!("[run]\ntool = mimcav {}\ncommand = {command}\ntimestamp_unix = {timestamp}\n\n[outputs]\n", env!("CARGO_PKG_VERSION"));
    for f in files {
        text.push_str(&format!("{f} = sha256:{}\n", sha256_file(&dir.join(f))?));
    }
    text.push_str("\n# resolved configuration\n");
    text.push_str(&cfg.echo());
    std::fs::write(dir.join(FILE), text)
}
