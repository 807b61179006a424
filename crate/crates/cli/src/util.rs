//! Small filesystem helpers shared by the commands.

use std::path::Path;

use vocoder_core::Result;

/// Writes `bytes` to a sibling temp file and renames it into place, so a
/// failure never leaves a partial file at `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    let file_name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "out".into());
    let tmp_name = format!(".{file_name}.{}.tmp", std::process::id());
    let tmp = match dir {
        Some(d) => d.join(&tmp_name),
        None => tmp_name.clone().into(),
    };
    let write = || -> std::io::Result<()> {
        std::fs::write(&tmp, bytes)?;
        std::fs::rename(&tmp, path)
    };
    write().map_err(|e| {
        std::fs::remove_file(&tmp).ok();
        e.into()
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn writes_and_replaces() {
        let mut path = std::env::temp_dir();
        path.push(format!("vocoder-atomic-{}.bin", std::process::id()));
        write_atomic(&path, b"first").unwrap();
        assert_eq!(std::fs::read(&path).unwrap(), b"first");
        write_atomic(&path, b"second").unwrap();
        assert_eq!(std::fs::read(&path).unwrap(), b"second");
        std::fs::remove_file(&path).ok();
    }

    #[test]
    fn failure_leaves_no_file() {
        let path = Path::new("/nonexistent-dir-for-sure/out.bin");
        assert!(write_atomic(path, b"x").is_err());
        assert!(!path.exists());
    }
}
