//! File formats and JSON configuration used by the command-line tool.
//!
//! * RGB images: 8-bit PNG, values mapped to `[0, 1]`.
//! * Depth maps: single-channel PFM (`Pf`), float32, `0.0` = background.
//! * Point clouds: PLY with `x y z` float32 and `red green blue` uchar.
//! * Intrinsics, poses and pipeline options: JSON; 4×4 matrices are row-major.
//!
//! Every writer goes through a temporary file in the destination directory
//! that is renamed into place, so an interrupted run never leaves a
//! truncated output behind.

mod config;
mod pfm;
mod ply;
mod png;

pub use config::{
    load_intrinsics, load_json, load_relative_pose, load_views, IntrinsicsSource, PipelineConfig, PoseFile, PoseSpec,
    SymmetryConfig, ViewEntry, ViewsManifest,
};
pub use pfm::{decode_pfm, encode_pfm, load_depth, save_depth};
pub use ply::{decode_ply, encode_ply, load_ply, save_ply, PlyFormat};
pub use png::{encode_png, load_image, save_image, to_u8};

use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

/// Writes `bytes` to `path` via a sibling temporary file and a rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let wrap = |source| Error::Write {
        path: path.to_path_buf(),
        source,
    };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(wrap)?;
    tmp.write_all(bytes).map_err(wrap)?;
    tmp.as_file().sync_all().map_err(wrap)?;
    tmp.persist(path).map_err(|e| wrap(e.error))?;
    Ok(())
}

pub(crate) fn read_file(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|source| Error::Read {
        path: path.to_path_buf(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn atomic_write_replaces_and_leaves_no_temp() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("out.bin");
        write_atomic(&p, b"first").unwrap();
        write_atomic(&p, b"second").unwrap();
        assert_eq!(std::fs::read(&p).unwrap(), b"second");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }

    #[test]
    fn write_into_missing_directory_fails() {
        let dir = tempfile::tempdir().unwrap();
        let err = write_atomic(&dir.path().join("nope/out.bin"), b"x").unwrap_err();
        assert!(matches!(err, Error::Write { .. }));
        assert!(!err.is_input_error());
    }
}
