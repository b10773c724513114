// Copyright 2026 The sps-purity Authors
// SPDX-License-Identifier: Apache-2.0

//! On-disk cache of ansatz solutions keyed by a hash of their inputs.
//!
//! File layout, little endian: 8-byte magic, `u32` format version, 32-byte
//! key digest, `u64` node count, then `cg`, `ce`, `phi1g_final`,
//! `phi1e_final`, `phi2` (row-major), the leaked field as complex pairs,
//! `excited_population` and the norm as `f64`. The grid is rebuilt from the
//! inputs on load.

use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};
use sps_purity_core::ansatz::AnsatzSolution;
use sps_purity_core::linalg::CMatrix;
use sps_purity_core::model::{make_grid, GridKind, LeakedField};
use sps_purity_core::pipeline::PointConfig;
use sps_purity_core::C64;

const MAGIC: &[u8; 8] = b"SPSPSOL\0";
pub const FORMAT_VERSION: u32 = 1;

/// Hex digest identifying the solution of `cfg`.
pub fn key(cfg: &PointConfig) -> String {
    let kind = match cfg.grid_kind {
        GridKind::Uniform => "uniform",
        GridKind::Refined => "refined",
        GridKind::Auto => "auto",
    };
    let bits = |v: f64| format!("{:016x}", v.to_bits());
    let text = format!(
        "sps-purity {} v{FORMAT_VERSION};gamma={};delta={};x={};theta={};sigma={};t0={};area={};n={};grid={kind}",
        env!("CARGO_PKG_VERSION"),
        bits(cfg.emitter.gamma),
        bits(cfg.emitter.delta),
        bits(cfg.leak.magnitude),
        bits(cfg.leak.phase),
        bits(cfg.pulse.sigma),
        bits(cfg.pulse.t0),
        bits(cfg.pulse.area),
        cfg.n,
    );
    hex::encode(Sha256::digest(text.as_bytes()))
}

pub struct SolutionCache {
    dir: PathBuf,
}

impl SolutionCache {
    pub fn new(dir: impl Into<PathBuf>) -> io::Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        Ok(Self { dir })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn path(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{key}.sol"))
    }

    /// Cached solution, or `None` when absent or unreadable.
    pub fn load(&self, cfg: &PointConfig) -> Option<AnsatzSolution> {
        let k = key(cfg);
        let bytes = fs::read(self.path(&k)).ok()?;
        decode(cfg, &k, &bytes)
    }

    /// Writes atomically through a temporary file.
    pub fn store(&self, cfg: &PointConfig, sol: &AnsatzSolution) -> io::Result<()> {
        let k = key(cfg);
        let tmp = self.dir.join(format!("{k}.tmp{}", std::process::id()));
        {
            let mut f = io::BufWriter::new(fs::File::create(&tmp)?);
            f.write_all(&encode(&k, sol))?;
            f.flush()?;
        }
        fs::rename(tmp, self.path(&k))
    }
}

fn put_c(out: &mut Vec<u8>, v: &[C64]) {
    for z in v {
        out.extend_from_slice(&z.re.to_le_bytes());
        out.extend_from_slice(&z.im.to_le_bytes());
    }
}

fn encode(key: &str, sol: &AnsatzSolution) -> Vec<u8> {
    let n = sol.len();
    let mut out = Vec::with_capacity(64 + 16 * n * (n + 6));
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&hex::decode(key).expect("hex key"));
    out.extend_from_slice(&(n as u64).to_le_bytes());
    put_c(&mut out, &sol.cg);
    put_c(&mut out, &sol.ce);
    put_c(&mut out, &sol.phi1g_final);
    put_c(&mut out, &sol.phi1e_final);
    put_c(&mut out, sol.phi2.as_slice());
    put_c(&mut out, &sol.leaked.samples);
    for v in &sol.excited_population {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out.extend_from_slice(&sol.norm.to_le_bytes());
    out
}

struct Reader<'a>(&'a [u8]);

impl Reader<'_> {
    fn take<const N: usize>(&mut self) -> Option<[u8; N]> {
        let mut b = [0u8; N];
        self.0.read_exact(&mut b).ok()?;
        Some(b)
    }

    fn f64(&mut self) -> Option<f64> {
        self.take::<8>().map(f64::from_le_bytes)
    }

    fn complex(&mut self, n: usize) -> Option<Vec<C64>> {
        (0..n).map(|_| Some(C64::new(self.f64()?, self.f64()?))).collect()
    }
}

fn decode(cfg: &PointConfig, key: &str, bytes: &[u8]) -> Option<AnsatzSolution> {
    let mut r = Reader(bytes);
    if &r.take::<8>()? != MAGIC || u32::from_le_bytes(r.take::<4>()?) != FORMAT_VERSION {
        return None;
    }
    if hex::encode(r.take::<32>()?) != key {
        return None;
    }
    let n = u64::from_le_bytes(r.take::<8>()?) as usize;
    if n != cfg.n {
        return None;
    }
    let grid = make_grid(cfg.grid_kind, &cfg.emitter, &cfg.pulse, cfg.n).ok()?;
    let cg = r.complex(n)?;
    let ce = r.complex(n)?;
    let phi1g_final = r.complex(n)?;
    let phi1e_final = r.complex(n)?;
    let phi2 = CMatrix::from_vec(n, n, r.complex(n * n)?);
    let samples = r.complex(n)?;
    let excited_population = (0..n).map(|_| r.f64()).collect::<Option<Vec<_>>>()?;
    let norm = r.f64()?;
    if !r.0.is_empty() {
        return None;
    }
    Some(AnsatzSolution {
        grid,
        emitter: cfg.emitter,
        leak: cfg.leak,
        cg,
        ce,
        phi1g_final,
        phi1e_final,
        phi2,
        excited_population,
        leaked: LeakedField { samples },
        norm,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use sps_purity_core::pipeline::solve_point;

    #[test]
    fn round_trip() {
        let dir = std::env::temp_dir().join(format!("sps-cache-test-{}", std::process::id()));
        let cache = SolutionCache::new(&dir).unwrap();
        let cfg = PointConfig::standard(0.2, 0.1, 1.0, 96).unwrap();
        assert!(cache.load(&cfg).is_none());
        let sol = solve_point(&cfg).unwrap();
        cache.store(&cfg, &sol).unwrap();
        let back = cache.load(&cfg).unwrap();
        assert_eq!(back.phi2.as_slice(), sol.phi2.as_slice());
        assert_eq!(back.cg, sol.cg);
        assert_eq!(back.grid, sol.grid);
        assert_eq!(back.norm, sol.norm);
        let other = PointConfig::standard(0.2, 0.1, 1.1, 96).unwrap();
        assert!(cache.load(&other).is_none());
        fs::remove_dir_all(dir).unwrap();
    }

    #[test]
    fn keys_differ_by_parameter() {
        let a = PointConfig::standard(0.2, 0.1, 1.0, 96).unwrap();
        let b = PointConfig::standard(0.2, 0.1, 1.0, 128).unwrap();
        assert_ne!(key(&a), key(&b));
        assert_eq!(key(&a), key(&a));
    }
}
