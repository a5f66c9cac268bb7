//! On-disk cache of assembled forms, keyed by (domain hash, α, h). The
//! expensive part of assembly is the per-cell killing quadrature; the jump
//! table and convolution plan are cheap to rebuild, so the cache stores the
//! killing rates plus enough metadata to validate a hit.

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use stablegap::geometry::Domain;
use stablegap::operator::{self, DiscreteForm};
use std::path::PathBuf;

#[derive(Serialize, Deserialize)]
struct CachedForm {
    schema: u32,
    domain: Domain,
    alpha: f64,
    h: f64,
    cells: usize,
    kappa: Vec<f64>,
}

fn cache_key(domain: &Domain, alpha: f64, h: f64) -> Result<String> {
    let mut hasher = Sha256::new();
    hasher.update(serde_json::to_vec(domain)?);
    hasher.update(alpha.to_le_bytes());
    hasher.update(h.to_le_bytes());
    Ok(hex_string(&hasher.finalize()))
}

fn hex_string(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn assemble_via_cache(domain: &Domain, alpha: f64, h: f64, dir: &str) -> Result<DiscreteForm> {
    let key = cache_key(domain, alpha, h)?;
    let path = PathBuf::from(dir).join(format!("form-{key}.json"));
    if let Ok(text) = std::fs::read_to_string(&path) {
        if let Ok(cached) = serde_json::from_str::<CachedForm>(&text) {
            if cached.schema == 1 && cached.alpha == alpha && cached.h == h {
                if let Ok(form) = operator::assemble_with_kappa(domain, alpha, h, cached.kappa) {
                    return Ok(form);
                }
            }
        }
        // stale or mismatched entry: fall through and rebuild
    }
    let form = operator::assemble(domain, alpha, h)?;
    std::fs::create_dir_all(dir).with_context(|| format!("creating cache dir {dir}"))?;
    let cached = CachedForm {
        schema: 1,
        domain: domain.clone(),
        alpha,
        h,
        cells: form.n(),
        kappa: form.kappa.clone(),
    };
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, serde_json::to_vec(&cached)?)
        .with_context(|| format!("writing cache entry {}", tmp.display()))?;
    std::fs::rename(&tmp, &path).context("publishing cache entry")?;
    Ok(form)
}
