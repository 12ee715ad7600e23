//! Small JSON cache for moment tables, keyed by
//! (distribution, scales, sample count, seed) so repeated harness runs skip
//! the 10^7-draw estimation.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use envrisk::oracles::MomentTable;
use envrisk::synthdata::FeatureKind;

use crate::error::Result;

#[derive(Debug, Serialize, Deserialize)]
struct CachedTable {
    kind: String,
    scale1: f64,
    scale2: f64,
    mc_samples: usize,
    seed: u64,
    m_abs: f64,
    m_sgn: f64,
    m_cos: f64,
    m_zcos: f64,
    m_cos2: f64,
}

fn cache_file_name(kind: FeatureKind, scale1: f64, scale2: f64, mc: usize, seed: u64) -> String {
    format!(
        "moments-{}-s{}-t{}-n{}-seed{}.json",
        kind.name(),
        scale1,
        scale2,
        mc,
        seed
    )
}

/// Load the table from `dir` when a matching file exists, otherwise build it
/// and persist the result. Gaussian tables are analytic and never cached.
pub fn load_or_build(
    dir: Option<&Path>,
    kind: FeatureKind,
    scale1: f64,
    scale2: f64,
    mc_samples: usize,
    seed: u64,
) -> Result<MomentTable> {
    if kind == FeatureKind::Gaussian {
        return Ok(MomentTable::gaussian(scale1, scale2));
    }
    let Some(dir) = dir else {
        return Ok(MomentTable::build(kind, scale1, scale2, mc_samples, seed));
    };
    let path = dir.join(cache_file_name(kind, scale1, scale2, mc_samples, seed));
    if let Ok(text) = fs::read_to_string(&path) {
        if let Ok(c) = serde_json::from_str::<CachedTable>(&text) {
            if c.kind == kind.name()
                && c.scale1 == scale1
                && c.scale2 == scale2
                && c.mc_samples == mc_samples
                && c.seed == seed
            {
                return Ok(MomentTable {
                    m_abs: c.m_abs,
                    m_sgn: c.m_sgn,
                    m_cos: c.m_cos,
                    m_zcos: c.m_zcos,
                    m_cos2: c.m_cos2,
                    mc_samples: c.mc_samples,
                    seed: c.seed,
                    scale1: c.scale1,
                    scale2: c.scale2,
                });
            }
        }
    }
    let t = MomentTable::build(kind, scale1, scale2, mc_samples, seed);
    fs::create_dir_all(dir)?;
    let cached = CachedTable {
        kind: kind.name().to_string(),
        scale1,
        scale2,
        mc_samples,
        seed,
        m_abs: t.m_abs,
        m_sgn: t.m_sgn,
        m_cos: t.m_cos,
        m_zcos: t.m_zcos,
        m_cos2: t.m_cos2,
    };
    fs::write(&path, serde_json::to_string_pretty(&cached)?)?;
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cache_round_trip() {
        let dir = std::env::temp_dir().join(format!("envrisk-moments-{}", std::process::id()));
        let t1 = load_or_build(Some(&dir), FeatureKind::Uniform, 1.0, 1.0, 50_000, 3).unwrap();
        let t2 = load_or_build(Some(&dir), FeatureKind::Uniform, 1.0, 1.0, 50_000, 3).unwrap();
        assert_eq!(t1.m_abs, t2.m_abs);
        assert_eq!(t1.m_cos2, t2.m_cos2);
        let _ = std::fs::remove_dir_all(&dir);
    }
}
