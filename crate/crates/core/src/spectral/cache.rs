//! CSV persistence for surface-of-revolution spectra. Only eigenvalues are
//! stored; eigenvectors are rebuilt by one inverse iteration each on load.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::revolution::{assemble, default_cells, radial_vector, sor_basis, RadialMode};
use super::{EigenData, Family};
use crate::error::{Error, Result};
use crate::geometry::Profile;

fn profile_tag(profile: &Profile) -> String {
    match profile {
        Profile::Sine => "sine".into(),
        Profile::PerturbedSine { amplitude, center, width } => format!("bump_{amplitude}_{center}_{width}"),
    }
}

fn cache_name(profile: &Profile, m_max: usize, lambda_max: f64) -> String {
    format!("sor_{}_m{}_l{}.csv", profile_tag(profile), m_max, lambda_max)
}

pub fn write_cache(basis: &EigenData, path: &Path) -> Result<()> {
    let Family::Revolution { profile, radial, nodes, m_max, lambda_max, .. } = &basis.family else {
        return Err(Error::Unsupported("only surface-of-revolution spectra are cached".into()));
    };
    let mut out = String::new();
    let _ = writeln!(out, "# profile={}", profile_tag(profile));
    let _ = writeln!(out, "# m_max={m_max}");
    let _ = writeln!(out, "# lambda_max={lambda_max}");
    let _ = writeln!(out, "# fine_cells={}", nodes.len());
    out.push_str("m,lambda,discrete_eigenvalue\n");
    for r in radial {
        let _ = writeln!(out, "{},{:e},{:e}", r.m, r.lambda, r.discrete_eigenvalue);
    }
    fs::write(path, out)?;
    Ok(())
}

fn bad(path: &Path, msg: impl Into<String>) -> Error {
    Error::Config { path: path.display().to_string(), message: msg.into() }
}

pub fn read_cache(path: &Path, profile: &Profile) -> Result<EigenData> {
    let text = fs::read_to_string(path)?;
    let mut meta = std::collections::HashMap::new();
    let mut rows = Vec::new();
    for line in text.lines() {
        if let Some(rest) = line.strip_prefix("# ") {
            if let Some((k, v)) = rest.split_once('=') {
                meta.insert(k.to_string(), v.to_string());
            }
        } else if !line.starts_with("m,") && !line.is_empty() {
            rows.push(line.to_string());
        }
    }
    let get = |k: &str| meta.get(k).cloned().ok_or_else(|| bad(path, format!("missing `{k}`")));
    if get("profile")? != profile_tag(profile) {
        return Err(bad(path, "cached profile does not match"));
    }
    let m_max: usize = get("m_max")?.parse().map_err(|_| bad(path, "m_max"))?;
    let lambda_max: f64 = get("lambda_max")?.parse().map_err(|_| bad(path, "lambda_max"))?;
    let fine_cells: usize = get("fine_cells")?.parse().map_err(|_| bad(path, "fine_cells"))?;
    let mut radial = Vec::with_capacity(rows.len());
    for row in rows {
        let fields: Vec<&str> = row.split(',').collect();
        if fields.len() != 3 {
            return Err(bad(path, format!("malformed row `{row}`")));
        }
        let m: usize = fields[0].parse().map_err(|_| bad(path, format!("m in `{row}`")))?;
        let lambda: f64 = fields[1].parse().map_err(|_| bad(path, format!("lambda in `{row}`")))?;
        let mu: f64 = fields[2].parse().map_err(|_| bad(path, format!("eigenvalue in `{row}`")))?;
        let values = radial_vector(profile, m, fine_cells, mu);
        radial.push(RadialMode { m, lambda, discrete_eigenvalue: mu, values });
    }
    Ok(assemble(profile.clone(), radial, fine_cells, m_max, lambda_max))
}

/// Load the spectrum from `dir` when cached, otherwise solve and store it.
pub fn sor_basis_cached(profile: &Profile, m_max: usize, lambda_max: f64, dir: &Path) -> Result<EigenData> {
    let path: PathBuf = dir.join(cache_name(profile, m_max, lambda_max));
    if path.exists() {
        let b = read_cache(&path, profile)?;
        if let Family::Revolution { nodes, .. } = &b.family {
            if nodes.len() == 2 * default_cells(lambda_max) {
                return Ok(b);
            }
        }
    }
    let b = sor_basis(profile, m_max, lambda_max)?;
    fs::create_dir_all(dir)?;
    write_cache(&b, &path)?;
    Ok(b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_reproduces_eigenfunctions() {
        let dir = tempfile::tempdir().unwrap();
        let p = Profile::Sine;
        let fresh = sor_basis_cached(&p, 2, 6.0, dir.path()).unwrap();
        let loaded = sor_basis_cached(&p, 2, 6.0, dir.path()).unwrap();
        assert_eq!(fresh.eigenvalues(), loaded.eigenvalues());
        let x = [0.7, 1.9];
        for j in 0..fresh.len() {
            let a = fresh.eval_mode(j, &x).unwrap();
            let b = loaded.eval_mode(j, &x).unwrap();
            assert!((a - b).norm() < 1e-10, "mode {j}");
        }
    }
}
