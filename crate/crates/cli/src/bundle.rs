//! A bundle on disk: one directory holding `lambda.json`, `b.json`,
//! `a.json` and, once verified, `report.json`.

use std::io::Write;
use std::path::{Path, PathBuf};

use nnrank_core::construction::{AnyBundle, Bundle, ChainOrigin, HChain, ScalarMode, SurrogateSpec};
use nnrank_core::scalar::{FloatInterval, Rational};
use sha2::{Digest, Sha256};

use crate::format::{interval_entry, parse_interval_entry, parse_rational_entry, rational_entry, FormatError, MatrixFile, ModeMeta};

pub const LAMBDA_FILE: &str = "lambda.json";
pub const B_FILE: &str = "b.json";
pub const A_FILE: &str = "a.json";
pub const REPORT_FILE: &str = "report.json";

#[derive(Debug, thiserror::Error)]
pub enum LoadError {
    #[error("cannot read {path}: {source}")]
    Missing { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Format { path: PathBuf, source: FormatError },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BundleFiles {
    pub lambda: MatrixFile,
    pub b: MatrixFile,
    pub a: MatrixFile,
}

pub fn mode_meta(bundle: &AnyBundle) -> ModeMeta {
    let (mode, h1, surrogate_spec) = match bundle.origin() {
        ChainOrigin::PaperChain { h1 } => ("paper", Some(h1.to_canonical_string()), None),
        ChainOrigin::Surrogate(spec) => ("surrogate", None, Some(spec.to_string())),
    };
    let precision_bits = match bundle.mode() {
        ScalarMode::PaperInterval { precision_bits } => Some(precision_bits),
        ScalarMode::SurrogateExact => None,
    };
    ModeMeta { k: Some(bundle.k()), mode: Some(mode.into()), h1, surrogate_spec, precision_bits }
}

pub fn bundle_to_files(bundle: &AnyBundle) -> BundleFiles {
    let meta = mode_meta(bundle);
    match bundle {
        AnyBundle::Exact(b) => {
            let mut bf = MatrixFile::from_rational(&b.b, meta.clone());
            bf.chain = Some(b.chain.values().iter().map(rational_entry).collect());
            BundleFiles {
                lambda: MatrixFile::from_integers(&b.lambda, meta.clone()),
                b: bf,
                a: MatrixFile::from_rational(&b.a, meta),
            }
        }
        AnyBundle::Interval(b) => {
            let mut bf = MatrixFile::from_interval(&b.b, meta.clone());
            bf.chain = Some(b.chain.values().iter().map(interval_entry).collect());
            BundleFiles {
                lambda: MatrixFile::from_integers(&b.lambda, meta.clone()),
                b: bf,
                a: MatrixFile::from_interval(&b.a, meta),
            }
        }
    }
}

fn check_dims(name: &str, f: &MatrixFile, rows: usize, cols: usize) -> Result<(), FormatError> {
    if (f.rows, f.cols) != (rows, cols) {
        return Err(FormatError::Shape(format!("{name} is {}x{}, expected {rows}x{cols}", f.rows, f.cols)));
    }
    Ok(())
}

/// Rebuilds the in-memory bundle. Only shapes are checked here; whether
/// the numbers satisfy the construction is the verifier's job.
pub fn files_to_bundle(files: &BundleFiles) -> Result<AnyBundle, FormatError> {
    let meta = &files.b.meta;
    let chain = files.b.chain.as_ref().ok_or(FormatError::MissingMeta("chain"))?;
    let k = chain.len();
    if k == 0 {
        return Err(FormatError::Invalid("chain is empty".into()));
    }
    if meta.k.is_some_and(|mk| mk != k) {
        return Err(FormatError::Invalid(format!("meta.k = {:?} but the chain has {k} values", meta.k)));
    }
    check_dims("lambda", &files.lambda, 3, 3)?;
    check_dims("b", &files.b, 2 * k, 3)?;
    check_dims("a", &files.a, 2 * k, 2 * k)?;
    let lambda = files.lambda.to_integers()?;
    let chain_err = |i: usize| move |msg: String| FormatError::Invalid(format!("chain value {}: {msg}", i + 1));
    match meta.mode.as_deref() {
        Some("surrogate") => {
            let spec: SurrogateSpec = meta
                .surrogate_spec
                .as_deref()
                .ok_or(FormatError::MissingMeta("surrogate_spec"))?
                .parse()
                .map_err(|e| FormatError::Invalid(format!("{e}")))?;
            let values = chain
                .iter()
                .enumerate()
                .map(|(i, e)| parse_rational_entry(e).map_err(chain_err(i)))
                .collect::<Result<Vec<Rational>, _>>()?;
            let chain = HChain::from_values_unchecked(values, ChainOrigin::Surrogate(spec));
            Ok(AnyBundle::Exact(Bundle { chain, lambda, b: files.b.to_rational()?, a: files.a.to_rational()? }))
        }
        Some("paper") => {
            let h1: Rational = meta
                .h1
                .as_deref()
                .ok_or(FormatError::MissingMeta("h1"))?
                .parse()
                .map_err(|e| FormatError::Invalid(format!("h1: {e}")))?;
            let prec = files.b.precision()?;
            let values = chain
                .iter()
                .enumerate()
                .map(|(i, e)| parse_interval_entry(e, prec).map_err(chain_err(i)))
                .collect::<Result<Vec<FloatInterval>, _>>()?;
            let chain = HChain::from_values_unchecked(values, ChainOrigin::PaperChain { h1 });
            Ok(AnyBundle::Interval(Bundle { chain, lambda, b: files.b.to_interval()?, a: files.a.to_interval()? }))
        }
        Some(other) => Err(FormatError::Invalid(format!("unknown mode {other:?}"))),
        None => Err(FormatError::MissingMeta("mode")),
    }
}

/// SHA-256 over the canonical bytes of Λ, `B` and `A`, in that order, as
/// lowercase hex.
pub fn digest(files: &BundleFiles) -> String {
    let mut h = Sha256::new();
    for f in [&files.lambda, &files.b, &files.a] {
        h.update(f.canonical_bytes());
    }
    hex::encode(h.finalize())
}

/// Writes through a temporary file in the same directory, then renames.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

pub fn write_bundle(dir: &Path, files: &BundleFiles) -> std::io::Result<String> {
    std::fs::create_dir_all(dir)?;
    write_atomic(&dir.join(LAMBDA_FILE), &files.lambda.canonical_bytes())?;
    write_atomic(&dir.join(B_FILE), &files.b.canonical_bytes())?;
    write_atomic(&dir.join(A_FILE), &files.a.canonical_bytes())?;
    Ok(digest(files))
}

pub fn read_matrix_file(path: &Path) -> Result<MatrixFile, LoadError> {
    let bytes = std::fs::read(path).map_err(|source| LoadError::Missing { path: path.into(), source })?;
    MatrixFile::parse(&bytes).map_err(|source| LoadError::Format { path: path.into(), source })
}

pub fn read_bundle_files(dir: &Path) -> Result<BundleFiles, LoadError> {
    Ok(BundleFiles {
        lambda: read_matrix_file(&dir.join(LAMBDA_FILE))?,
        b: read_matrix_file(&dir.join(B_FILE))?,
        a: read_matrix_file(&dir.join(A_FILE))?,
    })
}

/// The bundle and its digest.
pub fn read_bundle(dir: &Path) -> Result<(AnyBundle, String), LoadError> {
    let files = read_bundle_files(dir)?;
    let bundle = files_to_bundle(&files).map_err(|source| LoadError::Format { path: dir.into(), source })?;
    Ok((bundle, digest(&files)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use nnrank_core::construction::SurrogateSpec;

    #[test]
    fn exact_bundle_round_trips() {
        let b: AnyBundle = Bundle::surrogate(3, &SurrogateSpec::default()).unwrap().into();
        let files = bundle_to_files(&b);
        assert_eq!(files_to_bundle(&files).unwrap(), b);
    }

    #[test]
    fn interval_bundle_round_trips() {
        let b: AnyBundle = Bundle::paper(2, &Rational::new(1, 10).unwrap(), 128).unwrap().into();
        let files = bundle_to_files(&b);
        assert_eq!(files.a.meta.precision_bits, Some(128));
        assert_eq!(files_to_bundle(&files).unwrap(), b);
    }

    #[test]
    fn digest_tracks_every_matrix() {
        let b: AnyBundle = Bundle::surrogate(2, &SurrogateSpec::default()).unwrap().into();
        let files = bundle_to_files(&b);
        let d = digest(&files);
        assert_eq!(d.len(), 64);
        assert_eq!(d, digest(&files.clone()));
        let mut changed = files.clone();
        changed.a.entries[0][0] = rational_entry(&Rational::from(7));
        assert_ne!(digest(&changed), d);
        let mut changed = files;
        changed.lambda.meta.k = Some(5);
        assert_ne!(digest(&changed), d);
    }

    #[test]
    fn shape_errors() {
        let b: AnyBundle = Bundle::surrogate(2, &SurrogateSpec::default()).unwrap().into();
        let mut files = bundle_to_files(&b);
        files.b.chain.as_mut().unwrap().pop();
        assert!(files_to_bundle(&files).is_err());
    }
}
