//! Per-weight eigenform cache in a line-oriented text format.
//!
//! Each file stores the exact defining data (Hecke operator, its integer
//! matrix on the echelon basis, the characteristic polynomial) together with
//! decimal λ values that round-trip exactly at the recorded precision. The
//! last line is a SHA-256 digest of everything before it.

use super::basis::HeckeOperator;
use super::eigen::{eigenforms, Eigenform};
use super::poly::IntPoly;
use crate::error::{Error, Result};
use rug::{Float, Integer};
use sha2::{Digest, Sha256};
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

pub const CACHE_ENV: &str = "RANKIN_LAB_CACHE";
const MAGIC: &str = "rankin-lab eigenforms v1";

#[derive(Debug, Clone)]
pub struct EigenCache {
    dir: PathBuf,
}

impl EigenCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        EigenCache { dir: dir.into() }
    }

    /// Cache rooted at `$RANKIN_LAB_CACHE`, if set.
    pub fn from_env() -> Option<Self> {
        std::env::var_os(CACHE_ENV).filter(|v| !v.is_empty()).map(|v| EigenCache::new(PathBuf::from(v)))
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path_for(&self, k: u32) -> PathBuf {
        self.dir.join(format!("weight_{k:03}.eig"))
    }

    /// Writes the forms of weight k atomically; returns the digest.
    pub fn store(&self, k: u32, forms: &[Eigenform]) -> Result<String> {
        std::fs::create_dir_all(&self.dir)?;
        let text = serialize(k, forms);
        let mut tmp = tempfile::NamedTempFile::new_in(&self.dir)?;
        tmp.write_all(text.as_bytes())?;
        tmp.flush()?;
        tmp.persist(self.path_for(k)).map_err(|e| Error::Io(e.to_string()))?;
        Ok(digest_line(&text).unwrap_or_default())
    }

    /// Reads the file for weight k. A missing file gives `Ok(None)`; a damaged
    /// one gives a cache error.
    pub fn load(&self, k: u32) -> Result<Option<(Vec<Eigenform>, String)>> {
        let path = self.path_for(k);
        let text = match std::fs::read_to_string(&path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(e.into()),
        };
        let (forms, digest) = parse(&text)?;
        if forms.first().is_some_and(|f| f.weight != k) {
            return Err(Error::Cache(format!("{} holds a different weight", path.display())));
        }
        Ok(Some((forms, digest)))
    }

    /// Cached forms when they cover (N, P); otherwise compute and store.
    /// Damaged files are removed and recomputed.
    pub fn load_or_compute(&self, k: u32, n: usize, prec: u32) -> Result<(Vec<Eigenform>, String)> {
        match self.load(k) {
            Ok(Some((forms, digest))) => {
                if forms.iter().all(|f| f.bound >= n && f.precision == prec) {
                    let forms = forms.into_iter().map(|f| truncate(f, n)).collect();
                    return Ok((forms, digest));
                }
            }
            Ok(None) => {}
            Err(_) => {
                let _ = std::fs::remove_file(self.path_for(k));
            }
        }
        let forms = eigenforms(k, n, prec)?;
        let digest = self.store(k, &forms)?;
        Ok((forms, digest))
    }
}

fn truncate(mut f: Eigenform, n: usize) -> Eigenform {
    if f.bound > n {
        f.lambda.truncate(n + 1);
        if let Some(e) = f.exact.as_mut() {
            e.truncate(n + 1);
        }
        f.bound = n;
    }
    f
}

fn dec(x: &Float) -> String {
    x.to_string_radix(10, None)
}

pub fn serialize(k: u32, forms: &[Eigenform]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{MAGIC}");
    let _ = writeln!(s, "weight {k}");
    let _ = writeln!(s, "forms {}", forms.len());
    for f in forms {
        let _ = writeln!(s, "form {}", f.index);
        let _ = writeln!(s, "bound {}", f.bound);
        let _ = writeln!(s, "precision {}", f.precision);
        let _ = writeln!(s, "operator {}", f.operator);
        let _ = writeln!(s, "charpoly {}", join(f.charpoly.coeffs.iter().map(|c| c.to_string())));
        let rows: Vec<String> = f.operator_matrix.iter().map(|r| join(r.iter().map(|c| c.to_string()))).collect();
        let _ = writeln!(s, "matrix {}", rows.join(" ; "));
        let _ = writeln!(s, "root_index {}", f.root_index);
        let _ = writeln!(s, "eigenvalue {}", dec(&f.eigenvalue));
        let _ = writeln!(s, "combination {}", join(f.combination.iter().map(dec)));
        if let Some(e) = &f.exact {
            let _ = writeln!(s, "exact {}", e.len());
            for c in e {
                let _ = writeln!(s, "{c}");
            }
        }
        let _ = writeln!(s, "lambda {}", f.lambda.len() - 1);
        for x in &f.lambda[1..] {
            let _ = writeln!(s, "{}", dec(x));
        }
    }
    let d = hex::encode(Sha256::digest(s.as_bytes()));
    let _ = writeln!(s, "digest {d}");
    s
}

fn join(it: impl Iterator<Item = String>) -> String {
    it.collect::<Vec<_>>().join(" ")
}

fn digest_line(text: &str) -> Option<String> {
    text.lines().last()?.strip_prefix("digest ").map(str::to_string)
}

fn bad(msg: &str) -> Error {
    Error::Cache(msg.to_string())
}

pub fn parse(text: &str) -> Result<(Vec<Eigenform>, String)> {
    let body_end = text.rfind("digest ").ok_or_else(|| bad("missing digest"))?;
    let body = &text[..body_end];
    let recorded = text[body_end + 7..].trim();
    let actual = hex::encode(Sha256::digest(body.as_bytes()));
    if recorded != actual {
        return Err(bad("digest mismatch"));
    }
    let mut lines = body.lines();
    let mut next = || lines.next().ok_or_else(|| bad("truncated file"));
    if next()? != MAGIC {
        return Err(bad("unknown format"));
    }
    let weight: u32 = field(next()?, "weight")?.parse().map_err(|_| bad("weight"))?;
    let count: usize = field(next()?, "forms")?.parse().map_err(|_| bad("forms"))?;
    let mut forms = Vec::with_capacity(count);
    for _ in 0..count {
        let index: usize = num(field(next()?, "form")?)?;
        let bound: usize = num(field(next()?, "bound")?)?;
        let precision: u32 = num(field(next()?, "precision")?)?;
        let operator = HeckeOperator::parse(field(next()?, "operator")?).ok_or_else(|| bad("operator"))?;
        let charpoly = IntPoly::new(ints(field(next()?, "charpoly")?)?);
        let matrix_text = field(next()?, "matrix")?;
        let operator_matrix = matrix_text.split(';').map(|r| ints(r.trim())).collect::<Result<Vec<_>>>()?;
        let root_index: usize = num(field(next()?, "root_index")?)?;
        let eigenvalue = float(precision, field(next()?, "eigenvalue")?)?;
        let combination =
            field(next()?, "combination")?.split_whitespace().map(|t| float(precision, t)).collect::<Result<Vec<_>>>()?;
        let mut line = next()?;
        let mut exact = None;
        if let Ok(len) = field(line, "exact") {
            let len: usize = num(len)?;
            let mut e = Vec::with_capacity(len);
            for _ in 0..len {
                e.push(next()?.parse::<Integer>().map_err(|_| bad("exact coefficient"))?);
            }
            exact = Some(e);
            line = next()?;
        }
        let len: usize = num(field(line, "lambda")?)?;
        if len != bound {
            return Err(bad("lambda length disagrees with bound"));
        }
        let mut lambda = Vec::with_capacity(len + 1);
        lambda.push(Float::new(precision));
        for _ in 0..len {
            lambda.push(float(precision, next()?)?);
        }
        forms.push(Eigenform {
            weight,
            bound,
            precision,
            lambda,
            charpoly,
            operator,
            root_index,
            operator_matrix,
            eigenvalue,
            combination,
            index,
            exact,
        });
    }
    Ok((forms, actual))
}

fn field<'a>(line: &'a str, key: &str) -> Result<&'a str> {
    line.strip_prefix(key)
        .and_then(|r| r.strip_prefix(' ').or(if r.is_empty() { Some("") } else { None }))
        .ok_or_else(|| bad(&format!("expected `{key}`")))
}

fn num<T: std::str::FromStr>(s: &str) -> Result<T> {
    s.trim().parse().map_err(|_| bad("number"))
}

fn ints(s: &str) -> Result<Vec<Integer>> {
    s.split_whitespace().map(|t| t.parse::<Integer>().map_err(|_| bad("integer"))).collect()
}

fn float(prec: u32, s: &str) -> Result<Float> {
    let parsed = Float::parse(s.trim()).map_err(|_| bad("decimal value"))?;
    Ok(Float::with_val(prec, parsed))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_bit_identical() {
        let dir = tempfile::tempdir().unwrap();
        let cache = EigenCache::new(dir.path());
        let forms = eigenforms(24, 200, 192).unwrap();
        cache.store(24, &forms).unwrap();
        let (back, _) = cache.load(24).unwrap().unwrap();
        assert_eq!(back.len(), forms.len());
        for (a, b) in forms.iter().zip(&back) {
            assert_eq!(a.lambda, b.lambda);
            assert_eq!(a.charpoly, b.charpoly);
            assert_eq!(a.operator_matrix, b.operator_matrix);
            assert_eq!(a.eigenvalue, b.eigenvalue);
            assert_eq!(a.combination, b.combination);
            let sa: Vec<String> = a.lambda.iter().map(dec).collect();
            let sb: Vec<String> = b.lambda.iter().map(dec).collect();
            assert_eq!(sa, sb);
        }
    }

    #[test]
    fn exact_block_for_one_dimensional_space() {
        let dir = tempfile::tempdir().unwrap();
        let cache = EigenCache::new(dir.path());
        let forms = eigenforms(12, 50, 128).unwrap();
        cache.store(12, &forms).unwrap();
        let (back, _) = cache.load(12).unwrap().unwrap();
        assert_eq!(back[0].exact, forms[0].exact);
    }

    #[test]
    fn truncated_file_is_invalidated() {
        let dir = tempfile::tempdir().unwrap();
        let cache = EigenCache::new(dir.path());
        let forms = eigenforms(24, 100, 128).unwrap();
        cache.store(24, &forms).unwrap();
        let path = cache.path_for(24);
        let text = std::fs::read_to_string(&path).unwrap();
        std::fs::write(&path, &text[..text.len() / 2]).unwrap();
        assert!(matches!(cache.load(24), Err(Error::Cache(_))));
        let (again, _) = cache.load_or_compute(24, 100, 128).unwrap();
        assert_eq!(again[0].lambda, forms[0].lambda);
        assert!(cache.load(24).unwrap().is_some());
    }

    #[test]
    fn concurrent_writers_leave_one_valid_file() {
        let dir = tempfile::tempdir().unwrap();
        let forms = eigenforms(24, 60, 128).unwrap();
        std::thread::scope(|s| {
            for _ in 0..4 {
                let cache = EigenCache::new(dir.path());
                let forms = &forms;
                s.spawn(move || cache.store(24, forms).unwrap());
            }
        });
        let cache = EigenCache::new(dir.path());
        let (back, _) = cache.load(24).unwrap().unwrap();
        assert_eq!(back[1].lambda, forms[1].lambda);
        let leftovers = std::fs::read_dir(dir.path()).unwrap().count();
        assert_eq!(leftovers, 1);
    }

    #[test]
    fn other_weights_untouched() {
        let dir = tempfile::tempdir().unwrap();
        let cache = EigenCache::new(dir.path());
        cache.load_or_compute(12, 30, 128).unwrap();
        let before = std::fs::read(cache.path_for(12)).unwrap();
        cache.load_or_compute(24, 30, 128).unwrap();
        assert_eq!(std::fs::read(cache.path_for(12)).unwrap(), before);
    }
}
