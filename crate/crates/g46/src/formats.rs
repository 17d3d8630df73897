//! Versioned text formats: the expansion cache, polynomial files, and
//! combination spec files, plus atomic file replacement.
//!
//! Cache format (`G46CACHE v1`): one line per weight, ascending, each
//! holding `k;b:num/den,...` with b ascending and rationals always
//! rendered with an explicit denominator. Round trips are bit-exact.
//!
//! Polynomial format (`FABERPOLY v1 d=N`): one `r num/den` row per
//! coefficient, r ascending from 0 to the degree. Blank lines and lines
//! starting with `#` are ignored, so reports may carry commentary.
//!
//! Combination spec format: `key=value` lines for keys D, l, a, m (the
//! list values comma-separated), with `#` comments allowed.

use std::path::Path;
use std::sync::Arc;

use num_traits::Zero;

use crate::arith::{parse_rat, rat_str, Rat};
use crate::error::{Error, Result};
use crate::expansion::{Cache, Expansion, Route};
use crate::faber::{ComboSpec, FaberPolynomial};

const CACHE_HEADER: &str = "G46CACHE v1";
const POLY_MAGIC: &str = "FABERPOLY";
const POLY_VERSION: &str = "v1";

/// Render expansions (assumed weight-ascending) in cache format.
pub fn render_cache(entries: &[Arc<Expansion>]) -> String {
    let mut out = String::from(CACHE_HEADER);
    out.push('\n');
    for e in entries {
        out.push_str(&e.k().to_string());
        out.push(';');
        let terms: Vec<String> =
            e.terms().map(|(b, w)| format!("{b}:{}", rat_str(w))).collect();
        out.push_str(&terms.join(","));
        out.push('\n');
    }
    out
}

/// Parse cache text; weights must be strictly ascending and every slot
/// valid for its weight.
pub fn parse_cache(text: &str) -> Result<Vec<Expansion>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim_end() == CACHE_HEADER => {}
        other => {
            return Err(Error::Format(format!(
                "cache header must be '{CACHE_HEADER}', got {other:?}"
            )));
        }
    }
    let mut out = Vec::new();
    let mut last_k = 0u64;
    for (idx, line) in lines.enumerate() {
        let line = line.trim_end();
        if line.is_empty() {
            continue;
        }
        let lineno = idx + 2;
        let (k_str, terms_str) = line
            .split_once(';')
            .ok_or_else(|| Error::Format(format!("cache line {lineno}: missing ';'")))?;
        let k: u64 = k_str
            .parse()
            .map_err(|_| Error::Format(format!("cache line {lineno}: bad weight '{k_str}'")))?;
        if k <= last_k {
            return Err(Error::Format(format!(
                "cache line {lineno}: weights must be strictly ascending"
            )));
        }
        last_k = k;
        let mut terms: Vec<(u64, Rat)> = Vec::new();
        for part in terms_str.split(',') {
            let (b_str, w_str) = part.split_once(':').ok_or_else(|| {
                Error::Format(format!("cache line {lineno}: term '{part}' lacks ':'"))
            })?;
            let b: u64 = b_str.parse().map_err(|_| {
                Error::Format(format!("cache line {lineno}: bad slot '{b_str}'"))
            })?;
            let w = parse_rat(w_str).map_err(|e| {
                Error::Format(format!("cache line {lineno}: {e}"))
            })?;
            terms.push((b, w));
        }
        let e = Expansion::from_terms(k, &terms, Route::Loaded)
            .map_err(|e| Error::Format(format!("cache line {lineno}: {e}")))?;
        out.push(e);
    }
    Ok(out)
}

/// Load a cache file into `cache` if the file exists; returns how many
/// entries the file held. Already-present weights win over loaded ones.
pub fn load_cache_file(cache: &Cache, path: &Path) -> Result<usize> {
    if !path.exists() {
        return Ok(0);
    }
    let text = std::fs::read_to_string(path)?;
    let entries = parse_cache(&text)?;
    let n = entries.len();
    for e in entries {
        cache.insert_loaded(e);
    }
    Ok(n)
}

/// Atomically replace `path` with `content` (write to a sibling temp file,
/// then rename).
pub fn atomic_write(path: &Path, content: &str) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let name = path
        .file_name()
        .ok_or_else(|| Error::Format(format!("not a writable path: {}", path.display())))?;
    let tmp = dir.join(format!(
        ".{}.tmp{}",
        name.to_string_lossy(),
        std::process::id()
    ));
    std::fs::write(&tmp, content)?;
    std::fs::rename(&tmp, path).map_err(|e| {
        let _ = std::fs::remove_file(&tmp);
        Error::Io(e)
    })
}

/// Write the cache's current contents to `path` atomically.
pub fn write_cache_file(cache: &Cache, path: &Path) -> Result<()> {
    atomic_write(path, &render_cache(&cache.entries()))
}

/// Render a polynomial in polynomial-file format.
pub fn render_poly(p: &FaberPolynomial) -> String {
    let mut out = format!("{POLY_MAGIC} {POLY_VERSION} d={}\n", p.degree());
    for (r, c) in p.coeffs().iter().enumerate() {
        out.push_str(&format!("{r} {}\n", rat_str(c)));
    }
    out
}

/// Parse polynomial text: a header, then exactly one row per coefficient
/// in degree order. `#` lines and blank lines are skipped anywhere.
pub fn parse_poly(text: &str) -> Result<FaberPolynomial> {
    let mut rows = text
        .lines()
        .map(str::trim_end)
        .filter(|l| !l.trim_start().is_empty() && !l.trim_start().starts_with('#'));
    let header = rows
        .next()
        .ok_or_else(|| Error::Format("empty polynomial file".into()))?;
    let parts: Vec<&str> = header.split_whitespace().collect();
    let d: u64 = match parts.as_slice() {
        [POLY_MAGIC, POLY_VERSION, dpart] if dpart.starts_with("d=") => dpart[2..]
            .parse()
            .map_err(|_| Error::Format(format!("bad degree in header '{header}'")))?,
        _ => {
            return Err(Error::Format(format!(
                "polynomial header must be '{POLY_MAGIC} {POLY_VERSION} d=N', got '{header}'"
            )));
        }
    };
    let mut coeffs = Vec::with_capacity(d as usize + 1);
    for want_r in 0..=d {
        let row = rows.next().ok_or_else(|| {
            Error::Format(format!("missing coefficient row r={want_r} (degree {d})"))
        })?;
        let (r_str, c_str) = row
            .trim_start()
            .split_once(char::is_whitespace)
            .ok_or_else(|| Error::Format(format!("bad coefficient row '{row}'")))?;
        let r: u64 = r_str
            .parse()
            .map_err(|_| Error::Format(format!("bad row index '{r_str}'")))?;
        if r != want_r {
            return Err(Error::Format(format!("expected row r={want_r}, got r={r}")));
        }
        coeffs.push(parse_rat(c_str.trim())?);
    }
    if let Some(extra) = rows.next() {
        return Err(Error::Format(format!(
            "unexpected content after {} coefficient rows: '{extra}'",
            d + 1
        )));
    }
    if coeffs.last().map(Zero::is_zero) == Some(true) {
        return Err(Error::Format(format!("leading coefficient (r={d}) is zero")));
    }
    FaberPolynomial::new(coeffs, "file")
}

/// Parse a combination spec file of `key=value` lines (keys D, l, a, m).
pub fn parse_combo(text: &str) -> Result<ComboSpec> {
    let mut d: Option<u64> = None;
    let mut ell: Option<u32> = None;
    let mut a: Option<Vec<u32>> = None;
    let mut m: Option<Vec<i64>> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let lineno = idx + 1;
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::Format(format!("combo line {lineno}: expected key=value")))?;
        let (key, value) = (key.trim(), value.trim());
        let dup = |k: &str| Error::Format(format!("combo line {lineno}: duplicate key '{k}'"));
        let bad =
            |k: &str| Error::Format(format!("combo line {lineno}: bad value for '{k}'"));
        match key {
            "D" => {
                if d.replace(value.parse().map_err(|_| bad("D"))?).is_some() {
                    return Err(dup("D"));
                }
            }
            "l" => {
                if ell.replace(value.parse().map_err(|_| bad("l"))?).is_some() {
                    return Err(dup("l"));
                }
            }
            "a" => {
                let list = value
                    .split(',')
                    .map(|s| s.trim().parse::<u32>().map_err(|_| bad("a")))
                    .collect::<Result<Vec<u32>>>()?;
                if a.replace(list).is_some() {
                    return Err(dup("a"));
                }
            }
            "m" => {
                let list = value
                    .split(',')
                    .map(|s| s.trim().parse::<i64>().map_err(|_| bad("m")))
                    .collect::<Result<Vec<i64>>>()?;
                if m.replace(list).is_some() {
                    return Err(dup("m"));
                }
            }
            other => {
                return Err(Error::Format(format!(
                    "combo line {lineno}: unknown key '{other}'"
                )));
            }
        }
    }
    let missing = |k: &str| Error::Format(format!("combo spec is missing key '{k}'"));
    Ok(ComboSpec {
        d: d.ok_or_else(|| missing("D"))?,
        ell: ell.ok_or_else(|| missing("l"))?,
        a: a.ok_or_else(|| missing("a"))?,
        m: m.ok_or_else(|| missing("m"))?,
    })
}

/// Read and parse a combination spec file.
pub fn read_combo_file(path: &Path) -> Result<ComboSpec> {
    parse_combo(&std::fs::read_to_string(path)?)
}

/// Read and parse a polynomial file.
pub fn read_poly_file(path: &Path) -> Result<FaberPolynomial> {
    parse_poly(&std::fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::faber::faber_square_combo;

    #[test]
    fn cache_round_trip_bit_exact() {
        let cache = Cache::new();
        cache.ensure_through(24, 1, None).unwrap();
        let text = render_cache(&cache.entries());
        let parsed = parse_cache(&text).unwrap();
        assert_eq!(parsed.len(), 11);
        for e in &parsed {
            assert_eq!(e.route(), Route::Loaded);
            let orig = cache.peek(e.k()).unwrap();
            let a: Vec<(u64, Rat)> = e.terms().map(|(b, w)| (b, w.clone())).collect();
            let b: Vec<(u64, Rat)> = orig.terms().map(|(b, w)| (b, w.clone())).collect();
            assert_eq!(a, b, "k={}", e.k());
        }
        let arcs: Vec<Arc<Expansion>> = parsed.into_iter().map(Arc::new).collect();
        assert_eq!(render_cache(&arcs), text);
    }

    #[test]
    fn cache_exact_text_frozen() {
        let text = "G46CACHE v1\n4;0:1/1\n6;1:1/1\n8;0:3/7\n12;0:18/143,2:25/143\n";
        let parsed = parse_cache(text).unwrap();
        assert_eq!(parsed.len(), 4);
        let cache = Cache::new();
        cache.ensure_through(12, 1, None).unwrap();
        for e in &parsed {
            if e.k() == 12 || e.k() == 8 {
                let computed = cache.peek(e.k()).unwrap();
                let a: Vec<(u64, Rat)> = e.terms().map(|(b, w)| (b, w.clone())).collect();
                let b: Vec<(u64, Rat)> =
                    computed.terms().map(|(b, w)| (b, w.clone())).collect();
                assert_eq!(a, b, "k={}", e.k());
            }
        }
        let arcs: Vec<Arc<Expansion>> = parsed.into_iter().map(Arc::new).collect();
        assert_eq!(render_cache(&arcs), text);
    }

    #[test]
    fn cache_rejects_malformed_text() {
        let bad = [
            "NOCACHE v1\n4;0:1/1\n",            // header
            "G46CACHE v2\n",                     // version
            "G46CACHE v1\n12;0:18/143\n8;0:3/7\n", // descending
            "G46CACHE v1\n8;0:3/7\n8;0:3/7\n",   // repeated weight
            "G46CACHE v1\n7;0:1/1\n",            // odd weight
            "G46CACHE v1\n12;1:1/1\n",           // wrong slot parity
            "G46CACHE v1\n12;0:18/143,0:1/1\n",  // duplicate slot
            "G46CACHE v1\n8;0:3/0\n",            // zero denominator
            "G46CACHE v1\n8;0 3/7\n",            // missing colon
            "G46CACHE v1\n8:0,3/7\n",            // missing semicolon
        ];
        for text in bad {
            assert!(parse_cache(text).is_err(), "accepted: {text:?}");
        }
    }

    #[test]
    fn cache_file_round_trip_with_merge() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cache.txt");
        let cache = Cache::new();
        cache.ensure_through(16, 1, None).unwrap();
        write_cache_file(&cache, &path).unwrap();

        // Loading into a fresh cache recovers every weight; computing again
        // on top keeps the loaded entries (first insert wins).
        let reloaded = Cache::new();
        let n = load_cache_file(&reloaded, &path).unwrap();
        assert_eq!(n, 7);
        assert_eq!(reloaded.weights(), cache.weights());
        assert_eq!(reloaded.peek(16).unwrap().route(), Route::Loaded);
        reloaded.ensure_through(20, 1, None).unwrap();
        assert_eq!(reloaded.peek(16).unwrap().route(), Route::Loaded);
        assert_eq!(reloaded.peek(20).unwrap().route(), Route::Romik);

        // Missing file loads nothing.
        assert_eq!(load_cache_file(&Cache::new(), &dir.path().join("absent")).unwrap(), 0);
        // No temp droppings left behind.
        let names: Vec<_> = std::fs::read_dir(dir.path())
            .unwrap()
            .map(|e| e.unwrap().file_name())
            .collect();
        assert_eq!(names.len(), 1);
    }

    #[test]
    fn poly_round_trip() {
        let cache = Cache::new();
        let p = faber_square_combo(&cache, 12, 1).unwrap();
        let text = render_poly(&p);
        assert!(text.starts_with("FABERPOLY v1 d=2\n"));
        assert!(text.ends_with("2 1/1\n"));
        let q = parse_poly(&text).unwrap();
        assert_eq!(p.coeffs(), q.coeffs());
        assert_eq!(render_poly(&q), text);
    }

    #[test]
    fn poly_parser_skips_comments_and_blanks() {
        let text = "# output table\n\nFABERPOLY v1 d=1\n# constant\n0 -3/2\n\n1 1/1\n# trailing note\n";
        let p = parse_poly(text).unwrap();
        assert_eq!(p.degree(), 1);
        assert_eq!(rat_str(p.coeff(0)), "-3/2");
    }

    #[test]
    fn poly_parser_rejects_malformed_text() {
        let bad = [
            "",                                      // empty
            "FABERPOLY v2 d=1\n0 1/1\n1 1/1\n",      // version
            "FABERPOLY v1 d=x\n",                    // degree
            "FABERPOLY v1 d=1\n0 1/1\n",             // missing row
            "FABERPOLY v1 d=1\n1 1/1\n0 1/1\n",      // out of order
            "FABERPOLY v1 d=1\n0 1/1\n1 1/1\n2 1/1\n", // extra row
            "FABERPOLY v1 d=1\n0 1/1\n1 0/1\n",      // zero leading coeff
            "FABERPOLY v1 d=1\n0 one\n1 1/1\n",      // bad rational
        ];
        for text in bad {
            assert!(parse_poly(text).is_err(), "accepted: {text:?}");
        }
    }

    #[test]
    fn combo_parsing() {
        let spec = parse_combo("D=1\nl=2\na=0,1,2\nm=1,3,2\n").unwrap();
        assert_eq!(spec, ComboSpec { d: 1, ell: 2, a: vec![0, 1, 2], m: vec![1, 3, 2] });
        // Comments, blanks, spacing, negative multipliers.
        let spec =
            parse_combo("# spec\n\n D = 1 \nl=1\na = 0, 1\nm = 3, -1\n").unwrap();
        assert_eq!(spec.m, vec![3, -1]);

        let bad = [
            "l=1\na=0\nm=1\n",              // missing D
            "D=1\nl=1\na=0\nm=1\nD=2\n",    // duplicate
            "D=1\nl=1\na=0\nm=1\nz=3\n",    // unknown key
            "D=one\nl=1\na=0\nm=1\n",       // bad int
            "D=1\nl=1\na=0;1\nm=1\n",       // bad list
            "D=1 l=1\n",                    // missing '='... malformed line
        ];
        for text in bad {
            assert!(parse_combo(text).is_err(), "accepted: {text:?}");
        }
    }

    #[test]
    fn atomic_write_replaces_content() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.txt");
        atomic_write(&path, "first\n").unwrap();
        atomic_write(&path, "second\n").unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "second\n");
        let names: Vec<_> = std::fs::read_dir(dir.path())
            .unwrap()
            .map(|e| e.unwrap().file_name())
            .collect();
        assert_eq!(names.len(), 1);
    }
}
